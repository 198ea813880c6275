//! Staged output files, committed only once every computation has succeeded.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use slspec::io::{format_f64, to_json};

#[derive(Default)]
pub struct Outputs {
    files: Vec<(PathBuf, String)>,
}

impl Outputs {
    pub fn json<T: Serialize>(&mut self, path: impl Into<PathBuf>, value: &T) -> Result<()> {
        let path = path.into();
        let text = to_json(value).with_context(|| format!("encoding {}", path.display()))?;
        self.files.push((path, text));
        Ok(())
    }

    /// A two-column `n,value` series; `n` is 1-based.
    pub fn csv(&mut self, dir: Option<&Path>, name: &str, values: impl IntoIterator<Item = f64>) {
        let Some(dir) = dir else { return };
        let mut text = String::from("n,value\n");
        for (i, v) in values.into_iter().enumerate() {
            text.push_str(&format!("{},{}\n", i + 1, format_f64(v)));
        }
        self.files.push((dir.join(name), text));
    }

    /// Write every staged file through a temporary sibling and a rename.
    pub fn commit(self) -> Result<()> {
        for (path, text) in self.files {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
            }
            let mut tmp = path.clone().into_os_string();
            tmp.push(format!(".tmp{}", std::process::id()));
            let tmp = PathBuf::from(tmp);
            fs::write(&tmp, text).with_context(|| format!("writing {}", tmp.display()))?;
            fs::rename(&tmp, &path).with_context(|| format!("renaming into {}", path.display()))?;
        }
        Ok(())
    }
}
