//! JSON encodings shared by the library and the command-line driver.
//!
//! Every float is written in scientific notation with 17 significant digits,
//! so files round-trip bit for bit and repeated runs produce identical bytes.

use std::io;

use serde::ser::Serialize;
use serde::{Deserialize, Serialize as SerializeDerive};
use serde_json::ser::{Formatter, PrettyFormatter, Serializer};

use crate::boundary::BoundaryValue;
use crate::error::{Error, Result};
use crate::reduction::RegimePair;
use crate::spectrum::{AsymptoticClass, SpectralData, Spectrum};

/// Pretty JSON with fixed-precision floats.
struct PreciseFormatter<'a>(PrettyFormatter<'a>);

macro_rules! forward {
    ($($name:ident($($arg:ident: $ty:ty),*);)*) => {
        $(fn $name<W: ?Sized + io::Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> io::Result<()> {
            self.0.$name(w $(, $arg)*)
        })*
    };
}

impl Formatter for PreciseFormatter<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{}", format_f64(value))
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(value))
    }

    forward! {
        begin_array();
        end_array();
        begin_array_value(first: bool);
        end_array_value();
        begin_object();
        end_object();
        begin_object_key(first: bool);
        begin_object_value();
        end_object_value();
    }
}

/// `{:.16e}` rendering used for JSON and CSV output.
pub fn format_f64(value: f64) -> String {
    format!("{value:.16e}")
}

/// Serialize to pretty JSON with 17 significant digits per float, newline-terminated.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = Serializer::with_formatter(&mut buf, PreciseFormatter(PrettyFormatter::new()));
    value
        .serialize(&mut ser)
        .map_err(|e| Error::MalformedInput(format!("serialization failed: {e}")))?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| Error::MalformedInput(e.to_string()))
}

/// On-disk form of [`SpectralData`]. The eigenvalue class follows from `H`.
#[derive(Debug, Clone, SerializeDerive, Deserialize)]
pub struct SpectralDataFile {
    pub eigenvalues: Vec<f64>,
    pub alphas: Vec<f64>,
    #[serde(rename = "H", default = "infinite")]
    pub left: BoundaryValue,
}

fn infinite() -> BoundaryValue {
    BoundaryValue::Infinite
}

impl From<&SpectralData> for SpectralDataFile {
    fn from(d: &SpectralData) -> Self {
        Self {
            eigenvalues: d.spectrum.eigenvalues().to_vec(),
            alphas: d.norming_constants.clone(),
            left: d.left,
        }
    }
}

impl TryFrom<SpectralDataFile> for SpectralData {
    type Error = Error;

    fn try_from(f: SpectralDataFile) -> Result<Self> {
        let class = if f.left.is_infinite() {
            AsymptoticClass::HalfIntegerCos
        } else {
            AsymptoticClass::IntegerCos
        };
        SpectralData::new(Spectrum::new(f.eigenvalues, class)?, f.alphas, f.left)
    }
}

/// On-disk form of a pair of spectra: squared eigenvalues for h₁ and h₂.
#[derive(Debug, Clone, SerializeDerive, Deserialize)]
pub struct TwoSpectraFile {
    pub regime: RegimePair,
    pub lambda_sq: Vec<f64>,
    pub mu_sq: Vec<f64>,
}

impl TwoSpectraFile {
    pub fn new(regime: RegimePair, lams: &Spectrum, mus: &Spectrum) -> Self {
        Self {
            regime,
            lambda_sq: lams.eigenvalues().to_vec(),
            mu_sq: mus.eigenvalues().to_vec(),
        }
    }

    /// Typed spectra, classed by `regime` (or an override).
    pub fn spectra(&self, regime: Option<RegimePair>) -> Result<(RegimePair, Spectrum, Spectrum)> {
        let regime = regime.unwrap_or(self.regime);
        let lams = Spectrum::new(self.lambda_sq.clone(), regime.lambda_class())?;
        let mus = Spectrum::new(self.mu_sq.clone(), regime.mu_class())?;
        Ok((regime, lams, mus))
    }
}
