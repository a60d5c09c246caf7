//! Spec files (TOML or JSON, chosen by extension) and named presets.

use std::path::Path;
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FiniteField;
use crate::linpoly::{EggSpecRecord, GoodEggSpec, LinearizedPoly};
use crate::spread::{DicksonSemifield, SemifieldRecord};
use crate::unital::FVConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Toml,
    Json,
}

impl Format {
    pub fn of_path(path: &Path) -> Result<Format> {
        match path.extension().and_then(|e| e.to_str()) {
            Some("toml") => Ok(Format::Toml),
            Some("json") => Ok(Format::Json),
            _ => Err(Error::Config(format!("{}: expected a .toml or .json file", path.display()))),
        }
    }
}

/// `{ p, m, modulus }` with the modulus as `[c_0, ..., c_m]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldRecord {
    pub p: u32,
    pub m: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus: Option<Vec<u32>>,
}

impl FieldRecord {
    pub fn build(&self) -> Result<FiniteField> {
        match &self.modulus {
            Some(modulus) => FiniteField::with_modulus(self.p, self.m, modulus.clone()),
            None => FiniteField::new(self.p, self.m),
        }
    }
}

/// A semifield together with the coefficients of `kappa`, which fixes
/// `V = {(t, kappa(t), 0, 0)}` inside `z`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FvRecord {
    pub semifield: SemifieldRecord,
    pub kappa: Vec<u64>,
}

impl FvRecord {
    pub fn build(&self) -> Result<FVConfig> {
        let d = DicksonSemifield::from_record(&self.semifield)?;
        let f = d.field().clone();
        let coeffs = self.kappa.iter().map(|&k| f.element(k)).collect::<Result<Vec<_>>>()?;
        FVConfig::new(d, LinearizedPoly::new(f, coeffs)?)
    }
}

pub fn parse<T: DeserializeOwned>(text: &str, format: Format) -> Result<T> {
    match format {
        Format::Toml => toml::from_str(text).map_err(|e| Error::Config(e.to_string())),
        Format::Json => serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("line {} column {}: {e}", e.line(), e.column()))),
    }
}

/// Reads a record, reporting parse errors with the file name and location.
pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let format = Format::of_path(path)?;
    let text = std::fs::read_to_string(path)?;
    parse(&text, format).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn egg_preset(name: &str) -> Result<GoodEggSpec> {
    match name {
        "pw" => Ok(GoodEggSpec::penttila_williams()),
        "elliptic-q3" => Ok(GoodEggSpec::elliptic_quadric_q3()),
        "bm-q3" => Ok(GoodEggSpec::buekenhout_metz_q3()),
        "kk-q3-m2" => Ok(GoodEggSpec::kantor_knuth_q3_m2()),
        _ => Err(Error::Config(format!("unknown egg preset {name:?} (pw, elliptic-q3, bm-q3, kk-q3-m2)"))),
    }
}

pub fn semifield_preset(name: &str) -> Result<DicksonSemifield> {
    match name {
        "pw" => Ok(DicksonSemifield::penttila_williams()),
        "d81" => Ok(DicksonSemifield::order_81()),
        "d9" => Ok(FVConfig::order_nine().semifield().clone()),
        _ => Err(Error::Config(format!("unknown semifield preset {name:?} (pw, d81, d9)"))),
    }
}

/// The configuration and egg of a preset pipeline: `pw` or `d9`.
pub fn fv_preset(name: &str) -> Result<(GoodEggSpec, FVConfig)> {
    match name {
        "pw" => Ok((GoodEggSpec::penttila_williams(), FVConfig::penttila_williams())),
        "d9" => Ok((GoodEggSpec::buekenhout_metz_q3(), FVConfig::order_nine())),
        _ => Err(Error::Config(format!("unknown plane preset {name:?} (pw, d9)"))),
    }
}

pub fn load_egg(path: &Path) -> Result<GoodEggSpec> {
    GoodEggSpec::from_record(&load::<EggSpecRecord>(path)?)
}

pub fn load_semifield(path: &Path) -> Result<DicksonSemifield> {
    DicksonSemifield::from_record(&load::<SemifieldRecord>(path)?)
}

pub fn load_field(path: &Path) -> Result<Arc<FiniteField>> {
    Ok(Arc::new(load::<FieldRecord>(path)?.build()?))
}
