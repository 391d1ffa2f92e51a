//! Built-in fixture manifests.

use std::path::Path;

use crate::error::{Error, Result};
use crate::manifest::{parse_manifest, Manifest};

macro_rules! entries {
    ($($name:literal),* $(,)?) => {
        &[$(($name, include_str!(concat!("../catalog/", $name, ".toml")))),*]
    };
}

/// `(name, manifest text)`, sorted by name.
pub const ENTRIES: &[(&str, &str)] = entries![
    "bump4d",
    "flat_r2",
    "flat_r4",
    "gauged_exp",
    "hyperbolic2",
    "perturbed4d",
    "recurrence_flat",
    "s2_round",
    "s2xs2",
    "s3_round",
    "warped4d",
];

pub fn names() -> impl Iterator<Item = &'static str> {
    ENTRIES.iter().map(|(n, _)| *n)
}

pub fn source(name: &str) -> Result<&'static str> {
    ENTRIES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| *text)
        .ok_or_else(|| Error::CatalogNotFound(name.to_string()))
}

pub fn load(name: &str) -> Result<Manifest> {
    parse_manifest(source(name)?, &format!("catalog:{name}"))
}

/// Writes the manifest text to `path`.
pub fn emit(name: &str, path: impl AsRef<Path>) -> Result<()> {
    let text = source(name)?;
    std::fs::write(path, text)?;
    Ok(())
}

/// The manifest's description.
pub fn describe(name: &str) -> Result<String> {
    Ok(load(name)?.description)
}
