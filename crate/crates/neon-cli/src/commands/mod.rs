pub mod eval;
pub mod features;
pub mod quota;
pub mod score;
pub mod serve;
pub mod synth;
pub mod train;

use std::path::Path;

use neon::{Error, Result};

pub(crate) fn ensure_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path)
        .map_err(|e| Error::Validation(format!("cannot create output dir {}: {e}", path.display())))
}

pub(crate) fn progress(quiet: bool, msg: &str) {
    if !quiet {
        eprintln!("{msg}");
    }
}
