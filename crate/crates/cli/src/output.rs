use std::fmt::{Display, Write as _};
use std::path::{Path, PathBuf};

use crate::error::{CliError, CliResult};

pub const SEMICLASSICAL_HEADER: &str = "t,re_beta,im_beta,pe,delta_m";
pub const ENSEMBLE_HEADER: &str =
    "t,mean_re_beta,mean_im_beta,var_dbeta_x,var_dbeta_p,lambda_plus,lambda_minus,theta,pe_mean";
pub const HISTOGRAM_HEADER: &str = "bin_lo,bin_hi,count";
pub const SPECTRA_HEADER: &str = "delta,re_s0";
pub const PHASE_DIAGRAM_HEADER: &str = "n_m,gamma_ratio,label";

/// A named output file held in memory until written.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

/// Comma-separated rows under a fixed header, LF line endings. Floats use
/// `Display`, the shortest decimal that reads back to the same value.
pub struct CsvTable {
    buf: String,
    width: usize,
}

impl CsvTable {
    pub fn new(header: &str) -> Self {
        let mut buf = String::with_capacity(1 << 12);
        buf.push_str(header);
        buf.push('\n');
        Self {
            buf,
            width: header.split(',').count(),
        }
    }

    pub fn row(&mut self, fields: &[&dyn Display]) {
        debug_assert_eq!(fields.len(), self.width);
        for (k, f) in fields.iter().enumerate() {
            if k > 0 {
                self.buf.push(',');
            }
            write!(self.buf, "{f}").expect("writing to a String cannot fail");
        }
        self.buf.push('\n');
    }

    pub fn into_artifact(self, name: impl Into<String>) -> Artifact {
        Artifact {
            name: name.into(),
            contents: self.buf,
        }
    }
}

/// Creates `dir` if needed and checks that files can be created in it.
pub fn prepare_dir(dir: &Path) -> CliResult<PathBuf> {
    let fail = |e: std::io::Error| {
        CliError::config(
            "output.dir",
            format!("{} is not writable: {e}", dir.display()),
        )
    };
    std::fs::create_dir_all(dir).map_err(fail)?;
    let probe = dir.join(".hybridmech-write-probe");
    std::fs::write(&probe, b"").map_err(fail)?;
    std::fs::remove_file(&probe).map_err(fail)?;
    Ok(dir.to_path_buf())
}

pub fn write_artifacts(dir: &Path, artifacts: &[Artifact]) -> CliResult<Vec<PathBuf>> {
    artifacts
        .iter()
        .map(|a| {
            let path = dir.join(&a.name);
            std::fs::write(&path, a.contents.as_bytes())?;
            Ok(path)
        })
        .collect()
}
