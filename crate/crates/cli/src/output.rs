//! CSV and JSON writers. Every file starts with the same provenance header.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use spinbath_core::{Complex, DMatrix};

use crate::config::RunConfig;
use crate::error::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Run identity written at the top of every output.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub program: &'static str,
    pub version: &'static str,
    pub mode: String,
    pub seed: u64,
    pub config: RunConfig,
}

impl Provenance {
    pub fn new(mode: &str, config: &RunConfig) -> Self {
        Self {
            program: "spinbath",
            version: VERSION,
            mode: mode.to_string(),
            seed: config.seed,
            config: config.clone(),
        }
    }

    /// `#`-prefixed lines, valid as CSV comments and Python comments.
    pub fn comment_block(&self) -> String {
        format!(
            "# {} {}\n# mode: {}\n# seed: {}\n# config: {}\n",
            self.program,
            self.version,
            self.mode,
            self.seed,
            self.config.to_json_line()
        )
    }
}

/// Files written by one run. Unless `commit` is called, they are deleted on drop.
pub struct OutputSet {
    dir: PathBuf,
    created_dir: bool,
    written: Vec<PathBuf>,
    committed: bool,
}

impl OutputSet {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        let created_dir = !dir.exists();
        fs::create_dir_all(dir)
            .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            created_dir,
            written: Vec::new(),
            committed: false,
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn files(&self) -> &[PathBuf] {
        &self.written
    }

    fn open(&mut self, name: &str) -> Result<BufWriter<File>, CliError> {
        let path = self.dir.join(name);
        let file = File::create(&path)
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
        self.written.push(path);
        Ok(BufWriter::new(file))
    }

    /// Writes a CSV with the provenance comment block above the column header.
    pub fn write_csv(
        &mut self,
        name: &str,
        provenance: &Provenance,
        columns: &[String],
        rows: impl IntoIterator<Item = Vec<f64>>,
    ) -> Result<PathBuf, CliError> {
        let mut out = self.open(name)?;
        out.write_all(provenance.comment_block().as_bytes())?;
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(columns)?;
        let mut fields = Vec::with_capacity(columns.len());
        for row in rows {
            if row.len() != columns.len() {
                return Err(CliError::Runtime(format!(
                    "{name}: row has {} fields, header has {}",
                    row.len(),
                    columns.len()
                )));
            }
            fields.clear();
            fields.extend(row.iter().map(|v| v.to_string()));
            writer.write_record(&fields)?;
        }
        writer.flush()?;
        Ok(self.dir.join(name))
    }

    /// Writes `{"header": provenance, ...body}` as pretty JSON.
    pub fn write_json<T: Serialize>(
        &mut self,
        name: &str,
        provenance: &Provenance,
        body: &T,
    ) -> Result<PathBuf, CliError> {
        #[derive(Serialize)]
        struct Wrapped<'a, T> {
            header: &'a Provenance,
            #[serde(flatten)]
            body: &'a T,
        }
        let mut out = self.open(name)?;
        serde_json::to_writer_pretty(
            &mut out,
            &Wrapped {
                header: provenance,
                body,
            },
        )
        .map_err(|e| CliError::Runtime(e.to_string()))?;
        out.write_all(b"\n")?;
        out.flush()?;
        Ok(self.dir.join(name))
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> Result<PathBuf, CliError> {
        let mut out = self.open(name)?;
        out.write_all(text.as_bytes())?;
        out.flush()?;
        Ok(self.dir.join(name))
    }

    pub fn commit(mut self) -> Vec<PathBuf> {
        self.committed = true;
        std::mem::take(&mut self.written)
    }
}

impl Drop for OutputSet {
    fn drop(&mut self) {
        if self.committed {
            return;
        }
        for path in &self.written {
            let _ = fs::remove_file(path);
        }
        if self.created_dir {
            let _ = fs::remove_dir(&self.dir);
        }
    }
}

/// `re_rho11, im_rho11, re_rho12, …` for a d×d matrix, 1-based and row-major.
pub fn element_columns(dim: usize, prefix: &str) -> Vec<String> {
    let mut cols = Vec::with_capacity(2 * dim * dim);
    for i in 1..=dim {
        for j in 1..=dim {
            cols.push(format!("{prefix}re_rho{i}{j}"));
            cols.push(format!("{prefix}im_rho{i}{j}"));
        }
    }
    cols
}

/// Columns of a density series: t, Re/Im of every element, then their standard errors.
pub fn density_columns(dim: usize) -> Vec<String> {
    let mut cols = vec!["t".to_string()];
    cols.extend(element_columns(dim, ""));
    cols.extend(element_columns(dim, "se_"));
    cols
}

/// Per-time standard errors of the real and imaginary parts.
pub type StderrSeries<'a> = (&'a [DMatrix<f64>], &'a [DMatrix<f64>]);

/// One CSV row per time; missing standard errors are written as zero.
pub fn density_rows<'a>(
    times: &'a [f64],
    rho: &'a [DMatrix<Complex<f64>>],
    stderr: Option<StderrSeries<'a>>,
) -> impl Iterator<Item = Vec<f64>> + 'a {
    times.iter().enumerate().map(move |(k, &t)| {
        let m = &rho[k];
        let dim = m.nrows();
        let mut row = Vec::with_capacity(1 + 4 * dim * dim);
        row.push(t);
        for i in 0..dim {
            for j in 0..dim {
                row.push(m[(i, j)].re);
                row.push(m[(i, j)].im);
            }
        }
        for i in 0..dim {
            for j in 0..dim {
                match stderr {
                    Some((re, im)) => {
                        row.push(re[k][(i, j)]);
                        row.push(im[k][(i, j)]);
                    }
                    None => row.extend([0.0, 0.0]),
                }
            }
        }
        row
    })
}
