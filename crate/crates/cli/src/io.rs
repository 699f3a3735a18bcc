//! JSON documents for scenarios and realizations, and CSV writing.

use std::fs;
use std::io::Write;
use std::path::Path;

use distrust_core::linalg::c;
use distrust_core::{ComplexMatrix, ComplexVector, Functional, PureState, Realization, Scenario};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CoreContext, Result};

/// Complex matrix as rows of `[re, im]` pairs.
pub type MatrixDoc = Vec<Vec<[f64; 2]>>;

/// Scenario and witness in one document. `coefficients` is indexed `[b][x][y]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioDoc {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub targets: Vec<Vec<[f64; 2]>>,
    pub epsilons: Vec<f64>,
    pub coefficients: Vec<Vec<Vec<f64>>>,
}

impl ScenarioDoc {
    pub fn from_parts(scn: &Scenario, f: &Functional) -> Self {
        let targets = scn.targets().iter().map(|t| t.amplitudes().iter().map(|z| [z.re, z.im]).collect()).collect();
        let coefficients = (0..scn.k)
            .map(|b| (0..scn.n).map(|x| (0..scn.m).map(|y| f.get(b, x, y)).collect()).collect())
            .collect();
        Self { n: scn.n, m: scn.m, k: scn.k, targets, epsilons: scn.epsilons().to_vec(), coefficients }
    }

    pub fn to_parts(&self) -> Result<(Scenario, Functional)> {
        let targets = self
            .targets
            .iter()
            .map(|amps| PureState::new(ComplexVector::from_iterator(amps.len(), amps.iter().map(|a| c(a[0], a[1])))))
            .collect::<distrust_core::Result<Vec<_>>>()
            .ctx("targets")?;
        let scn = Scenario::new(self.n, self.m, self.k, targets, self.epsilons.clone()).ctx("scenario")?;
        let shape_ok = self.coefficients.len() == self.k
            && self.coefficients.iter().all(|bx| bx.len() == self.n && bx.iter().all(|row| row.len() == self.m));
        if !shape_ok {
            return Err(CliError::config(format!(
                "coefficients must be a {} x {} x {} array indexed [b][x][y]",
                self.k, self.n, self.m
            )));
        }
        let flat = self.coefficients.iter().flatten().flatten().copied().collect();
        let f = Functional::from_flat(self.k, self.n, self.m, flat).ctx("coefficients")?;
        Ok((scn, f))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }
}

pub fn matrix_doc(m: &ComplexMatrix) -> MatrixDoc {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

pub fn matrix_from_doc(doc: &MatrixDoc) -> Result<ComplexMatrix> {
    let n = doc.len();
    if doc.iter().any(|r| r.len() != n) {
        return Err(CliError::config("matrix rows must form a square array"));
    }
    Ok(ComplexMatrix::from_fn(n, n, |i, j| c(doc[i][j][0], doc[i][j][1])))
}

/// States and measurement effects; `measurements[y][b]` is `M_{b|y}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealizationDoc {
    pub dim: usize,
    pub value: Option<f64>,
    pub states: Vec<MatrixDoc>,
    pub measurements: Vec<Vec<MatrixDoc>>,
}

impl RealizationDoc {
    pub fn new(r: &Realization, value: Option<f64>) -> Self {
        Self {
            dim: r.dim(),
            value,
            states: r.states.iter().map(matrix_doc).collect(),
            measurements: r.measurements.iter().map(|m| m.effects().iter().map(matrix_doc).collect()).collect(),
        }
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read { path: path.into(), source })?;
    serde_json::from_str(&text).map_err(|source| CliError::Json { path: path.into(), source })
}

/// Writes through a temporary sibling so readers never see a partial file.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string(value).expect("plain data serializes");
    let tmp = path.with_extension("tmp");
    let err = |source| CliError::Write { path: path.into(), source };
    fs::write(&tmp, text).map_err(err)?;
    fs::rename(&tmp, path).map_err(err)
}

pub fn read_scenario(path: &Path) -> Result<(Scenario, Functional)> {
    read_json::<ScenarioDoc>(path)?.to_parts()
}

/// Shortest round-trip decimal; empty for missing values.
pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes a header and rows as CSV to `out` or standard output.
pub fn write_csv(out: Option<&Path>, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let sink: Box<dyn Write> = match out {
        Some(p) => Box::new(fs::File::create(p).map_err(|source| CliError::Write { path: p.into(), source })?),
        None => Box::new(std::io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
