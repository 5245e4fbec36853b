use super::{von_neumann_entropy, DmBasis, TomoError, TomoResult};
use serde::Serialize;
use std::path::Path;

/// Structured text summary of one reconstruction.
#[derive(Debug, Clone, Serialize)]
pub struct TomoReport {
    pub label: String,
    pub basis: DmBasis,
    pub dim: usize,
    pub iterations: usize,
    pub converged: bool,
    pub log_likelihood: f64,
    pub entropy_nats: f64,
    pub eigenvalues: Vec<f64>,
    pub rho_re: Vec<Vec<f64>>,
    pub rho_im: Vec<Vec<f64>>,
    pub likelihood_trace: Vec<f64>,
    pub warnings: Vec<String>,
}

impl TomoReport {
    pub fn new(label: &str, result: &TomoResult) -> Result<Self, TomoError> {
        let m = &result.rho.matrix;
        let d = m.nrows();
        Ok(Self {
            label: label.to_string(),
            basis: result.rho.basis,
            dim: d,
            iterations: result.iterations,
            converged: result.converged,
            log_likelihood: result.log_likelihood,
            entropy_nats: von_neumann_entropy(&result.rho)?,
            eigenvalues: result.rho.eigenvalues(),
            rho_re: (0..d).map(|r| (0..d).map(|c| m[(r, c)].re).collect()).collect(),
            rho_im: (0..d).map(|r| (0..d).map(|c| m[(r, c)].im).collect()).collect(),
            likelihood_trace: result.likelihood_history.clone(),
            warnings: result.warnings.clone(),
        })
    }
}

#[derive(Serialize)]
struct ReportFile<'a> {
    report: &'a [TomoReport],
}

/// Writes reports as TOML `[[report]]` tables.
pub fn write_tomo_report(path: &Path, reports: &[TomoReport]) -> Result<(), TomoError> {
    let text = toml::to_string(&ReportFile { report: reports }).map_err(|e| TomoError::Report(e.to_string()))?;
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tomo::DensityMatrix;

    #[test]
    fn report_is_written() {
        let result = TomoResult {
            rho: DensityMatrix::maximally_mixed(DmBasis::Dicke, 3),
            log_likelihood: -1.0,
            iterations: 3,
            converged: true,
            likelihood_history: vec![-1.2, -1.0],
            warnings: vec![],
        };
        let r = TomoReport::new("pair", &result).unwrap();
        assert!((r.entropy_nats - 3f64.ln()).abs() < 1e-12);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.toml");
        write_tomo_report(&path, &[r]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains("[[report]]") && text.contains("entropy_nats"));
    }
}
