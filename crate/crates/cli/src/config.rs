use std::path::{Path, PathBuf};

use kernel_dpp::approximants::Scheme;
use kernel_dpp::metrics::{DesignFamily, TargetSpec};
use kernel_dpp::KernelSpec;
use serde::{Deserialize, Serialize};
use toml::Spanned;

use crate::CliError;

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

/// One experiment: a kernel, one or more design families and targets, a
/// scheme, and the Monte Carlo grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(rename = "N_grid")]
    pub n_grid: Spanned<Vec<usize>>,
    pub replicates: Spanned<usize>,
    pub master_seed: u64,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    pub kernel: Spanned<KernelSpec>,
    pub scheme: Spanned<Scheme>,
    #[serde(rename = "design")]
    pub designs: Spanned<Vec<DesignFamily>>,
    #[serde(rename = "target")]
    pub targets: Spanned<Vec<TargetSpec>>,
}

fn line_of(src: &str, offset: usize) -> usize {
    src[..offset.min(src.len())].matches('\n').count() + 1
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let src = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&src).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn parse(src: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(src).map_err(|e| CliError::Config(e.to_string().trim_end().to_string()))?;
        cfg.validate(src)?;
        Ok(cfg)
    }

    #[cfg(test)]
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    fn validate(&self, src: &str) -> Result<(), CliError> {
        let fail = |span: std::ops::Range<usize>, msg: String| Err(CliError::Config(format!("line {}: {msg}", line_of(src, span.start))));

        let grid = self.n_grid.get_ref();
        if grid.is_empty() {
            return fail(self.n_grid.span(), "N_grid is empty".into());
        }
        if grid[0] == 0 {
            return fail(self.n_grid.span(), "N_grid entries must be >= 1".into());
        }
        if let Some(w) = grid.windows(2).find(|w| w[1] <= w[0]) {
            return fail(self.n_grid.span(), format!("N_grid must be strictly increasing ({} then {})", w[0], w[1]));
        }
        if *self.replicates.get_ref() == 0 {
            return fail(self.replicates.span(), "replicates must be >= 1".into());
        }

        let m_spec = self.kernel.get_ref().m_spec();
        let n_min = grid[0];
        let n_max = *grid.last().expect("non-empty");
        if self.designs.get_ref().is_empty() {
            return fail(self.designs.span(), "at least one [[design]] block is required".into());
        }
        for d in self.designs.get_ref() {
            match d {
                DesignFamily::Christoffel { m, oversampling, .. } => {
                    if !(*oversampling > 0.0) {
                        return fail(self.designs.span(), "christoffel oversampling must be positive".into());
                    }
                    if let Some(m) = m {
                        if *m == 0 || *m > m_spec {
                            return fail(self.designs.span(), format!("christoffel M = {m} outside [1, {m_spec}]"));
                        }
                    }
                }
                DesignFamily::DppLegendre => {
                    if !matches!(self.kernel.get_ref(), KernelSpec::SincPswf { .. }) {
                        return fail(self.designs.span(), "dpp-legendre needs an interval kernel (sinc-pswf)".into());
                    }
                }
                DesignFamily::Dpp | DesignFamily::Cvs => {
                    if n_max > m_spec {
                        return fail(self.n_grid.span(), format!("N = {n_max} exceeds M_spec = {m_spec}"));
                    }
                }
            }
        }

        match *self.scheme.get_ref() {
            Scheme::Okq { m } if m == 0 || m > m_spec => {
                return fail(self.scheme.span(), format!("OKQ order M = {m} outside [1, {m_spec}]"));
            }
            Scheme::Els { m, .. } | Scheme::Tels { m } if m == 0 || m > n_min => {
                return fail(self.scheme.span(), format!("order M = {m} must lie in [1, min N = {n_min}]"));
            }
            Scheme::Qi if n_max > m_spec => {
                return fail(self.scheme.span(), format!("QI needs N <= M_spec = {m_spec}"));
            }
            _ => {}
        }

        if self.targets.get_ref().is_empty() {
            return fail(self.targets.span(), "at least one [[target]] block is required".into());
        }
        for t in self.targets.get_ref() {
            match t {
                TargetSpec::Eigenfunction { m, .. } if *m == 0 => {
                    return fail(self.targets.span(), "target index m is 1-based".into());
                }
                TargetSpec::RandomGaussian { order: 0, .. } => {
                    return fail(self.targets.span(), "random-gaussian order M must be >= 1".into());
                }
                _ => {}
            }
            if t.support_len() > m_spec {
                return fail(
                    self.targets.span(),
                    format!("target {} references index {} > M_spec = {m_spec}", t.id(), t.support_len()),
                );
            }
        }
        Ok(())
    }
}

/// Annotated example printed by `config-schema`; it parses as-is.
pub const SCHEMA: &str = r#"# kdpp experiment configuration (TOML).
# Eigen-indices are 1-based. Domains: periodic kernels live on [0, 1) with the
# uniform measure; sinc-pswf on [-T_len/2, T_len/2] with the uniform probability
# measure; sphere kernels on S^2 with the normalized surface measure.

N_grid = [8, 12, 16, 24, 32, 48, 64]   # node counts, strictly increasing
replicates = 50                        # independent designs per N, >= 1
master_seed = 1                        # u64; every output row carries its derived seed
output = "out"                         # directory for CSV files (default "out")

[kernel]
family = "periodic-sobolev"            # periodic-sobolev | sphere-sobolev | sinc-pswf
s = 1                                  # periodic-sobolev: smoothness, integer >= 1
M_spec = 2000                          # periodic-sobolev: eigenpairs kept (default 2000)
# sphere-sobolev: d = 3 (default), s > 0.5 (real), L_max = 60 (default, max degree)
# sinc-pswf: T_len (interval length), F (bandwidth), legendre_order = 128 (default)

[scheme]
name = "ls"                            # oka | ls | okq | qi | els | tels
# okq, els, tels: M = <order>; els: q = "inverse-christoffel" (default) | "unit"

[[design]]
family = "dpp"                         # dpp | dpp-legendre | christoffel | cvs
# christoffel: M = <order> (default floor(N / oversampling), at least 1),
#              oversampling = 2.0 (default), q = "inverse-christoffel" | "unit"

[[target]]
kind = "eigenfunction"                 # eigenfunction | random-gaussian | coefficients
m = 1                                  # eigenfunction: index
rkhs = true                            # eigenfunction: scale by sqrt(sigma_m) (default false)
# random-gaussian: M = <order>, seed = <u64>; fresh draw per replicate
# coefficients: values = [c_1, c_2, ...]
"#;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schema_parses_and_round_trips() {
        let cfg = ExperimentConfig::parse(SCHEMA).unwrap();
        let again = ExperimentConfig::parse(&cfg.to_toml()).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(*cfg.replicates.get_ref(), 50);
    }

    #[test]
    fn empty_grid_reports_line() {
        let src = SCHEMA.replace("N_grid = [8, 12, 16, 24, 32, 48, 64]", "N_grid = []");
        let err = ExperimentConfig::parse(&src).unwrap_err().to_string();
        assert!(err.contains("line 6") && err.contains("N_grid is empty"), "{err}");
    }

    #[test]
    fn non_increasing_grid_rejected() {
        let src = SCHEMA.replace("[8, 12, 16, 24, 32, 48, 64]", "[8, 8, 16]");
        assert!(ExperimentConfig::parse(&src).is_err());
    }

    #[test]
    fn unknown_field_rejected_with_line() {
        let src = SCHEMA.replace("replicates = 50", "replicates = 50\nbogus = 3");
        let err = ExperimentConfig::parse(&src).unwrap_err().to_string();
        assert!(err.contains("line 8"), "{err}");
    }

    #[test]
    fn target_beyond_spectrum_rejected() {
        let src = SCHEMA.replace("m = 1 ", "m = 5000 ");
        let err = ExperimentConfig::parse(&src).unwrap_err().to_string();
        assert!(err.contains("M_spec"), "{err}");
    }
}
