use std::path::PathBuf;

use limbsys_core::kantorovich::{FLOAT_SUPPORT_THRESHOLD, FLOAT_ZERO_SET_TOL};
use limbsys_core::Arithmetic;

use crate::CliError;

/// Instances up to this many sites per side default to exact arithmetic.
pub const EXACT_MAX_SIDE: usize = 64;

/// Resolved settings shared by all subcommands.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// `None` picks by instance size.
    pub arithmetic: Option<Arithmetic>,
    /// Relative to total mass. Zero in exact mode.
    pub support_threshold: f64,
    /// Absolute zero-set tolerance; `None` means `1e-9 * max|c|`.
    pub zero_set_tol: Option<f64>,
    pub gap_tol: f64,
    pub seed: u64,
    pub output: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            arithmetic: None,
            support_threshold: FLOAT_SUPPORT_THRESHOLD,
            zero_set_tol: None,
            gap_tol: FLOAT_ZERO_SET_TOL,
            seed: limbsys_core::acceptance::SEED,
            output: None,
        }
    }
}

impl RunConfig {
    /// `exact` wins over `requested`, which comes from `--arithmetic` or
    /// `LIMBSYS_ARITHMETIC`. Tolerance overrides are rejected in exact mode.
    pub fn new(exact: bool, requested: Option<Arithmetic>, tol: Option<f64>) -> Result<Self, CliError> {
        let arithmetic = if exact { Some(Arithmetic::Exact) } else { requested };
        if let Some(t) = tol {
            if arithmetic == Some(Arithmetic::Exact) {
                return Err(CliError::Usage(
                    "--tol cannot be combined with exact arithmetic; exact mode uses zero tolerances".into(),
                ));
            }
            if !(t.is_finite() && t >= 0.0) {
                return Err(CliError::Usage(format!("--tol must be a finite nonnegative number, got {t}")));
            }
        }
        let mut cfg = RunConfig {
            arithmetic,
            zero_set_tol: tol,
            ..Default::default()
        };
        if arithmetic == Some(Arithmetic::Exact) {
            cfg.support_threshold = 0.0;
            cfg.gap_tol = 0.0;
        }
        Ok(cfg)
    }

    /// Backend for an instance with the given side lengths.
    pub fn arithmetic_for(&self, rows: usize, cols: usize) -> Result<Arithmetic, CliError> {
        let a = self.arithmetic.unwrap_or(if rows.max(cols) <= EXACT_MAX_SIDE {
            Arithmetic::Exact
        } else {
            Arithmetic::Float
        });
        if a == Arithmetic::Exact && self.zero_set_tol.is_some() {
            return Err(CliError::Usage(
                "--tol given but the instance runs in exact arithmetic; pass --arithmetic float".into(),
            ));
        }
        Ok(a)
    }
}
