//! Shared numerical kernels: quadrature, Gamma, root bracketing, 1-D
//! optimization and seeded random streams.

mod gamma;
mod optimize;
mod quadrature;
mod roots;
pub mod rng;

pub use gamma::{gamma, ln_gamma};
pub use optimize::{optimize_1d, optimize_1d_with, scan_grid, Optimum, Sense};
pub use quadrature::{integrate, QuadratureResult};
pub(crate) use quadrature::gk21;
pub use roots::find_root_monotone;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Any intermediate beyond this magnitude is treated as overflow.
pub const OVERFLOW_GUARD: f64 = 1e300;

/// Accuracy targets shared by quadrature, root-finding and optimization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            max_subdivisions: 10_000,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || !(self.rel_tol > 0.0) || self.max_subdivisions == 0 {
            return Err(Error::Invalid(format!(
                "tolerances must be strictly positive, got {self:?}"
            )));
        }
        Ok(())
    }

    /// Same budget, both tolerances tightened by `factor`.
    pub fn tightened(&self, factor: f64) -> Tolerances {
        Tolerances {
            abs_tol: self.abs_tol / factor,
            rel_tol: self.rel_tol / factor,
            max_subdivisions: self.max_subdivisions,
        }
    }
}
