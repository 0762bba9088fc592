//! Sharp augmented Lagrangian duality for desk-scale mixed-integer programs.
//!
//! The crate evaluates value functions exactly, computes explicit finite
//! penalty thresholds for MILP, MIQP, pure-integer and strongly convex
//! mixed-integer programs, and certifies gap closure empirically.

pub mod corpus;
pub mod cvxsub;
pub mod error;
pub mod exactnum;
pub mod io;
pub mod lpsolve;
pub mod mipsolve;
pub mod model;
pub mod penalty;
pub mod ratlinalg;
pub mod saldual;
pub mod selftest;
pub mod valuefn;

pub use error::{Error, Result};
pub use exactnum::{ExtValue, Int, Rational};
pub use model::{ObjectiveDescriptor, ObjectiveKind, ProblemInstance};
pub use ratlinalg::{Norm, RatMatrix};

use serde::Serialize;

/// Enumeration and search limits shared by every solver.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Caps {
    pub basis_cap: u64,
    pub node_cap: u64,
    pub grid_cap: u64,
    pub active_set_cap: u64,
    pub enum_cap: u64,
    pub iter_cap: u64,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            basis_cap: 1_000_000,
            node_cap: 200_000,
            grid_cap: 100_000,
            active_set_cap: 100_000,
            enum_cap: 100_000,
            iter_cap: 20_000,
        }
    }
}

impl Caps {
    /// Every cap set to the same value.
    pub fn uniform(cap: u64) -> Self {
        Caps {
            basis_cap: cap,
            node_cap: cap,
            grid_cap: cap,
            active_set_cap: cap,
            enum_cap: cap,
            iter_cap: cap,
        }
    }
}

/// Solver configuration threaded through the library.
#[derive(Debug, Clone, Serialize)]
pub struct Settings {
    pub caps: Caps,
    /// Absolute tolerance for the smooth-oracle path.
    pub tol: f64,
    /// Relative slack for rational upper bounds on square roots.
    #[serde(with = "exactnum::serde_rat")]
    pub slack: Rational,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            caps: Caps::default(),
            tol: 1e-8,
            slack: exactnum::default_slack(),
        }
    }
}
