//! Pinned grids and tolerances for the acceptance criteria. The `acceptance`
//! test target evaluates each criterion and prints one PASS/FAIL line.

pub const Q_GRID: [f64; 4] = [0.5, 0.9, 1.1, 2.0];
pub const SEED: u64 = 20240601;

pub const RELATION_TOL: f64 = 1e-10;
pub const INTERTWINER_TOL: f64 = 1e-9;
pub const YANG_BAXTER_TOL: f64 = 1e-9;
pub const OFF_SCALAR_TOL: f64 = 1e-9;
pub const SCALAR_REL_TOL: f64 = 1e-10;
pub const PROJECTOR_TOL: f64 = 1e-8;
pub const EIGEN_TOL: f64 = 1e-8;
pub const GAP_TOL: f64 = 1e-6;
pub const DEFECT_TOL: f64 = 1e-6;
pub const HIGHEST_TOL: f64 = 1e-9;
pub const MARGIN_TOL: f64 = 1e-9;
pub const MARGIN_SAMPLES: usize = 10_000;
pub const SPIN_HALF_TOL: f64 = 1e-12;
pub const CLASSICAL_MIN_TOL: f64 = 1e-4;
pub const SLOPE_TARGET: f64 = 1.0;
pub const SLOPE_TOL: f64 = 0.3;
pub const PATH_TOL: f64 = 1e-10;
pub const DEGENERACY_TOL: f64 = 1e-10;
pub const GRADIENT_TOL: f64 = 1e-5;
