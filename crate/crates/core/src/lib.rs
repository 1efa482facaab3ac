// `!(x > 0)` guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod expansion;
pub mod flow;
pub mod fock;
pub mod inequalities;
pub mod linalg;
pub mod multi_index;
pub mod poly;
pub mod random;
pub mod scalar;
pub mod symplectic;
pub mod weyl;

pub use error::{Error, Result};
pub use scalar::{CMatrix, CVector, Real, C};
pub use symplectic::{RLinearMap, SymplectoDecomposition};

pub type RLinearMap64 = RLinearMap<f64>;
pub type RLinearMap32 = RLinearMap<f32>;
pub use flow::{integrate_flow, integrate_u_alpha, FlowResult, QuadraticHamiltonian, TimeGrid};
pub use poly::{PolySymbol, SymTensor};

pub type PolySymbol64 = PolySymbol<f64>;
pub type PolySymbol32 = PolySymbol<f32>;
pub use expansion::{dyson_expand, exp_expand, ExpansionResult, Method, QuadSpec};
pub use fock::{wick_quantize, FockOperator, FockSpace};
pub use inequalities::{inequality_suite, InequalityRow, SweepConfig};
pub use weyl::{check_weyl_conjugation, weyl_from_wick, wick_from_weyl};
