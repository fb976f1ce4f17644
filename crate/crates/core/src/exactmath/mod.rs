//! Exact integer/polynomial arithmetic and certified ball arithmetic.

pub mod ball;
pub mod dyadic;
pub mod poly;
pub mod roots;

pub use ball::{e_const, exp_point, ln2, log_int, log_point, pi, Ball, Real};
pub use dyadic::{parse_decimal, Dyadic, Round};
pub use poly::{
    count_real_roots, cyclotomic, poly_resultant, ratio_poly, squarefree_decomposition,
    squarefree_part, totient, IntPoly,
};
pub use roots::{certified_roots, certified_roots_capped, RootCluster, DEFAULT_PRECISION_CAP};
