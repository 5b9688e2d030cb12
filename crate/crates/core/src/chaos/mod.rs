//! Wiener-chaos expansion of the nodal volume.

pub mod coefficients;
pub mod draw;
pub mod limit;
pub mod projections;
pub mod statistics;

pub use coefficients::{a_coefficient, beta_coefficient, hermite};
pub use draw::{sample_draw, CoefficientDraw};
pub use limit::{
    covariance_matrix_exact, covariance_matrix_limit, planar_variance_constant, theoretical_variance,
    D2LimitLaw, LimitLaw, Moments,
};
pub use projections::{fourth_chaos, fourth_chaos_d3, second_chaos, h4_integral_identities};
pub use statistics::{chaos_statistics, ChaosStatistics, X4Source};
