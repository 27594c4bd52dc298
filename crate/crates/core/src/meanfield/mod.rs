//! Grid solver for the Chern-Simons-Schroedinger functional.

pub mod energy;
pub mod gammastar;
pub mod gauge;
pub mod grid;
pub mod hardy;
pub mod minimize;
pub mod nll;

pub use energy::{css_energy, el_residual, CSSEnergy, CSSFunctional, CSSParams, ELResidual};
pub use gammastar::{gamma_star_estimate, random_smooth_field, GammaStarEstimate, GammaStarOptions, GridSpec};
pub use gauge::{
    curl_div_fd, curl_target, smeared_gradient, smeared_potential_wr, vector_potential, GaugeField2D, GaugeSolver,
};
pub use grid::{ComplexField2D, RealField, Spectral};
pub use hardy::{hardy_check, HardyCheck};
pub use minimize::{minimize_css, sphere_descent, CSSMinimum, DescentOptions, SphereObjective};
pub use nll::{edge_window, nll_state, nll_state_tapered, NllState, PolynomialPair};
