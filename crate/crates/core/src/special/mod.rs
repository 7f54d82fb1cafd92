pub mod cfunc;
pub mod gamma;
pub mod hyper;
pub mod spherical;

pub use cfunc::{c_function, inv_c_minus, plancherel_density};
pub use gamma::{gamma, gamma_real, log_gamma};
pub use hyper::gauss_2f1;
pub use spherical::{harish_chandra_phi, log_phi_imag, phi, spherical_phi, SphericalFunctionQuery};
