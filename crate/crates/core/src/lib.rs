//! Directional Poisson multipole wavelets on the n-sphere.
//!
//! The crate is organised bottom-up:
//!
//! * [`special_fn`]: Gegenbauer polynomials, normalisation constants, dimensions.
//! * [`harmonics`]: spherical coordinates, the `(l, k1)` sector of hyperspherical
//!   harmonics, rotations in the `(x1, x2)` plane and Gegenbauer coefficients.
//! * [`rot_deriv`]: coefficient fields and the rotational derivative operator.
//! * [`wavelets`]: Poisson / heat kernels, directional wavelets and their closed forms.
//! * [`admissibility`]: mixing coefficients and admissible-pair verification.
//! * [`transform`]: quadrature grids, the wavelet transform and its inverse on S².
//! * [`euclid`]: stereographic projection and small-scale limits.
//!
//! Scalar products carry the `1/Σ_n` normalisation throughout, so the sector
//! harmonics are orthonormal with respect to `(1/Σ_n) ∫ · dσ`.

pub mod admissibility;
pub mod error;
pub mod euclid;
pub mod harmonics;
pub mod quadrature;
pub mod rot_deriv;
pub mod special_fn;
pub mod transform;
pub mod wavelets;

pub use admissibility::{solve_gamma, GammaVector};
pub use error::{Error, Result};
pub use euclid::EuclideanPoint;
pub use harmonics::{SectorIndex, SphericalPoint};
pub use rot_deriv::CoefficientField;
pub use special_fn::LambdaParam;
pub use transform::{RotationGrid, SphereGrid};
pub use wavelets::{KernelKind, WaveletSpec};
