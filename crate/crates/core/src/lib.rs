//! Individual-sample mutual information (ISMI) generalization bounds.
//!
//! The crate computes bounds of the form
//!
//! ```text
//! gen <= (1/n) sum_i psi*^-1(I(W; Z_i))
//! ```
//!
//! and checks them against exact or simulated generalization errors:
//!
//! - [`cgf`]: CGF upper bounds and the inverse of their Legendre dual.
//! - [`oracle`]: exact mutual information for finite tables and Gaussians.
//! - [`quadrature`], [`kdtree`], [`knn_mi`]: numerical and sample-based
//!   information estimates.
//! - [`bounds`]: the bound arithmetic itself.
//! - [`mean`], [`gp`], [`sgld`], [`logreg`]: worked examples.

pub mod bounds;
pub mod cgf;
pub mod error;
pub mod gp;
pub mod kdtree;
pub mod knn_mi;
pub mod logreg;
pub mod mean;
pub mod oracle;
pub mod quadrature;
pub mod rng;
pub mod sgld;

pub use bounds::{full_mi_bound, ismi_bound, sub_gaussian_ismi, BoundMethod, GenBound, MiProfile};
pub use cgf::{chi_squared_neg_cgf, legendre_dual_inverse, sub_gaussian_cgf, CgfBound, SubGaussian};
pub use error::{Error, Result};
pub use knn_mi::{knn_mi, KsgVariant, MiEstimate, SampleCloud};
pub use oracle::{chain_rule_gap, discrete_mi, gaussian_mi, DiscreteJoint, GaussianJointSpec};
pub use rng::{derive_seed, substream, McEstimate};
