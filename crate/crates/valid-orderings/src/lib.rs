//! Valid orderings of subsets of finite groups.
//!
//! A sequence `s_1, ..., s_k` of distinct elements is a valid ordering when its
//! partial products `s_1, s_1 s_2, ..., s_1 ... s_k` are pairwise distinct. Such
//! orderings correspond to rainbow paths in the Cayley graph, and this crate
//! builds them with spectral regularity, sumset decompositions and absorption,
//! with brute force and verification underneath.

pub mod absorption_f2n;
pub mod absorption_nonabelian;
pub mod error;
pub mod format;
pub mod group;
pub mod linalg;
pub mod matching;
pub mod orderings;
pub mod pipeline;
pub mod regularity;
pub mod rng;
pub mod spectral;
pub mod subset;
pub mod sumsets;

pub use error::{Error, Result};
pub use group::{Group, Subgroup};
pub use orderings::{check_valid, Ordering, RainbowPath};
pub use subset::Subset;
