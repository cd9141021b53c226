//! Combinatorial tiling machinery on Z^d: exact lattice set algebra, Folner
//! sequences with Tempelman ratio reports, greedy Vitali covers, a
//! multi-scale tiling cascade with exact coverage certificates, and simulated
//! measure-preserving actions for ergodic-average experiments.

pub mod dynamics;
pub mod folner;
pub mod group;
pub mod ratio;
pub mod scale;
pub mod tiler;
pub mod vitali;

pub use folner::{FolnerSequence, TempelmanReport, UnionVariant};
pub use group::{average, boundary, FiniteGroupSet, GroupElement, GroupError};
pub use ratio::Rational;
pub use scale::{ScaleFamily, UniformScales};
pub use tiler::{LadderPolicy, TilingParameters, TilingState};
pub use vitali::{vitali_cover, verify_vitali, ScaleAssignment, Tile, VitaliResult};
