//! Graph-action homeomorphisms: compositions of stage flows `ψ_m` acting on
//! `{x₁ = y₁ = 0}` as `(0, 0, w) ↦ (F_m(w), 0, w)` for a smoothing `F_m` of a
//! continuous target `F`.

pub mod bumps;
pub mod compose;
pub mod schedule;
pub mod stage;
pub mod target;

pub use schedule::{mollify_sequence, ScheduleOptions, SmoothingSchedule};
pub use target::{GridInterpolant, TargetProfile};
pub use bumps::BumpPair;
pub use stage::{from_u_coords, u_coords, StageField};
pub use compose::{BoConstruction, BoOptions, BoVerification, GraphAction, StageParams};
