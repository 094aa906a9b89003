//! Collapse flows: contact Hamiltonians `z·F(−log ρ)` whose flows squeeze a
//! neighbourhood onto the zero section `𝒵 = {y⃗ = 0, z = 0}`.

pub mod approximant;
pub mod diagnostics;
pub mod flow;
pub mod gcalc;
pub mod profile;
pub mod weight;

pub use flow::{collapse_config, integrate_collapse, square_closed_form, wall_log_ode, wall_map_ode, CollapseField, CollapseMap, CollapseTrajectory, ProfileRef, WallMap};
pub use gcalc::GCalculus;
pub use profile::{Base, CollapseProfile, Profile};
pub use weight::RadialWeight;
pub use approximant::{build_approximant, ApproximantStage, TruncatedProfile};
pub use diagnostics::{boundedness_diagnostics, check_assumptions, tangency_order, AssumptionReport, BoundednessReport, BoundednessRow, TangencyReport, TangencyWindow};

use alloc::sync::Arc;

use crate::error::{Error, Result};

/// Horizon for the sampled profile assumption checks.
pub const ASSUMPTION_HORIZON: f64 = 1e6;

/// The three worked examples: weight and profile pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// `ρ = Σyⱼ² + z²`, `F = −√u`.
    Square,
    /// `ρ = Σyⱼ⁴ + z²`, `F = −u`.
    FourFinite,
    /// `ρ = Σyⱼ⁴ + z²`, `F = −u·log u`.
    FourInf,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::Square, Preset::FourFinite, Preset::FourInf];

    pub fn name(&self) -> &'static str {
        match self {
            Preset::Square => "square",
            Preset::FourFinite => "fourfinite",
            Preset::FourInf => "fourinf",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == s)
    }

    pub fn profile(&self) -> CollapseProfile {
        match self {
            Preset::Square => CollapseProfile::sqrt(),
            Preset::FourFinite => CollapseProfile::linear(),
            Preset::FourInf => CollapseProfile::log_linear(),
        }
    }

    pub fn weight(&self, n: usize) -> RadialWeight {
        match self {
            Preset::Square => RadialWeight::square(n),
            _ => RadialWeight::quartic(n),
        }
    }

    pub fn field(&self, n: usize) -> CollapseField {
        CollapseField::new(Arc::new(self.profile()), self.weight(n))
    }
}

/// `H = z·F(−log ρ)` after checking the profile assumptions up to [`ASSUMPTION_HORIZON`].
pub fn collapse_hamiltonian(profile: CollapseProfile, weight: RadialWeight) -> Result<CollapseField> {
    let report = check_assumptions(&profile, &weight, ASSUMPTION_HORIZON)?;
    if let Some(c) = report.checks.iter().find(|c| !c.pass) {
        return Err(Error::Precondition(alloc::format!("profile assumption `{}` fails: {}", c.name, c.detail)));
    }
    Ok(CollapseField::new(Arc::new(profile), weight))
}
