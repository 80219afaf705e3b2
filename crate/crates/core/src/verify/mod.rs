//! Numeric checks of the supporting lemmas: the coupling construction, the
//! Poisson TV and χ² bounds, regularized Rademacher monotonicity, relaxation
//! values and admissibility, and the η/β allowances.

mod admissibility;
mod budget;
mod coupling;
mod generalization;
mod poisson_tv;
mod rademacher;
mod relaxation;
mod report;
pub mod suite;

pub use admissibility::{
    admissibility_check, alternating_instance, tiny_instances, AdmissibilityLearner, TinyInstance,
    SLACK_TOL,
};
pub use budget::{beta_budget, eta_budget, EtaTerms};
pub use coupling::{
    acceptance_probs, coupling_montecarlo, coupling_select, failure_probability, CouplingCheck,
    CouplingOutcome,
};
pub use generalization::{generalization_gap_mc, GapCheck};
pub use poisson_tv::{
    chi2_expectation, chi2_ingster, chi2_mixture, shifted_poisson_tv, tv_exact_poisson,
    tv_monte_carlo, TvExact, TV_MAX_DOMAIN,
};
pub use rademacher::{
    monotonicity_check, rademacher_estimate, random_monotonicity_instance, MonotonicityInstance,
    RademacherEstimate, RademacherMode, EXACT_MAX_POINTS,
};
pub use relaxation::{
    negative_scaled_loss, relaxation_band_check, relaxation_value, EvalMode, RelaxationMode,
    RelaxationParams, RelaxationValue,
};
pub use report::{CheckMode, VerificationReport};
