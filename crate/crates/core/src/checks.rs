//! Structural condition checks: realizability, the HLS span condition,
//! the sub-logarithmic-regret characterizations, and detectability of
//! misspecified representations under the optimal policy.
//!
//! The optimal-policy allocation used here puts unit mass on each context's
//! optimal arm (not weighted by the context distribution); simulation-time
//! visit frequencies under an optimal policy are rho-weighted instead.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{
    compute_gaps, optimal_policy_allocation, Allocation, BanditInstance, Representation,
    RepresentationSet,
};

/// Tolerances for the condition checks. The conditions themselves are
/// exact-arithmetic statements; these are the numerical bridge.
#[derive(Debug, Clone, Copy)]
pub struct CheckOptions {
    /// Relative residual threshold deciding realizability.
    pub realizability_tol: f64,
    /// Relative singular-value cutoff for rank and image decisions.
    pub rank_tol: f64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            realizability_tol: 1e-9,
            rank_tol: 1e-9,
        }
    }
}

/// A violating (or otherwise noteworthy) triple.
#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    pub rep: String,
    pub context: Option<usize>,
    pub arm: Option<usize>,
    pub detail: String,
}

/// Outcome of a condition check. `holds` is true exactly when there are no
/// witnesses.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub holds: bool,
    pub witnesses: Vec<Witness>,
    pub numeric_margins: Vec<(String, f64)>,
    pub notes: Vec<String>,
}

impl ConditionReport {
    fn from_parts(
        witnesses: Vec<Witness>,
        numeric_margins: Vec<(String, f64)>,
        notes: Vec<String>,
    ) -> Self {
        Self {
            holds: witnesses.is_empty(),
            witnesses,
            numeric_margins,
            notes,
        }
    }
}

/// Least-squares realizability of a reward vector in a representation, under
/// the uniform full-support allocation. Returns the decision, the minimal
/// residual, and the fitted parameter.
pub fn realizable_for_rewards(
    rep: &Representation,
    rewards: &DVector<f64>,
    tol: f64,
) -> (bool, f64, DVector<f64>) {
    let pairs = rewards.len();
    let uniform = Allocation::new(DMatrix::from_element(1, pairs, 1.0), f64::INFINITY);
    let theta = linalg::best_fit(rep, &uniform, rewards, linalg::DEFAULT_RANK_TOL);
    let residual = linalg::weighted_residual(rep, &uniform, rewards, &theta);
    (residual <= tol * rewards.norm_squared(), residual, theta)
}

/// Whether the instance's rewards are a linear function of the
/// representation's features.
pub fn is_realizable(
    instance: &BanditInstance,
    rep: &Representation,
    tol: f64,
) -> (bool, f64, DVector<f64>) {
    realizable_for_rewards(rep, &instance.reward_vector(), tol)
}

/// HLS condition: every sub-optimal feature vector lies in the span of the
/// optimal-arm feature vectors.
pub fn check_hls(
    instance: &BanditInstance,
    rep: &Representation,
    opts: CheckOptions,
) -> Result<ConditionReport> {
    let gaps = compute_gaps(instance)?;
    let a_count = instance.num_arms;
    let mut span = DMatrix::zeros(rep.dim, rep.dim);
    for (x, &opt) in gaps.optimal_arm.iter().enumerate() {
        let phi = rep.feature(a_count, x, opt);
        span += &phi * phi.transpose();
    }
    let span_pinv = linalg::pinv(&span, opts.rank_tol)?;
    let mut witnesses = Vec::new();
    let mut margins = Vec::new();
    for (x, a) in gaps.suboptimal_pairs() {
        let phi = rep.feature(a_count, x, a);
        let residual = (&phi - &span * (&span_pinv * &phi)).norm();
        margins.push((format!("{} x{} a{}", rep.name, x, a), residual));
        if !linalg::in_image_with_pinv(&span, &span_pinv, &phi, opts.rank_tol) {
            witnesses.push(Witness {
                rep: rep.name.clone(),
                context: Some(x),
                arm: Some(a),
                detail: "feature outside the span of optimal-arm features".to_string(),
            });
        }
    }
    Ok(ConditionReport::from_parts(witnesses, margins, Vec::new()))
}

/// Necessary and sufficient condition for the representation-learning
/// complexity to vanish: for every representation whose misspecification
/// under the optimal-policy allocation is (numerically) zero, and every
/// sub-optimal pair, the best-fit gap estimate is strictly positive and the
/// pair's feature direction is covered by the optimal-policy design matrix.
pub fn check_sublog(
    instance: &BanditInstance,
    reps: &RepresentationSet,
    opts: CheckOptions,
) -> Result<ConditionReport> {
    let gaps = compute_gaps(instance)?;
    let rewards = instance.reward_vector();
    if !reps
        .reps
        .iter()
        .any(|rep| realizable_for_rewards(rep, &rewards, opts.realizability_tol).0)
    {
        return Err(Error::Unrealizable);
    }
    let eta_star = optimal_policy_allocation(instance)?;
    let a_count = instance.num_arms;
    let mut witnesses = Vec::new();
    let mut margins = Vec::new();
    let mut notes = Vec::new();
    let mse_floor = opts.realizability_tol * rewards.norm_squared().max(1.0);
    for rep in &reps.reps {
        let mse = linalg::misspec_mse(rep, &eta_star, &rewards, opts.rank_tol);
        margins.push((format!("{} mse_under_optimal_policy", rep.name), mse));
        if mse > mse_floor {
            notes.push(format!(
                "{}: misspecification detectable under the optimal policy; exempt",
                rep.name
            ));
            continue;
        }
        let design = linalg::design_matrix(rep, &eta_star, opts.rank_tol);
        let design_pinv = linalg::pinv(&design.matrix, opts.rank_tol)?;
        let theta = linalg::best_fit(rep, &eta_star, &rewards, opts.rank_tol);
        for (x, a) in gaps.suboptimal_pairs() {
            let opt = gaps.optimal_arm[x];
            let z = rep.feature(a_count, x, opt) - rep.feature(a_count, x, a);
            let estimate = z.dot(&theta);
            let positivity_floor = opts.realizability_tol * theta.norm() * z.norm();
            margins.push((format!("{} x{} a{} gap_estimate", rep.name, x, a), estimate));
            if estimate <= positivity_floor {
                witnesses.push(Witness {
                    rep: rep.name.clone(),
                    context: Some(x),
                    arm: Some(a),
                    detail: "best-fit gap estimate not strictly positive".to_string(),
                });
            }
            let phi = rep.feature(a_count, x, a);
            if !linalg::in_image_with_pinv(&design.matrix, &design_pinv, &phi, opts.rank_tol) {
                witnesses.push(Witness {
                    rep: rep.name.clone(),
                    context: Some(x),
                    arm: Some(a),
                    detail: "feature direction not explored by the optimal policy".to_string(),
                });
            }
        }
    }
    Ok(ConditionReport::from_parts(witnesses, margins, notes))
}

/// Fully-realizable variant: every sub-optimal pair must have at least one
/// representation whose optimal-policy design matrix covers its feature gap.
pub fn check_sublog_fr(
    instance: &BanditInstance,
    reps: &RepresentationSet,
    opts: CheckOptions,
) -> Result<ConditionReport> {
    let gaps = compute_gaps(instance)?;
    let rewards = instance.reward_vector();
    for rep in &reps.reps {
        if !realizable_for_rewards(rep, &rewards, opts.realizability_tol).0 {
            return Err(Error::NotFullyRealizable(rep.name.clone()));
        }
    }
    let eta_star = optimal_policy_allocation(instance)?;
    let a_count = instance.num_arms;
    let mut prepared = Vec::new();
    for rep in &reps.reps {
        let design = linalg::design_matrix(rep, &eta_star, opts.rank_tol);
        let design_pinv = linalg::pinv(&design.matrix, opts.rank_tol)?;
        prepared.push((rep, design.matrix, design_pinv));
    }
    let mut witnesses = Vec::new();
    let mut notes = Vec::new();
    for (x, a) in gaps.suboptimal_pairs() {
        let opt = gaps.optimal_arm[x];
        let mut certifier = None;
        for (rep, design, design_pinv) in &prepared {
            let z = rep.feature(a_count, x, a) - rep.feature(a_count, x, opt);
            if linalg::in_image_with_pinv(design, design_pinv, &z, opts.rank_tol) {
                certifier = Some(rep.name.clone());
                break;
            }
        }
        match certifier {
            Some(name) => notes.push(format!("x{x} a{a} certified by {name}")),
            None => witnesses.push(Witness {
                rep: "(all)".to_string(),
                context: Some(x),
                arm: Some(a),
                detail: "no representation covers this pair under the optimal policy".to_string(),
            }),
        }
    }
    Ok(ConditionReport::from_parts(witnesses, Vec::new(), notes))
}

/// Detectability regime: exactly one realizable representation, and every
/// misspecified one has misspecification at least `eps_threshold` under the
/// optimal-policy allocation.
pub fn check_detectability(
    instance: &BanditInstance,
    reps: &RepresentationSet,
    eps_threshold: f64,
    opts: CheckOptions,
) -> Result<ConditionReport> {
    let rewards = instance.reward_vector();
    let eta_star = optimal_policy_allocation(instance)?;
    let mut witnesses = Vec::new();
    let mut margins = Vec::new();
    let mut realizable_names = Vec::new();
    for rep in &reps.reps {
        let (realizable, residual, _) =
            realizable_for_rewards(rep, &rewards, opts.realizability_tol);
        margins.push((format!("{} uniform_residual", rep.name), residual));
        if realizable {
            realizable_names.push(rep.name.clone());
            continue;
        }
        let mse = linalg::misspec_mse(rep, &eta_star, &rewards, opts.rank_tol);
        margins.push((format!("{} mse_under_optimal_policy", rep.name), mse));
        if mse < eps_threshold {
            witnesses.push(Witness {
                rep: rep.name.clone(),
                context: None,
                arm: None,
                detail: format!(
                    "misspecified but not detectable under the optimal policy (mse {mse} < {eps_threshold})"
                ),
            });
        }
    }
    if realizable_names.len() != 1 {
        witnesses.push(Witness {
            rep: realizable_names.join(","),
            context: None,
            arm: None,
            detail: format!(
                "expected exactly one realizable representation, found {}",
                realizable_names.len()
            ),
        });
    }
    Ok(ConditionReport::from_parts(witnesses, margins, Vec::new()))
}
