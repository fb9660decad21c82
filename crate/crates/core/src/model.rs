//! Bandit instance, representations, and allocations.
//!
//! A problem has `X` contexts and `A` arms. Context-arm pairs are flattened
//! lexicographically throughout the crate: pair `(x, a)` maps to row index
//! `x * A + a`. Feature matrices stack per-pair feature vectors as rows under
//! the same order, so for a d-dimensional representation the feature matrix
//! has shape `(X*A) x d`.
//!
//! All values here are immutable after construction and safe to share across
//! threads.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `sum(rho) == 1`.
pub const RHO_SUM_TOL: f64 = 1e-12;

/// A finite stochastic contextual bandit instance.
///
/// `rho` is the context distribution (full support) and `rewards` the mean
/// reward table, one row per context. The complexity programs never read
/// `rho`; it is carried for simulation fidelity only, so two instances that
/// differ only in `rho` have identical complexity values.
#[derive(Debug, Clone, PartialEq)]
pub struct BanditInstance {
    pub num_contexts: usize,
    pub num_arms: usize,
    pub rho: DVector<f64>,
    pub rewards: DMatrix<f64>,
}

impl BanditInstance {
    pub fn new(rho: Vec<f64>, rewards: DMatrix<f64>) -> Self {
        let num_contexts = rewards.nrows();
        let num_arms = rewards.ncols();
        Self {
            num_contexts,
            num_arms,
            rho: DVector::from_vec(rho),
            rewards,
        }
    }

    /// Uniform context distribution over the given reward table.
    pub fn with_uniform_contexts(rewards: DMatrix<f64>) -> Self {
        let x = rewards.nrows();
        Self::new(vec![1.0 / x as f64; x], rewards)
    }

    #[inline]
    pub fn pair_index(&self, x: usize, a: usize) -> usize {
        x * self.num_arms + a
    }

    #[inline]
    pub fn num_pairs(&self) -> usize {
        self.num_contexts * self.num_arms
    }

    /// The vectorized reward table (length `X*A`, lexicographic pair order).
    pub fn reward_vector(&self) -> DVector<f64> {
        vectorize_table(&self.rewards)
    }
}

/// Flattens an `X x A` table into a length-`X*A` vector in pair order.
pub fn vectorize_table(table: &DMatrix<f64>) -> DVector<f64> {
    let (x, a) = table.shape();
    DVector::from_fn(x * a, |i, _| table[(i / a, i % a)])
}

/// A d-dimensional feature map stored as its `(X*A) x d` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Representation {
    pub name: String,
    pub dim: usize,
    pub features: DMatrix<f64>,
}

impl Representation {
    pub fn new(name: impl Into<String>, features: DMatrix<f64>) -> Self {
        let dim = features.ncols();
        Self {
            name: name.into(),
            dim,
            features,
        }
    }

    /// Feature vector of pair `(x, a)` for an instance with `num_arms` arms.
    pub fn feature(&self, num_arms: usize, x: usize, a: usize) -> DVector<f64> {
        self.features.row(x * num_arms + a).transpose()
    }

    pub fn is_finite(&self) -> bool {
        self.features.iter().all(|v| v.is_finite())
    }

    /// Shape check against an instance.
    pub fn compatible_with(&self, instance: &BanditInstance) -> bool {
        self.features.nrows() == instance.num_pairs() && self.features.ncols() == self.dim
    }
}

/// An ordered, finite set of representations.
#[derive(Debug, Clone, PartialEq)]
pub struct RepresentationSet {
    pub reps: Vec<Representation>,
}

impl RepresentationSet {
    pub fn new(reps: Vec<Representation>) -> Self {
        Self { reps }
    }

    pub fn singleton(rep: Representation) -> Self {
        Self { reps: vec![rep] }
    }

    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    pub fn by_name(&self, name: &str) -> Option<&Representation> {
        self.reps.iter().find(|r| r.name == name)
    }
}

/// Nonnegative sample counts per context-arm pair.
///
/// `optimal_cap` is the finite stand-in for the unbounded mass that the
/// complexity programs allow on optimal arms at zero cost.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    pub eta: DMatrix<f64>,
    pub optimal_cap: f64,
}

impl Allocation {
    pub fn new(eta: DMatrix<f64>, optimal_cap: f64) -> Self {
        Self { eta, optimal_cap }
    }

    /// All-zero allocation for an instance's shape.
    pub fn zeros(instance: &BanditInstance, optimal_cap: f64) -> Self {
        Self::new(
            DMatrix::zeros(instance.num_contexts, instance.num_arms),
            optimal_cap,
        )
    }

    /// Constant allocation (`value` on every pair).
    pub fn constant(instance: &BanditInstance, value: f64, optimal_cap: f64) -> Self {
        Self::new(
            DMatrix::from_element(instance.num_contexts, instance.num_arms, value),
            optimal_cap,
        )
    }

    /// The vectorized table (length `X*A`).
    pub fn eta_vector(&self) -> DVector<f64> {
        vectorize_table(&self.eta)
    }

    /// Scales every entry by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self::new(self.eta.map(|v| v * c), self.optimal_cap)
    }

    pub fn validate(&self, gaps: &GapTable) -> ValidationReport {
        let mut violations = Vec::new();
        if self.eta.iter().any(|v| !v.is_finite()) {
            violations.push("allocation has a non-finite entry".to_string());
        }
        if self.eta.iter().any(|&v| v < 0.0) {
            violations.push("allocation has a negative entry".to_string());
        }
        for (x, &opt) in gaps.optimal_arm.iter().enumerate() {
            if self.eta[(x, opt)] > self.optimal_cap {
                violations.push(format!(
                    "allocation exceeds the optimal-arm cap at context {x}"
                ));
            }
        }
        ValidationReport { violations }
    }
}

/// Sub-optimality gaps and the optimal policy of an instance.
#[derive(Debug, Clone, PartialEq)]
pub struct GapTable {
    pub gaps: DMatrix<f64>,
    pub optimal_arm: Vec<usize>,
}

impl GapTable {
    #[inline]
    pub fn gap(&self, x: usize, a: usize) -> f64 {
        self.gaps[(x, a)]
    }

    pub fn max_gap(&self) -> f64 {
        self.gaps.iter().cloned().fold(0.0, f64::max)
    }

    /// Minimum strictly positive gap.
    pub fn min_positive_gap(&self) -> f64 {
        self.gaps
            .iter()
            .cloned()
            .filter(|&g| g > 0.0)
            .fold(f64::INFINITY, f64::min)
    }

    /// Sub-optimal pairs in lexicographic `(x, a)` order.
    pub fn suboptimal_pairs(&self) -> Vec<(usize, usize)> {
        let (x_count, a_count) = self.gaps.shape();
        let mut out = Vec::with_capacity(x_count * (a_count - 1));
        for x in 0..x_count {
            for a in 0..a_count {
                if a != self.optimal_arm[x] {
                    out.push((x, a));
                }
            }
        }
        out
    }
}

/// Outcome of validating an instance; empty violations means OK.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the instance invariants: full-support `rho` summing to one, finite
/// rewards, and a strictly unique best arm in every context. Ties are a
/// validation error, never broken silently.
pub fn validate_instance(instance: &BanditInstance) -> ValidationReport {
    let mut violations = Vec::new();
    if instance.rho.len() != instance.num_contexts {
        violations.push(format!(
            "rho has length {} but the instance has {} contexts",
            instance.rho.len(),
            instance.num_contexts
        ));
        return ValidationReport { violations };
    }
    if instance.rho.iter().any(|v| !v.is_finite()) {
        violations.push("rho has a non-finite entry".to_string());
    }
    if instance.rho.iter().any(|&v| v <= 0.0) {
        violations.push("rho not full-support".to_string());
    }
    let sum: f64 = instance.rho.iter().sum();
    if (sum - 1.0).abs() > RHO_SUM_TOL {
        violations.push(format!("rho sums to {sum}, not 1"));
    }
    if instance.rewards.iter().any(|v| !v.is_finite()) {
        violations.push("rewards have a non-finite entry".to_string());
    }
    for x in 0..instance.num_contexts {
        let row = instance.rewards.row(x);
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let ties = row.iter().filter(|&&v| v == max).count();
        if ties > 1 {
            violations.push(format!("optimal arm not unique in context {x}"));
        }
    }
    ValidationReport { violations }
}

/// Gap table and optimal policy of a valid instance.
///
/// `gaps(x, a) = max_a' rewards(x, a') - rewards(x, a)`, so the optimal pair
/// of each context has gap exactly zero.
pub fn compute_gaps(instance: &BanditInstance) -> Result<GapTable> {
    let mut gaps = DMatrix::zeros(instance.num_contexts, instance.num_arms);
    let mut optimal_arm = Vec::with_capacity(instance.num_contexts);
    for x in 0..instance.num_contexts {
        let row = instance.rewards.row(x);
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("rewards row {x}")));
        }
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut best = None;
        for a in 0..instance.num_arms {
            if row[a] == max {
                if best.is_some() {
                    return Err(Error::NonUniqueOptimum { context: x });
                }
                best = Some(a);
            }
            gaps[(x, a)] = max - row[a];
        }
        optimal_arm.push(best.expect("row has a maximum"));
    }
    Ok(GapTable { gaps, optimal_arm })
}

/// Feature gap `phi(x, pi*(x)) - phi(x, a)`; the zero vector when `a` is the
/// optimal arm of `x`.
pub fn feature_gap(
    rep: &Representation,
    gaps: &GapTable,
    num_arms: usize,
    x: usize,
    a: usize,
) -> DVector<f64> {
    let opt = gaps.optimal_arm[x];
    rep.feature(num_arms, x, opt) - rep.feature(num_arms, x, a)
}

/// The allocation playing each context's optimal arm exactly once:
/// `eta(x, a) = 1{a = pi*(x)}`, with a unit optimal-arm cap.
pub fn optimal_policy_allocation(instance: &BanditInstance) -> Result<Allocation> {
    let gaps = compute_gaps(instance)?;
    let mut eta = DMatrix::zeros(instance.num_contexts, instance.num_arms);
    for (x, &opt) in gaps.optimal_arm.iter().enumerate() {
        eta[(x, opt)] = 1.0;
    }
    Ok(Allocation::new(eta, 1.0))
}
