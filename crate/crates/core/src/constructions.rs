//! Builders for the benchmark instance/representation families, each tagged
//! with the analytic quantities known about it.
//!
//! Enumeration orders are fixed (lexicographic over pairs, base-A counting
//! over policies) so identical inputs always produce bit-identical outputs.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    compute_gaps, validate_instance, BanditInstance, Representation, RepresentationSet,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Eq,
    Le,
    Ge,
}

/// A named expected value or inequality proven about a construction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalyticClaim {
    pub name: String,
    pub relation: Relation,
    pub value: f64,
    /// What the claim is about, e.g. a complexity family or a representation.
    pub target: String,
}

impl AnalyticClaim {
    fn new(name: &str, relation: Relation, value: f64, target: &str) -> Self {
        Self {
            name: name.to_string(),
            relation,
            value,
            target: target.to_string(),
        }
    }
}

/// An instance, a representation set, and the analytic claims that come with
/// the construction.
#[derive(Debug, Clone)]
pub struct ConstructedProblem {
    pub instance: BanditInstance,
    pub reps: RepresentationSet,
    pub analytic_claims: Vec<AnalyticClaim>,
    /// Construction identifier for file metadata.
    pub provenance: String,
}

impl ConstructedProblem {
    fn validated(self) -> Result<Self> {
        let report = validate_instance(&self.instance);
        if !report.ok() {
            return Err(Error::InvalidInstance(report.violations.join("; ")));
        }
        Ok(self)
    }
}

/// The canonical-basis representation of dimension `X*A`: realizable for any
/// reward table, with the vectorized table as its parameter.
pub fn build_trivial_rep(num_contexts: usize, num_arms: usize) -> Representation {
    let n = num_contexts * num_arms;
    Representation::new("trivial", DMatrix::identity(n, n))
}

/// Appends the trivial representation to a set. The complexity over the
/// augmented set always equals the unstructured sum of inverse gaps.
pub fn augment_with_trivial(
    reps: &RepresentationSet,
    num_contexts: usize,
    num_arms: usize,
) -> RepresentationSet {
    let mut out = reps.reps.clone();
    let mut name = "trivial".to_string();
    let mut k = 1;
    while out.iter().any(|r| r.name == name) {
        k += 1;
        name = format!("trivial_{k}");
    }
    let mut trivial = build_trivial_rep(num_contexts, num_arms);
    trivial.name = name;
    out.push(trivial);
    RepresentationSet::new(out)
}

/// A set of d-dimensional realizable representations under which learning the
/// given instance is as hard as the unstructured problem. Each representation
/// carries the reward table in its first coordinate and gap-sized indicators
/// of a block of `d - 1` sub-optimal pairs in the rest.
pub fn build_hard_set(instance: &BanditInstance, d: usize) -> Result<ConstructedProblem> {
    let report = validate_instance(instance);
    if !report.ok() {
        return Err(Error::InvalidInstance(report.violations.join("; ")));
    }
    let pairs_total = instance.num_pairs();
    if d < 2 || d > pairs_total {
        return Err(Error::DimsOutOfRange(format!(
            "d must be in [2, {pairs_total}], got {d}"
        )));
    }
    let gaps = compute_gaps(instance)?;
    let sub = gaps.suboptimal_pairs();
    let m = sub.len();
    let block = d - 1;
    let n_reps = m.div_ceil(block);
    let f = instance.reward_vector();
    let mut reps = Vec::with_capacity(n_reps);
    for i in 0..n_reps {
        let mut features = DMatrix::zeros(pairs_total, d);
        for row in 0..pairs_total {
            features[(row, 0)] = f[row];
        }
        for j in 0..block {
            let pair_idx = i * block + j;
            if pair_idx >= m {
                break; // short last block; unused columns stay zero
            }
            let (x, a) = sub[pair_idx];
            let row = instance.pair_index(x, a);
            features[(row, 1 + j)] = gaps.gap(x, a);
        }
        reps.push(Representation::new(format!("hard{i}"), features));
    }
    let unstructured: f64 = sub.iter().map(|&(x, a)| 2.0 / gaps.gap(x, a)).sum();
    let per_rep_bound = 2.0 * (d as f64 - 1.0) / gaps.min_positive_gap();
    let mut analytic_claims = vec![AnalyticClaim::new(
        "complexity_replearn",
        Relation::Eq,
        unstructured,
        "full set",
    )];
    for rep in &reps {
        analytic_claims.push(AnalyticClaim::new(
            "complexity_clb",
            Relation::Le,
            per_rep_bound,
            &rep.name,
        ));
    }
    ConstructedProblem {
        instance: instance.clone(),
        reps: RepresentationSet::new(reps),
        analytic_claims,
        provenance: "hard-set".to_string(),
    }
    .validated()
}

/// A nested family over a spike instance: every context's arm 0 pays
/// `delta_min`, everything else pays zero. Representation `i` carries the
/// reward table plus indicators over the first `dims[i] - 1` sub-optimal
/// pairs, so each representation's columns are a prefix of the next's.
pub fn build_nested_family(
    num_contexts: usize,
    num_arms: usize,
    delta_min: f64,
    dims: &[usize],
) -> Result<ConstructedProblem> {
    if num_contexts < 1 || num_arms < 2 {
        return Err(Error::InvalidParameter(
            "need at least one context and two arms".to_string(),
        ));
    }
    if !(delta_min > 0.0) || !delta_min.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "delta_min must be positive, got {delta_min}"
        )));
    }
    let m = num_contexts * (num_arms - 1);
    if dims.is_empty() || dims[0] < 2 || dims.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::DimsOutOfRange(
            "dims must be strictly increasing and start at >= 2".to_string(),
        ));
    }
    if *dims.last().unwrap() > m + 1 {
        return Err(Error::DimsOutOfRange(format!(
            "largest dim {} exceeds X(A-1)+1 = {}",
            dims.last().unwrap(),
            m + 1
        )));
    }
    let rewards = DMatrix::from_fn(num_contexts, num_arms, |_, a| {
        if a == 0 {
            delta_min
        } else {
            0.0
        }
    });
    let instance = BanditInstance::with_uniform_contexts(rewards);
    let gaps = compute_gaps(&instance)?;
    let sub = gaps.suboptimal_pairs();
    let f = instance.reward_vector();
    let mut reps = Vec::with_capacity(dims.len());
    let mut analytic_claims = Vec::new();
    for (i, &di) in dims.iter().enumerate() {
        let mut features = DMatrix::zeros(instance.num_pairs(), di);
        for row in 0..instance.num_pairs() {
            features[(row, 0)] = f[row];
        }
        for j in 0..di - 1 {
            let (x, a) = sub[j];
            features[(instance.pair_index(x, a), 1 + j)] = delta_min;
        }
        let name = format!("nested{}", i + 1);
        analytic_claims.push(AnalyticClaim::new(
            "complexity_clb",
            Relation::Eq,
            2.0 * (di as f64 - 1.0) / delta_min,
            &name,
        ));
        reps.push(Representation::new(name, features));
    }
    analytic_claims.push(AnalyticClaim::new(
        "complexity_replearn",
        Relation::Eq,
        2.0 * (*dims.last().unwrap() as f64 - 1.0) / delta_min,
        "full set",
    ));
    ConstructedProblem {
        instance,
        reps: RepresentationSet::new(reps),
        analytic_claims,
        provenance: "nested".to_string(),
    }
    .validated()
}

/// Scaffold over a family of spike reward functions indexed by deterministic
/// policies: each representation packs `d` policies as indicator columns.
#[derive(Debug, Clone)]
pub struct PolicyClassScaffold {
    pub num_contexts: usize,
    pub num_arms: usize,
    pub num_policies: usize,
    pub reps: RepresentationSet,
    policies_per_rep: usize,
}

impl PolicyClassScaffold {
    /// Arm played by policy `k` in context `x` (base-A counting order,
    /// context 0 being the most significant digit).
    pub fn policy_arm(&self, k: usize, x: usize) -> usize {
        let shift = self.num_contexts - 1 - x;
        (k / self.num_arms.pow(shift as u32)) % self.num_arms
    }

    /// Index of the representation hosting policy `k`.
    pub fn host_rep(&self, k: usize) -> usize {
        k / self.policies_per_rep
    }

    /// Reward table of the family member indexed by policy `k`:
    /// `eps` on the policy's arm, zero elsewhere.
    pub fn reward_table(&self, k: usize, eps: f64) -> DMatrix<f64> {
        DMatrix::from_fn(self.num_contexts, self.num_arms, |x, a| {
            if a == self.policy_arm(k, x) {
                eps
            } else {
                0.0
            }
        })
    }

    /// Materializes one family member as a constructed problem with a
    /// uniform context distribution.
    pub fn materialize(&self, k: usize, eps: f64) -> Result<ConstructedProblem> {
        if k >= self.num_policies {
            return Err(Error::InvalidParameter(format!(
                "policy index {k} out of range (num_policies = {})",
                self.num_policies
            )));
        }
        if !(eps > 0.0) {
            return Err(Error::InvalidParameter("eps must be positive".to_string()));
        }
        let instance = BanditInstance::with_uniform_contexts(self.reward_table(k, eps));
        let host = &self.reps.reps[self.host_rep(k)];
        let analytic_claims = vec![AnalyticClaim::new(
            "realizable_in_host",
            Relation::Eq,
            0.0,
            &host.name,
        )];
        ConstructedProblem {
            instance,
            reps: self.reps.clone(),
            analytic_claims,
            provenance: format!("policy-class k={k} eps={eps}"),
        }
        .validated()
    }
}

/// Builds the policy-class feature scaffold: `X` is the largest context count
/// with `A^X <= d * N`, the `A^X` deterministic policies are enumerated in
/// base-A counting order, and representation `j` hosts policies
/// `j*d ..= min((j+1)*d, A^X) - 1` as indicator columns.
pub fn build_policy_class_features(d: usize, n: usize, num_arms: usize) -> Result<PolicyClassScaffold> {
    if num_arms < 2 || d < 1 || n < 1 {
        return Err(Error::InvalidParameter(
            "need A >= 2, d >= 1, N >= 1".to_string(),
        ));
    }
    // Largest X with A^X <= d*N, computed in integer arithmetic.
    let budget = d.saturating_mul(n);
    let mut x = 0usize;
    let mut power = 1usize;
    while power.saturating_mul(num_arms) <= budget {
        power *= num_arms;
        x += 1;
    }
    if x == 0 {
        return Err(Error::TooFewPolicies);
    }
    let num_policies = power; // A^X
    let mut scaffold = PolicyClassScaffold {
        num_contexts: x,
        num_arms,
        num_policies,
        reps: RepresentationSet::new(Vec::new()),
        policies_per_rep: d,
    };
    let mut reps = Vec::with_capacity(n);
    for j in 0..n {
        let mut features = DMatrix::zeros(x * num_arms, d);
        for m in 0..d {
            let k = j * d + m;
            if k >= num_policies {
                break;
            }
            for ctx in 0..x {
                let arm = scaffold.policy_arm(k, ctx);
                features[(ctx * num_arms + arm, m)] = 1.0;
            }
        }
        reps.push(Representation::new(format!("policy{j}"), features));
    }
    scaffold.reps = RepresentationSet::new(reps);
    Ok(scaffold)
}

/// Scaffold stacking binary-encoded copies of a two-arm indicator
/// representation, so that each arm's gap decomposes as a sum of per-copy
/// binarized gaps.
#[derive(Debug, Clone)]
pub struct BinarizedScaffold {
    pub num_contexts: usize,
    pub num_arms: usize,
    pub dim: usize,
    pub copies: usize,
    pub per_copy_dim: usize,
    pub rep: Representation,
    /// Arms beyond `2^copies` whose features are identically zero.
    pub zero_feature_arms: Vec<usize>,
    /// Set when `d < 12 * log2(A)`, outside the analyzed regime.
    pub regime_warning: bool,
}

impl BinarizedScaffold {
    #[inline]
    fn bit(a: usize, i: usize) -> usize {
        (a >> i) & 1
    }

    /// Splits a parameter into the per-copy blocks (trailing padding
    /// components are ignored).
    pub fn split_theta(&self, theta: &DVector<f64>) -> Vec<DVector<f64>> {
        (0..self.copies)
            .map(|i| {
                DVector::from_fn(self.per_copy_dim, |r, _| theta[i * self.per_copy_dim + r])
            })
            .collect()
    }

    /// Two-arm indicator feature of the underlying copy problem.
    fn bar_feature(&self, x: usize, b: usize) -> DVector<f64> {
        let mut v = DVector::zeros(self.per_copy_dim);
        v[2 * x + b] = 1.0;
        v
    }

    /// Reward table induced by a parameter.
    pub fn reward_table(&self, theta: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::from_fn(self.num_contexts, self.num_arms, |x, a| {
            self.rep
                .feature(self.num_arms, x, a)
                .dot(theta)
        })
    }

    /// Gap of `(x, a)` computed over the binary-encoded arms only.
    pub fn encoded_gap(&self, theta: &DVector<f64>, x: usize, a: usize) -> f64 {
        let encoded = 1usize << self.copies;
        let best = (0..encoded)
            .map(|arm| self.rep.feature(self.num_arms, x, arm).dot(theta))
            .fold(f64::NEG_INFINITY, f64::max);
        best - self.rep.feature(self.num_arms, x, a).dot(theta)
    }

    /// The same gap recomputed as the sum of per-copy two-arm gaps.
    pub fn binarized_gap_sum(&self, theta: &DVector<f64>, x: usize, a: usize) -> f64 {
        let blocks = self.split_theta(theta);
        let mut total = 0.0;
        for (i, block) in blocks.iter().enumerate() {
            let played = self.bar_feature(x, Self::bit(a, i)).dot(block);
            let best = self
                .bar_feature(x, 0)
                .dot(block)
                .max(self.bar_feature(x, 1).dot(block));
            total += best - played;
        }
        total
    }

    /// Materializes an instance by sampling a parameter with the given seed,
    /// shifting each copy's per-context entries so optimal rewards are
    /// strictly positive (shifts leave all gaps unchanged).
    pub fn materialize(&self, seed: u64) -> Result<(ConstructedProblem, DVector<f64>)> {
        use rand::{Rng, SeedableRng};
        let mut attempt = 0u64;
        loop {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt));
            let mut theta = DVector::from_fn(self.dim, |_, _| rng.gen_range(-1.0f64..1.0));
            for i in 0..self.copies {
                for x in 0..self.num_contexts {
                    let lo = i * self.per_copy_dim + 2 * x;
                    let max = theta[lo].max(theta[lo + 1]);
                    if max <= 0.0 {
                        let shift = -max + 0.25;
                        theta[lo] += shift;
                        theta[lo + 1] += shift;
                    }
                }
            }
            let instance = BanditInstance::with_uniform_contexts(self.reward_table(&theta));
            if validate_instance(&instance).ok() {
                let problem = ConstructedProblem {
                    instance,
                    reps: RepresentationSet::singleton(self.rep.clone()),
                    analytic_claims: Vec::new(),
                    provenance: format!("binarized seed={}", seed.wrapping_add(attempt)),
                };
                return Ok((problem, theta));
            }
            attempt += 1;
            if attempt > 100 {
                return Err(Error::InvalidParameter(
                    "could not materialize a tie-free binarized instance".to_string(),
                ));
            }
        }
    }
}

/// Builds the binarized-arm scaffold for `A >= 4` arms in dimension `d`.
pub fn build_binarized_arms(d: usize, num_arms: usize) -> Result<BinarizedScaffold> {
    if num_arms < 4 {
        return Err(Error::InvalidParameter(format!(
            "need A >= 4 arms, got {num_arms}"
        )));
    }
    let copies = (num_arms as f64).log2().floor() as usize;
    let per_copy_dim = d / copies;
    let num_contexts = per_copy_dim / 2;
    if num_contexts == 0 {
        return Err(Error::InvalidParameter(format!(
            "d = {d} too small for {copies} copies"
        )));
    }
    let regime_warning = (d as f64) < 12.0 * (num_arms as f64).log2();
    let encoded = 1usize << copies;
    let mut features = DMatrix::zeros(num_contexts * num_arms, d);
    for x in 0..num_contexts {
        for a in 0..num_arms.min(encoded) {
            let row = x * num_arms + a;
            for i in 0..copies {
                let b = BinarizedScaffold::bit(a, i);
                features[(row, i * per_copy_dim + 2 * x + b)] = 1.0;
            }
        }
        // Arms a >= 2^copies keep all-zero features.
    }
    let zero_feature_arms = (encoded..num_arms).collect();
    Ok(BinarizedScaffold {
        num_contexts,
        num_arms,
        dim: d,
        copies,
        per_copy_dim,
        rep: Representation::new("binarized", features),
        zero_feature_arms,
        regime_warning,
    })
}

/// The four-arm, single-context instance with two 3-dimensional realizable
/// representations whose fully-realizable complexity is bounded while each
/// single-representation complexity scales like `2 / eps`.
pub fn build_fr_example(eps: f64) -> Result<ConstructedProblem> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "eps must be in (0, 1), got {eps}"
        )));
    }
    let rewards = DMatrix::from_row_slice(1, 4, &[1.0, 1.0 - eps, 1.0 - eps, 0.0]);
    let instance = BanditInstance::new(vec![1.0], rewards);
    let phi1 = Representation::new(
        "phi1",
        DMatrix::from_row_slice(
            4,
            3,
            &[
                1.0,
                0.0,
                0.0,
                1.0 - eps,
                eps,
                0.0,
                0.0,
                0.0,
                1.0 - eps,
                0.0,
                1.0,
                0.0,
            ],
        ),
    );
    let phi2 = Representation::new(
        "phi2",
        DMatrix::from_row_slice(
            4,
            3,
            &[
                0.0,
                0.0,
                1.0,
                1.0 - eps,
                0.0,
                0.0,
                0.0,
                eps,
                1.0 - eps,
                0.0,
                1.0,
                0.0,
            ],
        ),
    );
    let analytic_claims = vec![
        AnalyticClaim::new("complexity_fr", Relation::Le, 2.0, "full set"),
        AnalyticClaim::new("complexity_clb", Relation::Ge, 2.0 / eps, "phi1"),
        AnalyticClaim::new("complexity_clb", Relation::Ge, 2.0 / eps, "phi2"),
    ];
    ConstructedProblem {
        instance,
        reps: RepresentationSet::new(vec![phi1, phi2]),
        analytic_claims,
        provenance: format!("fr-example eps={eps}"),
    }
    .validated()
}
