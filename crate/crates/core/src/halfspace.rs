//! Closed-form minimization of the weighted least-squares objective over a
//! half-space of parameters, and the per-triple constraint functions used by
//! all complexity programs.
//!
//! The minimized problem is
//!
//! ```text
//! min_theta 1/2 |f - F theta|^2_{D_eta}   s.t.   z^T theta >= 0
//! ```
//!
//! whose value splits into a misspecification part and a sub-optimality part.
//! The per-pair constraint uses `z = phi(x, a) - phi(x, pi*(x))`, the negated
//! feature gap, so that the half-space contains exactly the parameters under
//! which `a` would beat the optimal arm.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{self, DEFAULT_RANK_TOL};
use crate::model::{Allocation, GapTable, Representation, RepresentationSet};

/// Default margin used to push the returned minimizer strictly inside the
/// half-space when the infimum is only approached along a kernel direction.
pub const DEFAULT_DELTA_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, Copy)]
pub struct HalfspaceOptions {
    pub rank_tol: f64,
    pub delta_margin: f64,
}

impl Default for HalfspaceOptions {
    fn default() -> Self {
        Self {
            rank_tol: DEFAULT_RANK_TOL,
            delta_margin: DEFAULT_DELTA_MARGIN,
        }
    }
}

/// Which branch of the closed form produced the result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum CaseTag {
    /// `z = 0`: the constraint is vacuous.
    VacuousZZero,
    /// `z` has a kernel component w.r.t. the design matrix: the infimum is
    /// approached along it and the constraint costs nothing.
    KernelDirection,
    /// The unconstrained best fit already satisfies the half-space.
    UnconstrainedOptimum,
    /// The best fit violates the half-space; the minimizer projects onto its
    /// boundary.
    BoundaryProjection,
}

/// Value and minimizer of the half-space problem.
#[derive(Debug, Clone)]
pub struct HalfspaceResult {
    /// Optimal objective value `I`.
    pub value: f64,
    /// A parameter attaining (or approaching, in the kernel case) the value.
    pub minimizer: DVector<f64>,
    pub case_tag: CaseTag,
    /// The sub-optimality term `c`; the value equals
    /// `misspecification / 2 + c / 2`.
    pub suboptimality_term: f64,
    /// The weighted squared residual at the unconstrained best fit.
    pub misspecification: f64,
}

/// Per-(representation, allocation) factorization shared by all constraint
/// evaluations at a fixed allocation.
///
/// All operators run through the weighted factor `B = D^{1/2} F` rather than
/// the design matrix `V = B^T B`: the best fit is `B^+ (D^{1/2} f)`, the
/// image of `V` is the row space of `B`, and `|z|^2_{V^+} = |(B^T)^+ z|^2`.
/// These are the same objects by the pseudo-inverse Gram identities, but the
/// relative rank cutoff acts on singular values of `B` (the square roots of
/// `V`'s), so directions carrying real mass survive even when the huge
/// optimal-arm cap dominates the spectrum.
pub struct PreparedRep<'a> {
    pub rep: &'a Representation,
    weighted: DMatrix<f64>,
    weighted_pinv: DMatrix<f64>,
    pub theta_star: DVector<f64>,
    pub misspec: f64,
    pub opts: HalfspaceOptions,
}

impl<'a> PreparedRep<'a> {
    pub fn new(
        rep: &'a Representation,
        alloc: &Allocation,
        rewards: &DVector<f64>,
        opts: HalfspaceOptions,
    ) -> Self {
        let (weighted, targets) = linalg::weighted_factor(rep, alloc, rewards);
        let weighted_pinv = linalg::pinv(&weighted, opts.rank_tol).expect("finite factor");
        let theta_star = &weighted_pinv * targets;
        let misspec = linalg::weighted_residual(rep, alloc, rewards, &theta_star);
        Self {
            rep,
            weighted,
            weighted_pinv,
            theta_star,
            misspec,
            opts,
        }
    }

    /// Component of `z` outside the row space of the weighted factor. The
    /// projector is applied twice: the kernel shift coefficient can be large,
    /// so rounding leakage onto heavily weighted rows would otherwise be
    /// amplified into the minimizer's residuals.
    fn kernel_component(&self, z: &DVector<f64>) -> DVector<f64> {
        let project = |v: &DVector<f64>| v - &self.weighted_pinv * (&self.weighted * v);
        project(&project(z))
    }

    /// `|z|^2_{V^+}` and `V^+ z`.
    fn pinv_norm_parts(&self, z: &DVector<f64>) -> (f64, DVector<f64>) {
        let w = self.weighted_pinv.transpose() * z;
        (w.norm_squared(), &self.weighted_pinv * w)
    }

    /// Closed-form solution of the half-space problem for direction `z`.
    pub fn halfspace_min(&self, z: &DVector<f64>) -> HalfspaceResult {
        let half_misspec = 0.5 * self.misspec;
        if z.norm() == 0.0 {
            return HalfspaceResult {
                value: half_misspec,
                minimizer: self.theta_star.clone(),
                case_tag: CaseTag::VacuousZZero,
                suboptimality_term: 0.0,
                misspecification: self.misspec,
            };
        }
        let kernel_part = self.kernel_component(z);
        if kernel_part.norm() > self.opts.rank_tol * z.norm() {
            let s = z.dot(&self.theta_star);
            let denom = kernel_part.norm_squared();
            let shift = ((self.opts.delta_margin - s) / denom).max(0.0);
            return HalfspaceResult {
                value: half_misspec,
                minimizer: &self.theta_star + kernel_part * shift,
                case_tag: CaseTag::KernelDirection,
                suboptimality_term: 0.0,
                misspecification: self.misspec,
            };
        }
        let s = z.dot(&self.theta_star);
        if s > 0.0 {
            return HalfspaceResult {
                value: half_misspec,
                minimizer: self.theta_star.clone(),
                case_tag: CaseTag::UnconstrainedOptimum,
                suboptimality_term: 0.0,
                misspecification: self.misspec,
            };
        }
        let (q, pinv_z) = self.pinv_norm_parts(z);
        assert!(
            q > 0.0,
            "z in the image of a PSD matrix has positive pinv norm"
        );
        let c = s * s / q;
        HalfspaceResult {
            value: half_misspec + 0.5 * c,
            minimizer: &self.theta_star - pinv_z * (s / q),
            case_tag: CaseTag::BoundaryProjection,
            suboptimality_term: c,
            misspecification: self.misspec,
        }
    }

    /// Constraint function for a sub-optimal pair, with
    /// `z = phi(x, a) - phi(x, pi*(x))`.
    pub fn constraint_value(&self, gaps: &GapTable, x: usize, a: usize) -> Result<HalfspaceResult> {
        let opt = gaps.optimal_arm[x];
        if a == opt {
            return Err(Error::OptimalArmConstraint { context: x });
        }
        let num_arms = gaps.gaps.ncols();
        let z = self.rep.feature(num_arms, x, a) - self.rep.feature(num_arms, x, opt);
        Ok(self.halfspace_min(&z))
    }

    /// Fully-realizable constraint term for one representation:
    /// `gap^2 * 1{z in im(V)} / (2 |z|^2_{V^+})`.
    pub fn fr_term(&self, gaps: &GapTable, x: usize, a: usize) -> f64 {
        let opt = gaps.optimal_arm[x];
        let num_arms = gaps.gaps.ncols();
        let z = self.rep.feature(num_arms, x, a) - self.rep.feature(num_arms, x, opt);
        if z.norm() == 0.0 {
            return 0.0;
        }
        if self.kernel_component(&z).norm() > self.opts.rank_tol * z.norm() {
            return 0.0;
        }
        let (q, _) = self.pinv_norm_parts(&z);
        assert!(q > 0.0, "in-image direction has positive pinv norm");
        let gap = gaps.gap(x, a);
        gap * gap / (2.0 * q)
    }
}

/// One-shot half-space minimization (see [`PreparedRep::halfspace_min`]).
pub fn halfspace_min(
    rewards: &DVector<f64>,
    rep: &Representation,
    alloc: &Allocation,
    z: &DVector<f64>,
    opts: HalfspaceOptions,
) -> HalfspaceResult {
    PreparedRep::new(rep, alloc, rewards, opts).halfspace_min(z)
}

/// One-shot per-pair constraint value (see [`PreparedRep::constraint_value`]).
pub fn constraint_value(
    rewards: &DVector<f64>,
    rep: &Representation,
    alloc: &Allocation,
    gaps: &GapTable,
    x: usize,
    a: usize,
    opts: HalfspaceOptions,
) -> Result<HalfspaceResult> {
    PreparedRep::new(rep, alloc, rewards, opts).constraint_value(gaps, x, a)
}

/// Fully-realizable constraint for one sub-optimal pair: the maximum of the
/// per-representation terms. Every representation must be realizable for the
/// rewards.
pub fn fr_constraint(
    rewards: &DVector<f64>,
    reps: &RepresentationSet,
    alloc: &Allocation,
    gaps: &GapTable,
    x: usize,
    a: usize,
    opts: HalfspaceOptions,
) -> Result<f64> {
    for rep in &reps.reps {
        let (realizable, _, _) = crate::checks::realizable_for_rewards(rep, rewards, 1e-9);
        if !realizable {
            return Err(Error::NotFullyRealizable(rep.name.clone()));
        }
    }
    let opt = gaps.optimal_arm[x];
    if a == opt {
        return Err(Error::OptimalArmConstraint { context: x });
    }
    let mut best = 0.0_f64;
    for rep in &reps.reps {
        let prepared = PreparedRep::new(rep, alloc, rewards, opts);
        best = best.max(prepared.fr_term(gaps, x, a));
    }
    Ok(best)
}

/// Slow reference minimizer for the half-space problem: projected accelerated
/// gradient descent with adaptive restarts. Independent of the closed form
/// above (no pseudo-inverse, no case analysis); used to cross-check it.
pub fn reference_halfspace_min(
    rewards: &DVector<f64>,
    rep: &Representation,
    alloc: &Allocation,
    z: &DVector<f64>,
    iterations: usize,
) -> f64 {
    let eta = alloc.eta_vector();
    let d = rep.dim;
    let objective = |theta: &DVector<f64>| -> f64 {
        let pred = &rep.features * theta;
        let mut total = 0.0;
        for i in 0..eta.len() {
            let r = rewards[i] - pred[i];
            total += eta[i] * r * r;
        }
        0.5 * total
    };
    let gradient = |theta: &DVector<f64>| -> DVector<f64> {
        let pred = &rep.features * theta;
        let mut g = DVector::zeros(d);
        for i in 0..eta.len() {
            if eta[i] != 0.0 {
                let phi = rep.features.row(i).transpose();
                g += phi * (eta[i] * (pred[i] - rewards[i]));
            }
        }
        g
    };
    let project = |theta: DVector<f64>| -> DVector<f64> {
        let zn = z.norm_squared();
        if zn == 0.0 {
            return theta;
        }
        let s = z.dot(&theta);
        if s >= 0.0 {
            theta
        } else {
            theta - z * (s / zn)
        }
    };
    // Lipschitz bound via the trace of the design matrix.
    let mut lipschitz = 0.0;
    for i in 0..eta.len() {
        lipschitz += eta[i] * rep.features.row(i).norm_squared();
    }
    if lipschitz == 0.0 {
        return 0.0;
    }
    let step = 1.0 / lipschitz;
    let mut theta = project(DVector::zeros(d));
    let mut momentum = theta.clone();
    let mut t = 1.0_f64;
    let mut prev_value = objective(&theta);
    for _ in 0..iterations {
        let next = project(&momentum - gradient(&momentum) * step);
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let value = objective(&next);
        if value > prev_value {
            // Restart the momentum when the objective increases.
            momentum = next.clone();
            t = 1.0;
        } else {
            momentum = &next + (&next - &theta) * ((t - 1.0) / t_next);
            t = t_next;
        }
        theta = next;
        prev_value = value;
    }
    objective(&theta)
}
