//! Allocation optimization for every complexity measure: a cutting-plane
//! (Kelley) solver over the allocation space, plus a brute-force oracle for
//! tiny instances.
//!
//! The feasible set `{eta : I_eta(rep, x, a) >= 1}` is an intersection of
//! half-spaces in `eta`, one per parameter in each alternative half-space.
//! Every oracle minimizer therefore yields a valid linear cut
//! `sum_j eta_j * (f_j - phi_j . theta_hat)^2 / 2 >= 1`, tight at the queried
//! allocation. The master problem is a small linear program re-solved from
//! scratch each round; optimal-arm variables carry zero cost and a finite cap
//! standing in for the unbounded mass the programs allow on optimal arms.

pub mod oracle;
pub mod simplex;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::checks::{self, CheckOptions};
use crate::error::{Error, Result};
use crate::halfspace::{CaseTag, HalfspaceOptions, PreparedRep};
use crate::linalg::DEFAULT_RANK_TOL;
use crate::model::{
    compute_gaps, optimal_policy_allocation, validate_instance, Allocation, BanditInstance,
    GapTable, Representation, RepresentationSet,
};
use crate::par;
use simplex::{solve_ge_lp, LpStatus};

/// Tunables for the cutting-plane solver.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SolverOptions {
    /// Constraint slack accepted at termination: every constraint must reach
    /// `1 - eps_feas`. Scaling the returned allocation by `1/(1 - eps_feas)`
    /// is exactly feasible, so the value is certified to the same relative
    /// accuracy.
    pub eps_feas: f64,
    /// Relative objective-change threshold for declaring stability.
    pub eps_obj: f64,
    pub max_iters: usize,
    /// Finite cap on optimal-arm mass (the programs allow it to be
    /// arbitrarily large at zero cost).
    pub optimal_cap: f64,
    pub rank_tol: f64,
    pub delta_margin: f64,
    /// Assignment-enumeration budget for the fully-realizable program.
    pub fr_enumeration_budget: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            eps_feas: 1e-4,
            eps_obj: 1e-6,
            max_iters: 2000,
            optimal_cap: 1e8,
            rank_tol: DEFAULT_RANK_TOL,
            delta_margin: 1e-6,
            fr_enumeration_budget: 4096,
        }
    }
}

impl SolverOptions {
    fn halfspace(&self) -> HalfspaceOptions {
        HalfspaceOptions {
            rank_tol: self.rank_tol,
            delta_margin: self.delta_margin,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SolveStatus {
    Optimal,
    ToleranceReached,
    IterationCap,
}

/// Constraint value at the reported allocation for one (rep, context, arm).
#[derive(Debug, Clone, Serialize)]
pub struct ConstraintSlack {
    pub rep: String,
    pub context: usize,
    pub arm: usize,
    pub value: f64,
    pub case_tag: Option<CaseTag>,
    /// True when the pair's feature gap is zero under this representation:
    /// no alternative parameter can flip the pair, so the triple imposes no
    /// constraint.
    pub vacuous: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComplexitySolution {
    pub value: f64,
    #[serde(skip)]
    pub allocation: Allocation,
    pub constraint_slacks: Vec<ConstraintSlack>,
    pub status: SolveStatus,
    pub iterations: usize,
    pub m_used: f64,
    /// Set when the value falls below `10 * eps_feas * max_gap`; candidates
    /// for the sub-logarithmic regime, cross-checked structurally.
    pub near_zero: bool,
    /// Outcome of the structural sub-logarithmic check when `near_zero`.
    pub sublog_check: Option<bool>,
    /// For single-representation solves: the closed constraint values
    /// `gap^2 / |z|^2_{V^+}` at the solution, per sub-optimal pair.
    pub clb_audit: Option<Vec<(usize, usize, f64)>>,
    /// For the fully-realizable program: the certifying representation chosen
    /// for each sub-optimal pair.
    pub fr_assignment: Option<Vec<(usize, usize, String)>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Triple {
    rep_idx: usize,
    x: usize,
    a: usize,
}

struct Cut {
    coeffs: Vec<f64>,
    rhs: f64,
    slack_streak: u32,
}

const CUT_POOL_CAP: usize = 600;
const MAX_CUTS_PER_ROUND: usize = 3;
const TIE_MARGIN: f64 = 1e-12;

struct KelleyOutcome {
    value: f64,
    eta: DMatrix<f64>,
    iterations: usize,
    status: SolveStatus,
}

fn allocation_from_vec(instance: &BanditInstance, eta: &[f64], cap: f64) -> Allocation {
    let a = instance.num_arms;
    Allocation::new(
        DMatrix::from_fn(instance.num_contexts, a, |x, j| eta[x * a + j].max(0.0)),
        cap,
    )
}

fn cut_from_minimizer(
    rep: &Representation,
    rewards: &DVector<f64>,
    theta_hat: &DVector<f64>,
) -> Option<Cut> {
    let predictions = &rep.features * theta_hat;
    let n = rewards.len();
    let mut coeffs = vec![0.0; n];
    let mut max_coeff = 0.0_f64;
    for j in 0..n {
        let r = rewards[j] - predictions[j];
        coeffs[j] = 0.5 * r * r;
        max_coeff = max_coeff.max(coeffs[j]);
    }
    if max_coeff <= 1e-300 {
        return None;
    }
    for c in &mut coeffs {
        *c /= max_coeff;
    }
    Some(Cut {
        coeffs,
        rhs: 1.0 / max_coeff,
        slack_streak: 0,
    })
}

fn is_duplicate_cut(pool: &[Cut], candidate: &Cut) -> bool {
    pool.iter().any(|cut| {
        (cut.rhs - candidate.rhs).abs() <= 1e-12 * (1.0 + candidate.rhs.abs())
            && cut
                .coeffs
                .iter()
                .zip(&candidate.coeffs)
                .all(|(a, b)| (a - b).abs() <= 1e-12)
    })
}

/// Evaluates every triple at the given allocation. Returns the per-triple
/// constraint values and minimizers in triple order.
fn scan_triples(
    reps: &[Representation],
    rewards: &DVector<f64>,
    gaps: &GapTable,
    alloc: &Allocation,
    triples: &[Triple],
    opts: &SolverOptions,
) -> Vec<(f64, DVector<f64>, CaseTag)> {
    let by_rep: Vec<Vec<(usize, f64, DVector<f64>, CaseTag)>> =
        par::map_range(reps.len(), |rep_idx| {
            let prepared = PreparedRep::new(&reps[rep_idx], alloc, rewards, opts.halfspace());
            triples
                .iter()
                .enumerate()
                .filter(|(_, t)| t.rep_idx == rep_idx)
                .map(|(pos, t)| {
                    let res = prepared
                        .constraint_value(gaps, t.x, t.a)
                        .expect("suboptimal triple");
                    (pos, res.value, res.minimizer, res.case_tag)
                })
                .collect()
        });
    let mut out: Vec<Option<(f64, DVector<f64>, CaseTag)>> = vec![None; triples.len()];
    for rep_results in by_rep {
        for (pos, value, minimizer, tag) in rep_results {
            out[pos] = Some((value, minimizer, tag));
        }
    }
    out.into_iter().map(|o| o.expect("scanned")).collect()
}

/// Cutting-plane loop over the given constraint triples.
fn cutting_plane(
    instance: &BanditInstance,
    reps: &[Representation],
    gaps: &GapTable,
    triples: &[Triple],
    opts: &SolverOptions,
) -> Result<KelleyOutcome> {
    let n = instance.num_pairs();
    let rewards = instance.reward_vector();
    let mut costs = vec![0.0; n];
    for (x, a) in gaps.suboptimal_pairs() {
        costs[instance.pair_index(x, a)] = gaps.gap(x, a);
    }
    // Cap rows for optimal-arm variables: -eta_j >= -M.
    let mut bound_rows = Vec::new();
    let mut bound_rhs = Vec::new();
    for (x, &opt) in gaps.optimal_arm.iter().enumerate() {
        let mut row = vec![0.0; n];
        row[instance.pair_index(x, opt)] = -1.0;
        bound_rows.push(row);
        bound_rhs.push(-opts.optimal_cap);
    }
    if triples.is_empty() {
        return Ok(KelleyOutcome {
            value: 0.0,
            eta: DMatrix::zeros(instance.num_contexts, instance.num_arms),
            iterations: 0,
            status: SolveStatus::Optimal,
        });
    }
    let mut cuts: Vec<Cut> = Vec::new();
    // Seed the pool from the uniform allocation and the optimal-policy
    // allocation so the first master is not degenerate.
    for seed_alloc in [
        Allocation::constant(instance, 1.0, opts.optimal_cap),
        optimal_policy_allocation(instance)?,
    ] {
        for (pos, triple) in triples.iter().enumerate() {
            let _ = pos;
            let prepared = PreparedRep::new(
                &reps[triple.rep_idx],
                &seed_alloc,
                &rewards,
                opts.halfspace(),
            );
            let res = prepared.constraint_value(gaps, triple.x, triple.a)?;
            if let Some(cut) = cut_from_minimizer(&reps[triple.rep_idx], &rewards, &res.minimizer)
            {
                if !is_duplicate_cut(&cuts, &cut) {
                    cuts.push(cut);
                }
            }
        }
    }
    let mut prev_value = f64::NAN;
    let mut last_eta: Option<Vec<f64>> = None;
    for iteration in 1..=opts.max_iters {
        let mut rows = bound_rows.clone();
        let mut rhs = bound_rhs.clone();
        for cut in &cuts {
            rows.push(cut.coeffs.clone());
            rhs.push(cut.rhs);
        }
        let lp = solve_ge_lp(&costs, &rows, &rhs);
        match lp.status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => return Err(Error::MasterInfeasible),
            LpStatus::Unbounded | LpStatus::IterationLimit => {
                return Err(Error::InvalidParameter(
                    "master linear program did not solve".to_string(),
                ))
            }
        }
        let eta: Vec<f64> = lp.x.iter().map(|&v| v.max(0.0)).collect();
        let value: f64 = costs.iter().zip(&eta).map(|(c, e)| c * e).sum();
        // Track cut slack for pruning.
        for cut in &mut cuts {
            let lhs: f64 = cut.coeffs.iter().zip(&eta).map(|(c, e)| c * e).sum();
            if lhs - cut.rhs > 0.5 * (1.0 + cut.rhs.abs()) {
                cut.slack_streak += 1;
            } else {
                cut.slack_streak = 0;
            }
        }
        let alloc = allocation_from_vec(instance, &eta, opts.optimal_cap);
        let scan = scan_triples(reps, &rewards, gaps, &alloc, triples, opts);
        // Most violated constraint, lexicographic tie-break (triples are in
        // lexicographic order already).
        let mut worst_pos = 0usize;
        for (pos, (v, _, _)) in scan.iter().enumerate() {
            if *v < scan[worst_pos].0 - TIE_MARGIN {
                worst_pos = pos;
            }
        }
        let worst_value = scan[worst_pos].0;
        let feasible = worst_value >= 1.0 - opts.eps_feas;
        let stable = !prev_value.is_nan()
            && (value - prev_value).abs() <= opts.eps_obj * value.abs().max(1.0);
        if feasible && (stable || worst_value >= 1.0) {
            return Ok(KelleyOutcome {
                value,
                eta: alloc.eta,
                iterations: iteration,
                status: SolveStatus::Optimal,
            });
        }
        // Add fresh cuts for the most violated constraints, most violated
        // first. A constraint can reproduce a cut already in the pool
        // (typically when its minimizer has stabilized); skipping it lets the
        // remaining violated constraints keep the round productive.
        let mut order: Vec<usize> = (0..scan.len()).filter(|&p| scan[p].0 < 1.0).collect();
        order.sort_by(|&i, &j| {
            scan[i]
                .0
                .partial_cmp(&scan[j].0)
                .unwrap()
                .then(i.cmp(&j))
        });
        let mut added = 0usize;
        for &pos in &order {
            if added >= MAX_CUTS_PER_ROUND {
                break;
            }
            let minimizer = &scan[pos].1;
            if let Some(cut) =
                cut_from_minimizer(&reps[triples[pos].rep_idx], &rewards, minimizer)
            {
                if !is_duplicate_cut(&cuts, &cut) {
                    cuts.push(cut);
                    added += 1;
                }
            }
        }
        if added == 0 {
            // Every violated constraint reproduces an existing cut: the
            // linearization cannot make further progress at this tolerance.
            return Ok(KelleyOutcome {
                value,
                eta: alloc.eta,
                iterations: iteration,
                status: if feasible {
                    SolveStatus::Optimal
                } else {
                    SolveStatus::ToleranceReached
                },
            });
        }
        if cuts.len() > CUT_POOL_CAP {
            let mut kept: Vec<Cut> = Vec::with_capacity(CUT_POOL_CAP);
            for cut in cuts.drain(..) {
                if cut.slack_streak < 3 {
                    kept.push(cut);
                }
            }
            if kept.len() > CUT_POOL_CAP {
                kept.drain(0..kept.len() - CUT_POOL_CAP / 2);
            }
            cuts = kept;
        }
        prev_value = value;
        last_eta = Some(eta);
    }
    let eta = last_eta.unwrap_or_else(|| vec![0.0; n]);
    let value = costs.iter().zip(&eta).map(|(c, e)| c * e).sum();
    Ok(KelleyOutcome {
        value,
        eta: allocation_from_vec(instance, &eta, opts.optimal_cap).eta,
        iterations: opts.max_iters,
        status: SolveStatus::IterationCap,
    })
}

/// All non-vacuous constraint triples in lexicographic order.
fn constraint_triples(
    instance: &BanditInstance,
    reps: &[Representation],
    gaps: &GapTable,
) -> Vec<Triple> {
    let mut triples = Vec::new();
    for (rep_idx, rep) in reps.iter().enumerate() {
        for (x, a) in gaps.suboptimal_pairs() {
            let opt = gaps.optimal_arm[x];
            let z = rep.feature(instance.num_arms, x, a) - rep.feature(instance.num_arms, x, opt);
            if z.norm() != 0.0 {
                triples.push(Triple { rep_idx, x, a });
            }
        }
    }
    triples
}

fn final_slacks(
    instance: &BanditInstance,
    reps: &[Representation],
    gaps: &GapTable,
    alloc: &Allocation,
    opts: &SolverOptions,
) -> Vec<ConstraintSlack> {
    let rewards = instance.reward_vector();
    let mut slacks = Vec::new();
    for rep in reps {
        let prepared = PreparedRep::new(rep, alloc, &rewards, opts.halfspace());
        for (x, a) in gaps.suboptimal_pairs() {
            let opt = gaps.optimal_arm[x];
            let z = rep.feature(instance.num_arms, x, a) - rep.feature(instance.num_arms, x, opt);
            if z.norm() == 0.0 {
                slacks.push(ConstraintSlack {
                    rep: rep.name.clone(),
                    context: x,
                    arm: a,
                    value: f64::INFINITY,
                    case_tag: Some(CaseTag::VacuousZZero),
                    vacuous: true,
                });
            } else {
                let res = prepared.constraint_value(gaps, x, a).expect("suboptimal");
                slacks.push(ConstraintSlack {
                    rep: rep.name.clone(),
                    context: x,
                    arm: a,
                    value: res.value,
                    case_tag: Some(res.case_tag),
                    vacuous: false,
                });
            }
        }
    }
    slacks
}

fn validate_for_solver(instance: &BanditInstance) -> Result<GapTable> {
    let report = validate_instance(instance);
    if !report.ok() {
        return Err(Error::InvalidInstance(report.violations.join("; ")));
    }
    compute_gaps(instance)
}

fn solve_family(
    instance: &BanditInstance,
    reps: &RepresentationSet,
    opts: &SolverOptions,
    check_realizability: bool,
) -> Result<ComplexitySolution> {
    let gaps = validate_for_solver(instance)?;
    if check_realizability {
        let rewards = instance.reward_vector();
        if !reps
            .reps
            .iter()
            .any(|rep| checks::realizable_for_rewards(rep, &rewards, 1e-9).0)
        {
            return Err(Error::Unrealizable);
        }
    }
    let triples = constraint_triples(instance, &reps.reps, &gaps);
    let outcome = cutting_plane(instance, &reps.reps, &gaps, &triples, opts)?;
    let allocation = Allocation::new(outcome.eta, opts.optimal_cap);
    let slacks = final_slacks(instance, &reps.reps, &gaps, &allocation, opts);
    let near_zero = outcome.value < 10.0 * opts.eps_feas * gaps.max_gap();
    let sublog_check = if near_zero && check_realizability {
        checks::check_sublog(instance, reps, CheckOptions::default())
            .ok()
            .map(|r| r.holds)
    } else {
        None
    };
    Ok(ComplexitySolution {
        value: outcome.value,
        allocation,
        constraint_slacks: slacks,
        status: outcome.status,
        iterations: outcome.iterations,
        m_used: opts.optimal_cap,
        near_zero,
        sublog_check,
        clb_audit: None,
        fr_assignment: None,
    })
}

/// Representation-learning complexity: minimize regret-weighted allocation
/// mass subject to every (representation, context, sub-optimal arm)
/// constraint reaching one.
pub fn solve_replearn(
    instance: &BanditInstance,
    reps: &RepresentationSet,
    opts: &SolverOptions,
) -> Result<ComplexitySolution> {
    solve_family(instance, reps, opts, true)
}

/// Same program without the realizability precondition; used with plug-in
/// reward estimates that are only approximately realizable.
pub fn solve_replearn_plugin(
    instance: &BanditInstance,
    reps: &RepresentationSet,
    opts: &SolverOptions,
) -> Result<ComplexitySolution> {
    solve_family(instance, reps, opts, false)
}

/// Single-representation complexity, with the closed constraint values at the
/// solution attached for auditing.
pub fn solve_clb(
    instance: &BanditInstance,
    rep: &Representation,
    opts: &SolverOptions,
) -> Result<ComplexitySolution> {
    let rewards = instance.reward_vector();
    if !checks::realizable_for_rewards(rep, &rewards, 1e-9).0 {
        return Err(Error::Unrealizable);
    }
    let set = RepresentationSet::singleton(rep.clone());
    let mut solution = solve_family(instance, &set, opts, false)?;
    let gaps = compute_gaps(instance)?;
    let prepared = PreparedRep::new(rep, &solution.allocation, &rewards, opts.halfspace());
    let audit = gaps
        .suboptimal_pairs()
        .into_iter()
        .map(|(x, a)| (x, a, 2.0 * prepared.fr_term(&gaps, x, a)))
        .collect();
    solution.clb_audit = Some(audit);
    Ok(solution)
}

/// Closed-form unstructured complexity: the sum of `2 / gap` over all
/// sub-optimal pairs. No numerical optimization.
pub fn solve_unstructured(instance: &BanditInstance) -> Result<f64> {
    let gaps = validate_for_solver(instance)?;
    Ok(gaps
        .suboptimal_pairs()
        .into_iter()
        .map(|(x, a)| 2.0 / gaps.gap(x, a))
        .sum())
}

/// Fully-realizable complexity. The per-pair constraint is a maximum over
/// representations, so the feasible region is a union of convex pieces, one
/// per assignment of a certifying representation to each pair. Assignments
/// are enumerated exhaustively within the budget; beyond it a greedy
/// assignment with single-pair improvement is used and the status flagged.
pub fn solve_fully_realizable(
    instance: &BanditInstance,
    reps: &RepresentationSet,
    opts: &SolverOptions,
) -> Result<ComplexitySolution> {
    let gaps = validate_for_solver(instance)?;
    let rewards = instance.reward_vector();
    for rep in &reps.reps {
        if !checks::realizable_for_rewards(rep, &rewards, 1e-9).0 {
            return Err(Error::NotFullyRealizable(rep.name.clone()));
        }
    }
    let pairs = gaps.suboptimal_pairs();
    let n_reps = reps.len();
    if n_reps == 0 {
        return Err(Error::Unrealizable);
    }
    let solve_assignment = |assignment: &[usize]| -> Result<KelleyOutcome> {
        let triples: Vec<Triple> = pairs
            .iter()
            .zip(assignment)
            .map(|(&(x, a), &rep_idx)| Triple { rep_idx, x, a })
            .collect();
        cutting_plane(instance, &reps.reps, &gaps, &triples, opts)
    };
    let total: Option<usize> = n_reps.checked_pow(pairs.len() as u32);
    let exhaustive = total.map(|t| t <= opts.fr_enumeration_budget).unwrap_or(false);
    let (assignment, outcome, flagged) = if exhaustive {
        let total = total.unwrap();
        let mut best: Option<(Vec<usize>, KelleyOutcome)> = None;
        for idx in 0..total {
            let mut assignment = Vec::with_capacity(pairs.len());
            let mut rem = idx;
            for _ in 0..pairs.len() {
                assignment.push(rem % n_reps);
                rem /= n_reps;
            }
            let outcome = solve_assignment(&assignment)?;
            let better = best
                .as_ref()
                .map(|(_, b)| outcome.value < b.value - 1e-12)
                .unwrap_or(true);
            if better {
                best = Some((assignment, outcome));
            }
        }
        let (assignment, outcome) = best.expect("at least one assignment");
        (assignment, outcome, false)
    } else {
        // Greedy: assign each pair the representation maximizing its
        // constraint under the uniform allocation, then improve pairs one at
        // a time.
        let uniform = Allocation::constant(instance, 1.0, opts.optimal_cap);
        let prepared: Vec<PreparedRep> = reps
            .reps
            .iter()
            .map(|rep| PreparedRep::new(rep, &uniform, &rewards, opts.halfspace()))
            .collect();
        let mut assignment: Vec<usize> = pairs
            .iter()
            .map(|&(x, a)| {
                let mut best_idx = 0;
                let mut best_val = f64::NEG_INFINITY;
                for (idx, p) in prepared.iter().enumerate() {
                    let v = p.fr_term(&gaps, x, a);
                    if v > best_val + TIE_MARGIN {
                        best_val = v;
                        best_idx = idx;
                    }
                }
                best_idx
            })
            .collect();
        let mut outcome = solve_assignment(&assignment)?;
        for _pass in 0..2 {
            let mut improved = false;
            for pair_pos in 0..pairs.len() {
                for rep_idx in 0..n_reps {
                    if rep_idx == assignment[pair_pos] {
                        continue;
                    }
                    let mut candidate = assignment.clone();
                    candidate[pair_pos] = rep_idx;
                    let candidate_outcome = solve_assignment(&candidate)?;
                    if candidate_outcome.value < outcome.value - 1e-9 * (1.0 + outcome.value) {
                        assignment = candidate;
                        outcome = candidate_outcome;
                        improved = true;
                    }
                }
            }
            if !improved {
                break;
            }
        }
        (assignment, outcome, true)
    };
    let allocation = Allocation::new(outcome.eta, opts.optimal_cap);
    // Report every (rep, pair) term at the solution.
    let mut slacks = Vec::new();
    for rep in &reps.reps {
        let prepared = PreparedRep::new(rep, &allocation, &rewards, opts.halfspace());
        for &(x, a) in &pairs {
            slacks.push(ConstraintSlack {
                rep: rep.name.clone(),
                context: x,
                arm: a,
                value: prepared.fr_term(&gaps, x, a),
                case_tag: None,
                vacuous: false,
            });
        }
    }
    let near_zero = outcome.value < 10.0 * opts.eps_feas * gaps.max_gap();
    let sublog_check = if near_zero {
        checks::check_sublog_fr(instance, reps, CheckOptions::default())
            .ok()
            .map(|r| r.holds)
    } else {
        None
    };
    let fr_assignment = pairs
        .iter()
        .zip(&assignment)
        .map(|(&(x, a), &idx)| (x, a, reps.reps[idx].name.clone()))
        .collect();
    Ok(ComplexitySolution {
        value: outcome.value,
        allocation,
        constraint_slacks: slacks,
        status: if flagged {
            SolveStatus::ToleranceReached
        } else {
            outcome.status
        },
        iterations: outcome.iterations,
        m_used: opts.optimal_cap,
        near_zero,
        sublog_check,
        clb_audit: None,
        fr_assignment: Some(fr_assignment),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintFamily {
    Replearn,
    Fr,
}

#[derive(Debug, Clone, Serialize)]
pub struct FeasibilityReport {
    pub entries: Vec<ConstraintSlack>,
    pub feasible: bool,
}

/// Lists every constraint value at the given allocation and decides
/// feasibility for the chosen family.
pub fn check_feasible(
    instance: &BanditInstance,
    reps: &RepresentationSet,
    alloc: &Allocation,
    family: ConstraintFamily,
    opts: &SolverOptions,
) -> Result<FeasibilityReport> {
    let gaps = validate_for_solver(instance)?;
    let rewards = instance.reward_vector();
    match family {
        ConstraintFamily::Replearn => {
            let entries = final_slacks(instance, &reps.reps, &gaps, alloc, opts);
            let feasible = entries
                .iter()
                .filter(|e| !e.vacuous)
                .all(|e| e.value >= 1.0 - opts.eps_feas);
            Ok(FeasibilityReport { entries, feasible })
        }
        ConstraintFamily::Fr => {
            for rep in &reps.reps {
                if !checks::realizable_for_rewards(rep, &rewards, 1e-9).0 {
                    return Err(Error::NotFullyRealizable(rep.name.clone()));
                }
            }
            let mut entries = Vec::new();
            let prepared: Vec<PreparedRep> = reps
                .reps
                .iter()
                .map(|rep| PreparedRep::new(rep, alloc, &rewards, opts.halfspace()))
                .collect();
            let mut feasible = true;
            for (x, a) in gaps.suboptimal_pairs() {
                let mut best = 0.0_f64;
                for (rep, p) in reps.reps.iter().zip(&prepared) {
                    let v = p.fr_term(&gaps, x, a);
                    best = best.max(v);
                    entries.push(ConstraintSlack {
                        rep: rep.name.clone(),
                        context: x,
                        arm: a,
                        value: v,
                        case_tag: None,
                        vacuous: false,
                    });
                }
                if best < 1.0 - opts.eps_feas {
                    feasible = false;
                }
            }
            Ok(FeasibilityReport { entries, feasible })
        }
    }
}
