//! Per-algorithm state machines.
//!
//! `EliminateThenTrack` runs an optimistic linear policy on the currently
//! least-misspecified active representation while discarding representations
//! whose empirical residual exceeds the best one's by a confidence width;
//! once a single representation remains it switches to allocation tracking.
//! `CTracking` periodically re-solves the complexity program on plug-in
//! reward estimates and tracks the resulting allocation at a `log t` rate,
//! with forced exploration of under-sampled pairs.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{BanditInstance, GapTable, RepresentationSet};
use crate::solver::{solve_replearn_plugin, SolverOptions};

/// Which representations the tracking stage re-solves over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrackScope {
    All,
    Single(usize),
}

#[derive(Debug, Clone)]
pub struct CTrackingConfig {
    pub scope: TrackScope,
    /// Steps between re-solves of the plug-in complexity program.
    pub tracking_period: u64,
    /// Multiplier on the `sqrt(t) / (X A)` forced-exploration threshold.
    pub force_scale: f64,
    pub solver: SolverOptions,
}

impl Default for CTrackingConfig {
    fn default() -> Self {
        Self {
            scope: TrackScope::All,
            tracking_period: 2000,
            force_scale: 1.0,
            solver: SolverOptions::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EttConfig {
    /// Elimination width multiplier in `c1 * (d + ln(|Phi| t^2 / delta))`.
    pub c1: f64,
    pub delta: f64,
    /// Steps between elimination checks.
    pub check_period: u64,
    pub linucb_alpha: f64,
    pub ridge: f64,
    /// Forced-exploration multiplier during the elimination phase.
    pub force_scale: f64,
    /// Tracking stage configuration once one representation remains.
    pub tracking_period: u64,
    pub solver: SolverOptions,
}

impl Default for EttConfig {
    fn default() -> Self {
        Self {
            c1: 2.0,
            delta: 0.01,
            check_period: 10,
            linucb_alpha: 1.0,
            ridge: 1.0,
            force_scale: 1.0,
            tracking_period: 2000,
            solver: SolverOptions::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub enum AlgorithmConfig {
    /// Always plays the optimal arm (ground-truth baseline).
    Oracle,
    UniformRandom,
    TabularUcb,
    LinUcb {
        rep_index: usize,
        alpha: f64,
        ridge: f64,
    },
    EliminateThenTrack(EttConfig),
    CTracking(CTrackingConfig),
}

impl AlgorithmConfig {
    pub fn id(&self) -> String {
        match self {
            AlgorithmConfig::Oracle => "oracle".to_string(),
            AlgorithmConfig::UniformRandom => "uniform".to_string(),
            AlgorithmConfig::TabularUcb => "tabular-ucb".to_string(),
            AlgorithmConfig::LinUcb { .. } => "linucb".to_string(),
            AlgorithmConfig::EliminateThenTrack(_) => "eliminate-then-track".to_string(),
            AlgorithmConfig::CTracking(_) => "c-tracking".to_string(),
        }
    }
}

/// Per-pair counts and running means.
#[derive(Debug, Clone)]
struct Counts {
    arms: usize,
    n: Vec<u64>,
    mean: Vec<f64>,
}

impl Counts {
    fn new(num_contexts: usize, num_arms: usize) -> Self {
        Self {
            arms: num_arms,
            n: vec![0; num_contexts * num_arms],
            mean: vec![0.0; num_contexts * num_arms],
        }
    }

    #[inline]
    fn idx(&self, x: usize, a: usize) -> usize {
        x * self.arms + a
    }

    fn update(&mut self, x: usize, a: usize, reward: f64) {
        let i = self.idx(x, a);
        self.n[i] += 1;
        self.mean[i] += (reward - self.mean[i]) / self.n[i] as f64;
    }
}

pub(super) struct TabularUcb {
    counts: Counts,
}

impl TabularUcb {
    fn select(&self, x: usize, t: u64) -> usize {
        let arms = self.counts.arms;
        // Unplayed pairs first (infinite index).
        for a in 0..arms {
            if self.counts.n[self.counts.idx(x, a)] == 0 {
                return a;
            }
        }
        let log_t = (t as f64).ln();
        let mut best = 0;
        let mut best_score = f64::NEG_INFINITY;
        for a in 0..arms {
            let i = self.counts.idx(x, a);
            let score = self.counts.mean[i] + (2.0 * log_t / self.counts.n[i] as f64).sqrt();
            if score > best_score {
                best_score = score;
                best = a;
            }
        }
        best
    }
}

/// Ridge-regression optimistic policy on one representation.
pub(super) struct LinUcb {
    features: DMatrix<f64>,
    dim: usize,
    arms: usize,
    alpha: f64,
    a_inv: DMatrix<f64>,
    b: DVector<f64>,
}

impl LinUcb {
    fn new(features: DMatrix<f64>, arms: usize, alpha: f64, ridge: f64) -> Self {
        let dim = features.ncols();
        Self {
            features,
            dim,
            arms,
            alpha,
            a_inv: DMatrix::identity(dim, dim) / ridge,
            b: DVector::zeros(dim),
        }
    }

    fn select(&self, x: usize) -> usize {
        let theta = &self.a_inv * &self.b;
        let mut best = 0;
        let mut best_score = f64::NEG_INFINITY;
        for a in 0..self.arms {
            let phi = self.features.row(x * self.arms + a).transpose();
            let width = phi.dot(&(&self.a_inv * &phi)).max(0.0).sqrt();
            let score = phi.dot(&theta) + self.alpha * width;
            if score > best_score {
                best_score = score;
                best = a;
            }
        }
        best
    }

    fn update(&mut self, x: usize, a: usize, reward: f64) {
        let phi = self.features.row(x * self.arms + a).transpose();
        let av = &self.a_inv * &phi;
        let denom = 1.0 + phi.dot(&av);
        self.a_inv -= &av * av.transpose() / denom;
        self.b += phi * reward;
        debug_assert_eq!(self.b.len(), self.dim);
    }
}

/// Unregularized least-squares statistics of one representation, for the
/// misspecification residual `sum r^2 - b^T V^+ b`.
struct RepStat {
    name: String,
    dim: usize,
    v: DMatrix<f64>,
    b: DVector<f64>,
    lin: LinUcb,
}

pub(super) struct Ett {
    cfg: EttConfig,
    num_contexts: usize,
    num_arms: usize,
    rho: DVector<f64>,
    all_reps: RepresentationSet,
    stats: Vec<RepStat>,
    active: Vec<bool>,
    residuals: Vec<f64>,
    sum_r_sq: f64,
    counts: Counts,
    eliminations: Vec<(String, u64)>,
    single_active_time: Option<u64>,
    phase2: Option<CTrack>,
    fallback: Option<TabularUcb>,
}

impl Ett {
    fn new(cfg: EttConfig, instance: &BanditInstance, reps: &RepresentationSet) -> Result<Self> {
        if reps.is_empty() {
            return Err(Error::InvalidParameter(
                "elimination needs at least one representation".to_string(),
            ));
        }
        let stats = reps
            .reps
            .iter()
            .map(|rep| RepStat {
                name: rep.name.clone(),
                dim: rep.dim,
                v: DMatrix::zeros(rep.dim, rep.dim),
                b: DVector::zeros(rep.dim),
                lin: LinUcb::new(
                    rep.features.clone(),
                    instance.num_arms,
                    cfg.linucb_alpha,
                    cfg.ridge,
                ),
            })
            .collect();
        let n_reps = reps.len();
        let mut ett = Self {
            cfg,
            num_contexts: instance.num_contexts,
            num_arms: instance.num_arms,
            rho: instance.rho.clone(),
            all_reps: reps.clone(),
            stats,
            active: vec![true; n_reps],
            residuals: vec![0.0; n_reps],
            sum_r_sq: 0.0,
            counts: Counts::new(instance.num_contexts, instance.num_arms),
            eliminations: Vec::new(),
            single_active_time: None,
            phase2: None,
            fallback: None,
        };
        if n_reps == 1 {
            ett.enter_phase2(0, 0);
        }
        Ok(ett)
    }

    fn beta(&self, dim: usize, t: u64) -> f64 {
        let n_reps = self.all_reps.len() as f64;
        self.cfg.c1 * (dim as f64 + (n_reps * (t as f64).powi(2) / self.cfg.delta).ln())
    }

    fn forced_arm(&self, x: usize, t: u64) -> Option<usize> {
        let threshold =
            self.cfg.force_scale * (t as f64).sqrt() / (self.num_contexts * self.num_arms) as f64;
        let mut pick: Option<(u64, usize)> = None;
        for a in 0..self.num_arms {
            let n = self.counts.n[self.counts.idx(x, a)];
            if (n as f64) < threshold {
                let candidate = (n, a);
                if pick.map(|p| candidate < p).unwrap_or(true) {
                    pick = Some(candidate);
                }
            }
        }
        pick.map(|(_, a)| a)
    }

    fn least_misspecified(&self) -> usize {
        let mut best = 0;
        let mut best_res = f64::INFINITY;
        for (i, &alive) in self.active.iter().enumerate() {
            if alive && self.residuals[i] < best_res {
                best_res = self.residuals[i];
                best = i;
            }
        }
        best
    }

    fn enter_phase2(&mut self, rep_idx: usize, t: u64) {
        let cfg = CTrackingConfig {
            scope: TrackScope::Single(rep_idx),
            tracking_period: self.cfg.tracking_period,
            force_scale: self.cfg.force_scale,
            solver: self.cfg.solver,
        };
        let mut track = CTrack::from_scope(
            self.num_contexts,
            self.num_arms,
            self.rho.clone(),
            &self.all_reps,
            cfg,
        );
        track.counts = self.counts.clone();
        track.refresh_policy_all();
        self.single_active_time = Some(t);
        self.phase2 = Some(track);
    }

    fn select(&mut self, x: usize, t: u64) -> usize {
        if let Some(track) = &mut self.phase2 {
            return track.select(x, t);
        }
        if let Some(tab) = &self.fallback {
            return tab.select(x, t);
        }
        if let Some(a) = self.forced_arm(x, t) {
            return a;
        }
        let rep = self.least_misspecified();
        self.stats[rep].lin.select(x)
    }

    fn update(&mut self, x: usize, a: usize, reward: f64, t: u64) {
        if let Some(track) = &mut self.phase2 {
            track.update(x, a, reward, t);
            return;
        }
        if let Some(tab) = &mut self.fallback {
            tab.counts.update(x, a, reward);
            return;
        }
        self.counts.update(x, a, reward);
        self.sum_r_sq += reward * reward;
        for stat in &mut self.stats {
            let phi = stat.lin.features.row(x * self.num_arms + a).transpose();
            stat.v += &phi * phi.transpose();
            stat.b += &phi * reward;
            stat.lin.update(x, a, reward);
        }
        if t % self.cfg.check_period != 0 {
            return;
        }
        for (i, stat) in self.stats.iter().enumerate() {
            if self.active[i] {
                let v_pinv = linalg::pinv(&stat.v, 1e-9).expect("finite statistics");
                self.residuals[i] = (self.sum_r_sq - stat.b.dot(&(&v_pinv * &stat.b))).max(0.0);
            }
        }
        let min_res = self
            .active
            .iter()
            .zip(&self.residuals)
            .filter(|(&alive, _)| alive)
            .map(|(_, &r)| r)
            .fold(f64::INFINITY, f64::min);
        for i in 0..self.stats.len() {
            if self.active[i] && self.residuals[i] - min_res > self.beta(self.stats[i].dim, t) {
                self.active[i] = false;
                self.eliminations.push((self.stats[i].name.clone(), t));
            }
        }
        let alive: Vec<usize> = (0..self.active.len()).filter(|&i| self.active[i]).collect();
        match alive.len() {
            0 => {
                // Numerical pathology: drop to the tabular baseline.
                self.fallback = Some(TabularUcb {
                    counts: self.counts.clone(),
                });
            }
            1 => self.enter_phase2(alive[0], t),
            _ => {}
        }
    }
}

pub(super) struct CTrack {
    cfg: CTrackingConfig,
    num_contexts: usize,
    num_arms: usize,
    rho: DVector<f64>,
    reps: RepresentationSet,
    counts: Counts,
    eta_hat: DMatrix<f64>,
    pi_hat: Vec<usize>,
    /// Whether the plug-in program has been solved at least once. Until then
    /// selection is optimistic (tabular index): a greedy plug-in policy could
    /// lock onto a wrong leader for a long stretch, since forced exploration
    /// alone overturns small gaps slowly.
    solved_once: bool,
}

const ETA_HAT_CAP: f64 = 1e6;

impl CTrack {
    fn from_scope(
        num_contexts: usize,
        num_arms: usize,
        rho: DVector<f64>,
        reps: &RepresentationSet,
        cfg: CTrackingConfig,
    ) -> Self {
        let scoped = match cfg.scope {
            TrackScope::All => reps.clone(),
            TrackScope::Single(i) => RepresentationSet::singleton(reps.reps[i].clone()),
        };
        Self {
            cfg,
            num_contexts,
            num_arms,
            rho,
            reps: scoped,
            counts: Counts::new(num_contexts, num_arms),
            eta_hat: DMatrix::zeros(num_contexts, num_arms),
            pi_hat: vec![0; num_contexts],
            solved_once: false,
        }
    }

    fn new(instance: &BanditInstance, reps: &RepresentationSet, cfg: CTrackingConfig) -> Result<Self> {
        if let TrackScope::Single(i) = cfg.scope {
            if i >= reps.len() {
                return Err(Error::InvalidParameter(format!(
                    "tracking representation index {i} out of range"
                )));
            }
        }
        if reps.is_empty() {
            return Err(Error::InvalidParameter(
                "tracking needs at least one representation".to_string(),
            ));
        }
        Ok(Self::from_scope(
            instance.num_contexts,
            instance.num_arms,
            instance.rho.clone(),
            reps,
            cfg,
        ))
    }

    fn refresh_policy(&mut self, x: usize) {
        let mut best = 0;
        let mut best_mean = f64::NEG_INFINITY;
        for a in 0..self.num_arms {
            let m = self.counts.mean[self.counts.idx(x, a)];
            if m > best_mean {
                best_mean = m;
                best = a;
            }
        }
        self.pi_hat[x] = best;
    }

    fn refresh_policy_all(&mut self) {
        for x in 0..self.num_contexts {
            self.refresh_policy(x);
        }
    }

    fn resolve_allocation(&mut self, t: u64) {
        // Optimistic plug-in rewards: each sub-optimal estimate is lifted by
        // its confidence width (clamped strictly below the leader). A noisy
        // high gap estimate would otherwise freeze the arm's allocation low,
        // and the tracker would stop collecting the samples that could
        // correct it.
        let log_t = (t.max(2) as f64).ln();
        let rewards = DMatrix::from_fn(self.num_contexts, self.num_arms, |x, a| {
            let i = self.counts.idx(x, a);
            let mean = self.counts.mean[i];
            if a == self.pi_hat[x] {
                return mean;
            }
            let width = (2.0 * log_t / self.counts.n[i].max(1) as f64).sqrt();
            let leader = self.counts.mean[self.counts.idx(x, self.pi_hat[x])];
            (mean + width).min(leader - 1e-3)
        });
        let plugin = BanditInstance::new(self.rho.iter().cloned().collect(), rewards);
        match solve_replearn_plugin(&plugin, &self.reps, &self.cfg.solver) {
            Ok(solution) => {
                self.eta_hat = solution.allocation.eta.map(|v| v.min(ETA_HAT_CAP));
                self.solved_once = true;
            }
            Err(_) => {
                // Ties or degenerate estimates: keep the previous allocation.
            }
        }
    }

    fn select(&self, x: usize, t: u64) -> usize {
        if !self.solved_once {
            // Optimistic index until the first allocation is available.
            for a in 0..self.num_arms {
                if self.counts.n[self.counts.idx(x, a)] == 0 {
                    return a;
                }
            }
            let log_t = (t as f64).ln();
            let mut best = 0;
            let mut best_score = f64::NEG_INFINITY;
            for a in 0..self.num_arms {
                let i = self.counts.idx(x, a);
                let score =
                    self.counts.mean[i] + (2.0 * log_t / self.counts.n[i] as f64).sqrt();
                if score > best_score {
                    best_score = score;
                    best = a;
                }
            }
            return best;
        }
        let threshold =
            self.cfg.force_scale * (t as f64).sqrt() / (self.num_contexts * self.num_arms) as f64;
        let mut forced: Option<(u64, usize)> = None;
        for a in 0..self.num_arms {
            if a == self.pi_hat[x] {
                continue;
            }
            let n = self.counts.n[self.counts.idx(x, a)];
            if (n as f64) < threshold {
                let candidate = (n, a);
                if forced.map(|p| candidate < p).unwrap_or(true) {
                    forced = Some(candidate);
                }
            }
        }
        if let Some((_, a)) = forced {
            return a;
        }
        // Track the plug-in allocation at a log t rate.
        let log_t = (t.max(2) as f64).ln();
        let mut best: Option<(f64, usize)> = None;
        for a in 0..self.num_arms {
            if a == self.pi_hat[x] {
                continue;
            }
            let deficit = self.eta_hat[(x, a)] * log_t - self.counts.n[self.counts.idx(x, a)] as f64;
            if deficit > 0.0 && best.map(|(d, _)| deficit > d).unwrap_or(true) {
                best = Some((deficit, a));
            }
        }
        best.map(|(_, a)| a).unwrap_or(self.pi_hat[x])
    }

    fn update(&mut self, x: usize, a: usize, reward: f64, t: u64) {
        self.counts.update(x, a, reward);
        self.refresh_policy(x);
        if t % self.cfg.tracking_period == 0 {
            self.resolve_allocation(t);
        }
    }
}

pub(super) enum AlgorithmState {
    Oracle { optimal: Vec<usize> },
    Uniform { arms: usize },
    Tabular(TabularUcb),
    Lin(LinUcb),
    Ett(Box<Ett>),
    Track(Box<CTrack>),
}

impl AlgorithmState {
    pub(super) fn new(
        config: &AlgorithmConfig,
        instance: &BanditInstance,
        reps: &RepresentationSet,
        gaps: &GapTable,
    ) -> Result<Self> {
        Ok(match config {
            AlgorithmConfig::Oracle => AlgorithmState::Oracle {
                optimal: gaps.optimal_arm.clone(),
            },
            AlgorithmConfig::UniformRandom => AlgorithmState::Uniform {
                arms: instance.num_arms,
            },
            AlgorithmConfig::TabularUcb => AlgorithmState::Tabular(TabularUcb {
                counts: Counts::new(instance.num_contexts, instance.num_arms),
            }),
            AlgorithmConfig::LinUcb {
                rep_index,
                alpha,
                ridge,
            } => {
                let rep = reps.reps.get(*rep_index).ok_or_else(|| {
                    Error::InvalidParameter(format!(
                        "representation index {rep_index} out of range"
                    ))
                })?;
                if !(*alpha > 0.0 && *ridge > 0.0) {
                    return Err(Error::InvalidParameter(
                        "linucb parameters must be positive".to_string(),
                    ));
                }
                AlgorithmState::Lin(LinUcb::new(
                    rep.features.clone(),
                    instance.num_arms,
                    *alpha,
                    *ridge,
                ))
            }
            AlgorithmConfig::EliminateThenTrack(cfg) => {
                if !(cfg.c1 > 0.0 && cfg.delta > 0.0 && cfg.check_period > 0) {
                    return Err(Error::InvalidParameter(
                        "elimination parameters must be positive".to_string(),
                    ));
                }
                AlgorithmState::Ett(Box::new(Ett::new(cfg.clone(), instance, reps)?))
            }
            AlgorithmConfig::CTracking(cfg) => {
                if cfg.tracking_period == 0 {
                    return Err(Error::InvalidParameter(
                        "tracking period must be positive".to_string(),
                    ));
                }
                AlgorithmState::Track(Box::new(CTrack::new(instance, reps, cfg.clone())?))
            }
        })
    }

    pub(super) fn select(&mut self, x: usize, t: u64, rng: &mut ChaCha8Rng) -> usize {
        match self {
            AlgorithmState::Oracle { optimal } => optimal[x],
            AlgorithmState::Uniform { arms } => rng.gen_range(0..*arms),
            AlgorithmState::Tabular(state) => state.select(x, t),
            AlgorithmState::Lin(state) => state.select(x),
            AlgorithmState::Ett(state) => state.select(x, t),
            AlgorithmState::Track(state) => state.select(x, t),
        }
    }

    pub(super) fn update(&mut self, x: usize, a: usize, reward: f64, t: u64) {
        match self {
            AlgorithmState::Oracle { .. } | AlgorithmState::Uniform { .. } => {}
            AlgorithmState::Tabular(state) => state.counts.update(x, a, reward),
            AlgorithmState::Lin(state) => state.update(x, a, reward),
            AlgorithmState::Ett(state) => state.update(x, a, reward, t),
            AlgorithmState::Track(state) => state.update(x, a, reward, t),
        }
    }

    pub(super) fn eliminations(&self) -> Vec<(String, u64)> {
        match self {
            AlgorithmState::Ett(state) => state.eliminations.clone(),
            _ => Vec::new(),
        }
    }

    pub(super) fn single_active_time(&self) -> Option<u64> {
        match self {
            AlgorithmState::Ett(state) => state.single_active_time,
            _ => None,
        }
    }

    pub(super) fn fell_back(&self) -> bool {
        match self {
            AlgorithmState::Ett(state) => state.fallback.is_some(),
            _ => false,
        }
    }
}
