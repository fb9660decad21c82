//! Seeded instance and representation generators, plus the small fixed
//! fixtures used by the test and benchmark suites.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::constructions::{build_fr_example, build_trivial_rep};
use crate::model::{
    compute_gaps, validate_instance, BanditInstance, Representation, RepresentationSet,
};

/// Random instance with rewards in [0, 1] and per-context winning margin at
/// least `min_gap`.
pub fn random_instance(
    rng: &mut ChaCha8Rng,
    num_contexts: usize,
    num_arms: usize,
    min_gap: f64,
) -> BanditInstance {
    let mut rewards = DMatrix::zeros(num_contexts, num_arms);
    for x in 0..num_contexts {
        loop {
            for a in 0..num_arms {
                rewards[(x, a)] = rng.gen_range(0.0..1.0);
            }
            let mut sorted: Vec<f64> = rewards.row(x).iter().cloned().collect();
            sorted.sort_by(|p, q| q.partial_cmp(p).unwrap());
            if num_arms == 1 || sorted[0] - sorted[1] >= min_gap {
                break;
            }
        }
    }
    // Random full-support context distribution.
    let mut rho: Vec<f64> = (0..num_contexts).map(|_| rng.gen_range(0.2..1.0)).collect();
    let total: f64 = rho.iter().sum();
    for r in &mut rho {
        *r /= total;
    }
    let instance = BanditInstance::new(rho, rewards);
    debug_assert!(validate_instance(&instance).ok());
    instance
}

/// Random representation of the given dimension (no structure imposed).
pub fn random_representation(
    rng: &mut ChaCha8Rng,
    num_contexts: usize,
    num_arms: usize,
    dim: usize,
    name: &str,
) -> Representation {
    let features = DMatrix::from_fn(num_contexts * num_arms, dim, |_, _| rng.gen_range(-1.0..1.0));
    Representation::new(name, features)
}

/// An instance realizable in a freshly sampled d-dimensional representation,
/// resampled until the instance is valid with margin `min_gap`.
pub fn random_realizable_pair(
    rng: &mut ChaCha8Rng,
    num_contexts: usize,
    num_arms: usize,
    dim: usize,
    min_gap: f64,
) -> (BanditInstance, Representation) {
    loop {
        let rep = random_representation(rng, num_contexts, num_arms, dim, "realizable");
        let theta = DVector::from_fn(dim, |_, _| rng.gen_range(-1.0..1.0));
        let rewards_vec = &rep.features * &theta;
        let rewards = DMatrix::from_fn(num_contexts, num_arms, |x, a| rewards_vec[x * num_arms + a]);
        let instance = BanditInstance::with_uniform_contexts(rewards);
        if !validate_instance(&instance).ok() {
            continue;
        }
        let gaps = compute_gaps(&instance).expect("validated instance");
        if gaps.min_positive_gap() >= min_gap && gaps.max_gap() <= 3.0 {
            return (instance, rep);
        }
    }
}

/// A representation realizable for the given instance by construction: its
/// first column is the reward vector, the rest are random.
pub fn realizable_companion(
    rng: &mut ChaCha8Rng,
    instance: &BanditInstance,
    extra_cols: usize,
    name: &str,
) -> Representation {
    let f = instance.reward_vector();
    let n = instance.num_pairs();
    let features = DMatrix::from_fn(n, 1 + extra_cols, |row, col| {
        if col == 0 {
            f[row]
        } else {
            rng.gen_range(-1.0..1.0)
        }
    });
    Representation::new(name, features)
}

/// Two contexts, two arms, a 2-dimensional realizable representation whose
/// optimal-arm features span the plane: the span condition holds and the
/// complexity of the singleton set vanishes.
pub fn hls_singleton() -> (BanditInstance, Representation) {
    let rewards = DMatrix::from_row_slice(2, 2, &[1.0, 0.8, 0.6, 1.0]);
    let instance = BanditInstance::new(vec![0.5, 0.5], rewards);
    // theta = (1, 1); optimal features are the canonical basis.
    let features = DMatrix::from_row_slice(
        4,
        2,
        &[
            1.0, 0.0, // (x0, a0) optimal
            0.4, 0.4, // (x0, a1)
            0.3, 0.3, // (x1, a0)
            0.0, 1.0, // (x1, a1) optimal
        ],
    );
    (instance, Representation::new("span2", features))
}

/// A realizable but non-span representation for the same instance: the extra
/// coordinate spikes on one sub-optimal pair, escaping the span of the
/// optimal-arm features.
pub fn non_hls_padding_rep(instance: &BanditInstance, _base: &Representation) -> Representation {
    let f = instance.reward_vector();
    let n = instance.num_pairs();
    let gaps = compute_gaps(instance).expect("valid instance");
    let (x, a) = gaps.suboptimal_pairs()[0];
    let spike_row = instance.pair_index(x, a);
    let features = DMatrix::from_fn(n, 2, |row, col| match col {
        0 => f[row],
        _ => {
            if row == spike_row {
                1.0
            } else {
                0.0
            }
        }
    });
    Representation::new("offspan", features)
}

/// Single-context three-arm instance with one realizable representation (the
/// trivial one) and two misspecified representations that cannot predict the
/// optimal arm's reward at all, so both are detectable under the optimal
/// policy with a large margin.
pub fn detectability_instance() -> (BanditInstance, RepresentationSet) {
    let instance = BanditInstance::new(vec![1.0], DMatrix::from_row_slice(1, 3, &[2.0, 0.7, 0.4]));
    let mut star = build_trivial_rep(1, 3);
    star.name = "phi_star".to_string();
    let bad1 = Representation::new(
        "flat",
        DMatrix::from_row_slice(3, 1, &[0.0, 1.0, 1.0]),
    );
    let bad2 = Representation::new(
        "blind",
        DMatrix::from_row_slice(3, 2, &[0.0, 0.0, 1.0, 0.0, 0.0, 1.0]),
    );
    (instance, RepresentationSet::new(vec![star, bad1, bad2]))
}

/// Parts of the fully-realizable paired example for direct use in tests.
pub fn fr_example_parts(eps: f64) -> (BanditInstance, Representation, Representation) {
    let built = build_fr_example(eps).expect("valid eps");
    let phi1 = built.reps.by_name("phi1").unwrap().clone();
    let phi2 = built.reps.by_name("phi2").unwrap().clone();
    (built.instance, phi1, phi2)
}
