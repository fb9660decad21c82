//! Dense linear-algebra kernel: SVD, Moore-Penrose pseudo-inverse, subspace
//! membership with tolerance, weighted design matrices, and weighted
//! least-squares best fits.
//!
//! Numerical rank is always decided relative to the largest singular value,
//! so classifications are invariant under positive rescaling of the input.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::{Allocation, Representation};

/// Default relative singular-value cutoff for rank decisions.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

/// A full singular value decomposition `A = U diag(sigma) V^T` with square
/// orthogonal factors and singular values sorted in non-increasing order.
#[derive(Debug, Clone)]
pub struct SvdFactors {
    pub u: DMatrix<f64>,
    pub sigma: DVector<f64>,
    pub v: DMatrix<f64>,
}

impl SvdFactors {
    /// Reconstructs the original matrix.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let n = self.u.nrows();
        let m = self.v.nrows();
        let mut s = DMatrix::zeros(n, m);
        for i in 0..self.sigma.len() {
            s[(i, i)] = self.sigma[i];
        }
        &self.u * s * self.v.transpose()
    }

    /// Number of singular values exceeding `rank_tol * sigma_max`.
    pub fn rank(&self, rank_tol: f64) -> usize {
        numerical_rank(&self.sigma, rank_tol)
    }
}

fn numerical_rank(sigma: &DVector<f64>, rank_tol: f64) -> usize {
    let sigma_max = sigma.iter().cloned().fold(0.0, f64::max);
    if sigma_max == 0.0 {
        return 0;
    }
    sigma.iter().filter(|&&s| s > rank_tol * sigma_max).count()
}

/// Extends a set of orthonormal columns to a full orthonormal basis by
/// Gram-Schmidt against the canonical basis (applied twice for stability).
fn complete_basis(cols: Vec<DVector<f64>>, n: usize) -> DMatrix<f64> {
    let mut basis = cols;
    let mut i = 0;
    while basis.len() < n {
        assert!(i < n, "failed to complete orthonormal basis");
        let mut w = DVector::zeros(n);
        w[i] = 1.0;
        for _ in 0..2 {
            for b in &basis {
                let proj = b.dot(&w);
                w -= b * proj;
            }
        }
        let norm = w.norm();
        if norm > 1e-8 {
            basis.push(w / norm);
        }
        i += 1;
    }
    DMatrix::from_columns(&basis)
}

/// One-sided Jacobi SVD of a matrix with `n >= m`: returns the rotated
/// column matrix `A V` (whose columns are `sigma_j u_j`), the accumulated
/// orthogonal `V`, and singular values sorted non-increasing.
fn jacobi_one_sided(matrix: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>, DVector<f64>) {
    let (_, m) = matrix.shape();
    let mut work = matrix.clone();
    let mut v = DMatrix::identity(m, m);
    let tol = 1e-15;
    for _sweep in 0..120 {
        let mut rotated = false;
        for p in 0..m.saturating_sub(1) {
            for q in p + 1..m {
                let col_p = work.column(p);
                let col_q = work.column(q);
                let alpha = col_p.dot(&col_p);
                let beta = col_q.dot(&col_q);
                let gamma = col_p.dot(&col_q);
                if gamma.abs() <= tol * (alpha * beta).sqrt() || alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..work.nrows() {
                    let wp = work[(i, p)];
                    let wq = work[(i, q)];
                    work[(i, p)] = c * wp - s * wq;
                    work[(i, q)] = s * wp + c * wq;
                }
                for i in 0..m {
                    let vp = v[(i, p)];
                    let vq = v[(i, q)];
                    v[(i, p)] = c * vp - s * vq;
                    v[(i, q)] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sigma = DVector::from_fn(m, |j, _| work.column(j).norm());
    // Sort non-increasing, permuting work and v columns alike.
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| sigma[b].partial_cmp(&sigma[a]).unwrap());
    let work = DMatrix::from_fn(work.nrows(), m, |i, j| work[(i, order[j])]);
    let v = DMatrix::from_fn(m, m, |i, j| v[(i, order[j])]);
    sigma = DVector::from_fn(m, |j, _| work.column(j).norm());
    (work, v, sigma)
}

/// Thin SVD factors (left columns only for nonzero singular values), computed
/// by one-sided Jacobi for numerical robustness on rank-deficient inputs.
fn svd_thin(matrix: &DMatrix<f64>) -> (Vec<DVector<f64>>, DVector<f64>, DMatrix<f64>) {
    let (n, m) = matrix.shape();
    if n >= m {
        let (work, v, sigma) = jacobi_one_sided(matrix);
        let u_cols = (0..m)
            .filter(|&j| sigma[j] > 0.0)
            .map(|j| work.column(j) / sigma[j])
            .collect();
        (u_cols, sigma, v)
    } else {
        // Factor the tall transpose A^T = W V_acc^T with W = U' S; then
        // A = V_acc S U'^T, so A's left factor is V_acc and its right
        // singular vectors are the normalized columns of W.
        let transposed = matrix.transpose();
        let (work, v_acc, sigma) = jacobi_one_sided(&transposed);
        let u_cols: Vec<DVector<f64>> = (0..n)
            .filter(|&j| sigma[j] > 0.0)
            .map(|j| v_acc.column(j).into())
            .collect();
        let right_cols: Vec<DVector<f64>> = (0..n)
            .filter(|&j| sigma[j] > 0.0)
            .map(|j| work.column(j) / sigma[j])
            .collect();
        let v_full = complete_basis(right_cols, m);
        (u_cols, sigma, v_full)
    }
}

/// Full SVD of a real matrix.
pub fn svd(matrix: &DMatrix<f64>) -> Result<SvdFactors> {
    if matrix.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("svd input".to_string()));
    }
    let (n, m) = matrix.shape();
    let (u_cols, sigma, v) = svd_thin(matrix);
    let u = complete_basis(u_cols, n);
    let v = if v.ncols() == m {
        v
    } else {
        complete_basis((0..v.ncols()).map(|j| v.column(j).into()).collect(), m)
    };
    Ok(SvdFactors { u, sigma, v })
}

/// Moore-Penrose pseudo-inverse with a relative rank cutoff: singular values
/// at or below `rank_tol * sigma_max` are zeroed rather than inverted.
pub fn pinv(matrix: &DMatrix<f64>, rank_tol: f64) -> Result<DMatrix<f64>> {
    if matrix.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("pinv input".to_string()));
    }
    if !(rank_tol > 0.0 && rank_tol < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "rank_tol must be in (0, 1), got {rank_tol}"
        )));
    }
    let (n, m) = matrix.shape();
    let (u_cols, sigma, v) = svd_thin(matrix);
    let sigma_max = sigma.iter().cloned().fold(0.0, f64::max);
    let mut result = DMatrix::zeros(m, n);
    if sigma_max == 0.0 {
        return Ok(result);
    }
    let mut u_iter = u_cols.iter();
    for i in 0..sigma.len() {
        if sigma[i] == 0.0 {
            continue;
        }
        let ui = u_iter.next().expect("one left column per nonzero sigma");
        if sigma[i] > rank_tol * sigma_max {
            let vi = v.column(i);
            for r in 0..m {
                for c in 0..n {
                    result[(r, c)] += vi[r] * ui[c] / sigma[i];
                }
            }
        }
    }
    Ok(result)
}

/// Whether `v` lies in the column space of the symmetric PSD matrix `m`,
/// decided as `|(I - M M^+) v| <= tol * |v|`. The zero vector is in every
/// image.
pub fn in_image(matrix: &DMatrix<f64>, vector: &DVector<f64>, tol: f64) -> bool {
    let norm = vector.norm();
    if norm == 0.0 {
        return true;
    }
    let mp = pinv(matrix, tol).expect("finite psd matrix");
    in_image_with_pinv(matrix, &mp, vector, tol)
}

/// Same as [`in_image`] but reusing a precomputed pseudo-inverse.
pub fn in_image_with_pinv(
    matrix: &DMatrix<f64>,
    matrix_pinv: &DMatrix<f64>,
    vector: &DVector<f64>,
    tol: f64,
) -> bool {
    let norm = vector.norm();
    if norm == 0.0 {
        return true;
    }
    let residual = vector - matrix * (matrix_pinv * vector);
    residual.norm() <= tol * norm
}

/// A design matrix `V_eta = F^T D_eta F` with its numerical rank.
#[derive(Debug, Clone)]
pub struct DesignMatrix {
    pub matrix: DMatrix<f64>,
    pub numerical_rank: usize,
    pub rank_tolerance: f64,
}

/// Weighted design matrix of a representation under an allocation:
/// the sum of `eta(x, a) * phi(x, a) phi(x, a)^T` over all pairs.
pub fn design_matrix(rep: &Representation, alloc: &Allocation, rank_tol: f64) -> DesignMatrix {
    let eta = alloc.eta_vector();
    assert_eq!(
        eta.len(),
        rep.features.nrows(),
        "allocation and representation shapes differ"
    );
    let mut weighted = rep.features.clone();
    for i in 0..weighted.nrows() {
        let w = eta[i];
        weighted.row_mut(i).scale_mut(w);
    }
    let mut v = rep.features.transpose() * weighted;
    // Exact symmetry; matmul rounding is the only asymmetry source.
    let vt = v.transpose();
    v = (v + vt).scale(0.5);
    let factors = svd(&v).expect("finite design matrix");
    let numerical_rank = factors.rank(rank_tol);
    DesignMatrix {
        matrix: v,
        numerical_rank,
        rank_tolerance: rank_tol,
    }
}

/// Square-root-weighted copies of the feature matrix and reward vector:
/// rows scaled by `sqrt(eta_i)`.
pub fn weighted_factor(
    rep: &Representation,
    alloc: &Allocation,
    rewards: &DVector<f64>,
) -> (DMatrix<f64>, DVector<f64>) {
    let eta = alloc.eta_vector();
    let mut b = rep.features.clone();
    let mut y = rewards.clone();
    for i in 0..eta.len() {
        let w = eta[i].sqrt();
        b.row_mut(i).scale_mut(w);
        y[i] *= w;
    }
    (b, y)
}

/// Minimum-norm weighted least-squares fit of the reward vector:
/// `theta = V_eta^+ F^T D_eta f`.
///
/// Evaluated through the weighted factor `D^{1/2} F` (identical by the
/// pseudo-inverse Gram identity), which keeps rank decisions meaningful when
/// allocation masses span many orders of magnitude.
pub fn best_fit(
    rep: &Representation,
    alloc: &Allocation,
    rewards: &DVector<f64>,
    rank_tol: f64,
) -> DVector<f64> {
    let (b, y) = weighted_factor(rep, alloc, rewards);
    let b_pinv = pinv(&b, rank_tol).expect("finite weighted factor");
    &b_pinv * y
}

/// Weighted squared residual of the reward vector at the best fit; zero for
/// any realizable representation under any allocation.
pub fn misspec_mse(
    rep: &Representation,
    alloc: &Allocation,
    rewards: &DVector<f64>,
    rank_tol: f64,
) -> f64 {
    let theta = best_fit(rep, alloc, rewards, rank_tol);
    weighted_residual(rep, alloc, rewards, &theta)
}

/// `|f - F theta|^2_{D_eta}` for an arbitrary parameter.
pub fn weighted_residual(
    rep: &Representation,
    alloc: &Allocation,
    rewards: &DVector<f64>,
    theta: &DVector<f64>,
) -> f64 {
    let eta = alloc.eta_vector();
    let predictions = &rep.features * theta;
    let mut total = 0.0;
    for i in 0..eta.len() {
        let r = rewards[i] - predictions[i];
        total += eta[i] * r * r;
    }
    total
}

/// `v^T M v` for a symmetric matrix (used with pseudo-inverses).
pub fn quad_form(matrix: &DMatrix<f64>, v: &DVector<f64>) -> f64 {
    v.dot(&(matrix * v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::BanditInstance;
    use nalgebra::{dmatrix, dvector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut ChaCha8Rng, n: usize, m: usize) -> DMatrix<f64> {
        DMatrix::from_fn(n, m, |_, _| rng.gen_range(-2.0..2.0))
    }

    fn random_rank_deficient(rng: &mut ChaCha8Rng, n: usize, m: usize, rank: usize) -> DMatrix<f64> {
        let left = random_matrix(rng, n, rank);
        let right = random_matrix(rng, rank, m);
        left * right
    }

    fn rel_err(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        let denom = b.norm().max(1.0);
        (a - b).norm() / denom
    }

    #[test]
    fn svd_of_identity() {
        let factors = svd(&DMatrix::identity(3, 3)).unwrap();
        for i in 0..3 {
            assert!((factors.sigma[i] - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn svd_of_zero_matrix() {
        let factors = svd(&DMatrix::zeros(2, 3)).unwrap();
        assert_eq!(factors.sigma.len(), 2);
        assert_eq!(factors.sigma, dvector![0.0, 0.0]);
        assert_eq!(factors.u.shape(), (2, 2));
        assert_eq!(factors.v.shape(), (3, 3));
    }

    #[test]
    fn svd_reconstructs_random_rectangular() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let a = random_matrix(&mut rng, 4, 2);
            let factors = svd(&a).unwrap();
            assert!(rel_err(&factors.reconstruct(), &a) <= 1e-12);
            // Orthogonality of the completed factors.
            assert!(rel_err(
                &(&factors.u * factors.u.transpose()),
                &DMatrix::identity(4, 4)
            ) < 1e-12);
            assert!(rel_err(
                &(&factors.v * factors.v.transpose()),
                &DMatrix::identity(2, 2)
            ) < 1e-12);
            // Sorted non-increasing.
            for i in 1..factors.sigma.len() {
                assert!(factors.sigma[i] <= factors.sigma[i - 1] + 1e-15);
            }
        }
    }

    #[test]
    fn svd_rejects_non_finite() {
        let a = dmatrix![1.0, f64::NAN; 0.0, 1.0];
        assert!(svd(&a).is_err());
    }

    #[test]
    fn pinv_of_identity_and_diagonal() {
        let id = DMatrix::<f64>::identity(3, 3);
        assert!(rel_err(&pinv(&id, 1e-9).unwrap(), &id) < 1e-14);
        let d = dmatrix![2.0, 0.0; 0.0, 0.0];
        let expected = dmatrix![0.5, 0.0; 0.0, 0.0];
        assert!(rel_err(&pinv(&d, 1e-9).unwrap(), &expected) < 1e-14);
    }

    #[test]
    fn pinv_satisfies_moore_penrose_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let a = random_rank_deficient(&mut rng, 5, 3, 2);
            let ap = pinv(&a, 1e-9).unwrap();
            let aap = &a * &ap;
            let apa = &ap * &a;
            assert!(rel_err(&(&aap * &a), &a) <= 1e-10);
            assert!(rel_err(&(&apa * &ap), &ap) <= 1e-10);
            assert!(rel_err(&aap.transpose(), &aap) <= 1e-10);
            assert!(rel_err(&apa.transpose(), &apa) <= 1e-10);
        }
    }

    #[test]
    fn pinv_gram_identity() {
        // (A^T A)^+ A^T = A^+ on random matrices.
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..20 {
            let a = random_matrix(&mut rng, 6, 3);
            let lhs = pinv(&(a.transpose() * &a), 1e-12).unwrap() * a.transpose();
            let rhs = pinv(&a, 1e-12).unwrap();
            assert!(rel_err(&lhs, &rhs) <= 1e-10);
        }
    }

    #[test]
    fn pinv_scale_consistency() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let a = random_rank_deficient(&mut rng, 4, 4, 2);
            let c: f64 = rng.gen_range(0.1..10.0);
            let scaled = pinv(&(a.clone() * c), 1e-9).unwrap();
            let expected = pinv(&a, 1e-9).unwrap() / c;
            assert!(rel_err(&scaled, &expected) <= 1e-10);
        }
    }

    #[test]
    fn in_image_cases() {
        let m = dmatrix![1.0, 0.0; 0.0, 0.0];
        assert!(in_image(&m, &dvector![0.0, 0.0], 1e-9));
        assert!(!in_image(&m, &dvector![0.0, 1.0], 1e-9));
        assert!(in_image(&m, &dvector![3.0, 0.0], 1e-9));
    }

    #[test]
    fn in_image_invariant_under_rescaling() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..20 {
            let a = random_rank_deficient(&mut rng, 3, 3, 2);
            let psd = &a * a.transpose();
            let v = DVector::from_fn(3, |_, _| rng.gen_range(-1.0..1.0));
            let c: f64 = rng.gen_range(0.01..100.0);
            assert_eq!(
                in_image(&psd, &v, 1e-9),
                in_image(&(psd.clone() * c), &v, 1e-9)
            );
        }
    }

    fn paired_rep_phi1(eps: f64) -> Representation {
        Representation::new(
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
        )
    }

    #[test]
    fn design_matrix_zero_allocation() {
        let inst = BanditInstance::new(vec![1.0], dmatrix![1.0, 0.9, 0.9, 0.0]);
        let rep = paired_rep_phi1(0.1);
        let alloc = Allocation::zeros(&inst, 1e8);
        let design = design_matrix(&rep, &alloc, 1e-9);
        assert_eq!(design.matrix, DMatrix::zeros(3, 3));
        assert_eq!(design.numerical_rank, 0);
    }

    #[test]
    fn design_matrix_diagonal_on_paired_example() {
        // eta = (M, 0, 0, 2) over the phi1 features with eps = 0 pattern on
        // arms 1 and 4 gives diag(M, 2, 0).
        let inst = BanditInstance::new(vec![1.0], dmatrix![1.0, 0.9, 0.9, 0.0]);
        let features = DMatrix::from_row_slice(
            4,
            3,
            &[1.0, 0.0, 0.0, 0.9, 0.1, 0.0, 0.0, 0.0, 0.9, 0.0, 1.0, 0.0],
        );
        let rep = Representation::new("phi1", features);
        let m = 1e6;
        let mut alloc = Allocation::zeros(&inst, m);
        alloc.eta[(0, 0)] = m;
        alloc.eta[(0, 3)] = 2.0;
        let design = design_matrix(&rep, &alloc, 1e-9);
        let expected = dmatrix![m, 0.0, 0.0; 0.0, 2.0, 0.0; 0.0, 0.0, 0.0];
        assert!((design.matrix.clone() - expected).norm() < 1e-9 * m);
        assert_eq!(design.numerical_rank, 2);
    }

    #[test]
    fn design_matrix_matches_naive_summation() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let inst = BanditInstance::with_uniform_contexts(dmatrix![1.0, 0.0; 0.2, 0.9]);
        let features = random_matrix(&mut rng, 4, 3);
        let rep = Representation::new("r", features.clone());
        let eta = DMatrix::from_fn(2, 2, |_, _| rng.gen_range(0.0..3.0));
        let alloc = Allocation::new(eta.clone(), 1e8);
        let design = design_matrix(&rep, &alloc, 1e-9);
        let mut naive = DMatrix::zeros(3, 3);
        for x in 0..2 {
            for a in 0..2 {
                let phi = rep.feature(inst.num_arms, x, a);
                naive += &phi * phi.transpose() * eta[(x, a)];
            }
        }
        assert!(rel_err(&design.matrix, &naive) < 1e-13);
    }

    #[test]
    fn best_fit_recovers_realizable_rewards() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let features = random_matrix(&mut rng, 6, 3);
        let rep = Representation::new("r", features.clone());
        let theta0 = dvector![0.4, -1.2, 0.7];
        let rewards = &features * &theta0;
        let inst = BanditInstance::with_uniform_contexts(DMatrix::from_fn(2, 3, |x, a| {
            rewards[x * 3 + a]
        }));
        let alloc = Allocation::constant(&inst, 1.0, 1e8);
        let theta = best_fit(&rep, &alloc, &rewards, 1e-9);
        let fitted = &features * &theta;
        assert!((fitted - &rewards).norm() < 1e-9);
    }

    #[test]
    fn best_fit_zero_allocation_is_zero() {
        let inst = BanditInstance::new(vec![1.0], dmatrix![1.0, 0.9, 0.9, 0.0]);
        let rep = paired_rep_phi1(0.1);
        let alloc = Allocation::zeros(&inst, 1e8);
        let theta = best_fit(&rep, &alloc, &inst.reward_vector(), 1e-9);
        assert_eq!(theta, DVector::zeros(3));
    }

    #[test]
    fn best_fit_matches_normal_equations_on_support() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..10 {
            let features = random_matrix(&mut rng, 6, 2);
            let rep = Representation::new("r", features.clone());
            let rewards = DVector::from_fn(6, |_, _| rng.gen_range(-1.0..1.0));
            // Positive weights on a support of four pairs; full-rank normal matrix.
            let mut eta = DVector::zeros(6);
            for i in 0..4 {
                eta[i] = rng.gen_range(0.5..2.0);
            }
            let _inst = BanditInstance::with_uniform_contexts(DMatrix::from_fn(2, 3, |x, a| {
                rewards[x * 3 + a]
            }));
            let alloc = Allocation::new(DMatrix::from_fn(2, 3, |x, a| eta[x * 3 + a]), 1e8);
            let theta = best_fit(&rep, &alloc, &rewards, 1e-9);
            // Normal-equations oracle restricted to the support.
            let mut g = DMatrix::zeros(2, 2);
            let mut b = DVector::zeros(2);
            for i in 0..6 {
                if eta[i] > 0.0 {
                    let phi = features.row(i).transpose();
                    g += &phi * phi.transpose() * eta[i];
                    b += phi * (eta[i] * rewards[i]);
                }
            }
            let oracle = g.lu().solve(&b).expect("full-rank support");
            assert!((theta - oracle).norm() < 1e-8);
        }
    }

    #[test]
    fn misspec_zero_for_realizable() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let features = random_matrix(&mut rng, 4, 2);
        let rep = Representation::new("r", features.clone());
        let rewards = &features * dvector![1.5, -0.3];
        let _inst = BanditInstance::with_uniform_contexts(DMatrix::from_fn(2, 2, |x, a| {
            rewards[x * 2 + a]
        }));
        let alloc = Allocation::new(DMatrix::from_fn(2, 2, |_, _| rng.gen_range(0.0..2.0)), 1e8);
        assert!(misspec_mse(&rep, &alloc, &rewards, 1e-9).abs() <= 1e-9);
    }

    #[test]
    fn misspec_one_dimensional_oracle() {
        // phi = all-ones, f = (0, 1), eta = (1, 1): the scalar fit is 0.5 and
        // the weighted residual 2 * 0.5^2 = 0.5.
        let inst = BanditInstance::new(vec![1.0], dmatrix![0.0, 1.0]);
        let rep = Representation::new("ones", DMatrix::from_element(2, 1, 1.0));
        let alloc = Allocation::constant(&inst, 1.0, 1e8);
        let theta = best_fit(&rep, &alloc, &inst.reward_vector(), 1e-9);
        assert!((theta[0] - 0.5).abs() < 1e-12);
        let mse = misspec_mse(&rep, &alloc, &inst.reward_vector(), 1e-9);
        assert!((mse - 0.5).abs() < 1e-12);
    }

    #[test]
    fn misspec_zero_under_zero_allocation() {
        let inst = BanditInstance::new(vec![1.0], dmatrix![0.0, 1.0]);
        let rep = Representation::new("ones", DMatrix::from_element(2, 1, 1.0));
        let alloc = Allocation::zeros(&inst, 1e8);
        assert_eq!(misspec_mse(&rep, &alloc, &inst.reward_vector(), 1e-9), 0.0);
    }

    #[test]
    fn misspec_positively_homogeneous_in_eta() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..10 {
            let features = random_matrix(&mut rng, 4, 2);
            let rep = Representation::new("r", features);
            let rewards = DVector::from_fn(4, |_, _| rng.gen_range(-1.0..1.0));
            let eta = DMatrix::from_fn(2, 2, |_, _| rng.gen_range(0.0..2.0));
            let alloc = Allocation::new(eta, 1e8);
            let c: f64 = rng.gen_range(0.5..4.0);
            let base = misspec_mse(&rep, &alloc, &rewards, 1e-9);
            let scaled = misspec_mse(&rep, &alloc.scaled(c), &rewards, 1e-9);
            assert!((scaled - c * base).abs() <= 1e-10 * (1.0 + base.abs() * c));
        }
    }
}
