//! Linear algebra for complex symmetric (non-Hermitian) matrices.
//!
//! Eigenvectors of a complex symmetric matrix are orthogonal under the
//! bilinear product `xᵀy` (no conjugation). [`decompose_complex_symmetric`]
//! returns them normalised so that `x_jᵀ x_l = δ_jl`, which makes
//! `B = Σ_j λ_j x_j x_jᵀ` and `Σ_j x_j x_jᵀ = 1`.
//!
//! Bilinear forms `Xᵀ M⁻¹ Y` go through an LU factorisation in
//! [`SymmetricSolver`]; the eigendecomposition is never used for them.

use nalgebra::linalg::{Schur, LU};
use nalgebra::{DMatrix, DVector, Dyn};

use crate::{Error, Result, C64};

/// Bilinear normalisation below this value is treated as defective.
pub const DEFECTIVE_THRESHOLD: f64 = 1e-6;

/// Relative asymmetry accepted on input.
const SYMMETRY_TOL: f64 = 1e-12;

/// Relative residual above which a linear solve is rejected.
pub const SOLVE_RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    /// Sorted by descending real part.
    pub eigenvalues: DVector<C64>,
    /// Columns are the eigenvectors, bilinearly normalised.
    pub eigenvectors: DMatrix<C64>,
    /// `min_j |x_jᵀ x_j|` for unit-2-norm eigenvectors; zero means defective.
    pub condition_metric: f64,
}

impl SpectralDecomposition {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn vector(&self, j: usize) -> DVector<C64> {
        self.eigenvectors.column(j).into_owned()
    }

    /// `Σ_j λ_j x_j x_jᵀ`.
    pub fn reconstruct(&self) -> DMatrix<C64> {
        let x = &self.eigenvectors;
        let scaled = x * DMatrix::from_diagonal(&self.eigenvalues);
        scaled * x.transpose()
    }

    /// `Σ_j (xᵀ x_j)(x_jᵀ y) / λ_j`, i.e. `xᵀ B⁻¹ y` via the spectrum.
    pub fn inverse_form(&self, x: &DVector<C64>, y: &DVector<C64>) -> C64 {
        (0..self.len())
            .map(|j| {
                let v = self.eigenvectors.column(j);
                x.dot(&v) * v.dot(y) / self.eigenvalues[j]
            })
            .sum()
    }
}

fn relative_asymmetry(b: &DMatrix<C64>) -> f64 {
    (b - b.transpose()).norm() / b.norm().max(f64::MIN_POSITIVE)
}

/// Eigenvectors of an upper-triangular matrix by back substitution.
fn triangular_eigenvectors(t: &DMatrix<C64>) -> DMatrix<C64> {
    let n = t.nrows();
    let smin = (f64::EPSILON * t.norm()).max(f64::MIN_POSITIVE);
    let mut y = DMatrix::<C64>::zeros(n, n);
    for k in 0..n {
        let lambda = t[(k, k)];
        y[(k, k)] = C64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut acc = C64::new(0.0, 0.0);
            for j in (i + 1)..=k {
                acc += t[(i, j)] * y[(j, k)];
            }
            let mut denom = t[(i, i)] - lambda;
            if denom.norm() < smin {
                denom = C64::new(smin, 0.0);
            }
            y[(i, k)] = -acc / denom;
        }
    }
    y
}

/// Fix the sign so the largest-magnitude entry has positive real part.
fn fix_sign(x: &mut DVector<C64>) {
    let Some((idx, _)) = x.iter().enumerate().max_by(|a, b| a.1.norm().total_cmp(&b.1.norm())) else {
        return;
    };
    let lead = x[idx];
    let flip = if lead.re != 0.0 { lead.re < 0.0 } else { lead.im < 0.0 };
    if flip {
        x.neg_mut();
    }
}

/// Diagonalise a complex symmetric matrix with transpose-orthonormal
/// eigenvectors.
pub fn decompose_complex_symmetric(b: &DMatrix<C64>) -> Result<SpectralDecomposition> {
    let n = b.nrows();
    if n == 0 || b.ncols() != n {
        return Err(Error::InvalidParameter("matrix must be square and nonempty".into()));
    }
    let asym = relative_asymmetry(b);
    if asym > SYMMETRY_TOL {
        return Err(Error::NotSymmetric(asym));
    }

    let (q, t) = Schur::new(b.clone()).unpack();
    let y = triangular_eigenvectors(&t);
    let raw = q * y;

    let mut pairs: Vec<(C64, DVector<C64>)> =
        (0..n).map(|k| (t[(k, k)], raw.column(k).normalize())).collect();
    pairs.sort_by(|a, b| b.0.re.total_cmp(&a.0.re).then(b.0.im.total_cmp(&a.0.im)));

    // Orthogonalise within clusters of (numerically) repeated eigenvalues.
    let scale = b.norm().max(f64::MIN_POSITIVE);
    let cluster_tol = 1e-8 * scale;
    let mut normalised: Vec<DVector<C64>> = Vec::with_capacity(n);
    let mut metric = f64::INFINITY;
    for k in 0..n {
        let mut x = pairs[k].1.clone();
        for j in 0..k {
            if (pairs[j].0 - pairs[k].0).norm() <= cluster_tol {
                let proj = normalised[j].dot(&x);
                x -= &normalised[j] * proj;
            }
        }
        let x = x.normalize();
        let s = x.dot(&x);
        metric = metric.min(s.norm());
        if s.norm() < DEFECTIVE_THRESHOLD || !s.norm().is_finite() {
            return Err(Error::DecompositionUnreliable { metric: s.norm() });
        }
        let mut x = x / s.sqrt();
        fix_sign(&mut x);
        normalised.push(x);
    }

    let eigenvalues = DVector::from_iterator(n, pairs.iter().map(|p| p.0));
    let eigenvectors = DMatrix::from_columns(&normalised);
    Ok(SpectralDecomposition { eigenvalues, eigenvectors, condition_metric: metric })
}

/// LU factorisation of a (symmetric) matrix, reused across right-hand sides.
#[derive(Debug, Clone)]
pub struct SymmetricSolver {
    matrix: DMatrix<C64>,
    lu: LU<C64, Dyn, Dyn>,
}

impl SymmetricSolver {
    pub fn new(m: &DMatrix<C64>) -> Result<Self> {
        let n = m.nrows();
        if n == 0 || m.ncols() != n {
            return Err(Error::InvalidParameter("matrix must be square and nonempty".into()));
        }
        let lu = LU::new(m.clone());
        // An exactly vanishing or underflowing pivot is singular regardless of residuals.
        let u = lu.u();
        let scale = m.norm();
        if (0..n).any(|i| u[(i, i)].norm() <= f64::EPSILON * f64::EPSILON * scale) {
            return Err(Error::EliminationSingular { residual: f64::INFINITY });
        }
        Ok(Self { matrix: m.clone(), lu })
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    /// Solve `M z = rhs`, rejecting the result when the relative residual is
    /// above [`SOLVE_RESIDUAL_TOL`].
    pub fn solve(&self, rhs: &DVector<C64>) -> Result<DVector<C64>> {
        let (z, residual) = self.solve_with_residual(rhs)?;
        if residual > SOLVE_RESIDUAL_TOL {
            return Err(Error::EliminationSingular { residual });
        }
        Ok(z)
    }

    pub fn solve_with_residual(&self, rhs: &DVector<C64>) -> Result<(DVector<C64>, f64)> {
        if rhs.len() != self.matrix.nrows() {
            return Err(Error::DimensionMismatch { expected: self.matrix.nrows(), got: rhs.len() });
        }
        let z = self.lu.solve(rhs).ok_or(Error::EliminationSingular { residual: f64::INFINITY })?;
        if z.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::EliminationSingular { residual: f64::INFINITY });
        }
        let r = &self.matrix * &z - rhs;
        let denom = self.matrix.norm() * z.norm() + rhs.norm();
        let residual = if denom > 0.0 { r.norm() / denom } else { 0.0 };
        Ok((z, residual))
    }

    /// `Xᵀ M⁻¹ Y`.
    pub fn form(&self, x: &DVector<C64>, y: &DVector<C64>) -> Result<C64> {
        let z = self.solve(y)?;
        if x.len() != z.len() {
            return Err(Error::DimensionMismatch { expected: z.len(), got: x.len() });
        }
        Ok(x.dot(&z))
    }
}

/// `Xᵀ M⁻¹ Y` through a direct solve.
pub fn quadratic_form(m: &DMatrix<C64>, x: &DVector<C64>, y: &DVector<C64>) -> Result<C64> {
    SymmetricSolver::new(m)?.form(x, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_symmetric(n: usize, entries: &[(f64, f64)]) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(n, n);
        let mut it = entries.iter().cycle();
        for i in 0..n {
            for j in i..n {
                let &(a, b) = it.next().unwrap();
                m[(i, j)] = c(a, b);
                m[(j, i)] = c(a, b);
            }
        }
        m
    }

    #[test]
    fn scalar_case() {
        let (db, gb) = (3.0, 0.5);
        let b = DMatrix::from_element(1, 1, c(-gb, -db));
        let d = decompose_complex_symmetric(&b).unwrap();
        assert_eq!(d.eigenvalues[0], c(-gb, -db));
        assert!((d.eigenvectors[(0, 0)] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn symmetric_two_by_two() {
        let (a, b) = (c(-1.0, 2.0), c(0.3, -0.7));
        let m = DMatrix::from_row_slice(2, 2, &[a, b, b, a]);
        let d = decompose_complex_symmetric(&m).unwrap();
        // a + b has the larger real part here
        assert!((d.eigenvalues[0] - (a + b)).norm() < 1e-12);
        assert!((d.eigenvalues[1] - (a - b)).norm() < 1e-12);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let x0 = d.vector(0);
        let x1 = d.vector(1);
        assert!((x0[0] - c(s, 0.0)).norm() < 1e-12 && (x0[1] - c(s, 0.0)).norm() < 1e-12);
        assert!((x1[0].norm() - s).abs() < 1e-12 && (x1[0] + x1[1]).norm() < 1e-12);
    }

    #[test]
    fn degenerate_diagonal_is_handled() {
        let m = DMatrix::from_diagonal_element(3, 3, c(-1.0, -5.0));
        let d = decompose_complex_symmetric(&m).unwrap();
        let x = &d.eigenvectors;
        assert!((x.transpose() * x - DMatrix::identity(3, 3)).norm() < 1e-12);
    }

    #[test]
    fn defective_matrix_rejected() {
        // [[1, i], [i, -1]] is nilpotent: a single Jordan block.
        let m = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 1.0), c(0.0, 1.0), c(-1.0, 0.0)]);
        assert!(matches!(decompose_complex_symmetric(&m), Err(Error::DecompositionUnreliable { .. })));
    }

    #[test]
    fn asymmetric_input_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(decompose_complex_symmetric(&m), Err(Error::NotSymmetric(_))));
    }

    #[test]
    fn scalar_quadratic_form() {
        let m = DMatrix::from_element(1, 1, c(2.0, -0.5));
        let g = DVector::from_element(1, c(3.0, 0.0));
        let q = quadratic_form(&m, &g, &g).unwrap();
        assert!((q - c(9.0, 0.0) / c(2.0, -0.5)).norm() < 1e-14);
    }

    #[test]
    fn orthogonal_supports_vanish() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![c(1.0, -1.0), c(4.0, -0.2)]));
        let x = DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]);
        let y = DVector::from_vec(vec![c(0.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(quadratic_form(&m, &x, &y).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn singular_matrix_rejected() {
        let m = DMatrix::from_element(1, 1, c(0.0, 0.0));
        let g = DVector::from_element(1, c(1.0, 0.0));
        assert!(matches!(quadratic_form(&m, &g, &g), Err(Error::EliminationSingular { .. })));
        let m = DMatrix::from_row_slice(2, 2, &[c(1.0, 1.0), c(2.0, 2.0), c(2.0, 2.0), c(4.0, 4.0)]);
        let g = DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 1.0)]);
        assert!(quadratic_form(&m, &g, &g).is_err());
    }

    fn entries() -> impl Strategy<Value = Vec<(f64, f64)>> {
        prop::collection::vec((-3.0..3.0f64, -3.0..3.0f64), 36)
    }

    proptest! {
        #[test]
        fn bilinear_orthonormal_and_complete(n in 1usize..=8, e in entries()) {
            let m = random_symmetric(n, &e);
            match decompose_complex_symmetric(&m) {
                Ok(d) => {
                    let x = &d.eigenvectors;
                    let id = DMatrix::<C64>::identity(n, n);
                    // Accuracy degrades with 1/metric; random draws stay well conditioned.
                    let tol = 1e-8;
                    prop_assert!((x.transpose() * x - &id).norm() < tol);
                    prop_assert!((x * x.transpose() - &id).norm() < tol);
                    prop_assert!((d.reconstruct() - &m).norm() / m.norm() < tol);
                    for k in 1..n {
                        prop_assert!(d.eigenvalues[k - 1].re >= d.eigenvalues[k].re);
                    }
                }
                Err(Error::DecompositionUnreliable { .. }) => {}
                Err(e) => prop_assert!(false, "unexpected error {e}"),
            }
        }

        #[test]
        fn quadratic_form_is_symmetric(e in entries(), xs in prop::collection::vec(-1.0..1.0f64, 20)) {
            let m = random_symmetric(5, &e);
            let x = DVector::from_iterator(5, (0..5).map(|i| c(xs[i], xs[i + 5])));
            let y = DVector::from_iterator(5, (0..5).map(|i| c(xs[i + 10], xs[i + 15])));
            if let (Ok(a), Ok(b)) = (quadratic_form(&m, &x, &y), quadratic_form(&m, &y, &x)) {
                prop_assert!((a - b).norm() <= 1e-12 * a.norm().max(1.0));
            }
        }

        #[test]
        fn spectral_and_direct_routes_agree(n in 1usize..=6, e in entries(), xs in prop::collection::vec(-1.0..1.0f64, 24)) {
            let m = random_symmetric(n, &e);
            let b = m.map(|z| -C64::i() * z);
            let x = DVector::from_iterator(n, (0..n).map(|i| c(xs[i], xs[i + 6])));
            let y = DVector::from_iterator(n, (0..n).map(|i| c(xs[i + 12], xs[i + 18])));
            if let (Ok(d), Ok(q)) = (decompose_complex_symmetric(&b), quadratic_form(&m, &x, &y)) {
                if d.condition_metric > 1e-2 {
                    let spectral = d.inverse_form(&x, &y);
                    prop_assert!((spectral - C64::i() * q).norm() <= 1e-8 * q.norm().max(1.0));
                }
            }
        }
    }
}
