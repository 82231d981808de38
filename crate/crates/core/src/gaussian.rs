//! Phase-space linear algebra for zero-mean Gaussian states.
//!
//! Quadratures are ordered `(q_d, p_d, q_1, p_1, ..., q_N, p_N)` and second
//! moments use the doubled convention `sigma_ij = <x_i x_j + x_j x_i>`, so the
//! vacuum is the identity and a thermal mode has `nu = 1 + 2 n_mean`.

use nalgebra::{DMatrix, Matrix2, SymmetricEigen};

use crate::error::{Error, Result};

/// Symplectic eigenvalues this far below 1 are treated as round-off and clamped.
pub const UNCERTAINTY_CLAMP: f64 = 1e-9;

/// Relative asymmetry accepted before a matrix is rejected as non-symmetric.
const SYMMETRY_TOL: f64 = 1e-10;

/// Index map between modes and rows of phase-space matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadratureIndexing {
    n_modes: usize,
}

impl QuadratureIndexing {
    pub fn new(n_modes: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::NoModes);
        }
        Ok(Self { n_modes })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    /// Phase-space dimension `2N + 2`.
    pub fn dim(&self) -> usize {
        2 * self.n_modes + 2
    }

    /// `(q, p)` indices of field mode `slot` (1-based, `1..=N`).
    pub fn mode(&self, slot: usize) -> (usize, usize) {
        debug_assert!(slot >= 1 && slot <= self.n_modes);
        (2 * slot, 2 * slot + 1)
    }

    pub fn detector(&self) -> (usize, usize) {
        (0, 1)
    }
}

/// Block-diagonal commutator matrix with `[[0, 1], [-1, 0]]` per mode.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticForm {
    matrix: DMatrix<f64>,
}

impl SymplecticForm {
    pub fn new(dim: usize) -> Result<Self> {
        check_even(dim, 2)?;
        let mut m = DMatrix::zeros(dim, dim);
        for b in (0..dim).step_by(2) {
            m[(b, b + 1)] = 1.0;
            m[(b + 1, b)] = -1.0;
        }
        Ok(Self { matrix: m })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Second-moment matrix of the full detector + field state.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix(DMatrix<f64>);

impl CovarianceMatrix {
    /// Wraps a matrix after checking shape and symmetry.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        check_even(matrix.nrows(), 2)?;
        let asym = asymmetry(&matrix);
        if asym > SYMMETRY_TOL {
            return Err(Error::NotSymmetric { asymmetry: asym });
        }
        Ok(Self(matrix))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }
}

/// Ground state of detector and field: the identity in the doubled convention.
pub fn vacuum_covariance(n_modes: usize) -> Result<CovarianceMatrix> {
    let idx = QuadratureIndexing::new(n_modes)?;
    Ok(CovarianceMatrix(DMatrix::identity(idx.dim(), idx.dim())))
}

/// Linear phase-space map `x -> S x` generated by a quadratic Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticMatrix(DMatrix<f64>);

impl SymplecticMatrix {
    /// Wraps a square, even-dimensional matrix. Symplecticity is not enforced;
    /// use [`check_symplectic`] to measure it.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        check_even(matrix.nrows(), 2)?;
        Ok(Self(matrix))
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::new(DMatrix::identity(dim, dim))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    /// `S^{-1} = -Omega S^T Omega`, exact for symplectic `S`.
    pub fn symplectic_inverse(&self) -> SymplecticMatrix {
        let st = self.0.transpose();
        let mut out = st.clone();
        let d = self.dim();
        // (-Omega M Omega)_{ij} = s_i s_j M_{i^, j^} with i^ the pair partner.
        for j in 0..d {
            for i in 0..d {
                let (pi, si) = partner(i);
                let (pj, sj) = partner(j);
                out[(i, j)] = si * sj * st[(pi, pj)];
            }
        }
        SymplecticMatrix(out)
    }

    pub fn compose(&self, rhs: &SymplecticMatrix) -> Result<SymplecticMatrix> {
        if self.dim() != rhs.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: rhs.dim(),
            });
        }
        Ok(SymplecticMatrix(&self.0 * &rhs.0))
    }
}

/// Returns `S sigma0 S^T`.
pub fn evolve_covariance(s: &SymplecticMatrix, sigma0: &CovarianceMatrix) -> Result<CovarianceMatrix> {
    if s.dim() != sigma0.dim() {
        return Err(Error::DimensionMismatch {
            expected: s.dim(),
            found: sigma0.dim(),
        });
    }
    let mut out = &s.0 * &sigma0.0 * s.0.transpose();
    symmetrize(&mut out);
    Ok(CovarianceMatrix(out))
}

/// Max-abs entry of `S Omega S^T - Omega`.
pub fn check_symplectic(s: &SymplecticMatrix) -> f64 {
    rows_symplectic_residual(&s.0, 0)
}

/// Residual of `R Omega R^T` against the form restricted to the rows of `R`.
///
/// `rows` holds consecutive rows of a propagator starting at row `first`
/// (which must be even).
pub fn rows_symplectic_residual(rows: &DMatrix<f64>, first: usize) -> f64 {
    let (m, d) = rows.shape();
    debug_assert!(first.is_multiple_of(2) && d.is_multiple_of(2));
    // R Omega has columns (R Omega)_{:, 2b} = -R_{:, 2b+1}, (R Omega)_{:, 2b+1} = R_{:, 2b}.
    let mut r_omega = DMatrix::zeros(m, d);
    for b in (0..d).step_by(2) {
        for i in 0..m {
            r_omega[(i, b)] = -rows[(i, b + 1)];
            r_omega[(i, b + 1)] = rows[(i, b)];
        }
    }
    let prod = r_omega * rows.transpose();
    let mut worst: f64 = 0.0;
    for i in 0..m {
        for j in 0..m {
            let gi = first + i;
            let gj = first + j;
            let target = if gi / 2 == gj / 2 {
                if gi + 1 == gj {
                    1.0
                } else if gj + 1 == gi {
                    -1.0
                } else {
                    0.0
                }
            } else {
                0.0
            };
            worst = worst.max((prod[(i, j)] - target).abs());
        }
    }
    worst
}

/// Reduced 2x2 state of the detector with its squeezed-thermal decomposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorState {
    pub sigma_d: Matrix2<f64>,
    /// Symplectic eigenvalue `sqrt(lambda_+ lambda_-)`.
    pub nu: f64,
    /// Squeezing with `e^{2r} = lambda_+ / lambda_-`.
    pub r: f64,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    /// Angle of the `lambda_+` eigenvector from the `q` axis.
    pub angle: f64,
}

impl DetectorState {
    /// Decomposes a symmetric positive 2x2 block.
    pub fn from_block(sigma_d: Matrix2<f64>) -> Result<Self> {
        let (a, b, c) = (sigma_d[(0, 0)], sigma_d[(0, 1)], sigma_d[(1, 1)]);
        let asym = (sigma_d[(1, 0)] - b).abs();
        if asym > SYMMETRY_TOL * (a.abs() + c.abs()).max(1.0) {
            return Err(Error::NotSymmetric { asymmetry: asym });
        }
        let mean = 0.5 * (a + c);
        let half_diff = 0.5 * (a - c);
        let radius = half_diff.hypot(b);
        let lambda_plus = mean + radius;
        // det / lambda_+ avoids cancellation in the small eigenvalue
        let det = a * c - b * b;
        let lambda_minus = if lambda_plus > 0.0 {
            det / lambda_plus
        } else {
            mean - radius
        };
        if !(lambda_minus > 0.0) {
            return Err(Error::UncertaintyViolation {
                nu: det.max(0.0).sqrt(),
            });
        }
        let mut nu = det.sqrt();
        if nu < 1.0 {
            if nu < 1.0 - UNCERTAINTY_CLAMP {
                return Err(Error::UncertaintyViolation { nu });
            }
            nu = 1.0;
        }
        // (1/2) ln(l+/l-) = atanh(radius / mean), accurate for small squeezing
        let r = (radius / mean).atanh();
        let angle = 0.5 * (2.0 * b).atan2(a - c);
        Ok(Self {
            sigma_d,
            nu,
            r,
            lambda_plus,
            lambda_minus,
            angle,
        })
    }

    /// Rebuilds `R diag(nu e^r, nu e^-r) R^T` from the decomposition.
    pub fn rebuild(&self) -> Matrix2<f64> {
        let (s, c) = self.angle.sin_cos();
        let rot = Matrix2::new(c, -s, s, c);
        let diag = Matrix2::new(self.nu * self.r.exp(), 0.0, 0.0, self.nu * (-self.r).exp());
        rot * diag * rot.transpose()
    }

    /// Mean excitation number `(nu - 1) / 2` of the thermal part.
    pub fn mean_occupation(&self) -> f64 {
        0.5 * (self.nu - 1.0)
    }
}

/// Takes the top-left 2x2 block of the full covariance (partial trace over the field).
pub fn reduce_to_detector(sigma: &CovarianceMatrix) -> Result<DetectorState> {
    if sigma.dim() < 4 {
        return Err(Error::BadDimension {
            min: 4,
            found: sigma.dim(),
        });
    }
    let m = &sigma.0;
    DetectorState::from_block(Matrix2::new(m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]))
}

/// Williamson spectrum of a covariance matrix, ascending, one value per mode.
pub fn symplectic_eigenvalues(sigma: &CovarianceMatrix) -> Result<Vec<f64>> {
    let d = sigma.dim();
    let eig = SymmetricEigen::new(sigma.0.clone());
    if eig.eigenvalues.iter().any(|&v| v <= 0.0) {
        return Err(Error::UncertaintyViolation {
            nu: eig.eigenvalues.min().max(0.0),
        });
    }
    let sqrt_diag = DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
    let root = &eig.eigenvectors * sqrt_diag * eig.eigenvectors.transpose();
    let omega = SymplecticForm::new(d)?;
    let a = &root * omega.matrix() * &root;
    let gram = a.transpose() * &a;
    let mut vals: Vec<f64> = SymmetricEigen::new(gram)
        .eigenvalues
        .iter()
        .map(|v| v.max(0.0).sqrt())
        .collect();
    vals.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(vals.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect())
}

fn partner(i: usize) -> (usize, f64) {
    if i.is_multiple_of(2) {
        (i + 1, 1.0)
    } else {
        (i - 1, -1.0)
    }
}

fn check_even(dim: usize, min: usize) -> Result<()> {
    if dim < min || !dim.is_multiple_of(2) {
        return Err(Error::BadDimension { min, found: dim });
    }
    Ok(())
}

fn asymmetry(m: &DMatrix<f64>) -> f64 {
    let scale = m.amax().max(1.0);
    let mut worst: f64 = 0.0;
    for j in 0..m.ncols() {
        for i in 0..j {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst / scale
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for j in 0..n {
        for i in 0..j {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn vacuum_is_identity() {
        for n in [1, 3] {
            let v = vacuum_covariance(n).unwrap();
            assert_eq!(v.matrix(), &DMatrix::identity(2 * n + 2, 2 * n + 2));
            for nu in symplectic_eigenvalues(&v).unwrap() {
                assert_relative_eq!(nu, 1.0, epsilon = 1e-12);
            }
        }
        assert_eq!(vacuum_covariance(0), Err(Error::NoModes));
    }

    #[test]
    fn form_squares_to_minus_identity() {
        let w = SymplecticForm::new(6).unwrap();
        let sq = w.matrix() * w.matrix();
        assert_eq!(sq, -DMatrix::<f64>::identity(6, 6));
        assert_eq!(w.matrix().transpose(), -w.matrix().clone());
        assert!(SymplecticForm::new(5).is_err());
    }

    #[test]
    fn identity_and_rotation_evolution() {
        let sigma = CovarianceMatrix::new(DMatrix::from_row_slice(
            4,
            4,
            &[
                2.0, 0.3, 0.1, 0.0, 0.3, 1.5, 0.0, 0.2, 0.1, 0.0, 1.2, 0.0, 0.0, 0.2, 0.0, 1.1,
            ],
        ))
        .unwrap();
        let id = SymplecticMatrix::identity(4).unwrap();
        assert_eq!(evolve_covariance(&id, &sigma).unwrap(), sigma);

        let (s, c) = 0.7f64.sin_cos();
        let mut rot = DMatrix::identity(4, 4);
        rot[(0, 0)] = c;
        rot[(0, 1)] = s;
        rot[(1, 0)] = -s;
        rot[(1, 1)] = c;
        let rot = SymplecticMatrix::new(rot).unwrap();
        let vac = vacuum_covariance(1).unwrap();
        let out = evolve_covariance(&rot, &vac).unwrap();
        assert!((out.matrix() - vac.matrix()).amax() < 1e-15);
    }

    #[test]
    fn squeezer_on_vacuum() {
        let e = std::f64::consts::E;
        let mut s = DMatrix::identity(4, 4);
        s[(0, 0)] = e;
        s[(1, 1)] = 1.0 / e;
        let s = SymplecticMatrix::new(s).unwrap();
        assert!(check_symplectic(&s) < 1e-15);
        let out = evolve_covariance(&s, &vacuum_covariance(1).unwrap()).unwrap();
        assert_relative_eq!(out.matrix()[(0, 0)], e * e, epsilon = 1e-14);
        assert_relative_eq!(out.matrix()[(1, 1)], 1.0 / (e * e), epsilon = 1e-14);
        let det = reduce_to_detector(&out).unwrap();
        assert_relative_eq!(det.nu, 1.0, epsilon = 1e-14);
        assert_relative_eq!(det.r, 2.0, epsilon = 1e-13);
    }

    #[test]
    fn evolve_rejects_dimension_mismatch() {
        let s = SymplecticMatrix::identity(6).unwrap();
        let v = vacuum_covariance(1).unwrap();
        assert!(matches!(
            evolve_covariance(&s, &v),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn detector_decomposition_examples() {
        let vac = reduce_to_detector(&vacuum_covariance(2).unwrap()).unwrap();
        assert_eq!((vac.nu, vac.r), (1.0, 0.0));

        let sq = DetectorState::from_block(Matrix2::new(2.0, 0.0, 0.0, 0.5)).unwrap();
        assert_relative_eq!(sq.nu, 1.0, epsilon = 1e-15);
        assert_relative_eq!(sq.r, 2f64.ln(), epsilon = 1e-15);

        let th = DetectorState::from_block(Matrix2::new(3.0, 0.0, 0.0, 3.0)).unwrap();
        assert_relative_eq!(th.nu, 3.0, epsilon = 1e-15);
        assert_eq!(th.r, 0.0);
    }

    #[test]
    fn detector_decomposition_errors() {
        let bad = DetectorState::from_block(Matrix2::new(1.0, 0.2, 0.0, 1.0));
        assert!(matches!(bad, Err(Error::NotSymmetric { .. })));
        let sub = DetectorState::from_block(Matrix2::new(0.5, 0.0, 0.0, 0.5));
        assert!(matches!(sub, Err(Error::UncertaintyViolation { .. })));
        // tiny round-off below 1 is clamped
        let near = DetectorState::from_block(Matrix2::new(1.0 - 1e-12, 0.0, 0.0, 1.0)).unwrap();
        assert_eq!(near.nu, 1.0);
        let small = vacuum_covariance(1).unwrap();
        let m = small.matrix().clone().remove_rows(2, 2).remove_columns(2, 2);
        assert!(CovarianceMatrix::new(m).is_ok());
    }

    #[test]
    fn residual_detects_broken_pairing() {
        let mut s = DMatrix::identity(4, 4);
        s[(0, 2)] = 1e-3;
        let r = check_symplectic(&SymplecticMatrix::new(s).unwrap());
        assert_relative_eq!(r, 1e-3, epsilon = 1e-15);
    }

    #[test]
    fn symplectic_inverse_undoes_squeezing() {
        let mut s = DMatrix::identity(4, 4);
        s[(2, 2)] = 3.0;
        s[(3, 3)] = 1.0 / 3.0;
        s[(0, 0)] = 0.6;
        s[(0, 1)] = 0.8;
        s[(1, 0)] = -0.8;
        s[(1, 1)] = 0.6;
        let s = SymplecticMatrix::new(s).unwrap();
        let prod = s.compose(&s.symplectic_inverse()).unwrap();
        assert!((prod.matrix() - DMatrix::<f64>::identity(4, 4)).amax() < 1e-15);
    }
}
