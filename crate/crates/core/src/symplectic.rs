//! Covariance-matrix kernel: symplectic form, symplectic spectrum, partial
//! transposition, Schur complements and the bona-fide test.
//!
//! Quadratures are ordered `(x_1, p_1, ..., x_n, p_n)` with
//! `x = (a + a†)/√2`, `p = (a − a†)/(i√2)`, so the vacuum has variance 1/2 in
//! each quadrature.

use nalgebra::{DMatrix, Schur};

use crate::error::{Error, Result};

/// Tolerance used by [`is_physical`].
pub const PHYSICAL_TOL: f64 = 1e-10;

/// Relative tolerance for the ± pairing of the spectrum of `iΩV`.
pub const PAIRING_TOL: f64 = 1e-9;

/// Real symmetric `2n × 2n` second-moment matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    n_modes: usize,
    m: DMatrix<f64>,
}

impl CovarianceMatrix {
    /// Wraps a matrix, symmetrizing it as `(V + Vᵀ)/2`.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Dimension(format!(
                "covariance matrix must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.nrows() == 0 || !m.nrows().is_multiple_of(2) {
            return Err(Error::Dimension(format!(
                "covariance matrix must have positive even dimension, got {}",
                m.nrows()
            )));
        }
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::numeric("non-finite covariance entry", &m));
        }
        let sym = (&m + m.transpose()) * 0.5;
        Ok(Self {
            n_modes: m.nrows() / 2,
            m: sym,
        })
    }

    pub fn from_row_slice(dim: usize, data: &[f64]) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::Dimension(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                data.len()
            )));
        }
        Self::new(DMatrix::from_row_slice(dim, dim, data))
    }

    /// `I/2` on `n_modes` modes.
    pub fn vacuum(n_modes: usize) -> Self {
        Self {
            n_modes,
            m: DMatrix::identity(2 * n_modes, 2 * n_modes) * 0.5,
        }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn dim(&self) -> usize {
        2 * self.n_modes
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.m
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.m[(row, col)]
    }

    /// Row-major copy of all entries.
    pub fn to_row_major(&self) -> Vec<f64> {
        let d = self.dim();
        (0..d)
            .flat_map(|r| (0..d).map(move |c| (r, c)))
            .map(|(r, c)| self.m[(r, c)])
            .collect()
    }

    /// The 2×2 block coupling modes `i` and `j`.
    pub fn block(&self, i: usize, j: usize) -> DMatrix<f64> {
        self.m.view((2 * i, 2 * j), (2, 2)).into_owned()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.dim() != other.dim() {
            return f64::INFINITY;
        }
        (&self.m - &other.m).abs().max()
    }

    /// Reduced state on `modes`, in the given order.
    pub fn reduced(&self, modes: &[usize]) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::Partition("empty mode subset".into()));
        }
        for &k in modes {
            self.check_mode(k)?;
        }
        let idx = quadrature_indices(modes);
        let m = DMatrix::from_fn(idx.len(), idx.len(), |r, c| self.m[(idx[r], idx[c])]);
        Ok(Self {
            n_modes: modes.len(),
            m,
        })
    }

    /// `S V Sᵀ` for a `2n × 2n` transform `S`.
    pub fn transform(&self, s: &DMatrix<f64>) -> Result<Self> {
        if s.nrows() != self.dim() || s.ncols() != self.dim() {
            return Err(Error::Dimension(format!(
                "transform is {}x{}, state is {}x{}",
                s.nrows(),
                s.ncols(),
                self.dim(),
                self.dim()
            )));
        }
        Self::new(s * &self.m * s.transpose())
    }

    pub(crate) fn check_mode(&self, index: usize) -> Result<()> {
        if index >= self.n_modes {
            return Err(Error::ModeRange {
                index,
                n_modes: self.n_modes,
            });
        }
        Ok(())
    }
}

/// `Ω = ⊕ [[0, 1], [−1, 0]]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymplecticForm {
    pub n_modes: usize,
}

impl SymplecticForm {
    pub fn new(n_modes: usize) -> Self {
        Self { n_modes }
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let d = 2 * self.n_modes;
        let mut om = DMatrix::zeros(d, d);
        for k in 0..self.n_modes {
            om[(2 * k, 2 * k + 1)] = 1.0;
            om[(2 * k + 1, 2 * k)] = -1.0;
        }
        om
    }
}

/// Ordered pair of disjoint, nonempty mode subsets.
///
/// For steering, `party_a` is the steering party and `party_b` the steered
/// one. For entanglement the order only decides which side is transposed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ModePartition {
    party_a: Vec<usize>,
    party_b: Vec<usize>,
}

impl ModePartition {
    pub fn new(n_modes: usize, party_a: Vec<usize>, party_b: Vec<usize>) -> Result<Self> {
        if party_a.is_empty() || party_b.is_empty() {
            return Err(Error::Partition("both parties must be nonempty".into()));
        }
        for &k in party_a.iter().chain(&party_b) {
            if k >= n_modes {
                return Err(Error::ModeRange { index: k, n_modes });
            }
        }
        let all: Vec<usize> = party_a.iter().chain(&party_b).copied().collect();
        for (i, k) in all.iter().enumerate() {
            if all[..i].contains(k) {
                return Err(Error::Partition(format!(
                    "mode {k} appears more than once in {party_a:?}|{party_b:?}"
                )));
            }
        }
        Ok(Self { party_a, party_b })
    }

    pub fn party_a(&self) -> &[usize] {
        &self.party_a
    }

    pub fn party_b(&self) -> &[usize] {
        &self.party_b
    }

    pub fn reversed(&self) -> Self {
        Self {
            party_a: self.party_b.clone(),
            party_b: self.party_a.clone(),
        }
    }
}

pub(crate) fn quadrature_indices(modes: &[usize]) -> Vec<usize> {
    modes.iter().flat_map(|&k| [2 * k, 2 * k + 1]).collect()
}

/// Symplectic eigenvalues of `V`, ascending, one per mode.
///
/// These are the moduli of the eigenvalues of `iΩV`; each appears twice in
/// the raw spectrum and is returned once.
pub fn symplectic_eigenvalues(v: &CovarianceMatrix) -> Result<Vec<f64>> {
    let om = SymplecticForm::new(v.n_modes()).matrix();
    let ov = &om * v.matrix();
    let schur = Schur::try_new(ov, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::numeric("Schur decomposition did not converge", v.matrix()))?;
    let mut moduli: Vec<f64> = schur.complex_eigenvalues().iter().map(|z| z.norm()).collect();
    if moduli.iter().any(|x| !x.is_finite()) {
        return Err(Error::numeric("non-finite eigenvalue", v.matrix()));
    }
    moduli.sort_by(f64::total_cmp);
    let mut out = Vec::with_capacity(v.n_modes());
    for pair in moduli.chunks_exact(2) {
        let scale = pair[1].abs().max(1.0);
        if (pair[1] - pair[0]).abs() > PAIRING_TOL * scale {
            return Err(Error::numeric(
                format!("spectrum of iΩV is not ± paired: {:.3e} vs {:.3e}", pair[0], pair[1]),
                v.matrix(),
            ));
        }
        out.push(pair[0]);
    }
    Ok(out)
}

/// Flips the sign of the momentum row/column of each mode in `modes`.
pub fn partial_transpose(v: &CovarianceMatrix, modes: &[usize]) -> Result<CovarianceMatrix> {
    if modes.is_empty() {
        return Err(Error::Partition("no modes to transpose".into()));
    }
    for &k in modes {
        v.check_mode(k)?;
    }
    let mut m = v.matrix().clone();
    for &k in modes {
        let p = 2 * k + 1;
        for j in 0..m.ncols() {
            m[(p, j)] = -m[(p, j)];
        }
        for i in 0..m.nrows() {
            m[(i, p)] = -m[(i, p)];
        }
    }
    CovarianceMatrix::new(m)
}

/// Conditional covariance of `party_b` given `party_a`:
/// `V_B − V_Cᵀ V_A⁻¹ V_C`.
pub fn schur_complement(v: &CovarianceMatrix, partition: &ModePartition) -> Result<CovarianceMatrix> {
    let a = quadrature_indices(partition.party_a());
    let b = quadrature_indices(partition.party_b());
    for &k in partition.party_a().iter().chain(partition.party_b()) {
        v.check_mode(k)?;
    }
    let m = v.matrix();
    let va = DMatrix::from_fn(a.len(), a.len(), |r, c| m[(a[r], a[c])]);
    let vb = DMatrix::from_fn(b.len(), b.len(), |r, c| m[(b[r], b[c])]);
    let vc = DMatrix::from_fn(a.len(), b.len(), |r, c| m[(a[r], b[c])]);

    // Vacuum-normalized determinant: physical blocks have det(2 V_A) >= 1.
    let det = (&va * 2.0).determinant();
    if det.is_nan() || det.abs() <= 1e-14 {
        return Err(Error::SingularBlock {
            party: format!("{:?}", partition.party_a()),
            det,
        });
    }
    let solved = va.lu().solve(&vc).ok_or_else(|| Error::SingularBlock {
        party: format!("{:?}", partition.party_a()),
        det,
    })?;
    CovarianceMatrix::new(vb - vc.transpose() * solved)
}

/// Bona-fide condition: every symplectic eigenvalue is at least `1/2 − 1e-10`.
pub fn is_physical(v: &CovarianceMatrix) -> Result<bool> {
    let nu = symplectic_eigenvalues(v)?;
    Ok(nu.iter().all(|&x| x >= 0.5 - PHYSICAL_TOL))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Closed-form two-mode spectrum from the invariants det V and
    /// Δ = det A + det B + 2 det C.
    fn two_mode_oracle(v: &CovarianceMatrix) -> (f64, f64) {
        let a = v.block(0, 0).determinant();
        let b = v.block(1, 1).determinant();
        let c = v.block(0, 1).determinant();
        let delta = a + b + 2.0 * c;
        let det = v.matrix().determinant();
        let disc = (delta * delta - 4.0 * det).max(0.0).sqrt();
        (((delta - disc) / 2.0).sqrt(), ((delta + disc) / 2.0).sqrt())
    }

    #[test]
    fn vacuum_spectrum() {
        let nu = symplectic_eigenvalues(&CovarianceMatrix::vacuum(3)).unwrap();
        assert_eq!(nu.len(), 3);
        for x in nu {
            assert_abs_diff_eq!(x, 0.5, epsilon = 1e-14);
        }
    }

    #[test]
    fn thermal_single_mode() {
        let v = CovarianceMatrix::from_row_slice(2, &[1.5, 0.0, 0.0, 1.5]).unwrap();
        let nu = symplectic_eigenvalues(&v).unwrap();
        assert_abs_diff_eq!(nu[0], 1.5, epsilon = 1e-14);
    }

    #[test]
    fn single_mode_matches_sqrt_det() {
        let v = CovarianceMatrix::from_row_slice(2, &[2.0, 0.3, 0.3, 0.7]).unwrap();
        let nu = symplectic_eigenvalues(&v).unwrap();
        assert_abs_diff_eq!(nu[0], v.matrix().determinant().sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn two_mode_matches_invariant_oracle() {
        let v = CovarianceMatrix::from_row_slice(
            4,
            &[
                1.3, 0.1, 0.6, 0.05, //
                0.1, 0.9, -0.02, -0.4, //
                0.6, -0.02, 1.1, 0.0, //
                0.05, -0.4, 0.0, 1.2,
            ],
        )
        .unwrap();
        let nu = symplectic_eigenvalues(&v).unwrap();
        let (lo, hi) = two_mode_oracle(&v);
        assert_abs_diff_eq!(nu[0], lo, epsilon = 1e-12);
        assert_abs_diff_eq!(nu[1], hi, epsilon = 1e-12);
    }

    #[test]
    fn rejects_bad_dimensions() {
        assert!(matches!(
            CovarianceMatrix::new(DMatrix::zeros(3, 3)),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(
            CovarianceMatrix::new(DMatrix::zeros(2, 4)),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn constructor_symmetrizes() {
        let v = CovarianceMatrix::from_row_slice(2, &[1.0, 0.2, 0.4, 1.0]).unwrap();
        assert_eq!(v.get(0, 1), v.get(1, 0));
        assert_abs_diff_eq!(v.get(0, 1), 0.3, epsilon = 1e-15);
    }

    #[test]
    fn symplectic_form_squares_to_minus_identity() {
        let om = SymplecticForm::new(3).matrix();
        assert_eq!(&om + om.transpose(), DMatrix::zeros(6, 6));
        assert_eq!(&om * &om, -DMatrix::<f64>::identity(6, 6));
    }

    #[test]
    fn partial_transpose_of_vacuum_is_vacuum() {
        let v = CovarianceMatrix::vacuum(3);
        assert_eq!(partial_transpose(&v, &[2]).unwrap(), v);
    }

    #[test]
    fn partial_transpose_range_error() {
        let v = CovarianceMatrix::vacuum(3);
        assert!(matches!(
            partial_transpose(&v, &[3]),
            Err(Error::ModeRange { index: 3, n_modes: 3 })
        ));
        assert!(partial_transpose(&v, &[]).is_err());
    }

    #[test]
    fn schur_of_product_state_is_marginal() {
        let mut m = DMatrix::identity(4, 4) * 0.5;
        m[(0, 0)] = 1.2;
        m[(1, 1)] = 0.9;
        m[(0, 1)] = 0.1;
        m[(1, 0)] = 0.1;
        m[(2, 2)] = 0.8;
        m[(3, 3)] = 0.7;
        let v = CovarianceMatrix::new(m).unwrap();
        let part = ModePartition::new(2, vec![0], vec![1]).unwrap();
        let s = schur_complement(&v, &part).unwrap();
        assert_eq!(s.matrix(), &v.block(1, 1));
    }

    #[test]
    fn schur_singular_block() {
        let mut m = DMatrix::identity(4, 4) * 0.5;
        m[(0, 0)] = 0.0;
        let v = CovarianceMatrix::new(m).unwrap();
        let part = ModePartition::new(2, vec![0], vec![1]).unwrap();
        assert!(matches!(schur_complement(&v, &part), Err(Error::SingularBlock { .. })));
    }

    #[test]
    fn partition_validation() {
        assert!(ModePartition::new(3, vec![0], vec![0]).is_err());
        assert!(ModePartition::new(3, vec![], vec![1]).is_err());
        assert!(matches!(
            ModePartition::new(3, vec![0], vec![5]),
            Err(Error::ModeRange { index: 5, .. })
        ));
        let p = ModePartition::new(3, vec![2], vec![0, 1]).unwrap();
        assert_eq!(p.reversed().party_a(), &[0, 1]);
    }

    #[test]
    fn physicality() {
        assert!(is_physical(&CovarianceMatrix::vacuum(3)).unwrap());
        let v = CovarianceMatrix::from_row_slice(2, &[0.1, 0.0, 0.0, 0.1]).unwrap();
        assert!(!is_physical(&v).unwrap());
    }

    #[test]
    fn reduced_picks_blocks_in_order() {
        let mut m = DMatrix::identity(6, 6) * 0.5;
        m[(4, 4)] = 3.0;
        m[(0, 4)] = 0.25;
        m[(4, 0)] = 0.25;
        let v = CovarianceMatrix::new(m).unwrap();
        let r = v.reduced(&[2, 0]).unwrap();
        assert_eq!(r.get(0, 0), 3.0);
        assert_eq!(r.get(0, 2), 0.25);
        assert!(v.reduced(&[4]).is_err());
    }
}
