//! Logarithmic negativity and Gaussian steering from the symplectic
//! spectrum, the closed-form catalogue, and steering monogamy.
//!
//! Both quantifiers sum `−ln(2ν)` over the spectrum of `iΩV` (for
//! negativity, of the partially transposed CM; for steering, of the Schur
//! complement). That spectrum holds every symplectic eigenvalue twice, once
//! per member of its ± pair, so each eigenvalue below 1/2 contributes
//! `−2 ln(2ν)`. This is the normalization under which the closed forms in
//! [`closed_form`] hold.

pub mod closed_form;
mod id;
mod report;

pub use id::{parse_list, MeasureId, MeasureKind, Target};
pub use report::{build_report, compare, Agreement, ClosedFormEntry, CorrelationReport, MeasureEntry, ORACLE_TOL};

use crate::error::Result;
use crate::symplectic::{partial_transpose, schur_complement, symplectic_eigenvalues, CovarianceMatrix, ModePartition};
use crate::tritter::Mode;

/// Eigenvalues within this distance of 1/2 count as exactly 1/2.
pub const HALF_SNAP: f64 = 1e-12;

/// Measure value together with the spectrum it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericDetail {
    pub value: f64,
    /// Symplectic eigenvalues strictly below 1/2 (after snapping).
    pub violations: usize,
    pub min_eigenvalue: f64,
}

impl NumericDetail {
    fn from_spectrum(nu: &[f64]) -> Self {
        let below: Vec<f64> = nu.iter().copied().filter(|&x| x < 0.5 - HALF_SNAP).collect();
        let sum: f64 = below.iter().map(|&x| -2.0 * (2.0 * x).ln()).sum();
        Self {
            value: sum.max(0.0),
            violations: below.len(),
            min_eigenvalue: nu.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }

    /// Positive iff the measure is nonzero.
    pub fn margin(&self) -> f64 {
        let m = 0.5 - self.min_eigenvalue;
        if m > HALF_SNAP {
            m
        } else {
            m.min(0.0)
        }
    }
}

/// Partially transposes `party_b` of the reduced state on both parties.
pub fn log_negativity_detail(v: &CovarianceMatrix, partition: &ModePartition) -> Result<NumericDetail> {
    let modes: Vec<usize> = partition.party_a().iter().chain(partition.party_b()).copied().collect();
    let reduced = v.reduced(&modes)?;
    let na = partition.party_a().len();
    let transposed: Vec<usize> = (na..modes.len()).collect();
    let pt = partial_transpose(&reduced, &transposed)?;
    Ok(NumericDetail::from_spectrum(&symplectic_eigenvalues(&pt)?))
}

pub fn log_negativity(v: &CovarianceMatrix, partition: &ModePartition) -> Result<f64> {
    log_negativity_detail(v, partition).map(|d| d.value)
}

/// Steering from `party_a` to `party_b`.
pub fn gaussian_steering_detail(v: &CovarianceMatrix, partition: &ModePartition) -> Result<NumericDetail> {
    let cond = schur_complement(v, partition)?;
    Ok(NumericDetail::from_spectrum(&symplectic_eigenvalues(&cond)?))
}

pub fn gaussian_steering(v: &CovarianceMatrix, partition: &ModePartition) -> Result<f64> {
    gaussian_steering_detail(v, partition).map(|d| d.value)
}

fn steer(v: &CovarianceMatrix, from: &[Mode], to: &[Mode]) -> Result<f64> {
    let p = ModePartition::new(
        v.n_modes(),
        from.iter().map(|m| m.index()).collect(),
        to.iter().map(|m| m.index()).collect(),
    )?;
    gaussian_steering(v, &p)
}

/// `(S^{ij→k} − S^{i→k} − S^{j→k}, S^{k→ij} − S^{k→i} − S^{k→j})`.
pub fn monogamy_residuals(v: &CovarianceMatrix, k: Mode) -> Result<(f64, f64)> {
    let [i, j] = k.others();
    let into_k = steer(v, &[i, j], &[k])? - steer(v, &[i], &[k])? - steer(v, &[j], &[k])?;
    let from_k = steer(v, &[k], &[i, j])? - steer(v, &[k], &[i])? - steer(v, &[k], &[j])?;
    Ok((into_k, from_k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tritter::ideal_output_cm;
    use approx::assert_abs_diff_eq;

    fn part(a: &[usize], b: &[usize]) -> ModePartition {
        ModePartition::new(3, a.to_vec(), b.to_vec()).unwrap()
    }

    #[test]
    fn vacuum_has_nothing() {
        let v = CovarianceMatrix::vacuum(3);
        assert_eq!(log_negativity(&v, &part(&[0], &[1, 2])).unwrap(), 0.0);
        assert_eq!(gaussian_steering(&v, &part(&[0, 1], &[2])).unwrap(), 0.0);
    }

    #[test]
    fn ideal_values() {
        let l: f64 = 0.5;
        let v = ideal_output_cm(l).unwrap();
        assert_abs_diff_eq!(
            log_negativity(&v, &part(&[0], &[1])).unwrap(),
            (9.0f64 / 5.0).ln(),
            epsilon = 1e-12
        );
        let split = (9.0 * (1.0 - l * l) / ((9.0 - l * l).sqrt() - 8f64.sqrt() * l).powi(2)).ln();
        assert_abs_diff_eq!(
            log_negativity(&v, &part(&[2], &[0, 1])).unwrap(),
            split,
            epsilon = 1e-12
        );
        assert_eq!(gaussian_steering(&v, &part(&[0], &[1])).unwrap(), 0.0);
        let s = gaussian_steering(&v, &part(&[2], &[0, 1])).unwrap();
        assert_abs_diff_eq!(s, (8.75f64 / 6.75).ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(gaussian_steering(&v, &part(&[0, 1], &[2])).unwrap(), s, epsilon = 1e-12);
    }

    #[test]
    fn steering_into_pair_needs_invertible_block() {
        let mut m = CovarianceMatrix::vacuum(3).into_matrix();
        m[(0, 0)] = 0.0;
        m[(1, 1)] = 0.0;
        let v = CovarianceMatrix::new(m).unwrap();
        assert!(gaussian_steering(&v, &part(&[0], &[1])).is_err());
    }

    #[test]
    fn ideal_monogamy_equals_collective_steering() {
        let v = ideal_output_cm(0.7).unwrap();
        let (r1, r2) = monogamy_residuals(&v, Mode::C).unwrap();
        let s = gaussian_steering(&v, &part(&[2], &[0, 1])).unwrap();
        assert_abs_diff_eq!(r1, s, epsilon = 1e-12);
        assert_abs_diff_eq!(r2, s, epsilon = 1e-12);
        assert_eq!(
            monogamy_residuals(&ideal_output_cm(0.0).unwrap(), Mode::A).unwrap(),
            (0.0, 0.0)
        );
    }

    #[test]
    fn margin_sign() {
        let v = ideal_output_cm(0.5).unwrap();
        assert!(log_negativity_detail(&v, &part(&[0], &[1])).unwrap().margin() > 0.0);
        assert!(gaussian_steering_detail(&v, &part(&[0], &[1])).unwrap().margin() <= 0.0);
    }
}
