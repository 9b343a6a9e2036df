//! Input state, tritter transform and the resulting three-mode covariance
//! matrix.
//!
//! Modes `a`, `b` carry the two-mode squeezed vacuum and mode `c` the
//! coherent state. The squeezing is stored as `λ = tanh r`.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::symplectic::CovarianceMatrix;

/// Sign of the `x_a x_b` correlation of the input TMSV block,
/// `(1/2) sinh 2r · diag(σ, −σ)`.
///
/// Frozen by matching the transformed input against the element-wise
/// reference table; `σ = −1` (or acting with `U` instead of `U†`) misses it by
/// more than 0.4.
pub const TMSV_SIGN: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mode {
    A,
    B,
    C,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::A, Mode::B, Mode::C];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn label(self) -> char {
        match self {
            Mode::A => 'a',
            Mode::B => 'b',
            Mode::C => 'c',
        }
    }

    pub fn from_label(c: char) -> Option<Self> {
        match c.to_ascii_lowercase() {
            'a' => Some(Mode::A),
            'b' => Some(Mode::B),
            'c' => Some(Mode::C),
            _ => None,
        }
    }

    /// The two modes other than `self`, in index order.
    pub fn others(self) -> [Mode; 2] {
        match self {
            Mode::A => [Mode::B, Mode::C],
            Mode::B => [Mode::A, Mode::C],
            Mode::C => [Mode::A, Mode::B],
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut chars = s.trim().chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) => Mode::from_label(c).ok_or_else(|| Error::Parse(format!("unknown mode '{s}'"))),
            _ => Err(Error::Parse(format!("unknown mode '{s}'"))),
        }
    }
}

/// TMSV squeezing plus coherent amplitude for mode `c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InputSpec {
    lambda: f64,
    pub gamma: Complex<f64>,
}

impl InputSpec {
    pub fn from_lambda(lambda: f64, gamma: Complex<f64>) -> Result<Self> {
        check_lambda(lambda)?;
        Ok(Self { lambda, gamma })
    }

    pub fn from_r(r: f64, gamma: Complex<f64>) -> Result<Self> {
        if !r.is_finite() || r < 0.0 {
            return Err(Error::Domain(format!("squeezing r must be finite and >= 0, got {r}")));
        }
        Self::from_lambda(r.tanh(), gamma)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn r(&self) -> f64 {
        self.lambda.atanh()
    }
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if !(0.0..1.0).contains(&lambda) {
        return Err(Error::Domain(format!("lambda must lie in [0, 1), got {lambda}")));
    }
    Ok(())
}

/// Quadrature means in `(x_a, p_a, x_b, p_b, x_c, p_c)` order.
#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementVector(pub DVector<f64>);

impl DisplacementVector {
    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }
}

/// Balanced three-port splitter, `(1/√3)[[1, ω, ω], [ω, 1, ω], [ω, ω, 1]]`
/// with `ω = e^{2iπ/3}`.
pub fn tritter_unitary() -> DMatrix<Complex<f64>> {
    let s = 1.0 / 3f64.sqrt();
    let one = Complex::new(s, 0.0);
    let w = Complex::from_polar(s, 2.0 * PI / 3.0);
    DMatrix::from_fn(3, 3, |j, k| if j == k { one } else { w })
}

/// Orthogonal symplectic matrix of the passive transform `a → U a`, with
/// 2×2 blocks `[[Re U, −Im U], [Im U, Re U]]`.
pub fn unitary_to_symplectic(u: &DMatrix<Complex<f64>>) -> Result<DMatrix<f64>> {
    if !u.is_square() {
        return Err(Error::Dimension(format!(
            "unitary must be square, got {}x{}",
            u.nrows(),
            u.ncols()
        )));
    }
    let n = u.nrows();
    let dev = (u * u.adjoint() - DMatrix::<Complex<f64>>::identity(n, n))
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    if dev.is_nan() || dev > 1e-10 {
        return Err(Error::NotUnitary(dev));
    }
    let mut s = DMatrix::zeros(2 * n, 2 * n);
    for j in 0..n {
        for k in 0..n {
            let z = u[(j, k)];
            s[(2 * j, 2 * k)] = z.re;
            s[(2 * j, 2 * k + 1)] = -z.im;
            s[(2 * j + 1, 2 * k)] = z.im;
            s[(2 * j + 1, 2 * k + 1)] = z.re;
        }
    }
    Ok(s)
}

/// TMSV on `(a, b)` and vacuum noise on `c`.
pub fn input_cm(spec: &InputSpec) -> CovarianceMatrix {
    let r = spec.r();
    let ch = (2.0 * r).cosh() / 2.0;
    let sh = (2.0 * r).sinh() / 2.0 * TMSV_SIGN;
    let mut m = DMatrix::identity(6, 6) * 0.5;
    for q in 0..4 {
        m[(q, q)] = ch;
    }
    m[(0, 2)] = sh;
    m[(2, 0)] = sh;
    m[(1, 3)] = -sh;
    m[(3, 1)] = -sh;
    CovarianceMatrix::new(m).expect("6x6 finite matrix")
}

fn block(scale: f64, a: [[f64; 2]; 2]) -> DMatrix<f64> {
    DMatrix::from_fn(2, 2, |r, c| scale * a[r][c])
}

/// Closed-form output covariance matrix, independent of the coherent
/// amplitude.
///
/// `V₁₁ = V₂₂` and `V₁₃ = V₂₃`; `V₃₃` shares the diagonal of `V₁₁` but its
/// x–p correlation has the opposite sign.
pub fn ideal_output_cm(lambda: f64) -> Result<CovarianceMatrix> {
    check_lambda(lambda)?;
    let l = lambda;
    let s3 = 3f64.sqrt();
    let v11 = block(l / 3.0, [[2.0 * l - 1.0, -s3], [-s3, 2.0 * l + 1.0]]);
    let v33 = block(l / 3.0, [[2.0 * l - 1.0, s3], [s3, 2.0 * l + 1.0]]);
    let v12 = block(l / 6.0, [[1.0 - 2.0 * l, s3], [s3, -1.0 - 2.0 * l]]);
    let v13 = block(l / 6.0, [[l - 2.0, -s3 * l], [s3 * l, l + 2.0]]);

    let blocks = [[&v11, &v12, &v13], [&v12, &v11, &v13], [&v13, &v13, &v33]];
    let f = 1.0 / (1.0 - l * l);
    let mut m = DMatrix::identity(6, 6) * 0.5;
    for i in 0..3 {
        for j in 0..3 {
            // Lower blocks are transposes of the upper ones.
            let b = if i <= j {
                blocks[i][j].clone()
            } else {
                blocks[j][i].transpose()
            };
            for r in 0..2 {
                for c in 0..2 {
                    m[(2 * i + r, 2 * j + c)] += f * b[(r, c)];
                }
            }
        }
    }
    CovarianceMatrix::new(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum QuadratureKind {
    X,
    P,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Quadrature {
    pub kind: QuadratureKind,
    pub mode: Mode,
}

impl Quadrature {
    pub fn x(mode: Mode) -> Self {
        Self {
            kind: QuadratureKind::X,
            mode,
        }
    }

    pub fn p(mode: Mode) -> Self {
        Self {
            kind: QuadratureKind::P,
            mode,
        }
    }

    /// Row/column in the covariance matrix.
    pub fn index(self) -> usize {
        2 * self.mode.index() + (self.kind == QuadratureKind::P) as usize
    }
}

impl fmt::Display for Quadrature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = match self.kind {
            QuadratureKind::X => 'x',
            QuadratureKind::P => 'p',
        };
        write!(f, "{k}_{}", self.mode)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CmElement {
    pub row: Quadrature,
    pub col: Quadrature,
    pub value: f64,
}

/// Element-by-element table of the output covariance matrix, written out
/// independently of [`ideal_output_cm`] so the two can be compared.
pub fn appendix_cm_elements(lambda: f64) -> Result<Vec<CmElement>> {
    use Mode::{A, B, C};
    check_lambda(lambda)?;
    let l = lambda;
    let s3 = 3f64.sqrt();
    let d = 1.0 - l * l;
    let x = Quadrature::x;
    let p = Quadrature::p;
    let e = |row, col, value| CmElement { row, col, value };

    let mut out = Vec::with_capacity(21);
    for m in Mode::ALL {
        out.push(e(x(m), x(m), (3.0 - 2.0 * l + l * l) / (6.0 * d)));
        out.push(e(p(m), p(m), (3.0 + 2.0 * l + l * l) / (6.0 * d)));
    }
    out.push(e(x(A), p(A), -s3 * l / (3.0 * d)));
    out.push(e(x(B), p(B), -s3 * l / (3.0 * d)));
    out.push(e(x(C), p(C), s3 * l / (3.0 * d)));
    out.push(e(p(A), x(C), s3 * l * l / (6.0 * d)));
    out.push(e(p(B), x(C), s3 * l * l / (6.0 * d)));
    out.push(e(x(B), p(C), -s3 * l * l / (6.0 * d)));
    out.push(e(p(C), x(A), -s3 * l * l / (6.0 * d)));
    out.push(e(p(B), p(C), l * (l + 2.0) / (6.0 * d)));
    out.push(e(p(C), p(A), l * (l + 2.0) / (6.0 * d)));
    out.push(e(x(B), x(C), l * (l - 2.0) / (6.0 * d)));
    out.push(e(x(C), x(A), l * (l - 2.0) / (6.0 * d)));
    out.push(e(p(A), p(B), -l * (1.0 + 2.0 * l) / (6.0 * d)));
    out.push(e(x(A), x(B), l * (1.0 - 2.0 * l) / (6.0 * d)));
    out.push(e(x(A), p(B), s3 * l / (6.0 * d)));
    out.push(e(x(B), p(A), s3 * l / (6.0 * d)));
    Ok(out)
}

/// Builds a full matrix from the element table; entries absent from the table
/// are zero.
pub fn appendix_cm(lambda: f64) -> Result<CovarianceMatrix> {
    let mut m = DMatrix::zeros(6, 6);
    for el in appendix_cm_elements(lambda)? {
        m[(el.row.index(), el.col.index())] = el.value;
        m[(el.col.index(), el.row.index())] = el.value;
    }
    CovarianceMatrix::new(m)
}

/// The tritter acting on the input state, `S V_in Sᵀ` with `S` the
/// symplectic image of `U†` (the state-picture action of the mode map).
pub fn output_cm_via_transform(spec: &InputSpec) -> Result<CovarianceMatrix> {
    let s = unitary_to_symplectic(&tritter_unitary().adjoint())?;
    input_cm(spec).transform(&s)
}

/// Quadrature means of the output; linear in the coherent amplitude.
pub fn first_moments(spec: &InputSpec) -> DisplacementVector {
    let alpha_in = DVector::from_vec(vec![Complex::new(0.0, 0.0), Complex::new(0.0, 0.0), spec.gamma]);
    let alpha = tritter_unitary().adjoint() * alpha_in;
    let s2 = 2f64.sqrt();
    DisplacementVector(DVector::from_iterator(
        6,
        alpha.iter().flat_map(|z| [s2 * z.re, s2 * z.im]),
    ))
}
