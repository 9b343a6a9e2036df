//! Pure-loss channels on each output mode and the five loss scenarios.

use std::fmt;

use crate::error::{Error, Result};
use crate::measures::closed_form::Context;
use crate::symplectic::CovarianceMatrix;
use crate::tritter::Mode;

/// Per-mode transmissivities `(T_a, T_b, T_c)`, each in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossConfig {
    t: [f64; 3],
}

impl LossConfig {
    pub fn new(t: [f64; 3]) -> Result<Self> {
        for (k, &ti) in t.iter().enumerate() {
            if !(0.0..=1.0).contains(&ti) {
                return Err(Error::Domain(format!(
                    "transmissivity of mode {} must lie in [0, 1], got {ti}",
                    Mode::ALL[k]
                )));
            }
        }
        Ok(Self { t })
    }

    pub fn lossless() -> Self {
        Self { t: [1.0; 3] }
    }

    pub fn uniform(t: f64) -> Result<Self> {
        Self::new([t; 3])
    }

    /// Transmissivity from a beam-splitter angle, `T = cos²θ`.
    pub fn from_angles(theta: [f64; 3]) -> Result<Self> {
        Self::new(theta.map(|th| th.cos().powi(2)))
    }

    pub fn transmissivities(&self) -> [f64; 3] {
        self.t
    }

    pub fn of(&self, mode: Mode) -> f64 {
        self.t[mode.index()]
    }
}

impl fmt::Display for LossConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.t[0], self.t[1], self.t[2])
    }
}

/// Scenario number, 1 through 5.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ScenarioId(u8);

impl ScenarioId {
    pub const ALL: [ScenarioId; 5] = [
        ScenarioId(1),
        ScenarioId(2),
        ScenarioId(3),
        ScenarioId(4),
        ScenarioId(5),
    ];

    pub fn new(id: u8) -> Result<Self> {
        if (1..=5).contains(&id) {
            Ok(Self(id))
        } else {
            Err(Error::Domain(format!("scenario must be 1..=5, got {id}")))
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Which mode plays the single party `k` and which member of the remaining
/// pair is lossy in Scenarios 2 and 4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Roles {
    k: Mode,
    lossy_member: Mode,
}

impl Default for Roles {
    fn default() -> Self {
        Self {
            k: Mode::C,
            lossy_member: Mode::A,
        }
    }
}

impl Roles {
    pub fn new(k: Mode, lossy_member: Mode) -> Result<Self> {
        if k == lossy_member {
            return Err(Error::Domain(format!(
                "lossy pair member must differ from the single mode k = {k}"
            )));
        }
        Ok(Self { k, lossy_member })
    }

    /// Roles with the given `k` and the first remaining mode as lossy member.
    pub fn with_k(k: Mode) -> Self {
        Self {
            k,
            lossy_member: k.others()[0],
        }
    }

    pub fn k(&self) -> Mode {
        self.k
    }

    pub fn lossy_member(&self) -> Mode {
        self.lossy_member
    }

    /// The pair `(i, j)` with `i` the lossy member.
    pub fn pair(&self) -> (Mode, Mode) {
        let [x, y] = self.k.others();
        if x == self.lossy_member {
            (x, y)
        } else {
            (y, x)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub id: ScenarioId,
    shared_t: f64,
    pub roles: Roles,
}

impl Scenario {
    pub fn new(id: ScenarioId, shared_t: f64, roles: Roles) -> Result<Self> {
        if !(0.0..=1.0).contains(&shared_t) {
            return Err(Error::Domain(format!(
                "transmissivity must lie in [0, 1], got {shared_t}"
            )));
        }
        Ok(Self { id, shared_t, roles })
    }

    pub fn shared_t(&self) -> f64 {
        self.shared_t
    }

    /// Same scenario and roles at a different transmissivity.
    pub fn at(&self, t: f64) -> Result<Self> {
        Self::new(self.id, t, self.roles)
    }

    /// Modes that see the shared transmissivity.
    pub fn lossy_modes(&self) -> Vec<Mode> {
        let k = self.roles.k;
        let (i, j) = self.roles.pair();
        match self.id.0 {
            1 => vec![k],
            2 => vec![i],
            3 => vec![i, j],
            4 => vec![i, k],
            _ => Mode::ALL.to_vec(),
        }
    }
}

pub fn scenario_config(s: &Scenario) -> LossConfig {
    let mut t = [1.0; 3];
    for m in s.lossy_modes() {
        t[m.index()] = s.shared_t;
    }
    LossConfig { t }
}

/// Loss applied to the ideal output: none, a named scenario, or explicit
/// per-mode transmissivities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LossSetting {
    Ideal,
    Scenario(Scenario),
    Custom(LossConfig),
}

impl LossSetting {
    pub fn config(&self) -> LossConfig {
        match self {
            LossSetting::Ideal => LossConfig::lossless(),
            LossSetting::Scenario(s) => scenario_config(s),
            LossSetting::Custom(c) => *c,
        }
    }

    /// Closed-form context, when the setting has one.
    pub fn context(&self) -> Option<Context> {
        match self {
            LossSetting::Ideal => Some(Context::Ideal),
            LossSetting::Scenario(s) => Some(Context::Scenario(s.id)),
            LossSetting::Custom(c) if c.t == [1.0; 3] => Some(Context::Ideal),
            LossSetting::Custom(_) => None,
        }
    }

    /// Shared transmissivity (1 for the ideal case).
    pub fn shared_t(&self) -> Option<f64> {
        match self {
            LossSetting::Ideal => Some(1.0),
            LossSetting::Scenario(s) => Some(s.shared_t),
            LossSetting::Custom(_) => None,
        }
    }

    pub fn label(&self) -> String {
        match self {
            LossSetting::Ideal => "ideal".into(),
            LossSetting::Scenario(s) => format!("s{}", s.id),
            LossSetting::Custom(_) => "custom".into(),
        }
    }
}

/// Applies the loss map `V_ij → √(T_i T_j) V_ij` (i ≠ j),
/// `V_ii → T_i V_ii + (1 − T_i) I/2`.
pub fn apply_loss(v: &CovarianceMatrix, cfg: &LossConfig) -> Result<CovarianceMatrix> {
    if v.n_modes() != 3 {
        return Err(Error::Dimension(format!(
            "loss acts on three modes, state has {}",
            v.n_modes()
        )));
    }
    let t = cfg.t;
    let mut m = v.matrix().clone();
    for i in 0..3 {
        for j in 0..3 {
            for r in 0..2 {
                for c in 0..2 {
                    let (row, col) = (2 * i + r, 2 * j + c);
                    m[(row, col)] = if i == j {
                        let vac = if r == c { 0.5 } else { 0.0 };
                        t[i] * m[(row, col)] + (1.0 - t[i]) * vac
                    } else {
                        (t[i] * t[j]).sqrt() * m[(row, col)]
                    };
                }
            }
        }
    }
    CovarianceMatrix::new(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::{is_physical, symplectic_eigenvalues};
    use crate::tritter::ideal_output_cm;

    fn sc(id: u8, t: f64) -> Scenario {
        Scenario::new(ScenarioId::new(id).unwrap(), t, Roles::default()).unwrap()
    }

    #[test]
    fn identity_and_full_loss() {
        let v = ideal_output_cm(0.6).unwrap();
        assert_eq!(apply_loss(&v, &LossConfig::lossless()).unwrap(), v);
        assert_eq!(
            apply_loss(&v, &LossConfig::uniform(0.0).unwrap()).unwrap(),
            CovarianceMatrix::vacuum(3)
        );
    }

    #[test]
    fn scenario_triples() {
        assert_eq!(scenario_config(&sc(1, 0.4)).transmissivities(), [1.0, 1.0, 0.4]);
        assert_eq!(scenario_config(&sc(2, 0.4)).transmissivities(), [0.4, 1.0, 1.0]);
        assert_eq!(scenario_config(&sc(3, 0.4)).transmissivities(), [0.4, 0.4, 1.0]);
        assert_eq!(scenario_config(&sc(4, 0.4)).transmissivities(), [0.4, 1.0, 0.4]);
        assert_eq!(scenario_config(&sc(5, 0.4)).transmissivities(), [0.4, 0.4, 0.4]);
    }

    #[test]
    fn scenario_roles_relabel() {
        let roles = Roles::new(Mode::A, Mode::C).unwrap();
        let s = Scenario::new(ScenarioId::new(4).unwrap(), 0.3, roles).unwrap();
        assert_eq!(scenario_config(&s).transmissivities(), [0.3, 1.0, 0.3]);
        assert!(Roles::new(Mode::B, Mode::B).is_err());
    }

    #[test]
    fn scenario_five_is_uniform() {
        let v = ideal_output_cm(0.8).unwrap();
        let a = apply_loss(&v, &scenario_config(&sc(5, 0.37))).unwrap();
        let b = apply_loss(&v, &LossConfig::uniform(0.37).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn domain_errors() {
        assert!(LossConfig::new([1.1, 1.0, 1.0]).is_err());
        assert!(LossConfig::new([1.0, -0.1, 1.0]).is_err());
        assert!(ScenarioId::new(0).is_err());
        assert!(ScenarioId::new(6).is_err());
        assert!(Scenario::new(ScenarioId::new(1).unwrap(), 2.0, Roles::default()).is_err());
    }

    #[test]
    fn angles() {
        let cfg = LossConfig::from_angles([0.0, std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_4]).unwrap();
        let t = cfg.transmissivities();
        assert_eq!(t[0], 1.0);
        assert!(t[1] < 1e-30);
        assert!((t[2] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn heavy_loss_stays_physical() {
        let v = ideal_output_cm(0.9).unwrap();
        let w = apply_loss(&v, &scenario_config(&sc(5, 0.3))).unwrap();
        assert!(is_physical(&w).unwrap());
        // Uniform loss leaves the vacuum normal mode untouched.
        let nu = symplectic_eigenvalues(&w).unwrap();
        assert!((nu[0] - 0.5).abs() < 1e-12);
        assert!(nu[2] > 0.5);
    }
}
