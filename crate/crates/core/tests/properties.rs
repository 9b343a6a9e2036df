use nalgebra::{Complex, DMatrix};
use proptest::prelude::*;

use tritter_core::analysis::{classify_cm, RegionLabel};
use tritter_core::io::{cm_record, fmt_sig, parse_cm_json};
use tritter_core::measures::closed_form::{checked_formula, Context, Formula};
use tritter_core::measures::{compare, monogamy_residuals, Agreement, MeasureId};
use tritter_core::symplectic::{is_physical, partial_transpose, schur_complement, SymplecticForm};
use tritter_core::tritter::unitary_to_symplectic;
use tritter_core::{
    apply_loss, gaussian_steering, ideal_output_cm, log_negativity, output_cm_via_transform, symplectic_eigenvalues,
    CovarianceMatrix, InputSpec, LossConfig, LossSetting, ModePartition, Roles, Scenario, ScenarioId,
};

fn lambda() -> impl Strategy<Value = f64> {
    0.0..0.98f64
}

fn trans() -> impl Strategy<Value = f64> {
    0.0..=1.0f64
}

fn lossy_state() -> impl Strategy<Value = CovarianceMatrix> {
    (lambda(), trans(), trans(), trans()).prop_map(|(l, a, b, c)| {
        apply_loss(&ideal_output_cm(l).unwrap(), &LossConfig::new([a, b, c]).unwrap()).unwrap()
    })
}

/// Passive three-mode unitary from two beam splitters and phases.
fn passive_symplectic() -> impl Strategy<Value = DMatrix<f64>> {
    (0.0..6.3f64, 0.0..6.3f64, 0.0..6.3f64, 0.0..6.3f64, 0.0..6.3f64).prop_map(|(t1, t2, p1, p2, p3)| {
        let c = |x: f64| Complex::new(x, 0.0);
        let bs = |i: usize, j: usize, th: f64| {
            let mut u = DMatrix::<Complex<f64>>::identity(3, 3);
            u[(i, i)] = c(th.cos());
            u[(j, j)] = c(th.cos());
            u[(i, j)] = c(th.sin());
            u[(j, i)] = c(-th.sin());
            u
        };
        let ph = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex::from_polar(1.0, p1),
            Complex::from_polar(1.0, p2),
            Complex::from_polar(1.0, p3),
        ]));
        unitary_to_symplectic(&(ph * bs(0, 1, t1) * bs(1, 2, t2))).unwrap()
    })
}

/// Local single-mode squeezing on each mode.
fn local_squeezer(r: [f64; 3]) -> DMatrix<f64> {
    let mut s = DMatrix::zeros(6, 6);
    for (m, &rm) in r.iter().enumerate() {
        s[(2 * m, 2 * m)] = rm.exp();
        s[(2 * m + 1, 2 * m + 1)] = (-rm).exp();
    }
    s
}

fn part(a: &[usize], b: &[usize]) -> ModePartition {
    ModePartition::new(3, a.to_vec(), b.to_vec()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn loss_channels_compose(l in lambda(), a in trans(), b in trans(), c in trans(), d in trans(), e in trans(), f in trans()) {
        let v = ideal_output_cm(l).unwrap();
        let twice = apply_loss(&apply_loss(&v, &LossConfig::new([a, b, c]).unwrap()).unwrap(), &LossConfig::new([d, e, f]).unwrap()).unwrap();
        let once = apply_loss(&v, &LossConfig::new([a * d, b * e, c * f]).unwrap()).unwrap();
        prop_assert!(twice.max_abs_diff(&once) < 1e-12);
    }

    #[test]
    fn loss_keeps_states_physical(v in lossy_state()) {
        prop_assert!(is_physical(&v).unwrap());
        prop_assert!(symplectic_eigenvalues(&v).unwrap()[0] >= 0.5 - 1e-10);
    }

    #[test]
    fn symplectic_spectrum_is_invariant(v in lossy_state(), s in passive_symplectic(), r in prop::array::uniform3(-0.8..0.8f64)) {
        let before = symplectic_eigenvalues(&v).unwrap();
        let sq = local_squeezer(r);
        let omega = SymplecticForm::new(3).matrix();
        prop_assert!((&sq * &omega * sq.transpose() - &omega).abs().max() < 1e-12);
        let w = v.transform(&(sq * s)).unwrap();
        let after = symplectic_eigenvalues(&w).unwrap();
        for (x, y) in before.iter().zip(&after) {
            prop_assert!((x - y).abs() < 1e-8 * x.max(1.0), "{x} vs {y}");
        }
    }

    #[test]
    fn partial_transpose_is_an_involution(v in lossy_state(), modes in prop::sample::subsequence(vec![0usize, 1, 2], 1..=3)) {
        let twice = partial_transpose(&partial_transpose(&v, &modes).unwrap(), &modes).unwrap();
        prop_assert_eq!(&twice, &v);
    }

    #[test]
    fn schur_complements_are_positive(v in lossy_state(), k in 0usize..3) {
        // Positive definite, though not necessarily a physical state: that
        // gap is what steering measures.
        let others: Vec<usize> = (0..3).filter(|&m| m != k).collect();
        for p in [part(&[k], &others), part(&others, &[k]), part(&[k], &others[..1])] {
            let cond = schur_complement(&v, &p).unwrap();
            let min = cond.matrix().clone().symmetric_eigen().eigenvalues.min();
            prop_assert!(min > -1e-12, "{min}");
        }
    }

    #[test]
    fn measures_are_nonnegative_and_ordered(v in lossy_state(), k in 0usize..3) {
        let others: Vec<usize> = (0..3).filter(|&m| m != k).collect();
        let e = log_negativity(&v, &part(&[k], &others)).unwrap();
        let s1 = gaussian_steering(&v, &part(&[k], &others)).unwrap();
        let s2 = gaussian_steering(&v, &part(&others, &[k])).unwrap();
        prop_assert!(e >= 0.0 && s1 >= 0.0 && s2 >= 0.0);
        // Steerable states are entangled.
        if s1 > 0.0 || s2 > 0.0 {
            prop_assert!(e > 0.0);
        }
        let swapped = log_negativity(&v, &part(&others, &[k])).unwrap();
        prop_assert!((e - swapped).abs() < 1e-9);
    }

    #[test]
    fn steering_monogamy_under_any_loss(v in lossy_state(), k in 0usize..3) {
        let mode = tritter_core::Mode::from_index(k).unwrap();
        let (into_k, from_k) = monogamy_residuals(&v, mode).unwrap();
        prop_assert!(into_k >= -1e-12, "{into_k}");
        prop_assert!(from_k >= -1e-12, "{from_k}");
    }

    #[test]
    fn pairwise_steering_vanishes_under_any_loss(v in lossy_state(), a in 0usize..3, b in 0usize..3) {
        prop_assume!(a != b);
        prop_assert_eq!(gaussian_steering(&v, &part(&[a], &[b])).unwrap(), 0.0);
    }

    #[test]
    fn displacement_leaves_the_covariance_alone(l in lambda(), re in -5.0..5.0f64, im in -5.0..5.0f64) {
        let zero = output_cm_via_transform(&InputSpec::from_lambda(l, Complex::new(0.0, 0.0)).unwrap()).unwrap();
        let shifted = output_cm_via_transform(&InputSpec::from_lambda(l, Complex::new(re, im)).unwrap()).unwrap();
        prop_assert_eq!(zero, shifted);
    }

    #[test]
    fn trusted_closed_forms_match_numerics(l in 0.01..0.95f64, t in trans(), id in 1u8..=5) {
        let sid = ScenarioId::new(id).unwrap();
        let roles = Roles::default();
        let v = apply_loss(&ideal_output_cm(l).unwrap(), &LossSetting::Scenario(Scenario::new(sid, t, roles).unwrap()).config()).unwrap();
        for m in MeasureId::defaults() {
            let Some(f) = m.formula(&roles, Context::Scenario(sid)) else { continue };
            let Some(closed) = checked_formula(f, l, t) else { continue };
            let numeric = m.evaluate(&v, &roles).unwrap();
            let agreement = compare(&numeric, &closed.unwrap());
            prop_assert!(matches!(agreement, Agreement::Match { .. }), "{m} {f}: {agreement:?}");
        }
    }

    #[test]
    fn unit_transmission_scenarios_are_ideal(l in lambda(), id in 1u8..=5) {
        let s = Scenario::new(ScenarioId::new(id).unwrap(), 1.0, Roles::default()).unwrap();
        let v = apply_loss(&ideal_output_cm(l).unwrap(), &LossSetting::Scenario(s).config()).unwrap();
        prop_assert_eq!(&v, &ideal_output_cm(l).unwrap());
        let region = classify_cm(&v, &Roles::default()).unwrap();
        prop_assert_eq!(region, if l > 0.0 { RegionLabel::I } else { RegionLabel::Separable });
    }

    #[test]
    fn measure_ids_round_trip(kind in 0usize..2, target in 0usize..4, ctx in 0u8..7) {
        let k = ["E", "S"][kind];
        let t = match (kind, target) {
            (0, 0) => "pair", (0, 1) => "1v2", (0, 2) => "a|bc", (0, _) => "ab|c",
            (_, 0) => "k->ij", (_, 1) => "ij->k", (_, 2) => "b->c", _ => "ca->b",
        };
        let mut s = format!("{k}:{t}");
        match ctx {
            0 => {}
            6 => s.push_str("@ideal"),
            n => s.push_str(&format!("@s{n}")),
        }
        let id: MeasureId = s.parse().unwrap();
        prop_assert_eq!(id.to_string(), s);
    }

    #[test]
    fn twelve_significant_digits(x in prop::num::f64::NORMAL) {
        let back: f64 = fmt_sig(x).parse().unwrap();
        prop_assert!((back - x).abs() <= 5e-12 * x.abs());
    }

    #[test]
    fn cm_json_round_trip(v in lossy_state()) {
        let back = parse_cm_json(&cm_record(&v, 0.5, &LossSetting::Ideal, "closed-form").to_json()).unwrap();
        prop_assert!(back.max_abs_diff(&v) <= 1e-12);
    }
}

#[test]
fn ideal_formula_catalogue_is_self_consistent() {
    // At T = 1 every trusted scenario expression reduces to its ideal form.
    for f in Formula::catalogue() {
        let ideal = match f {
            Formula::SplitEntanglement(Context::Scenario(_)) => Formula::SplitEntanglement(Context::Ideal),
            Formula::SteeringFromSingle(Context::Scenario(_)) => Formula::SteeringFromSingle(Context::Ideal),
            Formula::SteeringFromPair(Context::Scenario(_)) => Formula::SteeringFromPair(Context::Ideal),
            _ => continue,
        };
        let Some(v) = checked_formula(f, 0.6, 1.0) else {
            continue;
        };
        let want = checked_formula(ideal, 0.6, 1.0).unwrap().unwrap();
        assert!((v.unwrap().value - want.value).abs() < 1e-12, "{f}");
    }
}
