use num_rational::Ratio;
use proptest::prelude::*;
use ruin_core::metrics::{kantorovich, nu_gamma, q_y, sup_distance, tail_crossings};
use ruin_core::quadrature::integrate_to_infinity;
use ruin_core::{partial_exp_sum, ClaimDistribution, GridFunction, QuadratureSettings, RenewalProblem};

fn q() -> QuadratureSettings {
    QuadratureSettings::default()
}

/// Exponential, two-component hyperexponential or Erlang with moderate rates.
fn claim_law() -> impl Strategy<Value = ClaimDistribution> {
    prop_oneof![
        (0.3f64..5.0).prop_map(|r| ClaimDistribution::exponential(r).unwrap()),
        (0.05f64..0.95, 0.3f64..5.0, 0.3f64..5.0)
            .prop_map(|(p, a, b)| ClaimDistribution::hyper_exponential(&[p, 1.0 - p], &[a, b]).unwrap()),
        (1u32..5, 0.5f64..5.0).prop_map(|(k, r)| ClaimDistribution::erlang(k, r).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn tails_are_nonincreasing(d in claim_law(), a in 0.0f64..10.0, b in 0.0f64..10.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(d.tail(hi) <= d.tail(lo));
    }

    #[test]
    fn tail_integrates_to_mean(d in claim_law()) {
        let r = d.slowest_rate().unwrap();
        let integral = integrate_to_infinity(|t| d.tail(t), 0.0, 10.0, r, &q()).unwrap();
        prop_assert!((integral - d.mean().unwrap()).abs() <= 1e-8);
    }

    #[test]
    fn weighted_moment_identity(d in claim_law(), gamma in 0.0f64..2.5) {
        let lhs = d.weighted_tail_moment(gamma, &q()).unwrap();
        let rhs = (d.shifted_power_moment(gamma, &q()).unwrap() - 1.0) / (gamma + 1.0);
        prop_assert!((lhs - rhs).abs() <= 1e-7 * rhs.max(1.0));
    }

    #[test]
    fn equilibrium_mean(d in claim_law()) {
        let mu = d.mean().unwrap();
        let expected = d.raw_moment(2).unwrap() / (2.0 * mu);
        let eq = d.equilibrium().unwrap();
        prop_assert!((eq.mean().unwrap() - expected).abs() <= 1e-9 * expected);
        let r = eq.slowest_rate().unwrap();
        let by_quadrature = integrate_to_infinity(|t| eq.tail(t), 0.0, 10.0, r, &q()).unwrap();
        prop_assert!((by_quadrature - expected).abs() <= 1e-7 * expected.max(1.0));
    }

    #[test]
    fn metric_axioms(a in claim_law(), b in claim_law(), c in claim_law(), gamma in 0.0f64..1.5) {
        let tol = 10.0 * q().abs_tol + 1e-8;
        let ab = nu_gamma(&a, &b, gamma, &q()).unwrap();
        let ba = nu_gamma(&b, &a, gamma, &q()).unwrap();
        let bc = nu_gamma(&b, &c, gamma, &q()).unwrap();
        let ac = nu_gamma(&a, &c, gamma, &q()).unwrap();
        prop_assert!((ab - ba).abs() <= tol);
        prop_assert!(ac <= ab + bc + tol);
        prop_assert!(nu_gamma(&a, &a, gamma, &q()).unwrap() == 0.0);
        prop_assert!(nu_gamma(&a, &b, gamma + 0.5, &q()).unwrap() >= ab - tol);
        let k = kantorovich(&a, &b, &q()).unwrap();
        prop_assert!((q_y(&a, &b, 0.0, &q()).unwrap() - k).abs() <= tol);
    }

    #[test]
    fn q_y_nonincreasing(a in claim_law(), b in claim_law(), y in 0.0f64..3.0, dy in 0.0f64..2.0) {
        prop_assert!(q_y(&a, &b, y + dy, &q()).unwrap() <= q_y(&a, &b, y, &q()).unwrap() + 1e-9);
    }

    #[test]
    fn crossings_bracket_sign_changes(a in claim_law(), b in claim_law()) {
        prop_assume!(a != b);
        let crossings = tail_crossings(&a, &b, &q()).unwrap();
        let diff = |t: f64| a.tail(t) - b.tail(t);
        for &t in &crossings {
            let (l, r) = (diff(t - 1e-6), diff(t + 1e-6));
            prop_assert!(l * r <= 0.0 || l.abs().max(r.abs()) < 1e-9);
        }
        // every sign change on a fine sample lies near a reported crossing
        let end = 30.0 / a.slowest_rate().unwrap().min(b.slowest_rate().unwrap());
        let pts: Vec<f64> = (1..=10_000).map(|i| i as f64 * end / 10_000.0).collect();
        for w in pts.windows(2) {
            let (l, r) = (diff(w[0]), diff(w[1]));
            if l.abs() > 1e-12 && r.abs() > 1e-12 && (l > 0.0) != (r > 0.0) {
                prop_assert!(crossings.iter().any(|c| *c >= w[0] - 1e-9 && *c <= w[1] + 1e-9), "missed crossing in {:?}", w);
            }
        }
    }

    #[test]
    fn sup_distance_axioms(a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let x = GridFunction::new(0.1, vec![a; 20]).unwrap();
        let y = GridFunction::new(0.1, vec![b; 20]).unwrap();
        prop_assert!((sup_distance(&x, &y).unwrap().value - (a - b).abs()).abs() < 1e-15);
        prop_assert_eq!(sup_distance(&x, &x).unwrap().value, 0.0);
    }

    #[test]
    fn renewal_operator_contracts(
        phi in 0.05f64..0.95,
        rate in 0.5f64..2.0,
        xs in prop::collection::vec(-1.0f64..1.0, 257),
        ys in prop::collection::vec(-1.0f64..1.0, 257),
    ) {
        let h = 1.0 / 8.0;
        let p = RenewalProblem::from_fns(phi, h, 32.0, |u| phi * (-rate * u).exp(), |t| rate * (-rate * t).exp()).unwrap();
        let tx = p.apply(&xs).unwrap();
        let ty = p.apply(&ys).unwrap();
        let lhs = tx.iter().zip(&ty).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let sup = xs.iter().zip(&ys).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        prop_assert!(lhs <= p.discrete_modulus() * sup + 1e-12);
        prop_assert!(p.discrete_modulus() <= phi * (1.0 + 2.0 * h * rate));
    }
}

#[test]
fn partial_exp_sum_recurrence_is_exact() {
    // z = k/4 keeps every S_m(z), m <= 20, exactly representable as Ratio<i128>
    for k in 0..=8i128 {
        let z = Ratio::new(k, 4);
        let mut exact = Ratio::from_integer(0i128);
        let mut term = Ratio::from_integer(1i128);
        for m in 0..=20i64 {
            if m > 0 {
                term = term * z / Ratio::from_integer(m as i128);
            }
            let prev = exact;
            exact = prev + term;
            assert_eq!(exact, prev + term);
            let as_f64 = *exact.numer() as f64 / *exact.denom() as f64;
            let zf = k as f64 / 4.0;
            let got = partial_exp_sum(m, zf);
            assert!((got - as_f64).abs() <= 4.0 * f64::EPSILON * as_f64, "m={m} z={zf}: {got} vs {as_f64}");
        }
    }
    assert_eq!(partial_exp_sum(-1, 3.0), 0.0);
}
