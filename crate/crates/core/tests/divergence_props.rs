mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statel_core::divergence::{check_divergence_axioms, Axiom};
use statel_core::{chi2, js_div, max_div, total_variation, DivergenceKind, DivergenceTag, Distribution};

fn dist() -> impl Strategy<Value = Vec<(usize, f64)>> {
    (1usize..=6, any::<u64>(), any::<bool>()).prop_map(|(k, seed, zeros)| {
        common::dyadic_weights(k, 512, zeros, &mut ChaCha8Rng::seed_from_u64(seed))
    })
}

fn d(w: &[(usize, f64)]) -> Distribution<usize> {
    common::distribution(w)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn singleton_max_matches_subsets(mu in dist(), nu in dist()) {
        let fast = max_div(&d(&mu), &d(&nu)).value();
        let slow = common::max_div_brute(&mu, &nu);
        prop_assert!(fast == slow, "{} vs {}", fast, slow);
    }

    #[test]
    fn tv_is_a_metric(a in dist(), b in dist(), c in dist()) {
        let (a, b, c) = (d(&a), d(&b), d(&c));
        let ab = total_variation(&a, &b);
        prop_assert_eq!(ab.to_bits(), total_variation(&b, &a).to_bits());
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert_eq!(total_variation(&a, &a), 0.0);
        prop_assert!(total_variation(&a, &c) <= ab + total_variation(&b, &c));
        prop_assert!(ab > 0.0 || a == b);
    }

    #[test]
    fn divergences_vanish_exactly_on_equal_inputs(a in dist(), b in dist()) {
        let (a, b) = (d(&a), d(&b));
        for kind in [DivergenceTag::Chi2, DivergenceTag::MaxDiv, DivergenceTag::Tv, DivergenceTag::Js] {
            let k = DivergenceKind::new(kind);
            prop_assert_eq!(k.eval(&a, &a).value(), 0.0);
            let ab = k.eval(&a, &b).value();
            prop_assert!(ab >= 0.0);
            if a != b {
                prop_assert!(ab > 0.0, "{} is zero on distinct inputs", kind);
            }
        }
    }

    #[test]
    fn js_is_symmetric_and_bounded(a in dist(), b in dist()) {
        let (a, b) = (d(&a), d(&b));
        let ab = js_div(&a, &b);
        prop_assert!((ab - js_div(&b, &a)).abs() <= 1e-15);
        prop_assert!(ab <= std::f64::consts::LN_2 + 1e-12);
    }

    #[test]
    fn symmetrized_kind_is_the_larger_direction(a in dist(), b in dist()) {
        let (a, b) = (d(&a), d(&b));
        for tag in [DivergenceTag::Chi2, DivergenceTag::MaxDiv] {
            let sym = DivergenceKind { tag, symmetrize: true };
            let one = DivergenceKind::new(tag);
            prop_assert_eq!(sym.eval(&a, &b), one.eval(&a, &b).max(one.eval(&b, &a)));
            prop_assert_eq!(sym.eval(&a, &b), sym.eval(&b, &a));
        }
    }

    #[test]
    fn chi2_infinite_only_outside_support(a in dist(), b in dist()) {
        let (a, b) = (d(&a), d(&b));
        let v = chi2(&a, &b);
        prop_assert!(!v.is_infinite());
        let m = max_div(&a, &b);
        prop_assert_eq!(m.is_infinite(), a.support().any(|k| !b.contains(k)));
    }
}

#[test]
fn worked_values() {
    let mu = Distribution::new([("A", 0.5), ("B", 0.5)]).unwrap();
    let nu = Distribution::new([("A", 0.4), ("B", 0.6)]).unwrap();
    assert!((chi2(&mu, &nu).value() - 0.04).abs() < 1e-12);
    assert!((chi2(&nu, &mu).value() - 0.0416667).abs() < 1e-7);
    assert!((total_variation(&mu, &nu) - 0.1).abs() < 1e-15);
    assert!((max_div(&nu, &mu).value() - (1.2f64).ln()).abs() < 1e-15);
}

#[test]
fn axiom_reports_match_each_kind() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for tag in [DivergenceTag::Chi2, DivergenceTag::MaxDiv] {
        let r = check_divergence_axioms(DivergenceKind::new(tag), 300, &mut rng);
        assert!(r.result(Axiom::NonNegativity).holds && r.result(Axiom::IdentityOfIndiscernibles).holds);
        let s = r.result(Axiom::Symmetry);
        assert!(!s.holds && s.witness.is_some(), "{tag} symmetry should fail with a witness");
    }
    let r = check_divergence_axioms(DivergenceKind::new(DivergenceTag::Tv), 300, &mut rng);
    for ax in [Axiom::NonNegativity, Axiom::IdentityOfIndiscernibles, Axiom::Symmetry, Axiom::Subadditivity] {
        assert!(r.result(ax).holds, "tv {ax:?}");
    }
}
