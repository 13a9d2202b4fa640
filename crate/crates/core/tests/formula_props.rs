mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statel_core::formula::Interval;
use statel_core::{parse, parse_epistemic, parse_static, Formula, IntervalSet};

fn dyadic() -> impl Strategy<Value = f64> {
    (0u32..=256).prop_map(|k| f64::from(k) / 256.0)
}

fn interval() -> impl Strategy<Value = Interval> {
    (dyadic(), dyadic(), any::<bool>(), any::<bool>()).prop_map(|(a, b, lo_open, hi_open)| {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        Interval { lo, lo_open, hi, hi_open }
    })
}

fn interval_set() -> impl Strategy<Value = IntervalSet> {
    prop::collection::vec(interval(), 0..4).prop_map(|v| IntervalSet::new(v).unwrap())
}

/// Every endpoint of `a`, slightly inside and outside it, and a coarse grid.
fn probes(a: &IntervalSet) -> Vec<f64> {
    let mut out: Vec<f64> = (0..=64).map(|k| f64::from(k) / 64.0).collect();
    for iv in a.intervals() {
        for e in [iv.lo, iv.hi] {
            out.extend([e, e - 1.0 / 1024.0, e + 1.0 / 1024.0].into_iter().filter(|p| (0.0..=1.0).contains(p)));
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn pretty_then_parse_is_identity(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = common::random_epistemic_ast(4, &mut rng);
        prop_assert_eq!(parse_epistemic(&f.to_string()).unwrap(), f.clone());
        prop_assert_eq!(parse(&f.to_string()).unwrap(), Formula::Epistemic(f));
        let s = common::random_static_ast(4, &mut rng);
        prop_assert_eq!(parse_static(&s.to_string()).unwrap(), s);
    }

    #[test]
    fn interval_set_printing_round_trips(a in interval_set()) {
        let f = format!("Pr{a} p");
        let Formula::Epistemic(statel_core::EpistemicFormula::Prob(b, _)) = parse(&f).unwrap() else { panic!("{f}") };
        prop_assert_eq!(a, b);
    }

    #[test]
    fn complement_is_an_involution(a in interval_set()) {
        prop_assert_eq!(a.complement().complement(), a);
    }

    #[test]
    fn reflection_is_an_involution(a in interval_set()) {
        prop_assert_eq!(a.reflect().reflect(), a);
    }

    #[test]
    fn reflection_commutes_with_complement(a in interval_set()) {
        prop_assert_eq!(a.complement().reflect(), a.reflect().complement());
    }

    #[test]
    fn membership_splits_between_set_and_complement(a in interval_set()) {
        let c = a.complement();
        for p in probes(&a) {
            prop_assert!(a.contains(p) != c.contains(p), "p = {}, I = {}, complement = {}", p, a, c);
        }
    }

    #[test]
    fn reflection_mirrors_membership(a in interval_set()) {
        let r = a.reflect();
        for p in probes(&a) {
            prop_assert_eq!(a.contains(p), r.contains(1.0 - p), "p = {}", p);
        }
    }

    #[test]
    fn union_is_membership_or(a in interval_set(), b in interval_set()) {
        let u = a.union(&b);
        for p in probes(&a).into_iter().chain(probes(&b)) {
            prop_assert_eq!(u.contains(p), a.contains(p) || b.contains(p));
        }
    }

    #[test]
    fn parser_never_panics(text in "[ -~\\n]{0,40}") {
        let _ = parse(&text);
    }

    #[test]
    fn parser_never_panics_on_formula_shaped_text(
        parts in prop::collection::vec(prop::sample::select(vec![
            "Pr", "{", "}", "[", "]", "(", ")", "0.5", "1", ",", "u", "K[", "L[", "a", "]", "|>", "->", "|", "&", "!", "p", "x",
        ]), 0..20)
    ) {
        let _ = parse(&parts.join(" "));
    }
}

#[test]
fn interval_examples() {
    let open_half = IntervalSet::new([Interval { lo: 0.5, lo_open: true, hi: 1.0, hi_open: false }]).unwrap();
    assert_eq!(open_half.complement(), IntervalSet::closed(0.0, 0.5));
    let left = IntervalSet::new([Interval { lo: 0.0, lo_open: false, hi: 0.3, hi_open: true }]).unwrap();
    let right = IntervalSet::new([Interval { lo: 0.7, lo_open: true, hi: 1.0, hi_open: false }]).unwrap();
    assert_eq!(left.reflect(), right);
    let none = IntervalSet::full().complement();
    assert!(none.is_empty());
    assert!((0..=10).all(|k| !none.contains(f64::from(k) / 10.0)));
}

#[test]
fn pretty_examples() {
    let f = parse_epistemic("K[a,0.05] !Pr{0} p").unwrap();
    assert_eq!(f.to_string(), "K[a,0.05] !Pr{0} p");
    assert_eq!(parse_epistemic("Pr[0.4,0.4] heads(x)").unwrap().to_string(), "Pr{0.4} heads(x)");
}

#[test]
fn nested_epistemic_operand_is_rejected() {
    for text in ["Pr{0.5} (K[a] Pr{1} p)", "Pr{1} Pr{1} p", "Pr{1} (Pr{1} p)"] {
        assert!(parse_epistemic(text).is_err(), "{text}");
    }
}
