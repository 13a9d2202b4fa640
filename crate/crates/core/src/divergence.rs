//! Divergences and metrics between finite distributions.
//!
//! The χ² divergence follows the Pearson form with the *first* argument in
//! the denominator, summed over the first argument's support only. Some
//! textbooks swap the roles; callers that want the other orientation pass
//! the arguments the other way round. All logarithms are natural.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::str::FromStr;

use rand::Rng;

use crate::prob::Distribution;

/// A non-negative real or `+∞`. Never NaN.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtendedReal(f64);

impl ExtendedReal {
    pub const ZERO: ExtendedReal = ExtendedReal(0.0);
    pub const INFINITY: ExtendedReal = ExtendedReal(f64::INFINITY);

    /// `None` for NaN and negative values.
    pub fn new(v: f64) -> Option<Self> {
        if v.is_nan() || v < 0.0 {
            None
        } else {
            Some(ExtendedReal(v + 0.0))
        }
    }

    /// Clamps tiny negative rounding residue to zero.
    pub(crate) fn clamped(v: f64) -> Self {
        debug_assert!(!v.is_nan());
        ExtendedReal(if v > 0.0 { v } else { 0.0 })
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    pub fn finite(self) -> Option<f64> {
        if self.0.is_finite() {
            Some(self.0)
        } else {
            None
        }
    }

    pub fn max(self, other: Self) -> Self {
        if other.0 > self.0 {
            other
        } else {
            self
        }
    }

    /// `self ≤ eps`; `+∞` is never within a finite threshold.
    pub fn within(self, eps: f64) -> bool {
        self.0 <= eps
    }
}

impl Eq for ExtendedReal {}

impl PartialOrd for ExtendedReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtendedReal {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_infinite() {
            f.write_str("inf")
        } else {
            fmt::Display::fmt(&self.0, f)
        }
    }
}

/// Pearson χ² divergence `Σ_{y ∈ supp(μ)} (ν[y] − μ[y])² / μ[y]`.
pub fn chi2<K: Ord + Clone>(mu: &Distribution<K>, nu: &Distribution<K>) -> ExtendedReal {
    let sum: f64 = mu
        .iter()
        .map(|(y, m)| {
            let d = nu.get(y) - m;
            d * d / m
        })
        .sum();
    ExtendedReal::clamped(sum)
}

/// Max divergence `max_{∅ ≠ R ⊆ supp(μ)} ln(μ[R] / ν[R])`.
///
/// The ratio of sums never exceeds the largest single ratio, so the max is
/// taken over singletons.
pub fn max_div<K: Ord + Clone>(mu: &Distribution<K>, nu: &Distribution<K>) -> ExtendedReal {
    let mut best = f64::NEG_INFINITY;
    for (y, m) in mu.iter() {
        let n = nu.get(y);
        if n == 0.0 {
            return ExtendedReal::INFINITY;
        }
        let r = libm::log(m / n);
        if r > best {
            best = r;
        }
    }
    ExtendedReal::clamped(best)
}

/// Total variation `½ Σ_y |μ[y] − ν[y]|`.
///
/// Summed over the sorted union of supports, so swapping the arguments
/// gives a bit-identical result.
pub fn total_variation<K: Ord + Clone>(mu: &Distribution<K>, nu: &Distribution<K>) -> f64 {
    let keys: BTreeSet<&K> = mu.support().chain(nu.support()).collect();
    let sum: f64 = keys.into_iter().map(|y| (mu.get(y) - nu.get(y)).abs()).sum();
    sum * 0.5
}

/// Jensen–Shannon divergence `½ KL(μ∥m) + ½ KL(ν∥m)` with `m = (μ+ν)/2`.
pub fn js_div<K: Ord + Clone>(mu: &Distribution<K>, nu: &Distribution<K>) -> f64 {
    let half_kl = |p: &Distribution<K>, q: &Distribution<K>| -> f64 {
        p.iter()
            .map(|(y, a)| {
                let m = (a + q.get(y)) * 0.5;
                a * libm::log(a / m)
            })
            .sum::<f64>()
    };
    let v = 0.5 * half_kl(mu, nu) + 0.5 * half_kl(nu, mu);
    if v > 0.0 {
        v
    } else {
        0.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(rename_all = "lowercase"))]
pub enum DivergenceTag {
    Chi2,
    MaxDiv,
    Tv,
    Js,
}

impl DivergenceTag {
    pub const ALL: [DivergenceTag; 4] = [DivergenceTag::Chi2, DivergenceTag::MaxDiv, DivergenceTag::Tv, DivergenceTag::Js];

    pub fn as_str(self) -> &'static str {
        match self {
            DivergenceTag::Chi2 => "chi2",
            DivergenceTag::MaxDiv => "maxdiv",
            DivergenceTag::Tv => "tv",
            DivergenceTag::Js => "js",
        }
    }
}

impl FromStr for DivergenceTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "chi2" => Ok(DivergenceTag::Chi2),
            "maxdiv" => Ok(DivergenceTag::MaxDiv),
            "tv" => Ok(DivergenceTag::Tv),
            "js" => Ok(DivergenceTag::Js),
            _ => Err(format!("unknown divergence `{s}`")),
        }
    }
}

impl fmt::Display for DivergenceTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A divergence, optionally symmetrized by taking the max of both
/// directions. `tv` and `js` are symmetric already.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DivergenceKind {
    pub tag: DivergenceTag,
    pub symmetrize: bool,
}

impl DivergenceKind {
    pub const fn new(tag: DivergenceTag) -> Self {
        DivergenceKind { tag, symmetrize: false }
    }

    pub const fn symmetrized(tag: DivergenceTag) -> Self {
        DivergenceKind { tag, symmetrize: true }
    }

    /// One direction, ignoring `symmetrize`.
    pub fn directed<K: Ord + Clone>(self, mu: &Distribution<K>, nu: &Distribution<K>) -> ExtendedReal {
        match self.tag {
            DivergenceTag::Chi2 => chi2(mu, nu),
            DivergenceTag::MaxDiv => max_div(mu, nu),
            DivergenceTag::Tv => ExtendedReal::clamped(total_variation(mu, nu)),
            DivergenceTag::Js => ExtendedReal::clamped(js_div(mu, nu)),
        }
    }

    pub fn eval<K: Ord + Clone>(self, mu: &Distribution<K>, nu: &Distribution<K>) -> ExtendedReal {
        let forward = self.directed(mu, nu);
        if self.symmetrize && !self.tag_is_symmetric() {
            forward.max(self.directed(nu, mu))
        } else {
            forward
        }
    }

    fn tag_is_symmetric(self) -> bool {
        matches!(self.tag, DivergenceTag::Tv | DivergenceTag::Js)
    }

    pub fn is_symmetric(self) -> bool {
        self.symmetrize || self.tag_is_symmetric()
    }

    /// Only total variation satisfies the triangle inequality here.
    pub fn is_metric(self) -> bool {
        self.tag == DivergenceTag::Tv
    }
}

impl fmt::Display for DivergenceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.symmetrize {
            write!(f, "sym-{}", self.tag)
        } else {
            write!(f, "{}", self.tag)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize), serde(rename_all = "snake_case"))]
pub enum Axiom {
    NonNegativity,
    IdentityOfIndiscernibles,
    Symmetry,
    Subadditivity,
}

/// Distributions (dense over a small domain) and the values that break an
/// axiom.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct AxiomWitness {
    pub distributions: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    pub description: String,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct AxiomResult {
    pub axiom: Axiom,
    pub holds: bool,
    pub witness: Option<AxiomWitness>,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct AxiomReport {
    pub kind: String,
    pub samples: usize,
    pub results: Vec<AxiomResult>,
}

impl AxiomReport {
    pub fn result(&self, axiom: Axiom) -> &AxiomResult {
        self.results.iter().find(|r| r.axiom == axiom).expect("every axiom is reported")
    }
}

const AXIOM_TOLERANCE: f64 = 1e-12;

fn random_dense<R: Rng + ?Sized>(rng: &mut R, k: usize) -> Vec<f64> {
    loop {
        let raw: Vec<f64> =
            (0..k).map(|_| if rng.gen_bool(0.2) { 0.0 } else { rng.gen_range(0.01..1.0) }).collect();
        let total: f64 = raw.iter().sum();
        if total > 0.0 {
            return raw.into_iter().map(|w| w / total).collect();
        }
    }
}

fn dense(d: &[f64]) -> Distribution<usize> {
    Distribution::from_map(d.iter().copied().enumerate().collect())
}

/// Samples distribution pairs and triples over domains of 2–5 outcomes and
/// checks the divergence axioms (non-negativity, identity of indiscernibles)
/// and the metric axioms (symmetry, subadditivity). Each axiom reports the
/// first counterexample found.
pub fn check_divergence_axioms<R: Rng + ?Sized>(kind: DivergenceKind, samples: usize, rng: &mut R) -> AxiomReport {
    let mut witnesses: [Option<AxiomWitness>; 4] = [None, None, None, None];
    let eval = |a: &[f64], b: &[f64]| kind.eval(&dense(a), &dense(b));
    for _ in 0..samples.max(1) {
        let k = rng.gen_range(2..=5);
        let a = random_dense(rng, k);
        let b = random_dense(rng, k);
        let c = random_dense(rng, k);
        let ab = eval(&a, &b);
        let ba = eval(&b, &a);

        if witnesses[0].is_none() && ab.value() < 0.0 {
            witnesses[0] = Some(AxiomWitness {
                distributions: alloc::vec![a.clone(), b.clone()],
                values: alloc::vec![ab.value()],
                description: format!("D(mu||nu) = {ab} < 0"),
            });
        }
        if witnesses[1].is_none() {
            let aa = eval(&a, &a);
            if aa.value() != 0.0 {
                witnesses[1] = Some(AxiomWitness {
                    distributions: alloc::vec![a.clone()],
                    values: alloc::vec![aa.value()],
                    description: format!("D(mu||mu) = {aa} != 0"),
                });
            } else if a != b && ab.value() == 0.0 {
                witnesses[1] = Some(AxiomWitness {
                    distributions: alloc::vec![a.clone(), b.clone()],
                    values: alloc::vec![0.0],
                    description: String::from("D(mu||nu) = 0 for mu != nu"),
                });
            }
        }
        if witnesses[2].is_none() && !close(ab, ba) {
            witnesses[2] = Some(AxiomWitness {
                distributions: alloc::vec![a.clone(), b.clone()],
                values: alloc::vec![ab.value(), ba.value()],
                description: format!("D(mu||nu) = {ab} != D(nu||mu) = {ba}"),
            });
        }
        if witnesses[3].is_none() {
            let bc = eval(&b, &c);
            let ac = eval(&a, &c);
            if ac.value() > ab.value() + bc.value() + AXIOM_TOLERANCE {
                witnesses[3] = Some(AxiomWitness {
                    distributions: alloc::vec![a.clone(), b.clone(), c.clone()],
                    values: alloc::vec![ab.value(), bc.value(), ac.value()],
                    description: format!("D(mu||rho) = {ac} > D(mu||nu) + D(nu||rho) = {}", ab.value() + bc.value()),
                });
            }
        }
    }
    let axioms = [Axiom::NonNegativity, Axiom::IdentityOfIndiscernibles, Axiom::Symmetry, Axiom::Subadditivity];
    AxiomReport {
        kind: format!("{kind}"),
        samples: samples.max(1),
        results: axioms
            .into_iter()
            .zip(witnesses)
            .map(|(axiom, witness)| AxiomResult { axiom, holds: witness.is_none(), witness })
            .collect(),
    }
}

fn close(a: ExtendedReal, b: ExtendedReal) -> bool {
    if a.is_infinite() || b.is_infinite() {
        return a == b;
    }
    (a.value() - b.value()).abs() <= AXIOM_TOLERANCE * a.value().abs().max(b.value().abs()).max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn d(pairs: &[(&'static str, f64)]) -> Distribution<&'static str> {
        Distribution::new(pairs.iter().copied()).unwrap()
    }

    #[test]
    fn chi2_values() {
        let fair = d(&[("H", 0.5), ("T", 0.5)]);
        let biased = d(&[("H", 0.4), ("T", 0.6)]);
        assert!((chi2(&fair, &biased).value() - 0.04).abs() < 1e-12);
        assert!((chi2(&biased, &fair).value() - (0.01 / 0.4 + 0.01 / 0.6)).abs() < 1e-12);
        assert!((chi2(&biased, &fair).value() - 0.0416667).abs() < 1e-6);
        assert_eq!(chi2(&fair, &fair), ExtendedReal::ZERO);
    }

    #[test]
    fn max_div_values() {
        let fair = d(&[("H", 0.5), ("T", 0.5)]);
        let biased = d(&[("H", 0.4), ("T", 0.6)]);
        assert!((max_div(&fair, &biased).value() - libm::log(1.25)).abs() < 1e-15);
        assert!((max_div(&fair, &biased).value() - 0.223144).abs() < 1e-6);
        assert_eq!(max_div(&fair, &fair), ExtendedReal::ZERO);
        assert!(max_div(&d(&[("A", 1.0)]), &d(&[("B", 1.0)])).is_infinite());
    }

    #[test]
    fn tv_and_js_values() {
        let fair = d(&[("H", 0.5), ("T", 0.5)]);
        let biased = d(&[("H", 0.4), ("T", 0.6)]);
        assert!((total_variation(&fair, &biased) - 0.1).abs() < 1e-12);
        assert_eq!(total_variation(&fair, &fair), 0.0);
        let a = d(&[("A", 1.0)]);
        let b = d(&[("B", 1.0)]);
        assert_eq!(total_variation(&a, &b), 1.0);
        assert_eq!(js_div(&fair, &fair), 0.0);
        assert!((js_div(&a, &b) - core::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(js_div(&fair, &biased), js_div(&biased, &fair));
    }

    #[test]
    fn symmetrized_kinds() {
        let p = d(&[("H", 0.5), ("T", 0.5)]);
        let q = d(&[("H", 0.1), ("T", 0.9)]);
        let k = DivergenceKind::symmetrized(DivergenceTag::Chi2);
        assert_eq!(k.eval(&p, &q), k.eval(&q, &p));
        assert!((k.eval(&p, &q).value() - (1.6 + 0.16 / 0.9)).abs() < 1e-12);
        assert!(k.is_symmetric());
        assert!(!DivergenceKind::new(DivergenceTag::MaxDiv).is_symmetric());
        assert!(DivergenceKind::new(DivergenceTag::Js).is_symmetric());
    }

    #[test]
    fn extended_real_display_and_order() {
        assert_eq!(alloc::format!("{}", ExtendedReal::INFINITY), "inf");
        assert!(ExtendedReal::new(f64::NAN).is_none());
        assert!(ExtendedReal::new(-1.0).is_none());
        assert!(ExtendedReal::INFINITY > ExtendedReal::new(1e300).unwrap());
        assert!(!ExtendedReal::INFINITY.within(1e300));
    }

    #[test]
    fn axiom_reports() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let tv = check_divergence_axioms(DivergenceKind::new(DivergenceTag::Tv), 1000, &mut rng);
        assert!(tv.results.iter().all(|r| r.holds), "{tv:?}");

        let chi = check_divergence_axioms(DivergenceKind::new(DivergenceTag::Chi2), 1000, &mut rng);
        assert!(chi.result(Axiom::NonNegativity).holds);
        assert!(chi.result(Axiom::IdentityOfIndiscernibles).holds);
        let sym = chi.result(Axiom::Symmetry);
        assert!(!sym.holds);
        let w = sym.witness.as_ref().unwrap();
        assert_ne!(w.values[0], w.values[1]);

        let md = check_divergence_axioms(DivergenceKind::new(DivergenceTag::MaxDiv), 1000, &mut rng);
        assert!(md.result(Axiom::NonNegativity).holds);
        assert!(md.result(Axiom::IdentityOfIndiscernibles).holds);
        assert!(!md.result(Axiom::Symmetry).holds);

        let js = check_divergence_axioms(DivergenceKind::new(DivergenceTag::Js), 500, &mut rng);
        assert!(js.result(Axiom::Symmetry).holds);
    }

    #[test]
    fn chi2_symmetry_witness_by_hand() {
        let p = dense(&[0.5, 0.5]);
        let q = dense(&[0.1, 0.9]);
        assert!((chi2(&p, &q).value() - 0.64).abs() < 1e-12);
        assert!((chi2(&q, &p).value() - 1.777_777_777_8).abs() < 1e-9);
    }
}
