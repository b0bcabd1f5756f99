//! Checks on the doubled chart: agreement of `F` and `G` on the two-fold product and
//! θ-level coassociativity.

use super::{h_action, k_action, tuple_string, word_tuples, zero_section, Word, WordFunctional};
use crate::algebra::{Chart, FormalFunction, Polynomial};
use crate::error::Result;
use crate::groupoid::GroupoidData;
use crate::poisson::{hamiltonian, Derivation};
use crate::report::{Check, CheckRecord};

/// Two copies of the chart; the fiber truncation bounds the total fiber degree.
pub fn doubled_chart(chart: Chart) -> Chart {
    chart.power(2, chart.fiber_truncation)
}

/// Place a function of the single chart on copy `copy` of a product chart.
pub fn embed(f: &FormalFunction, target: Chart, copy: usize) -> FormalFunction {
    let src = f.chart();
    let mut map = vec![None; src.nvars()];
    for i in 0..src.block() {
        map[src.base_index(0, i)] = Some(target.base_index(copy, i));
        map[src.fiber_index(0, i)] = Some(target.fiber_index(copy, i));
    }
    f.relabel(target, |i| map[i])
}

/// `E₂`: fibers set to zero and the two base copies identified.
fn zero_section_2(f: &FormalFunction, single: Chart) -> Result<Polynomial> {
    let doubled = f.chart();
    let mut map = vec![None; doubled.nvars()];
    for c in 0..doubled.copies {
        for i in 0..doubled.block() {
            map[doubled.base_index(c, i)] = Some(single.base_index(0, i));
        }
    }
    zero_section(&f.zero_section_eval().relabel(single, |i| map[i]))
}

struct Doubled<'a> {
    g: &'a GroupoidData,
    chart: Chart,
}

impl Doubled<'_> {
    fn s(&self, f: &Polynomial, copy: usize) -> FormalFunction {
        embed(&self.g.source(f), self.chart, copy)
    }

    fn t(&self, f: &Polynomial, copy: usize) -> FormalFunction {
        embed(&self.g.target(f), self.chart, copy)
    }

    /// `λ²₀(f) = H_{S¹f}`, `λ²₁(f) = H_{S²f − T¹f}`, `λ²₂(f) = −H_{T²f}`.
    fn rep(&self, k: usize, f: &Polynomial) -> Derivation {
        match k {
            0 => hamiltonian(&self.s(f, 0)),
            1 => hamiltonian(&(&self.s(f, 1) - &self.t(f, 0))),
            _ => hamiltonian(&self.t(f, 1)).neg(),
        }
    }

    /// `⟪G⟫(u⊗v⊗w) = E₂(λ²₀(u)λ²₁(v)λ²₂(w)G)`.
    fn eval(&self, big: &FormalFunction, words: &[Word]) -> Result<Polynomial> {
        let mut acc = big.clone();
        for (k, w) in words.iter().enumerate().rev() {
            for f in w.factors().iter().rev() {
                acc = self.rep(k, f).apply(&acc);
            }
        }
        zero_section_2(&acc, self.g.chart())
    }
}

/// Pairs `(F, G)` that agree on the two-fold product for every groupoid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AgreementInstance {
    /// `(Sf, Sf ⊗ 1)`.
    SourceLeft(Polynomial),
    /// `(Tf, 1 ⊗ Tf)`.
    TargetRight(Polynomial),
    /// `(0, 1 ⊗ Sf − Tf ⊗ 1)`, a generator of the ideal.
    Ideal(Polynomial),
}

impl AgreementInstance {
    pub fn build(&self, g: &GroupoidData) -> (FormalFunction, FormalFunction) {
        let d = Doubled {
            g,
            chart: doubled_chart(g.chart()),
        };
        match self {
            AgreementInstance::SourceLeft(f) => (g.source(f), d.s(f, 0)),
            AgreementInstance::TargetRight(f) => (g.target(f), d.t(f, 1)),
            AgreementInstance::Ideal(f) => (FormalFunction::zero(g.chart()), &d.s(f, 1) - &d.t(f, 0)),
        }
    }
}

/// `⟪G⟫(u⊗v⊗w) = k(v)⟪F⟫(u⊗w)` on all word triples of bounded total length, and
/// `⟪F⟫(u⊗v) = Σ ⟪G⟫(u′⊗u″⊗v)` on all pairs.
pub fn agreement_check(
    name: &str,
    f: &FormalFunction,
    big: &FormalFunction,
    g: &GroupoidData,
    alphabet: &[Polynomial],
    max_total: usize,
) -> Vec<CheckRecord> {
    let d = Doubled {
        g,
        chart: big.chart(),
    };
    let fa = WordFunctional::double_angle(f.clone(), g);
    let mut agree = Check::new(name);
    for t in word_tuples(alphabet, 3, max_total) {
        let lhs = d.eval(big, &t);
        let rhs = fa.eval(&[t[0].clone(), t[2].clone()]).map(|p| k_action(&t[1], &p));
        match (lhs, rhs) {
            (Ok(l), Ok(r)) => {
                let diff = &l - &r;
                agree.value(diff.is_zero(), || diff.to_string(), || tuple_string(&t));
            }
            (Err(e), _) | (_, Err(e)) => agree.error(e.to_string(), || tuple_string(&t)),
        }
    }
    let mut fa5 = Check::new(format!("{name}.coproduct_identity"));
    for t in word_tuples(alphabet, 2, max_total) {
        let r = (|| -> Result<Polynomial> {
            let mut sum = Polynomial::zero(g.chart().base);
            for (u1, u2) in t[0].coproduct()? {
                sum = &sum + &d.eval(big, &[u1, u2, t[1].clone()])?;
            }
            Ok(&fa.eval(&t)? - &sum)
        })();
        match r {
            Ok(diff) => fa5.value(diff.is_zero(), || diff.to_string(), || tuple_string(&t)),
            Err(e) => fa5.error(e.to_string(), || tuple_string(&t)),
        }
    }
    vec![agree.finish(), fa5.finish()]
}

/// `θ²₁[θ[B]] = θ²₂[θ[B]] = ((u,v,w,z) ↦ k(v)k(w)B(u⊗z))` on all word 4-tuples of bounded
/// total length.
pub fn theta_coassoc_check(name: &str, b: &WordFunctional<'_>, alphabet: &[Polynomial], max_total: usize) -> CheckRecord {
    let tb = b.theta();
    let (left, right) = (tb.insert_counit(1), tb.insert_counit(2));
    let mut check = Check::new(name);
    for t in word_tuples(alphabet, 4, max_total) {
        let r = (|| -> Result<(Polynomial, Polynomial)> {
            let expected = k_action(&t[1], &k_action(&t[2], &b.eval(&[t[0].clone(), t[3].clone()])?));
            Ok((&left.eval(&t)? - &expected, &right.eval(&t)? - &expected))
        })();
        match r {
            Ok((a, c)) => check.value(a.is_zero() && c.is_zero(), || format!("{a}; {c}"), || tuple_string(&t)),
            Err(e) => check.error(e.to_string(), || tuple_string(&t)),
        }
    }
    check.finish()
}

/// `⟪Sf⟫(u⊗v) = h(u)k(v)f` and `⟪Tf⟫(u⊗v) = h(v)k(u)f`.
pub(crate) fn source_target_double_angle(
    check: &mut Check,
    g: &GroupoidData,
    f: &Polynomial,
    pairs: &[Vec<Word>],
) {
    let eta = g.poisson();
    let (sf, tf) = (WordFunctional::double_angle(g.source(f), g), WordFunctional::double_angle(g.target(f), g));
    for t in pairs {
        let (u, v) = (&t[0], &t[1]);
        let s_expected = h_action(u, &k_action(v, f), eta);
        let t_expected = h_action(v, &k_action(u, f), eta);
        match (sf.eval(t), tf.eval(t)) {
            (Ok(a), Ok(b)) => {
                let (da, db) = (&a - &s_expected, &b - &t_expected);
                check.value(da.is_zero() && db.is_zero(), || format!("{da}; {db}"), || format!("f={f}; {}", tuple_string(t)));
            }
            (Err(e), _) | (_, Err(e)) => check.error(e.to_string(), || tuple_string(t)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{parse_poly, BaseSpace};
    use crate::groupoid::kp_check;

    fn flat() -> GroupoidData {
        let t = kp_check(vec![vec![Polynomial::one(BaseSpace::complex(1))]]).unwrap();
        GroupoidData::assemble(t, Chart::complex(1, 4, 0)).unwrap()
    }

    fn p(s: &str) -> Polynomial {
        parse_poly(s, BaseSpace::complex(1)).unwrap()
    }

    #[test]
    fn standard_instances_agree() {
        let g = flat();
        let alphabet = [p("z1"), p("w1")];
        for inst in [
            AgreementInstance::SourceLeft(p("z1*w1")),
            AgreementInstance::TargetRight(p("z1*w1")),
            AgreementInstance::Ideal(p("z1")),
        ] {
            let (f, big) = inst.build(&g);
            for r in agreement_check("agree", &f, &big, &g, &alphabet, 2) {
                assert!(r.passed(), "{inst:?}: {r:?}");
            }
        }
    }

    #[test]
    fn mismatched_pair_is_separated() {
        let g = flat();
        let d = Doubled {
            g: &g,
            chart: doubled_chart(g.chart()),
        };
        let big = d.s(&p("z1"), 1);
        let r = agreement_check("agree", &g.source(&p("z1")), &big, &g, &[p("z1"), p("w1")], 1);
        assert!(!r[0].passed());
        let (w, one) = (Word::letter(p("w1")), Word::unit());
        let triple = [w.clone(), one.clone(), one.clone()];
        let lhs = d.eval(&big, &triple).unwrap();
        let rhs = WordFunctional::double_angle(g.source(&p("z1")), &g).eval(&[w, one]).unwrap();
        assert_ne!(lhs, rhs);
        let at_unit = d.eval(&big, &[Word::unit(), Word::unit(), Word::unit()]).unwrap();
        assert_eq!(at_unit, p("z1"));
    }

    #[test]
    fn theta_is_coassociative() {
        let g = flat();
        let b = WordFunctional::double_angle(g.source(&p("z1*w1")), &g);
        assert!(theta_coassoc_check("theta", &b, &[p("z1"), p("w1")], 3).passed());
    }
}
