//! Word calculus on the enveloping algebra of the base Poisson algebra.
//!
//! Words are ordered products `f₁ • … • fₙ` of base polynomials. Functionals on words are
//! evaluated lazily: `⟨F⟩(u) = E(λ(u)F)` with `λ(f) = H_{Sf}`, and `⟪F⟫(u⊗v) = E(λ(u)ρ(v)F)`
//! with `ρ(f) = −H_{Tf}`.

mod agreement;
mod family;
mod suite;

pub use agreement::{agreement_check, doubled_chart, embed, theta_coassoc_check, AgreementInstance};
pub use family::{
    check_family, extend_family, family_records, find_violation, jacobi_family, tensor_lemma, CoherentFamily,
    ExtendOptions, FamilyFile, Normalization, PolyDiffOp, TermSpec, Violation,
};
pub use suite::{verify_coherent, CoherentOptions};

use std::fmt;
use std::rc::Rc;

use crate::algebra::{BaseSpace, FormalFunction, Polynomial, Precision};
use crate::error::{Error, Result};
use crate::groupoid::GroupoidData;
use crate::poisson::{bracket_m, hamiltonian, Derivation, PoissonTensor};

/// Default bound on word length; coproducts of a word of length `n` have `2ⁿ` terms.
pub const DEFAULT_WORD_CAP: usize = 5;

/// An ordered product of base polynomials; the empty word is the unit.
#[derive(Clone, PartialEq, Eq)]
pub struct Word {
    factors: Vec<Polynomial>,
}

impl Word {
    pub fn unit() -> Self {
        Word { factors: Vec::new() }
    }

    pub fn letter(f: Polynomial) -> Self {
        Word { factors: vec![f] }
    }

    pub fn new(factors: Vec<Polynomial>) -> Result<Self> {
        Self::with_cap(factors, DEFAULT_WORD_CAP)
    }

    pub fn with_cap(factors: Vec<Polynomial>, cap: usize) -> Result<Self> {
        if factors.len() > cap {
            return Err(Error::WordTooLong {
                length: factors.len(),
                cap,
            });
        }
        Ok(Word { factors })
    }

    pub fn factors(&self) -> &[Polynomial] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// The empty word is the unit of the tensor algebra.
    pub fn is_unit(&self) -> bool {
        self.is_empty()
    }

    /// `f • u`.
    pub fn prepend(&self, f: Polynomial) -> Result<Self> {
        let mut factors = Vec::with_capacity(self.len() + 1);
        factors.push(f);
        factors.extend(self.factors.iter().cloned());
        Word::new(factors)
    }

    /// `ε(u)`: one on the unit, zero on every nonempty word.
    pub fn counit(&self) -> i64 {
        i64::from(self.is_unit())
    }

    /// All order-preserving splittings of the factors into a left and a right word.
    pub fn coproduct(&self) -> Result<Vec<(Word, Word)>> {
        let n = self.len();
        if n > DEFAULT_WORD_CAP {
            return Err(Error::WordTooLong {
                length: n,
                cap: DEFAULT_WORD_CAP,
            });
        }
        let mut out = Vec::with_capacity(1 << n);
        for mask in 0..(1usize << n) {
            let (mut left, mut right) = (Vec::new(), Vec::new());
            for (i, f) in self.factors.iter().enumerate() {
                if mask >> (n - 1 - i) & 1 == 0 {
                    left.push(f.clone());
                } else {
                    right.push(f.clone());
                }
            }
            out.push((Word { factors: left }, Word { factors: right }));
        }
        Ok(out)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return f.write_str("𝟏");
        }
        for (i, p) in self.factors.iter().enumerate() {
            if i > 0 {
                f.write_str(" • ")?;
            }
            if p.len() > 1 {
                write!(f, "({p})")?;
            } else {
                write!(f, "{p}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({self})")
    }
}

/// Every word over `alphabet` of length at most `max_len`, shortest first.
pub fn words_up_to(alphabet: &[Polynomial], max_len: usize) -> Vec<Word> {
    let mut out = vec![Word::unit()];
    let mut layer = vec![Word::unit()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &layer {
            for a in alphabet {
                let mut factors = w.factors.clone();
                factors.push(a.clone());
                next.push(Word { factors });
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// Every `arity`-tuple of words over `alphabet` whose lengths sum to at most `max_total`.
pub fn word_tuples(alphabet: &[Polynomial], arity: usize, max_total: usize) -> Vec<Vec<Word>> {
    let words = words_up_to(alphabet, max_total);
    let mut out: Vec<Vec<Word>> = vec![Vec::new()];
    for _ in 0..arity {
        let mut next = Vec::new();
        for t in &out {
            let used: usize = t.iter().map(Word::len).sum();
            for w in words.iter().filter(|w| used + w.len() <= max_total) {
                let mut t = t.clone();
                t.push(w.clone());
                next.push(t);
            }
        }
        out = next;
    }
    out
}

pub(crate) fn tuple_string(words: &[Word]) -> String {
    let parts: Vec<String> = words.iter().map(|w| w.to_string()).collect();
    format!("({})", parts.join(", "))
}

/// Which source map feeds the representation `λ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SourceChoice {
    Source,
    DualSource,
}

/// `λ(f) = H_{Sf}`.
pub fn lambda(g: &GroupoidData, f: &Polynomial) -> Derivation {
    hamiltonian(&g.source(f))
}

/// `ρ(f) = −H_{Tf}`.
pub fn rho(g: &GroupoidData, f: &Polynomial) -> Derivation {
    hamiltonian(&g.target(f)).neg()
}

fn apply_word(f: FormalFunction, u: &Word, rep: impl Fn(&Polynomial) -> Derivation) -> FormalFunction {
    u.factors.iter().rev().fold(f, |acc, p| rep(p).apply(&acc))
}

/// `E` as a map to base polynomials; fails when the valid order does not reach fiber degree zero.
pub fn zero_section(f: &FormalFunction) -> Result<Polynomial> {
    let e = f.zero_section_eval();
    if e.valid() != Precision::Exact {
        return Err(Error::InsufficientOrder {
            needed: 0,
            available: f.valid().order().unwrap_or(i32::MAX),
        });
    }
    e.to_polynomial()
}

/// `⟨F⟩(u) = E(λ(u)F)`.
pub fn chi_eval(f: &FormalFunction, u: &Word, g: &GroupoidData) -> Result<Polynomial> {
    chi_eval_with(f, u, g, SourceChoice::Source)
}

/// `⟨F⟩(u)` with `λ` built from the chosen source map.
pub fn chi_eval_with(f: &FormalFunction, u: &Word, g: &GroupoidData, source: SourceChoice) -> Result<Polynomial> {
    let out = match source {
        SourceChoice::Source => apply_word(f.clone(), u, |p| lambda(g, p)),
        SourceChoice::DualSource => apply_word(f.clone(), u, |p| hamiltonian(&g.dual_source(p))),
    };
    zero_section(&out)
}

/// `⟪F⟫(u⊗v) = E(λ(u)ρ(v)F)`.
pub fn double_angle_eval(f: &FormalFunction, u: &Word, v: &Word, g: &GroupoidData) -> Result<Polynomial> {
    let inner = apply_word(f.clone(), v, |p| rho(g, p));
    zero_section(&apply_word(inner, u, |p| lambda(g, p)))
}

/// `h(u)f`, the iterated Hamiltonian action `{f₁,{f₂,…{fₙ,f}}}`.
pub fn h_action(u: &Word, f: &Polynomial, eta: &PoissonTensor) -> Polynomial {
    u.factors.iter().rev().fold(f.clone(), |acc, p| bracket_m(p, &acc, eta))
}

/// `k(u)f = ε(u)f`.
pub fn k_action(u: &Word, f: &Polynomial) -> Polynomial {
    if u.is_unit() {
        f.clone()
    } else {
        Polynomial::zero(f.space())
    }
}

type Eval<'a> = Rc<dyn Fn(&[Word]) -> Result<Polynomial> + 'a>;

/// A linear map from `arity` tensor factors of words to base polynomials.
#[derive(Clone)]
pub struct WordFunctional<'a> {
    space: BaseSpace,
    arity: usize,
    eval: Eval<'a>,
}

impl<'a> WordFunctional<'a> {
    pub fn new(space: BaseSpace, arity: usize, eval: impl Fn(&[Word]) -> Result<Polynomial> + 'a) -> Self {
        WordFunctional {
            space,
            arity,
            eval: Rc::new(eval),
        }
    }

    pub fn space(&self) -> BaseSpace {
        self.space
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn eval(&self, words: &[Word]) -> Result<Polynomial> {
        if words.len() != self.arity {
            return Err(Error::Config(format!(
                "functional takes {} words, got {}",
                self.arity,
                words.len()
            )));
        }
        (self.eval)(words)
    }

    pub fn at(&self, u: &Word) -> Result<Polynomial> {
        self.eval(std::slice::from_ref(u))
    }

    /// `X_f(u) = ε(u)f`; `X_1` is the counit.
    pub fn x(f: Polynomial) -> Self {
        let space = f.space();
        WordFunctional::new(space, 1, move |w| Ok(k_action(&w[0], &f)))
    }

    pub fn counit(space: BaseSpace) -> Self {
        Self::x(Polynomial::one(space))
    }

    /// `u ↦ h(u)f`.
    pub fn hamiltonian_action(f: Polynomial, eta: &'a PoissonTensor) -> Self {
        WordFunctional::new(f.space(), 1, move |w| Ok(h_action(&w[0], &f, eta)))
    }

    /// `⟨F⟩`.
    pub fn chi(f: FormalFunction, g: &'a GroupoidData) -> Self {
        WordFunctional::new(g.chart().base, 1, move |w| chi_eval(&f, &w[0], g))
    }

    /// `⟪F⟫`.
    pub fn double_angle(f: FormalFunction, g: &'a GroupoidData) -> Self {
        WordFunctional::new(g.chart().base, 2, move |w| double_angle_eval(&f, &w[0], &w[1], g))
    }

    /// Convolution through the coproduct on every leg.
    pub fn convolution(&self, other: &Self) -> Self {
        assert_eq!(self.arity, other.arity, "convolution of functionals of different arity");
        let (a, b) = (self.clone(), other.clone());
        WordFunctional::new(self.space, self.arity, move |words| {
            let legs = words.iter().map(Word::coproduct).collect::<Result<Vec<_>>>()?;
            let mut total = Polynomial::zero(a.space);
            let mut choice = vec![0usize; legs.len()];
            loop {
                let left: Vec<Word> = choice.iter().zip(&legs).map(|(&i, l)| l[i].0.clone()).collect();
                let right: Vec<Word> = choice.iter().zip(&legs).map(|(&i, l)| l[i].1.clone()).collect();
                let x = a.eval(&left)?;
                if !x.is_zero() {
                    total = &total + &(&x * &b.eval(&right)?);
                }
                if !advance(&mut choice, &legs) {
                    break;
                }
            }
            Ok(total)
        })
    }

    /// `{A,B}_c(u) = Σ B(A(u′)•u″) − A(B(u″)•u′) − {A(u′),B(u″)}_M`.
    pub fn c_bracket(&self, other: &Self, eta: &'a PoissonTensor) -> Self {
        assert_eq!(self.arity, 1);
        assert_eq!(other.arity, 1);
        let (a, b) = (self.clone(), other.clone());
        WordFunctional::new(self.space, 1, move |w| {
            let mut total = Polynomial::zero(a.space);
            for (u1, u2) in w[0].coproduct()? {
                let au1 = a.at(&u1)?;
                let bu2 = b.at(&u2)?;
                let first = b.at(&u2.prepend(au1.clone())?)?;
                let second = a.at(&u1.prepend(bu2.clone())?)?;
                total = &(&(&total + &first) - &second) - &bracket_m(&au1, &bu2, eta);
            }
            Ok(total)
        })
    }

    /// `C†(u⊗v) = C(v⊗u)`.
    pub fn dagger(&self) -> Self {
        assert_eq!(self.arity, 2);
        let a = self.clone();
        WordFunctional::new(self.space, 2, move |w| a.eval(&[w[1].clone(), w[0].clone()]))
    }

    /// Insert a counit leg at `position`: the result has one more argument and vanishes
    /// unless that argument is the unit word.
    pub fn insert_counit(&self, position: usize) -> Self {
        assert!(position <= self.arity);
        let a = self.clone();
        WordFunctional::new(self.space, self.arity + 1, move |w| {
            if !w[position].is_unit() {
                return Ok(Polynomial::zero(a.space));
            }
            let rest: Vec<Word> = w
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != position)
                .map(|(_, x)| x.clone())
                .collect();
            a.eval(&rest)
        })
    }

    /// `θ[C](u⊗v⊗w) = k(v)C(u⊗w)`.
    pub fn theta(&self) -> Self {
        assert_eq!(self.arity, 2);
        self.insert_counit(1)
    }

    /// Fix the last argument to the unit word.
    pub fn reduce(&self) -> Self {
        assert!(self.arity >= 1);
        let a = self.clone();
        WordFunctional::new(self.space, self.arity - 1, move |w| {
            let mut full = w.to_vec();
            full.push(Word::unit());
            a.eval(&full)
        })
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.arity, other.arity);
        let (a, b) = (self.clone(), other.clone());
        WordFunctional::new(self.space, self.arity, move |w| Ok(&a.eval(w)? + &b.eval(w)?))
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.arity, other.arity);
        let (a, b) = (self.clone(), other.clone());
        WordFunctional::new(self.space, self.arity, move |w| Ok(&a.eval(w)? - &b.eval(w)?))
    }
}

fn advance(choice: &mut [usize], legs: &[Vec<(Word, Word)>]) -> bool {
    for (c, l) in choice.iter_mut().zip(legs).rev() {
        *c += 1;
        if *c < l.len() {
            return true;
        }
        *c = 0;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{parse_formal, parse_poly, Chart};
    use crate::groupoid::kp_check;

    fn flat() -> GroupoidData {
        let t = kp_check(vec![vec![Polynomial::one(BaseSpace::complex(1))]]).unwrap();
        GroupoidData::assemble(t, Chart::complex(1, 4, 0)).unwrap()
    }

    fn p(s: &str) -> Polynomial {
        parse_poly(s, BaseSpace::complex(1)).unwrap()
    }

    #[test]
    fn coproduct_of_short_words() {
        assert_eq!(Word::unit().coproduct().unwrap(), vec![(Word::unit(), Word::unit())]);
        let f = Word::letter(p("z1"));
        assert_eq!(f.coproduct().unwrap(), vec![(f.clone(), Word::unit()), (Word::unit(), f.clone())]);
        let fg = Word::new(vec![p("z1"), p("w1")]).unwrap();
        let (zf, wg) = (Word::letter(p("z1")), Word::letter(p("w1")));
        assert_eq!(
            fg.coproduct().unwrap(),
            vec![(fg.clone(), Word::unit()), (zf.clone(), wg.clone()), (wg, zf), (Word::unit(), fg)]
        );
    }

    #[test]
    fn word_cap() {
        let long = vec![p("z1"); 6];
        assert_eq!(Word::new(long), Err(Error::WordTooLong { length: 6, cap: 5 }));
    }

    #[test]
    fn chi_examples() {
        let g = flat();
        let c = g.chart();
        let ff = parse_formal("zeta1*zetab1", c).unwrap();
        assert_eq!(chi_eval(&ff, &Word::unit(), &g).unwrap(), p("0"));
        let u = Word::new(vec![p("w1"), p("z1")]).unwrap();
        assert_eq!(chi_eval(&ff, &u, &g).unwrap(), p("1"));
        let zw = p("z1*w1");
        assert_eq!(
            chi_eval(&g.source(&zw), &u, &g).unwrap(),
            h_action(&u, &zw, g.poisson())
        );
    }

    #[test]
    fn double_angle_examples() {
        let g = flat();
        let zw = p("z1*w1");
        let z = Word::letter(p("z1"));
        let one = Word::unit();
        assert_eq!(
            double_angle_eval(&g.source(&zw), &z, &one, &g).unwrap(),
            bracket_m(&p("z1"), &zw, g.poisson())
        );
        assert!(double_angle_eval(&g.target(&zw), &z, &one, &g).unwrap().is_zero());
    }

    #[test]
    fn x_bracket_gives_tensor() {
        let g = flat();
        let eta = g.poisson();
        let b = WordFunctional::x(p("z1")).c_bracket(&WordFunctional::x(p("w1")), eta);
        assert_eq!(b.at(&Word::unit()).unwrap(), -bracket_m(&p("z1"), &p("w1"), eta));
        assert_eq!(b.at(&Word::unit()).unwrap(), p("1"));
    }

    #[test]
    fn convolution_unit_and_product() {
        let g = flat();
        let a = WordFunctional::chi(parse_formal("z1*zeta1 + zetab1^2", g.chart()).unwrap(), &g);
        let unit = a.convolution(&WordFunctional::counit(BaseSpace::complex(1)));
        let xfg = WordFunctional::x(p("z1")).convolution(&WordFunctional::x(p("w1 + 2")));
        for u in words_up_to(&[p("z1"), p("w1")], 3) {
            assert_eq!(unit.at(&u).unwrap(), a.at(&u).unwrap(), "{u}");
            assert_eq!(xfg.at(&u).unwrap(), k_action(&u, &p("z1*w1 + 2*z1")), "{u}");
        }
    }

    #[test]
    fn tuples_respect_total_length() {
        let t = word_tuples(&[p("z1"), p("w1")], 3, 1);
        assert_eq!(t.len(), 1 + 3 * 2);
        assert!(t.iter().all(|t| t.iter().map(Word::len).sum::<usize>() <= 1));
    }
}
