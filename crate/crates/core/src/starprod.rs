//! Formal differential operators, the flat Wick star product with separation of
//! variables, σ-symbols, and the formal Berezin transform.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use crate::algebra::{Chart, Flavor, FormalFunction, Polynomial, Precision};
use crate::error::{Error, Result};
use crate::multiindex;
use crate::poisson::PoissonTensor;
use crate::Rational;

/// A `nu`-graded differential operator `Σ nu^r a_{r,α} ∂^α` on the base chart.
///
/// Grades above `nu_truncation` are never stored; grades above `nu_valid` are stored but
/// not trustworthy (they arise after dividing by `nu`). Equality compares terms only.
#[derive(Clone)]
pub struct FormalOperator {
    chart: Chart,
    nu_valid: i32,
    terms: BTreeMap<(u32, Vec<u32>), Polynomial>,
}

impl FormalOperator {
    pub fn zero(chart: Chart) -> Self {
        assert_eq!(chart.copies, 1, "operators live on single-copy charts");
        FormalOperator {
            chart,
            nu_valid: chart.nu_truncation as i32,
            terms: BTreeMap::new(),
        }
    }

    pub fn identity(chart: Chart) -> Self {
        Self::multiplication(chart, &Polynomial::one(chart.base))
    }

    /// Pointwise multiplication by `p`.
    pub fn multiplication(chart: Chart, p: &Polynomial) -> Self {
        Self::term(chart, 0, vec![0; chart.block()], p.clone())
    }

    /// The single term `nu^grade · coefficient · ∂^alpha`.
    pub fn term(chart: Chart, grade: u32, alpha: Vec<u32>, coefficient: Polynomial) -> Self {
        let mut op = Self::zero(chart);
        op.push(grade, alpha, coefficient);
        op
    }

    fn push(&mut self, grade: u32, alpha: Vec<u32>, coefficient: Polynomial) {
        if coefficient.is_zero() || grade > self.chart.nu_truncation {
            return;
        }
        let key = (grade, alpha);
        let sum = match self.terms.remove(&key) {
            Some(old) => &old + &coefficient,
            None => coefficient,
        };
        if !sum.is_zero() {
            self.terms.insert(key, sum);
        }
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    /// Highest grade through which the operator is trustworthy.
    pub fn nu_valid(&self) -> i32 {
        self.nu_valid
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, &[u32], &Polynomial)> {
        self.terms.iter().map(|((r, a), c)| (*r, a.as_slice(), c))
    }

    pub fn coefficient(&self, grade: u32, alpha: &[u32]) -> Polynomial {
        self.terms
            .get(&(grade, alpha.to_vec()))
            .cloned()
            .unwrap_or_else(|| Polynomial::zero(self.chart.base))
    }

    /// The grade-`r` part `A_r`, as an operator of grade 0.
    pub fn grade(&self, r: u32) -> Self {
        let mut out = Self::zero(self.chart);
        for ((g, a), c) in &self.terms {
            if *g == r {
                out.push(0, a.clone(), c.clone());
            }
        }
        out
    }

    /// `order(A_r)`: the largest `|α|` at grade `r`, `None` if `A_r = 0`.
    pub fn order_at(&self, r: u32) -> Option<u32> {
        self.terms
            .keys()
            .filter(|(g, _)| *g == r)
            .map(|(_, a)| multiindex::degree(a))
            .max()
    }

    /// The first grade `r` with `order(A_r) > r`, with that order.
    pub fn first_unnatural(&self) -> Option<(u32, u32)> {
        (0..=self.chart.nu_truncation)
            .filter_map(|r| self.order_at(r).filter(|&o| o > r).map(|o| (r, o)))
            .next()
    }

    pub fn is_natural(&self) -> bool {
        self.first_unnatural().is_none()
    }

    fn check_chart(&self, other: &Self) {
        assert_eq!(self.chart, other.chart, "operators on different charts");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_chart(other);
        let mut out = self.clone();
        out.nu_valid = self.nu_valid.min(other.nu_valid);
        for ((g, a), c) in &other.terms {
            out.push(*g, a.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut out = Self::zero(self.chart);
        out.nu_valid = self.nu_valid;
        for ((g, a), p) in &self.terms {
            out.push(*g, a.clone(), p.scale(c));
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Rational::one())
    }

    /// `self ∘ other` via the Leibniz rule.
    pub fn compose(&self, other: &Self) -> Self {
        self.check_chart(other);
        let mut out = Self::zero(self.chart);
        out.nu_valid = self.nu_valid.min(other.nu_valid);
        let top = self.chart.nu_truncation;
        for ((ga, alpha), a) in &self.terms {
            for ((gb, beta), b) in &other.terms {
                if ga + gb > top {
                    continue;
                }
                for gamma in multiindex::below(alpha) {
                    let db = b.derivative_multi(&gamma);
                    if db.is_zero() {
                        continue;
                    }
                    let rest = multiindex::sub(alpha, &gamma).expect("gamma <= alpha");
                    let c = multiindex::binomial_multi(alpha, &gamma);
                    out.push(
                        ga + gb,
                        multiindex::add(&rest, beta),
                        (a * &db).scale(&c),
                    );
                }
            }
        }
        out
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.compose(other).sub(&other.compose(self))
    }

    /// `(1/nu) · self`; requires the grade-0 part to vanish.
    pub fn divide_by_nu(&self) -> Result<Self> {
        if self.terms.keys().any(|(g, _)| *g == 0) {
            return Err(Error::NotUnipotent);
        }
        let mut out = Self::zero(self.chart);
        out.nu_valid = self.nu_valid - 1;
        for ((g, a), c) in &self.terms {
            out.push(g - 1, a.clone(), c.clone());
        }
        Ok(out)
    }

    /// `nu · self`.
    pub fn times_nu(&self) -> Self {
        let mut out = Self::zero(self.chart);
        out.nu_valid = (self.nu_valid + 1).min(self.chart.nu_truncation as i32);
        for ((g, a), c) in &self.terms {
            out.push(g + 1, a.clone(), c.clone());
        }
        out
    }

    /// Drop every term of differential order above `max`.
    pub fn truncate_order(&self, max: u32) -> Self {
        let mut out = Self::zero(self.chart);
        out.nu_valid = self.nu_valid;
        for ((g, a), c) in &self.terms {
            if multiindex::degree(a) <= max {
                out.push(*g, a.clone(), c.clone());
            }
        }
        out
    }

    /// Drop grades above the trustworthy range.
    pub fn reliable_part(&self) -> Self {
        let mut out = Self::zero(self.chart);
        out.nu_valid = self.nu_valid;
        for ((g, a), c) in &self.terms {
            if (*g as i32) <= self.nu_valid {
                out.push(*g, a.clone(), c.clone());
            }
        }
        out
    }

    /// Apply to a fiber-free `nu`-series.
    pub fn apply(&self, f: &FormalFunction) -> Result<FormalFunction> {
        let chart = f.chart();
        let top = chart.nu_truncation;
        let mut out = FormalFunction::zero(chart);
        for s in 0..=top {
            let fs = f.base_coefficient(s)?;
            if fs.is_zero() {
                continue;
            }
            for ((g, a), c) in &self.terms {
                if g + s > top {
                    continue;
                }
                let v = c * &fs.derivative_multi(a);
                out = &out + &nu_power(chart, &v, g + s);
            }
        }
        Ok(out)
    }

    pub fn apply_poly(&self, p: &Polynomial) -> FormalFunction {
        self.apply(&FormalFunction::from_poly(self.chart, p, 0))
            .expect("polynomials are fiber-free")
    }
}

impl fmt::Display for FormalOperator {
    /// Terms as `nu^r*(coefficient)*d_x^k`, grade ascending.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let base = self.chart.base;
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|((g, a), c)| {
                let mut s = String::new();
                if *g > 0 {
                    s += &if *g == 1 { "nu*".to_string() } else { format!("nu^{g}*") };
                }
                s += &format!("({c})");
                for (i, &k) in a.iter().enumerate() {
                    if k == 1 {
                        s += &format!("*d_{}", base.var_name(i));
                    } else if k > 1 {
                        s += &format!("*d_{}^{}", base.var_name(i), k);
                    }
                }
                s
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

impl PartialEq for FormalOperator {
    fn eq(&self, other: &Self) -> bool {
        self.chart == other.chart && self.terms == other.terms
    }
}

impl Eq for FormalOperator {}

impl fmt::Debug for FormalOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FormalOperator({self})")
    }
}

/// `nu^r · p` as a formal function.
pub fn nu_power(chart: Chart, p: &Polynomial, r: u32) -> FormalFunction {
    let mut out = FormalFunction::zero(chart);
    for (e, c) in p.terms() {
        let mut exps = vec![0; chart.nvars() + 1];
        for (i, &k) in e.iter().enumerate() {
            exps[chart.base_index(0, i)] = k;
        }
        exps[chart.nu_index()] = r;
        out = &out + &FormalFunction::monomial(chart, exps, c.clone());
    }
    out
}

/// The σ-symbol: each `∂^α` of order `r` at grade `r` becomes the fiber monomial `ξ^α`.
pub fn sigma(a: &FormalOperator) -> Result<FormalFunction> {
    if let Some((grade, order)) = a.first_unnatural() {
        return Err(Error::NotNatural { grade, order });
    }
    let chart = a.chart();
    let mut out = FormalFunction::zero(chart);
    for (g, alpha, c) in a.terms() {
        if multiindex::degree(alpha) != g || (g as i32) > a.nu_valid() {
            continue;
        }
        let mut fiber = vec![0; chart.nvars() + 1];
        for (i, &k) in alpha.iter().enumerate() {
            fiber[chart.fiber_index(0, i)] = k;
        }
        let mono = FormalFunction::monomial(chart, fiber, Rational::one());
        out = &out + &(&FormalFunction::from_poly(chart, c, 0) * &mono);
    }
    let valid = Precision::Through(a.nu_valid().min(chart.fiber_truncation as i32));
    Ok(out.with_valid(valid))
}

/// The Wick star product with separation of variables for a constant tensor `g^{l̄k}`:
/// `φ ⋆ ψ = Σ_n nu^n/n! g^{l₁k₁}…g^{l_nk_n} (∂̄_{l₁}…∂̄_{l_n}φ)(∂_{k₁}…∂_{k_n}ψ)`.
#[derive(Clone, Debug)]
pub struct StarProduct {
    chart: Chart,
    tensor: PoissonTensor,
    /// Per grade: (antiholomorphic multi-index on φ, holomorphic multi-index on ψ) → weight.
    weights: Vec<BTreeMap<(Vec<u32>, Vec<u32>), Rational>>,
}

impl StarProduct {
    pub fn new(chart: Chart, tensor: PoissonTensor) -> Result<Self> {
        let g = match &tensor {
            PoissonTensor::Complex(g) if chart.flavor() == Flavor::Complex => g,
            _ => return Err(Error::Config("the Wick product needs a complex chart".into())),
        };
        if tensor.space() != chart.base || chart.copies != 1 {
            return Err(Error::ChartMismatch("tensor and chart differ".into()));
        }
        let d = chart.dim();
        let mut consts = vec![vec![Rational::zero(); d]; d];
        for (l, row) in g.iter().enumerate() {
            for (k, e) in row.iter().enumerate() {
                if !e.is_constant() {
                    return Err(Error::NonFlatTensor {
                        row: l + 1,
                        col: k + 1,
                        entry: e.to_string(),
                    });
                }
                consts[l][k] = e.constant_term();
            }
        }
        let mut weights = Vec::new();
        let mut cur = BTreeMap::new();
        cur.insert((vec![0; d], vec![0; d]), Rational::one());
        weights.push(cur.clone());
        for n in 1..=chart.nu_truncation {
            let mut next: BTreeMap<(Vec<u32>, Vec<u32>), Rational> = BTreeMap::new();
            let inv = Rational::new(1.into(), (n as i64).into());
            for ((a, b), w) in &cur {
                for (l, row) in consts.iter().enumerate() {
                    for (k, gk) in row.iter().enumerate() {
                        if gk.is_zero() {
                            continue;
                        }
                        let mut a2 = a.clone();
                        a2[l] += 1;
                        let mut b2 = b.clone();
                        b2[k] += 1;
                        *next.entry((a2, b2)).or_insert_with(Rational::zero) += w * gk * &inv;
                    }
                }
            }
            next.retain(|_, v| !v.is_zero());
            weights.push(next.clone());
            cur = next;
        }
        Ok(StarProduct {
            chart,
            tensor,
            weights,
        })
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn tensor(&self) -> &PoissonTensor {
        &self.tensor
    }

    fn split(&self, a: &[u32], b: &[u32]) -> (Vec<u32>, Vec<u32>) {
        let d = self.chart.dim();
        let mut anti = vec![0; 2 * d];
        anti[d..].copy_from_slice(a);
        let mut holo = vec![0; 2 * d];
        holo[..d].copy_from_slice(b);
        (anti, holo)
    }

    /// `φ ⋆ ψ` as a fiber-free `nu`-series.
    pub fn star(&self, phi: &Polynomial, psi: &Polynomial) -> FormalFunction {
        let mut out = FormalFunction::zero(self.chart);
        for (n, grade) in self.weights.iter().enumerate() {
            let mut acc = Polynomial::zero(self.chart.base);
            for ((a, b), w) in grade {
                let (anti, holo) = self.split(a, b);
                let t = &phi.derivative_multi(&anti) * &psi.derivative_multi(&holo);
                acc = &acc + &t.scale(w);
            }
            out = &out + &nu_power(self.chart, &acc, n as u32);
        }
        out
    }

    /// `⋆` extended bilinearly to `nu`-series.
    pub fn star_series(&self, f: &FormalFunction, g: &FormalFunction) -> Result<FormalFunction> {
        let top = self.chart.nu_truncation;
        let mut out = FormalFunction::zero(self.chart);
        for s in 0..=top {
            let fs = f.base_coefficient(s)?;
            if fs.is_zero() {
                continue;
            }
            for t in 0..=(top - s) {
                let gt = g.base_coefficient(t)?;
                if gt.is_zero() {
                    continue;
                }
                let prod = self.star(&fs, &gt);
                out = &out + &(&prod * &nu_power(self.chart, &Polynomial::one(self.chart.base), s + t));
            }
        }
        Ok(out)
    }

    /// The left multiplication operator `L_f: ψ ↦ f ⋆ ψ`.
    pub fn left_op(&self, f: &Polynomial) -> FormalOperator {
        let mut op = FormalOperator::zero(self.chart);
        for (n, grade) in self.weights.iter().enumerate() {
            for ((a, b), w) in grade {
                let (anti, holo) = self.split(a, b);
                op.push(n as u32, holo, f.derivative_multi(&anti).scale(w));
            }
        }
        op
    }

    /// The right multiplication operator `R_f: ψ ↦ ψ ⋆ f`.
    pub fn right_op(&self, f: &Polynomial) -> FormalOperator {
        let mut op = FormalOperator::zero(self.chart);
        for (n, grade) in self.weights.iter().enumerate() {
            for ((a, b), w) in grade {
                let (anti, holo) = self.split(a, b);
                op.push(n as u32, anti, f.derivative_multi(&holo).scale(w));
            }
        }
        op
    }

    /// `Δ = g^{l̄k} ∂_k ∂̄_l`.
    pub fn laplacian(&self) -> FormalOperator {
        let base = self.chart.base;
        let mut op = FormalOperator::zero(self.chart);
        for (l, row) in self.tensor.entries().iter().enumerate() {
            for (k, e) in row.iter().enumerate() {
                let mut alpha = vec![0; base.nvars()];
                alpha[base.z(k)] += 1;
                alpha[base.w(l)] += 1;
                op.push(0, alpha, e.clone());
            }
        }
        op
    }

    /// The Berezin transform on a monomial: `B(z^P w^Q) = w^Q ⋆ z^P`.
    pub fn berezin_monomial(&self, exps: &[u32]) -> FormalFunction {
        let base = self.chart.base;
        let d = base.dim;
        let mut holo = exps.to_vec();
        let mut anti = exps.to_vec();
        for i in 0..d {
            holo[base.w(i)] = 0;
            anti[base.z(i)] = 0;
        }
        let a = Polynomial::monomial(base, holo, Rational::one());
        let b = Polynomial::monomial(base, anti, Rational::one());
        self.star(&b, &a)
    }

    /// `B` applied to a fiber-free `nu`-series, monomial by monomial.
    pub fn berezin_apply(&self, f: &FormalFunction) -> Result<FormalFunction> {
        let top = self.chart.nu_truncation;
        let mut out = FormalFunction::zero(self.chart);
        for s in 0..=top {
            let fs = f.base_coefficient(s)?;
            for (e, c) in fs.terms() {
                let img = self.berezin_monomial(e).scale(c);
                let shifted = &img * &nu_power(self.chart, &Polynomial::one(self.chart.base), s);
                out = &out + &shifted;
            }
        }
        Ok(out)
    }

    /// `B⁻¹` on a `nu`-series, by the geometric series in `1 − B`.
    pub fn berezin_inverse_apply(&self, f: &FormalFunction) -> Result<FormalFunction> {
        let mut out = f.clone();
        let mut term = f.clone();
        for _ in 0..self.chart.nu_truncation {
            term = &term - &self.berezin_apply(&term)?;
            if term.is_zero() {
                break;
            }
            out = &out + &term;
        }
        Ok(out)
    }

    /// The dual product `φ ∗̃ ψ = B⁻¹(Bψ ⋆ Bφ)`.
    pub fn dual_star(&self, phi: &Polynomial, psi: &Polynomial) -> Result<FormalFunction> {
        let bphi = self.berezin_apply(&FormalFunction::from_poly(self.chart, phi, 0))?;
        let bpsi = self.berezin_apply(&FormalFunction::from_poly(self.chart, psi, 0))?;
        self.berezin_inverse_apply(&self.star_series(&bpsi, &bphi)?)
    }
}

/// `B` as a formal operator determined by its action on monomials of degree `<= basis_degree`.
///
/// For each grade the coefficients `b_α` are solved in order of increasing `|α|` from
/// `B_r(x^α) = Σ_{β ≤ α} b_β α!/(α−β)! x^{α−β}`.
pub fn berezin_transform(star: &StarProduct, basis_degree: u32) -> FormalOperator {
    let chart = star.chart();
    let base = chart.base;
    let n = base.nvars();
    let basis = multiindex::up_to_degree(n, basis_degree);
    let images: Vec<FormalFunction> = basis.iter().map(|e| star.berezin_monomial(e)).collect();
    let mut op = FormalOperator::zero(chart);
    for r in 0..=chart.nu_truncation {
        let mut solved: BTreeMap<Vec<u32>, Polynomial> = BTreeMap::new();
        for (alpha, img) in basis.iter().zip(&images) {
            let mut rhs = img.base_coefficient(r).expect("fiber-free");
            for (beta, b) in &solved {
                if let Some(rest) = multiindex::sub(alpha, beta) {
                    let c = multiindex::factorial_multi(alpha) / multiindex::factorial_multi(&rest);
                    let mono = Polynomial::monomial(base, rest, c);
                    rhs = &rhs - &(b * &mono);
                }
            }
            let b = rhs.scale(&(Rational::one() / multiindex::factorial_multi(alpha)));
            if !b.is_zero() {
                solved.insert(alpha.clone(), b);
            }
        }
        for (alpha, b) in solved {
            op.push(r, alpha, b);
        }
    }
    op
}

fn check_unipotent(b: &FormalOperator) -> Result<FormalOperator> {
    let n = b.sub(&FormalOperator::identity(b.chart()));
    if n.terms().any(|(g, _, _)| g == 0) {
        return Err(Error::NotUnipotent);
    }
    Ok(n)
}

/// `B⁻¹ = Σ (1 − B)^n`.
pub fn berezin_inverse(b: &FormalOperator) -> Result<FormalOperator> {
    let n = check_unipotent(b)?.neg();
    let mut out = FormalOperator::identity(b.chart());
    let mut power = FormalOperator::identity(b.chart());
    for _ in 0..b.chart().nu_truncation {
        power = power.compose(&n);
        out = out.add(&power);
    }
    Ok(out)
}

/// `X = nu · log B = nu Σ_{n≥1} (−1)^{n+1}/n (B − 1)^n`.
pub fn log_berezin(b: &FormalOperator) -> Result<FormalOperator> {
    let n = check_unipotent(b)?;
    let chart = b.chart();
    let mut log = FormalOperator::zero(chart);
    let mut power = FormalOperator::identity(chart);
    for k in 1..=chart.nu_truncation {
        power = power.compose(&n);
        let sign = if k % 2 == 1 { 1 } else { -1 };
        log = log.add(&power.scale(&Rational::new(sign.into(), (k as i64).into())));
    }
    Ok(log.times_nu())
}

/// `exp((1/nu) X)` for an operator `X` with vanishing grades 0 and 1.
pub fn exp_over_nu(x: &FormalOperator) -> Result<FormalOperator> {
    let a = x.divide_by_nu()?;
    if a.terms().any(|(g, _, _)| g == 0) {
        return Err(Error::NotUnipotent);
    }
    let chart = x.chart();
    let mut out = FormalOperator::identity(chart);
    let mut power = FormalOperator::identity(chart);
    for k in 1..=chart.nu_truncation {
        power = power
            .compose(&a)
            .scale(&Rational::new(1.into(), (k as i64).into()));
        out = out.add(&power);
    }
    Ok(out)
}
