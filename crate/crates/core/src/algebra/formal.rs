use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};

use super::polynomial::{monomial_string, write_sum, write_term};
use super::{Chart, Polynomial, Precision};
use crate::error::{Error, Result};
use crate::Rational;

/// A truncated formal function on a chart of the cotangent bundle.
///
/// Each term is an exponent vector over all chart variables followed by the power of
/// `nu`. Terms of fiber degree above `fiber_truncation` or `nu` power above
/// `nu_truncation` are never stored. `valid` records the fiber order through which the
/// stored terms are trustworthy; operations that differentiate in fiber directions
/// lower it. Equality compares the stored terms only.
#[derive(Clone)]
pub struct FormalFunction {
    chart: Chart,
    terms: BTreeMap<Vec<u32>, Rational>,
    valid: Precision,
}

impl FormalFunction {
    pub fn zero(chart: Chart) -> Self {
        FormalFunction {
            chart,
            terms: BTreeMap::new(),
            valid: Precision::Exact,
        }
    }

    pub fn one(chart: Chart) -> Self {
        Self::constant(chart, Rational::one())
    }

    pub fn constant(chart: Chart, c: Rational) -> Self {
        Self::monomial(chart, vec![0; chart.nvars() + 1], c)
    }

    pub fn from_int(chart: Chart, c: i64) -> Self {
        Self::constant(chart, Rational::from_integer(c.into()))
    }

    /// A single term; dropped (with reduced precision) if it exceeds the truncation.
    pub fn monomial(chart: Chart, exps: Vec<u32>, c: Rational) -> Self {
        let mut f = Self::zero(chart);
        f.push(exps, c);
        f
    }

    /// The chart variable with index `index` (`chart.nu_index()` gives `nu`).
    pub fn var(chart: Chart, index: usize) -> Self {
        let mut exps = vec![0; chart.nvars() + 1];
        exps[index] = 1;
        Self::monomial(chart, exps, Rational::one())
    }

    pub fn base_var(chart: Chart, copy: usize, i: usize) -> Self {
        Self::var(chart, chart.base_index(copy, i))
    }

    pub fn fiber(chart: Chart, copy: usize, i: usize) -> Self {
        Self::var(chart, chart.fiber_index(copy, i))
    }

    pub fn nu(chart: Chart) -> Self {
        Self::var(chart, chart.nu_index())
    }

    /// Embed a base polynomial as a fiber-independent function on copy `copy`.
    pub fn from_poly(chart: Chart, p: &Polynomial, copy: usize) -> Self {
        assert_eq!(p.space(), chart.base, "polynomial lives on a different chart");
        let mut f = Self::zero(chart);
        for (e, c) in p.terms() {
            let mut exps = vec![0; chart.nvars() + 1];
            for (i, &k) in e.iter().enumerate() {
                exps[chart.base_index(copy, i)] = k;
            }
            f.push(exps, c.clone());
        }
        f
    }

    /// Build from raw terms; anything beyond the truncation is dropped.
    pub fn from_terms<I>(chart: Chart, terms: I) -> Self
    where
        I: IntoIterator<Item = (Vec<u32>, Rational)>,
    {
        let mut f = Self::zero(chart);
        for (e, c) in terms {
            assert_eq!(e.len(), chart.nvars() + 1);
            f.push(e, c);
        }
        f
    }

    fn push(&mut self, exps: Vec<u32>, c: Rational) {
        if c.is_zero() {
            return;
        }
        let fd = self.chart.fiber_degree(&exps);
        if fd > self.chart.fiber_truncation {
            self.valid = self.valid.capped(self.chart.fiber_truncation as i32);
            return;
        }
        if exps[self.chart.nu_index()] > self.chart.nu_truncation {
            return;
        }
        match self.terms.entry(exps) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn valid(&self) -> Precision {
        self.valid
    }

    /// Override the recorded precision (for values known to be exact by construction).
    pub fn with_valid(mut self, valid: Precision) -> Self {
        self.valid = match valid {
            Precision::Exact => Precision::Exact,
            Precision::Through(k) => Precision::Through(k.min(self.chart.fiber_truncation as i32)),
        };
        self
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], &Rational)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), c))
    }

    pub fn coefficient(&self, exps: &[u32]) -> Rational {
        self.terms.get(exps).cloned().unwrap_or_else(Rational::zero)
    }

    /// Minimal total fiber degree over nonzero terms; `None` stands for +∞ (the zero function).
    pub fn filtration_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| self.chart.fiber_degree(e)).min()
    }

    pub fn max_fiber_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| self.chart.fiber_degree(e)).max()
    }

    /// Lowest fiber degree that could carry a nonzero term, counting unknown ones.
    fn low_bound(&self) -> Option<i32> {
        let stored = self.filtration_degree().map(|d| d as i32);
        match (stored, self.valid) {
            (None, Precision::Exact) => None,
            (None, Precision::Through(k)) => Some(k + 1),
            (Some(d), Precision::Exact) => Some(d),
            (Some(d), Precision::Through(k)) => Some(d.min(k + 1)),
        }
    }

    fn check_chart(&self, other: &Self) -> Result<()> {
        if self.chart != other.chart {
            return Err(Error::ChartMismatch(format!(
                "{:?} vs {:?}",
                self.chart, other.chart
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_chart(other)?;
        Ok(self.combine(other, &Rational::one()))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_chart(other)?;
        Ok(self.combine(other, &-Rational::one()))
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_chart(other)?;
        Ok(self.product(other))
    }

    fn combine(&self, other: &Self, sign: &Rational) -> Self {
        let mut out = self.clone();
        out.valid = self.valid.min(other.valid);
        for (e, c) in &other.terms {
            out.push(e.clone(), c * sign);
        }
        out
    }

    fn product(&self, other: &Self) -> Self {
        let chart = self.chart;
        let nfib = chart.fiber_truncation;
        let nnu = chart.nu_truncation;
        let nu = chart.nu_index();
        let mut out = Self::zero(chart);
        let mut dropped = false;
        let lhs: Vec<_> = self
            .terms
            .iter()
            .map(|(e, c)| (e, c, chart.fiber_degree(e)))
            .collect();
        let rhs: Vec<_> = other
            .terms
            .iter()
            .map(|(e, c)| (e, c, chart.fiber_degree(e)))
            .collect();
        for (ea, ca, da) in &lhs {
            for (eb, cb, db) in &rhs {
                if da + db > nfib {
                    dropped = true;
                    continue;
                }
                if ea[nu] + eb[nu] > nnu {
                    continue;
                }
                let e: Vec<u32> = ea.iter().zip(eb.iter()).map(|(x, y)| x + y).collect();
                out.push(e, *ca * *cb);
            }
        }
        let from_self = match self.valid {
            Precision::Exact => Precision::Exact,
            Precision::Through(k) => match other.low_bound() {
                None => Precision::Exact,
                Some(l) => Precision::Through(k + l),
            },
        };
        let from_other = match other.valid {
            Precision::Exact => Precision::Exact,
            Precision::Through(k) => match self.low_bound() {
                None => Precision::Exact,
                Some(l) => Precision::Through(k + l),
            },
        };
        let mut valid = from_self.min(from_other);
        if dropped || valid != Precision::Exact {
            valid = valid.capped(nfib as i32);
        }
        out.valid = valid.min(out.valid);
        out
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut out = Self::zero(self.chart);
        out.valid = self.valid;
        if c.is_zero() {
            return out;
        }
        out.terms = self.terms.iter().map(|(e, x)| (e.clone(), x * c)).collect();
        out
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one(self.chart);
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Partial derivative in chart variable `index`; fiber derivatives lower the valid order.
    pub fn derivative(&self, index: usize) -> Self {
        let mut out = Self::zero(self.chart);
        for (e, c) in &self.terms {
            if e[index] == 0 {
                continue;
            }
            let mut d = e.clone();
            d[index] -= 1;
            out.push(d, c * Rational::from_integer(e[index].into()));
        }
        out.valid = if self.chart.is_fiber(index) {
            self.valid.lowered(1)
        } else {
            self.valid
        };
        out
    }

    /// The zero-section evaluation `E`: keep the fiber-degree-0 terms.
    pub fn zero_section_eval(&self) -> Self {
        let mut out = Self::zero(self.chart);
        for (e, c) in &self.terms {
            if self.chart.fiber_degree(e) == 0 {
                out.push(e.clone(), c.clone());
            }
        }
        out.valid = if self.valid.covers(0) {
            Precision::Exact
        } else {
            self.valid
        };
        out
    }

    /// The pullback by `τ: (x, ξ) ↦ (x, −ξ)`.
    pub fn tau_star(&self) -> Self {
        let mut out = self.clone();
        for (e, c) in out.terms.iter_mut() {
            if self.chart.fiber_degree(e) % 2 == 1 {
                *c = -c.clone();
            }
        }
        out
    }

    /// Drop all terms above fiber degree `k`.
    pub fn truncate_fiber(&self, k: i32) -> Self {
        let mut out = Self::zero(self.chart);
        for (e, c) in &self.terms {
            if (self.chart.fiber_degree(e) as i32) <= k {
                out.push(e.clone(), c.clone());
            }
        }
        let had_more = self
            .max_fiber_degree()
            .is_some_and(|d| d as i32 > k);
        out.valid = if had_more || self.valid != Precision::Exact {
            self.valid.capped(k)
        } else {
            Precision::Exact
        };
        out
    }

    /// The terms that are trustworthy: those of fiber degree within the valid order.
    pub fn reliable_part(&self) -> Self {
        match self.valid {
            Precision::Exact => self.clone(),
            Precision::Through(k) => self.truncate_fiber(k),
        }
    }

    /// True when every trustworthy term vanishes.
    pub fn is_zero_mod_valid(&self) -> bool {
        self.terms
            .keys()
            .all(|e| !self.valid.covers(self.chart.fiber_degree(e) as i32))
    }

    /// Homogeneous component of fiber degree exactly `n`.
    pub fn fiber_component(&self, n: u32) -> Self {
        let mut out = Self::zero(self.chart);
        for (e, c) in &self.terms {
            if self.chart.fiber_degree(e) == n {
                out.push(e.clone(), c.clone());
            }
        }
        out.valid = if self.valid.covers(n as i32) {
            Precision::Exact
        } else {
            self.valid
        };
        out
    }

    /// Component of `nu` power exactly `r`.
    pub fn nu_component(&self, r: u32) -> Self {
        let nu = self.chart.nu_index();
        let mut out = Self::zero(self.chart);
        out.valid = self.valid;
        for (e, c) in &self.terms {
            if e[nu] == r {
                out.push(e.clone(), c.clone());
            }
        }
        out
    }

    pub fn is_fiber_free(&self) -> bool {
        self.terms.keys().all(|e| self.chart.fiber_degree(e) == 0)
    }

    /// The base polynomial on copy 0 carried by the `nu^r` fiber-free part.
    pub fn base_coefficient(&self, r: u32) -> Result<Polynomial> {
        let chart = self.chart;
        let mut p = Polynomial::zero(chart.base);
        for (e, c) in &self.terms {
            if chart.fiber_degree(e) > 0 {
                return Err(Error::FiberVariablesPresent);
            }
            if e[chart.nu_index()] != r {
                continue;
            }
            let mut pe = vec![0; chart.block()];
            for copy in 0..chart.copies {
                for (i, slot) in pe.iter_mut().enumerate() {
                    let k = e[chart.base_index(copy, i)];
                    if k > 0 {
                        if copy > 0 {
                            return Err(Error::ChartMismatch(
                                "function depends on a secondary base copy".into(),
                            ));
                        }
                        *slot = k;
                    }
                }
            }
            p.add_term(pe, c.clone());
        }
        Ok(p)
    }

    /// The fiber-free, `nu`-free value as a base polynomial.
    pub fn to_polynomial(&self) -> Result<Polynomial> {
        if self
            .terms
            .keys()
            .any(|e| e[self.chart.nu_index()] > 0)
        {
            return Err(Error::ChartMismatch("function depends on nu".into()));
        }
        self.base_coefficient(0)
    }

    /// Move to another chart, sending variable `i` to `map(i)`.
    ///
    /// Variables mapped to `None` are set to zero. `nu` is always carried to `nu`.
    pub fn relabel(&self, target: Chart, map: impl Fn(usize) -> Option<usize>) -> Self {
        let nu = self.chart.nu_index();
        let mut out = Self::zero(target);
        out.valid = self.valid;
        'terms: for (e, c) in &self.terms {
            let mut d = vec![0; target.nvars() + 1];
            for (i, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                if i == nu {
                    d[target.nu_index()] += k;
                    continue;
                }
                match map(i) {
                    Some(j) => d[j] += k,
                    None => continue 'terms,
                }
            }
            out.push(d, c.clone());
        }
        out
    }

    fn display_groups(&self) -> Vec<(Vec<u32>, Vec<(Vec<u32>, Rational)>)> {
        let chart = self.chart;
        let mut groups: BTreeMap<Vec<u32>, Vec<(Vec<u32>, Rational)>> = BTreeMap::new();
        for (e, c) in &self.terms {
            let mut outer = e.clone();
            let mut inner = vec![0; e.len()];
            for i in 0..chart.nvars() {
                if !chart.is_fiber(i) {
                    inner[i] = e[i];
                    outer[i] = 0;
                }
            }
            groups.entry(outer).or_default().push((inner, c.clone()));
        }
        let nu = chart.nu_index();
        let mut out: Vec<_> = groups.into_iter().collect();
        out.sort_by(|a, b| {
            a.0[nu]
                .cmp(&b.0[nu])
                .then_with(|| chart.fiber_degree(&a.0).cmp(&chart.fiber_degree(&b.0)))
                .then_with(|| b.0.cmp(&a.0))
        });
        for (_, inner) in out.iter_mut() {
            inner.sort_by(|a, b| display_order(&a.0, &b.0));
        }
        out
    }
}

fn display_order(a: &[u32], b: &[u32]) -> Ordering {
    let da: u32 = a.iter().sum();
    let db: u32 = b.iter().sum();
    da.cmp(&db).then_with(|| b.cmp(a))
}

impl fmt::Display for FormalFunction {
    /// Terms grouped by fiber/`nu` monomial, e.g. `(1 + z1*w1)*zeta1*zetab1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let chart = self.chart;
        let name = |i: usize| chart.var_name(i);
        let mut first = true;
        for (outer, inner) in self.display_groups() {
            let outer_mono = monomial_string(&outer, &name);
            if outer_mono.is_empty() || inner.len() == 1 {
                for (e, c) in inner {
                    let full: Vec<u32> = e.iter().zip(&outer).map(|(a, b)| a + b).collect();
                    let mono = monomial_string(&full, &name);
                    if first {
                        write_term(f, &c, &mono)?;
                    } else if c.is_negative() {
                        f.write_str(" - ")?;
                        write_term(f, &-c, &mono)?;
                    } else {
                        f.write_str(" + ")?;
                        write_term(f, &c, &mono)?;
                    }
                    first = false;
                }
            } else {
                if !first {
                    f.write_str(" + ")?;
                }
                f.write_str("(")?;
                write_sum(f, &inner, &name)?;
                write!(f, ")*{}", outer_mono)?;
                first = false;
            }
        }
        Ok(())
    }
}

impl PartialEq for FormalFunction {
    fn eq(&self, other: &Self) -> bool {
        self.chart == other.chart && self.terms == other.terms
    }
}

impl Eq for FormalFunction {}

impl fmt::Debug for FormalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FormalFunction({}; {})", self, self.valid)
    }
}

impl<'a> Add<&'a FormalFunction> for &'a FormalFunction {
    type Output = FormalFunction;
    fn add(self, rhs: &'a FormalFunction) -> FormalFunction {
        self.try_add(rhs).expect("formal functions on different charts")
    }
}

impl<'a> Sub<&'a FormalFunction> for &'a FormalFunction {
    type Output = FormalFunction;
    fn sub(self, rhs: &'a FormalFunction) -> FormalFunction {
        self.try_sub(rhs).expect("formal functions on different charts")
    }
}

impl<'a> Mul<&'a FormalFunction> for &'a FormalFunction {
    type Output = FormalFunction;
    fn mul(self, rhs: &'a FormalFunction) -> FormalFunction {
        self.try_mul(rhs).expect("formal functions on different charts")
    }
}

impl Neg for &FormalFunction {
    type Output = FormalFunction;
    fn neg(self) -> FormalFunction {
        self.scale(&-Rational::one())
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<FormalFunction> for FormalFunction {
            type Output = FormalFunction;
            fn $m(self, rhs: FormalFunction) -> FormalFunction {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for FormalFunction {
    type Output = FormalFunction;
    fn neg(self) -> FormalFunction {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parse_formal;

    fn chart(nfib: u32) -> Chart {
        Chart::complex(1, nfib, 2)
    }

    fn p(s: &str, c: Chart) -> FormalFunction {
        parse_formal(s, c).unwrap()
    }

    #[test]
    fn monomial_product() {
        let c = chart(2);
        assert_eq!(p("zeta1*z1", c) * p("zetab1*w1", c), p("z1*w1*zeta1*zetab1", c));
    }

    #[test]
    fn truncated_product_vanishes() {
        let c = chart(2);
        let r = p("zeta1^2", c) * p("zetab1", c);
        assert!(r.is_zero());
        assert_eq!(r.valid(), Precision::Through(2));
    }

    #[test]
    fn difference_of_squares() {
        let c = chart(2);
        let r = p("1 + zeta1*z1", c) * p("1 - zeta1*z1", c);
        assert_eq!(r, p("1 - z1^2*zeta1^2", c));
    }

    #[test]
    fn zero_section() {
        let c = chart(3);
        assert_eq!(p("z1*w1 + z1*zeta1", c).zero_section_eval(), p("z1*w1", c));
        assert!(p("zeta1*zetab1", c).zero_section_eval().is_zero());
        let prod = p("1 + nu*zeta1*z1", c) * p("w1 + zetab1", c);
        assert_eq!(prod.zero_section_eval(), p("w1", c));
    }

    #[test]
    fn filtration() {
        let c = chart(4);
        assert_eq!(p("zeta1*zetab1", c).filtration_degree(), Some(2));
        assert_eq!(p("z1*w1 + z1*zeta1", c).filtration_degree(), Some(0));
        assert_eq!(p("zeta1^2*w1 + zeta1*zetab1^2", c).filtration_degree(), Some(2));
        assert_eq!(FormalFunction::zero(c).filtration_degree(), None);
    }

    #[test]
    fn fiber_derivative_lowers_precision() {
        let c = chart(3);
        let f = p("zeta1^3 + z1", c);
        let d = f.derivative(c.fiber_index(0, 0));
        assert_eq!(d.valid(), Precision::Exact);
        let g = (&f * &f).derivative(c.fiber_index(0, 0));
        assert_eq!(g.valid(), Precision::Through(2));
    }

    #[test]
    fn grouped_display() {
        let c = chart(2);
        let f = p("(1 + z1*w1)*zeta1*zetab1", c);
        assert_eq!(f.to_string(), "(1 + z1*w1)*zeta1*zetab1");
        let g = p("z1*w1 - z1*zeta1 + 2*nu", c);
        assert_eq!(g.to_string(), "z1*w1 - z1*zeta1 + 2*nu");
    }

    #[test]
    fn tau_is_involution() {
        let c = chart(3);
        let f = p("z1 + zeta1 - z1*zeta1*zetab1 + zetab1^2", c);
        assert_eq!(f.tau_star().tau_star(), f);
        assert_eq!(f.tau_star(), p("z1 - zeta1 - z1*zeta1*zetab1 + zetab1^2", c));
    }
}
