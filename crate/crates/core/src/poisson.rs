//! Poisson brackets on the base and on the cotangent chart, Hamiltonian vector fields,
//! and exponentials of filtration-raising derivations.

use std::collections::BTreeMap;

use num_traits::One;

use crate::algebra::{BaseSpace, Chart, Flavor, FormalFunction, Polynomial};
use crate::error::{Error, Result};
use crate::Rational;

/// A Poisson tensor on the base chart.
///
/// `Real` holds the antisymmetric matrix `η^{ij}`. `Complex` holds `g^{l̄k}` with
/// `entries[l][k]` the coefficient pairing `∂̄_l` with `∂_k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PoissonTensor {
    Real(Vec<Vec<Polynomial>>),
    Complex(Vec<Vec<Polynomial>>),
}

impl PoissonTensor {
    pub fn real(eta: Vec<Vec<Polynomial>>) -> Result<Self> {
        let d = check_square(&eta, Flavor::Real)?;
        for i in 0..d {
            for j in 0..d {
                if !(&eta[i][j] + &eta[j][i]).is_zero() {
                    return Err(Error::Config(format!(
                        "real Poisson tensor is not antisymmetric at ({}, {})",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(PoissonTensor::Real(eta))
    }

    pub fn complex(g: Vec<Vec<Polynomial>>) -> Result<Self> {
        check_square(&g, Flavor::Complex)?;
        Ok(PoissonTensor::Complex(g))
    }

    /// The complex tensor with constant entries `g^{l̄k} = δ^{lk}`.
    pub fn complex_identity(dim: usize) -> Self {
        let s = BaseSpace::complex(dim);
        PoissonTensor::Complex(
            (0..dim)
                .map(|l| {
                    (0..dim)
                        .map(|k| Polynomial::from_int(s, (l == k) as i64))
                        .collect()
                })
                .collect(),
        )
    }

    pub fn entries(&self) -> &Vec<Vec<Polynomial>> {
        match self {
            PoissonTensor::Real(m) | PoissonTensor::Complex(m) => m,
        }
    }

    pub fn dim(&self) -> usize {
        self.entries().len()
    }

    pub fn space(&self) -> BaseSpace {
        match self {
            PoissonTensor::Real(_) => BaseSpace::real(self.dim()),
            PoissonTensor::Complex(_) => BaseSpace::complex(self.dim()),
        }
    }

    pub fn is_constant(&self) -> bool {
        self.entries().iter().flatten().all(Polynomial::is_constant)
    }

    /// The full antisymmetric matrix over all base coordinates.
    ///
    /// For complex tensors `η^{w_l, z_k} = g^{l̄k}` and `η^{z_k, w_l} = −g^{l̄k}`.
    pub fn full_matrix(&self) -> Vec<Vec<Polynomial>> {
        let space = self.space();
        match self {
            PoissonTensor::Real(m) => m.clone(),
            PoissonTensor::Complex(g) => {
                let n = space.nvars();
                let mut eta = vec![vec![Polynomial::zero(space); n]; n];
                for (l, row) in g.iter().enumerate() {
                    for (k, entry) in row.iter().enumerate() {
                        eta[space.w(l)][space.z(k)] = entry.clone();
                        eta[space.z(k)][space.w(l)] = -entry;
                    }
                }
                eta
            }
        }
    }

    /// The opposite tensor `−η`.
    pub fn negated(&self) -> Self {
        let neg = |m: &Vec<Vec<Polynomial>>| m.iter().map(|r| r.iter().map(|p| -p).collect()).collect();
        match self {
            PoissonTensor::Real(m) => PoissonTensor::Real(neg(m)),
            PoissonTensor::Complex(m) => PoissonTensor::Complex(neg(m)),
        }
    }
}

fn check_square(m: &[Vec<Polynomial>], flavor: Flavor) -> Result<usize> {
    let d = m.len();
    if d == 0 {
        return Err(Error::Config("tensor must have at least one row".into()));
    }
    let space = BaseSpace::new(d, flavor);
    for row in m {
        if row.len() != d {
            return Err(Error::Config(format!("tensor must be {d}x{d}")));
        }
        if row.iter().any(|p| p.space() != space) {
            return Err(Error::ChartMismatch("tensor entry on a different chart".into()));
        }
    }
    Ok(d)
}

/// The base bracket `{f, g}_M`.
pub fn bracket_m(f: &Polynomial, g: &Polynomial, eta: &PoissonTensor) -> Polynomial {
    let space = eta.space();
    assert_eq!(f.space(), space);
    assert_eq!(g.space(), space);
    let mut out = Polynomial::zero(space);
    match eta {
        PoissonTensor::Real(m) => {
            for (i, row) in m.iter().enumerate() {
                let fi = f.derivative(i);
                if fi.is_zero() {
                    continue;
                }
                for (j, e) in row.iter().enumerate() {
                    if e.is_zero() {
                        continue;
                    }
                    out = &out + &(&(e * &fi) * &g.derivative(j));
                }
            }
        }
        PoissonTensor::Complex(m) => {
            for (l, row) in m.iter().enumerate() {
                let fl = f.derivative(space.w(l));
                let gl = g.derivative(space.w(l));
                for (k, e) in row.iter().enumerate() {
                    if e.is_zero() {
                        continue;
                    }
                    let t = &(&fl * &g.derivative(space.z(k))) - &(&gl * &f.derivative(space.z(k)));
                    out = &out + &(e * &t);
                }
            }
        }
    }
    out
}

/// `{F, G}_M` for fiber-free formal functions without `nu`.
pub fn bracket_m_formal(
    f: &FormalFunction,
    g: &FormalFunction,
    eta: &PoissonTensor,
) -> Result<FormalFunction> {
    if !f.is_fiber_free() || !g.is_fiber_free() {
        return Err(Error::FiberVariablesPresent);
    }
    let chart = f.chart();
    let b = bracket_m(&f.to_polynomial()?, &g.to_polynomial()?, eta);
    Ok(FormalFunction::from_poly(chart, &b, 0).with_valid(f.valid().min(g.valid())))
}

/// The canonical bracket on the cotangent chart, summed over all copies.
pub fn bracket_tm(f: &FormalFunction, g: &FormalFunction) -> Result<FormalFunction> {
    if f.chart() != g.chart() {
        return Err(Error::ChartMismatch("bracket of functions on different charts".into()));
    }
    let chart = f.chart();
    Ok(match chart.flavor() {
        Flavor::Real => bracket_real(f, g, chart),
        Flavor::Complex => bracket_complex(f, g, chart),
    })
}

/// `{F,G} = ∂^j F ∂_j G − ∂^j G ∂_j F` with `∂^j = ∂/∂ξ_j`.
fn bracket_real(f: &FormalFunction, g: &FormalFunction, chart: Chart) -> FormalFunction {
    let mut out = FormalFunction::zero(chart);
    for c in 0..chart.copies {
        for j in 0..chart.dim() {
            let x = chart.base_index(c, j);
            let xi = chart.fiber_index(c, j);
            out = &out + &(&f.derivative(xi) * &g.derivative(x));
            out = &out - &(&g.derivative(xi) * &f.derivative(x));
        }
    }
    out
}

/// `{F,G} = ∂^k F ∂_k G − ∂^k G ∂_k F + ∂̄^l F ∂̄_l G − ∂̄^l G ∂̄_l F`.
fn bracket_complex(f: &FormalFunction, g: &FormalFunction, chart: Chart) -> FormalFunction {
    let d = chart.dim();
    let mut out = FormalFunction::zero(chart);
    for c in 0..chart.copies {
        for k in 0..d {
            let z = chart.base_index(c, k);
            let zeta = chart.fiber_index(c, k);
            out = &out + &(&f.derivative(zeta) * &g.derivative(z));
            out = &out - &(&g.derivative(zeta) * &f.derivative(z));
        }
        for l in 0..d {
            let w = chart.base_index(c, d + l);
            let zetab = chart.fiber_index(c, d + l);
            out = &out + &(&f.derivative(zetab) * &g.derivative(w));
            out = &out - &(&g.derivative(zetab) * &f.derivative(w));
        }
    }
    out
}

/// A vector field `Σ a^i ∂_i` on the chart with formal-function coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Derivation {
    chart: Chart,
    coefficients: BTreeMap<usize, FormalFunction>,
}

impl Derivation {
    pub fn zero(chart: Chart) -> Self {
        Derivation {
            chart,
            coefficients: BTreeMap::new(),
        }
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// Add `coefficient · ∂_index`.
    pub fn with_term(mut self, index: usize, coefficient: FormalFunction) -> Self {
        assert_eq!(coefficient.chart(), self.chart);
        assert!(index < self.chart.nvars());
        let sum = match self.coefficients.remove(&index) {
            Some(old) => &old + &coefficient,
            None => coefficient,
        };
        if !sum.is_zero() {
            self.coefficients.insert(index, sum);
        }
        self
    }

    pub fn coefficient(&self, index: usize) -> FormalFunction {
        self.coefficients
            .get(&index)
            .cloned()
            .unwrap_or_else(|| FormalFunction::zero(self.chart))
    }

    pub fn coefficients(&self) -> impl Iterator<Item = (usize, &FormalFunction)> {
        self.coefficients.iter().map(|(i, f)| (*i, f))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut out = Derivation::zero(self.chart);
        for (i, f) in &self.coefficients {
            out = out.with_term(*i, f.scale(c));
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Rational::one())
    }

    pub fn add(&self, other: &Derivation) -> Self {
        let mut out = self.clone();
        for (i, f) in &other.coefficients {
            out = out.with_term(*i, f.clone());
        }
        out
    }

    pub fn apply(&self, f: &FormalFunction) -> FormalFunction {
        assert_eq!(f.chart(), self.chart);
        let mut out = FormalFunction::zero(self.chart);
        for (i, a) in &self.coefficients {
            let d = f.derivative(*i);
            if d.is_zero() && d.valid() == crate::algebra::Precision::Exact {
                continue;
            }
            out = &out + &(a * &d);
        }
        out
    }

    /// Apply to a base polynomial (single-copy charts, fiber-free coefficients expected).
    pub fn apply_poly(&self, p: &Polynomial) -> Result<Polynomial> {
        self.apply(&FormalFunction::from_poly(self.chart, p, 0))
            .to_polynomial()
    }

    /// The commutator `[self, other]` as a derivation.
    pub fn commutator(&self, other: &Derivation) -> Derivation {
        let mut out = Derivation::zero(self.chart);
        for i in 0..self.chart.nvars() {
            let xi = FormalFunction::var(self.chart, i);
            let c = &self.apply(&other.apply(&xi)) - &other.apply(&self.apply(&xi));
            if !c.is_zero() {
                out = out.with_term(i, c);
            }
        }
        out
    }
}

/// The Hamiltonian vector field `H_F = {F, ·}`.
pub fn hamiltonian(f: &FormalFunction) -> Derivation {
    let chart = f.chart();
    let mut h = Derivation::zero(chart);
    for c in 0..chart.copies {
        for i in 0..chart.block() {
            let base = chart.base_index(c, i);
            let fib = chart.fiber_index(c, i);
            h = h.with_term(base, f.derivative(fib));
            h = h.with_term(fib, -f.derivative(base));
        }
    }
    h
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Step {
    Exp(Derivation),
    Tau,
}

/// An algebra automorphism built from exponentials of derivations and the fiber flip `τ*`.
///
/// Steps are stored in application order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Automorphism {
    chart: Chart,
    steps: Vec<Step>,
}

impl Automorphism {
    pub fn identity(chart: Chart) -> Self {
        Automorphism {
            chart,
            steps: Vec::new(),
        }
    }

    pub fn tau(chart: Chart) -> Self {
        Automorphism {
            chart,
            steps: vec![Step::Tau],
        }
    }

    /// `self ∘ inner`: apply `inner` first.
    pub fn after(&self, inner: &Automorphism) -> Self {
        assert_eq!(self.chart, inner.chart);
        let mut steps = inner.steps.clone();
        steps.extend(self.steps.iter().cloned());
        Automorphism {
            chart: self.chart,
            steps,
        }
    }

    pub fn inverse(&self) -> Self {
        Automorphism {
            chart: self.chart,
            steps: self
                .steps
                .iter()
                .rev()
                .map(|s| match s {
                    Step::Exp(h) => Step::Exp(h.neg()),
                    Step::Tau => Step::Tau,
                })
                .collect(),
        }
    }

    pub fn apply(&self, f: &FormalFunction) -> Result<FormalFunction> {
        let mut cur = f.clone();
        for step in &self.steps {
            cur = match step {
                Step::Exp(h) => exp_apply(h, &cur)?,
                Step::Tau => cur.tau_star(),
            };
        }
        Ok(cur)
    }
}

/// `exp(H)` as an automorphism; termination is checked when it is applied.
pub fn exp_derivation(h: &Derivation) -> Automorphism {
    Automorphism {
        chart: h.chart(),
        steps: vec![Step::Exp(h.clone())],
    }
}

/// Sum `Σ H^k F / k!` until a term vanishes at the chart truncation.
pub fn exp_apply(h: &Derivation, f: &FormalFunction) -> Result<FormalFunction> {
    let chart = h.chart();
    let cap = (chart.fiber_truncation + chart.nu_truncation + 1) as usize;
    let mut sum = f.clone();
    let mut term = f.clone();
    for k in 1..=cap + 1 {
        term = h
            .apply(&term)
            .scale(&Rational::new(1.into(), (k as i64).into()));
        if term.is_zero() {
            return Ok(&sum + &term);
        }
        if k > cap {
            break;
        }
        sum = &sum + &term;
    }
    Err(Error::NonTerminating { iterations: cap })
}

/// True when `F` lies in the filtration ideal of order `n` (or is zero).
pub fn in_filtration(f: &FormalFunction, n: u32) -> bool {
    f.filtration_degree().is_none_or(|d| d >= n)
}

/// The first index triple `(i, j, k)` at which the cyclic sum
/// `η^{il}∂_lη^{jk} + η^{jl}∂_lη^{ki} + η^{kl}∂_lη^{ij}` is nonzero, with that sum.
pub fn jacobi_violation(eta: &PoissonTensor) -> Option<([usize; 3], Polynomial)> {
    let m = eta.full_matrix();
    let space = eta.space();
    let n = space.nvars();
    let term = |a: usize, b: usize, c: usize| {
        (0..n).fold(Polynomial::zero(space), |acc, l| &acc + &(&m[a][l] * &m[b][c].derivative(l)))
    };
    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                let r = &(&term(i, j, k) + &term(j, k, i)) + &term(k, i, j);
                if !r.is_zero() {
                    return Some(([i, j, k], r));
                }
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{parse_formal, parse_poly};

    fn flat(d: usize) -> PoissonTensor {
        PoissonTensor::complex_identity(d)
    }

    #[test]
    fn base_bracket_examples() {
        let s = BaseSpace::complex(1);
        let g = parse_poly("1 + z1*w1", s).unwrap();
        let t = PoissonTensor::complex(vec![vec![g.clone()]]).unwrap();
        let z = parse_poly("z1", s).unwrap();
        let w = parse_poly("w1", s).unwrap();
        assert!(bracket_m(&z, &z, &t).is_zero());
        assert_eq!(bracket_m(&w, &z, &t), g);
    }

    #[test]
    fn real_jacobi() {
        let s = BaseSpace::real(2);
        let one = Polynomial::one(s);
        let zero = Polynomial::zero(s);
        let eta = PoissonTensor::real(vec![vec![zero.clone(), one.clone()], vec![-&one, zero]]).unwrap();
        let x = parse_poly("x1", s).unwrap();
        let y = parse_poly("x2", s).unwrap();
        let h = parse_poly("x1^2 + x2^2", s).unwrap();
        let b = |a: &Polynomial, c: &Polynomial| bracket_m(a, c, &eta);
        let j = &(&b(&x, &b(&y, &h)) + &b(&y, &b(&h, &x))) + &b(&h, &b(&x, &y));
        assert!(j.is_zero());
    }

    #[test]
    fn jacobi_tensor_check() {
        let s = BaseSpace::real(3);
        let v = |t: &str| parse_poly(t, s).unwrap();
        let matrix = |a: &str, b: &str, c: &str| {
            let z = Polynomial::zero(s);
            vec![
                vec![z.clone(), v(a), v(b)],
                vec![-&v(a), z.clone(), v(c)],
                vec![-&v(b), -&v(c), z],
            ]
        };
        let so3 = PoissonTensor::real(matrix("x3", "-1*x2", "x1")).unwrap();
        assert!(jacobi_violation(&so3).is_none());
        let bad = PoissonTensor::real(matrix("x3", "x1", "0")).unwrap();
        assert_eq!(jacobi_violation(&bad), Some(([0, 1, 2], v("x3"))));
        assert!(jacobi_violation(&flat(2)).is_none());
        let curved = PoissonTensor::complex(vec![vec![parse_poly("1 + z1*w1", BaseSpace::complex(1)).unwrap()]]).unwrap();
        assert!(jacobi_violation(&curved).is_none());
    }

    #[test]
    fn canonical_pair() {
        let c = Chart::complex(1, 3, 0);
        let zeta = parse_formal("zeta1", c).unwrap();
        let z = parse_formal("z1", c).unwrap();
        assert_eq!(bracket_tm(&zeta, &z).unwrap(), FormalFunction::one(c));
        let w = parse_formal("w1", c).unwrap();
        assert!(bracket_tm(&z, &w).unwrap().is_zero());
        let a = parse_formal("z1*w1 + z1*zeta1", c).unwrap();
        let b = parse_formal("z1*w1 + w1*zetab1", c).unwrap();
        assert!(bracket_tm(&a, &b).unwrap().is_zero_mod_valid());
    }

    #[test]
    fn hamiltonian_of_quadratic() {
        let c = Chart::complex(1, 3, 0);
        let f = parse_formal("zeta1*zetab1", c).unwrap();
        let h = hamiltonian(&f);
        assert_eq!(h.coefficient(c.base_index(0, 0)), parse_formal("zetab1", c).unwrap());
        assert_eq!(h.coefficient(c.base_index(0, 1)), parse_formal("zeta1", c).unwrap());
        assert!(h.coefficient(c.fiber_index(0, 0)).is_zero());
        assert!(hamiltonian(&FormalFunction::zero(c)).is_zero());
        let _ = flat(1);
    }

    #[test]
    fn exp_two_terms() {
        let c = Chart::complex(1, 3, 0);
        let h = Derivation::zero(c).with_term(c.base_index(0, 1), parse_formal("zeta1", c).unwrap());
        let r = exp_derivation(&h).apply(&parse_formal("z1*w1", c).unwrap()).unwrap();
        assert_eq!(r, parse_formal("z1*w1 + z1*zeta1", c).unwrap());
    }

    #[test]
    fn non_terminating_is_reported() {
        let c = Chart::complex(1, 2, 1);
        let h = Derivation::zero(c).with_term(c.base_index(0, 0), parse_formal("z1", c).unwrap());
        let r = exp_derivation(&h).apply(&parse_formal("z1", c).unwrap());
        assert!(matches!(r, Err(Error::NonTerminating { .. })));
    }
}
