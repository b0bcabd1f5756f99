//! Coherent families of polydifferential operators and their one-step extension.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{parse_poly, BaseSpace, Polynomial};
use crate::error::{Error, Result};
use crate::multiindex;
use crate::poisson::{bracket_m, PoissonTensor};
use crate::report::{Check, CheckRecord};
use crate::sampling;
use crate::Rational;

/// `Σ c(x) ∂^{α₁}f₁ ⋯ ∂^{αₙ}fₙ`, keyed by the per-argument multi-indices.
#[derive(Clone, PartialEq, Eq)]
pub struct PolyDiffOp {
    space: BaseSpace,
    arity: usize,
    terms: BTreeMap<Vec<Vec<u32>>, Polynomial>,
}

fn one() -> Rational {
    Rational::from_integer(1.into())
}

fn x_var(space: BaseSpace, i: usize) -> Polynomial {
    Polynomial::var(space, i)
}

impl PolyDiffOp {
    pub fn zero(space: BaseSpace, arity: usize) -> Self {
        PolyDiffOp {
            space,
            arity,
            terms: BTreeMap::new(),
        }
    }

    /// A zero-argument operator, i.e. a function.
    pub fn function(p: Polynomial) -> Self {
        let mut op = Self::zero(p.space(), 0);
        op.add_term(Vec::new(), p);
        op
    }

    pub fn from_terms(space: BaseSpace, arity: usize, terms: impl IntoIterator<Item = (Vec<Vec<u32>>, Polynomial)>) -> Result<Self> {
        let mut op = Self::zero(space, arity);
        for (key, c) in terms {
            if key.len() != arity || key.iter().any(|a| a.len() != space.nvars()) {
                return Err(Error::Config(format!(
                    "operator of arity {arity} needs {arity} multi-indices of length {}",
                    space.nvars()
                )));
            }
            if c.space() != space {
                return Err(Error::ChartMismatch("coefficient on a different chart".into()));
            }
            op.add_term(key, c);
        }
        Ok(op)
    }

    fn add_term(&mut self, key: Vec<Vec<u32>>, c: Polynomial) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(key).or_insert_with(|| Polynomial::zero(self.space));
        *slot = &*slot + &c;
        if slot.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn space(&self) -> BaseSpace {
        self.space
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<Vec<u32>>, &Polynomial)> {
        self.terms.iter()
    }

    pub fn eval(&self, args: &[Polynomial]) -> Polynomial {
        assert_eq!(args.len(), self.arity, "wrong number of arguments");
        let mut out = Polynomial::zero(self.space);
        for (key, c) in &self.terms {
            let mut t = c.clone();
            for (alpha, f) in key.iter().zip(args) {
                if t.is_zero() {
                    break;
                }
                t = &t * &f.derivative_multi(alpha);
            }
            out = &out + &t;
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.arity, other.arity);
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(k.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-one()))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        self.mul_poly(&Polynomial::constant(self.space, c.clone()))
    }

    pub fn mul_poly(&self, p: &Polynomial) -> Self {
        let mut out = Self::zero(self.space, self.arity);
        for (k, c) in &self.terms {
            out.add_term(k.clone(), c * p);
        }
        out
    }

    /// `R(f₀,…) = C(f_{perm[0]}, f_{perm[1]}, …)`.
    pub fn permute(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.arity);
        let mut out = Self::zero(self.space, self.arity);
        for (key, c) in &self.terms {
            let mut new = vec![Vec::new(); self.arity];
            for (s, alpha) in key.iter().enumerate() {
                new[perm[s]] = alpha.clone();
            }
            out.add_term(new, c.clone());
        }
        out
    }

    pub fn swap(&self, i: usize, j: usize) -> Self {
        let mut perm: Vec<usize> = (0..self.arity).collect();
        perm.swap(i, j);
        self.permute(&perm)
    }

    /// Substitute a fixed polynomial into argument `slot`.
    pub fn plug(&self, slot: usize, p: &Polynomial) -> Self {
        assert!(slot < self.arity);
        let mut out = Self::zero(self.space, self.arity - 1);
        for (key, c) in &self.terms {
            let d = p.derivative_multi(&key[slot]);
            if d.is_zero() {
                continue;
            }
            let mut k = key.clone();
            k.remove(slot);
            out.add_term(k, c * &d);
        }
        out
    }

    /// Replace argument `slot` by `{f_slot, f_{slot+1}}_M`; the result has one more argument.
    pub fn compose_bracket(&self, slot: usize, eta: &[Vec<Polynomial>]) -> Self {
        assert!(slot < self.arity);
        let n = self.space.nvars();
        let mut out = Self::zero(self.space, self.arity + 1);
        for (key, c) in &self.terms {
            let alpha = &key[slot];
            for (a, row) in eta.iter().enumerate() {
                for (b, e) in row.iter().enumerate() {
                    if e.is_zero() {
                        continue;
                    }
                    for gamma in multiindex::below(alpha) {
                        let de = e.derivative_multi(&gamma);
                        if de.is_zero() {
                            continue;
                        }
                        let rest = multiindex::sub(alpha, &gamma).expect("gamma below alpha");
                        for delta in multiindex::below(&rest) {
                            let eps = multiindex::sub(&rest, &delta).expect("delta below rest");
                            let mult = multiindex::binomial_multi(alpha, &gamma) * multiindex::binomial_multi(&rest, &delta);
                            let mut k = key.clone();
                            k[slot] = multiindex::add(&delta, &multiindex::unit(n, a));
                            k.insert(slot + 1, multiindex::add(&eps, &multiindex::unit(n, b)));
                            out.add_term(k, (c * &de).scale(&mult));
                        }
                    }
                }
            }
        }
        out
    }

    /// `∂_i f₀ · C(f₁,…)`.
    pub fn prepend_derivative(&self, i: usize) -> Self {
        let unit = multiindex::unit(self.space.nvars(), i);
        let mut out = Self::zero(self.space, self.arity + 1);
        for (key, c) in &self.terms {
            let mut k = Vec::with_capacity(key.len() + 1);
            k.push(unit.clone());
            k.extend(key.iter().cloned());
            out.add_term(k, c.clone());
        }
        out
    }

    /// `∂_b (C(f₁,…))` as an operator.
    pub fn derivative(&self, b: usize) -> Self {
        let unit = multiindex::unit(self.space.nvars(), b);
        let mut out = Self::zero(self.space, self.arity);
        for (key, c) in &self.terms {
            out.add_term(key.clone(), c.derivative(b));
            for s in 0..self.arity {
                let mut k = key.clone();
                k[s] = multiindex::add(&k[s], &unit);
                out.add_term(k, c.clone());
            }
        }
        out
    }

    /// Highest derivative order appearing in argument `slot`.
    pub fn order_in(&self, slot: usize) -> u32 {
        self.terms.keys().map(|k| multiindex::degree(&k[slot])).max().unwrap_or(0)
    }

    /// Every term is first order in every argument.
    pub fn is_multiderivation(&self) -> bool {
        self.terms.keys().all(|k| k.iter().all(|a| multiindex::degree(a) == 1))
    }

    /// The tensor `v^{i₁…iₙ}` of a multiderivation `v^K ∂_{i₁}f₁⋯∂_{iₙ}fₙ`.
    pub fn multiderivation_tensor(&self) -> Option<BTreeMap<Vec<usize>, Polynomial>> {
        let mut out = BTreeMap::new();
        for (key, c) in &self.terms {
            let mut idx = Vec::with_capacity(key.len());
            for a in key {
                if multiindex::degree(a) != 1 {
                    return None;
                }
                idx.push(a.iter().position(|&x| x == 1)?);
            }
            out.insert(idx, c.clone());
        }
        Some(out)
    }

    pub fn from_multiderivation(space: BaseSpace, arity: usize, tensor: &BTreeMap<Vec<usize>, Polynomial>) -> Self {
        let mut out = Self::zero(space, arity);
        for (idx, c) in tensor {
            let key = idx.iter().map(|&i| multiindex::unit(space.nvars(), i)).collect();
            out.add_term(key, c.clone());
        }
        out
    }

    /// Recover the coefficient table of a polydifferential operator from its values on
    /// monomials, given an upper bound on the order in each argument.
    pub fn from_probe(
        space: BaseSpace,
        orders: &[u32],
        eval: impl Fn(&[Polynomial]) -> Result<Polynomial>,
    ) -> Result<Self> {
        let arity = orders.len();
        let n = space.nvars();
        let mut tuples: Vec<Vec<Vec<u32>>> = vec![Vec::new()];
        for &o in orders {
            let choices = multiindex::up_to_degree(n, o);
            tuples = tuples
                .into_iter()
                .flat_map(|t| {
                    choices.iter().map(move |c| {
                        let mut t = t.clone();
                        t.push(c.clone());
                        t
                    })
                })
                .collect();
        }
        tuples.sort_by_key(|t| t.iter().map(|a| multiindex::degree(a)).sum::<u32>());
        let mut op = Self::zero(space, arity);
        for beta in tuples {
            let args: Vec<Polynomial> = beta.iter().map(|b| Polynomial::monomial(space, b.clone(), one())).collect();
            let residual = &eval(&args)? - &op.eval(&args);
            if residual.is_zero() {
                continue;
            }
            let norm: Rational = beta.iter().map(|b| multiindex::factorial_multi(b)).product();
            op.add_term(beta, residual.scale(&(one() / norm)));
        }
        Ok(op)
    }

    /// Monomial arguments on which a nonzero operator is guaranteed to be nonzero.
    pub fn separating_arguments(&self) -> Option<Vec<Polynomial>> {
        let key = self
            .terms
            .keys()
            .min_by_key(|k| k.iter().map(|a| multiindex::degree(a)).sum::<u32>())?;
        Some(key.iter().map(|a| Polynomial::monomial(self.space, a.clone(), one())).collect())
    }
}

impl fmt::Display for PolyDiffOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (n, (key, c)) in self.terms.iter().enumerate() {
            if n > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({c})")?;
            for (s, alpha) in key.iter().enumerate() {
                let m = Polynomial::monomial(self.space, alpha.clone(), one());
                if multiindex::degree(alpha) == 0 {
                    write!(f, "*f{}", s + 1)?;
                } else {
                    write!(f, "*d[{m}]f{}", s + 1)?;
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for PolyDiffOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PolyDiffOp({self})")
    }
}

/// Operators `C₀, …, C_{n−1}`, where `C_k` takes `k` arguments.
#[derive(Clone, Debug, PartialEq)]
pub struct CoherentFamily {
    tensor: PoissonTensor,
    operators: Vec<PolyDiffOp>,
}

impl CoherentFamily {
    pub fn new(tensor: PoissonTensor, operators: Vec<PolyDiffOp>) -> Result<Self> {
        for (k, op) in operators.iter().enumerate() {
            if op.arity() != k {
                return Err(Error::Config(format!("operator C{k} must take {k} arguments, not {}", op.arity())));
            }
            if op.space() != tensor.space() {
                return Err(Error::ChartMismatch(format!("operator C{k} lives on a different chart")));
            }
        }
        Ok(CoherentFamily { tensor, operators })
    }

    pub fn zero(tensor: PoissonTensor, len: usize) -> Self {
        let space = tensor.space();
        CoherentFamily {
            operators: (0..len).map(|k| PolyDiffOp::zero(space, k)).collect(),
            tensor,
        }
    }

    pub fn tensor(&self) -> &PoissonTensor {
        &self.tensor
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    pub fn operators(&self) -> &[PolyDiffOp] {
        &self.operators
    }

    pub fn operator(&self, k: usize) -> &PolyDiffOp {
        &self.operators[k]
    }

    pub fn eval(&self, k: usize, args: &[Polynomial]) -> Polynomial {
        self.operators[k].eval(args)
    }

    fn push(&mut self, op: PolyDiffOp) {
        assert_eq!(op.arity(), self.operators.len());
        self.operators.push(op);
    }
}

/// `C_k(f₁,…,f_k) = h(f₁)⋯h(f_k)H = {f₁,{f₂,…{f_k,H}}}` for `k < len`.
pub fn jacobi_family(tensor: PoissonTensor, h: &Polynomial, len: usize) -> CoherentFamily {
    let eta = tensor.full_matrix();
    let mut ops = Vec::with_capacity(len);
    let mut current = PolyDiffOp::function(h.clone());
    for _ in 0..len {
        let mut next = PolyDiffOp::zero(h.space(), current.arity() + 1);
        for (a, row) in eta.iter().enumerate() {
            for (b, e) in row.iter().enumerate() {
                if !e.is_zero() {
                    next = next.add(&current.derivative(b).mul_poly(e).prepend_derivative(a));
                }
            }
        }
        ops.push(std::mem::replace(&mut current, next));
    }
    CoherentFamily::new(tensor, ops).expect("arities match by construction")
}

fn property_b_residual(fam: &CoherentFamily, k: usize, j: usize) -> PolyDiffOp {
    let eta = fam.tensor.full_matrix();
    let c = fam.operator(k);
    c.sub(&c.swap(j, j + 1)).sub(&fam.operator(k - 1).compose_bracket(j, &eta))
}

fn list(args: &[Polynomial]) -> String {
    let parts: Vec<String> = args.iter().map(|a| a.to_string()).collect();
    format!("({})", parts.join(", "))
}

/// A failure of Property A or B located by [`find_violation`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    /// `'A'` or `'B'`.
    pub property: char,
    pub operator: usize,
    /// For Property B, the first of the two swapped argument positions (0-based).
    pub position: usize,
    pub arguments: Vec<Polynomial>,
    /// For Property A the offending coefficient, for Property B the residual at the arguments.
    pub residual: Polynomial,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = self.operator;
        if self.property == 'A' {
            write!(f, "C{k} is not a derivation in its first argument; witness {}", list(&self.arguments))
        } else {
            write!(
                f,
                "Property B fails for C{k} at arguments {} and {}; witness {} gives residual {}",
                self.position + 1,
                self.position + 2,
                list(&self.arguments),
                self.residual
            )
        }
    }
}

/// Exact search for a Property A or B failure on the coefficient tables.
pub fn find_violation(fam: &CoherentFamily) -> Option<Violation> {
    for (k, op) in fam.operators.iter().enumerate().skip(1) {
        for (key, c) in &op.terms {
            if multiindex::degree(&key[0]) != 1 {
                return Some(Violation {
                    property: 'A',
                    operator: k,
                    position: 0,
                    arguments: key.iter().map(|a| Polynomial::monomial(op.space, a.clone(), one())).collect(),
                    residual: c.clone(),
                });
            }
        }
    }
    for k in 2..fam.len() {
        for j in 0..k - 1 {
            let r = property_b_residual(fam, k, j);
            if let Some(args) = r.separating_arguments() {
                let residual = r.eval(&args);
                return Some(Violation {
                    property: 'B',
                    operator: k,
                    position: j,
                    arguments: args,
                    residual,
                });
            }
        }
    }
    None
}

/// Exact check of Properties A and B on the coefficient tables.
pub fn check_family(fam: &CoherentFamily) -> Result<()> {
    match find_violation(fam) {
        Some(v) => Err(Error::Incoherent(v.to_string())),
        None => Ok(()),
    }
}

/// Tie-break used by the tensor lemma.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Normalization {
    /// `u^K = 0` whenever `i₁ ≤ … ≤ iₙ`.
    #[default]
    Ascending,
    /// `u^K = 0` whenever `i₁ ≥ … ≥ iₙ`.
    Descending,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ExtendOptions {
    pub normalization: Normalization,
}

fn all_indices(d: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|k: Vec<usize>| {
                (0..d).map(move |i| {
                    let mut k = k.clone();
                    k.push(i);
                    k
                })
            })
            .collect();
    }
    out
}

/// Given `v^K` skew in the first two indices, symmetric in the rest and with zero cyclic sum
/// over the first three, the tensor `u^K` symmetric in all but the first index with
/// `u^K − u^{K′} = v^K`, normalized to vanish on monotone multi-indices.
pub fn tensor_lemma(
    v: &BTreeMap<Vec<usize>, Polynomial>,
    space: BaseSpace,
    n: usize,
    normalization: Normalization,
) -> BTreeMap<Vec<usize>, Polynomial> {
    let d = space.nvars();
    let flip = |k: &[usize]| -> Vec<usize> {
        match normalization {
            Normalization::Ascending => k.to_vec(),
            Normalization::Descending => k.iter().map(|&i| d - 1 - i).collect(),
        }
    };
    let mut out = BTreeMap::new();
    if n < 2 {
        return out;
    }
    for k in all_indices(d, n) {
        let kk = flip(&k);
        let mut tilde = kk.clone();
        tilde[1..].sort_unstable();
        if tilde[0] > tilde[1] {
            if let Some(c) = v.get(&flip(&tilde)) {
                if !c.is_zero() {
                    out.insert(k, c.clone());
                }
            }
        }
    }
    out
}

fn check_auxiliary(v: &PolyDiffOp) -> Result<()> {
    let n = v.arity();
    if !v.is_multiderivation() {
        return Err(Error::AuxiliaryOperator(format!("not a multiderivation: {v}")));
    }
    let skew = v.add(&v.swap(0, 1));
    if !skew.is_zero() {
        return Err(Error::AuxiliaryOperator(format!("not skew in the first two arguments: {skew}")));
    }
    for j in 2..n.saturating_sub(1) {
        let r = v.sub(&v.swap(j, j + 1));
        if !r.is_zero() {
            return Err(Error::AuxiliaryOperator(format!("not symmetric in arguments {} and {}: {r}", j + 1, j + 2)));
        }
    }
    if n >= 3 {
        let mut p1: Vec<usize> = (0..n).collect();
        let mut p2 = p1.clone();
        p1[..3].copy_from_slice(&[1, 2, 0]);
        p2[..3].copy_from_slice(&[2, 0, 1]);
        let cyc = v.add(&v.permute(&p1)).add(&v.permute(&p2));
        if !cyc.is_zero() {
            return Err(Error::AuxiliaryOperator(format!("nonzero cyclic sum: {cyc}")));
        }
    }
    Ok(())
}

fn extend_unchecked(fam: &CoherentFamily, opts: &ExtendOptions) -> Result<PolyDiffOp> {
    let space = fam.tensor.space();
    let n = fam.len();
    if n == 0 {
        return Ok(PolyDiffOp::zero(space, 0));
    }
    let eta = fam.tensor.full_matrix();
    let last = fam.operator(n - 1);
    let mut d_n = PolyDiffOp::zero(space, n);
    for i in 0..space.nvars() {
        let xi = x_var(space, i);
        let slice = CoherentFamily {
            tensor: fam.tensor.clone(),
            operators: (0..n - 1).map(|k| fam.operator(k + 1).plug(k, &xi)).collect(),
        };
        let mut inner = extend_unchecked(&slice, opts)?;
        for j in 0..n - 1 {
            inner = inner.add(&last.compose_bracket(j, &eta).plug(j, &xi));
        }
        d_n = d_n.add(&inner.prepend_derivative(i));
    }
    if n < 2 {
        return Ok(d_n);
    }
    let v = d_n.sub(&d_n.swap(0, 1)).sub(&last.compose_bracket(0, &eta));
    check_auxiliary(&v)?;
    let vt = v.multiderivation_tensor().expect("checked multiderivation");
    let neg: BTreeMap<_, _> = vt.into_iter().map(|(k, c)| (k, -&c)).collect();
    let u = tensor_lemma(&neg, space, n, opts.normalization);
    Ok(d_n.add(&PolyDiffOp::from_multiderivation(space, n, &u)))
}

/// Extend a coherent family `C₀…C_{n−1}` by an operator `C_n`.
pub fn extend_family(fam: &CoherentFamily, opts: &ExtendOptions) -> Result<CoherentFamily> {
    check_family(fam)?;
    let c_n = extend_unchecked(fam, opts)?;
    let mut out = fam.clone();
    out.push(c_n);
    check_family(&out).map_err(|e| Error::AuxiliaryOperator(format!("extension is not coherent: {e}")))?;
    Ok(out)
}

/// Seeded evaluation checks of Properties A and B, constant annihilation and the
/// rotation formula `C_n(φ,f₂,…) = C_n(f₂,…,φ) + Σ C_{n−1}(f₂,…,{φ,f_i},…)`.
pub fn family_records(
    prefix: &str,
    len: usize,
    eval: &dyn Fn(usize, &[Polynomial]) -> Result<Polynomial>,
    eta: &PoissonTensor,
    trials: usize,
    degree: u32,
    seed: u64,
) -> Vec<CheckRecord> {
    let space = eta.space();
    let mut rng = sampling::rng(seed);
    let mut a = Check::new(format!("{prefix}.property_a"));
    let mut b = Check::new(format!("{prefix}.property_b"));
    let mut consts = Check::new(format!("{prefix}.annihilates_constants"));
    let mut rot = Check::new(format!("{prefix}.rotation_formula"));
    let record = |check: &mut Check, r: Result<Polynomial>, args: &[Polynomial]| match r {
        Ok(p) => check.value(p.is_zero(), || p.to_string(), || list(args)),
        Err(e) => check.error(e.to_string(), || list(args)),
    };
    for _ in 0..trials {
        for k in 1..len {
            let args: Vec<Polynomial> = (0..k).map(|_| sampling::random_poly(&mut rng, space, degree)).collect();
            let extra = sampling::random_poly(&mut rng, space, degree);
            let with_first = |f: Polynomial| {
                let mut v = args.clone();
                v[0] = f;
                v
            };
            let (f, g) = (args[0].clone(), extra.clone());
            let leibniz = (|| -> Result<Polynomial> {
                Ok(&(&eval(k, &with_first(&f * &g))? - &(&f * &eval(k, &with_first(g.clone()))?))
                    - &(&g * &eval(k, &args)?))
            })();
            let mut witness = args.clone();
            witness.push(extra.clone());
            record(&mut a, leibniz, &witness);

            let slot = rng.gen_range(0..k);
            let mut c_args = args.clone();
            c_args[slot] = Polynomial::from_int(space, rng.gen_range(1..=3));
            record(&mut consts, eval(k, &c_args), &c_args);

            for j in 0..k.saturating_sub(1) {
                let mut swapped = args.clone();
                swapped.swap(j, j + 1);
                let mut merged = args.clone();
                let br = bracket_m(&args[j], &args[j + 1], eta);
                merged.splice(j..j + 2, [br]);
                let r = (|| -> Result<Polynomial> { Ok(&(&eval(k, &args)? - &eval(k, &swapped)?) - &eval(k - 1, &merged)?) })();
                record(&mut b, r, &args);
            }

            let mut rotated = args[1..].to_vec();
            rotated.push(args[0].clone());
            let r = (|| -> Result<Polynomial> {
                let mut total = &eval(k, &args)? - &eval(k, &rotated)?;
                for i in 1..k {
                    let mut inner = args[1..].to_vec();
                    inner[i - 1] = bracket_m(&args[0], &args[i], eta);
                    total = &total - &eval(k - 1, &inner)?;
                }
                Ok(total)
            })();
            record(&mut rot, r, &args);
        }
    }
    vec![a.finish(), b.finish(), consts.finish(), rot.finish()]
}

/// One term of a family file: a coefficient and one multi-index per argument.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermSpec {
    pub coefficient: String,
    pub derivatives: Vec<Vec<u32>>,
}

/// JSON form of a family: operator `k` is a list of terms with `k` multi-indices each.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyFile {
    pub operators: Vec<Vec<TermSpec>>,
}

impl FamilyFile {
    pub fn to_family(&self, tensor: PoissonTensor) -> Result<CoherentFamily> {
        let space = tensor.space();
        let mut ops = Vec::with_capacity(self.operators.len());
        for (k, terms) in self.operators.iter().enumerate() {
            let parsed = terms
                .iter()
                .map(|t| Ok((t.derivatives.clone(), parse_poly(&t.coefficient, space)?)))
                .collect::<Result<Vec<_>>>()?;
            ops.push(
                PolyDiffOp::from_terms(space, k, parsed)
                    .map_err(|e| Error::Config(format!("operator C{k}: {e}")))?,
            );
        }
        CoherentFamily::new(tensor, ops)
    }

    pub fn from_family(fam: &CoherentFamily) -> Self {
        FamilyFile {
            operators: fam
                .operators
                .iter()
                .map(|op| {
                    op.terms
                        .iter()
                        .map(|(k, c)| TermSpec {
                            coefficient: c.to_string(),
                            derivatives: k.clone(),
                        })
                        .collect()
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn plane() -> PoissonTensor {
        let s = BaseSpace::real(2);
        PoissonTensor::real(vec![
            vec![Polynomial::zero(s), Polynomial::one(s)],
            vec![-Polynomial::one(s), Polynomial::zero(s)],
        ])
        .unwrap()
    }

    fn p(s: &str) -> Polynomial {
        parse_poly(s, BaseSpace::real(2)).unwrap()
    }

    #[test]
    fn jacobi_family_values() {
        let t = plane();
        let fam = jacobi_family(t.clone(), &p("x1^2 + x2^2"), 3);
        assert_eq!(fam.eval(1, &[p("x1")]), p("2*x2"));
        assert_eq!(fam.eval(2, &[p("x1"), p("x1")]), p("2"));
        check_family(&fam).unwrap();
    }

    #[test]
    fn compose_bracket_matches_evaluation() {
        let t = plane();
        let eta = t.full_matrix();
        let fam = jacobi_family(t.clone(), &p("x1^3*x2 + x2^2"), 3);
        let composed = fam.operator(2).compose_bracket(1, &eta);
        let (f, g, h) = (p("x1*x2 + x2^3"), p("x1^2"), p("x2 + x1^2*x2"));
        assert_eq!(
            composed.eval(&[f.clone(), g.clone(), h.clone()]),
            fam.eval(2, &[f, bracket_m(&g, &h, &t)])
        );
    }

    #[test]
    fn probe_recovers_table() {
        let t = plane();
        let fam = jacobi_family(t, &p("x1^2*x2 + x2^3"), 3);
        let op = fam.operator(2);
        let probed = PolyDiffOp::from_probe(BaseSpace::real(2), &[2, 2], |a| Ok(op.eval(a))).unwrap();
        assert_eq!(&probed, op);
    }

    #[test]
    fn tensor_lemma_exhaustive_d2_n3() {
        let space = BaseSpace::real(2);
        let idx = all_indices(2, 3);
        // u symmetric in the last two indices, with arbitrary distinct values.
        let u: BTreeMap<Vec<usize>, Polynomial> = idx
            .iter()
            .map(|k| {
                let (a, b) = (k[1].min(k[2]), k[1].max(k[2]));
                (k.clone(), Polynomial::from_int(space, (1 + k[0] * 7 + a * 3 + b * 11) as i64))
            })
            .collect();
        let prime = |k: &Vec<usize>| vec![k[1], k[0], k[2]];
        let v: BTreeMap<_, _> = idx.iter().map(|k| (k.clone(), &u[k] - &u[&prime(k)])).collect();
        let rec = tensor_lemma(&v, space, 3, Normalization::Ascending);
        let get = |k: &Vec<usize>| rec.get(k).cloned().unwrap_or_else(|| Polynomial::zero(space));
        for k in &idx {
            assert_eq!(&get(k) - &get(&prime(k)), v[k], "{k:?}");
            let mut sorted = k.clone();
            sorted.sort_unstable();
            // The reconstruction differs from u by the fully symmetric tensor u^{sort K}.
            assert_eq!(get(k), &u[k] - &u[&sorted], "{k:?}");
            if k.windows(2).all(|w| w[0] <= w[1]) {
                assert!(get(k).is_zero());
            }
            assert_eq!(get(k), get(&vec![k[0], k[2], k[1]]));
        }
    }

    #[test]
    fn extends_jacobi_family() {
        let t = plane();
        let h = p("x1^2 + x2^2");
        let reference = jacobi_family(t.clone(), &h, 3);
        let start = CoherentFamily::new(t.clone(), reference.operators()[..2].to_vec()).unwrap();
        let ext = extend_family(&start, &ExtendOptions::default()).unwrap();
        let dev = ext.operator(2).sub(reference.operator(2));
        assert!(dev.is_multiderivation());
        assert_eq!(dev, dev.swap(0, 1));
        let eval = |k: usize, a: &[Polynomial]| Ok(ext.eval(k, a));
        for r in family_records("ext", 3, &eval, &t, 10, 3, 1) {
            assert!(r.passed(), "{r:?}");
        }
    }

    #[test]
    fn normalizations_differ_by_symmetric_multiderivation() {
        let t = plane();
        let reference = jacobi_family(t.clone(), &p("x1^3 + x1*x2^2"), 4);
        let start = CoherentFamily::new(t, reference.operators()[..3].to_vec()).unwrap();
        let a = extend_family(&start, &ExtendOptions::default()).unwrap();
        let b = extend_family(&start, &ExtendOptions { normalization: Normalization::Descending }).unwrap();
        let dev = a.operator(3).sub(b.operator(3));
        assert!(dev.is_multiderivation());
        assert_eq!(dev, dev.swap(0, 1));
        assert_eq!(dev, dev.swap(1, 2));
        let dev_ref = a.operator(3).sub(reference.operator(3));
        assert!(dev_ref.is_multiderivation());
    }

    #[test]
    fn zero_family_extends_by_zero() {
        let fam = CoherentFamily::zero(plane(), 3);
        let ext = extend_family(&fam, &ExtendOptions::default()).unwrap();
        assert!(ext.operator(3).is_zero());
    }

    #[test]
    fn property_b_violation_is_reported() {
        let t = plane();
        let mut ops = jacobi_family(t.clone(), &p("x1^2 + x2^2"), 3).operators().to_vec();
        ops[2] = ops[2].add(&PolyDiffOp::from_terms(BaseSpace::real(2), 2, [(vec![vec![1, 0], vec![0, 1]], p("1"))]).unwrap());
        let fam = CoherentFamily::new(t, ops).unwrap();
        match extend_family(&fam, &ExtendOptions::default()) {
            Err(Error::Incoherent(msg)) => assert!(msg.contains("witness (x2, x1) gives residual -1"), "{msg}"),
            other => panic!("expected incoherent family, got {other:?}"),
        }
    }

    #[test]
    fn family_file_round_trip() {
        let fam = jacobi_family(plane(), &p("x1^2 + x2^2"), 3);
        let file = FamilyFile::from_family(&fam);
        let json = serde_json::to_string(&file).unwrap();
        let back: FamilyFile = serde_json::from_str(&json).unwrap();
        assert_eq!(back.to_family(plane()).unwrap(), fam);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn jacobi_extensions_are_coherent(c in -3i64..=3, d in -3i64..=3, e in 1i64..=3) {
            let t = plane();
            let h = &(&p("x1^2*x2").scale(&Rational::from_integer(c.into())) + &p("x2^3").scale(&Rational::from_integer(d.into()))) + &p("x1").scale(&Rational::from_integer(e.into()));
            let reference = jacobi_family(t.clone(), &h, 3);
            let start = CoherentFamily::new(t, reference.operators()[..2].to_vec()).unwrap();
            let ext = extend_family(&start, &ExtendOptions::default()).unwrap();
            let dev = ext.operator(2).sub(reference.operator(2));
            prop_assert!(dev.is_multiderivation());
            prop_assert_eq!(dev.clone(), dev.swap(0, 1));
        }
    }
}
