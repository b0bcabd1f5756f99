//! The formal symplectic groupoid with separation of variables on a Kähler-Poisson chart.
//!
//! Source and target maps are `Sφ = e^{ζ_k D^k}φ`, `Tψ = e^{ζ̄_l D̄^l}ψ` with
//! `D^k = g^{l̄k}∂̄_l` and `D̄^l = g^{l̄k}∂_k`; the duals are `S̃φ = e^{−ζ̄_l D̄^l}φ`,
//! `T̃ψ = e^{−ζ_k D^k}ψ`. The automorphism `Q = exp H_F` with `S = Q S̃` is generated by a
//! Hamiltonian `F = F_2 + F_4 + …` solved degree by degree, and the inverse map is
//! `I = Q ∘ τ*`.

mod solve;
mod verify;

pub use solve::{solve_f, solve_f_permuted};
pub use verify::{first_jet_matrix, hamiltonian_checks, verify_groupoid, verify_star, VerifyOptions, STAR_CHECKS};

use crate::algebra::{BaseSpace, Chart, Flavor, FormalFunction, Polynomial};
use crate::error::{Error, Result};
use crate::multiindex;
use crate::poisson::{exp_apply, exp_derivation, hamiltonian, Automorphism, Derivation, PoissonTensor};

/// A complex tensor `g^{l̄k}` known to satisfy the Kähler-Poisson conditions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KahlerPoissonTensor {
    tensor: PoissonTensor,
}

impl KahlerPoissonTensor {
    pub fn tensor(&self) -> &PoissonTensor {
        &self.tensor
    }

    pub fn dim(&self) -> usize {
        self.tensor.dim()
    }

    pub fn space(&self) -> BaseSpace {
        self.tensor.space()
    }

    /// `g^{l̄k}` with 0-based indices.
    pub fn g(&self, l: usize, k: usize) -> &Polynomial {
        &self.tensor.entries()[l][k]
    }

    pub fn is_constant(&self) -> bool {
        self.tensor.is_constant()
    }

    /// The same tensor in coordinates `z'_i = z_{perm[i]}`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let d = self.dim();
        let inv = invert(perm);
        let vars: Vec<usize> = (0..2 * d)
            .map(|j| if j < d { inv[j] } else { d + inv[j - d] })
            .collect();
        let entries = (0..d)
            .map(|l| {
                (0..d)
                    .map(|k| self.g(perm[l], perm[k]).permute(&vars))
                    .collect()
            })
            .collect();
        KahlerPoissonTensor {
            tensor: PoissonTensor::Complex(entries),
        }
    }
}

fn invert(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (i, &p) in perm.iter().enumerate() {
        inv[p] = i;
    }
    inv
}

/// Validate `g^{l̄k} ∂_k g^{n̄m} = g^{n̄k} ∂_k g^{l̄m}` and
/// `g^{l̄k} ∂̄_l g^{n̄m} = g^{l̄m} ∂̄_l g^{n̄k}`, reporting the first violation as the
/// residual right side minus left side.
pub fn kp_check(entries: Vec<Vec<Polynomial>>) -> Result<KahlerPoissonTensor> {
    let tensor = PoissonTensor::complex(entries)?;
    let space = tensor.space();
    let d = space.dim;
    let g = tensor.entries();
    for l in 0..d {
        for n in 0..d {
            for m in 0..d {
                let mut lhs = Polynomial::zero(space);
                let mut rhs = Polynomial::zero(space);
                for k in 0..d {
                    lhs = &lhs + &(&g[l][k] * &g[n][m].derivative(space.z(k)));
                    rhs = &rhs + &(&g[n][k] * &g[l][m].derivative(space.z(k)));
                }
                let r = &rhs - &lhs;
                if !r.is_zero() {
                    return Err(Error::KahlerPoisson {
                        condition: 1,
                        indices: format!("l={}, n={}, m={}", l + 1, n + 1, m + 1),
                        residual: r.to_string(),
                    });
                }
            }
        }
    }
    for k in 0..d {
        for n in 0..d {
            for m in 0..d {
                let mut lhs = Polynomial::zero(space);
                let mut rhs = Polynomial::zero(space);
                for l in 0..d {
                    lhs = &lhs + &(&g[l][k] * &g[n][m].derivative(space.w(l)));
                    rhs = &rhs + &(&g[l][m] * &g[n][k].derivative(space.w(l)));
                }
                let r = &rhs - &lhs;
                if !r.is_zero() {
                    return Err(Error::KahlerPoisson {
                        condition: 2,
                        indices: format!("k={}, n={}, m={}", k + 1, n + 1, m + 1),
                        residual: r.to_string(),
                    });
                }
            }
        }
    }
    Ok(KahlerPoissonTensor { tensor })
}

/// `D^k = Σ_l g^{l̄k} ∂̄_l` and `D̄^l = Σ_k g^{l̄k} ∂_k` as derivations on `chart`.
pub fn d_operators(g: &KahlerPoissonTensor, chart: Chart) -> (Vec<Derivation>, Vec<Derivation>) {
    let d = g.dim();
    let lift = |p: &Polynomial| FormalFunction::from_poly(chart, p, 0);
    let dk = (0..d)
        .map(|k| {
            (0..d).fold(Derivation::zero(chart), |acc, l| {
                acc.with_term(chart.base_index(0, d + l), lift(g.g(l, k)))
            })
        })
        .collect();
    let dl = (0..d)
        .map(|l| {
            (0..d).fold(Derivation::zero(chart), |acc, k| {
                acc.with_term(chart.base_index(0, k), lift(g.g(l, k)))
            })
        })
        .collect();
    (dk, dl)
}

/// Check that the `D^k` commute pairwise, and the `D̄^l` too, on every monomial of degree
/// `<= degree`.
pub fn check_d_operators(g: &KahlerPoissonTensor, chart: Chart, degree: u32) -> Result<()> {
    let (dk, dl) = d_operators(g, chart);
    let basis = multiindex::up_to_degree(chart.block(), degree);
    for (which, ops) in [("D", &dk), ("Dbar", &dl)] {
        for i in 0..ops.len() {
            for j in (i + 1)..ops.len() {
                for e in &basis {
                    let p = Polynomial::monomial(chart.base, e.clone(), crate::Rational::from_integer(1.into()));
                    let f = FormalFunction::from_poly(chart, &p, 0);
                    let r = &ops[i].apply(&ops[j].apply(&f)) - &ops[j].apply(&ops[i].apply(&f));
                    if !r.is_zero() {
                        return Err(Error::DOperatorCommutator {
                            which,
                            i: i + 1,
                            j: j + 1,
                            residual: r.to_string(),
                        });
                    }
                }
            }
        }
    }
    Ok(())
}

/// `sign · ζ_k D^k`, the generator of `S` (sign +1) or `T̃` (sign −1).
fn holomorphic_fiber_field(g: &KahlerPoissonTensor, chart: Chart, sign: i64) -> Derivation {
    let d = g.dim();
    let mut field = Derivation::zero(chart);
    for l in 0..d {
        let mut coeff = FormalFunction::zero(chart);
        for k in 0..d {
            let gk = FormalFunction::from_poly(chart, g.g(l, k), 0);
            coeff = &coeff + &(&gk * &FormalFunction::fiber(chart, 0, k));
        }
        field = field.with_term(chart.base_index(0, d + l), coeff.scale(&crate::Rational::from_integer(sign.into())));
    }
    field
}

/// `sign · ζ̄_l D̄^l`, the generator of `T` (sign +1) or `S̃` (sign −1).
fn antiholomorphic_fiber_field(g: &KahlerPoissonTensor, chart: Chart, sign: i64) -> Derivation {
    let d = g.dim();
    let mut field = Derivation::zero(chart);
    for k in 0..d {
        let mut coeff = FormalFunction::zero(chart);
        for l in 0..d {
            let gk = FormalFunction::from_poly(chart, g.g(l, k), 0);
            coeff = &coeff + &(&gk * &FormalFunction::fiber(chart, 0, d + l));
        }
        field = field.with_term(chart.base_index(0, k), coeff.scale(&crate::Rational::from_integer(sign.into())));
    }
    field
}

fn check_chart(g: &KahlerPoissonTensor, chart: Chart) -> Result<()> {
    if chart.flavor() != Flavor::Complex || chart.base != g.space() || chart.copies != 1 {
        return Err(Error::ChartMismatch(
            "groupoid construction needs the single complex chart of the tensor".into(),
        ));
    }
    Ok(())
}

/// Everything assembled for one chart: tensor, source/target maps and their duals,
/// generating Hamiltonian `F`, `Q = exp H_F` and `I = Q ∘ τ*`.
#[derive(Clone, Debug)]
pub struct GroupoidData {
    chart: Chart,
    tensor: KahlerPoissonTensor,
    s_field: Derivation,
    t_field: Derivation,
    s_dual_field: Derivation,
    t_dual_field: Derivation,
    hamiltonian: FormalFunction,
    q: Automorphism,
    inverse: Automorphism,
}

impl GroupoidData {
    /// Solve for `F` and assemble the structure.
    pub fn assemble(tensor: KahlerPoissonTensor, chart: Chart) -> Result<Self> {
        let f = solve_f(&tensor, chart)?;
        Self::with_hamiltonian(tensor, chart, f)
    }

    /// Assemble around a given Hamiltonian (used to probe the checks with perturbed `F`).
    pub fn with_hamiltonian(tensor: KahlerPoissonTensor, chart: Chart, f: FormalFunction) -> Result<Self> {
        check_chart(&tensor, chart)?;
        if f.chart() != chart {
            return Err(Error::ChartMismatch("Hamiltonian lives on another chart".into()));
        }
        let q = build_q(&f)?;
        let inverse = q.after(&Automorphism::tau(chart));
        Ok(GroupoidData {
            chart,
            s_field: holomorphic_fiber_field(&tensor, chart, 1),
            t_field: antiholomorphic_fiber_field(&tensor, chart, 1),
            s_dual_field: antiholomorphic_fiber_field(&tensor, chart, -1),
            t_dual_field: holomorphic_fiber_field(&tensor, chart, -1),
            tensor,
            hamiltonian: f,
            q,
            inverse,
        })
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn tensor(&self) -> &KahlerPoissonTensor {
        &self.tensor
    }

    pub fn poisson(&self) -> &PoissonTensor {
        self.tensor.tensor()
    }

    pub fn hamiltonian(&self) -> &FormalFunction {
        &self.hamiltonian
    }

    pub fn q(&self) -> &Automorphism {
        &self.q
    }

    pub fn inverse(&self) -> &Automorphism {
        &self.inverse
    }

    fn exp_on(&self, field: &Derivation, p: &Polynomial) -> FormalFunction {
        exp_apply(field, &FormalFunction::from_poly(self.chart, p, 0))
            .expect("fiber-raising series terminates at the fiber truncation")
    }

    /// `Sφ = e^{ζ_k D^k} φ`.
    pub fn source(&self, phi: &Polynomial) -> FormalFunction {
        self.exp_on(&self.s_field, phi)
    }

    /// `Tψ = e^{ζ̄_l D̄^l} ψ`.
    pub fn target(&self, psi: &Polynomial) -> FormalFunction {
        self.exp_on(&self.t_field, psi)
    }

    /// `S̃φ = e^{−ζ̄_l D̄^l} φ`.
    pub fn dual_source(&self, phi: &Polynomial) -> FormalFunction {
        self.exp_on(&self.s_dual_field, phi)
    }

    /// `T̃ψ = e^{−ζ_k D^k} ψ`.
    pub fn dual_target(&self, psi: &Polynomial) -> FormalFunction {
        self.exp_on(&self.t_dual_field, psi)
    }

    pub fn apply_q(&self, f: &FormalFunction) -> Result<FormalFunction> {
        self.q.apply(f)
    }

    /// `I = Q ∘ τ*`.
    pub fn inverse_map(&self, f: &FormalFunction) -> Result<FormalFunction> {
        self.inverse.apply(f)
    }
}

/// `Q = exp H_F`, defined for `F` of filtration degree at least two.
pub fn build_q(f: &FormalFunction) -> Result<Automorphism> {
    if let Some(deg) = f.filtration_degree() {
        if deg < 2 {
            return Err(Error::FiltrationTooLow(deg.to_string()));
        }
    }
    Ok(exp_derivation(&hamiltonian(f)))
}

/// The bidegree `(p, q)` part of `F` in `(ζ, ζ̄)` on a single complex chart.
pub fn bidegree_component(f: &FormalFunction, p: u32, q: u32) -> FormalFunction {
    let chart = f.chart();
    let d = chart.dim();
    FormalFunction::from_terms(
        chart,
        f.terms()
            .filter(|(e, _)| {
                let hp: u32 = (0..d).map(|k| e[chart.fiber_index(0, k)]).sum();
                let hq: u32 = (0..d).map(|l| e[chart.fiber_index(0, d + l)]).sum();
                hp == p && hq == q
            })
            .map(|(e, c)| (e.to_vec(), c.clone())),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{parse_formal, parse_poly};

    fn tensor(entries: &[&[&str]], d: usize) -> Result<KahlerPoissonTensor> {
        let s = BaseSpace::complex(d);
        kp_check(
            entries
                .iter()
                .map(|r| r.iter().map(|e| parse_poly(e, s).unwrap()).collect())
                .collect(),
        )
    }

    #[test]
    fn kp_examples() {
        assert!(tensor(&[&["1 + z1*w1"]], 1).is_ok());
        assert!(tensor(&[&["2", "1"], &["1", "3"]], 2).is_ok());
        let err = tensor(&[&["z2", "0"], &["0", "1"]], 2).unwrap_err();
        assert_eq!(
            err,
            Error::KahlerPoisson {
                condition: 1,
                indices: "l=1, n=2, m=1".into(),
                residual: "1".into()
            }
        );
    }

    #[test]
    fn d_operator_examples() {
        let c = Chart::complex(1, 2, 0);
        let g = tensor(&[&["1 + z1*w1"]], 1).unwrap();
        let (dk, _) = d_operators(&g, c);
        let w = parse_poly("w1", c.base).unwrap();
        assert_eq!(dk[0].apply_poly(&w).unwrap().to_string(), "1 + z1*w1");
        let c2 = Chart::complex(2, 2, 0);
        let id = tensor(&[&["1", "0"], &["0", "1"]], 2).unwrap();
        check_d_operators(&id, c2, 3).unwrap();
    }

    #[test]
    fn source_examples() {
        let c = Chart::complex(1, 2, 0);
        let flat = GroupoidData::assemble(tensor(&[&["1"]], 1).unwrap(), c).unwrap();
        let zw = parse_poly("z1*w1", c.base).unwrap();
        assert_eq!(flat.source(&zw), parse_formal("z1*w1 + z1*zeta1", c).unwrap());
        assert_eq!(flat.dual_source(&zw), parse_formal("z1*w1 - w1*zetab1", c).unwrap());
        let g = GroupoidData::assemble(tensor(&[&["1 + z1*w1"]], 1).unwrap(), c).unwrap();
        let w = parse_poly("w1", c.base).unwrap();
        assert_eq!(
            g.source(&w),
            parse_formal("w1 + (1 + z1*w1)*zeta1 + 1/2*(z1 + z1^2*w1)*zeta1^2", c).unwrap()
        );
        let z3 = parse_poly("z1^3", c.base).unwrap();
        assert_eq!(g.source(&z3), FormalFunction::from_poly(c, &z3, 0));
    }
}
