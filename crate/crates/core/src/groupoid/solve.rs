//! Degree-by-degree solution of the generating Hamiltonian.
//!
//! For `n >= 3` the degree-`n` component is pinned by its second fiber derivatives:
//! `∂^i ∂^k F_n = −∂^k [exp(H_{F_{<n}}) z^i]_{n−1}` and the conjugate equations in `ζ̄`,
//! which say that `{Q z^i, z^k}` and `{Q w^j, w^l}` vanish in degree `n − 2`. Each
//! bidegree `(p, q)` piece is then integrated by Euler's identity
//! `P = ζ_i ζ_k ∂^i ∂^k P / (p(p−1))` (or its `ζ̄` analogue when `p < 2`).

use super::{bidegree_component, KahlerPoissonTensor};
use crate::algebra::{Chart, FormalFunction, Precision};
use crate::error::{Error, Result};
use crate::poisson::{exp_apply, hamiltonian};
use crate::Rational;

/// `F_2 = g^{l̄k} ζ_k ζ̄_l`.
fn seed(g: &KahlerPoissonTensor, chart: Chart) -> FormalFunction {
    let d = g.dim();
    let mut f = FormalFunction::zero(chart);
    for l in 0..d {
        for k in 0..d {
            let gk = FormalFunction::from_poly(chart, g.g(l, k), 0);
            let mono = &FormalFunction::fiber(chart, 0, k) * &FormalFunction::fiber(chart, 0, d + l);
            f = &f + &(&gk * &mono);
        }
    }
    f
}

/// Solve for `F = F_2 + … + F_N` with `N` the chart's fiber truncation.
///
/// Odd components are computed like the others. The result is marked exact when the
/// tensor is constant (every right-hand side then vanishes identically), and valid
/// through degree `N` otherwise.
pub fn solve_f(g: &KahlerPoissonTensor, chart: Chart) -> Result<FormalFunction> {
    super::check_chart(g, chart)?;
    let top = chart.fiber_truncation;
    if top < 2 {
        return Err(Error::InsufficientOrder {
            needed: 2,
            available: top as i32,
        });
    }
    let d = g.dim();
    let mut f = seed(g, chart);
    for n in 3..=top {
        let work = Chart {
            fiber_truncation: n - 1,
            nu_truncation: 0,
            ..chart
        };
        let lower = f.relabel(work, Some).with_valid(Precision::Exact);
        let h = hamiltonian(&lower);
        let flow = |index: usize| -> Result<FormalFunction> {
            let x = FormalFunction::var(work, index);
            Ok(exp_apply(&h, &x)?.fiber_component(n - 1).relabel(chart, Some))
        };
        let mut holo = Vec::with_capacity(d);
        let mut anti = Vec::with_capacity(d);
        for i in 0..d {
            let qz = flow(work.base_index(0, i))?;
            holo.push(
                (0..d)
                    .map(|k| -qz.derivative(chart.fiber_index(0, k)))
                    .collect::<Vec<_>>(),
            );
            let qw = flow(work.base_index(0, d + i))?;
            anti.push(
                (0..d)
                    .map(|l| -qw.derivative(chart.fiber_index(0, d + l)))
                    .collect::<Vec<_>>(),
            );
        }
        let fn_ = reconstruct(chart, n, &holo, &anti)?;
        f = &f + &fn_;
    }
    let valid = if g.is_constant() {
        Precision::Exact
    } else {
        Precision::Through(top as i32)
    };
    Ok(f.with_valid(valid))
}

/// Integrate the second-derivative data `holo[i][k] = ∂^i∂^k F_n`, `anti[j][l] = ∂̄^j∂̄^l F_n`.
fn reconstruct(
    chart: Chart,
    n: u32,
    holo: &[Vec<FormalFunction>],
    anti: &[Vec<FormalFunction>],
) -> Result<FormalFunction> {
    let d = chart.dim();
    let euler = |data: &[Vec<FormalFunction>], offset: usize| {
        let mut acc = FormalFunction::zero(chart);
        for (i, row) in data.iter().enumerate() {
            for (k, v) in row.iter().enumerate() {
                let m = &FormalFunction::fiber(chart, 0, offset + i) * &FormalFunction::fiber(chart, 0, offset + k);
                acc = &acc + &(&m * v);
            }
        }
        acc
    };
    let from_holo = euler(holo, 0);
    let from_anti = euler(anti, d);
    let mut out = FormalFunction::zero(chart);
    for p in 0..=n {
        let q = n - p;
        let a = (p >= 2).then(|| {
            bidegree_component(&from_holo, p, q)
                .scale(&Rational::new(1.into(), ((p * (p - 1)) as i64).into()))
        });
        let b = (q >= 2).then(|| {
            bidegree_component(&from_anti, p, q)
                .scale(&Rational::new(1.into(), ((q * (q - 1)) as i64).into()))
        });
        let piece = match (a, b) {
            (Some(a), Some(b)) => {
                if a != b {
                    return Err(Error::Reconstruction {
                        degree: n,
                        detail: format!(
                            "bidegree ({p},{q}) differs between the zeta and zetab data: {}",
                            &a - &b
                        ),
                    });
                }
                a
            }
            (Some(a), None) => a,
            (None, Some(b)) => b,
            (None, None) => continue,
        };
        out = &out + &piece;
    }
    for i in 0..d {
        for k in 0..d {
            let got = out
                .derivative(chart.fiber_index(0, i))
                .derivative(chart.fiber_index(0, k));
            let r = &got - &holo[i][k];
            if !r.is_zero() {
                return Err(Error::Reconstruction {
                    degree: n,
                    detail: format!("second zeta derivative ({},{}) misses {}", i + 1, k + 1, r),
                });
            }
            let got = out
                .derivative(chart.fiber_index(0, d + i))
                .derivative(chart.fiber_index(0, d + k));
            let r = &got - &anti[i][k];
            if !r.is_zero() {
                return Err(Error::Reconstruction {
                    degree: n,
                    detail: format!("second zetab derivative ({},{}) misses {}", i + 1, k + 1, r),
                });
            }
        }
    }
    Ok(out)
}

/// Solve in permuted coordinates `z'_i = z_{perm[i]}` and map the result back.
pub fn solve_f_permuted(g: &KahlerPoissonTensor, chart: Chart, perm: &[usize]) -> Result<FormalFunction> {
    let d = g.dim();
    assert_eq!(perm.len(), d);
    let mut sorted = perm.to_vec();
    sorted.sort_unstable();
    if sorted != (0..d).collect::<Vec<_>>() {
        return Err(Error::Config("not a permutation".into()));
    }
    let gp = g.permuted(perm);
    let fp = solve_f(&gp, chart)?;
    let back = |i: usize| -> Option<usize> {
        let block = 2 * d;
        let (fiber, local) = if i >= block { (true, i - block) } else { (false, i) };
        let mapped = if local < d { perm[local] } else { d + perm[local - d] };
        Some(if fiber { block + mapped } else { mapped })
    };
    let valid = fp.valid();
    Ok(fp.relabel(chart, back).with_valid(valid))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{parse_formal, parse_poly, BaseSpace};
    use crate::groupoid::kp_check;

    fn g1(s: &str) -> KahlerPoissonTensor {
        kp_check(vec![vec![parse_poly(s, BaseSpace::complex(1)).unwrap()]]).unwrap()
    }

    #[test]
    fn flat_hamiltonian_is_quadratic() {
        let c = Chart::complex(1, 6, 0);
        let f = solve_f(&g1("3"), c).unwrap();
        assert_eq!(f, parse_formal("3*zeta1*zetab1", c).unwrap());
        assert_eq!(f.valid(), Precision::Exact);
    }

    #[test]
    fn odd_components_vanish() {
        let c = Chart::complex(1, 5, 0);
        let f = solve_f(&g1("1 + z1*w1"), c).unwrap();
        assert!(f.fiber_component(3).is_zero());
        assert!(f.fiber_component(5).is_zero());
        assert!(!f.fiber_component(4).is_zero());
        assert_eq!(f.fiber_component(2).to_string(), "(1 + z1*w1)*zeta1*zetab1");
    }
}
