//! Exact identity checks on an assembled groupoid.

use super::{check_d_operators, solve_f_permuted, GroupoidData};
use crate::algebra::{FormalFunction, Polynomial};
use crate::multiindex;
use crate::poisson::{bracket_m, bracket_tm};
use crate::report::{Check, CheckRecord};
use crate::sampling;
use crate::starprod::{berezin_transform, log_berezin, nu_power, sigma, StarProduct};
use crate::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VerifyOptions {
    /// Monomials of this total degree and below are used as structured inputs.
    pub basis_degree: u32,
    /// Number of random polynomial pairs per morphism identity.
    pub trials: usize,
    /// Degree bound of the random polynomials.
    pub random_degree: u32,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            basis_degree: 3,
            trials: 10,
            random_degree: 3,
            seed: 0,
        }
    }
}

fn monomials(g: &GroupoidData, degree: u32) -> Vec<Polynomial> {
    let space = g.chart().base;
    multiindex::up_to_degree(space.nvars(), degree)
        .into_iter()
        .map(|e| Polynomial::monomial(space, e, Rational::from_integer(1.into())))
        .collect()
}

fn lift(g: &GroupoidData, p: &Polynomial) -> FormalFunction {
    FormalFunction::from_poly(g.chart(), p, 0)
}

fn bracket(a: &FormalFunction, b: &FormalFunction) -> FormalFunction {
    bracket_tm(a, b).expect("same chart")
}

/// Formal inputs beyond source and target images: fiber coordinates and mixed monomials.
fn formal_samples(g: &GroupoidData) -> Vec<FormalFunction> {
    let chart = g.chart();
    let mut out = Vec::new();
    for i in 0..chart.block() {
        let fib = FormalFunction::fiber(chart, 0, i);
        out.push(fib.clone());
        for j in 0..chart.block() {
            out.push(&FormalFunction::base_var(chart, 0, j) * &fib);
        }
    }
    out
}

/// Run every groupoid identity; records are returned in a fixed order.
pub fn verify_groupoid(g: &GroupoidData, opts: &VerifyOptions) -> Vec<CheckRecord> {
    let chart = g.chart();
    let space = chart.base;
    let basis = monomials(g, opts.basis_degree);
    let mut rng = sampling::rng(opts.seed);
    let pairs: Vec<(Polynomial, Polynomial)> = (0..opts.trials)
        .map(|_| {
            (
                sampling::random_poly(&mut rng, space, opts.random_degree),
                sampling::random_poly(&mut rng, space, opts.random_degree),
            )
        })
        .collect();
    let eta = g.poisson();
    let mut records = Vec::new();

    let mut s_poisson = Check::new("groupoid.s_poisson_morphism");
    let mut t_anti = Check::new("groupoid.t_anti_poisson_morphism");
    let mut st = Check::new("groupoid.s_t_commute");
    for (phi, psi) in &pairs {
        let (sphi, spsi) = (g.source(phi), g.source(psi));
        let (tphi, tpsi) = (g.target(phi), g.target(psi));
        let b = bracket_m(phi, psi, eta);
        let w = || format!("phi={phi}; psi={psi}");
        s_poisson.formal(&(&g.source(&b) - &bracket(&sphi, &spsi)), w);
        t_anti.formal(&(&g.target(&b) + &bracket(&tphi, &tpsi)), w);
        st.formal(&bracket(&sphi, &tpsi), w);
    }
    records.extend([s_poisson.finish(), t_anti.finish(), st.finish()]);

    let mut es = Check::new("groupoid.es_identity");
    let mut et = Check::new("groupoid.et_identity");
    let mut is_t = Check::new("groupoid.i_s_equals_t");
    let mut it_s = Check::new("groupoid.i_t_equals_s");
    let mut jet = Check::new("groupoid.first_jet");
    let alpha = first_jet_matrix(g);
    let inputs: Vec<&Polynomial> = basis.iter().chain(pairs.iter().map(|p| &p.0)).collect();
    for f in &inputs {
        let w = || format!("f={f}");
        let (sf, tf) = (g.source(f), g.target(f));
        es.formal(&(&sf.zero_section_eval() - &lift(g, f)), w);
        et.formal(&(&tf.zero_section_eval() - &lift(g, f)), w);
        match (g.inverse_map(&sf), g.inverse_map(&tf)) {
            (Ok(isf), Ok(itf)) => {
                is_t.formal(&(&isf - &tf), w);
                it_s.formal(&(&itf - &sf), w);
            }
            (Err(e), _) | (_, Err(e)) => is_t.error(e.to_string(), w),
        }
        let mut predicted = FormalFunction::zero(chart);
        for (i, row) in alpha.iter().enumerate() {
            let di = lift(g, &f.derivative(i));
            for (j, a) in row.iter().enumerate() {
                predicted = &predicted + &(&(&lift(g, a) * &di) * &FormalFunction::fiber(chart, 0, j));
            }
        }
        jet.formal(&(&sf.fiber_component(1) - &predicted), w);
    }
    let full = eta.full_matrix();
    for (i, row) in full.iter().enumerate() {
        for (j, e) in row.iter().enumerate() {
            let r = &(&alpha[i][j] - &alpha[j][i]) - e;
            jet.value(r.is_zero(), || r.to_string(), || {
                format!("alpha antisymmetric part at ({}, {})", space.var_name(i), space.var_name(j))
            });
        }
    }
    records.extend([es.finish(), et.finish(), is_t.finish(), it_s.finish()]);

    let mut involutive = Check::new("groupoid.i_involutive");
    let mut anti = Check::new("groupoid.i_anti_poisson");
    let mut e_i = Check::new("groupoid.e_i_equals_e");
    let mut q_e = Check::new("groupoid.q_preserves_zero_section");
    let mut q_filt = Check::new("groupoid.q_raises_filtration");
    let mut q_poisson = Check::new("groupoid.q_poisson_automorphism");
    let mut samples = formal_samples(g);
    for (phi, psi) in pairs.iter().take(3) {
        samples.push(g.source(phi));
        samples.push(g.target(psi));
    }
    for (n, a) in samples.iter().enumerate() {
        let w = || format!("A={a}");
        let (ia, qa) = match (g.inverse_map(a), g.apply_q(a)) {
            (Ok(ia), Ok(qa)) => (ia, qa),
            (Err(e), _) | (_, Err(e)) => {
                involutive.error(e.to_string(), w);
                continue;
            }
        };
        match g.inverse_map(&ia) {
            Ok(iia) => involutive.formal(&(&iia - a), w),
            Err(e) => involutive.error(e.to_string(), w),
        }
        e_i.formal(&(&ia.zero_section_eval() - &a.zero_section_eval()), w);
        q_e.formal(&(&qa.zero_section_eval() - &a.zero_section_eval()), w);
        let diff = (&qa - a).reliable_part();
        let need = a.filtration_degree().map(|d| d + 1);
        let ok = match (diff.filtration_degree(), need) {
            (None, _) => true,
            (Some(got), Some(need)) => got >= need,
            (Some(_), None) => false,
        };
        q_filt.value(ok, || diff.to_string(), w);
        let b = &samples[(n + 1) % samples.len()];
        let pair = || format!("A={a}; B={b}");
        match (g.inverse_map(b), g.apply_q(b)) {
            (Ok(ib), Ok(qb)) => {
                let ab = bracket(a, b);
                match (g.inverse_map(&ab), g.apply_q(&ab)) {
                    (Ok(iab), Ok(qab)) => {
                        anti.formal(&(&iab + &bracket(&ia, &ib)), pair);
                        q_poisson.formal(&(&qab - &bracket(&qa, &qb)), pair);
                    }
                    (Err(e), _) | (_, Err(e)) => anti.error(e.to_string(), pair),
                }
            }
            (Err(e), _) | (_, Err(e)) => anti.error(e.to_string(), pair),
        }
    }
    records.extend([
        involutive.finish(),
        anti.finish(),
        e_i.finish(),
        jet.finish(),
        q_e.finish(),
        q_filt.finish(),
        q_poisson.finish(),
    ]);

    records.extend(hamiltonian_checks(g, opts));

    let mut double = Check::new("groupoid.double_commutation");
    let d = space.dim;
    let holo: Vec<Polynomial> = basis
        .iter()
        .filter(|p| p.depends_only_on(|i| i < d) && !p.is_constant())
        .cloned()
        .collect();
    let anti_holo: Vec<Polynomial> = basis
        .iter()
        .filter(|p| p.depends_only_on(|i| i >= d) && !p.is_constant())
        .cloned()
        .collect();
    for group in [&holo, &anti_holo] {
        for a in group.iter() {
            let qa = match g.apply_q(&lift(g, a)) {
                Ok(q) => q,
                Err(e) => {
                    double.error(e.to_string(), || format!("a={a}"));
                    continue;
                }
            };
            for b in group.iter() {
                double.formal(&bracket(&qa, &lift(g, b)), || format!("a={a}; b={b}"));
            }
        }
    }
    records.push(double.finish());

    let mut dops = Check::new("groupoid.d_operators_commute");
    if let Err(e) = check_d_operators(g.tensor(), chart, opts.basis_degree) {
        dops.error(e.to_string(), || "basis".into());
    } else {
        dops.value(true, String::new, String::new);
    }
    records.push(dops.finish());
    records
}

/// `α^{ij}`: the coefficient of the fiber variable `j` in the degree-one part of `S x^i`.
pub fn first_jet_matrix(g: &GroupoidData) -> Vec<Vec<Polynomial>> {
    let chart = g.chart();
    let space = chart.base;
    let n = space.nvars();
    (0..n)
        .map(|i| {
            let s = g.source(&Polynomial::var(space, i)).fiber_component(1);
            (0..n)
                .map(|j| {
                    s.derivative(chart.fiber_index(0, j))
                        .to_polynomial()
                        .expect("degree-one part differentiates to a base function")
                })
                .collect()
        })
        .collect()
}

/// Parity of `F`, agreement with a re-solve under reversed coordinate order, and the
/// conjugation identities `Q(S̃f) = Sf`, `Q(T̃f) = Tf`.
pub fn hamiltonian_checks(g: &GroupoidData, opts: &VerifyOptions) -> Vec<CheckRecord> {
    let chart = g.chart();
    let space = chart.base;
    let f = g.hamiltonian();
    let mut parity = Check::new("groupoid.hamiltonian_parity");
    parity.formal(&(&f.tau_star() - f), || "tau*F - F".into());
    for k in (1..=chart.fiber_truncation).filter(|k| k % 2 == 1) {
        parity.formal(&f.fiber_component(k), || format!("F_{k}"));
    }
    let mut permuted = Check::new("groupoid.permutation_invariance");
    let reversed: Vec<usize> = (0..space.dim).rev().collect();
    match solve_f_permuted(g.tensor(), chart, &reversed) {
        Ok(fp) => {
            let r = &fp - f;
            permuted.value(r.is_zero(), || r.to_string(), || format!("coordinate order {reversed:?}"));
        }
        Err(e) => permuted.error(e.to_string(), || format!("coordinate order {reversed:?}")),
    }
    let mut s_dual = Check::new("groupoid.q_conjugates_dual_source");
    let mut t_dual = Check::new("groupoid.q_conjugates_dual_target");
    let mut rng = sampling::rng(opts.seed);
    let mut inputs = monomials(g, opts.basis_degree);
    inputs.extend((0..opts.trials).map(|_| sampling::random_poly(&mut rng, space, opts.random_degree)));
    for p in &inputs {
        let w = || format!("f={p}");
        match (g.apply_q(&g.dual_source(p)), g.apply_q(&g.dual_target(p))) {
            (Ok(qs), Ok(qt)) => {
                s_dual.formal(&(&g.source(p) - &qs), w);
                t_dual.formal(&(&g.target(p) - &qt), w);
            }
            (Err(e), _) | (_, Err(e)) => s_dual.error(e.to_string(), w),
        }
    }
    vec![parity.finish(), permuted.finish(), s_dual.finish(), t_dual.finish()]
}

/// Names of the records produced by [`verify_star`], in order.
pub const STAR_CHECKS: [&str; 6] = [
    "star.three_way_source",
    "star.separation_of_variables",
    "star.associativity",
    "star.berezin_heat_kernel",
    "star.log_berezin_laplacian",
    "star.log_berezin_symbol",
];

/// Checks that need the Wick product: skipped when the chart carries no `nu` powers or the
/// tensor is not constant.
pub fn verify_star(g: &GroupoidData, opts: &VerifyOptions) -> Vec<CheckRecord> {
    let chart = g.chart();
    let reason = if chart.nu_truncation == 0 {
        Some("nu_truncation is 0")
    } else if !g.tensor().is_constant() {
        Some("tensor is not constant")
    } else {
        None
    };
    let star = match reason {
        None => StarProduct::new(chart, g.poisson().clone()),
        Some(r) => return STAR_CHECKS.iter().map(|n| CheckRecord::skipped(*n, r)).collect(),
    };
    let star = match star {
        Ok(s) => s,
        Err(e) => return STAR_CHECKS.iter().map(|n| CheckRecord::skipped(*n, e.to_string())).collect(),
    };
    let space = chart.base;
    let d = space.dim;
    let basis = monomials(g, opts.basis_degree);
    let mut records = Vec::new();

    let mut three = Check::new(STAR_CHECKS[0]);
    for f in &basis {
        let w = || format!("f={f}");
        let sf = g.source(f);
        match (sigma(&star.left_op(f)), g.apply_q(&g.dual_source(f))) {
            (Ok(sl), Ok(qs)) => {
                three.formal(&(&sl - &sf), w);
                three.formal(&(&qs - &sf), w);
            }
            (Err(e), _) | (_, Err(e)) => three.error(e.to_string(), w),
        }
    }
    records.push(three.finish());

    let mut sep = Check::new(STAR_CHECKS[1]);
    for f in &basis {
        let lifted = lift(g, f);
        for k in 0..d {
            let (z, w) = (Polynomial::var(space, space.z(k)), Polynomial::var(space, space.w(k)));
            let left = &star.star(&z, f) - &(&lift(g, &z) * &lifted);
            let right = &star.star(f, &w) - &(&lifted * &lift(g, &w));
            sep.formal(&left, || format!("{z} * f, f={f}"));
            sep.formal(&right, || format!("f * {w}, f={f}"));
        }
    }
    records.push(sep.finish());

    let mut assoc = Check::new(STAR_CHECKS[2]);
    let mut rng = sampling::rng(opts.seed);
    for _ in 0..opts.trials {
        let [a, b, c] = [(); 3].map(|_| sampling::random_poly(&mut rng, space, opts.random_degree.min(2)));
        let w = || format!("a={a}; b={b}; c={c}");
        let ab = star.star(&a, &b);
        let bc = star.star(&b, &c);
        match (star.star_series(&ab, &lift(g, &c)), star.star_series(&lift(g, &a), &bc)) {
            (Ok(l), Ok(r)) => assoc.formal(&(&l - &r), w),
            (Err(e), _) | (_, Err(e)) => assoc.error(e.to_string(), w),
        }
    }
    records.push(assoc.finish());

    let mut heat = Check::new(STAR_CHECKS[3]);
    for f in &basis {
        let expected = heat_kernel(g, f);
        match star.berezin_apply(&lift(g, f)) {
            Ok(b) => heat.formal(&(&b - &expected), || format!("f={f}")),
            Err(e) => heat.error(e.to_string(), || format!("f={f}")),
        }
    }
    records.push(heat.finish());

    let b = berezin_transform(&star, 2 * chart.nu_truncation);
    let mut lap = Check::new(STAR_CHECKS[4]);
    let mut symbol = Check::new(STAR_CHECKS[5]);
    match log_berezin(&b) {
        Ok(x) => {
            let r = x.sub(&star.laplacian().times_nu().times_nu()).reliable_part();
            lap.value(r.is_zero(), || r.to_string(), || "nu log B".into());
            match sigma(&x) {
                Ok(sx) => symbol.formal(&(&sx - g.hamiltonian()), || "sigma(nu log B)".into()),
                Err(e) => symbol.error(e.to_string(), || "sigma(nu log B)".into()),
            }
        }
        Err(e) => {
            lap.error(e.to_string(), || "nu log B".into());
            symbol.error(e.to_string(), || "nu log B".into());
        }
    }
    records.extend([lap.finish(), symbol.finish()]);
    records
}

/// `Σ_n nu^n/n! Δ^n f` with `Δ = g^{l̄k} ∂_k ∂̄_l`, computed by direct differentiation.
fn heat_kernel(g: &GroupoidData, f: &Polynomial) -> FormalFunction {
    let chart = g.chart();
    let space = chart.base;
    let mut out = FormalFunction::zero(chart);
    let mut term = f.clone();
    let mut factorial = Rational::from_integer(1.into());
    for n in 0..=chart.nu_truncation {
        if n > 0 {
            factorial *= Rational::from_integer(n.into());
        }
        out = &out + &nu_power(chart, &term.scale(&factorial.recip()), n);
        let mut next = Polynomial::zero(space);
        for l in 0..space.dim {
            for k in 0..space.dim {
                next = &next + &(g.tensor().g(l, k) * &term.derivative(space.z(k)).derivative(space.w(l)));
            }
        }
        term = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{parse_formal, parse_poly, BaseSpace, Chart};
    use crate::groupoid::kp_check;
    use crate::report::Status;

    fn data(g: &str, nfib: u32) -> GroupoidData {
        let c = Chart::complex(1, nfib, 0);
        let t = kp_check(vec![vec![parse_poly(g, BaseSpace::complex(1)).unwrap()]]).unwrap();
        GroupoidData::assemble(t, c).unwrap()
    }

    fn failures(records: &[CheckRecord]) -> Vec<&CheckRecord> {
        records.iter().filter(|r| r.status == Status::Fail).collect()
    }

    #[test]
    fn flat_chart_passes() {
        let g = data("1", 4);
        let r = verify_groupoid(&g, &VerifyOptions { trials: 4, ..Default::default() });
        assert!(failures(&r).is_empty(), "{:#?}", failures(&r));
    }

    #[test]
    fn curved_chart_passes() {
        let g = data("1 + z1*w1", 4);
        let r = verify_groupoid(&g, &VerifyOptions { trials: 4, ..Default::default() });
        assert!(failures(&r).is_empty(), "{:#?}", failures(&r));
    }

    #[test]
    fn perturbed_hamiltonian_is_caught() {
        let g = data("1 + z1*w1", 4);
        let c = g.chart();
        let bumped = g.hamiltonian() + &parse_formal("zeta1^2*zetab1^2", c).unwrap();
        let p = GroupoidData::with_hamiltonian(g.tensor().clone(), c, bumped).unwrap();
        let r = verify_groupoid(&p, &VerifyOptions { trials: 2, ..Default::default() });
        let bad: Vec<_> = failures(&r).iter().map(|r| r.name.as_str()).collect();
        assert!(bad.contains(&"groupoid.q_conjugates_dual_source"), "{bad:?}");
    }

    #[test]
    fn inverse_of_flat_source() {
        let g = data("1", 3);
        let c = g.chart();
        let s = parse_formal("z1*w1 + z1*zeta1", c).unwrap();
        assert_eq!(g.inverse_map(&s).unwrap(), parse_formal("z1*w1 + w1*zetab1", c).unwrap());
        assert_eq!(g.inverse_map(&FormalFunction::one(c)).unwrap(), FormalFunction::one(c));
    }

    fn with_nu(g: &str, dim: usize, nu: u32) -> GroupoidData {
        let space = BaseSpace::complex(dim);
        let entries = (0..dim)
            .map(|l| (0..dim).map(|k| if l == k { parse_poly(g, space).unwrap() } else { Polynomial::zero(space) }).collect())
            .collect();
        GroupoidData::assemble(kp_check(entries).unwrap(), Chart::complex(dim, 4, nu)).unwrap()
    }

    #[test]
    fn star_checks_pass_on_flat_charts() {
        for dim in [1, 2] {
            let r = verify_star(&with_nu("1", dim, 3), &VerifyOptions { trials: 3, ..Default::default() });
            assert_eq!(r.len(), STAR_CHECKS.len());
            assert!(r.iter().all(|r| r.status == Status::Pass), "{r:#?}");
        }
    }

    #[test]
    fn star_checks_skip_without_nu_or_flatness() {
        let r = verify_star(&with_nu("1", 1, 0), &VerifyOptions::default());
        assert!(r.iter().all(|r| r.status == Status::Skipped && r.witness == "nu_truncation is 0"));
        let r = verify_star(&with_nu("1 + z1*w1", 1, 2), &VerifyOptions::default());
        assert!(r.iter().all(|r| r.status == Status::Skipped && r.witness == "tensor is not constant"));
    }

    #[test]
    fn permutation_record_present_for_two_dimensions() {
        let g = with_nu("1", 2, 0);
        let r = verify_groupoid(&g, &VerifyOptions { basis_degree: 2, trials: 2, ..Default::default() });
        let rec = r.iter().find(|r| r.name == "groupoid.permutation_invariance").unwrap();
        assert_eq!(rec.status, Status::Pass);
        assert!(rec.witness.contains("instances"));
    }
}
