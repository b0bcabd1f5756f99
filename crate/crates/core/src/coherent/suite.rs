//! The word-calculus identities run by `fgk verify`.

use super::agreement::source_target_double_angle;
use super::family::{check_family, extend_family, family_records, CoherentFamily, ExtendOptions, PolyDiffOp};
use super::{
    agreement_check, chi_eval, chi_eval_with, h_action, k_action, theta_coassoc_check, tuple_string, word_tuples,
    words_up_to, AgreementInstance, SourceChoice, Word, WordFunctional,
};
use crate::algebra::{FormalFunction, Polynomial};
use crate::error::Result;
use crate::groupoid::GroupoidData;
use crate::multiindex;
use crate::poisson::{bracket_m, bracket_tm};
use crate::report::{Check, CheckRecord};
use crate::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CoherentOptions {
    /// Word length bound for single-word identities.
    pub max_word: usize,
    /// Word length bound for the convolution isomorphism.
    pub convolution_word: usize,
    /// Total length bound for word pairs and triples.
    pub tuple_total: usize,
    /// Total length bound for the 4-tuples of the coassociativity check.
    pub theta_total: usize,
    pub trials: usize,
    pub random_degree: u32,
    pub seed: u64,
}

impl Default for CoherentOptions {
    fn default() -> Self {
        CoherentOptions {
            max_word: 2,
            convolution_word: 3,
            tuple_total: 2,
            theta_total: 3,
            trials: 5,
            random_degree: 2,
            seed: 0,
        }
    }
}

/// Letters used to build words: the coordinates and one quadratic product.
fn alphabet(g: &GroupoidData) -> Vec<Polynomial> {
    let space = g.chart().base;
    let mut out: Vec<Polynomial> = (0..space.nvars()).map(|i| Polynomial::var(space, i)).collect();
    out.push(&Polynomial::var(space, 0) * &Polynomial::var(space, space.nvars() - 1));
    out
}

/// Sample formal functions: fiber coordinates, a mixed monomial and source/target images.
fn samples(g: &GroupoidData) -> Vec<FormalFunction> {
    let chart = g.chart();
    let space = chart.base;
    let last = chart.block() - 1;
    let z = Polynomial::var(space, 0);
    let zw = &z * &Polynomial::var(space, last);
    vec![
        FormalFunction::fiber(chart, 0, 0),
        FormalFunction::fiber(chart, 0, last),
        &(&FormalFunction::base_var(chart, 0, 0) * &FormalFunction::fiber(chart, 0, 0))
            * &FormalFunction::fiber(chart, 0, last),
        g.source(&zw),
        g.target(&z),
    ]
}

fn record(check: &mut Check, r: Result<Polynomial>, witness: impl FnOnce() -> String) {
    match r {
        Ok(p) => check.value(p.is_zero(), || p.to_string(), witness),
        Err(e) => check.error(e.to_string(), witness),
    }
}

/// Run every word-calculus identity; records come back in a fixed order.
pub fn verify_coherent(g: &GroupoidData, opts: &CoherentOptions) -> Vec<CheckRecord> {
    let eta = g.poisson();
    let space = g.chart().base;
    let letters = alphabet(g);
    let words = words_up_to(&letters, opts.max_word);
    let long_words = words_up_to(&letters, opts.convolution_word);
    let pairs = word_tuples(&letters, 2, opts.tuple_total);
    let fs = samples(g);
    let chis: Vec<WordFunctional<'_>> = fs.iter().map(|f| WordFunctional::chi(f.clone(), g)).collect();
    let mut records = Vec::new();

    let mut unit = Check::new("coherent.convolution_unit");
    let mut commutative = Check::new("coherent.convolution_commutative");
    let mut iso = Check::new("coherent.convolution_isomorphism");
    let counit = WordFunctional::counit(space);
    for (i, a) in chis.iter().enumerate() {
        let au = a.convolution(&counit);
        for u in &long_words {
            record(&mut unit, (|| Ok(&au.at(u)? - &a.at(u)?))(), || format!("F={}; u={u}", fs[i]));
        }
        let j = (i + 1) % chis.len();
        let (ab, ba) = (a.convolution(&chis[j]), chis[j].convolution(a));
        let prod = &fs[i] * &fs[j];
        for u in &long_words {
            let w = || format!("F={}; G={}; u={u}", fs[i], fs[j]);
            record(&mut commutative, (|| Ok(&ab.at(u)? - &ba.at(u)?))(), w);
            record(&mut iso, (|| Ok(&chi_eval(&prod, u, g)? - &ab.at(u)?))(), w);
        }
    }
    records.extend([unit.finish(), commutative.finish(), iso.finish()]);

    let mut x_mult = Check::new("coherent.x_multiplicative");
    let mut x_anti = Check::new("coherent.x_anti_poisson");
    let mut s_x = Check::new("coherent.source_commutes_with_x");
    let mut s_angle = Check::new("coherent.source_angle");
    let mut t_angle = Check::new("coherent.target_angle");
    for f in &letters {
        let sf = WordFunctional::chi(g.source(f), g);
        let tf = WordFunctional::chi(g.target(f), g);
        for u in &words {
            let w = || format!("f={f}; u={u}");
            record(&mut s_angle, (|| Ok(&sf.at(u)? - &h_action(u, f, eta)))(), w);
            record(&mut t_angle, (|| Ok(&tf.at(u)? - &k_action(u, f)))(), w);
        }
        for h in &letters {
            let xf = WordFunctional::x(f.clone());
            let xh = WordFunctional::x(h.clone());
            let conv = xf.convolution(&xh);
            let br = xf.c_bracket(&xh, eta);
            let xbr = WordFunctional::x(bracket_m(f, h, eta));
            let sx = sf.c_bracket(&xh, eta);
            for u in &words {
                let w = || format!("f={f}; g={h}; u={u}");
                record(&mut x_mult, (|| Ok(&conv.at(u)? - &k_action(u, &(f * h))))(), w);
                record(&mut x_anti, (|| Ok(&br.at(u)? + &xbr.at(u)?))(), w);
                record(&mut s_x, sx.at(u), w);
            }
        }
    }
    records.extend([x_mult.finish(), x_anti.finish(), s_x.finish(), s_angle.finish(), t_angle.finish()]);

    let mut anti = Check::new("coherent.c_bracket_antisymmetric");
    let mut transfer = Check::new("coherent.bracket_transfer");
    for i in 0..fs.len() {
        let j = (i + 1) % fs.len();
        let ab = chis[i].c_bracket(&chis[j], eta);
        let ba = chis[j].c_bracket(&chis[i], eta);
        let fg = bracket_tm(&fs[i], &fs[j]).expect("same chart");
        for u in &words {
            let w = || format!("F={}; G={}; u={u}", fs[i], fs[j]);
            record(&mut anti, (|| Ok(&ab.at(u)? + &ba.at(u)?))(), w);
            record(&mut transfer, (|| Ok(&chi_eval(&fg, u, g)? - &ab.at(u)?))(), w);
        }
    }
    records.extend([anti.finish(), transfer.finish()]);

    let mut reduction = Check::new("coherent.double_angle_reduction");
    let mut st = Check::new("coherent.double_angle_source_target");
    let mut dagger = Check::new("coherent.dagger_law");
    for (f, chi) in fs.iter().zip(&chis) {
        let dbl = WordFunctional::double_angle(f.clone(), g);
        let red = dbl.reduce();
        for u in &words {
            record(&mut reduction, (|| Ok(&red.at(u)? - &chi.at(u)?))(), || format!("F={f}; u={u}"));
        }
        match g.inverse_map(f) {
            Ok(inv) => {
                let swapped = dbl.dagger();
                let dbl_inv = WordFunctional::double_angle(inv, g);
                for t in &pairs {
                    record(&mut dagger, (|| Ok(&dbl_inv.eval(t)? - &swapped.eval(t)?))(), || {
                        format!("F={f}; {}", tuple_string(t))
                    });
                }
            }
            Err(e) => dagger.error(e.to_string(), || format!("F={f}")),
        }
    }
    for f in &letters {
        source_target_double_angle(&mut st, g, f, &pairs);
    }
    records.extend([reduction.finish(), st.finish(), dagger.finish()]);

    records.extend(filtration_records(g, &letters));
    records.extend(family_suite(g, opts));

    let zw = letters.last().expect("nonempty alphabet").clone();
    let z = letters[0].clone();
    for (name, inst) in [
        ("coherent.agreement_source_left", AgreementInstance::SourceLeft(zw.clone())),
        ("coherent.agreement_target_right", AgreementInstance::TargetRight(zw.clone())),
        ("coherent.agreement_ideal", AgreementInstance::Ideal(z.clone())),
    ] {
        let (f, big) = inst.build(g);
        records.extend(agreement_check(name, &f, &big, g, &letters, opts.tuple_total));
    }

    let coords: Vec<Polynomial> = (0..space.nvars()).map(|i| Polynomial::var(space, i)).collect();
    let theta_source = WordFunctional::double_angle(g.source(&zw), g);
    let theta_target = WordFunctional::double_angle(g.target(&z), g);
    records.push(theta_coassoc_check("coherent.theta_coassociativity.source", &theta_source, &coords, opts.theta_total));
    records.push(theta_coassoc_check("coherent.theta_coassociativity.target", &theta_target, &coords, opts.theta_total));
    records
}

/// For `F` of fiber degree exactly two: `⟨F⟩₂` is a symmetric biderivation given by
/// `(−1)ⁿ n! F^{ij} ∂_i f ∂_j g`, and it does not depend on the source map.
fn filtration_records(g: &GroupoidData, letters: &[Polynomial]) -> Vec<CheckRecord> {
    let chart = g.chart();
    let space = chart.base;
    let b = chart.block();
    let mut sym = Check::new("coherent.filtration_symmetric");
    let mut deriv = Check::new("coherent.filtration_multiderivation");
    let mut closed = Check::new("coherent.filtration_closed_form");
    let mut indep = Check::new("coherent.source_independence");
    let base_factors: Vec<Vec<u32>> = multiindex::up_to_degree(space.nvars(), 1);
    for m in multiindex::exactly_degree(b, 2) {
        for base in &base_factors {
            let mut exps = vec![0; chart.nvars() + 1];
            for i in 0..b {
                exps[chart.base_index(0, i)] = base[i];
                exps[chart.fiber_index(0, i)] = m[i];
            }
            let one = Rational::from_integer(1.into());
            let f = FormalFunction::monomial(chart, exps, one.clone());
            let coef = Polynomial::monomial(space, base.clone(), one);
            let at = |x: &Polynomial, y: &Polynomial, src| {
                chi_eval_with(&f, &Word::new(vec![x.clone(), y.clone()])?, g, src)
            };
            for x in letters {
                for y in letters {
                    let w = || format!("F={f}; f={x}; g={y}");
                    record(&mut sym, (|| Ok(&at(x, y, SourceChoice::Source)? - &at(y, x, SourceChoice::Source)?))(), w);
                    record(
                        &mut indep,
                        (|| Ok(&at(x, y, SourceChoice::Source)? - &at(x, y, SourceChoice::DualSource)?))(),
                        w,
                    );
                    let expected = closed_form(&coef, &m, x, y);
                    record(&mut closed, (|| Ok(&at(x, y, SourceChoice::Source)? - &expected))(), w);
                    let (p, q) = (x, &letters[0]);
                    let leibniz = || -> Result<Polynomial> {
                        Ok(&(&at(&(p * q), y, SourceChoice::Source)? - &(p * &at(q, y, SourceChoice::Source)?))
                            - &(q * &at(p, y, SourceChoice::Source)?))
                    };
                    record(&mut deriv, leibniz(), w);
                }
            }
        }
    }
    vec![sym.finish(), deriv.finish(), closed.finish(), indep.finish()]
}

/// `(−1)² 2! F^{ij} ∂_i f ∂_j g` for `F = c·ξ^m`, summed over ordered index pairs of type `m`.
fn closed_form(c: &Polynomial, m: &[u32], f: &Polynomial, g: &Polynomial) -> Polynomial {
    let mut out = Polynomial::zero(c.space());
    let n = m.len();
    for i in 0..n {
        for j in 0..n {
            let mut t = vec![0u32; n];
            t[i] += 1;
            t[j] += 1;
            if t == m {
                out = &out + &(&f.derivative(i) * &g.derivative(j));
            }
        }
    }
    let mfact = multiindex::factorial_multi(m);
    (c * &out).scale(&mfact)
}

/// Coherence of `⟨F⟩₀…⟨F⟩₃`, and the extension of `(⟨F⟩₀, ⟨F⟩₁)` compared with `⟨F⟩₂`.
fn family_suite(g: &GroupoidData, opts: &CoherentOptions) -> Vec<CheckRecord> {
    let space = g.chart().base;
    let eta = g.poisson();
    let f = samples(g)[3].clone();
    let eval = |_k: usize, args: &[Polynomial]| chi_eval(&f, &Word::new(args.to_vec())?, g);
    let mut out = family_records("coherent.chi_family", 4, &eval, eta, opts.trials, opts.random_degree, opts.seed);

    let mut ext = Check::new("coherent.extension_matches_chi");
    let probe = |orders: &[u32]| PolyDiffOp::from_probe(space, orders, |a| eval(a.len(), a));
    let built = (|| -> Result<(CoherentFamily, PolyDiffOp)> {
        let fam = CoherentFamily::new(eta.clone(), vec![probe(&[])?, probe(&[1])?])?;
        check_family(&fam)?;
        Ok((extend_family(&fam, &ExtendOptions::default())?, probe(&[1, 2])?))
    })();
    match built {
        Ok((fam, chi2)) => {
            let dev = fam.operator(2).sub(&chi2);
            ext.value(dev.is_multiderivation() && dev == dev.swap(0, 1), || dev.to_string(), || format!("F={f}"));
            let table = |k: usize, a: &[Polynomial]| Ok(fam.eval(k, a));
            out.extend(family_records("coherent.extension", 3, &table, eta, opts.trials, opts.random_degree, opts.seed));
        }
        Err(e) => ext.error(e.to_string(), || format!("F={f}")),
    }
    out.push(ext.finish());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{parse_poly, BaseSpace, Chart};
    use crate::groupoid::kp_check;

    fn data(g: &str) -> GroupoidData {
        let t = kp_check(vec![vec![parse_poly(g, BaseSpace::complex(1)).unwrap()]]).unwrap();
        GroupoidData::assemble(t, Chart::complex(1, 4, 0)).unwrap()
    }

    #[test]
    fn flat_suite_passes() {
        let g = data("1");
        let r = verify_coherent(&g, &CoherentOptions::default());
        let bad: Vec<_> = r.iter().filter(|r| !r.passed()).collect();
        assert!(bad.is_empty(), "{bad:#?}");
    }

    #[test]
    fn curved_suite_passes() {
        let g = data("1 + z1*w1");
        let r = verify_coherent(&g, &CoherentOptions { trials: 2, ..Default::default() });
        let bad: Vec<_> = r.iter().filter(|r| !r.passed()).collect();
        assert!(bad.is_empty(), "{bad:#?}");
    }
}
