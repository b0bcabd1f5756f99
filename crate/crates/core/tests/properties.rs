use proptest::prelude::*;

use formal_groupoid::algebra::{parse_poly, BaseSpace, Chart, FormalFunction, Polynomial};
use formal_groupoid::cli::{ChartConfig, FlavorName};
use formal_groupoid::coherent::{Word, WordFunctional};
use formal_groupoid::groupoid::{kp_check, GroupoidData};
use formal_groupoid::multiindex;
use formal_groupoid::poisson::{bracket_m, bracket_tm, PoissonTensor};
use formal_groupoid::starprod::StarProduct;
use formal_groupoid::Rational;

/// A polynomial of degree `<= degree` from a coefficient list, one entry per monomial.
fn poly(space: BaseSpace, degree: u32, coeffs: &[i64]) -> Polynomial {
    multiindex::up_to_degree(space.nvars(), degree)
        .into_iter()
        .zip(coeffs)
        .fold(Polynomial::zero(space), |acc, (e, &c)| {
            &acc + &Polynomial::monomial(space, e, Rational::from_integer(c.into()))
        })
}

fn coeffs(n: usize) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-3i64..=3, n)
}

fn curved() -> GroupoidData {
    let space = BaseSpace::complex(1);
    let t = kp_check(vec![vec![parse_poly("1 + z1*w1", space).unwrap()]]).unwrap();
    GroupoidData::assemble(t, Chart::complex(1, 4, 0)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn display_parse_round_trip(c in coeffs(15)) {
        let space = BaseSpace::complex(2);
        let p = poly(space, 2, &c);
        prop_assert_eq!(parse_poly(&p.to_string(), space).unwrap(), p);
    }

    #[test]
    fn base_bracket_is_antisymmetric_and_jacobi(a in coeffs(10), b in coeffs(10), c in coeffs(10)) {
        let space = BaseSpace::complex(1);
        let t = PoissonTensor::complex(vec![vec![parse_poly("1 + z1*w1", space).unwrap()]]).unwrap();
        let (f, g, h) = (poly(space, 3, &a), poly(space, 3, &b), poly(space, 3, &c));
        let br = |x: &Polynomial, y: &Polynomial| bracket_m(x, y, &t);
        prop_assert!((&br(&f, &g) + &br(&g, &f)).is_zero());
        let jac = &(&br(&f, &br(&g, &h)) + &br(&g, &br(&h, &f))) + &br(&h, &br(&f, &g));
        prop_assert!(jac.is_zero());
    }

    #[test]
    fn wick_product_is_associative(a in coeffs(6), b in coeffs(6), c in coeffs(6)) {
        let chart = Chart::complex(1, 2, 4);
        let star = StarProduct::new(chart, PoissonTensor::complex_identity(1)).unwrap();
        let (f, g, h) = (poly(chart.base, 2, &a), poly(chart.base, 2, &b), poly(chart.base, 2, &c));
        let lift = |p: &Polynomial| FormalFunction::from_poly(chart, p, 0);
        let left = star.star_series(&star.star(&f, &g), &lift(&h)).unwrap();
        let right = star.star_series(&lift(&f), &star.star(&g, &h)).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn source_is_a_poisson_morphism(a in coeffs(10), b in coeffs(10)) {
        let g = curved();
        let space = g.chart().base;
        let (f, h) = (poly(space, 3, &a), poly(space, 3, &b));
        let r = &g.source(&bracket_m(&f, &h, g.poisson())) - &bracket_tm(&g.source(&f), &g.source(&h)).unwrap();
        prop_assert!(r.is_zero_mod_valid(), "{}", r.reliable_part());
        let st = bracket_tm(&g.source(&f), &g.target(&h)).unwrap();
        prop_assert!(st.is_zero_mod_valid(), "{}", st.reliable_part());
    }

    #[test]
    fn inverse_map_is_an_involution(a in coeffs(15)) {
        let g = curved();
        let chart = g.chart();
        let f = multiindex::up_to_degree(chart.nvars(), 2)
            .into_iter()
            .zip(&a)
            .fold(FormalFunction::zero(chart), |acc, (mut e, &c)| {
                e.push(0);
                &acc + &FormalFunction::monomial(chart, e, Rational::from_integer(c.into()))
            });
        let back = g.inverse_map(&g.inverse_map(&f).unwrap()).unwrap();
        let r = &back - &f;
        prop_assert!(r.is_zero_mod_valid(), "{}", r.reliable_part());
    }

    #[test]
    fn counit_is_the_convolution_unit(a in coeffs(3), i in 0usize..3, j in 0usize..3) {
        let space = BaseSpace::complex(1);
        let letters: Vec<Polynomial> = ["z1", "w1", "z1*w1"].iter().map(|s| parse_poly(s, space).unwrap()).collect();
        let f = poly(space, 1, &a);
        let x = WordFunctional::x(f);
        let unit = WordFunctional::counit(space).convolution(&x);
        let u = Word::new(vec![letters[i].clone(), letters[j].clone()]).unwrap();
        prop_assert_eq!(unit.at(&u).unwrap(), x.at(&u).unwrap());
    }

    #[test]
    fn config_json_round_trip(
        dim in 1usize..3,
        real in any::<bool>(),
        fib in 0u32..8,
        nu in 0u32..8,
        basis in 0u32..5,
        trials in 0usize..100,
        seed in any::<u64>(),
    ) {
        let mut c = ChartConfig::flat(dim);
        if real {
            c.flavor = FlavorName::Real;
        }
        c.fiber_truncation = fib;
        c.nu_truncation = nu;
        c.basis_degree = basis;
        c.trials = trials;
        c.rng_seed = seed;
        prop_assert_eq!(ChartConfig::parse(&c.to_json()).unwrap(), c);
    }
}
