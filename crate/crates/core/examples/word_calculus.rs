//! Word functionals: ⟨F⟩, ⟪F⟫, the convolution product and the c-bracket.

use formal_groupoid::algebra::{parse_formal, parse_poly, BaseSpace, Chart};
use formal_groupoid::coherent::{Word, WordFunctional};
use formal_groupoid::groupoid::{kp_check, GroupoidData};

fn main() -> formal_groupoid::Result<()> {
    let space = BaseSpace::complex(1);
    let chart = Chart::complex(1, 4, 0);
    let g = GroupoidData::assemble(kp_check(vec![vec![parse_poly("1", space)?]])?, chart)?;
    let p = |s: &str| parse_poly(s, space);

    let u = Word::new(vec![p("w1")?, p("z1")?])?;
    println!("u = {u}");
    for (a, b) in u.coproduct()? {
        println!("  {a}  (x)  {b}");
    }

    let chi = WordFunctional::chi(parse_formal("zeta1*zetab1", chart)?, &g);
    println!("<zeta1*zetab1>(u) = {}", chi.at(&u)?);

    let sf = WordFunctional::double_angle(g.source(&p("z1*w1")?), &g);
    println!("<<S(z1*w1)>>(w1 (x) 1) = {}", sf.eval(&[Word::letter(p("w1")?), Word::unit()])?);

    let (xz, xw) = (WordFunctional::x(p("z1")?), WordFunctional::x(p("w1")?));
    let bracket = xz.c_bracket(&xw, g.poisson());
    println!("{{X_z1, X_w1}}_c(1) = {}", bracket.at(&Word::unit())?);

    let product = xz.convolution(&xw);
    println!("(X_z1 X_w1)(1) = {}", product.at(&Word::unit())?);
    println!("(X_z1 X_w1)(w1) = {}", product.at(&Word::letter(p("w1")?))?);
    Ok(())
}
