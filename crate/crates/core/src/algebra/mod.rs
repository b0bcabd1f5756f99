//! Exact polynomial and truncated formal-series arithmetic on a coordinate chart.
//!
//! Base functions live in [`Polynomial`]. Functions on the formal neighborhood of the
//! zero section live in [`FormalFunction`]: polynomial coefficients times monomials in
//! the fiber variables and the formal parameter `nu`, truncated at the chart's declared
//! orders. Complex charts are complexified, so `z` and `w = z̄` are independent
//! commuting variables and every identity is an exact rational identity.

mod formal;
mod parse;
mod polynomial;

pub use formal::FormalFunction;
pub use parse::{parse_formal, parse_poly};
pub use polynomial::Polynomial;

use std::fmt;

/// Real charts carry coordinates `x1..xd` with fibers `xi1..xid`; complex charts carry
/// `z1..zd, w1..wd` (`w` standing for z̄) with fibers `zeta1..zetad, zetab1..zetabd`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Flavor {
    Real,
    Complex,
}

/// Dimension and flavor of the base manifold chart.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BaseSpace {
    pub dim: usize,
    pub flavor: Flavor,
}

impl BaseSpace {
    pub fn new(dim: usize, flavor: Flavor) -> Self {
        assert!(dim >= 1, "chart dimension must be positive");
        BaseSpace { dim, flavor }
    }

    pub fn real(dim: usize) -> Self {
        Self::new(dim, Flavor::Real)
    }

    pub fn complex(dim: usize) -> Self {
        Self::new(dim, Flavor::Complex)
    }

    /// Number of base coordinates: `d` on real charts, `2d` on complex ones.
    pub fn nvars(&self) -> usize {
        match self.flavor {
            Flavor::Real => self.dim,
            Flavor::Complex => 2 * self.dim,
        }
    }

    /// Index of the holomorphic coordinate `z^k` (0-based `k`).
    pub fn z(&self, k: usize) -> usize {
        debug_assert!(self.flavor == Flavor::Complex && k < self.dim);
        k
    }

    /// Index of the antiholomorphic coordinate `w^l = z̄^l` (0-based `l`).
    pub fn w(&self, l: usize) -> usize {
        debug_assert!(self.flavor == Flavor::Complex && l < self.dim);
        self.dim + l
    }

    pub fn var_name(&self, i: usize) -> String {
        match self.flavor {
            Flavor::Real => format!("x{}", i + 1),
            Flavor::Complex if i < self.dim => format!("z{}", i + 1),
            Flavor::Complex => format!("w{}", i - self.dim + 1),
        }
    }

    pub fn fiber_name(&self, i: usize) -> String {
        match self.flavor {
            Flavor::Real => format!("xi{}", i + 1),
            Flavor::Complex if i < self.dim => format!("zeta{}", i + 1),
            Flavor::Complex => format!("zetab{}", i - self.dim + 1),
        }
    }

    /// Whether base coordinate `i` is holomorphic (always false on real charts).
    pub fn is_holomorphic(&self, i: usize) -> bool {
        self.flavor == Flavor::Complex && i < self.dim
    }
}

/// A coordinate chart on the cotangent bundle together with its truncation orders.
///
/// `copies > 1` models the product of several charts (used for the doubled chart of
/// comultiplication checks); the fiber truncation then bounds the total fiber degree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Chart {
    pub base: BaseSpace,
    pub copies: usize,
    pub fiber_truncation: u32,
    pub nu_truncation: u32,
}

impl Chart {
    pub fn new(base: BaseSpace, fiber_truncation: u32, nu_truncation: u32) -> Self {
        Chart {
            base,
            copies: 1,
            fiber_truncation,
            nu_truncation,
        }
    }

    pub fn complex(dim: usize, fiber_truncation: u32, nu_truncation: u32) -> Self {
        Self::new(BaseSpace::complex(dim), fiber_truncation, nu_truncation)
    }

    pub fn real(dim: usize, fiber_truncation: u32, nu_truncation: u32) -> Self {
        Self::new(BaseSpace::real(dim), fiber_truncation, nu_truncation)
    }

    /// The product of `copies` copies of this chart.
    pub fn power(&self, copies: usize, fiber_truncation: u32) -> Self {
        assert!(copies >= 1);
        Chart {
            base: self.base,
            copies,
            fiber_truncation,
            nu_truncation: self.nu_truncation,
        }
    }

    /// The single-copy chart underlying a product chart.
    pub fn factor(&self) -> Self {
        Chart {
            copies: 1,
            ..*self
        }
    }

    pub fn flavor(&self) -> Flavor {
        self.base.flavor
    }

    pub fn dim(&self) -> usize {
        self.base.dim
    }

    /// Base (equivalently fiber) coordinates per copy.
    pub fn block(&self) -> usize {
        self.base.nvars()
    }

    /// Number of chart variables, excluding `nu`.
    pub fn nvars(&self) -> usize {
        2 * self.block() * self.copies
    }

    pub fn base_index(&self, copy: usize, i: usize) -> usize {
        debug_assert!(copy < self.copies && i < self.block());
        2 * self.block() * copy + i
    }

    pub fn fiber_index(&self, copy: usize, i: usize) -> usize {
        debug_assert!(copy < self.copies && i < self.block());
        2 * self.block() * copy + self.block() + i
    }

    pub fn nu_index(&self) -> usize {
        self.nvars()
    }

    pub fn is_fiber(&self, index: usize) -> bool {
        index < self.nvars() && (index % (2 * self.block())) >= self.block()
    }

    /// The Darboux partner of a variable: base coordinate `i` pairs with fiber `i`.
    pub fn partner(&self, index: usize) -> usize {
        if self.is_fiber(index) {
            index - self.block()
        } else {
            index + self.block()
        }
    }

    pub fn fiber_degree(&self, exps: &[u32]) -> u32 {
        (0..self.nvars())
            .filter(|&i| self.is_fiber(i))
            .map(|i| exps[i])
            .sum()
    }

    pub fn var_name(&self, index: usize) -> String {
        if index == self.nu_index() {
            return "nu".to_string();
        }
        let copy = index / (2 * self.block());
        let local = index % (2 * self.block());
        let name = if local < self.block() {
            self.base.var_name(local)
        } else {
            self.base.fiber_name(local - self.block())
        };
        if self.copies > 1 {
            format!("{}_{}", name, copy + 1)
        } else {
            name
        }
    }
}

/// How far a truncated formal function is known to be exact.
///
/// `Through(k)` means every term of fiber degree `<= k` is exact; `Exact` means the
/// stored terms are the complete function. Ordered so that `min` picks the weaker claim.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Precision {
    Through(i32),
    Exact,
}

impl Precision {
    pub fn lowered(self, by: i32) -> Self {
        match self {
            Precision::Through(k) => Precision::Through(k - by),
            Precision::Exact => Precision::Exact,
        }
    }

    pub fn capped(self, order: i32) -> Self {
        self.min(Precision::Through(order))
    }

    /// Fiber order through which the value can be trusted, `None` if unbounded.
    pub fn order(self) -> Option<i32> {
        match self {
            Precision::Through(k) => Some(k),
            Precision::Exact => None,
        }
    }

    pub fn covers(self, degree: i32) -> bool {
        match self {
            Precision::Through(k) => degree <= k,
            Precision::Exact => true,
        }
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Precision::Through(k) => write!(f, "through fiber degree {}", k),
            Precision::Exact => write!(f, "exact"),
        }
    }
}
