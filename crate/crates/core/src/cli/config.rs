//! Chart configuration files.

use serde::{Deserialize, Serialize};

use crate::algebra::{parse_poly, BaseSpace, Chart, Polynomial};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlavorName {
    Complex,
    Real,
}

/// The JSON configuration shared by every command.
///
/// `tensor` holds `g^{l̄k}` (row `l`, column `k`) for complex charts and `η^{ij}` for real ones.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartConfig {
    pub dimension: usize,
    pub flavor: FlavorName,
    pub tensor: Vec<Vec<String>>,
    pub fiber_truncation: u32,
    pub nu_truncation: u32,
    pub basis_degree: u32,
    pub trials: usize,
    pub rng_seed: u64,
}

impl ChartConfig {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// A flat complex chart with `g^{l̄k} = δ^{lk}`.
    pub fn flat(dimension: usize) -> Self {
        ChartConfig {
            dimension,
            flavor: FlavorName::Complex,
            tensor: (0..dimension)
                .map(|l| (0..dimension).map(|k| if l == k { "1" } else { "0" }.to_string()).collect())
                .collect(),
            fiber_truncation: 4,
            nu_truncation: 4,
            basis_degree: 3,
            trials: 10,
            rng_seed: 0,
        }
    }

    pub fn space(&self) -> BaseSpace {
        match self.flavor {
            FlavorName::Complex => BaseSpace::complex(self.dimension),
            FlavorName::Real => BaseSpace::real(self.dimension),
        }
    }

    pub fn chart(&self) -> Chart {
        Chart::new(self.space(), self.fiber_truncation, self.nu_truncation)
    }

    /// Parse the tensor matrix, checking its shape against `dimension`.
    pub fn tensor_entries(&self) -> Result<Vec<Vec<Polynomial>>> {
        if self.dimension == 0 {
            return Err(Error::Config("dimension must be positive".into()));
        }
        if self.tensor.len() != self.dimension || self.tensor.iter().any(|r| r.len() != self.dimension) {
            return Err(Error::Config(format!(
                "tensor must be a {0}x{0} matrix",
                self.dimension
            )));
        }
        let space = self.space();
        self.tensor
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .map(|(j, s)| {
                        parse_poly(s, space)
                            .map_err(|e| Error::Config(format!("tensor entry ({}, {}): {e}", i + 1, j + 1)))
                    })
                    .collect()
            })
            .collect()
    }

    /// Preconditions of the groupoid commands.
    pub fn require_groupoid(&self) -> Result<()> {
        if self.flavor != FlavorName::Complex {
            return Err(Error::Config("this command needs a complex chart".into()));
        }
        if self.fiber_truncation < 2 {
            return Err(Error::Config("fiber_truncation must be at least 2".into()));
        }
        Ok(())
    }

    /// Replace `rng_seed` by the value of `FGK_SEED` when that variable is set.
    pub fn apply_seed_override(&mut self, value: Option<&str>) -> Result<()> {
        if let Some(v) = value {
            self.rng_seed = v
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("FGK_SEED is not an unsigned integer: `{v}`")))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut c = ChartConfig::flat(2);
        c.tensor[0][1] = "z1*w2".into();
        assert_eq!(ChartConfig::parse(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn rejects_bad_shape_and_fields() {
        let mut c = ChartConfig::flat(2);
        c.tensor.pop();
        assert!(matches!(c.tensor_entries(), Err(Error::Config(_))));
        let text = ChartConfig::flat(1).to_json().replace("\"trials\"", "\"trails\"");
        assert!(ChartConfig::parse(&text).is_err());
    }

    #[test]
    fn bad_entry_names_position() {
        let mut c = ChartConfig::flat(1);
        c.tensor[0][0] = "1 + q".into();
        let e = c.tensor_entries().unwrap_err().to_string();
        assert!(e.contains("(1, 1)"), "{e}");
    }

    #[test]
    fn seed_override() {
        let mut c = ChartConfig::flat(1);
        c.apply_seed_override(Some("17")).unwrap();
        assert_eq!(c.rng_seed, 17);
        assert!(c.apply_seed_override(Some("x")).is_err());
        c.apply_seed_override(None).unwrap();
        assert_eq!(c.rng_seed, 17);
    }
}
