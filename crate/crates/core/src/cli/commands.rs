//! The four batch commands. Each returns a report; `Err` is reserved for configuration
//! problems, every mathematical failure becomes a failing record.

use serde::{Deserialize, Serialize};

use super::config::{ChartConfig, FlavorName};
use crate::coherent::{extend_family, family_records, find_violation, verify_coherent, CoherentOptions, ExtendOptions, FamilyFile};
use crate::error::{Error, Result};
use crate::groupoid::{hamiltonian_checks, kp_check, verify_groupoid, verify_star, GroupoidData, KahlerPoissonTensor, VerifyOptions};
use crate::poisson::{jacobi_violation, PoissonTensor};
use crate::report::{CheckRecord, Status};

/// Degree bound of the seeded random polynomials used by every command.
const RANDOM_DEGREE: u32 = 3;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Component {
    pub degree: u32,
    pub value: String,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub skipped: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub config: ChartConfig,
    /// `F` by fiber degree, from 2 up to the fiber truncation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hamiltonian: Option<Vec<Component>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyFile>,
    pub summary: Summary,
    pub checks: Vec<CheckRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<u64>,
}

impl Report {
    fn new(command: &str, config: &ChartConfig, mut checks: Vec<CheckRecord>) -> Self {
        checks.sort_by(|a, b| a.name.cmp(&b.name));
        let mut summary = Summary::default();
        for c in &checks {
            match c.status {
                Status::Pass => summary.pass += 1,
                Status::Fail => summary.fail += 1,
                Status::Skipped => summary.skipped += 1,
            }
        }
        Report {
            command: command.into(),
            config: config.clone(),
            hamiltonian: None,
            family: None,
            summary,
            checks,
            wall_time_ms: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.summary.fail == 0
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn check(&self, name: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn verify_options(config: &ChartConfig) -> VerifyOptions {
    VerifyOptions {
        basis_degree: config.basis_degree,
        trials: config.trials,
        random_degree: RANDOM_DEGREE,
        seed: config.rng_seed,
    }
}

/// The Kähler-Poisson record, and the validated tensor when it passes.
fn kp_record(config: &ChartConfig) -> Result<(CheckRecord, Option<KahlerPoissonTensor>)> {
    match kp_check(config.tensor_entries()?) {
        Ok(t) => Ok((CheckRecord::pass("kp.conditions", "conditions 1 and 2"), Some(t))),
        Err(Error::KahlerPoisson {
            condition,
            indices,
            residual,
        }) => Ok((
            CheckRecord::fail("kp.conditions", residual, format!("condition {condition} at ({indices})")),
            None,
        )),
        Err(e) => Err(Error::Config(e.to_string())),
    }
}

fn jacobi_record(tensor: &PoissonTensor) -> CheckRecord {
    let space = tensor.space();
    match jacobi_violation(tensor) {
        None => CheckRecord::pass("poisson.jacobi", "all coordinate triples"),
        Some(([i, j, k], r)) => CheckRecord::fail(
            "poisson.jacobi",
            r.to_string(),
            format!("({}, {}, {})", space.var_name(i), space.var_name(j), space.var_name(k)),
        ),
    }
}

fn real_tensor(config: &ChartConfig) -> Result<PoissonTensor> {
    PoissonTensor::real(config.tensor_entries()?).map_err(|e| Error::Config(e.to_string()))
}

pub fn cmd_kp_check(config: &ChartConfig) -> Result<Report> {
    let record = match config.flavor {
        FlavorName::Complex => kp_record(config)?.0,
        FlavorName::Real => jacobi_record(&real_tensor(config)?),
    };
    Ok(Report::new("kp-check", config, vec![record]))
}

/// Validate the tensor and assemble the groupoid; on failure the records explain why.
fn assemble(config: &ChartConfig) -> Result<std::result::Result<GroupoidData, Vec<CheckRecord>>> {
    config.require_groupoid()?;
    let (kp, tensor) = kp_record(config)?;
    let Some(tensor) = tensor else {
        return Ok(Err(vec![kp]));
    };
    match GroupoidData::assemble(tensor, config.chart()) {
        Ok(g) => Ok(Ok(g)),
        Err(e) => Ok(Err(vec![kp, CheckRecord::fail("groupoid.solve_f", e.to_string(), "fiber-degree recursion")])),
    }
}

pub fn cmd_solve_f(config: &ChartConfig) -> Result<Report> {
    let g = match assemble(config)? {
        Ok(g) => g,
        Err(records) => return Ok(Report::new("solve-f", config, records)),
    };
    let mut records = vec![kp_record(config)?.0];
    records.extend(hamiltonian_checks(&g, &verify_options(config)));
    let mut report = Report::new("solve-f", config, records);
    let f = g.hamiltonian();
    report.hamiltonian = Some(
        (2..=config.fiber_truncation)
            .map(|k| Component {
                degree: k,
                value: f.fiber_component(k).to_string(),
            })
            .collect(),
    );
    Ok(report)
}

pub fn cmd_verify(config: &ChartConfig) -> Result<Report> {
    let g = match assemble(config)? {
        Ok(g) => g,
        Err(records) => return Ok(Report::new("verify", config, records)),
    };
    let opts = verify_options(config);
    let mut records = vec![kp_record(config)?.0];
    records.extend(verify_groupoid(&g, &opts));
    records.extend(verify_star(&g, &opts));
    records.extend(verify_coherent(
        &g,
        &CoherentOptions {
            trials: config.trials,
            seed: config.rng_seed,
            ..Default::default()
        },
    ));
    Ok(Report::new("verify", config, records))
}

pub fn cmd_extend_family(config: &ChartConfig, family_json: &str) -> Result<Report> {
    if config.flavor != FlavorName::Real {
        return Err(Error::Config("extend-family needs a real chart".into()));
    }
    let tensor = real_tensor(config)?;
    let file: FamilyFile =
        serde_json::from_str(family_json).map_err(|e| Error::Config(format!("family file: {e}")))?;
    let fam = file
        .to_family(tensor.clone())
        .map_err(|e| Error::Config(format!("family file: {e}")))?;
    let mut records = vec![jacobi_record(&tensor)];
    if let Some(v) = find_violation(&fam) {
        records.push(CheckRecord::fail("family.input_coherence", v.residual.to_string(), v.to_string()));
        return Ok(Report::new("extend-family", config, records));
    }
    records.push(CheckRecord::pass(
        "family.input_coherence",
        format!("C0..C{} exact tables", fam.len().saturating_sub(1)),
    ));
    let ext = match extend_family(&fam, &ExtendOptions::default()) {
        Ok(ext) => ext,
        Err(e) => {
            records.push(CheckRecord::fail("family.extension", e.to_string(), "extension step"));
            return Ok(Report::new("extend-family", config, records));
        }
    };
    records.push(CheckRecord::pass("family.extension", format!("C{} appended", fam.len())));
    let eval = |k: usize, args: &[crate::algebra::Polynomial]| Ok(ext.eval(k, args));
    records.extend(family_records(
        "family.extended",
        ext.len(),
        &eval,
        &tensor,
        config.trials,
        RANDOM_DEGREE,
        config.rng_seed,
    ));
    let mut report = Report::new("extend-family", config, records);
    report.family = Some(FamilyFile::from_family(&ext));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curved() -> ChartConfig {
        let mut c = ChartConfig::flat(1);
        c.tensor[0][0] = "1 + z1*w1".into();
        c.nu_truncation = 0;
        c.trials = 3;
        c
    }

    #[test]
    fn kp_check_flat_curved_and_violator() {
        assert!(cmd_kp_check(&ChartConfig::flat(1)).unwrap().passed());
        assert!(cmd_kp_check(&curved()).unwrap().passed());
        let mut bad = ChartConfig::flat(2);
        bad.tensor = vec![vec!["z2".into(), "0".into()], vec!["0".into(), "1".into()]];
        let r = cmd_kp_check(&bad).unwrap();
        assert_eq!(r.exit_code(), 1);
        let rec = r.check("kp.conditions").unwrap();
        assert_eq!(rec.residual, "1");
        assert_eq!(rec.witness, "condition 1 at (l=1, n=2, m=1)");
    }

    #[test]
    fn solve_f_flat_components() {
        let mut c = ChartConfig::flat(1);
        c.nu_truncation = 0;
        let r = cmd_solve_f(&c).unwrap();
        assert!(r.passed(), "{r:#?}");
        let h = r.hamiltonian.unwrap();
        assert_eq!(h[0], Component { degree: 2, value: "zeta1*zetab1".into() });
        assert!(h[1..].iter().all(|c| c.value == "0"));
    }

    #[test]
    fn solve_f_curved_has_no_odd_part() {
        let r = cmd_solve_f(&curved()).unwrap();
        assert!(r.passed(), "{r:#?}");
        let h = r.hamiltonian.unwrap();
        assert_eq!(h[0].value, "(1 + z1*w1)*zeta1*zetab1");
        assert_eq!(h[1].value, "0");
        assert_ne!(h[2].value, "0");
    }

    #[test]
    fn groupoid_commands_reject_real_charts() {
        let mut c = ChartConfig::flat(2);
        c.flavor = FlavorName::Real;
        c.tensor = vec![vec!["0".into(), "1".into()], vec!["-1".into(), "0".into()]];
        assert!(matches!(cmd_solve_f(&c), Err(Error::Config(_))));
        assert!(cmd_kp_check(&c).unwrap().passed());
        assert!(matches!(cmd_extend_family(&ChartConfig::flat(1), "{}"), Err(Error::Config(_))));
    }

    #[test]
    fn reports_are_sorted_by_name() {
        let r = cmd_solve_f(&curved()).unwrap();
        let names: Vec<_> = r.checks.iter().map(|c| c.name.clone()).collect();
        let mut sorted = names.clone();
        sorted.sort();
        assert_eq!(names, sorted);
        assert_eq!(Report::new("x", &curved(), Vec::new()).to_json(), Report::new("x", &curved(), Vec::new()).to_json());
    }
}
