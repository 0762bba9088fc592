//! The embedded corpus suite: sweeps every corpus instance, checks weak
//! duality and monotonicity, and certifies the pure-integer and MILP
//! thresholds. The report is a deterministic function of the seed.

use rayon::prelude::*;
use serde::Serialize;

use crate::corpus;
use crate::error::Result;
use crate::exactnum::{int, rat, serde_rat, ExtValue, Rational};
use crate::model::ProblemInstance;
use crate::ratlinalg::Norm;
use crate::saldual::{certify, rho_sweep, sweep_violations, CertifyOptions, Class, OracleGrid, Sweep, Verdict};
use crate::Settings;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceReport {
    pub instance: String,
    pub class: Class,
    pub z_ip: ExtValue,
    pub sweep: Sweep,
    pub violations: Vec<String>,
    #[serde(with = "serde_rat::option")]
    pub rho_star: Option<Rational>,
    pub verdict: Option<Verdict>,
    /// Set when a certificate was attempted and failed.
    pub error: Option<String>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub instances: Vec<InstanceReport>,
    pub passed: bool,
}

/// The named instances plus seeded draws from each random family.
pub fn corpus_for(seed: u64) -> Vec<ProblemInstance> {
    let mut out = corpus::named();
    out.extend((0..4).map(|k| corpus::random_pure_integer(seed + k)));
    out.extend((0..3).map(|k| corpus::random_picp(seed + k)));
    out.extend((0..3).map(|k| corpus::random_milp(seed + k)));
    out.extend((0..2).map(|k| corpus::random_miqp(seed + k)));
    out
}

pub fn schedule() -> Vec<Rational> {
    vec![rat(1, 4), rat(1, 2), int(1), int(2), int(4), int(8)]
}

fn run_one(inst: &ProblemInstance, settings: &Settings) -> Result<InstanceReport> {
    let class = Class::of(inst);
    let sweep = rho_sweep(inst, &schedule(), Norm::L1, &OracleGrid::default(), settings)?;
    let violations = sweep_violations(&sweep, settings);
    let mut report = InstanceReport {
        instance: inst.name.clone(),
        class,
        z_ip: sweep.z_ip.clone(),
        sweep,
        violations,
        rho_star: None,
        verdict: None,
        error: None,
        passed: false,
    };
    // a closure claim is checked only where it is proven
    let proven = matches!(class, Class::Picp);
    if matches!(class, Class::Picp | Class::Milp) {
        match certify(inst, Norm::L1, &CertifyOptions::default(), settings) {
            Ok(c) => {
                report.rho_star = Some(c.rho_star);
                report.verdict = Some(c.verdict);
            }
            Err(e) => report.error = Some(e.to_string()),
        }
    }
    report.passed = report.violations.is_empty()
        && (!proven || (report.error.is_none() && report.verdict == Some(Verdict::Closed)));
    Ok(report)
}

pub fn run(seed: u64, settings: &Settings) -> Result<SelftestReport> {
    let instances = corpus_for(seed)
        .par_iter()
        .map(|inst| run_one(inst, settings))
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let passed = instances.iter().all(|r| r.passed);
    Ok(SelftestReport { seed, instances, passed })
}
