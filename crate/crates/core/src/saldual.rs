//! ρ-sweeps, empirical threshold bisection, penalty certificates, dual
//! ascent on λ, and the squared-ℓ2 asymptotic experiment.

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactnum::{int, rat, serde_rat, ExtValue, Rational};
use crate::mipsolve::{solve_alr, solve_mip, solve_salr, Augmenting, MipStatus};
use crate::model::{check_recession_condition, ObjectiveKind, ProblemInstance};
use crate::penalty::{
    micp_constants, milp_constants, miqp_threshold, picp_rho, MicpConstants, MilpConstants, MiqpThreshold,
    PicpConstants, Quantity,
};
use crate::ratlinalg::Norm;
use crate::valuefn::{box_grid, build_grid, continuous_relaxation, salr_oracle, Fidelity, Relaxation, UGrid};
use crate::Settings;

/// Grid used when `z_SALR` has no exact reformulation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleGrid {
    #[serde(with = "serde_rat")]
    pub radius: Rational,
    #[serde(with = "serde_rat")]
    pub pitch: Rational,
}

impl Default for OracleGrid {
    fn default() -> Self {
        OracleGrid {
            radius: int(1),
            pitch: rat(1, 8),
        }
    }
}

/// `z_IP`, or an error when the instance has no finite optimum.
pub fn z_ip(inst: &ProblemInstance, settings: &Settings) -> Result<ExtValue> {
    let sol = solve_mip(inst, settings)?;
    match sol.status {
        MipStatus::Optimal => Ok(sol.z),
        MipStatus::Infeasible => Err(Error::Infeasible(format!("{} has no integer-feasible point", inst.name))),
        MipStatus::Unbounded => Err(Error::Unsupported(format!("{} is unbounded below", inst.name))),
    }
}

fn exact_route(inst: &ProblemInstance, norm: Norm) -> bool {
    inst.kind() != ObjectiveKind::SmoothOracle && norm != Norm::L2
}

/// Evaluates `z_SALR(ρ)` exactly when possible, otherwise on a grid.
pub struct SalrEvaluator<'a> {
    inst: &'a ProblemInstance,
    norm: Norm,
    grid: Option<UGrid>,
    settings: &'a Settings,
}

impl<'a> SalrEvaluator<'a> {
    pub fn new(inst: &'a ProblemInstance, norm: Norm, oracle: &OracleGrid, settings: &'a Settings) -> Result<Self> {
        let grid = if exact_route(inst, norm) {
            None
        } else {
            Some(match box_grid(inst, norm, settings) {
                Ok(g) => g,
                Err(_) => build_grid(inst, &oracle.radius, Some(&oracle.pitch), norm, settings)?,
            })
        };
        Ok(SalrEvaluator { inst, norm, grid, settings })
    }

    pub fn eval(&self, rho: &Rational) -> Result<(ExtValue, Fidelity)> {
        match &self.grid {
            None => Ok((solve_salr(self.inst, rho, self.norm, self.settings)?.z, Fidelity::Exact)),
            Some(g) => {
                let v = salr_oracle(self.inst, rho, self.norm, g, self.settings)?;
                Ok((v.value, v.fidelity))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    #[serde(with = "serde_rat")]
    pub rho: Rational,
    pub z_salr: ExtValue,
    pub gap: ExtValue,
    pub norm: Norm,
    pub fidelity: Fidelity,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sweep {
    pub z_ip: ExtValue,
    pub records: Vec<SweepRecord>,
}

fn check_schedule(schedule: &[Rational]) -> Result<()> {
    if schedule.is_empty() {
        return Err(Error::arg("empty rho schedule"));
    }
    if !schedule[0].is_positive() {
        return Err(Error::arg(format!("rho = {} must be positive", schedule[0])));
    }
    if let Some(w) = schedule.windows(2).find(|w| w[0] >= w[1]) {
        return Err(Error::arg(format!("schedule must increase strictly ({} then {})", w[0], w[1])));
    }
    Ok(())
}

/// `ρ₀, ρ₀r, ρ₀r², …` with `count` terms.
pub fn geometric_schedule(start: &Rational, ratio: &Rational, count: usize) -> Vec<Rational> {
    std::iter::successors(Some(start.clone()), |r| Some(r * ratio)).take(count).collect()
}

/// `z_SALR(ρ)` and the gap at every scheduled ρ.
pub fn rho_sweep(inst: &ProblemInstance, schedule: &[Rational], norm: Norm, oracle: &OracleGrid, settings: &Settings) -> Result<Sweep> {
    check_schedule(schedule)?;
    let z = z_ip(inst, settings)?;
    let ev = SalrEvaluator::new(inst, norm, oracle, settings)?;
    let records = schedule
        .par_iter()
        .map(|rho| {
            let (z_salr, fidelity) = ev.eval(rho)?;
            Ok(SweepRecord {
                rho: rho.clone(),
                gap: z.minus(&z_salr),
                z_salr,
                norm,
                fidelity,
            })
        })
        .collect::<Vec<Result<_>>>()
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(Sweep { z_ip: z, records })
}

/// Allowance on approximate gaps.
fn slack_for(fidelity: Fidelity, settings: &Settings) -> f64 {
    match fidelity {
        Fidelity::Exact => 0.0,
        Fidelity::Approximate => 2.0 * settings.tol,
    }
}

/// Zero-gap test: rational equality, or `|gap| <= 2·tol` when approximate.
pub fn is_closed(gap: &ExtValue, fidelity: Fidelity, settings: &Settings) -> bool {
    match gap {
        ExtValue::Exact(g) if fidelity == Fidelity::Exact => g.is_zero(),
        g if g.is_finite() => g.to_f64().abs() <= slack_for(fidelity, settings).max(2.0 * settings.tol),
        _ => false,
    }
}

/// Violations of `gap >= 0` and of monotonicity in ρ.
pub fn sweep_violations(sweep: &Sweep, settings: &Settings) -> Vec<String> {
    let mut out = vec![];
    let zero = ExtValue::Exact(Rational::zero());
    for r in &sweep.records {
        let s = slack_for(r.fidelity, settings);
        let neg = match &r.gap {
            ExtValue::Exact(g) => g.is_negative(),
            g => g < &zero && g.to_f64() < -s,
        };
        if neg {
            out.push(format!("negative gap {} at rho = {}", r.gap, r.rho));
        }
    }
    for w in sweep.records.windows(2) {
        let s = slack_for(w[0].fidelity, settings).max(slack_for(w[1].fidelity, settings));
        let up = match (&w[0].gap, &w[1].gap) {
            (ExtValue::Exact(a), ExtValue::Exact(b)) => b > a,
            (a, b) => b > a && (b.to_f64() - a.to_f64()) > s,
        };
        if up {
            out.push(format!("gap rises from {} to {} between rho = {} and {}", w[0].gap, w[1].gap, w[0].rho, w[1].rho));
        }
    }
    out
}

pub fn sweep_csv(sweep: &Sweep) -> Result<String> {
    let mut w = csv::Writer::from_writer(vec![]);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(["rho", "z_salr", "gap", "norm", "fidelity"]).map_err(io)?;
    for r in &sweep.records {
        let fid = match r.fidelity {
            Fidelity::Exact => "exact",
            Fidelity::Approximate => "approximate",
        };
        w.write_record([r.rho.to_string(), r.z_salr.to_string(), r.gap.to_string(), r.norm.name().to_string(), fid.into()])
            .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bracket {
    #[serde(with = "serde_rat")]
    pub lo: Rational,
    #[serde(with = "serde_rat")]
    pub hi: Rational,
    pub evaluations: usize,
}

/// Bisection for the least gap-closing ρ in `(0, ρ_hi]`. The gap is
/// nonincreasing in ρ, so the closing set is an interval `[ρ_emp, ∞)`.
pub fn bisect_threshold(
    inst: &ProblemInstance,
    rho_hi: &Rational,
    tol: &Rational,
    norm: Norm,
    oracle: &OracleGrid,
    settings: &Settings,
) -> Result<Bracket> {
    if !tol.is_positive() {
        return Err(Error::arg(format!("bisection tolerance {tol} must be positive")));
    }
    if !rho_hi.is_positive() {
        return Err(Error::arg(format!("rho = {rho_hi} must be positive")));
    }
    let z = z_ip(inst, settings)?;
    let ev = SalrEvaluator::new(inst, norm, oracle, settings)?;
    let closed_at = |rho: &Rational| -> Result<bool> {
        let (v, fid) = ev.eval(rho)?;
        Ok(is_closed(&z.minus(&v), fid, settings))
    };
    if !closed_at(rho_hi)? {
        return Err(Error::Precondition(format!("the gap is not closed at rho = {rho_hi}")));
    }
    let mut lo = Rational::zero();
    let mut hi = rho_hi.clone();
    let mut evaluations = 1;
    while &hi - &lo > *tol {
        let mid = (&lo + &hi) / int(2);
        evaluations += 1;
        if closed_at(&mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Bracket { lo, hi, evaluations })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AscentStep {
    pub k: usize,
    #[serde(with = "serde_rat::vec")]
    pub lambda: Vec<Rational>,
    pub value: ExtValue,
    /// `b − Ax*` at the inner minimizer.
    #[serde(with = "serde_rat::vec")]
    pub subgradient: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AscentTrace {
    pub z_ip: ExtValue,
    pub psi: String,
    #[serde(with = "serde_rat")]
    pub rho: Rational,
    pub steps: Vec<AscentStep>,
    pub best: ExtValue,
    #[serde(with = "serde_rat::vec")]
    pub best_lambda: Vec<Rational>,
}

/// Subgradient ascent on `λ ↦ z_ρ^{LR+}(λ)` from `λ₀ = 0` with steps
/// `a/(k+1)`. A heuristic for the sup; every iterate is checked against
/// weak duality.
pub fn ald_ascent(
    inst: &ProblemInstance,
    rho: &Rational,
    psi: Augmenting,
    steps: usize,
    a: &Rational,
    settings: &Settings,
) -> Result<AscentTrace> {
    if !rho.is_positive() {
        return Err(Error::arg(format!("rho = {rho} must be positive")));
    }
    if !a.is_positive() {
        return Err(Error::arg(format!("step size {a} must be positive")));
    }
    let z = z_ip(inst, settings)?;
    let mut lambda = vec![Rational::zero(); inst.m()];
    let mut trace = vec![];
    let mut best = ExtValue::NegInf;
    let mut best_lambda = lambda.clone();
    for k in 0..steps.max(1) {
        let sol = solve_alr(inst, &lambda, rho, psi, settings)?;
        if sol.z > z {
            return Err(Error::Precondition(format!(
                "weak duality fails at step {k}: {} > z_IP = {z}",
                sol.z
            )));
        }
        let ax = inst.a.mul_vec(&sol.x);
        let g: Vec<Rational> = inst.b.iter().zip(&ax).map(|(b, v)| b - v).collect();
        if sol.z > best {
            best = sol.z.clone();
            best_lambda = lambda.clone();
        }
        let step = a / int(k as i64 + 1);
        let next: Vec<Rational> = lambda.iter().zip(&g).map(|(l, gi)| l + &step * gi).collect();
        trace.push(AscentStep {
            k,
            lambda: std::mem::replace(&mut lambda, next),
            value: sol.z,
            subgradient: g,
        });
    }
    Ok(AscentTrace {
        z_ip: z,
        psi: psi.name(),
        rho: rho.clone(),
        steps: trace,
        best,
        best_lambda,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticRecord {
    #[serde(with = "serde_rat")]
    pub rho: Rational,
    pub z: ExtValue,
    pub gap: ExtValue,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticTrace {
    pub z_ip: ExtValue,
    pub psi: String,
    pub records: Vec<AsymptoticRecord>,
    /// `None` for a single-point schedule.
    pub monotone: Option<bool>,
}

/// Gap trace of the squared-ℓ2 augmented relaxation at `λ = 0` along an
/// increasing schedule. Convergence to 0 is expected; finite closure is not.
pub fn asymptotic_experiment(inst: &ProblemInstance, schedule: &[Rational], settings: &Settings) -> Result<AsymptoticTrace> {
    check_schedule(schedule)?;
    if inst.m_bound.is_none() {
        let rec = check_recession_condition(inst)?;
        if !rec.holds {
            return Err(Error::HypothesisViolated(format!(
                "no box and the recession condition fails: {}",
                rec.reason
            )));
        }
    }
    let z = z_ip(inst, settings)?;
    let zero = vec![Rational::zero(); inst.m()];
    let records = schedule
        .par_iter()
        .map(|rho| {
            let v = solve_alr(inst, &zero, rho, Augmenting::SquaredL2, settings)?.z;
            Ok(AsymptoticRecord {
                rho: rho.clone(),
                gap: z.minus(&v),
                z: v,
            })
        })
        .collect::<Vec<Result<_>>>()
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let monotone = (records.len() > 1).then(|| records.windows(2).all(|w| w[1].gap <= w[0].gap));
    Ok(AsymptoticTrace {
        z_ip: z,
        psi: Augmenting::SquaredL2.name(),
        records,
        monotone,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Class {
    #[serde(rename = "MILP")]
    Milp,
    #[serde(rename = "MIQP")]
    Miqp,
    #[serde(rename = "PICP")]
    Picp,
    /// Convex objective with a given box.
    #[serde(rename = "MICP-a")]
    MicpA,
    /// Convex objective under the recession condition.
    #[serde(rename = "MICP-b")]
    MicpB,
}

impl Class {
    pub fn parse(s: &str) -> Result<Class> {
        match s.to_ascii_lowercase().as_str() {
            "milp" => Ok(Class::Milp),
            "miqp" => Ok(Class::Miqp),
            "picp" => Ok(Class::Picp),
            "micp-a" => Ok(Class::MicpA),
            "micp-b" => Ok(Class::MicpB),
            _ => Err(Error::arg(format!("unknown class {s:?}"))),
        }
    }

    /// Default class: pure-integer, then by objective kind.
    pub fn of(inst: &ProblemInstance) -> Class {
        if inst.is_pure_integer() {
            return Class::Picp;
        }
        match (inst.kind(), inst.m_bound.is_some()) {
            (ObjectiveKind::Linear, _) => Class::Milp,
            (ObjectiveKind::Quadratic, true) => Class::Miqp,
            (_, true) => Class::MicpA,
            (_, false) => Class::MicpB,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "class_constants", rename_all = "kebab-case")]
pub enum Constants {
    Milp(MilpConstants),
    Picp(PicpConstants),
    Miqp(MiqpThreshold),
    Micp(MicpConstants),
}

impl Constants {
    pub fn rho_star(&self) -> &Rational {
        match self {
            Constants::Milp(c) => &c.rho_star,
            Constants::Picp(c) => &c.rho_star,
            Constants::Miqp(c) => &c.rho_star,
            Constants::Micp(c) => &c.rho_star,
        }
    }

    pub fn quantities(&self) -> Vec<Quantity> {
        match self {
            Constants::Milp(c) => c.quantities(),
            Constants::Picp(c) => c.quantities(),
            Constants::Miqp(c) => c.quantities(),
            Constants::Micp(c) => c.quantities(),
        }
    }
}

/// The threshold of `class` for `inst`.
pub fn compute_constants(
    inst: &ProblemInstance,
    class: Class,
    relax: &Relaxation,
    norm: Norm,
    pitch: &Rational,
    settings: &Settings,
) -> Result<Constants> {
    let z = z_ip(inst, settings)?;
    let zr = match &z {
        ExtValue::Exact(r) => Some(r.clone()),
        _ => None,
    };
    let need_exact = || zr.clone().ok_or_else(|| Error::Unsupported("this class needs an exact z_IP".into()));
    Ok(match class {
        Class::Milp => Constants::Milp(milp_constants(inst, relax, &need_exact()?, norm, settings)?),
        Class::Picp => Constants::Picp(picp_rho(inst, &need_exact()?, relax, norm, settings)?),
        Class::Miqp => Constants::Miqp(miqp_threshold(inst, relax, norm, pitch, settings)?),
        Class::MicpA | Class::MicpB => Constants::Micp(micp_constants(inst, relax, norm, pitch, settings)?),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Closed,
    NotClosedAtCap,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PenaltyCertificate {
    pub instance: String,
    pub class: Class,
    pub norm: Norm,
    pub z_ip: ExtValue,
    pub z_r: ExtValue,
    #[serde(with = "serde_rat")]
    pub rho_star: Rational,
    pub quantities: Vec<Quantity>,
    pub constants: Constants,
    /// The ρ at which closure was tested, `ρ*(1 + 1/100)` (or 1/100 when `ρ* = 0`).
    #[serde(with = "serde_rat")]
    pub certified_rho: Rational,
    pub gap_at_certified: ExtValue,
    pub fidelity: Fidelity,
    pub rho_emp: Option<Bracket>,
    /// `ρ_emp <= ρ*`, when both exist.
    pub emp_below_star: Option<bool>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertifyOptions {
    pub class: Option<Class>,
    #[serde(with = "serde_rat")]
    pub pitch: Rational,
    pub oracle: OracleGrid,
    /// Bisection width relative to the certified ρ.
    pub bisect_steps: u32,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            class: None,
            pitch: rat(1, 8),
            oracle: OracleGrid::default(),
            bisect_steps: 10,
        }
    }
}

/// Computes ρ*, tests closure just above it and brackets the empirical
/// threshold below it.
pub fn certify(inst: &ProblemInstance, norm: Norm, opts: &CertifyOptions, settings: &Settings) -> Result<PenaltyCertificate> {
    let class = opts.class.unwrap_or_else(|| Class::of(inst));
    let relax = continuous_relaxation(inst, settings)?;
    let constants = compute_constants(inst, class, &relax, norm, &opts.pitch, settings)?;
    let rho_star = constants.rho_star().clone();
    let certified_rho = if rho_star.is_positive() {
        &rho_star * rat(101, 100)
    } else {
        rat(1, 100)
    };
    let z = z_ip(inst, settings)?;
    let ev = SalrEvaluator::new(inst, norm, &opts.oracle, settings)?;
    let (v, fidelity) = ev.eval(&certified_rho)?;
    let gap = z.minus(&v);
    let closed = is_closed(&gap, fidelity, settings);
    let rho_emp = if closed {
        let tol = &certified_rho / Rational::from_integer(num_bigint::BigInt::one() << opts.bisect_steps);
        Some(bisect_threshold(inst, &certified_rho, &tol, norm, &opts.oracle, settings)?)
    } else {
        None
    };
    let emp_below_star = rho_emp.as_ref().map(|b| b.lo <= rho_star);
    Ok(PenaltyCertificate {
        instance: inst.name.clone(),
        class,
        norm,
        z_ip: z,
        z_r: relax.z.clone(),
        quantities: constants.quantities(),
        rho_star,
        constants,
        certified_rho,
        gap_at_certified: gap,
        fidelity,
        rho_emp,
        emp_below_star,
        verdict: if closed { Verdict::Closed } else { Verdict::NotClosedAtCap },
    })
}
