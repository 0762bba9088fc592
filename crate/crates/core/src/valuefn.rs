//! The value function `φ(u) = min{f(x) : x ∈ X, Ax = b + u}`, its restricted
//! pieces `Φ(u, x_I)`, grids over U, and the brute-force SALR oracle.

use std::collections::BTreeMap;

use itertools::Itertools;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::cvxsub::{solve_qp, solve_smooth, QpStatus, QuadraticProgram};
use crate::error::{Error, Result};
use crate::exactnum::{denom, from_f64, lcm_list, serde_rat, ExtValue, Int, Rational};
use crate::lpsolve::{solve_relaxation, LpStatus};
use crate::mipsolve::{enumerate_integer_points, restricted_table, solve_mip, MipStatus};
use crate::model::{ObjectiveKind, ProblemInstance};
use crate::ratlinalg::Norm;
use crate::Settings;

/// `Φ(u, x_I)` for one integer point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RestrictedValue {
    #[serde(serialize_with = "ser_ints")]
    pub x_i: Vec<Int>,
    pub phi: ExtValue,
}

fn ser_ints<S: serde::Serializer>(v: &[Int], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|i| i.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValueSample {
    #[serde(with = "serde_rat::vec")]
    pub u: Vec<Rational>,
    /// `+inf` when `X ∩ H_u` is empty.
    pub phi: ExtValue,
    pub feasible: bool,
    #[serde(with = "serde_rat::vec")]
    pub argmin: Vec<Rational>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub restricted: Vec<RestrictedValue>,
}

impl ValueSample {
    fn infeasible(u: Vec<Rational>) -> Self {
        ValueSample {
            u,
            phi: ExtValue::PosInf,
            feasible: false,
            argmin: vec![],
            restricted: vec![],
        }
    }
}

/// `φ(u)` by solving the perturbed instance. Nonlinear objectives with a
/// box go through the restricted table, which is cheaper than
/// branch-and-bound on active-set relaxations.
pub fn phi(inst: &ProblemInstance, u: &[Rational], settings: &Settings) -> Result<ValueSample> {
    check_u(inst, u)?;
    if inst.kind() != ObjectiveKind::Linear && inst.m_bound.is_some() {
        let mut s = phi_restricted(inst, u, settings)?;
        s.restricted.clear();
        return Ok(s);
    }
    let sol = solve_mip(&inst.perturbed(u), settings)?;
    Ok(match sol.status {
        MipStatus::Infeasible => ValueSample::infeasible(u.to_vec()),
        MipStatus::Unbounded => ValueSample {
            u: u.to_vec(),
            phi: ExtValue::NegInf,
            feasible: true,
            argmin: vec![],
            restricted: vec![],
        },
        MipStatus::Optimal => ValueSample {
            u: u.to_vec(),
            phi: sol.z,
            feasible: true,
            argmin: sol.x,
            restricted: vec![],
        },
    })
}

/// `φ(u)` as the minimum of `Φ(u, x_I)` over the integer box; needs M.
pub fn phi_restricted(inst: &ProblemInstance, u: &[Rational], settings: &Settings) -> Result<ValueSample> {
    check_u(inst, u)?;
    let table = restricted_table(&inst.perturbed(u), settings)?;
    let mut out = ValueSample::infeasible(u.to_vec());
    for r in &table {
        if r.z < out.phi {
            out.phi = r.z.clone();
            out.argmin = r.x.clone();
        }
    }
    out.feasible = out.phi != ExtValue::PosInf;
    out.restricted = table
        .into_iter()
        .map(|r| RestrictedValue { x_i: r.x_i, phi: r.z })
        .collect();
    Ok(out)
}

fn check_u(inst: &ProblemInstance, u: &[Rational]) -> Result<()> {
    if u.len() != inst.m() {
        return Err(Error::arg(format!(
            "u has {} entries, instance has {} equality rows",
            u.len(),
            inst.m()
        )));
    }
    Ok(())
}

/// The continuous relaxation with its equality multipliers, for every
/// objective kind.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Relaxation {
    pub z: ExtValue,
    #[serde(with = "serde_rat::vec")]
    pub x: Vec<Rational>,
    #[serde(with = "serde_rat::vec")]
    pub lambda_a: Vec<Rational>,
    #[serde(with = "serde_rat::vec")]
    pub lambda_e: Vec<Rational>,
}

pub fn continuous_relaxation(inst: &ProblemInstance, settings: &Settings) -> Result<Relaxation> {
    let unbounded = || Relaxation {
        z: ExtValue::NegInf,
        x: vec![],
        lambda_a: vec![],
        lambda_e: vec![],
    };
    let infeasible = || Error::Infeasible(format!("continuous relaxation of {} is empty", inst.name));
    match inst.kind() {
        ObjectiveKind::Linear => {
            let s = solve_relaxation(inst)?;
            match s.status {
                LpStatus::Infeasible => Err(infeasible()),
                LpStatus::Unbounded => Ok(unbounded()),
                LpStatus::Optimal => Ok(Relaxation {
                    z: ExtValue::Exact(s.z),
                    x: s.x,
                    lambda_a: s.lambda_a,
                    lambda_e: s.lambda_e,
                }),
            }
        }
        ObjectiveKind::Quadratic => {
            let lp = inst.relaxation_lp();
            let qp = QuadraticProgram {
                q: inst.objective.q_or_zero(),
                c: lp.c,
                a_eq: lp.a_eq,
                b_eq: lp.b_eq,
                a_in: lp.a_in,
                b_in: lp.b_in,
            };
            let s = solve_qp(&qp, settings.caps.active_set_cap)?;
            match (s.status, s.kkt) {
                (QpStatus::Infeasible, _) => Err(infeasible()),
                (QpStatus::Optimal, Some(k)) => Ok(Relaxation {
                    z: ExtValue::Exact(s.z + &inst.objective.offset),
                    x: k.x,
                    lambda_a: k.lambda_a,
                    lambda_e: k.lambda_e,
                }),
                _ => Ok(unbounded()),
            }
        }
        ObjectiveKind::SmoothOracle => {
            let (e, f) = inst.inequality_system();
            let s = match solve_smooth(
                &inst.objective,
                &inst.a,
                &inst.b,
                &e,
                &f,
                settings.tol,
                settings.caps.iter_cap,
                settings.caps.active_set_cap,
            ) {
                Err(Error::Infeasible(_)) => return Err(infeasible()),
                other => other?,
            };
            Ok(Relaxation {
                z: ExtValue::Approx(s.z),
                x: s.x_exact,
                lambda_a: s.lambda_a.iter().map(|&v| from_f64(v)).collect(),
                lambda_e: s.lambda_e.iter().map(|&v| from_f64(v)).collect(),
            })
        }
    }
}

/// `(z_IP − z_R)/(ρ − ‖λ_A‖*)`, the radius outside which no `u` can beat
/// `φ(0)` in the SALR. Rounded up when the dual norm is ℓ2.
pub fn u_radius(
    z_ip: &Rational,
    z_r: &Rational,
    lambda_a: &[Rational],
    rho: &Rational,
    norm: Norm,
    slack: &Rational,
) -> Result<Rational> {
    let dual = norm.dual().upper(lambda_a, slack);
    if rho <= &dual {
        return Err(Error::InvalidRho {
            rho: rho.to_string(),
            dual_norm: dual.to_string(),
        });
    }
    let gap = z_ip - z_r;
    if gap.is_negative() {
        return Err(Error::Precondition(format!("z_IP = {z_ip} is below z_R = {z_r}")));
    }
    Ok(gap / (rho - dual))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridMode {
    /// Every reachable `u` of a pure-integer instance inside the radius.
    ExactEnumeration,
    /// A uniform lattice of the given pitch inside the radius.
    LatticeGrid,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UGrid {
    pub mode: GridMode,
    pub norm: Norm,
    /// `None` when the grid is all of U.
    #[serde(with = "serde_rat::option")]
    pub radius: Option<Rational>,
    #[serde(with = "serde_rat")]
    pub spacing: Rational,
    pub samples: Vec<ValueSample>,
}

impl UGrid {
    pub fn covers_all_of_u(&self) -> bool {
        self.radius.is_none()
    }

    pub fn at_zero(&self) -> Option<&ValueSample> {
        self.samples.iter().find(|s| s.u.iter().all(Zero::is_zero))
    }

    pub fn feasible(&self) -> impl Iterator<Item = &ValueSample> {
        self.samples.iter().filter(|s| s.feasible)
    }

    /// Whether every feasible `u` with `‖u‖ <= r` is sampled.
    pub fn certifies_radius(&self, r: &Rational) -> bool {
        match (&self.radius, self.mode) {
            (None, _) => true,
            (Some(own), GridMode::ExactEnumeration) => r <= own,
            (Some(_), GridMode::LatticeGrid) => false,
        }
    }
}

/// The spacing of the lattice containing every `Ax − b` with integral x.
fn integer_lattice_spacing(inst: &ProblemInstance) -> Result<Rational> {
    let dens: Vec<Int> = inst
        .a
        .entries()
        .iter()
        .chain(&inst.b)
        .map(denom)
        .collect();
    let l = if dens.is_empty() { Int::from(1) } else { lcm_list(&dens)? };
    Ok(Rational::new(Int::from(1), l))
}

/// Multiples of `spacing` in `R^m` inside the closed `norm`-ball of radius `r`.
pub fn lattice_points(m: usize, spacing: &Rational, r: &Rational, norm: Norm, cap: u64) -> Result<Vec<Vec<Rational>>> {
    if !spacing.is_positive() {
        return Err(Error::arg(format!("pitch {spacing} must be positive")));
    }
    let k = (r / spacing).floor().to_integer();
    let k = k.to_i64().ok_or_else(|| Error::limit("lattice points", &k, cap))?;
    let count = (2 * k as u128 + 1).checked_pow(m as u32).unwrap_or(u128::MAX);
    if count > cap as u128 {
        return Err(Error::limit("lattice points", count, cap));
    }
    if m == 0 {
        return Ok(vec![vec![]]);
    }
    Ok((0..m)
        .map(|_| -k..=k)
        .multi_cartesian_product()
        .map(|p| p.into_iter().map(|v| spacing * Rational::from_integer(v.into())).collect::<Vec<_>>())
        .filter(|u| norm.le(u, r))
        .collect())
}

/// Samples `φ` on `N_δ(0)`: exact enumeration of the reachable lattice for
/// pure-integer instances, otherwise a lattice of the given pitch.
pub fn build_grid(
    inst: &ProblemInstance,
    delta: &Rational,
    pitch: Option<&Rational>,
    norm: Norm,
    settings: &Settings,
) -> Result<UGrid> {
    if !delta.is_positive() {
        return Err(Error::arg(format!("grid radius {delta} must be positive")));
    }
    let (mode, spacing) = if inst.is_pure_integer() {
        (GridMode::ExactEnumeration, integer_lattice_spacing(inst)?)
    } else {
        let p = pitch.ok_or_else(|| Error::arg("mixed instances need a grid pitch"))?;
        (GridMode::LatticeGrid, p.clone())
    };
    let points = lattice_points(inst.m(), &spacing, delta, norm, settings.caps.grid_cap)?;
    let samples = sample_all(inst, &points, settings)?;
    Ok(UGrid {
        mode,
        norm,
        radius: Some(delta.clone()),
        spacing,
        samples,
    })
}

/// [`phi`] at each point, concurrently, in input order.
pub fn sample_all(inst: &ProblemInstance, points: &[Vec<Rational>], settings: &Settings) -> Result<Vec<ValueSample>> {
    points
        .par_iter()
        .map(|u| phi(inst, u, settings))
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}

/// All of U for a bounded pure-integer instance with rational objective:
/// every box point satisfying `Ex <= f` yields `u = Ax − b`, and `φ(u)` is
/// the least objective among the points mapping to it.
pub fn box_grid(inst: &ProblemInstance, norm: Norm, settings: &Settings) -> Result<UGrid> {
    if !inst.is_pure_integer() {
        return Err(Error::Unsupported("box enumeration of U needs a pure-integer instance".into()));
    }
    if !inst.objective.is_rational() {
        return Err(Error::Unsupported("box enumeration of U needs a rational objective".into()));
    }
    let r = inst.require_bound("box enumeration of U")?;
    let points = enumerate_integer_points(inst.n(), &r, settings.caps.enum_cap)?;
    let (e, f) = inst.inequality_system();
    let mut table: BTreeMap<Vec<Rational>, (Rational, Vec<Rational>)> = BTreeMap::new();
    for p in points {
        let x: Vec<Rational> = p.into_iter().map(Rational::from_integer).collect();
        if e.mul_vec(&x).iter().zip(&f).any(|(l, r)| l > r) {
            continue;
        }
        let u: Vec<Rational> = inst.a.mul_vec(&x).iter().zip(&inst.b).map(|(ax, b)| ax - b).collect();
        let z = inst.objective.eval_exact(&x).expect("rational objective");
        match table.get(&u) {
            Some((best, _)) if best <= &z => {}
            _ => {
                table.insert(u, (z, x));
            }
        }
    }
    let samples = table
        .into_iter()
        .map(|(u, (z, x))| ValueSample {
            u,
            phi: ExtValue::Exact(z),
            feasible: true,
            argmin: x,
            restricted: vec![],
        })
        .collect();
    Ok(UGrid {
        mode: GridMode::ExactEnumeration,
        norm,
        radius: None,
        spacing: integer_lattice_spacing(inst)?,
        samples,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fidelity {
    /// Coverage certified and every term exact.
    Exact,
    /// A sampled or floating-point estimate.
    Approximate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleValue {
    pub value: ExtValue,
    #[serde(with = "serde_rat::vec")]
    pub u: Vec<Rational>,
    pub fidelity: Fidelity,
    pub note: String,
}

/// `min_u φ(u) + ρ‖u‖` over the grid. Exact only when the grid provably
/// contains every minimizer: either it is all of U, or it enumerates the
/// ball of radius `u_radius(ρ)`.
pub fn salr_oracle(
    inst: &ProblemInstance,
    rho: &Rational,
    norm: Norm,
    grid: &UGrid,
    settings: &Settings,
) -> Result<OracleValue> {
    if rho.is_negative() {
        return Err(Error::arg(format!("rho = {rho} must be nonnegative")));
    }
    if grid.norm != norm && !grid.covers_all_of_u() {
        return Err(Error::arg(format!(
            "grid was built for the {} ball, oracle asked for {}",
            grid.norm.name(),
            norm.name()
        )));
    }
    let mut best: Option<(ExtValue, &ValueSample)> = None;
    for s in grid.feasible() {
        let pen = match norm.exact(&s.u) {
            Some(v) => s.phi.plus_rational(&(rho * v)),
            None => ExtValue::Approx(s.phi.to_f64() + crate::exactnum::to_f64(rho) * norm.value_f64(&s.u)),
        };
        if best.as_ref().is_none_or(|(b, _)| &pen < b) {
            best = Some((pen, s));
        }
    }
    let Some((value, arg)) = best else {
        return Ok(OracleValue {
            value: ExtValue::PosInf,
            u: vec![],
            fidelity: if grid.covers_all_of_u() { Fidelity::Exact } else { Fidelity::Approximate },
            note: "no feasible sample".into(),
        });
    };
    let (fidelity, note) = if !value.is_exact() {
        (Fidelity::Approximate, "floating-point terms".to_string())
    } else if grid.covers_all_of_u() {
        (Fidelity::Exact, "grid is all of U".to_string())
    } else {
        match coverage_radius(inst, rho, norm, grid, settings) {
            Ok(r) if grid.certifies_radius(&r) => (Fidelity::Exact, format!("grid covers the radius {r}")),
            Ok(r) => (Fidelity::Approximate, format!("grid does not cover the radius {r}")),
            Err(e) => (Fidelity::Approximate, format!("coverage not certifiable: {e}")),
        }
    };
    Ok(OracleValue {
        value,
        u: arg.u.clone(),
        fidelity,
        note,
    })
}

fn coverage_radius(inst: &ProblemInstance, rho: &Rational, norm: Norm, grid: &UGrid, settings: &Settings) -> Result<Rational> {
    let z_ip = grid
        .at_zero()
        .and_then(|s| s.phi.exact().cloned())
        .ok_or_else(|| Error::Precondition("φ(0) is not an exact finite value".into()))?;
    let relax = continuous_relaxation(inst, settings)?;
    let z_r = relax
        .z
        .exact()
        .cloned()
        .ok_or_else(|| Error::Precondition("relaxation has no exact optimum".into()))?;
    u_radius(&z_ip, &z_r, &relax.lambda_a, rho, norm, &settings.slack)
}

/// Samples with `φ(u) + ρ‖u‖ <= φ(0)` lying outside the radius; empty when
/// the radius bound holds on the grid.
pub fn radius_violations(grid: &UGrid, rho: &Rational, norm: Norm, radius: &Rational) -> Vec<Vec<Rational>> {
    let Some(phi0) = grid.at_zero().map(|s| s.phi.clone()) else {
        return vec![];
    };
    grid.feasible()
        .filter(|s| {
            let v = norm.upper(&s.u, &crate::exactnum::default_slack());
            s.phi.plus_rational(&(rho * v)) <= phi0 && !norm.le(&s.u, radius)
        })
        .map(|s| s.u.clone())
        .collect()
}

/// CSV with columns `u_1..u_m, phi, feasible, x_1..x_n`.
pub fn samples_csv(samples: &[ValueSample], m: usize, n: usize) -> Result<String> {
    let mut w = csv::Writer::from_writer(vec![]);
    let mut header: Vec<String> = (1..=m).map(|i| format!("u_{i}")).collect();
    header.push("phi".into());
    header.push("feasible".into());
    header.extend((1..=n).map(|j| format!("x_{j}")));
    w.write_record(&header).map_err(|e| Error::Io(e.to_string()))?;
    for s in samples {
        let mut rec: Vec<String> = s.u.iter().map(|v| v.to_string()).collect();
        rec.push(s.phi.to_string());
        rec.push(s.feasible.to_string());
        if s.argmin.len() == n {
            rec.extend(s.argmin.iter().map(|v| v.to_string()));
        } else {
            rec.extend(std::iter::repeat_n(String::new(), n));
        }
        w.write_record(&rec).map_err(|e| Error::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}
