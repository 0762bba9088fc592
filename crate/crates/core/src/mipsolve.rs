//! Mixed-integer solvers: best-bound branch-and-bound on exact relaxations,
//! enumeration of the integer box, and the lifted SALR/ALR programs.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use itertools::Itertools;
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::cvxsub::{solve_qp, solve_smooth_objective, QpStatus, QuadraticProgram, SmoothObjective};
use crate::error::{Error, Result};
use crate::exactnum::{from_f64, serde_rat, ExtValue, Int, Rational};
use crate::lpsolve::{solve_lp, LinearProgram, LpStatus};
use crate::model::{ObjectiveKind, ProblemInstance};
use crate::ratlinalg::{dot, Norm, RatMatrix};
use crate::Settings;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MipStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MipSolution {
    pub status: MipStatus,
    /// `+inf` when infeasible, `-inf` when unbounded.
    pub z: ExtValue,
    #[serde(with = "serde_rat::vec")]
    pub x: Vec<Rational>,
    pub node_count: u64,
    /// Size of the enumerated integer box, when enumeration was used.
    pub enumerated: Option<u64>,
}

impl MipSolution {
    fn infeasible(node_count: u64, enumerated: Option<u64>) -> Self {
        MipSolution {
            status: MipStatus::Infeasible,
            z: ExtValue::PosInf,
            x: vec![],
            node_count,
            enumerated,
        }
    }
}

enum Relax {
    Optimal(Rational, Vec<Rational>),
    Infeasible,
    Unbounded,
}

/// Relaxation of `inst` with bounds `lo <= x_j <= hi` on integer variables.
fn relax_node(
    inst: &ProblemInstance,
    lo: &[Option<Int>],
    hi: &[Option<Int>],
    feasibility_only: bool,
    settings: &Settings,
) -> Result<Relax> {
    let mut lp = inst.relaxation_lp();
    let n = inst.n();
    for (k, &j) in inst.integer.iter().enumerate() {
        for (bound, s) in [(&hi[k], 1i64), (&lo[k], -1i64)] {
            if let Some(v) = bound {
                let mut row = vec![Rational::zero(); n];
                row[j] = Rational::from_integer(s.into());
                lp.a_in.push_row(row);
                lp.b_in.push(Rational::from_integer(v * s));
            }
        }
    }
    if feasibility_only {
        lp.c = vec![Rational::zero(); n];
    }
    if feasibility_only || inst.kind() == ObjectiveKind::Linear {
        let s = solve_lp(&lp);
        return Ok(match s.status {
            LpStatus::Optimal => Relax::Optimal(s.z, s.x),
            LpStatus::Infeasible => Relax::Infeasible,
            LpStatus::Unbounded => Relax::Unbounded,
        });
    }
    let qp = QuadraticProgram {
        q: inst.objective.q_or_zero(),
        c: lp.c,
        a_eq: lp.a_eq,
        b_eq: lp.b_eq,
        a_in: lp.a_in,
        b_in: lp.b_in,
    };
    let s = solve_qp(&qp, settings.caps.active_set_cap)?;
    Ok(match s.status {
        QpStatus::Optimal => Relax::Optimal(s.z, s.kkt.expect("optimal QP has a KKT point").x),
        QpStatus::Infeasible => Relax::Infeasible,
        QpStatus::Unattained => Relax::Unbounded,
    })
}

/// Integer variable whose value is closest to half-integral; lowest index on ties.
fn most_fractional(inst: &ProblemInstance, x: &[Rational]) -> Option<usize> {
    let half = Rational::new(1.into(), 2.into());
    let mut best: Option<(Rational, usize)> = None;
    for (k, &j) in inst.integer.iter().enumerate() {
        if x[j].is_integer() {
            continue;
        }
        let frac = &x[j] - x[j].floor();
        let dist = (frac - &half).abs();
        if best.as_ref().is_none_or(|(d, _)| &dist < d) {
            best = Some((dist, k));
        }
    }
    best.map(|(_, k)| k)
}

struct Node {
    lo: Vec<Option<Int>>,
    hi: Vec<Option<Int>>,
    x: Vec<Rational>,
}

fn branch_and_bound(inst: &ProblemInstance, feasibility_only: bool, settings: &Settings) -> Result<MipSolution> {
    let cap = settings.caps.node_cap;
    let n1 = inst.integer.len();
    let mut node_count = 1u64;
    let root_lo = vec![None; n1];
    let root_hi = vec![None; n1];
    let (z0, x0) = match relax_node(inst, &root_lo, &root_hi, feasibility_only, settings)? {
        Relax::Infeasible => return Ok(MipSolution::infeasible(node_count, None)),
        Relax::Unbounded => {
            // rational data: unbounded relaxation plus an integer point means unbounded
            let feas = branch_and_bound(inst, true, settings)?;
            return Ok(match feas.status {
                MipStatus::Optimal => MipSolution {
                    status: MipStatus::Unbounded,
                    z: ExtValue::NegInf,
                    x: feas.x,
                    node_count: node_count + feas.node_count,
                    enumerated: None,
                },
                _ => MipSolution::infeasible(node_count + feas.node_count, None),
            });
        }
        Relax::Optimal(z, x) => (z, x),
    };
    let mut nodes = vec![Node { lo: root_lo, hi: root_hi, x: x0 }];
    let mut heap = BinaryHeap::new();
    heap.push(Reverse((z0, 0usize)));
    let mut incumbent: Option<(Rational, Vec<Rational>)> = None;
    while let Some(Reverse((bound, id))) = heap.pop() {
        if let Some((best, _)) = &incumbent {
            if &bound >= best {
                break;
            }
        }
        let Some(k) = most_fractional(inst, &nodes[id].x) else {
            incumbent = Some((bound, nodes[id].x.clone()));
            if feasibility_only {
                break;
            }
            continue;
        };
        let j = inst.integer[k];
        let v = nodes[id].x[j].clone();
        let down = v.floor().to_integer();
        let up = v.ceil().to_integer();
        for side in 0..2 {
            node_count += 1;
            if node_count > cap {
                return Err(Error::limit("branch-and-bound nodes", node_count, cap));
            }
            let mut lo = nodes[id].lo.clone();
            let mut hi = nodes[id].hi.clone();
            if side == 0 {
                hi[k] = Some(down.clone());
            } else {
                lo[k] = Some(up.clone());
            }
            if let Relax::Optimal(z, x) = relax_node(inst, &lo, &hi, feasibility_only, settings)? {
                nodes.push(Node { lo, hi, x });
                heap.push(Reverse((z, nodes.len() - 1)));
            }
        }
    }
    Ok(match incumbent {
        Some((z, x)) => MipSolution {
            status: MipStatus::Optimal,
            z: ExtValue::Exact(z + &inst.objective.offset),
            x,
            node_count,
            enumerated: None,
        },
        None => MipSolution::infeasible(node_count, None),
    })
}

/// Solves the instance exactly (linear, quadratic) or by box enumeration
/// with continuous subsolves (oracle objectives, which need M).
pub fn solve_mip(inst: &ProblemInstance, settings: &Settings) -> Result<MipSolution> {
    match inst.kind() {
        ObjectiveKind::Linear | ObjectiveKind::Quadratic => branch_and_bound(inst, false, settings),
        ObjectiveKind::SmoothOracle => {
            inst.require_bound("oracle objectives (integer box enumeration)")?;
            solve_by_enumeration(inst, settings)
        }
    }
}

/// All integer vectors with `‖x_I‖∞ <= floor(M)`, in lexicographic order.
pub fn enumerate_integer_points(n1: usize, radius: &Int, cap: u64) -> Result<Vec<Vec<Int>>> {
    let count = num_traits::pow(BigInt::from(2) * radius + 1, n1);
    if count > BigInt::from(cap) {
        return Err(Error::limit("integer box enumeration", count, cap));
    }
    if n1 == 0 {
        return Ok(vec![vec![]]);
    }
    let r = radius.to_i64().expect("radius below cap");
    Ok((0..n1)
        .map(|_| -r..=r)
        .multi_cartesian_product()
        .map(|p| p.into_iter().map(Int::from).collect())
        .collect())
}

/// The continuous subproblem with the integer variables fixed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RestrictedSolution {
    #[serde(serialize_with = "ser_ints")]
    pub x_i: Vec<Int>,
    pub z: ExtValue,
    #[serde(with = "serde_rat::vec")]
    pub x: Vec<Rational>,
    /// Equality multipliers of the continuous subproblem, one per row of A.
    #[serde(with = "serde_rat::vec")]
    pub lambda_a: Vec<Rational>,
    #[serde(with = "serde_rat::vec")]
    pub lambda_e: Vec<Rational>,
}

fn ser_ints<S: serde::Serializer>(v: &[Int], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|i| i.to_string()))
}

/// `Φ(0, x_I)` for the instance as given; perturb `b` first for other u.
pub fn solve_restricted(inst: &ProblemInstance, x_i: &[Int], settings: &Settings) -> Result<RestrictedSolution> {
    let n = inst.n();
    let cont = inst.continuous();
    let xi_rat: Vec<Rational> = x_i.iter().map(|v| Rational::from_integer(v.clone())).collect();
    let mut fixed = vec![Rational::zero(); n];
    for (k, &j) in inst.integer.iter().enumerate() {
        fixed[j] = xi_rat[k].clone();
    }
    let mut out = RestrictedSolution {
        x_i: x_i.to_vec(),
        z: ExtValue::PosInf,
        x: vec![],
        lambda_a: vec![Rational::zero(); inst.m()],
        lambda_e: vec![Rational::zero(); inst.p()],
    };
    let rhs_a: Vec<Rational> = inst.b.iter().zip(inst.a.mul_vec(&fixed)).map(|(b, v)| b - v).collect();
    let rhs_e: Vec<Rational> = inst.f.iter().zip(inst.e.mul_vec(&fixed)).map(|(f, v)| f - v).collect();
    let a_c = inst.a.select_cols(&cont);
    let e_c = inst.e.select_cols(&cont);

    // rows without continuous entries are constant conditions on x_I
    let mut eq_rows = vec![];
    for i in 0..inst.m() {
        if a_c.row(i).iter().all(Zero::is_zero) {
            if !rhs_a[i].is_zero() {
                return Ok(out);
            }
        } else {
            eq_rows.push(i);
        }
    }
    let mut in_rows = vec![];
    for i in 0..inst.p() {
        if e_c.row(i).iter().all(Zero::is_zero) {
            if rhs_e[i].is_negative() {
                return Ok(out);
            }
        } else {
            in_rows.push(i);
        }
    }
    let a_eq = a_c.select_rows(&eq_rows);
    let b_eq: Vec<Rational> = eq_rows.iter().map(|&i| rhs_a[i].clone()).collect();
    let a_in = e_c.select_rows(&in_rows);
    let b_in: Vec<Rational> = in_rows.iter().map(|&i| rhs_e[i].clone()).collect();
    let assemble = |xc: &[Rational]| {
        let mut x = fixed.clone();
        for (k, &j) in cont.iter().enumerate() {
            x[j] = xc[k].clone();
        }
        x
    };
    let obj = &inst.objective;

    if inst.kind() == ObjectiveKind::SmoothOracle {
        let fixed_f: Vec<f64> = fixed.iter().map(crate::exactnum::to_f64).collect();
        if cont.is_empty() {
            out.z = ExtValue::Approx(obj.eval_f64(&fixed_f));
            out.x = fixed;
            return Ok(out);
        }
        let (mu, l) = obj.mu_l().expect("oracle constants");
        let embed = {
            let fixed_f = fixed_f.clone();
            let cont = cont.clone();
            move |xc: &[f64]| {
                let mut x = fixed_f.clone();
                for (k, &j) in cont.iter().enumerate() {
                    x[j] = xc[k];
                }
                x
            }
        };
        let embed2 = embed.clone();
        let cont2 = cont.clone();
        let f = SmoothObjective {
            n: cont.len(),
            mu,
            l,
            value: Box::new(move |xc| obj.eval_f64(&embed(xc))),
            gradient: Box::new(move |xc| {
                let g = obj.gradient_f64(&embed2(xc));
                cont2.iter().map(|&j| g[j]).collect()
            }),
        };
        let s = match solve_smooth_objective(
            &f,
            &a_eq,
            &b_eq,
            &a_in,
            &b_in,
            settings.tol,
            settings.caps.iter_cap,
            settings.caps.active_set_cap,
        ) {
            Err(Error::Infeasible(_)) => return Ok(out),
            other => other?,
        };
        out.z = ExtValue::Approx(s.z);
        out.x = assemble(&s.x_exact);
        for (k, &i) in eq_rows.iter().enumerate() {
            out.lambda_a[i] = from_f64(s.lambda_a[k]);
        }
        for (k, &i) in in_rows.iter().enumerate() {
            out.lambda_e[i] = from_f64(s.lambda_e[k]);
        }
        return Ok(out);
    }

    // constant part of the objective
    let c_c: Vec<Rational> = cont.iter().map(|&j| obj.c[j].clone()).collect();
    let mut constant = dot(&obj.c, &fixed) + &obj.offset;
    let mut lin = c_c;
    let mut q_cc = RatMatrix::zeros(cont.len(), cont.len());
    if let Some(q) = &obj.q {
        let half = Rational::new(1.into(), 2.into());
        constant += half * dot(&fixed, &q.mul_vec(&fixed));
        let qx = q.mul_vec(&fixed);
        for (k, &j) in cont.iter().enumerate() {
            lin[k] += &qx[j];
        }
        q_cc = q.select(&cont, &cont);
    }
    if cont.is_empty() {
        out.z = ExtValue::Exact(constant);
        out.x = fixed;
        return Ok(out);
    }
    let (status, z, xc, la, le) = if inst.kind() == ObjectiveKind::Linear {
        let s = solve_lp(&LinearProgram { c: lin, a_eq, b_eq, a_in, b_in });
        (
            match s.status {
                LpStatus::Optimal => QpStatus::Optimal,
                LpStatus::Infeasible => QpStatus::Infeasible,
                LpStatus::Unbounded => QpStatus::Unattained,
            },
            s.z,
            s.x,
            s.lambda_a,
            s.lambda_e,
        )
    } else {
        let qp = QuadraticProgram { q: q_cc, c: lin, a_eq, b_eq, a_in, b_in };
        let s = solve_qp(&qp, settings.caps.active_set_cap)?;
        match s.kkt {
            Some(k) => (s.status, s.z, k.x, k.lambda_a, k.lambda_e),
            None => (s.status, s.z, vec![], vec![], vec![]),
        }
    };
    match status {
        QpStatus::Infeasible => {}
        QpStatus::Unattained => out.z = ExtValue::NegInf,
        QpStatus::Optimal => {
            out.z = ExtValue::Exact(z + constant);
            out.x = assemble(&xc);
            for (k, &i) in eq_rows.iter().enumerate() {
                out.lambda_a[i] = la[k].clone();
            }
            for (k, &i) in in_rows.iter().enumerate() {
                out.lambda_e[i] = le[k].clone();
            }
        }
    }
    Ok(out)
}

/// Every point of the integer box with its restricted value, in
/// lexicographic order of `x_I`.
pub fn restricted_table(inst: &ProblemInstance, settings: &Settings) -> Result<Vec<RestrictedSolution>> {
    let r = inst.require_bound("integer box enumeration")?;
    let points = enumerate_integer_points(inst.integer.len(), &r, settings.caps.enum_cap)?;
    points
        .par_iter()
        .map(|p| solve_restricted(inst, p, settings))
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}

/// Minimum of the restricted values over the integer box.
pub fn solve_by_enumeration(inst: &ProblemInstance, settings: &Settings) -> Result<MipSolution> {
    let table = restricted_table(inst, settings)?;
    let count = table.len() as u64;
    let mut best: Option<&RestrictedSolution> = None;
    for r in &table {
        if best.is_none_or(|b| r.z < b.z) {
            best = Some(r);
        }
    }
    Ok(match best {
        Some(b) if b.z == ExtValue::NegInf => MipSolution {
            status: MipStatus::Unbounded,
            z: ExtValue::NegInf,
            x: vec![],
            node_count: 0,
            enumerated: Some(count),
        },
        Some(b) if b.z.is_finite() => MipSolution {
            status: MipStatus::Optimal,
            z: b.z.clone(),
            x: b.x.clone(),
            node_count: 0,
            enumerated: Some(count),
        },
        _ => MipSolution::infeasible(0, Some(count)),
    })
}

/// Augmenting functions with an exact reformulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Augmenting {
    Norm(Norm),
    SquaredL2,
}

impl Augmenting {
    pub fn name(self) -> String {
        match self {
            Augmenting::Norm(n) => n.name().to_string(),
            Augmenting::SquaredL2 => "squared-l2".into(),
        }
    }

    pub fn eval_exact(self, u: &[Rational]) -> Option<Rational> {
        match self {
            Augmenting::Norm(n) => n.exact(u),
            Augmenting::SquaredL2 => Some(dot(u, u)),
        }
    }
}

/// `min f(x) − λᵀAx + ρψ(b − Ax) + λᵀb` over X, with the equality rows
/// moved into the objective.
fn lifted_instance(inst: &ProblemInstance, lambda: &[Rational], rho: &Rational, psi: Augmenting) -> Result<ProblemInstance> {
    if inst.kind() == ObjectiveKind::SmoothOracle {
        return Err(Error::Unsupported(
            "exact SALR/ALR reformulations need linear or quadratic objectives; use the value-function oracle".into(),
        ));
    }
    let n = inst.n();
    let m = inst.m();
    let mut obj = inst.objective.clone();
    let at_lambda = inst.a.tmul_vec(lambda);
    for j in 0..n {
        obj.c[j] -= &at_lambda[j];
    }
    obj.offset += dot(lambda, &inst.b);
    let mut e = inst.e.clone();
    let mut f = inst.f.clone();
    match psi {
        Augmenting::Norm(Norm::L2) => {
            return Err(Error::Unsupported(
                "the l2 penalty has no exact LP/QP reformulation; use the value-function oracle".into(),
            ))
        }
        Augmenting::Norm(norm) => {
            let t = if norm == Norm::L1 { m } else { 1.min(m) };
            let mut e2 = RatMatrix::zeros(0, n + t);
            for i in 0..e.rows() {
                let mut row = e.row(i).to_vec();
                row.resize(n + t, Rational::zero());
                e2.push_row(row);
            }
            // ±(b − Ax)_i <= t_i  (or t)
            for i in 0..m {
                let ti = if norm == Norm::L1 { i } else { 0 };
                for s in [1i64, -1] {
                    let sr = Rational::from_integer(s.into());
                    let mut row: Vec<Rational> = inst.a.row(i).iter().map(|a| -(a * &sr)).collect();
                    row.resize(n + t, Rational::zero());
                    row[n + ti] = -Rational::one();
                    e2.push_row(row);
                    f.push(-(&inst.b[i] * &sr));
                }
            }
            e = e2;
            obj = obj.extended(&vec![rho.clone(); t]);
        }
        Augmenting::SquaredL2 => {
            // ρ‖b − Ax‖² = ρ(xᵀAᵀAx − 2bᵀAx + bᵀb)
            let ata = inst.a.transpose().mul(&inst.a)?;
            let two_rho = rho * Rational::from_integer(2.into());
            let q = obj.q_or_zero().add(&ata.scale(&two_rho));
            let atb = inst.a.tmul_vec(&inst.b);
            for j in 0..n {
                obj.c[j] -= &two_rho * &atb[j];
            }
            obj.offset += rho * dot(&inst.b, &inst.b);
            obj.q = Some(q);
            obj.kind = ObjectiveKind::Quadratic;
        }
    }
    let nn = obj.dim();
    Ok(ProblemInstance {
        name: format!("{}-lifted", inst.name),
        a: RatMatrix::zeros(0, nn),
        b: vec![],
        e,
        f,
        integer: inst.integer.clone(),
        m_bound: inst.m_bound.clone(),
        objective: obj,
        attest_recession: inst.attest_recession,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PenaltySolution {
    pub z: ExtValue,
    #[serde(with = "serde_rat::vec")]
    pub x: Vec<Rational>,
    pub node_count: u64,
}

fn solve_lifted(inst: &ProblemInstance, lambda: &[Rational], rho: &Rational, psi: Augmenting, settings: &Settings) -> Result<PenaltySolution> {
    if rho.is_negative() {
        return Err(Error::arg(format!("rho = {rho} must be nonnegative")));
    }
    let lifted = lifted_instance(inst, lambda, rho, psi)?;
    let sol = solve_mip(&lifted, settings)?;
    let mut x = sol.x;
    x.truncate(inst.n());
    Ok(PenaltySolution {
        z: sol.z,
        x,
        node_count: sol.node_count,
    })
}

/// `z_SALR(ρ) = min_{x∈X} f(x) + ρ‖b − Ax‖` for the ℓ1 and ℓ∞ norms.
pub fn solve_salr(inst: &ProblemInstance, rho: &Rational, norm: Norm, settings: &Settings) -> Result<PenaltySolution> {
    if !rho.is_positive() {
        return Err(Error::arg(format!("rho = {rho} must be positive")));
    }
    let zero = vec![Rational::zero(); inst.m()];
    solve_lifted(inst, &zero, rho, Augmenting::Norm(norm), settings)
}

/// `min_{x∈X} f(x) + λᵀ(b − Ax) + ρψ(b − Ax)`.
pub fn solve_alr(
    inst: &ProblemInstance,
    lambda: &[Rational],
    rho: &Rational,
    psi: Augmenting,
    settings: &Settings,
) -> Result<PenaltySolution> {
    if lambda.len() != inst.m() {
        return Err(Error::arg(format!(
            "lambda has {} entries, instance has {} equality rows",
            lambda.len(),
            inst.m()
        )));
    }
    solve_lifted(inst, lambda, rho, psi, settings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::exactnum::{int, rat, rat_vec};
    use crate::model::ObjectiveDescriptor;
    use crate::Caps;

    fn settings() -> Settings {
        Settings::default()
    }

    /// Exhaustive oracle over a finite box for a pure-integer instance.
    fn brute_force_pure(inst: &ProblemInstance, r: i64) -> ExtValue {
        let mut best = ExtValue::PosInf;
        for p in (0..inst.n()).map(|_| -r..=r).multi_cartesian_product() {
            let x: Vec<Rational> = p.iter().map(|&v| int(v)).collect();
            if inst.is_feasible(&x) {
                let z = ExtValue::Exact(inst.objective.eval_exact(&x).unwrap());
                if z < best {
                    best = z;
                }
            }
        }
        best
    }

    #[test]
    fn inst_a() {
        let inst = corpus::inst_a();
        let s = solve_mip(&inst, &settings()).unwrap();
        assert_eq!(s.z, ExtValue::Exact(int(-1)));
        assert_eq!(s.x, rat_vec(&[1, 1]));
        assert_eq!(brute_force_pure(&inst, 2), s.z);
    }

    #[test]
    fn inst_b() {
        let inst = corpus::inst_b();
        let s = solve_mip(&inst, &settings()).unwrap();
        assert_eq!(s.z, ExtValue::Exact(int(-1)));
        assert_eq!(s.x, vec![int(1), rat(1, 2)]);
        // enumerate x_1 in {0, 1}, LP in x_2
        let mut best = ExtValue::PosInf;
        for x1 in 0..=1 {
            let r = solve_restricted(&inst, &[BigInt::from(x1)], &settings()).unwrap();
            if r.z < best {
                best = r.z;
            }
        }
        assert_eq!(best, s.z);
    }

    #[test]
    fn inst_c() {
        let inst = corpus::inst_c();
        let s = solve_mip(&inst, &settings()).unwrap();
        assert_eq!(s.z, ExtValue::Exact(int(1)));
        // closed form: x_C = 1 − x_I, f = x_I² + (1 − x_I)²
        let closed = (-2i64..=2).map(|k| k * k + (1 - k) * (1 - k)).min().unwrap();
        assert_eq!(s.z, ExtValue::Exact(int(closed)));
        let e = solve_by_enumeration(&inst, &settings()).unwrap();
        assert_eq!(e.z, s.z);
        assert_eq!(e.enumerated, Some(5));
    }

    #[test]
    fn integer_points() {
        let one = |r: i64| BigInt::from(r);
        let p = enumerate_integer_points(1, &one(2), 100).unwrap();
        assert_eq!(p.len(), 5);
        assert_eq!(p[0], vec![one(-2)]);
        assert_eq!(enumerate_integer_points(2, &one(0), 100).unwrap(), vec![vec![one(0), one(0)]]);
        assert_eq!(enumerate_integer_points(2, &one(1), 100).unwrap().len(), 9);
        assert!(matches!(
            enumerate_integer_points(3, &one(2), 100),
            Err(Error::ResourceLimit { .. })
        ));
    }

    #[test]
    fn infeasible_and_unbounded() {
        // 2x = 1 with x integer
        let inst = ProblemInstance::new(
            "odd",
            RatMatrix::from_i64(&[&[2]]),
            rat_vec(&[1]),
            RatMatrix::zeros(0, 1),
            vec![],
            vec![0],
            None,
            ObjectiveDescriptor::linear(rat_vec(&[1])),
        )
        .unwrap();
        let s = solve_mip(&inst, &settings()).unwrap();
        assert_eq!(s.status, MipStatus::Infeasible);

        let inst = ProblemInstance::new(
            "down",
            RatMatrix::zeros(0, 2),
            vec![],
            RatMatrix::from_i64(&[&[1, 0]]),
            rat_vec(&[0]),
            vec![0],
            None,
            ObjectiveDescriptor::linear(rat_vec(&[1, 0])),
        )
        .unwrap();
        assert_eq!(solve_mip(&inst, &settings()).unwrap().status, MipStatus::Unbounded);
    }

    #[test]
    fn node_cap() {
        let inst = corpus::inst_a();
        let s = Settings { caps: Caps::uniform(1), ..Settings::default() };
        assert!(matches!(solve_mip(&inst, &s), Err(Error::ResourceLimit { .. })));
    }

    #[test]
    fn salr_examples() {
        let inst = corpus::inst_a();
        let s = settings();
        assert_eq!(solve_salr(&inst, &int(1), Norm::L1, &s).unwrap().z, ExtValue::Exact(int(-1)));
        assert_eq!(solve_salr(&inst, &int(1000), Norm::Linf, &s).unwrap().z, ExtValue::Exact(int(-1)));
        let zero = vec![int(0)];
        let a = solve_alr(&inst, &zero, &int(1), Augmenting::Norm(Norm::L1), &s).unwrap();
        assert_eq!(a.z, ExtValue::Exact(int(-1)));
        assert!(matches!(
            solve_salr(&inst, &int(1), Norm::L2, &s),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn alr_matches_enumeration() {
        // −x₁ + (2 − x₁ − x₂) + |2 − x₁ − x₂| over 2x₁ <= 3, x >= 0 integer
        let inst = corpus::inst_a();
        let s = solve_alr(&inst, &[int(1)], &int(1), Augmenting::Norm(Norm::L1), &settings()).unwrap();
        let mut best = i64::MAX;
        for x1 in 0..=3i64 {
            for x2 in 0..=3i64 {
                if 2 * x1 <= 3 {
                    let u = 2 - x1 - x2;
                    best = best.min(-x1 + u + u.abs());
                }
            }
        }
        // x₂ is unbounded above but the penalty grows with it
        assert_eq!(s.z, ExtValue::Exact(int(best)));
    }

    #[test]
    fn squared_l2_alr_is_quadratic() {
        let inst = corpus::inst_a();
        let s = solve_alr(&inst, &[int(0)], &rat(1, 4), Augmenting::SquaredL2, &settings()).unwrap();
        // enumerate x₁ ∈ {0,1}, x₂ >= 0 integer: −x₁ + (2 − x₁ − x₂)²/4
        let mut best = Rational::from_integer(100.into());
        for x1 in 0..=1i64 {
            for x2 in 0..=5i64 {
                let u = 2 - x1 - x2;
                let v = int(-x1) + rat(u * u, 4);
                if v < best {
                    best = v;
                }
            }
        }
        assert_eq!(s.z, ExtValue::Exact(best));
    }

    #[test]
    fn oracle_enumeration_matches_quadratic() {
        // ‖x‖² with x_I + x_C = 1, |x_I| <= 2 as an oracle objective
        let mut inst = corpus::inst_c();
        inst.objective = ObjectiveDescriptor::oracle("sum-of-squares", rat_vec(&[0, 0])).unwrap();
        let s = solve_mip(&inst, &settings()).unwrap();
        assert!((s.z.to_f64() - 1.0).abs() < 1e-7);
    }
}
