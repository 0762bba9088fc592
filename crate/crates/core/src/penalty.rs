//! Explicit penalty constants: κ, β, Γ, K, δ and ρ* for MILPs, K₁ and K₂
//! for MIQPs, the pure-integer threshold, and the multiplier-based Γ for
//! convex objectives.

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactnum::{denom, int, lcm_list, round_to_dyadic, serde_rat, sqrt_upper, to_f64, ExtValue, Int, Rational};
use crate::lpsolve::{solve_lp, LinearProgram, LpStatus};
use crate::mipsolve::{restricted_table, solve_mip, MipStatus};
use crate::model::{check_recession_condition, to_standard_form, ObjectiveKind, ProblemInstance, StandardForm};
use crate::ratlinalg::{
    enumerate_bases, enumerate_invertible_submatrices, beta_of, frob_upper, Norm, RatMatrix,
};
use crate::valuefn::{build_grid, phi_restricted, Relaxation, UGrid, ValueSample};
use crate::Settings;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Exact,
    /// A rational upper bound on an irrational quantity.
    OverRounded,
    /// Certified on a finite sample of u only.
    SamplingCertified,
    /// Derived from floating-point oracle values.
    Approximate,
}

/// One reported constant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Quantity {
    pub name: &'static str,
    #[serde(with = "serde_rat")]
    pub value: Rational,
    pub approx: f64,
    pub provenance: Provenance,
    pub formula: &'static str,
}

fn quantity(name: &'static str, value: &Rational, provenance: Provenance, formula: &'static str) -> Quantity {
    Quantity {
        name,
        value: value.clone(),
        approx: to_f64(value),
        provenance,
        formula,
    }
}

fn finite(v: &ExtValue, what: &str) -> Result<Rational> {
    match v {
        ExtValue::Exact(r) => Ok(r.clone()),
        ExtValue::Approx(x) if x.is_finite() => Ok(round_to_dyadic(*x, 40)),
        other => Err(Error::Unsupported(format!("{what} is {other}, not a finite value"))),
    }
}

/// `ρ* = max(Γ, ‖λ_A‖* + (z_IP − z_R)/δ)`.
pub fn threshold_rho(gamma: &Rational, lambda_dual: &Rational, gap: &Rational, delta: &Rational) -> Rational {
    let second = lambda_dual + gap / delta;
    if gamma > &second {
        gamma.clone()
    } else {
        second
    }
}

/// Scales the rows of A (uniformly, by `s`) and of E (each by its own
/// factor) so that all constraint data is integral. Returns the instance
/// and `s`; `u` scales to `s·u`.
pub fn integralize(inst: &ProblemInstance) -> Result<(ProblemInstance, Rational)> {
    let row_lcm = |xs: &mut dyn Iterator<Item = &Rational>| -> Result<Rational> {
        let d: Vec<Int> = xs.map(denom).collect();
        Ok(Rational::from_integer(if d.is_empty() { Int::one() } else { lcm_list(&d)? }))
    };
    let s = row_lcm(&mut inst.a.entries().iter().chain(&inst.b))?;
    let mut out = inst.clone();
    out.a = inst.a.scale(&s);
    out.b = inst.b.iter().map(|v| v * &s).collect();
    let mut e = RatMatrix::zeros(0, inst.n());
    for i in 0..inst.p() {
        let t = row_lcm(&mut inst.e.row(i).iter().chain(std::iter::once(&inst.f[i])))?;
        e.push_row(inst.e.row(i).iter().map(|v| v * &t).collect());
        out.f[i] = &inst.f[i] * &t;
    }
    out.e = e;
    Ok((out, s))
}

/// `A'_C`, the continuous columns of the standard-form constraint matrix.
fn standard_a_c(sf: &StandardForm) -> RatMatrix {
    sf.inst.a.select_cols(&sf.cont_cols)
}

/// lcm of the objective denominators, of |det B| over the bases of `A'_C`,
/// and of denom(φ(0)).
pub fn kappa_lcm(sf: &StandardForm, phi0: &Rational, cap: u64) -> Result<Int> {
    let obj = &sf.inst.objective;
    let mut dens: Vec<Int> = obj.c.iter().map(denom).collect();
    if let Some(q) = &obj.q {
        dens.extend(q.entries().iter().map(denom));
    }
    dens.push(denom(phi0));
    let bases = enumerate_bases(&standard_a_c(sf), cap)?;
    dens.push(bases.det_lcm()?);
    lcm_list(&dens)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MilpConstants {
    /// Uniform factor making A and b integral.
    #[serde(with = "serde_rat")]
    pub scale: Rational,
    #[serde(serialize_with = "ser_int")]
    pub kappa_lcm: Int,
    pub bases: usize,
    #[serde(with = "serde_rat")]
    pub beta: Rational,
    #[serde(with = "serde_rat")]
    pub c_c_norm: Rational,
    /// `sup ‖u‖₂/‖u‖` for the penalty norm.
    #[serde(with = "serde_rat")]
    pub norm_factor: Rational,
    /// Lipschitz constant in original units, `s·c_N·β·‖c'_C‖₂`.
    #[serde(with = "serde_rat")]
    pub gamma: Rational,
    #[serde(with = "serde_rat")]
    pub k: Rational,
    /// Exclusive upper limit on δ in original units.
    #[serde(with = "serde_rat")]
    pub delta_max: Rational,
    #[serde(with = "serde_rat")]
    pub delta: Rational,
    #[serde(with = "serde_rat")]
    pub lambda_dual: Rational,
    #[serde(with = "serde_rat")]
    pub gap: Rational,
    #[serde(with = "serde_rat")]
    pub rho_star: Rational,
}

fn ser_int<S: serde::Serializer>(v: &Int, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

impl MilpConstants {
    pub fn quantities(&self) -> Vec<Quantity> {
        use Provenance::*;
        vec![
            quantity("scale", &self.scale, Exact, "lcm of the denominators of A and b"),
            quantity("kappa_lcm", &Rational::from_integer(self.kappa_lcm.clone()), Exact, "lcm(objective denominators, |lcm det B|, denom(phi(0)))"),
            quantity("beta", &self.beta, OverRounded, "max over bases B of A'_C of ||B^-1||_F"),
            quantity("gamma", &self.gamma, OverRounded, "s * c_N * beta * ||c'_C||_2"),
            quantity("K", &self.k, OverRounded, "max(kappa^2 * gamma_s, 1)"),
            quantity("delta_max", &self.delta_max, OverRounded, "1/(2K) / s"),
            quantity("delta", &self.delta, OverRounded, "1/(4K) / s"),
            quantity("rho_star", &self.rho_star, OverRounded, "max(gamma, ||lambda_A||_* + (z_IP - z_R)/delta)"),
        ]
    }
}

/// Constants of the MILP analysis for the penalty norm `norm`. `Γ` and `δ`
/// are computed on the integral rescaling and reported in original units.
pub fn milp_constants(
    inst: &ProblemInstance,
    relax: &Relaxation,
    z_ip: &Rational,
    norm: Norm,
    settings: &Settings,
) -> Result<MilpConstants> {
    if inst.kind() != ObjectiveKind::Linear {
        return Err(Error::Unsupported("MILP constants need a linear objective".into()));
    }
    let z_r = finite(&relax.z, "the relaxation value")?;
    let (scaled, s) = integralize(inst)?;
    let sf = to_standard_form(&scaled)?;
    let kappa = kappa_lcm(&sf, z_ip, settings.caps.basis_cap)?;
    let a_c = standard_a_c(&sf);
    let bases = enumerate_bases(&a_c, settings.caps.basis_cap)?;
    let beta = if bases.is_empty() { Rational::zero() } else { beta_of(&bases, &settings.slack)? };
    let c_c: Vec<Rational> = sf.cont_cols.iter().map(|&j| sf.inst.objective.c[j].clone()).collect();
    let c_c_norm = Norm::L2.upper(&c_c, &settings.slack);
    let norm_factor = norm.dual().l2_factor(inst.m(), &settings.slack);
    let gamma_s = &norm_factor * &beta * &c_c_norm;
    let kk = Rational::from_integer(&kappa * &kappa) * &gamma_s;
    let k = if kk > Rational::one() { kk } else { Rational::one() };
    let delta_max = Rational::one() / (int(2) * &k) / &s;
    let delta = Rational::one() / (int(4) * &k) / &s;
    let lambda_dual = norm.dual().upper(&relax.lambda_a, &settings.slack);
    let gap = z_ip - &z_r;
    let gamma = &s * &gamma_s;
    let rho_star = threshold_rho(&gamma, &lambda_dual, &gap, &delta);
    Ok(MilpConstants {
        scale: s,
        kappa_lcm: kappa,
        bases: bases.len(),
        beta,
        c_c_norm,
        norm_factor,
        gamma,
        k,
        delta_max,
        delta,
        lambda_dual,
        gap,
        rho_star,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PicpConstants {
    #[serde(with = "serde_rat")]
    pub scale: Rational,
    #[serde(with = "serde_rat")]
    pub gap: Rational,
    #[serde(with = "serde_rat")]
    pub lambda_dual: Rational,
    #[serde(with = "serde_rat")]
    pub rho_star: Rational,
}

impl PicpConstants {
    pub fn quantities(&self) -> Vec<Quantity> {
        vec![
            quantity("scale", &self.scale, Provenance::Exact, "lcm of the denominators of A and b"),
            quantity("rho_star", &self.rho_star, Provenance::Exact, "s * (z_IP - z_R) + ||lambda_A||_*"),
        ]
    }
}

/// `ρ* = s(z_IP − z_R) + ‖λ_A‖*`: after scaling by `s` every nonzero
/// reachable `u` has norm at least `1/s`.
pub fn picp_rho(inst: &ProblemInstance, z_ip: &Rational, relax: &Relaxation, norm: Norm, settings: &Settings) -> Result<PicpConstants> {
    if !inst.is_pure_integer() {
        return Err(Error::Unsupported("the pure-integer threshold needs every variable integral".into()));
    }
    let z_r = finite(&relax.z, "the relaxation value")?;
    let (_, s) = integralize(inst)?;
    let gap = z_ip - z_r;
    let lambda_dual = norm.dual().upper(&relax.lambda_a, &settings.slack);
    let rho_star = &s * &gap + &lambda_dual;
    Ok(PicpConstants { scale: s, gap, lambda_dual, rho_star })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MiqpConstants {
    pub kkt_bases: usize,
    #[serde(with = "serde_rat")]
    pub beta_bar: Rational,
    #[serde(with = "serde_rat")]
    pub q_frob: Rational,
    #[serde(with = "serde_rat")]
    pub c_norm: Rational,
    #[serde(with = "serde_rat")]
    pub b_norm: Rational,
    #[serde(with = "serde_rat")]
    pub a_i_frob: Rational,
    /// Euclidean bound `√n₁·M` on `x_I`.
    #[serde(with = "serde_rat")]
    pub m2: Rational,
    /// `K₁` and `K₂` for the penalty norm, i.e. with `‖u‖₂ <= c_N‖u‖` folded in.
    #[serde(with = "serde_rat")]
    pub k1: Rational,
    #[serde(with = "serde_rat")]
    pub k2: Rational,
    #[serde(with = "serde_rat")]
    pub norm_factor: Rational,
}

impl MiqpConstants {
    pub fn quantities(&self) -> Vec<Quantity> {
        use Provenance::OverRounded;
        vec![
            quantity("beta_bar", &self.beta_bar, OverRounded, "max over bases B of [[Q'_CC, -A'_C^T, A'_C^T, -I], [A'_C, 0, 0, 0]] of ||B^-1||_F"),
            quantity("K1", &self.k1, OverRounded, "c_N^2 * ||Q||_F * beta_bar^2"),
            quantity("K2", &self.k2, OverRounded, "c_N * (2(bb(||c|| + M2||Q||_F) + bb(||b|| + M2||A_I||_F))||Q||_F bb + M2||Q||_F bb + ||c|| bb)"),
        ]
    }

    /// `K₁‖u‖² + K₂‖u‖`, rounded up.
    pub fn bound(&self, u: &[Rational], norm: Norm, slack: &Rational) -> Rational {
        let r = norm.upper(u, slack);
        &self.k1 * &r * &r + &self.k2 * r
    }
}

/// `K₁`, `K₂` on the standard form, with the stacked KKT matrix
/// `Ā = [[Q'_CC, −A'_Cᵀ, A'_Cᵀ, −I], [A'_C, 0, 0, 0]]`.
pub fn miqp_constants(inst: &ProblemInstance, norm: Norm, settings: &Settings) -> Result<MiqpConstants> {
    if inst.kind() != ObjectiveKind::Quadratic {
        return Err(Error::Unsupported("MIQP constants need a quadratic objective".into()));
    }
    let m_bound = inst.require_bound("the MIQP constants")?;
    let sl = &settings.slack;
    let sf = to_standard_form(inst)?;
    let q = sf.inst.objective.q_or_zero();
    let cont = &sf.cont_cols;
    let a_c = standard_a_c(&sf);
    let a_i = sf.inst.a.select_cols(&sf.int_cols);
    let n2 = cont.len();
    let mm = a_c.rows();
    let q_cc = q.select(cont, cont);
    let a_ct = a_c.transpose();
    let neg = |m: &RatMatrix| m.scale(&-Rational::one());
    let top = RatMatrix::hstack(&[&q_cc, &neg(&a_ct), &a_ct, &neg(&RatMatrix::identity(n2))])?;
    let bottom = RatMatrix::hstack(&[
        &a_c,
        &RatMatrix::zeros(mm, mm),
        &RatMatrix::zeros(mm, mm),
        &RatMatrix::zeros(mm, n2),
    ])?;
    let a_bar = RatMatrix::vstack(&[&top, &bottom])?;
    let bases = enumerate_bases(&a_bar, settings.caps.basis_cap)?;
    let bb = beta_of(&bases, sl)?;
    let q_frob = frob_upper(&q, sl);
    let c_norm = Norm::L2.upper(&sf.inst.objective.c, sl);
    let b_norm = Norm::L2.upper(&sf.inst.b, sl);
    let a_i_frob = frob_upper(&a_i, sl);
    let n1 = sf.int_cols.len();
    let m2 = sqrt_upper(&int(n1 as i64), sl)? * Rational::from_integer(m_bound);
    let two = int(2);
    let k1_l2 = &q_frob * &bb * &bb;
    let k2_l2 = &two * (&bb * (&c_norm + &m2 * &q_frob) + &bb * (&b_norm + &m2 * &a_i_frob)) * &q_frob * &bb
        + &m2 * &q_frob * &bb
        + &c_norm * &bb;
    let cn = norm.dual().l2_factor(inst.m(), sl);
    Ok(MiqpConstants {
        kkt_bases: bases.len(),
        beta_bar: bb,
        q_frob,
        c_norm,
        b_norm,
        a_i_frob,
        m2,
        k1: &cn * &cn * k1_l2,
        k2: &cn * k2_l2,
        norm_factor: cn,
    })
}

/// Lower bound on the strong convexity modulus and upper bound on the
/// gradient Lipschitz constant, when available.
fn curvature(inst: &ProblemInstance) -> Option<(Rational, Rational)> {
    match inst.kind() {
        ObjectiveKind::Linear => None,
        ObjectiveKind::SmoothOracle => {
            let (mu, l) = inst.objective.mu_l()?;
            (mu > 0.0).then(|| (round_to_dyadic(mu, 40), round_to_dyadic(l, 40)))
        }
        ObjectiveKind::Quadratic => {
            // Gershgorin discs
            let q = inst.objective.q.as_ref()?;
            let mut lo: Option<Rational> = None;
            let mut hi: Option<Rational> = None;
            for i in 0..q.rows() {
                let off = (0..q.cols()).filter(|&j| j != i).fold(Rational::zero(), |a, j| a + q[(i, j)].abs());
                let l = &q[(i, i)] - &off;
                let h = &q[(i, i)] + &off;
                lo = Some(lo.map_or(l.clone(), |v| v.min(l)));
                hi = Some(hi.map_or(h.clone(), |v| v.max(h)));
            }
            let (lo, hi) = (lo?, hi?);
            lo.is_positive().then_some((lo, hi))
        }
    }
}

/// `f(0)` and `‖∇f(0)‖₂` (rounded up).
fn origin_data(inst: &ProblemInstance, slack: &Rational) -> (Rational, Rational) {
    let n = inst.n();
    let obj = &inst.objective;
    if obj.is_rational() {
        let zero = vec![Rational::zero(); n];
        let g = obj.gradient_exact(&zero).expect("rational objective");
        (obj.eval_exact(&zero).expect("rational objective"), Norm::L2.upper(&g, slack))
    } else {
        let zero = vec![0.0; n];
        let g: Vec<Rational> = obj.gradient_f64(&zero).iter().map(|&v| round_to_dyadic(v, 40)).collect();
        (round_to_dyadic(obj.eval_f64(&zero), 40), Norm::L2.upper(&g, slack))
    }
}

/// The explicit strongly-convex chain `Γ <= 2β(L‖x*‖ + ‖∇f(0)‖)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FormulaBound {
    #[serde(with = "serde_rat")]
    pub mu: Rational,
    #[serde(with = "serde_rat")]
    pub l: Rational,
    /// The shift `f ← f − f(0)` applied before the chain.
    #[serde(with = "serde_rat")]
    pub f0: Rational,
    #[serde(with = "serde_rat")]
    pub grad0_norm: Rational,
    #[serde(with = "serde_rat")]
    pub x_star_bound: Rational,
    #[serde(with = "serde_rat")]
    pub beta: Rational,
    /// `√f(x̄)` at the optimum after the shift; context only.
    #[serde(with = "serde_rat")]
    pub gamma_small: Rational,
    #[serde(with = "serde_rat")]
    pub gamma_formula: Rational,
}

/// `(g + √(g² + 2μz))/μ`, the radius of `{x : f(x) <= f(0) + z}` for a
/// μ-strongly convex `f` with `‖∇f(0)‖ = g`.
fn level_radius(g: &Rational, mu: &Rational, z: &Rational, slack: &Rational) -> Result<Rational> {
    let disc = g * g + int(2) * mu * z;
    let disc = if disc.is_negative() { Rational::zero() } else { disc };
    Ok((g + sqrt_upper(&disc, slack)?) / mu)
}

fn formula_bound(inst: &ProblemInstance, z_ip: &Rational, norm: Norm, settings: &Settings) -> Result<FormulaBound> {
    let (mu, l) = curvature(inst).ok_or_else(|| {
        Error::Unsupported("the explicit bound needs a strong convexity certificate (mu > 0)".into())
    })?;
    let sl = &settings.slack;
    let (f0, g) = origin_data(inst, sl);
    let z = z_ip - &f0;
    let x_star_bound = level_radius(&g, &mu, &z, sl)?;
    let cont = inst.continuous();
    let (e, _) = inst.inequality_system();
    let a_ct = inst.a.select_cols(&cont).transpose();
    let e_ct = e.select_cols(&cont).transpose();
    let m = RatMatrix::hstack(&[&a_ct, &a_ct.scale(&-Rational::one()), &e_ct.scale(&-Rational::one())])?;
    let subs = enumerate_invertible_submatrices(&m, settings.caps.basis_cap)?;
    let beta = if subs.is_empty() { Rational::zero() } else { beta_of(&subs, sl)? };
    let cn = norm.dual().l2_factor(inst.m(), sl);
    let gamma_formula = int(2) * &beta * (&l * &x_star_bound + &g) * cn;
    let gamma_small = if z.is_positive() { sqrt_upper(&z, sl)? } else { Rational::zero() };
    Ok(FormulaBound {
        mu,
        l,
        f0,
        grad0_norm: g,
        x_star_bound,
        beta,
        gamma_small,
        gamma_formula,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MicpConstants {
    /// "given" or how the box was derived.
    pub box_source: String,
    #[serde(serialize_with = "ser_int")]
    pub box_radius: Int,
    /// Integer points attaining `φ(0)`.
    #[serde(serialize_with = "ser_int_rows")]
    pub optimal_points: Vec<Vec<Int>>,
    /// `max_j ‖λ^(j)_A‖*` over those points.
    #[serde(with = "serde_rat")]
    pub gamma_direct: Rational,
    pub formula: Option<FormulaBound>,
    pub formula_note: String,
    pub delta: DeltaCertificate,
    #[serde(with = "serde_rat")]
    pub lambda_dual: Rational,
    #[serde(with = "serde_rat")]
    pub gap: Rational,
    #[serde(with = "serde_rat")]
    pub rho_star: Rational,
    pub exact: bool,
}

fn ser_int_rows<S: serde::Serializer>(v: &[Vec<Int>], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|r| r.iter().map(|i| i.to_string()).collect::<Vec<_>>()))
}

impl MicpConstants {
    pub fn quantities(&self) -> Vec<Quantity> {
        let p = if self.exact { Provenance::OverRounded } else { Provenance::Approximate };
        let mut out = vec![quantity("gamma_direct", &self.gamma_direct, p, "max over optimal x_I of ||lambda_A^(j)||_*")];
        if let Some(f) = &self.formula {
            out.push(quantity("gamma_formula", &f.gamma_formula, p, "2 beta (L ||x*|| + ||grad f(0)||) c_N"));
        }
        out.push(quantity("delta", &self.delta.delta, Provenance::SamplingCertified, "largest 2^-k passing the neighbourhood probe"));
        out.push(quantity("rho_star", &self.rho_star, Provenance::SamplingCertified, "max(gamma_direct, ||lambda_A||_* + (z_IP - z_R)/delta)"));
        out
    }
}

/// A sampled neighbourhood of 0 on which the restricted-value structure
/// was verified.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaCertificate {
    #[serde(with = "serde_rat")]
    pub delta: Rational,
    #[serde(with = "serde_rat")]
    pub spacing: Rational,
    /// Samples inside the certified ball.
    pub samples: usize,
    /// True when the grid enumerates every reachable u, so the
    /// certificate is exact rather than sampled.
    pub exhaustive: bool,
}

fn tie_tolerance(settings: &Settings) -> f64 {
    100.0 * settings.tol
}

fn attains(a: &ExtValue, b: &ExtValue, tol: f64) -> bool {
    match (a, b) {
        (ExtValue::Exact(x), ExtValue::Exact(y)) => x == y,
        _ if a.is_finite() && b.is_finite() => (a.to_f64() - b.to_f64()).abs() <= tol * (1.0 + b.to_f64().abs()),
        _ => a == b,
    }
}

/// Integer points whose restricted value at `u` attains `φ(u)`.
fn optimal_points(sample: &ValueSample, tol: f64) -> Vec<Vec<Int>> {
    sample
        .restricted
        .iter()
        .filter(|r| r.phi.is_finite() && attains(&r.phi, &sample.phi, tol))
        .map(|r| r.x_i.clone())
        .collect()
}

/// The restricted grid used by the δ probes, radius 1.
fn restricted_grid(inst: &ProblemInstance, norm: Norm, pitch: &Rational, settings: &Settings) -> Result<UGrid> {
    let base = build_grid(inst, &Rational::one(), Some(pitch), norm, &Settings {
        caps: crate::Caps { grid_cap: settings.caps.grid_cap, ..settings.caps.clone() },
        ..settings.clone()
    });
    // build_grid already solved φ; redo the points with their restricted tables
    let grid = base?;
    let points: Vec<Vec<Rational>> = grid.samples.iter().map(|s| s.u.clone()).collect();
    let samples = points
        .par_iter()
        .map(|u| phi_restricted(inst, u, settings))
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(UGrid { samples, ..grid })
}

/// Largest `δ = 2^-k` such that every sample `u` in `N_δ(0)` with
/// `φ(u) <= φ(0)` attains `φ(u)` at a point of `S_=^0` and passes `extra`.
fn certify_delta<F>(grid: &UGrid, s0: &[Vec<Int>], norm: Norm, settings: &Settings, extra: F) -> Result<DeltaCertificate>
where
    F: Fn(&ValueSample) -> bool,
{
    let phi0 = grid.at_zero().ok_or_else(|| Error::Precondition("u = 0 is not sampled".into()))?.phi.clone();
    let tol = tie_tolerance(settings);
    let exhaustive = grid.mode == crate::valuefn::GridMode::ExactEnumeration;
    let mut delta = Rational::one();
    loop {
        let inside: Vec<&ValueSample> = grid.feasible().filter(|s| norm.le(&s.u, &delta)).collect();
        let ok = inside.iter().all(|s| {
            let in_ubar = s.phi <= phi0 || attains(&s.phi, &phi0, tol);
            let structural = !in_ubar || optimal_points(s, tol).iter().any(|p| s0.contains(p));
            structural && extra(s)
        });
        if ok {
            return Ok(DeltaCertificate {
                delta,
                spacing: grid.spacing.clone(),
                samples: inside.len(),
                exhaustive,
            });
        }
        delta /= int(2);
        if !exhaustive && delta < grid.spacing {
            return Err(Error::Precondition(format!(
                "no radius 2^-k >= {} passed the neighbourhood probe",
                grid.spacing
            )));
        }
    }
}

/// Box radius for the multiplier path: M when given, otherwise derived
/// from the recession condition.
fn box_for(inst: &ProblemInstance, settings: &Settings) -> Result<(Int, String)> {
    if let Some(r) = inst.box_radius() {
        return Ok((r, "given".into()));
    }
    let rec = check_recession_condition(inst)?;
    if !rec.holds {
        let d = rec
            .certificate
            .map(|d| d.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", "))
            .unwrap_or_default();
        return Err(Error::HypothesisViolated(format!(
            "M is absent and the objective and relaxed feasible set share the direction of recession ({d})"
        )));
    }
    let sol = solve_mip(inst, settings)?;
    let z_ip = match (sol.status, &sol.z) {
        (MipStatus::Optimal, z) => finite(z, "z_IP")?,
        _ => return Err(Error::Unsupported(format!("{} has no finite optimum", inst.name))),
    };
    if let Some((mu, _)) = curvature(inst) {
        let (f0, g) = origin_data(inst, &settings.slack);
        let r = level_radius(&g, &mu, &(&z_ip - f0), &settings.slack)?;
        return Ok((r.floor().to_integer(), format!("level set of radius {r} (strong convexity)")));
    }
    if inst.kind() != ObjectiveKind::Linear {
        return Err(Error::Unsupported(
            "deriving a box without M needs a linear objective or a strong convexity certificate".into(),
        ));
    }
    // max |x_j| over X_R ∩ {cᵀx <= z_IP} ∩ {‖b − Ax‖∞ <= 1}
    let n = inst.n();
    let (mut a_in, mut b_in) = inst.inequality_system();
    a_in.push_row(inst.objective.c.clone());
    b_in.push(&z_ip - &inst.objective.offset);
    for i in 0..inst.m() {
        a_in.push_row(inst.a.row(i).to_vec());
        b_in.push(&inst.b[i] + Rational::one());
        a_in.push_row(inst.a.row(i).iter().map(|v| -v).collect());
        b_in.push(-&inst.b[i] + Rational::one());
    }
    let mut radius = Rational::zero();
    for &j in &inst.integer {
        for s in [1i64, -1] {
            let mut c = vec![Rational::zero(); n];
            c[j] = int(-s);
            let lp = LinearProgram {
                c,
                a_eq: RatMatrix::zeros(0, n),
                b_eq: vec![],
                a_in: a_in.clone(),
                b_in: b_in.clone(),
            };
            let sol = solve_lp(&lp);
            if sol.status != LpStatus::Optimal {
                return Err(Error::HypothesisViolated("the level set is unbounded".into()));
            }
            radius = radius.max(sol.z.abs());
        }
    }
    Ok((radius.floor().to_integer(), format!("linear level set within the unit residual slab, radius {radius}")))
}

/// Multiplier-based Γ over the optimal integer points at `u = 0`, the
/// explicit strongly-convex bound when available, a sampled δ, and ρ*.
pub fn micp_constants(
    inst: &ProblemInstance,
    relax: &Relaxation,
    norm: Norm,
    pitch: &Rational,
    settings: &Settings,
) -> Result<MicpConstants> {
    let (r, box_source) = box_for(inst, settings)?;
    let mut boxed = inst.clone();
    boxed.m_bound = Some(Rational::from_integer(r.clone()));
    let tol = tie_tolerance(settings);
    let table = restricted_table(&boxed, settings)?;
    let phi0 = table
        .iter()
        .map(|t| t.z.clone())
        .fold(ExtValue::PosInf, |a, b| if b < a { b } else { a });
    let z_ip = finite(&phi0, "phi(0)")?;
    let optimal: Vec<_> = table.iter().filter(|t| attains(&t.z, &phi0, tol)).collect();
    let sl = &settings.slack;
    let gamma_direct = optimal
        .iter()
        .map(|t| norm.dual().upper(&t.lambda_a, sl))
        .max()
        .unwrap_or_else(Rational::zero);
    let (formula, formula_note) = match formula_bound(&boxed, &z_ip, norm, settings) {
        Ok(f) => {
            let note = if f.grad0_norm.is_zero() {
                "gradient vanishes at 0; the big-O form degenerates, the unsimplified chain is used".into()
            } else {
                "unsimplified chain".into()
            };
            (Some(f), note)
        }
        Err(e) => (None, e.to_string()),
    };
    let s0: Vec<Vec<Int>> = optimal.iter().map(|t| t.x_i.clone()).collect();
    let grid = restricted_grid(&boxed, norm, pitch, settings)?;
    let delta = certify_delta(&grid, &s0, norm, settings, |_| true)?;
    let z_r = finite(&relax.z, "the relaxation value")?;
    let gap = &z_ip - &z_r;
    let lambda_dual = norm.dual().upper(&relax.lambda_a, sl);
    let rho_star = threshold_rho(&gamma_direct, &lambda_dual, &gap, &delta.delta);
    Ok(MicpConstants {
        box_source,
        box_radius: r,
        optimal_points: s0,
        gamma_direct,
        formula,
        formula_note,
        delta,
        lambda_dual,
        gap,
        rho_star,
        exact: inst.objective.is_rational(),
    })
}

/// MIQP threshold: `Γ = K₁δ + K₂` on a sampled δ where the quadratic bound
/// and the restricted-value structure both hold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MiqpThreshold {
    pub constants: MiqpConstants,
    pub delta: DeltaCertificate,
    #[serde(with = "serde_rat")]
    pub gamma: Rational,
    #[serde(with = "serde_rat")]
    pub lambda_dual: Rational,
    #[serde(with = "serde_rat")]
    pub gap: Rational,
    #[serde(with = "serde_rat")]
    pub rho_star: Rational,
}

impl MiqpThreshold {
    pub fn quantities(&self) -> Vec<Quantity> {
        let mut q = self.constants.quantities();
        q.push(quantity("delta", &self.delta.delta, Provenance::SamplingCertified, "largest 2^-k passing the quadratic-bound probe"));
        q.push(quantity("gamma", &self.gamma, Provenance::SamplingCertified, "K1 delta + K2"));
        q.push(quantity("rho_star", &self.rho_star, Provenance::SamplingCertified, "max(gamma, ||lambda_A||_* + (z_IP - z_R)/delta)"));
        q
    }
}

pub fn miqp_threshold(
    inst: &ProblemInstance,
    relax: &Relaxation,
    norm: Norm,
    pitch: &Rational,
    settings: &Settings,
) -> Result<MiqpThreshold> {
    let constants = miqp_constants(inst, norm, settings)?;
    let grid = restricted_grid(inst, norm, pitch, settings)?;
    let z0 = grid.at_zero().ok_or_else(|| Error::Precondition("u = 0 is not sampled".into()))?;
    let z_ip = finite(&z0.phi, "phi(0)")?;
    let s0 = optimal_points(z0, tie_tolerance(settings));
    let sl = settings.slack.clone();
    let delta = certify_delta(&grid, &s0, norm, settings, |s| match s.phi.exact() {
        Some(p) => (p - &z_ip).abs() <= constants.bound(&s.u, norm, &sl),
        None => false,
    })?;
    let gamma = &constants.k1 * &delta.delta + &constants.k2;
    let z_r = finite(&relax.z, "the relaxation value")?;
    let gap = &z_ip - &z_r;
    let lambda_dual = norm.dual().upper(&relax.lambda_a, &settings.slack);
    let rho_star = threshold_rho(&gamma, &lambda_dual, &gap, &delta.delta);
    Ok(MiqpThreshold { constants, delta, gamma, lambda_dual, gap, rho_star })
}
