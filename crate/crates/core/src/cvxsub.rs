//! Continuous convex subproblems: an exact active-set QP solver and a
//! projected-gradient method for registered smooth objectives.

use itertools::Itertools;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactnum::{round_to_dyadic, serde_rat, to_f64, Rational};
use crate::lpsolve::{solve_lp, LinearProgram, LpStatus};
use crate::model::ObjectiveDescriptor;
use crate::ratlinalg::{dot, null_space, rank, solve_particular, RatMatrix};

/// `min ½xᵀQx + cᵀx  s.t.  a_eq x = b_eq,  a_in x <= b_in`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticProgram {
    pub q: RatMatrix,
    pub c: Vec<Rational>,
    pub a_eq: RatMatrix,
    pub b_eq: Vec<Rational>,
    pub a_in: RatMatrix,
    pub b_in: Vec<Rational>,
}

impl QuadraticProgram {
    pub fn n(&self) -> usize {
        self.c.len()
    }

    pub fn objective(&self, x: &[Rational]) -> Rational {
        let half = Rational::new(1.into(), 2.into());
        half * dot(x, &self.q.mul_vec(x)) + dot(&self.c, x)
    }

    pub fn as_lp(&self) -> LinearProgram {
        LinearProgram {
            c: self.c.clone(),
            a_eq: self.a_eq.clone(),
            b_eq: self.b_eq.clone(),
            a_in: self.a_in.clone(),
            b_in: self.b_in.clone(),
        }
    }

    pub fn is_feasible(&self, x: &[Rational]) -> bool {
        self.as_lp().is_feasible(x)
    }
}

/// Multipliers with `Qx + c = Aᵀλ_A − Gᵀλ_E`, `λ_E >= 0`, zero off the active set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KktPoint {
    #[serde(with = "serde_rat::vec")]
    pub x: Vec<Rational>,
    #[serde(with = "serde_rat::vec")]
    pub lambda_a: Vec<Rational>,
    #[serde(with = "serde_rat::vec")]
    pub lambda_e: Vec<Rational>,
    pub active_set: Vec<usize>,
}

impl KktPoint {
    /// Exact re-check of stationarity, feasibility and complementarity.
    pub fn verify(&self, qp: &QuadraticProgram) -> bool {
        let grad: Vec<Rational> = qp
            .q
            .mul_vec(&self.x)
            .iter()
            .zip(&qp.c)
            .map(|(a, b)| a + b)
            .collect();
        let rhs_a = qp.a_eq.tmul_vec(&self.lambda_a);
        let rhs_e = qp.a_in.tmul_vec(&self.lambda_e);
        let stationary = (0..qp.n()).all(|j| grad[j] == &rhs_a[j] - &rhs_e[j]);
        let gx = qp.a_in.mul_vec(&self.x);
        let comp = (0..qp.a_in.rows()).all(|i| {
            !self.lambda_e[i].is_negative() && ((&qp.b_in[i] - &gx[i]) * &self.lambda_e[i]).is_zero()
        });
        stationary && comp && qp.is_feasible(&self.x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum QpStatus {
    Optimal,
    Infeasible,
    /// Unbounded below along a feasible ray.
    Unattained,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QpSolution {
    pub status: QpStatus,
    #[serde(with = "serde_rat")]
    pub z: Rational,
    pub kkt: Option<KktPoint>,
    /// Descent ray for `Unattained`.
    #[serde(with = "serde_rat::option_vec")]
    pub ray: Option<Vec<Rational>>,
}

impl QpSolution {
    pub fn x(&self) -> Option<&[Rational]> {
        self.kkt.as_ref().map(|k| k.x.as_slice())
    }
}

fn count_subsets(p: usize, kmax: usize) -> u128 {
    let mut total: u128 = 0;
    let mut binom: u128 = 1;
    for k in 0..=kmax.min(p) {
        total = total.saturating_add(binom);
        binom = binom.saturating_mul((p - k) as u128) / (k as u128 + 1);
    }
    total
}

/// Solves the KKT system with inequality rows `active` held tight.
pub fn kkt_for_active_set(qp: &QuadraticProgram, active: &[usize]) -> Option<KktPoint> {
    let n = qp.n();
    let m = qp.a_eq.rows();
    let k = active.len();
    let dim = n + m + k;
    let mut sys = RatMatrix::zeros(n + m + k, dim);
    let mut rhs = vec![Rational::zero(); n + m + k];
    for i in 0..n {
        for j in 0..n {
            sys[(i, j)] = qp.q[(i, j)].clone();
        }
        for r in 0..m {
            sys[(i, n + r)] = -&qp.a_eq[(r, i)];
        }
        for (s, &r) in active.iter().enumerate() {
            sys[(i, n + m + s)] = qp.a_in[(r, i)].clone();
        }
        rhs[i] = -&qp.c[i];
    }
    for r in 0..m {
        for j in 0..n {
            sys[(n + r, j)] = qp.a_eq[(r, j)].clone();
        }
        rhs[n + r] = qp.b_eq[r].clone();
    }
    for (s, &r) in active.iter().enumerate() {
        for j in 0..n {
            sys[(n + m + s, j)] = qp.a_in[(r, j)].clone();
        }
        rhs[n + m + s] = qp.b_in[r].clone();
    }
    let sol = solve_particular(&sys, &rhs)?;
    let mu = &sol[n + m..];
    if mu.iter().any(Signed::is_negative) {
        return None;
    }
    let x = sol[..n].to_vec();
    if !qp.is_feasible(&x) {
        return None;
    }
    let mut lambda_e = vec![Rational::zero(); qp.a_in.rows()];
    for (s, &r) in active.iter().enumerate() {
        lambda_e[r] = mu[s].clone();
    }
    Some(KktPoint {
        x,
        lambda_a: sol[n..n + m].to_vec(),
        lambda_e,
        active_set: active.to_vec(),
    })
}

/// Feasibility and descent-ray pre-checks shared by the QP solvers.
fn qp_prechecks(qp: &QuadraticProgram) -> Option<QpSolution> {
    let n = qp.n();
    let mut feas = qp.as_lp();
    feas.c = vec![Rational::zero(); n];
    if solve_lp(&feas).status == LpStatus::Infeasible {
        return Some(QpSolution {
            status: QpStatus::Infeasible,
            z: Rational::zero(),
            kkt: None,
            ray: None,
        });
    }
    // a ray d with Ad = 0, Gd <= 0, Qd = 0, cᵀd < 0 inside the unit box
    let mut a_eq = qp.a_eq.clone();
    for i in 0..n {
        if qp.q.row(i).iter().any(|v| !v.is_zero()) {
            a_eq.push_row(qp.q.row(i).to_vec());
        }
    }
    let mut a_in = qp.a_in.clone();
    let mut b_in = vec![Rational::zero(); qp.a_in.rows()];
    for j in 0..n {
        for s in [1i64, -1] {
            let mut row = vec![Rational::zero(); n];
            row[j] = Rational::from_integer(s.into());
            a_in.push_row(row);
            b_in.push(Rational::from_integer(1.into()));
        }
    }
    let ray_lp = LinearProgram {
        c: qp.c.clone(),
        b_eq: vec![Rational::zero(); a_eq.rows()],
        a_eq,
        a_in,
        b_in,
    };
    let r = solve_lp(&ray_lp);
    if r.status == LpStatus::Optimal && r.z.is_negative() {
        return Some(QpSolution {
            status: QpStatus::Unattained,
            z: Rational::zero(),
            kkt: None,
            ray: Some(r.x),
        });
    }
    None
}

fn best_of(qp: &QuadraticProgram, subsets: Vec<Vec<usize>>) -> Option<(Rational, KktPoint)> {
    subsets
        .into_par_iter()
        .filter_map(|s| kkt_for_active_set(qp, &s).map(|k| (qp.objective(&k.x), k)))
        .min_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.active_set.cmp(&b.1.active_set)))
}

/// Exact global minimizer: a primal active-set method from a feasible
/// point, falling back to enumeration of active sets when it stalls.
/// `cap` bounds the iterations and the fallback enumeration.
pub fn solve_qp(qp: &QuadraticProgram, cap: u64) -> Result<QpSolution> {
    if let Some(pre) = qp_prechecks(qp) {
        return Ok(pre);
    }
    let mut feas = qp.as_lp();
    feas.c = vec![Rational::zero(); qp.n()];
    let start = solve_lp(&feas).x;
    if let Some(kkt) = active_set(qp, start, cap) {
        return Ok(QpSolution {
            status: QpStatus::Optimal,
            z: qp.objective(&kkt.x),
            kkt: Some(kkt),
            ray: None,
        });
    }
    solve_qp_enumerate(qp, cap)
}

/// Rows of `a_eq` followed by the working inequality rows.
fn working_matrix(qp: &QuadraticProgram, w: &[usize]) -> RatMatrix {
    let mut c = qp.a_eq.clone();
    for &i in w {
        c.push_row(qp.a_in.row(i).to_vec());
    }
    c
}

/// Primal active-set iterations on the null space of the working set.
/// `None` when the iteration cap is reached.
fn active_set(qp: &QuadraticProgram, start: Vec<Rational>, cap: u64) -> Option<KktPoint> {
    let n = qp.n();
    let m = qp.a_eq.rows();
    let p = qp.a_in.rows();
    let mut x = start;
    let mut w: Vec<usize> = vec![];
    let ax = qp.a_in.mul_vec(&x);
    let mut rk = rank(&qp.a_eq);
    for i in 0..p {
        if ax[i] == qp.b_in[i] {
            w.push(i);
            let r = rank(&working_matrix(qp, &w));
            if r > rk {
                rk = r;
            } else {
                w.pop();
            }
        }
    }
    for _ in 0..cap {
        let g: Vec<Rational> = qp.q.mul_vec(&x).iter().zip(&qp.c).map(|(a, b)| a + b).collect();
        let z = null_space(&working_matrix(qp, &w));
        // p = Zy with ZᵀQZ y = −Zᵀg, or a descent ray Zv, v ∈ ker(ZᵀQZ)
        let (dir, full) = if z.cols() == 0 {
            (vec![Rational::zero(); n], true)
        } else {
            let zt = z.transpose();
            let h = zt.mul(&qp.q).ok()?.mul(&z).ok()?;
            let r = zt.mul_vec(&g);
            let neg_r: Vec<Rational> = r.iter().map(|v| -v).collect();
            match solve_particular(&h, &neg_r) {
                Some(y) => (z.mul_vec(&y), true),
                None => {
                    let kh = null_space(&h);
                    let coef = kh.tmul_vec(&r);
                    let v: Vec<Rational> = kh.mul_vec(&coef).iter().map(|v| -v).collect();
                    (z.mul_vec(&v), false)
                }
            }
        };
        if full && dir.iter().all(Zero::is_zero) {
            // g = A_eqᵀλ_A − A_Wᵀλ_W
            let mut cols = RatMatrix::zeros(n, m + w.len());
            for j in 0..n {
                for r in 0..m {
                    cols[(j, r)] = qp.a_eq[(r, j)].clone();
                }
                for (s, &i) in w.iter().enumerate() {
                    cols[(j, m + s)] = -&qp.a_in[(i, j)];
                }
            }
            let mult = solve_particular(&cols, &g)?;
            let drop = (0..w.len())
                .filter(|&s| mult[m + s].is_negative())
                .min_by(|&a, &b| mult[m + a].cmp(&mult[m + b]).then(w[a].cmp(&w[b])));
            match drop {
                Some(s) => {
                    w.remove(s);
                }
                None => {
                    let mut lambda_e = vec![Rational::zero(); p];
                    for (s, &i) in w.iter().enumerate() {
                        lambda_e[i] = mult[m + s].clone();
                    }
                    let mut active = w.clone();
                    active.sort_unstable();
                    return Some(KktPoint {
                        x,
                        lambda_a: mult[..m].to_vec(),
                        lambda_e,
                        active_set: active,
                    });
                }
            }
            continue;
        }
        let ap = qp.a_in.mul_vec(&dir);
        let ax = qp.a_in.mul_vec(&x);
        let mut alpha = full.then(|| Rational::from_integer(1.into()));
        let mut block = None;
        for i in (0..p).filter(|i| !w.contains(i)) {
            if ap[i].is_positive() {
                let a = (&qp.b_in[i] - &ax[i]) / &ap[i];
                if alpha.as_ref().is_none_or(|al| &a < al) {
                    alpha = Some(a);
                    block = Some(i);
                }
            }
        }
        let alpha = alpha?;
        for (xj, dj) in x.iter_mut().zip(&dir) {
            *xj += &alpha * dj;
        }
        if let Some(i) = block {
            w.push(i);
        }
    }
    None
}

/// Exact global minimizer by enumeration of active sets of size at most n.
pub fn solve_qp_enumerate(qp: &QuadraticProgram, cap: u64) -> Result<QpSolution> {
    let p = qp.a_in.rows();
    let kmax = qp.n().min(p);
    let count = count_subsets(p, kmax);
    if count > cap as u128 {
        return Err(Error::limit("active-set enumeration", count, cap));
    }
    if let Some(pre) = qp_prechecks(qp) {
        return Ok(pre);
    }
    let subsets: Vec<Vec<usize>> = (0..=kmax).flat_map(|k| (0..p).combinations(k)).collect();
    match best_of(qp, subsets) {
        Some((z, kkt)) => Ok(QpSolution {
            status: QpStatus::Optimal,
            z,
            kkt: Some(kkt),
            ray: None,
        }),
        None => Err(Error::DegenerateMatrix(
            "feasible bounded QP without a KKT point among enumerated active sets".into(),
        )),
    }
}

/// Every subset of the inequality rows, no pruning. Test oracle only.
pub fn solve_qp_exhaustive(qp: &QuadraticProgram) -> QpSolution {
    if let Some(pre) = qp_prechecks(qp) {
        return pre;
    }
    let p = qp.a_in.rows();
    let subsets: Vec<Vec<usize>> = (0..=p).flat_map(|k| (0..p).combinations(k)).collect();
    let (z, kkt) = best_of(qp, subsets).expect("bounded feasible QP has a KKT point");
    QpSolution {
        status: QpStatus::Optimal,
        z,
        kkt: Some(kkt),
        ray: None,
    }
}

/// Registered smooth convex functions for oracle objectives.
pub mod oracles {
    pub trait SmoothFunction: Send + Sync {
        fn name(&self) -> &'static str;
        fn description(&self) -> &'static str;
        fn value(&self, x: &[f64]) -> f64;
        fn gradient(&self, x: &[f64]) -> Vec<f64>;
        /// Strong convexity modulus.
        fn mu(&self) -> f64;
        /// Gradient Lipschitz constant.
        fn lipschitz(&self) -> f64;
    }

    pub struct SumOfSquares;
    pub struct SoftplusRidge;
    pub struct LogCosh;
    pub struct Zero;

    const RIDGE: f64 = 0.05;

    impl SmoothFunction for SumOfSquares {
        fn name(&self) -> &'static str {
            "sum-of-squares"
        }
        fn description(&self) -> &'static str {
            "‖x‖²"
        }
        fn value(&self, x: &[f64]) -> f64 {
            x.iter().map(|v| v * v).sum()
        }
        fn gradient(&self, x: &[f64]) -> Vec<f64> {
            x.iter().map(|v| 2.0 * v).collect()
        }
        fn mu(&self) -> f64 {
            2.0
        }
        fn lipschitz(&self) -> f64 {
            2.0
        }
    }

    fn softplus(t: f64) -> f64 {
        t.max(0.0) + (-t.abs()).exp().ln_1p()
    }

    fn sigmoid(t: f64) -> f64 {
        if t >= 0.0 {
            1.0 / (1.0 + (-t).exp())
        } else {
            let e = t.exp();
            e / (1.0 + e)
        }
    }

    impl SmoothFunction for SoftplusRidge {
        fn name(&self) -> &'static str {
            "softplus-ridge"
        }
        fn description(&self) -> &'static str {
            "Σ ln(1 + exp(x_i)) + 0.05‖x‖², logistic-like"
        }
        fn value(&self, x: &[f64]) -> f64 {
            x.iter().map(|&v| softplus(v) + RIDGE * v * v).sum()
        }
        fn gradient(&self, x: &[f64]) -> Vec<f64> {
            x.iter().map(|&v| sigmoid(v) + 2.0 * RIDGE * v).collect()
        }
        fn mu(&self) -> f64 {
            2.0 * RIDGE
        }
        fn lipschitz(&self) -> f64 {
            0.25 + 2.0 * RIDGE
        }
    }

    impl SmoothFunction for LogCosh {
        fn name(&self) -> &'static str {
            "log-cosh"
        }
        fn description(&self) -> &'static str {
            "Σ ln cosh(x_i)"
        }
        fn value(&self, x: &[f64]) -> f64 {
            x.iter()
                .map(|&v| v.abs() + (-2.0 * v.abs()).exp().ln_1p() - std::f64::consts::LN_2)
                .sum()
        }
        fn gradient(&self, x: &[f64]) -> Vec<f64> {
            x.iter().map(|&v| v.tanh()).collect()
        }
        fn mu(&self) -> f64 {
            0.0
        }
        fn lipschitz(&self) -> f64 {
            1.0
        }
    }

    impl SmoothFunction for Zero {
        fn name(&self) -> &'static str {
            "zero"
        }
        fn description(&self) -> &'static str {
            "0, so the objective is its linear term"
        }
        fn value(&self, _x: &[f64]) -> f64 {
            0.0
        }
        fn gradient(&self, x: &[f64]) -> Vec<f64> {
            vec![0.0; x.len()]
        }
        fn mu(&self) -> f64 {
            0.0
        }
        fn lipschitz(&self) -> f64 {
            1.0
        }
    }

    static REGISTRY: [&dyn SmoothFunction; 4] = [&SumOfSquares, &SoftplusRidge, &LogCosh, &Zero];

    pub fn all() -> &'static [&'static dyn SmoothFunction] {
        &REGISTRY
    }

    pub fn lookup(name: &str) -> Option<&'static dyn SmoothFunction> {
        REGISTRY.iter().copied().find(|f| f.name() == name)
    }

    pub fn names() -> Vec<&'static str> {
        REGISTRY.iter().map(|f| f.name()).collect()
    }
}

/// Max relative deviation between central differences and a gradient.
pub fn gradient_check_fn<F, G>(value: F, gradient: G, points: &[Vec<f64>], h: f64) -> f64
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> Vec<f64>,
{
    let mut worst: f64 = 0.0;
    for x in points {
        let g = gradient(x);
        let mut probe = x.clone();
        for j in 0..x.len() {
            probe[j] = x[j] + h;
            let up = value(&probe);
            probe[j] = x[j] - h;
            let down = value(&probe);
            probe[j] = x[j];
            let fd = (up - down) / (2.0 * h);
            worst = worst.max((fd - g[j]).abs() / g[j].abs().max(1.0));
        }
    }
    worst
}

pub fn gradient_check(f: &dyn oracles::SmoothFunction, points: &[Vec<f64>], h: f64) -> f64 {
    gradient_check_fn(|x| f.value(x), |x| f.gradient(x), points, h)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmoothSolution {
    /// Exactly feasible rational iterate.
    #[serde(skip)]
    pub x_exact: Vec<Rational>,
    pub x: Vec<f64>,
    pub z: f64,
    pub gap_bound: f64,
    pub iterations: u64,
    /// Approximate multipliers in the convention of [`KktPoint`].
    pub lambda_a: Vec<f64>,
    pub lambda_e: Vec<f64>,
}

/// Frank–Wolfe gap `max_s ∇f(x)ᵀ(x − s)` over the polyhedron, or +inf.
fn frank_wolfe_gap(grad: &[f64], x: &[f64], a_eq: &RatMatrix, b_eq: &[Rational], g: &RatMatrix, h: &[Rational]) -> f64 {
    let lp = LinearProgram {
        c: grad.iter().map(|&v| round_to_dyadic(v, 40)).collect(),
        a_eq: a_eq.clone(),
        b_eq: b_eq.to_vec(),
        a_in: g.clone(),
        b_in: h.to_vec(),
    };
    let s = solve_lp(&lp);
    if s.status != LpStatus::Optimal {
        return f64::INFINITY;
    }
    let s_f: Vec<f64> = s.x.iter().map(to_f64).collect();
    grad.iter()
        .zip(x.iter().zip(&s_f))
        .map(|(g, (x, s))| g * (x - s))
        .sum::<f64>()
        .max(0.0)
}

/// A smooth convex function given by evaluation closures.
pub struct SmoothObjective<'a> {
    pub n: usize,
    pub mu: f64,
    pub l: f64,
    pub value: Box<dyn Fn(&[f64]) -> f64 + Sync + 'a>,
    pub gradient: Box<dyn Fn(&[f64]) -> Vec<f64> + Sync + 'a>,
}

impl<'a> SmoothObjective<'a> {
    pub fn from_descriptor(obj: &'a ObjectiveDescriptor) -> Result<Self> {
        let (mu, l) = obj
            .mu_l()
            .ok_or_else(|| Error::arg("smooth solves need an oracle objective"))?;
        Ok(SmoothObjective {
            n: obj.dim(),
            mu,
            l,
            value: Box::new(move |x| obj.eval_f64(x)),
            gradient: Box::new(move |x| obj.gradient_f64(x)),
        })
    }
}

/// [`solve_smooth_objective`] for an oracle objective descriptor.
#[allow(clippy::too_many_arguments)]
pub fn solve_smooth(
    obj: &ObjectiveDescriptor,
    a_eq: &RatMatrix,
    b_eq: &[Rational],
    g: &RatMatrix,
    h: &[Rational],
    tol: f64,
    iter_cap: u64,
    qp_cap: u64,
) -> Result<SmoothSolution> {
    let f = SmoothObjective::from_descriptor(obj)?;
    solve_smooth_objective(&f, a_eq, b_eq, g, h, tol, iter_cap, qp_cap)
}

/// Projected gradient with step 1/L and exact projections onto
/// `{a_eq x = b_eq, g x <= h}`. Stops once the certified gap is at most `tol`.
#[allow(clippy::too_many_arguments)]
pub fn solve_smooth_objective(
    obj: &SmoothObjective,
    a_eq: &RatMatrix,
    b_eq: &[Rational],
    g: &RatMatrix,
    h: &[Rational],
    tol: f64,
    iter_cap: u64,
    qp_cap: u64,
) -> Result<SmoothSolution> {
    let (mu, l) = (obj.mu, obj.l);
    let n = obj.n;
    let feas = LinearProgram {
        c: vec![Rational::zero(); n],
        a_eq: a_eq.clone(),
        b_eq: b_eq.to_vec(),
        a_in: g.clone(),
        b_in: h.to_vec(),
    };
    let start = solve_lp(&feas);
    if start.status == LpStatus::Infeasible {
        return Err(Error::Infeasible("smooth subproblem has no feasible point".into()));
    }
    let project = |y: &[f64]| -> Result<KktPoint> {
        let qp = QuadraticProgram {
            q: RatMatrix::identity(n),
            c: y.iter().map(|&v| -round_to_dyadic(v, 40)).collect(),
            a_eq: a_eq.clone(),
            b_eq: b_eq.to_vec(),
            a_in: g.clone(),
            b_in: h.to_vec(),
        };
        let s = solve_qp(&qp, qp_cap)?;
        s.kkt.ok_or_else(|| Error::arg("projection failed"))
    };

    let mut x_exact = start.x;
    let mut x: Vec<f64> = x_exact.iter().map(to_f64).collect();
    let mut grad = (obj.gradient)(&x);
    let mut best_gap = f64::INFINITY;
    for it in 1..=iter_cap {
        let y: Vec<f64> = x.iter().zip(&grad).map(|(x, g)| x - g / l).collect();
        let kkt = project(&y)?;
        let x_new: Vec<f64> = kkt.x.iter().map(to_f64).collect();
        let grad_new = (obj.gradient)(&x_new);
        // ∇f(x⁺) = L(Aᵀν_A − Gᵀν_E) + r
        let lambda_a: Vec<f64> = kkt.lambda_a.iter().map(|v| l * to_f64(v)).collect();
        let lambda_e: Vec<f64> = kkt.lambda_e.iter().map(|v| l * to_f64(v)).collect();
        let mut gap = f64::INFINITY;
        if mu > 0.0 {
            let r_sq: f64 = (0..n)
                .map(|j| {
                    let r = grad_new[j] - grad[j] + l * (x[j] - x_new[j]);
                    r * r
                })
                .sum();
            gap = r_sq / (2.0 * mu);
        } else {
            gap = gap.min(frank_wolfe_gap(&grad_new, &x_new, a_eq, b_eq, g, h));
        }
        x_exact = kkt.x;
        x = x_new;
        grad = grad_new;
        best_gap = best_gap.min(gap);
        if gap <= tol {
            return Ok(SmoothSolution {
                x_exact,
                z: (obj.value)(&x),
                x,
                gap_bound: gap,
                iterations: it,
                lambda_a,
                lambda_e,
            });
        }
    }
    Err(Error::Unconverged { gap_bound: best_gap })
}
