//! Problem instances: validated data, objectives, standard-form transforms,
//! residuals, and the recession-cone check for unbounded integer sets.
//!
//! Objectives are stored as plain minimization of `½xᵀQx + cᵀx + offset`.
//! The `½xᵀQx − cᵀx` form used in the MIQP constants only ever enters
//! through norms of `c`, which are sign invariant.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::cvxsub::oracles;
use crate::error::{Error, Result};
use crate::exactnum::{from_f64, serde_rat, to_f64, Int, Rational};
use crate::lpsolve::{solve_lp, LinearProgram, LpStatus};
use crate::ratlinalg::{dot, vec_sub, RatMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectiveKind {
    Linear,
    Quadratic,
    SmoothOracle,
}

impl ObjectiveKind {
    pub fn name(self) -> &'static str {
        match self {
            ObjectiveKind::Linear => "linear",
            ObjectiveKind::Quadratic => "quadratic",
            ObjectiveKind::SmoothOracle => "oracle",
        }
    }
}

/// Reference to a registered smooth function plus its declared constants.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleRef {
    pub name: String,
    pub mu: f64,
    pub lipschitz: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveDescriptor {
    pub kind: ObjectiveKind,
    pub c: Vec<Rational>,
    pub q: Option<RatMatrix>,
    pub oracle: Option<OracleRef>,
    pub offset: Rational,
}

impl ObjectiveDescriptor {
    pub fn linear(c: Vec<Rational>) -> Self {
        ObjectiveDescriptor {
            kind: ObjectiveKind::Linear,
            c,
            q: None,
            oracle: None,
            offset: Rational::zero(),
        }
    }

    pub fn quadratic(q: RatMatrix, c: Vec<Rational>) -> Self {
        ObjectiveDescriptor {
            kind: ObjectiveKind::Quadratic,
            c,
            q: Some(q),
            oracle: None,
            offset: Rational::zero(),
        }
    }

    /// Registered function `name` plus the linear term `c`.
    pub fn oracle(name: &str, c: Vec<Rational>) -> Result<Self> {
        let f = oracles::lookup(name)
            .ok_or_else(|| Error::arg(format!("unknown oracle {name:?}")))?;
        Ok(ObjectiveDescriptor {
            kind: ObjectiveKind::SmoothOracle,
            c,
            q: None,
            oracle: Some(OracleRef {
                name: name.to_string(),
                mu: f.mu(),
                lipschitz: f.lipschitz(),
            }),
            offset: Rational::zero(),
        })
    }

    pub fn dim(&self) -> usize {
        self.c.len()
    }

    pub fn is_rational(&self) -> bool {
        self.kind != ObjectiveKind::SmoothOracle
    }

    /// `Q`, or the zero matrix for linear objectives.
    pub fn q_or_zero(&self) -> RatMatrix {
        self.q
            .clone()
            .unwrap_or_else(|| RatMatrix::zeros(self.dim(), self.dim()))
    }

    /// The linear coefficient in the `−cᵀx` convention of the MIQP analysis.
    pub fn paper_c(&self) -> Vec<Rational> {
        self.c.iter().map(|x| -x).collect()
    }

    pub fn eval_exact(&self, x: &[Rational]) -> Option<Rational> {
        match self.kind {
            ObjectiveKind::Linear => Some(dot(&self.c, x) + &self.offset),
            ObjectiveKind::Quadratic => {
                let q = self.q.as_ref()?;
                let half = Rational::new(Int::one(), Int::from(2));
                Some(half * dot(x, &q.mul_vec(x)) + dot(&self.c, x) + &self.offset)
            }
            ObjectiveKind::SmoothOracle => None,
        }
    }

    pub fn gradient_exact(&self, x: &[Rational]) -> Option<Vec<Rational>> {
        match self.kind {
            ObjectiveKind::Linear => Some(self.c.clone()),
            ObjectiveKind::Quadratic => {
                let qx = self.q.as_ref()?.mul_vec(x);
                Some(qx.iter().zip(&self.c).map(|(a, b)| a + b).collect())
            }
            ObjectiveKind::SmoothOracle => None,
        }
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        let lin: f64 = self.c.iter().zip(x).map(|(c, x)| to_f64(c) * x).sum();
        let base = match self.kind {
            ObjectiveKind::Linear => 0.0,
            ObjectiveKind::Quadratic => {
                let q = self.q.as_ref().expect("quadratic objective has Q");
                let mut acc = 0.0;
                for i in 0..q.rows() {
                    for j in 0..q.cols() {
                        acc += 0.5 * x[i] * to_f64(&q[(i, j)]) * x[j];
                    }
                }
                acc
            }
            ObjectiveKind::SmoothOracle => self.registered().value(x),
        };
        base + lin + to_f64(&self.offset)
    }

    pub fn gradient_f64(&self, x: &[f64]) -> Vec<f64> {
        let mut g: Vec<f64> = match self.kind {
            ObjectiveKind::Linear => vec![0.0; x.len()],
            ObjectiveKind::Quadratic => {
                let q = self.q.as_ref().expect("quadratic objective has Q");
                (0..q.rows())
                    .map(|i| (0..q.cols()).map(|j| to_f64(&q[(i, j)]) * x[j]).sum())
                    .collect()
            }
            ObjectiveKind::SmoothOracle => self.registered().gradient(x),
        };
        for (gi, c) in g.iter_mut().zip(&self.c) {
            *gi += to_f64(c);
        }
        g
    }

    /// Strong convexity and smoothness constants, when known.
    pub fn mu_l(&self) -> Option<(f64, f64)> {
        self.oracle.as_ref().map(|o| (o.mu, o.lipschitz))
    }

    fn registered(&self) -> &'static dyn oracles::SmoothFunction {
        let name = &self.oracle.as_ref().expect("oracle objective has a name").name;
        oracles::lookup(name).expect("validated oracle name")
    }

    /// The objective with `n_extra` trailing variables entering linearly.
    pub fn extended(&self, extra_c: &[Rational]) -> ObjectiveDescriptor {
        let mut out = self.clone();
        out.c.extend(extra_c.iter().cloned());
        if let Some(q) = &self.q {
            let n = q.rows() + extra_c.len();
            let mut big = RatMatrix::zeros(n, n);
            for i in 0..q.rows() {
                for j in 0..q.cols() {
                    big[(i, j)] = q[(i, j)].clone();
                }
            }
            out.q = Some(big);
        }
        out
    }
}

/// A structured validation diagnostic.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

fn violation(path: impl Into<String>, message: impl Into<String>) -> Violation {
    Violation {
        path: path.into(),
        message: message.into(),
    }
}

/// The instance file schema.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawInstance {
    #[serde(default)]
    pub name: String,
    #[serde(rename = "A", default, with = "serde_rat::matrix")]
    pub a: Vec<Vec<Rational>>,
    #[serde(default, with = "serde_rat::vec")]
    pub b: Vec<Rational>,
    #[serde(rename = "E", default, with = "serde_rat::matrix")]
    pub e: Vec<Vec<Rational>>,
    #[serde(default, with = "serde_rat::vec")]
    pub f: Vec<Rational>,
    #[serde(default)]
    pub integer_indices: Vec<usize>,
    #[serde(
        rename = "M",
        default,
        with = "serde_rat::option",
        skip_serializing_if = "Option::is_none"
    )]
    pub m: Option<Rational>,
    pub objective: RawObjective,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub attest_recession: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawObjective {
    pub kind: String,
    #[serde(with = "serde_rat::vec")]
    pub c: Vec<Rational>,
    #[serde(
        rename = "Q",
        default,
        skip_serializing_if = "Option::is_none",
        serialize_with = "ser_opt_matrix",
        deserialize_with = "de_opt_matrix"
    )]
    pub q: Option<Vec<Vec<Rational>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub l: Option<f64>,
    #[serde(
        default,
        with = "serde_rat::option",
        skip_serializing_if = "Option::is_none"
    )]
    pub offset: Option<Rational>,
}

fn ser_opt_matrix<S: serde::Serializer>(
    m: &Option<Vec<Vec<Rational>>>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match m {
        Some(m) => serde_rat::matrix::serialize(m, s),
        None => s.serialize_none(),
    }
}

fn de_opt_matrix<'de, D: serde::Deserializer<'de>>(
    d: D,
) -> std::result::Result<Option<Vec<Vec<Rational>>>, D::Error> {
    serde_rat::matrix::deserialize(d).map(Some)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    pub name: String,
    pub a: RatMatrix,
    pub b: Vec<Rational>,
    pub e: RatMatrix,
    pub f: Vec<Rational>,
    /// Sorted integer variable indices.
    pub integer: Vec<usize>,
    pub m_bound: Option<Rational>,
    pub objective: ObjectiveDescriptor,
    pub attest_recession: bool,
}

/// Exact pivoted LDLᵀ. Returns the index and value of the first negative
/// pivot, or of a zero pivot with a nonzero off-diagonal entry.
pub fn psd_witness(q: &RatMatrix) -> Option<(usize, Rational)> {
    let mut a = q.clone();
    let n = a.rows();
    let mut remaining: Vec<usize> = (0..n).collect();
    while !remaining.is_empty() {
        if let Some(&k) = remaining.iter().find(|&&k| a[(k, k)].is_negative()) {
            return Some((k, a[(k, k)].clone()));
        }
        let Some(pos) = remaining.iter().position(|&k| a[(k, k)].is_positive()) else {
            // all remaining diagonal entries vanish: the block must be zero
            for &i in &remaining {
                for &j in &remaining {
                    if !a[(i, j)].is_zero() {
                        return Some((i, Rational::zero()));
                    }
                }
            }
            return None;
        };
        let k = remaining.remove(pos);
        let d = a[(k, k)].clone();
        for &i in &remaining {
            if a[(i, k)].is_zero() {
                continue;
            }
            let li = &a[(i, k)] / &d;
            for &j in &remaining {
                let v = &a[(i, j)] - &li * &a[(k, j)];
                a[(i, j)] = v;
            }
        }
    }
    None
}

fn matrix_from(
    rows: &[Vec<Rational>],
    n: usize,
    path: &str,
    out: &mut Vec<Violation>,
) -> RatMatrix {
    let mut m = RatMatrix::zeros(0, n);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            out.push(violation(
                format!("{path}[{i}]"),
                format!("expected {n} columns, found {}", row.len()),
            ));
            m.push_row(vec![Rational::zero(); n]);
        } else {
            m.push_row(row.clone());
        }
    }
    m
}

/// Checks a raw instance and returns it in validated form.
pub fn validate(raw: &RawInstance) -> Result<ProblemInstance> {
    let mut v = Vec::new();
    let n = raw.objective.c.len();
    if n == 0 {
        v.push(violation("objective.c", "must have one entry per variable"));
    }
    let a = matrix_from(&raw.a, n, "A", &mut v);
    if raw.b.len() != raw.a.len() {
        v.push(violation(
            "b",
            format!("expected {} entries (rows of A), found {}", raw.a.len(), raw.b.len()),
        ));
    }
    let e = matrix_from(&raw.e, n, "E", &mut v);
    if raw.f.len() != raw.e.len() {
        v.push(violation(
            "f",
            format!("expected {} entries (rows of E), found {}", raw.e.len(), raw.f.len()),
        ));
    }
    let mut integer = raw.integer_indices.clone();
    for (k, &j) in raw.integer_indices.iter().enumerate() {
        if j >= n {
            v.push(violation(
                format!("integer_indices[{k}]"),
                format!("index {j} out of range for {n} variables"),
            ));
        }
    }
    integer.sort_unstable();
    if integer.windows(2).any(|w| w[0] == w[1]) {
        v.push(violation("integer_indices", "duplicate index"));
    }
    integer.retain(|&j| j < n);
    integer.dedup();
    if let Some(m) = &raw.m {
        if m.is_negative() {
            v.push(violation("M", "must be nonnegative"));
        }
    }

    let ro = &raw.objective;
    let offset = ro.offset.clone().unwrap_or_else(Rational::zero);
    let kind = match ro.kind.as_str() {
        "linear" => Some(ObjectiveKind::Linear),
        "quadratic" => Some(ObjectiveKind::Quadratic),
        "oracle" | "smooth-oracle" => Some(ObjectiveKind::SmoothOracle),
        other => {
            v.push(violation(
                "objective.kind",
                format!("unknown kind {other:?} (linear, quadratic, oracle)"),
            ));
            None
        }
    };
    let mut objective = ObjectiveDescriptor::linear(ro.c.clone());
    objective.offset = offset;
    match kind {
        Some(ObjectiveKind::Linear) => {
            if ro.q.is_some() {
                v.push(violation("objective.Q", "linear objectives take no Q"));
            }
        }
        Some(ObjectiveKind::Quadratic) => match &ro.q {
            None => v.push(violation("objective.Q", "quadratic objectives need Q")),
            Some(rows) => {
                if rows.len() != n {
                    v.push(violation(
                        "objective.Q",
                        format!("expected {n} rows, found {}", rows.len()),
                    ));
                }
                let q = matrix_from(rows, n, "objective.Q", &mut v);
                if q.rows() == n {
                    for i in 0..n {
                        for j in 0..i {
                            if q[(i, j)] != q[(j, i)] {
                                v.push(violation(
                                    format!("objective.Q[{i}][{j}]"),
                                    format!("not symmetric: {} vs {}", q[(i, j)], q[(j, i)]),
                                ));
                            }
                        }
                    }
                    if q.is_symmetric() {
                        if let Some((k, p)) = psd_witness(&q) {
                            v.push(violation(
                                "objective.Q",
                                format!("not positive semidefinite (pivot {k} = {p})"),
                            ));
                        }
                    }
                }
                objective.kind = ObjectiveKind::Quadratic;
                objective.q = Some(q);
            }
        },
        Some(ObjectiveKind::SmoothOracle) => {
            objective.kind = ObjectiveKind::SmoothOracle;
            match ro.oracle.as_deref().map(|s| (s, oracles::lookup(s))) {
                None => v.push(violation("objective.oracle", "oracle objectives need a registry name")),
                Some((name, None)) => v.push(violation(
                    "objective.oracle",
                    format!("unknown oracle {name:?}; known: {}", oracles::names().join(", ")),
                )),
                Some((name, Some(func))) => {
                    let mu = ro.mu.unwrap_or(func.mu());
                    let l = ro.l.unwrap_or(func.lipschitz());
                    if !(mu >= 0.0) {
                        v.push(violation("objective.mu", "must be nonnegative"));
                    }
                    if !(l > 0.0) {
                        v.push(violation("objective.L", "must be positive"));
                    }
                    if mu > l {
                        v.push(violation("objective.mu", format!("mu = {mu} exceeds L = {l}")));
                    }
                    if mu > func.mu() {
                        v.push(violation(
                            "objective.mu",
                            format!("{name} is only {}-strongly convex", func.mu()),
                        ));
                    }
                    if l < func.lipschitz() {
                        v.push(violation(
                            "objective.L",
                            format!("{name} has smoothness constant {}", func.lipschitz()),
                        ));
                    }
                    objective.oracle = Some(OracleRef {
                        name: name.to_string(),
                        mu,
                        lipschitz: l,
                    });
                }
            }
            if ro.q.is_some() {
                v.push(violation("objective.Q", "oracle objectives take no Q"));
            }
        }
        None => {}
    }

    if !v.is_empty() {
        return Err(Error::Invalid(v));
    }
    Ok(ProblemInstance {
        name: raw.name.clone(),
        a,
        b: raw.b.clone(),
        e,
        f: raw.f.clone(),
        integer,
        m_bound: raw.m.clone(),
        objective,
        attest_recession: raw.attest_recession,
    })
}

impl ProblemInstance {
    /// Builds and validates an instance from typed parts.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: &str,
        a: RatMatrix,
        b: Vec<Rational>,
        e: RatMatrix,
        f: Vec<Rational>,
        integer: Vec<usize>,
        m_bound: Option<Rational>,
        objective: ObjectiveDescriptor,
    ) -> Result<Self> {
        let n = objective.dim();
        let fix = |m: RatMatrix| {
            if m.rows() == 0 {
                RatMatrix::zeros(0, n)
            } else {
                m
            }
        };
        let inst = ProblemInstance {
            name: name.to_string(),
            a: fix(a),
            b,
            e: fix(e),
            f,
            integer,
            m_bound,
            objective,
            attest_recession: false,
        };
        validate(&inst.to_raw()).map(|mut v| {
            v.objective.oracle = inst.objective.oracle.clone();
            v
        })
    }

    pub fn to_raw(&self) -> RawInstance {
        let o = &self.objective;
        RawInstance {
            name: self.name.clone(),
            a: self.a.to_rows(),
            b: self.b.clone(),
            e: self.e.to_rows(),
            f: self.f.clone(),
            integer_indices: self.integer.clone(),
            m: self.m_bound.clone(),
            objective: RawObjective {
                kind: o.kind.name().to_string(),
                c: o.c.clone(),
                q: o.q.as_ref().map(|q| q.to_rows()),
                oracle: o.oracle.as_ref().map(|r| r.name.clone()),
                mu: o.oracle.as_ref().map(|r| r.mu),
                l: o.oracle.as_ref().map(|r| r.lipschitz),
                offset: (!o.offset.is_zero()).then(|| o.offset.clone()),
            },
            attest_recession: self.attest_recession,
        }
    }

    pub fn n(&self) -> usize {
        self.objective.dim()
    }

    pub fn m(&self) -> usize {
        self.a.rows()
    }

    pub fn p(&self) -> usize {
        self.e.rows()
    }

    pub fn is_integer(&self, j: usize) -> bool {
        self.integer.binary_search(&j).is_ok()
    }

    pub fn continuous(&self) -> Vec<usize> {
        (0..self.n()).filter(|&j| !self.is_integer(j)).collect()
    }

    pub fn is_pure_integer(&self) -> bool {
        self.integer.len() == self.n()
    }

    pub fn kind(&self) -> ObjectiveKind {
        self.objective.kind
    }

    /// The integer box radius `floor(M)`, when M is given.
    pub fn box_radius(&self) -> Option<Int> {
        self.m_bound.as_ref().map(|m| m.floor().to_integer())
    }

    pub fn require_bound(&self, why: &str) -> Result<Int> {
        self.box_radius().ok_or_else(|| {
            Error::Invalid(vec![violation("M", format!("required for {why}"))])
        })
    }

    /// The same instance with right-hand side `b + u`.
    pub fn perturbed(&self, u: &[Rational]) -> ProblemInstance {
        let mut out = self.clone();
        out.b = self.b.iter().zip(u).map(|(b, u)| b + u).collect();
        out
    }

    /// Inequality rows `E x <= f` followed by the box rows `±x_j <= floor(M)`.
    pub fn inequality_system(&self) -> (RatMatrix, Vec<Rational>) {
        let mut e = self.e.clone();
        let mut f = self.f.clone();
        if let Some(r) = self.box_radius() {
            let r = Rational::from_integer(r);
            for &j in &self.integer {
                for s in [1, -1] {
                    let mut row = vec![Rational::zero(); self.n()];
                    row[j] = Rational::from_integer(Int::from(s));
                    e.push_row(row);
                    f.push(r.clone());
                }
            }
        }
        (e, f)
    }

    /// The continuous relaxation as a linear program (objective `c`).
    pub fn relaxation_lp(&self) -> LinearProgram {
        let (e, f) = self.inequality_system();
        LinearProgram {
            c: self.objective.c.clone(),
            a_eq: self.a.clone(),
            b_eq: self.b.clone(),
            a_in: e,
            b_in: f,
        }
    }

    /// Exact feasibility of `x` including integrality and the box.
    pub fn is_feasible(&self, x: &[Rational]) -> bool {
        let (e, f) = self.inequality_system();
        x.len() == self.n()
            && self.a.mul_vec(x) == self.b
            && e.mul_vec(x).iter().zip(&f).all(|(l, r)| l <= r)
            && self.integer.iter().all(|&j| x[j].is_integer())
    }
}

/// `u = b − A x`, the argument of the augmenting function.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Residual {
    #[serde(with = "serde_rat::vec")]
    pub u: Vec<Rational>,
}

pub fn residual(inst: &ProblemInstance, x: &[Rational]) -> Result<Residual> {
    if x.len() != inst.n() {
        return Err(Error::arg(format!(
            "point has {} entries, instance has {} variables",
            x.len(),
            inst.n()
        )));
    }
    Ok(Residual {
        u: vec_sub(&inst.b, &inst.a.mul_vec(x)),
    })
}

/// Origin of a standard-form column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ColumnOrigin {
    Plus(usize),
    Minus(usize),
    Slack(usize),
}

/// An equivalent instance with equality rows only (plus sign constraints),
/// and the linear map back to the original variables.
#[derive(Debug, Clone)]
pub struct StandardForm {
    /// `A'x' = b'` with `x' >= 0` on the sign-constrained columns, which
    /// appear as rows `−x'_k <= 0` of `E'`.
    pub inst: ProblemInstance,
    /// The first `perturbed_rows` rows of `A'` are the original `A` rows.
    pub perturbed_rows: usize,
    pub columns: Vec<ColumnOrigin>,
    pub int_cols: Vec<usize>,
    pub cont_cols: Vec<usize>,
    /// `x = P x'`.
    pub p: RatMatrix,
}

impl StandardForm {
    pub fn map_back(&self, x_std: &[Rational]) -> Vec<Rational> {
        self.p.mul_vec(x_std)
    }
}

/// Sign-constraint rows of `E`: a single negative entry and zero right-hand side.
fn nonneg_rows(inst: &ProblemInstance) -> Vec<Option<usize>> {
    (0..inst.p())
        .map(|i| {
            let row = inst.e.row(i);
            let nz: Vec<usize> = (0..inst.n()).filter(|&j| !row[j].is_zero()).collect();
            (nz.len() == 1 && row[nz[0]].is_negative() && inst.f[i].is_zero()).then(|| nz[0])
        })
        .collect()
}

/// Splits free variables, adds slacks, and keeps a map to the original
/// variables. Linear instances split free integer variables too; quadratic
/// instances keep them, as the box `‖x_I‖∞ <= M` bounds them.
pub fn to_standard_form(inst: &ProblemInstance) -> Result<StandardForm> {
    if inst.kind() == ObjectiveKind::SmoothOracle {
        return Err(Error::Unsupported(
            "standard form is defined for linear and quadratic objectives only".into(),
        ));
    }
    let n = inst.n();
    let sign_rows = nonneg_rows(inst);
    let mut nonneg = vec![false; n];
    for j in sign_rows.iter().flatten() {
        nonneg[*j] = true;
    }
    let split_integers = inst.kind() == ObjectiveKind::Linear;
    let kept_rows: Vec<usize> = (0..inst.p()).filter(|&i| sign_rows[i].is_none()).collect();

    let ints: Vec<usize> = inst.integer.clone();
    let conts = inst.continuous();
    let mut columns = Vec::new();
    let mut signed = Vec::new();
    for &j in &ints {
        columns.push(ColumnOrigin::Plus(j));
        signed.push(nonneg[j] || split_integers);
    }
    for &j in &ints {
        if !nonneg[j] && split_integers {
            columns.push(ColumnOrigin::Minus(j));
            signed.push(true);
        }
    }
    let int_count = columns.len();
    for &j in &conts {
        columns.push(ColumnOrigin::Plus(j));
        signed.push(true);
    }
    for &j in &conts {
        if !nonneg[j] {
            columns.push(ColumnOrigin::Minus(j));
            signed.push(true);
        }
    }
    for &i in &kept_rows {
        columns.push(ColumnOrigin::Slack(i));
        signed.push(true);
    }
    let nn = columns.len();

    let mut p = RatMatrix::zeros(n, nn);
    for (k, col) in columns.iter().enumerate() {
        match *col {
            ColumnOrigin::Plus(j) => p[(j, k)] = Rational::one(),
            ColumnOrigin::Minus(j) => p[(j, k)] = -Rational::one(),
            ColumnOrigin::Slack(_) => {}
        }
    }
    let ap = inst.a.mul(&p)?;
    let ep = inst.e.mul(&p)?;
    let mut a_std = RatMatrix::zeros(0, nn);
    for i in 0..inst.m() {
        a_std.push_row(ap.row(i).to_vec());
    }
    let mut b_std = inst.b.clone();
    for &i in &kept_rows {
        let mut row = ep.row(i).to_vec();
        let slack = columns
            .iter()
            .position(|c| *c == ColumnOrigin::Slack(i))
            .expect("slack column exists");
        row[slack] = Rational::one();
        a_std.push_row(row);
        b_std.push(inst.f[i].clone());
    }
    let mut e_std = RatMatrix::zeros(0, nn);
    for (k, &s) in signed.iter().enumerate() {
        if s {
            let mut row = vec![Rational::zero(); nn];
            row[k] = -Rational::one();
            e_std.push_row(row);
        }
    }
    let f_std = vec![Rational::zero(); e_std.rows()];

    let pt = p.transpose();
    let mut objective = inst.objective.clone();
    objective.c = pt.mul_vec(&inst.objective.c);
    if let Some(q) = &inst.objective.q {
        objective.q = Some(pt.mul(q)?.mul(&p)?);
    }
    let int_cols: Vec<usize> = (0..int_count).collect();
    let cont_cols: Vec<usize> = (int_count..nn).collect();
    let std_inst = ProblemInstance {
        name: format!("{}-standard", inst.name),
        a: a_std,
        b: b_std,
        e: e_std,
        f: f_std,
        integer: int_cols.clone(),
        m_bound: inst.m_bound.clone(),
        objective,
        attest_recession: inst.attest_recession,
    };
    Ok(StandardForm {
        inst: std_inst,
        perturbed_rows: inst.m(),
        columns,
        int_cols,
        cont_cols,
        p,
    })
}

/// Outcome of the recession-cone check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecessionReport {
    pub holds: bool,
    /// A nonzero common direction of recession when the condition fails.
    #[serde(with = "serde_rat::option_vec")]
    pub certificate: Option<Vec<Rational>>,
    pub reason: String,
}

/// Decides whether the objective and the relaxed feasible set share a
/// nonzero direction of recession.
pub fn check_recession_condition(inst: &ProblemInstance) -> Result<RecessionReport> {
    if inst.kind() == ObjectiveKind::SmoothOracle {
        let (mu, _) = inst.objective.mu_l().expect("oracle constants");
        if mu > 0.0 {
            return Ok(RecessionReport {
                holds: true,
                certificate: None,
                reason: format!("objective is {mu}-strongly convex, so it has no direction of recession"),
            });
        }
        if inst.attest_recession {
            return Ok(RecessionReport {
                holds: true,
                certificate: None,
                reason: "attested by the instance file".into(),
            });
        }
        return Err(Error::Undecidable(
            "the recession cone of an oracle objective with mu = 0 cannot be derived from evaluations"
                .into(),
        ));
    }
    let n = inst.n();
    let q = inst.objective.q_or_zero();
    // rec(F_R) ∩ rec(f): A d = 0, Q d = 0, E d <= 0, cᵀd <= 0, with d_i = ±1
    let mut a_eq = RatMatrix::zeros(0, n);
    for i in 0..inst.m() {
        a_eq.push_row(inst.a.row(i).to_vec());
    }
    if inst.kind() == ObjectiveKind::Quadratic {
        for i in 0..n {
            if !q.row(i).iter().all(Zero::is_zero) {
                a_eq.push_row(q.row(i).to_vec());
            }
        }
    }
    let mut a_in = inst.e.clone();
    a_in.push_row(inst.objective.c.clone());
    let mut b_in = vec![Rational::zero(); a_in.rows()];
    for i in 0..n {
        for s in [1i64, -1] {
            let mut eq = a_eq.clone();
            let mut row = vec![Rational::zero(); n];
            row[i] = Rational::one();
            eq.push_row(row);
            let mut rhs = vec![Rational::zero(); a_eq.rows()];
            rhs.push(Rational::from_integer(Int::from(s)));
            let lp = LinearProgram {
                c: vec![Rational::zero(); n],
                a_eq: eq,
                b_eq: rhs,
                a_in: a_in.clone(),
                b_in: b_in.clone(),
            };
            let sol = solve_lp(&lp);
            if sol.status == LpStatus::Optimal {
                return Ok(RecessionReport {
                    holds: false,
                    certificate: Some(sol.x),
                    reason: format!("common direction of recession with d[{i}] = {s}"),
                });
            }
        }
    }
    b_in.clear();
    Ok(RecessionReport {
        holds: true,
        certificate: None,
        reason: "no nonzero direction d with Ad = 0, Ed <= 0 along which f does not increase".into(),
    })
}

/// Checks a recession certificate against its defining system.
pub fn verify_recession_certificate(inst: &ProblemInstance, d: &[Rational]) -> bool {
    let zero = Rational::zero();
    let q = inst.objective.q_or_zero();
    d.iter().any(|x| !x.is_zero())
        && inst.a.mul_vec(d).iter().all(|x| x.is_zero())
        && inst.e.mul_vec(d).iter().all(|x| x <= &zero)
        && q.mul_vec(d).iter().all(|x| x.is_zero())
        && dot(&inst.objective.c, d) <= zero
}

/// Converts a float multiplier vector to exact rationals.
pub fn rationalize(v: &[f64]) -> Vec<Rational> {
    v.iter().map(|&x| from_f64(x)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{int, rat, rat_vec};

    fn raw_milp() -> RawInstance {
        serde_json::from_str(
            r#"{"name":"t","A":[["1","1"]],"b":["2"],"E":[["2","0"]],"f":["3"],
                "integer_indices":[0],"objective":{"kind":"linear","c":["-1","0"]}}"#,
        )
        .unwrap()
    }

    #[test]
    fn validate_well_formed() {
        let inst = validate(&raw_milp()).unwrap();
        assert_eq!((inst.n(), inst.m(), inst.p()), (2, 1, 1));
        assert_eq!(inst.continuous(), vec![1]);
    }

    #[test]
    fn validate_reports_paths() {
        let mut raw = raw_milp();
        raw.a[0].push(int(1));
        let Err(Error::Invalid(v)) = validate(&raw) else { panic!("expected violations") };
        assert_eq!(v[0].path, "A[0]");

        let mut raw = raw_milp();
        raw.objective.kind = "quadratic".into();
        raw.objective.q = Some(vec![vec![int(1), int(0)], vec![int(0), int(-1)]]);
        let Err(Error::Invalid(v)) = validate(&raw) else { panic!("expected violations") };
        assert_eq!(v[0].path, "objective.Q");
        assert!(v[0].message.contains("semidefinite"));
    }

    #[test]
    fn psd_detection() {
        assert!(psd_witness(&RatMatrix::from_i64(&[&[2, 1], &[1, 2]])).is_none());
        assert!(psd_witness(&RatMatrix::from_i64(&[&[1, 1], &[1, 1]])).is_none());
        assert!(psd_witness(&RatMatrix::from_i64(&[&[1, 2], &[2, 1]])).is_some());
        assert!(psd_witness(&RatMatrix::from_i64(&[&[0, 1], &[1, 0]])).is_some());
        assert!(psd_witness(&RatMatrix::zeros(3, 3)).is_none());
    }

    #[test]
    fn residual_examples() {
        let inst = ProblemInstance::new(
            "r",
            RatMatrix::from_i64(&[&[1, 1]]),
            rat_vec(&[2]),
            RatMatrix::zeros(0, 2),
            vec![],
            vec![],
            None,
            ObjectiveDescriptor::linear(rat_vec(&[0, 0])),
        )
        .unwrap();
        assert_eq!(residual(&inst, &rat_vec(&[0, 0])).unwrap().u, rat_vec(&[2]));
        assert_eq!(residual(&inst, &[rat(1, 2), rat(3, 2)]).unwrap().u, rat_vec(&[0]));
    }

    #[test]
    fn standard_form_quadratic_blocks() {
        // two continuous free variables, Q = [[2,1],[1,3]]
        let q = RatMatrix::from_i64(&[&[2, 1], &[1, 3]]);
        let inst = ProblemInstance::new(
            "q",
            RatMatrix::from_i64(&[&[1, 1]]),
            rat_vec(&[1]),
            RatMatrix::from_i64(&[&[1, 0]]),
            rat_vec(&[4]),
            vec![],
            None,
            ObjectiveDescriptor::quadratic(q.clone(), rat_vec(&[1, 0])),
        )
        .unwrap();
        let sf = to_standard_form(&inst).unwrap();
        let qs = sf.inst.objective.q.clone().unwrap();
        let (plus, minus, slack) = ([0, 1], [2, 3], 4);
        for (a, &i) in plus.iter().enumerate() {
            for (b, &j) in plus.iter().enumerate() {
                assert_eq!(qs[(i, j)], q[(a, b)]);
                assert_eq!(qs[(minus[a], minus[b])], q[(a, b)]);
                assert_eq!(qs[(i, minus[b])], -q[(a, b)].clone());
            }
            assert_eq!(qs[(i, slack)], int(0));
        }
        assert_eq!(sf.inst.m(), 2);
        assert_eq!(sf.perturbed_rows, 1);
    }

    #[test]
    fn standard_form_identity_when_already_standard() {
        let inst = ProblemInstance::new(
            "s",
            RatMatrix::from_i64(&[&[1, 1]]),
            rat_vec(&[2]),
            RatMatrix::from_i64(&[&[-1, 0], &[0, -1]]),
            rat_vec(&[0, 0]),
            vec![0],
            None,
            ObjectiveDescriptor::linear(rat_vec(&[-1, 0])),
        )
        .unwrap();
        let sf = to_standard_form(&inst).unwrap();
        assert_eq!(sf.inst.a, inst.a);
        assert_eq!(sf.inst.e, inst.e);
        assert_eq!(sf.p, RatMatrix::identity(2));
    }

    #[test]
    fn recession_examples() {
        let bounded = ProblemInstance::new(
            "b",
            RatMatrix::zeros(0, 2),
            vec![],
            RatMatrix::from_i64(&[&[1, 0], &[-1, 0], &[0, 1], &[0, -1]]),
            rat_vec(&[1, 1, 1, 1]),
            vec![],
            None,
            ObjectiveDescriptor::linear(rat_vec(&[1, 1])),
        )
        .unwrap();
        assert!(check_recession_condition(&bounded).unwrap().holds);

        let orthant = ProblemInstance::new(
            "o",
            RatMatrix::zeros(0, 2),
            vec![],
            RatMatrix::from_i64(&[&[-1, 0], &[0, -1]]),
            rat_vec(&[0, 0]),
            vec![],
            None,
            ObjectiveDescriptor::linear(rat_vec(&[0, 0])),
        )
        .unwrap();
        let rep = check_recession_condition(&orthant).unwrap();
        assert!(!rep.holds);
        let d = rep.certificate.unwrap();
        assert_eq!(d, rat_vec(&[1, 0]));
        assert!(verify_recession_certificate(&orthant, &d));

        let strongly = ProblemInstance::new(
            "s",
            RatMatrix::zeros(0, 2),
            vec![],
            RatMatrix::from_i64(&[&[-1, 0], &[0, -1]]),
            rat_vec(&[0, 0]),
            vec![],
            None,
            ObjectiveDescriptor::quadratic(RatMatrix::from_i64(&[&[2, 0], &[0, 2]]), rat_vec(&[-5, 3])),
        )
        .unwrap();
        assert!(check_recession_condition(&strongly).unwrap().holds);
    }
}
