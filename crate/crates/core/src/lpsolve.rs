//! Exact two-phase primal simplex on a dense rational tableau, with
//! Bland's rule throughout. Variables are free; inequality rows get slacks.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactnum::{serde_rat, Rational};
use crate::model::{ObjectiveKind, ProblemInstance};
use crate::ratlinalg::{dot, inverse, rank, RatMatrix};

/// `min cᵀx  s.t.  a_eq x = b_eq,  a_in x <= b_in`, x free.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub c: Vec<Rational>,
    pub a_eq: RatMatrix,
    pub b_eq: Vec<Rational>,
    pub a_in: RatMatrix,
    pub b_in: Vec<Rational>,
}

impl LinearProgram {
    pub fn n(&self) -> usize {
        self.c.len()
    }

    pub fn is_feasible(&self, x: &[Rational]) -> bool {
        self.a_eq.mul_vec(x) == self.b_eq
            && self.a_in.mul_vec(x).iter().zip(&self.b_in).all(|(l, r)| l <= r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelaxationSolution {
    pub status: LpStatus,
    #[serde(rename = "x_star", with = "serde_rat::vec")]
    pub x: Vec<Rational>,
    #[serde(with = "serde_rat")]
    pub z: Rational,
    /// Basic columns in the internal `[x⁺, x⁻, s]` layout.
    pub basis: Vec<usize>,
    #[serde(with = "serde_rat::vec")]
    pub lambda_a: Vec<Rational>,
    #[serde(with = "serde_rat::vec")]
    pub lambda_e: Vec<Rational>,
    /// `(y_eq, y_in >= 0)` with `a_eqᵀy_eq + a_inᵀy_in = 0` and `bᵀy < 0`.
    #[serde(with = "serde_rat::option_vec")]
    pub farkas: Option<Vec<Rational>>,
    /// Direction `d` with `a_eq d = 0`, `a_in d <= 0`, `cᵀd < 0`.
    #[serde(with = "serde_rat::option_vec")]
    pub ray: Option<Vec<Rational>>,
}

impl RelaxationSolution {
    fn status_only(status: LpStatus) -> Self {
        RelaxationSolution {
            status,
            x: vec![],
            z: Rational::zero(),
            basis: vec![],
            lambda_a: vec![],
            lambda_e: vec![],
            farkas: None,
            ray: None,
        }
    }
}

struct Tableau {
    /// Row-major, last entry of each row is the right-hand side.
    t: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    ncols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, j: usize) {
        let piv = self.t[r][j].clone();
        if !piv.is_one() {
            for v in self.t[r].iter_mut() {
                *v /= &piv;
            }
        }
        let prow = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r || row[j].is_zero() {
                continue;
            }
            let f = row[j].clone();
            for (v, p) in row.iter_mut().zip(&prow) {
                if !p.is_zero() {
                    *v -= &f * p;
                }
            }
        }
        self.basis[r] = j;
    }

    fn rhs(&self, i: usize) -> &Rational {
        &self.t[i][self.ncols]
    }

    /// Bland's rule simplex over the columns `allowed`. Returns the entering
    /// column of an unbounded ray on failure.
    fn optimize(&mut self, cost: &[Rational], allowed: usize) -> std::result::Result<(), usize> {
        loop {
            let mut entering = None;
            for j in 0..allowed {
                if self.basis.contains(&j) {
                    continue;
                }
                let mut rc = cost[j].clone();
                for (i, &bi) in self.basis.iter().enumerate() {
                    if !cost[bi].is_zero() && !self.t[i][j].is_zero() {
                        rc -= &cost[bi] * &self.t[i][j];
                    }
                }
                if rc.is_negative() {
                    entering = Some(j);
                    break;
                }
            }
            let Some(j) = entering else { return Ok(()) };
            let mut leave: Option<(usize, Rational)> = None;
            for i in 0..self.t.len() {
                if !self.t[i][j].is_positive() {
                    continue;
                }
                let ratio = self.rhs(i) / &self.t[i][j];
                let better = match &leave {
                    None => true,
                    Some((r, best)) => {
                        ratio < *best || (ratio == *best && self.basis[i] < self.basis[*r])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            match leave {
                None => return Err(j),
                Some((r, _)) => self.pivot(r, j),
            }
        }
    }
}

/// Duals `y` with `Bᵀy = c_B` for the current basis, in tableau row order.
fn basis_duals(a: &[Vec<Rational>], rows: &[usize], basis: &[usize], cost: &[Rational]) -> Vec<Rational> {
    let k = rows.len();
    if k == 0 {
        return vec![];
    }
    let mut bt = RatMatrix::zeros(k, k);
    for (p, &col) in basis.iter().enumerate() {
        for (q, &r) in rows.iter().enumerate() {
            bt[(p, q)] = a[r][col].clone();
        }
    }
    let inv = inverse(&bt).expect("simplex basis is invertible");
    let cb: Vec<Rational> = basis.iter().map(|&j| cost[j].clone()).collect();
    inv.mul_vec(&cb)
}

/// `|basis|` rows of `a`, restricted to the basis columns, that are linearly
/// independent; `fallback` when it already is.
fn independent_rows(a: &[Vec<Rational>], basis: &[usize], fallback: &[usize]) -> Vec<usize> {
    let restrict = |r: usize| -> Vec<Rational> { basis.iter().map(|&j| a[r][j].clone()).collect() };
    let square = |rows: &[usize]| {
        let mut m = RatMatrix::zeros(0, basis.len());
        for &r in rows {
            m.push_row(restrict(r));
        }
        m
    };
    if rank(&square(fallback)) == basis.len() {
        return fallback.to_vec();
    }
    let mut chosen: Vec<usize> = vec![];
    for r in 0..a.len() {
        chosen.push(r);
        if rank(&square(&chosen)) < chosen.len() {
            chosen.pop();
        }
        if chosen.len() == basis.len() {
            break;
        }
    }
    chosen
}

/// Solves a linear program exactly.
pub fn solve_lp(lp: &LinearProgram) -> RelaxationSolution {
    let n = lp.n();
    let me = lp.a_eq.rows();
    let mi = lp.a_in.rows();
    let rows = me + mi;
    let nstruct = 2 * n + mi;

    // constraint matrix over [x⁺, x⁻, s], rows sign-normalized so rhs >= 0
    let mut a: Vec<Vec<Rational>> = Vec::with_capacity(rows);
    let mut rhs = Vec::with_capacity(rows);
    let mut sign = Vec::with_capacity(rows);
    for i in 0..rows {
        let (src, b) = if i < me {
            (lp.a_eq.row(i), &lp.b_eq[i])
        } else {
            (lp.a_in.row(i - me), &lp.b_in[i - me])
        };
        let mut row = vec![Rational::zero(); nstruct];
        for j in 0..n {
            row[j] = src[j].clone();
            row[n + j] = -&src[j];
        }
        if i >= me {
            row[2 * n + (i - me)] = Rational::one();
        }
        let s = if b.is_negative() { -1 } else { 1 };
        if s < 0 {
            for v in row.iter_mut() {
                *v = -&*v;
            }
        }
        a.push(row);
        rhs.push(if s < 0 { -b } else { b.clone() });
        sign.push(s);
    }

    // artificials for every row without a usable slack
    let needs_art: Vec<usize> = (0..rows).filter(|&i| i < me || sign[i] < 0).collect();
    let ncols = nstruct + needs_art.len();
    let mut full_a: Vec<Vec<Rational>> = a
        .into_iter()
        .map(|mut row| {
            row.resize(ncols, Rational::zero());
            row
        })
        .collect();
    let mut basis = vec![0; rows];
    for (k, &i) in needs_art.iter().enumerate() {
        full_a[i][nstruct + k] = Rational::one();
        basis[i] = nstruct + k;
    }
    for i in me..rows {
        if sign[i] > 0 {
            basis[i] = 2 * n + (i - me);
        }
    }
    let t = full_a
        .iter()
        .zip(&rhs)
        .map(|(row, b)| {
            let mut row = row.clone();
            row.push(b.clone());
            row
        })
        .collect();
    let mut tab = Tableau { t, basis, ncols };

    // phase 1
    if !needs_art.is_empty() {
        let mut cost1 = vec![Rational::zero(); ncols];
        for c in cost1.iter_mut().skip(nstruct) {
            *c = Rational::one();
        }
        tab.optimize(&cost1, ncols)
            .expect("phase one is bounded below by zero");
        let infeas: Rational = (0..rows)
            .filter(|&i| tab.basis[i] >= nstruct)
            .map(|i| tab.rhs(i).clone())
            .sum();
        if infeas.is_positive() {
            let all_rows: Vec<usize> = (0..rows).collect();
            let w = basis_duals(&full_a, &all_rows, &tab.basis, &cost1);
            let y: Vec<Rational> = w
                .iter()
                .zip(&sign)
                .map(|(w, &s)| if s < 0 { w.clone() } else { -w })
                .collect();
            let mut out = RelaxationSolution::status_only(LpStatus::Infeasible);
            out.farkas = Some(y);
            return out;
        }
        // drive zero-level artificials out; rows where that fails are redundant
        let mut drop = Vec::new();
        for i in 0..rows {
            if tab.basis[i] < nstruct {
                continue;
            }
            match (0..nstruct).find(|&j| !tab.t[i][j].is_zero()) {
                Some(j) => tab.pivot(i, j),
                None => drop.push(i),
            }
        }
        for &i in drop.iter().rev() {
            tab.t.remove(i);
            tab.basis.remove(i);
        }
        let kept: Vec<usize> = (0..rows).filter(|i| !drop.contains(i)).collect();
        return phase_two(lp, tab, full_a, kept, sign, nstruct);
    }
    let kept: Vec<usize> = (0..rows).collect();
    phase_two(lp, tab, full_a, kept, sign, nstruct)
}

fn phase_two(
    lp: &LinearProgram,
    mut tab: Tableau,
    full_a: Vec<Vec<Rational>>,
    kept: Vec<usize>,
    sign: Vec<i32>,
    nstruct: usize,
) -> RelaxationSolution {
    let n = lp.n();
    let me = lp.a_eq.rows();
    let rows = sign.len();
    let mut cost = vec![Rational::zero(); tab.ncols];
    for j in 0..n {
        cost[j] = lp.c[j].clone();
        cost[n + j] = -&lp.c[j];
    }
    if let Err(j) = tab.optimize(&cost, nstruct) {
        let mut dy = vec![Rational::zero(); nstruct];
        dy[j] = Rational::one();
        for (i, &bi) in tab.basis.iter().enumerate() {
            dy[bi] = -&tab.t[i][j];
        }
        let d: Vec<Rational> = (0..n).map(|k| &dy[k] - &dy[n + k]).collect();
        let mut out = RelaxationSolution::status_only(LpStatus::Unbounded);
        out.ray = Some(d);
        return out;
    }
    let mut y_vals = vec![Rational::zero(); nstruct];
    for (i, &bi) in tab.basis.iter().enumerate() {
        y_vals[bi] = tab.rhs(i).clone();
    }
    let x: Vec<Rational> = (0..n).map(|k| &y_vals[k] - &y_vals[n + k]).collect();
    // a dropped tableau row is a combination of original rows, not
    // necessarily the row of the same index; pick independent rows afresh
    let kept = independent_rows(&full_a, &tab.basis, &kept);
    let w = basis_duals(&full_a, &kept, &tab.basis, &cost);
    let mut y = vec![Rational::zero(); rows];
    for (k, &r) in kept.iter().enumerate() {
        y[r] = if sign[r] < 0 { -&w[k] } else { w[k].clone() };
    }
    let mut basis = tab.basis.clone();
    basis.sort_unstable();
    RelaxationSolution {
        status: LpStatus::Optimal,
        z: dot(&lp.c, &x),
        x,
        basis,
        lambda_a: y[..me].to_vec(),
        lambda_e: y[me..].iter().map(|v| -v).collect(),
        farkas: None,
        ray: None,
    }
}

/// The continuous relaxation of a linear instance, box rows included when
/// M is given (their multipliers follow the E rows in `lambda_e`).
pub fn solve_relaxation(inst: &ProblemInstance) -> Result<RelaxationSolution> {
    if inst.kind() != ObjectiveKind::Linear {
        return Err(Error::Unsupported(format!(
            "solve_lp needs a linear objective, found {}",
            inst.kind().name()
        )));
    }
    let mut sol = solve_lp(&inst.relaxation_lp());
    if sol.status == LpStatus::Optimal {
        sol.z += &inst.objective.offset;
    }
    Ok(sol)
}

/// Exact check of the optimality conditions for `sol` on `lp`.
pub fn verify_kkt(lp: &LinearProgram, sol: &RelaxationSolution) -> bool {
    if sol.status != LpStatus::Optimal || !lp.is_feasible(&sol.x) {
        return false;
    }
    let zero = Rational::zero();
    if sol.lambda_e.iter().any(|l| l < &zero) {
        return false;
    }
    let grad = lp.a_eq.tmul_vec(&sol.lambda_a);
    let pen = lp.a_in.tmul_vec(&sol.lambda_e);
    let stationary = (0..lp.n()).all(|j| lp.c[j] == &grad[j] - &pen[j]);
    let ex = lp.a_in.mul_vec(&sol.x);
    let comp = (0..lp.a_in.rows()).all(|i| (&lp.b_in[i] - &ex[i]) * &sol.lambda_e[i] == zero);
    stationary && comp
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{int, rat, rat_vec};
    use crate::ratlinalg::solve_particular;
    use itertools::Itertools;
    use proptest::prelude::*;

    fn lp(c: &[i64], a_eq: &[&[i64]], b_eq: &[i64], a_in: &[&[i64]], b_in: &[i64]) -> LinearProgram {
        let n = c.len();
        let mk = |rows: &[&[i64]]| {
            if rows.is_empty() {
                RatMatrix::zeros(0, n)
            } else {
                RatMatrix::from_i64(rows)
            }
        };
        LinearProgram {
            c: rat_vec(c),
            a_eq: mk(a_eq),
            b_eq: rat_vec(b_eq),
            a_in: mk(a_in),
            b_in: rat_vec(b_in),
        }
    }

    /// Minimum over vertices: every choice of n linearly independent active
    /// rows (equalities always active). Assumes a bounded feasible region.
    fn vertex_oracle(lp: &LinearProgram) -> Option<Rational> {
        let n = lp.n();
        let mut best: Option<Rational> = None;
        let me = lp.a_eq.rows();
        for k in 0..=lp.a_in.rows() {
            for act in (0..lp.a_in.rows()).combinations(k) {
                if me + k < n {
                    continue;
                }
                let mut m = RatMatrix::zeros(0, n);
                let mut rhs = vec![];
                for i in 0..me {
                    m.push_row(lp.a_eq.row(i).to_vec());
                    rhs.push(lp.b_eq[i].clone());
                }
                for &i in &act {
                    m.push_row(lp.a_in.row(i).to_vec());
                    rhs.push(lp.b_in[i].clone());
                }
                if crate::ratlinalg::rank(&m) < n {
                    continue;
                }
                if let Some(x) = solve_particular(&m, &rhs) {
                    if lp.is_feasible(&x) {
                        let z = dot(&lp.c, &x);
                        if best.as_ref().is_none_or(|b| &z < b) {
                            best = Some(z);
                        }
                    }
                }
            }
        }
        best
    }

    #[test]
    fn simple_example() {
        let p = lp(&[1, 0], &[&[1, 1]], &[1], &[&[-1, 0], &[0, -1]], &[0, 0]);
        let s = solve_lp(&p);
        assert_eq!(s.status, LpStatus::Optimal);
        assert_eq!(s.z, int(0));
        assert_eq!(s.x, rat_vec(&[0, 1]));
        assert!(verify_kkt(&p, &s));
    }

    #[test]
    fn inst_a_relaxation() {
        let p = lp(&[-1, 0], &[&[1, 1]], &[2], &[&[2, 0], &[-1, 0], &[0, -1]], &[3, 0, 0]);
        assert_eq!(vertex_oracle(&p), Some(rat(-3, 2)));
        let s = solve_lp(&p);
        assert_eq!(s.z, rat(-3, 2));
        assert_eq!(s.x, vec![rat(3, 2), rat(1, 2)]);
        assert_eq!(s.lambda_a, vec![int(0)]);
        assert_eq!(s.lambda_e[0], rat(1, 2));
        assert!(verify_kkt(&p, &s));
    }

    #[test]
    fn infeasible_with_farkas() {
        let p = lp(&[0], &[&[1], &[1]], &[1, 2], &[], &[]);
        let s = solve_lp(&p);
        assert_eq!(s.status, LpStatus::Infeasible);
        let y = s.farkas.unwrap();
        assert_eq!(p.a_eq.tmul_vec(&y), vec![int(0)]);
        assert!(dot(&y, &p.b_eq) < int(0));
    }

    #[test]
    fn unbounded_with_ray() {
        let p = lp(&[-1, 0], &[], &[], &[&[-1, 0], &[0, 1]], &[0, 1]);
        let s = solve_lp(&p);
        assert_eq!(s.status, LpStatus::Unbounded);
        let d = s.ray.unwrap();
        assert!(p.a_in.mul_vec(&d).iter().all(|v| v <= &int(0)));
        assert!(dot(&p.c, &d) < int(0));
    }

    #[test]
    fn redundant_rows_are_dropped() {
        let p = lp(&[1, 1], &[&[1, 1], &[2, 2]], &[2, 4], &[&[-1, 0], &[0, -1]], &[0, 0]);
        let s = solve_lp(&p);
        assert_eq!(s.z, int(2));
        assert!(verify_kkt(&p, &s));
    }

    #[test]
    fn dependent_equalities_keep_an_invertible_basis() {
        // third row = first + second
        let p = lp(
            &[1, 2, -1],
            &[&[1, 0, 1], &[0, 1, 1], &[1, 1, 2]],
            &[1, 1, 2],
            &[&[-1, 0, 0], &[0, -1, 0], &[0, 0, -1], &[0, 0, 1]],
            &[0, 0, 0, 1],
        );
        let s = solve_lp(&p);
        assert_eq!(s.status, LpStatus::Optimal);
        assert_eq!(Some(s.z.clone()), vertex_oracle(&p));
        assert!(verify_kkt(&p, &s));
    }

    fn small_lp() -> impl Strategy<Value = LinearProgram> {
        (1usize..=3, 0usize..=2, 1usize..=3, any::<bool>()).prop_flat_map(|(n, me, extra, dependent)| {
            (
                prop::collection::vec(-3i64..=3, n),
                prop::collection::vec(prop::collection::vec(-3i64..=3, n), me),
                prop::collection::vec(-3i64..=3, me),
                prop::collection::vec(prop::collection::vec(-3i64..=3, n), extra),
                prop::collection::vec(0i64..=4, extra),
            )
                .prop_map(move |(c, ae, be, ai, bi)| {
                    // box |x_j| <= 3 keeps the region bounded
                    let mut a_in = RatMatrix::zeros(0, n);
                    let mut b_in = vec![];
                    for (row, b) in ai.iter().zip(&bi) {
                        a_in.push_row(rat_vec(row));
                        b_in.push(int(*b));
                    }
                    for j in 0..n {
                        for s in [1, -1] {
                            let mut row = vec![int(0); n];
                            row[j] = int(s);
                            a_in.push_row(row);
                            b_in.push(int(3));
                        }
                    }
                    let mut a_eq = RatMatrix::zeros(0, n);
                    let mut b_eq = rat_vec(&be);
                    for row in &ae {
                        a_eq.push_row(rat_vec(row));
                    }
                    if dependent && me > 0 {
                        // sum of the equality rows, consistent by construction
                        let sum: Vec<i64> = (0..n).map(|j| ae.iter().map(|r| r[j]).sum()).collect();
                        a_eq.push_row(rat_vec(&sum));
                        b_eq.push(int(be.iter().sum::<i64>()));
                    }
                    LinearProgram { c: rat_vec(&c), a_eq, b_eq, a_in, b_in }
                })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn matches_vertex_enumeration(p in small_lp()) {
            let s = solve_lp(&p);
            match vertex_oracle(&p) {
                None => prop_assert_eq!(s.status, LpStatus::Infeasible),
                Some(z) => {
                    prop_assert_eq!(s.status, LpStatus::Optimal);
                    prop_assert_eq!(&s.z, &z);
                    prop_assert!(verify_kkt(&p, &s));
                    // strong duality: cᵀx = bᵀλ_A − fᵀλ_E
                    let dual = dot(&p.b_eq, &s.lambda_a) - dot(&p.b_in, &s.lambda_e);
                    prop_assert_eq!(dual, z);
                }
            }
        }
    }
}
