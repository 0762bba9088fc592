//! Named instances and seeded random instance families.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::exactnum::{int, rat, rat_vec, Rational};
use crate::model::{ObjectiveDescriptor, ProblemInstance};
use crate::ratlinalg::RatMatrix;

fn m(rows: &[&[i64]]) -> RatMatrix {
    RatMatrix::from_i64(rows)
}

fn build(
    name: &str,
    a: RatMatrix,
    b: Vec<Rational>,
    e: RatMatrix,
    f: Vec<Rational>,
    integer: Vec<usize>,
    bound: Option<i64>,
    obj: ObjectiveDescriptor,
) -> ProblemInstance {
    ProblemInstance::new(name, a, b, e, f, integer, bound.map(int), obj).expect("corpus instance is valid")
}

/// min −x₁ s.t. x₁ + x₂ = 2, 2x₁ <= 3, x >= 0, x ∈ Z².
pub fn inst_a() -> ProblemInstance {
    build(
        "inst-a",
        m(&[&[1, 1]]),
        rat_vec(&[2]),
        m(&[&[2, 0], &[-1, 0], &[0, -1]]),
        rat_vec(&[3, 0, 0]),
        vec![0, 1],
        None,
        ObjectiveDescriptor::linear(rat_vec(&[-1, 0])),
    )
}

/// min −x₁ s.t. x₁ + x₂ = 3/2, x₁ <= 1, x >= 0, x₁ ∈ Z.
pub fn inst_b() -> ProblemInstance {
    build(
        "inst-b",
        m(&[&[1, 1]]),
        vec![rat(3, 2)],
        m(&[&[1, 0], &[-1, 0], &[0, -1]]),
        rat_vec(&[1, 0, 0]),
        vec![0],
        None,
        ObjectiveDescriptor::linear(rat_vec(&[-1, 0])),
    )
}

/// min x_I² + x_C² s.t. x_I + x_C = 1, x_C >= 0, |x_I| <= 2.
pub fn inst_c() -> ProblemInstance {
    build(
        "inst-c",
        m(&[&[1, 1]]),
        rat_vec(&[1]),
        m(&[&[0, -1]]),
        rat_vec(&[0]),
        vec![0],
        Some(2),
        ObjectiveDescriptor::quadratic(m(&[&[2, 0], &[0, 2]]), rat_vec(&[0, 0])),
    )
}

/// min −x_I s.t. x_I − x_C = 0, 0 <= 10x_C <= 9, x_I >= 0.
///
/// Here `Γ = 0` and `K = 1`, yet `φ(1/10) = −1 < φ(0) = 0`.
pub fn lipschitz_counterexample() -> ProblemInstance {
    build(
        "lipschitz-counterexample",
        m(&[&[1, -1]]),
        rat_vec(&[0]),
        m(&[&[0, 10], &[0, -10], &[-1, 0]]),
        rat_vec(&[9, 0, 0]),
        vec![0],
        None,
        ObjectiveDescriptor::linear(rat_vec(&[-1, 0])),
    )
}

/// min −x_C s.t. x_C = 1, −5 <= x_C <= 2, x_I ∈ {0, 1}.
///
/// `φ(u) = −1 − u` near 0, so the squared-ℓ2 relaxation has gap `1/(4ρ)`
/// for `ρ >= 1/2`.
pub fn asymptotic_instance() -> ProblemInstance {
    build(
        "asymptotic",
        m(&[&[0, 1]]),
        rat_vec(&[1]),
        m(&[&[0, 1], &[0, -1], &[1, 0], &[-1, 0]]),
        rat_vec(&[2, 5, 1, 0]),
        vec![0],
        None,
        ObjectiveDescriptor::linear(rat_vec(&[0, -1])),
    )
}

/// The closed-form squared-ℓ2 gap of [`asymptotic_instance`].
pub fn asymptotic_gap(rho: &Rational) -> Rational {
    // min over u ∈ [−6, 1] of −u + ρu², minimizer u = 1/(2ρ)
    let u = (rat(1, 2) / rho).min(int(1));
    &u - rho * &u * &u
}

/// min −x s.t. x = 0, x ∈ {0, 1}: `φ(0) = 0`, `φ(1) = −1`, so the
/// ℓ1 penalty closes the gap exactly for `ρ >= 1`.
pub fn two_point() -> ProblemInstance {
    build(
        "two-point",
        m(&[&[1]]),
        rat_vec(&[0]),
        m(&[&[1], &[-1]]),
        rat_vec(&[1, 0]),
        vec![0],
        None,
        ObjectiveDescriptor::linear(rat_vec(&[-1])),
    )
}

/// The named instances.
pub fn named() -> Vec<ProblemInstance> {
    vec![inst_a(), inst_b(), inst_c(), lipschitz_counterexample(), asymptotic_instance(), two_point()]
}

fn nonzero(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> i64 {
    loop {
        let v = rng.gen_range(lo..=hi);
        if v != 0 {
            return v;
        }
    }
}

fn dot_i(a: &[i64], x: &[i64]) -> i64 {
    a.iter().zip(x).map(|(a, x)| a * x).sum()
}

/// Bounded pure-integer program: `n <= 3`, `M <= 2`, integral data,
/// feasible by construction.
pub fn random_pure_integer(seed: u64) -> ProblemInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=3);
    let rows = rng.gen_range(1..=2);
    let bound = rng.gen_range(1..=2i64);
    let x0: Vec<i64> = (0..n).map(|_| rng.gen_range(-bound..=bound)).collect();
    let mut a = vec![];
    let mut b = vec![];
    for _ in 0..rows {
        let mut row: Vec<i64> = (0..n).map(|_| rng.gen_range(-2..=2)).collect();
        let k = rng.gen_range(0..n);
        row[k] = nonzero(&mut rng, -2, 2);
        b.push(dot_i(&row, &x0));
        a.push(row);
    }
    let mut e = vec![];
    let mut f = vec![];
    if rng.gen_bool(0.5) {
        let row: Vec<i64> = (0..n).map(|_| rng.gen_range(-2..=2)).collect();
        f.push(dot_i(&row, &x0) + rng.gen_range(0..=2));
        e.push(row);
    }
    let c: Vec<i64> = (0..n).map(|_| rng.gen_range(-3..=3)).collect();
    let a_rows: Vec<&[i64]> = a.iter().map(Vec::as_slice).collect();
    let e_rows: Vec<&[i64]> = e.iter().map(Vec::as_slice).collect();
    build(
        &format!("pure-integer-{seed}"),
        m(&a_rows),
        rat_vec(&b),
        if e.is_empty() { RatMatrix::zeros(0, n) } else { m(&e_rows) },
        rat_vec(&f),
        (0..n).collect(),
        Some(bound),
        ObjectiveDescriptor::linear(rat_vec(&c)),
    )
}

/// Pure-integer program whose equality data may have halves in it.
pub fn random_picp(seed: u64) -> ProblemInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
    let base = random_pure_integer(seed);
    if !rng.gen_bool(0.5) {
        return ProblemInstance { name: format!("picp-{seed}"), ..base };
    }
    let half = rat(1, 2);
    let a = base.a.scale(&half);
    let b: Vec<Rational> = base.b.iter().map(|v| v * &half).collect();
    ProblemInstance::new(
        &format!("picp-{seed}"),
        a,
        b,
        base.e.clone(),
        base.f.clone(),
        base.integer.clone(),
        base.m_bound.clone(),
        base.objective.clone(),
    )
    .expect("scaled instance is valid")
}

/// Shared layout of the mixed random families: integer block `x_I`
/// (with rows `0 <= x_I <= 2` when `int_rows`), a nonnegative surplus pair
/// per equality row, and one bounded continuous variable `0 <= y <= 3`.
struct MixedLayout {
    n1: usize,
    rows: usize,
    n: usize,
    a: Vec<Vec<i64>>,
    b: Vec<i64>,
    e: Vec<Vec<i64>>,
    f: Vec<i64>,
}

impl MixedLayout {
    fn pair(&self, i: usize) -> (usize, usize) {
        (self.n1 + 2 * i, self.n1 + 2 * i + 1)
    }

    fn y(&self) -> usize {
        self.n - 1
    }

    fn a_matrix(&self) -> RatMatrix {
        let rows: Vec<&[i64]> = self.a.iter().map(Vec::as_slice).collect();
        m(&rows)
    }

    fn e_matrix(&self) -> RatMatrix {
        let rows: Vec<&[i64]> = self.e.iter().map(Vec::as_slice).collect();
        m(&rows)
    }
}

fn mixed_layout(rng: &mut ChaCha8Rng, rows: usize, int_rows: bool) -> MixedLayout {
    let n1 = rng.gen_range(1..=2);
    let n = n1 + 2 * rows + 1;
    let mut lay = MixedLayout { n1, rows, n, a: vec![], b: vec![], e: vec![], f: vec![] };
    for i in 0..rows {
        let mut row = vec![0i64; n];
        for v in row.iter_mut().take(n1) {
            *v = rng.gen_range(-2..=2);
        }
        let (p, q) = lay.pair(i);
        row[p] = 1;
        row[q] = -1;
        row[n - 1] = rng.gen_range(-1..=2);
        lay.a.push(row);
        lay.b.push(rng.gen_range(-2..=3));
    }
    let first = if int_rows { 0 } else { n1 };
    for j in first..n {
        let mut row = vec![0i64; n];
        row[j] = -1;
        lay.e.push(row);
        lay.f.push(0);
    }
    for j in (first..n1).chain([n - 1]) {
        let mut row = vec![0i64; n];
        row[j] = 1;
        lay.e.push(row);
        lay.f.push(if j < n1 { 2 } else { 3 });
    }
    lay
}

/// Mixed-integer linear program with positive surplus costs, so every
/// integer point stays feasible under perturbation.
pub fn random_milp(seed: u64) -> ProblemInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = rng.gen_range(1..=2);
    let lay = mixed_layout(&mut rng, rows, true);
    let mut c = vec![0i64; lay.n];
    for v in c.iter_mut().take(lay.n1) {
        *v = rng.gen_range(-3..=3);
    }
    for i in 0..lay.rows {
        let (p, q) = lay.pair(i);
        c[p] = rng.gen_range(1..=3);
        c[q] = rng.gen_range(1..=3);
    }
    c[lay.y()] = rng.gen_range(-3..=3);
    build(
        &format!("milp-{seed}"),
        lay.a_matrix(),
        rat_vec(&lay.b),
        lay.e_matrix(),
        rat_vec(&lay.f),
        (0..lay.n1).collect(),
        None,
        ObjectiveDescriptor::linear(rat_vec(&c)),
    )
}

/// Mixed-integer quadratic program with one equality row, `n₁ <= 2` and
/// `M <= 2`; the Hessian is `RᵀR + D` with small integer `R`, `D`.
pub fn random_miqp(seed: u64) -> ProblemInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lay = mixed_layout(&mut rng, 1, false);
    let n = lay.n;
    let k = rng.gen_range(1..=2);
    let r: Vec<Vec<i64>> = (0..k).map(|_| (0..n).map(|_| rng.gen_range(-1..=1)).collect()).collect();
    let mut q = vec![vec![0i64; n]; n];
    for i in 0..n {
        for j in 0..n {
            q[i][j] = (0..k).map(|t| r[t][i] * r[t][j]).sum();
        }
        q[i][i] += rng.gen_range(0..=2);
    }
    let mut c = vec![0i64; n];
    for v in c.iter_mut() {
        *v = rng.gen_range(-3..=3);
    }
    for i in 0..lay.rows {
        let (p, qq) = lay.pair(i);
        c[p] = rng.gen_range(1..=3);
        c[qq] = rng.gen_range(1..=3);
    }
    let bound = rng.gen_range(1..=2);
    let q_rows: Vec<&[i64]> = q.iter().map(Vec::as_slice).collect();
    build(
        &format!("miqp-{seed}"),
        lay.a_matrix(),
        rat_vec(&lay.b),
        lay.e_matrix(),
        rat_vec(&lay.f),
        (0..lay.n1).collect(),
        Some(bound),
        ObjectiveDescriptor::quadratic(m(&q_rows), rat_vec(&c)),
    )
}

/// `min ‖x‖²` over one random equality row, with `M = 2`. When `oracle`
/// is set the objective is the registered `sum-of-squares` function,
/// otherwise the exact quadratic `Q = 2I`.
pub fn random_sum_of_squares(seed: u64, oracle: bool) -> ProblemInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n1 = rng.gen_range(1..=2);
    let n2 = rng.gen_range(1..=2);
    let n = n1 + n2;
    let mut row: Vec<i64> = (0..n).map(|_| rng.gen_range(-2..=2)).collect();
    for v in row.iter_mut().skip(n1) {
        if *v == 0 {
            *v = 1;
        }
    }
    let b = rng.gen_range(1..=4);
    let mut e = vec![];
    if rng.gen_bool(0.5) {
        let mut r = vec![0i64; n];
        r[n - 1] = -1;
        e.push(r);
    }
    let e_rows: Vec<&[i64]> = e.iter().map(Vec::as_slice).collect();
    let zeros = vec![0i64; n];
    let obj = if oracle {
        ObjectiveDescriptor::oracle("sum-of-squares", rat_vec(&zeros)).expect("registered oracle")
    } else {
        let two: Vec<Rational> = vec![int(2); n];
        ObjectiveDescriptor::quadratic(RatMatrix::diag(&two), rat_vec(&zeros))
    };
    build(
        &format!("sum-of-squares-{seed}{}", if oracle { "-oracle" } else { "" }),
        m(&[&row]),
        rat_vec(&[b]),
        if e.is_empty() { RatMatrix::zeros(0, n) } else { m(&e_rows) },
        vec![int(0); e.len()],
        (0..n1).collect(),
        Some(2),
        obj,
    )
}
