//! Acceptance suite: one pass/fail line per criterion, nonzero exit on any
//! failure.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};

use itertools::Itertools;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sharp_ald::corpus;
use sharp_ald::cvxsub::{gradient_check, oracles, solve_qp, solve_qp_exhaustive, QpStatus, QuadraticProgram};
use sharp_ald::exactnum::{int, rat, to_f64, ExtValue, Rational};
use sharp_ald::lpsolve::{solve_lp, LinearProgram, LpStatus};
use sharp_ald::mipsolve::{solve_mip, solve_salr, MipStatus};
use sharp_ald::model::{ObjectiveDescriptor, ProblemInstance};
use sharp_ald::penalty::{micp_constants, milp_constants, miqp_constants, picp_rho};
use sharp_ald::ratlinalg::{inverse, Norm, RatMatrix};
use sharp_ald::saldual::{asymptotic_experiment, geometric_schedule, rho_sweep, sweep_violations, OracleGrid, SalrEvaluator};
use sharp_ald::selftest;
use sharp_ald::valuefn::{box_grid, build_grid, continuous_relaxation, radius_violations, salr_oracle, u_radius, Fidelity};
use sharp_ald::Settings;

type Outcome = Result<String, String>;

fn s() -> Settings {
    Settings::default()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn exact_z_ip(inst: &ProblemInstance) -> Result<Rational, String> {
    let sol = solve_mip(inst, &s()).map_err(|e| e.to_string())?;
    sol.z.exact().cloned().ok_or_else(|| format!("{}: z_IP = {} is not exact", inst.name, sol.z))
}

/// ρ just above a threshold, as required by the strict inequality ρ > ρ*.
fn above(rho_star: &Rational) -> Rational {
    if rho_star.is_positive() {
        rho_star * rat(101, 100)
    } else {
        rat(1, 100)
    }
}

fn criterion_1() -> Outcome {
    let rhos = [rat(1, 4), rat(1, 2), int(1), int(2), int(5)];
    let mut checked = 0;
    for seed in 0..10 {
        let inst = corpus::random_pure_integer(seed);
        ensure(inst.n() <= 4, || format!("{} has n = {}", inst.name, inst.n()))?;
        let grid = box_grid(&inst, Norm::L1, &s()).map_err(|e| e.to_string())?;
        for rho in &rhos {
            let direct = solve_salr(&inst, rho, Norm::L1, &s()).map_err(|e| e.to_string())?.z;
            let oracle = salr_oracle(&inst, rho, Norm::L1, &grid, &s()).map_err(|e| e.to_string())?;
            ensure(oracle.fidelity == Fidelity::Exact, || format!("{}: oracle coverage not certified", inst.name))?;
            ensure(direct == oracle.value, || format!("{} rho = {rho}: solver {direct} vs oracle {}", inst.name, oracle.value))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} (instance, rho) pairs bit-exact"))
}

fn criterion_2() -> Outcome {
    let mut instances = vec![corpus::inst_a(), corpus::two_point()];
    instances.extend((0..4).map(corpus::random_picp));
    let mut closures = 0;
    for inst in &instances {
        let z_ip = exact_z_ip(inst)?;
        let relax = continuous_relaxation(inst, &s()).map_err(|e| e.to_string())?;
        let p = picp_rho(inst, &z_ip, &relax, Norm::L1, &s()).map_err(|e| e.to_string())?;
        if inst.name == "inst-a" {
            ensure(p.rho_star == rat(1, 2), || format!("inst-a rho* = {}", p.rho_star))?;
        }
        let first = above(&p.rho_star);
        for rho in [first.clone(), &first * int(2), &first * int(5), &first * int(20)] {
            let z = solve_salr(inst, &rho, Norm::L1, &s()).map_err(|e| e.to_string())?.z;
            ensure(z == ExtValue::Exact(z_ip.clone()), || format!("{} rho = {rho}: z_SALR = {z}, z_IP = {z_ip}", inst.name))?;
            closures += 1;
            let r = u_radius(&z_ip, relax.z.exact().unwrap(), &relax.lambda_a, &rho, Norm::L1, &s().slack)
                .map_err(|e| e.to_string())?;
            let grid = match box_grid(inst, Norm::L1, &s()) {
                Ok(g) => g,
                Err(_) => build_grid(inst, &(&r * int(2) + int(2)), None, Norm::L1, &s()).map_err(|e| e.to_string())?,
            };
            let bad = radius_violations(&grid, &rho, Norm::L1, &r);
            ensure(bad.is_empty(), || format!("{} rho = {rho}: {} points beyond the radius {r}", inst.name, bad.len()))?;
        }
    }
    Ok(format!("{} instances, {closures} exact closures, radius bound holds", instances.len()))
}

fn criterion_3() -> Outcome {
    let mut instances = vec![corpus::inst_b(), corpus::asymptotic_instance()];
    instances.extend((0..4).map(corpus::random_milp));
    let mut samples = 0;
    for inst in &instances {
        let z_ip = exact_z_ip(inst)?;
        let relax = continuous_relaxation(inst, &s()).map_err(|e| e.to_string())?;
        let c = milp_constants(inst, &relax, &z_ip, Norm::L1, &s()).map_err(|e| e.to_string())?;
        let pitch = &c.delta / int(8);
        let grid = build_grid(inst, &c.delta, Some(&pitch), Norm::L1, &s()).map_err(|e| e.to_string())?;
        let phi0 = grid.at_zero().and_then(|g| g.phi.exact().cloned()).ok_or("phi(0) not exact")?;
        for smp in grid.feasible() {
            let v = smp.phi.exact().ok_or_else(|| format!("{}: phi({:?}) = {}", inst.name, smp.u, smp.phi))?;
            let norm = Norm::L1.exact(&smp.u).unwrap();
            ensure((v - &phi0).abs() <= &c.gamma * &norm, || {
                format!("{} u = {:?}: |phi(u) - phi(0)| = {} > {}", inst.name, smp.u, (v - &phi0).abs(), &c.gamma * &norm)
            })?;
            samples += 1;
        }
        let rho = above(&c.rho_star);
        let z = solve_salr(inst, &rho, Norm::L1, &s()).map_err(|e| e.to_string())?.z;
        ensure(z == ExtValue::Exact(z_ip.clone()), || format!("{} rho = {rho}: z_SALR = {z}, z_IP = {z_ip}", inst.name))?;
    }
    Ok(format!("{} MILPs, {samples} samples inside N_delta(0), gap closed above rho*", instances.len()))
}

fn criterion_4() -> Outcome {
    let mut instances = vec![corpus::inst_c()];
    instances.extend((0..3).map(corpus::random_miqp));
    let mut total = 0;
    for inst in &instances {
        ensure(inst.integer.len() <= 2, || format!("{}: n1 = {}", inst.name, inst.integer.len()))?;
        let c = miqp_constants(inst, Norm::L1, &s()).map_err(|e| e.to_string())?;
        let r = rat(1, 4);
        let pitch = if inst.m() == 1 { rat(1, 96) } else { rat(1, 24) };
        let grid = build_grid(inst, &r, Some(&pitch), Norm::L1, &s()).map_err(|e| e.to_string())?;
        let phi0 = grid.at_zero().and_then(|g| g.phi.exact().cloned()).ok_or("phi(0) not exact")?;
        let mut count = 0;
        for smp in grid.feasible() {
            let v = smp.phi.exact().ok_or_else(|| format!("{}: phi not exact", inst.name))?;
            let bound = c.bound(&smp.u, Norm::L1, &s().slack);
            ensure((v - &phi0).abs() <= bound, || format!("{} u = {:?}: quadratic bound fails", inst.name, smp.u))?;
            count += 1;
        }
        ensure(count >= 20, || format!("{}: only {count} feasible samples", inst.name))?;
        total += count;
    }
    Ok(format!("{} MIQPs, {total} samples with |u| <= 1/4", instances.len()))
}

fn criterion_5() -> Outcome {
    let pitch = rat(1, 8);
    let mut quad = vec![corpus::inst_c()];
    quad.extend((0..3).map(|k| corpus::random_sum_of_squares(k, false)));
    for inst in &quad {
        let z_ip = exact_z_ip(inst)?;
        let relax = continuous_relaxation(inst, &s()).map_err(|e| e.to_string())?;
        let c = micp_constants(inst, &relax, Norm::L1, &pitch, &s()).map_err(|e| e.to_string())?;
        let f = c.formula.as_ref().ok_or_else(|| format!("{}: no formula bound ({})", inst.name, c.formula_note))?;
        ensure(c.gamma_direct <= f.gamma_formula, || {
            format!("{}: gamma_direct {} > gamma_formula {}", inst.name, c.gamma_direct, f.gamma_formula)
        })?;
        let rho = above(&c.rho_star);
        let z = solve_salr(inst, &rho, Norm::L1, &s()).map_err(|e| e.to_string())?.z;
        ensure(z == ExtValue::Exact(z_ip.clone()), || format!("{} rho = {rho}: z_SALR = {z}, z_IP = {z_ip}", inst.name))?;
    }
    let tol = 1e-6;
    for k in 0..2 {
        let twin = corpus::random_sum_of_squares(k, false);
        let inst = corpus::random_sum_of_squares(k, true);
        let relax_q = continuous_relaxation(&twin, &s()).map_err(|e| e.to_string())?;
        let cq = micp_constants(&twin, &relax_q, Norm::L1, &pitch, &s()).map_err(|e| e.to_string())?;
        let relax = continuous_relaxation(&inst, &s()).map_err(|e| e.to_string())?;
        let c = micp_constants(&inst, &relax, Norm::L1, &pitch, &s()).map_err(|e| e.to_string())?;
        let (a, b) = (to_f64(&c.gamma_direct), to_f64(&cq.gamma_direct));
        ensure((a - b).abs() <= tol * (1.0 + b.abs()), || format!("{}: oracle gamma {a} vs quadratic {b}", inst.name))?;
        let f = c.formula.as_ref().ok_or_else(|| format!("{}: no formula bound", inst.name))?;
        ensure(a <= to_f64(&f.gamma_formula) + tol, || format!("{}: gamma_direct above the formula", inst.name))?;
        let settings = s();
        let ev = SalrEvaluator::new(&inst, Norm::L1, &OracleGrid::default(), &settings).map_err(|e| e.to_string())?;
        let (v, _) = ev.eval(&above(&c.rho_star)).map_err(|e| e.to_string())?;
        let z_ip = solve_mip(&inst, &s()).map_err(|e| e.to_string())?.z;
        let gap = z_ip.minus(&v).to_f64();
        ensure(gap.abs() <= tol, || format!("{}: oracle gap {gap:e} at rho*", inst.name))?;
    }
    Ok(format!("{} quadratic instances exact, 2 oracle instances within {tol:e}", quad.len()))
}

fn criterion_6() -> Outcome {
    let sched = selftest::schedule();
    let mut instances = selftest::corpus_for(0);
    instances.extend(selftest::corpus_for(100).into_iter().skip(corpus::named().len()));
    let mut sweeps = 0;
    for inst in &instances {
        for norm in [Norm::L1, Norm::Linf] {
            let sw = rho_sweep(inst, &sched, norm, &OracleGrid::default(), &s()).map_err(|e| format!("{}: {e}", inst.name))?;
            let v = sweep_violations(&sw, &s());
            ensure(v.is_empty(), || format!("{} ({}): {}", inst.name, norm.name(), v.join("; ")))?;
            sweeps += 1;
        }
    }
    for k in 0..2 {
        let inst = corpus::random_sum_of_squares(k, true);
        let sw = rho_sweep(&inst, &sched, Norm::L1, &OracleGrid::default(), &s()).map_err(|e| e.to_string())?;
        let v = sweep_violations(&sw, &s());
        ensure(v.is_empty(), || format!("{}: {}", inst.name, v.join("; ")))?;
        sweeps += 1;
    }
    Ok(format!("{sweeps} sweeps, gap >= 0 and nonincreasing"))
}

/// Every vertex of `{a_in x <= b_in}`; the box rows make it a polytope.
fn vertex_oracle(lp: &LinearProgram) -> Option<Rational> {
    let n = lp.n();
    let mut rows = lp.a_in.clone();
    let mut rhs = lp.b_in.clone();
    for i in 0..lp.a_eq.rows() {
        rows.push_row(lp.a_eq.row(i).to_vec());
        rhs.push(lp.b_eq[i].clone());
        rows.push_row(lp.a_eq.row(i).iter().map(|v| -v).collect());
        rhs.push(-&lp.b_eq[i]);
    }
    let mut best: Option<Rational> = None;
    for pick in (0..rows.rows()).combinations(n) {
        let sq = rows.select_rows(&pick);
        let Ok(inv) = inverse(&sq) else { continue };
        let x = inv.mul_vec(&pick.iter().map(|&i| rhs[i].clone()).collect::<Vec<_>>());
        if lp.is_feasible(&x) {
            let z: Rational = lp.c.iter().zip(&x).map(|(a, b)| a * b).sum();
            if best.as_ref().is_none_or(|b| &z < b) {
                best = Some(z);
            }
        }
    }
    best
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, lo: i64, hi: i64) -> RatMatrix {
    let mut m = RatMatrix::zeros(0, cols);
    for _ in 0..rows {
        m.push_row((0..cols).map(|_| int(rng.gen_range(lo..=hi))).collect());
    }
    m
}

fn box_rows(n: usize, cols: &[usize], r: i64, a: &mut RatMatrix, b: &mut Vec<Rational>) {
    for &j in cols {
        for s in [1, -1] {
            let mut row = vec![Rational::zero(); n];
            row[j] = int(s);
            a.push_row(row);
            b.push(int(r));
        }
    }
}

/// Integer-box exhaustion: every integer point, continuous part by vertex
/// enumeration.
fn mip_oracle(inst: &ProblemInstance, m_bound: i64) -> Option<Rational> {
    let n = inst.n();
    let cont = inst.continuous();
    let mut best: Option<Rational> = None;
    for p in inst.integer.iter().map(|_| -m_bound..=m_bound).multi_cartesian_product() {
        let mut fixed = vec![Rational::zero(); n];
        for (k, &j) in inst.integer.iter().enumerate() {
            fixed[j] = int(p[k]);
        }
        let shift_a = inst.a.mul_vec(&fixed);
        let shift_e = inst.e.mul_vec(&fixed);
        let base: Rational = inst.objective.c.iter().zip(&fixed).map(|(a, b)| a * b).sum();
        let z = if cont.is_empty() {
            let ok = shift_a == inst.b && shift_e.iter().zip(&inst.f).all(|(l, r)| l <= r);
            ok.then_some(base)
        } else {
            let lp = LinearProgram {
                c: cont.iter().map(|&j| inst.objective.c[j].clone()).collect(),
                a_eq: inst.a.select_cols(&cont),
                b_eq: inst.b.iter().zip(&shift_a).map(|(b, s)| b - s).collect(),
                a_in: inst.e.select_cols(&cont),
                b_in: inst.f.iter().zip(&shift_e).map(|(f, s)| f - s).collect(),
            };
            vertex_oracle(&lp).map(|v| v + base)
        };
        if let Some(z) = z {
            if best.as_ref().is_none_or(|b| &z < b) {
                best = Some(z);
            }
        }
    }
    best
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut lps, mut qps, mut mips) = (0, 0, 0);
    for _ in 0..40 {
        let n = rng.gen_range(1..=3);
        let k = rng.gen_range(0..=3);
        let mut a_in = random_matrix(&mut rng, k, n, -3, 3);
        let mut b_in: Vec<Rational> = (0..k).map(|_| int(rng.gen_range(-2..=4))).collect();
        box_rows(n, &(0..n).collect::<Vec<_>>(), 4, &mut a_in, &mut b_in);
        let eq = rng.gen_range(0..=1);
        let lp = LinearProgram {
            c: (0..n).map(|_| int(rng.gen_range(-3..=3))).collect(),
            a_eq: random_matrix(&mut rng, eq, n, -2, 2),
            b_eq: (0..eq).map(|_| int(rng.gen_range(-3..=3))).collect(),
            a_in,
            b_in,
        };
        let got = solve_lp(&lp);
        match vertex_oracle(&lp) {
            Some(z) => ensure(got.status == LpStatus::Optimal && got.z == z, || format!("LP: {:?} {} vs {z}", got.status, got.z))?,
            None => ensure(got.status == LpStatus::Infeasible, || format!("LP: {:?}, oracle infeasible", got.status))?,
        }
        lps += 1;
    }
    for _ in 0..40 {
        let n = rng.gen_range(1..=3);
        let r = random_matrix(&mut rng, n, n, -2, 2);
        let k = rng.gen_range(0..=6);
        let qp = QuadraticProgram {
            q: r.transpose().mul(&r).unwrap(),
            c: (0..n).map(|_| int(rng.gen_range(-3..=3))).collect(),
            a_eq: RatMatrix::zeros(0, n),
            b_eq: vec![],
            a_in: random_matrix(&mut rng, k, n, -2, 2),
            b_in: (0..k).map(|_| int(rng.gen_range(-1..=3))).collect(),
        };
        let fast = solve_qp(&qp, 100_000).map_err(|e| e.to_string())?;
        let slow = solve_qp_exhaustive(&qp);
        ensure(fast.status == slow.status, || format!("QP status {:?} vs {:?}", fast.status, slow.status))?;
        if fast.status == QpStatus::Optimal {
            ensure(fast.z == slow.z, || format!("QP value {} vs {}", fast.z, slow.z))?;
        }
        qps += 1;
    }
    for t in 0..30 {
        let n1 = rng.gen_range(1..=2);
        let n2 = rng.gen_range(0..=2);
        let n = n1 + n2;
        let m_bound = rng.gen_range(1..=2);
        let a = random_matrix(&mut rng, 1, n, -2, 2);
        let b = vec![int(rng.gen_range(-2..=2))];
        let rows = rng.gen_range(0..=1);
        let mut e = random_matrix(&mut rng, rows, n, -2, 2);
        let mut f: Vec<Rational> = (0..e.rows()).map(|_| int(rng.gen_range(0..=3))).collect();
        box_rows(n, &(n1..n).collect::<Vec<_>>(), 3, &mut e, &mut f);
        let c: Vec<Rational> = (0..n).map(|_| int(rng.gen_range(-3..=3))).collect();
        let inst = ProblemInstance::new(
            &format!("mip-{t}"),
            a,
            b,
            e,
            f,
            (0..n1).collect(),
            Some(int(m_bound)),
            ObjectiveDescriptor::linear(c),
        )
        .map_err(|e| e.to_string())?;
        let got = solve_mip(&inst, &s()).map_err(|e| e.to_string())?;
        match mip_oracle(&inst, m_bound) {
            Some(z) => ensure(got.status == MipStatus::Optimal && got.z == ExtValue::Exact(z.clone()), || {
                format!("{}: {:?} {} vs {z}", inst.name, got.status, got.z)
            })?,
            None => ensure(got.status == MipStatus::Infeasible, || format!("{}: {:?}, oracle infeasible", inst.name, got.status))?,
        }
        mips += 1;
    }
    Ok(format!("{lps} LPs, {qps} QPs, {mips} MIPs bit-exact"))
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let points: Vec<Vec<f64>> = (0..10).map(|_| (0..4).map(|_| rng.gen_range(-3.0..3.0)).collect()).collect();
    let mut worst: f64 = 0.0;
    for f in oracles::all() {
        let dev = gradient_check(*f, &points, 1e-5);
        ensure(dev <= 1e-5, || format!("{}: relative deviation {dev:e}", f.name()))?;
        worst = worst.max(dev);
    }
    Ok(format!("{} oracles, worst relative deviation {worst:.2e}", oracles::all().len()))
}

fn criterion_9() -> Outcome {
    let inst = corpus::asymptotic_instance();
    let sched = geometric_schedule(&int(1), &int(10), 5);
    let t = asymptotic_experiment(&inst, &sched, &s()).map_err(|e| e.to_string())?;
    let z_ip = t.z_ip.exact().cloned().ok_or("z_IP not exact")?;
    for r in &t.records {
        let closed = corpus::asymptotic_gap(&r.rho);
        ensure(r.gap == ExtValue::Exact(closed.clone()), || format!("rho = {}: gap {} vs closed form {closed}", r.rho, r.gap))?;
    }
    let first = t.records.first().unwrap();
    let last = t.records.last().unwrap();
    ensure(first.gap > ExtValue::Exact(Rational::zero()), || format!("gap at rho = 1 is {}", first.gap))?;
    ensure(last.rho == int(10_000), || format!("schedule ends at {}", last.rho))?;
    let lim = z_ip.abs() / int(1000);
    ensure(last.gap <= ExtValue::Exact(lim.clone()), || format!("final gap {} > {lim}", last.gap))?;
    Ok(format!("gap {} at rho = 1, {} at rho = 1e4", first.gap, last.gap))
}

fn criterion_10() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut outputs = vec![];
    for workers in [1, 4] {
        let path = dir.path().join(format!("selftest-{workers}.json"));
        let status = Command::new(env!("CARGO_BIN_EXE_sharp-ald"))
            .args(["selftest", "--workers", &workers.to_string(), "--out"])
            .arg(&path)
            .output()
            .map_err(|e| e.to_string())?;
        ensure(status.status.success(), || format!("selftest with {workers} workers exited {:?}", status.status.code()))?;
        outputs.push(std::fs::read(&path).map_err(|e| e.to_string())?);
    }
    ensure(outputs[0] == outputs[1], || "outputs differ between 1 and 4 workers".into())?;
    Ok(format!("{} identical bytes", outputs[0].len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("SALR equals the value-function oracle", criterion_1),
        ("pure-integer threshold closes the gap", criterion_2),
        ("MILP Lipschitz region and closure", criterion_3),
        ("MIQP quadratic growth bound", criterion_4),
        ("strongly convex multiplier threshold", criterion_5),
        ("weak duality and monotone sweeps", criterion_6),
        ("solver oracles", criterion_7),
        ("oracle gradient check", criterion_8),
        ("squared-l2 asymptotic gap", criterion_9),
        ("determinism across worker counts", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = std::time::Instant::now();
        let res = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panic: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match res {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} ({secs:.1}s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why} ({secs:.1}s)", i + 1);
            }
        }
    }
    if failed == 0 {
        println!("acceptance: all 10 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} of 10 criteria failed");
        ExitCode::FAILURE
    }
}
