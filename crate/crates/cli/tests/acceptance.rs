//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line for
//! each and exits nonzero if any fails.
//!
//! Run with `cargo test -p unisolve-cli --test acceptance`.

use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Instant;

use serde_json::Value;
use unisolve_core::random::Sampler;
use unisolve_core::structure::TreeStructure;
use unisolve_core::{
    auto_select, finite_difference_jvp, jvp_case, jvp_solve, jvp_solve_with_case, linear_solve,
    vjp_solve, vjp_solve_with_case, AnySolver, AutoLinearSolver, DiagonalOperator, Error,
    IterativeOptions, JvpCase, LinearOperator, LinearSolver, Lu, Matrix, MatrixOperator, Operator,
    OperatorInfo, Qr, Solution, SolveResult, SolveTangent, Svd, TagSet, TreeVector,
    TridiagonalOperator, WellPosedMode,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($fmt)+));
        }
    };
}

fn dense(a: &Matrix) -> Operator {
    MatrixOperator::new(a.clone()).into_operator()
}

fn tv(v: &[f64]) -> TreeVector {
    TreeVector::from_vec(v.to_vec())
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn rel_err(got: &[f64], want: &[f64]) -> f64 {
    let diff: Vec<f64> = got.iter().zip(want).map(|(x, y)| x - y).collect();
    norm(&diff) / norm(want).max(1e-300)
}

fn solve<S: LinearSolver>(solver: &S, op: &Operator, b: &[f64]) -> Solution {
    linear_solve(op, &tv(b), solver).unwrap()
}

// ---------------------------------------------------------------------------
// 1. Pseudoinverse semantics

fn pseudoinverse_semantics() -> Outcome {
    let start = Instant::now();
    let mut rng = Sampler::new(1);
    let svd = Svd::default();
    for i in 0..200 {
        let m = 1 + rng.index(8);
        let n = 1 + rng.index(8);
        let k = m.min(n);
        let (m, n, rank) = match i % 4 {
            0 => (k, k, k),
            1 => (m.max(n), k, k),
            2 => (k, m.max(n), k),
            _ => (m, n, rng.index(k)),
        };
        let a = rng.fixed_rank(m, n, rank);
        let state = svd.init(&dense(&a)).unwrap();
        let mut p = Matrix::zeros(n, m);
        for j in 0..m {
            let e = TreeVector::basis(&TreeStructure::flat(m), j);
            p.set_column(j, svd.compute(&state, &e).unwrap().value.as_slice());
        }
        let ap = a.matmul(&p);
        let pa = p.matmul(&a);
        let close = |x: &Matrix, y: &Matrix| x.sub(y).max_abs() <= 1e-8 * (1.0 + y.max_abs());
        ensure!(close(&ap.matmul(&a), &a), "A A† A ≠ A on instance {i} ({m}x{n}, rank {rank})");
        ensure!(close(&pa.matmul(&p), &p), "A† A A† ≠ A† on instance {i}");
        ensure!(close(&ap.transpose(), &ap), "A A† not symmetric on instance {i}");
        ensure!(close(&pa.transpose(), &pa), "A† A not symmetric on instance {i}");
    }
    let elapsed = start.elapsed().as_secs_f64();
    ensure!(elapsed < 10.0, "took {elapsed:.2} s");
    Ok(format!("200 instances in {elapsed:.2} s"))
}

// ---------------------------------------------------------------------------
// 2. Every solver against the SVD, Thomas against LU

fn tight() -> IterativeOptions {
    IterativeOptions { rtol: 1e-12, max_steps: Some(1000), ..Default::default() }
}

fn instance(name: &str, rng: &mut Sampler) -> (Operator, Matrix) {
    let n = 1 + rng.index(8);
    let tagged = |a: Matrix, tags: TagSet| (MatrixOperator::new(a.clone()).with_tags(tags).into_operator(), a);
    match name {
        "lu" | "gmres" => {
            let a = rng.well_conditioned(n, n);
            (dense(&a), a)
        }
        "bicgstab" => {
            let mut a = rng.matrix(n, n);
            for i in 0..n {
                a[(i, i)] += n as f64 + 1.0;
            }
            (dense(&a), a)
        }
        "qr" | "svd" => {
            let m = 1 + rng.index(8);
            let a = rng.well_conditioned(m, n);
            (dense(&a), a)
        }
        "cholesky" | "cg" => tagged(rng.spd(n), TagSet::SYMMETRIC | TagSet::POSITIVE_SEMIDEFINITE),
        "diagonal" => {
            let d: Vec<f64> = (0..n)
                .map(|_| rng.uniform(0.5, 2.0) * if rng.index(2) == 0 { 1.0 } else { -1.0 })
                .collect();
            (DiagonalOperator::new(d.clone()).into_operator(), Matrix::from_diagonal(&d))
        }
        "triangular" => {
            let lower = rng.index(2) == 0;
            let a = Matrix::from_fn(n, n, |i, j| {
                if i == j {
                    rng.uniform(1.0, 2.0)
                } else if (lower && j < i) || (!lower && j > i) {
                    rng.uniform(-0.3, 0.3)
                } else {
                    0.0
                }
            });
            tagged(a, if lower { TagSet::LOWER_TRIANGULAR } else { TagSet::UPPER_TRIANGULAR })
        }
        "tridiagonal" => {
            let (l, d, u) = rng.dominant_bands(n);
            let op = TridiagonalOperator::new(l, d, u).unwrap().into_operator();
            let a = op.as_matrix().unwrap();
            (op, a)
        }
        other => panic!("no generator for {other}"),
    }
}

fn solvers_match_svd() -> Outcome {
    let mut rng = Sampler::new(2);
    let mut worst = 0.0f64;
    for name in AnySolver::NAMES {
        let solver = AnySolver::from_name(name, tight()).unwrap();
        for i in 0..100 {
            let (op, a) = instance(name, &mut rng);
            let b = rng.vector(a.rows());
            let sol = solve(&solver, &op, &b);
            ensure!(sol.result == SolveResult::Success, "{name} instance {i}: {}", sol.result);
            let reference = solve(&Svd::default(), &dense(&a), &b);
            let err = rel_err(sol.value.as_slice(), reference.value.as_slice());
            ensure!(err <= 1e-8, "{name} instance {i}: relative error {err:e}");
            worst = worst.max(err);
        }
    }
    let mut thomas_worst = 0.0f64;
    for i in 0..10 {
        let (l, d, u) = rng.dominant_bands(200);
        let op = TridiagonalOperator::new(l, d, u).unwrap().into_operator();
        let b = rng.vector(200);
        let thomas = solve(&unisolve_core::Tridiagonal, &op, &b);
        let lu = solve(&Lu, &dense(&op.as_matrix().unwrap()), &b);
        let err = rel_err(thomas.value.as_slice(), lu.value.as_slice());
        ensure!(err <= 1e-10, "Thomas vs LU at n=200, system {i}: {err:e}");
        thomas_worst = thomas_worst.max(err);
    }
    Ok(format!(
        "10 solvers x 100 instances, worst {worst:.1e}; Thomas vs LU n=200 worst {thomas_worst:.1e}"
    ))
}

// ---------------------------------------------------------------------------
// 3-6. Derivatives

struct Problem {
    solver: AnySolver,
    a: Matrix,
    b: Vec<f64>,
    v_mat: Matrix,
    v: Vec<f64>,
}

/// A problem of the rank structure `case` describes, with a tangent that
/// keeps the rank of `A + hV` fixed.
fn problem(case: JvpCase, rng: &mut Sampler) -> Problem {
    let small = 1 + rng.index(5);
    let large = small + 1 + rng.index(6 - small);
    let (solver, a, v_mat) = match case {
        JvpCase::WellPosed => (AnySolver::Lu(Lu), rng.well_conditioned(small, small), rng.matrix(small, small)),
        JvpCase::IndependentColumns => (AnySolver::Qr(Qr), rng.well_conditioned(large, small), rng.matrix(large, small)),
        JvpCase::IndependentRows => (AnySolver::Qr(Qr), rng.well_conditioned(small, large), rng.matrix(small, large)),
        JvpCase::General => {
            let (m, n) = if rng.index(2) == 0 { (large, small) } else { (small, large) };
            let r = 1 + rng.index(m.min(n));
            let r = if r == m.min(n) { r - 1 } else { r };
            let u = rng.orthogonal(m);
            let w = rng.orthogonal(n);
            let left = Matrix::from_fn(m, r, |i, k| u[(i, k)] * (1.0 + k as f64 * 0.5));
            let right = Matrix::from_fn(n, r, |j, k| w[(j, k)]);
            let a = left.matmul(&right.transpose());
            let v_mat = if rng.index(2) == 0 {
                rng.matrix(m, r).matmul(&right.transpose())
            } else {
                left.matmul(&rng.matrix(n, r).transpose())
            };
            (AnySolver::Svd(Svd::default()), a, v_mat)
        }
    };
    let m = a.rows();
    Problem { solver, b: rng.vector(m), v: rng.vector(m), a, v_mat }
}

impl Problem {
    fn tangent(&self) -> SolveTangent {
        SolveTangent::new(dense(&self.v_mat), tv(&self.v))
    }

    fn jvp(&self, case: JvpCase) -> Vec<f64> {
        jvp_solve_with_case(&self.solver, &dense(&self.a), &tv(&self.b), &self.tangent(), case)
            .unwrap()
            .tangent
            .unwrap()
            .into_flat()
    }
}

fn jvp_matches_finite_differences() -> Outcome {
    let mut rng = Sampler::new(3);
    let mut worst = 0.0f64;
    for case in JvpCase::ALL {
        for i in 0..50 {
            let p = problem(case, &mut rng);
            ensure!(jvp_case(&p.solver, &*dense(&p.a)) == case, "{case} instance {i} dispatched elsewhere");
            let fd = finite_difference_jvp(&p.a, &p.b, &p.v_mat, &p.v, 1e-6).unwrap();
            let got = p.jvp(case);
            let err = if norm(&fd) > 1e-8 { rel_err(&got, &fd) } else { norm(&got) };
            ensure!(err <= 1e-5, "{case} instance {i}: relative error {err:e}");
            worst = worst.max(err);
        }
        for i in 0..5 {
            let p = problem(case, &mut rng);
            let exact = p.jvp(case);
            let errs: Vec<f64> = [1e-3, 1e-4, 1e-5]
                .iter()
                .map(|&h| rel_err(&finite_difference_jvp(&p.a, &p.b, &p.v_mat, &p.v, h).unwrap(), &exact))
                .collect();
            for (k, floor) in [(1, 1e-10), (2, 1e-9)] {
                ensure!(
                    errs[k] <= errs[k - 1] / 30.0 || errs[k] <= floor,
                    "{case} decay instance {i}: errors {errs:?} are not quadratic in h"
                );
            }
        }
    }
    Ok(format!("4 cases x 50 instances, worst {worst:.1e}; quadratic decay on 4 x 5"))
}

fn cases_collapse() -> Outcome {
    let mut rng = Sampler::new(4);
    let agree = |x: &[f64], y: &[f64]| rel_err(x, y) <= 1e-9;
    for i in 0..25 {
        let n = 1 + rng.index(6);
        let p = Problem {
            solver: AnySolver::Lu(Lu),
            a: rng.well_conditioned(n, n),
            b: rng.vector(n),
            v_mat: rng.matrix(n, n),
            v: rng.vector(n),
        };
        let reference = p.jvp(JvpCase::WellPosed);
        for case in JvpCase::ALL {
            ensure!(agree(&p.jvp(case), &reference), "square instance {i}: {case} disagrees");
        }
    }
    for (label, case) in [("full column rank", JvpCase::IndependentColumns), ("full row rank", JvpCase::IndependentRows)] {
        for i in 0..25 {
            let p = problem(case, &mut rng);
            ensure!(
                agree(&p.jvp(JvpCase::General), &p.jvp(case)),
                "{label} instance {i}: general formula disagrees with {case}"
            );
        }
    }
    Ok("25 square, 25 tall, 25 wide instances agree to 1e-9".into())
}

fn vjp_pairing() -> Outcome {
    let mut rng = Sampler::new(5);
    let mut worst = 0.0f64;
    for case in JvpCase::ALL {
        for i in 0..20 {
            let p = problem(case, &mut rng);
            let (m, n) = p.a.shape();
            let (v_mat, v, x_bar) = (rng.matrix(m, n), rng.vector(m), rng.vector(n));
            let p = Problem { v_mat, v, ..p };
            let x_dot = p.jvp(case);
            let cot = vjp_solve_with_case(&p.solver, &dense(&p.a), &tv(&p.b), &tv(&x_bar), case)
                .unwrap()
                .cotangent
                .unwrap();
            let lhs: f64 = x_bar.iter().zip(&x_dot).map(|(a, b)| a * b).sum();
            let rhs = cot.pair(&p.tangent()).unwrap();
            let scale = norm(&x_bar) * norm(&x_dot)
                + cot.operator.frobenius_norm() * p.v_mat.frobenius_norm()
                + cot.vector.norm() * norm(&p.v);
            let err = (lhs - rhs).abs() / scale.max(1e-300);
            ensure!(err <= 1e-9, "{case} pair {i}: relative mismatch {err:e}");
            worst = worst.max(err);
        }
    }
    Ok(format!("4 cases x 20 pairs, worst {worst:.1e}"))
}

struct CountingSolver<S> {
    inner: S,
    inits: AtomicUsize,
}

impl<S: LinearSolver> LinearSolver for CountingSolver<S> {
    type State = S::State;
    fn name(&self) -> &'static str {
        self.inner.name()
    }
    fn check(&self, info: &OperatorInfo) -> unisolve_core::Result<()> {
        self.inner.check(info)
    }
    fn init(&self, op: &Operator) -> unisolve_core::Result<S::State> {
        self.inits.fetch_add(1, Ordering::SeqCst);
        self.inner.init(op)
    }
    fn compute(&self, state: &S::State, b: &TreeVector) -> unisolve_core::Result<Solution> {
        self.inner.compute(state, b)
    }
    fn transpose(&self, state: &S::State) -> S::State {
        self.inner.transpose(state)
    }
    fn allow_dependent_rows(&self, info: &OperatorInfo) -> bool {
        self.inner.allow_dependent_rows(info)
    }
    fn allow_dependent_columns(&self, info: &OperatorInfo) -> bool {
        self.inner.allow_dependent_columns(info)
    }
}

/// A dense operator that counts how often it is materialized.
#[derive(Debug)]
struct Counted {
    a: Matrix,
    in_s: TreeStructure,
    out_s: TreeStructure,
    materialized: AtomicUsize,
}

impl LinearOperator for Counted {
    fn in_structure(&self) -> &TreeStructure {
        &self.in_s
    }
    fn out_structure(&self) -> &TreeStructure {
        &self.out_s
    }
    fn tags(&self) -> TagSet {
        TagSet::empty()
    }
    fn apply(&self, x: &[f64]) -> unisolve_core::Result<Vec<f64>> {
        Ok(self.a.matvec(x))
    }
    fn apply_transpose(&self, y: &[f64]) -> unisolve_core::Result<Vec<f64>> {
        Ok(self.a.matvec_t(y))
    }
    fn as_matrix(&self) -> unisolve_core::Result<Matrix> {
        self.materialized.fetch_add(1, Ordering::SeqCst);
        Ok(self.a.clone())
    }
    fn transpose(self: Arc<Self>) -> Operator {
        dense(&self.a.transpose())
    }
}

fn factorization_reuse() -> Outcome {
    let mut rng = Sampler::new(6);
    for case in JvpCase::ALL {
        for _ in 0..5 {
            let p = problem(case, &mut rng);
            let (m, n) = p.a.shape();
            let solver = CountingSolver { inner: p.solver, inits: 0.into() };
            let counted = Arc::new(Counted {
                a: p.a.clone(),
                in_s: TreeStructure::flat(n),
                out_s: TreeStructure::flat(m),
                materialized: 0.into(),
            });
            let op: Operator = counted.clone();
            jvp_solve(&solver, &op, &tv(&p.b), &p.tangent()).unwrap();
            let inits = solver.inits.load(Ordering::SeqCst);
            let mats = counted.materialized.load(Ordering::SeqCst);
            ensure!(inits == 1 && mats == 1, "{case} jvp: {inits} inits, {mats} factorizations");
            vjp_solve(&solver, &op, &tv(&p.b), &tv(&rng.vector(n))).unwrap();
            let inits = solver.inits.load(Ordering::SeqCst);
            let mats = counted.materialized.load(Ordering::SeqCst);
            ensure!(inits == 2 && mats == 2, "{case} vjp: {} inits, {} factorizations", inits - 1, mats - 1);
        }
    }
    for name in AnySolver::NAMES {
        let solver = AnySolver::from_name(name, tight()).unwrap();
        let (op, a) = instance(name, &mut rng);
        let state = solver.init(&op).unwrap();
        for k in 0..5 {
            let b = tv(&rng.vector(a.rows()));
            let reused = solver.compute(&state, &b).unwrap();
            let fresh = linear_solve(&op, &b, &solver).unwrap();
            ensure!(
                reused.value.as_slice() == fresh.value.as_slice(),
                "{name}: right-hand side {k} differs between reuse and a fresh solve"
            );
        }
    }
    Ok("one init and one factorization per jvp/vjp call; 5-rhs reuse bitwise equal for all solvers".into())
}

// ---------------------------------------------------------------------------
// 7. Polyalgorithm

fn expected_choice(tags: TagSet, square: bool, mode: WellPosedMode) -> Option<&'static str> {
    let has = |t| tags.contains(t);
    let chain = if has(TagSet::DIAGONAL) {
        "diagonal"
    } else if has(TagSet::TRIDIAGONAL) {
        "tridiagonal"
    } else if has(TagSet::LOWER_TRIANGULAR) {
        "triangular"
    } else if has(TagSet::SYMMETRIC) && has(TagSet::POSITIVE_SEMIDEFINITE) {
        "cholesky"
    } else {
        "lu"
    };
    match (mode, square) {
        (WellPosedMode::WellPosed, false) => None,
        (WellPosedMode::WellPosed | WellPosedMode::LeastSquares, true) => Some(chain),
        (WellPosedMode::LeastSquares, false) => Some("qr"),
        (WellPosedMode::Pseudoinverse, true) if has(TagSet::DIAGONAL) => Some("diagonal_pinv"),
        (WellPosedMode::Pseudoinverse, _) => Some("svd"),
    }
}

fn polyalgorithm() -> Outcome {
    let flags = [
        TagSet::DIAGONAL,
        TagSet::TRIDIAGONAL,
        TagSet::LOWER_TRIANGULAR,
        TagSet::SYMMETRIC,
        TagSet::POSITIVE_SEMIDEFINITE,
    ];
    let modes = [WellPosedMode::WellPosed, WellPosedMode::LeastSquares, WellPosedMode::Pseudoinverse];
    let mut cells = 0;
    for bits in 0..1u32 << flags.len() {
        let tags = (0..flags.len())
            .filter(|i| bits & (1 << i) != 0)
            .fold(TagSet::empty(), |acc, i| acc | flags[i]);
        for (rows, cols) in [(4, 4), (3, 5), (5, 3)] {
            for mode in modes {
                let got = auto_select(&OperatorInfo { rows, cols, tags }, mode);
                let ok = match expected_choice(tags, rows == cols, mode) {
                    Some(name) => got.as_ref().is_ok_and(|s| s.name() == name),
                    None => matches!(got, Err(Error::Contract(_))),
                };
                ensure!(ok, "tags [{tags}] {rows}x{cols} mode {mode}: got {got:?}");
                cells += 1;
            }
        }
    }
    let op = dense(&Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]]));
    let err = linear_solve(&op, &tv(&[1.0, 2.0, 3.0]), &AutoLinearSolver::well_posed());
    ensure!(matches!(err, Err(Error::Contract(_))), "3x2 with mode true gave {err:?}");
    Ok(format!("{cells} table cells match; 3x2 with mode true is a contract error"))
}

// ---------------------------------------------------------------------------
// 8. Iterative solvers

#[derive(Debug)]
struct Probe {
    a: Matrix,
    structure: TreeStructure,
    tags: TagSet,
    forbidden: AtomicUsize,
}

impl LinearOperator for Probe {
    fn in_structure(&self) -> &TreeStructure {
        &self.structure
    }
    fn out_structure(&self) -> &TreeStructure {
        &self.structure
    }
    fn tags(&self) -> TagSet {
        self.tags
    }
    fn apply(&self, x: &[f64]) -> unisolve_core::Result<Vec<f64>> {
        Ok(self.a.matvec(x))
    }
    fn apply_transpose(&self, y: &[f64]) -> unisolve_core::Result<Vec<f64>> {
        self.forbidden.fetch_add(1, Ordering::SeqCst);
        Ok(self.a.matvec_t(y))
    }
    fn as_matrix(&self) -> unisolve_core::Result<Matrix> {
        self.forbidden.fetch_add(1, Ordering::SeqCst);
        Ok(self.a.clone())
    }
    fn transpose(self: Arc<Self>) -> Operator {
        self.forbidden.fetch_add(1, Ordering::SeqCst);
        dense(&self.a.transpose())
    }
}

fn probe(a: &Matrix, tags: TagSet) -> Arc<Probe> {
    Arc::new(Probe { a: a.clone(), structure: TreeStructure::flat(a.rows()), tags, forbidden: 0.into() })
}

fn iterative_solvers() -> Outcome {
    let mut rng = Sampler::new(8);
    let spd_tags = TagSet::SYMMETRIC | TagSet::POSITIVE_SEMIDEFINITE;
    let cg = AnySolver::from_name("cg", IterativeOptions { rtol: 1e-12, ..Default::default() }).unwrap();
    for i in 0..50 {
        let n = 1 + rng.index(6);
        let b_int = Matrix::from_fn(n, n, |_, _| rng.index(7) as f64 - 3.0);
        let a = b_int.transpose().matmul(&b_int).add(&Matrix::identity(n).scale(n as f64));
        let p = probe(&a, spd_tags);
        let op: Operator = p.clone();
        let b: Vec<f64> = (0..n).map(|_| rng.index(9) as f64 - 4.0).collect();
        let sol = solve(&cg, &op, &b);
        ensure!(sol.result == SolveResult::Success, "cg instance {i}: {}", sol.result);
        let iters = sol.diagnostics.iterations;
        ensure!(iters <= n, "cg instance {i}: {iters} iterations for n = {n}");
        ensure!(p.forbidden.load(Ordering::SeqCst) == 0, "cg instance {i} materialized the operator");
    }
    for name in ["gmres", "bicgstab"] {
        let solver = AnySolver::from_name(name, tight()).unwrap();
        for i in 0..50 {
            let n = 1 + rng.index(8);
            let a = if name == "gmres" {
                rng.well_conditioned(n, n)
            } else {
                let mut a = rng.matrix(n, n);
                for k in 0..n {
                    a[(k, k)] += n as f64 + 1.0;
                }
                a
            };
            let p = probe(&a, TagSet::empty());
            let op: Operator = p.clone();
            let b = rng.vector(n);
            let sol = solve(&solver, &op, &b);
            ensure!(sol.result == SolveResult::Success, "{name} instance {i}: {}", sol.result);
            let reference = solve(&Lu, &dense(&a), &b);
            let err = rel_err(sol.value.as_slice(), reference.value.as_slice());
            ensure!(err <= 1e-8, "{name} instance {i}: relative error {err:e}");
            ensure!(p.forbidden.load(Ordering::SeqCst) == 0, "{name} instance {i} materialized the operator");
        }
    }
    Ok("cg within n steps on 50 integer SPD systems; gmres and bicgstab match LU on 50 each; no materialization".into())
}

// ---------------------------------------------------------------------------
// 9. CLI end to end

fn cli(dir: &Path, args: &[&str]) -> (i32, Value, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_unisolve"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap();
    let mut report: Value = serde_json::from_slice(&out.stdout).unwrap();
    report.as_object_mut().unwrap().remove("wall_time_ns");
    let canonical = serde_json::to_string(&report).unwrap();
    (out.status.code().unwrap(), report, canonical)
}

fn cli_end_to_end() -> Outcome {
    let dir = std::env::temp_dir().join(format!("unisolve-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let files = [
        ("identity.mtx", "%%MatrixMarket matrix coordinate real general\n3 3 3\n1 1 1\n2 2 1\n3 3 1\n"),
        ("b3.json", "[1, 2, 3]"),
        ("singular.json", "[[1, 2], [2, 4]]"),
        ("b2.json", "[1, 1]"),
        ("tall.json", "[[1], [1]]"),
        ("tall_b.json", "[1, 3]"),
    ];
    for (name, contents) in files {
        std::fs::write(dir.join(name), contents).unwrap();
    }
    let examples: [(&str, Vec<&str>); 3] = [
        ("identity", vec!["solve", "--operator", "identity.mtx", "--rhs", "b3.json"]),
        ("singular lu", vec!["solve", "--operator", "singular.json", "--rhs", "b2.json", "--solver", "lu"]),
        ("tall least squares", vec!["solve", "--operator", "tall.json", "--rhs", "tall_b.json", "--mode", "none"]),
    ];
    let result = (|| {
        for (label, args) in &examples {
            let (code, report, first) = cli(&dir, args);
            let (code_again, _, second) = cli(&dir, args);
            ensure!(first == second && code == code_again, "{label}: two runs differ:\n{first}\n{second}");
            match *label {
                "identity" => {
                    ensure!(code == 0, "identity exited {code}");
                    ensure!(report["solution"] == serde_json::json!([1.0, 2.0, 3.0]), "identity gave {report}");
                }
                "singular lu" => {
                    ensure!(code == 2 && report["result"] == "singular", "singular lu gave exit {code}: {report}");
                }
                _ => {
                    let x = report["solution"][0].as_f64().unwrap_or(f64::NAN);
                    ensure!(code == 0 && (x - 2.0).abs() <= 1e-12, "tall system gave exit {code}: {report}");
                }
            }
        }
        Ok("3 examples give the stated outputs, identical across two runs".to_string())
    })();
    let _ = std::fs::remove_dir_all(&dir);
    result
}

// ---------------------------------------------------------------------------

fn main() {
    let criteria: [Criterion; 9] = [
        ("1 pseudoinverse semantics", pseudoinverse_semantics),
        ("2 solver/oracle equivalence", solvers_match_svd),
        ("3 jvp correctness", jvp_matches_finite_differences),
        ("4 case collapse", cases_collapse),
        ("5 vjp correctness", vjp_pairing),
        ("6 factorization reuse", factorization_reuse),
        ("7 polyalgorithm", polyalgorithm),
        ("8 iterative solvers", iterative_solvers),
        ("9 cli end-to-end", cli_end_to_end),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (label, criterion) in criteria {
        let outcome = panic::catch_unwind(AssertUnwindSafe(criterion)).unwrap_or_else(|payload| {
            let message = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into());
            Err(format!("panicked: {message}"))
        });
        match outcome {
            Ok(detail) => println!("PASS criterion {label}: {detail}"),
            Err(reason) => {
                failed += 1;
                println!("FAIL criterion {label}: {reason}");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
