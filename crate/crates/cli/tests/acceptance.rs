//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::fs;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qsw_cli::commands;
use qsw_cli::RunConfig;
use qsw_core::discrimination::{
    binary_pair_paper, brute_force_binary_bound, helstrom_binary, optimal_bound,
    symmetric_ensemble, DiscriminationTask,
};
use qsw_core::dynamics::{
    build_liouvillian, classical_propagate, propagate, sink_populations, trace_residual,
};
use qsw_core::numerics::{
    hermitian_eigenvalues, matrix_exponential, to_complex, ComplexMatrix, RealMatrix, C64, I,
};
use qsw_core::optimizer::{maximize_binary_with, BinarySearch};
use qsw_core::schemes::{materialize, param_count};
use qsw_core::topology::build_layered;
use qsw_core::{
    DensityMatrix, NetworkTopology, OptimizeOptions, SchemeId, SweepRecord, WalkParameters,
};

const REFERENCE_BINARY: f64 = 0.7795;
const REFERENCE_FOURARY: f64 = 0.7750;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn model_222() -> NetworkTopology {
    build_layered(2, 2, 2, false, false).unwrap()
}

fn model_4r44() -> NetworkTopology {
    build_layered(4, 4, 4, true, false).unwrap()
}

fn max_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn random_theta(rng: &mut ChaCha8Rng, scheme: SchemeId, topo: &NetworkTopology) -> Vec<f64> {
    let n = param_count(scheme, topo);
    if scheme == SchemeId::B {
        (0..n)
            .map(|_| f64::from(u8::from(rng.random_bool(0.5))))
            .collect()
    } else {
        (0..n).map(|_| rng.random_range(-2.0..=2.0)).collect()
    }
}

fn random_input_state(rng: &mut ChaCha8Rng, m: usize, dim: usize) -> DensityMatrix {
    let g = ComplexMatrix::from_fn(m, m, |_, _| {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    let rho = &g * g.adjoint();
    let tr: f64 = (0..m).map(|k| rho[(k, k)].re).sum();
    let mut full = ComplexMatrix::zeros(dim, dim);
    full.view_mut((0, 0), (m, m))
        .copy_from(&(rho / C64::from(tr)));
    DensityMatrix::new(full).unwrap()
}

/// Closed-form Helstrom value for the printed qubit pair with equal priors.
fn binary_oracle() -> f64 {
    let a = ((2.0 + 2f64.sqrt()) / 4.0 - 0.68) / 2.0;
    let b = (C64::new(0.25, 0.25) - C64::new(-0.13, -0.13)) / 2.0;
    0.5 * (1.0 + 2.0 * (a * a + b.norm_sqr()).sqrt())
}

fn criterion_1() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("config.json");
    fs::write(&cfg, r#"{"topology": {"M": 4, "N": 4, "O": 4, "reduced_input": true}, "ensemble": "paper-4ary"}"#).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_qsw"))
        .args([
            "bounds",
            "--config",
            cfg.to_str().unwrap(),
            "--out-dir",
            dir.path().to_str().unwrap(),
        ])
        .output()
        .unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    let printed: Option<f64> = stdout
        .lines()
        .find_map(|l| l.strip_prefix("bound = "))
        .and_then(|rest| rest.split_whitespace().next())
        .and_then(|v| v.parse().ok());
    let exact = optimal_bound(&symmetric_ensemble(4, 0.7, 4).unwrap())
        .unwrap()
        .value;
    let Some(printed) = printed else {
        return check(false, format!("no bound in CLI output: {stdout}"));
    };
    let err = (exact - REFERENCE_FOURARY)
        .abs()
        .max((printed - REFERENCE_FOURARY).abs());
    check(
        out.status.success() && err <= 1e-9,
        format!("bound {exact:.12} (CLI {printed}), |diff| {err:.1e} <= 1e-9"),
    )
}

fn criterion_2() -> Outcome {
    let ens = binary_pair_paper();
    let s = ens.states();
    let helstrom = helstrom_binary(&s[0], &s[1], 0.5).unwrap();
    let grid = brute_force_binary_bound(&s[0], &s[1], 0.5, 512).unwrap();
    let oracle = binary_oracle();
    let (d1, d2, d3) = (
        (helstrom - oracle).abs(),
        (helstrom - grid).abs(),
        (helstrom - REFERENCE_BINARY).abs(),
    );
    check(
        d1 <= 1e-12 && d2 <= 1e-4 && d3 <= 5e-3,
        format!(
            "helstrom {helstrom:.12}; oracle diff {d1:.1e} <= 1e-12, grid-512 diff {d2:.1e} <= 1e-4, reference diff {d3:.1e} <= 5e-3"
        ),
    )
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let models = [model_222(), model_4r44()];
    let (mut worst_trace, mut worst_eig, mut worst_mono, mut worst_semi) =
        (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for draw in 0..200 {
        let topo = &models[draw % 2];
        let scheme = SchemeId::ALL[rng.random_range(0..4)];
        let theta = random_theta(&mut rng, scheme, topo);
        let p = rng.random_range(0.0..=1.0);
        let tau = rng.random_range(0.0..=100.0);
        let wp = WalkParameters::new(materialize(scheme, topo, &theta).unwrap(), p, 1.0).unwrap();
        let l = build_liouvillian(&wp, topo).unwrap();
        let rho0 = random_input_state(&mut rng, topo.n_input(), topo.dim());

        let rho = propagate(&rho0, &l, tau).unwrap();
        worst_trace = worst_trace.max(trace_residual(&rho));
        worst_eig = worst_eig.min(hermitian_eigenvalues(rho.matrix()).unwrap()[0]);

        let t1 = rng.random_range(0.0..=tau);
        let stepped = propagate(&propagate(&rho0, &l, t1).unwrap(), &l, tau - t1).unwrap();
        worst_semi = worst_semi.max(max_diff(rho.matrix(), stepped.matrix()));

        let step = l.propagator(tau / 19.0).unwrap();
        let mut state = rho0.clone();
        let mut previous = sink_populations(&state, topo).unwrap().populations;
        for _ in 1..20 {
            state = step.apply(&state).unwrap();
            let now = sink_populations(&state, topo).unwrap().populations;
            for (a, b) in previous.iter().zip(&now) {
                worst_mono = worst_mono.max(a - b);
            }
            previous = now;
        }
    }
    check(
        worst_trace <= 1e-8 && worst_eig >= -1e-7 && worst_mono <= 1e-9 && worst_semi <= 1e-8,
        format!(
            "200 draws: max trace residual {worst_trace:.1e}, min eigenvalue {worst_eig:.1e}, \
             max sink drop {worst_mono:.1e}, max semigroup diff {worst_semi:.1e}"
        ),
    )
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let models = [model_222(), model_4r44()];
    let (mut classical_err, mut unitary_err) = (0.0f64, 0.0f64);
    for draw in 0..40 {
        let topo = &models[draw % 2];
        let d = topo.dim();
        let scheme = SchemeId::ALL[draw % 4];
        let theta = random_theta(&mut rng, scheme, topo);
        let tau = rng.random_range(0.0..=100.0);
        let gamma_s = rng.random_range(0.1..=2.0);

        let wp =
            WalkParameters::new(materialize(scheme, topo, &theta).unwrap(), 1.0, gamma_s).unwrap();
        let mut rates = wp.transition.clone();
        for j in 0..d {
            let out: f64 = wp.transition.column(j).sum();
            rates[(j, j)] -= out;
        }
        for &(sinker, sink) in topo.sink_map() {
            rates[(sink, sinker)] += 2.0 * gamma_s;
            rates[(sinker, sinker)] -= 2.0 * gamma_s;
        }
        let mut q0 = vec![0.0; d];
        for q in q0.iter_mut().take(topo.n_active()) {
            *q = rng.random_range(0.0..1.0);
        }
        let total: f64 = q0.iter().sum();
        q0.iter_mut().for_each(|q| *q /= total);
        let rho0 = DensityMatrix::new(diagonal_state(&q0)).unwrap();
        let rho = propagate(&rho0, &build_liouvillian(&wp, topo).unwrap(), tau).unwrap();
        let q = classical_propagate(&q0, &(RealMatrix::identity(d, d) + rates), tau).unwrap();
        for (k, qk) in q.iter().enumerate() {
            classical_err = classical_err.max((rho.matrix()[(k, k)].re - qk).abs());
        }

        let wp = WalkParameters::new(materialize(scheme, topo, &theta).unwrap(), 0.0, 0.0).unwrap();
        let rho0 = random_input_state(&mut rng, topo.n_input(), d);
        let rho = propagate(&rho0, &build_liouvillian(&wp, topo).unwrap(), tau).unwrap();
        let u = matrix_exponential(&(to_complex(&wp.hamiltonian) * (-I * tau))).unwrap();
        unitary_err = unitary_err.max(max_diff(rho.matrix(), &(&u * rho0.matrix() * u.adjoint())));
    }
    check(
        classical_err <= 1e-6 && unitary_err <= 1e-8,
        format!("40 draws: classical diff {classical_err:.1e} <= 1e-6, unitary diff {unitary_err:.1e} <= 1e-8"),
    )
}

fn diagonal_state(q: &[f64]) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(q.len(), q.len());
    for (k, &v) in q.iter().enumerate() {
        m[(k, k)] = C64::from(v);
    }
    m
}

fn criterion_6() -> Outcome {
    let opts = OptimizeOptions::default();
    let mut mismatches = Vec::new();
    let mut cases = 0;
    for &p in &opts.p_grid {
        for tau in [1.0, 10.0, 100.0] {
            let task =
                DiscriminationTask::new(model_222(), binary_pair_paper(), p, tau, 1.0).unwrap();
            let full = maximize_binary_with(&task, &opts, BinarySearch::Exhaustive).unwrap();
            let climb = maximize_binary_with(&task, &opts, BinarySearch::HillClimb).unwrap();
            cases += 1;
            if full.evaluations != 64 || full.pc != climb.pc {
                mismatches.push(format!("p={p} tau={tau}: {} vs {}", full.pc, climb.pc));
            }
        }
    }
    check(
        mismatches.is_empty(),
        format!(
            "{cases} grid points, {} mismatches {mismatches:?}",
            mismatches.len()
        ),
    )
}

struct SweepRun {
    records: Vec<SweepRecord>,
    csv: Vec<u8>,
    bound: f64,
}

fn run_sweep(config: &str) -> SweepRun {
    let dir = tempfile::tempdir().unwrap();
    let run = RunConfig::from_json(config).unwrap().resolve(None).unwrap();
    let out = commands::sweep(&run, dir.path()).unwrap();
    SweepRun {
        records: out.records,
        csv: fs::read(out.csv_path).unwrap(),
        bound: out.bound.unwrap(),
    }
}

const SWEEP_222: &str = r#"{"topology": {"M": 2, "N": 2, "O": 2}, "ensemble": "paper-binary", "tau_grid": [1, 10, 100]}"#;
const SWEEP_4R44: &str = r#"{"topology": {"M": 4, "N": 4, "O": 4, "reduced_input": true}, "ensemble": "paper-4ary", "tau_grid": [100]}"#;

fn criterion_7(run: &SweepRun) -> Outcome {
    let pc = |s: SchemeId, p: f64, tau: f64| {
        run.records
            .iter()
            .find(|r| r.scheme == s && r.p == p && r.tau == tau)
            .map(|r| r.pc)
            .unwrap_or(f64::NAN)
    };
    let p_grid = OptimizeOptions::default().p_grid;
    let mut worst_dominance = f64::NEG_INFINITY;
    let mut worst_monotone = f64::NEG_INFINITY;
    for &p in &p_grid {
        let d = pc(SchemeId::D, p, 100.0);
        for s in [SchemeId::A, SchemeId::B, SchemeId::C] {
            worst_dominance = worst_dominance.max(pc(s, p, 100.0) - d);
        }
        for s in SchemeId::ALL {
            worst_monotone = worst_monotone.max(pc(s, p, 1.0) - pc(s, p, 10.0));
            worst_monotone = worst_monotone.max(pc(s, p, 10.0) - pc(s, p, 100.0));
        }
    }
    let best_d = p_grid
        .iter()
        .map(|&p| pc(SchemeId::D, p, 100.0))
        .fold(f64::NEG_INFINITY, f64::max);
    let gap = run.bound - best_d;
    let ok = run.records.iter().all(|r| r.pc.is_finite())
        && worst_dominance <= 1e-3
        && worst_monotone <= 1e-3
        && gap <= 0.05;
    check(
        ok,
        format!(
            "max(other - d) at tau=100 {worst_dominance:.1e} <= 1e-3, max tau drop {worst_monotone:.1e} <= 1e-3, \
             best d {best_d:.6} vs bound {:.6} (gap {gap:.4} <= 0.05)",
            run.bound
        ),
    )
}

fn criterion_5(runs: &[(&str, &SweepRun)]) -> Outcome {
    let mut details = Vec::new();
    let mut ok = true;
    for (name, run) in runs {
        let excess = run
            .records
            .iter()
            .map(|r| r.pc - run.bound)
            .fold(f64::NEG_INFINITY, f64::max);
        let finite = run.records.iter().all(|r| r.pc.is_finite());
        ok &= finite && excess <= 1e-6;
        details.push(format!(
            "{name}: {} points, max(pc - bound) {excess:.3e}",
            run.records.len()
        ));
    }
    check(ok, details.join("; "))
}

fn main() -> ExitCode {
    let mut failures = 0;
    let mut report = |id: &str, name: &str, limit: Duration, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let outcome = f();
        let elapsed = start.elapsed();
        let in_time = elapsed <= limit;
        let pass = outcome.pass && in_time;
        if !pass {
            failures += 1;
        }
        println!(
            "[{}] criterion {id} ({name}): {}; {:.1} s (limit {} s)",
            if pass { "PASS" } else { "FAIL" },
            outcome.detail,
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
    };

    report("1", "4-ary bound", Duration::from_secs(1), &mut criterion_1);
    report(
        "2",
        "binary bound",
        Duration::from_secs(5),
        &mut criterion_2,
    );
    report(
        "3",
        "physics invariants",
        Duration::from_secs(120),
        &mut criterion_3,
    );
    report(
        "4",
        "limit equivalences",
        Duration::from_secs(30),
        &mut criterion_4,
    );
    report(
        "6",
        "scheme-b exhaustive oracle",
        Duration::from_secs(300),
        &mut criterion_6,
    );

    let start = Instant::now();
    let small = run_sweep(SWEEP_222);
    let large = run_sweep(SWEEP_4R44);
    let sweep_time = start.elapsed();
    report(
        "7",
        "performance curves",
        Duration::from_secs(1800).saturating_sub(sweep_time),
        &mut || criterion_7(&small),
    );
    report(
        "5",
        "bound dominance",
        Duration::from_secs(1800).saturating_sub(sweep_time),
        &mut || criterion_5(&[("2-2-2", &small), ("4r-4-4", &large)]),
    );
    println!(
        "      sweeps: 2-2-2 {} points, 4r-4-4 {} points, {:.1} s total",
        small.records.len(),
        large.records.len(),
        sweep_time.as_secs_f64()
    );
    report("8", "determinism", Duration::from_secs(1800), &mut || {
        let again = run_sweep(SWEEP_222);
        check(
            again.csv == small.csv,
            format!(
                "rerun CSV {} bytes, identical: {}",
                again.csv.len(),
                again.csv == small.csv
            ),
        )
    });

    if failures == 0 {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failures} criteria failed");
        ExitCode::FAILURE
    }
}
