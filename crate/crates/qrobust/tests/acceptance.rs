//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

mod common;

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use qrobust::config::GridMode;
use qrobust::experiments::{cert_cell, cmd_cert_map, cmd_sweep_dep, cmd_table2, prepare, solve_channel_at};
use qrobust::ExperimentConfig;
use qrobust_core::channels::{apply_to_matrix, choi_from_kraus, depolarizing_choi, validate_cptp, KrausSet};
use qrobust_core::consts::FD_STEP;
use qrobust_core::dpbounds::{epsilon_depolarizing, epsilon_generic, epsilon_random_rotation, rotation_noise_level};
use qrobust_core::qml::{ansatz_unitary, dataset_loss, effective_effects, embed, embed_state, loss_gradient, Classifier, Embedding, NoiseModel};
use qrobust_core::qmat::min_eigenvalue;
use qrobust_core::sdp::{
    build_problem, probe_definition, problem_size, solve, verify_contraction_certificate, Order, Sample, SolveStatus, SolverConfig,
};
use qrobust_core::{random, AlphaGamma, CMatrix, DensityMatrix, PovmSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn criterion(id: u32, name: &str, limit: Duration, f: impl FnOnce() -> Check) -> bool {
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(f));
    let elapsed = start.elapsed();
    let (pass, detail) = match outcome {
        Ok(Ok(d)) if elapsed <= limit => (true, d),
        Ok(Ok(d)) => (false, format!("{d}; runtime over the {limit:?} limit")),
        Ok(Err(e)) => (false, e),
        Err(_) => (false, "panicked".to_string()),
    };
    println!("{} criterion {id} ({name}): {detail} [{elapsed:.2?}]", if pass { "PASS" } else { "FAIL" });
    pass
}

fn grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> + Clone {
    (0..n).map(move |i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
}

fn bound_reductions() -> Check {
    let mut worst = 0.0f64;
    let mut count = 0usize;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for dim in [2usize, 4, 8, 16] {
        let random_p = (0..2500).map(|_| rng.gen_range(1e-3..=1.0)).collect::<Vec<_>>();
        for p in grid(0.01, 1.0, 100).chain(random_p) {
            for tau in grid(0.0, 1.0, 25) {
                let a = epsilon_depolarizing(p, dim, tau).map_err(|e| e.to_string())?;
                let b = epsilon_generic(AlphaGamma::new(1.0 - p, p / dim as f64).unwrap(), tau).map_err(|e| e.to_string())?;
                worst = worst.max((a - b).abs());
                count += 1;
            }
        }
    }
    for n in 1u32..=4 {
        let hmax = 2f64.powf(1.0 / n as f64) - 1.0 - 1e-6;
        let random_h = (0..2500).map(|_| rng.gen_range(-0.999..hmax)).collect::<Vec<_>>();
        for h in grid(-0.99, hmax, 100).chain(random_h) {
            let ag = AlphaGamma::new(1.0, rotation_noise_level(h, n).powi(n as i32)).unwrap();
            for tau in grid(0.0, 1.0, 25) {
                let a = epsilon_random_rotation(h, n, tau).map_err(|e| e.to_string())?;
                let b = epsilon_generic(ag, tau).map_err(|e| e.to_string())?;
                worst = worst.max((a - b).abs());
                count += 1;
            }
        }
    }
    ensure(worst < 1e-12, format!("max deviation {worst:e}"))?;
    Ok(format!("{count} points, max deviation {worst:e}"))
}

fn contraction_certificate() -> Check {
    let mut worst = 0.0f64;
    for d in [2usize, 4, 8] {
        for i in 1..=9 {
            let p = i as f64 / 10.0;
            let j = depolarizing_choi(p, d).unwrap();
            let r = verify_contraction_certificate(&j, p, 1000, 100 + i as u64).map_err(|e| format!("d={d} p={p}: {e}"))?;
            worst = worst.max((r.max_ratio - (1.0 - p)).abs());
        }
    }
    ensure(worst <= 1e-9, format!("max |ratio - (1-p)| = {worst:e}"))?;
    Ok(format!("27 channels x 1000 pairs, max |ratio - (1-p)| = {worst:e}"))
}

fn sdp_corners() -> Check {
    let cfg = SolverConfig::default();
    let problem = |order, a: f64, g: f64| {
        build_problem(
            order,
            &CMatrix::identity(2),
            &PovmSet::computational(2),
            vec![Sample { state: DensityMatrix::basis(2, 0), label: 0 }],
            AlphaGamma::new(a, g).unwrap(),
        )
        .unwrap()
    };
    let mut worst_obj = 0.0f64;
    let mut worst_frob = 0.0f64;
    for order in [Order::Pre, Order::Post] {
        let cases: [(f64, f64, f64); 5] = [(1.0, 0.0, 1.0), (0.0, 0.0, 0.5), (0.0, 0.5, 0.5), (0.5, 0.5, 0.5), (1.0, 0.5, 0.5)];
        for (a, g, want) in cases {
            let p = problem(order, a, g);
            let r1 = solve(&p, &cfg).map_err(|e| e.to_string())?;
            let r2 = solve(&p, &cfg).map_err(|e| e.to_string())?;
            ensure(r1.choi == r2.choi && r1.objective_value == r2.objective_value, "solve is not deterministic")?;
            ensure(r1.status == SolveStatus::Optimal, format!("alpha={a} gamma={g}: status {}", r1.status.as_str()))?;
            worst_obj = worst_obj.max((r1.objective_value - want).abs());
            if a == 0.0 {
                let diff = r1.choi.matrix().clone();
                let center = CMatrix::identity(4).scale(0.5);
                worst_frob = worst_frob.max((&diff - &center).frobenius_norm());
            }
        }
    }
    ensure(worst_obj <= 1e-4, format!("objective error {worst_obj:e}"))?;
    ensure(worst_frob <= 1e-5, format!("Frobenius error {worst_frob:e}"))?;
    Ok(format!("objective error {worst_obj:e}, J=I/d error {worst_frob:e}, deterministic"))
}

fn sdp_soundness() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let povm = PovmSet::binary_qubit(2, 0);
    let pairs = [(1.0, 0.0), (0.8, 0.1), (0.5, 0.2), (0.3, 0.4), (0.2, 0.1), (0.6, 0.35), (0.0, 0.3)];
    let (mut optimal, mut other) = (0, 0);
    let mut worst = (0.0f64, 0.0f64, f64::INFINITY, f64::NEG_INFINITY);
    for (i, &(a, g)) in pairs.iter().enumerate() {
        for order in [Order::Pre, Order::Post] {
            let u = random::unitary(&mut rng, 4);
            let samples = (0..8)
                .map(|k| Sample { state: DensityMatrix::new(random::density_matrix(&mut rng, 4)).unwrap(), label: k % 2 })
                .collect();
            let p = build_problem(order, &u, &povm, samples, AlphaGamma::new(a, g).unwrap()).unwrap();
            let r = solve(&p, &SolverConfig::default()).map_err(|e| e.to_string())?;
            if r.status != SolveStatus::Optimal {
                other += 1;
                continue;
            }
            optimal += 1;
            let cptp = validate_cptp(&r.choi, 1e-8);
            ensure(cptp.tp_residual <= 1e-7 && cptp.cp_residual <= 1e-8, format!("alpha={a} gamma={g}: {cptp:?}"))?;
            let probe = probe_definition(&r.choi, p.effects(), 1.0 - a, 100, 1000 + i as u64).map_err(|e| e.to_string())?;
            ensure(probe.min_floor >= g - 1e-6, format!("alpha={a} gamma={g}: floor {}", probe.min_floor))?;
            ensure(probe.max_contraction <= a + 1e-6, format!("alpha={a} gamma={g}: contraction {}", probe.max_contraction))?;
            worst.0 = worst.0.max(cptp.tp_residual);
            worst.1 = worst.1.max(cptp.cp_residual);
            worst.2 = worst.2.min(probe.min_floor - g);
            worst.3 = worst.3.max(probe.max_contraction - a);
        }
    }
    ensure(optimal > 0, "no optimal solutions")?;
    Ok(format!(
        "{optimal} optimal ({other} other); worst tp {:e}, cp {:e}, floor margin {:e}, contraction excess {:e}",
        worst.0, worst.1, worst.2, worst.3
    ))
}

fn read_csv(path: &Path) -> Vec<BTreeMap<String, String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
    r.records().map(|rec| header.iter().cloned().zip(rec.unwrap().iter().map(String::from)).collect()).collect()
}

fn f(row: &BTreeMap<String, String>, k: &str) -> f64 {
    row[k].parse().unwrap()
}

fn iris_amplitude(out: &Path, grid: Option<usize>) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::load(&configs_dir().join("iris_amplitude.toml")).unwrap();
    cfg.out = out.to_path_buf();
    if let Some(n) = grid {
        cfg.sweep.grid_size = n;
        cfg.sweep.grid_mode = GridMode::Independent;
    }
    cfg
}

fn table2() -> Check {
    let dir = tempfile::tempdir().unwrap();
    let cfg = iris_amplitude(dir.path(), None);
    cmd_table2(&cfg).map_err(|e| e.to_string())?.into_result().map_err(|e| e.to_string())?;
    let rows = read_csv(&dir.path().join("table2_wide.csv"));
    let budgets: Vec<String> = cfg.budgets().iter().map(|b| format!("{b}")).collect();
    let curve = |r: &BTreeMap<String, String>| budgets.iter().map(|b| f(r, b)).collect::<Vec<f64>>();
    ensure(rows.len() == 7 && budgets.len() == 10, "expected 7 rows x 10 budgets")?;

    let best = rows.iter().find(|r| f(r, "alpha") == 1.0 && f(r, "gamma") == 0.0).ok_or("no (1, 0) row")?;
    ensure(curve(best)[0] == 1.0, format!("(a) (1,0) at budget 0 is {}", curve(best)[0]))?;

    let flat = rows.iter().find(|r| f(r, "alpha") == 0.0 && f(r, "gamma") == 0.5).ok_or("no (0, 0.5) row")?;
    let fc = curve(flat);
    ensure(fc.iter().all(|v| *v == fc[0]), format!("(b) (0,0.5) row is not constant: {fc:?}"))?;

    let live: Vec<Vec<f64>> = rows.iter().filter(|r| f(r, "alpha") > 0.0).map(curve).collect();
    let mut spread = 0.0f64;
    for a in &live {
        for b in &live {
            for (x, y) in a.iter().zip(b) {
                spread = spread.max((x - y).abs());
            }
        }
    }
    ensure(spread <= 0.05, format!("(c) rows with alpha > 0 differ by {spread}"))?;
    let last = live.iter().map(|c| c[9]).fold(0.0f64, f64::max);
    ensure(last <= 0.2, format!("(d) accuracy {last} at the largest budget"))?;
    Ok(format!(
        "(1,0) row {:?}; (0,0.5) row constant at {}; alpha>0 spread {spread}; largest-budget accuracy {last}",
        curve(best),
        fc[0]
    ))
}

fn fig1_trend() -> Check {
    let dir = tempfile::tempdir().unwrap();
    let cfg = iris_amplitude(dir.path(), None);
    cmd_sweep_dep(&cfg).map_err(|e| e.to_string())?.into_result().map_err(|e| e.to_string())?;
    let rows = read_csv(&dir.path().join("sweep_dep.csv"));
    let mut worst_gap = f64::NEG_INFINITY;
    for b in cfg.budgets() {
        let at = |ch: &str| {
            rows.iter().filter(|r| r["channel"] == ch && f(r, "budget") == b).map(|r| f(r, "accuracy")).collect::<Vec<_>>()
        };
        let opt = *at("optimal").first().ok_or("missing optimal row")?;
        let dep = at("depolarizing").into_iter().fold(0.0f64, f64::max);
        ensure(opt >= dep - 0.05, format!("budget {b}: optimal {opt} vs depolarizing {dep}"))?;
        worst_gap = worst_gap.max(dep - opt);
    }
    let mut at_zero: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r["channel"] == "depolarizing" && f(r, "budget") == 0.0 && f(r, "p") >= 0.5)
        .map(|r| (f(r, "p"), f(r, "accuracy")))
        .collect();
    at_zero.sort_by(|a, b| a.0.total_cmp(&b.0));
    ensure(at_zero.len() >= 2, "need at least two depolarizing levels with p >= 0.5")?;
    ensure(at_zero.windows(2).all(|w| w[1].1 <= w[0].1), format!("budget-0 accuracy not nonincreasing: {at_zero:?}"))?;
    Ok(format!("max (depolarizing - optimal) = {worst_gap:.4}; budget-0 accuracy for p >= 0.5: {at_zero:?}"))
}

fn cert_anchor() -> Check {
    let dir = tempfile::tempdir().unwrap();
    let cfg = iris_amplitude(dir.path(), Some(10));
    cmd_cert_map(&cfg).map_err(|e| e.to_string())?;
    let rows = read_csv(&dir.path().join("cert_map.csv"));
    ensure(rows.len() == 10 * 10 * cfg.sweep.tau_levels.len(), format!("{} rows", rows.len()))?;
    let mut cells: BTreeMap<(String, String), Vec<(f64, f64, f64)>> = BTreeMap::new();
    for r in &rows {
        cells.entry((r["alpha"].clone(), r["gamma"].clone())).or_default().push((f(r, "tau"), f(r, "portion"), f(r, "mean_gap")));
    }
    for ((a, g), v) in &cells {
        ensure(v.windows(2).all(|w| w[0].0 < w[1].0 && w[1].1 <= w[0].1), format!("cell ({a},{g}) portions not monotone: {v:?}"))?;
        ensure(v.iter().all(|x| (0.0..=1.0).contains(&x.1)), format!("cell ({a},{g}) portion outside [0,1]"))?;
    }
    let anchor = &cells[&("0".to_string(), "0.5".to_string())];
    let mut gaps = vec![("iris-amplitude".to_string(), anchor[0].2)];

    // the anchor cell and a coarse grid for the other dataset configurations
    for name in ["iris_angle", "bc"] {
        let mut c = ExperimentConfig::load(&configs_dir().join(format!("{name}.toml"))).unwrap();
        c.out = dir.path().join(name);
        let prep = prepare(&c, false).map_err(|e| e.to_string())?;
        for a in [0.0, 0.5, 1.0] {
            for g in [0.0, 0.25, 0.5] {
                let cell = cert_cell(&c, &prep, a, g).map_err(|e| e.to_string())?;
                ensure(cell.portions.windows(2).all(|w| w[1] <= w[0]), format!("{name} ({a},{g}) not monotone"))?;
                if a == 0.0 && g == 0.5 {
                    gaps.push((name.to_string(), cell.mean_gap));
                }
            }
        }
    }
    for (name, gap) in &gaps {
        ensure(gap.abs() < 1e-6, format!("{name}: mean gap {gap:e} at (0, 0.5)"))?;
    }
    Ok(format!("{} cells monotone; mean gap at (0,0.5): {gaps:?}", cells.len() + 18))
}

fn unit(v: Vec<f64>) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / n).collect()
}

fn simulator() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst_grad = 0.0f64;
    for (n, layers, emb) in [(2, 2, Embedding::Amplitude), (3, 2, Embedding::Angle), (3, 3, Embedding::Amplitude)] {
        let c = Classifier::random(n, layers, emb, 0, rng.gen()).unwrap();
        let xs: Vec<Vec<f64>> = (0..6)
            .map(|_| match emb {
                Embedding::Amplitude => unit((0..1 << n).map(|_| rng.gen::<f64>() + 0.1).collect()),
                Embedding::Angle => (0..n).map(|_| rng.gen_range(0.0..3.0)).collect(),
            })
            .collect();
        let ys = vec![0, 1, 1, 0, 1, 0];
        let w = vec![1.0; 6];
        let states: Vec<_> = xs.iter().map(|x| embed_state(x, emb, n).unwrap()).collect();
        let grad = loss_gradient(&c, &states, &ys, &w);
        for (j, g) in grad.iter().enumerate() {
            let mut p = c.params().to_vec();
            p[j] += FD_STEP;
            let up = Classifier::new(n, layers, emb, 0, p.clone()).unwrap();
            p[j] -= 2.0 * FD_STEP;
            let down = Classifier::new(n, layers, emb, 0, p).unwrap();
            let fd = (dataset_loss(&up, &xs, &ys, &w).unwrap() - dataset_loss(&down, &xs, &ys, &w).unwrap()) / (2.0 * FD_STEP);
            worst_grad = worst_grad.max((g - fd).abs());
        }
    }
    ensure(worst_grad < 1e-5, format!("gradient mismatch {worst_grad:e}"))?;

    let trials = 10_000;
    let (mut unitarity, mut completeness, mut density) = (0.0f64, 0.0f64, 0.0f64);
    for t in 0..trials {
        let n = 1 + t % 3;
        let d = 1usize << n;
        let layers = rng.gen_range(1..=4);
        let params: Vec<f64> = (0..layers * n * 3).map(|_| rng.gen_range(-4.0..4.0)).collect();
        let u = ansatz_unitary(&params, n, layers).unwrap();
        unitarity = unitarity.max(u.dagger().matmul(&u).max_abs_diff(&CMatrix::identity(d)));

        let kraus = KrausSet::new(random::kraus_ops(&mut rng, d, 2)).unwrap();
        let noise = NoiseModel { choi: choi_from_kraus(&kraus), order: if t % 2 == 0 { Order::Pre } else { Order::Post } };
        let povm = PovmSet::binary_qubit(n, t % n);
        let effects = effective_effects(&u, &povm, Some(&noise));
        let mut sum = CMatrix::zeros(d, d);
        for e in &effects {
            sum.add_scaled(1.0, e);
            completeness = completeness.max(-min_eigenvalue(e).unwrap()).max(e.hermitian_deviation());
        }
        completeness = completeness.max(sum.max_abs_diff(&CMatrix::identity(d)));

        let rho = if t % 2 == 0 {
            embed(&unit((0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()), Embedding::Amplitude, n).unwrap()
        } else {
            embed(&(0..n).map(|_| rng.gen_range(0.0..std::f64::consts::PI)).collect::<Vec<_>>(), Embedding::Angle, n).unwrap()
        };
        let out = apply_to_matrix(&noise.choi, &rho.evolve(&u).into_matrix());
        for m in [rho.matrix(), &out] {
            density = density
                .max((m.trace().re - 1.0).abs())
                .max(m.trace().im.abs())
                .max(m.hermitian_deviation())
                .max(-min_eigenvalue(m).unwrap());
        }
    }
    ensure(unitarity < 1e-10, format!("unitarity error {unitarity:e}"))?;
    ensure(completeness < 1e-10, format!("POVM error {completeness:e}"))?;
    ensure(density < 1e-10, format!("density-matrix error {density:e}"))?;
    Ok(format!(
        "gradient error {worst_grad:e}; {trials} trials: unitarity {unitarity:e}, POVM {completeness:e}, density {density:e}"
    ))
}

fn full_scale() -> Check {
    ensure(problem_size(3) == 4096, "problem_size(3) != 4096")?;
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::load(&configs_dir().join("bc.toml")).unwrap();
    cfg.out = dir.path().to_path_buf();
    let prep = prepare(&cfg, false).map_err(|e| e.to_string())?;
    ensure(prep.classifier.n_qubits() == 3, "BC classifier is not 3-qubit")?;
    let mut lines = Vec::new();
    for (a, g) in [(1.0, 0.0), (0.5, 0.25), (0.16, 0.42)] {
        let start = Instant::now();
        let s = solve_channel_at(&cfg, &prep, a, g).map_err(|e| e.to_string())?;
        let took = start.elapsed();
        ensure(took <= Duration::from_secs(30 * 60), format!("({a},{g}) took {took:?}"))?;
        let r = &s.result;
        match r.status {
            SolveStatus::Optimal => {}
            SolveStatus::MaxIter => ensure(
                r.residuals.tp.is_finite() && r.residuals.cp.is_finite() && r.primal_residual.is_finite(),
                "max-iter result without a residual report",
            )?,
            SolveStatus::Infeasible => return Err(format!("({a},{g}) reported infeasible")),
        }
        lines.push(format!("({a},{g}) {} in {} it/{took:.1?}", r.status.as_str(), r.iterations));
    }
    Ok(lines.join(", "))
}

fn main() {
    let _ = common::data_dir;
    let results = [
        criterion(1, "bound reductions", Duration::from_secs(1), bound_reductions),
        criterion(2, "contraction certificate", Duration::from_secs(30), contraction_certificate),
        criterion(3, "SDP analytic corners", Duration::from_secs(60), sdp_corners),
        criterion(4, "SDP feasibility soundness", Duration::from_secs(120), sdp_soundness),
        criterion(5, "alpha-gamma pair table", Duration::from_secs(600), table2),
        criterion(6, "depolarizing sweep trend", Duration::from_secs(600), fig1_trend),
        criterion(7, "certification anchor", Duration::from_secs(1200), cert_anchor),
        criterion(8, "simulator correctness", Duration::from_secs(60), simulator),
        criterion(9, "3-qubit scale", Duration::from_secs(3 * 30 * 60), full_scale),
    ];
    let passed = results.iter().filter(|p| **p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
