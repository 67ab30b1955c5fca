//! One function per subcommand.
//!
//! Every CSV is written with a `.meta.json` sidecar. Rows come out in a fixed
//! order whatever the worker count, so reruns are byte-identical.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use qrobust_core::channels::depolarizing_choi;
use qrobust_core::data::Dataset;
use qrobust_core::dpbounds::is_certified;
use qrobust_core::qml::{adversarial_accuracy, predict, train, AccuracyPoint, Classifier, NoiseModel, TrainOutcome};
use qrobust_core::sdp::{
    build_problem, solve, validate_channel_constraints_with, verify_contraction_certificate, ConstraintReport, Order, Sample,
    SdpProblem, SolveStatus, SolverResult,
};
use qrobust_core::{AlphaGamma, ChoiMatrix};

use crate::config::{ExperimentConfig, GridMode, SplitPart};
use crate::datasets::load_dataset;
use crate::error::{Error, Result};
use crate::formats::{order_name, read_channel, read_checkpoint, read_json, write_channel, write_json, Checkpoint, DatasetFile, SolveReport};
use crate::meta::{write_meta, Meta};
use crate::plot::{Heatmap, LineChart, Series};

/// Files written by a command plus a short human-readable summary.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub files: Vec<PathBuf>,
    pub summary: Vec<String>,
    /// Cells whose solver stopped at the iteration limit.
    pub non_converged: usize,
}

impl Report {
    /// Turns leftover non-converged cells into an error.
    pub fn into_result(self) -> Result<Report> {
        if self.non_converged > 0 {
            Err(Error::NonConvergence { cells: self.non_converged })
        } else {
            Ok(self)
        }
    }
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 }).collect(),
    }
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn out_path(cfg: &ExperimentConfig, name: &str) -> PathBuf {
    cfg.resolve(&cfg.out).join(name)
}

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>], meta: &Meta, report: &mut Report) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let csv_err = |source| Error::Csv { path: path.to_path_buf(), source };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(r).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    report.files.push(path.to_path_buf());
    report.files.push(write_meta(path, meta)?);
    Ok(())
}

fn write_text(path: &Path, text: &str, report: &mut Report) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))?;
    report.files.push(path.to_path_buf());
    Ok(())
}

fn pool(cfg: &ExperimentConfig) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new().num_threads(cfg.workers).build().map_err(|e| Error::config(e.to_string()))
}

/// Dataset plus the classifier under study.
pub struct Prepared {
    pub dataset: Dataset,
    pub classifier: Classifier,
    pub training: Option<TrainOutcome>,
}

impl Prepared {
    pub fn split(&self, part: SplitPart) -> (Vec<Vec<f64>>, Vec<usize>) {
        match part {
            SplitPart::Train => self.dataset.train_set(),
            SplitPart::Test => self.dataset.test_set(),
        }
    }
}

/// Loads the dataset, then loads the configured checkpoint or trains from
/// scratch when none is set (or when `force_train`).
pub fn prepare(cfg: &ExperimentConfig, force_train: bool) -> Result<Prepared> {
    let dataset = load_dataset(cfg)?;
    let spec = cfg.model_spec();
    let (classifier, training) = match (&cfg.model.checkpoint, force_train) {
        (Some(p), false) => {
            let c = read_checkpoint(&cfg.resolve(p))?;
            if c.embedding() != cfg.embedding() {
                return Err(Error::config(format!("checkpoint uses {} embedding", c.embedding().as_str())));
            }
            (c, None)
        }
        _ => {
            let init = Classifier::random(spec.qubits, spec.layers, cfg.embedding(), spec.measured_qubit, cfg.init_seed())?;
            let (xs, ys) = dataset.train_set();
            let outcome = train(&init, &xs, &ys, &cfg.train_config())?;
            (outcome.classifier.clone(), Some(outcome))
        }
    };
    for x in &dataset.features {
        classifier.embed(x)?;
    }
    Ok(Prepared { dataset, classifier, training })
}

fn accuracy(c: &Classifier, xs: &[Vec<f64>], ys: &[usize]) -> Result<f64> {
    let mut ok = 0usize;
    for (x, &y) in xs.iter().zip(ys) {
        if predict(&c.forward(x)?) == y {
            ok += 1;
        }
    }
    Ok(ok as f64 / xs.len().max(1) as f64)
}

/// Channel optimized for the classifier at one `(α, γ)`.
pub struct SolvedChannel {
    pub alpha: f64,
    pub gamma: f64,
    pub result: SolverResult,
    pub noise: NoiseModel,
}

impl SolvedChannel {
    pub fn report(&self) -> SolveReport {
        SolveReport::new(self.alpha, self.gamma, self.noise.order, &self.result)
    }
}

fn problem(cfg: &ExperimentConfig, prep: &Prepared, ag: AlphaGamma, order: Order) -> Result<SdpProblem> {
    let (xs, ys) = prep.split(cfg.sweep.optimize_on);
    let samples = xs
        .iter()
        .zip(&ys)
        .map(|(x, &label)| Ok(Sample { state: prep.classifier.embed(x)?, label }))
        .collect::<Result<Vec<_>>>()?;
    Ok(build_problem(order, &prep.classifier.unitary(), prep.classifier.povm(), samples, ag)?)
}

pub fn solve_channel_at(cfg: &ExperimentConfig, prep: &Prepared, alpha: f64, gamma: f64) -> Result<SolvedChannel> {
    let order: Order = cfg.sweep.order.into();
    let p = problem(cfg, prep, AlphaGamma::new(alpha, gamma)?, order)?;
    let result = solve(&p, &cfg.solver.to_solver())?;
    let noise = NoiseModel { choi: result.choi.clone(), order };
    Ok(SolvedChannel { alpha, gamma, result, noise })
}

fn attack(cfg: &ExperimentConfig, prep: &Prepared, noise: &NoiseModel, budgets: &[f64]) -> Result<Vec<AccuracyPoint>> {
    let (xs, ys) = prep.dataset.test_set();
    Ok(adversarial_accuracy(
        &prep.classifier,
        Some(noise),
        &xs,
        &ys,
        budgets,
        cfg.attack.target.into(),
        cfg.attack.gradient_step,
    )?)
}

/// Depolarizing and optimal-channel accuracy curves over `budgets`.
pub struct Curves {
    pub depolarizing: Vec<(f64, Vec<AccuracyPoint>)>,
    pub optimal: SolvedChannel,
    pub optimal_curve: Vec<AccuracyPoint>,
}

pub fn channel_curves(cfg: &ExperimentConfig, prep: &Prepared, budgets: &[f64]) -> Result<Curves> {
    let d = prep.classifier.dim();
    let order: Order = cfg.sweep.order.into();
    let [alpha, gamma] = cfg.sweep.optimal;
    let (dep, opt) = pool(cfg)?.install(|| {
        rayon::join(
            || {
                cfg.sweep
                    .depolarizing
                    .par_iter()
                    .map(|&p| {
                        let noise = NoiseModel { choi: depolarizing_choi(p, d)?, order };
                        Ok((p, attack(cfg, prep, &noise, budgets)?))
                    })
                    .collect::<Result<Vec<_>>>()
            },
            || -> Result<_> {
                let solved = solve_channel_at(cfg, prep, alpha, gamma)?;
                let curve = attack(cfg, prep, &solved.noise, budgets)?;
                Ok((solved, curve))
            },
        )
    });
    let (optimal, optimal_curve) = opt?;
    Ok(Curves { depolarizing: dep?, optimal, optimal_curve })
}

/// Smallest L∞ distance between two samples with different labels.
pub fn min_opposite_class_distance(features: &[Vec<f64>], labels: &[usize]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..features.len() {
        for j in i + 1..features.len() {
            if labels[i] != labels[j] {
                let d = features[i].iter().zip(&features[j]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                best = best.min(d);
            }
        }
    }
    best
}

fn non_converged(status: SolveStatus) -> usize {
    usize::from(status == SolveStatus::MaxIter)
}

pub fn cmd_train(cfg: &ExperimentConfig) -> Result<Report> {
    let prep = prepare(cfg, true)?;
    let outcome = prep.training.as_ref().expect("forced training");
    let meta = Meta::new("train", cfg);
    let mut report = Report::default();

    let ck = out_path(cfg, "checkpoint.json");
    write_json(&ck, &Checkpoint::new(&prep.classifier, cfg.init_seed(), &cfg.train_config()))?;
    report.files.push(ck.clone());
    report.files.push(write_meta(&ck, &meta)?);

    let ds = out_path(cfg, "dataset.json");
    write_json(&ds, &DatasetFile::from(&prep.dataset))?;
    report.files.push(ds);

    let rows: Vec<Vec<String>> = outcome.loss_curve.iter().enumerate().map(|(e, l)| vec![e.to_string(), num(*l)]).collect();
    write_csv(&out_path(cfg, "loss_curve.csv"), &["epoch", "loss"], &rows, &meta, &mut report)?;
    let chart = LineChart {
        title: format!("{} training loss", prep.dataset.name),
        x_label: "epoch".into(),
        y_label: "loss".into(),
        series: vec![Series {
            name: "train".into(),
            points: outcome.loss_curve.iter().enumerate().map(|(e, l)| (e as f64, *l)).collect(),
            dashed: false,
        }],
        ..Default::default()
    };
    write_text(&out_path(cfg, "loss_curve.svg"), &chart.to_svg(), &mut report)?;

    let (trx, try_) = prep.dataset.train_set();
    let (tex, tey) = prep.dataset.test_set();
    report.summary.push(format!(
        "{}: {} train / {} test, loss {:.4} -> {:.4}, accuracy train {:.3} test {:.3}",
        prep.dataset.name,
        trx.len(),
        tex.len(),
        outcome.loss_curve.first().copied().unwrap_or(f64::NAN),
        outcome.loss_curve.last().copied().unwrap_or(f64::NAN),
        accuracy(&prep.classifier, &trx, &try_)?,
        accuracy(&prep.classifier, &tex, &tey)?
    ));
    Ok(report)
}

pub fn cmd_sweep_dep(cfg: &ExperimentConfig) -> Result<Report> {
    let prep = prepare(cfg, false)?;
    let budgets = cfg.budgets();
    let curves = channel_curves(cfg, &prep, &budgets)?;
    let outcomes = prep.classifier.povm().len() as f64;
    let meta = Meta::new("sweep-dep", cfg);
    let mut report = Report::default();

    let mut rows = Vec::new();
    for (p, curve) in &curves.depolarizing {
        for pt in curve {
            rows.push(vec![
                "depolarizing".into(),
                num(*p),
                num(1.0 - p),
                num(p / outcomes),
                num(pt.budget),
                num(pt.accuracy),
                num(pt.tie_rate),
            ]);
        }
    }
    for pt in &curves.optimal_curve {
        rows.push(vec![
            "optimal".into(),
            String::new(),
            num(curves.optimal.alpha),
            num(curves.optimal.gamma),
            num(pt.budget),
            num(pt.accuracy),
            num(pt.tie_rate),
        ]);
    }
    let header = ["channel", "p", "alpha", "gamma", "budget", "accuracy", "tie_rate"];
    write_csv(&out_path(cfg, "sweep_dep.csv"), &header, &rows, &meta, &mut report)?;

    let marker = min_opposite_class_distance(&prep.dataset.features, &prep.dataset.labels);
    let summary = serde_json::json!({
        "min_linf_distance": marker,
        "optimal": curves.optimal.report(),
    });
    let sj = out_path(cfg, "sweep_dep.json");
    write_json(&sj, &summary)?;
    report.files.push(sj);
    let ch = out_path(cfg, "optimal_channel.json");
    write_channel(&ch, &curves.optimal.result.choi)?;
    report.files.push(ch);

    let mut series: Vec<Series> = curves
        .depolarizing
        .iter()
        .map(|(p, c)| Series { name: format!("depolarizing p={p}"), points: c.iter().map(|q| (q.budget, q.accuracy)).collect(), dashed: false })
        .collect();
    series.push(Series {
        name: format!("optimal a={} g={}", curves.optimal.alpha, curves.optimal.gamma),
        points: curves.optimal_curve.iter().map(|q| (q.budget, q.accuracy)).collect(),
        dashed: true,
    });
    let chart = LineChart {
        title: format!("{} adversarial accuracy", prep.dataset.name),
        x_label: "FGSM budget".into(),
        y_label: "accuracy".into(),
        series,
        markers: if marker.is_finite() { vec![(marker, "min L∞".into())] } else { Vec::new() },
        y_range: Some((0.0, 1.0)),
    };
    write_text(&out_path(cfg, "sweep_dep.svg"), &chart.to_svg(), &mut report)?;

    report.summary.push(format!(
        "optimal channel: {} after {} iterations, objective {:.6}; min opposite-class L∞ distance {marker:.4}",
        curves.optimal.result.status.as_str(),
        curves.optimal.result.iterations,
        curves.optimal.result.objective_value
    ));
    report.non_converged = non_converged(curves.optimal.result.status);
    Ok(report)
}

/// Outcome of one `(α, γ)` cell of the certification map.
#[derive(Debug, Clone, PartialEq)]
pub struct CertCell {
    pub alpha: f64,
    pub gamma: f64,
    pub status: SolveStatus,
    pub objective: f64,
    pub iterations: usize,
    pub mean_gap: f64,
    /// Certified fraction of the test set at each radius.
    pub portions: Vec<f64>,
}

pub fn cert_grid(cfg: &ExperimentConfig) -> Vec<(f64, f64)> {
    let n = cfg.sweep.grid_size;
    match cfg.sweep.grid_mode {
        GridMode::Independent => {
            let alphas = linspace(0.0, 1.0, n);
            linspace(0.0, 0.5, n).into_iter().flat_map(|g| alphas.iter().map(move |&a| (a, g))).collect()
        }
        GridMode::Paired => linspace(0.0, 1.0, n).into_iter().map(|a| (a, (1.0 - a) / 2.0)).collect(),
    }
}

pub fn cert_cell(cfg: &ExperimentConfig, prep: &Prepared, alpha: f64, gamma: f64) -> Result<CertCell> {
    let solved = solve_channel_at(cfg, prep, alpha, gamma)?;
    let pipe = prep.classifier.pipeline(Some(&solved.noise))?;
    let ag = AlphaGamma::new(alpha, gamma)?;
    let taus = &cfg.sweep.tau_levels;
    let cutoff = cfg.gap_cutoff();
    let (xs, ys) = prep.dataset.test_set();
    let mut gap_sum = 0.0;
    let mut counts = vec![0usize; taus.len()];
    for (x, &y) in xs.iter().zip(&ys) {
        let probs = pipe.forward(x)?;
        let c = predict(&probs);
        let gap = probs[c] - probs[1 - c];
        gap_sum += gap;
        // misclassified and near-tied samples do not count as certified
        if c != y || gap < cutoff {
            continue;
        }
        for (k, &t) in taus.iter().enumerate() {
            if is_certified(&probs, ag, t)? {
                counts[k] += 1;
            }
        }
    }
    let n = xs.len().max(1) as f64;
    Ok(CertCell {
        alpha,
        gamma,
        status: solved.result.status,
        objective: solved.result.objective_value,
        iterations: solved.result.iterations,
        mean_gap: gap_sum / n,
        portions: counts.iter().map(|&c| c as f64 / n).collect(),
    })
}

pub fn cmd_cert_map(cfg: &ExperimentConfig) -> Result<Report> {
    let prep = prepare(cfg, false)?;
    let grid = cert_grid(cfg);
    let cells = pool(cfg)?.install(|| grid.par_iter().map(|&(a, g)| cert_cell(cfg, &prep, a, g)).collect::<Result<Vec<_>>>())?;
    let meta = Meta::new("cert-map", cfg);
    let mut report = Report::default();

    let taus = &cfg.sweep.tau_levels;
    let mut rows = Vec::new();
    for c in &cells {
        for (t, p) in taus.iter().zip(&c.portions) {
            rows.push(vec![
                num(c.alpha),
                num(c.gamma),
                num(*t),
                num(c.mean_gap),
                num(*p),
                c.status.as_str().into(),
                num(c.objective),
                c.iterations.to_string(),
            ]);
        }
    }
    let header = ["alpha", "gamma", "tau", "mean_gap", "portion", "status", "objective", "iterations"];
    write_csv(&out_path(cfg, "cert_map.csv"), &header, &rows, &meta, &mut report)?;

    let name = &prep.dataset.name;
    match cfg.sweep.grid_mode {
        GridMode::Independent => {
            let n = cfg.sweep.grid_size;
            let (xs, ys) = (linspace(0.0, 1.0, n), linspace(0.0, 0.5, n));
            let heat = |title: String, values: Vec<f64>| {
                Heatmap { title, x_label: "alpha".into(), y_label: "gamma".into(), xs: xs.clone(), ys: ys.clone(), values }.to_svg()
            };
            write_text(
                &out_path(cfg, "cert_map_gap.svg"),
                &heat(format!("{name} mean y-gap"), cells.iter().map(|c| c.mean_gap).collect()),
                &mut report,
            )?;
            for (k, t) in taus.iter().enumerate() {
                write_text(
                    &out_path(cfg, &format!("cert_map_tau_{t}.svg")),
                    &heat(format!("{name} certified portion, tau={t}"), cells.iter().map(|c| c.portions[k]).collect()),
                    &mut report,
                )?;
            }
        }
        GridMode::Paired => {
            let mut series = vec![Series {
                name: "mean y-gap".into(),
                points: cells.iter().map(|c| (c.alpha, c.mean_gap)).collect(),
                dashed: true,
            }];
            for (k, t) in taus.iter().enumerate() {
                series.push(Series {
                    name: format!("portion tau={t}"),
                    points: cells.iter().map(|c| (c.alpha, c.portions[k])).collect(),
                    dashed: false,
                });
            }
            let chart = LineChart {
                title: format!("{name} certification, gamma=(1-alpha)/2"),
                x_label: "alpha".into(),
                y_label: "value".into(),
                series,
                y_range: Some((0.0, 1.0)),
                ..Default::default()
            };
            write_text(&out_path(cfg, "cert_map.svg"), &chart.to_svg(), &mut report)?;
        }
    }

    for (k, t) in taus.iter().enumerate() {
        if let Some(best) = cells.iter().max_by(|a, b| a.portions[k].total_cmp(&b.portions[k])) {
            report.summary.push(format!(
                "tau={t}: best portion {:.3} at alpha={} gamma={}",
                best.portions[k], best.alpha, best.gamma
            ));
        }
    }
    report.non_converged = cells.iter().map(|c| non_converged(c.status)).sum();
    Ok(report)
}

pub fn cmd_compare_embeddings(cfg: &ExperimentConfig) -> Result<Report> {
    let compare = cfg.compare.as_ref().ok_or_else(|| Error::config("compare-embeddings needs a [compare] section"))?;
    let normalized = linspace(0.0, 1.0, compare.points);
    let meta = Meta::new("compare-embeddings", cfg);
    let mut report = Report::default();
    let mut rows = Vec::new();
    let mut series = Vec::new();
    for member in &compare.members {
        let mut mcfg = ExperimentConfig::load(&cfg.resolve(member))?;
        mcfg.seed = cfg.seed;
        mcfg.workers = cfg.workers;
        let scale = mcfg.budget_scale();
        let budgets = linspace(0.0, scale, compare.points);
        let prep = prepare(&mcfg, false)?;
        let curves = channel_curves(&mcfg, &prep, &budgets)?;
        let emb = mcfg.embedding().as_str();
        let outcomes = prep.classifier.povm().len() as f64;
        let mut push = |channel: &str, p: Option<f64>, alpha: f64, gamma: f64, curve: &[AccuracyPoint]| {
            for (pt, nb) in curve.iter().zip(&normalized) {
                rows.push(vec![
                    emb.to_string(),
                    channel.to_string(),
                    p.map(num).unwrap_or_default(),
                    num(alpha),
                    num(gamma),
                    num(pt.budget),
                    num(*nb),
                    num(pt.accuracy),
                    num(pt.tie_rate),
                ]);
            }
        };
        for (p, curve) in &curves.depolarizing {
            push("depolarizing", Some(*p), 1.0 - p, p / outcomes, curve);
            series.push(Series {
                name: format!("{emb} p={p}"),
                points: normalized.iter().zip(curve).map(|(x, q)| (*x, q.accuracy)).collect(),
                dashed: false,
            });
        }
        push("optimal", None, curves.optimal.alpha, curves.optimal.gamma, &curves.optimal_curve);
        series.push(Series {
            name: format!("{emb} optimal"),
            points: normalized.iter().zip(&curves.optimal_curve).map(|(x, q)| (*x, q.accuracy)).collect(),
            dashed: true,
        });
        report.non_converged += non_converged(curves.optimal.result.status);
        report.summary.push(format!("{emb}: budgets scaled by {scale}"));
    }
    let header = ["embedding", "channel", "p", "alpha", "gamma", "budget", "normalized_budget", "accuracy", "tie_rate"];
    write_csv(&out_path(cfg, "compare_embeddings.csv"), &header, &rows, &meta, &mut report)?;
    let chart = LineChart {
        title: "normalized adversarial accuracy".into(),
        x_label: "normalized budget".into(),
        y_label: "accuracy".into(),
        series,
        y_range: Some((0.0, 1.0)),
        ..Default::default()
    };
    write_text(&out_path(cfg, "compare_embeddings.svg"), &chart.to_svg(), &mut report)?;
    Ok(report)
}

pub fn cmd_table2(cfg: &ExperimentConfig) -> Result<Report> {
    let prep = prepare(cfg, false)?;
    let budgets = cfg.budgets();
    let pairs = &cfg.sweep.table2_pairs;
    let results = pool(cfg)?.install(|| {
        pairs
            .par_iter()
            .map(|&[a, g]| {
                let solved = solve_channel_at(cfg, &prep, a, g)?;
                let curve = attack(cfg, &prep, &solved.noise, &budgets)?;
                Ok((solved.result.status, curve))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let meta = Meta::new("table2", cfg);
    let mut report = Report::default();

    let mut long = Vec::new();
    let mut wide = Vec::new();
    for ([a, g], (status, curve)) in pairs.iter().zip(&results) {
        for pt in curve {
            long.push(vec![num(*a), num(*g), num(pt.budget), num(pt.accuracy), num(pt.tie_rate), status.as_str().into()]);
        }
        let mut row = vec![num(*a), num(*g)];
        row.extend(curve.iter().map(|pt| num(pt.accuracy)));
        wide.push(row);
        report.non_converged += non_converged(*status);
    }
    write_csv(
        &out_path(cfg, "table2.csv"),
        &["alpha", "gamma", "budget", "accuracy", "tie_rate", "status"],
        &long,
        &meta,
        &mut report,
    )?;
    let budget_names: Vec<String> = budgets.iter().map(|b| num(*b)).collect();
    let mut header = vec!["alpha", "gamma"];
    header.extend(budget_names.iter().map(String::as_str));
    write_csv(&out_path(cfg, "table2_wide.csv"), &header, &wide, &meta, &mut report)?;

    let chart = LineChart {
        title: format!("{} optimal channels", prep.dataset.name),
        x_label: "FGSM budget".into(),
        y_label: "accuracy".into(),
        series: pairs
            .iter()
            .zip(&results)
            .map(|([a, g], (_, c))| Series {
                name: format!("a={a} g={g}"),
                points: c.iter().map(|q| (q.budget, q.accuracy)).collect(),
                dashed: false,
            })
            .collect(),
        y_range: Some((0.0, 1.0)),
        ..Default::default()
    };
    write_text(&out_path(cfg, "table2.svg"), &chart.to_svg(), &mut report)?;
    Ok(report)
}

pub fn cmd_solve_channel(cfg: &ExperimentConfig) -> Result<Report> {
    let prep = prepare(cfg, false)?;
    let [alpha, gamma] = cfg.sweep.optimal;
    let solved = solve_channel_at(cfg, &prep, alpha, gamma)?;
    let mut report = Report::default();
    let ch = out_path(cfg, "channel.json");
    write_channel(&ch, &solved.result.choi)?;
    report.files.push(ch.clone());
    report.files.push(write_meta(&ch, &Meta::new("solve-channel", cfg))?);
    let side = residuals_path(&ch);
    write_json(&side, &solved.report())?;
    report.files.push(side);
    report.summary.push(format!(
        "alpha={alpha} gamma={gamma} order={}: {} after {} iterations, objective {:.8}",
        order_name(solved.noise.order),
        solved.result.status.as_str(),
        solved.result.iterations,
        solved.result.objective_value
    ));
    report.non_converged = non_converged(solved.result.status);
    Ok(report)
}

/// `<stem>.residuals.json` next to a channel file.
pub fn residuals_path(channel: &Path) -> PathBuf {
    let stem = channel.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    channel.with_file_name(format!("{stem}.residuals.json"))
}

/// Constraint residuals of a stored channel against the configured problem.
#[derive(Debug, Clone)]
pub struct Validation {
    pub alpha: f64,
    pub gamma: f64,
    pub objective: f64,
    pub constraints: ConstraintReport,
    pub contraction_ratio: Option<f64>,
}

impl Validation {
    pub fn failures(&self) -> usize {
        let c = &self.constraints;
        usize::from(!c.cp_pass)
            + usize::from(!c.tp_pass)
            + usize::from(!c.kappa_pass)
            + c.gamma_pass.iter().filter(|ok| !**ok).count()
    }
}

/// Checks a channel against the `(α, γ)` recorded in its residual sidecar,
/// falling back to the configured optimal pair.
pub fn validate_channel(cfg: &ExperimentConfig, channel: &Path) -> Result<Validation> {
    let j: ChoiMatrix = read_channel(channel)?;
    let side = residuals_path(channel);
    let (alpha, gamma, order) = if side.exists() {
        let r: SolveReport = read_json(&side)?;
        let order = match r.order.as_str() {
            "post" => Order::Post,
            _ => Order::Pre,
        };
        (r.alpha, r.gamma, order)
    } else {
        (cfg.sweep.optimal[0], cfg.sweep.optimal[1], cfg.sweep.order.into())
    };
    let prep = prepare(cfg, false)?;
    if j.dim() != prep.classifier.dim() {
        return Err(Error::Format {
            path: channel.to_path_buf(),
            message: format!("channel acts on dimension {}, classifier on {}", j.dim(), prep.classifier.dim()),
        });
    }
    let ag = AlphaGamma::new(alpha, gamma)?;
    let p = problem(cfg, &prep, ag, order)?;
    let constraints = validate_channel_constraints_with(&j, &p, cfg.solver.psd_tol, cfg.solver.tp_tol)?;
    let contraction_ratio = verify_contraction_certificate(&j, ag.kappa(), 200, cfg.seed).ok().map(|r| r.max_ratio);
    Ok(Validation { alpha, gamma, objective: p.objective(&j), constraints, contraction_ratio })
}

pub fn cmd_validate_channel(cfg: &ExperimentConfig, channel: &Path) -> Result<Report> {
    let v = validate_channel(cfg, channel)?;
    let c = &v.constraints;
    let mut report = Report::default();
    report.summary.push(format!("alpha={} gamma={} objective={:.8}", v.alpha, v.gamma, v.objective));
    report.summary.push(format!("cp residual {:e} ({})", c.cp, pass(c.cp_pass)));
    report.summary.push(format!("tp residual {:e} ({})", c.tp, pass(c.tp_pass)));
    report.summary.push(format!("kappa block {:e} ({})", c.kappa_block, pass(c.kappa_pass)));
    for (k, (r, ok)) in c.gamma_blocks.iter().zip(&c.gamma_pass).enumerate() {
        report.summary.push(format!("gamma block {k} {r:e} ({})", pass(*ok)));
    }
    if let Some(r) = v.contraction_ratio {
        report.summary.push(format!("sampled contraction {r:.6} (bound {})", v.alpha));
    }
    match v.failures() {
        0 => Ok(report),
        n => {
            for line in &report.summary {
                eprintln!("{line}");
            }
            Err(Error::Validation(n))
        }
    }
}

fn pass(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "FAIL"
    }
}
