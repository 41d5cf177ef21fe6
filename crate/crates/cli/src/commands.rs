use std::path::PathBuf;

use berw_core::estimators::{
    map_walks, range_stats as core_range_stats, window_return_probability, EnsembleConfig,
    DEFAULT_BAND_CONSTANT,
};
use berw_core::lattice::{run, RangeCheckpoints, TrajectoryRecorder, UnitStep};
use berw_core::martingale::{
    exact_bridge_law, joint_return_table, k_tail_probability, martingale_ensemble, BridgeSampler,
    DEFAULT_RHO, JOINT_STEP_CAP,
};
use berw_core::martingale::bridge::MAX_EXACT_LAW_LENGTH;
use berw_core::stats::{chi_square, non_increasing_within_ci, CiEstimate, P_THRESHOLD};
use berw_core::trace::{classify as core_classify, trace_condition, Transform, Verdict};
use berw_core::{adapted::berw_as_adapted_rule, WalkSpec};
use num_traits::ToPrimitive;
use serde_json::{json, Value};

use crate::config::Params;
use crate::error::CliError;
use crate::output::{num, OutDir};

/// Largest number of trajectory rows `simulate` will write.
const MAX_DUMP_ROWS: u64 = 50_000_000;

fn spec(p: &Params) -> Result<WalkSpec, CliError> {
    Ok(WalkSpec::new(p.require("d")?, p.require("d1")?, p.require("d2")?)?)
}

/// Seed from flag or file, else `$BERW_SEED`, else 0.
fn seed(p: &mut Params) -> Result<u64, CliError> {
    if let Some(s) = p.get("seed")? {
        return Ok(s);
    }
    let s = match std::env::var("BERW_SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("BERW_SEED=`{v}` is not an unsigned integer")))?,
        Err(_) => 0,
    };
    p.default_value("seed", s);
    Ok(s)
}

/// Applies `threads` and opens the output directory.
fn prepare(p: &mut Params, subcommand: &str) -> Result<(u64, OutDir), CliError> {
    if let Some(t) = p.get::<usize>("threads")? {
        if t == 0 {
            return Err(CliError::Usage("threads must be at least 1".into()));
        }
        // Fails only if a pool already exists, which never happens here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let seed = seed(p)?;
    let dir: PathBuf = p
        .raw("out_dir")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("berw-out").join(subcommand));
    Ok((seed, OutDir::create(&dir)?))
}

fn positive(p: &Params, key: &str, default: u64) -> Result<u64, CliError> {
    let v = p.get_or(key, default)?;
    if v == 0 {
        return Err(CliError::Usage(format!("`{key}` must be at least 1")));
    }
    Ok(v)
}

fn ci_cells(ci: &CiEstimate) -> [String; 3] {
    [num(ci.point), num(ci.lower), num(ci.upper)]
}

pub fn classify(p: &Params) -> Result<String, CliError> {
    let c = core_classify(&spec(p)?)?;
    serde_json::to_string_pretty(&c.to_json()).map_err(|e| CliError::Internal(e.to_string()))
}

pub fn simulate(mut p: Params) -> Result<String, CliError> {
    let s = spec(&p)?;
    let n = p.get_or("n", 1_000u64)?;
    let walks = positive(&p, "walks", 1)?;
    let dump = p.get_or("dump", 1u64)?.min(walks);
    if dump.saturating_mul(n + 1) > MAX_DUMP_ROWS {
        return Err(CliError::Usage(format!(
            "dump would write more than {MAX_DUMP_ROWS} trajectory rows"
        )));
    }
    p.default_value("n", n);
    p.default_value("walks", walks);
    p.default_value("dump", dump);
    let (seed, mut out) = prepare(&mut p, "simulate")?;

    let results = map_walks(seed, walks, |i, mut rng| {
        let mut rec = TrajectoryRecorder::default();
        let mut cp = RangeCheckpoints::new(vec![n]);
        let summary = if i < dump {
            run(&s, n, &mut rng, &mut [&mut rec, &mut cp])?
        } else {
            run(&s, n, &mut rng, &mut [&mut cp])?
        };
        Ok((rec, summary.state))
    })?;

    let d = s.d();
    let mut header: Vec<String> = vec![
        "walk".into(),
        "range".into(),
        "fresh_jumps_1".into(),
        "fresh_jumps_2".into(),
        "origin_visits".into(),
    ];
    header.extend((1..=d).map(|i| format!("x_{i}")));
    let rows: Vec<Vec<String>> = results
        .iter()
        .enumerate()
        .map(|(i, (_, st))| {
            let mut r = vec![
                i.to_string(),
                st.range.to_string(),
                st.fresh_jumps_block1.to_string(),
                st.fresh_jumps_block2.to_string(),
                st.origin_visits.to_string(),
            ];
            r.extend(st.pos.coords().iter().map(|c| c.to_string()));
            r
        })
        .collect();
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    out.write_csv("walks.csv", &header_refs, &rows)?;

    let mut th: Vec<String> = vec!["step_index".into()];
    th.extend((1..=d).map(|i| format!("x_{i}")));
    th.push("fresh_flag".into());
    let th_refs: Vec<&str> = th.iter().map(String::as_str).collect();
    for (i, (rec, _)) in results.iter().take(dump as usize).enumerate() {
        let rows: Vec<Vec<String>> = rec
            .points
            .iter()
            .zip(&rec.fresh)
            .enumerate()
            .map(|(j, (pt, f))| {
                let mut r = vec![j.to_string()];
                r.extend(pt.coords().iter().map(|c| c.to_string()));
                r.push(u8::from(*f).to_string());
                r
            })
            .collect();
        out.write_csv(&format!("trajectory_{i:05}.csv"), &th_refs, &rows)?;
    }
    let mean_range = results.iter().map(|(_, st)| st.range as f64).sum::<f64>() / walks as f64;
    let dir = out.path().display().to_string();
    out.finish("simulate", p.as_map(), seed)?;
    Ok(format!(
        "simulate {s}: {walks} walks of {n} steps, mean range {mean_range:.1}, {dump} trajectories -> {dir}"
    ))
}

pub fn return_prob(mut p: Params) -> Result<String, CliError> {
    let s = spec(&p)?;
    let kmin = p.get_or("kmin", 8u32)?;
    let kmax = p.get_or("kmax", 14u32)?;
    let walks = positive(&p, "walks", 1_000)?;
    p.default_value("kmin", kmin);
    p.default_value("kmax", kmax);
    p.default_value("walks", walks);
    let (seed, mut out) = prepare(&mut p, "return-prob")?;
    let rows = window_return_probability(&s, kmin, kmax, walks, seed)?;
    let csv: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let [p_hat, lo, hi] = ci_cells(&r.ci);
            vec![
                r.k.to_string(),
                r.window_lo.to_string(),
                r.window_hi.to_string(),
                r.hits.to_string(),
                r.walks.to_string(),
                p_hat,
                lo,
                hi,
                num(r.reference_curve),
            ]
        })
        .collect();
    out.write_csv(
        "return_prob.csv",
        &["k", "window_lo", "window_hi", "hits", "walks", "p_hat", "ci_lo", "ci_hi", "reference_curve"],
        &csv,
    )?;
    let cis: Vec<CiEstimate> = rows.iter().map(|r| r.ci).collect();
    let mono = non_increasing_within_ci(&cis);
    let last = rows.last().expect("kmin <= kmax");
    let dir = out.path().display().to_string();
    out.finish("return-prob", p.as_map(), seed)?;
    Ok(format!(
        "return-prob {s}: k={kmin}..{kmax}, {walks} walks, p_hat({}) = {}, non-increasing within CI: {mono} -> {dir}",
        last.k, last.ci.point
    ))
}

pub fn range_stats(mut p: Params) -> Result<String, CliError> {
    let s = spec(&p)?;
    let n = p.get_or("n", 100_000u64)?;
    let walks = positive(&p, "walks", 200)?;
    let checkpoints = p.get_list::<u64>("checkpoints")?.unwrap_or_else(|| vec![n]);
    let band_constant = p.get_or("band_constant", DEFAULT_BAND_CONSTANT)?;
    if !(band_constant > 0.0) {
        return Err(CliError::Usage("band_constant must be positive".into()));
    }
    p.default_value("n", n);
    p.default_value("walks", walks);
    p.default_value(
        "checkpoints",
        checkpoints.iter().map(u64::to_string).collect::<Vec<_>>().join(","),
    );
    p.default_value("band_constant", band_constant);
    let (seed, mut out) = prepare(&mut p, "range-stats")?;
    let cfg = EnsembleConfig::new(s, n, walks, seed, checkpoints)?;
    let stats = core_range_stats(&cfg, band_constant)?;
    let opt = |x: Option<f64>| x.map(num).unwrap_or_default();
    let rows: Vec<Vec<String>> = stats
        .iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                num(r.range.mean),
                r.range.min.to_string(),
                r.range.max.to_string(),
                opt(r.block1.map(|b| b.mean)),
                opt(r.block2.map(|b| b.mean)),
                opt(r.band.map(|b| b.0)),
                opt(r.band.map(|b| b.1)),
                r.violations.to_string(),
            ]
        })
        .collect();
    out.write_csv(
        "range.csv",
        &["n", "r_mean", "r_min", "r_max", "r1_mean", "r2_mean", "band_lo", "band_hi", "violations"],
        &rows,
    )?;
    let violations: u64 = stats.iter().map(|r| r.violations).sum();
    let dir = out.path().display().to_string();
    out.finish("range-stats", p.as_map(), seed)?;
    Ok(format!(
        "range-stats {s}: {walks} walks, {} checkpoints, {violations} band violations -> {dir}",
        stats.len()
    ))
}

pub fn martingale(mut p: Params) -> Result<String, CliError> {
    let n = positive(&p, "n", 1 << 15)?;
    let walks = positive(&p, "walks", 200)?;
    let kmax = p.get_or("kmax", 40u32)?;
    let tau_kmin = p.get_or("tau_kmin", 8u32)?;
    let tau_kmax = p.get_or("tau_kmax", 14u32)?;
    let joint_walks = p.get_or("joint_walks", 0u64)?;
    if tau_kmin > tau_kmax || tau_kmax > 16 {
        return Err(CliError::Usage("need tau_kmin <= tau_kmax <= 16".into()));
    }
    for (k, v) in [("n", n), ("walks", walks), ("joint_walks", joint_walks)] {
        p.default_value(k, v);
    }
    p.default_value("kmax", kmax);
    p.default_value("tau_kmin", tau_kmin);
    p.default_value("tau_kmax", tau_kmax);
    let (seed, mut out) = prepare(&mut p, "martingale")?;

    let report = martingale_ensemble(n, walks, seed)?;
    let tail = report.gap_tail(kmax);
    let rows: Vec<Vec<String>> = tail
        .iter()
        .map(|r| vec![r.k.to_string(), num(r.tail.point), num(r.bound), num(r.ci_half_width())])
        .collect();
    out.write_csv("gap_tail.csv", &["k", "empirical_tail", "bound", "ci_hw"], &rows)?;
    let tail_ok = tail.iter().all(|r| r.holds(4.0));
    out.write_json(
        "diagnostics.json",
        &json!({
            "report": report,
            "mean_within_3_sigma": report.mean_within(3.0),
            "fresh_bound_holds": report.fresh_bound_holds(),
            "gap_tail_within_bound": tail_ok,
        }),
    )?;

    let mut joint = String::new();
    if joint_walks > 0 {
        let taus: Vec<u64> = (tau_kmin..=tau_kmax).map(|k| 1 << k).collect();
        let table = joint_return_table(&taus, joint_walks, seed, JOINT_STEP_CAP)?;
        let rows: Vec<Vec<String>> = table
            .iter()
            .map(|r| {
                vec![
                    r.n_tau.to_string(),
                    r.hits.to_string(),
                    r.walks.to_string(),
                    num(r.ci.point),
                    num(r.ci.half_width()),
                    num(r.ci.lower),
                    num(r.ci.upper),
                    r.abandoned.to_string(),
                ]
            })
            .collect();
        out.write_csv(
            "joint_return.csv",
            &["n_tau", "hits", "walks", "p_hat", "ci", "ci_lo", "ci_hi", "abandoned"],
            &rows,
        )?;
        let scaled: Vec<CiEstimate> = table.iter().map(|r| r.ci.scaled(r.n_tau as f64)).collect();
        joint = format!(", n_tau*p_hat non-increasing within CI: {}", non_increasing_within_ci(&scaled));
    }
    let dir = out.path().display().to_string();
    out.finish("martingale", p.as_map(), seed)?;
    Ok(format!(
        "martingale: {} increments, {} bound violations, {} frozen-X exceptions, gap tail within bound: {tail_ok}{joint} -> {dir}",
        report.increment_mean.n, report.bound_violations, report.frozen_x_exceptions
    ))
}

fn step_path(steps: &[UnitStep]) -> String {
    steps.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn bridge(mut p: Params) -> Result<String, CliError> {
    let ns = p.get_list::<u64>("n")?.unwrap_or_else(|| vec![4]);
    let samples = positive(&p, "walks", 100_000)?;
    let rho = p.get_or("rho", DEFAULT_RHO)?;
    let export = p.get_or("export", 0u64)?.min(samples);
    p.default_value("n", ns.iter().map(u64::to_string).collect::<Vec<_>>().join(","));
    p.default_value("walks", samples);
    p.default_value("rho", rho);
    p.default_value("export", export);
    for &n in &ns {
        BridgeSampler::new(n)?;
    }
    let (seed, mut out) = prepare(&mut p, "bridge")?;

    let mut exact_rows = Vec::new();
    let mut checks = Vec::new();
    let mut k_rows = Vec::new();
    let mut tail_rows = Vec::new();
    let mut step_rows = Vec::new();
    let mut summary = Vec::new();
    for &n in &ns {
        let sampler = BridgeSampler::new(n)?;
        if n <= MAX_EXACT_LAW_LENGTH {
            let law = exact_bridge_law(n)?;
            let index: std::collections::BTreeMap<&Vec<UnitStep>, usize> =
                law.keys().enumerate().map(|(i, k)| (k, i)).collect();
            let paths = map_walks(seed, samples, |_, mut rng| Ok(sampler.sample(&mut rng).steps))?;
            let mut counts = vec![0u64; law.len()];
            let mut closed = true;
            for path in &paths {
                closed &= path.iter().map(|s| if s.axis == 0 { [s.sign(), 0] } else { [0, s.sign()] })
                    .fold([0i64; 2], |a, d| [a[0] + d[0], a[1] + d[1]]) == [0, 0];
                counts[index[path]] += 1;
            }
            let probs: Vec<f64> = law.values().map(|q| q.to_f64().unwrap_or(f64::NAN)).collect();
            let chi = chi_square(&counts, &probs);
            for ((path, prob), c) in law.keys().zip(&probs).zip(&counts) {
                exact_rows.push(vec![
                    n.to_string(),
                    step_path(path),
                    num(*prob),
                    num(samples as f64 * prob),
                    c.to_string(),
                ]);
            }
            let pass = chi.p_value > P_THRESHOLD && closed;
            summary.push(format!("n={n} chi-square p={:.4} ({})", chi.p_value, if pass { "pass" } else { "FAIL" }));
            checks.push(json!({"n": n, "paths": law.len(), "chi_square": chi, "all_closed": closed, "pass": pass}));
        }
        let k = k_tail_probability(n, rho, samples, seed)?;
        for (size, count) in k.histogram.iter().enumerate() {
            k_rows.push(vec![
                n.to_string(),
                size.to_string(),
                count.to_string(),
                num(*count as f64 / samples as f64),
            ]);
        }
        let [p_hat, lo, hi] = ci_cells(&k.ci);
        tail_rows.push(vec![n.to_string(), num(rho), num(k.threshold), samples.to_string(), p_hat, lo, hi]);
        for i in 0..export {
            let b = sampler.sample(&mut berw_core::RngStream::new(seed, i));
            for (j, st) in b.steps.iter().enumerate() {
                let (dx, dy) = if st.axis == 0 { (st.sign(), 0) } else { (0, st.sign()) };
                step_rows.push(vec![n.to_string(), i.to_string(), j.to_string(), dx.to_string(), dy.to_string()]);
            }
        }
    }
    if !exact_rows.is_empty() {
        out.write_csv("bridge_exactness.csv", &["n", "path", "probability", "expected", "observed"], &exact_rows)?;
        out.write_json("bridge_exactness.json", &Value::Array(checks))?;
    }
    out.write_csv("k_distribution.csv", &["n", "k_size", "count", "fraction"], &k_rows)?;
    out.write_csv("k_tail.csv", &["n", "rho", "threshold", "samples", "p_hat", "ci_lo", "ci_hi"], &tail_rows)?;
    if export > 0 {
        out.write_csv("bridge_steps.csv", &["n", "sample", "step_index", "dx", "dy"], &step_rows)?;
    }
    let dir = out.path().display().to_string();
    out.finish("bridge", p.as_map(), seed)?;
    summary.push(format!("{samples} samples per length"));
    Ok(format!("bridge: {} -> {dir}", summary.join(", ")))
}

pub fn trace_check(mut p: Params) -> Result<String, CliError> {
    let dmax = p.get_or("dmax", 8usize)?;
    if !(2..=16).contains(&dmax) {
        return Err(CliError::Usage("dmax must lie in 2..=16".into()));
    }
    let single = if p.raw("d").is_some() || p.raw("d1").is_some() || p.raw("d2").is_some() {
        Some(spec(&p)?)
    } else {
        None
    };
    p.default_value("dmax", dmax);
    let (seed, mut out) = prepare(&mut p, "trace-check")?;

    let mut rows = Vec::new();
    let (mut transient, mut open, mut complete) = (0, 0, true);
    for d in 2..=dmax {
        for d1 in 1..=d {
            for d2 in 1..=d {
                let s = WalkSpec::new(d, d1, d2)?;
                let c = core_classify(&s)?;
                match c.verdict {
                    Verdict::Transient => transient += 1,
                    Verdict::Open => open += 1,
                    Verdict::ClassicalRecurrent => {}
                }
                if d >= 4 && d1 + d2 > d && (d, d1, d2) != (4, 3, 2) && c.verdict != Verdict::Transient {
                    complete = false;
                }
                let j = c.to_json();
                rows.push(vec![
                    d.to_string(),
                    d1.to_string(),
                    d2.to_string(),
                    s.overlap().to_string(),
                    j["verdict"].as_str().unwrap_or_default().to_string(),
                    j["reason"].as_str().unwrap_or_default().to_string(),
                    j["citation"].as_str().unwrap_or_default().to_string(),
                ]);
            }
        }
    }
    out.write_csv("classification.csv", &["d", "d1", "d2", "r", "verdict", "reason", "citation"], &rows)?;
    let mut detail = String::new();
    if let Some(s) = single {
        let (measures, _) = berw_as_adapted_rule(&s);
        let report = trace_condition(&measures, &Transform::Identity)?;
        let c = core_classify(&s)?;
        detail = format!(", {s}: trace condition {}", if report.overall { "passes" } else { "fails" });
        out.write_json("trace.json", &json!({"classification": c.to_json(), "trace_condition": report}))?;
    }
    let dir = out.path().display().to_string();
    out.finish("trace-check", p.as_map(), seed)?;
    Ok(format!(
        "trace-check: {} specs up to d={dmax}, {transient} transient, {open} open, overlapping cases d>=4 complete: {complete}{detail} -> {dir}",
        rows.len()
    ))
}
