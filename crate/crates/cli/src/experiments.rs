use std::path::Path;

use fracdio::contfrac::{self, ExactCoding};
use fracdio::groups::Representation;
use fracdio::ifs::{self, Ifs, Preset};
use fracdio::lattice::{self, RealMatrix, BA_CONSTANT_THRESHOLD};
use fracdio::moebius::{self, MoebiusIfs};
use fracdio::randwalk::{self, GroupWalk, ProductSource};
use fracdio::seed::SeedStream;
use fracdio::stats;
use nalgebra::Matrix2;
use rayon::prelude::*;

use crate::config::{check_range, knob, Experiment, RunConfig};
use crate::report::{Cell, Outcome, Provenance, Table};
use crate::CliError;

/// Runs one experiment. Defaults are written back into `cfg`, so after the call it holds
/// the effective configuration.
pub fn run(cfg: &mut RunConfig) -> Result<Outcome, CliError> {
    let seed = cfg.seed()?;
    let mut out = match cfg.experiment()? {
        Experiment::CfStats => cf_stats(cfg, seed)?,
        Experiment::Lyapunov => lyapunov(cfg, seed)?,
        Experiment::Positivity => positivity(cfg, seed)?,
        Experiment::Attraction => attraction(cfg, seed)?,
        Experiment::Flow => flow(cfg)?,
        Experiment::BaTest => ba_test(cfg)?,
        Experiment::DiTest => di_test(cfg)?,
        Experiment::WalkEquidist => walk_equidist(cfg, seed)?,
        Experiment::FnCheck => fn_check(cfg, seed)?,
        Experiment::UrProbe => ur_probe(cfg, seed)?,
        Experiment::IdentityCheck => identity_check(cfg, seed)?,
    };
    out.empty_warning();
    Ok(out)
}

fn similarity_system(name: &str) -> Result<Ifs, CliError> {
    if Path::new(name).is_file() {
        return Ok(ifs::load_ifs(Path::new(name))?);
    }
    Ok(ifs::preset_similarity(name)?)
}

fn moebius_system(name: &str) -> Result<MoebiusIfs, CliError> {
    match ifs::preset(name)? {
        Preset::Moebius(m) => Ok(m),
        Preset::Similarity(_) => Err(CliError::Config(format!("'{name}' is not a Möbius system"))),
    }
}

fn illustrative_degree(name: &str) -> Option<Result<usize, CliError>> {
    let arg = name.trim().strip_prefix("illustrative")?;
    let arg = arg.trim_start_matches('(').trim_end_matches(')').trim();
    Some(
        arg.parse::<usize>()
            .map_err(|_| CliError::Config(format!("bad illustrative degree in '{name}'")))
            .and_then(|d| check_range("illustrative degree", d, 1, 4)),
    )
}

fn group_walk(cfg: &mut RunConfig, default: &str) -> Result<GroupWalk, CliError> {
    let name = cfg.system_or(default);
    match illustrative_degree(&name) {
        Some(d) => {
            let ws = *cfg.walk_seed.get_or_insert(1);
            Ok(GroupWalk::illustrative(d?, ws)?)
        }
        None => Ok(GroupWalk::from_ifs(&similarity_system(&name)?)?),
    }
}

fn parse_matrix2(s: &str) -> Result<Matrix2<f64>, CliError> {
    let m = RealMatrix::parse(s)?;
    if (m.rows, m.cols) != (2, 2) {
        return Err(CliError::Config("conjugator must be a 2x2 matrix".into()));
    }
    let f = m.to_f64();
    Ok(Matrix2::new(f[(0, 0)], f[(0, 1)], f[(1, 0)], f[(1, 1)]))
}

fn alpha(cfg: &mut RunConfig, default: &str) -> Result<RealMatrix, CliError> {
    let s = cfg.alpha.get_or_insert_with(|| default.to_string()).clone();
    Ok(RealMatrix::parse(&s)?)
}

fn cf_stats(cfg: &mut RunConfig, seed: u64) -> Result<Outcome, CliError> {
    let name = cfg.system_or("cantor3");
    let points = knob(&mut cfg.points, "points", 200, 1, 100_000)?;
    let digits = knob(&mut cfg.digits, "digits", 500, 1, 100_000)?;
    let depth = knob(&mut cfg.depth, "depth", 0, 0, 1_000_000)?;
    let k_max = knob(&mut cfg.k_max, "k_max", 10, 1, 10_000)?;
    let tol = knob(&mut cfg.tolerance, "tolerance", 0.02, 0.0, 1.0)?;
    let system: Box<dyn ExactCoding> = if Path::new(&name).is_file() {
        Box::new(ifs::load_ifs(Path::new(&name))?)
    } else {
        match ifs::preset(&name)? {
            Preset::Similarity(i) => Box::new(i),
            Preset::Moebius(m) => Box::new(m),
        }
    };
    let r = contfrac::fractal_cf_experiment(system.as_ref(), points, depth, digits, seed, k_max)?;
    let mut t = Table::new(&["bin", "count", "empirical", "reference"]);
    let mut out = Outcome::default();
    if let Some(rep) = &r.report {
        for k in 0..rep.counts.len() {
            t.push(vec![(k + 1).to_string().into(), rep.counts[k].into(), rep.empirical[k].into(), rep.reference[k].into()]);
        }
        t.push(vec![format!(">{k_max}").into(), rep.tail_count.into(), rep.tail_empirical.into(), rep.tail_reference.into()]);
        out.derive("total_digits", rep.total, Provenance::Exact);
        out.derive("sup_deviation", rep.sup_deviation, Provenance::Measured);
        out.pass = Some(
            (r.digit_one_frequency - contfrac::gauss_probability(1)).abs() <= tol && rep.sup_deviation < tol && r.shortfalls == 0,
        );
    } else {
        out.warnings.push("too few certified digits for frequency statistics".into());
        out.pass = Some(false);
    }
    out.table = Some(t);
    out.derive("digit_one_frequency", r.digit_one_frequency, Provenance::Measured);
    out.derive("digit_one_reference", contfrac::gauss_probability(1), Provenance::ClosedForm);
    out.derive("max_digit", r.max_digit, Provenance::Exact);
    out.derive("shortfalls", r.shortfalls, Provenance::Exact);
    out.derive("min_depth", r.depths.iter().copied().min().unwrap_or(0), Provenance::Exact);
    if r.shortfalls > 0 {
        out.shortfall = Some(format!("{} of {points} points fell short of {digits} certified digits", r.shortfalls));
    }
    Ok(out)
}

fn representation(level: usize) -> Representation {
    if level == 0 {
        Representation::Standard
    } else {
        Representation::Wedge(level)
    }
}

fn lyapunov(cfg: &mut RunConfig, seed: u64) -> Result<Outcome, CliError> {
    let n = knob(&mut cfg.n, "n", 10_000, randwalk::MIN_LYAPUNOV_STEPS, 10_000_000)?;
    let chains = knob(&mut cfg.chains, "chains", 4, 2, 256)?;
    let period = knob(&mut cfg.period, "period", 0, 0, 64)?;
    let name = cfg.system.clone().unwrap_or_else(|| if cfg.blocks.is_some() { "blocks".into() } else { "illustrative(1)".into() });
    cfg.system = Some(name.clone());
    let sampler = name.strip_prefix("sampler:").map(str::to_string);
    if sampler.is_some() || cfg.blocks.is_some() {
        let (blocks, weights) = match (&sampler, &cfg.blocks) {
            (Some(s), _) => {
                let (_, b, w) = randwalk::synthetic_block_samplers()
                    .into_iter()
                    .find(|(n, _, _)| n == s)
                    .ok_or_else(|| CliError::Config(format!("unknown sampler '{s}'")))?;
                (b, w)
            }
            (None, Some(b)) => {
                let w = cfg.weights.clone().ok_or_else(|| CliError::Config("block spec needs `weights`".into()))?;
                (b.clone(), w)
            }
            _ => unreachable!(),
        };
        let coupling = knob(&mut cfg.coupling, "coupling", 1.0, 0.0, 100.0)?;
        let floor = knob(&mut cfg.tolerance, "tolerance", 1e-2, 0.0, 10.0)?;
        let ws = *cfg.walk_seed.get_or_insert(1);
        let measure = randwalk::block_triangular_measure(&blocks, &weights, coupling, ws)?;
        let oracle = randwalk::block_exponent_oracle(&blocks, &weights)?;
        let p = if period == 0 { randwalk::suggested_period(&measure) } else { period };
        let est = randwalk::lyapunov_spectrum(&measure, n, p, chains, seed)?;
        let mut out = spectrum_table(&est, Some(&oracle.exponents));
        out.derive("period_used", p, Provenance::Input);
        out.derive("strict_gap", oracle.strict_gap, Provenance::ClosedForm);
        out.pass = Some(randwalk::matches_oracle(&est, &oracle, floor));
        return Ok(out);
    }
    let walk = group_walk(cfg, "illustrative(1)")?;
    let d = walk.m + walk.n;
    let level = knob(&mut cfg.level, "level", 1, 0, d * d - 2)?;
    let rw = walk.in_rep(representation(level))?;
    if rw.dim() > 2000 {
        return Err(CliError::Config(format!("representation of dimension {} is too large", rw.dim())));
    }
    let p = if period == 0 { randwalk::suggested_period(&rw) } else { period };
    let est = randwalk::lyapunov_spectrum(&rw, n, p, chains, seed)?;
    let mut out = spectrum_table(&est, None);
    out.derive("period_used", p, Provenance::Input);
    out.derive("w_exponent", walk.w_exponent()?, Provenance::Exact);
    let (s, e) = est.volume_sum();
    out.pass = Some(s.abs() < 3.0 * e);
    Ok(out)
}

fn spectrum_table(est: &randwalk::LyapunovEstimate, oracle: Option<&[f64]>) -> Outcome {
    let mut t = if oracle.is_some() {
        Table::new(&["index", "exponent", "stderr", "oracle"])
    } else {
        Table::new(&["index", "exponent", "stderr"])
    };
    for i in 0..est.exponents.len() {
        let mut row: Vec<Cell> = vec![(i + 1).into(), est.exponents[i].into(), est.stderr[i].into()];
        if let Some(o) = oracle {
            row.push(o[i].into());
        }
        t.push(row);
    }
    let mut out = Outcome::with_table(t);
    let (s, e) = est.volume_sum();
    out.derive("volume_sum", s, Provenance::Measured);
    out.derive("volume_sum_error", e, Provenance::Measured);
    out.derive("volume_sum_expected", 0.0, Provenance::Identity);
    out
}

fn positivity(cfg: &mut RunConfig, seed: u64) -> Result<Outcome, CliError> {
    let walk = group_walk(cfg, "cantor3")?;
    let d = walk.m + walk.n;
    let level = knob(&mut cfg.level, "level", 1, 1, d * d - 2)?;
    let n = knob(&mut cfg.n, "n", 500, 1, 1_000_000)?;
    let trials = knob(&mut cfg.trials, "trials", 30, randwalk::MIN_TRIALS, 100_000)?;
    let r = randwalk::positivity_check(&walk, level, n, trials, seed)?;
    let mut t = Table::new(&["direction", "mean", "stderr"]);
    for dgr in &r.directions {
        t.push(vec![dgr.label.clone().into(), dgr.mean.into(), dgr.stderr.into()]);
    }
    let mut out = Outcome::with_table(t);
    out.derive("estimate", r.estimate, Provenance::Measured);
    out.derive("stderr", r.stderr, Provenance::Measured);
    out.derive("w_exponent", walk.w_exponent()?, Provenance::Exact);
    out.pass = Some(r.estimate - 3.0 * r.stderr > 0.0);
    Ok(out)
}

fn attraction(cfg: &mut RunConfig, seed: u64) -> Result<Outcome, CliError> {
    let walk = group_walk(cfg, "illustrative(1)")?;
    let n = knob(&mut cfg.n, "n", 200, 0, 100_000)?;
    let trials = knob(&mut cfg.trials, "trials", 30, randwalk::MIN_TRIALS, 100_000)?;
    let bound = knob(&mut cfg.tolerance, "tolerance", 1e-6, 0.0, 1.0)?;
    let r = randwalk::attraction_to_w(&walk, n, trials, seed)?;
    let mut t = Table::new(&["step", "median", "q10", "q90"]);
    for i in 0..r.steps.len() {
        t.push(vec![r.steps[i].into(), r.median[i].into(), r.q10[i].into(), r.q90[i].into()]);
    }
    let gap = walk.w_exponent()?;
    let last = r.median.last().copied().unwrap_or(f64::NAN);
    let mut out = Outcome::with_table(t);
    out.derive("final_median", last, Provenance::Measured);
    out.derive("decay_rate", r.decay_rate, Provenance::Measured);
    out.derive("fit_start", r.fit_range.0, Provenance::Measured);
    out.derive("fit_end", r.fit_range.1, Provenance::Measured);
    out.derive("exponent_gap", gap, Provenance::Exact);
    out.pass = Some(last < bound && (r.decay_rate - gap).abs() <= 0.2 * gap);
    Ok(out)
}

fn flow(cfg: &mut RunConfig) -> Result<Outcome, CliError> {
    let a = alpha(cfg, "golden")?;
    let t_max = knob(&mut cfg.t_max, "t_max", 40.0, 0.0, 400.0)?;
    let dt = knob(&mut cfg.dt, "dt", 0.01, 1e-4, 100.0)?;
    let tr = lattice::flow_trace(&a, t_max, dt)?;
    let mut t = Table::new(&["t", "systole"]);
    for (x, s) in tr.times.iter().zip(&tr.systoles) {
        t.push(vec![(*x).into(), (*s).into()]);
    }
    let escape = tr.systoles.iter().filter(|&&s| s < lattice::ESCAPE_THRESHOLD).count() as f64 / tr.systoles.len() as f64;
    let max = tr.systoles.iter().copied().fold(0.0, f64::max);
    let mut out = Outcome::with_table(t);
    out.derive("min_systole", tr.min_systole(), Provenance::Exact);
    out.derive("escape_fraction", escape, Provenance::Measured);
    out.derive("escape_threshold", lattice::ESCAPE_THRESHOLD, Provenance::Input);
    out.derive("stays_bounded", tr.stays_bounded(), Provenance::Exact);
    // Minkowski: a unimodular lattice has a nonzero vector of length at most 2.
    out.pass = Some(tr.min_systole() > 0.0 && max <= 2.0);
    Ok(out)
}

fn join_q(q: &[i64]) -> String {
    q.iter().map(i64::to_string).collect::<Vec<_>>().join(" ")
}

fn ba_test(cfg: &mut RunConfig) -> Result<Outcome, CliError> {
    let a = alpha(cfg, "golden")?;
    let q_max = knob(&mut cfg.q_max, "q_max", 10_000, 1, 10_000_000)?;
    let r = lattice::ba_test_direct(&a, q_max)?;
    let mut t = Table::new(&["c_min", "argmin_q", "c_min_all", "argmin_q_all", "error_bound", "badly_approximable"]);
    t.push(vec![
        r.c_min.into(),
        join_q(&r.argmin_q).into(),
        r.c_min_all.into(),
        join_q(&r.argmin_q_all).into(),
        r.error_bound.into(),
        r.badly_approximable().into(),
    ]);
    let mut out = Outcome::with_table(t);
    out.derive("c_min", r.c_min, Provenance::Exact);
    out.derive("c_min_all", r.c_min_all, Provenance::Exact);
    out.derive("classification_threshold", BA_CONSTANT_THRESHOLD, Provenance::Input);
    out.pass = Some(r.badly_approximable());
    Ok(out)
}

fn di_test(cfg: &mut RunConfig) -> Result<Outcome, CliError> {
    let a = alpha(cfg, "golden")?;
    let lambda = knob(&mut cfg.lambda, "lambda", 0.9, 1e-6, 1.0)?;
    let q_min = knob(&mut cfg.q_min, "q_min", 10, 1, 100_000_000)?;
    let q_max = knob(&mut cfg.q_max, "q_max", 10_000, q_min, 100_000_000)?;
    let q_step = knob(&mut cfg.q_step, "q_step", 1, 1, 100_000_000)?;
    let qs: Vec<i64> = (q_min..=q_max).step_by(q_step as usize).collect();
    if qs.len() > 1_000_000 {
        return Err(CliError::Config("more than 10^6 values of Q requested".into()));
    }
    let r = lattice::di_test(&a, lambda, &qs)?;
    let mut t = Table::new(&["q", "pass"]);
    for &(q, p) in &r.results {
        t.push(vec![q.into(), p.into()]);
    }
    let mut out = Outcome::with_table(t);
    out.derive("all_pass", r.all_pass(), Provenance::Exact);
    out.derive("failures", r.results.iter().filter(|x| !x.1).count(), Provenance::Exact);
    out.derive("error_bound", r.error_bound, Provenance::Exact);
    out.pass = Some(r.all_pass());
    Ok(out)
}

fn walk_equidist(cfg: &mut RunConfig, seed: u64) -> Result<Outcome, CliError> {
    let name = cfg.system_or("cantor3");
    let system = similarity_system(&name)?;
    let n = knob(&mut cfg.n, "n", 10_000, 1000, 10_000_000)?;
    let replicas = knob(&mut cfg.chains, "chains", 2, 1, 64)?;
    let thresholds = cfg.thresholds.get_or_insert_with(|| lattice::DEFAULT_THRESHOLDS.to_vec()).clone();
    if thresholds.is_empty() || thresholds.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
        return Err(CliError::Config("thresholds must be positive".into()));
    }
    let seeds = SeedStream::new(seed);
    let reports = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let series = lattice::sampled_walk_systoles(&system, n, seeds.child(r as u64).root())?;
            lattice::equidist_diagnostics(&series, &thresholds)
        })
        .collect::<fracdio::Result<Vec<_>>>()?;
    let mut t = Table::new(&["replica", "threshold", "average", "stderr", "first_half", "second_half"]);
    for (r, rep) in reports.iter().enumerate() {
        for i in 0..rep.thresholds.len() {
            t.push(vec![
                r.into(),
                rep.thresholds[i].into(),
                rep.averages[i].into(),
                rep.stderr[i].into(),
                rep.first_half[i].into(),
                rep.second_half[i].into(),
            ]);
        }
    }
    let stable = reports.iter().all(|r| r.split_half_stable);
    let agree = reports.windows(2).all(|w| lattice::diagnostics_agree(&w[0], &w[1]));
    let mut out = Outcome::with_table(t);
    out.derive("split_half_stable", stable, Provenance::Measured);
    out.derive("replicas_agree", agree, Provenance::Measured);
    for (r, rep) in reports.iter().enumerate() {
        out.derive(&format!("escape_fraction_{r}"), rep.escape_fraction, Provenance::Measured);
    }
    out.pass = Some(stable && agree);
    Ok(out)
}

fn fn_check(cfg: &mut RunConfig, seed: u64) -> Result<Outcome, CliError> {
    let name = cfg.system_or("fN(5)");
    let n_maps = moebius_system(&name)?.maps.len();
    let words = knob(&mut cfg.trials, "trials", 100, 1, 1_000_000)?;
    let depth = knob(&mut cfg.depth, "depth", 40, 1, 100_000)?;
    let (sys, _) = moebius::fn_preset(n_maps)?;
    let seeds = SeedStream::new(seed);
    let results: Vec<fracdio::Result<moebius::BoundedQuotientReport>> = (0..words)
        .into_par_iter()
        .map(|i| {
            let w = sys.sample_word(depth, &mut seeds.rng(i as u64));
            moebius::bounded_quotient_check(&w, n_maps, depth)
        })
        .collect();
    let mut t = Table::new(&["word", "certified_digits", "max_digit", "matches_word", "pass"]);
    let mut out = Outcome::default();
    let mut failures = 0usize;
    let mut short = 0usize;
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(r) => {
                let max = r.certified_digits.iter().copied().max().unwrap_or(0);
                failures += usize::from(!r.pass);
                t.push(vec![i.into(), r.certified_digits.len().into(), max.into(), r.matches_word.into(), r.pass.into()]);
            }
            Err(fracdio::Error::Uncertified(msg)) => {
                short += 1;
                out.warnings.push(format!("word {i}: {msg}"));
                t.push(vec![i.into(), 0usize.into(), 0u64.into(), false.into(), false.into()]);
            }
            Err(e) => return Err(e.into()),
        }
    }
    out.table = Some(t);
    out.derive("alphabet", n_maps, Provenance::Input);
    out.derive("failures", failures, Provenance::Exact);
    out.derive("uncertified", short, Provenance::Exact);
    out.pass = Some(failures == 0 && short == 0);
    if short > 0 {
        out.shortfall = Some(format!("{short} of {words} words could not be certified to depth {depth}"));
    }
    Ok(out)
}

fn ur_probe(cfg: &mut RunConfig, seed: u64) -> Result<Outcome, CliError> {
    let name = cfg.system_or("fN(5)");
    let mut sys = moebius_system(&name)?;
    if let Some(c) = &cfg.conjugator {
        sys = sys.conjugate(&parse_matrix2(c)?)?;
    }
    let n = knob(&mut cfg.n, "n", 200, 0, 1_000_000)?;
    let words = knob(&mut cfg.trials, "trials", 50, 1, 100_000)?;
    let bound = knob(&mut cfg.tolerance, "tolerance", 1.0, 0.0, 1e6)?;
    let seeds = SeedStream::new(seed);
    let series = (0..words)
        .into_par_iter()
        .map(|i| {
            let w = sys.sample_word(n, &mut seeds.rng(i as u64));
            moebius::ur_probe(&sys, &w, n)
        })
        .collect::<fracdio::Result<Vec<_>>>()?;
    let mut t = Table::new(&["step", "median_height", "max_height"]);
    let mut medians = Vec::with_capacity(n);
    for k in 0..n {
        let col: Vec<f64> = series.iter().map(|s| s[k]).collect();
        let med = stats::median(&col);
        medians.push(med);
        t.push(vec![(k + 1).into(), med.into(), col.iter().copied().fold(0.0, f64::max).into()]);
    }
    let max = series.iter().flatten().copied().fold(0.0, f64::max);
    let mut out = Outcome::with_table(t);
    out.derive("max_height", max, Provenance::Measured);
    if n >= 2 {
        let steps: Vec<f64> = (1..=n).map(|k| k as f64).collect();
        out.derive("median_trend", stats::linear_fit(&steps, &medians).1, Provenance::Measured);
    }
    out.derive("integer_maps", sys.maps.iter().all(moebius::MoebiusMap::integer_flag), Provenance::Exact);
    out.pass = Some(max <= bound);
    Ok(out)
}

fn identity_check(cfg: &mut RunConfig, seed: u64) -> Result<Outcome, CliError> {
    let name = cfg.system_or("cantor3");
    let system = similarity_system(&name)?;
    let n = knob(&mut cfg.n, "n", 30, 1, 200)?;
    let tail = knob(&mut cfg.tail, "tail", 80, 1, 10_000)?;
    let words = knob(&mut cfg.trials, "trials", 10, 1, 10_000)?;
    let budget_cap = knob(&mut cfg.tolerance, "tolerance", 1e-9, 0.0, 1.0)?;
    let seeds = SeedStream::new(seed);
    let rows = (0..words)
        .into_par_iter()
        .map(|i| {
            let w = system.sample_word(n + tail, &mut seeds.rng(i as u64));
            (1..=n).map(|k| lattice::walk_flow_identity_check(&system, &w, k, tail).map(|r| (i, k, r))).collect::<Vec<_>>()
        })
        .collect::<Vec<_>>();
    let mut t = Table::new(&["word", "n", "discrepancy", "budget", "certified"]);
    let mut ok = true;
    let (mut worst, mut max_budget) = (0.0f64, 0.0f64);
    for r in rows.into_iter().flatten() {
        let (i, k, r) = r?;
        ok &= r.certified && r.discrepancy <= r.budget && r.budget <= budget_cap;
        worst = worst.max(r.discrepancy);
        max_budget = max_budget.max(r.budget);
        t.push(vec![i.into(), k.into(), r.discrepancy.into(), r.budget.into(), r.certified.into()]);
    }
    let mut out = Outcome::with_table(t);
    out.derive("max_discrepancy", worst, Provenance::Measured);
    out.derive("max_budget", max_budget, Provenance::Exact);
    out.pass = Some(ok);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(e: Experiment) -> RunConfig {
        RunConfig { experiment: Some(e), seed: Some(3), ..Default::default() }
    }

    #[test]
    fn defaults_are_recorded() {
        let mut c = cfg(Experiment::BaTest);
        c.q_max = Some(200);
        let out = run(&mut c).unwrap();
        assert_eq!(c.alpha.as_deref(), Some("golden"));
        assert_eq!(out.pass, Some(true));
    }

    #[test]
    fn out_of_range_knobs_are_config_errors() {
        let mut c = cfg(Experiment::Positivity);
        c.trials = Some(5);
        assert!(matches!(run(&mut c), Err(CliError::Config(_))));
        let mut c = cfg(Experiment::Flow);
        c.alpha = Some("not a number".into());
        assert!(matches!(run(&mut c), Err(CliError::Config(_))));
    }

    #[test]
    fn seed_is_mandatory() {
        let mut c = cfg(Experiment::Flow);
        c.seed = None;
        assert!(matches!(run(&mut c), Err(CliError::Config(_))));
    }

    #[test]
    fn empty_probe_warns() {
        let mut c = cfg(Experiment::UrProbe);
        c.n = Some(0);
        let out = run(&mut c).unwrap();
        assert!(out.to_csv().ends_with(",warning\n"));
        assert!(!out.warnings.is_empty());
    }

    #[test]
    fn rational_flow_escapes() {
        let mut c = cfg(Experiment::Flow);
        c.alpha = Some("1/2".into());
        c.dt = Some(0.1);
        let out = run(&mut c).unwrap();
        let esc = out.derived.iter().find(|d| d.name == "escape_fraction").unwrap();
        assert!(matches!(esc.value, Cell::Float(x) if x > 0.9));
    }
}
