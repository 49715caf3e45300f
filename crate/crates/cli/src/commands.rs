use std::path::Path;

use anyhow::Result;
use hjsr_core::inequality::overall;
use hjsr_core::set_radius::{DEFAULT_MAX_DEPTH, DEFAULT_MAX_PRODUCTS};
use hjsr_core::{
    chain_by_id, chain_catalog, discretize, evaluate_chain, radius_bracket_detailed, randomized_campaign, sampling,
    CampaignConfig, ChainInputs, ChainParams, ChainReport, EnumerationBudget, EvalOptions, KernelSpec, MatrixSet,
    Pruning, Verdict,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::input::{reproducer, Resolved};
use crate::report::{digest, BenchSection, KernelRow, KernelSection, ReportDocument, Residual, SetRecord};
use crate::{usage, BenchArgs, BudgetArgs, KernelArgs, RadiusArgs, VerifyArgs};

const KERNEL_CHAINS: [&str; 4] = ["C7", "C8", "C9", "C10"];
const KERNEL_GRIDS: [usize; 5] = [8, 16, 32, 64, 128];
const BENCH_DEPTH: usize = 10;

fn budget(args: &BudgetArgs, depth: Option<usize>, pruning: Option<Pruning>, default_depth: usize) -> EnumerationBudget {
    EnumerationBudget {
        max_depth: args.depth.or(depth).unwrap_or(default_depth),
        max_products: args.max_products.unwrap_or(DEFAULT_MAX_PRODUCTS),
        pruning: match args.prune {
            Some(delta) => Pruning::Gripenberg { delta },
            None => pruning.unwrap_or(Pruning::Off),
        },
    }
}

fn exit_code(v: Verdict) -> u8 {
    match v {
        Verdict::Consistent => 0,
        Verdict::Violation => 1,
        Verdict::InconclusiveBudget => 3,
    }
}

fn finish(report: &ReportDocument, out: Option<&Path>) -> Result<()> {
    if let Some(p) = out {
        report.write(p)?;
    }
    Ok(())
}

/// Resolves chain selectors against the catalog, keeping catalog order.
fn select_chains(sel: &[String], allowed: &[&str]) -> Result<Vec<String>> {
    if sel.iter().any(|s| s.eq_ignore_ascii_case("all")) {
        return Ok(allowed.iter().map(|s| s.to_string()).collect());
    }
    let mut ids = Vec::new();
    for s in sel {
        let spec = chain_by_id(s.trim()).ok_or_else(|| usage(format!("unknown chain '{s}'")))?;
        if !allowed.contains(&spec.id) {
            return Err(usage(format!("chain {} is not available here (allowed: {})", spec.id, allowed.join(","))));
        }
        ids.push(spec.id.to_string());
    }
    ids.sort_by_key(|id| allowed.iter().position(|a| a == id));
    ids.dedup();
    Ok(ids)
}

fn record(name: &str, set: &MatrixSet, b: &EnumerationBudget) -> Result<SetRecord> {
    let r = radius_bracket_detailed(set, b)?;
    Ok(SetRecord {
        name: name.into(),
        size: set.len(),
        dim: set.dim(),
        bracket: r.bracket,
        stats: r.stats,
    })
}

fn print_set_table(records: &[SetRecord]) {
    say!(
        "{:<24} {:>4} {:>4} {:>20} {:>20} {:>6} {:>6} {:>12} {:>10}",
        "set", "|S|", "dim", "lower", "upper", "d_lo", "d_up", "products", "pruned"
    );
    for r in records {
        say!(
            "{:<24} {:>4} {:>4} {:>20.15} {:>20.15} {:>6} {:>6} {:>12} {:>10}{}",
            r.name,
            r.size,
            r.dim,
            r.bracket.lower,
            r.bracket.upper,
            r.bracket.lower_depth,
            r.bracket.upper_depth,
            r.stats.products_evaluated,
            r.stats.pruned_prefixes,
            if r.bracket.truncated { "  (truncated)" } else { "" }
        );
    }
}

pub fn radius(args: &RadiusArgs, out: Option<&Path>) -> Result<u8> {
    let doc = Resolved::load(&args.input)?;
    let mut report = ReportDocument::new("radius", digest(&doc.bytes));
    let b = budget(&args.budget, None, None, DEFAULT_MAX_DEPTH);
    let all = doc.sets();
    let chosen: Vec<(&str, MatrixSet)> = if args.sets.is_empty() {
        all.into_iter().filter(|(n, _)| matches!(doc.get(n), Ok(crate::input::Item::Set(_)))).collect()
    } else {
        args.sets
            .iter()
            .map(|name| {
                all.iter()
                    .find(|(n, _)| n == name)
                    .cloned()
                    .ok_or_else(|| usage(format!("no matrix or matrix_set entry named '{name}'")))
            })
            .collect::<Result<_>>()?
    };
    if chosen.is_empty() {
        return Err(usage("input has no matrix_set entries"));
    }
    let records = report.timed("enumerate", || {
        chosen.iter().map(|(n, s)| record(n, s, &b)).collect::<Result<Vec<_>>>()
    })?;
    print_set_table(&records);
    report.sets = records;
    finish(&report, out)?;
    Ok(0)
}

fn print_violation(r: &ChainReport, params: &ChainParams) {
    say!("{}", r.render());
    let Some(inputs) = &r.counterexample else { return };
    let trial = r.trial.map_or(String::new(), |t| format!(" (seed {}, trial {t})", r.seed.unwrap_or(0)));
    say!("certified counterexample for {}{trial}:", r.id);
    match reproducer(&r.id, inputs, params) {
        Some(doc) => say!("{}", serde_json::to_string_pretty(&doc).expect("documents serialize")),
        None => say!("{}", serde_json::to_string_pretty(inputs).expect("inputs serialize")),
    }
}

fn params_of(r: &ChainReport) -> ChainParams {
    let d = ChainParams::default();
    ChainParams {
        alpha: r.params.alpha.unwrap_or(d.alpha),
        k: r.params.k.unwrap_or(d.k),
        weights: r.params.weights.clone(),
    }
}

fn print_summary(reports: &[ChainReport]) {
    let ids: Vec<&str> = chain_catalog().iter().map(|c| c.id).collect();
    say!("{:<6} {:>7} {:>11} {:>10} {:>13}", "chain", "cases", "consistent", "violation", "inconclusive");
    for id in ids {
        let rs: Vec<&ChainReport> = reports.iter().filter(|r| r.id == id).collect();
        if rs.is_empty() {
            continue;
        }
        let count = |v: Verdict| rs.iter().filter(|r| r.verdict == v).count();
        say!(
            "{:<6} {:>7} {:>11} {:>10} {:>13}",
            id,
            rs.len(),
            count(Verdict::Consistent),
            count(Verdict::Violation),
            count(Verdict::InconclusiveBudget)
        );
    }
}

pub fn verify(args: &VerifyArgs, out: Option<&Path>) -> Result<u8> {
    let all: Vec<&str> = chain_catalog().iter().map(|c| c.id).collect();
    let selected = args.chains.as_deref().map(|s| select_chains(s, &all)).transpose()?;
    let doc = args.input.as_deref().map(Resolved::load).transpose()?;
    let block = doc.as_ref().and_then(|d| d.doc.campaign.clone());
    let tol = args.tol.or(block.as_ref().and_then(|b| b.tol)).unwrap_or(hjsr_core::inequality::DEFAULT_TOL);
    let opts = EvalOptions {
        budget: budget(
            &args.budget,
            block.as_ref().and_then(|b| b.depth),
            block.as_ref().and_then(|b| b.pruning),
            DEFAULT_MAX_DEPTH,
        ),
        tol,
        exact_small: true,
    };

    let campaign = match (&args.random, &block) {
        (Some(v), _) => Some(CampaignConfig::new(v[0], v[1] as usize)),
        (None, Some(b)) => Some(CampaignConfig::new(b.seed, b.trials)),
        (None, None) => None,
    }
    .map(|mut cfg| -> Result<CampaignConfig> {
        if let Some(b) = &block {
            cfg.dims = b.dims.unwrap_or(cfg.dims);
            cfg.set_sizes = b.set_sizes.unwrap_or(cfg.set_sizes);
            if let Some(c) = &b.chains {
                cfg.chains = select_chains(c, &all)?;
            }
        }
        cfg.dims = args.dims.unwrap_or(cfg.dims);
        cfg.set_sizes = args.sizes.unwrap_or(cfg.set_sizes);
        if let Some(s) = &selected {
            cfg.chains = s.clone();
        }
        cfg.options = opts;
        Ok(cfg)
    })
    .transpose()?;

    if doc.is_none() && campaign.is_none() {
        return Err(usage("verify needs --input or --random SEED TRIALS"));
    }
    let input_digest = match (&doc, &campaign) {
        (Some(d), _) => digest(&d.bytes),
        (None, Some(cfg)) => digest(serde_json::to_string(cfg)?.as_bytes()),
        (None, None) => unreachable!(),
    };
    let mut report = ReportDocument::new("verify", input_digest);

    let mut cases: Vec<(ChainReport, ChainParams)> = Vec::new();
    if let Some(d) = &doc {
        let checks = report.timed("checks", || -> Result<Vec<_>> {
            let mut v = Vec::new();
            for c in &d.doc.checks {
                let (spec, inputs, params) = d.check_inputs(c)?;
                if selected.as_ref().is_some_and(|s| !s.iter().any(|id| id == spec.id)) {
                    continue;
                }
                let r = evaluate_chain(spec, &inputs, &params, &opts).map_err(|e| usage(format!("{}: {e}", spec.id)))?;
                say!("{}", r.render());
                v.push((r, params));
            }
            Ok(v)
        })?;
        cases.extend(checks);
    }
    if let Some(cfg) = &campaign {
        let reports = report.timed("campaign", || randomized_campaign(cfg))?;
        cases.extend(reports.into_iter().map(|r| {
            let p = params_of(&r);
            (r, p)
        }));
    }
    if cases.is_empty() {
        return Err(usage("nothing to verify: no checks matched the chain selection"));
    }
    for (r, p) in &cases {
        if r.verdict == Verdict::Violation {
            print_violation(r, p);
        }
    }
    report.chains = cases.into_iter().map(|(r, _)| r).collect();
    print_summary(&report.chains);
    let verdict = overall(report.chains.iter().map(|r| r.verdict));
    say!("overall: {verdict:?}");
    finish(&report, out)?;
    Ok(exit_code(verdict))
}

fn term_values(r: &ChainReport) -> Vec<f64> {
    r.terms
        .iter()
        .map(|t| match (t.lower, t.upper) {
            (Some(l), Some(u)) => 0.5 * (l + u),
            _ => f64::NAN,
        })
        .collect()
}

pub fn kernel(args: &KernelArgs, out: Option<&Path>) -> Result<u8> {
    let chains = select_chains(args.chains.as_deref().unwrap_or(&["all".to_string()]), &KERNEL_CHAINS)?;
    for g in &args.grids {
        if !KERNEL_GRIDS.contains(g) {
            return Err(usage(format!("grid {g} not in {KERNEL_GRIDS:?}")));
        }
    }
    let mut grids = args.grids.clone();
    grids.sort_unstable();
    grids.dedup();
    let (available, input_digest): (Vec<(String, KernelSpec)>, String) = match &args.input {
        Some(p) => {
            let d = Resolved::load(p)?;
            (d.kernels(), digest(&d.bytes))
        }
        None => {
            let cat = KernelSpec::catalog();
            let dg = digest(serde_json::to_string(&cat)?.as_bytes());
            (cat, dg)
        }
    };
    let kernels: Vec<(String, KernelSpec)> = match &args.kernels {
        None => available,
        Some(names) => names
            .iter()
            .map(|n| {
                available
                    .iter()
                    .find(|(k, _)| k == n)
                    .cloned()
                    .ok_or_else(|| usage(format!("no kernel named '{n}'")))
            })
            .collect::<Result<_>>()?,
    };
    if kernels.is_empty() {
        return Err(usage("no kernels to check"));
    }
    // Each kernel with itself and with its successor.
    let mut pairs = Vec::new();
    for i in 0..kernels.len() {
        pairs.push((i, i));
        let j = (i + 1) % kernels.len();
        if j != i && !pairs.contains(&(j, i)) {
            pairs.push((i, j));
        }
    }
    let opts = EvalOptions {
        tol: args.tol.unwrap_or(hjsr_core::inequality::DEFAULT_TOL),
        ..Default::default()
    };
    let mut report = ReportDocument::new("kernel", input_digest);
    let mut rows = Vec::new();
    let mut chain_reports = Vec::new();
    report.timed("evaluate", || -> Result<()> {
        for &n in &grids {
            let models = kernels
                .iter()
                .map(|(name, k)| discretize(k, n).map_err(|e| usage(format!("kernel '{name}': {e}"))))
                .collect::<Result<Vec<_>>>()?;
            for id in &chains {
                let spec = chain_by_id(id).expect("selected from catalog");
                for &(i, j) in &pairs {
                    let inputs = ChainInputs::Kernels(vec![models[i].clone(), models[j].clone()]);
                    let r = evaluate_chain(spec, &inputs, &ChainParams::default(), &opts)?;
                    rows.push(KernelRow {
                        chain: id.clone(),
                        left: kernels[i].0.clone(),
                        right: kernels[j].0.clone(),
                        grid: n,
                        verdict: r.verdict,
                        values: term_values(&r),
                    });
                    chain_reports.push(r);
                }
            }
        }
        Ok(())
    })?;
    report.chains = chain_reports;

    let same_case = |a: &KernelRow, b: &KernelRow| a.chain == b.chain && a.left == b.left && a.right == b.right;
    let mut residuals = Vec::new();
    let mut flips = Vec::new();
    for r in rows.iter().filter(|r| r.grid == grids[0]) {
        let series: Vec<&KernelRow> = rows.iter().filter(|x| same_case(x, r)).collect();
        if series.iter().any(|x| x.verdict != r.verdict) {
            flips.push((r.chain.clone(), r.left.clone(), r.right.clone()));
        }
        for a in &series {
            let Some(b) = series.iter().find(|b| b.grid == 2 * a.grid) else { continue };
            for (term, (&va, &vb)) in a.values.iter().zip(&b.values).enumerate() {
                residuals.push(Residual {
                    chain: r.chain.clone(),
                    left: r.left.clone(),
                    right: r.right.clone(),
                    term,
                    n: a.grid,
                    value_n: va,
                    value_2n: vb,
                    residual: (vb - va).abs(),
                });
            }
        }
    }

    say!("{:<5} {:<20} {:<20} {}", "chain", "left", "right", grids.iter().map(|g| format!("{g:>12}")).collect::<String>());
    for r in rows.iter().filter(|r| r.grid == grids[0]) {
        let verdicts: String = rows
            .iter()
            .filter(|x| same_case(x, r))
            .map(|x| format!("{:>12}", format!("{:?}", x.verdict)))
            .collect();
        say!("{:<5} {:<20} {:<20} {verdicts}", r.chain, r.left, r.right);
    }
    if let Some(p) = &args.csv {
        let mut w = csv::Writer::from_path(p)?;
        for r in &residuals {
            w.serialize(r)?;
        }
        w.flush()?;
    }
    if !flips.is_empty() {
        say!("verdict flips across grids: {flips:?}");
    }
    let verdict = overall(rows.iter().map(|r| r.verdict));
    for r in report.chains.iter().filter(|r| r.verdict == Verdict::Violation) {
        say!("{}", r.render());
    }
    say!("overall: {verdict:?}");
    report.kernel = Some(KernelSection {
        grids,
        rows,
        residuals,
        flips,
    });
    finish(&report, out)?;
    Ok(exit_code(verdict))
}

pub fn bench(args: &BenchArgs, out: Option<&Path>) -> Result<u8> {
    let (name, set, input_digest) = match (&args.input, &args.set) {
        (Some(p), Some(name)) => {
            let d = Resolved::load(p)?;
            let set = d
                .sets()
                .into_iter()
                .find(|(n, _)| n == name)
                .map(|(_, s)| s)
                .ok_or_else(|| usage(format!("no matrix or matrix_set entry named '{name}'")))?;
            (name.clone(), set, digest(&d.bytes))
        }
        (Some(_), None) => return Err(usage("--input needs --set")),
        (None, _) => {
            if args.size == 0 || args.dim == 0 {
                return Err(usage("--size and --dim must be at least 1"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
            let set = sampling::random_set(&mut rng, args.dim, args.size);
            let key = format!("bench seed={} size={} dim={}", args.seed, args.size, args.dim);
            (format!("random({})", args.seed), set, digest(key.as_bytes()))
        }
    };
    let base = EnumerationBudget {
        pruning: Pruning::Off,
        ..budget(&args.budget, None, None, BENCH_DEPTH)
    };
    let delta = args.budget.prune.flatten();
    let mut report = ReportDocument::new("bench", input_digest);
    let exhaustive = report.timed("exhaustive", || record(&name, &set, &base))?;
    let pruned = report.timed("pruned", || record(&name, &set, &base.pruned(delta)))?;
    let d = pruned.stats.delta.unwrap_or(0.0);
    let slack = 1e-12 * exhaustive.bracket.upper.max(f64::MIN_POSITIVE);
    let delta_equal = (pruned.bracket.upper - exhaustive.bracket.upper).abs() <= d + slack
        && (pruned.bracket.lower - exhaustive.bracket.lower).abs() <= d + slack;
    let ratio = pruned.stats.products_evaluated as f64 / exhaustive.stats.products_evaluated.max(1) as f64;
    let mut records = vec![exhaustive.clone(), pruned.clone()];
    records[0].name = format!("{name} exhaustive");
    records[1].name = format!("{name} pruned");
    print_set_table(&records);
    say!(
        "ratio {ratio:.4}  delta {d:.3e}  delta-equal {delta_equal}  time exhaustive {:.3}s pruned {:.3}s",
        report.timing["exhaustive"], report.timing["pruned"]
    );
    report.bench = Some(BenchSection {
        size: set.len(),
        dim: set.dim(),
        depth: base.max_depth,
        seed: args.seed,
        exhaustive,
        pruned,
        ratio,
        delta: d,
        delta_equal,
    });
    finish(&report, out)?;
    Ok(if delta_equal { 0 } else { 1 })
}
