use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde_json::{json, Value};

use mmc_core::capacity::{asymptotic_packet_length, CapacityModel};
use mmc_core::netsim::{capacity_sweep, estimate_rank_distribution, NetworkConfig, SweepAxis};
use mmc_core::oracle::{
    build_explicit_channel, entropy_bound_check, exact_capacity, example2_transfer_dist,
    randomize_channel, verify_lemma_counts, verify_rank_kernel, MatrixSpace, TransferDist,
    VerificationReport, DEFAULT_CAP,
};
use mmc_core::rank_channel::jafari_exact;
use mmc_core::{ChannelDims, Error, Field, FqMatrix, OptimizerConfig, RankDistribution, RankKernel};

use crate::args::*;
use crate::files::{json_bytes, Manifest, RankDistFile, RANK_DIST_SCHEMA, SWEEP_SCHEMA};
use crate::{Artifact, CliError, Outcome, Status};

pub fn execute(command: &Command) -> Result<Outcome, CliError> {
    match command {
        Command::Capacity(a) => capacity(a),
        Command::Simulate(a) => simulate(a),
        Command::Sweep(a) => sweep(a),
        Command::Oracle(OracleCommand::CapacityCompare(a)) => capacity_compare(a),
        Command::Oracle(OracleCommand::VerifyLemmas(a)) => verify_lemmas(a),
        Command::Oracle(OracleCommand::Randomize(a)) => randomize(a),
        Command::Oracle(OracleCommand::Example2(a)) => example2(a),
        Command::Replay(a) => replay(a),
    }
}

fn dims(a: &DimsArgs) -> Result<ChannelDims, CliError> {
    Field::new(u32::try_from(a.q).map_err(|_| CliError::Usage(format!("q = {} is too large", a.q)))?)?;
    Ok(ChannelDims::new(a.q, a.n, a.m, a.l)?)
}

enum DistSource {
    Silva,
    Jafari,
    Point(usize),
    File(PathBuf),
}

fn dist_source(words: &[String]) -> Result<DistSource, CliError> {
    match words {
        [k] if k == "silva" => Ok(DistSource::Silva),
        [k] if k == "jafari" => Ok(DistSource::Jafari),
        [k, r] if k == "point" => r
            .parse()
            .map(DistSource::Point)
            .map_err(|_| CliError::Usage(format!("point rank must be a nonnegative integer, got {r}"))),
        [k, p] if k == "file" => Ok(DistSource::File(PathBuf::from(p))),
        _ => Err(CliError::Usage(format!(
            "--dist expects silva, jafari, point <r> or file <path>, got '{}'",
            words.join(" ")
        ))),
    }
}

fn load_file(path: &Path, d: &ChannelDims) -> Result<RankDistFile, CliError> {
    let file = RankDistFile::load(path)?;
    if file.q != d.q() {
        return Err(CliError::Usage(format!(
            "{} holds a distribution for q = {}, not q = {}",
            path.display(),
            file.q,
            d.q()
        )));
    }
    Ok(file)
}

fn rank_distribution(words: &[String], d: &ChannelDims) -> Result<RankDistribution, CliError> {
    Ok(match dist_source(words)? {
        DistSource::Silva => RankDistribution::silva(d)?,
        DistSource::Jafari => RankDistribution::jafari(d),
        DistSource::Point(r) => {
            if r > d.max_rank() {
                return Err(CliError::Usage(format!(
                    "rank {r} exceeds min(n, m) = {}",
                    d.max_rank()
                )));
            }
            RankDistribution::point(r, d.max_rank())
        }
        DistSource::File(p) => load_file(&p, d)?.distribution()?,
    })
}

/// The same distribution with exact rational probabilities. Floats from files
/// are converted exactly and rescaled to sum to one.
fn exact_rank_distribution(words: &[String], d: &ChannelDims) -> Result<Vec<BigRational>, CliError> {
    let point = |r: usize| {
        let mut v = vec![BigRational::zero(); d.max_rank() + 1];
        v[r] = BigRational::one();
        v
    };
    Ok(match dist_source(words)? {
        DistSource::Silva => {
            RankDistribution::silva(d)?;
            point(d.n())
        }
        DistSource::Jafari => jafari_exact(d),
        DistSource::Point(r) => {
            if r > d.max_rank() {
                return Err(CliError::Usage(format!("rank {r} exceeds min(n, m) = {}", d.max_rank())));
            }
            point(r)
        }
        DistSource::File(p) => {
            let probs = load_file(&p, d)?.distribution()?.probs().to_vec();
            let exact: Vec<BigRational> = probs
                .iter()
                .map(|&x| BigRational::from_float(x).unwrap_or_else(BigRational::zero))
                .collect();
            let total: BigRational = exact.iter().sum();
            exact.into_iter().map(|x| x / &total).collect()
        }
    })
}

fn optimizer(tol: f64, max_iter: usize) -> Result<OptimizerConfig, CliError> {
    if !(tol > 0.0) {
        return Err(CliError::Usage(format!("--tol must be positive, got {tol}")));
    }
    Ok(OptimizerConfig { tol, max_iter })
}

fn report_outcome(report: Value, status: Status, output: &OutputArgs, seed: Option<u64>) -> Outcome {
    let artifacts = output
        .out
        .iter()
        .map(|p| Artifact {
            path: p.clone(),
            bytes: json_bytes(&report),
        })
        .collect();
    Outcome {
        report,
        artifacts,
        status,
        seed,
    }
}

fn capacity(a: &CapacityArgs) -> Result<Outcome, CliError> {
    let d = dims(&a.dims)?;
    let dist = rank_distribution(&a.dist, &d)?;
    let cfg = optimizer(a.tol, a.max_iter)?;
    let kernel = RankKernel::new(d, &dist)?;
    let (result, status) = match CapacityModel::new(&kernel).optimize(&cfg) {
        Ok(r) => (r, Status::Ok),
        Err(Error::NotConverged(best)) => (*best, Status::NotConverged),
        Err(e) => return Err(e.into()),
    };
    let scale = match a.units {
        Units::Qary => 1.0,
        Units::Bits => (d.q() as f64).log2(),
        Units::Packets => 1.0 / d.l() as f64,
    };
    let scaled = |v: &[f64]| v.iter().map(|x| x * scale).collect::<Vec<_>>();
    let report = json!({
        "schema": "mmc-capacity/1",
        "units": a.units,
        "dims": d,
        "rank_distribution": kernel.rank_distribution(),
        "capacity": result.capacity * scale,
        "optimal_pu": result.optimal_pu,
        "per_rank_capacity": scaled(&result.per_rank_capacity),
        "h": scaled(&result.h),
        "u_star": result.u_star,
        "lower_bound": result.lower_bound * scale,
        "upper_bound": result.upper_bound * scale,
        "iterations": result.iterations,
        "convergence_gap": result.convergence_gap * scale,
        "converged": result.converged,
        "packet_length_limit": asymptotic_packet_length(&d, kernel.rank_distribution()),
    });
    Ok(report_outcome(report, status, &a.output, None))
}

fn network_config(n: &NetworkArgs) -> NetworkConfig {
    NetworkConfig {
        q: n.q,
        layers: n.layers,
        relays: n.relays,
        repetitions: n.repetitions,
        erasure: n.eps,
        trials: n.trials,
        seed: n.seed,
    }
}

fn simulate(a: &SimulateArgs) -> Result<Outcome, CliError> {
    let config = network_config(&a.network);
    let est = estimate_rank_distribution(&config)?;
    let file = RankDistFile {
        schema: Some(RANK_DIST_SCHEMA.into()),
        q: config.q as u64,
        max_rank: est.max_rank(),
        probs: est.frequencies(),
        meta: json!({
            "source": "simulate",
            "network": config,
            "counts": est.counts,
            "trials": est.trials,
            "standard_errors": est.standard_errors(),
        }),
    };
    let report = json!({
        "schema": "mmc-simulate/1",
        "out": a.out,
        "counts": est.counts,
        "probs": file.probs,
        "mean_rank": est.mean(),
        "mean_rank_se": est.mean_standard_error(),
    });
    Ok(Outcome {
        report,
        artifacts: vec![Artifact {
            path: a.out.clone(),
            bytes: json_bytes(&file),
        }],
        status: Status::Ok,
        seed: Some(config.seed),
    })
}

fn sweep(a: &SweepArgs) -> Result<Outcome, CliError> {
    let base = network_config(&a.network);
    let axis = match a.vary {
        SweepVar::Eps => SweepAxis::Erasure(
            a.values
                .iter()
                .map(|v| v.trim().parse::<f64>().map_err(|_| CliError::Usage(format!("bad erasure probability '{v}'"))))
                .collect::<Result<_, _>>()?,
        ),
        SweepVar::Layers => SweepAxis::Layers(
            a.values
                .iter()
                .map(|v| v.trim().parse::<usize>().map_err(|_| CliError::Usage(format!("bad layer count '{v}'"))))
                .collect::<Result<_, _>>()?,
        ),
    };
    let rows = capacity_sweep(&base, &axis, a.l, &optimizer(a.tol, a.max_iter)?)?;

    let max_rank = base.width();
    let mut csv = String::new();
    writeln!(csv, "# {SWEEP_SCHEMA} vary={} l={}", axis.name(), a.l).unwrap();
    let mut header = vec!["sweep_var".to_string()];
    header.extend((0..=max_rank).map(|r| format!("p_hat_{r}")));
    header.extend(
        [
            "ugr_capacity",
            "capacity_se",
            "constant_rank_capacity",
            "u_star",
            "coherent_upper_bound",
            "asymptotic_packet",
            "seed",
        ]
        .map(String::from),
    );
    writeln!(csv, "{}", header.join(",")).unwrap();
    for row in &rows {
        let mut fields = vec![row.value.to_string()];
        fields.extend(row.ranks.frequencies().iter().map(|p| p.to_string()));
        let c = &row.capacity;
        fields.push(c.capacity.to_string());
        fields.push(row.capacity_se.to_string());
        fields.push(c.per_rank_capacity[c.u_star].to_string());
        fields.push(c.u_star.to_string());
        fields.push(row.coherent_upper_bound.to_string());
        fields.push(row.asymptotic_packet.to_string());
        fields.push(row.config.seed.to_string());
        writeln!(csv, "{}", fields.join(",")).unwrap();
    }
    let report = json!({
        "schema": "mmc-sweep-summary/1",
        "out": a.out,
        "vary": axis.name(),
        "rows": rows.len(),
        "ugr_capacity": rows.iter().map(|r| r.capacity.capacity).collect::<Vec<_>>(),
    });
    Ok(Outcome {
        report,
        artifacts: vec![Artifact {
            path: a.out.clone(),
            bytes: csv.into_bytes(),
        }],
        status: Status::Ok,
        seed: Some(base.seed),
    })
}

fn oracle_status(pass: bool) -> Status {
    if pass {
        Status::Ok
    } else {
        Status::Mismatch
    }
}

fn capacity_compare(a: &CompareArgs) -> Result<Outcome, CliError> {
    let d = dims(&a.dims)?;
    let exact_dist = exact_rank_distribution(&a.dist, &d)?;
    let field = Field::new(d.q() as u32)?;
    let transfer = TransferDist::ugr(MatrixSpace::new(field, d.m(), d.n(), a.cap)?, &exact_dist)?;
    let channel = build_explicit_channel(d, transfer, a.cap)?;
    let exact = exact_capacity(&channel, a.tol, a.max_iter)?;
    let kernel = RankKernel::new(d, &RankDistribution::from_exact(&exact_dist)?)?;
    let ugr = CapacityModel::new(&kernel).optimize(&optimizer(a.tol, a.max_iter)?)?;
    let difference = exact.capacity - ugr.capacity;
    let pass = difference.abs() < 1e-5;
    let report = json!({
        "schema": "mmc-oracle/1",
        "check": "capacity-compare",
        "dims": d,
        "rank_distribution": exact_dist.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
        "inputs": channel.inputs().size(),
        "exact_capacity": exact.capacity,
        "exact_iterations": exact.iterations,
        "exact_gap": exact.gap,
        "ugr_capacity": ugr.capacity,
        "difference": difference,
        "tolerance": 1e-5,
        "pass": pass,
    });
    Ok(report_outcome(report, oracle_status(pass), &a.output, None))
}

fn summarize(report: &VerificationReport) -> Value {
    let mut by_name: std::collections::BTreeMap<&str, (usize, usize)> = Default::default();
    for c in &report.checks {
        let e = by_name.entry(c.name.as_str()).or_default();
        e.0 += 1;
        e.1 += usize::from(c.pass);
    }
    by_name
        .into_iter()
        .map(|(k, (total, passed))| (k.to_string(), json!({ "checks": total, "passed": passed })))
        .collect::<serde_json::Map<_, _>>()
        .into()
}

fn verify_lemmas(a: &LemmaArgs) -> Result<Outcome, CliError> {
    let mut report = verify_lemma_counts(a.q, a.max_dim, a.max_len, a.cap)?;
    for n in 1..=a.max_dim {
        for m in 1..=a.max_dim {
            report
                .checks
                .extend(verify_rank_kernel(a.q, n, m, n.max(m), a.cap)?.checks);
        }
    }
    let pass = report.all_pass();
    let out = json!({
        "schema": "mmc-oracle/1",
        "check": "verify-lemmas",
        "q": a.q,
        "max_dim": a.max_dim,
        "max_len": a.max_len,
        "summary": summarize(&report),
        "failures": report.failures().collect::<Vec<_>>(),
        "checks": report.checks,
        "pass": pass,
    });
    Ok(report_outcome(out, oracle_status(pass), &a.output, None))
}

fn parse_fraction(s: &str) -> Result<BigRational, CliError> {
    let eps: BigRational = s
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("expected a fraction like 1/4, got '{s}'")))?;
    if eps < BigRational::zero() || eps > BigRational::one() {
        return Err(CliError::Usage(format!("erasure probability {eps} outside [0, 1]")));
    }
    Ok(eps)
}

fn parse_matrix(s: &str, q: u32) -> Result<FqMatrix, CliError> {
    let field = Field::new(q)?;
    let rows: Vec<Vec<u32>> = s
        .split(';')
        .map(|row| {
            row.split(',')
                .map(|e| e.trim().parse::<u32>().map_err(|_| CliError::Usage(format!("bad matrix entry '{e}'"))))
                .collect()
        })
        .collect::<Result<_, _>>()?;
    Ok(FqMatrix::from_rows(field, &rows)?)
}

fn strings(v: &[BigRational]) -> Vec<String> {
    v.iter().map(|p| p.to_string()).collect()
}

fn randomize(a: &RandomizeArgs) -> Result<Outcome, CliError> {
    let input = match (&a.eps, &a.matrix) {
        (Some(e), None) => example2_transfer_dist(&parse_fraction(e)?)?,
        (None, Some(m)) => TransferDist::point(&parse_matrix(m, a.q)?)?,
        _ => return Err(CliError::Usage("give exactly one of --eps or --matrix".into())),
    };
    let output = randomize_channel(&input, a.gl_cap)?;
    let marginal_kept = output.rank_marginal() == input.rank_marginal();
    let ugr = output.is_ugr();
    let pass = marginal_kept && ugr;
    let report = json!({
        "schema": "mmc-oracle/1",
        "check": "randomize",
        "input": strings(input.probs()),
        "output": strings(output.probs()),
        "rank_marginal": strings(&input.rank_marginal()),
        "output_is_ugr": ugr,
        "rank_marginal_unchanged": marginal_kept,
        "pass": pass,
    });
    Ok(report_outcome(report, oracle_status(pass), &a.output, None))
}

fn example2(a: &Example2Args) -> Result<Outcome, CliError> {
    let eps = parse_fraction(&a.eps)?;
    let d = ChannelDims::new(2, 2, 2, a.l)?;
    let truth = example2_transfer_dist(&eps)?;
    let ugr_transfer = randomize_channel(&truth, mmc_core::oracle::DEFAULT_GL_CAP)?;
    let exact = exact_capacity(&build_explicit_channel(d, truth.clone(), DEFAULT_CAP)?, a.tol, a.max_iter)?;
    let randomized = exact_capacity(&build_explicit_channel(d, ugr_transfer.clone(), DEFAULT_CAP)?, a.tol, a.max_iter)?;
    let dist = RankDistribution::from_exact(&truth.rank_marginal())?;
    let kernel = RankKernel::new(d, &dist)?;
    let ugr = CapacityModel::new(&kernel).optimize(&optimizer(a.tol, a.max_iter)?)?;
    let gap = exact.capacity - ugr.capacity;

    let mut checks = vec![
        json!({ "name": "exact capacity at least the u.g.r. capacity", "value": gap, "pass": gap >= -1e-9 }),
        json!({
            "name": "randomized channel attains the u.g.r. capacity",
            "value": randomized.capacity - ugr.capacity,
            "pass": (randomized.capacity - ugr.capacity).abs() < 1e-5,
        }),
    ];
    if eps.is_zero() {
        checks.push(json!({ "name": "u.g.r. bound tight without erasures", "value": gap, "pass": gap.abs() < 1e-5 }));
    }
    let pass = checks.iter().all(|c| c["pass"] == json!(true));
    let report = json!({
        "schema": "mmc-oracle/1",
        "check": "example2",
        "eps": eps.to_string(),
        "l": a.l,
        "transfer_true": strings(truth.probs()),
        "transfer_ugr": strings(ugr_transfer.probs()),
        "rank_marginal": strings(&truth.rank_marginal()),
        "exact_capacity": exact.capacity,
        "exact_iterations": exact.iterations,
        "exact_gap": exact.gap,
        "ugr_capacity": ugr.capacity,
        "coherent_upper_bound": a.l as f64 * dist.mean(),
        "gap": gap,
        "entropy": entropy_bound_check(&truth),
        "checks": checks,
        "pass": pass,
    });
    Ok(report_outcome(report, oracle_status(pass), &a.output, None))
}

fn replay(a: &ReplayArgs) -> Result<Outcome, CliError> {
    let manifest = Manifest::load(&a.manifest)?;
    let cli = crate::parse(&manifest.argv)?;
    if matches!(cli.command, Command::Replay(_)) {
        return Err(CliError::Usage("a manifest cannot record a replay".into()));
    }
    let regenerated = execute(&cli.command)?.digests();
    let mut outputs = Vec::new();
    let mut pass = regenerated.len() == manifest.outputs.len();
    for (recorded, actual) in manifest.outputs.iter().zip(&regenerated) {
        let same = actual == recorded;
        pass &= same;
        outputs.push(json!({
            "path": recorded.path,
            "expected": recorded.sha256,
            "actual": actual.sha256,
            "match": same,
        }));
    }
    let report = json!({
        "schema": "mmc-replay/1",
        "manifest": a.manifest,
        "command": manifest.command,
        "outputs": outputs,
        "pass": pass,
    });
    Ok(Outcome {
        report,
        artifacts: Vec::new(),
        status: oracle_status(pass),
        seed: manifest.seed,
    })
}
