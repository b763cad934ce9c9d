//! `bdw` - spectra, observables and stochastic dynamics of the domain-wall
//! XXZ chain and its exclusion process, at desk scale.
//!
//! Exit codes: 0 success, 1 verification failure, 2 configuration error.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use bdw_core::algebra::{reindex, StateVector};
use bdw_core::chain::{self, Truncation};
use bdw_core::scalar::{parse_rat, Rat, Scalar, C64};
use bdw_core::verify::{self, Suite, VerifyConfig};
use bdw_core::{asep, bethe, observables, uqsl2};

#[derive(Parser)]
#[command(
    name = "bdw",
    version,
    about = "Bethe spectra and exclusion-process dynamics on the domain-wall XXZ chain"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args, Clone)]
struct ConfigArgs {
    /// Deformation parameter, 0 < q < 1 (decimal or a/b rational)
    #[arg(long, global = true, default_value = "0.5", env = "BDW_Q")]
    q: String,

    /// Overall rate scale A > 0
    #[arg(long = "A", global = true, default_value_t = 1.0, env = "BDW_A")]
    a: f64,

    /// Chain length (even, >= 2)
    #[arg(long = "N", global = true, default_value_t = 6, env = "BDW_N")]
    n: u32,

    /// Magnon count where a command needs one
    #[arg(long, global = true, env = "BDW_M")]
    m: Option<u32>,

    /// Lowering power / half-filling where a command needs one
    #[arg(long, global = true, env = "BDW_P")]
    p: Option<u32>,

    /// Partition-space weight cutoff
    #[arg(long, global = true, default_value_t = 24, env = "BDW_CUTOFF_WEIGHT")]
    cutoff_weight: u64,

    /// Largest part allowed (defaults to the weight cutoff)
    #[arg(long, global = true, env = "BDW_CUTOFF_PART")]
    cutoff_part: Option<u32>,

    /// Largest number of parts allowed (defaults to the weight cutoff)
    #[arg(long, global = true, env = "BDW_CUTOFF_LEN")]
    cutoff_len: Option<u32>,

    /// Series truncation index for infinite products
    #[arg(long = "K", global = true, default_value_t = 200, env = "BDW_K")]
    k: usize,

    /// Master random seed
    #[arg(long, global = true, default_value_t = 7, env = "BDW_SEED")]
    seed: u64,

    /// Number of trajectories to sample
    #[arg(long, global = true, default_value_t = 1, env = "BDW_SAMPLES")]
    samples: u32,

    /// Time horizon for dynamics
    #[arg(long, global = true, default_value_t = 10.0, env = "BDW_T")]
    t: f64,

    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv, env = "BDW_FORMAT")]
    format: Format,

    /// Write output to a file instead of stdout
    #[arg(long, global = true, env = "BDW_OUT")]
    out: Option<PathBuf>,

    /// Dense-solver dimension budget
    #[arg(long, global = true, default_value_t = 4096, env = "BDW_DENSE_LIMIT")]
    dense_limit: usize,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    /// Comma-separated rows with a header line
    Csv,
    /// One JSON object per line
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Run a named invariant suite and report per-check residuals
    Verify {
        /// One of: qseries, partitions, chain, uqsl2, bethe, asep,
        /// observables, all
        #[arg(long, default_value = "all")]
        suite: String,
        /// Corrupt one rate-matrix entry so the asep suite must fail
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
    /// Bethe-root spectrum table for m = 0, 1 with dense reconciliation.
    /// Columns: m, p, root_re, root_im, energy, residual
    Spectrum,
    /// Half-filled magnetization profile. Columns: site, magnetization
    Profile,
    /// Scaling-limit profile and limit shape. Columns: u, magnetization, mu
    Shape {
        #[arg(long, default_value_t = -6.0, allow_negative_numbers = true)]
        u_min: f64,
        #[arg(long, default_value_t = 6.0, allow_negative_numbers = true)]
        u_max: f64,
        #[arg(long, default_value_t = 0.1)]
        u_step: f64,
    },
    /// Displacement probability table. Columns: l, d, p_finite, p_infinite
    /// (plus oracle_exact when the box is small enough to enumerate)
    Prob {
        #[arg(long, default_value_t = 3)]
        l_max: u32,
        #[arg(long, default_value_t = 4)]
        d_max: u32,
    },
    /// Sample exclusion-process trajectories (one event per row).
    /// Columns: sample, t, move, row, weight
    Simulate,
    /// Evolve the point mass at the empty partition to time t.
    /// Columns: weight, partition, probability
    Evolve,
}

struct Config {
    qf: f64,
    q_exact: Option<Rat>,
    args: ConfigArgs,
}

impl Config {
    fn from(args: ConfigArgs) -> anyhow::Result<Config> {
        let q_exact = parse_rat(&args.q);
        let qf = match &q_exact {
            Some(r) => r
                .as_unit_interval_real()
                .ok_or_else(|| anyhow!("q must lie strictly between 0 and 1, got {}", args.q))?,
            None => args
                .q
                .parse::<f64>()
                .with_context(|| format!("cannot parse q = {:?}", args.q))?,
        };
        if !(qf > 0.0 && qf < 1.0) {
            return Err(anyhow!("q must lie strictly between 0 and 1, got {qf}"));
        }
        if args.a <= 0.0 {
            return Err(anyhow!("A must be positive, got {}", args.a));
        }
        if args.n < 2 || args.n % 2 == 1 {
            return Err(anyhow!("N must be even and at least 2, got {}", args.n));
        }
        if args.cutoff_weight == 0 {
            return Err(anyhow!("cutoff weight must be positive"));
        }
        if args.k == 0 {
            return Err(anyhow!("K must be positive"));
        }
        if args.t < 0.0 {
            return Err(anyhow!("t must be nonnegative"));
        }
        Ok(Config { qf, q_exact, args })
    }

    fn qc(&self) -> C64 {
        C64::new(self.qf, 0.0)
    }

    fn truncation(&self) -> Truncation {
        Truncation {
            max_weight: self.args.cutoff_weight,
            max_part: self.args.cutoff_part.unwrap_or(self.args.cutoff_weight as u32),
            max_len: self.args.cutoff_len.unwrap_or(self.args.cutoff_weight as u32),
        }
    }

    fn writer(&self) -> anyhow::Result<Box<dyn Write>> {
        match &self.args.out {
            Some(path) => {
                let file = std::fs::File::create(path)
                    .with_context(|| format!("cannot create {}", path.display()))?;
                Ok(Box::new(std::io::BufWriter::new(file)))
            }
            None => Ok(Box::new(std::io::stdout().lock())),
        }
    }
}

/// One output row as (column, value) pairs, shared by the CSV and JSON-lines
/// emitters.
struct Table<'w> {
    out: &'w mut dyn Write,
    format: Format,
    header: Vec<&'static str>,
    wrote_header: bool,
}

impl<'w> Table<'w> {
    fn new(out: &'w mut dyn Write, format: Format, header: Vec<&'static str>) -> Self {
        Table { out, format, header, wrote_header: false }
    }

    fn row(&mut self, values: &[serde_json::Value]) -> anyhow::Result<()> {
        assert_eq!(values.len(), self.header.len());
        match self.format {
            Format::Csv => {
                if !self.wrote_header {
                    writeln!(self.out, "{}", self.header.join(","))?;
                    self.wrote_header = true;
                }
                let cells: Vec<String> = values
                    .iter()
                    .map(|v| match v {
                        serde_json::Value::String(s) => {
                            if s.contains(',') {
                                format!("\"{s}\"")
                            } else {
                                s.clone()
                            }
                        }
                        other => other.to_string(),
                    })
                    .collect();
                writeln!(self.out, "{}", cells.join(","))?;
            }
            Format::Json => {
                let obj: serde_json::Map<String, serde_json::Value> = self
                    .header
                    .iter()
                    .zip(values)
                    .map(|(k, v)| (k.to_string(), v.clone()))
                    .collect();
                writeln!(self.out, "{}", serde_json::Value::Object(obj))?;
            }
        }
        Ok(())
    }
}

fn jnum(x: f64) -> serde_json::Value {
    serde_json::Number::from_f64(x)
        .map(serde_json::Value::Number)
        .unwrap_or(serde_json::Value::Null)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match Config::from(cli.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("configuration error: {e:#}");
            return ExitCode::from(2);
        }
    };
    match run(cli.command, &config) {
        Ok(code) => code,
        Err(e) => {
            if e.downcast_ref::<std::io::Error>()
                .is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe)
            {
                return ExitCode::SUCCESS;
            }
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command, config: &Config) -> anyhow::Result<ExitCode> {
    match command {
        Command::Verify { suite, inject_fault } => cmd_verify(config, &suite, inject_fault),
        Command::Spectrum => cmd_spectrum(config),
        Command::Profile => cmd_profile(config),
        Command::Shape { u_min, u_max, u_step } => cmd_shape(config, u_min, u_max, u_step),
        Command::Prob { l_max, d_max } => cmd_prob(config, l_max, d_max),
        Command::Simulate => cmd_simulate(config),
        Command::Evolve => cmd_evolve(config),
    }
}

fn cmd_verify(config: &Config, suite: &str, inject_fault: bool) -> anyhow::Result<ExitCode> {
    let Some(suite) = Suite::parse(suite) else {
        eprintln!("configuration error: unknown suite {suite:?}");
        return Ok(ExitCode::from(2));
    };
    let q_exact = config
        .q_exact
        .clone()
        .ok_or_else(|| anyhow!("exact suites need a rational q (decimal or a/b), got {}", config.args.q))?;
    let cfg = VerifyConfig {
        q: config.qf,
        q_exact,
        a: config.args.a,
        n: config.args.n,
        trunc: config.truncation(),
        series_k: config.args.k,
        seed: config.args.seed,
        dense_limit: config.args.dense_limit,
        inject_fault,
    };
    let report = verify::run_suite(suite, &cfg)?;
    let mut out = config.writer()?;
    match config.args.format {
        Format::Json => {
            writeln!(out, "{}", serde_json::to_string(&report)?)?;
        }
        Format::Csv => {
            for check in &report.checks {
                writeln!(
                    out,
                    "{},{},{:.3e},{:.3e},{}",
                    if check.passed { "PASS" } else { "FAIL" },
                    check.name,
                    check.residual,
                    check.tolerance,
                    check.detail.replace(',', ";")
                )?;
            }
            writeln!(
                out,
                "{},{} checks,{} ms",
                if report.passed { "PASS" } else { "FAIL" },
                report.checks.len(),
                report.elapsed_ms
            )?;
        }
    }
    Ok(if report.passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_spectrum(config: &Config) -> anyhow::Result<ExitCode> {
    let n = config.args.n;
    if n > 10 {
        eprintln!("configuration error: spectrum needs N <= 10, got {n}");
        return Ok(ExitCode::from(2));
    }
    let qc = config.qc();
    let delta = (config.qf + 1.0 / config.qf) / 2.0;
    let gens = uqsl2::build_generators(n, &qc, config.args.dense_limit)?;
    let full = chain::spin_full_basis(n, config.args.dense_limit)?;
    let h = chain::invariant_hamiltonian(&full, &qc);

    let mut out = config.writer()?;
    let mut table = Table::new(
        &mut out,
        config.args.format,
        vec!["m", "p", "root_re", "root_im", "energy", "residual"],
    );

    let mut labeled: Vec<f64> = Vec::new();

    // vacuum tower
    let mut vac = StateVector::zero(gens.basis().clone());
    vac.set(0, C64::new(1.0, 0.0));
    for p in 0..=n {
        let d = uqsl2::descendant(&gens, &vac, p)?;
        let res = chain::eigen_residual(&h, &d, &C64::new(0.0, 0.0));
        labeled.push(0.0);
        table.row(&[
            0.into(),
            p.into(),
            serde_json::Value::Null,
            serde_json::Value::Null,
            jnum(0.0),
            jnum(res),
        ])?;
    }

    // one-magnon towers
    let sector = chain::spin_sector_basis(n, 1);
    for roots in bethe::solve_bethe_m1(n) {
        let v = bethe::build_bethe_vector(&sector, &roots, qc)?;
        let in_full = reindex(&v, gens.basis())?;
        let energy = roots.energy(delta).re;
        for p in 0..=(n - 2) {
            let d = uqsl2::descendant(&gens, &in_full, p)?;
            let res = chain::eigen_residual(&h, &d, &C64::new(energy, 0.0));
            labeled.push(energy);
            table.row(&[
                1.into(),
                p.into(),
                jnum(roots.z[0].re),
                jnum(roots.z[0].im),
                jnum(energy),
                jnum(res),
            ])?;
        }
    }

    // reconcile against the dense oracle
    let (dense_vals, dense_vecs) = chain::dense_eigensolve(&h, config.args.dense_limit)?;
    let mut used = vec![false; dense_vals.len()];
    for &e in &labeled {
        if let Some(i) = dense_vals
            .iter()
            .enumerate()
            .find(|(i, v)| !used[*i] && (*v - e).abs() < 1e-8)
            .map(|(i, _)| i)
        {
            used[i] = true;
        }
    }
    let unaccounted: Vec<usize> =
        (0..dense_vals.len()).filter(|&i| !used[i]).collect();
    eprintln!(
        "spectrum: {} of {} dense states labeled by m <= 1 towers; {} from higher-magnon sectors",
        labeled.len(),
        dense_vals.len(),
        unaccounted.len()
    );
    for i in unaccounted {
        let m_sector = uqsl2::sector_magnons(&dense_vecs[i]).map(|m| m.to_string())
            .unwrap_or_else(|_| "mixed".into());
        eprintln!(
            "  dense-only eigenvalue {:.12} in m = {} sector",
            dense_vals[i], m_sector
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_profile(config: &Config) -> anyhow::Result<ExitCode> {
    let p = config.args.p.unwrap_or(config.args.n / 2).max(1);
    let qc = config.qc();
    let mut out = config.writer()?;
    let mut table = Table::new(&mut out, config.args.format, vec!["site", "magnetization"]);
    for site2 in (1 - 2 * p as i64..2 * p as i64).step_by(2) {
        let x = observables::site2_to_label(site2);
        let m = observables::magnetization_closed_form(p, &qc, x)?;
        table.row(&[jnum(site2 as f64 / 2.0), jnum(m.re)])?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_shape(config: &Config, u_min: f64, u_max: f64, u_step: f64) -> anyhow::Result<ExitCode> {
    if u_step <= 0.0 || u_max < u_min {
        eprintln!("configuration error: need u_min <= u_max and positive step");
        return Ok(ExitCode::from(2));
    }
    let mut out = config.writer()?;
    let mut table =
        Table::new(&mut out, config.args.format, vec!["u", "magnetization", "mu"]);
    let steps = ((u_max - u_min) / u_step).round() as i64;
    for i in 0..=steps {
        let u = u_min + i as f64 * u_step;
        let (m, mu) = observables::scaled_profile_and_limit_shape(u);
        table.row(&[jnum(u), jnum(m), jnum(mu)])?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_prob(config: &Config, l_max: u32, d_max: u32) -> anyhow::Result<ExitCode> {
    let p = config.args.p.unwrap_or(6);
    if p == 0 {
        eprintln!("configuration error: p must be positive");
        return Ok(ExitCode::from(2));
    }
    let qc = config.qc();
    let check_oracle = p <= 8 && config.q_exact.is_some();
    let mut header = vec!["l", "d", "p_finite", "p_infinite"];
    if check_oracle {
        header.push("oracle_exact");
    }
    let mut mismatches = 0usize;
    let mut out = config.writer()?;
    let mut table = Table::new(&mut out, config.args.format, header);
    for l in 1..=l_max.min(p) {
        for d in 0..=d_max.min(p) {
            let fin = observables::prob_single_finite(p, &qc, l, d)?.re;
            let inf = observables::prob_single_infinite(config.qf, l, d, config.args.k)?;
            let mut row = vec![l.into(), d.into(), jnum(fin), jnum(inf)];
            if check_oracle {
                let q_exact = config.q_exact.as_ref().unwrap();
                let exact = observables::prob_single_finite(p, q_exact, l, d)?
                    == observables::prob_single_oracle(p, q_exact, l, d);
                if !exact {
                    mismatches += 1;
                }
                row.push(exact.into());
            }
            table.row(&row)?;
        }
    }
    if mismatches > 0 {
        eprintln!("prob: {mismatches} rows disagree with the enumeration oracle");
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_simulate(config: &Config) -> anyhow::Result<ExitCode> {
    let trunc = config.truncation();
    let mut out = config.writer()?;
    let mut table = Table::new(
        &mut out,
        config.args.format,
        vec!["sample", "t", "move", "row", "weight"],
    );
    let basis = chain::partition_basis(&trunc);
    let pi = asep::stationary_vector(&basis, &config.qc())?;
    let target = asep::weight_marginal(&pi);
    for sample in 0..config.args.samples {
        let seed = config.args.seed.wrapping_add(sample as u64);
        let traj = asep::gillespie_sample(config.qf, config.args.a, &trunc, config.args.t, seed);
        for ev in &traj.events {
            table.row(&[
                sample.into(),
                jnum(ev.t),
                match ev.kind {
                    asep::MoveKind::Add => "add".into(),
                    asep::MoveKind::Remove => "remove".into(),
                },
                ev.row.into(),
                ev.weight_after.into(),
            ])?;
        }
        let tv = asep::tv_distance(&asep::weight_histogram(&traj), &target);
        eprintln!(
            "sample {sample}: {} events, time-average weight TV vs stationary = {tv:.4}",
            traj.events.len()
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_evolve(config: &Config) -> anyhow::Result<ExitCode> {
    let trunc = config.truncation();
    let basis = chain::partition_basis(&trunc);
    let qc = config.qc();
    let w = asep::build_rate_matrix(&basis, &qc, &C64::new(config.args.a, 0.0))?;
    let mut p0 = StateVector::zero(basis.clone());
    p0.set(
        basis.index_of(&bdw_core::Partition::empty()).unwrap(),
        C64::new(1.0, 0.0),
    );
    let p = asep::evolve_dense(&w, &p0, config.args.t, config.args.dense_limit)?;

    let pi = asep::stationary_vector(&basis, &qc)?;
    eprintln!(
        "evolve: t = {}, TV to stationary = {:.3e}",
        config.args.t,
        asep::tv_distance_vectors(&p, &pi)
    );

    let mut out = config.writer()?;
    let mut table = Table::new(
        &mut out,
        config.args.format,
        vec!["weight", "partition", "probability"],
    );
    for (i, v) in p.iter() {
        let d = basis.key(i);
        table.row(&[d.weight().into(), d.to_string().into(), jnum(v.re)])?;
    }
    Ok(ExitCode::SUCCESS)
}
