//! `birkhoff`: spectra, pressures and counting checks from the command line.
//!
//! Exit codes: 0 success, 2 invalid input, 3 numerical failure, 4 a
//! `verify` exponent outside its slack band.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use birkhoff_core::oracle::{check_against, degenerate_weight_example, DegenerateScale, DpConfig, DpMode};
use birkhoff_core::pressure::{mean_range, pressure_estimate, pressure_iid, PotentialTable};
use birkhoff_core::spectrum::{moebius_digit_spectrum, spectrum_at, spectrum_curve, Entropy, SpectrumPoint};
use birkhoff_core::symbolic::SftSpec;
use birkhoff_core::weights::{
    empirical_frequency, moebius_sieve, transport_gammas, transport_mn, FrequencyVector, StreamDescriptor,
    TransportOptions, WeightStream,
};
use birkhoff_core::Error;
use clap::{Parser, Subcommand};
use serde::Serialize;

const SCHEMA_VERSION: u32 = 1;
const DEFAULT_SCHEDULE_C: f64 = 0.5;

#[derive(Parser)]
#[command(name = "birkhoff", version, about = "Multifractal spectra of weighted Birkhoff averages")]
struct Cli {
    /// Seed for every sampled weight stream (overrides seeds in descriptors).
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Spectrum curve over a grid of alpha values.
    Spectrum {
        #[arg(long)]
        potential: PathBuf,
        #[arg(long)]
        weights: PathBuf,
        /// `lo:hi:n`.
        #[arg(long, allow_hyphen_values = true)]
        grid: String,
        /// CSV output; the JSON sidecar goes next to it with a `.json`
        /// extension. Prints the CSV to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pressure value and derivatives at one `p`, optionally with a
    /// Monte-Carlo estimate over sampled weights.
    Pressure {
        #[arg(long)]
        potential: PathBuf,
        #[arg(long)]
        weights: PathBuf,
        /// Comma-separated components.
        #[arg(long, allow_hyphen_values = true)]
        p: String,
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
        /// Word length for the Monte-Carlo estimate.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 32)]
        samples: usize,
        /// Adjacency JSON; the full shift when absent.
        #[arg(long)]
        sft: Option<PathBuf>,
    },
    /// Möbius function frequencies, or the digit spectrum closed form.
    Mobius {
        #[arg(long, default_value_t = 10_000_000)]
        limit: usize,
        /// Report empirical symbol frequencies of μ(1..=limit).
        #[arg(long)]
        freq: bool,
        /// Evaluate the digit spectrum for this many digits.
        #[arg(long)]
        digits: Option<usize>,
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<f64>,
    },
    /// Counting exponents against the predicted spectrum.
    Verify {
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        /// `n1:e1,n2:e2,…`; an entry without `:e` uses 0.5/√n.
        #[arg(long)]
        schedule: Option<String>,
        /// Single entry, used with `--n`.
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_enum, default_value_t = ModeArg::Dp)]
        mode: ModeArg,
        /// Bucket width; ε/8 when absent.
        #[arg(long)]
        delta: Option<f64>,
        /// Defaults to the unweighted binary digit potential f = (0, 1).
        #[arg(long)]
        potential: Option<PathBuf>,
        /// Defaults to the constant stream 0.
        #[arg(long)]
        weights: Option<PathBuf>,
        /// Replace the predicted entropy (negative controls).
        #[arg(long, allow_hyphen_values = true)]
        predicted_override: Option<f64>,
    },
    /// Occurrence-matching transport between two weight streams.
    Transport {
        #[arg(long)]
        w: PathBuf,
        #[arg(long)]
        wprime: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        n: usize,
        /// Number of leading γ values to include.
        #[arg(long, default_value_t = 20)]
        head: usize,
    },
    /// Level-set counts for the block weight sequence with vanishing
    /// potential between blocks.
    ExampleDegenerate {
        /// `φ₀,φ₁`.
        #[arg(long, allow_hyphen_values = true, default_value = "-1,2")]
        phi: String,
        #[arg(long, default_value_t = 4)]
        growth: usize,
        #[arg(long, default_value_t = 6)]
        blocks: usize,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        alpha: f64,
        /// Fixed window; 0.5/√n per scale when absent.
        #[arg(long)]
        epsilon: Option<f64>,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum ModeArg {
    Exact,
    Dp,
}

enum Failure {
    Validation(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::MaxIterations { .. } => Failure::Numerical(e.to_string()),
            Error::CapExceeded { cap, .. } => Failure::Validation(format!(
                "too many words for exact enumeration (cap {cap}); rerun with `--mode dp`"
            )),
            other => Failure::Validation(other.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Validation(msg.into())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn read_stream(path: &Path, seed: Option<u64>) -> CliResult<WeightStream> {
    let desc: StreamDescriptor = read_json(path)?;
    let w = WeightStream::try_from(desc)?;
    Ok(match seed {
        Some(s) => w.reseeded(s),
        None => w,
    })
}

fn frequency_of(w: &WeightStream) -> CliResult<FrequencyVector> {
    w.target_frequency()
        .ok_or_else(|| invalid("weight stream has no known limiting frequency"))
}

fn parse_list(s: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| invalid(format!("not a number: {x:?}"))))
        .collect()
}

fn parse_grid(s: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, n] = parts.as_slice() else {
        return Err(invalid(format!("grid must be lo:hi:n, got {s:?}")));
    };
    let lo: f64 = lo.parse().map_err(|_| invalid(format!("bad grid start {lo:?}")))?;
    let hi: f64 = hi.parse().map_err(|_| invalid(format!("bad grid end {hi:?}")))?;
    let n: usize = n.parse().map_err(|_| invalid(format!("bad grid size {n:?}")))?;
    if n == 0 || !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(invalid("grid needs finite lo <= hi and n >= 1"));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect())
}

fn parse_schedule(s: &str) -> CliResult<Vec<(usize, f64)>> {
    s.split(',')
        .map(|entry| {
            let mut it = entry.trim().splitn(2, ':');
            let n: usize = it
                .next()
                .unwrap()
                .parse()
                .map_err(|_| invalid(format!("bad schedule entry {entry:?}")))?;
            if n == 0 {
                return Err(invalid("schedule lengths must be positive"));
            }
            let eps = match it.next() {
                Some(e) => e.parse().map_err(|_| invalid(format!("bad schedule entry {entry:?}")))?,
                None => DEFAULT_SCHEDULE_C / (n as f64).sqrt(),
            };
            Ok((n, eps))
        })
        .collect()
}

fn fmt_float(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x:.16e}")
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable output");
    s.push('\n');
    s
}

fn emit(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| invalid(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct SpectrumSidecar<'a> {
    schema_version: u32,
    /// Grid points not outside the domain.
    domain: Option<(f64, f64)>,
    /// `[Σ q_j min_i f, Σ q_j max_i f]`.
    mean_range: (f64, f64),
    boundary_convention: &'static str,
    points: &'a [SpectrumPoint],
}

fn run_spectrum(potential: &Path, weights: &Path, grid: &str, out: Option<&Path>, seed: Option<u64>) -> CliResult<()> {
    let f: PotentialTable = read_json(potential)?;
    let w = read_stream(weights, seed)?;
    let q = frequency_of(&w)?;
    let grid = parse_grid(grid)?;
    let curve = spectrum_curve(&q, &f, &grid)?;

    let mut csv = format!("# schema_version={SCHEMA_VERSION}\nalpha,p_star,entropy,status\n");
    for p in &curve.points {
        let p_star = p.p_star.as_ref().map_or(String::new(), |v| fmt_float(v[0]));
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            fmt_float(p.alpha[0]),
            p_star,
            fmt_float(p.entropy.to_f64()),
            p.status
        );
    }
    let sidecar = SpectrumSidecar {
        schema_version: SCHEMA_VERSION,
        domain: curve.domain,
        mean_range: mean_range(&q, &f),
        boundary_convention: "boundary entropy is the |p| -> inf limit, sum_j q_j log #(extremal cells in row j)",
        points: &curve.points,
    };
    emit(out, &csv)?;
    if let Some(out) = out {
        emit(Some(&out.with_extension("json")), &to_json(&sidecar))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct PressureReport {
    schema_version: u32,
    p: Vec<f64>,
    alpha: Vec<f64>,
    value: f64,
    gradient: Vec<f64>,
    hessian: Vec<Vec<f64>>,
    estimate: Option<EstimateReport>,
}

#[derive(Serialize)]
struct EstimateReport {
    n: usize,
    samples: usize,
    mean: f64,
    stderr: f64,
}

#[allow(clippy::too_many_arguments)]
fn run_pressure(
    potential: &Path,
    weights: &Path,
    p: &str,
    alpha: &str,
    n: Option<usize>,
    samples: usize,
    sft: Option<&Path>,
    seed: Option<u64>,
) -> CliResult<()> {
    let f: PotentialTable = read_json(potential)?;
    let w = read_stream(weights, seed)?;
    let q = frequency_of(&w)?;
    let p = parse_list(p)?;
    let alpha = parse_list(alpha)?;
    let eval = pressure_iid(&q, &f, &p, &alpha)?;
    let estimate = match n {
        None => None,
        Some(n) => {
            let spec = match sft {
                Some(path) => read_json(path)?,
                None => SftSpec::full_shift(f.shift_alphabet())?,
            };
            let est = pressure_estimate(&spec, &f, &p, &alpha, &w, n, samples, seed.unwrap_or(0))?;
            Some(EstimateReport {
                n: est.n,
                samples: est.samples,
                mean: est.mean,
                stderr: est.stderr,
            })
        }
    };
    let report = PressureReport {
        schema_version: SCHEMA_VERSION,
        p,
        alpha,
        value: eval.value,
        gradient: eval.gradient,
        hessian: eval.hessian,
        estimate,
    };
    emit(None, &to_json(&report))
}

#[derive(Serialize)]
struct MobiusReport {
    schema_version: u32,
    limit: usize,
    counts: Option<[u64; 3]>,
    /// Frequencies of μ = +1, −1, 0.
    frequencies: Option<[f64; 3]>,
    target: [f64; 3],
    digit_spectrum: Option<DigitSpectrum>,
}

#[derive(Serialize)]
struct DigitSpectrum {
    digits: usize,
    alpha: f64,
    entropy: f64,
    /// `null` at the domain endpoints, where the minimizer is at infinity.
    p: Option<f64>,
}

fn run_mobius(limit: usize, freq: bool, digits: Option<usize>, alpha: Option<f64>) -> CliResult<()> {
    let q = FrequencyVector::moebius();
    let target = [q.as_slice()[0], q.as_slice()[1], q.as_slice()[2]];
    let (counts, frequencies) = if freq {
        let mu = moebius_sieve(limit)?;
        let mut c = [0u64; 3];
        for &m in &mu[1..] {
            c[match m {
                1 => 0,
                -1 => 1,
                _ => 2,
            }] += 1;
        }
        let n = limit as f64;
        (Some(c), Some(c.map(|x| x as f64 / n)))
    } else {
        (None, None)
    };
    let digit_spectrum = match (digits, alpha) {
        (Some(d), Some(a)) => {
            let (h, p) = moebius_digit_spectrum(d, a)?;
            Some(DigitSpectrum {
                digits: d,
                alpha: a,
                entropy: h,
                p: p.is_finite().then_some(p),
            })
        }
        (None, None) => None,
        _ => return Err(invalid("--digits and --alpha go together")),
    };
    let report = MobiusReport {
        schema_version: SCHEMA_VERSION,
        limit,
        counts,
        frequencies,
        target,
        digit_spectrum,
    };
    emit(None, &to_json(&report))
}

#[derive(Serialize)]
struct VerifyReport {
    schema_version: u32,
    alpha: f64,
    status: String,
    predicted: Option<f64>,
    entries: Vec<VerifyEntry>,
}

#[derive(Serialize)]
struct VerifyEntry {
    n: usize,
    epsilon: f64,
    count: String,
    /// `null` for an empty count.
    exponent: Option<f64>,
    predicted: Option<f64>,
    slack: f64,
    ambiguous: String,
    within: bool,
}

struct VerifyArgs {
    alpha: f64,
    schedule: Option<String>,
    epsilon: Option<f64>,
    n: Option<usize>,
    mode: ModeArg,
    delta: Option<f64>,
    potential: Option<PathBuf>,
    weights: Option<PathBuf>,
    predicted_override: Option<f64>,
}

/// Returns whether every entry is within its band.
fn run_verify(args: VerifyArgs, seed: Option<u64>) -> CliResult<bool> {
    let f: PotentialTable = match &args.potential {
        Some(p) => read_json(p)?,
        None => PotentialTable::scalar(vec![vec![0.0, 1.0]])?,
    };
    let w = match &args.weights {
        Some(p) => read_stream(p, seed)?,
        None => WeightStream::periodic(vec![0], f.weight_alphabet())?,
    };
    if args.epsilon.is_some() && args.n.is_none() {
        return Err(invalid("--epsilon needs --n"));
    }
    let schedule = match (&args.schedule, args.n) {
        (Some(_), Some(_)) => return Err(invalid("use either --schedule or --n, not both")),
        (Some(s), None) => parse_schedule(s)?,
        (None, Some(n)) => {
            if n == 0 {
                return Err(invalid("--n must be positive"));
            }
            vec![(n, args.epsilon.unwrap_or(DEFAULT_SCHEDULE_C / (n as f64).sqrt()))]
        }
        (None, None) => [20, 200, 2000].map(|n| (n, DEFAULT_SCHEDULE_C / (n as f64).sqrt())).to_vec(),
    };
    let q = match w.target_frequency() {
        Some(q) => q,
        None => {
            let longest = schedule.iter().map(|&(n, _)| n).max().unwrap();
            empirical_frequency(&w, longest)?
        }
    };
    let cfg = DpConfig {
        bucket_width: args.delta,
        mode: match args.mode {
            ModeArg::Exact => DpMode::Exact,
            ModeArg::Dp => DpMode::Bucketed,
        },
        ..DpConfig::default()
    };
    let mut predicted = spectrum_at(&q, &f, &[args.alpha])?;
    if let Some(h) = args.predicted_override {
        predicted.entropy = Entropy::Value(h);
    }
    let check = check_against(&predicted, &q, &f, &w, &schedule, &cfg)?;
    let h = predicted.entropy.value();
    let entries = check
        .entries
        .iter()
        .map(|e| VerifyEntry {
            n: e.result.n,
            epsilon: e.result.epsilon,
            count: e.result.count.to_string(),
            exponent: e.result.exponent.is_finite().then_some(e.result.exponent),
            predicted: h,
            slack: e.slack,
            ambiguous: e.result.ambiguous.to_string(),
            within: e.within,
        })
        .collect();
    let report = VerifyReport {
        schema_version: SCHEMA_VERSION,
        alpha: args.alpha,
        status: predicted.status.to_string(),
        predicted: h,
        entries,
    };
    emit(None, &to_json(&report))?;
    Ok(check.all_within())
}

#[derive(Serialize)]
struct TransportReport {
    schema_version: u32,
    n: usize,
    m_n: usize,
    ratio: f64,
    gamma_head: Vec<usize>,
}

fn run_transport(w: &Path, wprime: &Path, n: usize, head: usize, seed: Option<u64>) -> CliResult<()> {
    if n == 0 {
        return Err(invalid("--n must be positive"));
    }
    let a = read_stream(w, seed)?;
    // Distinct seeds keep two sampled descriptors independent under --seed.
    let b = read_stream(wprime, seed.map(|s| s.wrapping_add(1)))?;
    let m_n = transport_mn(&a, &b, n)?;
    let gamma_head = transport_gammas(&a, &b, head.min(n), TransportOptions::default())?;
    let report = TransportReport {
        schema_version: SCHEMA_VERSION,
        n,
        m_n,
        ratio: m_n as f64 / n as f64,
        gamma_head,
    };
    emit(None, &to_json(&report))
}

#[derive(Serialize)]
struct DegenerateOutput {
    schema_version: u32,
    phi: (f64, f64),
    growth: usize,
    blocks: usize,
    alpha: f64,
    h_deg: f64,
    constrained_share: f64,
    scales: Vec<ScaleOutput>,
    chained: Vec<ScaleOutput>,
}

#[derive(Serialize)]
struct ScaleOutput {
    m: usize,
    n: usize,
    epsilon: f64,
    count: String,
    exponent: Option<f64>,
}

impl From<&DegenerateScale> for ScaleOutput {
    fn from(s: &DegenerateScale) -> Self {
        ScaleOutput {
            m: s.m,
            n: s.n,
            epsilon: s.result.epsilon,
            count: s.result.count.to_string(),
            exponent: s.result.exponent.is_finite().then_some(s.result.exponent),
        }
    }
}

fn run_degenerate(phi: &str, growth: usize, blocks: usize, alpha: f64, epsilon: Option<f64>) -> CliResult<()> {
    let phi = match parse_list(phi)?.as_slice() {
        &[a, b] => (a, b),
        _ => return Err(invalid("--phi takes two comma-separated values")),
    };
    let report = degenerate_weight_example(blocks, growth, phi, alpha, epsilon, &DpConfig::default())?;
    let out = DegenerateOutput {
        schema_version: SCHEMA_VERSION,
        phi,
        growth,
        blocks,
        alpha,
        h_deg: report.h_deg,
        constrained_share: report.constrained_share,
        scales: report.scales.iter().map(ScaleOutput::from).collect(),
        chained: report.chained.iter().map(ScaleOutput::from).collect(),
    };
    emit(None, &to_json(&out))
}

fn configure_threads() -> CliResult<()> {
    if let Ok(v) = std::env::var("BIRKHOFF_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| invalid(format!("BIRKHOFF_THREADS must be a positive integer, got {v:?}")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| invalid(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<bool> {
    configure_threads()?;
    let seed = cli.seed;
    match cli.command {
        Command::Spectrum {
            potential,
            weights,
            grid,
            out,
        } => run_spectrum(&potential, &weights, &grid, out.as_deref(), seed).map(|_| true),
        Command::Pressure {
            potential,
            weights,
            p,
            alpha,
            n,
            samples,
            sft,
        } => run_pressure(&potential, &weights, &p, &alpha, n, samples, sft.as_deref(), seed).map(|_| true),
        Command::Mobius {
            limit,
            freq,
            digits,
            alpha,
        } => run_mobius(limit, freq, digits, alpha).map(|_| true),
        Command::Verify {
            alpha,
            schedule,
            epsilon,
            n,
            mode,
            delta,
            potential,
            weights,
            predicted_override,
        } => run_verify(
            VerifyArgs {
                alpha,
                schedule,
                epsilon,
                n,
                mode,
                delta,
                potential,
                weights,
                predicted_override,
            },
            seed,
        ),
        Command::Transport { w, wprime, n, head } => run_transport(&w, &wprime, n, head, seed).map(|_| true),
        Command::ExampleDegenerate {
            phi,
            growth,
            blocks,
            alpha,
            epsilon,
        } => run_degenerate(&phi, growth, blocks, alpha, epsilon).map(|_| true),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: at least one exponent is outside its slack band");
            ExitCode::from(4)
        }
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(3)
        }
    }
}
