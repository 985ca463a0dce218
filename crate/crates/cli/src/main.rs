use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use linsan::formats::{
    load_joint, parse_distortion, parse_mechanism, parse_records, sha256_hex, write_mechanism, InputFormat,
    MechanismMeta,
};
use linsan::sanitize::RNG_ID;
use linsan::sweep::{build_mechanism, format_sig, parse_grid, to_tsv, tradeoff_point};
use linsan::{
    entropy, sweep, verify_realization, Alpha, DistortionMatrix, Error, Family, JointDistribution, LogBase,
    PrivacyReport, SanitizerState,
};

#[derive(Parser)]
#[command(name = "linsan", version, about = "Privatize discrete data by linear reduction toward the marginal")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Privacy of releasing X as is, marginals and entropy.
    Inspect {
        #[command(flatten)]
        input: InputArgs,
        /// Also report the reduced channel and both mechanism families at this level.
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, default_value = "bits")]
        base: LogBase,
    },
    /// Build a mechanism and write it as a tensor CSV.
    Mechanize {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        alpha: f64,
        /// markov, nonmarkov_tv or nonmarkov_distortion.
        #[arg(long)]
        family: Family,
        /// Distortion matrix CSV; required for nonmarkov_distortion.
        #[arg(long)]
        distortion: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tradeoff table over a grid of privacy levels.
    Sweep {
        #[command(flatten)]
        input: InputArgs,
        /// `start:stop:step` (stop included) or a comma-separated list.
        #[arg(long)]
        grid: String,
        /// Comma-separated families. Defaults to markov and nonmarkov_tv, plus
        /// nonmarkov_distortion when a distortion matrix is given.
        #[arg(long, value_delimiter = ',')]
        family: Vec<Family>,
        /// Distortion matrix CSV; scores expected distortion (Hamming otherwise).
        #[arg(long)]
        distortion: Option<PathBuf>,
        #[arg(long, default_value = "bits")]
        base: LogBase,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replace every record's x by a draw from a mechanism file.
    Sanitize {
        /// Records CSV with header `s,x`.
        records: PathBuf,
        #[arg(long)]
        mechanism: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct InputArgs {
    /// Joint triplets, conditional form, or records.
    input: PathBuf,
    /// Force the input format instead of detecting it from the header.
    #[arg(long)]
    format: Option<InputFormat>,
}

enum Failure {
    Lib(Error),
    Io(PathBuf, io::Error),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Io(..) | Failure::Usage(_) | Failure::Lib(Error::Parse { .. }) => 2,
            Failure::Lib(Error::LpInfeasible(_) | Error::Lp(_)) => 4,
            Failure::Lib(Error::UnknownLabel(_)) => 5,
            Failure::Lib(_) => 3,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Lib(e) => e.to_string(),
            Failure::Io(p, e) => format!("{}: {e}", p.display()),
            Failure::Usage(m) => m.clone(),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| Failure::Io(path.to_path_buf(), e))
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Io(p.to_path_buf(), e)),
        None => io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Io("<stdout>".into(), e)),
    }
}

fn load(input: &InputArgs) -> CliResult<(JointDistribution, String)> {
    let text = read(&input.input)?;
    let j = load_joint(&text, input.format)?;
    Ok((j, sha256_hex(text.as_bytes())))
}

fn load_distortion(path: Option<&Path>, j: &JointDistribution) -> CliResult<Option<DistortionMatrix>> {
    path.map(|p| Ok(parse_distortion(&read(p)?, j.x_alphabet())?)).transpose()
}

fn join(v: &[f64]) -> String {
    v.iter().map(|&x| format_sig(x)).collect::<Vec<_>>().join(",")
}

fn inspect(input: &InputArgs, alpha: Option<f64>, base: LogBase) -> CliResult<String> {
    let (j, _) = load(input)?;
    let alpha = alpha.map(Alpha::new).transpose()?;
    let p = PrivacyReport::of_original(&j, base);
    let mut lines = vec![
        format!("s_alphabet\t{}", j.s_alphabet().labels().join(",")),
        format!("x_alphabet\t{}", j.x_alphabet().labels().join(",")),
        format!("p_s\t{}", join(j.marginal_s().values())),
        format!("p_x\t{}", join(j.marginal_x().values())),
        format!("base\t{base}"),
        format!("ldp\t{}", format_sig(p.ldp)),
        format!("log_lift\t{}", format_sig(p.log_lift)),
    ];
    if let Some((y, s)) = p.loglift_argmax {
        lines.push(format!("log_lift_at\ty={},s={}", j.x_alphabet().label(y), j.s_alphabet().label(s)));
    }
    lines.push(format!("entropy_x\t{}", format_sig(entropy(j.marginal_x(), base))));
    if let Some(alpha) = alpha {
        lines.push(format!("alpha\t{}", format_sig(alpha.value())));
        let r = PrivacyReport::of_reduction(&j, alpha, base);
        lines.push(format!("ldp_y\t{}", format_sig(r.ldp)));
        lines.push(format!("loglift_y\t{}", format_sig(r.log_lift)));
        lines.push(format!("ldp_approx\t{}", format_sig(r.ldp_first_order)));
        lines.push(format!("loglift_approx\t{}", format_sig(r.loglift_first_order)));
        for family in [Family::Markov, Family::NonmarkovTv] {
            let t = tradeoff_point(&j, alpha, family, None, base)?;
            lines.push(format!("{family}.dtv_half\t{}", format_sig(t.dtv_half)));
            lines.push(format!("{family}.dtv_full\t{}", format_sig(t.dtv_full)));
            lines.push(format!("{family}.hamming_distortion\t{}", format_sig(t.expected_distortion)));
            lines.push(format!("{family}.mi\t{}", format_sig(t.mi)));
            lines.push(format!("{family}.utility_loss\t{}", format_sig(t.utility_loss)));
        }
    }
    Ok(lines.join("\n") + "\n")
}

fn mechanize(
    input: &InputArgs,
    alpha: f64,
    family: Family,
    distortion: Option<&Path>,
) -> CliResult<String> {
    let alpha = Alpha::new(alpha)?;
    let (j, hash) = load(input)?;
    let d = load_distortion(distortion, &j)?;
    if family == Family::NonmarkovDistortion && d.is_none() {
        return Err(Failure::Usage("--family nonmarkov_distortion needs --distortion".into()));
    }
    let m = build_mechanism(&j, alpha, family, d.as_ref())?;
    let report = verify_realization(&m, &j, alpha)?;
    if !report.passes() {
        return Err(Error::LpInfeasible(format!("mechanism fails realization check: {report:?}")).into());
    }
    Ok(write_mechanism(&m, &MechanismMeta::new(alpha.value(), family, hash)))
}

fn configure_threads() -> CliResult<()> {
    let Ok(v) = std::env::var("LINSAN_THREADS") else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Usage(format!("LINSAN_THREADS must be a positive integer, got `{v}`")))?;
    // Fails only if a pool already exists, which cannot happen this early.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn run_sweep(
    input: &InputArgs,
    grid: &str,
    families: &[Family],
    distortion: Option<&Path>,
    base: LogBase,
) -> CliResult<String> {
    let grid = parse_grid(grid)?;
    let (j, _) = load(input)?;
    let d = load_distortion(distortion, &j)?;
    let families = if families.is_empty() {
        let mut f = vec![Family::Markov, Family::NonmarkovTv];
        if d.is_some() {
            f.push(Family::NonmarkovDistortion);
        }
        f
    } else {
        families.to_vec()
    };
    if families.contains(&Family::NonmarkovDistortion) && d.is_none() {
        return Err(Failure::Usage("family nonmarkov_distortion needs --distortion".into()));
    }
    configure_threads()?;
    Ok(to_tsv(&sweep(&j, &grid, &families, d.as_ref(), base)?, base))
}

fn sanitize(records: &Path, mechanism: &Path, seed: u64) -> CliResult<String> {
    let file = parse_mechanism(&read(mechanism)?)?;
    let parsed = parse_records(&read(records)?)?;
    let out = SanitizerState::new(file.mechanism, seed).sanitize(&parsed.records)?;
    let mut text = format!(
        "# seed={seed} rng={RNG_ID} family={} alpha={}\ns,y\n",
        file.meta.family, file.meta.alpha
    );
    for (r, y) in parsed.records.iter().zip(&out) {
        text.push_str(&r.s);
        text.push(',');
        text.push_str(y);
        text.push('\n');
    }
    Ok(text)
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Inspect { input, alpha, base } => emit(None, &inspect(&input, alpha, base)?),
        Command::Mechanize { input, alpha, family, distortion, out } => {
            emit(out.as_deref(), &mechanize(&input, alpha, family, distortion.as_deref())?)
        }
        Command::Sweep { input, grid, family, distortion, base, out } => {
            emit(out.as_deref(), &run_sweep(&input, &grid, &family, distortion.as_deref(), base)?)
        }
        Command::Sanitize { records, mechanism, seed, out } => {
            emit(out.as_deref(), &sanitize(&records, &mechanism, seed)?)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("linsan: error: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}
