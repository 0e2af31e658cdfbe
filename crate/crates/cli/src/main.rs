use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use platonic_dd::cayley::{
    build_cayley_graph, dcg_path, dcg_pulses, eulerian_cycle, reference_words, word_to_pulses, SequenceWord,
};
use platonic_dd::io::{parse_hamiltonian, parse_operator, parse_scan_config, write_sequence};
use platonic_dd::majorana::{detect_point_group, majorana_roots, partial_trace};
use platonic_dd::rotations::standard_group;
use platonic_dd::simulate::scan::scan;
use platonic_dd::simulate::time_antisymmetric;
use platonic_dd::spin_algebra::multipole_decompose_matrix;
use platonic_dd::symmetrize::{group_average, invariant_dimension};
use platonic_dd::{Error, Spin, SpinOperator};

#[derive(Parser)]
#[command(
    name = "platonic-dd",
    version,
    about = "Platonic dynamical-decoupling sequences: synthesis, verification, symmetry detection and simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the Eulerian sequence of a group as a word or as pulse lines.
    Sequence(SequenceArgs),
    /// Check which multipole ranks (or which Hamiltonian) a group averages away.
    Verify(VerifyArgs),
    /// Report the rotational symmetry group of an operator.
    Detect(DetectArgs),
    /// Run a parameter scan from a config file and write CSV.
    Scan(ScanArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Word,
    Pulses,
}

#[derive(Args)]
struct SequenceArgs {
    /// edd, tedd, oedd or iedd (D2, T, O, I are accepted too).
    #[arg(long)]
    group: String,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Free interval before each pulse.
    #[arg(long, default_value_t = 1.0)]
    tau0: f64,
    /// Gate path with identity slots; the last slot hosts the gate.
    #[arg(long, conflicts_with = "tt_dagger")]
    dcg: bool,
    /// Append the mirrored sequence with inverted pulses.
    #[arg(long)]
    tt_dagger: bool,
    /// Use the published word instead of the synthesized Eulerian cycle.
    #[arg(long, conflicts_with = "dcg")]
    reference: bool,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    group: String,
    #[arg(long, conflicts_with = "hamiltonian", required_unless_present = "hamiltonian")]
    lmax: Option<usize>,
    /// Hamiltonian spec file.
    #[arg(long)]
    hamiltonian: Option<PathBuf>,
}

#[derive(Args)]
struct DetectArgs {
    /// Operator file (`dim d` followed by rows of `re,im`).
    input: PathBuf,
    /// Comma-separated spins, e.g. `1/2,1`; a single spin is inferred from the dimension.
    #[arg(long)]
    spins: Option<String>,
}

#[derive(Args)]
struct ScanArgs {
    config: PathBuf,
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Append log-log slope rows.
    #[arg(long)]
    fit: bool,
    #[arg(long)]
    seed: Option<u64>,
}

enum Failure {
    Usage(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome = Result<ExitCode, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Io(format!("{}: {e}", p.display()))),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| Failure::Io(e.to_string())),
    }
}

fn fmt3(v: [f64; 3]) -> String {
    let c = |x: f64| {
        let r = (x * 1e6).round() / 1e6;
        if r == 0.0 {
            "0".to_string()
        } else {
            format!("{r}")
        }
    };
    format!("({},{},{})", c(v[0]), c(v[1]), c(v[2]))
}

fn cmd_sequence(a: SequenceArgs) -> Outcome {
    let g = standard_group(&a.group).map_err(|_| Failure::Usage(format!("unknown group `{}`", a.group)))?;
    if !(a.tau0 >= 0.0 && a.tau0.is_finite()) {
        return Err(Failure::Usage("--tau0 must be finite and nonnegative".into()));
    }
    let format = a.format.unwrap_or(if a.tt_dagger { Format::Pulses } else { Format::Word });
    let (word, gate_path) = if a.dcg {
        let path = dcg_path(&build_cayley_graph(&g)?)?;
        (path.word.clone(), Some(path))
    } else if a.reference {
        let w = match g.name.as_str() {
            "D2" => reference_words::EDD,
            "T" => reference_words::TEDD,
            "O" => reference_words::OEDD,
            _ => reference_words::IEDD,
        };
        (SequenceWord::new(w), None)
    } else {
        (eulerian_cycle(&build_cayley_graph(&g)?)?, None)
    };
    let text = match format {
        Format::Word if a.tt_dagger => {
            return Err(Failure::Usage("--tt-dagger has no word form; use --format pulses".into()))
        }
        Format::Word => format!("{word}\n"),
        Format::Pulses => {
            let seq = match &gate_path {
                Some(p) => dcg_pulses(p, &g, a.tau0)?,
                None => word_to_pulses(&word, &g, a.tau0)?,
            };
            write_sequence(&if a.tt_dagger { time_antisymmetric(&seq) } else { seq })
        }
    };
    emit(a.out.as_deref(), &text)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(a: VerifyArgs) -> Outcome {
    let g = standard_group(&a.group).map_err(|_| Failure::Usage(format!("unknown group `{}`", a.group)))?;
    let decoupled = match (a.lmax, &a.hamiltonian) {
        (Some(lmax), _) => {
            if lmax == 0 {
                return Err(Failure::Usage("--lmax must be at least 1".into()));
            }
            let mut ok = true;
            for l in 1..=lmax {
                let n = invariant_dimension(&g, l);
                ok &= n == 0;
                println!("L={l} invariant dimension {n}");
            }
            ok
        }
        (None, Some(path)) => {
            let spec = parse_hamiltonian(&read(path)?)?;
            let h = spec.build()?;
            let top = spec.spins.iter().map(|s| s.dim() - 1).max().unwrap_or(0);
            for l in 1..=top {
                println!("L={l} invariant dimension {}", invariant_dimension(&g, l));
            }
            let r = group_average(&h, &g, &spec.spins)?;
            println!("residual {:.3e}", r.residual_norm);
            r.is_identity_multiple
        }
        (None, None) => unreachable!("clap requires one of --lmax or --hamiltonian"),
    };
    println!("group {} {}", g.name, if decoupled { "decoupled" } else { "not decoupled" });
    Ok(if decoupled { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_detect(a: DetectArgs) -> Outcome {
    let m = parse_operator(&read(&a.input)?)?;
    let d = m.nrows();
    let spins: Vec<Spin> = match &a.spins {
        Some(s) => s.split(',').map(|t| Spin::parse(t.trim())).collect::<Result<_, _>>()?,
        None => vec![Spin::from_two_j(d as u32 - 1)],
    };
    let h = SpinOperator::new(spins.iter().map(|s| s.dim()).collect(), m)?;
    let report = detect_point_group(&h, &spins)?;
    match report.axes.iter().find(|(n, _)| *n == 0) {
        Some((_, axis)) if report.is_axially_continuous => println!("{} about {}", report.name, fmt3(*axis)),
        _ => println!("{}", report.name),
    }
    for (n, axis) in report.axes.iter().filter(|(n, _)| *n > 0) {
        println!("axis C{n} {}", fmt3(*axis));
    }
    // per-site multipole norms and constellations
    let dims: Vec<usize> = spins.iter().map(|s| s.dim()).collect();
    for (k, spin) in spins.iter().enumerate() {
        let local = if spins.len() == 1 { h.matrix.clone() } else { partial_trace(&h.matrix, &dims, &[k]) };
        let prefix = if spins.len() == 1 { String::new() } else { format!("site {k} ") };
        for p in multipole_decompose_matrix(&local, *spin)?.iter().skip(1) {
            let norm = p.norm();
            println!("{prefix}L={} norm {norm:.6}", p.l);
            if norm > 1e-12 {
                let stars = majorana_roots(&p.components)?;
                let list: Vec<String> = stars.stars.iter().map(|s| fmt3(*s)).collect();
                println!("{prefix}L={} stars {}", p.l, list.join(" "));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_scan(a: ScanArgs) -> Outcome {
    let text = read(&a.config)?;
    let base = a.config.parent().unwrap_or(Path::new("."));
    let mut cfg = parse_scan_config(&text, base)?;
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Ok(v) = std::env::var("DD_THREADS") {
        let n: usize = v.parse().map_err(|_| Failure::Usage(format!("DD_THREADS=`{v}` is not a count")))?;
        cfg.threads = Some(n.max(1));
    }
    let result = scan(&cfg)?;
    let mut csv = result.to_csv();
    if a.fit {
        csv.push_str(&result.fits_csv());
    }
    emit(a.out.as_deref(), &csv)?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    let r = match cli.command {
        Command::Sequence(a) => cmd_sequence(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Detect(a) => cmd_detect(a),
        Command::Scan(a) => cmd_scan(a),
    };
    match r {
        Ok(code) => code,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Io(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}
