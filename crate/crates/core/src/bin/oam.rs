//! Command-line front end: analyze, design, propagate and render
//! angular-momentum-structured beams as deterministic CSV/JSON/field files.
//!
//! Exit codes: 0 success, 2 validation failure, 3 numerical cross-check or
//! convergence failure, 4 I/O failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use oam_core::io::{self, fmt17};
use oam_core::numeric::DecomposeOptions;
use oam_core::*;

const EXIT_VALIDATION: u8 = 2;
const EXIT_CROSSCHECK: u8 = 3;
const EXIT_IO: u8 = 4;

/// Relative per-mode disagreement between the analytic and numeric spectra
/// that fails `analyze`.
const CROSSCHECK_LIMIT: f64 = 1e-4;

#[derive(Parser)]
#[command(name = "oam", version, about = "OAM spectra and vortex-pancake design")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Spiral-harmonic spectrum of a pancake spec and/or a sampled field.
    ///
    /// With a pancake spec the closed-form and ring-sampled routes both run
    /// and must agree; disagreement beyond 1e-4 exits with code 3.
    Analyze(AnalyzeArgs),
    /// Inverse design: find vortex positions matching a target weight vector.
    Design(DesignArgs),
    /// Spectrum and dislocations of a two-pearl vortex necklace.
    Necklace(NecklaceArgs),
    /// Carry a pancake (mode expansion) or field file (FFT) to plane z.
    Propagate(PropagateArgs),
    /// Sweep one vortex coordinate and tabulate the weights.
    Scan(ScanArgs),
    /// Rotational-Doppler sideband comb, optionally with a beat-signal
    /// round trip.
    Sidebands(SidebandsArgs),
    /// Amplitude or phase matrix plus the complex field file.
    Render(RenderArgs),
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Pancake spec JSON.
    #[arg(long)]
    pancake: Option<PathBuf>,
    /// OAMF1 field file.
    #[arg(long)]
    field: Option<PathBuf>,
    /// Decomposition origin "X,Y" (default the beam axis).
    #[arg(long, value_parser = parse_pair)]
    origin: Option<(f64, f64)>,
    /// Harmonic range; defaults to N+5 for pancakes, 32 for fields.
    #[arg(long)]
    nmax: Option<usize>,
    /// Grid "NX,NY,HALF_EXTENT" for rasterizing a pancake spec.
    #[arg(long, value_parser = parse_grid)]
    grid: Option<(usize, usize, f64)>,
    /// Output spectrum CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DesignArgs {
    /// Target weights JSON.
    #[arg(long)]
    target: PathBuf,
    #[arg(long, default_value_t = 32)]
    starts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 20000)]
    max_iter: usize,
    /// Output result JSON path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct NecklaceArgs {
    /// Necklace spec JSON.
    #[arg(long)]
    necklace: PathBuf,
    #[arg(long)]
    nmax: Option<usize>,
    #[arg(long, value_parser = parse_grid)]
    grid: Option<(usize, usize, f64)>,
    /// Output prefix: writes <out>_spectrum.csv and <out>_dislocations.csv.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PropagateArgs {
    /// Pancake spec JSON (analytic mode-expansion route).
    #[arg(long)]
    pancake: Option<PathBuf>,
    /// OAMF1 field file (spectral FFT route).
    #[arg(long)]
    field: Option<PathBuf>,
    #[arg(long)]
    z: f64,
    #[arg(long)]
    wavelength: f64,
    #[arg(long, value_parser = parse_grid)]
    grid: Option<(usize, usize, f64)>,
    /// Output prefix: writes <out>.oamf1 and <out>_spectrum.csv.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ScanArgs {
    #[arg(long)]
    pancake: PathBuf,
    /// Index of the swept vortex.
    #[arg(long)]
    vortex: usize,
    /// Coordinate to sweep: rho or phi.
    #[arg(long)]
    param: String,
    /// Sweep range "START,END".
    #[arg(long, value_parser = parse_pair)]
    range: (f64, f64),
    #[arg(long, default_value_t = 181)]
    steps: usize,
    /// Output scan CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SidebandsArgs {
    #[arg(long)]
    pancake: PathBuf,
    /// Prism angular velocity.
    #[arg(long)]
    omega: f64,
    /// Also synthesize the beat signal and verify the recovery round trip.
    #[arg(long)]
    signal: bool,
    /// Record length (defaults to 64 fundamental beat periods).
    #[arg(long)]
    duration: Option<f64>,
    /// Sample rate (defaults to an integer sample count per beat period).
    #[arg(long)]
    rate: Option<f64>,
    /// Output prefix: writes <out>.csv and, with --signal, <out>_signal.csv.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RenderArgs {
    #[arg(long)]
    pancake: Option<PathBuf>,
    #[arg(long)]
    necklace: Option<PathBuf>,
    /// What to tabulate: amplitude or phase.
    #[arg(long, default_value = "amplitude")]
    what: String,
    #[arg(long, value_parser = parse_grid)]
    grid: Option<(usize, usize, f64)>,
    /// Output prefix: writes <out>_<what>.csv and <out>.oamf1.
    #[arg(long)]
    out: PathBuf,
}

fn parse_pair(s: &str) -> std::result::Result<(f64, f64), String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected \"A,B\", got \"{s}\""));
    }
    let a = parts[0].trim().parse().map_err(|e| format!("bad number '{}': {e}", parts[0]))?;
    let b = parts[1].trim().parse().map_err(|e| format!("bad number '{}': {e}", parts[1]))?;
    Ok((a, b))
}

fn parse_grid(s: &str) -> std::result::Result<(usize, usize, f64), String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("expected \"NX,NY,HALF_EXTENT\", got \"{s}\""));
    }
    let nx = parts[0].trim().parse().map_err(|e| format!("bad nx: {e}"))?;
    let ny = parts[1].trim().parse().map_err(|e| format!("bad ny: {e}"))?;
    let ext = parts[2].trim().parse().map_err(|e| format!("bad extent: {e}"))?;
    Ok((nx, ny, ext))
}

/// Failure carrying the process exit code.
struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Io(_) | Error::Format(_) => EXIT_IO,
            _ => EXIT_VALIDATION,
        };
        CliError { code, message: e.to_string() }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path)
        .map_err(|e| CliError::new(EXIT_IO, format!("cannot read {}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text)
        .map_err(|e| CliError::new(EXIT_IO, format!("cannot write {}: {e}", path.display())))
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut name = prefix.file_name().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(suffix);
    prefix.with_file_name(name)
}

fn grid_for(source: &dyn FieldSource, grid: Option<(usize, usize, f64)>) -> GridSpec {
    match grid {
        Some((nx, ny, half_extent)) => GridSpec { nx, ny, half_extent },
        None => GridSpec::default_for(source),
    }
}

fn grid_comment(g: &GridSpec) -> (String, String) {
    ("grid".into(), format!("{}x{},half_extent={}", g.nx, g.ny, fmt17(g.half_extent)))
}

fn spectrum_csv_string(
    spectrum: &OamSpectrum,
    weights: &WeightVector,
    comments: &[(String, String)],
) -> CliResult<String> {
    let mut buf = Vec::new();
    io::write_spectrum_csv(&mut buf, spectrum, weights, comments).map_err(CliError::from)?;
    Ok(String::from_utf8(buf).expect("CSV is ASCII"))
}

fn run_analyze(args: &AnalyzeArgs) -> CliResult<()> {
    let origin = args.origin.unwrap_or((0.0, 0.0));
    let pancake = match &args.pancake {
        Some(path) => Some(io::pancake_from_json(&read_text(path)?)?),
        None => None,
    };
    let field = match &args.field {
        Some(path) => Some(io::read_field_from_path(path)?),
        None => None,
    };
    if pancake.is_none() && field.is_none() {
        return Err(CliError::new(EXIT_VALIDATION, "analyze needs --pancake and/or --field"));
    }

    let mut comments: Vec<(String, String)> = Vec::new();
    comments.push(("origin".into(), format!("{},{}", fmt17(origin.0), fmt17(origin.1))));

    let (spectrum, weights) = if let Some(p) = &pancake {
        let analytic = pancake_cn(p);
        let analytic_weights = weights_from_cn(&analytic)?;
        let n_max = args.nmax.unwrap_or(p.vortex_count() + 5);
        // numeric route: the provided field, or a rasterization of the spec
        let field = match field {
            Some(f) => f,
            None => {
                let grid = grid_for(p, args.grid);
                comments.push(grid_comment(&grid));
                rasterize(p, &grid)?
            }
        };
        let numeric = numeric::spectrum_from_field_with(
            &field,
            origin,
            &DecomposeOptions::with_n_max(n_max),
        )?;
        let mut worst = 0.0f64;
        for (&n, &c_ana) in analytic.entries() {
            if analytic_weights.p(n) > 1e-9 {
                worst = worst.max((numeric.c(n) - c_ana).abs() / c_ana);
            }
        }
        comments.push(("n_max".into(), n_max.to_string()));
        comments.push(("crosscheck_rel".into(), fmt17(worst)));
        if worst > CROSSCHECK_LIMIT {
            write_text(&args.out, &spectrum_csv_string(&analytic, &analytic_weights, &comments)?)?;
            return Err(CliError::new(
                EXIT_CROSSCHECK,
                format!(
                    "analytic/numeric cross-check failed: {worst:.3e} > {CROSSCHECK_LIMIT:.1e}"
                ),
            ));
        }
        (analytic, analytic_weights)
    } else {
        let field = field.expect("checked above");
        let n_max = args.nmax.unwrap_or(32);
        comments.push(("n_max".into(), n_max.to_string()));
        let numeric = numeric::spectrum_from_field(&field, origin, n_max)?;
        let w = weights_from_cn(&numeric)?;
        (numeric, w)
    };

    write_text(&args.out, &spectrum_csv_string(&spectrum, &weights, &comments)?)?;
    println!("wrote {}", args.out.display());
    Ok(())
}

fn run_design(args: &DesignArgs) -> CliResult<()> {
    let target = io::target_from_json(&read_text(&args.target)?)?;
    let result = design_general(&target, args.starts, args.seed, args.max_iter)?;
    write_text(&args.out, &io::design_result_to_json(&result))?;
    println!(
        "residual {} after {} starts -> {}",
        fmt17(result.residual),
        result.starts,
        args.out.display()
    );
    if !result.converged {
        return Err(CliError::new(
            EXIT_CROSSCHECK,
            format!("residual {:.3e} above tolerance {:.3e}", result.residual, target.tolerance()),
        ));
    }
    Ok(())
}

fn run_necklace(args: &NecklaceArgs) -> CliResult<()> {
    let neck = io::necklace_from_json(&read_text(&args.necklace)?)?;
    let grid = grid_for(&neck, args.grid);
    let field = rasterize(&neck, &grid)?;
    let n_max = args.nmax.unwrap_or(32);
    let spectrum = numeric::spectrum_from_field(&field, (0.0, 0.0), n_max)?;
    let weights = weights_from_cn(&spectrum)?;
    let dislocations = numeric::locate_dislocations(&field);
    // a circle just outside the outermost dislocation stays in lit territory
    let r_disloc = dislocations
        .dislocations
        .iter()
        .map(|d| d.x.hypot(d.y))
        .fold(0.0, f64::max);
    let radius = (r_disloc + neck.w0()).min(0.9 * grid.half_extent);
    let net = numeric::net_topological_charge(&field, radius)?;

    let comments = vec![
        ("separation".into(), fmt17(neck.d())),
        ("pearl_m".into(), neck.m().to_string()),
        grid_comment(&grid),
        ("n_max".into(), n_max.to_string()),
        ("dislocations".into(), dislocations.len().to_string()),
        ("net_charge".into(), net.to_string()),
    ];
    let spath = with_suffix(&args.out, "_spectrum.csv");
    write_text(&spath, &spectrum_csv_string(&spectrum, &weights, &comments)?)?;
    let mut buf = Vec::new();
    io::write_dislocation_csv(&mut buf, &dislocations).map_err(CliError::from)?;
    let dpath = with_suffix(&args.out, "_dislocations.csv");
    write_text(&dpath, &String::from_utf8(buf).expect("CSV is ASCII"))?;
    println!(
        "{} dislocations, net charge {net} -> {} {}",
        dislocations.len(),
        spath.display(),
        dpath.display()
    );
    Ok(())
}

fn run_propagate(args: &PropagateArgs) -> CliResult<()> {
    let spec = PropagationSpec::new(args.wavelength, args.z)?;
    let out_field = match (&args.pancake, &args.field) {
        (Some(_), Some(_)) => {
            return Err(CliError::new(
                EXIT_VALIDATION,
                "give either --pancake or --field, not both",
            ));
        }
        (Some(path), None) => {
            let p = io::pancake_from_json(&read_text(path)?)?;
            let carried = PropagatedPancake::new(&p, &spec);
            let grid = grid_for(&carried, args.grid);
            rasterize(&carried, &grid)?
        }
        (None, Some(path)) => {
            let f = io::read_field_from_path(path)?;
            fresnel_propagate(&f, &spec)?
        }
        (None, None) => {
            return Err(CliError::new(EXIT_VALIDATION, "propagate needs --pancake or --field"));
        }
    };
    let fpath = with_suffix(&args.out, ".oamf1");
    io::write_field_to_path(&fpath, &out_field)?;
    let spectrum = numeric::spectrum_from_field(&out_field, (0.0, 0.0), 32)?;
    let weights = weights_from_cn(&spectrum)?;
    let comments = vec![
        ("z".into(), fmt17(args.z)),
        ("wavelength".into(), fmt17(args.wavelength)),
        ("power".into(), fmt17(out_field.power())),
    ];
    let spath = with_suffix(&args.out, "_spectrum.csv");
    write_text(&spath, &spectrum_csv_string(&spectrum, &weights, &comments)?)?;
    println!("wrote {} {}", fpath.display(), spath.display());
    Ok(())
}

fn run_scan(args: &ScanArgs) -> CliResult<()> {
    let pancake = io::pancake_from_json(&read_text(&args.pancake)?)?;
    let param: ScanParameter = args.param.parse()?;
    let table = scan_parameter(&pancake, args.vortex, param, args.range, args.steps)?;
    let mut buf = Vec::new();
    io::write_scan_csv(&mut buf, &args.param, &table.modes, &table.rows).map_err(CliError::from)?;
    write_text(&args.out, &String::from_utf8(buf).expect("CSV is ASCII"))?;
    println!("wrote {}", args.out.display());
    Ok(())
}

fn run_sidebands(args: &SidebandsArgs) -> CliResult<()> {
    let pancake = io::pancake_from_json(&read_text(&args.pancake)?)?;
    let weights = pancake_weights(&pancake)?;
    let comb = sidebands_from_weights(&weights, args.omega)?;
    let mut buf = Vec::new();
    io::write_sideband_csv(&mut buf, &comb).map_err(CliError::from)?;
    let cpath = with_suffix(&args.out, ".csv");
    write_text(&cpath, &String::from_utf8(buf).expect("CSV is ASCII"))?;
    println!("wrote {}", cpath.display());

    if args.signal || args.duration.is_some() || args.rate.is_some() {
        let n_abs = comb.lines().iter().map(|l| l.n.unsigned_abs()).max().unwrap_or(0);
        let duration = args.duration.unwrap_or(64.0 * std::f64::consts::PI / args.omega);
        let per_period = 64.max(8 * (n_abs as usize + 1)) as f64;
        let rate = args.rate.unwrap_or(per_period * args.omega / std::f64::consts::PI);
        let signal = synthesize_beat_signal(&comb, duration, rate)?;
        let mut buf = Vec::new();
        io::write_time_series_csv(&mut buf, signal.dt, &signal.samples).map_err(CliError::from)?;
        let tpath = with_suffix(&args.out, "_signal.csv");
        write_text(&tpath, &String::from_utf8(buf).expect("CSV is ASCII"))?;

        let n_max = comb.lines().iter().map(|l| l.n).max().unwrap_or(0).max(0) as usize;
        let recovered = recover_weights(&signal, args.omega, n_max)?;
        let err = recovered.weights.linf_distance(&weights);
        println!("round trip L-inf error {}", fmt17(err));
        if err > 1e-3 {
            return Err(CliError::new(
                EXIT_CROSSCHECK,
                format!("sideband round trip failed: {err:.3e} > 1e-3"),
            ));
        }
    }
    Ok(())
}

fn run_render(args: &RenderArgs) -> CliResult<()> {
    let field = match (&args.pancake, &args.necklace) {
        (Some(_), Some(_)) => {
            return Err(CliError::new(
                EXIT_VALIDATION,
                "give either --pancake or --necklace, not both",
            ));
        }
        (Some(path), None) => {
            let p = io::pancake_from_json(&read_text(path)?)?;
            rasterize(&p, &grid_for(&p, args.grid))?
        }
        (None, Some(path)) => {
            let n = io::necklace_from_json(&read_text(path)?)?;
            rasterize(&n, &grid_for(&n, args.grid))?
        }
        (None, None) => {
            return Err(CliError::new(EXIT_VALIDATION, "render needs --pancake or --necklace"));
        }
    };
    let values: Vec<f64> = match args.what.as_str() {
        "amplitude" => field.values().iter().map(|v| v.norm()).collect(),
        "phase" => field.values().iter().map(|v| v.arg()).collect(),
        other => {
            return Err(CliError::new(
                EXIT_VALIDATION,
                format!("--what must be amplitude or phase, got '{other}'"),
            ));
        }
    };
    let mut buf = Vec::new();
    io::write_matrix_csv(&mut buf, field.ny(), field.nx(), &values).map_err(CliError::from)?;
    let mpath = with_suffix(&args.out, &format!("_{}.csv", args.what));
    write_text(&mpath, &String::from_utf8(buf).expect("CSV is ASCII"))?;
    let fpath = with_suffix(&args.out, ".oamf1");
    io::write_field_to_path(&fpath, &field)?;
    println!("wrote {} {}", mpath.display(), fpath.display());
    Ok(())
}

fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Analyze(a) => run_analyze(a),
        Command::Design(a) => run_design(a),
        Command::Necklace(a) => run_necklace(a),
        Command::Propagate(a) => run_propagate(a),
        Command::Scan(a) => run_scan(a),
        Command::Sidebands(a) => run_sidebands(a),
        Command::Render(a) => run_render(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
