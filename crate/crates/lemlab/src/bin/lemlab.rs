//! Command-line front end: sampling, critical points, component counts,
//! certificates, experiments, phase sweeps, analytics, and SVG rendering.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use lemlab::critical::{
    convex_hull, distance_to_convex_hull, oracle_critical_points, solve_critical_points,
    SolveOptions,
};
use lemlab::ensembles::{
    sample_polynomial, theoretical_properties, EnsembleFamily, EnsembleSpec, SeedPolicy,
};
use lemlab::error::Error;
use lemlab::experiment::{
    self, export_csv, phase_sweep, run_experiment, ExperimentConfig,
};
use lemlab::io::RootsDocument;
use lemlab::potential::{
    cauchy_transform, clt_diagnostic, inverse_moment, moment_f_p, potential_circle,
    potential_disk, PotentialProfile,
};
use lemlab::render::{extract_contours, render_svg, Overlays};
use lemlab::topology::{
    count_components_exact, count_components_grid, count_isolated, good_root_certificate,
    DEGENERACY_TOL,
};

#[derive(Parser)]
#[command(
    name = "lemlab",
    about = "Random polynomial lemniscates: sampling, counting, experiments, rendering",
    version
)]
struct Cli {
    /// Master seed for anything that draws randomness.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Worker threads for experiment campaigns (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Output path (defaults to stdout for JSON outputs).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Suppress progress notes on stderr.
    #[arg(long, global = true, default_value_t = false)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Disk,
    Circle,
}

impl From<FamilyArg> for EnsembleFamily {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Disk => EnsembleFamily::UniformDisk,
            FamilyArg::Circle => EnsembleFamily::UniformCircle,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Exact,
    Grid,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a polynomial's roots from an ensemble and emit the roots JSON.
    Sample(SampleArgs),
    /// Solve the critical points of a roots document.
    Critical(InputArg),
    /// Count lemniscate components of a roots document.
    Count(CountArgs),
    /// Tally isolated-component and good-root certificates.
    Certify(InputArg),
    /// Run a Monte Carlo campaign from a config file.
    Experiment(ExperimentArgs),
    /// Sweep the scale r at fixed degree and compare against the phase table.
    Sweep(SweepArgs),
    /// Evaluate potentials, Cauchy transforms, and moments at given points.
    Analyze(AnalyzeArgs),
    /// Render a lemniscate as SVG.
    Render(RenderArgs),
    /// Run the built-in oracle-equivalence and invariant checks.
    Selftest(SelftestArgs),
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    r: f64,
    /// Trial index within the seed's stream space.
    #[arg(long, default_value_t = 0)]
    trial: u64,
}

#[derive(Args)]
struct InputArg {
    /// Roots JSON document ("-" for stdin).
    input: String,
}

#[derive(Args)]
struct CountArgs {
    /// Roots JSON document ("-" for stdin).
    input: String,
    #[arg(long, value_enum, default_value = "exact")]
    method: MethodArg,
    /// Grid refinement ceiling for the grid method.
    #[arg(long, default_value_t = 2048)]
    resolution: usize,
    /// Degeneracy band around log|P(beta)| = 0.
    #[arg(long, default_value_t = DEGENERACY_TOL)]
    tol: f64,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment config JSON.
    #[arg(long)]
    config: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    /// Comma-separated list of scales, e.g. "0.9,1.0,1.1".
    #[arg(long, value_delimiter = ',')]
    r_values: Vec<f64>,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 50)]
    trials: usize,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    #[arg(long, default_value_t = 1.0)]
    r: f64,
    /// Evaluation points as "re,im", repeatable.
    #[arg(long = "z", value_name = "RE,IM", required = true)]
    points: Vec<String>,
    /// Moment orders p to evaluate (requires r = 1).
    #[arg(long = "p", value_name = "P")]
    moment_orders: Vec<f64>,
    /// Run the CLT diagnostic at each point with this degree.
    #[arg(long)]
    clt_n: Option<usize>,
    /// Trials for the CLT diagnostic.
    #[arg(long, default_value_t = 2000)]
    clt_trials: usize,
}

#[derive(Args)]
struct RenderArgs {
    /// Roots JSON document ("-" for stdin).
    input: String,
    #[arg(long, default_value_t = 512)]
    resolution: usize,
    /// Draw a dashed unit reference circle.
    #[arg(long, default_value_t = false)]
    circle: bool,
    /// Mark the roots.
    #[arg(long, default_value_t = false)]
    roots: bool,
    /// Mark the critical points (solves them if absent from the document).
    #[arg(long, default_value_t = false)]
    critical: bool,
}

#[derive(Args)]
struct SelftestArgs {
    /// Smaller instance counts.
    #[arg(long, default_value_t = false)]
    fast: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Usage problems exit 1; --help/--version print and exit 0.
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    if let Some(workers) = cli.workers {
        if let Err(err) = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
        {
            eprintln!("error: could not size the worker pool: {err}");
            return ExitCode::from(1);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(if err.is_numerical() { 2 } else { 1 })
        }
    }
}

fn read_doc(input: &str) -> Result<RootsDocument, Error> {
    if input == "-" {
        RootsDocument::from_reader(std::io::stdin().lock())
    } else {
        RootsDocument::read(Path::new(input))
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => {
            std::fs::write(path, text)?;
            Ok(())
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            if !text.ends_with('\n') {
                stdout.write_all(b"\n")?;
            }
            Ok(())
        }
    }
}

fn parse_point(text: &str) -> Result<Complex64, Error> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        return Err(Error::InvalidInput(format!(
            "point {text:?} should look like \"re,im\""
        )));
    }
    let re: f64 = parts[0]
        .trim()
        .parse()
        .map_err(|_| Error::InvalidInput(format!("bad real part in {text:?}")))?;
    let im: f64 = parts[1]
        .trim()
        .parse()
        .map_err(|_| Error::InvalidInput(format!("bad imaginary part in {text:?}")))?;
    Ok(Complex64::new(re, im))
}

fn run(cli: &Cli) -> Result<(), Error> {
    match &cli.command {
        Command::Sample(args) => {
            let spec = EnsembleSpec::new(args.family.into(), args.r, args.n)?;
            let seed = SeedPolicy::new(cli.seed, args.trial);
            let poly = sample_polynomial(&spec, &seed);
            let doc = RootsDocument::from_sample(&spec, &seed, &poly);
            emit(&cli.out, &doc.to_json_string()?)
        }
        Command::Critical(args) => {
            let doc = read_doc(&args.input)?;
            let poly = doc.to_polynomial()?;
            let cps = solve_critical_points(&poly, &SolveOptions::default())?;
            if !cli.quiet {
                eprintln!(
                    "solved {} critical points in {} sweeps",
                    cps.len(),
                    cps.iterations
                );
            }
            let doc = doc.with_critical(&cps);
            emit(&cli.out, &doc.to_json_string()?)
        }
        Command::Count(args) => {
            let doc = read_doc(&args.input)?;
            let poly = doc.to_polynomial()?;
            let value = match args.method {
                MethodArg::Exact => {
                    let cps = match doc.critical_set() {
                        Some(cps) => cps,
                        None => solve_critical_points(&poly, &SolveOptions::default())?,
                    };
                    count_components_exact(&poly, &cps, args.tol)?.to_json()
                }
                MethodArg::Grid => count_components_grid(&poly, args.resolution).to_json(),
                MethodArg::Both => {
                    let cps = match doc.critical_set() {
                        Some(cps) => cps,
                        None => solve_critical_points(&poly, &SolveOptions::default())?,
                    };
                    serde_json::json!({
                        "exact": count_components_exact(&poly, &cps, args.tol)?.to_json(),
                        "grid": count_components_grid(&poly, args.resolution).to_json(),
                    })
                }
            };
            emit(&cli.out, &serde_json::to_string_pretty(&value)?)
        }
        Command::Certify(args) => {
            let doc = read_doc(&args.input)?;
            let poly = doc.to_polynomial()?;
            let n = poly.degree();
            let cps = match doc.critical_set() {
                Some(cps) => cps,
                None => solve_critical_points(&poly, &SolveOptions::default())?,
            };
            let nf = n as f64;
            let r_isolated = nf.powi(-6);
            let r_good = nf.powf(-0.75);
            let isolated = count_isolated(&poly)?;
            let mut good = 0usize;
            for i in 0..n {
                if good_root_certificate(&poly, &cps, i, r_good)?.holds {
                    good += 1;
                }
            }
            let pairing = lemlab::critical::pairing_statistics(&poly, &cps)?;
            let value = serde_json::json!({
                "n": n,
                "isolated": {
                    "radius": r_isolated,
                    "count": isolated,
                    "fraction": isolated as f64 / nf,
                },
                "good_roots": {
                    "radius": r_good,
                    "count": good,
                    "fraction": good as f64 / nf,
                },
                "pairing": {
                    "radius": pairing.pairing_radius,
                    "annulus_unique_fraction": pairing.annulus_unique_fraction(),
                },
            });
            emit(&cli.out, &serde_json::to_string_pretty(&value)?)
        }
        Command::Experiment(args) => {
            let config: ExperimentConfig =
                serde_json::from_str(&std::fs::read_to_string(&args.config)?)?;
            if !cli.quiet {
                eprintln!(
                    "running {} degrees x {} trials ({} r = {})",
                    config.degrees.len(),
                    config.trials_per_degree,
                    config.family,
                    config.r
                );
            }
            let result = run_experiment(&config)?;
            let outputs = config.outputs.clone().unwrap_or_default();
            let json_path = outputs
                .json
                .or_else(|| cli.out.as_ref().map(|p| p.with_extension("json")));
            let csv_path = outputs
                .csv
                .or_else(|| cli.out.as_ref().map(|p| p.with_extension("csv")));
            match json_path {
                Some(path) => {
                    experiment::persist(&result, &path)?;
                    if !cli.quiet {
                        eprintln!("wrote {}", path.display());
                    }
                }
                None => emit(&None, &serde_json::to_string_pretty(&result)?)?,
            }
            if let Some(path) = csv_path {
                export_csv(&result, &path)?;
                if !cli.quiet {
                    eprintln!("wrote {}", path.display());
                }
            }
            if !result.valid {
                return Err(Error::NoConvergence {
                    indices: vec![],
                    sweeps: result.total_failures,
                });
            }
            Ok(())
        }
        Command::Sweep(args) => {
            let sweep = phase_sweep(
                args.family.into(),
                &args.r_values,
                args.n,
                args.trials,
                cli.seed,
            )?;
            if !cli.quiet {
                for row in &sweep.rows {
                    eprintln!(
                        "r = {:>6.3}: mean {:>10.3} ({}) pass: {}",
                        row.r,
                        row.mean_count,
                        row.prediction.label(),
                        row.pass
                            .map(|p| p.to_string())
                            .unwrap_or_else(|| "n/a".into())
                    );
                }
            }
            emit(&cli.out, &serde_json::to_string_pretty(&sweep)?)
        }
        Command::Analyze(args) => {
            let family: EnsembleFamily = args.family.into();
            let at_unit_scale = (args.r - 1.0).abs() < 1e-12;
            let mut rows = Vec::new();
            for text in &args.points {
                let z = parse_point(text)?;
                let spec = EnsembleSpec::new(family, args.r, 1)?;
                let potential = match family {
                    EnsembleFamily::UniformDisk => potential_disk(z, args.r),
                    EnsembleFamily::UniformCircle => potential_circle(z, args.r),
                };
                let cauchy = cauchy_transform(z, &spec);
                let mut row = serde_json::json!({
                    "z": [z.re, z.im],
                    "potential": potential,
                    "cauchy": [cauchy.re, cauchy.im],
                });
                if at_unit_scale && z.norm() <= 1.0 + 1e-12 {
                    let profile = PotentialProfile::new(spec);
                    if let Ok(s2) = profile.sigma2(z) {
                        row["sigma2"] = serde_json::json!(s2);
                    }
                    let mut moments = serde_json::Map::new();
                    for &p in &args.moment_orders {
                        moments.insert(format!("{p}"), serde_json::json!(moment_f_p(z, p, &spec)?));
                    }
                    if !moments.is_empty() {
                        row["abs_log_moments"] = serde_json::Value::Object(moments);
                    }
                    if family == EnsembleFamily::UniformDisk {
                        let mut inv = serde_json::Map::new();
                        for &p in &args.moment_orders {
                            if 0.0 < p && p < 2.0 {
                                inv.insert(
                                    format!("{p}"),
                                    serde_json::json!(inverse_moment(z, p)?),
                                );
                            }
                        }
                        if !inv.is_empty() {
                            row["inverse_moments"] = serde_json::Value::Object(inv);
                        }
                    }
                    if let Some(n) = args.clt_n {
                        let spec_n = EnsembleSpec::new(family, args.r, n)?;
                        match clt_diagnostic(&spec_n, z, args.clt_trials, cli.seed) {
                            Ok(diag) => row["clt"] = serde_json::to_value(&diag)?,
                            Err(Error::DegenerateVariance) => {
                                row["clt"] = serde_json::json!("degenerate variance")
                            }
                            Err(err) => return Err(err),
                        }
                    }
                }
                rows.push(row);
            }
            emit(&cli.out, &serde_json::to_string_pretty(&rows)?)
        }
        Command::Render(args) => {
            let doc = read_doc(&args.input)?;
            let poly = doc.to_polynomial()?;
            let contours = extract_contours(&poly, args.resolution)?;
            if contours.near_degenerate && !cli.quiet {
                eprintln!(
                    "note: contour passes within tolerance of a sampled value; \
                     topology is sensitive here"
                );
            }
            let solved;
            let cps = if args.critical {
                match doc.critical_set() {
                    Some(cps) => {
                        solved = cps;
                        Some(&solved)
                    }
                    None => {
                        solved = solve_critical_points(&poly, &SolveOptions::default())?;
                        Some(&solved)
                    }
                }
            } else {
                None
            };
            let overlays = Overlays {
                roots: args.roots.then_some(poly.roots()),
                critical_points: cps,
                reference_circle: args.circle.then_some(1.0),
            };
            let path = cli
                .out
                .clone()
                .unwrap_or_else(|| PathBuf::from("lemniscate.svg"));
            render_svg(&contours, &overlays, &path)?;
            if !cli.quiet {
                eprintln!(
                    "wrote {} ({} contour{})",
                    path.display(),
                    contours.contours.len(),
                    if contours.contours.len() == 1 { "" } else { "s" }
                );
            }
            Ok(())
        }
        Command::Selftest(args) => selftest(args.fast, cli.seed, cli.quiet),
    }
}

fn selftest(fast: bool, seed: u64, quiet: bool) -> Result<(), Error> {
    let mut failures = 0usize;
    let mut check = |name: &str, ok: bool, detail: String| {
        if ok {
            println!("PASS {name}");
        } else {
            failures += 1;
            println!("FAIL {name}: {detail}");
        }
    };
    let _ = quiet;

    // Solver vs coefficient oracle.
    let instances = if fast { 25 } else { 100 };
    let mut worst_hausdorff = 0.0f64;
    for i in 0..instances {
        let family = if i % 2 == 0 {
            EnsembleFamily::UniformDisk
        } else {
            EnsembleFamily::UniformCircle
        };
        let n = 3 + (i % 10);
        let spec = EnsembleSpec::new(family, 1.0, n)?;
        let poly = sample_polynomial(&spec, &SeedPolicy::new(seed.wrapping_add(i as u64), 0));
        let solved = solve_critical_points(&poly, &SolveOptions::default())?;
        let oracle = oracle_critical_points(&poly)?;
        worst_hausdorff = worst_hausdorff.max(hausdorff(&solved.points, &oracle.points));
    }
    check(
        "critical solver vs coefficient oracle",
        worst_hausdorff < 1e-7,
        format!("worst hausdorff {worst_hausdorff:.3e}"),
    );

    // Exact counter vs grid oracle.
    let instances = if fast { 20 } else { 80 };
    let mut clean_disagreements = 0usize;
    for i in 0..instances {
        let family = if i % 2 == 0 {
            EnsembleFamily::UniformDisk
        } else {
            EnsembleFamily::UniformCircle
        };
        let n = 2 + (i % 13);
        let spec = EnsembleSpec::new(family, 1.0, n)?;
        let poly =
            sample_polynomial(&spec, &SeedPolicy::new(seed.wrapping_add(7000 + i as u64), 0));
        let cps = solve_critical_points(&poly, &SolveOptions::default())?;
        let exact = count_components_exact(&poly, &cps, DEGENERACY_TOL)?;
        let grid = count_components_grid(&poly, 2048);
        if exact.count != grid.count && !exact.degenerate && !grid.degenerate {
            clean_disagreements += 1;
        }
    }
    check(
        "exact counter vs grid oracle",
        clean_disagreements == 0,
        format!("{clean_disagreements} clean disagreements"),
    );

    // Vieta and Gauss-Lucas on a midsize solve.
    let spec = EnsembleSpec::new(EnsembleFamily::UniformDisk, 1.0, 128)?;
    let poly = sample_polynomial(&spec, &SeedPolicy::new(seed.wrapping_add(31), 0));
    let cps = solve_critical_points(&poly, &SolveOptions::default())?;
    let sum_roots: Complex64 = poly.roots().iter().sum();
    let sum_cps: Complex64 = cps.points.iter().sum();
    let vieta = (sum_cps - sum_roots * (127.0 / 128.0)).norm();
    check(
        "vieta sum identity at n = 128",
        vieta <= 1e-8 * (1.0 + sum_roots.norm()),
        format!("residual {vieta:.3e}"),
    );
    let hull = convex_hull(poly.roots());
    let worst_hull = cps
        .points
        .iter()
        .map(|&b| distance_to_convex_hull(&hull, b))
        .fold(0.0, f64::max);
    check(
        "gauss-lucas containment at n = 128",
        worst_hull < 1e-8,
        format!("worst distance {worst_hull:.3e}"),
    );

    // Potential closed forms against quadrature and known values.
    let v = inverse_moment(Complex64::new(0.0, 0.0), 1.0)?;
    check(
        "inverse moment closed form (p = 1)",
        (v - 2.0).abs() < 1e-6,
        format!("got {v}"),
    );
    let spec1 = EnsembleSpec::new(EnsembleFamily::UniformCircle, 1.0, 1)?;
    let f2 = moment_f_p(Complex64::new(1.0, 0.0), 2.0, &spec1)?;
    let expect = std::f64::consts::PI.powi(2) / 12.0;
    check(
        "circle second log-moment on support",
        (f2 - expect).abs() < 1e-5,
        format!("got {f2}, expect {expect}"),
    );

    // Phase predictions for the table rows.
    let cases = [
        (EnsembleFamily::UniformCircle, 0.9, "one component"),
        (EnsembleFamily::UniformCircle, 1.1, "n"),
        (EnsembleFamily::UniformDisk, 1.0, "sqrt(n) order"),
    ];
    let mut phase_ok = true;
    for (family, r, expect) in cases {
        let spec = EnsembleSpec::new(family, r, 100)?;
        if theoretical_properties(&spec).phase.label() != expect {
            phase_ok = false;
        }
    }
    check("phase table predictions", phase_ok, "mismatch".into());

    if failures == 0 {
        println!("selftest: all checks passed");
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "{failures} selftest check(s) failed"
        )))
    }
}

fn hausdorff(a: &[Complex64], b: &[Complex64]) -> f64 {
    let one_way = |p: &[Complex64], q: &[Complex64]| {
        p.iter()
            .map(|&x| {
                q.iter()
                    .map(|&y| (x - y).norm())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}
