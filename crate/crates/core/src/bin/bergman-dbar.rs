use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use bergman_dbar::dbar::{solve_patched, solve_plain, PartitionOfUnity, SolveOptions, SolverReport, Source};
use bergman_dbar::density::density_report;
use bergman_dbar::extremal::{build_ga_family, solve_extremal_general, solve_extremal_p2, GaSettings};
use bergman_dbar::geometry::{build_net, build_separated, separation_constant, PointSet};
use bergman_dbar::interpolation::{interpolate, InterpolationOptions, Solver, TargetValues};
use bergman_dbar::io::{self, RunConfig};
use bergman_dbar::quad::DiskGrid;
use bergman_dbar::report::{self, num, CsvTable};
use bergman_dbar::suites::{run_suite, Suite, SuiteConfig};
use bergman_dbar::weights::WeightEval;
use bergman_dbar::{Error, C64};

#[derive(Parser)]
#[command(name = "bergman-dbar", version, about = "Bergman-space interpolation and weighted d-bar experiments")]
struct Cli {
    /// TOML run configuration; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a separated point set (a covering net or a sparse lattice).
    GenLattice(GenLattice),
    /// Tabulate k_Z, log|Psi_Z|, log sigma_Z and lap k_Z at given points.
    EvalWeight(EvalWeight),
    /// Solve the extremal problem for a zero set.
    Extremal(Extremal),
    /// Solve (1-|z|^2) dbar u = f for a smooth bump f.
    SolveDbar(SolveDbar),
    /// Interpolate target values on a point set.
    Interpolate(Interpolate),
    /// Density report and criterion margins.
    Density(Density),
    /// Run a property suite; exit 1 when a check fails.
    Verify(Verify),
}

#[derive(Args)]
struct GenLattice {
    /// Covering radius of a net with separation eta/2.
    #[arg(long, conflicts_with = "separation")]
    eta: Option<f64>,
    /// Greedy lattice with this pseudo-hyperbolic separation.
    #[arg(long)]
    separation: Option<f64>,
    #[arg(long)]
    rmax: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalWeight {
    #[arg(long)]
    points: PathBuf,
    /// Evaluation points as `re,im`; repeatable.
    #[arg(long = "at", value_parser = parse_complex, num_args = 1.., required = true)]
    at: Vec<C64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Extremal {
    /// Prescribed zeros (point-set file).
    #[arg(long)]
    zeros: PathBuf,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    #[arg(long, default_value_t = 8)]
    degree: usize,
    #[arg(long, default_value_t = 48)]
    n_radial: usize,
    /// Model file for the extremal function.
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverKind {
    Plain,
    Patched,
}

#[derive(Args)]
struct SolveDbar {
    /// Point set defining the weight (empty when omitted).
    #[arg(long)]
    points: Option<PathBuf>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    m: Option<i32>,
    #[arg(long)]
    n_radial: Option<usize>,
    /// Finest refinement level; level d uses n_radial * 2^d radial cells.
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long, value_parser = parse_complex)]
    center: Option<C64>,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long, value_parser = parse_complex)]
    amplitude: Option<C64>,
    #[arg(long, value_enum, default_value_t = SolverKind::Plain)]
    solver: SolverKind,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Residual against grid depth, as an (x, y) series.
    #[arg(long)]
    series: Option<PathBuf>,
}

#[derive(Args)]
struct Interpolate {
    /// Point set with a value on every entry.
    #[arg(long, conflicts_with = "points")]
    targets: Option<PathBuf>,
    /// Point set; targets are random unimodular values from the seed.
    #[arg(long)]
    points: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    p: Option<f64>,
    /// Bump radius of the first-step interpolant.
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    n_radial: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-node values `f(a)` next to the targets.
    #[arg(long)]
    nodes: Option<PathBuf>,
}

#[derive(Args)]
struct Density {
    #[arg(long)]
    points: Option<PathBuf>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    radii: Option<Vec<f64>>,
    /// Centers: the origin and the points with |b| up to this radius.
    #[arg(long)]
    center_radius: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Circle-mean margin against r, as an (x, y) series.
    #[arg(long)]
    series: Option<PathBuf>,
}

#[derive(Args)]
struct Verify {
    #[arg(long)]
    suite: String,
    #[arg(long)]
    seed: Option<u64>,
    /// Multiply k_Z by this factor (negative control).
    #[arg(long)]
    weight_scale: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_complex(s: &str) -> Result<C64, String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected re,im, got {s:?}"))?;
    let re: f64 = a.trim().parse().map_err(|e| format!("{a}: {e}"))?;
    let im: f64 = b.trim().parse().map_err(|e| format!("{b}: {e}"))?;
    if !re.is_finite() || !im.is_finite() {
        return Err(format!("non-finite value {s:?}"));
    }
    Ok(C64::new(re, im))
}

enum Failure {
    Assertion(String),
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), Error> {
    match path {
        Some(p) => io::write_text(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_points(path: Option<&Path>) -> Result<PointSet<f64>, Error> {
    path.map(io::read_point_set).unwrap_or_else(|| Ok(PointSet::empty()))
}

fn gen_lattice(a: &GenLattice, cfg: &RunConfig) -> Result<(), Failure> {
    let rmax = a.rmax.or(cfg.lattice.rmax).ok_or_else(|| Error::Parameter("--rmax is required".into()))?;
    let set = match (a.eta.or(cfg.lattice.eta), a.separation.or(cfg.lattice.separation)) {
        (Some(eta), None) => build_net(eta, rmax)?.centers,
        (None, Some(sep)) => build_separated(sep, rmax)?,
        _ => return Err(Error::Parameter("give exactly one of --eta and --separation".into()).into()),
    };
    io::write_point_set(&a.out, &set)?;
    let sep = if set.len() > 1 { separation_constant(&set)? } else { f64::INFINITY };
    println!("points {} separation {}", set.len(), num(sep));
    Ok(())
}

fn eval_weight(a: &EvalWeight) -> Result<(), Failure> {
    let z = io::read_point_set(&a.points)?;
    let w = WeightEval::new(&z);
    let mut t = CsvTable::new(
        "weight of Z: k = (|z|^2/2) sum (1-|a|^2)^2/|1-conj(a) z|^2, |Psi| = sigma e^k",
        &["re", "im", "k", "log_abs_psi", "log_sigma", "lap_k", "invariant_lap_k"],
    );
    for &x in &a.at {
        if x.norm() >= 1.0 {
            return Err(Error::OutsideDisk { re: x.re, im: x.im }.into());
        }
        t.push(vec![
            num(x.re),
            num(x.im),
            num(w.k(x)),
            num(w.log_abs_psi(x)),
            num(w.log_sigma(x)),
            num(w.lap_k(x)),
            num(w.invariant_lap_k(x)),
        ])?;
    }
    emit(a.out.as_deref(), &t.render())?;
    Ok(())
}

fn extremal(a: &Extremal) -> Result<(), Failure> {
    let zeros = io::read_point_set(&a.zeros)?;
    let grid = DiskGrid::build(1.0, a.n_radial, &[])?;
    let sol = if a.p == 2.0 {
        solve_extremal_p2(&zeros, a.degree, &grid)?
    } else {
        solve_extremal_general(&zeros, a.p, a.degree, &grid)?
    };
    let mut t = CsvTable::new(
        "extremal problem: maximize |f(0)| over ||f||_p <= 1 vanishing on the zeros",
        &["p", "zeros", "degree", "value", "norm", "iterations", "converged", "extra_roots"],
    );
    t.push(vec![
        num(a.p),
        zeros.total().to_string(),
        a.degree.to_string(),
        num(sol.value),
        num(sol.norm),
        sol.iterations.to_string(),
        u8::from(sol.converged).to_string(),
        sol.extra_roots.to_string(),
    ])?;
    if let Some(path) = &a.model {
        io::write_text(path, &(io::model_to_json(&sol.model) + "\n"))?;
    }
    emit(a.out.as_deref(), &t.render())?;
    if !sol.converged {
        return Err(Error::Numeric("extremal solver did not converge".into()).into());
    }
    Ok(())
}

fn solve_dbar(a: &SolveDbar, cfg: &RunConfig) -> Result<(), Failure> {
    let c = &cfg.solve;
    let z = load_points(a.points.as_deref())?;
    let p = a.p.or(c.p).unwrap_or(2.0);
    let m = a.m.or(c.m).unwrap_or(2);
    let n_radial = a.n_radial.or(c.n_radial).unwrap_or(16);
    let depth = a.depth.or(c.depth).unwrap_or(1);
    let center = a.center.or(c.center.map(|v| C64::new(v[0], v[1]))).unwrap_or(C64::new(0.2, -0.1));
    let radius = a.radius.or(c.radius).unwrap_or(0.4);
    let amplitude = a.amplitude.or(c.amplitude.map(|v| C64::new(v[0], v[1]))).unwrap_or(C64::new(1.0, 0.0));
    let src = Source::bump(center, radius, amplitude)?;
    let opts = SolveOptions { m, p, ..SolveOptions::default() };
    let mut reports = Vec::new();
    // refinement level d doubles the radial and angular cells d times
    for d in 0..=depth {
        let grid = DiskGrid::build(1.0, n_radial << d, &[])?;
        let sol = match a.solver {
            SolverKind::Plain => solve_plain(&src, &z, &grid, &opts)?,
            SolverKind::Patched => {
                let eta = 0.35;
                let net = build_net(eta, (src.extent() + 0.25).min(0.95))?;
                let pu = PartitionOfUnity::build(&net, &grid)?;
                let settings = GaSettings { n_radial: 16, ..GaSettings::new(p, eta, 0.3) };
                let fam = build_ga_family(&z, pu.centers(), &settings)?;
                solve_patched(&src, &z, &fam, &pu, &grid, &opts)?
            }
        };
        reports.push(SolverReport { depth: d, ..sol.report });
    }
    emit(a.out.as_deref(), &report::solver_table(&reports).render())?;
    if let Some(path) = &a.series {
        let pts: Vec<(f64, f64)> = reports.iter().map(|r| (r.depth as f64, r.residual_ratio)).collect();
        io::write_text(
            path,
            &report::series_table("residual ratio against grid depth", "depth", "residual_ratio", &pts).render(),
        )?;
    }
    if let Some(bad) = reports.iter().find(|r| !r.success) {
        return Err(Error::Numeric(format!(
            "residual {} above tolerance {} at depth {}",
            bad.residual_ratio, bad.tolerance, bad.depth
        ))
        .into());
    }
    Ok(())
}

fn interpolate_cmd(a: &Interpolate, cfg: &RunConfig) -> Result<(), Failure> {
    let c = &cfg.interpolate;
    let (z, targets) = match (&a.targets, &a.points) {
        (Some(t), None) => io::read_targets(t)?,
        (None, Some(pts)) => {
            let z = io::read_point_set(pts)?;
            let seed = a.seed.or(cfg.seed).ok_or_else(|| Error::Parameter("random targets need --seed".into()))?;
            let t = TargetValues::random_unit(z.len(), seed);
            (z, t)
        }
        _ => return Err(Error::Parameter("give --targets or --points".into()).into()),
    };
    let p = a.p.or(c.p).unwrap_or(2.0);
    let opts = InterpolationOptions { eta: a.eta.or(c.eta), ..InterpolationOptions::new(p) };
    let grid = DiskGrid::build(1.0, a.n_radial.or(c.n_radial).unwrap_or(24), &[])?;
    let (f, rep) = interpolate(&z, &targets, &opts, Solver::Plain, &grid)?;
    emit(a.out.as_deref(), &report::interpolation_table(std::slice::from_ref(&rep)).render())?;
    if let Some(path) = &a.nodes {
        let mut t = CsvTable::new("interpolant at the nodes", &["re", "im", "target_re", "target_im", "f_re", "f_im"]);
        for (a, v) in z.values().into_iter().zip(&targets.values) {
            let fa = f.eval(a);
            t.push(vec![num(a.re), num(a.im), num(v.re), num(v.im), num(fa.re), num(fa.im)])?;
        }
        io::write_text(path, &t.render())?;
    }
    if !rep.success {
        return Err(Error::Numeric(format!(
            "interpolation failed: node error {}, residual {}",
            rep.node_err_max, rep.residual
        ))
        .into());
    }
    Ok(())
}

fn density_cmd(a: &Density, cfg: &RunConfig) -> Result<(), Failure> {
    let c = &cfg.density;
    let z = load_points(a.points.as_deref())?;
    let p = a.p.or(c.p).unwrap_or(2.0);
    let radii = a.radii.clone().or(c.radii.clone()).unwrap_or_else(|| vec![0.9, 0.99, 0.999]);
    let cr = a.center_radius.or(c.center_radius).unwrap_or(0.3);
    let centers = bergman_dbar::suites::density_centers(&z, cr, usize::MAX);
    let rep = density_report(&z, p, &radii, &centers)?;
    emit(a.out.as_deref(), &report::density_table(&rep).render())?;
    if let Some(path) = &a.summary {
        io::write_text(path, &report::density_summary_table(&rep).render())?;
    }
    if let Some(path) = &a.series {
        let pts: Vec<(f64, f64)> = rep.radii.iter().copied().zip(rep.margin_means.iter().copied()).collect();
        io::write_text(
            path,
            &report::series_table("circle-mean criterion margin against r", "r", "margin", &pts).render(),
        )?;
    }
    Ok(())
}

fn verify(a: &Verify, cfg: &RunConfig) -> Result<(), Failure> {
    let suite: Suite = a.suite.parse()?;
    let scfg = SuiteConfig {
        seed: a.seed.or(cfg.seed).unwrap_or(1),
        weight_scale: a.weight_scale.or(cfg.verify.weight_scale).unwrap_or(1.0),
    };
    let rep = run_suite(suite, &scfg)?;
    emit(a.out.as_deref(), &rep.table().render())?;
    match rep.first_failure() {
        Some(c) => Err(Failure::Assertion(format!(
            "{} / {} / {}: value {} outside [{}, {}]",
            suite,
            c.group,
            c.name,
            num(c.value),
            c.lower.map(num).unwrap_or_else(|| "-inf".into()),
            c.upper.map(num).unwrap_or_else(|| "inf".into())
        ))),
        None => Ok(()),
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Numeric(_) | Error::Coverage(_) | Error::OnZeroSet => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match cli.config.as_deref().map(RunConfig::read).transpose() {
        Ok(c) => c.unwrap_or_default(),
        Err(e) => {
            eprintln!("error: config: {e}");
            return ExitCode::from(2);
        }
    };
    let result = match &cli.command {
        Command::GenLattice(a) => gen_lattice(a, &cfg),
        Command::EvalWeight(a) => eval_weight(a),
        Command::Extremal(a) => extremal(a),
        Command::SolveDbar(a) => solve_dbar(a, &cfg),
        Command::Interpolate(a) => interpolate_cmd(a, &cfg),
        Command::Density(a) => density_cmd(a, &cfg),
        Command::Verify(a) => verify(a, &cfg),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Assertion(msg)) => {
            eprintln!("assertion failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
