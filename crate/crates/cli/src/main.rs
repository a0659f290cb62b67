//! `timemap`: evaluate pendulum boundary-value time maps, scan the
//! convexity functional, emit bifurcation diagrams and verify branch points
//! against the shooting oracle.
//!
//! Exit codes: 0 success, 1 a numerical check failed, 2 usage/domain error.

mod svg;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_4, PI};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use timemap::analysis;
use timemap::emit::{self, fmt_f64};
use timemap::maps::{self, BoundaryConfig, BranchId, Family};
use timemap::shooting;

#[derive(Parser)]
#[command(
    name = "timemap",
    version,
    about = "Time maps and bifurcation diagrams of the mixed-boundary pendulum problem",
    args_conflicts_with_subcommands = true
)]
struct Cli {
    #[command(subcommand)]
    command: Option<Cmd>,

    /// Table mode: print the requested map value(s) as CSV rows.
    #[command(flatten)]
    table: TableArgs,
}

#[derive(Args, Default)]
struct TableArgs {
    /// Dirichlet angle in radians.
    #[arg(long)]
    phi: Option<f64>,
    /// Angle as a fraction of pi: `p/q` means pi*p/q.
    #[arg(long, conflicts_with = "phi")]
    phi_frac: Option<String>,
    /// Map family: T, T1, I, A, B, C, B', D, D'.
    #[arg(long)]
    family: Option<String>,
    /// Branch label z = y(-L)^2 (branch families).
    #[arg(long)]
    z: Option<f64>,
    /// Orbit label alpha (families T and T1).
    #[arg(long)]
    alpha: Option<f64>,
    /// Section abscissa nu (family T1).
    #[arg(long)]
    nu: Option<f64>,
    /// Winding count k.
    #[arg(long)]
    k: Option<u32>,
    /// key=value config file; flags override it, it overrides defaults.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Scan the convexity functional Phi over (0,2) x (0,pi/2).
    ScanPhi(ScanArgs),
    /// Emit the assembled bifurcation diagram as CSV (optionally SVG).
    Diagram(DiagramArgs),
    /// Verify branch points by direct ODE integration.
    Verify(VerifyArgs),
    /// Run the small-z asymptotic checks.
    Asymptotics(AsympArgs),
}

#[derive(Args)]
struct ScanArgs {
    #[arg(long)]
    phi_count: Option<usize>,
    #[arg(long)]
    z_count: Option<usize>,
    #[arg(long)]
    margin: Option<f64>,
    /// Grid CSV output path.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// JSON summary output path.
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Test-harness hook: inject one Phi <= 0 sentinel into the report.
    #[arg(long, hide = true)]
    inject_sentinel: bool,
}

#[derive(Args)]
struct DiagramArgs {
    #[arg(long)]
    phi: Option<f64>,
    #[arg(long, conflicts_with = "phi")]
    phi_frac: Option<String>,
    #[arg(long)]
    k_max: Option<u32>,
    /// Branch polylines are truncated at 2L > 2*l_max.
    #[arg(long)]
    l_max: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    /// CSV output path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Optional SVG rendering path.
    #[arg(long)]
    svg: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    phi: Option<f64>,
    #[arg(long, conflicts_with = "phi")]
    phi_frac: Option<String>,
    /// Comma-separated families (I,A,B,C,B',D,D'); default all.
    #[arg(long)]
    families: Option<String>,
    /// Samples per family per winding.
    #[arg(long)]
    n: Option<usize>,
    /// Integrator tolerance, in (1e-14, 1e-3).
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    k_max: Option<u32>,
    /// JSON report output path.
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct AsympArgs {
    /// Comma-separated list of angles in radians.
    #[arg(long)]
    phi_list: Option<String>,
    /// CSV output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

/// One flat key=value namespace loaded from `--config`; `#` starts comments.
struct Overlay(HashMap<String, String>);

impl Overlay {
    fn load(path: Option<&Path>) -> Result<Self, String> {
        let mut map = HashMap::new();
        if let Some(p) = path {
            let text = std::fs::read_to_string(p)
                .map_err(|e| format!("cannot read config {}: {e}", p.display()))?;
            for (ln, raw) in text.lines().enumerate() {
                let line = raw.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let (key, val) = line
                    .split_once('=')
                    .ok_or_else(|| format!("{}:{}: expected key=value", p.display(), ln + 1))?;
                map.insert(key.trim().replace('-', "_"), val.trim().to_string());
            }
        }
        Ok(Overlay(map))
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, String> {
        match self.0.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|_| format!("config key {key}: cannot parse {raw:?}")),
        }
    }
}

fn parse_phi_frac(s: &str) -> Result<f64, String> {
    let (p, q) = s
        .split_once('/')
        .ok_or_else(|| format!("--phi-frac expects p/q, got {s:?}"))?;
    let p: u32 = p
        .trim()
        .parse()
        .map_err(|_| format!("bad numerator {p:?}"))?;
    let q: u32 = q
        .trim()
        .parse()
        .map_err(|_| format!("bad denominator {q:?}"))?;
    if q == 0 {
        return Err("--phi-frac denominator must be nonzero".to_string());
    }
    Ok(PI * f64::from(p) / f64::from(q))
}

fn resolve_phi(
    phi: Option<f64>,
    phi_frac: Option<&String>,
    overlay: &Overlay,
) -> Result<f64, String> {
    if let Some(p) = phi {
        return Ok(p);
    }
    if let Some(f) = phi_frac {
        return parse_phi_frac(f);
    }
    if let Some(p) = overlay.get::<f64>("phi")? {
        return Ok(p);
    }
    if let Some(f) = overlay.get::<String>("phi_frac")? {
        return parse_phi_frac(&f);
    }
    Ok(FRAC_PI_4)
}

fn init_threads() {
    if let Ok(v) = std::env::var("TIMEMAP_THREADS") {
        if let Ok(n) = v.trim().parse::<usize>() {
            if n > 0 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
        }
    }
}

fn main() -> ExitCode {
    init_threads();
    let cli = Cli::parse();
    let outcome = match cli.command {
        None => cmd_timemap(cli.table),
        Some(Cmd::ScanPhi(a)) => cmd_scan_phi(a),
        Some(Cmd::Diagram(a)) => cmd_diagram(a),
        Some(Cmd::Verify(a)) => cmd_verify(a),
        Some(Cmd::Asymptotics(a)) => cmd_asymptotics(a),
    };
    match outcome {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("timemap: {msg}");
            ExitCode::from(2)
        }
    }
}

// ---------------------------------------------------------------------------
// table mode
// ---------------------------------------------------------------------------

fn cmd_timemap(args: TableArgs) -> Result<ExitCode, String> {
    let overlay = Overlay::load(args.config.as_deref())?;
    let phi = resolve_phi(args.phi, args.phi_frac.as_ref(), &overlay)?;
    let family_raw = match args.family.or(overlay.get::<String>("family")?) {
        Some(f) => f,
        None => return Err("table mode needs --family (or a subcommand)".to_string()),
    };
    let k = args.k.or(overlay.get("k")?).unwrap_or(0);
    let z = if args.z.is_some() {
        args.z
    } else {
        overlay.get("z")?
    };
    let alpha = if args.alpha.is_some() {
        args.alpha
    } else {
        overlay.get("alpha")?
    };
    let nu = if args.nu.is_some() {
        args.nu
    } else {
        overlay.get("nu")?
    };

    let mut out = String::new();
    out.push_str(&format!("# timemap {}\n", env!("CARGO_PKG_VERSION")));
    out.push_str("family,k,phi,z,alpha,nu,T,dT_dz\n");

    let fam_upper = family_raw.trim().to_ascii_uppercase();
    match fam_upper.as_str() {
        "T" => {
            let alpha = alpha.ok_or("family T needs --alpha")?;
            let t = maps::time_t(alpha).map_err(|e| e.to_string())?;
            out.push_str(&format!(
                "T,0,{},,{},,{},\n",
                fmt_f64(phi),
                fmt_f64(alpha),
                fmt_f64(t)
            ));
        }
        "T1" => {
            let alpha = alpha.ok_or("family T1 needs --alpha")?;
            let nu = nu.ok_or("family T1 needs --nu")?;
            let t = maps::time_t1(alpha, nu).map_err(|e| e.to_string())?;
            out.push_str(&format!(
                "T1,0,{},,{},{},{},\n",
                fmt_f64(phi),
                fmt_f64(alpha),
                fmt_f64(nu),
                fmt_f64(t)
            ));
        }
        other => {
            let family = Family::parse(other).ok_or_else(|| format!("unknown family {other:?}"))?;
            let z = z.ok_or("branch families need --z")?;
            let cfg = maps::make_config(phi).map_err(|e| e.to_string())?;
            let branch = BranchId::new(family, k);
            let t = maps::branch_time(branch, z, &cfg).map_err(|e| e.to_string())?;
            let d = maps::branch_time_derivative(branch, z, &cfg)
                .map(fmt_f64)
                .unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},,,{},{}\n",
                family.label(),
                k,
                fmt_f64(phi),
                fmt_f64(z),
                fmt_f64(t),
                d
            ));
        }
    }
    print!("{out}");
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------
// scan-phi
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct ScanSummary {
    z_count: usize,
    phi_count: usize,
    margin: f64,
    min_phi: f64,
    argmin: ArgMin,
    violations: Vec<[f64; 3]>,
    failures: usize,
}

#[derive(Serialize)]
struct ArgMin {
    z: f64,
    phi: f64,
}

fn cmd_scan_phi(args: ScanArgs) -> Result<ExitCode, String> {
    let overlay = Overlay::load(args.config.as_deref())?;
    let phi_count = args.phi_count.or(overlay.get("phi_count")?).unwrap_or(200);
    let z_count = args.z_count.or(overlay.get("z_count")?).unwrap_or(200);
    let margin = args.margin.or(overlay.get("margin")?).unwrap_or(0.005);
    let csv_path = args
        .csv
        .or(overlay.get::<PathBuf>("csv")?)
        .unwrap_or_else(|| PathBuf::from("phi_scan.csv"));
    let json_path = args
        .json
        .or(overlay.get::<PathBuf>("json")?)
        .unwrap_or_else(|| PathBuf::from("phi_scan.json"));

    let mut report = analysis::scan_phi(phi_count, z_count, margin).map_err(|e| e.to_string())?;
    if args.inject_sentinel {
        report.violations.push((1.0, 0.5, -1.0));
        report.min_phi = -1.0;
        report.argmin = (1.0, 0.5);
    }

    std::fs::write(&csv_path, emit::scan_csv(&report))
        .map_err(|e| format!("writing {}: {e}", csv_path.display()))?;
    let summary = ScanSummary {
        z_count,
        phi_count,
        margin,
        min_phi: report.min_phi,
        argmin: ArgMin {
            z: report.argmin.0,
            phi: report.argmin.1,
        },
        violations: report
            .violations
            .iter()
            .map(|&(z, p, v)| [z, p, v])
            .collect(),
        failures: report.failures.len(),
    };
    let json = serde_json::to_string_pretty(&summary).map_err(|e| e.to_string())?;
    std::fs::write(&json_path, json)
        .map_err(|e| format!("writing {}: {e}", json_path.display()))?;

    println!(
        "scan {}x{} margin {}: min Phi = {} at (z, phi) = ({}, {}), {} violation(s)",
        z_count,
        phi_count,
        margin,
        report.min_phi,
        report.argmin.0,
        report.argmin.1,
        report.violations.len()
    );
    if report.violations.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(1))
    }
}

// ---------------------------------------------------------------------------
// diagram
// ---------------------------------------------------------------------------

fn cmd_diagram(args: DiagramArgs) -> Result<ExitCode, String> {
    let overlay = Overlay::load(args.config.as_deref())?;
    let phi = resolve_phi(args.phi, args.phi_frac.as_ref(), &overlay)?;
    let cfg: BoundaryConfig = maps::make_config(phi).map_err(|e| e.to_string())?;
    let k_max = args.k_max.or(overlay.get("k_max")?).unwrap_or(2);
    let l_max = args
        .l_max
        .or(overlay.get("l_max")?)
        .unwrap_or(4.0 * cfg.t_star);
    let points = args.points.or(overlay.get("points")?).unwrap_or(48);
    let out = args
        .out
        .or(overlay.get::<PathBuf>("out")?)
        .unwrap_or_else(|| PathBuf::from("diagram.csv"));

    let diagram = analysis::trace_diagram(&cfg, k_max, l_max, points).map_err(|e| e.to_string())?;
    for w in &diagram.warnings {
        eprintln!("timemap: warning: skipped point: {w}");
    }
    std::fs::write(&out, emit::diagram_csv(&diagram))
        .map_err(|e| format!("writing {}: {e}", out.display()))?;
    if let Some(svg_path) = args.svg.or(overlay.get::<PathBuf>("svg")?) {
        std::fs::write(&svg_path, svg::render(&diagram))
            .map_err(|e| format!("writing {}: {e}", svg_path.display()))?;
    }
    let rows: usize = diagram.branches.iter().map(|(_, l)| l.len()).sum();
    println!(
        "diagram: phi = {}, k_max = {k_max}, {} branches, {rows} points -> {}",
        cfg.phi,
        diagram.branches.len(),
        out.display()
    );
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct VerifySample {
    family: String,
    k: u32,
    z: f64,
    duration: f64,
    y_residual: f64,
    v_drift: f64,
    crossings: i32,
    expected_crossings: i32,
    pass: bool,
}

#[derive(Serialize)]
struct VerifyReport {
    phi: f64,
    tol: f64,
    n: usize,
    k_max: u32,
    all_pass: bool,
    max_y_residual: f64,
    max_v_drift: f64,
    samples: Vec<VerifySample>,
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode, String> {
    let overlay = Overlay::load(args.config.as_deref())?;
    let phi = resolve_phi(args.phi, args.phi_frac.as_ref(), &overlay)?;
    let n = args.n.or(overlay.get("n")?).unwrap_or(10);
    let tol = args.tol.or(overlay.get("tol")?).unwrap_or(1e-10);
    let k_max = args.k_max.or(overlay.get("k_max")?).unwrap_or(2);
    if !(tol > 1e-14 && tol < 1e-3) {
        return Err(format!("tol must lie in (1e-14, 1e-3), got {tol}"));
    }
    let fam_spec = args.families.or(overlay.get::<String>("families")?);
    let families: Vec<Family> = match &fam_spec {
        None => vec![
            Family::I,
            Family::A,
            Family::B,
            Family::C,
            Family::D,
            Family::Dprime,
        ],
        Some(list) => list
            .split(',')
            .map(|s| Family::parse(s).ok_or_else(|| format!("unknown family {s:?}")))
            .collect::<Result<_, _>>()?,
    };

    let cfg = maps::make_config(phi).map_err(|e| e.to_string())?;
    let mut samples = Vec::new();
    for &family in &families {
        let k_lo = u32::from(family == Family::D);
        let k_hi = if family == Family::Bprime { 0 } else { k_max };
        for k in k_lo..=k_hi {
            let branch = BranchId::new(family, k);
            let dom = maps::branch_domain(branch, &cfg);
            for i in 0..n {
                let mut z = dom.lo + dom.width() * (i as f64 + 0.5) / (n as f64);
                // Winding B-branches diverge at the homoclinic and their
                // orbits hug the separatrix there; keep samples clear of it.
                if family == Family::B && k >= 1 && (z - cfg.z_star).abs() < 0.02 * dom.width() {
                    z += 0.04 * dom.width();
                }
                let res = shooting::verify_branch_point(branch, z, &cfg, tol)
                    .map_err(|e| e.to_string())?;
                let expected = shooting::expected_crossings(branch);
                samples.push(VerifySample {
                    family: family.label().to_string(),
                    k,
                    z,
                    duration: res.duration,
                    y_residual: res.y_residual,
                    v_drift: res.v_drift,
                    crossings: res.crossings,
                    expected_crossings: expected,
                    pass: res.y_residual < 1e-6 && res.v_drift < 1e-8 && res.crossings == expected,
                });
            }
        }
    }
    let all_pass = samples.iter().all(|s| s.pass);
    let report = VerifyReport {
        phi,
        tol,
        n,
        k_max,
        all_pass,
        max_y_residual: samples.iter().map(|s| s.y_residual).fold(0.0, f64::max),
        max_v_drift: samples.iter().map(|s| s.v_drift).fold(0.0, f64::max),
        samples,
    };
    let json = serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?;
    match args.json.or(overlay.get::<PathBuf>("json")?) {
        Some(path) => {
            std::fs::write(&path, json).map_err(|e| format!("writing {}: {e}", path.display()))?
        }
        None => println!("{json}"),
    }
    eprintln!(
        "verify: phi = {phi}, {} samples, max residual {:.3e}, max drift {:.3e}",
        report.samples.len(),
        report.max_y_residual,
        report.max_v_drift
    );
    Ok(if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

// ---------------------------------------------------------------------------
// asymptotics
// ---------------------------------------------------------------------------

fn cmd_asymptotics(args: AsympArgs) -> Result<ExitCode, String> {
    let overlay = Overlay::load(args.config.as_deref())?;
    let list = args
        .phi_list
        .or(overlay.get::<String>("phi_list")?)
        .unwrap_or_else(|| format!("0.4,{FRAC_PI_4},1.1"));
    let phis: Vec<f64> = list
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| format!("bad angle {s:?}"))
        })
        .collect::<Result<_, _>>()?;

    let mut out = format!("# timemap {}\n", env!("CARGO_PKG_VERSION"));
    out.push_str("phi,label,z,observed,expected,rel_err,gated,pass\n");
    let mut all_pass = true;
    for &phi in &phis {
        let report = analysis::asymptotic_suite(phi).map_err(|e| e.to_string())?;
        all_pass &= report.all_pass;
        for c in &report.checks {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                fmt_f64(phi),
                c.label,
                fmt_f64(c.z),
                fmt_f64(c.observed),
                fmt_f64(c.expected),
                fmt_f64(c.rel_err),
                i32::from(c.gated),
                i32::from(c.pass)
            ));
        }
    }
    match args.out.or(overlay.get::<PathBuf>("out")?) {
        Some(path) => {
            std::fs::write(&path, out).map_err(|e| format!("writing {}: {e}", path.display()))?
        }
        None => print!("{out}"),
    }
    Ok(if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}
