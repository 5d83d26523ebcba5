//! Command-line front end. [`run`] returns the process exit code:
//! 0 success, 1 numerical precondition failure, 2 parse or input error,
//! 3 invariant violation reported by `verify`.

use crate::decay::{
    verify_entry_decay, within_bound, DecayCertificate, DecayGeometry, ROUNDOFF_FLOOR,
};
use crate::error::Error;
use crate::finite_section::{convergence_sweep, reference_dual, solve_with_factor};
use crate::frame_operator::system_frame_bounds;
use crate::linalg::{rel_dist, vec_norm};
use crate::oracle::{counterexample, dense_oracle_dual, seed_from_env, MAX_ORACLE_ORDER};
use crate::periodic::{
    compare_periodic_vs_fs, solve_dual_periodic, spectrum_inclusion_check, PeriodicSeq,
    PeriodicSystem,
};
use crate::report::{
    convergence_csv, dual_csv, fmt_f64, periodic_convergence_csv, periodic_dual_csv, write_atomic,
};
use crate::seq::FiniteSeq;
use crate::sis::{CoeffRange, ShiftSystem};
use crate::spec_file::load_system;
use crate::tight::{tight_fs, tight_periodic};
use clap::{ArgGroup, Parser, Subcommand};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NUMERICAL: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_VIOLATION: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "framebank",
    version,
    about = "Dual and tight generators of shift-invariant systems"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Frame bounds and decay constants.
    Bounds { spec: PathBuf },
    /// Finite-section duals on [-N, N].
    Dual {
        spec: PathBuf,
        #[arg(long = "N")]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Duals of the system periodized onto Z_L.
    PeriodicDual {
        spec: PathBuf,
        #[arg(long = "L")]
        l: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tight generators by finite section (--N) or on Z_L (--L).
    #[command(group(ArgGroup::new("model").required(true).args(["n", "l"])))]
    Tight {
        spec: PathBuf,
        #[arg(long = "N")]
        n: Option<usize>,
        #[arg(long = "L")]
        l: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Finite-section error against a reference section, with the a-priori bound.
    Convergence {
        spec: PathBuf,
        #[arg(long = "N-list")]
        n_list: String,
        #[arg(long = "N-ref", default_value_t = 150)]
        n_ref: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Periodic duals on Z_{2N+1} against the reference section.
    PeriodicConvergence {
        spec: PathBuf,
        #[arg(long = "N-list")]
        n_list: String,
        #[arg(long = "N-ref", default_value_t = 150)]
        n_ref: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Smallest N whose finite-section bound is at most delta.
    #[command(name = "pick-N")]
    PickN {
        spec: PathBuf,
        #[arg(long)]
        delta: f64,
    },
    /// Runs the invariant suite on one system.
    Verify {
        spec: PathBuf,
        #[arg(long = "N")]
        n: usize,
    },
    /// Brute-force reference computations.
    Oracle {
        #[command(subcommand)]
        which: OracleCmd,
    },
}

#[derive(Subcommand, Debug)]
enum OracleCmd {
    /// Banded Toeplitz matrix with a singular circulant completion.
    Counterexample,
}

enum Failure {
    Lib(Error),
    Usage(String),
    Io(String),
    Violations(usize),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

type CliResult = std::result::Result<(), Failure>;

/// Parses `a:b`, `a:b:step` or a comma-separated list.
pub fn parse_n_list(text: &str) -> std::result::Result<Vec<usize>, String> {
    let bad = || format!("bad N list {text:?}: expected a:b[:step] or n1,n2,...");
    if text.contains(':') {
        let parts: Vec<usize> = text
            .split(':')
            .map(|p| p.trim().parse())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad())?;
        let (lo, hi, step) = match parts[..] {
            [lo, hi] => (lo, hi, 1),
            [lo, hi, step] => (lo, hi, step),
            _ => return Err(bad()),
        };
        if step == 0 || lo > hi {
            return Err(bad());
        }
        Ok((lo..=hi).step_by(step).collect())
    } else {
        let v: Vec<usize> = text
            .split(',')
            .map(|p| p.trim().parse())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad())?;
        if v.is_empty() {
            return Err(bad());
        }
        Ok(v)
    }
}

fn emit(out: &mut dyn Write, path: Option<&Path>, bytes: &[u8]) -> CliResult {
    match path {
        Some(p) => write_atomic(p, bytes)?,
        None => out.write_all(bytes)?,
    }
    Ok(())
}

fn certificate(sys: &ShiftSystem) -> Result<DecayCertificate, Error> {
    DecayCertificate::from_bounds(&system_frame_bounds(sys)?, sys.s_bound())
}

fn cmd_bounds(out: &mut dyn Write, spec: &Path) -> CliResult {
    let sys = load_system(spec)?;
    let cert = certificate(&sys)?;
    writeln!(out, "A={}", fmt_f64(cert.lower))?;
    writeln!(out, "B={}", fmt_f64(cert.upper))?;
    writeln!(out, "kappa={}", fmt_f64(cert.kappa))?;
    writeln!(out, "q={}", fmt_f64(cert.q))?;
    writeln!(out, "lambda={}", fmt_f64(cert.lambda))?;
    writeln!(out, "D={}", fmt_f64(cert.d_demko))?;
    writeln!(out, "C={}", fmt_f64(cert.c_section))?;
    writeln!(out, "s={}", cert.s)?;
    writeln!(out, "grid={}", cert.grid.unwrap_or(0))?;
    Ok(())
}

fn cmd_tight(
    out: &mut dyn Write,
    spec: &Path,
    n: Option<usize>,
    l: Option<usize>,
    path: Option<&Path>,
) -> CliResult {
    let sys = load_system(spec)?;
    let (bytes, defect) = match (n, l) {
        (Some(n), _) => {
            let t = tight_fs(&sys, n)?;
            (dual_csv(&t.generators)?, t.tightness_defect)
        }
        (None, Some(l)) => {
            let t = tight_periodic(&sys, l)?;
            (periodic_dual_csv(&t.generators)?, t.tightness_defect)
        }
        (None, None) => return Err(Failure::Usage("give --N or --L".into())),
    };
    emit(out, path, &bytes)?;
    if path.is_some() {
        writeln!(out, "tightness_defect={}", fmt_f64(defect))?;
    }
    Ok(())
}

fn cmd_convergence(
    out: &mut dyn Write,
    err: &mut dyn Write,
    spec: &Path,
    list: &str,
    n_ref: usize,
    path: &Path,
) -> CliResult {
    let sys = load_system(spec)?;
    let n_list = parse_n_list(list).map_err(Failure::Usage)?;
    let (rows, reference, _) = convergence_sweep(&sys, &n_list, n_ref)?;
    if let Some(w) = &reference.warning {
        writeln!(err, "warning: {w}")?;
    }
    write_atomic(path, &convergence_csv(&rows)?)?;
    writeln!(out, "rows={}", rows.len() * sys.channels())?;
    Ok(())
}

fn cmd_periodic_convergence(
    out: &mut dyn Write,
    err: &mut dyn Write,
    spec: &Path,
    list: &str,
    n_ref: usize,
    path: &Path,
) -> CliResult {
    let sys = load_system(spec)?;
    let n_list = parse_n_list(list).map_err(Failure::Usage)?;
    let cert = certificate(&sys)?;
    let mut rows = Vec::new();
    for n in n_list {
        if (2 * n + 1) % sys.a() != 0 {
            writeln!(
                err,
                "skipping N = {n}: a = {} does not divide 2N+1 = {}",
                sys.a(),
                2 * n + 1
            )?;
            continue;
        }
        rows.push(compare_periodic_vs_fs(&sys, n, n_ref)?);
    }
    if rows.is_empty() {
        return Err(Failure::Lib(Error::Precondition(format!(
            "no N in the list has 2N+1 divisible by a = {}",
            sys.a()
        ))));
    }
    write_atomic(path, &periodic_convergence_csv(&rows, cert.lambda)?)?;
    writeln!(out, "rows={}", rows.len() * sys.channels())?;
    Ok(())
}

fn cmd_counterexample(out: &mut dyn Write) -> CliResult {
    let c = counterexample()?;
    let print =
        |out: &mut dyn Write, name: &str, m: &crate::linalg::CMatrix| -> std::io::Result<()> {
            writeln!(out, "{name}=")?;
            for i in 0..m.rows() {
                let row: Vec<String> = (0..m.cols())
                    .map(|j| format!("{:>3}", m[(i, j)].re))
                    .collect();
                writeln!(out, "  {}", row.join(" "))?;
            }
            Ok(())
        };
    print(out, "T", &c.t)?;
    print(out, "PT", &c.pt)?;
    writeln!(out, "det_T={}", fmt_f64(c.det_t))?;
    writeln!(out, "sigma_min_PT={}", fmt_f64(c.sigma_min_pt))?;
    Ok(())
}

struct Check {
    name: &'static str,
    passed: bool,
    detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check {
        name,
        passed,
        detail,
    }
}

fn random_probe(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> FiniteSeq {
    FiniteSeq::from_fn(lo, hi, |_| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

/// Invariant suite for one system and one section size.
fn verify_checks(sys: &ShiftSystem, n: usize) -> Result<Vec<Check>, Error> {
    let cert = certificate(sys)?;
    let s = sys.s_bound();
    let ni = n as i64;
    let mut out = Vec::new();

    let (sol, sn, factor) = solve_with_factor(sys, n)?;
    let worst_res = sol
        .residuals
        .iter()
        .zip(sys.generators())
        .map(|(r, g)| r / g.norm2())
        .fold(0.0, f64::max);
    out.push(check(
        "residual",
        worst_res <= 1e-10,
        format!("max_rel_residual={worst_res:e}"),
    ));

    if 2 * n < MAX_ORACLE_ORDER {
        let oracle = dense_oracle_dual(sys, n)?;
        let worst = sol
            .duals
            .iter()
            .zip(&oracle.duals)
            .map(|(x, y)| rel_dist(&x.window(-ni, ni), &y.window(-ni, ni)))
            .fold(0.0, f64::max);
        out.push(check(
            "dense_oracle",
            worst <= 1e-10,
            format!("max_rel_diff={worst:e}"),
        ));
    }

    let cond = sn.condition_number();
    out.push(check(
        "interlacing",
        cond <= cert.kappa + 1e-6,
        format!("cond_N={cond:e} kappa={:e}", cert.kappa),
    ));

    let inv = factor.inverse_dense();
    let decay = verify_entry_decay(&inv, &cert, DecayGeometry::Toeplitz);
    out.push(check(
        "inverse_entry_decay",
        decay.passed(),
        format!(
            "max_ratio={:e} violations={}",
            decay.max_ratio,
            decay.violations.len()
        ),
    ));

    let mut rng = ChaCha8Rng::seed_from_u64(seed_from_env());
    let f = random_probe(&mut rng, -3, 3);
    let h = random_probe(&mut rng, -2, 4);
    let lhs = sys.apply_frame_operator(&f).inner(&h);
    let rhs = f.inner(&sys.apply_frame_operator(&h));
    let adj = (lhs - rhs).norm() / lhs.norm().max(1.0);
    out.push(check(
        "adjointness",
        adj <= 1e-12,
        format!("defect={adj:e}"),
    ));
    let energy = sys.analyze(&f, CoeffRange::Auto)?.norm_sqr() / f.norm2().powi(2);
    let inside = energy >= cert.lower * (1.0 - 1e-9) && energy <= cert.upper * (1.0 + 1e-9);
    out.push(check(
        "frame_inequality",
        inside,
        format!("ratio={energy:e}"),
    ));

    if ni > 2 * s {
        let n_ref = (4 * n + 2).max(150);
        let reference = reference_dual(sys, n_ref)?;
        let bound = cert.fs_error_bound(ni)?;
        let ref_bound = cert.fs_error_bound(n_ref as i64)?;
        let worst = sol
            .duals
            .iter()
            .zip(&reference.solution.duals)
            .map(|(x, r)| x.dist2(r))
            .fold(0.0, f64::max);
        let scale = reference
            .solution
            .duals
            .iter()
            .map(|d| d.norm2())
            .fold(0.0, f64::max);
        out.push(check(
            "finite_section_bound",
            within_bound(worst + ref_bound, bound, scale),
            format!("measured={worst:e} bound={bound:e} reference_bound={ref_bound:e}"),
        ));
        let radius = (n_ref / 2) as i64;
        let mut worst_ratio = 0.0f64;
        let mut violations = 0usize;
        for d in &reference.solution.duals {
            let scale = d.max_abs();
            for k in -radius..=radius {
                let (v, b) = (d.get(k).norm(), cert.dual_decay_bound(k)?);
                if b > ROUNDOFF_FLOOR * scale {
                    worst_ratio = worst_ratio.max(v / b);
                }
                violations += usize::from(!within_bound(v, b, scale));
            }
        }
        out.push(check(
            "dual_decay",
            violations == 0,
            format!("max_ratio={worst_ratio:e} violations={violations}"),
        ));
        if ni > 3 * s && (2 * n + 1) % sys.a() == 0 {
            let cmp = compare_periodic_vs_fs(sys, n, n_ref)?;
            let worst = cmp.measured.iter().cloned().fold(0.0, f64::max);
            out.push(check(
                "periodic_bound",
                within_bound(worst, cmp.bound + cmp.reference_bound, scale),
                format!("measured={worst:e} bound={:e}", cmp.bound),
            ));
        }
    }

    let a = sys.a();
    let period = a * ((4 * s as usize + 1).div_ceil(a)).max(8);
    let spectrum = spectrum_inclusion_check(sys, period, 1024)?;
    out.push(check(
        "periodic_spectrum_inclusion",
        spectrum.passed(),
        format!(
            "L={period} block_min={:e} block_max={:e}",
            spectrum.block_min, spectrum.block_max
        ),
    ));
    let pd = solve_dual_periodic(sys, period)?;
    let gsys = PeriodicSystem::from_system(sys, period)?;
    let dsys = PeriodicSystem::new(pd.duals, a)?;
    let probe = PeriodicSeq::new(
        (0..period)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect(),
    );
    let rec = gsys.synthesize(&dsys.analyze(&probe));
    let rec_err = rel_dist(rec.values(), probe.values());
    out.push(check(
        "periodic_reconstruction",
        rec_err <= 1e-10,
        format!("L={period} rel_err={rec_err:e}"),
    ));
    let tight = tight_periodic(sys, period)?;
    out.push(check(
        "periodic_tightness",
        tight.tightness_defect <= 1e-10,
        format!("L={period} defect={:e}", tight.tightness_defect),
    ));
    let norms = vec_norm(
        &sol.duals
            .iter()
            .flat_map(|d| d.values().to_vec())
            .collect::<Vec<_>>(),
    );
    out.push(check(
        "dual_finite",
        norms.is_finite(),
        format!("norm={norms:e}"),
    ));
    Ok(out)
}

fn report_checks(out: &mut dyn Write, checks: &[Check]) -> CliResult {
    let failed = checks.iter().filter(|c| !c.passed).count();
    for c in checks {
        let status = if c.passed { "pass" } else { "FAIL" };
        writeln!(out, "{status} {} {}", c.name, c.detail)?;
    }
    writeln!(out, "checks={} violations={failed}", checks.len())?;
    if failed > 0 {
        return Err(Failure::Violations(failed));
    }
    Ok(())
}

fn cmd_verify(out: &mut dyn Write, spec: &Path, n: usize) -> CliResult {
    let sys = load_system(spec)?;
    report_checks(out, &verify_checks(&sys, n)?)
}

fn dispatch(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    match cli.cmd {
        Cmd::Bounds { spec } => cmd_bounds(out, &spec),
        Cmd::Dual { spec, n, out: path } => {
            let sol = crate::finite_section::solve_dual_fs(&load_system(&spec)?, n)?;
            emit(out, path.as_deref(), &dual_csv(&sol.duals)?)
        }
        Cmd::PeriodicDual { spec, l, out: path } => {
            let pd = solve_dual_periodic(&load_system(&spec)?, l)?;
            emit(out, path.as_deref(), &periodic_dual_csv(&pd.duals)?)
        }
        Cmd::Tight {
            spec,
            n,
            l,
            out: path,
        } => cmd_tight(out, &spec, n, l, path.as_deref()),
        Cmd::Convergence {
            spec,
            n_list,
            n_ref,
            out: path,
        } => cmd_convergence(out, err, &spec, &n_list, n_ref, &path),
        Cmd::PeriodicConvergence {
            spec,
            n_list,
            n_ref,
            out: path,
        } => cmd_periodic_convergence(out, err, &spec, &n_list, n_ref, &path),
        Cmd::PickN { spec, delta } => {
            let n = certificate(&load_system(&spec)?)?.invert_bound_for_n(delta)?;
            writeln!(out, "N={n}")?;
            Ok(())
        }
        Cmd::Verify { spec, n } => cmd_verify(out, &spec, n),
        Cmd::Oracle {
            which: OracleCmd::Counterexample,
        } => cmd_counterexample(out),
    }
}

/// Runs the CLI on `args` (including the program name).
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    let result = dispatch(cli, out, err);
    exit_code(result, err)
}

fn exit_code(result: CliResult, err: &mut dyn Write) -> i32 {
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Lib(e)) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_numerical() {
                EXIT_NUMERICAL
            } else {
                EXIT_PARSE
            }
        }
        Err(Failure::Usage(m)) | Err(Failure::Io(m)) => {
            let _ = writeln!(err, "error: {m}");
            EXIT_PARSE
        }
        Err(Failure::Violations(k)) => {
            let _ = writeln!(err, "error: {k} invariant violation(s)");
            EXIT_VIOLATION
        }
    }
}
