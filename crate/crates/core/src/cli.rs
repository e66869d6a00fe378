//! Command implementations behind the `catqkd` binary.
//!
//! Sweeps write CSV with a header row and 12 significant digits per value.
//! The other commands print `key=value` lines.

use std::fmt;
use std::io::{self, Write};
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::bell::{canonical_settings, chsh_value, s_max_from_state, BellSettings};
use crate::channel::{transmission_from_distance, ChannelPoint};
use crate::error::{Error, Result};
use crate::euler::{verify_decomposition, BasisRotation};
use crate::filtering::{filter_point, optimal_filters_for};
use crate::fock::{admits, compare_to_qubit_model, DEFAULT_N_MAX};
use crate::keyrate::{critical_qber, key_rate_report, optimize_gamma, KeyRateReport};
use crate::qubit::{MeasurementVector, C64};

/// Pass threshold of `oracle-check`.
pub const ORACLE_THRESHOLD: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(name = "catqkd", version, about = "Device-independent QKD with phase-entangled coherent states")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Secret key fraction against distance.
    KeyrateSweep(SweepArgs),
    /// Critical QBER of the biphoton protocol against distance.
    CriticalQber(SweepArgs),
    /// Maximal CHSH value, settings and filters at one channel point.
    Bell(BellArgs),
    /// Euler angles of the rotation onto the basis c|+> + d|->.
    GateDecomp(GateArgs),
    /// Compare the Fock-space reduced state with the two-qubit model.
    OracleCheck(OracleArgs),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GammaChoice {
    Optimize,
    Fixed(f64),
}

impl FromStr for GammaChoice {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s.eq_ignore_ascii_case("optimize") {
            return Ok(GammaChoice::Optimize);
        }
        s.parse::<f64>()
            .map(GammaChoice::Fixed)
            .map_err(|_| format!("expected a number or 'optimize', got '{s}'"))
    }
}

impl fmt::Display for GammaChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GammaChoice::Optimize => write!(f, "optimize"),
            GammaChoice::Fixed(g) => write!(f, "{g}"),
        }
    }
}

#[derive(Clone, Debug, Args)]
pub struct SweepArgs {
    #[arg(long, default_value_t = 0.0)]
    pub start_km: f64,
    #[arg(long, default_value_t = 200.0)]
    pub end_km: f64,
    #[arg(long, default_value_t = 5.0)]
    pub step_km: f64,
    #[arg(long, default_value_t = 0.2)]
    pub loss_db_per_km: f64,
    /// A fixed overlap in [0, 1) or 'optimize'.
    #[arg(long, default_value_t = GammaChoice::Optimize)]
    pub gamma: GammaChoice,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, Args)]
pub struct BellArgs {
    #[arg(long)]
    pub gamma: f64,
    #[arg(long)]
    pub transmission: f64,
}

#[derive(Clone, Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct GateArgs {
    #[arg(long, default_value_t = 0.0)]
    pub c_re: f64,
    #[arg(long, default_value_t = 0.0)]
    pub c_im: f64,
    #[arg(long, default_value_t = 0.0)]
    pub d_re: f64,
    #[arg(long, default_value_t = 0.0)]
    pub d_im: f64,
}

#[derive(Clone, Debug, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub phi: f64,
    #[arg(long)]
    pub transmission: f64,
    #[arg(long, default_value_t = DEFAULT_N_MAX)]
    pub n_max: usize,
}

/// Distance grid and loss model of a sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepConfig {
    pub start_km: f64,
    pub end_km: f64,
    pub step_km: f64,
    pub loss_db_per_km: f64,
    pub gamma: GammaChoice,
}

impl SweepConfig {
    pub fn new(start_km: f64, end_km: f64, step_km: f64, loss_db_per_km: f64, gamma: GammaChoice) -> Result<Self> {
        if !(step_km > 0.0) || !step_km.is_finite() {
            return Err(Error::validation(format!("step must be > 0, got {step_km}")));
        }
        if !(start_km >= 0.0) || !(start_km <= end_km) || !end_km.is_finite() {
            return Err(Error::validation(format!(
                "need 0 <= start <= end, got [{start_km}, {end_km}]"
            )));
        }
        if !(loss_db_per_km > 0.0) || !loss_db_per_km.is_finite() {
            return Err(Error::validation(format!(
                "loss must be > 0 dB/km, got {loss_db_per_km}"
            )));
        }
        if let GammaChoice::Fixed(g) = gamma {
            ChannelPoint::new(g, 1.0)?;
        }
        Ok(SweepConfig {
            start_km,
            end_km,
            step_km,
            loss_db_per_km,
            gamma,
        })
    }

    pub fn distances(&self) -> Vec<f64> {
        let n = ((self.end_km - self.start_km) / self.step_km + 1e-9).floor() as usize + 1;
        (0..n).map(|k| self.start_km + k as f64 * self.step_km).collect()
    }
}

impl TryFrom<&SweepArgs> for SweepConfig {
    type Error = Error;
    fn try_from(a: &SweepArgs) -> Result<Self> {
        SweepConfig::new(a.start_km, a.end_km, a.step_km, a.loss_db_per_km, a.gamma)
    }
}

/// Rows are computed in parallel and returned in distance order.
pub fn keyrate_sweep(config: &SweepConfig) -> Result<Vec<KeyRateReport>> {
    config
        .distances()
        .par_iter()
        .map(|&km| {
            let t = transmission_from_distance(km, config.loss_db_per_km)?;
            let gamma = match config.gamma {
                GammaChoice::Optimize => optimize_gamma(t)?.gamma_opt,
                GammaChoice::Fixed(g) => g,
            };
            key_rate_report(&ChannelPoint::from_distance(gamma, km, config.loss_db_per_km)?)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CriticalRow {
    pub distance_km: f64,
    pub transmission: f64,
    pub q_crit: Option<f64>,
    pub k_cat: f64,
    pub k_biphoton: Option<f64>,
}

pub fn critical_qber_sweep(config: &SweepConfig) -> Result<Vec<CriticalRow>> {
    config
        .distances()
        .par_iter()
        .map(|&km| {
            let t = transmission_from_distance(km, config.loss_db_per_km)?;
            let c = critical_qber(t)?;
            Ok(CriticalRow {
                distance_km: km,
                transmission: t,
                q_crit: c.q_crit,
                k_cat: c.k_cat,
                k_biphoton: c.k_biphoton,
            })
        })
        .collect()
}

/// Plain decimal with 12 significant digits.
pub fn format_sig(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let exp = v.abs().log10().floor() as i32;
    let decimals = (11 - exp).max(0) as usize;
    let s = format!("{v:.decimals$}");
    // rounding can carry into a new leading digit
    let digits = s.chars().filter(|c| c.is_ascii_digit()).skip_while(|&c| c == '0').count();
    if digits > 12 && decimals > 0 {
        let decimals = decimals - 1;
        format!("{v:.decimals$}")
    } else {
        s
    }
}

fn opt_sig(v: Option<f64>) -> String {
    v.map(format_sig).unwrap_or_default()
}

pub const KEYRATE_HEADER: &str = "distance_km,T,gamma,p,s_max,qber,holevo,r_dw,key_fraction";
pub const CRITICAL_HEADER: &str = "distance_km,T,q_crit,k_cat,k_biphoton_at_qcrit";

pub fn write_keyrate_csv(rows: &[KeyRateReport], w: &mut dyn Write) -> io::Result<()> {
    writeln!(w, "{KEYRATE_HEADER}")?;
    for r in rows {
        let fields = [
            r.distance_km.unwrap_or(f64::NAN),
            r.transmission,
            r.gamma,
            r.p,
            r.s_max,
            r.qber,
            r.holevo,
            r.r_dw,
            r.key_fraction,
        ];
        let line: Vec<String> = fields.iter().map(|v| format_sig(*v)).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

pub fn write_critical_csv(rows: &[CriticalRow], w: &mut dyn Write) -> io::Result<()> {
    writeln!(w, "{CRITICAL_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            format_sig(r.distance_km),
            format_sig(r.transmission),
            opt_sig(r.q_crit),
            format_sig(r.k_cat),
            opt_sig(r.k_biphoton)
        )?;
    }
    Ok(())
}

fn vec_str(v: &MeasurementVector) -> String {
    let [x, y, z] = v.components();
    format!("{},{},{}", format_sig(x), format_sig(y), format_sig(z))
}

fn op_str(v: &MeasurementVector) -> String {
    let [x, y, z] = v.components();
    format!("{}*sx + {}*sy + {}*sz", format_sig(x), format_sig(y), format_sig(z))
}

/// Outcome of a command: text for stdout plus an exit status.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub text: String,
    /// Written to stderr.
    pub notices: Vec<String>,
    pub passed: bool,
}

pub fn bell_report(gamma: f64, transmission: f64) -> Result<Report> {
    let point = ChannelPoint::new(gamma, transmission)?;
    let filtered = filter_point(&point)?;
    let chsh = s_max_from_state(&filtered.state)?;
    let canon = canonical_settings(&point);
    let (ma, _) = optimal_filters_for(&point)?;
    let check_svd = chsh_value(&filtered.state, &chsh.settings)?;
    let check_canon = chsh_value(&filtered.state, &canon)?;
    let dev = (check_svd - chsh.s_max).abs().max((check_canon - chsh.s_max).abs());
    let passed = dev <= 1e-10;

    let mut lines = vec![
        format!("gamma={}", format_sig(gamma)),
        format!("T={}", format_sig(transmission)),
        format!("filter_plus={}", format_sig(ma.matrix()[(0, 0)].re)),
        format!("filter_minus={}", format_sig(ma.matrix()[(1, 1)].re)),
        format!("p={}", format_sig(filtered.success_prob)),
        format!("s_max={}", format_sig(chsh.s_max)),
        format!("violation={}", chsh.violates()),
    ];
    let mut add_settings = |tag: &str, s: &BellSettings| {
        lines.push(format!("{tag}.varphi={}", format_sig(s.varphi)));
        lines.push(format!("{tag}.cos_varphi={}", format_sig(s.varphi.cos())));
        for (name, v) in [("a1", &s.a1), ("a2", &s.a2), ("b1", &s.b1), ("b2", &s.b2)] {
            lines.push(format!("{tag}.{name}={}", vec_str(v)));
            lines.push(format!("{tag}.{}={}", name.to_uppercase(), op_str(v)));
        }
    };
    add_settings("canonical", &canon);
    add_settings("singular", &chsh.settings);
    lines.push(format!("chsh_check_deviation={}", format_sig(dev)));

    let mut notices = Vec::new();
    if !chsh.violates() {
        notices.push("warning: no Bell violation at this point (s_max <= 2)".to_string());
    }
    Ok(Report {
        text: lines.join("\n") + "\n",
        notices,
        passed,
    })
}

pub fn gate_report(c: C64, d: C64) -> Result<Report> {
    let n = c.norm_sqr() + d.norm_sqr();
    if n == 0.0 {
        return Err(Error::validation("basis vector (c, d) is zero"));
    }
    let mut notices = Vec::new();
    if (n - 1.0).abs() > 1e-9 {
        return Err(Error::validation(format!(
            "|c|^2 + |d|^2 = {n} is not normalized within 1e-9"
        )));
    }
    let rot = if (n - 1.0).abs() > 1e-12 {
        notices.push(format!("notice: renormalized (c, d) from |c|^2 + |d|^2 = {n}"));
        BasisRotation::normalized(c, d)?
    } else {
        BasisRotation::new(c, d)?
    };
    let check = verify_decomposition(&rot);
    let lines = [
        format!("q={}", format_sig(check.angles.q)),
        format!("r={}", format_sig(check.angles.r)),
        format!("s={}", format_sig(check.angles.s)),
        format!("aligned_deviation={}", format_sig(check.aligned_deviation)),
        format!("raw_deviation={}", format_sig(check.raw_deviation)),
    ];
    Ok(Report {
        text: lines.join("\n") + "\n",
        notices,
        passed: check.aligned_deviation <= 1e-12,
    })
}

pub fn oracle_report(alpha: f64, phi: f64, transmission: f64, n_max: usize) -> Result<Report> {
    if !admits(C64::new(alpha, 0.0), n_max) {
        return Err(Error::validation(format!(
            "truncation n_max = {n_max} too small for alpha = {alpha} (need alpha^2 <= n_max/4)"
        )));
    }
    let cmp = compare_to_qubit_model(alpha, phi, transmission, n_max)?;
    let passed = cmp.max_deviation <= ORACLE_THRESHOLD;
    let lines = [
        format!("max_deviation={}", format_sig(cmp.max_deviation)),
        format!("threshold={}", format_sig(ORACLE_THRESHOLD)),
        format!("result={}", if passed { "pass" } else { "fail" }),
    ];
    Ok(Report {
        text: lines.join("\n") + "\n",
        notices: Vec::new(),
        passed,
    })
}

fn write_output(out: &Option<PathBuf>, f: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<()> {
    let res = match out {
        Some(path) => std::fs::File::create(path).and_then(|file| {
            let mut w = io::BufWriter::new(file);
            f(&mut w)?;
            w.flush()
        }),
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            f(&mut lock)
        }
    };
    res.map_err(|e| Error::validation(format!("cannot write output: {e}")))
}

/// Runs a parsed command and returns the process exit code:
/// 0 success, 1 check failure, 2 usage or domain error.
pub fn run(cli: &Cli) -> i32 {
    let result = match &cli.command {
        Command::KeyrateSweep(args) => SweepConfig::try_from(args)
            .and_then(|c| keyrate_sweep(&c))
            .and_then(|rows| write_output(&args.out, |w| write_keyrate_csv(&rows, w)))
            .map(|_| true),
        Command::CriticalQber(args) => SweepConfig::try_from(args)
            .and_then(|c| critical_qber_sweep(&c))
            .and_then(|rows| write_output(&args.out, |w| write_critical_csv(&rows, w)))
            .map(|_| true),
        Command::Bell(a) => bell_report(a.gamma, a.transmission).map(emit),
        Command::GateDecomp(a) => {
            gate_report(C64::new(a.c_re, a.c_im), C64::new(a.d_re, a.d_im)).map(emit)
        }
        Command::OracleCheck(a) => oracle_report(a.alpha, a.phi, a.transmission, a.n_max).map(emit),
    };
    match result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e @ Error::Numerical(_)) => {
            eprintln!("error: {e}");
            1
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn emit(report: Report) -> bool {
    for n in &report.notices {
        eprintln!("{n}");
    }
    print!("{}", report.text);
    report.passed
}
