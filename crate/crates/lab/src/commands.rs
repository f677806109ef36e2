//! One subcommand per experiment. Each returns the text printed on stdout
//! and writes its artifact, if any.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use schottky_core::dimension::{estimate_delta, ps_measure, DeltaEstimate};
use schottky_core::hyperbolic::HPoint;
use schottky_core::resolvent::{estimate_a_x, ResidueOptions};
use schottky_core::schottky::{primitive_geodesics, SchottkyGroup};
use schottky_core::trace::{
    fit_count_constant, geometric_side, quadrature_bound, spectral_side, trace_report, SpectralTail, TestFunction,
};
use schottky_core::wave::{decay_fit, leading_term, remainder_analysis, InitialData, WaveOptions, WaveSolver};
use schottky_core::zeta::{
    counting_census, delta_from_zeta, distance_to_excluded, find_resonances, strip_window_count, winding_number,
    zeta_cycle, zeta_dirichlet, CycleExpansion, Orientation, Rect, ResonanceHit, SearchOptions, TransferOperator,
    ZetaFunction, EXCLUSION_RADIUS,
};

use crate::config::Loaded;
use crate::error::{LabError, Result};
use crate::output::{fmt17, read_csv, write_file, Csv, JsonObject};

#[derive(Debug, Parser)]
#[command(name = "schottky-lab", version, about = "Resonance experiments on Schottky surfaces")]
pub struct Cli {
    /// Worker threads. Every computation runs in a fixed order, so outputs
    /// do not depend on this value.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Critical exponent δ.
    Delta(DeltaArgs),
    /// Atomic Patterson–Sullivan measure.
    Psmeasure(PsArgs),
    /// Z(λ) at one point.
    ZetaEval(ZetaEvalArgs),
    /// Zeros of Z in a rectangle.
    Resonances(ResonanceArgs),
    /// Resonance counting functions.
    Census(CensusArgs),
    /// Both sides of the smoothed trace formula.
    Trace(TraceArgs),
    /// Residue of the resolvent at δ and A_X.
    Residue(ResidueArgs),
    /// Wave field samples, decay fit and leading term.
    Wave(WaveArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EngineKind {
    /// Cycle expansion for rank 1, transfer operator otherwise.
    Auto,
    Cycle,
    Transfer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OrientationArg {
    Oriented,
    Unoriented,
}

impl From<OrientationArg> for Orientation {
    fn from(o: OrientationArg) -> Self {
        match o {
            OrientationArg::Oriented => Orientation::Oriented,
            OrientationArg::Unoriented => Orientation::Unoriented,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct EngineArgs {
    #[arg(long, value_enum, default_value = "auto")]
    pub engine: EngineKind,
    #[arg(long, value_enum, default_value = "oriented")]
    pub orientation: OrientationArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DeltaMethodArg {
    Pressure,
    Zeta,
}

#[derive(Debug, Clone, Args)]
pub struct DeltaArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value_t = 12)]
    pub max_word_len: usize,
    #[arg(long, value_enum, default_value = "pressure")]
    pub method: DeltaMethodArg,
    #[command(flatten)]
    pub engine: EngineArgs,
}

#[derive(Debug, Clone, Args)]
pub struct PsArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Exponent of the weights; the pressure estimate when absent.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, default_value_t = 9)]
    pub max_word_len: usize,
    #[arg(long, default_value = "psmeasure.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ZetaMethodArg {
    Dirichlet,
    Cycle,
    Transfer,
}

#[derive(Debug, Clone, Args)]
pub struct ZetaEvalArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// "re,im"
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: String,
    #[arg(long, value_enum, default_value = "cycle")]
    pub method: ZetaMethodArg,
    #[arg(long, value_enum, default_value = "oriented")]
    pub orientation: OrientationArg,
    /// Geodesics up to this length enter the Dirichlet series.
    #[arg(long, default_value_t = 30.0)]
    pub ell_max: f64,
    #[arg(long, default_value_t = 40)]
    pub m_max: usize,
}

#[derive(Debug, Clone, Args)]
pub struct ResonanceArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// "re_min,re_max,im_min,im_max"
    #[arg(long, allow_hyphen_values = true)]
    pub rect: String,
    #[arg(long, default_value_t = 0.05)]
    pub grid: f64,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[arg(long, default_value = "resonances.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct CensusArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Read zeros from a resonances.csv instead of scanning.
    #[arg(long, conflicts_with = "rect")]
    pub resonances: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    pub rect: Option<String>,
    #[arg(long, default_value_t = 0.05)]
    pub grid: f64,
    /// Add the conjugate of every zero with Im λ > 0.
    #[arg(long)]
    pub mirror: bool,
    #[arg(long, default_value = "5,10,20,30")]
    pub radii: String,
    #[arg(long, default_value_t = 0.2)]
    pub eps: f64,
    #[arg(long)]
    pub delta: Option<f64>,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[arg(long, default_value = "census.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct TraceArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Zeros from the resonances command.
    #[arg(long)]
    pub resonances: PathBuf,
    #[arg(long)]
    pub mirror: bool,
    /// Comma-separated centres; the shortest geodesic when absent.
    #[arg(long)]
    pub d: Option<String>,
    #[arg(long, default_value = "0.02")]
    pub alpha: String,
    /// Defaults to the config's budgets.r_cut.
    #[arg(long)]
    pub r_cut: Option<f64>,
    /// Left edge of the scanned region; the leftmost zero when absent.
    #[arg(long, allow_hyphen_values = true)]
    pub re_min: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, default_value_t = 40)]
    pub m_max: usize,
    #[arg(long, value_enum, default_value = "oriented")]
    pub orientation: OrientationArg,
    #[arg(long, default_value = "trace.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ResidueArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// "y,h;y,h;..." with at least three points.
    #[arg(long, allow_hyphen_values = true, default_value = "0,1;0.4,0.7;-0.3,1.6")]
    pub samples: String,
    #[arg(long, default_value_t = 9)]
    pub measure_len: usize,
    #[arg(long, default_value_t = 12)]
    pub max_word_len: usize,
    /// The zeta root when absent.
    #[arg(long)]
    pub delta: Option<f64>,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[arg(long, default_value = "residue.json")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct WaveArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Observation point "y,h".
    #[arg(long, allow_hyphen_values = true, default_value = "0,4")]
    pub point: String,
    /// u(0) atoms "y,h,w;...".
    #[arg(long, allow_hyphen_values = true, default_value = "0.5,6,2")]
    pub f0: String,
    /// ∂ₜu(0) atoms "y,h,w;...".
    #[arg(long, allow_hyphen_values = true, default_value = "0.5,6,1")]
    pub f1: String,
    /// Heat mollifier width τ.
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
    #[arg(long, default_value_t = 40.0)]
    pub band_limit: f64,
    /// "start,end,step"
    #[arg(long, default_value = "5,15,1")]
    pub times: String,
    #[arg(long, default_value_t = 9)]
    pub measure_len: usize,
    #[arg(long, default_value_t = 11)]
    pub max_word_len: usize,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[arg(long, default_value = "decay.csv")]
    pub out: PathBuf,
}

/// Dispatch a parsed command line.
pub fn run(cli: &Cli) -> Result<String> {
    if cli.threads == 0 {
        return Err(LabError::argument("threads", "must be positive"));
    }
    match &cli.command {
        Command::Delta(a) => delta(a),
        Command::Psmeasure(a) => psmeasure(a),
        Command::ZetaEval(a) => zeta_eval(a),
        Command::Resonances(a) => resonances(a),
        Command::Census(a) => census(a),
        Command::Trace(a) => trace(a),
        Command::Residue(a) => residue(a),
        Command::Wave(a) => wave(a),
    }
}

/// Either continuation of Z.
pub enum Engine {
    Cycle(CycleExpansion),
    Transfer(TransferOperator),
}

impl Engine {
    pub fn build(loaded: &Loaded, args: &EngineArgs) -> Result<Self> {
        let g = &loaded.group;
        let b = &loaded.config.budgets;
        let orientation = args.orientation.into();
        let cycle = match args.engine {
            EngineKind::Auto => g.rank() == 1,
            EngineKind::Cycle => true,
            EngineKind::Transfer => false,
        };
        Ok(if cycle {
            Engine::Cycle(CycleExpansion::new(g, b.n_max, orientation, b.words)?)
        } else {
            Engine::Transfer(TransferOperator::new(g, b.transfer_nodes, orientation)?)
        })
    }
}

impl ZetaFunction for Engine {
    fn eval(&self, lambda: Complex64) -> Complex64 {
        match self {
            Engine::Cycle(z) => z.eval(lambda),
            Engine::Transfer(z) => z.eval(lambda),
        }
    }

    fn eval_with_derivative(&self, lambda: Complex64) -> (Complex64, Complex64) {
        match self {
            Engine::Cycle(z) => z.eval_with_derivative(lambda),
            Engine::Transfer(z) => z.eval_with_derivative(lambda),
        }
    }

    fn log_eval(&self, lambda: Complex64) -> Complex64 {
        match self {
            Engine::Cycle(z) => z.log_eval(lambda),
            Engine::Transfer(z) => z.log_eval(lambda),
        }
    }

    fn log_derivative(&self, lambda: Complex64) -> Complex64 {
        match self {
            Engine::Cycle(z) => z.log_derivative(lambda),
            Engine::Transfer(z) => z.log_derivative(lambda),
        }
    }
}

fn parse_list(arg: &'static str, s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| LabError::argument(arg, format!("{x:?}: {e}"))))
        .collect()
}

fn parse_fixed<const K: usize>(arg: &'static str, s: &str) -> Result<[f64; K]> {
    let v = parse_list(arg, s)?;
    v.try_into().map_err(|v: Vec<f64>| LabError::argument(arg, format!("expected {K} numbers, got {}", v.len())))
}

pub fn parse_rect(s: &str) -> Result<Rect> {
    let [a, b, c, d] = parse_fixed::<4>("rect", s)?;
    Ok(Rect::new(a, b, c, d)?)
}

fn parse_point(arg: &'static str, s: &str) -> Result<HPoint> {
    let [y, h] = parse_fixed::<2>(arg, s)?;
    HPoint::new(y, h).map_err(|e| LabError::argument(arg, e.to_string()))
}

fn parse_atoms(arg: &'static str, s: &str) -> Result<Vec<(HPoint, f64)>> {
    s.split(';')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let [y, h, w] = parse_fixed::<3>(arg, p)?;
            Ok((HPoint::new(y, h).map_err(|e| LabError::argument(arg, e.to_string()))?, w))
        })
        .collect()
}

fn pressure_delta(g: &SchottkyGroup, budget: usize) -> Result<DeltaEstimate> {
    Ok(estimate_delta(g, 12, budget)?)
}

/// δ as the zero of Z near the pressure estimate.
pub fn zeta_delta(loaded: &Loaded, engine: &Engine) -> Result<DeltaEstimate> {
    let p = pressure_delta(&loaded.group, loaded.config.budgets.words)?;
    Ok(delta_from_zeta(engine, (p.value - 0.05).max(1e-6), p.value + 0.05)?)
}

fn delta(a: &DeltaArgs) -> Result<String> {
    let loaded = Loaded::from_path(&a.config)?;
    let est = match a.method {
        DeltaMethodArg::Pressure => estimate_delta(&loaded.group, a.max_word_len, loaded.config.budgets.words)?,
        DeltaMethodArg::Zeta => zeta_delta(&loaded, &Engine::build(&loaded, &a.engine)?)?,
    };
    Ok(format!(
        "delta {}\nbracket {} {}\nmethod {:?}\nword_length {}\n",
        fmt17(est.value),
        fmt17(est.bracket.0),
        fmt17(est.bracket.1),
        est.method,
        est.word_length_used
    ))
}

fn psmeasure(a: &PsArgs) -> Result<String> {
    let loaded = Loaded::from_path(&a.config)?;
    let words = loaded.config.budgets.words;
    let delta = match a.delta {
        Some(d) => d,
        None => pressure_delta(&loaded.group, words)?.value,
    };
    let mu = ps_measure(&loaded.group, delta, a.max_word_len, words)?;
    let mut csv = Csv::new(loaded.header(), &["y", "weight"]);
    for (y, w) in &mu.atoms {
        csv.push(vec![fmt17(y.coord().unwrap_or(f64::INFINITY)), fmt17(*w)]);
    }
    write_file(&a.out, &csv.render())?;
    Ok(format!("atoms {}\nmean {}\n", mu.atoms.len(), fmt17(mu.mean())))
}

fn zeta_eval(a: &ZetaEvalArgs) -> Result<String> {
    let loaded = Loaded::from_path(&a.config)?;
    let g = &loaded.group;
    let b = &loaded.config.budgets;
    let [re, im] = parse_fixed::<2>("lambda", &a.lambda)?;
    let lambda = Complex64::new(re, im);
    let orientation = a.orientation.into();
    let v = match a.method {
        ZetaMethodArg::Dirichlet => {
            let delta = pressure_delta(g, b.words)?.value;
            let spectrum = primitive_geodesics(g, a.ell_max, b.words)?;
            zeta_dirichlet(lambda, &spectrum, a.m_max, delta, orientation)?
        }
        ZetaMethodArg::Cycle => zeta_cycle(lambda, g, b.n_max, orientation, b.words)?,
        ZetaMethodArg::Transfer => TransferOperator::new(g, b.transfer_nodes, orientation)?.value(g, lambda, orientation)?,
    };
    Ok(format!(
        "value {} {}\ntruncation_bound {}\nroundoff_bound {}\nmethod {:?}\n",
        fmt17(v.value.re),
        fmt17(v.value.im),
        fmt17(v.truncation_bound),
        fmt17(v.roundoff_bound),
        v.method
    ))
}

pub const RESONANCE_COLUMNS: [&str; 6] = ["re", "im", "multiplicity", "newton_residual", "box_w", "box_h"];

fn resonance_csv(header: String, hits: &[ResonanceHit]) -> Csv {
    let mut csv = Csv::new(header, &RESONANCE_COLUMNS);
    for h in hits {
        csv.push(vec![
            fmt17(h.lambda.re),
            fmt17(h.lambda.im),
            h.multiplicity.to_string(),
            fmt17(h.newton_residual),
            fmt17(h.bbox.width()),
            fmt17(h.bbox.height()),
        ]);
    }
    csv
}

/// Zeros from a resonances.csv.
pub fn read_resonances(path: &Path) -> Result<Vec<ResonanceHit>> {
    let (cols, rows) = read_csv(path)?;
    if cols.iter().map(String::as_str).ne(RESONANCE_COLUMNS) {
        return Err(LabError::argument("resonances", format!("unexpected columns {cols:?}")));
    }
    rows.iter()
        .map(|r| {
            let num = |i: usize| -> Result<f64> {
                r.get(i)
                    .and_then(|x| x.parse().ok())
                    .ok_or_else(|| LabError::argument("resonances", format!("bad row {r:?}")))
            };
            let lambda = Complex64::new(num(0)?, num(1)?);
            let (w, h) = (num(4)?, num(5)?);
            Ok(ResonanceHit {
                lambda,
                multiplicity: num(2)? as usize,
                newton_residual: num(3)?,
                bbox: Rect {
                    re_min: lambda.re - 0.5 * w,
                    re_max: lambda.re + 0.5 * w,
                    im_min: lambda.im - 0.5 * h,
                    im_max: lambda.im + 0.5 * h,
                },
                excluded: distance_to_excluded(lambda) < EXCLUSION_RADIUS,
                converged: true,
            })
        })
        .collect()
}

/// The hits plus the conjugates of those strictly above the real axis.
pub fn mirrored(hits: &[ResonanceHit]) -> Vec<ResonanceHit> {
    let mut out = hits.to_vec();
    for h in hits.iter().filter(|h| h.lambda.im > 0.0) {
        let mut c = *h;
        c.lambda = c.lambda.conj();
        c.bbox = Rect { im_min: -h.bbox.im_max, im_max: -h.bbox.im_min, ..h.bbox };
        out.push(c);
    }
    out
}

fn resonances(a: &ResonanceArgs) -> Result<String> {
    let loaded = Loaded::from_path(&a.config)?;
    let rect = parse_rect(&a.rect)?;
    let engine = Engine::build(&loaded, &a.engine)?;
    let hits = find_resonances(&engine, rect, SearchOptions::new(a.grid))?;
    write_file(&a.out, &resonance_csv(loaded.header(), &hits).render())?;
    let total: usize = hits.iter().map(|h| h.multiplicity).sum();
    let mut s = format!("zeros {}\nwith_multiplicity {}\n", hits.len(), total);
    if let Ok(w) = winding_number(&engine, &rect, a.grid) {
        let _ = writeln!(s, "winding {w}");
    }
    Ok(s)
}

fn census(a: &CensusArgs) -> Result<String> {
    let loaded = Loaded::from_path(&a.config)?;
    let chi = loaded.group.euler_char();
    let mut hits = match (&a.resonances, &a.rect) {
        (Some(p), _) => read_resonances(p)?,
        (None, Some(r)) => {
            let engine = Engine::build(&loaded, &a.engine)?;
            find_resonances(&engine, parse_rect(r)?, SearchOptions::new(a.grid))?
        }
        (None, None) => return Err(LabError::argument("rect", "either --rect or --resonances is required")),
    };
    if a.mirror {
        hits = mirrored(&hits);
    }
    let deltahat = match a.delta {
        Some(d) => d,
        None => pressure_delta(&loaded.group, loaded.config.budgets.words)?.value,
    };
    let radii = parse_list("radii", &a.radii)?;
    let rep = counting_census(&hits, deltahat, a.eps, &radii, chi);
    let mut csv = Csv::new(loaded.header(), &["r", "count", "strip_count"]);
    for ((r, n), ns) in rep.radii.iter().zip(&rep.counts).zip(&rep.strip_counts) {
        csv.push(vec![fmt17(*r), n.to_string(), ns.to_string()]);
    }
    write_file(&a.out, &csv.render())?;
    let im_max = radii.iter().copied().fold(0.0, f64::max);
    let window = strip_window_count(&hits, deltahat, a.eps, im_max, chi);
    Ok(format!(
        "slope_N {}\nslope_strip {}\nwindow_count {}\n",
        fmt17(rep.fitted_exponents.0),
        fmt17(rep.fitted_exponents.1),
        window
    ))
}

pub const TRACE_COLUMNS: [&str; 8] =
    ["d", "alpha", "geodesic", "topological", "resonance", "dk", "tail_bound", "rel_discrepancy"];

fn trace(a: &TraceArgs) -> Result<String> {
    let loaded = Loaded::from_path(&a.config)?;
    let g = &loaded.group;
    let chi = g.euler_char();
    let b = &loaded.config.budgets;
    let mut hits = read_resonances(&a.resonances)?;
    if a.mirror {
        hits = mirrored(&hits);
    }
    let alphas = parse_list("alpha", &a.alpha)?;
    let ds = match &a.d {
        Some(s) => parse_list("d", s)?,
        None => {
            let sp = primitive_geodesics(g, 8.0, b.words)?;
            vec![sp.shortest().ok_or_else(|| LabError::argument("d", "no geodesic below length 8"))?]
        }
    };
    let deltahat = match a.delta {
        Some(d) => d,
        None => pressure_delta(g, b.words)?.value,
    };
    let r_cut = a.r_cut.unwrap_or(b.r_cut);
    let re_min = a.re_min.unwrap_or_else(|| hits.iter().map(|h| h.lambda.re).fold(f64::INFINITY, f64::min));
    let ell_max = ds.iter().copied().fold(0.0, f64::max) + alphas.iter().copied().fold(0.0, f64::max) + 0.1;
    let spectrum = primitive_geodesics(g, ell_max, b.words)?;
    let tail = SpectralTail { r_cut, re_min, re_max: deltahat, count_constant: fit_count_constant(&hits, chi) };
    let mut csv = Csv::new(loaded.header(), &TRACE_COLUMNS);
    let mut s = String::new();
    for &d in &ds {
        for &alpha in &alphas {
            let tf = TestFunction::new(alpha, d)?;
            let geo = geometric_side(&tf, &spectrum, chi, a.m_max, a.orientation.into())?;
            let spec = spectral_side(&tf, &hits, chi, g.dk_values(), &tail);
            let rep = trace_report(&geo, &spec, quadrature_bound(&tf, &hits, chi, r_cut));
            csv.push(
                [d, alpha, rep.geodesic_sum, rep.topological_term, rep.resonance_sum, rep.dk_sum, rep.tail_bound, rep.rel_discrepancy]
                    .iter()
                    .map(|x| fmt17(*x))
                    .collect(),
            );
            let _ = writeln!(
                s,
                "d {} alpha {} rel_discrepancy {} meaningful {}",
                fmt17(d),
                fmt17(alpha),
                fmt17(rep.rel_discrepancy),
                rep.is_meaningful()
            );
        }
    }
    write_file(&a.out, &csv.render())?;
    Ok(s)
}

fn residue(a: &ResidueArgs) -> Result<String> {
    let loaded = Loaded::from_path(&a.config)?;
    let g = &loaded.group;
    let words = loaded.config.budgets.words;
    let samples: Vec<HPoint> = a
        .samples
        .split(';')
        .filter(|p| !p.trim().is_empty())
        .map(|p| parse_point("samples", p))
        .collect::<Result<_>>()?;
    let delta = match a.delta {
        Some(d) => d,
        None => zeta_delta(&loaded, &Engine::build(&loaded, &a.engine)?)?.value,
    };
    let mu = ps_measure(g, delta, a.measure_len, words)?;
    let est = estimate_a_x(g, &mu, delta, &samples, ResidueOptions { max_len: a.max_word_len, budget: words })?;
    let pairs = est
        .fit_diagnostics
        .iter()
        .map(|f| {
            JsonObject::new()
                .integer("i", f.i as i64)
                .integer("j", f.j as i64)
                .number("c_re", f.c)
                .number("c_im", 0.0)
                .number("residual", f.residual)
        })
        .collect();
    let json = JsonObject::new()
        .string("header", &loaded.header())
        .number("delta", est.delta)
        .number("A_X", est.a_x)
        .number("rank1_defect", est.rank1_defect)
        .number("spread", est.spread)
        .array("pairs", pairs);
    write_file(&a.out, &json.render(0))?;
    Ok(format!(
        "delta {}\nA_X {}\nrank1_defect {}\nspread {}\n",
        fmt17(est.delta),
        fmt17(est.a_x),
        fmt17(est.rank1_defect),
        fmt17(est.spread)
    ))
}

fn wave(a: &WaveArgs) -> Result<String> {
    let loaded = Loaded::from_path(&a.config)?;
    let g = &loaded.group;
    let words = loaded.config.budgets.words;
    let m = parse_point("point", &a.point)?;
    let data = InitialData::new(parse_atoms("f0", &a.f0)?, parse_atoms("f1", &a.f1)?, a.tau)?;
    let [t0, t1, dt] = parse_fixed::<3>("times", &a.times)?;
    if !(dt > 0.0 && t1 >= t0 && t0 >= 0.0) {
        return Err(LabError::argument("times", "need 0 <= start <= end and step > 0"));
    }
    let delta = zeta_delta(&loaded, &Engine::build(&loaded, &a.engine)?)?.value;
    let mu = ps_measure(g, delta, a.measure_len, words)?;
    // residue sampled at the observation point, the sources and one spare point
    let mut pts = vec![m];
    for (p, _) in data.f0_atoms.iter().chain(&data.f1_atoms) {
        if !pts.contains(p) {
            pts.push(*p);
        }
    }
    for spare in [(-0.3, 1.6), (0.4, 0.7)] {
        if pts.len() < 3 {
            pts.push(HPoint::new(spare.0, spare.1)?);
        }
    }
    let est = estimate_a_x(g, &mu, delta, &pts, ResidueOptions { max_len: a.max_word_len, budget: words })?;
    let lead = leading_term(&m, &data, &est, &mu, delta);
    let opts = WaveOptions { band_limit: a.band_limit, budget: words, ..WaveOptions::default() };
    let mut solver = WaveSolver::new(g, &m, &data, t1, opts)?;
    let n = ((t1 - t0) / dt + 1e-9).floor() as usize;
    let mut samples = Vec::with_capacity(n + 1);
    let mut noise: f64 = 0.0;
    for k in 0..=n {
        let t = t0 + k as f64 * dt;
        let u = solver.field(t)?;
        noise = noise.max(u.error);
        samples.push((t, u.value));
    }
    let fit = decay_fit(&samples, delta, noise)?;
    let rem = remainder_analysis(&samples, &lead, delta);
    let mut csv = Csv::new(loaded.header(), &["t", "u_value", "leading_value", "remainder"]);
    for (t, r, _) in &rem.rows {
        let u = samples.iter().find(|s| s.0 == *t).map_or(f64::NAN, |s| s.1);
        csv.push(vec![fmt17(*t), fmt17(u), fmt17(lead.eval(*t)), fmt17(*r)]);
    }
    write_file(&a.out, &csv.render())?;
    Ok(format!(
        "delta {}\nrate {}\npredicted_rate {}\nrate_error {}\nfit_residual {}\nremainder_sup_envelope {}\n",
        fmt17(delta),
        fmt17(fit.rate),
        fmt17(fit.predicted_rate),
        fmt17(fit.rate_error()),
        fmt17(fit.residual),
        fmt17(rem.sup_envelope)
    ))
}
