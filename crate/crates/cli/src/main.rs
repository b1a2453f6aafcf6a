//! `lpw`: construct weights, verify their properties, classify regularity.

mod spec;

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lpw_core::certify::{
    build_q_sequence, check_b, check_b_bound, check_parity_positivity, check_poly_decay, check_q_fractional_bound,
    check_submultiplicative, countex_divergence_lower_bound, domar_classify, domar_partial, ess_inf_check,
    exit_code, weight_equivalence, Certificate, SubmultMode, TruncationSpec, Verdict, Window,
};
use lpw_core::continuous::{beurling_integral, circle_conv_ratio, QuadratureSpec};
use lpw_core::rational::{fmt_rational, int, parse_rational};
use lpw_core::weights::{algebra_inverse, builtin_weight, Builtin};
use lpw_core::Error;

use spec::{build, defaults, load_weight, BuildOptions};

#[derive(Parser)]
#[command(name = "lpw", version, about = "Subconvolutive weights with machine-checkable certificates")]
struct Cli {
    /// Tolerance for quadrature-based checks.
    #[arg(long, global = true, env = "LPW_PRECISION", default_value_t = 1e-6)]
    precision: f64,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a weight and write its provenance JSON.
    Construct(ConstructArgs),
    /// Run a certificate suite on a weight.
    Verify(VerifyArgs),
    /// Partial sums and classification of sum log+ w(nx)/n^2.
    Domar(DomarArgs),
    /// The integral of log+ w(t)/(1+t^2) on the line.
    Beurling(BeurlingArgs),
    /// The circle weight t^(1/4) and its lacunary sequence.
    Countex(CountexArgs),
    /// Constants C1, C2 with C1 <= w1/w2 <= C2 on a window.
    Equivalence(EquivalenceArgs),
    /// Summarize a certificate bundle.
    Report(ReportArgs),
}

#[derive(Args)]
struct ConstructArgs {
    /// pruefer:P | rationals | sum | euclidean:D | builtin:NAME
    #[arg(long)]
    group: String,
    /// factorial | explicit:t1,t2,...
    #[arg(long, default_value = "factorial")]
    chain: String,
    /// geometric:R | factorial-geometric:B | explicit:h1,h2,...;R
    #[arg(long)]
    phi: Option<String>,
    /// comma-separated pruefer:P summands
    #[arg(long)]
    summands: Option<String>,
    #[arg(long)]
    epsilon1: Option<String>,
    /// accept a phi that increases (the result carries no (b) bound)
    #[arg(long)]
    allow_nonmonotone: bool,
    /// keep the unscaled weight instead of dividing by its proven bound
    #[arg(long)]
    raw: bool,
    /// wrap in the algebra weight u^(-(p-1)/p)
    #[arg(long, value_name = "P")]
    algebra: Option<String>,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// weight JSON file or builtin:NAME
    #[arg(long)]
    weight: String,
    /// comma-separated: a (with c), b, d, submult, essinf; or all = a,b,d
    #[arg(long, default_value = "all")]
    suite: String,
    #[arg(long)]
    window: Option<String>,
    /// N=8 | N=5,B=40 | S=6:6:6 | full
    #[arg(long)]
    trunc: Option<String>,
    /// check u*u <= bound u instead of u*u <= u
    #[arg(long)]
    bound: Option<String>,
    /// orbit length for (d)
    #[arg(long, default_value_t = 20)]
    orbit: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// write the certificate bundle here
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DomarArgs {
    #[arg(long)]
    weight: String,
    #[arg(long, default_value = "1")]
    x: String,
    #[arg(long = "N", default_value_t = 20)]
    n: u32,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct BeurlingArgs {
    #[arg(long)]
    weight: String,
    #[arg(long = "T", default_value_t = 100.0)]
    t: f64,
    #[arg(long, default_value_t = 1.0 / 64.0)]
    h: f64,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct CountexArgs {
    #[arg(long, default_value_t = 2)]
    depth: u32,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EquivalenceArgs {
    #[arg(long)]
    w1: String,
    #[arg(long)]
    w2: String,
    #[arg(long)]
    window: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ReportArgs {
    /// certificate bundle written by verify or countex
    input: PathBuf,
}

/// Failures that end the run before any verdict exists.
enum Abort {
    Usage(String),
    Undecided(String),
}

impl From<Error> for Abort {
    fn from(e: Error) -> Self {
        match e {
            Error::Tolerance(_) | Error::NotCertifiable(_) => Abort::Undecided(e.to_string()),
            _ => Abort::Usage(e.to_string()),
        }
    }
}

impl From<io::Error> for Abort {
    fn from(e: io::Error) -> Self {
        Abort::Usage(e.to_string())
    }
}

fn bundle_json(certs: &[Certificate]) -> String {
    serde_json::to_string_pretty(certs).expect("certificates serialize")
}

fn print_table(certs: &[Certificate]) {
    for c in certs {
        let detail = match &c.verdict {
            Verdict::Holds => String::new(),
            Verdict::Fails { witness } => format!("witness {witness}"),
            Verdict::Inconclusive { reason } => reason.clone(),
        };
        let window = c.window.as_ref().map(|w| format!("{} ({} pts)", w.spec, w.size)).unwrap_or_default();
        println!("{:<10} {:<13} {:<24} {}", c.property.tag(), c.verdict.label(), window, detail);
        if let Some(list) = c.payload.get("inconclusive_points") {
            if c.payload.get("inconclusive_count").and_then(|v| v.as_u64()).unwrap_or(0) > 0 {
                println!("{:<10} inconclusive at {}", "", list);
            }
        }
    }
}

fn construct(a: ConstructArgs) -> Result<u8, Abort> {
    let o = BuildOptions {
        chain: a.chain,
        phi: a.phi,
        summands: a.summands,
        epsilon1: a.epsilon1,
        allow_nonmonotone: a.allow_nonmonotone,
        raw: a.raw,
        algebra: a.algebra,
    };
    let u = build(&a.group, &o)?;
    let json = u.to_json();
    match &a.out {
        Some(p) => {
            fs::write(p, &json)?;
            println!("{}", u.summary());
        }
        None => {
            println!("{json}");
            eprintln!("{}", u.summary());
        }
    }
    Ok(0)
}

fn verify(a: VerifyArgs) -> Result<u8, Abort> {
    let u = load_weight(&a.weight)?;
    let (dw, dt) = defaults(&u);
    let window = Window::parse(a.window.as_deref().unwrap_or(&dw), u.descriptor(), a.seed)?;
    let trunc = TruncationSpec::parse(a.trunc.as_deref().unwrap_or(&dt))?;
    let suite: Vec<&str> = match a.suite.as_str() {
        "all" => vec!["a", "b", "d"],
        s => s.split(',').map(str::trim).collect(),
    };
    let mut certs = Vec::new();
    for item in suite {
        match item {
            "a" | "c" | "a,c" => {
                if !certs.iter().any(|c: &Certificate| c.property.tag() == "a,c") {
                    certs.push(check_parity_positivity(&u, &window)?);
                }
            }
            "b" => certs.push(match &a.bound {
                Some(b) => check_b_bound(&u, &window, &trunc, &parse_rational(b)?)?,
                None => check_b(&u, &window, &trunc)?,
            }),
            "d" => {
                // a few nonzero window points, in window order
                for x in window.points.iter().filter(|x| !x.is_zero()).take(4) {
                    certs.push(check_poly_decay(&u, x, a.orbit.max(10))?);
                }
            }
            "submult" => certs.push(check_submultiplicative(&u, &window, SubmultMode::Exact, a.seed)?),
            "essinf" => certs.push(ess_inf_check(&u, &window)?),
            other => return Err(Abort::Usage(format!("unknown suite item {other:?}"))),
        }
    }
    println!("weight: {}", u.summary());
    println!("seed: {}", a.seed);
    print_table(&certs);
    if let Some(p) = &a.out {
        fs::write(p, bundle_json(&certs))?;
    }
    Ok(exit_code(&certs) as u8)
}

fn domar(a: DomarArgs) -> Result<u8, Abort> {
    let w = load_weight(&a.weight)?;
    let x = w.descriptor().parse_point(&a.x)?;
    let sums = domar_partial(&w, &x, a.n)?;
    let verdict = domar_classify(&w, &x)?;
    let mut out = csv::Writer::from_writer(Vec::new());
    out.write_record(["n", "partial_sum", "exact"]).map_err(|e| Abort::Usage(e.to_string()))?;
    for s in &sums {
        let exact = s.exact.as_ref().map(fmt_rational).unwrap_or_default();
        out.write_record([s.n.to_string(), format!("{:.15}", s.approx), exact])
            .map_err(|e| Abort::Usage(e.to_string()))?;
    }
    let table = String::from_utf8(out.into_inner().map_err(|e| Abort::Usage(e.to_string()))?).expect("utf8");
    match &a.csv {
        Some(p) => fs::write(p, table)?,
        None => print!("{table}"),
    }
    let cls = format!("{:?}", verdict.classification);
    match &verdict.cap {
        Some(cap) => println!("classification: {cls} (every partial sum <= {cap:.6})"),
        None => println!("classification: {cls}"),
    }
    Ok(0)
}

fn beurling(a: BeurlingArgs, tol: f64) -> Result<u8, Abort> {
    let w = load_weight(&a.weight)?;
    let mut out = csv::Writer::from_writer(Vec::new());
    out.write_record(["cutoff", "integral_lo", "integral_hi"]).map_err(|e| Abort::Usage(e.to_string()))?;
    if a.t.is_nan() || a.t <= 0.0 {
        return Err(Abort::Usage("T must be positive".into()));
    }
    // doubling cutoffs, ending exactly at T
    let mut cutoffs: Vec<f64> = std::iter::successors(Some(1.0f64), |t| Some(t * 2.0)).take_while(|t| *t < a.t).collect();
    cutoffs.push(a.t);
    let mut last = None;
    for t in cutoffs {
        let r = beurling_integral(&w, &QuadratureSpec { h: a.h, cutoff: t, tolerance: tol, ..Default::default() })?;
        out.write_record([t.to_string(), format!("{:.12}", r.integral.lo), format!("{:.12}", r.integral.hi)])
            .map_err(|e| Abort::Usage(e.to_string()))?;
        last = Some(r);
    }
    let table = String::from_utf8(out.into_inner().map_err(|e| Abort::Usage(e.to_string()))?).expect("utf8");
    match &a.csv {
        Some(p) => fs::write(p, table)?,
        None => print!("{table}"),
    }
    if let Some(r) = last {
        let name = match r.class {
            lpw_core::continuous::BeurlingClass::Finite => "finite",
            lpw_core::continuous::BeurlingClass::Infinite => "infinite",
            lpw_core::continuous::BeurlingClass::Inconclusive => "inconclusive",
        };
        println!("classification: {name}");
    }
    Ok(0)
}

fn countex(a: CountexArgs, tol: f64) -> Result<u8, Abort> {
    let seq = build_q_sequence(a.depth)?;
    let qs: Vec<String> = seq
        .terms
        .iter()
        .map(|t| match t.exact() {
            Some(q) => q.to_string(),
            None => format!("{t:?}"),
        })
        .collect();
    println!("q = [{}]", qs.join(", "));
    let mut certs = Vec::new();
    let known = seq.terms.iter().take_while(|t| t.exact().is_some()).count() as u32;
    for n in 1..=known {
        let c = check_q_fractional_bound(&seq, n)?;
        println!(
            "{{q_{n} alpha}} in ({}, {}) ~ {:.3e}: {}",
            c.payload["frac_lower"].as_str().unwrap_or("?"),
            c.payload["frac_upper"].as_str().unwrap_or("?"),
            c.payload["frac_upper_approx"].as_f64().unwrap_or(f64::NAN),
            c.verdict.label()
        );
        certs.push(c);
    }
    let w = builtin_weight(Builtin::CircleQuarter);
    let d = countex_divergence_lower_bound(&seq, &w)?;
    println!(
        "per-term bounds |log w(q_n alpha)|/q_n^2 >= 1/4; sum of verified terms >= {}",
        d.payload["partial_sum_lower"].as_str().unwrap_or("?")
    );
    certs.push(d);
    let u = algebra_inverse(w, int(2))?;
    let r = circle_conv_ratio(&u, &QuadratureSpec { tolerance: tol, ..Default::default() })?;
    println!("sup (u*u)/u for u = t^(-1/2): [{:.9}, {:.9}], M = {:.9}", r.sup.lo, r.sup.hi, r.sup.hi);
    certs.push(r.certificate);
    if let Some(p) = &a.out {
        fs::write(p, bundle_json(&certs))?;
    }
    Ok(exit_code(&certs) as u8)
}

fn equivalence(a: EquivalenceArgs) -> Result<u8, Abort> {
    let w1 = load_weight(&a.w1)?;
    let w2 = load_weight(&a.w2)?;
    if w1.descriptor() != w2.descriptor() {
        return Err(Abort::Usage("weights live on different groups".into()));
    }
    let window = Window::parse(&a.window, w1.descriptor(), a.seed)?;
    let (eq, cert) = weight_equivalence(&w1, &w2, &window)?;
    println!("c1 = {} ({:.6e})", eq.c1, eq.c1.to_f64());
    println!("c2 = {} ({:.6e})", eq.c2, eq.c2.to_f64());
    println!("exact: {}", cert.rigorous);
    Ok(0)
}

fn report(a: ReportArgs) -> Result<u8, Abort> {
    let text = fs::read_to_string(&a.input)?;
    let certs: Vec<Certificate> =
        serde_json::from_str(&text).map_err(|e| Abort::Usage(format!("{}: {e}", a.input.display())))?;
    print_table(&certs);
    let code = exit_code(&certs);
    println!("{} certificates; exit code {code}", certs.len());
    Ok(code as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let tol = cli.precision;
    let r = match cli.cmd {
        Cmd::Construct(a) => construct(a),
        Cmd::Verify(a) => verify(a),
        Cmd::Domar(a) => domar(a),
        Cmd::Beurling(a) => beurling(a, tol),
        Cmd::Countex(a) => countex(a, tol),
        Cmd::Equivalence(a) => equivalence(a),
        Cmd::Report(a) => report(a),
    };
    let _ = io::stdout().flush();
    match r {
        Ok(code) => ExitCode::from(code),
        Err(Abort::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Abort::Undecided(m)) => {
            eprintln!("undecided: {m}");
            ExitCode::from(3)
        }
    }
}
