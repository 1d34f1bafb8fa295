use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C;
use serde_json::{json, Value};

use wickstar::fock::{coherent_vector, expectation, ladder_ops, pi_matrix};
use wickstar::io::{
    expectation_csv, fmt_f64, fock_operator_to_json, graded_to_json, jet_from_json, jet_to_json, parse_real, plot_csv,
    table_csv,
};
use wickstar::jet::Jet;
use wickstar::seminorm::{divergence_probe, inequality_suite, table, Cutoffs, Evaluator, Grid, SeminormParams, Verdict};
use wickstar::suite::{self, CriterionReport};
use wickstar::wick::{star_exp_partial, unitary_u, wick_star, wick_star_graded, HeisenbergElement};
use wickstar::{Error, ExactComplex, MultiIndex, RealScalar, Result, Scalar};

/// Wick star products, seminorms and the Bargmann-Fock representation.
///
/// Jets are given as JSON files or as builtins: `one`, `z[:k]`, `zbar[:k]`,
/// `badguy`, `decoy`, `exp:ABAR/BETA`, `uw:W/C` (vectors are `re,im;re,im`).
/// Set WICKSTAR_EXACT=1 to run star, seminorm, table and fock in exact
/// rational arithmetic.
#[derive(Parser)]
#[command(name = "wickstar", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Clone)]
struct Common {
    /// Number of complex variables for builtin jets.
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// Planck constant carried by builtin jets (`p/q` or decimal).
    #[arg(long, default_value = "1/2")]
    hbar: String,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Subcommand)]
enum Command {
    /// Star product of two jets (or its graded components).
    Star {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        f: String,
        #[arg(long)]
        g: String,
        /// Deformation parameter; defaults to hbar.
        #[arg(long)]
        alpha: Option<String>,
        /// Output degree (required unless both factors are polynomials).
        #[arg(long)]
        degree: Option<u32>,
        #[arg(long)]
        ncut: Option<u32>,
        /// Emit the components C_0..C_r instead of the product.
        #[arg(long)]
        graded: Option<u32>,
    },
    /// One seminorm ||f||_{m,l,R,S}.
    Seminorm {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        f: String,
        #[arg(long, default_value_t = 0)]
        m: u32,
        #[arg(long, default_value_t = 0)]
        l: u64,
        #[arg(long = "R", default_value = "")]
        r: String,
        #[arg(long = "S", default_value = "")]
        s: String,
        #[arg(long, default_value_t = 150)]
        ncut: u32,
    },
    /// Seminorm sweep over m <= M, all l, |R|,|S| <= degree, and hbar values.
    Table {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        f: String,
        #[arg(long, default_value_t = 2)]
        m: u32,
        #[arg(long, default_value_t = 2)]
        degree: u32,
        /// Weight hbar values `h1;h2;...`; defaults to the jet's.
        #[arg(long)]
        hbars: Option<String>,
        #[arg(long, default_value_t = 150)]
        ncut: u32,
    },
    /// Every seminorm estimate on the grid, one row per instance.
    Inequalities {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        f: String,
        #[arg(long)]
        g: Option<String>,
        /// Highest seminorm level read.
        #[arg(long, default_value_t = 2)]
        m: u32,
        #[arg(long, default_value_t = 2)]
        degree: u32,
        #[arg(long, default_value_t = 150)]
        ncut: u32,
    },
    /// Divergence probe of delta_0(f * conj f) for a holomorphic f in one variable.
    Diverge {
        #[command(flatten)]
        common: Common,
        #[arg(long, conflicts_with = "f")]
        example: Option<String>,
        #[arg(long)]
        f: Option<String>,
        #[arg(long, default_value = "1/8;1/2;2;0")]
        hbars: String,
        #[arg(long, default_value_t = 400)]
        ncut: u32,
    },
    /// Matrix of pi(f) on the Fock space truncated at degree D, or the ladder operators.
    Fock {
        #[command(flatten)]
        common: Common,
        #[arg(long, required_unless_present = "ladder")]
        f: Option<String>,
        #[arg(long, default_value_t = 10)]
        dim: u32,
        #[arg(long)]
        ladder: bool,
    },
    /// Coherent-state expectations <psi_w, pi(f) psi_w> over points w (n = 1).
    Coherent {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        f: String,
        /// Points `re,im;re,im;...`.
        #[arg(long, conflicts_with = "grid")]
        w: Option<String>,
        /// Square grid `radius,k`: k x k points in [-radius, radius]^2.
        #[arg(long)]
        grid: Option<String>,
        #[arg(long, default_value = "0")]
        c: String,
        #[arg(long, default_value_t = 30)]
        dim: u32,
    },
    /// Convergence of the partial sums of the star exponential of t J_(w,c).
    Exp {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        w: String,
        #[arg(long, default_value = "0")]
        c: String,
        #[arg(long, default_value = "1/2")]
        t: String,
        #[arg(long, default_value_t = 16)]
        terms: u32,
        #[arg(long, default_value_t = 4)]
        degree: u32,
    },
    /// Run the acceptance suites; exit status 0 iff all pass.
    Verify {
        #[arg(long, default_value_t = suite::DEFAULT_SEED)]
        seed: u64,
        /// Subset of criteria `1;4;7`.
        #[arg(long)]
        only: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let exact = std::env::var("WICKSTAR_EXACT").is_ok_and(|v| v == "1");
    let result = if exact { dispatch::<ExactComplex>(cli.command) } else { dispatch::<C>(cli.command) };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", json!({"error": e.kind(), "message": e.to_string()}));
            ExitCode::from(2)
        }
    }
}

fn dispatch<T: Scalar>(command: Command) -> Result<ExitCode> {
    match command {
        Command::Star {
            common,
            f,
            g,
            alpha,
            degree,
            ncut,
            graded,
        } => star::<T>(&common, &f, &g, alpha.as_deref(), degree, ncut, graded),
        Command::Seminorm { common, f, m, l, r, s, ncut } => seminorm::<T>(&common, &f, m, l, &r, &s, ncut),
        Command::Table {
            common,
            f,
            m,
            degree,
            hbars,
            ncut,
        } => sweep::<T>(&common, &f, m, degree, hbars.as_deref(), ncut),
        Command::Inequalities {
            common,
            f,
            g,
            m,
            degree,
            ncut,
        } => inequalities(&common, &f, g.as_deref(), m, degree, ncut),
        Command::Diverge {
            common,
            example,
            f,
            hbars,
            ncut,
        } => diverge(&common, example.as_deref(), f.as_deref(), &hbars, ncut),
        Command::Fock { common, f, dim, ladder } => fock::<T>(&common, f.as_deref(), dim, ladder),
        Command::Coherent {
            common,
            f,
            w,
            grid,
            c,
            dim,
        } => coherent(&common, &f, w.as_deref(), grid.as_deref(), &c, dim),
        Command::Exp {
            common,
            w,
            c,
            t,
            terms,
            degree,
        } => exp(&common, &w, &c, &t, terms, degree),
        Command::Verify { seed, only, out, format } => verify(seed, only.as_deref(), out, format),
    }
}

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

fn parse_complex<T: Scalar>(s: &str) -> Result<T> {
    match s.split_once(',') {
        Some((re, im)) => Ok(T::from_parts(parse_real(re)?, parse_real(im)?)),
        None => Ok(T::from_real(parse_real(s)?)),
    }
}

fn parse_vector<T: Scalar>(s: &str) -> Result<Vec<T>> {
    s.split(';').filter(|x| !x.trim().is_empty()).map(parse_complex).collect()
}

fn parse_reals(s: &str) -> Result<Vec<f64>> {
    s.split(';').filter(|x| !x.trim().is_empty()).map(parse_real::<f64>).collect()
}

fn parse_index(s: &str, n: usize) -> Result<MultiIndex> {
    if s.trim().is_empty() {
        return Ok(MultiIndex::zero(n));
    }
    let entries = s
        .split(';')
        .map(|x| x.trim().parse::<u32>().map_err(|e| parse_err(format!("multi-index {s}: {e}"))))
        .collect::<Result<Vec<_>>>()?;
    if entries.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: entries.len(),
        });
    }
    MultiIndex::new(entries)
}

fn load_jet<T: Scalar>(spec: &str, common: &Common) -> Result<Jet<T>> {
    if Path::new(spec).is_file() {
        let text = std::fs::read_to_string(spec)?;
        return jet_from_json(&serde_json::from_str(&text)?);
    }
    let n = common.n;
    let hbar: T::Real = parse_real(&common.hbar)?;
    let origin = vec![T::zero(); n];
    let (head, arg) = spec.split_once(':').unwrap_or((spec, ""));
    let slot = || -> Result<usize> {
        if arg.is_empty() {
            return Ok(0);
        }
        arg.parse().map_err(|e| parse_err(format!("{spec}: {e}")))
    };
    let halves = || -> Result<(&str, &str)> {
        arg.split_once('/').ok_or_else(|| parse_err(format!("{spec}: expected A/B")))
    };
    match head {
        "one" => Jet::constant(n, origin, hbar, T::one()),
        "z" => Jet::coordinate(n, origin, hbar, slot()?, false),
        "zbar" => Jet::coordinate(n, origin, hbar, slot()?, true),
        "badguy" | "decoy" => {
            let f = if head == "badguy" { suite::badguy()? } else { suite::decoy()? };
            Jet::from_provider(1, vec![T::zero()], hbar, f.to_provider()?)
        }
        "exp" => {
            let (a, b) = halves()?;
            let abar: Vec<C> = parse_vector(a)?;
            let beta: Vec<C> = parse_vector(b)?;
            Jet::exponential(abar.len(), vec![T::zero(); abar.len()], hbar, abar, beta)
        }
        "uw" => {
            let (w, c) = halves()?;
            let w: Vec<T> = parse_vector(w)?;
            let g = HeisenbergElement::new(w, parse_real(c)?)?;
            let p = vec![T::zero(); g.n()];
            unitary_u(&g, &hbar, p)
        }
        _ => Err(parse_err(format!("no jet file or builtin named {spec}"))),
    }
}

fn emit(text: String, out: &Option<PathBuf>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn emit_json(v: &Value, common: &Common) -> Result<ExitCode> {
    emit(format!("{}\n", serde_json::to_string_pretty(v)?), &common.out)?;
    Ok(ExitCode::SUCCESS)
}

fn csv_rows(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(&row).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

fn index_text(i: &MultiIndex) -> String {
    i.entries().iter().map(u32::to_string).collect::<Vec<_>>().join(";")
}

fn jet_csv<T: Scalar>(f: &Jet<T>) -> Result<String> {
    csv_rows(
        &["I", "J", "re", "im"],
        f.terms().map(|((i, j), v)| vec![index_text(i), index_text(j), v.re().to_string(), v.im().to_string()]),
    )
}

fn star<T: Scalar>(
    common: &Common,
    f: &str,
    g: &str,
    alpha: Option<&str>,
    degree: Option<u32>,
    ncut: Option<u32>,
    graded: Option<u32>,
) -> Result<ExitCode> {
    let f: Jet<T> = load_jet(f, common)?;
    let g: Jet<T> = load_jet(g, common)?;
    if let Some(r) = graded {
        let out = wick_star_graded(&f, &g, r, degree)?;
        return emit_json(&json!({"command": "star", "graded": graded_to_json(&out)?}), common);
    }
    let alpha = match alpha {
        Some(a) => parse_complex::<T>(a)?,
        None => T::from_real(f.hbar().clone()),
    };
    let prod = wick_star(&f, &g, &alpha, degree, ncut)?;
    if common.format == Some(Format::Csv) {
        emit(jet_csv(&prod.value)?, &common.out)?;
        return Ok(ExitCode::SUCCESS);
    }
    emit_json(
        &json!({
            "command": "star",
            "alpha": [alpha.re().to_string(), alpha.im().to_string()],
            "status": prod.status,
            "tail": prod.tail,
            "note": prod.note,
            "product": jet_to_json(&prod.value)?,
        }),
        common,
    )
}

fn seminorm<T: Scalar>(common: &Common, f: &str, m: u32, l: u64, r: &str, s: &str, ncut: u32) -> Result<ExitCode> {
    let f: Jet<T> = load_jet(f, common)?;
    let params = SeminormParams::new(m, l, parse_index(r, f.n())?, parse_index(s, f.n())?)?;
    let mut ev = Evaluator::new(&f).with_cutoffs(Cutoffs::uniform(ncut));
    let h = ev.h(&params)?;
    let norm = h.clone().root(2f64.powi(m as i32 + 1));
    emit_json(
        &json!({
            "command": "seminorm",
            "m": m, "l": l, "R": params.r, "S": params.s,
            "hbar": ev.hbar(),
            "seminorm": norm.finite(),
            "h": h,
        }),
        common,
    )
}

fn sweep<T: Scalar>(common: &Common, f: &str, m: u32, degree: u32, hbars: Option<&str>, ncut: u32) -> Result<ExitCode> {
    let f: Jet<T> = load_jet(f, common)?;
    let hbars = match hbars {
        Some(h) => parse_reals(h)?,
        None => vec![f.hbar().to_f64()],
    };
    let rows = table(&f, m, degree, &hbars, &Cutoffs::uniform(ncut))?;
    if common.format == Some(Format::Json) {
        return emit_json(&json!({"command": "table", "rows": rows}), common);
    }
    emit(table_csv(&rows)?, &common.out)?;
    Ok(ExitCode::SUCCESS)
}

fn inequalities(common: &Common, f: &str, g: Option<&str>, m: u32, degree: u32, ncut: u32) -> Result<ExitCode> {
    let f: Jet<C> = load_jet(f, common)?;
    let g: Jet<C> = match g {
        Some(g) => load_jet(g, common)?,
        None => f.clone(),
    };
    let grid = Grid {
        m_max: m,
        level_cap: m,
        deg_max: degree,
        cutoffs: Cutoffs::uniform(ncut),
        ..Grid::default()
    };
    let rows = inequality_suite(&f, &g, &grid)?;
    if common.format == Some(Format::Csv) {
        let text = csv_rows(
            &["name", "params", "lhs", "rhs", "margin", "verdict"],
            rows.iter().map(|r| {
                vec![
                    r.name.clone(),
                    r.params.clone(),
                    fmt_f64(r.lhs),
                    fmt_f64(r.rhs),
                    fmt_f64(r.margin),
                    format!("{:?}", r.verdict).to_lowercase(),
                ]
            }),
        )?;
        emit(text, &common.out)?;
        return Ok(ExitCode::SUCCESS);
    }
    let count = |v: Verdict| rows.iter().filter(|r| r.verdict == v).count();
    emit_json(
        &json!({
            "command": "inequalities",
            "summary": {
                "rows": rows.len(),
                "pass": count(Verdict::Pass),
                "fail": count(Verdict::Fail),
                "unevaluable": count(Verdict::Unevaluable),
            },
            "rows": rows,
        }),
        common,
    )
}

fn diverge(common: &Common, example: Option<&str>, f: Option<&str>, hbars: &str, ncut: u32) -> Result<ExitCode> {
    let f: Jet<C> = match (example, f) {
        (Some("badguy"), _) => suite::badguy()?,
        (Some("decoy"), _) => suite::decoy()?,
        (Some(other), _) => return Err(Error::InvalidParameter(format!("unknown example {other}"))),
        (None, Some(spec)) => load_jet(spec, common)?,
        (None, None) => suite::badguy()?,
    };
    let reports = parse_reals(hbars)?
        .into_iter()
        .map(|h| divergence_probe(&f, h, ncut))
        .collect::<Result<Vec<_>>>()?;
    if common.format == Some(Format::Csv) {
        let rows = reports
            .iter()
            .flat_map(|r| r.log_terms.iter().enumerate().map(move |(k, &t)| vec![r.hbar, k as f64, t]))
            .collect::<Vec<_>>();
        emit(plot_csv(&["hbar", "r", "log_term"], &rows)?, &common.out)?;
        return Ok(ExitCode::SUCCESS);
    }
    emit_json(&json!({"command": "diverge", "reports": reports}), common)
}

fn fock<T: Scalar>(common: &Common, f: Option<&str>, dim: u32, ladder: bool) -> Result<ExitCode> {
    if ladder {
        let hbar = parse_real::<f64>(&common.hbar)?;
        let ops = ladder_ops(common.n, hbar, dim)?;
        let dump = |v: &[wickstar::fock::FockOperator]| v.iter().map(fock_operator_to_json).collect::<Vec<_>>();
        return emit_json(
            &json!({"command": "fock", "a": dump(&ops.a), "a_dag": dump(&ops.a_dag), "q": dump(&ops.q), "p": dump(&ops.p)}),
            common,
        );
    }
    let f: Jet<T> = load_jet(f.expect("clap requires f without --ladder"), common)?;
    let op = pi_matrix(&f, dim)?;
    if common.format == Some(Format::Csv) {
        let rows = (0..op.dim()).flat_map(|r| (0..op.dim()).map(move |c| (r, c))).map(|(r, c)| {
            let x = op.matrix[(r, c)];
            vec![r.to_string(), c.to_string(), fmt_f64(x.re), fmt_f64(x.im)]
        });
        emit(csv_rows(&["row", "col", "re", "im"], rows)?, &common.out)?;
        return Ok(ExitCode::SUCCESS);
    }
    emit_json(&json!({"command": "fock", "operator": fock_operator_to_json(&op)}), common)
}

fn coherent(common: &Common, f: &str, w: Option<&str>, grid: Option<&str>, c: &str, dim: u32) -> Result<ExitCode> {
    let f: Jet<C> = load_jet(f, common)?;
    if f.n() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, found: f.n() });
    }
    let points: Vec<C> = match (w, grid) {
        (Some(w), _) => parse_vector(w)?,
        (None, Some(g)) => {
            let (radius, k) = g.split_once(',').ok_or_else(|| parse_err("grid is radius,k"))?;
            let radius: f64 = parse_real(radius)?;
            let k: usize = k.trim().parse().map_err(|e| parse_err(format!("grid: {e}")))?;
            let step = |i: usize| if k > 1 { -radius + 2.0 * radius * i as f64 / (k - 1) as f64 } else { 0.0 };
            (0..k).flat_map(|i| (0..k).map(move |j| C::new(step(j), step(i)))).collect()
        }
        (None, None) => return Err(Error::InvalidParameter("give --w or --grid".into())),
    };
    let c: f64 = parse_real(c)?;
    let hbar = f.hbar().to_f64();
    let values = points
        .iter()
        .map(|&w| {
            let state = coherent_vector(&HeisenbergElement::new(vec![w], c)?, hbar, dim)?;
            Ok((w, expectation(&f, &state.vector)?))
        })
        .collect::<Result<Vec<_>>>()?;
    if common.format == Some(Format::Json) {
        let rows: Vec<Value> = values.iter().map(|(w, v)| json!({"w": [w.re, w.im], "value": [v.re, v.im]})).collect();
        return emit_json(&json!({"command": "coherent", "D": dim, "points": rows}), common);
    }
    emit(expectation_csv(&values)?, &common.out)?;
    Ok(ExitCode::SUCCESS)
}

fn exp(common: &Common, w: &str, c: &str, t: &str, terms: u32, degree: u32) -> Result<ExitCode> {
    let w: Vec<C> = parse_vector(w)?;
    let g = HeisenbergElement::new(w, parse_real(c)?)?;
    let t: f64 = parse_real(t)?;
    let hbar: f64 = parse_real(&common.hbar)?;
    let p = vec![C::new(0.0, 0.0); g.n()];
    let curve = (1..=terms)
        .map(|k| Ok(vec![f64::from(k), star_exp_partial(&g, &t, k, &hbar, p.clone(), degree)?.deviation]))
        .collect::<Result<Vec<_>>>()?;
    if common.format == Some(Format::Json) {
        let rows: Vec<Value> = curve.iter().map(|r| json!({"K": r[0] as u32, "deviation": r[1]})).collect();
        return emit_json(&json!({"command": "exp", "t": t, "hbar": hbar, "D_out": degree, "points": rows}), common);
    }
    emit(plot_csv(&["K", "deviation"], &curve)?, &common.out)?;
    Ok(ExitCode::SUCCESS)
}

fn verify(seed: u64, only: Option<&str>, out: Option<PathBuf>, format: Option<Format>) -> Result<ExitCode> {
    let ids: Vec<u32> = match only {
        Some(s) => s
            .split(';')
            .map(|x| x.trim().parse().map_err(|e| parse_err(format!("--only: {e}"))))
            .collect::<Result<_>>()?,
        None => (1..=suite::NAMES.len() as u32).collect(),
    };
    let mut reports: Vec<CriterionReport> = Vec::new();
    if out.is_some() || format.is_none() {
        println!("# wickstar verify seed={seed}");
    }
    for id in ids {
        let rep = suite::run(id, seed)?;
        if out.is_some() || format.is_none() {
            // Progress on the terminal even when the report goes to a file.
            println!("{rep}");
            for e in &rep.examples {
                println!("    {e}");
            }
        }
        reports.push(rep);
    }
    let passed = reports.iter().all(|r| r.passed);
    let status = if passed { "PASS" } else { "FAIL" };
    let code = u8::from(!passed);
    let summary = if only.is_some() {
        format!("subset {status}: exit status {code}")
    } else {
        format!("criterion 12 {status} verify: exit status {code}")
    };
    let text = match format {
        None => {
            println!("{summary}");
            None
        }
        Some(Format::Json) => Some(format!(
            "{}\n",
            serde_json::to_string_pretty(&json!({"seed": seed, "passed": passed, "criteria": reports}))?
        )),
        Some(Format::Csv) => {
            let body = csv_rows(
                &["id", "name", "passed", "checks", "failures", "detail"],
                reports.iter().map(|r| {
                    vec![
                        r.id.to_string(),
                        r.name.clone(),
                        r.passed.to_string(),
                        r.checks.to_string(),
                        r.failures.to_string(),
                        r.detail.clone(),
                    ]
                }),
            )?;
            Some(format!("# seed={seed}\n{body}"))
        }
    };
    if let Some(text) = text {
        emit(text, &out)?;
        if out.is_some() {
            println!("{summary}");
        }
    }
    Ok(if passed { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}
