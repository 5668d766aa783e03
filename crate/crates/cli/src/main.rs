//! Batch front end: analyze (heights, a', constants, §4 invariants),
//! volume, count, reduce, verify, example. JSON report envelopes on
//! stdout, structured errors on stderr, exit 0 iff all tasks succeed.

use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use decompform::count::{count_exact, RationalBound, Strategy};
use decompform::exceptional::a_prime;
use decompform::form::{parse_form, to_document, DecomposableForm, FormDoc};
use decompform::geom::constants;
use decompform::height::{
    height, minimize_height_real, ns_invariant, q_invariant, reduce_integral, OptimizerCfg,
};
use decompform::report::{digest_json, ReportEnvelope};
use decompform::verify;
use decompform::volume::{volume_monte_carlo, volume_radial};

#[derive(Parser)]
#[command(name = "decompform", version, about = "heights, volumes and lattice counts for decomposable forms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum VolumeMethodArg {
    Radial,
    MonteCarlo,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Height, geometric-height bracket, minimizers, a', constants, Q, NS
    Analyze {
        #[arg(long)]
        form: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        starts: usize,
        #[arg(long, default_value_t = 600)]
        max_iters: usize,
        #[arg(long, default_value_t = 1e-13)]
        tol: f64,
    },
    /// V(F) by radial quadrature and/or Monte Carlo
    Volume {
        #[arg(long)]
        form: PathBuf,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = VolumeMethodArg::Both)]
        method: VolumeMethodArg,
        #[arg(long, default_value_t = 200_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Exact N_F(m) with certified or user-supplied bounds
    Count {
        #[arg(long)]
        form: PathBuf,
        /// m as an integer or fraction, e.g. 100 or 5/2
        #[arg(long)]
        m: String,
        /// enumerate inside [-box, box]^n instead of certifying
        #[arg(long = "box")]
        box_half: Option<i64>,
        #[arg(long, default_value_t = false)]
        list_solutions: bool,
    },
    /// Unimodular reduction with the height bound and norm sandwich
    Reduce {
        #[arg(long)]
        form: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        starts: usize,
    },
    /// Run the executable checks; exit nonzero on any failure
    Verify {
        #[arg(long, default_value_t = false)]
        all: bool,
        /// one of: scaling-laws, lemma2, lemma3, lemma5a, lemma6, lemma7, section5
        #[arg(long)]
        check: Option<String>,
        #[arg(long)]
        form: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 4)]
        d: u32,
        #[arg(long, default_value_t = 1e-3)]
        eps: f64,
        #[arg(long)]
        p: Option<u32>,
    },
    /// Emit a named form document (and its section-5 check when applicable)
    Example {
        /// circle, xy, cubic, ellipse-product, norm-quartic-n3, or section5
        #[arg(long)]
        family: String,
        #[arg(long, default_value_t = 4)]
        d: u32,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        p: Option<u32>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_form(path: &PathBuf) -> Result<(DecomposableForm, String)> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading form document {}", path.display()))?;
    let doc: FormDoc = serde_json::from_str(&text).context("parsing form document JSON")?;
    let digest = digest_json(&doc);
    let form = parse_form(&doc)?;
    Ok((form, digest))
}

fn emit(command: &str, form_digest: &str, payload: serde_json::Value, started: Instant) -> Result<()> {
    let envelope = ReportEnvelope::new(command, form_digest, payload, started.elapsed().as_millis());
    println!("{}", serde_json::to_string_pretty(&envelope)?);
    Ok(())
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    let started = Instant::now();
    match cli.command {
        Command::Analyze { form, seed, starts, max_iters, tol } => {
            let (f, digest) = load_form(&form)?;
            let cfg = OptimizerCfg { seed, starts, max_iters, tol };
            let res = minimize_height_real(&f, &cfg)?;
            let exc = a_prime(&f, &res.minimizers)?;
            let table = constants(f.n(), f.degree(), exc.a_prime)?;
            let q = q_invariant(&f)?;
            let ns = ns_invariant(&f)?;
            let payload = json!({
                "n": f.n(),
                "degree": f.degree(),
                "integral": f.is_integral(),
                "height": height(&f),
                "minimization": {
                    "m_lower": res.m_lower,
                    "m_estimate": res.m_estimate,
                    "lemma3_upper": res.lemma3_upper,
                    "gs_start": res.gs_start,
                    "iterations": res.iterations,
                    "converged": res.converged,
                    "t_opt": res.t_opt.rows(),
                    "distinct_minimizers": res.minimizers.len(),
                },
                "exceptional": exc,
                "constants": table,
                "q_invariant": q,
                "ns_invariant": ns,
            });
            emit("analyze", &digest, payload, started)
        }
        Command::Volume { form, tol, method, samples, seed } => {
            let (f, digest) = load_form(&form)?;
            let mut payload = serde_json::Map::new();
            match method {
                VolumeMethodArg::Radial | VolumeMethodArg::Both => {
                    let v = volume_radial(&f, tol)?;
                    payload.insert("radial".into(), serde_json::to_value(&v)?);
                }
                VolumeMethodArg::MonteCarlo => {}
            }
            match method {
                VolumeMethodArg::MonteCarlo | VolumeMethodArg::Both => {
                    let v = volume_monte_carlo(&f, samples, seed)?;
                    payload.insert("monte_carlo".into(), serde_json::to_value(&v)?);
                }
                VolumeMethodArg::Radial => {}
            }
            emit("volume", &digest, payload.into(), started)
        }
        Command::Count { form, m, box_half, list_solutions } => {
            let (f, digest) = load_form(&form)?;
            let m = RationalBound::from_str_radix(&m)?;
            let strategy = match box_half {
                Some(b) => Strategy::Box(b),
                None => Strategy::Auto,
            };
            let res = count_exact(&f, &m, strategy, list_solutions)?;
            emit("count", &digest, serde_json::to_value(&res)?, started)
        }
        Command::Reduce { form, seed, starts } => {
            let (f, digest) = load_form(&form)?;
            let cfg = OptimizerCfg { seed, starts, ..OptimizerCfg::default() };
            let res = minimize_height_real(&f, &cfg)?;
            let red = reduce_integral(&f, &res)?;
            let n = f.n() as f64;
            let d = f.degree() as f64;
            let payload = json!({
                "m_estimate": res.m_estimate,
                "s_constructed": red.s_constructed,
                "s_improved": red.s_improved,
                "h_constructed": red.h_constructed,
                "m_upper": red.m_upper,
                "bound": n.powf(d * (n + 0.5)) * res.m_estimate.powf(n),
                "lambdas": red.minima.lambdas,
                "minima_vectors": red.minima.minima_vectors,
            });
            emit("reduce", &digest, payload, started)
        }
        Command::Verify { all, check, form, seed, trials, d, eps, p } => {
            let reports = if all || check.is_none() {
                verify::run_all(seed, trials)?
            } else {
                let id = check.unwrap();
                run_single_check(&id, form.as_ref(), seed, trials, d, eps, p)?
            };
            let any_fail = reports.iter().any(|r| !r.pass);
            emit("verify", "-", serde_json::to_value(&reports)?, started)?;
            if any_fail {
                bail!("{} check(s) failed", reports.iter().filter(|r| !r.pass).count());
            }
            Ok(())
        }
        Command::Example { family, d, eps, p, out } => {
            let (doc, extra): (FormDoc, serde_json::Value) = if family == "section5" {
                let eps = match (eps, p) {
                    (Some(e), _) => e,
                    (None, Some(p)) => (p as f64).powf(-2.0 / d as f64),
                    (None, None) => bail!("section5 needs --eps or --p"),
                };
                let f = match p {
                    Some(p) => decompform::families::p2_f_eps(d, p)?,
                    None => decompform::families::f_eps(d, eps)?,
                };
                let (rep, data) = verify::check_section5(d, eps, p, 0)?;
                (to_document(&f), json!({"check": rep, "section5": data}))
            } else {
                let f = decompform::families::by_name(&family)?;
                (to_document(&f), serde_json::Value::Null)
            };
            if let Some(path) = &out {
                std::fs::write(path, serde_json::to_string_pretty(&doc)?)
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            let digest = digest_json(&doc);
            let payload = json!({"form": doc, "detail": extra});
            emit("example", &digest, payload, started)
        }
    }
}

fn run_single_check(
    id: &str,
    form_path: Option<&PathBuf>,
    seed: u64,
    trials: usize,
    d: u32,
    eps: f64,
    p: Option<u32>,
) -> Result<Vec<decompform::CheckReport>> {
    let need_form = |path: Option<&PathBuf>| -> Result<(DecomposableForm, String)> {
        let path = path.context("this check needs --form")?;
        load_form(path)
    };
    let analysis = |f: &DecomposableForm| -> Result<_> {
        let cfg = OptimizerCfg { seed, ..OptimizerCfg::default() };
        let res = minimize_height_real(f, &cfg)?;
        let exc = a_prime(f, &res.minimizers)?;
        Ok((res, exc))
    };
    let reports = match id {
        "lemma5a" => vec![verify::check_lemma5a(trials.max(1000), seed)],
        "section5" => vec![verify::check_section5(d, eps, p, seed)?.0],
        "scaling-laws" => {
            let (f, _) = need_form(form_path)?;
            vec![verify::check_scaling_laws(&f, "cli", trials.min(100), seed)?]
        }
        "lemma2" => {
            let (f, _) = need_form(form_path)?;
            let (res, _) = analysis(&f)?;
            let v = volume_radial(&f, 1e-6)?;
            vec![verify::check_lemma2_theorem1(&f, "cli", &res, &v)?]
        }
        "lemma3" => {
            let (f, _) = need_form(form_path)?;
            let (res, _) = analysis(&f)?;
            vec![verify::check_lemma3(&f, "cli", &res, trials.max(1000), seed)?]
        }
        "lemma6" => {
            let (f, _) = need_form(form_path)?;
            let (res, exc) = analysis(&f)?;
            vec![verify::check_lemma6(&f, "cli", &res, &exc, trials.max(1000), seed)?]
        }
        "lemma7" => {
            let (f, _) = need_form(form_path)?;
            let (res, _) = analysis(&f)?;
            vec![verify::check_lemma7(&f, "cli", &res, 100, seed)?]
        }
        other => bail!(
            "unknown check '{other}' (try scaling-laws, lemma2, lemma3, lemma5a, lemma6, \
             lemma7, section5)"
        ),
    };
    Ok(reports)
}

fn main() {
    if let Err(e) = run() {
        let err = json!({"error": format!("{e:#}")});
        eprintln!("{}", serde_json::to_string(&err).unwrap());
        std::process::exit(1);
    }
}
