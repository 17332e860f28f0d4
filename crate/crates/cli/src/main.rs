use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use eichler::group::{GroupElement, MultiplierSystem};
use eichler::growth::GrowthGrid;
use eichler::jacobi::{build_testform, check_cuspidal, JacobiForm, TEST_WEIGHT};
use eichler::lfunc::{LMethod, PartialL};
use eichler::periods::{EichlerIntegral, PeriodCocycle, PeriodMethod};
use eichler::poincare::{cosets, eisenstein_psi, generalized_poincare, synthetic_coboundary, CocycleInput, ConstructedF, KmPoincare};
use eichler::rational::qi;
use eichler::suites::{self, RunConfig, TolProfile};
use eichler::theta::{decompose, vv_transform_check};
use eichler::weil::{build_generators, CMat, JParity, RELATION_TOL};
use num_complex::Complex64;
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

#[derive(Parser)]
#[command(name = "eichler", version, about = "Jacobi forms, theta decomposition, period cocycles and their checks")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Index m of the Jacobi form / Weil representation.
    #[arg(long, global = true)]
    index: Option<i64>,
    #[arg(long, global = true)]
    weight: Option<f64>,
    /// q-expansion truncation order.
    #[arg(long, global = true, default_value_t = 60)]
    truncation: i64,
    /// Coset bound max(|c|, |d|) for Poincare series.
    #[arg(long, global = true, default_value_t = 300)]
    bound: i64,
    /// Requested decimal digits (evaluation is f64; more than 15 only warns).
    #[arg(long, global = true, default_value_t = 15)]
    precision: u32,
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,
    #[arg(long = "tol-profile", global = true, value_enum, default_value_t = Profile::Default)]
    tol_profile: Profile,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Profile {
    Loose,
    Default,
    Strict,
}

impl From<Profile> for TolProfile {
    fn from(p: Profile) -> Self {
        match p {
            Profile::Loose => TolProfile::Loose,
            Profile::Default => TolProfile::Default,
            Profile::Strict => TolProfile::Strict,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Build or inspect Jacobi forms.
    Form {
        #[command(subcommand)]
        action: FormCmd,
    },
    /// Theta decomposition into a vector-valued form.
    Decompose {
        #[arg(long)]
        form: Option<PathBuf>,
    },
    /// Period polynomial and cocycle values g_gamma(tau).
    Periods {
        #[arg(long)]
        form: Option<PathBuf>,
        #[arg(long, default_value = "0,-1,1,0")]
        gamma: String,
        /// Sample point "x,y" for tau = x + iy; repeatable.
        #[arg(long)]
        tau: Vec<String>,
        #[arg(long, value_enum, default_value_t = Method::Termwise)]
        method: Method,
        /// Same as --out.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Critical partial L-values as CSV (mu, n, re, im, method, err).
    Lvalues {
        #[arg(long)]
        form: Option<PathBuf>,
        #[arg(long, default_value = "0,-1,1,0")]
        gamma: String,
        #[arg(long, value_enum, default_value_t = LKind::Integral)]
        method: LKind,
    },
    /// Eisenstein psi, generalized Poincare series and F, or Knopp-Mason series.
    Poincare {
        #[arg(long, value_enum, default_value_t = Mode::Psi)]
        mode: Mode,
        #[arg(long)]
        tau: Vec<String>,
        /// Exponent r of the psi / generalized series.
        #[arg(long, default_value_t = 8)]
        r: i64,
        /// Cocycle fed to the generalized series.
        #[arg(long, value_enum, default_value_t = Input::Synthetic)]
        input: Input,
        /// Fourier index m of the Knopp-Mason series.
        #[arg(long = "m-idx", default_value_t = 0)]
        m_idx: i64,
        #[arg(long, default_value_t = 0)]
        component: usize,
    },
    /// Weil representation matrices and relation residuals.
    Weilrep {
        #[arg(long = "check-relations")]
        check_relations: bool,
        #[arg(long)]
        gamma: Option<String>,
    },
    /// Run verification suites and write a versioned JSON report.
    Verify {
        /// weil, theta, decompose, cocycle, lift, poincare, obstruction, growth or all; repeatable or comma separated.
        #[arg(long, value_delimiter = ',', default_value = "all")]
        suite: Vec<String>,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long)]
        form: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum FormCmd {
    /// The shipped test form eta^7 A^2 (weight 9/2, index 1).
    BuildTest,
    /// Cuspidality witness and sampled modular residuals of a form file.
    Info {
        #[arg(long)]
        form: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Termwise,
    Quadrature,
}

#[derive(Clone, Copy, ValueEnum)]
enum LKind {
    Integral,
    Dirichlet,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Psi,
    Generalized,
    Km,
}

#[derive(Clone, Copy, ValueEnum)]
enum Input {
    Synthetic,
    Periods,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn config(c: &Common) -> RunConfig {
    RunConfig {
        seed: c.seed,
        precision: c.precision,
        truncation: c.truncation,
        bound: c.bound,
        profile: c.tol_profile.into(),
        ..RunConfig::default()
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json(out: Option<&Path>, v: &Value) -> Result<()> {
    emit(out, &(serde_json::to_string_pretty(v)? + "\n"))
}

fn cjson(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn vjson<'a>(v: impl IntoIterator<Item = &'a Complex64>) -> Value {
    Value::Array(v.into_iter().map(|z| cjson(*z)).collect())
}

fn mjson(m: &CMat) -> Value {
    Value::Array((0..m.nrows()).map(|i| vjson(m.row(i).iter())).collect())
}

fn parse_tau(s: &str) -> Result<Complex64> {
    let (x, y) = s.split_once(',').ok_or_else(|| anyhow!("tau must be \"x,y\", got {s:?}"))?;
    let tau = Complex64::new(x.trim().parse()?, y.trim().parse()?);
    if tau.im <= 0.0 {
        bail!("tau must lie in the upper half-plane, got {s:?}");
    }
    Ok(tau)
}

fn taus_or_default(v: &[String]) -> Result<Vec<Complex64>> {
    if v.is_empty() {
        return Ok(vec![Complex64::new(0.1, 1.1), Complex64::new(-0.3, 0.8)]);
    }
    v.iter().map(|s| parse_tau(s)).collect()
}

fn load_form(path: Option<&Path>, c: &Common) -> Result<JacobiForm> {
    let form = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            JacobiForm::from_json(&serde_json::from_str(&text)?)?
        }
        None => build_testform(qi(c.truncation))?,
    };
    if let Some(m) = c.index {
        if m != form.m {
            bail!("--index {m} does not match the form's index {}", form.m);
        }
    }
    Ok(form)
}

fn run(cli: Cli) -> Result<bool> {
    let c = &cli.common;
    let cfg = config(c);
    for w in cfg.warnings() {
        eprintln!("warning: {w}");
    }
    let out = c.out.as_deref();
    match &cli.cmd {
        Cmd::Form { action: FormCmd::BuildTest } => {
            if let Some(w) = c.weight {
                if w != TEST_WEIGHT {
                    bail!("the test form has weight {TEST_WEIGHT}, not {w}");
                }
            }
            if c.index.is_some_and(|m| m != 1) {
                bail!("the test form has index 1");
            }
            emit_json(out, &build_testform(qi(c.truncation))?.to_json())?;
            Ok(true)
        }
        Cmd::Form { action: FormCmd::Info { form } } => {
            let f = load_form(Some(form), c)?;
            let pts = [
                (Complex64::new(0.1, 1.1), Complex64::new(0.2, 0.05)),
                (Complex64::new(-0.3, 0.9), Complex64::new(-0.1, 0.1)),
            ];
            let mut res = serde_json::Map::new();
            for (name, g) in [("S", GroupElement::S), ("T", GroupElement::T)] {
                res.insert(name.into(), json!(f.modular_residual(&g, &pts)?));
            }
            emit_json(
                out,
                &json!({
                    "weight": f.weight,
                    "m": f.m,
                    "multiplier_eta_power": f.multiplier.eta_power,
                    "truncation": f.series.truncation().to_string(),
                    "cuspidal": check_cuspidal(&f.series),
                    "modular_residuals": res,
                }),
            )?;
            Ok(true)
        }
        Cmd::Decompose { form } => {
            let f = load_form(form.as_deref(), c)?;
            let g = decompose(&f, &build_generators(f.m, JParity::Odd)?)?;
            let taus = taus_or_default(&[])?;
            let mut v = g.to_json();
            let tst = GroupElement::T * GroupElement::S * GroupElement::T;
            v["transform_residuals"] = json!({
                "S": vv_transform_check(&g, &GroupElement::S, &taus)?,
                "T": vv_transform_check(&g, &GroupElement::T, &taus)?,
                "TST": vv_transform_check(&g, &tst, &taus)?,
            });
            emit_json(out, &v)?;
            Ok(true)
        }
        Cmd::Periods { form, gamma, tau, method, report } => {
            let f = load_form(form.as_deref(), c)?;
            let g: GroupElement = gamma.parse()?;
            let method = match method {
                Method::Termwise => PeriodMethod::Termwise,
                Method::Quadrature => PeriodMethod::Quadrature,
            };
            let vv = decompose(&f, &build_generators(f.m, JParity::Odd)?)?;
            let ei = Arc::new(EichlerIntegral::new(vv)?);
            let pc = PeriodCocycle::new(ei.clone(), method);
            let taus = taus_or_default(tau)?;
            let mut values = Vec::new();
            for t in &taus {
                values.push(json!({"tau": cjson(*t), "value": vjson(pc.value(&g, *t)?.iter())}));
            }
            let poly = if g.fixes_infinity() {
                Value::Null
            } else {
                let p = pc.polynomial(&g)?;
                json!({
                    "x0": p.x0,
                    "k": p.k,
                    "moments": p.moments.iter().map(|m| vjson(m.iter())).collect::<Vec<_>>(),
                })
            };
            let v = json!({
                "gamma": g.to_string(),
                "word": eichler::group::format_word(&g.word()),
                "k": ei.k,
                "method": format!("{method:?}").to_lowercase(),
                "polynomial": poly,
                "values": values,
            });
            emit_json(report.as_deref().or(out), &v)?;
            Ok(true)
        }
        Cmd::Lvalues { form, gamma, method } => {
            let f = load_form(form.as_deref(), c)?;
            let w = check_cuspidal(&f.series);
            if !w.cuspidal {
                let at = w
                    .at
                    .map(|(n, r)| format!(" at q^{} zeta^{}", f.series.q_exponent(n), f.series.z_exponent(r)))
                    .unwrap_or_default();
                let d = w.min_discriminant.map(|(a, b)| format!("{a}/{b}")).unwrap_or_default();
                bail!("refused: form is not cuspidal (check_cuspidal witness: minimal discriminant {d}{at})");
            }
            let g: GroupElement = gamma.parse()?;
            let pl = PartialL::from_form(&f, &build_generators(f.m, JParity::Odd)?)?;
            let k = pl.integral.k;
            if k.fract() != 0.0 || k < 0.0 {
                bail!("critical values need an integer k = weight - 5/2, got {k}");
            }
            let tol = cfg.tol(1e-10);
            let mut csv = String::from("mu,n,re,im,method,err\n");
            for mu in 0..pl.dim() {
                for n in 0..=(k as u32) {
                    let s = Complex64::new((n + 1) as f64, 0.0);
                    let lm = match method {
                        LKind::Integral => LMethod::Integral,
                        LKind::Dirichlet => LMethod::Dirichlet,
                    };
                    let v = pl.value(mu, &g, s, lm, tol)?;
                    csv.push_str(&format!(
                        "{mu},{n},{:e},{:e},{},{:e}\n",
                        v.value.re, v.value.im, v.method, v.error_estimate
                    ));
                }
            }
            emit(out, &csv)?;
            Ok(true)
        }
        Cmd::Poincare { mode, tau, r, input, m_idx, component } => {
            let taus = taus_or_default(tau)?;
            let rows = match mode {
                Mode::Psi => {
                    let set = cosets(c.bound)?;
                    taus.iter()
                        .map(|t| {
                            let p = eisenstein_psi(*t, *r, &set)?;
                            Ok(json!({"tau": cjson(*t), "value": cjson(p.value), "tail": p.tail, "majorant": p.majorant}))
                        })
                        .collect::<Result<Vec<_>>>()?
                }
                Mode::Generalized => {
                    let ci = match input {
                        Input::Synthetic => synthetic_coboundary()?.0,
                        Input::Periods => periods_input(c)?,
                    };
                    let f = ConstructedF::new(ci, *r, c.bound)?;
                    taus.iter()
                        .map(|t| {
                            let phi = generalized_poincare(&f.input, *r, *t, &f.set)?;
                            let fv = f.eval(*t)?;
                            Ok(json!({
                                "tau": cjson(*t),
                                "phi": vjson(phi.value.iter()),
                                "tail": phi.tail,
                                "f": vjson(fv.value.iter()),
                                "psi": cjson(fv.psi),
                                "near_psi_zero": fv.near_psi_zero,
                            }))
                        })
                        .collect::<Result<Vec<_>>>()?
                }
                Mode::Km => {
                    let m = c.index.unwrap_or(1);
                    let w = c.weight.unwrap_or(6.5);
                    if (2.0 * w).fract() != 0.0 {
                        bail!("Knopp-Mason weight must be a multiple of 1/2, got {w}");
                    }
                    let spec = build_generators(m, JParity::Odd)?;
                    let km = KmPoincare::new(spec.rho, MultiplierSystem::eta_power((2.0 * w) as i64, w), *m_idx, *component)?;
                    let set = cosets(c.bound)?;
                    taus.iter()
                        .map(|t| {
                            let p = km.eval(*t, &set)?;
                            Ok(json!({"tau": cjson(*t), "value": vjson(p.value.iter()), "tail": p.tail}))
                        })
                        .collect::<Result<Vec<_>>>()?
                }
            };
            let name = match mode {
                Mode::Psi => "psi",
                Mode::Generalized => "generalized",
                Mode::Km => "km",
            };
            emit_json(out, &json!({"mode": name, "bound": c.bound, "rows": rows}))?;
            Ok(true)
        }
        Cmd::Weilrep { check_relations, gamma } => {
            let m = c.index.unwrap_or(1);
            let spec = build_generators(m, JParity::Odd)?;
            let rel = spec.relation_check();
            let mut v = json!({
                "m": m,
                "dim": spec.dim,
                "chi_prime_eta_power": spec.chi_prime.eta_power,
                "bare_s": mjson(&spec.bare_s),
                "bare_t": mjson(&spec.bare_t()),
                "rho_s": mjson(&spec.element(&GroupElement::S)),
                "rho_t": mjson(&spec.element(&GroupElement::T)),
                "relations": rel,
            });
            if let Some(gs) = gamma {
                let g: GroupElement = gs.parse()?;
                v["gamma"] = json!(g.to_string());
                v["rho_gamma"] = mjson(&spec.element(&g));
            }
            emit_json(out, &v)?;
            if *check_relations {
                let tol = cfg.tol(RELATION_TOL);
                let ok = rel.max() < tol;
                eprintln!("{} relations: max residual {:e} (tolerance {tol:e})", if ok { "PASS" } else { "FAIL" }, rel.max());
                return Ok(ok);
            }
            Ok(true)
        }
        Cmd::Verify { suite, trials, form } => {
            let mut cfg = RunConfig { trials: *trials, ..cfg };
            if let Some(p) = form {
                cfg.truncation = suites::shipped_form_truncation(&load_form(Some(p), c)?)?;
            }
            let names: Vec<&str> = suite.iter().map(|s| s.as_str()).collect();
            let command = format!("verify --suite {}", suite.join(","));
            let rep = suites::run(&names, &cfg, &command)?;
            for s in &rep.suites {
                for ch in s.checks.iter().filter(|ch| !ch.passed) {
                    eprintln!("  {}: {} = {:e} exceeds {:e}", s.suite, ch.name, ch.value, ch.tolerance);
                }
                eprintln!("{} {}", if s.passed { "PASS" } else { "FAIL" }, s.suite);
            }
            emit(out, &(rep.to_json()? + "\n"))?;
            Ok(rep.passed)
        }
    }
}

fn periods_input(c: &Common) -> Result<CocycleInput> {
    let f = build_testform(qi(c.truncation))?;
    let vv = decompose(&f, &build_generators(1, JParity::Odd)?)?;
    let pc = Arc::new(PeriodCocycle::new(Arc::new(EichlerIntegral::new(vv)?), PeriodMethod::Termwise));
    let mut g_s = pc.element(&GroupElement::S);
    g_s.certify_growth(&GrowthGrid::default())?;
    Ok(CocycleInput::new(g_s, pc.action().clone()))
}
