use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde::Deserialize;
use serde_json::{json, Value};

use vdw_core::ap::{find_blue_3ap, longest_red_ap, verify_certificate};
use vdw_core::construction::{build_coloring, ColoringInstance, Variant};
use vdw_core::diophantine::{measure_estimate, MeasureConfig, NRange};
use vdw_core::harness::{
    brute_force_w3, load_certificate, regenerate_coloring, run_experiment, run_trial, save_certificate, MissConfig,
    TrialConfig,
};
use vdw_core::kernels::{
    make_chi, make_chi_with_tau, uniform_betas, verify_chi_properties, verify_fejer_properties, ChiCheckConfig,
    FejerSpec,
};
use vdw_core::lattice::certify_subspace;
use vdw_core::params::{default_desk_params, validate_ordering, ParameterSet};
use vdw_core::rng::{stream, Purpose};

#[derive(Parser)]
#[command(name = "vdw", version, about = "Random-annulus colorings and w(3,k) experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args, Clone, Debug)]
struct Common {
    /// JSON config file for the subcommand.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file (or directory for `experiment`). Defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Derive or validate a parameter set.
    Params {
        #[command(subcommand)]
        action: ParamsAction,
    },
    /// Sample an instance and color [N].
    Construct {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = VariantArg::Independent)]
        variant: VariantArg,
        /// Also write the coloring as a certificate.
        #[arg(long)]
        certificate: Option<PathBuf>,
    },
    /// Run one trial, or check a certificate file.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        certificate: Option<PathBuf>,
    },
    /// Run many trials; writes trials.csv and summary.json.
    Experiment {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Radius draws for the planted-AP miss test (0 skips it).
        #[arg(long, default_value_t = 0)]
        miss_draws: usize,
        #[arg(long, value_enum, default_value_t = VariantArg::Independent)]
        variant: VariantArg,
    },
    /// Estimate the measure of the Diophantine good set.
    Diophantine {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Check the Fejér and cosine-power kernel properties.
    Kernels {
        #[command(flatten)]
        common: Common,
    },
    /// Certify a short basis for a bounded integer subspace.
    Lattice {
        #[command(flatten)]
        common: Common,
    },
    /// Exact w(3,k) by exhaustive search.
    Oracle {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, default_value_t = 128)]
        n_limit: usize,
    },
}

#[derive(Subcommand)]
enum ParamsAction {
    Derive {
        #[command(flatten)]
        common: Common,
    },
    Validate {
        #[command(flatten)]
        common: Common,
        /// Also require the ordering K < Y < M < rho^-D < X.
        #[arg(long)]
        strict: bool,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum VariantArg {
    Independent,
    Shared,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Independent => Variant::IndependentRadii,
            VariantArg::Shared => Variant::SharedRadius,
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_params(common: &Common) -> Result<ParameterSet> {
    match &common.config {
        Some(p) => Ok(ParameterSet::from_json(&read(p)?)?),
        None => Ok(default_desk_params()),
    }
}

fn load_config<T: for<'de> Deserialize<'de>>(common: &Common, default: T) -> Result<T> {
    match &common.config {
        Some(p) => serde_json::from_str(&read(p)?).with_context(|| format!("parsing {}", p.display())),
        None => Ok(default),
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("json value")
}

fn params_derive(common: &Common) -> Result<bool> {
    let p = load_params(common)?;
    let v = json!({
        "params": p.to_config(),
        "digest": p.digest(),
        "ordering": validate_ordering(&p).to_json(),
        "annulus_step_bound": p.annulus_step_bound_holds(),
    });
    emit(&common.out, &pretty(&v))?;
    Ok(true)
}

/// `valid` means the set parses and meets its mode's constraints; the
/// ordering is reported alongside and only enforced with `strict`.
fn params_validate(common: &Common, strict: bool) -> Result<bool> {
    let Some(path) = &common.config else { bail!("--config is required") };
    let (ok, v) = match ParameterSet::from_json(&read(path)?) {
        Ok(p) => {
            let ordering = validate_ordering(&p);
            let v = json!({
                "valid": true,
                "ordering_passed": ordering.passed,
                "ordering": ordering.to_json(),
                "annulus_step_bound": p.annulus_step_bound_holds(),
                "digest": p.digest(),
            });
            (!strict || ordering.passed, v)
        }
        Err(e) => (false, json!({"valid": false, "error": e.to_string()})),
    };
    emit(&common.out, &pretty(&v))?;
    Ok(ok)
}

fn construct(common: &Common, variant: VariantArg, certificate: &Option<PathBuf>) -> Result<bool> {
    let p = load_params(common)?;
    let inst = ColoringInstance::generate(&p, variant.into(), common.seed, 100)?;
    let n = p.desk.context("construct needs desk-scale parameters")?.n as usize;
    let colors = build_coloring(&inst, n)?;
    if let Some(path) = certificate {
        let red = longest_red_ap(&colors);
        save_certificate(&colors, red.length + 1, path)?;
    }
    emit(&common.out, &inst.to_json())?;
    eprintln!("N={n} blue={} blue_3ap={:?}", colors.blue_count(), find_blue_3ap(&colors));
    Ok(true)
}

fn verify(common: &Common, certificate: &Option<PathBuf>) -> Result<bool> {
    if let Some(path) = certificate {
        let (colors, k) = load_certificate(path)?;
        let verdict = verify_certificate(&colors, k);
        let v = json!({"N": colors.len(), "k": k, "accepted": verdict.accepted(), "verdict": format!("{verdict:?}")});
        emit(&common.out, &pretty(&v))?;
        return Ok(verdict.accepted());
    }
    let cfg = TrialConfig::new(load_params(common)?);
    let report = run_trial(&cfg, common.seed)?;
    let (_, colors) = regenerate_coloring(&cfg, common.seed)?;
    let reverified = report.reverify(&colors);
    let exception = report.theorem_applies && report.blue_witness.is_some();
    let v = json!({"report": report, "reverified": reverified, "theorem_exception": exception});
    emit(&common.out, &pretty(&v))?;
    Ok(reverified && !exception)
}

fn experiment(common: &Common, trials: usize, miss_draws: usize, variant: VariantArg) -> Result<bool> {
    let p = load_params(common)?;
    let desk = p.desk.context("experiment needs desk-scale parameters")?;
    let cfg = TrialConfig {
        variant: variant.into(),
        ..TrialConfig::new(p.clone())
    };
    let miss = (miss_draws > 0).then_some(MissConfig {
        dim: p.dim as usize,
        k: desk.k,
        y: desk.y as usize,
        width: p.width,
        rho: p.rho,
        draws: miss_draws,
    });
    let csv = match &common.out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            Some(dir.join("trials.csv"))
        }
        None => None,
    };
    let (summary, _) = run_experiment(&cfg, trials, common.seed, csv.as_deref(), miss.as_ref())?;
    let text = pretty(&serde_json::to_value(&summary)?);
    match &common.out {
        Some(dir) => fs::write(dir.join("summary.json"), &text)?,
        None => println!("{text}"),
    }
    Ok(summary.theorem_exceptions == 0)
}

fn diophantine(common: &Common, trials: Option<usize>) -> Result<bool> {
    let default = MeasureConfig {
        dim: 4,
        n_range: NRange::Exhaustive { n_max: 4096 },
        b: 3,
        eps: 0.02,
        rank_max: 2,
        trials: 2000,
        n_compare: 4096,
    };
    let mut cfg = load_config(common, default)?;
    if let Some(t) = trials {
        cfg.trials = t;
    }
    let report = measure_estimate(&cfg, common.seed)?;
    emit(&common.out, &report.to_csv())?;
    eprintln!(
        "in_Theta {}/{} fraction={:.4} ci=[{:.4},{:.4}] union_bound_failure={:.3e}",
        report.in_count, cfg.trials, report.fraction, report.ci_low, report.ci_high, report.union_bound_failure
    );
    Ok(true)
}

#[derive(Deserialize)]
struct ChiEntry {
    dim: usize,
    k: usize,
    #[serde(default)]
    s: Option<f64>,
    /// Exact rational such as "5/4"; overrides `s`.
    #[serde(default)]
    tau: Option<String>,
}

#[derive(Deserialize)]
struct KernelConfig {
    fejer_x: f64,
    betas: usize,
    chi: Vec<ChiEntry>,
}

fn kernels(common: &Common) -> Result<bool> {
    let default = KernelConfig {
        fejer_x: 10.0,
        betas: 10_000,
        chi: vec![
            ChiEntry { dim: 2, k: 6, s: None, tau: Some("5/4".into()) },
            ChiEntry { dim: 4, k: 200, s: Some(0.5), tau: None },
        ],
    };
    let cfg = load_config(common, default)?;
    let mut rng = stream(common.seed, Purpose::Sampling, 0);
    let betas = uniform_betas(cfg.betas, &mut rng);
    let mut reports = vec![verify_fejer_properties(&FejerSpec::new(cfg.fejer_x), &betas)];
    for e in &cfg.chi {
        let spec = match (&e.tau, e.s) {
            (Some(t), _) => {
                let tau: BigRational = t.parse().map_err(|_| anyhow::anyhow!("bad tau {t:?}"))?;
                make_chi_with_tau(e.dim, e.k, tau)?
            }
            (None, Some(s)) => make_chi(e.dim, e.k, s)?,
            (None, None) => bail!("chi entry needs s or tau"),
        };
        reports.push(verify_chi_properties(&spec, &ChiCheckConfig::for_spec(&spec, common.seed)));
    }
    let ok = reports.iter().all(|r| r.all_passed());
    emit(&common.out, &pretty(&serde_json::to_value(&reports)?))?;
    Ok(ok)
}

#[derive(Deserialize)]
struct LatticeConfig {
    generators: Vec<Vec<i64>>,
    q: i64,
}

fn lattice(common: &Common) -> Result<bool> {
    let Some(path) = &common.config else { bail!("--config is required") };
    let cfg: LatticeConfig = serde_json::from_str(&read(path)?)?;
    let v = match certify_subspace(&cfg.generators, cfg.q) {
        Ok(c) => json!({
            "certified": true,
            "points": c.points,
            "rank": c.rank,
            "max_norm": c.max_norm.to_string(),
            "norm_bound": c.norm_bound.to_string(),
            "max_coefficient": c.max_coefficient.to_string(),
            "coefficient_bound": c.coefficient_bound.to_string(),
            "mahler_bound_met": c.mahler_bound_met,
        }),
        Err(e) => json!({"certified": false, "error": e.to_string()}),
    };
    emit(&common.out, &pretty(&v))?;
    Ok(v["certified"] == json!(true))
}

fn oracle(common: &Common, k: usize, n_limit: usize) -> Result<bool> {
    let r = brute_force_w3(k, n_limit)?;
    if let Some(path) = &common.out {
        save_certificate(&r.certificate, k, path)?;
    }
    println!("{}", json!({"k": k, "w": r.w, "nodes": r.nodes}));
    Ok(true)
}

fn run(cli: Cli) -> Result<bool> {
    match cli.cmd {
        Command::Params { action: ParamsAction::Derive { common } } => params_derive(&common),
        Command::Params { action: ParamsAction::Validate { common, strict } } => params_validate(&common, strict),
        Command::Construct { common, variant, certificate } => construct(&common, variant, &certificate),
        Command::Verify { common, certificate } => verify(&common, &certificate),
        Command::Experiment { common, trials, miss_draws, variant } => experiment(&common, trials, miss_draws, variant),
        Command::Diophantine { common, trials } => diophantine(&common, trials),
        Command::Kernels { common } => kernels(&common),
        Command::Lattice { common } => lattice(&common),
        Command::Oracle { common, k, n_limit } => oracle(&common, k, n_limit),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
