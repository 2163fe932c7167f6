use clap::{Args, Parser, Subcommand};
use gtkit::diagnostics::record;
use gtkit::error::GtError;
use gtkit::evolution::evolve;
use gtkit::experiments::{
    run_analytic_ip, run_equipartition, run_focusing_proxy, run_inflation_energy, run_inflation_negative,
    run_symmetry_check, run_virial_check, Check, Outcome, SweepSpec,
};
use gtkit::io::{append_jsonl, config_to_toml, parse_config, write_records, write_snapshot, RunConfig};
use gtkit::picard::tau::xi1_tau;
use gtkit::picard::{sum_series, xi_series};
use gtkit::spectral::{sobolev_norm, SobolevIndex};
use serde_json::{json, Value};
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "gtkit", version, about = "Spectral solver and checks for the averaged NLS")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; overrides `out_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// `key.path=value` override, repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve the configured data and write records and the final snapshot.
    Simulate(Common),
    /// Picard terms up to the configured depth and partial sums at the sample times.
    Picard(Common),
    /// First iterate at the sample times.
    Xi1(Common),
    /// Norm inflation from frequency-box data below the mass-subcritical index.
    InflateNeg(Common),
    /// Gaussian scaling table and equipartition times.
    InflateEnergy(Common),
    /// Defocusing equipartition run, or the focusing blowup proxy.
    Equipartition {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        focusing: bool,
    },
    /// Growth of the first iterate on annulus data.
    Ipscale(Common),
    /// Pseudo-symmetry residuals.
    Symmetry(Common),
    /// Finite-difference check of the virial identities.
    VirialCheck(Common),
    /// Functionals and Sobolev norms of the configured data.
    Norms(Common),
}

/// Exit status classes.
enum Failure {
    Config(String),
    Inconclusive(String),
}

impl From<GtError> for Failure {
    fn from(e: GtError) -> Self {
        match e {
            GtError::StepRejected { .. } | GtError::QuadratureResolution { .. } => Failure::Inconclusive(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

struct Ctx {
    cfg: RunConfig,
    out: PathBuf,
    quiet: bool,
}

impl Ctx {
    fn say(&self, line: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", line.as_ref());
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn report(&self, command: &str, body: Value) -> Result<(), Failure> {
        append_jsonl(&json!({ "command": command, "report": body }), &self.path("report.jsonl"))?;
        Ok(())
    }
}

fn load(common: &Common, experiment: Option<&str>) -> Result<Ctx, Failure> {
    let text = match &common.config {
        Some(p) => fs::read_to_string(p).map_err(|e| Failure::Config(format!("{}: {e}", p.display())))?,
        None => String::new(),
    };
    let mut overrides = Vec::new();
    if let Some(id) = experiment {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| Failure::Config(e.to_string()))?;
        if table.get("experiment").and_then(|e| e.get("id")).is_none() {
            overrides.push(format!("experiment.id=\"{id}\""));
        }
    }
    overrides.extend(common.set.iter().cloned());
    let cfg = parse_config(&text, &overrides)?;
    if let Some(id) = experiment {
        let given = cfg.experiment.as_ref().map(|e| e.id());
        if given != Some(id) {
            return Err(Failure::Config(format!(
                "config holds experiment `{}`, not `{id}`",
                given.unwrap_or("none")
            )));
        }
    }
    let out = common.out.clone().unwrap_or_else(|| cfg.out_dir.clone());
    fs::create_dir_all(&out).map_err(|e| Failure::Config(format!("{}: {e}", out.display())))?;
    fs::write(out.join("config.toml"), config_to_toml(&cfg)?).map_err(GtError::from)?;
    Ok(Ctx {
        cfg,
        out,
        quiet: common.quiet,
    })
}

fn print_checks(ctx: &Ctx, checks: &[Check], outcome: Outcome) {
    for c in checks {
        ctx.say(format!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail));
    }
    ctx.say(format!("outcome: {}", serde_json::to_value(outcome).unwrap_or(Value::Null)));
}

fn verdict(outcome: Outcome) -> ExitCode {
    match outcome {
        Outcome::Pass => ExitCode::SUCCESS,
        Outcome::Fail => ExitCode::from(1),
        Outcome::Inconclusive => ExitCode::from(3),
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> Result<Value, Failure> {
    serde_json::to_value(v).map_err(|e| Failure::Config(e.to_string()))
}

fn simulate(ctx: &Ctx) -> Result<ExitCode, Failure> {
    let grid = ctx.cfg.grid()?;
    let gt = ctx.cfg.gt_config(&grid)?;
    let u0 = ctx.cfg.initial_data(&grid)?;
    let traj = evolve(&u0, &ctx.cfg.solver, &gt)?;
    write_records(&traj.records, &ctx.cfg.solver.s_list, &ctx.path("records.csv"))?;
    write_snapshot(traj.final_state(), traj.final_time(), gt.gamma, gt.p, &ctx.path("final.gts"))?;
    ctx.report(
        "simulate",
        json!({
            "final_time": traj.final_time(),
            "blowup_suspected": traj.blowup_suspected,
            "steps_accepted": traj.steps_accepted,
            "steps_rejected": traj.steps_rejected,
            "dt": traj.dt,
            "captures": traj.times.len(),
        }),
    )?;
    ctx.say(format!(
        "t = {} after {} steps ({} rejected), {} captures",
        traj.final_time(),
        traj.steps_accepted,
        traj.steps_rejected,
        traj.times.len()
    ));
    if traj.blowup_suspected {
        ctx.say("blowup suspected: step size collapsed before the final time");
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}

fn picard(ctx: &Ctx) -> Result<ExitCode, Failure> {
    let grid = ctx.cfg.grid()?;
    let gt = ctx.cfg.gt_config(&grid)?;
    let u0 = ctx.cfg.initial_data(&grid)?;
    let pc = &ctx.cfg.picard;
    let series = xi_series(&u0, pc.horizon, pc.depth, pc.nodes, &gt)?;
    if let Some(w) = &series.warning {
        ctx.say(format!("warning: {w}"));
    }
    let mut sums = Vec::new();
    let mut divergent = false;
    for (k, &t) in pc.sample_times.iter().enumerate() {
        let s = sum_series(&series, t)?;
        write_snapshot(&s.field, t, gt.gamma, gt.p, &ctx.path(&format!("picard_{k}.gts")))?;
        divergent |= s.divergent;
        ctx.say(format!("t = {t}: error estimate {:.3e}, ratio {:?}", s.error_estimate, s.ratio));
        sums.push(json!({
            "t": t,
            "error_estimate": s.error_estimate,
            "ratio": s.ratio,
            "divergent": s.divergent,
        }));
    }
    ctx.say(format!("term norms (s = {}): {:?}", series.norm_index, series.term_norms));
    ctx.report(
        "picard",
        json!({
            "norm_index": series.norm_index,
            "term_norms": series.term_norms,
            "warning": series.warning,
            "sums": sums,
        }),
    )?;
    Ok(if divergent { ExitCode::from(3) } else { ExitCode::SUCCESS })
}

fn xi1(ctx: &Ctx) -> Result<ExitCode, Failure> {
    let grid = ctx.cfg.grid()?;
    let gt = ctx.cfg.gt_config(&grid)?;
    let u0 = ctx.cfg.initial_data(&grid)?;
    let times = &ctx.cfg.picard.sample_times;
    let terms = xi1_tau(&u0, times, &gt, 0.5)?;
    let mut rows = Vec::new();
    for (k, (f, &t)) in terms.iter().zip(times).enumerate() {
        write_snapshot(f, t, gt.gamma, gt.p, &ctx.path(&format!("xi1_{k}.gts")))?;
        let norms = ctx
            .cfg
            .solver
            .s_list
            .iter()
            .map(|&s| Ok(json!({ "s": s, "value": sobolev_norm(f, SobolevIndex::inhomogeneous(s))? })))
            .collect::<Result<Vec<_>, GtError>>()?;
        ctx.say(format!("t = {t}: ||Xi_1||_L2 = {:.6e}", f.l2_norm()));
        rows.push(json!({ "t": t, "l2": f.l2_norm(), "hs_norms": norms }));
    }
    ctx.report("xi1", json!({ "samples": rows }))?;
    Ok(ExitCode::SUCCESS)
}

fn norms(ctx: &Ctx) -> Result<ExitCode, Failure> {
    let grid = ctx.cfg.grid()?;
    let gt = ctx.cfg.gt_config(&grid)?;
    let u0 = ctx.cfg.initial_data(&grid)?;
    let rec = record(&u0, 0.0, &gt, &ctx.cfg.solver.s_list)?;
    ctx.say(format!(
        "mass {:.12e}  kinetic {:.12e}  potential {:.12e}  energy {:.12e}  variance {:.12e}",
        rec.mass, rec.kinetic, rec.potential, rec.energy, rec.variance
    ));
    for h in &rec.hs_norms {
        ctx.say(format!("H^{} norm {:.12e}", h.s, h.value));
    }
    ctx.report("norms", to_json(&rec)?)?;
    Ok(ExitCode::SUCCESS)
}

fn experiment(ctx: &Ctx, name: &str, focusing: bool) -> Result<ExitCode, Failure> {
    let spec = ctx
        .cfg
        .experiment
        .clone()
        .ok_or_else(|| Failure::Config("no experiment section".into()))?;
    let (body, checks, outcome) = match spec {
        SweepSpec::InflateNeg(s) => {
            let r = run_inflation_negative(&s)?;
            (to_json(&r)?, r.checks, r.outcome)
        }
        SweepSpec::Ipscale(s) => {
            let r = run_analytic_ip(&s)?;
            (to_json(&r)?, r.checks, r.outcome)
        }
        SweepSpec::InflateEnergy(s) => {
            let r = run_inflation_energy(&s)?;
            (to_json(&r)?, r.checks, r.outcome)
        }
        SweepSpec::Equipartition(s) if focusing => {
            let r = run_focusing_proxy(&s)?;
            (to_json(&r)?, r.checks, r.outcome)
        }
        SweepSpec::Equipartition(s) => {
            let r = run_equipartition(&s)?;
            (to_json(&r)?, r.checks, r.outcome)
        }
        SweepSpec::Symmetry(s) => {
            let r = run_symmetry_check(&s)?;
            (to_json(&r)?, r.checks, r.outcome)
        }
        SweepSpec::VirialCheck(s) => {
            let r = run_virial_check(&s)?;
            (to_json(&r)?, r.checks, r.outcome)
        }
    };
    ctx.report(name, body)?;
    print_checks(ctx, &checks, outcome);
    Ok(verdict(outcome))
}

fn run(cli: Cli) -> Result<ExitCode, Failure> {
    let exp = |common: &Common, id: &str, focusing: bool| -> Result<ExitCode, Failure> {
        let ctx = load(common, Some(id))?;
        let name = if focusing { "focusing" } else { id };
        experiment(&ctx, name, focusing)
    };
    match &cli.command {
        Command::Simulate(c) => simulate(&load(c, None)?),
        Command::Picard(c) => picard(&load(c, None)?),
        Command::Xi1(c) => xi1(&load(c, None)?),
        Command::Norms(c) => norms(&load(c, None)?),
        Command::InflateNeg(c) => exp(c, "inflate-neg", false),
        Command::InflateEnergy(c) => exp(c, "inflate-energy", false),
        Command::Equipartition { common, focusing } => exp(common, "equipartition", *focusing),
        Command::Ipscale(c) => exp(c, "ipscale", false),
        Command::Symmetry(c) => exp(c, "symmetry", false),
        Command::VirialCheck(c) => exp(c, "virial-check", false),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Inconclusive(m)) => {
            eprintln!("inconclusive: {m}");
            ExitCode::from(3)
        }
    }
}
