//! The five commands. Each returns a JSON document and any tables it
//! produced; `run` writes them and attaches the manifest.

use std::path::Path;

use serde_json::{json, Value};
use wpcn_core::battery::{rho_bounds_closed, rho_for_mode, rho_lb_markov};
use wpcn_core::numerics::ErfClipConfig;
use wpcn_core::optimize::{
    feasible_region_finite_rho1, feasible_region_infinite, optimize_finite, optimize_free, FiniteSearchConfig,
};
use wpcn_core::simcore::{
    clamp_bias_bound, empirical_psuc, harvest_ccdf_gap, independence_gap, run_battery_frames, void_probability,
    SimConfig, CLAMP_DISTANCE,
};
use wpcn_core::uplink::{kappa, psuc_closed4};
use wpcn_core::{NetworkParams, Problem, WpcnError};

use crate::config::{Config, ModeKind};
use crate::error::CliError;
use crate::output::{num, Budget, RunManifest, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FigureId {
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
}

impl FigureId {
    pub fn name(self) -> &'static str {
        match self {
            FigureId::Fig3 => "fig3",
            FigureId::Fig4 => "fig4",
            FigureId::Fig5 => "fig5",
            FigureId::Fig6 => "fig6",
            FigureId::Fig7 => "fig7",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Experiment {
    /// Empirical vs analytic CCDF of the harvested energy.
    HarvestCcdf,
    /// Battery recursion vs the model's ρ for the configured mode.
    Battery,
    /// Two-node independence gap.
    Gap,
    /// Void probability of the active transmitters.
    Void,
    /// Uplink success probability vs the closed form.
    Psuc,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::HarvestCcdf => "harvest_ccdf",
            Experiment::Battery => "battery",
            Experiment::Gap => "gap",
            Experiment::Void => "void",
            Experiment::Psuc => "psuc",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Params,
    Rho(ModeKind),
    Optimize(ModeKind),
    Figure(FigureId),
    Simulate(Experiment),
}

impl Command {
    pub fn label(&self) -> String {
        match self {
            Command::Params => "params".into(),
            Command::Rho(m) => format!("rho_{}", mode_name(*m)),
            Command::Optimize(m) => format!("optimize_{}", mode_name(*m)),
            Command::Figure(f) => format!("figure_{}", f.name()),
            Command::Simulate(e) => format!("simulate_{}", e.name()),
        }
    }
}

fn mode_name(m: ModeKind) -> &'static str {
    match m {
        ModeKind::Free => "free",
        ModeKind::Finite => "finite",
        ModeKind::Infinite => "infinite",
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    /// The full JSON document, manifest included.
    pub document: Value,
    /// The optimizer found no feasible decision.
    pub infeasible: bool,
}

struct Produced {
    result: Value,
    tables: Vec<Table>,
    infeasible: bool,
}

impl Produced {
    fn value(result: Value) -> Self {
        Self { result, tables: Vec::new(), infeasible: false }
    }
}

/// Runs `cmd` and, when `out` is given, writes `<label>.json` and any CSV
/// tables there. Tables always need a directory, so figures default to the
/// current one.
pub fn run(cmd: Command, cfg: &Config, out: Option<&Path>) -> Result<Report, CliError> {
    let produced = match cmd {
        Command::Params => cmd_params(cfg)?,
        Command::Rho(m) => cmd_rho(cfg, m)?,
        Command::Optimize(m) => cmd_optimize(cfg, m)?,
        Command::Figure(f) => cmd_figure(cfg, f)?,
        Command::Simulate(e) => cmd_simulate(cfg, e)?,
    };
    let digest = cfg.digest();
    let label = cmd.label();
    let dir = match (out, produced.tables.is_empty()) {
        (Some(d), _) => Some(d),
        (None, false) => Some(Path::new(".")),
        (None, true) => None,
    };
    let mut outputs: Vec<String> = produced.tables.iter().map(|t| t.name.clone()).collect();
    let json_name = format!("{label}.json");
    if out.is_some() {
        outputs.push(RESOLVED_CONFIG.to_string());
        outputs.push(json_name.clone());
    }
    let manifest = RunManifest {
        config_digest: digest.clone(),
        seed: cfg.simulation.seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
        command: label,
        outputs,
    };
    let document = json!({ "manifest": manifest, "result": produced.result });
    if let Some(dir) = dir {
        std::fs::create_dir_all(dir)?;
        for t in &produced.tables {
            t.write(dir, &digest)?;
        }
        if out.is_some() {
            write_json(&dir.join(RESOLVED_CONFIG), &serde_json::to_value(cfg).expect("config serializes"))?;
            write_json(&dir.join(json_name), &document)?;
        }
    }
    Ok(Report { document, infeasible: produced.infeasible })
}

/// The configuration after defaults and command-line overrides; its digest
/// is the manifest's `config_digest`.
pub const RESOLVED_CONFIG: &str = "resolved_config.json";

fn write_json(path: &Path, value: &Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("value serializes");
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

fn problem(cfg: &Config, params: NetworkParams) -> Result<Problem, CliError> {
    let pr = Problem::new(params)?;
    Ok(match cfg.protocol.p_min_override {
        Some(p) => pr.with_p_min(p.watts())?,
        None => pr,
    })
}

fn cmd_params(cfg: &Config) -> Result<Produced, CliError> {
    let params = cfg.network_params();
    let pr = Problem::new(params)?;
    let k = pr.eq.k_epsilon;
    let high = params.lambda_w / k;
    let low = params.lambda_w / (k * f64::from(params.t_slots - 1));
    Ok(Produced::value(json!({
        "k_epsilon": k,
        "g0": pr.eq.g0,
        "v_e": ErfClipConfig::default().v_e,
        "p_min_w": pr.eq.p_min,
        "p_min_override_w": cfg.protocol.p_min_override.map(|p| p.watts()),
        "kappa": kappa(params.beta, params.alpha)?,
        "high_density_from_per_m2": high,
        "medium_density_from_per_m2": low,
        "lambda_ap_per_m2": params.lambda_ap,
        "regime": pr.free_regime(),
        "n0": pr.medium_n0().filter(|_| params.lambda_ap >= low && params.lambda_ap < high),
        "max_throughput_bps_hz_m2": pr.max_throughput(),
    })))
}

fn cmd_rho(cfg: &Config, mode: ModeKind) -> Result<Produced, CliError> {
    let params = cfg.network_params();
    let (n, pu) = (cfg.protocol.n_dl, cfg.protocol.p_u.watts());
    let clip = ErfClipConfig::default();
    let markov = cfg.markov();
    let c = cfg.battery.capacity.watts();
    if mode == ModeKind::Finite && c >= pu {
        let m = rho_lb_markov(&params, n, pu, c, &markov)?;
        let bounds = rho_bounds_closed(&params, n, pu, c, &clip)?;
        return Ok(Produced::value(json!({
            "mode": mode,
            "n_dl": n,
            "p_u_w": pu,
            "capacity_w": c,
            "rho": m.rho,
            "markov": m,
            "closed_bounds": bounds,
        })));
    }
    let rho = rho_for_mode(&params, n, pu, cfg.battery_mode(mode), &clip, &markov)?;
    Ok(Produced::value(json!({ "mode": mode, "n_dl": n, "p_u_w": pu, "rho": rho })))
}

fn cmd_optimize(cfg: &Config, mode: ModeKind) -> Result<Produced, CliError> {
    let pr = problem(cfg, cfg.network_params())?;
    let mut extra = None;
    let outcome = match mode {
        ModeKind::Free => optimize_free(&pr)?,
        ModeKind::Infinite => feasible_region_infinite(&pr),
        ModeKind::Finite => {
            let search = FiniteSearchConfig { n_power_grid: cfg.battery.n_power_grid, markov: cfg.markov() };
            extra = Some(feasible_region_finite_rho1(&pr)?);
            optimize_finite(&pr, cfg.battery.capacity.watts(), &search)?.outcome
        }
    };
    let infeasible = !outcome.feasible;
    let mut result = json!({ "mode": mode, "p_min_w": pr.eq.p_min, "outcome": outcome });
    if let Some(region) = extra {
        result["rho_one_region"] = serde_json::to_value(region).expect("serializes");
    }
    Ok(Produced { result, tables: Vec::new(), infeasible })
}

fn sim_meta(sim: &SimConfig, lambda_ap: f64) -> Value {
    json!({
        "window_side_m": sim.window_side,
        "interim_side_m": sim.interim_side,
        "frames": sim.frames,
        "seed": sim.seed,
        "mobility": sim.mobility,
        "clamp_distance_m": CLAMP_DISTANCE,
        "clamp_bias_bound": clamp_bias_bound(lambda_ap),
    })
}

fn cmd_simulate(cfg: &Config, exp: Experiment) -> Result<Produced, CliError> {
    let budget = Budget::new(cfg.simulation.max_seconds);
    let params = cfg.network_params();
    let sim = cfg.sim_config()?;
    let (n, pu) = (cfg.protocol.n_dl, cfg.protocol.p_u.watts());
    let clip = ErfClipConfig::default();
    let mut result = match exp {
        Experiment::HarvestCcdf => json!({ "n_dl": n, "sup_gap": harvest_ccdf_gap(&sim, &params, n)? }),
        Experiment::Battery => {
            let empirical = run_battery_frames(&sim, &params, n, pu)?;
            let model = rho_for_mode(&params, n, pu, sim.mode, &clip, &cfg.markov())?;
            json!({ "mode": cfg.battery.kind, "n_dl": n, "p_u_w": pu, "empirical_rho": empirical, "model_rho": model })
        }
        Experiment::Gap => json!({ "n_dl": n, "p_u_w": pu, "gap": independence_gap(&sim, &params, n, pu)? }),
        Experiment::Void => {
            let points = void_probability(&sim, &params, n, pu, &cfg.sweeps.fig4.sides)?;
            json!({ "n_dl": n, "p_u_w": pu, "points": points })
        }
        Experiment::Psuc => {
            let rho = rho_for_mode(&params, n, pu, sim.mode, &clip, &cfg.markov())?;
            json!({
                "n_dl": n,
                "p_u_w": pu,
                "rho": rho,
                "empirical": empirical_psuc(&sim, &params, rho, n, pu)?,
                "closed_form": psuc_closed4(&params, rho, n, pu)?,
            })
        }
    };
    budget.check(exp.name())?;
    result["simulation"] = sim_meta(&sim, params.lambda_ap);
    Ok(Produced::value(result))
}

fn cmd_figure(cfg: &Config, fig: FigureId) -> Result<Produced, CliError> {
    match fig {
        FigureId::Fig3 => fig3(cfg),
        FigureId::Fig4 => fig4(cfg),
        FigureId::Fig5 => fig5(cfg),
        FigureId::Fig6 => fig6(cfg),
        FigureId::Fig7 => fig7(cfg),
    }
}

fn fig3(cfg: &Config) -> Result<Produced, CliError> {
    let sw = &cfg.sweeps.fig3;
    let budget = Budget::new(cfg.simulation.max_seconds);
    let base = NetworkParams { lambda_w: sw.lambda_w.per_m2(), t_slots: sw.t_slots, ..cfg.network_params() };
    let mut table =
        Table::new("fig3.csv", vec!["interim_side_m", "p_u_w", "lambda_ap_per_m2", "marginal_product", "joint", "gap"]);
    let mut worst = 0.0_f64;
    for sc in &sw.scenarios {
        let sim = SimConfig { interim_side: sc.interim_side.meters(), ..cfg.sim_config()? };
        sim.validate()?;
        for &lambda_ap in &sw.lambda_ap {
            let params = NetworkParams { lambda_ap, ..base };
            let g = independence_gap(&sim, &params, sw.n_dl, sc.p_u.watts())?;
            budget.check("fig3")?;
            worst = worst.max(g.gap);
            table.push(vec![
                num(sim.interim_side),
                num(sc.p_u.watts()),
                num(lambda_ap),
                num(g.p1 * g.p2),
                num(g.joint),
                num(g.gap),
            ]);
        }
    }
    Ok(Produced {
        result: json!({ "rows": table.rows.len(), "max_gap": worst }),
        tables: vec![table],
        infeasible: false,
    })
}

fn fig4(cfg: &Config) -> Result<Produced, CliError> {
    let sw = &cfg.sweeps.fig4;
    let budget = Budget::new(cfg.simulation.max_seconds);
    let params = NetworkParams {
        lambda_ap: sw.lambda_ap.per_m2(),
        lambda_w: sw.lambda_w.per_m2(),
        t_slots: sw.t_slots,
        ..cfg.network_params()
    };
    let l_max = sw.sides.iter().copied().fold(0.0_f64, f64::max);
    let sim = SimConfig { interim_side: l_max, ..cfg.sim_config()? };
    sim.validate()?;
    let points = void_probability(&sim, &params, sw.n_dl, sw.p_u.watts(), &sw.sides)?;
    budget.check("fig4")?;
    let mut table = Table::new("fig4.csv", vec!["side_m", "empirical_void", "analytic_void"]);
    for p in &points {
        table.push(vec![num(p.side), num(p.empirical), num(p.analytic)]);
    }
    let worst = points.iter().map(|p| (p.empirical - p.analytic).abs()).fold(0.0, f64::max);
    let result = json!({ "max_abs_gap": worst, "simulation": sim_meta(&sim, params.lambda_ap) });
    Ok(Produced { result, tables: vec![table], infeasible: false })
}

fn fig5(cfg: &Config) -> Result<Produced, CliError> {
    let params = cfg.network_params();
    let (n, pu) = (cfg.protocol.n_dl, cfg.protocol.p_u.watts());
    let clip = ErfClipConfig::default();
    let markov = cfg.markov();
    let mut table = Table::new(
        "fig5.csv",
        vec![
            "capacity_w",
            "rho_markov",
            "rho_closed_lower",
            "rho_chernoff",
            "rho_battery_free",
            "rho_upper",
            "markov_states",
        ],
    );
    for &c in &cfg.sweeps.fig5.capacity {
        let m = rho_lb_markov(&params, n, pu, c, &markov)?;
        let b = rho_bounds_closed(&params, n, pu, c, &clip)?;
        table.push(vec![
            num(c),
            num(m.rho),
            num(b.lower),
            num(b.chernoff_branch),
            num(b.erf_branch),
            num(b.upper),
            m.states.to_string(),
        ]);
    }
    let result = json!({ "n_dl": n, "p_u_w": pu, "rows": table.rows.len() });
    Ok(Produced { result, tables: vec![table], infeasible: false })
}

fn fig6(cfg: &Config) -> Result<Produced, CliError> {
    let sw = &cfg.sweeps.fig6;
    let mut table = Table::new(
        "fig6.csv",
        vec![
            "lambda_w_per_m2",
            "lambda_ap_per_m2",
            "regime",
            "feasible",
            "n_dl",
            "p_u_w",
            "rho",
            "throughput_bps_hz_m2",
        ],
    );
    let mut saturation = Vec::new();
    for &lambda_w in &sw.lambda_w {
        let mut first_saturated = None;
        let mut max_r = None;
        for &lambda_ap in &sw.lambda_ap {
            let params = NetworkParams { lambda_ap, lambda_w, ..cfg.network_params() };
            // P_min scales as 1/λ_AP², so sparse AP fields can be infeasible outright
            let pr = match Problem::new(params) {
                Err(WpcnError::InfeasibleParams(_)) => {
                    table.push(vec![
                        num(lambda_w),
                        num(lambda_ap),
                        "p_min_above_p_max".into(),
                        "false".into(),
                        String::new(),
                        String::new(),
                        num(0.0),
                        num(0.0),
                    ]);
                    continue;
                }
                r => r?,
            };
            let o = optimize_free(&pr)?;
            max_r = Some(pr.max_throughput());
            if o.feasible && o.throughput >= pr.max_throughput() && first_saturated.is_none() {
                first_saturated = Some(lambda_ap);
            }
            let regime = serde_json::to_value(o.regime).expect("serializes");
            let (n, p) = o.best.map_or((String::new(), String::new()), |d| (d.n_dl.to_string(), num(d.p_u)));
            table.push(vec![
                num(lambda_w),
                num(lambda_ap),
                regime.as_str().unwrap_or_default().to_string(),
                o.feasible.to_string(),
                n,
                p,
                num(o.rho_at_best),
                num(o.throughput),
            ]);
        }
        saturation.push(json!({
            "lambda_w_per_m2": lambda_w,
            "max_throughput_bps_hz_m2": max_r,
            "saturates_at_lambda_ap_per_m2": first_saturated,
        }));
    }
    Ok(Produced { result: json!({ "saturation": saturation }), tables: vec![table], infeasible: false })
}

fn fig7(cfg: &Config) -> Result<Produced, CliError> {
    let sw = &cfg.sweeps.fig7;
    let params = cfg.network_params();
    let pr = problem(cfg, params)?;
    let search = FiniteSearchConfig { n_power_grid: sw.n_power_grid, markov: cfg.markov() };
    let grid = optimize_finite(&pr, sw.capacity.watts(), &search)?;
    let best = grid.outcome.best;
    let mut table =
        Table::new("fig7.csv", vec!["n_dl", "p_u_w", "rho_lb", "constraint_ok", "throughput_bps_hz_m2", "is_argmax"]);
    for c in &grid.cells {
        let is_best = best.is_some_and(|b| b.n_dl == c.n_dl && b.p_u == c.p_u);
        table.push(vec![
            c.n_dl.to_string(),
            num(c.p_u),
            num(c.rho),
            c.constraint_ok.to_string(),
            num(c.throughput),
            is_best.to_string(),
        ]);
    }
    let formula = Problem::new(params)?.eq.p_min;
    let result = json!({
        "capacity_w": sw.capacity.watts(),
        "p_min_formula_w": formula,
        "p_min_used_w": pr.eq.p_min,
        "outcome": grid.outcome,
    });
    let infeasible = !grid.outcome.feasible;
    Ok(Produced { result, tables: vec![table], infeasible })
}
