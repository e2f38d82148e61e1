//! Command-line front end: flag parsing, config resolution and the commands.

pub mod config;
pub mod output;

use std::f64::consts::PI;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::acceptance::{run_criterion, AcceptanceConfig, Relation, CRITERIA};
use crate::dual_graph::{build_intersection_matrix, format_matrix, kodaira_catalog, pseudoinverse, validate_zariski, KodairaType};
use crate::dynamics::{birkhoff_limit, flat_potential_identity, limit_potential_relation, pushforward_growth};
use crate::error::{Error, Result};
use crate::geometry::{DensityField, DensitySpec, FamilyConfig, WarpedChain};
use crate::node_integral::{asymptote_fit, node_curve};
use crate::pairing::{fit_log_asymptote, pairing_sweep, predicted_constant, random_density, require_condition1, seeded_rng, SweepSettings, DEFAULT_WINDOW};
use crate::potential::{estimate_report, solve_direct_with};
use crate::spectral::{correlation_matrix, full_spectrum, graph_limit_eigs_with_conductance, model_functions, truncated_green_min, Angular, EigenSystem, RampStyle};

use config::{Config, DensityInput};
use output::{Cell, Table};

#[derive(Debug, Parser)]
#[command(name = "heightlab", version, about = "Height pairings and spectra of degenerating Riemann surfaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Experiment config (sectioned key = value file).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override a config entry, e.g. `--set family.n=3`.
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE", global = true)]
    pub set: Vec<String>,
    /// Directory for CSV output; without it tables go to stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// `lo:hi:n` geometric grid or a comma list of L values.
    #[arg(long = "L-grid", global = true)]
    pub l_grid: Option<String>,
    /// `lo:hi` fit window in L.
    #[arg(long = "fit-window", global = true)]
    pub fit_window: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Inline η, e.g. `e22 = 1; e11 = z1*zb1`.
    #[arg(long, global = true)]
    pub eta: Option<String>,
    /// `lo:hi:n` or a comma list of |t| values.
    #[arg(long = "t-grid", global = true)]
    pub t_grid: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Intersection matrix, pseudoinverse and Zariski report of a Kodaira fiber.
    Kodaira {
        #[arg(long = "type")]
        kind: String,
    },
    /// Full spectrum at one L.
    Spectrum,
    /// Small eigenvalues and the gap along an L grid.
    SweepSpectrum,
    /// Model-function energies and the correlation matrix along an L grid.
    Modelfns,
    /// Minimum of the truncated Green function along an L grid.
    Green,
    /// Preferred potential of the alpha density and its low/high split.
    Potential,
    /// Height pairing sweep and log-asymptote fit.
    Pairing,
    /// Synthetic runs on a translation-automorphism torus fibration.
    Dynamics {
        #[arg(value_enum)]
        mode: DynamicsMode,
    },
    /// Fiber integral near a node and its log asymptote.
    NodeIntegral,
    /// Runs the acceptance suite.
    Verify,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DynamicsMode {
    Birkhoff,
    Growth,
    FlatIdentity,
    LimitPotential,
}

/// What a command produced: lines for the terminal, CSV tables and the exit
/// status on success.
#[derive(Debug, Default)]
pub struct Report {
    pub summary: Vec<String>,
    pub tables: Vec<Table>,
    pub exit: i32,
}

impl Cli {
    /// Config file plus `--set` overrides plus the dedicated flags, in that order.
    pub fn resolve_config(&self) -> Result<Config> {
        let mut cfg = match &self.config {
            Some(p) => Config::load(p)?,
            None => Config::default(),
        };
        for s in &self.set {
            cfg.apply_override(s)?;
        }
        if let Some(v) = &self.l_grid {
            cfg.set("sweep", "l_grid", v);
        }
        if let Some(v) = &self.fit_window {
            cfg.set("sweep", "fit_window", v);
        }
        if let Some(v) = self.seed {
            cfg.set("solver", "seed", &v.to_string());
        }
        if let Some(v) = &self.t_grid {
            cfg.set("node", "t_grid", v);
        }
        if let Some(v) = &self.out {
            cfg.set("output", "dir", &v.to_string_lossy());
        }
        if let Some(eta) = &self.eta {
            for part in eta.split(';').map(str::trim).filter(|p| !p.is_empty()) {
                let (k, v) = part.split_once('=').ok_or_else(|| Error::Parse(format!("expected key=poly in '{part}'")))?;
                cfg.apply_override(&format!("node.{}={}", k.trim(), v.trim()))?;
            }
        }
        Ok(cfg)
    }
}

pub fn execute(cli: &Cli, cfg: &Config) -> Result<Report> {
    match &cli.command {
        Command::Kodaira { kind } => kodaira(kind),
        Command::Spectrum => spectrum(cfg),
        Command::SweepSpectrum => sweep_spectrum(cfg),
        Command::Modelfns => modelfns(cfg),
        Command::Green => green(cfg),
        Command::Potential => potential(cfg),
        Command::Pairing => pairing(cfg),
        Command::Dynamics { mode } => dynamics(cfg, *mode),
        Command::NodeIntegral => node_integral(cfg),
        Command::Verify => verify(cfg),
    }
}

/// Runs the command and writes its output; returns the process exit status.
pub fn run(cli: &Cli, stdout: &mut impl Write, stderr: &mut impl Write) -> i32 {
    match run_inner(cli, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn run_inner(cli: &Cli, stdout: &mut impl Write) -> Result<i32> {
    let cfg = cli.resolve_config()?;
    let out = cfg.output()?;
    let report = execute(cli, &cfg)?;
    let hash = cfg.hash();
    for line in &report.summary {
        writeln!(stdout, "{line}")?;
    }
    for t in &report.tables {
        match &out.dir {
            Some(dir) => {
                let path = t.write(dir, &hash, out.precision)?;
                writeln!(stdout, "wrote {}", path.display())?;
            }
            None => write!(stdout, "{}", t.render(&hash, out.precision)?)?,
        }
    }
    Ok(report.exit)
}

fn angular_label(a: Angular) -> String {
    match a {
        Angular::Zero => "zero".into(),
        Angular::Cos(m) => format!("cos{m}"),
        Angular::Sin(m) => format!("sin{m}"),
    }
}

fn kodaira(kind: &str) -> Result<Report> {
    let t: KodairaType = kind.parse()?;
    let g = kodaira_catalog(t)?;
    let m = build_intersection_matrix(&g)?;
    let p = pseudoinverse(&m)?;
    let z = validate_zariski(&m, &g.multiplicities());
    let mut summary = vec![format!("fiber type {t}, {} components, multiplicities {:?}", g.len(), g.multiplicities())];
    summary.push("M =".into());
    summary.extend(format_matrix(&m.entries).lines().map(String::from));
    summary.push("M+ =".into());
    summary.extend(format_matrix(&p).lines().map(String::from));
    summary.push(format!(
        "Zariski: max eigenvalue {:.3e}, kernel dimension {}, kernel residual {:.3e}, symmetric {}, pass {}",
        z.max_eigenvalue, z.kernel_dim, z.kernel_residual, z.symmetric, z.pass
    ));
    let mut table = Table::new("kodaira", &["i", "j", "m", "m_plus"]);
    for i in 0..g.len() {
        for j in 0..g.len() {
            table.push(vec![i.into(), j.into(), m.entries[(i, j)].into(), p[(i, j)].into()]);
        }
    }
    table.note("zariski_pass", z.pass);
    Ok(Report { summary, tables: vec![table], exit: 0 })
}

fn spectrum_at(cfg: &Config, fam: &FamilyConfig, l: f64) -> Result<(WarpedChain, EigenSystem)> {
    let solver = cfg.solver()?;
    let chain = WarpedChain::build(fam, l, solver.resolution)?;
    let sys = full_spectrum(&chain, solver.spectrum)?;
    Ok((chain, sys))
}

fn graph_limit(fam: &FamilyConfig, chain: &WarpedChain) -> Result<Vec<f64>> {
    if !fam.necks || fam.n_components() < 2 {
        return Ok(Vec::new());
    }
    graph_limit_eigs_with_conductance(&fam.dual_graph()?, chain.neck_conductance())
}

const SPECTRUM_HEADER: [&str; 10] = ["L", "s", "k", "m", "angular", "lambda", "lambda_times_L", "graph_limit", "gap", "certified"];

fn spectrum_row(sys: &EigenSystem, chain: &WarpedChain, k: usize, limit: &[f64]) -> Vec<Cell> {
    let e = &sys.entries[k];
    let lim = if k >= 1 { limit.get(k - 1).copied() } else { None };
    vec![
        chain.l_param.into(),
        chain.s_modulus().into(),
        k.into(),
        e.mode().into(),
        angular_label(e.angular).into(),
        e.lambda.into(),
        (e.lambda * chain.l_param).into(),
        lim.into(),
        sys.gap_value.into(),
        e.certified.into(),
    ]
}

fn spectrum(cfg: &Config) -> Result<Report> {
    let fam = cfg.family()?;
    let l = cfg.l_param()?;
    let (chain, sys) = spectrum_at(cfg, &fam, l)?;
    let limit = graph_limit(&fam, &chain)?;
    let mut t = Table::new("spectrum", &SPECTRUM_HEADER);
    for k in 0..sys.entries.len() {
        t.push(spectrum_row(&sys, &chain, k, &limit));
    }
    t.note("low_count", sys.low_count);
    t.note("below_half_gap", sys.count_below_half_gap());
    t.note("certified_count", sys.certified_count);
    t.note("max_residual", sys.max_residual);
    let mut summary = vec![format!(
        "L = {l}: {} eigenpairs, {} small, gap λ_N = {:.6}, {} below gap/2",
        sys.entries.len(),
        sys.low_count,
        sys.gap_value,
        sys.count_below_half_gap()
    )];
    summary.extend(sys.warning.clone());
    Ok(Report { summary, tables: vec![t], exit: 0 })
}

fn sweep_spectrum(cfg: &Config) -> Result<Report> {
    let fam = cfg.family()?;
    let grid = cfg.l_grid()?;
    let runs = grid.par_iter().map(|&l| spectrum_at(cfg, &fam, l)).collect::<Result<Vec<_>>>()?;
    let mut t = Table::new("sweep_spectrum", &SPECTRUM_HEADER);
    let mut summary = Vec::new();
    for (chain, sys) in &runs {
        let limit = graph_limit(&fam, chain)?;
        for k in 1..=(sys.low_count + 1).min(sys.entries.len() - 1) {
            t.push(spectrum_row(sys, chain, k, &limit));
        }
        summary.push(format!("L = {}: gap {:.6}, {} below gap/2", chain.l_param, sys.gap_value, sys.count_below_half_gap()));
    }
    Ok(Report { summary, tables: vec![t], exit: 0 })
}

fn modelfns(cfg: &Config) -> Result<Report> {
    let fam = cfg.family()?;
    let grid = cfg.l_grid()?;
    let runs = grid
        .par_iter()
        .map(|&l| {
            let (chain, sys) = spectrum_at(cfg, &fam, l)?;
            let mfs = model_functions(&chain, RampStyle::FullNeck)?;
            let corr = correlation_matrix(&sys, &mfs)?;
            Ok((l, mfs, corr))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut t = Table::new(
        "modelfns",
        &["L", "i", "energy_times_L", "closed_form_times_L", "norm_sq", "norm_bound", "e_frobenius", "residual_times_L"],
    );
    for (l, mfs, corr) in &runs {
        let rl = corr.residuals_times_l();
        for i in 0..mfs.energies.len() {
            t.push(vec![
                (*l).into(),
                i.into(),
                (mfs.energies[i] * l).into(),
                (mfs.closed_form_energies[i] * l).into(),
                mfs.norms[i].into(),
                (1.0 + 8.0 * PI / l).into(),
                corr.e_frobenius.into(),
                rl.get(i).copied().into(),
            ]);
        }
    }
    Ok(Report { summary: vec![format!("{} L values", runs.len())], tables: vec![t], exit: 0 })
}

fn green(cfg: &Config) -> Result<Report> {
    let fam = cfg.family()?;
    let grid = cfg.l_grid()?;
    let tail = cfg.solver()?.green_tail;
    let runs = grid
        .par_iter()
        .map(|&l| {
            let (chain, sys) = spectrum_at(cfg, &fam, l)?;
            Ok((l, chain, truncated_green_min(&sys, tail)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut t = Table::new("green", &["L", "min", "x_i", "x_j", "diagonal_min", "included", "lambda_last", "tail_bound"]);
    let mut worst = f64::INFINITY;
    for (l, chain, g) in &runs {
        worst = worst.min(g.min);
        t.push(vec![
            (*l).into(),
            g.min.into(),
            chain.nodes[g.argmin.0].into(),
            chain.nodes[g.argmin.1].into(),
            g.diagonal_min.into(),
            g.included.into(),
            g.lambda_last.into(),
            g.tail_bound.into(),
        ]);
    }
    t.note("sweep_min", worst);
    Ok(Report { summary: vec![format!("min G^N over the sweep: {worst:.6}")], tables: vec![t], exit: 0 })
}

fn resolve_density(cfg: &Config, which: &str, fam: &FamilyConfig, rng: &mut Option<rand_chacha::ChaCha8Rng>) -> Result<DensitySpec> {
    match cfg.density(which)? {
        DensityInput::Explicit(s) => Ok(s),
        DensityInput::Random { condition2 } => {
            let rng = rng.as_mut().ok_or_else(|| Error::Validation(format!("[density.{which}] random needs [solver] seed")))?;
            Ok(random_density(fam, rng, condition2))
        }
    }
}

fn rng_for(cfg: &Config) -> Result<Option<rand_chacha::ChaCha8Rng>> {
    Ok(cfg.solver()?.seed.map(seeded_rng))
}

fn check_condition1(spec: &DensitySpec, chain: &WarpedChain, project: bool) -> Result<DensityField> {
    let a = DensityField::from_spec(spec, chain, project)?;
    require_condition1(&a)?;
    Ok(a)
}

fn potential(cfg: &Config) -> Result<Report> {
    let fam = cfg.family()?;
    let solver = cfg.solver()?;
    let mut rng = rng_for(cfg)?;
    let spec = resolve_density(cfg, "alpha", &fam, &mut rng)?;
    let l = cfg.l_param()?;
    let (chain, sys) = spectrum_at(cfg, &fam, l)?;
    let a = check_condition1(&spec, &chain, solver.project)?;
    let phi = solve_direct_with(&sys.mode0, &a)?.with_split(&sys.mode0, &sys)?;
    let split = phi.split.as_ref().ok_or_else(|| Error::NonConvergence("frequency split unavailable".into()))?;
    let mut t = Table::new("potential", &["x", "a", "phi", "phi_low", "phi_high"]);
    for i in 0..chain.n_nodes() {
        t.push(vec![chain.nodes[i].into(), a.samples[i].into(), phi.phi[i].into(), split.low[i].into(), split.high[i].into()]);
    }
    t.note("L", l);
    t.note("sup_phi", phi.sup_norm());
    t.note("residual", phi.residual);
    t.note("projection_shift", a.projection_shift);
    let mut summary = vec![format!("L = {l}: sup|φ| = {:.6}, residual {:.3e}", phi.sup_norm(), phi.residual)];
    let mut tables = vec![t];
    if cfg.get("sweep", "l_grid").is_some() {
        let r = estimate_report(&fam, &spec, &cfg.l_grid()?, solver.resolution, solver.spectrum)?;
        let mut e = Table::new("estimates", &["L", "high_sup", "low_sup", "low_over_L", "low_over_sqrt_L", "a_sup", "a_l1_fat", "a_l1_total"]);
        for row in &r.rows {
            e.push(vec![
                row.l_param.into(),
                row.high_sup.into(),
                row.low_sup.into(),
                row.low_over_l.into(),
                row.low_over_sqrt_l.into(),
                row.a_sup.into(),
                row.a_l1_fat.into(),
                row.a_l1_total.into(),
            ]);
        }
        e.note("high_ratio", r.high_ratio);
        e.note("low_over_L_ratio", r.low_over_l_ratio);
        e.note("low_sqrt_decrease", r.low_sqrt_decrease);
        summary.push(format!("estimates: high endpoint ratio {:.4}, ‖φ_low‖/√L decrease {:.4}", r.high_ratio, r.low_sqrt_decrease));
        tables.push(e);
    }
    Ok(Report { summary, tables, exit: 0 })
}

fn pairing(cfg: &Config) -> Result<Report> {
    let fam = cfg.family()?;
    let solver = cfg.solver()?;
    let mut rng = rng_for(cfg)?;
    let alpha = resolve_density(cfg, "alpha", &fam, &mut rng)?;
    let beta = resolve_density(cfg, "beta", &fam, &mut rng)?;
    let grid = cfg.l_grid()?;
    let window = cfg.fit_window()?.unwrap_or(DEFAULT_WINDOW);
    let probe = WarpedChain::build(&fam, window.1, solver.resolution)?;
    check_condition1(&alpha, &probe, solver.project)?;
    check_condition1(&beta, &probe, solver.project)?;
    let settings = SweepSettings { resolution: solver.resolution, project: solver.project };
    let curve = pairing_sweep(&fam, &alpha, &beta, &grid, settings)?;
    let fit = fit_log_asymptote(&curve, window)?;
    let pred = predicted_constant(&fam.dual_graph()?, &alpha, &beta, &probe)?;
    let rel = (fit.c_fit - pred.value).abs() / pred.value.abs().max(0.01);
    let mut t = Table::new("pairing", &["L", "s", "value", "fitted", "residual"]);
    for s in &curve.samples {
        let f = fit.predict(s.l_param);
        t.push(vec![s.l_param.into(), s.s.into(), s.value.into(), f.into(), (s.value - f).into()]);
    }
    t.note("c_fit", fit.c_fit);
    t.note("intercept", fit.intercept);
    t.note("rms", fit.rms);
    t.note("window_lo", window.0);
    t.note("window_hi", window.1);
    t.note("stability_delta", fit.stability_delta);
    t.note("c_predicted", pred.value);
    t.note("relative_error", rel);
    let summary = vec![format!("c_fit = {:.8}, predicted v_αᵀM⁺v_β = {:.8}, relative error {rel:.3e}", fit.c_fit, pred.value)];
    Ok(Report { summary, tables: vec![t], exit: 0 })
}

fn base_cells(s: Complex64) -> [Cell; 2] {
    [s.re.into(), s.im.into()]
}

fn dynamics(cfg: &Config, mode: DynamicsMode) -> Result<Report> {
    let fib = cfg.fibration()?;
    let d = cfg.dynamics()?;
    match mode {
        DynamicsMode::Birkhoff => {
            let u = d.u;
            let phi = d.phi.clone();
            let run = birkhoff_limit(&fib, move |s| u.eval(s), move |x, y| phi.fiber(x, y), &d.checkpoints)?;
            let mut t = Table::new("birkhoff", &["k", "max_error", "bound", "cauchy", "telescoping", "constancy_defect"]);
            for c in &run.checkpoints {
                t.push(vec![c.k.into(), c.max_error.into(), c.bound.into(), c.cauchy.into(), c.telescoping.into(), c.constancy_defect.into()]);
            }
            t.note("f_sup", run.f_sup);
            t.note("phi_sup", run.phi_sup);
            t.note("tate_bound_holds", run.tate_bound_holds);
            let worst = run.checkpoints.iter().map(|c| c.max_error / c.bound).fold(0.0, f64::max);
            Ok(Report { summary: vec![format!("max |u_k − u| / (2‖φ‖/k) = {worst:.4}")], tables: vec![t], exit: 0 })
        }
        DynamicsMode::Growth => {
            let rho = d.rho.clone();
            let r = pushforward_growth(&fib, move |x, y| rho.fiber(x, y), &d.n_list, d.s0, d.step)?;
            let mut t = Table::new("growth", &["n", "value", "raw", "coarse"]);
            for s in &r.samples {
                t.push(vec![s.n.into(), s.value.into(), s.raw.into(), s.coarse.into()]);
            }
            t.note("exponent", r.exponent);
            t.note("coefficient", r.coefficient);
            t.note("expected_coefficient", r.expected_coefficient);
            t.note("noise_floor", r.noise_floor);
            t.note("refinement_change", r.refinement_change);
            let summary = vec![format!(
                "growth exponent {}, coefficient {} (expected {:.6})",
                r.exponent.map_or("below noise floor".into(), |p| format!("{p:.6}")),
                r.coefficient.map_or("n/a".into(), |c| format!("{c:.6}")),
                r.expected_coefficient
            )];
            Ok(Report { summary, tables: vec![t], exit: 0 })
        }
        DynamicsMode::FlatIdentity => {
            let rho = d.rho.clone();
            let r = flat_potential_identity(&fib, move |x, y| rho.fiber(x, y))?;
            let mut t = Table::new("flat_identity", &["s_re", "s_im", "defect"]);
            for (s, v) in fib.base_grid().into_iter().zip(&r.per_point) {
                let [a, b] = base_cells(s);
                t.push(vec![a, b, (*v).into()]);
            }
            t.note("max_defect", r.max_defect);
            Ok(Report { summary: vec![format!("flat-potential identity defect {:.3e}", r.max_defect)], tables: vec![t], exit: 0 })
        }
        DynamicsMode::LimitPotential => {
            let alpha = d.alpha.clone();
            let rho = d.rho.clone();
            let u = d.u;
            let r = limit_potential_relation(&fib, move |s, x, y| alpha.eval(s, x, y), move |x, y| rho.fiber(x, y), move |s| u.eval(s))?;
            let mut t = Table::new("limit_potential", &["s_re", "s_im", "u", "rhs", "discrepancy"]);
            for ((s, u), v) in r.base.iter().zip(&r.u).zip(&r.rhs) {
                let [a, b] = base_cells(*s);
                t.push(vec![a, b, (*u).into(), (*v).into(), (u - v).abs().into()]);
            }
            t.note("max_discrepancy", r.max_discrepancy);
            t.note("max_jump_rate", r.max_jump_rate);
            t.note("lipschitz_estimate", r.lipschitz_estimate);
            Ok(Report { summary: vec![format!("limit-potential relation discrepancy {:.3e}", r.max_discrepancy)], tables: vec![t], exit: 0 })
        }
    }
}

fn node_integral(cfg: &Config) -> Result<Report> {
    let eta = cfg.eta()?;
    let q = cfg.quad()?;
    let grid = cfg.t_grid()?;
    let curve = node_curve(&eta, &grid, &q)?;
    let fit = asymptote_fit(&curve, &eta)?;
    let mut t = Table::new("node_integral", &["t", "I", "fit", "remainder", "ratio"]);
    for (i, s) in curve.samples.iter().enumerate() {
        let f = fit.a_fit * 2.0 * s.t.norm().ln() + fit.b_fit;
        t.push(vec![s.t.norm().into(), s.value.into(), f.into(), fit.remainders[i].into(), fit.ratios[i].into()]);
    }
    t.note("A_fit", fit.a_fit);
    t.note("B_fit", fit.b_fit);
    t.note("A_ref", fit.a_ref);
    t.note("max_ratio", fit.max_ratio);
    let summary = vec![format!("A_fit = {:.8}, A_ref = {:.8}, max remainder ratio {:.3e}", fit.a_fit, fit.a_ref, fit.max_ratio)];
    Ok(Report { summary, tables: vec![t], exit: 0 })
}

fn verify(cfg: &Config) -> Result<Report> {
    let seed = cfg.solver()?.seed.ok_or_else(|| Error::Validation("verify needs [solver] seed (or --seed)".into()))?;
    let mut acc = AcceptanceConfig::new(seed);
    if cfg.has_section("family") {
        acc.neck_law_factor = cfg.family()?.neck_law_factor;
    }
    acc.resolution = cfg.solver()?.resolution;
    let mut t = Table::new("verify", &["criterion", "title", "check", "measured", "relation", "threshold", "pass"]);
    let mut summary = Vec::new();
    let mut all_pass = true;
    for (id, title) in CRITERIA {
        match run_criterion(id, &acc) {
            Ok(r) => {
                all_pass &= r.pass();
                summary.push(r.summary_line());
                for c in &r.checks {
                    let rel = if c.relation == Relation::AtMost { "<=" } else { ">=" };
                    t.push(vec![id.into(), title.into(), c.name.clone().into(), c.measured.into(), rel.into(), c.threshold.into(), c.pass.into()]);
                }
            }
            Err(e) => {
                all_pass = false;
                summary.push(format!("criterion {id:>2} FAIL [{title}] error: {e}"));
                t.push(vec![id.into(), title.into(), format!("error: {e}").into(), f64::NAN.into(), "".into(), f64::NAN.into(), false.into()]);
            }
        }
    }
    t.note("seed", seed as usize);
    t.note("all_pass", all_pass);
    Ok(Report { summary, tables: vec![t], exit: if all_pass { 0 } else { 1 } })
}
