//! From a configuration to a run: problem setup, the slab loop, the run
//! report and field export.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use biofilm_core::concentration::{coercivity_margin, diameter};
use biofilm_core::coupled::{
    height_explicit_update, height_flux_residual, mixture_velocity, solve_time_slab, CoupledProblem, RateMode,
    SlabState, SweepConfig,
};
use biofilm_core::fem::{Degree, ElasticConstants, Field, Space};
use biofilm_core::geometry::{build_strip_mesh_with, DeformationMap, FacetTag, StripOptions};
use biofilm_core::mechanics::{MaterialParams, MonodMode, PressureMode, TractionLoad, TractionVariant};
use biofilm_core::profile::{Jet, Profile, SharedProfile};
use biofilm_core::volume_fraction::ContinuationOptions;
use thiserror::Error;

use crate::config::{
    parse_config, ConfigErrors, HeightSpec, Lateral, MotionMode, RateBoundaryKind, RunConfig, TractionKind, Variant,
};
use crate::export::{export_fields, ExportError};
use crate::expr::{Expr, HeightExpr, SignalExpr, TractionExpr, VelocityExpr};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("{0}")]
    Config(ConfigErrors),
    #[error("{path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("setup failed: {0}")]
    Setup(biofilm_core::Error),
    #[error("slab {index} (t = {t}): {source}")]
    Slab {
        index: usize,
        t: f64,
        source: biofilm_core::Error,
    },
    #[error(transparent)]
    Export(#[from] ExportError),
}

impl RunError {
    /// Process exit code: 2 for anything wrong with the input, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Config(_) | RunError::Read { .. } | RunError::Setup(_) => 2,
            RunError::Slab { .. } | RunError::Export(_) => 1,
        }
    }
}

fn config_error(message: String) -> RunError {
    RunError::Config(ConfigErrors(vec![crate::config::ConfigError { line: None, message }]))
}

/// Reads and parses a configuration file.
pub fn load_config(path: &Path) -> Result<RunConfig, RunError> {
    let text = fs::read_to_string(path).map_err(|source| RunError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text).map_err(|mut errs| {
        for e in &mut errs.0 {
            e.message = format!("{}: {}", path.display(), e.message);
        }
        RunError::Config(errs)
    })
}

/// Piecewise-linear height through tabulated `(x1, h)` points, constant in
/// time and extended flat past the ends.
#[derive(Debug, Clone, PartialEq)]
pub struct TableProfile {
    points: Vec<(f64, f64)>,
}

impl TableProfile {
    pub fn new(mut points: Vec<(f64, f64)>) -> Result<Self, String> {
        if points.len() < 2 {
            return Err("a height table needs at least two rows".into());
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        if points.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err("height table has repeated x1 values".into());
        }
        if points.iter().any(|p| !p.0.is_finite() || !(p.1 > 0.0)) {
            return Err("height table values must be finite with h > 0".into());
        }
        Ok(TableProfile { points })
    }

    /// Reads `x1,h` rows; a non-numeric first row is taken as a header.
    pub fn read(path: &Path) -> Result<Self, String> {
        let mut r = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| format!("{}: {e}", path.display()))?;
        let mut points = Vec::new();
        for (k, rec) in r.records().enumerate() {
            let rec = rec.map_err(|e| format!("{}: {e}", path.display()))?;
            let parsed = (rec.get(0).map(str::parse::<f64>), rec.get(1).map(str::parse::<f64>));
            match parsed {
                (Some(Ok(x)), Some(Ok(h))) if rec.len() == 2 => points.push((x, h)),
                _ if k == 0 => {}
                _ => return Err(format!("{}: row {} is not an x1,h pair", path.display(), k + 1)),
            }
        }
        TableProfile::new(points).map_err(|e| format!("{}: {e}", path.display()))
    }
}

impl Profile for TableProfile {
    fn jet(&self, x1: f64, _t: f64) -> Jet {
        let p = &self.points;
        let (first, last) = (p[0], p[p.len() - 1]);
        if x1 <= first.0 {
            return Jet { value: first.1, ..Jet::default() };
        }
        if x1 >= last.0 {
            return Jet { value: last.1, ..Jet::default() };
        }
        let k = p.partition_point(|q| q.0 <= x1).max(1) - 1;
        let (a, b) = (p[k], p[k + 1]);
        let slope = (b.1 - a.1) / (b.0 - a.0);
        Jet {
            value: a.1 + slope * (x1 - a.0),
            d_x: slope,
            ..Jet::default()
        }
    }
}

/// Everything a run needs, built from a configuration.
#[derive(Debug, Clone)]
pub struct Setup {
    pub problem: CoupledProblem,
    pub sweep: SweepConfig,
}

/// Builds the coupled problem. `base` resolves relative table paths.
pub fn build(cfg: &RunConfig, base: &Path) -> Result<Setup, RunError> {
    let dm = &cfg.domain;
    let map = match cfg.motion.mode {
        MotionMode::Graph => {
            if dm.h0 != HeightSpec::Expr(Expr::constant(1.0)) {
                return Err(config_error(
                    "domain.h0 only applies to linear_field motion; graph motion starts from h(x1, 0)".into(),
                ));
            }
            let h: SharedProfile = Arc::new(HeightExpr::new(cfg.motion.h.clone()));
            DeformationMap::graph_height(h, dm.length, dm.h_floor, cfg.motion.horizon)
        }
        MotionMode::LinearField => {
            let h0: SharedProfile = match &dm.h0 {
                HeightSpec::Expr(x) => Arc::new(HeightExpr::new(x.clone())),
                HeightSpec::Table(p) => Arc::new(TableProfile::read(&base.join(p)).map_err(config_error)?),
            };
            let nu = Arc::new(VelocityExpr::new(cfg.motion.nu1.clone(), cfg.motion.nu2.clone()));
            DeformationMap::linear_field(nu, dm.length, h0, cfg.motion.horizon)
        }
    }
    .map_err(RunError::Setup)?;
    let lateral = match dm.lateral {
        Lateral::Clamped => FacetTag::GammaMinus,
        Lateral::Free => FacetTag::GammaPlus,
    };
    let mesh = build_strip_mesh_with(
        dm.length,
        map.reference_profile().as_ref(),
        dm.nx,
        dm.ny,
        StripOptions { lateral },
    )
    .map_err(RunError::Setup)?;

    let m = &cfg.material;
    let mp = MaterialParams {
        elastic: ElasticConstants::new(m.lambda, m.mu).map_err(RunError::Setup)?,
        k_h: m.k_h,
        pi: m.pi,
        xi_inf: m.xi_inf,
        k_s: m.k_s,
        g_s: m.g_s,
        k_c: m.k_c,
        g_c: m.g_c,
        monod_k_s: m.monod_k_s,
        monod_k_c: m.monod_k_c,
        d: m.d,
        c0: m.c0,
        p_ext: Arc::new(SignalExpr::new(m.p_ext.clone())),
        pi_ext: Arc::new(SignalExpr::new(m.pi_ext.clone())),
        monod: if m.monod_live { MonodMode::Live } else { MonodMode::Frozen },
        pressure: if m.osmotic { PressureMode::Osmotic } else { PressureMode::Standard },
    };
    mp.validate().map_err(RunError::Setup)?;
    let load = match m.traction {
        TractionKind::Exterior => TractionLoad::ExteriorPressure,
        TractionKind::Field => TractionLoad::Field(Arc::new(TractionExpr::new(m.g1.clone(), m.g2.clone()))),
    };
    let s = &cfg.solver;
    let sweep = SweepConfig {
        max_iters: s.max_iters,
        rel_tol: s.rel_tol,
        relaxation: s.relaxation,
        phi_inf: s.phi_inf,
        variant: match s.variant {
            Variant::Consistent => TractionVariant::Consistent,
            Variant::AsPublished => TractionVariant::AsPublished,
        },
        rate_mode: match s.rate_boundary {
            RateBoundaryKind::Exterior => RateMode::Exterior,
            RateBoundaryKind::Transported => RateMode::Transported,
        },
        fraction: ContinuationOptions {
            tol: s.fraction_tol,
            force: s.force_fraction,
            eps0: None,
        },
        theta: cfg.time.theta,
        substeps: cfg.time.substeps,
        warm_start: s.warm_start,
    };
    sweep.validate().map_err(RunError::Setup)?;
    Ok(Setup {
        problem: CoupledProblem {
            reference: Arc::new(mesh),
            map,
            mp,
            load,
            e_ext: Arc::new(SignalExpr::new(m.e_ext.clone())),
            e0: m.e0,
        },
        sweep,
    })
}

/// Quantities derived from a configuration without running it.
#[derive(Debug, Clone, PartialEq)]
pub struct Inspection {
    pub t_max: f64,
    pub diameter: f64,
    pub min_quality: f64,
    pub dofs_p2: usize,
    /// `d - diam |v_f|_inf` with the body at rest (`v_f = 0`).
    pub rest_margin: f64,
}

pub fn inspect(setup: &Setup) -> Inspection {
    let mesh = &setup.problem.reference;
    let p2 = Space::new(mesh.clone(), Degree::P2);
    let rest = Field::zeros(p2.clone(), 2);
    Inspection {
        t_max: setup.problem.map.t_max(),
        diameter: diameter(mesh),
        min_quality: mesh.min_quality(),
        dofs_p2: p2.n_nodes(),
        rest_margin: coercivity_margin(mesh, &rest, &setup.problem.mp),
    }
}

/// Fields of a slab in report and export order.
pub const FIELD_NAMES: [&str; 9] = ["e_rate", "p_rate", "p", "u_s", "v_s", "v_f", "phi_f", "phi_s", "c"];

/// One row of the run report.
#[derive(Debug, Clone, PartialEq)]
pub struct SlabSummary {
    pub index: usize,
    pub t: f64,
    pub sweeps: usize,
    pub residual: f64,
    pub div_consistency: f64,
    /// `(name, min, max)` over all nodal values of each field.
    pub ranges: Vec<(&'static str, f64, f64)>,
    pub admissible: bool,
    pub forced: bool,
    pub coercivity_margin: f64,
    pub negative_c: bool,
    pub height_flux: Option<f64>,
    /// Smallest column height after the experimental explicit step.
    pub next_min_height: Option<f64>,
}

impl SlabSummary {
    fn of(index: usize, state: &SlabState, setup: &Setup, cfg: &RunConfig) -> Result<Self, biofilm_core::Error> {
        let problem = &setup.problem;
        let admissible = state.admissibility.iter().all(|a| a.admissible);
        let (height_flux, next_min_height) = match problem.map.top_jet(0.0, state.t) {
            Some(_) => {
                let v = mixture_velocity(&problem.mp, state)?;
                let map = &problem.map;
                let t = state.t;
                let rate = |x: f64| map.top_jet(x, t).map_or(0.0, |j| j.d_t);
                let flux = height_flux_residual(&v, &rate)?;
                let next = if cfg.solver.experimental_height {
                    let up = height_explicit_update(&flux, cfg.time.dt, cfg.domain.h_floor)?;
                    if !up.clipped.is_empty() {
                        eprintln!(
                            "warning: experimental height step at t = {t} clipped {} columns at h_floor",
                            up.clipped.len()
                        );
                    }
                    up.height.iter().copied().reduce(f64::min)
                } else {
                    None
                };
                (Some(flux.norm()), next)
            }
            None => (None, None),
        };
        let conc = state.concentration.as_ref();
        Ok(SlabSummary {
            index,
            t: state.t,
            sweeps: state.sweeps(),
            residual: state.sweep_history.last().copied().unwrap_or(0.0),
            div_consistency: state.div_consistency,
            ranges: state.fields().iter().map(|(n, f)| (*n, f.min(), f.max())).collect(),
            admissible,
            forced: !admissible && cfg.solver.force_fraction,
            coercivity_margin: conc.map_or(f64::NAN, |c| c.margin),
            negative_c: conc.is_some_and(|c| c.negative_at.is_some()),
            height_flux,
            next_min_height,
        })
    }

    pub fn header(experimental: bool) -> Vec<String> {
        let mut h: Vec<String> = ["slab", "t", "sweeps", "residual", "div_consistency"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        for name in FIELD_NAMES {
            h.push(format!("{name}_min"));
            h.push(format!("{name}_max"));
        }
        h.extend(
            ["admissible", "forced", "coercivity_margin", "negative_c", "height_flux_residual"]
                .iter()
                .map(|s| s.to_string()),
        );
        if experimental {
            h.push("next_min_height_experimental".into());
        }
        h
    }

    pub fn record(&self, experimental: bool) -> Vec<String> {
        let f = |x: f64| format!("{x:.16e}");
        let mut r = vec![
            self.index.to_string(),
            f(self.t),
            self.sweeps.to_string(),
            f(self.residual),
            f(self.div_consistency),
        ];
        for (_, lo, hi) in &self.ranges {
            r.push(f(*lo));
            r.push(f(*hi));
        }
        r.push(self.admissible.to_string());
        r.push(self.forced.to_string());
        r.push(f(self.coercivity_margin));
        r.push(self.negative_c.to_string());
        r.push(self.height_flux.map_or(String::new(), f));
        if experimental {
            r.push(self.next_min_height.map_or(String::new(), f));
        }
        r
    }
}

/// Overrides taken from the command line.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub until: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub slabs: Vec<SlabSummary>,
    pub report: PathBuf,
    pub files: Vec<PathBuf>,
    pub last: SlabState,
}

/// Runs every slab, writing `report.csv` and the field files into the
/// output directory. Progress lines go to `log`.
pub fn simulate(
    cfg: &RunConfig,
    base: &Path,
    opts: &RunOptions,
    log: &mut dyn std::io::Write,
) -> Result<RunOutcome, RunError> {
    let setup = build(cfg, base)?;
    let until = opts.until.unwrap_or(cfg.time.t_end);
    if !(until >= 0.0) || !until.is_finite() {
        return Err(config_error(format!("end time must be finite and >= 0, got {until}")));
    }
    let t_max = setup.problem.map.t_max();
    if until > t_max {
        return Err(config_error(format!(
            "end time {until} exceeds the admissible span t_max = {t_max} of the motion"
        )));
    }
    let dir = match &opts.out {
        Some(d) => d.clone(),
        None if cfg.output.dir.is_relative() => base.join(&cfg.output.dir),
        None => cfg.output.dir.clone(),
    };
    fs::create_dir_all(&dir).map_err(|source| ExportError::Io {
        path: dir.clone(),
        source,
    })?;
    let report_path = dir.join("report.csv");
    let mut report = csv::Writer::from_path(&report_path).map_err(|source| ExportError::Csv {
        path: report_path.clone(),
        source,
    })?;
    let experimental = cfg.solver.experimental_height;
    let csv_err = |source| ExportError::Csv {
        path: report_path.clone(),
        source,
    };
    report.write_record(SlabSummary::header(experimental)).map_err(csv_err)?;

    let mut slabs = Vec::new();
    let mut files = Vec::new();
    let mut prev: Option<SlabState> = None;
    for (index, t) in cfg.slab_times(until).into_iter().enumerate() {
        let slab_err = |source| RunError::Slab { index, t, source };
        let state = solve_time_slab(&setup.problem, t, prev.as_ref(), &setup.sweep).map_err(slab_err)?;
        let summary = SlabSummary::of(index, &state, &setup, cfg).map_err(slab_err)?;
        report.write_record(summary.record(experimental)).map_err(csv_err)?;
        report.flush().map_err(|source| ExportError::Io {
            path: report_path.clone(),
            source,
        })?;
        let _ = writeln!(
            log,
            "slab {index:4}  t = {t:<10.6}  sweeps = {:2}  residual = {:.3e}{}",
            summary.sweeps,
            summary.residual,
            summary.height_flux.map_or(String::new(), |r| format!("  |R| = {r:.3e}")),
        );
        if index % cfg.output.stride == 0 {
            files.extend(export_fields(&state, index, &dir, cfg.output.formats.iter().copied())?);
        }
        slabs.push(summary);
        prev = Some(state);
    }
    Ok(RunOutcome {
        slabs,
        report: report_path,
        files,
        last: prev.expect("at least the slab at t = 0 runs"),
    })
}
