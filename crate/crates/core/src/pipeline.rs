//! Field, tracing and simplification end to end.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::{info, warn};
use serde::{Deserialize, Serialize};

use crate::build::build_layout;
use crate::error::PipelineError;
use crate::export;
use crate::field::{compute_cross_field, FieldConfig, FieldResult};
use crate::fixtures;
use crate::layout::Layout;
use crate::mesh::{load_mesh, Surface, TriMesh};
use crate::simplify::{simplify, CollapseRecord, FieldExtender, Order, Rejection, SimplifyConfig};
use crate::singularity::{detect_singularities, Singularity};
use crate::trace::{TraceConfig, TraceResult, Tracer};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Emit {
    pub json: bool,
    pub vtk: bool,
    pub svg: bool,
    pub csv: bool,
}

impl Default for Emit {
    fn default() -> Self {
        Emit { json: true, vtk: false, svg: false, csv: true }
    }
}

impl Emit {
    pub const NONE: Emit = Emit { json: false, vtk: false, svg: false, csv: false };

    /// Parse a comma separated list such as `json,svg`.
    pub fn parse(s: &str) -> Result<Self, String> {
        let mut e = Emit::NONE;
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part {
                "json" => e.json = true,
                "vtk" => e.vtk = true,
                "svg" => e.svg = true,
                "csv" => e.csv = true,
                other => return Err(format!("unknown export format `{other}`")),
            }
        }
        Ok(e)
    }
}

#[derive(Clone, Debug)]
pub struct PipelineConfig {
    /// Mesh file (`.obj` or `.off`) or `fixture:<name>`.
    pub input: PathBuf,
    /// Diffusion time; `None` uses the reciprocal of the smallest eigenvalue.
    pub tau: Option<f64>,
    pub delta_scale: f64,
    pub heun_factor: f64,
    pub rays: usize,
    pub tangential_threshold: f64,
    pub order: Order,
    pub max_collapses: Option<usize>,
    pub out: Option<PathBuf>,
    pub emit: Emit,
}

impl PipelineConfig {
    pub fn new(input: impl Into<PathBuf>) -> Self {
        let t = TraceConfig::default();
        PipelineConfig {
            input: input.into(),
            tau: None,
            delta_scale: FieldConfig::default().delta_scale,
            heun_factor: t.heun_factor,
            rays: t.rays,
            tangential_threshold: t.tangential_threshold,
            order: Order::Thinnest,
            max_collapses: None,
            out: None,
            emit: Emit::default(),
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |what: &str| Err(PipelineError::Config(format!("{what} must be positive")));
        if self.tau.is_some_and(|t| !(t > 0.0 && t.is_finite())) {
            return bad("--tau");
        }
        if !(self.delta_scale > 0.0 && self.delta_scale.is_finite()) {
            return bad("--delta-scale");
        }
        if !(self.heun_factor > 0.0 && self.heun_factor.is_finite()) {
            return bad("--heun-factor");
        }
        if self.rays == 0 {
            return bad("--rays");
        }
        if !(self.tangential_threshold > 0.0 && self.tangential_threshold.is_finite()) {
            return bad("--tangential-threshold");
        }
        Ok(())
    }

    pub fn field_config(&self) -> FieldConfig {
        FieldConfig { tau: self.tau, delta_scale: self.delta_scale, ..FieldConfig::default() }
    }

    pub fn trace_config(&self) -> TraceConfig {
        TraceConfig {
            heun_factor: self.heun_factor,
            rays: self.rays,
            tangential_threshold: self.tangential_threshold,
            ..TraceConfig::default()
        }
    }

    /// Name used for report rows and artifact files.
    pub fn model_name(&self) -> String {
        let s = self.input.to_string_lossy();
        match s.strip_prefix("fixture:") {
            Some(n) => n.to_string(),
            None => self.input.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "model".into()),
        }
    }
}

/// One row of the run summary.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub model: String,
    pub n: usize,
    pub field_s: f64,
    pub tracing_s: f64,
    pub simplification_s: f64,
    pub components_before: usize,
    pub components_after: usize,
    pub t_junctions_before: usize,
    pub t_junctions_after: usize,
    pub chord_collapses: usize,
    pub singularities: usize,
    pub separatrices: usize,
    pub tau: f64,
    pub tau_fallback: bool,
    pub field_ok: bool,
    pub tracing_ok: bool,
    pub layout_ok: bool,
    pub simplification_ok: bool,
}

#[derive(Debug)]
pub struct PipelineOutput {
    pub surface: Surface,
    pub field: FieldResult,
    pub singularities: Vec<Singularity>,
    pub trace: TraceResult,
    pub initial: Layout,
    pub layout: Layout,
    pub log: Vec<CollapseRecord>,
    pub rejected: Vec<Rejection>,
    pub report: RunReport,
}

pub fn load_input(input: &Path) -> Result<TriMesh, PipelineError> {
    let s = input.to_string_lossy();
    if let Some(name) = s.strip_prefix("fixture:") {
        return fixtures::by_name(name).ok_or_else(|| PipelineError::Config(format!("unknown fixture `{name}`")));
    }
    Ok(load_mesh(input)?)
}

/// Failure after the layout was built; carries what exists so far.
#[derive(Debug)]
pub struct StageFailure {
    pub error: PipelineError,
    pub report: RunReport,
    pub initial: Option<Layout>,
}

impl From<PipelineError> for Box<StageFailure> {
    fn from(error: PipelineError) -> Self {
        Box::new(StageFailure { error, report: RunReport::default(), initial: None })
    }
}

/// Run all stages on an in-memory mesh. Nothing is written.
pub fn run_mesh(model: &str, mesh: TriMesh, cfg: &PipelineConfig) -> Result<PipelineOutput, Box<StageFailure>> {
    cfg.validate()?;
    let mut report = RunReport { model: model.to_string(), n: mesh.node_count(), ..RunReport::default() };
    let surface = Surface::new(mesh).map_err(PipelineError::from)?;

    let t0 = Instant::now();
    let field = compute_cross_field(&surface, &cfg.field_config()).map_err(PipelineError::from)?;
    report.field_s = t0.elapsed().as_secs_f64();
    report.tau = field.system.tau;
    report.tau_fallback = field.system.tau_from_fallback;
    report.field_ok = true;
    info!("{model}: field in {:.3}s (tau {:.4e})", report.field_s, report.tau);

    let t1 = Instant::now();
    let singularities = detect_singularities(&surface, &field.field).map_err(PipelineError::from)?;
    let tcfg = cfg.trace_config();
    let tracer = Tracer::new(&surface, &field.field, &singularities, tcfg);
    let trace = tracer.trace_all();
    for w in &trace.warnings {
        warn!("{model}: {w}");
    }
    let initial = build_layout(&surface, &singularities, &trace);
    report.tracing_s = t1.elapsed().as_secs_f64();
    report.singularities = singularities.len();
    report.separatrices = trace.separatrices.iter().filter(|s| !s.dropped).count();
    report.tracing_ok = true;
    report.components_before = initial.component_count();
    report.t_junctions_before = initial.t_junction_count();
    info!(
        "{model}: {} singularities, {} separatrices, {} components in {:.3}s",
        report.singularities, report.separatrices, report.components_before, report.tracing_s
    );
    if let Err(e) = initial.validate() {
        return Err(Box::new(StageFailure { error: e.into(), report, initial: Some(initial) }));
    }
    report.layout_ok = true;

    let t2 = Instant::now();
    let ext = FieldExtender { tracer, max_steps: 10 * surface.mesh.triangles.len() + 100 };
    let scfg = SimplifyConfig { order: cfg.order, max_collapses: cfg.max_collapses };
    let out = simplify(&initial, &scfg, &ext);
    drop(ext);
    report.simplification_s = t2.elapsed().as_secs_f64();
    report.components_after = out.layout.component_count();
    report.t_junctions_after = out.layout.t_junction_count();
    report.chord_collapses = out.log.len();
    if let Err(e) = out.layout.validate() {
        return Err(Box::new(StageFailure { error: e.into(), report, initial: Some(initial) }));
    }
    report.simplification_ok = true;
    info!(
        "{model}: {} collapses, components {} -> {} in {:.3}s",
        report.chord_collapses, report.components_before, report.components_after, report.simplification_s
    );
    Ok(PipelineOutput {
        surface,
        field,
        singularities,
        trace,
        initial,
        layout: out.layout,
        log: out.log,
        rejected: out.rejected,
        report,
    })
}

fn out_path(dir: &Path, model: &str, suffix: &str) -> PathBuf {
    dir.join(format!("{model}.{suffix}"))
}

/// Write every enabled artifact of a finished run.
pub fn write_artifacts(dir: &Path, out: &PipelineOutput, emit: Emit) -> Result<(), PipelineError> {
    std::fs::create_dir_all(dir).map_err(|e| PipelineError::Export(format!("{}: {e}", dir.display())))?;
    let m = &out.report.model;
    if emit.json {
        export::write_text(&out_path(dir, m, "initial.json"), &export::layout_json(&out.initial))?;
        export::write_text(&out_path(dir, m, "layout.json"), &export::layout_json(&out.layout))?;
        export::write_text(&out_path(dir, m, "collapses.jsonl"), &export::collapse_log_jsonl(&out.log))?;
    }
    if emit.vtk {
        export::write_text(&out_path(dir, m, "initial.vtk"), &export::layout_vtk(&out.initial))?;
        export::write_text(&out_path(dir, m, "layout.vtk"), &export::layout_vtk(&out.layout))?;
        export::write_text(&out_path(dir, m, "separatrices.vtk"), &export::separatrices_vtk(&out.trace))?;
    }
    if emit.svg {
        match (export::layout_svg(&out.initial), export::layout_svg(&out.layout)) {
            (Ok(a), Ok(b)) => {
                export::write_text(&out_path(dir, m, "initial.svg"), &a)?;
                export::write_text(&out_path(dir, m, "layout.svg"), &b)?;
            }
            (Err(e), _) | (_, Err(e)) => warn!("{m}: svg skipped: {e}"),
        }
    }
    if emit.csv {
        export::write_text(&out_path(dir, m, "report.csv"), &export::reports_csv(std::slice::from_ref(&out.report)))?;
        export::write_text(&out_path(dir, m, "theta.csv"), &export::theta_csv(&out.surface, &out.field.field))?;
        export::write_text(&out_path(dir, m, "singularities.csv"), &export::singularities_csv(&out.singularities))?;
    }
    Ok(())
}

/// Load, run and write. On a layout failure the partial report and the
/// unsimplified layout are still written.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<RunReport, PipelineError> {
    cfg.validate()?;
    let model = cfg.model_name();
    let mesh = load_input(&cfg.input)?;
    match run_mesh(&model, mesh, cfg) {
        Ok(out) => {
            if let Some(dir) = &cfg.out {
                write_artifacts(dir, &out, cfg.emit)?;
            }
            Ok(out.report)
        }
        Err(f) => {
            if let Some(dir) = &cfg.out {
                let _ = std::fs::create_dir_all(dir);
                if let Some(l) = &f.initial {
                    export::write_text(&out_path(dir, &model, "initial.json"), &export::layout_json(l))?;
                }
                if cfg.emit.csv && f.report.field_ok {
                    export::write_text(&out_path(dir, &model, "report.csv"), &export::reports_csv(&[f.report]))?;
                }
            }
            Err(f.error)
        }
    }
}

/// Plain-text table with the columns of the usual pipeline summary.
pub fn format_table(reports: &[RunReport]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<14} {:>7} {:>9} {:>9} {:>9} {:>7} {:>7} {:>5} {:>5} {:>9}",
        "", "", "Field", "Tracing", "Simp.", "Comp.", "", "T-j.", "", "Chord"
    );
    let _ = writeln!(
        s,
        "{:<14} {:>7} {:>9} {:>9} {:>9} {:>7} {:>7} {:>5} {:>5} {:>9}",
        "Model", "n", "(s)", "(s)", "(s)", "Before", "After", "Bef.", "Aft.", "Collapses"
    );
    for r in reports {
        let _ = writeln!(
            s,
            "{:<14} {:>7} {:>9.3} {:>9.3} {:>9.3} {:>7} {:>7} {:>5} {:>5} {:>9}",
            r.model,
            r.n,
            r.field_s,
            r.tracing_s,
            r.simplification_s,
            r.components_before,
            r.components_after,
            r.t_junctions_before,
            r.t_junctions_after,
            r.chord_collapses
        );
    }
    s
}
