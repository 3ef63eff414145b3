use mediatopo::experiments::{
    self, candidates_for, gap_scale, natural_invariant, resonance, Artifacts, Table, Table1Setup,
};
use mediatopo::mediator::{effective_bloch_with, mediated_couplings_realspace, ResolventProbe};
use mediatopo::realspace::{attach_emitters, build_bath, skin_profile, spectrum_with_sectors, Sector};
use mediatopo::{
    band_structure, classify, deformation_gap_certificate, gap_check, predict_inherited_class, BlochModel,
    EmitterLayout, Error, GapKind, KGrid, ModelParams, Variant,
};
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, FigureSpec, Task};

/// What a task hands to the writer.
pub struct Outcome {
    pub results: Value,
    pub artifacts: Artifacts,
    pub plot: Option<(String, String)>,
    /// Human-readable lines for stdout.
    pub summary: Vec<String>,
}

impl Outcome {
    fn new(results: Value, artifacts: Artifacts) -> Self {
        Outcome { results, artifacts, plot: None, summary: Vec::new() }
    }
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

fn default_variant(params: &ModelParams) -> Variant {
    match params {
        ModelParams::Ssh(_) | ModelParams::Theta(_) | ModelParams::Qwz(_) => Variant::Herm,
        _ => Variant::NhAz,
    }
}

/// Fills every default the tasks would otherwise pick implicitly, so that the
/// echoed configuration reproduces the run on its own.
pub fn resolve(mut config: ExperimentConfig) -> Result<ExperimentConfig, Error> {
    let task = config.task.expect("validated");
    if let Some(params) = config.model {
        let dim = params.dim();
        if config.grid.is_none() {
            let m = match task {
                Task::Classify => 16,
                Task::Mediate => 64,
                _ => KGrid::default_for(dim).points_per_axis(),
            };
            config.grid = Some(m);
        }
        if config.layout.is_none() && matches!(task, Task::Invariant | Task::Classify | Task::Mediate) {
            let omega = resonance(&params);
            let bath = params.build()?;
            let g = 0.1 * gap_scale(&params, &bath, omega, &KGrid::default_for(dim))?;
            config.layout = Some(EmitterLayout::new(params.default_projector(), omega, g, 0)?);
        }
        if config.variant.is_none() && task == Task::Classify {
            config.variant = Some(default_variant(&params));
        }
    }
    if task == Task::Table1 && config.table1.is_none() {
        config.table1 = Some(Table1Setup::default());
    }
    if let (Some(m), Some(fig)) = (config.grid, config.figure.as_mut()) {
        match fig {
            FigureSpec::Fig4(s) => s.grid = m,
            FigureSpec::Fig5(s) => s.grid = m,
            _ => {}
        }
    }
    Ok(config)
}

pub fn execute(config: &ExperimentConfig) -> Result<Outcome, Error> {
    match config.task.expect("validated") {
        Task::Invariant => invariant(config),
        Task::Classify => classify_task(config),
        Task::Mediate => mediate(config),
        Task::Figure => figure(config.figure.as_ref().expect("validated")),
        Task::Table1 => table1(config.table1.as_ref().expect("resolved")),
        Task::ListModels => unreachable!("handled before resolution"),
    }
}

struct Setup {
    params: ModelParams,
    bath: BlochModel,
    layout: EmitterLayout,
    grid: KGrid,
}

fn setup(config: &ExperimentConfig) -> Result<Setup, Error> {
    let params = config.model.expect("validated");
    let bath = params.build()?;
    let grid = KGrid::new(config.grid.expect("resolved"), params.dim())?;
    Ok(Setup { params, bath, layout: config.layout.clone().expect("resolved"), grid })
}

fn band_table(models: &[&BlochModel], grid: &KGrid) -> Result<Table, Error> {
    let mut cols = vec!["model"];
    cols.extend(["kx", "ky"].iter().take(grid.dim()));
    cols.extend(["band", "re", "im"]);
    let mut table = Table::new(&cols);
    for (i, m) in models.iter().enumerate() {
        let bands = band_structure(m, grid, false)?;
        for (node, row) in bands.energies.iter().enumerate() {
            let k = grid.node(node);
            for (b, e) in row.iter().enumerate() {
                let mut r = vec![i as f64];
                r.extend(&k);
                r.extend([b as f64, e.re, e.im]);
                table.push(r);
            }
        }
    }
    Ok(table)
}

fn profile_table(config: &ExperimentConfig, s: &Setup) -> Result<Table, Error> {
    let mut table = Table::new(&["sector", "label", "position", "weight"]);
    let Some(rs) = &config.realspace else {
        return Ok(table);
    };
    let bath = build_bath(&s.bath, &rs.n_cells, &rs.bc)?;
    let system = attach_emitters(&bath, &s.layout)?;
    let spec = spectrum_with_sectors(&system)?;
    for (i, sector) in [Sector::Photonic, Sector::Atomic].into_iter().enumerate() {
        match skin_profile(&system, &spec, sector, false) {
            Ok(p) => {
                for ((l, x), w) in p.labels.iter().zip(&p.positions).zip(&p.weights) {
                    table.push(vec![i as f64, *l as f64, *x, *w]);
                }
            }
            Err(Error::EmptySector) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(table)
}

fn invariant(config: &ExperimentConfig) -> Result<Outcome, Error> {
    let s = setup(config)?;
    let omega = s.layout.omega_e();
    let probe = ResolventProbe { grid: s.grid, tol: 1e-9 };
    let mediated = effective_bloch_with(&s.bath, &s.layout, &probe)?;
    let kind = if s.bath.hermitian_hint() == Some(true) { GapKind::Line } else { GapKind::Point };
    let gap = gap_check(&s.bath, &s.grid, omega, kind, 1e-9)?;
    let bath_inv = natural_invariant(&s.params, &s.bath, omega, &s.grid)?;
    let atomic_inv = natural_invariant(&s.params, &mediated.model, omega, &s.grid)?;
    let spectra = band_table(&[&s.bath, &mediated.model], &s.grid)?;
    let profiles = profile_table(config, &s)?;
    let mut out = Outcome::new(
        json!({
            "gap": gap,
            "photonic": bath_inv,
            "atomic": atomic_inv,
            "resolvent": {
                "sigma_min": mediated.sigma_min,
                "gap_distance": mediated.gap_distance,
                "warnings": mediated.warnings,
            },
        }),
        Artifacts { spectra, profiles },
    );
    out.summary.push(format!("{} photonic {:?} = {}", s.params.name(), bath_inv.kind, bath_inv.value));
    out.summary.push(format!("{} atomic {:?} = {}", s.params.name(), atomic_inv.kind, atomic_inv.value));
    Ok(out)
}

fn classify_task(config: &ExperimentConfig) -> Result<Outcome, Error> {
    let s = setup(config)?;
    let variant = config.variant.expect("resolved");
    let candidates = candidates_for(&s.params, variant)?;
    let tol = 1e-9;
    let bath_class = classify(&s.bath, variant, &candidates, &s.grid, tol)?;
    let probe = ResolventProbe { grid: s.grid, tol: 1e-9 };
    let mediated = effective_bloch_with(&s.bath, &s.layout, &probe)?;
    let predicted = predict_inherited_class(&bath_class, s.layout.omega_e());
    let atomic = if s.layout.projector().is_identity() {
        Some(classify(&mediated.model, variant, &candidates, &s.grid, tol)?)
    } else {
        None
    };
    let agree = atomic.as_ref().map(|a| a.same_class(&predicted));
    let spectra = band_table(&[&s.bath, &mediated.model], &s.grid)?;
    let mut out = Outcome::new(
        json!({
            "variant": variant,
            "photonic": bath_class,
            "atomic": atomic,
            "predicted": predicted,
            "agree": agree,
        }),
        Artifacts { spectra, profiles: Table::new(&["sector", "label", "position", "weight"]) },
    );
    out.summary.push(format!(
        "{}: photonic {} -> predicted {}{}",
        s.params.name(),
        bath_class.name,
        predicted.name,
        atomic.as_ref().map(|a| format!(", atomic {}", a.name)).unwrap_or_default()
    ));
    Ok(out)
}

fn mediate(config: &ExperimentConfig) -> Result<Outcome, Error> {
    let s = setup(config)?;
    let probe = ResolventProbe { grid: s.grid, tol: 1e-9 };
    let mediated = effective_bloch_with(&s.bath, &s.layout, &probe)?;
    let certificate = if s.layout.projector().is_identity() {
        Some(deformation_gap_certificate(&s.bath, &s.layout, &s.grid, 10)?)
    } else {
        None
    };
    let spectra = band_table(&[&s.bath, &mediated.model], &s.grid)?;
    let mut profiles = Table::new(&["row", "col", "re", "im"]);
    if let Some(rs) = &config.realspace {
        if s.params.dim() == 1 {
            let h = mediated_couplings_realspace(&s.bath, &s.layout, rs.n_cells[0])?;
            for i in 0..s.layout.projector().rank() {
                for j in 0..h.ncols() {
                    profiles.push(vec![i as f64, j as f64, h[(i, j)].re, h[(i, j)].im]);
                }
            }
        }
    }
    let mut out = Outcome::new(
        json!({
            "sigma_min": mediated.sigma_min,
            "gap_distance": mediated.gap_distance,
            "warnings": mediated.warnings,
            "certificate": certificate,
        }),
        Artifacts { spectra, profiles },
    );
    out.summary.push(format!(
        "{}: resolvent sigma_min {:.3e}, gap distance {:.3e}",
        s.params.name(),
        mediated.sigma_min,
        mediated.gap_distance
    ));
    for w in &mediated.warnings {
        out.summary.push(format!("warning: {w}"));
    }
    Ok(out)
}

fn figure(spec: &FigureSpec) -> Result<Outcome, Error> {
    let (report, artifacts) = match spec {
        FigureSpec::Fig1(s) => experiments::fig1(s).map(|(r, a)| (to_value(&r), a))?,
        FigureSpec::Fig2(s) => experiments::fig2(s).map(|(r, a)| (to_value(&r), a))?,
        FigureSpec::Fig3(s) => experiments::fig3(s).map(|(r, a)| (to_value(&r), a))?,
        FigureSpec::Fig4(s) => experiments::fig4(s).map(|(r, a)| (to_value(&r), a))?,
        FigureSpec::Fig5(s) => experiments::fig5(s).map(|(r, a)| (to_value(&r), a))?,
        FigureSpec::Fig6(s) => experiments::fig6(s).map(|(r, a)| (to_value(&r), a))?,
    };
    let id = serde_json::to_value(spec.id()).expect("id").as_str().expect("string id").to_string();
    let mut out = Outcome::new(report, artifacts);
    out.summary.push(format!("{id}: wrote report, spectra and profiles"));
    out.plot = Some((format!("plot_{id}.py"), crate::plots::script(spec.id())));
    Ok(out)
}

fn table1(setup: &Table1Setup) -> Result<Outcome, Error> {
    let (rows, artifacts) = experiments::table1(setup)?;
    let mut out = Outcome::new(json!({ "rows": rows }), artifacts);
    for r in &rows {
        out.summary.push(format!(
            "{:<14} D={} hermitian={:<5} nu_p={:>2} nu_a={:>2} predicted sign={:>2} {}",
            r.model,
            r.dim,
            r.hermitian,
            r.nu_p.value,
            r.nu_a.value,
            r.predicted_sign,
            if r.pass { "PASS" } else { "FAIL" }
        ));
    }
    Ok(out)
}
