//! Recipes behind the figure and table commands. Each recipe takes a setup
//! whose defaults are the reference parameters and returns a serializable
//! report plus flat tables for CSV output. Reports carry raw numbers only;
//! pass/fail thresholds live with the callers.

use std::f64::consts::{FRAC_PI_8, PI};

use serde::{Deserialize, Serialize};

use crate::bloch::{gap_check, BlochModel, GapKind, KGrid};
use crate::error::{Error, Result};
use crate::invariants::{
    chern_2d, chern_isv_2d, winding_chiral_1d, winding_spectral_1d, BandSelection, InvariantResult,
};
use crate::linalg::{self, c64, re, sigma_y, sigma_z, CMatrix, C64, IM};
use crate::mediator::{effective_bloch, EmitterLayout, Projector};
use crate::models::{self, ModelParams};
use crate::realspace::{
    attach_emitters, build_bath, localize_states, ribbon_spectrum, sector_score, skin_profile, spectrum_with_sectors,
    ky_nodes, Boundary, Sector,
};
use crate::symmetry::{classify, predict_inherited_class, Candidates, Flavor, SymmetryOp, Variant};

/// Column-labelled numeric table, one CSV file per table.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Array outputs of a recipe.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Artifacts {
    pub spectra: Table,
    pub profiles: Table,
}

/// Chiral operator of the Hermitian chiral models, `None` elsewhere.
pub fn chiral_operator(params: &ModelParams) -> Option<CMatrix> {
    match *params {
        ModelParams::Ssh(_) => Some(sigma_z()),
        // U_PHS U_TRS^* with U_TRS = cos 2t - i sin 2t sigma_x, U_PHS = sigma_z
        ModelParams::Theta(p) => {
            let (c, s) = ((2.0 * p.theta).cos(), (2.0 * p.theta).sin());
            Some(sigma_z().mapv(|z| z * c) - sigma_y().mapv(|z| z * s))
        }
        ModelParams::ChiralNh2d(_) => Some(sigma_z()),
        _ => None,
    }
}

/// The invariant each model is studied with, evaluated for `model` (the bath
/// itself or a mediated model with the same number of bands) about `omega`.
pub fn natural_invariant(
    params: &ModelParams,
    model: &BlochModel,
    omega: C64,
    grid: &KGrid,
) -> Result<InvariantResult> {
    let chiral = |variant| -> Result<SymmetryOp> {
        let u = chiral_operator(params).expect("chiral model");
        if u.nrows() != model.n_bands() {
            return Err(Error::DimensionMismatch { expected: u.nrows(), got: model.n_bands() });
        }
        SymmetryOp::new(u, Flavor::Chiral, variant)
    };
    match params {
        ModelParams::Ssh(_) | ModelParams::Theta(_) => {
            if omega.norm() > 0.0 {
                return Err(Error::InvalidParameter("chiral winding is taken about omega_e = 0".into()));
            }
            winding_chiral_1d(model, &chiral(Variant::Herm)?, grid)
        }
        ModelParams::Qwz(_) => chern_2d(model, &BandSelection::Below(omega.re), grid),
        ModelParams::Hn(_) | ModelParams::StackedHn(_) => winding_spectral_1d(model, omega, grid),
        ModelParams::ChiralNh2d(_) => chern_isv_2d(model, &chiral(Variant::NhAz)?, omega, grid),
    }
}

fn is_hermitian_model(params: &ModelParams) -> bool {
    matches!(params, ModelParams::Ssh(_) | ModelParams::Theta(_) | ModelParams::Qwz(_))
}

/// Distance between `omega` and the bath spectrum: a line gap for Hermitian
/// models, a point gap otherwise.
pub fn gap_scale(params: &ModelParams, model: &BlochModel, omega: C64, grid: &KGrid) -> Result<f64> {
    let kind = if is_hermitian_model(params) { GapKind::Line } else { GapKind::Point };
    Ok(gap_check(model, grid, omega, kind, 1e-12)?.min_distance)
}

// ---------------------------------------------------------------- Table I

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Table1Setup {
    pub models: Vec<ModelParams>,
    /// Coupling as a fraction of the gap around `omega_e`.
    pub g_fraction: f64,
}

impl Default for Table1Setup {
    fn default() -> Self {
        Table1Setup {
            models: ["ssh", "qwz", "hn", "chiral_nh_2d"]
                .iter()
                .map(|n| ModelParams::default_for(n).expect("zoo model"))
                .collect(),
            g_fraction: 0.1,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Table1Row {
    pub model: String,
    pub dim: usize,
    pub hermitian: bool,
    #[serde(with = "crate::serde_complex")]
    pub omega_e: C64,
    pub g: f64,
    pub nu_p: InvariantResult,
    pub nu_a: InvariantResult,
    /// `(-1)^(D + h)`, `h = 1` for Hermitian baths.
    pub predicted_sign: i64,
    pub pass: bool,
}

/// Resonant frequency used for each zoo model: the centre of its gap.
pub fn resonance(params: &ModelParams) -> C64 {
    match params {
        ModelParams::Hn(p) => c64(0.0, -p.gamma.unwrap_or(2.0 * p.delta * p.j)),
        ModelParams::ChiralNh2d(p) => c64(0.0, -p.j),
        ModelParams::StackedHn(p) => c64(0.0, -p.kappa),
        _ => re(0.0),
    }
}

pub fn table1(setup: &Table1Setup) -> Result<(Vec<Table1Row>, Artifacts)> {
    let mut rows = Vec::new();
    for params in &setup.models {
        let bath = params.build()?;
        let omega = resonance(params);
        let grid = KGrid::default_for(params.dim());
        let g = setup.g_fraction * gap_scale(params, &bath, omega, &grid)?;
        let layout = EmitterLayout::new(Projector::identity(params.n_bands()), omega, g, 0)?;
        let mediated = effective_bloch(&bath, &layout)?.model;
        let nu_p = natural_invariant(params, &bath, omega, &grid)?;
        let nu_a = natural_invariant(params, &mediated, omega, &grid)?;
        let hermitian = is_hermitian_model(params);
        let predicted_sign = if (params.dim() + hermitian as usize).is_multiple_of(2) { 1 } else { -1 };
        let pass = nu_p.value != 0 && nu_a.value == predicted_sign * nu_p.value;
        rows.push(Table1Row {
            model: params.name().to_string(),
            dim: params.dim(),
            hermitian,
            omega_e: omega,
            g,
            nu_p,
            nu_a,
            predicted_sign,
            pass,
        });
    }
    let mut table = Table::new(&["row", "dim", "hermitian", "nu_p", "nu_a", "raw_p", "raw_a", "predicted_sign"]);
    for (i, r) in rows.iter().enumerate() {
        table.push(vec![
            i as f64,
            r.dim as f64,
            r.hermitian as u8 as f64,
            r.nu_p.value as f64,
            r.nu_a.value as f64,
            r.nu_p.raw,
            r.nu_a.raw,
            r.predicted_sign as f64,
        ]);
    }
    Ok((rows, Artifacts { spectra: table, profiles: Table::default() }))
}

// ---------------------------------------------------------------- Fig. 1

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig1Setup {
    pub v: f64,
    pub w: f64,
    pub g: f64,
    #[serde(with = "crate::serde_complex")]
    pub omega_e: C64,
    /// Periodic bath length in unit cells.
    pub n_cells: usize,
    /// Emitter-free cells at each end of the array.
    pub stripe_d: usize,
}

impl Default for Fig1Setup {
    fn default() -> Self {
        Fig1Setup { v: 1.0, w: 1.5, g: 0.1, omega_e: re(0.0), n_cells: 30, stripe_d: 4 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Fig1Report {
    pub n_resonators: usize,
    pub n_emitters: usize,
    /// Atomic states closer than this to `omega_e` count as mid-gap.
    pub midgap_window: f64,
    pub midgap_energies: Vec<f64>,
    pub midgap_scores: Vec<f64>,
    /// Smallest `|E - omega_e|` among the remaining atomic states.
    pub atomic_bulk_gap: f64,
    /// `g^2 / v`.
    pub bulk_gap_scale: f64,
    /// Mid-gap atomic states after exchanging `v` and `w`.
    pub swapped_midgap_count: usize,
}

struct Fig1Panel {
    system: crate::realspace::RealSpaceSystem,
    spectrum: crate::realspace::Spectrum,
    midgap: Vec<usize>,
    bulk_gap: f64,
}

fn fig1_panel(setup: &Fig1Setup, v: f64, w: f64, window: f64) -> Result<Fig1Panel> {
    let bath = build_bath(&models::ssh(v, w), &[setup.n_cells], &[Boundary::Periodic])?;
    let layout = EmitterLayout::uniform(2, setup.omega_e, setup.g)?.with_stripe(setup.stripe_d);
    let system = attach_emitters(&bath, &layout)?;
    let raw = spectrum_with_sectors(&system)?;
    let mut midgap = Vec::new();
    let mut bulk_gap = f64::INFINITY;
    for i in raw.states_in(Sector::Atomic) {
        let d = (raw.energies[i] - setup.omega_e).norm();
        if d < window {
            midgap.push(i);
        } else {
            bulk_gap = bulk_gap.min(d);
        }
    }
    // the two edge modes hybridize across the array; separate them
    let spectrum = localize_states(&system, &raw, &midgap, 0)?;
    Ok(Fig1Panel { system, spectrum, midgap, bulk_gap })
}

/// Emitters on a periodic SSH ring with emitter-free stripes: the atomic
/// array is open and hosts edge states whenever the bath is topological.
pub fn fig1(setup: &Fig1Setup) -> Result<(Fig1Report, Artifacts)> {
    // the atomic bands sit at |E| in [g^2/(v+w), g^2/|w-v|]
    let window = 0.5 * setup.g * setup.g / (setup.v + setup.w);
    let main = fig1_panel(setup, setup.v, setup.w, window)?;
    let swapped = fig1_panel(setup, setup.w, setup.v, window)?;

    let mut spectra = Table::new(&["panel", "state", "energy", "atomic_weight", "score"]);
    for (p, panel) in [&main, &swapped].iter().enumerate() {
        for i in 0..panel.spectrum.len() {
            spectra.push(vec![
                p as f64,
                i as f64,
                panel.spectrum.energies[i].re,
                panel.spectrum.atomic_weight[i],
                sector_score(&panel.system, &panel.spectrum, i, 0),
            ]);
        }
    }
    let mut profiles = Table::new(&["state", "site", "position", "atomic", "weight"]);
    for &i in &main.midgap {
        let w = main.spectrum.weights(i);
        for (s, site) in main.system.sites().iter().enumerate() {
            profiles.push(vec![
                i as f64,
                s as f64,
                site.position[0],
                (site.sector == Sector::Atomic) as u8 as f64,
                w[s],
            ]);
        }
    }

    let report = Fig1Report {
        n_resonators: main.system.len() - main.system.n_atomic(),
        n_emitters: main.system.n_atomic(),
        midgap_window: window,
        midgap_energies: main.midgap.iter().map(|&i| main.spectrum.energies[i].re).collect(),
        midgap_scores: main.midgap.iter().map(|&i| sector_score(&main.system, &main.spectrum, i, 0)).collect(),
        atomic_bulk_gap: main.bulk_gap,
        bulk_gap_scale: setup.g * setup.g / setup.v,
        swapped_midgap_count: swapped.midgap.len(),
    };
    Ok((report, Artifacts { spectra, profiles }))
}

// ---------------------------------------------------------------- Fig. 2

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig2Setup {
    pub u: f64,
    #[serde(rename = "J")]
    pub j: f64,
    pub g: f64,
    #[serde(with = "crate::serde_complex")]
    pub omega_e: C64,
    /// Ribbon width in unit cells.
    pub l: usize,
    pub ky_nodes: usize,
    pub stripes: Vec<usize>,
}

impl Default for Fig2Setup {
    fn default() -> Self {
        Fig2Setup { u: 1.2, j: 1.0, g: 0.1, omega_e: re(0.0), l: 50, ky_nodes: 101, stripes: vec![0, 1, 4] }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Fig2Panel {
    pub stripe_d: usize,
    /// Atomic states inside the atomic window, over all `k_y`.
    pub atomic_in_gap: usize,
    /// `dE/dk_y` where the right-edge photonic branch crosses `omega_e`.
    pub photonic_right_slopes: Vec<f64>,
    /// Same for the right-edge atomic branch.
    pub atomic_right_slopes: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Fig2Report {
    /// Half of the photonic bulk gap `J | |u| - 2 |`.
    pub photonic_window: f64,
    /// Half of the atomic bulk gap `g^2 / (J (|u| + 2))`.
    pub atomic_window: f64,
    pub panels: Vec<Fig2Panel>,
}

/// Finite-difference slopes at the sign changes of `E - e0` along a branch.
/// `candidates[j]` lists the branch energies at node `j`; the one nearest
/// `e0` stands for the branch. Nodes are cyclic.
pub fn crossing_slopes(candidates: &[Vec<f64>], e0: f64, dk: f64) -> Vec<f64> {
    let pick = |c: &Vec<f64>| c.iter().cloned().min_by(|a, b| (a - e0).abs().total_cmp(&(b - e0).abs()));
    let n = candidates.len();
    let mut slopes = Vec::new();
    for j in 0..n {
        if let (Some(a), Some(b)) = (pick(&candidates[j]), pick(&candidates[(j + 1) % n])) {
            if (a - e0) * (b - e0) < 0.0 || (a == e0 && b != e0) {
                slopes.push((b - a) / dk);
            }
        }
    }
    slopes
}

/// QWZ ribbon with emitters: chiral photonic edge branches and, once the
/// emitter array is set back from the edges, counter-propagating atomic ones.
pub fn fig2(setup: &Fig2Setup) -> Result<(Fig2Report, Artifacts)> {
    let model = models::qwz(setup.u, setup.j);
    let ky = ky_nodes(setup.ky_nodes);
    let dk = 2.0 * PI / setup.ky_nodes as f64;
    let photonic_window = 0.5 * setup.j * (setup.u.abs() - 2.0).abs();
    let atomic_window = 0.5 * setup.g * setup.g / (setup.j * (setup.u.abs() + 2.0));
    let e0 = setup.omega_e.re;
    let mut spectra = Table::new(&["stripe_d", "ky", "energy", "score", "atomic_weight"]);
    let mut panels = Vec::new();
    for &d in &setup.stripes {
        let layout = EmitterLayout::uniform(2, setup.omega_e, setup.g)?.with_stripe(d);
        let rib = ribbon_spectrum(&model, Some(&layout), setup.l, &ky)?;
        let mut atomic_in_gap = 0;
        let mut photonic = vec![Vec::new(); ky.len()];
        let mut atomic = vec![Vec::new(); ky.len()];
        for (j, &k) in ky.iter().enumerate() {
            for (i, &e) in rib.energies[j].iter().enumerate() {
                let is_atomic = rib.atomic_weight[j][i] > crate::realspace::SECTOR_THRESHOLD;
                let score = rib.scores[j][i];
                spectra.push(vec![d as f64, k, e, score, rib.atomic_weight[j][i]]);
                let offset = (e - e0).abs();
                if is_atomic && offset < atomic_window {
                    atomic_in_gap += 1;
                    if score > 0.5 {
                        atomic[j].push(e);
                    }
                } else if !is_atomic && offset < photonic_window && score > 0.5 {
                    photonic[j].push(e);
                }
            }
        }
        panels.push(Fig2Panel {
            stripe_d: d,
            atomic_in_gap,
            photonic_right_slopes: crossing_slopes(&photonic, e0, dk),
            atomic_right_slopes: crossing_slopes(&atomic, e0, dk),
        });
    }
    Ok((Fig2Report { photonic_window, atomic_window, panels }, Artifacts { spectra, profiles: Table::default() }))
}

// ---------------------------------------------------------------- Fig. 3

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig3Setup {
    #[serde(rename = "J")]
    pub j: f64,
    pub delta: f64,
    pub gamma: f64,
    pub g: f64,
    #[serde(with = "crate::serde_complex")]
    pub omega_e: C64,
    pub n_cells: usize,
    pub stripe_d: usize,
}

impl Default for Fig3Setup {
    fn default() -> Self {
        Fig3Setup { j: 1.0, delta: 0.5, gamma: 1.0, g: 0.5, omega_e: c64(0.0, -1.0), n_cells: 20, stripe_d: 5 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Fig3Report {
    pub bare_argmax: usize,
    pub bare_sites: usize,
    pub atomic_argmax: usize,
    pub atomic_sites: usize,
    pub atomic_states: usize,
    pub winding_p: InvariantResult,
    pub winding_a: InvariantResult,
}

/// Hatano-Nelson skin effect: right-accumulated photonic modes on an open
/// chain, left-accumulated atomic modes on an open emitter array.
pub fn fig3(setup: &Fig3Setup) -> Result<(Fig3Report, Artifacts)> {
    let model = models::hatano_nelson(setup.j, setup.delta, setup.gamma);
    let open = build_bath(&model, &[setup.n_cells], &[Boundary::Open])?;
    let open_spec = spectrum_with_sectors(&open)?;
    let bare = skin_profile(&open, &open_spec, Sector::Photonic, false)?;

    let ring = build_bath(&model, &[setup.n_cells], &[Boundary::Periodic])?;
    let layout = EmitterLayout::uniform(1, setup.omega_e, setup.g)?.with_stripe(setup.stripe_d);
    let system = attach_emitters(&ring, &layout)?;
    let spec = spectrum_with_sectors(&system)?;
    let atomic = skin_profile(&system, &spec, Sector::Atomic, false)?;

    let grid = KGrid::default_for(1);
    let winding_p = winding_spectral_1d(&model, setup.omega_e, &grid)?;
    let mediated = effective_bloch(&model, &EmitterLayout::uniform(1, setup.omega_e, setup.g)?)?.model;
    let winding_a = winding_spectral_1d(&mediated, setup.omega_e, &grid)?;

    let mut spectra = Table::new(&["panel", "state", "re", "im", "atomic_weight"]);
    for (i, e) in open_spec.energies.iter().enumerate() {
        spectra.push(vec![0.0, i as f64, e.re, e.im, open_spec.atomic_weight[i]]);
    }
    for (i, e) in spec.energies.iter().enumerate() {
        spectra.push(vec![1.0, i as f64, e.re, e.im, spec.atomic_weight[i]]);
    }
    let mut profiles = Table::new(&["panel", "site", "position", "weight"]);
    for (p, prof) in [&bare, &atomic].iter().enumerate() {
        for ((l, x), w) in prof.labels.iter().zip(&prof.positions).zip(&prof.weights) {
            profiles.push(vec![p as f64, *l as f64, *x, *w]);
        }
    }
    let report = Fig3Report {
        bare_argmax: bare.argmax(),
        bare_sites: bare.weights.len(),
        atomic_argmax: atomic.argmax(),
        atomic_sites: atomic.weights.len(),
        atomic_states: spec.states_in(Sector::Atomic).len(),
        winding_p,
        winding_a,
    };
    Ok((report, Artifacts { spectra, profiles }))
}

// ---------------------------------------------------------------- Fig. 4

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig4Setup {
    #[serde(rename = "J")]
    pub j: f64,
    pub g: f64,
    #[serde(with = "crate::serde_complex")]
    pub omega_e: C64,
    pub grid: usize,
}

impl Default for Fig4Setup {
    fn default() -> Self {
        Fig4Setup { j: 1.0, g: 0.5, omega_e: c64(0.0, -1.0), grid: 64 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Fig4Report {
    pub invariant_p: InvariantResult,
    pub invariant_a: InvariantResult,
}

/// Chiral non-Hermitian 2D bath: iSV Chern numbers of bath and emitters.
pub fn fig4(setup: &Fig4Setup) -> Result<(Fig4Report, Artifacts)> {
    let model = models::chiral_nh_2d(setup.j);
    let grid = KGrid::new(setup.grid, 2)?;
    let mediated = effective_bloch(&model, &EmitterLayout::uniform(2, setup.omega_e, setup.g)?)?.model;
    let s = SymmetryOp::new(sigma_z(), Flavor::Chiral, Variant::NhAz)?;
    let invariant_p = chern_isv_2d(&model, &s, setup.omega_e, &grid)?;
    let invariant_a = chern_isv_2d(&mediated, &s, setup.omega_e, &grid)?;

    let mut spectra = Table::new(&["panel", "kx", "ky", "band", "re", "im"]);
    for (p, m) in [&model, &mediated].iter().enumerate() {
        let bands = crate::bloch::band_structure(m, &grid, false)?;
        for (node, row) in bands.energies.iter().enumerate() {
            let k = grid.node(node);
            let mut row = row.clone();
            row.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
            for (b, e) in row.iter().enumerate() {
                spectra.push(vec![p as f64, k[0], k[1], b as f64, e.re, e.im]);
            }
        }
    }
    Ok((Fig4Report { invariant_p, invariant_a }, Artifacts { spectra, profiles: Table::default() }))
}

// ---------------------------------------------------------------- Fig. 5

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig5Setup {
    pub v: f64,
    pub w: f64,
    pub g: f64,
    pub thetas: Vec<f64>,
    pub grid: usize,
}

impl Default for Fig5Setup {
    fn default() -> Self {
        Fig5Setup { v: 1.0, w: 1.5, g: 0.1, thetas: vec![0.0, FRAC_PI_8], grid: 256 }
    }
}

/// The two inequivalent ways of coupling two emitters to the doubled cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    /// Sublattices 1 and 2 of the doubled cell.
    OnCell,
    /// Sublattices 2 and 3 of the doubled cell.
    CellBreaking,
}

impl Placement {
    pub fn projector(self) -> Projector {
        let bits = match self {
            Placement::OnCell => [true, true, false, false],
            Placement::CellBreaking => [false, true, true, false],
        };
        Projector::new(bits.to_vec()).expect("rank two")
    }

    /// SSH couplings `(a, b)` whose inverse Bloch matrix `H_a` is proportional to.
    pub fn inverse_partner(self, v: f64, w: f64) -> (f64, f64) {
        match self {
            Placement::OnCell => (v * v, -w * w),
            Placement::CellBreaking => (w * w, -v * v),
        }
    }
}

/// Emitter model of the doubled-cell theta bath with `omega_e = 0`.
pub fn theta_emitters(v: f64, w: f64, theta: f64, g: f64, placement: Placement) -> Result<BlochModel> {
    let bath = models::enlarge_cell(&models::theta_model(v, w, theta)?, 2)?;
    let layout = EmitterLayout::new(placement.projector(), re(0.0), g, 0)?;
    Ok(effective_bloch(&bath, &layout)?.model)
}

/// `H_a(k) H_SSH(k; a, b) = c(k) 1`: returns `c` at `k = 0` and the largest
/// deviation from `c(0) 1` over the grid, relative to `|c(0)|`.
pub fn proportionality(h_a: &BlochModel, a: f64, b: f64, grid: &KGrid) -> Result<(C64, f64)> {
    let partner = models::ssh(a, b);
    let products: Vec<CMatrix> = grid.par_map(|k| h_a.evaluate(k).dot(&partner.evaluate(k)));
    let c0 = products[0][(0, 0)];
    if c0.norm() == 0.0 {
        return Err(Error::SingularMatrix { sigma_min: 0.0 });
    }
    let target = linalg::identity(2).mapv(|z| z * c0);
    let dev = products.iter().map(|p| linalg::max_abs_diff(p, &target)).fold(0.0, f64::max);
    Ok((c0, dev / c0.norm()))
}

/// Minimum over `k` of the separation between the two bands of a Hermitian
/// two-band model, grid search refined by golden-section search.
pub fn two_band_gap(model: &BlochModel, grid: &KGrid) -> Result<(f64, f64)> {
    let sep = |k: f64| -> Result<f64> {
        let (vals, _) = linalg::eigh(&model.evaluate(&[k]))?;
        Ok(vals[1] - vals[0])
    };
    let coarse: Vec<Result<f64>> = grid.par_map(|k| sep(k[0]));
    let coarse: Vec<f64> = coarse.into_iter().collect::<Result<_>>()?;
    let j = (0..coarse.len()).min_by(|&a, &b| coarse[a].total_cmp(&coarse[b])).unwrap_or(0);
    let h = grid.spacing();
    let (mut lo, mut hi) = (grid.node(j)[0] - h, grid.node(j)[0] + h);
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (sep(x1)?, sep(x2)?);
    for _ in 0..80 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = sep(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = sep(x2)?;
        }
    }
    let k = 0.5 * (lo + hi);
    Ok((sep(k)?.min(coarse[j]), k))
}

#[derive(Debug, Clone, Serialize)]
pub struct ThetaProportionality {
    pub placement: Placement,
    pub partner: (f64, f64),
    #[serde(with = "crate::serde_complex")]
    pub constant: C64,
    pub relative_deviation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ThetaGap {
    pub theta: f64,
    pub gap: f64,
    pub argmin_k: f64,
    /// `2 g^2 w cos(2 theta) / (v^2 + w^2)`.
    pub expected: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ThetaWindings {
    pub v: f64,
    pub w: f64,
    pub photonic: i64,
    pub atomic: i64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Fig5Report {
    pub proportionality: Vec<ThetaProportionality>,
    pub cell_breaking_gaps: Vec<ThetaGap>,
    /// At `theta = 0`, for `(v, w)` and `(w, v)`.
    pub windings: Vec<ThetaWindings>,
}

/// Doubled-cell theta model with two emitters per cell.
pub fn fig5(setup: &Fig5Setup) -> Result<(Fig5Report, Artifacts)> {
    let grid = KGrid::new(setup.grid, 1)?;
    let (v, w, g) = (setup.v, setup.w, setup.g);
    let mut proportionality_rows = Vec::new();
    for placement in [Placement::OnCell, Placement::CellBreaking] {
        let h_a = theta_emitters(v, w, 0.0, g, placement)?;
        let partner = placement.inverse_partner(v, w);
        let (constant, relative_deviation) = proportionality(&h_a, partner.0, partner.1, &grid)?;
        proportionality_rows.push(ThetaProportionality { placement, partner, constant, relative_deviation });
    }

    let mut spectra = Table::new(&["theta", "placement", "k", "lower", "upper"]);
    let mut gaps = Vec::new();
    for &theta in &setup.thetas {
        for (p, placement) in [Placement::OnCell, Placement::CellBreaking].iter().enumerate() {
            let h_a = theta_emitters(v, w, theta, g, *placement)?;
            for k in grid.nodes() {
                let (vals, _) = linalg::eigh(&h_a.evaluate(&k))?;
                spectra.push(vec![theta, p as f64, k[0], vals[0], vals[1]]);
            }
            if *placement == Placement::CellBreaking {
                let (gap, argmin_k) = two_band_gap(&h_a, &grid)?;
                let expected = 2.0 * g * g * w * (2.0 * theta).cos() / (v * v + w * w);
                gaps.push(ThetaGap { theta, gap, argmin_k, expected });
            }
        }
    }

    let s = SymmetryOp::new(sigma_z(), Flavor::Chiral, Variant::Herm)?;
    let mut windings = Vec::new();
    for (a, b) in [(v, w), (w, v)] {
        let photonic = winding_chiral_1d(&models::ssh(a, b), &s, &grid)?.value;
        let atomic = winding_chiral_1d(&theta_emitters(a, b, 0.0, g, Placement::CellBreaking)?, &s, &grid)?.value;
        windings.push(ThetaWindings { v: a, w: b, photonic, atomic });
    }
    let report = Fig5Report { proportionality: proportionality_rows, cell_breaking_gaps: gaps, windings };
    Ok((report, Artifacts { spectra, profiles: Table::default() }))
}

// ---------------------------------------------------------------- Fig. 6

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig6Setup {
    pub kappa: f64,
    #[serde(rename = "J")]
    pub j: f64,
    pub g: f64,
    #[serde(with = "crate::serde_complex")]
    pub omega_e: C64,
    pub n_cells: usize,
    pub stripe_d: usize,
}

impl Default for Fig6Setup {
    fn default() -> Self {
        Fig6Setup { kappa: 1.0, j: 0.5, g: 0.1, omega_e: -IM, n_cells: 20, stripe_d: 3 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Fig6Report {
    pub photonic_ratio: f64,
    pub atomic_ratio: f64,
    pub photonic_argmax: usize,
    pub atomic_argmax: usize,
    pub winding_p: InvariantResult,
    pub winding_a: InvariantResult,
}

/// Stacked opposite Hatano-Nelson chains with emitters on one chain: no
/// photonic skin effect, yet an atomic one.
pub fn fig6(setup: &Fig6Setup) -> Result<(Fig6Report, Artifacts)> {
    let (model, projector) = models::stacked_hn(setup.kappa, setup.j);
    let bath = build_bath(&model, &[setup.n_cells], &[Boundary::Open])?;
    let layout = EmitterLayout::new(projector.clone(), setup.omega_e, setup.g, setup.stripe_d)?;
    let system = attach_emitters(&bath, &layout)?;
    let spec = spectrum_with_sectors(&system)?;
    let photonic = skin_profile(&system, &spec, Sector::Photonic, true)?;
    let atomic = skin_profile(&system, &spec, Sector::Atomic, true)?;

    let grid = KGrid::default_for(1);
    let winding_p = winding_spectral_1d(&model, setup.omega_e, &grid)?;
    let bloch_layout = EmitterLayout::new(projector, setup.omega_e, setup.g, 0)?;
    let winding_a = winding_spectral_1d(&effective_bloch(&model, &bloch_layout)?.model, setup.omega_e, &grid)?;

    let mut spectra = Table::new(&["state", "re", "im", "atomic_weight"]);
    for (i, e) in spec.energies.iter().enumerate() {
        spectra.push(vec![i as f64, e.re, e.im, spec.atomic_weight[i]]);
    }
    let mut profiles = Table::new(&["panel", "cell", "weight"]);
    for (p, prof) in [&photonic, &atomic].iter().enumerate() {
        for (x, w) in prof.positions.iter().zip(&prof.weights) {
            profiles.push(vec![p as f64, *x, *w]);
        }
    }
    let report = Fig6Report {
        photonic_ratio: photonic.max_min_ratio(),
        atomic_ratio: atomic.max_min_ratio(),
        photonic_argmax: photonic.argmax(),
        atomic_argmax: atomic.argmax(),
        winding_p,
        winding_a,
    };
    Ok((report, Artifacts { spectra, profiles }))
}

// ---------------------------------------------------------------- symmetry inheritance

/// Symmetry candidates a model is classified with: the published rotated
/// operators for the theta model, a Pauli-string search otherwise.
pub fn candidates_for(params: &ModelParams, variant: Variant) -> Result<Candidates> {
    match *params {
        ModelParams::Theta(p) if variant == Variant::Herm => {
            let (c, s) = ((2.0 * p.theta).cos(), (2.0 * p.theta).sin());
            let u_trs = linalg::identity(2).mapv(|z| z * c) - crate::linalg::sigma_x().mapv(|z| z * (IM * s));
            Ok(Candidates::Explicit(vec![
                SymmetryOp::new(u_trs, Flavor::Trs, variant)?.with_label("U_TRS"),
                SymmetryOp::new(sigma_z(), Flavor::Phs, variant)?.with_label("U_PHS"),
            ]))
        }
        _ => Ok(Candidates::PauliSearch),
    }
}

/// Variants a model is classified under: Hermitian AZ for Hermitian baths,
/// both non-Hermitian variants otherwise (AZ† only where it is supported).
pub fn variants_for(params: &ModelParams) -> Vec<Variant> {
    match params {
        _ if is_hermitian_model(params) => vec![Variant::Herm],
        ModelParams::ChiralNh2d(_) => vec![Variant::NhAz],
        _ => vec![Variant::NhAz, Variant::NhAzDag],
    }
}

/// Three gapped emitter frequencies per model: the resonance and two detunings.
pub fn detunings(params: &ModelParams) -> [C64; 3] {
    let w = resonance(params);
    if is_hermitian_model(params) {
        [w, w + 0.3, w - 0.2]
    } else {
        [w, w + 0.2, w - c64(0.0, 0.2)]
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InheritanceCase {
    pub model: String,
    pub variant: Variant,
    #[serde(with = "crate::serde_complex")]
    pub omega_e: C64,
    pub bath: String,
    pub predicted: String,
    pub direct: String,
    pub agree: bool,
}

/// Classifies bath and emitters (one emitter per resonator) and compares the
/// emitter class with the inheritance prediction.
pub fn inheritance_case(
    params: &ModelParams,
    variant: Variant,
    omega: C64,
    g: f64,
    grid: &KGrid,
    tol: f64,
) -> Result<InheritanceCase> {
    let bath = params.build()?;
    let candidates = candidates_for(params, variant)?;
    let bath_class = classify(&bath, variant, &candidates, grid, tol)?;
    let layout = EmitterLayout::uniform(params.n_bands(), omega, g)?;
    let mediated = effective_bloch(&bath, &layout)?.model;
    let direct = classify(&mediated, variant, &candidates, grid, tol)?;
    let predicted = predict_inherited_class(&bath_class, omega);
    Ok(InheritanceCase {
        model: params.name().to_string(),
        variant,
        omega_e: omega,
        agree: predicted.same_class(&direct),
        bath: bath_class.name,
        predicted: predicted.name,
        direct: direct.name,
    })
}

/// Every zoo model with default parameters, every variant, three detunings.
pub fn inheritance_suite(g: f64, grid_points: usize, tol: f64) -> Result<Vec<InheritanceCase>> {
    let mut out = Vec::new();
    for name in ModelParams::NAMES {
        let params = ModelParams::default_for(name).expect("zoo model");
        let grid = KGrid::new(grid_points, params.dim())?;
        for variant in variants_for(&params) {
            for omega in detunings(&params) {
                out.push(inheritance_case(&params, variant, omega, g, &grid, tol)?);
            }
        }
    }
    Ok(out)
}
