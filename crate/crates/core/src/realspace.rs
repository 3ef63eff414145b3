//! Finite lattices in the single-excitation sector.
//!
//! Photonic sites come first, ordered by `cell * n_bands + sublattice` with
//! cells flattened axis 0 fastest; emitter sites follow in the same order as
//! the resonators they couple to. Positions are in unit-cell units, with
//! sublattice `s` of cell `c` placed at `c + s / n_bands` along axis 0.

use serde::{Deserialize, Serialize};

use crate::bloch::{fourier_hoppings, BlochModel};
use crate::error::{Error, Result};
use crate::linalg::{self, re, CMatrix, C64};
use crate::mediator::EmitterLayout;

const MAX_HOPPING_RANGE: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Open,
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sector {
    Photonic,
    Atomic,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Site {
    pub cell: Vec<i64>,
    pub sublattice: usize,
    pub sector: Sector,
    pub position: Vec<f64>,
}

/// A finite single-excitation Hamiltonian with per-site metadata. Immutable
/// once built.
#[derive(Debug, Clone)]
pub struct RealSpaceSystem {
    hamiltonian: CMatrix,
    sites: Vec<Site>,
    n_cells: Vec<usize>,
    bc: Vec<Boundary>,
    n_bands: usize,
    layout: Option<EmitterLayout>,
    hermitian: bool,
}

impl RealSpaceSystem {
    pub fn hamiltonian(&self) -> &CMatrix {
        &self.hamiltonian
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn n_cells(&self) -> &[usize] {
        &self.n_cells
    }

    pub fn boundaries(&self) -> &[Boundary] {
        &self.bc
    }

    pub fn n_bands(&self) -> usize {
        self.n_bands
    }

    pub fn layout(&self) -> Option<&EmitterLayout> {
        self.layout.as_ref()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn sector_sites(&self, sector: Sector) -> Vec<usize> {
        (0..self.sites.len()).filter(|&i| self.sites[i].sector == sector).collect()
    }

    pub fn n_atomic(&self) -> usize {
        self.sector_sites(Sector::Atomic).len()
    }
}

fn cell_multi(mut flat: usize, n_cells: &[usize]) -> Vec<usize> {
    n_cells
        .iter()
        .map(|&n| {
            let i = flat % n;
            flat /= n;
            i
        })
        .collect()
}

fn cell_flat(multi: &[usize], n_cells: &[usize]) -> usize {
    multi.iter().zip(n_cells).rev().fold(0, |acc, (&i, &n)| acc * n + i)
}

fn site_position(cell: &[usize], s: usize, n_bands: usize) -> Vec<f64> {
    cell.iter()
        .enumerate()
        .map(|(axis, &c)| if axis == 0 { c as f64 + s as f64 / n_bands as f64 } else { c as f64 })
        .collect()
}

/// Tight-binding lattice of `n_cells[j]` cells along each axis.
pub fn build_bath(model: &BlochModel, n_cells: &[usize], bc: &[Boundary]) -> Result<RealSpaceSystem> {
    let dim = model.dim();
    if n_cells.len() != dim || bc.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: n_cells.len().min(bc.len()) });
    }
    if n_cells.contains(&0) {
        return Err(Error::InvalidParameter("every axis needs at least one cell".into()));
    }
    let table = fourier_hoppings(model, MAX_HOPPING_RANGE)?;
    let nb = model.n_bands();
    let total: usize = n_cells.iter().product();
    let mut h = linalg::zeros(total * nb, total * nb);
    for n in 0..total {
        let nv = cell_multi(n, n_cells);
        'terms: for term in table.terms() {
            let mut mv = Vec::with_capacity(dim);
            for axis in 0..dim {
                let target = nv[axis] as i64 + term.shift[axis];
                let len = n_cells[axis] as i64;
                let wrapped = match bc[axis] {
                    Boundary::Periodic => target.rem_euclid(len),
                    Boundary::Open if (0..len).contains(&target) => target,
                    Boundary::Open => continue 'terms,
                };
                mv.push(wrapped as usize);
            }
            let m = cell_flat(&mv, n_cells);
            for s in 0..nb {
                for s2 in 0..nb {
                    h[(n * nb + s, m * nb + s2)] += term.matrix[(s, s2)];
                }
            }
        }
    }
    let sites = (0..total)
        .flat_map(|n| {
            let cell = cell_multi(n, n_cells);
            (0..nb).map(move |s| Site {
                cell: cell.iter().map(|&c| c as i64).collect(),
                sublattice: s,
                sector: Sector::Photonic,
                position: site_position(&cell, s, nb),
            })
        })
        .collect();
    let hermitian = linalg::hermiticity_residual(&h) <= 1e-12;
    Ok(RealSpaceSystem {
        hamiltonian: h,
        sites,
        n_cells: n_cells.to_vec(),
        bc: bc.to_vec(),
        n_bands: nb,
        layout: None,
        hermitian,
    })
}

/// Indices of the photonic sites that receive an emitter: those selected by
/// the projector, excluding `stripe_d` cells at both ends of every axis.
pub fn emitter_hosts(bath: &RealSpaceSystem, layout: &EmitterLayout) -> Result<Vec<usize>> {
    let proj = layout.projector();
    if proj.n_bands() != bath.n_bands {
        return Err(Error::LayoutMismatch(format!(
            "projector has {} entries, lattice has {} sublattices",
            proj.n_bands(),
            bath.n_bands
        )));
    }
    let d = layout.stripe_d();
    if let Some(&n) = bath.n_cells.iter().find(|&&n| 2 * d > n) {
        return Err(Error::LayoutMismatch(format!("stripe width {d} exceeds half of {n} cells")));
    }
    Ok(bath
        .sector_sites(Sector::Photonic)
        .into_iter()
        .filter(|&i| {
            let site = &bath.sites[i];
            proj.diagonal()[site.sublattice]
                && site
                    .cell
                    .iter()
                    .zip(&bath.n_cells)
                    .all(|(&c, &n)| c >= d as i64 && c < (n - d) as i64)
        })
        .collect())
}

/// Adds one emitter at `omega_e` per host resonator, coupled with strength `g`.
pub fn attach_emitters(bath: &RealSpaceSystem, layout: &EmitterLayout) -> Result<RealSpaceSystem> {
    if bath.layout.is_some() {
        return Err(Error::LayoutMismatch("system already carries emitters".into()));
    }
    let hosts = emitter_hosts(bath, layout)?;
    let np = bath.len();
    let ne = hosts.len();
    let mut h = linalg::zeros(np + ne, np + ne);
    h.slice_mut(ndarray::s![..np, ..np]).assign(&bath.hamiltonian);
    let g = re(layout.g());
    for (j, &host) in hosts.iter().enumerate() {
        h[(np + j, np + j)] = layout.omega_e();
        h[(host, np + j)] = g;
        h[(np + j, host)] = g;
    }
    let mut sites = bath.sites.clone();
    sites.extend(hosts.iter().map(|&host| Site { sector: Sector::Atomic, ..bath.sites[host].clone() }));
    Ok(RealSpaceSystem {
        hamiltonian: h,
        sites,
        n_cells: bath.n_cells.clone(),
        bc: bath.bc.clone(),
        n_bands: bath.n_bands,
        layout: Some(layout.clone()),
        hermitian: bath.hermitian && layout.omega_e().im == 0.0,
    })
}

/// Eigenpairs (right eigenvectors as unit-norm columns) with a sector tag.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub energies: Vec<C64>,
    pub vectors: CMatrix,
    /// Summed `|psi|^2` on atomic sites, per state.
    pub atomic_weight: Vec<f64>,
    pub sectors: Vec<Sector>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    /// `|psi_i|^2` per site, normalized to one.
    pub fn weights(&self, state: usize) -> Vec<f64> {
        let col = self.vectors.column(state);
        let w: Vec<f64> = col.iter().map(|z| z.norm_sqr()).collect();
        let total: f64 = w.iter().sum();
        w.into_iter().map(|x| x / total).collect()
    }

    pub fn states_in(&self, sector: Sector) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.sectors[i] == sector).collect()
    }
}

/// States with more than this atomic weight are tagged atomic.
pub const SECTOR_THRESHOLD: f64 = 0.5;

/// Dense diagonalization; Hermitian systems use the Hermitian solver.
pub fn spectrum_with_sectors(system: &RealSpaceSystem) -> Result<Spectrum> {
    let (energies, vectors) = if system.hermitian {
        let (vals, vecs) = linalg::eigh(&system.hamiltonian)?;
        (vals.into_iter().map(re).collect(), vecs)
    } else {
        linalg::eig(&system.hamiltonian)?
    };
    let atomic = system.sector_sites(Sector::Atomic);
    let mut spectrum = Spectrum { energies, vectors, atomic_weight: Vec::new(), sectors: Vec::new() };
    for i in 0..spectrum.len() {
        let w = spectrum.weights(i);
        let a: f64 = atomic.iter().map(|&s| w[s]).sum();
        spectrum.atomic_weight.push(a);
        spectrum.sectors.push(if a > SECTOR_THRESHOLD { Sector::Atomic } else { Sector::Photonic });
    }
    Ok(spectrum)
}

/// Within every run of Hermitian eigenstates whose consecutive energies differ
/// by less than `tol`, rotates to the basis diagonalizing the position along
/// `axis`. Near-degenerate edge modes on opposite ends then separate instead
/// of appearing as bonding/antibonding pairs.
pub fn localize_degenerate(system: &RealSpaceSystem, spectrum: &Spectrum, axis: usize, tol: f64) -> Result<Spectrum> {
    if !system.hermitian {
        return Err(Error::InvalidParameter("cluster localization needs a Hermitian system".into()));
    }
    let mut out = spectrum.clone();
    let n = spectrum.len();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (spectrum.energies[end] - spectrum.energies[end - 1]).norm() < tol {
            end += 1;
        }
        if end - start > 1 {
            out = localize_states(system, &out, &(start..end).collect::<Vec<_>>(), axis)?;
        }
        start = end;
    }
    Ok(out)
}

/// Rotates the listed Hermitian eigenstates to the basis diagonalizing the
/// position along `axis` within their span. Energies become expectation
/// values; sector tags are recomputed.
pub fn localize_states(system: &RealSpaceSystem, spectrum: &Spectrum, states: &[usize], axis: usize) -> Result<Spectrum> {
    if !system.hermitian {
        return Err(Error::InvalidParameter("cluster localization needs a Hermitian system".into()));
    }
    let mut out = spectrum.clone();
    if states.len() < 2 {
        return Ok(out);
    }
    let x: Vec<f64> = system.sites.iter().map(|s| s.position[axis]).collect();
    let n = system.len();
    let block = CMatrix::from_shape_fn((n, states.len()), |(i, j)| spectrum.vectors[(i, states[j])]);
    let xb = CMatrix::from_shape_fn(block.dim(), |(i, j)| block[(i, j)] * x[i]);
    let (_, rot) = linalg::eigh(&linalg::dagger(&block).dot(&xb))?;
    let rotated = block.dot(&rot);
    let atomic = system.sector_sites(Sector::Atomic);
    for (j, &i) in states.iter().enumerate() {
        let col = rotated.column(j);
        out.vectors.column_mut(i).assign(&col);
        let hv = system.hamiltonian.dot(&col);
        out.energies[i] = col.iter().zip(hv.iter()).map(|(a, b)| a.conj() * b).sum();
        let w = out.weights(i);
        let a: f64 = atomic.iter().map(|&s| w[s]).sum();
        out.atomic_weight[i] = a;
        out.sectors[i] = if a > SECTOR_THRESHOLD { Sector::Atomic } else { Sector::Photonic };
    }
    Ok(out)
}

/// Site-resolved weights averaged over a set of states.
#[derive(Debug, Clone, Serialize)]
pub struct ModeProfile {
    /// Label of each entry: site index, or cell index when summed per cell.
    pub labels: Vec<usize>,
    pub positions: Vec<f64>,
    pub weights: Vec<f64>,
    #[serde(with = "crate::serde_complex::vec")]
    pub energies: Vec<C64>,
}

impl ModeProfile {
    pub fn argmax(&self) -> usize {
        (0..self.weights.len()).max_by(|&a, &b| self.weights[a].total_cmp(&self.weights[b])).unwrap_or(0)
    }

    pub fn max_min_ratio(&self) -> f64 {
        let max = self.weights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = self.weights.iter().cloned().fold(f64::INFINITY, f64::min);
        max / min
    }
}

/// Average of `|psi_i|^2` over the sector's states, restricted to the
/// sector's sites with each state renormalized there first. With
/// `per_cell`, weights of sites in the same unit cell are summed (along axis 0).
pub fn skin_profile(
    system: &RealSpaceSystem,
    spectrum: &Spectrum,
    sector: Sector,
    per_cell: bool,
) -> Result<ModeProfile> {
    let states = spectrum.states_in(sector);
    let sites = system.sector_sites(sector);
    if states.is_empty() || sites.is_empty() {
        return Err(Error::EmptySector);
    }
    let mut avg = vec![0.0; sites.len()];
    for &i in &states {
        let w = spectrum.weights(i);
        let restricted: Vec<f64> = sites.iter().map(|&s| w[s]).collect();
        let total: f64 = restricted.iter().sum();
        for (a, r) in avg.iter_mut().zip(restricted) {
            *a += r / total / states.len() as f64;
        }
    }
    let energies = states.iter().map(|&i| spectrum.energies[i]).collect();
    if !per_cell {
        return Ok(ModeProfile {
            labels: sites.clone(),
            positions: sites.iter().map(|&s| system.sites[s].position[0]).collect(),
            weights: avg,
            energies,
        });
    }
    let mut cells: Vec<i64> = sites.iter().map(|&s| system.sites[s].cell[0]).collect();
    cells.sort_unstable();
    cells.dedup();
    let mut weights = vec![0.0; cells.len()];
    for (&s, a) in sites.iter().zip(&avg) {
        let idx = cells.binary_search(&system.sites[s].cell[0]).expect("cell listed");
        weights[idx] += a;
    }
    Ok(ModeProfile {
        labels: cells.iter().map(|&c| c as usize).collect(),
        positions: cells.iter().map(|&c| c as f64).collect(),
        weights,
        energies,
    })
}

/// `(<x> - center) / half_width` for the interval `[lo, hi]`: `+1` at `hi`,
/// `-1` at `lo`, `0` for a state centered in the interval.
pub fn localization_score(weights: &[f64], positions: &[f64], lo: f64, hi: f64) -> f64 {
    let total: f64 = weights.iter().sum();
    let mean: f64 = weights.iter().zip(positions).map(|(w, x)| w * x).sum::<f64>() / total;
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    if half <= 0.0 {
        return 0.0;
    }
    (mean - center) / half
}

/// Score of a state against the extent of the sites of its own sector.
pub fn sector_score(system: &RealSpaceSystem, spectrum: &Spectrum, state: usize, axis: usize) -> f64 {
    let sites = system.sector_sites(spectrum.sectors[state]);
    let w = spectrum.weights(state);
    let weights: Vec<f64> = sites.iter().map(|&s| w[s]).collect();
    let xs: Vec<f64> = sites.iter().map(|&s| system.sites[s].position[axis]).collect();
    let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    localization_score(&weights, &xs, lo, hi)
}

/// Bands of a ribbon, open along x with `l` cells, at each `k_y` node.
#[derive(Debug, Clone, Serialize)]
pub struct RibbonSpectrum {
    pub ky: Vec<f64>,
    /// `energies[node][state]`, real parts for Hermitian ribbons.
    pub energies: Vec<Vec<f64>>,
    pub imag: Vec<Vec<f64>>,
    /// Localization score along x over the sites of the state's own sector.
    pub scores: Vec<Vec<f64>>,
    pub atomic_weight: Vec<Vec<f64>>,
}

/// `n` uniform nodes `2 pi j / n` on `[0, 2 pi)`.
pub fn ky_nodes(n: usize) -> Vec<f64> {
    (0..n).map(|j| 2.0 * std::f64::consts::PI * j as f64 / n as f64).collect()
}

/// The `k_y`-resolved chain: a 1D lattice open along x, with hoppings
/// `sum_{R_y} t_{(R_x, R_y)} exp(-i k_y R_y)`.
pub fn ribbon_chain(model: &BlochModel, l: usize, ky: f64) -> Result<RealSpaceSystem> {
    if model.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: model.dim() });
    }
    let table = fourier_hoppings(model, MAX_HOPPING_RANGE)?;
    let nb = model.n_bands();
    let mut chain = crate::bloch::HoppingTable::new(1, nb);
    for term in table.terms() {
        let phase = C64::from_polar(1.0, -ky * term.shift[1] as f64);
        chain.add(&[term.shift[0]], term.matrix.mapv(|z| z * phase));
    }
    let mut model1d = BlochModel::from_hoppings(format!("{}@ky={ky}", model.name()), chain);
    if let Some(h) = model.hermitian_hint() {
        model1d = model1d.with_hermitian_hint(h);
    }
    build_bath(&model1d, &[l], &[Boundary::Open])
}

/// Ribbon band structure with optional emitters (stripes of `stripe_d` cells
/// at both x edges).
pub fn ribbon_spectrum(
    model: &BlochModel,
    layout: Option<&EmitterLayout>,
    l: usize,
    ky: &[f64],
) -> Result<RibbonSpectrum> {
    use rayon::prelude::*;
    // energies (re, im), edge scores and atomic weights at one k_y
    type Node = (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>);
    let per_node: Vec<Result<Node>> = ky
        .par_iter()
        .map(|&k| {
            let bath = ribbon_chain(model, l, k)?;
            let system = match layout {
                Some(lay) => attach_emitters(&bath, lay)?,
                None => bath,
            };
            let spec = spectrum_with_sectors(&system)?;
            let scores = (0..spec.len()).map(|i| sector_score(&system, &spec, i, 0)).collect();
            Ok((
                spec.energies.iter().map(|e| e.re).collect(),
                spec.energies.iter().map(|e| e.im).collect(),
                scores,
                spec.atomic_weight.clone(),
            ))
        })
        .collect();
    let mut out = RibbonSpectrum {
        ky: ky.to_vec(),
        energies: Vec::new(),
        imag: Vec::new(),
        scores: Vec::new(),
        atomic_weight: Vec::new(),
    };
    for r in per_node {
        let (e, i, s, a) = r?;
        out.energies.push(e);
        out.imag.push(i);
        out.scores.push(s);
        out.atomic_weight.push(a);
    }
    Ok(out)
}

/// `omega I + g^2 G_p(omega)` restricted to the host resonators, with
/// `G_p = (omega - H_bath)^{-1}` from direct solves against the bath matrix.
pub fn effective_atomic_realspace(
    bath: &RealSpaceSystem,
    hosts: &[usize],
    omega: C64,
    g: f64,
) -> Result<CMatrix> {
    let n = bath.len();
    if let Some(&h) = hosts.iter().find(|&&h| h >= n) {
        return Err(Error::LayoutMismatch(format!("host site {h} outside the {n}-site lattice")));
    }
    let shifted = linalg::identity(n).mapv(|z| z * omega) - &bath.hamiltonian;
    let sigma = linalg::min_singular_value(&shifted)?;
    if sigma < 1e-10 {
        return Err(Error::ResolventSingular { k: Vec::new(), sigma_min: sigma });
    }
    let mut rhs = linalg::zeros(n, hosts.len());
    for (j, &h) in hosts.iter().enumerate() {
        rhs[(h, j)] = re(1.0);
    }
    let cols = linalg::solve(&shifted, &rhs)?;
    let mut out = linalg::zeros(hosts.len(), hosts.len());
    for (i, &h) in hosts.iter().enumerate() {
        for j in 0..hosts.len() {
            out[(i, j)] = cols[(h, j)] * (g * g);
        }
        out[(i, i)] += omega;
    }
    Ok(out)
}
