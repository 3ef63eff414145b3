//! Matrix-valued Bloch Hamiltonians on the Brillouin zone.
//!
//! Fourier convention (used everywhere in the crate): a lattice operator with
//! cell-to-cell blocks `t_R[s, s'] = <r_0, s| H |r_R, s'>` has the Bloch form
//!
//! ```text
//! H(k)[s, s'] = sum_R t_R[s, s'] exp(-i k.R)
//! ```
//!
//! which corresponds to `a_{n,s} = N^{-1/2} sum_k exp(-i k.r_n) a_{k,s}`. Under
//! this convention a periodic ring has eigenstates `psi_{n,s} = exp(-i k n) u_s`
//! with `H(k) u = E u`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use ndarray::Array2;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, C64};

pub type Evaluator = Arc<dyn Fn(&[f64]) -> CMatrix + Send + Sync>;

/// One block `t_R` of a translation-invariant tight-binding operator.
#[derive(Debug, Clone)]
pub struct HoppingTerm {
    pub shift: Vec<i64>,
    pub matrix: CMatrix,
}

/// Finite-range real-space form of a Bloch Hamiltonian.
#[derive(Debug, Clone)]
pub struct HoppingTable {
    dim: usize,
    n_bands: usize,
    terms: Vec<HoppingTerm>,
}

impl HoppingTable {
    pub fn new(dim: usize, n_bands: usize) -> Self {
        HoppingTable { dim, n_bands, terms: Vec::new() }
    }

    /// Adds `matrix` to the block at `shift`, merging with an existing block.
    pub fn add(&mut self, shift: &[i64], matrix: CMatrix) -> &mut Self {
        assert_eq!(shift.len(), self.dim, "shift dimension");
        assert_eq!(matrix.dim(), (self.n_bands, self.n_bands), "block shape");
        if let Some(t) = self.terms.iter_mut().find(|t| t.shift == shift) {
            t.matrix = &t.matrix + &matrix;
        } else {
            self.terms.push(HoppingTerm { shift: shift.to_vec(), matrix });
        }
        self
    }

    /// Adds a single matrix element `<r_0, s| H |r_R, s'>`.
    pub fn add_element(&mut self, shift: &[i64], s: usize, s2: usize, value: C64) -> &mut Self {
        let mut m = linalg::zeros(self.n_bands, self.n_bands);
        m[(s, s2)] = value;
        self.add(shift, m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_bands(&self) -> usize {
        self.n_bands
    }

    pub fn terms(&self) -> &[HoppingTerm] {
        &self.terms
    }

    pub fn block(&self, shift: &[i64]) -> Option<&CMatrix> {
        self.terms.iter().find(|t| t.shift == shift).map(|t| &t.matrix)
    }

    /// Largest |R_j| over all stored blocks.
    pub fn range(&self) -> usize {
        self.terms
            .iter()
            .flat_map(|t| t.shift.iter().map(|r| r.unsigned_abs() as usize))
            .max()
            .unwrap_or(0)
    }

    pub fn bloch(&self, k: &[f64]) -> CMatrix {
        let mut h = linalg::zeros(self.n_bands, self.n_bands);
        for t in &self.terms {
            let phase: f64 = t.shift.iter().zip(k).map(|(r, kj)| *r as f64 * kj).sum();
            let factor = C64::from_polar(1.0, -phase);
            h.zip_mut_with(&t.matrix, |acc, x| *acc += x * factor);
        }
        h
    }

    /// Applies `m -> u^† m u` to every block.
    pub fn conjugated(&self, u: &CMatrix) -> HoppingTable {
        let ud = linalg::dagger(u);
        HoppingTable {
            dim: self.dim,
            n_bands: self.n_bands,
            terms: self
                .terms
                .iter()
                .map(|t| HoppingTerm { shift: t.shift.clone(), matrix: ud.dot(&t.matrix).dot(u) })
                .collect(),
        }
    }
}

/// A Bloch Hamiltonian: an evaluator `k -> H(k)` on the `dim`-torus.
#[derive(Clone)]
pub struct BlochModel {
    name: String,
    dim: usize,
    n_bands: usize,
    evaluator: Evaluator,
    hermitian_hint: Option<bool>,
    hoppings: Option<Arc<HoppingTable>>,
}

impl fmt::Debug for BlochModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BlochModel")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("n_bands", &self.n_bands)
            .field("hermitian_hint", &self.hermitian_hint)
            .finish()
    }
}

impl BlochModel {
    pub fn new<F>(name: impl Into<String>, dim: usize, n_bands: usize, evaluator: F) -> Self
    where
        F: Fn(&[f64]) -> CMatrix + Send + Sync + 'static,
    {
        BlochModel {
            name: name.into(),
            dim,
            n_bands,
            evaluator: Arc::new(evaluator),
            hermitian_hint: None,
            hoppings: None,
        }
    }

    pub fn from_hoppings(name: impl Into<String>, table: HoppingTable) -> Self {
        let table = Arc::new(table);
        let eval_table = Arc::clone(&table);
        BlochModel {
            name: name.into(),
            dim: table.dim(),
            n_bands: table.n_bands(),
            evaluator: Arc::new(move |k| eval_table.bloch(k)),
            hermitian_hint: None,
            hoppings: Some(table),
        }
    }

    pub fn with_hermitian_hint(mut self, hermitian: bool) -> Self {
        self.hermitian_hint = Some(hermitian);
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_bands(&self) -> usize {
        self.n_bands
    }

    pub fn hermitian_hint(&self) -> Option<bool> {
        self.hermitian_hint
    }

    pub fn hoppings(&self) -> Option<&HoppingTable> {
        self.hoppings.as_deref()
    }

    pub fn evaluate(&self, k: &[f64]) -> CMatrix {
        assert_eq!(k.len(), self.dim, "momentum dimension");
        let h = (self.evaluator)(k);
        debug_assert_eq!(h.dim(), (self.n_bands, self.n_bands));
        h
    }

    /// A new model `k -> f(H(k), k)`, keeping dimension but not hoppings.
    pub fn map<F>(&self, name: impl Into<String>, n_bands: usize, f: F) -> BlochModel
    where
        F: Fn(CMatrix, &[f64]) -> CMatrix + Send + Sync + 'static,
    {
        let inner = self.clone();
        BlochModel::new(name, self.dim, n_bands, move |k| f(inner.evaluate(k), k))
    }

    /// Hermiticity residual maximized over the grid.
    pub fn hermiticity_residual(&self, grid: &KGrid) -> f64 {
        grid.par_map(|k| linalg::hermiticity_residual(&self.evaluate(k)))
            .into_iter()
            .fold(0.0, f64::max)
    }

    pub fn is_hermitian_on(&self, grid: &KGrid, tol: f64) -> bool {
        match self.hermitian_hint {
            Some(h) => h,
            None => self.hermiticity_residual(grid) <= tol,
        }
    }
}

/// Free-function form of [`BlochModel::evaluate`].
pub fn evaluate(model: &BlochModel, k: &[f64]) -> CMatrix {
    model.evaluate(k)
}

/// Uniform discretization `k_j = 2 pi m / M` of the Brillouin zone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct KGrid {
    points_per_axis: usize,
    dim: usize,
}

impl KGrid {
    pub const MIN_POINTS: usize = 8;

    pub fn new(points_per_axis: usize, dim: usize) -> Result<Self> {
        if points_per_axis < Self::MIN_POINTS {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least {} points per axis, got {points_per_axis}",
                Self::MIN_POINTS
            )));
        }
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidParameter(format!("unsupported dimension {dim}")));
        }
        Ok(KGrid { points_per_axis, dim })
    }

    /// 256 nodes in 1D, 128 per axis in 2D.
    pub fn default_for(dim: usize) -> Self {
        let m = if dim == 1 { 256 } else { 128 };
        KGrid { points_per_axis: m, dim }
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points_per_axis.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.points_per_axis as f64
    }

    pub fn refined(&self) -> KGrid {
        KGrid { points_per_axis: 2 * self.points_per_axis, dim: self.dim }
    }

    /// Flat index with axis 0 running fastest.
    pub fn index(&self, multi: &[usize]) -> usize {
        let m = self.points_per_axis;
        multi.iter().rev().fold(0, |acc, &i| acc * m + (i % m))
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let m = self.points_per_axis;
        (0..self.dim)
            .map(|_| {
                let i = flat % m;
                flat /= m;
                i
            })
            .collect()
    }

    pub fn node(&self, flat: usize) -> Vec<f64> {
        self.multi_index(flat).into_iter().map(|i| i as f64 * self.spacing()).collect()
    }

    pub fn nodes(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.len()).map(move |i| self.node(i))
    }

    /// Evaluates `f` at every node in parallel, preserving node order.
    pub fn par_map<T, F>(&self, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(&[f64]) -> T + Sync + Send,
    {
        (0..self.len()).into_par_iter().map(|i| f(&self.node(i))).collect()
    }
}

/// Eigenvalues (and optionally right eigenvectors) on every node of a grid.
#[derive(Debug, Clone)]
pub struct BandStructure {
    pub grid: KGrid,
    /// `energies[node][band]`, sorted by real then imaginary part.
    pub energies: Vec<Vec<C64>>,
    pub vectors: Option<Vec<CMatrix>>,
}

impl BandStructure {
    pub fn max_imag(&self) -> f64 {
        self.energies.iter().flatten().fold(0.0, |a, e| a.max(e.im.abs()))
    }

    pub fn band(&self, b: usize) -> Vec<C64> {
        self.energies.iter().map(|row| row[b]).collect()
    }
}

fn diagonalize(model: &BlochModel, k: &[f64], hermitian: bool) -> Result<(Vec<C64>, CMatrix)> {
    let h = model.evaluate(k);
    if hermitian {
        let (vals, vecs) = linalg::eigh(&h)?;
        Ok((vals.into_iter().map(linalg::re).collect(), vecs))
    } else {
        linalg::eig(&h)
    }
}

/// Spectrum of `model` on every node of `grid`.
pub fn band_structure(model: &BlochModel, grid: &KGrid, with_vectors: bool) -> Result<BandStructure> {
    check_grid(model, grid)?;
    let hermitian = model.hermitian_hint() == Some(true);
    let per_node: Vec<Result<(Vec<C64>, CMatrix)>> =
        grid.par_map(|k| diagonalize(model, k, hermitian));
    let mut energies = Vec::with_capacity(grid.len());
    let mut vectors = Vec::new();
    for (node, r) in per_node.into_iter().enumerate() {
        let (vals, vecs) = r.map_err(|e| Error::Eigensolver { node, reason: e.to_string() })?;
        energies.push(vals);
        if with_vectors {
            vectors.push(vecs);
        }
    }
    Ok(BandStructure { grid: *grid, energies, vectors: with_vectors.then_some(vectors) })
}

pub(crate) fn check_grid(model: &BlochModel, grid: &KGrid) -> Result<()> {
    if grid.dim() != model.dim() {
        return Err(Error::DimensionMismatch { expected: model.dim(), got: grid.dim() });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GapKind {
    /// Real-axis separation (Hermitian spectra).
    Line,
    /// Distance in the complex plane.
    Point,
}

#[derive(Debug, Clone, Serialize)]
pub struct GapReport {
    pub kind: GapKind,
    #[serde(with = "crate::serde_complex")]
    pub base_energy: C64,
    pub min_distance: f64,
    pub argmin_k: Vec<f64>,
    pub gapped: bool,
}

/// Distance of the spectrum from `base_energy`, minimized over the grid.
pub fn gap_check(
    model: &BlochModel,
    grid: &KGrid,
    base_energy: C64,
    kind: GapKind,
    tol: f64,
) -> Result<GapReport> {
    if tol <= 0.0 {
        return Err(Error::InvalidParameter("gap tolerance must be positive".into()));
    }
    let bands = band_structure(model, grid, false)?;
    let mut best = (f64::INFINITY, 0usize);
    for (node, row) in bands.energies.iter().enumerate() {
        for e in row {
            let d = match kind {
                GapKind::Point => (e - base_energy).norm(),
                GapKind::Line => (e.re - base_energy.re).abs(),
            };
            if d < best.0 {
                best = (d, node);
            }
        }
    }
    Ok(GapReport {
        kind,
        base_energy,
        min_distance: best.0,
        argmin_k: grid.node(best.1),
        gapped: best.0 > tol,
    })
}

/// `sgn(H)`: same eigenvectors, eigenvalues mapped to +-1.
pub fn band_flatten(h: &CMatrix, tol: f64) -> Result<CMatrix> {
    let residual = linalg::hermiticity_residual(h);
    if residual > tol.max(1e-8) {
        return Err(Error::NonHermitianInput { residual });
    }
    let (vals, vecs) = linalg::eigh(h)?;
    if let Some(v) = vals.iter().find(|v| v.abs() <= tol) {
        return Err(Error::NearZeroEigenvalue { value: *v, tol });
    }
    let n = h.nrows();
    let signs: Vec<C64> = vals.iter().map(|v| linalg::re(v.signum())).collect();
    let scaled = Array2::from_shape_fn((n, n), |(i, j)| vecs[(i, j)] * signs[j]);
    Ok(scaled.dot(&linalg::dagger(&vecs)))
}

/// `V = H (sqrt(H^† H))^{-1}`, the unitary polar factor of `H`.
///
/// Computed from the Hermitian eigendecomposition of `H^† H`.
pub fn unitarize(h: &CMatrix, tol: f64) -> Result<CMatrix> {
    let gram = linalg::dagger(h).dot(h);
    let (vals, vecs) = linalg::eigh(&gram)?;
    let smallest = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    if smallest.max(0.0).sqrt() <= tol {
        return Err(Error::SingularMatrix { sigma_min: smallest.max(0.0).sqrt() });
    }
    let n = h.nrows();
    let inv_sqrt: Vec<f64> = vals.iter().map(|v| 1.0 / v.sqrt()).collect();
    let scaled = Array2::from_shape_fn((n, n), |(i, j)| vecs[(i, j)] * inv_sqrt[j]);
    let root_inv = scaled.dot(&linalg::dagger(&vecs));
    Ok(h.dot(&root_inv))
}

/// Real-space blocks `t_R = M^{-D} sum_k H(k) exp(i k.R)` recovered by sampling
/// the evaluator on an `samples^D` grid.
///
/// Fails with [`Error::InfiniteRange`] when blocks beyond `max_range` do not
/// vanish below `1e-12`.
pub fn fourier_hoppings(model: &BlochModel, max_range: usize) -> Result<HoppingTable> {
    if let Some(t) = model.hoppings() {
        return Ok(t.clone());
    }
    let samples = (4 * max_range + 4).max(16);
    let dim = model.dim();
    let n = model.n_bands();
    let grid = KGrid { points_per_axis: samples, dim };
    let values = grid.par_map(|k| model.evaluate(k));
    let norm = 1.0 / grid.len() as f64;
    let mut table = HoppingTable::new(dim, n);
    let half = (samples / 2) as i64;
    for flat in 0..grid.len() {
        // map the sample index onto shifts in [-M/2, M/2)
        let shift: Vec<i64> = grid
            .multi_index(flat)
            .into_iter()
            .map(|i| {
                let i = i as i64;
                if i >= half {
                    i - samples as i64
                } else {
                    i
                }
            })
            .collect();
        let mut block = linalg::zeros(n, n);
        for (node, hk) in values.iter().enumerate() {
            let k = grid.node(node);
            let phase: f64 = shift.iter().zip(&k).map(|(r, kj)| *r as f64 * kj).sum();
            let f = C64::from_polar(norm, phase);
            block.zip_mut_with(hk, |acc, x| *acc += x * f);
        }
        if linalg::max_abs(&block) <= 1e-12 {
            continue;
        }
        if shift.iter().any(|r| r.unsigned_abs() as usize > max_range) {
            return Err(Error::InfiniteRange { range: max_range });
        }
        table.add(&shift, block);
    }
    Ok(table)
}
