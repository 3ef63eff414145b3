//! Integer invariants: chiral and spectral windings in 1D, Chern numbers in 2D.
//!
//! Windings accumulate principal phase increments of a determinant around the
//! Brillouin zone; the grid is doubled (up to four times) while any single
//! increment reaches `pi/2`. Chern numbers use gauge-invariant plaquette
//! products of overlap determinants and follow `C = (1/2 pi i) int dA` with
//! `A = <u|du>`, so `C = -(1/2 pi) int Omega` for the curvature `Omega` of
//! `i<u|du>`.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use crate::bloch::{check_grid, unitarize, BlochModel, KGrid};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, C64};
use crate::symmetry::{Flavor, SymmetryOp};

/// Rounded values within this distance of an integer count as quantized.
pub const QUANTIZATION_TOL: f64 = 0.01;
/// Eigenvalues closer than this to the base energy count as touching it.
pub const DEGENERACY_TOL: f64 = 1e-9;
const MAX_REFINEMENTS: usize = 4;
const CHIRAL_TOL: f64 = 1e-8;
const GAP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum InvariantKind {
    WindingChiral,
    WindingSpectral,
    Chern,
    ChernIsv,
}

#[derive(Debug, Clone, Serialize)]
pub struct InvariantResult {
    pub kind: InvariantKind,
    pub value: i64,
    pub raw: f64,
    /// Points per axis of the grid the value was obtained on.
    pub grid_m: usize,
    #[serde(with = "crate::serde_complex::option")]
    pub base_energy: Option<C64>,
    pub residual: f64,
}

impl InvariantResult {
    fn quantize(kind: InvariantKind, raw: f64, grid_m: usize, base_energy: Option<C64>) -> Result<Self> {
        if !raw.is_finite() {
            return Err(Error::NonQuantized { raw });
        }
        let value = raw.round();
        let residual = (raw - value).abs();
        if residual >= QUANTIZATION_TOL {
            return Err(Error::NonQuantized { raw });
        }
        Ok(InvariantResult { kind, value: value as i64, raw, grid_m, base_energy, residual })
    }
}

fn require_dim(model: &BlochModel, dim: usize) -> Result<()> {
    if model.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: model.dim() });
    }
    Ok(())
}

/// Total phase of `f` around the loop `k in [0, 2 pi)` divided by `2 pi`,
/// sampled on `m` points and refined until every step is below `pi/2`.
fn loop_winding<F>(m0: usize, f: F) -> Result<(f64, usize)>
where
    F: Fn(f64) -> Result<C64> + Sync,
{
    let mut m = m0;
    let mut last = (0.0, m0);
    for attempt in 0..=MAX_REFINEMENTS {
        let grid = KGrid::new(m, 1)?;
        let values: Vec<Result<C64>> = grid.par_map(|k| f(k[0]));
        let values: Vec<C64> = values.into_iter().collect::<Result<_>>()?;
        let mut total = 0.0;
        let mut max_step: f64 = 0.0;
        for j in 0..m {
            let step = (values[(j + 1) % m] / values[j]).arg();
            max_step = max_step.max(step.abs());
            total += step;
        }
        last = (total / (2.0 * PI), m);
        if max_step < FRAC_PI_2 || attempt == MAX_REFINEMENTS {
            break;
        }
        m *= 2;
    }
    Ok(last)
}

fn chiral_basis(s: &SymmetryOp, n_bands: usize) -> Result<(CMatrix, usize)> {
    if s.flavor() != Flavor::Chiral {
        return Err(Error::InvalidParameter("winding needs a chiral operator".into()));
    }
    if s.dim() != n_bands {
        return Err(Error::DimensionMismatch { expected: n_bands, got: s.dim() });
    }
    let u = s.unitary();
    let residual = linalg::hermiticity_residual(u);
    if residual > CHIRAL_TOL {
        return Err(Error::InvalidParameter(format!("chiral operator must square to one (residual {residual:e})")));
    }
    let (vals, vecs) = linalg::eigh(u)?;
    // eigenvalues ascend: put the +1 sector first
    let n_plus = vals.iter().filter(|&&v| v > 0.0).count();
    if 2 * n_plus != n_bands {
        return Err(Error::InvalidParameter(format!(
            "chiral sectors are unbalanced ({n_plus} of {n_bands} positive)"
        )));
    }
    let mut w = linalg::zeros(n_bands, n_bands);
    for (dst, src) in (0..n_bands).rev().enumerate() {
        w.column_mut(dst).assign(&vecs.column(src));
    }
    Ok((w, n_plus))
}

/// Winding number of `det Q(k)`, where `Q` is the upper-right block of `H(k)`
/// in the eigenbasis of `S` with the `+1` sector first.
pub fn winding_chiral_1d(model: &BlochModel, s: &SymmetryOp, grid: &KGrid) -> Result<InvariantResult> {
    require_dim(model, 1)?;
    check_grid(model, grid)?;
    let (w, n) = chiral_basis(s, model.n_bands())?;
    let u = s.unitary().clone();
    let ud = linalg::dagger(&u);
    let wd = linalg::dagger(&w);
    let residual = grid
        .par_map(|k| {
            let h = model.evaluate(k);
            linalg::max_abs_diff(&u.dot(&h).dot(&ud), &h.mapv(|z| -z))
        })
        .into_iter()
        .fold(0.0, f64::max);
    if residual > CHIRAL_TOL {
        return Err(Error::NotChiral { residual });
    }
    let q_at = |k: f64| -> CMatrix {
        let h = wd.dot(&model.evaluate(&[k])).dot(&w);
        h.slice(ndarray::s![..n, n..]).to_owned()
    };
    let (raw, m) = loop_winding(grid.points_per_axis(), |k| {
        let q = q_at(k);
        let sigma = linalg::min_singular_value(&q)?;
        if sigma <= GAP_TOL {
            return Err(Error::GapClosed { k: vec![k], distance: sigma });
        }
        linalg::det(&q)
    })?;
    InvariantResult::quantize(InvariantKind::WindingChiral, raw, m, None)
}

/// Winding of `det(H(k) - E)` around `E`, summed over all bands.
pub fn winding_spectral_1d(model: &BlochModel, base_energy: C64, grid: &KGrid) -> Result<InvariantResult> {
    require_dim(model, 1)?;
    check_grid(model, grid)?;
    let n = model.n_bands();
    let (raw, m) = loop_winding(grid.points_per_axis(), |k| {
        let mut h = model.evaluate(&[k]);
        for i in 0..n {
            h[(i, i)] -= base_energy;
        }
        let sigma = linalg::min_singular_value(&h)?;
        if sigma <= GAP_TOL {
            return Err(Error::PointGapClosed { k: vec![k], distance: sigma });
        }
        linalg::det(&h)
    })?;
    InvariantResult::quantize(InvariantKind::WindingSpectral, raw, m, Some(base_energy))
}

/// Which eigenstates span the projector whose Chern number is taken.
#[derive(Debug, Clone, PartialEq)]
pub enum BandSelection {
    /// All eigenstates with energy below the given value.
    Below(f64),
    /// Explicit band indices in ascending-energy order.
    Bands(Vec<usize>),
}

fn selected_frame(h: &CMatrix, selection: &BandSelection, k: &[f64]) -> Result<CMatrix> {
    let (vals, vecs) = linalg::eigh(h)?;
    let idx: Vec<usize> = match selection {
        BandSelection::Below(e) => {
            if let Some(v) = vals.iter().find(|v| (*v - e).abs() <= DEGENERACY_TOL) {
                return Err(Error::GapClosed { k: k.to_vec(), distance: (v - e).abs() });
            }
            (0..vals.len()).filter(|&i| vals[i] < *e).collect()
        }
        BandSelection::Bands(b) => {
            for &i in b {
                if i >= vals.len() {
                    return Err(Error::InvalidParameter(format!("band {i} out of range")));
                }
                for j in 0..vals.len() {
                    if !b.contains(&j) && (vals[i] - vals[j]).abs() <= DEGENERACY_TOL {
                        return Err(Error::GapClosed { k: k.to_vec(), distance: (vals[i] - vals[j]).abs() });
                    }
                }
            }
            b.clone()
        }
    };
    let mut frame = linalg::zeros(h.nrows(), idx.len());
    for (dst, &src) in idx.iter().enumerate() {
        frame.column_mut(dst).assign(&vecs.column(src));
    }
    Ok(frame)
}

fn link(a: &CMatrix, b: &CMatrix) -> Result<C64> {
    let d = linalg::det(&linalg::dagger(a).dot(b))?;
    Ok(d / d.norm())
}

/// Chern number of the selected bands of a Hermitian 2D model.
pub fn chern_2d(model: &BlochModel, selection: &BandSelection, grid: &KGrid) -> Result<InvariantResult> {
    require_dim(model, 2)?;
    check_grid(model, grid)?;
    let residual = model.hermiticity_residual(grid);
    if residual > CHIRAL_TOL {
        return Err(Error::NonHermitianInput { residual });
    }
    let frames: Vec<Result<CMatrix>> = grid.par_map(|k| selected_frame(&model.evaluate(k), selection, k));
    let frames: Vec<CMatrix> = frames.into_iter().collect::<Result<_>>()?;
    let n_sel = frames[0].ncols();
    if let Some((node, _)) = frames.iter().enumerate().find(|(_, f)| f.ncols() != n_sel) {
        return Err(Error::GapClosed { k: grid.node(node), distance: 0.0 });
    }
    if n_sel == 0 {
        return Err(Error::EmptySector);
    }
    let m = grid.points_per_axis();
    let flux: Vec<Result<f64>> = grid.par_map(|k| {
        let i = ((k[0] / grid.spacing()).round() as usize) % m;
        let j = ((k[1] / grid.spacing()).round() as usize) % m;
        let f = |a: usize, b: usize| &frames[grid.index(&[a % m, b % m])];
        let plaquette = link(f(i, j), f(i + 1, j))?
            * link(f(i + 1, j), f(i + 1, j + 1))?
            * link(f(i + 1, j + 1), f(i, j + 1))?
            * link(f(i, j + 1), f(i, j))?;
        Ok(plaquette.arg())
    });
    let total: f64 = flux.into_iter().collect::<Result<Vec<f64>>>()?.into_iter().sum();
    let raw = total / (2.0 * PI);
    InvariantResult::quantize(InvariantKind::Chern, raw, m, None)
}

/// Chern number of `iSV` with `V` the unitary polar factor of `H(k) - E`.
/// `iSV` is Hermitian and squares to one when `S (H - E)^† S^† = -(H - E)`;
/// the invariant is the Chern number of its negative eigenspace.
pub fn chern_isv_2d(
    model: &BlochModel,
    s: &SymmetryOp,
    base_energy: C64,
    grid: &KGrid,
) -> Result<InvariantResult> {
    require_dim(model, 2)?;
    check_grid(model, grid)?;
    if s.flavor() != Flavor::Chiral {
        return Err(Error::InvalidParameter("iSV needs a chiral operator".into()));
    }
    let n = model.n_bands();
    if s.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: s.dim() });
    }
    let u = s.unitary().clone();
    let ud = linalg::dagger(&u);
    let shifted = move |h: CMatrix| {
        let mut h = h;
        for i in 0..h.nrows() {
            h[(i, i)] -= base_energy;
        }
        h
    };

    let checks: Vec<Result<(f64, f64)>> = grid.par_map(|k| {
        let h = shifted(model.evaluate(k));
        let chiral = linalg::max_abs_diff(&u.dot(&linalg::dagger(&h)).dot(&ud), &h.mapv(|z| -z));
        Ok((chiral, linalg::min_singular_value(&h)?))
    });
    let mut worst_chiral: f64 = 0.0;
    for (node, c) in checks.into_iter().enumerate() {
        let (chiral, sigma) = c?;
        worst_chiral = worst_chiral.max(chiral);
        if sigma <= GAP_TOL {
            return Err(Error::PointGapClosed { k: grid.node(node), distance: sigma });
        }
    }
    if worst_chiral > CHIRAL_TOL {
        return Err(Error::NotChiral { residual: worst_chiral });
    }

    let isv_at = {
        let u = u.clone();
        move |h: CMatrix| -> Result<CMatrix> {
            let v = unitarize(&h, GAP_TOL).map_err(|e| Error::UnitarizationFailed(e.to_string()))?;
            Ok(u.dot(&v).mapv(|z| z * linalg::IM))
        }
    };
    let verify: Vec<Result<f64>> = grid.par_map(|k| {
        let q = isv_at(shifted(model.evaluate(k)))?;
        let herm = linalg::hermiticity_residual(&q);
        let square = linalg::max_abs_diff(&q.dot(&q), &linalg::identity(q.nrows()));
        Ok(herm.max(square))
    });
    let worst = verify.into_iter().collect::<Result<Vec<f64>>>()?.into_iter().fold(0.0, f64::max);
    if worst > CHIRAL_TOL {
        return Err(Error::UnitarizationFailed(format!("iSV is not a Hermitian involution (residual {worst:e})")));
    }

    let inner = model.clone();
    let isv = BlochModel::new(format!("iSV[{}]", model.name()), 2, n, move |k| {
        isv_at(shifted(inner.evaluate(k)))
            .unwrap_or_else(|_| CMatrix::from_elem((n, n), linalg::c64(f64::NAN, f64::NAN)))
    })
    .with_hermitian_hint(true);
    let chern = chern_2d(&isv, &BandSelection::Below(0.0), grid)?;
    Ok(InvariantResult { kind: InvariantKind::ChernIsv, base_energy: Some(base_energy), ..chern })
}
