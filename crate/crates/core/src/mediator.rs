//! Photon-mediated emitter Hamiltonians.
//!
//! With emitters at frequency `omega` coupled with strength `g` to the
//! resonators selected by the projector `P`, the single-excitation atomic
//! Hamiltonian is `H_a(k) = P^T (omega + g^2 (omega - H_p(k))^{-1}) P`.

use serde::{Deserialize, Serialize};

use crate::bloch::{check_grid, BlochModel, KGrid};
use crate::error::{Error, Result};
use crate::linalg::{self, c64, re, CMatrix, C64};

/// Diagonal 0/1 projector onto the resonators that host an emitter.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<u8>", into = "Vec<u8>")]
pub struct Projector {
    diagonal: Vec<bool>,
}

impl Projector {
    pub fn new(diagonal: Vec<bool>) -> Result<Self> {
        if !diagonal.iter().any(|&b| b) {
            return Err(Error::InvalidParameter("projector must select at least one resonator".into()));
        }
        Ok(Projector { diagonal })
    }

    pub fn identity(n_bands: usize) -> Self {
        Projector { diagonal: vec![true; n_bands] }
    }

    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        if let Some(b) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::InvalidParameter(format!("projector entries must be 0 or 1, got {b}")));
        }
        Self::new(bits.iter().map(|&b| b == 1).collect())
    }

    pub fn n_bands(&self) -> usize {
        self.diagonal.len()
    }

    pub fn rank(&self) -> usize {
        self.diagonal.iter().filter(|&&b| b).count()
    }

    pub fn is_identity(&self) -> bool {
        self.diagonal.iter().all(|&b| b)
    }

    /// Selected sublattice indices in ascending order.
    pub fn selected(&self) -> Vec<usize> {
        self.diagonal.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect()
    }

    pub fn diagonal(&self) -> &[bool] {
        &self.diagonal
    }

    /// The `n_bands x rank` isometry whose columns are the selected unit vectors.
    pub fn isometry(&self) -> CMatrix {
        let mut p = linalg::zeros(self.n_bands(), self.rank());
        for (col, row) in self.selected().into_iter().enumerate() {
            p[(row, col)] = re(1.0);
        }
        p
    }
}

impl TryFrom<Vec<u8>> for Projector {
    type Error = Error;
    fn try_from(bits: Vec<u8>) -> Result<Self> {
        Projector::from_bits(&bits)
    }
}

impl From<Projector> for Vec<u8> {
    fn from(p: Projector) -> Self {
        p.diagonal.into_iter().map(u8::from).collect()
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLayout {
    pi_diagonal: Projector,
    #[serde(with = "crate::serde_complex")]
    omega_e: C64,
    g: f64,
    #[serde(default)]
    stripe_d: usize,
}

/// Emitter placement and coupling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLayout")]
pub struct EmitterLayout {
    pi_diagonal: Projector,
    #[serde(with = "crate::serde_complex")]
    omega_e: C64,
    g: f64,
    /// Cells left without emitters at each open end in real-space builds.
    stripe_d: usize,
}

impl TryFrom<RawLayout> for EmitterLayout {
    type Error = Error;
    fn try_from(r: RawLayout) -> Result<Self> {
        EmitterLayout::new(r.pi_diagonal, r.omega_e, r.g, r.stripe_d)
    }
}

impl EmitterLayout {
    pub fn new(pi_diagonal: Projector, omega_e: C64, g: f64, stripe_d: usize) -> Result<Self> {
        if !(g > 0.0 && g.is_finite()) {
            return Err(Error::InvalidParameter(format!("coupling g must be positive, got {g}")));
        }
        if !(omega_e.re.is_finite() && omega_e.im.is_finite()) {
            return Err(Error::InvalidParameter("omega_e must be finite".into()));
        }
        Ok(EmitterLayout { pi_diagonal, omega_e, g, stripe_d })
    }

    /// One emitter per resonator, no stripes.
    pub fn uniform(n_bands: usize, omega_e: C64, g: f64) -> Result<Self> {
        Self::new(Projector::identity(n_bands), omega_e, g, 0)
    }

    pub fn projector(&self) -> &Projector {
        &self.pi_diagonal
    }

    pub fn omega_e(&self) -> C64 {
        self.omega_e
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn stripe_d(&self) -> usize {
        self.stripe_d
    }

    pub fn with_stripe(mut self, d: usize) -> Self {
        self.stripe_d = d;
        self
    }

    fn check_bath(&self, bath: &BlochModel) -> Result<()> {
        if self.pi_diagonal.n_bands() != bath.n_bands() {
            return Err(Error::LayoutMismatch(format!(
                "projector has {} entries, bath has {} bands",
                self.pi_diagonal.n_bands(),
                bath.n_bands()
            )));
        }
        Ok(())
    }
}

/// Probing options for [`effective_bloch_with`].
#[derive(Debug, Clone, Copy)]
pub struct ResolventProbe {
    pub grid: KGrid,
    /// Minimum admissible singular value of `omega - H_p(k)`.
    pub tol: f64,
}

impl ResolventProbe {
    pub fn default_for(dim: usize) -> Self {
        ResolventProbe { grid: KGrid::default_for(dim), tol: 1e-9 }
    }
}

/// An effective atomic model together with the diagnostics gathered while
/// probing the bath resolvent.
#[derive(Debug, Clone)]
pub struct Mediated {
    pub model: BlochModel,
    /// Smallest singular value of `omega - H_p(k)` on the probe grid.
    pub sigma_min: f64,
    /// Smallest distance between `omega` and the bath spectrum on the probe grid.
    pub gap_distance: f64,
    pub warnings: Vec<String>,
}

/// `P^T (omega + g^2 (omega - h)^{-1}) P` via one linear solve. Entries are NaN
/// if `omega - h` is exactly singular.
pub fn mediate_matrix(h: &CMatrix, projector: &Projector, omega: C64, g: f64) -> CMatrix {
    let n = h.nrows();
    let shifted = linalg::identity(n).mapv(|z| z * omega) - h;
    let p = projector.isometry();
    let r = projector.rank();
    match linalg::solve(&shifted, &p) {
        Ok(x) => {
            let g2 = g * g;
            let mut out = linalg::transpose(&p).dot(&x).mapv(|z| z * g2);
            for i in 0..r {
                out[(i, i)] += omega;
            }
            out
        }
        Err(_) => CMatrix::from_elem((r, r), c64(f64::NAN, f64::NAN)),
    }
}

/// [`effective_bloch_with`] on the default probe grid with tolerance `1e-9`.
pub fn effective_bloch(bath: &BlochModel, layout: &EmitterLayout) -> Result<Mediated> {
    effective_bloch_with(bath, layout, &ResolventProbe::default_for(bath.dim()))
}

/// Effective atomic Bloch Hamiltonian. The resolvent is probed on `probe.grid`
/// and must be nonsingular there.
pub fn effective_bloch_with(
    bath: &BlochModel,
    layout: &EmitterLayout,
    probe: &ResolventProbe,
) -> Result<Mediated> {
    layout.check_bath(bath)?;
    check_grid(bath, &probe.grid)?;
    let omega = layout.omega_e();
    let n = bath.n_bands();
    let stats: Vec<Result<(f64, f64)>> = probe.grid.par_map(|k| {
        let h = bath.evaluate(k);
        let shifted = linalg::identity(n).mapv(|z| z * omega) - &h;
        let sigma = linalg::min_singular_value(&shifted)?;
        let dist = linalg::eigvals(&h)?
            .into_iter()
            .map(|e| (e - omega).norm())
            .fold(f64::INFINITY, f64::min);
        Ok((sigma, dist))
    });
    let mut sigma_min = (f64::INFINITY, 0usize);
    let mut gap_distance = f64::INFINITY;
    for (node, s) in stats.into_iter().enumerate() {
        let (sigma, dist) = s?;
        if sigma < sigma_min.0 {
            sigma_min = (sigma, node);
        }
        gap_distance = gap_distance.min(dist);
    }
    if sigma_min.0 < probe.tol {
        return Err(Error::ResolventSingular { k: probe.grid.node(sigma_min.1), sigma_min: sigma_min.0 });
    }

    let mut warnings = Vec::new();
    let g = layout.g();
    if g > 0.5 * gap_distance {
        warnings.push(format!(
            "coupling g = {g} exceeds half the distance {gap_distance:.4e} between omega_e and the bath spectrum"
        ));
    }

    let projector = layout.projector().clone();
    let hermitian = bath.hermitian_hint() == Some(true) && omega.im == 0.0;
    let inner = bath.clone();
    let mut model = BlochModel::new(
        format!("mediated[{}]", bath.name()),
        bath.dim(),
        projector.rank(),
        move |k| mediate_matrix(&inner.evaluate(k), &projector, omega, g),
    );
    if hermitian {
        model = model.with_hermitian_hint(true);
    }
    Ok(Mediated { model, sigma_min: sigma_min.0, gap_distance, warnings })
}

/// Bloch Hamiltonian of emitters plus bath, `[[omega I, g I], [g I, H_p(k)]]`.
pub fn full_bloch(bath: &BlochModel, layout: &EmitterLayout) -> Result<BlochModel> {
    layout.check_bath(bath)?;
    if !layout.projector().is_identity() {
        return Err(Error::UnsupportedLayout(
            "the full atom-light Bloch Hamiltonian needs one emitter per resonator".into(),
        ));
    }
    let n = bath.n_bands();
    let omega = layout.omega_e();
    let coupling = linalg::identity(n).mapv(|z| z * layout.g());
    let on_site = linalg::identity(n).mapv(|z| z * omega);
    let inner = bath.clone();
    let mut model = BlochModel::new(format!("full[{}]", bath.name()), bath.dim(), 2 * n, move |k| {
        linalg::block2(&on_site, &coupling, &coupling, &inner.evaluate(k))
    });
    if bath.hermitian_hint() == Some(true) && omega.im == 0.0 {
        model = model.with_hermitian_hint(true);
    }
    Ok(model)
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificateReport {
    /// `(-g^2)^{N_b}`.
    #[serde(with = "crate::serde_complex")]
    pub expected: C64,
    pub max_rel_err: f64,
    pub worst_k: Vec<f64>,
    pub worst_lambda: f64,
    pub nodes_checked: usize,
}

/// Checks that `det(H_lambda(k) - omega)` stays equal to `(-g^2)^{N_b}` along the
/// interpolation `H_lambda = (1 - lambda) H_full + lambda (omega + g sigma_x (x) 1)`,
/// so the full system never closes its gap at `omega`.
pub fn deformation_gap_certificate(
    bath: &BlochModel,
    layout: &EmitterLayout,
    grid: &KGrid,
    lambda_steps: usize,
) -> Result<CertificateReport> {
    const REL_TOL: f64 = 1e-8;
    if lambda_steps == 0 {
        return Err(Error::InvalidParameter("lambda_steps must be >= 1".into()));
    }
    let full = full_bloch(bath, layout)?;
    check_grid(bath, grid)?;
    let n = bath.n_bands();
    let omega = layout.omega_e();
    let g = layout.g();
    let expected = re(-g * g).powi(n as i32);
    let endpoint = {
        let c = linalg::identity(n).mapv(|v| v * g);
        let on = linalg::identity(n).mapv(|v| v * omega);
        linalg::block2(&on, &c, &c, &on)
    };
    let lambdas: Vec<f64> = (0..=lambda_steps).map(|i| i as f64 / lambda_steps as f64).collect();
    let per_node: Vec<Result<(f64, f64)>> = grid.par_map(|k| {
        let hk = full.evaluate(k);
        let mut worst = (-1.0f64, 0.0f64);
        for &lam in &lambdas {
            let mut m = hk.mapv(|z| z * (1.0 - lam)) + endpoint.mapv(|z| z * lam);
            for i in 0..2 * n {
                m[(i, i)] -= omega;
            }
            let rel = (linalg::det(&m)? - expected).norm() / expected.norm();
            if rel > worst.0 {
                worst = (rel, lam);
            }
        }
        Ok(worst)
    });
    let mut report = CertificateReport {
        expected,
        max_rel_err: 0.0,
        worst_k: grid.node(0),
        worst_lambda: 0.0,
        nodes_checked: grid.len() * lambdas.len(),
    };
    for (node, r) in per_node.into_iter().enumerate() {
        let (rel, lam) = r?;
        if rel > report.max_rel_err {
            report.max_rel_err = rel;
            report.worst_k = grid.node(node);
            report.worst_lambda = lam;
        }
    }
    if report.max_rel_err > REL_TOL {
        return Err(Error::CertificateFailed {
            k: report.worst_k,
            lambda: report.worst_lambda,
            rel_err: report.max_rel_err,
        });
    }
    Ok(report)
}

/// Real-space mediated couplings `h = g^2 P^T G P` on a periodic ring of
/// `n_cells` cells per axis, where `G = (omega - H_bath)^{-1}`.
///
/// Rows and columns are indexed by `cell * rank + a`, cells flattened with
/// axis 0 fastest. The Bloch sum uses exactly the `n_cells` momenta of the ring,
/// so the result equals direct inversion of the periodic real-space bath.
pub fn mediated_couplings_realspace(
    bath: &BlochModel,
    layout: &EmitterLayout,
    n_cells: usize,
) -> Result<CMatrix> {
    layout.check_bath(bath)?;
    if n_cells == 0 {
        return Err(Error::InvalidParameter("n_cells must be >= 1".into()));
    }
    let dim = bath.dim();
    let total = n_cells.pow(dim as u32);
    let omega = layout.omega_e();
    let nb = bath.n_bands();
    let projector = layout.projector();
    let p = projector.isometry();
    let r = projector.rank();
    let multi = |mut flat: usize| -> Vec<usize> {
        (0..dim)
            .map(|_| {
                let i = flat % n_cells;
                flat /= n_cells;
                i
            })
            .collect()
    };
    let step = 2.0 * std::f64::consts::PI / n_cells as f64;

    // projected resolvent at every ring momentum
    let mut greens = Vec::with_capacity(total);
    for flat in 0..total {
        let k: Vec<f64> = multi(flat).into_iter().map(|i| i as f64 * step).collect();
        let shifted = linalg::identity(nb).mapv(|z| z * omega) - bath.evaluate(&k);
        let sigma = linalg::min_singular_value(&shifted)?;
        if sigma < 1e-12 {
            return Err(Error::ResolventSingular { k, sigma_min: sigma });
        }
        greens.push(linalg::transpose(&p).dot(&linalg::solve(&shifted, &p)?));
    }

    // G_R = (1/N) sum_k G(k) exp(i k.R) for every ring displacement R
    let norm = 1.0 / total as f64;
    let g2 = layout.g() * layout.g();
    let blocks: Vec<CMatrix> = (0..total)
        .map(|rflat| {
            let rv = multi(rflat);
            let mut acc = linalg::zeros(r, r);
            for (kflat, gk) in greens.iter().enumerate() {
                let kv = multi(kflat);
                let phase: f64 = rv.iter().zip(&kv).map(|(a, b)| (a * b) as f64).sum::<f64>() * step;
                let f = C64::from_polar(norm * g2, phase);
                acc.zip_mut_with(gk, |a, x| *a += x * f);
            }
            acc
        })
        .collect();

    let mut h = linalg::zeros(total * r, total * r);
    for n in 0..total {
        let nv = multi(n);
        for m in 0..total {
            let mv = multi(m);
            // <r_n| G |r_m> depends on r_m - r_n
            let disp: Vec<usize> = mv.iter().zip(&nv).map(|(a, b)| (a + n_cells - b) % n_cells).collect();
            let rflat = disp.iter().rev().fold(0, |acc, &i| acc * n_cells + i);
            let block = &blocks[rflat];
            for a in 0..r {
                for b in 0..r {
                    h[(n * r + a, m * r + b)] = block[(a, b)];
                }
            }
        }
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff, IM};
    use crate::models::{hatano_nelson, qwz, ssh, stacked_hn};

    fn layout(n: usize, omega: C64, g: f64) -> EmitterLayout {
        EmitterLayout::uniform(n, omega, g).unwrap()
    }

    #[test]
    fn ssh_on_resonance_is_minus_g2_inverse() {
        let bath = ssh(1.0, 1.5);
        let med = effective_bloch(&bath, &layout(2, re(0.0), 0.1)).unwrap();
        assert!(med.warnings.is_empty());
        assert_eq!(med.model.hermitian_hint(), Some(true));
        for k in [0.0, 0.4, 2.0, 3.1] {
            let inv = linalg::solve(&bath.evaluate(&[k]), &linalg::identity(2)).unwrap();
            let expected = inv.mapv(|z| z * -0.01);
            assert!(max_abs_diff(&med.model.evaluate(&[k]), &expected) < 1e-12);
        }
    }

    #[test]
    fn stacked_hn_projected_form() {
        let (bath, proj) = stacked_hn(1.0, 0.5);
        let lay = EmitterLayout::new(proj, -IM, 0.1, 0).unwrap();
        let med = effective_bloch(&bath, &lay).unwrap();
        assert_eq!(med.model.n_bands(), 1);
        for k in [0.0, 0.9, -2.2] {
            let expected = C64::from_polar(-0.01 / 0.75, -k) - IM;
            assert!((med.model.evaluate(&[k])[(0, 0)] - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn weak_coupling_limit_is_constant() {
        let med = effective_bloch(&ssh(1.0, 1.5), &layout(2, re(0.0), 1e-6)).unwrap();
        assert!(linalg::max_abs(&med.model.evaluate(&[1.0])) < 1e-10);
    }

    #[test]
    fn resonance_on_band_is_singular() {
        // ssh(1,1) is gapless at k = pi
        let err = effective_bloch(&ssh(1.0, 1.0), &layout(2, re(0.0), 0.1)).unwrap_err();
        assert!(matches!(err, Error::ResolventSingular { .. }));
    }

    #[test]
    fn strong_coupling_warns() {
        let med = effective_bloch(&ssh(1.0, 1.5), &layout(2, re(0.0), 0.4)).unwrap();
        assert_eq!(med.warnings.len(), 1);
    }

    #[test]
    fn layout_validation() {
        assert!(Projector::new(vec![false, false]).is_err());
        assert!(EmitterLayout::uniform(2, re(0.0), 0.0).is_err());
        assert!(EmitterLayout::uniform(2, re(0.0), -1.0).is_err());
        let lay = layout(1, re(0.0), 0.1);
        assert!(matches!(effective_bloch(&ssh(1.0, 1.5), &lay), Err(Error::LayoutMismatch(_))));
        let json = r#"{"pi_diagonal":[1,0],"omega_e":{"re":0,"im":-1},"g":0.1,"stripe_d":3}"#;
        let parsed: EmitterLayout = serde_json::from_str(json).unwrap();
        assert_eq!(parsed.projector().selected(), vec![0]);
        assert_eq!(parsed.stripe_d(), 3);
        assert!(serde_json::from_str::<EmitterLayout>(
            r#"{"pi_diagonal":[0,0],"omega_e":{"re":0,"im":0},"g":0.1}"#
        )
        .is_err());
        assert!(serde_json::from_str::<EmitterLayout>(
            r#"{"pi_diagonal":[1],"omega_e":{"re":0,"im":0},"g":-0.1}"#
        )
        .is_err());
    }

    #[test]
    fn full_bloch_spectrum_at_gamma() {
        let full = full_bloch(&ssh(1.0, 1.5), &layout(2, re(0.0), 0.1)).unwrap();
        let (vals, _) = linalg::eigh(&full.evaluate(&[0.0])).unwrap();
        for (a, b) in vals.iter().zip([-2.504, -0.004, 0.004, 2.504]) {
            assert!((a - b).abs() < 1e-3, "{vals:?}");
        }
        let lay = EmitterLayout::new(Projector::new(vec![true, false]).unwrap(), re(0.0), 0.1, 0).unwrap();
        assert!(matches!(full_bloch(&ssh(1.0, 1.5), &lay), Err(Error::UnsupportedLayout(_))));
    }

    #[test]
    fn certificate_ssh_and_qwz() {
        let rep = deformation_gap_certificate(
            &ssh(1.0, 1.5),
            &layout(2, re(0.0), 0.1),
            &KGrid::new(64, 1).unwrap(),
            10,
        )
        .unwrap();
        assert!((rep.expected - re(1e-4)).norm() < 1e-18);
        assert!(rep.max_rel_err < 1e-8);
        let rep = deformation_gap_certificate(
            &qwz(1.2, 1.0),
            &layout(2, re(0.0), 0.1),
            &KGrid::new(16, 2).unwrap(),
            5,
        )
        .unwrap();
        assert!(rep.max_rel_err < 1e-8);
    }

    fn periodic_ring(bath: &BlochModel, n_cells: usize) -> CMatrix {
        let t = bath.hoppings().unwrap();
        let nb = bath.n_bands();
        let mut h = linalg::zeros(n_cells * nb, n_cells * nb);
        for n in 0..n_cells {
            for term in t.terms() {
                let m = (n as i64 + term.shift[0]).rem_euclid(n_cells as i64) as usize;
                for s in 0..nb {
                    for s2 in 0..nb {
                        h[(n * nb + s, m * nb + s2)] += term.matrix[(s, s2)];
                    }
                }
            }
        }
        h
    }

    #[test]
    fn realspace_couplings_match_direct_inversion() {
        for (bath, omega) in [(ssh(1.0, 1.5), re(0.0)), (hatano_nelson(1.0, 0.5, 1.0), -IM)] {
            let n_cells = 12;
            let nb = bath.n_bands();
            let g = 0.3;
            let h = mediated_couplings_realspace(&bath, &layout(nb, omega, g), n_cells).unwrap();
            let ring = periodic_ring(&bath, n_cells);
            let dim = n_cells * nb;
            let shifted = linalg::identity(dim).mapv(|z| z * omega) - ring;
            let direct = linalg::solve(&shifted, &linalg::identity(dim)).unwrap().mapv(|z| z * g * g);
            assert!(max_abs_diff(&h, &direct) < 1e-8);
        }
    }

    #[test]
    fn hatano_nelson_mediated_hopping_is_nonreciprocal() {
        let h = mediated_couplings_realspace(&hatano_nelson(1.0, 0.5, 1.0), &layout(1, -IM, 0.5), 16)
            .unwrap();
        let forward = h[(3, 4)].norm();
        let backward = h[(4, 3)].norm();
        assert!((forward - backward).abs() > 1e-3 * forward.max(backward));
    }

    #[test]
    fn ssh_mediated_couplings_decay() {
        let h = mediated_couplings_realspace(&ssh(1.0, 1.5), &layout(2, re(0.0), 0.1), 40).unwrap();
        // largest coupling from cell 0 to either cell at distance m
        let amp = |m: usize| {
            let mut best = 0.0f64;
            for cell in [m, 40 - m] {
                for a in 0..2 {
                    for b in 0..2 {
                        best = best.max(h[(a, 2 * cell + b)].norm());
                    }
                }
            }
            best
        };
        let (a2, a6, a10) = (amp(2), amp(6), amp(10));
        assert!(a2 > a6 && a6 > a10);
        let slope1 = (a6 / a2).ln() / 4.0;
        let slope2 = (a10 / a6).ln() / 4.0;
        assert!(slope1 < -0.1 && (slope1 - slope2).abs() < 0.05, "{slope1} {slope2}");
    }
}
