//! Constructors for the photonic baths studied here.
//!
//! Every model is built from its real-space hoppings, so the Bloch form follows
//! the crate-wide Fourier convention documented in [`crate::bloch`].

use std::f64::consts::FRAC_PI_4;

use serde::{Deserialize, Serialize};

use crate::bloch::{BlochModel, HoppingTable};
use crate::error::{Error, Result};
use crate::linalg::{self, c64, re, sigma_x, sigma_y, sigma_z, CMatrix, IM};
use crate::mediator::Projector;

fn scaled(m: &CMatrix, factor: crate::linalg::C64) -> CMatrix {
    m.mapv(|z| z * factor)
}

fn ssh_table(v: f64, w: f64) -> HoppingTable {
    let mut t = HoppingTable::new(1, 2);
    t.add_element(&[0], 0, 1, re(v))
        .add_element(&[0], 1, 0, re(v))
        // w a^+_{n,2} a_{n+1,1} + h.c.
        .add_element(&[1], 1, 0, re(w))
        .add_element(&[-1], 0, 1, re(w));
    t
}

/// SSH chain with intracell hopping `v` and intercell hopping `w`.
///
/// `H(k) = [[0, v + w e^{ik}], [v + w e^{-ik}, 0]]`, chiral with `S = sigma_z`.
pub fn ssh(v: f64, w: f64) -> BlochModel {
    BlochModel::from_hoppings(format!("ssh(v={v},w={w})"), ssh_table(v, w)).with_hermitian_hint(true)
}

/// `U_theta = cos(theta) 1 + i sin(theta) sigma_x`.
pub fn theta_rotation(theta: f64) -> CMatrix {
    linalg::identity(2).mapv(|z| z * theta.cos()) + scaled(&sigma_x(), IM * theta.sin())
}

/// SSH chain rotated by `U_theta`: `H_theta(k) = U_theta^† H_SSH(k) U_theta`.
/// `theta = 0` is SSH, `theta = pi/4` a Creutz-ladder configuration.
pub fn theta_model(v: f64, w: f64, theta: f64) -> Result<BlochModel> {
    if !(v > 0.0 && w > 0.0) {
        return Err(Error::InvalidParameter(format!("theta model needs v, w > 0 (v={v}, w={w})")));
    }
    if !(0.0..=FRAC_PI_4 + 1e-15).contains(&theta) {
        return Err(Error::InvalidParameter(format!("theta = {theta} outside [0, pi/4]")));
    }
    let table = ssh_table(v, w).conjugated(&theta_rotation(theta));
    Ok(BlochModel::from_hoppings(format!("theta(v={v},w={w},theta={theta})"), table)
        .with_hermitian_hint(true))
}

/// Qi-Wu-Zhang Chern insulator
/// `J sin kx sx + J sin ky sy + J (u + cos kx + cos ky) sz`.
pub fn qwz(u: f64, j: f64) -> BlochModel {
    let mut t = HoppingTable::new(2, 2);
    let half = re(0.5 * j);
    let half_i = IM * (0.5 * j);
    t.add(&[0, 0], scaled(&sigma_z(), re(u * j)));
    t.add(&[1, 0], scaled(&sigma_x(), half_i) + scaled(&sigma_z(), half));
    t.add(&[-1, 0], scaled(&sigma_x(), -half_i) + scaled(&sigma_z(), half));
    t.add(&[0, 1], scaled(&sigma_y(), half_i) + scaled(&sigma_z(), half));
    t.add(&[0, -1], scaled(&sigma_y(), -half_i) + scaled(&sigma_z(), half));
    BlochModel::from_hoppings(format!("qwz(u={u},J={j})"), t).with_hermitian_hint(true)
}

/// Hatano-Nelson chain with `J_R = J(1+delta)`, `J_L = J(1-delta)` and uniform
/// loss `gamma`: `H(k) = J_R e^{ik} + J_L e^{-ik} - i gamma`.
pub fn hatano_nelson(j: f64, delta: f64, gamma: f64) -> BlochModel {
    let (jr, jl) = (j * (1.0 + delta), j * (1.0 - delta));
    let mut t = HoppingTable::new(1, 1);
    // J_R a^+_{n+1} a_n: <r_0| H |r_{-1}> = J_R
    t.add_element(&[-1], 0, 0, re(jr))
        .add_element(&[1], 0, 0, re(jl))
        .add_element(&[0], 0, 0, c64(0.0, -gamma));
    let hermitian = delta == 0.0 && gamma == 0.0;
    BlochModel::from_hoppings(format!("hn(J={j},delta={delta},gamma={gamma})"), t)
        .with_hermitian_hint(hermitian)
}

/// Hatano-Nelson chain with the loss fixed to `gamma = 2 delta J`.
pub fn hatano_nelson_balanced(j: f64, delta: f64) -> BlochModel {
    hatano_nelson(j, delta, 2.0 * delta * j)
}

/// Chiral non-Hermitian 2D lattice
/// `J sin kx sx + J sin ky sy + i J (2 cos kx + cos ky - 3) 1`.
pub fn chiral_nh_2d(j: f64) -> BlochModel {
    let mut t = HoppingTable::new(2, 2);
    let one = linalg::identity(2);
    let half_i = IM * (0.5 * j);
    t.add(&[0, 0], scaled(&one, IM * (-3.0 * j)));
    t.add(&[1, 0], scaled(&sigma_x(), half_i) + scaled(&one, IM * j));
    t.add(&[-1, 0], scaled(&sigma_x(), -half_i) + scaled(&one, IM * j));
    t.add(&[0, 1], scaled(&sigma_y(), half_i) + scaled(&one, half_i));
    t.add(&[0, -1], scaled(&sigma_y(), -half_i) + scaled(&one, half_i));
    BlochModel::from_hoppings(format!("chiral_nh_2d(J={j})"), t).with_hermitian_hint(j == 0.0)
}

/// Two unidirectional Hatano-Nelson chains of opposite chirality with
/// Hermitian inter-chain hopping `J`, and the projector onto the first chain.
///
/// `H(k) = [[kappa (e^{ik} - i), J], [J, kappa (e^{-ik} - i)]]`.
pub fn stacked_hn(kappa: f64, j: f64) -> (BlochModel, Projector) {
    let mut t = HoppingTable::new(1, 2);
    t.add(
        &[0],
        linalg::from_rows(&[&[c64(0.0, -kappa), re(j)], &[re(j), c64(0.0, -kappa)]]),
    );
    t.add_element(&[-1], 0, 0, re(kappa)).add_element(&[1], 1, 1, re(kappa));
    let model = BlochModel::from_hoppings(format!("stacked_hn(kappa={kappa},J={j})"), t)
        .with_hermitian_hint(kappa == 0.0);
    (model, Projector::new(vec![true, false]).expect("rank one"))
}

/// Enlarges the unit cell of a 1D model by `factor`: old cells
/// `factor*n + j` become sublattice block `j` of new cell `n`, so band
/// `j * n_bands + s` of the result refers to old cell offset `j`, sublattice `s`.
pub fn enlarge_cell(model: &BlochModel, factor: usize) -> Result<BlochModel> {
    if model.dim() != 1 {
        return Err(Error::InvalidParameter("cell enlargement is implemented for D = 1".into()));
    }
    if factor == 0 {
        return Err(Error::InvalidParameter("enlargement factor must be >= 1".into()));
    }
    if factor == 1 {
        return Ok(model.clone());
    }
    let table = crate::bloch::fourier_hoppings(model, 4)?;
    let nb = table.n_bands();
    let f = factor as i64;
    let mut out = HoppingTable::new(1, nb * factor);
    for term in table.terms() {
        let r = term.shift[0];
        for j in 0..f {
            let target = j + r;
            let j2 = target.rem_euclid(f);
            let shift = (target - j2) / f;
            let mut block = linalg::zeros(nb * factor, nb * factor);
            for s in 0..nb {
                for s2 in 0..nb {
                    block[(j as usize * nb + s, j2 as usize * nb + s2)] = term.matrix[(s, s2)];
                }
            }
            out.add(&[shift], block);
        }
    }
    let mut enlarged = BlochModel::from_hoppings(format!("{}x{factor}", model.name()), out);
    if let Some(h) = model.hermitian_hint() {
        enlarged = enlarged.with_hermitian_hint(h);
    }
    Ok(enlarged)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SshParams {
    pub v: f64,
    pub w: f64,
}

impl Default for SshParams {
    fn default() -> Self {
        SshParams { v: 1.0, w: 1.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThetaParams {
    pub v: f64,
    pub w: f64,
    pub theta: f64,
}

impl Default for ThetaParams {
    fn default() -> Self {
        ThetaParams { v: 1.0, w: 1.5, theta: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QwzParams {
    pub u: f64,
    #[serde(rename = "J")]
    pub j: f64,
}

impl Default for QwzParams {
    fn default() -> Self {
        QwzParams { u: 1.2, j: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HnParams {
    #[serde(rename = "J")]
    pub j: f64,
    pub delta: f64,
    /// Defaults to `2 delta J` when absent.
    pub gamma: Option<f64>,
}

impl Default for HnParams {
    fn default() -> Self {
        HnParams { j: 1.0, delta: 0.5, gamma: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChiralNh2dParams {
    #[serde(rename = "J")]
    pub j: f64,
}

impl Default for ChiralNh2dParams {
    fn default() -> Self {
        ChiralNh2dParams { j: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StackedHnParams {
    pub kappa: f64,
    #[serde(rename = "J")]
    pub j: f64,
}

impl Default for StackedHnParams {
    fn default() -> Self {
        StackedHnParams { kappa: 1.0, j: 0.5 }
    }
}

/// Model name plus parameters; the JSON vocabulary of the command line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", content = "params", deny_unknown_fields)]
pub enum ModelParams {
    #[serde(rename = "ssh")]
    Ssh(SshParams),
    #[serde(rename = "theta")]
    Theta(ThetaParams),
    #[serde(rename = "qwz")]
    Qwz(QwzParams),
    #[serde(rename = "hn")]
    Hn(HnParams),
    #[serde(rename = "chiral_nh_2d")]
    ChiralNh2d(ChiralNh2dParams),
    #[serde(rename = "stacked_hn")]
    StackedHn(StackedHnParams),
}

impl ModelParams {
    pub const NAMES: [&'static str; 6] = ["ssh", "theta", "qwz", "hn", "chiral_nh_2d", "stacked_hn"];

    pub fn default_for(name: &str) -> Option<ModelParams> {
        Some(match name {
            "ssh" => ModelParams::Ssh(SshParams::default()),
            "theta" => ModelParams::Theta(ThetaParams::default()),
            "qwz" => ModelParams::Qwz(QwzParams::default()),
            "hn" => ModelParams::Hn(HnParams::default()),
            "chiral_nh_2d" => ModelParams::ChiralNh2d(ChiralNh2dParams::default()),
            "stacked_hn" => ModelParams::StackedHn(StackedHnParams::default()),
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelParams::Ssh(_) => "ssh",
            ModelParams::Theta(_) => "theta",
            ModelParams::Qwz(_) => "qwz",
            ModelParams::Hn(_) => "hn",
            ModelParams::ChiralNh2d(_) => "chiral_nh_2d",
            ModelParams::StackedHn(_) => "stacked_hn",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ModelParams::Qwz(_) | ModelParams::ChiralNh2d(_) => 2,
            _ => 1,
        }
    }

    pub fn n_bands(&self) -> usize {
        match self {
            ModelParams::Hn(_) => 1,
            _ => 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |xs: &[f64]| xs.iter().all(|x| x.is_finite());
        let ok = match *self {
            ModelParams::Ssh(p) => finite(&[p.v, p.w]),
            ModelParams::Theta(p) => finite(&[p.v, p.w, p.theta]),
            ModelParams::Qwz(p) => finite(&[p.u, p.j]),
            ModelParams::Hn(p) => finite(&[p.j, p.delta, p.gamma.unwrap_or(0.0)]),
            ModelParams::ChiralNh2d(p) => finite(&[p.j]),
            ModelParams::StackedHn(p) => finite(&[p.kappa, p.j]),
        };
        if !ok {
            return Err(Error::InvalidParameter(format!("non-finite parameter for {}", self.name())));
        }
        if let ModelParams::Theta(p) = self {
            theta_model(p.v, p.w, p.theta)?;
        }
        Ok(())
    }

    pub fn build(&self) -> Result<BlochModel> {
        self.validate()?;
        Ok(match *self {
            ModelParams::Ssh(p) => ssh(p.v, p.w),
            ModelParams::Theta(p) => theta_model(p.v, p.w, p.theta)?,
            ModelParams::Qwz(p) => qwz(p.u, p.j),
            ModelParams::Hn(p) => hatano_nelson(p.j, p.delta, p.gamma.unwrap_or(2.0 * p.delta * p.j)),
            ModelParams::ChiralNh2d(p) => chiral_nh_2d(p.j),
            ModelParams::StackedHn(p) => stacked_hn(p.kappa, p.j).0,
        })
    }

    /// The emitter projector the model is studied with: one emitter per
    /// resonator, except the stacked chains where only the first chain couples.
    pub fn default_projector(&self) -> Projector {
        match self {
            ModelParams::StackedHn(_) => Projector::new(vec![true, false]).expect("rank one"),
            _ => Projector::identity(self.n_bands()),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ParamInfo {
    pub key: &'static str,
    pub default: Option<f64>,
    pub note: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelInfo {
    pub name: &'static str,
    pub dim: usize,
    pub n_bands: usize,
    pub hermitian: bool,
    pub params: Vec<ParamInfo>,
}

fn p(key: &'static str, default: Option<f64>, note: &'static str) -> ParamInfo {
    ParamInfo { key, default, note }
}

/// The model zoo with parameter schemas and defaults. Stable ordering.
pub fn catalog() -> Vec<ModelInfo> {
    vec![
        ModelInfo {
            name: "ssh",
            dim: 1,
            n_bands: 2,
            hermitian: true,
            params: vec![p("v", Some(1.0), "intracell hopping"), p("w", Some(1.5), "intercell hopping")],
        },
        ModelInfo {
            name: "theta",
            dim: 1,
            n_bands: 2,
            hermitian: true,
            params: vec![
                p("v", Some(1.0), "intracell hopping, > 0"),
                p("w", Some(1.5), "intercell hopping, > 0"),
                p("theta", Some(0.0), "rotation angle in [0, pi/4]"),
            ],
        },
        ModelInfo {
            name: "qwz",
            dim: 2,
            n_bands: 2,
            hermitian: true,
            params: vec![p("u", Some(1.2), "mass parameter"), p("J", Some(1.0), "hopping scale")],
        },
        ModelInfo {
            name: "hn",
            dim: 1,
            n_bands: 1,
            hermitian: false,
            params: vec![
                p("J", Some(1.0), "mean hopping"),
                p("delta", Some(0.5), "non-reciprocity, J_R = J(1+delta), J_L = J(1-delta)"),
                p("gamma", None, "uniform loss, defaults to 2 delta J"),
            ],
        },
        ModelInfo {
            name: "chiral_nh_2d",
            dim: 2,
            n_bands: 2,
            hermitian: false,
            params: vec![p("J", Some(1.0), "hopping scale")],
        },
        ModelInfo {
            name: "stacked_hn",
            dim: 1,
            n_bands: 2,
            hermitian: false,
            params: vec![
                p("kappa", Some(1.0), "unidirectional hopping and background loss"),
                p("J", Some(0.5), "inter-chain hopping, J < kappa for a gap at -i kappa"),
            ],
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bloch::KGrid;
    use crate::linalg::{max_abs_diff, C64};
    use std::f64::consts::PI;

    fn close(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
        max_abs_diff(a, b) < tol
    }

    #[test]
    fn ssh_at_zero_and_pi() {
        let m = ssh(1.0, 1.5);
        assert!(close(&m.evaluate(&[0.0]), &scaled(&sigma_x(), re(2.5)), 1e-14));
        assert!(close(&m.evaluate(&[PI]), &scaled(&sigma_x(), re(-0.5)), 1e-14));
        assert!(close(&ssh(1.0, 0.0).evaluate(&[1.3]), &sigma_x(), 1e-14));
    }

    #[test]
    fn ssh_offdiagonal_matches_convention() {
        let k = 0.7;
        let h = ssh(1.0, 1.5).evaluate(&[k]);
        let expected = re(1.0) + C64::from_polar(1.5, k);
        assert!((h[(0, 1)] - expected).norm() < 1e-14);
        assert!((h[(1, 0)] - expected.conj()).norm() < 1e-14);
    }

    #[test]
    fn theta_model_reduces_to_ssh_and_rotates() {
        let k = [0.913];
        let t0 = theta_model(1.0, 1.5, 0.0).unwrap();
        assert!(close(&t0.evaluate(&k), &ssh(1.0, 1.5).evaluate(&k), 1e-14));

        let theta = PI / 8.0;
        let u = theta_rotation(theta);
        let rotated = linalg::dagger(&u).dot(&ssh(1.0, 1.5).evaluate(&k)).dot(&u);
        assert!(close(&theta_model(1.0, 1.5, theta).unwrap().evaluate(&k), &rotated, 1e-12));
    }

    #[test]
    fn theta_model_pi_over_4_has_no_sigma_y() {
        let h = theta_model(1.0, 1.5, PI / 4.0).unwrap().evaluate(&[0.4]);
        let y_coeff = linalg::inner(&sigma_y(), &h) / 2.0;
        assert!(y_coeff.norm() < 1e-14);
        let z_coeff = linalg::inner(&sigma_z(), &h) / 2.0;
        assert!(z_coeff.norm() > 0.1);
    }

    #[test]
    fn theta_model_rejects_bad_parameters() {
        assert!(theta_model(1.0, 1.5, 1.0).is_err());
        assert!(theta_model(-1.0, 1.5, 0.1).is_err());
    }

    #[test]
    fn qwz_at_gamma() {
        let h = qwz(1.2, 1.0).evaluate(&[0.0, 0.0]);
        assert!(close(&h, &scaled(&sigma_z(), re(3.2)), 1e-14));
    }

    #[test]
    fn qwz_matches_closed_form() {
        let (u, j) = (1.2, 0.8);
        let (kx, ky) = (0.3f64, -1.1f64);
        let expected = scaled(&sigma_x(), re(j * kx.sin()))
            + scaled(&sigma_y(), re(j * ky.sin()))
            + scaled(&sigma_z(), re(j * (u + kx.cos() + ky.cos())));
        assert!(close(&qwz(u, j).evaluate(&[kx, ky]), &expected, 1e-14));
    }

    #[test]
    fn hatano_nelson_values() {
        let h = hatano_nelson(1.0, 0.5, 1.0).evaluate(&[PI / 2.0]);
        assert!(h[(0, 0)].norm() < 1e-14);
        let cosine = hatano_nelson(1.0, 0.0, 0.0);
        assert_eq!(cosine.hermitian_hint(), Some(true));
        assert!((cosine.evaluate(&[0.4])[(0, 0)] - re(2.0 * 0.4f64.cos())).norm() < 1e-14);
        let balanced = hatano_nelson_balanced(1.0, 0.5).evaluate(&[0.0]);
        assert!((balanced[(0, 0)] - c64(2.0, -1.0)).norm() < 1e-14);
    }

    #[test]
    fn chiral_nh_2d_dirac_point_and_constraint() {
        let m = chiral_nh_2d(1.0);
        assert!(linalg::max_abs(&m.evaluate(&[0.0, 0.0])) < 1e-14);
        let h = m.evaluate(&[0.37, 2.1]);
        let s = sigma_z();
        let lhs = s.dot(&linalg::dagger(&h)).dot(&s);
        assert!(close(&lhs, &h.mapv(|z| -z), 1e-14));
    }

    #[test]
    fn stacked_hn_form() {
        let (m, proj) = stacked_hn(1.0, 0.5);
        assert_eq!(proj.selected(), vec![0]);
        let k = 0.6;
        let h = m.evaluate(&[k]);
        assert!((h[(0, 0)] - (C64::from_polar(1.0, k) - IM)).norm() < 1e-14);
        assert!((h[(1, 1)] - (C64::from_polar(1.0, -k) - IM)).norm() < 1e-14);
        assert!((h[(0, 1)] - re(0.5)).norm() < 1e-14);
    }

    #[test]
    fn enlarge_cell_folds_spectrum() {
        let m = ssh(1.0, 1.5);
        assert!(close(&enlarge_cell(&m, 1).unwrap().evaluate(&[0.3]), &m.evaluate(&[0.3]), 0.0 + 1e-15));
        let big = enlarge_cell(&m, 2).unwrap();
        assert_eq!(big.n_bands(), 4);
        let mut vals: Vec<f64> =
            linalg::eigh(&big.evaluate(&[0.0])).unwrap().0;
        vals.sort_by(f64::total_cmp);
        let expected = [-2.5, -0.5, 0.5, 2.5];
        for (a, b) in vals.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12, "{vals:?}");
        }
    }

    #[test]
    fn every_zoo_model_is_periodic() {
        let grid = KGrid::new(8, 1).unwrap();
        for name in ModelParams::NAMES {
            let m = ModelParams::default_for(name).unwrap().build().unwrap();
            for k0 in grid.nodes() {
                let k: Vec<f64> = (0..m.dim()).map(|j| k0[0] + 0.1 * j as f64 + 0.05).collect();
                for axis in 0..m.dim() {
                    let mut shifted = k.clone();
                    shifted[axis] += 2.0 * PI;
                    assert!(close(&m.evaluate(&k), &m.evaluate(&shifted), 1e-12), "{name}");
                }
            }
        }
    }

    #[test]
    fn params_json_roundtrip_and_rejection() {
        let p: ModelParams = serde_json::from_str(r#"{"name":"qwz","params":{"u":1.2,"J":1.0}}"#).unwrap();
        assert_eq!(p, ModelParams::Qwz(QwzParams { u: 1.2, j: 1.0 }));
        assert!(serde_json::from_str::<ModelParams>(r#"{"name":"qwz","params":{"x":1}}"#).is_err());
        assert!(serde_json::from_str::<ModelParams>(r#"{"name":"","params":{}}"#).is_err());
    }

    #[test]
    fn catalog_defaults() {
        let cat = catalog();
        let qwz = cat.iter().find(|m| m.name == "qwz").unwrap();
        assert_eq!(qwz.params.iter().find(|p| p.key == "u").unwrap().default, Some(1.2));
        let st = cat.iter().find(|m| m.name == "stacked_hn").unwrap();
        assert_eq!(st.params.iter().find(|p| p.key == "J").unwrap().default, Some(0.5));
        let names: Vec<_> = cat.iter().map(|m| m.name).collect();
        assert_eq!(names, ModelParams::NAMES);
    }
}
