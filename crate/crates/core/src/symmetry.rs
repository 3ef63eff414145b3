//! Time-reversal, particle-hole and chiral symmetries, and the five
//! number-conserving Altland-Zirnbauer classes reachable here.
//!
//! Constraints checked at every grid node (`H = H(k)`, `H' = H(-k)`):
//!
//! | variant | TRS                 | PHS                  | chiral            |
//! |---------|---------------------|----------------------|-------------------|
//! | Herm    | `U H* U^† = H'`     | `U H* U^† = -H'`     | `S H S^† = -H`    |
//! | NH-AZ   | `U H* U^† = H'`     | `U H^T U^† = -H'`    | `S H^† S^† = -H`  |
//! | NH-AZ†  | `U H^T U^† = H'`    | `U H* U^† = -H'`     | `S H^† S^† = -H`  |

use std::collections::BTreeSet;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bloch::{BlochModel, KGrid};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, C64, Pauli};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    Trs,
    Phs,
    Chiral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Herm,
    NhAz,
    NhAzDag,
}

impl Variant {
    pub fn is_hermitian(self) -> bool {
        self == Variant::Herm
    }
}

/// A symmetry operator. Its unitary part is verified on construction.
#[derive(Debug, Clone)]
pub struct SymmetryOp {
    unitary: CMatrix,
    flavor: Flavor,
    variant: Variant,
    square_sign: Option<i8>,
    label: String,
}

const UNITARY_TOL: f64 = 1e-10;

impl SymmetryOp {
    /// Fails with [`Error::NonUnitary`] unless `unitary^† unitary = 1` to `1e-10`,
    /// and, for TRS and PHS, unless `U U* = +-1`.
    pub fn new(unitary: CMatrix, flavor: Flavor, variant: Variant) -> Result<Self> {
        let residual = linalg::unitarity_residual(&unitary);
        if residual > UNITARY_TOL {
            return Err(Error::NonUnitary { residual });
        }
        let square_sign = match flavor {
            Flavor::Chiral => None,
            Flavor::Trs | Flavor::Phs => {
                let sq = unitary.dot(&linalg::conj(&unitary));
                let n = unitary.nrows();
                let plus = linalg::max_abs_diff(&sq, &linalg::identity(n));
                let minus = linalg::max_abs_diff(&sq, &linalg::identity(n).mapv(|z| -z));
                if plus <= UNITARY_TOL {
                    Some(1)
                } else if minus <= UNITARY_TOL {
                    Some(-1)
                } else {
                    return Err(Error::InvalidParameter(format!(
                        "antiunitary operator squares to neither +1 nor -1 (residuals {plus:e}, {minus:e})"
                    )));
                }
            }
        };
        Ok(SymmetryOp { unitary, flavor, variant, square_sign, label: "custom".into() })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn unitary(&self) -> &CMatrix {
        &self.unitary
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    /// `+1` or `-1` for TRS and PHS, `None` for chiral operators.
    pub fn square_sign(&self) -> Option<i8> {
        self.square_sign
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.unitary.nrows()
    }

    /// Constraint residual for `h = H(k)` and `h_minus = H(-k)`.
    pub fn residual_at(&self, h: &CMatrix, h_minus: &CMatrix) -> f64 {
        let u = &self.unitary;
        let ud = linalg::dagger(u);
        let act = |m: CMatrix| u.dot(&m).dot(&ud);
        use Flavor::*;
        use Variant::*;
        match (self.flavor, self.variant) {
            (Trs, Herm) | (Trs, NhAz) => linalg::max_abs_diff(&act(linalg::conj(h)), h_minus),
            (Trs, NhAzDag) => linalg::max_abs_diff(&act(linalg::transpose(h)), h_minus),
            (Phs, Herm) | (Phs, NhAzDag) => linalg::max_abs_diff(&act(linalg::conj(h)), &h_minus.mapv(|z| -z)),
            (Phs, NhAz) => linalg::max_abs_diff(&act(linalg::transpose(h)), &h_minus.mapv(|z| -z)),
            (Chiral, Herm) => linalg::max_abs_diff(&act(h.clone()), &h.mapv(|z| -z)),
            (Chiral, NhAz) | (Chiral, NhAzDag) => {
                linalg::max_abs_diff(&act(linalg::dagger(h)), &h.mapv(|z| -z))
            }
        }
    }
}

/// Largest constraint residual over the grid.
pub fn symmetry_residual(model: &BlochModel, op: &SymmetryOp, grid: &KGrid) -> Result<f64> {
    if op.dim() != model.n_bands() {
        return Err(Error::DimensionMismatch { expected: model.n_bands(), got: op.dim() });
    }
    crate::bloch::check_grid(model, grid)?;
    Ok(grid
        .par_map(|k| {
            let minus: Vec<f64> = k.iter().map(|x| -x).collect();
            op.residual_at(&model.evaluate(k), &model.evaluate(&minus))
        })
        .into_iter()
        .fold(0.0, f64::max))
}

/// Whether the constraint of `op` holds at every grid node within `tol`.
/// A dimension mismatch between operator and model counts as a failure.
pub fn check_symmetry(model: &BlochModel, op: &SymmetryOp, grid: &KGrid, tol: f64) -> bool {
    symmetry_residual(model, op, grid).is_ok_and(|r| r <= tol)
}

/// The Altland-Zirnbauer rows covered by the classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AzClass {
    A,
    AIII,
    AI,
    BDI,
    D,
}

impl AzClass {
    /// `trs`/`phs` carry the square sign of the operator when present.
    pub fn from_symmetries(trs: Option<i8>, phs: Option<i8>, chiral: bool) -> Result<AzClass> {
        match (trs, phs, chiral) {
            (None, None, false) => Ok(AzClass::A),
            (None, None, true) => Ok(AzClass::AIII),
            (Some(1), None, false) => Ok(AzClass::AI),
            (Some(1), Some(1), true) => Ok(AzClass::BDI),
            (None, Some(1), false) => Ok(AzClass::D),
            _ => Err(Error::UnsupportedClass(format!("T = {trs:?}, C = {phs:?}, S = {chiral}"))),
        }
    }

    pub fn symmetries(self) -> (Option<i8>, Option<i8>, bool) {
        match self {
            AzClass::A => (None, None, false),
            AzClass::AIII => (None, None, true),
            AzClass::AI => (Some(1), None, false),
            AzClass::BDI => (Some(1), Some(1), true),
            AzClass::D => (None, Some(1), false),
        }
    }

    fn base_name(self) -> &'static str {
        match self {
            AzClass::A => "A",
            AzClass::AIII => "AIII",
            AzClass::AI => "AI",
            AzClass::BDI => "BDI",
            AzClass::D => "D",
        }
    }
}

/// A verified symmetry supporting a classification.
#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    pub flavor: Flavor,
    pub label: String,
    pub square_sign: Option<i8>,
    pub residual: f64,
    /// Built as a product of two other witnesses rather than supplied.
    pub derived: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassLabel {
    /// `A`, `AIII`, `AI`, `BDI`, `D`; AZ† classes carrying TRS or PHS get a `†` suffix.
    pub name: String,
    pub class: AzClass,
    pub variant: Variant,
    pub present_symmetries: BTreeSet<Flavor>,
    pub witnesses: Vec<Witness>,
}

impl ClassLabel {
    pub fn new(class: AzClass, variant: Variant) -> Self {
        let (t, c, s) = class.symmetries();
        let mut present = BTreeSet::new();
        if t.is_some() {
            present.insert(Flavor::Trs);
        }
        if c.is_some() {
            present.insert(Flavor::Phs);
        }
        if s {
            present.insert(Flavor::Chiral);
        }
        let dagger = variant == Variant::NhAzDag && (t.is_some() || c.is_some());
        let name = format!("{}{}", class.base_name(), if dagger { "†" } else { "" });
        ClassLabel { name, class, variant, present_symmetries: present, witnesses: Vec::new() }
    }

    pub fn same_class(&self, other: &ClassLabel) -> bool {
        self.class == other.class && self.variant == other.variant
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// Where [`classify`] takes its symmetry candidates from.
#[derive(Debug, Clone)]
pub enum Candidates {
    Explicit(Vec<SymmetryOp>),
    /// Every Pauli string as TRS, PHS and chiral unitary; `N_b` in {1, 2, 4}.
    PauliSearch,
}

/// Pauli strings of the right size, `N_b` in {1, 2, 4}. Global phases are
/// omitted because every constraint is invariant under `U -> e^{i phi} U`.
pub fn pauli_strings(n_bands: usize) -> Result<Vec<(String, CMatrix)>> {
    match n_bands {
        1 => Ok(vec![("1".into(), linalg::identity(1))]),
        2 => Ok(Pauli::ALL.iter().map(|p| (p.label().to_string(), p.matrix())).collect()),
        4 => Ok(Pauli::ALL
            .iter()
            .flat_map(|a| {
                Pauli::ALL
                    .iter()
                    .map(move |b| (format!("{}{}", a.label(), b.label()), linalg::kron(&a.matrix(), &b.matrix())))
            })
            .collect()),
        n => Err(Error::InvalidParameter(format!("Pauli search supports N_b in {{1, 2, 4}}, got {n}"))),
    }
}

fn pauli_candidates(n_bands: usize, variant: Variant) -> Result<Vec<SymmetryOp>> {
    let mut out = Vec::new();
    for (label, u) in pauli_strings(n_bands)? {
        for flavor in [Flavor::Trs, Flavor::Phs, Flavor::Chiral] {
            out.push(SymmetryOp::new(u.clone(), flavor, variant)?.with_label(label.clone()));
        }
    }
    Ok(out)
}

/// Products of two operators under every combination of conjugation,
/// transposition and adjoint; used to recover a symmetry implied by two others.
fn derived_unitaries(a: &SymmetryOp, b: &SymmetryOp) -> Vec<(String, CMatrix)> {
    let forms = |op: &SymmetryOp| {
        let u = op.unitary().clone();
        vec![
            (op.label().to_string(), u.clone()),
            (format!("{}*", op.label()), linalg::conj(&u)),
            (format!("{}^T", op.label()), linalg::transpose(&u)),
            (format!("{}^†", op.label()), linalg::dagger(&u)),
        ]
    };
    let mut out = Vec::new();
    for (la, ua) in forms(a) {
        for (lb, ub) in forms(b) {
            out.push((format!("{la}·{lb}"), ua.dot(&ub)));
        }
    }
    out
}

/// Classification from verified symmetries.
///
/// Candidates whose constraint holds within `tol` on `grid` count as present.
/// When two of TRS, PHS and chiral are present, the third is sought among
/// their products and must verify; otherwise the class is ambiguous.
pub fn classify(
    model: &BlochModel,
    variant: Variant,
    candidates: &Candidates,
    grid: &KGrid,
    tol: f64,
) -> Result<ClassLabel> {
    crate::bloch::check_grid(model, grid)?;
    if variant.is_hermitian() {
        let residual = model.hermiticity_residual(grid);
        if residual > tol {
            return Err(Error::NonHermitianInput { residual });
        }
    }
    let ops = match candidates {
        Candidates::PauliSearch => pauli_candidates(model.n_bands(), variant)?,
        Candidates::Explicit(ops) => {
            if let Some(op) = ops.iter().find(|op| op.variant() != variant) {
                return Err(Error::InvalidParameter(format!(
                    "candidate {} has variant {:?}, expected {variant:?}",
                    op.label(),
                    op.variant()
                )));
            }
            ops.clone()
        }
    };
    let residuals: Vec<Result<f64>> = ops.par_iter().map(|op| symmetry_residual(model, op, grid)).collect();
    let mut holding: Vec<(SymmetryOp, f64)> = Vec::new();
    for (op, r) in ops.into_iter().zip(residuals) {
        let r = r?;
        if r <= tol {
            holding.push((op, r));
        }
    }

    let sign_of = |flavor: Flavor, holding: &[(SymmetryOp, f64)]| -> Result<Option<i8>> {
        let signs: BTreeSet<i8> =
            holding.iter().filter(|(op, _)| op.flavor() == flavor).filter_map(|(op, _)| op.square_sign()).collect();
        match signs.len() {
            0 => Ok(None),
            1 => Ok(signs.into_iter().next()),
            _ => Err(Error::AmbiguousClass(format!("{flavor:?} operators square to both +1 and -1"))),
        }
    };
    let first = |flavor: Flavor, holding: &[(SymmetryOp, f64)]| {
        holding.iter().find(|(op, _)| op.flavor() == flavor).map(|(op, _)| op.clone())
    };

    let mut witnesses: Vec<Witness> = holding
        .iter()
        .map(|(op, r)| Witness {
            flavor: op.flavor(),
            label: op.label().to_string(),
            square_sign: op.square_sign(),
            residual: *r,
            derived: false,
        })
        .collect();

    let mut trs = sign_of(Flavor::Trs, &holding)?;
    let mut phs = sign_of(Flavor::Phs, &holding)?;
    let mut chiral = first(Flavor::Chiral, &holding).is_some();

    let present = [trs.is_some(), phs.is_some(), chiral].iter().filter(|&&b| b).count();
    if present == 2 {
        let (missing, a, b) = match (trs.is_some(), phs.is_some()) {
            (true, true) => (Flavor::Chiral, Flavor::Trs, Flavor::Phs),
            (true, false) => (Flavor::Phs, Flavor::Trs, Flavor::Chiral),
            _ => (Flavor::Trs, Flavor::Phs, Flavor::Chiral),
        };
        let (opa, opb) = (first(a, &holding).expect("present"), first(b, &holding).expect("present"));
        let mut found: Option<(SymmetryOp, f64)> = None;
        for (label, u) in derived_unitaries(&opa, &opb) {
            let Ok(op) = SymmetryOp::new(u, missing, variant) else { continue };
            let r = symmetry_residual(model, &op, grid)?;
            if r <= tol {
                found = Some((op.with_label(label), r));
                break;
            }
        }
        let Some((op, r)) = found else {
            return Err(Error::AmbiguousClass(format!(
                "{a:?} and {b:?} hold but no product of them verifies as {missing:?}"
            )));
        };
        match missing {
            Flavor::Chiral => chiral = true,
            Flavor::Phs => phs = op.square_sign(),
            Flavor::Trs => trs = op.square_sign(),
        }
        witnesses.push(Witness {
            flavor: missing,
            label: op.label().to_string(),
            square_sign: op.square_sign(),
            residual: r,
            derived: true,
        });
    }

    let class = AzClass::from_symmetries(trs, phs, chiral)?;
    let mut label = ClassLabel::new(class, variant);
    label.witnesses = witnesses;
    Ok(label)
}

/// Tolerance of the resonance tests in [`predict_inherited_class`].
pub const RESONANCE_TOL: f64 = 1e-10;

/// Symmetry class of `omega + g^2 (omega - H_p)^{-1}` given the class of `H_p`.
///
/// TRS survives for real `omega` (always, in the AZ† sense); PHS needs
/// `omega = 0` (`Re omega = 0` in the AZ† sense); chiral symmetry needs
/// `omega = 0` for Hermitian baths and `Re omega = 0` for non-Hermitian ones.
pub fn predict_inherited_class(bath: &ClassLabel, omega: C64) -> ClassLabel {
    let zero = omega.norm() <= RESONANCE_TOL;
    let real = omega.im.abs() <= RESONANCE_TOL;
    let imaginary = omega.re.abs() <= RESONANCE_TOL;
    let (keep_t, keep_c, keep_s) = match bath.variant {
        Variant::Herm => (real, zero, zero),
        Variant::NhAz => (real, zero, imaginary),
        Variant::NhAzDag => (true, imaginary, imaginary),
    };
    let (t, c, s) = bath.class.symmetries();
    let class = AzClass::from_symmetries(
        t.filter(|_| keep_t),
        c.filter(|_| keep_c),
        s && keep_s,
    )
    .expect("every subset produced by the inheritance rules is a supported class");
    ClassLabel::new(class, bath.variant)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{re, sigma_x, sigma_y, sigma_z, IM};
    use crate::models::{chiral_nh_2d, hatano_nelson, qwz, ssh, stacked_hn, theta_model};
    use std::f64::consts::PI;

    fn g1() -> KGrid {
        KGrid::new(32, 1).unwrap()
    }

    fn g2() -> KGrid {
        KGrid::new(12, 2).unwrap()
    }

    fn op(u: CMatrix, f: Flavor, v: Variant) -> SymmetryOp {
        SymmetryOp::new(u, f, v).unwrap()
    }

    #[test]
    fn ssh_chiral_and_bdi() {
        let m = ssh(1.0, 1.5);
        assert!(check_symmetry(&m, &op(sigma_z(), Flavor::Chiral, Variant::Herm), &g1(), 1e-10));
        let label = classify(&m, Variant::Herm, &Candidates::PauliSearch, &g1(), 1e-10).unwrap();
        assert_eq!(label.name, "BDI");
    }

    #[test]
    fn qwz_has_no_chiral_sigma_z() {
        let m = qwz(1.2, 1.0);
        assert!(!check_symmetry(&m, &op(sigma_z(), Flavor::Chiral, Variant::Herm), &g2(), 1e-10));
        let label = classify(&m, Variant::Herm, &Candidates::PauliSearch, &g2(), 1e-10).unwrap();
        // sigma_x K acts as a particle-hole symmetry of this model
        assert_eq!(label.name, "D");
        let standard = Candidates::Explicit(vec![
            op(linalg::identity(2), Flavor::Trs, Variant::Herm),
            op(sigma_z(), Flavor::Chiral, Variant::Herm),
        ]);
        assert_eq!(classify(&m, Variant::Herm, &standard, &g2(), 1e-10).unwrap().name, "A");
    }

    #[test]
    fn theta_model_is_bdi_with_rotated_operators() {
        let theta = PI / 8.0;
        let m = theta_model(1.0, 1.5, theta).unwrap();
        let u_trs = linalg::identity(2).mapv(|z| z * (2.0 * theta).cos()) - sigma_x().mapv(|z| z * IM * (2.0 * theta).sin());
        let t = op(u_trs, Flavor::Trs, Variant::Herm);
        let c = op(sigma_z(), Flavor::Phs, Variant::Herm);
        assert!(check_symmetry(&m, &t, &g1(), 1e-10));
        assert!(check_symmetry(&m, &c, &g1(), 1e-10));
        let label = classify(&m, Variant::Herm, &Candidates::Explicit(vec![t, c]), &g1(), 1e-10).unwrap();
        assert_eq!(label.name, "BDI");
        assert!(label.witnesses.iter().any(|w| w.derived && w.flavor == Flavor::Chiral));
    }

    #[test]
    fn non_hermitian_classes() {
        let hn = hatano_nelson(1.0, 0.5, 1.0);
        assert_eq!(classify(&hn, Variant::NhAz, &Candidates::PauliSearch, &g1(), 1e-10).unwrap().name, "A");
        let c2 = chiral_nh_2d(1.0);
        assert_eq!(classify(&c2, Variant::NhAz, &Candidates::PauliSearch, &g2(), 1e-10).unwrap().name, "AIII");
        assert!(matches!(
            classify(&c2, Variant::NhAzDag, &Candidates::PauliSearch, &g2(), 1e-10),
            Err(Error::UnsupportedClass(_))
        ));
        let (st, _) = stacked_hn(1.0, 0.5);
        assert_eq!(classify(&st, Variant::NhAz, &Candidates::PauliSearch, &g1(), 1e-10).unwrap().name, "A");
        assert_eq!(classify(&st, Variant::NhAzDag, &Candidates::PauliSearch, &g1(), 1e-10).unwrap().name, "AI†");
    }

    #[test]
    fn hermitian_variant_rejects_non_hermitian_models() {
        let hn = hatano_nelson(1.0, 0.5, 1.0);
        assert!(matches!(
            classify(&hn, Variant::Herm, &Candidates::PauliSearch, &g1(), 1e-10),
            Err(Error::NonHermitianInput { .. })
        ));
    }

    #[test]
    fn contradictory_square_signs_are_ambiguous() {
        // a scalar zero Hamiltonian respects T = K and T = i sigma_y K alike
        let m = BlochModel::new("zero", 1, 2, |_| linalg::zeros(2, 2)).with_hermitian_hint(true);
        let cands = Candidates::Explicit(vec![
            op(linalg::identity(2), Flavor::Trs, Variant::Herm),
            op(sigma_y().mapv(|z| z * IM), Flavor::Trs, Variant::Herm),
        ]);
        assert!(matches!(classify(&m, Variant::Herm, &cands, &g1(), 1e-10), Err(Error::AmbiguousClass(_))));
    }

    #[test]
    fn non_unitary_and_bad_square_rejected() {
        let m = linalg::diag(&[re(1.0), re(2.0)]);
        assert!(matches!(SymmetryOp::new(m, Flavor::Chiral, Variant::Herm), Err(Error::NonUnitary { .. })));
        // unitary, but U U* = diag(-i, i)
        let twisted = linalg::from_rows(&[&[re(0.0), re(1.0)], &[IM, re(0.0)]]);
        assert!(SymmetryOp::new(twisted.clone(), Flavor::Trs, Variant::Herm).is_err());
        assert!(SymmetryOp::new(twisted, Flavor::Chiral, Variant::Herm).is_ok());
        let t = SymmetryOp::new(sigma_y(), Flavor::Trs, Variant::Herm).unwrap();
        assert_eq!(t.square_sign(), Some(-1));
    }

    #[test]
    fn pauli_search_size_guard() {
        let m = BlochModel::new("three", 1, 3, |_| linalg::zeros(3, 3)).with_hermitian_hint(true);
        assert!(classify(&m, Variant::Herm, &Candidates::PauliSearch, &g1(), 1e-10).is_err());
        assert_eq!(pauli_strings(4).unwrap().len(), 16);
    }

    #[test]
    fn inheritance_rules() {
        let bdi = ClassLabel::new(AzClass::BDI, Variant::Herm);
        assert_eq!(predict_inherited_class(&bdi, re(0.0)).name, "BDI");
        assert_eq!(predict_inherited_class(&bdi, re(0.3)).name, "AI");
        let a = ClassLabel::new(AzClass::A, Variant::Herm);
        assert_eq!(predict_inherited_class(&a, re(0.7)).name, "A");
        let aiii = ClassLabel::new(AzClass::AIII, Variant::NhAz);
        assert_eq!(predict_inherited_class(&aiii, -IM).name, "AIII");
        assert_eq!(predict_inherited_class(&aiii, crate::linalg::c64(0.2, -1.0)).name, "A");
        let d = ClassLabel::new(AzClass::D, Variant::Herm);
        assert_eq!(predict_inherited_class(&d, re(0.1)).name, "A");
        let bdi_dag = ClassLabel::new(AzClass::BDI, Variant::NhAzDag);
        assert_eq!(predict_inherited_class(&bdi_dag, -IM).name, "BDI†");
        assert_eq!(predict_inherited_class(&bdi_dag, re(0.5)).name, "AI†");
    }

    #[test]
    fn grid_refinement_does_not_change_checks() {
        let ops = [
            op(sigma_z(), Flavor::Chiral, Variant::Herm),
            op(sigma_x(), Flavor::Phs, Variant::Herm),
            op(linalg::identity(2), Flavor::Trs, Variant::Herm),
        ];
        for m in [ssh(1.0, 1.5), theta_model(1.0, 1.5, 0.3).unwrap()] {
            for o in &ops {
                let coarse = check_symmetry(&m, o, &g1(), 1e-10);
                let fine = check_symmetry(&m, o, &g1().refined(), 1e-10);
                assert_eq!(coarse, fine);
            }
        }
    }
}
