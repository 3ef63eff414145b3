//! Small dense complex linear-algebra helpers on top of LAPACK.

use ndarray::{s, Array1, Array2, ShapeBuilder};
use ndarray_linalg::{Determinant, Eig, Eigh, Factorize, Solve, SVD, UPLO};
pub use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub type CMatrix = Array2<C64>;

pub const IM: C64 = C64 { re: 0.0, im: 1.0 };

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn identity(n: usize) -> CMatrix {
    Array2::eye(n)
}

pub fn zeros(n: usize, m: usize) -> CMatrix {
    Array2::zeros((n, m))
}

pub fn from_rows(rows: &[&[C64]]) -> CMatrix {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    Array2::from_shape_fn((n, m), |(i, j)| rows[i][j])
}

pub fn diag(values: &[C64]) -> CMatrix {
    let mut out = zeros(values.len(), values.len());
    for (i, v) in values.iter().enumerate() {
        out[(i, i)] = *v;
    }
    out
}

/// The four Pauli matrices, `Pauli::I` being the 2x2 identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn matrix(self) -> CMatrix {
        let (o, l) = (re(0.0), re(1.0));
        match self {
            Pauli::I => from_rows(&[&[l, o], &[o, l]]),
            Pauli::X => from_rows(&[&[o, l], &[l, o]]),
            Pauli::Y => from_rows(&[&[o, -IM], &[IM, o]]),
            Pauli::Z => from_rows(&[&[l, o], &[o, -l]]),
        }
    }

    pub fn label(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

pub fn sigma_x() -> CMatrix {
    Pauli::X.matrix()
}

pub fn sigma_y() -> CMatrix {
    Pauli::Y.matrix()
}

pub fn sigma_z() -> CMatrix {
    Pauli::Z.matrix()
}

/// Conjugate transpose.
pub fn dagger(m: &CMatrix) -> CMatrix {
    m.t().mapv(|z| z.conj())
}

pub fn conj(m: &CMatrix) -> CMatrix {
    m.mapv(|z| z.conj())
}

pub fn transpose(m: &CMatrix) -> CMatrix {
    m.t().to_owned()
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[(i, j)];
            out.slice_mut(s![i * br..(i + 1) * br, j * bc..(j + 1) * bc])
                .assign(&b.mapv(|z| z * aij));
        }
    }
    out
}

/// Assembles `[[a, b], [c, d]]` from four blocks.
pub fn block2(a: &CMatrix, b: &CMatrix, c: &CMatrix, d: &CMatrix) -> CMatrix {
    let (n, m) = a.dim();
    let (n2, m2) = d.dim();
    let mut out = zeros(n + n2, m + m2);
    out.slice_mut(s![..n, ..m]).assign(a);
    out.slice_mut(s![..n, m..]).assign(b);
    out.slice_mut(s![n.., ..m]).assign(c);
    out.slice_mut(s![n.., m..]).assign(d);
    out
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn hermiticity_residual(m: &CMatrix) -> f64 {
    max_abs_diff(m, &dagger(m))
}

pub fn unitarity_residual(m: &CMatrix) -> f64 {
    let n = m.nrows();
    if m.ncols() != n {
        return f64::INFINITY;
    }
    max_abs_diff(&dagger(m).dot(m), &identity(n))
}

/// Contiguous row-major copy; LAPACK wrappers reject views with degenerate strides.
fn contiguous(m: &CMatrix) -> CMatrix {
    Array2::from_shape_vec(m.dim(), m.iter().cloned().collect()).expect("shape matches element count")
}

/// Hermitian eigendecomposition with ascending eigenvalues; eigenvectors are columns.
pub fn eigh(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    // symmetrize so round-off in the input cannot leak into LAPACK's triangle choice
    let sym = (m + &dagger(m)).mapv(|z| z * 0.5);
    // row-major input comes back with conjugated eigenvectors; hand LAPACK column-major storage
    let mut fortran = Array2::zeros(sym.raw_dim().f());
    fortran.assign(&sym);
    let (vals, vecs) = fortran.eigh(UPLO::Upper)?;
    Ok((vals.to_vec(), vecs))
}

/// General eigendecomposition, sorted by real part then imaginary part.
/// Right eigenvectors are returned as unit-norm columns.
pub fn eig(m: &CMatrix) -> Result<(Vec<C64>, CMatrix)> {
    let (vals, vecs) = contiguous(m).eig()?;
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&a, &b| {
        let (x, y) = (vals[a], vals[b]);
        x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im))
    });
    let n = m.nrows();
    let mut sorted = zeros(n, n);
    let mut out_vals = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        out_vals.push(vals[src]);
        let col = vecs.column(src);
        let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        sorted.column_mut(dst).assign(&col.mapv(|z| z / norm));
    }
    Ok((out_vals, sorted))
}

/// Eigenvalues only, same ordering as [`eig`].
pub fn eigvals(m: &CMatrix) -> Result<Vec<C64>> {
    Ok(eig(m)?.0)
}

/// Solves `a x = b` for every column of `b` with a single LU factorization.
pub fn solve(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    let lu = contiguous(a).factorize()?;
    let mut out = zeros(b.nrows(), b.ncols());
    for j in 0..b.ncols() {
        let col: Array1<C64> = b.column(j).to_owned();
        let x = lu.solve(&col)?;
        out.column_mut(j).assign(&x);
    }
    Ok(out)
}

pub fn det(m: &CMatrix) -> Result<C64> {
    Ok(contiguous(m).det()?)
}

pub fn singular_values(m: &CMatrix) -> Result<Vec<f64>> {
    let (_, s, _) = contiguous(m).svd(false, false)?;
    Ok(s.to_vec())
}

pub fn min_singular_value(m: &CMatrix) -> Result<f64> {
    Ok(singular_values(m)?
        .into_iter()
        .fold(f64::INFINITY, f64::min))
}

/// Thin SVD factors `(u, s, vt)`.
pub fn svd(m: &CMatrix) -> Result<(CMatrix, Vec<f64>, CMatrix)> {
    let (u, s, vt) = contiguous(m).svd(true, true)?;
    match (u, vt) {
        (Some(u), Some(vt)) => Ok((u, s.to_vec(), vt)),
        _ => Err(Error::Linalg("SVD did not return singular vectors".into())),
    }
}

/// Frobenius inner product `tr(a^† b)`.
pub fn inner(a: &CMatrix, b: &CMatrix) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}


#[cfg(test)]
mod eigh_layout_tests {
    use super::*;

    #[test]
    fn eigh_vectors_are_eigenvectors() {
        let m = from_rows(&[&[re(0.3), c64(0.4, -0.7)], &[c64(0.4, 0.7), re(-1.1)]]);
        let (vals, vecs) = eigh(&m).unwrap();
        for j in 0..2 {
            let v = vecs.column(j).to_owned();
            let err = (m.dot(&v) - v.mapv(|z| z * vals[j])).iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(err < 1e-12, "column {j}: {err}");
        }
    }

    #[test]
    fn one_by_one_slices() {
        let m = from_rows(&[&[re(0.0), c64(2.0, 1.0)], &[re(1.0), re(0.0)]]);
        let q = m.slice(s![..1, 1..]).to_owned();
        assert!((det(&q).unwrap() - c64(2.0, 1.0)).norm() < 1e-15);
        assert!((min_singular_value(&q).unwrap() - 5f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn svd_reconstructs() {
        let m = from_rows(&[&[re(0.3), c64(0.4, -0.7)], &[c64(-0.2, 0.1), c64(1.1, 0.5)]]);
        let (u, s, vt) = svd(&m).unwrap();
        let rebuilt = u.dot(&diag(&s.iter().map(|&x| re(x)).collect::<Vec<_>>())).dot(&vt);
        assert!(max_abs_diff(&rebuilt, &m) < 1e-12);
        let d = det(&m).unwrap();
        let expected = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
        assert!((d - expected).norm() < 1e-12);
    }
}
