//! Generalized spectrum of the receiver/eavesdropper pencil `(V, Λ)` on the
//! perturbation subspace.
//!
//! Both Gram matrices fix `sqrt(pX)`, so the pencil is studied on the
//! orthogonal complement: with `V⊥ = B'VB` and `Λ⊥ = B'ΛB` for an orthonormal
//! frame `B`, whitening by `Λ⊥^{-1/2}` turns `V⊥ x = d Λ⊥ x` into an ordinary
//! symmetric eigenproblem. Mode `j` carries two numbers:
//!
//! ```text
//!   d_j   = generalized eigenvalue (leakage efficiency of the mode)
//!   λ_j   = 1 / (q_j' Λ⊥^{-1} q_j)  (eavesdropper weight of the mode)
//! ```
//!
//! with `q_j` the orthonormal eigenvectors of the whitened matrix. When the
//! restricted matrices commute, `λ_j` is an eigenvalue of `Λ⊥` and `d_j λ_j`
//! the matching eigenvalue of `V⊥`.

use crate::eit::EitSystem;
use crate::error::{Error, Result};
use crate::linalg::{norm2, sym_eig, Mat};

/// Eigenvalues of `Λ⊥` at or below this are treated as a singular pencil.
pub const SINGULAR_TOL: f64 = 1e-12;

/// Relative commutator norm below which the restricted pair counts as
/// simultaneously diagonalizable.
const COMMUTING_TOL: f64 = 1e-10;

/// Acceptable full-space residual `||(V - d Λ) m||` per unit of `1 + d`.
const MODE_RESIDUAL_TOL: f64 = 1e-8;

/// `B' M B`, mirrored to exact symmetry.
pub fn restrict(m: &Mat, basis: &Mat) -> Result<Mat> {
    if m.rows() != m.cols() {
        return Err(Error::DimensionMismatch(format!(
            "cannot restrict a {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    if basis.rows() != m.rows() {
        return Err(Error::DimensionMismatch(format!(
            "basis has {} rows, matrix has {}",
            basis.rows(),
            m.rows()
        )));
    }
    let raw = basis.transpose().matmul(&m.matmul(basis));
    let k = raw.cols();
    let mut out = Mat::zeros(k, k);
    for i in 0..k {
        out[(i, i)] = raw[(i, i)];
        for j in (i + 1)..k {
            let avg = 0.5 * (raw[(i, j)] + raw[(j, i)]);
            out[(i, j)] = avg;
            out[(j, i)] = avg;
        }
    }
    Ok(out)
}

/// Sorted generalized spectrum of `(V, Λ)` restricted to the perturbation
/// subspace, plus the data the multiplier program consumes.
#[derive(Clone, Debug)]
pub struct PencilSpectrum {
    d: Vec<f64>,
    lam: Vec<f64>,
    modes: Mat,
    lam_max_perp_v: f64,
    commuting: bool,
}

impl PencilSpectrum {
    /// Generalized eigenvalues, descending.
    pub fn d(&self) -> &[f64] {
        &self.d
    }

    /// Eavesdropper weight per mode, aligned with [`Self::d`].
    pub fn lam(&self) -> &[f64] {
        &self.lam
    }

    /// Full-space unit modes, one column per eigenvalue.
    pub fn modes(&self) -> &Mat {
        &self.modes
    }

    /// Largest eigenvalue of `V⊥`: the best per-unit-epsilon rate any
    /// direction can extract toward the legitimate receiver.
    pub fn lam_max_perp_v(&self) -> f64 {
        self.lam_max_perp_v
    }

    /// Whether `V⊥` and `Λ⊥` commute to working precision.
    pub fn commuting(&self) -> bool {
        self.commuting
    }

    pub fn n_modes(&self) -> usize {
        self.d.len()
    }
}

/// Solves the restricted pencil by whitening with `Λ⊥^{-1/2}`.
///
/// Fails with [`Error::SingularPencil`] when `Λ⊥` has an eigenvalue at or
/// below [`SINGULAR_TOL`]: the eavesdropper then has a blind direction and
/// the leakage-normalized spectrum is unbounded.
pub fn pencil_spectrum(sys: &EitSystem) -> Result<PencilSpectrum> {
    let v_perp = restrict(sys.v(), sys.basis())?;
    let lam_perp = restrict(sys.lam(), sys.basis())?;
    let k = v_perp.rows();

    let lam_eig = sym_eig(&lam_perp)?;
    let mu_min = *lam_eig
        .values
        .last()
        .expect("restricted matrices are at least 1x1");
    if mu_min <= SINGULAR_TOL {
        return Err(Error::SingularPencil(format!(
            "eavesdropper quadratic form is not positive definite on the perturbation \
             subspace (smallest eigenvalue {mu_min:e}); leakage-normalized modes are unbounded"
        )));
    }

    let whitener = symmetric_power(&lam_eig.vectors, &lam_eig.values, -0.5);
    let v_tilde = mirror(&whitener.matmul(&v_perp.matmul(&whitener)));
    let tilde_eig = sym_eig(&v_tilde)?;

    let commuting = {
        let scale = (v_perp.frobenius_norm() * lam_perp.frobenius_norm()).max(1.0);
        v_perp.commutator_norm(&lam_perp) <= COMMUTING_TOL * scale
    };

    let mut d = Vec::with_capacity(k);
    let mut lam = Vec::with_capacity(k);
    let mut mode_cols = Vec::with_capacity(k);
    for j in 0..k {
        let q = tilde_eig.vectors.col(j);
        let y = whitener.matvec(&q);
        let y_norm = norm2(&y);
        d.push(tilde_eig.values[j].max(0.0));
        lam.push(1.0 / (y_norm * y_norm));
        let mut m = sys.basis().matvec(&y);
        for entry in m.iter_mut() {
            *entry /= y_norm;
        }
        sign_flip(&mut m);
        mode_cols.push(m);
    }
    let modes = Mat::from_columns(&mode_cols);

    for (j, &dj) in d.iter().enumerate() {
        let m = modes.col(j);
        let lhs = sys.v().matvec(&m);
        let rhs = sys.lam().matvec(&m);
        let res: f64 = lhs
            .iter()
            .zip(&rhs)
            .map(|(a, b)| {
                let r = a - dj * b;
                r * r
            })
            .sum::<f64>()
            .sqrt();
        if res > MODE_RESIDUAL_TOL * (1.0 + dj) {
            return Err(Error::NoConvergence(format!(
                "generalized mode {j} has residual {res:e} (d = {dj}); the pencil is too \
                 ill-conditioned"
            )));
        }
    }

    let lam_max_perp_v = sym_eig(&v_perp)?.values[0];

    Ok(PencilSpectrum {
        d,
        lam,
        modes,
        lam_max_perp_v,
        commuting,
    })
}

/// Local secrecy contraction coefficient: the largest generalized eigenvalue.
/// Any local strategy obeys `I(U;Y) <= eta * I(U;Z)` to quadratic order.
pub fn eta_loc_sec(sys: &EitSystem) -> Result<f64> {
    Ok(pencil_spectrum(sys)?.d()[0])
}

/// `U diag(values^p) U'`, mirrored symmetric.
fn symmetric_power(vectors: &Mat, values: &[f64], p: f64) -> Mat {
    let n = values.len();
    let powered: Vec<f64> = values.iter().map(|v| v.powf(p)).collect();
    let mut out = Mat::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let mut acc = 0.0;
            for (k, &w) in powered.iter().enumerate() {
                acc += vectors[(i, k)] * w * vectors[(j, k)];
            }
            out[(i, j)] = acc;
            out[(j, i)] = acc;
        }
    }
    out
}

fn mirror(m: &Mat) -> Mat {
    let n = m.rows();
    let mut out = Mat::zeros(n, n);
    for i in 0..n {
        out[(i, i)] = m[(i, i)];
        for j in (i + 1)..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            out[(i, j)] = avg;
            out[(j, i)] = avg;
        }
    }
    out
}

/// Largest-magnitude component made positive, first index winning ties.
fn sign_flip(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}
