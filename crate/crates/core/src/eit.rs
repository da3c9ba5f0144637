//! Local geometry of a wiretap channel around its reference input.
//!
//! Conditionals near `P_X` are written `P_{X|U=u} = P_X + eps * sqrt(P_X) ∘ L_u`
//! with direction vectors `L_u` orthogonal to `sqrt(P_X)`. In that chart the
//! leading behaviour of the information quantities is quadratic:
//!
//! ```text
//!   I(U;X) ≈ eps^2/2 · Σ_u pU(u) ||L_u||^2
//!   I(U;Y) ≈ eps^2/2 · Σ_u pU(u) L_u' V L_u,    V = B_Y' B_Y
//!   I(U;Z) ≈ eps^2/2 · Σ_u pU(u) L_u' Λ L_u,    Λ = B_Z' B_Z
//! ```
//!
//! where `B = diag(P_out)^{-1/2} P_{out|X} diag(P_X)^{1/2}` for each leg.
//! `B sqrt(P_X) = sqrt(P_out)`, so `sqrt(P_X)` is a fixed point of both Gram
//! matrices and the interesting action lives on its orthogonal complement,
//! spanned here by a Householder frame. All values are in nats.

use crate::channels::WiretapChannel;
use crate::error::{Error, Result};
use crate::linalg::{dot, quad_form, Mat};
use crate::probability::{output_marginal, Pmf, TransitionMatrix, INTERIOR_FLOOR};

/// Orthogonality and consistency tolerance for strategy directions.
pub const STRATEGY_TOL: f64 = 1e-9;

/// Tolerance on the structural identities of a constructed system
/// (orthonormal basis, fixed point of the Gram matrices).
const SYSTEM_TOL: f64 = 1e-10;

/// Decomposition-transition matrix `diag(p_out)^{-1/2} P diag(p_x)^{1/2}`.
///
/// Rows index outputs, columns inputs; the output marginal is computed from
/// the arguments and must be strictly interior.
pub fn dtm(ch: &TransitionMatrix, p_x: &Pmf) -> Result<Mat> {
    let p_out = output_marginal(ch, p_x)?;
    if !p_out.is_strictly_interior(INTERIOR_FLOOR) {
        return Err(Error::Domain(
            "output marginal must be strictly interior to form the decomposition matrix"
                .to_string(),
        ));
    }
    let mut b = Mat::zeros(ch.n_outputs(), ch.n_inputs());
    for j in 0..ch.n_outputs() {
        let inv_root_out = 1.0 / p_out.probs()[j].sqrt();
        for i in 0..ch.n_inputs() {
            b[(j, i)] = ch.prob(j, i) * p_x.probs()[i].sqrt() * inv_root_out;
        }
    }
    Ok(b)
}

/// Precomputed local geometry of a wiretap channel.
#[derive(Clone, Debug)]
pub struct EitSystem {
    channel: WiretapChannel,
    sqrt_px: Vec<f64>,
    b_y: Mat,
    b_z: Mat,
    v: Mat,
    lam: Mat,
    basis: Mat,
}

impl EitSystem {
    pub fn channel(&self) -> &WiretapChannel {
        &self.channel
    }

    /// Input alphabet size.
    pub fn nx(&self) -> usize {
        self.sqrt_px.len()
    }

    pub fn sqrt_px(&self) -> &[f64] {
        &self.sqrt_px
    }

    pub fn b_y(&self) -> &Mat {
        &self.b_y
    }

    pub fn b_z(&self) -> &Mat {
        &self.b_z
    }

    /// Legitimate-receiver Gram matrix `B_Y' B_Y`, exactly symmetric.
    pub fn v(&self) -> &Mat {
        &self.v
    }

    /// Eavesdropper Gram matrix `B_Z' B_Z`, exactly symmetric.
    pub fn lam(&self) -> &Mat {
        &self.lam
    }

    /// Orthonormal `nx x (nx-1)` frame spanning the complement of `sqrt_px`.
    pub fn basis(&self) -> &Mat {
        &self.basis
    }
}

/// Builds the local geometry and checks its structural identities.
pub fn eit_system(channel: &WiretapChannel) -> Result<EitSystem> {
    let p_x = channel.p_x();
    if p_x.len() < 2 {
        return Err(Error::Domain(
            "input alphabet must have at least two symbols".to_string(),
        ));
    }
    let sqrt_px: Vec<f64> = p_x.probs().iter().map(|p| p.sqrt()).collect();
    let b_y = dtm(channel.bob(), p_x)?;
    let b_z = dtm(channel.eve(), p_x)?;
    let v = b_y.gram();
    let lam = b_z.gram();
    let basis = householder_complement(&sqrt_px);

    let eye_residual = {
        let g = basis.transpose().matmul(&basis);
        let mut worst: f64 = 0.0;
        for r in 0..g.rows() {
            for c in 0..g.cols() {
                let want = if r == c { 1.0 } else { 0.0 };
                worst = worst.max((g[(r, c)] - want).abs());
            }
        }
        worst
    };
    if eye_residual > SYSTEM_TOL {
        return Err(Error::Domain(format!(
            "perturbation frame lost orthonormality (residual {eye_residual:e})"
        )));
    }
    for (name, gram) in [("bob", &v), ("eve", &lam)] {
        let image = gram.matvec(&sqrt_px);
        let worst = image
            .iter()
            .zip(&sqrt_px)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if worst > SYSTEM_TOL {
            return Err(Error::Domain(format!(
                "{name} Gram matrix does not fix sqrt(pX) (residual {worst:e}); \
                 the channel is too ill-conditioned for the local chart"
            )));
        }
    }

    Ok(EitSystem {
        channel: channel.clone(),
        sqrt_px,
        b_y,
        b_z,
        v,
        lam,
        basis,
    })
}

/// Columns 2..n of the Householder reflector `H = I - 2vv'/(v'v)`, `v = u + e1`.
///
/// `H` maps `u` to `-e1`, so those columns are an orthonormal basis of the
/// complement of `u`. All entries of `u` are nonnegative here, hence
/// `v'v = 2(1 + u_1)` never cancels.
fn householder_complement(u: &[f64]) -> Mat {
    let n = u.len();
    let mut v = u.to_vec();
    v[0] += 1.0;
    let vtv: f64 = v.iter().map(|x| x * x).sum();
    let mut cols = Vec::with_capacity(n - 1);
    for j in 1..n {
        let scale = 2.0 * v[j] / vtv;
        let mut col: Vec<f64> = v.iter().map(|vi| -scale * vi).collect();
        col[j] += 1.0;
        cols.push(col);
    }
    Mat::from_columns(&cols)
}

/// Finite family of perturbation directions, one column per message `u`.
#[derive(Clone, Debug)]
pub struct PerturbationStrategy {
    p_u: Pmf,
    l: Mat,
    epsilon: f64,
    sqrt_px: Vec<f64>,
}

impl PerturbationStrategy {
    /// Validates per-column orthogonality to `sqrt_px`, the mixture condition
    /// `Σ_u pU(u) L_u = 0`, and `epsilon` against the nonnegativity bound.
    pub fn new(p_u: Pmf, l: Mat, epsilon: f64, sqrt_px: &[f64]) -> Result<Self> {
        let s = Self::new_unbalanced(p_u, l, epsilon, sqrt_px)?;
        let mut mix = vec![0.0; s.sqrt_px.len()];
        for u in 0..s.p_u.len() {
            let w = s.p_u.probs()[u];
            for (i, m) in mix.iter_mut().enumerate() {
                *m += w * s.l[(i, u)];
            }
        }
        let drift = mix.iter().map(|x| x.abs()).fold(0.0, f64::max);
        if drift > STRATEGY_TOL {
            return Err(Error::InvalidStrategy(format!(
                "mixture of directions does not vanish (max component {drift:e}); \
                 the strategy would shift the reference input"
            )));
        }
        Ok(s)
    }

    /// Same validation minus the mixture condition. The quadratic forms are
    /// still meaningful per message; use for single-direction probes.
    pub fn new_unbalanced(p_u: Pmf, l: Mat, epsilon: f64, sqrt_px: &[f64]) -> Result<Self> {
        if l.cols() != p_u.len() || l.rows() != sqrt_px.len() {
            return Err(Error::DimensionMismatch(format!(
                "direction matrix is {}x{}, expected {}x{}",
                l.rows(),
                l.cols(),
                sqrt_px.len(),
                p_u.len()
            )));
        }
        if !epsilon.is_finite() || epsilon < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "epsilon = {epsilon} must be finite and nonnegative"
            )));
        }
        for u in 0..l.cols() {
            let col = l.col(u);
            let overlap = dot(&col, sqrt_px).abs();
            let scale = dot(&col, &col).sqrt().max(1.0);
            if overlap > STRATEGY_TOL * scale {
                return Err(Error::InvalidStrategy(format!(
                    "direction {u} overlaps sqrt(pX) (inner product {overlap:e})"
                )));
            }
        }
        let p_x = Pmf::new(sqrt_px.iter().map(|s| s * s).collect())
            .map_err(|_| Error::InvalidStrategy("sqrt_px must square to a pmf".to_string()))?;
        let bound = max_valid_epsilon(&p_x, &l);
        if epsilon > bound {
            return Err(Error::InvalidStrategy(format!(
                "epsilon = {epsilon} exceeds the nonnegativity bound {bound}"
            )));
        }
        Ok(PerturbationStrategy {
            p_u,
            l,
            epsilon,
            sqrt_px: sqrt_px.to_vec(),
        })
    }

    pub fn p_u(&self) -> &Pmf {
        &self.p_u
    }

    pub fn l(&self) -> &Mat {
        &self.l
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn sqrt_px(&self) -> &[f64] {
        &self.sqrt_px
    }
}

/// Removes the `sqrt_px` component from every column. `sqrt_px` is a unit
/// vector whenever it squares to a pmf, so a plain rank-one update suffices.
pub fn project_out_sqrt_px(l: &Mat, sqrt_px: &[f64]) -> Mat {
    let mut out = l.clone();
    for u in 0..l.cols() {
        let col = l.col(u);
        let overlap = dot(&col, sqrt_px);
        for i in 0..l.rows() {
            out[(i, u)] -= overlap * sqrt_px[i];
        }
    }
    out
}

/// Conditional `p_x + eps * sqrt(p_x) ∘ l`, rejecting any negative mass.
pub fn perturbed_conditional(p_x: &Pmf, l: &[f64], eps: f64) -> Result<Pmf> {
    if l.len() != p_x.len() {
        return Err(Error::DimensionMismatch(format!(
            "direction has {} entries, pmf has {}",
            l.len(),
            p_x.len()
        )));
    }
    if !eps.is_finite() || eps < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "epsilon = {eps} must be finite and nonnegative"
        )));
    }
    let mut q = Vec::with_capacity(p_x.len());
    for (i, (&p, &li)) in p_x.probs().iter().zip(l).enumerate() {
        let qi = p + eps * p.sqrt() * li;
        if qi < 0.0 {
            return Err(Error::Domain(format!(
                "entry {i} of the perturbed conditional is negative ({qi:e}); \
                 epsilon exceeds the valid range"
            )));
        }
        q.push(qi);
    }
    Pmf::new(q)
}

/// Largest `eps` keeping every perturbed conditional nonnegative.
///
/// Only negative direction entries bind: for those,
/// `eps <= sqrt(p_x[i]) / (-l[i][u])`. Returns infinity when nothing binds.
pub fn max_valid_epsilon(p_x: &Pmf, l: &Mat) -> f64 {
    let mut bound = f64::INFINITY;
    for u in 0..l.cols() {
        for i in 0..l.rows() {
            let li = l[(i, u)];
            if li < 0.0 {
                bound = bound.min(-p_x.probs()[i].sqrt() / li);
            }
        }
    }
    bound
}

/// Quadratic approximation of `I(U;X)` in nats.
pub fn eit_mi_x(s: &PerturbationStrategy) -> f64 {
    let mut acc = 0.0;
    for u in 0..s.p_u.len() {
        let col = s.l.col(u);
        acc += s.p_u.probs()[u] * dot(&col, &col);
    }
    0.5 * s.epsilon * s.epsilon * acc
}

/// Quadratic approximation of `I(U;Y)` in nats.
pub fn eit_mi_y(s: &PerturbationStrategy, sys: &EitSystem) -> Result<f64> {
    strategy_quadratic(s, sys, sys.v())
}

/// Quadratic approximation of `I(U;Z)` in nats.
pub fn eit_mi_z(s: &PerturbationStrategy, sys: &EitSystem) -> Result<f64> {
    strategy_quadratic(s, sys, sys.lam())
}

fn strategy_quadratic(s: &PerturbationStrategy, sys: &EitSystem, gram: &Mat) -> Result<f64> {
    if s.l.rows() != sys.nx() {
        return Err(Error::DimensionMismatch(format!(
            "strategy lives on {} symbols, system on {}",
            s.l.rows(),
            sys.nx()
        )));
    }
    let drift = s
        .sqrt_px
        .iter()
        .zip(sys.sqrt_px())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if drift > 1e-12 {
        return Err(Error::Domain(format!(
            "strategy was built for a different reference input (max gap {drift:e})"
        )));
    }
    let mut acc = 0.0;
    for u in 0..s.p_u.len() {
        acc += s.p_u.probs()[u] * quad_form(gram, &s.l.col(u));
    }
    Ok(0.5 * s.epsilon * s.epsilon * acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{bswc, quantized_awgn_wiretap};
    use crate::linalg::norm2;

    fn frame_checks(p: &[f64]) {
        let sqrt_px: Vec<f64> = p.iter().map(|x| x.sqrt()).collect();
        let basis = householder_complement(&sqrt_px);
        assert_eq!(basis.rows(), p.len());
        assert_eq!(basis.cols(), p.len() - 1);
        for j in 0..basis.cols() {
            let col = basis.col(j);
            assert!(
                dot(&col, &sqrt_px).abs() < 1e-14,
                "column {j} not orthogonal"
            );
            assert!((norm2(&col) - 1.0).abs() < 1e-14);
            for k in (j + 1)..basis.cols() {
                assert!(dot(&col, &basis.col(k)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn householder_frame_is_orthonormal_complement() {
        frame_checks(&[0.5, 0.5]);
        frame_checks(&[0.7, 0.2, 0.1]);
        frame_checks(&[0.4, 0.3, 0.2, 0.05, 0.05]);
    }

    #[test]
    fn dtm_maps_sqrt_input_to_sqrt_output() {
        let wc = quantized_awgn_wiretap(5, 6, 7, 5.0, 2.0, 0).unwrap();
        let b = dtm(wc.bob(), wc.p_x()).unwrap();
        let sqrt_px: Vec<f64> = wc.p_x().probs().iter().map(|p| p.sqrt()).collect();
        let p_y = output_marginal(wc.bob(), wc.p_x()).unwrap();
        let image = b.matvec(&sqrt_px);
        for (j, &val) in image.iter().enumerate() {
            assert!((val - p_y.probs()[j].sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn system_invariants_hold_for_asymmetric_channel() {
        let wc = quantized_awgn_wiretap(3, 4, 5, 8.0, 0.0, 0).unwrap();
        let sys = eit_system(&wc).unwrap();
        assert_eq!(sys.basis().cols(), 2);
        let image = sys.lam().matvec(sys.sqrt_px());
        for (a, b) in image.iter().zip(sys.sqrt_px()) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!(sys.v().is_symmetric(0.0));
    }

    #[test]
    fn strategy_rejects_overlapping_direction() {
        let sqrt_px = [std::f64::consts::FRAC_1_SQRT_2; 2];
        let bad = Mat::from_columns(&[vec![1.0, 0.0]]);
        let err =
            PerturbationStrategy::new_unbalanced(Pmf::new(vec![1.0]).unwrap(), bad, 0.1, &sqrt_px);
        assert!(matches!(err, Err(Error::InvalidStrategy(_))));
    }

    #[test]
    fn strategy_rejects_drifting_mixture() {
        let sqrt_px = [std::f64::consts::FRAC_1_SQRT_2; 2];
        let tau = vec![sqrt_px[0], -sqrt_px[0]];
        let same_sign = Mat::from_columns(&[tau.clone(), tau.clone()]);
        let err = PerturbationStrategy::new(Pmf::uniform(2), same_sign.clone(), 0.1, &sqrt_px);
        assert!(matches!(err, Err(Error::InvalidStrategy(_))));

        let antipodal = Mat::from_columns(&[tau.clone(), tau.iter().map(|x| -x).collect()]);
        assert!(PerturbationStrategy::new(Pmf::uniform(2), antipodal, 0.1, &sqrt_px).is_ok());
        assert!(
            PerturbationStrategy::new_unbalanced(Pmf::uniform(2), same_sign, 0.1, &sqrt_px).is_ok()
        );
    }

    #[test]
    fn strategy_rejects_epsilon_beyond_bound() {
        let sqrt_px = [std::f64::consts::FRAC_1_SQRT_2; 2];
        let tau = Mat::from_columns(&[vec![sqrt_px[0], -sqrt_px[0]]]);
        let err = PerturbationStrategy::new_unbalanced(
            Pmf::new(vec![1.0]).unwrap(),
            tau,
            1.0 + 1e-9,
            &sqrt_px,
        );
        assert!(matches!(err, Err(Error::InvalidStrategy(_))));
    }

    #[test]
    fn projection_repairs_overlapping_direction() {
        let sqrt_px = [std::f64::consts::FRAC_1_SQRT_2; 2];
        let raw = Mat::from_columns(&[vec![1.0, 0.0]]);
        let fixed = project_out_sqrt_px(&raw, &sqrt_px);
        assert!(dot(&fixed.col(0), &sqrt_px).abs() < 1e-15);
        assert!(PerturbationStrategy::new_unbalanced(
            Pmf::new(vec![1.0]).unwrap(),
            fixed,
            0.1,
            &sqrt_px
        )
        .is_ok());
    }

    #[test]
    fn quadratic_forms_respect_degradation_order() {
        // Bob strictly cleaner than Eve: every direction must satisfy
        // l'Vl >= l'Λl, with I(U;X) dominating both.
        let wc = bswc(0.05, 0.3, Pmf::uniform(2)).unwrap();
        let sys = eit_system(&wc).unwrap();
        let tau = Mat::from_columns(&[sys.basis().col(0)]);
        let s = PerturbationStrategy::new_unbalanced(
            Pmf::new(vec![1.0]).unwrap(),
            tau,
            0.05,
            sys.sqrt_px(),
        )
        .unwrap();
        let ix = eit_mi_x(&s);
        let iy = eit_mi_y(&s, &sys).unwrap();
        let iz = eit_mi_z(&s, &sys).unwrap();
        assert!(ix >= iy && iy >= iz && iz > 0.0);
    }
}
