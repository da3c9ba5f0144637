//! Direct numerical optimizer for the quadratic coupling problem.
//!
//! Variables are direction columns for each message, expressed in the
//! orthonormal basis of the perturbation subspace so orthogonality to
//! `sqrt(pX)` holds by construction. The program is
//!
//! ```text
//!   maximize   Σ_u pU(u) Y_u' V⊥ Y_u
//!   subject to Σ_u pU(u) ||Y_u||^2     <= R'
//!              Σ_u pU(u) Y_u' Λ⊥ Y_u  <= Θ'
//!              Σ_u pU(u) Y_u           = 0
//! ```
//!
//! Maximizing a convex quadratic over a convex set puts the optimum on the
//! boundary and makes the problem non-convex, so the solver is multi-start
//! projected gradient ascent: step along `V⊥ Y_u`, subtract the weighted mean
//! to restore consistency, then radially rescale onto the tighter budget.
//! Rescaling is not lossy for this objective. Used to validate the multiplier
//! program from the achievability side: the objective can never exceed
//! `rho* R' + nu* Θ'`.

use crate::capacity::{build_lp, solve_lp, LpForm};
use crate::eit::{max_valid_epsilon, EitSystem, PerturbationStrategy};
use crate::error::{Error, Result};
use crate::linalg::{quad_form, sym_eig, Mat};
use crate::probability::Pmf;
use crate::spectral::{pencil_spectrum, restrict};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Objective improvement below this over [`STALL_WINDOW`] iterations stops a
/// restart.
const STALL_TOL: f64 = 1e-12;
const STALL_WINDOW: usize = 50;

/// Base step size, scaled by the inverse of the top receiver eigenvalue.
const STEP: f64 = 1e-2;

/// A converged restart must not improve by more than this under one further
/// projected step.
const LOCAL_MAX_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct PrimalResult {
    pub strategy: PerturbationStrategy,
    /// `Σ_u pU(u) L_u' V L_u`, unscaled.
    pub objective: f64,
    /// `Σ_u pU(u) ||L_u||^2` consumed by the solution.
    pub rate_used: f64,
    /// `Σ_u pU(u) L_u' Λ L_u` consumed by the solution.
    pub leakage_used: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Best-of-restarts ascent with the message weights fixed to uniform.
pub fn optimize_primal(
    sys: &EitSystem,
    rp: f64,
    thp: f64,
    card_u: usize,
    seed: u64,
    restarts: usize,
    max_iters: usize,
) -> Result<PrimalResult> {
    run(sys, rp, thp, card_u, seed, restarts, max_iters, false)
}

/// Variant that co-adapts the message weights by mirror descent. The optimum
/// should not improve (the uniform choice already suffices); this exists to
/// demonstrate exactly that.
pub fn optimize_primal_joint(
    sys: &EitSystem,
    rp: f64,
    thp: f64,
    card_u: usize,
    seed: u64,
    restarts: usize,
    max_iters: usize,
) -> Result<PrimalResult> {
    run(sys, rp, thp, card_u, seed, restarts, max_iters, true)
}

#[allow(clippy::too_many_arguments)]
fn run(
    sys: &EitSystem,
    rp: f64,
    thp: f64,
    card_u: usize,
    seed: u64,
    restarts: usize,
    max_iters: usize,
    adapt_pu: bool,
) -> Result<PrimalResult> {
    if card_u < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least two messages, got {card_u}"
        )));
    }
    if !(rp.is_finite() && rp > 0.0) || !(thp.is_finite() && thp > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "budgets must be positive and finite, got R' = {rp}, Theta' = {thp}"
        )));
    }
    if restarts == 0 || max_iters == 0 {
        return Err(Error::InvalidParameter(
            "restarts and maxIters must be at least 1".to_string(),
        ));
    }

    let v_perp = restrict(sys.v(), sys.basis())?;
    let lam_perp = restrict(sys.lam(), sys.basis())?;
    let v_top = sym_eig(&v_perp)?.values[0];
    let step = if v_top > 0.0 { STEP / v_top } else { STEP };

    let mut best: Option<(f64, RestartOutcome)> = None;
    for restart in 0..restarts {
        let restart_seed =
            seed.wrapping_add(0x9e37_79b9_7f4a_7c15u64.wrapping_mul(restart as u64 + 1));
        let outcome = ascend(
            &v_perp,
            &lam_perp,
            rp,
            thp,
            card_u,
            restart_seed,
            max_iters,
            step,
            adapt_pu,
        );
        if best.as_ref().is_none_or(|(bv, _)| outcome.objective > *bv) {
            best = Some((outcome.objective, outcome));
        }
    }
    let (_, out) = best.expect("at least one restart ran");

    let l_cols: Vec<Vec<f64>> = out.y.iter().map(|y| sys.basis().matvec(y)).collect();
    let l = Mat::from_columns(&l_cols);
    let p_u = Pmf::new(out.p.clone())?;
    let px = Pmf::new(sys.sqrt_px().iter().map(|s| s * s).collect())?;
    let bound = max_valid_epsilon(&px, &l);
    let epsilon = if bound.is_finite() {
        (0.9 * bound).min(1.0)
    } else {
        0.0
    };
    let strategy = PerturbationStrategy::new(p_u, l, epsilon, sys.sqrt_px())?;

    Ok(PrimalResult {
        strategy,
        objective: out.objective,
        rate_used: out.rate,
        leakage_used: out.leak,
        converged: out.converged,
        iterations: out.iterations,
    })
}

struct RestartOutcome {
    y: Vec<Vec<f64>>,
    p: Vec<f64>,
    objective: f64,
    rate: f64,
    leak: f64,
    converged: bool,
    iterations: usize,
}

#[allow(clippy::too_many_arguments)]
fn ascend(
    v_perp: &Mat,
    lam_perp: &Mat,
    rp: f64,
    thp: f64,
    card_u: usize,
    seed: u64,
    max_iters: usize,
    step: f64,
    adapt_pu: bool,
) -> RestartOutcome {
    let k = v_perp.rows();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut y: Vec<Vec<f64>> = (0..card_u)
        .map(|_| {
            (0..k)
                .map(|_| rng.sample::<f64, _>(StandardNormal))
                .collect()
        })
        .collect();
    let mut p = vec![1.0 / card_u as f64; card_u];

    normalize(&mut y, &p, lam_perp, rp, thp);
    let mut obj = objective(&y, &p, v_perp);
    let mut history = vec![obj];
    let mut iterations = 0;
    let mut stalled = false;

    for iter in 1..=max_iters {
        iterations = iter;
        gradient_step(&mut y, v_perp, step);
        if adapt_pu {
            mirror_step(&mut p, &y, v_perp, step);
        }
        normalize(&mut y, &p, lam_perp, rp, thp);
        obj = objective(&y, &p, v_perp);
        history.push(obj);
        if iter >= STALL_WINDOW && obj - history[iter - STALL_WINDOW] < STALL_TOL {
            stalled = true;
            break;
        }
    }

    // One further projected step must not buy more than the local-max slack.
    let mut probe = y.clone();
    let mut p_probe = p.clone();
    gradient_step(&mut probe, v_perp, step);
    if adapt_pu {
        mirror_step(&mut p_probe, &probe, v_perp, step);
    }
    normalize(&mut probe, &p_probe, lam_perp, rp, thp);
    let converged = stalled && objective(&probe, &p_probe, v_perp) - obj <= LOCAL_MAX_TOL;

    let rate: f64 = y
        .iter()
        .zip(&p)
        .map(|(yu, &pu)| pu * yu.iter().map(|x| x * x).sum::<f64>())
        .sum();
    let leak: f64 = y
        .iter()
        .zip(&p)
        .map(|(yu, &pu)| pu * quad_form(lam_perp, yu))
        .sum();

    RestartOutcome {
        y,
        p,
        objective: obj,
        rate,
        leak,
        converged,
        iterations,
    }
}

fn objective(y: &[Vec<f64>], p: &[f64], v_perp: &Mat) -> f64 {
    y.iter()
        .zip(p)
        .map(|(yu, &pu)| pu * quad_form(v_perp, yu))
        .sum()
}

fn gradient_step(y: &mut [Vec<f64>], v_perp: &Mat, step: f64) {
    for yu in y.iter_mut() {
        let g = v_perp.matvec(yu);
        for (yi, gi) in yu.iter_mut().zip(&g) {
            *yi += 2.0 * step * gi;
        }
    }
}

/// Multiplicative-weights update toward messages with better value share.
fn mirror_step(p: &mut [f64], y: &[Vec<f64>], v_perp: &Mat, step: f64) {
    let scores: Vec<f64> = y.iter().map(|yu| quad_form(v_perp, yu)).collect();
    let top = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for (pi, s) in p.iter_mut().zip(&scores) {
        *pi *= (step * (s - top)).exp();
        sum += *pi;
    }
    for pi in p.iter_mut() {
        *pi /= sum;
    }
}

/// Restores consistency (weighted mean zero), then rescales onto the tighter
/// of the two budgets.
fn normalize(y: &mut [Vec<f64>], p: &[f64], lam_perp: &Mat, rp: f64, thp: f64) {
    let k = y[0].len();
    let mut mean = vec![0.0; k];
    for (yu, &pu) in y.iter().zip(p) {
        for (mi, yi) in mean.iter_mut().zip(yu) {
            *mi += pu * yi;
        }
    }
    for yu in y.iter_mut() {
        for (yi, mi) in yu.iter_mut().zip(&mean) {
            *yi -= mi;
        }
    }

    let rate: f64 = y
        .iter()
        .zip(p)
        .map(|(yu, &pu)| pu * yu.iter().map(|x| x * x).sum::<f64>())
        .sum();
    let leak: f64 = y
        .iter()
        .zip(p)
        .map(|(yu, &pu)| pu * quad_form(lam_perp, yu))
        .sum();
    let mut scale = f64::INFINITY;
    if rate > 1e-300 {
        scale = scale.min(rp / rate);
    }
    if leak > 1e-300 {
        scale = scale.min(thp / leak);
    }
    if scale.is_finite() {
        let s = scale.sqrt();
        for yu in y.iter_mut() {
            for yi in yu.iter_mut() {
                *yi *= s;
            }
        }
    }
}

/// One table row per message cardinality: the ascent objective next to the
/// multiplier-program value for the same scaled budgets `2R/eps^2`,
/// `2Theta/eps^2`. The dual column does not depend on the cardinality.
pub fn pu_invariance_sweep(
    sys: &EitSystem,
    r: f64,
    theta: f64,
    epsilon: f64,
    card_range: std::ops::RangeInclusive<usize>,
    seed: u64,
) -> Result<Vec<(usize, f64, f64)>> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon = {epsilon} must be positive"
        )));
    }
    let rp = 2.0 * r / (epsilon * epsilon);
    let thp = 2.0 * theta / (epsilon * epsilon);
    let spec = pencil_spectrum(sys)?;
    let dual = solve_lp(&build_lp(&spec, rp, thp)?, LpForm::DualMin)?.value;

    let mut rows = Vec::new();
    for card_u in card_range {
        let res = optimize_primal(
            sys,
            rp,
            thp,
            card_u,
            seed.wrapping_add(card_u as u64),
            8,
            5000,
        )?;
        rows.push((card_u, res.objective, dual));
    }
    Ok(rows)
}

/// Utility-to-leakage ratio `Σ pU L'VL / Σ pU L'ΛL` of a strategy, independent
/// of its epsilon scale.
pub fn achieved_ratio(strategy: &PerturbationStrategy, sys: &EitSystem) -> Result<f64> {
    if strategy.l().rows() != sys.nx() {
        return Err(Error::DimensionMismatch(format!(
            "strategy lives on {} symbols, system on {}",
            strategy.l().rows(),
            sys.nx()
        )));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for u in 0..strategy.p_u().len() {
        let col = strategy.l().col(u);
        let w = strategy.p_u().probs()[u];
        num += w * quad_form(sys.v(), &col);
        den += w * quad_form(sys.lam(), &col);
    }
    if den <= 1e-12 {
        return Err(Error::Domain(format!(
            "aggregate leakage quadratic {den:e} is too small for a meaningful ratio"
        )));
    }
    Ok(num / den)
}
