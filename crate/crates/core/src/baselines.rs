//! Exact-information references the quadratic approximations are judged
//! against: exact mutual informations of a concrete strategy, the
//! Blahut-Arimoto information-bottleneck curve, and Monte-Carlo probes of the
//! global utility/leakage ratio. All values in nats.

use crate::eit::{eit_mi_y, eit_mi_z, max_valid_epsilon, EitSystem, PerturbationStrategy};
use crate::error::{Error, Result};
use crate::linalg::{norm2, Mat};
use crate::probability::{kl_divergence, output_marginal, LogBase, Pmf, TransitionMatrix};
use crate::spectral::pencil_spectrum;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::channels::WiretapChannel;

/// Exact `(I(U;X), I(U;Y), I(U;Z))` of a strategy, from the full joint law.
///
/// Marginals are the actual mixtures `Σ_u pU(u) P_{·|u}`, so the values are
/// meaningful for unbalanced strategies too.
pub fn exact_strategy_mi(wc: &WiretapChannel, s: &PerturbationStrategy) -> Result<(f64, f64, f64)> {
    if s.l().rows() != wc.p_x().len() {
        return Err(Error::DimensionMismatch(format!(
            "strategy on {} symbols, channel on {}",
            s.l().rows(),
            wc.p_x().len()
        )));
    }
    let m = s.p_u().len();
    let mut cond_x = Vec::with_capacity(m);
    for u in 0..m {
        cond_x.push(crate::eit::perturbed_conditional(
            wc.p_x(),
            &s.l().col(u),
            s.epsilon(),
        )?);
    }
    let cond_y: Vec<Pmf> = cond_x
        .iter()
        .map(|q| output_marginal(wc.bob(), q))
        .collect::<Result<_>>()?;
    let cond_z: Vec<Pmf> = cond_x
        .iter()
        .map(|q| output_marginal(wc.eve(), q))
        .collect::<Result<_>>()?;

    let mi = |conds: &[Pmf]| -> Result<f64> {
        let n = conds[0].len();
        let mut mix = vec![0.0; n];
        for (u, q) in conds.iter().enumerate() {
            let w = s.p_u().probs()[u];
            for (mi_i, qi) in mix.iter_mut().zip(q.probs()) {
                *mi_i += w * qi;
            }
        }
        let mix = Pmf::new(mix)?;
        let mut acc = 0.0;
        for (u, q) in conds.iter().enumerate() {
            let w = s.p_u().probs()[u];
            if w > 0.0 {
                acc += w * kl_divergence(q, &mix, LogBase::E)?;
            }
        }
        Ok(acc.max(0.0))
    };

    Ok((mi(&cond_x)?, mi(&cond_y)?, mi(&cond_z)?))
}

/// One fixed point of the information-bottleneck iteration.
#[derive(Clone, Debug)]
pub struct IbCurvePoint {
    /// `I(U;X)` in nats.
    pub rate: f64,
    /// `I(U;Y)` in nats.
    pub utility: f64,
    /// Trade-off weight that produced this point.
    pub beta: f64,
    /// False when the iteration hit `max_iters` before the tolerance.
    pub converged: bool,
}

/// Blahut-Arimoto style alternating minimization of `I(U;X) - beta*I(U;Y)`.
///
/// Each beta runs 4 restarts from symmetric-Dirichlet(1) encoders, keeping the
/// best utility. Points come back sorted by rate. Non-converged points are
/// flagged, never dropped.
pub fn blahut_arimoto_ib(
    p_x: &Pmf,
    ch: &TransitionMatrix,
    beta_grid: &[f64],
    card_u: usize,
    seed: u64,
    tol: f64,
    max_iters: usize,
) -> Result<Vec<IbCurvePoint>> {
    if ch.n_inputs() != p_x.len() {
        return Err(Error::DimensionMismatch(format!(
            "channel expects {} inputs, pmf has {}",
            ch.n_inputs(),
            p_x.len()
        )));
    }
    if card_u < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least two messages, got {card_u}"
        )));
    }
    if beta_grid.is_empty() || beta_grid.iter().any(|b| !(b.is_finite() && *b > 0.0)) {
        return Err(Error::InvalidParameter(
            "beta grid must be nonempty and positive".to_string(),
        ));
    }
    if tol.is_nan() || tol <= 0.0 || max_iters == 0 {
        return Err(Error::InvalidParameter(
            "tolerance must be positive and maxIters at least 1".to_string(),
        ));
    }

    const RESTARTS: usize = 4;
    let nx = p_x.len();
    let ny = ch.n_outputs();
    let mut points = Vec::with_capacity(beta_grid.len());

    for (bi, &beta) in beta_grid.iter().enumerate() {
        let mut best: Option<IbCurvePoint> = None;
        for restart in 0..RESTARTS {
            let task = (bi * RESTARTS + restart) as u64;
            let mut rng = ChaCha8Rng::seed_from_u64(
                seed.wrapping_add(task.wrapping_mul(0x9e37_79b9_7f4a_7c15)),
            );
            // Symmetric Dirichlet(1) rows: normalized iid standard exponentials.
            let mut enc = vec![vec![0.0; card_u]; nx];
            for row in enc.iter_mut() {
                let mut sum = 0.0;
                for e in row.iter_mut() {
                    *e = rng.sample::<f64, _>(Exp1);
                    sum += *e;
                }
                for e in row.iter_mut() {
                    *e /= sum;
                }
            }

            let mut converged = false;
            for _ in 0..max_iters {
                let (q_u, q_yu) = decoder_from_encoder(&enc, p_x, ch, card_u, ny);
                let next = encoder_update(&q_u, &q_yu, ch, beta, nx, card_u);
                let drift = encoder_kl(&next, &enc, p_x);
                enc = next;
                if drift < tol {
                    converged = true;
                    break;
                }
            }

            let (q_u, q_yu) = decoder_from_encoder(&enc, p_x, ch, card_u, ny);
            let (rate, utility) = curve_values(&enc, &q_u, &q_yu, p_x);
            let candidate = IbCurvePoint {
                rate,
                utility,
                beta,
                converged,
            };
            let better = best.as_ref().is_none_or(|b| candidate.utility > b.utility);
            if better {
                best = Some(candidate);
            }
        }
        points.push(best.expect("at least one restart ran"));
    }

    points.sort_by(|a, b| a.rate.partial_cmp(&b.rate).expect("finite rates"));
    Ok(points)
}

/// Marginal `q(u)` and decoder `q(y|u)` induced by an encoder `q(u|x)`.
fn decoder_from_encoder(
    enc: &[Vec<f64>],
    p_x: &Pmf,
    ch: &TransitionMatrix,
    card_u: usize,
    ny: usize,
) -> (Vec<f64>, Vec<Vec<f64>>) {
    let mut q_u = vec![0.0; card_u];
    for (x, row) in enc.iter().enumerate() {
        for (u, &e) in row.iter().enumerate() {
            q_u[u] += p_x.probs()[x] * e;
        }
    }
    let mut q_yu = vec![vec![0.0; ny]; card_u];
    for (u, col) in q_yu.iter_mut().enumerate() {
        if q_u[u] <= 1e-300 {
            // Dead message: park its decoder on the output marginal.
            for (y, c) in col.iter_mut().enumerate() {
                *c = (0..enc.len()).map(|x| p_x.probs()[x] * ch.prob(y, x)).sum();
            }
            continue;
        }
        for (x, row) in enc.iter().enumerate() {
            let w = p_x.probs()[x] * row[u] / q_u[u];
            for (y, c) in col.iter_mut().enumerate() {
                *c += w * ch.prob(y, x);
            }
        }
    }
    (q_u, q_yu)
}

/// `q(u|x) ∝ q(u) exp(-beta · D(p(y|x) || q(y|u)))`, row-wise softmax.
fn encoder_update(
    q_u: &[f64],
    q_yu: &[Vec<f64>],
    ch: &TransitionMatrix,
    beta: f64,
    nx: usize,
    card_u: usize,
) -> Vec<Vec<f64>> {
    let mut enc = vec![vec![0.0; card_u]; nx];
    for (x, row) in enc.iter_mut().enumerate() {
        let mut logits = vec![0.0; card_u];
        for (u, logit) in logits.iter_mut().enumerate() {
            let mut div = 0.0;
            for (y, q) in q_yu[u].iter().enumerate() {
                let p = ch.prob(y, x);
                if p > 0.0 {
                    div += p * (p.ln() - q.max(1e-300).ln());
                }
            }
            *logit = if q_u[u] > 0.0 {
                q_u[u].ln() - beta * div
            } else {
                f64::NEG_INFINITY
            };
        }
        let top = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for (e, logit) in row.iter_mut().zip(&logits) {
            *e = (logit - top).exp();
            sum += *e;
        }
        for e in row.iter_mut() {
            *e /= sum;
        }
    }
    enc
}

/// Average KL between successive encoder rows, weighted by the input law.
fn encoder_kl(new: &[Vec<f64>], old: &[Vec<f64>], p_x: &Pmf) -> f64 {
    let mut acc = 0.0;
    for (x, (n_row, o_row)) in new.iter().zip(old).enumerate() {
        let mut div = 0.0;
        for (&n, &o) in n_row.iter().zip(o_row) {
            if n > 0.0 {
                div += n * (n.ln() - o.max(1e-300).ln());
            }
        }
        acc += p_x.probs()[x] * div.max(0.0);
    }
    acc
}

fn curve_values(enc: &[Vec<f64>], q_u: &[f64], q_yu: &[Vec<f64>], p_x: &Pmf) -> (f64, f64) {
    let mut rate = 0.0;
    for (x, row) in enc.iter().enumerate() {
        for (u, &e) in row.iter().enumerate() {
            if e > 0.0 && q_u[u] > 0.0 {
                rate += p_x.probs()[x] * e * (e.ln() - q_u[u].ln());
            }
        }
    }
    let ny = q_yu[0].len();
    let mut p_y = vec![0.0; ny];
    for (u, col) in q_yu.iter().enumerate() {
        for (y, &c) in col.iter().enumerate() {
            p_y[y] += q_u[u] * c;
        }
    }
    let mut utility = 0.0;
    for (u, col) in q_yu.iter().enumerate() {
        for (y, &c) in col.iter().enumerate() {
            if c > 0.0 && q_u[u] > 0.0 && p_y[y] > 0.0 {
                utility += q_u[u] * c * (c.ln() - p_y[y].ln());
            }
        }
    }
    (rate.max(0.0), utility.max(0.0))
}

/// Random antipodal two-message strategy along a unit direction of the
/// perturbation subspace, with epsilon clipped into the valid range.
fn antipodal_strategy(
    sys: &EitSystem,
    direction: &[f64],
    eps: f64,
) -> Result<PerturbationStrategy> {
    let l = Mat::from_columns(&[direction.to_vec(), direction.iter().map(|x| -x).collect()]);
    let px = Pmf::new(sys.sqrt_px().iter().map(|s| s * s).collect())?;
    let bound = max_valid_epsilon(&px, &l);
    let eps_used = if bound.is_finite() {
        eps.min(0.99 * bound)
    } else {
        eps
    };
    PerturbationStrategy::new(Pmf::uniform(2), l, eps_used, sys.sqrt_px())
}

fn random_unit_direction(sys: &EitSystem, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let k = sys.basis().cols();
    loop {
        let y: Vec<f64> = (0..k)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        let n = norm2(&y);
        if n > 1e-9 {
            let unit: Vec<f64> = y.iter().map(|v| v / n).collect();
            return sys.basis().matvec(&unit);
        }
    }
}

/// Sampled evidence about the exact (non-quadratic) utility/leakage ratio.
#[derive(Clone, Copy, Debug)]
pub struct McContraction {
    /// Quadratic-theory ceiling for vanishing perturbations.
    pub eta_loc: f64,
    /// Largest exact `I(U;Y)/I(U;Z)` observed; a lower bound on the global
    /// ratio, never a claim about its supremum.
    pub eta_glo_lower_bound: f64,
}

/// Evaluates exact ratios on random antipodal strategies plus the principal
/// pencil mode at the smallest grid epsilon.
pub fn mc_global_contraction(
    wc: &WiretapChannel,
    n_samples: usize,
    eps_grid: &[f64],
    seed: u64,
) -> Result<McContraction> {
    if n_samples == 0 {
        return Err(Error::InvalidParameter(
            "need at least one sample".to_string(),
        ));
    }
    if eps_grid.is_empty() || eps_grid.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
        return Err(Error::InvalidParameter(
            "epsilon grid must be nonempty and positive".to_string(),
        ));
    }
    let sys = crate::eit::eit_system(wc)?;
    let spec = pencil_spectrum(&sys)?;
    let eta_loc = spec.d()[0];
    let eps_min = eps_grid.iter().cloned().fold(f64::INFINITY, f64::min);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<f64> = None;
    for i in 0..n_samples {
        let (direction, eps) = if i == 0 {
            (spec.modes().col(0), eps_min)
        } else {
            (
                random_unit_direction(&sys, &mut rng),
                eps_grid[i % eps_grid.len()],
            )
        };
        let s = antipodal_strategy(&sys, &direction, eps)?;
        let (_, iuy, iuz) = exact_strategy_mi(wc, &s)?;
        if iuz > 1e-15 {
            let ratio = iuy / iuz;
            best = Some(best.map_or(ratio, |b: f64| b.max(ratio)));
        }
    }
    let eta_glo_lower_bound = best
        .ok_or_else(|| Error::Domain("every sampled strategy produced zero leakage".to_string()))?;
    Ok(McContraction {
        eta_loc,
        eta_glo_lower_bound,
    })
}

/// Quadratic (leakage, utility) pairs for random antipodal strategies; the
/// first sample follows the principal mode and sits on the bounding line.
/// Returns the pairs together with the slope of that line.
pub fn utility_leakage_samples(
    sys: &EitSystem,
    n: usize,
    seed: u64,
) -> Result<(Vec<(f64, f64)>, f64)> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "need at least one sample".to_string(),
        ));
    }
    let spec = pencil_spectrum(sys)?;
    let eta = spec.d()[0];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::with_capacity(n);
    for i in 0..n {
        let direction = if i == 0 {
            spec.modes().col(0)
        } else {
            random_unit_direction(sys, &mut rng)
        };
        let s = antipodal_strategy(sys, &direction, 0.01)?;
        pairs.push((eit_mi_z(&s, sys)?, eit_mi_y(&s, sys)?));
    }
    Ok((pairs, eta))
}
