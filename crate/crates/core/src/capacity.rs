//! Two-variable multiplier program over the pencil spectrum.
//!
//! Each mode contributes one half-plane `rho + nu*lam_j >= d_j*lam_j` in the
//! nonnegative quadrant. Two program forms are first class:
//!
//! * [`LpForm::DualMin`]: minimize `rho*R + nu*Theta` over the half-planes.
//!   This is the default coupling capacity; on the binary symmetric wiretap
//!   channel it reproduces the closed-form piecewise answer exactly.
//! * [`LpForm::CappedMax`]: maximize the same objective with the extra cap
//!   `rho*R + nu*Theta <= c_max`. Kept as a first-class citizen because the
//!   two forms answer different questions (price cover vs. capped score) and
//!   cross-checking them against each other is part of the validation story.
//!
//! Both are solved by exhaustive vertex enumeration: with two variables and
//! `m <= |X|` constraints the O(m^2) candidate set is exact and deterministic,
//! so no external LP machinery is involved.

use crate::error::{Error, Result};
use crate::probability::{entropy, LogBase, Pmf};
use crate::spectral::PencilSpectrum;

/// Absolute slack when testing whether a candidate satisfies a constraint,
/// and when deciding that a constraint is active at the optimum.
pub const ACTIVITY_TOL: f64 = 1e-9;

/// Multipliers this far below zero are rejected; closer ones are clamped.
const CLAMP_TOL: f64 = 1e-12;

/// Relative tolerance for treating two vertex objectives as tied.
const TIE_TOL: f64 = 1e-12;

/// Multiplier magnitudes below this count as zero for regime classification.
const REGIME_ZERO: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpForm {
    /// Minimize `rho*R + nu*Theta` over the constraint half-planes.
    DualMin,
    /// Maximize the objective under the additional value cap `c_max`.
    CappedMax,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    /// `nu = 0`: only the rate budget is priced.
    RateDominant,
    /// `rho = 0`: only the leakage budget is priced.
    LeakageDominant,
    /// Both multipliers strictly positive.
    Intermediate,
}

/// Constraint data for one budget pair.
#[derive(Clone, Debug)]
pub struct LpProblem {
    pub r: f64,
    pub theta: f64,
    /// Generalized eigenvalues, one per mode.
    pub d: Vec<f64>,
    /// Eavesdropper weights, aligned with `d`; all strictly positive.
    pub lam: Vec<f64>,
    /// Value cap `lam_max_perp_v * R` used by [`LpForm::CappedMax`].
    pub c_max: f64,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub rho: f64,
    pub nu: f64,
    /// Objective `rho*R + nu*Theta` at the optimum.
    pub value: f64,
    pub regime: Regime,
    /// Indices of constraints tight at the optimum.
    pub active_modes: Vec<usize>,
    pub form: LpForm,
}

/// Copies the per-mode coefficients out of the spectrum and fixes the budgets.
pub fn build_lp(spec: &PencilSpectrum, r: f64, theta: f64) -> Result<LpProblem> {
    if !(r.is_finite() && r > 0.0) || !(theta.is_finite() && theta > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "budgets must be positive and finite, got R = {r}, Theta = {theta}"
        )));
    }
    Ok(LpProblem {
        r,
        theta,
        d: spec.d().to_vec(),
        lam: spec.lam().to_vec(),
        c_max: spec.lam_max_perp_v() * r,
    })
}

fn validate(lp: &LpProblem) -> Result<()> {
    if lp.d.is_empty() || lp.d.len() != lp.lam.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} eigenvalues vs {} weights",
            lp.d.len(),
            lp.lam.len()
        )));
    }
    if !(lp.r > 0.0 && lp.theta > 0.0) {
        return Err(Error::InvalidParameter(
            "budgets must be positive".to_string(),
        ));
    }
    if lp.lam.iter().any(|&l| l.is_nan() || l <= 0.0) {
        return Err(Error::InvalidParameter(
            "every mode weight must be strictly positive".to_string(),
        ));
    }
    Ok(())
}

/// Lines `a*rho + b*nu = c` whose pairwise intersections cover every vertex.
fn candidate_lines(lp: &LpProblem, form: LpForm) -> Vec<(f64, f64, f64)> {
    let mut lines: Vec<(f64, f64, f64)> =
        lp.d.iter()
            .zip(&lp.lam)
            .map(|(&d, &l)| (1.0, l, d * l))
            .collect();
    lines.push((1.0, 0.0, 0.0));
    lines.push((0.0, 1.0, 0.0));
    if form == LpForm::CappedMax {
        lines.push((lp.r, lp.theta, lp.c_max));
    }
    lines
}

fn is_feasible(lp: &LpProblem, form: LpForm, rho: f64, nu: f64) -> bool {
    for (&d, &l) in lp.d.iter().zip(&lp.lam) {
        if rho + nu * l < d * l - ACTIVITY_TOL {
            return false;
        }
    }
    if form == LpForm::CappedMax && rho * lp.r + nu * lp.theta > lp.c_max + ACTIVITY_TOL {
        return false;
    }
    true
}

/// Exact vertex-enumeration solve of either program form.
pub fn solve_lp(lp: &LpProblem, form: LpForm) -> Result<LpSolution> {
    validate(lp)?;
    let lines = candidate_lines(lp, form);
    let mut best: Option<(f64, f64, f64)> = None;

    for i in 0..lines.len() {
        for j in (i + 1)..lines.len() {
            let (a1, b1, c1) = lines[i];
            let (a2, b2, c2) = lines[j];
            let det = a1 * b2 - a2 * b1;
            let scale = (a1 * b2).abs().max((a2 * b1).abs()).max(1.0);
            if det.abs() <= 1e-14 * scale {
                continue;
            }
            let mut rho = (c1 * b2 - c2 * b1) / det;
            let mut nu = (a1 * c2 - a2 * c1) / det;
            if rho < -CLAMP_TOL || nu < -CLAMP_TOL {
                continue;
            }
            rho = rho.max(0.0);
            nu = nu.max(0.0);
            if !is_feasible(lp, form, rho, nu) {
                continue;
            }
            let value = rho * lp.r + nu * lp.theta;
            let replace = match &best {
                None => true,
                Some((bv, br, bn)) => {
                    let tol = TIE_TOL * bv.abs().max(1.0);
                    let improves = match form {
                        LpForm::DualMin => value < bv - tol,
                        LpForm::CappedMax => value > bv + tol,
                    };
                    improves || ((value - bv).abs() <= tol && (rho, nu) < (*br, *bn))
                }
            };
            if replace {
                best = Some((value, rho, nu));
            }
        }
    }

    let (value, rho, nu) = best.ok_or_else(|| {
        Error::Infeasible(
            "no vertex satisfies every eigenmode constraint together with the value cap; \
             the leakage budget is too tight for the top rate mode"
                .to_string(),
        )
    })?;

    let active_modes =
        lp.d.iter()
            .zip(&lp.lam)
            .enumerate()
            .filter(|(_, (&d, &l))| (rho + nu * l - d * l).abs() <= ACTIVITY_TOL)
            .map(|(j, _)| j)
            .collect();
    let regime = classify(rho, nu);

    Ok(LpSolution {
        rho,
        nu,
        value,
        regime,
        active_modes,
        form,
    })
}

fn classify(rho: f64, nu: f64) -> Regime {
    if nu < REGIME_ZERO {
        Regime::RateDominant
    } else if rho < REGIME_ZERO {
        Regime::LeakageDominant
    } else {
        Regime::Intermediate
    }
}

/// Independent reference solve used to cross-validate [`solve_lp`].
///
/// Same mathematical program, deliberately different mechanics: materialize
/// every pairwise intersection with explicit closed-form coordinates, keep the
/// feasible ones in a list, and pick the optimum by a total-order sort. Shares
/// no helper code with the primary path.
pub fn solve_lp_reference(lp: &LpProblem, form: LpForm) -> Result<LpSolution> {
    validate(lp)?;
    let m = lp.d.len();
    let gains: Vec<f64> = (0..m).map(|j| lp.d[j] * lp.lam[j]).collect();

    let mut points: Vec<(f64, f64)> = vec![(0.0, 0.0)];
    for j in 0..m {
        points.push((gains[j], 0.0));
        points.push((0.0, lp.d[j]));
        for k in (j + 1)..m {
            let denom = lp.lam[j] - lp.lam[k];
            if denom.abs() > 1e-14 {
                let nu = (gains[j] - gains[k]) / denom;
                points.push((gains[j] - nu * lp.lam[j], nu));
            }
        }
    }
    if form == LpForm::CappedMax {
        points.push((lp.c_max / lp.r, 0.0));
        points.push((0.0, lp.c_max / lp.theta));
        for (gain, lam) in gains.iter().zip(&lp.lam) {
            // Intersection of the mode constraint with the cap line.
            let denom = lp.theta - lam * lp.r;
            if denom.abs() > 1e-14 {
                let nu = (lp.c_max - gain * lp.r) / denom;
                points.push((gain - nu * lam, nu));
            }
        }
    }

    let mut feasible: Vec<(f64, f64, f64)> = Vec::new();
    'outer: for &(rho_raw, nu_raw) in &points {
        if rho_raw < -CLAMP_TOL || nu_raw < -CLAMP_TOL {
            continue;
        }
        let rho = rho_raw.max(0.0);
        let nu = nu_raw.max(0.0);
        for (gain, lam) in gains.iter().zip(&lp.lam) {
            if rho + nu * lam < gain - ACTIVITY_TOL {
                continue 'outer;
            }
        }
        let value = rho * lp.r + nu * lp.theta;
        if form == LpForm::CappedMax && value > lp.c_max + ACTIVITY_TOL {
            continue;
        }
        feasible.push((value, rho, nu));
    }
    feasible.sort_by(|a, b| a.partial_cmp(b).expect("finite candidate coordinates"));
    let &(value, rho, nu) = match form {
        LpForm::DualMin => feasible.first(),
        LpForm::CappedMax => feasible.last(),
    }
    .ok_or_else(|| Error::Infeasible("reference solve found no feasible vertex".to_string()))?;

    let active_modes = (0..m)
        .filter(|&j| (rho + nu * lp.lam[j] - gains[j]).abs() <= ACTIVITY_TOL)
        .collect();
    Ok(LpSolution {
        rho,
        nu,
        value,
        regime: classify(rho, nu),
        active_modes,
        form,
    })
}

/// Sufficient condition for a strictly positive coupling capacity:
/// `lam_max_perp_v * R > Theta * d_max`, strictly.
pub fn feasibility_check(spec: &PencilSpectrum, r: f64, theta: f64) -> bool {
    spec.lam_max_perp_v() * r > theta * spec.d()[0]
}

/// Coupling capacity carried by a solved multiplier pair.
pub fn c_sic(sol: &LpSolution) -> f64 {
    sol.value
}

/// Feasible vertex formed by two crossing mode constraints.
#[derive(Clone, Debug)]
pub struct InteriorVertex {
    pub modes: (usize, usize),
    pub rho: f64,
    pub nu: f64,
    /// Uncapped objective `rho*R + nu*Theta` at the vertex.
    pub value: f64,
}

/// Candidate capacities broken out by which budget dominates.
#[derive(Clone, Debug)]
pub struct RegimeReport {
    /// Rate-axis candidate `min(lam_max_perp_v * R, c_max)`.
    pub c_r: f64,
    /// Leakage-axis candidate `min(d_max * Theta, c_max)`.
    pub c_theta: f64,
    /// Best capped interior-vertex value; negative infinity when no pair of
    /// constraints crosses inside the positive quadrant.
    pub c_inter: f64,
    pub interior_vertices: Vec<InteriorVertex>,
    pub dual_min: LpSolution,
    pub capped_max: LpSolution,
}

/// Enumerates the candidate optima of both program forms.
pub fn regime_report(lp: &LpProblem, spec: &PencilSpectrum) -> RegimeReport {
    let m = lp.d.len();
    let gains: Vec<f64> = (0..m).map(|j| lp.d[j] * lp.lam[j]).collect();

    let mut interior_vertices = Vec::new();
    let mut c_inter = f64::NEG_INFINITY;
    for j in 0..m {
        for k in (j + 1)..m {
            let denom = lp.lam[j] - lp.lam[k];
            if denom.abs() <= 1e-14 {
                continue;
            }
            let nu = (gains[j] - gains[k]) / denom;
            let rho = gains[j] - nu * lp.lam[j];
            if rho <= CLAMP_TOL || nu <= CLAMP_TOL || !is_feasible(lp, LpForm::DualMin, rho, nu) {
                continue;
            }
            let value = rho * lp.r + nu * lp.theta;
            c_inter = c_inter.max(value.min(lp.c_max));
            interior_vertices.push(InteriorVertex {
                modes: (j, k),
                rho,
                nu,
                value,
            });
        }
    }

    let dual_min = solve_lp(lp, LpForm::DualMin)
        .expect("a validated problem always has feasible axis vertices");
    let capped_max = solve_lp(lp, LpForm::CappedMax)
        .expect("the top rate mode is always below the cap for spectra");

    RegimeReport {
        c_r: (spec.lam_max_perp_v() * lp.r).min(lp.c_max),
        c_theta: (spec.d()[0] * lp.theta).min(lp.c_max),
        c_inter,
        interior_vertices,
        dual_min,
        capped_max,
    }
}

/// Closed-form coupling capacity of the binary symmetric wiretap channel
/// with uniform input, in the units of `r` and `theta`:
///
/// ```text
///   (1-2p)^2 * R                 if (1-2q)^2 <= Theta/R or q = 1/2
///   (1-2p)^2 / (1-2q)^2 * Theta  otherwise
/// ```
pub fn bswc_c_sic(p_bob: f64, q_eve: f64, r: f64, theta: f64) -> Result<f64> {
    for (name, v) in [("p_bob", p_bob), ("q_eve", q_eve)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidParameter(format!(
                "{name} = {v} outside [0, 1]"
            )));
        }
    }
    if !(r.is_finite() && r > 0.0) || !(theta.is_finite() && theta > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "budgets must be positive and finite, got R = {r}, Theta = {theta}"
        )));
    }
    let lam_v = (1.0 - 2.0 * p_bob) * (1.0 - 2.0 * p_bob);
    let lam_z = (1.0 - 2.0 * q_eve) * (1.0 - 2.0 * q_eve);
    if lam_z == 0.0 || lam_z <= theta / r {
        Ok(lam_v * r)
    } else {
        Ok(lam_v / lam_z * theta)
    }
}

/// Per-active-mode stationarity residuals `|d_j*lam_j - rho - nu*lam_j|`.
///
/// Meaningful only when the restricted forms commute: there `d_j*lam_j` and
/// `lam_j` are matched eigenvalues of the two forms and the optimum must price
/// each active mode exactly.
pub fn kkt_commuting_check(spec: &PencilSpectrum, sol: &LpSolution) -> Result<Vec<(usize, f64)>> {
    if !spec.commuting() {
        return Err(Error::NotCommuting(
            "restricted quadratic forms do not commute; per-mode eigenvalue pricing is \
             undefined"
                .to_string(),
        ));
    }
    Ok(sol
        .active_modes
        .iter()
        .map(|&j| {
            let gain = spec.d()[j] * spec.lam()[j];
            (j, (gain - sol.rho - sol.nu * spec.lam()[j]).abs())
        })
        .collect())
}

/// Exact secrecy capacity of the binary symmetric wiretap channel, re-exported
/// here for side-by-side reporting against the coupling capacity.
pub fn bswc_secrecy_gap(p_bob: f64, q_eve: f64, r: f64, theta: f64) -> Result<(f64, f64)> {
    let coupling = bswc_c_sic(p_bob, q_eve, r, theta)?;
    let hb = |x: f64| entropy(&Pmf::new(vec![x, 1.0 - x]).expect("binary pmf"), LogBase::E);
    let exact = (hb(q_eve) - hb(p_bob)).max(0.0);
    Ok((coupling, exact))
}
