//! Exact finite-alphabet probability and information quantities.
//!
//! These are the ground truth everything else is validated against. All
//! information quantities are computed internally in nats; base-2 values are a
//! display-time conversion, because the local quadratic expansions downstream
//! only hold in natural log.

use crate::error::{Error, Result};

/// Validation tolerance on `Σ p_i = 1`.
pub const PMF_SUM_TOL: f64 = 1e-12;

/// Default floor for the "strictly interior" query.
pub const INTERIOR_FLOOR: f64 = 1e-12;

/// Log base for reported information quantities.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LogBase {
    /// Bits.
    Two,
    /// Nats.
    E,
}

impl LogBase {
    /// Converts a value in nats to this base.
    pub fn from_nats(self, nats: f64) -> f64 {
        match self {
            LogBase::E => nats,
            LogBase::Two => nats / std::f64::consts::LN_2,
        }
    }
}

/// Probability mass function over a finite, ordered alphabet.
#[derive(Clone, Debug, PartialEq)]
pub struct Pmf {
    probs: Vec<f64>,
}

impl Pmf {
    /// Validates: no negative entries, sum within `PMF_SUM_TOL` of one.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidPmf("empty alphabet".to_string()));
        }
        for (i, &p) in probs.iter().enumerate() {
            if !p.is_finite() || p < 0.0 {
                return Err(Error::InvalidPmf(format!("entry {i} is {p}")));
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PMF_SUM_TOL {
            return Err(Error::InvalidPmf(format!(
                "entries sum to {sum}, off by {:e}",
                sum - 1.0
            )));
        }
        Ok(Pmf { probs })
    }

    /// Explicit renormalization of a nonnegative weight vector.
    pub fn renormalized(raw: &[f64]) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::InvalidPmf("empty alphabet".to_string()));
        }
        for (i, &p) in raw.iter().enumerate() {
            if !p.is_finite() || p < 0.0 {
                return Err(Error::InvalidPmf(format!("entry {i} is {p}")));
            }
        }
        let sum: f64 = raw.iter().sum();
        if sum <= 0.0 {
            return Err(Error::InvalidPmf("weights sum to zero".to_string()));
        }
        Ok(Pmf {
            probs: raw.iter().map(|p| p / sum).collect(),
        })
    }

    pub fn uniform(n: usize) -> Self {
        assert!(n > 0, "empty alphabet");
        Pmf {
            probs: vec![1.0 / n as f64; n],
        }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// True iff every entry is at least `floor`.
    pub fn is_strictly_interior(&self, floor: f64) -> bool {
        self.probs.iter().all(|&p| p >= floor)
    }

    pub fn min_prob(&self) -> f64 {
        self.probs.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

/// Column-stochastic conditional law: entry `(y, x)` is P(y|x).
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionMatrix {
    entries: Vec<f64>,
    n_out: usize,
    n_in: usize,
}

impl TransitionMatrix {
    /// Builds from rows indexed by output symbol; every column must sum to one
    /// within `PMF_SUM_TOL`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::InvalidTransition("empty grid".to_string()));
        }
        let n_in = rows[0].len();
        if rows.iter().any(|r| r.len() != n_in) {
            return Err(Error::InvalidTransition("ragged rows".to_string()));
        }
        let n_out = rows.len();
        let entries: Vec<f64> = rows.concat();
        for (k, &p) in entries.iter().enumerate() {
            if !p.is_finite() || p < 0.0 {
                return Err(Error::InvalidTransition(format!(
                    "entry ({}, {}) is {p}",
                    k / n_in,
                    k % n_in
                )));
            }
        }
        for x in 0..n_in {
            let col_sum: f64 = (0..n_out).map(|y| entries[y * n_in + x]).sum();
            if (col_sum - 1.0).abs() > PMF_SUM_TOL {
                return Err(Error::InvalidTransition(format!(
                    "column {x} sums to {col_sum}"
                )));
            }
        }
        Ok(TransitionMatrix {
            entries,
            n_out,
            n_in,
        })
    }

    pub fn n_outputs(&self) -> usize {
        self.n_out
    }

    pub fn n_inputs(&self) -> usize {
        self.n_in
    }

    /// P(y|x).
    pub fn prob(&self, y: usize, x: usize) -> f64 {
        self.entries[y * self.n_in + x]
    }

    /// The conditional law of the output given input `x`.
    pub fn column(&self, x: usize) -> Vec<f64> {
        (0..self.n_out).map(|y| self.prob(y, x)).collect()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n_out)
            .map(|y| self.entries[y * self.n_in..(y + 1) * self.n_in].to_vec())
            .collect()
    }
}

fn xlnx(x: f64) -> f64 {
    // 0·ln 0 := 0 by continuity.
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// Shannon entropy `−Σ p_i log p_i`.
pub fn entropy(p: &Pmf, base: LogBase) -> f64 {
    let nats = -p.probs().iter().map(|&x| xlnx(x)).sum::<f64>();
    base.from_nats(nats)
}

/// KL divergence `Σ q_i log(q_i / p_i)`; requires supp(q) ⊆ supp(p).
pub fn kl_divergence(q: &Pmf, p: &Pmf, base: LogBase) -> Result<f64> {
    if q.len() != p.len() {
        return Err(Error::DimensionMismatch(format!(
            "kl over alphabets of size {} and {}",
            q.len(),
            p.len()
        )));
    }
    let mut nats = 0.0;
    for (i, (&qi, &pi)) in q.probs().iter().zip(p.probs()).enumerate() {
        if qi == 0.0 {
            continue;
        }
        if pi == 0.0 {
            return Err(Error::Domain(format!(
                "kl support violation at symbol {i}: q={qi}, p=0"
            )));
        }
        nats += qi * (qi / pi).ln();
    }
    // Rounding can leave a negligible negative residue; the quantity is >= 0.
    Ok(base.from_nats(nats.max(0.0)))
}

/// χ² divergence `Σ (q_i − p_i)² / p_i`; requires p strictly interior.
pub fn chi_squared(q: &Pmf, p: &Pmf) -> Result<f64> {
    if q.len() != p.len() {
        return Err(Error::DimensionMismatch(format!(
            "chi-squared over alphabets of size {} and {}",
            q.len(),
            p.len()
        )));
    }
    if !p.is_strictly_interior(f64::MIN_POSITIVE) {
        return Err(Error::Domain(
            "chi-squared reference has a zero entry".to_string(),
        ));
    }
    Ok(q.probs()
        .iter()
        .zip(p.probs())
        .map(|(&qi, &pi)| (qi - pi) * (qi - pi) / pi)
        .sum())
}

/// Output marginal `P_Y = M · P_X`.
pub fn output_marginal(ch: &TransitionMatrix, p_x: &Pmf) -> Result<Pmf> {
    if ch.n_inputs() != p_x.len() {
        return Err(Error::DimensionMismatch(format!(
            "channel has {} inputs, pmf has {}",
            ch.n_inputs(),
            p_x.len()
        )));
    }
    let mut out = vec![0.0; ch.n_outputs()];
    for (x, &px) in p_x.probs().iter().enumerate() {
        if px == 0.0 {
            continue;
        }
        for (y, o) in out.iter_mut().enumerate() {
            *o += px * ch.prob(y, x);
        }
    }
    Pmf::new(out)
}

/// Exact mutual information `I(X;Y) = Σ_x P_X(x) D(P_{Y|X=x} ‖ P_Y)`.
pub fn mutual_information(p_x: &Pmf, ch: &TransitionMatrix, base: LogBase) -> Result<f64> {
    let p_y = output_marginal(ch, p_x)?;
    let mut nats = 0.0;
    for (x, &px) in p_x.probs().iter().enumerate() {
        if px == 0.0 {
            continue;
        }
        for (y, &py) in p_y.probs().iter().enumerate() {
            let cond = ch.prob(y, x);
            if cond > 0.0 {
                nats += px * cond * (cond / py).ln();
            }
        }
    }
    Ok(base.from_nats(nats.max(0.0)))
}
