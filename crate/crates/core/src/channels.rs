//! Constructors for discrete memoryless wiretap channels.
//!
//! A wiretap channel couples one reference input law with two legs: the
//! legitimate receiver's (Bob) and the eavesdropper's (Eve). The quantized
//! AWGN family below is the workhorse for non-commuting experiments:
//!
//! ```text
//!   inputs   nx-ary PAM, equally spaced, unit average energy
//!   noise    sigma from Eb/N0 with Es = 1, Eb = 1/log2(nx), sigma^2 = N0/2
//!   outputs  ny (nz) uniform-width bins over ±(max|PAM| + 3·sigma);
//!            the two end bins absorb the Gaussian tails
//!   P(y|x)   Gaussian CDF differences between consecutive bin edges
//! ```
//!
//! Entries below 1e-15 are clamped and the column renormalized so the induced
//! output marginals stay strictly interior; a bin that remains starved under
//! every input is reported as a construction error rather than patched over.

use crate::error::{Error, Result};
use crate::probability::{
    entropy, output_marginal, LogBase, Pmf, TransitionMatrix, INTERIOR_FLOOR,
};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Floor applied to quantized-channel column entries before renormalization.
const COLUMN_FLOOR: f64 = 1e-15;

/// Reference input plus the two channel legs.
#[derive(Clone, Debug)]
pub struct WiretapChannel {
    p_x: Pmf,
    bob: TransitionMatrix,
    eve: TransitionMatrix,
}

impl WiretapChannel {
    /// Validates shared input dimension and strictly interior reference input
    /// and induced output marginals (the local geometry needs their inverse
    /// square roots).
    pub fn new(p_x: Pmf, bob: TransitionMatrix, eve: TransitionMatrix) -> Result<Self> {
        if bob.n_inputs() != p_x.len() || eve.n_inputs() != p_x.len() {
            return Err(Error::DimensionMismatch(format!(
                "input alphabet {} vs bob {} / eve {}",
                p_x.len(),
                bob.n_inputs(),
                eve.n_inputs()
            )));
        }
        if !p_x.is_strictly_interior(INTERIOR_FLOOR) {
            return Err(Error::Domain(
                "reference input law must be strictly interior".to_string(),
            ));
        }
        for (leg, ch) in [("bob", &bob), ("eve", &eve)] {
            let marginal = output_marginal(ch, &p_x)?;
            if let Some((bin, &p)) = marginal
                .probs()
                .iter()
                .enumerate()
                .find(|(_, &p)| p < INTERIOR_FLOOR)
            {
                return Err(Error::Domain(format!(
                    "{leg} output bin {bin} has probability {p:e} under the reference input; \
                     the quantizer starves it"
                )));
            }
        }
        Ok(WiretapChannel { p_x, bob, eve })
    }

    pub fn p_x(&self) -> &Pmf {
        &self.p_x
    }

    pub fn bob(&self) -> &TransitionMatrix {
        &self.bob
    }

    pub fn eve(&self) -> &TransitionMatrix {
        &self.eve
    }
}

/// Binary symmetric channel with the given crossover probability.
pub fn bsc(crossover: f64) -> Result<TransitionMatrix> {
    if !(0.0..=1.0).contains(&crossover) {
        return Err(Error::InvalidParameter(format!(
            "crossover probability {crossover} outside [0, 1]"
        )));
    }
    TransitionMatrix::from_rows(&[
        vec![1.0 - crossover, crossover],
        vec![crossover, 1.0 - crossover],
    ])
}

/// Binary symmetric wiretap channel: Bob sees BSC(p_bob), Eve sees BSC(q_eve).
pub fn bswc(p_bob: f64, q_eve: f64, p_x: Pmf) -> Result<WiretapChannel> {
    if p_x.len() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "binary wiretap channel needs a binary input law, got {}",
            p_x.len()
        )));
    }
    WiretapChannel::new(p_x, bsc(p_bob)?, bsc(q_eve)?)
}

/// Exact secrecy capacity of the BSWC: `max(0, H_b(q_eve) − H_b(p_bob))`.
pub fn true_secrecy_capacity_bswc(p_bob: f64, q_eve: f64, base: LogBase) -> Result<f64> {
    for (name, v) in [("p_bob", p_bob), ("q_eve", q_eve)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidParameter(format!(
                "{name} = {v} outside [0, 1]"
            )));
        }
    }
    let hb = |p: f64| entropy(&Pmf::new(vec![p, 1.0 - p]).expect("valid binary pmf"), base);
    Ok((hb(q_eve) - hb(p_bob)).max(0.0))
}

/// Quantized-AWGN wiretap channel with uniform reference input.
///
/// Deterministic: the default construction ignores `rng_seed` (reserved for
/// the opt-in bin-edge jitter of [`quantized_awgn_wiretap_jittered`]), so
/// identical parameters always give a bit-identical channel.
pub fn quantized_awgn_wiretap(
    nx: usize,
    ny: usize,
    nz: usize,
    ebn0_bob_db: f64,
    ebn0_eve_db: f64,
    rng_seed: u64,
) -> Result<WiretapChannel> {
    let _ = rng_seed;
    build_quantized_awgn(nx, ny, nz, ebn0_bob_db, ebn0_eve_db, None)
}

/// Quantized-AWGN wiretap channel with seeded jitter of the interior bin
/// edges. `jitter` is the maximum edge displacement as a fraction of the bin
/// width; it must stay below 0.5 so edges remain strictly increasing.
pub fn quantized_awgn_wiretap_jittered(
    nx: usize,
    ny: usize,
    nz: usize,
    ebn0_bob_db: f64,
    ebn0_eve_db: f64,
    rng_seed: u64,
    jitter: f64,
) -> Result<WiretapChannel> {
    if !(0.0..0.5).contains(&jitter) {
        return Err(Error::InvalidParameter(format!(
            "jitter fraction {jitter} outside [0, 0.5)"
        )));
    }
    build_quantized_awgn(
        nx,
        ny,
        nz,
        ebn0_bob_db,
        ebn0_eve_db,
        Some((rng_seed, jitter)),
    )
}

fn build_quantized_awgn(
    nx: usize,
    ny: usize,
    nz: usize,
    ebn0_bob_db: f64,
    ebn0_eve_db: f64,
    jitter: Option<(u64, f64)>,
) -> Result<WiretapChannel> {
    for (name, n) in [("nx", nx), ("ny", ny), ("nz", nz)] {
        if n < 2 {
            return Err(Error::InvalidParameter(format!(
                "{name} = {n}, need at least 2"
            )));
        }
    }
    for (name, snr) in [("bob Eb/N0", ebn0_bob_db), ("eve Eb/N0", ebn0_eve_db)] {
        if !snr.is_finite() {
            return Err(Error::InvalidParameter(format!("{name} must be finite")));
        }
    }

    let pam = pam_points(nx);
    let sigma_bob = awgn_sigma(nx, ebn0_bob_db);
    let sigma_eve = awgn_sigma(nx, ebn0_eve_db);

    let mut rng = jitter.map(|(seed, frac)| (ChaCha8Rng::seed_from_u64(seed), frac));
    let bob = quantize_leg(&pam, ny, sigma_bob, &mut rng)?;
    let eve = quantize_leg(&pam, nz, sigma_eve, &mut rng)?;
    WiretapChannel::new(Pmf::uniform(nx), bob, eve)
}

/// Equally spaced PAM points with unit average energy under uniform input.
fn pam_points(nx: usize) -> Vec<f64> {
    let m = nx as f64;
    let scale = (3.0 / (m * m - 1.0)).sqrt();
    (0..nx)
        .map(|i| scale * (2.0 * i as f64 - (m - 1.0)))
        .collect()
}

/// Noise standard deviation for unit symbol energy: Eb = 1/log2(nx),
/// N0 = Eb / 10^(dB/10), sigma = sqrt(N0 / 2).
fn awgn_sigma(nx: usize, ebn0_db: f64) -> f64 {
    let eb = 1.0 / (nx as f64).log2();
    let n0 = eb / 10f64.powf(ebn0_db / 10.0);
    (n0 / 2.0).sqrt()
}

fn gaussian_cdf(t: f64) -> f64 {
    0.5 * (1.0 + libm::erf(t / std::f64::consts::SQRT_2))
}

fn quantize_leg(
    pam: &[f64],
    n_bins: usize,
    sigma: f64,
    rng: &mut Option<(ChaCha8Rng, f64)>,
) -> Result<TransitionMatrix> {
    let span = pam.last().unwrap().abs() + 3.0 * sigma;
    let width = 2.0 * span / n_bins as f64;
    // Interior edges only; the end bins integrate to ±infinity.
    let mut edges: Vec<f64> = (1..n_bins).map(|j| -span + j as f64 * width).collect();
    if let Some((rng, frac)) = rng {
        for e in edges.iter_mut() {
            *e += width * rng.gen_range(-*frac..=*frac);
        }
    }

    let mut rows = vec![vec![0.0; pam.len()]; n_bins];
    for (x, &a) in pam.iter().enumerate() {
        let mut prev = 0.0;
        for j in 0..n_bins {
            let upper = if j + 1 == n_bins {
                1.0
            } else {
                gaussian_cdf((edges[j] - a) / sigma)
            };
            rows[j][x] = (upper - prev).max(0.0);
            prev = upper;
        }
        // Clamp starved entries and renormalize the column explicitly.
        let mut sum = 0.0;
        for row in rows.iter_mut() {
            if row[x] < COLUMN_FLOOR {
                row[x] = COLUMN_FLOOR;
            }
            sum += row[x];
        }
        for row in rows.iter_mut() {
            row[x] /= sum;
        }
    }
    TransitionMatrix::from_rows(&rows)
}
