//! Helpers shared by the integration suites.

#![allow(dead_code)]

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sicap_core::channels::WiretapChannel;
use sicap_core::linalg::Mat;
use sicap_core::probability::{Pmf, TransitionMatrix};

/// Random column-stochastic matrix with entries bounded away from zero, so
/// induced marginals stay strictly interior.
pub fn random_transition(n_out: usize, n_in: usize, rng: &mut ChaCha8Rng) -> TransitionMatrix {
    let mut rows = vec![vec![0.0; n_in]; n_out];
    for x in 0..n_in {
        let mut sum = 0.0;
        for row in rows.iter_mut() {
            row[x] = rng.gen_range(0.05..1.0);
            sum += row[x];
        }
        for row in rows.iter_mut() {
            row[x] /= sum;
        }
    }
    TransitionMatrix::from_rows(&rows).expect("normalized columns are stochastic")
}

/// Random interior input law.
pub fn random_pmf(n: usize, rng: &mut ChaCha8Rng) -> Pmf {
    let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    let sum: f64 = v.iter().sum();
    for x in v.iter_mut() {
        *x /= sum;
    }
    Pmf::new(v).expect("normalized positive entries")
}

/// Random wiretap channel with interior marginals everywhere.
pub fn random_wiretap(nx: usize, ny: usize, nz: usize, rng: &mut ChaCha8Rng) -> WiretapChannel {
    WiretapChannel::new(
        random_pmf(nx, rng),
        random_transition(ny, nx, rng),
        random_transition(nz, nx, rng),
    )
    .expect("interior construction")
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random direction matrix: `m` columns orthogonal to `sqrt_px` whose
/// weighted mean vanishes, scaled so epsilons up to `eps_cap` stay valid.
pub fn random_consistent_directions(
    sqrt_px: &[f64],
    p_u: &Pmf,
    eps_cap: f64,
    rng: &mut ChaCha8Rng,
) -> Mat {
    let n = sqrt_px.len();
    let m = p_u.len();
    assert!(m >= 2);
    let mut cols: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    // Orthogonalize against sqrt_px, then absorb the weighted mean into the
    // last column so the mixture reproduces the reference law.
    for col in cols.iter_mut() {
        let overlap: f64 = col.iter().zip(sqrt_px).map(|(a, b)| a * b).sum();
        for (c, s) in col.iter_mut().zip(sqrt_px) {
            *c -= overlap * s;
        }
    }
    let w_last = p_u.probs()[m - 1];
    let (head, tail) = cols.split_at_mut(m - 1);
    for (i, last) in tail[0].iter_mut().enumerate() {
        let mean: f64 = head
            .iter()
            .zip(p_u.probs())
            .map(|(col, w)| w * col[i])
            .sum();
        *last = -mean / w_last;
    }
    let l = Mat::from_columns(&cols);
    let px = Pmf::new(sqrt_px.iter().map(|s| s * s).collect()).expect("squares to pmf");
    let bound = sicap_core::eit::max_valid_epsilon(&px, &l);
    if bound.is_finite() && bound < eps_cap {
        let shrink = bound / eps_cap;
        let scaled: Vec<Vec<f64>> = (0..m)
            .map(|u| l.col(u).iter().map(|v| v * shrink).collect())
            .collect();
        Mat::from_columns(&scaled)
    } else {
        l
    }
}
