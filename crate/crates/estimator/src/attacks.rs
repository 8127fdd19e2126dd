//! Counting attacks, the BKZ cost model and the zero-forced attack.

use std::f64::consts::{E, PI};

use crate::{EstimatorError, Result};

/// Smallest block size for which the root-Hermite-factor model is used.
pub const BETA_MIN: usize = 50;

/// `log2 C(n, k)`, exact up to floating-point rounding.
pub fn log2_binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    (1..=k)
        .map(|i| ((n - k + i) as f64 / i as f64).log2())
        .sum()
}

// log2(q - 1) given log2(q)
fn log2_q_minus_one(log_q: f64) -> f64 {
    log_q + (-(-log_q).exp2()).ln_1p() / std::f64::consts::LN_2
}

/// Exhaustive search over weight-`h` factors with values in `[1, q)`, or
/// over ternary secrets, whichever space is smaller.
pub fn brute_force_bits(d: usize, log_q: f64, h: usize) -> f64 {
    if h == 0 {
        return 0.0;
    }
    let sparse = log2_binomial(d, h) + h as f64 * log2_q_minus_one(log_q);
    let ternary = d as f64 * 3f64.log2();
    sparse.min(ternary).max(0.0)
}

/// Meet-in-the-middle splits the search space in half.
pub fn mitm_bits(d: usize, log_q: f64, h: usize) -> f64 {
    brute_force_bits(d, log_q, h) / 2.0
}

/// Square-root enumeration cost of the composite factor
/// `A(h1, values < q) * B(h2, values < q2)`.
pub fn composite_enum_bits(d: usize, log_q: f64, h1: usize, q2: u64, h2: usize) -> f64 {
    let a = log2_binomial(d, h1) + h1 as f64 * log2_q_minus_one(log_q);
    let b = log2_binomial(d, h2) + h2 as f64 * ((q2 - 1) as f64).log2();
    0.5 * (a + b)
}

/// Expected `||s||_2` of a uniform ternary secret.
pub fn expected_secret_norm(d: usize) -> f64 {
    (2.0 * d as f64 / 3.0).sqrt()
}

/// Expected `||t||_2` when `h` coefficients are uniform in `(-q/2, q/2)`.
pub fn expected_blind_norm(log_q: f64, h: usize) -> f64 {
    log_q.exp2() * (h as f64 / 12.0).sqrt()
}

/// Ratio of `||(alpha t, s)||` to the Gaussian-heuristic shortest length in
/// the balanced lattice: `sqrt(2 pi e ||s|| ||t|| / (d q))`.
pub fn target_ratio_c(d: usize, log_q: f64, s_norm: f64, t_norm: f64) -> f64 {
    (2.0 * PI * E * s_norm * (t_norm / log_q.exp2()) / d as f64).sqrt()
}

/// Scaling that balances the two halves of the target vector.
pub fn alpha_balance(s_norm: f64, t_norm: f64) -> f64 {
    s_norm / t_norm
}

/// The quadratic fit `poly(beta)` for log2 of BKZ node cost.
pub fn bkz_poly(beta: f64) -> f64 {
    0.00405892 * beta * beta - 0.337913 * beta + 34.9018
}

/// `log2` of elementary operations for one BKZ tour.
pub fn bkz_log_ops(beta: f64, dim: usize) -> f64 {
    bkz_poly(beta) + (dim as f64).log2() + 7.0
}

/// Limiting root Hermite factor reached by BKZ-`beta`.
pub fn delta_from_beta(beta: f64) -> f64 {
    ((beta / (2.0 * PI * E)) * (PI * beta).powf(1.0 / beta)).powf(1.0 / (2.0 * (beta - 1.0)))
}

/// Root Hermite factor needed to reach the Gaussian-heuristic length in
/// dimension `d`: `(d / (pi e))^(1/(4d))`.
pub fn gaussian_heuristic_delta(d: usize) -> f64 {
    (d as f64 / (PI * E)).powf(1.0 / (4.0 * d as f64))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BetaChoice {
    pub beta: usize,
    /// The requirement was already met below `BETA_MIN`.
    pub clamped: bool,
}

/// Smallest `beta` in `[50, dim]` with `delta_from_beta(beta) <= delta`.
pub fn beta_from_delta(delta: f64, dim: usize) -> Result<BetaChoice> {
    if delta_from_beta(BETA_MIN as f64) <= delta {
        return Ok(BetaChoice {
            beta: BETA_MIN,
            clamped: true,
        });
    }
    let infeasible = EstimatorError::NoFeasibleBeta {
        required_delta: delta,
        dim,
    };
    if dim <= BETA_MIN || delta_from_beta(dim as f64) > delta {
        return Err(infeasible);
    }
    // delta_from_beta decreases on [50, inf)
    let (mut lo, mut hi) = (BETA_MIN, dim);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if delta_from_beta(mid as f64) <= delta {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(BetaChoice {
        beta: hi,
        clamped: false,
    })
}

/// Probability model for one zero-position guess.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum GuessModel {
    /// `(1 - r/(d-1))^h`, the per-guess product with `h` factors.
    #[default]
    Product,
    /// `C(d-r, h) / C(d, h)`: the exact chance that `r` fixed positions
    /// miss all `h` nonzeros.
    Exact,
}

/// `log2` of the single-guess success probability.
pub fn zf_guess_prob(d: usize, h: usize, r: usize, model: GuessModel) -> f64 {
    if r == 0 {
        return 0.0;
    }
    match model {
        GuessModel::Product => {
            if r >= d - 1 {
                return f64::NEG_INFINITY;
            }
            h as f64 * (1.0 - r as f64 / (d - 1) as f64).log2()
        }
        GuessModel::Exact => {
            if r + h > d {
                return f64::NEG_INFINITY;
            }
            (0..h)
                .map(|i| ((d - r - i) as f64 / (d - i) as f64).log2())
                .sum()
        }
    }
}

// log2(1 - (1 - p0)^d) given log2 p0, stable for tiny p0
fn lift_over_shifts(log_p0: f64, d: usize) -> f64 {
    if log_p0 == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let p0 = log_p0.exp2();
    if p0 >= 1.0 {
        return 0.0;
    }
    let p = -(d as f64 * (-p0).ln_1p()).exp_m1();
    if p > 0.0 {
        p.log2()
    } else {
        log_p0 + (d as f64).log2()
    }
}

/// Success probability of one zero-forcing guess of `r` positions against
/// a weight-`h` factor, lifted over the `d` shifts: returns `(p0, p)` with
/// `p0 = C(d-r,h)/C(d,h)` and `p = 1 - (1 - p0)^d`.
pub fn zf_success_prob(d: usize, h: usize, r: usize) -> (f64, f64) {
    let lp0 = zf_guess_prob(d, h, r, GuessModel::Exact);
    (lp0.exp2(), lift_over_shifts(lp0, d).exp2())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZfEstimate {
    pub bits: f64,
    /// Minimising number of guessed zeros; `None` if no `r` is feasible.
    pub r: Option<usize>,
    pub beta: Option<usize>,
    pub beta_clamped: bool,
}

/// Zero-forced attack cost: the minimum over `r` of
/// `-log2 p(r) + bkz_log_ops(beta(r), 2(d-r))`, where `beta(r)` is the
/// smallest block size reaching the root Hermite factor required to expose
/// the target in the reduced lattice. Norms are the expected ones for a
/// ternary secret and a weight-`h` factor.
pub fn zf_attack_bits(d: usize, log_q: f64, h: usize, model: GuessModel) -> ZfEstimate {
    let s_norm = expected_secret_norm(d);
    let t_norm = expected_blind_norm(log_q, h);
    let mut best = ZfEstimate {
        bits: f64::INFINITY,
        r: None,
        beta: None,
        beta_clamped: false,
    };
    for n in h.max(1)..=d {
        let r = d - n;
        let lp = lift_over_shifts(zf_guess_prob(d, h, r, model), d);
        if lp == f64::NEG_INFINITY {
            continue;
        }
        let c = target_ratio_c(n, log_q, s_norm, t_norm);
        let dim = 2 * n;
        let required = (c * (n as f64 / (PI * E)).sqrt()).powf(1.0 / dim as f64);
        let Ok(choice) = beta_from_delta(required, dim) else {
            continue;
        };
        let cost = -lp + bkz_log_ops(choice.beta as f64, dim);
        if cost < best.bits {
            best = ZfEstimate {
                bits: cost,
                r: Some(r),
                beta: Some(choice.beta),
                beta_clamped: choice.clamped,
            };
        }
    }
    if best.r.is_none() {
        best.bits = brute_force_bits(d, log_q, h);
    }
    best
}
