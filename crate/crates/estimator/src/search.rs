//! Parameter search over Hamming weight and modulus size.

use otsdec_core::protocol::{composite_weight_bound, ProtocolParams, DEFAULT_H1, DEFAULT_Q2};
use otsdec_core::ring::RingContext;

use crate::attacks::{
    alpha_balance, brute_force_bits, composite_enum_bits, expected_blind_norm,
    expected_secret_norm, mitm_bits, target_ratio_c, zf_attack_bits, GuessModel, ZfEstimate,
};
use crate::{EstimatorError, Result};

/// Which target the composite-enumeration bound is checked against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnumGate {
    /// A fixed number of bits, independent of `lambda`.
    Fixed(u32),
    /// `lambda` itself.
    Lambda,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchPolicy {
    pub enum_gate: EnumGate,
    pub guess: GuessModel,
    pub h1: usize,
    pub q2: u64,
}

impl SearchPolicy {
    /// Enumeration gate fixed at 128 bits, product guess model; reproduces
    /// the published parameter table.
    pub fn table_iii() -> Self {
        Self {
            enum_gate: EnumGate::Fixed(128),
            guess: GuessModel::Product,
            h1: DEFAULT_H1,
            q2: DEFAULT_Q2,
        }
    }

    /// Enumeration gate at `lambda`.
    pub fn strict() -> Self {
        Self {
            enum_gate: EnumGate::Lambda,
            ..Self::table_iii()
        }
    }

    pub fn gate_bits(&self, lambda: u32) -> f64 {
        match self.enum_gate {
            EnumGate::Fixed(b) => b as f64,
            EnumGate::Lambda => lambda as f64,
        }
    }
}

impl Default for SearchPolicy {
    fn default() -> Self {
        Self::table_iii()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AttackReport {
    pub d: usize,
    pub log_q: f64,
    pub h: usize,
    pub h1: usize,
    pub h2: usize,
    pub q2: u64,
    pub brute_bits: f64,
    pub mitm_bits: f64,
    pub composite_enum_bits: f64,
    pub zf: ZfEstimate,
    pub lattice_c_ratio: f64,
    pub alpha: f64,
    pub enum_gate_bits: f64,
}

impl AttackReport {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        d: usize,
        log_q: f64,
        h: usize,
        h1: usize,
        h2: usize,
        q2: u64,
        policy: &SearchPolicy,
        lambda: u32,
    ) -> Self {
        let s_norm = expected_secret_norm(d);
        let t_norm = expected_blind_norm(log_q, h);
        Self {
            d,
            log_q,
            h,
            h1,
            h2,
            q2,
            brute_bits: brute_force_bits(d, log_q, h),
            mitm_bits: mitm_bits(d, log_q, h),
            composite_enum_bits: composite_enum_bits(d, log_q, h1, q2, h2),
            zf: zf_attack_bits(d, log_q, h, policy.guess),
            lattice_c_ratio: target_ratio_c(d, log_q, s_norm, t_norm),
            alpha: alpha_balance(s_norm, t_norm),
            enum_gate_bits: policy.gate_bits(lambda),
        }
    }

    /// Every modelled attack costs at least `2^lambda` (enumeration against
    /// the policy's gate).
    pub fn feasible(&self, lambda: u32) -> bool {
        let l = lambda as f64;
        self.zf.bits >= l && self.mitm_bits >= l && self.composite_enum_bits >= self.enum_gate_bits
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParamChoice {
    pub lambda: u32,
    pub d: usize,
    pub h: usize,
    pub log_q: u32,
    pub h1: usize,
    pub h2: usize,
    pub q2: u64,
    pub report: AttackReport,
}

fn check_lambda(lambda: u32) -> Result<()> {
    if ![128, 192, 256].contains(&lambda) {
        return Err(EstimatorError::Invalid(format!(
            "lambda {lambda} not in {{128,192,256}}"
        )));
    }
    Ok(())
}

/// Smallest `h` whose zero-forced cost reaches `lambda`.
pub fn min_weight(d: usize, log_q: f64, lambda: u32, guess: GuessModel) -> Result<usize> {
    (1..=d / 2)
        .find(|&h| zf_attack_bits(d, log_q, h, guess).bits >= lambda as f64)
        .ok_or_else(|| {
            EstimatorError::InfeasibleParams(format!("no h <= d/2 reaches {lambda} bits at d={d}"))
        })
}

/// Smallest `h2` with `h1*h2 - min(h1,h2) >= h`.
pub fn min_second_weight(h1: usize, h: usize) -> usize {
    (1..)
        .find(|&h2| composite_weight_bound(h1, h2) >= h)
        .unwrap()
}

/// Table-style search: the smallest `h` meeting the zero-forced gate, the
/// minimal `h2` for the weight bound, and the smallest integer `log q`
/// whose composite enumeration space meets the policy's gate.
pub fn find_params(lambda: u32, d: usize, policy: &SearchPolicy) -> Result<ParamChoice> {
    check_lambda(lambda)?;
    if !d.is_power_of_two() || d < 16 {
        return Err(EstimatorError::Invalid(format!(
            "d={d} must be a power of two >= 16"
        )));
    }
    // the zero-forced cost does not depend on q (it cancels in c)
    let h = min_weight(d, 32.0, lambda, policy.guess)?;
    let h2 = min_second_weight(policy.h1, h);
    let gate = policy.gate_bits(lambda);
    let log_q = (2..=62u32)
        .find(|&lq| composite_enum_bits(d, lq as f64, policy.h1, policy.q2, h2) >= gate)
        .ok_or_else(|| {
            EstimatorError::InfeasibleParams(format!("no log q <= 62 meets the {gate}-bit gate"))
        })?;
    let report = AttackReport::new(d, log_q as f64, h, policy.h1, h2, policy.q2, policy, lambda);
    Ok(ParamChoice {
        lambda,
        d,
        h,
        log_q,
        h1: policy.h1,
        h2,
        q2: policy.q2,
        report,
    })
}

/// Protocol parameters for a given ring size: minimal `h` against the
/// zero-forced attack, then `h2` raised from the weight bound until the
/// composite enumeration space meets the gate at this `log q`.
pub fn setup(d: usize, log_q: f64, lambda: u32, policy: &SearchPolicy) -> Result<ProtocolParams> {
    check_lambda(lambda)?;
    let h = min_weight(d, log_q, lambda, policy.guess)?;
    let gate = policy.gate_bits(lambda);
    let h2 = (min_second_weight(policy.h1, h)..=d)
        .find(|&h2| composite_enum_bits(d, log_q, policy.h1, policy.q2, h2) >= gate)
        .ok_or_else(|| {
            EstimatorError::InfeasibleParams(format!(
                "enumeration gate {gate} unreachable at d={d}, log q={log_q:.1}"
            ))
        })?;
    let params = ProtocolParams {
        degree: d,
        log_q,
        lambda,
        h,
        h1: policy.h1,
        h2,
        q2: policy.q2,
    };
    params.validate()?;
    Ok(params)
}

pub fn setup_for_ring(
    ring: &RingContext,
    lambda: u32,
    policy: &SearchPolicy,
) -> Result<ProtocolParams> {
    setup(ring.degree(), ring.log_q(), lambda, policy)
}
