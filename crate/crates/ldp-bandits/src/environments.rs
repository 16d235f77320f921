//! Bounded reward distributions on `[0, 1]` and the bandit environments built
//! from them.
//!
//! Every distribution carries exact sampling plus the analytic moments the
//! bound calculators need: mean, variance, and the exponential moment
//! `E[e^{eps R}]` (closed form where one exists, adaptive quadrature for Beta).

use rand::Rng;
use serde::Serialize;
use statrs::function::beta::ln_beta;

use crate::quad;

/// Relative tolerance for the Beta exponential-moment quadrature. Chosen so
/// calculator error is negligible against the statistical noise it is
/// compared to.
const BETA_MGF_REL_TOL: f64 = 1e-10;

/// Errors from distribution and environment construction.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EnvironmentError {
    #[error("Bernoulli mean {0} outside [0, 1]")]
    BadBernoulliMean(f64),
    #[error("Beta shape parameters must be positive, got alpha = {0}, beta = {1}")]
    BadBetaShape(f64, f64),
    #[error("two-point support needs 0 <= lo < hi <= 1, got lo = {0}, hi = {1}")]
    BadSupport(f64, f64),
    #[error("two-point probability {0} outside [0, 1]")]
    BadPointMass(f64),
    #[error("environment needs at least one arm")]
    NoArms,
}

/// A reward law with support inside `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ArmDistribution {
    /// Reward 1 with probability `mu`, else 0.
    Bernoulli { mu: f64 },
    /// Beta(alpha, beta) on `[0, 1]`.
    Beta { alpha: f64, beta: f64 },
    /// `hi` with probability `p_hi`, else `lo`.
    TwoPoint { lo: f64, hi: f64, p_hi: f64 },
    /// Uniform on `[lo, hi]`.
    UniformInterval { lo: f64, hi: f64 },
}

impl ArmDistribution {
    pub fn bernoulli(mu: f64) -> Result<Self, EnvironmentError> {
        if (0.0..=1.0).contains(&mu) {
            Ok(ArmDistribution::Bernoulli { mu })
        } else {
            Err(EnvironmentError::BadBernoulliMean(mu))
        }
    }

    pub fn beta(alpha: f64, beta: f64) -> Result<Self, EnvironmentError> {
        if alpha.is_finite() && beta.is_finite() && alpha > 0.0 && beta > 0.0 {
            Ok(ArmDistribution::Beta { alpha, beta })
        } else {
            Err(EnvironmentError::BadBetaShape(alpha, beta))
        }
    }

    pub fn two_point(lo: f64, hi: f64, p_hi: f64) -> Result<Self, EnvironmentError> {
        if !(0.0 <= lo && lo < hi && hi <= 1.0) {
            return Err(EnvironmentError::BadSupport(lo, hi));
        }
        if !(0.0..=1.0).contains(&p_hi) {
            return Err(EnvironmentError::BadPointMass(p_hi));
        }
        Ok(ArmDistribution::TwoPoint { lo, hi, p_hi })
    }

    pub fn uniform_interval(lo: f64, hi: f64) -> Result<Self, EnvironmentError> {
        if 0.0 <= lo && lo < hi && hi <= 1.0 {
            Ok(ArmDistribution::UniformInterval { lo, hi })
        } else {
            Err(EnvironmentError::BadSupport(lo, hi))
        }
    }

    /// One draw from the law. Beta sampling is exact (gamma-ratio rejection
    /// sampling under the hood), not a discretized approximation.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            ArmDistribution::Bernoulli { mu } => {
                if rng.random::<f64>() < mu {
                    1.0
                } else {
                    0.0
                }
            }
            ArmDistribution::Beta { alpha, beta } => {
                let dist = rand_distr::Beta::new(alpha, beta).expect("validated shapes");
                rand_distr::Distribution::sample(&dist, rng)
            }
            ArmDistribution::TwoPoint { lo, hi, p_hi } => {
                if rng.random::<f64>() < p_hi {
                    hi
                } else {
                    lo
                }
            }
            ArmDistribution::UniformInterval { lo, hi } => lo + rng.random::<f64>() * (hi - lo),
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            ArmDistribution::Bernoulli { mu } => mu,
            ArmDistribution::Beta { alpha, beta } => alpha / (alpha + beta),
            ArmDistribution::TwoPoint { lo, hi, p_hi } => p_hi * hi + (1.0 - p_hi) * lo,
            ArmDistribution::UniformInterval { lo, hi } => 0.5 * (lo + hi),
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            ArmDistribution::Bernoulli { mu } => mu * (1.0 - mu),
            ArmDistribution::Beta { alpha, beta } => {
                let s = alpha + beta;
                alpha * beta / (s * s * (s + 1.0))
            }
            ArmDistribution::TwoPoint { lo, hi, p_hi } => {
                let d = hi - lo;
                p_hi * (1.0 - p_hi) * d * d
            }
            ArmDistribution::UniformInterval { lo, hi } => {
                let d = hi - lo;
                d * d / 12.0
            }
        }
    }

    /// Exponential moment `E[e^{eps R}]`.
    ///
    /// Closed form except for Beta, which goes through adaptive quadrature at
    /// `1e-10` relative tolerance. Requires finite `eps >= 0`.
    pub fn mgf(&self, epsilon: f64) -> f64 {
        assert!(
            epsilon.is_finite() && epsilon >= 0.0,
            "mgf needs finite epsilon >= 0, got {epsilon}"
        );
        if epsilon == 0.0 {
            return 1.0;
        }
        match *self {
            ArmDistribution::Bernoulli { mu } => (1.0 - mu) + mu * epsilon.exp(),
            ArmDistribution::Beta { alpha, beta } => beta_mgf(alpha, beta, epsilon),
            ArmDistribution::TwoPoint { lo, hi, p_hi } => {
                (1.0 - p_hi) * (epsilon * lo).exp() + p_hi * (epsilon * hi).exp()
            }
            ArmDistribution::UniformInterval { lo, hi } => {
                // (e^{eps hi} - e^{eps lo}) / (eps (hi - lo)), via expm1 so the
                // eps -> 0 limit of 1 comes out clean.
                let x = epsilon * (hi - lo);
                (epsilon * lo).exp() * x.exp_m1() / x
            }
        }
    }

    /// Convexity gap `tau(eps) = E[e^{eps R}] - e^{eps mu}`, non-negative by
    /// Jensen's inequality.
    pub fn jensen_gap(&self, epsilon: f64) -> f64 {
        self.mgf(epsilon) - (epsilon * self.mean()).exp()
    }
}

/// `E[e^{eps R}]` for Beta(alpha, beta) by quadrature after the substitution
/// `r = sin^2(theta)`, which softens any endpoint singularity.
fn beta_mgf(alpha: f64, beta: f64, epsilon: f64) -> f64 {
    let log_norm = std::f64::consts::LN_2 - ln_beta(alpha, beta);
    let integrand = move |theta: f64| {
        let s = theta.sin();
        let c = theta.cos();
        let r = s * s;
        (epsilon * r + (2.0 * alpha - 1.0) * s.ln() + (2.0 * beta - 1.0) * c.ln() + log_norm).exp()
    };
    quad::integrate(&integrand, 0.0, std::f64::consts::FRAC_PI_2, BETA_MGF_REL_TOL)
}

/// An ordered set of arms. The optimal arm is the one with maximal mean;
/// ties are representable but flagged, since a zero minimal gap breaks the
/// problem-dependent bounds downstream.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BanditEnvironment {
    arms: Vec<ArmDistribution>,
}

impl BanditEnvironment {
    pub fn new(arms: Vec<ArmDistribution>) -> Result<Self, EnvironmentError> {
        if arms.is_empty() {
            return Err(EnvironmentError::NoArms);
        }
        Ok(BanditEnvironment { arms })
    }

    pub fn arms(&self) -> &[ArmDistribution] {
        &self.arms
    }

    pub fn num_arms(&self) -> usize {
        self.arms.len()
    }

    pub fn means(&self) -> Vec<f64> {
        self.arms.iter().map(ArmDistribution::mean).collect()
    }

    /// Index of the (first) arm with maximal mean.
    pub fn optimal_arm(&self) -> usize {
        let means = self.means();
        let mut best = 0;
        for (i, &m) in means.iter().enumerate() {
            if m > means[best] {
                best = i;
            }
        }
        best
    }

    pub fn optimal_mean(&self) -> f64 {
        self.means()
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// True gaps `mu* - mu_i`, one per arm (zero for the optimal arm).
    pub fn true_gaps(&self) -> Vec<f64> {
        let best = self.optimal_mean();
        self.means().into_iter().map(|m| best - m).collect()
    }

    /// Minimal gap over suboptimal arms. `None` for a single-arm environment;
    /// zero when the optimum is tied, which downstream bounds refuse.
    pub fn min_gap(&self) -> Option<f64> {
        let opt = self.optimal_arm();
        self.true_gaps()
            .into_iter()
            .enumerate()
            .filter(|&(i, _)| i != opt)
            .map(|(_, g)| g)
            .fold(None, |acc, g| Some(acc.map_or(g, |a: f64| a.min(g))))
    }

    /// Largest gap; zero for a single-arm environment.
    pub fn max_gap(&self) -> f64 {
        self.true_gaps().into_iter().fold(0.0, f64::max)
    }
}
