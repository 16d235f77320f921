//! Analytic regret-bound calculators: privatized means, privatized gaps, and
//! the cumulative-regret upper bounds for Thompson Sampling and UCB on
//! privatized feedback.
//!
//! All functions here are pure in their inputs. The horizon is real-valued so
//! boundary cases like `T = e` (unit log) evaluate exactly.

use serde::Serialize;
use std::fmt;
use std::io;

use crate::environments::{ArmDistribution, BanditEnvironment};
use crate::mechanisms::{Mechanism, MechanismKind};

/// Tolerance below which a privatized gap counts as zero when deciding
/// whether the privatized ordering still agrees with the true one.
const GAP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BoundsError {
    /// Privatized means are undefined for the infinite baseline; callers use
    /// the raw mean directly there.
    #[error("privatized mean is undefined for the infinite-budget baseline; use the raw mean")]
    InfiniteBudget,
    /// A single-arm environment or a tied optimum has no positive minimal
    /// gap, and problem-dependent bounds divide by it.
    #[error("degenerate environment: minimal true gap is {min_gap}; bounds require a strictly positive gap")]
    DegenerateEnvironment { min_gap: f64 },
    /// The mechanism reordered the arms: the privatized optimum is not the
    /// true optimum, so the bound formulas do not apply.
    #[error("privatized ordering inverted: true optimal arm {true_optimal} but privatized optimal arm {privatized_optimal}")]
    OrderingInverted {
        true_optimal: usize,
        privatized_optimal: usize,
    },
    /// A suboptimal arm's privatized gap vanished (per-arm terms divide by it).
    #[error("privatized gap for suboptimal arm {arm} is {gap}; bound terms divide by it")]
    VanishingPrivatizedGap { arm: usize, gap: f64 },
    #[error("gamma must lie strictly inside (0, 1), got {0}")]
    InvalidGamma(f64),
    #[error("horizon must be a finite real >= 1, got {0}")]
    InvalidHorizon(f64),
    #[error("constant-term multiplier c0 must be finite and >= 0, got {0}")]
    InvalidConstant(f64),
}

/// Per-arm gap structure of an environment seen through a mechanism.
#[derive(Debug, Clone, Serialize)]
pub struct GapReport {
    /// True gaps `mu* - mu_i`.
    pub true_gaps: Vec<f64>,
    /// Privatized means `mu_{i,eps}`.
    pub privatized_means: Vec<f64>,
    /// Privatized gaps `mu*_eps - mu_{i,eps}` (non-negative by the max
    /// convention for `mu*_eps`).
    pub privatized_gaps: Vec<f64>,
    /// `mu*_eps = max_i mu_{i,eps}`.
    pub optimal_privatized_mean: f64,
    /// Arm with the largest true mean.
    pub true_optimal_arm: usize,
    /// Arm with the largest privatized mean.
    pub privatized_optimal_arm: usize,
}

impl GapReport {
    pub fn num_arms(&self) -> usize {
        self.true_gaps.len()
    }

    /// Minimal true gap over suboptimal arms.
    pub fn min_true_gap(&self) -> f64 {
        suboptimal_min(&self.true_gaps, self.true_optimal_arm)
    }

    /// Minimal privatized gap over arms suboptimal in the *true* ordering.
    pub fn min_privatized_gap(&self) -> f64 {
        suboptimal_min(&self.privatized_gaps, self.true_optimal_arm)
    }

    /// True when the mechanism moved the optimum: the true-optimal arm no
    /// longer attains the maximal privatized mean.
    pub fn ordering_inverted(&self) -> bool {
        self.privatized_gaps[self.true_optimal_arm] > GAP_TOL
    }

    fn validate_for_bounds(&self) -> Result<(), BoundsError> {
        if self.ordering_inverted() {
            return Err(BoundsError::OrderingInverted {
                true_optimal: self.true_optimal_arm,
                privatized_optimal: self.privatized_optimal_arm,
            });
        }
        for (arm, &gap) in self.privatized_gaps.iter().enumerate() {
            if arm != self.true_optimal_arm && gap <= GAP_TOL {
                return Err(BoundsError::VanishingPrivatizedGap { arm, gap });
            }
        }
        Ok(())
    }
}

fn suboptimal_min(values: &[f64], optimal: usize) -> f64 {
    values
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != optimal)
        .map(|(_, &v)| v)
        .fold(f64::INFINITY, f64::min)
}

/// Expected value of the privatized bit for rewards drawn from `dist`.
///
/// Linear depends on the mean alone, quadratic on mean and variance,
/// exponential on the full exponential moment. Requires a finite budget.
pub fn privatized_mean(mech: &Mechanism, dist: &ArmDistribution) -> Result<f64, BoundsError> {
    if !mech.budget().is_finite() {
        return Err(BoundsError::InfiniteBudget);
    }
    let eps = mech.epsilon();
    let e = mech.budget().exp_epsilon();
    let mu = dist.mean();
    Ok(match mech.kind() {
        MechanismKind::Linear => (1.0 + mu * (e - 1.0)) / (e + 1.0),
        MechanismKind::Quadratic { b } => {
            let second_moment = mu * mu + dist.variance();
            (second_moment * (e - 1.0 - b) + b * mu + 1.0) / (e + 1.0)
        }
        MechanismKind::Exponential => dist.mgf(eps) / (e + 1.0),
    })
}

fn check_min_gap(env: &BanditEnvironment) -> Result<(), BoundsError> {
    let min_gap = env.min_gap().unwrap_or(0.0);
    if min_gap <= 0.0 {
        return Err(BoundsError::DegenerateEnvironment { min_gap });
    }
    Ok(())
}

/// Privatized means and gaps for every arm of `env` under `mech`.
///
/// `mu*_eps` is the max over privatized means (not the privatized mean of the
/// true-optimal arm), so gaps are non-negative by construction; an inverted
/// ordering is surfaced through the report rather than clipped away.
pub fn privatized_gap(mech: &Mechanism, env: &BanditEnvironment) -> Result<GapReport, BoundsError> {
    if !mech.budget().is_finite() {
        return Err(BoundsError::InfiniteBudget);
    }
    check_min_gap(env)?;
    let privatized_means: Vec<f64> = env
        .arms()
        .iter()
        .map(|d| privatized_mean(mech, d))
        .collect::<Result<_, _>>()?;
    Ok(gap_report_from_means(env, privatized_means))
}

/// Gap report for the infinite baseline, where the privatized mean of an arm
/// is its raw mean.
fn identity_gap_report(env: &BanditEnvironment) -> Result<GapReport, BoundsError> {
    check_min_gap(env)?;
    Ok(gap_report_from_means(env, env.means()))
}

fn gap_report_from_means(env: &BanditEnvironment, privatized_means: Vec<f64>) -> GapReport {
    let mut privatized_optimal_arm = 0;
    for (i, &m) in privatized_means.iter().enumerate() {
        if m > privatized_means[privatized_optimal_arm] {
            privatized_optimal_arm = i;
        }
    }
    let optimal_privatized_mean = privatized_means[privatized_optimal_arm];
    let privatized_gaps = privatized_means
        .iter()
        .map(|&m| optimal_privatized_mean - m)
        .collect();
    GapReport {
        true_gaps: env.true_gaps(),
        privatized_means,
        privatized_gaps,
        optimal_privatized_mean,
        true_optimal_arm: env.optimal_arm(),
        privatized_optimal_arm,
    }
}

/// Which policy a bound describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BoundAlgorithm {
    ThompsonSampling,
    Ucb,
}

impl BoundAlgorithm {
    pub fn name(self) -> &'static str {
        match self {
            BoundAlgorithm::ThompsonSampling => "ts",
            BoundAlgorithm::Ucb => "ucb",
        }
    }
}

/// One arm's contribution to a bound.
#[derive(Debug, Clone, Serialize)]
pub struct ArmBoundRow {
    pub arm: usize,
    pub true_gap: f64,
    pub privatized_gap: f64,
    pub term: f64,
}

/// An evaluated cumulative-regret upper bound at one horizon.
///
/// `total = sum of per-arm terms + constant_term`. The logarithmic part is
/// reported separately so comparisons never hinge on the constant-term
/// policy (`c0`).
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub algorithm: BoundAlgorithm,
    pub mechanism: String,
    pub epsilon: f64,
    pub horizon: f64,
    pub gamma: Option<f64>,
    pub c0: Option<f64>,
    pub rows: Vec<ArmBoundRow>,
    pub log_term_total: f64,
    pub constant_term: f64,
    pub total: f64,
}

impl BoundReport {
    /// Writes the tabular CSV form: per-arm rows then a footer with the
    /// totals and parameters.
    pub fn write_csv<W: io::Write>(&self, writer: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["arm", "true_gap", "privatized_gap", "term"])?;
        for row in &self.rows {
            w.write_record([
                row.arm.to_string(),
                row.true_gap.to_string(),
                row.privatized_gap.to_string(),
                row.term.to_string(),
            ])?;
        }
        w.write_record(["log_term", "", "", &self.log_term_total.to_string()])?;
        w.write_record(["constant_term", "", "", &self.constant_term.to_string()])?;
        w.write_record(["total", "", "", &self.total.to_string()])?;
        w.write_record([
            "gamma",
            "",
            "",
            &self.gamma.map_or_else(|| "-".to_string(), |g| g.to_string()),
        ])?;
        w.write_record([
            "c0",
            "",
            "",
            &self.c0.map_or_else(|| "-".to_string(), |c| c.to_string()),
        ])?;
        w.write_record(["epsilon", "", "", &format_epsilon(self.epsilon)])?;
        w.write_record(["horizon", "", "", &self.horizon.to_string()])?;
        w.flush()?;
        Ok(())
    }
}

fn format_epsilon(eps: f64) -> String {
    if eps.is_infinite() {
        "inf".to_string()
    } else {
        eps.to_string()
    }
}

impl fmt::Display for BoundReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{} regret bound for {} at T = {}",
            self.algorithm.name(),
            self.mechanism,
            self.horizon
        )?;
        writeln!(
            f,
            "  {:>4} {:>14} {:>18} {:>16}",
            "arm", "true_gap", "privatized_gap", "term"
        )?;
        for row in &self.rows {
            writeln!(
                f,
                "  {:>4} {:>14.8} {:>18.8} {:>16.6}",
                row.arm, row.true_gap, row.privatized_gap, row.term
            )?;
        }
        writeln!(f, "  log term      = {:.6}", self.log_term_total)?;
        writeln!(f, "  constant term = {:.6}", self.constant_term)?;
        writeln!(f, "  total         = {:.6}", self.total)?;
        write!(
            f,
            "  gamma = {}, c0 = {}, epsilon = {}, T = {}",
            self.gamma.map_or_else(|| "-".to_string(), |g| g.to_string()),
            self.c0.map_or_else(|| "-".to_string(), |c| c.to_string()),
            format_epsilon(self.epsilon),
            self.horizon
        )
    }
}

fn check_horizon(horizon: f64) -> Result<(), BoundsError> {
    if !horizon.is_finite() || horizon < 1.0 {
        return Err(BoundsError::InvalidHorizon(horizon));
    }
    Ok(())
}

fn check_gamma(gamma: f64) -> Result<(), BoundsError> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(BoundsError::InvalidGamma(gamma));
    }
    Ok(())
}

fn check_c0(c0: f64) -> Result<(), BoundsError> {
    if !c0.is_finite() || c0 < 0.0 {
        return Err(BoundsError::InvalidConstant(c0));
    }
    Ok(())
}

/// Cumulative-regret upper bound for Thompson Sampling.
///
/// The linear mechanism gets the dedicated form
/// `(1+gamma)^2 ((e^eps+1)/(e^eps-1))^2 [ sum_{i != 1} log(T)/(2 gap_i)
///  + c0 N/(2 gap_min) ]`, with privacy factor 1 for the infinite baseline.
/// Quadratic and exponential mechanisms evaluate the generic non-linear form
/// through their privatized gaps (see [`ts_bound_from_gaps`]).
pub fn ts_bound(
    mech: &Mechanism,
    env: &BanditEnvironment,
    horizon: f64,
    gamma: f64,
    c0: f64,
) -> Result<BoundReport, BoundsError> {
    check_horizon(horizon)?;
    check_gamma(gamma)?;
    check_c0(c0)?;
    match mech.kind() {
        MechanismKind::Linear => {
            check_min_gap(env)?;
            let gaps = if mech.budget().is_finite() {
                privatized_gap(mech, env)?
            } else {
                identity_gap_report(env)?
            };
            let factor = if mech.budget().is_finite() {
                let e = mech.budget().exp_epsilon();
                let ratio = (e + 1.0) / (e - 1.0);
                ratio * ratio
            } else {
                1.0
            };
            let scale = (1.0 + gamma) * (1.0 + gamma) * factor;
            let log_t = horizon.ln();
            let optimal = gaps.true_optimal_arm;
            let rows: Vec<ArmBoundRow> = gaps
                .true_gaps
                .iter()
                .enumerate()
                .map(|(arm, &gap)| ArmBoundRow {
                    arm,
                    true_gap: gap,
                    privatized_gap: gaps.privatized_gaps[arm],
                    term: if arm == optimal {
                        0.0
                    } else {
                        scale * log_t / (2.0 * gap)
                    },
                })
                .collect();
            let log_term_total: f64 = rows.iter().map(|r| r.term).sum();
            let n = env.num_arms() as f64;
            let constant_term = scale * c0 * n / (2.0 * gaps.min_true_gap());
            Ok(BoundReport {
                algorithm: BoundAlgorithm::ThompsonSampling,
                mechanism: mech.to_string(),
                epsilon: mech.epsilon(),
                horizon,
                gamma: Some(gamma),
                c0: Some(c0),
                log_term_total,
                constant_term,
                total: log_term_total + constant_term,
                rows,
            })
        }
        MechanismKind::Quadratic { .. } | MechanismKind::Exponential => {
            let gaps = privatized_gap(mech, env)?;
            let mut report = ts_bound_from_gaps(&gaps, horizon, gamma, c0)?;
            report.mechanism = mech.to_string();
            report.epsilon = mech.epsilon();
            Ok(report)
        }
    }
}

/// The non-linear Thompson Sampling bound evaluated on an explicit gap
/// report: `(1+gamma)^2 sum_{i != 1} (log(T)+1) gap_i / (2 gap_{i,eps}^2)
/// + c0 N`.
///
/// Exposed separately so any gap structure (for instance the linear
/// mechanism's) can be pushed through the same formula.
pub fn ts_bound_from_gaps(
    gaps: &GapReport,
    horizon: f64,
    gamma: f64,
    c0: f64,
) -> Result<BoundReport, BoundsError> {
    check_horizon(horizon)?;
    check_gamma(gamma)?;
    check_c0(c0)?;
    gaps.validate_for_bounds()?;
    let scale = (1.0 + gamma) * (1.0 + gamma);
    let log_t = horizon.ln();
    let optimal = gaps.true_optimal_arm;
    let mut log_term_total = 0.0;
    let rows: Vec<ArmBoundRow> = gaps
        .true_gaps
        .iter()
        .enumerate()
        .map(|(arm, &gap)| {
            let pgap = gaps.privatized_gaps[arm];
            let term = if arm == optimal {
                0.0
            } else {
                log_term_total += scale * log_t * gap / (2.0 * pgap * pgap);
                scale * (log_t + 1.0) * gap / (2.0 * pgap * pgap)
            };
            ArmBoundRow {
                arm,
                true_gap: gap,
                privatized_gap: pgap,
                term,
            }
        })
        .collect();
    let constant_term = c0 * gaps.num_arms() as f64;
    let total = rows.iter().map(|r| r.term).sum::<f64>() + constant_term;
    Ok(BoundReport {
        algorithm: BoundAlgorithm::ThompsonSampling,
        mechanism: "explicit-gaps".to_string(),
        epsilon: f64::NAN,
        horizon,
        gamma: Some(gamma),
        c0: Some(c0),
        rows,
        log_term_total,
        constant_term,
        total,
    })
}

/// Cumulative-regret upper bound for UCB on privatized feedback:
/// `sum_{i != 1} [ 8 log(T)/gap_{i,eps}^2 + 1 + pi^2/3 ] gap_i`.
///
/// Fully explicit (no constant-term policy). The infinite baseline uses the
/// identity gaps `gap_{i,eps} = gap_i`.
pub fn ucb_bound(
    mech: &Mechanism,
    env: &BanditEnvironment,
    horizon: f64,
) -> Result<BoundReport, BoundsError> {
    let gaps = if mech.budget().is_finite() {
        privatized_gap(mech, env)?
    } else {
        identity_gap_report(env)?
    };
    let mut report = ucb_bound_from_gaps(&gaps, horizon)?;
    report.mechanism = mech.to_string();
    report.epsilon = mech.epsilon();
    Ok(report)
}

/// The UCB bound evaluated on an explicit gap report.
pub fn ucb_bound_from_gaps(gaps: &GapReport, horizon: f64) -> Result<BoundReport, BoundsError> {
    check_horizon(horizon)?;
    gaps.validate_for_bounds()?;
    let log_t = horizon.ln();
    let additive = 1.0 + std::f64::consts::PI.powi(2) / 3.0;
    let optimal = gaps.true_optimal_arm;
    let mut log_term_total = 0.0;
    let rows: Vec<ArmBoundRow> = gaps
        .true_gaps
        .iter()
        .enumerate()
        .map(|(arm, &gap)| {
            let pgap = gaps.privatized_gaps[arm];
            let term = if arm == optimal {
                0.0
            } else {
                log_term_total += 8.0 * log_t / (pgap * pgap) * gap;
                (8.0 * log_t / (pgap * pgap) + additive) * gap
            };
            ArmBoundRow {
                arm,
                true_gap: gap,
                privatized_gap: pgap,
                term,
            }
        })
        .collect();
    let total = rows.iter().map(|r| r.term).sum::<f64>();
    Ok(BoundReport {
        algorithm: BoundAlgorithm::Ucb,
        mechanism: "explicit-gaps".to_string(),
        epsilon: f64::NAN,
        horizon,
        gamma: None,
        c0: None,
        rows,
        log_term_total,
        constant_term: 0.0,
        total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanisms::PrivacyBudget;
    use proptest::prelude::*;

    fn budget(eps: f64) -> PrivacyBudget {
        PrivacyBudget::finite(eps).unwrap()
    }

    fn bernoulli(mu: f64) -> ArmDistribution {
        ArmDistribution::bernoulli(mu).unwrap()
    }

    fn bernoulli_env(mus: &[f64]) -> BanditEnvironment {
        BanditEnvironment::new(mus.iter().map(|&m| bernoulli(m)).collect()).unwrap()
    }

    /// The five mean levels of the benchmark environment, one distribution
    /// family per level.
    fn mixed_env() -> BanditEnvironment {
        BanditEnvironment::new(vec![
            bernoulli(0.9),
            ArmDistribution::beta(4.0, 1.0).unwrap(),
            ArmDistribution::two_point(0.4, 1.0, 0.5).unwrap(),
            bernoulli(0.6),
            ArmDistribution::uniform_interval(0.0, 1.0).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn linear_privatized_mean_fixed_point_and_hand_values() {
        let half = bernoulli(0.5);
        for eps in [0.1, 1.0, 4.0] {
            let m = Mechanism::linear(budget(eps));
            assert!((privatized_mean(&m, &half).unwrap() - 0.5).abs() < 1e-15);
        }
        // e^eps = 3, mu = 0.9: (1 + 0.9 * 2) / 4 = 0.7.
        let m = Mechanism::linear(budget(3.0f64.ln()));
        assert!((privatized_mean(&m, &bernoulli(0.9)).unwrap() - 0.7).abs() < 1e-12);
    }

    #[test]
    fn linear_privatized_mean_alternate_form() {
        // (1 + mu(e-1))/(e+1) == 1/2 + (2 mu - 1)(e - 1)/(2(e + 1)).
        for eps in [0.3f64, 1.0, 2.7] {
            let e = eps.exp();
            for mu in [0.0, 0.25, 0.6, 1.0] {
                let m = Mechanism::linear(budget(eps));
                let lhs = privatized_mean(&m, &bernoulli(mu)).unwrap();
                let rhs = 0.5 + (2.0 * mu - 1.0) * (e - 1.0) / (2.0 * (e + 1.0));
                assert!((lhs - rhs).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn exponential_privatized_mean_from_moment() {
        // Bernoulli(0.9), eps = 1: (0.1 + 0.9 e)/(e + 1).
        let e = 1.0f64.exp();
        let m = Mechanism::exponential(budget(1.0));
        let got = privatized_mean(&m, &bernoulli(0.9)).unwrap();
        let expect = (0.1 + 0.9 * e) / (e + 1.0);
        assert!((got - expect).abs() < 1e-14);
        assert!((got - 0.684_846_88).abs() < 1e-7, "got {got}");
    }

    #[test]
    fn quadratic_b0_on_bernoulli_collapses_to_linear() {
        for eps in [0.5f64, 1.0, 2.0] {
            let lin = Mechanism::linear(budget(eps));
            let quad = Mechanism::quadratic(budget(eps), 0.0).unwrap();
            for mu in [0.1, 0.5, 0.9] {
                let d = bernoulli(mu);
                let a = privatized_mean(&lin, &d).unwrap();
                let b = privatized_mean(&quad, &d).unwrap();
                assert!((a - b).abs() < 1e-14, "eps={eps} mu={mu}");
            }
        }
    }

    #[test]
    fn privatized_mean_rejects_infinite_budget() {
        let m = Mechanism::linear(PrivacyBudget::infinite());
        assert_eq!(
            privatized_mean(&m, &bernoulli(0.5)).unwrap_err(),
            BoundsError::InfiniteBudget
        );
    }

    #[test]
    fn linear_gap_contraction_is_exact() {
        let env = bernoulli_env(&[0.9, 0.6]);
        let m = Mechanism::linear(budget(1.0));
        let report = privatized_gap(&m, &env).unwrap();
        let e = 1.0f64.exp();
        let expect = (e - 1.0) / (e + 1.0) * 0.3;
        assert!((report.privatized_gaps[1] - expect).abs() < 1e-15);
        assert!((expect - 0.138_635_147_2).abs() < 1e-9);
        // Contraction ratio holds for every arm of a larger environment.
        let env = bernoulli_env(&[0.9, 0.7, 0.5, 0.2]);
        let report = privatized_gap(&m, &env).unwrap();
        for arm in 1..4 {
            let ratio = report.privatized_gaps[arm] / report.true_gaps[arm];
            assert!((ratio - (e - 1.0) / (e + 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn exponential_gap_matches_linear_on_bernoulli_arms() {
        // For Bernoulli rewards all three families share the same privatized
        // mean, so the exponential gap coincides with the linear one.
        let env = bernoulli_env(&[0.9, 0.6]);
        let lin = privatized_gap(&Mechanism::linear(budget(1.0)), &env).unwrap();
        let exp = privatized_gap(&Mechanism::exponential(budget(1.0)), &env).unwrap();
        assert!((lin.privatized_gaps[1] - exp.privatized_gaps[1]).abs() < 1e-12);
    }

    #[test]
    fn quadratic_gap_collapse_on_all_bernoulli() {
        for eps in [0.5f64, 1.0, 2.0] {
            let e: f64 = eps.exp();
            let env = bernoulli_env(&[0.9, 0.8, 0.6, 0.5]);
            for b in [0.0, 1.0, e - 1.0] {
                let m = Mechanism::quadratic(budget(eps), b).unwrap();
                let report = privatized_gap(&m, &env).unwrap();
                for arm in 0..env.num_arms() {
                    let expect = (e - 1.0) / (e + 1.0) * report.true_gaps[arm];
                    assert!(
                        (report.privatized_gaps[arm] - expect).abs() < 1e-12,
                        "eps={eps} b={b} arm={arm}"
                    );
                }
            }
        }
    }

    #[test]
    fn exponential_gap_identity_with_jensen_terms() {
        // mu_{1,eps} - mu_{i,eps} = [e^{eps mu_i}(e^{eps gap_i} - 1)
        //   + tau_1 - tau_i] / (e^eps + 1).
        let env = mixed_env();
        for eps in [0.5f64, 1.0, 2.0] {
            let m = Mechanism::exponential(budget(eps));
            let report = privatized_gap(&m, &env).unwrap();
            let arms = env.arms();
            let mu1 = arms[0].mean();
            let tau1 = arms[0].jensen_gap(eps);
            for i in 1..arms.len() {
                let mu_i = arms[i].mean();
                let tau_i = arms[i].jensen_gap(eps);
                let direct = report.privatized_means[0] - report.privatized_means[i];
                let formula = ((eps * mu_i).exp() * ((eps * (mu1 - mu_i)).exp() - 1.0) + tau1
                    - tau_i)
                    / (eps.exp() + 1.0);
                assert!(
                    (direct - formula).abs() < 1e-12,
                    "eps={eps} arm={i}: {direct} vs {formula}"
                );
            }
        }
    }

    #[test]
    fn degenerate_environments_are_refused() {
        let tied = bernoulli_env(&[0.7, 0.7, 0.3]);
        let m = Mechanism::linear(budget(1.0));
        assert!(matches!(
            privatized_gap(&m, &tied).unwrap_err(),
            BoundsError::DegenerateEnvironment { .. }
        ));

        let single = bernoulli_env(&[0.4]);
        assert!(matches!(
            ts_bound(&m, &single, 100.0, 0.1, 1.0).unwrap_err(),
            BoundsError::DegenerateEnvironment { .. }
        ));
        assert!(matches!(
            ucb_bound(&m, &tied, 100.0).unwrap_err(),
            BoundsError::DegenerateEnvironment { .. }
        ));
    }

    #[test]
    fn inverted_ordering_is_surfaced_and_refused() {
        // A nearly-deterministic arm with mean 0.51 against Bernoulli(0.5):
        // the higher second moment of the Bernoulli flips the quadratic
        // privatized ordering at b = 0.
        let env = BanditEnvironment::new(vec![
            ArmDistribution::uniform_interval(0.5, 0.52).unwrap(),
            bernoulli(0.5),
        ])
        .unwrap();
        let m = Mechanism::quadratic(budget(1.0), 0.0).unwrap();
        let report = privatized_gap(&m, &env).unwrap();
        assert!(report.ordering_inverted());
        assert_eq!(report.true_optimal_arm, 0);
        assert_eq!(report.privatized_optimal_arm, 1);
        assert!(report.privatized_gaps[0] > 0.0);

        assert!(matches!(
            ts_bound(&m, &env, 100.0, 0.1, 1.0).unwrap_err(),
            BoundsError::OrderingInverted { .. }
        ));
        assert!(matches!(
            ucb_bound(&m, &env, 100.0).unwrap_err(),
            BoundsError::OrderingInverted { .. }
        ));
    }

    #[test]
    fn ts_bound_linear_limit_case() {
        // Infinite budget, two arms with gap 0.3, T = e (unit log),
        // vanishing gamma: leading term 1/(2*0.3), constant term 2/(2*0.3).
        let env = bernoulli_env(&[0.9, 0.6]);
        let m = Mechanism::linear(PrivacyBudget::infinite());
        let report = ts_bound(&m, &env, std::f64::consts::E, 1e-9, 1.0).unwrap();
        assert!((report.log_term_total - 1.0 / 0.6).abs() < 1e-6);
        assert!((report.constant_term - 2.0 / 0.6).abs() < 1e-6);
        assert!((report.total - 5.0).abs() < 1e-6);
    }

    #[test]
    fn ts_bound_linear_matches_independent_evaluation() {
        // Recompute the closed form from scratch over the benchmark means.
        let mut means = vec![0.9];
        means.extend(std::iter::repeat_n(0.8, 5));
        means.extend(std::iter::repeat_n(0.7, 5));
        means.extend(std::iter::repeat_n(0.6, 5));
        means.extend(std::iter::repeat_n(0.5, 4));
        let env = bernoulli_env(&means);

        let (eps, t, gamma, c0) = (1.0, 1e5, 0.1, 1.0);
        let report = ts_bound(&Mechanism::linear(budget(eps)), &env, t, gamma, c0).unwrap();

        let e: f64 = eps.exp();
        let factor = ((e + 1.0) / (e - 1.0)).powi(2);
        let mut log_sum = 0.0;
        let mut min_gap = f64::INFINITY;
        for &mu in &means[1..] {
            let gap = 0.9 - mu;
            log_sum += t.ln() / (2.0 * gap);
            min_gap = min_gap.min(gap);
        }
        let expected =
            (1.0 + gamma).powi(2) * factor * (log_sum + c0 * means.len() as f64 / (2.0 * min_gap));
        assert!(
            ((report.total - expected) / expected).abs() < 1e-12,
            "{} vs {}",
            report.total,
            expected
        );
    }

    #[test]
    fn quadratic_at_linear_shape_equals_nonlinear_form_on_linear_gaps() {
        let env = mixed_env();
        for eps in [0.5f64, 1.0, 2.0] {
            let e: f64 = eps.exp();
            let quad = Mechanism::quadratic(budget(eps), e - 1.0).unwrap();
            let lin = Mechanism::linear(budget(eps));
            let quad_bound = ts_bound(&quad, &env, 1e4, 0.1, 1.0).unwrap();
            let lin_gaps = privatized_gap(&lin, &env).unwrap();
            let lin_form = ts_bound_from_gaps(&lin_gaps, 1e4, 0.1, 1.0).unwrap();
            assert!(
                (quad_bound.total - lin_form.total).abs() < 1e-12 * lin_form.total,
                "eps={eps}: {} vs {}",
                quad_bound.total,
                lin_form.total
            );
        }
    }

    #[test]
    fn ucb_bound_hand_arithmetic() {
        let env = bernoulli_env(&[0.9, 0.6]);
        let additive = 1.0 + std::f64::consts::PI.powi(2) / 3.0;

        // Identity gaps (infinite budget), T = e.
        let m = Mechanism::linear(PrivacyBudget::infinite());
        let report = ucb_bound(&m, &env, std::f64::consts::E).unwrap();
        let expect = (8.0 / 0.09 + additive) * 0.3;
        assert!((report.total - expect).abs() < 1e-9);
        assert!((expect - 27.953_627).abs() < 1e-5);

        // Linear eps = 1, same environment, T = e.
        let m = Mechanism::linear(budget(1.0));
        let report = ucb_bound(&m, &env, std::f64::consts::E).unwrap();
        let e = 1.0f64.exp();
        let g = (e - 1.0) / (e + 1.0) * 0.3;
        let expect = (8.0 / (g * g) + additive) * 0.3;
        assert!(((report.total - expect) / expect).abs() < 1e-12);
    }

    #[test]
    fn ucb_bound_at_unit_horizon_drops_log_term() {
        let env = bernoulli_env(&[0.9, 0.6, 0.5]);
        let m = Mechanism::linear(budget(1.0));
        let report = ucb_bound(&m, &env, 1.0).unwrap();
        let additive = 1.0 + std::f64::consts::PI.powi(2) / 3.0;
        let expect = additive * (0.3 + 0.4);
        assert!((report.total - expect).abs() < 1e-12);
        assert_eq!(report.log_term_total, 0.0);
    }

    #[test]
    fn parameter_validation() {
        let env = bernoulli_env(&[0.9, 0.6]);
        let m = Mechanism::linear(budget(1.0));
        assert!(matches!(
            ts_bound(&m, &env, 100.0, 0.0, 1.0).unwrap_err(),
            BoundsError::InvalidGamma(_)
        ));
        assert!(matches!(
            ts_bound(&m, &env, 100.0, 1.0, 1.0).unwrap_err(),
            BoundsError::InvalidGamma(_)
        ));
        assert!(matches!(
            ts_bound(&m, &env, 0.5, 0.1, 1.0).unwrap_err(),
            BoundsError::InvalidHorizon(_)
        ));
        assert!(matches!(
            ts_bound(&m, &env, 100.0, 0.1, -1.0).unwrap_err(),
            BoundsError::InvalidConstant(_)
        ));
        assert!(matches!(
            ucb_bound(&m, &env, f64::NAN).unwrap_err(),
            BoundsError::InvalidHorizon(_)
        ));
    }

    #[test]
    fn linear_ts_bound_decreases_in_eps_toward_nonprivate() {
        let env = bernoulli_env(&[0.9, 0.6, 0.5]);
        let t = 1e4;
        let mut prev = f64::INFINITY;
        for eps in [0.1, 0.5, 1.0, 2.0, 5.0] {
            let b = ts_bound(&Mechanism::linear(budget(eps)), &env, t, 0.1, 1.0)
                .unwrap()
                .total;
            assert!(b < prev, "bound not decreasing at eps = {eps}");
            prev = b;
        }
        let far = ts_bound(&Mechanism::linear(budget(50.0)), &env, t, 0.1, 1.0)
            .unwrap()
            .total;
        let baseline = ts_bound(
            &Mechanism::linear(PrivacyBudget::infinite()),
            &env,
            t,
            0.1,
            1.0,
        )
        .unwrap()
        .total;
        assert!(((far - baseline) / baseline).abs() < 1e-9);
        assert!(prev >= baseline);
    }

    #[test]
    fn report_total_is_rows_plus_constant_and_csv_writes() {
        let env = mixed_env();
        let m = Mechanism::exponential(budget(1.0));
        let report = ts_bound(&m, &env, 1e4, 0.1, 1.0).unwrap();
        let sum: f64 = report.rows.iter().map(|r| r.term).sum();
        assert!((report.total - (sum + report.constant_term)).abs() < 1e-12 * report.total);

        let mut buf = Vec::new();
        report.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("arm,true_gap,privatized_gap,term"));
        assert!(text.contains("total"));
        assert!(!report.to_string().is_empty());
    }

    proptest! {
        #[test]
        fn bounds_positive_and_increasing_in_horizon(
            eps in 0.2f64..4.0,
            gap in 0.05f64..0.8,
            gamma in 0.01f64..0.9,
        ) {
            let env = bernoulli_env(&[0.9, 0.9 - gap]);
            let lin = Mechanism::linear(budget(eps));
            let exp = Mechanism::exponential(budget(eps));
            let ladder = [2.0, 10.0, 1e3, 1e6];
            for mech in [lin, exp] {
                let mut prev_ts = 0.0;
                let mut prev_ucb = 0.0;
                for t in ladder {
                    let ts = ts_bound(&mech, &env, t, gamma, 1.0).unwrap().total;
                    let ucb = ucb_bound(&mech, &env, t).unwrap().total;
                    prop_assert!(ts > 0.0 && ts.is_finite());
                    prop_assert!(ucb > 0.0 && ucb.is_finite());
                    prop_assert!(ts > prev_ts);
                    prop_assert!(ucb > prev_ucb);
                    prev_ts = ts;
                    prev_ucb = ucb;
                }
            }
        }
    }
}
