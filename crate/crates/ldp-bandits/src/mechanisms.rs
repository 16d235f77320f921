//! Locally differentially private Bernoulli response mechanisms.
//!
//! A mechanism maps a bounded reward `r ∈ [0, 1]` to a single bit drawn with
//! response probability `p(r)`. Three response-probability families are
//! provided (linear, quadratic, exponential), each calibrated so that for any
//! two rewards `r, r'` and either output bit `y`,
//! `Pr(Y=y|r) <= e^eps * Pr(Y=y|r')`. The infinite-budget baseline degenerates
//! to `p(r) = r`, i.e. plain Bernoulli rounding of the reward.

use rand::Rng;
use serde::Serialize;
use std::fmt;

/// Slack for floating-point comparisons in the guarantee checks. The boundary
/// conditions hold with equality for all three families, so exact `>=` / `<=`
/// tests need a hair of tolerance.
const CHECK_TOL: f64 = 1e-12;

/// Errors from mechanism construction and evaluation.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MechanismError {
    /// Privacy budget must be a positive real (or the infinite baseline).
    #[error("privacy budget must be positive, got {0}")]
    InvalidEpsilon(f64),
    /// Quadratic shape parameter outside its admissible interval.
    #[error("quadratic shape b = {b} outside [0, {max}] for epsilon = {epsilon}")]
    ShapeOutOfRange { b: f64, epsilon: f64, max: f64 },
    /// Rewards must stay in the unit interval; out-of-range inputs are
    /// rejected rather than clamped so environment bugs surface.
    #[error("reward {0} outside [0, 1]")]
    RewardOutOfRange(f64),
    /// The privacy ratio is unbounded when the budget is infinite.
    #[error("worst-case ratio is undefined for the infinite-budget baseline")]
    InfiniteBudget,
    /// Evaluation grids need at least this many points.
    #[error("grid must have at least {min} points, got {got}")]
    GridTooSmall { min: usize, got: usize },
}

/// Privacy budget `eps` in nats. `eps > 0`, with a distinguished infinite
/// value for the non-private baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrivacyBudget(f64);

impl PrivacyBudget {
    /// A finite positive budget.
    pub fn finite(epsilon: f64) -> Result<Self, MechanismError> {
        if epsilon.is_finite() && epsilon > 0.0 {
            Ok(PrivacyBudget(epsilon))
        } else {
            Err(MechanismError::InvalidEpsilon(epsilon))
        }
    }

    /// The non-private baseline (`p(r) = r`).
    pub fn infinite() -> Self {
        PrivacyBudget(f64::INFINITY)
    }

    /// Parses a decimal or the literal `inf`/`infinity` (case-insensitive).
    pub fn parse(s: &str) -> Result<Self, MechanismError> {
        let t = s.trim().to_ascii_lowercase();
        if t == "inf" || t == "infinity" || t == "∞" {
            return Ok(Self::infinite());
        }
        let eps: f64 = t
            .parse()
            .map_err(|_| MechanismError::InvalidEpsilon(f64::NAN))?;
        if eps.is_infinite() && eps > 0.0 {
            Ok(Self::infinite())
        } else {
            Self::finite(eps)
        }
    }

    pub fn epsilon(self) -> f64 {
        self.0
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    /// `e^eps` (infinite for the baseline).
    pub fn exp_epsilon(self) -> f64 {
        self.0.exp()
    }
}

impl fmt::Display for PrivacyBudget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

/// Response-probability family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum MechanismKind {
    /// `p(r) = [(e^eps - 1) r + 1] / (1 + e^eps)`
    Linear,
    /// `p(r) = [(e^eps - 1 - b) r^2 + b r + 1] / (1 + e^eps)`, `b ∈ [0, 2(e^eps - 1)]`
    Quadratic {
        /// Shape parameter; `b = e^eps - 1` recovers the linear family.
        b: f64,
    },
    /// `p(r) = e^{eps r} / (e^eps + 1)`
    Exponential,
}

impl MechanismKind {
    pub fn name(&self) -> &'static str {
        match self {
            MechanismKind::Linear => "linear",
            MechanismKind::Quadratic { .. } => "quadratic",
            MechanismKind::Exponential => "exponential",
        }
    }
}

/// One privatized observation: a single bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrivatizedReward(bool);

impl PrivatizedReward {
    pub fn one() -> Self {
        PrivatizedReward(true)
    }

    pub fn zero() -> Self {
        PrivatizedReward(false)
    }

    pub fn is_one(self) -> bool {
        self.0
    }

    pub fn bit(self) -> u8 {
        u8::from(self.0)
    }
}

/// A privatizing mechanism: a response-probability family plus a budget.
///
/// Immutable after construction; shareable across threads. Perturbation takes
/// the caller's RNG so each trial keeps its own stream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Mechanism {
    kind: MechanismKind,
    budget: PrivacyBudget,
}

impl Mechanism {
    pub fn linear(budget: PrivacyBudget) -> Self {
        Mechanism {
            kind: MechanismKind::Linear,
            budget,
        }
    }

    /// Quadratic mechanism; rejects `b` outside `[0, 2(e^eps - 1)]`.
    pub fn quadratic(budget: PrivacyBudget, b: f64) -> Result<Self, MechanismError> {
        let max = 2.0 * (budget.exp_epsilon() - 1.0);
        if !b.is_finite() || b < 0.0 || b > max {
            return Err(MechanismError::ShapeOutOfRange {
                b,
                epsilon: budget.epsilon(),
                max,
            });
        }
        Ok(Mechanism {
            kind: MechanismKind::Quadratic { b },
            budget,
        })
    }

    pub fn exponential(budget: PrivacyBudget) -> Self {
        Mechanism {
            kind: MechanismKind::Exponential,
            budget,
        }
    }

    pub fn kind(&self) -> MechanismKind {
        self.kind
    }

    pub fn budget(&self) -> PrivacyBudget {
        self.budget
    }

    pub fn epsilon(&self) -> f64 {
        self.budget.epsilon()
    }

    /// Shape parameter when quadratic.
    pub fn shape(&self) -> Option<f64> {
        match self.kind {
            MechanismKind::Quadratic { b } => Some(b),
            _ => None,
        }
    }

    /// Probability of emitting 1 given raw reward `r`.
    ///
    /// Rejects `r` outside `[0, 1]`. With an infinite budget this is the
    /// identity `p(r) = r`, the pointwise limit of the linear family.
    pub fn response_probability(&self, r: f64) -> Result<f64, MechanismError> {
        if !(0.0..=1.0).contains(&r) {
            return Err(MechanismError::RewardOutOfRange(r));
        }
        if !self.budget.is_finite() {
            return Ok(r);
        }
        let e = self.budget.exp_epsilon();
        let p = match self.kind {
            MechanismKind::Linear => ((e - 1.0) * r + 1.0) / (1.0 + e),
            MechanismKind::Quadratic { b } => ((e - 1.0 - b) * r * r + b * r + 1.0) / (1.0 + e),
            MechanismKind::Exponential => (self.budget.epsilon() * r).exp() / (e + 1.0),
        };
        Ok(p)
    }

    /// Draws the privatized bit: 1 with probability `p(r)`, else 0.
    ///
    /// Consumes exactly one uniform draw from `rng`, which keeps seeded traces
    /// bit-reproducible.
    pub fn perturb<R: Rng + ?Sized>(
        &self,
        r: f64,
        rng: &mut R,
    ) -> Result<PrivatizedReward, MechanismError> {
        let p = self.response_probability(r)?;
        let u: f64 = rng.random();
        Ok(if u < p {
            PrivatizedReward::one()
        } else {
            PrivatizedReward::zero()
        })
    }

    /// Checks the three sufficient conditions for the eps-LDP guarantee on a
    /// uniform grid over `[0, 1]`:
    ///
    /// 1. `p(0) >= 1/(e^eps + 1)`
    /// 2. `p(1) <= e^eps/(e^eps + 1)`
    /// 3. `p` monotone non-decreasing
    pub fn verify_ldp_conditions(
        &self,
        grid_points: usize,
    ) -> Result<ConditionReport, MechanismError> {
        if grid_points < 2 {
            return Err(MechanismError::GridTooSmall {
                min: 2,
                got: grid_points,
            });
        }
        let e = self.budget.exp_epsilon();
        // With eps = inf these bounds become 0 and 1, which the identity
        // mechanism meets.
        let lower = 1.0 / (e + 1.0);
        let upper = if e.is_infinite() { 1.0 } else { e / (e + 1.0) };

        let grid = uniform_grid(grid_points);
        let probs: Vec<f64> = grid
            .iter()
            .map(|&r| self.response_probability(r).expect("grid point in [0,1]"))
            .collect();

        let p0 = self.response_probability(0.0)?;
        let p1 = self.response_probability(1.0)?;

        // Monotonicity: locate the worst adjacent increment.
        let mut worst_idx = 0;
        let mut worst_inc = f64::INFINITY;
        for k in 0..grid.len() - 1 {
            let inc = probs[k + 1] - probs[k];
            if inc < worst_inc {
                worst_inc = inc;
                worst_idx = k;
            }
        }

        let checks = vec![
            ConditionCheck {
                condition: "p(0) >= 1/(e^eps+1)".to_string(),
                passed: p0 >= lower - CHECK_TOL,
                witness_r: 0.0,
                lhs: p0,
                rhs: lower,
            },
            ConditionCheck {
                condition: "p(1) <= e^eps/(e^eps+1)".to_string(),
                passed: p1 <= upper + CHECK_TOL,
                witness_r: 1.0,
                lhs: p1,
                rhs: upper,
            },
            ConditionCheck {
                condition: "p monotone non-decreasing".to_string(),
                passed: worst_inc >= -CHECK_TOL,
                witness_r: grid[worst_idx],
                lhs: probs[worst_idx],
                rhs: probs[worst_idx + 1],
            },
        ];

        Ok(ConditionReport {
            mechanism: self.to_string(),
            epsilon: self.budget.epsilon(),
            grid_points,
            checks,
        })
    }

    /// Maximum of `Pr(Y=y|r) / Pr(Y=y|r')` over `y ∈ {0, 1}` and grid pairs.
    ///
    /// For an eps-LDP mechanism the result is at most `e^eps` (plus float
    /// noise). Undefined for the infinite baseline, where `p(0) = 0` makes the
    /// ratio blow up by design.
    pub fn worst_case_ratio(&self, grid_points: usize) -> Result<f64, MechanismError> {
        if !self.budget.is_finite() {
            return Err(MechanismError::InfiniteBudget);
        }
        if grid_points < 1 {
            return Err(MechanismError::GridTooSmall {
                min: 1,
                got: grid_points,
            });
        }
        let mut p_min = f64::INFINITY;
        let mut p_max = f64::NEG_INFINITY;
        for r in uniform_grid(grid_points) {
            let p = self.response_probability(r)?;
            p_min = p_min.min(p);
            p_max = p_max.max(p);
        }
        // Max over pairs reduces to the grid extremes: y = 1 pits the largest
        // p against the smallest, y = 0 the reverse.
        let ratio_one = p_max / p_min;
        let ratio_zero = (1.0 - p_min) / (1.0 - p_max);
        Ok(ratio_one.max(ratio_zero))
    }
}

impl fmt::Display for Mechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            MechanismKind::Quadratic { b } => {
                write!(f, "quadratic(eps={}, b={})", self.budget, b)
            }
            kind => write!(f, "{}(eps={})", kind.name(), self.budget),
        }
    }
}

/// Uniform grid over `[0, 1]`; a single-point grid degenerates to `{0}`.
fn uniform_grid(points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![0.0];
    }
    let last = (points - 1) as f64;
    (0..points).map(|i| i as f64 / last).collect()
}

/// One verified condition: `lhs` vs `rhs` at the witness point.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionCheck {
    pub condition: String,
    pub passed: bool,
    pub witness_r: f64,
    pub lhs: f64,
    pub rhs: f64,
}

/// Grid verification outcome for one mechanism.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub mechanism: String,
    pub epsilon: f64,
    pub grid_points: usize,
    pub checks: Vec<ConditionCheck>,
}

impl ConditionReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for ConditionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "LDP conditions for {} on a {}-point grid:",
            self.mechanism, self.grid_points
        )?;
        for c in &self.checks {
            writeln!(
                f,
                "  [{}] {:<30} lhs={:.12} rhs={:.12} at r={}",
                if c.passed { "PASS" } else { "FAIL" },
                c.condition,
                c.lhs,
                c.rhs,
                c.witness_r
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::{stream_rng, StreamRole};
    use proptest::prelude::*;

    fn ln3() -> PrivacyBudget {
        PrivacyBudget::finite(3.0f64.ln()).unwrap()
    }

    #[test]
    fn budget_rejects_nonpositive_and_nan() {
        assert!(PrivacyBudget::finite(0.0).is_err());
        assert!(PrivacyBudget::finite(-1.0).is_err());
        assert!(PrivacyBudget::finite(f64::NAN).is_err());
        assert!(PrivacyBudget::finite(f64::INFINITY).is_err());
        assert!(PrivacyBudget::finite(1e-9).is_ok());
    }

    #[test]
    fn budget_parses_decimal_and_inf() {
        assert_eq!(PrivacyBudget::parse("0.5").unwrap().epsilon(), 0.5);
        assert!(!PrivacyBudget::parse("inf").unwrap().is_finite());
        assert!(!PrivacyBudget::parse("Infinity").unwrap().is_finite());
        assert!(PrivacyBudget::parse("0").is_err());
        assert!(PrivacyBudget::parse("abc").is_err());
    }

    #[test]
    fn linear_boundary_and_midpoint_at_eps_ln3() {
        // e^eps = 3: p(0) = 1/4, p(1/2) = ((3-1)/2 + 1)/4 = 1/2.
        let m = Mechanism::linear(ln3());
        assert!((m.response_probability(0.0).unwrap() - 0.25).abs() < 1e-15);
        assert!((m.response_probability(0.5).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn exponential_boundary_value() {
        for eps in [0.1, 1.0, 2.5] {
            let m = Mechanism::exponential(PrivacyBudget::finite(eps).unwrap());
            let expect = eps.exp() / (eps.exp() + 1.0);
            assert!((m.response_probability(1.0).unwrap() - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn quadratic_with_b_eq_exp_minus_one_matches_linear() {
        for eps in [0.1, 0.5, 1.0, 2.0, 5.0] {
            let budget = PrivacyBudget::finite(eps).unwrap();
            let lin = Mechanism::linear(budget);
            let quad = Mechanism::quadratic(budget, eps.exp() - 1.0).unwrap();
            for i in 0..=1000 {
                let r = i as f64 / 1000.0;
                let pl = lin.response_probability(r).unwrap();
                let pq = quad.response_probability(r).unwrap();
                assert!((pl - pq).abs() < 1e-12, "eps={eps} r={r}: {pl} vs {pq}");
            }
        }
    }

    #[test]
    fn quadratic_shape_range_is_enforced() {
        let budget = PrivacyBudget::finite(1.0).unwrap();
        let max = 2.0 * (1.0f64.exp() - 1.0);
        assert!(Mechanism::quadratic(budget, 0.0).is_ok());
        assert!(Mechanism::quadratic(budget, max).is_ok());
        assert!(Mechanism::quadratic(budget, max + 1e-9).is_err());
        assert!(Mechanism::quadratic(budget, -0.1).is_err());
        assert!(Mechanism::quadratic(budget, f64::NAN).is_err());
    }

    #[test]
    fn out_of_range_rewards_are_rejected_not_clamped() {
        let m = Mechanism::linear(PrivacyBudget::finite(1.0).unwrap());
        for bad in [-0.1, 1.1, f64::NAN, f64::INFINITY] {
            assert!(m.response_probability(bad).is_err(), "accepted r = {bad}");
            let mut rng = stream_rng(0, 0, StreamRole::Mechanism);
            assert!(m.perturb(bad, &mut rng).is_err());
        }
    }

    #[test]
    fn infinite_budget_is_identity() {
        let m = Mechanism::linear(PrivacyBudget::infinite());
        for r in [0.0, 0.3, 0.7, 1.0] {
            assert_eq!(m.response_probability(r).unwrap(), r);
        }
    }

    #[test]
    fn perturb_degenerate_probabilities() {
        let m = Mechanism::linear(PrivacyBudget::infinite());
        let mut rng = stream_rng(1, 0, StreamRole::Mechanism);
        for _ in 0..100 {
            assert!(m.perturb(1.0, &mut rng).unwrap().is_one());
            assert!(!m.perturb(0.0, &mut rng).unwrap().is_one());
        }
    }

    #[test]
    fn perturb_frequency_matches_response_probability() {
        // Linear, eps = ln 3, r = 1/2: p = 1/2; 3 standard errors at n = 1e6.
        let m = Mechanism::linear(ln3());
        let mut rng = stream_rng(7, 0, StreamRole::Mechanism);
        let n = 1_000_000u32;
        let ones: u32 = (0..n)
            .map(|_| u32::from(m.perturb(0.5, &mut rng).unwrap().bit()))
            .sum();
        let freq = f64::from(ones) / f64::from(n);
        let se = (0.25 / f64::from(n)).sqrt();
        assert!((freq - 0.5).abs() < 3.0 * se, "freq = {freq}");
    }

    #[test]
    fn perturb_frequency_matches_identity_baseline() {
        let m = Mechanism::exponential(PrivacyBudget::infinite());
        let mut rng = stream_rng(8, 0, StreamRole::Mechanism);
        let n = 1_000_000u32;
        let ones: u32 = (0..n)
            .map(|_| u32::from(m.perturb(0.7, &mut rng).unwrap().bit()))
            .sum();
        let freq = f64::from(ones) / f64::from(n);
        let se = (0.7 * 0.3 / f64::from(n)).sqrt();
        assert!((freq - 0.7).abs() < 3.0 * se, "freq = {freq}");
    }

    #[test]
    fn conditions_pass_for_linear_and_exponential() {
        let lin = Mechanism::linear(PrivacyBudget::finite(1.0).unwrap());
        let report = lin.verify_ldp_conditions(1001).unwrap();
        assert!(report.all_passed(), "{report}");

        let ex = Mechanism::exponential(PrivacyBudget::finite(0.7).unwrap());
        let report = ex.verify_ldp_conditions(1001).unwrap();
        assert!(report.all_passed(), "{report}");
        // p(0) hits the lower bound exactly.
        assert_eq!(report.checks[0].lhs, report.checks[0].rhs);
    }

    #[test]
    fn condition_report_serializes_and_prints() {
        let m = Mechanism::linear(PrivacyBudget::finite(1.0).unwrap());
        let report = m.verify_ldp_conditions(11).unwrap();
        let text = report.to_string();
        assert!(text.contains("PASS"));
        let json = serde_json::to_string(&report).unwrap();
        assert!(json.contains("witness_r"));
    }

    #[test]
    fn worst_case_ratio_attains_exp_eps() {
        let lin = Mechanism::linear(PrivacyBudget::finite(1.0).unwrap());
        let r = lin.worst_case_ratio(101).unwrap();
        assert!((r - 1.0f64.exp()).abs() < 1e-9, "ratio = {r}");

        let ex = Mechanism::exponential(PrivacyBudget::finite(0.5).unwrap());
        let r = ex.worst_case_ratio(101).unwrap();
        assert!((r - 0.5f64.exp()).abs() < 1e-9, "ratio = {r}");
    }

    #[test]
    fn worst_case_ratio_degenerate_grid_is_one() {
        let m = Mechanism::exponential(PrivacyBudget::finite(2.0).unwrap());
        assert_eq!(m.worst_case_ratio(1).unwrap(), 1.0);
    }

    #[test]
    fn worst_case_ratio_rejects_infinite_budget() {
        let m = Mechanism::linear(PrivacyBudget::infinite());
        assert_eq!(
            m.worst_case_ratio(11).unwrap_err(),
            MechanismError::InfiniteBudget
        );
    }

    fn all_mechanisms(eps: f64) -> Vec<Mechanism> {
        let budget = PrivacyBudget::finite(eps).unwrap();
        let e = eps.exp();
        vec![
            Mechanism::linear(budget),
            Mechanism::quadratic(budget, 0.0).unwrap(),
            Mechanism::quadratic(budget, e - 1.0).unwrap(),
            Mechanism::quadratic(budget, 2.0 * (e - 1.0)).unwrap(),
            Mechanism::exponential(budget),
        ]
    }

    #[test]
    fn probabilities_stay_strictly_interior_for_finite_budgets() {
        for eps in [0.1, 0.5, 1.0, 2.0, 5.0] {
            for m in all_mechanisms(eps) {
                for i in 0..=1000 {
                    let p = m.response_probability(i as f64 / 1000.0).unwrap();
                    assert!(p > 0.0 && p < 1.0, "{m} gave p = {p}");
                }
            }
        }
    }

    proptest! {
        #[test]
        fn ratio_bounded_by_exp_eps(eps_idx in 0usize..5, grid in 2usize..400) {
            let eps = [0.1, 0.5, 1.0, 2.0, 5.0][eps_idx];
            for m in all_mechanisms(eps) {
                let ratio = m.worst_case_ratio(grid).unwrap();
                prop_assert!(ratio <= eps.exp() + 1e-9, "{} ratio {}", m, ratio);
            }
        }

        #[test]
        fn response_probability_monotone_in_r(eps in 0.05f64..5.0, b_frac in 0.0f64..1.0) {
            let budget = PrivacyBudget::finite(eps).unwrap();
            let b = b_frac * 2.0 * (eps.exp() - 1.0);
            for m in [
                Mechanism::linear(budget),
                Mechanism::quadratic(budget, b).unwrap(),
                Mechanism::exponential(budget),
            ] {
                let mut prev = -1.0f64;
                for i in 0..=200 {
                    let p = m.response_probability(i as f64 / 200.0).unwrap();
                    prop_assert!(p >= prev - 1e-12, "{} not monotone", m);
                    prev = p;
                }
            }
        }
    }
}
