//! Scalar penalty families and their analytic bounds.
//!
//! Every family is written as a λ-free primitive `P(β)`; the regularized
//! objective is always `loss + λ·Σⱼ P(βⱼ)`. Formulas:
//!
//! | family       | `P(β)`                                                        |
//! |--------------|---------------------------------------------------------------|
//! | none         | `0`                                                           |
//! | lasso        | `|β|`                                                         |
//! | ridge        | `β²`                                                          |
//! | bridge       | `|β|^q`                                                       |
//! | elastic net  | `mix·|β| + (1 − mix)·β²/2`                                    |
//! | scad         | `|β|` on `[0,1]`, `(2a|β| − β² − 1)/(2(a − 1))` on `(1,a]`, `(a + 1)/2` beyond |
//! | mcp          | `|β| − β²/(2b)` on `[0,b]`, `b/2` beyond                      |
//! | laplace      | `1 − exp(−|β|/ε)`                                             |
//! | arctan       | `(2/π)·atan(γ|β|)`                                            |
//! | gaussian     | `1 − exp(−κβ²)`                                               |
//!
//! SCAD and MCP use a unit threshold so that the outer λ is the only scale.

use core::f64::consts::{FRAC_2_PI, FRAC_1_SQRT_2};
use core::fmt;

use crate::math;

/// Default Gaussian scale κ.
pub const DEFAULT_KAPPA: f64 = 10.0;
/// Default SCAD concavity parameter.
pub const DEFAULT_SCAD_A: f64 = 3.7;
/// Default MCP concavity parameter.
pub const DEFAULT_MCP_B: f64 = 5.0;
/// Default Laplace width.
pub const DEFAULT_LAPLACE_EPSILON: f64 = 1e-7;
/// Default arctan slope.
pub const DEFAULT_ARCTAN_GAMMA: f64 = 1.0;
/// Default bridge exponent.
pub const DEFAULT_BRIDGE_Q: f64 = 0.5;
/// Default elastic-net mixing weight on the L1 part.
pub const DEFAULT_ELASTIC_MIX: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    None,
    Lasso,
    Ridge,
    Bridge,
    ElasticNet,
    Scad,
    Mcp,
    Laplace,
    Arctan,
    Gaussian,
}

impl Family {
    pub const ALL: [Family; 10] = [
        Family::None,
        Family::Lasso,
        Family::Ridge,
        Family::Bridge,
        Family::ElasticNet,
        Family::Scad,
        Family::Mcp,
        Family::Laplace,
        Family::Arctan,
        Family::Gaussian,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::None => "none",
            Family::Lasso => "lasso",
            Family::Ridge => "ridge",
            Family::Bridge => "bridge",
            Family::ElasticNet => "elastic_net",
            Family::Scad => "scad",
            Family::Mcp => "mcp",
            Family::Laplace => "laplace",
            Family::Arctan => "arctan",
            Family::Gaussian => "gaussian",
        }
    }

    /// Parses the names produced by [`Family::name`].
    pub fn from_name(name: &str) -> Option<Family> {
        Family::ALL.into_iter().find(|f| f.name() == name)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum PenaltyError {
    #[error("invalid {name} = {value} for the {family} penalty: {requirement}")]
    InvalidHyperparameter {
        family: Family,
        name: &'static str,
        value: f64,
        requirement: &'static str,
    },
    #[error("penalty argument must be finite, got {0}")]
    NonFinite(f64),
    #[error("the {0} penalty is not differentiable at 0 and no subgradient convention was requested")]
    Singularity(Family),
}

/// How [`Penalty::grad`] treats the kink at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KinkRule {
    /// Evaluating the derivative at a kink is an error.
    #[default]
    Strict,
    /// Use the subgradient 0 at a kink.
    ZeroAtKink,
}

/// A penalty family together with all hyperparameters. Fields that do not
/// belong to `family` are ignored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltySpec {
    pub family: Family,
    pub kappa: f64,
    pub a: f64,
    pub b: f64,
    pub epsilon: f64,
    pub gamma: f64,
    pub q: f64,
    pub mix: f64,
}

impl PenaltySpec {
    pub fn new(family: Family) -> Self {
        Self {
            family,
            kappa: DEFAULT_KAPPA,
            a: DEFAULT_SCAD_A,
            b: DEFAULT_MCP_B,
            epsilon: DEFAULT_LAPLACE_EPSILON,
            gamma: DEFAULT_ARCTAN_GAMMA,
            q: DEFAULT_BRIDGE_Q,
            mix: DEFAULT_ELASTIC_MIX,
        }
    }

    pub fn none() -> Self {
        Self::new(Family::None)
    }

    pub fn lasso() -> Self {
        Self::new(Family::Lasso)
    }

    pub fn ridge() -> Self {
        Self::new(Family::Ridge)
    }

    pub fn gaussian(kappa: f64) -> Self {
        Self { kappa, ..Self::new(Family::Gaussian) }
    }

    pub fn scad(a: f64) -> Self {
        Self { a, ..Self::new(Family::Scad) }
    }

    pub fn mcp(b: f64) -> Self {
        Self { b, ..Self::new(Family::Mcp) }
    }

    pub fn laplace(epsilon: f64) -> Self {
        Self { epsilon, ..Self::new(Family::Laplace) }
    }

    pub fn arctan(gamma: f64) -> Self {
        Self { gamma, ..Self::new(Family::Arctan) }
    }

    pub fn bridge(q: f64) -> Self {
        Self { q, ..Self::new(Family::Bridge) }
    }

    pub fn elastic_net(mix: f64) -> Self {
        Self { mix, ..Self::new(Family::ElasticNet) }
    }

    /// Checks the hyperparameters that matter for `family`.
    pub fn validate(&self) -> Result<Penalty, PenaltyError> {
        let family = self.family;
        let positive = |name: &'static str, value: f64| {
            if value.is_finite() && value > 0.0 {
                Ok(())
            } else {
                Err(PenaltyError::InvalidHyperparameter {
                    family,
                    name,
                    value,
                    requirement: "must be finite and > 0",
                })
            }
        };
        match family {
            Family::None | Family::Lasso | Family::Ridge => {}
            Family::Gaussian => positive("kappa", self.kappa)?,
            Family::Mcp => positive("b", self.b)?,
            Family::Laplace => positive("epsilon", self.epsilon)?,
            Family::Arctan => positive("gamma", self.gamma)?,
            Family::Bridge => positive("q", self.q)?,
            Family::Scad => {
                if !(self.a.is_finite() && self.a > 2.0) {
                    return Err(PenaltyError::InvalidHyperparameter {
                        family,
                        name: "a",
                        value: self.a,
                        requirement: "must be finite and > 2",
                    });
                }
            }
            Family::ElasticNet => {
                if !(0.0..=1.0).contains(&self.mix) {
                    return Err(PenaltyError::InvalidHyperparameter {
                        family,
                        name: "mix",
                        value: self.mix,
                        requirement: "must lie in [0, 1]",
                    });
                }
            }
        }
        Ok(Penalty { spec: *self })
    }
}

impl Default for PenaltySpec {
    fn default() -> Self {
        Self::gaussian(DEFAULT_KAPPA)
    }
}

impl fmt::Display for PenaltySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            Family::Gaussian => write!(f, "gaussian(kappa={})", self.kappa),
            Family::Scad => write!(f, "scad(a={})", self.a),
            Family::Mcp => write!(f, "mcp(b={})", self.b),
            Family::Laplace => write!(f, "laplace(epsilon={})", self.epsilon),
            Family::Arctan => write!(f, "arctan(gamma={})", self.gamma),
            Family::Bridge => write!(f, "bridge(q={})", self.q),
            Family::ElasticNet => write!(f, "elastic_net(mix={})", self.mix),
            other => f.write_str(other.name()),
        }
    }
}

/// Global analytic constants of a scalar penalty. `f64::INFINITY` marks a
/// quantity that has no finite value over the whole real line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltyBounds {
    /// `sup |P(x) − P(y)| / |x − y|` over ℝ.
    pub lipschitz: f64,
    /// `sup P(β)` over ℝ.
    pub sup_value: f64,
    /// Half-width of the largest interval around 0 on which `P` is convex.
    pub convexity_radius: f64,
}

/// A penalty whose hyperparameters have been validated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Penalty {
    spec: PenaltySpec,
}

impl Penalty {
    pub fn spec(&self) -> &PenaltySpec {
        &self.spec
    }

    pub fn family(&self) -> Family {
        self.spec.family
    }

    /// True when `P` is not differentiable at 0.
    pub fn has_kink_at_origin(&self) -> bool {
        match self.spec.family {
            Family::None | Family::Ridge | Family::Gaussian => false,
            Family::Bridge => self.spec.q <= 1.0,
            Family::ElasticNet => self.spec.mix > 0.0,
            Family::Lasso | Family::Scad | Family::Mcp | Family::Laplace | Family::Arctan => true,
        }
    }

    /// `P(β)`. The argument is assumed finite; NaN propagates.
    pub fn value(&self, beta: f64) -> f64 {
        let s = &self.spec;
        let t = math::abs(beta);
        match s.family {
            Family::None => 0.0,
            Family::Lasso => t,
            Family::Ridge => beta * beta,
            Family::Bridge => math::powf(t, s.q),
            Family::ElasticNet => s.mix * t + 0.5 * (1.0 - s.mix) * beta * beta,
            Family::Scad => {
                if t <= 1.0 {
                    t
                } else if t <= s.a {
                    (2.0 * s.a * t - t * t - 1.0) / (2.0 * (s.a - 1.0))
                } else {
                    0.5 * (s.a + 1.0)
                }
            }
            Family::Mcp => {
                if t <= s.b {
                    t - t * t / (2.0 * s.b)
                } else {
                    0.5 * s.b
                }
            }
            Family::Laplace => -math::expm1(-t / s.epsilon),
            Family::Arctan => FRAC_2_PI * math::atan(s.gamma * t),
            Family::Gaussian => -math::expm1(-s.kappa * beta * beta),
        }
    }

    /// `P′(β)`, an odd function of β.
    pub fn grad(&self, beta: f64, rule: KinkRule) -> Result<f64, PenaltyError> {
        if beta == 0.0 {
            if self.has_kink_at_origin() && rule == KinkRule::Strict {
                return Err(PenaltyError::Singularity(self.spec.family));
            }
            return Ok(0.0);
        }
        Ok(self.grad_nonzero(beta))
    }

    /// `P′(β)` with the zero subgradient at a kink. Never fails.
    pub fn grad_or_zero(&self, beta: f64) -> f64 {
        if beta == 0.0 {
            0.0
        } else {
            self.grad_nonzero(beta)
        }
    }

    fn grad_nonzero(&self, beta: f64) -> f64 {
        let s = &self.spec;
        let t = math::abs(beta);
        let sign = if beta < 0.0 { -1.0 } else { 1.0 };
        let magnitude = match s.family {
            Family::None => 0.0,
            Family::Lasso => 1.0,
            Family::Ridge => 2.0 * t,
            Family::Bridge => s.q * math::powf(t, s.q - 1.0),
            Family::ElasticNet => s.mix + (1.0 - s.mix) * t,
            Family::Scad => {
                if t <= 1.0 {
                    1.0
                } else if t <= s.a {
                    (s.a - t) / (s.a - 1.0)
                } else {
                    0.0
                }
            }
            Family::Mcp => {
                if t <= s.b {
                    1.0 - t / s.b
                } else {
                    0.0
                }
            }
            Family::Laplace => math::exp(-t / s.epsilon) / s.epsilon,
            Family::Arctan => FRAC_2_PI * s.gamma / (1.0 + s.gamma * s.gamma * t * t),
            Family::Gaussian => 2.0 * s.kappa * t * math::exp(-s.kappa * t * t),
        };
        sign * magnitude
    }

    /// `P(to) − P(from)`, evaluated without cancellation where the family allows it.
    pub fn increment(&self, from: f64, to: f64) -> f64 {
        let s = &self.spec;
        match s.family {
            Family::None => 0.0,
            Family::Lasso => math::abs(to) - math::abs(from),
            Family::Ridge => (to - from) * (to + from),
            Family::ElasticNet => {
                s.mix * (math::abs(to) - math::abs(from))
                    + 0.5 * (1.0 - s.mix) * (to - from) * (to + from)
            }
            Family::Gaussian => exp_neg_difference(
                s.kappa * from * from,
                s.kappa * (to - from) * (to + from),
            ),
            Family::Laplace => {
                let (f, t) = (math::abs(from), math::abs(to));
                exp_neg_difference(f / s.epsilon, (t - f) / s.epsilon)
            }
            _ => self.value(to) - self.value(from),
        }
    }

    /// Sum of `P` over the coordinates of `beta`.
    pub fn sum(&self, beta: &[f64]) -> f64 {
        beta.iter().map(|&b| self.value(b)).sum()
    }

    pub fn bounds(&self) -> PenaltyBounds {
        let s = &self.spec;
        let inf = f64::INFINITY;
        let (lipschitz, sup_value, convexity_radius) = match s.family {
            Family::None => (0.0, 0.0, inf),
            Family::Lasso => (1.0, inf, inf),
            Family::Ridge => (inf, inf, inf),
            Family::Bridge => {
                if s.q == 1.0 {
                    (1.0, inf, inf)
                } else if s.q > 1.0 {
                    (inf, inf, inf)
                } else {
                    (inf, inf, 0.0)
                }
            }
            Family::ElasticNet => {
                if s.mix == 1.0 {
                    (1.0, inf, inf)
                } else {
                    (inf, inf, inf)
                }
            }
            Family::Scad => (1.0, 0.5 * (s.a + 1.0), 1.0),
            Family::Mcp => (1.0, 0.5 * s.b, 0.0),
            Family::Laplace => (1.0 / s.epsilon, 1.0, 0.0),
            Family::Arctan => (FRAC_2_PI * s.gamma, 1.0, 0.0),
            Family::Gaussian => {
                let root = math::sqrt(2.0 * s.kappa);
                // P″ = 2κ·e^{−κβ²}(1 − 2κβ²) changes sign at 1/√(2κ), where P′ peaks.
                (root * math::exp(-0.5), 1.0, 1.0 / root)
            }
        };
        PenaltyBounds { lipschitz, sup_value, convexity_radius }
    }

    /// `sup |P′(β)|` over `|β| ≤ radius`; finite for families whose global
    /// constant is not.
    pub fn lipschitz_on(&self, radius: f64) -> f64 {
        let s = &self.spec;
        let r = math::abs(radius);
        match s.family {
            Family::Ridge => 2.0 * r,
            Family::Bridge if s.q > 1.0 => s.q * math::powf(r, s.q - 1.0),
            Family::ElasticNet => s.mix + (1.0 - s.mix) * r,
            Family::Gaussian => {
                let peak = FRAC_1_SQRT_2 / math::sqrt(s.kappa);
                if r >= peak {
                    self.bounds().lipschitz
                } else {
                    2.0 * s.kappa * r * math::exp(-s.kappa * r * r)
                }
            }
            _ => self.bounds().lipschitz,
        }
    }
}

/// `exp(−a) − exp(−(a + delta))` for `a >= 0`, accurate when `delta` is small.
fn exp_neg_difference(a: f64, delta: f64) -> f64 {
    if delta >= 0.0 {
        -math::exp(-a) * math::expm1(-delta)
    } else {
        math::exp(-(a + delta)) * math::expm1(delta)
    }
}

fn check_finite(beta: f64) -> Result<(), PenaltyError> {
    if beta.is_finite() {
        Ok(())
    } else {
        Err(PenaltyError::NonFinite(beta))
    }
}

/// `P(β)` for a spec that has not been validated yet.
pub fn penalty_value(spec: &PenaltySpec, beta: f64) -> Result<f64, PenaltyError> {
    let penalty = spec.validate()?;
    check_finite(beta)?;
    Ok(penalty.value(beta))
}

/// `P′(β)`; at a kink the result depends on `rule`.
pub fn penalty_grad(spec: &PenaltySpec, beta: f64, rule: KinkRule) -> Result<f64, PenaltyError> {
    let penalty = spec.validate()?;
    check_finite(beta)?;
    penalty.grad(beta, rule)
}

/// `Σⱼ P(βⱼ)`.
pub fn penalty_vector(spec: &PenaltySpec, beta: &[f64]) -> Result<f64, PenaltyError> {
    let penalty = spec.validate()?;
    for &b in beta {
        check_finite(b)?;
    }
    Ok(penalty.sum(beta))
}

pub fn penalty_bounds(spec: &PenaltySpec) -> Result<PenaltyBounds, PenaltyError> {
    Ok(spec.validate()?.bounds())
}
