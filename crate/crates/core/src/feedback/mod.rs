//! Elastic demand, household DSM response, ISO real-time pricing, and the
//! closed price/load loop that ties them together.

mod simulate;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use simulate::{simulate, ClampEvent, Injection, SimulationTrace, TraceStep};

/// Constant-elasticity demand `L = a * (P + P_c)^eps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DemandCurve {
    pub scale: f64,
    pub elasticity: f64,
    #[serde(default)]
    pub market_cost: f64,
}

impl DemandCurve {
    pub fn new(scale: f64, elasticity: f64) -> Result<Self> {
        if !(scale > 0.0) || !elasticity.is_finite() {
            return Err(Error::Domain(format!("invalid demand curve a={scale} eps={elasticity}")));
        }
        Ok(Self {
            scale,
            elasticity,
            market_cost: 0.0,
        })
    }

    pub fn with_market_cost(mut self, market_cost: f64) -> Result<Self> {
        if !(market_cost >= 0.0) {
            return Err(Error::Domain(format!("market cost {market_cost} must be non-negative")));
        }
        self.market_cost = market_cost;
        Ok(self)
    }

    pub fn demand(&self, price: f64) -> Result<f64> {
        elastic_demand(self, price)
    }
}

pub fn elastic_demand(curve: &DemandCurve, price: f64) -> Result<f64> {
    if !(price > 0.0) {
        return Err(Error::Domain(format!("price {price} must be positive")));
    }
    Ok(curve.scale * (price + curve.market_cost).powf(curve.elasticity))
}

/// Household load with a fraction `kappa` of the base load `phi` under price
/// control: `kappa*phi*P^eps + (1 - kappa)*phi`.
pub fn household_dsm_load(phi: f64, kappa: f64, price: f64, eps_dsm: f64) -> Result<f64> {
    if !(price > 0.0) {
        return Err(Error::Domain(format!("price {price} must be positive")));
    }
    if kappa == 0.0 {
        return Ok(phi);
    }
    Ok(kappa * phi * price.powf(eps_dsm) + (1.0 - kappa) * phi)
}

pub fn aggregate(loads: &[f64]) -> f64 {
    loads.iter().sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Goal {
    /// Price toward the target directly.
    #[default]
    Goal1,
    /// Add the previous hour's shortfall `target[t-1] - load[t-1]` to the target.
    Goal2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PricePoint {
    pub price: f64,
    pub lstar: f64,
}

/// The ISO's pricing rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PricingRule {
    pub goal: Goal,
    pub eps_hat: f64,
    /// Adjusted targets at or below zero are replaced by this value.
    pub floor: f64,
}

impl PricingRule {
    /// Price for hour `t`. `previous` carries `(target[t-1], load[t-1])`;
    /// without it Goal 2 reduces to Goal 1.
    pub fn set_price(&self, target: f64, previous: Option<(f64, f64)>, phi_hat: f64) -> Result<PricePoint> {
        if !(phi_hat > 0.0) || !phi_hat.is_finite() {
            return Err(Error::InvalidForecast(phi_hat));
        }
        if !(self.eps_hat < 0.0) {
            return Err(Error::Domain(format!("estimated elasticity {} must be negative", self.eps_hat)));
        }
        let mut lstar = match (self.goal, previous) {
            (Goal::Goal2, Some((target_prev, load_prev))) => target + (target_prev - load_prev),
            _ => target,
        };
        if lstar <= 0.0 {
            lstar = self.floor;
        }
        Ok(PricePoint {
            price: (lstar / phi_hat).powf(1.0 / self.eps_hat),
            lstar,
        })
    }
}

/// Free-function form of [`PricingRule::set_price`].
#[allow(clippy::too_many_arguments)]
pub fn set_price(
    target_t: f64,
    target_prev: f64,
    load_prev: f64,
    phi_hat: f64,
    eps_hat: f64,
    goal: Goal,
    floor: f64,
) -> Result<PricePoint> {
    PricingRule { goal, eps_hat, floor }.set_price(target_t, Some((target_prev, load_prev)), phi_hat)
}

/// Participation fraction: one value for every home, or one per home.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Participation {
    Uniform(f64),
    PerHome(Vec<f64>),
}

impl Participation {
    pub fn get(&self, home: usize) -> f64 {
        match self {
            Participation::Uniform(k) => *k,
            Participation::PerHome(v) => v[home],
        }
    }

    fn values(&self) -> &[f64] {
        match self {
            Participation::Uniform(k) => std::slice::from_ref(k),
            Participation::PerHome(v) => v,
        }
    }
}

/// Target load per hour: a flat level, or a schedule repeated cyclically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TargetSchedule {
    Flat(f64),
    Cyclic(Vec<f64>),
}

impl TargetSchedule {
    pub fn at(&self, t: usize) -> f64 {
        match self {
            TargetSchedule::Flat(v) => *v,
            TargetSchedule::Cyclic(v) => v[t % v.len()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridConfig {
    pub homes: usize,
    pub kappa: Participation,
    pub eps_dsm: f64,
    /// ISO's estimate of the DSM elasticity; the true value when absent.
    pub eps_dsm_hat: Option<f64>,
    pub goal: Goal,
    pub target: TargetSchedule,
    pub lstar_floor: f64,
    pub seed: u64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            homes: 200,
            kappa: Participation::Uniform(0.5),
            eps_dsm: -1.0,
            eps_dsm_hat: None,
            goal: Goal::Goal1,
            target: TargetSchedule::Flat(200.0),
            lstar_floor: 10.0,
            seed: 0,
        }
    }
}

impl GridConfig {
    pub fn eps_hat(&self) -> f64 {
        self.eps_dsm_hat.unwrap_or(self.eps_dsm)
    }

    pub fn pricing_rule(&self) -> PricingRule {
        PricingRule {
            goal: self.goal,
            eps_hat: self.eps_hat(),
            floor: self.lstar_floor,
        }
    }

    /// Checks parameter ranges. `kappa = 1` is accepted as the full-participation limit.
    pub fn validate(&self) -> Result<()> {
        if self.homes == 0 {
            return Err(Error::config("homes must be at least 1"));
        }
        if let Participation::PerHome(v) = &self.kappa {
            if v.len() != self.homes {
                return Err(Error::config(format!("{} participation values for {} homes", v.len(), self.homes)));
            }
        }
        if let Some(k) = self.kappa.values().iter().find(|k| !(0.0..=1.0).contains(*k)) {
            return Err(Error::config(format!("participation fraction {k} outside [0, 1]")));
        }
        if !(self.eps_dsm < 0.0) {
            return Err(Error::config("eps_dsm must be negative"));
        }
        if !(self.eps_hat() < 0.0) {
            return Err(Error::config("eps_dsm_hat must be negative"));
        }
        let targets: &[f64] = match &self.target {
            TargetSchedule::Flat(v) => std::slice::from_ref(v),
            TargetSchedule::Cyclic(v) => v,
        };
        if targets.is_empty() || targets.iter().any(|t| !(*t > 0.0)) {
            return Err(Error::config("target loads must be positive"));
        }
        if !(self.lstar_floor > 0.0) {
            return Err(Error::config("lstar_floor must be positive"));
        }
        Ok(())
    }
}
