//! Attack schedules and the two attack channels: false price data received by
//! a compromised home, and direct manipulation of its load.
//!
//! A schedule stores one aggregate magnitude per attacked hour. Applied per
//! home, the magnitude is split equally across the victims; applied to an
//! aggregate series, it is added as is.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackMode {
    Price,
    Load,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackKind {
    Ramp,
    Sudden,
    Point,
}

impl AttackKind {
    pub const ALL: [AttackKind; 3] = [AttackKind::Ramp, AttackKind::Sudden, AttackKind::Point];

    pub fn as_str(self) -> &'static str {
        match self {
            AttackKind::Ramp => "ramp",
            AttackKind::Sudden => "sudden",
            AttackKind::Point => "point",
        }
    }
}

impl fmt::Display for AttackKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AttackKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ramp" => Ok(AttackKind::Ramp),
            "sudden" => Ok(AttackKind::Sudden),
            "point" => Ok(AttackKind::Point),
            other => Err(Error::InvalidAttack(format!("unknown attack kind `{other}`"))),
        }
    }
}

impl FromStr for AttackMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "price" => Ok(AttackMode::Price),
            "load" => Ok(AttackMode::Load),
            other => Err(Error::InvalidAttack(format!("unknown attack mode `{other}`"))),
        }
    }
}

/// Waveform parameters. Only the field matching the kind is read.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AttackParams {
    /// Ramp increment per hour.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    /// Sudden-attack constant.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<f64>,
    /// Point attacks: absolute hour -> magnitude.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<BTreeMap<usize, f64>>,
}

impl AttackParams {
    pub fn ramp(step: f64) -> Self {
        Self {
            step: Some(step),
            ..Default::default()
        }
    }

    pub fn sudden(level: f64) -> Self {
        Self {
            level: Some(level),
            ..Default::default()
        }
    }

    pub fn point(points: impl IntoIterator<Item = (usize, f64)>) -> Self {
        Self {
            points: Some(points.into_iter().collect()),
            ..Default::default()
        }
    }
}

/// JSON form of a schedule; `window` is the half-open hour range `[start, end)`
/// and an empty `victims` list means every home.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackSpec {
    pub mode: AttackMode,
    pub kind: String,
    pub window: [usize; 2],
    #[serde(default)]
    pub victims: Vec<usize>,
    #[serde(default)]
    pub params: AttackParams,
}

impl AttackSpec {
    pub fn build(&self) -> Result<AttackSchedule> {
        make_schedule(
            self.kind.parse()?,
            &self.params,
            self.window[0]..self.window[1],
            self.victims.clone(),
            self.mode,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackSchedule {
    pub mode: AttackMode,
    pub kind: AttackKind,
    pub start: usize,
    pub end: usize,
    pub victims: Vec<usize>,
    /// Aggregate magnitude for each hour of the window.
    magnitudes: Vec<f64>,
    params: AttackParams,
}

pub fn make_schedule(
    kind: AttackKind,
    params: &AttackParams,
    window: std::ops::Range<usize>,
    victims: Vec<usize>,
    mode: AttackMode,
) -> Result<AttackSchedule> {
    if window.is_empty() {
        return Err(Error::InvalidAttack(format!("empty window {window:?}")));
    }
    let missing = |name: &str| Error::InvalidAttack(format!("{kind} attack requires `{name}`"));
    let len = window.len();
    let magnitudes = match kind {
        AttackKind::Ramp => {
            let step = params.step.ok_or_else(|| missing("step"))?;
            (1..=len).map(|k| step * k as f64).collect()
        }
        AttackKind::Sudden => vec![params.level.ok_or_else(|| missing("level"))?; len],
        AttackKind::Point => {
            let points = params.points.as_ref().ok_or_else(|| missing("points"))?;
            let mut m = vec![0.0; len];
            for (&t, &v) in points {
                if !window.contains(&t) {
                    return Err(Error::InvalidAttack(format!("point at hour {t} lies outside {window:?}")));
                }
                m[t - window.start] = v;
            }
            m
        }
    };
    if let Some(v) = magnitudes.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidAttack(format!("non-finite magnitude {v}")));
    }
    let mut victims = victims;
    victims.sort_unstable();
    victims.dedup();
    Ok(AttackSchedule {
        mode,
        kind,
        start: window.start,
        end: window.end,
        victims,
        magnitudes,
        params: params.clone(),
    })
}

impl AttackSchedule {
    pub fn to_spec(&self) -> AttackSpec {
        AttackSpec {
            mode: self.mode,
            kind: self.kind.as_str().to_owned(),
            window: [self.start, self.end],
            victims: self.victims.clone(),
            params: self.params.clone(),
        }
    }

    /// Aggregate magnitude at hour `t`; zero outside the window.
    pub fn magnitude(&self, t: usize) -> f64 {
        if (self.start..self.end).contains(&t) {
            self.magnitudes[t - self.start]
        } else {
            0.0
        }
    }

    pub fn is_victim(&self, home: usize) -> bool {
        self.victims.is_empty() || self.victims.binary_search(&home).is_ok()
    }

    fn victim_count(&self, num_homes: usize) -> usize {
        if self.victims.is_empty() {
            num_homes
        } else {
            self.victims.len()
        }
    }

    /// Value applied to one home at hour `t` in a grid of `num_homes`.
    pub fn per_home(&self, t: usize, home: usize, num_homes: usize) -> f64 {
        if !self.is_victim(home) {
            return 0.0;
        }
        self.magnitude(t) / self.victim_count(num_homes) as f64
    }

    /// Ground-truth attack labels for `len` hours.
    pub fn labels(&self, len: usize) -> Vec<bool> {
        (0..len).map(|t| self.magnitude(t) != 0.0).collect()
    }

    /// Adds the aggregate magnitudes to `series`, flooring at zero. Returns the
    /// hours where the floor was hit.
    pub fn apply_to_series(&self, series: &mut [f64]) -> Vec<usize> {
        let mut clamped = Vec::new();
        for (t, v) in series.iter_mut().enumerate() {
            let (out, c) = apply_load_attack(*v, self.magnitude(t));
            *v = out;
            if c {
                clamped.push(t);
            }
        }
        clamped
    }
}

/// Price seen by a home whose price feed is corrupted by `attack`.
pub fn apply_price_attack(price: f64, attack: f64) -> Result<f64> {
    let attacked = price + attack;
    if !(attacked > 0.0) {
        return Err(Error::NonPhysicalPrice(attacked));
    }
    Ok(attacked)
}

/// `load + attack` floored at zero; the flag reports whether the floor was hit.
pub fn apply_load_attack(load: f64, attack: f64) -> (f64, bool) {
    let out = load + attack;
    if out < 0.0 {
        (0.0, true)
    } else {
        (out, false)
    }
}

/// How a converted load attack is expressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquivalenceForm {
    /// Additive change to the household load: `l_attacked = l + a_load`.
    #[default]
    Delta,
    /// Full compromised household load, with the price argument taken as the
    /// attacked price itself. Not additive: applying it with `l + a_load`
    /// counts the nominal load twice.
    TotalLoad,
}

fn check_equivalence_inputs(kappa: f64, price: f64, eps_dsm: f64) -> Result<()> {
    if kappa == 0.0 {
        return Err(Error::ModesNotEquivalent);
    }
    if !(kappa > 0.0 && kappa <= 1.0) {
        return Err(Error::Domain(format!("participation fraction {kappa} outside (0, 1]")));
    }
    if !(price > 0.0) {
        return Err(Error::Domain(format!("price {price} must be positive")));
    }
    if eps_dsm == 0.0 || !eps_dsm.is_finite() {
        return Err(Error::Domain(format!("elasticity {eps_dsm} does not admit an inverse")));
    }
    Ok(())
}

/// Direct load change producing the same household load as a price attack.
pub fn equivalent_load_attack(a_price: f64, phi: f64, kappa: f64, price: f64, eps_dsm: f64) -> Result<f64> {
    check_equivalence_inputs(kappa, price, eps_dsm)?;
    let attacked = apply_price_attack(price, a_price)?;
    Ok(kappa * phi * (attacked.powf(eps_dsm) - price.powf(eps_dsm)))
}

/// Price corruption producing the same household load as a direct load change.
pub fn equivalent_price_attack(a_load: f64, phi: f64, kappa: f64, price: f64, eps_dsm: f64) -> Result<f64> {
    check_equivalence_inputs(kappa, price, eps_dsm)?;
    if !(phi > 0.0) {
        return Err(Error::Domain(format!("base load {phi} must be positive")));
    }
    let arg = a_load / (kappa * phi) + price.powf(eps_dsm);
    if !(arg > 0.0) {
        return Err(Error::NoEquivalentPrice(arg));
    }
    Ok(arg.powf(1.0 / eps_dsm) - price)
}

/// Conversion in the chosen form. For [`EquivalenceForm::TotalLoad`], `a_price`
/// is interpreted as the attacked price and the result is the whole household load.
pub fn equivalent_load_attack_with(
    form: EquivalenceForm,
    a_price: f64,
    phi: f64,
    kappa: f64,
    price: f64,
    eps_dsm: f64,
) -> Result<f64> {
    match form {
        EquivalenceForm::Delta => equivalent_load_attack(a_price, phi, kappa, price, eps_dsm),
        EquivalenceForm::TotalLoad => {
            check_equivalence_inputs(kappa, price, eps_dsm)?;
            if !(a_price > 0.0) {
                return Err(Error::NonPhysicalPrice(a_price));
            }
            Ok(kappa * phi * a_price.powf(eps_dsm) + (1.0 - kappa) * phi)
        }
    }
}

/// Inverse of [`equivalent_load_attack_with`].
pub fn equivalent_price_attack_with(
    form: EquivalenceForm,
    a_load: f64,
    phi: f64,
    kappa: f64,
    price: f64,
    eps_dsm: f64,
) -> Result<f64> {
    match form {
        EquivalenceForm::Delta => equivalent_price_attack(a_load, phi, kappa, price, eps_dsm),
        EquivalenceForm::TotalLoad => {
            check_equivalence_inputs(kappa, price, eps_dsm)?;
            if !(phi > 0.0) {
                return Err(Error::Domain(format!("base load {phi} must be positive")));
            }
            let arg = (a_load - (1.0 - kappa) * phi) / (kappa * phi);
            if !(arg > 0.0) {
                return Err(Error::NoEquivalentPrice(arg));
            }
            Ok(arg.powf(1.0 / eps_dsm))
        }
    }
}

/// Magnitudes of the evaluation attacks on a 48-hour test block whose second
/// day is attacked; hours are relative to the block start.
pub mod reference {
    pub const RAMP_STEP: f64 = 5.0;
    pub const SUDDEN_LEVEL: f64 = 150.0;
    pub const POINTS: [(usize, f64); 5] = [(24, 250.0), (29, 200.0), (34, 300.0), (37, 100.0), (46, 150.0)];
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feedback::household_dsm_load;
    use proptest::prelude::*;

    #[test]
    fn ramp_over_last_day() {
        let s = make_schedule(AttackKind::Ramp, &AttackParams::ramp(5.0), 24..48, vec![], AttackMode::Load).unwrap();
        let a: Vec<f64> = (0..48).map(|t| s.magnitude(t)).collect();
        assert!(a[..24].iter().all(|&v| v == 0.0));
        let expected: Vec<f64> = (1..=24).map(|k| 5.0 * k as f64).collect();
        assert_eq!(&a[24..], expected.as_slice());
        assert_eq!(a[47], 120.0);
    }

    #[test]
    fn sudden_is_constant() {
        let s = make_schedule(AttackKind::Sudden, &AttackParams::sudden(150.0), 24..48, vec![], AttackMode::Load)
            .unwrap();
        assert!((24..48).all(|t| s.magnitude(t) == 150.0));
        assert_eq!(s.magnitude(23), 0.0);
        assert_eq!(s.magnitude(48), 0.0);
    }

    #[test]
    fn point_map() {
        let s = make_schedule(
            AttackKind::Point,
            &AttackParams::point(reference::POINTS),
            24..48,
            vec![],
            AttackMode::Load,
        )
        .unwrap();
        let labels = s.labels(48);
        assert_eq!(labels.iter().filter(|&&l| l).count(), 5);
        assert_eq!(s.magnitude(34), 300.0);
        assert_eq!(s.magnitude(35), 0.0);
    }

    #[test]
    fn schedule_errors() {
        assert!(make_schedule(AttackKind::Point, &AttackParams::point([(10, 1.0)]), 24..48, vec![], AttackMode::Load)
            .is_err());
        assert!(make_schedule(AttackKind::Ramp, &AttackParams::sudden(1.0), 24..48, vec![], AttackMode::Load).is_err());
        assert!(make_schedule(AttackKind::Sudden, &AttackParams::sudden(1.0), 5..5, vec![], AttackMode::Load).is_err());
        assert!("spike".parse::<AttackKind>().is_err());
    }

    #[test]
    fn split_across_victims() {
        let s = make_schedule(AttackKind::Sudden, &AttackParams::sudden(150.0), 0..2, vec![3, 1, 3], AttackMode::Load)
            .unwrap();
        assert_eq!(s.per_home(0, 1, 10), 75.0);
        assert_eq!(s.per_home(0, 3, 10), 75.0);
        assert_eq!(s.per_home(0, 2, 10), 0.0);
        let all = make_schedule(AttackKind::Sudden, &AttackParams::sudden(150.0), 0..2, vec![], AttackMode::Load)
            .unwrap();
        assert_eq!(all.per_home(1, 7, 10), 15.0);
    }

    #[test]
    fn spec_json_round_trip() {
        let json = r#"{"mode":"load","kind":"point","window":[24,48],"victims":[],"params":{"points":{"24":250,"29":200}}}"#;
        let spec: AttackSpec = serde_json::from_str(json).unwrap();
        let s = spec.build().unwrap();
        assert_eq!(s.magnitude(29), 200.0);
        let again: AttackSpec = serde_json::from_str(&serde_json::to_string(&s.to_spec()).unwrap()).unwrap();
        assert_eq!(again.build().unwrap(), s);
    }

    #[test]
    fn price_attack_arithmetic() {
        assert_eq!(apply_price_attack(2.0, 0.0).unwrap(), 2.0);
        assert_eq!(apply_price_attack(2.0, -1.0).unwrap(), 1.0);
        assert!(matches!(apply_price_attack(1.0, -1.0), Err(Error::NonPhysicalPrice(_))));
    }

    #[test]
    fn load_attack_arithmetic() {
        assert_eq!(apply_load_attack(1.2, 0.0), (1.2, false));
        let (l, c) = apply_load_attack(1.2, 0.75);
        assert!((l - 1.95).abs() < 1e-15 && !c);
        assert_eq!(apply_load_attack(0.5, -1.0), (0.0, true));
    }

    #[test]
    fn conversion_hand_example() {
        assert_eq!(equivalent_load_attack(0.0, 2.0, 0.5, 1.0, -1.0).unwrap(), 0.0);
        // kappa*phi = 1, (1 + 1)^-1 - 1^-1 = -0.5
        assert_eq!(equivalent_load_attack(1.0, 2.0, 0.5, 1.0, -1.0).unwrap(), -0.5);
        assert!((equivalent_price_attack(-0.5, 2.0, 0.5, 1.0, -1.0).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(equivalent_price_attack(0.0, 2.0, 0.5, 1.0, -1.0).unwrap(), 0.0);
    }

    #[test]
    fn zero_participation_is_not_equivalent() {
        assert!(matches!(equivalent_load_attack(1.0, 2.0, 0.0, 1.0, -1.0), Err(Error::ModesNotEquivalent)));
        assert!(matches!(equivalent_price_attack(1.0, 2.0, 0.0, 1.0, -1.0), Err(Error::ModesNotEquivalent)));
    }

    #[test]
    fn unreachable_load_has_no_price() {
        // removing more than the whole DSM portion
        assert!(matches!(equivalent_price_attack(-1.5, 2.0, 0.5, 1.0, -1.0), Err(Error::NoEquivalentPrice(_))));
    }

    #[test]
    fn total_load_form_round_trips_but_is_not_additive() {
        let (phi, kappa, price, eps) = (2.0, 0.5, 1.0, -1.0);
        let total = equivalent_load_attack_with(EquivalenceForm::TotalLoad, 2.0, phi, kappa, price, eps).unwrap();
        assert!((total - household_dsm_load(phi, kappa, 2.0, eps).unwrap()).abs() < 1e-12);
        let back = equivalent_price_attack_with(EquivalenceForm::TotalLoad, total, phi, kappa, price, eps).unwrap();
        assert!((back - 2.0).abs() < 1e-12);
        let nominal = household_dsm_load(phi, kappa, price, eps).unwrap();
        assert!((nominal + total - household_dsm_load(phi, kappa, 2.0, eps).unwrap()).abs() > 0.5);
    }

    proptest! {
        #[test]
        fn delta_conversion_reproduces_price_attack(
            phi in 0.05f64..5.0,
            kappa in 0.01f64..0.99,
            price in 0.05f64..10.0,
            eps in -2.0f64..-0.1,
            frac in -0.9f64..3.0,
        ) {
            let a_p = frac * price;
            let attacked = household_dsm_load(phi, kappa, price + a_p, eps).unwrap();
            let a_l = equivalent_load_attack(a_p, phi, kappa, price, eps).unwrap();
            let converted = household_dsm_load(phi, kappa, price, eps).unwrap() + a_l;
            prop_assert!((attacked - converted).abs() <= 1e-9 * attacked.abs().max(1e-12));
            let back = equivalent_price_attack(a_l, phi, kappa, price, eps).unwrap();
            prop_assert!((back - a_p).abs() <= 1e-9 * price.max(a_p.abs()));
        }
    }
}
