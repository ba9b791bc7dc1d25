//! Exact predictions for a polarization-entangled photon pair in the state
//! `(|x,x⟩ + |x⊥,x⊥⟩)/√2`, which has the same form for every axis `x`.
//!
//! For settings separated by the axis angle Δ:
//!
//! ```text
//!     P(T,T) = P(R,R) = ½cos²Δ
//!     P(T,R) = P(R,T) = ½sin²Δ
//! ```
//!
//! Probabilities are evaluated as `(1 ± V·cos 2Δ)/4`, where `V` is the
//! visibility of the source (1 for the ideal state). Writing them through
//! `cos 2Δ` keeps the orthogonal and parallel cases exact: `cos 0 = 1` and
//! `cos π = -1` are represented exactly in floating point.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Polarizer orientation in degrees, normalized to `[0, 180)`.
///
/// A polarizer measures an axis, not a direction, so orientations that differ
/// by 180° are the same setting.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Angle(f64);

/// Tolerance used when two normalized angles are compared as axes.
pub const AXIS_TOLERANCE_DEG: f64 = 1e-9;

impl Angle {
    pub fn new(degrees: f64) -> Result<Self> {
        if !degrees.is_finite() {
            return Err(Error::NonFiniteAngle(degrees));
        }
        Ok(Angle(normalize(degrees)))
    }

    /// Infallible constructor for angles known to be finite.
    ///
    /// Panics on NaN or infinity.
    pub fn deg(degrees: f64) -> Self {
        Angle::new(degrees).expect("finite angle")
    }

    pub fn degrees(self) -> f64 {
        self.0
    }

    pub fn radians(self) -> f64 {
        self.0.to_radians()
    }

    pub fn perpendicular(self) -> Self {
        // Subtracting 90 from [90, 180) is exact, which makes the map an
        // involution for every angle whose sum with 90 is representable.
        if self.0 < 90.0 {
            Angle(normalize(self.0 + 90.0))
        } else {
            Angle(self.0 - 90.0)
        }
    }

    pub fn rotated(self, offset_deg: f64) -> Self {
        Angle(normalize(self.0 + offset_deg))
    }

    /// Acute angle between the two axes, in `[0, 90]` degrees.
    pub fn axis_difference(self, other: Angle) -> f64 {
        let d = (self.0 - other.0).abs();
        d.min(180.0 - d)
    }

    pub fn same_axis(self, other: Angle) -> bool {
        self.axis_difference(other) <= AXIS_TOLERANCE_DEG
    }
}

fn normalize(degrees: f64) -> f64 {
    let v = degrees.rem_euclid(180.0);
    // rem_euclid can round up to the modulus for tiny negative inputs, and
    // keeps the sign of -0.0.
    if v >= 180.0 || v == 0.0 {
        0.0
    } else {
        v
    }
}

impl TryFrom<f64> for Angle {
    type Error = Error;

    fn try_from(degrees: f64) -> Result<Self> {
        Angle::new(degrees)
    }
}

impl From<Angle> for f64 {
    fn from(angle: Angle) -> f64 {
        angle.0
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}°", self.0)
    }
}

/// Result of a two-channel polarizer measurement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Outcome {
    /// Polarization found parallel to the setting.
    #[serde(rename = "T")]
    Transmit,
    /// Polarization found perpendicular to the setting.
    #[serde(rename = "R")]
    Reflect,
}

impl Outcome {
    pub const ALL: [Outcome; 2] = [Outcome::Transmit, Outcome::Reflect];

    pub fn complement(self) -> Self {
        match self {
            Outcome::Transmit => Outcome::Reflect,
            Outcome::Reflect => Outcome::Transmit,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Outcome::Transmit => 0,
            Outcome::Reflect => 1,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Outcome::Transmit => 'T',
            Outcome::Reflect => 'R',
        }
    }

    pub fn from_symbol(c: char) -> Option<Self> {
        match c {
            'T' => Some(Outcome::Transmit),
            'R' => Some(Outcome::Reflect),
            _ => None,
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// Four joint outcome values indexed by `(outcome_a, outcome_b)`.
///
/// Used both for probabilities and for expected counts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JointDistribution {
    entries: [[f64; 2]; 2],
}

impl JointDistribution {
    pub fn get(&self, a: Outcome, b: Outcome) -> f64 {
        self.entries[a.index()][b.index()]
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().flatten().sum()
    }

    /// Entries in `TT, TR, RT, RR` order.
    pub fn iter(&self) -> impl Iterator<Item = (Outcome, Outcome, f64)> + '_ {
        Outcome::ALL
            .into_iter()
            .flat_map(|a| Outcome::ALL.into_iter().map(move |b| (a, b)))
            .map(|(a, b)| (a, b, self.get(a, b)))
    }

    /// Swap the roles of the two sides.
    pub fn transposed(&self) -> Self {
        let e = self.entries;
        JointDistribution {
            entries: [[e[0][0], e[1][0]], [e[0][1], e[1][1]]],
        }
    }

    fn scaled(&self, factor: f64) -> Self {
        let mut entries = self.entries;
        entries.iter_mut().flatten().for_each(|v| *v *= factor);
        JointDistribution { entries }
    }
}

/// The entangled two-photon source, optionally degraded by white noise.
///
/// `visibility = 1` is the ideal state. For `visibility = V` the source emits
/// the ideal state with probability `V` and an uncorrelated, unpolarized pair
/// otherwise.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairState {
    visibility: f64,
}

impl Default for PairState {
    fn default() -> Self {
        PairState::ideal()
    }
}

impl PairState {
    pub fn ideal() -> Self {
        PairState { visibility: 1.0 }
    }

    pub fn with_visibility(visibility: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&visibility) {
            return Err(Error::InvalidVisibility(visibility));
        }
        Ok(PairState { visibility })
    }

    pub fn visibility(&self) -> f64 {
        self.visibility
    }

    pub fn joint_probability(
        &self,
        setting_a: Angle,
        setting_b: Angle,
        outcome_a: Outcome,
        outcome_b: Outcome,
    ) -> f64 {
        let c = self.visibility * cos_double(setting_a.axis_difference(setting_b));
        if outcome_a == outcome_b {
            (1.0 + c) / 4.0
        } else {
            (1.0 - c) / 4.0
        }
    }

    pub fn joint_distribution(&self, setting_a: Angle, setting_b: Angle) -> JointDistribution {
        let mut entries = [[0.0; 2]; 2];
        for a in Outcome::ALL {
            for b in Outcome::ALL {
                entries[a.index()][b.index()] = self.joint_probability(setting_a, setting_b, a, b);
            }
        }
        JointDistribution { entries }
    }

    /// Single-side outcome probability; ½ for every setting.
    pub fn marginal_probability(&self, _setting: Angle, _outcome: Outcome) -> f64 {
        0.5
    }

    /// Expected coincidence counts for `pairs` emitted pairs.
    pub fn predict_counts(
        &self,
        setting_a: Angle,
        setting_b: Angle,
        pairs: u64,
    ) -> Result<JointDistribution> {
        if pairs == 0 {
            return Err(Error::ZeroPairs);
        }
        Ok(self
            .joint_distribution(setting_a, setting_b)
            .scaled(pairs as f64))
    }
}

/// Axis of the unmeasured partner once one photon gave `outcome` at `setting`.
pub fn conditional_remote_state(setting: Angle, outcome: Outcome) -> Angle {
    match outcome {
        Outcome::Transmit => setting,
        Outcome::Reflect => setting.perpendicular(),
    }
}

/// Malus law: probability that a photon polarized along `axis` is
/// transmitted by a polarizer at `setting`.
pub fn transmit_probability(setting: Angle, axis: Angle) -> f64 {
    (1.0 + cos_double(setting.axis_difference(axis))) / 2.0
}

pub fn joint_probability(
    setting_a: Angle,
    setting_b: Angle,
    outcome_a: Outcome,
    outcome_b: Outcome,
) -> f64 {
    PairState::ideal().joint_probability(setting_a, setting_b, outcome_a, outcome_b)
}

pub fn marginal_probability(setting: Angle, outcome: Outcome) -> f64 {
    PairState::ideal().marginal_probability(setting, outcome)
}

pub fn predict_counts(setting_a: Angle, setting_b: Angle, pairs: u64) -> Result<JointDistribution> {
    PairState::ideal().predict_counts(setting_a, setting_b, pairs)
}

/// `cos²Δ` for an axis difference in degrees.
pub fn cos_sq(delta_deg: f64) -> f64 {
    (1.0 + cos_double(delta_deg)) / 2.0
}

/// `sin²Δ` for an axis difference in degrees.
pub fn sin_sq(delta_deg: f64) -> f64 {
    (1.0 - cos_double(delta_deg)) / 2.0
}

fn cos_double(delta_deg: f64) -> f64 {
    (2.0 * delta_deg).to_radians().cos()
}

#[cfg(test)]
mod tests {
    use super::*;
    use Outcome::{Reflect as R, Transmit as T};

    const EPS: f64 = 1e-12;

    #[test]
    fn angle_normalization() {
        assert_eq!(Angle::deg(190.0).degrees(), 10.0);
        assert_eq!(Angle::deg(-30.0).degrees(), 150.0);
        assert_eq!(Angle::deg(180.0).degrees(), 0.0);
        assert_eq!(Angle::deg(-0.0).degrees().to_bits(), 0.0f64.to_bits());
        assert_eq!(Angle::deg(-1e-300).degrees(), 0.0);
        assert!(Angle::new(f64::NAN).is_err());
        assert!(Angle::new(f64::INFINITY).is_err());
    }

    #[test]
    fn perpendicular_is_an_involution() {
        for d in [0.0, 20.0, 89.5, 90.0, 170.0, 179.999] {
            let a = Angle::deg(d);
            assert_eq!(a.perpendicular().perpendicular(), a);
        }
        assert_eq!(Angle::deg(170.0).perpendicular().degrees(), 80.0);
    }

    #[test]
    fn outcome_complement() {
        for o in Outcome::ALL {
            assert_ne!(o.complement(), o);
            assert_eq!(o.complement().complement(), o);
        }
    }

    #[test]
    fn joint_probability_examples() {
        let z = Angle::deg(0.0);
        assert_eq!(joint_probability(z, z, T, T), 0.5);
        assert_eq!(joint_probability(z, Angle::deg(90.0), T, T), 0.0);
        assert!((joint_probability(z, Angle::deg(60.0), T, T) - 0.125).abs() < EPS);
        assert!((joint_probability(z, Angle::deg(30.0), R, T) - 0.125).abs() < EPS);
    }

    #[test]
    fn marginals_are_one_half() {
        assert_eq!(marginal_probability(Angle::deg(0.0), T), 0.5);
        assert_eq!(marginal_probability(Angle::deg(37.2), R), 0.5);
        assert_eq!(marginal_probability(Angle::deg(90.0), T), 0.5);
    }

    #[test]
    fn remote_state_examples() {
        assert_eq!(conditional_remote_state(Angle::deg(20.0), T).degrees(), 20.0);
        assert_eq!(conditional_remote_state(Angle::deg(20.0), R).degrees(), 110.0);
        assert_eq!(conditional_remote_state(Angle::deg(170.0), R).degrees(), 80.0);
    }

    #[test]
    fn predicted_counts() {
        let z = Angle::deg(0.0);
        let c = predict_counts(z, Angle::deg(60.0), 1000).unwrap();
        assert!((c.get(T, T) - 125.0).abs() < 1e-9);
        let c = predict_counts(z, z, 1000).unwrap();
        assert_eq!(c.get(T, T), 500.0);
        assert_eq!(c.get(T, R), 0.0);
        let c = predict_counts(z, Angle::deg(30.0), 1000).unwrap();
        assert!((c.get(R, T) - 125.0).abs() < 1e-9);
        assert!((c.total() - 1000.0).abs() < 1e-9);
        assert_eq!(predict_counts(z, z, 0), Err(Error::ZeroPairs));
    }

    #[test]
    fn visibility_bounds() {
        assert!(PairState::with_visibility(-0.1).is_err());
        assert!(PairState::with_visibility(1.1).is_err());
        assert!(PairState::with_visibility(f64::NAN).is_err());
        let flat = PairState::with_visibility(0.0).unwrap();
        let d = flat.joint_distribution(Angle::deg(0.0), Angle::deg(0.0));
        for (_, _, p) in d.iter() {
            assert_eq!(p, 0.25);
        }
    }

    #[test]
    fn transposed_swaps_sides() {
        let d = PairState::with_visibility(0.7)
            .unwrap()
            .joint_distribution(Angle::deg(10.0), Angle::deg(55.0));
        let t = d.transposed();
        for a in Outcome::ALL {
            for b in Outcome::ALL {
                assert_eq!(d.get(a, b), t.get(b, a));
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn outcome() -> impl Strategy<Value = Outcome> {
            prop_oneof![Just(T), Just(R)]
        }

        proptest! {
            #[test]
            fn normalized(a in -720.0..720.0f64, b in -720.0..720.0f64, v in 0.0..=1.0f64) {
                let s = PairState::with_visibility(v).unwrap();
                let d = s.joint_distribution(Angle::deg(a), Angle::deg(b));
                prop_assert!((d.total() - 1.0).abs() < EPS);
                for (_, _, p) in d.iter() {
                    prop_assert!((0.0..=1.0).contains(&p));
                }
            }

            #[test]
            fn perpendicular_involution(a in -720.0..720.0f64) {
                let x = Angle::deg(a);
                let p = x.perpendicular();
                prop_assert!((0.0..180.0).contains(&p.degrees()));
                prop_assert!((p.axis_difference(x) - 90.0).abs() < 1e-12);
                prop_assert!(p.perpendicular().same_axis(x));
            }

            #[test]
            fn rotation_invariant(a in 0.0..180.0f64, b in 0.0..180.0f64, phi in -360.0..360.0f64,
                                  o1 in outcome(), o2 in outcome()) {
                let (x, y) = (Angle::deg(a), Angle::deg(b));
                let p = joint_probability(x, y, o1, o2);
                let q = joint_probability(x.rotated(phi), y.rotated(phi), o1, o2);
                prop_assert!((p - q).abs() < EPS);
            }

            #[test]
            fn side_symmetric(a in 0.0..180.0f64, b in 0.0..180.0f64, o1 in outcome(), o2 in outcome()) {
                let (x, y) = (Angle::deg(a), Angle::deg(b));
                prop_assert_eq!(joint_probability(x, y, o1, o2), joint_probability(y, x, o2, o1));
            }

            #[test]
            fn perfect_correlation(a in 0.0..180.0f64) {
                let x = Angle::deg(a);
                prop_assert_eq!(joint_probability(x, x, T, R), 0.0);
                prop_assert_eq!(joint_probability(x, x, R, T), 0.0);
            }

            #[test]
            fn no_signaling(local in 0.0..180.0f64, remote in 0.0..180.0f64, o in outcome()) {
                let (l, r) = (Angle::deg(local), Angle::deg(remote));
                let summed_a: f64 = Outcome::ALL.iter().map(|&x| joint_probability(r, l, x, o)).sum();
                let summed_b: f64 = Outcome::ALL.iter().map(|&x| joint_probability(l, r, o, x)).sum();
                prop_assert!((summed_a - marginal_probability(l, o)).abs() < EPS);
                prop_assert!((summed_b - marginal_probability(l, o)).abs() < EPS);
            }

            #[test]
            fn chain_consistency(a in 0.0..180.0f64, b in 0.0..180.0f64, o1 in outcome(), o2 in outcome()) {
                let (x, y) = (Angle::deg(a), Angle::deg(b));
                let axis = conditional_remote_state(x, o1);
                let t = transmit_probability(y, axis);
                let cond = if o2 == T { t } else { 1.0 - t };
                let chained = marginal_probability(x, o1) * cond;
                prop_assert!((joint_probability(x, y, o1, o2) - chained).abs() < EPS);
            }
        }
    }
}
