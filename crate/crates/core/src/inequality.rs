//! The Wigner–d'Espagnat inequality `N(a,c) + N(a⊥,b) ≥ N(b,c)`.
//!
//! On a census the proof is three integer facts:
//!
//! ```text
//!     N(a,b,c) + N(a⊥,b,c) = N(b,c)
//!     N(a,c)   ≥ N(a,b,c)
//!     N(a⊥,b)  ≥ N(a⊥,b,c)
//! ```
//!
//! so `lhs − rhs = N(a,b⊥,c) + N(a⊥,b,c⊥)`, a sum of counts. The quantum
//! form is expressed in units of N₀/2: `cos²(a,c) + sin²(a,b) ≥ cos²(b,c)`.

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::lhv::{par, perp, StrategyCensus};
use crate::quantum::{cos_sq, sin_sq, Angle};

/// Normalized-form margins above this count as a violation.
pub const VIOLATION_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SettingTriple {
    pub a: Angle,
    pub b: Angle,
    pub c: Angle,
}

impl SettingTriple {
    pub fn new(a: Angle, b: Angle, c: Angle) -> Result<Self> {
        if a.same_axis(b) || b.same_axis(c) || a.same_axis(c) {
            return Err(Error::DegenerateTriple);
        }
        Ok(SettingTriple { a, b, c })
    }

    pub fn from_degrees(a: f64, b: f64, c: f64) -> Result<Self> {
        SettingTriple::new(Angle::new(a)?, Angle::new(b)?, Angle::new(c)?)
    }

    pub fn rotated(&self, offset_deg: f64) -> Self {
        SettingTriple {
            a: self.a.rotated(offset_deg),
            b: self.b.rotated(offset_deg),
            c: self.c.rotated(offset_deg),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ReportForm {
    /// Integer pair counts from a census.
    #[serde(rename = "count")]
    Count,
    /// Rates in units of N₀/2.
    #[serde(rename = "normalized-rate")]
    NormalizedRate,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InequalityReport {
    pub form: ReportForm,
    pub angles: SettingTriple,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs`; positive means the inequality fails.
    pub margin: f64,
    pub violated: bool,
}

impl InequalityReport {
    pub fn normalized(angles: SettingTriple, lhs: f64, rhs: f64) -> Self {
        let margin = rhs - lhs;
        InequalityReport {
            form: ReportForm::NormalizedRate,
            angles,
            lhs,
            rhs,
            margin,
            violated: margin > VIOLATION_TOLERANCE,
        }
    }

    fn counted(angles: SettingTriple, lhs: u64, rhs: u64) -> Self {
        let margin = rhs as i128 - lhs as i128;
        InequalityReport {
            form: ReportForm::Count,
            angles,
            lhs: lhs as f64,
            rhs: rhs as f64,
            margin: margin as f64,
            violated: margin > 0,
        }
    }
}

impl Serialize for InequalityReport {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct AnglesDeg {
            a: f64,
            b: f64,
            c: f64,
        }
        let mut s = serializer.serialize_struct("InequalityReport", 6)?;
        s.serialize_field("form", &self.form)?;
        s.serialize_field(
            "angles_deg",
            &AnglesDeg {
                a: self.angles.a.degrees(),
                b: self.angles.b.degrees(),
                c: self.angles.c.degrees(),
            },
        )?;
        match self.form {
            ReportForm::Count => {
                s.serialize_field("lhs", &(self.lhs as u64))?;
                s.serialize_field("rhs", &(self.rhs as u64))?;
                s.serialize_field("margin", &(self.margin as i64))?;
            }
            ReportForm::NormalizedRate => {
                s.serialize_field("lhs", &self.lhs)?;
                s.serialize_field("rhs", &self.rhs)?;
                s.serialize_field("margin", &self.margin)?;
            }
        }
        s.serialize_field("violated", &self.violated)?;
        s.end()
    }
}

/// Count form: `lhs = N(a,c) + N(a⊥,b)`, `rhs = N(b,c)`.
pub fn wigner_counts(census: &StrategyCensus, triple: &SettingTriple) -> Result<InequalityReport> {
    let SettingTriple { a, b, c } = *triple;
    let n_ac = census.census_count(&[par(a), par(c)])?;
    let n_aperp_b = census.census_count(&[perp(a), par(b)])?;
    let n_bc = census.census_count(&[par(b), par(c)])?;
    Ok(InequalityReport::counted(*triple, n_ac + n_aperp_b, n_bc))
}

/// Normalized `(lhs, rhs)` from the three axis differences in degrees.
pub fn normalized_sides(ab_deg: f64, bc_deg: f64, ac_deg: f64) -> (f64, f64) {
    (cos_sq(ac_deg) + sin_sq(ab_deg), cos_sq(bc_deg))
}

/// Quantum form in units of N₀/2.
pub fn wigner_quantum(triple: &SettingTriple) -> InequalityReport {
    let SettingTriple { a, b, c } = *triple;
    let (lhs, rhs) = normalized_sides(
        a.axis_difference(b),
        b.axis_difference(c),
        a.axis_difference(c),
    );
    InequalityReport::normalized(*triple, lhs, rhs)
}

/// Every intermediate count of the proof on one census.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DerivationTrace {
    /// N(a,b,c)
    pub n_abc: u64,
    /// N(a⊥,b,c)
    pub n_aperp_bc: u64,
    /// N(b,c)
    pub n_bc: u64,
    /// N(a,c)
    pub n_ac: u64,
    /// N(a⊥,b)
    pub n_aperp_b: u64,
    /// N(a,c) − N(a,b,c)
    pub slack_ac: u64,
    /// N(a⊥,b) − N(a⊥,b,c)
    pub slack_aperp_b: u64,
    /// N(a,b⊥,c), counted directly
    pub n_a_bperp_c: u64,
    /// N(a⊥,b,c⊥), counted directly
    pub n_aperp_b_cperp: u64,
    pub lhs: u64,
    pub rhs: u64,
    /// `rhs − lhs`
    pub margin: i64,
}

impl DerivationTrace {
    /// Each step of the proof, with whether it holds on this census.
    pub fn steps(&self) -> [(&'static str, bool); 5] {
        [
            (
                "N(a,b,c) + N(a⊥,b,c) = N(b,c)",
                self.n_abc + self.n_aperp_bc == self.n_bc,
            ),
            ("N(a,c) ≥ N(a,b,c)", self.n_ac >= self.n_abc),
            ("N(a⊥,b) ≥ N(a⊥,b,c)", self.n_aperp_b >= self.n_aperp_bc),
            (
                "slacks equal N(a,b⊥,c) and N(a⊥,b,c⊥)",
                self.slack_ac == self.n_a_bperp_c && self.slack_aperp_b == self.n_aperp_b_cperp,
            ),
            (
                "lhs − rhs = N(a,b⊥,c) + N(a⊥,b,c⊥)",
                self.lhs as i128 - self.rhs as i128
                    == self.n_a_bperp_c as i128 + self.n_aperp_b_cperp as i128,
            ),
        ]
    }

    pub fn holds(&self) -> bool {
        self.steps().iter().all(|&(_, ok)| ok)
    }
}

pub fn derivation_trace(census: &StrategyCensus, triple: &SettingTriple) -> Result<DerivationTrace> {
    let SettingTriple { a, b, c } = *triple;
    let n = |sel: &[_]| census.census_count(sel);
    let n_abc = n(&[par(a), par(b), par(c)])?;
    let n_aperp_bc = n(&[perp(a), par(b), par(c)])?;
    let n_bc = n(&[par(b), par(c)])?;
    let n_ac = n(&[par(a), par(c)])?;
    let n_aperp_b = n(&[perp(a), par(b)])?;
    let n_a_bperp_c = n(&[par(a), perp(b), par(c)])?;
    let n_aperp_b_cperp = n(&[perp(a), par(b), perp(c)])?;
    // Monotonicity guarantees these subtractions stay nonnegative.
    let slack_ac = n_ac - n_abc;
    let slack_aperp_b = n_aperp_b - n_aperp_bc;
    let lhs = n_ac + n_aperp_b;
    Ok(DerivationTrace {
        n_abc,
        n_aperp_bc,
        n_bc,
        n_ac,
        n_aperp_b,
        slack_ac,
        slack_aperp_b,
        n_a_bperp_c,
        n_aperp_b_cperp,
        lhs,
        rhs: n_bc,
        margin: n_bc as i64 - lhs as i64,
    })
}
