//! Local instruction-set models.
//!
//! A local source that reproduces perfect correlations at equal settings must
//! emit each pair with a fixed transmit/reflect answer for every orientation,
//! and both photons must carry the same answers. A [`StrategyCensus`] records
//! how many pairs of a finite run carried each instruction set; every count
//! used by the inequality is an exact integer sum over that census.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use serde::ser::{SerializeMap, SerializeStruct};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::quantum::{Angle, Outcome};

/// Largest menu accepted; enumeration is `2^k`.
pub const MAX_MENU_SIZE: usize = 16;

/// Ordered, distinct polarizer orientations a source must be prepared for.
#[derive(Clone, Debug, PartialEq)]
pub struct SettingMenu {
    settings: Vec<Angle>,
}

impl SettingMenu {
    pub fn new(settings: Vec<Angle>) -> Result<Self> {
        if settings.is_empty() {
            return Err(Error::EmptyMenu);
        }
        if settings.len() > MAX_MENU_SIZE {
            return Err(Error::MenuTooLarge(settings.len()));
        }
        for (i, s) in settings.iter().enumerate() {
            if settings[..i].iter().any(|t| t.same_axis(*s)) {
                return Err(Error::DuplicateSetting(s.degrees()));
            }
        }
        Ok(SettingMenu { settings })
    }

    pub fn from_degrees(degrees: &[f64]) -> Result<Self> {
        let settings = degrees
            .iter()
            .map(|&d| Angle::new(d))
            .collect::<Result<Vec<_>>>()?;
        SettingMenu::new(settings)
    }

    pub fn len(&self) -> usize {
        self.settings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.settings.is_empty()
    }

    pub fn settings(&self) -> &[Angle] {
        &self.settings
    }

    pub fn position(&self, setting: Angle) -> Option<usize> {
        self.settings.iter().position(|s| s.same_axis(setting))
    }

    pub fn require_position(&self, setting: Angle) -> Result<usize> {
        self.position(setting)
            .ok_or(Error::UnknownSetting(setting.degrees()))
    }

    fn strategy_count(&self) -> usize {
        1 << self.len()
    }
}

/// One instruction set, carried by both photons of a pair.
///
/// `outcomes[i]` is the answer to the menu setting at position `i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SharedStrategy {
    outcomes: Vec<Outcome>,
}

impl SharedStrategy {
    pub fn new(outcomes: Vec<Outcome>) -> Self {
        SharedStrategy { outcomes }
    }

    /// Strategy number `index` in lexicographic order (first menu position
    /// most significant, Transmit before Reflect).
    pub fn from_index(index: usize, len: usize) -> Self {
        SharedStrategy {
            outcomes: decode(index, len),
        }
    }

    pub fn index(&self) -> usize {
        self.outcomes
            .iter()
            .fold(0, |acc, o| (acc << 1) | o.index())
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }

    pub fn outcome_at(&self, position: usize) -> Outcome {
        self.outcomes[position]
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    /// `T`/`R` string in menu order, e.g. `"TRT"`.
    pub fn key(&self) -> String {
        self.outcomes.iter().map(|o| o.symbol()).collect()
    }

    pub fn parse_key(key: &str, len: usize) -> Result<Self> {
        let outcomes = key
            .chars()
            .map(|c| {
                Outcome::from_symbol(c).ok_or_else(|| Error::InvalidStrategyKey {
                    key: key.to_string(),
                    reason: format!("unexpected character {c:?}, expected T or R"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if outcomes.len() != len {
            return Err(Error::InvalidStrategyKey {
                key: key.to_string(),
                reason: format!("expected {len} symbols for the menu, got {}", outcomes.len()),
            });
        }
        Ok(SharedStrategy { outcomes })
    }
}

impl fmt::Display for SharedStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key())
    }
}

fn decode(index: usize, len: usize) -> Vec<Outcome> {
    (0..len)
        .map(|p| {
            if (index >> (len - 1 - p)) & 1 == 0 {
                Outcome::Transmit
            } else {
                Outcome::Reflect
            }
        })
        .collect()
}

/// Independent instruction sets for the two photons.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ProductStrategy {
    pub side_a: Vec<Outcome>,
    pub side_b: Vec<Outcome>,
}

pub fn enumerate_shared_strategies(menu: &SettingMenu) -> Vec<SharedStrategy> {
    (0..menu.strategy_count())
        .map(|i| SharedStrategy::from_index(i, menu.len()))
        .collect()
}

/// All `4^k` pairs of independent instruction sets, ordered by side A then B.
pub fn enumerate_product_strategies(menu: &SettingMenu) -> Vec<ProductStrategy> {
    let k = menu.len();
    let n = menu.strategy_count();
    (0..n * n)
        .map(|i| ProductStrategy {
            side_a: decode(i / n, k),
            side_b: decode(i % n, k),
        })
        .collect()
}

/// Keep the product strategies whose two photons agree at every setting of
/// the menu, i.e. those that give perfect correlation when both polarizers
/// share an orientation.
pub fn filter_perfectly_correlated(
    strategies: &[ProductStrategy],
    menu: &SettingMenu,
) -> Vec<SharedStrategy> {
    strategies
        .iter()
        .filter(|s| s.side_a.len() == menu.len() && s.side_a == s.side_b)
        .map(|s| SharedStrategy::new(s.side_a.clone()))
        .collect()
}

/// Which outcome a selector clause counts at its setting.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Polarity {
    /// Count pairs prepared to transmit.
    Parallel,
    /// Count pairs prepared to reflect.
    Perpendicular,
}

impl Polarity {
    pub fn outcome(self) -> Outcome {
        match self {
            Polarity::Parallel => Outcome::Transmit,
            Polarity::Perpendicular => Outcome::Reflect,
        }
    }
}

/// `(setting, polarity)`; a selector is a conjunction of clauses.
pub type Clause = (Angle, Polarity);

pub fn par(setting: Angle) -> Clause {
    (setting, Polarity::Parallel)
}

pub fn perp(setting: Angle) -> Clause {
    (setting, Polarity::Perpendicular)
}

/// Integer number of emitted pairs per shared strategy.
#[derive(Clone, Debug, PartialEq)]
pub struct StrategyCensus {
    menu: SettingMenu,
    counts: Vec<u64>,
    total: u64,
}

impl StrategyCensus {
    /// `counts[i]` belongs to `SharedStrategy::from_index(i, menu.len())`.
    pub fn from_counts(menu: SettingMenu, counts: Vec<u64>) -> Result<Self> {
        if counts.len() != menu.strategy_count() {
            return Err(Error::InvalidParameter(format!(
                "census over {} settings needs {} counts, got {}",
                menu.len(),
                menu.strategy_count(),
                counts.len()
            )));
        }
        let total = counts
            .iter()
            .try_fold(0u64, |acc, &c| acc.checked_add(c))
            .ok_or_else(|| Error::InvalidParameter("census total overflows u64".into()))?;
        Ok(StrategyCensus {
            menu,
            counts,
            total,
        })
    }

    pub fn uniform(menu: SettingMenu, per_strategy: u64) -> Result<Self> {
        let n = menu.strategy_count();
        StrategyCensus::from_counts(menu, vec![per_strategy; n])
    }

    /// Every pair carries the same strategy.
    pub fn concentrated(menu: SettingMenu, strategy: &SharedStrategy, pairs: u64) -> Result<Self> {
        if strategy.len() != menu.len() {
            return Err(Error::InvalidStrategyKey {
                key: strategy.key(),
                reason: format!("expected {} symbols for the menu", menu.len()),
            });
        }
        let mut counts = vec![0; menu.strategy_count()];
        counts[strategy.index()] = pairs;
        StrategyCensus::from_counts(menu, counts)
    }

    /// Build from `T`/`R` keys; strategies not mentioned get count 0.
    pub fn from_keyed<'a>(
        menu: SettingMenu,
        entries: impl IntoIterator<Item = (&'a str, u64)>,
    ) -> Result<Self> {
        let mut counts = vec![0u64; menu.strategy_count()];
        for (key, n) in entries {
            let s = SharedStrategy::parse_key(key, menu.len())?;
            counts[s.index()] = n;
        }
        StrategyCensus::from_counts(menu, counts)
    }

    pub fn menu(&self) -> &SettingMenu {
        &self.menu
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn count(&self, strategy: &SharedStrategy) -> u64 {
        self.counts[strategy.index()]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn iter(&self) -> impl Iterator<Item = (SharedStrategy, u64)> + '_ {
        let k = self.menu.len();
        self.counts
            .iter()
            .enumerate()
            .map(move |(i, &c)| (SharedStrategy::from_index(i, k), c))
    }

    /// Pairs whose strategy satisfies every clause of `selector`.
    ///
    /// `[(a, ⊥), (b, ∥)]` is N(a⊥, b); the empty selector is N₀.
    pub fn census_count(&self, selector: &[Clause]) -> Result<u64> {
        let resolved = selector
            .iter()
            .map(|&(s, pol)| Ok((self.menu.require_position(s)?, pol.outcome())))
            .collect::<Result<Vec<_>>>()?;
        Ok(self
            .iter()
            .filter(|(s, _)| resolved.iter().all(|&(p, o)| s.outcome_at(p) == o))
            .map(|(_, c)| c)
            .sum())
    }

    /// Draw one pair's strategy with probability `count / N₀`.
    pub fn sample_pair<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<SharedStrategy> {
        if self.total == 0 {
            return Err(Error::EmptyCensus);
        }
        let mut draw = rng.random_range(0..self.total);
        for (i, &c) in self.counts.iter().enumerate() {
            if draw < c {
                return Ok(SharedStrategy::from_index(i, self.menu.len()));
            }
            draw -= c;
        }
        unreachable!("draw below census total")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Census file JSON with every strategy key listed in enumeration order.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("census serialization")
    }
}

/// On-disk census layout: `{"menu_deg": [...], "counts": {"TTR": n, ...}}`.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CensusFile {
    menu_deg: Vec<f64>,
    counts: BTreeMap<String, u64>,
}

impl TryFrom<CensusFile> for StrategyCensus {
    type Error = Error;

    fn try_from(file: CensusFile) -> Result<Self> {
        let menu = SettingMenu::from_degrees(&file.menu_deg)?;
        StrategyCensus::from_keyed(menu, file.counts.iter().map(|(k, &v)| (k.as_str(), v)))
    }
}

impl<'de> Deserialize<'de> for StrategyCensus {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let file = CensusFile::deserialize(deserializer)?;
        StrategyCensus::try_from(file).map_err(serde::de::Error::custom)
    }
}

impl Serialize for StrategyCensus {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        struct Keyed<'a>(&'a StrategyCensus);
        impl Serialize for Keyed<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                let mut map = s.serialize_map(Some(self.0.counts.len()))?;
                for (strategy, c) in self.0.iter() {
                    map.serialize_entry(&strategy.key(), &c)?;
                }
                map.end()
            }
        }
        let mut s = serializer.serialize_struct("StrategyCensus", 2)?;
        let menu_deg: Vec<f64> = self.menu.settings.iter().map(|a| a.degrees()).collect();
        s.serialize_field("menu_deg", &menu_deg)?;
        s.serialize_field("counts", &Keyed(self))?;
        s.end()
    }
}
