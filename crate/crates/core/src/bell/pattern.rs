//! Indicator sets on a single phase-space variable and the four-set sign
//! patterns built from them.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Axis;

/// A measurable subset of the real line, or a raw mask on one axis.
///
/// Intervals are open; thresholds and interval endpoints are boundaries and
/// may not coincide with an evaluation point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SetSpec {
    Above { threshold: f64 },
    Below { threshold: f64 },
    Intervals { intervals: Vec<(f64, f64)>, complement: bool },
    Mask { mask: Vec<bool> },
}

impl SetSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            SetSpec::Above { threshold } | SetSpec::Below { threshold } => {
                if !threshold.is_finite() {
                    return Err(Error::InvalidSet(format!("threshold {threshold} is not finite")));
                }
            }
            SetSpec::Intervals { intervals, .. } => {
                if intervals.is_empty() {
                    return Err(Error::InvalidSet("empty interval list".into()));
                }
                let mut last = f64::NEG_INFINITY;
                for &(a, b) in intervals {
                    if !(a.is_finite() && b.is_finite() && a < b) {
                        return Err(Error::InvalidSet(format!("bad interval ({a}, {b})")));
                    }
                    if a < last {
                        return Err(Error::InvalidSet("intervals must be sorted and disjoint".into()));
                    }
                    last = b;
                }
            }
            SetSpec::Mask { mask } => {
                if !mask.iter().any(|&m| m) || mask.iter().all(|&m| m) {
                    return Err(Error::InvalidSet("mask and its complement must be nonempty".into()));
                }
            }
        }
        Ok(())
    }

    pub fn boundaries(&self) -> Vec<f64> {
        match self {
            SetSpec::Above { threshold } | SetSpec::Below { threshold } => vec![*threshold],
            SetSpec::Intervals { intervals, .. } => {
                intervals.iter().flat_map(|&(a, b)| [a, b]).collect()
            }
            SetSpec::Mask { .. } => Vec::new(),
        }
    }

    /// Membership of a point. Boundary points and masks are rejected.
    pub fn contains(&self, x: f64) -> Result<bool> {
        if self.boundaries().contains(&x) {
            return Err(Error::InvalidSet(format!("point {x} lies on a set boundary")));
        }
        Ok(match self {
            SetSpec::Above { threshold } => x > *threshold,
            SetSpec::Below { threshold } => x < *threshold,
            SetSpec::Intervals { intervals, complement } => {
                intervals.iter().any(|&(a, b)| a < x && x < b) != *complement
            }
            SetSpec::Mask { .. } => {
                return Err(Error::InvalidSet("a mask set can only be evaluated on its grid".into()))
            }
        })
    }

    /// Indicator on the sample points of `axis`. The set and its complement
    /// must both be hit.
    pub fn indicator(&self, axis: &Axis) -> Result<Vec<bool>> {
        let ind = match self {
            SetSpec::Mask { mask } => {
                if mask.len() != axis.len() {
                    return Err(Error::ShapeMismatch {
                        expected: axis.len(),
                        actual: mask.len(),
                    });
                }
                mask.clone()
            }
            _ => {
                if let Some(b) = self.boundaries().into_iter().find(|&b| axis.exact_index(b).is_some()) {
                    return Err(Error::InvalidSet(format!("boundary {b} is a grid point")));
                }
                axis.points()
                    .into_iter()
                    .map(|x| self.contains(x))
                    .collect::<Result<_>>()?
            }
        };
        if !ind.iter().any(|&m| m) || ind.iter().all(|&m| m) {
            return Err(Error::InvalidSet(format!(
                "set {self} or its complement is empty on [{}, {}]",
                axis.min(),
                axis.max()
            )));
        }
        Ok(ind)
    }

    pub fn complement(&self) -> SetSpec {
        match self {
            SetSpec::Above { threshold } => SetSpec::Below { threshold: *threshold },
            SetSpec::Below { threshold } => SetSpec::Above { threshold: *threshold },
            SetSpec::Intervals { intervals, complement } => SetSpec::Intervals {
                intervals: intervals.clone(),
                complement: !complement,
            },
            SetSpec::Mask { mask } => SetSpec::Mask {
                mask: mask.iter().map(|m| !m).collect(),
            },
        }
    }
}

impl fmt::Display for SetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SetSpec::Above { threshold } => write!(f, ">{threshold}"),
            SetSpec::Below { threshold } => write!(f, "<{threshold}"),
            SetSpec::Intervals { intervals, complement } => {
                f.write_str(if *complement { " notin " } else { " in " })?;
                for (i, (a, b)) in intervals.iter().enumerate() {
                    if i > 0 {
                        f.write_str("|")?;
                    }
                    write!(f, "({a},{b})")?;
                }
                Ok(())
            }
            SetSpec::Mask { mask } => {
                f.write_str(" mask ")?;
                for &m in mask {
                    f.write_str(if m { "1" } else { "0" })?;
                }
                Ok(())
            }
        }
    }
}

pub const VARIABLE_NAMES: [&str; 4] = ["q1", "q2", "p1", "p2"];

/// The sets `S1` (for q1), `S2` (q2), `S'1` (p1), `S'2` (p2).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[SetSpec; 4]", into = "[SetSpec; 4]")]
pub struct SignPattern {
    sets: [SetSpec; 4],
}

impl TryFrom<[SetSpec; 4]> for SignPattern {
    type Error = Error;

    fn try_from(sets: [SetSpec; 4]) -> Result<Self> {
        SignPattern::new(sets)
    }
}

impl From<SignPattern> for [SetSpec; 4] {
    fn from(p: SignPattern) -> Self {
        p.sets
    }
}

impl SignPattern {
    pub fn new(sets: [SetSpec; 4]) -> Result<Self> {
        for s in &sets {
            s.validate()?;
        }
        Ok(SignPattern { sets })
    }

    /// All four sets are `{x > 0}`.
    pub fn theta() -> Self {
        Self::half_lines([0.0; 4])
    }

    pub fn half_lines(thresholds: [f64; 4]) -> Self {
        SignPattern {
            sets: thresholds.map(|threshold| SetSpec::Above { threshold }),
        }
    }

    pub fn sets(&self) -> &[SetSpec; 4] {
        &self.sets
    }

    pub fn set(&self, variable: usize) -> &SetSpec {
        &self.sets[variable]
    }

    pub fn complemented(&self) -> Self {
        SignPattern {
            sets: self.sets.clone().map(|s| s.complement()),
        }
    }

    /// Indicators `χ1(q1), χ2(q2), χ'1(p1), χ'2(p2)` at a phase-space point.
    pub fn indicators(&self, point: [f64; 4]) -> Result<[bool; 4]> {
        Ok([
            self.sets[0].contains(point[0])?,
            self.sets[1].contains(point[1])?,
            self.sets[2].contains(point[2])?,
            self.sets[3].contains(point[3])?,
        ])
    }
}

impl fmt::Display for SignPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (name, set)) in VARIABLE_NAMES.iter().zip(&self.sets).enumerate() {
            if i > 0 {
                f.write_str(";")?;
            }
            write!(f, "{name}{set}")?;
        }
        Ok(())
    }
}

fn parse_number(s: &str) -> Result<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("not a number: '{s}'")))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Parse(format!("not finite: '{s}'")))
    }
}

fn parse_intervals(s: &str) -> Result<Vec<(f64, f64)>> {
    s.split('|')
        .map(|part| {
            let inner = part
                .trim()
                .strip_prefix('(')
                .and_then(|x| x.strip_suffix(')'))
                .ok_or_else(|| Error::Parse(format!("expected (a,b), got '{part}'")))?;
            let (a, b) = inner
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("expected (a,b), got '{part}'")))?;
            Ok((parse_number(a)?, parse_number(b)?))
        })
        .collect()
}

fn parse_set(rest: &str) -> Result<SetSpec> {
    let rest = rest.trim_start();
    if let Some(v) = rest.strip_prefix('>') {
        return Ok(SetSpec::Above { threshold: parse_number(v)? });
    }
    if let Some(v) = rest.strip_prefix('<') {
        return Ok(SetSpec::Below { threshold: parse_number(v)? });
    }
    let (word, arg) = rest
        .split_once(char::is_whitespace)
        .ok_or_else(|| Error::Parse(format!("cannot parse set '{rest}'")))?;
    match word {
        "in" => Ok(SetSpec::Intervals { intervals: parse_intervals(arg)?, complement: false }),
        "notin" => Ok(SetSpec::Intervals { intervals: parse_intervals(arg)?, complement: true }),
        "mask" => {
            let mask = arg
                .trim()
                .chars()
                .map(|c| match c {
                    '0' => Ok(false),
                    '1' => Ok(true),
                    _ => Err(Error::Parse(format!("mask digit '{c}'"))),
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(SetSpec::Mask { mask })
        }
        _ => Err(Error::Parse(format!("unknown set operator '{word}'"))),
    }
}

/// Parses `theta` or four `;`-separated clauses such as
/// `q1>0;q2<1.5;p1 in (0,1)|(2,3);p2 notin (-1,1)`.
impl FromStr for SignPattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "theta" {
            return Ok(SignPattern::theta());
        }
        let mut sets: [Option<SetSpec>; 4] = Default::default();
        for clause in s.split(';') {
            let clause = clause.trim();
            let var = VARIABLE_NAMES
                .iter()
                .position(|v| clause.starts_with(v))
                .ok_or_else(|| Error::Parse(format!("clause '{clause}' names no variable")))?;
            if sets[var].is_some() {
                return Err(Error::Parse(format!("{} given twice", VARIABLE_NAMES[var])));
            }
            let set = parse_set(&clause[2..])?;
            set.validate()?;
            sets[var] = Some(set);
        }
        let [a, b, c, d] = sets;
        match (a, b, c, d) {
            (Some(a), Some(b), Some(c), Some(d)) => SignPattern::new([a, b, c, d]),
            _ => Err(Error::Parse(format!("pattern '{s}' must set q1, q2, p1 and p2"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display_round_trip() {
        for s in [
            "theta",
            "q1>0;q2>0;p1>0;p2>0",
            "p2<-1;q1>0.5;q2 in (0,1)|(2,3);p1 notin (-1,1)",
            "q1 mask 0110;q2>0;p1>0;p2>0",
        ] {
            let p: SignPattern = s.parse().unwrap();
            let again: SignPattern = p.to_string().parse().unwrap();
            assert_eq!(p, again);
        }
        assert_eq!("theta".parse::<SignPattern>().unwrap(), SignPattern::theta());
    }

    #[test]
    fn parse_rejects_malformed() {
        for s in [
            "",
            "q1>0;q2>0;p1>0",
            "q1>0;q1>0;p1>0;p2>0",
            "q1>x;q2>0;p1>0;p2>0",
            "q1 in (1,0);q2>0;p1>0;p2>0",
            "q1 in (0,2)|(1,3);q2>0;p1>0;p2>0",
            "q1 mask 0000;q2>0;p1>0;p2>0",
            "q1 mask 01a;q2>0;p1>0;p2>0",
            "q1>inf;q2>0;p1>0;p2>0",
            "x1>0;q2>0;p1>0;p2>0",
        ] {
            assert!(s.parse::<SignPattern>().is_err(), "{s}");
        }
    }

    #[test]
    fn boundary_points_are_rejected() {
        let s = SetSpec::Intervals { intervals: vec![(0.0, 1.0)], complement: false };
        assert!(s.contains(0.0).is_err());
        assert!(s.contains(1.0).is_err());
        assert!(s.contains(0.5).unwrap());
        assert!(!s.complement().contains(0.5).unwrap());
        let a = Axis::new(4, 0.0, 4.0).unwrap();
        assert!(SetSpec::Above { threshold: 1.5 }.indicator(&a).is_err());
        assert_eq!(SetSpec::Above { threshold: 2.0 }.indicator(&a).unwrap(), [false, false, true, true]);
        assert!(SetSpec::Above { threshold: 10.0 }.indicator(&a).is_err());
    }

    #[test]
    fn serde_validates() {
        let p = SignPattern::theta();
        let js = serde_json::to_string(&p).unwrap();
        assert_eq!(serde_json::from_str::<SignPattern>(&js).unwrap(), p);
        let bad = js.replace("0.0", "1e999");
        assert!(serde_json::from_str::<SignPattern>(&bad).is_err());
    }
}
