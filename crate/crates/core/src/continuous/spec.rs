//! Named parametric density families, as written in scenario files and on
//! the command line.
//!
//! Parameters marked affine take either a constant or `[c0, c1]`, meaning
//! `c0 + c1·c` where `c` is the conditioning variable (`x` for inference
//! families, `y` for impact families).
//!
//! | form         | density in `w` (before normalisation)       |
//! |--------------|---------------------------------------------|
//! | `uniform`    | `1`                                         |
//! | `triangular` | `max(0, 1 − |w − center| / half_width)`     |
//! | `beta`       | `wᵃ (1 − w)ᵇ`                               |
//! | `tilt`       | `1 + slope·(w − ½)`, requires `|slope| ≤ 2` |
//! | `grid`       | raw samples, one row per condition          |

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{ConditionalDensityFamily, ConsumerDensities, GridDensity, Real, DEFAULT_GRID_N};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Affine {
    Constant(f64),
    Linear([f64; 2]),
}

impl Affine {
    pub fn at(&self, c: f64) -> f64 {
        match *self {
            Self::Constant(v) => v,
            Self::Linear([c0, c1]) => c0 + c1 * c,
        }
    }

    fn from_pair(c0: f64, c1: f64) -> Self {
        if c1 == 0.0 {
            Self::Constant(c0)
        } else {
            Self::Linear([c0, c1])
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FamilySpec {
    Uniform,
    Triangular { center: Affine, half_width: f64 },
    Beta { a: Affine, b: Affine },
    Tilt { slope: Affine },
    Grid { values: Vec<Vec<f64>> },
}

impl FamilySpec {
    pub fn build<T: Real>(&self, n: usize) -> Result<ConditionalDensityFamily<T>> {
        let lit = T::lit;
        match self {
            Self::Uniform => Ok(ConditionalDensityFamily::constant(GridDensity::uniform(n))),
            Self::Triangular { center, half_width } => {
                if half_width.is_nan() || *half_width <= 0.0 {
                    return Err(Error::InvalidDensity("triangular half_width must be positive".into()));
                }
                ConditionalDensityFamily::from_fn(n, |w: T, c: T| {
                    let centre = lit(center.at(c.to_f64().unwrap_or(0.0)));
                    (T::one() - (w - centre).abs() / lit(*half_width)).max(T::zero())
                })
            }
            Self::Beta { a, b } => ConditionalDensityFamily::from_fn(n, |w: T, c: T| {
                let c = c.to_f64().unwrap_or(0.0);
                let (a, b) = (lit(a.at(c)), lit(b.at(c)));
                // 0⁰ = 1 keeps endpoints finite for zero exponents.
                w.powf(a) * (T::one() - w).powf(b)
            }),
            Self::Tilt { slope } => {
                for c in [0.0, 1.0] {
                    if slope.at(c).abs() > 2.0 {
                        return Err(Error::InvalidDensity(format!(
                            "tilt slope {} at condition {c} makes the density negative",
                            slope.at(c)
                        )));
                    }
                }
                ConditionalDensityFamily::from_fn(n, |w: T, c: T| {
                    let s = lit(slope.at(c.to_f64().unwrap_or(0.0)));
                    (T::one() + s * (w - lit(0.5))).max(T::zero())
                })
            }
            Self::Grid { values } => {
                if values.len() != n + 1 {
                    return Err(Error::GridMismatch(format!(
                        "raw family has {} rows, grid needs {}",
                        values.len(),
                        n + 1
                    )));
                }
                let members = values
                    .iter()
                    .map(|row| GridDensity::new(row.iter().map(|&v| lit(v)).collect()))
                    .collect::<Result<Vec<_>>>()?;
                ConditionalDensityFamily::new(members)
            }
        }
    }
}

/// Compact command-line syntax:
/// `uniform`, `triangular(c0,c1,half_width)`, `beta(a0,a1,b0,b1)`, `tilt(s0,s1)`.
impl FromStr for FamilySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, args) = match s.split_once('(') {
            Some((name, rest)) => {
                let inner = rest
                    .strip_suffix(')')
                    .ok_or_else(|| Error::InvalidInput(format!("unclosed argument list in `{s}`")))?;
                let args = inner
                    .split(',')
                    .map(|a| {
                        a.trim()
                            .parse::<f64>()
                            .map_err(|_| Error::InvalidInput(format!("bad number `{a}` in `{s}`")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                (name.trim(), args)
            }
            None => (s, Vec::new()),
        };
        let arity = |k: usize| {
            if args.len() == k {
                Ok(())
            } else {
                Err(Error::InvalidInput(format!("`{name}` takes {k} arguments, got {}", args.len())))
            }
        };
        match name {
            "uniform" => {
                arity(0)?;
                Ok(Self::Uniform)
            }
            "triangular" => {
                arity(3)?;
                Ok(Self::Triangular {
                    center: Affine::from_pair(args[0], args[1]),
                    half_width: args[2],
                })
            }
            "beta" => {
                arity(4)?;
                Ok(Self::Beta {
                    a: Affine::from_pair(args[0], args[1]),
                    b: Affine::from_pair(args[2], args[3]),
                })
            }
            "tilt" => {
                arity(2)?;
                Ok(Self::Tilt {
                    slope: Affine::from_pair(args[0], args[1]),
                })
            }
            other => Err(Error::InvalidInput(format!("unknown density family `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConsumerFamilies {
    pub id: String,
    pub inference: FamilySpec,
    pub impact: FamilySpec,
    /// Disclosure degree used when reporting this consumer's risk density.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
}

impl ConsumerFamilies {
    pub fn build<T: Real>(&self, n: usize) -> Result<ConsumerDensities<T>> {
        Ok(ConsumerDensities {
            inference: self.inference.build(n)?,
            impact: self.impact.build(n)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContinuousSection {
    #[serde(default = "default_grid_n")]
    pub grid_n: usize,
    pub consumers: Vec<ConsumerFamilies>,
}

fn default_grid_n() -> usize {
    DEFAULT_GRID_N
}
