//! Continuous inference and impact densities on `[0, 1]`.
//!
//! Densities are tabulated on a uniform grid of `n` intervals and integrated
//! with the composite trapezoid rule. A conditional family holds one density
//! per grid point of the conditioning variable and is linearly interpolated
//! between grid points.
//!
//! The risk density for disclosure degree `x` is
//!
//! ```text
//! f_Z(z; x) = ∫₀¹ f_Z(z; y) · f_I(y; x) dy
//! ```
//!
//! and a descriptor of a density `f` induced by `h` is `∫₀¹ h(w) f(w) dw`.

pub mod spec;

use std::fmt::Debug;

use num_traits::{Float, FromPrimitive};

use crate::error::{Error, Result};

/// Default number of grid intervals.
pub const DEFAULT_GRID_N: usize = 256;
/// Allowed drift of a density's integral from 1.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-6;
/// Root-finding tolerance on the disclosure degree.
pub const ROOT_TOLERANCE: f64 = 1e-6;
pub const MAX_BISECTIONS: usize = 100;

pub trait Real: Float + FromPrimitive + Debug + Send + Sync + 'static {
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("representable literal")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Uniform grid of `n` intervals on `[0, 1]`.
pub fn grid_points<T: Real>(n: usize) -> Vec<T> {
    (0..=n).map(|k| T::lit(k as f64) / T::lit(n as f64)).collect()
}

/// Composite trapezoid rule for samples with spacing `h`.
pub fn trapezoid<T: Real>(values: &[T], h: T) -> T {
    match values {
        [] | [_] => T::zero(),
        [first, inner @ .., last] => {
            let interior = inner.iter().fold(T::zero(), |acc, &v| acc + v);
            h * ((*first + *last) / T::lit(2.0) + interior)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridDensity<T> {
    values: Vec<T>,
}

impl<T: Real> GridDensity<T> {
    /// Wraps tabulated values, requiring non-negativity and unit mass.
    pub fn new(values: Vec<T>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidDensity("need at least two samples".into()));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < T::zero()) {
            return Err(Error::InvalidDensity(format!("sample {v:?} is negative or non-finite")));
        }
        let d = Self { values };
        let mass = d.integral();
        if (mass - T::one()).abs() > T::lit(NORMALIZATION_TOLERANCE) {
            return Err(Error::InvalidDensity(format!("integrates to {mass:?}, not 1")));
        }
        Ok(d)
    }

    /// Tabulates `f` on `n` intervals and rescales to unit mass.
    pub fn from_fn_normalized(n: usize, f: impl Fn(T) -> T) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDensity("grid needs at least one interval".into()));
        }
        let values: Vec<T> = grid_points(n).into_iter().map(f).collect();
        Self::normalized(values)
    }

    pub fn normalized(mut values: Vec<T>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < T::zero()) {
            return Err(Error::InvalidDensity(format!("sample {v:?} is negative or non-finite")));
        }
        let mass = trapezoid(&values, T::one() / T::lit((values.len() - 1) as f64));
        if mass <= T::zero() {
            return Err(Error::InvalidDensity("zero mass on this grid".into()));
        }
        values.iter_mut().for_each(|v| *v = *v / mass);
        Ok(Self { values })
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            values: vec![T::one(); n + 1],
        }
    }

    pub fn intervals(&self) -> usize {
        self.values.len() - 1
    }

    pub fn spacing(&self) -> T {
        T::one() / T::lit(self.intervals() as f64)
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn integral(&self) -> T {
        trapezoid(&self.values, self.spacing())
    }

    pub fn mean(&self) -> T {
        descriptor(|w| w, self)
    }

    /// Cumulative distribution at the grid points (trapezoid partial sums).
    pub fn cdf(&self) -> Vec<T> {
        let h = self.spacing();
        let mut acc = T::zero();
        let mut out = Vec::with_capacity(self.values.len());
        out.push(T::zero());
        for w in self.values.windows(2) {
            acc = acc + h * (w[0] + w[1]) / T::lit(2.0);
            out.push(acc);
        }
        out
    }
}

/// `∫₀¹ h(w) f(w) dw` by the trapezoid rule on `f`'s grid.
pub fn descriptor<T: Real>(h: impl Fn(T) -> T, f: &GridDensity<T>) -> T {
    let points = grid_points::<T>(f.intervals());
    let integrand: Vec<T> = points.iter().zip(&f.values).map(|(&w, &v)| h(w) * v).collect();
    trapezoid(&integrand, f.spacing())
}

/// Largest pointwise difference between two densities on the same grid.
pub fn sup_distance<T: Real>(a: &GridDensity<T>, b: &GridDensity<T>) -> Result<T> {
    same_grid(a.intervals(), b.intervals())?;
    Ok(a.values
        .iter()
        .zip(&b.values)
        .fold(T::zero(), |m, (&x, &y)| m.max((x - y).abs())))
}

/// Kolmogorov distance between the distributions of two densities. A
/// diagnostic for how far two consumers are from identical impact laws.
pub fn cdf_sup_distance<T: Real>(a: &GridDensity<T>, b: &GridDensity<T>) -> Result<T> {
    same_grid(a.intervals(), b.intervals())?;
    Ok(a.cdf()
        .iter()
        .zip(b.cdf())
        .fold(T::zero(), |m, (&x, y)| m.max((x - y).abs())))
}

fn same_grid(a: usize, b: usize) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::GridMismatch(format!("{a} intervals vs {b} intervals")))
    }
}

/// One density per grid value of the conditioning variable.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalDensityFamily<T> {
    members: Vec<GridDensity<T>>,
}

impl<T: Real> ConditionalDensityFamily<T> {
    pub fn new(members: Vec<GridDensity<T>>) -> Result<Self> {
        let n = members
            .first()
            .ok_or_else(|| Error::InvalidDensity("empty family".into()))?
            .intervals();
        if members.len() != n + 1 {
            return Err(Error::GridMismatch(format!(
                "{} members for a grid of {n} intervals",
                members.len()
            )));
        }
        for m in &members {
            same_grid(n, m.intervals())?;
        }
        Ok(Self { members })
    }

    /// Builds `f(w; c)` for every grid condition `c`, normalising each member.
    pub fn from_fn(n: usize, f: impl Fn(T, T) -> T) -> Result<Self> {
        let members = grid_points::<T>(n)
            .into_iter()
            .map(|c| GridDensity::from_fn_normalized(n, |w| f(w, c)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(members)
    }

    /// The same density for every condition.
    pub fn constant(density: GridDensity<T>) -> Self {
        let n = density.intervals();
        Self {
            members: vec![density; n + 1],
        }
    }

    pub fn intervals(&self) -> usize {
        self.members.len() - 1
    }

    pub fn member(&self, k: usize) -> &GridDensity<T> {
        &self.members[k]
    }

    /// Density at condition `c`, linearly interpolated between grid members.
    pub fn at(&self, c: T) -> Result<GridDensity<T>> {
        if !(c >= T::zero() && c <= T::one()) {
            return Err(Error::InvalidInput(format!("condition {c:?} outside [0, 1]")));
        }
        let n = self.intervals();
        let pos = c * T::lit(n as f64);
        let lo = pos.floor().to_usize().unwrap_or(0).min(n);
        let frac = pos - T::lit(lo as f64);
        if lo == n || frac.is_zero() {
            return Ok(self.members[lo].clone());
        }
        let (a, b) = (&self.members[lo].values, &self.members[lo + 1].values);
        Ok(GridDensity {
            values: a
                .iter()
                .zip(b)
                .map(|(&u, &v)| u * (T::one() - frac) + v * frac)
                .collect(),
        })
    }
}

/// Inference family `f_I(y; x)` and impact family `f_Z(z; y)` of one consumer.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsumerDensities<T> {
    pub inference: ConditionalDensityFamily<T>,
    pub impact: ConditionalDensityFamily<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RiskDensity<T> {
    pub density: GridDensity<T>,
    /// `∫ f − 1` before any renormalisation.
    pub drift: T,
    pub renormalized: bool,
}

/// `f_Z(z; x) = ∫₀¹ f_Z(z; y) f_I(y; x) dy`, one trapezoid sum per `z` sample.
pub fn risk_density<T: Real>(
    impact: &ConditionalDensityFamily<T>,
    inference: &ConditionalDensityFamily<T>,
    x: T,
) -> Result<RiskDensity<T>> {
    let n = impact.intervals();
    same_grid(n, inference.intervals())?;
    let f_i = inference.at(x)?;
    let h = f_i.spacing();
    let mut column = vec![T::zero(); n + 1];
    let values: Vec<T> = (0..=n)
        .map(|k| {
            for (j, slot) in column.iter_mut().enumerate() {
                *slot = impact.members[j].values[k] * f_i.values[j];
            }
            trapezoid(&column, h)
        })
        .collect();
    let mut density = GridDensity { values };
    let drift = density.integral() - T::one();
    let renormalized = drift.abs() > T::lit(NORMALIZATION_TOLERANCE);
    if renormalized {
        density = GridDensity::normalized(density.values)?;
    }
    Ok(RiskDensity {
        density,
        drift,
        renormalized,
    })
}

/// Difference of the mean impacts of two consumers at degrees `x1`, `x2`.
pub fn equal_impact_residual<T: Real>(
    first: &ConsumerDensities<T>,
    x1: T,
    second: &ConsumerDensities<T>,
    x2: T,
) -> Result<T> {
    let a = risk_density(&first.impact, &first.inference, x1)?;
    let b = risk_density(&second.impact, &second.inference, x2)?;
    Ok(a.density.mean() - b.density.mean())
}

/// Finds `x₂` with equal mean impact by bisection on `[0, 1]`. Returns `None`
/// when the residual does not change sign between the endpoints.
pub fn solve_matching_disclosure<T: Real>(
    first: &ConsumerDensities<T>,
    second: &ConsumerDensities<T>,
    x1: T,
) -> Result<Option<T>> {
    let target = risk_density(&first.impact, &first.inference, x1)?.density.mean();
    let residual = |x2: T| -> Result<T> {
        Ok(target - risk_density(&second.impact, &second.inference, x2)?.density.mean())
    };
    let (mut lo, mut hi) = (T::zero(), T::one());
    let (r_lo, r_hi) = (residual(lo)?, residual(hi)?);
    if r_lo.is_zero() {
        return Ok(Some(lo));
    }
    if r_hi.is_zero() {
        return Ok(Some(hi));
    }
    if r_lo.signum() == r_hi.signum() {
        return Ok(None);
    }
    let tol = T::lit(ROOT_TOLERANCE);
    let mut sign_lo = r_lo.signum();
    for _ in 0..MAX_BISECTIONS {
        let mid = (lo + hi) / T::lit(2.0);
        let r = residual(mid)?;
        if r.is_zero() {
            return Ok(Some(mid));
        }
        if r.signum() == sign_lo {
            lo = mid;
            sign_lo = r.signum();
        } else {
            hi = mid;
        }
        // Stop on the bracket width, which also bounds the residual by continuity.
        if hi - lo <= tol * tol {
            break;
        }
    }
    let root = (lo + hi) / T::lit(2.0);
    Ok((residual(root)?.abs() <= tol).then_some(root))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tilt(n: usize, s0: f64, s1: f64) -> ConditionalDensityFamily<f64> {
        ConditionalDensityFamily::from_fn(n, |w, c| 1.0 + (s0 + s1 * c) * (w - 0.5)).unwrap()
    }

    /// `f_Z(z; y)` with conditional mean `1/2 + γ(y − 1/2)`.
    fn mean_tracking(n: usize, gamma: f64) -> ConditionalDensityFamily<f64> {
        ConditionalDensityFamily::from_fn(n, |z, y| 1.0 + 12.0 * gamma * (y - 0.5) * (z - 0.5)).unwrap()
    }

    fn uniform_family(n: usize) -> ConditionalDensityFamily<f64> {
        ConditionalDensityFamily::constant(GridDensity::uniform(n))
    }

    #[test]
    fn trapezoid_is_exact_for_linear() {
        let pts = grid_points::<f64>(8);
        let v: Vec<f64> = pts.iter().map(|w| 3.0 * w + 1.0).collect();
        assert!((trapezoid(&v, 1.0 / 8.0) - 2.5).abs() < 1e-15);
    }

    #[test]
    fn density_validation() {
        assert!(GridDensity::new(vec![1.0, 1.0]).is_ok());
        assert!(GridDensity::new(vec![2.0, 2.0]).is_err());
        assert!(GridDensity::new(vec![-1.0, 3.0]).is_err());
        assert!(GridDensity::new(vec![1.0]).is_err());
        assert!(GridDensity::<f64>::normalized(vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn descriptor_examples() {
        let u = GridDensity::<f64>::uniform(256);
        assert!((descriptor(|w| w, &u) - 0.5).abs() < 1e-12);
        assert!((descriptor(|_| 1.0, &u) - 1.0).abs() < 1e-12);
        for n in [64usize, 256] {
            let u = GridDensity::<f64>::uniform(n);
            let err = (descriptor(|w| w * w, &u) - 1.0 / 3.0).abs();
            // Trapezoid error for w² is exactly h²/6.
            let h = 1.0 / n as f64;
            assert!((err - h * h / 6.0).abs() < 1e-14, "n={n} err={err}");
        }
    }

    #[test]
    fn uniform_convolution_stays_uniform() {
        let r = risk_density(&uniform_family(64), &uniform_family(64), 0.3).unwrap();
        assert!(r.density.values().iter().all(|v| (v - 1.0).abs() < 1e-12));
        assert!(!r.renormalized);
    }

    #[test]
    fn condition_independent_impact_passes_through() {
        let fz = GridDensity::from_fn_normalized(128, |z: f64| z * z * (1.0 - z)).unwrap();
        let family = ConditionalDensityFamily::constant(fz.clone());
        let r = risk_density(&family, &tilt(128, -1.5, 3.0), 0.7).unwrap();
        assert!(sup_distance(&r.density, &fz).unwrap() < 1e-12);
    }

    #[test]
    fn interpolation_is_exact_for_affine_families() {
        let fam = tilt(16, -1.0, 2.0);
        let mid = fam.at(0.53).unwrap();
        let direct = GridDensity::from_fn_normalized(16, |w| 1.0 + (-1.0 + 2.0 * 0.53) * (w - 0.5)).unwrap();
        assert!(sup_distance(&mid, &direct).unwrap() < 1e-12);
        assert!(fam.at(1.2).is_err());
    }

    #[test]
    fn grid_mismatch_is_an_error() {
        let err = risk_density(&uniform_family(8), &uniform_family(16), 0.5).unwrap_err();
        assert!(matches!(err, Error::GridMismatch(_)));
    }

    #[test]
    fn dominating_inference_raises_mean_impact() {
        let fz = mean_tracking(128, 0.3);
        let strong = ConsumerDensities {
            inference: tilt(128, 1.5, 0.0),
            impact: fz.clone(),
        };
        let weak = ConsumerDensities {
            inference: tilt(128, -1.5, 0.0),
            impact: fz,
        };
        assert!(equal_impact_residual(&strong, 0.4, &weak, 0.4).unwrap() > 0.0);
        assert_eq!(equal_impact_residual(&strong, 0.4, &strong, 0.4).unwrap(), 0.0);
    }

    #[test]
    fn symmetric_consumers_match_at_same_degree() {
        let c = ConsumerDensities {
            inference: tilt(256, -1.0, 2.0),
            impact: mean_tracking(256, 0.25),
        };
        for x1 in [0.0, 0.2, 0.731, 1.0] {
            let x2 = solve_matching_disclosure(&c, &c, x1).unwrap().unwrap();
            assert!((x2 - x1).abs() <= 1e-6, "x1={x1} x2={x2}");
        }
    }

    #[test]
    fn linear_mean_crossing_matches_closed_form() {
        // Inference means 1/2 + s(x)/12 with s₁(x) = -1 + 1.5x and s₂(x) = -1.8 + 3x;
        // equal means ⇔ s₁(x₁) = s₂(x₂) ⇔ x₂ = (0.8 + 1.5x₁)/3.
        let fz = mean_tracking(256, 0.3);
        let c1 = ConsumerDensities {
            inference: tilt(256, -1.0, 1.5),
            impact: fz.clone(),
        };
        let c2 = ConsumerDensities {
            inference: tilt(256, -1.8, 3.0),
            impact: fz,
        };
        for x1 in [0.1, 0.5, 0.9] {
            let expected = (0.8 + 1.5 * x1) / 3.0;
            let x2 = solve_matching_disclosure(&c1, &c2, x1).unwrap().unwrap();
            assert!((x2 - expected).abs() <= 1e-6, "x1={x1}: {x2} vs {expected}");
        }
    }

    #[test]
    fn no_bracket_returns_none() {
        let fz = mean_tracking(64, 0.3);
        let high = ConsumerDensities {
            inference: tilt(64, 2.0, 0.0),
            impact: fz.clone(),
        };
        let low = ConsumerDensities {
            inference: tilt(64, -2.0, 1.0),
            impact: fz,
        };
        assert_eq!(solve_matching_disclosure(&high, &low, 0.5).unwrap(), None);
    }

    #[test]
    fn cdf_distance_is_a_probability() {
        let a = GridDensity::from_fn_normalized(64, |w: f64| w).unwrap();
        let b = GridDensity::from_fn_normalized(64, |w: f64| 1.0 - w).unwrap();
        let d = cdf_sup_distance(&a, &b).unwrap();
        assert!(d > 0.2 && d <= 1.0);
        assert_eq!(cdf_sup_distance(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn works_in_f32() {
        let u = GridDensity::<f32>::uniform(64);
        assert!((descriptor(|w| w, &u) - 0.5).abs() < 1e-6);
    }
}
