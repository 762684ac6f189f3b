use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::unit_ball_volume;

/// A bounded region of ℝ^d with an exact membership test.
///
/// `Dilated` is the closed w-neighbourhood {x : dist(x, base) ≤ w} of a box, used
/// for Ω together with its collar.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainRegion {
    Box { lower: Vec<f64>, upper: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
    Dilated { base: Box<DomainRegion>, width: f64 },
}

impl DomainRegion {
    pub fn unit_cube(d: usize) -> Self {
        DomainRegion::Box {
            lower: vec![0.0; d],
            upper: vec![1.0; d],
        }
    }

    pub fn unit_square() -> Self {
        Self::unit_cube(2)
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Self {
        DomainRegion::Ball { center, radius }
    }

    /// Checks dimensions and positive volume.
    pub fn validate(&self) -> Result<()> {
        match self {
            DomainRegion::Box { lower, upper } => {
                if lower.is_empty() || lower.len() != upper.len() {
                    return Err(Error::InvalidInput(
                        "box corners must be non-empty and of equal dimension".into(),
                    ));
                }
                if lower
                    .iter()
                    .zip(upper)
                    .any(|(l, u)| !(l.is_finite() && u.is_finite() && u > l))
                {
                    return Err(Error::InvalidInput("box must have positive volume".into()));
                }
            }
            DomainRegion::Ball { center, radius } => {
                if center.is_empty() || center.iter().any(|c| !c.is_finite()) {
                    return Err(Error::InvalidInput("ball center must be finite".into()));
                }
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(Error::InvalidInput("ball radius must be positive".into()));
                }
            }
            DomainRegion::Dilated { base, width } => {
                base.validate()?;
                if !matches!(**base, DomainRegion::Box { .. }) {
                    return Err(Error::InvalidInput("only boxes may be dilated".into()));
                }
                if !(width.is_finite() && *width >= 0.0) {
                    return Err(Error::InvalidInput("dilation width must be non-negative".into()));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self {
            DomainRegion::Box { lower, .. } => lower.len(),
            DomainRegion::Ball { center, .. } => center.len(),
            DomainRegion::Dilated { base, .. } => base.dim(),
        }
    }

    /// Euclidean distance from `x` to the region (zero inside).
    pub fn distance(&self, x: &[f64]) -> f64 {
        match self {
            DomainRegion::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(&xi, (&l, &u))| {
                    let gap = (l - xi).max(xi - u).max(0.0);
                    gap * gap
                })
                .sum::<f64>()
                .sqrt(),
            DomainRegion::Ball { center, radius } => (super::distance(x, center) - radius).max(0.0),
            // exact for convex bases
            DomainRegion::Dilated { base, width } => (base.distance(x) - width).max(0.0),
        }
    }

    /// Distance from an interior point `x` to the boundary (zero outside).
    pub fn boundary_distance(&self, x: &[f64]) -> f64 {
        if !self.contains(x) {
            return 0.0;
        }
        match self {
            DomainRegion::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(&xi, (&l, &u))| (xi - l).min(u - xi))
                .fold(f64::INFINITY, f64::min),
            DomainRegion::Ball { center, radius } => radius - super::distance(x, center),
            // inside the base box the nearest boundary point is straight out
            DomainRegion::Dilated { base, width } => {
                if base.contains(x) {
                    base.boundary_distance(x) + width
                } else {
                    width - base.distance(x)
                }
            }
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            DomainRegion::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .all(|(&xi, (&l, &u))| xi >= l && xi <= u),
            DomainRegion::Ball { center, radius } => super::distance(x, center) <= *radius,
            DomainRegion::Dilated { base, width } => base.distance(x) <= *width,
        }
    }

    pub fn volume(&self) -> f64 {
        match self {
            DomainRegion::Box { lower, upper } => {
                lower.iter().zip(upper).map(|(l, u)| u - l).product()
            }
            DomainRegion::Ball { center, radius } => {
                unit_ball_volume(center.len()) * radius.powi(center.len() as i32)
            }
            DomainRegion::Dilated { base, width } => {
                // Steiner formula: Σ_k e_{d-k}(sides) ω_k w^k
                let (lower, upper) = base.bounding_box();
                let sides: Vec<f64> = lower.iter().zip(&upper).map(|(l, u)| u - l).collect();
                let d = sides.len();
                let mut elementary = vec![0.0; d + 1];
                elementary[0] = 1.0;
                for &s in &sides {
                    for j in (1..=d).rev() {
                        elementary[j] += elementary[j - 1] * s;
                    }
                }
                (0..=d)
                    .map(|k| elementary[d - k] * unit_ball_volume(k) * width.powi(k as i32))
                    .sum()
            }
        }
    }

    /// Axis-aligned bounding box `(lower, upper)`.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            DomainRegion::Box { lower, upper } => (lower.clone(), upper.clone()),
            DomainRegion::Ball { center, radius } => (
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            ),
            DomainRegion::Dilated { base, width } => {
                let (lower, upper) = base.bounding_box();
                (
                    lower.iter().map(|l| l - width).collect(),
                    upper.iter().map(|u| u + width).collect(),
                )
            }
        }
    }

    /// Radius of the largest inscribed ball.
    pub fn inradius(&self) -> f64 {
        match self {
            DomainRegion::Box { lower, upper } => lower
                .iter()
                .zip(upper)
                .map(|(l, u)| 0.5 * (u - l))
                .fold(f64::INFINITY, f64::min),
            DomainRegion::Ball { radius, .. } => *radius,
            DomainRegion::Dilated { base, width } => base.inradius() + width,
        }
    }

    pub fn diameter(&self) -> f64 {
        let (lower, upper) = self.bounding_box();
        match self {
            DomainRegion::Ball { radius, .. } => 2.0 * radius,
            _ => super::distance(&lower, &upper),
        }
    }

    /// The closed `width`-neighbourhood of this region.
    pub fn dilate(&self, width: f64) -> Result<DomainRegion> {
        let region = match self {
            DomainRegion::Ball { center, radius } => DomainRegion::Ball {
                center: center.clone(),
                radius: radius + width,
            },
            DomainRegion::Box { .. } => DomainRegion::Dilated {
                base: Box::new(self.clone()),
                width,
            },
            DomainRegion::Dilated { base, width: w } => DomainRegion::Dilated {
                base: base.clone(),
                width: w + width,
            },
        };
        region.validate()?;
        Ok(region)
    }

    /// Uniform sample from the region (rejection from the bounding box).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let (lower, upper) = self.bounding_box();
        loop {
            let x: Vec<f64> = lower
                .iter()
                .zip(&upper)
                .map(|(&l, &u)| l + (u - l) * rng.random::<f64>())
                .collect();
            if self.contains(&x) {
                return x;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn box_membership_and_distance() {
        let square = DomainRegion::unit_square();
        assert!(square.contains(&[0.0, 1.0]));
        assert!(!square.contains(&[1.0 + 1e-12, 0.5]));
        assert_eq!(square.distance(&[0.5, 0.5]), 0.0);
        assert_relative_eq!(square.distance(&[2.0, 2.0]), 2f64.sqrt());
        assert_eq!(square.inradius(), 0.5);
    }

    #[test]
    fn dilated_square_volume_is_steiner() {
        let w = 0.3;
        let region = DomainRegion::unit_square().dilate(w).unwrap();
        assert_relative_eq!(region.volume(), 1.0 + 4.0 * w + PI * w * w, max_relative = 1e-14);
        assert!(region.contains(&[1.2, 1.2]));
        assert!(!region.contains(&[1.25, 1.25]));
        assert!(region.contains(&[-0.3, 0.5]));
    }

    #[test]
    fn ball_volume() {
        let ball = DomainRegion::ball(vec![0.0, 0.0, 0.0], 2.0);
        assert_relative_eq!(ball.volume(), 4.0 / 3.0 * PI * 8.0, max_relative = 1e-14);
        assert_eq!(ball.dilate(1.0).unwrap(), DomainRegion::ball(vec![0.0; 3], 3.0));
    }

    #[test]
    fn invalid_regions() {
        let flat = DomainRegion::Box {
            lower: vec![0.0, 0.0],
            upper: vec![1.0, 0.0],
        };
        assert!(flat.validate().is_err());
        assert!(DomainRegion::ball(vec![0.0], -1.0).validate().is_err());
    }

    #[test]
    fn wire_format() {
        let json = r#"{"kind":"box","lower":[0.0,0.0],"upper":[1.0,1.0]}"#;
        let region: DomainRegion = serde_json::from_str(json).unwrap();
        assert_eq!(region, DomainRegion::unit_square());
    }
}
