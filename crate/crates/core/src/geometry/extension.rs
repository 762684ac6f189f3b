use std::collections::HashMap;

use super::{fill_distance, probe_grid_step, DomainRegion, PointSet};
use crate::error::{Error, Result};

/// Tuning of the collar extension.
#[derive(Clone, Debug)]
pub struct ExtensionOptions {
    /// Net spacing ε. `None` measures an upper bound for the fill distance of Ξ in Ω.
    pub spacing: Option<f64>,
    /// Candidate lattice nodes per ε along each axis.
    pub candidates_per_spacing: usize,
}

impl Default for ExtensionOptions {
    fn default() -> Self {
        ExtensionOptions {
            spacing: None,
            candidates_per_spacing: 32,
        }
    }
}

/// Upper bound for h(Ξ, Ω) on a box: a fine probe maximum plus half a probe-cell
/// diagonal.
pub fn fill_distance_upper_bound(xi: &PointSet, omega: &DomainRegion) -> Result<f64> {
    let (fine, density) = refined_fill(xi, omega)?;
    Ok(fine + 0.5 * probe_grid_step(omega, density))
}

/// Fill distance on a probe lattice about eight times finer than h itself;
/// returns the estimate and the lattice density used.
pub(crate) fn refined_fill(points: &PointSet, region: &DomainRegion) -> Result<(f64, usize)> {
    let coarse = fill_distance(points, region, 64)?;
    let (lower, upper) = region.bounding_box();
    let longest = lower
        .iter()
        .zip(&upper)
        .map(|(l, u)| u - l)
        .fold(0.0, f64::max);
    // keep the probe count near a few million regardless of dimension
    let cap = (4.0e6f64.powf(1.0 / region.dim() as f64) as usize).clamp(64, 2048);
    let density = ((8.0 * longest / coarse).ceil() as usize + 1).clamp(64, cap);
    Ok((fill_distance(points, region, density)?, density))
}

/// A lower estimate of h(X, Ω) from a probe lattice adapted to h.
pub fn fill_distance_refined(points: &PointSet, region: &DomainRegion) -> Result<f64> {
    Ok(refined_fill(points, region)?.0)
}

/// Extends Ξ ⊂ Ω by a greedy maximal ε-net of the uncovered part of the collar
/// {x ∉ Ω : dist(x, Ω) ≤ collar_width}, with ε an upper bound for h(Ξ, Ω).
///
/// The result keeps Ξ as its leading points, satisfies X̃ ∩ Ω = Ξ and
/// q(X̃) ≥ min(q(Ξ), ε/2), and fills Ω ∪ collar to within ε plus the candidate
/// lattice resolution.
pub fn extend_pointset(xi: &PointSet, omega: &DomainRegion, collar_width: f64) -> Result<PointSet> {
    extend_pointset_with(xi, omega, collar_width, &ExtensionOptions::default())
}

pub fn extend_pointset_with(
    xi: &PointSet,
    omega: &DomainRegion,
    collar_width: f64,
    options: &ExtensionOptions,
) -> Result<PointSet> {
    omega.validate()?;
    if !(collar_width > 0.0 && collar_width.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "collar width must be positive, got {collar_width}"
        )));
    }
    if xi.is_empty() {
        return Err(Error::InvalidInput("cannot extend an empty point set".into()));
    }
    if xi.dim() != omega.dim() {
        return Err(Error::InvalidInput("point set and domain dimensions differ".into()));
    }
    if let Some(i) = (0..xi.len()).find(|&i| !omega.contains(xi.point(i))) {
        return Err(Error::InvalidInput(format!(
            "point {i} of the set to extend lies outside the domain"
        )));
    }
    let spacing = match options.spacing {
        Some(s) if s > 0.0 => s,
        Some(s) => {
            return Err(Error::InvalidInput(format!("net spacing must be positive, got {s}")))
        }
        None => fill_distance_upper_bound(xi, omega)?,
    };
    let region = omega.dilate(collar_width)?;
    let d = xi.dim();
    let step = spacing / options.candidates_per_spacing.max(1) as f64;
    let (lower, upper) = region.bounding_box();
    let counts: Vec<usize> = lower
        .iter()
        .zip(&upper)
        .map(|(l, u)| ((u - l) / step).floor() as usize + 1)
        .collect();

    let mut net = AcceptedNet::new(d, spacing);
    let mut coords = xi.coords().to_vec();
    let mut x = vec![0.0; d];
    let mut cursor = vec![0usize; d];
    'lattice: loop {
        for k in 0..d {
            x[k] = lower[k] + cursor[k] as f64 * step;
        }
        let outside = omega.distance(&x);
        if outside > 0.0
            && outside <= collar_width
            && xi.distance_to(&x) > spacing
            && net.is_clear(&x)
        {
            net.insert(&x);
            coords.extend_from_slice(&x);
        }
        let mut k = 0;
        loop {
            if k == d {
                break 'lattice;
            }
            cursor[k] += 1;
            if cursor[k] < counts[k] {
                break;
            }
            cursor[k] = 0;
            k += 1;
        }
    }
    PointSet::new(d, coords, Some(region))
}

/// Accepted net points bucketed in cells of side ε.
struct AcceptedNet {
    dim: usize,
    spacing: f64,
    points: Vec<f64>,
    cells: HashMap<Vec<i64>, Vec<usize>>,
}

impl AcceptedNet {
    fn new(dim: usize, spacing: f64) -> Self {
        AcceptedNet {
            dim,
            spacing,
            points: Vec::new(),
            cells: HashMap::new(),
        }
    }

    fn key(&self, x: &[f64]) -> Vec<i64> {
        x.iter().map(|c| (c / self.spacing).floor() as i64).collect()
    }

    fn is_clear(&self, x: &[f64]) -> bool {
        let base = self.key(x);
        let neighbours = 3usize.pow(self.dim as u32);
        let mut key = base.clone();
        for code in 0..neighbours {
            let mut rest = code;
            for k in 0..self.dim {
                key[k] = base[k] + (rest % 3) as i64 - 1;
                rest /= 3;
            }
            if let Some(members) = self.cells.get(&key) {
                for &i in members {
                    let p = &self.points[i * self.dim..(i + 1) * self.dim];
                    if super::distance(p, x) < self.spacing {
                        return false;
                    }
                }
            }
        }
        true
    }

    fn insert(&mut self, x: &[f64]) {
        let i = self.points.len() / self.dim;
        self.points.extend_from_slice(x);
        let key = self.key(x);
        self.cells.entry(key).or_default().push(i);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{generate_quasi_uniform, separation_radius};

    #[test]
    fn dense_set_gets_no_additions() {
        // a fine grid already covering the collar at the requested spacing
        let omega = DomainRegion::Box {
            lower: vec![0.2, 0.2],
            upper: vec![0.8, 0.8],
        };
        let mut pts = Vec::new();
        for i in 0..=60 {
            for j in 0..=60 {
                pts.push(vec![0.2 + 0.01 * i as f64, 0.2 + 0.01 * j as f64]);
            }
        }
        let xi = PointSet::from_points(&pts, None).unwrap();
        let options = ExtensionOptions {
            spacing: Some(0.2),
            ..Default::default()
        };
        let extended = extend_pointset_with(&xi, &omega, 0.1, &options).unwrap();
        assert_eq!(extended.len(), xi.len());
    }

    #[test]
    fn single_point_net_is_separated() {
        let omega = DomainRegion::Box {
            lower: vec![0.0, 0.0],
            upper: vec![0.2, 0.2],
        };
        let xi = PointSet::from_points(&[vec![0.1, 0.1]], None).unwrap();
        let options = ExtensionOptions {
            candidates_per_spacing: 8,
            ..Default::default()
        };
        let extended = extend_pointset_with(&xi, &omega, 0.2, &options).unwrap();
        let h = fill_distance_upper_bound(&xi, &omega).unwrap();
        assert!(extended.len() > 1);
        for i in 1..extended.len() {
            for j in 1..i {
                assert!(super::super::distance(extended.point(i), extended.point(j)) >= h);
            }
            assert!(!omega.contains(extended.point(i)));
            assert!(omega.distance(extended.point(i)) <= 0.2);
        }
    }

    #[test]
    fn keeps_leading_points_and_separation() {
        let omega = DomainRegion::unit_square();
        let xi = generate_quasi_uniform(&omega, 100, 4).unwrap();
        let extended = extend_pointset(&xi, &omega, 0.3).unwrap();
        assert_eq!(&extended.coords()[..xi.coords().len()], xi.coords());
        let inside = extended.iter().filter(|p| omega.contains(p)).count();
        assert_eq!(inside, xi.len());
        let h = fill_distance_upper_bound(&xi, &omega).unwrap();
        let q = separation_radius(&xi).unwrap();
        assert!(separation_radius(&extended).unwrap() >= q.min(h / 2.0) - 1e-15);
    }

    #[test]
    fn rejects_bad_inputs() {
        let omega = DomainRegion::unit_square();
        let outside = PointSet::from_points(&[vec![0.5, 0.5], vec![1.5, 0.5]], None).unwrap();
        assert!(matches!(
            extend_pointset(&outside, &omega, 0.1),
            Err(Error::InvalidInput(_))
        ));
        let inside = PointSet::from_points(&[vec![0.5, 0.5]], None).unwrap();
        assert!(matches!(
            extend_pointset(&inside, &omega, 0.0),
            Err(Error::InvalidInput(_))
        ));
    }
}
