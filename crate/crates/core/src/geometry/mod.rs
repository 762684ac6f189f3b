//! Point sets, their geometric statistics, point-set extension and footprints.

mod csv;
mod domain;
mod extension;
mod generate;
mod index;
mod regularity;

use serde::{Deserialize, Serialize};

pub use self::csv::{read_csv, write_csv, write_csv_to};
pub use domain::DomainRegion;
pub use extension::{
    extend_pointset, extend_pointset_with, fill_distance_refined, fill_distance_upper_bound, ExtensionOptions,
};
pub use generate::generate_quasi_uniform;
pub use regularity::{ball_fraction_ratio, boundary_regularity_probe};

use crate::error::{Error, Result};
use index::GridIndex;

/// Probe density used when a fill distance is needed internally.
pub const DEFAULT_PROBE_DENSITY: usize = 128;

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    index::squared_distance(a, b).sqrt()
}

/// An ordered set of distinct points in ℝ^d with a spatial index.
#[derive(Clone, Debug)]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
    domain: Option<DomainRegion>,
    index: GridIndex,
}

impl PointSet {
    /// Builds a point set from flat coordinates (`n * dim` values).
    ///
    /// Rejects non-finite coordinates and duplicate points.
    pub fn new(dim: usize, coords: Vec<f64>, domain: Option<DomainRegion>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("point dimension must be at least 1".into()));
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::InvalidInput(format!(
                "{} coordinates do not split into points of dimension {dim}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("point coordinates must be finite".into()));
        }
        if let Some(domain) = &domain {
            domain.validate()?;
            if domain.dim() != dim {
                return Err(Error::InvalidInput(format!(
                    "domain dimension {} does not match point dimension {dim}",
                    domain.dim()
                )));
            }
        }
        let index = GridIndex::build(dim, &coords);
        let set = PointSet {
            dim,
            coords,
            domain,
            index,
        };
        for i in 0..set.len() {
            if let Some((j, d)) = set.nearest_other(i) {
                if d == 0.0 {
                    return Err(Error::InvalidInput(format!(
                        "duplicate points at indices {} and {}",
                        i.min(j),
                        i.max(j)
                    )));
                }
            }
        }
        Ok(set)
    }

    pub fn from_points(points: &[Vec<f64>], domain: Option<DomainRegion>) -> Result<Self> {
        let dim = points
            .first()
            .map(Vec::len)
            .or_else(|| domain.as_ref().map(DomainRegion::dim))
            .ok_or_else(|| Error::InvalidInput("cannot infer dimension of an empty set".into()))?;
        if points.iter().any(|p| p.len() != dim) {
            return Err(Error::InvalidInput("points have mixed dimensions".into()));
        }
        Self::new(dim, points.concat(), domain)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn domain(&self) -> Option<&DomainRegion> {
        self.domain.as_ref()
    }

    pub fn with_domain(mut self, domain: DomainRegion) -> Result<Self> {
        domain.validate()?;
        self.domain = Some(domain);
        Ok(self)
    }

    /// The subset with the given indices, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Result<PointSet> {
        let mut coords = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            if i >= self.len() {
                return Err(Error::InvalidInput(format!("index {i} out of range")));
            }
            coords.extend_from_slice(self.point(i));
        }
        let index = GridIndex::build(self.dim, &coords);
        Ok(PointSet {
            dim: self.dim,
            coords,
            domain: self.domain.clone(),
            index,
        })
    }

    /// Indices of all points within closed distance `r` of `x`, increasing.
    pub fn within_radius(&self, x: &[f64], r: f64) -> Vec<usize> {
        self.index.within(&self.coords, x, r)
    }

    /// Nearest point to `x` and its distance.
    pub fn nearest(&self, x: &[f64]) -> Option<(usize, f64)> {
        self.index.nearest(&self.coords, x, None)
    }

    /// Nearest point to point `i`, excluding `i` itself.
    pub fn nearest_other(&self, i: usize) -> Option<(usize, f64)> {
        self.index.nearest(&self.coords, self.point(i), Some(i))
    }

    pub fn distance_to(&self, x: &[f64]) -> f64 {
        self.nearest(x).map_or(f64::INFINITY, |(_, d)| d)
    }

    /// Index of the point closest to `x`.
    pub fn closest_index(&self, x: &[f64]) -> Option<usize> {
        self.nearest(x).map(|(i, _)| i)
    }
}

/// Fill distance h, separation radius q and mesh ratio ρ = h/q.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometryStats {
    pub h: f64,
    pub q: f64,
    pub rho: f64,
}

/// q(X) = ½ min_{i≠j} |x_i − x_j|.
pub fn separation_radius(points: &PointSet) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::InvalidInput(
            "separation radius needs at least two points".into(),
        ));
    }
    let min = (0..points.len())
        .filter_map(|i| points.nearest_other(i).map(|(_, d)| d))
        .fold(f64::INFINITY, f64::min);
    Ok(0.5 * min)
}

/// Grid of `density` probes per axis over the bounding box of `region`, keeping
/// those inside the region. Includes the box corners.
pub(crate) fn probe_grid(region: &DomainRegion, density: usize) -> Vec<Vec<f64>> {
    let (lower, upper) = region.bounding_box();
    let d = lower.len();
    let steps: Vec<f64> = lower
        .iter()
        .zip(&upper)
        .map(|(l, u)| (u - l) / (density - 1) as f64)
        .collect();
    let total = density.pow(d as u32);
    let mut probes = Vec::new();
    let mut x = vec![0.0; d];
    for flat in 0..total {
        let mut rest = flat;
        for k in 0..d {
            let i = rest % density;
            rest /= density;
            x[k] = if i == density - 1 {
                upper[k]
            } else {
                lower[k] + i as f64 * steps[k]
            };
        }
        if region.contains(&x) {
            probes.push(x.clone());
        }
    }
    probes
}

/// Diagonal length of one probe cell.
pub(crate) fn probe_grid_step(region: &DomainRegion, density: usize) -> f64 {
    let (lower, upper) = region.bounding_box();
    lower
        .iter()
        .zip(&upper)
        .map(|(l, u)| {
            let step = (u - l) / (density - 1) as f64;
            step * step
        })
        .sum::<f64>()
        .sqrt()
}

/// Lower estimate of h(X, D) = sup_{x∈D} dist(x, X): the maximum over a probe
/// grid with `probe_density` nodes per axis. Converges from below as the density
/// grows; the bias is at most half a probe-cell diagonal (exactly so for boxes).
pub fn fill_distance(points: &PointSet, region: &DomainRegion, probe_density: usize) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::InvalidInput("fill distance of an empty set".into()));
    }
    if probe_density < 2 {
        return Err(Error::InvalidInput("probe density must be at least 2".into()));
    }
    region.validate()?;
    use rayon::prelude::*;
    let probes = probe_grid(region, probe_density);
    let max = probes
        .par_iter()
        .map(|x| points.distance_to(x))
        .collect::<Vec<_>>()
        .into_iter()
        .fold(0.0, f64::max);
    Ok(max)
}

pub fn geometry_stats(
    points: &PointSet,
    region: &DomainRegion,
    probe_density: usize,
) -> Result<GeometryStats> {
    let h = fill_distance(points, region, probe_density)?;
    let q = separation_radius(points)?;
    Ok(GeometryStats { h, q, rho: h / q })
}

/// Υ(ξ): the centers within closed distance K·h·|ln h| of ξ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Footprint {
    pub center_index: usize,
    pub member_indices: Vec<usize>,
    pub radius: f64,
    pub k: f64,
}

impl Footprint {
    pub fn len(&self) -> usize {
        self.member_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.member_indices.is_empty()
    }

    /// Position of the footprint center within `member_indices`.
    pub fn center_position(&self) -> usize {
        self.member_indices
            .binary_search(&self.center_index)
            .expect("footprint contains its center")
    }
}

/// Footprint radius K·h·|ln h|.
pub fn footprint_radius(k: f64, h: f64) -> Result<f64> {
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::InvalidInput(format!(
            "footprint radius needs 0 < h < 1, got h = {h}"
        )));
    }
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::InvalidInput(format!("K must be positive, got {k}")));
    }
    Ok(k * h * h.ln().abs())
}

pub fn footprint(points: &PointSet, xi: usize, k: f64, h: f64) -> Result<Footprint> {
    if xi >= points.len() {
        return Err(Error::InvalidInput(format!("center index {xi} out of range")));
    }
    let radius = footprint_radius(k, h)?;
    let member_indices = points.within_radius(points.point(xi), radius);
    Ok(Footprint {
        center_index: xi,
        member_indices,
        radius,
        k,
    })
}
