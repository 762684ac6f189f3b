use rand::Rng;

use super::{DomainRegion, PointSet};
use crate::error::{Error, Result};
use crate::rng;

/// Fraction of a cell over which a point may be displaced from the cell center.
const JITTER: f64 = 0.2;

/// Deterministic jittered-grid sample of `n` points in `region`.
///
/// Boxes are split into slabs along the first axis, each slab receiving ⌊n/c⌋ or
/// ⌈n/c⌉ points and being split recursively along the remaining axes; every point
/// is then displaced inside its cell. This keeps the mesh ratio below 4 for any n.
/// Balls are sampled by thinning a box sample of their bounding box.
pub fn generate_quasi_uniform(region: &DomainRegion, n: usize, seed: u64) -> Result<PointSet> {
    region.validate()?;
    if n == 0 {
        return Err(Error::InvalidInput("cannot generate an empty point set".into()));
    }
    let mut rng = rng::stream(seed, "quasi-uniform");
    let (lower, upper) = region.bounding_box();
    let coords = match region {
        DomainRegion::Box { .. } => jittered_box(&lower, &upper, n, &mut rng),
        _ => {
            let target = n;
            let inside_fraction = region.volume()
                / lower
                    .iter()
                    .zip(&upper)
                    .map(|(l, u)| u - l)
                    .product::<f64>();
            let mut trial = ((target as f64 / inside_fraction).ceil() as usize).max(target);
            loop {
                let mut trial_rng = rng::indexed_stream(seed, "quasi-uniform-thinning", trial as u64);
                let all = jittered_box(&lower, &upper, trial, &mut trial_rng);
                let inside: Vec<&[f64]> = all
                    .chunks_exact(lower.len())
                    .filter(|p| region.contains(p))
                    .collect();
                if inside.len() >= target {
                    let extra = inside.len() - target;
                    // drop `extra` points spread evenly through the list
                    let mut kept = Vec::with_capacity(target * lower.len());
                    let mut dropped = 0;
                    for (i, p) in inside.iter().enumerate() {
                        if dropped < extra && (i + 1) * extra >= (dropped + 1) * inside.len() {
                            dropped += 1;
                            continue;
                        }
                        kept.extend_from_slice(p);
                    }
                    break kept;
                }
                trial += (trial / 100).max(1);
            }
        }
    };
    PointSet::new(lower.len(), coords, Some(region.clone()))
}

fn jittered_box<R: Rng>(lower: &[f64], upper: &[f64], n: usize, rng: &mut R) -> Vec<f64> {
    let d = lower.len();
    let mut cells = Vec::with_capacity(n);
    split_cells(lower.to_vec(), upper.to_vec(), 0, n, &mut cells);
    let mut coords = Vec::with_capacity(n * d);
    for (lo, hi) in cells {
        for k in 0..d {
            let offset: f64 = rng.random::<f64>() - 0.5;
            coords.push(lo[k] + (hi[k] - lo[k]) * (0.5 + JITTER * offset));
        }
    }
    coords
}

fn split_cells(
    lower: Vec<f64>,
    upper: Vec<f64>,
    axis: usize,
    n: usize,
    out: &mut Vec<(Vec<f64>, Vec<f64>)>,
) {
    let d = lower.len();
    if axis == d {
        debug_assert_eq!(n, 1);
        out.push((lower, upper));
        return;
    }
    let remaining = d - axis;
    let slabs = if remaining == 1 {
        n
    } else {
        let sub_volume: f64 = (axis..d).map(|k| upper[k] - lower[k]).product();
        let side = upper[axis] - lower[axis];
        let ideal = (n as f64 * side.powi(remaining as i32) / sub_volume).powf(1.0 / remaining as f64);
        (ideal.round() as usize).clamp(1, n)
    };
    let width = (upper[axis] - lower[axis]) / slabs as f64;
    let base = n / slabs;
    let extra = n % slabs;
    let mut given = 0;
    for s in 0..slabs {
        // slabs receiving one extra point are spread evenly
        let count = if given < extra && (s + 1) * extra >= (given + 1) * slabs {
            given += 1;
            base + 1
        } else {
            base
        };
        let mut lo = lower.clone();
        let mut hi = upper.clone();
        lo[axis] = lower[axis] + s as f64 * width;
        hi[axis] = if s + 1 == slabs {
            upper[axis]
        } else {
            lower[axis] + (s + 1) as f64 * width
        };
        split_cells(lo, hi, axis + 1, count, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{fill_distance, separation_radius};

    #[test]
    fn single_point_lies_inside() {
        let square = DomainRegion::unit_square();
        let set = generate_quasi_uniform(&square, 1, 5).unwrap();
        assert_eq!(set.len(), 1);
        assert!(square.contains(set.point(0)));
    }

    #[test]
    fn exact_counts_and_containment() {
        let region = DomainRegion::Box {
            lower: vec![-1.0, 0.0, 2.0],
            upper: vec![1.0, 0.5, 3.0],
        };
        for n in [1, 2, 7, 64, 200, 333] {
            let set = generate_quasi_uniform(&region, n, 9).unwrap();
            assert_eq!(set.len(), n);
            assert!(set.iter().all(|p| region.contains(p)));
        }
        let ball = DomainRegion::ball(vec![0.0, 0.0], 0.5);
        let set = generate_quasi_uniform(&ball, 150, 2).unwrap();
        assert_eq!(set.len(), 150);
        assert!(set.iter().all(|p| ball.contains(p)));
    }

    #[test]
    fn mesh_ratio_is_bounded() {
        let square = DomainRegion::unit_square();
        for n in [25, 100, 200, 400, 800, 1600] {
            let set = generate_quasi_uniform(&square, n, 7).unwrap();
            let h = fill_distance(&set, &square, 300).unwrap();
            let q = separation_radius(&set).unwrap();
            assert!(h / q <= 4.0, "n = {n}: rho = {}", h / q);
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let square = DomainRegion::unit_square();
        let a = generate_quasi_uniform(&square, 400, 7).unwrap();
        let b = generate_quasi_uniform(&square, 400, 7).unwrap();
        let c = generate_quasi_uniform(&square, 400, 8).unwrap();
        assert_eq!(a.coords(), b.coords());
        assert_ne!(a.coords(), c.coords());
    }
}
