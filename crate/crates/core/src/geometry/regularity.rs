use super::DomainRegion;
use crate::error::{Error, Result};
use crate::kernels::unit_ball_volume;
use crate::rng::{self, StreamRng};

/// Monte-Carlo estimate of vol(B(x, r) ∩ Ω) / r^d from `samples` uniform draws in
/// the ball.
pub fn ball_fraction_ratio(
    omega: &DomainRegion,
    x: &[f64],
    r: f64,
    samples: usize,
    rng: &mut StreamRng,
) -> f64 {
    let d = x.len();
    let ball = DomainRegion::ball(x.to_vec(), r);
    let hits = (0..samples)
        .filter(|_| omega.contains(&ball.sample(rng)))
        .count();
    unit_ball_volume(d) * hits as f64 / samples as f64
}

/// Empirical α̂_Ω = min over probed (x ∈ Ω, r ≤ r_max) of vol(B(x,r) ∩ Ω)/r^d.
///
/// Probe sites are the extreme points of Ω (box corners, or axis points of a ball
/// boundary) plus a few random interior points; radii are r_max and r_max/2.
pub fn boundary_regularity_probe(omega: &DomainRegion, r_max: f64, samples: usize) -> Result<f64> {
    omega.validate()?;
    if !(r_max > 0.0) || r_max > omega.inradius() {
        return Err(Error::InvalidInput(format!(
            "r_max = {r_max} must lie in (0, inradius = {}]",
            omega.inradius()
        )));
    }
    if samples == 0 {
        return Err(Error::InvalidInput("at least one sample is required".into()));
    }
    let d = omega.dim();
    let mut sites = extreme_points(omega);
    let mut site_rng = rng::stream(0x5eed, "regularity-sites");
    for _ in 0..8 {
        sites.push(omega.sample(&mut site_rng));
    }
    let mut mc = rng::stream(0x5eed, "regularity-mc");
    let mut alpha = f64::INFINITY;
    for x in &sites {
        for r in [r_max, 0.5 * r_max] {
            alpha = alpha.min(ball_fraction_ratio(omega, x, r, samples, &mut mc));
        }
    }
    debug_assert!(alpha <= unit_ball_volume(d) + 1e-12);
    Ok(alpha)
}

fn extreme_points(omega: &DomainRegion) -> Vec<Vec<f64>> {
    match omega {
        DomainRegion::Box { lower, upper } => {
            let d = lower.len();
            (0..1usize << d)
                .map(|mask| {
                    (0..d)
                        .map(|k| if mask >> k & 1 == 1 { upper[k] } else { lower[k] })
                        .collect()
                })
                .collect()
        }
        DomainRegion::Ball { center, radius } => {
            let mut out = Vec::new();
            for k in 0..center.len() {
                for sign in [-1.0, 1.0] {
                    let mut p = center.clone();
                    p[k] += sign * radius;
                    out.push(p);
                }
            }
            out
        }
        DomainRegion::Dilated { base, width } => {
            let (lower, upper) = base.bounding_box();
            let d = lower.len();
            let push = width / (d as f64).sqrt();
            (0..1usize << d)
                .map(|mask| {
                    (0..d)
                        .map(|k| {
                            if mask >> k & 1 == 1 {
                                upper[k] + push
                            } else {
                                lower[k] - push
                            }
                        })
                        .collect()
                })
                .collect()
        }
    }
}
