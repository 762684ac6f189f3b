//! Matérn and surface-spline kernels together with their auxiliary polynomial spaces.

mod bessel;
mod polynomial;
mod sobolev;
pub(crate) mod special;

use serde::{Deserialize, Serialize};

pub use bessel::{bessel_k, bessel_k_general};
pub use polynomial::PolynomialBasis;
pub use sobolev::kernel_sobolev_norm_estimate;
pub use special::{gamma_half_integer, unit_ball_volume};

use crate::error::{Error, Result};
use crate::geometry::distance;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelFamily {
    Matern,
    SurfaceSpline,
}

impl KernelFamily {
    pub fn as_str(self) -> &'static str {
        match self {
            KernelFamily::Matern => "matern",
            KernelFamily::SurfaceSpline => "surface_spline",
        }
    }
}

/// Wire form of a kernel: `{"family": ..., "m": ..., "d": ...}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    pub family: KernelFamily,
    pub m: u32,
    pub d: usize,
}

/// A validated kernel of order `m` on ℝ^d.
///
/// `scale` is the normalization constant. Matérn kernels are scaled so that
/// k(x, x) = 1. Surface splines carry the sign (±1) that makes the quadratic form
/// positive on coefficient vectors annihilating Π_{m-1}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KernelConfig", into = "KernelConfig")]
pub struct KernelSpec {
    family: KernelFamily,
    m: u32,
    d: usize,
    scale: f64,
}

impl TryFrom<KernelConfig> for KernelSpec {
    type Error = Error;

    fn try_from(config: KernelConfig) -> Result<Self> {
        KernelSpec::new(config.family, config.m, config.d)
    }
}

impl From<KernelSpec> for KernelConfig {
    fn from(spec: KernelSpec) -> Self {
        KernelConfig {
            family: spec.family,
            m: spec.m,
            d: spec.d,
        }
    }
}

impl KernelSpec {
    pub fn new(family: KernelFamily, m: u32, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidSpec("dimension d must be at least 1".into()));
        }
        // m > d/2 for both families, which also gives 2m - d > 0.
        if 2 * m as usize <= d {
            return Err(Error::InvalidSpec(format!(
                "order m = {m} must exceed d/2 = {}",
                d as f64 / 2.0
            )));
        }
        let scale = match family {
            KernelFamily::Matern => {
                let nu = f64::from(m) - d as f64 / 2.0;
                // lim_{r→0} K_ν(r) r^ν = 2^{ν-1} Γ(ν)
                let gamma = gamma_half_integer(nu).expect("m - d/2 is a positive half-integer");
                1.0 / (2f64.powf(nu - 1.0) * gamma)
            }
            KernelFamily::SurfaceSpline => surface_spline_sign(m, d),
        };
        Ok(KernelSpec {
            family,
            m,
            d,
            scale,
        })
    }

    pub fn matern(m: u32, d: usize) -> Result<Self> {
        Self::new(KernelFamily::Matern, m, d)
    }

    pub fn surface_spline(m: u32, d: usize) -> Result<Self> {
        Self::new(KernelFamily::SurfaceSpline, m, d)
    }

    /// Thin-plate spline, m = 2 in the plane.
    pub fn thin_plate() -> Self {
        Self::surface_spline(2, 2).expect("valid spec")
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn order(&self) -> u32 {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Degree of the polynomial space the kernel is conditionally positive definite
    /// with respect to; `None` for positive definite kernels.
    pub fn cpd_degree(&self) -> Option<u32> {
        match self.family {
            KernelFamily::Matern => None,
            KernelFamily::SurfaceSpline => Some(self.m - 1),
        }
    }

    pub fn polynomial_basis(&self) -> PolynomialBasis {
        match self.cpd_degree() {
            Some(degree) => PolynomialBasis::new(degree, self.d),
            None => PolynomialBasis::empty(self.d),
        }
    }

    /// Bessel order m - d/2 of the Matérn kernel.
    pub fn bessel_order(&self) -> f64 {
        f64::from(self.m) - self.d as f64 / 2.0
    }

    /// Kernel value as a function of the distance r = |x - y| ≥ 0.
    pub fn eval_radial(&self, r: f64) -> f64 {
        match self.family {
            KernelFamily::Matern => {
                if r == 0.0 {
                    return 1.0;
                }
                let nu = self.bessel_order();
                if let Some(n) = bessel::half_integer_index(nu) {
                    // √(π/2) e^{-r} Σ_k c_k r^{n-k}: no negative powers, stable near 0.
                    let coeffs = bessel::half_integer_coefficients(n);
                    let poly = coeffs.iter().fold(0.0, |acc, &c| acc * r + c);
                    self.scale * (std::f64::consts::PI / 2.0).sqrt() * (-r).exp() * poly
                } else {
                    let k = bessel_k_general(nu, r);
                    self.scale * k * r.powf(nu)
                }
            }
            KernelFamily::SurfaceSpline => {
                if r == 0.0 {
                    return 0.0;
                }
                let beta = 2 * self.m as i32 - self.d as i32;
                let power = r.powi(beta);
                if self.d.is_multiple_of(2) {
                    self.scale * power * r.ln()
                } else {
                    self.scale * power
                }
            }
        }
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        self.eval_radial(distance(x, y))
    }
}

/// (-1)^{m - d/2 + 1} for even d, (-1)^{⌈(2m-d)/2⌉} for odd d.
fn surface_spline_sign(m: u32, d: usize) -> f64 {
    let exponent = if d.is_multiple_of(2) {
        m as usize - d / 2 + 1
    } else {
        m as usize - (d - 1) / 2
    };
    if exponent % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// k(x, y) for the given kernel.
pub fn kernel_eval(spec: &KernelSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != spec.d || y.len() != spec.d {
        return Err(Error::InvalidInput(format!(
            "points must have dimension {}, got {} and {}",
            spec.d,
            x.len(),
            y.len()
        )));
    }
    Ok(spec.eval(x, y))
}
