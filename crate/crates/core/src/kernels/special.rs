//! Gamma-function helpers used by the kernel normalizations and ball volumes.

use std::f64::consts::PI;

/// Coefficients of the power series 1/Γ(z) = Σ_{k≥1} c_k z^k.
const RECIP_GAMMA_SERIES: [f64; 26] = [
    1.0,
    0.577_215_664_901_532_9,
    -0.655_878_071_520_253_8,
    -0.042_002_635_034_095_2,
    0.166_538_611_382_291_5,
    -0.042_197_734_555_544_3,
    -0.009_621_971_527_877_0,
    0.007_218_943_246_663_0,
    -0.001_165_167_591_859_1,
    -0.000_215_241_674_114_9,
    0.000_128_050_282_388_2,
    -0.000_020_134_854_780_7,
    -0.000_001_250_493_482_1,
    0.000_001_133_027_232_0,
    -0.000_000_205_633_841_7,
    0.000_000_006_116_095_0,
    0.000_000_005_002_007_5,
    -0.000_000_001_181_274_6,
    0.000_000_000_104_342_7,
    0.000_000_000_007_782_3,
    -0.000_000_000_003_696_8,
    0.000_000_000_000_510_0,
    -0.000_000_000_000_020_6,
    -0.000_000_000_000_005_4,
    0.000_000_000_000_001_4,
    0.000_000_000_000_000_1,
];

/// Temme's auxiliary gamma quantities for |mu| ≤ 1/2:
/// `(gam1, gam2, 1/Γ(1+mu), 1/Γ(1-mu))` with
/// gam1 = (1/Γ(1-mu) - 1/Γ(1+mu)) / (2 mu) and gam2 = (1/Γ(1-mu) + 1/Γ(1+mu)) / 2.
pub(crate) fn temme_gammas(mu: f64) -> (f64, f64, f64, f64) {
    debug_assert!(mu.abs() <= 0.5 + 1e-12);
    // 1/Γ(1+x) = Σ c_k x^{k-1}; split into even and odd powers so gam1 carries
    // no cancellation near mu = 0.
    let x2 = mu * mu;
    let mut even = 0.0; // Σ_{k odd} c_k x^{k-1}
    let mut odd = 0.0; // Σ_{k even} c_k x^{k-2}
    let mut pow = 1.0;
    for pair in RECIP_GAMMA_SERIES.chunks(2) {
        even += pair[0] * pow;
        if let Some(&c) = pair.get(1) {
            odd += c * pow;
        }
        pow *= x2;
    }
    let gam1 = -odd;
    let gam2 = even;
    let gampl = even + mu * odd;
    let gammi = even - mu * odd;
    (gam1, gam2, gampl, gammi)
}

/// Γ(x) for positive integers and half-integers, by exact recurrence from Γ(1) and Γ(1/2).
///
/// Returns `None` when `x` is not a positive multiple of 1/2.
pub fn gamma_half_integer(x: f64) -> Option<f64> {
    let twice = 2.0 * x;
    if x <= 0.0 || (twice - twice.round()).abs() > 1e-12 || twice > 340.0 {
        return None;
    }
    let twice = twice.round() as u32;
    let (mut value, mut arg) = if twice.is_multiple_of(2) {
        (1.0, 1.0)
    } else {
        (PI.sqrt(), 0.5)
    };
    let target = f64::from(twice) / 2.0;
    while arg + 0.5 < target {
        value *= arg;
        arg += 1.0;
    }
    Some(value)
}

/// Volume of the unit ball in ℝ^d, π^{d/2} / Γ(d/2 + 1).
pub fn unit_ball_volume(d: usize) -> f64 {
    let half = d as f64 / 2.0;
    PI.powf(half) / gamma_half_integer(half + 1.0).expect("half-integer argument")
}
