//! Real Gamma function.

use crate::error::EvalError;

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

const FACTORIALS: [f64; 21] = [
    1.0,
    1.0,
    2.0,
    6.0,
    24.0,
    120.0,
    720.0,
    5040.0,
    40320.0,
    362880.0,
    3628800.0,
    39916800.0,
    479001600.0,
    6227020800.0,
    87178291200.0,
    1307674368000.0,
    20922789888000.0,
    355687428096000.0,
    6402373705728000.0,
    121645100408832000.0,
    2432902008176640000.0,
];

/// Γ(r) for r > 0.
///
/// Integer arguments up to 21 come from an exact factorial table; everything
/// else uses the g = 7, n = 9 Lanczos sum with reflection below 1/2.
pub fn gamma_real(r: f64) -> Result<f64, EvalError> {
    if !r.is_finite() || r <= 0.0 {
        return Err(EvalError::GammaDomain(r));
    }
    if r.fract() == 0.0 && r <= 21.0 {
        return Ok(FACTORIALS[r as usize - 1]);
    }
    let value = lanczos(r);
    if value.is_finite() {
        Ok(value)
    } else {
        Err(EvalError::NonFinite(format!("gamma({r})")))
    }
}

fn lanczos(r: f64) -> f64 {
    use std::f64::consts::PI;
    if r < 0.5 {
        return PI / ((PI * r).sin() * lanczos(1.0 - r));
    }
    let x = r - 1.0;
    let mut sum = LANCZOS_COEFFS[0];
    for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        sum += c / (x + i as f64);
    }
    let w = x + LANCZOS_G + 0.5;
    // split the power so w^(x+1/2) does not overflow before exp(-w) shrinks it
    let half = w.powf(0.5 * (x + 0.5));
    (2.0 * PI).sqrt() * half * ((-w).exp() * half) * sum
}
