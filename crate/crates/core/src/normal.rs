//! Standard normal and bivariate normal distribution functions on plain reals.

#![allow(clippy::excessive_precision)]

use libm::erfc;
use statrs::function::erf::erfc_inv;
use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_677_94;

/// Standard normal density.
#[inline]
pub fn pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard normal cumulative distribution function.
#[inline]
pub fn cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// Standard normal quantile. Returns ±inf at the endpoints and NaN outside [0, 1].
#[inline]
pub fn inv_cdf(p: f64) -> f64 {
    if !(0.0..=1.0).contains(&p) {
        return f64::NAN;
    }
    if p == 0.0 {
        return f64::NEG_INFINITY;
    }
    if p == 1.0 {
        return f64::INFINITY;
    }
    let q = -SQRT_2 * erfc_inv(2.0 * p);
    // one Halley step against the accurate cdf
    let e = cdf(q) - p;
    let u = e / pdf(q);
    if u.is_finite() {
        q - u / (1.0 + 0.5 * q * u)
    } else {
        q
    }
}

// Gauss-Legendre half-rules (weight, abscissa) used by the Drezner-Wesolowsky/Genz scheme.
const GL6: [(f64, f64); 3] = [
    (0.1713244923791705, 0.9324695142031522),
    (0.3607615730481384, 0.6612093864662647),
    (0.4679139345726904, 0.2386191860831970),
];
const GL12: [(f64, f64); 6] = [
    (0.04717533638651177, 0.9815606342467191),
    (0.1069393259953183, 0.9041172563704750),
    (0.1600783285433464, 0.7699026741943050),
    (0.2031674267230659, 0.5873179542866171),
    (0.2334925365383547, 0.3678314989981802),
    (0.2491470458134029, 0.1252334085114692),
];
const GL20: [(f64, f64); 10] = [
    (0.01761400713915212, 0.9931285991850949),
    (0.04060142980038694, 0.9639719272779138),
    (0.06267204833410906, 0.9122344282513259),
    (0.08327674157670475, 0.8391169718222188),
    (0.1019301198172404, 0.7463319064601508),
    (0.1181945319615184, 0.6360536807265150),
    (0.1316886384491766, 0.5108670019508271),
    (0.1420961093183821, 0.3737060887154196),
    (0.1491729864726037, 0.2277858511416451),
    (0.1527533871307259, 0.07652652113349733),
];

/// Upper orthant probability `P(X > h, Y > k)` for a standard bivariate normal with
/// correlation `r` (Genz's double precision variant of Drezner-Wesolowsky).
pub fn bvn_upper(h: f64, k: f64, r: f64) -> f64 {
    if h == f64::INFINITY || k == f64::INFINITY {
        return 0.0;
    }
    if h == f64::NEG_INFINITY {
        return if k == f64::NEG_INFINITY { 1.0 } else { cdf(-k) };
    }
    if k == f64::NEG_INFINITY {
        return cdf(-h);
    }
    if r == 0.0 {
        return cdf(-h) * cdf(-k);
    }
    let quad: &[(f64, f64)] = if r.abs() < 0.3 {
        &GL6
    } else if r.abs() < 0.75 {
        &GL12
    } else {
        &GL20
    };
    let two_pi = 2.0 * PI;
    let mut k = k;
    let mut hk = h * k;
    let mut bvn = 0.0;
    if r.abs() < 0.925 {
        let hs = (h * h + k * k) / 2.0;
        let asr = r.asin() / 2.0;
        for &(w, x) in quad {
            for sx in [1.0 - x, 1.0 + x] {
                let sn = (asr * sx).sin();
                bvn += w * ((sn * hk - hs) / (1.0 - sn * sn)).exp();
            }
        }
        bvn = bvn * asr / two_pi + cdf(-h) * cdf(-k);
    } else {
        if r < 0.0 {
            k = -k;
            hk = -hk;
        }
        if r.abs() < 1.0 {
            let a_s = (1.0 - r) * (1.0 + r);
            let mut a = a_s.sqrt();
            let b_s = (h - k) * (h - k);
            let c = (4.0 - hk) / 8.0;
            let d = (12.0 - hk) / 16.0;
            let asr = -(b_s / a_s + hk) / 2.0;
            if asr > -100.0 {
                bvn = a * asr.exp() * (1.0 - c * (b_s - a_s) * (1.0 - d * b_s / 5.0) / 3.0 + c * d * a_s * a_s / 5.0);
            }
            if hk > -100.0 {
                let b = b_s.sqrt();
                bvn -=
                    (-hk / 2.0).exp() * two_pi.sqrt() * cdf(-b / a) * b * (1.0 - c * b_s * (1.0 - d * b_s / 5.0) / 3.0);
            }
            a /= 2.0;
            for &(w, x) in quad {
                for sx in [1.0 - x, 1.0 + x] {
                    let xs = (a * sx) * (a * sx);
                    let rs = (1.0 - xs).sqrt();
                    let asr = -(b_s / xs + hk) / 2.0;
                    if asr > -100.0 {
                        bvn += a
                            * w
                            * asr.exp()
                            * ((-hk * (1.0 - rs) / (2.0 * (1.0 + rs))).exp() / rs - (1.0 + c * xs * (1.0 + d * xs)));
                    }
                }
            }
            bvn = -bvn / two_pi;
        }
        if r > 0.0 {
            bvn += cdf(-h.max(k));
        } else {
            bvn = -bvn;
            if k > h {
                bvn += cdf(k) - cdf(h);
            }
        }
    }
    bvn.clamp(0.0, 1.0)
}

/// Bivariate normal CDF `P(X ≤ a, Y ≤ b)` with correlation `rho`.
#[inline]
pub fn bvn_cdf(a: f64, b: f64, rho: f64) -> f64 {
    bvn_upper(-a, -b, rho)
}

/// Bivariate standard normal density.
pub fn bvn_pdf(a: f64, b: f64, rho: f64) -> f64 {
    let s2 = 1.0 - rho * rho;
    (-(a * a - 2.0 * rho * a * b + b * b) / (2.0 * s2)).exp() / (2.0 * PI * s2.sqrt())
}
