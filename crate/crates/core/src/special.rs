//! Standard normal density, distribution and quantile functions.

use crate::real::Real;

#[inline]
pub fn norm_pdf<T: Real>(x: T) -> T {
    let inv_sqrt_2pi = T::FRAC_2_SQRT_PI() * T::FRAC_1_SQRT_2() * T::lit(0.5);
    inv_sqrt_2pi * (-x * x * T::lit(0.5)).exp()
}

#[inline]
pub fn log_norm_pdf<T: Real>(x: T) -> T {
    -x * x * T::lit(0.5) - T::lit(0.918_938_533_204_672_8)
}

/// Φ(x).
#[inline]
pub fn norm_cdf<T: Real>(x: T) -> T {
    T::lit(0.5) * (-x * T::FRAC_1_SQRT_2()).erfc()
}

/// 1 − Φ(x), without cancellation in the upper tail.
#[inline]
pub fn norm_sf<T: Real>(x: T) -> T {
    T::lit(0.5) * (x * T::FRAC_1_SQRT_2()).erfc()
}

/// log Φ(x), finite for every finite x.
pub fn log_norm_cdf<T: Real>(x: T) -> T {
    if x > T::zero() {
        return (-norm_sf(x)).ln_1p();
    }
    let p = norm_cdf(x);
    if p > T::min_positive_value() * T::lit(1e3) {
        return p.ln();
    }
    // Mills-ratio expansion; only reached far below the underflow point
    // of erfc, where the truncation error is below machine precision.
    let r = (x * x).recip();
    let series = T::one() - r + T::lit(3.0) * r * r - T::lit(15.0) * r * r * r
        + T::lit(105.0) * r * r * r * r;
    log_norm_pdf(x) - (-x).ln() + series.ln()
}

/// log(1 − Φ(x)).
#[inline]
pub fn log_norm_sf<T: Real>(x: T) -> T {
    log_norm_cdf(-x)
}

#[inline]
fn poly<T: Real>(coef: &[f64; 8], r: T) -> T {
    coef.iter().rev().fold(T::zero(), |acc, &c| acc * r + T::lit(c))
}

const A: [f64; 8] = [
    3.387_132_872_796_366_608,
    133.141_667_891_784_377_45,
    1_971.590_950_306_551_442_7,
    13_731.693_765_509_461_125,
    45_921.953_931_549_871_457,
    67_265.770_927_008_700_853,
    33_430.575_583_588_128_105,
    2_509.080_928_730_122_672_7,
];
const B: [f64; 8] = [
    1.0,
    42.313_330_701_600_911_252,
    687.187_007_492_057_908_3,
    5_394.196_021_424_751_107_7,
    21_213.794_301_586_595_867,
    39_307.895_800_092_710_61,
    28_729.085_735_721_942_674,
    5_226.495_278_852_545_925,
];
const C: [f64; 8] = [
    1.423_437_110_749_683_577_34,
    4.630_337_846_156_545_295_9,
    5.769_497_221_460_691_405_5,
    3.647_848_324_763_204_605_04,
    1.270_458_252_452_368_382_58,
    0.241_780_725_177_450_611_77,
    0.022_723_844_989_269_184_583_3,
    7.745_450_142_783_414_076_4e-4,
];
const D: [f64; 8] = [
    1.0,
    2.053_191_626_637_758_821_87,
    1.676_384_830_183_803_849_4,
    0.689_767_334_985_100_004_55,
    0.148_103_976_427_480_074_59,
    0.015_198_666_563_616_457_196_6,
    5.475_938_084_995_344_946e-4,
    1.050_750_071_644_416_843_24e-9,
];
const E: [f64; 8] = [
    6.657_904_643_501_103_777_2,
    5.463_784_911_164_114_369_9,
    1.784_826_539_917_291_335_8,
    0.296_560_571_828_504_891_23,
    0.026_532_189_526_576_123_093,
    0.001_242_660_947_388_078_438_6,
    2.711_555_568_743_487_578_15e-5,
    2.010_334_399_292_288_132_65e-7,
];
const F: [f64; 8] = [
    1.0,
    0.599_832_206_555_887_937_69,
    0.136_929_880_922_735_805_31,
    0.014_875_361_290_850_614_852_5,
    7.868_691_311_456_132_591e-4,
    1.846_318_317_510_054_681_8e-5,
    1.421_511_758_316_445_888_7e-7,
    2.044_263_103_389_939_785_64e-15,
];

/// Φ⁻¹(p) by Wichura's AS 241 rational approximations.
///
/// Returns ∓∞ at p = 0 and p = 1 and NaN outside [0, 1].
pub fn norm_quantile<T: Real>(p: T) -> T {
    if p.is_nan() || p < T::zero() || p > T::one() {
        return T::nan();
    }
    if p == T::zero() {
        return T::neg_infinity();
    }
    if p == T::one() {
        return T::infinity();
    }
    let q = p - T::lit(0.5);
    if q.abs() <= T::lit(0.425) {
        let r = T::lit(0.180_625) - q * q;
        return q * poly(&A, r) / poly(&B, r);
    }
    let tail = if q < T::zero() { p } else { T::one() - p };
    let mut r = (-tail.ln()).sqrt();
    let val = if r <= T::lit(5.0) {
        r -= T::lit(1.6);
        poly(&C, r) / poly(&D, r)
    } else {
        r -= T::lit(5.0);
        poly(&E, r) / poly(&F, r)
    };
    if q < T::zero() {
        -val
    } else {
        val
    }
}
