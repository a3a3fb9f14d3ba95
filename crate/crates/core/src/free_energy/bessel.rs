//! Order-zero modified Bessel function, evaluated in log space.
//!
//! Power series up to the switch point, then the Chebyshev expansion of
//! `sqrt(x) e^{-x} I0(x)` in the variable `32 / x - 2` (Cephes coefficients).

const SWITCH: f64 = 8.0;

const LARGE_ARG_COEFFS: [f64; 25] = [
    -7.233_180_487_874_754E-18,
    -4.830_504_485_944_182E-18,
    4.465_621_420_296_76E-17,
    3.461_222_867_697_461E-17,
    -2.827_623_980_516_583_6E-16,
    -3.425_485_619_677_219E-16,
    1.772_560_133_056_526_3E-15,
    3.811_680_669_352_622_4E-15,
    -9.554_846_698_828_307E-15,
    -4.150_569_347_287_222E-14,
    1.540_086_217_521_41E-14,
    3.852_778_382_742_142_6E-13,
    7.180_124_451_383_666E-13,
    -1.794_178_531_506_806_2E-12,
    -1.321_581_184_044_771_3E-11,
    -3.149_916_527_963_241_6E-11,
    1.188_914_710_784_643_9E-11,
    4.940_602_388_224_97E-10,
    3.396_232_025_708_386_5E-9,
    2.266_668_990_498_178E-8,
    2.048_918_589_469_063_8E-7,
    2.891_370_520_834_756_7E-6,
    6.889_758_346_916_825E-5,
    3.369_116_478_255_694_3E-3,
    8.044_904_110_141_088E-1,
];

fn chbevl(x: f64, coeffs: &[f64]) -> f64 {
    let mut b0 = coeffs[0];
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for c in &coeffs[1..] {
        b2 = b1;
        b1 = b0;
        b0 = x * b1 - b2 + c;
    }
    0.5 * (b0 - b2)
}

fn series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    while term > 1e-17 * sum {
        term *= q / (k * k);
        sum += term;
        k += 1.0;
    }
    sum
}

/// `log I0(x)`; finite for every finite `x`.
pub fn ln_i0(x: f64) -> f64 {
    let ax = x.abs();
    if ax <= SWITCH {
        series(ax).ln()
    } else {
        ax + (chbevl(32.0 / ax - 2.0, &LARGE_ARG_COEFFS) / ax.sqrt()).ln()
    }
}

pub fn i0(x: f64) -> f64 {
    ln_i0(x).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    // log I0 at 30 significant digits
    const REFERENCE: [(f64, f64); 14] = [
        (0.5, 0.061_549_719_185_481_303_941),
        (1.0, 0.235_914_358_507_178_648_69),
        (2.0, 0.823_993_541_482_956_282_93),
        (5.0, 3.304_681_775_822_533_433_8),
        (7.999, 6.057_169_024_149_719_879_2),
        (8.0, 6.058_104_255_427_813_945_4),
        (8.001, 6.059_039_495_136_042_205_4),
        (10.0, 7.942_972_083_118_695_554_5),
        (12.0, 9.849_502_499_102_843_843_8),
        (20.0, 17.589_610_428_244_274_291),
        (50.0, 47.127_575_501_871_804_584),
        (100.0, 96.779_732_689_942_583_717),
        (700.0, 695.805_699_998_443_449_08),
        (1000.0, 995.627_308_889_869_464_67),
    ];

    #[test]
    fn matches_high_precision_reference() {
        assert_eq!(ln_i0(0.0), 0.0);
        for (x, want) in REFERENCE {
            let got = ln_i0(x);
            assert!((got - want).abs() <= 1e-14 * want.abs().max(1.0), "x = {x}: {got} vs {want}");
            assert_eq!(ln_i0(-x), got);
        }
        assert!((i0(1.0) - 1.266_065_877_752_008_4).abs() < 1e-15);
    }

    #[test]
    fn continuous_across_switch() {
        let below = ln_i0(SWITCH - 1e-9);
        let above = ln_i0(SWITCH + 1e-9);
        assert!((above - below).abs() < 1e-8);
    }
}
