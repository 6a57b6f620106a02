//! Small elementary helpers that keep removable singularities stable,
//! plus the sine integral.

use std::f64::consts::FRAC_PI_2;

/// Below this argument the helpers switch to their Taylor series.
pub const SERIES_CROSSOVER: f64 = 1e-4;

/// `sin(x)/x`, equal to 1 at the origin.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < SERIES_CROSSOVER {
        let x2 = x * x;
        1.0 - x2 / 6.0 * (1.0 - x2 / 20.0)
    } else {
        x.sin() / x
    }
}

/// `1 - sin(x)/x` without cancellation for small `x`.
pub fn one_minus_sinc(x: f64) -> f64 {
    if x.abs() < 0.5 {
        // x^2/3! - x^4/5! + x^6/7! - ...
        let x2 = x * x;
        let mut term = x2 / 6.0;
        let mut sum = term;
        let mut k = 2.0_f64;
        while term.abs() > 1e-18 * sum.abs() {
            term *= -x2 / ((2.0 * k) * (2.0 * k + 1.0));
            sum += term;
            k += 1.0;
        }
        sum
    } else {
        1.0 - x.sin() / x
    }
}

/// `sin(x) - x` without cancellation for small `x`.
pub fn sin_minus_linear(x: f64) -> f64 {
    -x * one_minus_sinc(x)
}

/// `sin(k*lambda) - 2k*sin(lambda/2)`, the numerator shared by the
/// odd density and the V_n integrand. O(k^3 lambda^3) near the origin.
pub fn sin_minus_chord(k: f64, lambda: f64) -> f64 {
    if (k * lambda).abs() < 0.5 {
        // sin(k l) - k l  -  2k (sin(l/2) - l/2)
        sin_minus_linear(k * lambda) - 2.0 * k * sin_minus_linear(0.5 * lambda)
    } else {
        (k * lambda).sin() - 2.0 * k * (0.5 * lambda).sin()
    }
}

/// Sine integral `Si(x) = int_0^x sin(u)/u du`.
///
/// Power series below |x| = 2, continued fraction for E1(ix) above.
pub fn sine_integral(x: f64) -> f64 {
    if x < 0.0 {
        return -sine_integral(-x);
    }
    if x == 0.0 {
        return 0.0;
    }
    if x < 2.0 {
        let x2 = x * x;
        let mut term = x;
        let mut sum = x;
        let mut k = 1.0_f64;
        loop {
            // term_k = (-1)^k x^(2k+1) / (2k+1)!
            term *= -x2 / ((2.0 * k) * (2.0 * k + 1.0));
            let add = term / (2.0 * k + 1.0);
            sum += add;
            if add.abs() < 1e-17 * sum.abs() {
                break;
            }
            k += 1.0;
        }
        return sum;
    }
    // Modified Lentz on the continued fraction of E1(ix).
    let tiny = 1e-300;
    let (mut b_re, b_im) = (1.0, x);
    let (mut c_re, mut c_im) = (1.0 / tiny, 0.0);
    let (mut d_re, mut d_im) = cdiv(1.0, 0.0, b_re, b_im);
    let (mut h_re, mut h_im) = (d_re, d_im);
    let mut i = 2.0_f64;
    loop {
        let a = -(i - 1.0) * (i - 1.0);
        b_re += 2.0;
        // d = 1 / (a d + b)
        let (den_re, den_im) = (a * d_re + b_re, a * d_im + b_im);
        let (nd_re, nd_im) = cdiv(1.0, 0.0, den_re, den_im);
        d_re = nd_re;
        d_im = nd_im;
        // c = b + a / c
        let (q_re, q_im) = cdiv(a, 0.0, c_re, c_im);
        c_re = b_re + q_re;
        c_im = b_im + q_im;
        let del_re = c_re * d_re - c_im * d_im;
        let del_im = c_re * d_im + c_im * d_re;
        let nh_re = h_re * del_re - h_im * del_im;
        let nh_im = h_re * del_im + h_im * del_re;
        h_re = nh_re;
        h_im = nh_im;
        if (del_re - 1.0).abs() + del_im.abs() < 1e-16 || i > 10_000.0 {
            break;
        }
        i += 1.0;
    }
    // h *= (cos x - i sin x)
    let (cs, sn) = (x.cos(), -x.sin());
    let im = h_re * sn + h_im * cs;
    FRAC_PI_2 + im
}

fn cdiv(a_re: f64, a_im: f64, b_re: f64, b_im: f64) -> (f64, f64) {
    let den = b_re * b_re + b_im * b_im;
    ((a_re * b_re + a_im * b_im) / den, (a_im * b_re - a_re * b_im) / den)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Independent oracle: composite Simpson on sin(u)/u.
    fn si_simpson(x: f64) -> f64 {
        let m = 20_000;
        let h = x / m as f64;
        let f = |u: f64| if u == 0.0 { 1.0 } else { u.sin() / u };
        let mut s = f(0.0) + f(x);
        for i in 1..m {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn sine_integral_matches_simpson() {
        for &x in &[0.1, 0.5, 1.0, 1.999, 2.0, 3.0, std::f64::consts::PI, 10.0, 40.0] {
            let a = sine_integral(x);
            let b = si_simpson(x);
            assert!((a - b).abs() < 1e-10, "x={x}: {a} vs {b}");
        }
    }

    #[test]
    fn sine_integral_tends_to_half_pi() {
        assert!((sine_integral(1e6) - FRAC_PI_2).abs() < 2e-6);
        assert_eq!(sine_integral(0.0), 0.0);
        assert_eq!(sine_integral(-1.5), -sine_integral(1.5));
    }

    #[test]
    fn series_helpers_agree_with_direct_forms_away_from_zero() {
        for &x in &[0.3, 0.49, 0.51, 1.0, 2.5] {
            assert!((one_minus_sinc(x) - (1.0 - x.sin() / x)).abs() < 1e-15);
            assert!((sinc(x) - x.sin() / x).abs() < 1e-16);
        }
        for &(k, l) in &[(1.0f64, 0.3f64), (3.0, 0.1), (7.0, 0.05), (2.0, 1.0)] {
            let direct = (k * l).sin() - 2.0 * k * (0.5 * l).sin();
            assert!((sin_minus_chord(k, l) - direct).abs() < 1e-14);
        }
    }

    #[test]
    fn chord_difference_is_cubic_near_zero() {
        // sin(kl) - 2k sin(l/2) ~ -(k^3 - k/4) l^3 / 6
        let (k, l) = (5.0, 1e-6);
        let lead = -(k * k * k - k / 4.0) * l * l * l / 6.0;
        assert!((sin_minus_chord(k, l) / lead - 1.0).abs() < 1e-9);
    }
}
