//! Real Airy functions and Bessel J by power series, for the scaling-limit
//! kernels. Callers pick the working precision to absorb the cancellation
//! at large |x|.

use super::gamma::{gamma, rgamma};
use crate::prelude::*;

/// (Ai(x), Ai'(x)) from the Maclaurin series.
pub fn airy<T: Real>(x: T) -> (T, T) {
    let three = T::int(3);
    let c1 = three.powf(T::lit(-2.0) / three) / gamma(T::int(2) / three);
    let c2 = three.powf(-T::one() / three) / gamma(T::one() / three);
    let x3 = x * x * x;
    let eps = T::lit(10f64.powi(-(T::DIGITS as i32) - 2));
    // f = Σ a_k x^{3k}, g = Σ b_k x^{3k+1}
    let (mut f, mut g, mut df, mut dg) = (T::one(), x, T::zero(), T::one());
    let (mut a, mut b) = (T::one(), x);
    let mut k = 1i64;
    loop {
        let k3 = T::int(3 * k);
        a = a * x3 / ((k3 - T::one()) * k3);
        b = b * x3 / (k3 * (k3 + T::one()));
        f += a;
        g += b;
        // d/dx x^{3k} = 3k x^{3k-1}
        df += a * k3 / x;
        dg += b * (k3 + T::one()) / x;
        let big = f.abs().max(g.abs()).max(T::one());
        if k > 2 && a.abs().max(b.abs()) < eps * big {
            break;
        }
        k += 1;
    }
    if x == T::zero() {
        return (c1, -c2);
    }
    (c1 * f - c2 * g, c1 * df - c2 * dg)
}

/// (J_ν(x), J_ν'(x)) for x > 0 and ν > -1 by the ascending series.
pub fn bessel_j<T: Real>(nu: T, x: T) -> (T, T) {
    let half = x * T::lit(0.5);
    let q = -half * half;
    let eps = T::lit(10f64.powi(-(T::DIGITS as i32) - 2));
    let mut t = half.powf(nu) * rgamma(nu + T::one());
    let (mut j, mut dj) = (T::zero(), T::zero());
    let mut peak = T::zero();
    let mut k = 0i64;
    loop {
        let kk = T::int(k);
        j += t;
        dj += t * (T::int(2) * kk + nu) / x;
        peak = peak.max(t.abs());
        if k > 2 && t.abs() < eps * peak {
            break;
        }
        t = t * q / ((kk + T::one()) * (kk + nu + T::one()));
        k += 1;
    }
    (j, dj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Quad;

    #[test]
    fn airy_reference_values() {
        let cases = [
            (
                0.0,
                0.355028053887817239260063186004,
                -0.258819403792806798405183560189,
            ),
            (
                1.0,
                0.135292416312881415524147423515,
                -0.159147441296793212787500252497,
            ),
            (
                -2.0,
                0.227407428201685575991924436038,
                0.618259020741691041406264291332,
            ),
            (
                5.0,
                0.000108344428136074417349865025033,
                -0.000247413890868462476000236172063,
            ),
            (
                -7.5,
                0.32177571638064787526732854368,
                0.318809506698554596210062906079,
            ),
        ];
        for (x, ai, dai) in cases {
            let (a, d) = airy(Quad::lit(x));
            assert!((a.f64() - ai).abs() < 1e-15 * ai.abs().max(1e-3), "{x}");
            assert!((d.f64() - dai).abs() < 1e-15 * dai.abs().max(1e-3), "{x}");
        }
    }

    #[test]
    fn bessel_j_reference_values() {
        let cases = [
            (
                0.0,
                1.0,
                0.765197686557966551449717526103,
                -0.440050585744933515959682203719,
            ),
            (
                0.5,
                3.0,
                0.0650081828773757781140046964046,
                -0.466883517940862475199167376279,
            ),
            (
                2.0,
                7.5,
                -0.230273410525790262150785305646,
                0.196654670386582908422449908394,
            ),
            (
                -0.5,
                2.0,
                -0.234785710406248469174034683793,
                -0.454319708960265634372183177679,
            ),
            (
                1.3,
                0.2,
                0.0427707521921779125946616973104,
                0.276147836299191638378923098493,
            ),
        ];
        for (nu, x, jv, djv) in cases {
            let (j, d) = bessel_j(Quad::lit(nu), Quad::lit(x));
            assert!((j.f64() - jv).abs() < 1e-15, "{nu} {x}");
            assert!((d.f64() - djv).abs() < 1e-15, "{nu} {x}");
        }
    }
}
