//! Gamma function and friends at arbitrary working precision.

use crate::prelude::*;

// B_2k as (numerator, denominator), k = 1..29
const BERNOULLI: [(&str, &str); 29] = [
    ("1", "6"),
    ("-1", "30"),
    ("1", "42"),
    ("-1", "30"),
    ("5", "66"),
    ("-691", "2730"),
    ("7", "6"),
    ("-3617", "510"),
    ("43867", "798"),
    ("-174611", "330"),
    ("854513", "138"),
    ("-236364091", "2730"),
    ("8553103", "6"),
    ("-23749461029", "870"),
    ("8615841276005", "14322"),
    ("-7709321041217", "510"),
    ("2577687858367", "6"),
    ("-26315271553053477373", "1919190"),
    ("2929993913841559", "6"),
    ("-261082718496449122051", "13530"),
    ("1520097643918070802691", "1806"),
    ("-27833269579301024235023", "690"),
    ("596451111593912163277961", "282"),
    ("-5609403368997817686249127547", "46410"),
    ("495057205241079648212477525", "66"),
    ("-801165718135489957347924991853", "1590"),
    ("29149963634884862421418123812691", "798"),
    ("-2479392929313226753685415739663229", "870"),
    ("84483613348880041862046775994036021", "354"),
];

const EULER_GAMMA: &str = "0.57721566490153286060651209008240243104215933593992359880576723488486772677766467093694706329174674951463144724980708248096050401448654283622417399764492353625350033374294";

pub(crate) fn parse<T: Real>(s: &str) -> T {
    T::from_str_radix(s, 10).ok().expect("decimal constant")
}

/// Euler–Mascheroni constant.
pub fn euler_gamma<T: Real>() -> T {
    parse(EULER_GAMMA)
}

fn bernoulli<T: Real>(k: usize) -> T {
    let (n, d) = BERNOULLI[k - 1];
    parse::<T>(n) / parse::<T>(d)
}

fn stirling_shift<T: Real>() -> f64 {
    let digits = T::DIGITS as f64 + 2.0;
    (10f64.powf((78.4 + digits) / 58.0) / (2.0 * std::f64::consts::PI))
        .max(8.0)
        .ceil()
}

/// ln Γ(x) for x > 0.
pub fn ln_gamma<T: Real>(x: T) -> T {
    assert!(x > T::zero(), "ln_gamma needs a positive argument");
    if T::DIGITS <= 16 {
        return T::lit(statrs::function::gamma::ln_gamma(x.f64()));
    }
    let xmin = T::lit(stirling_shift::<T>());
    let mut z = x;
    let mut shift = T::zero();
    // accumulate ln of the product in chunks to keep it in range
    let mut prod = T::one();
    while z < xmin {
        prod *= z;
        if prod > T::lit(1e200) {
            shift += prod.ln();
            prod = T::one();
        }
        z += T::one();
    }
    shift += prod.ln();
    let half = T::lit(0.5);
    let two_pi = T::PI() + T::PI();
    let mut s = (z - half) * z.ln() - z + half * two_pi.ln();
    let zi = z.recip();
    let zi2 = zi * zi;
    let mut zp = zi;
    let eps = T::epsilon();
    for k in 1..=BERNOULLI.len() {
        let kk = T::int(k as i64);
        let term = bernoulli::<T>(k) / (kk * T::int(2) * (kk * T::int(2) - T::one())) * zp;
        s += term;
        if term.abs() < eps * s.abs() {
            break;
        }
        zp *= zi2;
    }
    s - shift
}

/// Γ(x) for real x, using reflection for x ≤ 0.
pub fn gamma<T: Real>(x: T) -> T {
    if x > T::zero() {
        return ln_gamma(x).exp();
    }
    if x == x.floor() {
        return T::nan();
    }
    // Γ(x)Γ(1−x) = π / sin(πx)
    let pi = T::PI();
    pi / ((pi * x).sin() * gamma(T::one() - x))
}

/// 1/Γ(x), entire; zero at the poles of Γ.
pub fn rgamma<T: Real>(x: T) -> T {
    if x <= T::zero() && x == x.floor() {
        return T::zero();
    }
    gamma(x).recip()
}

/// Digamma at positive integers: ψ(k+1) = −γ + H_k.
pub fn digamma_int<T: Real>(k: usize) -> T {
    let mut h = T::zero();
    for j in 1..=k {
        h += T::int(j as i64).recip();
    }
    h - euler_gamma::<T>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{Octo, Quad};

    #[test]
    fn gamma_half_is_sqrt_pi_quad() {
        let g = gamma(Quad::lit(0.5));
        let want = Quad::PI().sqrt();
        assert!(((g - want) / want).abs() < Quad::lit(1e-70));
    }

    #[test]
    fn gamma_half_is_sqrt_pi_octo() {
        let g = gamma(Octo::lit(1.5));
        let want = Octo::PI().sqrt() / Octo::lit(2.0);
        assert!(((g - want) / want).abs() < Octo::lit(1e-145));
    }

    #[test]
    fn factorials() {
        let g = gamma(crate::Ext::lit(21.0));
        let want = crate::Ext::lit(2432902008176640000.0);
        assert!(((g - want) / want).abs() < crate::Ext::lit(1e-34));
        assert!((gamma(5.0f64) - 24.0).abs() < 1e-12);
    }

    #[test]
    fn reflection_negative_argument() {
        // Γ(−1/2) = −2√π
        let g = gamma(-0.5f64);
        assert!((g + 2.0 * std::f64::consts::PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn euler_constant_digits() {
        let g: f64 = euler_gamma();
        assert!((g - 0.5772156649015329).abs() < 1e-16);
        assert!((digamma_int::<f64>(0) + g).abs() < 1e-16);
    }
}
