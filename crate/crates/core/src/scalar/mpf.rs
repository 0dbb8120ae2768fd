//! Fixed-width multi-limb binary floating point.
//!
//! `Mpf<L>` carries an `L`-limb (64·L bit) significand and a 64-bit binary
//! exponent, so it is `Copy` and never overflows in practice. Arithmetic rounds
//! to nearest using one guard limb. Transcendentals are accurate to a few ulps.

use std::cmp::Ordering;
use std::fmt;
use std::num::FpCategory;
use std::ops::{
    Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Rem, RemAssign, Sub, SubAssign,
};

use num_traits::{Float, FloatConst, FromPrimitive, Num, NumCast, One, ToPrimitive, Zero};

const MAXL: usize = 16;

const EXP_ZERO: i64 = i64::MIN + 1;
const EXP_INF: i64 = i64::MAX;
const EXP_NAN: i64 = i64::MIN;

// 17 limbs, most significant first; value = 0.limbs * 2^exp.
const PI_LIMBS: [u64; 17] = [
    0xc90fdaa22168c234,
    0xc4c6628b80dc1cd1,
    0x29024e088a67cc74,
    0x020bbea63b139b22,
    0x514a08798e3404dd,
    0xef9519b3cd3a431b,
    0x302b0a6df25f1437,
    0x4fe1356d6d51c245,
    0xe485b576625e7ec6,
    0xf44c42e9a637ed6b,
    0x0bff5cb6f406b7ed,
    0xee386bfb5a899fa5,
    0xae9f24117c4b1fe6,
    0x49286651ece45b3d,
    0xc2007cb8a163bf05,
    0x98da48361c55d39a,
    0x69163fa8fd24cf5f,
];
const LN2_LIMBS: [u64; 17] = [
    0xb17217f7d1cf79ab,
    0xc9e3b39803f2f6af,
    0x40f343267298b62d,
    0x8a0d175b8baafa2b,
    0xe7b876206debac98,
    0x559552fb4afa1b10,
    0xed2eae35c1382144,
    0x27573b291169b825,
    0x3e96ca16224ae8c5,
    0x1acbda11317c387e,
    0xb9ea9bc3b136603b,
    0x256fa0ec7657f74b,
    0x72ce87b19d6548ca,
    0xf5dfa6bd38303248,
    0x655fa1872f20e3a2,
    0xda2d97c50f3fd5c6,
    0x07f4ca11fb5bfb90,
];
const LN10_LIMBS: [u64; 17] = [
    0x935d8dddaaa8ac16,
    0xea56d62b82d30a28,
    0xe28fecf9da5df90e,
    0x83c61e8201f02d72,
    0x962f02d7b1a8105c,
    0xcc70cbc02c5f0d68,
    0x2c622418410be2da,
    0xfb8f788402e516d6,
    0x782cf8a28a8c911e,
    0x765aa6c3b0d831fb,
    0xef66ceb04ab3c6fa,
    0x5161bb49d219c7bb,
    0xca67b35b23605085,
    0x8e93368d44789c4f,
    0x5b08b057d5ede20f,
    0x469ea58e9305e981,
    0xe2478fcaad3aee98,
];

/// Binary float with an `L`-limb significand (`L` ≤ 16).
#[derive(Clone, Copy)]
pub struct Mpf<const L: usize> {
    neg: bool,
    exp: i64,
    /// little-endian limbs, top bit of `mant[L-1]` set for finite nonzero values
    mant: [u64; L],
}

impl<const L: usize> Mpf<L> {
    const CHECK: () = assert!(L >= 1 && L <= MAXL, "Mpf limb count must be in 1..=16");

    pub const BITS: u32 = 64 * L as u32;

    pub const ZERO: Self = Self {
        neg: false,
        exp: EXP_ZERO,
        mant: [0; L],
    };
    pub const NAN: Self = Self {
        neg: false,
        exp: EXP_NAN,
        mant: [0; L],
    };
    pub const INFINITY: Self = Self {
        neg: false,
        exp: EXP_INF,
        mant: [0; L],
    };

    #[inline]
    fn is_zero_(&self) -> bool {
        self.exp == EXP_ZERO
    }
    #[inline]
    fn is_special(&self) -> bool {
        self.exp == EXP_ZERO || self.exp == EXP_INF || self.exp == EXP_NAN
    }

    fn from_limbs_be(neg: bool, exp: i64, src: &[u64; 17]) -> Self {
        let _ = Self::CHECK;
        let mut mant = [0u64; L];
        for i in 0..L {
            mant[L - 1 - i] = src[i];
        }
        let mut r = Self { neg, exp, mant };
        if src[L] >> 63 == 1 {
            r.increment();
        }
        r
    }

    /// Add one ulp to the magnitude.
    fn increment(&mut self) {
        for limb in self.mant.iter_mut() {
            let (v, c) = limb.overflowing_add(1);
            *limb = v;
            if !c {
                return;
            }
        }
        self.mant[L - 1] = 1 << 63;
        self.exp += 1;
    }

    /// Build from a wide little-endian buffer: normalizes, rounds to `L` limbs.
    /// `exp` is the exponent of a binary point placed above `buf[len-1]`.
    fn from_buffer(neg: bool, mut exp: i64, buf: &mut [u64]) -> Self {
        let n = buf.len();
        debug_assert!(n >= L);
        let mut top = n;
        while top > 0 && buf[top - 1] == 0 {
            top -= 1;
        }
        if top == 0 {
            return Self::ZERO;
        }
        let limb_shift = n - top;
        exp -= 64 * limb_shift as i64;
        let bit_shift = buf[top - 1].leading_zeros();
        exp -= bit_shift as i64;
        // shift left by limb_shift limbs and bit_shift bits
        let mut tmp = [0u64; 2 * MAXL + 2];
        for i in 0..top {
            tmp[i + limb_shift] = buf[i];
        }
        if bit_shift > 0 {
            for i in (0..n).rev() {
                let lo = if i > 0 {
                    tmp[i - 1] >> (64 - bit_shift)
                } else {
                    0
                };
                tmp[i] = (tmp[i] << bit_shift) | lo;
            }
        }
        let mut mant = [0u64; L];
        mant.copy_from_slice(&tmp[n - L..n]);
        let mut r = Self { neg, exp, mant };
        if n > L && tmp[n - L - 1] >> 63 == 1 {
            r.increment();
        }
        r
    }

    fn add_mag(a: &Self, b: &Self, neg: bool) -> Self {
        // |a| >= |b| in exponent
        let d = (a.exp - b.exp) as u64;
        if d > 64 * L as u64 + 2 {
            let mut r = *a;
            r.neg = neg;
            return r;
        }
        let mut buf = [0u64; MAXL + 2];
        let n = L + 2;
        buf[2..n].copy_from_slice(&a.mant);
        let mut bb = [0u64; MAXL + 2];
        shift_into(&b.mant, d, &mut bb[..n]);
        let mut carry = 0u64;
        for i in 0..n {
            let (s1, c1) = buf[i].overflowing_add(bb[i]);
            let (s2, c2) = s1.overflowing_add(carry);
            buf[i] = s2;
            carry = (c1 as u64) + (c2 as u64);
        }
        let mut exp = a.exp;
        if carry != 0 {
            for i in 0..n {
                let hi = if i + 1 < n {
                    buf[i + 1] << 63
                } else {
                    1u64 << 63
                };
                buf[i] = (buf[i] >> 1) | hi;
            }
            exp += 1;
        }
        Self::from_buffer(neg, exp, &mut buf[..n])
    }

    fn sub_mag(a: &Self, b: &Self, neg: bool) -> Self {
        // requires |a| >= |b|
        let d = (a.exp - b.exp) as u64;
        if d > 64 * L as u64 + 2 {
            let mut r = *a;
            r.neg = neg;
            return r;
        }
        let n = L + 2;
        let mut buf = [0u64; MAXL + 2];
        buf[2..n].copy_from_slice(&a.mant);
        let mut bb = [0u64; MAXL + 2];
        shift_into(&b.mant, d, &mut bb[..n]);
        let mut borrow = 0u64;
        for i in 0..n {
            let (s1, b1) = buf[i].overflowing_sub(bb[i]);
            let (s2, b2) = s1.overflowing_sub(borrow);
            buf[i] = s2;
            borrow = (b1 as u64) + (b2 as u64);
        }
        Self::from_buffer(neg, a.exp, &mut buf[..n])
    }

    fn cmp_mag(a: &Self, b: &Self) -> Ordering {
        match (a.is_zero_(), b.is_zero_()) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            _ => {}
        }
        match a.exp.cmp(&b.exp) {
            Ordering::Equal => {}
            o => return o,
        }
        for i in (0..L).rev() {
            match a.mant[i].cmp(&b.mant[i]) {
                Ordering::Equal => {}
                o => return o,
            }
        }
        Ordering::Equal
    }

    fn add_signed(a: Self, b: Self, negate_b: bool) -> Self {
        if a.exp == EXP_NAN || b.exp == EXP_NAN {
            return Self::NAN;
        }
        let bneg = b.neg ^ negate_b;
        if a.exp == EXP_INF || b.exp == EXP_INF {
            if a.exp == EXP_INF && b.exp == EXP_INF {
                return if a.neg == bneg { a } else { Self::NAN };
            }
            if a.exp == EXP_INF {
                return a;
            }
            let mut r = b;
            r.neg = bneg;
            return r;
        }
        if b.is_zero_() {
            return a;
        }
        if a.is_zero_() {
            let mut r = b;
            r.neg = bneg;
            return r;
        }
        if a.neg == bneg {
            if a.exp >= b.exp {
                Self::add_mag(&a, &b, a.neg)
            } else {
                Self::add_mag(&b, &a, a.neg)
            }
        } else {
            match Self::cmp_mag(&a, &b) {
                Ordering::Equal => Self::ZERO,
                Ordering::Greater => Self::sub_mag(&a, &b, a.neg),
                Ordering::Less => Self::sub_mag(&b, &a, bneg),
            }
        }
    }

    fn mul_(a: Self, b: Self) -> Self {
        let neg = a.neg ^ b.neg;
        if a.exp == EXP_NAN || b.exp == EXP_NAN {
            return Self::NAN;
        }
        if a.exp == EXP_INF || b.exp == EXP_INF {
            if a.is_zero_() || b.is_zero_() {
                return Self::NAN;
            }
            return Self {
                neg,
                ..Self::INFINITY
            };
        }
        if a.is_zero_() || b.is_zero_() {
            return Self::ZERO;
        }
        let mut prod = [0u64; 2 * MAXL];
        for i in 0..L {
            let mut carry: u128 = 0;
            let ai = a.mant[i] as u128;
            for j in 0..L {
                let t = ai * (b.mant[j] as u128) + prod[i + j] as u128 + carry;
                prod[i + j] = t as u64;
                carry = t >> 64;
            }
            prod[i + L] = carry as u64;
        }
        Self::from_buffer(neg, a.exp + b.exp, &mut prod[..2 * L])
    }

    /// Multiply by 2^k exactly.
    pub fn ldexp(self, k: i64) -> Self {
        if self.is_special() {
            return self;
        }
        Self {
            exp: self.exp + k,
            ..self
        }
    }

    /// Binary exponent e with |x| ∈ [2^(e-1), 2^e).
    pub fn exponent(&self) -> i64 {
        self.exp
    }

    fn mant_f64(&self) -> f64 {
        // significand in [0.5, 1)
        let top = self.mant[L - 1];
        let nxt = if L > 1 { self.mant[L - 2] } else { 0 };
        (top as f64) * 2f64.powi(-64) + (nxt as f64) * 2f64.powi(-128)
    }

    fn to_f64_(&self) -> f64 {
        match self.exp {
            EXP_NAN => return f64::NAN,
            EXP_INF => {
                return if self.neg {
                    f64::NEG_INFINITY
                } else {
                    f64::INFINITY
                }
            }
            EXP_ZERO => return if self.neg { -0.0 } else { 0.0 },
            _ => {}
        }
        let m = self.mant_f64();
        let v = if self.exp > 1100 {
            f64::INFINITY
        } else if self.exp < -1200 {
            0.0
        } else {
            ldexp_f64(m, self.exp as i32)
        };
        if self.neg {
            -v
        } else {
            v
        }
    }

    fn from_f64_(x: f64) -> Self {
        let _ = Self::CHECK;
        if x.is_nan() {
            return Self::NAN;
        }
        if x.is_infinite() {
            return Self {
                neg: x < 0.0,
                ..Self::INFINITY
            };
        }
        if x == 0.0 {
            return Self {
                neg: x.is_sign_negative(),
                ..Self::ZERO
            };
        }
        let bits = x.to_bits();
        let neg = bits >> 63 == 1;
        let e = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (m, e2) = if e == 0 {
            (frac, -1074i64)
        } else {
            (frac | (1u64 << 52), e - 1075)
        };
        Self::from_u64_scaled(neg, m, e2)
    }

    /// neg · m · 2^e2
    fn from_u64_scaled(neg: bool, m: u64, e2: i64) -> Self {
        if m == 0 {
            return Self::ZERO;
        }
        let lz = m.leading_zeros();
        let mut mant = [0u64; L];
        mant[L - 1] = m << lz;
        Self {
            neg,
            exp: e2 + 64 - lz as i64,
            mant,
        }
    }

    pub fn from_i64(v: i64) -> Self {
        Self::from_u64_scaled(v < 0, v.unsigned_abs(), 0)
    }

    pub fn pi() -> Self {
        Self::from_limbs_be(false, 2, &PI_LIMBS)
    }
    pub fn ln2() -> Self {
        Self::from_limbs_be(false, 0, &LN2_LIMBS)
    }
    pub fn ln10() -> Self {
        Self::from_limbs_be(false, 2, &LN10_LIMBS)
    }

    fn eps_bits() -> i64 {
        64 * L as i64
    }

    fn recip_(self) -> Self {
        if self.exp == EXP_NAN {
            return Self::NAN;
        }
        if self.is_zero_() {
            return Self {
                neg: self.neg,
                ..Self::INFINITY
            };
        }
        if self.exp == EXP_INF {
            return Self {
                neg: self.neg,
                ..Self::ZERO
            };
        }
        // mantissa m in [0.5,1): 1/x = (1/m) 2^-exp
        let m = Self {
            neg: false,
            exp: 0,
            mant: self.mant,
        };
        let mut y = Self::from_f64_(1.0 / m.mant_f64());
        let one = Self::one();
        let mut bits = 50i64;
        while bits < Self::eps_bits() + 8 {
            let e = one - m * y;
            y = y + y * e;
            bits *= 2;
        }
        let e = one - m * y;
        y = y + y * e;
        y.neg = self.neg;
        y.ldexp(-self.exp)
    }

    fn div_(a: Self, b: Self) -> Self {
        if a.is_special() || b.is_special() {
            if a.exp == EXP_NAN || b.exp == EXP_NAN {
                return Self::NAN;
            }
            if b.is_zero_() {
                if a.is_zero_() {
                    return Self::NAN;
                }
                return Self {
                    neg: a.neg ^ b.neg,
                    ..Self::INFINITY
                };
            }
            if b.exp == EXP_INF {
                if a.exp == EXP_INF {
                    return Self::NAN;
                }
                return Self::ZERO;
            }
            if a.is_zero_() {
                return Self::ZERO;
            }
            return Self {
                neg: a.neg ^ b.neg,
                ..Self::INFINITY
            };
        }
        let y = b.recip_();
        let q = a * y;
        // one correction step
        let r = a - b * q;
        q + r * y
    }

    fn sqrt_(self) -> Self {
        if self.exp == EXP_NAN || self.neg && !self.is_zero_() {
            return Self::NAN;
        }
        if self.is_zero_() || self.exp == EXP_INF {
            return self;
        }
        // x = m 2^e with e even
        let (m, e) = if self.exp % 2 == 0 {
            (Self { exp: 0, ..self }, self.exp)
        } else {
            (Self { exp: 1, ..self }, self.exp - 1)
        };
        let mf = m.to_f64_();
        let mut y = Self::from_f64_(1.0 / mf.sqrt());
        let half = Self::from_f64_(0.5);
        let three = Self::from_f64_(3.0);
        let mut bits = 50i64;
        while bits < Self::eps_bits() + 8 {
            y = y * (three - m * y * y) * half;
            bits *= 2;
        }
        let mut s = m * y;
        s = s + (m - s * s) * y * half;
        s.ldexp(e / 2)
    }

    fn trunc_(self) -> Self {
        if self.is_special() {
            return self;
        }
        if self.exp <= 0 {
            return Self {
                neg: self.neg,
                ..Self::ZERO
            };
        }
        if self.exp >= 64 * L as i64 {
            return self;
        }
        let frac_bits = (64 * L as i64 - self.exp) as usize;
        let mut r = self;
        for i in 0..L {
            let lo = 64 * i;
            if lo + 64 <= frac_bits {
                r.mant[i] = 0;
            } else if lo < frac_bits {
                let k = frac_bits - lo;
                r.mant[i] &= !((1u64 << k) - 1);
            }
        }
        r
    }

    fn has_fraction(&self) -> bool {
        !self.is_special() && Self::cmp_mag(self, &self.trunc_()) != Ordering::Equal
    }

    /// e^x - 1 for |x| ≤ 1, accurate in relative terms.
    fn expm1_small(x: Self) -> Self {
        if x.is_zero_() {
            return x;
        }
        // halve until tiny, Taylor, then undo with (1+s)^2-1 = s(2+s)
        let squarings = ((Self::eps_bits() as f64).sqrt() / 2.0) as i64 + 1;
        let r = x.ldexp(-squarings);
        let lim = r.exp - Self::eps_bits() - 4;
        let mut term = r;
        let mut sum = r;
        let mut k = 2i64;
        loop {
            term = term * r / Self::from_i64(k);
            sum = sum + term;
            if term.is_zero_() || term.exp < lim {
                break;
            }
            k += 1;
        }
        let two = Self::from_f64_(2.0);
        for _ in 0..squarings {
            sum = sum * (two + sum);
        }
        sum
    }

    fn exp_(self) -> Self {
        match self.exp {
            EXP_NAN => return Self::NAN,
            EXP_INF => return if self.neg { Self::ZERO } else { Self::INFINITY },
            EXP_ZERO => return Self::one(),
            _ => {}
        }
        if self.exp > 62 {
            return if self.neg { Self::ZERO } else { Self::INFINITY };
        }
        let ln2 = Self::ln2();
        let k = (self.to_f64_() / std::f64::consts::LN_2).round();
        let r = self - ln2 * Self::from_f64_(k);
        let e = Self::expm1_small(r) + Self::one();
        e.ldexp(k as i64)
    }

    fn exp_m1_(self) -> Self {
        if !self.is_special() && self.exp <= 0 {
            return Self::expm1_small(self);
        }
        self.exp_() - Self::one()
    }

    fn ln_(self) -> Self {
        if self.exp == EXP_NAN || (self.neg && !self.is_zero_()) {
            return Self::NAN;
        }
        if self.is_zero_() {
            return Self {
                neg: true,
                ..Self::INFINITY
            };
        }
        if self.exp == EXP_INF {
            return self;
        }
        // x = m 2^e, m in [0.5,1) -> use m' in [sqrt(.5), sqrt(2))
        let mut e = self.exp;
        let mut m = Self { exp: 0, ..self };
        if m.mant_f64() < std::f64::consts::FRAC_1_SQRT_2 {
            m = m.ldexp(1);
            e -= 1;
        }
        let mut y = Self::from_f64_(m.to_f64_().ln());
        if !(m - Self::one()).is_zero_() {
            // Halley on e^y = m
            let mut bits = 50i64;
            let two = Self::from_f64_(2.0);
            while bits < Self::eps_bits() + 8 {
                let ey = y.exp_();
                y = y + two * (m - ey) / (m + ey);
                bits *= 3;
            }
        } else {
            y = Self::ZERO;
        }
        if e != 0 {
            y = y + Self::ln2() * Self::from_i64(e);
        }
        y
    }

    fn ln_1p_(self) -> Self {
        if !self.is_special() && self.exp < -2 {
            // atanh form: ln(1+x) = 2 atanh(x/(2+x))
            let t = self / (Self::from_f64_(2.0) + self);
            return Self::atanh_series(t).ldexp(1);
        }
        (Self::one() + self).ln_()
    }

    fn atanh_series(t: Self) -> Self {
        let t2 = t * t;
        let mut p = t;
        let mut sum = t;
        let lim = t.exp - Self::eps_bits() - 4;
        let mut k = 3i64;
        loop {
            p = p * t2;
            let term = p / Self::from_i64(k);
            sum = sum + term;
            if term.is_zero_() || term.exp < lim {
                break;
            }
            k += 2;
        }
        sum
    }

    /// sin and cos of a reduced argument |r| ≤ π/4.
    fn sin_cos_reduced(r: Self) -> (Self, Self) {
        let r2 = r * r;
        let lim = -Self::eps_bits() - 4;
        // sin
        let mut term = r;
        let mut s = r;
        let mut k = 1i64;
        loop {
            term = -(term * r2) / Self::from_i64((2 * k) * (2 * k + 1));
            s = s + term;
            if term.is_zero_() || term.exp < lim + r.exp.min(0) {
                break;
            }
            k += 1;
        }
        let mut term = Self::one();
        let mut c = Self::one();
        let mut k = 1i64;
        loop {
            term = -(term * r2) / Self::from_i64((2 * k - 1) * (2 * k));
            c = c + term;
            if term.is_zero_() || term.exp < lim {
                break;
            }
            k += 1;
        }
        (s, c)
    }

    fn sin_cos_(self) -> (Self, Self) {
        if self.is_special() {
            if self.is_zero_() {
                return (self, Self::one());
            }
            return (Self::NAN, Self::NAN);
        }
        let half_pi = Self::pi().ldexp(-1);
        let q = (self / half_pi).round_();
        let r = self - q * half_pi;
        let (s, c) = Self::sin_cos_reduced(r);
        let qi = q.to_f64_().rem_euclid(4.0) as i64;
        match qi {
            0 => (s, c),
            1 => (c, -s),
            2 => (-s, -c),
            _ => (-c, s),
        }
    }

    fn round_(self) -> Self {
        let half = Self::from_f64_(0.5);
        if self.neg {
            -((-self) + half).floor_()
        } else {
            (self + half).floor_()
        }
    }

    fn floor_(self) -> Self {
        let t = self.trunc_();
        if self.neg && self.has_fraction() {
            t - Self::one()
        } else {
            t
        }
    }

    fn ceil_(self) -> Self {
        let t = self.trunc_();
        if !self.neg && self.has_fraction() {
            t + Self::one()
        } else {
            t
        }
    }

    fn atan_(self) -> Self {
        if self.exp == EXP_NAN {
            return Self::NAN;
        }
        if self.exp == EXP_INF {
            let h = Self::pi().ldexp(-1);
            return if self.neg { -h } else { h };
        }
        if self.is_zero_() {
            return self;
        }
        // Newton on tan(y) = x: y <- y - (sin y - x cos y) cos y
        let mut y = Self::from_f64_(self.to_f64_().atan());
        let mut bits = 50i64;
        while bits < Self::eps_bits() + 8 {
            let (s, c) = y.sin_cos_();
            y = y - (s - self * c) * c;
            bits *= 2;
        }
        y
    }

    fn powi_(self, n: i32) -> Self {
        let mut base = if n < 0 { self.recip_() } else { self };
        let mut e = n.unsigned_abs();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }

    fn powf_(self, y: Self) -> Self {
        if y.is_zero_() {
            return Self::one();
        }
        if self.is_zero_() {
            return if y.neg { Self::INFINITY } else { Self::ZERO };
        }
        if !y.has_fraction() && y.exp <= 31 {
            return self.powi_(y.to_f64_() as i32);
        }
        (y * self.ln_()).exp_()
    }

    fn to_decimal(&self, digits: usize) -> String {
        match self.exp {
            EXP_NAN => return "NaN".into(),
            EXP_INF => {
                return if self.neg {
                    "-inf".into()
                } else {
                    "inf".into()
                }
            }
            EXP_ZERO => return "0".into(),
            _ => {}
        }
        let mut x = self.abs_();
        let ten = Self::from_f64_(10.0);
        let mut e10 = (x.exp as f64 * std::f64::consts::LOG10_2).floor() as i32;
        x = x * ten.powi_(-e10);
        while x >= ten {
            x = x / ten;
            e10 += 1;
        }
        while x < Self::one() {
            x = x * ten;
            e10 -= 1;
        }
        let mut ds: Vec<u8> = Vec::with_capacity(digits + 1);
        for _ in 0..=digits {
            let d = x.trunc_().to_f64_() as i64;
            let d = d.clamp(0, 9);
            ds.push(d as u8);
            x = (x - Self::from_i64(d)) * ten;
        }
        // round on the extra digit
        if ds[digits] >= 5 {
            let mut i = digits;
            loop {
                if i == 0 {
                    ds.insert(0, 1);
                    e10 += 1;
                    break;
                }
                i -= 1;
                if ds[i] == 9 {
                    ds[i] = 0;
                } else {
                    ds[i] += 1;
                    break;
                }
            }
        }
        ds.truncate(digits);
        while ds.len() > 1 && *ds.last().unwrap() == 0 {
            ds.pop();
        }
        let mut s = String::new();
        if self.neg {
            s.push('-');
        }
        s.push((b'0' + ds[0]) as char);
        if ds.len() > 1 {
            s.push('.');
            for d in &ds[1..] {
                s.push((b'0' + d) as char);
            }
        }
        if e10 != 0 {
            s.push_str(&format!("e{}", e10));
        }
        s
    }

    fn abs_(self) -> Self {
        Self { neg: false, ..self }
    }

    /// Decimal digits carried by the significand.
    pub fn decimal_digits() -> usize {
        (64.0 * L as f64 * std::f64::consts::LOG10_2).floor() as usize
    }

    pub fn parse_decimal(s: &str) -> Option<Self> {
        let s = s.trim();
        let (neg, body) = match s.as_bytes().first()? {
            b'-' => (true, &s[1..]),
            b'+' => (false, &s[1..]),
            _ => (false, s),
        };
        match body.to_ascii_lowercase().as_str() {
            "nan" => return Some(Self::NAN),
            "inf" | "infinity" => {
                return Some(Self {
                    neg,
                    ..Self::INFINITY
                })
            }
            _ => {}
        }
        let (mant, ex) = match body.find(['e', 'E']) {
            Some(p) => (&body[..p], body[p + 1..].parse::<i32>().ok()?),
            None => (body, 0),
        };
        let ten = Self::from_f64_(10.0);
        let mut acc = Self::ZERO;
        let mut scale = 0i32;
        let mut seen_dot = false;
        let mut any = false;
        for ch in mant.chars() {
            match ch {
                '0'..='9' => {
                    acc = acc * ten + Self::from_i64((ch as u8 - b'0') as i64);
                    if seen_dot {
                        scale -= 1;
                    }
                    any = true;
                }
                '.' if !seen_dot => seen_dot = true,
                '_' => {}
                _ => return None,
            }
        }
        if !any {
            return None;
        }
        let total = ex + scale;
        let v = if total >= 0 {
            acc * ten.powi_(total)
        } else {
            acc / ten.powi_(-total)
        };
        Some(if neg { -v } else { v })
    }
}

fn ldexp_f64(m: f64, e: i32) -> f64 {
    let mut v = m;
    let mut e = e;
    while e > 1000 {
        v *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        v *= 2f64.powi(-1000);
        e += 1000;
    }
    v * 2f64.powi(e)
}

/// Place `src` (L limbs) at the top of `dst` and shift right by `d` bits.
fn shift_into(src: &[u64], d: u64, dst: &mut [u64]) {
    let n = dst.len();
    let l = src.len();
    let limbs = (d / 64) as usize;
    let bits = (d % 64) as u32;
    for v in dst.iter_mut() {
        *v = 0;
    }
    for i in 0..l {
        // source limb i sits at dst index (n - l + i) before shifting
        let pos = (n - l + i) as isize - limbs as isize;
        if pos >= 0 {
            dst[pos as usize] |= src[i] >> bits;
        }
        if bits > 0 && pos >= 1 {
            dst[pos as usize - 1] |= src[i] << (64 - bits);
        }
    }
}

impl<const L: usize> PartialEq for Mpf<L> {
    fn eq(&self, other: &Self) -> bool {
        if self.exp == EXP_NAN || other.exp == EXP_NAN {
            return false;
        }
        if self.is_zero_() && other.is_zero_() {
            return true;
        }
        self.neg == other.neg && self.exp == other.exp && self.mant == other.mant
    }
}

impl<const L: usize> PartialOrd for Mpf<L> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        if self.exp == EXP_NAN || other.exp == EXP_NAN {
            return None;
        }
        let sa = if self.is_zero_() {
            0
        } else if self.neg {
            -1
        } else {
            1
        };
        let sb = if other.is_zero_() {
            0
        } else if other.neg {
            -1
        } else {
            1
        };
        if sa != sb {
            return Some(sa.cmp(&sb));
        }
        if sa == 0 {
            return Some(Ordering::Equal);
        }
        let inf_a = self.exp == EXP_INF;
        let inf_b = other.exp == EXP_INF;
        let mag = match (inf_a, inf_b) {
            (true, true) => Ordering::Equal,
            (true, false) => Ordering::Greater,
            (false, true) => Ordering::Less,
            _ => Self::cmp_mag(self, other),
        };
        Some(if sa < 0 { mag.reverse() } else { mag })
    }
}

impl<const L: usize> Default for Mpf<L> {
    fn default() -> Self {
        Self::ZERO
    }
}

impl<const L: usize> Neg for Mpf<L> {
    type Output = Self;
    fn neg(self) -> Self {
        if self.exp == EXP_NAN {
            return self;
        }
        Self {
            neg: !self.neg,
            ..self
        }
    }
}

impl<const L: usize> Add for Mpf<L> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::add_signed(self, rhs, false)
    }
}
impl<const L: usize> Sub for Mpf<L> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::add_signed(self, rhs, true)
    }
}
impl<const L: usize> Mul for Mpf<L> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self::mul_(self, rhs)
    }
}
impl<const L: usize> Div for Mpf<L> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        Self::div_(self, rhs)
    }
}
impl<const L: usize> Rem for Mpf<L> {
    type Output = Self;
    fn rem(self, rhs: Self) -> Self {
        self - (self / rhs).trunc_() * rhs
    }
}

macro_rules! assign_ops {
    ($($tr:ident $m:ident $op:tt),*) => {$(
        impl<const L: usize> $tr for Mpf<L> {
            fn $m(&mut self, rhs: Self) { *self = *self $op rhs; }
        }
    )*};
}
assign_ops!(AddAssign add_assign +, SubAssign sub_assign -, MulAssign mul_assign *, DivAssign div_assign /, RemAssign rem_assign %);

impl<const L: usize> std::iter::Sum for Mpf<L> {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::ZERO, |a, b| a + b)
    }
}
impl<'a, const L: usize> std::iter::Sum<&'a Mpf<L>> for Mpf<L> {
    fn sum<I: Iterator<Item = &'a Self>>(iter: I) -> Self {
        iter.fold(Self::ZERO, |a, b| a + *b)
    }
}
impl<const L: usize> std::iter::Product for Mpf<L> {
    fn product<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::one(), |a, b| a * b)
    }
}

impl<const L: usize> fmt::Display for Mpf<L> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or(Self::decimal_digits()).max(1);
        f.pad(&self.to_decimal(digits))
    }
}
impl<const L: usize> fmt::Debug for Mpf<L> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Mpf<{}>({})", L, self.to_decimal(Self::decimal_digits()))
    }
}

impl<const L: usize> Zero for Mpf<L> {
    fn zero() -> Self {
        Self::ZERO
    }
    fn is_zero(&self) -> bool {
        self.is_zero_()
    }
}
impl<const L: usize> One for Mpf<L> {
    fn one() -> Self {
        Self::from_u64_scaled(false, 1, 0)
    }
}

impl<const L: usize> Num for Mpf<L> {
    type FromStrRadixErr = &'static str;
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        if radix != 10 {
            return Err("only radix 10 is supported");
        }
        Self::parse_decimal(s).ok_or("invalid decimal literal")
    }
}

impl<const L: usize> std::str::FromStr for Mpf<L> {
    type Err = &'static str;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse_decimal(s).ok_or("invalid decimal literal")
    }
}

impl<const L: usize> ToPrimitive for Mpf<L> {
    fn to_i64(&self) -> Option<i64> {
        let t = self.trunc_();
        if t.is_special() {
            return if t.is_zero_() { Some(0) } else { None };
        }
        if t.exp > 63 {
            return None;
        }
        let v = t.mant[L - 1] >> (64 - t.exp);
        let v = v as i64;
        Some(if t.neg { -v } else { v })
    }
    fn to_u64(&self) -> Option<u64> {
        let t = self.trunc_();
        if t.is_special() {
            return if t.is_zero_() { Some(0) } else { None };
        }
        if t.neg || t.exp > 64 {
            return None;
        }
        Some(t.mant[L - 1] >> (64 - t.exp))
    }
    fn to_f64(&self) -> Option<f64> {
        Some(self.to_f64_())
    }
}

impl<const L: usize> NumCast for Mpf<L> {
    fn from<T: ToPrimitive>(n: T) -> Option<Self> {
        n.to_f64().map(Self::from_f64_)
    }
}

impl<const L: usize> FromPrimitive for Mpf<L> {
    fn from_i64(n: i64) -> Option<Self> {
        Some(Mpf::from_i64(n))
    }
    fn from_u64(n: u64) -> Option<Self> {
        Some(Self::from_u64_scaled(false, n, 0))
    }
    fn from_f64(n: f64) -> Option<Self> {
        Some(Self::from_f64_(n))
    }
}

impl<const L: usize> FloatConst for Mpf<L> {
    fn E() -> Self {
        Self::one().exp_()
    }
    fn FRAC_1_PI() -> Self {
        Self::pi().recip_()
    }
    fn FRAC_1_SQRT_2() -> Self {
        Self::from_f64_(0.5).sqrt_()
    }
    fn FRAC_2_PI() -> Self {
        Self::pi().recip_().ldexp(1)
    }
    fn FRAC_2_SQRT_PI() -> Self {
        Self::pi().sqrt_().recip_().ldexp(1)
    }
    fn FRAC_PI_2() -> Self {
        Self::pi().ldexp(-1)
    }
    fn FRAC_PI_3() -> Self {
        Self::pi() / Self::from_f64_(3.0)
    }
    fn FRAC_PI_4() -> Self {
        Self::pi().ldexp(-2)
    }
    fn FRAC_PI_6() -> Self {
        Self::pi() / Self::from_f64_(6.0)
    }
    fn FRAC_PI_8() -> Self {
        Self::pi().ldexp(-3)
    }
    fn LN_10() -> Self {
        Self::ln10()
    }
    fn LN_2() -> Self {
        Self::ln2()
    }
    fn LOG10_E() -> Self {
        Self::ln10().recip_()
    }
    fn LOG2_E() -> Self {
        Self::ln2().recip_()
    }
    fn PI() -> Self {
        Self::pi()
    }
    fn SQRT_2() -> Self {
        Self::from_f64_(2.0).sqrt_()
    }
}

impl<const L: usize> Float for Mpf<L> {
    fn nan() -> Self {
        Self::NAN
    }
    fn infinity() -> Self {
        Self::INFINITY
    }
    fn neg_infinity() -> Self {
        Self {
            neg: true,
            ..Self::INFINITY
        }
    }
    fn neg_zero() -> Self {
        Self {
            neg: true,
            ..Self::ZERO
        }
    }
    fn min_value() -> Self {
        -Self::max_value()
    }
    fn min_positive_value() -> Self {
        let mut mant = [0u64; L];
        mant[L - 1] = 1 << 63;
        Self {
            neg: false,
            exp: -(1i64 << 60),
            mant,
        }
    }
    fn max_value() -> Self {
        Self {
            neg: false,
            exp: 1i64 << 60,
            mant: [u64::MAX; L],
        }
    }
    fn epsilon() -> Self {
        Self::one().ldexp(1 - 64 * L as i64)
    }
    fn is_nan(self) -> bool {
        self.exp == EXP_NAN
    }
    fn is_infinite(self) -> bool {
        self.exp == EXP_INF
    }
    fn is_finite(self) -> bool {
        self.exp != EXP_INF && self.exp != EXP_NAN
    }
    fn is_normal(self) -> bool {
        !self.is_special()
    }
    fn classify(self) -> FpCategory {
        match self.exp {
            EXP_NAN => FpCategory::Nan,
            EXP_INF => FpCategory::Infinite,
            EXP_ZERO => FpCategory::Zero,
            _ => FpCategory::Normal,
        }
    }
    fn floor(self) -> Self {
        self.floor_()
    }
    fn ceil(self) -> Self {
        self.ceil_()
    }
    fn round(self) -> Self {
        self.round_()
    }
    fn trunc(self) -> Self {
        self.trunc_()
    }
    fn fract(self) -> Self {
        self - self.trunc_()
    }
    fn abs(self) -> Self {
        self.abs_()
    }
    fn signum(self) -> Self {
        if self.exp == EXP_NAN {
            return self;
        }
        if self.neg {
            -Self::one()
        } else {
            Self::one()
        }
    }
    fn is_sign_positive(self) -> bool {
        !self.neg
    }
    fn is_sign_negative(self) -> bool {
        self.neg
    }
    fn mul_add(self, a: Self, b: Self) -> Self {
        self * a + b
    }
    fn recip(self) -> Self {
        self.recip_()
    }
    fn powi(self, n: i32) -> Self {
        self.powi_(n)
    }
    fn powf(self, n: Self) -> Self {
        self.powf_(n)
    }
    fn sqrt(self) -> Self {
        self.sqrt_()
    }
    fn exp(self) -> Self {
        self.exp_()
    }
    fn exp2(self) -> Self {
        (self * Self::ln2()).exp_()
    }
    fn ln(self) -> Self {
        self.ln_()
    }
    fn log(self, base: Self) -> Self {
        self.ln_() / base.ln_()
    }
    fn log2(self) -> Self {
        self.ln_() / Self::ln2()
    }
    fn log10(self) -> Self {
        self.ln_() / Self::ln10()
    }
    fn max(self, other: Self) -> Self {
        if self.is_nan() || other > self {
            other
        } else {
            self
        }
    }
    fn min(self, other: Self) -> Self {
        if self.is_nan() || other < self {
            other
        } else {
            self
        }
    }
    fn abs_sub(self, other: Self) -> Self {
        if self <= other {
            Self::ZERO
        } else {
            self - other
        }
    }
    fn cbrt(self) -> Self {
        if self.is_zero_() || !self.is_finite() {
            return self;
        }
        let a = self.abs_();
        // Newton on y^3 = a
        let mut y = Self::from_f64_(a.to_f64_().cbrt());
        if y.is_zero_() || !y.is_finite() {
            y = (a.ln_() / Self::from_f64_(3.0)).exp_();
        }
        let three = Self::from_f64_(3.0);
        let mut bits = 50i64;
        while bits < Self::eps_bits() + 8 {
            y = y - (y * y * y - a) / (three * y * y);
            bits *= 2;
        }
        if self.neg {
            -y
        } else {
            y
        }
    }
    fn hypot(self, other: Self) -> Self {
        (self * self + other * other).sqrt_()
    }
    fn sin(self) -> Self {
        self.sin_cos_().0
    }
    fn cos(self) -> Self {
        self.sin_cos_().1
    }
    fn tan(self) -> Self {
        let (s, c) = self.sin_cos_();
        s / c
    }
    fn asin(self) -> Self {
        (self / (Self::one() - self * self).sqrt_()).atan_()
    }
    fn acos(self) -> Self {
        Self::pi().ldexp(-1) - self.asin()
    }
    fn atan(self) -> Self {
        self.atan_()
    }
    fn atan2(self, other: Self) -> Self {
        let pi = Self::pi();
        if other.is_zero_() {
            if self.is_zero_() {
                return Self::ZERO;
            }
            let h = pi.ldexp(-1);
            return if self.neg { -h } else { h };
        }
        let a = (self / other).atan_();
        if !other.neg {
            a
        } else if self.neg {
            a - pi
        } else {
            a + pi
        }
    }
    fn sin_cos(self) -> (Self, Self) {
        self.sin_cos_()
    }
    fn exp_m1(self) -> Self {
        self.exp_m1_()
    }
    fn ln_1p(self) -> Self {
        self.ln_1p_()
    }
    fn sinh(self) -> Self {
        let e = self.exp_m1_();
        // (e^x - e^-x)/2 = (em1 + em1/(1+em1))/2
        (e + e / (Self::one() + e)).ldexp(-1)
    }
    fn cosh(self) -> Self {
        let e = self.exp_();
        (e + e.recip_()).ldexp(-1)
    }
    fn tanh(self) -> Self {
        let e = (self.ldexp(1)).exp_m1_();
        e / (e + Self::from_f64_(2.0))
    }
    fn asinh(self) -> Self {
        let a = self.abs_();
        let r = (a + (a * a + Self::one()).sqrt_()).ln_();
        if self.neg {
            -r
        } else {
            r
        }
    }
    fn acosh(self) -> Self {
        (self + (self * self - Self::one()).sqrt_()).ln_()
    }
    fn atanh(self) -> Self {
        if self.abs_() < Self::from_f64_(0.25) {
            return Self::atanh_series(self);
        }
        ((Self::one() + self) / (Self::one() - self))
            .ln_()
            .ldexp(-1)
    }
    fn integer_decode(self) -> (u64, i16, i8) {
        self.to_f64_().integer_decode()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type M4 = Mpf<4>;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    #[test]
    fn roundtrip_f64() {
        for &x in &[1.0, -2.5, 3.141592653589793, 1e-300, 7.0e200, 0.1] {
            assert_eq!(M4::from_f64_(x).to_f64_(), x);
        }
    }

    #[test]
    fn basic_arith_matches_f64() {
        let xs = [1.25, -3.5, 0.1, 7.0e10, -2.0e-7];
        for &a in &xs {
            for &b in &xs {
                let (ma, mb) = (M4::from_f64_(a), M4::from_f64_(b));
                assert!(close((ma + mb).to_f64_(), a + b, 1e-15));
                assert!(close((ma - mb).to_f64_(), a - b, 1e-15) || (a - b) == 0.0);
                assert!(close((ma * mb).to_f64_(), a * b, 1e-15));
                assert!(close((ma / mb).to_f64_(), a / b, 1e-15));
            }
        }
    }

    #[test]
    fn third_times_three() {
        let t = M4::one() / M4::from_f64_(3.0);
        let e = (t * M4::from_f64_(3.0) - M4::one()).abs();
        assert!(e < M4::epsilon() * M4::from_f64_(4.0));
    }

    #[test]
    fn sqrt2_squared() {
        let s = M4::from_f64_(2.0).sqrt();
        let e = (s * s - M4::from_f64_(2.0)).abs();
        assert!(e < M4::epsilon() * M4::from_f64_(8.0));
    }

    #[test]
    fn exp_ln_inverse() {
        for &x in &[0.3, 1.0, 5.5, -12.25, 100.0] {
            let m = M4::from_f64_(x);
            let back = m.exp().ln();
            assert!((back - m).abs() < M4::epsilon() * M4::from_f64_(64.0 * x.abs().max(1.0)));
        }
    }

    #[test]
    fn ln2_constant_agrees_with_series() {
        // ln 2 = 2 atanh(1/3)
        let s = M4::atanh_series(M4::one() / M4::from_f64_(3.0)).ldexp(1);
        assert!((s - M4::ln2()).abs() < M4::epsilon() * M4::from_f64_(8.0));
    }

    #[test]
    fn pi_via_machin() {
        // π/4 = 4 atan(1/5) − atan(1/239)
        let a = (M4::one() / M4::from_f64_(5.0)).atan();
        let b = (M4::one() / M4::from_f64_(239.0)).atan();
        let p = (a * M4::from_f64_(4.0) - b) * M4::from_f64_(4.0);
        assert!((p - M4::pi()).abs() < M4::epsilon() * M4::from_f64_(64.0));
    }

    #[test]
    fn trig_identity() {
        for &x in &[0.1, 1.0, 2.5, -7.0, 40.0] {
            let (s, c) = M4::from_f64_(x).sin_cos();
            assert!((s * s + c * c - M4::one()).abs() < M4::epsilon() * M4::from_f64_(32.0));
            assert!(close(s.to_f64().unwrap(), x.sin(), 1e-13));
        }
    }

    #[test]
    fn floor_ceil_round() {
        let v = M4::from_f64_(-2.5);
        assert_eq!(v.floor().to_f64_(), -3.0);
        assert_eq!(v.ceil().to_f64_(), -2.0);
        assert_eq!(v.trunc().to_f64_(), -2.0);
        assert_eq!(M4::from_f64_(2.5).round().to_f64_(), 3.0);
        assert_eq!(M4::from_f64_(7.0).floor().to_f64_(), 7.0);
    }

    #[test]
    fn decimal_roundtrip() {
        let x = M4::one() / M4::from_f64_(7.0);
        let s = format!("{}", x);
        assert!(s.starts_with("1.428571428571428571428571428571428571"));
        let y: M4 = s.parse().unwrap();
        assert!((x - y).abs() < M4::epsilon() * M4::from_f64_(100.0));
    }

    #[test]
    fn cancellation_keeps_bits() {
        let a = M4::one() + M4::epsilon() * M4::from_f64_(4.0);
        let d = a - M4::one();
        assert!(close(d.to_f64_(), 4.0 * M4::epsilon().to_f64_(), 1e-12));
    }

    #[test]
    fn ordering_and_specials() {
        let a = M4::from_f64_(-1.0);
        let b = M4::from_f64_(2.0);
        assert!(a < b && b > M4::ZERO && a < M4::ZERO);
        assert!(M4::NAN.partial_cmp(&a).is_none());
        assert!((M4::one() / M4::ZERO).is_infinite());
        assert!(M4::from_f64_(-1.0).sqrt().is_nan());
    }

    #[test]
    fn wide_precision_exp() {
        type M8 = Mpf<8>;
        let e = M8::one().exp();
        let s = format!("{}", e);
        assert!(s.starts_with("2.71828182845904523536028747135266249775724709369995957496696762772407663035354759457138217852516642742746"));
    }
}
