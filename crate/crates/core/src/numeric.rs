//! Scalar abstraction shared by the double and extended precision quadrature
//! paths, plus a few complex helpers that only need field operations.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Rem, Sub};

use astro_float::{BigFloat, Consts, RoundingMode, Sign};
use num_complex::Complex;
use num_traits::{Num, One, Zero};

pub trait Real: Clone + Num + Neg<Output = Self> + PartialOrd + fmt::Debug + Send + Sync + 'static {
    fn from_f64(x: f64) -> Self;
    fn to_f64(&self) -> f64;
    fn pi() -> Self;
    fn sqrt(&self) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn atan2(&self, x: &Self) -> Self;

    fn from_i64(n: i64) -> Self {
        Self::from_f64(n as f64)
    }

    fn abs(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }
}

impl Real for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn pi() -> Self {
        std::f64::consts::PI
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn ln(&self) -> Self {
        f64::ln(*self)
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn atan2(&self, x: &Self) -> Self {
        f64::atan2(*self, *x)
    }
}

/// Working precision of [`Xf`] in bits.
pub const XF_BITS: usize = 128;
const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constant cache"));
}

fn with_consts<R>(f: impl FnOnce(&mut Consts) -> R) -> R {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

/// A 128-bit binary float.
#[derive(Clone)]
pub struct Xf(pub BigFloat);

impl Xf {
    fn wrap(b: BigFloat) -> Self {
        Xf(b)
    }
}

impl fmt::Debug for Xf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Xf({:e})", self.to_f64())
    }
}

impl PartialEq for Xf {
    fn eq(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}

impl PartialOrd for Xf {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.partial_cmp(&other.0)
    }
}

macro_rules! xf_binop {
    ($tr:ident, $f:ident, $m:ident) => {
        impl $tr for Xf {
            type Output = Xf;
            fn $f(self, rhs: Xf) -> Xf {
                Xf::wrap(self.0.$m(&rhs.0, XF_BITS, RM))
            }
        }
        impl<'a> $tr<&'a Xf> for &'a Xf {
            type Output = Xf;
            fn $f(self, rhs: &'a Xf) -> Xf {
                Xf::wrap(self.0.$m(&rhs.0, XF_BITS, RM))
            }
        }
    };
}

xf_binop!(Add, add, add);
xf_binop!(Sub, sub, sub);
xf_binop!(Mul, mul, mul);
xf_binop!(Div, div, div);

impl Rem for Xf {
    type Output = Xf;
    fn rem(self, rhs: Xf) -> Xf {
        Xf::wrap(self.0.rem(&rhs.0))
    }
}

impl Neg for Xf {
    type Output = Xf;
    fn neg(self) -> Xf {
        Xf::wrap(self.0.neg())
    }
}

impl Zero for Xf {
    fn zero() -> Self {
        Xf::wrap(BigFloat::from_f64(0.0, XF_BITS))
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

impl One for Xf {
    fn one() -> Self {
        Xf::wrap(BigFloat::from_f64(1.0, XF_BITS))
    }
}

impl Num for Xf {
    type FromStrRadixErr = String;
    fn from_str_radix(s: &str, radix: u32) -> std::result::Result<Self, String> {
        let rdx = match radix {
            2 => astro_float::Radix::Bin,
            8 => astro_float::Radix::Oct,
            10 => astro_float::Radix::Dec,
            16 => astro_float::Radix::Hex,
            _ => return Err(format!("unsupported radix {radix}")),
        };
        let v = with_consts(|cc| BigFloat::parse(s, rdx, XF_BITS, RM, cc));
        if v.is_nan() {
            Err(format!("cannot parse {s:?}"))
        } else {
            Ok(Xf(v))
        }
    }
}

impl Real for Xf {
    fn from_f64(x: f64) -> Self {
        Xf::wrap(BigFloat::from_f64(x, XF_BITS))
    }

    fn from_i64(n: i64) -> Self {
        Xf::wrap(BigFloat::from_i64(n, XF_BITS))
    }

    fn to_f64(&self) -> f64 {
        if self.0.is_zero() {
            return 0.0;
        }
        if self.0.is_nan() {
            return f64::NAN;
        }
        if self.0.is_inf() {
            return if self.0.is_inf_pos() { f64::INFINITY } else { f64::NEG_INFINITY };
        }
        let (m, _, s, e, _) = self.0.as_raw_parts().expect("finite value");
        let top = *m.last().expect("non-empty mantissa") as f64 / 2f64.powi(64);
        let next = if m.len() >= 2 { m[m.len() - 2] as f64 / 2f64.powi(128) } else { 0.0 };
        let v = (top + next) * 2f64.powi(e / 2) * 2f64.powi(e - e / 2);
        if s == Sign::Neg {
            -v
        } else {
            v
        }
    }

    fn pi() -> Self {
        Xf::wrap(with_consts(|cc| cc.pi(XF_BITS, RM)))
    }
    fn sqrt(&self) -> Self {
        Xf::wrap(self.0.sqrt(XF_BITS, RM))
    }
    fn exp(&self) -> Self {
        Xf::wrap(with_consts(|cc| self.0.exp(XF_BITS, RM, cc)))
    }
    fn ln(&self) -> Self {
        Xf::wrap(with_consts(|cc| self.0.ln(XF_BITS, RM, cc)))
    }
    fn sin(&self) -> Self {
        Xf::wrap(with_consts(|cc| self.0.sin(XF_BITS, RM, cc)))
    }
    fn cos(&self) -> Self {
        Xf::wrap(with_consts(|cc| self.0.cos(XF_BITS, RM, cc)))
    }

    fn atan2(&self, x: &Self) -> Self {
        let zero = Xf::zero();
        if x.is_zero() {
            let half = Xf::pi() / Xf::from_f64(2.0);
            return match self.partial_cmp(&zero) {
                Some(Ordering::Less) => -half,
                Some(Ordering::Greater) => half,
                _ => zero,
            };
        }
        let a = Xf::wrap(with_consts(|cc| (self / x).0.atan(XF_BITS, RM, cc)));
        if *x > zero {
            a
        } else if *self < zero {
            a - Xf::pi()
        } else {
            a + Xf::pi()
        }
    }
}

pub fn c_from<T: Real>(z: Complex<f64>) -> Complex<T> {
    Complex::new(T::from_f64(z.re), T::from_f64(z.im))
}

pub fn c_to_f64<T: Real>(z: &Complex<T>) -> Complex<f64> {
    Complex::new(z.re.to_f64(), z.im.to_f64())
}

/// `e^{iθ}`.
pub fn cis<T: Real>(theta: &T) -> Complex<T> {
    Complex::new(theta.cos(), theta.sin())
}

pub fn cexp<T: Real>(z: &Complex<T>) -> Complex<T> {
    let r = z.re.exp();
    Complex::new(r.clone() * z.im.cos(), r * z.im.sin())
}

/// Principal logarithm.
pub fn cln<T: Real>(z: &Complex<T>) -> Complex<T> {
    let m = (z.re.clone() * z.re.clone() + z.im.clone() * z.im.clone()).sqrt();
    Complex::new(m.ln(), z.im.atan2(&z.re))
}

pub fn cabs<T: Real>(z: &Complex<T>) -> T {
    (z.re.clone() * z.re.clone() + z.im.clone() * z.im.clone()).sqrt()
}

/// `z^n` for any integer `n` by repeated squaring.
pub fn cpowi<T: Real>(z: &Complex<T>, n: i64) -> Complex<T> {
    let mut base = if n < 0 { Complex::<T>::one() / z.clone() } else { z.clone() };
    let mut e = n.unsigned_abs();
    let mut acc = Complex::<T>::one();
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base.clone();
        }
        e >>= 1;
        if e > 0 {
            base = base.clone() * base;
        }
    }
    acc
}
