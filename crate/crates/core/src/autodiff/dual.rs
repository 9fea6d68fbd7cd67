//! First- and second-order forward-mode dual numbers.
//!
//! Model and transcription code is written once, generic over [`Scalar`],
//! and instantiated with `f64` for plain evaluation, [`Dual`] for
//! gradients/Jacobians and [`HyperDual`] for Hessians. Seed directions are
//! carried in fixed-size arrays so arithmetic stays allocation-free.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

/// Number of seed directions carried by one dual-number pass.
///
/// Large enough that one collocation-point group (states + algebraic +
/// controls of the reference configuration) fits in a single pass; larger
/// inputs are strip-mined by the drivers in [`crate::autodiff::deriv`].
pub const CHUNK: usize = 20;

/// Scalar type over which the model equations are written.
///
/// Implemented by `f64`, [`Dual`], [`HyperDual`] and the sparsity tracer.
/// Only smooth primitives are exposed; the model layer must stay
/// differentiable everywhere in its admissible box.
pub trait Scalar:
    Copy
    + Clone
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
    + AddAssign<Self>
    + SubAssign<Self>
{
    fn constant(c: f64) -> Self;
    /// Real part (the plain value).
    fn val(&self) -> f64;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn ln_1p(self) -> Self;
    fn sqrt(self) -> Self;
    fn powi(self, n: i32) -> Self;
    /// Power with a constant (non-differentiated) exponent.
    fn powf(self, p: f64) -> Self;
    fn recip(self) -> Self;
}

impl Scalar for f64 {
    #[inline]
    fn constant(c: f64) -> Self {
        c
    }
    #[inline]
    fn val(&self) -> f64 {
        *self
    }
    #[inline]
    fn exp(self) -> Self {
        f64::exp(self)
    }
    #[inline]
    fn ln(self) -> Self {
        f64::ln(self)
    }
    #[inline]
    fn ln_1p(self) -> Self {
        f64::ln_1p(self)
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    #[inline]
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
    #[inline]
    fn powf(self, p: f64) -> Self {
        f64::powf(self, p)
    }
    #[inline]
    fn recip(self) -> Self {
        1.0 / self
    }
}

/// First-order dual number with `N` simultaneous seed directions.
#[derive(Copy, Clone, Debug)]
pub struct Dual<const N: usize> {
    pub re: f64,
    pub eps: [f64; N],
}

impl<const N: usize> Dual<N> {
    #[inline]
    pub fn new(re: f64) -> Self {
        Dual { re, eps: [0.0; N] }
    }

    /// Variable seeded with a unit derivative in direction `dir`.
    #[inline]
    pub fn seeded(re: f64, dir: usize) -> Self {
        let mut d = Dual::new(re);
        d.eps[dir] = 1.0;
        d
    }

    /// Chain rule for a univariate function: `f(self)` with value `f` and
    /// derivative `fp` evaluated at `self.re`.
    #[inline]
    fn chain(self, f: f64, fp: f64) -> Self {
        let mut out = Dual { re: f, eps: self.eps };
        for e in out.eps.iter_mut() {
            *e *= fp;
        }
        out
    }
}

impl<const N: usize> Add for Dual<N> {
    type Output = Self;
    #[inline]
    fn add(mut self, rhs: Self) -> Self {
        self.re += rhs.re;
        for i in 0..N {
            self.eps[i] += rhs.eps[i];
        }
        self
    }
}

impl<const N: usize> Sub for Dual<N> {
    type Output = Self;
    #[inline]
    fn sub(mut self, rhs: Self) -> Self {
        self.re -= rhs.re;
        for i in 0..N {
            self.eps[i] -= rhs.eps[i];
        }
        self
    }
}

impl<const N: usize> Mul for Dual<N> {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        let mut out = Dual::new(self.re * rhs.re);
        for i in 0..N {
            out.eps[i] = self.eps[i] * rhs.re + self.re * rhs.eps[i];
        }
        out
    }
}

impl<const N: usize> Div for Dual<N> {
    type Output = Self;
    #[inline]
    fn div(self, rhs: Self) -> Self {
        let q = self.re / rhs.re;
        let inv = 1.0 / rhs.re;
        let mut out = Dual::new(q);
        for i in 0..N {
            out.eps[i] = (self.eps[i] - q * rhs.eps[i]) * inv;
        }
        out
    }
}

impl<const N: usize> Neg for Dual<N> {
    type Output = Self;
    #[inline]
    fn neg(mut self) -> Self {
        self.re = -self.re;
        for e in self.eps.iter_mut() {
            *e = -*e;
        }
        self
    }
}

impl<const N: usize> AddAssign for Dual<N> {
    #[inline]
    fn add_assign(&mut self, rhs: Self) {
        self.re += rhs.re;
        for i in 0..N {
            self.eps[i] += rhs.eps[i];
        }
    }
}

impl<const N: usize> SubAssign for Dual<N> {
    #[inline]
    fn sub_assign(&mut self, rhs: Self) {
        self.re -= rhs.re;
        for i in 0..N {
            self.eps[i] -= rhs.eps[i];
        }
    }
}

impl<const N: usize> Add<f64> for Dual<N> {
    type Output = Self;
    #[inline]
    fn add(mut self, rhs: f64) -> Self {
        self.re += rhs;
        self
    }
}

impl<const N: usize> Sub<f64> for Dual<N> {
    type Output = Self;
    #[inline]
    fn sub(mut self, rhs: f64) -> Self {
        self.re -= rhs;
        self
    }
}

impl<const N: usize> Mul<f64> for Dual<N> {
    type Output = Self;
    #[inline]
    fn mul(mut self, rhs: f64) -> Self {
        self.re *= rhs;
        for e in self.eps.iter_mut() {
            *e *= rhs;
        }
        self
    }
}

impl<const N: usize> Div<f64> for Dual<N> {
    type Output = Self;
    #[inline]
    fn div(self, rhs: f64) -> Self {
        self * (1.0 / rhs)
    }
}

impl<const N: usize> Add<Dual<N>> for f64 {
    type Output = Dual<N>;
    #[inline]
    fn add(self, rhs: Dual<N>) -> Dual<N> {
        rhs + self
    }
}

impl<const N: usize> Sub<Dual<N>> for f64 {
    type Output = Dual<N>;
    #[inline]
    fn sub(self, rhs: Dual<N>) -> Dual<N> {
        -rhs + self
    }
}

impl<const N: usize> Mul<Dual<N>> for f64 {
    type Output = Dual<N>;
    #[inline]
    fn mul(self, rhs: Dual<N>) -> Dual<N> {
        rhs * self
    }
}

impl<const N: usize> Div<Dual<N>> for f64 {
    type Output = Dual<N>;
    #[inline]
    fn div(self, rhs: Dual<N>) -> Dual<N> {
        Dual::new(self) / rhs
    }
}

impl<const N: usize> Scalar for Dual<N> {
    #[inline]
    fn constant(c: f64) -> Self {
        Dual::new(c)
    }
    #[inline]
    fn val(&self) -> f64 {
        self.re
    }
    #[inline]
    fn exp(self) -> Self {
        let e = self.re.exp();
        self.chain(e, e)
    }
    #[inline]
    fn ln(self) -> Self {
        self.chain(self.re.ln(), 1.0 / self.re)
    }
    #[inline]
    fn ln_1p(self) -> Self {
        self.chain(self.re.ln_1p(), 1.0 / (1.0 + self.re))
    }
    #[inline]
    fn sqrt(self) -> Self {
        let s = self.re.sqrt();
        self.chain(s, 0.5 / s)
    }
    #[inline]
    fn powi(self, n: i32) -> Self {
        self.chain(self.re.powi(n), n as f64 * self.re.powi(n - 1))
    }
    #[inline]
    fn powf(self, p: f64) -> Self {
        self.chain(self.re.powf(p), p * self.re.powf(p - 1.0))
    }
    #[inline]
    fn recip(self) -> Self {
        let inv = 1.0 / self.re;
        self.chain(inv, -inv * inv)
    }
}

/// Second-order dual number: value, gradient and the full (symmetric)
/// matrix of second-order coefficients over `N` seed directions.
#[derive(Copy, Clone, Debug)]
pub struct HyperDual<const N: usize> {
    pub re: f64,
    pub d: [f64; N],
    pub dd: [[f64; N]; N],
}

impl<const N: usize> HyperDual<N> {
    #[inline]
    pub fn new(re: f64) -> Self {
        HyperDual { re, d: [0.0; N], dd: [[0.0; N]; N] }
    }

    #[inline]
    pub fn seeded(re: f64, dir: usize) -> Self {
        let mut h = HyperDual::new(re);
        h.d[dir] = 1.0;
        h
    }

    /// Chain rule for a univariate function with value `f`, first
    /// derivative `fp` and second derivative `fpp` at `self.re`.
    fn chain2(&self, f: f64, fp: f64, fpp: f64) -> Self {
        let mut out = HyperDual::new(f);
        for i in 0..N {
            out.d[i] = fp * self.d[i];
        }
        for i in 0..N {
            for j in 0..N {
                out.dd[i][j] = fpp * self.d[i] * self.d[j] + fp * self.dd[i][j];
            }
        }
        out
    }
}

impl<const N: usize> Add for HyperDual<N> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        self.re += rhs.re;
        for i in 0..N {
            self.d[i] += rhs.d[i];
        }
        for i in 0..N {
            for j in 0..N {
                self.dd[i][j] += rhs.dd[i][j];
            }
        }
        self
    }
}

impl<const N: usize> Sub for HyperDual<N> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        self.re -= rhs.re;
        for i in 0..N {
            self.d[i] -= rhs.d[i];
        }
        for i in 0..N {
            for j in 0..N {
                self.dd[i][j] -= rhs.dd[i][j];
            }
        }
        self
    }
}

impl<const N: usize> Mul for HyperDual<N> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut out = HyperDual::new(self.re * rhs.re);
        for i in 0..N {
            out.d[i] = self.d[i] * rhs.re + self.re * rhs.d[i];
        }
        for i in 0..N {
            for j in 0..N {
                out.dd[i][j] = self.dd[i][j] * rhs.re
                    + self.d[i] * rhs.d[j]
                    + self.d[j] * rhs.d[i]
                    + self.re * rhs.dd[i][j];
            }
        }
        out
    }
}

impl<const N: usize> Div for HyperDual<N> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        self * rhs.recip()
    }
}

impl<const N: usize> Neg for HyperDual<N> {
    type Output = Self;
    fn neg(mut self) -> Self {
        self.re = -self.re;
        for i in 0..N {
            self.d[i] = -self.d[i];
        }
        for i in 0..N {
            for j in 0..N {
                self.dd[i][j] = -self.dd[i][j];
            }
        }
        self
    }
}

impl<const N: usize> AddAssign for HyperDual<N> {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl<const N: usize> SubAssign for HyperDual<N> {
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl<const N: usize> Add<f64> for HyperDual<N> {
    type Output = Self;
    fn add(mut self, rhs: f64) -> Self {
        self.re += rhs;
        self
    }
}

impl<const N: usize> Sub<f64> for HyperDual<N> {
    type Output = Self;
    fn sub(mut self, rhs: f64) -> Self {
        self.re -= rhs;
        self
    }
}

impl<const N: usize> Mul<f64> for HyperDual<N> {
    type Output = Self;
    fn mul(mut self, rhs: f64) -> Self {
        self.re *= rhs;
        for i in 0..N {
            self.d[i] *= rhs;
        }
        for i in 0..N {
            for j in 0..N {
                self.dd[i][j] *= rhs;
            }
        }
        self
    }
}

impl<const N: usize> Div<f64> for HyperDual<N> {
    type Output = Self;
    fn div(self, rhs: f64) -> Self {
        self * (1.0 / rhs)
    }
}

impl<const N: usize> Add<HyperDual<N>> for f64 {
    type Output = HyperDual<N>;
    fn add(self, rhs: HyperDual<N>) -> HyperDual<N> {
        rhs + self
    }
}

impl<const N: usize> Sub<HyperDual<N>> for f64 {
    type Output = HyperDual<N>;
    fn sub(self, rhs: HyperDual<N>) -> HyperDual<N> {
        -rhs + self
    }
}

impl<const N: usize> Mul<HyperDual<N>> for f64 {
    type Output = HyperDual<N>;
    fn mul(self, rhs: HyperDual<N>) -> HyperDual<N> {
        rhs * self
    }
}

impl<const N: usize> Div<HyperDual<N>> for f64 {
    type Output = HyperDual<N>;
    fn div(self, rhs: HyperDual<N>) -> HyperDual<N> {
        HyperDual::new(self) / rhs
    }
}

impl<const N: usize> Scalar for HyperDual<N> {
    fn constant(c: f64) -> Self {
        HyperDual::new(c)
    }
    fn val(&self) -> f64 {
        self.re
    }
    fn exp(self) -> Self {
        let e = self.re.exp();
        self.chain2(e, e, e)
    }
    fn ln(self) -> Self {
        let inv = 1.0 / self.re;
        self.chain2(self.re.ln(), inv, -inv * inv)
    }
    fn ln_1p(self) -> Self {
        let inv = 1.0 / (1.0 + self.re);
        self.chain2(self.re.ln_1p(), inv, -inv * inv)
    }
    fn sqrt(self) -> Self {
        let s = self.re.sqrt();
        self.chain2(s, 0.5 / s, -0.25 / (s * s * s))
    }
    fn powi(self, n: i32) -> Self {
        let nf = n as f64;
        self.chain2(
            self.re.powi(n),
            nf * self.re.powi(n - 1),
            nf * (nf - 1.0) * self.re.powi(n - 2),
        )
    }
    fn powf(self, p: f64) -> Self {
        self.chain2(
            self.re.powf(p),
            p * self.re.powf(p - 1.0),
            p * (p - 1.0) * self.re.powf(p - 2.0),
        )
    }
    fn recip(self) -> Self {
        let inv = 1.0 / self.re;
        self.chain2(inv, -inv * inv, 2.0 * inv * inv * inv)
    }
}
