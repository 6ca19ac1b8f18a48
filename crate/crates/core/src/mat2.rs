//! 2×2 real matrices of determinant one, acting on the upper half-plane by
//! Möbius transformations. Generic over the scalar so that holonomy can be
//! assembled in double-double precision.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

pub use twofloat::TwoFloat;

pub trait Real:
    Copy
    + Debug
    + PartialOrd
    + From<f64>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn recip(self) -> Self;
    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn cosh(self) -> Self;
    fn abs(self) -> Self;
    fn to_f64(self) -> f64;

    fn zero() -> Self {
        Self::from(0.0)
    }

    fn one() -> Self {
        Self::from(1.0)
    }

    fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn signum(self) -> f64 {
        if self < Self::zero() {
            -1.0
        } else {
            1.0
        }
    }
}

impl Real for f64 {
    fn recip(self) -> f64 {
        1.0 / self
    }
    fn sqrt(self) -> f64 {
        f64::sqrt(self)
    }
    fn exp(self) -> f64 {
        f64::exp(self)
    }
    fn cosh(self) -> f64 {
        f64::cosh(self)
    }
    fn abs(self) -> f64 {
        f64::abs(self)
    }
    fn to_f64(self) -> f64 {
        self
    }
}

impl Real for TwoFloat {
    /// The crate's division is only accurate to about `f64` precision, so
    /// refine its reciprocal with one Newton step.
    fn recip(self) -> TwoFloat {
        let r = TwoFloat::from(1.0) / self;
        r + r * (1.0 - self * r)
    }
    fn sqrt(self) -> TwoFloat {
        TwoFloat::sqrt(self)
    }
    fn exp(self) -> TwoFloat {
        TwoFloat::exp(self)
    }
    fn cosh(self) -> TwoFloat {
        TwoFloat::cosh(self)
    }
    fn abs(self) -> TwoFloat {
        TwoFloat::abs(&self)
    }
    fn to_f64(self) -> f64 {
        self.hi() + self.lo()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2<T = f64> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub d: T,
}

impl Mat2<f64> {
    pub const IDENTITY: Mat2 = Mat2::new(1.0, 0.0, 0.0, 1.0);

    /// Rotation by π about `i`, `z ↦ -1/z`. Swaps `0` and `∞`.
    pub const HALF_TURN: Mat2 = Mat2::new(0.0, -1.0, 1.0, 0.0);
}

impl<T> Mat2<T> {
    pub const fn new(a: T, b: T, c: T, d: T) -> Mat2<T> {
        Mat2 { a, b, c, d }
    }
}

impl<T: Real> Mat2<T> {
    pub fn identity() -> Mat2<T> {
        Mat2::new(T::one(), T::zero(), T::zero(), T::one())
    }

    pub fn half_turn() -> Mat2<T> {
        Mat2::new(T::zero(), -T::one(), T::one(), T::zero())
    }

    pub fn from_f64(m: &Mat2) -> Mat2<T> {
        Mat2::new(T::from(m.a), T::from(m.b), T::from(m.c), T::from(m.d))
    }

    pub fn to_f64(&self) -> Mat2 {
        Mat2::new(
            self.a.to_f64(),
            self.b.to_f64(),
            self.c.to_f64(),
            self.d.to_f64(),
        )
    }

    pub fn diag(x: T) -> Mat2<T> {
        Mat2::new(x, T::zero(), T::zero(), x.recip())
    }

    /// Translation by hyperbolic distance `t` along the imaginary axis.
    pub fn axial(t: f64) -> Mat2<T> {
        Mat2::diag(T::from(0.5 * t).exp())
    }

    pub fn trace(&self) -> T {
        self.a + self.d
    }

    pub fn det(&self) -> T {
        self.a * self.d - self.b * self.c
    }

    /// Inverse assuming unit determinant.
    pub fn inv(&self) -> Mat2<T> {
        Mat2::new(self.d, -self.b, -self.c, self.a)
    }

    pub fn scale(&self, s: T) -> Mat2<T> {
        Mat2::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    pub fn neg(&self) -> Mat2<T> {
        Mat2::new(-self.a, -self.b, -self.c, -self.d)
    }

    pub fn max_abs(&self) -> f64 {
        self.a
            .abs()
            .max(self.b.abs())
            .max(self.c.abs())
            .max(self.d.abs())
            .to_f64()
    }

    /// Distance to `other` in PSL(2,ℝ): the smaller of `‖self − other‖` and `‖self + other‖`.
    pub fn projective_distance(&self, other: &Mat2<T>) -> f64 {
        let minus = Mat2::new(
            self.a - other.a,
            self.b - other.b,
            self.c - other.c,
            self.d - other.d,
        )
        .max_abs();
        let plus = Mat2::new(
            self.a + other.a,
            self.b + other.b,
            self.c + other.c,
            self.d + other.d,
        )
        .max_abs();
        minus.min(plus)
    }

    /// Rescale to determinant one. Requires a positive determinant.
    pub fn normalized(&self) -> Mat2<T> {
        self.scale(self.det().sqrt().recip())
    }

    /// Image of the projective point `(x : y)`.
    pub fn apply_vec(&self, v: [T; 2]) -> [T; 2] {
        [self.a * v[0] + self.b * v[1], self.c * v[0] + self.d * v[1]]
    }

    /// Eigenvectors `(attracting, repelling)` of a hyperbolic element, as
    /// projective points on the boundary circle.
    pub fn hyperbolic_fixed_points(&self) -> ([T; 2], [T; 2]) {
        let t = self.trace();
        let disc = (t * t - T::from(4.0)).max(T::zero()).sqrt();
        // Larger-magnitude eigenvalue first; avoid cancellation in the smaller one.
        let big = T::from(0.5) * (t + T::from(t.signum()) * disc);
        let small = big.recip();
        (self.eigenvector(big), self.eigenvector(small))
    }

    /// Fixed point of a parabolic element.
    pub fn parabolic_fixed_point(&self) -> [T; 2] {
        self.eigenvector(T::from(0.5) * self.trace())
    }

    fn eigenvector(&self, lambda: T) -> [T; 2] {
        // Rows of (M − λI) are orthogonal to the eigenvector; use the better-conditioned row.
        let r1 = [self.a - lambda, self.b];
        let r2 = [self.c, self.d - lambda];
        let n1 = r1[0].abs() + r1[1].abs();
        let n2 = r2[0].abs() + r2[1].abs();
        let v = if n1 >= n2 {
            [r1[1], -r1[0]]
        } else {
            [r2[1], -r2[0]]
        };
        let n = (v[0] * v[0] + v[1] * v[1]).sqrt().recip();
        [v[0] * n, v[1] * n]
    }
}

impl<T: Real> Mul for Mat2<T> {
    type Output = Mat2<T>;
    fn mul(self, o: Mat2<T>) -> Mat2<T> {
        Mat2::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }
}

impl<T: Real> Mul for &Mat2<T> {
    type Output = Mat2<T>;
    fn mul(self, o: &Mat2<T>) -> Mat2<T> {
        *self * *o
    }
}

/// Hyperbolic translation length of an element from its trace, `2·arccosh(|tr|/2)`.
pub fn trace_to_length(trace: f64) -> f64 {
    2.0 * (0.5 * trace.abs()).acosh()
}

/// [`trace_to_length`] for an extended-precision trace. The cancellation in
/// `(t/2)² − 1` happens before rounding to `f64`.
pub fn trace_to_length_dd(trace: TwoFloat) -> f64 {
    let h = 0.5 * trace.abs();
    let s = (h * h - 1.0).to_f64().max(0.0).sqrt();
    2.0 * s.asinh()
}

/// Inverse of [`trace_to_length`] with positive sign.
pub fn length_to_trace(length: f64) -> f64 {
    2.0 * (0.5 * length).cosh()
}
