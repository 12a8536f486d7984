//! Checked signed integers shared by the arithmetic modules.

use std::fmt::{Debug, Display};
use std::hash::Hash;
use std::str::FromStr;

use num_traits::{CheckedNeg, PrimInt, Signed};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("arithmetic overflow")]
pub struct Overflow;

/// Signed machine integers usable as coordinates.
pub trait Int:
    PrimInt + Signed + CheckedNeg + Hash + Debug + Display + FromStr + Send + Sync + 'static
{
}

impl<T> Int for T where
    T: PrimInt + Signed + CheckedNeg + Hash + Debug + Display + FromStr + Send + Sync + 'static
{
}

pub(crate) fn lit<T: Int>(v: i32) -> T {
    T::from(v).expect("small literal fits every supported width")
}

pub(crate) fn add<T: Int>(a: T, b: T) -> Result<T, Overflow> {
    a.checked_add(&b).ok_or(Overflow)
}

pub(crate) fn sub<T: Int>(a: T, b: T) -> Result<T, Overflow> {
    a.checked_sub(&b).ok_or(Overflow)
}

pub(crate) fn mul<T: Int>(a: T, b: T) -> Result<T, Overflow> {
    a.checked_mul(&b).ok_or(Overflow)
}

pub(crate) fn neg<T: Int>(a: T) -> Result<T, Overflow> {
    a.checked_neg().ok_or(Overflow)
}

pub(crate) fn abs<T: Int>(a: T) -> Result<T, Overflow> {
    if a < T::zero() {
        neg(a)
    } else {
        Ok(a)
    }
}

/// `a*d - b*c`
pub(crate) fn det2<T: Int>(a: T, b: T, c: T, d: T) -> Result<T, Overflow> {
    sub(mul(a, d)?, mul(b, c)?)
}

pub(crate) fn gcd<T: Int>(a: T, b: T) -> Result<T, Overflow> {
    let (mut a, mut b) = (abs(a)?, abs(b)?);
    while b != T::zero() {
        let r = a % b;
        a = b;
        b = r;
    }
    Ok(a)
}

/// Returns `(g, x, y)` with `a*x + b*y = g = gcd(a, b) >= 0`.
pub(crate) fn ext_gcd<T: Int>(a: T, b: T) -> Result<(T, T, T), Overflow> {
    let (mut r0, mut r1) = (a, b);
    let (mut s0, mut s1) = (T::one(), T::zero());
    let (mut t0, mut t1) = (T::zero(), T::one());
    while r1 != T::zero() {
        let q = r0 / r1;
        (r0, r1) = (r1, sub(r0, mul(q, r1)?)?);
        (s0, s1) = (s1, sub(s0, mul(q, s1)?)?);
        (t0, t1) = (t1, sub(t0, mul(q, t1)?)?);
    }
    if r0 < T::zero() {
        Ok((neg(r0)?, neg(s0)?, neg(t0)?))
    } else {
        Ok((r0, s0, t0))
    }
}

pub(crate) fn div_floor<T: Int>(a: T, b: T) -> T {
    let q = a / b;
    if (a % b != T::zero()) && ((a < T::zero()) != (b < T::zero())) {
        q - T::one()
    } else {
        q
    }
}

pub(crate) fn div_ceil<T: Int>(a: T, b: T) -> T {
    let q = a / b;
    if (a % b != T::zero()) && ((a < T::zero()) == (b < T::zero())) {
        q + T::one()
    } else {
        q
    }
}

pub(crate) fn to_i128<T: Int>(a: T) -> i128 {
    a.to_i128().unwrap_or(i128::MAX)
}
