//! Slopes on a torus, the extended-rational parametrization, and the
//! action of GL(2,Z) on slopes.
//!
//! A slope is stored as a primitive pair `(p, q)` meaning `p*mu + q*lambda`,
//! with the sign fixed so that `q > 0`, or `(p, q) = (1, 0)`. Under this
//! convention the rational `p/q` and the slope `(p, q)` are literally the
//! same pair, and infinity is the meridian.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::int::{self, Int, Overflow};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SlopeError {
    #[error("(0,0) does not define a slope")]
    ZeroVector,
    #[error("({p},{q}) is not primitive; reduce it first")]
    NotPrimitive { p: i128, q: i128 },
    #[error("matrix has determinant {det}, expected +1 or -1")]
    NotUnimodular { det: i128 },
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("cannot parse `{0}` as p/q, p or inf")]
    Parse(String),
    #[error(transparent)]
    Overflow(#[from] Overflow),
}

/// A primitive pair `(p, q)` modulo sign, in canonical form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Slope<T> {
    p: T,
    q: T,
}

impl<T: Int> Slope<T> {
    pub fn new(p: T, q: T) -> Result<Self, SlopeError> {
        make_slope(p, q)
    }

    pub fn meridian() -> Self {
        Slope {
            p: T::one(),
            q: T::zero(),
        }
    }

    pub fn longitude() -> Self {
        Slope {
            p: T::zero(),
            q: T::one(),
        }
    }

    pub fn p(&self) -> T {
        self.p
    }

    pub fn q(&self) -> T {
        self.q
    }

    pub fn delta(&self, other: &Self) -> Result<T, Overflow> {
        intersection_number(self, other)
    }
}

impl<T: Int> fmt::Display for Slope<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.p, self.q)
    }
}

/// `p/q` in lowest terms with `q >= 0`; `1/0` is infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ExtRational<T> {
    num: T,
    den: T,
}

impl<T: Int> ExtRational<T> {
    /// Reduces `num/den`; any `x/0` with `x != 0` is infinity.
    pub fn new(num: T, den: T) -> Result<Self, SlopeError> {
        if num.is_zero() && den.is_zero() {
            return Err(SlopeError::ZeroVector);
        }
        if den.is_zero() {
            return Ok(Self::infinity());
        }
        let g = int::gcd(num, den)?;
        let (mut n, mut d) = (num / g, den / g);
        if d < T::zero() {
            n = int::neg(n)?;
            d = int::neg(d)?;
        }
        Ok(ExtRational { num: n, den: d })
    }

    pub fn integer(n: T) -> Self {
        ExtRational {
            num: n,
            den: T::one(),
        }
    }

    pub fn infinity() -> Self {
        ExtRational {
            num: T::one(),
            den: T::zero(),
        }
    }

    pub fn numerator(&self) -> T {
        self.num
    }

    pub fn denominator(&self) -> T {
        self.den
    }

    pub fn is_infinite(&self) -> bool {
        self.den.is_zero()
    }

    pub fn is_integral(&self) -> bool {
        self.den == T::one()
    }

    /// Denominator exactly 2.
    pub fn is_half_integral(&self) -> bool {
        self.den == int::lit(2)
    }

    /// Negation; infinity is fixed.
    pub fn negate(&self) -> Result<Self, Overflow> {
        if self.is_infinite() {
            return Ok(*self);
        }
        Ok(ExtRational {
            num: int::neg(self.num)?,
            den: self.den,
        })
    }

    pub fn to_slope(&self) -> Slope<T> {
        from_rational(self)
    }
}

fn cmp_fraction<T: Int>(a: T, b: T, c: T, d: T) -> Ordering {
    match (b.is_zero(), d.is_zero()) {
        (true, true) => return Ordering::Equal,
        (true, false) => return Ordering::Greater,
        (false, true) => return Ordering::Less,
        _ => {}
    }
    let fa = int::div_floor(a, b);
    let fc = int::div_floor(c, d);
    if fa != fc {
        return fa.cmp(&fc);
    }
    let rem = |x: T, y: T| {
        let r = x % y;
        if r < T::zero() {
            r + y
        } else {
            r
        }
    };
    let (ra, rc) = (rem(a, b), rem(c, d));
    match (ra.is_zero(), rc.is_zero()) {
        (true, true) => Ordering::Equal,
        (true, false) => Ordering::Less,
        (false, true) => Ordering::Greater,
        _ => cmp_fraction(d, rc, b, ra),
    }
}

impl<T: Int> Ord for ExtRational<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        cmp_fraction(self.num, self.den, other.num, other.den)
    }
}

impl<T: Int> PartialOrd for ExtRational<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Int> fmt::Display for ExtRational<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            write!(f, "inf")
        } else if self.den == T::one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl<T: Int> FromStr for ExtRational<T> {
    type Err = SlopeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if t == "inf" || t == "∞" {
            return Ok(Self::infinity());
        }
        let bad = || SlopeError::Parse(s.to_string());
        let t = t.replace('−', "-");
        let (n, d) = match t.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (t.as_str(), "1"),
        };
        let n: T = n.parse().map_err(|_| bad())?;
        let d: T = d.parse().map_err(|_| bad())?;
        Self::new(n, d)
    }
}

impl<T: Int> Serialize for ExtRational<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

struct ExtRationalVisitor<T>(std::marker::PhantomData<T>);

impl<T: Int> Visitor<'_> for ExtRationalVisitor<T> {
    type Value = ExtRational<T>;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a slope string such as \"37/2\", \"-4\" or \"inf\"")
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<Self::Value, E> {
        v.parse().map_err(E::custom)
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Self::Value, E> {
        T::from(v)
            .map(ExtRational::integer)
            .ok_or_else(|| E::custom("integer out of range"))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Self::Value, E> {
        T::from(v)
            .map(ExtRational::integer)
            .ok_or_else(|| E::custom("integer out of range"))
    }
}

impl<'de, T: Int> Deserialize<'de> for ExtRational<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        deserializer.deserialize_any(ExtRationalVisitor(std::marker::PhantomData))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn apply<T: Int>(self, r: &ExtRational<T>) -> Result<ExtRational<T>, Overflow> {
        match self {
            Sign::Plus => Ok(*r),
            Sign::Minus => r.negate(),
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+}", self.value())
    }
}

impl Serialize for Sign {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_i8(self.value())
    }
}

impl<'de> Deserialize<'de> for Sign {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        match i8::deserialize(deserializer)? {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            v => Err(de::Error::custom(format!("sign must be 1 or -1, got {v}"))),
        }
    }
}

/// An element of GL(2,Z) acting on column vectors `(p, q)`, stored modulo
/// `-I` (first nonzero entry positive).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct BasisMap<T> {
    m: [[T; 2]; 2],
}

impl<T: Int> BasisMap<T> {
    pub fn new(a: T, b: T, c: T, d: T) -> Result<Self, SlopeError> {
        let det = int::det2(a, b, c, d)?;
        if det != T::one() && det != -T::one() {
            return Err(SlopeError::NotUnimodular {
                det: int::to_i128(det),
            });
        }
        let first = [a, b, c, d].into_iter().find(|x| !x.is_zero());
        let m = if first.is_some_and(|x| x < T::zero()) {
            [
                [int::neg(a)?, int::neg(b)?],
                [int::neg(c)?, int::neg(d)?],
            ]
        } else {
            [[a, b], [c, d]]
        };
        Ok(BasisMap { m })
    }

    pub fn identity() -> Self {
        BasisMap {
            m: [[T::one(), T::zero()], [T::zero(), T::one()]],
        }
    }

    pub fn matrix(&self) -> [[T; 2]; 2] {
        self.m
    }

    pub fn det(&self) -> T {
        // cannot overflow: validated on construction
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn apply(&self, s: &Slope<T>) -> Result<Slope<T>, SlopeError> {
        apply_basis_map(self, s)
    }

    pub fn apply_rational(&self, r: &ExtRational<T>) -> Result<ExtRational<T>, SlopeError> {
        Ok(to_rational(&self.apply(&from_rational(r))?))
    }

    /// `self * other`, i.e. apply `other` first.
    pub fn compose(&self, other: &Self) -> Result<Self, SlopeError> {
        let [[a, b], [c, d]] = self.m;
        let [[e, f], [g, h]] = other.m;
        Self::new(
            int::add(int::mul(a, e)?, int::mul(b, g)?)?,
            int::add(int::mul(a, f)?, int::mul(b, h)?)?,
            int::add(int::mul(c, e)?, int::mul(d, g)?)?,
            int::add(int::mul(c, f)?, int::mul(d, h)?)?,
        )
    }

    pub fn inverse(&self) -> Result<Self, SlopeError> {
        let [[a, b], [c, d]] = self.m;
        // inverse is adj / det and det = +-1; the sign is absorbed by -I
        Self::new(d, int::neg(b)?, int::neg(c)?, a)
    }
}

impl<T: Int> fmt::Display for BasisMap<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [[a, b], [c, d]] = self.m;
        write!(f, "[[{a}, {b}], [{c}, {d}]]")
    }
}

impl<'de, T: Int + Deserialize<'de>> Deserialize<'de> for BasisMap<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let [[a, b], [c, d]] = <[[T; 2]; 2]>::deserialize(deserializer)?;
        BasisMap::new(a, b, c, d).map_err(de::Error::custom)
    }
}

pub fn make_slope<T: Int>(p: T, q: T) -> Result<Slope<T>, SlopeError> {
    if p.is_zero() && q.is_zero() {
        return Err(SlopeError::ZeroVector);
    }
    if int::gcd(p, q)? != T::one() {
        return Err(SlopeError::NotPrimitive {
            p: int::to_i128(p),
            q: int::to_i128(q),
        });
    }
    if q < T::zero() || (q.is_zero() && p < T::zero()) {
        Ok(Slope {
            p: int::neg(p)?,
            q: int::neg(q)?,
        })
    } else {
        Ok(Slope { p, q })
    }
}

/// `|p_a q_b - p_b q_a|`
pub fn intersection_number<T: Int>(a: &Slope<T>, b: &Slope<T>) -> Result<T, Overflow> {
    int::abs(int::det2(a.p, a.q, b.p, b.q)?)
}

pub fn from_rational<T: Int>(r: &ExtRational<T>) -> Slope<T> {
    Slope { p: r.num, q: r.den }
}

pub fn to_rational<T: Int>(s: &Slope<T>) -> ExtRational<T> {
    ExtRational { num: s.p, den: s.q }
}

pub fn apply_basis_map<T: Int>(phi: &BasisMap<T>, s: &Slope<T>) -> Result<Slope<T>, SlopeError> {
    let [[a, b], [c, d]] = phi.m;
    let p = int::add(int::mul(a, s.p)?, int::mul(b, s.q)?)?;
    let q = int::add(int::mul(c, s.p)?, int::mul(d, s.q)?)?;
    make_slope(p, q)
}

/// Completes the primitive vector `v` to a basis `(v, e)` with `det[v, e] = 1`.
fn complete_basis<T: Int>(v: &Slope<T>) -> Result<(T, T), Overflow> {
    let (g, s, t) = int::ext_gcd(v.p, v.q)?;
    debug_assert!(g == T::one());
    // p*s + q*t = 1, and det[(p,q),(x,y)] = p*y - q*x, so take (x,y) = (-t, s)
    Ok((int::neg(t)?, s))
}

/// Adapted coordinates for an ordered pair: `c1 = e1`, `c2 = a*e1 + d*e2`
/// with `d = Delta(c1, c2) > 0`.
struct Adapted<T> {
    e1: (T, T),
    e2: (T, T),
    a: T,
    d: T,
}

fn adapted<T: Int>(c1: &Slope<T>, c2: &Slope<T>) -> Result<Adapted<T>, SlopeError> {
    let e2 = complete_basis(c1)?;
    let (mut p2, mut q2) = (c2.p, c2.q);
    let mut d = int::det2(c1.p, p2, c1.q, q2)?;
    if d < T::zero() {
        p2 = int::neg(p2)?;
        q2 = int::neg(q2)?;
        d = int::neg(d)?;
    }
    if d.is_zero() {
        return Err(SlopeError::PreconditionViolated(
            "the two slopes coincide".into(),
        ));
    }
    // (p2, q2) - d*e2 is a multiple of c1
    let rp = int::sub(p2, int::mul(d, e2.0)?)?;
    let rq = int::sub(q2, int::mul(d, e2.1)?)?;
    let a = if !c1.p.is_zero() { rp / c1.p } else { rq / c1.q };
    Ok(Adapted {
        e1: (c1.p, c1.q),
        e2,
        a,
        d,
    })
}

/// All slopes within distance `dmax` of both `c1` and `c2`.
pub fn enumerate_bounded_distance<T: Int>(
    c1: &Slope<T>,
    c2: &Slope<T>,
    dmax: T,
) -> Result<BTreeSet<Slope<T>>, SlopeError> {
    if dmax <= T::zero() {
        return Err(SlopeError::PreconditionViolated(
            "dmax must be positive".into(),
        ));
    }
    let ad = adapted(c1, c2)?;
    let mut out = BTreeSet::new();
    // s = x*e1 + y*e2 has Delta(s,c1) = |y| and Delta(s,c2) = |x*d - y*a|
    let mut y = T::zero();
    while y <= dmax {
        let ya = int::mul(y, ad.a)?;
        let lo = int::div_ceil(int::sub(ya, dmax)?, ad.d);
        let hi = int::div_floor(int::add(ya, dmax)?, ad.d);
        let mut x = lo;
        while x <= hi {
            let keep = if y.is_zero() {
                x == T::one()
            } else {
                int::gcd(x, y)? == T::one()
            };
            if keep {
                let p = int::add(int::mul(x, ad.e1.0)?, int::mul(y, ad.e2.0)?)?;
                let q = int::add(int::mul(x, ad.e1.1)?, int::mul(y, ad.e2.1)?)?;
                out.insert(make_slope(p, q)?);
            }
            x = x + T::one();
        }
        y = y + T::one();
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaxPair<T> {
    pub first: Slope<T>,
    pub second: Slope<T>,
    pub delta: T,
    pub unique: bool,
}

/// The pair realizing the largest intersection number in `set`, if the set
/// has at least two distinct slopes.
pub fn unique_max_pair<T: Int>(set: &[Slope<T>]) -> Result<Option<MaxPair<T>>, Overflow> {
    let distinct: Vec<Slope<T>> = set.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let mut best: Option<MaxPair<T>> = None;
    for (i, a) in distinct.iter().enumerate() {
        for b in &distinct[i + 1..] {
            let d = intersection_number(a, b)?;
            match &mut best {
                Some(m) if d < m.delta => {}
                Some(m) if d == m.delta => m.unique = false,
                _ => {
                    best = Some(MaxPair {
                        first: *a,
                        second: *b,
                        delta: d,
                        unique: true,
                    })
                }
            }
        }
    }
    Ok(best)
}

/// Basis `(mu, lambda)` with `c1 = [mu]` and `c2 = [mu + 4 lambda]`, returned
/// as the matrix whose columns are `mu` and `lambda`.
fn distance_four_basis<T: Int>(c1: &Slope<T>, c2: &Slope<T>) -> Result<[[T; 2]; 2], SlopeError> {
    let ad = adapted(c1, c2)?;
    if ad.d != int::lit(4) {
        return Err(SlopeError::PreconditionViolated(format!(
            "intersection number of {c1} and {c2} is {}, expected 4",
            ad.d
        )));
    }
    let four = int::lit::<T>(4);
    let r = ad.a % four;
    let r = if r < T::zero() { r + four } else { r };
    let (t, k) = if r == T::one() {
        (T::one(), (ad.a - T::one()) / four)
    } else {
        (-T::one(), int::add(ad.a, T::one())? / four)
    };
    let mu = (int::mul(t, ad.e1.0)?, int::mul(t, ad.e1.1)?);
    let lambda = (
        int::add(int::mul(k, ad.e1.0)?, ad.e2.0)?,
        int::add(int::mul(k, ad.e1.1)?, ad.e2.1)?,
    );
    Ok([[mu.0, lambda.0], [mu.1, lambda.1]])
}

fn mat_mul<T: Int>(x: [[T; 2]; 2], y: [[T; 2]; 2]) -> Result<[[T; 2]; 2], Overflow> {
    let mut out = [[T::zero(); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = int::add(int::mul(x[i][0], y[0][j])?, int::mul(x[i][1], y[1][j])?)?;
        }
    }
    Ok(out)
}

fn mat_inverse<T: Int>(x: [[T; 2]; 2]) -> Result<[[T; 2]; 2], Overflow> {
    let det = int::det2(x[0][0], x[0][1], x[1][0], x[1][1])?;
    // det is +-1 for an adapted basis
    Ok([
        [int::mul(det, x[1][1])?, int::mul(det, int::neg(x[0][1])?)?],
        [int::mul(det, int::neg(x[1][0])?)?, int::mul(det, x[0][0])?],
    ])
}

/// The two classes in PGL(2,Z) carrying `{c1, c2}` onto `{c1p, c2p}` when
/// both pairs are at distance 4. The first fixes the order, the second
/// swaps it.
pub fn find_pair_maps<T: Int>(
    c1: &Slope<T>,
    c2: &Slope<T>,
    c1p: &Slope<T>,
    c2p: &Slope<T>,
) -> Result<Vec<BasisMap<T>>, SlopeError> {
    let b = distance_four_basis(c1, c2)?;
    let bp = distance_four_basis(c1p, c2p)?;
    let b_inv = mat_inverse(b)?;
    let four = int::lit::<T>(4);
    // (mu, lambda) -> (mu' + 4 lambda', -lambda') in primed coordinates
    let swap = [[T::one(), T::zero()], [four, -T::one()]];
    let keep = mat_mul(bp, b_inv)?;
    let turn = mat_mul(mat_mul(bp, swap)?, b_inv)?;
    let mut out = Vec::with_capacity(2);
    for m in [keep, turn] {
        out.push(BasisMap::new(m[0][0], m[0][1], m[1][0], m[1][1])?);
    }
    Ok(out)
}

/// `sigma` with `e = sigma * ep`, preferring `+1`.
pub fn slope_set_sign_match<T: Int>(
    e: &BTreeSet<ExtRational<T>>,
    ep: &BTreeSet<ExtRational<T>>,
) -> Result<Option<Sign>, Overflow> {
    for sign in [Sign::Plus, Sign::Minus] {
        let image = ep
            .iter()
            .map(|r| sign.apply(r))
            .collect::<Result<BTreeSet<_>, _>>()?;
        if &image == e {
            return Ok(Some(sign));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(p: i64, q: i64) -> Slope<i64> {
        make_slope(p, q).unwrap()
    }

    fn r(t: &str) -> ExtRational<i64> {
        t.parse().unwrap()
    }

    fn rs(items: &[&str]) -> BTreeSet<ExtRational<i64>> {
        items.iter().map(|t| r(t)).collect()
    }

    // independent oracle: every primitive vector in a square window
    fn brute_bounded(c1: Slope<i64>, c2: Slope<i64>, dmax: i64) -> BTreeSet<Slope<i64>> {
        let norm = |s: Slope<i64>| s.p().abs().max(s.q().abs());
        let radius = dmax * (norm(c1) + norm(c2));
        let mut out = BTreeSet::new();
        for p in -radius..=radius {
            for q in 0..=radius {
                if let Ok(x) = make_slope(p, q) {
                    let d1 = (x.p() * c1.q() - x.q() * c1.p()).abs();
                    let d2 = (x.p() * c2.q() - x.q() * c2.p()).abs();
                    if d1 <= dmax && d2 <= dmax {
                        out.insert(x);
                    }
                }
            }
        }
        out
    }

    #[test]
    fn make_slope_examples() {
        assert_eq!(s(1, 0), Slope::meridian());
        assert_eq!(s(-3, -2), s(3, 2));
        assert_eq!((s(-3, -2).p(), s(-3, -2).q()), (3, 2));
        assert!(matches!(make_slope(2i64, 4), Err(SlopeError::NotPrimitive { .. })));
        assert_eq!(make_slope(0i64, 0), Err(SlopeError::ZeroVector));
        assert_eq!(s(-1, 0), Slope::meridian());
        assert_eq!(s(0, -1), Slope::longitude());
    }

    #[test]
    fn intersection_examples() {
        let d = |a: &str, b: &str| r(a).to_slope().delta(&r(b).to_slope()).unwrap();
        assert_eq!(d("-4", "4"), 8);
        assert_eq!(d("16", "37/2"), 5);
        assert_eq!(d("inf", "0"), 1);
        assert_eq!(d("2", "2"), 0);
    }

    #[test]
    fn rational_round_trip() {
        assert_eq!(from_rational(&ExtRational::<i64>::infinity()), Slope::meridian());
        let m4 = from_rational(&r("-4"));
        assert_eq!((m4.p(), m4.q()), (-4, 1));
        let h = from_rational(&r("37/2"));
        assert_eq!((h.p(), h.q()), (37, 2));
        for t in ["inf", "0", "-4", "37/2", "-13/2", "5"] {
            assert_eq!(to_rational(&from_rational(&r(t))), r(t));
            assert_eq!(r(t).to_string(), t);
        }
        assert_eq!(r("4/2"), r("2"));
        assert_eq!(r("3/-2"), r("-3/2"));
        assert_eq!(r("7/0"), ExtRational::infinity());
        assert!("x".parse::<ExtRational<i64>>().is_err());
        assert!("0/0".parse::<ExtRational<i64>>().is_err());
    }

    #[test]
    fn rational_order_is_numeric() {
        let v: Vec<_> = rs(&["inf", "20", "37/2", "16", "-63/2", "-34", "0"]).into_iter().collect();
        let shown: Vec<String> = v.iter().map(|x| x.to_string()).collect();
        assert_eq!(shown, ["-34", "-63/2", "0", "16", "37/2", "20", "inf"]);
    }

    #[test]
    fn basis_map_examples() {
        let id = BasisMap::<i64>::identity();
        assert_eq!(id.apply(&s(3, 2)).unwrap(), s(3, 2));
        let minus = BasisMap::new(-1i64, 0, 0, -1).unwrap();
        assert_eq!(minus, id);
        assert_eq!(minus.apply(&s(5, 3)).unwrap(), s(5, 3));
        // (mu, lambda) -> (mu + 4 lambda, -lambda): columns (1,4) and (0,-1)
        let turn = BasisMap::new(1i64, 0, 4, -1).unwrap();
        assert_eq!(turn.apply(&Slope::meridian()).unwrap(), s(1, 4));
        assert!(matches!(
            BasisMap::new(2i64, 0, 0, 1),
            Err(SlopeError::NotUnimodular { det: 2 })
        ));
    }

    #[test]
    fn enumerate_examples() {
        let mu = s(1, 0);
        let c2 = s(1, 4);
        let got = enumerate_bounded_distance(&mu, &c2, 4).unwrap();
        let want: BTreeSet<_> = [s(1, 0), s(1, 1), s(1, 2), s(1, 3), s(1, 4), s(0, 1)].into();
        assert_eq!(got, want);

        let got = enumerate_bounded_distance(&mu, &s(0, 1), 1).unwrap();
        let want: BTreeSet<_> = [s(1, 0), s(0, 1), s(1, 1), s(-1, 1)].into();
        assert_eq!(got, want);
        assert_eq!(got, brute_bounded(mu, s(0, 1), 1));

        assert!(enumerate_bounded_distance(&mu, &mu, 3).is_err());
    }

    #[test]
    fn max_pair_examples() {
        let q = |t: &[&str]| t.iter().map(|x| r(x).to_slope()).collect::<Vec<_>>();
        let m = unique_max_pair(&q(&["0", "4"])).unwrap().unwrap();
        assert_eq!((m.delta, m.unique), (4, true));
        let m = unique_max_pair(&q(&["-4", "0", "4"])).unwrap().unwrap();
        assert_eq!((m.delta, m.unique), (8, true));
        assert_eq!(
            BTreeSet::from([m.first, m.second]),
            BTreeSet::from([r("-4").to_slope(), r("4").to_slope()])
        );
        let m = unique_max_pair(&q(&["inf", "0"])).unwrap().unwrap();
        assert_eq!((m.delta, m.unique), (1, true));
        let m = unique_max_pair(&q(&["0", "1", "2"])).unwrap().unwrap();
        assert_eq!((m.delta, m.unique), (2, true));
        let m = unique_max_pair(&q(&["0", "1", "inf"])).unwrap().unwrap();
        assert_eq!((m.delta, m.unique), (1, false));
        assert!(unique_max_pair(&q(&["3"])).unwrap().is_none());
    }

    #[test]
    fn pair_maps_standard_example() {
        let maps = find_pair_maps(&s(1, 0), &s(1, 4), &s(1, 0), &s(1, 4)).unwrap();
        assert_eq!(maps.len(), 2);
        assert_eq!(maps[0], BasisMap::identity());
        assert_eq!(maps[1], BasisMap::new(1, 0, 4, -1).unwrap());
    }

    #[test]
    fn pair_maps_zero_four() {
        let (a, b) = (r("0").to_slope(), r("4").to_slope());
        let maps = find_pair_maps(&a, &b, &a, &b).unwrap();
        assert_eq!(maps.len(), 2);
        assert!(maps.contains(&BasisMap::identity()));
        let swapper = maps.iter().find(|m| **m != BasisMap::identity()).unwrap();
        assert_eq!(swapper.apply(&a).unwrap(), b);
        assert_eq!(swapper.apply(&b).unwrap(), a);
        // it is u -> 4 - u on the whole parametrization
        for t in ["1", "3", "1/2", "inf", "-7/3"] {
            let u = r(t);
            let img = swapper.apply_rational(&u).unwrap();
            if u.is_infinite() {
                assert!(img.is_infinite());
            } else {
                let want = ExtRational::new(4 * u.denominator() - u.numerator(), u.denominator()).unwrap();
                assert_eq!(img, want);
            }
        }
    }

    #[test]
    fn pair_maps_reject_wrong_distance() {
        let err = find_pair_maps(&s(1, 0), &s(1, 3), &s(1, 0), &s(1, 4));
        assert!(matches!(err, Err(SlopeError::PreconditionViolated(_))));
    }

    #[test]
    fn sign_match_examples() {
        assert_eq!(
            slope_set_sign_match(&rs(&["-16", "-20"]), &rs(&["16", "20"])).unwrap(),
            Some(Sign::Minus)
        );
        assert_eq!(
            slope_set_sign_match(&rs(&["0", "4"]), &rs(&["0", "4"])).unwrap(),
            Some(Sign::Plus)
        );
        assert_eq!(slope_set_sign_match(&rs(&["0"]), &rs(&["1"])).unwrap(), None);
        assert_eq!(
            slope_set_sign_match(&rs(&["-4", "0", "4"]), &rs(&["-4", "0", "4"])).unwrap(),
            Some(Sign::Plus)
        );
        assert_eq!(
            slope_set_sign_match(&rs(&["inf", "3"]), &rs(&["inf", "-3"])).unwrap(),
            Some(Sign::Minus)
        );
    }

    #[test]
    fn wider_integers_work() {
        let a = make_slope(3i128, 7).unwrap();
        let b = make_slope(-2i128, 5).unwrap();
        assert_eq!(a.delta(&b).unwrap(), 29);
        let c = make_slope(3i32, 7).unwrap();
        assert_eq!(c.delta(&make_slope(-2i32, 5).unwrap()).unwrap(), 29);
    }

    #[test]
    fn overflow_surfaces() {
        let a = make_slope(i64::MAX, 1).unwrap();
        let b = make_slope(-1i64, i64::MAX).unwrap();
        assert!(intersection_number(&a, &b).is_err());
    }

    fn primitive_within(n: i64) -> impl Strategy<Value = Slope<i64>> {
        (-n..=n, -n..=n).prop_filter_map("primitive", |(p, q)| make_slope(p, q).ok())
    }

    fn primitive() -> impl Strategy<Value = Slope<i64>> {
        primitive_within(60)
    }

    // words in generators of GL(2,Z)
    fn unimodular() -> impl Strategy<Value = BasisMap<i64>> {
        prop::collection::vec(0usize..4, 0..7).prop_map(|word| {
            let gens = [
                BasisMap::new(0i64, -1, 1, 0).unwrap(),
                BasisMap::new(1i64, 1, 0, 1).unwrap(),
                BasisMap::new(1i64, -1, 0, 1).unwrap(),
                BasisMap::new(-1i64, 0, 0, 1).unwrap(),
            ];
            word.iter()
                .fold(BasisMap::identity(), |acc, &g| acc.compose(&gens[g]).unwrap())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2000))]

        #[test]
        fn delta_symmetric_and_separating(a in primitive(), b in primitive()) {
            let ab = a.delta(&b).unwrap();
            prop_assert_eq!(ab, b.delta(&a).unwrap());
            prop_assert_eq!(a.delta(&a).unwrap(), 0);
            prop_assert_eq!(ab == 0, a == b);
        }

        #[test]
        fn delta_invariant_under_gl2z(phi in unimodular(), a in primitive(), b in primitive()) {
            let (x, y) = (phi.apply(&a).unwrap(), phi.apply(&b).unwrap());
            prop_assert_eq!(x.delta(&y).unwrap(), a.delta(&b).unwrap());
        }

        #[test]
        fn inverse_undoes(phi in unimodular(), a in primitive()) {
            let back = phi.inverse().unwrap().apply(&phi.apply(&a).unwrap()).unwrap();
            prop_assert_eq!(back, a);
            prop_assert_eq!(phi.compose(&phi.inverse().unwrap()).unwrap(), BasisMap::identity());
        }

        #[test]
        fn enumeration_matches_window(c1 in primitive_within(6), c2 in primitive_within(6), dmax in 1i64..=4) {
            prop_assume!(c1 != c2);
            let got = enumerate_bounded_distance(&c1, &c2, dmax).unwrap();
            prop_assert_eq!(got, brute_bounded(c1, c2, dmax));
        }

        #[test]
        fn pair_maps_carry_pairs(phi in unimodular(), psi in unimodular(), a in -6i64..=6, t in prop::bool::ANY) {
            // c2 = a'*mu + 4*lambda with a' odd, transported by phi and psi
            let a = 2 * a + 1;
            let base1 = make_slope(1i64, 0).unwrap();
            let base2 = make_slope(a, 4).unwrap();
            let (c1, c2) = (phi.apply(&base1).unwrap(), phi.apply(&base2).unwrap());
            let (d1, d2) = (psi.apply(&base1).unwrap(), psi.apply(&base2).unwrap());
            let (d1, d2) = if t { (d2, d1) } else { (d1, d2) };
            let maps = find_pair_maps(&c1, &c2, &d1, &d2).unwrap();
            prop_assert_eq!(maps.len(), 2);
            prop_assert_ne!(maps[0], maps[1]);
            let target = BTreeSet::from([d1, d2]);
            for m in &maps {
                let img = BTreeSet::from([m.apply(&c1).unwrap(), m.apply(&c2).unwrap()]);
                prop_assert_eq!(&img, &target);
            }
        }

        #[test]
        fn canonical_sign(a in primitive()) {
            let (p, q) = (a.p(), a.q());
            prop_assert!(q > 0 || (p, q) == (1, 0));
            prop_assert_eq!(make_slope(-p, -q).unwrap(), a);
        }
    }
}
