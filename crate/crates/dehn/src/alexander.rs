//! Laurent polynomials in `t`, twist-knot Alexander polynomials, and
//! equality up to the units `+-t^k` of `Z[t, t^-1]`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::int::{self, Int, Overflow};

/// Exponent to nonzero coefficient.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LaurentPoly<T> {
    terms: BTreeMap<i64, T>,
}

impl<T: Int> Default for LaurentPoly<T> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<T: Int> LaurentPoly<T> {
    pub fn zero() -> Self {
        LaurentPoly {
            terms: BTreeMap::new(),
        }
    }

    pub fn monomial(coeff: T, exp: i64) -> Self {
        Self::from_terms([(exp, coeff)])
    }

    /// Repeated exponents are summed; zero sums are dropped.
    pub fn try_from_terms(terms: impl IntoIterator<Item = (i64, T)>) -> Result<Self, Overflow> {
        let mut map = BTreeMap::new();
        for (e, c) in terms {
            let slot = map.entry(e).or_insert_with(T::zero);
            *slot = int::add(*slot, c)?;
        }
        map.retain(|_, c| !c.is_zero());
        Ok(LaurentPoly { terms: map })
    }

    /// Panics on overflow; meant for distinct exponents.
    pub fn from_terms(terms: impl IntoIterator<Item = (i64, T)>) -> Self {
        Self::try_from_terms(terms).expect("coefficient overflow")
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, exp: i64) -> T {
        self.terms.get(&exp).copied().unwrap_or_else(T::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, T)> + '_ {
        self.terms.iter().map(|(e, c)| (*e, *c))
    }

    pub fn min_exp(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }

    pub fn max_exp(&self) -> Option<i64> {
        self.terms.keys().next_back().copied()
    }

    /// `t^-1` substituted for `t`.
    pub fn reversed(&self) -> Self {
        LaurentPoly {
            terms: self.terms.iter().map(|(e, c)| (-e, *c)).collect(),
        }
    }

    pub fn shifted(&self, k: i64) -> Self {
        LaurentPoly {
            terms: self.terms.iter().map(|(e, c)| (e + k, *c)).collect(),
        }
    }

    pub fn negated(&self) -> Result<Self, Overflow> {
        let terms = self
            .terms
            .iter()
            .map(|(e, c)| Ok((*e, int::neg(*c)?)))
            .collect::<Result<_, Overflow>>()?;
        Ok(LaurentPoly { terms })
    }

    pub fn mul(&self, other: &Self) -> Result<Self, Overflow> {
        let mut out = Vec::new();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                out.push((e1 + e2, int::mul(*c1, *c2)?));
            }
        }
        Self::try_from_terms(out)
    }

    /// Representative of the unit class: lowest exponent 0 and lowest
    /// coefficient positive.
    pub fn unit_normalized(&self) -> Result<Self, Overflow> {
        let Some(lo) = self.min_exp() else {
            return Ok(Self::zero());
        };
        let shifted = self.shifted(-lo);
        if shifted.coeff(0) < T::zero() {
            shifted.negated()
        } else {
            Ok(shifted)
        }
    }
}

/// `m t^2 + (1 - 2m) t + m`
pub fn twist_knot_alexander<T: Int>(m: T) -> Result<LaurentPoly<T>, Overflow> {
    let middle = int::sub(T::one(), int::mul(int::lit(2), m)?)?;
    LaurentPoly::try_from_terms([(2, m), (1, middle), (0, m)])
}

/// True iff `g = +-t^k f` for some `k`.
pub fn equivalent_up_to_unit<T: Int>(f: &LaurentPoly<T>, g: &LaurentPoly<T>) -> bool {
    if f.terms.len() != g.terms.len() {
        return false;
    }
    let (Some(lf), Some(lg)) = (f.min_exp(), g.min_exp()) else {
        return f.is_zero() && g.is_zero();
    };
    let flip = f.coeff(lf) != g.coeff(lg);
    f.terms().zip(g.terms()).all(|((ef, cf), (eg, cg))| {
        // comparing cf == -cg without negating avoids overflow at MIN
        ef - lf == eg - lg && if flip { cf.checked_add(&cg) == Some(T::zero()) } else { cf == cg }
    })
}

impl<T: Int> fmt::Display for LaurentPoly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (k, (e, c)) in self.terms.iter().rev().enumerate() {
            let negative = *c < T::zero();
            if negative {
                write!(f, "-")?;
            } else if k > 0 {
                write!(f, "+")?;
            }
            let unit = *c == T::one() || *c == -T::one();
            if *e == 0 || !unit {
                if negative {
                    // `c` may be MIN, so print digits of the display string
                    write!(f, "{}", &c.to_string()[1..])?;
                } else {
                    write!(f, "{c}")?;
                }
            }
            match e {
                0 => {}
                1 => write!(f, "t")?,
                _ => write!(f, "t^{e}")?,
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot parse `{0}` as a Laurent polynomial such as -t^2+3t-1 or 2t^-1+1")]
pub struct PolyParseError(String);

impl<T: Int> FromStr for LaurentPoly<T> {
    type Err = PolyParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || PolyParseError(s.to_string());
        let text: String = s
            .chars()
            .filter(|c| !c.is_whitespace() && *c != '*')
            .map(|c| if c == '−' { '-' } else { c })
            .collect();
        if text.is_empty() {
            return Err(bad());
        }
        // split before every sign that is not part of an exponent
        let mut pieces = Vec::new();
        let mut start = 0;
        let bytes = text.as_bytes();
        for i in 1..bytes.len() {
            if (bytes[i] == b'+' || bytes[i] == b'-') && bytes[i - 1] != b'^' {
                pieces.push(&text[start..i]);
                start = i;
            }
        }
        pieces.push(&text[start..]);

        let mut terms = Vec::new();
        for piece in pieces {
            let (negative, body) = match piece.as_bytes().first() {
                Some(b'-') => (true, &piece[1..]),
                Some(b'+') => (false, &piece[1..]),
                _ => (false, piece),
            };
            let (coef, exp) = match body.find('t') {
                None => (body, 0),
                Some(pos) => {
                    let rest = &body[pos + 1..];
                    let exp = if rest.is_empty() {
                        1
                    } else {
                        rest.strip_prefix('^')
                            .and_then(|x| x.trim_start_matches('+').parse::<i64>().ok())
                            .ok_or_else(bad)?
                    };
                    (&body[..pos], exp)
                }
            };
            let coef: T = if coef.is_empty() {
                if body.is_empty() {
                    return Err(bad());
                }
                T::one()
            } else {
                coef.parse().map_err(|_| bad())?
            };
            let coef = if negative { int::neg(coef).map_err(|_| bad())? } else { coef };
            terms.push((exp, coef));
        }
        LaurentPoly::try_from_terms(terms).map_err(|_| bad())
    }
}

impl<T: Int> Serialize for LaurentPoly<T> {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de, T: Int> Deserialize<'de> for LaurentPoly<T> {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
