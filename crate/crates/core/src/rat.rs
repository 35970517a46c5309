//! Exact rationals and their `"num/den"` text form.

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Q = BigRational;

/// `n/d` as a rational. Panics if `d == 0`.
pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Always writes the denominator, `3` becomes `"3/1"`.
pub fn fmt_q(x: &Q) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Accepts `"a/b"` or a plain integer.
pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::Parse(format!("bad rational {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Q::new(n, d))
        }
        None => Ok(Q::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

pub fn abs(x: &Q) -> Q {
    x.abs()
}

pub fn max_q(a: Q, b: Q) -> Q {
    if a >= b {
        a
    } else {
        b
    }
}

pub fn min_q(a: Q, b: Q) -> Q {
    if a <= b {
        a
    } else {
        b
    }
}

pub fn one() -> Q {
    Q::one()
}

pub fn zero() -> Q {
    Q::zero()
}

/// Smallest rational with denominator `den` that is at least `sqrt(x)`.
pub fn sqrt_upper(x: &Q, den: i64) -> Q {
    assert!(!x.is_negative());
    let d = BigInt::from(den);
    // integer square root of floor(x * den^2), then step up until it covers x
    let scaled = (x * Q::from_integer(&d * &d)).floor().to_integer();
    let mut r = scaled.sqrt();
    loop {
        let cand = Q::new(r.clone(), d.clone());
        if &(&cand * &cand) >= x {
            return cand;
        }
        r += 1;
    }
}
