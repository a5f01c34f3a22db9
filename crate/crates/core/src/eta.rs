//! Truncated q-series with exponents in (1/24)Z, Dedekind eta products
//! indexed by frameshapes, and Euler characteristics of fixed loci read
//! off their inverses.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group_action::Frameshape;

pub const DEFAULT_TERMS: usize = 64;

/// `q^{offset_24/24} * (c_0 + c_1 q + ... + c_{N-1} q^{N-1} + O(q^N))`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QSeries {
    /// Exponent of the leading term, in units of 1/24.
    offset_24: i64,
    coeffs: Vec<BigInt>,
}

impl QSeries {
    /// Builds a series, shifting the offset past leading zero coefficients.
    pub fn new(offset_24: i64, coeffs: Vec<BigInt>) -> Self {
        let lead = coeffs.iter().position(|c| !c.is_zero());
        match lead {
            Some(k) if k > 0 => QSeries { offset_24: offset_24 + 24 * k as i64, coeffs: coeffs[k..].to_vec() },
            _ => QSeries { offset_24, coeffs },
        }
    }

    pub fn from_i64(offset_24: i64, coeffs: &[i64]) -> Self {
        Self::new(offset_24, coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn one(terms: usize) -> Self {
        let mut c = vec![BigInt::zero(); terms];
        if terms > 0 {
            c[0] = BigInt::one();
        }
        QSeries { offset_24: 0, coeffs: c }
    }

    pub fn offset_24(&self) -> i64 {
        self.offset_24
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    /// Number of retained coefficients.
    pub fn truncation(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// Keeps the first `terms` coefficients.
    pub fn truncate(&self, terms: usize) -> QSeries {
        QSeries { offset_24: self.offset_24, coeffs: self.coeffs[..terms.min(self.coeffs.len())].to_vec() }
    }

    /// Multiplies by `q^k`.
    pub fn shift(&self, k: i64) -> QSeries {
        QSeries { offset_24: self.offset_24 + 24 * k, coeffs: self.coeffs.clone() }
    }

    /// Coefficient of `q^{e_24/24}`; `None` past the truncation.
    pub fn coefficient_24(&self, e_24: i64) -> Option<BigInt> {
        let d = e_24 - self.offset_24;
        if d < 0 {
            return Some(BigInt::zero());
        }
        if d % 24 != 0 {
            return Some(BigInt::zero());
        }
        self.coeffs.get((d / 24) as usize).cloned()
    }

    /// Coefficient of `q^e` for an integral exponent.
    pub fn coefficient(&self, e: i64) -> Option<BigInt> {
        self.coefficient_24(24 * e)
    }

    /// Product truncated to the shorter of the two precisions.
    pub fn mul(&self, other: &QSeries) -> QSeries {
        let n = self.coeffs.len().min(other.coeffs.len());
        let mut out = vec![BigInt::zero(); n];
        for (i, a) in self.coeffs.iter().take(n).enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().take(n - i).enumerate() {
                out[i + j] += a * b;
            }
        }
        QSeries::new(self.offset_24 + other.offset_24, out)
    }

    pub fn pow(&self, e: u32) -> QSeries {
        let mut acc = QSeries::one(self.coeffs.len());
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Multiplicative inverse; the leading coefficient must be `+-1`.
    pub fn invert(&self) -> Result<QSeries> {
        let n = self.coeffs.len();
        let lead = self.coeffs.first().cloned().unwrap_or_default();
        if lead.abs() != BigInt::one() {
            return Err(Error::NonUnitLeading(lead.to_string()));
        }
        let mut inv = vec![BigInt::zero(); n];
        inv[0] = lead.clone();
        for k in 1..n {
            let s: BigInt = (1..=k).map(|j| &self.coeffs[j] * &inv[k - j]).sum();
            inv[k] = -(s * &lead);
        }
        Ok(QSeries { offset_24: -self.offset_24, coeffs: inv })
    }

    /// `q^{1/24}`-free rendering such as `1/q + 2 + 5q + 10q^2 + O(q^8)`.
    /// Offsets that are not integral are printed as a `q^(k/24)` prefix.
    pub fn display_terms(&self) -> String {
        let mut s = String::new();
        let (base, prefix) = if self.offset_24 % 24 == 0 {
            (self.offset_24 / 24, String::new())
        } else {
            (0, format!("q^({}/24)*(", self.offset_24))
        };
        s.push_str(&prefix);
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let e = base + k as i64;
            let mag = c.abs();
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    s.push('-');
                }
            } else {
                s.push_str(&format!(" {sign} "));
            }
            first = false;
            let mono = match e {
                0 => String::new(),
                1 => "q".into(),
                -1 => "/q".into(),
                e if e < 0 => format!("/q^{}", -e),
                e => format!("q^{e}"),
            };
            if mono.is_empty() {
                s.push_str(&mag.to_string());
            } else if mono.starts_with('/') {
                s.push_str(&format!("{mag}{mono}"));
            } else if mag.is_one() {
                s.push_str(&mono);
            } else {
                s.push_str(&format!("{mag}{mono}"));
            }
        }
        if first {
            s.push('0');
        }
        let tail = base + self.coeffs.len() as i64;
        let big_o = match tail {
            0 => "O(1)".to_string(),
            1 => "O(q)".to_string(),
            t => format!("O(q^{t})"),
        };
        s.push_str(&format!(" + {big_o}"));
        if !prefix.is_empty() {
            s.push(')');
        }
        s
    }
}

impl fmt::Display for QSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_terms())
    }
}

/// Coefficients of `prod_{m>=1} (1 - q^m)` up to `q^{terms-1}`, from
/// Euler's pentagonal number theorem.
fn euler_function(terms: usize) -> Vec<BigInt> {
    let mut c = vec![BigInt::zero(); terms];
    let sign = |k: i64| if k % 2 == 0 { BigInt::one() } else { BigInt::from(-1) };
    if terms > 0 {
        c[0] = BigInt::one();
    }
    for k in 1i64.. {
        let p1 = (k * (3 * k - 1) / 2) as usize;
        if p1 >= terms {
            break;
        }
        c[p1] += sign(k);
        let p2 = (k * (3 * k + 1) / 2) as usize;
        if p2 < terms {
            c[p2] += sign(k);
        }
    }
    c
}

/// `eta(q) = q^{1/24} prod (1 - q^m)` to `terms` coefficients.
pub fn eta_series(terms: usize) -> Result<QSeries> {
    if terms == 0 {
        return Err(Error::InvalidArgument("truncation must be at least 1".into()));
    }
    Ok(QSeries { offset_24: 1, coeffs: euler_function(terms) })
}

/// `eta(q^a)` to `terms` coefficients in `q`.
fn eta_at_power(a: u64, terms: usize) -> QSeries {
    let a = a as usize;
    let base = euler_function(terms.div_ceil(a));
    let mut c = vec![BigInt::zero(); terms];
    for (k, x) in base.into_iter().enumerate() {
        if k * a < terms {
            c[k * a] = x;
        }
    }
    QSeries { offset_24: a as i64, coeffs: c }
}

/// `f(q) = prod_a eta(q^a)^{m(a)}`. Negative multiplicities go through a
/// single series inversion of the collected denominator.
pub fn frameshape_eta_product(fs: &Frameshape, terms: usize) -> Result<QSeries> {
    if terms == 0 {
        return Err(Error::InvalidArgument("truncation must be at least 1".into()));
    }
    let mut num = QSeries::one(terms);
    let mut den = QSeries::one(terms);
    for (&a, &m) in fs.parts() {
        let factor = eta_at_power(a, terms).pow(m.unsigned_abs() as u32);
        if m > 0 {
            num = num.mul(&factor);
        } else {
            den = den.mul(&factor);
        }
    }
    Ok(num.mul(&den.invert()?))
}

pub fn series_invert(s: &QSeries) -> Result<QSeries> {
    s.invert()
}

/// Coefficient of `q^{v^2/2}` in `f^{-1}` for the eta product of `fs`.
/// Truncation is extended as far as the requested exponent needs.
pub fn euler_char_fixed(fs: &Frameshape, v_square: i64) -> Result<BigInt> {
    if v_square % 2 != 0 {
        return Err(Error::InvalidArgument(format!("v^2 = {v_square} is odd")));
    }
    let degree = fs.degree();
    if degree % 24 != 0 {
        return Err(Error::InvalidArgument(format!(
            "frameshape {fs} has degree {degree}; the inverse eta product has a fractional leading exponent"
        )));
    }
    let n = v_square / 2;
    let index = n + degree / 24;
    if index < 0 {
        return Ok(BigInt::zero());
    }
    let terms = (index as usize + 1).max(DEFAULT_TERMS);
    let inv = frameshape_eta_product(fs, terms)?.invert()?;
    Ok(inv.coefficient(n).expect("truncation covers the requested exponent"))
}

/// `prod_{n>=1} prod_a (1 - q^{an})^{-m(a)}`, built factor by factor
/// without series inversion.
pub fn eigenvalue_product_series(fs: &Frameshape, terms: usize) -> Result<QSeries> {
    if terms == 0 {
        return Err(Error::InvalidArgument("truncation must be at least 1".into()));
    }
    let mut c = vec![BigInt::zero(); terms];
    c[0] = BigInt::one();
    for (&a, &m) in fs.parts() {
        let a = a as usize;
        for _ in 0..m.unsigned_abs() {
            for n in 1.. {
                let step = a * n;
                if step >= terms {
                    break;
                }
                if m > 0 {
                    // divide by (1 - q^step)
                    for i in step..terms {
                        let prev = c[i - step].clone();
                        c[i] += prev;
                    }
                } else {
                    // multiply by (1 - q^step)
                    for i in (step..terms).rev() {
                        let prev = c[i - step].clone();
                        c[i] -= prev;
                    }
                }
            }
        }
    }
    Ok(QSeries { offset_24: 0, coeffs: c })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fs(s: &str) -> Frameshape {
        s.parse().unwrap()
    }

    fn ints(v: &[BigInt]) -> Vec<i64> {
        v.iter().map(|x| i64::try_from(x).unwrap()).collect()
    }

    /// Direct expansion of prod (1 - q^m), independent of the pentagonal formula.
    fn naive_euler(terms: usize) -> Vec<i64> {
        let mut c = vec![0i64; terms];
        c[0] = 1;
        for m in 1..terms {
            for i in (m..terms).rev() {
                c[i] -= c[i - m];
            }
        }
        c
    }

    #[test]
    fn eta_matches_direct_product() {
        let e = eta_series(40).unwrap();
        assert_eq!(e.offset_24(), 1);
        assert_eq!(ints(e.coeffs()), naive_euler(40));
        assert_eq!(ints(&e.coeffs()[..6]), vec![1, -1, -1, 0, 0, 1]);
    }

    #[test]
    fn eta_prefix_property() {
        let long = eta_series(30).unwrap();
        assert_eq!(long.truncate(12), eta_series(12).unwrap());
    }

    #[test]
    fn eta_zero_truncation_rejected() {
        assert!(eta_series(0).is_err());
    }

    #[test]
    fn invert_geometric() {
        let s = QSeries::from_i64(0, &[1, -1, 0, 0, 0, 0]);
        let inv = s.invert().unwrap();
        assert_eq!(ints(inv.coeffs()), vec![1; 6]);
        assert_eq!(inv.invert().unwrap(), s);
    }

    #[test]
    fn invert_non_unit_rejected() {
        let s = QSeries::from_i64(0, &[2, 1]);
        assert!(matches!(s.invert(), Err(Error::NonUnitLeading(_))));
    }

    #[test]
    fn eta_product_offsets() {
        let delta = frameshape_eta_product(&fs("1^24"), 10).unwrap();
        assert_eq!(delta.offset_24(), 24);
        assert_eq!(delta.coeffs()[0], BigInt::one());
        let f = frameshape_eta_product(&fs("1^2 11^2"), 10).unwrap();
        assert_eq!(f.offset_24(), 24);
        // the tau function begins 1, -24, 252, -1472
        assert_eq!(ints(&delta.coeffs()[..4]), vec![1, -24, 252, -1472]);
    }

    #[test]
    fn order_eleven_inverse() {
        let inv = frameshape_eta_product(&fs("1^2 11^2"), 8).unwrap().invert().unwrap();
        assert_eq!(inv.offset_24(), -24);
        assert_eq!(ints(inv.coeffs()), vec![1, 2, 5, 10, 20, 36, 65, 110]);
        assert_eq!(
            inv.to_string(),
            "1/q + 2 + 5q + 10q^2 + 20q^3 + 36q^4 + 65q^5 + 110q^6 + O(q^7)"
        );
    }

    #[test]
    fn euler_characteristics() {
        assert_eq!(euler_char_fixed(&fs("1^2 11^2"), 8).unwrap(), BigInt::from(36));
        assert_eq!(euler_char_fixed(&fs("1^8 2^8"), 0).unwrap(), BigInt::from(8));
        assert_eq!(euler_char_fixed(&fs("1^24"), 0).unwrap(), BigInt::from(24));
        assert_eq!(euler_char_fixed(&fs("1^24"), -4).unwrap(), BigInt::zero());
        assert!(euler_char_fixed(&fs("1^24"), 3).is_err());
    }

    #[test]
    fn euler_char_extends_truncation() {
        let far = euler_char_fixed(&fs("1^24"), 2 * 80).unwrap();
        let oracle = eigenvalue_product_series(&fs("1^24"), 82).unwrap();
        assert_eq!(Some(far), oracle.coefficient(81));
    }

    #[test]
    fn eigenvalue_product_constant_term() {
        let s = eigenvalue_product_series(&fs("1^-8 2^16"), 10).unwrap();
        assert_eq!(s.coeffs()[0], BigInt::one());
    }

    #[test]
    fn display_negative_and_zero() {
        let s = QSeries::from_i64(0, &[1, -8, 0, 36]);
        assert_eq!(s.to_string(), "1 - 8q + 36q^3 + O(q^4)");
        let z = QSeries::from_i64(24, &[0, 0]);
        assert!(z.is_zero());
    }
}
