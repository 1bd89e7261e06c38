//! Exact integer polynomials and Laurent polynomials for knot invariants.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Polynomial in t with big-integer coefficients, lowest degree first,
/// no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IntPoly {
    coeffs: Vec<BigInt>,
}

impl IntPoly {
    pub fn zero() -> Self {
        IntPoly { coeffs: vec![] }
    }

    pub fn one() -> Self {
        IntPoly { coeffs: vec![BigInt::one()] }
    }

    pub fn from_i64(c: &[i64]) -> Self {
        IntPoly::from_big(c.iter().map(|&x| BigInt::from(x)).collect())
    }

    fn from_big(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        IntPoly { coeffs }
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add(&self, o: &IntPoly) -> IntPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        let z = BigInt::zero();
        IntPoly::from_big(
            (0..n)
                .map(|i| self.coeffs.get(i).unwrap_or(&z) + o.coeffs.get(i).unwrap_or(&z))
                .collect(),
        )
    }

    pub fn neg(&self) -> IntPoly {
        IntPoly { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }

    pub fn sub(&self, o: &IntPoly) -> IntPoly {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &IntPoly) -> IntPoly {
        if self.is_zero() || o.is_zero() {
            return IntPoly::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        IntPoly::from_big(out)
    }

    /// Quotient of a division known to be exact; a remainder is an error.
    pub fn div_exact(&self, d: &IntPoly) -> Result<IntPoly> {
        if d.is_zero() {
            return Err(Error::InvalidDiagram("polynomial division by zero".into()));
        }
        if self.is_zero() {
            return Ok(IntPoly::zero());
        }
        if self.coeffs.len() < d.coeffs.len() {
            return Err(Error::InvalidDiagram("inexact polynomial division".into()));
        }
        let mut rem = self.coeffs.clone();
        let dl = d.coeffs.len();
        let lead = &d.coeffs[dl - 1];
        let mut q = vec![BigInt::zero(); rem.len() - dl + 1];
        for k in (0..q.len()).rev() {
            let top = &rem[k + dl - 1];
            if top.is_zero() {
                continue;
            }
            if !(top % lead).is_zero() {
                return Err(Error::InvalidDiagram("inexact polynomial division".into()));
            }
            let f = top / lead;
            for (j, c) in d.coeffs.iter().enumerate() {
                rem[k + j] -= &f * c;
            }
            q[k] = f;
        }
        if rem.iter().any(|c| !c.is_zero()) {
            return Err(Error::InvalidDiagram("inexact polynomial division".into()));
        }
        Ok(IntPoly::from_big(q))
    }
}

/// Determinant by fraction-free (Bareiss) elimination; every division is
/// exact in Z[t].
pub fn bareiss_determinant(mut m: Vec<Vec<IntPoly>>) -> Result<IntPoly> {
    let n = m.len();
    if m.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidDiagram("determinant of a non-square matrix".into()));
    }
    if n == 0 {
        return Ok(IntPoly::one());
    }
    let mut negate = false;
    let mut prev = IntPoly::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&r| !m[r][k].is_zero()) {
                Some(r) => {
                    m.swap(k, r);
                    negate = !negate;
                }
                None => return Ok(IntPoly::zero()),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = m[i][j].mul(&m[k][k]).sub(&m[i][k].mul(&m[k][j]));
                m[i][j] = v.div_exact(&prev)?;
            }
        }
        prev = m[k][k].clone();
    }
    let d = m[n - 1][n - 1].clone();
    Ok(if negate { d.neg() } else { d })
}

/// Integer Laurent polynomial: `coeffs[i]` multiplies t^(lowest_exp + i).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LaurentPolynomial {
    pub coeffs: Vec<i64>,
    pub lowest_exp: i32,
}

impl LaurentPolynomial {
    pub fn one() -> Self {
        LaurentPolynomial { coeffs: vec![1], lowest_exp: 0 }
    }

    pub fn new(coeffs: Vec<i64>, lowest_exp: i32) -> Self {
        let mut p = LaurentPolynomial { coeffs, lowest_exp };
        while p.coeffs.last() == Some(&0) {
            p.coeffs.pop();
        }
        let lead = p.coeffs.iter().take_while(|&&c| c == 0).count();
        p.coeffs.drain(..lead);
        p.lowest_exp += lead as i32;
        p
    }

    /// Δ up to units ±t^k: shifted to lowest exponent 0 with a positive
    /// constant term.
    pub fn normalized_from(p: &IntPoly) -> Result<Self> {
        if p.is_zero() {
            return Ok(LaurentPolynomial { coeffs: vec![], lowest_exp: 0 });
        }
        let start = p.coeffs().iter().take_while(|c| c.is_zero()).count();
        let sign = if p.coeffs()[start].is_negative() { -1 } else { 1 };
        let coeffs = p.coeffs()[start..]
            .iter()
            .map(|c| {
                c.to_i64()
                    .map(|x| x * sign)
                    .ok_or_else(|| Error::CapExceeded("Alexander coefficient exceeds 64 bits".into()))
            })
            .collect::<Result<Vec<i64>>>()?;
        Ok(LaurentPolynomial { coeffs, lowest_exp: 0 })
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs == [1]
    }

    pub fn eval(&self, t: i64) -> i128 {
        // Only used at t = ±1, where negative powers equal positive ones.
        debug_assert!(t == 1 || t == -1);
        let mut s = 0i128;
        for (i, &c) in self.coeffs.iter().enumerate() {
            let e = self.lowest_exp as i64 + i as i64;
            let p = if t == -1 && e.rem_euclid(2) == 1 { -1 } else { 1 };
            s += c as i128 * p;
        }
        s
    }

    pub fn determinant(&self) -> u128 {
        self.eval(-1).unsigned_abs()
    }

    /// Δ(t) and Δ(1/t) agree up to a unit (palindromic up to sign).
    pub fn is_symmetric(&self) -> bool {
        let r: Vec<i64> = self.coeffs.iter().rev().copied().collect();
        r == self.coeffs || r.iter().map(|c| -c).collect::<Vec<_>>() == self.coeffs
    }
}

impl fmt::Display for LaurentPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            let e = self.lowest_exp + i as i32;
            let sign = if c < 0 { "-" } else { "+" };
            if first {
                if c < 0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            let a = c.unsigned_abs();
            match e {
                0 => write!(f, "{a}")?,
                _ => {
                    if a != 1 {
                        write!(f, "{a}")?;
                    }
                    if e == 1 {
                        write!(f, "t")?;
                    } else {
                        write!(f, "t^{e}")?;
                    }
                }
            }
            first = false;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[i64]) -> IntPoly {
        IntPoly::from_i64(c)
    }

    #[test]
    fn arithmetic() {
        let a = p(&[1, 1]);
        let b = p(&[-1, 1]);
        assert_eq!(a.mul(&b), p(&[-1, 0, 1]));
        assert_eq!(p(&[-1, 0, 1]).div_exact(&a).unwrap(), b);
        assert!(p(&[1, 0, 1]).div_exact(&a).is_err());
        assert!(a.sub(&a).is_zero());
    }

    #[test]
    fn bareiss_matches_expansion() {
        // det [[1-t, t], [-1, 1-t]] = (1-t)^2 + t = 1 - t + t^2
        let m = vec![vec![p(&[1, -1]), p(&[0, 1])], vec![p(&[-1]), p(&[1, -1])]];
        assert_eq!(bareiss_determinant(m).unwrap(), p(&[1, -1, 1]));
        // Integer matrix needing a row swap.
        let m = vec![
            vec![p(&[0]), p(&[2]), p(&[1])],
            vec![p(&[3]), p(&[1]), p(&[4])],
            vec![p(&[1]), p(&[5]), p(&[9])],
        ];
        // 0*(9-20) - 2*(27-4) + 1*(15-1) = -46 + 14 = -32
        assert_eq!(bareiss_determinant(m).unwrap(), p(&[-32]));
        assert_eq!(bareiss_determinant(vec![]).unwrap(), IntPoly::one());
    }

    #[test]
    fn laurent_normalization() {
        let l = LaurentPolynomial::normalized_from(&p(&[0, 0, -1, 1, -1])).unwrap();
        assert_eq!(l.coeffs, vec![1, -1, 1]);
        assert_eq!(l.to_string(), "t^2 - t + 1");
        assert_eq!(l.eval(1), 1);
        assert_eq!(l.determinant(), 3);
        assert!(l.is_symmetric());
        let shifted = LaurentPolynomial::new(vec![0, 1, -3, 1, 0], -2);
        assert_eq!((shifted.lowest_exp, shifted.to_string()), (-1, "t - 3 + t^-1".to_string()));
    }
}
