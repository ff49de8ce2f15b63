use std::fmt;

use super::field::{Elem, Field};
use crate::error::{Error, Result};

/// Dense polynomial in θ with coefficients in the ambient field.
///
/// Elements of A = F_q[θ] are the ones with all coefficients in F_q.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ThetaPoly {
    f: &'static Field,
    c: Vec<Elem>,
}

impl ThetaPoly {
    pub fn zero(f: &'static Field) -> Self {
        ThetaPoly { f, c: Vec::new() }
    }
    pub fn one(f: &'static Field) -> Self {
        Self::constant(f, 1)
    }
    pub fn constant(f: &'static Field, a: Elem) -> Self {
        Self::from_coeffs(f, vec![a])
    }
    /// θ^k
    pub fn theta_pow(f: &'static Field, k: usize) -> Self {
        let mut c = vec![0; k + 1];
        c[k] = 1;
        ThetaPoly { f, c }
    }
    /// Coefficients listed from θ^0 upwards.
    pub fn from_coeffs(f: &'static Field, mut c: Vec<Elem>) -> Self {
        while c.last() == Some(&0) {
            c.pop();
        }
        ThetaPoly { f, c }
    }
    pub fn field(&self) -> &'static Field {
        self.f
    }
    pub fn coeffs(&self) -> &[Elem] {
        &self.c
    }
    pub fn coeff(&self, i: usize) -> Elem {
        self.c.get(i).copied().unwrap_or(0)
    }
    /// None for the zero polynomial.
    pub fn deg(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }
    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }
    pub fn is_one(&self) -> bool {
        self.c == [1]
    }
    pub fn lead(&self) -> Elem {
        self.c.last().copied().unwrap_or(0)
    }
    pub fn is_monic(&self) -> bool {
        self.lead() == 1
    }
    /// True when every coefficient lies in F_q.
    pub fn in_a(&self) -> bool {
        self.c.iter().all(|&x| self.f.in_fq(x))
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.c.len().max(o.c.len());
        let c = (0..n).map(|i| self.f.add(self.coeff(i), o.coeff(i))).collect();
        Self::from_coeffs(self.f, c)
    }
    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }
    pub fn neg(&self) -> Self {
        ThetaPoly { f: self.f, c: self.c.iter().map(|&x| self.f.neg(x)).collect() }
    }
    pub fn scale(&self, a: Elem) -> Self {
        Self::from_coeffs(self.f, self.c.iter().map(|&x| self.f.mul(x, a)).collect())
    }
    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero(self.f);
        }
        let f = self.f;
        let mut c = vec![0; self.c.len() + o.c.len() - 1];
        for (i, &a) in self.c.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in o.c.iter().enumerate() {
                c[i + j] = f.add(c[i + j], f.mul(a, b));
            }
        }
        Self::from_coeffs(f, c)
    }
    pub fn pow(&self, mut k: u64) -> Self {
        let mut r = Self::one(self.f);
        let mut b = self.clone();
        while k > 0 {
            if k & 1 == 1 {
                r = r.mul(&b);
            }
            k >>= 1;
            if k > 0 {
                b = b.mul(&b);
            }
        }
        r
    }
    /// Multiply by θ^k.
    pub fn shift(&self, k: usize) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut c = vec![0; k];
        c.extend_from_slice(&self.c);
        ThetaPoly { f: self.f, c }
    }

    pub fn divrem(&self, d: &Self) -> Result<(Self, Self)> {
        let dd = d.deg().ok_or(Error::DivisionByZero)?;
        let f = self.f;
        let li = f.inv(d.lead())?;
        let mut r = self.c.clone();
        let mut qc = vec![0; self.c.len().saturating_sub(dd)];
        while r.len() > dd {
            let top = r.len() - 1;
            let c = f.mul(r[top], li);
            let s = top - dd;
            qc[s] = c;
            for (i, &x) in d.c.iter().enumerate() {
                r[s + i] = f.sub(r[s + i], f.mul(c, x));
            }
            while r.last() == Some(&0) {
                r.pop();
            }
        }
        Ok((Self::from_coeffs(f, qc), Self::from_coeffs(f, r)))
    }

    /// Exact quotient; errors if the remainder is nonzero.
    pub fn div_exact(&self, d: &Self) -> Result<Self> {
        let (q, r) = self.divrem(d)?;
        if !r.is_zero() {
            return Err(Error::Invalid("inexact polynomial division".into()));
        }
        Ok(q)
    }

    pub fn monic(&self) -> Self {
        match self.f.inv(self.lead()) {
            Ok(li) => self.scale(li),
            Err(_) => self.clone(),
        }
    }

    /// Monic gcd (zero if both are zero).
    pub fn gcd(&self, o: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.divrem(&b).expect("nonzero divisor").1;
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn lcm(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero(self.f);
        }
        let g = self.gcd(o);
        self.div_exact(&g).expect("gcd divides").mul(o).monic()
    }

    /// Apply x ↦ x^{q^k} to coefficients only.
    pub fn frob_coeffs(&self, k: i64) -> Self {
        ThetaPoly { f: self.f, c: self.c.iter().map(|&x| self.f.frob(x, k)).collect() }
    }

    /// The q-th power Σ c_i^q θ^{iq}.
    pub fn pow_q(&self) -> Self {
        let q = self.f.q as usize;
        let mut c = vec![0; self.c.len().saturating_sub(1) * q + 1];
        for (i, &x) in self.c.iter().enumerate() {
            c[i * q] = self.f.frob(x, 1);
        }
        Self::from_coeffs(self.f, c)
    }

    pub fn eval(&self, x: Elem) -> Elem {
        self.c.iter().rev().fold(0, |acc, &a| self.f.add(self.f.mul(acc, x), a))
    }
}

impl fmt::Debug for ThetaPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for ThetaPoly {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(out, "0");
        }
        let mut parts = Vec::new();
        for (i, &a) in self.c.iter().enumerate().rev() {
            if a == 0 {
                continue;
            }
            let mono = match i {
                0 => String::new(),
                1 => "theta".to_string(),
                _ => format!("theta^{i}"),
            };
            parts.push(match (a, mono.is_empty()) {
                (_, true) => self.f.fmt_elem(a),
                (1, false) => mono,
                _ => format!("{}*{}", self.f.fmt_elem(a), mono),
            });
        }
        write!(out, "{}", parts.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn divrem_roundtrip() {
        let f = Field::get(3, 1).unwrap();
        let a = ThetaPoly::from_coeffs(f, vec![1, 2, 0, 1, 1]);
        let b = ThetaPoly::from_coeffs(f, vec![2, 1, 1]);
        let (q, r) = a.divrem(&b).unwrap();
        assert_eq!(q.mul(&b).add(&r), a);
        assert!(r.deg() < b.deg());
    }

    #[test]
    fn gcd_and_lcm() {
        let f = Field::get(2, 1).unwrap();
        let x = ThetaPoly::from_coeffs(f, vec![1, 1]);
        let y = ThetaPoly::from_coeffs(f, vec![1, 1, 1]);
        assert_eq!(x.mul(&y).gcd(&x.mul(&x)), x);
        assert_eq!(x.lcm(&y), x.mul(&y));
    }
}
