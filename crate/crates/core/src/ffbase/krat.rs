use std::fmt;

use super::field::{Elem, Field};
use super::mpoly::MPoly;
use super::theta::ThetaPoly;
use crate::error::{Error, Result};

/// Element of K[t] with a t-free denominator, stored in lowest terms.
///
/// The denominator is monic and coprime to the θ-content of the numerator,
/// so structural equality is equality of values.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct KRat {
    num: MPoly,
    den: ThetaPoly,
}

impl KRat {
    pub fn zero(f: &'static Field) -> Self {
        KRat { num: MPoly::zero(f), den: ThetaPoly::one(f) }
    }
    pub fn one(f: &'static Field) -> Self {
        KRat { num: MPoly::one(f), den: ThetaPoly::one(f) }
    }
    pub fn constant(f: &'static Field, c: Elem) -> Self {
        KRat { num: MPoly::constant(f, c), den: ThetaPoly::one(f) }
    }
    pub fn from_poly(num: MPoly) -> Self {
        let f = num.field();
        KRat { num, den: ThetaPoly::one(f) }
    }
    pub fn from_theta_poly(p: &ThetaPoly) -> Self {
        Self::from_poly(MPoly::from_theta_poly(p))
    }
    pub fn new(num: MPoly, den: ThetaPoly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::reduce(num, den))
    }

    fn reduce(num: MPoly, den: ThetaPoly) -> Self {
        let f = num.field();
        if num.is_zero() {
            return Self::zero(f);
        }
        let lc = den.lead();
        let (mut num, mut den) = if lc != 1 {
            let li = f.inv(lc).expect("nonzero leading coefficient");
            (num.scale(li), den.scale(li))
        } else {
            (num, den)
        };
        if den.deg() == Some(0) {
            return KRat { num, den };
        }
        let g = num.theta_content().gcd(&den);
        if !g.is_one() {
            num = num.div_theta_poly_exact(&g).expect("content divides");
            den = den.div_exact(&g).expect("gcd divides");
        }
        KRat { num, den }
    }

    pub fn field(&self) -> &'static Field {
        self.num.field()
    }
    pub fn num(&self) -> &MPoly {
        &self.num
    }
    pub fn den(&self) -> &ThetaPoly {
        &self.den
    }
    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }
    pub fn is_t_free(&self) -> bool {
        self.num.is_t_free()
    }
    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn add(&self, o: &Self) -> Self {
        if o.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return o.clone();
        }
        if self.den == o.den {
            return Self::reduce(self.num.add(&o.num), self.den.clone());
        }
        let g = self.den.gcd(&o.den);
        let a = o.den.div_exact(&g).expect("gcd divides");
        let b = self.den.div_exact(&g).expect("gcd divides");
        let num = self.num.mul_theta_poly(&a).add(&o.num.mul_theta_poly(&b));
        Self::reduce(num, self.den.mul(&a))
    }
    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }
    pub fn neg(&self) -> Self {
        KRat { num: self.num.neg(), den: self.den.clone() }
    }
    pub fn scale(&self, c: Elem) -> Self {
        if c == 0 {
            return Self::zero(self.field());
        }
        KRat { num: self.num.scale(c), den: self.den.clone() }
    }
    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero(self.field());
        }
        if self.den.is_one() && o.den.is_one() {
            return KRat { num: self.num.mul(&o.num), den: self.den.clone() };
        }
        Self::reduce(self.num.mul(&o.num), self.den.mul(&o.den))
    }
    pub fn mul_poly(&self, p: &MPoly) -> Self {
        Self::reduce(self.num.mul(p), self.den.clone())
    }
    /// Inverse; only t-free elements are invertible.
    pub fn inv(&self) -> Result<Self> {
        let n = self.num.to_theta_poly().ok_or_else(|| Error::NonUnitLeading(format!("{self} is not t-free")))?;
        if n.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::reduce(MPoly::from_theta_poly(&self.den), n))
    }
    pub fn div(&self, o: &Self) -> Result<Self> {
        Ok(self.mul(&o.inv()?))
    }
    pub fn div_theta_poly(&self, d: &ThetaPoly) -> Result<Self> {
        if d.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::reduce(self.num.clone(), self.den.mul(d)))
    }
    pub fn pow(&self, k: u64) -> Self {
        KRat { num: self.num.pow(k), den: self.den.pow(k) }
    }
    /// Apply a map to the numerator that commutes with the reduction (t-substitutions).
    pub fn map_num(&self, g: impl Fn(&MPoly) -> MPoly) -> Self {
        Self::reduce(g(&self.num), self.den.clone())
    }
    /// θ ↦ θ^{q^m}, coefficients x ↦ x^{q^m}.
    pub fn twist_theta(&self, m: u32) -> Self {
        let den = MPoly::from_theta_poly(&self.den).twist_theta(m).to_theta_poly().expect("t-free");
        Self::reduce(self.num.twist_theta(m), den)
    }
}

impl fmt::Display for KRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

impl fmt::Debug for KRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduces_to_lowest_terms() {
        let f = Field::get(3, 1).unwrap();
        let th = ThetaPoly::theta_pow(f, 1);
        let a = KRat::new(MPoly::parse(f, "t1*theta + theta^2").unwrap(), th.mul(&th)).unwrap();
        assert_eq!(a.den(), &th);
        assert_eq!(a.num(), &MPoly::parse(f, "t1 + theta").unwrap());
        let inv = KRat::from_theta_poly(&th).inv().unwrap();
        assert!(inv.mul(&KRat::from_theta_poly(&th)).is_one());
        let s = a.add(&a.neg());
        assert!(s.is_zero());
    }
}
