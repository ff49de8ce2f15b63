use std::collections::BTreeMap;
use std::fmt;

use super::field::Field;
use super::mpoly::{MPoly, Mono, NVARS};
use super::theta::ThetaPoly;
use crate::error::{Error, Result};

/// Binomial coefficient mod p by Lucas' theorem.
pub fn lucas_binom(mut n: u64, mut k: u64, p: u32) -> u32 {
    let p = p as u64;
    let mut r = 1u64;
    while n > 0 || k > 0 {
        let (a, b) = (n % p, k % p);
        if b > a {
            return 0;
        }
        // small binomial by multiplicative formula mod p
        let mut num = 1u64;
        let mut den = 1u64;
        for i in 0..b {
            num = num * (a - i) % p;
            den = den * (i + 1) % p;
        }
        r = r * num % p * inv_mod(den, p) % p;
        n /= p;
        k /= p;
    }
    r as u32
}

fn inv_mod(a: u64, p: u64) -> u64 {
    let mut r = 1;
    let (mut b, mut e) = (a % p, p - 2);
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r
}

/// binom(n, k) mod p for any integer n, using binom(-m, k) = (-1)^k binom(m+k-1, k).
pub fn gbinom(n: i64, k: u64, p: u32) -> u32 {
    if n >= 0 {
        return lucas_binom(n as u64, k, p);
    }
    let m = (-n) as u64;
    let b = lucas_binom(m + k - 1, k, p);
    if k % 2 == 1 && b != 0 {
        p - b
    } else {
        b
    }
}

/// Sum of base-`base` digits of n.
pub fn digit_sum(mut n: u64, base: u64) -> u64 {
    let mut s = 0;
    while n > 0 {
        s += n % base;
        n /= base;
    }
    s
}

/// Base-`base` digits of n, least significant first.
pub fn digits(mut n: u64, base: u64) -> Vec<u64> {
    let mut v = Vec::new();
    while n > 0 {
        v.push(n % base);
        n /= base;
    }
    v
}

/// Monic polynomials of degree d, counting with c_0 running fastest.
pub fn monic_polys(f: &'static Field, d: usize) -> Vec<ThetaPoly> {
    let fq = f.fq_elems();
    let q = fq.len();
    let count = q.pow(d as u32);
    (0..count)
        .map(|mut idx| {
            let mut c = Vec::with_capacity(d + 1);
            for _ in 0..d {
                c.push(fq[idx % q]);
                idx /= q;
            }
            c.push(1);
            ThetaPoly::from_coeffs(f, c)
        })
        .collect()
}

/// All polynomials of degree < d, including 0.
pub fn polys_below(f: &'static Field, d: usize) -> Vec<ThetaPoly> {
    let fq = f.fq_elems();
    let q = fq.len();
    (0..q.pow(d as u32))
        .map(|mut idx| {
            let mut c = Vec::with_capacity(d);
            for _ in 0..d {
                c.push(fq[idx % q]);
                idx /= q;
            }
            ThetaPoly::from_coeffs(f, c)
        })
        .collect()
}

/// a(t_i): θ replaced by t_i.
pub fn chi_substitute(a: &ThetaPoly, i: usize) -> Result<MPoly> {
    if i >= NVARS {
        return Err(Error::UnknownVariable(i));
    }
    if a.deg().unwrap_or(0) > 255 {
        return Err(Error::Overflow(format!("degree of {a} exceeds t-lane width")));
    }
    let terms = a.coeffs().iter().enumerate().map(|(j, &c)| (Mono::t(i, j as u32), c)).collect();
    Ok(MPoly::from_terms(a.field(), terms))
}

/// Coefficients [a, i] of the Carlitz action C_a = Σ [a,i] τ^i.
pub fn carlitz_coeffs(a: &ThetaPoly) -> Vec<ThetaPoly> {
    let f = a.field();
    let theta = ThetaPoly::theta_pow(f, 1);
    let d = match a.deg() {
        None => return Vec::new(),
        Some(d) => d,
    };
    let mut out = vec![ThetaPoly::zero(f); d + 1];
    // cur holds the coefficients of C_{θ^n}
    let mut cur = vec![ThetaPoly::one(f)];
    for n in 0..=d {
        let an = a.coeff(n);
        if an != 0 {
            for (i, c) in cur.iter().enumerate() {
                out[i] = out[i].add(&c.scale(an));
            }
        }
        let mut next = vec![ThetaPoly::zero(f); cur.len() + 1];
        for (i, c) in cur.iter().enumerate() {
            next[i] = next[i].add(&c.mul(&theta));
            next[i + 1] = next[i + 1].add(&c.pow_q());
        }
        cur = next;
    }
    out
}

/// Semi-character σ(a) = a^k Π χ_{t_i}(a)^{α_i}.
///
/// - `exps` maps a variable index to α_i
/// - `theta_pow` is the t-free factor a^k
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct SemiChar {
    exps: BTreeMap<usize, u32>,
    theta_pow: u32,
}

impl SemiChar {
    pub fn trivial() -> Self {
        Self::default()
    }
    pub fn chi(i: usize) -> Self {
        Self::from_vars(&[i])
    }
    /// σ_J for a set of variable indices.
    pub fn from_vars(vars: &[usize]) -> Self {
        let mut s = Self::default();
        for &v in vars {
            *s.exps.entry(v).or_insert(0) += 1;
        }
        s
    }
    pub fn from_exps(exps: BTreeMap<usize, u32>, theta_pow: u32) -> Self {
        let exps = exps.into_iter().filter(|e| e.1 > 0).collect();
        SemiChar { exps, theta_pow }
    }
    pub fn with_theta_pow(mut self, k: u32) -> Self {
        self.theta_pow = k;
        self
    }
    pub fn exps(&self) -> &BTreeMap<usize, u32> {
        &self.exps
    }
    pub fn theta_pow(&self) -> u32 {
        self.theta_pow
    }
    /// Total t-degree Σ α_i.
    pub fn degree(&self) -> u32 {
        self.exps.values().sum()
    }
    pub fn vars(&self) -> Vec<usize> {
        self.exps.keys().copied().collect()
    }
    pub fn is_trivial(&self) -> bool {
        self.exps.is_empty() && self.theta_pow == 0
    }
    pub fn mul(&self, o: &Self) -> Self {
        let mut exps = self.exps.clone();
        for (&k, &v) in &o.exps {
            *exps.entry(k).or_insert(0) += v;
        }
        SemiChar { exps, theta_pow: self.theta_pow + o.theta_pow }
    }
    pub fn validate(&self) -> Result<()> {
        match self.exps.keys().find(|&&i| i >= NVARS) {
            Some(&i) => Err(Error::UnknownVariable(i)),
            None => Ok(()),
        }
    }

    pub fn eval(&self, a: &ThetaPoly) -> Result<MPoly> {
        let f = a.field();
        let mut r = MPoly::from_theta_poly(&a.pow(self.theta_pow as u64));
        for (&i, &k) in &self.exps {
            r = r.mul(&chi_substitute(a, i)?.pow(k as u64));
        }
        Ok(if r.is_zero() { MPoly::zero(f) } else { r })
    }

    /// Grammar: `1`, `s{1,2}`, `s{1^2,3}`, optionally followed by `*a^k`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parse(format!("bad semi-character {s}"));
        let mut out = SemiChar::default();
        for fac in s.split('*') {
            let fac = fac.trim();
            if fac == "1" {
                continue;
            }
            if let Some(k) = fac.strip_prefix("a^") {
                out.theta_pow += k.parse::<u32>().map_err(|_| bad())?;
            } else if fac == "a" {
                out.theta_pow += 1;
            } else if let Some(body) = fac.strip_prefix("s{").and_then(|r| r.strip_suffix('}')) {
                for slot in body.split(',').map(str::trim).filter(|x| !x.is_empty()) {
                    let (v, k) = match slot.split_once('^') {
                        Some((v, k)) => (v, k.parse::<u32>().map_err(|_| bad())?),
                        None => (slot, 1),
                    };
                    let v: usize = v.trim().parse().map_err(|_| bad())?;
                    if v == 0 || v > NVARS {
                        return Err(Error::UnknownVariable(v));
                    }
                    *out.exps.entry(v - 1).or_insert(0) += k;
                }
            } else {
                return Err(bad());
            }
        }
        out.exps.retain(|_, v| *v > 0);
        Ok(out)
    }
}

impl fmt::Display for SemiChar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if !self.exps.is_empty() {
            let slots: Vec<String> = self
                .exps
                .iter()
                .map(|(&i, &k)| if k == 1 { format!("{}", i + 1) } else { format!("{}^{}", i + 1, k) })
                .collect();
            parts.push(format!("s{{{}}}", slots.join(",")));
        }
        if self.theta_pow > 0 {
            parts.push(format!("a^{}", self.theta_pow));
        }
        if parts.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", parts.join("*"))
        }
    }
}

impl fmt::Debug for SemiChar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// σ(a) for a semi-character.
pub fn semichar_eval(s: &SemiChar, a: &ThetaPoly) -> Result<MPoly> {
    s.eval(a)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lucas_matches_pascal() {
        for p in [2u32, 3, 5] {
            let mut row = vec![1u64];
            for n in 0..40u64 {
                for (k, &b) in row.iter().enumerate() {
                    assert_eq!(lucas_binom(n, k as u64, p) as u64, b % p as u64, "n={n} k={k}");
                }
                let mut next = vec![1u64; row.len() + 1];
                for k in 1..row.len() {
                    next[k] = (row[k - 1] + row[k]) % p as u64;
                }
                row = next;
            }
        }
    }

    #[test]
    fn negative_binomials() {
        // binom(-1, k) = (-1)^k
        for k in 0..6 {
            assert_eq!(gbinom(-1, k, 3), if k % 2 == 0 { 1 } else { 2 });
        }
        // binom(-2, 3) = -4
        assert_eq!(gbinom(-2, 3, 5), 1);
    }

    #[test]
    fn carlitz_action_of_theta_squared() {
        let f = Field::get(3, 1).unwrap();
        let a = ThetaPoly::theta_pow(f, 2);
        let c = carlitz_coeffs(&a);
        // C_{θ^2} = θ^2 + (θ + θ^q) τ + τ^2
        assert_eq!(c[0], ThetaPoly::theta_pow(f, 2));
        assert_eq!(c[1], ThetaPoly::theta_pow(f, 1).add(&ThetaPoly::theta_pow(f, 3)));
        assert!(c[2].is_one());
    }

    #[test]
    fn semichar_text() {
        let s = SemiChar::parse("s{1,2^2}*a^3").unwrap();
        assert_eq!(s.degree(), 3);
        assert_eq!(s.theta_pow(), 3);
        assert_eq!(SemiChar::parse(&s.to_string()).unwrap(), s);
        assert_eq!(SemiChar::parse("1").unwrap(), SemiChar::trivial());
        assert!(SemiChar::parse("s{0}").is_err());
    }
}
