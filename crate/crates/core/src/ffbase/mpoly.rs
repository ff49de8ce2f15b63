use std::cmp::Ordering;
use std::fmt;

use rustc_hash::FxHashMap;

use super::field::{Elem, Field};
use super::theta::ThetaPoly;
use crate::error::{Error, Result};

/// Number of t-variables a monomial can carry.
pub const NVARS: usize = 12;

const T_BITS: u32 = 8;
const THETA_SHIFT: u32 = 96;
const T_MASK: u128 = (1u128 << THETA_SHIFT) - 1;
const HIGH: u128 = {
    let mut h = 1u128 << 127;
    let mut i = 0;
    while i < NVARS {
        h |= 1u128 << (T_BITS * i as u32 + T_BITS - 1);
        i += 1;
    }
    h
};

/// Packed monomial t_0^{a_0}..t_11^{a_11} θ^k: 8 bits per t-lane, 32 bits for θ.
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Debug)]
pub struct Mono(pub u128);

impl Mono {
    pub const ONE: Mono = Mono(0);

    pub fn theta(k: u32) -> Mono {
        Mono((k as u128) << THETA_SHIFT)
    }
    pub fn t(i: usize, k: u32) -> Mono {
        assert!(i < NVARS && k < 256, "t-exponent out of range");
        Mono((k as u128) << (T_BITS * i as u32))
    }
    pub fn t_exp(self, i: usize) -> u32 {
        ((self.0 >> (T_BITS * i as u32)) & 0xff) as u32
    }
    pub fn theta_exp(self) -> u32 {
        (self.0 >> THETA_SHIFT) as u32
    }
    /// The t-part with θ stripped.
    pub fn t_part(self) -> Mono {
        Mono(self.0 & T_MASK)
    }
    pub fn with_theta(self, k: u32) -> Mono {
        Mono((self.0 & T_MASK) | ((k as u128) << THETA_SHIFT))
    }
    pub fn with_t(self, i: usize, k: u32) -> Mono {
        let sh = T_BITS * i as u32;
        Mono((self.0 & !(0xffu128 << sh)) | Mono::t(i, k).0)
    }
    pub fn t_degree(self) -> u32 {
        (0..NVARS).map(|i| self.t_exp(i)).sum()
    }
    pub fn is_t_free(self) -> bool {
        self.0 & T_MASK == 0
    }

    /// Product, or None if some lane overflows.
    #[inline]
    pub fn checked_mul(self, o: Mono) -> Option<Mono> {
        let (a, b) = (self.0, o.0);
        let low = (a & !HIGH) + (b & !HIGH);
        let carry = ((a & b) | ((a | b) & low)) & HIGH;
        if carry != 0 {
            None
        } else {
            Some(Mono(low ^ ((a ^ b) & HIGH)))
        }
    }

    /// Panics on lane overflow.
    #[inline]
    pub fn mul(self, o: Mono) -> Mono {
        self.checked_mul(o).expect("monomial exponent overflow")
    }

    fn exps(self) -> [u32; NVARS + 1] {
        let mut v = [0; NVARS + 1];
        for (i, slot) in v.iter_mut().enumerate().take(NVARS) {
            *slot = self.t_exp(i);
        }
        v[NVARS] = self.theta_exp();
        v
    }

    /// Graded lexicographic comparison on (t_1, .., t_12, θ).
    pub fn grlex(self, o: Mono) -> Ordering {
        let (a, b) = (self.exps(), o.exps());
        let (da, db): (u64, u64) = (a.iter().map(|&x| x as u64).sum(), b.iter().map(|&x| x as u64).sum());
        da.cmp(&db).then_with(|| a.cmp(&b))
    }
}

/// Hash accumulator for sums of many monomial terms.
pub struct Accum {
    f: &'static Field,
    map: FxHashMap<u128, Elem>,
}

impl Accum {
    pub fn new(f: &'static Field) -> Self {
        Accum { f, map: FxHashMap::default() }
    }
    #[inline]
    pub fn add(&mut self, m: Mono, c: Elem) {
        if c == 0 {
            return;
        }
        let f = self.f;
        let e = self.map.entry(m.0).or_insert(0);
        *e = f.add(*e, c);
    }
    pub fn add_poly(&mut self, p: &MPoly, scale: Elem) {
        for &(m, c) in &p.terms {
            self.add(m, self.f.mul(c, scale));
        }
    }
    /// Accumulate the product a*b.
    pub fn add_product(&mut self, a: &MPoly, b: &MPoly) {
        let f = self.f;
        for &(m1, c1) in &a.terms {
            for &(m2, c2) in &b.terms {
                self.add(m1.mul(m2), f.mul(c1, c2));
            }
        }
    }
    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
    pub fn take(&mut self) -> MPoly {
        let mut terms: Vec<(Mono, Elem)> = self.map.drain().filter(|&(_, c)| c != 0).map(|(m, c)| (Mono(m), c)).collect();
        terms.sort_unstable_by_key(|t| t.0);
        MPoly { f: self.f, terms }
    }
}

/// Sparse polynomial in t_0..t_11 and θ over the ambient field.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MPoly {
    f: &'static Field,
    terms: Vec<(Mono, Elem)>,
}

/// Polynomials in the t-variables only.
pub type TPoly = MPoly;
/// Polynomials in the t-variables and θ.
pub type MixedPoly = MPoly;

impl MPoly {
    pub fn zero(f: &'static Field) -> Self {
        MPoly { f, terms: Vec::new() }
    }
    pub fn one(f: &'static Field) -> Self {
        Self::constant(f, 1)
    }
    pub fn constant(f: &'static Field, c: Elem) -> Self {
        Self::monomial(f, Mono::ONE, c)
    }
    pub fn monomial(f: &'static Field, m: Mono, c: Elem) -> Self {
        let terms = if c == 0 { Vec::new() } else { vec![(m, c)] };
        MPoly { f, terms }
    }
    pub fn var_t(f: &'static Field, i: usize) -> Result<Self> {
        if i >= NVARS {
            return Err(Error::UnknownVariable(i));
        }
        Ok(Self::monomial(f, Mono::t(i, 1), 1))
    }
    pub fn theta(f: &'static Field) -> Self {
        Self::monomial(f, Mono::theta(1), 1)
    }
    /// Terms must be distinct monomials; they are sorted here.
    pub fn from_terms(f: &'static Field, mut terms: Vec<(Mono, Elem)>) -> Self {
        terms.retain(|t| t.1 != 0);
        terms.sort_unstable_by_key(|t| t.0);
        let mut out: Vec<(Mono, Elem)> = Vec::with_capacity(terms.len());
        for (m, c) in terms {
            match out.last_mut() {
                Some(last) if last.0 == m => last.1 = f.add(last.1, c),
                _ => out.push((m, c)),
            }
        }
        out.retain(|t| t.1 != 0);
        MPoly { f, terms: out }
    }
    pub fn from_theta_poly(p: &ThetaPoly) -> Self {
        let terms = p.coeffs().iter().enumerate().filter(|t| *t.1 != 0).map(|(i, &c)| (Mono::theta(i as u32), c)).collect();
        MPoly { f: p.field(), terms }
    }

    pub fn field(&self) -> &'static Field {
        self.f
    }
    pub fn terms(&self) -> &[(Mono, Elem)] {
        &self.terms
    }
    pub fn len(&self) -> usize {
        self.terms.len()
    }
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    pub fn is_one(&self) -> bool {
        self.terms == [(Mono::ONE, 1)]
    }
    /// Constant term value if the polynomial is constant.
    pub fn as_constant(&self) -> Option<Elem> {
        match self.terms.as_slice() {
            [] => Some(0),
            [(m, c)] if *m == Mono::ONE => Some(*c),
            _ => None,
        }
    }
    pub fn coeff(&self, m: Mono) -> Elem {
        self.terms.binary_search_by_key(&m, |t| t.0).map(|i| self.terms[i].1).unwrap_or(0)
    }
    pub fn is_t_free(&self) -> bool {
        self.terms.iter().all(|t| t.0.is_t_free())
    }
    pub fn to_theta_poly(&self) -> Option<ThetaPoly> {
        if !self.is_t_free() {
            return None;
        }
        let n = self.terms.last().map(|t| t.0.theta_exp() as usize + 1).unwrap_or(0);
        let mut c = vec![0; n];
        for &(m, a) in &self.terms {
            c[m.theta_exp() as usize] = a;
        }
        Some(ThetaPoly::from_coeffs(self.f, c))
    }

    fn merge(&self, o: &Self, neg: bool) -> Self {
        let f = self.f;
        let mut out = Vec::with_capacity(self.terms.len() + o.terms.len());
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.terms, &o.terms);
        let tr = |c: Elem| if neg { f.neg(c) } else { c };
        while i < a.len() || j < b.len() {
            if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
                out.push(a[i]);
                i += 1;
            } else if i == a.len() || b[j].0 < a[i].0 {
                out.push((b[j].0, tr(b[j].1)));
                j += 1;
            } else {
                let c = f.add(a[i].1, tr(b[j].1));
                if c != 0 {
                    out.push((a[i].0, c));
                }
                i += 1;
                j += 1;
            }
        }
        MPoly { f, terms: out }
    }
    pub fn add(&self, o: &Self) -> Self {
        self.merge(o, false)
    }
    pub fn sub(&self, o: &Self) -> Self {
        self.merge(o, true)
    }
    pub fn neg(&self) -> Self {
        MPoly { f: self.f, terms: self.terms.iter().map(|&(m, c)| (m, self.f.neg(c))).collect() }
    }
    pub fn scale(&self, a: Elem) -> Self {
        if a == 0 {
            return Self::zero(self.f);
        }
        MPoly { f: self.f, terms: self.terms.iter().map(|&(m, c)| (m, self.f.mul(c, a))).collect() }
    }
    /// Multiply by c·m. Order is preserved since monomial multiplication is monotone.
    pub fn mul_term(&self, m: Mono, c: Elem) -> Self {
        if c == 0 {
            return Self::zero(self.f);
        }
        MPoly { f: self.f, terms: self.terms.iter().map(|&(n, a)| (n.mul(m), self.f.mul(a, c))).collect() }
    }
    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero(self.f);
        }
        if self.terms.len() == 1 {
            return o.mul_term(self.terms[0].0, self.terms[0].1);
        }
        if o.terms.len() == 1 {
            return self.mul_term(o.terms[0].0, o.terms[0].1);
        }
        let mut acc = Accum::new(self.f);
        acc.add_product(self, o);
        acc.take()
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
    pub fn mul_theta_poly(&self, p: &ThetaPoly) -> Self {
        self.mul(&Self::from_theta_poly(p))
    }

    /// Largest exponent appearing in each lane (t_0..t_11, then θ).
    pub fn max_degrees(&self) -> [u32; NVARS + 1] {
        let mut d = [0; NVARS + 1];
        for &(m, _) in &self.terms {
            for (i, x) in m.exps().iter().enumerate() {
                d[i] = d[i].max(*x);
            }
        }
        d
    }
    pub fn theta_degree(&self) -> Option<u32> {
        self.terms.iter().map(|t| t.0.theta_exp()).max()
    }
    pub fn t_degree(&self) -> u32 {
        self.terms.iter().map(|t| t.0.t_degree()).max().unwrap_or(0)
    }

    /// Group terms by t-part, each group a polynomial in θ.
    pub fn by_t_part(&self) -> Vec<(Mono, ThetaPoly)> {
        let mut groups: Vec<(Mono, Vec<(u32, Elem)>)> = Vec::new();
        let mut sorted: Vec<(Mono, Elem)> = self.terms.clone();
        sorted.sort_by_key(|t| (t.0.t_part(), t.0.theta_exp()));
        for (m, c) in sorted {
            let tp = m.t_part();
            match groups.last_mut() {
                Some(g) if g.0 == tp => g.1.push((m.theta_exp(), c)),
                _ => groups.push((tp, vec![(m.theta_exp(), c)])),
            }
        }
        groups
            .into_iter()
            .map(|(tp, v)| {
                let n = v.last().map(|x| x.0 as usize + 1).unwrap_or(0);
                let mut c = vec![0; n];
                for (k, a) in v {
                    c[k as usize] = a;
                }
                (tp, ThetaPoly::from_coeffs(self.f, c))
            })
            .collect()
    }
    pub fn from_t_parts(f: &'static Field, parts: &[(Mono, ThetaPoly)]) -> Self {
        let mut terms = Vec::new();
        for (tp, p) in parts {
            for (k, &c) in p.coeffs().iter().enumerate() {
                if c != 0 {
                    terms.push((tp.with_theta(k as u32), c));
                }
            }
        }
        Self::from_terms(f, terms)
    }
    /// Monic gcd of the θ-polynomials attached to each t-monomial.
    pub fn theta_content(&self) -> ThetaPoly {
        let mut g = ThetaPoly::zero(self.f);
        for (_, p) in self.by_t_part() {
            g = g.gcd(&p);
            if g.is_one() {
                break;
            }
        }
        g
    }
    pub fn div_theta_poly_exact(&self, d: &ThetaPoly) -> Result<Self> {
        if d.is_one() {
            return Ok(self.clone());
        }
        let parts = self
            .by_t_part()
            .into_iter()
            .map(|(tp, p)| Ok((tp, p.div_exact(d)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_t_parts(self.f, &parts))
    }

    /// Coefficientwise x ↦ x^{q^k}.
    pub fn frob_coeffs(&self, k: i64) -> Self {
        MPoly { f: self.f, terms: self.terms.iter().map(|&(m, c)| (m, self.f.frob(c, k))).collect() }
    }
    /// θ ↦ θ^{q^m} together with coefficients x ↦ x^{q^m} (t fixed).
    pub fn twist_theta(&self, m: u32) -> Self {
        let s = (self.f.q as u64).pow(m);
        let terms = self
            .terms
            .iter()
            .map(|&(mo, c)| {
                let k = mo.theta_exp() as u64 * s;
                let k = u32::try_from(k).expect("theta exponent overflow");
                (mo.with_theta(k), self.f.frob(c, m as i64))
            })
            .collect();
        Self::from_terms(self.f, terms)
    }
    /// t_i ↦ θ^k.
    pub fn specialize_t(&self, i: usize, k: u32) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|&(m, c)| {
                let d = m.t_exp(i);
                (m.with_t(i, 0).mul(Mono::theta(d * k)), c)
            })
            .collect();
        Self::from_terms(self.f, terms)
    }
    /// t_i ↦ g.
    pub fn subst_t(&self, i: usize, g: &MPoly) -> Self {
        let maxd = self.max_degrees()[i] as usize;
        let mut pows = vec![Self::one(self.f)];
        for _ in 0..maxd {
            let nxt = pows.last().expect("nonempty").mul(g);
            pows.push(nxt);
        }
        let mut acc = Accum::new(self.f);
        for &(m, c) in &self.terms {
            let rest = m.with_t(i, 0);
            for &(n, a) in &pows[m.t_exp(i) as usize].terms {
                acc.add(rest.mul(n), self.f.mul(a, c));
            }
        }
        acc.take()
    }
    /// θ ↦ x for an element x of the ambient field.
    pub fn eval_theta(&self, x: Elem) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|&(m, c)| (m.with_theta(0), self.f.mul(c, self.f.pow(x, m.theta_exp() as u64))))
            .collect();
        Self::from_terms(self.f, terms)
    }
    /// Keep only terms with θ-exponent equal to k, returned t-only.
    pub fn theta_slice(&self, k: u32) -> Self {
        let terms = self.terms.iter().filter(|t| t.0.theta_exp() == k).map(|&(m, c)| (m.with_theta(0), c)).collect();
        Self::from_terms(self.f, terms)
    }

    pub fn parse(f: &'static Field, s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::Parse("empty polynomial".into()));
        }
        let mut pieces: Vec<(bool, String)> = Vec::new();
        let mut cur = String::new();
        let mut neg = false;
        let mut depth = 0;
        for ch in s.chars() {
            match ch {
                '[' => {
                    depth += 1;
                    cur.push(ch)
                }
                ']' => {
                    depth -= 1;
                    cur.push(ch)
                }
                '+' | '-' if depth == 0 => {
                    if !cur.trim().is_empty() {
                        pieces.push((neg, std::mem::take(&mut cur)));
                        neg = false;
                    }
                    if ch == '-' {
                        neg = !neg;
                    }
                }
                _ => cur.push(ch),
            }
        }
        if cur.trim().is_empty() {
            return Err(Error::Parse(format!("dangling sign in {s}")));
        }
        pieces.push((neg, cur));
        let mut acc = Self::zero(f);
        for (neg, piece) in pieces {
            let mut c: Elem = 1;
            let mut m = Mono::ONE;
            for fac in piece.split('*') {
                let fac = fac.trim();
                let (base, exp) = match fac.split_once('^') {
                    Some((b, e)) => (b.trim(), e.trim().parse::<u32>().map_err(|_| Error::Parse(format!("bad exponent in {fac}")))?),
                    None => (fac, 1),
                };
                if base == "theta" {
                    m = m.checked_mul(Mono::theta(exp)).ok_or_else(|| Error::Overflow(fac.into()))?;
                } else if let Some(idx) = base.strip_prefix('t') {
                    let i: usize = idx.parse().map_err(|_| Error::Parse(format!("bad variable {base}")))?;
                    if i == 0 || i > NVARS {
                        return Err(Error::UnknownVariable(i));
                    }
                    if exp > 255 {
                        return Err(Error::Overflow(fac.into()));
                    }
                    m = m.checked_mul(Mono::t(i - 1, exp)).ok_or_else(|| Error::Overflow(fac.into()))?;
                } else {
                    let a = f.parse_elem(base)?;
                    c = f.mul(c, f.pow(a, exp as u64));
                }
            }
            if neg {
                c = f.neg(c);
            }
            acc = acc.add(&Self::monomial(f, m, c));
        }
        Ok(acc)
    }
}

fn fmt_mono(m: Mono) -> String {
    let mut parts = Vec::new();
    for i in 0..NVARS {
        match m.t_exp(i) {
            0 => {}
            1 => parts.push(format!("t{}", i + 1)),
            k => parts.push(format!("t{}^{}", i + 1, k)),
        }
    }
    match m.theta_exp() {
        0 => {}
        1 => parts.push("theta".into()),
        k => parts.push(format!("theta^{k}")),
    }
    parts.join("*")
}

impl fmt::Display for MPoly {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(out, "0");
        }
        let mut ts = self.terms.clone();
        ts.sort_by(|a, b| b.0.grlex(a.0));
        let parts: Vec<String> = ts
            .iter()
            .map(|&(m, c)| {
                let ms = fmt_mono(m);
                match (c, ms.is_empty()) {
                    (_, true) => self.f.fmt_elem(c),
                    (1, false) => ms,
                    _ => format!("{}*{}", self.f.fmt_elem(c), ms),
                }
            })
            .collect();
        write!(out, "{}", parts.join(" + "))
    }
}

impl fmt::Debug for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mono_overflow_detection() {
        assert!(Mono::t(0, 200).checked_mul(Mono::t(0, 100)).is_none());
        assert_eq!(Mono::t(0, 100).checked_mul(Mono::t(0, 100)), Some(Mono::t(0, 200)));
        assert!(Mono::t(11, 128).checked_mul(Mono::t(11, 128)).is_none());
        let big = Mono::theta(u32::MAX);
        assert!(big.checked_mul(Mono::theta(1)).is_none());
        let m = Mono::t(3, 5).mul(Mono::theta(7)).mul(Mono::t(3, 2));
        assert_eq!((m.t_exp(3), m.theta_exp()), (7, 7));
    }

    #[test]
    fn parse_print_roundtrip() {
        let f = Field::get(3, 1).unwrap();
        let p = MPoly::parse(f, "t1^2*theta + 2*t2 - theta^3 + 1").unwrap();
        let back = MPoly::parse(f, &p.to_string()).unwrap();
        assert_eq!(p, back);
        assert_eq!(p.coeff(Mono::theta(3)), 2);
    }

    #[test]
    fn ring_laws_on_sample() {
        let f = Field::get(2, 1).unwrap();
        let a = MPoly::parse(f, "t1 + theta").unwrap();
        let b = MPoly::parse(f, "t1 + 1").unwrap();
        let c = a.mul(&b);
        assert_eq!(c, MPoly::parse(f, "t1^2 + t1 + t1*theta + theta").unwrap());
        assert_eq!(a.pow(2), MPoly::parse(f, "t1^2 + theta^2").unwrap());
        assert_eq!(c.theta_content(), ThetaPoly::one(f));
    }
}
