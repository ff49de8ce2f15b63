use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Mutex, OnceLock};

use crate::error::{Error, Result};

/// Index of an element of the ambient field. The base-p digits of the index
/// are the coordinates over F_p, so `0..p` are the prime-field elements.
pub type Elem = u16;

const MAX_SIZE: usize = 1 << 12;

/// Table-driven finite field F_{q^κ} containing F_q, q = p^e.
///
/// κ is 2 for odd p (so that a (q-1)-th root of -1 exists) and 1 for p = 2.
pub struct Field {
    pub p: u32,
    pub e: u32,
    pub q: u32,
    kappa: u32,
    deg: u32,
    size: usize,
    modulus: Vec<u32>,
    add: Vec<Elem>,
    mul: Vec<Elem>,
    neg: Vec<Elem>,
    inv: Vec<Elem>,
    frob: Vec<Elem>,
    fq: Vec<Elem>,
    xi: Elem,
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.e == other.e
    }
}
impl Eq for Field {}

impl Hash for Field {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.p.hash(state);
        self.e.hash(state);
    }
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}^{} (ambient degree {})", self.p, self.e, self.kappa)
    }
}

fn is_prime(p: u32) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

// polynomial helpers over F_p on coefficient vectors (low degree first)
fn trim(v: &mut Vec<u32>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

fn poly_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let mut r = a.to_vec();
    trim(&mut r);
    let dm = m.len() - 1;
    let lead_inv = pow_mod(m[dm], p - 2, p);
    while r.len() > dm {
        let shift = r.len() - 1 - dm;
        let c = r[r.len() - 1] * lead_inv % p;
        for (i, &mi) in m.iter().enumerate() {
            r[shift + i] = (r[shift + i] + p * p - c * mi % p) % p;
        }
        trim(&mut r);
    }
    r
}

fn pow_mod(mut b: u32, mut k: u32, p: u32) -> u32 {
    let mut r = 1 % p;
    b %= p;
    while k > 0 {
        if k & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        k >>= 1;
    }
    r
}

fn digits_of(mut n: usize, p: u32, len: usize) -> Vec<u32> {
    let mut v = Vec::with_capacity(len);
    for _ in 0..len {
        v.push((n % p as usize) as u32);
        n /= p as usize;
    }
    v
}

fn index_of(c: &[u32], p: u32) -> usize {
    c.iter().rev().fold(0usize, |acc, &d| acc * p as usize + d as usize)
}

/// Lexicographically smallest monic irreducible polynomial of degree `n` over
/// F_p, ordered by the integer whose base-p digits are (c_0, .., c_{n-1}).
fn smallest_irreducible(p: u32, n: u32) -> Vec<u32> {
    if n == 1 {
        return vec![0, 1];
    }
    let count = (p as usize).pow(n);
    'cand: for idx in 0..count {
        let mut f = digits_of(idx, p, n as usize);
        f.push(1);
        if f[0] == 0 {
            continue;
        }
        for dg in 1..=n / 2 {
            for gidx in 0..(p as usize).pow(dg) {
                let mut g = digits_of(gidx, p, dg as usize);
                g.push(1);
                if poly_rem(&f, &g, p).is_empty() {
                    continue 'cand;
                }
            }
        }
        return f;
    }
    unreachable!("irreducible polynomials exist in every degree")
}

static REGISTRY: OnceLock<Mutex<HashMap<(u32, u32), &'static Field>>> = OnceLock::new();

impl Field {
    /// Memoized field for q = p^e.
    pub fn get(p: u32, e: u32) -> Result<&'static Field> {
        let reg = REGISTRY.get_or_init(|| Mutex::new(HashMap::new()));
        let mut map = reg.lock().expect("field registry poisoned");
        if let Some(f) = map.get(&(p, e)) {
            return Ok(f);
        }
        let f: &'static Field = Box::leak(Box::new(Field::build(p, e)?));
        map.insert((p, e), f);
        Ok(f)
    }

    fn build(p: u32, e: u32) -> Result<Field> {
        let bad = |reason: &str| Error::FieldParams { p, e, reason: reason.to_string() };
        if !is_prime(p) {
            return Err(bad("p must be prime"));
        }
        if e == 0 {
            return Err(bad("e must be positive"));
        }
        let kappa = if p == 2 { 1 } else { 2 };
        let deg = e * kappa;
        let size = (p as usize)
            .checked_pow(deg)
            .filter(|&s| s <= MAX_SIZE)
            .ok_or_else(|| bad("ambient field too large for table arithmetic"))?;
        let q = p.pow(e);
        let modulus = smallest_irreducible(p, deg);
        let n = deg as usize;
        let coords: Vec<Vec<u32>> = (0..size).map(|i| digits_of(i, p, n)).collect();

        let mut add = vec![0; size * size];
        let mut mul = vec![0; size * size];
        for a in 0..size {
            for b in 0..size {
                let s: Vec<u32> = coords[a].iter().zip(&coords[b]).map(|(x, y)| (x + y) % p).collect();
                add[a * size + b] = index_of(&s, p) as Elem;
                let mut prod = vec![0u32; 2 * n];
                for (i, x) in coords[a].iter().enumerate() {
                    for (j, y) in coords[b].iter().enumerate() {
                        prod[i + j] = (prod[i + j] + x * y) % p;
                    }
                }
                let r = poly_rem(&prod, &modulus, p);
                mul[a * size + b] = index_of(&r, p) as Elem;
            }
        }
        let neg: Vec<Elem> = (0..size)
            .map(|a| {
                let s: Vec<u32> = coords[a].iter().map(|x| (p - x) % p).collect();
                index_of(&s, p) as Elem
            })
            .collect();
        let mut inv = vec![0; size];
        for a in 1..size {
            inv[a] = (1..size).find(|&b| mul[a * size + b] == 1).expect("field inverse") as Elem;
        }
        let mut f = Field {
            p,
            e,
            q,
            kappa,
            deg,
            size,
            modulus,
            add,
            mul,
            neg,
            inv,
            frob: Vec::new(),
            fq: Vec::new(),
            xi: 0,
        };
        f.frob = (0..size).map(|a| f.pow(a as Elem, q as u64)).collect();
        f.fq = (0..size as Elem).filter(|&a| f.frob[a as usize] == a).collect();
        let minus_one = f.neg(1);
        f.xi = (1..size as Elem)
            .find(|&x| f.pow(x, (q - 1) as u64) == minus_one)
            .ok_or_else(|| bad("no (q-1)-th root of -1 in ambient field"))?;
        Ok(f)
    }

    /// Number of elements of the ambient field.
    pub fn size(&self) -> usize {
        self.size
    }
    /// Degree of the ambient field over F_q.
    pub fn kappa(&self) -> u32 {
        self.kappa
    }
    /// Degree of the ambient field over F_p.
    pub fn degree(&self) -> u32 {
        self.deg
    }
    /// Defining polynomial of the ambient field over F_p (low degree first).
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }
    /// Elements of F_q in ascending index order.
    pub fn fq_elems(&self) -> &[Elem] {
        &self.fq
    }
    /// Fixed element with ξ^{q-1} = -1.
    pub fn xi(&self) -> Elem {
        self.xi
    }

    #[inline]
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        self.add[a as usize * self.size + b as usize]
    }
    #[inline]
    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg[b as usize])
    }
    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        self.mul[a as usize * self.size + b as usize]
    }
    #[inline]
    pub fn neg(&self, a: Elem) -> Elem {
        self.neg[a as usize]
    }
    pub fn inv(&self, a: Elem) -> Result<Elem> {
        if a == 0 {
            Err(Error::DivisionByZero)
        } else {
            Ok(self.inv[a as usize])
        }
    }
    pub fn div(&self, a: Elem, b: Elem) -> Result<Elem> {
        Ok(self.mul(a, self.inv(b)?))
    }
    pub fn pow(&self, mut b: Elem, mut k: u64) -> Elem {
        let mut r: Elem = 1;
        while k > 0 {
            if k & 1 == 1 {
                r = self.mul(r, b);
            }
            b = self.mul(b, b);
            k >>= 1;
        }
        r
    }
    /// x ↦ x^{q^k}; negative k inverts, using that x^{q^κ} = x.
    pub fn frob(&self, a: Elem, k: i64) -> Elem {
        let m = k.rem_euclid(self.kappa as i64);
        (0..m).fold(a, |x, _| self.frob[x as usize])
    }
    pub fn in_fq(&self, a: Elem) -> bool {
        self.frob[a as usize] == a
    }
    /// Image of an integer in the prime field.
    pub fn from_int(&self, n: i64) -> Elem {
        n.rem_euclid(self.p as i64) as Elem
    }
    /// Coordinates over F_p.
    pub fn coords(&self, a: Elem) -> Vec<u32> {
        digits_of(a as usize, self.p, self.deg as usize)
    }
    pub fn from_coords(&self, c: &[u32]) -> Result<Elem> {
        if c.len() > self.deg as usize || c.iter().any(|&x| x >= self.p) {
            return Err(Error::Parse(format!("bad coordinate vector {c:?}")));
        }
        Ok(index_of(c, self.p) as Elem)
    }

    /// Integers for prime-field elements, `[c0,c1,..]` otherwise.
    pub fn fmt_elem(&self, a: Elem) -> String {
        if (a as u32) < self.p {
            a.to_string()
        } else {
            let c = self.coords(a);
            let body: Vec<String> = c.iter().map(|x| x.to_string()).collect();
            format!("[{}]", body.join(","))
        }
    }

    pub fn parse_elem(&self, s: &str) -> Result<Elem> {
        let s = s.trim();
        if let Some(inner) = s.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            let c = inner
                .split(',')
                .map(|x| x.trim().parse::<u32>().map_err(|_| Error::Parse(format!("bad element {s}"))))
                .collect::<Result<Vec<_>>>()?;
            return self.from_coords(&c);
        }
        let n: i64 = s.parse().map_err(|_| Error::Parse(format!("bad element {s}")))?;
        Ok(self.from_int(n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axioms_small_fields() {
        for &(p, e) in &[(2, 1), (2, 2), (3, 1), (5, 1), (2, 3)] {
            let f = Field::get(p, e).unwrap();
            let n = f.size() as Elem;
            for a in 0..n {
                assert_eq!(f.add(a, f.neg(a)), 0);
                if a != 0 {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
                }
                for b in 0..n {
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    for c in 0..n {
                        assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                    }
                }
            }
            assert_eq!(f.fq_elems().len(), f.q as usize);
            assert_eq!(f.pow(f.xi(), (f.q - 1) as u64), f.neg(1));
        }
    }

    #[test]
    fn prime_subfield_is_initial_segment() {
        let f = Field::get(3, 1).unwrap();
        for a in 0..3u16 {
            assert!(f.in_fq(a));
        }
        assert_eq!(f.fmt_elem(2), "2");
        assert_eq!(f.parse_elem(&f.fmt_elem(f.xi())).unwrap(), f.xi());
        // τ acts nontrivially on ξ
        assert_eq!(f.frob(f.xi(), 1), f.neg(f.xi()));
    }

    #[test]
    fn rejects_bad_params() {
        assert!(Field::get(4, 1).is_err());
        assert!(Field::get(3, 0).is_err());
    }
}
