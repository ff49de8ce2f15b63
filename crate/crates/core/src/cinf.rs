//! Truncated Puiseux series in X = θ^{-1} as a model of C_∞ and its Tate algebras.
//!
//! - [`PSeries`]: Σ c_n X^{n/D} with t-polynomial coefficients and a precision bound
//! - [`pitilde`], [`omega`]: the Carlitz period and the Anderson–Thakur function
//! - [`exp_c`], [`log_c`]: Carlitz exponential and logarithm with certified tails
//! - [`SamplePoint`], [`u_eval`]: points of the Drinfeld half-plane and the uniformizer
//!
//! Precisions and exponents are stored as numerators over the series denominator D.
//! A precision of `None` means the series is exact.

use std::collections::BTreeMap;
use std::fmt;

use num_integer::Integer;
use num_rational::Rational64;
use rustc_hash::FxHashMap;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::ffbase::{Elem, Field, KRat, MPoly, Mono, ThetaPoly};

/// Default exponent denominator p²(q−1).
pub fn default_den(f: &Field) -> u32 {
    f.p * f.p * (f.q - 1).max(1)
}

fn min_prec(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

/// Truncated series Σ c_n X^{n/D}, X = θ^{-1}.
#[derive(Clone, PartialEq, Eq)]
pub struct PSeries {
    f: &'static Field,
    den: u32,
    terms: BTreeMap<i64, MPoly>,
    prec: Option<i64>,
}

impl PSeries {
    pub fn zero(f: &'static Field, den: u32) -> Self {
        PSeries { f, den, terms: BTreeMap::new(), prec: None }
    }
    /// Zero known only below X^{prec/D}.
    pub fn zero_to(f: &'static Field, den: u32, prec: i64) -> Self {
        PSeries { f, den, terms: BTreeMap::new(), prec: Some(prec) }
    }
    pub fn one(f: &'static Field, den: u32) -> Self {
        Self::monomial(f, den, 0, MPoly::one(f))
    }
    /// c·X^{n/D}.
    pub fn monomial(f: &'static Field, den: u32, n: i64, c: MPoly) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(n, c);
        }
        PSeries { f, den, terms, prec: None }
    }
    pub fn constant(c: MPoly, den: u32) -> Self {
        Self::monomial(c.field(), den, 0, c)
    }
    /// A polynomial in t and θ, with θ^k read as X^{-k}.
    pub fn from_mixed(p: &MPoly, den: u32) -> Self {
        let f = p.field();
        let mut terms: BTreeMap<i64, Vec<(Mono, Elem)>> = BTreeMap::new();
        for &(m, c) in p.terms() {
            terms.entry(-(m.theta_exp() as i64) * den as i64).or_default().push((m.with_theta(0), c));
        }
        let terms = terms.into_iter().map(|(k, v)| (k, MPoly::from_terms(f, v))).collect();
        PSeries { f, den, terms, prec: None }
    }
    pub fn from_theta_poly(p: &ThetaPoly, den: u32) -> Self {
        Self::from_mixed(&MPoly::from_theta_poly(p), den)
    }
    /// Expansion of num/den with absolute precision `prec` (numerator units).
    pub fn from_krat(r: &KRat, den: u32, prec: i64) -> Result<Self> {
        let num = Self::from_mixed(r.num(), den);
        if r.den().is_one() {
            return Ok(num.truncate(prec));
        }
        let d = Self::from_theta_poly(r.den(), den);
        let vn = num.val().unwrap_or(0);
        let inv = d.inv(Some(prec - vn))?;
        Ok(num.mul_cap(&inv, Some(prec)))
    }

    pub fn field(&self) -> &'static Field {
        self.f
    }
    pub fn den(&self) -> u32 {
        self.den
    }
    pub fn prec(&self) -> Option<i64> {
        self.prec
    }
    pub fn terms(&self) -> &BTreeMap<i64, MPoly> {
        &self.terms
    }
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    pub fn is_exact(&self) -> bool {
        self.prec.is_none()
    }
    /// Leading exponent numerator; None for zero.
    pub fn val(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }
    pub fn val_q(&self) -> Option<Rational64> {
        self.val().map(|v| Rational64::new(v, self.den as i64))
    }
    pub fn prec_q(&self) -> Option<Rational64> {
        self.prec.map(|v| Rational64::new(v, self.den as i64))
    }
    /// Valuation if nonzero, else the precision: the valuation the min rule uses.
    fn eff_val(&self) -> Option<i64> {
        self.val().or(self.prec)
    }
    pub fn lead(&self) -> Option<(i64, &MPoly)> {
        self.terms.iter().next().map(|(k, v)| (*k, v))
    }
    pub fn coeff(&self, n: i64) -> MPoly {
        self.terms.get(&n).cloned().unwrap_or_else(|| MPoly::zero(self.f))
    }
    /// Coefficient at the rational exponent e of X.
    pub fn coeff_q(&self, e: Rational64) -> MPoly {
        let n = e * Rational64::from(self.den as i64);
        if n.is_integer() {
            self.coeff(n.to_integer())
        } else {
            MPoly::zero(self.f)
        }
    }

    fn set_prec(mut self, prec: Option<i64>) -> Self {
        if let Some(p) = prec {
            self.terms.retain(|k, _| *k < p);
        }
        self.prec = prec;
        self
    }
    /// Lower the precision to `prec` numerator units (never raises it).
    pub fn truncate(&self, prec: i64) -> Self {
        let p = min_prec(self.prec, Some(prec));
        self.clone().set_prec(p)
    }
    pub fn truncate_q(&self, prec: Rational64) -> Self {
        let n = (prec * Rational64::from(self.den as i64)).ceil().to_integer();
        self.truncate(n)
    }

    /// Same series over a denominator that is a multiple of the current one.
    pub fn with_den(&self, den: u32) -> Self {
        assert!(den.is_multiple_of(self.den), "denominator {den} is not a multiple of {}", self.den);
        let s = (den / self.den) as i64;
        PSeries {
            f: self.f,
            den,
            terms: self.terms.iter().map(|(k, v)| (k * s, v.clone())).collect(),
            prec: self.prec.map(|p| p * s),
        }
    }
    fn aligned(&self, o: &Self) -> (Self, Self) {
        if self.den == o.den {
            return (self.clone(), o.clone());
        }
        let l = self.den.lcm(&o.den);
        (self.with_den(l), o.with_den(l))
    }
    /// Drop the denominator to the smallest value compatible with the stored exponents.
    pub fn normalize_den(&self) -> Self {
        let mut g = self.den as i64;
        for k in self.terms.keys() {
            g = g.gcd(k);
        }
        if let Some(p) = self.prec {
            g = g.gcd(&p);
        }
        let g = g.max(1);
        PSeries {
            f: self.f,
            den: self.den / g as u32,
            terms: self.terms.iter().map(|(k, v)| (k / g, v.clone())).collect(),
            prec: self.prec.map(|p| p / g),
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let (a, b) = self.aligned(o);
        let prec = min_prec(a.prec, b.prec);
        let mut terms = a.terms;
        for (k, v) in b.terms {
            let e = terms.entry(k).or_insert_with(|| MPoly::zero(self.f));
            *e = e.add(&v);
            if e.is_zero() {
                terms.remove(&k);
            }
        }
        PSeries { f: self.f, den: a.den, terms, prec }.set_prec(prec)
    }
    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }
    pub fn neg(&self) -> Self {
        self.map_coeffs(|c| c.neg())
    }
    pub fn map_coeffs(&self, g: impl Fn(&MPoly) -> MPoly) -> Self {
        let terms = self.terms.iter().map(|(k, v)| (*k, g(v))).filter(|(_, v)| !v.is_zero()).collect();
        PSeries { f: self.f, den: self.den, terms, prec: self.prec }
    }
    pub fn scale(&self, c: Elem) -> Self {
        self.map_coeffs(|v| v.scale(c))
    }
    pub fn scale_poly(&self, c: &MPoly) -> Self {
        if c.is_zero() {
            return Self::zero(self.f, self.den);
        }
        self.mul(&Self::constant(c.clone(), self.den))
    }
    /// Multiply by X^{n/D}.
    pub fn shift(&self, n: i64) -> Self {
        PSeries {
            f: self.f,
            den: self.den,
            terms: self.terms.iter().map(|(k, v)| (k + n, v.clone())).collect(),
            prec: self.prec.map(|p| p + n),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        self.mul_cap(o, None)
    }
    /// Product with precision min(prec f + val g, prec g + val f, cap).
    pub fn mul_cap(&self, o: &Self, cap: Option<i64>) -> Self {
        let (a, b) = self.aligned(o);
        let f = self.f;
        // an exact zero factor gives an exact zero
        if (a.is_zero() && a.prec.is_none()) || (b.is_zero() && b.prec.is_none()) {
            return Self::zero(f, a.den);
        }
        let pa = a.prec.map(|p| p + b.eff_val().expect("nonzero or truncated"));
        let pb = b.prec.map(|p| p + a.eff_val().expect("nonzero or truncated"));
        let prec = min_prec(min_prec(pa, pb), cap);
        let mut acc: FxHashMap<(i64, u128), Elem> = FxHashMap::default();
        for (i, x) in &a.terms {
            for (j, y) in &b.terms {
                let k = i + j;
                if prec.is_some_and(|p| k >= p) {
                    break;
                }
                for &(m1, c1) in x.terms() {
                    for &(m2, c2) in y.terms() {
                        let e = acc.entry((k, m1.mul(m2).0)).or_insert(0);
                        *e = f.add(*e, f.mul(c1, c2));
                    }
                }
            }
        }
        let mut flat: Vec<((i64, u128), Elem)> = acc.into_iter().filter(|t| t.1 != 0).collect();
        flat.sort_unstable_by_key(|t| t.0);
        let mut terms: BTreeMap<i64, MPoly> = BTreeMap::new();
        let mut i = 0;
        while i < flat.len() {
            let k = flat[i].0 .0;
            let mut j = i;
            while j < flat.len() && flat[j].0 .0 == k {
                j += 1;
            }
            let v: Vec<(Mono, Elem)> = flat[i..j].iter().map(|t| (Mono(t.0 .1), t.1)).collect();
            terms.insert(k, MPoly::from_terms(f, v));
            i = j;
        }
        PSeries { f, den: a.den, terms, prec }
    }

    /// Inverse. The leading coefficient must be a nonzero constant. For an exact
    /// input the absolute precision cap is mandatory.
    pub fn inv(&self, cap: Option<i64>) -> Result<Self> {
        let (v, lc) = match self.lead() {
            Some(l) => l,
            None => return Err(Error::DivisionByZero),
        };
        let c = lc.as_constant().filter(|&c| c != 0).ok_or_else(|| Error::NonUnitLeading(format!("{lc}")))?;
        let ci = self.f.inv(c)?;
        // relative precision available and requested
        let rel_avail = self.prec.map(|p| p - v);
        let rel_cap = cap.map(|c| c + v);
        let rel = min_prec(rel_avail, rel_cap).ok_or_else(|| Error::Precision("inverse of an exact series needs a cap".into()))?;
        let f = self.f;
        // h = f/(c X^v) - 1
        let h: Vec<(i64, MPoly)> = self.terms.iter().skip(1).map(|(k, m)| (k - v, m.scale(ci))).filter(|(k, _)| *k < rel).collect();
        let mut g: BTreeMap<i64, MPoly> = BTreeMap::new();
        if rel > 0 {
            g.insert(0, MPoly::one(f));
        }
        // G_n = −Σ h_e G_{n−e}; the support of G lies in the semigroup of h-exponents
        let mut frontier: std::collections::BTreeSet<i64> = std::collections::BTreeSet::new();
        for (e, _) in &h {
            frontier.insert(*e);
        }
        while let Some(n) = frontier.pop_first() {
            if n >= rel {
                break;
            }
            let mut acc = crate::ffbase::Accum::new(f);
            for (e, he) in &h {
                if *e > n {
                    break;
                }
                if let Some(gv) = g.get(&(n - e)) {
                    acc.add_product(he, gv);
                }
            }
            let val = acc.take().neg();
            if !val.is_zero() {
                for (e, _) in &h {
                    if n + e < rel {
                        frontier.insert(n + e);
                    }
                }
                g.insert(n, val);
            }
        }
        let terms = g.into_iter().map(|(k, m)| (k - v, m.scale(ci))).collect();
        Ok(PSeries { f, den: self.den, terms, prec: Some(rel - v) })
    }

    /// Quotient; the target precision is `cap`, or what the dividend supports.
    pub fn div(&self, o: &Self, cap: Option<i64>) -> Result<Self> {
        let ov = o.val().ok_or(Error::DivisionByZero)?;
        let vs = match self.eff_val() {
            Some(v) => v,
            None => return Ok(Self::zero(self.f, self.den)),
        };
        let target = min_prec(cap, self.prec.map(|p| p - ov))
            .ok_or_else(|| Error::Precision("exact division needs a cap".into()))?;
        let inv = o.inv(Some(target - vs))?;
        Ok(self.mul_cap(&inv, Some(target)))
    }

    /// Schoolbook division by a divisor with constant leading coefficient, stopping at `cap` or
    /// at what the operands support. Cheap when the quotient is sparse, since the divisor is never
    /// inverted. Returns (quotient, remainder).
    pub fn long_div(&self, o: &Self, cap: i64) -> Result<(Self, Self)> {
        if self.den != o.den {
            return Err(Error::Invalid("long division needs a common denominator".into()));
        }
        let (ov, lead) = o.lead().ok_or(Error::DivisionByZero)?;
        let c = lead.as_constant().ok_or_else(|| Error::Invalid("leading coefficient must be constant".into()))?;
        let cinv = self.f.inv(c)?;
        let limit = |r: &Self| min_prec(Some(cap), r.prec.map(|p| p - ov)).unwrap_or(cap);
        let mut rem = self.clone();
        let mut quo = BTreeMap::new();
        loop {
            let target = limit(&rem);
            let (e, lc) = match rem.lead() {
                Some((e, lc)) if e - ov < target => (e, lc.scale(cinv)),
                _ => break,
            };
            rem = rem.sub(&o.shift(e - ov).scale_poly(&lc));
            quo.insert(e - ov, lc);
        }
        let target = limit(&rem);
        let q = PSeries { f: self.f, den: self.den, terms: quo, prec: Some(target) }.truncate(target);
        Ok((q, rem))
    }

    pub fn pow(&self, k: i64, cap: Option<i64>) -> Result<Self> {
        if k < 0 {
            let v = self.val().ok_or(Error::DivisionByZero)?;
            let icap = cap.map(|c| c - (-k - 1) * (-v));
            return self.inv(icap)?.pow(-k, cap);
        }
        let mut r = Self::one(self.f, self.den);
        let mut b = self.clone();
        let mut k = k as u64;
        while k > 0 {
            if k & 1 == 1 {
                r = r.mul_cap(&b, cap);
            }
            k >>= 1;
            if k > 0 {
                b = b.mul_cap(&b, cap);
            }
        }
        Ok(r)
    }

    /// τ^m: exponents scaled by q^m, coefficients x ↦ x^{q^m}, t fixed.
    pub fn twist(&self, m: i32) -> Self {
        let q = self.f.q as i64;
        let f = self.f;
        if m >= 0 {
            let s = q.pow(m as u32);
            PSeries {
                f,
                den: self.den,
                terms: self.terms.iter().map(|(k, v)| (k * s, v.frob_coeffs(m as i64))).collect(),
                prec: self.prec.map(|p| p * s),
            }
        } else {
            let s = q.pow((-m) as u32) as u32;
            PSeries {
                f,
                den: self.den * s,
                terms: self.terms.iter().map(|(k, v)| (*k, v.frob_coeffs(m as i64))).collect(),
                prec: self.prec,
            }
        }
    }

    /// t_i ↦ θ^k (each t_i^d becomes X^{-kd}).
    pub fn specialize_t(&self, i: usize, k: u32) -> Self {
        let mut out = Self::zero(self.f, self.den);
        out.prec = self.prec;
        let mut terms: BTreeMap<i64, Vec<(Mono, Elem)>> = BTreeMap::new();
        for (e, c) in &self.terms {
            for &(m, a) in c.terms() {
                let shift = -(m.t_exp(i) as i64) * k as i64 * self.den as i64;
                terms.entry(e + shift).or_default().push((m.with_t(i, 0), a));
            }
        }
        // specialization can lower exponents, so the precision drops by the largest shift
        let maxd = self.terms.values().map(|c| c.max_degrees()[i]).max().unwrap_or(0) as i64;
        out.prec = self.prec.map(|p| p - maxd * k as i64 * self.den as i64);
        out.terms = terms
            .into_iter()
            .map(|(k, v)| (k, MPoly::from_terms(self.f, v)))
            .filter(|(k, v)| !v.is_zero() && out.prec.is_none_or(|p| *k < p))
            .collect();
        out
    }

    /// True if all stored coefficients vanish (the series is zero up to its precision).
    pub fn vanishes(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn to_json(&self) -> Value {
        let exp = |n: i64| {
            let r = Rational64::new(n, self.den as i64);
            format!("{}/{}", r.numer(), r.denom())
        };
        json!({
            "prec": self.prec.map(exp),
            "D": self.den,
            "terms": self.terms.iter().map(|(k, v)| json!({"exponent": exp(*k), "coeff": v.to_string()})).collect::<Vec<_>>(),
        })
    }
}

impl fmt::Display for PSeries {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (k, v) in &self.terms {
            let r = Rational64::new(*k, self.den as i64);
            parts.push(format!("({v})*X^({r})"));
        }
        if let Some(p) = self.prec {
            parts.push(format!("O(X^({}))", Rational64::new(p, self.den as i64)));
        }
        if parts.is_empty() {
            parts.push("0".into());
        }
        write!(out, "{}", parts.join(" + "))
    }
}

impl fmt::Debug for PSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// d_n = Π_{k<n} (θ^{q^n} − θ^{q^k}).
pub fn carlitz_d(f: &'static Field, n: u32) -> ThetaPoly {
    let q = f.q as usize;
    let top = ThetaPoly::theta_pow(f, q.pow(n));
    (0..n).fold(ThetaPoly::one(f), |acc, k| acc.mul(&top.sub(&ThetaPoly::theta_pow(f, q.pow(k)))))
}

/// l_n = Π_{1≤k≤n} (θ − θ^{q^k}).
pub fn carlitz_l(f: &'static Field, n: u32) -> ThetaPoly {
    let q = f.q as usize;
    let th = ThetaPoly::theta_pow(f, 1);
    (1..=n).fold(ThetaPoly::one(f), |acc, k| acc.mul(&th.sub(&ThetaPoly::theta_pow(f, q.pow(k)))))
}

fn check_den(f: &Field, den: u32) -> Result<()> {
    if !den.is_multiple_of((f.q - 1).max(1)) {
        return Err(Error::Invalid(format!("denominator {den} is not divisible by q-1 = {}", f.q - 1)));
    }
    Ok(())
}

/// η = ξ X^{-1/(q-1)}, the model of (−θ)^{1/(q−1)}.
pub fn eta(f: &'static Field, den: u32) -> Result<PSeries> {
    check_den(f, den)?;
    let e = den as i64 / (f.q as i64 - 1);
    Ok(PSeries::monomial(f, den, -e, MPoly::constant(f, f.xi())))
}

/// Π (1 − c X^{s_j})^{-1} over the given (c, s_j), to relative precision `rel`.
fn geometric_product(f: &'static Field, den: u32, factors: &[(MPoly, i64)], rel: i64) -> PSeries {
    let mut acc = PSeries::one(f, den);
    for (c, s) in factors {
        if *s >= rel {
            continue;
        }
        let mut g = PSeries::one(f, den);
        let mut pw = MPoly::one(f);
        let mut k = *s;
        while k < rel {
            pw = pw.mul(c);
            g = g.add(&PSeries::monomial(f, den, k, pw.clone()));
            k += s;
        }
        g = g.truncate(rel);
        acc = acc.mul_cap(&g, Some(rel));
    }
    acc.truncate(rel)
}

/// π̃ = θ η Π_{i≥1} (1 − θ^{1−q^i})^{-1} to absolute precision `prec` (numerator units).
pub fn pitilde(f: &'static Field, den: u32, prec: i64) -> Result<PSeries> {
    let h = eta(f, den)?;
    let q = f.q as i64;
    let v = -(q * den as i64) / (q - 1);
    let rel = prec - v;
    let mut factors = Vec::new();
    let mut qi = q;
    while (qi - 1) * (den as i64) < rel {
        factors.push((MPoly::one(f), (qi - 1) * den as i64));
        qi *= q;
    }
    let prod = geometric_product(f, den, &factors, rel);
    Ok(prod.mul(&h).shift(-(den as i64)))
}

/// ω(t_i) = η Π_{j≥0} (1 − t_i θ^{−q^j})^{-1} to absolute precision `prec`.
pub fn omega(f: &'static Field, den: u32, i: usize, prec: i64) -> Result<PSeries> {
    let h = eta(f, den)?;
    let t = MPoly::var_t(f, i)?;
    let v = h.val().expect("η is nonzero");
    let rel = prec - v;
    let q = f.q as i64;
    let mut factors = Vec::new();
    let mut qj = 1i64;
    while qj * (den as i64) < rel {
        factors.push((t.clone(), qj * den as i64));
        qj *= q;
    }
    let prod = geometric_product(f, den, &factors, rel);
    Ok(prod.mul(&h))
}

/// Product of ω(t_i) over the given variables.
pub fn omega_product(f: &'static Field, den: u32, vars: &[usize], prec: i64) -> Result<PSeries> {
    let v1 = -(den as i64) / (f.q as i64 - 1);
    let n = vars.len() as i64;
    let mut acc = PSeries::one(f, den);
    for &i in vars {
        // each factor needs precision prec − (n−1)v1
        let w = omega(f, den, i, prec - (n - 1) * v1)?;
        acc = acc.mul_cap(&w, Some(prec));
    }
    Ok(acc)
}

/// Π_i ω(t_i)^{-1} = η^{-s} Π_i Π_{j≥0} (1 − t_i θ^{−q^j}) to absolute precision `prec`; every
/// coefficient has degree below log_q(prec) in each t_i.
pub fn omega_inv_product(f: &'static Field, den: u32, vars: &[usize], prec: i64) -> Result<PSeries> {
    check_den(f, den)?;
    let e = den as i64 / (f.q as i64 - 1);
    let xi_inv = f.inv(f.xi())?;
    let v = e * vars.len() as i64;
    let q = f.q as i64;
    let mut acc = PSeries::monomial(f, den, v, MPoly::constant(f, f.pow(xi_inv, vars.len() as u64)));
    for &i in vars {
        let t = MPoly::var_t(f, i)?;
        let mut qj = 1i64;
        while v + qj * (den as i64) < prec {
            let factor = PSeries::one(f, den).sub(&PSeries::monomial(f, den, qj * den as i64, t.clone()));
            acc = acc.mul_cap(&factor, Some(prec));
            qj *= q;
        }
    }
    Ok(acc.truncate(prec))
}

/// Σ_i τ^i(x)/c_i summed to `cap`. `term_val(v, i)` is the valuation of the i-th
/// term and `monotone(v, i)` certifies that term valuations increase from i on.
fn carlitz_series(
    x: &PSeries,
    cap: i64,
    coeff: impl Fn(u32) -> ThetaPoly,
    term_val: impl Fn(i64, u32) -> Option<i64>,
    monotone: impl Fn(i64, u32) -> bool,
    name: &str,
) -> Result<PSeries> {
    let f = x.field();
    let v = match x.val() {
        None => return Ok(x.truncate(cap)),
        Some(v) => v,
    };
    let mut acc = PSeries::zero(f, x.den());
    for i in 0..=40u32 {
        let tv = term_val(v, i).ok_or_else(|| Error::Divergence(format!("{name}: term valuations overflow")))?;
        if tv >= cap {
            if monotone(v, i) {
                return Ok(acc.truncate(cap));
            }
            continue;
        }
        let tx = x.twist(i as i32);
        let c = PSeries::from_theta_poly(&coeff(i), x.den());
        acc = acc.add(&tx.div(&c, Some(cap))?);
    }
    Err(Error::Divergence(format!("{name}: tail not certified below precision")))
}

/// exp_C(x) = Σ τ^i(x)/d_i to absolute precision `cap` (numerator units of x).
pub fn exp_c(x: &PSeries, cap: i64) -> Result<PSeries> {
    let f = x.field();
    let q = f.q as i64;
    let den = x.den() as i64;
    carlitz_series(
        x,
        cap,
        |i| carlitz_d(f, i),
        |v, i| {
            let qi = q.checked_pow(i)?;
            qi.checked_mul(v + i as i64 * den).filter(|t| t.abs() < 1 << 50)
        },
        |v, i| v + i as i64 * den > 0,
        "exp_C",
    )
}

/// log_C(x) = Σ τ^i(x)/l_i for v(x) > −q/(q−1).
pub fn log_c(x: &PSeries, cap: i64) -> Result<PSeries> {
    let f = x.field();
    let q = f.q as i64;
    let den = x.den() as i64;
    if let Some(v) = x.val() {
        if v * (q - 1) <= -q * den {
            return Err(Error::Divergence("log_C: input outside the disk v > -q/(q-1)".into()));
        }
    }
    carlitz_series(
        x,
        cap,
        |i| carlitz_l(f, i),
        |v, i| {
            let qi = q.checked_pow(i)?;
            let t = qi.checked_mul(v)? + q * (qi - 1) / (q - 1) * den;
            Some(t).filter(|t| t.abs() < 1 << 50)
        },
        |_, _| true,
        "log_C",
    )
}

/// Sample point z of the Drinfeld half-plane.
#[derive(Clone, Debug)]
pub struct SamplePoint {
    pub z: PSeries,
    pub r: u32,
}

/// z = θ^r η for odd q; for q = 2, where η = θ is rational, z = θ^r θ^{1/2}.
pub fn sample_z(f: &'static Field, den: u32, r: u32) -> Result<SamplePoint> {
    check_den(f, den)?;
    let z = if f.q == 2 {
        if !den.is_multiple_of(2) {
            return Err(Error::Invalid("q = 2 sample point needs an even denominator".into()));
        }
        PSeries::monomial(f, den, -(r as i64) * den as i64 - den as i64 / 2, MPoly::one(f))
    } else {
        eta(f, den)?.shift(-(r as i64) * den as i64)
    };
    let v = z.val().expect("nonzero");
    if v % den as i64 == 0 {
        return Err(Error::Invalid("sample point lies in K_∞".into()));
    }
    if v >= 0 {
        return Err(Error::Invalid("sample point must satisfy |z| > 1".into()));
    }
    Ok(SamplePoint { z, r })
}

/// Lower bound min_i q^i(v + i) for v(exp_C(x)), and whether the minimum is attained once.
fn exp_val_estimate(q: i64, den: i64, v: i64) -> (i64, bool) {
    let mut best = i64::MAX;
    let mut count = 0;
    let mut i = 0u32;
    loop {
        let t = q.pow(i) * (v + i as i64 * den);
        match t.cmp(&best) {
            std::cmp::Ordering::Less => {
                best = t;
                count = 1
            }
            std::cmp::Ordering::Equal => count += 1,
            _ => {}
        }
        if v + i as i64 * den > 0 {
            break;
        }
        i += 1;
    }
    (best, count == 1)
}

/// e_C(w) := exp_C(π̃ w) to absolute precision `cap`.
pub fn e_c(w: &PSeries, cap: i64) -> Result<PSeries> {
    let f = w.field();
    let den = w.den();
    let vw = w.val().ok_or(Error::DivisionByZero)?;
    let px = cap.max(0) + den as i64;
    let pt = pitilde(f, den, px - vw)?;
    let x = pt.mul(w).truncate(px);
    exp_c(&x, cap)
}

/// v(1/e_C(w)) in numerator units, read off the dominant term of exp_C.
pub fn uniformizer_valuation_at(w: &PSeries) -> Result<i64> {
    let q = w.field().q as i64;
    let den = w.den() as i64;
    let vw = w.val().ok_or(Error::DivisionByZero)?;
    let (ve, unique) = exp_val_estimate(q, den, vw - q * den / (q - 1));
    if !unique {
        return Err(Error::Precision("cancellation in exp_C at this point".into()));
    }
    if ve >= 0 {
        return Err(Error::Invalid("|u| < 1 fails at this point".into()));
    }
    Ok(-ve)
}

/// 1/e_C(w) to absolute precision `prec`; requires |e_C(w)| > 1.
pub fn uniformizer_at(w: &PSeries, prec: i64) -> Result<PSeries> {
    let f = w.field();
    let den = w.den() as i64;
    let q = f.q as i64;
    let vw = w.val().ok_or(Error::DivisionByZero)?;
    let vx = vw - q * den / (q - 1);
    let (ve, unique) = exp_val_estimate(q, den, vx);
    if !unique {
        return Err(Error::Precision("cancellation in exp_C at this point".into()));
    }
    if ve >= 0 {
        return Err(Error::Invalid("|u| < 1 fails at this point".into()));
    }
    if -ve >= prec {
        return Ok(PSeries::zero_to(f, den as u32, prec));
    }
    // e needs relative precision prec + ve
    let e = e_c(w, prec + 2 * ve)?;
    if e.val() != Some(ve) {
        return Err(Error::Precision("exp_C valuation estimate failed".into()));
    }
    let u = e.inv(Some(prec))?;
    if u.prec().is_some_and(|p| p < prec) {
        return Err(Error::Precision("uniformizer precision not reached".into()));
    }
    Ok(u)
}

/// u(z) = 1/exp_C(π̃ z).
pub fn u_eval(z: &SamplePoint, prec: i64) -> Result<PSeries> {
    uniformizer_at(&z.z, prec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ffbase::monic_polys;

    fn f3() -> &'static Field {
        Field::get(3, 1).unwrap()
    }

    #[test]
    fn geometric_inverse() {
        let f = f3();
        let s = PSeries::one(f, 1).sub(&PSeries::monomial(f, 1, 1, MPoly::one(f)));
        let g = s.inv(Some(10)).unwrap();
        assert_eq!(g.prec(), Some(10));
        assert_eq!(g.terms().len(), 10);
        assert!(g.terms().values().all(|c| c.is_one()));
    }

    #[test]
    fn min_rule_and_exact_zero() {
        let f = f3();
        let a = PSeries::one(f, 2).truncate(6);
        let z = PSeries::zero(f, 2);
        let p = a.mul(&z);
        assert!(p.is_zero() && p.is_exact());
        let b = PSeries::monomial(f, 2, 3, MPoly::one(f)).truncate(8);
        assert_eq!(a.mul(&b).prec(), Some(8));
    }

    #[test]
    fn eta_power_is_minus_theta() {
        let f = f3();
        let h = eta(f, 2).unwrap();
        let p = h.pow(2, None).unwrap();
        assert_eq!(p, PSeries::monomial(f, 2, -2, MPoly::constant(f, 2)));
    }

    #[test]
    fn twist_examples() {
        let f = f3();
        let x = PSeries::monomial(f, 1, 1, MPoly::var_t(f, 0).unwrap());
        assert_eq!(x.twist(1).val(), Some(3));
        let y = x.twist(-1);
        assert_eq!(y.val_q(), Some(Rational64::new(1, 3)));
        assert_eq!(y.twist(1).normalize_den(), x);
    }

    #[test]
    fn d_and_l_match_brute_force() {
        for (p, e) in [(2, 1), (3, 1)] {
            let f = Field::get(p, e).unwrap();
            for n in 1..=3u32 {
                let prod = monic_polys(f, n as usize).iter().fold(ThetaPoly::one(f), |a, b| a.mul(b));
                assert_eq!(carlitz_d(f, n), prod);
                let mut l = ThetaPoly::one(f);
                for a in (1..=n as usize).flat_map(|d| monic_polys(f, d)) {
                    l = l.lcm(&a);
                }
                let sign = if n % 2 == 1 { f.neg(1) } else { 1 };
                assert_eq!(carlitz_l(f, n), l.scale(sign));
            }
        }
    }

    #[test]
    fn pitilde_leading_exponent() {
        for (p, e) in [(2, 1), (3, 1)] {
            let f = Field::get(p, e).unwrap();
            let den = default_den(f);
            let pt = pitilde(f, den, 20 * den as i64).unwrap();
            let q = f.q as i64;
            assert_eq!(pt.val_q(), Some(Rational64::new(-q, q - 1)));
        }
    }

    #[test]
    fn exp_of_pitilde_over_theta_is_eta() {
        for (p, e) in [(2, 1), (3, 1)] {
            let f = Field::get(p, e).unwrap();
            let den = default_den(f);
            let cap = 30 * den as i64;
            let x = pitilde(f, den, cap + den as i64).unwrap().shift(den as i64);
            let y = exp_c(&x, cap).unwrap();
            assert_eq!(y.sub(&eta(f, den).unwrap()).truncate(cap), PSeries::zero_to(f, den, cap));
        }
    }

    #[test]
    fn pitilde_theta_in_kernel() {
        let f = f3();
        let den = default_den(f);
        let cap = 30 * den as i64;
        let x = pitilde(f, den, cap + den as i64).unwrap().shift(-(den as i64));
        let y = exp_c(&x, cap).unwrap();
        assert!(y.vanishes(), "exp_C(π̃θ) = {y}");
    }

    #[test]
    fn omega_functional_equation() {
        for (p, e) in [(2, 1), (3, 1)] {
            let f = Field::get(p, e).unwrap();
            let den = default_den(f);
            let cap = 40 * den as i64;
            let w = omega(f, den, 0, cap).unwrap();
            let lhs = w.twist(1).truncate(cap);
            let t_minus_theta = PSeries::from_mixed(&MPoly::parse(f, "t1 - theta").unwrap(), den);
            let rhs = t_minus_theta.mul(&w);
            let diff = lhs.sub(&rhs);
            assert!(diff.vanishes(), "{diff}");
            assert!(diff.prec().unwrap() >= cap - den as i64);
        }
    }

    #[test]
    fn omega_inverse_and_long_division() {
        for (p, e) in [(2, 1), (3, 1)] {
            let f = Field::get(p, e).unwrap();
            let den = default_den(f);
            let cap = 30 * den as i64;
            let vars = [0, 1, 2];
            let w = omega_product(f, den, &vars, cap + 4 * den as i64).unwrap();
            let wi = omega_inv_product(f, den, &vars, cap + 4 * den as i64).unwrap();
            let one = w.mul_cap(&wi, Some(cap)).sub(&PSeries::one(f, den)).truncate(cap);
            assert!(one.vanishes(), "{one}");
            // (1 + t X) (X^{-1} − t) / (X^{-1} − t) = 1 + t X with zero remainder
            let t = MPoly::var_t(f, 0).unwrap();
            let a = PSeries::one(f, den).add(&PSeries::monomial(f, den, den as i64, t.clone()));
            let b = PSeries::monomial(f, den, -(den as i64), MPoly::one(f)).sub(&PSeries::constant(t, den));
            let (qt, r) = a.mul(&b).long_div(&b, cap).unwrap();
            assert_eq!(qt.terms(), a.terms());
            assert!(r.is_zero());
        }
    }

    #[test]
    fn sample_uniformizer_valuation() {
        let f = f3();
        let den = default_den(f);
        let z = sample_z(f, den, 1).unwrap();
        let u = u_eval(&z, 40 * den as i64).unwrap();
        assert_eq!(u.val_q(), Some(Rational64::from(9)));
    }
}
