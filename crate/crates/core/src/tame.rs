//! Tame series in the functions e_i(z) = e_C(π̃z/θ^i).
//!
//! - [`TameExp`]: exponents ⟨e⟩^j stored as base-q digit maps over the indices i
//! - [`TameSeries`]: finite sums with the rewrite e_i^q = e_{i−1} − θ e_i applied to exhaustion
//! - [`perkins_tame`]: reduced products Π_i Σ_j t_i^j e_{j+1}, taken modulo e_0
//! - [`tame_divided_derivative`]: D_n with D_{q^k}(e_i) = (−1)^{q^k}/(d_k θ^{iq^k})
//! - [`UniformizerElem`]: Laurent series in u with tame coefficients and their valuation
//!
//! Weights are exact rationals: w(e_i) = q^{-i}, v = −w, and e_0 = u^{-1}.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Rational64;
use serde_json::{json, Map, Value};

use crate::cinf::carlitz_d;
use crate::error::{Error, Result};
use crate::ffbase::{carlitz_coeffs, digit_sum, digits, Elem, Field, KRat, MPoly, ThetaPoly};
use crate::goss::{divided_derivative_u, sum_krats, USeries};

fn qpow(q: u32, i: i32) -> Rational64 {
    let b = (q as i64).pow(i.unsigned_abs());
    if i >= 0 {
        Rational64::new(1, b)
    } else {
        Rational64::from(b)
    }
}

/// Product Π e_i^{d_i}, digits kept sorted by index and nonzero.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct TameExp(Vec<(i32, u32)>);

impl TameExp {
    pub fn one() -> Self {
        TameExp(Vec::new())
    }
    pub fn e(i: i32) -> Self {
        TameExp(vec![(i, 1)])
    }
    pub fn from_digits(it: impl IntoIterator<Item = (i32, u32)>) -> Self {
        let mut m: BTreeMap<i32, u32> = BTreeMap::new();
        for (i, d) in it {
            *m.entry(i).or_insert(0) += d;
        }
        TameExp(m.into_iter().filter(|t| t.1 > 0).collect())
    }
    pub fn digits(&self) -> &[(i32, u32)] {
        &self.0
    }
    pub fn digit(&self, i: i32) -> u32 {
        self.0.iter().find(|t| t.0 == i).map(|t| t.1).unwrap_or(0)
    }
    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }
    /// Exponent sum (not reduced).
    pub fn mul(&self, o: &Self) -> Self {
        Self::from_digits(self.0.iter().chain(o.0.iter()).copied())
    }
    fn with_digit(&self, i: i32, d: u32) -> Self {
        let mut v: Vec<(i32, u32)> = self.0.iter().copied().filter(|t| t.0 != i).collect();
        if d > 0 {
            v.push((i, d));
        }
        v.sort_unstable();
        TameExp(v)
    }
    /// j = Σ d_i q^{-i}.
    pub fn weight(&self, q: u32) -> Rational64 {
        self.0.iter().map(|&(i, d)| qpow(q, i) * Rational64::from(d as i64)).sum()
    }
    /// ℓ_q(j) = Σ d_i for a reduced exponent.
    pub fn depth(&self) -> u32 {
        self.0.iter().map(|t| t.1).sum()
    }
    pub fn min_index(&self) -> Option<i32> {
        self.0.first().map(|t| t.0)
    }
    pub fn max_index(&self) -> Option<i32> {
        self.0.last().map(|t| t.0)
    }
    pub fn is_reduced(&self, q: u32) -> bool {
        self.0.iter().all(|t| t.1 < q)
    }
    /// All indices ≥ 1.
    pub fn in_circle(&self) -> bool {
        self.min_index().is_none_or(|i| i >= 1)
    }
    /// The maximal monomial M_s = e_1^{q−1} ⋯ e_{m−1}^{q−1} e_m^l.
    pub fn maximal(q: u32, s: u32) -> Self {
        if s == 0 {
            return Self::one();
        }
        let (m, l) = m_and_l(q, s);
        Self::from_digits((1..m as i32).map(|i| (i, q - 1)).chain(std::iter::once((m as i32, l))))
    }
    /// Split off digits at indices ≤ 0.
    fn split_nonpositive(&self) -> (Vec<(i32, u32)>, TameExp) {
        let low = self.0.iter().copied().filter(|t| t.0 <= 0).collect();
        let high = TameExp(self.0.iter().copied().filter(|t| t.0 > 0).collect());
        (low, high)
    }

    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        for &(i, d) in &self.0 {
            m.insert(i.to_string(), json!(d));
        }
        Value::Object(m)
    }
}

impl fmt::Display for TameExp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self.0.iter().map(|&(i, d)| if d == 1 { format!("e{i}") } else { format!("e{i}^{d}") }).collect();
        write!(f, "{}", parts.join("*"))
    }
}

impl fmt::Debug for TameExp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// s = (m−1)(q−1) + l with 1 ≤ l ≤ q−1.
pub fn m_and_l(q: u32, s: u32) -> (u32, u32) {
    assert!(s > 0 && q > 1);
    let m = (s - 1) / (q - 1) + 1;
    (m, s - (m - 1) * (q - 1))
}

/// w_max(s) = (q−1) Σ_{i<m} q^{-i} + l q^{-m}.
pub fn w_max(q: u32, s: u32) -> Rational64 {
    TameExp::maximal(q, s).weight(q)
}

/// κ(s) = q^{-m}(q − l), and κ(0) = 1.
pub fn kappa(q: u32, s: u32) -> Rational64 {
    if s == 0 {
        return Rational64::from(1);
    }
    let (m, l) = m_and_l(q, s);
    qpow(q, m as i32) * Rational64::from((q - l) as i64)
}

/// Sum of monomials ⟨e⟩^j with coefficients in K(t).
#[derive(Clone, PartialEq, Eq)]
pub struct TameSeries {
    f: &'static Field,
    terms: BTreeMap<TameExp, KRat>,
    /// Largest e-index retained by truncation.
    pub bound: i32,
    /// Terms below this weight were dropped.
    pub floor: Option<Rational64>,
}

struct Reducer<'a> {
    q: u32,
    floor: Option<Rational64>,
    minus_theta: &'a KRat,
    out: BTreeMap<TameExp, Vec<KRat>>,
}

impl Reducer<'_> {
    fn push(&mut self, e: TameExp, c: KRat) {
        let mut stack = vec![(e, c)];
        while let Some((e, c)) = stack.pop() {
            if self.floor.is_some_and(|fl| e.weight(self.q) < fl) {
                continue;
            }
            match e.0.iter().rev().find(|t| t.1 >= self.q) {
                None => self.out.entry(e).or_default().push(c),
                Some(&(i, d)) => {
                    let base = e.with_digit(i, d - self.q);
                    stack.push((base.mul(&TameExp::e(i - 1)), c.clone()));
                    stack.push((base.mul(&TameExp::e(i)), c.mul(self.minus_theta)));
                }
            }
        }
    }
}

impl TameSeries {
    pub fn zero(f: &'static Field, bound: i32) -> Self {
        TameSeries { f, terms: BTreeMap::new(), bound, floor: None }
    }
    pub fn constant(c: KRat, bound: i32) -> Self {
        Self::monomial(TameExp::one(), c, bound)
    }
    /// c·⟨e⟩^j, reduced.
    pub fn monomial(e: TameExp, c: KRat, bound: i32) -> Self {
        let f = c.field();
        let mut s = Self::zero(f, bound);
        s = s.add_reduced(vec![(e, c)]);
        s
    }
    pub fn field(&self) -> &'static Field {
        self.f
    }
    pub fn terms(&self) -> &BTreeMap<TameExp, KRat> {
        &self.terms
    }
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    pub fn coeff(&self, e: &TameExp) -> KRat {
        self.terms.get(e).cloned().unwrap_or_else(|| KRat::zero(self.f))
    }
    pub fn with_floor(mut self, floor: Option<Rational64>) -> Self {
        self.floor = floor;
        if let Some(fl) = floor {
            let q = self.f.q;
            self.terms.retain(|e, _| e.weight(q) >= fl);
        }
        self
    }

    /// Add unreduced terms, reducing each.
    fn add_reduced(&self, items: Vec<(TameExp, KRat)>) -> Self {
        let f = self.f;
        let mt = KRat::from_poly(MPoly::theta(f).neg());
        let mut r = Reducer { q: f.q, floor: self.floor, minus_theta: &mt, out: BTreeMap::new() };
        for (e, c) in &self.terms {
            r.out.entry(e.clone()).or_default().push(c.clone());
        }
        for (e, c) in items {
            if !c.is_zero() {
                r.push(e, c);
            }
        }
        let terms = r.out.into_iter().map(|(e, v)| (e, sum_krats(f, v))).filter(|(_, c)| !c.is_zero()).collect();
        TameSeries { f, terms, bound: self.bound, floor: self.floor }
    }

    fn join_floor(a: Option<Rational64>, b: Option<Rational64>) -> Option<Rational64> {
        match (a, b) {
            (Some(x), Some(y)) => Some(x.max(y)),
            (x, None) => x,
            (None, y) => y,
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut s = self.clone();
        s.floor = Self::join_floor(self.floor, o.floor);
        s.bound = self.bound.min(o.bound);
        s.add_reduced(o.terms.iter().map(|(e, c)| (e.clone(), c.clone())).collect()).with_floor(s.floor)
    }
    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }
    pub fn neg(&self) -> Self {
        self.map_coeffs(|c| c.neg())
    }
    pub fn scale(&self, c: &KRat) -> Self {
        self.map_coeffs(|x| x.mul(c))
    }
    pub fn map_coeffs(&self, g: impl Fn(&KRat) -> KRat) -> Self {
        let mut s = self.clone();
        s.terms = self.terms.iter().map(|(e, c)| (e.clone(), g(c))).filter(|(_, c)| !c.is_zero()).collect();
        s
    }
    /// Product with full q-reduction, truncated at the weight floor.
    pub fn mul(&self, o: &Self) -> Self {
        let mut items = Vec::with_capacity(self.terms.len() * o.terms.len());
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                items.push((e1.mul(e2), c1.mul(c2)));
            }
        }
        let mut base = Self::zero(self.f, self.bound.min(o.bound));
        base.floor = Self::join_floor(self.floor, o.floor);
        base.add_reduced(items)
    }
    pub fn pow(&self, k: u32) -> Self {
        let mut r = Self::constant(KRat::one(self.f), self.bound);
        r.floor = self.floor;
        for _ in 0..k {
            r = r.mul(self);
        }
        r
    }

    /// Drop every monomial involving an index ≤ 0.
    pub fn reduce_mod_e0(&self) -> Self {
        let mut s = self.clone();
        s.terms.retain(|e, _| e.in_circle());
        s
    }

    /// Monomial of maximal weight with its coefficient.
    pub fn leading(&self) -> Option<(TameExp, KRat)> {
        let q = self.f.q;
        self.terms.iter().max_by_key(|(e, _)| e.weight(q)).map(|(e, c)| (e.clone(), c.clone()))
    }
    pub fn weight(&self) -> Option<Rational64> {
        let q = self.f.q;
        self.terms.keys().map(|e| e.weight(q)).max()
    }
    /// Largest ℓ_q over the support.
    pub fn depth(&self) -> u32 {
        self.terms.keys().map(|e| e.depth()).max().unwrap_or(0)
    }

    /// e_k ↦ e_{k−1} + λ e_k for every index k, i.e. evaluation at (θ + λ)z.
    pub fn subst_shift(&self, lambda: Elem) -> Self {
        let f = self.f;
        let mut acc = Self::zero(f, self.bound);
        acc.floor = None;
        for (e, c) in &self.terms {
            let mut prod = Self::constant(c.clone(), self.bound);
            for &(i, d) in e.digits() {
                let mut lin = Self::monomial(TameExp::e(i - 1), KRat::one(f), self.bound);
                if lambda != 0 {
                    lin = lin.add(&Self::monomial(TameExp::e(i), KRat::constant(f, lambda), self.bound));
                }
                for _ in 0..d {
                    prod = prod.mul(&lin);
                }
            }
            acc = acc.add(&prod);
        }
        acc
    }

    pub fn to_json(&self) -> Value {
        let q = self.f.q;
        json!({
            "bound": self.bound,
            "terms": self.terms.iter().map(|(e, c)| json!({
                "exponent": e.to_json(),
                "weight": e.weight(q).to_string(),
                "coeff": c.to_string(),
            })).collect::<Vec<_>>(),
        })
    }
}

impl fmt::Display for TameSeries {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(out, "0");
        }
        let parts: Vec<String> = self.terms.iter().map(|(e, c)| format!("({c})*{e}")).collect();
        write!(out, "{}", parts.join(" + "))
    }
}

impl fmt::Debug for TameSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// (weight, valuation, depth) of a nonzero series.
pub fn tame_invariants(t: &TameSeries) -> Result<(Rational64, Rational64, u32)> {
    let w = t.weight().ok_or_else(|| Error::Invalid("zero tame series has weight −∞".into()))?;
    Ok((w, -w, t.depth()))
}

/// Reduced product Π_{i∈vars} Σ_{j<M} t_i^j e_{j+1}, modulo e_0.
#[derive(Clone, Debug)]
pub struct Perkins {
    pub series: TameSeries,
    pub leading: TameExp,
    pub leading_coeff: KRat,
    /// M ≥ m(s): the coefficient of M_s only involves indices ≤ m.
    pub certified: bool,
}

pub fn perkins_tame(f: &'static Field, vars: &[usize], bound: u32) -> Result<Perkins> {
    let s = vars.len() as u32;
    let mut acc = TameSeries::constant(KRat::one(f), bound as i32);
    for &i in vars {
        let mut factor = TameSeries::zero(f, bound as i32);
        for j in 0..bound {
            let c = KRat::from_poly(MPoly::var_t(f, i)?.pow(j as u64));
            factor = factor.add(&TameSeries::monomial(TameExp::e(j as i32 + 1), c, bound as i32));
        }
        acc = acc.mul(&factor).reduce_mod_e0();
    }
    let series = acc.reduce_mod_e0();
    let leading = TameExp::maximal(f.q, s);
    let leading_coeff = series.coeff(&leading);
    let m = if s == 0 { 0 } else { m_and_l(f.q, s).0 };
    Ok(Perkins { series, leading, leading_coeff, certified: bound >= m })
}

/// D_n(e_i) for n ∈ {0} ∪ q^ℕ.
fn d_of_e(f: &'static Field, i: i32, k: u32) -> Result<KRat> {
    let q = f.q as i64;
    let qk = q.pow(k);
    let sign = if qk % 2 == 1 && f.p != 2 { f.neg(1) } else { 1 };
    let d = KRat::from_theta_poly(&carlitz_d(f, k));
    let th = ThetaPoly::theta_pow(f, 1);
    let e = i as i64 * qk;
    let t = if e >= 0 {
        KRat::from_theta_poly(&th.pow(e as u64)).inv()?
    } else {
        KRat::from_theta_poly(&th.pow((-e) as u64))
    };
    Ok(d.inv()?.mul(&t).scale(sign))
}

/// D_n(f) with D_n = (−π̃)^{-n} 𝒟_n, by Leibniz over individual e-factors.
pub fn tame_divided_derivative(t: &TameSeries, n: u64) -> Result<TameSeries> {
    if n == 0 {
        return Ok(t.clone());
    }
    let f = t.field();
    let q = f.q as u64;
    let mut items: Vec<(TameExp, KRat)> = Vec::new();
    for (e, c) in t.terms() {
        let factors: Vec<i32> = e.digits().iter().flat_map(|&(i, d)| std::iter::repeat_n(i, d as usize)).collect();
        // (factor position, remaining order, kept indices, coefficient)
        let mut stack: Vec<(usize, u64, Vec<i32>, KRat)> = vec![(0, n, Vec::new(), c.clone())];
        while let Some((pos, rem, kept, coef)) = stack.pop() {
            if pos == factors.len() {
                if rem == 0 {
                    items.push((TameExp::from_digits(kept.iter().map(|&i| (i, 1))), coef));
                }
                continue;
            }
            let i = factors[pos];
            let mut k2 = kept.clone();
            k2.push(i);
            stack.push((pos + 1, rem, k2, coef.clone()));
            let mut qk = 1u64;
            let mut k = 0u32;
            while qk <= rem {
                stack.push((pos + 1, rem - qk, kept.clone(), coef.mul(&d_of_e(f, i, k)?)));
                qk *= q;
                k += 1;
            }
        }
    }
    let mut base = TameSeries::zero(f, t.bound);
    base.floor = None;
    Ok(base.add_reduced(items))
}

/// Expected leading coefficient of D_n(M_s) at M_{s−ℓ_q(n)}:
/// (−1)^n · l!/((l−ℓ)! Π n_k!) · Π_k (θ^{−m q^k}/d_k)^{n_k} when the digits of n fit into e_m^l.
pub fn kappa_n(f: &'static Field, s: u32, n: u64) -> Result<KRat> {
    let q = f.q as u64;
    let (m, l) = m_and_l(f.q, s);
    let ds = digits(n, q);
    let ell = digit_sum(n, q);
    if ell > l as u64 {
        return Ok(KRat::zero(f));
    }
    let fact = |k: u64| (1..=k).product::<u64>();
    let mut denom = fact(l as u64 - ell);
    let mut val = KRat::one(f);
    for (k, &nk) in ds.iter().enumerate() {
        denom *= fact(nk);
        let base = d_of_e(f, m as i32, k as u32)?;
        // d_of_e carries the sign (−1)^{q^k}; the product of signs is (−1)^n
        val = val.mul(&base.pow(nk));
    }
    let multi = (fact(l as u64) / denom) % f.p as u64;
    Ok(val.scale(f.from_int(multi as i64)))
}

/// Σ_n u^n f_n with tame coefficients in the circle subspace; exponents ≥ uprec unknown.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct UniformizerElem {
    f: &'static Field,
    terms: BTreeMap<i64, TameSeries>,
    pub uprec: i64,
}

impl UniformizerElem {
    pub fn zero(f: &'static Field, uprec: i64) -> Self {
        UniformizerElem { f, terms: BTreeMap::new(), uprec }
    }
    pub fn terms(&self) -> &BTreeMap<i64, TameSeries> {
        &self.terms
    }

    fn add_circle(&mut self, n: i64, t: TameSeries) {
        if n >= self.uprec || t.is_zero() {
            return;
        }
        let e = self.terms.entry(n).or_insert_with(|| TameSeries::zero(t.field(), t.bound));
        *e = e.add(&t);
        if e.is_zero() {
            self.terms.remove(&n);
        }
    }

    /// Add u^n·t, rewriting e_0 = u^{-1} and e_{−k} = Σ_i [θ^k, i] u^{−q^i}.
    pub fn add_tame(&mut self, n: i64, t: &TameSeries) {
        let f = self.f;
        for (e, c) in t.terms() {
            let (low, high) = e.split_nonpositive();
            // Laurent polynomial in u from the low digits
            let mut lp: BTreeMap<i64, KRat> = BTreeMap::from([(0, c.clone())]);
            for (i, d) in low {
                let base: BTreeMap<i64, KRat> = if i == 0 {
                    BTreeMap::from([(-1, KRat::one(f))])
                } else {
                    let a = ThetaPoly::theta_pow(f, (-i) as usize);
                    let mut qi = 1i64;
                    let mut m = BTreeMap::new();
                    for ci in carlitz_coeffs(&a) {
                        if !ci.is_zero() {
                            m.insert(-qi, KRat::from_theta_poly(&ci));
                        }
                        qi *= f.q as i64;
                    }
                    m
                };
                for _ in 0..d {
                    let mut next: BTreeMap<i64, KRat> = BTreeMap::new();
                    for (a, x) in &lp {
                        for (b, y) in &base {
                            let e = next.entry(a + b).or_insert_with(|| KRat::zero(f));
                            *e = e.add(&x.mul(y));
                        }
                    }
                    lp = next;
                }
            }
            for (k, x) in lp {
                self.add_circle(n + k, TameSeries::monomial(high.clone(), x, t.bound));
            }
        }
    }

    pub fn from_tame(n: i64, t: &TameSeries, uprec: i64) -> Self {
        let mut s = Self::zero(t.field(), uprec);
        s.add_tame(n, t);
        s
    }

    /// Multiply by a u-series with K(t) coefficients (grades ignored).
    pub fn mul_useries(&self, x: &USeries) -> Self {
        let xv = x.val().unwrap_or(x.uprec());
        let sv = self.terms.keys().next().copied().unwrap_or(self.uprec);
        let uprec = (self.uprec + xv).min(x.uprec() + sv);
        let mut out = Self::zero(self.f, uprec);
        for (n, t) in &self.terms {
            for (k, c) in x.terms() {
                if n + k < uprec {
                    out.add_circle(n + k, t.scale(c));
                }
            }
        }
        out
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut s = self.clone();
        s.uprec = s.uprec.min(o.uprec);
        let u = s.uprec;
        s.terms.retain(|k, _| *k < u);
        for (n, t) in &o.terms {
            s.add_circle(*n, t.clone());
        }
        s
    }
}

/// min_n (n − w(f_n)); certified when the minimum is below what unknown terms (n ≥ uprec, w < 1) could reach.
pub fn uniformizer_valuation(x: &UniformizerElem) -> Result<Rational64> {
    let v = x
        .terms
        .iter()
        .map(|(n, t)| Rational64::from(*n) - t.weight().expect("nonzero"))
        .min()
        .ok_or_else(|| Error::Invalid("valuation of zero".into()))?;
    if v >= Rational64::from(x.uprec - 1) {
        return Err(Error::Precision("valuation not certified below the u-precision".into()));
    }
    Ok(v)
}

/// Leibniz D_n(u·G) = Σ_{i+j=n} D_i(u) D_j(G) as an element of the field of uniformizers.
pub fn derivative_of_u_times(g: &TameSeries, n: u64, uprec: i64) -> Result<UniformizerElem> {
    let f = g.field();
    let u = USeries::monomial(f, 1, KRat::one(f), uprec);
    let mut out = UniformizerElem::zero(f, uprec);
    for i in 0..=n {
        let du = divided_derivative_u(&u, i as u32)?;
        let dg = tame_divided_derivative(g, n - i)?;
        if dg.is_zero() || du.is_zero() {
            continue;
        }
        let part = UniformizerElem::from_tame(0, &dg, uprec + 64).mul_useries(&du);
        out = out.add(&part);
    }
    Ok(out)
}

/// Valuation of the J-entry of the weight-one Eisenstein series Σ_{a∈A+} σ_I(a) ψ(1;σ_J)(az).
#[derive(Clone, Debug)]
pub struct EntryValuation {
    pub kappa: Rational64,
    /// Valuation of the a = 1 term u·[Π_{i∈J} χ_{t_i}]°.
    pub leading: Rational64,
    /// Valuation of the degree-one block, None when it vanishes below the u-precision.
    pub degree_one: Option<Rational64>,
    /// Lower bound q²κ(J) for all terms with deg a ≥ 2.
    pub higher_bound: Rational64,
    pub certified: bool,
}

impl EntryValuation {
    pub fn value(&self) -> Rational64 {
        self.leading
    }
    /// The a = 1 term is the unique minimum.
    pub fn dominant(&self) -> bool {
        self.degree_one.is_none_or(|d| d > self.leading) && self.higher_bound > self.leading
    }
}

pub fn eisenstein_entry_valuation(f: &'static Field, sigma: &[usize], j: &[usize], bound: u32, uprec: i64) -> Result<EntryValuation> {
    use crate::ffbase::SemiChar;
    use crate::goss::u_a_series;
    let kap = kappa(f.q, j.len() as u32);
    let (g, certified) = if j.is_empty() {
        (TameSeries::constant(KRat::one(f), bound as i32), true)
    } else {
        let p = perkins_tame(f, j, bound)?;
        (p.series, p.certified)
    };
    let leading = uniformizer_valuation(&UniformizerElem::from_tame(1, &g, uprec))?;
    let i_vars: Vec<usize> = sigma.iter().copied().filter(|v| !j.contains(v)).collect();
    let sigma_i = SemiChar::from_vars(&i_vars);
    let mut deg1 = UniformizerElem::zero(f, uprec);
    for &lambda in f.fq_elems() {
        let a = ThetaPoly::from_coeffs(f, vec![lambda, 1]);
        let c = KRat::from_poly(sigma_i.eval(&a)?);
        let shifted = g.subst_shift(lambda).scale(&c);
        let ua = u_a_series(&a, uprec)?;
        deg1 = deg1.add(&UniformizerElem::from_tame(0, &shifted, uprec + 64).mul_useries(&ua));
    }
    let degree_one = if deg1.terms().is_empty() { None } else { Some(uniformizer_valuation(&deg1)?) };
    let q2 = Rational64::from((f.q as i64).pow(2));
    Ok(EntryValuation { kappa: kap, leading, degree_one, higher_bound: q2 * kap, certified })
}

/// q^{1−m} − (l − ℓ_q(n)) q^{−m}, i.e. 1 − w_max(s − ℓ_q(n)).
pub fn order_valuation(q: u32, s: u32, n: u64) -> Option<Rational64> {
    let ell = digit_sum(n, q as u64) as u32;
    if s == 0 {
        return (n == 0).then(|| Rational64::from(1));
    }
    let (_, l) = m_and_l(q, s);
    (ell <= l).then(|| Rational64::from(1) - if s == ell { Rational64::from(0) } else { w_max(q, s - ell) })
}

/// v of D_n(u·[Π_{i∈J} χ_{t_i}]°), the u-side of ψ(n+1; σ_J).
pub fn higher_order_valuation(f: &'static Field, j: &[usize], n: u64, bound: u32, uprec: i64) -> Result<Rational64> {
    let g = perkins_tame(f, j, bound)?.series;
    uniformizer_valuation(&derivative_of_u_times(&g, n, uprec)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f3() -> &'static Field {
        Field::get(3, 1).unwrap()
    }

    #[test]
    fn single_rewrite() {
        let f = f3();
        let a = TameSeries::monomial(TameExp::from_digits([(1, 2)]), KRat::one(f), 4);
        let b = TameSeries::monomial(TameExp::e(1), KRat::one(f), 4);
        let p = a.mul(&b);
        assert_eq!(p.coeff(&TameExp::e(0)), KRat::one(f));
        assert_eq!(p.coeff(&TameExp::e(1)), KRat::from_poly(MPoly::theta(f).neg()));
        assert_eq!(p.terms().len(), 2);
    }

    #[test]
    fn maximal_weights() {
        assert_eq!(w_max(3, 1), Rational64::new(1, 3));
        assert_eq!(w_max(3, 3), Rational64::new(2, 3) + Rational64::new(1, 9));
        for s in 1..8 {
            assert_eq!(Rational64::from(1) - w_max(3, s), kappa(3, s));
            assert!(kappa(3, s + 1) < kappa(3, s));
        }
    }

    #[test]
    fn perkins_single_variable() {
        let f = f3();
        let p = perkins_tame(f, &[0], 4).unwrap();
        assert!(p.certified);
        assert_eq!(p.series.weight(), Some(Rational64::new(1, 3)));
        assert!(p.leading_coeff.is_one());
        let u = UniformizerElem::from_tame(1, &p.series, 10);
        assert_eq!(uniformizer_valuation(&u).unwrap(), Rational64::new(2, 3));
    }

    #[test]
    fn derivative_lowers_depth() {
        let f = f3();
        let p = perkins_tame(f, &[0, 1], 4).unwrap();
        let d = tame_divided_derivative(&p.series, 1).unwrap();
        assert!(d.depth() < p.series.depth());
        let d3 = tame_divided_derivative(&p.series, 5).unwrap();
        assert!(d3.is_zero());
    }

    #[test]
    fn kappa_n_matches_leading() {
        let f = f3();
        for s in 1..=5u32 {
            let ms = TameSeries::monomial(TameExp::maximal(3, s), KRat::one(f), 6);
            for n in 1..=4u64 {
                let ell = digit_sum(n, 3) as u32;
                let (_, l) = m_and_l(3, s);
                let d = tame_divided_derivative(&ms, n).unwrap();
                if ell > l {
                    continue;
                }
                let target = if s == ell { TameExp::one() } else { TameExp::maximal(3, s - ell) };
                assert_eq!(d.coeff(&target), kappa_n(f, s, n).unwrap(), "s={s} n={n}");
                assert_eq!(d.leading().unwrap().0, target);
            }
        }
    }

    #[test]
    fn entry_valuations_small() {
        let f = f3();
        let ev = eisenstein_entry_valuation(f, &[0, 1, 2], &[0, 1], 4, 20).unwrap();
        assert_eq!(ev.value(), ev.kappa);
        assert!(ev.dominant());
    }
}
