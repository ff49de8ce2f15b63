//! Twisted power sums, zeta values in Tate algebras and the harmonic product.
//!
//! - [`CompositionArray`]: rows (σ_i; n_i), parsed from `[(s{1,2};1),(1;q-1)]`
//! - [`SumSetting`]: the three choices of γ_a (a, 1/u_a as a u-series, e_C(az) at a point)
//! - [`zeta_value`]: ζ_A(C) truncated with a certified tail bound
//! - [`harmonic_coeffs`], [`harmonic_product`], [`verify_relation`]: the relation engine
//! - [`bernoulli_poly`], [`partition_formula_check`]: 𝔹_Σ and the partition formula for ζ_A(1;σ_Σ)
//!
//! Precisions of zeta values are in θ-units; internally they are scaled by the denominator D.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use num_integer::Integer;
use serde_json::{json, Value};

use crate::cinf::{default_den, omega_inv_product, pitilde, uniformizer_at, PSeries};
use crate::error::{Error, Result};
use crate::ffbase::{monic_polys, Elem, Field, KRat, MPoly, Mono, SemiChar, ThetaPoly, NVARS};
use crate::goss::{AExpander, USeries};

/// Matrix (σ_1 … σ_r; n_1 … n_r); the top row carries the largest degree.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CompositionArray {
    rows: Vec<(SemiChar, u32)>,
}

impl CompositionArray {
    /// Checked constructor: r ≥ 1 and every n_i ≥ 1.
    pub fn new(rows: Vec<(SemiChar, u32)>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Invalid("composition array needs at least one row".into()));
        }
        if rows.iter().any(|r| r.1 == 0) {
            return Err(Error::Invalid("weights must be positive".into()));
        }
        Ok(CompositionArray { rows })
    }
    /// Allows weight-0 rows below the top row (Σ σ(b) over lower degrees).
    pub(crate) fn new_relaxed(rows: Vec<(SemiChar, u32)>) -> Self {
        assert!(!rows.is_empty() && rows[0].1 > 0);
        CompositionArray { rows }
    }
    pub fn single(s: SemiChar, n: u32) -> Self {
        CompositionArray { rows: vec![(s, n)] }
    }
    pub fn scalar(ns: &[u32]) -> Result<Self> {
        Self::new(ns.iter().map(|&n| (SemiChar::trivial(), n)).collect())
    }
    pub fn rows(&self) -> &[(SemiChar, u32)] {
        &self.rows
    }
    pub fn depth(&self) -> usize {
        self.rows.len()
    }
    pub fn weight(&self) -> u32 {
        self.rows.iter().map(|r| r.1).sum()
    }
    /// Type Π σ_i.
    pub fn sigma(&self) -> SemiChar {
        self.rows.iter().fold(SemiChar::trivial(), |acc, r| acc.mul(&r.0))
    }

    pub fn parse(s: &str, q: u32) -> Result<Self> {
        let bad = || Error::Parse(format!("bad composition array {s}"));
        let body = s.trim();
        let body = body.strip_prefix('[').and_then(|b| b.strip_suffix(']')).unwrap_or(body);
        let mut rows = Vec::new();
        let mut depth = 0i32;
        let mut cur = String::new();
        let mut pieces = Vec::new();
        for ch in body.chars() {
            match ch {
                '(' | '{' => depth += 1,
                ')' | '}' => depth -= 1,
                _ => {}
            }
            if ch == ',' && depth == 0 {
                pieces.push(std::mem::take(&mut cur));
            } else {
                cur.push(ch);
            }
        }
        pieces.push(cur);
        for piece in pieces {
            let p = piece.trim();
            if p.is_empty() {
                continue;
            }
            let inner = p.strip_prefix('(').and_then(|x| x.strip_suffix(')')).ok_or_else(bad)?;
            let (sc, w) = inner.rsplit_once(';').ok_or_else(bad)?;
            let n = parse_weight(w, q)?;
            if n <= 0 {
                return Err(bad());
            }
            rows.push((SemiChar::parse(sc)?, n as u32));
        }
        Self::new(rows)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "rows": self.rows.iter().map(|(s, n)| json!({"sigma": s.to_string(), "n": n})).collect::<Vec<_>>(),
            "weight": self.weight(),
        })
    }
}

impl fmt::Display for CompositionArray {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.rows.iter().map(|(s, n)| format!("({s};{n})")).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

impl fmt::Debug for CompositionArray {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Integers and expressions such as `q-1`, `2q+1`, `q^2`.
pub fn parse_weight(s: &str, q: u32) -> Result<i64> {
    let bad = || Error::Parse(format!("bad weight {s}"));
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return Err(bad());
    }
    let mut total = 0i64;
    let mut i = 0;
    let b = t.as_bytes();
    while i < b.len() {
        let mut sign = 1;
        if b[i] == b'+' || b[i] == b'-' {
            if b[i] == b'-' {
                sign = -1;
            }
            i += 1;
        }
        let start = i;
        while i < b.len() && b[i] != b'+' && b[i] != b'-' {
            i += 1;
        }
        let term = &t[start..i];
        if term.is_empty() {
            return Err(bad());
        }
        let val = match term.find('q') {
            None => term.parse::<i64>().map_err(|_| bad())?,
            Some(pos) => {
                let coef = term[..pos].trim_end_matches('*');
                let c = if coef.is_empty() { 1 } else { coef.parse::<i64>().map_err(|_| bad())? };
                let rest = &term[pos + 1..];
                let e = if rest.is_empty() { 1 } else { rest.strip_prefix('^').ok_or_else(bad)?.parse::<u32>().map_err(|_| bad())? };
                c * (q as i64).pow(e)
            }
        };
        total += sign * val;
    }
    Ok(total)
}

/// The ring in which S_d(C) is evaluated, fixed by the choice of γ_a.
pub trait SumSetting {
    type V: Clone;
    fn field(&self) -> &'static Field;
    fn zero(&self) -> Self::V;
    fn one(&self) -> Self::V;
    fn add(&self, a: &Self::V, b: &Self::V) -> Self::V;
    fn mul(&self, a: &Self::V, b: &Self::V) -> Self::V;
    fn scale(&self, a: &Self::V, c: Elem) -> Self::V;
    /// σ(a)/γ_a^n.
    fn term(&mut self, a: &ThetaPoly, s: &SemiChar, n: u32) -> Result<Self::V>;
    /// Degree-d sums of weight n vanish to the working precision.
    fn negligible(&self, _d: usize, _n: u32) -> bool {
        false
    }
    fn vanishes(&self, a: &Self::V) -> bool;
    /// Valuation of a residual, None if zero to precision (for reports).
    fn residual_valuation(&self, a: &Self::V) -> Option<f64>;
}

/// γ_a = a with exact values in K(t).
pub struct ZetaExact {
    f: &'static Field,
}

impl ZetaExact {
    pub fn new(f: &'static Field) -> Self {
        ZetaExact { f }
    }
}

impl SumSetting for ZetaExact {
    type V = KRat;
    fn field(&self) -> &'static Field {
        self.f
    }
    fn zero(&self) -> KRat {
        KRat::zero(self.f)
    }
    fn one(&self) -> KRat {
        KRat::one(self.f)
    }
    fn add(&self, a: &KRat, b: &KRat) -> KRat {
        a.add(b)
    }
    fn mul(&self, a: &KRat, b: &KRat) -> KRat {
        a.mul(b)
    }
    fn scale(&self, a: &KRat, c: Elem) -> KRat {
        a.scale(c)
    }
    fn term(&mut self, a: &ThetaPoly, s: &SemiChar, n: u32) -> Result<KRat> {
        KRat::new(s.eval(a)?, a.pow(n as u64))
    }
    fn vanishes(&self, a: &KRat) -> bool {
        a.is_zero()
    }
    fn residual_valuation(&self, a: &KRat) -> Option<f64> {
        if a.is_zero() {
            None
        } else {
            let dn = a.num().theta_degree().unwrap_or(0) as f64;
            let dd = a.den().deg().unwrap_or(0) as f64;
            Some(dd - dn)
        }
    }
}

/// γ_a = a as 1/θ-expansions to absolute precision `prec` (numerator units).
pub struct ZetaSeries {
    f: &'static Field,
    den: u32,
    prec: i64,
    inv_cache: HashMap<(ThetaPoly, u32), PSeries>,
}

impl ZetaSeries {
    pub fn new(f: &'static Field, den: u32, prec: i64) -> Self {
        ZetaSeries { f, den, prec, inv_cache: HashMap::new() }
    }
    pub fn den(&self) -> u32 {
        self.den
    }
    pub fn prec(&self) -> i64 {
        self.prec
    }
}

impl SumSetting for ZetaSeries {
    type V = PSeries;
    fn field(&self) -> &'static Field {
        self.f
    }
    fn zero(&self) -> PSeries {
        PSeries::zero_to(self.f, self.den, self.prec)
    }
    fn one(&self) -> PSeries {
        PSeries::one(self.f, self.den)
    }
    fn add(&self, a: &PSeries, b: &PSeries) -> PSeries {
        a.add(b).truncate(self.prec)
    }
    fn mul(&self, a: &PSeries, b: &PSeries) -> PSeries {
        a.mul_cap(b, Some(self.prec)).truncate(self.prec)
    }
    fn scale(&self, a: &PSeries, c: Elem) -> PSeries {
        a.scale(c)
    }
    fn term(&mut self, a: &ThetaPoly, s: &SemiChar, n: u32) -> Result<PSeries> {
        let sa = s.eval(a)?;
        if sa.is_zero() {
            return Ok(self.zero());
        }
        let d = a.deg().unwrap_or(0) as i64;
        let extra = d * s.theta_pow() as i64 * self.den as i64;
        let key = (a.clone(), n);
        if !self.inv_cache.contains_key(&key) {
            let inv = PSeries::from_theta_poly(&a.pow(n as u64), self.den).inv(Some(self.prec + extra))?;
            self.inv_cache.insert(key.clone(), inv);
        }
        let inv = &self.inv_cache[&key];
        let out = if s.theta_pow() == 0 {
            inv.scale_poly(&sa)
        } else {
            inv.mul_cap(&PSeries::from_mixed(&sa, self.den), Some(self.prec))
        };
        Ok(out.truncate(self.prec))
    }
    fn vanishes(&self, a: &PSeries) -> bool {
        a.truncate(self.prec).is_zero()
    }
    fn residual_valuation(&self, a: &PSeries) -> Option<f64> {
        a.truncate(self.prec).val().map(|v| v as f64 / self.den as f64)
    }
}

/// γ_a = 1/u_a as u-series; `goss` replaces u_a^n by G_n(u_a).
pub struct Phi {
    f: &'static Field,
    exp: AExpander,
    goss: bool,
}

impl Phi {
    pub fn new(f: &'static Field, uprec: i64, goss: bool) -> Self {
        Phi { f, exp: AExpander::new(f, uprec), goss }
    }
    pub fn uprec(&self) -> i64 {
        self.exp.uprec()
    }
    /// Largest degree that contributes below the u-precision.
    pub fn dmax(&self) -> usize {
        self.exp.dmax()
    }
}

impl SumSetting for Phi {
    type V = USeries;
    fn field(&self) -> &'static Field {
        self.f
    }
    fn zero(&self) -> USeries {
        USeries::zero(self.field(), self.uprec())
    }
    fn one(&self) -> USeries {
        USeries::constant(KRat::one(self.field()), self.uprec())
    }
    fn add(&self, a: &USeries, b: &USeries) -> USeries {
        a.add(b)
    }
    fn mul(&self, a: &USeries, b: &USeries) -> USeries {
        a.mul(b).truncate(self.uprec())
    }
    fn scale(&self, a: &USeries, c: Elem) -> USeries {
        a.scale_elem(c)
    }
    fn term(&mut self, a: &ThetaPoly, s: &SemiChar, n: u32) -> Result<USeries> {
        let sa = s.eval(a)?;
        if sa.is_zero() {
            return Ok(self.zero());
        }
        let g = if n == 0 {
            self.one()
        } else if self.goss {
            self.exp.goss_at(n, a)?
        } else {
            self.exp.ua_pow(a, n as usize)?
        };
        Ok(g.scale(&KRat::from_poly(sa)))
    }
    fn negligible(&self, d: usize, n: u32) -> bool {
        n > 0 && (n as i64).saturating_mul((self.field().q as i64).pow(d as u32)) >= self.uprec()
    }
    fn vanishes(&self, a: &USeries) -> bool {
        a.is_zero()
    }
    fn residual_valuation(&self, a: &USeries) -> Option<f64> {
        a.val().map(|v| v as f64)
    }
}

/// γ_a = e_C(az) at a point z of the half-plane, values to absolute precision `prec`.
pub struct Sample {
    z: PSeries,
    prec: i64,
    cache: HashMap<ThetaPoly, PSeries>,
}

impl Sample {
    pub fn new(z: PSeries, prec: i64) -> Self {
        Sample { z, prec, cache: HashMap::new() }
    }
}

impl SumSetting for Sample {
    type V = PSeries;
    fn field(&self) -> &'static Field {
        self.z.field()
    }
    fn zero(&self) -> PSeries {
        PSeries::zero_to(self.field(), self.z.den(), self.prec)
    }
    fn one(&self) -> PSeries {
        PSeries::one(self.field(), self.z.den())
    }
    fn add(&self, a: &PSeries, b: &PSeries) -> PSeries {
        a.add(b).truncate(self.prec)
    }
    fn mul(&self, a: &PSeries, b: &PSeries) -> PSeries {
        a.mul_cap(b, Some(self.prec)).truncate(self.prec)
    }
    fn scale(&self, a: &PSeries, c: Elem) -> PSeries {
        a.scale(c)
    }
    fn term(&mut self, a: &ThetaPoly, s: &SemiChar, n: u32) -> Result<PSeries> {
        let sa = s.eval(a)?;
        if sa.is_zero() {
            return Ok(self.zero());
        }
        if !self.cache.contains_key(a) {
            let w = self.z.mul(&PSeries::from_theta_poly(a, self.z.den()));
            let u = uniformizer_at(&w, self.prec)?;
            self.cache.insert(a.clone(), u);
        }
        let u = &self.cache[a];
        let un = u.pow(n as i64, Some(self.prec))?;
        Ok(un.mul_cap(&PSeries::from_mixed(&sa, self.z.den()), Some(self.prec)).truncate(self.prec))
    }
    fn vanishes(&self, a: &PSeries) -> bool {
        a.truncate(self.prec).is_zero()
    }
    fn residual_valuation(&self, a: &PSeries) -> Option<f64> {
        a.truncate(self.prec).val().map(|v| v as f64 / self.z.den() as f64)
    }
}

/// Σ_{a ∈ A+(d)} σ(a)/γ_a^n.
pub fn degree_sum<S: SumSetting>(st: &mut S, s: &SemiChar, n: u32, d: usize) -> Result<S::V> {
    let mut acc = st.zero();
    if st.negligible(d, n) {
        return Ok(acc);
    }
    for a in monic_polys(st.field(), d) {
        let t = st.term(&a, s, n)?;
        acc = st.add(&acc, &t);
    }
    Ok(acc)
}

/// S_{(d_1,…,d_r)}(C) = Π_i S_{d_i}(σ_i; n_i) for strictly decreasing degrees.
pub fn power_sum<S: SumSetting>(st: &mut S, c: &CompositionArray, degs: &[usize]) -> Result<S::V> {
    if degs.len() != c.depth() {
        return Err(Error::Invalid("degree vector length differs from the depth".into()));
    }
    if degs.windows(2).any(|w| w[0] <= w[1]) {
        return Err(Error::Invalid("degrees must be strictly decreasing".into()));
    }
    let mut acc = st.one();
    for ((s, n), &d) in c.rows().iter().zip(degs) {
        let t = degree_sum(st, s, *n, d)?;
        acc = st.mul(&acc, &t);
    }
    Ok(acc)
}

/// S_d(C) = Σ_{d = d_1 > d_2 > … ≥ 0} for d = 0..=dmax.
pub fn nested_sums<S: SumSetting>(st: &mut S, c: &CompositionArray, dmax: usize) -> Result<Vec<S::V>> {
    let r = c.depth();
    let (s_last, n_last) = &c.rows()[r - 1];
    let mut cur: Vec<S::V> = Vec::with_capacity(dmax + 1);
    for d in 0..=dmax {
        cur.push(degree_sum(st, s_last, *n_last, d)?);
    }
    for i in (0..r - 1).rev() {
        let (s, n) = &c.rows()[i];
        let mut prefix = st.zero();
        let mut next = Vec::with_capacity(dmax + 1);
        for d in 0..=dmax {
            if d < r - 1 - i || st.vanishes(&prefix) {
                next.push(st.zero());
            } else {
                let t = degree_sum(st, s, *n, d)?;
                next.push(st.mul(&t, &prefix));
            }
            prefix = st.add(&prefix, &cur[d]);
        }
        cur = next;
    }
    Ok(cur)
}

/// Σ_{d ≤ dmax} S_d(C).
pub fn total_sum<S: SumSetting>(st: &mut S, c: &CompositionArray, dmax: usize) -> Result<S::V> {
    let v = nested_sums(st, c, dmax)?;
    Ok(v.iter().fold(st.zero(), |acc, x| st.add(&acc, x)))
}

/// Lower bound in θ-units for v(S_d(σ;n)): d·n' plus the cheapest way to give every
/// coefficient c_k of a a positive exponent divisible by q−1, where σ supplies up to `s`
/// exponents for free and the expansion of (1+y)^{-n'} supplies them in blocks.
pub fn power_sum_bound(f: &Field, s: u32, n_eff: i64, d: u32) -> i64 {
    if d == 0 || n_eff <= 0 {
        return 0;
    }
    let q = f.q as i64;
    let mut best = i64::MAX;
    let mut alloc = vec![0u32; d as usize];
    fn rec(k: usize, left: u32, alloc: &mut Vec<u32>, f: &Field, q: i64, best: &mut i64) {
        if k == alloc.len() {
            let d = alloc.len() as i64;
            // (factor, demand) with factor d − k, largest first
            let demands: Vec<(i64, i64)> = alloc
                .iter()
                .enumerate()
                .map(|(k, &fk)| {
                    let fk = fk as i64;
                    let need = if fk == 0 { q - 1 } else { (q - 1 - fk % (q - 1)) % (q - 1) };
                    (d - k as i64, need)
                })
                .collect();
            *best = (*best).min(transport_cost(f, &demands));
            return;
        }
        for x in 0..=left {
            alloc[k] = x;
            rec(k + 1, left - x, alloc, f, q, best);
        }
        alloc[k] = 0;
    }
    rec(0, s, &mut alloc, f, q, &mut best);
    (d as i64 * n_eff).saturating_add(best)
}

/// North-west corner assignment of demands (sorted by decreasing factor) to blocks of
/// capacity q−1 and unit cost q^R; for e > 1 the linear bound with unlimited capacity.
fn transport_cost(f: &Field, demands: &[(i64, i64)]) -> i64 {
    if f.e != 1 {
        return demands.iter().map(|(a, b)| a * b).sum();
    }
    let cap = f.q as i64 - 1;
    let mut cost = 0i64;
    let mut block_cost = 1i64;
    let mut left = cap;
    for &(factor, mut need) in demands {
        while need > 0 {
            let take = need.min(left);
            cost = cost.saturating_add(take.saturating_mul(factor).saturating_mul(block_cost));
            need -= take;
            left -= take;
            if left == 0 {
                left = cap;
                block_cost = block_cost.saturating_mul(f.q as i64);
            }
        }
    }
    cost
}

fn row_bound(f: &Field, s: &SemiChar, n: u32, d: u32) -> i64 {
    power_sum_bound(f, s.degree(), n as i64 - s.theta_pow() as i64, d)
}

/// ζ_A(C) to θ-precision `prec`, with the valuation bound of the omitted degrees.
#[derive(Clone, Debug)]
pub struct ZetaValue {
    pub value: PSeries,
    pub tail_bound: i64,
    pub dmax: usize,
    pub prec: i64,
}

impl ZetaValue {
    pub fn to_json(&self) -> Value {
        json!({"value": self.value.to_json(), "tail_bound": self.tail_bound, "dmax": self.dmax, "prec": self.prec})
    }
}

/// Degree cutoff with tail valuation ≥ prec, and the bound achieved.
pub fn zeta_cutoff(f: &Field, c: &CompositionArray, prec: i64) -> Result<(usize, i64)> {
    let (s0, n0) = &c.rows()[0];
    let n_eff = *n0 as i64 - s0.theta_pow() as i64;
    if n_eff < 1 {
        return Err(Error::Divergence(format!("{c} has a non-decaying top row")));
    }
    for (s, n) in &c.rows()[1..] {
        if (*n as i64) < s.theta_pow() as i64 {
            return Err(Error::Divergence(format!("{c} has a growing inner row")));
        }
    }
    let mut dmax = 0usize;
    loop {
        let b = row_bound(f, s0, *n0, dmax as u32 + 1);
        // the bound is non-decreasing in d: dropping the coordinate of largest factor from a
        // solution for d+1 leaves a feasible solution for d
        if b >= prec {
            return Ok((dmax, b));
        }
        dmax += 1;
        if dmax > 64 {
            return Err(Error::Precision("degree cutoff not found".into()));
        }
    }
}

pub fn zeta_value(f: &'static Field, c: &CompositionArray, prec: i64) -> Result<ZetaValue> {
    zeta_value_den(f, c, prec, default_den(f))
}

pub fn zeta_value_den(f: &'static Field, c: &CompositionArray, prec: i64, den: u32) -> Result<ZetaValue> {
    let (dmax, tail_bound) = zeta_cutoff(f, c, prec)?;
    let mut st = ZetaSeries::new(f, den, prec * den as i64);
    let value = total_sum(&mut st, c, dmax)?;
    Ok(ZetaValue { value, tail_bound, dmax, prec })
}

/// Σ c_j Π_k f_A(C_{j,k}); the empty product is 1.
pub type Combination = Vec<(Elem, Vec<CompositionArray>)>;

/// Evaluate a combination of products of full sums up to degree `dmax`.
pub fn eval_combination<S: SumSetting>(st: &mut S, comb: &Combination, dmax: usize) -> Result<S::V> {
    let mut cache: HashMap<CompositionArray, S::V> = HashMap::new();
    let mut acc = st.zero();
    for (c, prod) in comb {
        let mut p = st.one();
        for arr in prod {
            if !cache.contains_key(arr) {
                let v = total_sum(st, arr, dmax)?;
                cache.insert(arr.clone(), v);
            }
            p = st.mul(&p, &cache[arr]);
        }
        acc = st.add(&acc, &st.scale(&p, *c));
    }
    Ok(acc)
}

/// Degree cutoff so that every array of the combination is truncated below `prec` θ-units.
pub fn combination_cutoff(f: &Field, comb: &Combination, prec: i64) -> Result<usize> {
    let mut d = 0;
    for (_, prod) in comb {
        for arr in prod {
            d = d.max(zeta_cutoff(f, arr, prec)?.0);
        }
    }
    Ok(d)
}

/// c_{I,k} with Σ_{μ≠ν} Π_U(x_i+μ) Π_V(x_j+ν)/((z+μ)^α (z+ν)^β) = Σ c_{I,k} Σ_μ Π_I(x_i+μ)/(z+μ)^k.
/// Positions 0..n_u form U and n_u..n_u+n_v form V; I is a bit mask over positions.
#[derive(Clone, Debug)]
pub struct HarmonicCoeffs {
    pub n_u: usize,
    pub n_v: usize,
    pub alpha: u32,
    pub beta: u32,
    pub coeffs: BTreeMap<(u32, u32), Elem>,
    pub residual_zero: bool,
    pub unknowns: usize,
    pub equations: usize,
}

fn linear_xz(f: &'static Field, i: usize, mu: Elem) -> MPoly {
    MPoly::from_terms(f, vec![(Mono::t(i, 1), 1), (Mono::ONE, mu)])
}

pub fn harmonic_coeffs(f: &'static Field, n_u: usize, n_v: usize, alpha: u32, beta: u32) -> Result<HarmonicCoeffs> {
    let n = n_u + n_v;
    if n > NVARS {
        return Err(Error::Invalid(format!("at most {NVARS} semi-character slots")));
    }
    if alpha == 0 || beta == 0 {
        return Err(Error::Invalid("α and β must be positive".into()));
    }
    let big_n = alpha + beta;
    let fq: Vec<Elem> = f.fq_elems().to_vec();
    let z = ThetaPoly::theta_pow(f, 1);
    let zq_z = z.pow(f.q as u64).sub(&z);
    let q_mu: Vec<ThetaPoly> = fq
        .iter()
        .map(|&mu| fq.iter().filter(|&&l| l != mu).fold(ThetaPoly::one(f), |acc, &l| acc.mul(&z.add(&ThetaPoly::constant(f, l)))))
        .collect();
    // Π_{i ∈ mask}(x_i + μ) for all masks
    let prods: Vec<Vec<MPoly>> = fq
        .iter()
        .map(|&mu| {
            let mut v = vec![MPoly::one(f); 1 << n];
            for mask in 1usize..(1 << n) {
                let low = mask.trailing_zeros() as usize;
                v[mask] = v[mask & (mask - 1)].mul(&linear_xz(f, low, mu));
            }
            v
        })
        .collect();
    let u_mask = (1usize << n_u) - 1;
    let v_mask = ((1usize << n) - 1) ^ u_mask;
    let mut lhs = MPoly::zero(f);
    for (a, _) in fq.iter().enumerate() {
        for (b, _) in fq.iter().enumerate() {
            if a == b {
                continue;
            }
            let zz = q_mu[a].pow(alpha as u64).mul(&q_mu[b].pow(beta as u64));
            lhs = lhs.add(&prods[a][u_mask].mul(&prods[b][v_mask]).mul_theta_poly(&zz));
        }
    }
    // columns: k = 1..N−1 first, k = N last
    let mut cols: Vec<(u32, u32)> = Vec::new();
    for k in (1..big_n).chain(std::iter::once(big_n)) {
        for mask in 0..(1u32 << n) {
            cols.push((mask, k));
        }
    }
    let basis: Vec<MPoly> = cols
        .iter()
        .map(|&(mask, k)| {
            let mut acc = MPoly::zero(f);
            for (a, _) in fq.iter().enumerate() {
                let zz = q_mu[a].pow(k as u64).mul(&zq_z.pow((big_n - k) as u64));
                acc = acc.add(&prods[a][mask as usize].mul_theta_poly(&zz));
            }
            acc
        })
        .collect();
    // equations over F_p: one per (monomial, coordinate)
    let mut monos: Vec<Mono> = lhs.terms().iter().map(|t| t.0).collect();
    for b in &basis {
        monos.extend(b.terms().iter().map(|t| t.0));
    }
    monos.sort_unstable();
    monos.dedup();
    let index: HashMap<Mono, usize> = monos.iter().enumerate().map(|(i, m)| (*m, i)).collect();
    let dim = f.degree() as usize;
    let p = f.p;
    let nrows = monos.len() * dim;
    let ncols = cols.len();
    let mut mat = vec![vec![0u32; ncols + 1]; nrows];
    for (j, b) in basis.iter().enumerate() {
        for (m, c) in b.terms() {
            for (k, x) in f.coords(*c).into_iter().enumerate() {
                mat[index[m] * dim + k][j] = x;
            }
        }
    }
    for (m, c) in lhs.terms() {
        for (k, x) in f.coords(*c).into_iter().enumerate() {
            mat[index[m] * dim + k][ncols] = x;
        }
    }
    let sol = solve_mod_p(&mut mat, ncols, p).ok_or_else(|| Error::Invalid("inconsistent harmonic system".into()))?;
    let mut coeffs = BTreeMap::new();
    let mut check = MPoly::zero(f);
    for (j, &c) in sol.iter().enumerate() {
        if c != 0 {
            let e = f.from_int(c as i64);
            coeffs.insert(cols[j], e);
            check = check.add(&basis[j].scale(e));
        }
    }
    let residual_zero = check.sub(&lhs).is_zero();
    Ok(HarmonicCoeffs { n_u, n_v, alpha, beta, coeffs, residual_zero, unknowns: ncols, equations: nrows })
}

/// Row reduction mod p; pivots chosen left to right, free unknowns set to 0.
fn solve_mod_p(mat: &mut [Vec<u32>], ncols: usize, p: u32) -> Option<Vec<u32>> {
    let inv = |a: u32| -> u32 {
        let mut r = 1u64;
        let mut b = a as u64;
        let mut e = p as u64 - 2;
        while e > 0 {
            if e & 1 == 1 {
                r = r * b % p as u64;
            }
            b = b * b % p as u64;
            e >>= 1;
        }
        r as u32
    };
    let nrows = mat.len();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        let Some(pr) = (row..nrows).find(|&r| mat[r][col] != 0) else { continue };
        mat.swap(row, pr);
        let iv = inv(mat[row][col]);
        for x in mat[row].iter_mut() {
            *x = (*x as u64 * iv as u64 % p as u64) as u32;
        }
        let pivot_row = mat[row].clone();
        for (r, line) in mat.iter_mut().enumerate() {
            if r != row && line[col] != 0 {
                let factor = line[col];
                for (x, y) in line.iter_mut().zip(&pivot_row) {
                    *x = (*x + p - (factor as u64 * *y as u64 % p as u64) as u32) % p;
                }
            }
        }
        pivots.push((row, col));
        row += 1;
        if row == nrows {
            break;
        }
    }
    if mat[row..].iter().any(|r| r[ncols] != 0) {
        return None;
    }
    let mut sol = vec![0u32; ncols];
    for (r, c) in pivots {
        sol[c] = mat[r][ncols];
    }
    Some(sol)
}

/// S_d(C1) S_d(C2) − S_d(σψ; m+n) = Σ f · S_d(α, β; i, j).
#[derive(Clone, Debug)]
pub struct HarmonicRelation {
    pub lhs: (CompositionArray, CompositionArray),
    pub rhs: Vec<(CompositionArray, Elem)>,
    pub coeffs: HarmonicCoeffs,
}

impl HarmonicRelation {
    pub fn product(&self) -> CompositionArray {
        let (a, b) = &self.lhs;
        CompositionArray::single(a.sigma().mul(&b.sigma()), a.weight() + b.weight())
    }
    /// Every right-hand array has type σψ and weight m+n.
    pub fn degree_preserving(&self) -> bool {
        let p = self.product();
        self.rhs.iter().all(|(c, _)| c.sigma() == p.sigma() && c.weight() == p.weight())
    }
    pub fn to_json(&self) -> Value {
        json!({
            "lhs": [self.lhs.0.to_string(), self.lhs.1.to_string()],
            "rhs": self.rhs.iter().map(|(c, e)| json!({"array": c.to_string(), "coeff": e})).collect::<Vec<_>>(),
            "solver_residual_zero": self.coeffs.residual_zero,
        })
    }
}

impl fmt::Display for HarmonicRelation {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(out, "S{}·S{} − S{} =", self.lhs.0, self.lhs.1, self.product())?;
        if self.rhs.is_empty() {
            return write!(out, " 0");
        }
        for (c, e) in &self.rhs {
            write!(out, " + {e}·S{c}")?;
        }
        Ok(())
    }
}

fn slots(s: &SemiChar) -> Vec<usize> {
    s.exps().iter().flat_map(|(&i, &k)| std::iter::repeat_n(i, k as usize)).collect()
}

pub fn harmonic_product(f: &'static Field, c1: &CompositionArray, c2: &CompositionArray) -> Result<HarmonicRelation> {
    if c1.depth() != 1 || c2.depth() != 1 {
        return Err(Error::Invalid("harmonic product takes depth-one arrays".into()));
    }
    let (s1, m) = &c1.rows()[0];
    let (s2, n) = &c2.rows()[0];
    if s1.theta_pow() > 0 || s2.theta_pow() > 0 {
        return Err(Error::Invalid("a-power semi-characters are not supported by the relation engine".into()));
    }
    let labels: Vec<usize> = slots(s1).into_iter().chain(slots(s2)).collect();
    let hc = harmonic_coeffs(f, slots(s1).len(), slots(s2).len(), *m, *n)?;
    let big_n = m + n;
    let mut acc: BTreeMap<CompositionArray, Elem> = BTreeMap::new();
    for (&(mask, k), &c) in &hc.coeffs {
        let mut ei: BTreeMap<usize, u32> = BTreeMap::new();
        let mut ej: BTreeMap<usize, u32> = BTreeMap::new();
        for (pos, &v) in labels.iter().enumerate() {
            let target = if mask >> pos & 1 == 1 { &mut ei } else { &mut ej };
            *target.entry(v).or_insert(0) += 1;
        }
        let arr = CompositionArray::new_relaxed(vec![(SemiChar::from_exps(ei, 0), k), (SemiChar::from_exps(ej, 0), big_n - k)]);
        let e = acc.entry(arr).or_insert(0);
        *e = f.add(*e, c);
    }
    let rhs = acc.into_iter().filter(|(_, e)| *e != 0).collect();
    Ok(HarmonicRelation { lhs: (c1.clone(), c2.clone()), rhs, coeffs: hc })
}

/// Per-degree outcome of a relation check.
#[derive(Clone, Debug)]
pub struct RelationReport {
    pub degrees: usize,
    pub first_failure: Option<usize>,
    pub min_residual: Option<f64>,
}

impl RelationReport {
    pub fn passed(&self) -> bool {
        self.first_failure.is_none()
    }
}

/// Check the relation degree by degree for d ≤ dmax.
pub fn verify_relation<S: SumSetting>(st: &mut S, r: &HarmonicRelation, dmax: usize) -> Result<RelationReport> {
    let (c1, c2) = &r.lhs;
    let p = r.product();
    let mut nested: Vec<(Vec<S::V>, Elem)> = Vec::new();
    for (arr, e) in &r.rhs {
        nested.push((nested_sums(st, arr, dmax)?, *e));
    }
    let mut first_failure = None;
    let mut min_residual: Option<f64> = None;
    for d in 0..=dmax {
        let a = degree_sum(st, &c1.rows()[0].0, c1.rows()[0].1, d)?;
        let b = degree_sum(st, &c2.rows()[0].0, c2.rows()[0].1, d)?;
        let ab = degree_sum(st, &p.rows()[0].0, p.rows()[0].1, d)?;
        let mut diff = st.add(&st.mul(&a, &b), &st.scale(&ab, st.field().neg(1)));
        for (v, e) in &nested {
            diff = st.add(&diff, &st.scale(&v[d], st.field().neg(*e)));
        }
        if !st.vanishes(&diff) {
            if first_failure.is_none() {
                first_failure = Some(d);
            }
            let rv = st.residual_valuation(&diff);
            min_residual = match (min_residual, rv) {
                (Some(x), Some(y)) => Some(x.min(y)),
                (x, y) => x.or(y),
            };
        }
    }
    Ok(RelationReport { degrees: dmax + 1, first_failure, min_residual })
}

/// φ_A(C) truncated at `uprec`; every degree that reaches below the precision is enumerated.
pub fn phi_series(f: &'static Field, c: &CompositionArray, uprec: i64, goss: bool) -> Result<USeries> {
    let mut st = Phi::new(f, uprec, goss);
    let dmax = st.dmax();
    total_sum(&mut st, c, dmax)
}

/// A relation checked per degree in the ζ- and φ-settings and in summed form in both.
#[derive(Clone, Debug)]
pub struct RelationCheck {
    pub zeta: RelationReport,
    pub phi: RelationReport,
    /// Valuation of the summed residual in θ-units, None when it vanishes to precision.
    pub summed_zeta: Option<f64>,
    /// u-order of the summed residual, None when it vanishes to precision.
    pub summed_phi: Option<f64>,
}

impl RelationCheck {
    pub fn passed(&self) -> bool {
        self.zeta.passed() && self.phi.passed() && self.summed_zeta.is_none() && self.summed_phi.is_none()
    }
    pub fn to_json(&self) -> Value {
        json!({
            "zeta_first_failure": self.zeta.first_failure,
            "phi_first_failure": self.phi.first_failure,
            "degrees": self.zeta.degrees,
            "summed_zeta_residual": self.summed_zeta,
            "summed_phi_residual": self.summed_phi,
            "passed": self.passed(),
        })
    }
}

/// Per-degree checks for d ≤ dmax, summed checks at θ-precision `prec` and u-precision `uprec`.
pub fn check_relation(f: &'static Field, r: &HarmonicRelation, dmax: usize, prec: i64, uprec: i64) -> Result<RelationCheck> {
    let mut ex = ZetaExact::new(f);
    let zeta = verify_relation(&mut ex, r, dmax)?;
    let mut phi = Phi::new(f, uprec, false);
    let phi_rep = verify_relation(&mut phi, r, dmax)?;
    let comb = summed_relation(f, r);
    let den = default_den(f);
    let d = combination_cutoff(f, &comb, prec)?;
    let mut st = ZetaSeries::new(f, den, prec * den as i64);
    let v = eval_combination(&mut st, &comb, d)?;
    let summed_zeta = st.residual_valuation(&v);
    let dm = phi.dmax();
    let v = eval_combination(&mut phi, &comb, dm)?;
    let summed_phi = phi.residual_valuation(&v);
    Ok(RelationCheck { zeta, phi: phi_rep, summed_zeta, summed_phi })
}

/// Number of ordered splits U ⊔ V of an s-set with |U| ≡ |V| ≡ 1 mod q−1, both nonempty.
pub fn fa_split_count(q: u32, s: u32) -> u64 {
    let q1 = q as u64 - 1;
    let mut binom = 1u64;
    let mut total = 0u64;
    for k in 0..=s as u64 {
        if k > 0 {
            binom = binom * (s as u64 - k + 1) / k;
        }
        let l = s as u64 - k;
        if k > 0 && l > 0 && k % q1 == 1 % q1 && l % q1 == 1 % q1 {
            total += binom;
        }
    }
    total
}

/// The summed form f_A(C1) f_A(C2) − [f(σψ) + f(σ,ψ) + f(ψ,σ) + Σ f·f(α,β)] as a combination.
pub fn summed_relation(f: &Field, r: &HarmonicRelation) -> Combination {
    let (c1, c2) = &r.lhs;
    let (s1, m) = c1.rows()[0].clone();
    let (s2, n) = c2.rows()[0].clone();
    let m1 = f.neg(1);
    let mut comb: Combination = vec![(1, vec![c1.clone(), c2.clone()]), (m1, vec![r.product()])];
    comb.push((m1, vec![CompositionArray::new_relaxed(vec![(s1.clone(), m), (s2.clone(), n)])]));
    comb.push((m1, vec![CompositionArray::new_relaxed(vec![(s2, n), (s1, m)])]));
    for (arr, e) in &r.rhs {
        comb.push((f.neg(*e), vec![arr.clone()]));
    }
    comb
}

fn chi(i: usize) -> SemiChar {
    SemiChar::chi(i)
}

/// ζ(1;χ_t)ζ(q−1) − ζ(q;χ_t) − ζ(χ_t,𝟏;1,q−1), which should vanish.
pub fn three_special_combination(f: &Field) -> Combination {
    let q = f.q;
    let m1 = f.neg(1);
    vec![
        (1, vec![CompositionArray::single(chi(0), 1), CompositionArray::single(SemiChar::trivial(), q - 1)]),
        (m1, vec![CompositionArray::single(chi(0), q)]),
        (m1, vec![CompositionArray::new_relaxed(vec![(chi(0), 1), (SemiChar::trivial(), q - 1)])]),
    ]
}

/// f(q+1;σ_Σ) − f(1;χ1)f(q;χ2) − f(q;χ1)f(1;χ2) + f(q−1)f(1;χ1)f(1;χ2) with Σ = {1,2}.
pub fn formula_q_plus_one_combination(f: &Field) -> Combination {
    let q = f.q;
    let m1 = f.neg(1);
    let s12 = SemiChar::from_vars(&[0, 1]);
    let c = |s: SemiChar, n: u32| CompositionArray::single(s, n);
    vec![
        (1, vec![c(s12, q + 1)]),
        (m1, vec![c(chi(0), 1), c(chi(1), q)]),
        (m1, vec![c(chi(0), q), c(chi(1), 1)]),
        (1, vec![c(SemiChar::trivial(), q - 1), c(chi(0), 1), c(chi(1), 1)]),
    ]
}

/// Σ_{(U,V)} f(σ_U;1) f(σ_V;1) − 2 f(σ_Σ;2) over ordered splits with |U| ≡ |V| ≡ 1 mod q−1.
pub fn identity_with_fa_combination(f: &Field, vars: &[usize]) -> Combination {
    let q1 = f.q as usize - 1;
    let s = vars.len();
    let mut comb: Combination = Vec::new();
    for mask in 0u32..(1 << s) {
        let u: Vec<usize> = (0..s).filter(|i| mask >> i & 1 == 1).map(|i| vars[i]).collect();
        let v: Vec<usize> = (0..s).filter(|i| mask >> i & 1 == 0).map(|i| vars[i]).collect();
        if u.len() % q1 == 1 % q1 && v.len() % q1 == 1 % q1 && !u.is_empty() && !v.is_empty() {
            comb.push((1, vec![CompositionArray::single(SemiChar::from_vars(&u), 1), CompositionArray::single(SemiChar::from_vars(&v), 1)]));
        }
    }
    comb.push((f.neg(f.from_int(2)), vec![CompositionArray::single(SemiChar::from_vars(vars), 2)]));
    comb
}

/// Brute-force check that the S_{m,n} partition A+(d)² minus the diagonal and the S'_{m,n}
/// partition A+(d) × A+(<d), with S' equal exactly when S is.
pub fn partition_check(f: &'static Field, d: usize) -> bool {
    if d == 0 {
        return true;
    }
    let top = monic_polys(f, d);
    let low: Vec<ThetaPoly> = (0..d).flat_map(|j| monic_polys(f, j)).collect();
    let idx: HashMap<ThetaPoly, usize> = top.iter().enumerate().map(|(i, a)| (a.clone(), i)).collect();
    let lidx: HashMap<ThetaPoly, usize> = low.iter().enumerate().map(|(i, a)| (a.clone(), i)).collect();
    let fq = f.fq_elems();
    let mut s_sets: Vec<Vec<(usize, usize)>> = Vec::new();
    let mut sp_sets: Vec<Vec<(usize, usize)>> = Vec::new();
    for n in &top {
        for m in &low {
            let shifted: Vec<usize> = fq.iter().map(|&mu| idx[&n.add(&m.scale(mu))]).collect();
            let mut s: Vec<(usize, usize)> = Vec::new();
            for (i, &a) in shifted.iter().enumerate() {
                for (j, &b) in shifted.iter().enumerate() {
                    if i != j {
                        s.push((a, b));
                    }
                }
            }
            s.sort_unstable();
            let mut sp: Vec<(usize, usize)> = shifted.iter().map(|&a| (a, lidx[m])).collect();
            sp.sort_unstable();
            s_sets.push(s);
            sp_sets.push(sp);
        }
    }
    let is_partition = |sets: &[Vec<(usize, usize)>], universe: usize| -> bool {
        let distinct: HashSet<&Vec<(usize, usize)>> = sets.iter().collect();
        let mut seen: HashSet<(usize, usize)> = HashSet::new();
        for s in &distinct {
            for x in s.iter() {
                if !seen.insert(*x) {
                    return false;
                }
            }
        }
        seen.len() == universe
    };
    let nt = top.len();
    if !is_partition(&s_sets, nt * nt - nt) || !is_partition(&sp_sets, nt * low.len()) {
        return false;
    }
    for i in 0..s_sets.len() {
        for j in i + 1..s_sets.len() {
            if (s_sets[i] == s_sets[j]) != (sp_sets[i] == sp_sets[j]) {
                return false;
            }
        }
    }
    true
}

/// 𝔹_Σ recovered as a polynomial in θ and t_Σ.
#[derive(Clone, Debug)]
pub struct BernoulliResult {
    pub poly: MPoly,
    pub m: u32,
    pub prec: i64,
    /// All terms of negative θ-degree vanish to `prec` and the remaining exponents are integral.
    pub recognized: bool,
    pub monic: bool,
}

impl BernoulliResult {
    pub fn to_json(&self) -> Value {
        json!({"poly": self.poly.to_string(), "m": self.m, "prec": self.prec, "recognized": self.recognized, "monic": self.monic})
    }
}

fn sigma_vars(vars: &[usize]) -> SemiChar {
    SemiChar::from_vars(vars)
}

/// 𝔹_Σ = (−1)^m ζ_A(1;σ_Σ) ω_Σ / π̃ with |Σ| = m(q−1)+1 > 1.
pub fn bernoulli_poly(f: &'static Field, vars: &[usize], prec: i64) -> Result<BernoulliResult> {
    let q = f.q as i64;
    let s = vars.len() as i64;
    if s <= 1 || (s - 1) % (q - 1) != 0 {
        return Err(Error::Invalid("|Σ| must be ≡ 1 mod q−1 and > 1".into()));
    }
    let m = ((s - 1) / (q - 1)) as u32;
    if prec < m as i64 * q {
        return Err(Error::Precision(format!("recognition needs prec ≥ m·q = {}", m as i64 * q)));
    }
    let den = default_den(f);
    let dn = den as i64;
    // ζ = (−1)^m π̃ 𝔹 Π ω(t_i)^{-1}; dividing keeps t-degrees bounded, where multiplying by
    // Π ω(t_i) does not. The divisor has valuation (m−1) and the quotient valuation ≥ −(m−1).
    let vd = (m as i64 - 1) * dn;
    let z = zeta_value_den(f, &CompositionArray::single(sigma_vars(vars), 1), prec + m as i64 - 1, den)?.value;
    let pd = prec * dn + 2 * vd;
    let v_psi = s * dn / (q - 1);
    let v_pt = -q * dn / (q - 1);
    let divisor = pitilde(f, den, pd - v_psi)?.mul_cap(&omega_inv_product(f, den, vars, pd - v_pt)?, Some(pd));
    let (mut b, _) = z.long_div(&divisor, prec * dn)?;
    if m % 2 == 1 {
        b = b.neg();
    }
    let bprec = b.prec().unwrap_or(i64::MAX).min(prec * dn);
    let mut recognized = bprec >= prec * dn;
    let mut poly = MPoly::zero(f);
    for (&e, c) in b.terms() {
        if e >= bprec {
            continue;
        }
        if e > 0 || e % dn != 0 {
            recognized = false;
            continue;
        }
        poly = poly.add(&c.mul_term(Mono::theta((-e / dn) as u32), 1));
    }
    let monic = poly.theta_degree() == Some(m - 1) && poly.theta_slice(m - 1).is_one();
    Ok(BernoulliResult { poly, m, prec, recognized, monic })
}

/// Ordered partitions U_1 ⊔ … ⊔ U_m of `vars` with Σ q^{-i}|U_i| = 1, as block labels 1..=m.
pub fn partition_splits(q: u32, vars: &[usize], m: u32) -> Vec<Vec<u32>> {
    let s = vars.len();
    let qm = (q as i64).pow(m);
    let mut out = Vec::new();
    let mut lab = vec![1u32; s];
    loop {
        let total: i64 = lab.iter().map(|&i| (q as i64).pow(m - i)).sum();
        if total == qm {
            out.push(lab.clone());
        }
        // next assignment in base m
        let mut k = 0;
        loop {
            if k == s {
                return out;
            }
            if lab[k] < m {
                lab[k] += 1;
                break;
            }
            lab[k] = 1;
            k += 1;
        }
    }
}

/// (−1)^{m−1} Σ Π_i B*_i(t_{U_i}) with b*_i(t) = Π_{k=1}^{i−1} (t − θ^{1/q^k}), exactly.
pub fn bernoulli_star(f: &'static Field, vars: &[usize], m: u32, den: u32) -> Result<PSeries> {
    let q = f.q as i64;
    if den as i64 % q.pow(m.saturating_sub(1)) != 0 {
        return Err(Error::Invalid("denominator must absorb q^{m−1}".into()));
    }
    let mut acc = PSeries::zero(f, den);
    for lab in partition_splits(f.q, vars, m) {
        let mut prod = PSeries::one(f, den);
        for (pos, &i) in lab.iter().enumerate() {
            for k in 1..i {
                let t = PSeries::constant(MPoly::var_t(f, vars[pos])?, den);
                let root = PSeries::monomial(f, den, -(den as i64) / q.pow(k), MPoly::one(f));
                prod = prod.mul(&t.sub(&root));
            }
        }
        acc = acc.add(&prod);
    }
    Ok(if m.is_multiple_of(2) { acc.neg() } else { acc })
}

/// Outcome of the partition formula check for ζ_A(1;σ_Σ).
#[derive(Clone, Debug)]
pub struct PartitionFormulaReport {
    pub m: u32,
    pub splits: usize,
    pub prec: i64,
    pub residual_valuation: Option<f64>,
}

impl PartitionFormulaReport {
    pub fn passed(&self) -> bool {
        self.residual_valuation.is_none()
    }
}

/// ζ_A(1;σ_Σ) − Σ Π_i τ^{-i}(Π_{j∈U_i} ζ_A(1;χ_{t_j})) to θ-precision `prec`, |Σ| = m(q−1)+1.
pub fn partition_formula_check(f: &'static Field, m: u32, prec: i64) -> Result<PartitionFormulaReport> {
    let q = f.q;
    if q <= m {
        return Err(Error::Invalid("the formula needs q > m".into()));
    }
    let s = (m * (q - 1) + 1) as usize;
    let vars: Vec<usize> = (0..s).collect();
    let den = default_den(f);
    let dn = den as i64;
    let lhs = zeta_value_den(f, &CompositionArray::single(sigma_vars(&vars), 1), prec, den)?.value;
    let qm = (q as i64).pow(m);
    let base = zeta_value_den(f, &CompositionArray::single(chi(0), 1), prec * qm, den)?.value;
    let mut per_var: Vec<PSeries> = Vec::with_capacity(s);
    for &v in &vars {
        let t = MPoly::var_t(f, v)?;
        per_var.push(base.map_coeffs(|c| c.subst_t(0, &t)));
    }
    let splits = partition_splits(q, &vars, m);
    let mut rhs = PSeries::zero(f, den);
    for lab in &splits {
        let mut prod = PSeries::one(f, den);
        for i in 1..=m {
            let cap = prec * dn * (q as i64).pow(i);
            let mut block = PSeries::one(f, den);
            for (pos, &l) in lab.iter().enumerate() {
                if l == i {
                    block = block.mul_cap(&per_var[pos], Some(cap)).truncate(cap);
                }
            }
            let tw = block.twist(-(i as i32));
            prod = prod.mul_cap(&tw, Some(prec * tw.den() as i64));
        }
        rhs = rhs.add(&prod);
    }
    let diff = lhs.sub(&rhs);
    let d = diff.den() as i64;
    let diff = diff.truncate(prec * d);
    Ok(PartitionFormulaReport {
        m,
        splits: splits.len(),
        prec,
        residual_valuation: diff.val().map(|v| v as f64 / d as f64),
    })
}

/// (θ − t)ω(t)ζ_A(1;χ_t)/π̃ − 1 to θ-precision `prec`.
pub fn first_formula_residual(f: &'static Field, prec: i64) -> Result<PSeries> {
    let den = default_den(f);
    let dn = den as i64;
    let q = f.q as i64;
    let margin = Integer::div_ceil(&(q * dn), &(q - 1)) + dn;
    let z = zeta_value_den(f, &CompositionArray::single(chi(0), 1), prec + 2 + margin / dn, den)?.value;
    let w = crate::cinf::omega(f, den, 0, prec * dn + 2 * margin)?;
    let tl = PSeries::from_mixed(&MPoly::theta(f).sub(&MPoly::var_t(f, 0)?), den);
    let num = tl.mul(&w).mul_cap(&z, Some(prec * dn + margin));
    let pt = pitilde(f, den, prec * dn + 2 * margin)?;
    let r = num.div(&pt, Some(prec * dn))?;
    Ok(r.sub(&PSeries::one(f, den)).truncate(prec * dn))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f3() -> &'static Field {
        Field::get(3, 1).unwrap()
    }

    #[test]
    fn parse_arrays() {
        let c = CompositionArray::parse("[(s{1,2};1),(1;q-1)]", 3).unwrap();
        assert_eq!(c.depth(), 2);
        assert_eq!(c.weight(), 3);
        assert_eq!(c.to_string(), "[(s{1,2};1),(1;2)]");
        assert_eq!(parse_weight("2q+1", 3).unwrap(), 7);
        assert_eq!(parse_weight("q^2-q", 3).unwrap(), 6);
        assert!(CompositionArray::parse("[(1;0)]", 3).is_err());
    }

    #[test]
    fn small_power_sums() {
        let f = f3();
        let mut st = ZetaExact::new(f);
        let one = degree_sum(&mut st, &SemiChar::trivial(), 1, 0).unwrap();
        assert!(one.is_one());
        let s1 = degree_sum(&mut st, &SemiChar::trivial(), 1, 1).unwrap();
        let th = ThetaPoly::theta_pow(f, 1);
        let expect = KRat::from_theta_poly(&th.pow(3).sub(&th)).inv().unwrap().neg();
        assert_eq!(s1, expect);
    }

    #[test]
    fn bound_examples() {
        let f = f3();
        assert_eq!(power_sum_bound(f, 1, 1, 6), 728);
        assert_eq!(power_sum_bound(f, 5, 1, 5), 28);
        assert_eq!(power_sum_bound(f, 5, 1, 6), 82);
        assert_eq!(power_sum_bound(f, 1, 1, 1), 2);
    }

    #[test]
    fn bound_is_respected() {
        let f = f3();
        let mut st = ZetaExact::new(f);
        for (s, n) in [(SemiChar::trivial(), 1), (SemiChar::trivial(), 2), (SemiChar::chi(0), 1), (SemiChar::from_vars(&[0, 1]), 1), (SemiChar::trivial(), 4)] {
            for d in 0..=3usize {
                let v = degree_sum(&mut st, &s, n, d).unwrap();
                if v.is_zero() {
                    continue;
                }
                let val = v.den().deg().unwrap() as i64 - v.num().theta_degree().unwrap() as i64;
                assert!(val >= row_bound(f, &s, n, d as u32), "{s} {n} {d}");
            }
        }
    }

    #[test]
    fn partitions_small() {
        for p in [2, 3] {
            let f = Field::get(p, 1).unwrap();
            for d in 0..=2 {
                assert!(partition_check(f, d));
            }
        }
    }

    #[test]
    fn trivial_weight_one_product() {
        let f = f3();
        let hc = harmonic_coeffs(f, 0, 0, 1, 1).unwrap();
        assert!(hc.residual_zero);
        assert!(hc.coeffs.is_empty());
    }

    #[test]
    fn first_formula_holds() {
        for p in [2, 3] {
            let f = Field::get(p, 1).unwrap();
            assert!(first_formula_residual(f, 30).unwrap().vanishes());
        }
    }

    #[test]
    fn three_special_in_all_settings() {
        for p in [2, 3] {
            let f = Field::get(p, 1).unwrap();
            let q = f.q;
            let rel = harmonic_product(f, &CompositionArray::single(SemiChar::chi(0), 1), &CompositionArray::single(SemiChar::trivial(), q - 1)).unwrap();
            assert!(rel.coeffs.residual_zero && rel.degree_preserving());
            // the only correction term is −S(𝟏,χ_t;q−1,1)
            let expect = CompositionArray::new_relaxed(vec![(SemiChar::trivial(), q - 1), (SemiChar::chi(0), 1)]);
            assert_eq!(rel.rhs, vec![(expect, f.neg(1))]);
            assert!(check_relation(f, &rel, 3, 40, (q as i64).pow(3)).unwrap().passed());
            let den = default_den(f);
            let z = crate::cinf::sample_z(f, den, 0).unwrap();
            let mut st = Sample::new(z.z, 40 * den as i64);
            assert!(verify_relation(&mut st, &rel, 2).unwrap().passed());
            let comb = three_special_combination(f);
            let mut zs = ZetaSeries::new(f, den, 40 * den as i64);
            let d = combination_cutoff(f, &comb, 40).unwrap();
            let v = eval_combination(&mut zs, &comb, d).unwrap();
            assert!(zs.vanishes(&v));
        }
    }

    #[test]
    fn scalar_relations() {
        let f = f3();
        for m in 1..=3 {
            for n in 1..=3 {
                let rel = harmonic_product(f, &CompositionArray::scalar(&[m]).unwrap(), &CompositionArray::scalar(&[n]).unwrap()).unwrap();
                assert!(rel.coeffs.residual_zero);
                assert!(check_relation(f, &rel, 3, 30, 3 * 27).unwrap().passed(), "{m} {n}");
            }
        }
    }

    #[test]
    fn twisted_relations() {
        let f = f3();
        for (a, b) in [("(s{1};1)", "(s{2};1)"), ("(s{1,2};1)", "(1;2)"), ("(s{1};2)", "(s{2};1)")] {
            let c1 = CompositionArray::parse(a, 3).unwrap();
            let c2 = CompositionArray::parse(b, 3).unwrap();
            let rel = harmonic_product(f, &c1, &c2).unwrap();
            assert!(rel.degree_preserving());
            assert!(check_relation(f, &rel, 3, 30, 3 * 27).unwrap().passed(), "{rel}");
        }
    }

    #[test]
    fn weight_q_plus_one_formula() {
        for p in [2, 3] {
            let f = Field::get(p, 1).unwrap();
            let comb = formula_q_plus_one_combination(f);
            let den = default_den(f);
            let mut zs = ZetaSeries::new(f, den, 40 * den as i64);
            let d = combination_cutoff(f, &comb, 40).unwrap();
            let v = eval_combination(&mut zs, &comb, d).unwrap();
            assert!(zs.vanishes(&v));
            let mut phi = Phi::new(f, 60, false);
            let dm = phi.dmax();
            let v = eval_combination(&mut phi, &comb, dm).unwrap();
            assert!(phi.vanishes(&v));
        }
    }

    #[test]
    fn identity_with_fa() {
        let f = f3();
        let comb = identity_with_fa_combination(f, &[0, 1, 2, 3]);
        assert_eq!(comb.len(), 9);
        let mut zs = ZetaSeries::new(f, 18, 30 * 18);
        let d = combination_cutoff(f, &comb, 30).unwrap();
        let v = eval_combination(&mut zs, &comb, d).unwrap();
            assert!(zs.vanishes(&v));
        for (q, p) in [(3u32, 3u64), (5, 5), (2, 2), (4, 2)] {
            for s in 2..12u32 {
                if (s - 2) % (q - 1) == 0 {
                    assert_eq!(fa_split_count(q, s) % p, 2 % p, "q={q} s={s}");
                }
            }
        }
    }

    #[test]
    fn phi_small_weights() {
        let f = f3();
        let s12 = SemiChar::from_vars(&[0, 1]);
        for m in 1..=3 {
            let a = phi_series(f, &CompositionArray::single(s12.clone(), m), 40, false).unwrap();
            let b = phi_series(f, &CompositionArray::single(s12.clone(), m), 40, true).unwrap();
            assert!(a.sub(&b).is_zero());
        }
        let lhs = phi_series(f, &CompositionArray::single(s12, 2), 60, false).unwrap();
        let r1 = phi_series(f, &CompositionArray::single(SemiChar::chi(0), 1), 60, false).unwrap();
        let r2 = phi_series(f, &CompositionArray::single(SemiChar::chi(1), 1), 60, false).unwrap();
        assert!(lhs.sub(&r1.mul(&r2).truncate(60)).is_zero());
        // S_d has u-order ≥ n q^d
        let mut phi = Phi::new(f, 60, false);
        let s2 = degree_sum(&mut phi, &SemiChar::chi(0), 2, 2).unwrap();
        assert!(s2.val().is_none_or(|v| v >= 18));
    }

    #[test]
    fn bernoulli_small() {
        let f = f3();
        let b = bernoulli_poly(f, &[0, 1, 2], 6).unwrap();
        assert!(b.recognized && b.monic && b.poly.is_one());
        let b = bernoulli_poly(f, &[0, 1, 2, 3, 4], 6).unwrap();
        let e3 = MPoly::parse(f, "t1*t2*t3+t1*t2*t4+t1*t2*t5+t1*t3*t4+t1*t3*t5+t1*t4*t5+t2*t3*t4+t2*t3*t5+t2*t4*t5+t3*t4*t5").unwrap();
        assert!(b.recognized && b.monic);
        assert_eq!(b.poly, MPoly::theta(f).sub(&e3));
        let star = bernoulli_star(f, &[0, 1, 2, 3, 4], 2, 18).unwrap();
        assert!(star.sub(&PSeries::from_mixed(&b.poly, 18)).is_zero());
        assert!(bernoulli_poly(f, &[0, 1, 2], 2).is_err());
        assert!(bernoulli_poly(f, &[0, 1], 6).is_err());
    }

    #[test]
    fn partition_formula_small() {
        let f = f3();
        assert!(partition_formula_check(f, 1, 20).unwrap().passed());
        let r = partition_formula_check(f, 2, 12).unwrap();
        assert_eq!(r.splits, 10);
        assert!(r.passed());
        assert!(partition_formula_check(f, 3, 10).is_err());
    }
}
