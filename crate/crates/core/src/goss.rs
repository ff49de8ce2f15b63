//! Goss polynomials, u-series and A-expansions.
//!
//! - [`USeries`]: truncated Laurent series in the uniformizer u over K(t)
//! - [`goss_poly`], [`goss_poly_direct`]: G_m by recursion and by expanding uX/(1 − u exp_C(X))
//! - [`u_a_series`], [`AExpander`]: u_a = 1/e_C(az) and sums Σ σ(a) G_m(u_a)
//! - [`divided_derivative_u`], [`serre_derivative`]: D_n = (−π̃)^{-n} 𝒟_n and Serre operators
//!
//! π̃- and η-powers multiplying a u-series are kept as integer grades.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde_json::{json, Value};

use crate::cinf::{carlitz_d, PSeries};
use crate::error::{Error, Result};
use crate::ffbase::{carlitz_coeffs, gbinom, monic_polys, Elem, Field, KRat, SemiChar, ThetaPoly};

/// Truncated Σ c_n u^n, exponents below `uprec`.
#[derive(Clone, PartialEq, Eq)]
pub struct USeries {
    f: &'static Field,
    terms: BTreeMap<i64, KRat>,
    uprec: i64,
    pub pitilde_power: i32,
    pub eta_power: i32,
}

impl USeries {
    pub fn zero(f: &'static Field, uprec: i64) -> Self {
        USeries { f, terms: BTreeMap::new(), uprec, pitilde_power: 0, eta_power: 0 }
    }
    pub fn monomial(f: &'static Field, n: i64, c: KRat, uprec: i64) -> Self {
        let mut s = Self::zero(f, uprec);
        if n < uprec && !c.is_zero() {
            s.terms.insert(n, c);
        }
        s
    }
    pub fn constant(c: KRat, uprec: i64) -> Self {
        Self::monomial(c.field(), 0, c, uprec)
    }
    pub fn from_terms(f: &'static Field, terms: impl IntoIterator<Item = (i64, KRat)>, uprec: i64) -> Self {
        let mut s = Self::zero(f, uprec);
        for (n, c) in terms {
            s.add_term(n, &c);
        }
        s
    }
    pub fn with_grades(mut self, pitilde: i32, eta: i32) -> Self {
        self.pitilde_power = pitilde;
        self.eta_power = eta;
        self
    }

    pub fn field(&self) -> &'static Field {
        self.f
    }
    pub fn uprec(&self) -> i64 {
        self.uprec
    }
    pub fn terms(&self) -> &BTreeMap<i64, KRat> {
        &self.terms
    }
    pub fn coeff(&self, n: i64) -> KRat {
        self.terms.get(&n).cloned().unwrap_or_else(|| KRat::zero(self.f))
    }
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    pub fn val(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }
    fn eff_val(&self) -> i64 {
        self.val().unwrap_or(self.uprec)
    }

    fn add_term(&mut self, n: i64, c: &KRat) {
        if n >= self.uprec || c.is_zero() {
            return;
        }
        let e = self.terms.entry(n).or_insert_with(|| KRat::zero(self.f));
        *e = e.add(c);
        if e.is_zero() {
            self.terms.remove(&n);
        }
    }

    fn check_grades(&self, o: &Self) {
        assert!(
            self.pitilde_power == o.pitilde_power && self.eta_power == o.eta_power,
            "adding u-series of different π̃/η grades"
        );
    }

    pub fn truncate(&self, uprec: i64) -> Self {
        let mut s = self.clone();
        s.uprec = s.uprec.min(uprec);
        let u = s.uprec;
        s.terms.retain(|k, _| *k < u);
        s
    }
    /// Panics if the grades differ.
    pub fn add(&self, o: &Self) -> Self {
        self.check_grades(o);
        let mut s = self.truncate(o.uprec);
        for (n, c) in &o.terms {
            s.add_term(*n, c);
        }
        s
    }
    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }
    pub fn neg(&self) -> Self {
        self.map_coeffs(|c| c.neg())
    }
    pub fn map_coeffs(&self, g: impl Fn(&KRat) -> KRat) -> Self {
        let mut s = self.clone();
        s.terms = self.terms.iter().map(|(k, c)| (*k, g(c))).filter(|(_, c)| !c.is_zero()).collect();
        s
    }
    pub fn scale(&self, c: &KRat) -> Self {
        self.map_coeffs(|x| x.mul(c))
    }
    pub fn scale_elem(&self, c: Elem) -> Self {
        self.map_coeffs(|x| x.scale(c))
    }
    /// Multiply by u^n.
    pub fn shift(&self, n: i64) -> Self {
        let mut s = self.clone();
        s.terms = self.terms.iter().map(|(k, c)| (k + n, c.clone())).collect();
        s.uprec += n;
        s
    }
    pub fn mul(&self, o: &Self) -> Self {
        let uprec = (self.uprec + o.eff_val()).min(o.uprec + self.eff_val());
        let mut out = Self::zero(self.f, uprec).with_grades(self.pitilde_power + o.pitilde_power, self.eta_power + o.eta_power);
        let mut acc: BTreeMap<i64, Vec<KRat>> = BTreeMap::new();
        for (i, a) in &self.terms {
            for (j, b) in &o.terms {
                if i + j >= uprec {
                    break;
                }
                acc.entry(i + j).or_default().push(a.mul(b));
            }
        }
        for (n, v) in acc {
            out.add_term(n, &sum_krats(self.f, v));
        }
        out
    }
    /// Inverse; the leading coefficient must be t-free.
    pub fn inv(&self) -> Result<Self> {
        let v = self.val().ok_or(Error::DivisionByZero)?;
        let c = self.coeff(v);
        let ci = c.inv()?;
        let rel = self.uprec - v;
        let h: Vec<(i64, KRat)> = self.terms.iter().skip(1).map(|(k, x)| (k - v, x.mul(&ci))).collect();
        let mut g: BTreeMap<i64, KRat> = BTreeMap::new();
        g.insert(0, KRat::one(self.f));
        for n in 1..rel {
            let mut parts = Vec::new();
            for (e, he) in &h {
                if *e > n {
                    break;
                }
                if let Some(gv) = g.get(&(n - e)) {
                    parts.push(he.mul(gv));
                }
            }
            let val = sum_krats(self.f, parts).neg();
            if !val.is_zero() {
                g.insert(n, val);
            }
        }
        let mut out = Self::zero(self.f, rel - v).with_grades(-self.pitilde_power, -self.eta_power);
        for (k, x) in g {
            out.add_term(k - v, &x.mul(&ci));
        }
        Ok(out)
    }
    pub fn pow(&self, k: u64) -> Self {
        if k == 0 {
            return Self::constant(KRat::one(self.f), i64::MAX / 4);
        }
        let mut r = self.clone();
        for _ in 1..k {
            r = r.mul(self);
        }
        r
    }
    /// Apply t_i ↦ θ^k to all coefficients.
    pub fn specialize_t(&self, i: usize, k: u32) -> Self {
        self.map_coeffs(|c| c.map_num(|p| p.specialize_t(i, k)))
    }

    /// τ^k: u ↦ u^{q^k}, θ ↦ θ^{q^k}, t fixed.
    pub fn twist(&self, k: u32) -> Self {
        let s = (self.f.q as i64).pow(k);
        let terms = self.terms.iter().map(|(n, c)| (n * s, c.twist_theta(k)));
        let mut out = Self::from_terms(self.f, terms, self.uprec.saturating_mul(s));
        out.pitilde_power = self.pitilde_power * s as i32;
        out.eta_power = self.eta_power * s as i32;
        out
    }

    /// Evaluate at u = x (grades ignored), to absolute precision `cap`.
    pub fn eval_at(&self, x: &PSeries, cap: i64) -> Result<PSeries> {
        let vx = x.val().ok_or(Error::DivisionByZero)?;
        if vx <= 0 {
            return Err(Error::Invalid("evaluation point must have |u| < 1".into()));
        }
        let den = x.den();
        let mut acc = PSeries::zero(self.f, den);
        let mut pw = PSeries::one(self.f, den);
        let mut k = 0;
        for (n, c) in &self.terms {
            if *n < 0 {
                return Err(Error::Invalid("evaluation of Laurent tails not supported".into()));
            }
            while k < *n {
                pw = pw.mul_cap(x, Some(cap));
                k += 1;
            }
            let cv = PSeries::from_krat(c, den, cap - n * vx)?;
            acc = acc.add(&cv.mul_cap(&pw, Some(cap)));
        }
        // unknown terms from uprec on
        Ok(acc.truncate(cap.min(self.uprec * vx)))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "uprec": self.uprec,
            "pitilde_power": self.pitilde_power,
            "eta_power": self.eta_power,
            "terms": self.terms.iter().map(|(n, c)| json!({"n": n, "coeff": c.to_string()})).collect::<Vec<_>>(),
        })
    }
}

impl fmt::Display for USeries {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self.terms.iter().map(|(n, c)| format!("({c})*u^{n}")).collect();
        parts.push(format!("O(u^{})", self.uprec));
        write!(out, "{}", parts.join(" + "))
    }
}

impl fmt::Debug for USeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Sum of KRat values grouped by denominator so gcd work happens once per group.
pub(crate) fn sum_krats(f: &'static Field, v: Vec<KRat>) -> KRat {
    let mut groups: HashMap<ThetaPoly, crate::ffbase::Accum> = HashMap::new();
    for x in v {
        groups.entry(x.den().clone()).or_insert_with(|| crate::ffbase::Accum::new(f)).add_poly(x.num(), 1);
    }
    let mut out = KRat::zero(f);
    for (d, mut acc) in groups {
        out = out.add(&KRat::new(acc.take(), d).expect("nonzero denominator"));
    }
    out
}

/// Goss polynomial G_m(X) = Σ coeffs[j] X^j.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GossPoly {
    pub m: u32,
    pub coeffs: Vec<KRat>,
}

impl GossPoly {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }
    /// G_m(x) for a u-series x.
    pub fn eval(&self, x: &USeries) -> USeries {
        let f = x.field();
        let mut acc = USeries::zero(f, i64::MAX / 4);
        let mut pw = x.clone();
        for (j, c) in self.coeffs.iter().enumerate().skip(1) {
            if j > 1 {
                pw = pw.mul(x);
            }
            if !c.is_zero() {
                acc = acc.add(&pw.scale(c));
            }
        }
        acc
    }
}

impl fmt::Display for GossPoly {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, c)| !c.is_zero())
            .map(|(j, c)| if c.is_one() { format!("X^{j}") } else { format!("({c})*X^{j}") })
            .collect();
        write!(out, "{}", parts.join(" + "))
    }
}

fn poly_add(a: &mut Vec<KRat>, b: &[KRat], scale: Option<&KRat>, shift: usize) {
    let f = b.first().map(|x| x.field());
    if let Some(f) = f {
        if a.len() < b.len() + shift {
            a.resize(b.len() + shift, KRat::zero(f));
        }
    }
    for (j, c) in b.iter().enumerate() {
        let t = match scale {
            Some(s) => c.mul(s),
            None => c.clone(),
        };
        a[j + shift] = a[j + shift].add(&t);
    }
}

/// All Goss polynomials G_1..G_m via G_k = X(G_{k−1} + Σ_{i≥1} G_{k−q^i}/d_i).
pub fn goss_polys(f: &'static Field, m: u32) -> Result<Vec<GossPoly>> {
    if m == 0 {
        return Err(Error::Invalid("Goss polynomial order must be positive".into()));
    }
    let q = f.q as usize;
    let mut inv_d = Vec::new();
    let mut qi = q;
    let mut i = 1;
    while qi < m as usize {
        inv_d.push((qi, KRat::from_theta_poly(&carlitz_d(f, i)).inv()?));
        qi *= q;
        i += 1;
    }
    let mut out: Vec<Vec<KRat>> = vec![vec![KRat::zero(f)]];
    for k in 1..=m as usize {
        let mut inner = vec![KRat::zero(f)];
        if k == 1 {
            inner = vec![KRat::one(f)];
        } else {
            poly_add(&mut inner, &out[k - 1], None, 0);
        }
        for (qi, di) in &inv_d {
            if *qi < k {
                poly_add(&mut inner, &out[k - qi], Some(di), 0);
            }
        }
        let mut g = vec![KRat::zero(f)];
        poly_add(&mut g, &inner, None, 1);
        while g.len() > 1 && g.last().is_some_and(|c| c.is_zero()) {
            g.pop();
        }
        out.push(g);
    }
    Ok(out.into_iter().enumerate().skip(1).map(|(k, coeffs)| GossPoly { m: k as u32, coeffs }).collect())
}

pub fn goss_poly(f: &'static Field, m: u32) -> Result<GossPoly> {
    Ok(goss_polys(f, m)?.pop().expect("nonempty"))
}

/// Coefficients of exp_C(x) = Σ x^{q^i}/d_i up to degree n.
fn exp_coeffs(f: &'static Field, n: usize) -> Result<Vec<KRat>> {
    let mut e = vec![KRat::zero(f); n + 1];
    let mut qi = 1usize;
    let mut i = 0;
    while qi <= n {
        e[qi] = KRat::from_theta_poly(&carlitz_d(f, i)).inv()?;
        qi *= f.q as usize;
        i += 1;
    }
    Ok(e)
}

fn trunc_mul(a: &[KRat], b: &[KRat], n: usize) -> Vec<KRat> {
    let f = a[0].field();
    let mut out = vec![KRat::zero(f); n + 1];
    for (i, x) in a.iter().enumerate().filter(|t| !t.1.is_zero()) {
        for (j, y) in b.iter().enumerate().take(n + 1 - i).filter(|t| !t.1.is_zero()) {
            out[i + j] = out[i + j].add(&x.mul(y));
        }
    }
    out
}

/// Table [x^k] exp_C(x)^j for j, k ≤ n.
pub fn exp_power_table(f: &'static Field, n: usize) -> Result<Vec<Vec<KRat>>> {
    let e = exp_coeffs(f, n)?;
    let mut one = vec![KRat::zero(f); n + 1];
    one[0] = KRat::one(f);
    let mut table = vec![one];
    for j in 1..=n {
        let next = trunc_mul(&table[j - 1], &e, n);
        table.push(next);
    }
    Ok(table)
}

/// G_m from the generating series: G_m = Σ_k u^{k+1} [x^{m−1}] exp_C(x)^k.
pub fn goss_poly_direct(f: &'static Field, m: u32) -> Result<GossPoly> {
    if m == 0 {
        return Err(Error::Invalid("Goss polynomial order must be positive".into()));
    }
    let n = m as usize - 1;
    let table = exp_power_table(f, n)?;
    let mut coeffs = vec![KRat::zero(f); m as usize + 1];
    for (k, row) in table.iter().enumerate() {
        coeffs[k + 1] = row[n].clone();
    }
    while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.is_zero()) {
        coeffs.pop();
    }
    Ok(GossPoly { m, coeffs })
}

/// Σ_{m+n=k} G_m G_n = (k−1) G_k.
pub fn goss_convolution_check(f: &'static Field, k: u32) -> Result<bool> {
    if k < 2 {
        return Ok(true);
    }
    let g = goss_polys(f, k)?;
    let mut lhs: Vec<KRat> = vec![KRat::zero(f); k as usize + 1];
    for m in 1..k {
        let (a, b) = (&g[m as usize - 1].coeffs, &g[(k - m) as usize - 1].coeffs);
        let prod = trunc_mul(a, b, k as usize);
        poly_add(&mut lhs, &prod, None, 0);
    }
    let c = f.from_int(k as i64 - 1);
    let mut rhs = vec![KRat::zero(f); k as usize + 1];
    for (j, x) in g[k as usize - 1].coeffs.iter().enumerate() {
        rhs[j] = x.scale(c);
    }
    Ok(lhs == rhs)
}

/// u_a = u^{q^d} (Σ_i [a,i] u^{q^d − q^i})^{-1}; the flag reports a zero truncation (uprec ≤ q^d).
pub fn u_a_series_flagged(a: &ThetaPoly, uprec: i64) -> Result<(USeries, bool)> {
    let f = a.field();
    if a.is_zero() || !a.is_monic() {
        return Err(Error::Invalid(format!("u_a needs a monic polynomial, got {a}")));
    }
    let d = a.deg().expect("nonzero") as u32;
    let qd = (f.q as i64).pow(d);
    if uprec <= qd {
        return Ok((USeries::zero(f, uprec), true));
    }
    let c = carlitz_coeffs(a);
    let mut qi = 1i64;
    let mut den = USeries::zero(f, uprec - qd);
    for ci in c.iter() {
        den.add_term(qd - qi, &KRat::from_theta_poly(ci));
        qi *= f.q as i64;
    }
    Ok((den.inv()?.shift(qd), false))
}

pub fn u_a_series(a: &ThetaPoly, uprec: i64) -> Result<USeries> {
    Ok(u_a_series_flagged(a, uprec)?.0)
}

/// Sums over monic a of σ(a)·G(u_a), with the u_a powers cached.
pub struct AExpander {
    f: &'static Field,
    uprec: i64,
    ua: HashMap<ThetaPoly, Vec<USeries>>,
    goss: Vec<GossPoly>,
}

impl AExpander {
    pub fn new(f: &'static Field, uprec: i64) -> Self {
        AExpander { f, uprec, ua: HashMap::new(), goss: Vec::new() }
    }
    pub fn uprec(&self) -> i64 {
        self.uprec
    }
    /// Largest degree d with q^d < uprec.
    pub fn dmax(&self) -> usize {
        let mut d = 0;
        while (self.f.q as i64).pow(d as u32 + 1) < self.uprec {
            d += 1;
        }
        d
    }
    /// u_a^k.
    pub fn ua_pow(&mut self, a: &ThetaPoly, k: usize) -> Result<USeries> {
        if !self.ua.contains_key(a) {
            let base = u_a_series(a, self.uprec)?;
            self.ua.insert(a.clone(), vec![USeries::constant(KRat::one(self.f), self.uprec), base]);
        }
        let v = self.ua.get_mut(a).expect("inserted");
        while v.len() <= k {
            let next = v[v.len() - 1].mul(&v[1]).truncate(self.uprec);
            v.push(next);
        }
        Ok(v[k].clone())
    }
    fn goss(&mut self, m: u32) -> Result<GossPoly> {
        if self.goss.len() < m as usize {
            self.goss = goss_polys(self.f, m)?;
        }
        Ok(self.goss[m as usize - 1].clone())
    }
    /// G_m(u_a) from cached powers.
    pub fn goss_at(&mut self, m: u32, a: &ThetaPoly) -> Result<USeries> {
        let g = self.goss(m)?;
        let mut acc = USeries::zero(self.f, self.uprec);
        for (j, c) in g.coeffs.iter().enumerate().skip(1) {
            if !c.is_zero() {
                acc = acc.add(&self.ua_pow(a, j)?.scale(c));
            }
        }
        Ok(acc)
    }
    /// Σ_{a ∈ A+(d)} σ(a) G(u_a) where G is X^n (plain) or G_n (goss).
    pub fn degree_sum(&mut self, s: &SemiChar, n: u32, d: usize, goss: bool) -> Result<USeries> {
        let mut acc = USeries::zero(self.f, self.uprec);
        if (self.f.q as i64).pow(d as u32) >= self.uprec {
            return Ok(acc);
        }
        for a in monic_polys(self.f, d) {
            let sa = s.eval(&a)?;
            if sa.is_zero() {
                continue;
            }
            let g = if goss { self.goss_at(n, &a)? } else { self.ua_pow(&a, n as usize)? };
            acc = acc.add(&g.scale(&KRat::from_poly(sa)));
        }
        Ok(acc)
    }
    /// Σ_{a ∈ A+} σ(a) G_m(u_a).
    pub fn a_expansion(&mut self, s: &SemiChar, m: u32) -> Result<USeries> {
        let mut acc = USeries::zero(self.f, self.uprec);
        for d in 0..=self.dmax() {
            acc = acc.add(&self.degree_sum(s, m, d, true)?);
        }
        Ok(acc)
    }
    /// Σ_{a ∈ A+} σ(a) u_a^n.
    pub fn power_expansion(&mut self, s: &SemiChar, n: u32) -> Result<USeries> {
        let mut acc = USeries::zero(self.f, self.uprec);
        for d in 0..=self.dmax() {
            acc = acc.add(&self.degree_sum(s, n, d, false)?);
        }
        Ok(acc)
    }
}

/// Σ_{a monic} σ(a) G_m(u_a) truncated at uprec.
pub fn a_expansion(f: &'static Field, s: &SemiChar, m: u32, uprec: i64) -> Result<USeries> {
    AExpander::new(f, uprec).a_expansion(s, m)
}

/// D_n(f) from D_n(u^k) = Σ_j binom(k+j−1, j) u^{k+j} [x^n] exp_C(x)^j.
pub fn divided_derivative_u(x: &USeries, n: u32) -> Result<USeries> {
    if n == 0 {
        return Ok(x.clone());
    }
    let f = x.field();
    let table = exp_power_table(f, n as usize)?;
    let p = f.p;
    let mut out = USeries::zero(f, x.uprec()).with_grades(x.pitilde_power, x.eta_power);
    for (k, c) in x.terms() {
        for (j, row) in table.iter().enumerate() {
            let e = &row[n as usize];
            if e.is_zero() {
                continue;
            }
            let b = gbinom(k + j as i64 - 1, j as u64, p);
            if b == 0 {
                continue;
            }
            out.add_term(k + j as i64, &c.mul(e).scale(f.from_int(b as i64)));
        }
    }
    Ok(out)
}

/// ∂_n^{(w)} f = D_n f + Σ_{i=1}^n (−1)^i binom(w+n−1, i) D_{i−1}(E) D_{n−i}(f).
pub fn serre_derivative(x: &USeries, w: i64, n: u32, e: &USeries) -> Result<USeries> {
    let f = x.field();
    let mut out = divided_derivative_u(x, n)?;
    for i in 1..=n {
        let b = gbinom(w + n as i64 - 1, i as u64, f.p);
        if b == 0 {
            continue;
        }
        let mut c = f.from_int(b as i64);
        if i % 2 == 1 {
            c = f.neg(c);
        }
        let de = divided_derivative_u(e, i - 1)?;
        let df = divided_derivative_u(x, n - i)?;
        let mut prod = de.mul(&df).scale_elem(c);
        prod.pitilde_power = out.pitilde_power;
        prod.eta_power = out.eta_power;
        out = out.add(&prod);
    }
    Ok(out)
}

/// The false Eisenstein series E = Σ a u_a.
pub fn false_eisenstein(f: &'static Field, uprec: i64) -> Result<USeries> {
    AExpander::new(f, uprec).power_expansion(&SemiChar::trivial().with_theta_pow(1), 1)
}

/// Scalar generators g = 1 − (θ^q − θ) Σ u_a^{q−1} and F_1 = Σ a^q u_a.
pub fn scalar_generators(f: &'static Field, uprec: i64) -> Result<(USeries, USeries)> {
    let mut ex = AExpander::new(f, uprec);
    let q = f.q;
    let s = ex.power_expansion(&SemiChar::trivial(), q - 1)?;
    let d1 = KRat::from_theta_poly(&carlitz_d(f, 1));
    let g = USeries::constant(KRat::one(f), uprec).sub(&s.scale(&d1));
    let f1 = ex.power_expansion(&SemiChar::trivial().with_theta_pow(q), 1)?;
    Ok((g, f1))
}

/// The constant c with ∂_1^{(q−1)}(g) = c·F_1 to the working precision, if it exists.
pub fn serre_proportionality(f: &'static Field, uprec: i64) -> Result<Option<KRat>> {
    let (g, f1) = scalar_generators(f, uprec)?;
    let e = false_eisenstein(f, uprec)?;
    let dg = serre_derivative(&g, f.q as i64 - 1, 1, &e)?;
    let (v, lead) = match dg.val() {
        Some(v) => (v, dg.coeff(v)),
        None => return Ok(None),
    };
    let c = lead.div(&f1.coeff(v))?;
    Ok(if dg.sub(&f1.scale(&c)).is_zero() { Some(c) } else { None })
}

/// The polynomial 1/u_a = C_a(1/u) as a Laurent u-series.
pub fn carlitz_inverse_ua(a: &ThetaPoly, uprec: i64) -> USeries {
    let f = a.field();
    let mut qi = 1i64;
    let mut out = USeries::zero(f, uprec);
    for c in carlitz_coeffs(a) {
        out.add_term(-qi, &KRat::from_theta_poly(&c));
        qi *= f.q as i64;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f3() -> &'static Field {
        Field::get(3, 1).unwrap()
    }

    #[test]
    fn small_goss_polys() {
        let f = f3();
        let g = goss_polys(f, 4).unwrap();
        assert_eq!(g[0].to_string(), "X^1");
        assert_eq!(g[2].to_string(), "X^3");
        let d1 = KRat::from_theta_poly(&carlitz_d(f, 1)).inv().unwrap();
        assert_eq!(g[3].coeffs[2], d1);
        assert!(g[3].coeffs[4].is_one());
    }

    #[test]
    fn recursion_matches_direct() {
        for (p, e) in [(2, 1), (3, 1)] {
            let f = Field::get(p, e).unwrap();
            let g = goss_polys(f, 12).unwrap();
            for m in 1..=12 {
                assert_eq!(g[m - 1], goss_poly_direct(f, m as u32).unwrap(), "m={m}");
            }
        }
    }

    #[test]
    fn u_theta_expansion() {
        let f = f3();
        let a = ThetaPoly::theta_pow(f, 1);
        let s = u_a_series(&a, 10).unwrap();
        // u^3 − θu^5 + θ²u^7 − θ³u^9
        let th = |k| KRat::from_theta_poly(&ThetaPoly::theta_pow(f, k));
        assert!(s.coeff(3).is_one());
        assert_eq!(s.coeff(5), th(1).neg());
        assert_eq!(s.coeff(7), th(2));
        assert_eq!(s.coeff(9), th(3).neg());
        assert_eq!(s.terms().len(), 4);
    }

    #[test]
    fn first_divided_derivatives() {
        let f = f3();
        let u = USeries::monomial(f, 1, KRat::one(f), 20);
        let d = divided_derivative_u(&u, 1).unwrap();
        assert_eq!(d, USeries::monomial(f, 2, KRat::one(f), 20));
        let ui = USeries::monomial(f, -1, KRat::one(f), 20);
        let d = divided_derivative_u(&ui, 1).unwrap();
        assert_eq!(d, USeries::constant(KRat::one(f).neg(), 20));
    }

    #[test]
    fn inverse_of_ua_is_carlitz_polynomial() {
        let f = f3();
        for a in monic_polys(f, 2) {
            let ua = u_a_series(&a, 40).unwrap();
            let inv = ua.inv().unwrap();
            let expect = carlitz_inverse_ua(&a, inv.uprec());
            assert_eq!(inv, expect);
        }
    }
}
