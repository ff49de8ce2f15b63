//! Property bodies and strategies shared by `properties` and `acceptance`.

use carlitz::cinf::PSeries;
use carlitz::ffbase::gbinom;
use carlitz::goss::{divided_derivative_u, USeries};
use carlitz::modular::{rep_matrix, Mat2, RepSpec};
use carlitz::tame::{TameExp, TameSeries};
use carlitz::{Field, KRat, MPoly, Mono, ThetaPoly};
use proptest::prelude::*;
use proptest::test_runner::{RngSeed, TestCaseError};

pub const CASES: u32 = 256;

pub fn config() -> ProptestConfig {
    ProptestConfig { cases: CASES, rng_seed: RngSeed::Fixed(0x5eed_ca71), failure_persistence: None, ..ProptestConfig::default() }
}

type R = Result<(), TestCaseError>;

const FIELDS: [(u32, u32); 4] = [(2, 1), (3, 1), (5, 1), (2, 2)];

fn field(k: usize) -> &'static Field {
    let (p, e) = FIELDS[k % FIELDS.len()];
    Field::get(p, e).unwrap()
}

/// Terms (t-var, t-exp, θ-exp, coefficient index).
type RawTerms = Vec<(usize, u32, u32, usize)>;

fn raw_terms() -> impl Strategy<Value = RawTerms> {
    prop::collection::vec((0usize..3, 0u32..4, 0u32..5, 0usize..64), 0..6)
}

fn mpoly(f: &'static Field, raw: &[(usize, u32, u32, usize)]) -> MPoly {
    let el = f.fq_elems();
    let terms = raw.iter().map(|&(i, k, j, c)| (Mono::t(i, k).mul(Mono::theta(j)), el[c % el.len()])).collect();
    MPoly::from_terms(f, terms)
}

/// Σ c_n θ^{-n/2} over n in [lo, lo + 40), truncated at lo + 40.
fn pseries(f: &'static Field, lo: i64, raw: &[(i64, usize)]) -> PSeries {
    let el = f.fq_elems();
    let mut s = PSeries::zero_to(f, 2, lo + 40);
    for &(n, c) in raw {
        let v = el[c % el.len()];
        s = s.add(&PSeries::monomial(f, 2, lo + n, MPoly::constant(f, v)));
    }
    s.truncate(lo + 40)
}

fn a_poly(f: &'static Field, cs: &[usize]) -> ThetaPoly {
    let el = f.fq_elems();
    ThetaPoly::from_coeffs(f, cs.iter().map(|&c| el[c % el.len()]).collect())
}

type Word = Vec<(u8, Vec<usize>)>;

/// Words in T_a, S and diag(λ, 1).
fn gamma(f: &'static Field, word: &[(u8, Vec<usize>)]) -> Mat2 {
    let el = f.fq_elems();
    let mut g = Mat2::identity(f);
    for (kind, cs) in word {
        let m = match kind % 3 {
            0 => Mat2::t(&a_poly(f, cs)),
            1 => Mat2::s(f),
            _ => {
                let lam = el[1 + cs.first().copied().unwrap_or(0) % (el.len() - 1)];
                Mat2::diag(ThetaPoly::constant(f, lam), ThetaPoly::one(f))
            }
        };
        g = g.mul(&m);
    }
    g
}

fn word() -> impl Strategy<Value = Word> {
    prop::collection::vec((0u8..3, prop::collection::vec(0usize..16, 0..3)), 1..5)
}

pub fn frobenius_strategy() -> impl Strategy<Value = (usize, RawTerms, RawTerms, u32)> {
    (0usize..4, raw_terms(), raw_terms(), 1u32..3)
}

/// (x+y)^p = x^p + y^p in F_q[t,θ] and in K(t).
pub fn frobenius((k, x, y, d): (usize, RawTerms, RawTerms, u32)) -> R {
    let f = field(k);
    let (a, b) = (mpoly(f, &x), mpoly(f, &y));
    let p = f.p as u64;
    prop_assert_eq!(a.add(&b).pow(p), a.pow(p).add(&b.pow(p)));
    let den = ThetaPoly::theta_pow(f, d as usize).add(&ThetaPoly::one(f));
    let (ra, rb) = (KRat::new(a, den.clone()).unwrap(), KRat::new(b, den).unwrap());
    prop_assert_eq!(ra.add(&rb).pow(p), ra.pow(p).add(&rb.pow(p)));
    Ok(())
}

type Spikes = Vec<(i64, usize)>;

pub fn valuation_strategy() -> impl Strategy<Value = (usize, i64, i64, Spikes, Spikes)> {
    let spikes = || prop::collection::vec((0i64..40, 1usize..64), 1..6);
    (0usize..4, -6i64..6, -6i64..6, spikes(), spikes())
}

/// v(xy) = v(x) + v(y), v(x+y) ≥ min with equality off the diagonal, v(τx) = q v(x).
pub fn valuation((k, lo1, lo2, x, y): (usize, i64, i64, Spikes, Spikes)) -> R {
    let f = field(k);
    let (a, b) = (pseries(f, lo1, &x), pseries(f, lo2, &y));
    if let (Some(va), Some(vb)) = (a.val(), b.val()) {
        prop_assert_eq!(a.mul(&b).val(), Some(va + vb));
        match a.add(&b).val() {
            Some(vs) => {
                prop_assert!(vs >= va.min(vb));
                if va != vb {
                    prop_assert_eq!(vs, va.min(vb));
                }
            }
            None => prop_assert!(va == vb),
        }
        prop_assert_eq!(a.twist(1).val_q(), a.val_q().map(|v| v * f.q as i64));
    }
    Ok(())
}

type Digits = Vec<(i32, u32)>;

pub fn tame_strategy() -> impl Strategy<Value = (usize, Digits, Digits)> {
    let digits = || prop::collection::vec((1i32..5, 0u32..5), 0..4);
    (0usize..3, digits(), digits())
}

/// A product of two reduced monomials is the single monomial of the digit sum exactly when no
/// digit reaches q; the weight of the leading term is additive either way.
pub fn tame_no_carry((k, i, j): (usize, Digits, Digits)) -> R {
    let f = field(k);
    let q = f.q;
    let ei = TameExp::from_digits(i.iter().map(|&(a, d)| (a, d % q)));
    let ej = TameExp::from_digits(j.iter().map(|&(a, d)| (a, d % q)));
    let one = KRat::one(f);
    let prod = TameSeries::monomial(ei.clone(), one.clone(), 8).mul(&TameSeries::monomial(ej.clone(), one, 8));
    let sum = ei.mul(&ej);
    let exact = prod.terms().len() == 1 && prod.coeff(&sum).is_one();
    prop_assert_eq!(sum.is_reduced(q), exact);
    let w = ei.weight(q) + ej.weight(q);
    prop_assert_eq!(prod.weight(), Some(w));
    prop_assert_eq!(prod.leading().map(|(e, _)| e.weight(q)), Some(w));
    Ok(())
}

type UTerms = Vec<(i64, u32, usize)>;

pub fn iterativity_strategy() -> impl Strategy<Value = (usize, UTerms, u32, u32)> {
    (0usize..3, prop::collection::vec((1i64..12, 0u32..3, 1usize..64), 1..5), 0u32..5, 0u32..5)
}

/// binom(m+n, m) D_{m+n} = D_m D_n on u-series.
pub fn iterativity((k, terms, m, n): (usize, UTerms, u32, u32)) -> R {
    let f = field(k);
    let el = f.fq_elems();
    let uprec = 24;
    let x = USeries::from_terms(
        f,
        terms.iter().map(|&(e, th, c)| (e, KRat::from_poly(MPoly::monomial(f, Mono::theta(th), el[c % el.len()])))),
        uprec,
    );
    let b = gbinom((m + n) as i64, m as u64, f.p);
    let lhs = divided_derivative_u(&x, m + n).unwrap().scale_elem(f.from_int(b as i64));
    let rhs = divided_derivative_u(&divided_derivative_u(&x, n).unwrap(), m).unwrap();
    prop_assert!(lhs.sub(&rhs).truncate(uprec).is_zero());
    Ok(())
}

pub fn rho_star_strategy() -> impl Strategy<Value = (usize, Word, Word, usize)> {
    (0usize..3, word(), word(), 1usize..4)
}

/// ρ*(γδ) = ρ*(γ)ρ*(δ), and T_a fixes the last basis vector.
pub fn rho_star((k, g, h, nvars): (usize, Word, Word, usize)) -> R {
    let f = field(k);
    let vars: Vec<usize> = (0..nvars).collect();
    let (g, h) = (gamma(f, &g), gamma(f, &h));
    let spec = RepSpec::rho_star(&vars);
    let lhs = rep_matrix(f, &spec, &g.mul(&h)).unwrap();
    let rhs = rep_matrix(f, &spec, &g).unwrap().mul(&rep_matrix(f, &spec, &h).unwrap());
    prop_assert_eq!(lhs, rhs);
    let t = rep_matrix(f, &spec, &Mat2::t(&g.b)).unwrap();
    let n = t.dim();
    let last = t.column(n - 1);
    prop_assert!(last[n - 1].is_one() && last[..n - 1].iter().all(|x| x.is_zero()));
    Ok(())
}
