//! `verify` suites.
//!
//! - `harmonic`: harmonic products per degree in the ζ- and φ-settings
//! - `constants`, `bernoulli`, `petrov`, `hecke`: special values and specializations
//! - the identity items of the modular module, by name
//! - `conjE` (alias of `conjE_first_entry`): conjecture evidence, never gating
//! - `all`: everything above, in that order

use std::time::Instant;

use carlitz::modular::{hecke_check, identity_suite, petrov_check, ItemReport, ItemStatus, SUITE_ITEMS};
use carlitz::zeta::{bernoulli_poly, check_relation, partition_formula_check, first_formula_residual, harmonic_coeffs, harmonic_product, partition_check, CompositionArray};
use carlitz::{Field, MPoly, Mono, SemiChar, ThetaPoly};
use serde_json::{json, Value};

use crate::config::Config;
use crate::CliError;

pub const GROUPS: [&str; 5] = ["harmonic", "constants", "bernoulli", "petrov", "hecke"];

fn report(name: &str, ok: bool, residual: Option<f64>, precision: f64, detail: Value, t0: Instant) -> ItemReport {
    ItemReport {
        name: name.into(),
        status: if ok { ItemStatus::Pass } else { ItemStatus::Fail },
        residual_valuation: if ok { None } else { residual },
        precision,
        conjecture: false,
        detail,
        wall_time: t0.elapsed().as_secs_f64(),
    }
}

fn harmonic(cfg: &Config) -> Result<Vec<ItemReport>, CliError> {
    let f = cfg.f;
    let q = f.q;
    let prec = cfg.prec_int();
    let arr = |s: &str| CompositionArray::parse(s, q);
    let mut pairs = vec![
        ("three_special".to_string(), CompositionArray::single(SemiChar::chi(0), 1), CompositionArray::single(SemiChar::trivial(), q - 1)),
        ("twisted (s{1};1)(s{2};1)".to_string(), arr("(s{1};1)")?, arr("(s{2};1)")?),
    ];
    for m in 1..=2u32 {
        for n in 1..=2u32 {
            pairs.push((format!("scalar ({m})({n})"), CompositionArray::scalar(&[m])?, CompositionArray::scalar(&[n])?));
        }
    }
    let mut out = Vec::new();
    for (name, c1, c2) in pairs {
        let t0 = Instant::now();
        let rel = harmonic_product(f, &c1, &c2)?;
        let chk = check_relation(f, &rel, cfg.dmax, prec, cfg.u_prec)?;
        let residual = chk.summed_zeta.or(chk.summed_phi).or(chk.zeta.min_residual).or(chk.phi.min_residual);
        let mut detail = chk.to_json();
        detail["relation"] = json!(rel.to_string());
        out.push(report(&format!("harmonic {name}"), chk.passed() && rel.coeffs.residual_zero, residual, prec as f64, detail, t0));
    }
    let t0 = Instant::now();
    let mut solved = 0;
    let mut ok = true;
    for n_u in 0..=1 {
        for n_v in 0..=1 {
            for a in 1..=q {
                for b in 1..=q {
                    ok &= harmonic_coeffs(f, n_u, n_v, a, b)?.residual_zero;
                    solved += 1;
                }
            }
        }
    }
    out.push(report("harmonic coefficient solver", ok, Some(0.0), 0.0, json!({ "systems": solved }), t0));
    let t0 = Instant::now();
    let ok = (0..=2).all(|d| partition_check(f, d));
    out.push(report("harmonic partitions d<=2", ok, Some(0.0), 0.0, json!({ "dmax": 2 }), t0));
    Ok(out)
}

fn constants(cfg: &Config) -> Result<Vec<ItemReport>, CliError> {
    let t0 = Instant::now();
    let prec = cfg.prec_int();
    let r = first_formula_residual(cfg.f, prec)?;
    let residual = r.val_q().map(|v| *v.numer() as f64 / *v.denom() as f64);
    Ok(vec![report("constants (θ−t)ωζ(1;χ)/π̃ = 1", r.vanishes(), residual, prec as f64, json!({}), t0)])
}

/// e_k(t_vars).
fn elementary(f: &'static Field, vars: &[usize], k: usize) -> MPoly {
    let mut acc = MPoly::zero(f);
    for mask in 0u32..1 << vars.len() {
        if mask.count_ones() as usize == k {
            let mono = (0..vars.len()).filter(|i| mask >> i & 1 == 1).fold(Mono::ONE, |m, i| m.mul(Mono::t(vars[i], 1)));
            acc = acc.add(&MPoly::monomial(f, mono, 1));
        }
    }
    acc
}

fn bernoulli(cfg: &Config) -> Result<Vec<ItemReport>, CliError> {
    let f = cfg.f;
    let q = f.q as usize;
    let prec = cfg.prec_int();
    let mut out = Vec::new();
    let t0 = Instant::now();
    let vars: Vec<usize> = (0..q).collect();
    let b = bernoulli_poly(f, &vars, prec)?;
    out.push(report(&format!("bernoulli |Σ|={q} is 1"), b.recognized && b.poly.is_one(), Some(0.0), prec as f64, b.to_json(), t0));
    // the 2q−1 variable checks are desk-scale only for q ≤ 3
    if q > 3 {
        return Ok(out);
    }
    let t0 = Instant::now();
    let vars: Vec<usize> = (0..2 * q - 1).collect();
    let b = bernoulli_poly(f, &vars, prec)?;
    let expect = MPoly::theta(f).sub(&elementary(f, &vars, q));
    out.push(report(&format!("bernoulli |Σ|={} is θ − e_{q}", 2 * q - 1), b.recognized && b.poly == expect, Some(0.0), prec as f64, b.to_json(), t0));
    if q > 2 {
        let t0 = Instant::now();
        let c = partition_formula_check(f, 2, prec)?;
        out.push(report("bernoulli partition formula m=2", c.passed(), c.residual_valuation, prec as f64, json!({ "splits": c.splits }), t0));
    }
    Ok(out)
}

fn petrov(cfg: &Config) -> Result<Vec<ItemReport>, CliError> {
    let f = cfg.f;
    let mut out = Vec::new();
    for (m, ks) in [(1u32, vec![1u32]), (1, vec![2]), (2, vec![0, 1])] {
        if !(ks.len() as u32 + f.q - 1 - m).is_multiple_of(f.q - 1) {
            continue;
        }
        let t0 = Instant::now();
        let r = petrov_check(f, m, &ks, cfg.u_prec)?;
        out.push(report(&format!("petrov m={m} l={}", r.l), r.passed(), r.residual.map(|v| v as f64), cfg.u_prec as f64, r.to_json(), t0));
    }
    Ok(out)
}

fn hecke(cfg: &Config) -> Result<Vec<ItemReport>, CliError> {
    let t0 = Instant::now();
    let z = cfg.sample()?;
    let prec = cfg.prec_int();
    let r = hecke_check(cfg.f, &ThetaPoly::theta_pow(cfg.f, 1), 1, &z, prec)?;
    Ok(vec![report("hecke T_θ eigenform", r.passed(), r.residual_valuation, prec as f64, r.to_json(), t0)])
}

fn group(cfg: &Config, name: &str) -> Result<Vec<ItemReport>, CliError> {
    match name {
        "harmonic" => harmonic(cfg),
        "constants" => constants(cfg),
        "bernoulli" => bernoulli(cfg),
        "petrov" => petrov(cfg),
        "hecke" => hecke(cfg),
        _ => Ok(identity_suite(cfg.f, name, cfg.u_prec)?),
    }
}

/// Items of the named suite in declaration order.
pub fn run(cfg: &Config, suite: &str) -> Result<Vec<ItemReport>, CliError> {
    let name = if suite == "conjE" { "conjE_first_entry" } else { suite };
    if name == "all" {
        let mut out = Vec::new();
        for g in GROUPS.iter().chain(SUITE_ITEMS.iter()) {
            out.extend(group(cfg, g)?);
        }
        return Ok(out);
    }
    if !GROUPS.contains(&name) && !SUITE_ITEMS.contains(&name) {
        let known: Vec<&str> = GROUPS.iter().chain(SUITE_ITEMS.iter()).copied().chain(["conjE", "all"]).collect();
        return Err(CliError::usage(format!("unknown suite {suite:?}; known: {}", known.join(", "))));
    }
    group(cfg, name)
}
