//! `compute` targets: one object per call, with its precision metadata.

use carlitz::cinf::{omega, pitilde, PSeries};
use carlitz::goss::goss_poly;
use carlitz::modular::eisenstein_first_entry;
use carlitz::zeta::{bernoulli_poly, phi_series, zeta_value_den, CompositionArray};
use clap::Subcommand;
use serde_json::{json, Value};

use crate::config::{parse_vars, Config};
use crate::CliError;

#[derive(Subcommand, Debug, Clone)]
pub enum Target {
    /// Goss polynomial G_m.
    Goss { m: u32 },
    /// ζ_A of a composition array, e.g. `[(s{1,2};1),(1;q-1)]`.
    Zeta { array: String },
    /// φ_A u-expansion of a composition array.
    Phi {
        array: String,
        /// Use Goss polynomials G_n(u_a) in place of u_a^n.
        #[arg(long)]
        goss: bool,
    },
    /// First entry of the weight-w Eisenstein series for ρ*_Σ; Σ from the argument or --vars.
    Eisenstein { w: u32, sigma: Option<String> },
    /// Bernoulli-type polynomial 𝔹_Σ; Σ from the argument or --vars.
    Bernoulli { sigma: Option<String> },
    /// Anderson–Thakur function ω(t_i), i 1-based.
    Omega { i: usize },
    /// Carlitz period π̃.
    Pitilde,
}

/// Serialized object plus a one-line text rendering.
pub struct Computed {
    pub target: String,
    pub result: Value,
    pub text: String,
}

fn sigma_of(cfg: &Config, arg: &Option<String>) -> Result<Vec<usize>, CliError> {
    match (arg, &cfg.vars) {
        (Some(s), _) => parse_vars(s),
        (None, Some(v)) => Ok(v.clone()),
        (None, None) => Err(CliError::usage("no variables given; pass Σ or --vars")),
    }
}

fn series(s: &PSeries) -> Value {
    let mut v = s.to_json();
    v["valuation"] = json!(s.val_q().map(|r| r.to_string()));
    v
}

pub fn run(target: &Target, cfg: &Config) -> Result<Computed, CliError> {
    let f = cfg.f;
    let q = f.q;
    Ok(match target {
        Target::Goss { m } => {
            let g = goss_poly(f, *m)?;
            let coeffs: Vec<String> = g.coeffs.iter().map(|c| c.to_string()).collect();
            Computed { target: format!("goss {m}"), result: json!({ "m": m, "poly": g.to_string(), "coeffs": coeffs, "exact": true }), text: g.to_string() }
        }
        Target::Zeta { array } => {
            let c = CompositionArray::parse(array, q)?;
            let z = zeta_value_den(f, &c, cfg.prec_int(), cfg.den)?;
            let mut v = z.to_json();
            v["value"] = series(&z.value);
            v["array"] = json!(c.to_string());
            Computed { target: format!("zeta {c}"), result: v, text: z.value.to_string() }
        }
        Target::Phi { array, goss } => {
            let c = CompositionArray::parse(array, q)?;
            let s = phi_series(f, &c, cfg.u_prec, *goss)?;
            let mut v = s.to_json();
            v["array"] = json!(c.to_string());
            v["goss"] = json!(goss);
            Computed { target: format!("phi {c}"), result: v, text: s.to_string() }
        }
        Target::Eisenstein { w, sigma } => {
            let vars = sigma_of(cfg, sigma)?;
            let e = eisenstein_first_entry(f, *w, &vars, cfg.u_prec)?;
            let v = json!({ "w": w, "vars": vars.iter().map(|i| i + 1).collect::<Vec<_>>(), "first_entry": e.to_json() });
            Computed { target: format!("eisenstein {w}"), result: v, text: format!("{e:?}") }
        }
        Target::Bernoulli { sigma } => {
            let vars = sigma_of(cfg, sigma)?;
            let b = bernoulli_poly(f, &vars, cfg.prec_int())?;
            if !b.recognized {
                return Err(CliError::precision(format!("no polynomial recognized at θ-precision {}", b.prec)));
            }
            Computed { target: "bernoulli".into(), result: b.to_json(), text: b.poly.to_string() }
        }
        Target::Omega { i } => {
            if *i == 0 {
                return Err(CliError::usage("variables are numbered from 1"));
            }
            let w = omega(f, cfg.den, i - 1, cfg.prec_num())?;
            Computed { target: format!("omega {i}"), result: series(&w), text: w.to_string() }
        }
        Target::Pitilde => {
            let p = pitilde(f, cfg.den, cfg.prec_num())?;
            Computed { target: "pitilde".into(), result: series(&p), text: p.to_string() }
        }
    })
}
