//! Run configuration shared by every command.
//!
//! - flags are global and may come from `CARLITZ_*` environment variables
//! - variables are written 1-based in text (`1,2,3` or `s{1,2,3}`) and stored 0-based

use carlitz::cinf::{default_den, sample_z, SamplePoint};
use carlitz::{Field, SemiChar};
use clap::{Args, ValueEnum};
use num_rational::Rational64;
use serde_json::{json, Value};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Args, Debug, Clone)]
pub struct ConfigArgs {
    /// Characteristic p.
    #[arg(long, global = true, env = "CARLITZ_P", default_value_t = 3)]
    pub p: u32,
    /// Degree e of F_q over F_p.
    #[arg(long, global = true, env = "CARLITZ_E", default_value_t = 1)]
    pub e: u32,
    /// θ-adic precision in units of 1/θ; may be a fraction a/b.
    #[arg(long = "theta-prec", visible_alias = "prec", global = true, env = "CARLITZ_THETA_PREC", default_value = "60")]
    pub theta_prec: String,
    /// u-adic precision; defaults to q³.
    #[arg(long = "u-prec", global = true, env = "CARLITZ_U_PREC")]
    pub u_prec: Option<i64>,
    /// Exponent denominator D of the Puiseux model; defaults to p²(q−1).
    #[arg(long, global = true, env = "CARLITZ_DENOM")]
    pub denom: Option<u32>,
    /// Variables Σ, 1-based: `1,2,3` or `s{1,2,3}`.
    #[arg(long, global = true, env = "CARLITZ_VARS")]
    pub vars: Option<String>,
    /// Sample point z = θ^r η (θ^r θ^{1/2} for q = 2); the profile is r.
    #[arg(long = "sample-profile", global = true, env = "CARLITZ_SAMPLE_PROFILE", default_value_t = 1)]
    pub sample_profile: u32,
    #[arg(long, global = true, env = "CARLITZ_FORMAT", value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Largest degree for per-degree checks.
    #[arg(long, global = true, env = "CARLITZ_DMAX", default_value_t = 3)]
    pub dmax: usize,
    /// Include wall-clock times in reports (output is then no longer reproducible).
    #[arg(long, global = true, env = "CARLITZ_TIMINGS")]
    pub timings: bool,
}

/// Validated configuration.
#[derive(Clone, Debug)]
pub struct Config {
    pub f: &'static Field,
    pub theta_prec: Rational64,
    pub u_prec: i64,
    pub den: u32,
    pub vars: Option<Vec<usize>>,
    pub sample_r: u32,
    pub format: Format,
    pub dmax: usize,
    pub timings: bool,
}

fn parse_rational(s: &str) -> Result<Rational64, CliError> {
    let bad = || CliError::usage(format!("bad precision {s:?}"));
    let r = match s.split_once('/') {
        Some((a, b)) => {
            let (a, b): (i64, i64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
            if b <= 0 {
                return Err(bad());
            }
            Rational64::new(a, b)
        }
        None => Rational64::from(s.trim().parse::<i64>().map_err(|_| bad())?),
    };
    Ok(r)
}

/// `1,2,3` or `s{1,2,3}` as 0-based indices.
pub fn parse_vars(s: &str) -> Result<Vec<usize>, CliError> {
    let t = s.trim();
    let text = if t.starts_with('s') { t.to_string() } else { format!("s{{{t}}}") };
    let sc = SemiChar::parse(&text).map_err(CliError::from)?;
    if sc.theta_pow() != 0 || sc.exps().values().any(|&k| k != 1) {
        return Err(CliError::usage(format!("{s:?} is not a set of variables")));
    }
    Ok(sc.vars())
}

impl ConfigArgs {
    pub fn resolve(&self) -> Result<Config, CliError> {
        let f = Field::get(self.p, self.e).map_err(|e| CliError::usage(e.to_string()))?;
        let theta_prec = parse_rational(&self.theta_prec)?;
        if theta_prec <= Rational64::from(0) {
            return Err(CliError::usage("theta precision must be positive"));
        }
        let q = f.q as i64;
        let u_prec = self.u_prec.unwrap_or(q * q * q);
        if u_prec < 1 {
            return Err(CliError::usage("u precision must be positive"));
        }
        let den = self.denom.unwrap_or_else(|| default_den(f));
        let vars = self.vars.as_deref().map(parse_vars).transpose()?;
        Ok(Config {
            f,
            theta_prec,
            u_prec,
            den,
            vars,
            sample_r: self.sample_profile,
            format: self.format,
            dmax: self.dmax,
            timings: self.timings,
        })
    }
}

impl Config {
    /// θ-precision rounded up to whole units.
    pub fn prec_int(&self) -> i64 {
        self.theta_prec.ceil().to_integer()
    }
    /// θ-precision in numerator units over the denominator.
    pub fn prec_num(&self) -> i64 {
        (self.theta_prec * Rational64::from(self.den as i64)).ceil().to_integer()
    }
    pub fn sample(&self) -> Result<SamplePoint, CliError> {
        sample_z(self.f, self.den, self.sample_r).map_err(CliError::from)
    }
    pub fn params(&self) -> Value {
        let prec = if self.theta_prec.is_integer() { json!(self.theta_prec.to_integer()) } else { json!(self.theta_prec.to_string()) };
        let mut v = json!({
            "p": self.f.p,
            "e": self.f.e,
            "q": self.f.q,
            "prec": prec,
            "uprec": self.u_prec,
            "denom": self.den,
            "dmax": self.dmax,
            "sample_profile": self.sample_r,
        });
        if let Some(vars) = &self.vars {
            v["vars"] = json!(vars.iter().map(|i| i + 1).collect::<Vec<_>>());
        }
        v
    }
}
