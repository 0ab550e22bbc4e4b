//! Parameter schedule: the paper-scale log-space values and desk-scale
//! substitutes, with validation and the structured JSON config.
//!
//! Paper-scale sets keep `N, M, K, X, Y` only as natural logarithms because
//! `N = D^{cD^2/2}` overflows every machine integer. Desk-scale sets carry
//! concrete integers and must satisfy the annulus hypotheses
//! `(K+1)·width <= rho <= 1/12` and `2·rho + width < 1/4`.

use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::logval::LogValue;

pub const DEFAULT_C: (i64, i64) = (1, 100);
pub const DEFAULT_C1: u64 = 12;
pub const DEFAULT_C2: u64 = 9600;

#[derive(Debug, Error, PartialEq)]
pub enum ParamsError {
    #[error("constraint violated: {constraint} ({detail})")]
    ConstraintViolation {
        constraint: &'static str,
        detail: String,
    },
    #[error("malformed config: {0}")]
    Malformed(String),
    #[error("config value {key} disagrees with the derived schedule: expected {expected}, found {found}")]
    Inconsistent {
        key: &'static str,
        expected: String,
        found: String,
    },
}

fn violation(constraint: &'static str, detail: impl Into<String>) -> ParamsError {
    ParamsError::ConstraintViolation {
        constraint,
        detail: detail.into(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    PaperScale,
    DeskScale,
}

/// Concrete integers of a desk-scale set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DeskValues {
    pub n: u64,
    pub m: u64,
    pub k: u64,
    pub x: u64,
    pub y: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParameterSet {
    pub mode: Mode,
    pub dim: u32,
    pub c: Ratio<i64>,
    pub c1: u64,
    pub c2: u64,
    pub rho: f64,
    pub width: f64,
    pub log_n: LogValue,
    pub log_m: LogValue,
    pub log_k: LogValue,
    pub log_x: LogValue,
    pub log_y: LogValue,
    pub desk: Option<DeskValues>,
    pub seed: Option<u64>,
}

fn check_constants(c: Ratio<i64>, c1: u64, c2: u64) -> Result<(), ParamsError> {
    if !(*c.numer() > 0 && c.numer() < c.denom()) {
        return Err(violation("0 < c < 1", format!("c = {c}")));
    }
    if c1 < 12 {
        return Err(violation("C1 >= 12", format!("C1 = {c1}")));
    }
    if c2 < 800 * c1 {
        return Err(violation("C2 >= 800*C1", format!("C2 = {c2}, 800*C1 = {}", 800 * c1)));
    }
    Ok(())
}

/// The paper's schedule at dimension `dim`: `rho = D^-4`, `M = rho^{-(1/4+c)D}`,
/// `N = D^{cD^2/2}`, `K = rho N^{4/D}`, `Y = rho^{-cD}`, `X = N^{100(C2+2)/D}`.
pub fn derive_paper_schedule(
    dim: u32,
    c: Ratio<i64>,
    c1: u64,
    c2: u64,
) -> Result<ParameterSet, ParamsError> {
    if dim < 2 {
        return Err(violation("D >= 2", format!("D = {dim}")));
    }
    check_constants(c, c1, c2)?;
    let d = dim as i64;
    let (cn, cd) = (*c.numer(), *c.denom());
    let ln_d = LogValue::ln_u64(dim as u64);
    // ln(1/rho) = 4 ln D
    let ln_inv_rho = ln_d.mul_int(4);
    let log_n = ln_d.mul_ratio(cn * d * d, 2 * cd);
    // (1/4 + c) = (cd + 4 cn) / (4 cd)
    let log_m = ln_inv_rho.mul_ratio((cd + 4 * cn) * d, 4 * cd);
    let log_y = ln_inv_rho.mul_ratio(cn * d, cd);
    let log_k = log_n.mul_ratio(4, d).sub(&ln_inv_rho);
    let log_x = log_n.mul_ratio(100 * (c2 as i64 + 2), d);
    let rho = (dim as f64).powi(-4);
    let width = (-log_n.mul_ratio(4, d).to_f64()).exp();
    Ok(ParameterSet {
        mode: Mode::PaperScale,
        dim,
        c,
        c1,
        c2,
        rho,
        width,
        log_n,
        log_m,
        log_k,
        log_x,
        log_y,
        desk: None,
        seed: None,
    })
}

/// Desk-scale parameter set with concrete integers.
#[allow(clippy::too_many_arguments)]
pub fn make_desk_params(
    dim: u32,
    n: u64,
    m: u64,
    k: u64,
    width: f64,
    rho: f64,
    x_target: u64,
    y_target: u64,
) -> Result<ParameterSet, ParamsError> {
    let c = Ratio::new(DEFAULT_C.0, DEFAULT_C.1);
    make_desk_params_with(dim, n, m, k, width, rho, x_target, y_target, c, DEFAULT_C1, DEFAULT_C2)
}

#[allow(clippy::too_many_arguments)]
pub fn make_desk_params_with(
    dim: u32,
    n: u64,
    m: u64,
    k: u64,
    width: f64,
    rho: f64,
    x_target: u64,
    y_target: u64,
    c: Ratio<i64>,
    c1: u64,
    c2: u64,
) -> Result<ParameterSet, ParamsError> {
    if dim == 0 || m == 0 || k == 0 || x_target == 0 || y_target == 0 {
        return Err(violation(
            "all positive",
            format!("D={dim} M={m} K={k} X={x_target} Y={y_target}"),
        ));
    }
    if !(width.is_finite() && width > 0.0 && rho.is_finite() && rho > 0.0) {
        return Err(violation("all positive", format!("width={width} rho={rho}")));
    }
    if n < 3 {
        return Err(violation("N >= 3", format!("N = {n}")));
    }
    check_constants(c, c1, c2)?;
    let outer = (k as f64 + 1.0) * width;
    if outer > rho {
        return Err(violation(
            "(K+1)*width <= rho",
            format!("(K+1)*width = {outer} > rho = {rho}"),
        ));
    }
    if rho > 1.0 / 12.0 {
        return Err(violation("rho <= 1/12", format!("rho = {rho}")));
    }
    if 2.0 * rho + width >= 0.25 {
        return Err(violation(
            "2*rho + width < 1/4",
            format!("2*rho + width = {}", 2.0 * rho + width),
        ));
    }
    Ok(ParameterSet {
        mode: Mode::DeskScale,
        dim,
        c,
        c1,
        c2,
        rho,
        width,
        log_n: LogValue::ln_u64(n),
        log_m: LogValue::ln_u64(m),
        log_k: LogValue::ln_u64(k),
        log_x: LogValue::ln_u64(x_target),
        log_y: LogValue::ln_u64(y_target),
        desk: Some(DeskValues {
            n,
            m,
            k,
            x: x_target,
            y: y_target,
        }),
        seed: None,
    })
}

impl ParameterSet {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn is_desk(&self) -> bool {
        self.mode == Mode::DeskScale
    }

    /// `ln(rho^{-D})`.
    pub fn log_rho_pow_neg_d(&self) -> LogValue {
        match self.mode {
            Mode::PaperScale => LogValue::ln_u64(self.dim as u64).mul_int(4 * self.dim as i64),
            Mode::DeskScale => LogValue::ln_f64(self.rho).neg().mul_int(self.dim as i64),
        }
    }

    /// Threshold `1/2 N^{-2/D}` used by the theta-gap hypothesis.
    pub fn theta_gap_threshold(&self) -> f64 {
        0.5 * (-2.0 * self.log_n.to_f64() / self.dim as f64).exp()
    }

    /// Whether the annulus step bound `(2K+1)·width^2 < (1/4) N^{-4/D}` holds.
    ///
    /// Any 3-AP `u, u+v, u+2v` inside one annulus has `|v|^2 < (2K+1) width^2`,
    /// so this is what turns a passing theta-gap check into blue-freeness.
    /// Paper-scale sets satisfy it through `width = N^{-4/D}` and `2 rho + width < 1/4`.
    pub fn annulus_step_bound_holds(&self) -> bool {
        let Some(desk) = self.desk else {
            return 2.0 * self.rho + self.width < 0.25;
        };
        let t = self.theta_gap_threshold();
        (2.0 * desk.k as f64 + 1.0) * self.width * self.width < t * t
    }

    /// Hex SHA-256 of the canonical JSON config.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.to_json().as_bytes());
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn to_config(&self) -> ConfigFile {
        let c = format!("{}/{}", self.c.numer(), self.c.denom());
        let (n, m, k, x, y) = match self.desk {
            Some(v) => (
                ConfigNumber::Int(v.n),
                ConfigNumber::Int(v.m),
                ConfigNumber::Int(v.k),
                ConfigNumber::Int(v.x),
                ConfigNumber::Int(v.y),
            ),
            None => (
                ConfigNumber::Log(render_log(&self.log_n)),
                ConfigNumber::Log(render_log(&self.log_m)),
                ConfigNumber::Log(render_log(&self.log_k)),
                ConfigNumber::Log(render_log(&self.log_x)),
                ConfigNumber::Log(render_log(&self.log_y)),
            ),
        };
        ConfigFile {
            mode: self.mode,
            d: self.dim,
            c: Some(c),
            c1: Some(self.c1),
            c2: Some(self.c2),
            rho: Some(self.rho),
            n: Some(n),
            m: Some(m),
            k: Some(k),
            width: Some(self.width),
            x: Some(x),
            y: Some(y),
            seed: self.seed,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_config()).expect("config serializes")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&self.to_config()).expect("config serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ParamsError> {
        let cfg: ConfigFile =
            serde_json::from_str(text).map_err(|e| ParamsError::Malformed(e.to_string()))?;
        Self::from_config(&cfg)
    }

    pub fn from_value(value: Value) -> Result<Self, ParamsError> {
        let cfg: ConfigFile =
            serde_json::from_value(value).map_err(|e| ParamsError::Malformed(e.to_string()))?;
        Self::from_config(&cfg)
    }

    pub fn from_config(cfg: &ConfigFile) -> Result<Self, ParamsError> {
        let c = match &cfg.c {
            Some(s) => parse_ratio(s)?,
            None => Ratio::new(DEFAULT_C.0, DEFAULT_C.1),
        };
        let c1 = cfg.c1.unwrap_or(DEFAULT_C1);
        let c2 = cfg.c2.unwrap_or(DEFAULT_C2);
        let set = match cfg.mode {
            Mode::PaperScale => {
                let set = derive_paper_schedule(cfg.d, c, c1, c2)?;
                check_float("rho", set.rho, cfg.rho)?;
                check_float("width", set.width, cfg.width)?;
                check_log("N", &set.log_n, &cfg.n)?;
                check_log("M", &set.log_m, &cfg.m)?;
                check_log("K", &set.log_k, &cfg.k)?;
                check_log("X", &set.log_x, &cfg.x)?;
                check_log("Y", &set.log_y, &cfg.y)?;
                set
            }
            Mode::DeskScale => {
                let rho = cfg.rho.ok_or_else(|| missing("rho"))?;
                let width = cfg.width.ok_or_else(|| missing("width"))?;
                make_desk_params_with(
                    cfg.d,
                    int_field("N", &cfg.n)?,
                    int_field("M", &cfg.m)?,
                    int_field("K", &cfg.k)?,
                    width,
                    rho,
                    int_field("X", &cfg.x)?,
                    int_field("Y", &cfg.y)?,
                    c,
                    c1,
                    c2,
                )?
            }
        };
        Ok(Self {
            seed: cfg.seed,
            ..set
        })
    }
}

impl fmt::Display for ParameterSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_json())
    }
}

fn render_log(v: &LogValue) -> String {
    format!("e^{}", v.to_decimal(40))
}

fn missing(key: &str) -> ParamsError {
    ParamsError::Malformed(format!("missing key {key}"))
}

fn int_field(key: &'static str, v: &Option<ConfigNumber>) -> Result<u64, ParamsError> {
    match v {
        Some(ConfigNumber::Int(n)) => Ok(*n),
        Some(ConfigNumber::Log(s)) => Err(ParamsError::Malformed(format!(
            "{key} must be an integer in desk mode, found {s:?}"
        ))),
        None => Err(missing(key)),
    }
}

fn check_float(key: &'static str, derived: f64, given: Option<f64>) -> Result<(), ParamsError> {
    match given {
        Some(g) if g != derived => Err(ParamsError::Inconsistent {
            key,
            expected: derived.to_string(),
            found: g.to_string(),
        }),
        _ => Ok(()),
    }
}

fn check_log(
    key: &'static str,
    derived: &LogValue,
    given: &Option<ConfigNumber>,
) -> Result<(), ParamsError> {
    let expected = render_log(derived);
    match given {
        None => Ok(()),
        Some(ConfigNumber::Log(s)) if *s == expected => Ok(()),
        Some(other) => Err(ParamsError::Inconsistent {
            key,
            expected,
            found: match other {
                ConfigNumber::Int(n) => n.to_string(),
                ConfigNumber::Log(s) => s.clone(),
            },
        }),
    }
}

pub fn parse_ratio(s: &str) -> Result<Ratio<i64>, ParamsError> {
    let bad = || ParamsError::Malformed(format!("bad rational {s:?}"));
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a.trim().parse::<i64>(), b.trim().parse::<i64>()),
        None => (s.trim().parse::<i64>(), Ok(1)),
    };
    let (num, den) = (num.map_err(|_| bad())?, den.map_err(|_| bad())?);
    if den == 0 {
        return Err(bad());
    }
    Ok(Ratio::new(num, den))
}

/// Integer in desk mode, `"e^<ln value>"` in paper mode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ConfigNumber {
    Int(u64),
    Log(String),
}

/// On-disk layout of a parameter config. Unknown keys are rejected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub mode: Mode,
    #[serde(rename = "D")]
    pub d: u32,
    #[serde(default)]
    pub c: Option<String>,
    #[serde(rename = "C1", default)]
    pub c1: Option<u64>,
    #[serde(rename = "C2", default)]
    pub c2: Option<u64>,
    #[serde(default)]
    pub rho: Option<f64>,
    #[serde(rename = "N", default)]
    pub n: Option<ConfigNumber>,
    #[serde(rename = "M", default)]
    pub m: Option<ConfigNumber>,
    #[serde(rename = "K", default)]
    pub k: Option<ConfigNumber>,
    #[serde(default)]
    pub width: Option<f64>,
    #[serde(rename = "X", default)]
    pub x: Option<ConfigNumber>,
    #[serde(rename = "Y", default)]
    pub y: Option<ConfigNumber>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrderingCheck {
    pub lhs: &'static str,
    pub rhs: &'static str,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrderingReport {
    pub quantities: Vec<(&'static str, LogValue)>,
    pub checks: Vec<OrderingCheck>,
    pub passed: bool,
}

impl OrderingReport {
    pub fn to_json(&self) -> Value {
        serde_json::json!({
            "quantities": self
                .quantities
                .iter()
                .map(|(name, v)| serde_json::json!({"name": name, "ln": v.to_decimal(20)}))
                .collect::<Vec<_>>(),
            "checks": self.checks,
            "passed": self.passed,
        })
    }
}

/// Checks `log K < log Y < log M < log rho^{-D} < log X`.
pub fn validate_ordering(p: &ParameterSet) -> OrderingReport {
    let quantities = vec![
        ("K", p.log_k.clone()),
        ("Y", p.log_y.clone()),
        ("M", p.log_m.clone()),
        ("rho^-D", p.log_rho_pow_neg_d()),
        ("X", p.log_x.clone()),
    ];
    let checks: Vec<OrderingCheck> = quantities
        .windows(2)
        .map(|w| OrderingCheck {
            lhs: w[0].0,
            rhs: w[1].0,
            holds: w[0].1 < w[1].1,
        })
        .collect();
    let passed = checks.iter().all(|c| c.holds);
    OrderingReport {
        quantities,
        checks,
        passed,
    }
}

/// Desk defaults used by the harness: `D=4, N=4096, M=64, K=7`.
pub fn default_desk_params() -> ParameterSet {
    make_desk_params(4, 4096, 64, 7, 1.25e-4, 1e-3, 64, 16).expect("default desk params are valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn paper(d: u32) -> ParameterSet {
        derive_paper_schedule(d, Ratio::new(1, 100), 12, 9600).unwrap()
    }

    #[test]
    fn paper_rho_at_d10() {
        assert_eq!(paper(10).rho, 1e-4);
    }

    #[test]
    fn paper_log_n_at_d10() {
        // 0.5 * ln 10 from an independent arbitrary-precision evaluation.
        assert_eq!(
            paper(10).log_n.to_decimal(30),
            "1.151292546497022842008995727342"
        );
    }

    #[test]
    fn rejects_small_c1() {
        let err = derive_paper_schedule(10, Ratio::new(1, 100), 11, 9600).unwrap_err();
        assert!(matches!(err, ParamsError::ConstraintViolation { constraint: "C1 >= 12", .. }));
    }

    #[test]
    fn rejects_small_c2_and_bad_c() {
        assert!(derive_paper_schedule(10, Ratio::new(1, 100), 12, 9599).is_err());
        assert!(derive_paper_schedule(10, Ratio::new(1, 1), 12, 9600).is_err());
        assert!(derive_paper_schedule(1, Ratio::new(1, 100), 12, 9600).is_err());
    }

    #[test]
    fn schedule_is_deterministic() {
        assert_eq!(paper(37), paper(37));
    }

    #[test]
    fn desk_examples() {
        assert!(make_desk_params(4, 4096, 64, 7, 0.004, 0.05, 64, 16).is_ok());
        let err = make_desk_params(4, 4096, 64, 20, 0.004, 0.05, 64, 16).unwrap_err();
        assert!(matches!(
            err,
            ParamsError::ConstraintViolation { constraint: "(K+1)*width <= rho", .. }
        ));
        let err = make_desk_params(4, 4096, 64, 7, 0.004, 0.2, 64, 16).unwrap_err();
        assert!(matches!(err, ParamsError::ConstraintViolation { constraint: "rho <= 1/12", .. }));
        assert!(make_desk_params(4, 2, 64, 7, 0.004, 0.05, 64, 16).is_err());
    }

    #[test]
    fn desk_ordering_failure_is_reported() {
        let p = make_desk_params(4, 4096, 64, 10, 0.004, 0.05, 64, 5).unwrap();
        let r = validate_ordering(&p);
        assert!(!r.passed);
        assert_eq!(r.checks[0].lhs, "K");
        assert!(!r.checks[0].holds);
    }

    #[test]
    fn paper_ordering_small_d_report_only() {
        let r = validate_ordering(&paper(10));
        assert_eq!(r.quantities.len(), 5);
        assert_eq!(r.checks.len(), 4);
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = ParameterSet::from_json(r#"{"mode":"DeskScale","D":4,"bogus":1}"#).unwrap_err();
        assert!(matches!(err, ParamsError::Malformed(_)));
    }

    #[test]
    fn paper_config_with_wrong_log_is_rejected() {
        let mut cfg = paper(12).to_config();
        cfg.n = Some(ConfigNumber::Log("e^1.0".into()));
        assert!(matches!(
            ParameterSet::from_config(&cfg),
            Err(ParamsError::Inconsistent { key: "N", .. })
        ));
    }

    #[test]
    fn default_desk_satisfies_step_bound() {
        let p = default_desk_params();
        assert!(p.annulus_step_bound_holds());
        // The (K+1)·width example set does not: width 0.004 is far above N^{-4/D}.
        let loose = make_desk_params(4, 4096, 64, 7, 0.004, 0.05, 64, 16).unwrap();
        assert!(!loose.annulus_step_bound_holds());
    }
}
