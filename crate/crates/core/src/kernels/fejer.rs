use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{KernelReport, Method, PropertyCheck};

/// `w = (100/X) 1_[-h,h] * 1_[-h,h]` with `h = floor(X/10)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FejerSpec {
    pub x: f64,
    pub half_support: i64,
    pub scale: f64,
}

impl FejerSpec {
    pub fn new(x: f64) -> Self {
        assert!(x > 0.0, "X must be positive");
        FejerSpec {
            x,
            half_support: (x / 10.0).floor() as i64,
            scale: 100.0 / x,
        }
    }

    /// Same support with a different scale; used to build failing kernels.
    pub fn with_scale(self, scale: f64) -> Self {
        FejerSpec { scale, ..self }
    }

    pub fn support(&self) -> std::ops::RangeInclusive<i64> {
        -2 * self.half_support..=2 * self.half_support
    }

    /// `sum_n w(n) = scale (2h+1)^2`.
    pub fn total(&self) -> f64 {
        let m = (2 * self.half_support + 1) as f64;
        self.scale * m * m
    }
}

pub fn fejer_eval(spec: &FejerSpec, n: i64) -> f64 {
    let h = spec.half_support;
    if n.abs() > 2 * h {
        0.0
    } else {
        spec.scale * (2 * h + 1 - n.abs()) as f64
    }
}

/// `scale · |sum_{|n|<=h} e(-beta n)|^2` via the Dirichlet kernel.
pub fn fejer_hat(spec: &FejerSpec, beta: f64) -> f64 {
    let m = (2 * spec.half_support + 1) as f64;
    let b = beta - beta.round();
    let den = (PI * b).sin();
    let dirichlet = if den.abs() < 1e-9 {
        m
    } else {
        (PI * m * b).sin() / den
    };
    spec.scale * dirichlet * dirichlet
}

/// `sum_n w(n) e(-beta n)` term by term.
pub fn fejer_hat_direct(spec: &FejerSpec, beta: f64) -> f64 {
    spec.support()
        .map(|n| fejer_eval(spec, n) * (2.0 * PI * beta * n as f64).cos())
        .sum()
}

fn torus_dist(beta: f64) -> f64 {
    (beta - beta.round()).abs()
}

pub fn uniform_betas<R: Rng + ?Sized>(count: usize, rng: &mut R) -> Vec<f64> {
    (0..count).map(|_| rng.gen::<f64>()).collect()
}

/// Support, nonnegative spectrum, mass and spectral decay at the samples.
pub fn verify_fejer_properties(spec: &FejerSpec, betas: &[f64]) -> KernelReport {
    let h = spec.half_support;
    let mut props = Vec::new();

    let support_ok = 2.0 * h as f64 <= spec.x / 5.0
        && fejer_eval(spec, 2 * h + 1) == 0.0
        && spec.support().all(|n| fejer_eval(spec, n) >= 0.0);
    props.push(PropertyCheck::new(
        "1b",
        Method::Exact,
        support_ok,
        format!("support [-{0}, {0}] within [-X/5, X/5] = [-{1}, {1}]", 2 * h, spec.x / 5.0),
    ));

    let mut p2 = PropertyCheck::new("2b", Method::Sampled, true, String::new());
    let mut min_hat = f64::INFINITY;
    for &b in betas {
        let v = fejer_hat(spec, b);
        min_hat = min_hat.min(v);
        if v < -1e-9 && p2.passed {
            p2.passed = false;
            p2.failing_sample = Some(format!("beta = {b}, value = {v}"));
        }
    }
    p2.detail = format!("min over {} samples = {min_hat:e} (tolerance -1e-9)", betas.len());
    props.push(p2);

    let total = spec.total();
    props.push(PropertyCheck::new(
        "3b",
        Method::Exact,
        total >= spec.x,
        format!("sum w = {total} vs X = {}", spec.x),
    ));

    let mut p4 = PropertyCheck::new("4b", Method::Sampled, true, String::new());
    let mut checked = 0;
    for &b in betas {
        let t = torus_dist(b);
        if t == 0.0 {
            continue;
        }
        checked += 1;
        let bound = 128.0 / (spec.x * t * t);
        let v = fejer_hat(spec, b).abs();
        if v > bound + 1e-9 && p4.passed {
            p4.passed = false;
            p4.failing_sample = Some(format!("beta = {b}, value = {v}, bound = {bound}"));
        }
    }
    p4.detail = format!("|w^(beta)| <= 2^7 / (X ||beta||^2) at {checked} nonzero samples");
    props.push(p4);

    KernelReport {
        kernel: "fejer".into(),
        parameters: json!({ "X": spec.x, "half_support": h, "scale": spec.scale }),
        properties: props,
    }
}
