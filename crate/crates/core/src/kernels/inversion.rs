use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{chi_eval_lifted, chi_hat_f64, fejer_eval, fejer_hat, xi_l1_ball, ChiSpec, FejerSpec, KernelError};
use crate::torus::{lift_coord, TorusPoint};

/// Cap on the number of frequencies in the `||xi||_1 <= k` ball.
pub const INVERSION_XI_CAP: usize = 2_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InversionSums {
    pub direct_sum: f64,
    pub fourier_sum: f64,
    pub abs_diff: f64,
    /// The `xi = 0` term `chi_hat(0) w_hat(0)`, equal to `sum_i w(i)`.
    pub zero_term: f64,
    /// `sum_{xi != 0} |chi_hat(xi) w_hat(xi·alpha)|`.
    pub tail_abs: f64,
}

/// Evaluates `sum_i w(i) chi(theta(n1 + i d) - u - center)` directly and as
/// `sum_xi chi_hat(xi) cos(2 pi xi·(theta n1 - u - center)) w_hat(xi·d theta)`.
pub fn inversion_crosscheck(
    theta: &TorusPoint,
    d: u64,
    n1: u64,
    u: &[f64],
    center: &TorusPoint,
    fejer: &FejerSpec,
    chi: &ChiSpec,
) -> Result<InversionSums, KernelError> {
    let dim = chi.dim;
    if theta.dim() != dim || center.dim() != dim || u.len() != dim {
        return Err(KernelError::InvalidArgument("dimension mismatch".into()));
    }
    let base = &theta.scale(n1) - center;
    let alpha = theta.scale(d);

    let mut direct_sum = 0.0;
    for i in fejer.support() {
        let p = &base + &alpha.scale_signed(i);
        let y: Vec<f64> = p.lift().iter().zip(u).map(|(a, b)| a - b).collect();
        direct_sum += fejer_eval(fejer, i) * chi_eval_lifted(chi, &y);
    }

    let xis = xi_l1_ball_capped(dim, chi.k)?;
    let mut fourier_sum = 0.0;
    let mut zero_term = 0.0;
    let mut tail_abs = 0.0;
    for xi in &xis {
        let h = chi_hat_f64(chi, xi);
        if h == 0.0 {
            continue;
        }
        let shift: f64 = xi.iter().zip(u).map(|(&a, &b)| a as f64 * b).sum();
        let phase = lift_coord(base.dot_int(xi)) - shift;
        let beta = lift_coord(alpha.dot_int(xi));
        let term = h * (2.0 * PI * phase).cos() * fejer_hat(fejer, beta);
        if xi.iter().all(|&x| x == 0) {
            zero_term = term;
        } else {
            tail_abs += term.abs();
        }
        fourier_sum += term;
    }
    Ok(InversionSums {
        direct_sum,
        fourier_sum,
        abs_diff: (direct_sum - fourier_sum).abs(),
        zero_term,
        tail_abs,
    })
}

fn xi_l1_ball_capped(dim: usize, k: usize) -> Result<Vec<Vec<i64>>, KernelError> {
    let mut size: u128 = 0;
    let (mut c_dim, mut c_r) = (1u128, 1u128);
    for i in 0..=dim.min(k) {
        if i > 0 {
            c_dim = c_dim * (dim - i + 1) as u128 / i as u128;
            c_r = c_r * (k - i + 1) as u128 / i as u128;
        }
        size = size.saturating_add((1u128 << i.min(127)).saturating_mul(c_dim).saturating_mul(c_r));
    }
    if size > INVERSION_XI_CAP as u128 {
        return Err(KernelError::CapExceeded {
            size,
            cap: INVERSION_XI_CAP as u128,
        });
    }
    Ok(xi_l1_ball(dim, k))
}
