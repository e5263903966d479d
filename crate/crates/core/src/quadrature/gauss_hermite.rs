//! Two-dimensional Gauss–Hermite integration in an adapted affine frame.

use crate::error::{invalid, Result};

const PIM4: f64 = 0.751_125_544_464_942_5;
const MAX_NODES: usize = 256;

/// Nodes `x` and weights `w·e^{x²}` of the `n`-point Gauss–Hermite rule,
/// found by Newton iteration on the normalized Hermite recurrence.
pub fn nodes(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    let mut z: f64 = 0.0;
    for i in 0..n.div_ceil(2) {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let (mut p1, mut p2) = (PIM4, 0.0);
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 3e-14 * z.abs().max(1.0) {
                break;
            }
        }
        let wi = 2.0 / (pp * pp) * (z * z).exp();
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Affine map `q = center + M·x` chosen so that the integrand is close to a
/// polynomial times `e^{−|x|²}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Frame {
    pub center: [f64; 2],
    pub m: [[f64; 2]; 2],
}

impl Frame {
    pub fn identity() -> Self {
        Frame {
            center: [0.0, 0.0],
            m: [[1.0, 0.0], [0.0, 1.0]],
        }
    }

    pub fn scaled(scale: f64) -> Self {
        Frame {
            center: [0.0, 0.0],
            m: [[scale, 0.0], [0.0, scale]],
        }
    }

    fn jacobian(&self) -> f64 {
        (self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]).abs()
    }

    fn map(&self, x: f64, y: f64) -> (f64, f64) {
        (
            self.center[0] + self.m[0][0] * x + self.m[0][1] * y,
            self.center[1] + self.m[1][0] * x + self.m[1][1] * y,
        )
    }
}

fn rule(f: &impl Fn(f64, f64, &mut [f64]), k: usize, frame: &Frame, n: usize) -> Vec<f64> {
    let (x, w) = nodes(n);
    let jac = frame.jacobian();
    let mut acc = vec![0.0; k];
    let mut buf = vec![0.0; k];
    for i in 0..n {
        for j in 0..n {
            let (a, b) = frame.map(x[i], x[j]);
            f(a, b, &mut buf);
            let wt = w[i] * w[j] * jac;
            for (s, v) in acc.iter_mut().zip(&buf) {
                *s += wt * v;
            }
        }
    }
    acc
}

/// Integrates `k` quantities at once over the plane, doubling the node
/// count from 16 until successive rules agree within `tol`.
pub fn integrate_2d_many(
    f: impl Fn(f64, f64, &mut [f64]),
    k: usize,
    frame: &Frame,
    tol: f64,
) -> Result<Vec<f64>> {
    let mut n = 16;
    let mut prev = rule(&f, k, frame, n);
    while n < MAX_NODES {
        n *= 2;
        let next = rule(&f, k, frame, n);
        let diff = prev
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if diff < tol {
            return Ok(next);
        }
        prev = next;
    }
    Err(invalid(
        "quadrature",
        format!("no convergence to {tol} with {MAX_NODES} nodes"),
    ))
}

pub fn integrate_2d(f: impl Fn(f64, f64) -> f64, frame: &Frame, tol: f64) -> Result<f64> {
    Ok(integrate_2d_many(|a, b, out| out[0] = f(a, b), 1, frame, tol)?[0])
}
