#![allow(dead_code)]

use shadowlab::ensembles::Element;
use shadowlab::linalg::{c, cr, tensor_all, ComplexMatrix};

/// Gauss–Legendre nodes and weights on [−1, 1].
pub fn gauss_legendre(m: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(m);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

fn rz(a: f64) -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[c((-a / 2.0).cos(), (-a / 2.0).sin()), cr(0.0), cr(0.0), c((a / 2.0).cos(), (a / 2.0).sin())])
}

fn ry(b: f64) -> ComplexMatrix {
    let (s, co) = (b / 2.0).sin_cos();
    ComplexMatrix::from_row_slice(2, 2, &[cr(co), cr(-s), cr(s), cr(co)])
}

/// Exact Haar average over SU(2) of a function of U^{⊗n}, for integrands whose
/// Euler-angle frequencies stay below `k` (and degree in cos β below 2k).
pub fn su2_tensor_average(n: usize, k: usize, f: impl Fn(&Element) -> f64) -> f64 {
    let nodes = gauss_legendre(k);
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut total = 0.0;
    for &(x, w) in &nodes {
        let b = x.clamp(-1.0, 1.0).acos();
        let mut inner = 0.0;
        for ia in 0..k {
            for ig in 0..k {
                let u = rz(two_pi * ia as f64 / k as f64) * ry(b) * rz(two_pi * ig as f64 / k as f64);
                let el = Element::Dense(tensor_all(&vec![u; n]));
                inner += f(&el);
            }
        }
        total += w * inner / (k * k) as f64;
    }
    total / 2.0
}
