//! Gauss–Legendre rules and a hyperspherical product rule for Gaussian
//! expectations on `R^d`.

use std::f64::consts::PI;

/// Nodes and weights of the `m`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(m, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(m, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[m - 1 - i] = x;
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=m {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    (p1, m as f64 * (x * p1 - p0) / (x * x - 1.0))
}

/// Composite Gauss–Legendre integral of `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize, order: usize) -> f64 {
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|p| {
            let lo = a + p as f64 * h;
            x.iter()
                .zip(&w)
                .map(|(xi, wi)| wi * f(lo + 0.5 * h * (xi + 1.0)))
                .sum::<f64>()
                * 0.5
                * h
        })
        .sum()
}

/// Unit vectors and surface weights of a product rule on `S^{d-1}`.
fn sphere_rule(d: usize, order: usize) -> Vec<(Vec<f64>, f64)> {
    if d == 1 {
        return vec![(vec![1.0], 1.0), (vec![-1.0], 1.0)];
    }
    if d == 2 {
        let m = 2 * order;
        return (0..m)
            .map(|i| {
                let phi = 2.0 * PI * i as f64 / m as f64;
                (vec![phi.cos(), phi.sin()], 2.0 * PI / m as f64)
            })
            .collect();
    }
    let (x, w) = gauss_legendre(order);
    let inner = sphere_rule(d - 1, order);
    let mut out = Vec::with_capacity(order * inner.len());
    for (xi, wi) in x.iter().zip(&w) {
        let theta = 0.5 * PI * (xi + 1.0);
        let (c, s) = (theta.cos(), theta.sin());
        let jac = 0.5 * PI * wi * s.powi(d as i32 - 2);
        for (u, wu) in &inner {
            let mut v = Vec::with_capacity(d);
            v.push(c);
            v.extend(u.iter().map(|ui| s * ui));
            out.push((v, jac * wu));
        }
    }
    out
}

/// `E[g(Z)]` for a standard Gaussian vector `Z` in `R^d`, integrated in
/// hyperspherical coordinates. Accurate for `g` of polynomial growth that is
/// smooth along rays, such as `|z|` times a polynomial.
pub fn gaussian_expectation<F: Fn(&[f64]) -> f64>(d: usize, g: F, order: usize) -> f64 {
    let sphere = sphere_rule(d, order);
    let norm = (2.0 * PI).powf(-(d as f64) / 2.0);
    let radial = |r: f64| {
        if r == 0.0 {
            return 0.0;
        }
        let mut acc = 0.0;
        let mut z = vec![0.0; d];
        for (u, w) in &sphere {
            for (zi, ui) in z.iter_mut().zip(u) {
                *zi = r * ui;
            }
            acc += w * g(&z);
        }
        acc * r.powi(d as i32 - 1) * (-0.5 * r * r).exp()
    };
    norm * integrate(radial, 0.0, 16.0, 32, 24)
}
