//! Gauss rules on reference cells and facets.

use crate::forms::Point;
use crate::mesh::CellKind;

/// Gauss–Legendre nodes and weights on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { z } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pn1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// Points and weights on a reference domain.
#[derive(Clone, Debug)]
pub struct QuadRule {
    pub dim: usize,
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
}

fn points_for(degree: usize) -> usize {
    degree / 2 + 1
}

impl QuadRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Tensor rule on [0,1]^m, exact for degree `degree` in each variable.
    pub fn unit_cube(m: usize, degree: usize) -> Self {
        let (x, w) = gauss_legendre(points_for(degree));
        let x01: Vec<f64> = x.iter().map(|t| 0.5 * (t + 1.0)).collect();
        let w01: Vec<f64> = w.iter().map(|t| 0.5 * t).collect();
        let mut points = vec![[0.0; 3]];
        let mut weights = vec![1.0];
        for axis in 0..m {
            let mut np = Vec::with_capacity(points.len() * x01.len());
            let mut nw = Vec::with_capacity(points.len() * x01.len());
            for (p, pw) in points.iter().zip(&weights) {
                for (xi, wi) in x01.iter().zip(&w01) {
                    let mut q = *p;
                    q[axis] = *xi;
                    np.push(q);
                    nw.push(pw * wi);
                }
            }
            points = np;
            weights = nw;
        }
        QuadRule { dim: m, points, weights }
    }

    /// Collapsed-coordinate rule on the unit simplex, exact for total degree `degree`.
    pub fn unit_simplex(m: usize, degree: usize) -> Self {
        if m <= 1 {
            return Self::unit_cube(m, degree);
        }
        // Axis a carries the extra Jacobian factor (1 − u_a)^{m−1−a}.
        let rules: Vec<(Vec<f64>, Vec<f64>)> = (0..m)
            .map(|a| {
                let (x, w) = gauss_legendre(points_for(degree + m - 1 - a));
                (x.iter().map(|t| 0.5 * (t + 1.0)).collect(), w.iter().map(|t| 0.5 * t).collect())
            })
            .collect();
        let mut points = Vec::new();
        let mut weights = Vec::new();
        let mut idx = vec![0usize; m];
        loop {
            let mut p = [0.0; 3];
            let mut wgt = 1.0;
            let mut remaining = 1.0;
            for a in 0..m {
                let u = rules[a].0[idx[a]];
                wgt *= rules[a].1[idx[a]];
                if a + 1 < m {
                    p[a] = remaining * u;
                    wgt *= (1.0 - u).powi((m - 1 - a) as i32);
                    remaining *= 1.0 - u;
                } else {
                    p[a] = remaining * u;
                }
            }
            points.push(p);
            weights.push(wgt);
            let mut a = m;
            loop {
                if a == 0 {
                    return QuadRule { dim: m, points, weights };
                }
                a -= 1;
                idx[a] += 1;
                if idx[a] < rules[a].0.len() {
                    break;
                }
                idx[a] = 0;
            }
        }
    }

    /// Rule on the unit simplex or unit cube of dimension m.
    pub fn unit(kind: CellKind, m: usize, degree: usize) -> Self {
        match kind {
            CellKind::Simplex => Self::unit_simplex(m, degree),
            CellKind::Cube => Self::unit_cube(m, degree),
        }
    }

    /// Rule on the centered reference cell (unit cell mapped by ξ = 2x − 1).
    pub fn reference(kind: CellKind, dim: usize, degree: usize) -> Self {
        let mut r = Self::unit(kind, dim, degree);
        let scale = (1u64 << dim) as f64;
        for p in &mut r.points {
            for x in p.iter_mut().take(dim) {
                *x = 2.0 * *x - 1.0;
            }
        }
        for w in &mut r.weights {
            *w *= scale;
        }
        r
    }
}
