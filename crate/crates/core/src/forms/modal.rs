//! Orthonormal polynomial bases on the centered reference cells: products of
//! Legendre polynomials on [−1, 1]^d and collapsed-coordinate Jacobi
//! (Dubiner) polynomials on the simplex with vertices (−1,…,−1), (−1,…,−1) + 2eᵢ.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use faer::Mat;

use super::{Monomial, Point, Polynomial};
use crate::mesh::CellKind;
use crate::quadrature::QuadRule;

/// Values with a gradient, for differentiating the recurrences.
#[derive(Clone, Copy, Debug)]
struct Dual {
    v: f64,
    g: [f64; 3],
}

trait Ring: Clone {
    fn one() -> Self;
    fn add(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn scale(&self, s: f64) -> Self;
}

impl Ring for Dual {
    fn one() -> Self {
        Dual { v: 1.0, g: [0.0; 3] }
    }
    fn add(&self, o: &Self) -> Self {
        Dual { v: self.v + o.v, g: [self.g[0] + o.g[0], self.g[1] + o.g[1], self.g[2] + o.g[2]] }
    }
    fn mul(&self, o: &Self) -> Self {
        let g = [0, 1, 2].map(|i| self.v * o.g[i] + o.v * self.g[i]);
        Dual { v: self.v * o.v, g }
    }
    fn scale(&self, s: f64) -> Self {
        Dual { v: self.v * s, g: self.g.map(|x| x * s) }
    }
}

impl Ring for Polynomial<f64> {
    fn one() -> Self {
        Polynomial::constant(1.0)
    }
    fn add(&self, o: &Self) -> Self {
        Polynomial::add(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        Polynomial::mul(self, o)
    }
    fn scale(&self, s: f64) -> Self {
        Polynomial::mul(self, &Polynomial::constant(s))
    }
}

/// h_n = P_n^{(α,0)}(X/S)·Sⁿ for n ≤ max, by the homogenized Jacobi recurrence.
fn jacobi_homogeneous<T: Ring>(alpha: usize, max: usize, x: &T, s: &T) -> Vec<T> {
    let a = alpha as f64;
    let mut h = vec![T::one()];
    if max >= 1 {
        h.push(x.scale((a + 2.0) / 2.0).add(&s.scale(a / 2.0)));
    }
    let s2 = s.mul(s);
    for n in 1..max {
        let nf = n as f64;
        let den = 2.0 * (nf + 1.0) * (nf + a + 1.0) * (2.0 * nf + a);
        let c1 = (2.0 * nf + a + 1.0) * (2.0 * nf + a + 2.0) * (2.0 * nf + a) / den;
        let c2 = (2.0 * nf + a + 1.0) * a * a / den;
        let c3 = 2.0 * (nf + a) * nf * (2.0 * nf + a + 2.0) / den;
        let lin = x.scale(c1).add(&s.scale(c2));
        let next = lin.mul(&h[n]).add(&s2.mul(&h[n - 1]).scale(-c3));
        h.push(next);
    }
    h
}

/// An orthonormal basis of P_N (simplex) or Q_N (cube) on the reference cell.
#[derive(Debug)]
pub struct ModalBasis {
    kind: CellKind,
    dim: usize,
    max: usize,
    modes: Vec<Monomial>,
    /// Multiplies the raw recurrence values into orthonormal ones.
    scale: Vec<f64>,
    /// Per axis, entry (k, n) = (ψ_k, ∂_axis ψ_n).
    derivative: Vec<Mat<f64>>,
}

impl ModalBasis {
    fn build(kind: CellKind, dim: usize, max: usize) -> Self {
        let modes: Vec<Monomial> = match kind {
            CellKind::Simplex => Monomial::all_up_to(dim, max),
            CellKind::Cube => {
                let mut out = vec![Monomial::ONE];
                for axis in 0..dim {
                    out = out
                        .iter()
                        .flat_map(|m| {
                            (0..=max).map(move |e| {
                                let mut mm = *m;
                                mm.0[axis] = e as u8;
                                mm
                            })
                        })
                        .collect();
                }
                out
            }
        };
        let mut basis = ModalBasis { kind, dim, max, modes, scale: Vec::new(), derivative: Vec::new() };
        basis.scale = match kind {
            CellKind::Cube => {
                basis.modes.iter().map(|m| (0..dim).map(|a| ((2 * m.0[a] as usize + 1) as f64 / 2.0).sqrt()).product()).collect()
            }
            CellKind::Simplex => {
                let rule = QuadRule::reference(kind, dim, 2 * max);
                let mut norms = vec![0.0; basis.modes.len()];
                for (p, w) in rule.points.iter().zip(&rule.weights) {
                    for (k, v) in basis.raw(p).iter().enumerate() {
                        norms[k] += w * v.v * v.v;
                    }
                }
                norms.iter().map(|n| 1.0 / n.sqrt()).collect()
            }
        };
        let rule = QuadRule::reference(kind, dim, 2 * max);
        let n = basis.modes.len();
        let mut der = vec![Mat::<f64>::zeros(n, n); dim];
        for (p, w) in rule.points.iter().zip(&rule.weights) {
            let raw = basis.raw(p);
            for (axis, dm) in der.iter_mut().enumerate() {
                for k in 0..n {
                    let vk = w * raw[k].v * basis.scale[k];
                    if vk == 0.0 {
                        continue;
                    }
                    for j in 0..n {
                        dm[(k, j)] += vk * raw[j].g[axis] * basis.scale[j];
                    }
                }
            }
        }
        // Entries outside the structural pattern are quadrature roundoff.
        for (axis, dm) in der.iter_mut().enumerate() {
            for k in 0..n {
                for j in 0..n {
                    let (mk, mj) = (&basis.modes[k], &basis.modes[j]);
                    let allowed = match kind {
                        CellKind::Cube => mk.0[axis] < mj.0[axis] && (0..dim).all(|b| b == axis || mk.0[b] == mj.0[b]),
                        CellKind::Simplex => mk.degree() < mj.degree(),
                    };
                    if !allowed {
                        dm[(k, j)] = 0.0;
                    }
                }
            }
        }
        basis.derivative = der;
        basis
    }

    /// Cached basis of the given kind, dimension and degree bound.
    pub fn get(kind: CellKind, dim: usize, max: usize) -> Arc<ModalBasis> {
        type Cache = Mutex<HashMap<(CellKind, usize, usize), Arc<ModalBasis>>>;
        static CACHE: OnceLock<Cache> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        if let Some(b) = cache.lock().expect("cache lock").get(&(kind, dim, max)) {
            return b.clone();
        }
        let built = Arc::new(ModalBasis::build(kind, dim, max));
        cache.lock().expect("cache lock").entry((kind, dim, max)).or_insert(built).clone()
    }

    pub fn kind(&self) -> CellKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn max_degree(&self) -> usize {
        self.max
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> &[Monomial] {
        &self.modes
    }

    /// (ψ_k, ∂_axis ψ_n) as a matrix over (k, n).
    pub fn derivative(&self, axis: usize) -> &Mat<f64> {
        &self.derivative[axis]
    }

    fn generic<T: Ring>(&self, xi: &[T], one_minus: impl Fn(&T) -> T) -> Vec<T> {
        let d = self.dim;
        match self.kind {
            CellKind::Cube => {
                let tables: Vec<Vec<T>> = (0..d).map(|a| jacobi_homogeneous(0, self.max, &xi[a], &T::one())).collect();
                self.modes
                    .iter()
                    .map(|m| (0..d).fold(T::one(), |acc, a| acc.mul(&tables[a][m.0[a] as usize])))
                    .collect()
            }
            CellKind::Simplex => {
                // S_a = (3 − d + a − Σ_{k>a} ξ_k)/2 and X_a = (1 + ξ_a) − S_a.
                let mut tables: Vec<Vec<Vec<T>>> = Vec::with_capacity(d);
                for a in 0..d {
                    let mut sum = T::one().scale((3 + a) as f64 - d as f64);
                    for x in &xi[a + 1..d] {
                        sum = sum.add(&x.scale(-1.0));
                    }
                    let s = sum.scale(0.5);
                    let x = one_minus(&xi[a]).add(&s.scale(-1.0));
                    tables.push((0..=self.max).map(|m| jacobi_homogeneous(2 * m + a, self.max - m, &x, &s)).collect());
                }
                self.modes
                    .iter()
                    .map(|m| {
                        let mut acc = T::one();
                        let mut below = 0;
                        for (a, table) in tables.iter().enumerate() {
                            let n = m.0[a] as usize;
                            acc = acc.mul(&table[below][n]);
                            below += n;
                        }
                        acc
                    })
                    .collect()
            }
        }
    }

    fn raw(&self, p: &Point) -> Vec<Dual> {
        let xi: Vec<Dual> = (0..self.dim)
            .map(|a| {
                let mut g = [0.0; 3];
                g[a] = 1.0;
                Dual { v: p[a], g }
            })
            .collect();
        self.generic(&xi, |x| x.add(&Dual::one()))
    }

    /// Orthonormal mode values: entry (k, q) = ψ_k(points[q]).
    pub fn eval(&self, points: &[Point]) -> Mat<f64> {
        let mut out = Mat::<f64>::zeros(self.modes.len(), points.len());
        for (q, p) in points.iter().enumerate() {
            for (k, v) in self.raw(p).iter().enumerate() {
                out[(k, q)] = v.v * self.scale[k];
            }
        }
        out
    }

    /// Monomial expansions of the orthonormal modes.
    pub fn polynomials(&self) -> Vec<Polynomial<f64>> {
        let xi: Vec<Polynomial<f64>> = (0..self.dim)
            .map(|a| {
                let mut c = vec![0.0; self.dim];
                c[a] = 1.0;
                Polynomial::affine(0.0, &c)
            })
            .collect();
        self.generic(&xi, |x| Polynomial::add(x, &Polynomial::constant(1.0)))
            .iter()
            .zip(&self.scale)
            .map(|(p, s)| p.scale(*s))
            .collect()
    }
}
