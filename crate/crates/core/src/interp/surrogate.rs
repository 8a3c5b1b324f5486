use serde::{Deserialize, Serialize};

use super::field::{FormField, PolyField};
use super::projector::{l2_error, Projector};
use crate::error::{Error, Result};
use crate::forms::{FormIndex, Point, PolyForm, Polynomial};
use crate::mesh::Mesh;
use crate::quadrature::QuadRule;
use crate::spaces::FamilySpec;

/// One line of an approximation table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocApproxRow {
    pub p: usize,
    pub epsilon: f64,
}

/// Taylor polynomial of degree `order` of x ↦ sin(k·x + phase).
fn sine_taylor(dim: usize, k: &[f64], phase: f64, order: usize) -> Polynomial<f64> {
    let t = Polynomial::affine(0.0, &k[..dim]);
    let mut power = Polynomial::constant(1.0);
    let mut out = Polynomial::zero();
    let mut factorial = 1.0;
    for n in 0..=order {
        if n > 0 {
            power = power.mul(&t);
            factorial *= n as f64;
        }
        let c = (phase + n as f64 * std::f64::consts::FRAC_PI_2).sin() / factorial;
        for (m, a) in power.terms() {
            out.add_term(*m, c * a);
        }
    }
    out
}

/// Polynomial surrogate of a smooth sinusoidal ℓ-form: component I is the
/// degree-`order` Taylor polynomial of sin(k_I·x + phase_I). `seed` selects
/// the wave vectors and phases deterministically.
pub fn sinusoid_surrogate(dim: usize, form_degree: usize, order: usize, seed: u64) -> PolyForm<f64> {
    let mut u = PolyForm::zero(dim, form_degree);
    for (c, idx) in FormIndex::all(dim, form_degree).into_iter().enumerate() {
        let s = (seed as f64) + 1.0 + c as f64;
        let k: Vec<f64> = (0..3).map(|i| 1.3 * ((s * 0.7 + i as f64 * 1.9).sin() + 1.2)).collect();
        let phase = 0.4 + 0.9 * s;
        let poly = sine_taylor(dim, &k, phase, order);
        for (m, a) in poly.terms() {
            u.add_term(idx, *m, *a);
        }
    }
    u
}

fn cell_rule(mesh: &Mesh, cell: usize, degree: usize) -> (Vec<Point>, Vec<f64>) {
    let d = mesh.dim();
    let map = mesh.cell_map(cell);
    let jac = map.det().abs();
    let rule = QuadRule::reference(mesh.kind(), d, degree);
    let points = rule
        .points
        .iter()
        .map(|xi| {
            let x = map.apply(&xi[..d]);
            let mut p = [0.0; 3];
            p[..d].copy_from_slice(&x);
            p
        })
        .collect();
    (points, rule.weights.iter().map(|w| w * jac).collect())
}

/// Surrogate S-norm on a cell: L² norms of φ, dφ and every first partial
/// derivative of every coefficient.
pub fn s_norm(mesh: &Mesh, cell: usize, phi: &PolyForm<f64>) -> f64 {
    let d = phi.dim();
    let field = PolyField::new(phi.clone());
    let partials: Vec<Polynomial<f64>> = FormIndex::all(d, phi.degree())
        .into_iter()
        .flat_map(|idx| {
            let comp = phi.component(idx);
            (0..d).map(move |i| comp.derivative(i))
        })
        .collect();
    let (points, weights) = cell_rule(mesh, cell, 2 * phi.poly_degree() + 2);
    let mut sum = 0.0;
    for (x, w) in points.iter().zip(&weights) {
        let v: f64 = field.eval(x).iter().chain(&field.eval_d(x)).map(|a| a * a).sum();
        let g: f64 = partials.iter().map(|p| p.eval(&x[..d]).powi(2)).sum();
        sum += w * (v + g);
    }
    sum.sqrt()
}

/// Table of ε(p) = max over samples of ‖d(φ − Πφ)‖_{L²(K)} / ‖φ‖_S, where Π
/// projects onto the family of `spec` at degree p.
pub fn measure_locapprox(
    mesh: &Mesh,
    cell: usize,
    spec: &FamilySpec,
    ps: &[usize],
    samples: &[PolyForm<f64>],
) -> Result<Vec<LocApproxRow>> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    for s in samples {
        if s.dim() != spec.dim || s.degree() != spec.form_degree {
            return Err(Error::DimensionMismatch(format!("sample {}-form on R^{} for {spec}", s.degree(), s.dim())));
        }
    }
    if spec.form_degree >= spec.dim {
        return Err(Error::InvalidSpec(format!("{spec} has no exterior derivative to measure")));
    }
    let fields: Vec<PolyField> = samples.iter().cloned().map(PolyField::new).collect();
    let norms: Vec<f64> = samples.iter().map(|s| s_norm(mesh, cell, s)).collect();
    let mut table = Vec::with_capacity(ps.len());
    for &p in ps {
        let sp = FamilySpec::new(spec.family, p, spec.form_degree, spec.dim)?;
        let proj = Projector::new(mesh, cell, &sp)?;
        let mut eps: f64 = 0.0;
        for ((s, f), n) in samples.iter().zip(&fields).zip(&norms) {
            if *n == 0.0 {
                continue;
            }
            let coeffs = proj.project(f)?;
            let degree = 2 * s.poly_degree().max(sp.max_poly_degree()) + 2;
            let err = l2_error(proj.basis(), &coeffs, Some(f), true, degree);
            eps = eps.max(err / n);
        }
        table.push(LocApproxRow { p, epsilon: eps });
    }
    Ok(table)
}
