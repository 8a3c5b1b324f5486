use faer::{Mat, MatRef};
use serde::Serialize;

use super::{assemble_default, solve_evp, ConformingSpace, OperatorPair, Spectrum, ZeroThreshold};
use crate::error::{Error, Result};
use crate::forms::{exterior_derivative, n_components, PolyForm};
use crate::interp::FormField;
use crate::linalg::{
    cholesky, frobenius, null_space, numerical_rank, orthonormal_complement, range_basis, singular_values, solve_lower,
    sym_eigen, symmetrize, DEFAULT_RANK_TOL,
};
use crate::quadrature::QuadRule;
use crate::spaces::LocalBasis;

/// Weighted values of a local basis (or its derivatives) at a cell rule,
/// rows scaled by √(w·|det|).
fn weighted_values(basis: &LocalBasis, on_d: bool, degree: usize) -> Option<(Mat<f64>, QuadRule)> {
    let s = &basis.spec;
    let rule = QuadRule::reference(s.cell_kind(), s.dim, degree);
    let mut v = if on_d { basis.eval_d(&rule.points)? } else { basis.eval(&rule.points) };
    let nc = n_components(s.dim, s.form_degree + usize::from(on_d));
    for (q, w) in rule.weights.iter().enumerate() {
        let f = (w * basis.jacobian()).sqrt();
        for c in 0..nc {
            for j in 0..v.ncols() {
                v[(q * nc + c, j)] *= f;
            }
        }
    }
    Some((v, rule))
}

fn block_apply(space: &ConformingSpace, blocks: &[Mat<f64>], x: MatRef<'_, f64>, rows: &[std::ops::Range<usize>]) -> Mat<f64> {
    let total: usize = rows.iter().map(|r| r.len()).sum();
    let mut out = Mat::<f64>::zeros(total, x.ncols());
    for (k, b) in blocks.iter().enumerate() {
        let src = space.cell_range(k);
        let prod = b * x.subrows(src.start, src.len());
        out.subrows_mut(rows[k].start, rows[k].len()).copy_from(&prod);
    }
    out
}

/// Matrix of the exterior derivative between conforming spaces: column j
/// holds the coefficients of d(lower basis form j) in the upper space.
pub fn discrete_gradient(lower: &ConformingSpace, upper: &ConformingSpace) -> Result<Mat<f64>> {
    if upper.spec().companion() != Some(*lower.spec()) || lower.mesh().n_cells() != upper.mesh().n_cells() {
        return Err(Error::IncompatiblePairing(format!("{} → {}", lower.spec(), upper.spec())));
    }
    let degree = 2 * lower.spec().max_poly_degree().max(upper.spec().max_poly_degree());
    let mut blocks = Vec::new();
    for (lb, ub) in lower.local_bases().iter().zip(upper.local_bases()) {
        let (dl, _) = weighted_values(lb, true, degree).expect("lower degree below dimension");
        let (vu, _) = weighted_values(ub, false, degree).expect("values");
        let g = vu.transpose() * &dl;
        let resid = &dl - &vu * &g;
        if frobenius(resid.as_ref()) > 1e-8 * (1.0 + frobenius(dl.as_ref())) {
            return Err(Error::IncompatiblePairing(format!(
                "d of {} leaves {} on cell {}",
                lower.spec(),
                upper.spec(),
                lb.cell
            )));
        }
        blocks.push(g);
    }
    let rows: Vec<_> = (0..upper.mesh().n_cells()).map(|k| upper.cell_range(k)).collect();
    let broken = block_apply(lower, &blocks, lower.embedding().as_ref(), &rows);
    Ok(upper.embedding().transpose() * broken)
}

/// M-orthonormal basis vectors and the Cholesky factor used to build them.
struct MetricFrame {
    l: Mat<f64>,
}

impl MetricFrame {
    fn new(mass: MatRef<'_, f64>) -> Result<Self> {
        Ok(MetricFrame { l: cholesky(mass).ok_or(Error::MassNotPositiveDefinite)? })
    }

    /// Coordinates y = Lᵀ x in which the M inner product is Euclidean.
    fn to_euclid(&self, x: MatRef<'_, f64>) -> Mat<f64> {
        self.l.transpose() * x
    }

    /// L⁻¹ S L⁻ᵀ.
    fn reduce(&self, s: MatRef<'_, f64>) -> Mat<f64> {
        let mut c = s.to_owned();
        solve_lower(self.l.as_ref(), &mut c);
        let mut ct = c.transpose().to_owned();
        solve_lower(self.l.as_ref(), &mut ct);
        symmetrize(&ct)
    }
}

/// Discrete closed forms versus discrete gradients and their M-orthogonal
/// complements Z_p and X_p.
#[derive(Clone, Debug, Serialize)]
pub struct KernelReport {
    pub n: usize,
    pub kernel_dim: usize,
    pub gradient_rank: usize,
    pub z_dim: usize,
    pub x_dim: usize,
    /// Sine of the largest principal angle between Z_p and X_p; 1 when the
    /// dimensions differ.
    pub max_angle_sine: f64,
    pub equal: bool,
}

/// Compare ker S with the range of the discrete gradient `grad` (N × N_{ℓ−1};
/// pass a zero-column matrix when ℓ = 0).
pub fn kernel_complement_diagnostics(ops: &OperatorPair, spectrum: &Spectrum, grad: MatRef<'_, f64>) -> Result<KernelReport> {
    let n = ops.dim();
    if n == 0 {
        return Ok(KernelReport { n, kernel_dim: 0, gradient_rank: 0, z_dim: 0, x_dim: 0, max_angle_sine: 0.0, equal: true });
    }
    let frame = MetricFrame::new(ops.mass.as_ref())?;
    let kernel = frame.to_euclid(spectrum.kernel_vectors().as_ref());
    let (grad_range, _) = if grad.ncols() == 0 {
        (Mat::zeros(n, 0), Vec::new())
    } else {
        range_basis(frame.to_euclid(grad).as_ref(), DEFAULT_RANK_TOL, 0.0)
    };
    let z = orthonormal_complement(kernel.as_ref(), DEFAULT_RANK_TOL);
    let x = orthonormal_complement(grad_range.as_ref(), DEFAULT_RANK_TOL);
    let max_angle_sine = if z.ncols() != x.ncols() {
        1.0
    } else if z.ncols() == 0 {
        0.0
    } else {
        let proj = &x - &z * (z.transpose() * &x);
        singular_values(proj.as_ref()).first().copied().unwrap_or(0.0)
    };
    Ok(KernelReport {
        n,
        kernel_dim: spectrum.kernel_dim,
        gradient_rank: grad_range.ncols(),
        z_dim: z.ncols(),
        x_dim: x.ncols(),
        max_angle_sine,
        equal: z.ncols() == x.ncols() && max_angle_sine < 1e-8,
    })
}

/// α_p = min ‖dv‖ over v ∈ Z_p with ‖v‖ = 1. Closed forms are found as the
/// numerical null space of the reduced stiffness by SVD, independently of
/// the eigensolver.
pub fn friedrichs_constant(ops: &OperatorPair, policy: ZeroThreshold) -> Result<f64> {
    let n = ops.dim();
    if n == 0 {
        return Err(Error::EmptySpace("Z_p is empty".into()));
    }
    let frame = MetricFrame::new(ops.mass.as_ref())?;
    let c = frame.reduce(ops.stiffness.as_ref());
    let sv = singular_values(c.as_ref());
    let tau = policy.tau(sv.first().copied().unwrap_or(0.0));
    let rel = if sv[0] > 0.0 { tau / sv[0] } else { 1.0 };
    let closed = null_space(c.as_ref(), rel);
    let z = orthonormal_complement(closed.as_ref(), DEFAULT_RANK_TOL);
    if z.ncols() == 0 {
        return Err(Error::EmptySpace("Z_p is empty".into()));
    }
    let restricted = symmetrize(&(z.transpose() * &c * &z));
    let (vals, _) = sym_eigen(restricted.as_ref())?;
    Ok(vals[0].max(0.0).sqrt())
}

/// Number of positive eigenvalues inside (a, b) per entry.
pub fn spurious_scan(spectra: &[(usize, &Spectrum)], a: f64, b: f64) -> Result<Vec<(usize, usize)>> {
    if !(a.is_finite() && b.is_finite() && 0.0 <= a && a < b) {
        return Err(Error::InvalidWindow { a, b });
    }
    Ok(spectra.iter().map(|(p, s)| (*p, s.positive().iter().filter(|&&v| v > a && v < b).count())).collect())
}

/// Per-cell values of a target field at a cell rule, weighted like
/// [`weighted_values`].
fn target_values(basis: &LocalBasis, rule: &QuadRule, u: &dyn FormField, on_d: bool) -> Vec<f64> {
    let s = &basis.spec;
    let nc = n_components(s.dim, s.form_degree + usize::from(on_d));
    let mut out = Vec::with_capacity(rule.len() * nc);
    for (xi, w) in rule.points.iter().zip(&rule.weights) {
        let x = basis.physical_point(xi);
        let v = if on_d { u.eval_d(&x) } else { u.eval(&x) };
        let f = (w * basis.jacobian()).sqrt();
        out.extend(v.iter().take(nc).map(|a| a * f));
    }
    out
}

/// Cellwise weighted data for least-squares fits against a target.
struct Fit {
    /// Σ_K Vᵀ t per cell, in broken coefficients.
    rhs: Vec<f64>,
    /// Per-cell (V, t) pairs for the final error evaluation.
    cells: Vec<Vec<(Mat<f64>, Vec<f64>)>>,
}

fn fit_data(space: &ConformingSpace, u: &dyn FormField, with_d: bool, degree: usize) -> Fit {
    let mut rhs = vec![0.0; space.broken_dim()];
    let mut cells = Vec::new();
    for (k, basis) in space.local_bases().iter().enumerate() {
        let mut parts = Vec::new();
        let flags: &[bool] = if with_d && basis.spec.form_degree < basis.spec.dim { &[false, true] } else { &[false] };
        for &on_d in flags {
            let (v, rule) = weighted_values(basis, on_d, degree).expect("values");
            let t = target_values(basis, &rule, u, on_d);
            for (j, r) in space.cell_range(k).enumerate() {
                rhs[r] += (0..v.nrows()).map(|i| v[(i, j)] * t[i]).sum::<f64>();
            }
            parts.push((v, t));
        }
        cells.push(parts);
    }
    Fit { rhs, cells }
}

fn fit_error(space: &ConformingSpace, fit: &Fit, broken: &[f64]) -> f64 {
    let mut sum = 0.0;
    for (k, parts) in fit.cells.iter().enumerate() {
        let c = &broken[space.cell_range(k)];
        for (v, t) in parts {
            for i in 0..v.nrows() {
                let e: f64 = (0..v.ncols()).map(|j| v[(i, j)] * c[j]).sum::<f64>() - t[i];
                sum += e * e;
            }
        }
    }
    sum.sqrt()
}

fn solve_spd(a: MatRef<'_, f64>, b: &[f64]) -> Result<Vec<f64>> {
    let l = cholesky(a).ok_or(Error::MassNotPositiveDefinite)?;
    let mut x = Mat::from_fn(b.len(), 1, |i, _| b[i]);
    solve_lower(l.as_ref(), &mut x);
    crate::linalg::solve_lower_transpose(l.as_ref(), &mut x);
    Ok((0..b.len()).map(|i| x[(i, 0)]).collect())
}

/// Best approximation error of `u` in the graph norm ‖v‖² + ‖dv‖² over the
/// conforming space.
pub fn cas_error(space: &ConformingSpace, ops: &OperatorPair, u: &dyn FormField, degree: usize) -> Result<f64> {
    let fit = fit_data(space, u, true, degree);
    if space.dim() == 0 {
        return Ok(fit_error(space, &fit, &vec![0.0; space.broken_dim()]));
    }
    let e = space.embedding();
    let b: Vec<f64> = (0..e.ncols()).map(|j| (0..e.nrows()).map(|i| e[(i, j)] * fit.rhs[i]).sum()).collect();
    let g = &ops.mass + &ops.stiffness;
    let c = solve_spd(g.as_ref(), &b)?;
    let broken = e * Mat::from_fn(c.len(), 1, |i, _| c[i]);
    Ok(fit_error(space, &fit, &(0..broken.nrows()).map(|i| broken[(i, 0)]).collect::<Vec<_>>()))
}

/// Best L² approximation error of a closed target onto the discrete closed
/// forms (the kernel of the stiffness).
pub fn cdk_error(space: &ConformingSpace, spectrum: &Spectrum, u: &PolyForm<f64>, degree: usize) -> Result<f64> {
    if u.degree() < u.dim() {
        let du = exterior_derivative(u)?;
        if du.max_abs_coefficient() > 1e-12 * (1.0 + u.max_abs_coefficient()) {
            return Err(Error::NotClosed);
        }
    }
    let field = crate::interp::PolyField::new(u.clone());
    let fit = fit_data(space, &field, false, degree);
    let k = spectrum.kernel_vectors();
    let e = space.embedding();
    // Kernel vectors are M-orthonormal, so the projection is a plain sum.
    let kb = e * &k;
    let coeffs: Vec<f64> = (0..kb.ncols()).map(|j| (0..kb.nrows()).map(|i| kb[(i, j)] * fit.rhs[i]).sum()).collect();
    let broken: Vec<f64> = (0..kb.nrows()).map(|i| (0..kb.ncols()).map(|j| kb[(i, j)] * coeffs[j]).sum()).collect();
    Ok(fit_error(space, &fit, &broken))
}

/// Matrix J with the coarse space's forms expressed in the fine space
/// (N_fine × N_coarse); fails when the coarse space is not contained.
pub fn nested_embedding(coarse: &ConformingSpace, fine: &ConformingSpace) -> Result<Mat<f64>> {
    if coarse.spec().family != fine.spec().family || coarse.spec().form_degree != fine.spec().form_degree {
        return Err(Error::IncompatiblePairing(format!("{} ⊄ {}", coarse.spec(), fine.spec())));
    }
    let degree = 2 * fine.spec().max_poly_degree();
    let mut blocks = Vec::new();
    for (cb, fb) in coarse.local_bases().iter().zip(fine.local_bases()) {
        let (vc, _) = weighted_values(cb, false, degree).expect("values");
        let (vf, _) = weighted_values(fb, false, degree).expect("values");
        let p = vf.transpose() * &vc;
        let resid = &vc - &vf * &p;
        if frobenius(resid.as_ref()) > 1e-8 * (1.0 + frobenius(vc.as_ref())) {
            return Err(Error::IncompatiblePairing(format!("{} ⊄ {} on cell {}", coarse.spec(), fine.spec(), cb.cell)));
        }
        blocks.push(p);
    }
    let rows: Vec<_> = (0..fine.mesh().n_cells()).map(|k| fine.cell_range(k)).collect();
    let broken = block_apply(coarse, &blocks, coarse.embedding().as_ref(), &rows);
    Ok(fine.embedding().transpose() * broken)
}

/// sup over v ∈ W_p with graph norm 1 of ‖A_ref v − A_p v‖ in the graph
/// norm, where A solves (du, dw) + (u, w) = (v, w) on the respective space.
pub fn chn_gap(coarse: &ConformingSpace, fine: &ConformingSpace) -> Result<f64> {
    let ops_c = assemble_default(coarse)?;
    let ops_f = assemble_default(fine)?;
    chn_gap_with(coarse, &ops_c, fine, &ops_f)
}

/// [`chn_gap`] with assembled operators.
pub fn chn_gap_with(coarse: &ConformingSpace, ops_c: &OperatorPair, fine: &ConformingSpace, ops_f: &OperatorPair) -> Result<f64> {
    let nc = coarse.dim();
    if nc == 0 {
        return Ok(0.0);
    }
    let j = nested_embedding(coarse, fine)?;
    let gc = &ops_c.mass + &ops_c.stiffness;
    let gf = &ops_f.mass + &ops_f.stiffness;
    let lc = cholesky(gc.as_ref()).ok_or(Error::MassNotPositiveDefinite)?;
    let lf = cholesky(gf.as_ref()).ok_or(Error::MassNotPositiveDefinite)?;
    let solve = |l: &Mat<f64>, rhs: Mat<f64>| {
        let mut x = rhs;
        solve_lower(l.as_ref(), &mut x);
        crate::linalg::solve_lower_transpose(l.as_ref(), &mut x);
        x
    };
    // T = G_f⁻¹ M_f J − J G_c⁻¹ M_c
    let a_f = solve(&lf, &ops_f.mass * &j);
    let a_c = &j * solve(&lc, ops_c.mass.clone());
    let t = a_f - a_c;
    let num = symmetrize(&(t.transpose() * &gf * &t));
    // Largest eigenvalue of (num, G_c) through the Cholesky factor of G_c.
    let mut c = num;
    solve_lower(lc.as_ref(), &mut c);
    let mut ct = c.transpose().to_owned();
    solve_lower(lc.as_ref(), &mut ct);
    let (vals, _) = sym_eigen(symmetrize(&ct).as_ref())?;
    Ok(vals.last().copied().unwrap_or(0.0).max(0.0).sqrt())
}

/// Convenience: build, assemble and solve in one go.
pub fn spectrum_of(space: &ConformingSpace) -> Result<(OperatorPair, Spectrum)> {
    let ops = assemble_default(space)?;
    let spectrum = solve_evp(&ops, ZeroThreshold::default())?;
    Ok((ops, spectrum))
}

/// Numerical rank of a matrix with the default relative threshold.
pub fn rank(a: MatRef<'_, f64>) -> usize {
    numerical_rank(a, DEFAULT_RANK_TOL)
}
