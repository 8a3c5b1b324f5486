use pforms::assembly::{assemble, friedrichs_constant, reference_eigenvalues, solve_evp, spurious_scan, ConformingSpace, Spectrum, ZeroThreshold};
use pforms::mesh::MeshDescriptor;
use pforms::spaces::FamilySpec;
use serde::Serialize;

use crate::config::{is_unit_box, Common, Window};
use crate::output::{emit, emit_json, num, Table};
use crate::{breach, CliError, DEFAULT_P};

#[derive(Serialize)]
struct Run {
    p: usize,
    spec: FamilySpec,
    n: usize,
    kernel_dim: usize,
    eigenvalues: Vec<f64>,
    max_residual: f64,
    alpha: f64,
    spurious: usize,
    reference: Vec<f64>,
    rel_gaps: Vec<f64>,
}

#[derive(Serialize)]
struct Report {
    mesh: MeshDescriptor,
    materials: Option<String>,
    zero_threshold: f64,
    window: [f64; 2],
    runs: Vec<Run>,
}

pub fn run(common: &Common, count: usize, window: Window) -> Result<(), CliError> {
    let mesh = common.load_mesh()?;
    let specs = common.sweep(&mesh, DEFAULT_P)?;
    let materials = common.materials(&mesh)?;
    let policy = ZeroThreshold::default();
    let reference = if is_unit_box(&mesh) { reference_eigenvalues(mesh.dim(), specs[0].form_degree, count) } else { Vec::new() };

    let mut spectra: Vec<(FamilySpec, usize, Spectrum, f64)> = Vec::new();
    for spec in &specs {
        let space = ConformingSpace::build(&mesh, spec)?;
        let ops = assemble(&space, &materials)?;
        let spectrum = solve_evp(&ops, policy)?;
        let alpha = if space.dim() > spectrum.kernel_dim { friedrichs_constant(&ops, policy)? } else { f64::NAN };
        eprintln!("p={} N={} kernel={}", spec.degree, space.dim(), spectrum.kernel_dim);
        spectra.push((*spec, space.dim(), spectrum, alpha));
    }

    // The window is anchored at the exact first eigenvalue when it is known,
    // otherwise at the finest discrete one.
    let anchor = reference.first().copied().or_else(|| spectra.last().and_then(|s| s.2.positive().first().copied()));
    let scans = match anchor {
        Some(l1) => {
            let list: Vec<(usize, &Spectrum)> = spectra.iter().map(|(s, _, sp, _)| (s.degree, sp)).collect();
            spurious_scan(&list, window.a * l1, window.b * l1)?
        }
        None => spectra.iter().map(|(s, ..)| (s.degree, 0)).collect(),
    };

    let mut table = Table::new("eigs", &["p", "N", "kernel_dim", "k", "lambda_k", "ref_lambda_k", "rel_gap"]);
    let mut runs = Vec::new();
    let mut failures = Vec::new();
    let tol = common.tol.unwrap_or(1e-6);
    let last = specs.last().map(|s| s.degree);
    for ((spec, n, spectrum, alpha), (_, spurious)) in spectra.iter().zip(&scans) {
        let pos = spectrum.positive();
        let mut gaps = Vec::new();
        for (k, &lambda) in pos.iter().take(count).enumerate() {
            let r = reference.get(k).copied();
            let gap = r.map(|r| (lambda - r).abs() / r);
            table.push(vec![
                spec.degree.to_string(),
                n.to_string(),
                spectrum.kernel_dim.to_string(),
                (k + 1).to_string(),
                num(lambda),
                r.map(num).unwrap_or_default(),
                gap.map(num).unwrap_or_default(),
            ]);
            if let Some(g) = gap {
                gaps.push(g);
                if Some(spec.degree) == last && g > tol {
                    failures.push(format!("p={} k={}: rel_gap {g:e} > {tol:e}", spec.degree, k + 1));
                }
            }
        }
        if *spurious > 0 {
            failures.push(format!("p={}: {spurious} eigenvalue(s) inside the spurious window", spec.degree));
        }
        if let Some(&l1) = pos.first() {
            if (alpha * alpha - l1).abs() > 1e-8 * l1 {
                failures.push(format!("p={}: alpha^2 = {} differs from lambda_1 = {l1}", spec.degree, alpha * alpha));
            }
        }
        runs.push(Run {
            p: spec.degree,
            spec: *spec,
            n: *n,
            kernel_dim: spectrum.kernel_dim,
            eigenvalues: pos.to_vec(),
            max_residual: spectrum.residuals.iter().fold(0.0, |m: f64, r| m.max(*r)),
            alpha: *alpha,
            spurious: *spurious,
            reference: reference.clone(),
            rel_gaps: gaps,
        });
    }
    emit(common, &table)?;
    let report = Report {
        mesh: mesh.descriptor(),
        materials: common.materials.as_ref().map(|p| p.display().to_string()),
        zero_threshold: policy.rel,
        window: [window.a, window.b],
        runs,
    };
    emit_json(common, "eigs", &report)?;
    breach(common, &failures)
}
