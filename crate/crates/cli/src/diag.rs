use clap::{Args, ValueEnum};
use pforms::assembly::{
    assemble, assemble_default, cas_error, cdk_error, chn_gap_with, friedrichs_constant, reference_eigenvalues, solve_evp,
    spurious_scan, ConformingSpace, Spectrum, ZeroThreshold,
};
use pforms::forms::{exterior_derivative, Monomial, PolyForm, Polynomial};
use pforms::interp::{measure_locapprox, sinusoid_surrogate, FormField, PolyField};
use pforms::mesh::Mesh;
use pforms::spaces::FamilySpec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{is_unit_box, Common, PRange, Window};
use crate::output::{emit, num, Table};
use crate::{breach, CliError};

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Which {
    Friedrichs,
    Spurious,
    Cas,
    Cdk,
    Chn,
    Locapprox,
}

#[derive(Args, Clone, Debug)]
pub struct Extra {
    /// Spurious window relative to the first eigenvalue.
    #[arg(long, default_value = "1e-6,0.9")]
    pub window: Window,
    /// Order of the smooth surrogate targets.
    #[arg(long)]
    pub degree: Option<usize>,
    /// Number of samples for locapprox.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Reference degree for chn.
    #[arg(long, default_value_t = 8)]
    pub p_ref: usize,
    /// Use a member of the degree-q space as the cas target.
    #[arg(long)]
    pub inside: Option<usize>,
}

pub fn run(which: Which, common: &Common, extra: &Extra) -> Result<(), CliError> {
    let mesh = common.load_mesh()?;
    let default_p = match which {
        Which::Chn => PRange { lo: 1, hi: 5 },
        _ => PRange { lo: 1, hi: 4 },
    };
    let specs = common.sweep(&mesh, default_p)?;
    let name = format!("diag_{}", format!("{which:?}").to_lowercase());
    let mut table = Table::new(name, &["p", "value"]);
    let values = match which {
        Which::Friedrichs => friedrichs(common, &mesh, &specs)?,
        Which::Spurious => spurious(&mesh, &specs, common, extra)?,
        Which::Cas => cas(&mesh, &specs, common, extra)?,
        Which::Cdk => cdk(&mesh, &specs, common, extra)?,
        Which::Chn => chn(&mesh, &specs, extra)?,
        Which::Locapprox => locapprox(&mesh, &specs, common, extra)?,
    };
    for (p, v) in &values {
        table.push(vec![p.to_string(), num(*v)]);
    }
    emit(common, &table)?;
    let failures = judge(which, &values, common, extra);
    breach(common, &failures)
}

/// Tolerance breaches for each diagnostic's expected behaviour.
fn judge(which: Which, values: &[(usize, f64)], common: &Common, extra: &Extra) -> Vec<String> {
    let tol = common.tol.unwrap_or(1e-10);
    let mut out = Vec::new();
    match which {
        Which::Spurious => {
            for (p, v) in values {
                if *v != 0.0 {
                    out.push(format!("p={p}: {v} eigenvalue(s) in the window"));
                }
            }
        }
        Which::Friedrichs => {
            if let Some(&(_, last)) = values.last() {
                for (p, v) in values {
                    if *v < 0.9 * last {
                        out.push(format!("p={p}: alpha {v} below 0.9 of the final value {last}"));
                    }
                }
            }
        }
        Which::Cas if extra.inside.is_some() => {
            let q = extra.inside.unwrap_or(0);
            for (p, v) in values {
                if *p >= q && *v > tol {
                    out.push(format!("p={p}: error {v:e} for a target inside the p={q} space"));
                }
            }
        }
        _ => {
            for w in values.windows(2) {
                if w[1].1 >= w[0].1 {
                    out.push(format!("p={}: value {:e} does not decrease from {:e}", w[1].0, w[1].1, w[0].1));
                }
            }
        }
    }
    out
}

fn friedrichs(common: &Common, mesh: &Mesh, specs: &[FamilySpec]) -> Result<Vec<(usize, f64)>, CliError> {
    let materials = common.materials(mesh)?;
    let mut out = Vec::new();
    for spec in specs {
        let space = ConformingSpace::build(mesh, spec)?;
        let ops = assemble(&space, &materials)?;
        let alpha = friedrichs_constant(&ops, ZeroThreshold::default())?;
        eprintln!("p={} N={} alpha={alpha}", spec.degree, space.dim());
        out.push((spec.degree, alpha));
    }
    Ok(out)
}

fn spurious(mesh: &Mesh, specs: &[FamilySpec], common: &Common, extra: &Extra) -> Result<Vec<(usize, f64)>, CliError> {
    let materials = common.materials(mesh)?;
    let mut spectra: Vec<(usize, Spectrum)> = Vec::new();
    for spec in specs {
        let space = ConformingSpace::build(mesh, spec)?;
        spectra.push((spec.degree, solve_evp(&assemble(&space, &materials)?, ZeroThreshold::default())?));
    }
    let exact = if is_unit_box(mesh) && common.materials.is_none() {
        reference_eigenvalues(mesh.dim(), specs[0].form_degree, 1).first().copied()
    } else {
        None
    };
    let anchor = exact.or_else(|| spectra.last().and_then(|(_, s)| s.positive().first().copied()));
    let Some(l1) = anchor else {
        return Ok(spectra.iter().map(|(p, _)| (*p, 0.0)).collect());
    };
    let list: Vec<(usize, &Spectrum)> = spectra.iter().map(|(p, s)| (*p, s)).collect();
    let counts = spurious_scan(&list, extra.window.a * l1, extra.window.b * l1)?;
    Ok(counts.into_iter().map(|(p, c)| (p, c as f64)).collect())
}

/// Π (x_i − lo_i)(hi_i − x_i) over the bounding box of the mesh.
fn box_bubble(mesh: &Mesh) -> Polynomial<f64> {
    let d = mesh.dim();
    let mut b = Polynomial::constant(1.0);
    for i in 0..d {
        let lo = mesh.vertices().iter().map(|v| v[i]).fold(f64::INFINITY, f64::min);
        let hi = mesh.vertices().iter().map(|v| v[i]).fold(f64::NEG_INFINITY, f64::max);
        let mut f = Polynomial::zero();
        let mut sq = [0u8; 3];
        sq[i] = 2;
        f.add_term(Monomial::ONE, -lo * hi);
        f.add_term(Monomial::axis(i), lo + hi);
        f.add_term(Monomial(sq), -1.0);
        b = b.mul(&f);
    }
    b
}

fn surrogate(mesh: &Mesh, form_degree: usize, extra: &Extra, seed: u64) -> PolyForm<f64> {
    sinusoid_surrogate(mesh.dim(), form_degree, extra.degree.unwrap_or(8), seed).mul_polynomial(&box_bubble(mesh))
}

fn quad_degree(spec: &FamilySpec, target: usize) -> usize {
    2 * spec.max_poly_degree().max(target) + 2
}

fn cas(mesh: &Mesh, specs: &[FamilySpec], common: &Common, extra: &Extra) -> Result<Vec<(usize, f64)>, CliError> {
    let materials_free = |space: &ConformingSpace| assemble_default(space);
    let inside_space;
    let discrete;
    let poly;
    let (target, target_degree): (&dyn FormField, usize) = match extra.inside {
        Some(q) => {
            let spec = FamilySpec::new(specs[0].family, q, specs[0].form_degree, mesh.dim())?;
            inside_space = ConformingSpace::build(mesh, &spec)?;
            let mut rng = ChaCha8Rng::seed_from_u64(common.seed);
            let coeffs: Vec<f64> = (0..inside_space.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
            discrete = inside_space.field(&coeffs);
            (&discrete, spec.max_poly_degree())
        }
        None => {
            let u = surrogate(mesh, specs[0].form_degree, extra, common.seed);
            let deg = u.poly_degree();
            poly = PolyField::new(u);
            (&poly, deg)
        }
    };
    let mut out = Vec::new();
    for spec in specs {
        let space = ConformingSpace::build(mesh, spec)?;
        let ops = materials_free(&space)?;
        out.push((spec.degree, cas_error(&space, &ops, target, quad_degree(spec, target_degree))?));
    }
    Ok(out)
}

fn cdk(mesh: &Mesh, specs: &[FamilySpec], common: &Common, extra: &Extra) -> Result<Vec<(usize, f64)>, CliError> {
    let l = specs[0].form_degree;
    if l == 0 {
        return Err(CliError::Config("cdk needs l >= 1: zero-trace closed 0-forms vanish".into()));
    }
    let phi = surrogate(mesh, l - 1, extra, common.seed);
    let z = exterior_derivative(&phi)?;
    let mut out = Vec::new();
    for spec in specs {
        let space = ConformingSpace::build(mesh, spec)?;
        let spectrum = solve_evp(&assemble_default(&space)?, ZeroThreshold::default())?;
        out.push((spec.degree, cdk_error(&space, &spectrum, &z, quad_degree(spec, z.poly_degree()))?));
    }
    Ok(out)
}

fn chn(mesh: &Mesh, specs: &[FamilySpec], extra: &Extra) -> Result<Vec<(usize, f64)>, CliError> {
    let s0 = specs[0];
    let fine = ConformingSpace::build(mesh, &FamilySpec::new(s0.family, extra.p_ref, s0.form_degree, s0.dim)?)?;
    let ops_f = assemble_default(&fine)?;
    let mut out = Vec::new();
    for spec in specs {
        if spec.degree > extra.p_ref {
            return Err(CliError::Config(format!("p = {} exceeds the reference degree {}", spec.degree, extra.p_ref)));
        }
        let coarse = ConformingSpace::build(mesh, spec)?;
        let ops_c = assemble_default(&coarse)?;
        out.push((spec.degree, chn_gap_with(&coarse, &ops_c, &fine, &ops_f)?));
    }
    Ok(out)
}

fn locapprox(mesh: &Mesh, specs: &[FamilySpec], common: &Common, extra: &Extra) -> Result<Vec<(usize, f64)>, CliError> {
    let s0 = specs[0];
    let trials = extra.trials.unwrap_or(5);
    let order = extra.degree.unwrap_or(12);
    let samples: Vec<PolyForm<f64>> =
        (0..trials as u64).map(|t| sinusoid_surrogate(s0.dim, s0.form_degree, order, common.seed.wrapping_add(t))).collect();
    let ps: Vec<usize> = specs.iter().map(|s| s.degree).collect();
    let rows = measure_locapprox(mesh, mesh.n_cells() - 1, &s0, &ps, &samples)?;
    Ok(rows.into_iter().map(|r| (r.p, r.epsilon)).collect())
}
