use clap::{Args, ValueEnum};
use pforms::assembly::{discrete_gradient, kernel_complement_diagnostics, spectrum_of, ConformingSpace};
use pforms::forms::{check_homotopy, random_form, BumpWeight, Lifting};
use pforms::interp::{check_commute, s_norm, PolyField};
use pforms::mesh::{builtin_mesh, CellKind, Mesh};
use pforms::scalar::binomial;
use pforms::spaces::{check_koszul_invariance, check_poincare_preservation, dimension_certificate, exact_cell_map, Family, FamilySpec};
use pforms::{Rational, Scalar};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{Common, PRange};
use crate::output::{emit, num, Table};
use crate::CliError;

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Which {
    Homotopy,
    Preserve,
    Commute,
    Dims,
    Sequence,
}

#[derive(Args, Clone, Debug)]
pub struct Extra {
    /// Dimension; both 2 and 3 when absent.
    #[arg(long)]
    pub d: Option<usize>,
    /// Polynomial degree of random inputs.
    #[arg(long)]
    pub degree: Option<usize>,
    /// Random inputs per configuration.
    #[arg(long)]
    pub trials: Option<usize>,
}

impl Extra {
    fn dims(&self) -> Result<Vec<usize>, CliError> {
        match self.d {
            Some(d) if (1..=3).contains(&d) => Ok(vec![d]),
            Some(d) => Err(CliError::Config(format!("dimension {d} is not supported"))),
            None => Ok(vec![2, 3]),
        }
    }
}

pub fn run(which: Which, common: &Common, extra: &Extra) -> Result<(), CliError> {
    let failures = match which {
        Which::Homotopy => homotopy(common, extra)?,
        Which::Preserve => preserve(common, extra)?,
        Which::Commute => commute(common, extra)?,
        Which::Dims => dims(common, extra)?,
        Which::Sequence => sequence(common)?,
    };
    if failures.is_empty() {
        eprintln!("check passed");
        Ok(())
    } else {
        for f in &failures {
            eprintln!("COUNTEREXAMPLE {f}");
        }
        Err(CliError::Assertion(format!("{} counterexample(s)", failures.len())))
    }
}

/// Per-configuration seed derived from the run seed.
fn mix(seed: u64, parts: &[usize]) -> u64 {
    parts.iter().fold(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15), |h, &p| (h ^ p as u64).wrapping_mul(0x100_0000_01B3))
}

fn small_rational(rng: &mut ChaCha8Rng) -> Rational {
    Rational::from_ratio(rng.random_range(-6..=6), rng.random_range(1..=5))
}

fn homotopy(common: &Common, extra: &Extra) -> Result<Vec<String>, CliError> {
    let degree = extra.degree.unwrap_or(6);
    let trials = extra.trials.unwrap_or(200);
    let mut table = Table::new("check_homotopy", &["d", "l", "lifting", "trials", "failures"]);
    let mut failures = Vec::new();
    for d in extra.dims()? {
        let mut rng = ChaCha8Rng::seed_from_u64(mix(common.seed, &[d]));
        let point: Vec<Rational> = (0..d).map(|_| small_rational(&mut rng)).collect();
        let center: Vec<Rational> = (0..d).map(|_| small_rational(&mut rng)).collect();
        let widths = vec![Rational::from_ratio(1, 4); d];
        let liftings = [
            ("point", Lifting::Point(point)),
            ("regularized", Lifting::Regularized(BumpWeight::new(center, widths, 2)?)),
        ];
        for l in 0..=d {
            for (name, lifting) in &liftings {
                let mut bad = 0;
                for t in 0..trials {
                    let u = random_form::<Rational>(d, l, degree, mix(common.seed, &[d, l, t]));
                    let res = check_homotopy(&u, lifting);
                    if !res.is_zero() {
                        bad += 1;
                        failures.push(format!("homotopy d={d} l={l} {name}: u = {u}; residual = {res}"));
                    }
                }
                table.push(vec![d.to_string(), l.to_string(), name.to_string(), trials.to_string(), bad.to_string()]);
            }
        }
    }
    emit(common, &table)?;
    Ok(failures)
}

/// Mesh used for single-cell checks: the configured one when it matches,
/// otherwise the unrefined built-in of the right shape.
fn cell_mesh(common: &Common, kind: CellKind, d: usize) -> Result<Mesh, CliError> {
    if let Ok(m) = common.load_mesh() {
        if m.kind() == kind && m.dim() == d {
            return Ok(m);
        }
    }
    let name = match (kind, d) {
        (CellKind::Simplex, 2) => "square-tri",
        (CellKind::Simplex, 3) => "cube-tet",
        (CellKind::Cube, 2) => "square-quad",
        (CellKind::Cube, 3) => "cube-hex",
        _ => return Err(CliError::Config(format!("no built-in {} mesh in dimension {d}", kind.name()))),
    };
    Ok(builtin_mesh(name, 0)?)
}

fn all_families(common: &Common) -> Result<Vec<Family>, CliError> {
    match &common.family {
        Some(f) => Ok(vec![f.parse()?]),
        None => Ok(vec![Family::First, Family::Second, Family::Tensor]),
    }
}

fn preserve(common: &Common, extra: &Extra) -> Result<Vec<String>, CliError> {
    let ps = common.p_range(PRange { lo: 1, hi: 4 });
    let mut table = Table::new("check_preserve", &["family", "d", "l", "p", "lifted", "dilation_translation", "koszul_d"]);
    let mut failures = Vec::new();
    for family in all_families(common)? {
        for d in extra.dims()? {
            let mesh = cell_mesh(common, family.cell_kind(), d)?;
            let k = mesh.n_cells() - 1;
            let cell = exact_cell_map(&mesh, k);
            let w = mesh.star_center_box(k)?.exact_weight()?;
            let ls: Vec<usize> = match common.l {
                Some(l) => vec![l],
                None => (0..=d).collect(),
            };
            for &l in &ls {
                for p in ps.iter() {
                    let spec = FamilySpec::new(family, p, l, d)?;
                    let lifted = if l >= 1 && l < d {
                        let c = check_poincare_preservation(&spec, &cell, &w)?;
                        if !c.holds {
                            failures.push(format!("preserve {spec}: {}", c.witness.clone().unwrap_or_default()));
                        }
                        c.holds.to_string()
                    } else {
                        "-".into()
                    };
                    let inv = check_koszul_invariance(&spec, &cell, mix(common.seed, &[d, l, p]));
                    if !inv.dilation_translation.holds {
                        failures.push(format!("invariance {spec}: {}", inv.dilation_translation.witness.clone().unwrap_or_default()));
                    }
                    // Only the first family is closed under x⌟d.
                    if family == Family::First && !inv.koszul_d.holds {
                        failures.push(format!("koszul {spec}: {}", inv.koszul_d.witness.clone().unwrap_or_default()));
                    }
                    table.push(vec![
                        family.to_string(),
                        d.to_string(),
                        l.to_string(),
                        p.to_string(),
                        lifted,
                        inv.dilation_translation.holds.to_string(),
                        inv.koszul_d.holds.to_string(),
                    ]);
                }
            }
        }
    }
    emit(common, &table)?;
    Ok(failures)
}

fn commute(common: &Common, extra: &Extra) -> Result<Vec<String>, CliError> {
    let mesh = common.load_mesh()?;
    let d = mesh.dim();
    let ps = common.p_range(PRange { lo: 1, hi: 4 });
    let trials = extra.trials.unwrap_or(20);
    let tol = common.tol.unwrap_or(1e-10);
    let k = mesh.n_cells() - 1;
    let ls: Vec<usize> = match common.l {
        Some(l) if (1..=d).contains(&l) => vec![l],
        Some(l) => return Err(CliError::Config(format!("commute needs 1 <= l <= {d}, got {l}"))),
        None => (1..d).collect(),
    };
    let mut table = Table::new("check_commute", &["family", "l", "p", "trials", "max_residual", "max_relative"]);
    let mut failures = Vec::new();
    for family in common.families(mesh.kind())? {
        for &l in &ls {
            for p in ps.iter() {
                let spec = FamilySpec::new(family, p, l, d)?;
                let degree = extra.degree.unwrap_or(p + 2);
                let (mut worst, mut worst_rel) = (0.0f64, 0.0f64);
                for t in 0..trials {
                    let u = random_form::<f64>(d, l - 1, degree, mix(common.seed, &[l, p, t]));
                    let r = check_commute(&mesh, k, &spec, &PolyField::new(u.clone()))?;
                    let rel = r / (1.0 + s_norm(&mesh, k, &u));
                    worst = worst.max(r);
                    worst_rel = worst_rel.max(rel);
                    if rel >= tol {
                        failures.push(format!("commute {spec} on cell {k}: residual {r:e} (relative {rel:e}) for u = {u}"));
                    }
                }
                table.push(vec![family.to_string(), l.to_string(), p.to_string(), trials.to_string(), num(worst), num(worst_rel)]);
            }
        }
    }
    emit(common, &table)?;
    Ok(failures)
}

/// Closed-form dimension counts, independent of the generators.
pub fn dimension_oracle(spec: &FamilySpec) -> usize {
    let (p, l, d) = (spec.degree, spec.form_degree, spec.dim);
    let b = |n: usize, k: usize| binomial(n, k) as usize;
    match spec.family {
        Family::First => b(p + l - 1, l) * b(p + d, d - l),
        Family::Second => b(p + d, p + l) * b(p + l, l),
        Family::Tensor => b(d, l) * p.pow(l as u32) * (p + 1).pow((d - l) as u32),
    }
}

fn dims(common: &Common, extra: &Extra) -> Result<Vec<String>, CliError> {
    let ps = common.p_range(PRange { lo: 1, hi: 4 });
    let mut table = Table::new("check_dims", &["family", "d", "l", "p", "generators", "rank", "oracle"]);
    let mut failures = Vec::new();
    for family in all_families(common)? {
        for d in extra.dims()? {
            let ls: Vec<usize> = match common.l {
                Some(l) => vec![l],
                None => (0..=d).collect(),
            };
            for &l in &ls {
                for p in ps.iter() {
                    let spec = FamilySpec::new(family, p, l, d)?;
                    let cert = dimension_certificate(&spec);
                    let oracle = dimension_oracle(&spec);
                    eprintln!("{spec}: rank {} of {} generators, oracle {oracle}", cert.rank, cert.generators);
                    if cert.rank != oracle {
                        failures.push(format!("dims {spec}: exact rank {} but oracle {oracle}; independent generators {:?}", cert.rank, cert.independent));
                    }
                    table.push(vec![
                        family.to_string(),
                        d.to_string(),
                        l.to_string(),
                        p.to_string(),
                        cert.generators.to_string(),
                        cert.rank.to_string(),
                        oracle.to_string(),
                    ]);
                }
            }
        }
    }
    emit(common, &table)?;
    Ok(failures)
}

fn sequence(common: &Common) -> Result<Vec<String>, CliError> {
    let mesh = common.load_mesh()?;
    let d = mesh.dim();
    let ps = common.p_range(PRange { lo: 1, hi: 3 });
    let ls: Vec<usize> = match common.l {
        Some(l) if (1..=d).contains(&l) => vec![l],
        Some(l) => return Err(CliError::Config(format!("sequence needs 1 <= l <= {d}, got {l}"))),
        None => (1..=d).collect(),
    };
    let mut table = Table::new("check_sequence", &["family", "l", "p", "N", "kernel_dim", "gradient_rank"]);
    let mut failures = Vec::new();
    for family in common.families(mesh.kind())? {
        for &l in &ls {
            for p in ps.iter() {
                let spec = FamilySpec::new(family, p, l, d)?;
                let lower_spec = spec.companion().expect("l >= 1");
                let space = ConformingSpace::build(&mesh, &spec)?;
                let lower = ConformingSpace::build(&mesh, &lower_spec)?;
                let grad = discrete_gradient(&lower, &space)?;
                let (ops, spectrum) = spectrum_of(&space)?;
                let r = kernel_complement_diagnostics(&ops, &spectrum, grad.as_ref())?;
                // Zero-trace top-degree forms keep the constants.
                let expected = r.gradient_rank + usize::from(l == d);
                if r.kernel_dim != expected {
                    failures.push(format!("sequence {spec} on {}: kernel {} but expected {expected} ({r:?})", mesh.name(), r.kernel_dim));
                }
                table.push(vec![
                    family.to_string(),
                    l.to_string(),
                    p.to_string(),
                    r.n.to_string(),
                    r.kernel_dim.to_string(),
                    r.gradient_rank.to_string(),
                ]);
            }
        }
    }
    emit(common, &table)?;
    Ok(failures)
}
