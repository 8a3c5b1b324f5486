use faer::Mat;
use pforms::assembly::*;
use pforms::forms::{exterior_derivative, FormIndex, Monomial, PolyForm, Polynomial};
use pforms::interp::{sinusoid_surrogate, PolyField};
use pforms::mesh::{builtin_mesh, Mesh, BUILTIN_NAMES};
use pforms::spaces::{Family, FamilySpec};

fn spec(f: Family, p: usize, l: usize, d: usize) -> FamilySpec {
    FamilySpec::new(f, p, l, d).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn pi2() -> f64 {
    std::f64::consts::PI.powi(2)
}

#[test]
fn lowest_order_dimensions() {
    let m0 = builtin_mesh("square-tri", 0).unwrap();
    assert_eq!(ConformingSpace::build(&m0, &spec(Family::First, 1, 1, 2)).unwrap().dim(), 1);
    let m1 = builtin_mesh("square-tri", 1).unwrap();
    let edges = m1.interior_count(1);
    assert_eq!(ConformingSpace::build(&m1, &spec(Family::First, 1, 1, 2)).unwrap().dim(), edges);
    for name in ["square-tri", "lshape-tri", "cube-tet"] {
        let m = builtin_mesh(name, 1).unwrap();
        let s = spec(Family::Second, 1, 0, m.dim());
        assert_eq!(ConformingSpace::build(&m, &s).unwrap().dim(), m.interior_count(0), "{name}");
    }
}

#[test]
fn empty_space_is_reported_not_fatal() {
    let m = builtin_mesh("square-tri", 0).unwrap();
    let space = ConformingSpace::build(&m, &spec(Family::Second, 1, 0, 2)).unwrap();
    assert_eq!(space.dim(), 0);
    let (_, s) = spectrum_of(&space).unwrap();
    assert!(s.eigenvalues.is_empty());
    assert_eq!(spurious_scan(&[(1, &s)], 0.1, 1.0).unwrap(), vec![(1, 0)]);
}

#[test]
fn embedding_is_orthonormal_and_conforming() {
    for (name, s) in [
        ("square-tri", spec(Family::First, 3, 1, 2)),
        ("square-quad", spec(Family::Tensor, 3, 1, 2)),
        ("cube-tet", spec(Family::Second, 2, 1, 3)),
        ("cube-hex", spec(Family::Tensor, 2, 2, 3)),
    ] {
        let m = builtin_mesh(name, 1).unwrap();
        let space = ConformingSpace::build(&m, &s).unwrap();
        let e = space.embedding();
        let g = e.transpose() * e;
        let dev = (&g - Mat::<f64>::identity(g.nrows(), g.ncols())).norm_max();
        assert!(dev < 1e-12, "{s}: {dev:e}");
        for j in (0..space.dim()).step_by(7) {
            let col: Vec<f64> = (0..e.nrows()).map(|i| e[(i, j)]).collect();
            let r = space.conformity_residual(&col);
            assert!(r < 1e-10, "{s} column {j}: {r:e}");
        }
    }
}

#[test]
fn broken_vectors_are_not_conforming() {
    let m = builtin_mesh("square-tri", 1).unwrap();
    let space = ConformingSpace::build(&m, &spec(Family::First, 2, 1, 2)).unwrap();
    let mut v = vec![0.0; space.broken_dim()];
    v[0] = 1.0;
    assert!(space.conformity_residual(&v) > 1e-3);
}

#[test]
fn operators_are_symmetric_and_definite() {
    let m = builtin_mesh("square-tri", 1).unwrap();
    let space = ConformingSpace::build(&m, &spec(Family::Second, 2, 1, 2)).unwrap();
    let ops = assemble_default(&space).unwrap();
    let asym = (&ops.mass - ops.mass.transpose()).norm_max();
    assert!(asym <= 1e-12 * ops.mass.norm_max());
    assert!(pforms::linalg::cholesky(ops.mass.as_ref()).is_some());
    let s = solve_evp(&ops, ZeroThreshold::default()).unwrap();
    assert!(s.eigenvalues.iter().all(|&v| v >= 0.0));
    for (v, r) in s.eigenvalues.iter().zip(&s.residuals) {
        assert!(*r <= 1e-8 * (1.0 + v), "{v}: {r:e}");
    }
}

#[test]
fn dirichlet_laplacian_eigenvalue() {
    let m = builtin_mesh("square-tri", 2).unwrap();
    let space = ConformingSpace::build(&m, &spec(Family::Second, 4, 0, 2)).unwrap();
    let (ops, s) = spectrum_of(&space).unwrap();
    assert_eq!(s.kernel_dim, 0);
    assert!(rel(s.positive()[0], 2.0 * pi2()) < 1e-6, "{}", s.positive()[0] / pi2());
    let alpha = friedrichs_constant(&ops, ZeroThreshold::default()).unwrap();
    assert!(rel(alpha * alpha, s.positive()[0]) < 1e-8);
}

#[test]
fn maxwell_square_second_family() {
    let m = builtin_mesh("square-tri", 2).unwrap();
    let space = ConformingSpace::build(&m, &spec(Family::Second, 6, 1, 2)).unwrap();
    let (_, s) = spectrum_of(&space).unwrap();
    for (got, want) in s.positive().iter().zip(reference_eigenvalues(2, 1, 5)) {
        assert!(rel(*got, want) < 1e-6, "{got} vs {want}");
    }
}

#[test]
fn gradients_are_in_the_stiffness_kernel() {
    for (name, f, p, l) in [
        ("square-tri", Family::First, 3, 1),
        ("square-tri", Family::Second, 2, 1),
        ("square-quad", Family::Tensor, 3, 1),
        ("cube-tet", Family::First, 2, 2),
        ("cube-hex", Family::Tensor, 2, 1),
    ] {
        let m = builtin_mesh(name, 1).unwrap();
        let upper = spec(f, p, l, m.dim());
        let lower_space = ConformingSpace::build(&m, &upper.companion().unwrap()).unwrap();
        let space = ConformingSpace::build(&m, &upper).unwrap();
        let grad = discrete_gradient(&lower_space, &space).unwrap();
        let ops = assemble_default(&space).unwrap();
        let sd = &ops.stiffness * &grad;
        assert!(sd.norm_max() < 1e-10 * (1.0 + grad.norm_max()), "{upper}: {:e}", sd.norm_max());
        // Columns represent d of the lower forms, including conformity.
        let broken = space.broken(grad.as_ref());
        for j in (0..broken.ncols()).step_by(5) {
            let col: Vec<f64> = (0..broken.nrows()).map(|i| broken[(i, j)]).collect();
            assert!(space.conformity_residual(&col) < 1e-10);
        }
    }
}

#[test]
fn gradient_pairing_is_checked() {
    let m = builtin_mesh("square-tri", 1).unwrap();
    let a = ConformingSpace::build(&m, &spec(Family::Second, 2, 0, 2)).unwrap();
    let b = ConformingSpace::build(&m, &spec(Family::Second, 2, 1, 2)).unwrap();
    assert!(matches!(discrete_gradient(&a, &b), Err(pforms::Error::IncompatiblePairing(_))));
}

fn contractible_meshes() -> Vec<Mesh> {
    BUILTIN_NAMES.iter().map(|n| builtin_mesh(n, if n.starts_with("cube") { 0 } else { 1 }).unwrap()).collect()
}

#[test]
fn kernel_equals_gradient_image() {
    for m in contractible_meshes() {
        let kind = m.kind();
        let families: &[Family] = match kind {
            pforms::mesh::CellKind::Simplex => &[Family::First, Family::Second],
            pforms::mesh::CellKind::Cube => &[Family::Tensor],
        };
        for &f in families {
            for l in 1..=m.dim() {
                for p in 1..=3 {
                    let s = spec(f, p, l, m.dim());
                    let space = ConformingSpace::build(&m, &s).unwrap();
                    let lower = ConformingSpace::build(&m, &s.companion().unwrap()).unwrap();
                    let grad = discrete_gradient(&lower, &space).unwrap();
                    let (ops, spectrum) = spectrum_of(&space).unwrap();
                    let report = kernel_complement_diagnostics(&ops, &spectrum, grad.as_ref()).unwrap();
                    if l < m.dim() {
                        assert_eq!(report.kernel_dim, report.gradient_rank, "{} {s}", m.name());
                        assert!(report.equal, "{} {s}: {report:?}", m.name());
                    } else {
                        // Top-degree zero-trace forms keep the constants.
                        assert_eq!(report.kernel_dim, report.gradient_rank + 1, "{} {s}", m.name());
                    }
                }
            }
        }
    }
}

#[test]
fn single_edge_space_has_trivial_kernel() {
    let m = builtin_mesh("square-tri", 0).unwrap();
    let s = spec(Family::First, 1, 1, 2);
    let space = ConformingSpace::build(&m, &s).unwrap();
    let lower = ConformingSpace::build(&m, &s.companion().unwrap()).unwrap();
    assert_eq!(lower.dim(), 0);
    let grad = discrete_gradient(&lower, &space).unwrap();
    let (ops, spectrum) = spectrum_of(&space).unwrap();
    let r = kernel_complement_diagnostics(&ops, &spectrum, grad.as_ref()).unwrap();
    assert_eq!((r.n, r.kernel_dim, r.z_dim, r.x_dim), (1, 0, 1, 1));
}

#[test]
fn weighted_materials_scale_the_spectrum() {
    let m = builtin_mesh("cube-tet", 0).unwrap();
    let space = ConformingSpace::build(&m, &spec(Family::First, 2, 1, 3)).unwrap();
    let id = MaterialField::identity(m.n_cells(), 3);
    let a = assemble(&space, &id).unwrap();
    let b = assemble_default(&space).unwrap();
    assert_eq!(a.mass, b.mass);
    assert_eq!(a.stiffness, b.stiffness);
    let eye = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];
    let four: Vec<f64> = eye.iter().map(|x| 4.0 * x).collect();
    let eps4 = MaterialField::uniform(m.n_cells(), 3, &four, &eye).unwrap();
    let base = solve_evp(&b, ZeroThreshold::default()).unwrap();
    let scaled = solve_evp(&assemble(&space, &eps4).unwrap(), ZeroThreshold::default()).unwrap();
    assert_eq!(base.kernel_dim, scaled.kernel_dim);
    for (x, y) in base.positive().iter().zip(scaled.positive()) {
        assert!(rel(*y, x / 4.0) < 1e-10);
    }
    let mu2 = MaterialField::uniform(m.n_cells(), 3, &eye, &eye.map(|x| 2.0 * x)).unwrap();
    let s2 = solve_evp(&assemble(&space, &mu2).unwrap(), ZeroThreshold::default()).unwrap();
    for (x, y) in base.positive().iter().zip(s2.positive()) {
        assert!(rel(*y, x / 2.0) < 1e-10);
    }
}

#[test]
fn material_files_are_validated() {
    let m = builtin_mesh("square-tri", 0).unwrap();
    let ok = MaterialField::parse("# comment\n0  2 0 0 2  1 0 0 1\n", &m).unwrap();
    assert_eq!(ok.eps[0], vec![2.0, 0.0, 0.0, 2.0]);
    assert_eq!(ok.eps[1], vec![1.0, 0.0, 0.0, 1.0]);
    assert!(matches!(MaterialField::parse("0 1 2 2 1 1 0 0 1", &m), Err(pforms::Error::NonSpdMaterial(0))));
    assert!(matches!(MaterialField::parse("1 1 0.5 0 1 1 0 0 1", &m), Err(pforms::Error::NonSpdMaterial(1))));
    assert!(matches!(MaterialField::parse("0 1 0 0", &m), Err(pforms::Error::Parse { line: 1, .. })));
    assert!(matches!(MaterialField::parse("7 1 0 0 1 1 0 0 1", &m), Err(pforms::Error::Parse { .. })));
}

#[test]
fn size_guard_and_windows() {
    let ops = OperatorPair { stiffness: Mat::zeros(DENSE_LIMIT + 1, 0), mass: Mat::zeros(DENSE_LIMIT + 1, 0) };
    assert!(matches!(solve_evp(&ops, ZeroThreshold::default()), Err(pforms::Error::SizeGuard { .. })));
    let m = builtin_mesh("square-tri", 1).unwrap();
    let space = ConformingSpace::build(&m, &spec(Family::First, 2, 1, 2)).unwrap();
    let (_, s) = spectrum_of(&space).unwrap();
    assert!(spurious_scan(&[(2, &s)], 1.0, 0.5).is_err());
    let l1 = s.positive()[0];
    assert_eq!(spurious_scan(&[(2, &s)], 1e-6 * l1, 0.9 * l1).unwrap(), vec![(2, 0)]);
    assert!(spurious_scan(&[(2, &s)], 0.5 * l1, 1.1 * l1).unwrap()[0].1 >= 1);
}

/// x(1−x)y(1−y) as a polynomial.
fn square_bubble() -> Polynomial<f64> {
    let t = |i: usize| {
        let mut p = Polynomial::zero();
        p.add_term(Monomial::axis(i), 1.0);
        let mut sq = [0u8; 3];
        sq[i] = 2;
        p.add_term(Monomial(sq), -1.0);
        p
    };
    t(0).mul(&t(1))
}

#[test]
fn cas_is_zero_inside_the_space() {
    let m = builtin_mesh("square-tri", 1).unwrap();
    let s3 = spec(Family::Second, 3, 1, 2);
    let coarse = ConformingSpace::build(&m, &spec(Family::Second, 1, 1, 2)).unwrap();
    let fine = ConformingSpace::build(&m, &s3).unwrap();
    // A conforming p=1 field is inside every later space.
    let ops = assemble_default(&fine).unwrap();
    let mut coeffs = vec![0.0; coarse.dim()];
    coeffs[0] = 1.0;
    coeffs[coarse.dim() - 1] = -0.5;
    let err = cas_error(&fine, &ops, &coarse.field(&coeffs), 8).unwrap();
    assert!(err < 1e-10, "{err:e}");
}

#[test]
fn cas_and_cdk_decrease_with_p() {
    let m = builtin_mesh("square-tri", 1).unwrap();
    let b = square_bubble();
    let u = sinusoid_surrogate(2, 1, 8, 3).mul_polynomial(&b);
    let field = PolyField::new(u);
    let mut phi = sinusoid_surrogate(2, 0, 7, 1).mul_polynomial(&b);
    phi = phi.scale(&2.0);
    let z = exterior_derivative(&phi).unwrap();
    let mut last = (f64::INFINITY, f64::INFINITY);
    for p in 1..=4 {
        let space = ConformingSpace::build(&m, &spec(Family::First, p, 1, 2)).unwrap();
        let (ops, spectrum) = spectrum_of(&space).unwrap();
        let cas = cas_error(&space, &ops, &field, 24).unwrap();
        let cdk = cdk_error(&space, &spectrum, &z, 24).unwrap();
        assert!(cas < last.0 && cdk < last.1, "p={p}: {cas:e} {cdk:e} after {last:?}");
        last = (cas, cdk);
    }
}

#[test]
fn cdk_rejects_open_targets() {
    let m = builtin_mesh("square-tri", 0).unwrap();
    let space = ConformingSpace::build(&m, &spec(Family::First, 2, 1, 2)).unwrap();
    let (_, s) = spectrum_of(&space).unwrap();
    let open = PolyForm::monomial(2, FormIndex::from_axes(&[0]), Monomial::axis(1), 1.0);
    assert!(matches!(cdk_error(&space, &s, &open, 6), Err(pforms::Error::NotClosed)));
}

#[test]
fn chn_gap_vanishes_at_the_reference_and_decreases() {
    let m = builtin_mesh("square-tri", 0).unwrap();
    let fine = ConformingSpace::build(&m, &spec(Family::First, 5, 1, 2)).unwrap();
    assert!(chn_gap(&fine, &fine).unwrap() < 1e-10);
    let mut last = f64::INFINITY;
    for p in 1..=4 {
        let coarse = ConformingSpace::build(&m, &spec(Family::First, p, 1, 2)).unwrap();
        let g = chn_gap(&coarse, &fine).unwrap();
        assert!(g < last, "p={p}: {g} after {last}");
        last = g;
    }
}

#[test]
fn nested_embedding_is_injective() {
    let m = builtin_mesh("square-tri", 1).unwrap();
    let coarse = ConformingSpace::build(&m, &spec(Family::First, 2, 1, 2)).unwrap();
    let fine = ConformingSpace::build(&m, &spec(Family::First, 3, 1, 2)).unwrap();
    let j = nested_embedding(&coarse, &fine).unwrap();
    assert_eq!(rank(j.as_ref()), coarse.dim());
    assert!(nested_embedding(&fine, &coarse).is_err());
}
