use pforms::mesh::{builtin_mesh, load_mesh, star_center_box, write_mesh, CellKind, BUILTIN_NAMES};
use pforms::Error;

const SQUARE: &str = "# unit square, two triangles
2 4 2 simplex
0 0
1 0
0 1
1 1
0 1 3
0 3 2
";

#[test]
fn two_triangle_square() {
    let m = load_mesh("square", SQUARE).unwrap();
    assert_eq!(m.vertices().len(), 4);
    assert_eq!(m.n_cells(), 2);
    assert_eq!(m.facets(1).len(), 5);
    assert_eq!(m.interior_count(1), 1);
    assert_eq!(m.euler_characteristic(), 1);
}

#[test]
fn duplicate_cell_is_rejected() {
    let text = "2 4 3 simplex\n0 0\n1 0\n0 1\n1 1\n0 1 3\n0 3 2\n3 0 1\n";
    assert!(matches!(load_mesh("dup", text), Err(Error::Nonconforming(_))));
}

#[test]
fn parse_errors_carry_line_numbers() {
    let text = "2 3 1 simplex\n0 0\n1 zero\n0 1\n0 1 2\n";
    match load_mesh("bad", text) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn inverted_and_degenerate_cells_are_rejected() {
    let inverted = "2 3 1 simplex\n0 0\n1 0\n0 1\n0 2 1\n";
    assert!(matches!(load_mesh("inv", inverted), Err(Error::InvertedCell(0))));
    let flat = "2 3 1 simplex\n0 0\n1 1\n2 2\n0 1 2\n";
    assert!(load_mesh("flat", flat).is_err());
}

#[test]
fn non_affine_quadrilateral_is_rejected() {
    let text = "2 4 1 cube\n0 0\n1 0\n0 1\n1.5 1\n0 1 2 3\n";
    assert!(matches!(load_mesh("trap", text), Err(Error::NonAffineCell(0))));
}

#[test]
fn kuhn_cube() {
    let m = builtin_mesh("cube-tet", 0).unwrap();
    assert_eq!(m.vertices().len(), 8);
    assert_eq!(m.n_cells(), 6);
    // 12 cube edges, 6 face diagonals, 1 main diagonal.
    assert_eq!(m.facets(1).len(), 19);
    assert_eq!(m.euler_characteristic(), 1);
}

#[test]
fn builtin_counts() {
    assert_eq!(builtin_mesh("square-tri", 0).unwrap().n_cells(), 2);
    assert_eq!(builtin_mesh("square-tri", 1).unwrap().n_cells(), 8);
    assert_eq!(builtin_mesh("cube-hex", 0).unwrap().n_cells(), 1);
    assert!(matches!(builtin_mesh("torus", 0), Err(Error::UnknownMesh(_))));
    assert!(matches!(builtin_mesh("square-tri", 6), Err(Error::RefineGuard(6))));
}

#[test]
fn refinement_multiplies_cells_and_keeps_euler_characteristic() {
    for name in BUILTIN_NAMES {
        let dim = if name.starts_with("cube") { 3 } else { 2 };
        let max = if dim == 3 { 2 } else { 3 };
        let mut prev = builtin_mesh(name, 0).unwrap().n_cells();
        for r in 0..=max {
            let m = builtin_mesh(name, r).unwrap();
            assert_eq!(m.euler_characteristic(), 1, "{name} r{r}");
            if r > 0 {
                assert_eq!(m.n_cells(), prev << dim, "{name} r{r}");
            }
            prev = m.n_cells();
        }
    }
}

#[test]
fn facet_cell_incidence() {
    for name in BUILTIN_NAMES {
        let m = builtin_mesh(name, 1).unwrap();
        let d = m.dim();
        for (f, facet) in m.facets(d - 1).iter().enumerate() {
            let n = m.facet_cells(f).len();
            assert_eq!(n, if facet.boundary { 1 } else { 2 }, "{name} facet {f}");
        }
    }
}

#[test]
fn star_boxes() {
    let tri = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
    let b = star_center_box(CellKind::Simplex, &tri, 2).unwrap();
    assert!((b.center[0] - 1.0 / 3.0).abs() < 1e-15 && (b.center[1] - 1.0 / 3.0).abs() < 1e-15);
    // Every box corner lies inside the triangle.
    for sx in [-1.0, 1.0] {
        for sy in [-1.0, 1.0] {
            let (x, y) = (b.center[0] + sx * b.half_width, b.center[1] + sy * b.half_width);
            assert!(x > 0.0 && y > 0.0 && x + y < 1.0);
        }
    }
    let cube = builtin_mesh("cube-hex", 0).unwrap();
    let b = cube.star_center_box(0).unwrap();
    assert_eq!(b.center[..3], [0.5, 0.5, 0.5]);
    assert_eq!(b.half_width, 0.125);
    let flat = [[0.0, 0.0, 0.0], [1.0, 1.0, 0.0], [2.0, 2.0, 0.0]];
    assert!(star_center_box(CellKind::Simplex, &flat, 2).is_err());
}

#[test]
fn write_then_load_round_trips() {
    let m = builtin_mesh("lshape-tri", 1).unwrap();
    let again = load_mesh("again", &write_mesh(&m)).unwrap();
    assert_eq!(again.cells(), m.cells());
    assert_eq!(again.vertices(), m.vertices());
}
