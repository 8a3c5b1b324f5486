use super::{CellKind, Mesh};
use crate::error::{Error, Result};
use crate::forms::Point;

pub const BUILTIN_NAMES: [&str; 5] = ["square-tri", "square-quad", "cube-tet", "cube-hex", "lshape-tri"];

const MAX_REFINE: usize = 5;

/// Uniformly refined built-in mesh; level n splits each axis into 2ⁿ intervals.
pub fn builtin_mesh(name: &str, refine: usize) -> Result<Mesh> {
    if !BUILTIN_NAMES.contains(&name) {
        return Err(Error::UnknownMesh(name.to_string()));
    }
    if refine > MAX_REFINE {
        return Err(Error::RefineGuard(refine));
    }
    let n = 1usize << refine;
    let label = format!("{name}/r{refine}");
    match name {
        "square-tri" => {
            let (v, c) = grid_2d(n, n, 0.0, 0.0, 1.0 / n as f64, |_, _| true, true);
            Mesh::new(label, 2, CellKind::Simplex, v, c)
        }
        "square-quad" => {
            let (v, c) = grid_2d(n, n, 0.0, 0.0, 1.0 / n as f64, |_, _| true, false);
            Mesh::new(label, 2, CellKind::Cube, v, c)
        }
        "lshape-tri" => {
            // [−1,1]² without the quadrant (0,1)×(−1,0).
            let (v, c) = grid_2d(2 * n, 2 * n, -1.0, -1.0, 1.0 / n as f64, |i, j| !(i >= n && j < n), true);
            Mesh::new(label, 2, CellKind::Simplex, v, c)
        }
        "cube-tet" => {
            let (v, c) = grid_3d(n, true);
            Mesh::new(label, 3, CellKind::Simplex, v, c)
        }
        _ => {
            let (v, c) = grid_3d(n, false);
            Mesh::new(label, 3, CellKind::Cube, v, c)
        }
    }
}

/// Structured grid of nx × ny squares of size h; squares are split along the
/// (0,0)–(1,1) diagonal when `split` is set. Unused vertices are dropped.
fn grid_2d(nx: usize, ny: usize, x0: f64, y0: f64, h: f64, keep: impl Fn(usize, usize) -> bool, split: bool) -> (Vec<Point>, Vec<Vec<usize>>) {
    let mut ids = vec![usize::MAX; (nx + 1) * (ny + 1)];
    let mut verts = Vec::new();
    let mut cells = Vec::new();
    let mut vid = |i: usize, j: usize, verts: &mut Vec<Point>| -> usize {
        let k = j * (nx + 1) + i;
        if ids[k] == usize::MAX {
            ids[k] = verts.len();
            verts.push([x0 + i as f64 * h, y0 + j as f64 * h, 0.0]);
        }
        ids[k]
    };
    // Vertex numbering follows grid order, so allocate in that order first.
    for j in 0..=ny {
        for i in 0..=nx {
            let touches = [(i, j), (i.wrapping_sub(1), j), (i, j.wrapping_sub(1)), (i.wrapping_sub(1), j.wrapping_sub(1))]
                .iter()
                .any(|&(a, b)| a < nx && b < ny && keep(a, b));
            if touches {
                vid(i, j, &mut verts);
            }
        }
    }
    for j in 0..ny {
        for i in 0..nx {
            if !keep(i, j) {
                continue;
            }
            let v00 = vid(i, j, &mut verts);
            let v10 = vid(i + 1, j, &mut verts);
            let v01 = vid(i, j + 1, &mut verts);
            let v11 = vid(i + 1, j + 1, &mut verts);
            if split {
                cells.push(vec![v00, v10, v11]);
                cells.push(vec![v00, v11, v01]);
            } else {
                cells.push(vec![v00, v10, v01, v11]);
            }
        }
    }
    (verts, cells)
}

/// Unit cube split into n³ cubes, optionally into six Kuhn tetrahedra each.
fn grid_3d(n: usize, kuhn: bool) -> (Vec<Point>, Vec<Vec<usize>>) {
    let h = 1.0 / n as f64;
    let id = |i: usize, j: usize, k: usize| (k * (n + 1) + j) * (n + 1) + i;
    let mut verts = Vec::with_capacity((n + 1).pow(3));
    for k in 0..=n {
        for j in 0..=n {
            for i in 0..=n {
                verts.push([i as f64 * h, j as f64 * h, k as f64 * h]);
            }
        }
    }
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut cells = Vec::new();
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                let corner = |b: [usize; 3]| id(i + b[0], j + b[1], k + b[2]);
                if !kuhn {
                    cells.push((0..8).map(|c| corner([c & 1, (c >> 1) & 1, (c >> 2) & 1])).collect());
                    continue;
                }
                for p in perms {
                    let mut b = [0usize; 3];
                    let mut tet = vec![corner(b)];
                    for &axis in &p {
                        b[axis] = 1;
                        tet.push(corner(b));
                    }
                    // Odd permutations give negatively oriented paths.
                    let odd = matches!(p, [0, 2, 1] | [1, 0, 2] | [2, 1, 0]);
                    if odd {
                        tet.swap(2, 3);
                    }
                    cells.push(tet);
                }
            }
        }
    }
    (verts, cells)
}
