//! Conforming meshes of affine simplices or affine cube images.

mod builtin;
mod io;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

pub use builtin::{builtin_mesh, BUILTIN_NAMES};
pub use io::{load_mesh, write_mesh};

use crate::error::{Error, Result};
use crate::forms::{AffineMap, BumpWeight, Point};
use crate::scalar::{Rational, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellKind {
    Simplex,
    Cube,
}

impl CellKind {
    pub fn n_vertices(self, dim: usize) -> usize {
        match self {
            CellKind::Simplex => dim + 1,
            CellKind::Cube => 1 << dim,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CellKind::Simplex => "simplex",
            CellKind::Cube => "cube",
        }
    }
}

/// Vertex `i` of the reference cell: for simplices (−1,…,−1) and its shifts
/// by 2eᵢ; for cubes coordinate j is −1 + 2·bit_j(i).
pub fn reference_vertex(kind: CellKind, dim: usize, i: usize) -> Point {
    let mut p = [0.0; 3];
    for (j, pj) in p.iter_mut().enumerate().take(dim) {
        *pj = match kind {
            CellKind::Simplex => if i == j + 1 { 1.0 } else { -1.0 },
            CellKind::Cube => if (i >> j) & 1 == 1 { 1.0 } else { -1.0 },
        };
    }
    p
}

/// Local m-dimensional facets of a reference cell as lists of local vertices
/// in frame order: origin first, then the vertices spanning the facet axes.
pub fn local_facets(kind: CellKind, dim: usize, m: usize) -> Vec<Vec<usize>> {
    match kind {
        CellKind::Simplex => combinations(dim + 1, m + 1),
        CellKind::Cube => {
            let mut out = Vec::new();
            for free in combinations(dim, m) {
                let free_mask: usize = free.iter().map(|&a| 1 << a).sum();
                for pattern in 0..(1usize << dim) {
                    if pattern & free_mask != 0 {
                        continue;
                    }
                    let mut verts = vec![pattern];
                    verts.extend(free.iter().map(|&a| pattern | (1 << a)));
                    // Remaining facet vertices are implied by the parallelotope.
                    out.push(verts);
                }
            }
            out
        }
    }
}

/// All local vertices of a local facet given in frame order.
pub fn local_facet_vertices(kind: CellKind, frame: &[usize]) -> Vec<usize> {
    match kind {
        CellKind::Simplex => frame.to_vec(),
        CellKind::Cube => cube_facet_vertices(frame),
    }
}

/// All vertices of a local cube facet given its frame (origin + axis vertices).
fn cube_facet_vertices(frame: &[usize]) -> Vec<usize> {
    let origin = frame[0];
    let dirs: Vec<usize> = frame[1..].iter().map(|&v| v ^ origin).collect();
    (0..(1usize << dirs.len()))
        .map(|mask| dirs.iter().enumerate().fold(origin, |acc, (k, &dbit)| if (mask >> k) & 1 == 1 { acc | dbit } else { acc }))
        .collect()
}

pub(crate) fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// A facet of the mesh with its global frame.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Facet {
    pub dim: usize,
    /// Sorted global vertex ids.
    pub vertices: Vec<usize>,
    /// Global ids of the frame: origin, then one vertex per facet axis.
    /// Simplices use increasing ids; cube facets start at the smallest id and
    /// take its facet neighbours in increasing id order.
    pub frame: Vec<usize>,
    pub boundary: bool,
}

/// Incidence of a facet in a cell, with the frame expressed in local vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct CellFacet {
    pub facet: usize,
    pub local_frame: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct Mesh {
    name: String,
    dim: usize,
    kind: CellKind,
    vertices: Vec<Point>,
    cells: Vec<Vec<usize>>,
    facets: Vec<Vec<Facet>>,
    cell_facets: Vec<Vec<Vec<CellFacet>>>,
    facet_cells: Vec<Vec<usize>>,
    maps: Vec<AffineMap<f64>>,
}

/// Summary used in reports.
#[derive(Clone, Debug, Serialize)]
pub struct MeshDescriptor {
    pub name: String,
    pub dim: usize,
    pub kind: CellKind,
    pub vertices: usize,
    pub cells: usize,
    pub facet_counts: Vec<usize>,
}

impl Mesh {
    /// Validate and index a mesh.
    pub fn new(name: impl Into<String>, dim: usize, kind: CellKind, vertices: Vec<Point>, cells: Vec<Vec<usize>>) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidArgument(format!("mesh dimension {dim} is not supported")));
        }
        let nv = kind.n_vertices(dim);
        let mut used = vec![false; vertices.len()];
        let mut seen: HashMap<Vec<usize>, usize> = HashMap::new();
        for (k, c) in cells.iter().enumerate() {
            if c.len() != nv {
                return Err(Error::InvalidArgument(format!("cell {k} has {} vertices, expected {nv}", c.len())));
            }
            let mut sorted = c.clone();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::DegenerateCell(format!("cell {k} repeats a vertex")));
            }
            if let Some(&v) = sorted.last() {
                if v >= vertices.len() {
                    return Err(Error::InvalidArgument(format!("cell {k} references missing vertex {v}")));
                }
            }
            if let Some(prev) = seen.insert(sorted.clone(), k) {
                return Err(Error::Nonconforming(format!("cells {prev} and {k} coincide")));
            }
            for &v in c {
                used[v] = true;
            }
        }
        if let Some(v) = used.iter().position(|u| !u) {
            return Err(Error::Nonconforming(format!("vertex {v} belongs to no cell")));
        }
        let mut maps = Vec::with_capacity(cells.len());
        for (k, c) in cells.iter().enumerate() {
            maps.push(cell_map(k, dim, kind, &vertices, c)?);
        }

        let mut facets: Vec<Vec<Facet>> = vec![Vec::new(); dim + 1];
        let mut lookup: Vec<HashMap<Vec<usize>, usize>> = vec![HashMap::new(); dim + 1];
        let mut cell_facets = Vec::with_capacity(cells.len());
        for c in &cells {
            let mut per_dim = Vec::with_capacity(dim + 1);
            for m in 0..=dim {
                let mut list = Vec::new();
                for local in local_facets(kind, dim, m) {
                    let local_all = match kind {
                        CellKind::Simplex => local.clone(),
                        CellKind::Cube => cube_facet_vertices(&local),
                    };
                    let mut global: Vec<usize> = local_all.iter().map(|&i| c[i]).collect();
                    global.sort_unstable();
                    let local_frame = facet_frame(kind, &local, &local_all, c);
                    let frame: Vec<usize> = local_frame.iter().map(|&i| c[i]).collect();
                    let id = *lookup[m].entry(global.clone()).or_insert_with(|| {
                        facets[m].push(Facet { dim: m, vertices: global, frame, boundary: false });
                        facets[m].len() - 1
                    });
                    list.push(CellFacet { facet: id, local_frame });
                }
                per_dim.push(list);
            }
            cell_facets.push(per_dim);
        }

        let mut facet_cells = vec![Vec::new(); facets[dim - 1].len()];
        for (k, cf) in cell_facets.iter().enumerate() {
            for f in &cf[dim - 1] {
                facet_cells[f.facet].push(k);
            }
        }
        for (f, cs) in facet_cells.iter().enumerate() {
            if cs.len() > 2 {
                return Err(Error::Nonconforming(format!("facet {:?} bounds {} cells", facets[dim - 1][f].vertices, cs.len())));
            }
        }
        // Boundary flags propagate from (d−1)-facets to their sub-facets.
        for f in 0..facet_cells.len() {
            if facet_cells[f].len() != 1 {
                continue;
            }
            let k = facet_cells[f][0];
            let fverts = facets[dim - 1][f].vertices.clone();
            facets[dim - 1][f].boundary = true;
            for m in 0..dim - 1 {
                for cf in &cell_facets[k][m] {
                    let sub = &mut facets[m][cf.facet];
                    if sub.vertices.iter().all(|v| fverts.binary_search(v).is_ok()) {
                        sub.boundary = true;
                    }
                }
            }
        }

        let mesh = Mesh { name: name.into(), dim, kind, vertices, cells, facets, cell_facets, facet_cells, maps };
        mesh.check_convexity()?;
        mesh.check_hanging_vertices()?;
        Ok(mesh)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> CellKind {
        self.kind
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    /// Facets of dimension `m` (m = d gives the cells).
    pub fn facets(&self, m: usize) -> &[Facet] {
        &self.facets[m]
    }

    /// Facets of dimension `m` of cell `k`, in local enumeration order.
    pub fn cell_facets(&self, k: usize, m: usize) -> &[CellFacet] {
        &self.cell_facets[k][m]
    }

    /// Cells adjacent to a (d−1)-facet.
    pub fn facet_cells(&self, f: usize) -> &[usize] {
        &self.facet_cells[f]
    }

    /// Map from the reference cell to cell `k`.
    pub fn cell_map(&self, k: usize) -> &AffineMap<f64> {
        &self.maps[k]
    }

    pub fn cell_vertices(&self, k: usize) -> Vec<Point> {
        self.cells[k].iter().map(|&v| self.vertices[v]).collect()
    }

    /// Alternating sum of facet counts over all dimensions.
    pub fn euler_characteristic(&self) -> i64 {
        self.facets.iter().enumerate().map(|(m, f)| if m % 2 == 0 { f.len() as i64 } else { -(f.len() as i64) }).sum()
    }

    pub fn interior_count(&self, m: usize) -> usize {
        self.facets[m].iter().filter(|f| !f.boundary).count()
    }

    pub fn descriptor(&self) -> MeshDescriptor {
        MeshDescriptor {
            name: self.name.clone(),
            dim: self.dim,
            kind: self.kind,
            vertices: self.vertices.len(),
            cells: self.cells.len(),
            facet_counts: self.facets.iter().map(|f| f.len()).collect(),
        }
    }

    /// Inscribed bump box of cell `k`.
    pub fn star_center_box(&self, k: usize) -> Result<StarBox> {
        star_center_box(self.kind, &self.cell_vertices(k)[..], self.dim)
    }

    fn check_convexity(&self) -> Result<()> {
        for k in 0..self.cells.len() {
            let verts = self.cell_vertices(k);
            for local in local_facets(self.kind, self.dim, self.dim - 1) {
                let (n, x0) = facet_plane(&local, &verts, self.dim);
                let scale = n.iter().map(|v| v * v).sum::<f64>().sqrt() * diameter(&verts, self.dim);
                let signs: Vec<f64> = verts.iter().map(|v| (0..self.dim).map(|i| n[i] * (v[i] - x0[i])).sum()).collect();
                let tol = 1e-12 * scale;
                if signs.iter().any(|&s| s > tol) && signs.iter().any(|&s| s < -tol) {
                    return Err(Error::NotStarShaped(k));
                }
            }
        }
        Ok(())
    }

    fn check_hanging_vertices(&self) -> Result<()> {
        let d = self.dim;
        let bfacets: Vec<usize> = (0..self.facet_cells.len()).filter(|&f| self.facet_cells[f].len() == 1).collect();
        if bfacets.is_empty() {
            return Ok(());
        }
        // Bucket vertices on a uniform grid to keep the search local.
        let (lo, hi) = bounding_box(&self.vertices, d);
        let extent = (0..d).map(|i| hi[i] - lo[i]).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let n = ((self.vertices.len() as f64).powf(1.0 / d as f64).ceil() as usize).max(1);
        let h = extent / n as f64;
        let key = |p: &Point| -> [i64; 3] {
            let mut k = [0i64; 3];
            for i in 0..d {
                k[i] = ((p[i] - lo[i]) / h).floor() as i64;
            }
            k
        };
        let mut grid: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
        for (v, p) in self.vertices.iter().enumerate() {
            grid.entry(key(p)).or_default().push(v);
        }
        for f in bfacets {
            let facet = &self.facets[d - 1][f];
            let pts: Vec<Point> = facet.vertices.iter().map(|&v| self.vertices[v]).collect();
            let (flo, fhi) = bounding_box(&pts, d);
            let (klo, khi) = (key(&flo), key(&fhi));
            let diam = diameter(&pts, d);
            let mut cand = Vec::new();
            for a in klo[0]..=khi[0] {
                for b in klo[1]..=khi[1] {
                    for c in klo[2]..=khi[2] {
                        if let Some(vs) = grid.get(&[a, b, c]) {
                            cand.extend_from_slice(vs);
                        }
                    }
                }
            }
            let frame: Vec<Point> = facet.frame.iter().map(|&v| self.vertices[v]).collect();
            for v in cand {
                if facet.vertices.binary_search(&v).is_ok() {
                    continue;
                }
                if point_on_facet(&self.vertices[v], &frame, self.kind, d, 1e-10 * diam) {
                    return Err(Error::Nonconforming(format!("vertex {v} hangs on boundary facet {:?}", facet.vertices)));
                }
            }
        }
        Ok(())
    }
}

fn bounding_box(pts: &[Point], d: usize) -> (Point, Point) {
    let mut lo = [0.0; 3];
    let mut hi = [0.0; 3];
    for i in 0..d {
        lo[i] = pts.iter().map(|p| p[i]).fold(f64::INFINITY, f64::min);
        hi[i] = pts.iter().map(|p| p[i]).fold(f64::NEG_INFINITY, f64::max);
    }
    (lo, hi)
}

fn diameter(pts: &[Point], d: usize) -> f64 {
    let mut best = 0.0f64;
    for a in pts {
        for b in pts {
            best = best.max((0..d).map(|i| (a[i] - b[i]).powi(2)).sum::<f64>().sqrt());
        }
    }
    best
}

/// Is `p` on the (d−1)-facet spanned by `frame` (origin + axis vertices)?
fn point_on_facet(p: &Point, frame: &[Point], kind: CellKind, d: usize, tol: f64) -> bool {
    let m = frame.len() - 1;
    let o = frame[0];
    let axes: Vec<Vec<f64>> = frame[1..].iter().map(|a| (0..d).map(|i| a[i] - o[i]).collect()).collect();
    // Least-squares parameters via the normal equations (m ≤ 2).
    let g: Vec<Vec<f64>> = (0..m).map(|a| (0..m).map(|b| dot(&axes[a], &axes[b])).collect()).collect();
    let r: Vec<f64> = (0..d).map(|i| p[i] - o[i]).collect();
    let rhs: Vec<f64> = (0..m).map(|a| dot(&axes[a], &r)).collect();
    let s: Vec<f64> = match m {
        0 => vec![],
        1 => vec![rhs[0] / g[0][0]],
        _ => {
            let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
            vec![(rhs[0] * g[1][1] - rhs[1] * g[0][1]) / det, (g[0][0] * rhs[1] - g[1][0] * rhs[0]) / det]
        }
    };
    let resid: f64 = (0..d)
        .map(|i| {
            let q = o[i] + (0..m).map(|a| s[a] * axes[a][i]).sum::<f64>();
            (p[i] - q).powi(2)
        })
        .sum::<f64>()
        .sqrt();
    if resid > tol {
        return false;
    }
    let eps = 1e-10;
    match kind {
        CellKind::Simplex => s.iter().all(|&t| t >= -eps) && s.iter().sum::<f64>() <= 1.0 + eps,
        CellKind::Cube => s.iter().all(|&t| (-eps..=1.0 + eps).contains(&t)),
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Normal and base point of the hyperplane through a local (d−1)-facet.
fn facet_plane(local: &[usize], verts: &[Point], d: usize) -> ([f64; 3], Point) {
    let o = verts[local[0]];
    let a: Vec<[f64; 3]> = local[1..]
        .iter()
        .map(|&i| {
            let mut e = [0.0; 3];
            for j in 0..d {
                e[j] = verts[i][j] - o[j];
            }
            e
        })
        .collect();
    let n = match d {
        1 => [1.0, 0.0, 0.0],
        2 => [-a[0][1], a[0][0], 0.0],
        _ => [
            a[0][1] * a[1][2] - a[0][2] * a[1][1],
            a[0][2] * a[1][0] - a[0][0] * a[1][2],
            a[0][0] * a[1][1] - a[0][1] * a[1][0],
        ],
    };
    (n, o)
}

fn facet_frame(kind: CellKind, local: &[usize], local_all: &[usize], cell: &[usize]) -> Vec<usize> {
    match kind {
        CellKind::Simplex => {
            let mut l = local.to_vec();
            l.sort_by_key(|&i| cell[i]);
            l
        }
        CellKind::Cube => {
            let origin = *local_all.iter().min_by_key(|&&i| cell[i]).unwrap();
            let mut nbrs: Vec<usize> = local_all.iter().copied().filter(|&i| (i ^ origin).count_ones() == 1).collect();
            nbrs.sort_by_key(|&i| cell[i]);
            let mut out = vec![origin];
            out.extend(nbrs);
            out
        }
    }
}

fn cell_map(k: usize, dim: usize, kind: CellKind, vertices: &[Point], c: &[usize]) -> Result<AffineMap<f64>> {
    let v0 = vertices[c[0]];
    let axis_vertex = |j: usize| match kind {
        CellKind::Simplex => c[j + 1],
        CellKind::Cube => c[1 << j],
    };
    let cols: Vec<Vec<f64>> = (0..dim).map(|j| (0..dim).map(|i| 0.5 * (vertices[axis_vertex(j)][i] - v0[i])).collect()).collect();
    let matrix: Vec<Vec<f64>> = (0..dim).map(|i| (0..dim).map(|j| cols[j][i]).collect()).collect();
    let offset: Vec<f64> = (0..dim).map(|i| v0[i] + cols.iter().map(|col| col[i]).sum::<f64>()).collect();
    let det = crate::forms::AffineMap::new(matrix.clone(), offset.clone()).map(|m| m.det());
    let scale: f64 = cols.iter().map(|col| col.iter().map(|v| v * v).sum::<f64>().sqrt()).product();
    let map = match det {
        Ok(dt) if dt.abs() > 1e-12 * scale => AffineMap::new(matrix, offset)?,
        _ => return Err(Error::DegenerateCell(format!("cell {k} has zero volume"))),
    };
    if map.det() < 0.0 {
        return Err(Error::InvertedCell(k));
    }
    if kind == CellKind::Cube {
        let diam = cols.iter().map(|col| col.iter().map(|v| v * v).sum::<f64>().sqrt()).sum::<f64>();
        for (i, &v) in c.iter().enumerate() {
            let r = reference_vertex(kind, dim, i);
            let x = map.apply(&r[..dim]);
            let err = (0..dim).map(|j| (x[j] - vertices[v][j]).powi(2)).sum::<f64>().sqrt();
            if err > 1e-10 * diam {
                return Err(Error::NonAffineCell(k));
            }
        }
    }
    Ok(map)
}

/// Axis-aligned box at the centroid of a cell with half-width one quarter of
/// the centroid's distance to the cell boundary.
#[derive(Clone, Debug, PartialEq)]
pub struct StarBox {
    pub center: Vec<f64>,
    pub center_exact: Vec<Rational>,
    pub half_width: f64,
}

/// Default smoothness power of the bump weight.
pub const BUMP_POWER: u32 = 2;

impl StarBox {
    pub fn weight(&self) -> BumpWeight<f64> {
        BumpWeight::new(self.center.clone(), vec![self.half_width; self.center.len()], BUMP_POWER).expect("valid box")
    }

    /// Exact weight; the half-width is rounded down to a multiple of 2⁻¹⁰.
    pub fn exact_weight(&self) -> Result<BumpWeight<Rational>> {
        let q = (self.half_width * 1024.0).floor();
        if q < 1.0 {
            return Err(Error::DegenerateCell("cell too small for a dyadic bump box".into()));
        }
        let hw = Rational::from_ratio(q as i64, 1024);
        BumpWeight::new(self.center_exact.clone(), vec![hw; self.center_exact.len()], BUMP_POWER)
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        self.center.iter().zip(p).all(|(c, x)| (x - c).abs() <= self.half_width)
    }
}

/// Cell shape check for a standalone cell: positive volume and convexity.
pub fn star_center_box(kind: CellKind, vertices: &[Point], dim: usize) -> Result<StarBox> {
    if vertices.len() != kind.n_vertices(dim) {
        return Err(Error::InvalidArgument("wrong vertex count for cell kind".into()));
    }
    let idx: Vec<usize> = (0..vertices.len()).collect();
    // Orientation is irrelevant for a standalone cell; degeneracy is not.
    match cell_map(0, dim, kind, vertices, &idx) {
        Ok(_) | Err(Error::InvertedCell(_)) => {}
        Err(e) => return Err(e),
    }
    let n = vertices.len() as i64;
    let center_exact: Vec<Rational> = (0..dim)
        .map(|i| vertices.iter().fold(Rational::from_i64(0), |acc, v| acc + Rational::from_f64(v[i])) / Rational::from_i64(n))
        .collect();
    let center: Vec<f64> = center_exact.iter().map(|c| c.to_f64()).collect();
    let mut dist = f64::INFINITY;
    for local in local_facets(kind, dim, dim - 1) {
        let (nrm, x0) = facet_plane(&local, vertices, dim);
        let len = nrm.iter().map(|v| v * v).sum::<f64>().sqrt();
        let s: Vec<f64> = vertices.iter().map(|v| (0..dim).map(|i| nrm[i] * (v[i] - x0[i])).sum::<f64>()).collect();
        if s.iter().any(|&x| x > 1e-12 * len) && s.iter().any(|&x| x < -1e-12 * len) {
            return Err(Error::NotStarShaped(0));
        }
        let dc = (0..dim).map(|i| nrm[i] * (center[i] - x0[i])).sum::<f64>().abs() / len;
        dist = dist.min(dc);
    }
    Ok(StarBox { center, center_exact, half_width: dist / 4.0 })
}
