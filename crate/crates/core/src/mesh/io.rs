use std::fmt::Write as _;

use super::{CellKind, Mesh};
use crate::error::{Error, Result};

/// Parse the ASCII format:
///
/// ```text
/// d nv nc kind        # kind is `simplex` or `cube`
/// x y [z]             # nv vertex lines
/// i0 i1 ...           # nc cell lines
/// ```
///
/// Cube cells list vertex `i` at the corner whose coordinate j is bit j of i.
pub fn load_mesh(name: &str, text: &str) -> Result<Mesh> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(n, l)| (n + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let perr = |line: usize, msg: String| Error::Parse { line, msg };

    let (hline, header) = lines.next().ok_or_else(|| perr(0, "empty document".into()))?;
    let h: Vec<&str> = header.split_whitespace().collect();
    if h.len() != 4 {
        return Err(perr(hline, "header must read `d nv nc kind`".into()));
    }
    let num = |s: &str, what: &str| s.parse::<usize>().map_err(|_| perr(hline, format!("bad {what} `{s}`")));
    let dim = num(h[0], "dimension")?;
    let nv = num(h[1], "vertex count")?;
    let nc = num(h[2], "cell count")?;
    let kind = match h[3] {
        "simplex" => CellKind::Simplex,
        "cube" => CellKind::Cube,
        other => return Err(perr(hline, format!("unknown cell kind `{other}`"))),
    };
    if !(1..=3).contains(&dim) {
        return Err(perr(hline, format!("dimension {dim} is not supported")));
    }

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, l) = lines.next().ok_or_else(|| perr(0, "missing vertex lines".into()))?;
        let vals: Vec<f64> = l
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| perr(ln, format!("bad coordinate `{t}`"))))
            .collect::<Result<_>>()?;
        if vals.len() != dim || vals.iter().any(|v| !v.is_finite()) {
            return Err(perr(ln, format!("expected {dim} finite coordinates")));
        }
        let mut p = [0.0; 3];
        p[..dim].copy_from_slice(&vals);
        vertices.push(p);
    }
    let per_cell = kind.n_vertices(dim);
    let mut cells = Vec::with_capacity(nc);
    for _ in 0..nc {
        let (ln, l) = lines.next().ok_or_else(|| perr(0, "missing cell lines".into()))?;
        let ids: Vec<usize> = l
            .split_whitespace()
            .map(|t| t.parse::<usize>().map_err(|_| perr(ln, format!("bad vertex index `{t}`"))))
            .collect::<Result<_>>()?;
        if ids.len() != per_cell {
            return Err(perr(ln, format!("expected {per_cell} vertex indices")));
        }
        if let Some(&bad) = ids.iter().find(|&&i| i >= nv) {
            return Err(perr(ln, format!("vertex index {bad} out of range")));
        }
        cells.push(ids);
    }
    if let Some((ln, _)) = lines.next() {
        return Err(perr(ln, "trailing content".into()));
    }
    Mesh::new(name, dim, kind, vertices, cells)
}

/// Serialize in the format read by [`load_mesh`].
pub fn write_mesh(mesh: &Mesh) -> String {
    let d = mesh.dim();
    let mut s = format!("{} {} {} {}\n", d, mesh.vertices().len(), mesh.n_cells(), mesh.kind().name());
    for v in mesh.vertices() {
        let coords: Vec<String> = v[..d].iter().map(|x| format!("{x:?}")).collect();
        let _ = writeln!(s, "{}", coords.join(" "));
    }
    for c in mesh.cells() {
        let ids: Vec<String> = c.iter().map(|i| i.to_string()).collect();
        let _ = writeln!(s, "{}", ids.join(" "));
    }
    s
}
