use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;
use pforms::assembly::MaterialField;
use pforms::mesh::{builtin_mesh, load_mesh, CellKind, Mesh, BUILTIN_NAMES};
use pforms::spaces::{Family, FamilySpec};

use crate::CliError;

/// Inclusive degree range written `a..b` or a single `a`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PRange {
    pub lo: usize,
    pub hi: usize,
}

impl PRange {
    pub fn iter(self) -> impl Iterator<Item = usize> {
        self.lo..=self.hi
    }
}

impl FromStr for PRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = match s.split_once("..") {
            Some((a, b)) => (a, b.strip_prefix('=').unwrap_or(b)),
            None => (s, s),
        };
        let parse = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("bad degree `{t}` in `{s}`"));
        let (lo, hi) = (parse(a)?, parse(b)?);
        if lo == 0 {
            return Err(format!("degree range `{s}` must start at 1 or above"));
        }
        if hi < lo {
            return Err(format!("degree range `{s}` is empty"));
        }
        Ok(PRange { lo, hi })
    }
}

/// Spurious window `a,b`, relative to the first positive eigenvalue.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Window {
    pub a: f64,
    pub b: f64,
}

impl FromStr for Window {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s.split_once(',').ok_or_else(|| format!("window `{s}` must be `a,b`"))?;
        let parse = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("bad number `{t}` in `{s}`"));
        let w = Window { a: parse(a)?, b: parse(b)? };
        if !(w.a >= 0.0 && w.a < w.b) {
            return Err(format!("window `{s}` needs 0 <= a < b"));
        }
        Ok(w)
    }
}

/// Flags shared by every subcommand.
#[derive(Args, Clone, Debug)]
pub struct Common {
    /// Built-in mesh name or path to a mesh file.
    #[arg(long, default_value = "square-tri")]
    pub mesh: String,
    /// Uniform refinement level for built-in meshes.
    #[arg(long, default_value_t = 0)]
    pub refine: usize,
    /// ned1, ned2 or tensor; defaults to ned1 on simplices and tensor on cubes.
    #[arg(long)]
    pub family: Option<String>,
    /// Form degree.
    #[arg(long)]
    pub l: Option<usize>,
    /// Polynomial degrees, `a..b` or `a`.
    #[arg(long)]
    pub p: Option<PRange>,
    /// Per-cell material file.
    #[arg(long)]
    pub materials: Option<PathBuf>,
    /// Output directory; CSV goes to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed for randomized inputs.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Turn tolerance breaches into exit code 2.
    #[arg(long)]
    pub assert: bool,
    /// Tolerance override.
    #[arg(long)]
    pub tol: Option<f64>,
}

impl Common {
    pub fn load_mesh(&self) -> Result<Mesh, CliError> {
        if BUILTIN_NAMES.contains(&self.mesh.as_str()) {
            return Ok(builtin_mesh(&self.mesh, self.refine)?);
        }
        let path = Path::new(&self.mesh);
        if !path.exists() {
            return Err(CliError::Config(format!(
                "`{}` is neither a built-in mesh ({}) nor a file",
                self.mesh,
                BUILTIN_NAMES.join(", ")
            )));
        }
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Ok(load_mesh(&self.mesh, &text)?)
    }

    pub fn family(&self, kind: CellKind) -> Result<Family, CliError> {
        match &self.family {
            Some(f) => {
                let family = Family::from_str(f)?;
                if family.cell_kind() != kind {
                    return Err(CliError::Config(format!("family {family} does not live on {} cells", kind.name())));
                }
                Ok(family)
            }
            None => Ok(default_family(kind)),
        }
    }

    /// All families for `kind`, or the one requested.
    pub fn families(&self, kind: CellKind) -> Result<Vec<Family>, CliError> {
        match &self.family {
            Some(_) => Ok(vec![self.family(kind)?]),
            None => Ok(match kind {
                CellKind::Simplex => vec![Family::First, Family::Second],
                CellKind::Cube => vec![Family::Tensor],
            }),
        }
    }

    pub fn p_range(&self, default: PRange) -> PRange {
        self.p.unwrap_or(default)
    }

    /// Specs for the sweep; ℓ must be below the dimension.
    pub fn sweep(&self, mesh: &Mesh, default_p: PRange) -> Result<Vec<FamilySpec>, CliError> {
        let family = self.family(mesh.kind())?;
        let l = self.l.unwrap_or(1);
        if l >= mesh.dim() {
            return Err(CliError::Config(format!("form degree {l} must be below the dimension {}", mesh.dim())));
        }
        self.p_range(default_p).iter().map(|p| Ok(FamilySpec::new(family, p, l, mesh.dim())?)).collect()
    }

    pub fn materials(&self, mesh: &Mesh) -> Result<MaterialField, CliError> {
        match &self.materials {
            Some(path) => Ok(MaterialField::load(path, mesh)?),
            None => Ok(MaterialField::identity(mesh.n_cells(), mesh.dim())),
        }
    }
}

pub fn default_family(kind: CellKind) -> Family {
    match kind {
        CellKind::Simplex => Family::First,
        CellKind::Cube => Family::Tensor,
    }
}

/// Whether the mesh covers the unit square or cube, where exact spectra
/// are known.
pub fn is_unit_box(mesh: &Mesh) -> bool {
    let d = mesh.dim();
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for v in mesh.vertices() {
        for i in 0..d {
            lo[i] = lo[i].min(v[i]);
            hi[i] = hi[i].max(v[i]);
        }
    }
    let reference = match mesh.kind() {
        CellKind::Simplex => (1..=d).fold(1.0, |v, i| v * 2.0 / i as f64),
        CellKind::Cube => 2f64.powi(d as i32),
    };
    let volume: f64 = (0..mesh.n_cells()).map(|k| mesh.cell_map(k).det().abs() * reference).sum();
    (0..d).all(|i| lo[i].abs() < 1e-12 && (hi[i] - 1.0).abs() < 1e-12) && (volume - 1.0).abs() < 1e-10
}
