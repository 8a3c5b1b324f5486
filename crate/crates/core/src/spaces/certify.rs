use std::collections::HashMap;

use num::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{generators, Family, FamilySpec};
use crate::error::Result;
use crate::forms::{exterior_derivative, koszul, poincare_regularized, pullback, AffineMap, BumpWeight, FormIndex, Monomial, PolyForm};
use crate::linalg::{ExactSpan, SparseVec};
use crate::mesh::Mesh;
use crate::scalar::{Rational, Scalar};

type Q = Rational;

/// Column numbering for (index, monomial) keys, assigned on first sight.
#[derive(Clone, Debug, Default)]
pub struct KeySpace {
    map: HashMap<(FormIndex, Monomial), usize>,
}

impl KeySpace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn vector(&mut self, f: &PolyForm<Q>) -> SparseVec {
        let mut v: SparseVec = f
            .terms()
            .map(|(i, m, c)| {
                let n = self.map.len();
                (*self.map.entry((i, m)).or_insert(n), c.clone())
            })
            .collect();
        v.sort_by_key(|e| e.0);
        v
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DimensionCertificate {
    pub spec: FamilySpec,
    pub generators: usize,
    /// Exact rank of the generator set.
    pub rank: usize,
    /// Generators kept by pivoted elimination, in scan order.
    pub independent: Vec<usize>,
}

/// Exact rank of the defining generators.
pub fn dimension_certificate(spec: &FamilySpec) -> DimensionCertificate {
    let gens = generators::<Q>(spec);
    let mut keys = KeySpace::new();
    let mut span = ExactSpan::new();
    let independent: Vec<usize> = (0..gens.len()).filter(|&i| span.insert(&keys.vector(&gens[i]))).collect();
    DimensionCertificate { spec: *spec, generators: gens.len(), rank: independent.len(), independent }
}

/// Outcome of an exact membership test; `witness` describes the first failure.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Certificate {
    pub holds: bool,
    pub checked: usize,
    pub witness: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvarianceReport {
    /// Pullback by a random rational dilation plus translation stays in the span.
    pub dilation_translation: Certificate,
    /// u ↦ x⌟du stays in the span.
    pub koszul_d: Certificate,
}

impl InvarianceReport {
    pub fn holds(&self) -> bool {
        self.dilation_translation.holds && self.koszul_d.holds
    }
}

struct Span {
    keys: KeySpace,
    span: ExactSpan,
}

impl Span {
    fn of(forms: &[PolyForm<Q>]) -> Self {
        let mut keys = KeySpace::new();
        let mut span = ExactSpan::new();
        for f in forms {
            let v = keys.vector(f);
            span.insert(&v);
        }
        Span { keys, span }
    }

    fn contains(&mut self, f: &PolyForm<Q>) -> bool {
        let v = self.keys.vector(f);
        self.span.contains(&v)
    }
}

fn membership(span: &mut Span, images: impl Iterator<Item = (PolyForm<Q>, PolyForm<Q>)>, what: &str) -> Certificate {
    let mut checked = 0;
    for (src, img) in images {
        checked += 1;
        if !span.contains(&img) {
            return Certificate {
                holds: false,
                checked,
                witness: Some(format!("{what} of [{src}] is [{img}], outside the span")),
            };
        }
    }
    Certificate { holds: true, checked, witness: None }
}

fn random_rational(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> Q {
    let den = rng.random_range(1..=7);
    Q::from_ratio(rng.random_range(lo * den..=hi * den), den)
}

/// Exact invariance checks for the span of arbitrary forms.
pub fn check_span_invariance(forms: &[PolyForm<Q>], seed: u64) -> InvarianceReport {
    let mut span = Span::of(forms);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = forms.first().map_or(1, |f| f.dim());
    let mut s = random_rational(&mut rng, -2, 2);
    while s.is_zero() || s.abs() == Q::from_i64(1) {
        s = random_rational(&mut rng, -2, 2);
    }
    let t: Vec<Q> = (0..dim).map(|_| random_rational(&mut rng, -3, 3)).collect();
    let matrix = (0..dim).map(|i| (0..dim).map(|j| if i == j { s.clone() } else { Q::from_i64(0) }).collect()).collect();
    let psi = AffineMap::new(matrix, t).expect("nonzero dilation");
    let dil = membership(
        &mut span,
        forms.iter().map(|f| (f.clone(), pullback(&psi, f).expect("matching dimension"))),
        &format!("pullback by x -> {s}x + b"),
    );
    let kd = membership(
        &mut span,
        forms
            .iter()
            .filter(|f| f.degree() < f.dim())
            .map(|f| (f.clone(), koszul(&exterior_derivative(f).expect("degree below dimension")).expect("positive degree"))),
        "x-contraction of the derivative",
    );
    InvarianceReport { dilation_translation: dil, koszul_d: kd }
}

/// Generators of the family on a cell given by its reference-to-physical map.
fn cell_generators(spec: &FamilySpec, cell: &AffineMap<Q>) -> Vec<PolyForm<Q>> {
    let gens = generators::<Q>(spec);
    match spec.family {
        Family::Tensor => {
            let inv = cell.inverse();
            gens.iter().map(|g| pullback(&inv, g).expect("matching dimension")).collect()
        }
        _ => gens,
    }
}

/// Dilation/translation and x⌟d invariance of the family's span on a cell.
pub fn check_koszul_invariance(spec: &FamilySpec, cell: &AffineMap<Q>, seed: u64) -> InvarianceReport {
    check_span_invariance(&cell_generators(spec, cell), seed)
}

/// Exact membership R(du) ∈ W for every generator u of W on the cell.
pub fn check_poincare_preservation(spec: &FamilySpec, cell: &AffineMap<Q>, w: &BumpWeight<Q>) -> Result<Certificate> {
    let gens = cell_generators(spec, cell);
    let mut span = Span::of(&gens);
    if spec.form_degree >= spec.dim {
        return Ok(Certificate { holds: true, checked: 0, witness: None });
    }
    let mut images = Vec::with_capacity(gens.len());
    for g in &gens {
        let dg = exterior_derivative(g)?;
        if dg.is_zero() {
            continue;
        }
        images.push((g.clone(), poincare_regularized(w, &dg)?));
    }
    Ok(membership(&mut span, images.into_iter(), "lifted derivative"))
}

/// Reference-to-physical map of a mesh cell with exact rational entries.
pub fn exact_cell_map(mesh: &Mesh, k: usize) -> AffineMap<Q> {
    let m = mesh.cell_map(k);
    let matrix = m.matrix().iter().map(|r| r.iter().map(|&v| Q::from_f64(v)).collect()).collect();
    let offset = m.offset().iter().map(|&v| Q::from_f64(v)).collect();
    AffineMap::new(matrix, offset).expect("validated cell")
}
