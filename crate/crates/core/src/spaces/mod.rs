//! Local polynomial form spaces: both Nédélec families on simplices and the
//! tensor-product family on affine cube images.

mod certify;
mod local;
mod trace;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use certify::{
    check_koszul_invariance, check_poincare_preservation, check_span_invariance, dimension_certificate, exact_cell_map,
    Certificate, DimensionCertificate, InvarianceReport, KeySpace,
};
pub use local::{apply_component_map, local_space, reference_basis, LocalBasis, ReferenceBasis};
pub use trace::{facet_trace, mesh_facet_trace, trace_minors, FacetFrame};

use crate::error::{Error, Result};
use crate::forms::{koszul, FormIndex, Monomial, PolyForm};
use crate::mesh::CellKind;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    /// P_{p−1}Λ^ℓ + x⌟P_{p−1}Λ^{ℓ+1} on simplices.
    #[serde(rename = "ned1")]
    First,
    /// P_pΛ^ℓ on simplices.
    #[serde(rename = "ned2")]
    Second,
    /// Anisotropic tensor-product forms on cube images.
    #[serde(rename = "tensor")]
    Tensor,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::First => "ned1",
            Family::Second => "ned2",
            Family::Tensor => "tensor",
        }
    }

    pub fn cell_kind(self) -> CellKind {
        match self {
            Family::Tensor => CellKind::Cube,
            _ => CellKind::Simplex,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ned1" | "first" => Ok(Family::First),
            "ned2" | "second" => Ok(Family::Second),
            "tensor" => Ok(Family::Tensor),
            other => Err(Error::InvalidSpec(format!("unknown family `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FamilySpec {
    pub family: Family,
    /// Polynomial degree p ≥ 1.
    pub degree: usize,
    /// Form degree ℓ.
    pub form_degree: usize,
    pub dim: usize,
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(d={}, l={}, p={})", self.family, self.dim, self.form_degree, self.degree)
    }
}

impl FamilySpec {
    pub fn new(family: Family, degree: usize, form_degree: usize, dim: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidSpec(format!("dimension {dim} is not supported")));
        }
        if degree == 0 {
            return Err(Error::InvalidSpec("polynomial degree must be at least 1".into()));
        }
        if form_degree > dim {
            return Err(Error::InvalidSpec(format!("form degree {form_degree} exceeds dimension {dim}")));
        }
        Ok(FamilySpec { family, degree, form_degree, dim })
    }

    pub fn cell_kind(&self) -> CellKind {
        self.family.cell_kind()
    }

    pub fn check_kind(&self, kind: CellKind) -> Result<()> {
        if kind != self.cell_kind() {
            return Err(Error::InvalidSpec(format!("{} requires {} cells", self.family, self.cell_kind().name())));
        }
        Ok(())
    }

    /// The (ℓ−1)-form space whose derivatives land in this one.
    pub fn companion(&self) -> Option<FamilySpec> {
        let l = self.form_degree.checked_sub(1)?;
        let p = match self.family {
            Family::Second => self.degree + 1,
            _ => self.degree,
        };
        Some(FamilySpec { form_degree: l, degree: p, ..*self })
    }

    /// Largest coefficient degree: total degree on simplices, degree per
    /// variable on cubes.
    pub fn max_poly_degree(&self) -> usize {
        self.degree
    }
}

/// Generator set exactly as the family is defined; may be linearly dependent.
pub fn generators<S: Scalar>(spec: &FamilySpec) -> Vec<PolyForm<S>> {
    let (d, l, p) = (spec.dim, spec.form_degree, spec.degree);
    let mut out = Vec::new();
    match spec.family {
        Family::First => {
            for idx in FormIndex::all(d, l) {
                for m in Monomial::all_up_to(d, p - 1) {
                    out.push(PolyForm::monomial(d, idx, m, S::one()));
                }
            }
            if l < d {
                for idx in FormIndex::all(d, l + 1) {
                    for m in Monomial::all_up_to(d, p - 1) {
                        out.push(koszul(&PolyForm::monomial(d, idx, m, S::one())).expect("positive degree"));
                    }
                }
            }
        }
        Family::Second => {
            for idx in FormIndex::all(d, l) {
                for m in Monomial::all_up_to(d, p) {
                    out.push(PolyForm::monomial(d, idx, m, S::one()));
                }
            }
        }
        Family::Tensor => {
            for idx in FormIndex::all(d, l) {
                let bounds: Vec<usize> = (0..d).map(|j| if idx.contains(j) { p - 1 } else { p }).collect();
                for m in box_monomials(&bounds) {
                    out.push(PolyForm::monomial(d, idx, m, S::one()));
                }
            }
        }
    }
    out
}

fn box_monomials(bounds: &[usize]) -> Vec<Monomial> {
    let mut out = vec![Monomial::ONE];
    for (axis, &b) in bounds.iter().enumerate() {
        out = out
            .iter()
            .flat_map(|m| {
                (0..=b).map(move |e| {
                    let mut mm = *m;
                    mm.0[axis] = e as u8;
                    mm
                })
            })
            .collect();
    }
    out
}
