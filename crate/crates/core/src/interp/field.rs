use crate::forms::{exterior_derivative, n_components, Point, PolyForm};

/// A form on physical space that can be sampled with its exterior derivative.
pub trait FormField {
    fn dim(&self) -> usize;
    fn degree(&self) -> usize;
    /// Components of the form at x, in increasing-index order.
    fn eval(&self, x: &Point) -> Vec<f64>;
    /// Components of the exterior derivative at x; empty when degree = dim.
    fn eval_d(&self, x: &Point) -> Vec<f64>;
}

/// A polynomial form together with its derivative.
#[derive(Clone, Debug)]
pub struct PolyField {
    u: PolyForm<f64>,
    du: Option<PolyForm<f64>>,
}

impl PolyField {
    pub fn new(u: PolyForm<f64>) -> Self {
        let du = (u.degree() < u.dim()).then(|| exterior_derivative(&u).expect("degree below dimension"));
        PolyField { u, du }
    }

    pub fn form(&self) -> &PolyForm<f64> {
        &self.u
    }

    /// The derivative as a field of its own.
    pub fn derivative(&self) -> Option<PolyField> {
        self.du.clone().map(PolyField::new)
    }
}

impl FormField for PolyField {
    fn dim(&self) -> usize {
        self.u.dim()
    }

    fn degree(&self) -> usize {
        self.u.degree()
    }

    fn eval(&self, x: &Point) -> Vec<f64> {
        self.u.eval(&x[..self.u.dim()])
    }

    fn eval_d(&self, x: &Point) -> Vec<f64> {
        self.du.as_ref().map_or_else(Vec::new, |du| du.eval(&x[..du.dim()]))
    }
}

/// A field given by closures for the form and its derivative.
pub struct FnField<F, G> {
    dim: usize,
    degree: usize,
    f: F,
    df: G,
}

impl<F, G> FnField<F, G>
where
    F: Fn(&Point) -> Vec<f64>,
    G: Fn(&Point) -> Vec<f64>,
{
    pub fn new(dim: usize, degree: usize, f: F, df: G) -> Self {
        FnField { dim, degree, f, df }
    }
}

impl<F, G> FormField for FnField<F, G>
where
    F: Fn(&Point) -> Vec<f64>,
    G: Fn(&Point) -> Vec<f64>,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn degree(&self) -> usize {
        self.degree
    }

    fn eval(&self, x: &Point) -> Vec<f64> {
        let v = (self.f)(x);
        debug_assert_eq!(v.len(), n_components(self.dim, self.degree));
        v
    }

    fn eval_d(&self, x: &Point) -> Vec<f64> {
        if self.degree >= self.dim {
            return Vec::new();
        }
        (self.df)(x)
    }
}

/// The derivative du of a field, seen as a closed field.
pub struct Derivative<'a>(pub &'a dyn FormField);

impl FormField for Derivative<'_> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn degree(&self) -> usize {
        self.0.degree() + 1
    }

    fn eval(&self, x: &Point) -> Vec<f64> {
        self.0.eval_d(x)
    }

    fn eval_d(&self, _x: &Point) -> Vec<f64> {
        if self.degree() >= self.dim() {
            return Vec::new();
        }
        vec![0.0; n_components(self.dim(), self.degree() + 1)]
    }
}
