/// An element of a normed vector space.
///
/// Collocation never looks inside model outputs; it only forms linear
/// combinations and measures sizes. Scalars implement this with the absolute
/// value, discretized functions with whatever norm is natural for them (the
/// [`crate::lognormal::SpatialFunction`] uses the `H¹₀` seminorm).
pub trait NormedVector: Clone + Send + Sync {
    /// A zero element of the same shape as `self`.
    fn zero_like(&self) -> Self;

    /// `self ← a · self`.
    fn scale(&mut self, a: f64);

    /// `self ← self + a · x`.
    fn axpy(&mut self, a: f64, x: &Self);

    /// The norm of the element.
    fn norm(&self) -> f64;

    /// `‖self − other‖`, by default through a clone.
    fn distance(&self, other: &Self) -> f64 {
        let mut d = self.clone();
        d.axpy(-1.0, other);
        d.norm()
    }
}

impl NormedVector for f64 {
    fn zero_like(&self) -> Self {
        0.0
    }

    fn scale(&mut self, a: f64) {
        *self *= a;
    }

    fn axpy(&mut self, a: f64, x: &Self) {
        *self += a * x;
    }

    fn norm(&self) -> f64 {
        self.abs()
    }

    fn distance(&self, other: &Self) -> f64 {
        (self - other).abs()
    }
}
