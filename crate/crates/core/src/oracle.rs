use crate::geometry::Viewpoint;

/// Scalar loss of a viewpoint, the only access an attack gets to the model.
///
/// Implementations count every call so that query budgets can be audited.
pub trait ViewpointOracle: Sync {
    fn loss(&self, v: &Viewpoint) -> f64;

    /// Number of `loss` calls made so far.
    fn queries(&self) -> u64;
}
