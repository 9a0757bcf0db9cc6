//! Regular cubic grids and the sampled fields that live on them.
//!
//! Nodes are stored in x-fastest lexicographic order: the flat index of node
//! `(i, j, k)` is `i + n * (j + n * k)`. Vector fields store their three
//! components interleaved per node.

use crate::error::{Error, Result};

/// Uniform node-collocated grid covering the cube `origin + [0, (n-1)h]^3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid3 {
    origin: [f64; 3],
    spacing: f64,
    n: usize,
}

impl Grid3 {
    pub fn new(origin: [f64; 3], spacing: f64, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidGrid(format!("need n >= 2 nodes per axis, got {n}")));
        }
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::InvalidGrid(format!("spacing must be positive, got {spacing}")));
        }
        if origin.iter().any(|o| !o.is_finite()) {
            return Err(Error::InvalidGrid("origin must be finite".into()));
        }
        Ok(Self { origin, spacing, n })
    }

    /// Grid with `n` nodes per axis spanning `[-half_width, half_width]^3`.
    pub fn centered(n: usize, half_width: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidGrid(format!("need n >= 2 nodes per axis, got {n}")));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidGrid(format!("half-width must be positive, got {half_width}")));
        }
        let h = 2.0 * half_width / (n - 1) as f64;
        Self::new([-half_width; 3], h, n)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn origin(&self) -> [f64; 3] {
        self.origin
    }

    /// Total number of nodes, `n^3`.
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.n * (j + self.n * k)
    }

    #[inline]
    pub fn node_of(&self, idx: usize) -> [usize; 3] {
        let n = self.n;
        [idx % n, (idx / n) % n, idx / (n * n)]
    }

    #[inline]
    pub fn node(&self, i: usize, j: usize, k: usize) -> [f64; 3] {
        let h = self.spacing;
        [self.origin[0] + h * i as f64, self.origin[1] + h * j as f64, self.origin[2] + h * k as f64]
    }

    #[inline]
    pub fn position(&self, idx: usize) -> [f64; 3] {
        let [i, j, k] = self.node_of(idx);
        self.node(i, j, k)
    }

    /// Whether every index of `node` lies at least `margin` nodes away from the faces.
    #[inline]
    pub fn is_interior(&self, node: [usize; 3], margin: usize) -> bool {
        node.iter().all(|&c| c >= margin && c + margin < self.n)
    }

    /// True for nodes on the outermost shell (any index at 0 or n-1).
    #[inline]
    pub fn is_boundary(&self, node: [usize; 3]) -> bool {
        !self.is_interior(node, 1)
    }

    /// Trapezoidal-rule weight of a node: `h^3` halved once per face it touches.
    #[inline]
    pub fn trapezoid_weight(&self, idx: usize) -> f64 {
        let node = self.node_of(idx);
        let mut w = self.spacing.powi(3);
        for c in node {
            if c == 0 || c + 1 == self.n {
                w *= 0.5;
            }
        }
        w
    }

    /// Grids are compatible when they describe bit-identical lattices.
    pub fn same_as(&self, other: &Grid3) -> bool {
        self.n == other.n
            && self.spacing.to_bits() == other.spacing.to_bits()
            && self.origin.iter().zip(other.origin.iter()).all(|(a, b)| a.to_bits() == b.to_bits())
    }

    pub(crate) fn ensure_same(&self, other: &Grid3) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub(crate) fn ensure_min_n(&self, required: usize) -> Result<()> {
        if self.n < required {
            Err(Error::GridTooSmall { n: self.n, required })
        } else {
            Ok(())
        }
    }
}

/// Pointwise decay bound `|v(x)| <= c (1 + |x|)^(-gamma)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayClass {
    pub gamma: f64,
    pub c: f64,
}

/// Exponent the pointwise reconstruction formulas require (gamma > 3).
pub const POINTWISE_DECAY_THRESHOLD: f64 = 3.0;
/// Exponent of the weighted-Sobolev hypothesis (gamma > 2).
pub const WEIGHTED_DECAY_THRESHOLD: f64 = 2.0;

impl DecayClass {
    pub fn new(gamma: f64, c: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::InvalidDecay(format!("gamma must be positive, got {gamma}")));
        }
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidDecay(format!("c must be positive, got {c}")));
        }
        Ok(Self { gamma, c })
    }

    /// The bound `c (1 + |x|)^(-gamma)`.
    pub fn bound_at(&self, x: [f64; 3]) -> f64 {
        self.c * (1.0 + norm3(x)).powf(-self.gamma)
    }

    /// Fails unless gamma strictly exceeds `threshold`.
    pub fn require_gamma_above(&self, threshold: f64) -> Result<()> {
        if self.gamma > threshold {
            Ok(())
        } else {
            Err(Error::SlowDecay { gamma: self.gamma, required: threshold })
        }
    }
}

/// Which decay hypothesis an operation enforces on tagged inputs.
///
/// Untagged fields carry no claim and are accepted as-is; a tagged field must
/// have a large enough exponent and must actually satisfy its own bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DecayRequirement {
    /// gamma > 3, the pointwise condition under which the potential formulas converge.
    #[default]
    Pointwise,
    /// gamma > 2, the weighted-Sobolev condition.
    Weighted,
    /// No check.
    Waived,
}

impl DecayRequirement {
    pub fn threshold(self) -> Option<f64> {
        match self {
            DecayRequirement::Pointwise => Some(POINTWISE_DECAY_THRESHOLD),
            DecayRequirement::Weighted => Some(WEIGHTED_DECAY_THRESHOLD),
            DecayRequirement::Waived => None,
        }
    }

    pub fn validate_scalar(self, field: &ScalarField) -> Result<()> {
        match (self.threshold(), field.decay()) {
            (Some(t), Some(d)) => {
                d.require_gamma_above(t)?;
                field.check_decay(d).into_result()
            }
            _ => Ok(()),
        }
    }

    pub fn validate_vector(self, field: &VectorField) -> Result<()> {
        match (self.threshold(), field.decay()) {
            (Some(t), Some(d)) => {
                d.require_gamma_above(t)?;
                field.check_decay(d).into_result()
            }
            _ => Ok(()),
        }
    }
}

/// Outcome of checking a sampled field against a [`DecayClass`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayCheck {
    pub holds: bool,
    pub worst_node: [usize; 3],
    /// Maximum over nodes of `|v(x)| (1+|x|)^gamma / c`; the bound holds iff this is <= 1.
    pub worst_ratio: f64,
}

impl DecayCheck {
    pub fn into_result(self) -> Result<()> {
        if self.holds {
            Ok(())
        } else {
            Err(Error::DecayViolation { node: self.worst_node, ratio: self.worst_ratio })
        }
    }
}

fn decay_scan(grid: &Grid3, decay: DecayClass, magnitude: impl Fn(usize) -> f64) -> DecayCheck {
    let mut worst = (0usize, f64::NEG_INFINITY);
    for idx in 0..grid.len() {
        let x = grid.position(idx);
        let ratio = magnitude(idx) * (1.0 + norm3(x)).powf(decay.gamma) / decay.c;
        if ratio > worst.1 {
            worst = (idx, ratio);
        }
    }
    DecayCheck { holds: worst.1 <= 1.0, worst_node: grid.node_of(worst.0), worst_ratio: worst.1 }
}

#[inline]
pub fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn first_non_finite<T>(grid: &Grid3, values: &[T], finite: impl Fn(&T) -> bool) -> Result<()> {
    match values.iter().position(|v| !finite(v)) {
        None => Ok(()),
        Some(idx) => Err(Error::NonFinite { node: grid.node_of(idx), position: grid.position(idx) }),
    }
}

/// One real value per grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid3,
    values: Vec<f64>,
    decay: Option<DecayClass>,
}

impl ScalarField {
    pub fn new(grid: Grid3, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch { expected: grid.len(), found: values.len() });
        }
        first_non_finite(&grid, &values, |v| v.is_finite())?;
        Ok(Self { grid, values, decay: None })
    }

    pub fn zeros(grid: Grid3) -> Self {
        Self { grid, values: vec![0.0; grid.len()], decay: None }
    }

    /// Evaluates `f` at every node.
    pub fn sample(grid: Grid3, f: impl Fn([f64; 3]) -> f64) -> Result<Self> {
        let values = (0..grid.len()).map(|idx| f(grid.position(idx))).collect();
        Self::new(grid, values)
    }

    /// Internal constructor for operator outputs that are finite by construction.
    pub(crate) fn from_raw(grid: Grid3, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values, decay: None }
    }

    pub fn with_decay(mut self, decay: Option<DecayClass>) -> Self {
        self.decay = decay;
        self
    }

    pub fn grid(&self) -> &Grid3 {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn decay(&self) -> Option<DecayClass> {
        self.decay
    }

    pub fn at(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[self.grid.index(i, j, k)]
    }

    pub fn check_decay(&self, decay: DecayClass) -> DecayCheck {
        decay_scan(&self.grid, decay, |idx| self.values[idx].abs())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Trapezoidal L2 norm over the grid cube.
    pub fn l2_norm(&self) -> f64 {
        self.values.iter().enumerate().map(|(idx, v)| self.grid.trapezoid_weight(idx) * v * v).sum::<f64>().sqrt()
    }

    pub fn scale(&self, alpha: f64) -> Self {
        Self::from_raw(self.grid, self.values.iter().map(|v| alpha * v).collect())
    }

    /// `alpha * self + beta * other`.
    pub fn combine(&self, alpha: f64, other: &ScalarField, beta: f64) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| alpha * a + beta * b).collect();
        Ok(Self::from_raw(self.grid, values))
    }

    pub fn sub(&self, other: &ScalarField) -> Result<Self> {
        self.combine(1.0, other, -1.0)
    }
}

/// Three real components per grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: Grid3,
    values: Vec<[f64; 3]>,
    decay: Option<DecayClass>,
}

impl VectorField {
    pub fn new(grid: Grid3, values: Vec<[f64; 3]>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch { expected: grid.len(), found: values.len() });
        }
        first_non_finite(&grid, &values, |v| v.iter().all(|c| c.is_finite()))?;
        Ok(Self { grid, values, decay: None })
    }

    pub fn zeros(grid: Grid3) -> Self {
        Self { grid, values: vec![[0.0; 3]; grid.len()], decay: None }
    }

    pub fn sample(grid: Grid3, f: impl Fn([f64; 3]) -> [f64; 3]) -> Result<Self> {
        let values = (0..grid.len()).map(|idx| f(grid.position(idx))).collect();
        Self::new(grid, values)
    }

    /// Assembles a vector field from three scalar component fields.
    pub fn from_components(components: [&ScalarField; 3]) -> Result<Self> {
        let grid = components[0].grid;
        components[1].grid.ensure_same(&grid)?;
        components[2].grid.ensure_same(&grid)?;
        let values = (0..grid.len())
            .map(|idx| [components[0].values[idx], components[1].values[idx], components[2].values[idx]])
            .collect();
        Ok(Self::from_raw(grid, values))
    }

    pub(crate) fn from_raw(grid: Grid3, values: Vec<[f64; 3]>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values, decay: None }
    }

    pub fn with_decay(mut self, decay: Option<DecayClass>) -> Self {
        self.decay = decay;
        self
    }

    pub fn grid(&self) -> &Grid3 {
        &self.grid
    }

    pub fn values(&self) -> &[[f64; 3]] {
        &self.values
    }

    pub fn into_values(self) -> Vec<[f64; 3]> {
        self.values
    }

    pub fn decay(&self) -> Option<DecayClass> {
        self.decay
    }

    pub fn at(&self, i: usize, j: usize, k: usize) -> [f64; 3] {
        self.values[self.grid.index(i, j, k)]
    }

    /// Copies out component `c` (0-based) as a scalar field.
    pub fn component(&self, c: usize) -> ScalarField {
        ScalarField::from_raw(self.grid, self.values.iter().map(|v| v[c]).collect())
    }

    /// Checks `|v(x)| <= c (1+|x|)^(-gamma)` with the Euclidean norm at every node.
    pub fn check_decay(&self, decay: DecayClass) -> DecayCheck {
        decay_scan(&self.grid, decay, |idx| norm3(self.values[idx]))
    }

    /// Largest Euclidean norm over all nodes.
    pub fn max_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(norm3(*v)))
    }

    /// Largest Euclidean norm over nodes at least `margin` nodes from every face.
    pub fn max_norm_interior(&self, margin: usize) -> f64 {
        self.values
            .iter()
            .enumerate()
            .filter(|(idx, _)| self.grid.is_interior(self.grid.node_of(*idx), margin))
            .fold(0.0, |m, (_, v)| m.max(norm3(*v)))
    }

    /// Largest Euclidean norm over the outermost node shell.
    pub fn max_norm_boundary(&self) -> f64 {
        self.values
            .iter()
            .enumerate()
            .filter(|(idx, _)| self.grid.is_boundary(self.grid.node_of(*idx)))
            .fold(0.0, |m, (_, v)| m.max(norm3(*v)))
    }

    pub fn l2_norm(&self) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(idx, v)| self.grid.trapezoid_weight(idx) * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]))
            .sum::<f64>()
            .sqrt()
    }

    pub fn scale(&self, alpha: f64) -> Self {
        Self::from_raw(self.grid, self.values.iter().map(|v| v.map(|c| alpha * c)).collect())
    }

    pub fn combine(&self, alpha: f64, other: &VectorField, beta: f64) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        let values =
            self.values.iter().zip(&other.values).map(|(a, b)| [0, 1, 2].map(|c| alpha * a[c] + beta * b[c])).collect();
        Ok(Self::from_raw(self.grid, values))
    }

    pub fn add(&self, other: &VectorField) -> Result<Self> {
        self.combine(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &VectorField) -> Result<Self> {
        self.combine(1.0, other, -1.0)
    }

    /// `||self - reference||_2 / ||reference||_2` with trapezoidal weights.
    pub fn relative_l2_error(&self, reference: &VectorField) -> Result<f64> {
        let diff = self.sub(reference)?;
        Ok(diff.l2_norm() / reference.l2_norm())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centered_grid_examples() {
        let g = Grid3::centered(3, 1.0).unwrap();
        assert_eq!(g.spacing(), 1.0);
        assert_eq!(g.node(0, 0, 0), [-1.0; 3]);
        assert_eq!(g.node(1, 1, 1), [0.0; 3]);
        assert_eq!(g.node(2, 0, 1), [1.0, -1.0, 0.0]);

        let g = Grid3::centered(2, 0.5).unwrap();
        assert_eq!(g.spacing(), 1.0);
        assert_eq!(g.node(1, 1, 0), [0.5, 0.5, -0.5]);

        let g = Grid3::centered(65, 8.0).unwrap();
        assert_eq!(g.spacing(), 0.25);
        assert_eq!(g.node(32, 32, 32), [0.0; 3]);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid3::centered(1, 1.0).is_err());
        assert!(Grid3::centered(4, 0.0).is_err());
        assert!(Grid3::centered(4, -2.0).is_err());
        assert!(Grid3::new([0.0; 3], 0.0, 4).is_err());
    }

    #[test]
    fn x_fastest_indexing() {
        let g = Grid3::centered(4, 1.0).unwrap();
        assert_eq!(g.index(1, 0, 0), 1);
        assert_eq!(g.index(0, 1, 0), 4);
        assert_eq!(g.index(0, 0, 1), 16);
        for idx in 0..g.len() {
            let [i, j, k] = g.node_of(idx);
            assert_eq!(g.index(i, j, k), idx);
        }
    }

    #[test]
    fn sampling() {
        let g = Grid3::centered(5, 2.0).unwrap();
        let zero = ScalarField::sample(g, |_| 0.0).unwrap();
        assert!(zero.values().iter().all(|&v| v == 0.0));

        let gauss = ScalarField::sample(g, |x| (-norm3(x).powi(2)).exp()).unwrap();
        assert_eq!(gauss.at(2, 2, 2), 1.0);

        let err = ScalarField::sample(g, |x| 1.0 / norm3(x)).unwrap_err();
        match err {
            Error::NonFinite { node, .. } => assert_eq!(node, [2, 2, 2]),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn decay_examples() {
        let g = Grid3::centered(17, 4.0).unwrap();
        let zero = VectorField::zeros(g);
        assert!(zero.check_decay(DecayClass::new(4.0, 1e-3).unwrap()).holds);

        let gauss = VectorField::sample(g, |x| [(-norm3(x).powi(2)).exp(), 0.0, 0.0]).unwrap();
        let check = gauss.check_decay(DecayClass::new(4.0, 16.0).unwrap());
        assert!(check.holds);
        // e^{-r^2}(1+r)^4 peaks at r = 1 with value 16/e.
        assert!(check.worst_ratio <= 16.0 / std::f64::consts::E / 16.0 + 1e-12);

        let constant = VectorField::sample(g, |_| [1.0, 0.0, 0.0]).unwrap();
        let check = constant.check_decay(DecayClass::new(4.0, 1.0).unwrap());
        assert!(!check.holds);
        for c in check.worst_node {
            assert!(c == 0 || c == 16);
        }
    }

    #[test]
    fn trapezoid_weights_sum_to_volume() {
        let g = Grid3::centered(9, 1.0).unwrap();
        let total: f64 = (0..g.len()).map(|i| g.trapezoid_weight(i)).sum();
        assert!((total - 8.0).abs() < 1e-12);
    }
}
