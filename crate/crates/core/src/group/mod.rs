//! Carnot groups in exponential coordinates.
//!
//! Two families ship: the Abelian groups `(ℝⁿ, +)` for `n ≤ 3` and the first
//! Heisenberg group `ℍ¹` with the law
//!
//! ```text
//! (x₁,y₁,t₁)·(x₂,y₂,t₂) = (x₁+x₂, y₁+y₂, t₁+t₂ + ½(x₁y₂ − y₁x₂))
//! ```
//!
//! under which inversion is plain coordinate negation and the dilation
//! weights are `(1, 1, 2)`.

mod gauge;

pub use gauge::{AxiomFlags, AxiomReport, AxiomStatus, GaugeKind, HomogeneousGauge, AXIOM_TOLERANCE};

use std::fmt;
use std::ops::Index;

use serde::Serialize;

use crate::error::{invalid, Error, Result};

/// Largest topological dimension handled by the shipped groups.
pub const MAX_DIM: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum GroupKind {
    Euclidean(usize),
    Heisenberg,
}

/// A stratified group realized on `ℝⁿ` through exponential coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CarnotGroup {
    kind: GroupKind,
}

/// A point of a Carnot group given by its exponential coordinates.
#[derive(Clone, Copy, PartialEq)]
pub struct GroupPoint {
    coords: [f64; MAX_DIM],
    dim: u8,
}

impl GroupPoint {
    pub(crate) fn from_array(coords: [f64; MAX_DIM], dim: usize) -> Self {
        GroupPoint {
            coords,
            dim: dim as u8,
        }
    }

    pub(crate) fn from_slice_unchecked(coords: &[f64]) -> Self {
        let mut c = [0.0; MAX_DIM];
        c[..coords.len()].copy_from_slice(coords);
        GroupPoint::from_array(c, coords.len())
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords[..self.dim as usize]
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    /// The first `m` coordinates.
    pub fn horizontal(&self, m: usize) -> &[f64] {
        &self.coords[..m]
    }

    pub fn is_finite(&self) -> bool {
        self.coords().iter().all(|c| c.is_finite())
    }

    /// Largest absolute coordinate difference.
    pub fn max_deviation(&self, other: &GroupPoint) -> f64 {
        self.coords()
            .iter()
            .zip(other.coords())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl Index<usize> for GroupPoint {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.coords()[i]
    }
}

impl fmt::Debug for GroupPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("GroupPoint").field(&self.coords()).finish()
    }
}

/// A rotation of the horizontal layer, stored as an `m × m` orthogonal matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HorizontalRotation {
    matrix: [[f64; MAX_DIM]; MAX_DIM],
    size: usize,
}

impl HorizontalRotation {
    pub fn identity(m: usize) -> Self {
        let mut matrix = [[0.0; MAX_DIM]; MAX_DIM];
        for (i, row) in matrix.iter_mut().enumerate().take(m) {
            row[i] = 1.0;
        }
        HorizontalRotation { matrix, size: m }
    }

    /// Counter-clockwise rotation of a horizontal plane by `theta`.
    pub fn planar(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        let mut matrix = [[0.0; MAX_DIM]; MAX_DIM];
        matrix[0][0] = c;
        matrix[0][1] = -s;
        matrix[1][0] = s;
        matrix[1][1] = c;
        HorizontalRotation { matrix, size: 2 }
    }

    /// Rotation by `theta` in the plane of the first two of `m` coordinates;
    /// the identity when `m < 2`.
    pub fn planar_in(m: usize, theta: f64) -> Self {
        if m < 2 {
            return Self::identity(m);
        }
        let mut r = Self::planar(theta);
        for i in 2..m {
            r.matrix[i][i] = 1.0;
        }
        r.size = m;
        r
    }

    /// Builds a rotation from row-major entries; rejects matrices that are not
    /// orthogonal with determinant one.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        if m == 0 || m > MAX_DIM || rows.iter().any(|r| r.len() != m) {
            return Err(invalid("rotation", "expected a square matrix of size 1..=3"));
        }
        let mut matrix = [[0.0; MAX_DIM]; MAX_DIM];
        for (i, row) in rows.iter().enumerate() {
            matrix[i][..m].copy_from_slice(row);
        }
        for i in 0..m {
            for j in 0..m {
                let dot: f64 = (0..m).map(|k| matrix[i][k] * matrix[j][k]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                if (dot - want).abs() > 1e-10 {
                    return Err(invalid("rotation", "matrix is not orthogonal"));
                }
            }
        }
        if determinant(&matrix, m) < 0.0 {
            return Err(invalid("rotation", "matrix has determinant -1"));
        }
        Ok(HorizontalRotation { matrix, size: m })
    }

    pub fn size(&self) -> usize {
        self.size
    }
}

fn determinant(a: &[[f64; MAX_DIM]; MAX_DIM], m: usize) -> f64 {
    match m {
        1 => a[0][0],
        2 => a[0][0] * a[1][1] - a[0][1] * a[1][0],
        _ => {
            a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
                - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
                + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
        }
    }
}

impl CarnotGroup {
    pub fn euclidean(n: usize) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&n) {
            return Err(invalid("n", format!("Euclidean dimension {n} not in 1..=3")));
        }
        Ok(CarnotGroup {
            kind: GroupKind::Euclidean(n),
        })
    }

    pub fn heisenberg() -> Self {
        CarnotGroup {
            kind: GroupKind::Heisenberg,
        }
    }

    /// Parses one of `r1`, `r2`, `r3`, `h1`.
    pub fn from_id(id: &str) -> Result<Self> {
        match id {
            "r1" => Self::euclidean(1),
            "r2" => Self::euclidean(2),
            "r3" => Self::euclidean(3),
            "h1" => Ok(Self::heisenberg()),
            _ => Err(Error::UnknownIdentifier {
                kind: "group",
                id: id.to_string(),
            }),
        }
    }

    pub fn id(&self) -> &'static str {
        match self.kind {
            GroupKind::Euclidean(1) => "r1",
            GroupKind::Euclidean(2) => "r2",
            GroupKind::Euclidean(_) => "r3",
            GroupKind::Heisenberg => "h1",
        }
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    /// Topological dimension `n`.
    pub fn dim(&self) -> usize {
        match self.kind {
            GroupKind::Euclidean(n) => n,
            GroupKind::Heisenberg => 3,
        }
    }

    /// Dimension `m` of the horizontal layer.
    pub fn horizontal_dim(&self) -> usize {
        match self.kind {
            GroupKind::Euclidean(n) => n,
            GroupKind::Heisenberg => 2,
        }
    }

    /// Dilation weights `d₁..dₙ`.
    pub fn weights(&self) -> &'static [u32] {
        match self.kind {
            GroupKind::Euclidean(1) => &[1],
            GroupKind::Euclidean(2) => &[1, 1],
            GroupKind::Euclidean(_) => &[1, 1, 1],
            GroupKind::Heisenberg => &[1, 1, 2],
        }
    }

    /// Homogeneous dimension `Q = Σ dᵢ`.
    pub fn homogeneous_dim(&self) -> u32 {
        self.weights().iter().sum()
    }

    pub fn is_abelian(&self) -> bool {
        matches!(self.kind, GroupKind::Euclidean(_))
    }

    pub fn identity(&self) -> GroupPoint {
        GroupPoint::from_array([0.0; MAX_DIM], self.dim())
    }

    pub fn point(&self, coords: &[f64]) -> Result<GroupPoint> {
        if coords.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: coords.len(),
            });
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite {
                context: "group point coordinates",
            });
        }
        Ok(GroupPoint::from_slice_unchecked(coords))
    }

    fn check(&self, x: &GroupPoint) -> Result<()> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.dim(),
            });
        }
        Ok(())
    }

    /// Group law `x·y`.
    pub fn compose(&self, x: &GroupPoint, y: &GroupPoint) -> Result<GroupPoint> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.mul(x, y))
    }

    pub fn invert(&self, x: &GroupPoint) -> Result<GroupPoint> {
        self.check(x)?;
        Ok(self.inv(x))
    }

    /// Dilation `δ_λ`; requires `λ > 0`.
    pub fn dilate(&self, lambda: f64, x: &GroupPoint) -> Result<GroupPoint> {
        self.check(x)?;
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(invalid("lambda", format!("dilation factor must be positive, got {lambda}")));
        }
        Ok(self.dil(lambda, x))
    }

    /// Applies a rotation to the first `m` coordinates, leaving the rest fixed.
    pub fn horizontal_rotate(
        &self,
        rotation: &HorizontalRotation,
        x: &GroupPoint,
    ) -> Result<GroupPoint> {
        self.check(x)?;
        let m = self.horizontal_dim();
        if rotation.size != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: rotation.size,
            });
        }
        let mut out = x.coords;
        for (i, slot) in out.iter_mut().enumerate().take(m) {
            *slot = (0..m).map(|k| rotation.matrix[i][k] * x.coords[k]).sum();
        }
        Ok(GroupPoint::from_array(out, x.dim()))
    }

    #[inline]
    pub(crate) fn mul(&self, x: &GroupPoint, y: &GroupPoint) -> GroupPoint {
        let a = &x.coords;
        let b = &y.coords;
        let c = match self.kind {
            GroupKind::Euclidean(_) => [a[0] + b[0], a[1] + b[1], a[2] + b[2]],
            GroupKind::Heisenberg => [
                a[0] + b[0],
                a[1] + b[1],
                a[2] + b[2] + 0.5 * (a[0] * b[1] - a[1] * b[0]),
            ],
        };
        GroupPoint::from_array(c, x.dim())
    }

    #[inline]
    pub(crate) fn inv(&self, x: &GroupPoint) -> GroupPoint {
        let a = &x.coords;
        GroupPoint::from_array([-a[0], -a[1], -a[2]], x.dim())
    }

    #[inline]
    pub(crate) fn dil(&self, lambda: f64, x: &GroupPoint) -> GroupPoint {
        let a = &x.coords;
        let c = match self.kind {
            GroupKind::Euclidean(_) => [lambda * a[0], lambda * a[1], lambda * a[2]],
            GroupKind::Heisenberg => [lambda * a[0], lambda * a[1], lambda * lambda * a[2]],
        };
        GroupPoint::from_array(c, x.dim())
    }

    /// The point with `t` in horizontal slot `j` and zeros elsewhere.
    #[inline]
    pub(crate) fn horizontal_unit(&self, j: usize, t: f64) -> GroupPoint {
        let mut c = [0.0; MAX_DIM];
        c[j] = t;
        GroupPoint::from_array(c, self.dim())
    }
}

impl fmt::Display for CarnotGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn h1() -> CarnotGroup {
        CarnotGroup::heisenberg()
    }

    #[test]
    fn heisenberg_law_on_basis_vectors() {
        let g = h1();
        let x = g.point(&[1.0, 0.0, 0.0]).unwrap();
        let y = g.point(&[0.0, 1.0, 0.0]).unwrap();
        assert_eq!(g.compose(&x, &y).unwrap().coords(), &[1.0, 1.0, 0.5]);
    }

    #[test]
    fn euclidean_law_is_addition() {
        let g = CarnotGroup::euclidean(2).unwrap();
        let x = g.point(&[1.0, 2.0]).unwrap();
        let y = g.point(&[3.0, 4.0]).unwrap();
        assert_eq!(g.compose(&x, &y).unwrap().coords(), &[4.0, 6.0]);
        assert_eq!(g.invert(&x).unwrap().coords(), &[-1.0, -2.0]);
    }

    #[test]
    fn identity_and_inverse() {
        for id in ["r1", "r2", "r3", "h1"] {
            let g = CarnotGroup::from_id(id).unwrap();
            let coords: Vec<f64> = (0..g.dim()).map(|i| 0.3 + i as f64).collect();
            let x = g.point(&coords).unwrap();
            let e = g.identity();
            assert_eq!(g.compose(&x, &e).unwrap(), x);
            assert_eq!(g.compose(&e, &x).unwrap(), x);
            assert_eq!(g.invert(&e).unwrap(), e);
            assert_eq!(g.compose(&x, &g.invert(&x).unwrap()).unwrap(), e);
        }
        let g = h1();
        let x = g.point(&[1.5, -2.0, 0.25]).unwrap();
        assert_eq!(g.invert(&x).unwrap().coords(), &[-1.5, 2.0, -0.25]);
    }

    #[test]
    fn dilation_examples() {
        let g = h1();
        let x = g.point(&[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(g.dilate(2.0, &x).unwrap().coords(), &[2.0, 2.0, 4.0]);
        assert_eq!(g.dilate(1.0, &x).unwrap(), x);
        let lhs = g.dilate(0.5, &g.dilate(3.0, &x).unwrap()).unwrap();
        let rhs = g.dilate(1.5, &x).unwrap();
        assert!(lhs.max_deviation(&rhs) < 1e-15);
        assert!(g.dilate(0.0, &x).is_err());
        assert!(g.dilate(-1.0, &x).is_err());
    }

    #[test]
    fn horizontal_rotation_examples() {
        let g = h1();
        let x = g.point(&[1.0, 0.0, 5.0]).unwrap();
        let r = g.horizontal_rotate(&HorizontalRotation::planar(FRAC_PI_2), &x).unwrap();
        assert!(r.max_deviation(&g.point(&[0.0, 1.0, 5.0]).unwrap()) < 1e-15);
        let r0 = g.horizontal_rotate(&HorizontalRotation::planar(0.0), &x).unwrap();
        assert_eq!(r0, x);
        let bad = HorizontalRotation::identity(3);
        assert!(matches!(
            g.horizontal_rotate(&bad, &x),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn rotation_matrix_validation() {
        assert!(HorizontalRotation::from_rows(&[vec![0.0, -1.0], vec![1.0, 0.0]]).is_ok());
        assert!(HorizontalRotation::from_rows(&[vec![1.0, 0.0], vec![0.0, -1.0]]).is_err());
        assert!(HorizontalRotation::from_rows(&[vec![2.0, 0.0], vec![0.0, 0.5]]).is_err());
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let g = h1();
        let r2 = CarnotGroup::euclidean(2).unwrap();
        let x = r2.point(&[1.0, 2.0]).unwrap();
        let y = g.identity();
        assert_eq!(
            g.compose(&x, &y),
            Err(Error::DimensionMismatch {
                expected: 3,
                found: 2
            })
        );
        assert!(g.point(&[1.0]).is_err());
        assert!(g.point(&[1.0, f64::NAN, 0.0]).is_err());
    }

    #[test]
    fn homogeneous_dimensions() {
        assert_eq!(h1().homogeneous_dim(), 4);
        for n in 1..=3 {
            assert_eq!(CarnotGroup::euclidean(n).unwrap().homogeneous_dim(), n as u32);
        }
        assert!(CarnotGroup::from_id("h2").is_err());
        assert!(CarnotGroup::euclidean(4).is_err());
    }
}
