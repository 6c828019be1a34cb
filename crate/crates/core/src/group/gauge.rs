use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{CarnotGroup, GroupKind, GroupPoint, HorizontalRotation, MAX_DIM};
use crate::error::{Error, Result};

/// Violations of an axiom below this size are attributed to rounding.
pub const AXIOM_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GaugeKind {
    Euclidean,
    Koranyi,
}

impl GaugeKind {
    pub fn from_id(id: &str) -> Result<Self> {
        match id {
            "euclidean" => Ok(GaugeKind::Euclidean),
            "koranyi" => Ok(GaugeKind::Koranyi),
            _ => Err(Error::UnknownIdentifier {
                kind: "gauge",
                id: id.to_string(),
            }),
        }
    }

    pub fn id(&self) -> &'static str {
        match self {
            GaugeKind::Euclidean => "euclidean",
            GaugeKind::Koranyi => "koranyi",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AxiomStatus {
    Declared,
    EmpiricallyValidated,
    Unknown,
    Violated,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct AxiomFlags {
    pub symmetric: AxiomStatus,
    pub homogeneous: AxiomStatus,
    pub triangle: AxiomStatus,
    pub horizontally_rotation_invariant: AxiomStatus,
}

/// Largest observed defect for each axiom over a batch of random samples.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AxiomReport {
    pub samples: usize,
    pub max_identity_defect: f64,
    pub max_symmetry_defect: f64,
    pub max_homogeneity_defect: f64,
    pub max_triangle_violation: f64,
    pub max_rotation_defect: f64,
    pub max_associativity_defect: f64,
    pub max_inverse_defect: f64,
    pub max_automorphism_defect: f64,
    pub flags: AxiomFlags,
}

impl AxiomReport {
    pub fn all_hold(&self) -> bool {
        let f = &self.flags;
        [f.symmetric, f.homogeneous, f.triangle, f.horizontally_rotation_invariant]
            .iter()
            .all(|s| *s != AxiomStatus::Violated)
            && self.max_identity_defect <= AXIOM_TOLERANCE
            && self.max_associativity_defect <= AXIOM_TOLERANCE
            && self.max_inverse_defect <= AXIOM_TOLERANCE
            && self.max_automorphism_defect <= AXIOM_TOLERANCE
    }
}

/// A homogeneous norm on a Carnot group.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HomogeneousGauge {
    kind: GaugeKind,
    group: CarnotGroup,
    flags: AxiomFlags,
}

impl HomogeneousGauge {
    /// The Euclidean norm needs all weights equal to one; the Korányi gauge
    /// is defined on `ℍ¹` only.
    pub fn new(group: CarnotGroup, kind: GaugeKind) -> Result<Self> {
        let flags = match (kind, group.kind()) {
            (GaugeKind::Euclidean, GroupKind::Euclidean(_)) => AxiomFlags {
                symmetric: AxiomStatus::Declared,
                homogeneous: AxiomStatus::Declared,
                triangle: AxiomStatus::Declared,
                horizontally_rotation_invariant: AxiomStatus::Declared,
            },
            (GaugeKind::Koranyi, GroupKind::Heisenberg) => AxiomFlags {
                symmetric: AxiomStatus::Declared,
                homogeneous: AxiomStatus::Declared,
                triangle: AxiomStatus::Unknown,
                horizontally_rotation_invariant: AxiomStatus::Declared,
            },
            _ => {
                return Err(Error::UnsupportedGauge {
                    gauge: kind.id(),
                    group: group.id(),
                })
            }
        };
        Ok(HomogeneousGauge { kind, group, flags })
    }

    pub fn from_ids(group: &str, gauge: &str) -> Result<Self> {
        Self::new(CarnotGroup::from_id(group)?, GaugeKind::from_id(gauge)?)
    }

    /// The natural gauge of a group: Euclidean on `ℝⁿ`, Korányi on `ℍ¹`.
    pub fn default_for(group: CarnotGroup) -> Self {
        let kind = if group.is_abelian() {
            GaugeKind::Euclidean
        } else {
            GaugeKind::Koranyi
        };
        Self::new(group, kind).expect("default gauge is always supported")
    }

    pub fn kind(&self) -> GaugeKind {
        self.kind
    }

    pub fn group(&self) -> &CarnotGroup {
        &self.group
    }

    pub fn flags(&self) -> AxiomFlags {
        self.flags
    }

    pub fn eval(&self, x: &GroupPoint) -> Result<f64> {
        if x.dim() != self.group.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.group.dim(),
                found: x.dim(),
            });
        }
        Ok(self.norm(x))
    }

    #[inline]
    pub(crate) fn norm(&self, x: &GroupPoint) -> f64 {
        let c = &x.coords;
        match self.kind {
            GaugeKind::Euclidean => (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt(),
            GaugeKind::Koranyi => {
                let h = c[0] * c[0] + c[1] * c[1];
                (h * h + 16.0 * c[2] * c[2]).sqrt().sqrt()
            }
        }
    }

    /// Half side lengths of the smallest coordinate box containing the unit ball.
    pub fn unit_ball_halfwidths(&self) -> [f64; MAX_DIM] {
        let mut w = [0.0; MAX_DIM];
        match self.kind {
            GaugeKind::Euclidean => w[..self.group.dim()].fill(1.0),
            GaugeKind::Koranyi => w = [1.0, 1.0, 0.25],
        }
        w
    }

    /// Half side lengths of the bounding box of `B(0, r)`.
    pub fn ball_halfwidths(&self, r: f64) -> [f64; MAX_DIM] {
        let mut w = self.unit_ball_halfwidths();
        for (wj, d) in w.iter_mut().zip(self.group.weights()) {
            *wj *= r.powi(*d as i32);
        }
        w
    }

    /// Samples random points and triples and measures every axiom defect.
    /// The returned gauge carries updated flags.
    pub fn validate_axioms(&self, samples: usize, seed: u64) -> (HomogeneousGauge, AxiomReport) {
        let g = self.group;
        let n = g.dim();
        let m = g.horizontal_dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let draw = |rng: &mut ChaCha8Rng, scale: f64| {
            let mut c = [0.0; MAX_DIM];
            for cj in c.iter_mut().take(n) {
                *cj = rng.random_range(-scale..=scale);
            }
            GroupPoint::from_array(c, n)
        };

        let e = g.identity();
        let mut id_def = self.norm(&e);
        let mut sym = 0.0f64;
        let mut hom = 0.0f64;
        let mut tri = 0.0f64;
        let mut rot = 0.0f64;
        let mut assoc = 0.0f64;
        let mut inv = 0.0f64;
        let mut auto = 0.0f64;

        for i in 0..samples {
            // alternate the sampling scale so that both small and large
            // configurations are exercised
            let scale = [10.0, 1.0, 0.1][i % 3];
            let x = draw(&mut rng, scale);
            let y = draw(&mut rng, scale);
            let z = draw(&mut rng, 10.0);
            let gx = self.norm(&x);
            let gy = self.norm(&y);

            if gx == 0.0 && x != e {
                id_def = id_def.max(1.0);
            }
            sym = sym.max((self.norm(&g.inv(&x)) - gx).abs());

            let lambda = rng.random_range(0.01..100.0);
            let rel = (self.norm(&g.dil(lambda, &x)) - lambda * gx).abs() / (lambda * gx).max(1.0);
            hom = hom.max(rel);

            let d = self.norm(&g.mul(&g.inv(&y), &x));
            let lower = (gy - gx).abs() - d;
            let upper = d - (gx + gy);
            tri = tri.max(lower).max(upper);

            if m >= 2 {
                let theta = rng.random_range(0.0..std::f64::consts::TAU);
                let r = g
                    .horizontal_rotate(&HorizontalRotation::planar_in(m, theta), &x)
                    .expect("rotation matches horizontal dimension");
                rot = rot.max((self.norm(&r) - gx).abs() / gx.max(1.0));
            }

            let lhs = g.mul(&g.mul(&x, &y), &z);
            let rhs = g.mul(&x, &g.mul(&y, &z));
            assoc = assoc.max(lhs.max_deviation(&rhs));
            inv = inv.max(g.mul(&x, &g.inv(&x)).max_deviation(&e));
            let dl = g.dil(lambda, &g.mul(&x, &y));
            let dr = g.mul(&g.dil(lambda, &x), &g.dil(lambda, &y));
            let denom = dl.coords().iter().fold(1.0f64, |a, c| a.max(c.abs()));
            auto = auto.max(dl.max_deviation(&dr) / denom);
        }

        let status = |defect: f64, prior: AxiomStatus| {
            if defect > AXIOM_TOLERANCE {
                AxiomStatus::Violated
            } else if samples > 0 {
                AxiomStatus::EmpiricallyValidated
            } else {
                prior
            }
        };
        let flags = AxiomFlags {
            symmetric: status(sym, self.flags.symmetric),
            homogeneous: status(hom, self.flags.homogeneous),
            triangle: status(tri.max(0.0), self.flags.triangle),
            horizontally_rotation_invariant: status(
                rot,
                self.flags.horizontally_rotation_invariant,
            ),
        };
        let report = AxiomReport {
            samples,
            max_identity_defect: id_def,
            max_symmetry_defect: sym,
            max_homogeneity_defect: hom,
            max_triangle_violation: tri.max(0.0),
            max_rotation_defect: rot,
            max_associativity_defect: assoc,
            max_inverse_defect: inv,
            max_automorphism_defect: auto,
            flags,
        };
        (
            HomogeneousGauge {
                flags,
                ..*self
            },
            report,
        )
    }
}

impl fmt::Display for HomogeneousGauge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.group.id(), self.kind.id())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn koranyi() -> HomogeneousGauge {
        HomogeneousGauge::from_ids("h1", "koranyi").unwrap()
    }

    #[test]
    fn koranyi_examples() {
        let ng = koranyi();
        let g = *ng.group();
        assert_eq!(ng.eval(&g.point(&[1.0, 0.0, 0.0]).unwrap()).unwrap(), 1.0);
        assert_eq!(ng.eval(&g.point(&[0.0, 0.0, 1.0]).unwrap()).unwrap(), 2.0);
        assert_eq!(ng.eval(&g.identity()).unwrap(), 0.0);
    }

    #[test]
    fn euclidean_gauge_on_heisenberg_is_rejected() {
        assert!(matches!(
            HomogeneousGauge::from_ids("h1", "euclidean"),
            Err(Error::UnsupportedGauge { .. })
        ));
        assert!(HomogeneousGauge::from_ids("r2", "koranyi").is_err());
        assert!(HomogeneousGauge::from_ids("r2", "cc").is_err());
    }

    #[test]
    fn euclidean_norm() {
        let ng = HomogeneousGauge::from_ids("r2", "euclidean").unwrap();
        let x = ng.group().point(&[3.0, 4.0]).unwrap();
        assert_eq!(ng.eval(&x).unwrap(), 5.0);
    }

    #[test]
    fn bounding_boxes_contain_the_ball() {
        let ng = koranyi();
        assert_eq!(ng.unit_ball_halfwidths(), [1.0, 1.0, 0.25]);
        assert_eq!(ng.ball_halfwidths(2.0), [2.0, 2.0, 1.0]);
        let g = *ng.group();
        // extreme points of the unit ball touch the box faces
        assert!((ng.eval(&g.point(&[1.0, 0.0, 0.0]).unwrap()).unwrap() - 1.0).abs() < 1e-15);
        assert!((ng.eval(&g.point(&[0.0, 0.0, 0.25]).unwrap()).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn axiom_validation_updates_flags() {
        let ng = koranyi();
        assert_eq!(ng.flags().triangle, AxiomStatus::Unknown);
        let (checked, report) = ng.validate_axioms(20_000, 7);
        assert!(report.all_hold(), "{report:?}");
        assert_eq!(checked.flags().triangle, AxiomStatus::EmpiricallyValidated);
        for id in ["r1", "r2", "r3"] {
            let (_, r) = HomogeneousGauge::from_ids(id, "euclidean")
                .unwrap()
                .validate_axioms(5_000, 1);
            assert!(r.all_hold(), "{id}: {r:?}");
        }
    }
}
