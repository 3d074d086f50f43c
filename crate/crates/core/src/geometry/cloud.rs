use alloc::format;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Aabb, RigidTransform};
use crate::error::{Error, Result};
use crate::math::Vec3;

/// Unordered points (meters) with optional per-point object labels.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PointCloud {
    points: Vec<Vec3>,
    labels: Option<Vec<u32>>,
}

impl PointCloud {
    pub fn new(points: Vec<Vec3>) -> Result<Self> {
        if let Some(p) = points.iter().find(|p| !p.is_finite()) {
            return Err(Error::invalid(format!("non-finite point {p:?}")));
        }
        Ok(PointCloud { points, labels: None })
    }

    pub fn with_labels(points: Vec<Vec3>, labels: Vec<u32>) -> Result<Self> {
        if labels.len() != points.len() {
            return Err(Error::invalid(format!(
                "{} labels for {} points",
                labels.len(),
                points.len()
            )));
        }
        let mut c = PointCloud::new(points)?;
        c.labels = Some(labels);
        Ok(c)
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn labels(&self) -> Option<&[u32]> {
        self.labels.as_deref()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn aabb(&self) -> Aabb {
        Aabb::from_points(&self.points)
    }

    pub fn centroid(&self) -> Vec3 {
        if self.points.is_empty() {
            return Vec3::ZERO;
        }
        let sum = self.points.iter().fold(Vec3::ZERO, |a, p| a + *p);
        sum * (1.0 / self.points.len() as f64)
    }

    pub fn transformed(&self, t: &RigidTransform) -> PointCloud {
        PointCloud {
            points: self.points.iter().map(|p| t.apply(*p)).collect(),
            labels: self.labels.clone(),
        }
    }

    /// Keeps the points (and their labels) for which `keep(point, label)` holds.
    pub fn filtered(&self, mut keep: impl FnMut(Vec3, Option<u32>) -> bool) -> PointCloud {
        let mut points = Vec::new();
        let mut labels = self.labels.as_ref().map(|_| Vec::new());
        for (i, p) in self.points.iter().enumerate() {
            let l = self.labels.as_ref().map(|l| l[i]);
            if keep(*p, l) {
                points.push(*p);
                if let (Some(out), Some(l)) = (labels.as_mut(), l) {
                    out.push(l);
                }
            }
        }
        PointCloud { points, labels }
    }

    /// Drops every point carrying one of `labels`.
    pub fn without_labels(&self, labels: &[u32]) -> PointCloud {
        self.filtered(|_, l| l.is_none_or(|l| !labels.contains(&l)))
    }

    /// Exactly `n` points: a uniform subset without replacement when the cloud
    /// is large enough, otherwise every point plus uniform draws with
    /// replacement. Labels follow their points.
    pub fn resampled<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> PointCloud {
        let m = self.points.len();
        if m == 0 {
            return self.clone();
        }
        let idx: Vec<usize> = if m >= n {
            let mut v = rand::seq::index::sample(rng, m, n).into_vec();
            v.sort_unstable();
            v
        } else {
            let mut v: Vec<usize> = (0..m).collect();
            v.extend((m..n).map(|_| rng.random_range(0..m)));
            v
        };
        PointCloud {
            points: idx.iter().map(|&i| self.points[i]).collect(),
            labels: self.labels.as_ref().map(|l| idx.iter().map(|&i| l[i]).collect()),
        }
    }

    pub fn extend(&mut self, other: &PointCloud) {
        match (&mut self.labels, &other.labels) {
            (Some(a), Some(b)) => a.extend_from_slice(b),
            (None, None) => {}
            _ => self.labels = None,
        }
        self.points.extend_from_slice(&other.points);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn label_alignment_enforced() {
        assert!(PointCloud::with_labels(alloc::vec![Vec3::ZERO], alloc::vec![]).is_err());
        assert!(PointCloud::new(alloc::vec![Vec3::new(f64::NAN, 0.0, 0.0)]).is_err());
    }

    #[test]
    fn label_filter_and_resample() {
        let pts = (0..10).map(|i| Vec3::new(i as f64, 0.0, 0.0)).collect();
        let labels = (0..10).map(|i| i % 2).collect();
        let c = PointCloud::with_labels(pts, labels).unwrap();
        let odd = c.without_labels(&[0]);
        assert_eq!(odd.len(), 5);
        assert!(odd.labels().unwrap().iter().all(|&l| l == 1));
        let mut rng = crate::rng::Rng::seed_from_u64(3);
        let up = c.resampled(25, &mut rng);
        assert_eq!(up.len(), 25);
        assert_eq!(&up.points()[..10], c.points());
        let down = c.resampled(4, &mut rng);
        assert_eq!(down.len(), 4);
        for (p, l) in down.points().iter().zip(down.labels().unwrap()) {
            assert_eq!(p.x as u32 % 2, *l);
        }
    }
}
