//! Point sampling and neighborhood grouping for the object encoder. All
//! choices depend only on point coordinates, never on input order.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::Vec3;

fn lex(a: &Vec3, b: &Vec3) -> Ordering {
    a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)).then(a.z.total_cmp(&b.z))
}

/// Farthest-point sampling of up to `k` distinct points. Starts from the
/// lexicographically smallest point; ties go to the smaller point. Stops
/// early once every remaining point coincides with a chosen one.
pub fn farthest_point_sample(points: &[Vec3], k: usize) -> Vec<Vec3> {
    let Some(first) = points.iter().min_by(|a, b| lex(a, b)) else { return Vec::new() };
    let mut chosen = vec![*first];
    let mut dist: Vec<f64> = points.iter().map(|p| p.distance(*first)).collect();
    while chosen.len() < k {
        let mut best: Option<usize> = None;
        for (i, &d) in dist.iter().enumerate() {
            best = match best {
                None => Some(i),
                Some(b) => match d.total_cmp(&dist[b]).then_with(|| lex(&points[b], &points[i])) {
                    Ordering::Greater => Some(i),
                    _ => Some(b),
                },
            };
        }
        let b = best.expect("non-empty");
        if dist[b] <= 0.0 {
            break;
        }
        let c = points[b];
        chosen.push(c);
        for (d, p) in dist.iter_mut().zip(points) {
            *d = d.min(p.distance(c));
        }
    }
    chosen
}

/// Set-abstraction layout of the object encoder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectEncoderConfig {
    /// Points kept (by farthest-point sampling) before grouping.
    pub sample_points: usize,
    pub sa1_centers: usize,
    pub sa1_radius: f64,
    pub sa1_mlp: Vec<usize>,
    pub sa2_centers: usize,
    pub sa2_radius: f64,
    pub sa2_mlp: Vec<usize>,
    pub global_mlp: Vec<usize>,
}

impl Default for ObjectEncoderConfig {
    fn default() -> Self {
        ObjectEncoderConfig {
            sample_points: 256,
            sa1_centers: 64,
            sa1_radius: 0.04,
            sa1_mlp: vec![32, 64],
            sa2_centers: 16,
            sa2_radius: 0.08,
            sa2_mlp: vec![64, 128],
            global_mlp: vec![128],
        }
    }
}

/// Minimum object cloud size accepted by the encoder.
pub const MIN_OBJECT_POINTS: usize = 32;

impl ObjectEncoderConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.sample_points >= self.sa1_centers
            && self.sa1_centers >= self.sa2_centers
            && self.sa2_centers > 0
            && self.sa1_radius > 0.0
            && self.sa2_radius > 0.0
            && [&self.sa1_mlp, &self.sa2_mlp, &self.global_mlp].iter().all(|m| !m.is_empty() && !m.contains(&0));
        if ok {
            Ok(())
        } else {
            Err(Error::invalid("object encoder needs sample ≥ sa1 ≥ sa2 > 0 centers, positive radii and non-empty MLPs"))
        }
    }

    pub fn output_width(&self) -> usize {
        *self.global_mlp.last().unwrap_or(&0)
    }
}

/// Grouping of one object cloud, ready for the encoder MLPs.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectGroups {
    /// Stage 1 rows: neighbor offset from its center, in radius units.
    pub sa1_local: Vec<[f64; 3]>,
    pub sa1_segment: Vec<u32>,
    pub sa1_count: usize,
    /// Stage 2 rows: stage-1 center offset, and which stage-1 feature row
    /// to append.
    pub sa2_local: Vec<[f64; 3]>,
    pub sa2_source: Vec<u32>,
    pub sa2_segment: Vec<u32>,
    pub sa2_count: usize,
    /// Stage-2 center positions in units of the stage-2 radius.
    pub sa2_centers: Vec<[f64; 3]>,
}

fn scaled(d: Vec3, r: f64) -> [f64; 3] {
    [d.x / r, d.y / r, d.z / r]
}

/// Ball query: every point within `radius` of each center.
fn ball_groups(centers: &[Vec3], points: &[Vec3], radius: f64) -> (Vec<[f64; 3]>, Vec<u32>, Vec<u32>) {
    let (mut local, mut source, mut seg) = (Vec::new(), Vec::new(), Vec::new());
    for (ci, c) in centers.iter().enumerate() {
        for (pi, p) in points.iter().enumerate() {
            let d = *p - *c;
            if d.norm() <= radius {
                local.push(scaled(d, radius));
                source.push(pi as u32);
                seg.push(ci as u32);
            }
        }
    }
    (local, source, seg)
}

pub fn group_object(points: &[Vec3], cfg: &ObjectEncoderConfig) -> Result<ObjectGroups> {
    if points.len() < MIN_OBJECT_POINTS {
        return Err(Error::invalid(alloc::format!(
            "object cloud has {} points, the encoder needs at least {MIN_OBJECT_POINTS}",
            points.len()
        )));
    }
    let sample = farthest_point_sample(points, cfg.sample_points);
    // prefixes of a farthest-point order are themselves farthest-point samples
    let c1 = &sample[..cfg.sa1_centers.min(sample.len())];
    let c2 = &sample[..cfg.sa2_centers.min(sample.len())];
    let (sa1_local, _, sa1_segment) = ball_groups(c1, &sample, cfg.sa1_radius);
    let (sa2_local, sa2_source, sa2_segment) = ball_groups(c2, c1, cfg.sa2_radius);
    Ok(ObjectGroups {
        sa1_local,
        sa1_segment,
        sa1_count: c1.len(),
        sa2_local,
        sa2_source,
        sa2_segment,
        sa2_count: c2.len(),
        sa2_centers: c2.iter().map(|c| scaled(*c, cfg.sa2_radius)).collect(),
    })
}
