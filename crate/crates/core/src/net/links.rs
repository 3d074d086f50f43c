use alloc::vec::Vec;

use super::{CollisionModel, ObjectEncoding};
use crate::autodiff::Scalar;
use crate::error::Result;
use crate::geometry::{sample_surface, TriangleMesh};
use crate::rng::derive_seed;

/// Object encodings of robot link meshes, computed once per robot and model.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkEncodings<T> {
    pub encodings: Vec<ObjectEncoding<T>>,
}

impl<T: Scalar> LinkEncodings<T> {
    /// Samples `points` surface points per link (in the link frame) and
    /// encodes each.
    pub fn new(model: &CollisionModel<T>, meshes: &[TriangleMesh], points: usize, seed: u64) -> Result<Self> {
        let encodings = meshes
            .iter()
            .enumerate()
            .map(|(i, m)| model.encode_object(&sample_surface(m, points, derive_seed(seed, "link-cloud", i as u64))?))
            .collect::<Result<_>>()?;
        Ok(LinkEncodings { encodings })
    }

    pub fn refs(&self) -> Vec<&ObjectEncoding<T>> {
        self.encodings.iter().collect()
    }
}
