use scnet_core::{PointCloud, Vec3};

use super::{put_f32, put_u64, FormatError, FormatResult, Reader};

/// `u64` point count followed by packed `f32` xyz triples.
pub fn encode_cloud(cloud: &PointCloud) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + 12 * cloud.len());
    put_u64(&mut out, cloud.len() as u64);
    write_points(&mut out, cloud.points());
    out
}

pub fn decode_cloud(bytes: &[u8]) -> FormatResult<PointCloud> {
    let mut r = Reader::new(bytes);
    let n = r.count(12)?;
    let cloud = read_points(&mut r, n)?;
    r.finish()?;
    Ok(cloud)
}

pub(crate) fn write_points(out: &mut Vec<u8>, points: &[Vec3]) {
    for p in points {
        put_f32(out, p.x as f32);
        put_f32(out, p.y as f32);
        put_f32(out, p.z as f32);
    }
}

pub(crate) fn read_points(r: &mut Reader<'_>, n: usize) -> FormatResult<PointCloud> {
    let v = r.f32s(3 * n)?;
    let points = v.chunks_exact(3).map(|c| Vec3::new(c[0].into(), c[1].into(), c[2].into())).collect();
    PointCloud::new(points).map_err(|e| FormatError::Corrupt(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_and_small_clouds_round_trip() {
        for pts in [vec![], vec![Vec3::new(0.5, -0.25, 1.0), Vec3::new(0.125, 2.0, -7.5)]] {
            let c = PointCloud::new(pts).unwrap();
            let bytes = encode_cloud(&c);
            assert_eq!(bytes.len(), 8 + 12 * c.len());
            assert_eq!(decode_cloud(&bytes).unwrap(), c);
        }
    }

    #[test]
    fn short_payload_is_an_error() {
        let c = PointCloud::new(vec![Vec3::X; 3]).unwrap();
        let bytes = encode_cloud(&c);
        assert!(matches!(decode_cloud(&bytes[..bytes.len() - 1]), Err(FormatError::Truncated { .. })));
    }
}
