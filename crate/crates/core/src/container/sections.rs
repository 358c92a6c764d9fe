//! Uncompressed section bodies and the zlib codec wrapped around them.
//!
//! * Metadata: replay_id, scenario_tag (u32 length + utf-8), duration_steps,
//!   entity_count_peak, action_count (u64), outcome presence (u8) and value
//!   (i32), schema_hash (u64).
//! * Scalars: observation count n (u64), n step numbers (u32), then one
//!   column of n values per scalar channel.
//! * Planes: per plane channel, n consecutive planes; bool planes bit-packed.
//! * Entities: the instance-major columns, step indices, declared step count.

use std::io::{Read, Write};

use flate2::read::ZlibDecoder;
use flate2::write::ZlibEncoder;
use flate2::Compression;

use crate::bits::{pack_bits, unpack_bits, PackedPlane};
use crate::container::format::{put_str, Cursor};
use crate::error::{Error, Result};
use crate::layout::Column;
use crate::model::{Observation, PlaneData, ReplayMetadata};
use crate::schema::{PlaneElement, Schema};

pub fn compress(data: &[u8], level: u32) -> Vec<u8> {
    let mut enc = ZlibEncoder::new(Vec::with_capacity(data.len() / 2 + 64), Compression::new(level));
    enc.write_all(data).expect("writing to a Vec cannot fail");
    enc.finish().expect("writing to a Vec cannot fail")
}

pub fn decompress(data: &[u8], expected_len: u64) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(expected_len.min(1 << 30) as usize);
    ZlibDecoder::new(data)
        .read_to_end(&mut out)
        .map_err(|e| Error::malformed(format!("zlib stream: {e}")))?;
    if out.len() as u64 != expected_len {
        return Err(Error::malformed(format!(
            "section inflated to {} bytes, header says {expected_len}",
            out.len()
        )));
    }
    Ok(out)
}

pub fn encode_metadata(meta: &ReplayMetadata) -> Vec<u8> {
    let mut out = Vec::with_capacity(64 + meta.replay_id.len() + meta.scenario_tag.len());
    put_str(&mut out, &meta.replay_id);
    put_str(&mut out, &meta.scenario_tag);
    out.extend_from_slice(&meta.duration_steps.to_le_bytes());
    out.extend_from_slice(&meta.entity_count_peak.to_le_bytes());
    out.extend_from_slice(&meta.action_count.to_le_bytes());
    out.push(meta.outcome_label.is_some() as u8);
    out.extend_from_slice(&meta.outcome_label.unwrap_or(0).to_le_bytes());
    out.extend_from_slice(&meta.schema_hash.to_le_bytes());
    out
}

pub fn decode_metadata(bytes: &[u8]) -> Result<ReplayMetadata> {
    let mut cur = Cursor::new(bytes);
    let replay_id = cur.string()?;
    let scenario_tag = cur.string()?;
    let duration_steps = cur.u64()?;
    let entity_count_peak = cur.u64()?;
    let action_count = cur.u64()?;
    let has_outcome = cur.u8()?;
    let outcome = cur.i32()?;
    let schema_hash = cur.u64()?;
    if !cur.is_empty() || has_outcome > 1 {
        return Err(Error::malformed("metadata section"));
    }
    Ok(ReplayMetadata {
        replay_id,
        scenario_tag,
        duration_steps,
        entity_count_peak,
        action_count,
        outcome_label: (has_outcome == 1).then_some(outcome),
        schema_hash,
    })
}

pub fn encode_scalars(schema: &Schema, observations: &[Observation]) -> Vec<u8> {
    let n = observations.len();
    let width: usize = schema.scalar_channels.iter().map(|c| c.scalar_type.width()).sum();
    let mut out = Vec::with_capacity(8 + n * (4 + width));
    out.extend_from_slice(&(n as u64).to_le_bytes());
    for o in observations {
        out.extend_from_slice(&o.step.to_le_bytes());
    }
    for (i, channel) in schema.scalar_channels.iter().enumerate() {
        let mut col = Column::with_capacity(channel.scalar_type, n);
        observations.iter().for_each(|o| col.push(o.scalars[i]));
        col.write_le(&mut out);
    }
    out
}

/// Observations carrying step numbers and scalars; entities and planes empty.
pub fn decode_scalars(schema: &Schema, bytes: &[u8]) -> Result<Vec<Observation>> {
    let mut cur = Cursor::new(bytes);
    let n = cur.u64()? as usize;
    if n > bytes.len() / 4 {
        return Err(Error::malformed(format!("scalar section claims {n} observations")));
    }
    let steps = cur.take(4 * n)?;
    let mut observations: Vec<Observation> = steps
        .chunks_exact(4)
        .map(|c| Observation::new(u32::from_le_bytes(c.try_into().unwrap())))
        .collect();
    for channel in &schema.scalar_channels {
        let raw = cur.take(n * channel.scalar_type.width())?;
        let col = Column::read_le(channel.scalar_type, raw, n)?;
        for (k, o) in observations.iter_mut().enumerate() {
            o.scalars.push(col.get(k));
        }
    }
    if !cur.is_empty() {
        return Err(Error::malformed("trailing bytes in scalar section"));
    }
    Ok(observations)
}

pub fn encode_planes(schema: &Schema, observations: &[Observation]) -> Vec<u8> {
    let per_obs: usize = schema.plane_channels.iter().map(|p| p.encoded_len()).sum();
    let mut out = Vec::with_capacity(per_obs * observations.len());
    for (i, desc) in schema.plane_channels.iter().enumerate() {
        for o in observations {
            match &o.planes[i] {
                PlaneData::Bool(px) => {
                    out.extend_from_slice(&pack_bits(desc.width, desc.height, px).bytes)
                }
                PlaneData::U8(px) => out.extend_from_slice(px),
            }
        }
    }
    out
}

/// Fill the planes of `observations`, whose count fixes the section layout.
pub fn decode_planes(schema: &Schema, bytes: &[u8], observations: &mut [Observation]) -> Result<()> {
    let mut cur = Cursor::new(bytes);
    for o in observations.iter_mut() {
        o.planes.reserve(schema.plane_channels.len());
    }
    for desc in &schema.plane_channels {
        for o in observations.iter_mut() {
            let raw = cur.take(desc.encoded_len())?;
            let plane = match desc.element {
                PlaneElement::Bool => PlaneData::Bool(unpack_bits(&PackedPlane {
                    width: desc.width,
                    height: desc.height,
                    bytes: raw.to_vec(),
                })?),
                PlaneElement::U8 => PlaneData::U8(raw.to_vec()),
            };
            o.planes.push(plane);
        }
    }
    if !cur.is_empty() {
        return Err(Error::malformed("trailing bytes in plane section"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::{Dynamics, FieldDescriptor, FieldRole, PlaneDescriptor};
    use crate::value::{ScalarType, Value};

    fn schema() -> Schema {
        Schema::new(vec![FieldDescriptor::new(
            "uid",
            ScalarType::U32,
            Dynamics::Static,
            FieldRole::InstanceId,
        )])
        .with_scalar(FieldDescriptor::generic("score", ScalarType::F32, Dynamics::Fast))
        .with_scalar(FieldDescriptor::generic("supply", ScalarType::U16, Dynamics::Slow))
        .with_plane(PlaneDescriptor::new("creep", 3, 3, PlaneElement::Bool))
        .with_plane(PlaneDescriptor::new("height", 2, 2, PlaneElement::U8))
    }

    fn observations() -> Vec<Observation> {
        (0..3u32)
            .map(|t| Observation {
                step: t * 2,
                entities: vec![],
                scalars: vec![Value::F32(t as f32 * 1.5), Value::U16(t as u16 + 10)],
                planes: vec![
                    PlaneData::Bool((0..9).map(|i| (i + t) % 3 == 0).collect()),
                    PlaneData::U8(vec![t as u8; 4]),
                ],
            })
            .collect()
    }

    #[test]
    fn metadata_round_trip() {
        let mut m = ReplayMetadata::new("replay-ä", "warehouse", &schema());
        m.duration_steps = 10;
        m.action_count = 3;
        m.outcome_label = Some(-1);
        assert_eq!(decode_metadata(&encode_metadata(&m)).unwrap(), m);
        m.outcome_label = None;
        assert_eq!(decode_metadata(&encode_metadata(&m)).unwrap(), m);
    }

    #[test]
    fn scalars_and_planes_round_trip() {
        let s = schema();
        let obs = observations();
        let scalars = encode_scalars(&s, &obs);
        assert_eq!(scalars.len(), 8 + 3 * 4 + 3 * 4 + 3 * 2);
        let mut back = decode_scalars(&s, &scalars).unwrap();
        let planes = encode_planes(&s, &obs);
        assert_eq!(planes.len(), 3 * 2 + 3 * 4);
        decode_planes(&s, &planes, &mut back).unwrap();
        assert_eq!(back, obs);
    }

    #[test]
    fn codec_round_trip_and_length_check() {
        let data = vec![7u8; 10_000];
        let z = compress(&data, 6);
        assert!(z.len() < 100);
        assert_eq!(z[0], 0x78, "zlib framing");
        assert_eq!(decompress(&z, 10_000).unwrap(), data);
        assert!(decompress(&z, 9_999).is_err());
        assert!(!compress(&[], 6).is_empty());
    }
}
