//! Binary checkpoints: magic `NGF1`, version byte, float-width byte, then
//! per parameter name, rank, dims and row-major little-endian values, closed
//! by a 64-bit length checksum. A sidecar JSON file (written by the training
//! drivers) records the config and epoch.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::array::Array;
use super::store::ParameterStore;

const MAGIC: &[u8; 4] = b"NGF1";
const VERSION: u8 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FloatWidth {
    F32,
    F64,
}

impl FloatWidth {
    fn byte(self) -> u8 {
        match self {
            FloatWidth::F32 => 4,
            FloatWidth::F64 => 8,
        }
    }

    fn from_byte(b: u8) -> Result<FloatWidth> {
        match b {
            4 => Ok(FloatWidth::F32),
            8 => Ok(FloatWidth::F64),
            other => Err(Error::Checkpoint(format!("bad float width byte {other}"))),
        }
    }
}

pub fn save_checkpoint<W: Write>(
    store: &ParameterStore,
    width: FloatWidth,
    mut out: W,
) -> Result<()> {
    let mut buf: Vec<u8> = Vec::new();
    buf.extend_from_slice(MAGIC);
    buf.push(VERSION);
    buf.push(width.byte());
    for (name, param) in store.iter() {
        let name_bytes = name.as_bytes();
        buf.extend_from_slice(&(name_bytes.len() as u32).to_le_bytes());
        buf.extend_from_slice(name_bytes);
        buf.push(param.value.rank());
        for d in param.value.dims() {
            buf.extend_from_slice(&(d as u64).to_le_bytes());
        }
        match width {
            FloatWidth::F32 => {
                for &v in param.value.as_slice() {
                    buf.extend_from_slice(&(v as f32).to_le_bytes());
                }
            }
            FloatWidth::F64 => {
                for &v in param.value.as_slice() {
                    buf.extend_from_slice(&v.to_le_bytes());
                }
            }
        }
    }
    let checksum = buf.len() as u64;
    buf.extend_from_slice(&checksum.to_le_bytes());
    out.write_all(&buf)?;
    Ok(())
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(Error::Checkpoint("truncated checkpoint".into()));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

/// Reads a checkpoint back as named arrays (always widened to f64).
pub fn load_checkpoint<R: Read>(mut input: R) -> Result<Vec<(String, Array)>> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    if bytes.len() < MAGIC.len() + 2 + 8 {
        return Err(Error::Checkpoint("file too short".into()));
    }
    let payload_len = bytes.len() - 8;
    let checksum = u64::from_le_bytes(bytes[payload_len..].try_into().unwrap());
    if checksum != payload_len as u64 {
        return Err(Error::Checkpoint(format!(
            "length checksum mismatch: header says {checksum}, file has {payload_len}"
        )));
    }
    let mut c = Cursor {
        bytes: &bytes[..payload_len],
        pos: 0,
    };
    if c.take(4)? != MAGIC {
        return Err(Error::Checkpoint("bad magic".into()));
    }
    if c.u8()? != VERSION {
        return Err(Error::Checkpoint("unsupported version".into()));
    }
    let width = FloatWidth::from_byte(c.u8()?)?;
    let mut params = Vec::new();
    while c.pos < payload_len {
        let name_len = c.u32()? as usize;
        let name = String::from_utf8(c.take(name_len)?.to_vec())
            .map_err(|_| Error::Checkpoint("parameter name is not UTF-8".into()))?;
        let rank = c.u8()?;
        if rank != 1 && rank != 2 {
            return Err(Error::Checkpoint(format!("bad rank {rank} for {name}")));
        }
        let mut dims = Vec::with_capacity(rank as usize);
        for _ in 0..rank {
            dims.push(c.u64()? as usize);
        }
        let count: usize = dims.iter().product();
        let mut data = Vec::with_capacity(count);
        match width {
            FloatWidth::F32 => {
                let raw = c.take(count * 4)?;
                for chunk in raw.chunks_exact(4) {
                    data.push(f32::from_le_bytes(chunk.try_into().unwrap()) as f64);
                }
            }
            FloatWidth::F64 => {
                let raw = c.take(count * 8)?;
                for chunk in raw.chunks_exact(8) {
                    data.push(f64::from_le_bytes(chunk.try_into().unwrap()));
                }
            }
        }
        let array = if rank == 1 {
            Array::from_vec(data)
        } else {
            Array::from_rows(dims[0], dims[1], data)
        };
        params.push((name, array));
    }
    Ok(params)
}

/// Copies loaded arrays into an existing store, validating names and shapes.
pub fn restore_into(store: &mut ParameterStore, arrays: Vec<(String, Array)>) -> Result<()> {
    for (name, array) in arrays {
        if !store.contains(&name) {
            return Err(Error::Checkpoint(format!(
                "checkpoint parameter {name} not expected by this model"
            )));
        }
        let param = store.get_mut(&name);
        if !param.value.same_shape(&array) {
            return Err(Error::Checkpoint(format!(
                "shape mismatch for {name}: model {:?}, checkpoint {:?}",
                param.value.dims(),
                array.dims()
            )));
        }
        param.value = array;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_store() -> ParameterStore {
        let mut s = ParameterStore::new();
        let mut e = Array::matrix(3, 2);
        e.as_mut_slice()
            .iter_mut()
            .enumerate()
            .for_each(|(i, v)| *v = i as f64 * 0.25 - 0.5);
        s.add_sparse("E", e);
        let mut b = Array::vector(4);
        b.as_mut_slice()
            .iter_mut()
            .enumerate()
            .for_each(|(i, v)| *v = -(i as f64) / 3.0);
        s.add("O_bias", b);
        s
    }

    #[test]
    fn f64_round_trip_is_exact() {
        let store = sample_store();
        let mut buf = Vec::new();
        save_checkpoint(&store, FloatWidth::F64, &mut buf).unwrap();
        let params = load_checkpoint(&buf[..]).unwrap();
        assert_eq!(params.len(), 2);
        assert_eq!(params[0].0, "E");
        assert_eq!(params[0].1, store.get("E").value);
        assert_eq!(params[1].1, store.get("O_bias").value);
    }

    #[test]
    fn f32_round_trip_is_exact_at_f32_precision() {
        let store = sample_store();
        let mut buf = Vec::new();
        save_checkpoint(&store, FloatWidth::F32, &mut buf).unwrap();
        let params = load_checkpoint(&buf[..]).unwrap();
        for ((name, arr), (_, orig)) in params.iter().zip(store.iter()) {
            for (a, b) in arr.as_slice().iter().zip(orig.value.as_slice()) {
                assert!((a - b).abs() <= (*b as f32).abs() as f64 * 1e-7 + 1e-7, "{name}");
            }
        }
    }

    #[test]
    fn corrupted_checksum_rejected() {
        let store = sample_store();
        let mut buf = Vec::new();
        save_checkpoint(&store, FloatWidth::F64, &mut buf).unwrap();
        let n = buf.len();
        buf[n - 1] ^= 0xFF;
        assert!(matches!(
            load_checkpoint(&buf[..]),
            Err(Error::Checkpoint(_))
        ));
    }

    #[test]
    fn restore_validates_shapes() {
        let store = sample_store();
        let mut buf = Vec::new();
        save_checkpoint(&store, FloatWidth::F64, &mut buf).unwrap();
        let params = load_checkpoint(&buf[..]).unwrap();
        let mut other = ParameterStore::new();
        other.add("E", Array::matrix(2, 2));
        other.add("O_bias", Array::vector(4));
        assert!(matches!(
            restore_into(&mut other, params),
            Err(Error::Checkpoint(_))
        ));
    }
}
