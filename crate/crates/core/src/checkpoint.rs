//! Binary checkpoint container for named tensors.
//!
//! Layout, all little-endian:
//!
//! ```text
//! u32 count
//! per tensor:
//!   u32 name_len, name bytes (UTF-8)
//!   u32 rank
//!   u32 dims[rank]
//!   f64 values[product(dims)]
//! ```

use crate::tensor::{ParameterStore, Tensor};
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("checkpoint i/o failed: {0}")]
    Io(#[from] io::Error),
    #[error("tensor name is not valid UTF-8")]
    BadName,
    #[error("tensor {name} has inconsistent size: dims imply {expected}, file holds {actual}")]
    BadShape {
        name: String,
        expected: usize,
        actual: usize,
    },
}

pub fn save(params: &ParameterStore, path: &Path) -> Result<(), CheckpointError> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&(params.names().len() as u32).to_le_bytes())?;
    for (name, t) in params.iter() {
        w.write_all(&(name.len() as u32).to_le_bytes())?;
        w.write_all(name.as_bytes())?;
        w.write_all(&(t.dims.len() as u32).to_le_bytes())?;
        for &d in &t.dims {
            w.write_all(&(d as u32).to_le_bytes())?;
        }
        for &v in &t.data {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn load(path: &Path) -> Result<ParameterStore, CheckpointError> {
    let mut r = BufReader::new(File::open(path)?);
    let count = read_u32(&mut r)?;
    let mut store = ParameterStore::new(0);
    for _ in 0..count {
        let name_len = read_u32(&mut r)? as usize;
        let mut name_bytes = vec![0u8; name_len];
        r.read_exact(&mut name_bytes)?;
        let name = String::from_utf8(name_bytes).map_err(|_| CheckpointError::BadName)?;
        let rank = read_u32(&mut r)? as usize;
        let mut dims = Vec::with_capacity(rank);
        for _ in 0..rank {
            dims.push(read_u32(&mut r)? as usize);
        }
        let len: usize = dims.iter().product();
        let mut data = vec![0.0f64; len];
        let mut buf = [0u8; 8];
        for v in &mut data {
            r.read_exact(&mut buf)?;
            *v = f64::from_le_bytes(buf);
        }
        if data.len() != len {
            return Err(CheckpointError::BadShape {
                name,
                expected: len,
                actual: data.len(),
            });
        }
        store.insert(&name, Tensor { dims, data });
    }
    Ok(store)
}

fn read_u32(r: &mut impl Read) -> io::Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}
