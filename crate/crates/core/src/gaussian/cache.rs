//! Binary ensemble cache: a fixed little-endian header followed by
//! row-major `f64` path values.
//!
//! ```text
//! magic "FRLT" | version u16 | H f64 | T f64 | n u32 | count u32 | seed u64 | tag u8 | values…
//! ```

use std::io::{Read, Write};

use super::paths::{GeneratorTag, PathEnsemble};
use crate::error::{FracError, Result};
use crate::grid::TimeGrid;
use crate::hurst::HurstIndex;

pub const CACHE_MAGIC: [u8; 4] = *b"FRLT";
pub const CACHE_VERSION: u16 = 1;

pub fn write_ensemble(out: &mut impl Write, ensemble: &PathEnsemble) -> Result<()> {
    let n = u32::try_from(ensemble.grid().steps())
        .map_err(|_| FracError::Format("step count exceeds u32".into()))?;
    let count = u32::try_from(ensemble.count())
        .map_err(|_| FracError::Format("path count exceeds u32".into()))?;
    out.write_all(&CACHE_MAGIC)?;
    out.write_all(&CACHE_VERSION.to_le_bytes())?;
    out.write_all(&ensemble.hurst().value().to_le_bytes())?;
    out.write_all(&ensemble.grid().horizon().to_le_bytes())?;
    out.write_all(&n.to_le_bytes())?;
    out.write_all(&count.to_le_bytes())?;
    out.write_all(&ensemble.seed().to_le_bytes())?;
    out.write_all(&[ensemble.generator().code()])?;
    let mut buf = Vec::with_capacity(ensemble.values().len() * 8);
    for v in ensemble.values() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    out.write_all(&buf)?;
    Ok(())
}

fn take<const N: usize>(input: &mut impl Read) -> Result<[u8; N]> {
    let mut b = [0u8; N];
    input.read_exact(&mut b)?;
    Ok(b)
}

pub fn read_ensemble(input: &mut impl Read) -> Result<PathEnsemble> {
    if take::<4>(input)? != CACHE_MAGIC {
        return Err(FracError::Format("bad magic".into()));
    }
    let version = u16::from_le_bytes(take(input)?);
    if version != CACHE_VERSION {
        return Err(FracError::Format(format!("unsupported version {version}")));
    }
    let h = f64::from_le_bytes(take(input)?);
    let horizon = f64::from_le_bytes(take(input)?);
    let n = u32::from_le_bytes(take(input)?) as usize;
    let count = u32::from_le_bytes(take(input)?) as usize;
    let seed = u64::from_le_bytes(take(input)?);
    let [code] = take::<1>(input)?;
    let tag = GeneratorTag::from_code(code)
        .ok_or_else(|| FracError::Format(format!("unknown generator tag {code}")))?;
    let grid = TimeGrid::new(horizon, n)?;
    let hurst = HurstIndex::new(h)?;
    let total = count * (n + 1);
    let mut raw = vec![0u8; total * 8];
    input.read_exact(&mut raw)?;
    let values = raw
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    PathEnsemble::from_parts(grid, hurst, count, values, seed, tag)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::generate_paths;

    #[test]
    fn header_layout_and_round_trip() {
        let grid = TimeGrid::new(1.5, 8).unwrap();
        let h = HurstIndex::new(0.7).unwrap();
        let e = generate_paths(&grid, h, 3, 42, GeneratorTag::Circulant).unwrap();
        let mut bytes = Vec::new();
        write_ensemble(&mut bytes, &e).unwrap();
        assert_eq!(&bytes[..4], b"FRLT");
        assert_eq!(u16::from_le_bytes([bytes[4], bytes[5]]), 1);
        assert_eq!(f64::from_le_bytes(bytes[6..14].try_into().unwrap()), 0.7);
        assert_eq!(f64::from_le_bytes(bytes[14..22].try_into().unwrap()), 1.5);
        assert_eq!(u32::from_le_bytes(bytes[22..26].try_into().unwrap()), 8);
        assert_eq!(u32::from_le_bytes(bytes[26..30].try_into().unwrap()), 3);
        assert_eq!(u64::from_le_bytes(bytes[30..38].try_into().unwrap()), 42);
        assert_eq!(bytes[38], GeneratorTag::Circulant.code());
        assert_eq!(bytes.len(), 39 + 3 * 9 * 8);
        let back = read_ensemble(&mut bytes.as_slice()).unwrap();
        assert_eq!(back, e);
    }

    #[test]
    fn rejects_bad_magic_and_truncation() {
        let mut bytes = b"XXXX".to_vec();
        bytes.extend([0u8; 40]);
        assert!(read_ensemble(&mut bytes.as_slice()).is_err());
        let grid = TimeGrid::new(1.0, 4).unwrap();
        let e = generate_paths(&grid, HurstIndex::new(0.6).unwrap(), 1, 1, GeneratorTag::Cholesky)
            .unwrap();
        let mut good = Vec::new();
        write_ensemble(&mut good, &e).unwrap();
        good.truncate(good.len() - 3);
        assert!(read_ensemble(&mut good.as_slice()).is_err());
    }
}
