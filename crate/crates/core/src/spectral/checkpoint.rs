//! Binary and JSON serialization of fields.
//!
//! Binary layout, all little-endian:
//!
//! ```text
//! offset  size  content
//! 0       8     magic "TSSPFLD1"
//! 8       1     representation: 0 = nodal, 1 = spectral
//! 9       1     state flag: 0 = bare field, 1 = state block present
//! 10      6     reserved (zero)
//! 16      8     a  (f64)
//! 24      8     b  (f64)
//! 32      8     N  (u64)
//! [state block, only when flag = 1]
//! 40      8     step index (u64)
//! 48      8     time (f64)
//! 56      1     scheme tag (0 = lie-kinetic-last, 1 = lie-kinetic-first, 2 = strang)
//! 57      7     reserved (zero)
//! [payload]
//! ..      8     value count (u64): N + 1 for nodal, N - 1 for spectral
//! ..      16*k  interleaved (re, im) f64 pairs
//! ```

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Grid1D, NodalField, SpectralField};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"TSSPFLD1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    Nodal,
    Spectral,
}

/// Either face of a discretized wave function.
#[derive(Clone, Debug, PartialEq)]
pub enum Field {
    Nodal(NodalField),
    Spectral(SpectralField),
}

impl Field {
    pub fn grid(&self) -> &Grid1D {
        match self {
            Field::Nodal(v) => v.grid(),
            Field::Spectral(c) => c.grid(),
        }
    }

    pub fn representation(&self) -> Representation {
        match self {
            Field::Nodal(_) => Representation::Nodal,
            Field::Spectral(_) => Representation::Spectral,
        }
    }

    fn data(&self) -> &[Complex64] {
        match self {
            Field::Nodal(v) => v.values(),
            Field::Spectral(c) => c.coefficients(),
        }
    }

    fn from_data(repr: Representation, grid: Grid1D, data: Vec<Complex64>) -> Result<Self> {
        Ok(match repr {
            Representation::Nodal => Field::Nodal(NodalField::new(grid, data)?),
            Representation::Spectral => Field::Spectral(SpectralField::new(grid, data)?),
        })
    }
}

/// Time-stepping metadata stored alongside a field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateHeader {
    pub step_index: u64,
    pub time: f64,
    pub scheme_tag: u8,
}

pub fn write_checkpoint<W: Write>(
    mut w: W,
    field: &Field,
    state: Option<StateHeader>,
) -> Result<()> {
    let g = field.grid();
    let mut head = Vec::with_capacity(64);
    head.extend_from_slice(MAGIC);
    head.push(match field.representation() {
        Representation::Nodal => 0,
        Representation::Spectral => 1,
    });
    head.push(state.is_some() as u8);
    head.extend_from_slice(&[0u8; 6]);
    head.extend_from_slice(&g.a().to_le_bytes());
    head.extend_from_slice(&g.b().to_le_bytes());
    head.extend_from_slice(&(g.n() as u64).to_le_bytes());
    if let Some(s) = state {
        head.extend_from_slice(&s.step_index.to_le_bytes());
        head.extend_from_slice(&s.time.to_le_bytes());
        head.push(s.scheme_tag);
        head.extend_from_slice(&[0u8; 7]);
    }
    let data = field.data();
    head.extend_from_slice(&(data.len() as u64).to_le_bytes());
    w.write_all(&head)?;
    let mut body = Vec::with_capacity(16 * data.len());
    for z in data {
        body.extend_from_slice(&z.re.to_le_bytes());
        body.extend_from_slice(&z.im.to_le_bytes());
    }
    w.write_all(&body)?;
    Ok(())
}

fn read_array<const K: usize, R: Read>(r: &mut R) -> Result<[u8; K]> {
    let mut buf = [0u8; K];
    r.read_exact(&mut buf)
        .map_err(|e| Error::Checkpoint(format!("truncated input: {e}")))?;
    Ok(buf)
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    Ok(f64::from_le_bytes(read_array::<8, _>(r)?))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    Ok(u64::from_le_bytes(read_array::<8, _>(r)?))
}

pub fn read_checkpoint<R: Read>(mut r: R) -> Result<(Field, Option<StateHeader>)> {
    let magic = read_array::<8, _>(&mut r)?;
    if &magic != MAGIC {
        return Err(Error::Checkpoint("bad magic".into()));
    }
    let flags = read_array::<8, _>(&mut r)?;
    let repr = match flags[0] {
        0 => Representation::Nodal,
        1 => Representation::Spectral,
        t => return Err(Error::Checkpoint(format!("unknown representation tag {t}"))),
    };
    let has_state = match flags[1] {
        0 => false,
        1 => true,
        t => return Err(Error::Checkpoint(format!("bad state flag {t}"))),
    };
    let a = read_f64(&mut r)?;
    let b = read_f64(&mut r)?;
    let n = read_u64(&mut r)? as usize;
    let grid = Grid1D::new(a, b, n).map_err(|e| Error::Checkpoint(e.to_string()))?;
    let state = if has_state {
        let step_index = read_u64(&mut r)?;
        let time = read_f64(&mut r)?;
        let tail = read_array::<8, _>(&mut r)?;
        Some(StateHeader {
            step_index,
            time,
            scheme_tag: tail[0],
        })
    } else {
        None
    };
    let count = read_u64(&mut r)? as usize;
    let expected = match repr {
        Representation::Nodal => n + 1,
        Representation::Spectral => n - 1,
    };
    if count != expected {
        return Err(Error::Checkpoint(format!(
            "value count {count} does not match N = {n}"
        )));
    }
    let mut raw = vec![0u8; 16 * count];
    r.read_exact(&mut raw)
        .map_err(|e| Error::Checkpoint(format!("truncated payload: {e}")))?;
    let data = raw
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect();
    let field = Field::from_data(repr, grid, data).map_err(|e| Error::Checkpoint(e.to_string()))?;
    Ok((field, state))
}

/// JSON text form, meant for small fields.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldJson {
    pub a: f64,
    pub b: f64,
    pub n: usize,
    pub representation: Representation,
    pub values: Vec<[f64; 2]>,
}

impl From<&Field> for FieldJson {
    fn from(f: &Field) -> Self {
        let g = f.grid();
        FieldJson {
            a: g.a(),
            b: g.b(),
            n: g.n(),
            representation: f.representation(),
            values: f.data().iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl TryFrom<FieldJson> for Field {
    type Error = Error;

    fn try_from(j: FieldJson) -> Result<Self> {
        let grid = Grid1D::new(j.a, j.b, j.n)?;
        let data = j.values.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
        Field::from_data(j.representation, grid, data)
    }
}

pub fn to_json(field: &Field) -> Result<String> {
    Ok(serde_json::to_string_pretty(&FieldJson::from(field))?)
}

pub fn from_json(text: &str) -> Result<Field> {
    let j: FieldJson = serde_json::from_str(text)?;
    Field::try_from(j)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample_nodal(n: usize, seed: f64) -> NodalField {
        let g = Grid1D::new(-1.0, 3.0, n).unwrap();
        NodalField::from_fn(g, |x| Complex64::new((seed * x).sin(), x * seed))
    }

    #[test]
    fn header_layout() {
        let f = Field::Nodal(sample_nodal(4, 1.0));
        let mut buf = Vec::new();
        write_checkpoint(&mut buf, &f, None).unwrap();
        assert_eq!(&buf[..8], MAGIC);
        assert_eq!(buf[8], 0);
        assert_eq!(buf[9], 0);
        assert_eq!(f64::from_le_bytes(buf[16..24].try_into().unwrap()), -1.0);
        assert_eq!(u64::from_le_bytes(buf[32..40].try_into().unwrap()), 4);
        assert_eq!(u64::from_le_bytes(buf[40..48].try_into().unwrap()), 5);
        assert_eq!(buf.len(), 48 + 16 * 5);

        let mut buf = Vec::new();
        let st = StateHeader { step_index: 7, time: 0.07, scheme_tag: 2 };
        write_checkpoint(&mut buf, &f, Some(st)).unwrap();
        assert_eq!(buf.len(), 72 + 16 * 5);
        let (back, s) = read_checkpoint(buf.as_slice()).unwrap();
        assert_eq!(back, f);
        assert_eq!(s, Some(st));
    }

    #[test]
    fn rejects_corruption() {
        let f = Field::Nodal(sample_nodal(4, 1.0));
        let mut buf = Vec::new();
        write_checkpoint(&mut buf, &f, None).unwrap();
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(read_checkpoint(bad.as_slice()).is_err());
        let mut bad = buf.clone();
        bad[8] = 9;
        assert!(read_checkpoint(bad.as_slice()).is_err());
        assert!(read_checkpoint(&buf[..buf.len() - 1]).is_err());
        let mut bad = buf.clone();
        bad[40] = 4;
        assert!(read_checkpoint(bad.as_slice()).is_err());
    }

    #[test]
    fn json_form() {
        let g = Grid1D::new(0.0, 1.0, 4).unwrap();
        let c = SpectralField::new(g, vec![Complex64::new(1.0, -0.5); 3]).unwrap();
        let f = Field::Spectral(c);
        let text = to_json(&f).unwrap();
        assert!(text.contains("\"spectral\""));
        assert_eq!(from_json(&text).unwrap(), f);
        assert!(from_json(&text.replace("\"n\": 4", "\"n\": 5")).is_err());
    }

    proptest! {
        #[test]
        fn binary_round_trip(k in 1u32..7, seed in -5.0f64..5.0, spectral in any::<bool>(), step in any::<u64>()) {
            let v = sample_nodal(1 << k | 2, seed);
            let f = if spectral {
                Field::Spectral(crate::spectral::dst_analyze(&v))
            } else {
                Field::Nodal(v)
            };
            let st = StateHeader { step_index: step, time: seed, scheme_tag: 1 };
            let mut buf = Vec::new();
            write_checkpoint(&mut buf, &f, Some(st)).unwrap();
            let (back, s) = read_checkpoint(buf.as_slice()).unwrap();
            prop_assert_eq!(back, f);
            prop_assert_eq!(s, Some(st));
        }
    }
}
