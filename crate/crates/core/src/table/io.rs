//! Binary cache container and plain-text export.
//!
//! Layout (little-endian): magic, format version, parameters, repaired
//! entry list, entry payload, then the SHA-256 of everything before it.

use std::fs;
use std::io::Write;
use std::path::Path;

use sha2::{Digest, Sha256};

use super::{Entry, FrequencyGrid, ModeTable, TableParams};
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"GEONMODE";
pub(super) const FORMAT_VERSION: u32 = 1;
const HASH_LEN: usize = 32;

pub fn persist(table: &ModeTable, path: &Path) -> Result<()> {
    let mut buf = Vec::with_capacity(64 + table.entries.len() * 40);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    let p = &table.params;
    buf.extend_from_slice(&p.r_det.to_le_bytes());
    buf.extend_from_slice(&p.l_max.to_le_bytes());
    buf.extend_from_slice(&p.grid.omega_min.to_le_bytes());
    buf.extend_from_slice(&p.grid.omega_max.to_le_bytes());
    buf.extend_from_slice(&(p.grid.nodes as u64).to_le_bytes());
    buf.extend_from_slice(&(table.repaired.len() as u64).to_le_bytes());
    for &(l, k) in &table.repaired {
        buf.extend_from_slice(&l.to_le_bytes());
        buf.extend_from_slice(&(k as u64).to_le_bytes());
    }
    for e in &table.entries {
        for v in [e.r_in_sq, e.r_up_sq, e.unitarity_defect, e.reciprocity_defect, e.wronskian_drift] {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    let digest = Sha256::digest(&buf);
    buf.extend_from_slice(&digest);

    // Write to a sibling file first so a crash never leaves a half-written cache.
    let tmp = path.with_extension("partial");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(&buf)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take<const N: usize>(&mut self) -> Option<[u8; N]> {
        let out = self.bytes.get(self.pos..self.pos + N)?.try_into().ok()?;
        self.pos += N;
        Some(out)
    }

    fn u32(&mut self) -> Option<u32> {
        self.take().map(u32::from_le_bytes)
    }

    fn u64(&mut self) -> Option<u64> {
        self.take().map(u64::from_le_bytes)
    }

    fn f64(&mut self) -> Option<f64> {
        self.take().map(f64::from_le_bytes)
    }
}

pub fn load(path: &Path) -> Result<ModeTable> {
    let bytes = fs::read(path)?;
    let corrupt = |reason: &str| Error::Corrupt { path: path.to_path_buf(), reason: reason.into() };
    if bytes.len() < MAGIC.len() + HASH_LEN || &bytes[..MAGIC.len()] != MAGIC {
        return Err(corrupt("not a mode table file"));
    }
    let (body, stored) = bytes.split_at(bytes.len() - HASH_LEN);
    if Sha256::digest(body).as_slice() != stored {
        return Err(Error::HashMismatch { path: path.to_path_buf() });
    }
    let mut r = Reader { bytes: body, pos: MAGIC.len() };
    let version = r.u32().ok_or_else(|| corrupt("truncated header"))?;
    if version != FORMAT_VERSION {
        return Err(corrupt(&format!("unsupported format version {version}")));
    }
    let header = (|| {
        let r_det = r.f64()?;
        let l_max = r.u32()?;
        let omega_min = r.f64()?;
        let omega_max = r.f64()?;
        let nodes = r.u64()? as usize;
        Some(TableParams { r_det, l_max, grid: FrequencyGrid { omega_min, omega_max, nodes } })
    })()
    .ok_or_else(|| corrupt("truncated header"))?;
    header.grid.validate().map_err(|e| corrupt(&e.to_string()))?;
    let n_repaired = r.u64().ok_or_else(|| corrupt("truncated header"))? as usize;
    let mut repaired = Vec::with_capacity(n_repaired.min(1 << 20));
    for _ in 0..n_repaired {
        let l = r.u32().ok_or_else(|| corrupt("truncated repair list"))?;
        let k = r.u64().ok_or_else(|| corrupt("truncated repair list"))? as usize;
        repaired.push((l, k));
    }
    let total = header.grid.nodes * (header.l_max as usize + 1);
    if body.len() - r.pos != total * 40 {
        return Err(corrupt("payload length does not match header"));
    }
    let mut entries = Vec::with_capacity(total);
    for _ in 0..total {
        let mut v = [0.0; 5];
        for x in &mut v {
            *x = r.f64().expect("length checked");
        }
        entries.push(Entry {
            r_in_sq: v[0],
            r_up_sq: v[1],
            unitarity_defect: v[2],
            reciprocity_defect: v[3],
            wronskian_drift: v[4],
        });
    }
    Ok(ModeTable::from_parts(header, entries, repaired))
}

/// Loads a table and checks it was built for `expected`.
pub fn load_expecting(path: &Path, expected: &TableParams) -> Result<ModeTable> {
    let table = load(path)?;
    let found = table.params();
    let same = found.r_det.to_bits() == expected.r_det.to_bits()
        && found.l_max == expected.l_max
        && found.grid.omega_min.to_bits() == expected.grid.omega_min.to_bits()
        && found.grid.omega_max.to_bits() == expected.grid.omega_max.to_bits()
        && found.grid.nodes == expected.grid.nodes;
    if !same {
        return Err(Error::ParameterMismatch {
            path: path.to_path_buf(),
            expected: expected.describe(),
            found: found.describe(),
        });
    }
    Ok(table)
}

/// Whitespace-separated columns, one row per (l, ω).
pub fn write_text(table: &ModeTable, path: &Path) -> Result<()> {
    let mut out = String::new();
    out.push_str(&format!("# mode table: {}\n", table.params().describe()));
    out.push_str("# l omega R_in_sq R_up_sq unitarity_defect reciprocity_defect wronskian_drift\n");
    for l in 0..=table.l_max() {
        for (k, w) in table.frequencies().iter().enumerate() {
            let e = table.entry(l, k);
            out.push_str(&format!(
                "{l} {w:.17e} {:.17e} {:.17e} {:.3e} {:.3e} {:.3e}\n",
                e.r_in_sq, e.r_up_sq, e.unitarity_defect, e.reciprocity_defect, e.wronskian_drift
            ));
        }
    }
    fs::write(path, out)?;
    Ok(())
}
