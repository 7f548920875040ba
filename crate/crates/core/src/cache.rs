//! Binary weight-cache files.
//!
//! Layout, all integers and floats little-endian:
//!
//! | field            | type        |
//! |------------------|-------------|
//! | magic            | `b"BSPW"`   |
//! | format version   | `u32`       |
//! | payload kind     | `u8` (1 = direct `G`, 2 = fast `F` + loss diagonal) |
//! | kernel tag       | `u8` (1 = VHS, 2 = VSS) |
//! | kernel params    | `3 × f64` (`b, γ, η`; `η = 0` for VHS) |
//! | `N`, `N_r`, `M`  | `3 × u32`   |
//! | `L`, `R`         | `2 × f64`   |
//! | payload          | `(re, im)` pairs of `f64` |
//! | checksum         | `u64`, XXH3-64 of the payload bytes |
//!
//! Kind 1 stores `G(l, m)` with `l` outer and `m` inner. Kind 2 stores the `F`
//! table (`k` outer, then `q`, then `s`) when the kernel is angle-dependent,
//! followed by the `N³` loss diagonal. Modes are in DFT order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use xxhash_rust::xxh3::Xxh3;

use crate::direct::DirectWeights;
use crate::error::{Error, Result};
use crate::fast::FastWeights;
use crate::grid::VelocityGrid;
use crate::kernels::CollisionKernel;
use crate::quadrature::{RadialRule, SphereRule};

pub const MAGIC: [u8; 4] = *b"BSPW";
pub const FORMAT_VERSION: u32 = 1;
/// Bytes before the payload.
pub const HEADER_BYTES: usize = 4 + 4 + 1 + 1 + 24 + 12 + 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum PayloadKind {
    Direct = 1,
    Fast = 2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CacheHeader {
    pub kind: PayloadKind,
    pub kernel_tag: u8,
    pub kernel_params: [f64; 3],
    pub n: u32,
    pub radial_points: u32,
    pub sphere_points: u32,
    pub half_width: f64,
    pub radius: f64,
}

/// `(tag, [b, γ, η])` for kernels that can be cached.
pub fn kernel_descriptor(kernel: &CollisionKernel) -> Result<(u8, [f64; 3])> {
    match *kernel {
        CollisionKernel::Vhs { b, gamma } => Ok((1, [b, gamma, 0.0])),
        CollisionKernel::Vss { b, gamma, eta } => Ok((2, [b, gamma, eta])),
        CollisionKernel::Custom(ref c) => Err(Error::Cache(format!(
            "custom kernel '{}' has no stable descriptor and cannot be cached",
            c.name()
        ))),
    }
}

impl CacheHeader {
    pub fn new(
        kind: PayloadKind,
        grid: &VelocityGrid,
        kernel: &CollisionKernel,
        radial_points: usize,
        sphere_points: usize,
    ) -> Result<Self> {
        let (kernel_tag, kernel_params) = kernel_descriptor(kernel)?;
        Ok(Self {
            kind,
            kernel_tag,
            kernel_params,
            n: grid.n() as u32,
            radial_points: radial_points as u32,
            sphere_points: sphere_points as u32,
            half_width: grid.half_width(),
            radius: grid.radius(),
        })
    }

    /// Field-by-field comparison on exact bit patterns.
    pub fn matches(&self, other: &CacheHeader) -> bool {
        self.kind == other.kind
            && self.kernel_tag == other.kernel_tag
            && self
                .kernel_params
                .iter()
                .zip(&other.kernel_params)
                .all(|(a, b)| a.to_bits() == b.to_bits())
            && self.n == other.n
            && self.radial_points == other.radial_points
            && self.sphere_points == other.sphere_points
            && self.half_width.to_bits() == other.half_width.to_bits()
            && self.radius.to_bits() == other.radius.to_bits()
    }

    fn stores_f_table(&self) -> bool {
        self.kernel_tag == 2
    }

    /// Number of complex entries in the payload.
    pub fn payload_entries(&self) -> u128 {
        let n3 = (self.n as u128).pow(3);
        match self.kind {
            PayloadKind::Direct => n3 * n3,
            PayloadKind::Fast => {
                let table = if self.stores_f_table() {
                    n3 * self.radial_points as u128 * self.sphere_points as u128
                } else {
                    0
                };
                table + n3
            }
        }
    }

    /// Payload size in bytes.
    pub fn payload_bytes(&self) -> u128 {
        self.payload_entries() * 16
    }

    fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_BYTES);
        out.extend_from_slice(&MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.push(self.kind as u8);
        out.push(self.kernel_tag);
        for p in self.kernel_params {
            out.extend_from_slice(&p.to_le_bytes());
        }
        for v in [self.n, self.radial_points, self.sphere_points] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.extend_from_slice(&self.half_width.to_le_bytes());
        out.extend_from_slice(&self.radius.to_le_bytes());
        out
    }

    fn decode(bytes: &[u8; HEADER_BYTES]) -> Result<Self> {
        if bytes[0..4] != MAGIC {
            return Err(Error::Cache("not a weight cache file (bad magic)".into()));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        let version = u32_at(4);
        if version != FORMAT_VERSION {
            return Err(Error::Cache(format!(
                "unsupported format version {version} (expected {FORMAT_VERSION})"
            )));
        }
        let kind = match bytes[8] {
            1 => PayloadKind::Direct,
            2 => PayloadKind::Fast,
            other => return Err(Error::Cache(format!("unknown payload kind {other}"))),
        };
        Ok(Self {
            kind,
            kernel_tag: bytes[9],
            kernel_params: [f64_at(10), f64_at(18), f64_at(26)],
            n: u32_at(34),
            radial_points: u32_at(38),
            sphere_points: u32_at(42),
            half_width: f64_at(46),
            radius: f64_at(54),
        })
    }
}

/// Outcome of trying to load a cache for a given configuration.
#[derive(Debug)]
pub enum CacheLoad<T> {
    Hit(T),
    /// The file exists but was written for a different configuration.
    Mismatch { found: CacheHeader },
}

fn write_file(path: &Path, header: &CacheHeader, chunks: &[&[Complex64]]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    out.write_all(&header.encode())?;
    let mut hasher = Xxh3::new();
    let mut buf = Vec::with_capacity(16 * 4096);
    for chunk in chunks {
        for block in chunk.chunks(4096) {
            buf.clear();
            for c in block {
                buf.extend_from_slice(&c.re.to_le_bytes());
                buf.extend_from_slice(&c.im.to_le_bytes());
            }
            hasher.update(&buf);
            out.write_all(&buf)?;
        }
    }
    out.write_all(&hasher.digest().to_le_bytes())?;
    out.flush()?;
    Ok(())
}

fn read_header(reader: &mut impl Read) -> Result<CacheHeader> {
    let mut head = [0u8; HEADER_BYTES];
    reader
        .read_exact(&mut head)
        .map_err(|e| Error::Cache(format!("truncated header: {e}")))?;
    CacheHeader::decode(&head)
}

/// Reads only the header of a cache file.
pub fn peek_header(path: &Path) -> Result<CacheHeader> {
    read_header(&mut BufReader::new(File::open(path)?))
}

fn read_payload(reader: &mut impl Read, entries: usize) -> Result<Vec<Complex64>> {
    let mut hasher = Xxh3::new();
    let mut out = Vec::with_capacity(entries);
    let mut buf = vec![0u8; 16 * 4096];
    let mut remaining = entries;
    while remaining > 0 {
        let take = remaining.min(4096);
        let bytes = &mut buf[..16 * take];
        reader
            .read_exact(bytes)
            .map_err(|e| Error::Cache(format!("truncated payload: {e}")))?;
        hasher.update(bytes);
        for pair in bytes.chunks_exact(16) {
            let re = f64::from_le_bytes(pair[..8].try_into().unwrap());
            let im = f64::from_le_bytes(pair[8..].try_into().unwrap());
            out.push(Complex64::new(re, im));
        }
        remaining -= take;
    }
    let mut tail = [0u8; 8];
    reader
        .read_exact(&mut tail)
        .map_err(|e| Error::Cache(format!("missing checksum: {e}")))?;
    let stored = u64::from_le_bytes(tail);
    let computed = hasher.digest();
    if stored != computed {
        return Err(Error::Checksum { stored, computed });
    }
    Ok(out)
}

pub fn write_direct(path: &Path, weights: &DirectWeights, radial_points: usize, sphere_points: usize) -> Result<CacheHeader> {
    let header = CacheHeader::new(
        PayloadKind::Direct,
        weights.grid(),
        weights.kernel(),
        radial_points,
        sphere_points,
    )?;
    write_file(path, &header, &[weights.table()])?;
    Ok(header)
}

pub fn read_direct(
    path: &Path,
    grid: &VelocityGrid,
    kernel: &CollisionKernel,
    radial_points: usize,
    sphere_points: usize,
) -> Result<CacheLoad<DirectWeights>> {
    let expected = CacheHeader::new(PayloadKind::Direct, grid, kernel, radial_points, sphere_points)?;
    let mut reader = BufReader::new(File::open(path)?);
    let found = read_header(&mut reader)?;
    if !found.matches(&expected) {
        return Ok(CacheLoad::Mismatch { found });
    }
    let table = read_payload(&mut reader, expected.payload_entries() as usize)?;
    Ok(CacheLoad::Hit(DirectWeights::from_table(*grid, kernel.clone(), table)?))
}

pub fn write_fast(path: &Path, weights: &FastWeights) -> Result<CacheHeader> {
    let header = CacheHeader::new(
        PayloadKind::Fast,
        weights.grid(),
        weights.kernel(),
        weights.radial().len(),
        weights.sphere().len(),
    )?;
    let table = weights.f_table();
    if table.is_some() != header.stores_f_table() {
        return Err(Error::Cache(
            "only angle-dependent kernels store an F table in the cache format".into(),
        ));
    }
    let mut chunks: Vec<&[Complex64]> = Vec::new();
    if let Some(t) = table {
        chunks.push(t);
    }
    chunks.push(weights.loss_diag());
    write_file(path, &header, &chunks)?;
    Ok(header)
}

pub fn read_fast(
    path: &Path,
    grid: &VelocityGrid,
    kernel: &CollisionKernel,
    radial: &RadialRule,
    sphere: &SphereRule,
) -> Result<CacheLoad<FastWeights>> {
    let expected = CacheHeader::new(PayloadKind::Fast, grid, kernel, radial.len(), sphere.len())?;
    let mut reader = BufReader::new(File::open(path)?);
    let found = read_header(&mut reader)?;
    if !found.matches(&expected) {
        return Ok(CacheLoad::Mismatch { found });
    }
    let mut payload = read_payload(&mut reader, expected.payload_entries() as usize)?;
    let diag = payload.split_off(payload.len() - grid.len());
    let table = if expected.stores_f_table() { Some(payload) } else { None };
    Ok(CacheLoad::Hit(FastWeights::from_parts(
        *grid,
        kernel.clone(),
        radial.clone(),
        sphere.clone(),
        table,
        diag,
    )?))
}
