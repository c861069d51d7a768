use std::path::Path;

use crate::error::{Error, Result};

const GRID_MAGIC: &[u8; 4] = b"EGRD";

/// Row-major `rows × cols × dim` grid of finite values.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingGrid {
    rows: usize,
    cols: usize,
    dim: usize,
    values: Vec<f32>,
}

impl EmbeddingGrid {
    pub fn new(rows: usize, cols: usize, dim: usize, values: Vec<f32>) -> Result<Self> {
        if values.len() != rows * cols * dim {
            return Err(Error::domain(format!(
                "embedding grid {rows}x{cols}x{dim} needs {} values, got {}",
                rows * cols * dim,
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::domain(format!("embedding value {i} is not finite")));
        }
        Ok(EmbeddingGrid { rows, cols, dim, values })
    }

    /// Builds a grid by evaluating `f(row, col, channel)`.
    pub fn from_fn(
        rows: usize,
        cols: usize,
        dim: usize,
        mut f: impl FnMut(usize, usize, usize) -> f32,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(rows * cols * dim);
        for r in 0..rows {
            for c in 0..cols {
                for d in 0..dim {
                    values.push(f(r, c, d));
                }
            }
        }
        Self::new(rows, cols, dim, values)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn get(&self, row: usize, col: usize, channel: usize) -> f32 {
        self.values[(row * self.cols + col) * self.dim + channel]
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        encode_tensor(GRID_MAGIC, &[self.rows, self.cols, self.dim], &self.values)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let (dims, values) = decode_tensor(GRID_MAGIC, 3, bytes)?;
        Self::new(dims[0], dims[1], dims[2], values)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_bytes(&std::fs::read(path).map_err(|e| Error::io(path, e))?)
    }
}

/// Magic, then each dimension as u32 LE, then f32 LE values.
pub(crate) fn encode_tensor(magic: &[u8; 4], dims: &[usize], values: &[f32]) -> Vec<u8> {
    let mut out = Vec::with_capacity(4 + 4 * dims.len() + 4 * values.len());
    out.extend_from_slice(magic);
    for &d in dims {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub(crate) fn decode_tensor(
    magic: &[u8; 4],
    ndims: usize,
    bytes: &[u8],
) -> Result<(Vec<usize>, Vec<f32>)> {
    let header = 4 + 4 * ndims;
    if bytes.len() < header || &bytes[..4] != magic {
        return Err(Error::Format(format!(
            "expected {} header",
            String::from_utf8_lossy(magic)
        )));
    }
    let dims: Vec<usize> = bytes[4..header]
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes(c.try_into().unwrap()) as usize)
        .collect();
    let count: usize = dims.iter().product();
    if bytes.len() != header + 4 * count {
        return Err(Error::Format(format!(
            "{} payload: expected {} value bytes, found {}",
            String::from_utf8_lossy(magic),
            4 * count,
            bytes.len() - header
        )));
    }
    let values = bytes[header..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((dims, values))
}

/// Align-corners source coordinates: dst·(in−1)/(out−1).
fn corner_aligned(input: usize, output: usize) -> Vec<(usize, usize, f64)> {
    (0..output)
        .map(|d| {
            if output == 1 || input == 1 {
                return (0, 0, 0.0);
            }
            let src = d as f64 * (input - 1) as f64 / (output - 1) as f64;
            let i0 = (src.floor() as usize).min(input - 2);
            (i0, i0 + 1, src - i0 as f64)
        })
        .collect()
}

/// Resamples a position-embedding grid to `out_rows × out_cols` with
/// per-channel bilinear interpolation, corners aligned.
pub fn interpolate_pos_embed(
    grid: &EmbeddingGrid,
    out_rows: usize,
    out_cols: usize,
) -> Result<EmbeddingGrid> {
    if out_rows == 0 || out_cols == 0 {
        return Err(Error::domain("interpolate_pos_embed: output shape must be at least 1x1"));
    }
    if out_rows == grid.rows && out_cols == grid.cols {
        return Ok(grid.clone());
    }
    if grid.rows < 2 || grid.cols < 2 {
        return Err(Error::domain(format!(
            "interpolate_pos_embed: cannot interpolate a degenerate {}x{} source",
            grid.rows, grid.cols
        )));
    }
    let ys = corner_aligned(grid.rows, out_rows);
    let xs = corner_aligned(grid.cols, out_cols);
    let dim = grid.dim;
    let mut values = Vec::with_capacity(out_rows * out_cols * dim);
    for &(r0, r1, fy) in &ys {
        for &(c0, c1, fx) in &xs {
            for d in 0..dim {
                let at = |r, c| f64::from(grid.get(r, c, d));
                let top = at(r0, c0) * (1.0 - fx) + at(r0, c1) * fx;
                let bottom = at(r1, c0) * (1.0 - fx) + at(r1, c1) * fx;
                values.push((top * (1.0 - fy) + bottom * fy) as f32);
            }
        }
    }
    EmbeddingGrid::new(out_rows, out_cols, dim, values)
}
