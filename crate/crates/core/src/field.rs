//! Uniform periodic grids and the scalar and vector fields sampled on them.
//!
//! Snapshot files use a self-describing little-endian layout:
//!
//! ```text
//! "TSPF1"                      5-byte magic
//! dimension                    u32
//! sizes[dimension]             u64 each
//! spacings[dimension]          f64 each (m)
//! component count              u32
//! samples                      f64, component-major, each component row-major
//! ```

use std::f64::consts::PI;
use std::io::{Read, Write};

use crate::error::{invalid, require_positive, Error, Result};

pub const SNAPSHOT_MAGIC: &[u8; 5] = b"TSPF1";
pub const MIN_POINTS_PER_AXIS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dimension {
    Two,
    Three,
}

impl Dimension {
    pub fn from_usize(d: usize) -> Result<Self> {
        match d {
            2 => Ok(Dimension::Two),
            3 => Ok(Dimension::Three),
            _ => Err(invalid("dimension", format!("must be 2 or 3, got {d}"))),
        }
    }

    pub fn get(self) -> usize {
        match self {
            Dimension::Two => 2,
            Dimension::Three => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    shape: Vec<usize>,
    spacing: Vec<f64>,
    periodic: bool,
}

impl FieldGrid {
    pub fn new(shape: Vec<usize>, spacing: Vec<f64>) -> Result<Self> {
        Dimension::from_usize(shape.len())?;
        if spacing.len() != shape.len() {
            return Err(invalid("spacing", "one spacing per axis is required"));
        }
        for &n in &shape {
            if n < MIN_POINTS_PER_AXIS {
                return Err(invalid(
                    "n",
                    format!("at least {MIN_POINTS_PER_AXIS} points per axis, got {n}"),
                ));
            }
        }
        for &h in &spacing {
            require_positive("h", h)?;
        }
        Ok(Self {
            shape,
            spacing,
            periodic: true,
        })
    }

    /// Cubic grid with `n` points and spacing `h` on every axis.
    pub fn uniform(dim: Dimension, n: usize, h: f64) -> Result<Self> {
        Self::new(vec![n; dim.get()], vec![h; dim.get()])
    }

    pub fn dimension(&self) -> Dimension {
        Dimension::from_usize(self.shape.len()).expect("validated")
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn periodic(&self) -> bool {
        self.periodic
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn domain_length(&self, axis: usize) -> f64 {
        self.shape[axis] as f64 * self.spacing[axis]
    }

    /// Cell volume `Π h_i`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    /// Distance between adjacent flat indices along `axis`.
    pub fn stride(&self, axis: usize) -> usize {
        self.shape[axis + 1..].iter().product()
    }

    /// Angular wavenumbers along `axis` in FFT order.
    pub fn wavenumbers(&self, axis: usize) -> Vec<f64> {
        let n = self.shape[axis];
        let dk = 2.0 * PI / self.domain_length(axis);
        (0..n)
            .map(|j| {
                let signed = if j <= n / 2 { j as i64 } else { j as i64 - n as i64 };
                signed as f64 * dk
            })
            .collect()
    }

    /// Multi-index of a flat row-major index.
    pub fn unravel(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.shape.len()];
        for axis in (0..self.shape.len()).rev() {
            out[axis] = idx % self.shape[axis];
            idx /= self.shape[axis];
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub grid: FieldGrid,
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: FieldGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} samples for a grid of {}",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: FieldGrid) -> Self {
        let n = grid.len();
        Self {
            grid,
            values: vec![0.0; n],
        }
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Mean of squares about the sample mean.
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / self.values.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub grid: FieldGrid,
    pub components: Vec<Vec<f64>>,
}

impl VectorField {
    pub fn new(grid: FieldGrid, components: Vec<Vec<f64>>) -> Result<Self> {
        if components.is_empty() {
            return Err(invalid("components", "at least one component is required"));
        }
        if components.iter().any(|c| c.len() != grid.len()) {
            return Err(Error::GridMismatch("component length differs from grid".into()));
        }
        Ok(Self { grid, components })
    }

    pub fn component(&self, i: usize) -> &[f64] {
        &self.components[i]
    }

    pub fn max_magnitude(&self) -> f64 {
        (0..self.grid.len())
            .map(|p| self.components.iter().map(|c| c[p] * c[p]).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    /// `½ ⟨|v|²⟩` over the grid.
    pub fn kinetic_energy(&self) -> f64 {
        let n = self.grid.len() as f64;
        0.5 * self
            .components
            .iter()
            .map(|c| c.iter().map(|v| v * v).sum::<f64>())
            .sum::<f64>()
            / n
    }

    pub fn write_snapshot<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(SNAPSHOT_MAGIC)?;
        out.write_all(&(self.grid.shape.len() as u32).to_le_bytes())?;
        for &n in &self.grid.shape {
            out.write_all(&(n as u64).to_le_bytes())?;
        }
        for &h in &self.grid.spacing {
            out.write_all(&h.to_le_bytes())?;
        }
        out.write_all(&(self.components.len() as u32).to_le_bytes())?;
        let mut buf = Vec::with_capacity(8 * self.grid.len());
        for c in &self.components {
            buf.clear();
            for v in c {
                buf.extend_from_slice(&v.to_le_bytes());
            }
            out.write_all(&buf)?;
        }
        Ok(())
    }

    pub fn read_snapshot<R: Read>(mut input: R) -> Result<Self> {
        fn bad(reason: impl Into<String>) -> Error {
            Error::Format {
                what: "field snapshot",
                reason: reason.into(),
            }
        }
        let mut magic = [0u8; 5];
        input.read_exact(&mut magic)?;
        if &magic != SNAPSHOT_MAGIC {
            return Err(bad("bad magic, expected TSPF1"));
        }
        let mut u32b = [0u8; 4];
        let mut u64b = [0u8; 8];
        input.read_exact(&mut u32b)?;
        let dim = u32::from_le_bytes(u32b) as usize;
        if !(dim == 2 || dim == 3) {
            return Err(bad(format!("dimension {dim}")));
        }
        let mut shape = Vec::with_capacity(dim);
        for _ in 0..dim {
            input.read_exact(&mut u64b)?;
            shape.push(u64::from_le_bytes(u64b) as usize);
        }
        let mut spacing = Vec::with_capacity(dim);
        for _ in 0..dim {
            input.read_exact(&mut u64b)?;
            spacing.push(f64::from_le_bytes(u64b));
        }
        let grid = FieldGrid::new(shape, spacing)?;
        input.read_exact(&mut u32b)?;
        let count = u32::from_le_bytes(u32b) as usize;
        let n = grid.len();
        let mut bytes = vec![0u8; 8 * n];
        let mut components = Vec::with_capacity(count);
        for _ in 0..count {
            input.read_exact(&mut bytes)?;
            components.push(
                bytes
                    .chunks_exact(8)
                    .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
                    .collect(),
            );
        }
        let mut rest = Vec::new();
        input.read_to_end(&mut rest)?;
        if !rest.is_empty() {
            return Err(bad(format!("{} trailing bytes", rest.len())));
        }
        Self::new(grid, components)
    }

    /// Tab-delimited text: grid coordinates (m) then the components.
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        let dim = self.grid.shape.len();
        let coords = ["x[m]", "y[m]", "z[m]"];
        let mut header: Vec<String> = coords[..dim].iter().map(|s| s.to_string()).collect();
        header.extend((1..=self.components.len()).map(|i| format!("v{i}")));
        writeln!(out, "# {}", header.join("\t"))?;
        for p in 0..self.grid.len() {
            let idx = self.grid.unravel(p);
            let mut row: Vec<String> = idx
                .iter()
                .zip(&self.grid.spacing)
                .map(|(&i, &h)| format!("{:e}", i as f64 * h))
                .collect();
            row.extend(self.components.iter().map(|c| format!("{:e}", c[p])));
            writeln!(out, "{}", row.join("\t"))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(FieldGrid::uniform(Dimension::Two, 7, 1.0).is_err());
        assert!(FieldGrid::uniform(Dimension::Two, 8, 0.0).is_err());
        assert!(FieldGrid::new(vec![8, 8], vec![1.0]).is_err());
        assert!(FieldGrid::new(vec![8], vec![1.0]).is_err());
        let g = FieldGrid::new(vec![8, 16, 32], vec![1.0, 0.5, 0.25]).unwrap();
        assert_eq!(g.dimension(), Dimension::Three);
        assert_eq!(g.stride(0), 512);
        assert_eq!(g.unravel(512 + 32 + 3), vec![1, 1, 3]);
        assert!(g.periodic());
    }

    #[test]
    fn wavenumbers_fft_order() {
        let g = FieldGrid::uniform(Dimension::Two, 8, 0.25).unwrap();
        let k = g.wavenumbers(0);
        let dk = 2.0 * PI / 2.0;
        assert_eq!(k[1], dk);
        assert_eq!(k[4], 4.0 * dk);
        assert_eq!(k[5], -3.0 * dk);
    }

    #[test]
    fn snapshot_round_trip() {
        let g = FieldGrid::new(vec![8, 10], vec![0.1, 0.2]).unwrap();
        let a: Vec<f64> = (0..80).map(|i| (i as f64).sin()).collect();
        let b: Vec<f64> = (0..80).map(|i| -(i as f64) * 1e-3).collect();
        let v = VectorField::new(g, vec![a, b]).unwrap();
        let mut buf = Vec::new();
        v.write_snapshot(&mut buf).unwrap();
        assert_eq!(&buf[..5], b"TSPF1");
        assert_eq!(buf.len(), 5 + 4 + 16 + 16 + 4 + 2 * 80 * 8);
        assert_eq!(VectorField::read_snapshot(buf.as_slice()).unwrap(), v);
        buf[0] = b'X';
        assert!(VectorField::read_snapshot(buf.as_slice()).is_err());
    }

    #[test]
    fn text_export_has_header_and_rows() {
        let g = FieldGrid::uniform(Dimension::Two, 8, 1.0).unwrap();
        let v = VectorField::new(g, vec![vec![1.0; 64], vec![2.0; 64]]).unwrap();
        let mut buf = Vec::new();
        v.write_text(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 65);
        assert!(text.starts_with("# x[m]\ty[m]\tv1\tv2"));
    }
}
