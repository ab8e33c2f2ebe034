use crate::error::{Error, Result};
use crate::splines::GroupGrid;

/// Dense array `[channel, h?, spatial...]` on a regular spatial grid,
/// optionally lifted to `R^d x H_d`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    pub channels: usize,
    /// 0 for planar maps, `N_h` for lifted ones.
    pub h_size: usize,
    pub spatial_shape: Vec<usize>,
    pub grid: Option<GroupGrid>,
    pub spatial_step: f64,
    pub data: Vec<f64>,
}

/// Spatial shape padded with leading ones to three axes.
pub fn dims3(shape: &[usize]) -> Result<[usize; 3]> {
    match shape.len() {
        1 => Ok([1, 1, shape[0]]),
        2 => Ok([1, shape[0], shape[1]]),
        3 => Ok([shape[0], shape[1], shape[2]]),
        d => Err(Error::ShapeMismatch(format!("spatial dimension {d} not in 1..=3"))),
    }
}

impl FeatureMap {
    pub fn zeros(channels: usize, spatial_shape: &[usize]) -> Self {
        let n = channels * spatial_shape.iter().product::<usize>();
        FeatureMap {
            channels,
            h_size: 0,
            spatial_shape: spatial_shape.to_vec(),
            grid: None,
            spatial_step: 1.0,
            data: vec![0.0; n],
        }
    }

    pub fn zeros_lifted(channels: usize, grid: &GroupGrid, spatial_shape: &[usize]) -> Self {
        let n = channels * grid.len() * spatial_shape.iter().product::<usize>();
        FeatureMap {
            channels,
            h_size: grid.len(),
            spatial_shape: spatial_shape.to_vec(),
            grid: Some(grid.clone()),
            spatial_step: 1.0,
            data: vec![0.0; n],
        }
    }

    pub fn from_planar(channels: usize, spatial_shape: &[usize], data: Vec<f64>) -> Result<Self> {
        let mut f = FeatureMap::zeros(channels, spatial_shape);
        if data.len() != f.data.len() {
            return Err(Error::ShapeMismatch(format!("expected {} values, got {}", f.data.len(), data.len())));
        }
        f.data = data;
        Ok(f)
    }

    pub fn from_lifted(channels: usize, grid: &GroupGrid, spatial_shape: &[usize], data: Vec<f64>) -> Result<Self> {
        let mut f = FeatureMap::zeros_lifted(channels, grid, spatial_shape);
        if data.len() != f.data.len() {
            return Err(Error::ShapeMismatch(format!("expected {} values, got {}", f.data.len(), data.len())));
        }
        f.data = data;
        Ok(f)
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.spatial_step = step;
        self
    }

    /// Zero map with the same layout.
    pub fn zeros_like(&self) -> Self {
        FeatureMap { data: vec![0.0; self.data.len()], ..self.clone() }
    }

    pub fn is_lifted(&self) -> bool {
        self.h_size > 0
    }

    /// `max(1, h_size)`.
    pub fn h_slices(&self) -> usize {
        self.h_size.max(1)
    }

    pub fn spatial_len(&self) -> usize {
        self.spatial_shape.iter().product()
    }

    pub fn dims3(&self) -> [usize; 3] {
        dims3(&self.spatial_shape).expect("validated spatial shape")
    }

    /// Contiguous spatial slice of channel `c` at `h` slot `h`.
    pub fn slice(&self, c: usize, h: usize) -> &[f64] {
        let n = self.spatial_len();
        let start = (c * self.h_slices() + h) * n;
        &self.data[start..start + n]
    }

    pub fn slice_mut(&mut self, c: usize, h: usize) -> &mut [f64] {
        let n = self.spatial_len();
        let start = (c * self.h_slices() + h) * n;
        &mut self.data[start..start + n]
    }

    pub fn check_invariants(&self) -> Result<()> {
        dims3(&self.spatial_shape)?;
        if self.data.len() != self.channels * self.h_slices() * self.spatial_len() {
            return Err(Error::ShapeMismatch("data length".into()));
        }
        match (&self.grid, self.h_size) {
            (None, 0) => Ok(()),
            (Some(g), n) if g.len() == n => Ok(()),
            _ => Err(Error::GridMismatch),
        }
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `max |a - b|` over matching layouts.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        if self.data.len() != other.data.len() || self.spatial_shape != other.spatial_shape {
            return Err(Error::ShapeMismatch("feature maps differ in layout".into()));
        }
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    }
}
