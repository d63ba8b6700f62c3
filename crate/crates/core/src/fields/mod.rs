//! Sampled fields on periodic uniform grids and their differential operators.
//!
//! Grids are cell-vertex, centered on the origin: along axis `a` the sample
//! points are `x_i = -L_a/2 + i h_a`, `i = 0..N_a`, with `h_a = L_a / N_a`.
//! Two-dimensional fields are stored row-major with axis 0 (x) as the slow
//! index: `values[i0 * n1 + i1]`.

mod fd;
pub(crate) mod ops;
mod random;
pub(crate) mod spectral;

pub use ops::{
    div, div_tensor, grad, hessian, inner, laplacian, partial, second_partial, velocity_gradient,
};
pub use random::LogSmoothDensity;

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Derivative discretization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    /// Fourier pseudospectral; the Nyquist mode of odd derivatives is zeroed.
    #[default]
    Spectral,
    /// Centered second-order finite differences.
    Fd2,
    /// Centered fourth-order finite differences.
    Fd4,
}

impl Backend {
    pub fn name(self) -> &'static str {
        match self {
            Backend::Spectral => "spectral",
            Backend::Fd2 => "fd2",
            Backend::Fd4 => "fd4",
        }
    }

    /// Half-width of the first-derivative stencil; `None` for the global spectral operator.
    pub fn stencil_radius(self) -> Option<usize> {
        match self {
            Backend::Spectral => None,
            Backend::Fd2 => Some(1),
            Backend::Fd4 => Some(2),
        }
    }
}

impl std::str::FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spectral" => Ok(Backend::Spectral),
            "fd2" => Ok(Backend::Fd2),
            "fd4" => Ok(Backend::Fd4),
            other => Err(Error::param(
                "backend",
                format!("unknown backend `{other}` (expected spectral, fd2 or fd4)"),
            )),
        }
    }
}

/// Periodic uniform grid in one or two dimensions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dim: usize,
    n: [usize; 2],
    len: [f64; 2],
}

impl Grid {
    pub fn new_1d(length: f64, points: usize) -> Result<Self> {
        Self::validate_axis(0, length, points)?;
        Ok(Grid {
            dim: 1,
            n: [points, 1],
            len: [length, 1.0],
        })
    }

    pub fn new_2d(length: [f64; 2], points: [usize; 2]) -> Result<Self> {
        Self::validate_axis(0, length[0], points[0])?;
        Self::validate_axis(1, length[1], points[1])?;
        Ok(Grid {
            dim: 2,
            n: points,
            len: length,
        })
    }

    fn validate_axis(axis: usize, length: f64, points: usize) -> Result<()> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "axis {axis}: extent must be positive and finite, got {length}"
            )));
        }
        if points < 8 || points % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "axis {axis}: point count must be even and at least 8, got {points}"
            )));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self, axis: usize) -> usize {
        self.n[axis]
    }

    pub fn length(&self, axis: usize) -> f64 {
        self.len[axis]
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.len[axis] / self.n[axis] as f64
    }

    /// Total number of grid points.
    pub fn len(&self) -> usize {
        self.n[0] * self.n[1]
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Volume element `Π h_a` of the trapezoid (= rectangle) rule.
    pub fn cell_volume(&self) -> f64 {
        (0..self.dim).map(|a| self.spacing(a)).product()
    }

    /// Smallest spacing over all axes.
    pub fn min_spacing(&self) -> f64 {
        (0..self.dim)
            .map(|a| self.spacing(a))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        -0.5 * self.len[axis] + i as f64 * self.spacing(axis)
    }

    /// Sample coordinates along one axis.
    pub fn axis_coords(&self, axis: usize) -> Vec<f64> {
        (0..self.n[axis]).map(|i| self.coord(axis, i)).collect()
    }

    /// Coordinates of the flat index `idx` (unused axes are 0).
    pub fn point(&self, idx: usize) -> [f64; 2] {
        let i0 = idx / self.n[1];
        let i1 = idx % self.n[1];
        if self.dim == 1 {
            [self.coord(0, i0), 0.0]
        } else {
            [self.coord(0, i0), self.coord(1, i1)]
        }
    }

    /// Number of independent symmetric-tensor components.
    pub fn sym_components(&self) -> usize {
        self.dim * (self.dim + 1) / 2
    }

    pub fn ensure_same(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{self:?} vs {other:?}")))
        }
    }
}

/// Index of the `(i, j)` component in the packed symmetric storage.
pub(crate) fn sym_index(dim: usize, i: usize, j: usize) -> usize {
    let (a, b) = if i <= j { (i, j) } else { (j, i) };
    match dim {
        1 => 0,
        _ => match (a, b) {
            (0, 0) => 0,
            (0, 1) => 1,
            _ => 2,
        },
    }
}

fn check_finite(what: &'static str, values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        None => Ok(()),
        Some(index) => Err(Error::NonFinite {
            what,
            index,
            value: values[index],
        }),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        check_finite("scalar field", &values)?;
        Ok(ScalarField { grid, values })
    }

    /// Builds a field without the finiteness check; callers guarantee it.
    pub(crate) fn from_raw(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        ScalarField { grid, values }
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        ScalarField {
            grid,
            values: vec![c; grid.len()],
        }
    }

    pub fn zeros(grid: Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn from_fn(grid: Grid, f: impl Fn([f64; 2]) -> f64) -> Result<Self> {
        let values = (0..grid.len()).map(|i| f(grid.point(i))).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        ScalarField::from_raw(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        Ok(ScalarField::from_raw(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        ))
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    /// `a·self + b·other`.
    pub fn lin_comb(&self, a: f64, other: &ScalarField, b: f64) -> Result<Self> {
        self.zip_map(other, |x, y| a * x + b * y)
    }

    /// Trapezoid-rule integral over the periodic cell.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max |self - other|`.
    pub fn max_abs_diff(&self, other: &ScalarField) -> Result<f64> {
        self.grid.ensure_same(&other.grid)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    /// Relative discrete L² distance `‖self − reference‖ / ‖reference‖`.
    pub fn rel_l2_error(&self, reference: &ScalarField) -> Result<f64> {
        self.grid.ensure_same(&reference.grid)?;
        let (num, den) = self
            .values
            .iter()
            .zip(&reference.values)
            .fold((0.0, 0.0), |(n, d), (a, b)| (n + (a - b) * (a - b), d + b * b));
        Ok((num / den).sqrt())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: Grid,
    comps: Vec<Vec<f64>>,
}

impl VectorField {
    pub fn new(grid: Grid, comps: Vec<Vec<f64>>) -> Result<Self> {
        if comps.len() != grid.dim() {
            return Err(Error::GridMismatch(format!(
                "{} vector components on a {}-dimensional grid",
                comps.len(),
                grid.dim()
            )));
        }
        for c in &comps {
            if c.len() != grid.len() {
                return Err(Error::GridMismatch(format!(
                    "component of length {} on a grid of {} points",
                    c.len(),
                    grid.len()
                )));
            }
            check_finite("vector field", c)?;
        }
        Ok(VectorField { grid, comps })
    }

    pub(crate) fn from_raw(grid: Grid, comps: Vec<Vec<f64>>) -> Self {
        debug_assert_eq!(comps.len(), grid.dim());
        VectorField { grid, comps }
    }

    pub fn zeros(grid: Grid) -> Self {
        VectorField {
            grid,
            comps: vec![vec![0.0; grid.len()]; grid.dim()],
        }
    }

    /// One-dimensional vector field from its single component.
    pub fn from_component(field: ScalarField) -> Result<Self> {
        let grid = field.grid;
        Self::new(grid, vec![field.values])
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn comp(&self, axis: usize) -> &[f64] {
        &self.comps[axis]
    }

    pub fn comp_mut(&mut self, axis: usize) -> &mut [f64] {
        &mut self.comps[axis]
    }

    pub fn component(&self, axis: usize) -> ScalarField {
        ScalarField::from_raw(self.grid, self.comps[axis].clone())
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.comps
    }

    pub fn is_finite(&self) -> bool {
        self.comps.iter().flatten().all(|v| v.is_finite())
    }

    /// Pointwise `|V|²`.
    pub fn norm_sq(&self) -> ScalarField {
        let mut out = vec![0.0; self.grid.len()];
        for c in &self.comps {
            for (o, v) in out.iter_mut().zip(c) {
                *o += v * v;
            }
        }
        ScalarField::from_raw(self.grid, out)
    }

    /// Largest pointwise Euclidean norm.
    pub fn max_norm(&self) -> f64 {
        self.norm_sq().max().max(0.0).sqrt()
    }

    pub fn lin_comb(&self, a: f64, other: &VectorField, b: f64) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        let comps = self
            .comps
            .iter()
            .zip(&other.comps)
            .map(|(x, y)| x.iter().zip(y).map(|(p, q)| a * p + b * q).collect())
            .collect();
        Ok(VectorField::from_raw(self.grid, comps))
    }

    /// Multiplies every component pointwise by a scalar field.
    pub fn scale_by(&self, f: &ScalarField) -> Result<Self> {
        self.grid.ensure_same(&f.grid)?;
        let comps = self
            .comps
            .iter()
            .map(|c| c.iter().zip(&f.values).map(|(a, b)| a * b).collect())
            .collect();
        Ok(VectorField::from_raw(self.grid, comps))
    }

    pub fn max_abs_diff(&self, other: &VectorField) -> Result<f64> {
        self.grid.ensure_same(&other.grid)?;
        Ok(self
            .comps
            .iter()
            .zip(&other.comps)
            .flat_map(|(a, b)| a.iter().zip(b))
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    pub fn max_abs(&self) -> f64 {
        self.comps
            .iter()
            .flatten()
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Symmetric second-order tensor field stored as its independent components
/// (`[xx]` in 1D, `[xx, xy, yy]` in 2D).
#[derive(Debug, Clone, PartialEq)]
pub struct SymTensorField {
    grid: Grid,
    comps: Vec<Vec<f64>>,
}

impl SymTensorField {
    pub fn new(grid: Grid, comps: Vec<Vec<f64>>) -> Result<Self> {
        if comps.len() != grid.sym_components() {
            return Err(Error::GridMismatch(format!(
                "{} tensor components, expected {}",
                comps.len(),
                grid.sym_components()
            )));
        }
        for c in &comps {
            if c.len() != grid.len() {
                return Err(Error::GridMismatch(format!(
                    "tensor component of length {} on a grid of {} points",
                    c.len(),
                    grid.len()
                )));
            }
            check_finite("tensor field", c)?;
        }
        Ok(SymTensorField { grid, comps })
    }

    pub(crate) fn from_raw(grid: Grid, comps: Vec<Vec<f64>>) -> Self {
        debug_assert_eq!(comps.len(), grid.sym_components());
        SymTensorField { grid, comps }
    }

    pub fn zeros(grid: Grid) -> Self {
        SymTensorField {
            grid,
            comps: vec![vec![0.0; grid.len()]; grid.sym_components()],
        }
    }

    /// `f · I`.
    pub fn isotropic(f: &ScalarField) -> Self {
        let grid = f.grid;
        let mut t = Self::zeros(grid);
        for i in 0..grid.dim() {
            t.comps[sym_index(grid.dim(), i, i)].copy_from_slice(&f.values);
        }
        t
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Component `T_ij` (symmetric access).
    pub fn get(&self, i: usize, j: usize) -> &[f64] {
        &self.comps[sym_index(self.grid.dim(), i, j)]
    }

    pub(crate) fn get_mut(&mut self, i: usize, j: usize) -> &mut [f64] {
        let k = sym_index(self.grid.dim(), i, j);
        &mut self.comps[k]
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.comps
    }

    pub fn trace(&self) -> ScalarField {
        let mut out = vec![0.0; self.grid.len()];
        for i in 0..self.grid.dim() {
            for (o, v) in out.iter_mut().zip(self.get(i, i)) {
                *o += v;
            }
        }
        ScalarField::from_raw(self.grid, out)
    }

    pub fn is_finite(&self) -> bool {
        self.comps.iter().flatten().all(|v| v.is_finite())
    }

    pub fn lin_comb(&self, a: f64, other: &SymTensorField, b: f64) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        let comps = self
            .comps
            .iter()
            .zip(&other.comps)
            .map(|(x, y)| x.iter().zip(y).map(|(p, q)| a * p + b * q).collect())
            .collect();
        Ok(SymTensorField::from_raw(self.grid, comps))
    }

    pub fn max_abs(&self) -> f64 {
        self.comps
            .iter()
            .flatten()
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &SymTensorField) -> Result<f64> {
        self.grid.ensure_same(&other.grid)?;
        Ok(self
            .comps
            .iter()
            .zip(&other.comps)
            .flat_map(|(a, b)| a.iter().zip(b))
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(Grid::new_1d(1.0, 6).is_err());
        assert!(Grid::new_1d(1.0, 9).is_err());
        assert!(Grid::new_1d(0.0, 16).is_err());
        assert!(Grid::new_2d([1.0, 2.0], [16, 10]).is_ok());
        let g = Grid::new_1d(40.0, 512).unwrap();
        assert_eq!(g.spacing(0), 40.0 / 512.0);
        assert_eq!(g.coord(0, 0), -20.0);
        assert_eq!(g.coord(0, 256), 0.0);
    }

    #[test]
    fn point_layout_is_row_major() {
        let g = Grid::new_2d([2.0, 4.0], [8, 16]).unwrap();
        let p = g.point(3 * 16 + 5);
        assert_eq!(p, [g.coord(0, 3), g.coord(1, 5)]);
    }

    #[test]
    fn non_finite_rejected() {
        let g = Grid::new_1d(1.0, 8).unwrap();
        let mut v = vec![0.0; 8];
        v[3] = f64::NAN;
        match ScalarField::new(g, v) {
            Err(Error::NonFinite { index, .. }) => assert_eq!(index, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn isotropic_tensor_trace() {
        let g = Grid::new_2d([1.0, 1.0], [8, 8]).unwrap();
        let f = ScalarField::constant(g, 2.5);
        let t = SymTensorField::isotropic(&f);
        assert!(t.get(0, 1).iter().all(|&v| v == 0.0));
        assert!(t.trace().values().iter().all(|&v| v == 5.0));
    }
}
