//! External potential `V`; the body force is `f = −ρ∇V`.

use crate::error::{Error, Result};
use crate::fields::{self, Backend, Grid, ScalarField, VectorField};

#[derive(Debug, Clone, PartialEq, Default)]
pub enum ExternalPotential {
    /// No external force.
    #[default]
    None,
    /// `V = ω² |x − c|² / 2`, with the centre offset `c` along axis 0.
    Harmonic { omega: f64, center: f64 },
    /// Tabulated values; the gradient is taken numerically.
    Sampled(ScalarField),
}

impl ExternalPotential {
    pub fn harmonic(omega: f64) -> Result<Self> {
        if !(omega.is_finite() && omega >= 0.0) {
            return Err(Error::param("potential.omega", format!("must be non-negative, got {omega}")));
        }
        Ok(ExternalPotential::Harmonic { omega, center: 0.0 })
    }

    pub fn is_none(&self) -> bool {
        matches!(self, ExternalPotential::None)
    }

    fn harmonic_at(omega: f64, center: f64, p: [f64; 2], dim: usize) -> f64 {
        let dx = p[0] - center;
        let r2 = if dim == 2 { dx * dx + p[1] * p[1] } else { dx * dx };
        0.5 * omega * omega * r2
    }

    pub fn values(&self, grid: &Grid) -> Result<ScalarField> {
        match self {
            ExternalPotential::None => Ok(ScalarField::zeros(*grid)),
            ExternalPotential::Harmonic { omega, center } => {
                ScalarField::from_fn(*grid, |p| Self::harmonic_at(*omega, *center, p, grid.dim()))
            }
            ExternalPotential::Sampled(f) => {
                f.grid().ensure_same(grid)?;
                Ok(f.clone())
            }
        }
    }

    /// `∇V`; analytic for the harmonic trap (the periodic image kink at the
    /// box edge is deliberately ignored).
    pub fn gradient(&self, grid: &Grid, backend: Backend) -> Result<VectorField> {
        match self {
            ExternalPotential::None => Ok(VectorField::zeros(*grid)),
            ExternalPotential::Harmonic { omega, center } => {
                let w2 = omega * omega;
                let comps = (0..grid.dim())
                    .map(|a| {
                        (0..grid.len())
                            .map(|n| {
                                let p = grid.point(n);
                                let c = if a == 0 { *center } else { 0.0 };
                                w2 * (p[a] - c)
                            })
                            .collect()
                    })
                    .collect();
                VectorField::new(*grid, comps)
            }
            ExternalPotential::Sampled(f) => {
                f.grid().ensure_same(grid)?;
                fields::grad(f, backend)
            }
        }
    }

    /// Same potential shifted so that its minimum over the grid is zero.
    pub fn pinned(&self, grid: &Grid) -> Result<ScalarField> {
        let v = self.values(grid)?;
        let m = v.min();
        Ok(v.map(|x| x - m))
    }
}
