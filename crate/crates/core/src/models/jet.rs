use crate::error::Result;
use crate::fields::{self, Backend, ScalarField, SymTensorField, VectorField};
use serde::{Deserialize, Serialize};

/// How the spatial derivatives of `ρ` are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JetMode {
    /// Differentiate `ρ` itself.
    #[default]
    Direct,
    /// Differentiate `g = ln ρ`: `∇ρ = ρ∇g`, `∇∇ρ = ρ(∇∇g + ∇g∘∇g)`.
    /// Keeps relative accuracy where `ρ` spans many decades.
    Logarithmic,
}

/// `ρ` with its gradient and Hessian.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityJet {
    pub rho: ScalarField,
    pub grad: VectorField,
    pub hess: SymTensorField,
}

impl DensityJet {
    pub fn compute(rho: &ScalarField, backend: Backend, mode: JetMode) -> Result<Self> {
        match mode {
            JetMode::Direct => Ok(DensityJet {
                rho: rho.clone(),
                grad: fields::grad(rho, backend)?,
                hess: fields::hessian(rho, backend)?,
            }),
            JetMode::Logarithmic => {
                let g = rho.map(f64::ln);
                let dg = fields::grad(&g, backend)?;
                let hg = fields::hessian(&g, backend)?;
                let grid = *rho.grid();
                let d = grid.dim();
                let r = rho.values();
                let grad: Vec<Vec<f64>> = (0..d)
                    .map(|a| dg.comp(a).iter().zip(r).map(|(x, rv)| rv * x).collect())
                    .collect();
                let mut hess = SymTensorField::zeros(grid);
                for i in 0..d {
                    for j in i..d {
                        let (gi, gj) = (dg.comp(i), dg.comp(j));
                        let h = hg.get(i, j).to_vec();
                        for (n, o) in hess.get_mut(i, j).iter_mut().enumerate() {
                            *o = r[n] * (h[n] + gi[n] * gj[n]);
                        }
                    }
                }
                Ok(DensityJet {
                    rho: rho.clone(),
                    grad: VectorField::from_raw(grid, grad),
                    hess,
                })
            }
        }
    }

    pub fn grad_sq(&self) -> ScalarField {
        self.grad.norm_sq()
    }

    pub fn laplacian(&self) -> ScalarField {
        self.hess.trace()
    }

    /// Gradient at flat index `n`, padded to two components.
    pub(crate) fn grad_at(&self, n: usize) -> [f64; 2] {
        let mut g = [0.0; 2];
        for (a, x) in g.iter_mut().enumerate().take(self.rho.grid().dim()) {
            *x = self.grad.comp(a)[n];
        }
        g
    }

    /// Packed Hessian at flat index `n`.
    pub(crate) fn hess_at(&self, n: usize) -> [f64; 3] {
        let mut h = [0.0; 3];
        for (c, x) in self.hess.components().iter().zip(h.iter_mut()) {
            *x = c[n];
        }
        h
    }
}
