//! Madelung bridge between a fluid state and a wavefunction `ψ = √ρ e^{iS}`
//! (with `m = 1`, so `v = ħ ∂ₓS` and `ν = ħ²`), plus a split-step Fourier
//! solver of the Schrödinger equation used to cross-check the fluid solver.
//!
//! The bridge is one-dimensional. Cells below the density floor are vacuum,
//! as in [`crate::dynamics`]: their velocity is reported as zero, and on the
//! way back their phase is continued smoothly from the nearest active edge.
//! The circulation constraint applies only to states without vacuum; a gap
//! lets the phase unwind where there is no mass.

mod evolve;

pub use evolve::{
    compare_evolutions, energy, fluid_energy, schrodinger_step, spectral_tail_fraction, Comparison,
    ComparisonSample, SplitStep,
};

use crate::dynamics::vacuum::{floor, weights};
use crate::dynamics::FluidState;
use crate::error::{Error, Result};
use crate::fields::spectral;
use crate::fields::{Grid, ScalarField, VectorField};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Absolute tolerance on the winding-number defect `|∮v/(2πħ) − n|`.
pub const CIRCULATION_TOL: f64 = 1e-8;

/// Sampled wavefunction with `m = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveState {
    grid: Grid,
    psi: Vec<Complex64>,
    hbar: f64,
}

impl WaveState {
    pub fn new(grid: Grid, psi: Vec<Complex64>, hbar: f64) -> Result<Self> {
        if grid.dim() != 1 {
            return Err(Error::Unsupported("wavefunctions are one-dimensional".into()));
        }
        if psi.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "wavefunction has {} samples, grid has {}",
                psi.len(),
                grid.len()
            )));
        }
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::param("hbar", format!("must be positive, got {hbar}")));
        }
        if let Some(index) = psi.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite {
                what: "wavefunction",
                index,
                value: psi[index].norm(),
            });
        }
        Ok(WaveState { grid, psi, hbar })
    }

    pub fn from_fn(grid: Grid, hbar: f64, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let psi = grid.axis_coords(0).into_iter().map(f).collect();
        Self::new(grid, psi, hbar)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn psi(&self) -> &[Complex64] {
        &self.psi
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn density(&self) -> ScalarField {
        ScalarField::new(self.grid, self.psi.iter().map(|z| z.norm_sqr()).collect())
            .expect("finite by construction")
    }

    /// `∫|ψ|²`
    pub fn norm(&self) -> f64 {
        self.psi.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.cell_volume()
    }

    pub(crate) fn psi_mut(&mut self) -> &mut Vec<Complex64> {
        &mut self.psi
    }
}

/// Spectral derivative of a periodic complex line.
pub(crate) fn complex_derivative(psi: &[Complex64], length: f64) -> Vec<Complex64> {
    let n = psi.len();
    let mut buf = psi.to_vec();
    spectral::forward(&mut buf);
    let ks = spectral::wavenumbers(n, length);
    for (j, (z, k)) in buf.iter_mut().zip(ks).enumerate() {
        *z = if j == n / 2 {
            Complex64::new(0.0, 0.0)
        } else {
            *z * Complex64::new(0.0, k)
        };
    }
    spectral::inverse(&mut buf);
    buf
}

/// Contiguous runs of `true` on the periodic index ring, as `(start, len)`.
fn runs(mask: &[bool]) -> Vec<(usize, usize)> {
    let n = mask.len();
    let Some(anchor) = (0..n).find(|&i| !mask[i]) else {
        return vec![(0, n)];
    };
    let mut out = Vec::new();
    let mut k = 1;
    while k <= n {
        let i = (anchor + k) % n;
        if mask[i] {
            let start = i;
            let mut len = 0;
            while k <= n && mask[(anchor + k) % n] {
                len += 1;
                k += 1;
            }
            out.push((start, len));
        } else {
            k += 1;
        }
    }
    out
}

/// `ρ = |ψ|²` and `v = ħ Im(ψ̄ ∂ₓψ)/|ψ|²`.
///
/// Rejects nodes: a zero sample, active cells split by a sub-floor gap, or a
/// sign flip between neighbours (a phase step of more than `π/2` per cell,
/// which also excludes velocities above half the grid Nyquist speed).
pub fn from_wavefunction(w: &WaveState) -> Result<FluidState> {
    let grid = w.grid;
    let n = grid.len();
    let rho: Vec<f64> = w.psi.iter().map(|z| z.norm_sqr()).collect();
    if let Some(index) = rho.iter().position(|&r| r == 0.0) {
        return Err(Error::Node { index, density: 0.0 });
    }
    let f = floor(&rho);
    let active: Vec<bool> = rho.iter().map(|&r| r >= f).collect();
    let active_runs = runs(&active);
    if active_runs.is_empty() {
        return Err(Error::Unsupported("no cell is above the density floor".into()));
    }
    if active_runs.len() > 1 {
        // the smallest density in the gap after the first run
        let (s, l) = active_runs[0];
        let gap_start = (s + l) % n;
        let mut index = gap_start;
        let mut j = gap_start;
        while !active[j] {
            if rho[j] < rho[index] {
                index = j;
            }
            j = (j + 1) % n;
        }
        return Err(Error::Node {
            index,
            density: rho[index],
        });
    }
    for i in 0..n {
        let j = (i + 1) % n;
        if active[i] && active[j] && (w.psi[i].conj() * w.psi[j]).re <= 0.0 {
            let index = if rho[i] <= rho[j] { i } else { j };
            return Err(Error::Node {
                index,
                density: rho[index],
            });
        }
    }
    let dpsi = complex_derivative(&w.psi, grid.length(0));
    let v: Vec<f64> = (0..n)
        .map(|i| {
            if active[i] {
                w.hbar * (w.psi[i].conj() * dpsi[i]).im / rho[i]
            } else {
                0.0
            }
        })
        .collect();
    let rho = ScalarField::new(grid, rho)?;
    let v = VectorField::new(grid, vec![v])?;
    FluidState::new(rho, v, 0.0)
}

/// `ψ = √ρ e^{iS}` with `S = (1/ħ)∫v`, pinned to `S = 0` at the leftmost grid
/// point.
///
/// Without vacuum the circulation `∮v` must be `2πħn` to within
/// [`CIRCULATION_TOL`] in `n`, and the phase is the spectral antiderivative
/// plus the winding ramp. With vacuum the velocity is continued into the gap
/// by quadratic extrapolation from the nearest active edge and integrated
/// with a fourth-order cumulative rule starting in the middle of the widest
/// gap.
pub fn to_wavefunction(state: &FluidState, hbar: f64) -> Result<WaveState> {
    let grid = *state.grid();
    if grid.dim() != 1 {
        return Err(Error::Unsupported("wavefunctions are one-dimensional".into()));
    }
    if !(hbar.is_finite() && hbar > 0.0) {
        return Err(Error::param("hbar", format!("must be positive, got {hbar}")));
    }
    let rho = state.rho.values();
    let v = state.v.comp(0);
    let f = floor(rho);
    let active: Vec<bool> = rho.iter().map(|&r| r >= f).collect();
    let mut phase = if active.iter().all(|&a| a) {
        winding_phase(&grid, v, hbar)?
    } else {
        gap_phase(&grid, v, &active)?.into_iter().map(|s| s / hbar).collect()
    };
    let s0 = phase[0];
    for s in phase.iter_mut() {
        *s -= s0;
    }
    let psi = rho
        .iter()
        .zip(&phase)
        .map(|(r, s)| Complex64::from_polar(r.sqrt(), *s))
        .collect();
    WaveState::new(grid, psi, hbar)
}

fn winding_phase(grid: &Grid, v: &[f64], hbar: f64) -> Result<Vec<f64>> {
    let n = v.len();
    let length = grid.length(0);
    let circulation = v.iter().sum::<f64>() * grid.spacing(0);
    let turns = circulation / (2.0 * PI * hbar);
    let defect = (turns - turns.round()).abs();
    if defect > CIRCULATION_TOL {
        return Err(Error::Circulation {
            defect,
            tol: CIRCULATION_TOL,
        });
    }
    let mean = circulation / length;
    let mut buf: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x - mean, 0.0)).collect();
    spectral::forward(&mut buf);
    let ks = spectral::wavenumbers(n, length);
    for (j, (z, k)) in buf.iter_mut().zip(ks).enumerate() {
        *z = if j == 0 || j == n / 2 {
            Complex64::new(0.0, 0.0)
        } else {
            *z / Complex64::new(0.0, k)
        };
    }
    spectral::inverse(&mut buf);
    // exact winding keeps e^{iS} periodic
    let ramp = 2.0 * PI * turns.round() / length;
    Ok((0..n)
        .map(|i| (buf[i].re + ramp * hbar * grid.coord(0, i)) / hbar)
        .collect())
}

/// Velocity continued into vacuum gaps, then integrated; returns `∫v`.
fn gap_phase(grid: &Grid, v: &[f64], active: &[bool]) -> Result<Vec<f64>> {
    let n = v.len();
    let gaps = runs(&active.iter().map(|a| !a).collect::<Vec<_>>());
    let mut ext = v.to_vec();
    let wrap = |i: isize| i.rem_euclid(n as isize) as usize;
    let mut start = 0;
    let mut widest = 0;
    for &(g0, len) in &gaps {
        let left_edge = g0 as isize - 1;
        let right_edge = (g0 + len) as isize;
        for m in 1..=len {
            let j = wrap(g0 as isize + m as isize - 1);
            let (edge, dir, dist) = if m <= len.div_ceil(2) {
                (left_edge, -1isize, m)
            } else {
                (right_edge, 1isize, len + 1 - m)
            };
            let src = [wrap(edge), wrap(edge + dir), wrap(edge + 2 * dir)];
            if src.iter().any(|&s| !active[s]) {
                return Err(Error::Unsupported(
                    "active region narrower than three cells next to vacuum".into(),
                ));
            }
            let w = weights(dist);
            ext[j] = w[0] * v[src[0]] + w[1] * v[src[1]] + w[2] * v[src[2]];
        }
        if len > widest {
            widest = len;
            // the two continuations meet here; start the quadrature at the seam
            start = (g0 + len.div_ceil(2)) % n;
        }
    }
    let h = grid.spacing(0);
    let at = |k: usize| ext[(start + k) % n];
    let mut s = vec![0.0; n];
    let mut acc = 0.0;
    s[start] = 0.0;
    for k in 0..n - 1 {
        let inc = if k == 0 {
            9.0 * at(0) + 19.0 * at(1) - 5.0 * at(2) + at(3)
        } else if k == n - 2 {
            at(n - 4) - 5.0 * at(n - 3) + 19.0 * at(n - 2) + 9.0 * at(n - 1)
        } else {
            -at(k - 1) + 13.0 * at(k) + 13.0 * at(k + 1) - at(k + 2)
        };
        acc += h / 24.0 * inc;
        s[(start + k + 1) % n] = acc;
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn runs_on_a_ring() {
        let m = [true, false, true, true, false, true];
        let mut r = runs(&m);
        r.sort();
        assert_eq!(r, vec![(2, 2), (5, 2)]);
        assert_eq!(runs(&[true; 4]), vec![(0, 4)]);
        assert!(runs(&[false; 4]).is_empty());
    }

    #[test]
    fn cumulative_rule_is_exact_for_cubics() {
        let g = Grid::new_1d(10.0, 64).unwrap();
        let x = g.axis_coords(0);
        let v: Vec<f64> = x.iter().map(|x| 0.5 - x + 0.1 * x * x * x).collect();
        let mut active = vec![true; 64];
        // a gap whose seam sits at index 0
        for a in active.iter_mut().take(3) {
            *a = false;
        }
        for a in active.iter_mut().skip(61) {
            *a = false;
        }
        let s = gap_phase(&g, &v, &active).unwrap();
        let prim = |x: f64| 0.5 * x - 0.5 * x * x + 0.025 * x.powi(4);
        for i in 10..50 {
            let want = prim(x[i]) - prim(x[10]);
            assert!((s[i] - s[10] - want).abs() < 1e-11, "{i}");
        }
    }
}
