use crate::error::{Error, Result};

/// Ghost depth beyond each active edge; enough for a four-point stencil
/// applied to quantities that were themselves built with one.
pub(crate) const GHOSTS: usize = 4;

pub(crate) fn floor(rho: &[f64]) -> f64 {
    1e-12 * rho.iter().sum::<f64>() / rho.len() as f64
}

pub(crate) fn active_mask(rho: &[f64]) -> Vec<bool> {
    let f = floor(rho);
    rho.iter().map(|&r| r >= f).collect()
}

/// Lagrange weights for the value `m` cells past `f(0)` from `f(0), f(−1), f(−2)`.
pub(crate) fn weights(m: usize) -> [f64; 3] {
    let m = m as f64;
    [(m + 1.0) * (m + 2.0) / 2.0, -m * (m + 2.0), m * (m + 1.0) / 2.0]
}

/// Overwrites the vacuum cells next to every active edge with quadratic
/// extrapolations of `ln ρ` and `v`. Cells that are active stay untouched.
pub(crate) fn fill_ghosts(rho: &mut [f64], v: &mut [f64], active: &[bool]) -> Result<()> {
    let n = rho.len() as isize;
    if active.iter().all(|&a| a) {
        return Ok(());
    }
    if !active.iter().any(|&a| a) {
        return Err(Error::Unsupported("no cell is above the density floor".into()));
    }
    let wrap = |i: isize| i.rem_euclid(n) as usize;
    let src_rho: Vec<f64> = rho.to_vec();
    let src_v: Vec<f64> = v.to_vec();
    for i in 0..n {
        if !active[i as usize] {
            continue;
        }
        for s in [1isize, -1] {
            if active[wrap(i + s)] {
                continue;
            }
            let idx = [wrap(i), wrap(i - s), wrap(i - 2 * s)];
            if !(active[idx[1]] && active[idx[2]]) {
                return Err(Error::Integration {
                    t: f64::NAN,
                    reason: format!("active region around cell {i} is narrower than three cells"),
                });
            }
            let lg = idx.map(|j| src_rho[j].ln());
            let lv = idx.map(|j| src_v[j]);
            for m in 1..=GHOSTS {
                let j = wrap(i + s * m as isize);
                if active[j] {
                    break;
                }
                let w = weights(m);
                rho[j] = (w[0] * lg[0] + w[1] * lg[1] + w[2] * lg[2]).exp();
                v[j] = w[0] * lv[0] + w[1] * lv[1] + w[2] * lv[2];
            }
        }
    }
    Ok(())
}
