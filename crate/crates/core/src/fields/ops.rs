use super::{check_finite, fd, spectral, sym_index, Backend, Grid, ScalarField, SymTensorField, VectorField};
use crate::error::Result;

/// Derivative of order 1 or 2 along `axis` of raw grid values.
pub(crate) fn derivative(grid: &Grid, values: &[f64], axis: usize, order: u32, backend: Backend) -> Vec<f64> {
    let n = grid.points(axis);
    let h = grid.spacing(axis);
    let length = grid.length(axis);
    let mut out = vec![0.0; values.len()];
    let mut line = vec![0.0; n];
    let mut dline = vec![0.0; n];
    // axis 0 lines are strided by n1; axis 1 lines are contiguous rows
    let (count, stride, line_step) = if axis == 0 {
        (grid.points(1), grid.points(1), 1)
    } else {
        (grid.points(0), 1, grid.points(1))
    };
    for l in 0..count {
        let base = l * line_step;
        for (j, x) in line.iter_mut().enumerate() {
            *x = values[base + j * stride];
        }
        match backend {
            Backend::Spectral => spectral::derivative_line(&line, length, order, &mut dline),
            _ => fd::derivative_line(&line, h, order, backend, &mut dline),
        }
        for (j, d) in dline.iter().enumerate() {
            out[base + j * stride] = *d;
        }
    }
    out
}

/// Mixed or pure second derivative `∂_i ∂_j` of raw values.
pub(crate) fn second_derivative(grid: &Grid, values: &[f64], i: usize, j: usize, backend: Backend) -> Vec<f64> {
    if i == j {
        derivative(grid, values, i, 2, backend)
    } else {
        let d = derivative(grid, values, i, 1, backend);
        derivative(grid, &d, j, 1, backend)
    }
}

/// `∂_axis f`.
pub fn partial(f: &ScalarField, axis: usize, backend: Backend) -> Result<ScalarField> {
    check_finite("partial input", f.values())?;
    Ok(ScalarField::from_raw(*f.grid(), derivative(f.grid(), f.values(), axis, 1, backend)))
}

/// `∂_i ∂_j f`.
pub fn second_partial(f: &ScalarField, i: usize, j: usize, backend: Backend) -> Result<ScalarField> {
    check_finite("second_partial input", f.values())?;
    Ok(ScalarField::from_raw(*f.grid(), second_derivative(f.grid(), f.values(), i, j, backend)))
}

pub fn grad(f: &ScalarField, backend: Backend) -> Result<VectorField> {
    check_finite("grad input", f.values())?;
    let g = f.grid();
    let comps = (0..g.dim()).map(|a| derivative(g, f.values(), a, 1, backend)).collect();
    Ok(VectorField::from_raw(*g, comps))
}

pub fn div(v: &VectorField, backend: Backend) -> Result<ScalarField> {
    let g = v.grid();
    let mut out = vec![0.0; g.len()];
    for a in 0..g.dim() {
        check_finite("div input", v.comp(a))?;
        for (o, d) in out.iter_mut().zip(derivative(g, v.comp(a), a, 1, backend)) {
            *o += d;
        }
    }
    Ok(ScalarField::from_raw(*g, out))
}

/// `(∇·T)_j = ∂_i T_ij`.
pub fn div_tensor(t: &SymTensorField, backend: Backend) -> Result<VectorField> {
    let g = t.grid();
    let d = g.dim();
    for c in t.components() {
        check_finite("div_tensor input", c)?;
    }
    let mut comps = vec![vec![0.0; g.len()]; d];
    for (j, out) in comps.iter_mut().enumerate() {
        for i in 0..d {
            for (o, x) in out.iter_mut().zip(derivative(g, t.get(i, j), i, 1, backend)) {
                *o += x;
            }
        }
    }
    Ok(VectorField::from_raw(*g, comps))
}

pub fn hessian(f: &ScalarField, backend: Backend) -> Result<SymTensorField> {
    check_finite("hessian input", f.values())?;
    let g = f.grid();
    let d = g.dim();
    let mut comps = vec![Vec::new(); g.sym_components()];
    for i in 0..d {
        for j in i..d {
            comps[sym_index(d, i, j)] = second_derivative(g, f.values(), i, j, backend);
        }
    }
    Ok(SymTensorField::from_raw(*g, comps))
}

/// `Δf`, defined as the trace of [`hessian`].
pub fn laplacian(f: &ScalarField, backend: Backend) -> Result<ScalarField> {
    Ok(hessian(f, backend)?.trace())
}

/// Full velocity gradient: `out[i].comp(j) = ∂_i v_j`.
pub fn velocity_gradient(v: &VectorField, backend: Backend) -> Result<Vec<VectorField>> {
    let g = v.grid();
    for a in 0..g.dim() {
        check_finite("velocity_gradient input", v.comp(a))?;
    }
    Ok((0..g.dim())
        .map(|i| {
            let comps = (0..g.dim()).map(|j| derivative(g, v.comp(j), i, 1, backend)).collect();
            VectorField::from_raw(*g, comps)
        })
        .collect())
}

/// Discrete periodic inner product `Σ a b ΔV`.
pub fn inner(a: &ScalarField, b: &ScalarField) -> Result<f64> {
    a.grid().ensure_same(b.grid())?;
    Ok(a.values().iter().zip(b.values()).map(|(x, y)| x * y).sum::<f64>() * a.grid().cell_volume())
}
