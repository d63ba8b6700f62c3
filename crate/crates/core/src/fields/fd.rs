//! Centered periodic finite-difference stencils.

use super::Backend;

/// `order`-th derivative (1 or 2) of one periodic line with spacing `h`.
pub(crate) fn derivative_line(line: &[f64], h: f64, order: u32, backend: Backend, out: &mut [f64]) {
    let n = line.len() as isize;
    let at = |i: isize| line[i.rem_euclid(n) as usize];
    for (i, o) in out.iter_mut().enumerate() {
        let i = i as isize;
        *o = match (backend, order) {
            (Backend::Fd2, 1) => (at(i + 1) - at(i - 1)) / (2.0 * h),
            (Backend::Fd2, 2) => (at(i + 1) - 2.0 * at(i) + at(i - 1)) / (h * h),
            (Backend::Fd4, 1) => {
                (-at(i + 2) + 8.0 * at(i + 1) - 8.0 * at(i - 1) + at(i - 2)) / (12.0 * h)
            }
            (Backend::Fd4, 2) => {
                (-at(i + 2) + 16.0 * at(i + 1) - 30.0 * at(i) + 16.0 * at(i - 1) - at(i - 2))
                    / (12.0 * h * h)
            }
            _ => unreachable!("finite-difference stencil for {backend:?} order {order}"),
        };
    }
}
