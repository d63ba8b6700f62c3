//! FFT plumbing shared by the spectral derivative and the split-step solver.

use num_complex::Complex64;
use rustfft::FftPlanner;
use std::cell::RefCell;

thread_local! {
    // Plans are cached per thread; the planner itself memoizes by length.
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// In-place unnormalized forward transform.
pub(crate) fn forward(buf: &mut [Complex64]) {
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_forward(buf.len()));
    fft.process(buf);
}

/// In-place inverse transform, normalized by `1/N`.
pub(crate) fn inverse(buf: &mut [Complex64]) {
    let n = buf.len();
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(n));
    fft.process(buf);
    let s = 1.0 / n as f64;
    for z in buf.iter_mut() {
        *z *= s;
    }
}

/// Angular wavenumbers in FFT order for `n` points over a period `length`.
/// The Nyquist entry carries `+π/h`.
pub(crate) fn wavenumbers(n: usize, length: f64) -> Vec<f64> {
    let k0 = 2.0 * std::f64::consts::PI / length;
    (0..n)
        .map(|j| {
            let m = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
            k0 * m
        })
        .collect()
}

/// `order`-th derivative of one periodic line.
pub(crate) fn derivative_line(line: &[f64], length: f64, order: u32, out: &mut [f64]) {
    let n = line.len();
    let mut buf: Vec<Complex64> = line.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    forward(&mut buf);
    let ks = wavenumbers(n, length);
    let i = Complex64::new(0.0, 1.0);
    for (j, (z, &k)) in buf.iter_mut().zip(&ks).enumerate() {
        if j == n / 2 && order % 2 == 1 {
            *z = Complex64::new(0.0, 0.0);
        } else {
            *z *= (i * k).powu(order);
        }
    }
    inverse(&mut buf);
    for (o, z) in out.iter_mut().zip(&buf) {
        *o = z.re;
    }
}
