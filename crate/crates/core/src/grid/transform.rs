//! One-dimensional orthonormal transforms and helpers to apply them along an
//! axis of a row-major array.
//!
//! Neumann axes use cell-centred points `x_j = a + (j + 1/2) h` and the cosine
//! basis `cos(pi k (x - a) / l)`; derivatives of odd order land in the sine
//! family `sin(pi k (x - a) / l)`, which is synthesised with a DST-III.
//! Periodic axes use `x_j = a + j h` with an odd point count and the real
//! Fourier layout `[1, cos_1, sin_1, cos_2, sin_2, ...]`.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use rustdct::{DctPlanner, TransformType2And3};
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::Boundary;

const PAR_THRESHOLD: usize = 1 << 14;

#[derive(Clone)]
enum Plan {
    Cosine(Arc<dyn TransformType2And3<f64>>),
    Fourier { forward: Arc<dyn Fft<f64>>, inverse: Arc<dyn Fft<f64>> },
}

#[derive(Clone)]
pub(crate) struct AxisTransform {
    n: usize,
    length: f64,
    plan: Plan,
}

impl fmt::Debug for AxisTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AxisTransform").field("n", &self.n).field("length", &self.length).finish()
    }
}

impl AxisTransform {
    pub(crate) fn new(n: usize, length: f64, boundary: Boundary) -> Self {
        let plan = match boundary {
            Boundary::Neumann => Plan::Cosine(DctPlanner::new().plan_dct2(n)),
            Boundary::Periodic => {
                let mut planner = FftPlanner::new();
                Plan::Fourier { forward: planner.plan_fft_forward(n), inverse: planner.plan_fft_inverse(n) }
            }
        };
        Self { n, length, plan }
    }

    fn h(&self) -> f64 {
        self.length / self.n as f64
    }

    fn w0(&self) -> f64 {
        (1.0 / self.length).sqrt()
    }

    fn wk(&self) -> f64 {
        (2.0 / self.length).sqrt()
    }

    /// Grid values to orthonormal coefficients.
    pub(crate) fn analyze(&self, lane: &mut [f64]) {
        let h = self.h();
        match &self.plan {
            Plan::Cosine(dct) => {
                dct.process_dct2(lane);
                lane[0] *= h * self.w0();
                let s = h * self.wk();
                for c in lane.iter_mut().skip(1) {
                    *c *= s;
                }
            }
            Plan::Fourier { forward, .. } => {
                let mut buf: Vec<Complex<f64>> = lane.iter().map(|&v| Complex::new(v, 0.0)).collect();
                forward.process(&mut buf);
                lane[0] = h * self.w0() * buf[0].re;
                let s = h * self.wk();
                for k in 1..=(self.n - 1) / 2 {
                    lane[2 * k - 1] = s * buf[k].re;
                    lane[2 * k] = -s * buf[k].im;
                }
            }
        }
    }

    /// Coefficients to grid values in the even family (cosines, or the full
    /// Fourier basis on periodic axes).
    pub(crate) fn synthesize_even(&self, lane: &mut [f64]) {
        match &self.plan {
            Plan::Cosine(dct) => {
                lane[0] *= 2.0 * self.w0();
                let s = self.wk();
                for c in lane.iter_mut().skip(1) {
                    *c *= s;
                }
                dct.process_dct3(lane);
            }
            Plan::Fourier { inverse, .. } => self.fourier_synthesize(inverse, lane),
        }
    }

    /// Synthesis in the odd family: on Neumann axes the coefficient stored at
    /// index `k` multiplies `sin(pi k (x - a) / l)`. Periodic axes have a single
    /// family, so this is the same as [`Self::synthesize_even`].
    pub(crate) fn synthesize_odd(&self, lane: &mut [f64]) {
        match &self.plan {
            Plan::Cosine(dct) => {
                let s = self.wk();
                let n = self.n;
                for m in 0..n - 1 {
                    lane[m] = lane[m + 1] * s;
                }
                lane[n - 1] = 0.0;
                dct.process_dst3(lane);
            }
            Plan::Fourier { inverse, .. } => self.fourier_synthesize(inverse, lane),
        }
    }

    fn fourier_synthesize(&self, inverse: &Arc<dyn Fft<f64>>, lane: &mut [f64]) {
        let n = self.n;
        let mut buf = vec![Complex::new(0.0, 0.0); n];
        buf[0] = Complex::new(lane[0] * self.w0(), 0.0);
        let half = 0.5 * self.wk();
        for k in 1..=(n - 1) / 2 {
            let g = Complex::new(half * lane[2 * k - 1], -half * lane[2 * k]);
            buf[k] = g;
            buf[n - k] = g.conj();
        }
        inverse.process(&mut buf);
        for (v, b) in lane.iter_mut().zip(buf.iter()) {
            *v = b.re;
        }
    }
}

/// Applies `f` to every lane of `data` along `axis`, where `data` is a
/// row-major array with the given shape.
pub(crate) fn for_each_lane<F>(data: &mut [f64], shape: &[usize], axis: usize, f: F)
where
    F: Fn(&mut [f64]) + Sync + Send,
{
    let n = shape[axis];
    let stride: usize = shape[axis + 1..].iter().product();
    let parallel = data.len() >= PAR_THRESHOLD;
    if stride == 1 {
        if parallel {
            data.par_chunks_mut(n).for_each(&f);
        } else {
            data.chunks_mut(n).for_each(&f);
        }
        return;
    }
    let outer = data.len() / (n * stride);
    let lanes = outer * stride;
    let mut buf = vec![0.0; data.len()];
    for o in 0..outer {
        for s in 0..stride {
            let lane = o * stride + s;
            let base = o * n * stride + s;
            for k in 0..n {
                buf[lane * n + k] = data[base + k * stride];
            }
        }
    }
    if parallel {
        buf.par_chunks_mut(n).for_each(&f);
    } else {
        buf.chunks_mut(n).for_each(f);
    }
    for lane in 0..lanes {
        let (o, s) = (lane / stride, lane % stride);
        let base = o * n * stride + s;
        for k in 0..n {
            data[base + k * stride] = buf[lane * n + k];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn naive_cos_synth(coeffs: &[f64], length: f64) -> Vec<f64> {
        let n = coeffs.len();
        (0..n)
            .map(|j| {
                let x = (j as f64 + 0.5) * length / n as f64;
                coeffs
                    .iter()
                    .enumerate()
                    .map(|(k, c)| {
                        let w = if k == 0 { (1.0 / length).sqrt() } else { (2.0 / length).sqrt() };
                        c * w * (PI * k as f64 * x / length).cos()
                    })
                    .sum()
            })
            .collect()
    }

    fn naive_sin_synth(coeffs: &[f64], length: f64) -> Vec<f64> {
        let n = coeffs.len();
        (0..n)
            .map(|j| {
                let x = (j as f64 + 0.5) * length / n as f64;
                coeffs
                    .iter()
                    .enumerate()
                    .skip(1)
                    .map(|(k, c)| c * (2.0 / length).sqrt() * (PI * k as f64 * x / length).sin())
                    .sum()
            })
            .collect()
    }

    fn sample(n: usize) -> Vec<f64> {
        (0..n).map(|i| ((i * 7 + 3) % 11) as f64 / 11.0 - 0.4).collect()
    }

    #[test]
    fn cosine_synthesis_matches_direct_sum() {
        let t = AxisTransform::new(9, 1.7, Boundary::Neumann);
        let c = sample(9);
        let mut lane = c.clone();
        t.synthesize_even(&mut lane);
        for (a, b) in lane.iter().zip(naive_cos_synth(&c, 1.7)) {
            assert!((a - b).abs() < 1e-13, "{a} vs {b}");
        }
    }

    #[test]
    fn sine_synthesis_matches_direct_sum() {
        let t = AxisTransform::new(10, 2.0, Boundary::Neumann);
        let c = sample(10);
        let mut lane = c.clone();
        t.synthesize_odd(&mut lane);
        for (a, b) in lane.iter().zip(naive_sin_synth(&c, 2.0)) {
            assert!((a - b).abs() < 1e-13, "{a} vs {b}");
        }
    }

    #[test]
    fn analysis_inverts_synthesis() {
        for (n, boundary) in [(8, Boundary::Neumann), (13, Boundary::Neumann), (9, Boundary::Periodic)] {
            let t = AxisTransform::new(n, 1.3, boundary);
            let x = sample(n);
            let mut lane = x.clone();
            t.analyze(&mut lane);
            t.synthesize_even(&mut lane);
            for (a, b) in lane.iter().zip(&x) {
                assert!((a - b).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn periodic_layout_places_cos_and_sin() {
        let n = 11;
        let length = 2.0;
        let t = AxisTransform::new(n, length, Boundary::Periodic);
        let h = length / n as f64;
        let mut lane: Vec<f64> = (0..n).map(|j| (2.0 * PI * 2.0 * j as f64 * h / length).sin()).collect();
        t.analyze(&mut lane);
        let expected = (length / 2.0).sqrt();
        for (i, c) in lane.iter().enumerate() {
            let target = if i == 4 { expected } else { 0.0 };
            assert!((c - target).abs() < 1e-12, "index {i}: {c}");
        }
    }

    #[test]
    fn lanes_along_inner_axis() {
        let shape = [2, 3];
        let mut data: Vec<f64> = (0..6).map(|v| v as f64).collect();
        for_each_lane(&mut data, &shape, 0, |lane| lane.reverse());
        assert_eq!(data, vec![3.0, 4.0, 5.0, 0.0, 1.0, 2.0]);
    }
}
