//! Discrete sine transform (DST-I) on the interior nodes of a [`Grid1D`].
//!
//! Analysis uses the interpolation normalization
//!
//! ```text
//! c_l = (2/N) * sum_{j=1}^{N-1} v_j sin(j l pi / N),   l = 1..N-1
//! ```
//!
//! and synthesis is the unscaled sum `v_j = sum_l c_l sin(j l pi / N)`, so the
//! two are exact inverses. For power-of-two `N` both directions go through a
//! complex FFT of length `N` after folding the input with the half-sine
//! weights `sin(j pi / N)`; the odd outputs are then recovered by a running
//! sum. Other `N` use the direct `O(N^2)` sum.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::field::{NodalField, SpectralField};

type PlanCache = Mutex<HashMap<usize, Arc<dyn Fft<f64>>>>;

fn plan_cache() -> &'static PlanCache {
    static CACHE: OnceLock<PlanCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn forward_plan(len: usize) -> Arc<dyn Fft<f64>> {
    let mut cache = plan_cache().lock().expect("fft plan cache poisoned");
    cache
        .entry(len)
        .or_insert_with(|| FftPlanner::new().plan_fft_forward(len))
        .clone()
}

enum Backend {
    Fast {
        fft: Arc<dyn Fft<f64>>,
        // sin(j pi / N) for j = 0..N-1
        half_sine: Vec<f64>,
        buf: Vec<Complex64>,
        scratch: Vec<Complex64>,
    },
    Direct {
        // sin(pi m / N) for m = 0..2N-1; sin(j l pi / N) = table[(j l) mod 2N]
        table: Vec<f64>,
    },
}

/// Reusable DST-I workspace for one grid size.
///
/// Construction is cheap after the first use of a given `N` since FFT plans
/// are shared through a process-wide cache.
pub struct SineTransform {
    n: usize,
    backend: Backend,
}

impl SineTransform {
    pub fn new(n: usize) -> Self {
        assert!(n >= 2, "sine transform needs N >= 2");
        let backend = if n.is_power_of_two() {
            let fft = forward_plan(n);
            let scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
            Backend::Fast {
                fft,
                half_sine: (0..n).map(|j| (PI * j as f64 / n as f64).sin()).collect(),
                buf: vec![Complex64::default(); n],
                scratch,
            }
        } else {
            let table = (0..2 * n).map(|m| (PI * m as f64 / n as f64).sin()).collect();
            Backend::Direct { table }
        };
        Self { n, backend }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_fast(&self) -> bool {
        matches!(self.backend, Backend::Fast { .. })
    }

    /// Computes `out_k = scale * sum_{m=1}^{N-1} input_m sin(k m pi / N)` for
    /// `k = 1..N-1`. `input` and `out` are indexed from 0 (`m = 1` at index 0).
    fn sine_sum(&mut self, input: &[Complex64], out: &mut [Complex64], scale: f64) {
        let n = self.n;
        debug_assert_eq!(input.len(), n - 1);
        debug_assert_eq!(out.len(), n - 1);
        match &mut self.backend {
            Backend::Fast {
                fft,
                half_sine,
                buf,
                scratch,
            } => {
                // w_j = sin(j pi/N)(x_j + x_{N-j}) + (x_j - x_{N-j})/2, x_0 = x_N = 0
                buf[0] = Complex64::default();
                for j in 1..n {
                    let a = input[j - 1];
                    let b = input[n - j - 1];
                    buf[j] = half_sine[j] * (a + b) + 0.5 * (a - b);
                }
                fft.process_with_scratch(buf, scratch);
                // F_{2m} = i (W_m - W_{N-m}) / 2
                // F_{2m+1} = F_{2m-1} + (W_m + W_{N-m}) / 2,  F_1 = W_0 / 2
                let half_i = Complex64::new(0.0, 0.5);
                let mut odd = 0.5 * buf[0];
                out[0] = scale * odd;
                for m in 1..n / 2 {
                    let (wm, wr) = (buf[m], buf[n - m]);
                    out[2 * m - 1] = scale * (half_i * (wm - wr));
                    odd += 0.5 * (wm + wr);
                    out[2 * m] = scale * odd;
                }
            }
            Backend::Direct { table } => {
                let period = 2 * n;
                for (k, o) in out.iter_mut().enumerate() {
                    let kk = k + 1;
                    let mut acc = Complex64::default();
                    for (m, &v) in input.iter().enumerate() {
                        acc += v * table[(kk * (m + 1)) % period];
                    }
                    *o = acc * scale;
                }
            }
        }
    }

    /// Interior nodal values (`v_1..v_{N-1}`) to sine coefficients.
    pub fn analyze_interior(&mut self, interior: &[Complex64], coeffs: &mut [Complex64]) {
        let scale = 2.0 / self.n as f64;
        self.sine_sum(interior, coeffs, scale);
    }

    /// Sine coefficients to interior nodal values (`v_1..v_{N-1}`).
    pub fn synthesize_interior(&mut self, coeffs: &[Complex64], interior: &mut [Complex64]) {
        self.sine_sum(coeffs, interior, 1.0);
    }

    pub fn analyze(&mut self, v: &NodalField) -> SpectralField {
        assert_eq!(v.grid().n(), self.n, "transform size does not match grid");
        let mut coeffs = vec![Complex64::default(); self.n - 1];
        self.analyze_interior(v.interior(), &mut coeffs);
        SpectralField::from_parts(*v.grid(), coeffs)
    }

    pub fn synthesize(&mut self, c: &SpectralField) -> NodalField {
        assert_eq!(c.grid().n(), self.n, "transform size does not match grid");
        let mut values = vec![Complex64::default(); self.n + 1];
        self.synthesize_interior(c.coefficients(), &mut values[1..self.n]);
        NodalField::from_parts(*c.grid(), values)
    }
}

/// Interpolation coefficients of `I_N v`.
pub fn dst_analyze(v: &NodalField) -> SpectralField {
    SineTransform::new(v.grid().n()).analyze(v)
}

/// Nodal values of the sine series; endpoints are exactly zero.
pub fn dst_synthesize(c: &SpectralField) -> NodalField {
    SineTransform::new(c.grid().n()).synthesize(c)
}
