//! Batched 3-D complex FFT over an x-fastest array.

use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::real::Real;

pub(crate) struct Fft3<T: Real> {
    n: [usize; 3],
    forward: [Arc<dyn Fft<T>>; 3],
    inverse: [Arc<dyn Fft<T>>; 3],
    scratch_len: usize,
}

impl<T: Real> Fft3<T> {
    pub(crate) fn new(nx: usize, ny: usize, nz: usize) -> Self {
        let mut planner = FftPlanner::<T>::new();
        let forward = [
            planner.plan_fft_forward(nx),
            planner.plan_fft_forward(ny),
            planner.plan_fft_forward(nz),
        ];
        let inverse = [
            planner.plan_fft_inverse(nx),
            planner.plan_fft_inverse(ny),
            planner.plan_fft_inverse(nz),
        ];
        let scratch_len = forward
            .iter()
            .chain(inverse.iter())
            .map(|p| p.get_inplace_scratch_len())
            .max()
            .unwrap_or(0);
        Self {
            n: [nx, ny, nz],
            forward,
            inverse,
            scratch_len,
        }
    }

    /// Unnormalized forward transform.
    pub(crate) fn forward(&self, data: &mut [Complex<T>]) {
        self.run(data, &self.forward);
    }

    /// Inverse transform including the 1/N normalization.
    pub(crate) fn inverse(&self, data: &mut [Complex<T>]) {
        self.run(data, &self.inverse);
        let norm = T::one() / T::from_usize_exact(data.len());
        for c in data.iter_mut() {
            *c = *c * norm;
        }
    }

    fn run(&self, data: &mut [Complex<T>], plans: &[Arc<dyn Fft<T>>; 3]) {
        let [nx, ny, nz] = self.n;
        let nxy = nx * ny;
        debug_assert_eq!(data.len(), nxy * nz);
        let zero = Complex::new(T::zero(), T::zero());
        let mut scratch = vec![zero; self.scratch_len];

        // x lines are contiguous
        plans[0].process_with_scratch(data, &mut scratch);

        // y lines: transpose each xy-plane
        let mut plane_buf = vec![zero; nxy];
        for plane in data.chunks_exact_mut(nxy) {
            for j in 0..ny {
                for i in 0..nx {
                    plane_buf[j + ny * i] = plane[i + nx * j];
                }
            }
            plans[1].process_with_scratch(&mut plane_buf, &mut scratch);
            for j in 0..ny {
                for i in 0..nx {
                    plane[i + nx * j] = plane_buf[j + ny * i];
                }
            }
        }

        // z lines: stride nxy
        if nz > 1 {
            let mut buf = vec![zero; data.len()];
            for k in 0..nz {
                for ij in 0..nxy {
                    buf[k + nz * ij] = data[ij + nxy * k];
                }
            }
            plans[2].process_with_scratch(&mut buf, &mut scratch);
            for k in 0..nz {
                for ij in 0..nxy {
                    data[ij + nxy * k] = buf[k + nz * ij];
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft(data: &[Complex<f64>], n: [usize; 3]) -> Vec<Complex<f64>> {
        let [nx, ny, nz] = n;
        let mut out = vec![Complex::new(0.0, 0.0); data.len()];
        for kz in 0..nz {
            for ky in 0..ny {
                for kx in 0..nx {
                    let mut acc = Complex::new(0.0, 0.0);
                    for z in 0..nz {
                        for y in 0..ny {
                            for x in 0..nx {
                                let phase = -2.0
                                    * std::f64::consts::PI
                                    * ((kx * x) as f64 / nx as f64
                                        + (ky * y) as f64 / ny as f64
                                        + (kz * z) as f64 / nz as f64);
                                acc += data[x + nx * (y + ny * z)]
                                    * Complex::new(phase.cos(), phase.sin());
                            }
                        }
                    }
                    out[kx + nx * (ky + ny * kz)] = acc;
                }
            }
        }
        out
    }

    #[test]
    fn matches_naive_dft_on_anisotropic_grid() {
        let n = [4, 6, 8];
        let len = n.iter().product();
        let data: Vec<Complex<f64>> = (0..len)
            .map(|i| Complex::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let fft = Fft3::<f64>::new(n[0], n[1], n[2]);
        let mut fast = data.clone();
        fft.forward(&mut fast);
        let slow = naive_dft(&data, n);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).norm() < 1e-10);
        }
        fft.inverse(&mut fast);
        for (a, b) in fast.iter().zip(&data) {
            assert!((a - b).norm() < 1e-13);
        }
    }
}
