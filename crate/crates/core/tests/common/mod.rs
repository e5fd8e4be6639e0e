//! Shared test helpers: an explicit two-mode beam-splitter construction that
//! serves as a brute-force oracle for the single-mode tap channel.
//!
//! The signal and tap modes are kept as an explicit joint Hilbert space of
//! dimension `(nmax+1)²`; the splitter is the exponential of the full
//! two-mode generator. Because the generator conserves total photon number
//! and the input `|ψ⟩ ⊗ |0⟩` only occupies total numbers up to `nmax`, the
//! truncated exponential is exact on the input's support — no leakage terms
//! distinguish it from the untruncated transformation.

use nalgebra::{DMatrix, DVector};

/// Two-mode beam splitter with intensity reflectivity `r2` into the tap.
pub struct TwoModeSplitter {
    dim: usize,
    unitary: DMatrix<f64>,
}

impl TwoModeSplitter {
    pub fn new(nmax: usize, r2: f64) -> Self {
        let dim = nmax + 1;
        let theta = r2.sqrt().asin();
        let joint = dim * dim;
        // Generator a†b − a b† over |n⟩_signal ⊗ |k⟩_tap, index n·dim + k.
        let mut gen = DMatrix::zeros(joint, joint);
        for n in 0..dim {
            for k in 0..dim {
                let col = n * dim + k;
                if n + 1 < dim && k >= 1 {
                    let row = (n + 1) * dim + (k - 1);
                    gen[(row, col)] += (((n + 1) * k) as f64).sqrt();
                }
                if n >= 1 && k + 1 < dim {
                    let row = (n - 1) * dim + (k + 1);
                    gen[(row, col)] -= ((n * (k + 1)) as f64).sqrt();
                }
            }
        }
        TwoModeSplitter {
            dim,
            unitary: (gen * theta).exp(),
        }
    }

    /// Send `amps ⊗ |0⟩` through the splitter and project the tap onto
    /// `|k⟩`; returns the unnormalized signal-mode vector.
    pub fn tap_projected(&self, amps: &[f64], k: usize) -> DVector<f64> {
        assert_eq!(amps.len(), self.dim, "amplitude length must match basis");
        assert!(k < self.dim);
        let mut joint_in = DVector::zeros(self.dim * self.dim);
        for n in 0..self.dim {
            joint_in[n * self.dim] = amps[n];
        }
        let joint_out = &self.unitary * joint_in;
        DVector::from_iterator(self.dim, (0..self.dim).map(|n| joint_out[n * self.dim + k]))
    }

    /// Probability that exactly `k` photons leave through the tap.
    pub fn event_probability(&self, amps: &[f64], k: usize) -> f64 {
        self.tap_projected(amps, k).norm_squared()
    }

    /// Normalized signal state conditioned on a `k`-photon tap event.
    pub fn conditional_state(&self, amps: &[f64], k: usize) -> DMatrix<f64> {
        let v = self.tap_projected(amps, k);
        let weight = v.norm_squared();
        assert!(weight > 0.0, "conditioning on an impossible event");
        let mut mat = &v * v.transpose();
        mat /= weight;
        mat
    }
}

/// Largest absolute entry of the difference of two equally sized matrices.
pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    assert_eq!(a.shape(), b.shape());
    (a - b).amax()
}
