//! Truncated Fock-basis states and Gaussian-channel primitives.
//!
//! Everything in the pipeline is represented by a real symmetric density
//! matrix over the photon-number basis `|0⟩ … |nmax⟩`. Real entries suffice
//! because the squeezing angle is fixed to zero throughout, which keeps every
//! state real in this basis; complex input is rejected at the serialization
//! boundary. The matrix records the probability mass that construction lost
//! to the cutoff (`trace_deficit`) so downstream checks can distinguish
//! truncation from bugs.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Tail mass beyond the cutoff above which state construction is refused.
pub const CUTOFF_TAIL_LIMIT: f64 = 1e-3;

/// Trace allowed to leak past the padded basis during a squeeze conjugation.
pub const SQUEEZE_TRACE_LIMIT: f64 = 1e-4;

/// Symmetry tolerance enforced on matrices entering from outside the crate.
pub const SYMMETRY_TOL: f64 = 1e-12;

const LN_FACTORIAL_LEN: usize = 4096;

/// ln(n!) from a table built once per process.
pub(crate) fn ln_factorial(n: usize) -> f64 {
    use std::sync::OnceLock;
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = vec![0.0; LN_FACTORIAL_LEN];
        for i in 1..LN_FACTORIAL_LEN {
            t[i] = t[i - 1] + (i as f64).ln();
        }
        t
    });
    assert!(
        n < LN_FACTORIAL_LEN,
        "ln_factorial table exhausted at n={n}"
    );
    table[n]
}

/// Real symmetric density matrix over a truncated Fock basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: DMatrix<f64>,
    trace_deficit: f64,
}

impl DensityMatrix {
    /// Vacuum state on `nmax + 1` levels.
    pub fn vacuum(nmax: usize) -> Self {
        Self::fock_state(0, nmax)
    }

    /// Photon-number eigenstate `|n⟩⟨n|` on `nmax + 1` levels.
    pub fn fock_state(n: usize, nmax: usize) -> Self {
        assert!(n <= nmax, "fock_state level {n} exceeds cutoff {nmax}");
        let mut mat = DMatrix::zeros(nmax + 1, nmax + 1);
        mat[(n, n)] = 1.0;
        DensityMatrix {
            mat,
            trace_deficit: 0.0,
        }
    }

    /// Validated constructor for matrices arriving from outside the crate
    /// (file input, test fixtures). Enforces squareness, finiteness,
    /// symmetry, and non-negative diagonal; positive semidefiniteness is the
    /// caller's concern (see [`DensityMatrix::check_physical`]).
    pub fn from_parts(mat: DMatrix<f64>, trace_deficit: f64) -> Result<Self> {
        if mat.nrows() != mat.ncols() || mat.nrows() == 0 {
            return Err(Error::config(
                "density_matrix",
                format!(
                    "matrix must be square and non-empty, got {}x{}",
                    mat.nrows(),
                    mat.ncols()
                ),
            ));
        }
        if !trace_deficit.is_finite() || trace_deficit < 0.0 {
            return Err(Error::config(
                "density_matrix.trace_deficit",
                format!("must be finite and non-negative, got {trace_deficit}"),
            ));
        }
        for i in 0..mat.nrows() {
            if mat[(i, i)] < -SYMMETRY_TOL.max(1e-12) {
                return Err(Error::config(
                    "density_matrix",
                    format!("diagonal entry {} is negative: {}", i, mat[(i, i)]),
                ));
            }
            for j in 0..mat.ncols() {
                let v = mat[(i, j)];
                if !v.is_finite() {
                    return Err(Error::config(
                        "density_matrix",
                        format!("non-finite entry at ({i},{j})"),
                    ));
                }
                if (v - mat[(j, i)]).abs() > SYMMETRY_TOL {
                    return Err(Error::config(
                        "density_matrix",
                        format!(
                            "matrix is not symmetric at ({i},{j}): {} vs {}",
                            v,
                            mat[(j, i)]
                        ),
                    ));
                }
            }
        }
        Ok(DensityMatrix { mat, trace_deficit })
    }

    /// Internal fast path for matrices produced by this crate's own channels,
    /// which preserve the invariants by construction.
    pub(crate) fn from_trusted(mat: DMatrix<f64>, trace_deficit: f64) -> Self {
        debug_assert!(mat.is_square());
        DensityMatrix {
            mat,
            trace_deficit: trace_deficit.max(0.0),
        }
    }

    /// Number of Fock levels (`nmax + 1`).
    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    /// Highest Fock level retained by the truncation.
    pub fn nmax(&self) -> usize {
        self.dim() - 1
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }

    pub fn element(&self, l: usize, n: usize) -> f64 {
        self.mat[(l, n)]
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace()
    }

    /// Probability mass lost to the cutoff, recorded at construction and
    /// propagated through the channels.
    pub fn trace_deficit(&self) -> f64 {
        self.trace_deficit
    }

    /// Diagonal as a probability vector.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|n| self.mat[(n, n)]).collect()
    }

    /// Purity Tr(ρ²).
    pub fn purity(&self) -> f64 {
        self.mat.iter().map(|v| v * v).sum()
    }

    /// Rescale to unit trace.
    pub fn normalized(&self) -> Result<Self> {
        let tr = self.trace();
        if !(tr > f64::MIN_POSITIVE) {
            return Err(Error::NoEvent(format!(
                "cannot normalize a matrix with trace {tr:.3e}"
            )));
        }
        Ok(DensityMatrix {
            mat: &self.mat / tr,
            trace_deficit: self.trace_deficit,
        })
    }

    /// Full physicality check: symmetry, non-negative diagonal, and
    /// eigenvalues above `-eig_tol`. Intended for tests and input validation,
    /// not hot paths.
    pub fn check_physical(&self, eig_tol: f64) -> Result<()> {
        for i in 0..self.dim() {
            for j in (i + 1)..self.dim() {
                if (self.mat[(i, j)] - self.mat[(j, i)]).abs() > SYMMETRY_TOL {
                    return Err(Error::config(
                        "density_matrix",
                        format!("asymmetric at ({i},{j})"),
                    ));
                }
            }
            if self.mat[(i, i)] < -1e-12 {
                return Err(Error::config(
                    "density_matrix",
                    format!("negative diagonal at {i}: {}", self.mat[(i, i)]),
                ));
            }
        }
        let eig = self.mat.clone().symmetric_eigenvalues();
        if let Some(min) = eig.iter().cloned().reduce(f64::min) {
            if min < -eig_tol {
                return Err(Error::config(
                    "density_matrix",
                    format!("eigenvalue {min:.3e} below -{eig_tol:.0e}"),
                ));
            }
        }
        Ok(())
    }
}

/// Pure squeezed-vacuum description: squeezing parameter and basis cutoff.
///
/// The quadrature variance of the squeezed axis, relative to vacuum, is
/// `V₀ = exp(-2ξ)`; levels are expressed in dB as `10·log₁₀(V₀)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezedVacuumSpec {
    xi: f64,
    nmax: usize,
}

impl SqueezedVacuumSpec {
    pub fn from_xi(xi: f64, nmax: usize) -> Result<Self> {
        if !xi.is_finite() || xi < 0.0 {
            return Err(Error::config(
                "squeezing.xi",
                format!("squeezing parameter must be finite and >= 0, got {xi}"),
            ));
        }
        Ok(SqueezedVacuumSpec { xi, nmax })
    }

    /// Build from a squeezing level in dB (non-positive: 0 dB is vacuum).
    pub fn from_v0_db(v0_db: f64, nmax: usize) -> Result<Self> {
        if !v0_db.is_finite() || v0_db > 0.0 {
            return Err(Error::config(
                "squeezing.v0_db",
                format!("squeezing level in dB must be finite and <= 0, got {v0_db}"),
            ));
        }
        // V0 = 10^(db/10), xi = -ln(V0)/2
        let xi = -v0_db * std::f64::consts::LN_10 / 20.0;
        Ok(SqueezedVacuumSpec { xi, nmax })
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn nmax(&self) -> usize {
        self.nmax
    }

    /// Squeezed-quadrature variance relative to vacuum, `exp(-2ξ)`.
    pub fn v0(&self) -> f64 {
        (-2.0 * self.xi).exp()
    }

    pub fn v0_db(&self) -> f64 {
        10.0 * self.v0().log10()
    }
}

/// Amplitudes of the pure squeezed vacuum over levels `0..=nmax`, plus the
/// probability mass lying beyond the cutoff.
///
/// Only even levels are populated:
/// `α[2n] = √((2n)!)·(-tanh ξ)ⁿ / (√cosh ξ · 2ⁿ·n!)`, evaluated by a stable
/// two-step recurrence. The second value reports `1 - Σ α²` so the caller can
/// decide whether the cutoff suffices.
pub fn squeezed_vacuum_coeffs(xi: f64, nmax: usize) -> (Vec<f64>, f64) {
    assert!(xi.is_finite() && xi >= 0.0, "xi must be finite and >= 0");
    let mut amps = vec![0.0; nmax + 1];
    amps[0] = 1.0 / xi.cosh().sqrt();
    let th = xi.tanh();
    let mut n = 0usize;
    while n + 2 <= nmax {
        let f = n as f64;
        amps[n + 2] = amps[n] * (-th) * ((f + 1.0) * (f + 2.0)).sqrt() / (f + 2.0);
        n += 2;
    }
    let norm: f64 = amps.iter().map(|a| a * a).sum();
    (amps, (1.0 - norm).max(0.0))
}

/// Pure squeezed-vacuum density matrix (rank one, even-parity support).
pub fn squeezed_vacuum_dm(spec: &SqueezedVacuumSpec) -> Result<DensityMatrix> {
    let (amps, deficit) = squeezed_vacuum_coeffs(spec.xi(), spec.nmax());
    if deficit > CUTOFF_TAIL_LIMIT {
        return Err(Error::InsufficientCutoff {
            nmax: spec.nmax(),
            tail_mass: deficit,
            limit: CUTOFF_TAIL_LIMIT,
        });
    }
    let dim = spec.nmax() + 1;
    let mut mat = DMatrix::zeros(dim, dim);
    for l in 0..dim {
        if amps[l] == 0.0 {
            continue;
        }
        for n in 0..dim {
            mat[(l, n)] = amps[l] * amps[n];
        }
    }
    Ok(DensityMatrix::from_trusted(mat, deficit))
}

/// Pure-loss (beam-splitter) channel with intensity transmission `eta`.
///
/// Implements the generalized Bernoulli transform
/// `⟨l|ρ'|n⟩ = Σ_k B_{l+k,l}·B_{n+k,n}·⟨l+k|ρ|n+k⟩` with
/// `B_{n,l} = √(C(n,l)·ηˡ·(1-η)^(n-l))`. Trace-preserving up to roundoff and
/// a semigroup in `eta`: two losses compose by multiplying transmissions.
pub fn loss_channel(rho: &DensityMatrix, eta: f64) -> DensityMatrix {
    assert!(
        eta.is_finite() && (0.0..=1.0).contains(&eta),
        "transmission must lie in [0,1], got {eta}"
    );
    let dim = rho.dim();
    if eta == 1.0 {
        return rho.clone();
    }
    if eta == 0.0 {
        let mut mat = DMatrix::zeros(dim, dim);
        mat[(0, 0)] = rho.trace();
        return DensityMatrix::from_trusted(mat, rho.trace_deficit());
    }

    // b[n][l] = B_{n,l} for l <= n, computed in log space.
    let ln_eta = eta.ln();
    let ln_t = (1.0 - eta).ln();
    let mut b = vec![vec![0.0f64; dim]; dim];
    for n in 0..dim {
        for l in 0..=n {
            let ln_c = ln_factorial(n) - ln_factorial(l) - ln_factorial(n - l);
            b[n][l] = (0.5 * (ln_c + l as f64 * ln_eta + (n - l) as f64 * ln_t)).exp();
        }
    }

    let mut mat = DMatrix::zeros(dim, dim);
    for l in 0..dim {
        for n in l..dim {
            let kmax = dim - 1 - n;
            let mut acc = 0.0;
            for k in 0..=kmax {
                acc += b[l + k][l] * b[n + k][n] * rho.element(l + k, n + k);
            }
            mat[(l, n)] = acc;
            mat[(n, l)] = acc;
        }
    }
    DensityMatrix::from_trusted(mat, rho.trace_deficit())
}

/// Squeezed vacuum degraded by an input-impurity beam splitter of intensity
/// reflectivity `r1`; equivalent to a loss channel with transmission `1-r1`.
pub fn impure_squeezed_vacuum(spec: &SqueezedVacuumSpec, r1: f64) -> Result<DensityMatrix> {
    if !r1.is_finite() || !(0.0..1.0).contains(&r1) {
        return Err(Error::config(
            "experiment.r1",
            format!("input impurity must lie in [0,1), got {r1}"),
        ));
    }
    Ok(loss_channel(&squeezed_vacuum_dm(spec)?, 1.0 - r1))
}

/// Wigner function at the phase-space origin: `(1/π)·Σ_n (-1)ⁿ·ρ[n][n]`
/// (parity expectation). Vacuum gives `1/π`; a single photon gives `-1/π`.
pub fn wigner_origin(rho: &DensityMatrix) -> f64 {
    let mut acc = 0.0;
    for n in 0..rho.dim() {
        let v = rho.element(n, n);
        acc += if n % 2 == 0 { v } else { -v };
    }
    acc / std::f64::consts::PI
}

/// Wigner function on a rectangular grid, `out[(i,j)] = W(xs[i], ps[j])`.
///
/// Uses the Fock-basis expansion in associated Laguerre polynomials under the
/// same convention as [`wigner_origin`]: vacuum peaks at `1/π` and the double
/// integral `∫∫ W dx dp` recovers the trace.
pub fn wigner_grid(rho: &DensityMatrix, xs: &[f64], ps: &[f64]) -> DMatrix<f64> {
    let dim = rho.dim();
    let mut out = DMatrix::zeros(xs.len(), ps.len());
    for (i, &x) in xs.iter().enumerate() {
        for (j, &p) in ps.iter().enumerate() {
            out[(i, j)] = wigner_point(rho, dim, x, p);
        }
    }
    out
}

fn wigner_point(rho: &DensityMatrix, dim: usize, x: f64, p: f64) -> f64 {
    let u = x * x + p * p;
    let z = 2.0 * u;
    let phi = p.atan2(x);
    let mut sum = 0.0;
    for d in 0..dim {
        if d > 0 && u == 0.0 {
            break; // off-diagonal terms vanish at the origin
        }
        // c(n,d)·L_n^{(d)}(z) summed over n, with the d-dependent prefactor
        // constant in n pulled out where possible.
        let ang = 2.0 * (d as f64 * phi).cos();
        let mut lm1 = 0.0; // L_{n-1}
        let mut l = 1.0; // L_0
        for n in 0..(dim - d) {
            if n > 0 {
                let fnn = n as f64;
                let next =
                    ((2.0 * fnn - 1.0 + d as f64 - z) * l - (fnn - 1.0 + d as f64) * lm1) / fnn;
                lm1 = l;
                l = next;
            }
            let elem = rho.element(n + d, n);
            if elem == 0.0 {
                continue;
            }
            let parity = if n % 2 == 0 { 1.0 } else { -1.0 };
            let term = if d == 0 {
                parity * elem * l
            } else {
                let scale =
                    (0.5 * (d as f64 * z.ln() + ln_factorial(n) - ln_factorial(n + d))).exp();
                parity * elem * ang * scale * l
            };
            sum += term;
        }
    }
    (-u).exp() * sum / std::f64::consts::PI
}

/// Photon-number distribution (the diagonal of the matrix).
pub fn photon_distribution(rho: &DensityMatrix) -> Vec<f64> {
    rho.diagonal()
}

/// Direction of a squeeze conjugation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SqueezeDirection {
    /// Conjugation that squeezes further (increases the quadrature
    /// asymmetry of a squeezed vacuum).
    Squeeze,
    /// Conjugation that undoes squeezing: applied with a matching parameter
    /// it drives a pure squeezed vacuum back toward vacuum (p₀ → 1).
    AntiSqueeze,
}

/// Truncated squeeze operator `exp((s/2)·(a†² - a²))` on a `dim`-level basis.
///
/// The generator is antisymmetric, so the result is orthogonal up to
/// truncation; negative `s` gives the inverse (opposite-direction) operator.
pub fn squeeze_operator(dim: usize, s: f64) -> DMatrix<f64> {
    let mut g = DMatrix::zeros(dim, dim);
    for n in 0..dim.saturating_sub(2) {
        let c = (((n + 1) * (n + 2)) as f64).sqrt();
        g[(n + 2, n)] = c;
        g[(n, n + 2)] = -c;
    }
    (g * (0.5 * s)).exp()
}

/// Number of padding levels used around a squeeze conjugation (+50%).
pub(crate) fn padded_dim(dim: usize) -> usize {
    dim + dim.div_ceil(2)
}

/// Conjugate a state by the truncated squeeze operator, padding the basis by
/// 50% during the product and re-truncating afterwards.
///
/// Fails with a truncation-overflow error when more than
/// [`SQUEEZE_TRACE_LIMIT`] of the trace escapes past the original cutoff.
pub fn squeeze_conjugate(
    rho: &DensityMatrix,
    s: f64,
    direction: SqueezeDirection,
) -> Result<DensityMatrix> {
    assert!(s.is_finite() && s >= 0.0, "squeeze parameter must be >= 0");
    if s == 0.0 {
        return Ok(rho.clone());
    }
    let dim = rho.dim();
    let pdim = padded_dim(dim);
    let signed = match direction {
        SqueezeDirection::AntiSqueeze => s,
        SqueezeDirection::Squeeze => -s,
    };
    let op = squeeze_operator(pdim, signed);
    let mut big = DMatrix::zeros(pdim, pdim);
    big.view_mut((0, 0), (dim, dim)).copy_from(rho.matrix());
    let conj = &op * big * op.transpose();
    let mut mat = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            mat[(i, j)] = 0.5 * (conj[(i, j)] + conj[(j, i)]);
        }
    }
    let trace_loss = rho.trace() - mat.trace();
    if trace_loss > SQUEEZE_TRACE_LIMIT {
        return Err(Error::TruncationOverflow {
            trace_loss,
            limit: SQUEEZE_TRACE_LIMIT,
        });
    }
    Ok(DensityMatrix::from_trusted(
        mat,
        rho.trace_deficit() + trace_loss.max(0.0),
    ))
}
