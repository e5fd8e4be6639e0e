//! Quantum non-Gaussian character witness.
//!
//! The witness compares `W(a,s) = a·p₀(s) + p₁(s)` — where `p₀, p₁` are the
//! first two Fock probabilities of the state after an anti-squeezing
//! conjugation by `s` — against the maximum the same functional can reach on
//! any mixture of Gaussian states, `W_G(a)`. A positive margin at any `(a,s)`
//! certifies that the state is quantum non-Gaussian. A weaker classical
//! boundary `e^(a-1)` separates classical (coherent-state mixture) behavior.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::fock::{
    padded_dim, squeeze_conjugate, squeeze_operator, DensityMatrix, SqueezeDirection,
    SQUEEZE_TRACE_LIMIT,
};

/// Default upper bound of the Gaussian-boundary squeezing search bracket.
pub const DEFAULT_R_MAX: f64 = 3.0;

/// Multi-start agreement tolerance for the Gaussian-boundary maximization.
const BOUNDARY_AGREEMENT_TOL: f64 = 1e-8;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// `n` evenly spaced points covering `[lo, hi]` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 1, "linspace needs at least one point");
    if n == 1 {
        return vec![lo];
    }
    let step = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|i| if i == n - 1 { hi } else { lo + step * i as f64 })
        .collect()
}

/// Search-space description for [`evaluate_witness`].
#[derive(Debug, Clone, PartialEq)]
pub struct WitnessConfig {
    /// Grid over the mixing weight `a ∈ [0,1]`, ascending.
    pub a_grid: Vec<f64>,
    /// Grid over the anti-squeezing parameter `s ≥ 0`, ascending.
    pub s_grid: Vec<f64>,
    /// Upper end of the `[0, r_max]` bracket for the boundary's inner
    /// squeezing-parameter maximization.
    pub r_max: f64,
    /// Width tolerance terminating one-dimensional golden-section refinement.
    pub refine_tol: f64,
}

impl Default for WitnessConfig {
    fn default() -> Self {
        WitnessConfig {
            a_grid: linspace(0.0, 1.0, 101),
            s_grid: linspace(0.0, 1.0, 61),
            r_max: DEFAULT_R_MAX,
            refine_tol: 1e-6,
        }
    }
}

impl WitnessConfig {
    pub(crate) fn validate(&self) -> Result<()> {
        let ascending = |g: &[f64]| g.windows(2).all(|w| w[0] < w[1]);
        if self.a_grid.is_empty() || !ascending(&self.a_grid) {
            return Err(Error::config(
                "witness.a_grid",
                "must be a non-empty ascending grid",
            ));
        }
        if self
            .a_grid
            .iter()
            .any(|&a| !a.is_finite() || !(0.0..=1.0).contains(&a))
        {
            return Err(Error::config("witness.a_grid", "values must lie in [0,1]"));
        }
        if self.s_grid.is_empty() || !ascending(&self.s_grid) {
            return Err(Error::config(
                "witness.s_grid",
                "must be a non-empty ascending grid",
            ));
        }
        if self.s_grid.iter().any(|&s| !s.is_finite() || s < 0.0) {
            return Err(Error::config("witness.s_grid", "values must be >= 0"));
        }
        if !self.r_max.is_finite() || self.r_max <= 0.0 {
            return Err(Error::config("witness.r_max", "must be positive"));
        }
        if !self.refine_tol.is_finite() || self.refine_tol <= 0.0 {
            return Err(Error::config("witness.refine_tol", "must be positive"));
        }
        Ok(())
    }
}

/// Outcome of a witness evaluation.
#[derive(Debug, Clone)]
pub struct WitnessResult {
    /// `W(a_opt, s_opt) − W_G(a_opt)`; positive certifies quantum
    /// non-Gaussian character.
    pub witness_value: f64,
    pub a_opt: f64,
    pub s_opt: f64,
    /// Fock probabilities of the conjugated state at `s_opt`.
    pub p0: f64,
    pub p1: f64,
    /// `W(a_opt, s_opt) − e^(a_opt − 1)`; positive certifies non-classical
    /// character.
    pub classical_margin: f64,
    /// `(s, p0(s), p1(s))` for every grid `s` that evaluated cleanly.
    pub trajectory: Vec<(f64, f64, f64)>,
}

/// Fock probabilities `(p0, p1)` along the Gaussian boundary family at
/// squeezing parameter `r`.
pub fn gaussian_p0p1(r: f64) -> (f64, f64) {
    assert!(
        r.is_finite() && r >= 0.0,
        "squeezing parameter must be >= 0"
    );
    let damp = (-r.exp() * r.sinh()).exp();
    let p0 = damp / r.cosh();
    let p1 = ((4.0 * r).exp() - 1.0) / 4.0 * damp / r.cosh().powi(3);
    (p0, p1)
}

/// Largest value of `a·e^(−n̄) + n̄·e^(−n̄)` over mean photon numbers
/// `n̄ ≥ 0`: the classical (coherent-mixture) boundary, `e^(a−1)`.
pub fn classical_boundary(a: f64) -> f64 {
    assert!(
        a.is_finite() && (0.0..=1.0).contains(&a),
        "mixing weight must lie in [0,1]"
    );
    // interior optimum n̄ = 1 − a
    (a - 1.0).exp()
}

/// Golden-section maximization of `f` on `[lo, hi]`. Returns the best
/// `(x, f(x))` among all evaluated points, so the result never falls below
/// an endpoint or probe sample.
fn golden_max<F>(mut f: F, mut lo: f64, mut hi: f64, xtol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    debug_assert!(lo <= hi);
    let mut best = (lo, f(lo)?);
    let consider = |best: &mut (f64, f64), x: f64, v: f64| {
        if v > best.1 {
            *best = (x, v);
        }
    };
    let v_hi = f(hi)?;
    consider(&mut best, hi, v_hi);
    if hi - lo <= xtol {
        return Ok(best);
    }
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while hi - lo > xtol {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2)?;
        }
        consider(&mut best, x1, f1);
        consider(&mut best, x2, f2);
    }
    Ok(best)
}

/// Walk uphill from `seed` with doubling steps until `f` turns down, and
/// return the bracketing interval. `None` means the walk ran into `hi_lim`
/// still ascending (bracket failure).
fn uphill_bracket<F>(f: &mut F, seed: f64, hi_lim: f64, step0: f64) -> Option<(f64, f64)>
where
    F: FnMut(f64) -> f64,
{
    let clamp = |x: f64| x.clamp(0.0, hi_lim);
    let fs = f(seed);
    let right_x = clamp(seed + step0);
    let left_x = clamp(seed - step0);
    let (dir, mut x, mut fx) = {
        let fr = f(right_x);
        let fl = f(left_x);
        if fr >= fs && fr >= fl {
            (1.0, right_x, fr)
        } else if fl > fs {
            (-1.0, left_x, fl)
        } else {
            return Some((left_x, right_x));
        }
    };
    let mut x_prev = seed;
    let mut step = step0;
    loop {
        step *= 2.0;
        let x_next = clamp(x + dir * step);
        let f_next = f(x_next);
        if f_next < fx {
            return Some((x_prev.min(x_next), x_prev.max(x_next)));
        }
        if x_next <= 0.0 {
            return Some((0.0, x));
        }
        if x_next >= hi_lim {
            return None;
        }
        x_prev = x;
        x = x_next;
        fx = f_next;
    }
}

/// One attempt at the per-`a` boundary maximization over `r ∈ [0, r_max]`.
/// `Ok(None)` signals that the maximum pressed against `r_max`.
fn boundary_attempt(a: f64, r_max: f64, xtol: f64) -> Result<Option<f64>> {
    let mut f = |r: f64| {
        let (p0, p1) = gaussian_p0p1(r);
        a * p0 + p1
    };
    let coarse = linspace(0.0, r_max, 121);
    let mut best_idx = 0;
    let mut best_val = f64::NEG_INFINITY;
    for (i, &r) in coarse.iter().enumerate() {
        let v = f(r);
        if v > best_val {
            best_val = v;
            best_idx = i;
        }
    }
    if best_idx == coarse.len() - 1 {
        return Ok(None);
    }
    let lo = coarse[best_idx.saturating_sub(1)];
    let hi = coarse[(best_idx + 1).min(coarse.len() - 1)];
    let mut candidates = vec![golden_max(|r| Ok(f(r)), lo, hi, xtol)?.1];
    // multi-start guard against an overlooked second maximum
    for frac in [0.25, 0.5, 0.75] {
        let seed = frac * r_max;
        match uphill_bracket(&mut f, seed, r_max, r_max / 64.0) {
            Some((blo, bhi)) => candidates.push(golden_max(|r| Ok(f(r)), blo, bhi, xtol)?.1),
            None => return Ok(None),
        }
    }
    let top = candidates.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    for &c in &candidates {
        if top - c > BOUNDARY_AGREEMENT_TOL {
            return Err(Error::BoundarySearch(format!(
                "boundary maximizations disagree at a={a}: {candidates:?}"
            )));
        }
    }
    // r = 0 endpoint gives exactly a
    Ok(Some(top.max(a)))
}

/// Largest value of `a·p₀(r) + p₁(r)` over the Gaussian boundary family:
/// the threshold a quantum non-Gaussian state must beat at mixing weight `a`.
pub fn gaussian_boundary_with(a: f64, r_max: f64) -> Result<f64> {
    assert!(
        a.is_finite() && (0.0..=1.0).contains(&a),
        "mixing weight must lie in [0,1]"
    );
    match boundary_attempt(a, r_max, 1e-9)? {
        Some(v) => Ok(v),
        // widen once, then give up
        None => match boundary_attempt(a, 2.0 * r_max, 1e-9)? {
            Some(v) => Ok(v),
            None => Err(Error::BoundarySearch(format!(
                "boundary maximum still at the bracket edge after widening to r_max={}",
                2.0 * r_max
            ))),
        },
    }
}

/// [`gaussian_boundary_with`] at the default bracket.
pub fn gaussian_boundary(a: f64) -> Result<f64> {
    gaussian_boundary_with(a, DEFAULT_R_MAX)
}

/// First two Fock probabilities of `ρ` after anti-squeezing conjugation by
/// `s`, with the truncation-overflow guard of
/// [`squeeze_conjugate`](crate::fock::squeeze_conjugate).
pub fn state_p0p1(rho: &DensityMatrix, s: f64) -> Result<(f64, f64)> {
    let conj = squeeze_conjugate(rho, s, SqueezeDirection::AntiSqueeze)?;
    Ok((conj.element(0, 0).max(0.0), conj.element(1, 1).max(0.0)))
}

type OpCache = Mutex<HashMap<(usize, u64), Arc<DMatrix<f64>>>>;

static SQUEEZE_OPS: OnceLock<OpCache> = OnceLock::new();

/// Anti-squeeze operator at padded dimension `pdim`, cached because sweeps
/// re-evaluate the same `s` grid for every state.
fn cached_antisqueeze_op(pdim: usize, s: f64) -> Arc<DMatrix<f64>> {
    let cache = SQUEEZE_OPS.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (pdim, s.to_bits());
    if let Some(op) = cache.lock().expect("squeeze-op cache poisoned").get(&key) {
        return Arc::clone(op);
    }
    let op = Arc::new(squeeze_operator(pdim, s));
    cache
        .lock()
        .expect("squeeze-op cache poisoned")
        .entry(key)
        .or_insert(op)
        .clone()
}

/// Diagonal of the conjugated state restricted to the original cutoff:
/// `(p0, p1, retained trace)`.
fn conjugated_probe(big: &DMatrix<f64>, op: &DMatrix<f64>, dim: usize) -> (f64, f64, f64) {
    let rows = op.rows(0, dim);
    let c = rows * big;
    let mut retained = 0.0;
    let mut p0 = 0.0;
    let mut p1 = 0.0;
    for n in 0..dim {
        let q = c.row(n).dot(&rows.row(n));
        retained += q;
        if n == 0 {
            p0 = q.max(0.0);
        } else if n == 1 {
            p1 = q.max(0.0);
        }
    }
    (p0, p1, retained)
}

/// Maximize `a·p₀(s)+p₁(s) − W_G(a)` over the configured grid, then refine
/// the optimum in `a` and `s` by golden section.
///
/// Grid points whose anti-squeezing conjugation loses more than the
/// truncation budget are skipped; if every `s` fails, the error lists them.
/// Ties on the grid resolve toward smaller `a`, then smaller `s`.
pub fn evaluate_witness(rho: &DensityMatrix, cfg: &WitnessConfig) -> Result<WitnessResult> {
    cfg.validate()?;
    let dim = rho.dim();
    let pdim = padded_dim(dim);
    let mut big = DMatrix::zeros(pdim, pdim);
    big.view_mut((0, 0), (dim, dim)).copy_from(rho.matrix());
    let trace = rho.trace();

    // state-independent boundary along the a grid
    let wg: Vec<f64> = cfg
        .a_grid
        .iter()
        .map(|&a| gaussian_boundary_with(a, cfg.r_max))
        .collect::<Result<_>>()?;

    let mut trajectory = Vec::with_capacity(cfg.s_grid.len());
    let mut failing_s = Vec::new();
    for &s in &cfg.s_grid {
        let op = cached_antisqueeze_op(pdim, s);
        let (p0, p1, retained) = conjugated_probe(&big, &op, dim);
        if trace - retained > SQUEEZE_TRACE_LIMIT {
            failing_s.push(s);
            continue;
        }
        trajectory.push((s, p0, p1));
    }
    if trajectory.is_empty() {
        return Err(Error::WitnessGridOverflow { failing_s });
    }

    let mut best_val = f64::NEG_INFINITY;
    let mut best_a_idx = 0;
    let mut best_s_idx = 0;
    for (j, &a) in cfg.a_grid.iter().enumerate() {
        for (i, &(_, p0, p1)) in trajectory.iter().enumerate() {
            let v = a * p0 + p1 - wg[j];
            if v > best_val {
                best_val = v;
                best_a_idx = j;
                best_s_idx = i;
            }
        }
    }

    // refine a with s fixed at the grid optimum
    let (_, p0_g, p1_g) = trajectory[best_s_idx];
    let a_lo = cfg.a_grid[best_a_idx.saturating_sub(1)];
    let a_hi = cfg.a_grid[(best_a_idx + 1).min(cfg.a_grid.len() - 1)];
    let (mut a_opt, refined_a_val) = golden_max(
        |a| Ok(a * p0_g + p1_g - gaussian_boundary_with(a, cfg.r_max)?),
        a_lo,
        a_hi,
        cfg.refine_tol,
    )?;
    if refined_a_val <= best_val {
        a_opt = cfg.a_grid[best_a_idx];
    }
    let mut best_val = refined_a_val.max(best_val);

    // refine s with a fixed at the refined optimum
    let wg_a = gaussian_boundary_with(a_opt, cfg.r_max)?;
    let s_lo = trajectory[best_s_idx.saturating_sub(1)].0;
    let s_hi = trajectory[(best_s_idx + 1).min(trajectory.len() - 1)].0;
    let probe_at = |s: f64| -> (f64, f64, f64) {
        let op = squeeze_operator(pdim, s);
        conjugated_probe(&big, &op, dim)
    };
    let (refined_s, refined_s_val) = golden_max(
        |s| {
            let (p0, p1, retained) = probe_at(s);
            if trace - retained > SQUEEZE_TRACE_LIMIT {
                // out of truncation budget: never selected over a clean point
                return Ok(f64::NEG_INFINITY);
            }
            Ok(a_opt * p0 + p1 - wg_a)
        },
        s_lo,
        s_hi,
        cfg.refine_tol,
    )?;
    let (s_opt, p0, p1) = if refined_s_val > best_val {
        best_val = refined_s_val;
        let (p0, p1, _) = probe_at(refined_s);
        (refined_s, p0, p1)
    } else {
        let (s, p0, p1) = trajectory[best_s_idx];
        (s, p0, p1)
    };

    let w_opt = a_opt * p0 + p1;
    Ok(WitnessResult {
        witness_value: best_val,
        a_opt,
        s_opt,
        p0,
        p1,
        classical_margin: w_opt - classical_boundary(a_opt),
        trajectory,
    })
}
