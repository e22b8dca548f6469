//! Derivatives along `s ↦ f(e^{isA} U)` as double operator integrals, their
//! finite-difference verification, and the self-adjoint analogue
//! `d/dt f(A + tK)|₀`.

use crate::circlefn::{CircleFunction, LineFunction};
use crate::doi::{doi_compute, line_divided_difference_on_spectra, KernelMatrix};
use crate::error::{Error, Result};
use crate::spectra::{
    c, decompose_hermitian, decompose_unitary, matrix_function, ComplexMatrix, HermitianMatrix,
    SpectralDecomposition, UnitaryMatrix, UnitaryPath, DEFAULT_GAP_TOL,
};

/// Steps below this are dominated by cancellation in double precision.
pub const CANCELLATION_STEP: f64 = 1e-9;

/// Kernel `τ·(Дf)(ζ, τ)` on the spectrum of `V_s`.
pub fn qs_kernel(f: &CircleFunction, ds: &SpectralDecomposition) -> Result<KernelMatrix> {
    KernelMatrix::on_spectra(ds, ds, |z, w| Ok(w * f.divided_difference(z, w)?))
}

/// `Q_s = i ∬ τ(Дf)(ζ,τ) dE_s(ζ) A dE_s(τ)` with `E_s` the spectral measure
/// of `V_s = e^{isA} U`.
pub fn qs_operator(f: &CircleFunction, u: &UnitaryMatrix, a: &HermitianMatrix, s: f64) -> Result<ComplexMatrix> {
    qs_on_path(f, &UnitaryPath::new(u, a)?, s)
}

pub fn qs_on_path(f: &CircleFunction, path: &UnitaryPath, s: f64) -> Result<ComplexMatrix> {
    let ds = decompose_unitary(&path.at(s)?, DEFAULT_GAP_TOL)?;
    let kernel = qs_kernel(f, &ds)?;
    let out = doi_compute(&kernel, &ds, path.generator().matrix(), &ds)?;
    Ok(out.map(|z| z * c(0.0, 1.0)))
}

#[derive(Clone, Debug)]
pub struct DerivativeReport {
    pub s: f64,
    pub qs: ComplexMatrix,
    /// `(t, ‖(f(V_{s+t}) − f(V_{s−t}))/(2t) − Q_s‖_F)` per step.
    pub fd_errors: Vec<(f64, f64)>,
    /// Log-log slope of error against step; `None` when fewer than two
    /// errors are positive.
    pub fitted_order: Option<f64>,
    /// RMS residual of the log-log fit.
    pub fit_residual: f64,
    /// Steps below [`CANCELLATION_STEP`].
    pub flagged_steps: Vec<f64>,
}

/// Least-squares slope and RMS residual of `log y` against `log x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let rss: f64 = pts.iter().map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2)).sum();
    Some((slope, (rss / n).sqrt()))
}

/// Central differences of `t ↦ f(V_t)` at `s` compared with `Q_s`.
pub fn fd_probe(
    f: &CircleFunction,
    u: &UnitaryMatrix,
    a: &HermitianMatrix,
    s: f64,
    steps: &[f64],
) -> Result<DerivativeReport> {
    if steps.is_empty() {
        return Err(Error::InvalidArgument("at least one step is required".into()));
    }
    if steps.iter().any(|&t| !(t > 0.0) || !t.is_finite()) {
        return Err(Error::InvalidArgument("steps must be positive and finite".into()));
    }
    if steps.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument("steps must be strictly decreasing".into()));
    }
    let path = UnitaryPath::new(u, a)?;
    let qs = qs_on_path(f, &path, s)?;
    let fv = |x: f64| -> Result<ComplexMatrix> {
        let d = decompose_unitary(&path.at(x)?, DEFAULT_GAP_TOL)?;
        matrix_function(&d, f)
    };
    let mut fd_errors = Vec::with_capacity(steps.len());
    for &t in steps {
        let quotient = (fv(s + t)? - fv(s - t)?).map(|z| z / (2.0 * t));
        fd_errors.push((t, (quotient - &qs).norm()));
    }
    let fit = loglog_slope(&fd_errors);
    Ok(DerivativeReport {
        s,
        qs,
        fitted_order: fit.map(|f| f.0),
        fit_residual: fit.map_or(0.0, |f| f.1),
        flagged_steps: steps.iter().copied().filter(|&t| t < CANCELLATION_STEP).collect(),
        fd_errors,
    })
}

/// `d/dt f(A + tK)|₀ = ∬ (Дf)(x, y) dE_A(x) K dE_A(y)`.
pub fn sa_derivative(f: &LineFunction, a: &HermitianMatrix, k: &HermitianMatrix) -> Result<ComplexMatrix> {
    if a.dim() != k.dim() {
        return Err(Error::Dimension(format!("A is {0}x{0} but K is {1}x{1}", a.dim(), k.dim())));
    }
    let d = decompose_hermitian(a, DEFAULT_GAP_TOL)?;
    let kernel = line_divided_difference_on_spectra(f, &d, &d)?;
    doi_compute(&kernel, &d, k.matrix(), &d)
}
