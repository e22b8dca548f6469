//! Double operator integrals over finite atomic spectral measures.
//!
//! With `E₁ = Σ λ_i P_i` and `E₂ = Σ μ_j Q_j`, the integral
//! `∬ Φ(λ, μ) dE₁ T dE₂ = Σ_{i,j} Φ(λ_i, μ_j) P_i T Q_j` is one entrywise
//! product in eigenvector coordinates: `Q₁ (Φ ∘ (Q₁* T Q₂)) Q₂*`.

use crate::circlefn::{CircleFunction, LineFunction};
use crate::error::{Error, Result};
use crate::spectra::{
    c, decompose_unitary, matrix_function, svd, trace, ComplexMatrix, SpectralDecomposition,
    UnitaryMatrix, C64, DEFAULT_GAP_TOL,
};

/// Points are matched to decomposition representatives within this distance.
const GRID_MATCH_TOL: f64 = 1e-9;

/// A two-variable kernel sampled on a pair of spectral grids.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelMatrix {
    left_points: Vec<C64>,
    right_points: Vec<C64>,
    values: ComplexMatrix,
}

impl KernelMatrix {
    pub fn new(left_points: Vec<C64>, right_points: Vec<C64>, values: ComplexMatrix) -> Result<Self> {
        if values.nrows() != left_points.len() || values.ncols() != right_points.len() {
            return Err(Error::Dimension(format!(
                "kernel values are {}x{} but grids have {} and {} points",
                values.nrows(),
                values.ncols(),
                left_points.len(),
                right_points.len()
            )));
        }
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Invariant {
                kind: "KernelMatrix",
                detail: "kernel has non-finite values".into(),
            });
        }
        Ok(Self {
            left_points,
            right_points,
            values,
        })
    }

    /// Samples `phi` on the product grid.
    pub fn from_fn<F>(left_points: Vec<C64>, right_points: Vec<C64>, mut phi: F) -> Result<Self>
    where
        F: FnMut(C64, C64) -> Result<C64>,
    {
        let mut values = ComplexMatrix::zeros(left_points.len(), right_points.len());
        for (i, &x) in left_points.iter().enumerate() {
            for (j, &y) in right_points.iter().enumerate() {
                values[(i, j)] = phi(x, y)?;
            }
        }
        Self::new(left_points, right_points, values)
    }

    /// Samples `phi` at the cluster representatives of two decompositions,
    /// so the kernel is constant on every cluster block.
    pub fn on_spectra<F>(left: &SpectralDecomposition, right: &SpectralDecomposition, mut phi: F) -> Result<Self>
    where
        F: FnMut(C64, C64) -> Result<C64>,
    {
        let lr = left.cluster_representatives();
        let rr = right.cluster_representatives();
        let mut block = ComplexMatrix::zeros(lr.len(), rr.len());
        for (a, &x) in lr.iter().enumerate() {
            for (b, &y) in rr.iter().enumerate() {
                block[(a, b)] = phi(x, y)?;
            }
        }
        let values = ComplexMatrix::from_fn(left.dim(), right.dim(), |i, j| {
            block[(left.cluster_of(i), right.cluster_of(j))]
        });
        Self::new(left.point_representatives(), right.point_representatives(), values)
    }

    /// The constant kernel `Φ ≡ 1`.
    pub fn ones(left_points: Vec<C64>, right_points: Vec<C64>) -> Self {
        let values = ComplexMatrix::from_element(left_points.len(), right_points.len(), c(1.0, 0.0));
        Self {
            left_points,
            right_points,
            values,
        }
    }

    pub fn left_points(&self) -> &[C64] {
        &self.left_points
    }

    pub fn right_points(&self) -> &[C64] {
        &self.right_points
    }

    pub fn values(&self) -> &ComplexMatrix {
        &self.values
    }

    pub fn nrows(&self) -> usize {
        self.values.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.values.ncols()
    }

    /// Entrywise product `Φ ∘ M`.
    pub fn schur_product(&self, m: &ComplexMatrix) -> Result<ComplexMatrix> {
        if m.shape() != self.values.shape() {
            return Err(Error::Dimension(format!(
                "Schur product of {:?} kernel with {:?} matrix",
                self.values.shape(),
                m.shape()
            )));
        }
        Ok(self.values.component_mul(m))
    }
}

/// Divided-difference kernel `(Дf)(λ_i, μ_j)` on two unitary spectra.
pub fn divided_difference_on_spectra(
    f: &CircleFunction,
    left: &SpectralDecomposition,
    right: &SpectralDecomposition,
) -> Result<KernelMatrix> {
    KernelMatrix::on_spectra(left, right, |z, w| f.divided_difference(z, w))
}

/// Real-line divided-difference kernel on two Hermitian spectra.
pub fn line_divided_difference_on_spectra(
    f: &LineFunction,
    left: &SpectralDecomposition,
    right: &SpectralDecomposition,
) -> Result<KernelMatrix> {
    KernelMatrix::on_spectra(left, right, |x, y| Ok(f.divided_difference(x.re, y.re)))
}

fn check_grid(points: &[C64], d: &SpectralDecomposition, side: &str) -> Result<()> {
    if points.len() != d.dim() {
        return Err(Error::GridMismatch(format!(
            "{side} grid has {} points but the decomposition has dimension {}",
            points.len(),
            d.dim()
        )));
    }
    let reps = d.point_representatives();
    for (i, (p, r)) in points.iter().zip(&reps).enumerate() {
        let raw = d.values()[i];
        if (p - r).norm() > GRID_MATCH_TOL && (p - raw).norm() > GRID_MATCH_TOL {
            return Err(Error::GridMismatch(format!(
                "{side} grid point {i} = {p} does not match eigenvalue {raw}"
            )));
        }
    }
    Ok(())
}

/// `Σ_{i,j} Φ(λ_i, μ_j) P_i T Q_j`.
pub fn doi_compute(
    phi: &KernelMatrix,
    left: &SpectralDecomposition,
    t: &ComplexMatrix,
    right: &SpectralDecomposition,
) -> Result<ComplexMatrix> {
    if t.nrows() != left.dim() || t.ncols() != right.dim() {
        return Err(Error::Dimension(format!(
            "T is {}x{} but the spectral measures have dimensions {} and {}",
            t.nrows(),
            t.ncols(),
            left.dim(),
            right.dim()
        )));
    }
    check_grid(phi.left_points(), left, "left")?;
    check_grid(phi.right_points(), right, "right")?;
    let inner = left.vectors().adjoint() * t * right.vectors();
    let weighted = phi.schur_product(&inner)?;
    Ok(left.vectors() * weighted * right.vectors().adjoint())
}

/// `f(U) − f(V)` as the double operator integral of `Дf` against `U − V`.
pub fn dkbs_difference(f: &CircleFunction, u: &UnitaryMatrix, v: &UnitaryMatrix) -> Result<ComplexMatrix> {
    if u.dim() != v.dim() {
        return Err(Error::Dimension(format!("U is {0}x{0} but V is {1}x{1}", u.dim(), v.dim())));
    }
    let du = decompose_unitary(u, DEFAULT_GAP_TOL)?;
    let dv = decompose_unitary(v, DEFAULT_GAP_TOL)?;
    dkbs_difference_with(f, &du, u, &dv, v)
}

/// As [`dkbs_difference`], reusing existing decompositions of `U` and `V`.
pub fn dkbs_difference_with(
    f: &CircleFunction,
    du: &SpectralDecomposition,
    u: &UnitaryMatrix,
    dv: &SpectralDecomposition,
    v: &UnitaryMatrix,
) -> Result<ComplexMatrix> {
    let kernel = divided_difference_on_spectra(f, du, dv)?;
    let diff = u.matrix() - v.matrix();
    doi_compute(&kernel, du, &diff, dv)
}

/// Spectral-calculus route to `f(U) − f(V)`, for comparison.
pub fn direct_difference(f: &CircleFunction, u: &UnitaryMatrix, v: &UnitaryMatrix) -> Result<ComplexMatrix> {
    let fu = matrix_function(&decompose_unitary(u, DEFAULT_GAP_TOL)?, f)?;
    let fv = matrix_function(&decompose_unitary(v, DEFAULT_GAP_TOL)?, f)?;
    Ok(fu - fv)
}

/// `trace ∬ Φ dE T dE = Σ_clusters Φ(λ, λ)·trace(T P_cluster)`.
pub fn doi_trace(phi: &KernelMatrix, d: &SpectralDecomposition, t: &ComplexMatrix) -> Result<C64> {
    if t.nrows() != d.dim() || t.ncols() != d.dim() {
        return Err(Error::Dimension(format!(
            "T is {}x{} but the spectral measure has dimension {}",
            t.nrows(),
            t.ncols(),
            d.dim()
        )));
    }
    check_grid(phi.left_points(), d, "left")?;
    check_grid(phi.right_points(), d, "right")?;
    let q = d.vectors();
    let mut total = c(0.0, 0.0);
    for cluster in d.clusters() {
        let i0 = cluster[0];
        let weight: C64 = cluster
            .iter()
            .map(|&i| {
                let col = q.column(i);
                (col.adjoint() * t * col)[(0, 0)]
            })
            .sum();
        total += phi.values()[(i0, i0)] * weight;
    }
    Ok(total)
}

/// Sum of singular values.
pub fn trace_norm(m: &ComplexMatrix) -> Result<f64> {
    if m.is_empty() {
        return Ok(0.0);
    }
    Ok(svd(m)?.singular_values.iter().sum())
}

/// Largest singular value.
pub fn operator_norm(m: &ComplexMatrix) -> Result<f64> {
    if m.is_empty() {
        return Ok(0.0);
    }
    Ok(svd(m)?.singular_values.first().copied().unwrap_or(0.0))
}

/// `trace(doi_compute(Φ, D, T, D))`, the full-integral route.
pub fn doi_trace_full(phi: &KernelMatrix, d: &SpectralDecomposition, t: &ComplexMatrix) -> Result<C64> {
    Ok(trace(&doi_compute(phi, d, t, d)?))
}
