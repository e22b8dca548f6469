//! Complex matrix foundation: validated unitary and Hermitian wrappers,
//! eigendecompositions with multiplicity clusters, spectral calculus,
//! the path `e^{isA} U`, and seeded random generators.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, Schur, SymmetricEigen};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Dense complex matrix. Entries are stored column-major by nalgebra; the
/// JSON format in [`crate::io`] uses row-major order.
pub type ComplexMatrix = DMatrix<C64>;

/// Default arc (or absolute, for Hermitian input) distance below which
/// eigenvalues share a cluster.
pub const DEFAULT_GAP_TOL: f64 = 1e-10;

const SCHUR_MAX_ITER: usize = 10_000;
const HERM_MAX_ITER: usize = 10_000;
/// Deflation thresholds tried in order; the strictest one can stall on
/// exactly repeated eigenvalues.
const CONVERGENCE_LADDER: [f64; 3] = [1e-15, 1e-14, 1e-13];

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn cis(theta: f64) -> C64 {
    C64::from_polar(1.0, theta)
}

pub fn frobenius(m: &ComplexMatrix) -> f64 {
    m.norm()
}

pub fn trace(m: &ComplexMatrix) -> C64 {
    m.diagonal().iter().sum()
}

/// Angle of `z` in `[0, 2π)`.
pub fn angle_0_2pi(z: C64) -> f64 {
    let t = z.im.atan2(z.re);
    if t < 0.0 {
        let w = t + TAU;
        if w >= TAU {
            0.0
        } else {
            w
        }
    } else {
        t
    }
}

/// Angle of `z` in `(-π, π]`.
pub fn angle_pm_pi(z: C64) -> f64 {
    let t = z.im.atan2(z.re);
    if t <= -PI {
        t + TAU
    } else {
        t
    }
}

/// Reduce an angle difference into `(-π, π]`.
pub fn wrap_pm_pi(x: f64) -> f64 {
    let mut y = x.rem_euclid(TAU);
    if y > PI {
        y -= TAU;
    }
    y
}

/// Arc distance between two angles, in `[0, π]`.
pub fn arc_distance(a: f64, b: f64) -> f64 {
    wrap_pm_pi(a - b).abs()
}

fn check_finite(m: &ComplexMatrix, kind: &'static str) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::Invariant {
            kind,
            detail: "matrix has non-finite entries".into(),
        })
    }
}

fn check_square(m: &ComplexMatrix, kind: &'static str) -> Result<()> {
    if m.nrows() == m.ncols() && m.nrows() > 0 {
        Ok(())
    } else {
        Err(Error::Invariant {
            kind,
            detail: format!("expected a non-empty square matrix, got {}x{}", m.nrows(), m.ncols()),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMatrix(ComplexMatrix);

impl UnitaryMatrix {
    /// Validates `‖U*U − I‖_F ≤ 1e−10·n`.
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        check_square(&m, "UnitaryMatrix")?;
        check_finite(&m, "UnitaryMatrix")?;
        let n = m.nrows();
        let defect = (m.adjoint() * &m - ComplexMatrix::identity(n, n)).norm();
        if defect > 1e-10 * n as f64 {
            return Err(Error::Invariant {
                kind: "UnitaryMatrix",
                detail: format!(
                    "‖U*U − I‖_F = {defect:.3e} exceeds 1e-10·n = {:.3e}",
                    1e-10 * n as f64
                ),
            });
        }
        Ok(Self(m))
    }

    pub fn identity(n: usize) -> Self {
        Self(ComplexMatrix::identity(n, n))
    }

    pub fn from_phases(thetas: &[f64]) -> Self {
        let d = thetas.iter().map(|&t| cis(t)).collect::<Vec<_>>();
        Self(ComplexMatrix::from_diagonal(&nalgebra::DVector::from_vec(d)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    /// `ζ·U` for unimodular `ζ`.
    pub fn rotated(&self, zeta: C64) -> Result<Self> {
        Self::new(self.0.map(|z| z * zeta))
    }

    pub fn mul(&self, other: &UnitaryMatrix) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.dim(),
                self.dim(),
                other.dim(),
                other.dim()
            )));
        }
        Self::new(&self.0 * &other.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix(ComplexMatrix);

impl HermitianMatrix {
    /// Validates `‖A − A*‖_F ≤ 1e−12·‖A‖_F + 1e−14`, then stores the exact
    /// Hermitian part.
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        check_square(&m, "HermitianMatrix")?;
        check_finite(&m, "HermitianMatrix")?;
        let skew = (&m - m.adjoint()).norm();
        let bound = 1e-12 * m.norm() + 1e-14;
        if skew > bound {
            return Err(Error::Invariant {
                kind: "HermitianMatrix",
                detail: format!("‖A − A*‖_F = {skew:.3e} exceeds {bound:.3e}"),
            });
        }
        let sym = (&m + m.adjoint()).map(|z| z * 0.5);
        Ok(Self(sym))
    }

    pub fn zeros(n: usize) -> Self {
        Self(ComplexMatrix::zeros(n, n))
    }

    pub fn from_real_diagonal(d: &[f64]) -> Self {
        let v = d.iter().map(|&x| c(x, 0.0)).collect::<Vec<_>>();
        Self(ComplexMatrix::from_diagonal(&nalgebra::DVector::from_vec(v)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self(self.0.map(|z| z * factor))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpectrumKind {
    Unitary,
    Hermitian,
}

/// Finite atomic spectral measure: eigenvalues, an orthonormal eigenvector
/// basis (columns), and clusters of numerically coincident eigenvalues.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    kind: SpectrumKind,
    values: Vec<C64>,
    vectors: ComplexMatrix,
    clusters: Vec<Vec<usize>>,
    cluster_of: Vec<usize>,
    representatives: Vec<C64>,
    gap_tol: f64,
}

impl SpectralDecomposition {
    pub fn kind(&self) -> SpectrumKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn vectors(&self) -> &ComplexMatrix {
        &self.vectors
    }

    pub fn clusters(&self) -> &[Vec<usize>] {
        &self.clusters
    }

    pub fn cluster_of(&self, index: usize) -> usize {
        self.cluster_of[index]
    }

    pub fn gap_tol(&self) -> f64 {
        self.gap_tol
    }

    /// Cluster representative for each cluster: circular mean for unitary
    /// spectra, arithmetic mean for Hermitian ones.
    pub fn cluster_representatives(&self) -> &[C64] {
        &self.representatives
    }

    /// The representative of the cluster containing each eigenvalue index.
    pub fn point_representatives(&self) -> Vec<C64> {
        self.cluster_of.iter().map(|&k| self.representatives[k]).collect()
    }

    /// Orthogonal projection onto the span of a cluster.
    pub fn projection(&self, cluster: usize) -> ComplexMatrix {
        let n = self.dim();
        let idx = &self.clusters[cluster];
        let mut q = ComplexMatrix::zeros(n, idx.len());
        for (c, &i) in idx.iter().enumerate() {
            q.set_column(c, &self.vectors.column(i));
        }
        &q * q.adjoint()
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.apply_diagonal(&self.values)
    }

    /// `Q diag(d) Q*`.
    pub fn apply_diagonal(&self, d: &[C64]) -> ComplexMatrix {
        let mut scaled = self.vectors.clone();
        for (j, &dj) in d.iter().enumerate() {
            scaled.column_mut(j).scale_mut_complex(dj);
        }
        scaled * self.vectors.adjoint()
    }

    /// `Q* M Q`: `M` expressed in the eigenbasis.
    pub fn to_eigenbasis(&self, m: &ComplexMatrix) -> ComplexMatrix {
        self.vectors.adjoint() * m * &self.vectors
    }
}

trait ScaleComplex {
    fn scale_mut_complex(&mut self, a: C64);
}

impl<S> ScaleComplex for nalgebra::Matrix<C64, nalgebra::Dyn, nalgebra::U1, S>
where
    S: nalgebra::StorageMut<C64, nalgebra::Dyn, nalgebra::U1>,
{
    fn scale_mut_complex(&mut self, a: C64) {
        for z in self.iter_mut() {
            *z *= a;
        }
    }
}

fn permute_columns(m: &ComplexMatrix, order: &[usize]) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(m.nrows(), order.len());
    for (new, &old) in order.iter().enumerate() {
        out.set_column(new, &m.column(old));
    }
    out
}

fn orthonormality_defect(q: &ComplexMatrix) -> f64 {
    let n = q.ncols();
    (q.adjoint() * q - ComplexMatrix::identity(n, n)).norm()
}

/// Single-linkage chains over sorted keys; `wrap` closes the chain across
/// the 0/2π seam for angles.
fn chain_clusters(keys: &[f64], gap_tol: f64, wrap: bool) -> Vec<Vec<usize>> {
    let n = keys.len();
    if n == 0 {
        return Vec::new();
    }
    let dist = |a: f64, b: f64| if wrap { arc_distance(a, b) } else { (a - b).abs() };
    let mut clusters: Vec<Vec<usize>> = vec![vec![0]];
    for i in 1..n {
        if dist(keys[i - 1], keys[i]) < gap_tol {
            clusters.last_mut().unwrap().push(i);
        } else {
            clusters.push(vec![i]);
        }
    }
    if wrap && clusters.len() > 1 && dist(keys[n - 1], keys[0]) < gap_tol {
        let last = clusters.pop().unwrap();
        let first = &mut clusters[0];
        let mut merged = last;
        merged.extend_from_slice(first);
        *first = merged;
    }
    clusters
}

fn finish(
    kind: SpectrumKind,
    values: Vec<C64>,
    vectors: ComplexMatrix,
    clusters: Vec<Vec<usize>>,
    gap_tol: f64,
) -> SpectralDecomposition {
    let n = values.len();
    let mut cluster_of = vec![0; n];
    let mut representatives = Vec::with_capacity(clusters.len());
    for (k, idx) in clusters.iter().enumerate() {
        for &i in idx {
            cluster_of[i] = k;
        }
        let rep = match kind {
            SpectrumKind::Unitary => {
                let s: C64 = idx.iter().map(|&i| values[i]).sum();
                if idx.len() == 1 {
                    values[idx[0]]
                } else {
                    s / s.norm()
                }
            }
            SpectrumKind::Hermitian => {
                let s: f64 = idx.iter().map(|&i| values[i].re).sum();
                c(s / idx.len() as f64, 0.0)
            }
        };
        representatives.push(rep);
    }
    SpectralDecomposition {
        kind,
        values,
        vectors,
        clusters,
        cluster_of,
        representatives,
        gap_tol,
    }
}

fn check_decomposition(d: &SpectralDecomposition, m: &ComplexMatrix) -> Result<()> {
    let n = d.dim();
    let scale = m.norm();
    let recon = (d.reconstruct() - m).norm();
    let ortho = orthonormality_defect(&d.vectors);
    if recon > 1e-9 * scale.max(f64::MIN_POSITIVE) && recon > 1e-14 {
        return Err(Error::Decomposition(format!(
            "reconstruction error {recon:.3e} exceeds 1e-9·‖M‖_F = {:.3e} (n = {n}, ‖M‖_F = {scale:.3e}, orthonormality defect {ortho:.3e})",
            1e-9 * scale
        )));
    }
    if ortho > 1e-10 * n as f64 {
        return Err(Error::Decomposition(format!(
            "eigenvector orthonormality defect {ortho:.3e} exceeds 1e-10·n (n = {n}, reconstruction error {recon:.3e})"
        )));
    }
    Ok(())
}

/// Eigendecomposition of a unitary matrix via the complex Schur form
/// (diagonal for normal input). Eigenvalues are sorted by angle in `[0, 2π)`.
pub fn decompose_unitary(u: &UnitaryMatrix, gap_tol: f64) -> Result<SpectralDecomposition> {
    if !(gap_tol > 0.0) {
        return Err(Error::InvalidArgument(format!("gap_tol must be positive, got {gap_tol}")));
    }
    let m = u.matrix();
    let n = m.nrows();
    let schur = CONVERGENCE_LADDER
        .iter()
        .find_map(|&eps| Schur::try_new(m.clone(), eps, SCHUR_MAX_ITER))
        .ok_or_else(|| {
        Error::Decomposition(format!(
            "Schur iteration did not converge within {SCHUR_MAX_ITER} sweeps at any deflation threshold (n = {n}, ‖U*U − I‖_F = {:.3e})",
            orthonormality_defect(m)
        ))
    })?;
    let (q, t) = schur.unpack();
    let mut raw: Vec<C64> = (0..n).map(|i| t[(i, i)]).collect();
    for (i, z) in raw.iter().enumerate() {
        if (z.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::Decomposition(format!(
                "eigenvalue {i} has modulus {} (off the unit circle by more than 1e-9)",
                z.norm()
            )));
        }
    }
    for z in raw.iter_mut() {
        *z /= z.norm();
    }
    let angles: Vec<f64> = raw.iter().map(|&z| angle_0_2pi(z)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| angles[a].total_cmp(&angles[b]));
    let values: Vec<C64> = order.iter().map(|&i| raw[i]).collect();
    let sorted_angles: Vec<f64> = order.iter().map(|&i| angles[i]).collect();
    let vectors = permute_columns(&q, &order);
    let clusters = chain_clusters(&sorted_angles, gap_tol, true);
    let d = finish(SpectrumKind::Unitary, values, vectors, clusters, gap_tol);
    check_decomposition(&d, m)?;
    Ok(d)
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
pub fn decompose_hermitian(a: &HermitianMatrix, gap_tol: f64) -> Result<SpectralDecomposition> {
    if !(gap_tol > 0.0) {
        return Err(Error::InvalidArgument(format!("gap_tol must be positive, got {gap_tol}")));
    }
    let m = a.matrix();
    let n = m.nrows();
    let eig = CONVERGENCE_LADDER
        .iter()
        .find_map(|&eps| SymmetricEigen::try_new(m.clone(), eps, HERM_MAX_ITER))
        .ok_or_else(|| {
        Error::Decomposition(format!(
            "Hermitian eigensolver did not converge within {HERM_MAX_ITER} iterations (n = {n}, ‖A‖_F = {:.3e})",
            m.norm()
        ))
    })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let keys: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let values = keys.iter().map(|&x| c(x, 0.0)).collect();
    let vectors = permute_columns(&eig.eigenvectors, &order);
    let clusters = chain_clusters(&keys, gap_tol, false);
    let d = finish(SpectrumKind::Hermitian, values, vectors, clusters, gap_tol);
    check_decomposition(&d, m)?;
    Ok(d)
}

/// A scalar function that can be applied through the spectral calculus.
pub trait ScalarFunction {
    fn apply(&self, z: C64) -> Result<C64>;
}

/// `Q diag(f(values)) Q*`.
pub fn matrix_function<F: ScalarFunction + ?Sized>(
    d: &SpectralDecomposition,
    f: &F,
) -> Result<ComplexMatrix> {
    let fv = d.values().iter().map(|&z| f.apply(z)).collect::<Result<Vec<_>>>()?;
    Ok(d.apply_diagonal(&fv))
}

/// The one-parameter family `s ↦ e^{isA} U`, with the generator's
/// eigendecomposition computed once.
#[derive(Clone, Debug)]
pub struct UnitaryPath {
    base: UnitaryMatrix,
    generator: HermitianMatrix,
    generator_spectrum: SpectralDecomposition,
}

impl UnitaryPath {
    pub fn new(u: &UnitaryMatrix, a: &HermitianMatrix) -> Result<Self> {
        if u.dim() != a.dim() {
            return Err(Error::Dimension(format!(
                "U is {0}x{0} but A is {1}x{1}",
                u.dim(),
                a.dim()
            )));
        }
        Ok(Self {
            base: u.clone(),
            generator: a.clone(),
            generator_spectrum: decompose_hermitian(a, DEFAULT_GAP_TOL)?,
        })
    }

    pub fn base(&self) -> &UnitaryMatrix {
        &self.base
    }

    pub fn generator(&self) -> &HermitianMatrix {
        &self.generator
    }

    /// `e^{isA}`.
    pub fn exp_generator(&self, s: f64) -> ComplexMatrix {
        let d: Vec<C64> = self
            .generator_spectrum
            .values()
            .iter()
            .map(|x| cis(s * x.re))
            .collect();
        self.generator_spectrum.apply_diagonal(&d)
    }

    pub fn at(&self, s: f64) -> Result<UnitaryMatrix> {
        UnitaryMatrix::new(self.exp_generator(s) * self.base.matrix())
    }
}

/// `V_s = e^{isA} U`.
pub fn path_point(u: &UnitaryMatrix, a: &HermitianMatrix, s: f64) -> Result<UnitaryMatrix> {
    UnitaryPath::new(u, a)?.at(s)
}

/// Singular value decomposition `M = U diag(σ) V*` with `σ` descending.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub singular_values: Vec<f64>,
    pub v: ComplexMatrix,
}

const SVD_MAX_ITER: usize = 2_000;

/// SVD with a bounded iteration count at each deflation threshold; if the
/// bidiagonal iteration never settles, falls back to the eigenvectors of
/// `M*M`, which loses accuracy only in singular values below `√ε‖M‖`.
pub fn svd(m: &ComplexMatrix) -> Result<Svd> {
    let (r, k) = m.shape();
    let direct = [1e-15, 1e-14, 1e-13, 1e-12, 1e-11]
        .iter()
        .find_map(|&eps| m.clone().try_svd(true, true, eps, SVD_MAX_ITER));
    if let Some(svd) = direct {
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
        let u = svd.u.unwrap();
        let v = svd.v_t.unwrap().adjoint();
        return Ok(Svd {
            u: ComplexMatrix::from_fn(r, order.len(), |i, j| u[(i, order[j])]),
            singular_values: order.iter().map(|&j| svd.singular_values[j]).collect(),
            v: ComplexMatrix::from_fn(k, order.len(), |i, j| v[(i, order[j])]),
        });
    }
    let g = m.adjoint() * m;
    let gram = HermitianMatrix::new((&g + g.adjoint()).map(|z| z * 0.5))?;
    let eig = decompose_hermitian(&gram, DEFAULT_GAP_TOL)?;
    let p = r.min(k);
    let mut sv: Vec<f64> = Vec::with_capacity(p);
    let mut v = ComplexMatrix::zeros(k, p);
    let mut u = ComplexMatrix::zeros(r, p);
    let floor = 1e-12 * eig.values().iter().map(|z| z.re).fold(0.0, f64::max).sqrt();
    let mut filled = 0;
    for idx in (0..k).rev().take(p) {
        let s = eig.values()[idx].re.max(0.0).sqrt();
        let col = eig.vectors().column(idx).into_owned();
        v.set_column(sv.len(), &col);
        if s > floor {
            u.set_column(sv.len(), &((m * &col) / c(s, 0.0)));
            filled += 1;
        }
        sv.push(s);
    }
    // Complete U with an orthonormal basis of the remaining directions.
    let mut col = filled;
    let mut e = 0;
    while col < p && e < r {
        let mut x = nalgebra::DVector::from_fn(r, |i, _| if i == e { c(1.0, 0.0) } else { c(0.0, 0.0) });
        for j in 0..col {
            let uj = u.column(j);
            let proj = uj.dotc(&x);
            x -= uj * proj;
        }
        let nx = x.norm();
        if nx > 1e-8 {
            u.set_column(col, &(x / c(nx, 0.0)));
            col += 1;
        }
        e += 1;
    }
    Ok(Svd { u, singular_values: sv, v })
}

/// Hermitian `A` with spectrum in `(−π, π]` such that `V = e^{iA} U`
/// (principal logarithm of `V U*`).
pub fn generator_between(u: &UnitaryMatrix, v: &UnitaryMatrix) -> Result<HermitianMatrix> {
    if u.dim() != v.dim() {
        return Err(Error::Dimension(format!("U is {0}x{0} but V is {1}x{1}", u.dim(), v.dim())));
    }
    let w = UnitaryMatrix::new(v.matrix() * u.matrix().adjoint())?;
    let d = decompose_unitary(&w, DEFAULT_GAP_TOL)?;
    let logs: Vec<C64> = d.values().iter().map(|&z| c(angle_pm_pi(z), 0.0)).collect();
    HermitianMatrix::new(d.apply_diagonal(&logs))
}

fn gaussian_matrix(n: usize, m: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_fn(n, m, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        c(re * scale, im * scale)
    })
}

fn haar_from_rng(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let z = gaussian_matrix(n, n, rng);
    let qr = z.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { c(1.0, 0.0) };
        q.column_mut(j).scale_mut_complex(phase);
    }
    q
}

/// Haar-distributed unitary: QR of a complex Ginibre matrix with the
/// diagonal of `R` rotated to the positive real axis.
pub fn random_haar_unitary(n: usize, seed: u64) -> Result<UnitaryMatrix> {
    if n == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    UnitaryMatrix::new(haar_from_rng(n, &mut rng))
}

/// `A = Σ_{i<rank} a_i v_i v_i*` with Haar-random orthonormal `v_i` and
/// `0.1·norm_bound ≤ |a_i| ≤ norm_bound`, random signs.
pub fn random_hermitian(n: usize, rank: usize, norm_bound: f64, seed: u64) -> Result<HermitianMatrix> {
    if rank == 0 || rank > n {
        return Err(Error::InvalidArgument(format!("rank must satisfy 1 ≤ rank ≤ n = {n}, got {rank}")));
    }
    if !(norm_bound > 0.0) || !norm_bound.is_finite() {
        return Err(Error::InvalidArgument(format!("norm_bound must be positive, got {norm_bound}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let basis = haar_from_rng(n, &mut rng);
    let mag = Uniform::new_inclusive(0.1 * norm_bound, norm_bound)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let mut a = ComplexMatrix::zeros(n, n);
    for i in 0..rank {
        let sign = if rand::Rng::random::<bool>(&mut rng) { 1.0 } else { -1.0 };
        let ai = sign * mag.sample(&mut rng);
        let v = basis.column(i);
        a += (&v * v.adjoint()).map(|z| z * ai);
    }
    HermitianMatrix::new(a)
}

/// A random pair `(U, A)`: Haar `U` and a rank-`rank` generator `A`.
pub fn random_instance(
    n: usize,
    rank: usize,
    norm_bound: f64,
    seed: u64,
) -> Result<(UnitaryMatrix, HermitianMatrix)> {
    let u = random_haar_unitary(n, seed)?;
    let a = random_hermitian(n, rank, norm_bound, seed.wrapping_add(0x5151))?;
    Ok((u, a))
}

/// A random matrix with i.i.d. standard complex Gaussian entries.
pub fn random_complex(n: usize, m: usize, seed: u64) -> ComplexMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    gaussian_matrix(n, m, &mut rng)
}
