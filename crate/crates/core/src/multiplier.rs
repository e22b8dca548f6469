//! Schur-multiplier norms of finite kernels.
//!
//! `‖Φ‖_𝔐 ≤ c` iff some completion `[[R, Φ], [Φ*, S]] ⪰ 0` has
//! `diag R ≤ c` and `diag S ≤ c`. Upper bounds come from approximately
//! feasible completions found by alternating projections: if `Z` has the
//! exact off-diagonal block `Φ` and `λ_min(Z) = −δ`, then `Z + δI` is a
//! genuine certificate. Lower bounds come from test matrices `T` through
//! `‖Φ ∘ T‖ / ‖T‖`, improved by a monotone ascent.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::circlefn::CircleFunction;
use crate::doi::{operator_norm, KernelMatrix};
use crate::error::{Error, Result};
use crate::spectra::{c, cis, svd, ComplexMatrix, C64};

/// Rows `a_i` and `b_j` with `Φ(i, j) = Σ_n a_i(n) b_j(n)` (no conjugation).
#[derive(Clone, Debug)]
pub struct Factorization {
    pub left: ComplexMatrix,
    pub right: ComplexMatrix,
}

impl Factorization {
    pub fn reconstruct(&self) -> ComplexMatrix {
        &self.left * self.right.transpose()
    }

    pub fn max_left_norm(&self) -> f64 {
        max_row_norm(&self.left)
    }

    pub fn max_right_norm(&self) -> f64 {
        max_row_norm(&self.right)
    }

    /// `max_i ‖a_i‖ · max_j ‖b_j‖`, an upper bound on the multiplier norm.
    pub fn bound(&self) -> f64 {
        self.max_left_norm() * self.max_right_norm()
    }

    /// Extracts a factorization from a Hermitian completion `Z` whose
    /// off-diagonal block is the kernel, after shifting by `shift·I`.
    pub fn from_completion(z: &ComplexMatrix, rows: usize, shift: f64) -> Result<Self> {
        let big = z.nrows();
        if big != z.ncols() || rows > big {
            return Err(Error::Dimension("completion must be square and contain the kernel".into()));
        }
        let mut shifted = z.clone();
        for i in 0..big {
            shifted[(i, i)] += c(shift, 0.0);
        }
        let eig = hermitian_eigen(&shifted)?;
        let mut w = eig.eigenvectors.clone();
        for (k, &lam) in eig.eigenvalues.iter().enumerate() {
            let s = lam.max(0.0).sqrt();
            for x in w.column_mut(k).iter_mut() {
                *x *= s;
            }
        }
        let left = w.rows(0, rows).into_owned();
        let right = w.rows(rows, big - rows).map(|z| z.conj());
        Ok(Self { left, right })
    }

    /// The same kernel written in a rotated basis: `a ↦ aX`, `b ↦ b X̄`
    /// for unitary `X`.
    pub fn rotate(&self, x: &ComplexMatrix) -> Self {
        Self {
            left: &self.left * x,
            right: &self.right * x.map(|z| z.conj()),
        }
    }
}

fn max_row_norm(m: &ComplexMatrix) -> f64 {
    m.row_iter().map(|r| r.norm()).fold(0.0, f64::max)
}

fn hermitian_eigen(m: &ComplexMatrix) -> Result<SymmetricEigen<C64, nalgebra::Dyn>> {
    [1e-15, 1e-14, 1e-13]
        .iter()
        .find_map(|&eps| SymmetricEigen::try_new(m.clone(), eps, 10_000))
        .ok_or_else(|| Error::Decomposition(format!("Hermitian eigensolver failed on a {0}x{0} completion", m.nrows())))
}

/// Residuals of the best completion found.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Certificate {
    /// Smallest eigenvalue of the completion before the diagonal shift.
    pub min_eigenvalue: f64,
    /// `max(diag) − c` at the accepted level (≤ 0 when the box holds).
    pub max_diagonal_excess: f64,
    /// Alternating-projection sweeps over all probes.
    pub iterations: usize,
    /// Feasibility probes attempted during bisection.
    pub probes: usize,
}

#[derive(Clone, Debug)]
pub struct SchurNormResult {
    /// Certified upper bound; equals the norm within `tol` unless `bounds_only`.
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub factorization: Option<Factorization>,
    pub certificate: Certificate,
    /// Set when the bracket could not be closed to the requested tolerance.
    pub bounds_only: bool,
    /// The test matrix achieving `lower`.
    pub witness: ComplexMatrix,
}

#[derive(Clone, Debug)]
pub struct SchurNormOptions {
    pub tol: f64,
    pub max_iter_per_probe: usize,
    pub max_probes: usize,
    pub ascent_starts: usize,
    pub ascent_iters: usize,
    pub seed: u64,
}

impl Default for SchurNormOptions {
    fn default() -> Self {
        Self {
            tol: 1e-4,
            max_iter_per_probe: 10_000,
            max_probes: 60,
            ascent_starts: 4,
            ascent_iters: 200,
            seed: 0x5eed,
        }
    }
}

/// `‖Φ ∘ T‖ / ‖T‖` in operator norm.
pub fn probe_ratio(phi: &ComplexMatrix, t: &ComplexMatrix) -> Result<f64> {
    let denom = operator_norm(t)?;
    if denom == 0.0 {
        return Ok(0.0);
    }
    Ok(operator_norm(&phi.component_mul(t))? / denom)
}

/// Top singular triple of `m` by power iteration on `m*m`, warm-started
/// from `v0`. Returns `(|u*mv|, u, v)`; the value is a certified lower
/// bound on `‖m‖`.
fn top_singular_pair(m: &ComplexMatrix, v0: Option<&DVector<C64>>) -> (f64, DVector<C64>, DVector<C64>) {
    let n2 = m.ncols();
    let mut v = match v0 {
        Some(v) if v.norm() > 0.0 => v.clone(),
        _ => DVector::from_fn(n2, |j, _| c(1.0, 0.1 * j as f64)),
    };
    v /= c(v.norm(), 0.0);
    let mh = m.adjoint();
    let mut sigma = 0.0;
    let mut u = m * &v;
    for _ in 0..500 {
        u = m * &v;
        let s = u.norm();
        if s == 0.0 {
            break;
        }
        u /= c(s, 0.0);
        let w = &mh * &u;
        let t = w.norm();
        v = w / c(t, 0.0);
        let converged = (t - sigma).abs() <= 1e-12 * t;
        sigma = t;
        if converged {
            break;
        }
    }
    let mv = m * &v;
    let s = mv.norm();
    if s > 0.0 {
        u = mv / c(s, 0.0);
    }
    (s, u, v)
}

/// Contraction `T` maximizing `Re tr(T X)` over `‖T‖ ≤ 1`; the maximum is
/// the trace norm of `X`.
fn maximizing_contraction(x: &ComplexMatrix) -> Result<(f64, ComplexMatrix)> {
    let d = svd(x)?;
    Ok((d.singular_values.iter().sum(), d.v * d.u.adjoint()))
}

/// Alternating ascent on `u*(Φ∘T)v`: the top singular pair of `Φ∘T`
/// fixes `(u, v)`, then `T` is replaced by the contraction maximizing the
/// bilinear form. The objective never decreases; the returned ratio is
/// recomputed exactly for the final test matrix.
pub fn ascend_lower_bound(phi: &ComplexMatrix, start: &ComplexMatrix, iters: usize) -> Result<(f64, ComplexMatrix)> {
    let scale = operator_norm(start)?;
    if scale == 0.0 {
        return Ok((0.0, start.clone()));
    }
    let mut t = start.map(|z| z / scale);
    let (mut value, mut u, mut v) = top_singular_pair(&phi.component_mul(&t), None);
    for _ in 0..iters {
        let g = ComplexMatrix::from_fn(phi.nrows(), phi.ncols(), |i, j| u[i].conj() * phi[(i, j)] * v[j]);
        let (next, t_next) = maximizing_contraction(&g.transpose())?;
        if next <= value * (1.0 + 1e-9) {
            if next > value {
                t = t_next;
            }
            break;
        }
        t = t_next;
        let (s, uu, vv) = top_singular_pair(&phi.component_mul(&t), Some(&v));
        value = s.max(next);
        u = uu;
        v = vv;
    }
    Ok((probe_ratio(phi, &t)?, t))
}

fn ascent_starts(phi: &ComplexMatrix, starts: usize, seed: u64) -> Vec<ComplexMatrix> {
    let (n1, n2) = phi.shape();
    let mut out = vec![
        ComplexMatrix::identity(n1, n2),
        ComplexMatrix::from_element(n1, n2, c(1.0, 0.0)),
    ];
    // Conjugate phases of Φ: Φ∘T becomes |Φ|.
    out.push(phi.map(|z| if z.norm() > 0.0 { z.conj() / z.norm() } else { c(0.0, 0.0) }));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..starts {
        out.push(ComplexMatrix::from_fn(n1, n2, |_, _| {
            let a: f64 = StandardNormal.sample(&mut rng);
            let b: f64 = StandardNormal.sample(&mut rng);
            c(a, b)
        }));
    }
    out
}

/// Best certified lower bound from the built-in starts plus ascent.
pub fn lower_bound(phi: &ComplexMatrix, opts: &SchurNormOptions) -> Result<(f64, ComplexMatrix)> {
    let (n1, n2) = phi.shape();
    let (mut best, mut best_t) = {
        let (mut bi, mut bj, mut bv) = (0, 0, 0.0);
        for i in 0..n1 {
            for j in 0..n2 {
                if phi[(i, j)].norm() > bv {
                    (bi, bj, bv) = (i, j, phi[(i, j)].norm());
                }
            }
        }
        let mut e = ComplexMatrix::zeros(n1, n2);
        e[(bi, bj)] = c(1.0, 0.0);
        (bv, e)
    };
    // Short ascents screen the starts; only the best one is run to the end.
    let screen = opts.ascent_iters.min(10);
    for start in ascent_starts(phi, opts.ascent_starts, opts.seed) {
        let (r, t) = ascend_lower_bound(phi, &start, screen)?;
        if r > best {
            best = r;
            best_t = t;
        }
    }
    if opts.ascent_iters > screen {
        let (r, t) = ascend_lower_bound(phi, &best_t, opts.ascent_iters - screen)?;
        if r > best {
            best = r;
            best_t = t;
        }
    }
    Ok((best, best_t))
}

/// The polar completion `[[|Φ*|, Φ], [Φ*, |Φ|]]`, always PSD; its diagonal
/// is bounded by `‖Φ‖`.
fn polar_completion(phi: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (n1, n2) = phi.shape();
    let d = svd(phi)?;
    let (u, v, s) = (d.u, d.v, d.singular_values);
    let r = ComplexMatrix::from_fn(n1, n1, |i, j| {
        (0..s.len()).map(|k| u[(i, k)] * s[k] * u[(j, k)].conj()).sum()
    });
    let sm = ComplexMatrix::from_fn(n2, n2, |i, j| {
        (0..s.len()).map(|k| v[(i, k)] * s[k] * v[(j, k)].conj()).sum()
    });
    Ok(assemble(&r, phi, &sm))
}

fn assemble(r: &ComplexMatrix, phi: &ComplexMatrix, s: &ComplexMatrix) -> ComplexMatrix {
    let (n1, n2) = phi.shape();
    let mut z = ComplexMatrix::zeros(n1 + n2, n1 + n2);
    z.view_mut((0, 0), (n1, n1)).copy_from(r);
    z.view_mut((0, n1), (n1, n2)).copy_from(phi);
    z.view_mut((n1, 0), (n2, n1)).copy_from(&phi.adjoint());
    z.view_mut((n1, n1), (n2, n2)).copy_from(s);
    z
}

/// Projection onto `{Z : Z₁₂ = Φ, diag Z ≤ level}` (Hermitian `Z`).
fn project_affine_box(z: &mut ComplexMatrix, phi: &ComplexMatrix, level: f64) {
    let (n1, n2) = phi.shape();
    z.view_mut((0, n1), (n1, n2)).copy_from(phi);
    z.view_mut((n1, 0), (n2, n1)).copy_from(&phi.adjoint());
    for i in 0..n1 + n2 {
        let d = z[(i, i)].re.min(level);
        z[(i, i)] = c(d, 0.0);
    }
}

fn project_psd(eig: &SymmetricEigen<C64, nalgebra::Dyn>) -> ComplexMatrix {
    let mut w = eig.eigenvectors.clone();
    for (k, &lam) in eig.eigenvalues.iter().enumerate() {
        let s = lam.max(0.0);
        for x in w.column_mut(k).iter_mut() {
            *x *= s;
        }
    }
    let p = w * eig.eigenvectors.adjoint();
    (&p + p.adjoint()).map(|z| z * 0.5)
}

/// Block-diagonal maxima `(max diag R, max diag S)`.
fn diag_maxima(z: &ComplexMatrix, n1: usize) -> (f64, f64) {
    let n = z.nrows();
    let r = (0..n1).map(|i| z[(i, i)].re).fold(f64::NEG_INFINITY, f64::max);
    let s = (n1..n).map(|i| z[(i, i)].re).fold(f64::NEG_INFINITY, f64::max);
    (r, s)
}

struct ProbeOutcome {
    bound: f64,
    completion: ComplexMatrix,
    shift: f64,
    min_eig: f64,
    iterations: usize,
}

/// Alternating projections at a fixed level. Returns the certified bound of
/// the best completion seen, and whether it reached `target`.
fn feasibility_probe(
    phi: &ComplexMatrix,
    level: f64,
    target: f64,
    start: &ComplexMatrix,
    max_iter: usize,
) -> Result<(bool, ProbeOutcome)> {
    let n1 = phi.nrows();
    let mut z = start.clone();
    project_affine_box(&mut z, phi, level);
    let mut best: Option<ProbeOutcome> = None;
    let mut last_checkpoint = f64::INFINITY;
    for it in 1..=max_iter {
        let eig = hermitian_eigen(&z)?;
        let min_eig = eig.eigenvalues.min();
        let shift = (-min_eig).max(0.0);
        let (dr, ds) = diag_maxima(&z, n1);
        let bound = ((dr + shift).max(0.0) * (ds + shift).max(0.0)).sqrt();
        if best.as_ref().is_none_or(|b| bound < b.bound) {
            best = Some(ProbeOutcome {
                bound,
                completion: z.clone(),
                shift,
                min_eig,
                iterations: it,
            });
        }
        if bound <= target {
            let mut out = best.unwrap();
            out.iterations = it;
            return Ok((true, out));
        }
        if it % 100 == 0 {
            // Stalled at a positive distance: the level is (numerically) infeasible.
            if shift > 0.995 * last_checkpoint {
                let mut out = best.unwrap();
                out.iterations = it;
                return Ok((false, out));
            }
            last_checkpoint = shift;
        }
        z = project_psd(&eig);
        project_affine_box(&mut z, phi, level);
    }
    let mut out = best.unwrap();
    out.iterations = max_iter;
    Ok((false, out))
}

/// Multiplier norm with default options and the given relative tolerance.
pub fn schur_norm(phi: &KernelMatrix, tol: f64) -> Result<SchurNormResult> {
    schur_norm_with(phi, &SchurNormOptions { tol, ..Default::default() })
}

pub fn schur_norm_with(phi: &KernelMatrix, opts: &SchurNormOptions) -> Result<SchurNormResult> {
    if !(opts.tol > 1e-8 && opts.tol < 1e-2) {
        return Err(Error::InvalidArgument(format!("tol must lie in (1e-8, 1e-2), got {}", opts.tol)));
    }
    let m = phi.values();
    let n1 = m.nrows();
    let (lower, witness) = lower_bound(m, opts)?;
    let mut certificate = Certificate::default();
    if lower == 0.0 {
        let zero = Factorization {
            left: ComplexMatrix::zeros(n1, 1),
            right: ComplexMatrix::zeros(m.ncols(), 1),
        };
        return Ok(SchurNormResult {
            value: 0.0,
            lower: 0.0,
            upper: 0.0,
            factorization: Some(zero),
            certificate,
            bounds_only: false,
            witness,
        });
    }

    let mut completion = polar_completion(m)?;
    let eig = hermitian_eigen(&completion)?;
    let mut shift = (-eig.eigenvalues.min()).max(0.0);
    let (dr, ds) = diag_maxima(&completion, n1);
    let mut upper = ((dr + shift) * (ds + shift)).sqrt();
    certificate.min_eigenvalue = eig.eigenvalues.min();
    certificate.max_diagonal_excess = dr.max(ds) - upper;

    // Lower bounds from the ascent are usually tight, so the first probe
    // sits just above them and the level only climbs on failure; plain
    // bisection takes over once some level has succeeded.
    let mut search_lo = lower;
    let mut warm = completion.clone();
    let mut step = 0.5 * opts.tol;
    let mut bracketed = false;
    while upper - search_lo > 0.5 * opts.tol * upper && certificate.probes < opts.max_probes {
        let level = if bracketed {
            0.5 * (search_lo + upper)
        } else {
            (search_lo * (1.0 + step)).min(0.5 * (search_lo + upper))
        };
        let target = level * (1.0 + 0.25 * opts.tol);
        let (ok, out) = feasibility_probe(m, level, target, &warm, opts.max_iter_per_probe)?;
        certificate.probes += 1;
        certificate.iterations += out.iterations;
        if out.bound < upper {
            upper = out.bound;
            completion = out.completion.clone();
            shift = out.shift;
            certificate.min_eigenvalue = out.min_eig;
            let (dr, ds) = diag_maxima(&completion, n1);
            certificate.max_diagonal_excess = dr.max(ds) - level;
        }
        if ok {
            bracketed = true;
            warm = out.completion;
        } else {
            search_lo = level;
            step *= 4.0;
        }
    }

    let factorization = Factorization::from_completion(&completion, n1, shift)?;
    // The factorization's own row bound is what certifies the value.
    let value = factorization.bound().max(lower);
    let bounds_only = value - lower > opts.tol * value;
    Ok(SchurNormResult {
        value,
        lower,
        upper: value,
        factorization: Some(factorization),
        certificate,
        bounds_only,
        witness,
    })
}

/// Bracket without bisection: the ascent lower bound and the certificate
/// from the polar completion. Cheap enough for grids of a few hundred
/// points, where alternating projections are not.
pub fn multiplier_bounds(phi: &KernelMatrix, opts: &SchurNormOptions) -> Result<SchurNormResult> {
    let m = phi.values();
    let (lower, witness) = lower_bound(m, opts)?;
    let z = polar_completion(m)?;
    let min_eig = hermitian_eigen(&z)?.eigenvalues.min();
    let factorization = Factorization::from_completion(&z, m.nrows(), (-min_eig).max(0.0))?;
    let value = factorization.bound().max(lower);
    let (dr, ds) = diag_maxima(&z, m.nrows());
    Ok(SchurNormResult {
        value,
        lower,
        upper: value,
        factorization: Some(factorization),
        certificate: Certificate {
            min_eigenvalue: min_eig,
            max_diagonal_excess: dr.max(ds) - value,
            iterations: 0,
            probes: 0,
        },
        bounds_only: value - lower > opts.tol * value,
        witness,
    })
}

/// `(Дf)(ζ_i, ζ_j)` on an explicit grid.
pub fn divided_difference_kernel(f: &CircleFunction, points: &[C64]) -> Result<KernelMatrix> {
    KernelMatrix::from_fn(points.to_vec(), points.to_vec(), |z, w| f.divided_difference(z, w))
}

/// `n` equispaced points rotated by half a step, `e^{2πi(k+½)/n}`.
pub fn half_step_grid(n: usize) -> Vec<C64> {
    (0..n)
        .map(|k| cis(std::f64::consts::TAU * (k as f64 + 0.5) / n as f64))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct OlBound {
    pub n: usize,
    /// Running maximum of the certified lower bounds up to this grid.
    pub lower: f64,
    /// Lower bound on this grid alone.
    pub grid_lower: f64,
}

/// Certified lower bounds on `‖f‖_OL` from divided-difference kernels on
/// half-step-rotated equispaced grids.
pub fn ol_lower_bound(f: &CircleFunction, grid_sizes: &[usize]) -> Result<Vec<OlBound>> {
    ol_lower_bound_with(f, grid_sizes, &SchurNormOptions::default())
}

pub fn ol_lower_bound_with(f: &CircleFunction, grid_sizes: &[usize], opts: &SchurNormOptions) -> Result<Vec<OlBound>> {
    let mut running: f64 = 0.0;
    let mut out = Vec::with_capacity(grid_sizes.len());
    for &n in grid_sizes {
        if n < 2 {
            return Err(Error::InvalidArgument(format!("grid size must be at least 2, got {n}")));
        }
        let k = divided_difference_kernel(f, &half_step_grid(n))?;
        let (lb, _) = lower_bound(k.values(), opts)?;
        running = running.max(lb);
        out.push(OlBound {
            n,
            lower: running,
            grid_lower: lb,
        });
    }
    Ok(out)
}

/// `(𝒯Φ)(x_i) = Σ_n a_i(n) b_i(n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalTrace {
    pub points: Vec<C64>,
    pub values: Vec<C64>,
}

pub fn diagonal_trace(result: &SchurNormResult, points: &[C64]) -> Result<DiagonalTrace> {
    let fact = result
        .factorization
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("result carries no factorization".into()))?;
    diagonal_trace_of(fact, points)
}

pub fn diagonal_trace_of(fact: &Factorization, points: &[C64]) -> Result<DiagonalTrace> {
    let n = points.len();
    if fact.left.nrows() != n || fact.right.nrows() != n {
        return Err(Error::Dimension(format!(
            "factorization has {} and {} rows but {n} points were given",
            fact.left.nrows(),
            fact.right.nrows()
        )));
    }
    let values = (0..n)
        .map(|i| fact.left.row(i).iter().zip(fact.right.row(i).iter()).map(|(a, b)| a * b).sum())
        .collect();
    Ok(DiagonalTrace {
        points: points.to_vec(),
        values,
    })
}

/// Factorization from the polar completion, independent of the bisection.
pub fn polar_factorization(phi: &ComplexMatrix) -> Result<Factorization> {
    let z = polar_completion(phi)?;
    let eig = hermitian_eigen(&z)?;
    Factorization::from_completion(&z, phi.nrows(), (-eig.eigenvalues.min()).max(0.0))
}

/// Kernel `e^{iα_i} e^{iβ_j}`.
pub fn unimodular_rank_one(alpha: &[f64], beta: &[f64]) -> ComplexMatrix {
    DMatrix::from_fn(alpha.len(), beta.len(), |i, j| cis(alpha[i] + beta[j]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::random_complex;

    fn kernel(values: ComplexMatrix) -> KernelMatrix {
        let n1 = values.nrows();
        let n2 = values.ncols();
        KernelMatrix::new(vec![c(1.0, 0.0); n1], vec![c(1.0, 0.0); n2], values).unwrap()
    }

    fn real(rows: usize, cols: usize, v: &[f64]) -> ComplexMatrix {
        ComplexMatrix::from_row_slice(rows, cols, &v.iter().map(|&x| c(x, 0.0)).collect::<Vec<_>>())
    }

    #[test]
    fn all_ones_kernel_has_norm_one() {
        let r = schur_norm(&kernel(real(4, 4, &[1.0; 16])), 1e-6).unwrap();
        assert!((r.value - 1.0).abs() <= 1e-6, "{r:?}");
        assert!(!r.bounds_only);
    }

    #[test]
    fn rank_one_kernel() {
        let r = schur_norm(&kernel(real(2, 2, &[2.0; 4])), 1e-6).unwrap();
        assert!((r.value - 2.0).abs() <= 2e-6, "{r:?}");
    }

    #[test]
    fn hadamard_kernel_bracket() {
        // Brute-force oracle: fine grid over the real 2x2 test matrices with
        // ‖T‖ = 1 gives sup ‖Φ∘T‖ ≈ √2 for [[1,1],[1,-1]].
        let phi = real(2, 2, &[1.0, 1.0, 1.0, -1.0]);
        let mut brute: f64 = 0.0;
        let steps = 60;
        for a in 0..=steps {
            for b in 0..=steps {
                for cc in 0..=steps {
                    let t = real(2, 2, &[
                        -1.0 + 2.0 * a as f64 / steps as f64,
                        -1.0 + 2.0 * b as f64 / steps as f64,
                        -1.0 + 2.0 * cc as f64 / steps as f64,
                        1.0,
                    ]);
                    brute = brute.max(probe_ratio(&phi, &t).unwrap());
                }
            }
        }
        let r = schur_norm(&kernel(phi.clone()), 1e-6).unwrap();
        assert!((1.0..=2.0).contains(&r.value));
        assert!((r.value - brute).abs() <= 1e-3, "value {} brute {brute}", r.value);
        assert!((r.value - 2f64.sqrt()).abs() <= 1e-5);
    }

    #[test]
    fn factorization_certifies_value() {
        let phi = random_complex(5, 4, 11);
        let r = schur_norm(&kernel(phi.clone()), 1e-5).unwrap();
        let f = r.factorization.as_ref().unwrap();
        assert!(f.bound() <= r.value * (1.0 + 1e-6));
        assert!((f.reconstruct() - &phi).iter().map(|z| z.norm()).fold(0.0, f64::max) <= 1e-6 * r.value);
        assert!(r.lower <= r.value);
    }

    #[test]
    fn probes_never_exceed_upper_bound() {
        let phi = random_complex(6, 6, 5);
        let r = schur_norm(&kernel(phi.clone()), 1e-4).unwrap();
        for s in 0..100 {
            let t = random_complex(6, 6, 1000 + s);
            assert!(probe_ratio(&phi, &t).unwrap() <= r.value * (1.0 + 1e-9));
        }
    }

    #[test]
    fn unimodular_rank_one_has_norm_one() {
        let phi = unimodular_rank_one(&[0.1, 1.3, -2.0], &[0.7, 2.2, 3.0, -0.4]);
        let r = schur_norm(&kernel(phi), 1e-6).unwrap();
        assert!((r.value - 1.0).abs() <= 1e-6, "{}", r.value);
    }

    #[test]
    fn tolerance_range_is_enforced() {
        let k = kernel(real(1, 1, &[1.0]));
        assert!(schur_norm(&k, 1e-9).is_err());
        assert!(schur_norm(&k, 0.1).is_err());
    }

    #[test]
    fn zero_kernel() {
        let r = schur_norm(&kernel(ComplexMatrix::zeros(3, 3)), 1e-4).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn divided_difference_kernel_examples() {
        let pts = half_step_grid(5);
        let k = divided_difference_kernel(&CircleFunction::monomial(1), &pts).unwrap();
        assert!(k.values().iter().all(|z| (z - c(1.0, 0.0)).norm() < 1e-15));
        let k = divided_difference_kernel(&CircleFunction::monomial(2), &[c(1.0, 0.0), c(0.0, 1.0)]).unwrap();
        let want = ComplexMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(1.0, 1.0), c(1.0, 1.0), c(0.0, 2.0)]);
        assert!((k.values() - want).norm() < 1e-15);
    }

    #[test]
    fn abs_theta_kernel_is_finite_and_at_least_one() {
        let pts = half_step_grid(16);
        let k = divided_difference_kernel(&CircleFunction::abs_theta(), &pts).unwrap();
        // Identity probe picks out the diagonal f'(ζ), of modulus one.
        let r = probe_ratio(k.values(), &ComplexMatrix::identity(16, 16)).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
        let (lb, _) = lower_bound(k.values(), &SchurNormOptions::default()).unwrap();
        assert!(lb >= 1.0);
    }

    #[test]
    fn ol_bounds_for_monomials() {
        let b = ol_lower_bound(&CircleFunction::monomial(1), &[2, 4, 8]).unwrap();
        assert!(b.iter().all(|x| (x.lower - 1.0).abs() < 1e-10));
        let b = ol_lower_bound(&CircleFunction::monomial(3), &[8]).unwrap();
        assert!(b[0].lower >= 1.0 && b[0].lower <= 3.0 + 1e-9, "{b:?}");
        assert!(ol_lower_bound(&CircleFunction::monomial(1), &[1]).is_err());
    }

    #[test]
    fn diagonal_trace_examples() {
        let ones = kernel(real(3, 3, &[1.0; 9]));
        let r = schur_norm(&ones, 1e-4).unwrap();
        let d = diagonal_trace(&r, &[c(1.0, 0.0); 3]).unwrap();
        assert!(d.values.iter().all(|z| (z - c(1.0, 0.0)).norm() < 1e-8));

        let pts = [c(1.0, 0.0), c(0.0, 1.0)];
        let k = divided_difference_kernel(&CircleFunction::monomial(2), &pts).unwrap();
        let r = schur_norm(&k, 1e-4).unwrap();
        let d = diagonal_trace(&r, &pts).unwrap();
        assert!((d.values[0] - c(2.0, 0.0)).norm() < 1e-8);
        assert!((d.values[1] - c(0.0, 2.0)).norm() < 1e-8);
    }

    #[test]
    fn diagonal_trace_is_factorization_independent() {
        let phi = random_complex(5, 5, 99);
        let r = schur_norm(&kernel(phi.clone()), 1e-4).unwrap();
        let a = diagonal_trace(&r, &[c(1.0, 0.0); 5]).unwrap();
        let polar = polar_factorization(&phi).unwrap();
        let b = diagonal_trace_of(&polar, &[c(1.0, 0.0); 5]).unwrap();
        let x = crate::spectra::random_haar_unitary(polar.left.ncols(), 4).unwrap();
        let rotated = polar.rotate(x.matrix());
        let cc = diagonal_trace_of(&rotated, &[c(1.0, 0.0); 5]).unwrap();
        for i in 0..5 {
            assert!((a.values[i] - b.values[i]).norm() <= 1e-6);
            assert!((b.values[i] - cc.values[i]).norm() <= 1e-6);
            assert!((a.values[i] - phi[(i, i)]).norm() <= 1e-6);
        }
    }

    #[test]
    fn missing_factorization_is_an_error() {
        let mut r = schur_norm(&kernel(real(2, 2, &[1.0; 4])), 1e-4).unwrap();
        r.factorization = None;
        assert!(diagonal_trace(&r, &[c(1.0, 0.0); 2]).is_err());
    }
}
