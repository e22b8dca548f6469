//! Spectral shift functions of unitary pairs `(U, e^{iA}U)` built from the
//! eigenphase flow along `V_s = e^{isA}U`, and the trace formula
//!
//! `trace(f(U) − f(V)) = ∫₀^{2π} g′(θ) ξ(θ) dθ`,  `g(θ) = f(e^{iθ})`.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, TAU};

use crate::assign::max_weight_assignment;
use crate::circlefn::CircleFunction;
use crate::doi::doi_trace;
use crate::error::{Error, Result};
use crate::flowderiv::qs_kernel;
use crate::spectra::{
    angle_0_2pi, angle_pm_pi, c, cis, decompose_unitary, generator_between, matrix_function, trace,
    wrap_pm_pi, HermitianMatrix, SpectralDecomposition, UnitaryMatrix, UnitaryPath, C64, DEFAULT_GAP_TOL,
};

/// Eigenvalues closer than this are one cluster while tracking; vectors
/// inside a cluster are interchangeable.
pub const TRACKING_CLUSTER_TOL: f64 = 1e-8;
pub const MAX_REFINEMENT_DEPTH: usize = 20;

/// Breakpoints closer than this are merged.
const BREAKPOINT_MERGE: f64 = 1e-12;

pub const SIGN_CONVENTION: &str =
    "trace(f(U) - f(V)) = integral over [0, 2pi) of g'(theta) xi(theta) dtheta, g(theta) = f(e^{i theta}), V = e^{iA} U";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrackingPolicy {
    pub initial_steps: usize,
    /// Smallest accepted matching confidence per step, in (0.5, 1).
    pub min_overlap: f64,
    /// Largest accepted phase increment per step, at most π/2.
    pub max_increment: f64,
}

impl Default for TrackingPolicy {
    fn default() -> Self {
        Self {
            initial_steps: 16,
            min_overlap: 0.8,
            max_increment: 0.5,
        }
    }
}

impl TrackingPolicy {
    pub fn validate(&self) -> Result<()> {
        if self.initial_steps == 0 {
            return Err(Error::InvalidArgument("initial_steps must be at least 1".into()));
        }
        if !(self.min_overlap > 0.5 && self.min_overlap < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "min_overlap must lie in (0.5, 1), got {}",
                self.min_overlap
            )));
        }
        if !(self.max_increment > 0.0 && self.max_increment <= FRAC_PI_2) {
            return Err(Error::InvalidArgument(format!(
                "max_increment must lie in (0, pi/2], got {}",
                self.max_increment
            )));
        }
        Ok(())
    }
}

/// Continuous eigenphase branches of `V_s` on an adaptive grid.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseBraid {
    pub s_grid: Vec<f64>,
    /// `branches[j][k]` is the unwrapped phase of branch `j` at `s_grid[k]`.
    pub branches: Vec<Vec<f64>>,
    /// Matching confidence of each accepted step.
    pub overlaps: Vec<f64>,
}

impl PhaseBraid {
    pub fn dim(&self) -> usize {
        self.branches.len()
    }

    pub fn start_phases(&self) -> Vec<f64> {
        self.branches.iter().map(|b| b[0]).collect()
    }

    pub fn end_phases(&self) -> Vec<f64> {
        self.branches.iter().map(|b| *b.last().unwrap()).collect()
    }

    pub fn max_increment(&self) -> f64 {
        self.branches
            .iter()
            .flat_map(|b| b.windows(2).map(|w| (w[1] - w[0]).abs()))
            .fold(0.0, f64::max)
    }

    /// Largest distance between the end points `e^{iθ_j(1)}` and the
    /// eigenvalues of `v`, after optimal matching.
    pub fn endpoint_defect(&self, v: &UnitaryMatrix) -> Result<f64> {
        let d = decompose_unitary(v, DEFAULT_GAP_TOL)?;
        multiset_distance(&self.end_phases(), d.values())
    }
}

fn multiset_distance(phases: &[f64], values: &[C64]) -> Result<f64> {
    if phases.len() != values.len() {
        return Err(Error::Dimension(format!("{} phases against {} eigenvalues", phases.len(), values.len())));
    }
    let pts: Vec<C64> = phases.iter().map(|&t| cis(t)).collect();
    let w: Vec<Vec<f64>> = pts.iter().map(|p| values.iter().map(|v| -(p - v).norm()).collect()).collect();
    let a = max_weight_assignment(&w);
    Ok(a.iter().enumerate().map(|(i, &j)| -w[i][j]).fold(0.0, f64::max))
}

struct Snapshot {
    phases: Vec<f64>,
    vectors: crate::spectra::ComplexMatrix,
    cluster: Vec<usize>,
    cluster_members: Vec<Vec<usize>>,
}

impl Snapshot {
    fn at(path: &UnitaryPath, s: f64) -> Result<Self> {
        let d = decompose_unitary(&path.at(s)?, TRACKING_CLUSTER_TOL)?;
        Ok(Self {
            phases: d.values().iter().map(|&z| angle_pm_pi(z)).collect(),
            cluster: (0..d.dim()).map(|i| d.cluster_of(i)).collect(),
            cluster_members: d.clusters().to_vec(),
            vectors: d.vectors().clone(),
        })
    }
}

struct StepOutcome {
    assignment: Vec<usize>,
    confidence: f64,
    new_phases: Vec<f64>,
    max_increment: f64,
}

/// Matches the eigenvectors of `a` (indexed through `at_index`) to those of
/// `b`. A pair's quality is the larger of the two cluster-projection norms,
/// so any matching inside a degenerate cluster scores 1.
fn match_step(a: &Snapshot, b: &Snapshot, at_index: &[usize], phases: &[f64]) -> StepOutcome {
    let n = at_index.len();
    let o = a.vectors.adjoint() * &b.vectors;
    let sq = o.map(|z| z.norm_sqr());
    let quality = |i: usize, k: usize| -> f64 {
        let into_b: f64 = b.cluster_members[b.cluster[k]].iter().map(|&kk| sq[(i, kk)]).sum();
        let into_a: f64 = a.cluster_members[a.cluster[i]].iter().map(|&ii| sq[(ii, k)]).sum();
        into_b.max(into_a).sqrt().min(1.0)
    };
    let weights: Vec<Vec<f64>> = at_index.iter().map(|&i| (0..n).map(|k| quality(i, k)).collect()).collect();
    let assignment = max_weight_assignment(&weights);
    let mut confidence: f64 = 1.0;
    let mut max_inc: f64 = 0.0;
    let mut new_phases = Vec::with_capacity(n);
    for (j, &k) in assignment.iter().enumerate() {
        confidence = confidence.min(weights[j][k]);
        let step = wrap_pm_pi(b.phases[k] - phases[j]);
        max_inc = max_inc.max(step.abs());
        new_phases.push(phases[j] + step);
    }
    StepOutcome {
        assignment,
        confidence,
        new_phases,
        max_increment: max_inc,
    }
}

/// Follows the eigenphases of `V_s = e^{isA}U` for `s ∈ [0, 1]`, halving
/// steps wherever matching is unreliable or phases move too far.
pub fn track_eigenphases(u: &UnitaryMatrix, a: &HermitianMatrix, policy: &TrackingPolicy) -> Result<PhaseBraid> {
    policy.validate()?;
    let path = UnitaryPath::new(u, a)?;
    let n = u.dim();
    let mut cache: HashMap<u64, Snapshot> = HashMap::new();
    let snapshot = |s: f64, cache: &mut HashMap<u64, Snapshot>| -> Result<()> {
        if let std::collections::hash_map::Entry::Vacant(e) = cache.entry(s.to_bits()) {
            e.insert(Snapshot::at(&path, s)?);
        }
        Ok(())
    };

    snapshot(0.0, &mut cache)?;
    let start = &cache[&0f64.to_bits()];
    let mut phases = start.phases.clone();
    let mut at_index: Vec<usize> = (0..n).collect();
    let mut s_grid = vec![0.0];
    let mut branches: Vec<Vec<f64>> = phases.iter().map(|&p| vec![p]).collect();
    let mut overlaps = Vec::new();

    let steps = policy.initial_steps;
    // Pending right end points, nearest last, with their refinement depth.
    let mut pending: Vec<(f64, usize)> = (1..=steps).rev().map(|k| (k as f64 / steps as f64, 0)).collect();
    let mut s: f64 = 0.0;
    while let Some((t, depth)) = pending.pop() {
        snapshot(t, &mut cache)?;
        let out = match_step(&cache[&s.to_bits()], &cache[&t.to_bits()], &at_index, &phases);
        if out.confidence >= policy.min_overlap && out.max_increment <= policy.max_increment {
            cache.remove(&s.to_bits());
            s = t;
            at_index = out.assignment;
            phases = out.new_phases;
            s_grid.push(t);
            overlaps.push(out.confidence);
            for (b, &p) in branches.iter_mut().zip(&phases) {
                b.push(p);
            }
        } else {
            if depth >= MAX_REFINEMENT_DEPTH {
                return Err(Error::TrackingDepth { s_start: s, s_end: t });
            }
            pending.push((t, depth));
            pending.push((0.5 * (s + t), depth + 1));
        }
    }
    Ok(PhaseBraid {
        s_grid,
        branches,
        overlaps,
    })
}

/// `trace(P_c A)` for every cluster `c` of `d`.
pub fn nu_weights(d: &SpectralDecomposition, a: &HermitianMatrix) -> Result<Vec<f64>> {
    if d.dim() != a.dim() {
        return Err(Error::Dimension(format!(
            "decomposition is {0}x{0} but A is {1}x{1}",
            d.dim(),
            a.dim()
        )));
    }
    let v = d.vectors();
    let diag: Vec<f64> = (0..d.dim())
        .map(|i| {
            let col = v.column(i);
            (col.adjoint() * a.matrix() * col)[(0, 0)].re
        })
        .collect();
    Ok(d.clusters().iter().map(|cl| cl.iter().map(|&i| diag[i]).sum()).collect())
}

/// Piecewise-constant function on the circle; `values[i]` holds on the arc
/// from `breakpoints[i]` to the next breakpoint (cyclically).
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralShiftFunction {
    pub breakpoints: Vec<f64>,
    pub values: Vec<f64>,
    /// Constant already subtracted from the flow counts.
    pub normalization_shift: f64,
}

impl SpectralShiftFunction {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>, normalization_shift: f64) -> Result<Self> {
        if breakpoints.is_empty() || breakpoints.len() != values.len() {
            return Err(Error::InvalidArgument(format!(
                "need as many values as breakpoints (at least one), got {} and {}",
                breakpoints.len(),
                values.len()
            )));
        }
        if breakpoints.iter().any(|&p| !(0.0..TAU).contains(&p)) || breakpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("breakpoints must be strictly increasing in [0, 2pi)".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("values must be finite".into()));
        }
        Ok(Self {
            breakpoints,
            values,
            normalization_shift,
        })
    }

    pub fn constant(value: f64) -> Self {
        Self {
            breakpoints: vec![0.0],
            values: vec![value],
            normalization_shift: 0.0,
        }
    }

    /// `(start, end, value)` per arc; the last arc ends at the first
    /// breakpoint plus 2π.
    pub fn arcs(&self) -> Vec<(f64, f64, f64)> {
        let m = self.breakpoints.len();
        (0..m)
            .map(|i| {
                let end = if i + 1 < m { self.breakpoints[i + 1] } else { self.breakpoints[0] + TAU };
                (self.breakpoints[i], end, self.values[i])
            })
            .collect()
    }

    pub fn mean(&self) -> f64 {
        self.arcs().iter().map(|(a, b, v)| v * (b - a)).sum::<f64>() / TAU
    }

    pub fn eval(&self, theta: f64) -> f64 {
        let t = theta.rem_euclid(TAU);
        match self.breakpoints.iter().rposition(|&p| p <= t) {
            Some(i) => self.values[i],
            None => *self.values.last().unwrap(),
        }
    }

    /// The same function plus a constant.
    pub fn shifted(&self, delta: f64) -> Self {
        Self {
            breakpoints: self.breakpoints.clone(),
            values: self.values.iter().map(|v| v + delta).collect(),
            normalization_shift: self.normalization_shift - delta,
        }
    }

    /// Values before the mean was removed; integers for a flow-built
    /// function.
    pub fn raw_values(&self) -> Vec<f64> {
        self.values.iter().map(|v| v + self.normalization_shift).collect()
    }

    /// The same function with equal neighbouring arcs joined.
    pub fn merged(&self) -> Self {
        let m = self.values.len();
        let keep: Vec<usize> = (0..m).filter(|&i| self.values[i] != self.values[(i + m - 1) % m]).collect();
        let keep = if keep.is_empty() { vec![0] } else { keep };
        Self {
            breakpoints: keep.iter().map(|&i| self.breakpoints[i]).collect(),
            values: keep.iter().map(|&i| self.values[i]).collect(),
            normalization_shift: self.normalization_shift,
        }
    }

    pub fn total_variation(&self) -> f64 {
        let m = self.values.len();
        (0..m).map(|i| (self.values[(i + 1) % m] - self.values[i]).abs()).sum()
    }
}

/// Folded endpoint angles, sorted and merged.
fn breakpoints_of(braid: &PhaseBraid) -> Vec<f64> {
    let mut pts: Vec<f64> = braid
        .start_phases()
        .into_iter()
        .chain(braid.end_phases())
        .map(|t| angle_0_2pi(cis(t)))
        .collect();
    pts.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(pts.len());
    for p in pts {
        if out.last().is_none_or(|&q| p - q > BREAKPOINT_MERGE) {
            out.push(p);
        }
    }
    if out.len() > 1 && out[0] + TAU - out[out.len() - 1] <= BREAKPOINT_MERGE {
        out.pop();
    }
    out
}

/// Signed number of times the branch from `a` to `b` sweeps across the
/// angle `m` (mod 2π).
fn sweep_count(a: f64, b: f64, m: f64) -> f64 {
    ((b - m) / TAU).floor() - ((a - m) / TAU).floor()
}

/// `ξ(θ) = −Σ_j (signed sweep count of branch j over θ)`, then shifted to
/// mean zero.
pub fn build_ssf(braid: &PhaseBraid) -> Result<SpectralShiftFunction> {
    if braid.dim() == 0 || braid.branches.iter().any(|b| b.len() != braid.s_grid.len()) {
        return Err(Error::InvalidArgument("braid has no branches or ragged branches".into()));
    }
    let bps = breakpoints_of(braid);
    let (starts, ends) = (braid.start_phases(), braid.end_phases());
    let m = bps.len();
    let raw: Vec<f64> = (0..m)
        .map(|i| {
            let end = if i + 1 < m { bps[i + 1] } else { bps[0] + TAU };
            let mid = 0.5 * (bps[i] + end);
            -starts.iter().zip(&ends).map(|(&a, &b)| sweep_count(a, b, mid)).sum::<f64>()
        })
        .collect();
    let unnormalized = SpectralShiftFunction::new(bps, raw, 0.0)?;
    let mean = unnormalized.mean();
    Ok(unnormalized.shifted(-mean))
}

/// `Σ_arcs value · (g(end) − g(start))`, exact for any `f`.
pub fn krein_rhs(xi: &SpectralShiftFunction, f: &CircleFunction) -> C64 {
    let g: Vec<C64> = xi.breakpoints.iter().map(|&t| f.eval_angle(t)).collect();
    let m = g.len();
    (0..m).map(|i| (g[(i + 1) % m] - g[i]) * xi.values[i]).sum()
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceFormulaReport {
    pub lhs: C64,
    pub rhs: C64,
    pub abs_error: f64,
    /// `abs_error / (1 + |lhs|)`.
    pub rel_error: f64,
    pub convention: &'static str,
}

pub fn verify_trace_formula(f: &CircleFunction, u: &UnitaryMatrix, a: &HermitianMatrix) -> Result<TraceFormulaReport> {
    verify_trace_formula_with(f, u, a, &TrackingPolicy::default())
}

pub fn verify_trace_formula_with(
    f: &CircleFunction,
    u: &UnitaryMatrix,
    a: &HermitianMatrix,
    policy: &TrackingPolicy,
) -> Result<TraceFormulaReport> {
    let v = UnitaryPath::new(u, a)?.at(1.0)?;
    let fu = matrix_function(&decompose_unitary(u, DEFAULT_GAP_TOL)?, f)?;
    let fv = matrix_function(&decompose_unitary(&v, DEFAULT_GAP_TOL)?, f)?;
    let lhs = trace(&(fu - fv));
    let xi = build_ssf(&track_eigenphases(u, a, policy)?)?;
    let rhs = krein_rhs(&xi, f);
    let abs_error = (lhs - rhs).norm();
    Ok(TraceFormulaReport {
        lhs,
        rhs,
        abs_error,
        rel_error: abs_error / (1.0 + lhs.norm()),
        convention: SIGN_CONVENTION,
    })
}

/// `trace Q_s = i Σ_c τ_c f′(τ_c) trace(P_c A)`.
pub fn qs_trace(f: &CircleFunction, path: &UnitaryPath, s: f64) -> Result<C64> {
    let ds = decompose_unitary(&path.at(s)?, DEFAULT_GAP_TOL)?;
    let kernel = qs_kernel(f, &ds)?;
    Ok(doi_trace(&kernel, &ds, path.generator().matrix())? * c(0.0, 1.0))
}

/// Composite Simpson rule for `∫₀¹ trace Q_s ds = trace(f(V) − f(U))`.
pub fn qs_trace_quadrature(f: &CircleFunction, u: &UnitaryMatrix, a: &HermitianMatrix, steps: usize) -> Result<C64> {
    if steps < 2 || steps % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "Simpson quadrature needs an even number of steps >= 2, got {steps}"
        )));
    }
    let path = UnitaryPath::new(u, a)?;
    let h = 1.0 / steps as f64;
    let mut sum = c(0.0, 0.0);
    for k in 0..=steps {
        let w = if k == 0 || k == steps {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        sum += qs_trace(f, &path, k as f64 * h)? * w;
    }
    Ok(sum * (h / 3.0))
}

#[derive(Clone, Debug, PartialEq)]
pub struct TwistScan {
    /// `(θ_k, trace(f(ζ_k U) − f(ζ_k V)))` with `ζ_k = e^{iθ_k}`.
    pub samples: Vec<(f64, C64)>,
    /// Largest difference between cyclically adjacent samples.
    pub max_jump: f64,
}

fn twist_angles(grid: usize) -> Result<Vec<f64>> {
    if grid < 8 {
        return Err(Error::InvalidArgument(format!("grid must be at least 8, got {grid}")));
    }
    Ok((0..grid).map(|k| TAU * k as f64 / grid as f64).collect())
}

fn scan_from(samples: Vec<(f64, C64)>) -> TwistScan {
    let m = samples.len();
    let max_jump = (0..m)
        .map(|k| (samples[(k + 1) % m].1 - samples[k].1).norm())
        .fold(0.0, f64::max);
    TwistScan { samples, max_jump }
}

/// `ζ ↦ trace(f(ζU) − f(ζV))` on `grid` equispaced points.
pub fn twist_scan(f: &CircleFunction, u: &UnitaryMatrix, v: &UnitaryMatrix, grid: usize) -> Result<TwistScan> {
    if u.dim() != v.dim() {
        return Err(Error::Dimension(format!("U is {0}x{0} but V is {1}x{1}", u.dim(), v.dim())));
    }
    let angles = twist_angles(grid)?;
    let lu: Vec<f64> = decompose_unitary(u, DEFAULT_GAP_TOL)?.values().iter().map(|&z| angle_0_2pi(z)).collect();
    let lv: Vec<f64> = decompose_unitary(v, DEFAULT_GAP_TOL)?.values().iter().map(|&z| angle_0_2pi(z)).collect();
    let samples = angles
        .into_iter()
        .map(|t| {
            let su: C64 = lu.iter().map(|&x| f.eval_angle(x + t)).sum();
            let sv: C64 = lv.iter().map(|&x| f.eval_angle(x + t)).sum();
            (t, su - sv)
        })
        .collect();
    Ok(scan_from(samples))
}

/// The same scan through `∫ (f_ζ)′ ξ` with `f_ζ(z) = f(ζz)` and one spectral
/// shift function for the pair.
pub fn twist_scan_rotated(f: &CircleFunction, xi: &SpectralShiftFunction, grid: usize) -> Result<TwistScan> {
    let samples = twist_angles(grid)?
        .into_iter()
        .map(|t| Ok((t, krein_rhs(xi, &f.rotated(cis(t))?))))
        .collect::<Result<Vec<_>>>()?;
    Ok(scan_from(samples))
}

/// Spectral shift function of a pair `(U, V)` through the principal
/// generator `A` with `V = e^{iA}U`.
pub fn ssf_for_pair(u: &UnitaryMatrix, v: &UnitaryMatrix, policy: &TrackingPolicy) -> Result<SpectralShiftFunction> {
    let a = generator_between(u, v)?;
    build_ssf(&track_eigenphases(u, &a, policy)?)
}
