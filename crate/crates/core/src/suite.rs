//! The acceptance battery: one check per property the toolkit promises,
//! with fixed instances, tolerances and runtime budgets. Shared by the
//! `suite` subcommand and the `acceptance` test target.

use std::time::Instant;

use serde::Serialize;

use crate::circlefn::CircleFunction;
use crate::doi::{
    direct_difference, divided_difference_on_spectra, dkbs_difference, doi_compute, doi_trace, trace_norm,
    KernelMatrix,
};
use crate::error::Result;
use crate::flowderiv::fd_probe;
use crate::multiplier::{ol_lower_bound, probe_ratio, schur_norm};
use crate::spectra::{
    c, decompose_unitary, matrix_function, path_point, random_complex, random_instance, trace, HermitianMatrix,
    UnitaryMatrix, DEFAULT_GAP_TOL,
};
use crate::ssf::{
    build_ssf, krein_rhs, qs_trace_quadrature, ssf_for_pair, track_eigenphases, twist_scan, twist_scan_rotated,
    verify_trace_formula, TrackingPolicy,
};

/// Outcome of one check. `measured` is the worst value seen, `threshold`
/// the bound it is held to (for ratio checks, the required minimum).
#[derive(Clone, Debug, Serialize)]
pub struct CheckOutcome {
    pub id: &'static str,
    pub description: &'static str,
    pub passed: bool,
    pub measured: f64,
    pub threshold: f64,
    pub instances: usize,
    #[serde(skip)]
    pub seconds: f64,
    pub runtime_limit: Option<f64>,
    pub detail: String,
}

impl CheckOutcome {
    /// `PASS id  measured=.. threshold=.. (t s / limit s) detail`.
    pub fn line(&self) -> String {
        let runtime = match self.runtime_limit {
            Some(l) => format!("{:.2}s / {l:.0}s", self.seconds),
            None => format!("{:.2}s", self.seconds),
        };
        format!(
            "{} {:<22} measured={:.3e} threshold={:.3e} instances={} runtime={} {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.measured,
            self.threshold,
            self.instances,
            runtime,
            self.detail
        )
    }
}

#[derive(Clone, Debug)]
pub struct SuiteConfig {
    /// Relative tolerance for the DKBS identity.
    pub dkbs_tol: f64,
    /// Check ids to run; all when `None`.
    pub only: Option<Vec<String>>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            dkbs_tol: 1e-9,
            only: None,
        }
    }
}

pub const CHECK_IDS: [&str; 10] = [
    "dkbs",
    "diagonal-trace",
    "transformer-bound",
    "derivative",
    "krein-trace",
    "route-agreement",
    "gauge",
    "multiplier-soundness",
    "ol-growth",
    "twist",
];

struct Timer {
    start: Instant,
    limit: Option<f64>,
}

impl Timer {
    fn new(limit: Option<f64>) -> Self {
        Self {
            start: Instant::now(),
            limit,
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn finish(
        self,
        id: &'static str,
        description: &'static str,
        ok: bool,
        measured: f64,
        threshold: f64,
        instances: usize,
        detail: String,
    ) -> CheckOutcome {
        let seconds = self.start.elapsed().as_secs_f64();
        let in_time = self.limit.is_none_or(|l| seconds <= l);
        let detail = if in_time { detail } else { format!("{detail} (over runtime budget)") };
        CheckOutcome {
            id,
            description,
            passed: ok && in_time,
            measured,
            threshold,
            instances,
            seconds,
            runtime_limit: self.limit,
            detail,
        }
    }
}

/// Instance `seed` of the shared battery: `n ∈ {2..16}`, generator rank
/// at most 3, TrigPoly degree at most 8.
pub fn battery_instance(seed: u64) -> Result<(UnitaryMatrix, HermitianMatrix, CircleFunction)> {
    let n = 2 + (seed % 15) as usize;
    let rank = (1 + (seed % 3) as usize).min(n);
    let (u, a) = random_instance(n, rank, 1.0, seed)?;
    let f = CircleFunction::random_trig(1 + (seed % 8) as usize, seed);
    Ok((u, a, f))
}

pub fn check_dkbs(tol: f64) -> Result<CheckOutcome> {
    let timer = Timer::new(Some(10.0));
    let mut worst: f64 = 0.0;
    for seed in 1..=100 {
        let (u, a, f) = battery_instance(seed)?;
        let v = path_point(&u, &a, 1.0)?;
        let dk = dkbs_difference(&f, &u, &v)?;
        let direct = direct_difference(&f, &u, &v)?;
        let fu_norm = matrix_function(&decompose_unitary(&u, DEFAULT_GAP_TOL)?, &f)?.norm();
        worst = worst.max((dk - direct).norm() / (1.0 + fu_norm));
    }
    Ok(timer.finish(
        "dkbs",
        "f(U) - f(V) equals the double operator integral of the divided difference against U - V",
        worst <= tol,
        worst,
        tol,
        100,
        "max ||DOI - (f(U)-f(V))||_F / (1 + ||f(U)||_F)".into(),
    ))
}

pub fn check_diagonal_trace() -> Result<CheckOutcome> {
    let timer = Timer::new(Some(5.0));
    let mut worst: f64 = 0.0;
    for seed in 1..=100 {
        let (u, a, f) = battery_instance(seed)?;
        let d = decompose_unitary(&u, DEFAULT_GAP_TOL)?;
        let phi = divided_difference_on_spectra(&f, &d, &d)?;
        let full = trace(&doi_compute(&phi, &d, a.matrix(), &d)?);
        worst = worst.max((doi_trace(&phi, &d, a.matrix())? - full).norm());
    }
    Ok(timer.finish(
        "diagonal-trace",
        "trace of the double operator integral equals the integral of the kernel diagonal",
        worst <= 1e-10,
        worst,
        1e-10,
        100,
        "max |doi_trace - trace(doi_compute)|".into(),
    ))
}

pub fn check_transformer_bound() -> Result<CheckOutcome> {
    let timer = Timer::new(Some(60.0));
    let mut worst: f64 = 0.0;
    for seed in 1..=50u64 {
        let n = 2 + (seed % 5) as usize;
        let (u, a) = random_instance(n, (1 + seed % 2) as usize, 1.0, 500 + seed)?;
        let v = path_point(&u, &a, 1.0)?;
        let f = CircleFunction::random_trig(1 + (seed % 6) as usize, 500 + seed);
        let (du, dv) = (decompose_unitary(&u, DEFAULT_GAP_TOL)?, decompose_unitary(&v, DEFAULT_GAP_TOL)?);
        let phi = divided_difference_on_spectra(&f, &du, &dv)?;
        let t = random_complex(n, n, 900 + seed);
        let lhs = trace_norm(&doi_compute(&phi, &du, &t, &dv)?)?;
        let norm = schur_norm(&phi, 1e-3)?.value;
        worst = worst.max(lhs / (norm * trace_norm(&t)?));
    }
    let limit = 1.0 + 1e-4;
    Ok(timer.finish(
        "transformer-bound",
        "trace norm of the transformed matrix is at most multiplier norm times trace norm",
        worst <= limit,
        worst,
        limit,
        50,
        "max ||DOI(T)||_1 / (schur_norm * ||T||_1)".into(),
    ))
}

pub fn check_derivative() -> Result<CheckOutcome> {
    let timer = Timer::new(Some(20.0));
    let mut worst_agree: f64 = 0.0;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let s_values = [0.0, 0.37, 1.0];
    for k in 0..20u64 {
        let n = 3 + (k % 6) as usize;
        let (u, a) = random_instance(n, (1 + k % 3) as usize, 1.0, 200 + k)?;
        let f = CircleFunction::random_trig(4, 200 + k);
        let s = s_values[(k % 3) as usize];
        let fit = fd_probe(&f, &u, &a, s, &[1e-2, 1e-3, 1e-4])?;
        // A missing fit counts as order 0, which fails the range check.
        let order = fit.fitted_order.unwrap_or(0.0);
        lo = lo.min(order);
        hi = hi.max(order);
        let at = fd_probe(&f, &u, &a, s, &[1e-5])?;
        worst_agree = worst_agree.max(at.fd_errors[0].1 / at.qs.norm());
    }
    let ok = (1.8..=2.2).contains(&lo) && (1.8..=2.2).contains(&hi) && worst_agree <= 1e-4;
    Ok(timer.finish(
        "derivative",
        "central differences along the path converge to the derivative operator at second order",
        ok,
        worst_agree,
        1e-4,
        20,
        format!("fitted order in [{lo:.4}, {hi:.4}] (required [1.8, 2.2]); measured = max relative error at t = 1e-5"),
    ))
}

pub fn check_krein_trace() -> Result<CheckOutcome> {
    let timer = Timer::new(Some(60.0));
    let mut worst: f64 = 0.0;
    for k in 0..20u64 {
        let n = 2 + (k % 15) as usize;
        let (u, a) = random_instance(n, (1 + k % 3).min(n as u64) as usize, 1.0, 300 + k)?;
        let f = CircleFunction::random_trig(1 + (k % 8) as usize, 300 + k);
        worst = worst.max(verify_trace_formula(&f, &u, &a)?.rel_error);
    }
    let u = UnitaryMatrix::identity(2);
    let a = HermitianMatrix::from_real_diagonal(&[std::f64::consts::FRAC_PI_2, 0.0]);
    let xi = build_ssf(&track_eigenphases(&u, &a, &TrackingPolicy::default())?)?;
    let closed = (krein_rhs(&xi, &CircleFunction::monomial(1)) - c(1.0, -1.0)).norm();
    Ok(timer.finish(
        "krein-trace",
        "trace(f(U) - f(V)) equals the integral of f' against the spectral shift function",
        worst <= 1e-7 && closed <= 1e-12,
        worst,
        1e-7,
        21,
        format!("max rel_error over 20 random instances; 2x2 commuting example off 1-i by {closed:.1e}"),
    ))
}

pub fn check_route_agreement() -> Result<CheckOutcome> {
    let timer = Timer::new(Some(30.0));
    let mut worst: f64 = 0.0;
    for k in 0..10u64 {
        let n = 3 + (k % 6) as usize;
        let (u, a) = random_instance(n, (1 + k % 3) as usize, 1.0, 400 + k)?;
        let f = CircleFunction::random_trig(1 + (k % 6) as usize, 400 + k);
        let v = path_point(&u, &a, 1.0)?;
        let direct = -trace(&direct_difference(&f, &u, &v)?);
        worst = worst.max((qs_trace_quadrature(&f, &u, &a, 128)? - direct).norm());
    }
    Ok(timer.finish(
        "route-agreement",
        "integral of trace Q_s over the path equals trace(f(V) - f(U))",
        worst <= 1e-6,
        worst,
        1e-6,
        10,
        "max |Simpson(128) - trace(f(V)-f(U))|".into(),
    ))
}

pub fn check_gauge() -> Result<CheckOutcome> {
    let timer = Timer::new(None);
    let mut worst: f64 = 0.0;
    for k in 0..10u64 {
        let (u, a) = random_instance(4 + (k % 5) as usize, 2, 1.0, 600 + k)?;
        let f = CircleFunction::random_trig(1 + (k % 8) as usize, 600 + k);
        let xi = build_ssf(&track_eigenphases(&u, &a, &TrackingPolicy::default())?)?;
        let base = krein_rhs(&xi, &f);
        for delta in [-7.5, -1.0, 0.25, 3.0, 42.0] {
            worst = worst.max((krein_rhs(&xi.shifted(delta), &f) - base).norm());
        }
    }
    Ok(timer.finish(
        "gauge",
        "the trace formula does not see constant shifts of the spectral shift function",
        worst <= 1e-12,
        worst,
        1e-12,
        50,
        "max |rhs(xi + c) - rhs(xi)| over 10 instances x 5 shifts".into(),
    ))
}

pub fn check_multiplier_soundness() -> Result<CheckOutcome> {
    let timer = Timer::new(None);
    let mut worst: f64 = 0.0;
    let mut inverted = 0;
    for k in 0..30u64 {
        let (r, s) = (2 + (k % 4) as usize, 2 + ((k / 4) % 4) as usize);
        let values = random_complex(r, s, 700 + k);
        let pts = |m: usize| (0..m).map(|j| crate::spectra::cis(j as f64)).collect::<Vec<_>>();
        let kernel = KernelMatrix::new(pts(r), pts(s), values.clone())?;
        let res = schur_norm(&kernel, 1e-3)?;
        if res.lower > res.upper {
            inverted += 1;
        }
        for p in 0..100u64 {
            let t = random_complex(r, s, 10_000 * (k + 1) + p);
            worst = worst.max(probe_ratio(&values, &t)? / res.upper);
        }
    }
    let ones = schur_norm(&KernelMatrix::ones(vec![c(1.0, 0.0); 4], vec![c(1.0, 0.0); 4]), 1e-4)?.value;
    let two = KernelMatrix::new(vec![c(1.0, 0.0), c(-1.0, 0.0)], vec![c(1.0, 0.0), c(-1.0, 0.0)], {
        crate::spectra::ComplexMatrix::from_element(2, 2, c(2.0, 0.0))
    })?;
    let two = schur_norm(&two, 1e-4)?.value;
    let exact = (ones - 1.0).abs() <= 1e-6 && (two - 2.0).abs() <= 1e-6;
    Ok(timer.finish(
        "multiplier-soundness",
        "multiplier norm certificates bracket every random probe ratio",
        worst <= 1.0 && inverted == 0 && exact,
        worst,
        1.0,
        30,
        format!("max probe/upper over 3000 probes; all-ones -> {ones:.9}, [[2,2],[2,2]] -> {two:.9}"),
    ))
}

pub fn check_ol_growth() -> Result<CheckOutcome> {
    let timer = Timer::new(Some(120.0));
    let bounds = ol_lower_bound(&CircleFunction::abs_theta(), &[16, 256])?;
    let ratio = bounds[1].lower / bounds[0].lower;
    Ok(timer.finish(
        "ol-growth",
        "multiplier norms of the |theta| divided difference grow with the grid",
        ratio >= 1.5,
        ratio,
        1.5,
        2,
        format!(
            "bound(16) = {:.6}, bound(256) = {:.6}; measured = bound(256)/bound(16), required at least threshold",
            bounds[0].lower, bounds[1].lower
        ),
    ))
}

pub fn check_twist() -> Result<CheckOutcome> {
    let timer = Timer::new(None);
    let mut worst: f64 = 0.0;
    for k in 0..5u64 {
        let n = 4 + k as usize;
        let (u, a) = random_instance(n, 2, 1.0, 800 + k)?;
        let v = path_point(&u, &a, 1.0)?;
        let f = CircleFunction::random_trig(6, 800 + k);
        let direct = twist_scan(&f, &u, &v, 256)?;
        let xi = ssf_for_pair(&u, &v, &TrackingPolicy::default())?;
        let rotated = twist_scan_rotated(&f, &xi, 256)?;
        for (x, y) in direct.samples.iter().zip(&rotated.samples) {
            worst = worst.max((x.1 - y.1).norm());
        }
    }
    Ok(timer.finish(
        "twist",
        "trace(f(zU) - f(zV)) agrees with the rotated-function trace formula on the whole circle",
        worst <= 1e-7,
        worst,
        1e-7,
        5,
        "max |direct - rotated route| over 256 points x 5 pairs".into(),
    ))
}

pub fn run_check(id: &str, config: &SuiteConfig) -> Result<CheckOutcome> {
    match id {
        "dkbs" => check_dkbs(config.dkbs_tol),
        "diagonal-trace" => check_diagonal_trace(),
        "transformer-bound" => check_transformer_bound(),
        "derivative" => check_derivative(),
        "krein-trace" => check_krein_trace(),
        "route-agreement" => check_route_agreement(),
        "gauge" => check_gauge(),
        "multiplier-soundness" => check_multiplier_soundness(),
        "ol-growth" => check_ol_growth(),
        "twist" => check_twist(),
        other => Err(crate::error::Error::InvalidArgument(format!(
            "unknown check {other}; known: {}",
            CHECK_IDS.join(", ")
        ))),
    }
}

/// Runs the selected checks in order, calling `report` after each.
pub fn run_suite(config: &SuiteConfig, mut report: impl FnMut(&CheckOutcome)) -> Result<Vec<CheckOutcome>> {
    let ids: Vec<String> = match &config.only {
        Some(list) => list.clone(),
        None => CHECK_IDS.iter().map(|s| s.to_string()).collect(),
    };
    let mut out = Vec::with_capacity(ids.len());
    for id in &ids {
        let outcome = run_check(id, config)?;
        report(&outcome);
        out.push(outcome);
    }
    Ok(out)
}
