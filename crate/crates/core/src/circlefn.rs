//! Functions on the unit circle and on the real line, with derivatives and
//! divided differences that stay accurate at near-coincident points.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectra::{angle_pm_pi, c, cis, ScalarFunction, C64};

/// Below this separation a sampled model switches from the difference
/// quotient to the derivative at the normalized midpoint.
pub const DELTA_SWITCH: f64 = 1e-8;

const UNIMODULAR_TOL: f64 = 1e-9;

/// `f(e^{iθ}) = Σ_{k=-d}^{d} c_k e^{ikθ}`, i.e. `f(z) = Σ c_k z^k` on the circle.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigPoly {
    degree: usize,
    coeffs: Vec<C64>,
}

impl TrigPoly {
    /// `coeffs` ordered `k = -d, ..., d`.
    pub fn new(coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.len() % 2 == 0 {
            return Err(Error::InvalidArgument(format!(
                "trigonometric polynomial needs 2d+1 coefficients, got {}",
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument("non-finite coefficient".into()));
        }
        Ok(Self {
            degree: coeffs.len() / 2,
            coeffs,
        })
    }

    pub fn monomial(k: i32) -> Self {
        let d = k.unsigned_abs() as usize;
        let mut coeffs = vec![c(0.0, 0.0); 2 * d + 1];
        coeffs[(k + d as i32) as usize] = c(1.0, 0.0);
        Self { degree: d, coeffs }
    }

    /// Complex Gaussian coefficients with `|c_k|` decaying like `1/(1+|k|)`;
    /// the top coefficients are nonzero, so the degree is exactly `degree`.
    pub fn random(degree: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7419_c0ef);
        let d = degree as i32;
        let coeffs = (-d..=d)
            .map(|k| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                c(re, im) / (1.0 + k.abs() as f64)
            })
            .collect();
        Self { degree, coeffs }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeff(&self, k: i32) -> C64 {
        let d = self.degree as i32;
        if k < -d || k > d {
            c(0.0, 0.0)
        } else {
            self.coeffs[(k + d) as usize]
        }
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    /// Horner in `z` over `z^{-d} Σ_m c_{m-d} z^m`.
    pub fn eval(&self, z: C64) -> C64 {
        let d = self.degree as i32;
        let mut acc = c(0.0, 0.0);
        for &ck in self.coeffs.iter().rev() {
            acc = acc * z + ck;
        }
        acc * z.powi(-d)
    }

    /// `f'(z) = Σ k c_k z^{k-1}`.
    pub fn derivative(&self, z: C64) -> C64 {
        let d = self.degree as i32;
        let mut acc = c(0.0, 0.0);
        for (m, &ck) in self.coeffs.iter().enumerate().rev() {
            acc = acc * z + ck * (m as i32 - d) as f64;
        }
        acc * z.powi(-d - 1)
    }

    /// Exact divided difference through `(z^k − w^k)/(z − w) = Σ_j z^j w^{k−1−j}`.
    /// Mirror terms are summed in pairs so the result is bitwise symmetric in
    /// its arguments.
    pub fn divided_difference(&self, z: C64, w: C64) -> C64 {
        let d = self.degree;
        let zp = Powers::new(z, d + 1);
        let wp = Powers::new(w, d + 1);
        let mut total = c(0.0, 0.0);
        for k in 1..=d as i32 {
            let pos = self.coeff(k);
            if pos != c(0.0, 0.0) {
                total += pos * power_sum(&zp, &wp, k);
            }
            let neg = self.coeff(-k);
            if neg != c(0.0, 0.0) {
                total += neg * -negative_power_sum(&zp, &wp, k);
            }
        }
        total
    }

    /// `f_ζ(z) = f(ζz)`.
    pub fn rotated(&self, zeta: C64) -> Self {
        let d = self.degree as i32;
        let coeffs = (-d..=d).map(|k| self.coeff(k) * zeta.powi(k)).collect();
        Self {
            degree: self.degree,
            coeffs,
        }
    }
}

struct Powers {
    pos: Vec<C64>,
    neg: Vec<C64>,
}

impl Powers {
    fn new(z: C64, max: usize) -> Self {
        let inv = c(1.0, 0.0) / z;
        let mut pos = Vec::with_capacity(max + 1);
        let mut neg = Vec::with_capacity(max + 1);
        let (mut p, mut q) = (c(1.0, 0.0), c(1.0, 0.0));
        for _ in 0..=max {
            pos.push(p);
            neg.push(q);
            p *= z;
            q *= inv;
        }
        Self { pos, neg }
    }
}

/// `Σ_{j=0}^{k-1} z^j w^{k-1-j}` for `k ≥ 1`.
fn power_sum(z: &Powers, w: &Powers, k: i32) -> C64 {
    let k = k as usize;
    let mut s = c(0.0, 0.0);
    let mut j = 0;
    while 2 * j + 1 < k {
        let a = z.pos[j] * w.pos[k - 1 - j];
        let b = w.pos[j] * z.pos[k - 1 - j];
        s += a + b;
        j += 1;
    }
    if k % 2 == 1 {
        let m = (k - 1) / 2;
        s += z.pos[m] * w.pos[m];
    }
    s
}

/// `Σ_{j=0}^{m-1} z^{j-m} w^{-1-j}`, so that `(z^{-m} − w^{-m})/(z − w)` is its negative.
fn negative_power_sum(z: &Powers, w: &Powers, m: i32) -> C64 {
    let m = m as usize;
    let mut s = c(0.0, 0.0);
    let mut j = 0;
    // Term j pairs with term m-1-j under z <-> w.
    while 2 * j + 1 < m {
        let a = z.neg[m - j] * w.neg[1 + j];
        let b = w.neg[m - j] * z.neg[1 + j];
        s += a + b;
        j += 1;
    }
    if m % 2 == 1 {
        let h = (m - 1) / 2;
        s += z.neg[m - h] * w.neg[1 + h];
    }
    s
}

type AngleFn = Arc<dyn Fn(f64) -> C64 + Send + Sync>;
type AngleDerivFn = Arc<dyn Fn(f64) -> Option<C64> + Send + Sync>;

/// A circle function given by a pair `g(θ) = f(e^{iθ})`, `g'(θ)` on `(−π, π]`.
#[derive(Clone)]
pub struct SampledCircle {
    name: String,
    value: AngleFn,
    derivative: AngleDerivFn,
    lipschitz: f64,
    kinks: Vec<f64>,
}

impl fmt::Debug for SampledCircle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SampledCircle")
            .field("name", &self.name)
            .field("lipschitz", &self.lipschitz)
            .field("kinks", &self.kinks)
            .finish()
    }
}

#[derive(Clone, Debug)]
pub enum CircleFunction {
    Trig(TrigPoly),
    Sampled(SampledCircle),
}

fn check_unimodular(z: C64) -> Result<()> {
    if (z.norm() - 1.0).abs() > UNIMODULAR_TOL {
        Err(Error::InvalidArgument(format!(
            "point {z} is not on the unit circle (|z| = {})",
            z.norm()
        )))
    } else {
        Ok(())
    }
}

impl CircleFunction {
    pub fn trig(coeffs: Vec<C64>) -> Result<Self> {
        Ok(Self::Trig(TrigPoly::new(coeffs)?))
    }

    /// `f(z) = z^k`.
    pub fn monomial(k: i32) -> Self {
        Self::Trig(TrigPoly::monomial(k))
    }

    pub fn random_trig(degree: usize, seed: u64) -> Self {
        Self::Trig(TrigPoly::random(degree, seed))
    }

    /// `f(e^{iθ}) = cos θ`.
    pub fn cos() -> Self {
        Self::Trig(TrigPoly {
            degree: 1,
            coeffs: vec![c(0.5, 0.0), c(0.0, 0.0), c(0.5, 0.0)],
        })
    }

    /// Fourier partial sum of the sawtooth `θ` on `(−π, π)`:
    /// `Σ_{k=1}^{m} 2(−1)^{k+1} sin(kθ)/k`.
    pub fn sawtooth(terms: usize) -> Self {
        let d = terms as i32;
        let coeffs = (-d..=d)
            .map(|k| {
                if k == 0 {
                    c(0.0, 0.0)
                } else {
                    let kk = k.unsigned_abs() as f64;
                    let sign = if k.unsigned_abs() % 2 == 1 { 1.0 } else { -1.0 };
                    // 2 sin(kθ)/k = (e^{ikθ} − e^{−ikθ})/(ik)
                    let mag = sign / kk;
                    if k > 0 {
                        c(0.0, -mag)
                    } else {
                        c(0.0, mag)
                    }
                }
            })
            .collect();
        Self::Trig(TrigPoly { degree: terms, coeffs })
    }

    /// `f(e^{iθ}) = |θ|` for `θ ∈ (−π, π]`: Lipschitz but not operator
    /// Lipschitz. Kinks at `θ = 0` and `θ = π`.
    pub fn abs_theta() -> Self {
        Self::Sampled(SampledCircle {
            name: "abs-theta".into(),
            value: Arc::new(|t| c(t.abs(), 0.0)),
            derivative: Arc::new(|t| {
                if t.abs() < 1e-12 || (PI - t.abs()) < 1e-12 {
                    None
                } else {
                    Some(c(t.signum(), 0.0))
                }
            }),
            lipschitz: 1.0,
            kinks: vec![0.0, PI],
        })
    }

    /// A smooth user model given in angle coordinates. The pair is checked
    /// for finite-difference consistency on a probe grid.
    pub fn sampled<G, D>(name: &str, g: G, g_prime: D, lipschitz: f64) -> Result<Self>
    where
        G: Fn(f64) -> C64 + Send + Sync + 'static,
        D: Fn(f64) -> C64 + Send + Sync + 'static,
    {
        let model = SampledCircle {
            name: name.to_string(),
            value: Arc::new(g),
            derivative: Arc::new(move |t| Some(g_prime(t))),
            lipschitz,
            kinks: Vec::new(),
        };
        model.consistency_check()?;
        Ok(Self::Sampled(model))
    }

    pub fn name(&self) -> String {
        match self {
            Self::Trig(p) => format!("trig(degree {})", p.degree),
            Self::Sampled(s) => s.name.clone(),
        }
    }

    pub fn as_trig(&self) -> Option<&TrigPoly> {
        match self {
            Self::Trig(p) => Some(p),
            Self::Sampled(_) => None,
        }
    }

    pub fn eval(&self, z: C64) -> Result<C64> {
        check_unimodular(z)?;
        Ok(match self {
            Self::Trig(p) => p.eval(z),
            Self::Sampled(s) => (s.value)(angle_pm_pi(z)),
        })
    }

    /// `g(θ) = f(e^{iθ})`.
    pub fn eval_angle(&self, theta: f64) -> C64 {
        match self {
            Self::Trig(p) => p.eval(cis(theta)),
            Self::Sampled(s) => (s.value)(angle_pm_pi(cis(theta))),
        }
    }

    /// Complex derivative `f'(z)` on the circle.
    pub fn derivative(&self, z: C64) -> Result<C64> {
        check_unimodular(z)?;
        match self {
            Self::Trig(p) => Ok(p.derivative(z)),
            Self::Sampled(s) => {
                let theta = angle_pm_pi(z);
                let gp = (s.derivative)(theta).ok_or(Error::NotDifferentiable { theta })?;
                // g'(θ) = i z f'(z)
                Ok(gp / (c(0.0, 1.0) * z))
            }
        }
    }

    /// `g'(θ) = i e^{iθ} f'(e^{iθ})`.
    pub fn derivative_angle(&self, theta: f64) -> Result<C64> {
        match self {
            Self::Trig(p) => {
                let z = cis(theta);
                Ok(c(0.0, 1.0) * z * p.derivative(z))
            }
            Self::Sampled(s) => {
                let t = angle_pm_pi(cis(theta));
                (s.derivative)(t).ok_or(Error::NotDifferentiable { theta: t })
            }
        }
    }

    /// `(f(z) − f(w))/(z − w)`, extended by `f'` on the diagonal.
    pub fn divided_difference(&self, z: C64, w: C64) -> Result<C64> {
        check_unimodular(z)?;
        check_unimodular(w)?;
        match self {
            Self::Trig(p) => Ok(p.divided_difference(z, w)),
            Self::Sampled(s) => {
                let gap = (z - w).norm();
                let use_quotient = if s.kinks.is_empty() {
                    gap >= DELTA_SWITCH
                } else {
                    z != w
                };
                if use_quotient {
                    let fz = (s.value)(angle_pm_pi(z));
                    let fw = (s.value)(angle_pm_pi(w));
                    Ok((fz - fw) / (z - w))
                } else {
                    let mid = z + w;
                    let m = if mid.norm() > 0.0 { mid / mid.norm() } else { z };
                    self.derivative(m)
                }
            }
        }
    }

    /// `f_ζ(z) = f(ζz)`.
    pub fn rotated(&self, zeta: C64) -> Result<Self> {
        check_unimodular(zeta)?;
        Ok(match self {
            Self::Trig(p) => Self::Trig(p.rotated(zeta)),
            Self::Sampled(s) => {
                let phi = angle_pm_pi(zeta);
                let value = s.value.clone();
                let deriv = s.derivative.clone();
                let kinks = s.kinks.iter().map(|k| wrap_kink(k - phi)).collect();
                Self::Sampled(SampledCircle {
                    name: format!("{}@{phi}", s.name),
                    value: Arc::new(move |t| value(angle_pm_pi(cis(t + phi)))),
                    derivative: Arc::new(move |t| deriv(angle_pm_pi(cis(t + phi)))),
                    lipschitz: s.lipschitz,
                    kinks,
                })
            }
        })
    }

    /// Parses a named built-in: `z^n`, `abs-theta`, `cos`, `sawtooth` or
    /// `sawtooth:m` (Fourier terms, default 8).
    pub fn builtin(spec: &str) -> Result<Self> {
        let s = spec.trim();
        if let Some(p) = s.strip_prefix("z^") {
            let k: i32 = p
                .parse()
                .map_err(|_| Error::Parse(format!("bad exponent in function spec {spec:?}")))?;
            return Ok(Self::monomial(k));
        }
        match s {
            "abs-theta" => Ok(Self::abs_theta()),
            "cos" => Ok(Self::cos()),
            "sawtooth" => Ok(Self::sawtooth(8)),
            _ => {
                if let Some(m) = s.strip_prefix("sawtooth:") {
                    let terms: usize = m
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad term count in {spec:?}")))?;
                    return Ok(Self::sawtooth(terms));
                }
                Err(Error::Parse(format!("unknown function {spec:?}")))
            }
        }
    }

    pub fn to_json(&self) -> Result<TrigPolyJson> {
        match self {
            Self::Trig(p) => Ok(TrigPolyJson {
                degree: p.degree,
                coeffs_re: p.coeffs.iter().map(|z| z.re).collect(),
                coeffs_im: p.coeffs.iter().map(|z| z.im).collect(),
            }),
            Self::Sampled(s) => Err(Error::InvalidArgument(format!(
                "{} is not a trigonometric polynomial",
                s.name
            ))),
        }
    }
}

fn wrap_kink(t: f64) -> f64 {
    angle_pm_pi(cis(t))
}

impl SampledCircle {
    fn consistency_check(&self) -> Result<()> {
        let h = 1e-6;
        let tol = 1e-4 * (1.0 + self.lipschitz);
        for k in 0..64 {
            let t = -PI + TAU * (k as f64 + 0.37) / 64.0;
            if self.kinks.iter().any(|&q| (wrap_kink(t - q)).abs() < 10.0 * h) {
                continue;
            }
            let Some(gp) = (self.derivative)(t) else {
                continue;
            };
            let fd = ((self.value)(t + h) - (self.value)(t)) / h;
            let err = (fd - gp).norm();
            if err > tol {
                return Err(Error::Invariant {
                    kind: "CircleFunction",
                    detail: format!(
                        "derivative of {} inconsistent with finite differences at θ = {t:.6}: error {err:.3e} > {tol:.3e}",
                        self.name
                    ),
                });
            }
        }
        Ok(())
    }
}

impl ScalarFunction for CircleFunction {
    fn apply(&self, z: C64) -> Result<C64> {
        self.eval(z)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct TrigPolyJson {
    pub degree: usize,
    pub coeffs_re: Vec<f64>,
    pub coeffs_im: Vec<f64>,
}

impl TryFrom<TrigPolyJson> for CircleFunction {
    type Error = Error;

    fn try_from(j: TrigPolyJson) -> Result<Self> {
        let len = 2 * j.degree + 1;
        if j.coeffs_re.len() != len || j.coeffs_im.len() != len {
            return Err(Error::Parse(format!(
                "degree {} needs {len} coefficients, got {} real / {} imaginary",
                j.degree,
                j.coeffs_re.len(),
                j.coeffs_im.len()
            )));
        }
        let coeffs = j.coeffs_re.iter().zip(&j.coeffs_im).map(|(&a, &b)| c(a, b)).collect();
        CircleFunction::trig(coeffs)
    }
}

type LineFn = Arc<dyn Fn(f64) -> C64 + Send + Sync>;

/// A function on the real line: polynomial `Σ a_k x^k` or a sampled pair.
#[derive(Clone)]
pub enum LineFunction {
    Poly(Vec<C64>),
    Sampled { name: String, value: LineFn, derivative: LineFn },
}

impl fmt::Debug for LineFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Poly(a) => f.debug_tuple("Poly").field(a).finish(),
            Self::Sampled { name, .. } => f.debug_struct("Sampled").field("name", name).finish(),
        }
    }
}

impl LineFunction {
    pub fn polynomial(coeffs: Vec<C64>) -> Self {
        Self::Poly(coeffs)
    }

    /// `f(x) = x^k`.
    pub fn power(k: usize) -> Self {
        let mut a = vec![c(0.0, 0.0); k + 1];
        a[k] = c(1.0, 0.0);
        Self::Poly(a)
    }

    /// A sampled model, checked against central differences on `[lo, hi]`.
    pub fn sampled<G, D>(name: &str, g: G, g_prime: D, lo: f64, hi: f64) -> Result<Self>
    where
        G: Fn(f64) -> C64 + Send + Sync + 'static,
        D: Fn(f64) -> C64 + Send + Sync + 'static,
    {
        let h = 1e-6;
        for k in 0..33 {
            let x = lo + (hi - lo) * k as f64 / 32.0;
            let fd = (g(x + h) - g(x - h)) / (2.0 * h);
            let d = g_prime(x);
            let tol = 1e-5 * (1.0 + d.norm());
            if (fd - d).norm() > tol {
                return Err(Error::Invariant {
                    kind: "LineFunction",
                    detail: format!("derivative of {name} inconsistent with finite differences at x = {x}"),
                });
            }
        }
        Ok(Self::Sampled {
            name: name.into(),
            value: Arc::new(g),
            derivative: Arc::new(g_prime),
        })
    }

    pub fn eval(&self, x: f64) -> C64 {
        match self {
            Self::Poly(a) => a.iter().rev().fold(c(0.0, 0.0), |acc, &ak| acc * x + ak),
            Self::Sampled { value, .. } => value(x),
        }
    }

    pub fn derivative(&self, x: f64) -> C64 {
        match self {
            Self::Poly(a) => a
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(c(0.0, 0.0), |acc, (k, &ak)| acc * x + ak * k as f64),
            Self::Sampled { derivative, .. } => derivative(x),
        }
    }

    pub fn divided_difference(&self, x: f64, y: f64) -> C64 {
        match self {
            Self::Poly(a) => {
                let mut total = c(0.0, 0.0);
                for (k, &ak) in a.iter().enumerate().skip(1) {
                    let mut s = 0.0;
                    let mut j = 0;
                    while 2 * j + 1 < k {
                        s += x.powi(j as i32) * y.powi((k - 1 - j) as i32)
                            + y.powi(j as i32) * x.powi((k - 1 - j) as i32);
                        j += 1;
                    }
                    if k % 2 == 1 {
                        let m = ((k - 1) / 2) as i32;
                        s += x.powi(m) * y.powi(m);
                    }
                    total += ak * s;
                }
                total
            }
            Self::Sampled { value, derivative, .. } => {
                if (x - y).abs() >= DELTA_SWITCH * (1.0 + x.abs().max(y.abs())) {
                    (value(x) - value(y)) / (x - y)
                } else {
                    derivative(0.5 * (x + y))
                }
            }
        }
    }
}

impl ScalarFunction for LineFunction {
    fn apply(&self, z: C64) -> Result<C64> {
        Ok(self.eval(z.re))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn eval_examples() {
        let sq = CircleFunction::monomial(2);
        assert!(close(sq.eval(c(0.0, 1.0)).unwrap(), c(-1.0, 0.0), 1e-15));
        let abs = CircleFunction::abs_theta();
        assert!(close(abs.eval(cis(PI / 2.0)).unwrap(), c(PI / 2.0, 0.0), 1e-15));
        let two_cos = CircleFunction::trig(vec![c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!(close(two_cos.eval(cis(PI / 3.0)).unwrap(), c(1.0, 0.0), 1e-15));
    }

    #[test]
    fn eval_rejects_off_circle() {
        assert!(CircleFunction::monomial(1).eval(c(1.1, 0.0)).is_err());
    }

    #[test]
    fn divided_difference_examples() {
        let z = CircleFunction::monomial(1);
        assert!(close(z.divided_difference(cis(0.3), cis(2.0)).unwrap(), c(1.0, 0.0), 1e-15));
        let sq = CircleFunction::monomial(2);
        assert!(close(sq.divided_difference(c(1.0, 0.0), c(0.0, 1.0)).unwrap(), c(1.0, 1.0), 1e-15));
        let cube = CircleFunction::monomial(3);
        let p = cis(PI / 4.0);
        assert!(close(cube.divided_difference(p, p).unwrap(), c(0.0, 3.0), 1e-14));
    }

    #[test]
    fn negative_powers_match_quotient() {
        for k in 1..6 {
            let f = CircleFunction::monomial(-k);
            let (z, w) = (cis(0.4), cis(2.3));
            let q = (z.powi(-k) - w.powi(-k)) / (z - w);
            assert!(close(f.divided_difference(z, w).unwrap(), q, 1e-13), "k = {k}");
            let d = f.divided_difference(z, z).unwrap();
            assert!(close(d, z.powi(-k - 1) * -(k as f64), 1e-13));
        }
    }

    #[test]
    fn derivative_angle_examples() {
        assert!(close(CircleFunction::monomial(1).derivative_angle(0.0).unwrap(), c(0.0, 1.0), 1e-15));
        assert!(close(CircleFunction::monomial(2).derivative_angle(PI / 2.0).unwrap(), c(0.0, -2.0), 1e-14));
        let two_cos = CircleFunction::trig(vec![c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!(close(two_cos.derivative_angle(PI / 3.0).unwrap(), c(-(3f64.sqrt()), 0.0), 1e-14));
    }

    #[test]
    fn abs_theta_not_differentiable_at_zero() {
        let f = CircleFunction::abs_theta();
        assert!(matches!(f.derivative_angle(0.0), Err(Error::NotDifferentiable { .. })));
        assert!(matches!(
            f.divided_difference(c(1.0, 0.0), c(1.0, 0.0)),
            Err(Error::NotDifferentiable { .. })
        ));
        // Raw quotient for distinct points, however close.
        let (z, w) = (cis(1e-10), cis(-1e-10));
        let q = f.divided_difference(z, w).unwrap();
        assert!(q.norm() < 1e-3, "symmetric points give |θ| equal, quotient ≈ 0: {q}");
        assert!(close(f.derivative_angle(1.0).unwrap(), c(1.0, 0.0), 0.0));
    }

    #[test]
    fn sampled_consistency_check() {
        let ok = CircleFunction::sampled("sin", |t| c(t.sin(), 0.0), |t| c(t.cos(), 0.0), 1.0);
        assert!(ok.is_ok());
        let bad = CircleFunction::sampled("sin", |t| c(t.sin(), 0.0), |t| c(2.0 * t.cos(), 0.0), 1.0);
        assert!(matches!(bad, Err(Error::Invariant { .. })));
    }

    #[test]
    fn sampled_switches_to_derivative_near_diagonal() {
        let f = CircleFunction::sampled("cos", |t| c(t.cos(), 0.0), |t| c(-t.sin(), 0.0), 1.0).unwrap();
        let exact = CircleFunction::cos();
        let z = cis(0.7);
        let w = cis(0.7 + 1e-9);
        let got = f.divided_difference(z, w).unwrap();
        let want = exact.divided_difference(z, w).unwrap();
        assert!(close(got, want, 1e-8), "{got} vs {want}");
    }

    #[test]
    fn builtins_parse() {
        assert!(matches!(CircleFunction::builtin("z^3"), Ok(CircleFunction::Trig(_))));
        assert!(matches!(CircleFunction::builtin("z^-2"), Ok(CircleFunction::Trig(_))));
        assert!(matches!(CircleFunction::builtin("abs-theta"), Ok(CircleFunction::Sampled(_))));
        assert!(CircleFunction::builtin("cos").is_ok());
        assert!(CircleFunction::builtin("sawtooth:5").is_ok());
        assert!(CircleFunction::builtin("tan").is_err());
    }

    #[test]
    fn sawtooth_approximates_identity() {
        let f = CircleFunction::sawtooth(200);
        let v = f.eval_angle(1.0);
        assert!((v.re - 1.0).abs() < 0.02 && v.im.abs() < 1e-12, "{v}");
    }

    #[test]
    fn rotation_composes() {
        let f = CircleFunction::trig(vec![c(0.3, 0.1), c(1.0, 0.0), c(0.0, -2.0), c(0.5, 0.5), c(0.2, 0.0)]).unwrap();
        let zeta = cis(0.9);
        let g = f.rotated(zeta).unwrap();
        let t = cis(2.1);
        assert!(close(g.eval(t).unwrap(), f.eval(zeta * t).unwrap(), 1e-14));
        let a = CircleFunction::abs_theta().rotated(zeta).unwrap();
        assert!(close(a.eval(t).unwrap(), CircleFunction::abs_theta().eval(zeta * t).unwrap(), 1e-14));
    }

    #[test]
    fn json_round_trip() {
        let f = CircleFunction::sawtooth(3);
        let j = f.to_json().unwrap();
        let s = serde_json::to_string(&j).unwrap();
        let back: TrigPolyJson = serde_json::from_str(&s).unwrap();
        let g = CircleFunction::try_from(back).unwrap();
        assert_eq!(f.as_trig(), g.as_trig());
    }

    #[test]
    fn line_function_divided_differences() {
        let sq = LineFunction::power(2);
        assert!(close(sq.divided_difference(1.5, -0.5), c(1.0, 0.0), 1e-15));
        let cube = LineFunction::power(3);
        assert!(close(cube.divided_difference(2.0, 2.0), c(12.0, 0.0), 1e-14));
        assert!(close(cube.derivative(2.0), c(12.0, 0.0), 1e-14));
        let exp = LineFunction::sampled("exp", |x| c(x.exp(), 0.0), |x| c(x.exp(), 0.0), -2.0, 2.0).unwrap();
        let q = exp.divided_difference(0.3, 0.3 + 1e-12);
        assert!(close(q, c(0.3f64.exp(), 0.0), 1e-10));
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    fn trig_poly() -> impl Strategy<Value = TrigPoly> {
        (0usize..=8).prop_flat_map(|d| {
            prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2 * d + 1)
                .prop_map(|v| TrigPoly::new(v.into_iter().map(|(a, b)| c(a, b)).collect()).unwrap())
        })
    }

    proptest! {
        #[test]
        fn symmetric_bitwise(p in trig_poly(), a in -PI..PI, b in -PI..PI) {
            let (z, w) = (cis(a), cis(b));
            prop_assert_eq!(p.divided_difference(z, w), p.divided_difference(w, z));
        }

        #[test]
        fn exact_division_matches_quotient(p in trig_poly(), a in -PI..PI, b in -PI..PI) {
            let (z, w) = (cis(a), cis(b));
            prop_assume!((z - w).norm() >= 1e-6);
            let q = (p.eval(z) - p.eval(w)) / (z - w);
            let d = p.degree().max(1) as f64;
            // Quotient roundoff grows like eps·|f|/|z − w|.
            let scale = p.coeffs().iter().map(|c| c.norm()).sum::<f64>();
            let tol = 1e-12 * d * d + 4.0 * f64::EPSILON * scale / (z - w).norm();
            prop_assert!((p.divided_difference(z, w) - q).norm() <= tol);
        }

        #[test]
        fn diagonal_limit_is_linear(p in trig_poly(), a in -PI..PI) {
            let z = cis(a);
            let fp = p.derivative(z);
            let errs: Vec<f64> = [1e-2, 1e-3, 1e-4]
                .iter()
                .map(|&h| (p.divided_difference(z, z * cis(h)) - fp).norm())
                .collect();
            let d = p.degree() as f64;
            let scale = p.coeffs().iter().map(|c| c.norm()).sum::<f64>();
            // |Дf(z, ze^{ih}) − f'(z)| ≤ h·sup|f''|/2 ≤ h·d²·Σ|c_k|.
            for (e, h) in errs.iter().zip([1e-2, 1e-3, 1e-4]) {
                prop_assert!(*e <= h * (d + 1.0) * (d + 1.0) * scale + 1e-13);
            }
        }
    }
}
