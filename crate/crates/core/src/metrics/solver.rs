//! Multistart ratio ascent for sup N(x)/L(x) over Hermitian x ∈ M_s(𝒳).
//!
//! N and L are convex and positively homogeneous, so the ratio is scale free and
//! the search runs on the unit sphere of a real chart transverse to ker L.
//! Values are attained ratios, hence lower bounds on the supremum.

use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::rng::child_rng;
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Certificate {
    Exact,
    UpperBound,
    LowerBound,
}

impl std::fmt::Display for Certificate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Certificate::Exact => "exact",
            Certificate::UpperBound => "upper_bound",
            Certificate::LowerBound => "lower_bound",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    pub value: f64,
    /// Amplification level the report refers to.
    pub level: usize,
    pub certificate: Certificate,
    pub iterations: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Best ratio of the winning restart, every 10 iterations.
    pub residual_history: Vec<f64>,
    /// Set when a kernel witness shows the supremum is +∞; `value` is then the witness ratio.
    pub infinite: bool,
    /// The winning ascent ended stationary: its last fifth gained under 1e-3 relative,
    /// or the pattern search shrank its step below tolerance.
    pub converged: bool,
    /// Restarts whose value is within 1e-3 relative of the best. The ratio is
    /// maximized over a convex body and is typically multimodal, so disagreement
    /// between restarts does not by itself indicate an unfinished ascent.
    pub agreeing_restarts: usize,
    /// Brute-force grid value when the oracle ran.
    pub oracle_value: Option<f64>,
}

impl SolverReport {
    pub fn trivial(seed: u64) -> Self {
        Self {
            value: 0.0,
            level: 1,
            certificate: Certificate::Exact,
            iterations: 0,
            restarts: 0,
            seed,
            residual_history: Vec::new(),
            infinite: false,
            converged: true,
            agreeing_restarts: 0,
            oracle_value: None,
        }
    }

    pub fn infinite(witness: f64, seed: u64) -> Self {
        Self { value: witness, certificate: Certificate::LowerBound, infinite: true, ..Self::trivial(seed) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub restarts: usize,
    pub iterations: usize,
    /// Compass polish of the best point when the free dimension is at most this.
    pub polish_max_dim: usize,
    /// Run the grid oracle when the free dimension is at most 6.
    pub oracle: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { restarts: 8, iterations: 500, polish_max_dim: 64, oracle: false }
    }
}

impl SolverOptions {
    pub fn quick() -> Self {
        Self { restarts: 4, iterations: 120, polish_max_dim: 24, oracle: false }
    }
}

/// Largest free dimension handled by the grid oracle.
pub const ORACLE_MAX_DIM: usize = 6;

/// Real coordinates of Hermitian elements of M_s(𝒳) in complex coordinates
/// c_{(i·s+j)·m+k}: one real parameter per diagonal coefficient and (Re, Im) per
/// strictly upper coefficient, the lower half following by conjugation.
#[derive(Clone, Debug)]
pub struct HermitianChart {
    level: usize,
    sys_dim: usize,
    /// Orthonormal real directions spanning the Hermitian part of ker L.
    kernel: Vec<Vec<f64>>,
}

impl HermitianChart {
    pub fn new(level: usize, sys_dim: usize) -> Self {
        Self { level, sys_dim, kernel: Vec::new() }
    }

    /// Adds kernel elements given by complex coordinates; their Hermitian and
    /// anti-Hermitian parts are orthonormalized into the kernel directions.
    pub fn with_kernel(mut self, elements: &[Vec<C64>]) -> Self {
        let s = self.level;
        let m = self.sys_dim;
        let i = Complex::new(0.0, 1.0);
        for c in elements {
            let adj = |idx: usize| {
                let (ij, k) = (idx / m, idx % m);
                let (a, b) = (ij / s, ij % s);
                c[(b * s + a) * m + k].conj()
            };
            let re: Vec<C64> = (0..c.len()).map(|idx| (c[idx] + adj(idx)) * 0.5).collect();
            let im: Vec<C64> = (0..c.len()).map(|idx| (c[idx] - adj(idx)) / (i * 2.0)).collect();
            for h in [re, im] {
                let mut v = self.params(&h);
                self.project(&mut v);
                let n = norm(&v);
                if n > 1e-9 {
                    v.iter_mut().for_each(|x| *x /= n);
                    self.kernel.push(v);
                }
            }
        }
        self
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn dim(&self) -> usize {
        self.level * self.level * self.sys_dim
    }

    pub fn free_dim(&self) -> usize {
        self.dim() - self.kernel.len()
    }

    pub fn kernel_dim(&self) -> usize {
        self.kernel.len()
    }

    fn layout(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let s = self.level;
        (0..s).flat_map(move |a| (a..s).map(move |b| (a, b)))
    }

    pub fn coeffs(&self, theta: &[f64]) -> Vec<C64> {
        let (s, m) = (self.level, self.sys_dim);
        let mut c = vec![C64::new(0.0, 0.0); s * s * m];
        let mut t = 0;
        for (a, b) in self.layout() {
            for k in 0..m {
                if a == b {
                    c[(a * s + a) * m + k] = Complex::new(theta[t], 0.0);
                    t += 1;
                } else {
                    let z = Complex::new(theta[t], theta[t + 1]);
                    c[(a * s + b) * m + k] = z;
                    c[(b * s + a) * m + k] = z.conj();
                    t += 2;
                }
            }
        }
        c
    }

    /// Inverse of [`coeffs`](Self::coeffs) on Hermitian coordinates.
    pub fn params(&self, c: &[C64]) -> Vec<f64> {
        let (s, m) = (self.level, self.sys_dim);
        let mut theta = Vec::with_capacity(self.dim());
        for (a, b) in self.layout() {
            for k in 0..m {
                let z = c[(a * s + b) * m + k];
                if a == b {
                    theta.push(z.re);
                } else {
                    theta.push(z.re);
                    theta.push(z.im);
                }
            }
        }
        theta
    }

    /// Real gradient from a complex one with dF = Re Σ conj(g)·dc.
    pub fn pull_back(&self, g: &[C64]) -> Vec<f64> {
        let (s, m) = (self.level, self.sys_dim);
        let mut out = Vec::with_capacity(self.dim());
        for (a, b) in self.layout() {
            for k in 0..m {
                let up = g[(a * s + b) * m + k];
                if a == b {
                    out.push(up.re);
                } else {
                    let low = g[(b * s + a) * m + k];
                    out.push(up.re + low.re);
                    out.push(up.im - low.im);
                }
            }
        }
        out
    }

    /// Removes kernel components.
    pub fn project(&self, v: &mut [f64]) {
        for k in &self.kernel {
            let d: f64 = v.iter().zip(k).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(k).for_each(|(a, b)| *a -= d * b);
        }
    }

    /// Orthonormal basis of the kernel complement.
    pub fn complement_basis(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(self.free_dim());
        for i in 0..n {
            let mut v = vec![0.0; n];
            v[i] = 1.0;
            self.project(&mut v);
            for b in &basis {
                let d: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
            }
            let nv = norm(&v);
            if nv > 1e-8 {
                v.iter_mut().for_each(|x| *x /= nv);
                basis.push(v);
            }
        }
        basis
    }

    pub fn random_direction(&self, rng: &mut (impl Rng + ?Sized)) -> Vec<f64> {
        loop {
            let mut v: Vec<f64> = (0..self.dim()).map(|_| rng.sample(StandardNormal)).collect();
            self.project(&mut v);
            let n = norm(&v);
            if n > 1e-12 {
                v.iter_mut().for_each(|x| *x /= n);
                return v;
            }
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Objective pair for [`maximize_ratio`]. Gradients are complex coordinate vectors g
/// with dF = Re Σ conj(g)·dc; for N a supergradient suffices, for L a subgradient.
pub trait RatioObjective: Sync {
    /// Per-restart scratch state (e.g. a warm start for an inner minimization).
    type Warm: Default + Send;

    fn numerator(&self, c: &[C64], warm: &mut Self::Warm) -> (f64, Vec<C64>);

    fn denominator(&self, c: &[C64]) -> (f64, Vec<C64>);

    /// Numerator used for reported values; defaults to [`numerator`](Self::numerator).
    fn final_numerator(&self, c: &[C64], warm: &mut Self::Warm) -> f64 {
        self.numerator(c, warm).0
    }
}

struct RestartResult {
    value: f64,
    theta: Vec<f64>,
    history: Vec<f64>,
    iterations: usize,
}

fn ratio_at<O: RatioObjective>(obj: &O, chart: &HermitianChart, theta: &[f64], warm: &mut O::Warm) -> f64 {
    let c = chart.coeffs(theta);
    let (l, _) = obj.denominator(&c);
    if l <= 1e-300 {
        return 0.0;
    }
    obj.numerator(&c, warm).0 / l
}

fn final_ratio<O: RatioObjective>(obj: &O, chart: &HermitianChart, theta: &[f64], warm: &mut O::Warm) -> f64 {
    let c = chart.coeffs(theta);
    let (l, _) = obj.denominator(&c);
    if l <= 1e-300 {
        return 0.0;
    }
    obj.final_numerator(&c, warm) / l
}

fn ascend<O: RatioObjective>(
    obj: &O,
    chart: &HermitianChart,
    opts: &SolverOptions,
    seed: u64,
    r: usize,
    start: Option<&[f64]>,
) -> RestartResult {
    let mut rng = child_rng(seed, r as u64);
    let mut warm = O::Warm::default();
    let mut theta = match start {
        Some(t) => {
            let mut v = t.to_vec();
            chart.project(&mut v);
            let n = norm(&v);
            if n > 1e-12 {
                v.iter_mut().for_each(|x| *x /= n);
                v
            } else {
                chart.random_direction(&mut rng)
            }
        }
        None => chart.random_direction(&mut rng),
    };
    let mut best = RestartResult { value: 0.0, theta: theta.clone(), history: Vec::new(), iterations: 0 };
    for t in 1..=opts.iterations {
        best.iterations = t;
        let c = chart.coeffs(&theta);
        let (l, gl) = obj.denominator(&c);
        if l <= 1e-300 {
            theta = chart.random_direction(&mut rng);
            continue;
        }
        let (n, gn) = obj.numerator(&c, &mut warm);
        let ratio = n / l;
        if ratio > best.value {
            best.value = ratio;
            best.theta = theta.clone();
        }
        if t % 10 == 0 {
            best.history.push(best.value);
        }
        let pn = chart.pull_back(&gn);
        let pl = chart.pull_back(&gl);
        let mut grad: Vec<f64> = pn.iter().zip(&pl).map(|(a, b)| (a - ratio * b) / l).collect();
        chart.project(&mut grad);
        let gnorm = norm(&grad);
        if gnorm < 1e-14 {
            break;
        }
        let step = 0.3 / (t as f64).sqrt() / gnorm;
        theta.iter_mut().zip(&grad).for_each(|(x, g)| *x += step * g);
        let tn = norm(&theta);
        theta.iter_mut().for_each(|x| *x /= tn);
    }
    best.history.push(best.value);
    best
}

/// Coordinate pattern search along the complement basis.
fn polish<O: RatioObjective>(obj: &O, chart: &HermitianChart, theta: &mut Vec<f64>, value: &mut f64, warm: &mut O::Warm) -> (usize, bool) {
    let basis = chart.complement_basis();
    let mut h = 0.1;
    let mut evals = 0;
    let budget = 400 * basis.len().max(1);
    while h > 1e-9 && evals < budget {
        let mut improved = false;
        for b in &basis {
            for sign in [1.0, -1.0] {
                let cand: Vec<f64> = theta.iter().zip(b).map(|(x, y)| x + sign * h * y).collect();
                let r = ratio_at(obj, chart, &cand, warm);
                evals += 1;
                if r > *value * (1.0 + 1e-14) {
                    *value = r;
                    *theta = cand;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            h *= 0.5;
        }
    }
    (evals, h <= 1e-9)
}

/// Exhaustive grid on the boundary of the unit cube in complement coordinates,
/// followed by shrinking local grids around the best point.
pub fn grid_oracle<O: RatioObjective>(obj: &O, chart: &HermitianChart) -> (f64, Vec<f64>) {
    let basis = chart.complement_basis();
    let p = basis.len();
    assert!((1..=ORACLE_MAX_DIM).contains(&p), "grid oracle needs 1..=6 free dimensions, got {p}");
    let res: usize = match p {
        1 => 2,
        2 => 200,
        3 => 40,
        4 => 14,
        _ => 7,
    };
    let embed = |a: &[f64]| -> Vec<f64> {
        let mut v = vec![0.0; chart.dim()];
        for (ai, b) in a.iter().zip(&basis) {
            v.iter_mut().zip(b).for_each(|(x, y)| *x += ai * y);
        }
        v
    };
    let total = (res + 1).pow(p as u32);
    let (mut best, mut best_a) = (0..total)
        .into_par_iter()
        .filter_map(|idx| {
            let mut rem = idx;
            let a: Vec<f64> = (0..p)
                .map(|_| {
                    let g = rem % (res + 1);
                    rem /= res + 1;
                    -1.0 + 2.0 * g as f64 / res as f64
                })
                .collect();
            if a.iter().all(|x| x.abs() < 1.0 - 1e-12) {
                return None;
            }
            let mut warm = O::Warm::default();
            Some((final_ratio(obj, chart, &embed(&a), &mut warm), a))
        })
        .reduce(|| (f64::NEG_INFINITY, Vec::new()), |x, y| if y.0 > x.0 { y } else { x });
    let mut h = 2.0 / res as f64;
    let local = 3usize.pow(p as u32);
    for _ in 0..60 {
        let (v, a) = (0..local)
            .into_par_iter()
            .map(|idx| {
                let mut rem = idx;
                let a: Vec<f64> = best_a
                    .iter()
                    .map(|x| {
                        let g = rem % 3;
                        rem /= 3;
                        x + h * (g as f64 - 1.0)
                    })
                    .collect();
                let mut warm = O::Warm::default();
                (final_ratio(obj, chart, &embed(&a), &mut warm), a)
            })
            .reduce(|| (f64::NEG_INFINITY, Vec::new()), |x, y| if y.0 > x.0 { y } else { x });
        if v > best {
            best = v;
            best_a = a;
        } else {
            h *= 0.5;
        }
        if h < 1e-10 {
            break;
        }
    }
    (best.max(0.0), embed(&best_a))
}

/// Maximizes N/L over the chart. Returns the report and the maximizing parameters.
pub fn maximize_ratio<O: RatioObjective>(obj: &O, chart: &HermitianChart, opts: &SolverOptions, seed: u64) -> (SolverReport, Vec<f64>) {
    maximize_ratio_from(obj, chart, opts, seed, &[])
}

/// [`maximize_ratio`] with extra restarts beginning at the given parameter vectors.
pub fn maximize_ratio_from<O: RatioObjective>(
    obj: &O,
    chart: &HermitianChart,
    opts: &SolverOptions,
    seed: u64,
    starts: &[Vec<f64>],
) -> (SolverReport, Vec<f64>) {
    if chart.free_dim() == 0 {
        return (SolverReport { level: chart.level(), ..SolverReport::trivial(seed) }, vec![0.0; chart.dim()]);
    }
    let random = opts.restarts.max(1);
    let restarts = random + starts.len();
    let runs: Vec<(f64, RestartResult)> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let start = r.checked_sub(random).map(|i| starts[i].as_slice());
            let mut res = ascend(obj, chart, opts, seed, r, start);
            let mut value = final_ratio(obj, chart, &res.theta, &mut O::Warm::default());
            // The ascent follows a surrogate, so it may leave a start that is better
            // under the exact numerator.
            if let Some(t) = start {
                let v0 = final_ratio(obj, chart, t, &mut O::Warm::default());
                if v0 > value {
                    value = v0;
                    res.theta = t.to_vec();
                }
            }
            (value, res)
        })
        .collect();
    let iterations: usize = runs.iter().map(|(_, r)| r.iterations).sum();
    let mut values: Vec<f64> = runs.iter().map(|(v, _)| *v).collect();
    values.sort_by(|a, b| b.total_cmp(a));
    let (mut value, winner) = runs.into_iter().max_by(|a, b| a.0.total_cmp(&b.0)).expect("at least one restart");
    let mut theta = winner.theta;
    let mut history = winner.history;
    let tail = history[history.len() * 4 / 5];
    let mut converged = history.last().is_some_and(|last| last - tail <= 1e-3 * last.abs() + 1e-12);
    let mut extra = 0;
    if chart.free_dim() <= opts.polish_max_dim {
        let mut warm = O::Warm::default();
        let mut surrogate = ratio_at(obj, chart, &theta, &mut warm);
        let mut cand = theta.clone();
        let (evals, settled) = polish(obj, chart, &mut cand, &mut surrogate, &mut warm);
        extra = evals;
        converged |= settled;
        let polished = final_ratio(obj, chart, &cand, &mut O::Warm::default());
        if polished > value {
            value = polished;
            theta = cand;
        }
        history.push(value);
    }
    let agreeing_restarts = values.iter().filter(|v| **v >= values[0] * (1.0 - 1e-3) - 1e-12).count();
    let mut report = SolverReport {
        value,
        level: chart.level(),
        certificate: Certificate::LowerBound,
        iterations: iterations + extra,
        restarts,
        seed,
        residual_history: history,
        infinite: false,
        converged,
        agreeing_restarts,
        oracle_value: None,
    };
    if opts.oracle && chart.free_dim() <= ORACLE_MAX_DIM {
        let (ov, otheta) = grid_oracle(obj, chart);
        report.oracle_value = Some(ov);
        report.certificate = Certificate::Exact;
        if ov > report.value {
            report.value = ov;
            theta = otheta;
        }
    }
    (report, theta)
}
