//! Exponential-sum surrogates `Σ δᵢ e^(−σᵢx)` and a least-squares fitter.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::noise::NoiseModel;

/// The function an [`ExpSumApprox`] stands in for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ApproxTarget {
    /// `x ↦ Q_a(√x)` for GGN shape `a`.
    QaSqrt(f64),
    /// `γ ↦ log₂(1+γ)`.
    Log2Capacity,
    /// Anything else, e.g. the output of [`fit`] on a user function.
    Custom,
}

impl ApproxTarget {
    /// Exact value of the target, when it is known.
    pub fn exact(&self, x: f64) -> Option<f64> {
        match *self {
            ApproxTarget::QaSqrt(a) => NoiseModel::new(a).ok().map(|n| n.q(x.sqrt())),
            ApproxTarget::Log2Capacity => Some(x.ln_1p() / std::f64::consts::LN_2),
            ApproxTarget::Custom => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpTerm {
    pub delta: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpSumApprox {
    terms: Vec<ExpTerm>,
    target: ApproxTarget,
}

/// Shapes with tabulated coefficients.
pub const TABULATED_SHAPES: [f64; 5] = [0.5, 1.0, 1.5, 2.0, 2.5];

// (a, δ₁..δ₄, σ₁..σ₄)
const QA_TABLE: [(f64, [f64; 4], [f64; 4]); 5] = [
    (0.5, [44.920, 126.460, 389.400, 96.54], [0.130, 2.311, 12.52, 0.629]),
    (1.0, [0.068, 0.202, 0.182, 0.255], [0.217, 2.185, 0.657, 12.640]),
    (1.5, [0.065, 0.149, 0.136, 0.125], [0.341, 0.712, 10.57, 1.945]),
    (2.0, [0.099, 0.157, 0.124, 0.119], [1.981, 0.534, 0.852, 10.268]),
    (2.5, [0.126, 1.104, -1.125, 0.442], [9.395, 0.833, 0.994, 1.292]),
];

const CAPACITY_DELTA: [f64; 4] = [9.331, -2.635, -4.032, -2.388];
const CAPACITY_SIGMA: [f64; 4] = [0.000, 0.037, 0.004, 0.274];

impl ExpSumApprox {
    pub fn new(terms: Vec<ExpTerm>, target: ApproxTarget) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::domain("ExpSumApprox", "at least one term is required"));
        }
        for t in &terms {
            if !t.delta.is_finite() || !(t.sigma >= 0.0 && t.sigma.is_finite()) {
                return Err(Error::domain(
                    "ExpSumApprox",
                    format!("invalid term delta = {}, sigma = {}", t.delta, t.sigma),
                ));
            }
        }
        Ok(ExpSumApprox { terms, target })
    }

    pub fn from_slices(delta: &[f64], sigma: &[f64], target: ApproxTarget) -> Result<Self> {
        if delta.len() != sigma.len() {
            return Err(Error::domain("ExpSumApprox", "delta and sigma lengths differ"));
        }
        let terms = delta
            .iter()
            .zip(sigma)
            .map(|(&delta, &sigma)| ExpTerm { delta, sigma })
            .collect();
        ExpSumApprox::new(terms, target)
    }

    pub fn terms(&self) -> &[ExpTerm] {
        &self.terms
    }

    pub fn target(&self) -> ApproxTarget {
        self.target
    }

    pub fn with_target(mut self, target: ApproxTarget) -> Self {
        self.target = target;
        self
    }

    /// `Σ δᵢ e^(−σᵢx)`.
    pub fn eval(&self, x: f64) -> f64 {
        self.terms.iter().map(|t| t.delta * (-t.sigma * x).exp()).sum()
    }

    /// Tabulated coefficients, as published.
    ///
    /// The `QaSqrt` rows approximate `Λ₀^(2/a−1)·Q_a(√x)`, i.e. the tail of the
    /// GGN written with the scale-only normalization; for `a = 0.5` this makes
    /// `eval(0) ≈ 657`. Use [`ExpSumApprox::preset_unit_variance`] for the
    /// unit-variance `Q_a` used everywhere else in the crate.
    pub fn preset(target: ApproxTarget) -> Result<Self> {
        match target {
            ApproxTarget::QaSqrt(a) => {
                let (_, d, s) = QA_TABLE.iter().find(|row| row.0 == a).ok_or_else(|| {
                    Error::NotAvailable(format!("no tabulated coefficients for a = {a}; use approx::fit"))
                })?;
                ExpSumApprox::from_slices(d, s, target)
            }
            ApproxTarget::Log2Capacity => ExpSumApprox::from_slices(&CAPACITY_DELTA, &CAPACITY_SIGMA, target),
            ApproxTarget::Custom => Err(Error::NotAvailable("custom targets have no preset; use approx::fit".into())),
        }
    }

    /// Tabulated `QaSqrt(a)` row rescaled by `Λ₀^(1−2/a)` so that it
    /// approximates the unit-variance `Q_a(√x)`.
    pub fn preset_unit_variance(a: f64) -> Result<Self> {
        let raw = ExpSumApprox::preset(ApproxTarget::QaSqrt(a))?;
        let l0 = NoiseModel::new(a)?.lambda0();
        let f = l0.powf(1.0 - 2.0 / a);
        let terms = raw
            .terms
            .iter()
            .map(|t| ExpTerm { delta: t.delta * f, sigma: t.sigma })
            .collect();
        ExpSumApprox::new(terms, raw.target)
    }

    /// Largest `|target(x) − eval(x)|` over `grid`.
    pub fn max_abs_residual(&self, target: impl Fn(f64) -> f64, grid: &[f64]) -> f64 {
        grid.iter()
            .map(|&x| (target(x) - self.eval(x)).abs())
            .fold(0.0, f64::max)
    }
}

/// `n` logarithmically spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n)
                .map(|i| {
                    if i == 0 {
                        lo
                    } else if i == n - 1 {
                        hi
                    } else {
                        (a + (b - a) * i as f64 / (n - 1) as f64).exp()
                    }
                })
                .collect()
        }
    }
}

/// Default fitting grid: 400 log-spaced points on `[0.01, 36]`.
pub fn default_grid() -> Vec<f64> {
    log_grid(0.01, 36.0, 400)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub starts: usize,
    pub max_iterations: usize,
    pub seed: u64,
    /// Stop when an accepted step lowers the SSE by less than this fraction.
    pub rel_improvement: f64,
    pub sigma_range: (f64, f64),
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            starts: 32,
            max_iterations: 500,
            seed: 0x5eed,
            rel_improvement: 1e-12,
            sigma_range: (0.01, 20.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub approx: ExpSumApprox,
    pub max_abs_residual: f64,
    pub sse: f64,
    pub converged: bool,
    pub iterations: usize,
    pub best_start: usize,
}

const LN_SIGMA_MIN: f64 = -13.815_510_557_964_274; // ln 1e-6
const LN_SIGMA_MAX: f64 = 6.907_755_278_982_137; // ln 1e3

/// Fit an `n_terms` exponential sum to `target` on `grid` by damped
/// Gauss–Newton (Levenberg–Marquardt) with multiple starts.
///
/// Start 0 uses `init` when given and otherwise log-spaced σ over
/// `opts.sigma_range`; the others draw σ log-uniformly from that range.
/// Amplitudes are initialized by linear least squares. The result is the
/// best start by SSE, ties broken by the lower start index.
pub fn fit<F>(
    target: F,
    grid: &[f64],
    n_terms: usize,
    init: Option<&ExpSumApprox>,
    opts: &FitOptions,
) -> Result<FitResult>
where
    F: Fn(f64) -> f64 + Sync,
{
    let op = "fit";
    if n_terms == 0 {
        return Err(Error::domain(op, "n_terms must be >= 1"));
    }
    if grid.len() < 4 * n_terms {
        return Err(Error::domain(
            op,
            format!("grid has {} points, need at least {}", grid.len(), 4 * n_terms),
        ));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) || !(grid[0] >= 0.0) || !grid[grid.len() - 1].is_finite() {
        return Err(Error::domain(op, "grid must be finite, non-negative and strictly increasing"));
    }
    if opts.starts == 0 || opts.max_iterations == 0 {
        return Err(Error::domain(op, "starts and max_iterations must be positive"));
    }
    let (slo, shi) = opts.sigma_range;
    if !(slo > 0.0 && shi > slo && shi.is_finite()) {
        return Err(Error::domain(op, "sigma_range must satisfy 0 < lo < hi"));
    }
    if let Some(a) = init {
        if a.terms.len() != n_terms {
            return Err(Error::domain(op, "init has the wrong number of terms"));
        }
    }
    let y: Vec<f64> = grid.iter().map(|&x| target(x)).collect();
    if let Some(i) = y.iter().position(|v| !v.is_finite()) {
        return Err(Error::domain(op, format!("target not finite at x = {}", grid[i])));
    }
    let problem = Problem { x: grid, y: &y };

    let results: Vec<Local> = (0..opts.starts)
        .into_par_iter()
        .map(|k| {
            let theta0 = start_theta(k, n_terms, init, opts);
            problem.solve(theta0, opts)
        })
        .collect();

    let (best_start, best) = results
        .into_iter()
        .enumerate()
        .filter(|(_, r)| r.sse.is_finite())
        .min_by(|(i, a), (j, b)| a.sse.total_cmp(&b.sse).then(i.cmp(j)))
        .ok_or_else(|| Error::domain(op, "no start produced a finite fit"))?;

    let n = n_terms;
    let terms: Vec<ExpTerm> = (0..n)
        .map(|i| ExpTerm {
            delta: best.p[i],
            sigma: best.p[n + i].exp(),
        })
        .collect();
    let approx = ExpSumApprox::new(terms, ApproxTarget::Custom)?;
    let max_abs_residual = approx.max_abs_residual(&target, grid);
    Ok(FitResult {
        approx,
        max_abs_residual,
        sse: best.sse,
        converged: best.converged,
        iterations: best.iterations,
        best_start,
    })
}

fn start_theta(k: usize, n: usize, init: Option<&ExpSumApprox>, opts: &FitOptions) -> Vec<f64> {
    let (lo, hi) = (opts.sigma_range.0.ln(), opts.sigma_range.1.ln());
    let clamp = |t: f64| t.clamp(LN_SIGMA_MIN, LN_SIGMA_MAX);
    if k == 0 {
        if let Some(a) = init {
            return a.terms.iter().map(|t| clamp(t.sigma.max(1e-6).ln())).collect();
        }
        if n == 1 {
            return vec![0.5 * (lo + hi)];
        }
        return (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(k as u64);
    let mut t: Vec<f64> = (0..n).map(|_| rng.random_range(lo..hi)).collect();
    t.sort_by(f64::total_cmp);
    t
}

struct Problem<'a> {
    x: &'a [f64],
    y: &'a [f64],
}

struct Local {
    p: Vec<f64>,
    sse: f64,
    converged: bool,
    iterations: usize,
}

impl Problem<'_> {
    fn residuals(&self, p: &[f64], n: usize) -> DVector<f64> {
        DVector::from_iterator(
            self.x.len(),
            self.x.iter().zip(self.y).map(|(&x, &y)| {
                let model: f64 = (0..n).map(|i| p[i] * (-p[n + i].exp() * x).exp()).sum();
                y - model
            }),
        )
    }

    // Jacobian of the model (not the residual) in (δ, ln σ).
    fn jacobian(&self, p: &[f64], n: usize) -> DMatrix<f64> {
        let mut j = DMatrix::zeros(self.x.len(), 2 * n);
        for (r, &x) in self.x.iter().enumerate() {
            for i in 0..n {
                let s = p[n + i].exp();
                let e = (-s * x).exp();
                j[(r, i)] = e;
                j[(r, n + i)] = -p[i] * x * s * e;
            }
        }
        j
    }

    fn linear_deltas(&self, theta: &[f64]) -> Vec<f64> {
        let n = theta.len();
        let a = DMatrix::from_fn(self.x.len(), n, |r, i| (-theta[i].exp() * self.x[r]).exp());
        let b = DVector::from_column_slice(self.y);
        match a.svd(true, true).solve(&b, 1e-12) {
            Ok(d) if d.iter().all(|v| v.is_finite()) => d.iter().copied().collect(),
            _ => vec![0.0; n],
        }
    }

    fn solve(&self, theta0: Vec<f64>, opts: &FitOptions) -> Local {
        let n = theta0.len();
        let mut p = self.linear_deltas(&theta0);
        p.extend_from_slice(&theta0);
        let mut r = self.residuals(&p, n);
        let mut sse = r.norm_squared();
        let mut lambda = 1e-3;
        let mut converged = false;
        let mut iterations = 0;

        while iterations < opts.max_iterations {
            iterations += 1;
            let j = self.jacobian(&p, n);
            let jtj = j.transpose() * &j;
            let g = j.transpose() * &r;
            if g.amax() <= 1e-15 * (1.0 + sse) {
                converged = true;
                break;
            }
            let mut accepted = false;
            while lambda < 1e16 {
                let mut a = jtj.clone();
                for d in 0..2 * n {
                    a[(d, d)] += lambda * jtj[(d, d)].max(1e-12);
                }
                let step = match a.clone().cholesky() {
                    Some(c) => c.solve(&g),
                    None => match a.lu().solve(&g) {
                        Some(s) => s,
                        None => {
                            lambda *= 10.0;
                            continue;
                        }
                    },
                };
                let mut q = p.clone();
                for (k, s) in step.iter().enumerate() {
                    q[k] += s;
                }
                for t in &mut q[n..] {
                    *t = t.clamp(LN_SIGMA_MIN, LN_SIGMA_MAX);
                }
                let rq = self.residuals(&q, n);
                let sq = rq.norm_squared();
                if sq.is_finite() && sq < sse {
                    let gain = (sse - sq) / sse.max(f64::MIN_POSITIVE);
                    p = q;
                    r = rq;
                    sse = sq;
                    lambda = (lambda / 3.0).max(1e-12);
                    accepted = true;
                    if gain < opts.rel_improvement {
                        converged = true;
                    }
                    break;
                }
                lambda *= 4.0;
            }
            if !accepted || converged {
                // A rejected step at maximal damping means a stationary point.
                converged = true;
                break;
            }
        }
        Local { p, sse, converged, iterations }
    }
}
