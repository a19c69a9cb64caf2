//! Globally adaptive Gauss–Kronrod (10/21-point) quadrature with mappings
//! for the half line `[0, ∞)` and for integrable power singularities at 0.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// How the infinite upper limit is handled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UpperLimitPolicy {
    /// Map the tail `[p, ∞)` onto `[0, 1)` with `x = p + s·t/(1−t)`.
    TransformToFinite,
    /// Cut the integral at `multiple × scale`. Diagnostics only.
    Truncate { multiple: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    pub upper_limit: UpperLimitPolicy,
}

impl QuadratureSpec {
    pub fn new(
        rel_tol: f64,
        abs_tol: f64,
        max_subdivisions: usize,
        upper_limit: UpperLimitPolicy,
    ) -> Result<Self> {
        let spec = QuadratureSpec {
            rel_tol,
            abs_tol,
            max_subdivisions,
            upper_limit,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Result<Self> {
        self.rel_tol = rel_tol;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol >= 1e-12 && self.rel_tol < 1.0) {
            return Err(Error::domain("QuadratureSpec", format!("rel_tol {} not in [1e-12, 1)", self.rel_tol)));
        }
        if !(self.abs_tol > 0.0) {
            return Err(Error::domain("QuadratureSpec", "abs_tol must be > 0"));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::domain("QuadratureSpec", "max_subdivisions must be positive"));
        }
        if let UpperLimitPolicy::Truncate { multiple } = self.upper_limit {
            if !(multiple >= 30.0) {
                return Err(Error::domain("QuadratureSpec", format!("truncation multiple {multiple} < 30")));
            }
        }
        Ok(())
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            rel_tol: 1e-10,
            abs_tol: 1e-300,
            max_subdivisions: 5000,
            upper_limit: UpperLimitPolicy::TransformToFinite,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

/// Description of a `[0, ∞)` integration domain.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfLine {
    /// Interior points where the integrand changes character.
    pub breakpoints: Vec<f64>,
    /// Length scale of the tail decay.
    pub scale: f64,
    /// If the integrand behaves like `x^(p−1)` near 0 with `p < 1`, the first
    /// panel is integrated in the variable `u = x^p`.
    pub head_power: Option<f64>,
}

#[derive(Debug, Clone, Copy)]
enum Segment {
    Linear,
    // x = end · u^(1/p), u ∈ [0, 1]
    Power { end: f64, p: f64 },
    // x = origin + scale · u/(1−u), u ∈ [0, 1)
    Tail { origin: f64, scale: f64 },
}

impl Segment {
    fn map(&self, u: f64) -> (f64, f64) {
        match *self {
            Segment::Linear => (u, 1.0),
            Segment::Power { end, p } => {
                let e = 1.0 / p;
                (end * u.powf(e), end * e * u.powf(e - 1.0))
            }
            Segment::Tail { origin, scale } => {
                let w = 1.0 - u;
                (origin + scale * u / w, scale / (w * w))
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    seg: usize,
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// ∫ₐᵇ f(x) dx.
pub fn integrate<F>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Estimate>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::domain("integrate", "finite limits required"));
    }
    if a == b {
        return Ok(Estimate { value: 0.0, error: 0.0, evaluations: 0 });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut est = adaptive(f, &[(Segment::Linear, lo, hi)], spec)?;
    est.value *= sign;
    Ok(est)
}

/// ∫₀ˣ f(t) dt where f(t) ~ t^(p−1) near 0 for some p > 0.
pub fn integrate_from_zero<F>(f: F, x: f64, head_power: Option<f64>, spec: &QuadratureSpec) -> Result<Estimate>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(x >= 0.0 && x.is_finite()) {
        return Err(Error::domain("integrate_from_zero", format!("upper limit {x} invalid")));
    }
    if x == 0.0 {
        return Ok(Estimate { value: 0.0, error: 0.0, evaluations: 0 });
    }
    let seg = match head_power {
        Some(p) if p > 0.0 && p < 1.0 => (Segment::Power { end: x, p }, 0.0, 1.0),
        _ => (Segment::Linear, 0.0, x),
    };
    adaptive(f, &[seg], spec)
}

/// ∫₀^∞ f(x) dx.
pub fn integrate_half_line<F>(f: F, domain: &HalfLine, spec: &QuadratureSpec) -> Result<Estimate>
where
    F: FnMut(f64) -> Result<f64>,
{
    spec.validate()?;
    if !(domain.scale > 0.0 && domain.scale.is_finite()) {
        return Err(Error::domain("integrate_half_line", "scale must be finite and > 0"));
    }
    let mut points: Vec<f64> = domain
        .breakpoints
        .iter()
        .copied()
        .filter(|p| p.is_finite() && *p > 0.0)
        .collect();
    points.sort_by(f64::total_cmp);
    points.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());
    if points.is_empty() {
        points.push(domain.scale);
    }

    let mut segments = Vec::with_capacity(points.len() + 1);
    let first = points[0];
    match domain.head_power {
        Some(p) if p > 0.0 && p < 1.0 => segments.push((Segment::Power { end: first, p }, 0.0, 1.0)),
        _ => segments.push((Segment::Linear, 0.0, first)),
    }
    for w in points.windows(2) {
        segments.push((Segment::Linear, w[0], w[1]));
    }
    let last = *points.last().unwrap();
    match spec.upper_limit {
        UpperLimitPolicy::TransformToFinite => segments.push((
            Segment::Tail {
                origin: last,
                scale: domain.scale,
            },
            0.0,
            1.0,
        )),
        UpperLimitPolicy::Truncate { multiple } => {
            let end = multiple * domain.scale;
            if end > last {
                segments.push((Segment::Linear, last, end));
            }
        }
    }
    adaptive(f, &segments, spec)
}

fn adaptive<F>(mut f: F, segments: &[(Segment, f64, f64)], spec: &QuadratureSpec) -> Result<Estimate>
where
    F: FnMut(f64) -> Result<f64>,
{
    spec.validate()?;
    let mut evaluations = 0usize;
    let mut heap = BinaryHeap::new();
    let mut settled: Vec<Panel> = Vec::new();
    for (i, &(seg, lo, hi)) in segments.iter().enumerate() {
        let (value, error) = kronrod21(&mut f, &seg, lo, hi, &mut evaluations)?;
        heap.push(Panel { seg: i, lo, hi, value, error });
    }

    let totals = |heap: &BinaryHeap<Panel>, settled: &[Panel]| {
        heap.iter()
            .chain(settled.iter())
            .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error))
    };

    let mut subdivisions = 0usize;
    loop {
        let (value, error) = totals(&heap, &settled);
        let target = spec.abs_tol.max(spec.rel_tol * value.abs());
        if error <= target {
            return Ok(Estimate { value, error, evaluations });
        }
        if subdivisions >= spec.max_subdivisions {
            return Err(Error::Quadrature {
                estimate: value,
                error_bound: error,
            });
        }
        let Some(worst) = heap.pop() else {
            // Every panel is at the resolution limit.
            return Err(Error::Quadrature {
                estimate: value,
                error_bound: error,
            });
        };
        let mid = 0.5 * (worst.lo + worst.hi);
        if mid <= worst.lo || mid >= worst.hi || (worst.hi - worst.lo) < 1e-14 * mid.abs().max(1e-300) {
            settled.push(worst);
            continue;
        }
        let seg = segments[worst.seg].0;
        let (v1, e1) = kronrod21(&mut f, &seg, worst.lo, mid, &mut evaluations)?;
        let (v2, e2) = kronrod21(&mut f, &seg, mid, worst.hi, &mut evaluations)?;
        heap.push(Panel { seg: worst.seg, lo: worst.lo, hi: mid, value: v1, error: e1 });
        heap.push(Panel { seg: worst.seg, lo: mid, hi: worst.hi, value: v2, error: e2 });
        subdivisions += 1;
    }
}

const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_22,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_725,
    0.054_755_896_574_351_995,
    0.075_039_674_810_919_96,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_84,
    0.134_709_217_311_473_34,
    0.142_775_938_577_060_09,
    0.147_739_104_901_338_49,
    0.149_445_554_002_916_9,
];

// Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_35,
    0.295_524_224_714_752_87,
];

fn kronrod21<F>(f: &mut F, seg: &Segment, lo: f64, hi: f64, evals: &mut usize) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut g = |u: f64| -> Result<f64> {
        *evals += 1;
        let (x, jac) = seg.map(u);
        let y = f(x)?;
        if y == 0.0 {
            return Ok(0.0);
        }
        let v = y * jac;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Range {
                op: "quadrature",
                detail: format!("integrand not finite at x = {x}"),
            })
        }
    };
    let centre = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = g(centre)?;
    let mut res_g = 0.0;
    let mut res_k = WGK[10] * fc;
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = g(centre - dx)?;
        let f2 = g(centre + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok((value, err))
}
