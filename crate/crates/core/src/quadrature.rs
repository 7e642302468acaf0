//! Globally adaptive Gauss-Kronrod quadrature for complex-valued integrands
//! of one real variable, plus Wynn's epsilon algorithm for summing the
//! partial sums of oscillatory cell integrals.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

// Gauss weights belong to the odd-indexed Kronrod nodes.
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Tolerances and limits for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            abs: 0.0,
            rel: 1e-11,
            max_intervals: 20_000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: Complex64,
    pub abs_error: f64,
    pub evaluations: usize,
}

/// One 21-point Kronrod evaluation with the embedded 10-point Gauss error.
pub fn gk21<F>(f: &F, a: f64, b: f64) -> (Complex64, f64)
where
    F: Fn(f64) -> Complex64,
{
    let (value, err, _) = gk21_full(f, a, b);
    (value, err)
}

/// As [`gk21`], also returning the Kronrod estimate of `int |f|`.
fn gk21_full<F>(f: &F, a: f64, b: f64) -> (Complex64, f64, f64)
where
    F: Fn(f64) -> Complex64,
{
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut kronrod = fc * WGK[10];
    let mut resabs = fc.norm() * WGK[10];
    let mut gauss = Complex64::new(0.0, 0.0);
    for j in 0..10 {
        let dx = half * XGK[j];
        let (lo, hi) = (f(centre - dx), f(centre + dx));
        let pair = lo + hi;
        kronrod += pair * WGK[j];
        resabs += (lo.norm() + hi.norm()) * WGK[j];
        if j % 2 == 1 {
            gauss += pair * WG[j / 2];
        }
    }
    let value = kronrod * half;
    let resabs = resabs * half.abs();
    let err = ((kronrod - gauss) * half).norm();
    // QUADPACK-style pessimistic scaling of the raw difference.
    let err = if err > 0.0 {
        err * (200.0 * err / value.norm().max(1e-300)).powf(1.5).min(1.0)
    } else {
        0.0
    };
    (value, err.max(50.0 * f64::EPSILON * resabs), resabs)
}

struct Segment {
    a: f64,
    b: f64,
    value: Complex64,
    err: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Adaptive integration of `f` over the union of consecutive intervals given
/// by `breakpoints` (at least two strictly increasing values).
pub fn integrate<F>(f: F, breakpoints: &[f64], tol: Tolerance) -> Result<QuadResult>
where
    F: Fn(f64) -> Complex64,
{
    if breakpoints.len() < 2 || breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::QuadratureFailure(
            "breakpoints must be strictly increasing".into(),
        ));
    }
    let mut heap = BinaryHeap::new();
    let mut total = Complex64::new(0.0, 0.0);
    let mut total_err = 0.0;
    let mut mass = 0.0;
    for w in breakpoints.windows(2) {
        let (value, err, resabs) = gk21_full(&f, w[0], w[1]);
        total += value;
        total_err += err;
        mass += resabs;
        heap.push(Segment {
            a: w[0],
            b: w[1],
            value,
            err,
        });
    }
    // Integrals that cancel to zero cannot meet a relative target; accept
    // once the error is at roundoff level of int |f|.
    let floor = 100.0 * f64::EPSILON * mass;
    let mut evaluations = 21 * heap.len();
    while total_err > tol.abs.max(tol.rel * total.norm()).max(floor) {
        if heap.len() >= tol.max_intervals {
            return Err(Error::QuadratureFailure(format!(
                "{} subintervals exhausted with error {:e} on value {:e}",
                heap.len(),
                total_err,
                total.norm()
            )));
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // Interval collapsed to machine resolution; accept what we have.
            heap.push(worst);
            break;
        }
        let (v1, e1) = gk21(&f, worst.a, mid);
        let (v2, e2) = gk21(&f, mid, worst.b);
        evaluations += 42;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.err;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: v1,
            err: e1,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: v2,
            err: e2,
        });
    }
    // Re-sum from scratch to shed the drift of the running updates.
    let mut value = Complex64::new(0.0, 0.0);
    let mut abs_error = 0.0;
    for s in heap.iter() {
        value += s.value;
        abs_error += s.err;
    }
    if !value.re.is_finite() || !value.im.is_finite() {
        return Err(Error::QuadratureFailure("non-finite integrand".into()));
    }
    Ok(QuadResult {
        value,
        abs_error,
        evaluations,
    })
}

/// Integrate a real function over `[0, inf)` through the map `t -> t/(1-t)`.
pub fn integrate_half_line<F>(f: F, tol: Tolerance) -> Result<QuadResult>
where
    F: Fn(f64) -> f64,
{
    let g = |t: f64| {
        if t >= 1.0 {
            return Complex64::new(0.0, 0.0);
        }
        let s = 1.0 - t;
        Complex64::new(f(t / s) / (s * s), 0.0)
    };
    let pts: Vec<f64> = (0..=16).map(|i| i as f64 / 16.0).collect();
    integrate(g, &pts, tol)
}

/// Wynn's epsilon algorithm over a sequence of partial sums. Returns the
/// extrapolated limit and the change between the last two even-column
/// estimates as an error indicator.
pub fn wynn_epsilon(partial_sums: &[f64]) -> (f64, f64) {
    let n = partial_sums.len();
    if n < 3 {
        let last = partial_sums.last().copied().unwrap_or(0.0);
        return (last, f64::INFINITY);
    }
    // table[k] holds column k of the epsilon table for the current diagonal.
    let mut prev: Vec<f64> = vec![0.0; n];
    let mut cur: Vec<f64> = partial_sums.to_vec();
    let mut best = *partial_sums.last().unwrap();
    let mut best_prev = partial_sums[n - 2];
    let mut col = 0;
    while cur.len() > 1 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for i in 0..cur.len() - 1 {
            let diff = cur[i + 1] - cur[i];
            let base = if col == 0 { 0.0 } else { prev[i + 1] };
            if diff == 0.0 {
                next.push(f64::INFINITY);
            } else {
                next.push(base + 1.0 / diff);
            }
        }
        prev = cur;
        cur = next;
        col += 1;
        if col % 2 == 0 {
            let finite: Vec<f64> = cur.iter().copied().filter(|v| v.is_finite()).collect();
            if finite.len() >= 2 {
                best_prev = finite[finite.len() - 2];
                best = finite[finite.len() - 1];
            } else if let Some(&v) = finite.last() {
                best_prev = best;
                best = v;
            } else {
                break;
            }
        }
    }
    (best, (best - best_prev).abs())
}
