//! Adaptive Gauss-Kronrod quadrature (7-15 pair) with worst-interval-first
//! refinement. Nodes are interior, so integrands with removable endpoint
//! singularities never get evaluated at the endpoints.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

// 15-point Kronrod abscissae (positive half) and weights, with the embedded
// 7-point Gauss weights on the odd-indexed abscissae.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub(crate) struct QuadResult {
    pub value: f64,
    // Diagnostics, read by tests and kept for debugging.
    #[allow(dead_code)]
    pub error_estimate: f64,
    #[allow(dead_code)]
    pub intervals: usize,
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
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
        self.error
            .partial_cmp(&other.error)
            .unwrap_or(Ordering::Equal)
    }
}

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;

    for k in 0..7 {
        let dx = half * XGK[k];
        let fsum = f(center - dx) + f(center + dx);
        kronrod += WGK[k] * fsum;
        if k % 2 == 1 {
            gauss += WG[k / 2] * fsum;
        }
    }
    let value = kronrod * half;
    let err = ((kronrod - gauss) * half).abs();
    // QUADPACK-style sharpening of the raw difference.
    let err = if err != 0.0 {
        let scale = (200.0 * err / value.abs().max(1e-300)).min(1.0);
        (err * scale.powf(1.5)).max(err * 1e-12).min(err)
    } else {
        0.0
    };
    (value, err.max((kronrod - gauss).abs() * half * 1e-6))
}

/// Integrate `f` over `[a, b]` to absolute tolerance `abs_tol`.
///
/// Splits the interval with the largest error estimate until the summed
/// estimate is below tolerance or `max_intervals` is hit; in the latter case
/// the caller receives the achieved error estimate through `Err`.
pub(crate) fn adaptive_gk15(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    abs_tol: f64,
    max_intervals: usize,
) -> Result<QuadResult, f64> {
    let (v, e) = gk15(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Segment {
        a,
        b,
        value: v,
        error: e,
    });
    let mut total_err = e;

    while total_err > abs_tol && heap.len() < max_intervals {
        let worst = heap.pop().expect("heap cannot be empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval at floating-point resolution; cannot refine further.
            heap.push(worst);
            break;
        }
        total_err -= worst.error;
        let (v1, e1) = gk15(&f, worst.a, mid);
        let (v2, e2) = gk15(&f, mid, worst.b);
        total_err += e1 + e2;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
    }

    let value: f64 = heap.iter().map(|s| s.value).sum();
    let intervals = heap.len();
    if total_err > abs_tol {
        return Err(total_err);
    }
    Ok(QuadResult {
        value,
        error_estimate: total_err,
        intervals,
    })
}
