//! Small dense linear algebra: LU solves and condition estimates.
//!
//! State counts stay small (tens, not thousands), so plain partial-pivot
//! LU on row-major storage is all we need.

/// Row-major square matrix wrapper over a flat buffer.
#[derive(Debug, Clone)]
pub(crate) struct SquareMatrix {
    pub n: usize,
    pub data: Vec<f64>,
}

impl SquareMatrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            assert_eq!(row.len(), n, "matrix must be square");
            data.extend_from_slice(row);
        }
        SquareMatrix { n, data }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Maximum absolute column sum.
    pub fn norm1(&self) -> f64 {
        let mut best = 0.0f64;
        for j in 0..self.n {
            let mut s = 0.0;
            for i in 0..self.n {
                s += self.at(i, j).abs();
            }
            best = best.max(s);
        }
        best
    }
}

/// LU factorization with partial pivoting. Returns `None` when a pivot
/// degenerates to zero (structurally singular).
pub(crate) struct Lu {
    n: usize,
    lu: Vec<f64>,
    piv: Vec<usize>,
}

pub(crate) fn lu_factor(m: &SquareMatrix) -> Option<Lu> {
    let n = m.n;
    let mut lu = m.data.clone();
    let mut piv: Vec<usize> = (0..n).collect();

    for k in 0..n {
        let mut p = k;
        let mut best = lu[k * n + k].abs();
        for i in (k + 1)..n {
            let v = lu[i * n + k].abs();
            if v > best {
                best = v;
                p = i;
            }
        }
        if best == 0.0 {
            return None;
        }
        if p != k {
            for j in 0..n {
                lu.swap(k * n + j, p * n + j);
            }
            piv.swap(k, p);
        }
        let pivot = lu[k * n + k];
        for i in (k + 1)..n {
            let f = lu[i * n + k] / pivot;
            lu[i * n + k] = f;
            for j in (k + 1)..n {
                lu[i * n + j] -= f * lu[k * n + j];
            }
        }
    }
    Some(Lu { n, lu, piv })
}

impl Lu {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x: Vec<f64> = self.piv.iter().map(|&p| b[p]).collect();
        for i in 1..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in (i + 1)..n {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s / self.lu[i * n + i];
        }
        x
    }
}

/// Solve `A x = b`. `None` when the factorization breaks down.
pub(crate) fn solve(a: &SquareMatrix, b: &[f64]) -> Option<Vec<f64>> {
    lu_factor(a).map(|lu| lu.solve(b))
}

/// 1-norm condition number via the explicit inverse; fine at these sizes.
/// Returns `f64::INFINITY` for singular input.
pub(crate) fn condition_1norm(a: &SquareMatrix) -> f64 {
    let n = a.n;
    let Some(lu) = lu_factor(a) else {
        return f64::INFINITY;
    };
    let mut inv_norm = 0.0f64;
    let mut e = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        let col = lu.solve(&e);
        e[j] = 0.0;
        let s: f64 = col.iter().map(|v| v.abs()).sum();
        inv_norm = inv_norm.max(s);
    }
    if !inv_norm.is_finite() {
        return f64::INFINITY;
    }
    a.norm1() * inv_norm
}
