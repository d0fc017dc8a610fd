//! Sparse matrices whose rows hold one contiguous run of columns, and banded
//! factorizations of `1 - M` for log-determinants.

/// Matrix storing, for each row, a contiguous column range.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileMatrix {
    nrows: usize,
    ncols: usize,
    lo: Vec<usize>,
    ptr: Vec<usize>,
    data: Vec<f64>,
}

impl ProfileMatrix {
    /// Zero matrix with row `i` spanning columns `ranges[i].0 .. ranges[i].1`.
    pub fn zeros(ncols: usize, ranges: &[(usize, usize)]) -> Self {
        let mut ptr = Vec::with_capacity(ranges.len() + 1);
        ptr.push(0);
        let mut lo = Vec::with_capacity(ranges.len());
        for &(a, b) in ranges {
            debug_assert!(a <= b && b <= ncols);
            lo.push(a);
            ptr.push(ptr.last().unwrap() + (b - a));
        }
        let len = *ptr.last().unwrap();
        Self {
            nrows: ranges.len(),
            ncols,
            lo,
            ptr,
            data: vec![0.0; len],
        }
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let ncols = rows.first().map_or(0, Vec::len);
        let ranges: Vec<_> = rows.iter().map(|_| (0, ncols)).collect();
        let mut m = Self::zeros(ncols, &ranges);
        for (i, r) in rows.iter().enumerate() {
            m.row_mut(i).copy_from_slice(r);
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    /// First stored column of row `i` and the stored values.
    pub fn row(&self, i: usize) -> (usize, &[f64]) {
        (self.lo[i], &self.data[self.ptr[i]..self.ptr[i + 1]])
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[self.ptr[i]..self.ptr[i + 1]]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (lo, vals) = self.row(i);
        if j >= lo && j < lo + vals.len() {
            vals[j - lo]
        } else {
            0.0
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.nrows)
            .map(|i| (0..self.ncols).map(|j| self.get(i, j)).collect())
            .collect()
    }

    /// `self * other`.
    pub fn matmul(&self, other: &ProfileMatrix) -> ProfileMatrix {
        assert_eq!(self.ncols, other.nrows, "inner dimensions differ");
        let ranges: Vec<(usize, usize)> = (0..self.nrows)
            .map(|i| {
                let (lo, vals) = self.row(i);
                let mut a = usize::MAX;
                let mut b = 0;
                for p in lo..lo + vals.len() {
                    let (olo, ovals) = other.row(p);
                    if !ovals.is_empty() {
                        a = a.min(olo);
                        b = b.max(olo + ovals.len());
                    }
                }
                if a == usize::MAX {
                    (0, 0)
                } else {
                    (a, b)
                }
            })
            .collect();
        let mut out = ProfileMatrix::zeros(other.ncols, &ranges);
        for (i, &(a, _)) in ranges.iter().enumerate() {
            let (lo, vals) = self.row(i);
            let dst = &mut out.data[out.ptr[i]..out.ptr[i + 1]];
            for (off, &v) in vals.iter().enumerate() {
                let (olo, ovals) = other.row(lo + off);
                if v == 0.0 || ovals.is_empty() {
                    continue;
                }
                let d = &mut dst[olo - a..olo - a + ovals.len()];
                for (x, &o) in d.iter_mut().zip(ovals) {
                    *x += v * o;
                }
            }
        }
        out
    }

    /// `tr(self * other)` without forming the product.
    pub fn trace_of_product(&self, other: &ProfileMatrix) -> f64 {
        assert_eq!(self.ncols, other.nrows);
        assert_eq!(self.nrows, other.ncols);
        let mut t = 0.0;
        for i in 0..self.nrows {
            let (lo, vals) = self.row(i);
            for (off, &v) in vals.iter().enumerate() {
                t += v * other.get(lo + off, i);
            }
        }
        t
    }

    pub fn trace(&self) -> f64 {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).sum()
    }

    /// Largest relative asymmetry `|a_ij - a_ji| / max|a|`.
    pub fn asymmetry(&self) -> f64 {
        let scale = self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0f64;
        for i in 0..self.nrows {
            let (lo, vals) = self.row(i);
            for (off, &v) in vals.iter().enumerate() {
                worst = worst.max((v - self.get(lo + off, i)).abs());
            }
        }
        worst / scale
    }

    /// Lower and upper bandwidths of a square matrix.
    fn bandwidths(&self) -> (usize, usize) {
        let mut kl = 0;
        let mut ku = 0;
        for i in 0..self.nrows {
            let (lo, vals) = self.row(i);
            if vals.is_empty() {
                continue;
            }
            kl = kl.max(i.saturating_sub(lo));
            ku = ku.max((lo + vals.len() - 1).saturating_sub(i));
        }
        (kl, ku)
    }

    /// `log det(1 - self)` by banded LU with partial pivoting.
    ///
    /// Fails when a pivot vanishes or the determinant is not positive.
    pub fn log_det_one_minus(&self) -> Result<f64, String> {
        assert_eq!(self.nrows, self.ncols, "matrix must be square");
        let n = self.nrows;
        let (kl, ku) = self.bandwidths();
        let width = 2 * kl + ku + 1;
        // row i holds columns i - kl ..= i + kl + ku at offset col + kl - i
        let mut a = vec![0.0; n * width];
        for i in 0..n {
            let (lo, vals) = self.row(i);
            for (off, &v) in vals.iter().enumerate() {
                let j = lo + off;
                a[i * width + j + kl - i] = -v;
            }
            a[i * width + kl] += 1.0;
        }
        let idx = |i: usize, j: usize| i * width + j + kl - i;
        let mut log_det = 0.0;
        let mut negative = false;
        for j in 0..n {
            let last_row = (j + kl).min(n - 1);
            let last_col = (j + kl + ku).min(n - 1);
            let mut p = j;
            let mut best = a[idx(j, j)].abs();
            for r in j + 1..=last_row {
                let v = a[idx(r, j)].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if !(best > 0.0) || !best.is_finite() {
                return Err(format!("zero pivot at column {j}"));
            }
            if p != j {
                negative = !negative;
                for c in j..=last_col {
                    a.swap(idx(j, c), idx(p, c));
                }
            }
            let piv = a[idx(j, j)];
            if piv < 0.0 {
                negative = !negative;
            }
            log_det += piv.abs().ln();
            for r in j + 1..=last_row {
                let l = a[idx(r, j)] / piv;
                if l == 0.0 {
                    continue;
                }
                for c in j + 1..=last_col {
                    a[idx(r, c)] -= l * a[idx(j, c)];
                }
            }
        }
        if negative {
            return Err("determinant of 1 - M is negative".into());
        }
        Ok(log_det)
    }

    /// `log det(1 - self)` for symmetric `self` by banded Cholesky.
    ///
    /// Only the lower triangle is read. Fails unless `1 - self` is positive
    /// definite.
    pub fn log_det_one_minus_symmetric(&self) -> Result<f64, String> {
        assert_eq!(self.nrows, self.ncols, "matrix must be square");
        let n = self.nrows;
        let (kl, _) = self.bandwidths();
        let width = kl + 1;
        // row i holds columns i - kl ..= i at offset col + kl - i
        let mut l = vec![0.0; n * width];
        let idx = |i: usize, j: usize| i * width + j + kl - i;
        for i in 0..n {
            let (lo, vals) = self.row(i);
            for (off, &v) in vals.iter().enumerate() {
                let j = lo + off;
                if j <= i && i - j <= kl {
                    l[idx(i, j)] = -v;
                }
            }
            l[idx(i, i)] += 1.0;
        }
        let mut log_det = 0.0;
        for i in 0..n {
            let first = i.saturating_sub(kl);
            for j in first..=i {
                let jfirst = j.saturating_sub(kl).max(first);
                let mut s = l[idx(i, j)];
                for k in jfirst..j {
                    s -= l[idx(i, k)] * l[idx(j, k)];
                }
                if j == i {
                    if !(s > 0.0) || !s.is_finite() {
                        return Err(format!("1 - M is not positive definite (row {i})"));
                    }
                    let d = s.sqrt();
                    l[idx(i, i)] = d;
                    log_det += 2.0 * d.ln();
                } else {
                    l[idx(i, j)] = s / l[idx(j, j)];
                }
            }
        }
        Ok(log_det)
    }
}
