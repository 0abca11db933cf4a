//! Sparse symmetric solves used by parametrization, fairing and displacement
//! propagation. All systems assembled here are symmetric positive definite.

use crate::{Error, Result};

/// Compressed sparse row matrix assembled from unordered triplets.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

/// Accumulates `(row, col, value)` entries; duplicates are summed.
#[derive(Debug, Clone, Default)]
pub struct TripletBuilder {
    n: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl TripletBuilder {
    pub fn new(n: usize) -> Self {
        Self { n, entries: Vec::new() }
    }

    pub fn add(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.n && col < self.n);
        self.entries.push((row, col, value));
    }

    pub fn build(mut self) -> CsrMatrix {
        self.entries.sort_by_key(|e| (e.0, e.1));
        let mut row_ptr = vec![0usize; self.n + 1];
        let mut cols = Vec::with_capacity(self.entries.len());
        let mut vals: Vec<f64> = Vec::with_capacity(self.entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in self.entries {
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..self.n {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix {
            n: self.n,
            row_ptr,
            cols,
            vals,
        }
    }
}

impl CsrMatrix {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn mul_vec(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *o = acc;
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                (self.row_ptr[i]..self.row_ptr[i + 1])
                    .find(|&k| self.cols[k] == i)
                    .map_or(0.0, |k| self.vals[k])
            })
            .collect()
    }

    /// Jacobi-preconditioned conjugate gradients. Stops once
    /// `‖b − Ax‖ ≤ rel_tol · ‖b‖`; `x` carries the initial guess.
    pub fn solve_cg(&self, b: &[f64], x: &mut [f64], rel_tol: f64, max_iter: usize) -> Result<usize> {
        let n = self.n;
        let diag = self.diagonal();
        if diag.iter().any(|&d| !(d > 0.0)) {
            return Err(Error::Solver("non-positive diagonal entry".into()));
        }
        let b_norm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        if b_norm == 0.0 {
            x.iter_mut().for_each(|v| *v = 0.0);
            return Ok(0);
        }
        let mut r = vec![0.0; n];
        self.mul_vec(x, &mut r);
        for i in 0..n {
            r[i] = b[i] - r[i];
        }
        let mut z: Vec<f64> = r.iter().zip(&diag).map(|(ri, d)| ri / d).collect();
        let mut p = z.clone();
        let mut ap = vec![0.0; n];
        let mut rz = dot(&r, &z);
        for iter in 0..max_iter {
            let r_norm = dot(&r, &r).sqrt();
            if r_norm <= rel_tol * b_norm {
                return Ok(iter);
            }
            self.mul_vec(&p, &mut ap);
            let pap = dot(&p, &ap);
            if !(pap > 0.0) {
                return Err(Error::Solver("matrix is not positive definite".into()));
            }
            let alpha = rz / pap;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            for i in 0..n {
                z[i] = r[i] / diag[i];
            }
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        let r_norm = dot(&r, &r).sqrt();
        if r_norm <= rel_tol.sqrt() * b_norm {
            // Close enough for geometric use; report rather than fail.
            log::debug!("cg stopped at max_iter with relative residual {:.3e}", r_norm / b_norm);
            return Ok(max_iter);
        }
        Err(Error::Solver(format!(
            "relative residual {:.3e} after {max_iter} iterations",
            r_norm / b_norm
        )))
    }

    /// Solves one system per right-hand side column.
    pub fn solve_columns<const D: usize>(&self, rhs: &[[f64; D]], guess: &[[f64; D]]) -> Result<Vec<[f64; D]>> {
        let n = self.n;
        let mut out = vec![[0.0; D]; n];
        for d in 0..D {
            let b: Vec<f64> = rhs.iter().map(|r| r[d]).collect();
            let mut x: Vec<f64> = guess.iter().map(|g| g[d]).collect();
            self.solve_cg(&b, &mut x, 1e-12, 20 * n.max(10))?;
            for (o, xi) in out.iter_mut().zip(x) {
                o[d] = xi;
            }
        }
        Ok(out)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
