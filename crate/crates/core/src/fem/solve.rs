use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use super::dirichlet::ConstrainedSystem;
use super::sparse::CsrMatrix;
use crate::error::{Error, Result};


#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// CG for symmetric matrices, BiCGStab otherwise with a banded LU fallback.
    Auto,
    Cg,
    BiCgStab,
    BandedLu,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub method: Method,
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            method: Method::Auto,
            rel_tol: 1e-10,
            max_iter: 20_000,
        }
    }
}

impl SolveOptions {
    pub fn with_tol(rel_tol: f64) -> Self {
        SolveOptions {
            rel_tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub x: Vec<f64>,
    pub method: &'static str,
    pub iterations: usize,
    /// Final `||b - A x|| / ||b||`.
    pub residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

fn relative_residual(a: &CsrMatrix, b: &[f64], x: &[f64]) -> f64 {
    let ax = a.apply(x);
    let r = libm::sqrt(ax.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>());
    let nb = norm2(b);
    if nb > 0.0 {
        r / nb
    } else {
        r
    }
}

pub fn solve_constrained(sys: &ConstrainedSystem, opts: &SolveOptions) -> Result<Solution> {
    solve(&sys.matrix, &sys.rhs, opts)
}

pub fn solve(a: &CsrMatrix, b: &[f64], opts: &SolveOptions) -> Result<Solution> {
    if b.len() != a.n() {
        return Err(Error::InvalidInput(alloc::format!("rhs length {} for matrix of size {}", b.len(), a.n())));
    }
    if a.diagonal().iter().any(|d| !d.is_finite()) || b.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite entries in linear system".into()));
    }
    if norm2(b) == 0.0 {
        return Ok(Solution {
            x: vec![0.0; a.n()],
            method: "trivial",
            iterations: 0,
            residual: 0.0,
        });
    }
    match opts.method {
        Method::Cg => cg(a, b, opts),
        Method::BiCgStab => bicgstab(a, b, opts),
        Method::BandedLu => banded_lu(a, b),
        Method::Auto => {
            if a.asymmetry() <= 1e-12 * a.max_abs() {
                cg(a, b, opts)
            } else {
                match bicgstab(a, b, opts) {
                    Ok(s) => Ok(s),
                    Err(_) => {
                        let s = banded_lu(a, b)?;
                        if s.residual > opts.rel_tol.max(1e-9) {
                            return Err(Error::SolverFailure {
                                method: "banded-lu",
                                iterations: 0,
                                residual: s.residual,
                                history: vec![s.residual],
                            });
                        }
                        Ok(s)
                    }
                }
            }
        }
    }
}

fn jacobi(a: &CsrMatrix) -> Result<Vec<f64>> {
    a.diagonal()
        .into_iter()
        .enumerate()
        .map(|(i, d)| {
            if d == 0.0 {
                Err(Error::SingularSystem(alloc::format!("zero diagonal in row {i}")))
            } else {
                Ok(1.0 / d)
            }
        })
        .collect()
}

fn record(history: &mut Vec<f64>, it: usize, r: f64) {
    if it % 10 == 0 || history.is_empty() {
        history.push(r);
    }
}

fn cg(a: &CsrMatrix, b: &[f64], opts: &SolveOptions) -> Result<Solution> {
    let n = a.n();
    let dinv = jacobi(a)?;
    let nb = norm2(b);
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&dinv).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut history = Vec::new();
    for it in 0..opts.max_iter {
        let res = norm2(&r) / nb;
        record(&mut history, it, res);
        if res <= opts.rel_tol {
            let residual = relative_residual(a, b, &x);
            return Ok(Solution {
                x,
                method: "cg",
                iterations: it,
                residual,
            });
        }
        a.mul_vec(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::SolverFailure {
                method: "cg",
                iterations: it,
                residual: res,
                history,
            });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
            z[i] = r[i] * dinv[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let residual = relative_residual(a, b, &x);
    history.push(residual);
    Err(Error::SolverFailure {
        method: "cg",
        iterations: opts.max_iter,
        residual,
        history,
    })
}

fn bicgstab(a: &CsrMatrix, b: &[f64], opts: &SolveOptions) -> Result<Solution> {
    let n = a.n();
    let dinv = jacobi(a)?;
    let nb = norm2(b);
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let r0 = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0f64, 1.0f64, 1.0f64);
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut zz = vec![0.0; n];
    let mut t = vec![0.0; n];
    let mut history = Vec::new();
    let fail = |it, res, history| Error::SolverFailure {
        method: "bicgstab",
        iterations: it,
        residual: res,
        history,
    };
    for it in 0..opts.max_iter {
        let res = norm2(&r) / nb;
        record(&mut history, it, res);
        if res <= opts.rel_tol {
            let residual = relative_residual(a, b, &x);
            if residual <= 10.0 * opts.rel_tol {
                return Ok(Solution {
                    x,
                    method: "bicgstab",
                    iterations: it,
                    residual,
                });
            }
            // recursive residual drifted; restart from the true one
            let ax = a.apply(&x);
            for i in 0..n {
                r[i] = b[i] - ax[i];
            }
        }
        let rho_new = dot(&r0, &r);
        if rho_new.abs() < 1e-300 || omega.abs() < 1e-300 {
            return Err(fail(it, res, history));
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
            y[i] = p[i] * dinv[i];
        }
        a.mul_vec(&y, &mut v);
        let r0v = dot(&r0, &v);
        if r0v.abs() < 1e-300 {
            return Err(fail(it, res, history));
        }
        alpha = rho / r0v;
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
            zz[i] = s[i] * dinv[i];
        }
        a.mul_vec(&zz, &mut t);
        let tt = dot(&t, &t);
        omega = if tt > 0.0 { dot(&t, &s) / tt } else { 0.0 };
        for i in 0..n {
            x[i] += alpha * y[i] + omega * zz[i];
            r[i] = s[i] - omega * t[i];
        }
        if !x.iter().all(|v| v.is_finite()) {
            return Err(fail(it, f64::INFINITY, history));
        }
    }
    let residual = relative_residual(a, b, &x);
    history.push(residual);
    Err(fail(opts.max_iter, residual, history))
}

/// Reverse Cuthill-McKee ordering of the symmetrized sparsity graph.
pub fn rcm_ordering(a: &CsrMatrix) -> Vec<usize> {
    let n = a.n();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for &j in a.row(i).0 {
            if i != j {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    for l in adj.iter_mut() {
        l.sort_unstable();
        l.dedup();
    }
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        let start = (0..n)
            .filter(|&i| !visited[i])
            .min_by_key(|&i| adj[i].len())
            .unwrap_or(0);
        visited[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nb: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            nb.sort_by_key(|&w| adj[w].len());
            for w in nb {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

/// Direct solve after RCM reordering, Gaussian elimination with partial
/// pivoting inside the band.
pub fn banded_lu(a: &CsrMatrix, b: &[f64]) -> Result<Solution> {
    let n = a.n();
    let perm = rcm_ordering(a);
    let mut inv = vec![0usize; n];
    for (new, &old) in perm.iter().enumerate() {
        inv[old] = new;
    }
    let (mut kl, mut ku) = (0usize, 0usize);
    for i in 0..n {
        for &j in a.row(i).0 {
            let (pi, pj) = (inv[i], inv[j]);
            if pj < pi {
                kl = kl.max(pi - pj);
            } else {
                ku = ku.max(pj - pi);
            }
        }
    }
    let width = 2 * kl + ku + 1;
    // row i stores columns i - kl ..= i + kl + ku
    let mut band = vec![0.0; n * width];
    let idx = |i: usize, j: usize| i * width + (j + kl - i);
    for i in 0..n {
        let (c, v) = a.row(i);
        for (&j, &val) in c.iter().zip(v) {
            band[idx(inv[i], inv[j])] += val;
        }
    }
    let mut rhs: Vec<f64> = perm.iter().map(|&old| b[old]).collect();
    let mut tmp = vec![0.0; kl + ku + 1];
    for k in 0..n {
        let last = (k + kl).min(n - 1);
        let mut piv = k;
        for i in k..=last {
            if band[idx(i, k)].abs() > band[idx(piv, k)].abs() {
                piv = i;
            }
        }
        let pv = band[idx(piv, k)];
        if pv == 0.0 || !pv.is_finite() {
            return Err(Error::SingularSystem(alloc::format!("zero pivot in column {k}")));
        }
        let hi = (k + kl + ku).min(n - 1);
        if piv != k {
            for j in k..=hi {
                tmp[j - k] = band[idx(k, j)];
                band[idx(k, j)] = band[idx(piv, j)];
                band[idx(piv, j)] = tmp[j - k];
            }
            rhs.swap(k, piv);
        }
        for i in (k + 1)..=last {
            let f = band[idx(i, k)] / pv;
            if f == 0.0 {
                continue;
            }
            band[idx(i, k)] = 0.0;
            for j in (k + 1)..=hi {
                band[idx(i, j)] -= f * band[idx(k, j)];
            }
            rhs[i] -= f * rhs[k];
        }
    }
    let mut y = vec![0.0; n];
    for i in (0..n).rev() {
        let hi = (i + kl + ku).min(n - 1);
        let mut s = rhs[i];
        for j in (i + 1)..=hi {
            s -= band[idx(i, j)] * y[j];
        }
        y[i] = s / band[idx(i, i)];
    }
    let mut x = vec![0.0; n];
    for (new, &old) in perm.iter().enumerate() {
        x[old] = y[new];
    }
    let residual = relative_residual(a, b, &x);
    Ok(Solution {
        x,
        method: "banded-lu",
        iterations: 0,
        residual,
    })
}
