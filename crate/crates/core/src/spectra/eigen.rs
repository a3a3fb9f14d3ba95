//! Eigenvalues of a dense real symmetric matrix: Householder reduction to
//! tridiagonal form followed by implicit QL with Wilkinson-style shifts.
//! Eigenvectors are never accumulated.

use crate::error::{Error, Result};

const MAX_QL_SWEEPS: usize = 60;

/// Reduces the symmetric matrix held in the lower triangle of `a` (row-major,
/// `n x n`) to tridiagonal form. Returns `(diagonal, subdiagonal)` where
/// `sub[i]` couples rows `i` and `i + 1`; `sub[n - 1]` is zero. `a` is overwritten.
pub fn tridiagonalize(a: &mut [f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    if n == 0 {
        return (Vec::new(), Vec::new());
    }
    let mut e = vec![0.0; n];
    let mut p = vec![0.0; n];
    for i in (1..n).rev() {
        let l = i - 1;
        let (head, row_i) = a.split_at_mut(i * n);
        let u = &mut row_i[..i];
        if l == 0 {
            e[i] = u[0];
            continue;
        }
        let scale: f64 = u.iter().map(|v| v.abs()).sum();
        if scale == 0.0 {
            e[i] = u[l];
            continue;
        }
        let mut h = 0.0;
        for v in u.iter_mut() {
            *v /= scale;
            h += *v * *v;
        }
        let f = u[l];
        let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
        e[i] = scale * g;
        h -= f * g;
        u[l] = f - g;

        // p = A u / h using the lower triangle of the leading i x i block
        p[..i].iter_mut().for_each(|v| *v = 0.0);
        for j in 0..i {
            let row = &head[j * n..j * n + j];
            let uj = u[j];
            let mut acc = 0.0;
            for ((&ajk, &uk), pk) in row.iter().zip(&u[..j]).zip(p[..j].iter_mut()) {
                acc += ajk * uk;
                *pk += ajk * uj;
            }
            p[j] += acc + head[j * n + j] * uj;
        }
        let mut up = 0.0;
        for j in 0..i {
            p[j] /= h;
            up += p[j] * u[j];
        }
        let k = up / (h + h);
        for j in 0..i {
            p[j] -= k * u[j];
        }
        // A <- A - u q^T - q u^T on the lower triangle
        for j in 0..i {
            let (uj, qj) = (u[j], p[j]);
            let row = &mut head[j * n..j * n + j + 1];
            for ((ajk, &uk), &qk) in row.iter_mut().zip(&u[..=j]).zip(&p[..=j]) {
                *ajk -= uj * qk + qj * uk;
            }
        }
    }
    let d: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    // shift so that e[i] couples i and i + 1
    let mut sub = vec![0.0; n];
    sub[..n.saturating_sub(1)].copy_from_slice(&e[1..]);
    (d, sub)
}

/// Eigenvalues of the symmetric tridiagonal matrix `(d, e)`; `e[i]` couples `i` and `i + 1`.
/// The result is unsorted.
pub fn tridiagonal_eigenvalues(mut d: Vec<f64>, mut e: Vec<f64>) -> Result<Vec<f64>> {
    let n = d.len();
    if n == 0 {
        return Ok(d);
    }
    e.resize(n, 0.0);
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_QL_SWEEPS {
                return Err(Error::numeric(format!("QL iteration did not converge for eigenvalue {l}"), None));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(d)
}

/// All eigenvalues of the row-major symmetric matrix `a` (only the lower triangle is read).
pub fn symmetric_eigenvalues(mut a: Vec<f64>, n: usize) -> Result<Vec<f64>> {
    if a.len() != n * n {
        return Err(Error::input(format!("expected {} entries, got {}", n * n, a.len())));
    }
    let (d, e) = tridiagonalize(&mut a, n);
    tridiagonal_eigenvalues(d, e)
}
