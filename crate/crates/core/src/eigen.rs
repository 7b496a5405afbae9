//! Dense real symmetric eigenvalues: Householder reduction to tridiagonal
//! form followed by the implicit QL iteration with Wilkinson shifts.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EigenError {
    #[error("matrix of length {len} is not square of order {order}")]
    Shape { len: usize, order: usize },
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("QL iteration did not converge for eigenvalue {index} within {budget} iterations")]
    NoConvergence { index: usize, budget: usize },
}

/// Iteration budget per eigenvalue.
const MAX_QL_ITERATIONS: usize = 60;

/// Householder tridiagonalization of the row-major matrix `a` (order `n`).
/// Returns the diagonal and the sub-diagonal (`e[0]` unused, `e[i]` couples
/// `i - 1` and `i`).
fn tridiagonalize(mut a: Vec<f64>, n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    let at = |i: usize, j: usize| i * n + j;
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        if l > 0 {
            let scale: f64 = (0..=l).map(|k| a[at(i, k)].abs()).sum();
            if scale == 0.0 {
                e[i] = a[at(i, l)];
            } else {
                for k in 0..=l {
                    a[at(i, k)] /= scale;
                    h += a[at(i, k)] * a[at(i, k)];
                }
                let f = a[at(i, l)];
                let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                a[at(i, l)] = f - g;
                let mut f_acc = 0.0;
                for j in 0..=l {
                    let mut g = 0.0;
                    for k in 0..=j {
                        g += a[at(j, k)] * a[at(i, k)];
                    }
                    for k in (j + 1)..=l {
                        g += a[at(k, j)] * a[at(i, k)];
                    }
                    e[j] = g / h;
                    f_acc += e[j] * a[at(i, j)];
                }
                let hh = f_acc / (h + h);
                for j in 0..=l {
                    let f = a[at(i, j)];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        a[at(j, k)] -= f * e[k] + g * a[at(i, k)];
                    }
                }
            }
        } else {
            e[i] = a[at(i, l)];
        }
        d[i] = h;
    }
    for (i, di) in d.iter_mut().enumerate() {
        *di = a[at(i, i)];
    }
    (d, e)
}

/// Eigenvalues of a symmetric tridiagonal matrix, in place, unsorted.
/// `e[i]` couples `i - 1` and `i`; off-diagonals below `threshold` are
/// treated as zero.
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64], threshold: f64) -> Result<(), EigenError> {
    let n = d.len();
    if n < 2 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= threshold || e[m].abs() + dd == dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            if iter == MAX_QL_ITERATIONS {
                return Err(EigenError::NoConvergence {
                    index: l,
                    budget: MAX_QL_ITERATIONS,
                });
            }
            iter += 1;
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
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
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// All eigenvalues of the symmetric row-major matrix `a`, ascending.
///
/// Off-diagonal entries are deflated once they fall below
/// `1e-12 * max_i sum_j |a_ij|`.
pub fn symmetric_eigenvalues(a: &[f64], order: usize) -> Result<Vec<f64>, EigenError> {
    if a.len() != order * order {
        return Err(EigenError::Shape {
            len: a.len(),
            order,
        });
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(EigenError::NonFinite);
    }
    if order == 0 {
        return Ok(Vec::new());
    }
    let norm = a
        .chunks(order)
        .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let (mut d, mut e) = tridiagonalize(a.to_vec(), order);
    tridiagonal_ql(&mut d, &mut e, 1e-12 * norm)?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}
