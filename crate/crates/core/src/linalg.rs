//! Dense symmetric eigendecomposition by cyclic Jacobi rotations.

use alloc::vec;
use alloc::vec::Vec;

const MAX_SWEEPS: usize = 100;

/// Eigenpairs of a symmetric matrix, in no particular order.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    /// `vectors[i]` is the unit eigenvector for `values[i]`.
    pub vectors: Vec<Vec<f64>>,
}

/// Decomposes the symmetric `n × n` row-major matrix `a`.
///
/// Only the upper triangle is trusted; the lower one is overwritten from it.
pub fn symmetric_eigen(a: &[f64], n: usize) -> SymmetricEigen {
    assert_eq!(a.len(), n * n, "matrix must be n x n");
    let mut m = a.to_vec();
    for i in 0..n {
        for j in 0..i {
            m[i * n + j] = m[j * n + i];
        }
    }
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }

    for sweep in 0..MAX_SWEEPS {
        let off: f64 = (0..n).flat_map(|p| (p + 1..n).map(move |q| (p, q))).map(|(p, q)| m[p * n + q].abs()).sum();
        if off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let (app, aqq) = (m[p * n + p], m[q * n + q]);
                let g = 100.0 * apq.abs();
                // After a few sweeps, drop elements below the diagonals' precision.
                if sweep > 3 && app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
                    m[p * n + q] = 0.0;
                    m[q * n + p] = 0.0;
                    continue;
                }
                let h = aqq - app;
                let t = if h.abs() + g == h.abs() {
                    apq / h
                } else {
                    let theta = 0.5 * h / apq;
                    let t = 1.0 / (theta.abs() + libm::sqrt(1.0 + theta * theta));
                    if theta < 0.0 {
                        -t
                    } else {
                        t
                    }
                };
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = t * c;
                let tau = s / (1.0 + c);
                m[p * n + p] = app - t * apq;
                m[q * n + q] = aqq + t * apq;
                m[p * n + q] = 0.0;
                m[q * n + p] = 0.0;
                for r in 0..n {
                    if r != p && r != q {
                        let arp = m[r * n + p];
                        let arq = m[r * n + q];
                        let new_rp = arp - s * (arq + tau * arp);
                        let new_rq = arq + s * (arp - tau * arq);
                        m[r * n + p] = new_rp;
                        m[p * n + r] = new_rp;
                        m[r * n + q] = new_rq;
                        m[q * n + r] = new_rq;
                    }
                    let vrp = v[r * n + p];
                    let vrq = v[r * n + q];
                    v[r * n + p] = vrp - s * (vrq + tau * vrp);
                    v[r * n + q] = vrq + s * (vrp - tau * vrq);
                }
            }
        }
    }

    let values = (0..n).map(|i| m[i * n + i]).collect();
    let vectors = (0..n).map(|j| (0..n).map(|i| v[i * n + j]).collect()).collect();
    SymmetricEigen { values, vectors }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vector::dot;

    fn check(a: &[f64], n: usize) {
        let e = symmetric_eigen(a, n);
        for (val, vec) in e.values.iter().zip(&e.vectors) {
            for i in 0..n {
                let av: f64 = (0..n).map(|j| a[i * n + j] * vec[j]).sum();
                assert!((av - val * vec[i]).abs() < 1e-10, "A v != lambda v");
            }
        }
        for i in 0..n {
            for j in 0..n {
                let d = dot(&e.vectors[i], &e.vectors[j]);
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((d - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn diagonal_and_2x2() {
        check(&[3.0, 0.0, 0.0, 1.0], 2);
        let e = symmetric_eigen(&[2.0, 1.0, 1.0, 2.0], 2);
        let mut vals = e.values.clone();
        vals.sort_by(f64::total_cmp);
        assert!((vals[0] - 1.0).abs() < 1e-14 && (vals[1] - 3.0).abs() < 1e-14);
        check(&[2.0, 1.0, 1.0, 2.0], 2);
    }

    #[test]
    fn zero_and_rank_one() {
        check(&[0.0; 9], 3);
        // u u^T with u = (1, 2, 2)
        let u = [1.0, 2.0, 2.0];
        let a: Vec<f64> = (0..9).map(|k| u[k / 3] * u[k % 3]).collect();
        check(&a, 3);
        let e = symmetric_eigen(&a, 3);
        let mut vals = e.values.clone();
        vals.sort_by(f64::total_cmp);
        assert!((vals[2] - 9.0).abs() < 1e-12);
        assert!(vals[0].abs() < 1e-12 && vals[1].abs() < 1e-12);
    }

    #[test]
    fn pseudo_random_symmetric() {
        let n = 12;
        let mut state = 0x2545_f491_4f6c_dd1du64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let x = next();
                a[i * n + j] = x;
                a[j * n + i] = x;
            }
        }
        check(&a, n);
    }
}
