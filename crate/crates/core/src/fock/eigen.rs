//! Dense Jacobi eigenvalue iteration for Hermitian matrices.
//!
//! Used only by verification paths (positivity checks of small density
//! operators), so simplicity wins over performance.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::math;

/// Eigenvalues of a Hermitian matrix stored row-major in `a` (n x n).
/// The buffer is consumed as scratch space.
pub fn hermitian_eigenvalues(a: &mut [Complex64], n: usize) -> Vec<f64> {
    assert_eq!(a.len(), n * n);
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return alloc::vec![a[0].re];
    }
    let scale: f64 = a.iter().map(|v| v.norm_sqr()).sum::<f64>().max(1e-300);
    let tol = 1e-30 * scale;

    for _sweep in 0..64 {
        let off: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| a[p * n + q].norm_sqr())
            .sum();
        if off < tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let z = a[p * n + q];
                let zn = z.norm();
                if zn < 1e-300 {
                    continue;
                }
                let phase = z / zn;
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                let tau = (aqq - app) / (2.0 * zn);
                // Smaller-magnitude root of t^2 - 2 tau t - 1 = 0.
                let t = if tau >= 0.0 {
                    -1.0 / (tau + math::sqrt(tau * tau + 1.0))
                } else {
                    1.0 / (math::sqrt(tau * tau + 1.0) - tau)
                };
                let c = 1.0 / math::sqrt(1.0 + t * t);
                let s = t * c;

                // Columns, rows outside the (p,q) block.
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    let new_kp = akp * c + akq * s * phase.conj();
                    let new_kq = -akp * s * phase + akq * c;
                    a[k * n + p] = new_kp;
                    a[k * n + q] = new_kq;
                    a[p * n + k] = new_kp.conj();
                    a[q * n + k] = new_kq.conj();
                }
                let new_pp = app * c * c + 2.0 * c * s * zn + aqq * s * s;
                let new_qq = app * s * s - 2.0 * c * s * zn + aqq * c * c;
                a[p * n + p] = Complex64::new(new_pp, 0.0);
                a[q * n + q] = Complex64::new(new_qq, 0.0);
                a[p * n + q] = Complex64::new(0.0, 0.0);
                a[q * n + p] = Complex64::new(0.0, 0.0);
            }
        }
    }
    (0..n).map(|i| a[i * n + i].re).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sorted(mut v: Vec<f64>) -> Vec<f64> {
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }

    #[test]
    fn two_by_two_real() {
        // [[2,1],[1,2]] has eigenvalues 1 and 3.
        let mut a = alloc::vec![c(2.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)];
        let e = sorted(hermitian_eigenvalues(&mut a, 2));
        assert_abs_diff_eq!(e[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(e[1], 3.0, epsilon = 1e-12);
    }

    #[test]
    fn two_by_two_complex() {
        // [[1, i],[-i, 1]] has eigenvalues 0 and 2.
        let mut a = alloc::vec![c(1.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(1.0, 0.0)];
        let e = sorted(hermitian_eigenvalues(&mut a, 2));
        assert_abs_diff_eq!(e[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(e[1], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn psd_gram_matrix_stays_nonnegative() {
        // Gram matrix B†B of a fixed complex 3x4 B: eigenvalues >= 0 and
        // trace preserved.
        let b: [[Complex64; 4]; 3] = [
            [c(0.3, 0.1), c(-0.2, 0.4), c(0.0, 0.0), c(1.0, -0.3)],
            [c(0.7, 0.0), c(0.1, -0.1), c(0.5, 0.2), c(-0.4, 0.0)],
            [c(0.0, 0.9), c(0.3, 0.3), c(-0.6, 0.1), c(0.2, 0.2)],
        ];
        let n = 4;
        let mut g = alloc::vec![c(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                let mut s = c(0.0, 0.0);
                for row in &b {
                    s += row[i].conj() * row[j];
                }
                g[i * n + j] = s;
            }
        }
        let trace: f64 = (0..n).map(|i| g[i * n + i].re).sum();
        let e = hermitian_eigenvalues(&mut g, n);
        assert!(e.iter().all(|&x| x > -1e-12), "{e:?}");
        assert_abs_diff_eq!(e.iter().sum::<f64>(), trace, epsilon = 1e-10);
    }
}
