//! Cyclic Jacobi eigen-solvers for complex Hermitian and real symmetric matrices.

use super::matrix::{ComplexMatrix, C64, ZERO};
use super::real::RealMatrix;

const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition with ascending eigenvalues and orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl Eigen {
    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.vectors.column(k)
    }

    /// V f(Λ) V†
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.values.len();
        let fv: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        let v = &self.vectors;
        ComplexMatrix::from_fn(n, n, |i, j| {
            let mut acc = ZERO;
            for k in 0..n {
                if fv[k] != 0.0 {
                    acc += v[(i, k)] * v[(j, k)].conj() * fv[k];
                }
            }
            acc
        })
    }
}

/// Jacobi diagonalisation of the Hermitian part of `a`.
pub(crate) fn jacobi_hermitian(a: &ComplexMatrix) -> Eigen {
    let n = a.rows();
    if a.is_real(0.0) {
        let (values, vecs) = jacobi_symmetric(&RealMatrix::from_fn(n, |i, j| a[(i, j)].re));
        let mut vectors = ComplexMatrix::zeros(n, n);
        for k in 0..n {
            let mut col: Vec<C64> = (0..n).map(|i| C64::new(vecs.get(i, k), 0.0)).collect();
            fix_phase(&mut col);
            vectors.set_column(k, &col);
        }
        return Eigen { values, vectors };
    }
    let mut m = a.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let scale = m.frobenius_norm().max(f64::MIN_POSITIVE);

    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                let r = apq.norm();
                if r <= 1e-300 || r <= 1e-18 * scale {
                    continue;
                }
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let theta = 0.5 * (2.0 * r).atan2(aqq - app);
                let (s, c) = theta.sin_cos();
                let ph = (apq / r).conj();
                // G = diag(1, e^{-iφ}) · [[c, s], [-s, c]]
                let g = [[C64::new(c, 0.0), C64::new(s, 0.0)], [ph * (-s), ph * c]];
                rotate(&mut m, &mut v, p, q, &g);
                m[(p, q)] = ZERO;
                m[(q, p)] = ZERO;
                m[(p, p)] = C64::new(m[(p, p)].re, 0.0);
                m[(q, q)] = C64::new(m[(q, q)].re, 0.0);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));
    let values = order.iter().map(|&i| diag[i]).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = v.column(src);
        fix_phase(&mut col);
        vectors.set_column(dst, &col);
    }
    Eigen { values, vectors }
}

fn rotate(m: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize, g: &[[C64; 2]; 2]) {
    let n = m.rows();
    for k in 0..n {
        let (kp, kq) = (m[(k, p)], m[(k, q)]);
        m[(k, p)] = kp * g[0][0] + kq * g[1][0];
        m[(k, q)] = kp * g[0][1] + kq * g[1][1];
    }
    for k in 0..n {
        let (pk, qk) = (m[(p, k)], m[(q, k)]);
        m[(p, k)] = g[0][0].conj() * pk + g[1][0].conj() * qk;
        m[(q, k)] = g[0][1].conj() * pk + g[1][1].conj() * qk;
    }
    for k in 0..n {
        let (kp, kq) = (v[(k, p)], v[(k, q)]);
        v[(k, p)] = kp * g[0][0] + kq * g[1][0];
        v[(k, q)] = kp * g[0][1] + kq * g[1][1];
    }
}

/// Makes the first non-negligible amplitude real and positive.
pub fn fix_phase(v: &mut [C64]) {
    let scale = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if let Some(z) = v.iter().find(|z| z.norm() > 1e-8 * scale.max(f64::MIN_POSITIVE)).copied() {
        let ph = (z / z.norm()).conj();
        for x in v.iter_mut() {
            *x *= ph;
        }
    }
}

/// Real symmetric eigen-decomposition, ascending; eigenvectors are columns.
pub fn jacobi_symmetric(a: &RealMatrix) -> (Vec<f64>, RealMatrix) {
    let n = a.n();
    let mut m = a.symmetrized();
    let mut v = RealMatrix::identity(n);
    let scale = m.frobenius_norm().max(f64::MIN_POSITIVE);

    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m.get(p, q) * m.get(p, q);
            }
        }
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m.get(p, q);
                if apq.abs() <= 1e-300 || apq.abs() <= 1e-18 * scale {
                    continue;
                }
                let theta = 0.5 * (2.0 * apq).atan2(m.get(q, q) - m.get(p, p));
                let (s, c) = theta.sin_cos();
                for k in 0..n {
                    let (kp, kq) = (m.get(k, p), m.get(k, q));
                    m.set(k, p, c * kp - s * kq);
                    m.set(k, q, s * kp + c * kq);
                }
                for k in 0..n {
                    let (pk, qk) = (m.get(p, k), m.get(q, k));
                    m.set(p, k, c * pk - s * qk);
                    m.set(q, k, s * pk + c * qk);
                }
                for k in 0..n {
                    let (kp, kq) = (v.get(k, p), v.get(k, q));
                    v.set(k, p, c * kp - s * kq);
                    v.set(k, q, s * kp + c * kq);
                }
                m.set(p, q, 0.0);
                m.set(q, p, 0.0);
            }
        }
    }

    let diag: Vec<f64> = (0..n).map(|i| m.get(i, i)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));
    let values = order.iter().map(|&i| diag[i]).collect();
    let mut vectors = RealMatrix::zeros(n);
    for (dst, &src) in order.iter().enumerate() {
        for k in 0..n {
            vectors.set(k, dst, v.get(k, src));
        }
    }
    (values, vectors)
}
