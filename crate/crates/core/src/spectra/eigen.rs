//! Dense complex eigensolver: Householder reduction to upper Hessenberg
//! form followed by single-shift QR iteration (Wilkinson shifts, Givens
//! rotations) down to complex Schur form.

use num_complex::Complex64;

use crate::error::{Error, Result};

type C = Complex64;

const EPS: f64 = f64::EPSILON;

/// Row-major square complex matrix.
#[derive(Clone, Debug)]
pub(crate) struct Dense {
    pub n: usize,
    pub a: Vec<C>,
}

impl Dense {
    pub fn identity(n: usize) -> Self {
        let mut a = vec![C::new(0.0, 0.0); n * n];
        for i in 0..n {
            a[i * n + i] = C::new(1.0, 0.0);
        }
        Dense { n, a }
    }

    #[inline]
    fn at(&self, r: usize, c: usize) -> C {
        self.a[r * self.n + c]
    }

    #[inline]
    fn at_mut(&mut self, r: usize, c: usize) -> &mut C {
        &mut self.a[r * self.n + c]
    }

    pub fn frobenius(&self) -> f64 {
        self.a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn mul_vec(&self, v: &[C]) -> Vec<C> {
        (0..self.n).map(|r| (0..self.n).map(|c| self.at(r, c) * v[c]).sum()).collect()
    }
}

/// Complex Schur decomposition `A = Z T Z^*` with `T` upper triangular.
pub(crate) struct Schur {
    pub t: Dense,
    pub z: Dense,
}

fn hessenberg(h: &mut Dense, z: &mut Dense) {
    let n = h.n;
    for k in 0..n.saturating_sub(2) {
        let mut v: Vec<C> = (k + 1..n).map(|r| h.at(r, k)).collect();
        let xnorm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let phase = if v[0].norm() == 0.0 { C::new(1.0, 0.0) } else { v[0] / v[0].norm() };
        v[0] += phase * xnorm;
        let vnorm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        v.iter_mut().for_each(|x| *x /= vnorm);

        // H ← (I - 2vv*) H
        for c in 0..n {
            let dot: C = v.iter().enumerate().map(|(i, vi)| vi.conj() * h.at(k + 1 + i, c)).sum();
            for (i, vi) in v.iter().enumerate() {
                *h.at_mut(k + 1 + i, c) -= 2.0 * vi * dot;
            }
        }
        // H ← H (I - 2vv*), Z ← Z (I - 2vv*)
        for m in [&mut *h, &mut *z] {
            for r in 0..n {
                let dot: C = v.iter().enumerate().map(|(i, vi)| m.at(r, k + 1 + i) * vi).sum();
                for (i, vi) in v.iter().enumerate() {
                    *m.at_mut(r, k + 1 + i) -= 2.0 * dot * vi.conj();
                }
            }
        }
        for r in k + 2..n {
            *h.at_mut(r, k) = C::new(0.0, 0.0);
        }
    }
}

// Rotation [[c, s], [-conj(s), c]] mapping (x, y) to (r, 0).
fn givens(x: C, y: C) -> (f64, C) {
    let ax = x.norm();
    let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
    if r == 0.0 {
        return (1.0, C::new(0.0, 0.0));
    }
    if ax == 0.0 {
        return (0.0, C::new(1.0, 0.0));
    }
    (ax / r, x * y.conj() / (ax * r))
}

fn wilkinson_shift(a: C, b: C, c: C, d: C) -> C {
    let half_tr = (a + d) * 0.5;
    let disc = ((a - d) * 0.5).powi(2) + b * c;
    let root = disc.sqrt();
    let (l1, l2) = (half_tr + root, half_tr - root);
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Iteration cap is `100·n` QR sweeps in total.
pub(crate) fn complex_schur(a: &Dense) -> Result<Schur> {
    let n = a.n;
    let mut h = a.clone();
    let mut z = Dense::identity(n);
    hessenberg(&mut h, &mut z);
    let norm = h.frobenius().max(f64::MIN_POSITIVE);

    let cap = 100 * n.max(1);
    let mut sweeps = 0;
    let mut since_deflation = 0;
    let mut hi = n.saturating_sub(1);
    while hi > 0 {
        let mut lo = hi;
        while lo > 0 {
            let mut s = h.at(lo - 1, lo - 1).norm() + h.at(lo, lo).norm();
            if s == 0.0 {
                s = norm;
            }
            if h.at(lo, lo - 1).norm() <= EPS * s {
                *h.at_mut(lo, lo - 1) = C::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            since_deflation = 0;
            continue;
        }

        sweeps += 1;
        since_deflation += 1;
        if sweeps > cap {
            return Err(Error::NumericFailure { index: hi });
        }

        let shift = if since_deflation % 11 == 10 {
            // Exceptional shift to break cycles.
            h.at(hi, hi) + h.at(hi, hi - 1).norm() * 0.75
        } else {
            wilkinson_shift(h.at(hi - 1, hi - 1), h.at(hi - 1, hi), h.at(hi, hi - 1), h.at(hi, hi))
        };

        for k in lo..=hi {
            *h.at_mut(k, k) -= shift;
        }
        let mut rots = Vec::with_capacity(hi - lo);
        for k in lo..hi {
            let (c, s) = givens(h.at(k, k), h.at(k + 1, k));
            for col in k..n {
                let (u, w) = (h.at(k, col), h.at(k + 1, col));
                *h.at_mut(k, col) = u * c + s * w;
                *h.at_mut(k + 1, col) = -s.conj() * u + w * c;
            }
            rots.push((c, s));
        }
        for (idx, &(c, s)) in rots.iter().enumerate() {
            let k = lo + idx;
            for row in 0..=k + 1 {
                let (u, w) = (h.at(row, k), h.at(row, k + 1));
                *h.at_mut(row, k) = u * c + w * s.conj();
                *h.at_mut(row, k + 1) = -u * s + w * c;
            }
            for row in 0..n {
                let (u, w) = (z.at(row, k), z.at(row, k + 1));
                *z.at_mut(row, k) = u * c + w * s.conj();
                *z.at_mut(row, k + 1) = -u * s + w * c;
            }
        }
        for k in lo..=hi {
            *h.at_mut(k, k) += shift;
        }
    }
    for r in 1..n {
        for c in 0..r {
            *h.at_mut(r, c) = C::new(0.0, 0.0);
        }
    }
    Ok(Schur { t: h, z })
}

/// Eigenvector for the `k`-th diagonal entry of `T`, by back substitution
/// in `T`, mapped back through `Z`.
pub(crate) fn schur_eigenvector(schur: &Schur, k: usize) -> Vec<C> {
    let t = &schur.t;
    let n = t.n;
    let lambda = t.at(k, k);
    let small = EPS * t.frobenius().max(f64::MIN_POSITIVE);
    let mut y = vec![C::new(0.0, 0.0); n];
    y[k] = C::new(1.0, 0.0);
    for j in (0..k).rev() {
        let acc: C = (j + 1..=k).map(|p| t.at(j, p) * y[p]).sum();
        let mut denom = t.at(j, j) - lambda;
        if denom.norm() < small {
            denom = C::new(small, 0.0);
        }
        y[j] = -acc / denom;
    }
    let mut v = schur.z.mul_vec(&y);
    let vn = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= vn);
    v
}

/// Eigenvalues with their residuals `‖Av − λv‖₂` for unit eigenvectors `v`.
pub(crate) fn eigen_with_residuals(a: &Dense) -> Result<Vec<(C, f64)>> {
    let schur = complex_schur(a)?;
    Ok((0..a.n)
        .map(|k| {
            let lambda = schur.t.at(k, k);
            let v = schur_eigenvector(&schur, k);
            let av = a.mul_vec(&v);
            let res = av.iter().zip(&v).map(|(x, y)| (x - lambda * y).norm_sqr()).sum::<f64>().sqrt();
            (lambda, res)
        })
        .collect())
}
