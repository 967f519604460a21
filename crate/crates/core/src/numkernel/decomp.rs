use num_complex::Complex;
use num_traits::Float;

use super::matrix::ComplexMatrix;
use super::scalar::{czero, creal, RealScalar};
use crate::error::{dim_err, Error, Result};

const MAX_SWEEPS: usize = 100;

/// Eigenvalues in ascending order with orthonormal eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct HermitianEigen<T> {
    pub values: Vec<T>,
    pub vectors: ComplexMatrix<T>,
}

impl<T: RealScalar> HermitianEigen<T> {
    /// `V diag(values) V^*`.
    pub fn reconstruct(&self) -> ComplexMatrix<T> {
        let d = ComplexMatrix::diagonal(&self.values.iter().map(|&x| creal(x)).collect::<Vec<_>>());
        &(&self.vectors * &d) * &self.vectors.adjoint()
    }
}

/// Rotation that zeroes the `(p, q)` entry of the Hermitian 2x2 problem
/// `[[app, apq], [conj(apq), aqq]]`. Returns `(c, s, phase)`.
fn jacobi_rotation<T: RealScalar>(app: T, aqq: T, apq: Complex<T>) -> (T, T, Complex<T>) {
    let mag = apq.norm();
    let phase = apq / creal(mag);
    let tau = (aqq - app) / (T::lit(2.0) * mag);
    let t = if tau == T::zero() {
        T::one()
    } else {
        tau.signum() / (tau.abs() + (T::one() + tau * tau).sqrt())
    };
    let c = T::one() / (T::one() + t * t).sqrt();
    (c, t * c, phase)
}

/// Cyclic Jacobi eigensolver for Hermitian matrices.
///
/// Each eigenvector is normalised so that its first non-negligible component
/// is real and positive.
pub fn hermitian_eig<T: RealScalar>(m: &ComplexMatrix<T>) -> Result<HermitianEigen<T>> {
    if !m.is_square() || m.is_empty() {
        return dim_err(format!("eigendecomposition of a {}x{} matrix", m.rows(), m.cols()));
    }
    let scale = m.max_abs().max(T::one());
    let herm_tol = T::lit(1e-9) * scale;
    let res = m.hermitian_residual();
    if res > herm_tol {
        return Err(Error::Domain(format!(
            "matrix is not Hermitian (residual {res})"
        )));
    }
    let n = m.rows();
    let mut a = ComplexMatrix::from_fn(n, n, |i, j| {
        if i == j {
            creal(m[(i, i)].re)
        } else if i < j {
            (m[(i, j)] + m[(j, i)].conj()) * T::lit(0.5)
        } else {
            (m[(j, i)].conj() + m[(i, j)]) * T::lit(0.5)
        }
    });
    let mut v = ComplexMatrix::identity(n);
    let fro = a.frobenius_norm();
    let stop = T::jacobi_tol() * fro;

    let off = |a: &ComplexMatrix<T>| {
        let mut s = T::zero();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s = s + a[(i, j)].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    while off(&a) > stop {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence(format!(
                "Jacobi eigensolver did not converge in {MAX_SWEEPS} sweeps"
            )));
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq.norm() == T::zero() {
                    continue;
                }
                let (c, s, ph) = jacobi_rotation(a[(p, p)].re, a[(q, q)].re, apq);
                let sp = ph * s;
                let spc = ph.conj() * s;
                // A <- A G
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * c - akq * spc;
                    a[(k, q)] = akp * sp + akq * c;
                }
                // A <- G^* A
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * c - aqk * sp;
                    a[(q, k)] = apk * spc + aqk * c;
                }
                a[(p, q)] = czero();
                a[(q, p)] = czero();
                a[(p, p)] = creal(a[(p, p)].re);
                a[(q, q)] = creal(a[(q, q)].re);
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * c - vkq * spc;
                    v[(k, q)] = vkp * sp + vkq * c;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).expect("finite eigenvalues"));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = v.column(src);
        fix_phase(&mut col);
        vectors.set_column(dst, &col);
    }
    Ok(HermitianEigen { values, vectors })
}

/// Rotate `v` so that its first component above a small threshold is real positive.
pub fn fix_phase<T: RealScalar>(v: &mut [Complex<T>]) {
    let norm = v.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt();
    if norm == T::zero() {
        return;
    }
    let thresh = norm * T::lit(1e-8).max(T::epsilon() * T::lit(100.0));
    if let Some(&lead) = v.iter().find(|z| z.norm() > thresh) {
        let ph = lead.conj() / creal(lead.norm());
        for z in v.iter_mut() {
            *z = *z * ph;
        }
    }
}

/// Largest singular value, the square root of the top eigenvalue of `M^* M`.
pub fn operator_norm<T: RealScalar>(m: &ComplexMatrix<T>) -> Result<T> {
    if m.is_empty() {
        return dim_err("operator norm of an empty matrix");
    }
    let g = if m.rows() < m.cols() {
        m * &m.adjoint()
    } else {
        &m.adjoint() * m
    };
    let eig = hermitian_eig(&g)?;
    Ok(eig.values.last().copied().unwrap_or(T::zero()).max(T::zero()).sqrt())
}

/// Top singular triple `(sigma, u, v)` with `M v = sigma u`.
pub fn top_singular_pair<T: RealScalar>(
    m: &ComplexMatrix<T>,
) -> Result<(T, Vec<Complex<T>>, Vec<Complex<T>>)> {
    if m.is_empty() {
        return dim_err("singular pair of an empty matrix");
    }
    let eig = hermitian_eig(&(&m.adjoint() * m))?;
    let last = eig.values.len() - 1;
    let sigma = eig.values[last].max(T::zero()).sqrt();
    let v = eig.vectors.column(last);
    let mut u = m.mul_vec(&v);
    if sigma > T::zero() {
        for z in u.iter_mut() {
            *z = *z / creal(sigma);
        }
    } else {
        u.iter_mut().for_each(|z| *z = czero());
        u[0] = creal(T::one());
    }
    Ok((sigma, u, v))
}

/// Thin singular value decomposition `M = U diag(s) V^*`, with `s` descending
/// and `V` square.
#[derive(Clone, Debug)]
pub struct Svd<T> {
    pub u: ComplexMatrix<T>,
    pub s: Vec<T>,
    pub v: ComplexMatrix<T>,
}

/// One-sided Jacobi SVD. Small singular values keep high relative accuracy,
/// which the `M^* M` route loses.
pub fn svd<T: RealScalar>(m: &ComplexMatrix<T>) -> Result<Svd<T>> {
    if m.is_empty() {
        return dim_err("SVD of an empty matrix");
    }
    let (rows, n) = m.shape();
    let mut cols: Vec<Vec<Complex<T>>> = (0..n).map(|j| m.column(j)).collect();
    let mut v = ComplexMatrix::<T>::identity(n);
    let dot = |x: &[Complex<T>], y: &[Complex<T>]| -> Complex<T> {
        x.iter().zip(y).fold(czero(), |acc, (a, b)| acc + a.conj() * *b)
    };
    let eps = T::epsilon() * T::lit(4.0);
    // Columns below this squared norm are rounding noise and are left alone.
    let tiny = {
        let f = eps * m.frobenius_norm();
        f * f
    };
    for sweep in 0.. {
        if sweep == MAX_SWEEPS {
            return Err(Error::NoConvergence(format!(
                "one-sided Jacobi SVD did not converge in {MAX_SWEEPS} sweeps"
            )));
        }
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = dot(&cols[p], &cols[p]).re;
                let beta = dot(&cols[q], &cols[q]).re;
                let gamma = dot(&cols[p], &cols[q]);
                if alpha <= tiny || beta <= tiny {
                    continue;
                }
                if gamma.norm() <= eps * Float::sqrt(alpha * beta) || gamma.norm() == T::zero() {
                    continue;
                }
                rotated = true;
                let (c, s, ph) = jacobi_rotation(alpha, beta, gamma);
                let sp = ph * s;
                let spc = ph.conj() * s;
                for k in 0..rows {
                    let xp = cols[p][k];
                    let xq = cols[q][k];
                    cols[p][k] = xp * c - xq * spc;
                    cols[q][k] = xp * sp + xq * c;
                }
                for k in 0..n {
                    let vp = v[(k, p)];
                    let vq = v[(k, q)];
                    v[(k, p)] = vp * c - vq * spc;
                    v[(k, q)] = vp * sp + vq * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<T> = cols.iter().map(|c| dot(c, c).re.sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).expect("finite singular values"));
    let k = rows.min(n);
    let mut u = ComplexMatrix::zeros(rows, k);
    let mut vs = ComplexMatrix::zeros(n, n);
    let mut s = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        s.push(norms[src]);
        let mut vcol = v.column(src);
        let mut ucol = cols[src].clone();
        // Fix the phase on v and carry it over to u.
        let before = vcol.clone();
        fix_phase(&mut vcol);
        if let Some(idx) = before.iter().position(|z| z.norm() > T::zero()) {
            let ph = vcol[idx] / before[idx];
            for z in ucol.iter_mut() {
                *z = *z * ph;
            }
        }
        vs.set_column(dst, &vcol);
        if dst < k && norms[src] > T::zero() {
            let inv = creal(T::one() / norms[src]);
            u.set_column(dst, &ucol.iter().map(|&z| z * inv).collect::<Vec<_>>());
        }
    }
    s.truncate(n);
    Ok(Svd { u, s, v: vs })
}

/// Orthonormal basis (as columns) of the kernel of `m`: right singular vectors
/// whose singular value is at most `threshold`.
pub fn null_space<T: RealScalar>(m: &ComplexMatrix<T>, threshold: T) -> Result<ComplexMatrix<T>> {
    let d = svd(m)?;
    let n = m.cols();
    let keep: Vec<usize> = (0..n)
        .filter(|&i| d.s.get(i).copied().unwrap_or(T::zero()) <= threshold)
        .collect();
    let cols: Vec<Vec<Complex<T>>> = keep.iter().map(|&i| d.v.column(i)).collect();
    ComplexMatrix::from_columns(n, &cols)
}

/// Numerical rank: singular values above `rel_tol * max(s_max, 1)`.
pub fn rank<T: RealScalar>(m: &ComplexMatrix<T>, rel_tol: T) -> Result<usize> {
    if m.is_empty() {
        return Ok(0);
    }
    let d = svd(m)?;
    let cut = rel_tol * d.s.first().copied().unwrap_or(T::zero()).max(T::one());
    Ok(d.s.iter().filter(|&&s| s > cut).count())
}

/// Minimum-norm least-squares solution of `A x = b`, discarding singular values
/// at or below `rcond * max(s_max, 1)`.
pub fn lstsq<T: RealScalar>(a: &ComplexMatrix<T>, b: &[Complex<T>], rcond: T) -> Result<Vec<Complex<T>>> {
    if a.rows() != b.len() {
        return dim_err(format!("right-hand side of length {} for {} rows", b.len(), a.rows()));
    }
    let d = svd(a)?;
    let cut = rcond * d.s.first().copied().unwrap_or(T::zero()).max(T::one());
    let mut x = vec![czero(); a.cols()];
    for i in 0..d.u.cols() {
        let s = d.s[i];
        if s <= cut || s == T::zero() {
            continue;
        }
        let ui = d.u.column(i);
        let coef = ui.iter().zip(b).fold(czero::<T>(), |acc, (u, y)| acc + u.conj() * *y) / creal(s);
        for (k, xk) in x.iter_mut().enumerate() {
            *xk = *xk + d.v[(k, i)] * coef;
        }
    }
    Ok(x)
}

/// Orthonormal basis of the span of `vectors` (all of length `len`), keeping
/// singular directions above `rel_tol * s_max`.
pub fn span_basis<T: RealScalar>(
    len: usize,
    vectors: &[Vec<Complex<T>>],
    rel_tol: T,
) -> Result<Vec<Vec<Complex<T>>>> {
    if vectors.is_empty() || len == 0 {
        return Ok(Vec::new());
    }
    let m = ComplexMatrix::from_columns(len, vectors)?;
    // Work on the side with fewer columns to keep U well defined.
    let d = if m.cols() <= m.rows() {
        svd(&m)?
    } else {
        let t = svd(&m.adjoint())?;
        Svd {
            u: t.v.clone(),
            s: t.s.clone(),
            v: t.u,
        }
    };
    let smax = d.s.first().copied().unwrap_or(T::zero());
    if smax == T::zero() {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for i in 0..d.u.cols().min(d.s.len()) {
        if d.s[i] > rel_tol * smax {
            let mut col = d.u.column(i);
            fix_phase(&mut col);
            out.push(col);
        }
    }
    Ok(out)
}

/// Euclidean distance from `v` to the span of the orthonormal vectors `basis`.
pub fn distance_to_span<T: RealScalar>(basis: &[Vec<Complex<T>>], v: &[Complex<T>]) -> T {
    let mut r = v.to_vec();
    for _ in 0..2 {
        for b in basis {
            let c = b.iter().zip(&r).fold(czero::<T>(), |acc, (x, y)| acc + x.conj() * *y);
            for (ri, bi) in r.iter_mut().zip(b) {
                *ri = *ri - c * *bi;
            }
        }
    }
    r.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt()
}
