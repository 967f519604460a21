//! Connes distance between pure states.
//!
//! With `x = sum x_k b_k` over the self-adjoint basis, `g_k = w1(b_k) - w2(b_k)`
//! and `N(x) = ||[D, pi(x)]||`, the distance is `sup g.x / N(x)`, which equals
//! `1 / min { N(x) : g.x = 1 }`. The minimum is a convex problem on an affine
//! slice of the complement of `ker N`, solved here by a central-cut ellipsoid
//! method whose lower bounds certify the result.

use num_complex::Complex64;

use crate::algebra::{AlgebraElement, FiniteCStarAlgebra, PureState};
use crate::error::{Error, Result};
use crate::numkernel::{operator_norm, svd, top_singular_pair};
use crate::triple::SpectralTriple;
use crate::CMatrix;

pub const MAX_ITERATIONS: usize = 100_000;

/// Singular values of the commutator map below this (relative to `max(s_max, 1)`)
/// span the kernel.
pub const KERNEL_TOL: f64 = 1e-10;

/// Largest self-adjoint dimension the grid oracle accepts.
pub const ORACLE_MAX_DIM: usize = 6;

#[derive(Clone, Debug, PartialEq)]
pub struct DistanceResult {
    /// `f64::INFINITY` when the states differ on `ker N`.
    pub value: f64,
    /// Self-adjoint `x` with `N(x) <= 1` and `w1(x) - w2(x) = value`. For an
    /// infinite distance, an element of `ker N` with `w1(x) - w2(x) = 1`.
    pub witness: AlgebraElement,
    pub iterations: usize,
    /// Upper bound on `true distance - value`.
    pub certified_gap: f64,
    pub converged: bool,
}

impl DistanceResult {
    pub fn is_infinite(&self) -> bool {
        self.value.is_infinite()
    }
}

fn check_state(alg: &FiniteCStarAlgebra, w: &PureState) -> Result<()> {
    match alg.blocks().get(w.block()) {
        Some(&n) if n == w.vector().len() => Ok(()),
        _ => Err(Error::Domain(format!(
            "state on block {} of size {} does not belong to the algebra {:?}",
            w.block(),
            w.vector().len(),
            alg.blocks()
        ))),
    }
}

/// The problem data shared by the solver and the oracle.
struct Problem {
    alg: FiniteCStarAlgebra,
    basis: Vec<AlgebraElement>,
    /// `C_k = [D, pi(b_k)]`.
    comms: Vec<CMatrix>,
    g: Vec<f64>,
}

impl Problem {
    fn new(t: &SpectralTriple, w1: &PureState, w2: &PureState) -> Result<Self> {
        let alg = t.algebra().clone();
        check_state(&alg, w1)?;
        check_state(&alg, w2)?;
        let basis = alg.self_adjoint_basis();
        let comms = basis.iter().map(|b| t.commutator(b)).collect::<Result<Vec<_>>>()?;
        let g = basis.iter().map(|b| (w1.eval(b) - w2.eval(b)).re).collect();
        Ok(Self { alg, basis, comms, g })
    }

    fn d(&self) -> usize {
        self.basis.len()
    }

    fn op(&self, x: &[f64]) -> CMatrix {
        let n = self.comms[0].rows();
        let mut m = CMatrix::zeros(n, n);
        for (c, &xk) in self.comms.iter().zip(x) {
            if xk != 0.0 {
                m.axpy(Complex64::new(xk, 0.0), c);
            }
        }
        m
    }

    fn norm(&self, x: &[f64]) -> f64 {
        operator_norm(&self.op(x)).expect("nonempty")
    }

    /// `N(x)` and a subgradient `Re(u^* C_k v)`.
    fn norm_and_subgradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let (s, u, v) = top_singular_pair(&self.op(x)).expect("nonempty");
        let grad = self
            .comms
            .iter()
            .map(|c| {
                let cv = c.mul_vec(&v);
                u.iter().zip(&cv).map(|(a, b)| a.conj() * b).sum::<Complex64>().re
            })
            .collect();
        (s, grad)
    }

    fn element(&self, x: &[f64]) -> AlgebraElement {
        self.alg.from_self_adjoint_coords(x).expect("matching length")
    }

    fn functional(&self, x: &[f64]) -> f64 {
        dot(&self.g, x)
    }

    /// Realified commutator map `R^d -> C^{n x n}` as a real matrix.
    fn realified(&self) -> CMatrix {
        let n2 = self.comms[0].rows() * self.comms[0].cols();
        let mut m = CMatrix::zeros(2 * n2, self.d());
        for (k, c) in self.comms.iter().enumerate() {
            let col: Vec<Complex64> = c
                .as_slice()
                .iter()
                .map(|z| Complex64::new(z.re, 0.0))
                .chain(c.as_slice().iter().map(|z| Complex64::new(z.im, 0.0)))
                .collect();
            m.set_column(k, &col);
        }
        m
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn real_part(v: &[Complex64]) -> Vec<f64> {
    v.iter().map(|z| z.re).collect()
}

/// Kernel basis, complement basis and the smallest retained singular value.
fn split_kernel(p: &Problem) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>, f64)> {
    let m = p.realified();
    let d = svd(&m)?;
    let cut = KERNEL_TOL * d.s.first().copied().unwrap_or(0.0).max(1.0);
    let mut kernel = Vec::new();
    let mut range = Vec::new();
    let mut smin = f64::INFINITY;
    for i in 0..p.d() {
        let s = d.s.get(i).copied().unwrap_or(0.0);
        let v = real_part(&d.v.column(i));
        if s < cut {
            kernel.push(v);
        } else {
            smin = smin.min(s);
            range.push(v);
        }
    }
    Ok((kernel, range, smin))
}

fn zero_result(p: &Problem) -> DistanceResult {
    DistanceResult {
        value: 0.0,
        witness: p.alg.zero(),
        iterations: 0,
        certified_gap: 0.0,
        converged: true,
    }
}

/// Connes distance between two pure states, to within `tol`.
pub fn connes_distance(t: &SpectralTriple, w1: &PureState, w2: &PureState, tol: f64) -> Result<DistanceResult> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let p = Problem::new(t, w1, w2)?;
    let gnorm = dot(&p.g, &p.g).sqrt();
    if gnorm <= 1e-14 {
        return Ok(zero_result(&p));
    }
    let (kernel, range, smin) = split_kernel(&p)?;
    // Component of g along the kernel: nonzero means unbounded.
    let mut gk = vec![0.0; p.d()];
    for k in &kernel {
        let c = dot(&p.g, k);
        for (a, b) in gk.iter_mut().zip(k) {
            *a += c * b;
        }
    }
    let gk_norm = dot(&gk, &gk).sqrt();
    if gk_norm > 1e-9 * gnorm.max(1.0) {
        let s = 1.0 / (gk_norm * gk_norm);
        let w: Vec<f64> = gk.iter().map(|x| x * s).collect();
        return Ok(DistanceResult {
            value: f64::INFINITY,
            witness: p.element(&w),
            iterations: 0,
            certified_gap: 0.0,
            converged: true,
        });
    }
    // g restricted to the complement.
    let mut gr = vec![0.0; p.d()];
    for r in &range {
        let c = dot(&p.g, r);
        for (a, b) in gr.iter_mut().zip(r) {
            *a += c * b;
        }
    }
    let grn2 = dot(&gr, &gr);
    let x0: Vec<f64> = gr.iter().map(|x| x / grn2).collect();
    let ghat: Vec<f64> = gr.iter().map(|x| x / grn2.sqrt()).collect();
    let slice: Vec<Vec<f64>> = range
        .iter()
        .map(|r| {
            let c = dot(r, &ghat);
            r.iter().zip(&ghat).map(|(a, b)| a - c * b).collect()
        })
        .collect();
    let dirs = gram_schmidt(slice);

    let n = t.dim() as f64;
    let f0 = p.norm(&x0);
    let radius = 1.1 * f0 * n.sqrt() / smin;
    let sol = minimize(&p, &x0, &dirs, radius, tol);
    let x = lift(&x0, &dirs, &sol.y);
    let fx = sol.upper;
    let witness: Vec<f64> = x.iter().map(|v| v / fx).collect();
    let value = 1.0 / fx;
    let gap = if sol.lower > 0.0 { 1.0 / sol.lower - value } else { f64::INFINITY };
    Ok(DistanceResult {
        value,
        witness: p.element(&witness),
        iterations: sol.iterations,
        certified_gap: gap.max(0.0),
        converged: sol.converged,
    })
}

fn gram_schmidt(vs: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(vs.len());
    for mut v in vs {
        for _ in 0..2 {
            for o in &out {
                let c = dot(&v, o);
                for (a, b) in v.iter_mut().zip(o) {
                    *a -= c * b;
                }
            }
        }
        let n = dot(&v, &v).sqrt();
        if n > 1e-8 {
            out.push(v.into_iter().map(|x| x / n).collect());
        }
    }
    out
}

fn lift(x0: &[f64], dirs: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let mut x = x0.to_vec();
    for (d, &yk) in dirs.iter().zip(y) {
        for (a, b) in x.iter_mut().zip(d) {
            *a += yk * b;
        }
    }
    x
}

struct Minimum {
    y: Vec<f64>,
    upper: f64,
    lower: f64,
    iterations: usize,
    converged: bool,
}

/// Minimise `F(y) = N(x0 + P y)` over the ball of the given radius.
fn minimize(p: &Problem, x0: &[f64], dirs: &[Vec<f64>], radius: f64, tol: f64) -> Minimum {
    let m = dirs.len();
    let eval = |y: &[f64]| {
        let x = lift(x0, dirs, y);
        let (f, gx) = p.norm_and_subgradient(&x);
        let gy: Vec<f64> = dirs.iter().map(|d| dot(d, &gx)).collect();
        (f, gy)
    };
    if m == 0 {
        let f = p.norm(x0);
        return Minimum {
            y: Vec::new(),
            upper: f,
            lower: f,
            iterations: 0,
            converged: true,
        };
    }
    let mut c = vec![0.0; m];
    let mut q: Vec<Vec<f64>> = (0..m)
        .map(|i| (0..m).map(|j| if i == j { radius * radius } else { 0.0 }).collect())
        .collect();
    let mut best_y = c.clone();
    let mut upper = f64::INFINITY;
    let mut lower = 0.0f64;
    let mf = m as f64;
    for k in 1..=MAX_ITERATIONS {
        let (f, s) = eval(&c);
        if f < upper {
            upper = f;
            best_y = c.clone();
        }
        let qs: Vec<f64> = q.iter().map(|row| dot(row, &s)).collect();
        let sqs = dot(&s, &qs).max(0.0);
        lower = lower.max(f - sqs.sqrt());
        if lower > 0.0 && 1.0 / lower - 1.0 / upper < tol {
            return Minimum {
                y: best_y,
                upper,
                lower,
                iterations: k,
                converged: true,
            };
        }
        if sqs <= 0.0 {
            // Zero subgradient: c is optimal.
            return Minimum {
                y: best_y,
                upper,
                lower: upper,
                iterations: k,
                converged: true,
            };
        }
        let gt: Vec<f64> = qs.iter().map(|x| x / sqs.sqrt()).collect();
        if m == 1 {
            // Interval bisection: the ellipsoid update degenerates in one dimension.
            c[0] -= gt[0] / 2.0;
            q[0][0] /= 4.0;
            continue;
        }
        for (ci, gi) in c.iter_mut().zip(&gt) {
            *ci -= gi / (mf + 1.0);
        }
        let a = mf * mf / (mf * mf - 1.0);
        let b = 2.0 / (mf + 1.0);
        for i in 0..m {
            for j in 0..m {
                q[i][j] = a * (q[i][j] - b * gt[i] * gt[j]);
            }
        }
        for i in 0..m {
            for j in 0..i {
                let s = 0.5 * (q[i][j] + q[j][i]);
                q[i][j] = s;
                q[j][i] = s;
            }
        }
    }
    Minimum {
        y: best_y,
        upper,
        lower,
        iterations: MAX_ITERATIONS,
        converged: false,
    }
}

/// Brute-force lower bound: the best `|g.x| / N(x)` over the grid
/// `[-r, r]^d` with `steps` points per axis. Every grid point is rescaled onto
/// the constraint boundary, so the result only grows on refined, nested grids.
pub fn distance_oracle(t: &SpectralTriple, w1: &PureState, w2: &PureState, radius: f64, steps: usize) -> Result<f64> {
    let p = Problem::new(t, w1, w2)?;
    let d = p.d();
    if d > ORACLE_MAX_DIM {
        return Err(Error::Refused(format!(
            "grid oracle needs self-adjoint dimension <= {ORACLE_MAX_DIM}, got {d}"
        )));
    }
    if steps < 2 || !(radius > 0.0) {
        return Err(Error::Domain("grid needs at least 2 steps and a positive radius".into()));
    }
    let total = (steps as f64).powi(d as i32);
    if total > 5e7 {
        return Err(Error::Refused(format!("grid of {total:e} points")));
    }
    let h = 2.0 * radius / (steps - 1) as f64;
    let mut idx = vec![0usize; d];
    let mut best = 0.0f64;
    let mut x = vec![0.0; d];
    loop {
        for (xi, &i) in x.iter_mut().zip(&idx) {
            *xi = -radius + h * i as f64;
        }
        let gx = p.functional(&x).abs();
        if gx > 1e-12 {
            let nx = p.norm(&x);
            let xn = dot(&x, &x).sqrt();
            if nx <= 1e-12 * xn {
                return Ok(f64::INFINITY);
            }
            best = best.max(gx / nx);
        }
        let mut k = 0;
        loop {
            if k == d {
                return Ok(best);
            }
            idx[k] += 1;
            if idx[k] < steps {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Upper bound on `value - distance_oracle(.., radius, steps)` for a finite
/// solver result, from rounding its witness to the nearest grid point.
pub fn oracle_resolution(
    t: &SpectralTriple,
    w1: &PureState,
    w2: &PureState,
    result: &DistanceResult,
    radius: f64,
    steps: usize,
) -> Result<f64> {
    if result.is_infinite() {
        return Ok(0.0);
    }
    let p = Problem::new(t, w1, w2)?;
    let x = result.witness.self_adjoint_coords(&p.alg);
    let xmax = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if xmax == 0.0 {
        return Ok(0.0);
    }
    let h = 2.0 * radius / (steps - 1).max(1) as f64;
    // Scale the witness into the box; the grid point is within h/2 per axis.
    let s = radius / xmax;
    let g1: f64 = p.g.iter().map(|v| v.abs()).sum();
    let lip: f64 = p.comms.iter().map(|c| operator_norm(c).expect("nonempty")).sum();
    let n = p.norm(&x) * s;
    let v = p.functional(&x) * s;
    let reached = ((v - g1 * h / 2.0) / (n + lip * h / 2.0)).max(0.0);
    Ok((result.value - reached).max(0.0))
}

/// Pairwise distances, symmetric with zero diagonal.
pub fn distance_matrix(t: &SpectralTriple, states: &[PureState], tol: f64) -> Result<Vec<Vec<f64>>> {
    if states.len() < 2 {
        return Err(Error::Domain("distance matrix needs at least 2 states".into()));
    }
    let k = states.len();
    let mut out = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in i + 1..k {
            let r = connes_distance(t, &states[i], &states[j], tol)?;
            out[i][j] = r.value;
            out[j][i] = r.value;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
