//! Small categories and a seeded generator of commutative full ones.

use num_complex::Complex64;
use rand::Rng;

use super::FiniteCStarCategory;
use crate::numkernel::{direct_sum, hermitian_eig, kron};
use crate::{CMatrix, Error, Result};

fn scalar(z: Complex64) -> CMatrix {
    CMatrix::from_fn(1, 1, |_, _| z)
}

/// Two objects over one point, all Hilbert spaces `C`, with `C_AB` spanned by `z`.
pub fn two_object_point(z: Complex64) -> Result<FiniteCStarCategory> {
    if z.norm() == 0.0 {
        return Err(Error::Domain("generator must be nonzero".into()));
    }
    let one = Complex64::new(1.0, 0.0);
    FiniteCStarCategory::new(
        vec!["A".into(), "B".into()],
        vec![1, 1],
        vec![
            vec![vec![scalar(one)], vec![scalar(z)]],
            vec![vec![scalar(z.conj())], vec![scalar(one)]],
        ],
    )
}

/// Two objects with `C_AB = 0`: commutative but not full.
pub fn disconnected_pair() -> Result<FiniteCStarCategory> {
    let one = scalar(Complex64::new(1.0, 0.0));
    FiniteCStarCategory::new(
        vec!["A".into(), "B".into()],
        vec![1, 1],
        vec![vec![vec![one.clone()], vec![]], vec![vec![], vec![one]]],
    )
}

/// Eigenvectors of a random Hermitian matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let a = CMatrix::from_fn(n, n, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let h = (&a + &a.adjoint()).scale_real(0.5);
    hermitian_eig(&h).expect("small Hermitian matrix").vectors
}

fn random_phase<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU))
}

/// Random commutative full category with `objects` objects over `points`
/// base points. Point `p` carries a multiplicity `m_p <= max_mult` shared by
/// all objects; `H_A` is `sum_p C^{m_p}` in a random orthonormal basis, and
/// each hom basis is a random invertible mixture of the point-wise arrows
/// `z W_A (E_p x V_Ap V_Bp^*) W_B^*` with random moduli and phases `z`.
pub fn random_category<R: Rng + ?Sized>(
    rng: &mut R,
    objects: usize,
    points: usize,
    max_mult: usize,
) -> Result<FiniteCStarCategory> {
    if objects == 0 || points == 0 || max_mult == 0 {
        return Err(Error::Domain("objects, points and multiplicities must be positive".into()));
    }
    let mults: Vec<usize> = (0..points).map(|_| rng.gen_range(1..=max_mult)).collect();
    let dim: usize = mults.iter().sum();
    let frames: Vec<CMatrix> = (0..objects).map(|_| random_unitary(rng, dim)).collect();
    let locals: Vec<Vec<CMatrix>> = (0..objects)
        .map(|_| mults.iter().map(|&m| random_unitary(rng, m)).collect())
        .collect();

    let point_arrow = |a: usize, b: usize, p: usize| -> CMatrix {
        let blocks: Vec<CMatrix> = (0..points)
            .map(|q| {
                if q == p {
                    &locals[a][q] * &locals[b][q].adjoint()
                } else {
                    CMatrix::zeros(mults[q], mults[q])
                }
            })
            .collect();
        let local = direct_sum(&blocks).expect("square blocks");
        &(&frames[a] * &local) * &frames[b].adjoint()
    };

    let mut homs = vec![vec![Vec::new(); objects]; objects];
    for a in 0..objects {
        for b in 0..objects {
            let arrows: Vec<CMatrix> = (0..points)
                .map(|p| point_arrow(a, b, p).scale(random_phase(rng) * rng.gen_range(0.5..2.0)))
                .collect();
            let mix = random_unitary(rng, points);
            let stretch: Vec<f64> = (0..points).map(|_| rng.gen_range(0.5..2.0)).collect();
            homs[a][b] = (0..points)
                .map(|k| {
                    let mut x = CMatrix::zeros(dim, dim);
                    for (p, arrow) in arrows.iter().enumerate() {
                        x.axpy(mix[(k, p)] * stretch[k], arrow);
                    }
                    x
                })
                .collect();
        }
    }
    let names = (0..objects).map(|a| format!("O{a}")).collect();
    FiniteCStarCategory::new(names, vec![dim; objects], homs)
}

/// One object on `C^n x C^k` whose diagonal is `C^n x 1`.
pub fn amplified_algebra(n: usize, k: usize) -> Result<FiniteCStarCategory> {
    if n == 0 || k == 0 {
        return Err(Error::Domain("sizes must be positive".into()));
    }
    let basis = (0..n)
        .map(|i| {
            let e = CMatrix::from_fn(n, n, |r, s| Complex64::new(if r == i && s == i { 1.0 } else { 0.0 }, 0.0));
            kron(&e, &CMatrix::identity(k))
        })
        .collect();
    FiniteCStarCategory::new(vec!["A".into()], vec![n * k], vec![vec![basis]])
}
