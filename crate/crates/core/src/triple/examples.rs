//! Small triples with known answers.

use num_complex::Complex64;
use rand::Rng;

use super::{Representation, SpectralTriple};
use crate::algebra::{FiniteCStarAlgebra, PureState};
use crate::cstarcat::examples::random_unitary;
use crate::numkernel::kron;
use crate::{CAntiunitary, CMatrix, Error, Result};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_rows(&[vec![c(0.0, 0.0), c(0.0, -1.0)], vec![c(0.0, 1.0), c(0.0, 0.0)]]).expect("2x2")
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]])
}

/// `A = C^2` on `C^2` with `D = [[0, conj(lambda)], [lambda, 0]]`.
pub fn two_point(lambda: Complex64) -> SpectralTriple {
    let alg = FiniteCStarAlgebra::commutative(2).expect("two blocks");
    let rep = Representation::new(alg, vec![1, 1], None).expect("valid representation");
    let d = CMatrix::from_fn(2, 2, |i, j| match (i, j) {
        (0, 1) => lambda.conj(),
        (1, 0) => lambda,
        _ => c(0.0, 0.0),
    });
    SpectralTriple::new(rep, d).expect("Hermitian by construction")
}

/// Two-point triple graded by `diag(1, -1)`.
pub fn two_point_even(lambda: Complex64) -> SpectralTriple {
    two_point(lambda).with_grading(pauli_z()).expect("same size")
}

/// Graded two-point triple with `J` = complex conjugation, labelled KO 0.
/// The first-order condition fails for `lambda != 0`.
pub fn two_point_real(lambda: f64) -> SpectralTriple {
    two_point_even(c(lambda, 0.0))
        .with_real_structure(CAntiunitary::conjugation(2), Some(0))
        .expect("same size")
}

/// Real even two-point triple of KO-dimension 0 on `C^2 (x) C^2`: `A = C^2`
/// acts on the first factor, `J` swaps the factors, `D = lambda (s_x (x) 1 + 1 (x) s_x)`
/// and `Gamma = s_z (x) s_z`. Distance between the two points is `1/lambda`.
pub fn two_point_real_full(lambda: f64) -> SpectralTriple {
    let alg = FiniteCStarAlgebra::commutative(2).expect("two blocks");
    let rep = Representation::new(alg, vec![2, 2], None).expect("valid representation");
    let id = CMatrix::identity(2);
    let d = (&kron(&pauli_x(), &id) + &kron(&id, &pauli_x())).scale_real(lambda);
    let swap = CMatrix::from_fn(4, 4, |i, j| {
        let (a, b) = (i / 2, i % 2);
        if j == b * 2 + a {
            c(1.0, 0.0)
        } else {
            c(0.0, 0.0)
        }
    });
    SpectralTriple::new(rep, d)
        .and_then(|t| t.with_grading(kron(&pauli_z(), &pauli_z())))
        .and_then(|t| t.with_real_structure(CAntiunitary::new(swap, 1e-12)?, Some(0)))
        .expect("consistent sizes")
}

/// `C` acting by scalars with the given `D`, optional grading and `J = U K`.
fn scalar_triple(d: CMatrix, grading: Option<CMatrix>, u: CMatrix, n: u8) -> SpectralTriple {
    let dim = d.rows();
    let alg = FiniteCStarAlgebra::new(vec![1]).expect("one block");
    let rep = Representation::new(alg, vec![dim], None).expect("valid representation");
    let mut t = SpectralTriple::new(rep, d).expect("Hermitian");
    if let Some(g) = grading {
        t = t.with_grading(g).expect("same size");
    }
    t.with_real_structure(CAntiunitary::new(u, 1e-12).expect("unitary"), Some(n))
        .expect("same size")
}

/// A real triple whose signs match exactly the table row of `n mod 8`, and
/// differ from every other row.
pub fn ko_triple(n: u8) -> SpectralTriple {
    let id2 = CMatrix::identity(2);
    let isy = pauli_y().scale(c(0.0, 1.0));
    match n % 8 {
        0 => scalar_triple(pauli_x(), Some(pauli_z()), id2, 0),
        1 => scalar_triple(pauli_y(), None, id2, 1),
        2 => scalar_triple(
            kron(&pauli_x(), &pauli_y()),
            Some(kron(&pauli_z(), &id2)),
            kron(&isy, &id2),
            2,
        ),
        3 => scalar_triple(id2, None, isy, 3),
        4 => scalar_triple(
            kron(&id2, &pauli_x()),
            Some(kron(&id2, &pauli_z())),
            kron(&isy, &id2),
            4,
        ),
        5 => scalar_triple(pauli_z(), None, isy, 5),
        6 => scalar_triple(pauli_x(), Some(pauli_y()), id2, 6),
        _ => scalar_triple(pauli_x(), None, id2, 7),
    }
}

/// `C` on `C` with `D = 0`, `Gamma = 1`, `J` = conjugation, labelled `n`.
pub fn scalar_real(n: u8) -> SpectralTriple {
    let one = CMatrix::identity(1);
    scalar_triple(CMatrix::zeros(1, 1), Some(one.clone()), one, n)
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let a = CMatrix::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    (&a + &a.adjoint()).scale_real(0.5)
}

/// Faithful triple with blocks of size 1 or 2, Hilbert dimension in
/// `1..=max_dim`, a random basis change and a random Hermitian `D`.
pub fn random_triple<R: Rng + ?Sized>(rng: &mut R, max_dim: usize) -> Result<SpectralTriple> {
    if max_dim == 0 {
        return Err(Error::Domain("max_dim must be positive".into()));
    }
    let (mut blocks, mut mults, mut dim) = (Vec::new(), Vec::new(), 0);
    loop {
        let n = rng.gen_range(1..=2usize);
        let m = rng.gen_range(1..=2usize);
        if dim + n * m > max_dim {
            if blocks.is_empty() {
                continue;
            }
            break;
        }
        blocks.push(n);
        mults.push(m);
        dim += n * m;
        if rng.gen_bool(0.3) {
            break;
        }
    }
    let w = random_unitary(rng, dim);
    let rep = Representation::new(FiniteCStarAlgebra::new(blocks)?, mults, Some(w))?;
    SpectralTriple::new(rep, random_hermitian(rng, dim))
}

/// Vector state on a uniformly chosen block.
pub fn random_pure_state<R: Rng + ?Sized>(rng: &mut R, alg: &FiniteCStarAlgebra) -> Result<PureState> {
    let b = rng.gen_range(0..alg.num_blocks());
    let v = (0..alg.blocks()[b])
        .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    PureState::new(alg, b, v)
}
