use num_complex::Complex64;

use crate::algebra::{spectrum, AlgebraHomomorphism, PureState};
use crate::distance::connes_distance;
use crate::error::{dim_err, Error, Result};
use crate::numkernel::{null_space, operator_norm};
use crate::report::{Check, Report, Status};
use crate::triple::SpectralTriple;
use crate::{CAntiunitary, CMatrix};

/// `(phi, Phi)` with `phi: A_1 -> A_2` and `Phi: H_1 -> H_2`.
#[derive(Clone, Debug, PartialEq)]
pub struct TripleMorphism {
    pub source: SpectralTriple,
    pub target: SpectralTriple,
    pub phi: AlgebraHomomorphism,
    pub map: CMatrix,
    pub check_real: bool,
    pub check_even: bool,
}

impl TripleMorphism {
    pub fn new(source: SpectralTriple, target: SpectralTriple, phi: AlgebraHomomorphism, map: CMatrix) -> Result<Self> {
        if phi.source() != source.algebra() || phi.target() != target.algebra() {
            return dim_err("algebra homomorphism does not match the triples' algebras");
        }
        if map.shape() != (target.dim(), source.dim()) {
            return dim_err(format!(
                "Hilbert space map is {}x{}, expected {}x{}",
                map.rows(),
                map.cols(),
                target.dim(),
                source.dim()
            ));
        }
        Ok(Self {
            source,
            target,
            phi,
            map,
            check_real: false,
            check_even: false,
        })
    }

    pub fn identity(t: &SpectralTriple) -> Self {
        Self {
            source: t.clone(),
            target: t.clone(),
            phi: AlgebraHomomorphism::identity(t.algebra()),
            map: CMatrix::identity(t.dim()),
            check_real: t.real_structure().is_some(),
            check_even: t.grading().is_some(),
        }
    }

    /// `self` after `first`: `(phi o phi_first, Phi Phi_first)`.
    pub fn compose(&self, first: &TripleMorphism) -> Result<TripleMorphism> {
        if first.target != self.source {
            return dim_err("composing morphisms whose middle triples differ");
        }
        Ok(Self {
            source: first.source.clone(),
            target: self.target.clone(),
            phi: self.phi.compose(&first.phi)?,
            map: &self.map * &first.map,
            check_real: self.check_real && first.check_real,
            check_even: self.check_even && first.check_even,
        })
    }

    pub fn map_norm(&self) -> f64 {
        operator_norm(&self.map).unwrap_or(0.0)
    }

    fn representation_residual(&self) -> f64 {
        let alg = self.source.algebra();
        alg.matrix_units()
            .into_iter()
            .map(|u| {
                let x = alg.matrix_unit(u);
                let lhs = &self.target.pi(&self.phi.apply(&x).expect("source element")).expect("target element") * &self.map;
                let rhs = &self.map * &self.source.pi(&x).expect("source element");
                norm(&(&lhs - &rhs))
            })
            .fold(0.0, f64::max)
    }

    fn commutator_residual(&self) -> f64 {
        let alg = self.source.algebra();
        alg.matrix_units()
            .into_iter()
            .map(|u| {
                let x = alg.matrix_unit(u);
                let lhs = &self.target.commutator(&self.phi.apply(&x).expect("source element")).expect("target element")
                    * &self.map;
                let rhs = &self.map * &self.source.commutator(&x).expect("source element");
                norm(&(&lhs - &rhs))
            })
            .fold(0.0, f64::max)
    }

    fn optional_checks(&self, r: &mut Report, tol: f64) -> Result<()> {
        if self.check_real {
            let (j1, j2) = match (self.source.real_structure(), self.target.real_structure()) {
                (Some(a), Some(b)) => (a, b),
                _ => return Err(Error::Precondition("real check requested but a real structure is missing".into())),
            };
            r.push(Check::residual(
                "real-structure",
                CAntiunitary::intertwining_residual(j2, &self.map, j1),
                tol,
            ));
        }
        if self.check_even {
            let (g1, g2) = match (self.source.grading(), self.target.grading()) {
                (Some(a), Some(b)) => (a, b),
                _ => return Err(Error::Precondition("even check requested but a grading is missing".into())),
            };
            r.push(Check::residual("grading", norm(&(&(g2 * &self.map) - &(&self.map * g1))), tol));
        }
        Ok(())
    }

    fn homomorphism_summary(&self, tol: f64) -> Check {
        let rep = self.phi.check(tol);
        let worst = rep.worst_residual();
        Check::residual("homomorphism", worst, tol)
    }
}

fn norm(m: &CMatrix) -> f64 {
    operator_norm(m).unwrap_or(f64::NAN)
}

/// `pi_2(phi(x)) Phi = Phi pi_1(x)` and `D_2 Phi = Phi D_1`, plus the
/// requested real and even intertwinings.
pub fn validate_tgs(m: &TripleMorphism, tol: f64) -> Result<Report> {
    let mut r = Report::new();
    r.push(m.homomorphism_summary(tol));
    r.push(Check::residual("representation", m.representation_residual(), tol));
    let d = &(m.target.dirac() * &m.map) - &(&m.map * m.source.dirac());
    r.push(Check::residual("dirac", norm(&d), tol));
    m.optional_checks(&mut r, tol)?;
    Ok(r)
}

/// Representation intertwining plus `[D_2, phi(x)] Phi = Phi [D_1, x]`.
pub fn validate_riemannian(m: &TripleMorphism, tol: f64) -> Result<Report> {
    let mut r = Report::new();
    r.push(m.homomorphism_summary(tol));
    r.push(Check::residual("representation", m.representation_residual(), tol));
    r.push(Check::residual("commutators", m.commutator_residual(), tol));
    m.optional_checks(&mut r, tol)?;
    Ok(r)
}

/// `w o phi` as a pure state of the source algebra.
fn pullback_state(phi: &AlgebraHomomorphism, w: &PureState, tol: f64) -> Result<PureState> {
    let values: Vec<Complex64> = phi.images().iter().map(|x| w.eval(x)).collect();
    PureState::from_functional(phi.source(), &values, tol.max(1e-9))
}

/// Compares `d_1(w o phi, v o phi)` with `d_2(w, v)` on every pair of target
/// states. Commutative targets default to their characters.
pub fn validate_metric(m: &TripleMorphism, tol: f64, states: Option<&[PureState]>) -> Result<Report> {
    let phi = &m.phi;
    if !phi.is_surjective(1e-9) {
        let cols: Vec<Vec<Complex64>> = phi.images().iter().map(|x| x.coords()).collect();
        let img = CMatrix::from_columns(phi.target().dim(), &cols)?;
        let w = null_space(&img.adjoint(), 1e-9)?;
        let witness: Vec<String> = w.column(0).iter().map(|z| format!("{:.6}", z)).collect();
        return Err(Error::Precondition(format!(
            "phi is not onto; the functional [{}] on matrix units vanishes on its image",
            witness.join(", ")
        )));
    }
    let owned;
    let states = match states {
        Some(s) => s,
        None => {
            owned = spectrum(phi.target())
                .map_err(|_| Error::Precondition("non-commutative target: supply a state sample".into()))?
                .into_iter()
                .map(PureState::from_character)
                .collect::<Vec<_>>();
            &owned
        }
    };
    let mut r = Report::new();
    let solve = tol / 4.0;
    let mut worst = 0.0f64;
    let mut mismatched = Vec::new();
    for a in 0..states.len() {
        for b in a + 1..states.len() {
            let d2 = connes_distance(&m.target, &states[a], &states[b], solve)?.value;
            let p1 = pullback_state(phi, &states[a], tol)?;
            let p2 = pullback_state(phi, &states[b], tol)?;
            let d1 = connes_distance(&m.source, &p1, &p2, solve)?.value;
            let diff = match (d1.is_infinite(), d2.is_infinite()) {
                (true, true) => 0.0,
                (false, false) => (d1 - d2).abs(),
                _ => f64::INFINITY,
            };
            if diff > tol {
                mismatched.push(format!("({a},{b}): {d1:.9} vs {d2:.9}"));
            }
            worst = worst.max(diff);
        }
    }
    let pairs = states.len() * states.len().saturating_sub(1) / 2;
    let mut c = Check::residual("isometry", worst, tol).with_detail(if pairs == 0 {
        "no pairs".to_string()
    } else {
        mismatched.join("; ")
    });
    if pairs == 0 {
        c.status = Status::Pass;
    }
    r.push(c);
    Ok(r)
}
