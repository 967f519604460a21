//! Rank-one Fell bundles over `X x (O x O)` stored by structure constants,
//! the section category, the spectrum of a commutative full C*-category and
//! the transforms between them.

use num_complex::Complex64;

use crate::cstarcat::{
    base_spectrum, is_permutation, validate_category, BaseSpectrum, CStarFunctor, FiniteCStarCategory, StarFunctor,
};
use crate::error::dim_err;
use crate::numkernel::{operator_norm, span_basis};
use crate::report::{Check, Report, Status};
use crate::{CMatrix, Error, Result};

pub mod examples;


const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Fibers `E_{p,(A,B)}` with unit vectors `e_AB`, `e_AB e_BC = mu e_AC`
/// and `e_AB^* = iota e_BA`.
#[derive(Clone, Debug, PartialEq)]
pub struct Spaceoid {
    base_points: usize,
    objects: Vec<String>,
    mu: Vec<Complex64>,
    iota: Vec<Complex64>,
}

impl Spaceoid {
    /// `mu[p][a][b][c]` and `iota[p][a][b]`.
    pub fn new(
        base_points: usize,
        objects: Vec<String>,
        mu: Vec<Vec<Vec<Vec<Complex64>>>>,
        iota: Vec<Vec<Vec<Complex64>>>,
    ) -> Result<Self> {
        let n = objects.len();
        if base_points == 0 || n == 0 {
            return Err(Error::Domain("a spaceoid needs base points and objects".into()));
        }
        for (i, name) in objects.iter().enumerate() {
            if objects[..i].contains(name) {
                return Err(Error::Domain(format!("duplicate object {name:?}")));
            }
        }
        let mu_ok = mu.len() == base_points
            && mu
                .iter()
                .all(|m| m.len() == n && m.iter().all(|r| r.len() == n && r.iter().all(|s| s.len() == n)));
        let iota_ok = iota.len() == base_points && iota.iter().all(|m| m.len() == n && m.iter().all(|r| r.len() == n));
        if !mu_ok || !iota_ok {
            return dim_err(format!(
                "structure constants must be {base_points}x{n}x{n}x{n} (mu) and {base_points}x{n}x{n} (iota)"
            ));
        }
        Ok(Self {
            base_points,
            objects,
            mu: mu.into_iter().flatten().flatten().flatten().collect(),
            iota: iota.into_iter().flatten().flatten().collect(),
        })
    }

    /// All structure constants equal to one.
    pub fn trivial(base_points: usize, objects: Vec<String>) -> Result<Self> {
        let n = objects.len();
        Self::new(
            base_points,
            objects,
            vec![vec![vec![vec![ONE; n]; n]; n]; base_points],
            vec![vec![vec![ONE; n]; n]; base_points],
        )
    }

    pub fn base_points(&self) -> usize {
        self.base_points
    }

    pub fn objects(&self) -> &[String] {
        &self.objects
    }

    pub fn num_objects(&self) -> usize {
        self.objects.len()
    }

    fn idx3(&self, p: usize, a: usize, b: usize) -> usize {
        let n = self.num_objects();
        (p * n + a) * n + b
    }

    pub fn mu(&self, p: usize, a: usize, b: usize, c: usize) -> Complex64 {
        self.mu[self.idx3(p, a, b) * self.num_objects() + c]
    }

    pub fn iota(&self, p: usize, a: usize, b: usize) -> Complex64 {
        self.iota[self.idx3(p, a, b)]
    }

    pub fn set_mu(&mut self, p: usize, a: usize, b: usize, c: usize, z: Complex64) {
        let i = self.idx3(p, a, b) * self.num_objects() + c;
        self.mu[i] = z;
    }

    pub fn set_iota(&mut self, p: usize, a: usize, b: usize, z: Complex64) {
        let i = self.idx3(p, a, b);
        self.iota[i] = z;
    }

    /// Rescales the unit vectors, `e'_AB = g_AB e_AB` with `|g| = 1`, indexed `g[p][a][b]`.
    pub fn gauge_twist(&self, g: &[Vec<Vec<Complex64>>]) -> Result<Self> {
        let n = self.num_objects();
        if g.len() != self.base_points || g.iter().any(|m| m.len() != n || m.iter().any(|r| r.len() != n)) {
            return dim_err("gauge must be indexed by point and object pair");
        }
        if g.iter().flatten().flatten().any(|z| (z.norm() - 1.0).abs() > 1e-12) {
            return Err(Error::Domain("gauge factors must have unit modulus".into()));
        }
        let mut out = self.clone();
        for (p, gp) in g.iter().enumerate() {
            for a in 0..n {
                for b in 0..n {
                    out.set_iota(p, a, b, (gp[a][b] * gp[b][a]).conj() * self.iota(p, a, b));
                    for c in 0..n {
                        out.set_mu(p, a, b, c, gp[a][b] * gp[b][c] * gp[a][c].conj() * self.mu(p, a, b, c));
                    }
                }
            }
        }
        Ok(out)
    }

    /// Largest difference of structure constants; infinite for different shapes or labels.
    pub fn max_difference(&self, other: &Spaceoid) -> f64 {
        if self.base_points != other.base_points || self.objects != other.objects {
            return f64::INFINITY;
        }
        self.mu
            .iter()
            .zip(&other.mu)
            .chain(self.iota.iter().zip(&other.iota))
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }
}

struct Worst {
    value: f64,
    at: String,
}

impl Worst {
    fn new() -> Self {
        Self {
            value: 0.0,
            at: String::new(),
        }
    }

    fn see(&mut self, value: f64, at: impl FnOnce() -> String) {
        if value > self.value || value.is_nan() {
            self.value = value;
            self.at = at();
        }
    }

    fn check(self, name: &str, tol: f64) -> Check {
        let detail = if self.value > tol { format!("worst at {}", self.at) } else { String::new() };
        Check::residual(name, self.value, tol).with_detail(detail)
    }
}

/// Every Fell-bundle identity on the structure constants, exhaustively.
pub fn validate_spaceoid(s: &Spaceoid, tol: f64) -> Report {
    let n = s.num_objects();
    let o = |i: usize| s.objects[i].as_str();
    let mut report = Report::new();

    // (e_AB e_BC) e_CD = e_AB (e_BC e_CD); blame the triple used most by failing quadruples.
    let mut worst = Worst::new();
    let mut blame = vec![0usize; s.mu.len()];
    for p in 0..s.base_points {
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let r = (s.mu(p, a, b, c) * s.mu(p, a, c, d) - s.mu(p, b, c, d) * s.mu(p, a, b, d)).norm();
                        worst.see(r, || format!("p={p} ({},{},{},{})", o(a), o(b), o(c), o(d)));
                        if r > tol {
                            for (x, y, z) in [(a, b, c), (a, c, d), (b, c, d), (a, b, d)] {
                                blame[s.idx3(p, x, y) * n + z] += 1;
                            }
                        }
                    }
                }
            }
        }
    }
    let mut check = worst.check("associativity", tol);
    if let Some((i, _)) = blame.iter().enumerate().filter(|(_, &k)| k > 0).max_by_key(|(i, &k)| (k, usize::MAX - i)) {
        let (c, rest) = (i % n, i / n);
        let (b, rest) = (rest % n, rest / n);
        let (a, p) = (rest % n, rest / n);
        check.detail = format!("{}; most implicated mu at p={p} ({},{},{})", check.detail, o(a), o(b), o(c));
    }
    report.push(check);

    let mut inv = Worst::new();
    let mut anti = Worst::new();
    let mut cstar = Worst::new();
    let mut pos = Worst::new();
    let mut sat = Worst::new();
    for p in 0..s.base_points {
        for a in 0..n {
            for b in 0..n {
                // (e^*)^* = e.
                let r = (s.iota(p, a, b).conj() * s.iota(p, b, a) - ONE).norm();
                inv.see(r, || format!("p={p} ({},{})", o(a), o(b)));
                // ||e^* e|| = ||e||^2 and the unit norm of e_BB.
                let r = (((s.iota(p, a, b) * s.mu(p, b, a, b)).norm() - 1.0).abs()).max((s.mu(p, b, b, b).norm() - 1.0).abs());
                cstar.see(r, || format!("p={p} ({},{})", o(a), o(b)));
                // e^* e = iota mu_BAB e_BB is positive iff iota mu_BAB mu_BBB >= 0.
                let z = s.iota(p, a, b) * s.mu(p, b, a, b) * s.mu(p, b, b, b);
                pos.see(z.im.abs().max(-z.re), || format!("p={p} ({},{})", o(a), o(b)));
                for c in 0..n {
                    // (e_AB e_BC)^* = e_BC^* e_AB^*.
                    let lhs = s.mu(p, a, b, c).conj() * s.iota(p, a, c);
                    let rhs = s.iota(p, b, c) * s.iota(p, a, b) * s.mu(p, c, b, a);
                    anti.see((lhs - rhs).norm(), || format!("p={p} ({},{},{})", o(a), o(b), o(c)));
                    // Saturated rank one: products of unit vectors are unit vectors.
                    sat.see((s.mu(p, a, b, c).norm() - 1.0).abs(), || format!("p={p} ({},{},{})", o(a), o(b), o(c)));
                }
            }
        }
    }
    report.push(inv.check("involution", tol));
    report.push(anti.check("anti-multiplicative", tol));
    report.push(cstar.check("c-star-norm", tol));
    report.push(pos.check("positivity", tol));
    report.push(sat.check("saturation", tol));
    report
}

fn require_valid(s: &Spaceoid) -> Result<()> {
    let report = validate_spaceoid(s, 1e-8);
    let result = match report.failures().next() {
        None => Ok(()),
        Some(f) => Err(Error::Contract(format!("invalid spaceoid: {} {}", f.name, f.detail))),
    };
    result
}

/// `Gamma(E)`: sections over `X x {(A,B)}`, realized on `C^X` as
/// `sigma -> diag_p(lambda_pAB sigma_p)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SectionCategory {
    spaceoid: Spaceoid,
    category: FiniteCStarCategory,
    lambda: Vec<Complex64>,
}

impl SectionCategory {
    pub fn spaceoid(&self) -> &Spaceoid {
        &self.spaceoid
    }

    pub fn category(&self) -> &FiniteCStarCategory {
        &self.category
    }

    /// Phase carried by the section `delta_p` of `(A,B)` in the operator model.
    pub fn realization(&self, p: usize, a: usize, b: usize) -> Complex64 {
        self.lambda[self.spaceoid.idx3(p, a, b)]
    }

    /// Operator of the section with fiber coefficients `coeffs` over `(a,b)`.
    pub fn section(&self, a: usize, b: usize, coeffs: &[Complex64]) -> Result<CMatrix> {
        let m = self.spaceoid.base_points;
        if coeffs.len() != m {
            return dim_err(format!("{} coefficients for {m} base points", coeffs.len()));
        }
        let diag: Vec<Complex64> = (0..m).map(|p| coeffs[p] * self.realization(p, a, b)).collect();
        Ok(CMatrix::diagonal(&diag))
    }

    /// Fiber coefficients of an operator in the hom-space over `(a,b)`.
    pub fn coefficients(&self, a: usize, b: usize, x: &CMatrix) -> Result<Vec<Complex64>> {
        let coords = self.category.coordinates(a, b, x)?;
        // The basis arrow k is the section delta_k.
        Ok(coords)
    }
}

pub fn gamma_sections(s: &Spaceoid) -> Result<SectionCategory> {
    require_valid(s)?;
    let (m, n) = (s.base_points, s.num_objects());
    let mut lambda = vec![ZERO; s.iota.len()];
    for p in 0..m {
        let l0: Vec<Complex64> = (0..n).map(|b| if b == 0 { s.mu(p, 0, 0, 0) } else { ONE }).collect();
        for a in 0..n {
            for b in 0..n {
                lambda[s.idx3(p, a, b)] = if a == 0 { l0[b] } else { s.mu(p, 0, a, b) * l0[b] / l0[a] };
            }
        }
    }
    let homs = (0..n)
        .map(|a| {
            (0..n)
                .map(|b| {
                    (0..m)
                        .map(|p| {
                            CMatrix::from_fn(m, m, |r, c| if r == p && c == p { lambda[s.idx3(p, a, b)] } else { ZERO })
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let category = FiniteCStarCategory::new(s.objects.clone(), vec![m; n], homs)?;
    let report = validate_category(&category, 1e-8);
    if let Some(f) = report.failures().next() {
        return Err(Error::Contract(format!("section category fails {} {}", f.name, f.detail)));
    }
    Ok(SectionCategory {
        spaceoid: s.clone(),
        category,
        lambda,
    })
}

/// `Sigma(C)` with the data needed to map arrows into fibers: the base
/// spectrum, the canonical functor of each point and the fiber unit
/// representatives `y_pAB`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralSpaceoid {
    category: FiniteCStarCategory,
    spectrum: BaseSpectrum,
    functors: Vec<StarFunctor>,
    /// Value `omega_p(y_pAB)` of the canonical functor on each representative.
    rep_values: Vec<Complex64>,
    representatives: Vec<CMatrix>,
    spaceoid: Spaceoid,
}

impl SpectralSpaceoid {
    pub fn new(c: &FiniteCStarCategory) -> Result<Self> {
        let spectrum = base_spectrum(c)?;
        let (m, n) = (spectrum.len(), c.num_objects());
        let functors: Vec<StarFunctor> = (0..m).map(|p| spectrum.canonical(c, p)).collect::<Result<_>>()?;

        let mut representatives = Vec::with_capacity(m * n * n);
        let mut rep_values = Vec::with_capacity(m * n * n);
        for (p, w) in functors.iter().enumerate() {
            let point = &spectrum.points[p];
            for a in 0..n {
                for b in 0..n {
                    // The fiber is C_AB / {x : x P_B = 0}; it must be a line.
                    let pb = &spectrum.characters[b][point.characters[b]].projection;
                    let d = c.hilbert_dim(a) * c.hilbert_dim(b);
                    let images: Vec<Vec<Complex64>> = c.hom_basis(a, b).iter().map(|x| (x * pb).into_vec()).collect();
                    let dim = span_basis(d, &images, 1e-9)?.len();
                    if dim != 1 {
                        return Err(Error::Contract(format!(
                            "fiber over point {p} and ({},{}) has dimension {dim}",
                            c.objects()[a],
                            c.objects()[b]
                        )));
                    }
                    let (y, v) = if a == b {
                        (CMatrix::identity(c.hilbert_dim(a)), ONE)
                    } else {
                        let k = (0..c.hom_dim(a, b))
                            .max_by(|&k, &l| w.value(a, b, k).norm().total_cmp(&w.value(a, b, l).norm()))
                            .expect("fiber is a line");
                        let z = w.value(a, b, k);
                        (c.hom_basis(a, b)[k].scale_real(1.0 / z.norm()), z / z.norm())
                    };
                    representatives.push(y);
                    rep_values.push(v);
                }
            }
        }

        let idx = |p: usize, a: usize, b: usize| (p * n + a) * n + b;
        let mut mu = vec![vec![vec![vec![ZERO; n]; n]; n]; m];
        let mut iota = vec![vec![vec![ZERO; n]; n]; m];
        for p in 0..m {
            let w = &functors[p];
            for a in 0..n {
                for b in 0..n {
                    iota[p][a][b] = rep_values[idx(p, a, b)].conj() / rep_values[idx(p, b, a)];
                    for cc in 0..n {
                        let prod = &representatives[idx(p, a, b)] * &representatives[idx(p, b, cc)];
                        mu[p][a][b][cc] = w.eval(c, a, cc, &prod)? / rep_values[idx(p, a, cc)];
                    }
                }
            }
        }
        let spaceoid = Spaceoid::new(m, c.objects().to_vec(), mu, iota)?;
        Ok(Self {
            category: c.clone(),
            spectrum,
            functors,
            rep_values,
            representatives,
            spaceoid,
        })
    }

    pub fn spaceoid(&self) -> &Spaceoid {
        &self.spaceoid
    }

    pub fn spectrum(&self) -> &BaseSpectrum {
        &self.spectrum
    }

    pub fn functor(&self, p: usize) -> &StarFunctor {
        &self.functors[p]
    }

    fn idx(&self, p: usize, a: usize, b: usize) -> usize {
        let n = self.category.num_objects();
        (p * n + a) * n + b
    }

    /// Representative of the unit vector `e_pAB`.
    pub fn representative(&self, p: usize, a: usize, b: usize) -> &CMatrix {
        &self.representatives[self.idx(p, a, b)]
    }

    /// Coefficient of `x + I_p` on `e_pAB`.
    pub fn fiber_coefficient(&self, p: usize, a: usize, b: usize, x: &CMatrix) -> Result<Complex64> {
        Ok(self.functors[p].eval(&self.category, a, b, x)? / self.rep_values[self.idx(p, a, b)])
    }
}

pub fn sigma_spaceoid(c: &FiniteCStarCategory) -> Result<Spaceoid> {
    Ok(SpectralSpaceoid::new(c)?.spaceoid)
}

/// `(f, F)` from `source` to `target`: a base map `f: X_1 -> X_2`, an
/// object bijection, and `F(e2_{f(p),f(a),f(b)}) = F_pab e1_pab`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpaceoidMorphism {
    source: Spaceoid,
    target: Spaceoid,
    base_map: Vec<usize>,
    object_map: Vec<usize>,
    fiber: Vec<Complex64>,
}

impl SpaceoidMorphism {
    /// `fiber[p][a][b]` over the source points and objects.
    pub fn new(
        source: Spaceoid,
        target: Spaceoid,
        base_map: Vec<usize>,
        object_map: Vec<usize>,
        fiber: Vec<Vec<Vec<Complex64>>>,
    ) -> Result<Self> {
        let (m, n) = (source.base_points, source.num_objects());
        if base_map.len() != m || base_map.iter().any(|&q| q >= target.base_points) {
            return dim_err("base map does not match the spaceoids");
        }
        if target.num_objects() != n || !is_permutation(&object_map, n) {
            return Err(Error::Domain("object map must be a bijection".into()));
        }
        if fiber.len() != m || fiber.iter().any(|f| f.len() != n || f.iter().any(|r| r.len() != n)) {
            return dim_err("fiber maps must be indexed by source point and object pair");
        }
        Ok(Self {
            source,
            target,
            base_map,
            object_map,
            fiber: fiber.into_iter().flatten().flatten().collect(),
        })
    }

    pub fn identity(s: &Spaceoid) -> Self {
        let n = s.num_objects();
        Self {
            source: s.clone(),
            target: s.clone(),
            base_map: (0..s.base_points).collect(),
            object_map: (0..n).collect(),
            fiber: vec![ONE; s.iota.len()],
        }
    }

    pub fn source(&self) -> &Spaceoid {
        &self.source
    }

    pub fn target(&self) -> &Spaceoid {
        &self.target
    }

    pub fn base_map(&self) -> &[usize] {
        &self.base_map
    }

    pub fn object_map(&self) -> &[usize] {
        &self.object_map
    }

    pub fn fiber(&self, p: usize, a: usize, b: usize) -> Complex64 {
        self.fiber[self.source.idx3(p, a, b)]
    }

    /// `self o first = (g o f, F . f*(G))`.
    pub fn compose(&self, first: &SpaceoidMorphism) -> Result<SpaceoidMorphism> {
        if first.target.max_difference(&self.source) > 1e-9 {
            return Err(Error::Contract("spaceoid morphisms are not composable".into()));
        }
        let s = &first.source;
        let n = s.num_objects();
        let mut fiber = vec![vec![vec![ZERO; n]; n]; s.base_points];
        for (p, fp) in fiber.iter_mut().enumerate() {
            let q = first.base_map[p];
            for a in 0..n {
                for b in 0..n {
                    let (fa, fb) = (first.object_map[a], first.object_map[b]);
                    fp[a][b] = first.fiber(p, a, b) * self.fiber(q, fa, fb);
                }
            }
        }
        Self::new(
            s.clone(),
            self.target.clone(),
            first.base_map.iter().map(|&q| self.base_map[q]).collect(),
            first.object_map.iter().map(|&a| self.object_map[a]).collect(),
            fiber,
        )
    }

    /// Largest fiber difference; infinite when the maps or spaceoids differ.
    pub fn distance(&self, other: &SpaceoidMorphism) -> f64 {
        if self.base_map != other.base_map
            || self.object_map != other.object_map
            || self.source.max_difference(&other.source) > 1e-9
            || self.target.max_difference(&other.target) > 1e-9
        {
            return f64::INFINITY;
        }
        self.fiber
            .iter()
            .zip(&other.fiber)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    /// Fiberwise *-functoriality against the structure constants.
    pub fn check(&self, tol: f64) -> Report {
        let (s1, s2) = (&self.source, &self.target);
        let n = s1.num_objects();
        let (f, g) = (&self.base_map, &self.object_map);
        let mut mult = Worst::new();
        let mut inv = Worst::new();
        for p in 0..s1.base_points {
            let q = f[p];
            for a in 0..n {
                for b in 0..n {
                    let lhs = s2.iota(q, g[a], g[b]) * self.fiber(p, b, a);
                    let rhs = self.fiber(p, a, b).conj() * s1.iota(p, a, b);
                    inv.see((lhs - rhs).norm(), || format!("p={p} ({a},{b})"));
                    for c in 0..n {
                        let lhs = self.fiber(p, a, b) * self.fiber(p, b, c) * s1.mu(p, a, b, c);
                        let rhs = s2.mu(q, g[a], g[b], g[c]) * self.fiber(p, a, c);
                        mult.see((lhs - rhs).norm(), || format!("p={p} ({a},{b},{c})"));
                    }
                }
            }
        }
        let mut report = Report::new();
        report.push(mult.check("multiplicative", tol));
        report.push(inv.check("involutive", tol));
        report
    }

    /// Bijective base and object maps, unitary fibers, and the checks of [`Self::check`].
    pub fn isomorphism_report(&self, tol: f64) -> Report {
        let mut report = Report::new();
        let bij = is_permutation(&self.base_map, self.target.base_points);
        report.push(Check::new(
            "base-bijective",
            if bij { Status::Pass } else { Status::Fail },
            format!("{:?}", self.base_map),
        ));
        let worst = self.fiber.iter().map(|z| (z.norm() - 1.0).abs()).fold(0.0, f64::max);
        report.push(Check::residual("fiber-unitary", worst, tol));
        report.extend(self.check(tol));
        report
    }
}

/// Result of the Gel'fand transform `C -> Gamma(Sigma(C))`.
#[derive(Clone, Debug, PartialEq)]
pub struct GelfandTransform {
    pub functor: CStarFunctor,
    pub spectral: SpectralSpaceoid,
    pub sections: SectionCategory,
    pub report: Report,
}

/// `x -> (x + I_p)_p` with *-functoriality, bijectivity and isometry checks.
pub fn gelfand_transform_cat(c: &FiniteCStarCategory, tol: f64) -> Result<GelfandTransform> {
    let spectral = SpectralSpaceoid::new(c)?;
    let sections = gamma_sections(&spectral.spaceoid)?;
    let (m, n) = (spectral.spectrum.len(), c.num_objects());
    let hat = |a: usize, b: usize, x: &CMatrix| -> Result<CMatrix> {
        let coeffs: Vec<Complex64> = (0..m)
            .map(|p| spectral.fiber_coefficient(p, a, b, x))
            .collect::<Result<_>>()?;
        sections.section(a, b, &coeffs)
    };
    let images: Vec<Vec<Vec<CMatrix>>> = (0..n)
        .map(|a| {
            (0..n)
                .map(|b| c.hom_basis(a, b).iter().map(|x| hat(a, b, x)).collect::<Result<_>>())
                .collect::<Result<_>>()
        })
        .collect::<Result<_>>()?;
    let functor = CStarFunctor::from_images(c.clone(), sections.category.clone(), (0..n).collect(), &images, 1e-8)?;

    let mut report = functor.check(tol)?;
    let mut singular = Vec::new();
    let mut iso = Worst::new();
    for a in 0..n {
        for b in 0..n {
            let map = functor.hom_map(a, b);
            let cols: Vec<Vec<Complex64>> = (0..map.cols()).map(|k| map.column(k)).collect();
            let rank = span_basis(map.rows(), &cols, 1e-9)?.len();
            if map.rows() != map.cols() || rank != map.rows() {
                singular.push(format!("({},{})", c.objects()[a], c.objects()[b]));
            }
            let mut arrows: Vec<CMatrix> = c.hom_basis(a, b).to_vec();
            for salt in 0..2 {
                let coords: Vec<Complex64> = (0..c.hom_dim(a, b))
                    .map(|k| Complex64::new((0.7 + 1.3 * (k + 5 * salt) as f64).sin(), (0.2 + 0.9 * k as f64).cos()))
                    .collect();
                arrows.push(c.element(a, b, &coords)?);
            }
            for x in &arrows {
                let nx = operator_norm(x)?;
                let nh = operator_norm(&functor.apply(a, b, x)?)?;
                iso.see((nx - nh).abs() / nx.max(1.0), || format!("({},{})", c.objects()[a], c.objects()[b]));
            }
        }
    }
    report.push(if singular.is_empty() {
        Check::new("bijective", Status::Pass, "")
    } else {
        Check::new("bijective", Status::Fail, format!("not bijective at {}", singular.join(" ")))
    });
    report.push(iso.check("isometric", tol));
    Ok(GelfandTransform {
        functor,
        spectral,
        sections,
        report,
    })
}

/// Result of the evaluation transform `E -> Sigma(Gamma(E))`.
#[derive(Clone, Debug, PartialEq)]
pub struct EvaluationTransform {
    pub morphism: SpaceoidMorphism,
    pub report: Report,
}

/// `p -> [gamma o ev_p]` on the base, section evaluation on fibers.
pub fn evaluation_transform(s: &Spaceoid, tol: f64) -> Result<EvaluationTransform> {
    let sections = gamma_sections(s)?;
    let spectral = SpectralSpaceoid::new(&sections.category)?;
    let (m, n) = (s.base_points, s.num_objects());
    let chars = &spectral.spectrum.characters[0];
    let mut base_map = Vec::with_capacity(m);
    for p in 0..m {
        // ev_p restricted to the least diagonal is the character with projection E_pp.
        let q = spectral
            .spectrum
            .points
            .iter()
            .position(|pt| (chars[pt.characters[0]].projection[(p, p)].re - 1.0).abs() < 1e-8)
            .ok_or_else(|| Error::Contract(format!("evaluation at {p} is not a point of the spectrum")))?;
        base_map.push(q);
    }
    let mut fiber = vec![vec![vec![ZERO; n]; n]; m];
    for (p, fp) in fiber.iter_mut().enumerate() {
        for a in 0..n {
            for b in 0..n {
                let y = spectral.representative(base_map[p], a, b);
                fp[a][b] = sections.coefficients(a, b, y)?[p];
            }
        }
    }
    let morphism = SpaceoidMorphism::new(s.clone(), spectral.spaceoid.clone(), base_map, (0..n).collect(), fiber)?;
    let report = morphism.isomorphism_report(tol);
    Ok(EvaluationTransform { morphism, report })
}

/// `Sigma(Phi): Sigma(D) -> Sigma(C)` for an object-bijective `Phi: C -> D`.
pub fn sigma_of_functor(phi: &CStarFunctor, tol: f64) -> Result<SpaceoidMorphism> {
    if !phi.is_object_bijective() {
        return Err(Error::Precondition("Sigma is only defined on object-bijective *-functors".into()));
    }
    let report = phi.check(tol)?;
    if let Some(f) = report.failures().next() {
        return Err(Error::Precondition(format!("functor is not a *-functor: {} residual {:?}", f.name, f.residual)));
    }
    let (c, d) = (phi.source(), phi.target());
    let sc = SpectralSpaceoid::new(c)?;
    let sd = SpectralSpaceoid::new(d)?;
    let n = c.num_objects();
    let mut inv = vec![0; n];
    for (a, &fa) in phi.object_map().iter().enumerate() {
        inv[fa] = a;
    }
    let mut base_map = Vec::with_capacity(sd.spectrum.len());
    for q in 0..sd.spectrum.len() {
        let w = sd.functor(q);
        let pulled = StarFunctor::new(
            (0..n)
                .map(|a| {
                    (0..n)
                        .map(|b| {
                            let (fa, fb) = (phi.object_map()[a], phi.object_map()[b]);
                            c.hom_basis(a, b)
                                .iter()
                                .map(|x| w.eval(d, fa, fb, &phi.apply(a, b, x)?))
                                .collect::<Result<Vec<_>>>()
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?,
        );
        let p = sc
            .spectrum
            .classify(c, &pulled, 1e-7)?
            .ok_or_else(|| Error::Contract(format!("pullback of point {q} is not a point")))?;
        base_map.push(p);
    }
    let mut fiber = vec![vec![vec![ZERO; n]; n]; sd.spectrum.len()];
    for (q, fq) in fiber.iter_mut().enumerate() {
        for a2 in 0..n {
            for b2 in 0..n {
                let (a, b) = (inv[a2], inv[b2]);
                let image = phi.apply(a, b, sc.representative(base_map[q], a, b))?;
                fq[a2][b2] = sd.fiber_coefficient(q, a2, b2, &image)?;
            }
        }
    }
    SpaceoidMorphism::new(sd.spaceoid.clone(), sc.spaceoid.clone(), base_map, inv, fiber)
}

/// `Gamma(f, F): Gamma(E_2) -> Gamma(E_1)`, `sigma -> F o f*(sigma)`.
pub fn gamma_of_morphism(m: &SpaceoidMorphism) -> Result<CStarFunctor> {
    let g1 = gamma_sections(&m.source)?;
    let g2 = gamma_sections(&m.target)?;
    let n = m.source.num_objects();
    let (x1, x2) = (m.source.base_points, m.target.base_points);
    let mut inv = vec![0; n];
    for (a, &fa) in m.object_map.iter().enumerate() {
        inv[fa] = a;
    }
    let maps = (0..n)
        .map(|a2| {
            (0..n)
                .map(|b2| {
                    let (a, b) = (inv[a2], inv[b2]);
                    CMatrix::from_fn(x1, x2, |p, q| if m.base_map[p] == q { m.fiber(p, a, b) } else { ZERO })
                })
                .collect()
        })
        .collect();
    CStarFunctor::new(g2.category, g1.category, inv, maps)
}
