//! JSON documents: a `{"kind", "payload"}` envelope around a triple, a
//! category, a spaceoid or a morphism between two triples. Every rejection
//! carries a location, either a JSON path or a line and column.

use std::fmt;
use std::path::{Path, PathBuf};

use ncg_forge::algebra::{AlgebraHomomorphism, FiniteCStarAlgebra, PureState};
use ncg_forge::cstarcat::FiniteCStarCategory;
use ncg_forge::morphisms::TripleMorphism;
use ncg_forge::spaceoid::Spaceoid;
use ncg_forge::triple::{Representation, SpectralTriple};
use ncg_forge::{CAntiunitary, CMatrix, Complex64};
use serde_json::Value;

/// Unitarity tolerance for a supplied real structure.
const UNITARY_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct SchemaError {
    /// The file holding the error, when it came from one.
    pub file: Option<String>,
    pub location: String,
    pub message: String,
}

impl SchemaError {
    fn new(location: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            file: None,
            location: location.into(),
            message: message.into(),
        }
    }

    pub fn at(location: impl Into<String>, message: impl Into<String>) -> Self {
        Self::new(location, message)
    }

    /// Attributes the error to `file` unless a nested file already claimed it.
    fn in_file(mut self, file: &Path) -> Self {
        self.file.get_or_insert_with(|| file.display().to_string());
        self
    }
}

impl fmt::Display for SchemaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(file) = &self.file {
            write!(f, "{file}: ")?;
        }
        write!(f, "{}: {}", self.location, self.message)
    }
}

impl std::error::Error for SchemaError {}

type Parsed<T> = std::result::Result<T, SchemaError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Flavor {
    Tgs,
    Riemannian,
    Metric,
}

impl Flavor {
    pub const ALL: [Flavor; 3] = [Flavor::Tgs, Flavor::Riemannian, Flavor::Metric];

    pub fn as_str(self) -> &'static str {
        match self {
            Flavor::Tgs => "tgs",
            Flavor::Riemannian => "riemannian",
            Flavor::Metric => "metric",
        }
    }
}

#[derive(Clone, Debug)]
pub struct TripleDoc {
    pub triple: SpectralTriple,
    pub states: Option<Vec<PureState>>,
}

#[derive(Clone, Debug)]
pub struct MorphismDoc {
    pub morphism: TripleMorphism,
    pub flavors: Vec<Flavor>,
    /// Target states for the metric flavor.
    pub states: Option<Vec<PureState>>,
}

#[derive(Clone, Debug)]
pub enum Document {
    Triple(TripleDoc),
    Category(FiniteCStarCategory),
    Spaceoid(Spaceoid),
    Morphism(MorphismDoc),
}

impl Document {
    pub fn kind(&self) -> &'static str {
        match self {
            Document::Triple(_) => "triple",
            Document::Category(_) => "category",
            Document::Spaceoid(_) => "spaceoid",
            Document::Morphism(_) => "morphism",
        }
    }
}

/// A JSON value together with its path from the document root.
#[derive(Clone)]
struct Node<'a> {
    value: &'a Value,
    path: String,
}

impl<'a> Node<'a> {
    fn root(value: &'a Value) -> Self {
        Self { value, path: "$".into() }
    }

    fn err<T>(&self, message: impl Into<String>) -> Parsed<T> {
        Err(SchemaError::new(self.path.clone(), message))
    }

    fn object(&self) -> Parsed<&'a serde_json::Map<String, Value>> {
        match self.value {
            Value::Object(m) => Ok(m),
            _ => self.err("expected an object"),
        }
    }

    fn array(&self) -> Parsed<&'a Vec<Value>> {
        match self.value {
            Value::Array(a) => Ok(a),
            _ => self.err("expected an array"),
        }
    }

    fn only_keys(&self, allowed: &[&str]) -> Parsed<()> {
        for key in self.object()?.keys() {
            if !allowed.contains(&key.as_str()) {
                return Err(SchemaError::new(
                    format!("{}.{key}", self.path),
                    format!("unknown field; expected one of {}", allowed.join(", ")),
                ));
            }
        }
        Ok(())
    }

    fn key(&self, k: &str) -> Option<Node<'a>> {
        self.value.get(k).map(|value| Node {
            value,
            path: format!("{}.{k}", self.path),
        })
    }

    fn required(&self, k: &str) -> Parsed<Node<'a>> {
        self.object()?;
        self.key(k)
            .ok_or_else(|| SchemaError::new(self.path.clone(), format!("missing field {k:?}")))
    }

    fn items(&self) -> Parsed<Vec<Node<'a>>> {
        Ok(self
            .array()?
            .iter()
            .enumerate()
            .map(|(i, value)| Node {
                value,
                path: format!("{}[{i}]", self.path),
            })
            .collect())
    }

    fn members(&self) -> Parsed<Vec<(&'a str, Node<'a>)>> {
        Ok(self
            .object()?
            .iter()
            .map(|(k, value)| {
                (
                    k.as_str(),
                    Node {
                        value,
                        path: format!("{}[{k:?}]", self.path),
                    },
                )
            })
            .collect())
    }

    fn usize(&self) -> Parsed<usize> {
        match self.value.as_u64() {
            Some(n) => usize::try_from(n).or_else(|_| self.err("integer too large")),
            None => self.err("expected a non-negative integer"),
        }
    }

    fn f64(&self) -> Parsed<f64> {
        match self.value.as_f64() {
            Some(x) if x.is_finite() => Ok(x),
            _ => self.err("expected a finite number"),
        }
    }

    fn bool(&self) -> Parsed<bool> {
        self.value.as_bool().map_or_else(|| self.err("expected true or false"), Ok)
    }

    fn str(&self) -> Parsed<&'a str> {
        self.value.as_str().map_or_else(|| self.err("expected a string"), Ok)
    }
}

fn usize_list(n: &Node<'_>) -> Parsed<Vec<usize>> {
    n.items()?.iter().map(|c| c.usize()).collect()
}

/// A number, or a `[re, im]` pair.
fn complex(n: &Node<'_>) -> Parsed<Complex64> {
    match n.value {
        Value::Number(_) => Ok(Complex64::new(n.f64()?, 0.0)),
        Value::Array(a) if a.len() == 2 => {
            let parts = n.items()?;
            Ok(Complex64::new(parts[0].f64()?, parts[1].f64()?))
        }
        _ => n.err("expected a number or a [re, im] pair"),
    }
}

fn vector(n: &Node<'_>) -> Parsed<Vec<Complex64>> {
    n.items()?.iter().map(|c| complex(&c)).collect()
}

fn matrix(n: &Node<'_>) -> Parsed<CMatrix> {
    let rows = n.items()?;
    let mut data = Vec::new();
    let mut cols = None;
    for r in &rows {
        let row = vector(&r)?;
        match cols {
            None => cols = Some(row.len()),
            Some(c) if c != row.len() => return r.err(format!("row of length {}, expected {c}", row.len())),
            _ => {}
        }
        data.extend(row);
    }
    let cols = cols.unwrap_or(0);
    if rows.is_empty() || cols == 0 {
        return n.err("matrix must be non-empty");
    }
    CMatrix::from_vec(rows.len(), cols, data).or_else(|e| n.err(e.to_string()))
}

fn square(n: &Node<'_>, dim: usize, what: &str) -> Parsed<CMatrix> {
    let m = matrix(&n)?;
    if m.shape() != (dim, dim) {
        return n.err(format!("{what} is {}x{}, expected {dim}x{dim}", m.rows(), m.cols()));
    }
    Ok(m)
}

fn states(n: &Node<'_>, alg: &FiniteCStarAlgebra) -> Parsed<Vec<PureState>> {
    let list = n.items()?;
    if list.is_empty() {
        return n.err("state list must be non-empty");
    }
    list.iter()
        .map(|c| {
            let s = c;
            s.only_keys(&["block", "vector"])?;
            let block = s.required("block")?.usize()?;
            let v = vector(&s.required("vector")?)?;
            PureState::new(alg, block, v).or_else(|e| s.err(e.to_string()))
        })
        .collect()
}

fn triple_payload(n: &Node<'_>) -> Parsed<TripleDoc> {
    n.only_keys(&[
        "algebra",
        "multiplicities",
        "basis_change",
        "dirac",
        "grading",
        "real_structure",
        "states",
    ])?;
    let blocks_node = n.required("algebra")?;
    let alg = FiniteCStarAlgebra::new(usize_list(&blocks_node)?).or_else(|e| blocks_node.err(e.to_string()))?;
    let mult_node = n.required("multiplicities")?;
    let mults = usize_list(&mult_node)?;
    if mults.len() != alg.num_blocks() {
        return mult_node
            
            .err(format!("{} multiplicities for {} blocks", mults.len(), alg.num_blocks()));
    }
    let dim: usize = alg.blocks().iter().zip(&mults).map(|(n, m)| n * m).sum();
    let basis = match n.key("basis_change") {
        Some(c) => Some(square(&c, dim, "basis change")?),
        None => None,
    };
    let rep = Representation::new(alg.clone(), mults, basis).or_else(|e| n.err(e.to_string()))?;
    let d_node = n.required("dirac")?;
    let d = square(&d_node, dim, "Dirac operator")?;
    let mut t = SpectralTriple::new(rep, d).or_else(|e| d_node.err(e.to_string()))?;
    if let Some(g) = n.key("grading") {
        t = t.with_grading(square(&g, dim, "grading")?).or_else(|e| g.err(e.to_string()))?;
    }
    if let Some(r) = n.key("real_structure") {
        let r = r;
        r.only_keys(&["unitary", "ko_dim"])?;
        let u_node = r.required("unitary")?;
        let u = square(&u_node, dim, "real structure")?;
        let j = CAntiunitary::new(u, UNITARY_TOL).or_else(|e| u_node.err(e.to_string()))?;
        let ko = match r.key("ko_dim") {
            Some(k) if !k.value.is_null() => {
                let v = k.usize()?;
                if v > 7 {
                    return k.err("KO-dimension must be in 0..=7");
                }
                Some(v as u8)
            }
            _ => None,
        };
        t = t.with_real_structure(j, ko).or_else(|e| r.err(e.to_string()))?;
    }
    let states = match n.key("states") {
        Some(s) => Some(states(&s, t.algebra())?),
        None => None,
    };
    Ok(TripleDoc { triple: t, states })
}

fn object_names(n: &Node<'_>) -> Parsed<Vec<String>> {
    let names: Vec<String> = n.items()?
        .iter()
        .map(|c| c.str().map(str::to_owned))
        .collect::<Parsed<_>>()?;
    if names.is_empty() {
        return n.err("at least one object is required");
    }
    for (i, name) in names.iter().enumerate() {
        if names[..i].contains(name) {
            return n.err(format!("duplicate object {name:?}"));
        }
        if name.is_empty() || name.contains(',') {
            return n.err(format!("object name {name:?} must be non-empty and without commas"));
        }
    }
    Ok(names)
}

/// Splits `"x,y,..."` into `arity` object indices, the first `points`
/// fields being base point indices below `limit`.
fn parse_key(
    k: &str,
    loc: &Node<'_>,
    objects: &[String],
    arity: usize,
    limit: Option<usize>,
) -> Parsed<Vec<usize>> {
    let parts: Vec<&str> = k.split(',').map(str::trim).collect();
    if parts.len() != arity {
        return loc.err(format!("key must have {arity} comma-separated fields"));
    }
    let mut out = Vec::with_capacity(arity);
    for (i, p) in parts.iter().enumerate() {
        match (i, limit) {
            (0, Some(points)) => match p.parse::<usize>() {
                Ok(x) if x < points => out.push(x),
                _ => return loc.err(format!("base point {p:?} is not an index below {points}")),
            },
            _ => match objects.iter().position(|o| o == p) {
                Some(x) => out.push(x),
                None => return loc.err(format!("unknown object {p:?}")),
            },
        }
    }
    Ok(out)
}

fn category_payload(n: &Node<'_>) -> Parsed<FiniteCStarCategory> {
    n.only_keys(&["objects", "hilbert_dims", "hom_bases"])?;
    let objects = object_names(&n.required("objects")?)?;
    let k = objects.len();
    let dims_node = n.required("hilbert_dims")?;
    let mut dims = vec![None; k];
    for (name, c) in dims_node.members()? {
        let idx = parse_key(name, &c, &objects, 1, None)?[0];
        let d = c.usize()?;
        if d == 0 {
            return c.err("Hilbert space dimension must be positive");
        }
        dims[idx] = Some(d);
    }
    let dims: Vec<usize> = dims
        .iter()
        .zip(&objects)
        .map(|(d, o)| d.ok_or_else(|| SchemaError::new(dims_node.path.clone(), format!("missing dimension for {o:?}"))))
        .collect::<Parsed<_>>()?;
    let mut homs = vec![vec![Vec::new(); k]; k];
    let homs_node = n.required("hom_bases")?;
    for (name, c) in homs_node.members()? {
        let ab = parse_key(name, &c, &objects, 2, None)?;
        let (a, b) = (ab[0], ab[1]);
        homs[a][b] = c.items()?
            .iter()
            .map(|m| {
                let x = matrix(&m)?;
                if x.shape() != (dims[a], dims[b]) {
                    return m
                        
                        .err(format!("arrow is {}x{}, expected {}x{}", x.rows(), x.cols(), dims[a], dims[b]));
                }
                Ok(x)
            })
            .collect::<Parsed<_>>()?;
    }
    FiniteCStarCategory::new(objects, dims, homs).or_else(|e| n.err(e.to_string()))
}

fn spaceoid_payload(n: &Node<'_>) -> Parsed<Spaceoid> {
    n.only_keys(&["base_points", "objects", "mu", "iota"])?;
    let points_node = n.required("base_points")?;
    let points = points_node.usize()?;
    if points == 0 {
        return points_node.err("at least one base point is required");
    }
    let objects = object_names(&n.required("objects")?)?;
    // Unlisted constants are 1, so an empty table is the trivial bundle.
    let mut s = Spaceoid::trivial(points, objects.clone()).or_else(|e| n.err(e.to_string()))?;
    if let Some(mu) = n.key("mu") {
        for (name, c) in mu.members()? {
            let i = parse_key(name, &c, &objects, 4, Some(points))?;
            s.set_mu(i[0], i[1], i[2], i[3], complex(&c)?);
        }
    }
    if let Some(iota) = n.key("iota") {
        for (name, c) in iota.members()? {
            let i = parse_key(name, &c, &objects, 3, Some(points))?;
            s.set_iota(i[0], i[1], i[2], complex(&c)?);
        }
    }
    Ok(s)
}

fn flavors(n: &Node<'_>) -> Parsed<Vec<Flavor>> {
    let mut out = Vec::new();
    for c in n.items()? {
        let f = match c.str()? {
            "tgs" => Flavor::Tgs,
            "riemannian" => Flavor::Riemannian,
            "metric" => Flavor::Metric,
            other => return c.err(format!("unknown flavor {other:?}; expected tgs, riemannian or metric")),
        };
        if !out.contains(&f) {
            out.push(f);
        }
    }
    if out.is_empty() {
        return n.err("at least one flavor is required");
    }
    Ok(out)
}

/// A triple given inline or as a path relative to the referencing file.
fn triple_ref(n: &Node<'_>, base: &Path) -> Parsed<TripleDoc> {
    match n.value {
        Value::String(p) => {
            let path = base.join(p);
            match load(&path)? {
                Document::Triple(t) => Ok(t),
                other => n.err(format!("{} holds a {} document, expected a triple", path.display(), other.kind())),
            }
        }
        Value::Object(_) => triple_payload(&n),
        _ => n.err("expected a file path or an inline triple payload"),
    }
}

fn morphism_payload(n: &Node<'_>, base: &Path) -> Parsed<MorphismDoc> {
    n.only_keys(&[
        "source",
        "target",
        "block_map",
        "map",
        "flavors",
        "check_real",
        "check_even",
        "states",
    ])?;
    let source = triple_ref(&n.required("source")?, base)?;
    let target = triple_ref(&n.required("target")?, base)?;
    let (a1, a2) = (source.triple.algebra().clone(), target.triple.algebra().clone());
    let kappa = match n.key("block_map") {
        Some(c) => usize_list(&c)?,
        None => (0..a2.num_blocks()).collect(),
    };
    let phi = AlgebraHomomorphism::from_block_map(a1, a2.clone(), &kappa).or_else(|e| {
        let loc = n.key("block_map").map_or_else(|| n.path.to_owned(), |c| c.path);
        Err(SchemaError::new(loc, e.to_string()))
    })?;
    let map_node = n.required("map")?;
    let map = matrix(&map_node)?;
    let mut m = TripleMorphism::new(source.triple, target.triple, phi, map).or_else(|e| map_node.err(e.to_string()))?;
    if let Some(c) = n.key("check_real") {
        m.check_real = c.bool()?;
    }
    if let Some(c) = n.key("check_even") {
        m.check_even = c.bool()?;
    }
    let flavors = match n.key("flavors") {
        Some(c) => flavors(&c)?,
        None => Flavor::ALL.to_vec(),
    };
    let states = match n.key("states") {
        Some(c) => Some(states(&c, &a2)?),
        None => target.states,
    };
    Ok(MorphismDoc {
        morphism: m,
        flavors,
        states,
    })
}

/// Parses a document from text; `base` resolves relative file references.
pub fn parse(text: &str, base: &Path) -> Parsed<Document> {
    let value: Value = serde_json::from_str(text).map_err(|e| {
        let location = format!("line {} column {}", e.line(), e.column());
        let message = e.to_string();
        let message = message.strip_suffix(&format!(" at {location}")).unwrap_or(&message).to_owned();
        SchemaError::new(location, message)
    })?;
    let root = Node::root(&value);
    root.only_keys(&["kind", "payload"])?;
    let kind_node = root.required("kind")?;
    let payload = root.required("payload")?;
    let p = payload;
    match kind_node.str()? {
        "triple" => triple_payload(&p).map(Document::Triple),
        "category" => category_payload(&p).map(Document::Category),
        "spaceoid" => spaceoid_payload(&p).map(Document::Spaceoid),
        "morphism" => morphism_payload(&p, base).map(Document::Morphism),
        other => kind_node
            
            .err(format!("unknown kind {other:?}; expected triple, category, spaceoid or morphism")),
    }
}

pub fn load(path: &Path) -> Parsed<Document> {
    let text = std::fs::read_to_string(path).map_err(|e| SchemaError::new("file", e.to_string()).in_file(path))?;
    let base = path.parent().map_or_else(PathBuf::new, Path::to_path_buf);
    parse(&text, &base).map_err(|e| e.in_file(path))
}

/// Hom bases keyed `"A,B"`, as read back by [`parse`].
pub fn hom_key(objects: &[String], a: usize, b: usize) -> String {
    format!("{},{}", objects[a], objects[b])
}
