//! Run configuration: a JSON document describing the network, the sweep and
//! the analyses to run. Validation collects every problem it finds, each
//! tagged with a JSON-pointer path into the document.

use std::fmt;
use std::path::PathBuf;

use num_complex::Complex64;
use scatternet::analysis::{EpMode, SingularityKind, DEFAULT_ATR_TOL};
use scatternet::cells::{
    bragg_matrix, bragg_matrix_complex, free_segment_matrix, pt_cell, ABRingSpec, BraggParams,
    FreeSegment, PhysicalConstants, PtTable,
};
use scatternet::network::{BranchChannel, ParallelBranch, ParallelNode, VertexParams};
use scatternet::{presets, NetworkNode, PTParams, TransferMatrix};
use serde_json::{Map, Value};

pub const DEFAULT_PARAMETER: &str = "omega";

#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let path = if self.path.is_empty() { "/" } else { &self.path };
        write!(f, "{path}: {}", self.message)
    }
}

/// A numeric field: a constant, or the swept parameter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Param {
    Const(Complex64),
    Bound,
}

impl Param {
    pub fn eval(&self, omega: f64) -> Complex64 {
        match self {
            Param::Const(c) => *c,
            Param::Bound => Complex64::new(omega, 0.0),
        }
    }

    fn real(&self, omega: f64) -> f64 {
        self.eval(omega).re
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BranchTemplate {
    pub node: NodeTemplate,
    pub k_in: Option<Param>,
    pub k_in_back: Option<Param>,
    pub k_out: Option<Param>,
    pub k_out_back: Option<Param>,
    pub mass: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VertexTemplate {
    pub k: Option<Param>,
    pub contact: Param,
    pub mass: Option<f64>,
}

impl Default for VertexTemplate {
    fn default() -> Self {
        Self { k: None, contact: Param::Const(Complex64::new(0.0, 0.0)), mass: None }
    }
}

/// Network description with parameters still unresolved.
#[derive(Clone, Debug, PartialEq)]
pub enum NodeTemplate {
    Free { length: Param, k: Param, k_backward: Option<Param>, mass: Option<f64> },
    Bragg { n0: Param, n1: Param, n2: Param, grating: Param, length: Param, k: Param },
    Pt { a: Param, b: Param, c: Param },
    PtTable { table: PtTable, at: Param },
    Matrix { entries: [Param; 4] },
    AbRing { k: Param, length: Param, flux_phase: Param, arm1: Option<Param> },
    Serial(Vec<NodeTemplate>),
    Repeat { count: usize, cell: Box<NodeTemplate> },
    ParallelRepeat { count: usize, cell: Box<NodeTemplate> },
    Parallel {
        k: Param,
        branches: Vec<BranchTemplate>,
        vertex_in: VertexTemplate,
        vertex_out: VertexTemplate,
        reference: usize,
    },
}

impl NodeTemplate {
    /// Resolves every parameter at `omega` and builds the network.
    pub fn build(&self, omega: f64, consts: &PhysicalConstants) -> scatternet::Result<NetworkNode> {
        let leaf = |m: scatternet::Result<TransferMatrix>| m.map(NetworkNode::Leaf);
        match self {
            NodeTemplate::Free { length, k, k_backward, mass } => {
                let kf = k.eval(omega);
                leaf(free_segment_matrix(&FreeSegment {
                    length: length.real(omega),
                    k_forward: kf,
                    k_backward: k_backward.map_or(kf, |p| p.eval(omega)),
                    mass: mass.unwrap_or(consts.default_mass),
                }))
            }
            NodeTemplate::Bragg { n0, n1, n2, grating, length, k } => {
                let p = BraggParams {
                    n0: n0.real(omega),
                    n1: n1.real(omega),
                    n2: n2.real(omega),
                    grating: grating.real(omega),
                    length: length.real(omega),
                };
                let k = k.eval(omega);
                leaf(if k.im == 0.0 { bragg_matrix(&p, k.re) } else { bragg_matrix_complex(&p, k) })
            }
            NodeTemplate::Pt { a, b, c } => {
                leaf(pt_cell(&PTParams::new(a.eval(omega), b.eval(omega), c.eval(omega))))
            }
            NodeTemplate::PtTable { table, at } => leaf(pt_cell(&table.params_at(at.real(omega))?)),
            NodeTemplate::Matrix { entries } => {
                let [a, b, c, d] = entries.map(|p| p.eval(omega));
                leaf(TransferMatrix::from_entries(a, b, c, d))
            }
            NodeTemplate::AbRing { k, length, flux_phase, arm1 } => {
                let total = length.real(omega);
                let arm1 = arm1.map_or(total / 2.0, |p| p.real(omega));
                let flux = -flux_phase.real(omega) * consts.hbar * consts.c_light / consts.e_charge;
                let spec = ABRingSpec::new(k.real(omega), flux, arm1, total - arm1)?;
                presets::ab_ring(&spec, consts)
            }
            NodeTemplate::Serial(children) => Ok(NetworkNode::Serial(
                children.iter().map(|c| c.build(omega, consts)).collect::<scatternet::Result<_>>()?,
            )),
            NodeTemplate::Repeat { count, cell } => {
                Ok(NetworkNode::repeat(cell.build(omega, consts)?, *count))
            }
            NodeTemplate::ParallelRepeat { count, cell } => {
                Ok(NetworkNode::parallel_repeat(cell.build(omega, consts)?, *count))
            }
            NodeTemplate::Parallel { k, branches, vertex_in, vertex_out, reference } => {
                let k = k.eval(omega);
                let vertex = |v: &VertexTemplate| VertexParams {
                    contact_potential: v.contact.eval(omega),
                    mass: v.mass.unwrap_or(consts.default_mass),
                    k: v.k.map_or(k, |p| p.eval(omega)),
                    k_back: v.k.map_or(k, |p| p.eval(omega)),
                    hbar: consts.hbar,
                };
                let branches = branches
                    .iter()
                    .map(|b| {
                        let k_in = b.k_in.map_or(k, |p| p.eval(omega));
                        let k_out = b.k_out.map_or(k_in, |p| p.eval(omega));
                        let mass = b.mass.unwrap_or(consts.default_mass);
                        Ok(ParallelBranch {
                            node: b.node.build(omega, consts)?,
                            channel: BranchChannel {
                                k_in,
                                k_in_back: b.k_in_back.map_or(k_in, |p| p.eval(omega)),
                                mass_in: mass,
                                k_out,
                                k_out_back: b.k_out_back.map_or(k_out, |p| p.eval(omega)),
                                mass_out: mass,
                            },
                        })
                    })
                    .collect::<scatternet::Result<_>>()?;
                Ok(NetworkNode::Parallel(ParallelNode {
                    branches,
                    vertex_in: vertex(vertex_in),
                    vertex_out: vertex(vertex_out),
                    reference: *reference,
                }))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FinderConfig {
    pub tol: f64,
    pub scan_points: usize,
    pub range: Option<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum AnalysisConfig {
    /// `kind = None` scans both entries.
    Singularities { kind: Option<SingularityKind>, finder: FinderConfig, near_miss: f64 },
    ExceptionalPoints { mode: EpMode, finder: FinderConfig },
    Atr { tol: f64 },
}

impl AnalysisConfig {
    pub fn name(&self) -> &'static str {
        match self {
            AnalysisConfig::Singularities { .. } => "singularities",
            AnalysisConfig::ExceptionalPoints { .. } => "exceptional_points",
            AnalysisConfig::Atr { .. } => "atr",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub basename: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { directory: PathBuf::from("."), basename: "scatternet".into() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub constants: PhysicalConstants,
    pub network: NodeTemplate,
    /// Name of the swept parameter.
    pub parameter: String,
    /// JSON-pointer paths of the nodes whose fields use the parameter.
    pub bindings: Vec<String>,
    pub sweep: Option<SweepConfig>,
    pub analyses: Vec<AnalysisConfig>,
    pub output: OutputConfig,
    pub warnings: Vec<String>,
}

impl RunConfig {
    pub fn build(&self, omega: f64) -> scatternet::Result<NetworkNode> {
        self.network.build(omega, &self.constants)
    }
}

/// Parses and validates a configuration, returning every error found.
pub fn parse_config(text: &str) -> Result<RunConfig, Vec<ConfigError>> {
    let root: Value = serde_json::from_str(text).map_err(|e| {
        vec![ConfigError { path: String::new(), message: format!("invalid JSON: {e}") }]
    })?;
    let mut p = Parser::default();
    let cfg = p.run_config(&root);
    match cfg {
        Some(cfg) if p.errors.is_empty() => Ok(cfg),
        _ => Err(p.errors),
    }
}

#[derive(Default)]
struct Parser {
    errors: Vec<ConfigError>,
    warnings: Vec<String>,
    symbol: String,
    sites: Vec<String>,
}

fn describe(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "a boolean",
        Value::Number(_) => "a number",
        Value::String(_) => "a string",
        Value::Array(_) => "an array",
        Value::Object(_) => "an object",
    }
}

fn join(path: &str, key: &str) -> String {
    format!("{path}/{key}")
}

impl Parser {
    fn err(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.errors.push(ConfigError { path: path.into(), message: message.into() });
    }

    fn object<'a>(&mut self, v: &'a Value, path: &str) -> Option<&'a Map<String, Value>> {
        match v {
            Value::Object(m) => Some(m),
            other => {
                self.err(path, format!("expected an object, found {}", describe(other)));
                None
            }
        }
    }

    fn check_keys(&mut self, map: &Map<String, Value>, path: &str, allowed: &[&str]) {
        for key in map.keys() {
            if !allowed.contains(&key.as_str()) {
                self.err(join(path, key), format!("unknown field (expected one of: {})", allowed.join(", ")));
            }
        }
    }

    fn f64_value(&mut self, v: &Value, path: &str) -> Option<f64> {
        match v.as_f64() {
            Some(x) if x.is_finite() => Some(x),
            _ => {
                self.err(path, format!("expected a finite number, found {}", describe(v)));
                None
            }
        }
    }

    fn number(&mut self, map: &Map<String, Value>, key: &str, path: &str) -> Option<f64> {
        match map.get(key) {
            Some(v) => self.f64_value(v, &join(path, key)),
            None => {
                self.err(join(path, key), "missing required field");
                None
            }
        }
    }

    fn opt_number(&mut self, map: &Map<String, Value>, key: &str, path: &str, default: f64) -> Option<f64> {
        match map.get(key) {
            Some(v) => self.f64_value(v, &join(path, key)),
            None => Some(default),
        }
    }

    fn positive(&mut self, map: &Map<String, Value>, key: &str, path: &str, default: f64) -> Option<f64> {
        let x = self.opt_number(map, key, path, default)?;
        if x > 0.0 {
            Some(x)
        } else {
            self.err(join(path, key), format!("must be positive, got {x}"));
            None
        }
    }

    fn count(&mut self, map: &Map<String, Value>, key: &str, path: &str, min: u64) -> Option<usize> {
        let p = join(path, key);
        match map.get(key) {
            Some(v) => match v.as_u64() {
                Some(n) if n >= min => Some(n as usize),
                Some(n) => {
                    self.err(p, format!("must be at least {min}, got {n}"));
                    None
                }
                None => {
                    self.err(p, format!("expected a non-negative integer, found {}", describe(v)));
                    None
                }
            },
            None => {
                self.err(p, "missing required field");
                None
            }
        }
    }

    fn opt_count(&mut self, map: &Map<String, Value>, key: &str, path: &str, min: u64, default: usize) -> Option<usize> {
        if map.contains_key(key) {
            self.count(map, key, path, min)
        } else {
            Some(default)
        }
    }

    /// A literal complex number: `x` or `[re, im]`.
    fn literal(&mut self, v: &Value, path: &str) -> Option<Complex64> {
        match v {
            Value::Number(_) => self.f64_value(v, path).map(|x| Complex64::new(x, 0.0)),
            Value::Array(a) if a.len() == 2 => {
                let re = self.f64_value(&a[0], &join(path, "0"));
                let im = self.f64_value(&a[1], &join(path, "1"));
                Some(Complex64::new(re?, im?))
            }
            other => {
                self.err(path, format!("expected a number or [re, im], found {}", describe(other)));
                None
            }
        }
    }

    fn param_value(&mut self, v: &Value, path: &str, real: bool, bound: &mut bool) -> Option<Param> {
        if let Value::String(s) = v {
            if *s == self.symbol {
                *bound = true;
                return Some(Param::Bound);
            }
            self.err(path, format!("unknown parameter \"{s}\" (the sweep binds \"{}\")", self.symbol));
            return None;
        }
        let c = self.literal(v, path)?;
        if real && c.im != 0.0 {
            self.err(path, "this field must be real");
            return None;
        }
        Some(Param::Const(c))
    }

    fn param(&mut self, map: &Map<String, Value>, key: &str, path: &str, real: bool, bound: &mut bool) -> Option<Param> {
        match map.get(key) {
            Some(v) => self.param_value(v, &join(path, key), real, bound),
            None => {
                self.err(join(path, key), "missing required field");
                None
            }
        }
    }

    fn opt_param(
        &mut self,
        map: &Map<String, Value>,
        key: &str,
        path: &str,
        real: bool,
        bound: &mut bool,
    ) -> Option<Option<Param>> {
        match map.get(key) {
            Some(v) => self.param_value(v, &join(path, key), real, bound).map(Some),
            None => Some(None),
        }
    }

    fn opt_mass(&mut self, map: &Map<String, Value>, path: &str) -> Option<Option<f64>> {
        if map.contains_key("mass") {
            self.positive(map, "mass", path, 1.0).map(Some)
        } else {
            Some(None)
        }
    }

    fn node(&mut self, v: &Value, path: &str) -> Option<NodeTemplate> {
        let map = self.object(v, path)?;
        let kind = match map.get("type") {
            Some(Value::String(s)) => s.clone(),
            Some(other) => {
                self.err(join(path, "type"), format!("expected a string, found {}", describe(other)));
                return None;
            }
            None => {
                self.err(join(path, "type"), "missing required field");
                return None;
            }
        };
        let mut bound = false;
        let node = self.node_body(&kind, map, path, &mut bound);
        if bound {
            self.sites.push(path.to_string());
        }
        node
    }

    fn node_body(
        &mut self,
        kind: &str,
        map: &Map<String, Value>,
        path: &str,
        bound: &mut bool,
    ) -> Option<NodeTemplate> {
        match kind {
            "free" => {
                self.check_keys(map, path, &["type", "length", "k", "k_backward", "mass"]);
                let length = self.param(map, "length", path, true, bound);
                let k = self.param(map, "k", path, false, bound);
                let k_backward = self.opt_param(map, "k_backward", path, false, bound);
                let mass = self.opt_mass(map, path);
                Some(NodeTemplate::Free { length: length?, k: k?, k_backward: k_backward?, mass: mass? })
            }
            "bragg" => {
                self.check_keys(map, path, &["type", "n0", "n1", "n2", "grating", "length", "k"]);
                let n0 = self.param(map, "n0", path, true, bound);
                let n1 = self.param(map, "n1", path, true, bound);
                let n2 = self.param(map, "n2", path, true, bound);
                let grating = self.param(map, "grating", path, true, bound);
                let length = self.param(map, "length", path, true, bound);
                let k = self.param(map, "k", path, false, bound);
                Some(NodeTemplate::Bragg { n0: n0?, n1: n1?, n2: n2?, grating: grating?, length: length?, k: k? })
            }
            "pt" => {
                self.check_keys(map, path, &["type", "a", "b", "c"]);
                let a = self.param(map, "a", path, false, bound);
                let b = self.param(map, "b", path, false, bound);
                let c = self.param(map, "c", path, false, bound);
                Some(NodeTemplate::Pt { a: a?, b: b?, c: c? })
            }
            "pt_table" => {
                self.check_keys(map, path, &["type", "omega", "a", "b", "c", "at"]);
                let at = self.param(map, "at", path, true, bound);
                let omega = self.real_column(map, "omega", path);
                let a = self.complex_column(map, "a", path);
                let b = self.complex_column(map, "b", path);
                let c = self.complex_column(map, "c", path);
                let table = match PtTable::new(omega?, a?, b?, c?) {
                    Ok(t) => t,
                    Err(e) => {
                        self.err(path, e.to_string());
                        return None;
                    }
                };
                Some(NodeTemplate::PtTable { table, at: at? })
            }
            "matrix" => {
                self.check_keys(map, path, &["type", "m11", "m12", "m21", "m22"]);
                let e: Vec<Option<Param>> =
                    ["m11", "m12", "m21", "m22"].iter().map(|k| self.param(map, k, path, false, bound)).collect();
                Some(NodeTemplate::Matrix { entries: [e[0]?, e[1]?, e[2]?, e[3]?] })
            }
            "ab_ring" => {
                self.check_keys(map, path, &["type", "k", "length", "flux_phase", "arm1"]);
                let k = self.param(map, "k", path, true, bound);
                let length = self.param(map, "length", path, true, bound);
                let flux_phase = self.param(map, "flux_phase", path, true, bound);
                let arm1 = self.opt_param(map, "arm1", path, true, bound);
                Some(NodeTemplate::AbRing { k: k?, length: length?, flux_phase: flux_phase?, arm1: arm1? })
            }
            "serial" => {
                self.check_keys(map, path, &["type", "children"]);
                let list = self.node_list(map, "children", path)?;
                Some(NodeTemplate::Serial(list))
            }
            "repeat" | "parallel_repeat" => {
                self.check_keys(map, path, &["type", "count", "cell"]);
                let count = self.count(map, "count", path, 1);
                let cell = match map.get("cell") {
                    Some(v) => self.node(v, &join(path, "cell")),
                    None => {
                        self.err(join(path, "cell"), "missing required field");
                        None
                    }
                };
                let (count, cell) = (count?, Box::new(cell?));
                if kind == "repeat" {
                    Some(NodeTemplate::Repeat { count, cell })
                } else {
                    if count == 1 {
                        self.warnings.push(format!("{path}: N=1 parallel is a pass-through"));
                    }
                    Some(NodeTemplate::ParallelRepeat { count, cell })
                }
            }
            "parallel" => self.parallel(map, path, bound),
            other => {
                self.err(
                    join(path, "type"),
                    format!(
                        "unknown node type \"{other}\" (expected free, bragg, pt, pt_table, matrix, ab_ring, serial, repeat, parallel, parallel_repeat)"
                    ),
                );
                None
            }
        }
    }

    fn parallel(&mut self, map: &Map<String, Value>, path: &str, bound: &mut bool) -> Option<NodeTemplate> {
        self.check_keys(map, path, &["type", "k", "branches", "vertex_in", "vertex_out", "reference"]);
        let k = self.param(map, "k", path, false, bound);
        let bpath = join(path, "branches");
        let branches = match map.get("branches") {
            Some(Value::Array(list)) if !list.is_empty() => {
                let mut out = Vec::new();
                for (i, b) in list.iter().enumerate() {
                    out.push(self.branch(b, &join(&bpath, &i.to_string()), bound));
                }
                out.into_iter().collect::<Option<Vec<_>>>()
            }
            Some(Value::Array(_)) => {
                self.err(&bpath, "needs at least one branch");
                None
            }
            Some(other) => {
                self.err(&bpath, format!("expected an array, found {}", describe(other)));
                None
            }
            None => {
                self.err(&bpath, "missing required field");
                None
            }
        };
        let vertex_in = self.vertex(map, "vertex_in", path, bound);
        let vertex_out = self.vertex(map, "vertex_out", path, bound);
        let reference = self.opt_count(map, "reference", path, 0, 0);
        let branches = branches?;
        if branches.len() == 1 {
            self.warnings.push(format!("{path}: N=1 parallel is a pass-through"));
        }
        let reference = reference?;
        if reference >= branches.len() {
            self.err(
                join(path, "reference"),
                format!("0-based reference {reference} out of range for {} branches", branches.len()),
            );
            return None;
        }
        Some(NodeTemplate::Parallel { k: k?, branches, vertex_in: vertex_in?, vertex_out: vertex_out?, reference })
    }

    fn branch(&mut self, v: &Value, path: &str, bound: &mut bool) -> Option<BranchTemplate> {
        let map = self.object(v, path)?;
        self.check_keys(map, path, &["node", "k", "k_backward", "k_out", "k_out_backward", "mass"]);
        let node = match map.get("node") {
            Some(n) => self.node(n, &join(path, "node")),
            None => {
                self.err(join(path, "node"), "missing required field");
                None
            }
        };
        let k_in = self.opt_param(map, "k", path, false, bound);
        let k_in_back = self.opt_param(map, "k_backward", path, false, bound);
        let k_out = self.opt_param(map, "k_out", path, false, bound);
        let k_out_back = self.opt_param(map, "k_out_backward", path, false, bound);
        let mass = self.opt_mass(map, path);
        Some(BranchTemplate {
            node: node?,
            k_in: k_in?,
            k_in_back: k_in_back?,
            k_out: k_out?,
            k_out_back: k_out_back?,
            mass: mass?,
        })
    }

    fn vertex(&mut self, parent: &Map<String, Value>, key: &str, path: &str, bound: &mut bool) -> Option<VertexTemplate> {
        let Some(v) = parent.get(key) else { return Some(VertexTemplate::default()) };
        let path = join(path, key);
        let map = self.object(v, &path)?;
        self.check_keys(map, &path, &["k", "contact", "mass"]);
        let k = self.opt_param(map, "k", &path, false, bound);
        let contact = self.opt_param(map, "contact", &path, false, bound);
        let mass = self.opt_mass(map, &path);
        Some(VertexTemplate {
            k: k?,
            contact: contact?.unwrap_or(Param::Const(Complex64::new(0.0, 0.0))),
            mass: mass?,
        })
    }

    fn node_list(&mut self, map: &Map<String, Value>, key: &str, path: &str) -> Option<Vec<NodeTemplate>> {
        let p = join(path, key);
        match map.get(key) {
            Some(Value::Array(list)) if !list.is_empty() => {
                let nodes: Vec<_> =
                    list.iter().enumerate().map(|(i, v)| self.node(v, &join(&p, &i.to_string()))).collect();
                nodes.into_iter().collect()
            }
            Some(Value::Array(_)) => {
                self.err(p, "needs at least one child");
                None
            }
            Some(other) => {
                self.err(p, format!("expected an array, found {}", describe(other)));
                None
            }
            None => {
                self.err(p, "missing required field");
                None
            }
        }
    }

    fn array<'a>(&mut self, map: &'a Map<String, Value>, key: &str, path: &str) -> Option<&'a Vec<Value>> {
        match map.get(key) {
            Some(Value::Array(a)) => Some(a),
            Some(other) => {
                self.err(join(path, key), format!("expected an array, found {}", describe(other)));
                None
            }
            None => {
                self.err(join(path, key), "missing required field");
                None
            }
        }
    }

    fn real_column(&mut self, map: &Map<String, Value>, key: &str, path: &str) -> Option<Vec<f64>> {
        let list = self.array(map, key, path)?;
        let p = join(path, key);
        let vals: Vec<_> = list.iter().enumerate().map(|(i, v)| self.f64_value(v, &join(&p, &i.to_string()))).collect();
        vals.into_iter().collect()
    }

    fn complex_column(&mut self, map: &Map<String, Value>, key: &str, path: &str) -> Option<Vec<Complex64>> {
        let list = self.array(map, key, path)?;
        let p = join(path, key);
        let vals: Vec<_> = list.iter().enumerate().map(|(i, v)| self.literal(v, &join(&p, &i.to_string()))).collect();
        vals.into_iter().collect()
    }

    fn constants(&mut self, root: &Map<String, Value>) -> Option<PhysicalConstants> {
        let Some(v) = root.get("constants") else { return Some(PhysicalConstants::default()) };
        let map = self.object(v, "/constants")?;
        self.check_keys(map, "/constants", &["hbar", "e_charge", "c_light", "default_mass"]);
        let hbar = self.positive(map, "hbar", "/constants", 1.0);
        let e_charge = self.positive(map, "e_charge", "/constants", 1.0);
        let c_light = self.positive(map, "c_light", "/constants", 1.0);
        let default_mass = self.positive(map, "default_mass", "/constants", 1.0);
        Some(PhysicalConstants { hbar: hbar?, e_charge: e_charge?, c_light: c_light?, default_mass: default_mass? })
    }

    fn sweep(&mut self, root: &Map<String, Value>) -> Option<Option<SweepConfig>> {
        let Some(v) = root.get("sweep") else { return Some(None) };
        let map = self.object(v, "/sweep")?;
        self.check_keys(map, "/sweep", &["parameter", "lo", "hi", "steps"]);
        let lo = self.number(map, "lo", "/sweep");
        let hi = self.number(map, "hi", "/sweep");
        let steps = self.count(map, "steps", "/sweep", 2);
        let (lo, hi) = (lo?, hi?);
        if !(lo < hi) {
            self.err("/sweep/hi", format!("must exceed lo = {lo}, got {hi}"));
            return None;
        }
        Some(Some(SweepConfig { lo, hi, steps: steps? }))
    }

    fn finder(&mut self, map: &Map<String, Value>, path: &str, tol: f64) -> Option<FinderConfig> {
        let tol = self.positive(map, "tol", path, tol);
        let scan_points = self.opt_count(map, "scan_points", path, 3, 2001);
        let range = match map.get("range") {
            None => Some(None),
            Some(Value::Array(a)) if a.len() == 2 => {
                let p = join(path, "range");
                let lo = self.f64_value(&a[0], &join(&p, "0"));
                let hi = self.f64_value(&a[1], &join(&p, "1"));
                match (lo, hi) {
                    (Some(lo), Some(hi)) if lo < hi => Some(Some((lo, hi))),
                    (Some(_), Some(_)) => {
                        self.err(p, "range needs lo < hi");
                        None
                    }
                    _ => None,
                }
            }
            Some(other) => {
                self.err(join(path, "range"), format!("expected [lo, hi], found {}", describe(other)));
                None
            }
        };
        Some(FinderConfig { tol: tol?, scan_points: scan_points?, range: range? })
    }

    fn analysis(&mut self, v: &Value, path: &str) -> Option<AnalysisConfig> {
        let map = self.object(v, path)?;
        let kind = match map.get("kind").and_then(Value::as_str) {
            Some(k) => k.to_string(),
            None => {
                self.err(join(path, "kind"), "missing or non-string field (singularities, exceptional_points, atr)");
                return None;
            }
        };
        match kind.as_str() {
            "singularities" => {
                self.check_keys(map, path, &["kind", "entry", "tol", "scan_points", "range", "near_miss"]);
                let entry = match map.get("entry").map(|v| v.as_str()) {
                    None | Some(Some("both")) => Some(None),
                    Some(Some("lasing")) => Some(Some(SingularityKind::Lasing)),
                    Some(Some("cpa")) => Some(Some(SingularityKind::Cpa)),
                    _ => {
                        self.err(join(path, "entry"), "expected \"lasing\", \"cpa\" or \"both\"");
                        None
                    }
                };
                let finder = self.finder(map, path, 1e-9);
                let near_miss = self.positive(map, "near_miss", path, 1e-3);
                Some(AnalysisConfig::Singularities { kind: entry?, finder: finder?, near_miss: near_miss? })
            }
            "exceptional_points" => {
                self.check_keys(map, path, &["kind", "mode", "n", "tol", "scan_points", "range"]);
                let finder = self.finder(map, path, 1e-9);
                let mode = match map.get("mode").and_then(Value::as_str).unwrap_or("single") {
                    "single" => Some(EpMode::Single),
                    "serial" => self.count(map, "n", path, 1).map(EpMode::Serial),
                    "parallel" => self.count(map, "n", path, 2).map(EpMode::Parallel),
                    other => {
                        self.err(join(path, "mode"), format!("unknown mode \"{other}\" (single, serial, parallel)"));
                        None
                    }
                };
                Some(AnalysisConfig::ExceptionalPoints { mode: mode?, finder: finder? })
            }
            "atr" => {
                self.check_keys(map, path, &["kind", "tol"]);
                Some(AnalysisConfig::Atr { tol: self.positive(map, "tol", path, DEFAULT_ATR_TOL)? })
            }
            other => {
                self.err(join(path, "kind"), format!("unknown analysis \"{other}\""));
                None
            }
        }
    }

    fn output(&mut self, root: &Map<String, Value>) -> Option<OutputConfig> {
        let Some(v) = root.get("output") else { return Some(OutputConfig::default()) };
        let map = self.object(v, "/output")?;
        self.check_keys(map, "/output", &["directory", "basename"]);
        let mut out = OutputConfig::default();
        if let Some(d) = map.get("directory") {
            match d.as_str() {
                Some(s) if !s.is_empty() => out.directory = PathBuf::from(s),
                _ => self.err("/output/directory", "expected a non-empty string"),
            }
        }
        if let Some(b) = map.get("basename") {
            match b.as_str() {
                Some(s) if !s.is_empty() && !s.contains(['/', '\\']) => out.basename = s.to_string(),
                _ => self.err("/output/basename", "expected a non-empty file name without separators"),
            }
        }
        Some(out)
    }

    fn run_config(&mut self, root: &Value) -> Option<RunConfig> {
        let map = self.object(root, "")?;
        self.check_keys(map, "", &["network", "sweep", "analyses", "output", "constants"]);
        self.symbol = match map.get("sweep").and_then(|s| s.get("parameter")) {
            None => DEFAULT_PARAMETER.to_string(),
            Some(Value::String(s)) if !s.is_empty() => s.clone(),
            Some(_) => {
                self.err("/sweep/parameter", "expected a non-empty string");
                DEFAULT_PARAMETER.to_string()
            }
        };
        let constants = self.constants(map);
        let network = match map.get("network") {
            Some(v) => self.node(v, "/network"),
            None => {
                self.err("/network", "missing required field");
                None
            }
        };
        let sweep_map = map.get("sweep").and_then(Value::as_object).cloned();
        let sweep = match sweep_map {
            Some(mut m) => {
                m.remove("parameter");
                let mut root = Map::new();
                root.insert("sweep".into(), Value::Object(m));
                self.sweep(&root)
            }
            None => self.sweep(map),
        };
        let analyses = match map.get("analyses") {
            None => Some(Vec::new()),
            Some(Value::Array(list)) => {
                let items: Vec<_> =
                    list.iter().enumerate().map(|(i, v)| self.analysis(v, &format!("/analyses/{i}"))).collect();
                items.into_iter().collect()
            }
            Some(other) => {
                self.err("/analyses", format!("expected an array, found {}", describe(other)));
                None
            }
        };
        let output = self.output(map);
        let sweep = sweep?;
        if sweep.is_some() && self.sites.is_empty() {
            self.err(
                "/sweep/parameter",
                format!("parameter \"{}\" is not used by any cell", self.symbol),
            );
        }
        if sweep.is_none() && analyses.as_ref().is_some_and(|a| !a.is_empty()) {
            self.err("/analyses", "analyses need a sweep block");
        }
        Some(RunConfig {
            constants: constants?,
            network: network?,
            parameter: self.symbol.clone(),
            bindings: std::mem::take(&mut self.sites),
            sweep,
            analyses: analyses?,
            output: output?,
            warnings: std::mem::take(&mut self.warnings),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn errors(text: &str) -> Vec<ConfigError> {
        parse_config(text).expect_err("config should be rejected")
    }

    #[test]
    fn minimal_free_segment_sweep() {
        let cfg = parse_config(
            r#"{"network": {"type": "free", "length": 1.5, "k": "k"},
                "sweep": {"parameter": "k", "lo": 0.5, "hi": 2.0, "steps": 11}}"#,
        )
        .unwrap();
        assert_eq!(cfg.parameter, "k");
        assert_eq!(cfg.bindings, vec!["/network".to_string()]);
        assert!(cfg.warnings.is_empty());
        let node = cfg.build(1.0).unwrap();
        let m = scatternet::compose(&node).unwrap().matrix;
        assert!((m.m22() - Complex64::new(0.0, -1.5).exp()).norm() < 1e-15);
    }

    #[test]
    fn single_branch_parallel_warns() {
        let cfg = parse_config(
            r#"{"network": {"type": "parallel", "k": 1.0,
                 "branches": [{"node": {"type": "free", "length": 1.0, "k": 1.0}}]}}"#,
        )
        .unwrap();
        assert_eq!(cfg.warnings, vec!["/network: N=1 parallel is a pass-through".to_string()]);
    }

    #[test]
    fn steps_below_two_is_rejected_at_path() {
        let errs = errors(
            r#"{"network": {"type": "free", "length": 1.0, "k": "omega"},
                "sweep": {"lo": 0.0, "hi": 1.0, "steps": 1}}"#,
        );
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].path, "/sweep/steps");
    }

    #[test]
    fn all_errors_are_collected() {
        let errs = errors(
            r#"{"network": {"type": "serial", "children": [
                    {"type": "free", "length": [1.0, 2.0], "k": 1.0},
                    {"type": "warp"},
                    {"type": "bragg", "n0": 1.5, "n1": 0.01, "n2": 0.01, "grating": 10, "length": 2, "k": "q"}]},
                "sweep": {"lo": 2.0, "hi": 1.0, "steps": 0},
                "extra": true}"#,
        );
        let paths: Vec<&str> = errs.iter().map(|e| e.path.as_str()).collect();
        for want in [
            "/extra",
            "/network/children/0/length",
            "/network/children/1/type",
            "/network/children/2/k",
            "/sweep/steps",
        ] {
            assert!(paths.contains(&want), "missing {want} in {paths:?}");
        }
    }

    #[test]
    fn parameter_must_be_used() {
        let errs = errors(
            r#"{"network": {"type": "free", "length": 1.0, "k": 1.0},
                "sweep": {"lo": 0.5, "hi": 1.0, "steps": 3}}"#,
        );
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].path, "/sweep/parameter");
        assert!(errs[0].message.contains("not used"));
    }

    #[test]
    fn parameter_may_feed_several_cells() {
        let cfg = parse_config(
            r#"{"network": {"type": "parallel", "k": "omega", "branches": [
                    {"node": {"type": "free", "length": 1.0, "k": "omega"}},
                    {"node": {"type": "free", "length": 2.0, "k": "omega"}}]},
                "sweep": {"lo": 0.5, "hi": 1.0, "steps": 3}}"#,
        )
        .unwrap();
        assert_eq!(
            cfg.bindings,
            vec!["/network/branches/0/node", "/network/branches/1/node", "/network"]
        );
    }

    #[test]
    fn repeat_records_the_template_cell() {
        let cfg = parse_config(
            r#"{"network": {"type": "repeat", "count": 5,
                 "cell": {"type": "pt", "a": [0.8, 0.6], "b": "w", "c": 0.0}},
                "sweep": {"parameter": "w", "lo": -1, "hi": 1, "steps": 5}}"#,
        )
        .unwrap();
        assert_eq!(cfg.bindings, vec!["/network/cell".to_string()]);
    }

    #[test]
    fn parallel_reference_is_checked() {
        let errs = errors(
            r#"{"network": {"type": "parallel", "k": 1.0, "reference": 2,
                 "branches": [{"node": {"type": "free", "length": 1.0, "k": 1.0}},
                              {"node": {"type": "free", "length": 2.0, "k": 1.0}}]}}"#,
        );
        assert_eq!(errs[0].path, "/network/reference");
    }

    #[test]
    fn analyses_parse() {
        let cfg = parse_config(
            r#"{"network": {"type": "pt", "a": [0.8, 0.6], "b": "w", "c": 0.0},
                "sweep": {"parameter": "w", "lo": -3, "hi": 3, "steps": 5},
                "analyses": [{"kind": "singularities", "entry": "cpa"},
                             {"kind": "exceptional_points", "mode": "serial", "n": 3, "tol": 1e-8},
                             {"kind": "atr"}]}"#,
        )
        .unwrap();
        assert_eq!(cfg.analyses.len(), 3);
        assert_eq!(
            cfg.analyses[1],
            AnalysisConfig::ExceptionalPoints {
                mode: EpMode::Serial(3),
                finder: FinderConfig { tol: 1e-8, scan_points: 2001, range: None }
            }
        );
        let errs = errors(
            r#"{"network": {"type": "pt", "a": 1, "b": "w", "c": 0.0},
                "sweep": {"parameter": "w", "lo": -3, "hi": 3, "steps": 5},
                "analyses": [{"kind": "exceptional_points", "mode": "parallel", "n": 1}]}"#,
        );
        assert_eq!(errs[0].path, "/analyses/0/n");
    }

    #[test]
    fn invalid_json_is_reported() {
        let errs = errors("{not json");
        assert_eq!(errs.len(), 1);
        assert!(errs[0].message.starts_with("invalid JSON"));
    }
}
