//! Run configuration.
//!
//! The file is TOML restricted to six sections of plain `key = value`
//! assignments. Every key is optional; missing keys take the standard-slab
//! defaults. Parsing never stops at the first problem: all violations are
//! collected, each tagged with its line.
//!
//! ```toml
//! [domain]
//! length = 1.0
//! nx = 16
//!
//! [motion]
//! mode = "graph"
//! h = "1 + 0.1 * t"
//!
//! [material]
//! mu = 1.0
//! p_ext = "1 + 0.5 * sin(t)"
//! ```

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};
use std::path::PathBuf;

use thiserror::Error;
use toml_edit::{Document, Item, Table, Value};

use crate::expr::{Expr, Var};

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

/// Every violation found in a configuration.
#[derive(Debug, Clone, PartialEq, Error)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, e) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str("\n")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lateral {
    /// Walls held fixed with the substratum.
    Clamped,
    /// Walls loaded like the top boundary.
    Free,
}

/// Reference height `h0(x1)` for velocity-field motion.
#[derive(Debug, Clone, PartialEq)]
pub enum HeightSpec {
    Expr(Expr),
    /// Two-column `x1,h` CSV, interpolated linearly. Relative paths resolve
    /// against the configuration file.
    Table(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DomainConfig {
    pub length: f64,
    pub nx: usize,
    pub ny: usize,
    pub h_floor: f64,
    pub h0: HeightSpec,
    pub lateral: Lateral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MotionMode {
    /// Top boundary given as `x2 = h(x1, t)`.
    Graph,
    /// Points carried by `x + t nu(x)`.
    LinearField,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MotionConfig {
    pub mode: MotionMode,
    pub h: Expr,
    pub nu1: Expr,
    pub nu2: Expr,
    /// Search horizon for the admissible time span.
    pub horizon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TractionKind {
    Exterior,
    Field,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaterialConfig {
    pub lambda: f64,
    pub mu: f64,
    pub k_h: f64,
    pub pi: f64,
    pub xi_inf: f64,
    pub k_s: f64,
    pub g_s: f64,
    pub k_c: f64,
    pub g_c: f64,
    pub monod_k_s: f64,
    pub monod_k_c: f64,
    pub d: f64,
    pub c0: f64,
    pub p_ext: Expr,
    pub pi_ext: Expr,
    pub monod_live: bool,
    pub osmotic: bool,
    pub traction: TractionKind,
    pub g1: Expr,
    pub g2: Expr,
    pub e_ext: Expr,
    pub e0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeConfig {
    pub t_end: f64,
    pub dt: f64,
    pub theta: f64,
    pub substeps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Consistent,
    AsPublished,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateBoundaryKind {
    Exterior,
    Transported,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub max_iters: usize,
    pub rel_tol: f64,
    pub relaxation: f64,
    pub phi_inf: f64,
    pub variant: Variant,
    pub rate_boundary: RateBoundaryKind,
    pub warm_start: bool,
    pub force_fraction: bool,
    pub fraction_tol: f64,
    /// Also take the explicit height step from the flux balance and report it.
    pub experimental_height: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Format {
    Csv,
    Vtk,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Export every `stride`-th slab.
    pub stride: usize,
    pub formats: BTreeSet<Format>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub domain: DomainConfig,
    pub motion: MotionConfig,
    pub material: MaterialConfig,
    pub time: TimeConfig,
    pub solver: SolverConfig,
    pub output: OutputConfig,
}

fn e(src: &str) -> Expr {
    Expr::parse(src).expect("default expression")
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            domain: DomainConfig {
                length: 1.0,
                nx: 16,
                ny: 16,
                h_floor: 0.1,
                h0: HeightSpec::Expr(Expr::constant(1.0)),
                lateral: Lateral::Clamped,
            },
            motion: MotionConfig {
                mode: MotionMode::Graph,
                h: e("1 + 0.1 * t"),
                nu1: Expr::constant(0.0),
                nu2: e("0.1 * x2"),
                horizon: 10.0,
            },
            material: MaterialConfig {
                lambda: 1.0,
                mu: 1.0,
                k_h: 1.0,
                pi: 0.0,
                xi_inf: 1.0,
                k_s: 1.0,
                g_s: 1.0,
                k_c: 1.0,
                g_c: 1.0,
                monod_k_s: 1.0,
                monod_k_c: 1.0,
                d: 1.0,
                c0: 1.0,
                p_ext: Expr::constant(0.0),
                pi_ext: Expr::constant(0.0),
                monod_live: false,
                osmotic: false,
                traction: TractionKind::Exterior,
                g1: Expr::constant(0.0),
                g2: Expr::constant(0.0),
                e_ext: Expr::constant(0.0),
                e0: 0.0,
            },
            time: TimeConfig {
                t_end: 0.4,
                dt: 0.1,
                theta: 1.0,
                substeps: 1,
            },
            solver: SolverConfig {
                max_iters: 30,
                rel_tol: 1e-8,
                relaxation: 1.0,
                phi_inf: 0.5,
                variant: Variant::Consistent,
                rate_boundary: RateBoundaryKind::Transported,
                warm_start: false,
                force_fraction: false,
                fraction_tol: 1e-8,
                experimental_height: false,
            },
            output: OutputConfig {
                dir: PathBuf::from("out"),
                stride: 1,
                formats: [Format::Csv, Format::Vtk].into_iter().collect(),
            },
        }
    }
}

const SECTIONS: [(&str, &[&str]); 6] = [
    ("domain", &["length", "nx", "ny", "h_floor", "h0", "lateral"]),
    ("motion", &["mode", "h", "nu1", "nu2", "horizon"]),
    (
        "material",
        &[
            "lambda",
            "mu",
            "k_h",
            "pi",
            "xi_inf",
            "k_s",
            "g_s",
            "k_c",
            "g_c",
            "monod_k_s",
            "monod_k_c",
            "d",
            "c0",
            "p_ext",
            "pi_ext",
            "monod",
            "pressure",
            "traction",
            "g1",
            "g2",
            "e_ext",
            "e0",
        ],
    ),
    ("time", &["t_end", "dt", "theta", "substeps"]),
    (
        "solver",
        &[
            "max_iters",
            "rel_tol",
            "relaxation",
            "phi_inf",
            "variant",
            "rate_boundary",
            "warm_start",
            "force_fraction",
            "fraction_tol",
            "experimental_height",
        ],
    ),
    ("output", &["dir", "stride", "formats"]),
];

struct Reader<'a> {
    src: &'a str,
    errors: Vec<ConfigError>,
}

/// One section of the document, possibly absent.
struct Section<'a> {
    name: &'static str,
    table: Option<&'a Table>,
}

enum Check {
    Positive,
    NonNegative,
    Finite,
}

impl<'a> Reader<'a> {
    fn line(&self, span: Option<std::ops::Range<usize>>) -> Option<usize> {
        span.map(|s| self.src[..s.start.min(self.src.len())].matches('\n').count() + 1)
    }

    fn push(&mut self, span: Option<std::ops::Range<usize>>, message: String) {
        let line = self.line(span);
        self.errors.push(ConfigError { line, message });
    }

    fn value<'t>(&mut self, s: &Section<'t>, key: &str) -> Option<(&'t Value, Option<std::ops::Range<usize>>)> {
        let (k, item) = s.table?.get_key_value(key)?;
        let span = item.span().or_else(|| k.span());
        match item {
            Item::Value(v) => Some((v, v.span().or(span))),
            _ => {
                self.push(span, format!("{}.{key} must be a plain value", s.name));
                None
            }
        }
    }

    fn span_of(&self, s: &Section, key: &str) -> Option<std::ops::Range<usize>> {
        let (k, item) = s.table?.get_key_value(key)?;
        item.span().or_else(|| k.span())
    }

    fn float(&mut self, s: &Section, key: &str, default: f64, check: Check) -> f64 {
        let Some((v, span)) = self.value(s, key) else {
            return default;
        };
        let x = match v {
            Value::Float(f) => *f.value(),
            Value::Integer(i) => *i.value() as f64,
            _ => {
                self.push(span, format!("{key} must be a number"));
                return default;
            }
        };
        let ok = x.is_finite()
            && match check {
                Check::Positive => x > 0.0,
                Check::NonNegative => x >= 0.0,
                Check::Finite => true,
            };
        if !ok {
            let what = match check {
                Check::Positive => "positive",
                Check::NonNegative => "non-negative",
                Check::Finite => "finite",
            };
            self.push(span, format!("{key} must be {what}, got {x}"));
            return default;
        }
        x
    }

    fn float_in(&mut self, s: &Section, key: &str, default: f64, ok: impl Fn(f64) -> bool, range: &str) -> f64 {
        let span = self.span_of(s, key);
        let before = self.errors.len();
        let x = self.float(s, key, default, Check::Finite);
        if self.errors.len() == before && !ok(x) {
            self.push(span, format!("{key} must lie in {range}, got {x}"));
            return default;
        }
        x
    }

    fn count(&mut self, s: &Section, key: &str, default: usize, min: usize) -> usize {
        let Some((v, span)) = self.value(s, key) else {
            return default;
        };
        match v {
            Value::Integer(i) if *i.value() >= min as i64 => *i.value() as usize,
            Value::Integer(i) => {
                self.push(span, format!("{key} must be at least {min}, got {}", i.value()));
                default
            }
            _ => {
                self.push(span, format!("{key} must be an integer"));
                default
            }
        }
    }

    fn flag(&mut self, s: &Section, key: &str, default: bool) -> bool {
        match self.value(s, key) {
            None => default,
            Some((Value::Boolean(b), _)) => *b.value(),
            Some((_, span)) => {
                self.push(span, format!("{key} must be true or false"));
                default
            }
        }
    }

    fn string(&mut self, s: &Section, key: &str) -> Option<(String, Option<std::ops::Range<usize>>)> {
        match self.value(s, key)? {
            (Value::String(v), span) => Some((v.value().clone(), span)),
            (_, span) => {
                self.push(span, format!("{key} must be a string"));
                None
            }
        }
    }

    fn choice<T: Copy>(&mut self, s: &Section, key: &str, default: T, options: &[(&str, T)]) -> T {
        let Some((v, span)) = self.string(s, key) else {
            return default;
        };
        match options.iter().find(|(name, _)| *name == v) {
            Some((_, t)) => *t,
            None => {
                let names: Vec<_> = options.iter().map(|(n, _)| format!("\"{n}\"")).collect();
                self.push(span, format!("{key} must be one of {}, got \"{v}\"", names.join(", ")));
                default
            }
        }
    }

    /// A number or a quoted expression in the allowed variables.
    fn expr(&mut self, s: &Section, key: &str, default: Expr, allowed: &[Var]) -> Expr {
        let Some((v, span)) = self.value(s, key) else {
            return default;
        };
        let parsed = match v {
            Value::Float(f) => Expr::constant(*f.value()),
            Value::Integer(i) => Expr::constant(*i.value() as f64),
            Value::String(text) => match Expr::parse(text.value()) {
                Ok(x) => x,
                Err(err) => {
                    self.push(span, format!("{key}: {err}"));
                    return default;
                }
            },
            _ => {
                self.push(span, format!("{key} must be a number or an expression string"));
                return default;
            }
        };
        let stray: Vec<_> = parsed
            .variables()
            .into_iter()
            .filter(|v| !allowed.contains(v))
            .map(|v| Expr::Var(v).to_string())
            .collect();
        if !stray.is_empty() {
            let names: Vec<_> = allowed.iter().map(|v| Expr::Var(*v).to_string()).collect();
            let allowed = if names.is_empty() {
                "no variables".to_string()
            } else {
                names.join(", ")
            };
            self.push(span, format!("{key} may only use {allowed}, found {}", stray.join(", ")));
            return default;
        }
        if let Some(x) = finite_probe(&parsed) {
            self.push(span, format!("{key} is not finite at {x}"));
            return default;
        }
        parsed
    }
}

/// Evaluates at a few sample points and reports the first non-finite one.
fn finite_probe(x: &Expr) -> Option<String> {
    use crate::expr::Point;
    let p = Point { x1: 0.25, x2: 0.5, t: 0.0 };
    if x.eval(p).is_finite() {
        None
    } else {
        Some(format!("x1 = {}, x2 = {}, t = {}", p.x1, p.x2, p.t))
    }
}

/// Parses and validates a configuration.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigErrors> {
    let doc = match Document::parse(text) {
        Ok(d) => d,
        Err(err) => {
            let r = Reader { src: text, errors: vec![] };
            let line = r.line(err.span());
            return Err(ConfigErrors(vec![ConfigError {
                line,
                message: err.message().trim().to_string(),
            }]));
        }
    };
    let mut r = Reader { src: text, errors: vec![] };
    let root = doc.as_table();
    let mut sections: Vec<Section> = Vec::new();
    for (name, keys) in SECTIONS {
        let table = match root.get_key_value(name) {
            None => None,
            Some((_, Item::Table(t))) => Some(t),
            Some((k, item)) => {
                r.push(item.span().or(k.span()), format!("{name} must be a [{name}] section"));
                None
            }
        };
        if let Some(t) = table {
            for (key, _) in t.iter() {
                if !keys.contains(&key) {
                    let span = t.get_key_value(key).and_then(|(k, _)| k.span());
                    r.push(span, format!("unknown key `{key}` in [{name}]"));
                }
            }
        }
        sections.push(Section { name, table });
    }
    for (key, _) in root.iter() {
        if !SECTIONS.iter().any(|(n, _)| *n == key) {
            let span = root.get_key_value(key).and_then(|(k, i)| k.span().or(i.span()));
            r.push(span, format!("unknown section or key `{key}`"));
        }
    }
    let d = RunConfig::default();
    let [domain, motion, material, time, solver, output] = &sections[..] else {
        unreachable!()
    };

    let h0 = match r.value(domain, "h0") {
        Some((Value::String(s), _)) if s.value().starts_with("table:") => {
            HeightSpec::Table(PathBuf::from(s.value()["table:".len()..].trim()))
        }
        _ => HeightSpec::Expr(r.expr(domain, "h0", Expr::constant(1.0), &[Var::X1])),
    };
    let domain_cfg = DomainConfig {
        length: r.float(domain, "length", d.domain.length, Check::Positive),
        nx: r.count(domain, "nx", d.domain.nx, 2),
        ny: r.count(domain, "ny", d.domain.ny, 1),
        h_floor: r.float(domain, "h_floor", d.domain.h_floor, Check::Positive),
        h0,
        lateral: r.choice(
            domain,
            "lateral",
            d.domain.lateral,
            &[("clamped", Lateral::Clamped), ("free", Lateral::Free)],
        ),
    };

    let motion_cfg = MotionConfig {
        mode: r.choice(
            motion,
            "mode",
            d.motion.mode,
            &[("graph", MotionMode::Graph), ("linear_field", MotionMode::LinearField)],
        ),
        h: r.expr(motion, "h", d.motion.h.clone(), &[Var::X1, Var::T]),
        nu1: r.expr(motion, "nu1", d.motion.nu1.clone(), &[Var::X1, Var::X2]),
        nu2: r.expr(motion, "nu2", d.motion.nu2.clone(), &[Var::X1, Var::X2]),
        horizon: r.float(motion, "horizon", d.motion.horizon, Check::Positive),
    };

    let m = &d.material;
    let lambda = r.float(material, "lambda", m.lambda, Check::Finite);
    let mu = r.float(material, "mu", m.mu, Check::Positive);
    if lambda + mu <= 0.0 {
        let span = r.span_of(material, "lambda");
        r.push(span, format!("lambda must exceed -mu, got lambda = {lambda}, mu = {mu}"));
    }
    let xt = [Var::X1, Var::X2, Var::T];
    let material_cfg = MaterialConfig {
        lambda,
        mu,
        k_h: r.float(material, "k_h", m.k_h, Check::Positive),
        pi: r.float(material, "pi", m.pi, Check::NonNegative),
        xi_inf: r.float(material, "xi_inf", m.xi_inf, Check::Positive),
        k_s: r.float(material, "k_s", m.k_s, Check::Positive),
        g_s: r.float(material, "g_s", m.g_s, Check::Positive),
        k_c: r.float(material, "k_c", m.k_c, Check::Positive),
        g_c: r.float(material, "g_c", m.g_c, Check::Positive),
        monod_k_s: r.float(material, "monod_k_s", m.monod_k_s, Check::Positive),
        monod_k_c: r.float(material, "monod_k_c", m.monod_k_c, Check::Positive),
        d: r.float(material, "d", m.d, Check::Positive),
        c0: r.float(material, "c0", m.c0, Check::Positive),
        p_ext: r.expr(material, "p_ext", m.p_ext.clone(), &[Var::T]),
        pi_ext: r.expr(material, "pi_ext", m.pi_ext.clone(), &[Var::T]),
        monod_live: r.choice(material, "monod", m.monod_live, &[("frozen", false), ("live", true)]),
        osmotic: r.choice(material, "pressure", m.osmotic, &[("standard", false), ("osmotic", true)]),
        traction: r.choice(
            material,
            "traction",
            m.traction,
            &[("exterior", TractionKind::Exterior), ("field", TractionKind::Field)],
        ),
        g1: r.expr(material, "g1", m.g1.clone(), &xt),
        g2: r.expr(material, "g2", m.g2.clone(), &xt),
        e_ext: r.expr(material, "e_ext", m.e_ext.clone(), &[Var::T]),
        e0: r.float(material, "e0", m.e0, Check::Finite),
    };

    let time_cfg = TimeConfig {
        t_end: r.float(time, "t_end", d.time.t_end, Check::NonNegative),
        dt: r.float(time, "dt", d.time.dt, Check::Positive),
        theta: r.float_in(time, "theta", d.time.theta, |x| (0.5..=1.0).contains(&x), "[0.5, 1]"),
        substeps: r.count(time, "substeps", d.time.substeps, 1),
    };

    let s = &d.solver;
    let solver_cfg = SolverConfig {
        max_iters: r.count(solver, "max_iters", s.max_iters, 1),
        rel_tol: r.float(solver, "rel_tol", s.rel_tol, Check::Positive),
        relaxation: r.float_in(solver, "relaxation", s.relaxation, |x| x > 0.0 && x <= 1.0, "(0, 1]"),
        phi_inf: r.float_in(solver, "phi_inf", s.phi_inf, |x| x > 0.0 && x < 1.0, "(0, 1)"),
        variant: r.choice(
            solver,
            "variant",
            s.variant,
            &[("consistent", Variant::Consistent), ("as_published", Variant::AsPublished)],
        ),
        rate_boundary: r.choice(
            solver,
            "rate_boundary",
            s.rate_boundary,
            &[
                ("exterior", RateBoundaryKind::Exterior),
                ("transported", RateBoundaryKind::Transported),
            ],
        ),
        warm_start: r.flag(solver, "warm_start", s.warm_start),
        force_fraction: r.flag(solver, "force_fraction", s.force_fraction),
        fraction_tol: r.float(solver, "fraction_tol", s.fraction_tol, Check::Positive),
        experimental_height: r.flag(solver, "experimental_height", s.experimental_height),
    };

    let dir = r.string(output, "dir").map_or(d.output.dir.clone(), |(s, _)| PathBuf::from(s));
    let stride = r.count(output, "stride", d.output.stride, 1);
    let formats = match r.value(output, "formats") {
        None => d.output.formats.clone(),
        Some((Value::Array(items), span)) => {
            let mut set = BTreeSet::new();
            for item in items.iter() {
                match item.as_str() {
                    Some("csv") => {
                        set.insert(Format::Csv);
                    }
                    Some("vtk") => {
                        set.insert(Format::Vtk);
                    }
                    _ => r.push(
                        item.span().or(span.clone()),
                        format!("formats entries must be \"csv\" or \"vtk\", got {}", item.to_string().trim()),
                    ),
                }
            }
            set
        }
        Some((_, span)) => {
            r.push(span, "formats must be a list such as [\"csv\", \"vtk\"]".into());
            d.output.formats.clone()
        }
    };

    if r.errors.is_empty() {
        Ok(RunConfig {
            domain: domain_cfg,
            motion: motion_cfg,
            material: material_cfg,
            time: time_cfg,
            solver: solver_cfg,
            output: OutputConfig { dir, stride, formats },
        })
    } else {
        r.errors.sort_by_key(|e| e.line.unwrap_or(usize::MAX));
        Err(ConfigErrors(r.errors))
    }
}

fn quote(s: &str) -> String {
    Value::from(s).to_string().trim().to_string()
}

fn number(x: f64) -> String {
    format!("{x:?}")
}

fn expr_value(x: &Expr) -> String {
    match x {
        Expr::Num(v) => number(*v),
        other => quote(&other.to_string()),
    }
}

impl RunConfig {
    /// Canonical form with every key spelled out. Parsing the result gives
    /// back an equal configuration.
    pub fn normalized(&self) -> String {
        let mut o = String::new();
        let dm = &self.domain;
        let _ = writeln!(o, "[domain]");
        let _ = writeln!(o, "length = {}", number(dm.length));
        let _ = writeln!(o, "nx = {}", dm.nx);
        let _ = writeln!(o, "ny = {}", dm.ny);
        let _ = writeln!(o, "h_floor = {}", number(dm.h_floor));
        let h0 = match &dm.h0 {
            HeightSpec::Expr(x) => expr_value(x),
            HeightSpec::Table(p) => quote(&format!("table:{}", p.display())),
        };
        let _ = writeln!(o, "h0 = {h0}");
        let lateral = match dm.lateral {
            Lateral::Clamped => "clamped",
            Lateral::Free => "free",
        };
        let _ = writeln!(o, "lateral = {}", quote(lateral));

        let mo = &self.motion;
        let _ = writeln!(o, "\n[motion]");
        let mode = match mo.mode {
            MotionMode::Graph => "graph",
            MotionMode::LinearField => "linear_field",
        };
        let _ = writeln!(o, "mode = {}", quote(mode));
        let _ = writeln!(o, "h = {}", expr_value(&mo.h));
        let _ = writeln!(o, "nu1 = {}", expr_value(&mo.nu1));
        let _ = writeln!(o, "nu2 = {}", expr_value(&mo.nu2));
        let _ = writeln!(o, "horizon = {}", number(mo.horizon));

        let m = &self.material;
        let _ = writeln!(o, "\n[material]");
        for (k, v) in [
            ("lambda", m.lambda),
            ("mu", m.mu),
            ("k_h", m.k_h),
            ("pi", m.pi),
            ("xi_inf", m.xi_inf),
            ("k_s", m.k_s),
            ("g_s", m.g_s),
            ("k_c", m.k_c),
            ("g_c", m.g_c),
            ("monod_k_s", m.monod_k_s),
            ("monod_k_c", m.monod_k_c),
            ("d", m.d),
            ("c0", m.c0),
        ] {
            let _ = writeln!(o, "{k} = {}", number(v));
        }
        let _ = writeln!(o, "p_ext = {}", expr_value(&m.p_ext));
        let _ = writeln!(o, "pi_ext = {}", expr_value(&m.pi_ext));
        let _ = writeln!(o, "monod = {}", quote(if m.monod_live { "live" } else { "frozen" }));
        let _ = writeln!(o, "pressure = {}", quote(if m.osmotic { "osmotic" } else { "standard" }));
        let traction = match m.traction {
            TractionKind::Exterior => "exterior",
            TractionKind::Field => "field",
        };
        let _ = writeln!(o, "traction = {}", quote(traction));
        let _ = writeln!(o, "g1 = {}", expr_value(&m.g1));
        let _ = writeln!(o, "g2 = {}", expr_value(&m.g2));
        let _ = writeln!(o, "e_ext = {}", expr_value(&m.e_ext));
        let _ = writeln!(o, "e0 = {}", number(m.e0));

        let t = &self.time;
        let _ = writeln!(o, "\n[time]");
        let _ = writeln!(o, "t_end = {}", number(t.t_end));
        let _ = writeln!(o, "dt = {}", number(t.dt));
        let _ = writeln!(o, "theta = {}", number(t.theta));
        let _ = writeln!(o, "substeps = {}", t.substeps);

        let s = &self.solver;
        let _ = writeln!(o, "\n[solver]");
        let _ = writeln!(o, "max_iters = {}", s.max_iters);
        let _ = writeln!(o, "rel_tol = {}", number(s.rel_tol));
        let _ = writeln!(o, "relaxation = {}", number(s.relaxation));
        let _ = writeln!(o, "phi_inf = {}", number(s.phi_inf));
        let variant = match s.variant {
            Variant::Consistent => "consistent",
            Variant::AsPublished => "as_published",
        };
        let _ = writeln!(o, "variant = {}", quote(variant));
        let rate = match s.rate_boundary {
            RateBoundaryKind::Exterior => "exterior",
            RateBoundaryKind::Transported => "transported",
        };
        let _ = writeln!(o, "rate_boundary = {}", quote(rate));
        let _ = writeln!(o, "warm_start = {}", s.warm_start);
        let _ = writeln!(o, "force_fraction = {}", s.force_fraction);
        let _ = writeln!(o, "fraction_tol = {}", number(s.fraction_tol));
        let _ = writeln!(o, "experimental_height = {}", s.experimental_height);

        let out = &self.output;
        let _ = writeln!(o, "\n[output]");
        let _ = writeln!(o, "dir = {}", quote(&out.dir.display().to_string()));
        let _ = writeln!(o, "stride = {}", out.stride);
        let formats: Vec<_> = out
            .formats
            .iter()
            .map(|f| {
                quote(match f {
                    Format::Csv => "csv",
                    Format::Vtk => "vtk",
                })
            })
            .collect();
        let _ = writeln!(o, "formats = [{}]", formats.join(", "));
        o
    }

    /// Slab times `0, dt, 2 dt, ...` up to `until` (inclusive, with a small
    /// allowance for roundoff).
    pub fn slab_times(&self, until: f64) -> Vec<f64> {
        let n = (until / self.time.dt + 1e-9).floor() as usize;
        (0..=n).map(|k| k as f64 * self.time.dt).collect()
    }
}
