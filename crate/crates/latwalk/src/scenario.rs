//! Scenario files. A scenario is a TOML document:
//!
//! ```toml
//! name = "two_slit"
//! model = "Mstar"          # M | Mstar | Mstarstar
//! n_p = 50000
//! n_t = 500
//! seed = 1
//!
//! [source]
//! kind = "two_slit"
//! d = 1
//! p = [0.5, 0.5]
//!
//! [force]                  # optional
//! kind = "harmonic"
//! omega = 0.005
//!
//! [constraint]             # optional
//! kind = "box"
//! a = 10
//! ```
//!
//! Entanglement runs replace `[source]` with a `[chsh]` table.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::accelerated::QInit;
use crate::entangle::BranchModel;
use crate::error::{Error, Result};
use crate::forces::{Constraint, ForceField};
use crate::sources::{Family, DEFAULT_PRUNE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    /// Full lattice model.
    M,
    /// Trained walk.
    Mstar,
    /// Expected values.
    Mstarstar,
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "M" => Ok(ModelKind::M),
            "Mstar" => Ok(ModelKind::Mstar),
            "Mstarstar" => Ok(ModelKind::Mstarstar),
            _ => Err(Error::Config {
                key: "model".into(),
                msg: format!("unknown model {s:?}, expected M, Mstar or Mstarstar"),
            }),
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ModelKind::M => "M",
            ModelKind::Mstar => "Mstar",
            ModelKind::Mstarstar => "Mstarstar",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ForceSpec {
    #[default]
    None,
    Constant {
        phi: f64,
    },
    Harmonic {
        omega: f64,
    },
    /// Rectangular surrogate of a Delta barrier at the origin.
    Delta {
        lambda: f64,
        #[serde(default = "default_width")]
        width: i64,
    },
}

fn default_width() -> i64 {
    15
}

impl ForceSpec {
    pub fn field(&self) -> ForceField {
        match *self {
            ForceSpec::None => ForceField::None,
            ForceSpec::Constant { phi } => ForceField::Constant { phi },
            ForceSpec::Harmonic { omega } => ForceField::Harmonic { omega },
            ForceSpec::Delta { lambda, width } => ForceField::Rectangular { lambda, width },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConstraintSpec {
    Box { a: i64 },
    Line { a1: f64, a2: f64, a0: f64 },
    Ring { r: i64 },
    Sphere { r: i64 },
}

impl ConstraintSpec {
    pub fn constraint(&self) -> Constraint {
        match *self {
            ConstraintSpec::Box { a } => Constraint::Box { a },
            ConstraintSpec::Line { a1, a2, a0 } => Constraint::Line { a1, a2, a0 },
            ConstraintSpec::Ring { r } => Constraint::Ring { r },
            ConstraintSpec::Sphere { r } => Constraint::Sphere { r },
        }
    }
}

/// Two-slit entanglement experiment. Angles are in radians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChshSpec {
    #[serde(default = "one_i64")]
    pub d: i64,
    #[serde(default)]
    pub window: i64,
    /// Settings of branch I swept at fixed `beta`.
    #[serde(default)]
    pub alphas: Vec<f64>,
    #[serde(default)]
    pub beta: f64,
    /// CHSH angles; each needs runs at `theta` and `3 theta` with `beta = 0`.
    #[serde(default)]
    pub thetas: Vec<f64>,
}

fn one_i64() -> i64 {
    1
}

fn one_u64() -> u64 {
    1
}

fn yes() -> bool {
    true
}

fn default_prune() -> f64 {
    DEFAULT_PRUNE
}

fn default_bins() -> usize {
    201
}

fn default_cells() -> usize {
    50_000_000
}

fn default_bosons() -> usize {
    64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub model: ModelKind,
    pub n_p: u64,
    pub n_t: u64,
    #[serde(default = "one_u64")]
    pub seed: u64,
    /// Independent lattices for model M; emissions are split evenly.
    #[serde(default = "one_u64")]
    pub replicas: u64,
    #[serde(default = "default_prune")]
    pub prune: f64,
    /// Lag of the trained code; defaults to `n_t`.
    #[serde(default)]
    pub n_tau: Option<f64>,
    #[serde(default)]
    pub q_init: QInit,
    /// With `false`, particles keep their source momentum.
    #[serde(default = "yes")]
    pub quantum_forces: bool,
    #[serde(default = "default_bins")]
    pub momentum_bins: usize,
    #[serde(default = "default_cells")]
    pub cell_cap: usize,
    #[serde(default = "default_bosons")]
    pub boson_cap: usize,
    #[serde(default)]
    pub source: Option<Family>,
    #[serde(default)]
    pub force: ForceSpec,
    #[serde(default)]
    pub constraint: Option<ConstraintSpec>,
    #[serde(default)]
    pub chsh: Option<ChshSpec>,
}

fn config(key: &str, msg: impl Into<String>) -> Error {
    Error::Config {
        key: key.into(),
        msg: msg.into(),
    }
}

/// Best guess at the key a TOML error is about: the field named in a
/// missing/unknown-field message, else the left-hand side of the offending
/// line.
fn error_key(src: &str, e: &toml::de::Error) -> String {
    let msg = e.message();
    if msg.starts_with("missing field") || msg.starts_with("unknown field") {
        if let Some((_, rest)) = msg.split_once('`') {
            if let Some((k, _)) = rest.split_once('`') {
                return k.to_string();
            }
        }
    }
    if let Some(span) = e.span() {
        let start = span.start.min(src.len());
        let line_start = src.get(..start).and_then(|h| h.rfind('\n')).map_or(0, |i| i + 1);
        let line = src.get(line_start..).and_then(|t| t.lines().next()).unwrap_or("");
        if let Some((k, _)) = line.split_once('=') {
            return k.trim().to_string();
        }
        if let Some(t) = line.trim().strip_prefix('[') {
            return t.trim_end_matches(']').to_string();
        }
    }
    "<document>".into()
}

/// Parse and validate a scenario.
pub fn parse(src: &str) -> Result<ScenarioSpec> {
    let spec: ScenarioSpec = toml::from_str(src).map_err(|e| config(&error_key(src, &e), e.message().to_string()))?;
    spec.validate()?;
    Ok(spec)
}

impl ScenarioSpec {
    pub fn dims(&self) -> usize {
        self.source.as_ref().map(Family::dims).unwrap_or(1)
    }

    pub fn n_tau(&self) -> f64 {
        self.n_tau.unwrap_or(self.n_t as f64)
    }

    pub fn branch_model(&self) -> BranchModel {
        match self.model {
            ModelKind::M => BranchModel::Lattice,
            ModelKind::Mstar => BranchModel::Trained {
                n_tau: self.n_tau(),
                init: self.q_init,
            },
            ModelKind::Mstarstar => BranchModel::Expected,
        }
    }

    /// Short content hash over the canonical serialization.
    pub fn hash(&self) -> String {
        let canonical = toml::to_string(self).unwrap_or_else(|_| format!("{self:?}"));
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(config("name", "must not be empty"));
        }
        if self.n_p == 0 {
            return Err(config("n_p", "must be at least 1"));
        }
        if self.n_t == 0 {
            return Err(config("n_t", "must be at least 1"));
        }
        if self.replicas == 0 || self.replicas > self.n_p {
            return Err(config("replicas", "must lie between 1 and n_p"));
        }
        if !(self.prune >= 0.0 && self.prune < 1.0) {
            return Err(config("prune", "must lie in [0, 1)"));
        }
        if !(self.n_tau() >= 1.0) {
            return Err(config("n_tau", "must be at least 1"));
        }
        if self.momentum_bins < 2 {
            return Err(config("momentum_bins", "need at least 2 bins"));
        }
        match (&self.source, &self.chsh) {
            (None, None) => return Err(config("source", "missing; give [source] or [chsh]")),
            (Some(_), Some(_)) => return Err(config("chsh", "cannot be combined with [source]")),
            (None, Some(c)) => return self.validate_chsh(c),
            (Some(_), None) => {}
        }
        let dims = self.dims();
        if dims > 3 {
            return Err(config("source", "at most 3 dimensions"));
        }
        if self.model == ModelKind::M && dims > 2 {
            return Err(config(
                "model",
                "model M is limited to 2 dimensions at the default memory caps",
            ));
        }
        if self.model == ModelKind::M && !self.quantum_forces {
            return Err(config("quantum_forces", "model M always exchanges bosons"));
        }
        match self.force {
            ForceSpec::Harmonic { omega } if !(omega > 0.0) => {
                return Err(config("force.omega", "must be positive"));
            }
            ForceSpec::Delta { lambda, width } => {
                if !(lambda >= 0.0) {
                    return Err(config("force.lambda", "must be non-negative"));
                }
                if width <= 0 {
                    return Err(config("force.width", "must be positive"));
                }
                if self.model == ModelKind::Mstarstar {
                    return Err(config("force", "the expected-value code needs a quadratic potential"));
                }
                if dims != 1 {
                    return Err(config("force", "the Delta barrier is one-dimensional"));
                }
            }
            _ => {}
        }
        if let Some(c) = &self.constraint {
            match *c {
                ConstraintSpec::Box { a } => {
                    if a <= 0 {
                        return Err(config("constraint.a", "must be positive"));
                    }
                    if dims != 1 {
                        return Err(config("constraint", "the box is one-dimensional"));
                    }
                }
                ConstraintSpec::Line { a1, a2, .. } => {
                    if dims != 2 || self.model != ModelKind::M {
                        return Err(config("constraint", "line walls need a 2-d source and model M"));
                    }
                    if a1 == 0.0 && a2 == 0.0 {
                        return Err(config("constraint.a1", "line coefficients are both zero"));
                    }
                }
                ConstraintSpec::Ring { r } | ConstraintSpec::Sphere { r } => {
                    if r <= 0 {
                        return Err(config("constraint.r", "must be positive"));
                    }
                    if self.model != ModelKind::Mstarstar {
                        return Err(config("model", "rings and spheres run under Mstarstar"));
                    }
                }
            }
            if !matches!(self.force, ForceSpec::None) && !matches!(c, ConstraintSpec::Box { .. }) {
                return Err(config("force", "forces combine only with the box"));
            }
        }
        if self.model == ModelKind::Mstarstar && dims > 1 && !matches!(self.force, ForceSpec::None) {
            return Err(config("force", "multi-dimensional expected values are free only"));
        }
        if self.model == ModelKind::Mstar && dims > 1 && self.constraint.is_some() {
            return Err(config(
                "constraint",
                "multi-dimensional trained walks are unconstrained",
            ));
        }
        Ok(())
    }

    fn validate_chsh(&self, c: &ChshSpec) -> Result<()> {
        if c.d <= 0 {
            return Err(config("chsh.d", "must be positive"));
        }
        let xp = (self.n_t as f64 / (4.0 * c.d as f64)).round() as i64;
        if xp == 0 {
            return Err(config("n_t", "too short for detectors at ±t/(4D)"));
        }
        if c.window < 0 || c.window >= xp {
            return Err(config("chsh.window", format!("must lie in [0, {xp})")));
        }
        if c.alphas.is_empty() && c.thetas.is_empty() {
            return Err(config("chsh.alphas", "give at least one of alphas or thetas"));
        }
        if !matches!(self.force, ForceSpec::None) || self.constraint.is_some() {
            return Err(config("force", "the interferometer is force free"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_SLIT: &str = r#"
name = "two_slit"
model = "Mstar"
n_p = 50000
n_t = 500

[source]
kind = "two_slit"
d = 1
p = [0.5, 0.5]
"#;

    fn key_of(src: &str) -> String {
        match parse(src) {
            Err(Error::Config { key, .. }) => key,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn parses_with_defaults() {
        let s = parse(TWO_SLIT).unwrap();
        assert_eq!(s.model, ModelKind::Mstar);
        assert_eq!(s.seed, 1);
        assert_eq!(s.n_tau(), 500.0);
        assert_eq!(s.q_init, QInit::Trained);
        assert_eq!(s.force, ForceSpec::None);
        assert_eq!(s.source, Some(Family::TwoSlit { d: 1, p: [0.5, 0.5] }));
        assert_eq!(s.hash().len(), 16);
        assert_eq!(s.hash(), parse(TWO_SLIT).unwrap().hash());
        let mut t = s.clone();
        t.seed = 2;
        assert_ne!(s.hash(), t.hash());
    }

    #[test]
    fn errors_name_the_key() {
        assert_eq!(key_of(&TWO_SLIT.replace("n_p = 50000", "n_p = 0")), "n_p");
        assert_eq!(key_of(&TWO_SLIT.replace("n_p = 50000", "")), "n_p");
        assert_eq!(key_of(&TWO_SLIT.replace("n_t = 500", "n_t = \"long\"")), "n_t");
        assert_eq!(key_of(&TWO_SLIT.replace("model = \"Mstar\"", "model = \"Q\"")), "model");
        assert_eq!(key_of(&format!("{TWO_SLIT}\nbogus = 1\n")), "bogus");
        let ring = TWO_SLIT.replace("[source]", "[constraint]\nkind = \"ring\"\nr = 10\n\n[source]");
        assert_eq!(key_of(&ring), "model");
        assert_eq!(key_of("name = "), "name");
    }

    #[test]
    fn chsh_scenarios() {
        let src = r#"
name = "chsh"
model = "Mstarstar"
n_p = 1000
n_t = 100

[chsh]
window = 2
thetas = [0.7853981633974483]
"#;
        let s = parse(src).unwrap();
        assert_eq!(s.branch_model(), BranchModel::Expected);
        assert_eq!(key_of(&src.replace("window = 2", "window = 25")), "chsh.window");
        assert_eq!(key_of(&src.replace("thetas = [0.7853981633974483]", "")), "chsh.alphas");
    }

    #[test]
    fn model_names_round_trip() {
        for m in [ModelKind::M, ModelKind::Mstar, ModelKind::Mstarstar] {
            assert_eq!(m.to_string().parse::<ModelKind>().unwrap(), m);
        }
        assert!("m".parse::<ModelKind>().is_err());
    }
}
