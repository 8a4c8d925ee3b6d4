//! Network data model and the JSON file schema.
//!
//! A network is a directed graph of hyperbolic equilibria together with the
//! full eigenvalue table of the Jacobian at each equilibrium. In `Ac` mode
//! every equilibrium sits on its own coordinate axis and all roles (radial,
//! contracting, expanding, transverse) are derived from the graph. In
//! `Extended` mode the file declares roles explicitly, which admits
//! equilibria away from the axes; the classifier refuses such networks but
//! the stability analyzer accepts them.

use serde::Deserialize;
use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

/// An equilibrium on the coordinate axis `axis` at `x_axis = position`.
#[derive(Debug, Clone, PartialEq)]
pub struct Equilibrium {
    pub id: usize,
    pub axis: usize,
    /// Coordinate value on the axis. Only the realizer and simulator use it.
    pub position: f64,
}

/// A full set of connecting trajectories `from -> to`, contained in the
/// flow-invariant subspace spanned by the listed coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Connection {
    pub from: usize,
    pub to: usize,
    /// Dimension of the connection: 1, or 2 for the short edge of a Δ-clique.
    pub dim: usize,
    /// Coordinate indices (1-based) spanning the minimal invariant subspace.
    pub subspace: BTreeSet<usize>,
}

impl Connection {
    pub fn key(&self) -> (usize, usize) {
        (self.from, self.to)
    }
}

/// Eigenvalue/eigenvector role declaration for one equilibrium
/// (`Extended` mode only).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Roles {
    pub radial: BTreeSet<usize>,
    pub contracting: BTreeSet<usize>,
    pub expanding: BTreeSet<usize>,
    pub transverse: BTreeSet<usize>,
    /// Declared Δ-clique memberships of the node as an m-point: the
    /// coordinate carrying the f-long vector and the one carrying the
    /// s-long vector.
    pub cliques: Vec<MPointDecl>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MPointDecl {
    pub f_long: usize,
    pub s_long: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Ac,
    Extended,
}

#[derive(Debug, Clone)]
pub struct Network {
    pub n: usize,
    pub equilibria: Vec<Equilibrium>,
    /// `lambda[&id][k-1]` is the eigenvalue of `df(ξ_id)` along `e_k`.
    pub lambda: BTreeMap<usize, Vec<f64>>,
    pub connections: Vec<Connection>,
    pub mode: Mode,
    pub roles: BTreeMap<usize, Roles>,
}

// ---------------------------------------------------------------------------
// File schema

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkFile {
    n: usize,
    equilibria: Vec<EquilibriumFile>,
    eigenvalues: BTreeMap<String, Vec<f64>>,
    connections: Vec<ConnectionFile>,
    #[serde(default)]
    roles: Option<BTreeMap<String, RolesFile>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EquilibriumFile {
    id: usize,
    axis: usize,
    #[serde(default)]
    position: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConnectionFile {
    from: usize,
    to: usize,
    dim: usize,
    subspace: Vec<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RolesFile {
    radial: Vec<usize>,
    contracting: Vec<usize>,
    expanding: Vec<usize>,
    transverse: Vec<usize>,
    #[serde(default)]
    cliques: Vec<CliqueFile>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CliqueFile {
    f_long: usize,
    s_long: usize,
}

/// Loads and validates a network file.
pub fn load_network(path: impl AsRef<Path>) -> Result<Network, ModelError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ModelError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_network(&text)
}

/// Parses a network from JSON text. See the README for the schema.
pub fn parse_network(text: &str) -> Result<Network, ModelError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| ModelError::Parse(e.to_string()))?;
    let file: NetworkFile =
        serde_json::from_value(value).map_err(|e| ModelError::Schema(e.to_string()))?;

    let equilibria = file
        .equilibria
        .iter()
        .map(|e| Equilibrium {
            id: e.id,
            axis: e.axis,
            position: e.position.unwrap_or(1.0),
        })
        .collect::<Vec<_>>();

    let mut lambda = BTreeMap::new();
    for (key, row) in &file.eigenvalues {
        let id: usize = key
            .parse()
            .map_err(|_| ModelError::Schema(format!("eigenvalue key {key:?} is not an id")))?;
        lambda.insert(id, row.clone());
    }

    let connections = file
        .connections
        .iter()
        .map(|c| Connection {
            from: c.from,
            to: c.to,
            dim: c.dim,
            subspace: c.subspace.iter().copied().collect(),
        })
        .collect::<Vec<_>>();

    let mut roles = BTreeMap::new();
    if let Some(role_map) = &file.roles {
        for (key, r) in role_map {
            let id: usize = key
                .parse()
                .map_err(|_| ModelError::Schema(format!("roles key {key:?} is not an id")))?;
            roles.insert(
                id,
                Roles {
                    radial: r.radial.iter().copied().collect(),
                    contracting: r.contracting.iter().copied().collect(),
                    expanding: r.expanding.iter().copied().collect(),
                    transverse: r.transverse.iter().copied().collect(),
                    cliques: r
                        .cliques
                        .iter()
                        .map(|c| MPointDecl {
                            f_long: c.f_long,
                            s_long: c.s_long,
                        })
                        .collect(),
                },
            );
        }
    }

    let mode = if roles.is_empty() {
        Mode::Ac
    } else {
        Mode::Extended
    };
    Network::assemble(file.n, equilibria, lambda, connections, mode, roles)
}

impl Network {
    /// Builds a network from parts, checking every type invariant.
    pub fn assemble(
        n: usize,
        equilibria: Vec<Equilibrium>,
        lambda: BTreeMap<usize, Vec<f64>>,
        connections: Vec<Connection>,
        mode: Mode,
        roles: BTreeMap<usize, Roles>,
    ) -> Result<Network, ModelError> {
        let net = Network {
            n,
            equilibria,
            lambda,
            connections,
            mode,
            roles,
        };
        net.validate()?;
        Ok(net)
    }

    fn validate(&self) -> Result<(), ModelError> {
        if self.n == 0 {
            return Err(ModelError::Invariant("ambient dimension n = 0".into()));
        }
        if self.equilibria.is_empty() {
            return Err(ModelError::Invariant("no equilibria".into()));
        }

        let mut ids = BTreeSet::new();
        let mut axes = BTreeMap::new();
        for e in &self.equilibria {
            if !ids.insert(e.id) {
                return Err(ModelError::Invariant(format!("duplicate id {}", e.id)));
            }
            if e.axis == 0 || e.axis > self.n {
                return Err(ModelError::Invariant(format!(
                    "equilibrium {} lies on axis {} outside 1..{}",
                    e.id, e.axis, self.n
                )));
            }
            if let Some(prev) = axes.insert(e.axis, e.id) {
                if self.mode == Mode::Ac {
                    return Err(ModelError::Invariant(format!(
                        "equilibria {} and {} share axis {}",
                        prev, e.id, e.axis
                    )));
                }
            }
            if e.position <= 0.0 {
                return Err(ModelError::Invariant(format!(
                    "equilibrium {} has non-positive position",
                    e.id
                )));
            }
        }

        let lambda_ids: BTreeSet<usize> = self.lambda.keys().copied().collect();
        if lambda_ids != ids {
            return Err(ModelError::Schema(format!(
                "eigenvalue table ids {lambda_ids:?} do not match equilibrium ids {ids:?}"
            )));
        }
        for (id, row) in &self.lambda {
            if row.len() != self.n {
                return Err(ModelError::Schema(format!(
                    "eigenvalue row of {} has {} entries, expected {}",
                    id,
                    row.len(),
                    self.n
                )));
            }
            if row.iter().any(|v| *v == 0.0 || !v.is_finite()) {
                return Err(ModelError::Invariant(format!(
                    "eigenvalues of {id} must be finite and nonzero (hyperbolicity)"
                )));
            }
        }

        if self.mode == Mode::Ac {
            for e in &self.equilibria {
                let row = &self.lambda[&e.id];
                if row[e.axis - 1] >= 0.0 {
                    return Err(ModelError::Invariant(format!(
                        "radial eigenvalue of {} along axis {} is not negative",
                        e.id, e.axis
                    )));
                }
                let positives = row.iter().filter(|v| **v > 0.0).count();
                if !(1..=2).contains(&positives) {
                    return Err(ModelError::Invariant(format!(
                        "equilibrium {} has {} positive eigenvalues; the unstable \
                         manifold must have dimension 1 or 2",
                        e.id, positives
                    )));
                }
            }
        }

        let mut seen = BTreeSet::new();
        for c in &self.connections {
            if c.from == c.to {
                return Err(ModelError::Invariant(format!(
                    "homoclinic connection at {}",
                    c.from
                )));
            }
            if !ids.contains(&c.from) || !ids.contains(&c.to) {
                return Err(ModelError::Invariant(format!(
                    "connection {} -> {} references unknown equilibria",
                    c.from, c.to
                )));
            }
            if !seen.insert((c.from, c.to)) {
                return Err(ModelError::Invariant(format!(
                    "duplicate connection {} -> {}",
                    c.from, c.to
                )));
            }
            if !(1..=2).contains(&c.dim) {
                return Err(ModelError::Invariant(format!(
                    "connection {} -> {} has dim {}, expected 1 or 2",
                    c.from, c.to, c.dim
                )));
            }
            if c.subspace.iter().any(|k| *k == 0 || *k > self.n) {
                return Err(ModelError::Invariant(format!(
                    "connection {} -> {} subspace leaves 1..{}",
                    c.from, c.to, self.n
                )));
            }
        }
        for c in &self.connections {
            if seen.contains(&(c.to, c.from)) {
                return Err(ModelError::Invariant(format!(
                    "two-equilibrium cycle between {} and {}",
                    c.from, c.to
                )));
            }
        }
        for c in &self.connections {
            if self.mode == Mode::Ac {
                let fa = self.axis_of(c.from);
                let ta = self.axis_of(c.to);
                if !c.subspace.contains(&fa) || !c.subspace.contains(&ta) {
                    return Err(ModelError::Invariant(format!(
                        "subspace of {} -> {} misses an endpoint axis",
                        c.from, c.to
                    )));
                }
                if c.subspace.len() != c.dim + 1 {
                    return Err(ModelError::Invariant(format!(
                        "connection {} -> {}: |subspace| = {} but dim + 1 = {}",
                        c.from,
                        c.to,
                        c.subspace.len(),
                        c.dim + 1
                    )));
                }
                if self.lambda[&c.from][ta - 1] <= 0.0 {
                    return Err(ModelError::Invariant(format!(
                        "connection {} -> {}: λ_({},{}) is not expanding",
                        c.from, c.to, c.from, ta
                    )));
                }
                if self.lambda[&c.to][fa - 1] >= 0.0 {
                    return Err(ModelError::Invariant(format!(
                        "connection {} -> {}: λ_({},{}) is not contracting",
                        c.from, c.to, c.to, fa
                    )));
                }
            }
        }

        // Connected as an undirected graph.
        if !self.is_connected() {
            return Err(ModelError::Invariant(
                "network graph is not connected".into(),
            ));
        }

        if self.mode == Mode::Extended {
            let role_ids: BTreeSet<usize> = self.roles.keys().copied().collect();
            if role_ids != ids {
                return Err(ModelError::Schema(format!(
                    "roles declared for {role_ids:?} but equilibria are {ids:?}"
                )));
            }
            for (id, r) in &self.roles {
                let mut all = BTreeSet::new();
                let mut total = 0usize;
                for set in [&r.radial, &r.contracting, &r.expanding, &r.transverse] {
                    total += set.len();
                    all.extend(set.iter().copied());
                }
                let full: BTreeSet<usize> = (1..=self.n).collect();
                if all != full || total != self.n {
                    return Err(ModelError::Invariant(format!(
                        "roles of {id} do not partition 1..{}",
                        self.n
                    )));
                }
                let row = &self.lambda[id];
                for k in &r.expanding {
                    if row[*k - 1] <= 0.0 {
                        return Err(ModelError::Invariant(format!(
                            "{id}: declared expanding direction {k} has λ ≤ 0"
                        )));
                    }
                }
                for k in r.contracting.iter().chain(&r.transverse) {
                    if row[*k - 1] >= 0.0 {
                        return Err(ModelError::Invariant(format!(
                            "{id}: declared contracting/transverse direction {k} has λ ≥ 0"
                        )));
                    }
                }
                for cl in &r.cliques {
                    if !r.contracting.contains(&cl.f_long) {
                        return Err(ModelError::Invariant(format!(
                            "{id}: clique f-long vector {} is not contracting",
                            cl.f_long
                        )));
                    }
                    if !r.expanding.contains(&cl.s_long) {
                        return Err(ModelError::Invariant(format!(
                            "{id}: clique s-long vector {} is not expanding",
                            cl.s_long
                        )));
                    }
                }
            }
        }

        Ok(())
    }

    fn is_connected(&self) -> bool {
        let ids: Vec<usize> = self.equilibria.iter().map(|e| e.id).collect();
        let mut reached = BTreeSet::new();
        let mut stack = vec![ids[0]];
        while let Some(v) = stack.pop() {
            if !reached.insert(v) {
                continue;
            }
            for c in &self.connections {
                if c.from == v && !reached.contains(&c.to) {
                    stack.push(c.to);
                }
                if c.to == v && !reached.contains(&c.from) {
                    stack.push(c.from);
                }
            }
        }
        reached.len() == ids.len()
    }

    pub fn equilibrium(&self, id: usize) -> &Equilibrium {
        self.equilibria
            .iter()
            .find(|e| e.id == id)
            .unwrap_or_else(|| panic!("no equilibrium {id}"))
    }

    pub fn axis_of(&self, id: usize) -> usize {
        self.equilibrium(id).axis
    }

    pub fn on_axis(&self, axis: usize) -> Option<&Equilibrium> {
        self.equilibria.iter().find(|e| e.axis == axis)
    }

    /// λ_{jk}: eigenvalue at equilibrium `id` along `e_k` (1-based `k`).
    pub fn lambda(&self, id: usize, k: usize) -> f64 {
        self.lambda[&id][k - 1]
    }

    pub fn connection(&self, from: usize, to: usize) -> Option<&Connection> {
        self.connections
            .iter()
            .find(|c| c.from == from && c.to == to)
    }

    pub fn out_edges(&self, id: usize) -> Vec<&Connection> {
        self.connections.iter().filter(|c| c.from == id).collect()
    }

    pub fn in_edges(&self, id: usize) -> Vec<&Connection> {
        self.connections.iter().filter(|c| c.to == id).collect()
    }

    /// Role sets at a node by coordinate index. Derived from the graph in
    /// `Ac` mode, declared in the file in `Extended` mode.
    pub fn roles_at(&self, id: usize) -> Roles {
        if let Some(r) = self.roles.get(&id) {
            return r.clone();
        }
        let axis = self.axis_of(id);
        let mut r = Roles {
            radial: [axis].into_iter().collect(),
            ..Roles::default()
        };
        for c in self.in_edges(id) {
            r.contracting.insert(self.axis_of(c.from));
        }
        for c in self.out_edges(id) {
            r.expanding.insert(self.axis_of(c.to));
        }
        for k in 1..=self.n {
            if k != axis && !r.contracting.contains(&k) && !r.expanding.contains(&k) {
                r.transverse.insert(k);
            }
        }
        r
    }

    /// Coordinates not in the connection subspace. The max-norm of a point
    /// restricted to this set is its distance to the subspace.
    pub fn complementary_subspace(&self, conn: &Connection) -> BTreeSet<usize> {
        (1..=self.n)
            .filter(|k| !conn.subspace.contains(k))
            .collect()
    }

    /// Canonical JSON rendering: sorted keys, equilibria by id, connections
    /// by (from, to). Loading the output reproduces it byte for byte.
    pub fn to_canonical_json(&self) -> String {
        use serde_json::{json, Map, Value};
        let mut eq: Vec<&Equilibrium> = self.equilibria.iter().collect();
        eq.sort_by_key(|e| e.id);
        let mut conns: Vec<&Connection> = self.connections.iter().collect();
        conns.sort_by_key(|c| (c.from, c.to));

        let mut root = Map::new();
        root.insert("n".into(), json!(self.n));
        root.insert(
            "equilibria".into(),
            Value::Array(
                eq.iter()
                    .map(|e| json!({"id": e.id, "axis": e.axis, "position": e.position}))
                    .collect(),
            ),
        );
        let mut eig = Map::new();
        for (id, row) in &self.lambda {
            eig.insert(id.to_string(), json!(row));
        }
        root.insert("eigenvalues".into(), Value::Object(eig));
        root.insert(
            "connections".into(),
            Value::Array(
                conns
                    .iter()
                    .map(|c| {
                        json!({
                            "from": c.from,
                            "to": c.to,
                            "dim": c.dim,
                            "subspace": c.subspace.iter().collect::<Vec<_>>(),
                        })
                    })
                    .collect(),
            ),
        );
        if !self.roles.is_empty() {
            let mut roles = Map::new();
            for (id, r) in &self.roles {
                let mut obj = Map::new();
                obj.insert("radial".into(), json!(r.radial.iter().collect::<Vec<_>>()));
                obj.insert(
                    "contracting".into(),
                    json!(r.contracting.iter().collect::<Vec<_>>()),
                );
                obj.insert(
                    "expanding".into(),
                    json!(r.expanding.iter().collect::<Vec<_>>()),
                );
                obj.insert(
                    "transverse".into(),
                    json!(r.transverse.iter().collect::<Vec<_>>()),
                );
                if !r.cliques.is_empty() {
                    obj.insert(
                        "cliques".into(),
                        Value::Array(
                            r.cliques
                                .iter()
                                .map(|c| json!({"f_long": c.f_long, "s_long": c.s_long}))
                                .collect(),
                        ),
                    );
                }
                roles.insert(id.to_string(), Value::Object(obj));
            }
            root.insert("roles".into(), Value::Object(roles));
        }
        serde_json::to_string_pretty(&Value::Object(root)).expect("canonical json")
    }
}
