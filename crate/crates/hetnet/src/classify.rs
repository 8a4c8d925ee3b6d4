//! Validation of the axial-network axioms, Δ-clique detection and the
//! structural decomposition of the connection graph.
//!
//! A Δ-clique is a nontransitive triangle `b -> m -> e` with `b -> e`: the
//! two-dimensional unstable manifold of the b-point fans out between the
//! f-long connection `b -> m` and the short connection `b -> e`, with the
//! s-long connection `m -> e` closing the boundary.

use crate::graph;
use crate::model::{Mode, Network};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

/// Hard cap on enumerated cycles; axial graphs have out-degree at most two,
/// so this only guards pathological inputs.
pub const CYCLE_CAP: usize = 1_000_000;

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("the classifier only accepts networks in AC mode")]
    ExtendedRefused,
    #[error(
        "incomplete Δ-clique: {b} has two expanding directions toward {j} and {k} \
         but neither {j} -> {k} nor {k} -> {j} is present"
    )]
    IncompleteClique { b: usize, j: usize, k: usize },
    #[error("graph not representable by the structure theorem: {0}")]
    NotRepresentable(String),
    #[error(transparent)]
    CapExceeded(#[from] graph::CapExceeded),
    #[error("internal error: {0}")]
    Internal(String),
}

/// A labeled Δ-clique. Connections: f-long `b -> m`, s-long `m -> e`,
/// short `b -> e` (the two-dimensional one).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct DeltaClique {
    pub b: usize,
    pub m: usize,
    pub e: usize,
}

impl DeltaClique {
    pub fn f_long(&self) -> (usize, usize) {
        (self.b, self.m)
    }
    pub fn s_long(&self) -> (usize, usize) {
        (self.m, self.e)
    }
    pub fn short(&self) -> (usize, usize) {
        (self.b, self.e)
    }
}

impl fmt::Display for DeltaClique {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Δ({},{},{})", self.b, self.m, self.e)
    }
}

/// Detects all Δ-cliques of an axial network, sorted by (b, m, e).
///
/// Every node with two outgoing connections is a b-point; the edge between
/// the two targets decides which of them is the m-point.
pub fn find_delta_cliques(net: &Network) -> Result<Vec<DeltaClique>, ClassifyError> {
    if net.mode != Mode::Ac {
        return Err(ClassifyError::ExtendedRefused);
    }
    let (cliques, incomplete) = clique_scan(net);
    if let Some((b, j, k)) = incomplete.into_iter().next() {
        return Err(ClassifyError::IncompleteClique { b, j, k });
    }
    Ok(cliques)
}

fn clique_scan(net: &Network) -> (Vec<DeltaClique>, Vec<(usize, usize, usize)>) {
    let mut cliques = Vec::new();
    let mut incomplete = Vec::new();
    for eq in &net.equilibria {
        let outs = net.out_edges(eq.id);
        if outs.len() != 2 {
            continue;
        }
        let (j, k) = (outs[0].to.min(outs[1].to), outs[0].to.max(outs[1].to));
        if net.connection(j, k).is_some() {
            cliques.push(DeltaClique {
                b: eq.id,
                m: j,
                e: k,
            });
        } else if net.connection(k, j).is_some() {
            cliques.push(DeltaClique {
                b: eq.id,
                m: k,
                e: j,
            });
        } else {
            incomplete.push((eq.id, j, k));
        }
    }
    cliques.sort();
    (cliques, incomplete)
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// check_ac only applies to AC-mode networks.
    ExtendedMode,
    /// Unstable manifold dimension outside 1..=2.
    ExpandingCount { id: usize, count: usize },
    /// A positive eigenvalue with no matching outgoing connection: the
    /// unstable manifold leaves the network, so the network is not clean.
    UncontainedUnstable { id: usize, coord: usize },
    /// A node with two expanding directions whose Δ-clique does not close.
    IncompleteClique { b: usize, j: usize, k: usize },
    /// Declared connection dimension disagrees with the Δ-clique structure:
    /// an edge is two-dimensional exactly when it is the short connection
    /// of some clique.
    DimMismatch {
        from: usize,
        to: usize,
        declared: usize,
        derived: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ExtendedMode => {
                write!(f, "network declares explicit roles (extended mode)")
            }
            Violation::ExpandingCount { id, count } => write!(
                f,
                "equilibrium {id} has {count} expanding eigenvalues, expected 1 or 2"
            ),
            Violation::UncontainedUnstable { id, coord } => write!(
                f,
                "unstable direction {coord} at equilibrium {id} has no outgoing \
                 connection: the network is not clean"
            ),
            Violation::IncompleteClique { b, j, k } => write!(
                f,
                "equilibrium {b} expands toward {j} and {k} but no edge closes the Δ-clique"
            ),
            Violation::DimMismatch {
                from,
                to,
                declared,
                derived,
            } => write!(
                f,
                "connection {from} -> {to} declares dim {declared} but the clique \
                 structure forces dim {derived}"
            ),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AcReport {
    pub violations: Vec<Violation>,
}

impl AcReport {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the axial-and-clean axioms. Violations are data, not errors.
pub fn check_ac(net: &Network) -> AcReport {
    let mut violations = Vec::new();
    if net.mode != Mode::Ac {
        return AcReport {
            violations: vec![Violation::ExtendedMode],
        };
    }

    for eq in &net.equilibria {
        let row = &net.lambda[&eq.id];
        let positives: Vec<usize> = (1..=net.n).filter(|k| row[*k - 1] > 0.0).collect();
        if !(1..=2).contains(&positives.len()) {
            violations.push(Violation::ExpandingCount {
                id: eq.id,
                count: positives.len(),
            });
        }
        for k in positives {
            let target = net.on_axis(k);
            let covered = target
                .map(|t| net.connection(eq.id, t.id).is_some())
                .unwrap_or(false);
            if !covered {
                violations.push(Violation::UncontainedUnstable {
                    id: eq.id,
                    coord: k,
                });
            }
        }
    }

    let (cliques, incomplete) = clique_scan(net);
    for (b, j, k) in incomplete {
        violations.push(Violation::IncompleteClique { b, j, k });
    }
    let shorts: BTreeSet<(usize, usize)> = cliques.iter().map(|c| c.short()).collect();
    for c in &net.connections {
        let derived = if shorts.contains(&c.key()) { 2 } else { 1 };
        if c.dim != derived {
            violations.push(Violation::DimMismatch {
                from: c.from,
                to: c.to,
                declared: c.dim,
                derived,
            });
        }
    }

    AcReport { violations }
}

/// Maps equilibrium ids to dense vertex indices and back.
struct IdIndex {
    ids: Vec<usize>,
    index: BTreeMap<usize, usize>,
}

impl IdIndex {
    fn new(net: &Network) -> Self {
        let mut ids: Vec<usize> = net.equilibria.iter().map(|e| e.id).collect();
        ids.sort_unstable();
        let index = ids.iter().enumerate().map(|(i, id)| (*id, i)).collect();
        IdIndex { ids, index }
    }
}

/// All elementary cycles of the connection graph, canonically rotated and
/// sorted.
pub fn enumerate_cycles(net: &Network) -> Result<Vec<Vec<usize>>, ClassifyError> {
    let idx = IdIndex::new(net);
    let arcs: Vec<(usize, usize)> = net
        .connections
        .iter()
        .map(|c| (idx.index[&c.from], idx.index[&c.to]))
        .collect();
    let cycles = graph::elementary_cycles(idx.ids.len(), &arcs, CYCLE_CAP)?;
    Ok(cycles
        .into_iter()
        .map(|c| c.into_iter().map(|v| idx.ids[v]).collect())
        .collect())
}

/// Elementary cycles that use no f-long connection of any Δ-clique.
///
/// The structure theorem builds on such a cycle; the graph grammar admits
/// one of them, or two for the twin-cycle family.
pub fn find_flong_free_cycles(net: &Network) -> Result<Vec<Vec<usize>>, ClassifyError> {
    let cliques = find_delta_cliques(net)?;
    let f_longs: BTreeSet<(usize, usize)> = cliques.iter().map(|c| c.f_long()).collect();
    let free: Vec<Vec<usize>> = enumerate_cycles(net)?
        .into_iter()
        .filter(|cycle| {
            (0..cycle.len()).all(|i| {
                let edge = (cycle[i], cycle[(i + 1) % cycle.len()]);
                !f_longs.contains(&edge)
            })
        })
        .collect();
    if free.is_empty() {
        return Err(ClassifyError::Internal(
            "no f-long-free cycle found on a validated network".into(),
        ));
    }
    Ok(free)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OptionalPattern {
    /// Case I long edge `ξ_i -> ξ_{i+(J+1)/2}`.
    CaseILong,
    /// `[ξ_{j,m_j} -> ξ_{j+1,1}]`
    ToNextFirst,
    /// `[ξ_{j,m_j} -> ξ_{j+2,0}]`
    SkipToBase,
    /// `[ξ_{j,m_j} -> ξ_{j,0}]`
    BackToOwnBase,
    /// `[ξ_{j-1,m_{j-1}} -> ξ_{j,m_j}]`, only next to a BackToOwnBase edge.
    TailToNextTail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CaseKind {
    I,
    II,
}

#[derive(Debug, Clone, Serialize)]
pub struct OptionalConnection {
    pub from: usize,
    pub to: usize,
    pub pattern: OptionalPattern,
}

/// Decomposition of the graph per the structure theorem: a base cycle with
/// either the odd-cycle long-edge pattern (case I) or a grouping of the
/// remaining equilibria (case II).
#[derive(Debug, Clone, Serialize)]
pub struct StructureDecomposition {
    pub case: CaseKind,
    /// Base cycle `[ξ_{1,0}, ..., ξ_{J,0}]` in cycle order.
    pub base_cycle: Vec<usize>,
    /// `groups[j] = [ξ_{j,0}, ..., ξ_{j,m_j}]`, indexed like `base_cycle`.
    pub groups: Vec<Vec<usize>>,
    pub optional_connections: Vec<OptionalConnection>,
}

impl StructureDecomposition {
    pub fn j(&self) -> usize {
        self.base_cycle.len()
    }
}

/// Runs the constructive grouping for every f-long-free base cycle. The
/// first decomposition (canonical cycle order) is the primary one.
pub fn decompose_structure(net: &Network) -> Result<Vec<StructureDecomposition>, ClassifyError> {
    let bases = find_flong_free_cycles(net)?;
    bases
        .iter()
        .map(|base| decompose_with_base(net, base))
        .collect()
}

fn decompose_with_base(
    net: &Network,
    base: &[usize],
) -> Result<StructureDecomposition, ClassifyError> {
    let j_len = base.len();
    let pos: BTreeMap<usize, usize> = base.iter().enumerate().map(|(p, id)| (*id, p)).collect();

    // Connections between base nodes that are not base-successive switch the
    // construction to case I.
    let mut extras = Vec::new();
    for c in &net.connections {
        if let (Some(&pu), Some(&pv)) = (pos.get(&c.from), pos.get(&c.to)) {
            if (pu + 1) % j_len != pv {
                extras.push((c.from, c.to, pu, pv));
            }
        }
    }

    if !extras.is_empty() {
        if pos.len() != net.equilibria.len() {
            return Err(ClassifyError::NotRepresentable(
                "extra connections between base-cycle nodes coexist with \
                 equilibria outside the cycle"
                    .into(),
            ));
        }
        if j_len % 2 == 0 {
            return Err(ClassifyError::NotRepresentable(format!(
                "case I requires an odd base cycle, got J = {j_len}"
            )));
        }
        let hop = (j_len + 1) / 2;
        let mut long_edges = BTreeSet::new();
        for (u, v, pu, pv) in &extras {
            if (pu + hop) % j_len != *pv {
                return Err(ClassifyError::NotRepresentable(format!(
                    "edge {u} -> {v} is not a long edge of step (J+1)/2"
                )));
            }
            long_edges.insert((*u, *v));
        }
        if long_edges.len() != j_len {
            return Err(ClassifyError::NotRepresentable(format!(
                "case I needs all {j_len} long edges, found {}",
                long_edges.len()
            )));
        }
        return Ok(StructureDecomposition {
            case: CaseKind::I,
            base_cycle: base.to_vec(),
            groups: base.iter().map(|id| vec![*id]).collect(),
            optional_connections: long_edges
                .into_iter()
                .map(|(from, to)| OptionalConnection {
                    from,
                    to,
                    pattern: OptionalPattern::CaseILong,
                })
                .collect(),
        });
    }

    // Case II: grow the groups from the base cycle, moving tails between
    // neighbouring groups when a tail-to-previous-tail edge shows up.
    let mut groups: Vec<Vec<usize>> = base.iter().map(|id| vec![*id]).collect();
    let mut assigned: BTreeSet<usize> = base.iter().copied().collect();
    let total = net.equilibria.len();
    let mut rounds = 0usize;
    loop {
        rounds += 1;
        if rounds > total * total + 2 {
            return Err(ClassifyError::NotRepresentable(
                "grouping did not stabilise".into(),
            ));
        }
        let mut progress = false;

        // Extension: attach unassigned successors of group tails.
        let tails: Vec<usize> = groups.iter().map(|g| *g.last().unwrap()).collect();
        let mut pending: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (p, tail) in tails.iter().enumerate() {
            for c in net.out_edges(*tail) {
                if !assigned.contains(&c.to) {
                    pending.entry(c.to).or_default().push(p);
                }
            }
        }
        for (v, mut preds) in pending {
            preds.sort_unstable();
            preds.dedup();
            let p = match preds.len() {
                1 => preds[0],
                2 => {
                    // Two feeding tails must sit in consecutive groups; the
                    // node joins the later one.
                    let (a, b) = (preds[0], preds[1]);
                    if (a + 1) % j_len == b {
                        b
                    } else if (b + 1) % j_len == a {
                        a
                    } else {
                        return Err(ClassifyError::NotRepresentable(format!(
                            "equilibrium {v} is fed by non-adjacent groups"
                        )));
                    }
                }
                _ => {
                    return Err(ClassifyError::NotRepresentable(format!(
                        "equilibrium {v} is fed by {} group tails",
                        preds.len()
                    )))
                }
            };
            groups[p].push(v);
            assigned.insert(v);
            progress = true;
        }

        // Moves: an edge from the tail of group p to the tail of group p-1
        // (a non-base node) relocates that tail into group p.
        for p in 0..j_len {
            let prev = (p + j_len - 1) % j_len;
            let tail_p = *groups[p].last().unwrap();
            let tail_prev = *groups[prev].last().unwrap();
            if groups[prev].len() >= 2 && net.connection(tail_p, tail_prev).is_some() {
                groups[prev].pop();
                groups[p].push(tail_prev);
                progress = true;
            }
        }

        if assigned.len() == total && !has_pending_move(net, &groups) {
            break;
        }
        if !progress {
            break;
        }
    }

    if assigned.len() != total {
        let missing: Vec<usize> = net
            .equilibria
            .iter()
            .map(|e| e.id)
            .filter(|id| !assigned.contains(id))
            .collect();
        return Err(ClassifyError::NotRepresentable(format!(
            "equilibria {missing:?} could not be grouped"
        )));
    }

    let optional = verify_case_ii(net, base, &groups)?;
    Ok(StructureDecomposition {
        case: CaseKind::II,
        base_cycle: base.to_vec(),
        groups,
        optional_connections: optional,
    })
}

fn has_pending_move(net: &Network, groups: &[Vec<usize>]) -> bool {
    let j_len = groups.len();
    (0..j_len).any(|p| {
        let prev = (p + j_len - 1) % j_len;
        groups[prev].len() >= 2
            && net
                .connection(*groups[p].last().unwrap(), *groups[prev].last().unwrap())
                .is_some()
    })
}

/// Checks that the grouped graph is exactly the compulsory edge set plus
/// recognised optional edges, one optional per group tail.
fn verify_case_ii(
    net: &Network,
    base: &[usize],
    groups: &[Vec<usize>],
) -> Result<Vec<OptionalConnection>, ClassifyError> {
    let j_len = base.len();
    let mut place: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    for (p, g) in groups.iter().enumerate() {
        for (s, id) in g.iter().enumerate() {
            place.insert(*id, (p, s));
        }
    }

    // Compulsory edges must all be present.
    for (p, g) in groups.iter().enumerate() {
        let next_base = groups[(p + 1) % j_len][0];
        for (s, id) in g.iter().enumerate() {
            if net.connection(*id, next_base).is_none() {
                return Err(ClassifyError::NotRepresentable(format!(
                    "compulsory connection {id} -> {next_base} is missing"
                )));
            }
            if s + 1 < g.len() && net.connection(*id, g[s + 1]).is_none() {
                return Err(ClassifyError::NotRepresentable(format!(
                    "compulsory connection {id} -> {} is missing",
                    g[s + 1]
                )));
            }
        }
    }

    let mut optional = Vec::new();
    let mut tail_budget: BTreeMap<usize, usize> = BTreeMap::new();
    for c in &net.connections {
        let (pu, su) = place[&c.from];
        let (pv, sv) = place[&c.to];
        let m_u = groups[pu].len() - 1;
        let m_v = groups[pv].len() - 1;
        let compulsory = (pv == (pu + 1) % j_len && sv == 0) || (pv == pu && sv == su + 1);
        if compulsory {
            continue;
        }
        if su != m_u {
            return Err(ClassifyError::NotRepresentable(format!(
                "edge {} -> {} does not start at a group tail",
                c.from, c.to
            )));
        }
        let pattern = if pv == (pu + 1) % j_len && sv == 1 {
            OptionalPattern::ToNextFirst
        } else if pv == (pu + 2) % j_len && sv == 0 {
            OptionalPattern::SkipToBase
        } else if pv == pu && sv == 0 {
            OptionalPattern::BackToOwnBase
        } else if pv == (pu + 1) % j_len && sv == m_v {
            let back = net.connection(groups[pv][m_v], groups[pv][0]).is_some();
            if !back {
                return Err(ClassifyError::NotRepresentable(format!(
                    "edge {} -> {} needs the companion edge {} -> {}",
                    c.from, c.to, groups[pv][m_v], groups[pv][0]
                )));
            }
            OptionalPattern::TailToNextTail
        } else {
            return Err(ClassifyError::NotRepresentable(format!(
                "edge {} -> {} matches no pattern of the structure theorem",
                c.from, c.to
            )));
        };
        let used = tail_budget.entry(c.from).or_insert(0);
        *used += 1;
        if *used > 1 {
            return Err(ClassifyError::NotRepresentable(format!(
                "group tail {} carries two optional connections, which are \
                 mutually exclusive",
                c.from
            )));
        }
        optional.push(OptionalConnection {
            from: c.from,
            to: c.to,
            pattern,
        });
    }
    optional.sort_by_key(|o| (o.from, o.to));
    Ok(optional)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_network;

    fn fixture(name: &str) -> Network {
        let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/");
        crate::model::load_network(format!("{dir}{name}")).unwrap()
    }

    #[test]
    fn ex51_has_one_clique() {
        let net = fixture("ex51.json");
        let cliques = find_delta_cliques(&net).unwrap();
        assert_eq!(cliques, vec![DeltaClique { b: 1, m: 2, e: 3 }]);
        assert!(check_ac(&net).pass());
    }

    #[test]
    fn ex52_has_three_cliques() {
        let net = fixture("ex52.json");
        let cliques = find_delta_cliques(&net).unwrap();
        assert_eq!(
            cliques,
            vec![
                DeltaClique { b: 1, m: 2, e: 3 },
                DeltaClique { b: 2, m: 5, e: 3 },
                DeltaClique { b: 5, m: 1, e: 3 },
            ]
        );
        assert!(check_ac(&net).pass());
    }

    #[test]
    fn cliques_are_order_independent_and_sign_consistent() {
        let net = fixture("ex52.json");
        let cliques = find_delta_cliques(&net).unwrap();
        // The m-point contracts along the b-axis and expands along the
        // e-axis.
        for c in &cliques {
            assert!(net.lambda(c.m, net.axis_of(c.b)) < 0.0);
            assert!(net.lambda(c.m, net.axis_of(c.e)) > 0.0);
        }
        // Reversing the connection list does not change the result.
        let mut reversed = net.connections.clone();
        reversed.reverse();
        let net2 = Network::assemble(
            net.n,
            net.equilibria.clone(),
            net.lambda.clone(),
            reversed,
            net.mode,
            net.roles.clone(),
        )
        .unwrap();
        assert_eq!(cliques, find_delta_cliques(&net2).unwrap());
    }

    #[test]
    fn plain_cycle_has_no_cliques() {
        let text = r#"{
            "n": 3,
            "equilibria": [{"id":1,"axis":1},{"id":2,"axis":2},{"id":3,"axis":3}],
            "eigenvalues": {
                "1": [-1.0, 1.0, -2.0],
                "2": [-2.0, -1.0, 1.0],
                "3": [1.0, -2.0, -1.0]
            },
            "connections": [
                {"from":1,"to":2,"dim":1,"subspace":[1,2]},
                {"from":2,"to":3,"dim":1,"subspace":[2,3]},
                {"from":3,"to":1,"dim":1,"subspace":[1,3]}
            ]
        }"#;
        let net = parse_network(text).unwrap();
        assert!(find_delta_cliques(&net).unwrap().is_empty());
        let rep = check_ac(&net);
        assert!(rep.pass(), "{:?}", rep.violations);
        let decs = decompose_structure(&net).unwrap();
        assert_eq!(decs.len(), 1);
        assert_eq!(decs[0].case, CaseKind::II);
        assert!(decs[0].groups.iter().all(|g| g.len() == 1));
        assert!(decs[0].optional_connections.is_empty());
    }

    #[test]
    fn incomplete_kirk_silber_is_flagged() {
        // The original Kirk–Silber graph: ξ_2 expands toward 3 and 4 but no
        // edge joins them, so the unstable manifold is not contained.
        let text = r#"{
            "n": 4,
            "equilibria": [{"id":1,"axis":1},{"id":2,"axis":2},
                           {"id":3,"axis":3},{"id":4,"axis":4}],
            "eigenvalues": {
                "1": [-1.0, 1.0, -2.0, -2.0],
                "2": [-2.0, -1.0, 1.0, 1.0],
                "3": [1.0, -2.0, -1.0, -2.0],
                "4": [1.0, -2.0, -2.0, -1.0]
            },
            "connections": [
                {"from":1,"to":2,"dim":1,"subspace":[1,2]},
                {"from":2,"to":3,"dim":2,"subspace":[2,3,4]},
                {"from":3,"to":1,"dim":1,"subspace":[1,3]},
                {"from":2,"to":4,"dim":1,"subspace":[2,4]},
                {"from":4,"to":1,"dim":1,"subspace":[1,4]}
            ]
        }"#;
        let net = parse_network(text).unwrap();
        let rep = check_ac(&net);
        assert!(!rep.pass());
        assert!(rep
            .violations
            .iter()
            .any(|v| matches!(v, Violation::IncompleteClique { b: 2, j: 3, k: 4 })));
        assert!(matches!(
            find_delta_cliques(&net),
            Err(ClassifyError::IncompleteClique { b: 2, .. })
        ));
    }

    #[test]
    fn unclean_positive_direction_is_flagged() {
        // λ_{1,4} > 0 with no equilibrium on axis 4 reachable from ξ_1.
        let text = r#"{
            "n": 4,
            "equilibria": [{"id":1,"axis":1},{"id":2,"axis":2},{"id":3,"axis":3}],
            "eigenvalues": {
                "1": [-1.0, 1.0, -2.0, 1.0],
                "2": [-2.0, -1.0, 1.0, -1.0],
                "3": [1.0, -2.0, -1.0, -1.0]
            },
            "connections": [
                {"from":1,"to":2,"dim":1,"subspace":[1,2]},
                {"from":2,"to":3,"dim":1,"subspace":[2,3]},
                {"from":3,"to":1,"dim":1,"subspace":[1,3]}
            ]
        }"#;
        let net = parse_network(text).unwrap();
        let rep = check_ac(&net);
        assert!(rep
            .violations
            .iter()
            .any(|v| matches!(v, Violation::UncontainedUnstable { id: 1, coord: 4 })));
    }

    #[test]
    fn ex51_flong_free_cycle() {
        let net = fixture("ex51.json");
        let free = find_flong_free_cycles(&net).unwrap();
        assert_eq!(free, vec![vec![1, 3, 4]]);
    }

    #[test]
    fn y5_flong_free_cycle_is_the_short_cycle() {
        let net = fixture("ex55_y5.json");
        let free = find_flong_free_cycles(&net).unwrap();
        assert_eq!(free, vec![vec![1, 2, 3, 4, 5]]);
    }

    #[test]
    fn ladder_has_two_flong_free_cycles() {
        let net = fixture("ex55_y6.json");
        let free = find_flong_free_cycles(&net).unwrap();
        assert_eq!(free, vec![vec![1, 2, 3], vec![4, 5, 6]]);
    }

    #[test]
    fn y5_decomposes_as_case_i() {
        let net = fixture("ex55_y5.json");
        let decs = decompose_structure(&net).unwrap();
        assert_eq!(decs.len(), 1);
        let d = &decs[0];
        assert_eq!(d.case, CaseKind::I);
        assert_eq!(d.j(), 5);
        let longs: Vec<(usize, usize)> = d
            .optional_connections
            .iter()
            .map(|o| (o.from, o.to))
            .collect();
        assert_eq!(longs, vec![(1, 4), (2, 5), (3, 1), (4, 2), (5, 3)]);
        // Case I: edge count 2J and every node plays all three clique roles.
        assert_eq!(net.connections.len(), 2 * d.j());
        let cliques = find_delta_cliques(&net).unwrap();
        for eq in &net.equilibria {
            assert!(cliques.iter().any(|c| c.b == eq.id));
            assert!(cliques.iter().any(|c| c.m == eq.id));
            assert!(cliques.iter().any(|c| c.e == eq.id));
        }
    }

    #[test]
    fn completed_kirk_silber_grouping() {
        let net = fixture("ks_completed.json");
        let decs = decompose_structure(&net).unwrap();
        assert_eq!(decs.len(), 1);
        let d = &decs[0];
        assert_eq!(d.case, CaseKind::II);
        // ξ_4 joins the group of ξ_2; the other groups are singletons.
        let of_2 = d.groups.iter().find(|g| g[0] == 2).unwrap();
        assert_eq!(of_2, &vec![2, 4]);
        assert!(d.groups.iter().filter(|g| g[0] != 2).all(|g| g.len() == 1));
        assert_eq!(d.optional_connections.len(), 1);
        let o = &d.optional_connections[0];
        assert_eq!((o.from, o.to), (4, 1));
        assert_eq!(o.pattern, OptionalPattern::SkipToBase);
    }

    #[test]
    fn ladder_decomposes_twice() {
        let net = fixture("ex55_y6.json");
        let decs = decompose_structure(&net).unwrap();
        assert_eq!(decs.len(), 2);
        assert_eq!(decs[0].base_cycle, vec![1, 2, 3]);
        assert_eq!(decs[1].base_cycle, vec![4, 5, 6]);
        for d in &decs {
            assert_eq!(d.case, CaseKind::II);
            assert!(d.groups.iter().all(|g| g.len() == 2));
            assert!(d
                .optional_connections
                .iter()
                .all(|o| o.pattern == OptionalPattern::ToNextFirst));
        }
    }

    #[test]
    fn ex52_groups_collect_the_m_cycle() {
        let net = fixture("ex52.json");
        let decs = decompose_structure(&net).unwrap();
        assert_eq!(decs.len(), 1);
        let d = &decs[0];
        assert_eq!(d.base_cycle, vec![1, 3, 4]);
        let of_1 = d.groups.iter().find(|g| g[0] == 1).unwrap();
        assert_eq!(of_1, &vec![1, 2, 5]);
        assert_eq!(d.optional_connections.len(), 1);
        assert_eq!(
            (d.optional_connections[0].from, d.optional_connections[0].to),
            (5, 1)
        );
        assert_eq!(
            d.optional_connections[0].pattern,
            OptionalPattern::BackToOwnBase
        );
    }

    #[test]
    fn decomposition_reproduces_edge_set() {
        for name in [
            "ex51.json",
            "ex52.json",
            "ks_completed.json",
            "ex55_y6.json",
        ] {
            let net = fixture(name);
            for d in decompose_structure(&net).unwrap() {
                let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
                let j_len = d.groups.len();
                for (p, g) in d.groups.iter().enumerate() {
                    let next = d.groups[(p + 1) % j_len][0];
                    for (s, id) in g.iter().enumerate() {
                        edges.insert((*id, next));
                        if s + 1 < g.len() {
                            edges.insert((*id, g[s + 1]));
                        }
                    }
                }
                for o in &d.optional_connections {
                    edges.insert((o.from, o.to));
                }
                let input: BTreeSet<(usize, usize)> =
                    net.connections.iter().map(|c| c.key()).collect();
                assert_eq!(edges, input, "{name}");
            }
        }
    }
}
