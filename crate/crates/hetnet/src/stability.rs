//! Contraction exponents and sufficient stability criteria.
//!
//! Near an equilibrium the distance of a passing trajectory to the network
//! contracts like `d_out < A d_in^ρ`. The exponent ρ depends on the
//! eigenvalue signs at the node and on whether the node is the m-point of a
//! Δ-clique; five estimate shapes (tagged L41–L45) cover all cases. A
//! network is certified asymptotically stable when the exponent product
//! along every cycle (or every closed semi-linear walk, for the tighter
//! face-aware variant) exceeds one.

use crate::classify::{self, ClassifyError, DeltaClique};
use crate::graph::{self, MinCycle};
use crate::model::{Connection, MPointDecl, Mode, Network, Roles};
use crate::symbolic::Expr;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

/// Strictness margin for `product > 1`; products at most `1 + TOL` count as
/// witnesses so that boundary networks (product exactly one) never flip on
/// rounding.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Witnesses with product in `[1 - MARGINAL_TOL, 1 + tol]` are additionally
/// labelled marginal.
pub const MARGINAL_TOL: f64 = 1e-9;
/// Cap for report-level walk enumeration.
pub const WALK_CAP: usize = 10_000;

#[derive(Debug, Error)]
pub enum StabilityError {
    #[error("role conflict at equilibrium {id}: {detail}")]
    RoleConflict { id: usize, detail: String },
    #[error("cannot form an exponent at equilibrium {id}: {what}")]
    MissingIngredient { id: usize, what: String },
    #[error(transparent)]
    Classify(#[from] ClassifyError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Lemma {
    L41,
    L42,
    L43,
    L44,
    L45,
}

/// A contraction exponent at one equilibrium, with the inputs that produced
/// it and its symbolic λ-ratio form.
#[derive(Debug, Clone, Serialize)]
pub struct RhoEstimate {
    pub equilibrium: usize,
    pub value: f64,
    pub lemma: Lemma,
    pub ingredients: BTreeMap<String, f64>,
    pub symbolic: Expr,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flag: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Theorem {
    Thas,
    Thas2,
    LvAux,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum VerdictResult {
    Stable,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    /// Node sequence of the witness cycle or walk (single node for the
    /// Lotka-Volterra criterion).
    pub nodes: Vec<usize>,
    pub product: f64,
    pub log_product: f64,
    pub marginal: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityVerdict {
    pub theorem: Theorem,
    pub result: VerdictResult,
    /// Cycles/walks with product ≤ 1 + tolerance; empty iff stable.
    pub witnesses: Vec<Witness>,
    pub tolerance: f64,
}

impl StabilityVerdict {
    pub fn stable(&self) -> bool {
        self.result == VerdictResult::Stable
    }
}

// ---------------------------------------------------------------------------
// Node context

struct NodeCtx {
    id: usize,
    roles: Roles,
    /// m-point membership: (f-long coordinate, s-long coordinate) pairs.
    decls: Vec<MPointDecl>,
}

fn m_point_decls(net: &Network, cliques: &[DeltaClique], id: usize) -> Vec<MPointDecl> {
    match net.mode {
        Mode::Ac => cliques
            .iter()
            .filter(|c| c.m == id)
            .map(|c| MPointDecl {
                f_long: net.axis_of(c.b),
                s_long: net.axis_of(c.e),
            })
            .collect(),
        Mode::Extended => net
            .roles
            .get(&id)
            .map(|r| r.cliques.clone())
            .unwrap_or_default(),
    }
}

fn node_ctx(net: &Network, cliques: &[DeltaClique], id: usize) -> Result<NodeCtx, StabilityError> {
    let roles = net.roles_at(id);
    let decls = m_point_decls(net, cliques, id);
    if net.mode == Mode::Ac {
        let mut seen = BTreeSet::new();
        for d in &decls {
            if !seen.insert(d.f_long) {
                return Err(StabilityError::RoleConflict {
                    id,
                    detail: format!(
                        "two Δ-cliques share the f-long direction {}; the unstable \
                         manifold of their b-point would exceed dimension two",
                        d.f_long
                    ),
                });
            }
        }
    }
    Ok(NodeCtx { id, roles, decls })
}

fn max_lambda(net: &Network, id: usize, coords: &BTreeSet<usize>) -> Option<(usize, f64)> {
    coords
        .iter()
        .map(|k| (*k, net.lambda(id, *k)))
        .fold(None, |best, (k, v)| match best {
            Some((_, bv)) if bv >= v => best,
            _ => Some((k, v)),
        })
}

fn min_lambda(net: &Network, id: usize, coords: &BTreeSet<usize>) -> Option<(usize, f64)> {
    coords
        .iter()
        .map(|k| (*k, net.lambda(id, *k)))
        .fold(None, |best, (k, v)| match best {
            Some((_, bv)) if bv <= v => best,
            _ => Some((k, v)),
        })
}

// ---------------------------------------------------------------------------
// Exponents

/// The generic (face-agnostic) exponent ρ_j.
///
/// Dispatch: a node that is no clique's m-point takes the generic saddle
/// estimate (L41). An m-point takes the clique-retention estimates: L42
/// (distance cannot grow), L43 (one expanding direction), L44/L45 (two
/// expanding directions, one or several contracting).
pub fn compute_rho(
    net: &Network,
    cliques: &[DeltaClique],
    j: usize,
) -> Result<RhoEstimate, StabilityError> {
    let ctx = node_ctx(net, cliques, j)?;
    rho_from_sets(
        net,
        &ctx,
        &ctx.roles.contracting,
        &ctx.roles.expanding,
        &ctx.roles.transverse,
        &ctx.decls,
    )
}

fn rho_from_sets(
    net: &Network,
    ctx: &NodeCtx,
    contracting: &BTreeSet<usize>,
    expanding: &BTreeSet<usize>,
    transverse: &BTreeSet<usize>,
    decls: &[MPointDecl],
) -> Result<RhoEstimate, StabilityError> {
    let j = ctx.id;
    let (_, e) =
        max_lambda(net, j, expanding).ok_or_else(|| StabilityError::MissingIngredient {
            id: j,
            what: "no expanding eigenvalue".into(),
        })?;
    let e_coords: Vec<usize> = expanding.iter().copied().collect();

    if decls.is_empty() {
        // L41: not an m-point.
        let (_, c) =
            max_lambda(net, j, contracting).ok_or_else(|| StabilityError::MissingIngredient {
                id: j,
                what: "no contracting eigenvalue".into(),
            })?;
        let mut ingredients = BTreeMap::new();
        ingredients.insert("c".into(), c);
        ingredients.insert("e".into(), e);
        let mut value = -c / e;
        let e_expr = Expr::max_lam(j, e_coords.clone());
        let mut terms = vec![Expr::neg(Expr::div(
            Expr::max_lam(j, contracting.iter().copied()),
            e_expr.clone(),
        ))];
        if !transverse.is_empty() {
            let (_, t_max) = max_lambda(net, j, transverse).unwrap();
            for (i, t) in transverse.iter().enumerate() {
                ingredients.insert(format!("t{}", i + 1), net.lambda(j, *t));
            }
            value = value.min(1.0 - t_max / e);
            terms.push(Expr::sub(
                Expr::One,
                Expr::div(Expr::max_lam(j, transverse.iter().copied()), e_expr),
            ));
        }
        return Ok(RhoEstimate {
            equilibrium: j,
            value,
            lemma: Lemma::L41,
            ingredients,
            symbolic: Expr::Min(terms),
            flag: None,
        });
    }

    let f_set: BTreeSet<usize> = decls.iter().map(|d| d.f_long).collect();
    let s_set: BTreeSet<usize> = decls.iter().map(|d| d.s_long).collect();
    let c_free: BTreeSet<usize> = contracting.difference(&f_set).copied().collect();
    let e_free: BTreeSet<usize> = expanding.difference(&s_set).copied().collect();

    if expanding.len() == 1 {
        if decls.len() == 1 && contracting.len() == 1 && c_free.is_empty() {
            // L42: the whole local picture sits inside the clique subspace.
            return Ok(rho_one(j, Lemma::L42, None));
        }
        // L43: the contraction rate comes from the non-f-long directions.
        if c_free.is_empty() {
            return Ok(rho_one(
                j,
                Lemma::L43,
                Some(
                    "every contracting vector is an f-long vector; the contraction term is dropped"
                        .into(),
                ),
            ));
        }
        let (_, c) = max_lambda(net, j, &c_free).unwrap();
        let mut ingredients = BTreeMap::new();
        ingredients.insert("c".into(), c);
        ingredients.insert("e".into(), e);
        let symbolic = Expr::Min(vec![
            Expr::neg(Expr::div(
                Expr::max_lam(j, c_free.iter().copied()),
                Expr::max_lam(j, e_coords.clone()),
            )),
            Expr::One,
        ]);
        return Ok(RhoEstimate {
            equilibrium: j,
            value: (-c / e).min(1.0),
            lemma: Lemma::L43,
            ingredients,
            symbolic,
            flag: None,
        });
    }

    // Several expanding directions. If nothing sticks out of the clique
    // subspaces and the expanding directions never leave the incoming
    // connection subspaces, the L42 argument still applies (a node on a
    // higher-dimensional invariant subspace as in the extended examples).
    if c_free.is_empty() && e_free.is_empty() {
        let contained = net
            .in_edges(ctx.id)
            .iter()
            .all(|conn| expanding.iter().all(|k| conn.subspace.contains(k)));
        if contained {
            return Ok(rho_one(j, Lemma::L42, None));
        }
    }

    // L44 (one contracting, one clique) and L45 (the general grouping).
    // Each f-long group contributes c̃/(c̃ - e'), with e' the strongest
    // expanding direction outside the s-long set, or the group's own s-long
    // direction when every expanding direction is some clique's s-long.
    let single_clique = decls.len() == 1 && contracting.len() == 1 && c_free.is_empty();
    let lemma = if single_clique {
        Lemma::L44
    } else {
        Lemma::L45
    };
    let mut ingredients = BTreeMap::new();
    let mut terms = Vec::new();
    let mut exprs = Vec::new();

    if let Some((_, c1)) = max_lambda(net, j, &c_free) {
        let a1 = -c1 / e;
        ingredients.insert("a1".into(), a1);
        terms.push(a1);
        exprs.push(Expr::neg(Expr::div(
            Expr::max_lam(j, c_free.iter().copied()),
            Expr::max_lam(j, e_coords.clone()),
        )));
    }

    let pair_free = max_lambda(net, j, &e_free);
    let mut group_index = 0;
    for s in &s_set {
        let group: BTreeSet<usize> = decls
            .iter()
            .filter(|d| d.s_long == *s)
            .map(|d| d.f_long)
            .collect();
        let Some((c_coord, c_tilde)) = max_lambda(net, j, &group) else {
            continue;
        };
        let (pair_coord, pair) = pair_free.unwrap_or((*s, net.lambda(j, *s)));
        let a = c_tilde / (c_tilde - pair);
        group_index += 1;
        ingredients.insert(format!("c_tilde{group_index}"), c_tilde);
        ingredients.insert(format!("e{group_index}"), pair);
        terms.push(a);
        exprs.push(Expr::div(
            Expr::lam(j, c_coord),
            Expr::sub(Expr::lam(j, c_coord), Expr::lam(j, pair_coord)),
        ));
    }

    if terms.is_empty() {
        return Err(StabilityError::MissingIngredient {
            id: j,
            what: "no estimate term applies".into(),
        });
    }
    let value = terms.iter().copied().fold(f64::INFINITY, f64::min);
    if lemma == Lemma::L44 {
        ingredients.insert("c".into(), net.lambda(j, *f_set.iter().next().unwrap()));
    }
    Ok(RhoEstimate {
        equilibrium: j,
        value,
        lemma,
        ingredients,
        symbolic: Expr::Min(exprs),
        flag: None,
    })
}

fn rho_one(j: usize, lemma: Lemma, flag: Option<String>) -> RhoEstimate {
    RhoEstimate {
        equilibrium: j,
        value: 1.0,
        lemma,
        ingredients: BTreeMap::new(),
        symbolic: Expr::One,
        flag,
    }
}

/// Directions along which `conn` arrives at its head.
fn in_dirs(net: &Network, conn: &Connection) -> BTreeSet<usize> {
    match net.mode {
        Mode::Ac => [net.axis_of(conn.from)].into_iter().collect(),
        Mode::Extended => {
            let contracting = &net.roles[&conn.to].contracting;
            conn.subspace.intersection(contracting).copied().collect()
        }
    }
}

/// Directions along which `conn` leaves its tail.
fn out_dirs(net: &Network, conn: &Connection) -> BTreeSet<usize> {
    match net.mode {
        Mode::Ac => [net.axis_of(conn.to)].into_iter().collect(),
        Mode::Extended => {
            let expanding = &net.roles[&conn.from].expanding;
            conn.subspace.intersection(expanding).copied().collect()
        }
    }
}

/// The face-aware exponent ρ*(𝒫, ξ_j) for a walk entering `j` along
/// `in_edge` and leaving along `out_edge`.
///
/// The contracting set is restricted to the incoming directions of
/// `in_edge`, the expanding set to the outgoing directions of `out_edge`,
/// and the remaining negative non-radial directions act as transverse. When
/// `in_edge` is the f-long connection of a clique whose s-long connection is
/// `out_edge`, the clique-retention estimate applies instead: the distance
/// cannot grow (exponent 1) unless a second expanding direction leaks
/// through a two-dimensional exit, which gives `c/(c - e)` with `e` the
/// eigenvalue along the exit direction.
pub fn compute_rho_star(
    net: &Network,
    cliques: &[DeltaClique],
    j: usize,
    in_edge: &Connection,
    out_edge: &Connection,
) -> Result<RhoEstimate, StabilityError> {
    debug_assert_eq!(in_edge.to, j);
    debug_assert_eq!(out_edge.from, j);
    let ctx = node_ctx(net, cliques, j)?;
    let ins = in_dirs(net, in_edge);
    let outs = out_dirs(net, out_edge);
    let (e_coord, e) =
        max_lambda(net, j, &outs).ok_or_else(|| StabilityError::MissingIngredient {
            id: j,
            what: "out-edge has no expanding direction".into(),
        })?;

    let retained: Vec<&MPointDecl> = ctx
        .decls
        .iter()
        .filter(|d| ins.contains(&d.f_long) && outs.contains(&d.s_long))
        .collect();

    if let Some(decl) = retained.first() {
        if out_edge.dim == 1 || ctx.roles.expanding.len() == 1 {
            return Ok(rho_one(j, Lemma::L42, None));
        }
        let c = retained
            .iter()
            .map(|d| net.lambda(j, d.f_long))
            .fold(f64::NEG_INFINITY, f64::max);
        let c_coord = retained
            .iter()
            .max_by(|a, b| {
                net.lambda(j, a.f_long)
                    .partial_cmp(&net.lambda(j, b.f_long))
                    .unwrap()
            })
            .unwrap()
            .f_long;
        let s_coord = decl.s_long;
        let pair = net.lambda(j, s_coord);
        let mut ingredients = BTreeMap::new();
        ingredients.insert("c".into(), c);
        ingredients.insert("e2".into(), pair);
        return Ok(RhoEstimate {
            equilibrium: j,
            value: c / (c - pair),
            lemma: if ctx.roles.contracting.len() == 1 {
                Lemma::L44
            } else {
                Lemma::L45
            },
            ingredients,
            symbolic: Expr::div(
                Expr::lam(j, c_coord),
                Expr::sub(Expr::lam(j, c_coord), Expr::lam(j, s_coord)),
            ),
            flag: None,
        });
    }

    // L41-style estimate on the restricted sets.
    let (_, c) = max_lambda(net, j, &ins).ok_or_else(|| StabilityError::MissingIngredient {
        id: j,
        what: "in-edge has no contracting direction".into(),
    })?;
    let transverse: BTreeSet<usize> = (1..=net.n)
        .filter(|k| net.lambda(j, *k) < 0.0 && !ctx.roles.radial.contains(k) && !ins.contains(k))
        .collect();
    let mut ingredients = BTreeMap::new();
    ingredients.insert("c".into(), c);
    ingredients.insert("e".into(), e);
    let mut value = -c / e;
    let e_expr = Expr::lam(j, e_coord);
    let mut exprs = vec![Expr::neg(Expr::div(
        Expr::max_lam(j, ins.iter().copied()),
        e_expr.clone(),
    ))];
    if !transverse.is_empty() {
        let (_, t_max) = max_lambda(net, j, &transverse).unwrap();
        for (i, t) in transverse.iter().enumerate() {
            ingredients.insert(format!("t{}", i + 1), net.lambda(j, *t));
        }
        value = value.min(1.0 - t_max / e);
        exprs.push(Expr::sub(
            Expr::One,
            Expr::div(Expr::max_lam(j, transverse.iter().copied()), e_expr),
        ));
    }
    Ok(RhoEstimate {
        equilibrium: j,
        value,
        lemma: Lemma::L41,
        ingredients,
        symbolic: Expr::Min(exprs),
        flag: None,
    })
}

/// Exponents for every equilibrium.
pub fn rho_table(net: &Network) -> Result<BTreeMap<usize, RhoEstimate>, StabilityError> {
    let cliques = ac_cliques(net)?;
    net.equilibria
        .iter()
        .map(|e| compute_rho(net, &cliques, e.id).map(|r| (e.id, r)))
        .collect()
}

fn ac_cliques(net: &Network) -> Result<Vec<DeltaClique>, StabilityError> {
    match net.mode {
        Mode::Ac => Ok(classify::find_delta_cliques(net)?),
        Mode::Extended => Ok(Vec::new()),
    }
}

/// All elementary cycles of the connection graph (canonical order).
pub fn enumerate_cycles(net: &Network) -> Result<Vec<Vec<usize>>, ClassifyError> {
    classify::enumerate_cycles(net)
}

// ---------------------------------------------------------------------------
// Verdicts

/// Cycle criterion: stable when every elementary cycle has exponent product
/// above `1 + tol`.
///
/// The decision runs on the connection digraph with arc weights `log ρ` of
/// the source node: a cycle with weight sum at most `log(1 + tol)` exists
/// iff the criterion fails. Witnesses are enumerated explicitly on small
/// graphs, otherwise the detector's cycle is reported.
pub fn check_thas(net: &Network, tol: f64) -> Result<StabilityVerdict, StabilityError> {
    let rhos = rho_table(net)?;
    let ids: Vec<usize> = net.equilibria.iter().map(|e| e.id).collect();
    let index: BTreeMap<usize, usize> = ids.iter().enumerate().map(|(i, id)| (*id, i)).collect();
    let arcs: Vec<(usize, usize, f64)> = net
        .connections
        .iter()
        .map(|c| (index[&c.from], index[&c.to], rhos[&c.from].value.ln()))
        .collect();
    let theta = (1.0 + tol).ln();

    let worst = graph::min_cycle_sum(ids.len(), &arcs);
    let failing = matches!(&worst, MinCycle::Cycle { sum, .. } if *sum <= theta);
    let mut witnesses = Vec::new();
    if failing {
        if ids.len() <= 20 {
            for cycle in enumerate_cycles(net)? {
                let log_product: f64 = cycle.iter().map(|id| rhos[id].value.ln()).sum();
                if log_product <= theta {
                    witnesses.push(make_witness(
                        cycle.clone(),
                        cycle.iter().map(|id| rhos[id].value).product(),
                        log_product,
                        tol,
                    ));
                }
            }
            witnesses.sort_by(|a, b| a.log_product.partial_cmp(&b.log_product).unwrap());
        } else if let MinCycle::Cycle { sum, vertices } = worst {
            let nodes: Vec<usize> = vertices.iter().map(|v| ids[*v]).collect();
            witnesses.push(make_witness(
                graph::canonical_rotation(&nodes),
                sum.exp(),
                sum,
                tol,
            ));
        }
    }
    Ok(verdict(Theorem::Thas, witnesses, tol))
}

/// Walk criterion: stable when every closed semi-linear walk has face-aware
/// exponent product above `1 + tol`.
///
/// Vertices of the decision graph are connections, arcs join consecutive
/// connections and carry `log ρ*` of the shared node. Every closed
/// semi-linear walk splits into simple cycles of this graph and every
/// simple cycle is such a walk, so the criterion reduces to the same
/// non-positive-cycle detection.
pub fn check_thas2(net: &Network, tol: f64) -> Result<StabilityVerdict, StabilityError> {
    let cliques = ac_cliques(net)?;
    let conns = &net.connections;
    let mut arcs = Vec::new();
    let mut weight = BTreeMap::new();
    for (a, ca) in conns.iter().enumerate() {
        for (b, cb) in conns.iter().enumerate() {
            if ca.to != cb.from {
                continue;
            }
            let rho = compute_rho_star(net, &cliques, ca.to, ca, cb)?;
            weight.insert((a, b), rho);
            arcs.push((a, b, weight[&(a, b)].value.ln()));
        }
    }
    let theta = (1.0 + tol).ln();
    let worst = graph::min_cycle_sum(conns.len(), &arcs);
    let failing = matches!(&worst, MinCycle::Cycle { sum, .. } if *sum <= theta);

    let mut witnesses = Vec::new();
    if failing {
        let arc_pairs: Vec<(usize, usize)> = arcs.iter().map(|(a, b, _)| (*a, *b)).collect();
        if conns.len() <= 40 {
            let cycles = graph::elementary_cycles(conns.len(), &arc_pairs, classify::CYCLE_CAP)
                .map_err(ClassifyError::from)?;
            for cycle in cycles {
                let mut log_product = 0.0;
                let mut product = 1.0;
                for i in 0..cycle.len() {
                    let a = cycle[i];
                    let b = cycle[(i + 1) % cycle.len()];
                    let v = weight[&(a, b)].value;
                    log_product += v.ln();
                    product *= v;
                }
                if log_product <= theta {
                    let nodes: Vec<usize> = cycle.iter().map(|i| conns[*i].from).collect();
                    witnesses.push(make_witness(
                        graph::canonical_rotation(&nodes),
                        product,
                        log_product,
                        tol,
                    ));
                }
            }
            witnesses.sort_by(|a, b| a.log_product.partial_cmp(&b.log_product).unwrap());
            witnesses.dedup_by(|a, b| a.nodes == b.nodes);
        } else if let MinCycle::Cycle { sum, vertices } = worst {
            let nodes: Vec<usize> = vertices.iter().map(|v| conns[*v].from).collect();
            witnesses.push(make_witness(
                graph::canonical_rotation(&nodes),
                sum.exp(),
                sum,
                tol,
            ));
        }
    }
    Ok(verdict(Theorem::Thas2, witnesses, tol))
}

/// Auxiliary criterion for Lotka-Volterra-type realizations: every node must
/// contract more strongly than it expands, |min c| / |min e| > 1.
pub fn check_lv_aux(net: &Network) -> Result<StabilityVerdict, StabilityError> {
    let mut witnesses = Vec::new();
    for eq in &net.equilibria {
        let roles = net.roles_at(eq.id);
        let c = min_lambda(net, eq.id, &roles.contracting);
        let e = min_lambda(net, eq.id, &roles.expanding);
        let ratio = match (c, e) {
            (Some((_, c)), Some((_, e))) => c.abs() / e.abs(),
            _ => 0.0,
        };
        if ratio <= 1.0 {
            witnesses.push(make_witness(vec![eq.id], ratio, ratio.ln(), 0.0));
        }
    }
    Ok(verdict(Theorem::LvAux, witnesses, 0.0))
}

fn make_witness(nodes: Vec<usize>, product: f64, log_product: f64, tol: f64) -> Witness {
    Witness {
        nodes,
        product,
        log_product,
        marginal: product >= 1.0 - MARGINAL_TOL && product <= 1.0 + tol,
    }
}

fn verdict(theorem: Theorem, witnesses: Vec<Witness>, tolerance: f64) -> StabilityVerdict {
    StabilityVerdict {
        theorem,
        result: if witnesses.is_empty() {
            VerdictResult::Stable
        } else {
            VerdictResult::Inconclusive
        },
        witnesses,
        tolerance,
    }
}

// ---------------------------------------------------------------------------
// Walk table

/// A closed walk with its per-node face-aware exponents.
#[derive(Debug, Clone, Serialize)]
pub struct WalkExponent {
    pub nodes: Vec<usize>,
    pub per_node: Vec<RhoEstimate>,
    pub product: f64,
    pub log_product: f64,
}

/// Report-level enumeration of closed walks: the elementary cycles plus
/// their compositions with windings around all-m-point subcycles (where the
/// per-step exponents retain the distance and trajectories can loop before
/// moving on), spliced at shared node visits. Walk length is capped at one
/// more than the connection count.
pub fn enumerate_semilinear_walks(net: &Network) -> Result<Vec<WalkExponent>, StabilityError> {
    let cliques = ac_cliques(net)?;
    let m_points: BTreeSet<usize> = net
        .equilibria
        .iter()
        .map(|e| e.id)
        .filter(|id| !m_point_decls(net, &cliques, *id).is_empty())
        .collect();
    let cycles = enumerate_cycles(net)?;
    let loops: Vec<Vec<usize>> = cycles
        .iter()
        .filter(|c| c.iter().all(|id| m_points.contains(id)))
        .cloned()
        .collect();
    let max_len = net.connections.len() + 1;

    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut frontier: Vec<Vec<usize>> = Vec::new();
    for base in &cycles {
        if seen.insert(base.clone()) {
            frontier.push(base.clone());
        }
    }
    while let Some(walk) = frontier.pop() {
        for lp in &loops {
            if *lp == walk || walk.len() + lp.len() > max_len {
                continue;
            }
            for i in 0..walk.len() {
                let v = walk[i];
                let Some(offset) = lp.iter().position(|x| *x == v) else {
                    continue;
                };
                let mut spliced = walk[..i].to_vec();
                spliced.extend(lp[offset..].iter().chain(&lp[..offset]));
                spliced.extend(&walk[i..]);
                let canonical = graph::canonical_rotation(&spliced);
                if seen.len() >= WALK_CAP {
                    break;
                }
                if seen.insert(canonical.clone()) {
                    frontier.push(canonical);
                }
            }
        }
    }

    let mut walks = Vec::new();
    for nodes in seen {
        let len = nodes.len();
        let mut per_node = Vec::with_capacity(len);
        let mut product = 1.0;
        let mut log_product = 0.0;
        for i in 0..len {
            let prev = nodes[(i + len - 1) % len];
            let next = nodes[(i + 1) % len];
            let in_edge = net
                .connection(prev, nodes[i])
                .expect("walk edge exists by construction");
            let out_edge = net.connection(nodes[i], next).expect("walk edge");
            let rho = compute_rho_star(net, &cliques, nodes[i], in_edge, out_edge)?;
            product *= rho.value;
            log_product += rho.value.ln();
            per_node.push(rho);
        }
        walks.push(WalkExponent {
            nodes,
            per_node,
            product,
            log_product,
        });
    }
    walks.sort_by(|a, b| (a.nodes.len(), &a.nodes).cmp(&(b.nodes.len(), &b.nodes)));
    Ok(walks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{load_network, parse_network};
    use crate::symbolic::normalize;

    fn fixture(name: &str) -> Network {
        let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/");
        load_network(format!("{dir}{name}")).unwrap()
    }

    #[test]
    fn ex51_rho_values_and_formulas() {
        let net = fixture("ex51.json");
        let rhos = rho_table(&net).unwrap();
        assert_eq!(rhos[&1].value, 3.0);
        assert_eq!(rhos[&2].value, 1.0);
        assert_eq!(rhos[&3].value, 2.0);
        assert_eq!(rhos[&4].value, 2.0);
        assert_eq!(rhos[&2].lemma, Lemma::L42);
        assert_eq!(
            normalize(&rhos[&1].symbolic.render()),
            "-λ_{1,4}/max(λ_{1,2},λ_{1,3})"
        );
        assert_eq!(
            normalize(&rhos[&3].symbolic.render()),
            "-max(λ_{3,1},λ_{3,2})/λ_{3,4}"
        );
        assert_eq!(
            normalize(&rhos[&4].symbolic.render()),
            "min(-λ_{4,3}/λ_{4,1},1-λ_{4,2}/λ_{4,1})"
        );
    }

    #[test]
    fn rho_l41_numeric_example() {
        // λ_{43} = -2, λ_{41} = 1, λ_{42} = -0.5 at ξ_4.
        let mut text: serde_json::Value =
            serde_json::from_str(&fixture("ex51.json").to_canonical_json()).unwrap();
        text["eigenvalues"]["4"] = serde_json::json!([1.0, -0.5, -2.0, -1.0]);
        let net = parse_network(&text.to_string()).unwrap();
        let cliques = classify::find_delta_cliques(&net).unwrap();
        let rho = compute_rho(&net, &cliques, 4).unwrap();
        assert!((rho.value - 1.5).abs() < 1e-15);
    }

    #[test]
    fn value_is_reproducible_from_ingredients() {
        for name in [
            "ex51.json",
            "ex52.json",
            "ex55_y5.json",
            "ks_completed.json",
        ] {
            let net = fixture(name);
            for (_, rho) in rho_table(&net).unwrap() {
                let ing = &rho.ingredients;
                let recomputed = match rho.lemma {
                    Lemma::L42 => 1.0,
                    Lemma::L41 => {
                        let (c, e) = (ing["c"], ing["e"]);
                        let t_max = ing
                            .iter()
                            .filter(|(k, _)| k.starts_with('t'))
                            .map(|(_, v)| *v)
                            .fold(f64::NEG_INFINITY, f64::max);
                        if t_max.is_finite() {
                            (-c / e).min(1.0 - t_max / e)
                        } else {
                            -c / e
                        }
                    }
                    Lemma::L43 => (-ing["c"] / ing["e"]).min(1.0),
                    Lemma::L44 | Lemma::L45 => {
                        let mut terms = Vec::new();
                        if let Some(a1) = ing.get("a1") {
                            terms.push(*a1);
                        }
                        for i in 1.. {
                            let (Some(c), Some(e)) =
                                (ing.get(&format!("c_tilde{i}")), ing.get(&format!("e{i}")))
                            else {
                                break;
                            };
                            terms.push(c / (c - e));
                        }
                        terms.into_iter().fold(f64::INFINITY, f64::min)
                    }
                };
                assert!(
                    (rho.value - recomputed).abs() <= 1e-15 * rho.value.abs().max(1.0),
                    "{name} node {}: {} vs {recomputed}",
                    rho.equilibrium,
                    rho.value
                );
            }
        }
    }

    #[test]
    fn rho_symbolic_evaluates_to_value() {
        for name in [
            "ex51.json",
            "ex52.json",
            "ex55_y5.json",
            "ks_completed.json",
        ] {
            let net = fixture(name);
            for (_, rho) in rho_table(&net).unwrap() {
                let lam = |j: usize, k: usize| net.lambda(j, k);
                assert!(
                    (rho.symbolic.eval(&lam) - rho.value).abs() <= 1e-12 * rho.value.abs(),
                    "{name}: symbolic mismatch at {}",
                    rho.equilibrium
                );
            }
        }
    }

    #[test]
    fn m_point_exponents_never_exceed_one() {
        for name in [
            "ex52.json",
            "ex55_y5.json",
            "ex55_y6.json",
            "ks_completed.json",
        ] {
            let net = fixture(name);
            let cliques = classify::find_delta_cliques(&net).unwrap();
            for eq in &net.equilibria {
                let rho = compute_rho(&net, &cliques, eq.id).unwrap();
                if !m_point_decls(&net, &cliques, eq.id).is_empty() {
                    assert!(rho.value <= 1.0 + 1e-12, "{name} node {}", eq.id);
                }
            }
        }
    }

    #[test]
    fn l43_all_flong_is_flagged() {
        // Extended declaration: both contracting directions are f-long
        // vectors and there is a single expanding direction.
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
            ],
            "roles": {
                "1": {"radial":[1],"contracting":[3],"expanding":[2],"transverse":[]},
                "2": {"radial":[2],"contracting":[1],"expanding":[3],"transverse":[],
                      "cliques":[{"f_long":1,"s_long":3}]},
                "3": {"radial":[3],"contracting":[2],"expanding":[1],"transverse":[]}
            }
        }"#;
        let net = parse_network(text).unwrap();
        let rho = compute_rho(&net, &[], 2).unwrap();
        assert_eq!(rho.value, 1.0);
        assert_eq!(rho.lemma, Lemma::L42);
        // A second clique on the same node forces the L43 path instead.
        let text = text.replace(
            r#""cliques":[{"f_long":1,"s_long":3}]"#,
            r#""cliques":[{"f_long":1,"s_long":3},{"f_long":1,"s_long":3}]"#,
        );
        let net = parse_network(&text).unwrap();
        let rho = compute_rho(&net, &[], 2).unwrap();
        assert_eq!(rho.value, 1.0);
        assert_eq!(rho.lemma, Lemma::L43);
        assert!(rho.flag.is_some());
    }

    #[test]
    fn rho_star_q412_and_q123() {
        let net = fixture("ex52.json");
        let cliques = classify::find_delta_cliques(&net).unwrap();
        let e41 = net.connection(4, 1).unwrap();
        let e12 = net.connection(1, 2).unwrap();
        let q412 = compute_rho_star(&net, &cliques, 1, e41, e12).unwrap();
        assert_eq!(
            normalize(&q412.symbolic.render()),
            "min(-λ_{1,4}/λ_{1,2},1-λ_{1,5}/λ_{1,2})"
        );
        assert_eq!(q412.value, 2.0);

        let e23 = net.connection(2, 3).unwrap();
        let q123 = compute_rho_star(&net, &cliques, 2, e12, e23).unwrap();
        assert_eq!(
            normalize(&q123.symbolic.render()),
            "λ_{2,1}/(λ_{2,1}-λ_{2,3})"
        );
        assert!((q123.value - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn rho_star_numeric_instantiation() {
        // λ_{21} = -1, λ_{23} = 2 gives q_123 = 1/3.
        let mut text: serde_json::Value =
            serde_json::from_str(&fixture("ex52.json").to_canonical_json()).unwrap();
        text["eigenvalues"]["2"] = serde_json::json!([-1.0, -1.0, 2.0, -6.0, 1.0]);
        let net = parse_network(&text.to_string()).unwrap();
        let cliques = classify::find_delta_cliques(&net).unwrap();
        let q123 = compute_rho_star(
            &net,
            &cliques,
            2,
            net.connection(1, 2).unwrap(),
            net.connection(2, 3).unwrap(),
        )
        .unwrap();
        assert!((q123.value - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn thas_on_ex51_is_stable() {
        let net = fixture("ex51.json");
        let verdict = check_thas(&net, DEFAULT_TOL).unwrap();
        assert!(verdict.stable());
        assert!(verdict.witnesses.is_empty());
    }

    #[test]
    fn thas_on_ex52_is_inconclusive_with_m_cycle_witness() {
        let net = fixture("ex52.json");
        let verdict = check_thas(&net, DEFAULT_TOL).unwrap();
        assert_eq!(verdict.result, VerdictResult::Inconclusive);
        assert!(verdict.witnesses.iter().any(|w| w.nodes == vec![1, 2, 5]));
    }

    #[test]
    fn thas2_on_ex52_is_stable_for_strong_contraction() {
        let net = fixture("ex52.json");
        assert!(check_thas2(&net, DEFAULT_TOL).unwrap().stable());
    }

    #[test]
    fn cycle_stability_implies_walk_stability() {
        // The walk criterion is the tighter one: whenever the cycle
        // criterion certifies a network, the walk criterion must as well.
        for name in ["ex51.json", "ex53.json", "ex54.json"] {
            let net = fixture(name);
            assert!(check_thas(&net, DEFAULT_TOL).unwrap().stable(), "{name}");
            assert!(check_thas2(&net, DEFAULT_TOL).unwrap().stable(), "{name}");
        }
    }

    #[test]
    fn all_rho_one_network_is_marginal() {
        let text = r#"{
            "n": 3,
            "equilibria": [{"id":1,"axis":1},{"id":2,"axis":2},{"id":3,"axis":3}],
            "eigenvalues": {
                "1": [-1.0, 1.0, -1.0],
                "2": [-1.0, -1.0, 1.0],
                "3": [1.0, -1.0, -1.0]
            },
            "connections": [
                {"from":1,"to":2,"dim":1,"subspace":[1,2]},
                {"from":2,"to":3,"dim":1,"subspace":[2,3]},
                {"from":3,"to":1,"dim":1,"subspace":[1,3]}
            ]
        }"#;
        let net = parse_network(text).unwrap();
        let verdict = check_thas(&net, DEFAULT_TOL).unwrap();
        assert_eq!(verdict.result, VerdictResult::Inconclusive);
        assert!(verdict.witnesses[0].marginal);
        assert_eq!(verdict.witnesses[0].product, 1.0);
    }

    #[test]
    fn y5_walk_criterion_hits_the_long_cycle() {
        let net = fixture("ex55_y5.json");
        let verdict = check_thas2(&net, DEFAULT_TOL).unwrap();
        assert_eq!(verdict.result, VerdictResult::Inconclusive);
        let x5 = verdict
            .witnesses
            .iter()
            .find(|w| w.nodes == vec![1, 4, 2, 5, 3])
            .expect("X_5 witness");
        assert!((x5.product - 1.0).abs() <= 1e-9);
        assert!(x5.marginal);
    }

    #[test]
    fn lv_aux_examples() {
        let net = fixture("ex55_y5.json");
        assert!(check_lv_aux(&net).unwrap().stable());

        // A node with weak contraction (|c| = 0.3 against e_min = 0.5).
        let text = r#"{
            "n": 3,
            "equilibria": [{"id":1,"axis":1},{"id":2,"axis":2},{"id":3,"axis":3}],
            "eigenvalues": {
                "1": [-1.0, 0.5, -0.3],
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
        let verdict = check_lv_aux(&net).unwrap();
        assert_eq!(verdict.result, VerdictResult::Inconclusive);
        assert_eq!(verdict.witnesses.len(), 1);
        assert_eq!(verdict.witnesses[0].nodes, vec![1]);
        assert!((verdict.witnesses[0].product - 0.6).abs() < 1e-15);
    }

    #[test]
    fn cycle_counts_match_examples() {
        assert_eq!(enumerate_cycles(&fixture("ex51.json")).unwrap().len(), 2);
        assert_eq!(enumerate_cycles(&fixture("ex54.json")).unwrap().len(), 5);
    }

    #[test]
    fn extended_examples_match_printed_formulas() {
        let net = fixture("ex53.json");
        let rhos = rho_table(&net).unwrap();
        assert_eq!(
            normalize(&rhos[&1].symbolic.render()),
            "-max(λ_{1,3},λ_{1,4})/λ_{1,2}"
        );
        assert_eq!(
            normalize(&rhos[&2].symbolic.render()),
            "-λ_{2,1}/max(λ_{2,3},λ_{2,4})"
        );
        assert_eq!(rhos[&5].value, 1.0);
        assert_eq!(rhos[&5].lemma, Lemma::L42);

        let net = fixture("ex54.json");
        let rhos = rho_table(&net).unwrap();
        assert_eq!(
            normalize(&rhos[&3].symbolic.render()),
            "min(-λ_{3,2}/λ_{3,1},1)"
        );
        assert_eq!(
            normalize(&rhos[&4].symbolic.render()),
            "min(-λ_{4,2}/λ_{4,1},1)"
        );
        assert_eq!(
            normalize(&rhos[&5].symbolic.render()),
            "λ_{5,2}/(λ_{5,2}-λ_{5,1})"
        );
        assert!((rhos[&5].value - 0.8).abs() < 1e-15);
    }

    #[test]
    fn scaling_invariance_of_exponents_and_verdicts() {
        let net = fixture("ex52.json");
        let gamma = 3.7;
        let mut lambda = net.lambda.clone();
        for row in lambda.values_mut() {
            for v in row.iter_mut() {
                *v *= gamma;
            }
        }
        let scaled = Network::assemble(
            net.n,
            net.equilibria.clone(),
            lambda,
            net.connections.clone(),
            net.mode,
            net.roles.clone(),
        )
        .unwrap();
        let a = rho_table(&net).unwrap();
        let b = rho_table(&scaled).unwrap();
        for (id, rho) in &a {
            assert!((rho.value - b[id].value).abs() < 1e-12);
        }
        assert_eq!(
            check_thas(&net, DEFAULT_TOL).unwrap().result,
            check_thas(&scaled, DEFAULT_TOL).unwrap().result
        );
        assert_eq!(
            check_thas2(&net, DEFAULT_TOL).unwrap().result,
            check_thas2(&scaled, DEFAULT_TOL).unwrap().result
        );
    }

    #[test]
    fn rho_star_dominates_rho_on_fixture_instantiations() {
        for name in ["ex51.json", "ex52.json", "ex55_y5.json", "ex55_y6.json"] {
            let net = fixture(name);
            let cliques = classify::find_delta_cliques(&net).unwrap();
            for walk in enumerate_semilinear_walks(&net).unwrap().iter().take(50) {
                for rho_star in &walk.per_node {
                    let rho = compute_rho(&net, &cliques, rho_star.equilibrium).unwrap();
                    assert!(
                        rho_star.value >= rho.value - 1e-12,
                        "{name}: ρ* < ρ at {}",
                        rho_star.equilibrium
                    );
                }
            }
        }
    }

    #[test]
    fn walk_products_are_consistent() {
        let net = fixture("ex52.json");
        for walk in enumerate_semilinear_walks(&net).unwrap() {
            assert!(
                (walk.product - walk.log_product.exp()).abs()
                    <= 1e-12 * walk.product.abs().max(1.0)
            );
        }
    }

    #[test]
    fn ex52_walk_table_matches_expected_sequences() {
        let net = fixture("ex52.json");
        let walks = enumerate_semilinear_walks(&net).unwrap();
        let seqs: Vec<Vec<usize>> = walks.iter().map(|w| w.nodes.clone()).collect();
        let expected: Vec<Vec<usize>> = vec![
            vec![1, 2, 5],
            vec![1, 3, 4],
            vec![1, 2, 3, 4],
            vec![1, 2, 5, 3, 4],
            vec![1, 2, 5, 1, 3, 4],
            vec![1, 2, 3, 4, 1, 2, 5],
            vec![1, 2, 5, 1, 2, 5, 3, 4],
            vec![1, 2, 5, 1, 2, 5, 1, 3, 4],
        ];
        assert_eq!(seqs, expected);
    }
}
