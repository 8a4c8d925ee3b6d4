//! Consolidated analysis report and its JSON/markdown rendering, plus the
//! CSV/SVG outputs of the simulator.

use crate::classify::{AcReport, DeltaClique, StructureDecomposition};
use crate::model::{Mode, Network};
use crate::simulate::{ExperimentReport, TrajectoryReport};
use crate::stability::{self, RhoEstimate, StabilityError, StabilityVerdict};
use crate::symbolic::Expr;
use serde::Serialize;
use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

/// One elementary cycle with its symbolic exponent product.
#[derive(Debug, Clone, Serialize)]
pub struct CycleCondition {
    pub nodes: Vec<usize>,
    pub condition: String,
    pub product: f64,
    pub satisfied: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Analysis {
    pub rho: BTreeMap<usize, RhoEstimate>,
    pub thas: StabilityVerdict,
    pub thas2: StabilityVerdict,
    pub lv_aux: StabilityVerdict,
    pub conditions: Vec<CycleCondition>,
}

impl Analysis {
    pub fn analytic_stable(&self) -> bool {
        self.thas.stable() || self.thas2.stable()
    }
}

/// Runs the three criteria and renders the per-cycle conditions.
pub fn analyze(net: &Network, tol: f64) -> Result<Analysis, StabilityError> {
    let rho = stability::rho_table(net)?;
    let thas = stability::check_thas(net, tol)?;
    let thas2 = stability::check_thas2(net, tol)?;
    let lv_aux = stability::check_lv_aux(net)?;
    let mut conditions = Vec::new();
    for cycle in stability::enumerate_cycles(net)? {
        let product: f64 = cycle.iter().map(|id| rho[id].value).product();
        let expr = Expr::Mul(cycle.iter().map(|id| rho[id].symbolic.clone()).collect());
        conditions.push(CycleCondition {
            nodes: cycle,
            condition: format!("{} > 1", expr.render()),
            product,
            satisfied: product > 1.0 + tol,
        });
    }
    Ok(Analysis {
        rho,
        thas,
        thas2,
        lv_aux,
        conditions,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Agreement {
    Unset,
    Consistent,
    Inconsistent,
}

#[derive(Debug, Clone, Serialize)]
pub struct NetworkSummary {
    pub n: usize,
    pub mode: String,
    pub equilibria: usize,
    pub connections: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Classification {
    pub ac_pass: bool,
    pub report: AcReport,
    pub cliques: Vec<DeltaClique>,
    pub decompositions: Vec<StructureDecomposition>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConsolidatedReport {
    pub schema_version: String,
    pub network: NetworkSummary,
    pub classification: Option<Classification>,
    pub analysis: Option<Analysis>,
    pub empirical: Option<ExperimentReport>,
    pub agreement: Agreement,
}

impl ConsolidatedReport {
    pub fn new(net: &Network) -> Self {
        ConsolidatedReport {
            schema_version: "1".into(),
            network: NetworkSummary {
                n: net.n,
                mode: match net.mode {
                    Mode::Ac => "ac".into(),
                    Mode::Extended => "extended".into(),
                },
                equilibria: net.equilibria.len(),
                connections: net.connections.len(),
            },
            classification: None,
            analysis: None,
            empirical: None,
            agreement: Agreement::Unset,
        }
    }

    pub fn settle_agreement(&mut self) {
        let (Some(analysis), Some(empirical)) = (&self.analysis, &self.empirical) else {
            self.agreement = Agreement::Unset;
            return;
        };
        let expected = !analysis.analytic_stable()
            || empirical.result == crate::simulate::EmpiricalResult::EmpiricallyStable;
        self.agreement = if expected {
            Agreement::Consistent
        } else {
            Agreement::Inconsistent
        };
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report json")
    }

    pub fn to_markdown(&self) -> String {
        let mut md = String::new();
        md.push_str("# Heteroclinic network report\n\n");
        md.push_str(&format!(
            "- ambient dimension: {}\n- mode: {}\n- equilibria: {}\n- connections: {}\n\n",
            self.network.n, self.network.mode, self.network.equilibria, self.network.connections
        ));

        if let Some(cls) = &self.classification {
            md.push_str("## Classification\n\n");
            md.push_str(&format!(
                "- ac axioms: {}\n",
                if cls.ac_pass { "pass" } else { "violated" }
            ));
            for v in &cls.report.violations {
                md.push_str(&format!("  - {v}\n"));
            }
            if !cls.cliques.is_empty() {
                md.push_str("- Δ-cliques:");
                for c in &cls.cliques {
                    md.push_str(&format!(" {c}"));
                }
                md.push('\n');
            }
            for d in &cls.decompositions {
                md.push_str(&format!(
                    "- structure: case {:?}, base cycle {:?}, groups {:?}\n",
                    d.case, d.base_cycle, d.groups
                ));
            }
            md.push('\n');
        }

        if let Some(analysis) = &self.analysis {
            md.push_str("## Exponents\n\n");
            for (id, rho) in &analysis.rho {
                md.push_str(&format!(
                    "- rho_{id} = {} = {}\n",
                    rho.symbolic.render(),
                    rho.value
                ));
            }
            md.push_str("\n## Stability conditions\n\n");
            for c in &analysis.conditions {
                md.push_str(&format!(
                    "- cycle {:?}: {} [product = {}, {}]\n",
                    c.nodes,
                    c.condition,
                    c.product,
                    if c.satisfied {
                        "satisfied"
                    } else {
                        "not satisfied"
                    }
                ));
            }
            md.push_str("\n## Verdicts\n\n");
            for v in [&analysis.thas, &analysis.thas2, &analysis.lv_aux] {
                md.push_str(&format!("- {:?}: {:?}", v.theorem, v.result));
                if !v.witnesses.is_empty() {
                    md.push_str(&format!(
                        " (witnesses: {})",
                        v.witnesses
                            .iter()
                            .map(|w| format!(
                                "{:?} product {}{}",
                                w.nodes,
                                w.product,
                                if w.marginal { " [marginal]" } else { "" }
                            ))
                            .collect::<Vec<_>>()
                            .join("; ")
                    ));
                }
                md.push('\n');
            }
            md.push('\n');
        }

        if let Some(emp) = &self.empirical {
            md.push_str("## Empirical experiment\n\n");
            md.push_str(&format!(
                "- result: {:?} ({} trajectories, epsilon = {}, seed = {})\n",
                emp.result,
                emp.trajectories.len(),
                emp.config.epsilon,
                emp.config.seed
            ));
            let converged = emp
                .trajectories
                .iter()
                .filter(|t| t.class == crate::simulate::TrajectoryClass::Converged)
                .count();
            md.push_str(&format!(
                "- converged: {converged}/{}\n\n",
                emp.trajectories.len()
            ));
        }

        md.push_str(&format!("## Agreement\n\n- {:?}\n", self.agreement));
        md
    }
}

/// Writes `time, x1..xn, frak_d` rows for one trajectory.
pub fn write_trajectory_csv(
    dir: &Path,
    index: usize,
    net: &Network,
    report: &TrajectoryReport,
) -> std::io::Result<()> {
    let Some(traj) = &report.trajectory else {
        return Ok(());
    };
    let mut file = std::fs::File::create(dir.join(format!("trajectory_{index:03}.csv")))?;
    let header: Vec<String> = std::iter::once("time".to_string())
        .chain((1..=net.n).map(|k| format!("x{k}")))
        .chain(std::iter::once("frak_d".to_string()))
        .collect();
    writeln!(file, "{}", header.join(","))?;
    for (t, x) in &traj.samples {
        let mut row = vec![format!("{t}")];
        row.extend(x.iter().map(|v| format!("{v}")));
        row.push(format!("{}", crate::simulate::frak_distance(x, net)));
        writeln!(file, "{}", row.join(","))?;
    }
    Ok(())
}

/// One polyline per trajectory: ENTER-event 𝔡 against event index, on a
/// log scale.
pub fn write_distance_svg(dir: &Path, report: &ExperimentReport) -> std::io::Result<()> {
    let (w, h, pad) = (640.0, 400.0, 40.0);
    let mut body = String::new();
    let max_events = report
        .trajectories
        .iter()
        .map(|t| t.enter_frak_d.len())
        .max()
        .unwrap_or(0)
        .max(2);
    let floor = 1e-16f64;
    let (lo, hi) = report
        .trajectories
        .iter()
        .flat_map(|t| t.enter_frak_d.iter())
        .fold((0.0f64, -300.0f64), |(lo, hi), d| {
            let v = d.max(floor).log10();
            (lo.min(v), hi.max(v))
        });
    let (lo, hi) = if hi <= lo { (-16.0, 0.0) } else { (lo, hi) };
    for (i, t) in report.trajectories.iter().enumerate() {
        if t.enter_frak_d.is_empty() {
            continue;
        }
        let pts: Vec<String> = t
            .enter_frak_d
            .iter()
            .enumerate()
            .map(|(j, d)| {
                let x = pad + (w - 2.0 * pad) * j as f64 / (max_events - 1) as f64;
                let v = d.max(floor).log10();
                let y = h - pad - (h - 2.0 * pad) * (v - lo) / (hi - lo);
                format!("{x:.1},{y:.1}")
            })
            .collect();
        let hue = (i * 47) % 360;
        body.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"hsl({hue},70%,40%)\" stroke-width=\"1\" points=\"{}\"/>\n",
            pts.join(" ")
        ));
    }
    let svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\">\n\
         <rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n\
         <text x=\"{pad}\" y=\"20\" font-size=\"12\">log10 of complementary distance at box entries vs event index</text>\n\
         {body}</svg>\n"
    );
    std::fs::write(dir.join("enter_distances.svg"), svg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::load_network;

    fn fixture(name: &str) -> Network {
        let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/");
        load_network(format!("{dir}{name}")).unwrap()
    }

    #[test]
    fn ex51_markdown_pins_the_symbolic_condition() {
        let net = fixture("ex51.json");
        let mut report = ConsolidatedReport::new(&net);
        report.analysis = Some(analyze(&net, 1e-9).unwrap());
        let md = report.to_markdown();
        assert!(md.contains("rho_1 = -λ_{1,4}/max(λ_{1,2},λ_{1,3}) = 3"));
        assert!(md.contains(
            "(-λ_{1,4}/max(λ_{1,2},λ_{1,3}))*1*(-max(λ_{3,1},λ_{3,2})/λ_{3,4})\
             *min(-λ_{4,3}/λ_{4,1},1-λ_{4,2}/λ_{4,1}) > 1"
        ));
    }

    #[test]
    fn extended_examples_render_their_conditions() {
        let net = fixture("ex53.json");
        let mut report = ConsolidatedReport::new(&net);
        report.analysis = Some(analyze(&net, 1e-9).unwrap());
        let md = report.to_markdown();
        assert!(md.contains("-max(λ_{1,3},λ_{1,4})/λ_{1,2}"));
        assert!(md.contains("-λ_{2,1}/max(λ_{2,3},λ_{2,4})"));

        let net = fixture("ex54.json");
        let mut report = ConsolidatedReport::new(&net);
        report.analysis = Some(analyze(&net, 1e-9).unwrap());
        let md = report.to_markdown();
        assert!(md.contains("λ_{5,2}/(λ_{5,2}-λ_{5,1})"));
        assert!(md.contains("min(-λ_{3,2}/λ_{3,1},1)"));
    }

    #[test]
    fn agreement_stays_unset_without_empirical_data() {
        let net = fixture("ex51.json");
        let mut report = ConsolidatedReport::new(&net);
        report.analysis = Some(analyze(&net, 1e-9).unwrap());
        report.settle_agreement();
        assert_eq!(report.agreement, Agreement::Unset);
    }
}
