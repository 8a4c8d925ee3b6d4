//! Synthesis of an equivariant cubic vector field realizing a network.
//!
//! The field has the form `dx_k/dt = x_k (σ_k + Σ_l a_{kl} x_l²)`. It is odd
//! in every coordinate, so all coordinate subspaces are flow-invariant, and
//! its Jacobian at an axial equilibrium is diagonal, which lets the
//! prescribed eigenvalue table be matched exactly.

use crate::model::{Mode, Network};
use crate::simulate::{self, SimError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RealizeError {
    #[error("realization requires an AC-mode network")]
    NotAcMode,
    #[error("equilibrium {id} has radial eigenvalue {value} >= 0")]
    InconsistentRadial { id: usize, value: f64 },
    #[error("equilibrium {id} sits at position {position}, synthesis assumes 1.0")]
    PositionNotUnit { id: usize, position: f64 },
    #[error("field file error: {0}")]
    FieldFile(String),
}

/// A cubic interaction field `dx_k/dt = x_k (σ_k + Σ_l a_{kl} x_l²)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VectorField {
    pub n: usize,
    pub sigma: Vec<f64>,
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
}

impl VectorField {
    /// Evaluates the field. The product form `x_k * (...)` keeps exact
    /// zeros: coordinates starting at 0.0 produce derivative 0.0 bitwise.
    pub fn eval(&self, x: &[f64], dx: &mut [f64]) {
        for k in 0..self.n {
            let mut s = self.sigma[k];
            for l in 0..self.n {
                s += self.a[k][l] * x[l] * x[l];
            }
            dx[k] = x[k] * s;
        }
    }

    /// Central-difference Jacobian.
    pub fn jacobian_fd(&self, x: &[f64], h: f64) -> Vec<Vec<f64>> {
        let n = self.n;
        let mut jac = vec![vec![0.0; n]; n];
        let mut fp = vec![0.0; n];
        let mut fm = vec![0.0; n];
        let mut xp = x.to_vec();
        for j in 0..n {
            let orig = xp[j];
            xp[j] = orig + h;
            self.eval(&xp, &mut fp);
            xp[j] = orig - h;
            self.eval(&xp, &mut fm);
            xp[j] = orig;
            for i in 0..n {
                jac[i][j] = (fp[i] - fm[i]) / (2.0 * h);
            }
        }
        jac
    }

    pub fn to_json(&self) -> String {
        let value = serde_json::json!({
            "schema_version": "1",
            "n": self.n,
            "sigma": self.sigma,
            "A": self.a,
        });
        serde_json::to_string_pretty(&value).expect("field json")
    }

    pub fn from_json(text: &str) -> Result<VectorField, RealizeError> {
        let mut value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| RealizeError::FieldFile(e.to_string()))?;
        if let Some(obj) = value.as_object_mut() {
            obj.remove("schema_version");
        }
        let field: VectorField =
            serde_json::from_value(value).map_err(|e| RealizeError::FieldFile(e.to_string()))?;
        if field.sigma.len() != field.n
            || field.a.len() != field.n
            || field.a.iter().any(|row| row.len() != field.n)
        {
            return Err(RealizeError::FieldFile(
                "sigma/A dimensions do not match n".into(),
            ));
        }
        Ok(field)
    }
}

/// Builds the field whose Jacobian at each equilibrium `ξ_j = e_{axis(j)}`
/// is `diag(λ_{j1}, ..., λ_{jn})`.
///
/// With the equilibrium at coordinate value 1: `σ_{axis(j)} = -λ_{jj}/2` and
/// `a_{axis(j),axis(j)} = -σ_{axis(j)}` pin the radial eigenvalue, and
/// `a_{k,axis(j)} = λ_{jk} - σ_k` pins the off-axis ones. Axes without an
/// equilibrium are uniformly damped with -1 entries.
pub fn synthesize_field(net: &Network) -> Result<VectorField, RealizeError> {
    if net.mode != Mode::Ac {
        return Err(RealizeError::NotAcMode);
    }
    for eq in &net.equilibria {
        if (eq.position - 1.0).abs() > 1e-12 {
            return Err(RealizeError::PositionNotUnit {
                id: eq.id,
                position: eq.position,
            });
        }
        let radial = net.lambda(eq.id, eq.axis);
        if radial >= 0.0 {
            return Err(RealizeError::InconsistentRadial {
                id: eq.id,
                value: radial,
            });
        }
    }

    let n = net.n;
    let mut sigma = vec![-1.0; n];
    let mut a = vec![vec![-1.0; n]; n];
    for eq in &net.equilibria {
        sigma[eq.axis - 1] = -net.lambda(eq.id, eq.axis) / 2.0;
    }
    for eq in &net.equilibria {
        let col = eq.axis - 1;
        for k in 1..=n {
            a[k - 1][col] = if k == eq.axis {
                -sigma[col]
            } else {
                net.lambda(eq.id, k) - sigma[k - 1]
            };
        }
    }
    Ok(VectorField { n, sigma, a })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CertStatus {
    Pass,
    Timeout { t_max: f64 },
    InteriorEquilibrium { point: Vec<f64> },
}

#[derive(Debug, Clone, Serialize)]
pub struct ConnectionCert {
    pub from: usize,
    pub to: usize,
    pub dim: usize,
    pub status: CertStatus,
    /// Convergence times of the traced trajectories.
    pub times: Vec<f64>,
}

/// Certifies each connection of `net` in `field` by integration: seeds just
/// off the source equilibrium inside the connection subspace must reach the
/// target (or, for a 2D fan, the m-point leg) within `1e-6` before
/// `t_max = 1e4`. Planes of 1D connections are additionally screened for
/// interior equilibria algebraically.
pub fn certify_connections(
    field: &VectorField,
    net: &Network,
) -> Result<Vec<ConnectionCert>, SimError> {
    const T_MAX: f64 = 1e4;
    const TOL: f64 = 1e-6;
    let mut out = Vec::new();
    for conn in &net.connections {
        if conn.dim == 1 {
            let p = net.axis_of(conn.from);
            let q = net.axis_of(conn.to);
            if let Some(point) = interior_equilibrium(field, p, q) {
                out.push(ConnectionCert {
                    from: conn.from,
                    to: conn.to,
                    dim: conn.dim,
                    status: CertStatus::InteriorEquilibrium { point },
                    times: Vec::new(),
                });
                continue;
            }
        }

        let mut targets = vec![simulate::equilibrium_point(net, conn.to)];
        if conn.dim == 2 {
            // The fan boundary may route through the m-point of the clique.
            for k in &conn.subspace {
                if *k != net.axis_of(conn.from) && *k != net.axis_of(conn.to) {
                    if let Some(m) = net.on_axis(*k) {
                        targets.push(simulate::equilibrium_point(net, m.id));
                    }
                }
            }
        }

        let mut status = CertStatus::Pass;
        let mut times = Vec::new();
        for x0 in simulate::connection_seeds(net, conn, 1e-4) {
            let traj = simulate::integrate_until(field, &x0, T_MAX, 1e-9, 1e-12, |_, x| {
                targets.iter().any(|p| simulate::max_norm_dist(x, p) < TOL)
            })?;
            if traj.stopped {
                times.push(traj.samples.last().unwrap().0);
            } else {
                status = CertStatus::Timeout { t_max: T_MAX };
                break;
            }
        }
        out.push(ConnectionCert {
            from: conn.from,
            to: conn.to,
            dim: conn.dim,
            status,
            times,
        });
    }
    Ok(out)
}

/// Solves `σ + A u = 0` on the (p, q) coordinate plane (in `u = x²`
/// variables). A solution with both components positive is an interior
/// equilibrium of the open quadrant.
fn interior_equilibrium(field: &VectorField, p: usize, q: usize) -> Option<Vec<f64>> {
    let (i, j) = (p - 1, q - 1);
    let (app, apq, aqp, aqq) = (field.a[i][i], field.a[i][j], field.a[j][i], field.a[j][j]);
    let det = app * aqq - apq * aqp;
    if det.abs() < 1e-12 {
        return None;
    }
    let (bp, bq) = (-field.sigma[i], -field.sigma[j]);
    let up = (bp * aqq - apq * bq) / det;
    let uq = (app * bq - bp * aqp) / det;
    if up > 1e-12 && uq > 1e-12 {
        let mut point = vec![0.0; field.n];
        point[i] = up.sqrt();
        point[j] = uq.sqrt();
        Some(point)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::load_network;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fixture(name: &str) -> Network {
        let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/");
        load_network(format!("{dir}{name}")).unwrap()
    }

    #[test]
    fn ex51_synthesis_matches_hand_values() {
        let net = fixture("ex51.json");
        let field = synthesize_field(&net).unwrap();
        assert_eq!(field.sigma, vec![0.5, 0.5, 0.5, 0.5]);
        assert_eq!(field.a[0][0], -0.5);
        assert_eq!(field.a[1][0], 0.5);
        assert_eq!(field.a[2][0], 0.5);
        assert_eq!(field.a[3][0], -3.5);
    }

    #[test]
    fn jacobian_is_diagonal_and_matches_lambda() {
        for name in ["ex51.json", "ex52.json", "ex55_y5.json", "ex55_y6.json"] {
            let net = fixture(name);
            let field = synthesize_field(&net).unwrap();
            for eq in &net.equilibria {
                let x = simulate::equilibrium_point(&net, eq.id);
                let jac = field.jacobian_fd(&x, 1e-6);
                for i in 1..=net.n {
                    for j in 1..=net.n {
                        let want = if i == j { net.lambda(eq.id, i) } else { 0.0 };
                        let got = jac[i - 1][j - 1];
                        assert!(
                            (got - want).abs() <= 1e-6 * want.abs().max(1.0),
                            "{name} ξ_{}: J[{i}][{j}] = {got}, want {want}",
                            eq.id
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn subspaces_are_invariant() {
        let net = fixture("ex51.json");
        let field = synthesize_field(&net).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut dx = vec![0.0; net.n];
        for conn in &net.connections {
            for _ in 0..100 {
                let mut x = vec![0.0; net.n];
                for k in &conn.subspace {
                    x[k - 1] = rng.gen_range(0.0..1.5);
                }
                field.eval(&x, &mut dx);
                for k in 1..=net.n {
                    if !conn.subspace.contains(&k) {
                        assert_eq!(dx[k - 1], 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn positive_radial_is_rejected() {
        let mut net = fixture("ex51.json");
        net.lambda.get_mut(&1).unwrap()[0] = 1.0;
        assert!(matches!(
            synthesize_field(&net),
            Err(RealizeError::InconsistentRadial { id: 1, .. })
        ));
    }

    #[test]
    fn ex51_connections_all_certify() {
        let net = fixture("ex51.json");
        let field = synthesize_field(&net).unwrap();
        let report = certify_connections(&field, &net).unwrap();
        assert_eq!(report.len(), 5);
        for cert in &report {
            assert_eq!(cert.status, CertStatus::Pass, "{}->{}", cert.from, cert.to);
        }
    }

    #[test]
    fn planted_interior_equilibrium_fails_certification() {
        let net = fixture("ex51.json");
        let mut field = synthesize_field(&net).unwrap();
        // Plant a positive root of σ + A u = 0 at u = (0.49, 0.49) on the
        // (3,4) plane, i.e. an interior equilibrium at (0.7, 0.7).
        let target = 0.49;
        field.a[2][3] = -(field.sigma[2] + field.a[2][2] * target) / target;
        field.a[3][2] = -(field.sigma[3] + field.a[3][3] * target) / target;
        let report = certify_connections(&field, &net).unwrap();
        let cert = report.iter().find(|c| c.from == 3 && c.to == 4).unwrap();
        match &cert.status {
            CertStatus::InteriorEquilibrium { point } => {
                assert!((point[2] - 0.7).abs() < 1e-9);
                assert!((point[3] - 0.7).abs() < 1e-9);
            }
            other => panic!("expected interior equilibrium, got {other:?}"),
        }
    }

    #[test]
    fn field_json_round_trips() {
        let net = fixture("ex51.json");
        let field = synthesize_field(&net).unwrap();
        let text = field.to_json();
        let back = VectorField::from_json(&text).unwrap();
        assert_eq!(field.sigma, back.sigma);
        assert_eq!(field.a, back.a);
    }
}
