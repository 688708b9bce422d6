use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::kinematics::{centerline, Kinematics};
use super::law::ClampKind;
use super::{ChainSpec, LoadCase, PrbmError, TipForce};
use crate::domain::Curve3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Residual 2-norm accepted as equilibrium, N·m.
    pub tol: f64,
    pub max_iterations: usize,
    /// Central-difference step for the Jacobian, rad.
    pub fd_step: f64,
    pub max_halvings: usize,
    /// Largest change of any coordinate in one step, rad.
    pub max_step: f64,
    pub initial_q: Option<Vec<f64>>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { tol: 1e-8, max_iterations: 200, fd_step: 1e-6, max_halvings: 30, max_step: 0.5, initial_q: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClampEvent {
    pub joint: usize,
    pub axis: usize,
    pub kind: ClampKind,
    pub value: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumState {
    /// Joint coordinates, rad; `dof` consecutive entries per joint.
    pub q: Vec<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Range violations at the returned configuration.
    pub clamp_events: Vec<ClampEvent>,
    pub centerline: Curve3,
}

impl EquilibriumState {
    /// A joint sits outside its sampled operating range at equilibrium.
    pub fn is_saturated(&self) -> bool {
        !self.clamp_events.is_empty()
    }
}

/// Generalized efforts of gravity and the tip force on every joint
/// coordinate, N·m.
pub fn load_efforts(chain: &ChainSpec, load: &LoadCase, q: &[f64]) -> Vec<f64> {
    let k = Kinematics::compute(chain, q);
    load_efforts_from(chain, load, &k)
}

fn load_efforts_from(chain: &ChainSpec, load: &LoadCase, k: &Kinematics) -> Vec<f64> {
    let dof = chain.joint_type.dof();
    let n = chain.joint_count();
    let tip_force = load.tip_force_at(&k.tip);
    // suffix sums of force and of position × force
    let mut sum_f = tip_force;
    let mut sum_m = k.tip.coords.cross(&tip_force);
    if let Some(m) = load.tip_moment {
        // N·m → N·mm
        sum_m += Vector3::from(m) * 1e3;
    }
    let mut out = vec![0.0; n * dof];
    for j in (0..n).rev() {
        if load.gravity_on {
            let f: Vector3<f64> = chain.gravity * chain.link_masses[j];
            sum_f += f;
            sum_m += k.link_midpoints[j].coords.cross(&f);
        }
        // N·mm → N·m
        let moment = (sum_m - k.joints[j].coords.cross(&sum_f)) * 1e-3;
        for a in 0..dof {
            out[j * dof + a] = k.axes[j * dof + a].dot(&moment);
        }
    }
    out
}

fn law_efforts(chain: &ChainSpec, load: &LoadCase, q: &[f64], segs: &[usize]) -> Vec<f64> {
    let dof = chain.joint_type.dof();
    q.iter()
        .enumerate()
        .map(|(i, &qi)| {
            let s = segs[i / dof];
            chain.segments[s].law.axes[i % dof].eval(load.segment_actuation(s), qi)
        })
        .collect()
}

/// `τ_law + τ_gravity + τ_tip` for every joint coordinate.
pub fn residual(chain: &ChainSpec, load: &LoadCase, q: &[f64]) -> Vec<f64> {
    split_residual(chain, load, q, &chain.joint_segments()).1
}

/// Law efforts alone and the full residual.
fn split_residual(chain: &ChainSpec, load: &LoadCase, q: &[f64], segs: &[usize]) -> (Vec<f64>, Vec<f64>) {
    let laws = law_efforts(chain, load, q, segs);
    let r = laws.iter().zip(load_efforts(chain, load, q)).map(|(a, b)| a + b).collect();
    (laws, r)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Derivative of the load efforts for world-fixed forces and moments.
///
/// Turning coordinate `c` rotates everything distal to it about its axis,
/// so with distal sums `S = ΣF`, `A = Σ(x − p)Fᵀ` and moment `M` about the
/// joint point, `∂τ_r/∂q_c = (a_c × a_r)·M + a_rᵀ A a_c − (a_r·a_c) tr A`,
/// taking the sums at the more distal of the two joints and dropping the
/// first term when `c` lies distal to `r`.
pub(crate) fn load_jacobian(chain: &ChainSpec, load: &LoadCase, k: &Kinematics) -> DMatrix<f64> {
    let dof = chain.joint_type.dof();
    let n = chain.joint_count();
    let m = n * dof;
    let tip_force = load.tip_force_at(&k.tip);
    let mut sum_f = tip_force;
    let mut sum_x = k.tip.coords * tip_force.transpose();
    let mut sum_m = k.tip.coords.cross(&tip_force);
    if let Some(mo) = load.tip_moment {
        sum_m += Vector3::from(mo) * 1e3;
    }
    let mut moments = vec![Vector3::zeros(); n];
    let mut spreads = vec![Matrix3::zeros(); n];
    for j in (0..n).rev() {
        if load.gravity_on {
            let f: Vector3<f64> = chain.gravity * chain.link_masses[j];
            let x = k.link_midpoints[j].coords;
            sum_f += f;
            sum_x += x * f.transpose();
            sum_m += x.cross(&f);
        }
        let p = k.joints[j].coords;
        moments[j] = sum_m - p.cross(&sum_f);
        spreads[j] = sum_x - p * sum_f.transpose();
    }
    let mut jac = DMatrix::zeros(m, m);
    for r in 0..m {
        let ar = k.axes[r];
        for c in 0..m {
            let ac = k.axes[c];
            let j = r.max(c) / dof;
            let a = &spreads[j];
            let mut v = ar.dot(&(a * ac)) - ar.dot(&ac) * a.trace();
            if c <= r {
                v += ac.cross(&ar).dot(&moments[j]);
            }
            jac[(r, c)] = v * 1e-3;
        }
    }
    jac
}

fn jacobian(chain: &ChainSpec, load: &LoadCase, q: &[f64], laws_at_q: &[f64], segs: &[usize], h: f64) -> DMatrix<f64> {
    let m = q.len();
    let dof = chain.joint_type.dof();
    let mut jac = if matches!(load.tip_force, TipForce::Toward { .. }) {
        let mut jac = DMatrix::zeros(m, m);
        let mut probe = q.to_vec();
        for c in 0..m {
            probe[c] = q[c] + h;
            let up = load_efforts(chain, load, &probe);
            probe[c] = q[c] - h;
            let down = load_efforts(chain, load, &probe);
            probe[c] = q[c];
            for r in 0..m {
                jac[(r, c)] = (up[r] - down[r]) / (2.0 * h);
            }
        }
        jac
    } else {
        load_jacobian(chain, load, &Kinematics::compute(chain, q))
    };
    for c in 0..m {
        // each law depends on its own coordinate only
        let s = segs[c / dof];
        let law = &chain.segments[s].law.axes[c % dof];
        let p = load.segment_actuation(s);
        jac[(c, c)] += (law.eval(p, q[c] + h) - laws_at_q[c]) / h;
    }
    jac
}

fn clamp_events(chain: &ChainSpec, load: &LoadCase, q: &[f64]) -> Vec<ClampEvent> {
    let dof = chain.joint_type.dof();
    let segs = chain.joint_segments();
    let mut out = Vec::new();
    for (i, &qi) in q.iter().enumerate() {
        let s = segs[i / dof];
        for (kind, value, bound) in chain.segments[s].law.axes[i % dof].violations(load.segment_actuation(s), qi) {
            out.push(ClampEvent { joint: i / dof, axis: i % dof, kind, value, bound });
        }
    }
    out
}

fn finish(chain: &ChainSpec, load: &LoadCase, q: Vec<f64>, rn: f64, iterations: usize, converged: bool) -> EquilibriumState {
    EquilibriumState {
        clamp_events: clamp_events(chain, load, &q),
        centerline: centerline(chain, &q),
        q,
        residual_norm: rn,
        iterations,
        converged,
    }
}

/// Damped Newton iteration on the joint-effort balance.
///
/// Steps are capped at `max_step` per coordinate, then halved until the
/// residual norm decreases sufficiently; if no halving succeeds a
/// steepest-descent step on `½‖r‖²` is tried instead.
pub fn solve_equilibrium(chain: &ChainSpec, load: &LoadCase, cfg: &SolverConfig) -> Result<EquilibriumState, PrbmError> {
    chain.validate()?;
    load.validate(chain)?;
    let m = chain.dof();
    let segs = chain.joint_segments();
    let mut q = match &cfg.initial_q {
        Some(q0) if q0.len() == m => q0.clone(),
        Some(q0) => return Err(PrbmError::InvalidLoad(format!("initial q has {} entries, chain has {m}", q0.len()))),
        None => vec![0.0; m],
    };
    let (mut lv, mut r) = split_residual(chain, load, &q, &segs);
    let mut rn = norm(&r);

    let try_step = |q: &[f64], dir: &[f64], t0: f64, rn: f64| -> Option<(Vec<f64>, Vec<f64>, Vec<f64>, f64)> {
        let mut t = t0;
        for _ in 0..=cfg.max_halvings {
            let cand: Vec<f64> = q.iter().zip(dir).map(|(a, d)| a + t * d).collect();
            let (lc, rc) = split_residual(chain, load, &cand, &segs);
            let nc = norm(&rc);
            if nc.is_finite() && nc < (1.0 - 1e-4 * t.min(1.0)) * rn {
                return Some((cand, lc, rc, nc));
            }
            t *= 0.5;
        }
        None
    };

    for it in 0..cfg.max_iterations {
        if rn <= cfg.tol {
            return Ok(finish(chain, load, q, rn, it, true));
        }
        let jac = jacobian(chain, load, &q, &lv, &segs, cfg.fd_step);
        let rv = DVector::from_column_slice(&r);
        let newton = jac.clone().lu().solve(&(-&rv)).filter(|d| d.iter().all(|x| x.is_finite()));
        let mut accepted = None;
        if let Some(d) = newton {
            let scale = (cfg.max_step / d.amax()).min(1.0);
            let dir: Vec<f64> = d.iter().map(|x| x * scale).collect();
            accepted = try_step(&q, &dir, 1.0, rn);
        }
        if accepted.is_none() {
            let g = jac.tr_mul(&rv);
            let jg = &jac * &g;
            let denom = jg.norm_squared();
            if denom > 0.0 {
                let t0 = (g.norm_squared() / denom).min(cfg.max_step / g.amax().max(f64::MIN_POSITIVE));
                let dir: Vec<f64> = g.iter().map(|x| -x).collect();
                accepted = try_step(&q, &dir, t0, rn);
            }
        }
        match accepted {
            Some((qn, lnew, rnew, nn)) => {
                q = qn;
                lv = lnew;
                r = rnew;
                rn = nn;
            }
            None => {
                let best = finish(chain, load, q, rn, it, false);
                return Err(PrbmError::NonConvergence { iterations: it, residual_norm: rn, best: Box::new(best) });
            }
        }
    }
    if rn <= cfg.tol {
        return Ok(finish(chain, load, q, rn, cfg.max_iterations, true));
    }
    let best = finish(chain, load, q, rn, cfg.max_iterations, false);
    Err(PrbmError::NonConvergence { iterations: cfg.max_iterations, residual_norm: rn, best: Box::new(best) })
}

/// Solves the load cases in order, each warm-started from the last success.
pub fn sweep_loadcases(
    chain: &ChainSpec,
    loads: &[LoadCase],
    cfg: &SolverConfig,
) -> Vec<Result<EquilibriumState, PrbmError>> {
    let mut warm: Option<Vec<f64>> = cfg.initial_q.clone();
    loads
        .iter()
        .map(|load| {
            let c = SolverConfig { initial_q: warm.clone(), ..cfg.clone() };
            let res = solve_equilibrium(chain, load, &c);
            if let Ok(s) = &res {
                warm = Some(s.q.clone());
            }
            res
        })
        .collect()
}
