//! Variance sweeps over system size.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::io::{parse_observable, parse_state, SweepConfig, SweepRow};
use crate::protocol::{build_protocol, ProtocolId, SizeParams};
use crate::shadows::{shot_values, ShadowEstimator};
use crate::variance::{
    bound_inf, bound_l2, exact_variance_local_pauli, exact_variance_projector, exact_variance_zsym, pauli_letters,
    Empirical,
};

/// A sweep row plus the delta-method standard error of its variance.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub row: SweepRow,
    pub variance_stderr: f64,
}

impl SweepPoint {
    /// Empirical variance ≤ min(bound_l2, bound_inf) + k·stderr.
    pub fn within_bounds(&self, sigmas: f64) -> bool {
        let r = &self.row;
        r.empirical_variance <= r.bound_l2.min(r.bound_inf) + sigmas * self.variance_stderr + 1e-9
    }
}

/// Size parameters for a sweep coordinate: qubit count for qubit protocols and
/// global-haar, point count for sn-permutation, dimension otherwise.
pub fn sweep_size(id: ProtocolId, n: usize) -> SizeParams {
    if id.sized_by_qubits() || matches!(id, ProtocolId::GlobalHaar | ProtocolId::SnPermutation) {
        SizeParams::qubits(n)
    } else {
        SizeParams::dim(n)
    }
}

/// One row per (protocol, observable, n), in grid order. The state for size n
/// is drawn with seed `state_seed + n`; snapshots use `seed`.
pub fn run_sweep(cfg: &SweepConfig, timing: bool) -> Result<Vec<SweepPoint>> {
    if cfg.snapshots < 2 {
        return Err(Error::Config("sweep needs at least two snapshots per point".into()));
    }
    let mut out = Vec::new();
    for p in &cfg.protocols {
        let id: ProtocolId = p.parse()?;
        for obs in &cfg.observables {
            for &n in &cfg.n {
                let start = Instant::now();
                let protocol = build_protocol(id, &sweep_size(id, n))?;
                let spec = protocol.spec()?;
                let dim = protocol.dim();
                let state = parse_state(&cfg.state, dim, cfg.state_seed.unwrap_or(cfg.seed).wrapping_add(n as u64))?;
                let o = parse_observable(obs, dim)?;
                let est = ShadowEstimator::new(&protocol, &o)?;
                let values = shot_values(&protocol, &state, &est, cfg.snapshots, cfg.seed)?;
                let emp = Empirical::from_values(&values);
                let rho = state.density_matrix();
                let exact = match id {
                    ProtocolId::Su2Tensor if o.name == "zsym" && n % 2 == 0 => Some(exact_variance_zsym(&rho, n)?),
                    ProtocolId::Su2Tensor if o.name.starts_with("proj[") => {
                        let eta = crate::rep::young::Partition::parse(o.name.trim_start_matches("proj"))?;
                        Some(exact_variance_projector(&rho, &eta)?)
                    }
                    ProtocolId::LocalClifford => {
                        pauli_letters(&o, n).map(|s| exact_variance_local_pauli(&rho, &s)).transpose()?
                    }
                    _ => None,
                };
                let row = SweepRow {
                    protocol: id.to_string(),
                    observable: obs.clone(),
                    n,
                    samples: cfg.snapshots,
                    mean: emp.mean,
                    empirical_variance: emp.variance,
                    bound_l2: bound_l2(spec, &o.matrix),
                    bound_inf: bound_inf(spec, &o.matrix)?,
                    exact,
                    runtime: timing.then(|| start.elapsed().as_secs_f64()),
                };
                out.push(SweepPoint { row, variance_stderr: emp.variance_stderr });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(protocols: &[&str], observables: &[&str], n: &[usize]) -> SweepConfig {
        SweepConfig {
            protocols: protocols.iter().map(|s| s.to_string()).collect(),
            observables: observables.iter().map(|s| s.to_string()).collect(),
            n: n.to_vec(),
            snapshots: 2000,
            seed: 4,
            state: "haar".into(),
            state_seed: None,
            out: None,
            plot: false,
        }
    }

    #[test]
    fn small_sweep_respects_bounds() {
        let pts = run_sweep(&cfg(&["su2-tensor", "local-clifford"], &["zsym", "zall"], &[2, 3]), false).unwrap();
        assert_eq!(pts.len(), 8);
        for p in &pts {
            assert!(p.within_bounds(5.0), "{p:?}");
            assert!(p.row.runtime.is_none());
        }
        let lc = pts.iter().find(|p| p.row.protocol == "local-clifford" && p.row.observable == "zall" && p.row.n == 3).unwrap();
        let exact = lc.row.exact.unwrap();
        assert!((lc.row.empirical_variance - exact).abs() < 5.0 * lc.variance_stderr, "{lc:?}");
    }

    #[test]
    fn sweep_is_deterministic_and_empty_grid_is_empty() {
        let c = cfg(&["su2-tensor"], &["projsym"], &[2, 4]);
        assert_eq!(run_sweep(&c, false).unwrap(), run_sweep(&c, false).unwrap());
        assert!(run_sweep(&cfg(&["su2-tensor"], &["zsym"], &[]), false).unwrap().is_empty());
    }
}
