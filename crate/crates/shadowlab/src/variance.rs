//! Variance bounds, closed-form SU(2) variances and empirical second moments.

use serde::{Deserialize, Serialize};

use crate::bases::{partition_two_s, schur_basis, schur_block_offsets, spherical_entries, MeasurementBasis};
use crate::channel::{Averaging, ChannelSpec};
use crate::ensembles::GroupEnsemble;
use crate::error::{Error, Result};
use crate::linalg::{frobenius, hermitian_eig, spectral_norm_hermitian, ComplexMatrix, RandomStream};
use crate::protocol::{Protocol, ProtocolId};
use crate::rep::young::Partition;
use crate::shadows::{shot_values, Observable, QuantumState, ShadowEstimator};
use crate::stats::batch_means;

/// Relative tolerance for deciding that a projection vanishes.
const PART_TOL: f64 = 1e-9;

/// Σ_λ ‖O^λ‖²_F / a_λ over visible components.
pub fn bound_l2(spec: &ChannelSpec, o: &ComplexMatrix) -> f64 {
    spec.components
        .iter()
        .filter(|c| c.is_visible())
        .map(|c| frobenius(&c.project(o)).powi(2) / c.a_f64())
        .sum()
}

/// ‖Σ_λ O^λ / a_λ‖²_∞.
pub fn bound_inf(spec: &ChannelSpec, o: &ComplexMatrix) -> Result<f64> {
    let inv = spec.apply_inverse(o);
    let h = (&inv + inv.adjoint()).scale(0.5);
    Ok(spectral_norm_hermitian(&h)?.powi(2))
}

/// ‖O‖²_∞ / a_λ when O lies in one visible component and is either semidefinite or,
/// for Clifford-type and matchgate protocols, proportional to a Pauli string.
pub fn bound_special(spec: &ChannelSpec, o: &ComplexMatrix) -> Result<Option<f64>> {
    let scale = frobenius(o).max(1.0);
    let mut hit = None;
    for c in &spec.components {
        let p = c.project(o);
        if frobenius(&p) > PART_TOL * scale {
            if hit.is_some() {
                return Ok(None);
            }
            hit = Some((c, p));
        }
    }
    let Some((comp, part)) = hit else { return Ok(None) };
    if !comp.is_visible() || frobenius(&(o - part)) > PART_TOL * scale {
        return Ok(None);
    }
    let (vals, _) = hermitian_eig(o)?;
    let norm = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let definite = vals[0] >= -1e-10 * norm || vals[vals.len() - 1] <= 1e-10 * norm;
    let normalised = matches!(
        spec.protocol,
        ProtocolId::GlobalClifford | ProtocolId::LocalClifford | ProtocolId::Pauli | ProtocolId::Matchgate
    ) && is_pauli_multiple(o);
    Ok((definite || normalised).then(|| norm * norm / comp.a_f64()))
}

/// True when o = c · P for a Pauli string P (qubit dimension only).
pub fn is_pauli_multiple(o: &ComplexMatrix) -> bool {
    let d = o.nrows();
    if !d.is_power_of_two() {
        return false;
    }
    let scale = frobenius(o);
    if scale == 0.0 {
        return false;
    }
    let tol = 1e-10 * scale;
    let Some(x) = (0..d).max_by(|&a, &b| o[(0, a)].norm().total_cmp(&o[(0, b)].norm())) else { return false };
    let c0 = o[(0, x)];
    if c0.norm() <= tol {
        return false;
    }
    let mut z = 0usize;
    let mut bit = 1;
    while bit < d {
        if (o[(bit, bit ^ x)] / c0).re < 0.0 {
            z |= bit;
        }
        bit <<= 1;
    }
    for r in 0..d {
        for col in 0..d {
            let expect = if col == r ^ x {
                if (r & z).count_ones().is_multiple_of(2) { c0 } else { -c0 }
            } else {
                crate::linalg::cr(0.0)
            };
            if (o[(r, col)] - expect).norm() > tol {
                return false;
            }
        }
    }
    true
}

/// Swap of qubits q and q + 1 applied to a basis index (qubit 0 is the top bit).
fn swap_bits(idx: usize, n: usize, q: usize) -> usize {
    let a = n - 1 - q;
    let b = a - 1;
    let ba = (idx >> a) & 1;
    let bb = (idx >> b) & 1;
    if ba == bb {
        idx
    } else {
        idx ^ (1 << a) ^ (1 << b)
    }
}

pub fn is_permutation_invariant(o: &ComplexMatrix, n: usize, tol: f64) -> bool {
    let d = 1usize << n;
    if o.nrows() != d {
        return false;
    }
    let scale = frobenius(o).max(1.0);
    (0..n.saturating_sub(1)).all(|q| {
        let mut dev = 0.0;
        for r in 0..d {
            for c in 0..d {
                dev += (o[(swap_bits(r, n, q), swap_bits(c, n, q))] - o[(r, c)]).norm_sqr();
            }
        }
        dev.sqrt() <= tol * scale
    })
}

/// (4/3)(n+1)⁴ ‖O‖²_∞ for permutation-invariant O.
pub fn bound_su2_tensor(n: usize, o: &ComplexMatrix) -> Result<f64> {
    if !is_permutation_invariant(o, n, 1e-9) {
        return Err(Error::InvalidArgument("observable is not permutation invariant".into()));
    }
    let norm = spectral_norm_hermitian(o)?;
    Ok(4.0 / 3.0 * ((n + 1) as f64).powi(4) * norm * norm)
}

fn binom3(d: f64) -> f64 {
    // C(d + 1, 3)
    (d + 1.0) * d * (d - 1.0) / 6.0
}

/// Closed-form variance of the Z_sym estimator under su2-tensor shadows (even n).
pub fn exact_variance_zsym(rho: &ComplexMatrix, n: usize) -> Result<f64> {
    if !n.is_multiple_of(2) {
        return Err(Error::Unsupported("closed-form Z_sym variance needs even n".into()));
    }
    let (t, labels) = schur_basis(n)?;
    if rho.nrows() != t.nrows() {
        return Err(Error::Shape(format!("state dimension {} vs {}", rho.nrows(), t.nrows())));
    }
    let rs = t.adjoint() * rho * &t;
    let comp = |two_s: i64, off: usize, mu: i64| -> Result<f64> {
        Ok(spherical_entries(two_s, mu, 0)?.into_iter().map(|(r, c, v)| v * rs[(off + r, off + c)].re).sum())
    };
    let mut second = 0.0;
    let mut first = 0.0;
    for ((two_s, _), off) in schur_block_offsets(&labels) {
        if two_s == 0 {
            continue;
        }
        let s = two_s as f64 / 2.0;
        let d = two_s as f64 + 1.0;
        let c = binom3(d);
        let r00 = comp(two_s, off, 0)?;
        let r10 = comp(two_s, off, 1)?;
        let r20 = if two_s >= 2 { comp(two_s, off, 2)? } else { 0.0 };
        let root = (5.0 * s * (s + 1.0) * (2.0 * s - 1.0) * (2.0 * s + 1.0) * (2.0 * s + 3.0)).sqrt();
        let quad = if two_s >= 2 { 12.0 * r20 * (4.0 * s * (1.0 + s) - 3.0) / (5.0 * root) } else { 0.0 };
        second += c * (6.0 * r00 / d.sqrt() + quad);
        first += r10 * (2.0 * c).sqrt();
    }
    Ok(second - first * first)
}

/// p(1 − p) with p = Tr[ρ Π^{(η)}].
pub fn exact_variance_projector(rho: &ComplexMatrix, eta: &Partition) -> Result<f64> {
    let n = eta.n();
    partition_two_s(eta)?;
    let pi = crate::shadows::observable_isotypic_projector(eta, n)?;
    if rho.nrows() != pi.dim() {
        return Err(Error::Shape(format!("state dimension {} vs {}", rho.nrows(), pi.dim())));
    }
    let p = (rho * &pi.matrix).trace().re.clamp(0.0, 1.0);
    Ok(p * (1.0 - p))
}

/// 3^k − Tr[ρP]² for a weight-k Pauli string P under local-Clifford shadows:
/// the single-shot value is ±3^k with probability 3^{−k} and 0 otherwise.
pub fn exact_variance_local_pauli(rho: &ComplexMatrix, string: &str) -> Result<f64> {
    let p = crate::shadows::observable_pauli(string)?;
    if rho.nrows() != p.dim() {
        return Err(Error::Shape(format!("state dimension {} vs {}", rho.nrows(), p.dim())));
    }
    let k = string.chars().filter(|&c| c != 'I').count() as i32;
    let e = (rho * &p.matrix).trace().re;
    Ok(3f64.powi(k) - e * e)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Empirical {
    pub mean: f64,
    pub second_moment: f64,
    pub second_moment_stderr: f64,
    pub variance: f64,
    pub variance_stderr: f64,
    pub samples: usize,
}

impl Empirical {
    pub fn from_values(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let sq: Vec<f64> = xs.iter().map(|x| x * x).collect();
        let (second_moment, var_sq) = crate::stats::mean_var(&sq);
        let (_, variance) = crate::stats::mean_var(xs);
        // Delta method: Var(s²) ≈ (μ₄ − σ⁴)/N.
        let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
        let m2 = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        Self {
            mean,
            second_moment,
            second_moment_stderr: (var_sq / n).sqrt(),
            variance,
            variance_stderr: ((m4 - m2 * m2).max(0.0) / n).sqrt(),
            samples: xs.len(),
        }
    }
}

/// Mean of ô² over N seeded snapshots, plus the single-shot variance.
pub fn empirical_second_moment(
    protocol: &Protocol,
    state: &QuantumState,
    o: &Observable,
    n: usize,
    seed: u64,
) -> Result<Empirical> {
    if n < 2 {
        return Err(Error::InvalidArgument("need at least two snapshots".into()));
    }
    let est = ShadowEstimator::new(protocol, o)?;
    Ok(Empirical::from_values(&shot_values(protocol, state, &est, n, seed)?))
}

/// E_g Σ_{σ∈D} |⟨e_σ, U e_τ U†⟩|² for an HS-orthonormal operator basis whose
/// elements are each diagonal or fully off-diagonal in the measurement basis.
pub fn tight_frame_check(
    ensemble: &GroupEnsemble,
    measurement: &MeasurementBasis,
    op_basis: &[ComplexMatrix],
    diagonal: &[usize],
    tau: usize,
    mode: Averaging,
) -> Result<(f64, f64)> {
    if tau >= op_basis.len() || diagonal.iter().any(|&s| s >= op_basis.len()) {
        return Err(Error::InvalidArgument("basis index out of range".into()));
    }
    for (k, e) in op_basis.iter().enumerate() {
        let f = measurement.vectors.adjoint() * e * &measurement.vectors;
        let diag: f64 = (0..f.nrows()).map(|i| f[(i, i)].norm_sqr()).sum::<f64>().sqrt();
        let total = frobenius(&f);
        let off = (total * total - diag * diag).max(0.0).sqrt();
        let is_diag = off <= 1e-9 * total.max(1.0);
        let is_off = diag <= 1e-9 * total.max(1.0);
        if !is_diag && !is_off {
            return Err(Error::InvalidArgument(format!("basis element {k} is neither diagonal nor off-diagonal")));
        }
    }
    let et = &op_basis[tau];
    let value = |u: &ComplexMatrix| -> f64 {
        let img = u * et * u.adjoint();
        diagonal.iter().map(|&s| crate::linalg::hs_inner(&op_basis[s], &img).map(|z| z.norm_sqr()).unwrap_or(0.0)).sum()
    };
    match mode {
        Averaging::Exact => {
            let els = ensemble.enumerate()?;
            let sum: f64 = els.iter().map(|(e, _)| value(&e.to_dense())).sum();
            Ok((sum / els.len() as f64, 0.0))
        }
        Averaging::MonteCarlo { samples, seed } => {
            let s = batch_means(samples, 1, |k| {
                let mut rng = RandomStream::new(seed, k as u64);
                vec![value(&ensemble.sample(&mut rng).0.to_dense())]
            });
            Ok((s.mean[0], s.stderr[0]))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceReport {
    pub protocol: ProtocolId,
    pub observable: String,
    pub l2_bound: f64,
    pub inf_bound: f64,
    pub special_bound: Option<f64>,
    pub su2_bound: Option<f64>,
    pub exact_value: Option<f64>,
    pub empirical: Empirical,
}

impl VarianceReport {
    /// Empirical variance within 5σ of the exact value, when one is known.
    pub fn exact_agrees(&self) -> Option<bool> {
        self.exact_value.map(|v| (self.empirical.variance - v).abs() <= 5.0 * self.empirical.variance_stderr + 1e-12)
    }
}

/// All bounds side by side with an empirical estimate.
pub fn variance_report(
    protocol: &Protocol,
    state: &QuantumState,
    o: &Observable,
    samples: usize,
    seed: u64,
) -> Result<VarianceReport> {
    let spec = protocol.spec()?;
    let su2_bound = match (protocol.id, protocol.qubits()) {
        (ProtocolId::Su2Tensor, Some(n)) => bound_su2_tensor(n, &o.matrix).ok(),
        _ => None,
    };
    let exact_value = match (protocol.id, protocol.qubits()) {
        (ProtocolId::Su2Tensor, Some(n)) if o.name == "zsym" && n % 2 == 0 => {
            Some(exact_variance_zsym(&state.density_matrix(), n)?)
        }
        (ProtocolId::Su2Tensor, Some(_)) if o.name.starts_with("proj[") => {
            let eta = Partition::parse(o.name.trim_start_matches("proj"))?;
            Some(exact_variance_projector(&state.density_matrix(), &eta)?)
        }
        (ProtocolId::LocalClifford, Some(n)) => match pauli_letters(o, n) {
            Some(st) => Some(exact_variance_local_pauli(&state.density_matrix(), &st)?),
            None => None,
        },
        _ => None,
    };
    Ok(VarianceReport {
        protocol: protocol.id,
        observable: o.name.clone(),
        l2_bound: bound_l2(spec, &o.matrix),
        inf_bound: bound_inf(spec, &o.matrix)?,
        special_bound: bound_special(spec, &o.matrix)?,
        su2_bound,
        exact_value,
        empirical: empirical_second_moment(protocol, state, o, samples, seed)?,
    })
}

/// Pauli letters of an observable named by a Pauli string (or `zall`).
pub fn pauli_letters(o: &Observable, n: usize) -> Option<String> {
    if o.name == "zall" {
        return Some("Z".repeat(n));
    }
    (o.name.len() == n && o.name.chars().all(|c| "IXYZ".contains(c))).then(|| o.name.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bases::computational_basis;
    use crate::ensembles::{local_clifford_ensemble, matchgate_ensemble, majorana_operators, trivial_ensemble};
    use crate::linalg::{cr, identity, pauli_x, pauli_y, pauli_z, tensor_all};
    use crate::protocol::{build_protocol, SizeParams};
    use crate::shadows::{observable_isotypic_projector, observable_majorana, observable_pauli, observable_zsym};

    fn spec(id: ProtocolId, size: SizeParams) -> ChannelSpec {
        build_protocol(id, &size).unwrap().spec().unwrap().clone()
    }

    #[test]
    fn l2_and_inf_examples() {
        let lc2 = spec(ProtocolId::LocalClifford, SizeParams::qubits(2));
        let z1 = tensor_all(&[pauli_z(), identity(2)]);
        assert!((bound_l2(&lc2, &z1) - 12.0).abs() < 1e-10);
        assert!((bound_l2(&lc2, &identity(4)) - 4.0).abs() < 1e-10);
        let pz = spec(ProtocolId::Pauli, SizeParams::qubits(1));
        assert_eq!(bound_l2(&pz, &pauli_x()), 0.0);
        let lc1 = spec(ProtocolId::LocalClifford, SizeParams::qubits(1));
        assert!((bound_inf(&lc1, &pauli_z()).unwrap() - 9.0).abs() < 1e-10);
        assert!((bound_inf(&lc1, &identity(2)).unwrap() - 1.0).abs() < 1e-10);
        let t = spec(ProtocolId::Su2Tensor, SizeParams::qubits(3));
        let pi = observable_isotypic_projector(&Partition::new(vec![2, 1]).unwrap(), 3).unwrap();
        assert!((bound_inf(&t, &pi.matrix).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn special_examples() {
        let g = spec(ProtocolId::GlobalClifford, SizeParams::qubits(2));
        let xz = observable_pauli("XZ").unwrap().matrix;
        assert!((bound_special(&g, &xz).unwrap().unwrap() - 5.0).abs() < 1e-9);
        let m = spec(ProtocolId::Matchgate, SizeParams::qubits(3));
        let gam = observable_majorana(&[1, 4], 3).unwrap().matrix;
        assert!((bound_special(&m, &gam).unwrap().unwrap() - 5.0).abs() < 1e-9);
        let gam4 = observable_majorana(&[1, 2, 3, 6], 3).unwrap().matrix;
        assert!((bound_special(&m, &gam4).unwrap().unwrap() - 5.0).abs() < 1e-9);
        let lc = spec(ProtocolId::LocalClifford, SizeParams::qubits(2));
        let mixed = tensor_all(&[pauli_z(), identity(2)]) + tensor_all(&[pauli_x(), pauli_y()]);
        assert!(bound_special(&lc, &mixed).unwrap().is_none());
        // PSD single-isotypic projector under su2-tensor.
        let t = spec(ProtocolId::Su2Tensor, SizeParams::qubits(3));
        let pi = observable_isotypic_projector(&Partition::new(vec![3]).unwrap(), 3).unwrap();
        let b = bound_special(&t, &pi.matrix).unwrap().unwrap();
        assert!((b - 1.0).abs() < 1e-9);
        assert!(b <= bound_inf(&t, &pi.matrix).unwrap() + 1e-9);
    }

    #[test]
    fn pauli_multiple_detection() {
        assert!(is_pauli_multiple(&(observable_pauli("XYZ").unwrap().matrix * cr(-2.0))));
        let maj = majorana_operators(3);
        assert!(is_pauli_multiple(&maj.monomial(&[2, 5]).unwrap()));
        assert!(!is_pauli_multiple(&(pauli_x() + pauli_z())));
    }

    #[test]
    fn su2_bound_examples() {
        let id4 = identity(16);
        assert!((bound_su2_tensor(4, &id4).unwrap() - 2500.0 / 3.0).abs() < 1e-9);
        assert!((bound_su2_tensor(1, &pauli_z()).unwrap() - 64.0 / 3.0).abs() < 1e-12);
        let z = observable_zsym(3).unwrap();
        assert!((bound_su2_tensor(3, &z.matrix).unwrap() - 3072.0).abs() < 1e-9);
        assert!(bound_su2_tensor(2, &tensor_all(&[pauli_z(), identity(2)])).is_err());
    }

    #[test]
    fn zsym_closed_form_trivial_cases() {
        // Singlet: Z_sym acts as 0 on the 1-dim block and the estimator is identically 0.
        let mut v = crate::linalg::ComplexVector::zeros(4);
        v[1] = cr(std::f64::consts::FRAC_1_SQRT_2);
        v[2] = cr(-std::f64::consts::FRAC_1_SQRT_2);
        let singlet = &v * v.adjoint();
        assert!(exact_variance_zsym(&singlet, 2).unwrap().abs() < 1e-12);
        assert!(exact_variance_zsym(&singlet, 3).is_err());
    }

    #[test]
    fn projector_variance_examples() {
        let eta = Partition::new(vec![2]).unwrap();
        let mut v = crate::linalg::ComplexVector::zeros(4);
        v[0] = cr(1.0);
        assert_eq!(exact_variance_projector(&(&v * v.adjoint()), &eta).unwrap(), 0.0);
        let mut w = crate::linalg::ComplexVector::zeros(4);
        w[0] = cr(0.5);
        w[1] = cr(0.5);
        w[2] = cr(-0.5);
        w[3] = cr(0.5);
        // |w⟩ has weight 1/2 on the singlet.
        assert!((exact_variance_projector(&(&w * w.adjoint()), &eta).unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn identity_second_moment() {
        let p = build_protocol(ProtocolId::LocalClifford, &SizeParams::qubits(2)).unwrap();
        let o = Observable::new("id", identity(4)).unwrap();
        let e = empirical_second_moment(&p, &QuantumState::basis_state(4, 1), &o, 100, 3).unwrap();
        assert!((e.second_moment - 1.0).abs() < 1e-12);
        assert!(e.second_moment_stderr < 1e-12);
    }

    fn pauli_basis_1q() -> Vec<ComplexMatrix> {
        let s = cr(std::f64::consts::FRAC_1_SQRT_2);
        vec![pauli_x() * s, pauli_y() * s, pauli_z() * s]
    }

    #[test]
    fn tight_frame_clifford_and_trivial() {
        let e = local_clifford_ensemble(1).unwrap();
        let b = pauli_basis_1q();
        let (v, _) = tight_frame_check(&e, &computational_basis(1), &b, &[2], 0, Averaging::Exact).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-14);
        for tau in 0..3 {
            let (v, _) =
                tight_frame_check(&trivial_ensemble(2), &computational_basis(1), &b, &[0, 1, 2], tau, Averaging::Exact).unwrap();
            assert!((v - 1.0).abs() < 1e-14);
        }
        let h = (pauli_x() + pauli_z()) * cr(0.5);
        assert!(tight_frame_check(&e, &computational_basis(1), &[h], &[], 0, Averaging::Exact).is_err());
    }

    #[test]
    fn tight_frame_matchgate_mc() {
        let e = matchgate_ensemble(3).unwrap();
        let maj = majorana_operators(3);
        let mut basis = Vec::new();
        let mut diag = Vec::new();
        for a in 1..=6 {
            for b in a + 1..=6 {
                if b == a + 1 && a % 2 == 1 {
                    diag.push(basis.len());
                }
                basis.push(maj.monomial(&[a, b]).unwrap() * cr(1.0 / 8f64.sqrt()));
            }
        }
        let (v, se) =
            tight_frame_check(&e, &computational_basis(3), &basis, &diag, 0, Averaging::MonteCarlo { samples: 4000, seed: 5 })
                .unwrap();
        assert!((v - 0.2).abs() < 5.0 * se, "{v} ± {se}");
    }

    #[test]
    fn local_pauli_variance_matches_monte_carlo() {
        let p = build_protocol(ProtocolId::LocalClifford, &SizeParams::qubits(2)).unwrap();
        let mut rng = RandomStream::new(11, 0);
        let rho = crate::linalg::random_density_matrix(4, 2, &mut rng);
        let state = QuantumState::mixed(rho.clone()).unwrap();
        let o = observable_pauli("XZ").unwrap();
        let exact = exact_variance_local_pauli(&rho, "XZ").unwrap();
        let emp = empirical_second_moment(&p, &state, &o, 200_000, 3).unwrap();
        assert!((emp.variance - exact).abs() < 5.0 * emp.variance_stderr, "{} vs {exact}", emp.variance);
        let r = variance_report(&p, &state, &o, 1000, 1).unwrap();
        assert_eq!(r.exact_value, Some(exact));
    }
}
