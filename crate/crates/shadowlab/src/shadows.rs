//! Snapshot sampling, single-shot estimators, aggregation and the observable library.

use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bases::{partition_two_s, schur_basis, schur_block_offsets, spherical_entries, MeasurementBasis};
use crate::channel::ChannelSpec;
use crate::ensembles::{majorana_operators, Element, ElementDescriptor};
use crate::error::{Error, Result};
use crate::linalg::{
    cr, frobenius, hermitian_deviation, hermitian_eig, identity, pauli_x, pauli_y, pauli_z, tensor_all,
    ComplexMatrix, ComplexVector, RandomStream,
};
use crate::protocol::{Protocol, ProtocolId};
use crate::rep::young::Partition;
use crate::stats::median_of_means;

pub const STATE_TOL: f64 = 1e-10;

/// A pure vector or a density matrix. Mixed states keep their eigendecomposition so
/// Born probabilities cost one vector per nonzero eigenvalue.
#[derive(Clone, Debug)]
pub enum QuantumState {
    Pure(ComplexVector),
    Mixed { rho: ComplexMatrix, weights: Vec<f64>, vectors: Vec<ComplexVector> },
}

impl QuantumState {
    pub fn pure(v: ComplexVector) -> Result<Self> {
        let norm = v.norm();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidArgument(format!("state vector has norm {norm}")));
        }
        Ok(QuantumState::Pure(v))
    }

    pub fn mixed(rho: ComplexMatrix) -> Result<Self> {
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::InvalidArgument(format!("density matrix has trace {tr}")));
        }
        let (vals, vecs) = hermitian_eig(&rho)?;
        if vals.first().is_some_and(|&v| v < -STATE_TOL) {
            return Err(Error::InvalidArgument(format!("density matrix has eigenvalue {}", vals[0])));
        }
        let mut weights = Vec::new();
        let mut vectors = Vec::new();
        for (k, &v) in vals.iter().enumerate() {
            if v > 1e-14 {
                weights.push(v);
                vectors.push(vecs.column(k).into_owned());
            }
        }
        Ok(QuantumState::Mixed { rho, weights, vectors })
    }

    /// |0…0⟩ in dimension d.
    pub fn basis_state(d: usize, k: usize) -> Self {
        let mut v = ComplexVector::zeros(d);
        v[k] = cr(1.0);
        QuantumState::Pure(v)
    }

    pub fn ghz(n: usize) -> Self {
        QuantumState::Pure(ghz_vector(n))
    }

    pub fn maximally_mixed(d: usize) -> Self {
        let weights = vec![1.0 / d as f64; d];
        let vectors = (0..d).map(|k| identity(d).column(k).into_owned()).collect();
        QuantumState::Mixed { rho: identity(d) / cr(d as f64), weights, vectors }
    }

    pub fn dim(&self) -> usize {
        match self {
            QuantumState::Pure(v) => v.len(),
            QuantumState::Mixed { rho, .. } => rho.nrows(),
        }
    }

    pub fn density_matrix(&self) -> ComplexMatrix {
        match self {
            QuantumState::Pure(v) => v * v.adjoint(),
            QuantumState::Mixed { rho, .. } => rho.clone(),
        }
    }

    /// Tr[ρ O].
    pub fn expectation(&self, o: &ComplexMatrix) -> f64 {
        match self {
            QuantumState::Pure(v) => v.dotc(&(o * v)).re,
            QuantumState::Mixed { rho, .. } => (rho * o).trace().re,
        }
    }

    /// p(w) = ⟨w|UρU†|w⟩ for every basis vector.
    pub fn born_probabilities(&self, u: &Element, basis: &MeasurementBasis) -> Vec<f64> {
        let amps = |v: &ComplexVector| -> ComplexVector {
            let y = u.apply(v);
            if basis.is_standard {
                y
            } else {
                basis.vectors.ad_mul(&y)
            }
        };
        match self {
            QuantumState::Pure(v) => amps(v).iter().map(|z| z.norm_sqr()).collect(),
            QuantumState::Mixed { weights, vectors, .. } => {
                let mut p = vec![0.0; self.dim()];
                for (w, v) in weights.iter().zip(vectors) {
                    for (pk, z) in p.iter_mut().zip(amps(v).iter()) {
                        *pk += w * z.norm_sqr();
                    }
                }
                p
            }
        }
    }
}

pub fn ghz_vector(n: usize) -> ComplexVector {
    let d = 1usize << n;
    let mut v = ComplexVector::zeros(d);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    v[0] = cr(s);
    v[d - 1] = cr(s);
    v
}

/// Index of the first cumulative probability exceeding `u · total`.
pub fn inverse_cdf(p: &[f64], u: f64) -> usize {
    let total: f64 = p.iter().sum();
    let target = u * total;
    let mut acc = 0.0;
    let mut last_nonzero = 0;
    for (k, &x) in p.iter().enumerate() {
        if x > 0.0 {
            last_nonzero = k;
        }
        acc += x;
        if acc > target {
            return k;
        }
    }
    last_nonzero
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub descriptor: ElementDescriptor,
    pub outcome: usize,
}

fn check_dim(protocol: &Protocol, state: &QuantumState) -> Result<()> {
    if protocol.dim() != state.dim() {
        return Err(Error::Shape(format!("state dimension {} vs protocol dimension {}", state.dim(), protocol.dim())));
    }
    Ok(())
}

/// Draws U from the ensemble, then w from the Born distribution with one uniform.
pub fn sample_snapshot(protocol: &Protocol, state: &QuantumState, rng: &mut RandomStream) -> Result<Snapshot> {
    check_dim(protocol, state)?;
    Ok(draw(protocol, state, rng).1)
}

fn draw(protocol: &Protocol, state: &QuantumState, rng: &mut RandomStream) -> (Element, Snapshot) {
    let (el, descriptor) = protocol.ensemble.sample(rng);
    let p = state.born_probabilities(&el, &protocol.basis);
    let outcome = inverse_cdf(&p, rng.uniform());
    (el, Snapshot { descriptor, outcome })
}

/// Snapshot `counter` of a seeded run.
pub fn snapshot_at(protocol: &Protocol, state: &QuantumState, seed: u64, counter: u64) -> Result<(Element, Snapshot)> {
    check_dim(protocol, state)?;
    let mut rng = RandomStream::new(seed, counter);
    Ok(draw(protocol, state, &mut rng))
}

#[derive(Clone, Debug)]
pub struct Observable {
    pub name: String,
    pub matrix: ComplexMatrix,
    /// Optional labelled decomposition; the pieces sum to `matrix` up to invisible parts.
    pub components: Option<Vec<(String, ComplexMatrix)>>,
}

impl Observable {
    pub fn new(name: impl Into<String>, matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Shape(format!("observable is {:?}", matrix.shape())));
        }
        let dev = hermitian_deviation(&matrix);
        if dev > 1e-10 * frobenius(&matrix).max(1.0) {
            return Err(Error::NotHermitian(dev));
        }
        Ok(Self { name: name.into(), matrix, components: None })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Projections onto every component of `spec` with a nonzero piece.
    pub fn decompose(&self, spec: &ChannelSpec) -> Vec<(String, ComplexMatrix)> {
        let scale = frobenius(&self.matrix).max(1.0);
        spec.components
            .iter()
            .map(|c| (c.label.clone(), c.project(&self.matrix)))
            .filter(|(_, m)| frobenius(m) > 1e-12 * scale)
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Visibility {
    pub visible: bool,
    pub invisible_norm: f64,
}

/// ‖o − Σ_{a_λ>0} O^λ‖_F; visible iff at most 1e-9.
pub fn visible_check(spec: &ChannelSpec, o: &Observable) -> Visibility {
    let invisible_norm = frobenius(&(&o.matrix - spec.visible_part(&o.matrix)));
    Visibility { visible: invisible_norm <= 1e-9, invisible_norm }
}

/// Precomputed M⁻¹(O) for one protocol and observable.
#[derive(Clone, Debug)]
pub struct ShadowEstimator {
    pub minv: ComplexMatrix,
    pub visibility: Visibility,
    basis: MeasurementBasis,
}

impl ShadowEstimator {
    pub fn new(protocol: &Protocol, o: &Observable) -> Result<Self> {
        if o.dim() != protocol.dim() {
            return Err(Error::Shape(format!("observable dimension {} vs protocol {}", o.dim(), protocol.dim())));
        }
        let spec = protocol.spec()?;
        Ok(Self {
            minv: spec.apply_inverse(&o.matrix),
            visibility: visible_check(spec, o),
            basis: protocol.basis.clone(),
        })
    }

    /// Tr[U†|w⟩⟨w|U · M⁻¹(O)].
    pub fn single_shot(&self, u: &Element, outcome: usize) -> f64 {
        let x = u.apply_adjoint(&self.basis.vector(outcome));
        x.dotc(&(&self.minv * &x)).re
    }
}

pub fn single_shot_estimate(protocol: &Protocol, snap: &Snapshot, o: &Observable) -> Result<f64> {
    let est = ShadowEstimator::new(protocol, o)?;
    let u = protocol.ensemble.reconstruct(&snap.descriptor)?;
    Ok(est.single_shot(&u, snap.outcome))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Strategy {
    Mean,
    MedianOfMeans { groups: usize },
}

impl Strategy {
    pub fn groups(&self) -> usize {
        match self {
            Strategy::Mean => 1,
            Strategy::MedianOfMeans { groups } => *groups,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShadowEstimate {
    pub mean: f64,
    /// Unbiased empirical variance of the single-shot values.
    pub variance: f64,
    pub samples: usize,
    pub groups: usize,
    pub median_of_means: f64,
    pub visible: bool,
    pub invisible_norm: f64,
    /// Set when only the visible part of the observable could be estimated.
    pub warning: Option<String>,
}

impl ShadowEstimate {
    pub fn stderr(&self) -> f64 {
        (self.variance / self.samples as f64).sqrt()
    }

    /// The value selected by the aggregation strategy.
    pub fn value(&self) -> f64 {
        if self.groups == 1 {
            self.mean
        } else {
            self.median_of_means
        }
    }

    pub fn from_values(values: &[f64], groups: usize, visibility: Visibility) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("need at least one snapshot".into()));
        }
        if groups == 0 || groups > values.len() {
            return Err(Error::InvalidArgument(format!("need 1 ≤ K ≤ N, got K={groups}, N={}", values.len())));
        }
        let (mean, variance) = crate::stats::mean_var(values);
        Ok(Self {
            mean,
            variance,
            samples: values.len(),
            groups,
            median_of_means: median_of_means(values, groups),
            visible: visibility.visible,
            invisible_norm: visibility.invisible_norm,
            warning: (!visibility.visible)
                .then(|| format!("observable has an invisible part of norm {:.3e}; estimating its visible part", visibility.invisible_norm)),
        })
    }
}

/// Single-shot values and snapshots for counters 0..n of a seeded run.
pub fn run_snapshots(
    protocol: &Protocol,
    state: &QuantumState,
    est: &ShadowEstimator,
    n: usize,
    seed: u64,
) -> Result<Vec<(Snapshot, f64)>> {
    check_dim(protocol, state)?;
    Ok((0..n as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = RandomStream::new(seed, k);
            let (el, snap) = draw(protocol, state, &mut rng);
            let v = est.single_shot(&el, snap.outcome);
            (snap, v)
        })
        .collect())
}

/// Single-shot values only, without keeping descriptors.
pub fn shot_values(protocol: &Protocol, state: &QuantumState, est: &ShadowEstimator, n: usize, seed: u64) -> Result<Vec<f64>> {
    check_dim(protocol, state)?;
    Ok((0..n as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = RandomStream::new(seed, k);
            let (el, snap) = draw(protocol, state, &mut rng);
            est.single_shot(&el, snap.outcome)
        })
        .collect())
}

pub fn estimate(
    protocol: &Protocol,
    state: &QuantumState,
    o: &Observable,
    n: usize,
    strategy: Strategy,
    seed: u64,
) -> Result<ShadowEstimate> {
    if strategy.groups() == 0 || strategy.groups() > n {
        return Err(Error::InvalidArgument(format!("need 1 ≤ K ≤ N, got K={}, N={n}", strategy.groups())));
    }
    let est = ShadowEstimator::new(protocol, o)?;
    let values = shot_values(protocol, state, &est, n, seed)?;
    ShadowEstimate::from_values(&values, strategy.groups(), est.visibility)
}

/// One line of a snapshot file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotRecord {
    pub protocol: ProtocolId,
    pub seed: u64,
    pub counter: u64,
    pub descriptor: ElementDescriptor,
    pub outcome: usize,
}

pub fn write_snapshots<W: Write>(mut out: W, records: &[SnapshotRecord]) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_snapshots<R: BufRead>(input: R) -> Result<Vec<SnapshotRecord>> {
    let mut out = Vec::new();
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line)?);
    }
    Ok(out)
}

/// Re-estimates from stored snapshots; reproduces `estimate` bit-exactly.
pub fn estimate_from_records(
    protocol: &Protocol,
    records: &[SnapshotRecord],
    o: &Observable,
    groups: usize,
) -> Result<ShadowEstimate> {
    let est = ShadowEstimator::new(protocol, o)?;
    let d = protocol.dim();
    let values = records
        .par_iter()
        .map(|r| {
            if r.protocol != protocol.id {
                return Err(Error::InvalidArgument(format!("snapshot from {} fed to {}", r.protocol, protocol.id)));
            }
            if r.outcome >= d {
                return Err(Error::InvalidArgument(format!("outcome {} out of range", r.outcome)));
            }
            let u = protocol.ensemble.reconstruct(&r.descriptor)?;
            Ok(est.single_shot(&u, r.outcome))
        })
        .collect::<Result<Vec<f64>>>()?;
    ShadowEstimate::from_values(&values, groups, est.visibility)
}

pub const MAX_ZSYM_QUBITS: usize = 10;

/// Σ_i Z_i on n qubits, qubit 0 the most significant bit.
pub fn zsym_matrix(n: usize) -> ComplexMatrix {
    let d = 1usize << n;
    ComplexMatrix::from_fn(d, d, |r, c| {
        if r != c {
            return cr(0.0);
        }
        let ones = r.count_ones() as f64;
        cr(n as f64 - 2.0 * ones)
    })
}

/// Coefficients c with Σ_i Z_i = Σ_{η,i} c · O^{η,i}_{1,0}, keyed by (η, i).
pub fn zsym_spherical_coefficients(n: usize) -> Result<Vec<(Partition, usize, f64)>> {
    if n == 0 || n > MAX_ZSYM_QUBITS {
        return Err(Error::InvalidArgument(format!("Z_sym supports 1 ≤ n ≤ {MAX_ZSYM_QUBITS}")));
    }
    let (t, labels) = schur_basis(n)?;
    let z = zsym_matrix(n);
    let zs = t.adjoint() * z * &t;
    let mut out = Vec::new();
    for ((two_s, i), off) in schur_block_offsets(&labels).into_iter().rev() {
        if two_s < 1 {
            continue;
        }
        let coeff: f64 = spherical_entries(two_s, 1, 0)?
            .into_iter()
            .map(|(r, c, v)| v * zs[(off + r, off + c)].re)
            .sum();
        out.push((labels[off].lambda.clone(), i, coeff));
    }
    Ok(out)
}

/// Σ_i Z_i with its spin-1 decomposition cached under the su2-tensor label "s=1".
pub fn observable_zsym(n: usize) -> Result<Observable> {
    let coeffs = zsym_spherical_coefficients(n)?;
    let (t, labels) = schur_basis(n)?;
    let offsets = schur_block_offsets(&labels);
    let d = 1usize << n;
    let mut local = ComplexMatrix::zeros(d, d);
    for (eta, i, c) in &coeffs {
        let two_s = partition_two_s(eta)?;
        let off = offsets[&(two_s, *i)];
        for (r, col, v) in spherical_entries(two_s, 1, 0)? {
            local[(off + r, off + col)] += cr(c * v);
        }
    }
    let recon = &t * local * t.adjoint();
    let mut o = Observable::new("zsym", zsym_matrix(n))?;
    o.components = Some(vec![("s=1".to_string(), recon)]);
    Ok(o)
}

/// Projector onto the η-isotypic of n qubits.
pub fn observable_isotypic_projector(eta: &Partition, n: usize) -> Result<Observable> {
    if eta.n() != n {
        return Err(Error::InvalidArgument(format!("{eta} is not a partition of {n}")));
    }
    partition_two_s(eta)?;
    let (t, labels) = schur_basis(n)?;
    let cols: Vec<usize> = labels.iter().enumerate().filter(|(_, l)| &l.lambda == eta).map(|(k, _)| k).collect();
    let sel = t.select_columns(&cols);
    Observable::new(format!("proj{eta}"), &sel * sel.adjoint())
}

pub fn observable_ghz(n: usize) -> Result<Observable> {
    let v = ghz_vector(n);
    Observable::new("ghz", &v * v.adjoint())
}

/// Tensor product of I/X/Y/Z letters.
pub fn observable_pauli(string: &str) -> Result<Observable> {
    if string.is_empty() {
        return Err(Error::InvalidArgument("empty Pauli string".into()));
    }
    let factors = string
        .chars()
        .map(|ch| match ch {
            'I' => Ok(identity(2)),
            'X' => Ok(pauli_x()),
            'Y' => Ok(pauli_y()),
            'Z' => Ok(pauli_z()),
            _ => Err(Error::InvalidArgument(format!("bad Pauli letter `{ch}`"))),
        })
        .collect::<Result<Vec<_>>>()?;
    Observable::new(string, tensor_all(&factors))
}

/// Hermitian Majorana monomial (−i)^{p(p−1)/2} γ_{μ1}⋯γ_{μp}, indices 1-based.
pub fn observable_majorana(indices: &[usize], n: usize) -> Result<Observable> {
    let mut sorted = indices.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != indices.len() || indices.iter().any(|&m| m == 0 || m > 2 * n) || indices.is_empty() {
        return Err(Error::InvalidArgument(format!("invalid Majorana indices {indices:?} for n={n}")));
    }
    let m = majorana_operators(n).monomial(indices)?;
    let name = format!("gamma{}", indices.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("_"));
    Observable::new(name, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::trivial_ensemble;
    use crate::linalg::{random_density_matrix, random_hermitian, random_pure_state};
    use crate::protocol::{build_protocol, SizeParams};

    fn proto(id: ProtocolId, size: SizeParams) -> Protocol {
        build_protocol(id, &size).unwrap()
    }

    #[test]
    fn trivial_ensemble_is_deterministic() {
        let mut p = proto(ProtocolId::GlobalHaar, SizeParams::qubits(1));
        p.ensemble = trivial_ensemble(2);
        let s = QuantumState::basis_state(2, 0);
        for k in 0..50 {
            let mut rng = RandomStream::new(1, k);
            assert_eq!(sample_snapshot(&p, &s, &mut rng).unwrap().outcome, 0);
        }
        assert!(sample_snapshot(&p, &QuantumState::basis_state(4, 0), &mut RandomStream::new(1, 0)).is_err());
    }

    #[test]
    fn born_frequencies_chi_square() {
        // Fixed U from the trivial ensemble, so frequencies follow |⟨w|ψ⟩|².
        let mut p = proto(ProtocolId::GlobalHaar, SizeParams::dim(4));
        p.ensemble = trivial_ensemble(4);
        let psi = random_pure_state(4, &mut RandomStream::new(5, 0));
        let probs: Vec<f64> = psi.iter().map(|z| z.norm_sqr()).collect();
        let s = QuantumState::pure(psi).unwrap();
        let n = 10_000;
        let mut counts = [0usize; 4];
        for k in 0..n {
            let snap = sample_snapshot(&p, &s, &mut RandomStream::new(9, k)).unwrap();
            assert!(snap.outcome < 4);
            counts[snap.outcome] += 1;
        }
        let chi2: f64 = counts
            .iter()
            .zip(&probs)
            .map(|(&c, &q)| (c as f64 - n as f64 * q).powi(2) / (n as f64 * q))
            .sum();
        // 3 degrees of freedom: mean 3, sd √6.
        assert!(chi2 < 3.0 + 3.0 * 6f64.sqrt(), "chi2 = {chi2}");
    }

    #[test]
    fn inverse_cdf_ties_and_drift() {
        assert_eq!(inverse_cdf(&[0.5, 0.5], 0.5), 1);
        assert_eq!(inverse_cdf(&[0.5, 0.5], 0.0), 0);
        assert_eq!(inverse_cdf(&[0.0, 1.0 + 1e-13, 0.0], 0.999_999_999_999_9), 1);
        assert_eq!(inverse_cdf(&[0.3, 0.7, 0.0], 1.0), 1);
    }

    #[test]
    fn identity_estimate_is_one() {
        let p = proto(ProtocolId::LocalClifford, SizeParams::qubits(2));
        let s = QuantumState::pure(random_pure_state(4, &mut RandomStream::new(2, 0))).unwrap();
        let o = Observable::new("id", identity(4)).unwrap();
        let est = ShadowEstimator::new(&p, &o).unwrap();
        for k in 0..20 {
            let (el, snap) = snapshot_at(&p, &s, 3, k).unwrap();
            assert!((est.single_shot(&el, snap.outcome) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn haar_qubit_z_on_zero() {
        // M⁻¹(X) = 3X − Tr X at d = 2; with U = I and outcome 0 the estimate is 3.
        let p = proto(ProtocolId::GlobalHaar, SizeParams::qubits(1));
        let o = observable_pauli("Z").unwrap();
        let est = ShadowEstimator::new(&p, &o).unwrap();
        assert!((est.single_shot(&Element::Dense(identity(2)), 0) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn projector_estimates_are_indicators() {
        let p = proto(ProtocolId::Su2Tensor, SizeParams::qubits(3));
        let o = observable_isotypic_projector(&Partition::new(vec![2, 1]).unwrap(), 3).unwrap();
        assert_eq!(frobenius(&o.matrix).powi(2).round(), 4.0);
        let s = QuantumState::pure(random_pure_state(8, &mut RandomStream::new(4, 0))).unwrap();
        let est = ShadowEstimator::new(&p, &o).unwrap();
        for (snap, v) in run_snapshots(&p, &s, &est, 200, 8).unwrap() {
            let eta = &p.basis.labels[snap.outcome].eta;
            let expect = if eta == "[2,1]" { 1.0 } else { 0.0 };
            assert!((v - expect).abs() < 1e-9, "{v} vs {expect}");
        }
    }

    #[test]
    fn estimator_self_adjointness() {
        // Tr[M⁻¹(σ) O] = Tr[σ M⁻¹(O)] for a snapshot σ.
        let p = proto(ProtocolId::Matchgate, SizeParams::qubits(2));
        let mut rng = RandomStream::new(6, 0);
        let o = Observable::new("h", random_hermitian(4, &mut rng)).unwrap();
        let s = QuantumState::mixed(random_density_matrix(4, 2, &mut rng)).unwrap();
        let spec = p.spec().unwrap();
        let est = ShadowEstimator::new(&p, &o).unwrap();
        for k in 0..5 {
            let (el, snap) = snapshot_at(&p, &s, 11, k).unwrap();
            let x = el.apply_adjoint(&p.basis.vector(snap.outcome));
            let sigma = &x * x.adjoint();
            let lhs = (spec.apply_inverse(&sigma) * &o.matrix).trace().re;
            assert!((lhs - est.single_shot(&el, snap.outcome)).abs() < 1e-10);
        }
    }

    #[test]
    fn pauli_protocol_z_on_zero_is_exact() {
        let p = proto(ProtocolId::Pauli, SizeParams::qubits(3));
        let e = estimate(&p, &QuantumState::basis_state(8, 0), &observable_pauli("ZZZ").unwrap(), 100, Strategy::Mean, 1).unwrap();
        assert!((e.mean - 1.0).abs() < 1e-12);
        assert!(e.variance < 1e-24);
    }

    #[test]
    fn haar_unbiased_random_observable() {
        let p = proto(ProtocolId::GlobalHaar, SizeParams::dim(4));
        let mut rng = RandomStream::new(12, 0);
        let rho = random_density_matrix(4, 4, &mut rng);
        let s = QuantumState::mixed(rho.clone()).unwrap();
        let o = Observable::new("h", random_hermitian(4, &mut rng)).unwrap();
        let e = estimate(&p, &s, &o, 20_000, Strategy::MedianOfMeans { groups: 5 }, 2).unwrap();
        let truth = (rho * &o.matrix).trace().re;
        assert!((e.mean - truth).abs() < 5.0 * e.stderr(), "{} vs {truth}", e.mean);
        assert!(e.visible);
    }

    #[test]
    fn groups_validation_and_k1() {
        let p = proto(ProtocolId::LocalClifford, SizeParams::qubits(1));
        let s = QuantumState::basis_state(2, 0);
        let o = observable_pauli("Z").unwrap();
        assert!(estimate(&p, &s, &o, 10, Strategy::MedianOfMeans { groups: 11 }, 1).is_err());
        let e = estimate(&p, &s, &o, 10, Strategy::MedianOfMeans { groups: 1 }, 1).unwrap();
        assert_eq!(e.mean, e.median_of_means);
    }

    #[test]
    fn zsym_decomposition() {
        let z2 = zsym_matrix(2);
        let (vals, _) = hermitian_eig(&z2).unwrap();
        assert_eq!(vals.iter().map(|v| v.round() as i64).collect::<Vec<_>>(), vec![-2, 0, 0, 2]);
        let coeffs = zsym_spherical_coefficients(2).unwrap();
        let c2 = coeffs.iter().find(|(eta, _, _)| eta.parts() == [2]).unwrap().2;
        assert!((c2 + 8f64.sqrt()).abs() < 1e-12, "{c2}");
        for n in [2, 3, 4, 5] {
            let o = observable_zsym(n).unwrap();
            let recon = &o.components.as_ref().unwrap()[0].1;
            assert!(frobenius(&(recon - &o.matrix)) < 1e-9);
            for (eta, _, c) in zsym_spherical_coefficients(n).unwrap() {
                let two_s = partition_two_s(&eta).unwrap();
                let d = two_s as f64 + 1.0;
                // |0⟩ carries m = −1/2, so the sign alternates with 2s.
                let sign = if two_s % 2 == 0 { -1.0 } else { 1.0 };
                let expect = sign * (2.0 * (d + 1.0) * d * (d - 1.0) / 6.0).sqrt();
                assert!((c - expect).abs() < 1e-10, "n={n} {eta}: {c} vs {expect}");
            }
        }
    }

    #[test]
    fn library_observables() {
        let pi = observable_isotypic_projector(&Partition::new(vec![2]).unwrap(), 2).unwrap();
        assert!((pi.matrix.trace().re - 3.0).abs() < 1e-12);
        assert!(frobenius(&(&pi.matrix * &pi.matrix - &pi.matrix)) < 1e-12);
        assert!((observable_ghz(3).unwrap().matrix.trace().re - 1.0).abs() < 1e-15);
        let g = observable_majorana(&[1, 2], 1).unwrap();
        assert!(frobenius(&(&g.matrix - pauli_z())) < 1e-15);
        assert!(observable_majorana(&[1, 1], 2).is_err());
        assert!(observable_majorana(&[5], 2).is_err());
        assert!(observable_pauli("XQ").is_err());
        assert!(Observable::new("x", ComplexMatrix::from_fn(2, 2, |r, c| cr((r + 2 * c) as f64))).is_err());
    }

    #[test]
    fn visibility_examples() {
        let t = proto(ProtocolId::Su2Tensor, SizeParams::qubits(3));
        assert!(visible_check(t.spec().unwrap(), &observable_zsym(3).unwrap()).visible);
        let m = proto(ProtocolId::Matchgate, SizeParams::qubits(2));
        let g = observable_majorana(&[1, 2, 3], 2).unwrap();
        let v = visible_check(m.spec().unwrap(), &g);
        assert!(!v.visible);
        assert!((v.invisible_norm - frobenius(&g.matrix)).abs() < 1e-10);
        let pz = proto(ProtocolId::Pauli, SizeParams::qubits(1));
        assert!(!visible_check(pz.spec().unwrap(), &observable_pauli("X").unwrap()).visible);
    }

    #[test]
    fn jsonl_round_trip_is_bit_exact() {
        let p = proto(ProtocolId::Matchgate, SizeParams::qubits(3));
        let s = QuantumState::ghz(3);
        let o = observable_majorana(&[1, 2], 3).unwrap();
        let est = ShadowEstimator::new(&p, &o).unwrap();
        let runs = run_snapshots(&p, &s, &est, 50, 21).unwrap();
        let records: Vec<SnapshotRecord> = runs
            .iter()
            .enumerate()
            .map(|(k, (snap, _))| SnapshotRecord {
                protocol: p.id,
                seed: 21,
                counter: k as u64,
                descriptor: snap.descriptor.clone(),
                outcome: snap.outcome,
            })
            .collect();
        let mut buf = Vec::new();
        write_snapshots(&mut buf, &records).unwrap();
        let back = read_snapshots(&buf[..]).unwrap();
        assert_eq!(back, records);
        let direct = estimate(&p, &s, &o, 50, Strategy::Mean, 21).unwrap();
        let again = estimate_from_records(&p, &back, &o, 1).unwrap();
        assert_eq!(direct.mean.to_bits(), again.mean.to_bits());
        assert_eq!(direct.variance.to_bits(), again.variance.to_bits());
    }
}
