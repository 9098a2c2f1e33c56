//! Unitary ensembles with reproducible element descriptors.

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    c, cr, expm, frobenius, hadamard, identity, logm_special_orthogonal, pauli_x, pauli_y, pauli_z, tensor_all,
    ComplexMatrix, ComplexVector, RandomStream, C64,
};
use crate::rep::cg::su2_generators;
use crate::rep::young::{all_permutations, permutation_matrix, Partition, YoungRep};

pub const MAX_LOCAL_CLIFFORD_ENUM: usize = 3;
pub const MAX_PAULI_QUBITS: usize = 6;
pub const MAX_PERMUTATION_ENUM: usize = 8;
pub const MAX_SN_IRREP: usize = 6;
pub const MAX_MATCHGATE_MODES: usize = 7;
pub const MAX_FERMION_MODES: usize = 6;
pub const MAX_GLOBAL_CLIFFORD: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FormKind {
    Identity,
    SplitOrthogonal,
    Symplectic,
}

/// Bilinear form preserved by an orthogonal or symplectic ensemble.
#[derive(Clone, Debug)]
pub struct FormMatrix {
    pub kind: FormKind,
    pub matrix: ComplexMatrix,
}

impl FormMatrix {
    pub fn identity(d: usize) -> Self {
        Self { kind: FormKind::Identity, matrix: identity(d) }
    }

    /// Q = [[0, I], [I, 0]].
    pub fn split(d: usize) -> Result<Self> {
        if d < 2 || d % 2 == 1 {
            return Err(Error::InvalidArgument(format!("split form needs even d ≥ 2, got {d}")));
        }
        let h = d / 2;
        let m = ComplexMatrix::from_fn(d, d, |i, j| if (i + h) % d == j { cr(1.0) } else { cr(0.0) });
        Ok(Self { kind: FormKind::SplitOrthogonal, matrix: m })
    }

    /// Ω = [[0, I], [−I, 0]].
    pub fn symplectic(d: usize) -> Result<Self> {
        if d < 2 || d % 2 == 1 {
            return Err(Error::InvalidArgument(format!("symplectic form needs even d, got {d}")));
        }
        let h = d / 2;
        let m = ComplexMatrix::from_fn(d, d, |i, j| {
            if i < h && j == i + h {
                cr(1.0)
            } else if i >= h && j + h == i {
                cr(-1.0)
            } else {
                cr(0.0)
            }
        });
        Ok(Self { kind: FormKind::Symplectic, matrix: m })
    }

    pub fn of_kind(kind: FormKind, d: usize) -> Result<Self> {
        match kind {
            FormKind::Identity => Ok(Self::identity(d)),
            FormKind::SplitOrthogonal => Self::split(d),
            FormKind::Symplectic => Self::symplectic(d),
        }
    }
}

/// Fixed Takagi factor W with W Wᵀ = Q for the split form: each pair (i, i + d/2)
/// carries the block (1/√2)[[1, i], [1, −i]].
pub fn split_takagi_factor(d: usize) -> ComplexMatrix {
    let h = d / 2;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut w = ComplexMatrix::zeros(d, d);
    for k in 0..h {
        w[(k, k)] = cr(s);
        w[(k, k + h)] = c(0.0, s);
        w[(k + h, k)] = cr(s);
        w[(k + h, k + h)] = c(0.0, -s);
    }
    w
}

/// Jordan–Wigner Majoranas γ_{2j−1} = Z…Z X I…I, γ_{2j} = Z…Z Y I…I.
#[derive(Clone, Debug)]
pub struct MajoranaSet {
    pub n: usize,
    pub gammas: Vec<ComplexMatrix>,
}

pub fn majorana_operators(n: usize) -> MajoranaSet {
    assert!(n >= 1, "need at least one mode");
    let mut gammas = Vec::with_capacity(2 * n);
    for j in 0..n {
        for p in [pauli_x(), pauli_y()] {
            let mut f = vec![pauli_z(); j];
            f.push(p);
            f.extend(std::iter::repeat_n(identity(2), n - j - 1));
            gammas.push(tensor_all(&f));
        }
    }
    MajoranaSet { n, gammas }
}

impl MajoranaSet {
    /// Hermitian monomial (−i)^{p(p−1)/2} γ_{μ1}⋯γ_{μp}, indices 1-based.
    pub fn monomial(&self, indices: &[usize]) -> Result<ComplexMatrix> {
        if indices.windows(2).any(|w| w[0] >= w[1]) || indices.iter().any(|&m| m == 0 || m > 2 * self.n) {
            return Err(Error::InvalidArgument(format!(
                "Majorana indices must be strictly increasing within 1..={}, got {indices:?}",
                2 * self.n
            )));
        }
        let d = 1usize << self.n;
        let mut out = identity(d);
        for &m in indices {
            out *= &self.gammas[m - 1];
        }
        let p = indices.len();
        let phase = match (p * p.saturating_sub(1) / 2) % 4 {
            0 => cr(1.0),
            1 => c(0.0, -1.0),
            2 => cr(-1.0),
            _ => c(0.0, 1.0),
        };
        Ok(out * phase)
    }
}

/// A represented group element, dense or as a tensor product of local factors.
#[derive(Clone, Debug)]
pub enum Element {
    Dense(ComplexMatrix),
    Local(Vec<ComplexMatrix>),
}

impl Element {
    pub fn dim(&self) -> usize {
        match self {
            Element::Dense(m) => m.nrows(),
            Element::Local(f) => f.iter().map(|m| m.nrows()).product(),
        }
    }

    pub fn to_dense(&self) -> ComplexMatrix {
        match self {
            Element::Dense(m) => m.clone(),
            Element::Local(f) => tensor_all(f),
        }
    }

    pub fn adjoint(&self) -> Element {
        match self {
            Element::Dense(m) => Element::Dense(m.adjoint()),
            Element::Local(f) => Element::Local(f.iter().map(|m| m.adjoint()).collect()),
        }
    }

    /// U v.
    pub fn apply(&self, v: &ComplexVector) -> ComplexVector {
        match self {
            Element::Dense(m) => m * v,
            Element::Local(f) => apply_local(f, v),
        }
    }

    /// U† v.
    pub fn apply_adjoint(&self, v: &ComplexVector) -> ComplexVector {
        match self {
            Element::Dense(m) => m.ad_mul(v),
            Element::Local(f) => apply_local(&f.iter().map(|m| m.adjoint()).collect::<Vec<_>>(), v),
        }
    }

    /// U a U†.
    pub fn conjugate(&self, a: &ComplexMatrix) -> ComplexMatrix {
        let u = self.to_dense();
        &u * a * u.adjoint()
    }
}

fn apply_local(factors: &[ComplexMatrix], v: &ComplexVector) -> ComplexVector {
    let dims: Vec<usize> = factors.iter().map(|m| m.nrows()).collect();
    let total: usize = dims.iter().product();
    assert_eq!(total, v.len(), "dimension mismatch in local apply");
    let mut cur = v.as_slice().to_vec();
    let mut buf = vec![cr(0.0); *dims.iter().max().unwrap_or(&1)];
    let mut stride = total;
    for (k, f) in factors.iter().enumerate() {
        let dk = dims[k];
        stride /= dk;
        let outer = total / (stride * dk);
        for o in 0..outer {
            for i in 0..stride {
                let base = o * stride * dk + i;
                for (r, b) in buf.iter_mut().enumerate().take(dk) {
                    let mut acc = cr(0.0);
                    for col in 0..dk {
                        acc += f[(r, col)] * cur[base + col * stride];
                    }
                    *b = acc;
                }
                for r in 0..dk {
                    cur[base + r * stride] = buf[r];
                }
            }
        }
    }
    ComplexVector::from_vec(cur)
}

/// Enough data to rebuild an element bit-exactly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "ensemble", rename_all = "kebab-case")]
pub enum ElementDescriptor {
    Identity { d: usize },
    HaarUnitary { d: usize, seed: u64, stream: u64, word_pos: u64 },
    HaarOrthogonal { d: usize, form: FormKind, r: Vec<f64> },
    Symplectic { d: usize, seed: u64, stream: u64, word_pos: u64 },
    GlobalClifford { n: usize, index: usize },
    LocalClifford { indices: Vec<usize> },
    Pauli { indices: Vec<usize> },
    Su2Tensor { n: usize, q: [f64; 4] },
    Su2Spin { two_j: i64, q: [f64; 4] },
    Matchgate { n: usize, q: Vec<f64> },
    ParticlePreserving { n: usize, seed: u64, stream: u64, word_pos: u64 },
    Permutation { perm: Vec<usize> },
    SnIrrep { shape: Vec<usize>, perm: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq)]
pub enum EnsembleKind {
    Trivial { d: usize },
    HaarUnitary { d: usize },
    HaarOrthogonal { d: usize, form: FormKind },
    Symplectic { d: usize },
    GlobalClifford { n: usize },
    LocalClifford { n: usize },
    Pauli { n: usize },
    Su2Tensor { n: usize },
    Su2Spin { two_j: i64 },
    Matchgate { n: usize },
    ParticlePreserving { n: usize },
    Permutation { n: usize },
    SnIrrep { shape: Partition },
}

#[derive(Debug)]
struct Caches {
    cliffords: Vec<ComplexMatrix>,
    /// Full n-qubit Clifford group modulo phase.
    group: Vec<ComplexMatrix>,
    /// γ_μ γ_ν for μ < ν, as dense matrices.
    gamma_pairs: Vec<(usize, usize, ComplexMatrix)>,
    /// a†_j a_k indexed j * n + k.
    hopping: Vec<ComplexMatrix>,
    spin: Option<(ComplexMatrix, ComplexMatrix, ComplexMatrix)>,
    young: Option<YoungRep>,
    takagi: Option<ComplexMatrix>,
}

/// Immutable ensemble; sampling needs a caller-owned stream.
#[derive(Clone, Debug)]
pub struct GroupEnsemble {
    pub kind: EnsembleKind,
    pub name: String,
    pub dim: usize,
    caches: Arc<Caches>,
}

fn empty_caches() -> Caches {
    Caches { cliffords: vec![], group: vec![], gamma_pairs: vec![], hopping: vec![], spin: None, young: None, takagi: None }
}

fn make(kind: EnsembleKind, name: &str, dim: usize, caches: Caches) -> GroupEnsemble {
    GroupEnsemble { kind, name: name.to_string(), dim, caches: Arc::new(caches) }
}

pub fn trivial_ensemble(d: usize) -> GroupEnsemble {
    make(EnsembleKind::Trivial { d }, "trivial", d, empty_caches())
}

pub fn global_haar_ensemble(d: usize) -> GroupEnsemble {
    make(EnsembleKind::HaarUnitary { d }, "haar-unitary", d, empty_caches())
}

pub fn orthogonal_ensemble(d: usize, form: FormKind) -> Result<GroupEnsemble> {
    if d < 2 {
        return Err(Error::InvalidArgument("orthogonal ensemble needs d ≥ 2".into()));
    }
    let mut caches = empty_caches();
    match form {
        FormKind::Identity => {}
        FormKind::SplitOrthogonal => {
            FormMatrix::split(d)?;
            caches.takagi = Some(split_takagi_factor(d));
        }
        FormKind::Symplectic => return Err(Error::Unsupported("symplectic form for an orthogonal ensemble".into())),
    }
    let name = if form == FormKind::Identity { "orthogonal-real" } else { "orthogonal-split" };
    Ok(make(EnsembleKind::HaarOrthogonal { d, form }, name, d, caches))
}

pub fn symplectic_ensemble(d: usize) -> Result<GroupEnsemble> {
    if d < 2 || d % 2 == 1 {
        return Err(Error::InvalidArgument(format!("symplectic ensemble needs even d, got {d}")));
    }
    Ok(make(EnsembleKind::Symplectic { d }, "symplectic", d, empty_caches()))
}

pub fn local_clifford_ensemble(n: usize) -> Result<GroupEnsemble> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one qubit".into()));
    }
    let mut caches = empty_caches();
    caches.cliffords = single_qubit_cliffords();
    Ok(make(EnsembleKind::LocalClifford { n }, "local-clifford", 1 << n, caches))
}

/// Uniform over the n-qubit Clifford group modulo phase, generated by breadth-first closure.
pub fn global_clifford_ensemble(n: usize) -> Result<GroupEnsemble> {
    if n == 0 || n > MAX_GLOBAL_CLIFFORD {
        return Err(Error::TooLarge(1 << n));
    }
    let mut caches = empty_caches();
    caches.group = clifford_group(n);
    Ok(make(EnsembleKind::GlobalClifford { n }, "global-clifford", 1 << n, caches))
}

/// n-qubit Clifford group modulo phase, closed from H_i, S_i and CNOT between neighbors.
pub fn clifford_group(n: usize) -> Vec<ComplexMatrix> {
    let s = ComplexMatrix::from_row_slice(2, 2, &[cr(1.0), cr(0.0), cr(0.0), c(0.0, 1.0)]);
    let d = 1usize << n;
    let local = |q: usize, g: &ComplexMatrix| {
        let f: Vec<ComplexMatrix> = (0..n).map(|k| if k == q { g.clone() } else { identity(2) }).collect();
        tensor_all(&f)
    };
    let mut gens = Vec::new();
    for q in 0..n {
        gens.push(local(q, &hadamard()));
        gens.push(local(q, &s));
    }
    for q in 0..n.saturating_sub(1) {
        let hi = 1usize << (n - 1 - q);
        let lo = 1usize << (n - 2 - q);
        let perm: Vec<usize> = (0..d).map(|k| if k & hi != 0 { k ^ lo } else { k }).collect();
        gens.push(permutation_matrix(&perm));
    }
    let key = |m: &ComplexMatrix| -> Vec<(i64, i64)> {
        m.iter().map(|x| ((x.re * 1e6).round() as i64, (x.im * 1e6).round() as i64)).collect()
    };
    let mut seen = std::collections::HashSet::new();
    let mut out = vec![identity(d)];
    seen.insert(key(&out[0]));
    let mut k = 0;
    while k < out.len() {
        let cur = out[k].clone();
        for g in &gens {
            let next = phase_normalize(&(g * &cur));
            if seen.insert(key(&next)) {
                out.push(next);
            }
        }
        k += 1;
    }
    out
}

pub fn pauli_group_ensemble(n: usize) -> Result<GroupEnsemble> {
    if n == 0 || n > MAX_PAULI_QUBITS {
        return Err(Error::InvalidArgument(format!("Pauli ensemble supports 1 ≤ n ≤ {MAX_PAULI_QUBITS}, got {n}")));
    }
    Ok(make(EnsembleKind::Pauli { n }, "pauli", 1 << n, empty_caches()))
}

pub fn su2_tensor_ensemble(n: usize) -> Result<GroupEnsemble> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one qubit".into()));
    }
    Ok(make(EnsembleKind::Su2Tensor { n }, "su2-tensor", 1 << n, empty_caches()))
}

/// Spin-J irrep, J = two_j / 2.
pub fn su2_spin_ensemble(two_j: i64) -> Result<GroupEnsemble> {
    if two_j < 0 {
        return Err(Error::InvalidSpin(format!("negative spin {two_j}/2")));
    }
    let mut caches = empty_caches();
    caches.spin = Some(su2_generators(two_j));
    Ok(make(EnsembleKind::Su2Spin { two_j }, "su2-spin", (two_j + 1) as usize, caches))
}

pub fn matchgate_ensemble(n: usize) -> Result<GroupEnsemble> {
    if n == 0 || n > MAX_MATCHGATE_MODES {
        return Err(Error::InvalidArgument(format!("matchgate ensemble supports 1 ≤ n ≤ {MAX_MATCHGATE_MODES}, got {n}")));
    }
    let maj = majorana_operators(n);
    let mut caches = empty_caches();
    for mu in 0..2 * n {
        for nu in mu + 1..2 * n {
            caches.gamma_pairs.push((mu, nu, &maj.gammas[mu] * &maj.gammas[nu]));
        }
    }
    Ok(make(EnsembleKind::Matchgate { n }, "matchgate", 1 << n, caches))
}

/// Fermionic annihilators a_j = Z…Z |0⟩⟨1| I…I, so bit 1 marks an occupied mode.
pub fn annihilators(n: usize) -> Vec<ComplexMatrix> {
    let lower = ComplexMatrix::from_row_slice(2, 2, &[cr(0.0), cr(1.0), cr(0.0), cr(0.0)]);
    (0..n)
        .map(|j| {
            let mut f = vec![pauli_z(); j];
            f.push(lower.clone());
            f.extend(std::iter::repeat_n(identity(2), n - j - 1));
            tensor_all(&f)
        })
        .collect()
}

pub fn particle_preserving_ensemble(n: usize) -> Result<GroupEnsemble> {
    if n == 0 || n > MAX_FERMION_MODES {
        return Err(Error::InvalidArgument(format!("particle-preserving ensemble supports 1 ≤ n ≤ {MAX_FERMION_MODES}, got {n}")));
    }
    let a = annihilators(n);
    let mut caches = empty_caches();
    for j in 0..n {
        for k in 0..n {
            caches.hopping.push(a[j].adjoint() * &a[k]);
        }
    }
    Ok(make(EnsembleKind::ParticlePreserving { n }, "particle-preserving", 1 << n, caches))
}

pub fn symmetric_group_ensemble(n: usize) -> Result<GroupEnsemble> {
    if n == 0 {
        return Err(Error::InvalidArgument("need n ≥ 1".into()));
    }
    Ok(make(EnsembleKind::Permutation { n }, "sn-permutation", n, empty_caches()))
}

pub fn sn_irrep_ensemble(shape: &Partition) -> Result<GroupEnsemble> {
    let n = shape.n();
    if n == 0 || n > MAX_SN_IRREP {
        return Err(Error::InvalidArgument(format!("S_n irrep ensemble supports n ≤ {MAX_SN_IRREP}, got {n}")));
    }
    let rep = YoungRep::new(shape);
    let dim = rep.dim();
    let mut caches = empty_caches();
    caches.young = Some(rep);
    Ok(make(EnsembleKind::SnIrrep { shape: shape.clone() }, "sn-irrep", dim, caches))
}

/// Haar unitary from a complex Ginibre matrix, QR and phase fixing.
pub fn haar_unitary(d: usize, rng: &mut RandomStream) -> ComplexMatrix {
    assert!(d >= 1, "dimension must be positive");
    let g = ComplexMatrix::from_fn(d, d, |_, _| rng.complex_normal());
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let mut u = q;
    for k in 0..d {
        let rk = r[(k, k)];
        let ph = if rk.norm() > 0.0 { rk / rk.norm() } else { cr(1.0) };
        for i in 0..d {
            u[(i, k)] *= ph;
        }
    }
    u
}

/// Real Haar orthogonal matrix from Gaussian QR with sign fixing.
pub fn haar_real_orthogonal(d: usize, rng: &mut RandomStream) -> DMatrix<f64> {
    let g = DMatrix::<f64>::from_fn(d, d, |_, _| rng.normal());
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for k in 0..d {
        if r[(k, k)] < 0.0 {
            for i in 0..d {
                q[(i, k)] = -q[(i, k)];
            }
        }
    }
    q
}

/// Haar element of the group preserving `form` (Oᵀ Q O = Q).
pub fn haar_orthogonal(d: usize, rng: &mut RandomStream, form: &FormMatrix) -> Result<ComplexMatrix> {
    if d < 2 || form.matrix.nrows() != d {
        return Err(Error::InvalidArgument(format!("orthogonal sampler needs d ≥ 2 matching the form, got {d}")));
    }
    let r = haar_real_orthogonal(d, rng);
    orthogonal_from_real(&r, form.kind)
}

fn orthogonal_from_real(r: &DMatrix<f64>, kind: FormKind) -> Result<ComplexMatrix> {
    let d = r.nrows();
    let rc = r.map(cr);
    match kind {
        FormKind::Identity => Ok(rc),
        FormKind::SplitOrthogonal => {
            let w = split_takagi_factor(d);
            Ok(&w * rc * w.adjoint())
        }
        FormKind::Symplectic => Err(Error::Unsupported("symplectic form for an orthogonal sampler".into())),
    }
}

/// Haar element of the compact symplectic group Sp(d/2) by quaternionic Gram–Schmidt.
pub fn haar_symplectic(d: usize, rng: &mut RandomStream) -> Result<ComplexMatrix> {
    if d < 2 || d % 2 == 1 {
        return Err(Error::InvalidArgument(format!("symplectic sampler needs even d, got {d}")));
    }
    let h = d / 2;
    let omega = FormMatrix::symplectic(d)?.matrix;
    let mut u = ComplexMatrix::zeros(d, d);
    for k in 0..h {
        loop {
            let mut v = ComplexVector::from_fn(d, |_, _| rng.complex_normal());
            for _ in 0..2 {
                for j in 0..k {
                    for col in [j, j + h] {
                        let e = u.column(col).into_owned();
                        let p = e.dotc(&v);
                        v -= e * p;
                    }
                }
            }
            let norm = v.norm();
            if norm < 1e-8 {
                continue;
            }
            v /= cr(norm);
            let partner = -(&omega * v.conjugate());
            u.set_column(k, &v);
            u.set_column(k + h, &partner);
            break;
        }
    }
    Ok(u)
}

/// The 24 single-qubit Cliffords modulo phase, first nonzero entry real positive,
/// in breadth-first order from the identity under generators H and S.
pub fn single_qubit_cliffords() -> Vec<ComplexMatrix> {
    let s = ComplexMatrix::from_row_slice(2, 2, &[cr(1.0), cr(0.0), cr(0.0), c(0.0, 1.0)]);
    let gens = [hadamard(), s];
    let mut out = vec![identity(2)];
    let mut k = 0;
    while k < out.len() {
        let cur = out[k].clone();
        for g in &gens {
            let next = phase_normalize(&(g * &cur));
            if !out.iter().any(|m| frobenius(&(m - &next)) < 1e-9) {
                out.push(next);
            }
        }
        k += 1;
    }
    out
}

/// Global phase fixed so the first nonzero entry (column-major) is real positive.
pub fn phase_normalize(m: &ComplexMatrix) -> ComplexMatrix {
    let first = m.iter().find(|x| x.norm() > 1e-9).copied().unwrap_or(cr(1.0));
    m * (first.conj() / first.norm())
}

pub fn phase_stripped_paulis() -> [ComplexMatrix; 4] {
    [identity(2), pauli_x(), phase_normalize(&pauli_y()), pauli_z()]
}

fn random_quaternion(rng: &mut RandomStream) -> [f64; 4] {
    loop {
        let q = [rng.normal(), rng.normal(), rng.normal(), rng.normal()];
        let norm = q.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return [q[0] / norm, q[1] / norm, q[2] / norm, q[3] / norm];
        }
    }
}

/// q0 I − i(q1 X + q2 Y + q3 Z).
pub fn su2_from_quaternion(q: &[f64; 4]) -> ComplexMatrix {
    ComplexMatrix::from_row_slice(
        2,
        2,
        &[c(q[0], -q[3]), c(-q[2], -q[1]), c(q[2], -q[1]), c(q[0], q[3])],
    )
}

/// Rotation vector θ with su2_from_quaternion(q) = exp(−i θ·σ/2).
pub fn quaternion_rotation_vector(q: &[f64; 4]) -> [f64; 3] {
    let v = (q[1] * q[1] + q[2] * q[2] + q[3] * q[3]).sqrt();
    if v < 1e-300 {
        return [0.0; 3];
    }
    let angle = 2.0 * v.atan2(q[0]);
    [angle * q[1] / v, angle * q[2] / v, angle * q[3] / v]
}

pub fn quaternion_product(p: &[f64; 4], q: &[f64; 4]) -> [f64; 4] {
    [
        p[0] * q[0] - p[1] * q[1] - p[2] * q[2] - p[3] * q[3],
        p[0] * q[1] + p[1] * q[0] + p[2] * q[3] - p[3] * q[2],
        p[0] * q[2] - p[1] * q[3] + p[2] * q[0] + p[3] * q[1],
        p[0] * q[3] + p[1] * q[2] - p[2] * q[1] + p[3] * q[0],
    ]
}

fn random_permutation(n: usize, rng: &mut RandomStream) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.below(i + 1);
        p.swap(i, j);
    }
    p
}

fn real_to_vec(m: &DMatrix<f64>) -> Vec<f64> {
    // row-major
    let (r, cc) = m.shape();
    (0..r).flat_map(|i| (0..cc).map(move |j| (i, j))).map(|(i, j)| m[(i, j)]).collect()
}

fn vec_to_real(v: &[f64], d: usize) -> Result<DMatrix<f64>> {
    if v.len() != d * d {
        return Err(Error::Shape(format!("expected {} entries, got {}", d * d, v.len())));
    }
    Ok(DMatrix::from_row_slice(d, d, v))
}

/// Haar element of SO(d) as a real matrix.
pub fn haar_special_orthogonal(d: usize, rng: &mut RandomStream) -> DMatrix<f64> {
    let mut q = haar_real_orthogonal(d, rng);
    if q.determinant() < 0.0 {
        for i in 0..d {
            q[(i, 0)] = -q[(i, 0)];
        }
    }
    q
}

impl GroupEnsemble {
    pub fn sample(&self, rng: &mut RandomStream) -> (Element, ElementDescriptor) {
        let (seed, stream, word_pos) = (rng.seed(), rng.stream(), rng.word_pos() as u64);
        let desc = match &self.kind {
            EnsembleKind::Trivial { d } => ElementDescriptor::Identity { d: *d },
            EnsembleKind::HaarUnitary { d } => {
                let u = haar_unitary(*d, rng);
                return (Element::Dense(u), ElementDescriptor::HaarUnitary { d: *d, seed, stream, word_pos });
            }
            EnsembleKind::HaarOrthogonal { d, form } => {
                ElementDescriptor::HaarOrthogonal { d: *d, form: *form, r: real_to_vec(&haar_real_orthogonal(*d, rng)) }
            }
            EnsembleKind::Symplectic { d } => {
                let u = haar_symplectic(*d, rng).expect("validated dimension");
                return (Element::Dense(u), ElementDescriptor::Symplectic { d: *d, seed, stream, word_pos });
            }
            EnsembleKind::GlobalClifford { n } => {
                ElementDescriptor::GlobalClifford { n: *n, index: rng.below(self.caches.group.len()) }
            }
            EnsembleKind::LocalClifford { n } => {
                ElementDescriptor::LocalClifford { indices: (0..*n).map(|_| rng.below(24)).collect() }
            }
            EnsembleKind::Pauli { n } => ElementDescriptor::Pauli { indices: (0..*n).map(|_| rng.below(4)).collect() },
            EnsembleKind::Su2Tensor { n } => ElementDescriptor::Su2Tensor { n: *n, q: random_quaternion(rng) },
            EnsembleKind::Su2Spin { two_j } => ElementDescriptor::Su2Spin { two_j: *two_j, q: random_quaternion(rng) },
            EnsembleKind::Matchgate { n } => {
                ElementDescriptor::Matchgate { n: *n, q: real_to_vec(&haar_special_orthogonal(2 * n, rng)) }
            }
            EnsembleKind::ParticlePreserving { n } => {
                let u = self.particle_preserving_from_stream(*n, rng);
                return (Element::Dense(u), ElementDescriptor::ParticlePreserving { n: *n, seed, stream, word_pos });
            }
            EnsembleKind::Permutation { n } => ElementDescriptor::Permutation { perm: random_permutation(*n, rng) },
            EnsembleKind::SnIrrep { shape } => ElementDescriptor::SnIrrep {
                shape: shape.parts().to_vec(),
                perm: random_permutation(shape.n(), rng),
            },
        };
        let el = self.reconstruct(&desc).expect("descriptor produced by this ensemble");
        (el, desc)
    }

    pub fn reconstruct(&self, desc: &ElementDescriptor) -> Result<Element> {
        let mismatch = || Error::InvalidArgument(format!("descriptor {desc:?} does not belong to {}", self.name));
        match (&self.kind, desc) {
            (EnsembleKind::Trivial { d }, ElementDescriptor::Identity { d: dd }) if d == dd => Ok(Element::Dense(identity(*d))),
            (EnsembleKind::HaarUnitary { d }, ElementDescriptor::HaarUnitary { d: dd, seed, stream, word_pos }) if d == dd => {
                let mut rng = RandomStream::at(*seed, *stream, *word_pos as u128);
                Ok(Element::Dense(haar_unitary(*d, &mut rng)))
            }
            (EnsembleKind::HaarOrthogonal { d, form }, ElementDescriptor::HaarOrthogonal { d: dd, form: ff, r })
                if d == dd && form == ff =>
            {
                Ok(Element::Dense(orthogonal_from_real(&vec_to_real(r, *d)?, *form)?))
            }
            (EnsembleKind::Symplectic { d }, ElementDescriptor::Symplectic { d: dd, seed, stream, word_pos }) if d == dd => {
                let mut rng = RandomStream::at(*seed, *stream, *word_pos as u128);
                Ok(Element::Dense(haar_symplectic(*d, &mut rng)?))
            }
            (EnsembleKind::GlobalClifford { n }, ElementDescriptor::GlobalClifford { n: nn, index }) if n == nn => {
                self.caches.group.get(*index).cloned().map(Element::Dense).ok_or_else(mismatch)
            }
            (EnsembleKind::LocalClifford { n }, ElementDescriptor::LocalClifford { indices }) if indices.len() == *n => {
                let cl = &self.caches.cliffords;
                let f = indices.iter().map(|&i| cl.get(i).cloned().ok_or_else(mismatch)).collect::<Result<Vec<_>>>()?;
                Ok(Element::Local(f))
            }
            (EnsembleKind::Pauli { n }, ElementDescriptor::Pauli { indices }) if indices.len() == *n => {
                let p = phase_stripped_paulis();
                let f = indices.iter().map(|&i| p.get(i).cloned().ok_or_else(mismatch)).collect::<Result<Vec<_>>>()?;
                Ok(Element::Local(f))
            }
            (EnsembleKind::Su2Tensor { n }, ElementDescriptor::Su2Tensor { n: nn, q }) if n == nn => {
                Ok(Element::Local(vec![su2_from_quaternion(q); *n]))
            }
            (EnsembleKind::Su2Spin { two_j }, ElementDescriptor::Su2Spin { two_j: tj, q }) if two_j == tj => {
                let (jx, jy, jz) = self.caches.spin.as_ref().expect("spin cache");
                let th = quaternion_rotation_vector(q);
                let gen = jx * cr(th[0]) + jy * cr(th[1]) + jz * cr(th[2]);
                Ok(Element::Dense(expm(&(gen * c(0.0, -1.0)))))
            }
            (EnsembleKind::Matchgate { n }, ElementDescriptor::Matchgate { n: nn, q }) if n == nn => {
                let qm = vec_to_real(q, 2 * n)?;
                Ok(Element::Dense(self.matchgate_unitary(&qm)?))
            }
            (EnsembleKind::ParticlePreserving { n }, ElementDescriptor::ParticlePreserving { n: nn, seed, stream, word_pos })
                if n == nn =>
            {
                let mut rng = RandomStream::at(*seed, *stream, *word_pos as u128);
                Ok(Element::Dense(self.particle_preserving_from_stream(*n, &mut rng)))
            }
            (EnsembleKind::Permutation { n }, ElementDescriptor::Permutation { perm }) if perm.len() == *n => {
                check_permutation(perm)?;
                Ok(Element::Dense(permutation_matrix(perm)))
            }
            (EnsembleKind::SnIrrep { shape }, ElementDescriptor::SnIrrep { shape: sh, perm }) if shape.parts() == sh.as_slice() => {
                check_permutation(perm)?;
                Ok(Element::Dense(self.caches.young.as_ref().expect("young cache").matrix(perm)))
            }
            _ => Err(mismatch()),
        }
    }

    /// U = expm(−¼ Σ A_{μν} γ_μ γ_ν) with A = −log Q, so that U γ_μ U† = Σ_ν Q_{νμ} γ_ν.
    pub fn matchgate_unitary(&self, q: &DMatrix<f64>) -> Result<ComplexMatrix> {
        let a = logm_special_orthogonal(&q.map(cr))?.map(|x| -x.re);
        let d = self.dim;
        let mut h = ComplexMatrix::zeros(d, d);
        for (mu, nu, g) in &self.caches.gamma_pairs {
            // A antisymmetric: the (μ,ν) and (ν,μ) terms add up.
            h += g * cr(-0.5 * a[(*mu, *nu)]);
        }
        Ok(expm(&h))
    }

    fn particle_preserving_from_stream(&self, n: usize, rng: &mut RandomStream) -> ComplexMatrix {
        let u = haar_unitary(n, rng);
        let h = unitary_log_hermitian(&u);
        let d = self.dim;
        let mut gen = ComplexMatrix::zeros(d, d);
        for j in 0..n {
            for k in 0..n {
                gen += &self.caches.hopping[j * n + k] * h[(j, k)];
            }
        }
        let gen = (&gen + gen.adjoint()).scale(0.5);
        expm(&(gen * c(0.0, 1.0)))
    }

    pub fn cardinality(&self) -> Option<u128> {
        match &self.kind {
            EnsembleKind::Trivial { .. } => Some(1),
            EnsembleKind::GlobalClifford { .. } => Some(self.caches.group.len() as u128),
            EnsembleKind::LocalClifford { n } => Some(24u128.pow(*n as u32)),
            EnsembleKind::Pauli { n } => Some(4u128.pow(*n as u32)),
            EnsembleKind::Permutation { n } => Some((1..=*n as u128).product()),
            EnsembleKind::SnIrrep { shape } => Some((1..=shape.n() as u128).product()),
            _ => None,
        }
    }

    pub fn has_enumerator(&self) -> bool {
        match &self.kind {
            EnsembleKind::Trivial { .. } | EnsembleKind::GlobalClifford { .. } => true,
            EnsembleKind::LocalClifford { n } => *n <= MAX_LOCAL_CLIFFORD_ENUM,
            EnsembleKind::Pauli { .. } => true,
            EnsembleKind::Permutation { n } => *n <= MAX_PERMUTATION_ENUM,
            EnsembleKind::SnIrrep { .. } => true,
            _ => false,
        }
    }

    /// All descriptors of a finite ensemble, in a fixed order.
    pub fn enumerate_descriptors(&self) -> Result<Vec<ElementDescriptor>> {
        if !self.has_enumerator() {
            return Err(Error::NoEnumerator(format!("{} (dim {})", self.name, self.dim)));
        }
        let product = |n: usize, base: usize| -> Vec<Vec<usize>> {
            let total = base.pow(n as u32);
            (0..total)
                .map(|mut k| {
                    let mut idx = vec![0; n];
                    for slot in idx.iter_mut().rev() {
                        *slot = k % base;
                        k /= base;
                    }
                    idx
                })
                .collect()
        };
        Ok(match &self.kind {
            EnsembleKind::Trivial { d } => vec![ElementDescriptor::Identity { d: *d }],
            EnsembleKind::GlobalClifford { n } => {
                (0..self.caches.group.len()).map(|index| ElementDescriptor::GlobalClifford { n: *n, index }).collect()
            }
            EnsembleKind::LocalClifford { n } => {
                product(*n, 24).into_iter().map(|indices| ElementDescriptor::LocalClifford { indices }).collect()
            }
            EnsembleKind::Pauli { n } => product(*n, 4).into_iter().map(|indices| ElementDescriptor::Pauli { indices }).collect(),
            EnsembleKind::Permutation { n } => {
                all_permutations(*n).into_iter().map(|perm| ElementDescriptor::Permutation { perm }).collect()
            }
            EnsembleKind::SnIrrep { shape } => all_permutations(shape.n())
                .into_iter()
                .map(|perm| ElementDescriptor::SnIrrep { shape: shape.parts().to_vec(), perm })
                .collect(),
            _ => unreachable!(),
        })
    }

    pub fn enumerate(&self) -> Result<Vec<(Element, ElementDescriptor)>> {
        self.enumerate_descriptors()?
            .into_iter()
            .map(|d| Ok((self.reconstruct(&d)?, d)))
            .collect()
    }
}

fn check_permutation(p: &[usize]) -> Result<()> {
    let mut seen = vec![false; p.len()];
    for &x in p {
        if x >= p.len() || seen[x] {
            return Err(Error::InvalidArgument(format!("{p:?} is not a permutation")));
        }
        seen[x] = true;
    }
    Ok(())
}

/// Hermitian h with exp(i h) = u for unitary u, eigenphases in (−π, π].
pub fn unitary_log_hermitian(u: &ComplexMatrix) -> ComplexMatrix {
    let n = u.nrows();
    let (z, t) = nalgebra::linalg::Schur::new(u.clone()).unpack();
    let diag = ComplexMatrix::from_fn(n, n, |i, j| if i == j { cr(t[(i, i)].arg()) } else { cr(0.0) });
    let h = &z * diag * z.adjoint();
    (&h + h.adjoint()).scale(0.5)
}

/// Hamming weight of a computational index.
pub fn hamming_weight(k: usize) -> usize {
    k.count_ones() as usize
}

#[allow(dead_code)]
fn _assert_send_sync() {
    fn f<T: Send + Sync>() {}
    f::<GroupEnsemble>();
    f::<C64>();
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hs_inner, unitarity_deviation};

    fn all_ensembles() -> Vec<GroupEnsemble> {
        vec![
            trivial_ensemble(3),
            global_haar_ensemble(4),
            orthogonal_ensemble(4, FormKind::Identity).unwrap(),
            orthogonal_ensemble(4, FormKind::SplitOrthogonal).unwrap(),
            symplectic_ensemble(4).unwrap(),
            local_clifford_ensemble(2).unwrap(),
            global_clifford_ensemble(2).unwrap(),
            pauli_group_ensemble(2).unwrap(),
            su2_tensor_ensemble(3).unwrap(),
            su2_spin_ensemble(3).unwrap(),
            matchgate_ensemble(3).unwrap(),
            particle_preserving_ensemble(3).unwrap(),
            symmetric_group_ensemble(4).unwrap(),
            sn_irrep_ensemble(&Partition::new(vec![3, 1, 1]).unwrap()).unwrap(),
        ]
    }

    #[test]
    fn samplers_are_unitary_and_round_trip() {
        let mut rng = RandomStream::new(11, 0);
        for e in all_ensembles() {
            for _ in 0..20 {
                let (el, desc) = e.sample(&mut rng);
                let u = el.to_dense();
                assert_eq!(u.nrows(), e.dim);
                assert!(unitarity_deviation(&u) < 1e-9, "{}", e.name);
                let json = serde_json::to_string(&desc).unwrap();
                let back: ElementDescriptor = serde_json::from_str(&json).unwrap();
                assert_eq!(back, desc);
                let v = e.reconstruct(&back).unwrap().to_dense();
                assert_eq!(v, u, "{} bit-exact reconstruction", e.name);
            }
        }
    }

    #[test]
    fn haar_unitary_first_moment() {
        let d = 3;
        let mut rng = RandomStream::new(5, 1);
        let n = 10_000;
        let xs: Vec<f64> = (0..n).map(|_| haar_unitary(d, &mut rng)[(0, 0)].norm_sqr()).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((mean - 1.0 / d as f64).abs() < 5.0 * (var / n as f64).sqrt());
        let a = haar_unitary(4, &mut RandomStream::new(9, 9));
        let b = haar_unitary(4, &mut RandomStream::new(9, 9));
        assert_eq!(a, b);
    }

    #[test]
    fn orthogonal_forms() {
        let mut rng = RandomStream::new(2, 0);
        let id = FormMatrix::identity(5);
        let o = haar_orthogonal(5, &mut rng, &id).unwrap();
        assert!(o.iter().all(|x| x.im.abs() < 1e-12));
        assert!(unitarity_deviation(&o) < 1e-10);
        for d in [2, 4, 8] {
            let q = FormMatrix::split(d).unwrap();
            let w = split_takagi_factor(d);
            assert!(frobenius(&(&w * w.transpose() - &q.matrix)) < 1e-14);
            for _ in 0..10 {
                let o = haar_orthogonal(d, &mut rng, &q).unwrap();
                assert!(frobenius(&(o.transpose() * &q.matrix * &o - &q.matrix)) < 1e-9);
            }
        }
    }

    #[test]
    fn symplectic_form_and_su2_moment() {
        let mut rng = RandomStream::new(4, 0);
        for d in [2, 4, 6] {
            let om = FormMatrix::symplectic(d).unwrap().matrix;
            for _ in 0..10 {
                let u = haar_symplectic(d, &mut rng).unwrap();
                assert!(frobenius(&(u.transpose() * &om * &u - &om)) < 1e-9);
                assert!(unitarity_deviation(&u) < 1e-10);
            }
        }
        assert!(haar_symplectic(3, &mut rng).is_err());
        let n = 10_000;
        let xs: Vec<f64> = (0..n).map(|_| haar_symplectic(2, &mut rng).unwrap()[(0, 0)].norm_sqr()).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((mean - 0.5).abs() < 5.0 * (var / n as f64).sqrt());
    }

    #[test]
    fn single_qubit_clifford_closure() {
        let cl = single_qubit_cliffords();
        assert_eq!(cl.len(), 24);
        assert!(frobenius(&(&cl[0] - identity(2))) < 1e-15);
        let paulis = [pauli_x(), pauli_y(), pauli_z()];
        for g in &cl {
            for p in &paulis {
                let img = g * p * g.adjoint();
                let hits = paulis
                    .iter()
                    .filter(|q| frobenius(&(&img - *q)) < 1e-9 || frobenius(&(&img + *q)) < 1e-9)
                    .count();
                assert_eq!(hits, 1);
            }
            for h in &cl {
                let prod = phase_normalize(&(g * h));
                assert!(cl.iter().any(|m| frobenius(&(m - &prod)) < 1e-9));
            }
        }
    }

    #[test]
    fn global_clifford_orders() {
        assert_eq!(clifford_group(1).len(), 24);
        let e = global_clifford_ensemble(2).unwrap();
        assert_eq!(e.cardinality(), Some(11520));
        assert!(global_clifford_ensemble(3).is_err());
    }

    #[test]
    fn enumerations() {
        assert_eq!(local_clifford_ensemble(1).unwrap().cardinality(), Some(24));
        assert_eq!(local_clifford_ensemble(2).unwrap().enumerate().unwrap().len(), 576);
        assert!(local_clifford_ensemble(4).unwrap().enumerate().is_err());
        let p1 = pauli_group_ensemble(1).unwrap().enumerate().unwrap();
        assert_eq!(p1.len(), 4);
        assert_eq!(pauli_group_ensemble(2).unwrap().cardinality(), Some(16));
        assert!(pauli_group_ensemble(7).is_err());
        let s3 = symmetric_group_ensemble(3).unwrap().enumerate().unwrap();
        assert_eq!(s3.len(), 6);
        for (el, _) in &s3 {
            let m = el.to_dense();
            for i in 0..3 {
                assert_eq!(m.row(i).iter().filter(|x| x.norm() > 0.5).count(), 1);
                assert_eq!(m.column(i).iter().filter(|x| x.norm() > 0.5).count(), 1);
            }
        }
        let sn = sn_irrep_ensemble(&Partition::new(vec![3, 1, 1]).unwrap()).unwrap();
        assert_eq!(sn.dim, 6);
        assert_eq!(sn.cardinality(), Some(120));
        let els = sn.enumerate().unwrap();
        assert!((els[0].0.to_dense().trace().re - 6.0).abs() < 1e-12);
        for (el, _) in els.iter().step_by(7) {
            let m = el.to_dense();
            assert!(m.iter().all(|x| x.im == 0.0));
            assert!(unitarity_deviation(&m) < 1e-10);
        }
    }

    #[test]
    fn local_apply_matches_dense() {
        let mut rng = RandomStream::new(8, 0);
        let e = local_clifford_ensemble(3).unwrap();
        for _ in 0..5 {
            let (el, _) = e.sample(&mut rng);
            let v = crate::linalg::random_pure_state(8, &mut rng);
            let dense = el.to_dense();
            assert!((el.apply(&v) - &dense * &v).norm() < 1e-12);
            assert!((el.apply_adjoint(&v) - dense.adjoint() * &v).norm() < 1e-12);
        }
    }

    #[test]
    fn su2_representations() {
        let mut rng = RandomStream::new(6, 0);
        let e = su2_tensor_ensemble(2).unwrap();
        let swap = permutation_matrix(&[0, 2, 1, 3]);
        let (el, _) = e.sample(&mut rng);
        let u = el.to_dense();
        assert!(frobenius(&(&u * &swap - &swap * &u)) < 1e-12);
        let half = su2_spin_ensemble(1).unwrap();
        let (el, _) = half.sample(&mut rng);
        let det = el.to_dense().determinant();
        assert!((det - cr(1.0)).norm() < 1e-10);
        let spin = su2_spin_ensemble(3).unwrap();
        for _ in 0..100 {
            let p = random_quaternion(&mut rng);
            let q = random_quaternion(&mut rng);
            let rp = spin.reconstruct(&ElementDescriptor::Su2Spin { two_j: 3, q: p }).unwrap().to_dense();
            let rq = spin.reconstruct(&ElementDescriptor::Su2Spin { two_j: 3, q }).unwrap().to_dense();
            let pq = quaternion_product(&p, &q);
            let rpq = spin.reconstruct(&ElementDescriptor::Su2Spin { two_j: 3, q: pq }).unwrap().to_dense();
            assert!(frobenius(&(rp * rq - rpq)) < 1e-8);
        }
        // spin-1/2 element equals the quaternion matrix in the m = +1/2, −1/2 ordering
        let q = random_quaternion(&mut rng);
        let a = half.reconstruct(&ElementDescriptor::Su2Spin { two_j: 1, q }).unwrap().to_dense();
        assert!(frobenius(&(a - su2_from_quaternion(&q))) < 1e-12);
    }

    #[test]
    fn majoranas() {
        let m = majorana_operators(2);
        assert!(frobenius(&(&m.gammas[2] - tensor_all(&[pauli_z(), pauli_x()]))) < 1e-15);
        let n = 3;
        let m = majorana_operators(n);
        let d = 1 << n;
        for a in 0..2 * n {
            assert!(frobenius(&(&m.gammas[a] - m.gammas[a].adjoint())) < 1e-15);
            for b in 0..2 * n {
                let anti = &m.gammas[a] * &m.gammas[b] + &m.gammas[b] * &m.gammas[a];
                let want = if a == b { identity(d) * cr(2.0) } else { ComplexMatrix::zeros(d, d) };
                assert!(frobenius(&(anti - want)) < 1e-14);
            }
        }
        let m1 = majorana_operators(1);
        let g = m1.monomial(&[1, 2]).unwrap();
        assert!(frobenius(&(g - pauli_z())) < 1e-15);
        let g3 = majorana_operators(3).monomial(&[1, 4, 5]).unwrap();
        assert!(frobenius(&(&g3 - g3.adjoint())) < 1e-14);
        assert!(m1.monomial(&[2, 1]).is_err());
    }

    #[test]
    fn matchgate_covariance_and_parity() {
        let n = 3;
        let e = matchgate_ensemble(n).unwrap();
        let maj = majorana_operators(n);
        let mut rng = RandomStream::new(12, 0);
        for _ in 0..10 {
            let (el, desc) = e.sample(&mut rng);
            let ElementDescriptor::Matchgate { q, .. } = &desc else { panic!() };
            let qm = DMatrix::from_row_slice(2 * n, 2 * n, q);
            assert!((qm.determinant() - 1.0).abs() < 1e-8);
            let u = el.to_dense();
            for mu in 0..2 * n {
                let lhs = &u * &maj.gammas[mu] * u.adjoint();
                let mut rhs = ComplexMatrix::zeros(1 << n, 1 << n);
                for nu in 0..2 * n {
                    rhs += &maj.gammas[nu] * cr(qm[(nu, mu)]);
                }
                assert!(frobenius(&(lhs - rhs)) < 1e-8);
            }
            for a in 0..1usize << n {
                for b in 0..1usize << n {
                    if hamming_weight(a) % 2 != hamming_weight(b) % 2 {
                        assert!(u[(a, b)].norm() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn particle_preserving_structure() {
        let n = 3;
        let e = particle_preserving_ensemble(n).unwrap();
        let a = annihilators(n);
        let num = a.iter().fold(ComplexMatrix::zeros(8, 8), |acc, x| acc + x.adjoint() * x);
        let mut rng = RandomStream::new(13, 0);
        let (el, desc) = e.sample(&mut rng);
        let u = el.to_dense();
        assert!(frobenius(&(&u * &num - &num * &u)) < 1e-9);
        let ElementDescriptor::ParticlePreserving { seed, stream, word_pos, .. } = desc else { panic!() };
        let single = haar_unitary(n, &mut RandomStream::at(seed, stream, word_pos as u128));
        // one-particle states a†_k|0⟩ sit at index 1 << (n − 1 − k)
        for j in 0..n {
            for k in 0..n {
                let r = 1usize << (n - 1 - j);
                let cidx = 1usize << (n - 1 - k);
                assert!((u[(r, cidx)] - single[(j, k)]).norm() < 1e-9);
            }
        }
        let _ = hs_inner(&u, &u).unwrap();
    }
}
