//! Analytic isotypic decompositions of measurement channels.
//!
//! A [`ChannelSpec`] lists isotypic components of End(H) with exact eigenvalues
//! a_λ = d_λ^H / d_λ and an orthogonal projection for each. Components need not
//! cover End(H); whatever is left over is invisible and carries eigenvalue 0.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::bases::{schur_basis, schur_block_offsets, spherical_entries};
use crate::ensembles::{annihilators, FormMatrix};
use crate::error::{Error, Result};
use crate::linalg::{c, cr, hermitian_eig, identity, ComplexMatrix, C64};
use crate::protocol::{ProtocolId, SizeParams};
use crate::rep::ndcse::{h_invariant_dimension, CharacterFn, IrrepSpec, SubgroupSpec};
use crate::rep::young::{all_permutations, Partition, YoungRep};

pub type Rational = Ratio<i128>;

/// Sparse matrix as (row, col, value) triples.
pub type SparseOp = Vec<(usize, usize, C64)>;

pub const MAX_SN_PERMUTATION: usize = 7;

/// HS-orthonormal operators B = F S F†, with S sparse and F an optional unitary frame.
#[derive(Clone, Debug)]
pub struct OpBasis {
    pub dim: usize,
    pub frame: Option<Arc<ComplexMatrix>>,
    pub ops: Vec<SparseOp>,
}

impl OpBasis {
    pub fn new(dim: usize, frame: Option<Arc<ComplexMatrix>>, ops: Vec<SparseOp>) -> Self {
        Self { dim, frame, ops }
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// F† o F.
    pub fn to_frame(&self, o: &ComplexMatrix) -> ComplexMatrix {
        match &self.frame {
            Some(f) => f.adjoint() * o * f.as_ref(),
            None => o.clone(),
        }
    }

    /// F x F†.
    pub fn from_frame(&self, x: &ComplexMatrix) -> ComplexMatrix {
        match &self.frame {
            Some(f) => f.as_ref() * x * f.adjoint(),
            None => x.clone(),
        }
    }

    /// ⟨B_k, o⟩ given o already in frame coordinates.
    pub fn coefficients_in_frame(&self, of: &ComplexMatrix) -> Vec<C64> {
        self.ops.iter().map(|op| op.iter().map(|&(i, j, v)| v.conj() * of[(i, j)]).sum()).collect()
    }

    pub fn coefficients(&self, o: &ComplexMatrix) -> Vec<C64> {
        self.coefficients_in_frame(&self.to_frame(o))
    }

    /// out += weight · Σ_k coeffs_k S_k, in frame coordinates.
    pub fn accumulate_in_frame(&self, coeffs: &[C64], weight: C64, out: &mut ComplexMatrix) {
        for (op, &cf) in self.ops.iter().zip(coeffs) {
            let s = cf * weight;
            if s == cr(0.0) {
                continue;
            }
            for &(i, j, v) in op {
                out[(i, j)] += s * v;
            }
        }
    }

    pub fn project(&self, o: &ComplexMatrix) -> ComplexMatrix {
        let of = self.to_frame(o);
        let coeffs = self.coefficients_in_frame(&of);
        let mut acc = ComplexMatrix::zeros(self.dim, self.dim);
        self.accumulate_in_frame(&coeffs, cr(1.0), &mut acc);
        self.from_frame(&acc)
    }

    /// Dense element k in computational coordinates.
    pub fn element(&self, k: usize) -> ComplexMatrix {
        self.from_frame(&sparse_to_dense(&self.ops[k], self.dim))
    }
}

pub fn sparse_to_dense(op: &SparseOp, d: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(d, d);
    for &(i, j, v) in op {
        m[(i, j)] += v;
    }
    m
}

fn scale_op(op: &SparseOp, s: C64) -> SparseOp {
    op.iter().map(|&(i, j, v)| (i, j, v * s)).collect()
}

/// Sums entries with equal positions.
fn merge_op(op: SparseOp) -> SparseOp {
    let mut map: BTreeMap<(usize, usize), C64> = BTreeMap::new();
    for (i, j, v) in op {
        *map.entry((j, i)).or_insert(cr(0.0)) += v;
    }
    map.into_iter().filter(|(_, v)| v.norm() > 1e-15).map(|((j, i), v)| (i, j, v)).collect()
}

/// How a component's orthogonal projection is evaluated.
#[derive(Clone, Debug)]
pub enum Projection {
    Basis(OpBasis),
    /// Onto the span of the identity.
    Trace,
    /// Onto traceless operators.
    Traceless,
    /// With M = A F: the symmetric or antisymmetric part of M mapped back by F⁻¹,
    /// optionally with the identity direction removed.
    Form { form: Arc<ComplexMatrix>, symmetric: bool, remove_trace: bool },
    /// Local Pauli weight exactly on the qubits in `mask` (bit q is qubit q).
    LocalSupport { n: usize, mask: usize },
}

impl Projection {
    pub fn apply(&self, o: &ComplexMatrix) -> ComplexMatrix {
        let d = o.nrows();
        match self {
            Projection::Basis(b) => b.project(o),
            Projection::Trace => identity(d) * (o.trace() / d as f64),
            Projection::Traceless => o - identity(d) * (o.trace() / d as f64),
            Projection::Form { form, symmetric, remove_trace } => {
                let m = o * form.as_ref();
                let part = if *symmetric { (&m + m.transpose()) * cr(0.5) } else { (&m - m.transpose()) * cr(0.5) };
                let mut out = part * form.adjoint();
                if *remove_trace {
                    out -= identity(d) * (o.trace() / d as f64);
                }
                out
            }
            Projection::LocalSupport { n, mask } => {
                let mut cur = o.clone();
                for q in 0..*n {
                    let t = site_trace_part(&cur, *n, q);
                    cur = if mask >> q & 1 == 1 { cur - t } else { t };
                }
                cur
            }
        }
    }
}

/// (I/2) ⊗ Tr_q(A) with the identity put back on qubit q (qubit 0 is the MSB).
pub fn site_trace_part(a: &ComplexMatrix, n: usize, q: usize) -> ComplexMatrix {
    let d = a.nrows();
    let bit = 1usize << (n - 1 - q);
    ComplexMatrix::from_fn(d, d, |r, col| {
        if (r & bit) == (col & bit) {
            (a[(r & !bit, col & !bit)] + a[(r | bit, col | bit)]) * 0.5
        } else {
            cr(0.0)
        }
    })
}

#[derive(Clone, Debug)]
pub struct IsotypicComponent {
    pub label: String,
    /// Irrep type key; components sharing a key belong to one isotypic of End(H).
    pub irrep_type: String,
    pub a: Rational,
    /// d_λ.
    pub dim: usize,
    /// d_λ^H.
    pub dim_h: usize,
    pub multiplicity: usize,
    /// Whether the component lies in L^D = ⊕ End(H^{η,i}), the operators
    /// block-diagonal in the irrep decomposition of H.
    pub in_diagonal: bool,
    pub projection: Projection,
}

impl IsotypicComponent {
    pub fn a_f64(&self) -> f64 {
        self.a.to_f64().expect("finite rational")
    }

    pub fn subspace_dim(&self) -> usize {
        self.dim * self.multiplicity
    }

    pub fn is_visible(&self) -> bool {
        self.in_diagonal && !self.a.is_zero()
    }

    pub fn project(&self, o: &ComplexMatrix) -> ComplexMatrix {
        self.projection.apply(o)
    }

    /// Explicit HS-orthonormal basis of the component.
    pub fn basis(&self, d: usize) -> Result<OpBasis> {
        let ops = match &self.projection {
            Projection::Basis(b) => return Ok(b.clone()),
            Projection::Trace => vec![(0..d).map(|i| (i, i, cr(1.0 / (d as f64).sqrt()))).collect()],
            Projection::Traceless => {
                let mut ops = Vec::new();
                for j in 0..d {
                    for i in 0..d {
                        if i != j {
                            ops.push(vec![(i, j, cr(1.0))]);
                        }
                    }
                }
                ops.extend(helmert(&(0..d).map(|i| vec![(i, i, cr(1.0))]).collect::<Vec<_>>()));
                ops
            }
            Projection::Form { form, symmetric, remove_trace } => form_basis(form, *symmetric, *remove_trace)?,
            Projection::LocalSupport { n, mask } => {
                let norm = cr(1.0 / (d as f64).sqrt());
                let mut ops = Vec::new();
                for digits in pauli_strings(*n) {
                    let support = digits.iter().enumerate().all(|(q, &p)| (p != 0) == (mask >> q & 1 == 1));
                    if support {
                        ops.push(scale_op(&pauli_string_sparse(&digits), norm));
                    }
                }
                ops
            }
        };
        Ok(OpBasis::new(d, None, ops))
    }
}

/// Orthonormal complement of the uniform combination of equal-norm orthonormal ops.
fn helmert(ops: &[SparseOp]) -> Vec<SparseOp> {
    let mut out = Vec::new();
    for m in 1..ops.len() {
        let norm = 1.0 / ((m * (m + 1)) as f64).sqrt();
        let mut acc: SparseOp = Vec::new();
        for op in &ops[..m] {
            acc.extend(scale_op(op, cr(norm)));
        }
        acc.extend(scale_op(&ops[m], cr(-(m as f64) * norm)));
        out.push(merge_op(acc));
    }
    out
}

fn form_basis(form: &ComplexMatrix, symmetric: bool, remove_trace: bool) -> Result<Vec<SparseOp>> {
    let d = form.nrows();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut m_ops: Vec<SparseOp> = Vec::new();
    if symmetric {
        for i in 0..d {
            m_ops.push(vec![(i, i, cr(1.0))]);
        }
    }
    for j in 0..d {
        for i in 0..j {
            let sign = if symmetric { 1.0 } else { -1.0 };
            m_ops.push(vec![(i, j, cr(s)), (j, i, cr(sign * s))]);
        }
    }
    let mut ops = Vec::new();
    if remove_trace {
        let coeff: Vec<C64> = m_ops.iter().map(|op| op.iter().map(|&(i, j, v)| v.conj() * form[(i, j)]).sum()).collect();
        let support: Vec<usize> = (0..m_ops.len()).filter(|&k| coeff[k].norm() > 1e-12).collect();
        let mag = support.first().map(|&k| coeff[k].norm()).unwrap_or(0.0);
        if support.iter().any(|&k| (coeff[k].norm() - mag).abs() > 1e-12) {
            return Err(Error::Unsupported("form with unequal weights".into()));
        }
        for (k, op) in m_ops.iter().enumerate() {
            if !support.contains(&k) {
                ops.push(op.clone());
            }
        }
        let phased: Vec<SparseOp> = support.iter().map(|&k| scale_op(&m_ops[k], coeff[k] / coeff[k].norm())).collect();
        ops.extend(helmert(&phased));
    } else {
        ops = m_ops;
    }
    // A = M F†.
    let finv = form.adjoint();
    let mut rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); d];
    for k in 0..d {
        for l in 0..d {
            if finv[(k, l)].norm() > 1e-15 {
                rows[k].push((l, finv[(k, l)]));
            }
        }
    }
    Ok(ops
        .into_iter()
        .map(|op| {
            let mut a = Vec::new();
            for (i, k, v) in op {
                for &(l, f) in &rows[k] {
                    a.push((i, l, v * f));
                }
            }
            merge_op(a)
        })
        .collect())
}

/// All Pauli strings on n qubits as digit vectors (0 = I, 1 = X, 2 = Y, 3 = Z), qubit 0 first.
pub fn pauli_strings(n: usize) -> Vec<Vec<usize>> {
    (0..1usize << (2 * n))
        .map(|mut k| {
            let mut digits = vec![0; n];
            for slot in digits.iter_mut().rev() {
                *slot = k % 4;
                k /= 4;
            }
            digits
        })
        .collect()
}

pub fn pauli_label(digits: &[usize]) -> String {
    digits.iter().map(|&p| ['I', 'X', 'Y', 'Z'][p]).collect()
}

/// Unnormalized Pauli string with entries ±1, ±i.
pub fn pauli_string_sparse(digits: &[usize]) -> SparseOp {
    let n = digits.len();
    (0..1usize << n)
        .map(|col| {
            let mut r = col;
            let mut v = cr(1.0);
            for (q, &p) in digits.iter().enumerate() {
                let bit = 1usize << (n - 1 - q);
                let b = col & bit != 0;
                match p {
                    1 => r ^= bit,
                    2 => {
                        r ^= bit;
                        v *= if b { c(0.0, -1.0) } else { c(0.0, 1.0) };
                    }
                    3 if b => v = -v,
                    _ => {}
                }
            }
            (r, col, v)
        })
        .collect()
}

/// Hermitian Majorana monomial (−i)^{p(p−1)/2} γ_{μ1}⋯γ_{μp}, indices 1-based and increasing.
pub fn majorana_monomial_sparse(n: usize, indices: &[usize]) -> SparseOp {
    let p = indices.len();
    let phase = match (p * p.saturating_sub(1) / 2) % 4 {
        0 => cr(1.0),
        1 => c(0.0, -1.0),
        2 => cr(-1.0),
        _ => c(0.0, 1.0),
    };
    (0..1usize << n)
        .map(|col| {
            let mut idx = col;
            let mut v = phase;
            for &mu in indices.iter().rev() {
                let j = (mu - 1) / 2;
                let high = ((1usize << j) - 1) << (n - j);
                if (idx & high).count_ones() % 2 == 1 {
                    v = -v;
                }
                let bit = 1usize << (n - 1 - j);
                let b = idx & bit != 0;
                idx ^= bit;
                if (mu - 1) % 2 == 1 {
                    v *= if b { c(0.0, -1.0) } else { c(0.0, 1.0) };
                }
            }
            (idx, col, v)
        })
        .collect()
}

/// k-subsets of 1..=m in lexicographic order.
pub fn combinations(m: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for x in start..=m {
            if m - x + 1 < k - cur.len() {
                break;
            }
            cur.push(x);
            rec(x + 1, m, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(1, m, k, &mut Vec::new(), &mut out);
    out
}

pub fn binomial(n: i128, k: i128) -> i128 {
    if k < 0 || k > n {
        return 0;
    }
    (0..k).fold(1i128, |acc, i| acc * (n - i) / (i + 1))
}

#[derive(Clone, Debug)]
pub struct ChannelSpec {
    pub protocol: ProtocolId,
    pub d: usize,
    pub components: Vec<IsotypicComponent>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentExport {
    pub label: String,
    pub a_num: i128,
    pub a_den: i128,
    pub d: usize,
    #[serde(rename = "dH")]
    pub d_h: usize,
    pub mult: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpecExport {
    pub protocol: String,
    pub components: Vec<ComponentExport>,
}

impl ChannelSpec {
    pub fn component(&self, label: &str) -> Result<&IsotypicComponent> {
        self.components
            .iter()
            .find(|c| c.label == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    /// Σ_λ w(λ) P_λ(o); framed bases sharing a frame are combined before the change back.
    pub fn combine(&self, o: &ComplexMatrix, weight: impl Fn(&IsotypicComponent) -> Option<f64>) -> ComplexMatrix {
        let d = self.d;
        let mut out = ComplexMatrix::zeros(d, d);
        let mut groups: Vec<(Option<Arc<ComplexMatrix>>, ComplexMatrix, ComplexMatrix)> = Vec::new();
        for comp in &self.components {
            let Some(w) = weight(comp) else { continue };
            if w == 0.0 {
                continue;
            }
            match &comp.projection {
                Projection::Basis(b) => {
                    let same = |f: &Option<Arc<ComplexMatrix>>| match (f, &b.frame) {
                        (None, None) => true,
                        (Some(x), Some(y)) => Arc::ptr_eq(x, y),
                        _ => false,
                    };
                    let pos = match groups.iter().position(|(f, _, _)| same(f)) {
                        Some(p) => p,
                        None => {
                            groups.push((b.frame.clone(), b.to_frame(o), ComplexMatrix::zeros(d, d)));
                            groups.len() - 1
                        }
                    };
                    let (_, of, acc) = &mut groups[pos];
                    let coeffs = b.coefficients_in_frame(of);
                    b.accumulate_in_frame(&coeffs, cr(w), acc);
                }
                p => out += p.apply(o) * cr(w),
            }
        }
        for (frame, _, acc) in groups {
            out += match frame {
                Some(f) => f.as_ref() * acc * f.adjoint(),
                None => acc,
            };
        }
        out
    }

    /// M(o) = Σ a_λ P_λ(o).
    pub fn apply(&self, o: &ComplexMatrix) -> ComplexMatrix {
        self.combine(o, |c| Some(c.a_f64()))
    }

    /// Pseudo-inverse Σ_{visible} a_λ⁻¹ P_λ(o).
    pub fn apply_inverse(&self, o: &ComplexMatrix) -> ComplexMatrix {
        self.combine(o, |c| c.is_visible().then(|| 1.0 / c.a_f64()))
    }

    pub fn isotypic_project(&self, o: &ComplexMatrix, label: &str) -> Result<ComplexMatrix> {
        Ok(self.component(label)?.project(o))
    }

    pub fn visible_part(&self, o: &ComplexMatrix) -> ComplexMatrix {
        self.combine(o, |c| c.is_visible().then_some(1.0))
    }

    /// o minus its projections onto all listed components.
    pub fn remainder(&self, o: &ComplexMatrix) -> ComplexMatrix {
        o - self.combine(o, |_| Some(1.0))
    }

    pub fn diagonal_dim(&self) -> usize {
        self.components.iter().filter(|c| c.in_diagonal).map(|c| c.subspace_dim()).sum()
    }

    pub fn visible_dim(&self) -> usize {
        self.components.iter().filter(|c| c.is_visible()).map(|c| c.subspace_dim()).sum()
    }

    pub fn covered_dim(&self) -> usize {
        self.components.iter().map(|c| c.subspace_dim()).sum()
    }

    pub fn irrep_types(&self) -> BTreeSet<String> {
        self.components.iter().map(|c| c.irrep_type.clone()).collect()
    }

    /// No irrep type repeats, counting multiplicities inside components.
    pub fn is_multiplicity_free(&self) -> bool {
        let mut count: HashMap<&str, usize> = HashMap::new();
        for c in &self.components {
            *count.entry(&c.irrep_type).or_insert(0) += c.multiplicity;
        }
        count.values().all(|&m| m == 1)
    }

    /// Eigenvalues of M on End(H) with multiplicities, largest first; uncovered
    /// directions count as 0.
    pub fn predicted_spectrum(&self) -> Vec<(Rational, usize)> {
        let mut map: BTreeMap<Rational, usize> = BTreeMap::new();
        for c in &self.components {
            *map.entry(c.a).or_insert(0) += c.subspace_dim();
        }
        let rest = self.d * self.d - self.covered_dim();
        if rest > 0 {
            *map.entry(Rational::zero()).or_insert(0) += rest;
        }
        map.into_iter().rev().filter(|(_, m)| *m > 0).collect()
    }

    /// Spectrum restricted to the diagonal span L^D.
    pub fn predicted_diagonal_spectrum(&self) -> Vec<(Rational, usize)> {
        let mut map: BTreeMap<Rational, usize> = BTreeMap::new();
        for c in self.components.iter().filter(|c| c.in_diagonal) {
            *map.entry(c.a).or_insert(0) += c.subspace_dim();
        }
        map.into_iter().rev().filter(|(_, m)| *m > 0).collect()
    }

    pub fn export(&self) -> SpecExport {
        SpecExport {
            protocol: self.protocol.to_string(),
            components: self
                .components
                .iter()
                .map(|c| ComponentExport {
                    label: c.label.clone(),
                    a_num: *c.a.numer(),
                    a_den: *c.a.denom(),
                    d: c.dim,
                    d_h: c.dim_h,
                    mult: c.multiplicity,
                })
                .collect(),
        }
    }
}

struct Builder {
    d: usize,
    comps: Vec<IsotypicComponent>,
}

impl Builder {
    fn new(d: usize) -> Self {
        Self { d, comps: Vec::new() }
    }

    #[allow(clippy::too_many_arguments)]
    fn push(&mut self, label: &str, ty: &str, dim: usize, dim_h: usize, mult: usize, in_diagonal: bool, projection: Projection) {
        if dim == 0 || mult == 0 {
            return;
        }
        self.comps.push(IsotypicComponent {
            label: label.to_string(),
            irrep_type: ty.to_string(),
            a: Rational::new(dim_h as i128, dim as i128),
            dim,
            dim_h,
            multiplicity: mult,
            in_diagonal,
            projection,
        });
    }

    fn finish(self, protocol: ProtocolId) -> ChannelSpec {
        ChannelSpec { protocol, d: self.d, components: self.comps }
    }
}

pub fn analytic_channel_spec(id: ProtocolId, size: &SizeParams) -> Result<ChannelSpec> {
    match id {
        ProtocolId::GlobalHaar | ProtocolId::GlobalClifford => Ok(global_spec(id, size.hilbert_dim(id)?)),
        ProtocolId::LocalClifford => local_clifford_spec(size.need_n(id)?, false),
        ProtocolId::LocalCliffordBell => local_clifford_spec(size.need_n(id)?, true),
        ProtocolId::Pauli => pauli_spec(size.need_n(id)?),
        ProtocolId::Matchgate => matchgate_spec(size.need_n(id)?),
        ProtocolId::ParticlePreserving => particle_preserving_spec(size.need_n(id)?),
        ProtocolId::Su2Spin => su2_spin_spec(size.need_d(id)?),
        ProtocolId::Su2Tensor => su2_tensor_spec(size.need_n(id)?),
        ProtocolId::OrthogonalReal => orthogonal_real_spec(size.need_d(id)?),
        ProtocolId::OrthogonalSplit => orthogonal_split_spec(size.need_d(id)?),
        ProtocolId::Symplectic => symplectic_spec(size.need_d(id)?),
        ProtocolId::SnPermutation => sn_permutation_spec(size.need_n(id)?),
        ProtocolId::SnGt => Err(Error::Unsupported("sn-gt channel is not centralizing; use the exact superoperator".into())),
    }
}

fn global_spec(id: ProtocolId, d: usize) -> ChannelSpec {
    let mut b = Builder::new(d);
    b.push("triv", "triv", 1, 1, 1, true, Projection::Trace);
    b.push("ad", "ad", d * d - 1, d - 1, 1, true, Projection::Traceless);
    b.finish(id)
}

fn support_label(n: usize, mask: usize) -> String {
    let qs: Vec<String> = (0..n).filter(|q| mask >> q & 1 == 1).map(|q| (q + 1).to_string()).collect();
    format!("S={{{}}}", qs.join(","))
}

fn local_clifford_spec(n: usize, bell: bool) -> Result<ChannelSpec> {
    if n == 0 || n > 16 {
        return Err(Error::InvalidArgument(format!("local Clifford spec needs 1 ≤ n ≤ 16, got {n}")));
    }
    if bell && n % 2 == 1 {
        return Err(Error::InvalidArgument(format!("Bell pairing needs even n, got {n}")));
    }
    let mut b = Builder::new(1 << n);
    let mut masks: Vec<usize> = (0..1usize << n).collect();
    masks.sort_by_key(|m| (m.count_ones(), m.reverse_bits()));
    for mask in masks {
        let w = mask.count_ones();
        let dim = 3usize.pow(w);
        let label = support_label(n, mask);
        let projection = Projection::LocalSupport { n, mask };
        if !bell {
            b.push(&label, &label, dim, 1, 1, true, projection);
            continue;
        }
        let pairs_ok = (0..n / 2).all(|p| (mask >> (2 * p) & 1) == (mask >> (2 * p + 1) & 1));
        if pairs_ok {
            let t = w / 2;
            b.push(&label, &label, dim, 3usize.pow(t), 1, true, projection);
        } else {
            b.push(&label, &label, dim, 0, 1, true, projection);
        }
    }
    Ok(b.finish(if bell { ProtocolId::LocalCliffordBell } else { ProtocolId::LocalClifford }))
}

fn pauli_spec(n: usize) -> Result<ChannelSpec> {
    if n == 0 || n > crate::ensembles::MAX_PAULI_QUBITS {
        return Err(Error::InvalidArgument(format!("Pauli spec needs 1 ≤ n ≤ 6, got {n}")));
    }
    let d = 1usize << n;
    let norm = cr(1.0 / (d as f64).sqrt());
    let mut b = Builder::new(d);
    for digits in pauli_strings(n) {
        let label = pauli_label(&digits);
        let diag = digits.iter().all(|&p| p == 0 || p == 3);
        let basis = OpBasis::new(d, None, vec![scale_op(&pauli_string_sparse(&digits), norm)]);
        // the Pauli group acts irreducibly, so every string is diagonal in the G sense
        b.push(&label, &label, 1, diag as usize, 1, true, Projection::Basis(basis));
    }
    Ok(b.finish(ProtocolId::Pauli))
}

fn matchgate_spec(n: usize) -> Result<ChannelSpec> {
    if n == 0 || n > crate::ensembles::MAX_MATCHGATE_MODES {
        return Err(Error::InvalidArgument(format!("matchgate spec needs 1 ≤ n ≤ 7, got {n}")));
    }
    let d = 1usize << n;
    let norm = cr(1.0 / (d as f64).sqrt());
    let mut b = Builder::new(d);
    let ni = n as i128;
    for p in 0..=2 * n {
        let combos = combinations(2 * n, p);
        let dim = combos.len();
        let (dim_h, in_diag) =
            if p % 2 == 0 { (binomial(ni, (p / 2) as i128) as usize, true) } else { (0, false) };
        let ty = format!("Λ^{}", p.min(2 * n - p));
        let label = format!("deg={p}");
        if p == n && n.is_multiple_of(2) {
            let half = cr(1.0 / (2.0 * d as f64).sqrt());
            let mut plus = Vec::new();
            let mut minus = Vec::new();
            for idx in combos.iter().filter(|s| s[0] == 1) {
                let g = majorana_monomial_sparse(n, idx);
                let pg: SparseOp =
                    g.iter().map(|&(r, col, v)| (r, col, if r.count_ones() % 2 == 1 { -v } else { v })).collect();
                let mut sp = scale_op(&g, half);
                sp.extend(scale_op(&pg, half));
                let mut sm = scale_op(&g, half);
                sm.extend(scale_op(&pg, -half));
                plus.push(merge_op(sp));
                minus.push(merge_op(sm));
            }
            for (sign, ops) in [("+", plus), ("-", minus)] {
                let basis = OpBasis::new(d, None, ops);
                b.push(
                    &format!("{label}{sign}"),
                    &format!("{ty}{sign}"),
                    dim / 2,
                    dim_h / 2,
                    1,
                    in_diag,
                    Projection::Basis(basis),
                );
            }
        } else {
            let ops = combos.iter().map(|s| scale_op(&majorana_monomial_sparse(n, s), norm)).collect();
            b.push(&label, &ty, dim, dim_h, 1, in_diag, Projection::Basis(OpBasis::new(d, None, ops)));
        }
    }
    Ok(b.finish(ProtocolId::Matchgate))
}

/// Groups ascending values whose consecutive gaps stay below `tol`.
fn cluster_ascending(values: &[f64], tol: f64) -> Vec<(f64, Vec<usize>)> {
    let mut out: Vec<(f64, Vec<usize>)> = Vec::new();
    for (k, &v) in values.iter().enumerate() {
        match out.last_mut() {
            Some((last, idx)) if (v - *last).abs() <= tol => {
                idx.push(k);
                *last = v;
            }
            _ => out.push((v, vec![k])),
        }
    }
    out
}

fn particle_preserving_spec(n: usize) -> Result<ChannelSpec> {
    if n == 0 || n > crate::ensembles::MAX_FERMION_MODES {
        return Err(Error::InvalidArgument(format!("particle-preserving spec needs 1 ≤ n ≤ 6, got {n}")));
    }
    let d = 1usize << n;
    let a = annihilators(n);
    let hop: Vec<ComplexMatrix> =
        (0..n * n).map(|k| a[k / n].adjoint() * &a[k % n]).collect();
    let ni = n as i128;
    let jmax = n / 2;
    let mut per_j: Vec<Vec<SparseOp>> = vec![Vec::new(); jmax + 1];
    let mut mult = vec![0usize; jmax + 1];
    for r in 0..=n {
        let states: Vec<usize> = (0..d).filter(|s| s.count_ones() as usize == r).collect();
        let dr = states.len();
        let restrict = |m: &ComplexMatrix| ComplexMatrix::from_fn(dr, dr, |i, j| m[(states[i], states[j])]);
        let e: Vec<ComplexMatrix> = hop.iter().map(restrict).collect();
        let mut k1 = ComplexMatrix::zeros(dr, dr);
        let mut cross = ComplexMatrix::zeros(dr * dr, dr * dr);
        for x in 0..n {
            for y in 0..n {
                let exy = &e[x * n + y];
                let eyx = &e[y * n + x];
                k1 += exy * eyx;
                cross += eyx.transpose().kronecker(exy);
            }
        }
        let id = identity(dr);
        let casimir = id.kronecker(&k1) + k1.transpose().kronecker(&id) - cross * cr(2.0);
        let casimir = (&casimir + casimir.adjoint()) * cr(0.5);
        let (vals, vecs) = hermitian_eig(&casimir)?;
        let clusters = cluster_ascending(&vals, 1e-6);
        let top = r.min(n - r);
        if clusters.len() != top + 1 {
            return Err(Error::Residual { value: clusters.len() as f64 });
        }
        for (j, (_, idx)) in clusters.iter().enumerate() {
            let want = (binomial(ni, j as i128).pow(2) - binomial(ni, j as i128 - 1).pow(2)) as usize;
            if idx.len() != want {
                return Err(Error::Residual { value: idx.len() as f64 });
            }
            mult[j] += 1;
            for &k in idx {
                let v = vecs.column(k);
                let mut op = Vec::new();
                for p in 0..dr * dr {
                    if v[p].norm() > 1e-14 {
                        op.push((states[p % dr], states[p / dr], v[p]));
                    }
                }
                per_j[j].push(op);
            }
        }
    }
    let mut b = Builder::new(d);
    for (j, ops) in per_j.into_iter().enumerate() {
        let cj = binomial(ni, j as i128);
        let cj1 = binomial(ni, j as i128 - 1);
        let dim = (cj * cj - cj1 * cj1) as usize;
        let dim_h = (cj - cj1) as usize;
        let label = format!("j={j}");
        b.push(&label, &label, dim, dim_h, mult[j], true, Projection::Basis(OpBasis::new(d, None, ops)));
    }
    Ok(b.finish(ProtocolId::ParticlePreserving))
}

fn su2_spin_spec(d: usize) -> Result<ChannelSpec> {
    if d == 0 {
        return Err(Error::InvalidSpin("dimension 0".into()));
    }
    let two_j = d as i64 - 1;
    let mut b = Builder::new(d);
    for mu in 0..=two_j {
        let mut ops = Vec::new();
        for nu in -mu..=mu {
            let op = spherical_entries(two_j, mu, nu)?
                .into_iter()
                .map(|(r, col, v)| (d - 1 - r, d - 1 - col, cr(v)))
                .collect();
            ops.push(op);
        }
        let label = format!("j={mu}");
        b.push(&label, &format!("spin-{mu}"), (2 * mu + 1) as usize, 1, 1, true, Projection::Basis(OpBasis::new(d, None, ops)));
    }
    Ok(b.finish(ProtocolId::Su2Spin))
}

fn su2_tensor_spec(n: usize) -> Result<ChannelSpec> {
    let (t, labels) = schur_basis(n)?;
    let d = 1usize << n;
    let frame = Arc::new(t);
    let offsets = schur_block_offsets(&labels);
    let mut b = Builder::new(d);
    for mu in 0..=n as i64 {
        let mut ops = Vec::new();
        let mut mult = 0;
        for (&(two_s, _t), &off) in offsets.iter().rev() {
            if two_s < mu {
                continue;
            }
            mult += 1;
            for nu in -mu..=mu {
                let op =
                    spherical_entries(two_s, mu, nu)?.into_iter().map(|(r, col, v)| (off + r, off + col, cr(v))).collect();
                ops.push(op);
            }
        }
        let label = format!("s={mu}");
        let basis = OpBasis::new(d, Some(frame.clone()), ops);
        b.push(&label, &format!("spin-{mu}"), (2 * mu + 1) as usize, 1, mult, true, Projection::Basis(basis));
    }
    Ok(b.finish(ProtocolId::Su2Tensor))
}

fn orthogonal_real_spec(d: usize) -> Result<ChannelSpec> {
    if d < 2 {
        return Err(Error::InvalidArgument("orthogonal spec needs d ≥ 2".into()));
    }
    let form = Arc::new(identity(d));
    let mut b = Builder::new(d);
    b.push("triv", "triv", 1, 1, 1, true, Projection::Trace);
    let sym = Projection::Form { form: form.clone(), symmetric: true, remove_trace: true };
    b.push("sym0", "sym0", d * (d + 1) / 2 - 1, d - 1, 1, true, sym);
    let anti = Projection::Form { form, symmetric: false, remove_trace: false };
    b.push("anti", "anti", d * (d - 1) / 2, 0, 1, true, anti);
    Ok(b.finish(ProtocolId::OrthogonalReal))
}

fn orthogonal_split_spec(d: usize) -> Result<ChannelSpec> {
    let form = Arc::new(FormMatrix::split(d)?.matrix);
    let mut b = Builder::new(d);
    b.push("triv", "triv", 1, 1, 1, true, Projection::Trace);
    let sym = Projection::Form { form: form.clone(), symmetric: true, remove_trace: true };
    b.push("U", "U", d * (d + 1) / 2 - 1, (d - 2) / 2, 1, true, sym);
    let anti = Projection::Form { form, symmetric: false, remove_trace: false };
    b.push("Λ²", "Λ²", d * (d - 1) / 2, d / 2, 1, true, anti);
    Ok(b.finish(ProtocolId::OrthogonalSplit))
}

fn symplectic_spec(d: usize) -> Result<ChannelSpec> {
    let form = Arc::new(FormMatrix::symplectic(d)?.matrix);
    let mut b = Builder::new(d);
    b.push("triv", "triv", 1, 1, 1, true, Projection::Trace);
    let sym = Projection::Form { form: form.clone(), symmetric: true, remove_trace: false };
    b.push("Sym²", "Sym²", d * (d + 1) / 2, d / 2, 1, true, sym);
    let anti = Projection::Form { form, symmetric: false, remove_trace: true };
    b.push("W", "W", d * (d - 1) / 2 - 1, (d - 2) / 2, 1, true, anti);
    Ok(b.finish(ProtocolId::Symplectic))
}

/// Cycle type of a permutation, sorted descending.
fn cycle_type(p: &[usize]) -> Vec<usize> {
    let mut seen = vec![false; p.len()];
    let mut out = Vec::new();
    for s in 0..p.len() {
        if seen[s] {
            continue;
        }
        let mut len = 0;
        let mut k = s;
        while !seen[k] {
            seen[k] = true;
            k = p[k];
            len += 1;
        }
        out.push(len);
    }
    out.sort_unstable_by(|a, b| b.cmp(a));
    out
}

/// Class-function character of an S_n irrep, cached by cycle type.
pub fn sn_character_table(shape: &Partition) -> HashMap<Vec<usize>, f64> {
    let rep = YoungRep::new(shape);
    let mut table = HashMap::new();
    for p in all_permutations(shape.n()) {
        let key = cycle_type(&p);
        table.entry(key).or_insert_with(|| rep.character(&p));
    }
    table
}

/// Character projector (d_λ/n!) Σ_g χ_λ(g) Ad_g on End(C^n), column-stacked.
fn sn_end_projector(n: usize, perms: &[Vec<usize>], chars: &HashMap<Vec<usize>, f64>, dim: usize) -> DMatrix<f64> {
    let mut p = DMatrix::<f64>::zeros(n * n, n * n);
    let scale = dim as f64 / perms.len() as f64;
    for g in perms {
        let chi = chars[&cycle_type(g)] * scale;
        if chi == 0.0 {
            continue;
        }
        for j in 0..n {
            for i in 0..n {
                p[(g[i] + n * g[j], i + n * j)] += chi;
            }
        }
    }
    p
}

fn eigvecs_above(p: &DMatrix<f64>, threshold: f64) -> Vec<nalgebra::DVector<f64>> {
    let eig = SymmetricEigen::new((p + p.transpose()) * 0.5);
    (0..p.nrows())
        .filter(|&k| eig.eigenvalues[k] > threshold)
        .map(|k| eig.eigenvectors.column(k).into_owned())
        .collect()
}

fn real_vec_to_op(v: &nalgebra::DVector<f64>, n: usize) -> SparseOp {
    (0..n * n).filter(|&p| v[p].abs() > 1e-14).map(|p| (p % n, p / n, cr(v[p]))).collect()
}

/// Orthonormal basis (columns) of L^D = End(H^[n]) ⊕ End(H^[n-1,1]) for the
/// permutation rep, i.e. operators block-diagonal in the isotypic split of C^n.
pub fn sn_diagonal_span(n: usize) -> DMatrix<f64> {
    let p0 = DMatrix::<f64>::from_element(n, n, 1.0 / n as f64);
    let p1 = DMatrix::<f64>::identity(n, n) - &p0;
    // vec(P A P) = (Pᵀ ⊗ P) vec(A) with column stacking; both P are symmetric.
    let pd = p0.kronecker(&p0) + p1.kronecker(&p1);
    DMatrix::from_columns(&eigvecs_above(&pd, 0.5))
}

fn sn_permutation_spec(n: usize) -> Result<ChannelSpec> {
    if !(4..=MAX_SN_PERMUTATION).contains(&n) {
        return Err(Error::InvalidArgument(format!("sn-permutation spec needs 4 ≤ n ≤ {MAX_SN_PERMUTATION}, got {n}")));
    }
    let perms = all_permutations(n);
    let cyclic: Vec<Vec<f64>> =
        (0..n).map(|s| (0..n).map(|k| ((k + s) % n) as f64).collect()).collect();
    let subgroup = SubgroupSpec::Finite(cyclic);
    let ld = sn_diagonal_span(n);
    let pd = &ld * ld.transpose();
    let mut b = Builder::new(n);
    let shapes = [vec![n], vec![n - 1, 1], vec![n - 2, 2], vec![n - 2, 1, 1]];
    for parts in shapes {
        let shape = Partition::new(parts)?;
        let label = shape.to_string();
        let chars = sn_character_table(&shape);
        let dim = chars[&vec![1; n]].round() as usize;
        let proj = sn_end_projector(n, &perms, &chars, dim);
        let vecs = eigvecs_above(&proj, 0.5);
        let copies = vecs.len() / dim;
        let table = Arc::new(chars);
        let character: CharacterFn = Arc::new(move |x: &[f64]| {
            let p: Vec<usize> = x.iter().map(|&v| v as usize).collect();
            cr(table[&cycle_type(&p)])
        });
        let dim_h = h_invariant_dimension(&IrrepSpec::new(&label, dim, Some(character)), &subgroup, true)?;
        if parts_is_standard(&shape, n) {
            // Split the three standard copies into the part inside L^D and the rest.
            let e = DMatrix::from_columns(&vecs);
            let inner = e.transpose() * &pd * &e;
            let eig = SymmetricEigen::new((&inner + inner.transpose()) * 0.5);
            let mut inside = Vec::new();
            let mut outside = Vec::new();
            for k in 0..e.ncols() {
                let v = &e * eig.eigenvectors.column(k);
                if eig.eigenvalues[k] > 0.5 {
                    inside.push(real_vec_to_op(&v, n));
                } else {
                    outside.push(real_vec_to_op(&v, n));
                }
            }
            let m_in = inside.len() / dim;
            let m_out = outside.len() / dim;
            // The standard irrep has no Z_n-fixed vector, so a = 0 on every copy.
            debug_assert_eq!(dim_h, 0);
            b.push(&label, &label, dim, dim_h, m_in, true, Projection::Basis(OpBasis::new(n, None, inside)));
            b.push(&format!("{label}'"), &label, dim, dim_h, m_out, false, Projection::Basis(OpBasis::new(n, None, outside)));
        } else {
            let ops = vecs.iter().map(|v| real_vec_to_op(v, n)).collect();
            b.push(&label, &label, dim, dim_h, copies, true, Projection::Basis(OpBasis::new(n, None, ops)));
        }
    }
    Ok(b.finish(ProtocolId::SnPermutation))
}

fn parts_is_standard(shape: &Partition, n: usize) -> bool {
    shape.parts() == [n - 1, 1]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::majorana_operators;
    use crate::linalg::{frobenius, hs_inner, random_hermitian, RandomStream};

    fn spec(id: ProtocolId, size: SizeParams) -> ChannelSpec {
        analytic_channel_spec(id, &size).unwrap()
    }

    fn all_small_specs() -> Vec<ChannelSpec> {
        vec![
            spec(ProtocolId::GlobalHaar, SizeParams::dim(3)),
            spec(ProtocolId::LocalClifford, SizeParams::qubits(2)),
            spec(ProtocolId::LocalCliffordBell, SizeParams::qubits(2)),
            spec(ProtocolId::Pauli, SizeParams::qubits(2)),
            spec(ProtocolId::Matchgate, SizeParams::qubits(2)),
            spec(ProtocolId::Matchgate, SizeParams::qubits(3)),
            spec(ProtocolId::ParticlePreserving, SizeParams::qubits(3)),
            spec(ProtocolId::Su2Spin, SizeParams::dim(4)),
            spec(ProtocolId::Su2Tensor, SizeParams::qubits(3)),
            spec(ProtocolId::OrthogonalReal, SizeParams::dim(4)),
            spec(ProtocolId::OrthogonalSplit, SizeParams::dim(4)),
            spec(ProtocolId::Symplectic, SizeParams::dim(4)),
            spec(ProtocolId::SnPermutation, SizeParams::qubits(5)),
        ]
    }

    #[test]
    fn components_are_orthogonal_projectors() {
        let mut rng = RandomStream::new(1, 0);
        for s in all_small_specs() {
            let d = s.d;
            let o = random_hermitian(d, &mut rng);
            let mut total = ComplexMatrix::zeros(d, d);
            for comp in &s.components {
                assert_eq!(comp.a, Rational::new(comp.dim_h as i128, comp.dim as i128));
                let p = comp.project(&o);
                assert!(frobenius(&(comp.project(&p) - &p)) < 1e-10, "{:?} {}", s.protocol, comp.label);
                // self-adjoint: ⟨P x, y⟩ = ⟨x, P y⟩
                let y = random_hermitian(d, &mut rng);
                let lhs = hs_inner(&p, &y).unwrap();
                let rhs = hs_inner(&o, &comp.project(&y)).unwrap();
                assert!((lhs - rhs).norm() < 1e-10);
                let basis = comp.basis(d).unwrap();
                assert_eq!(basis.len(), comp.subspace_dim(), "{:?} {}", s.protocol, comp.label);
                assert!(frobenius(&(basis.project(&o) - &p)) < 1e-9, "{:?} {}", s.protocol, comp.label);
                for other in &s.components {
                    if other.label != comp.label {
                        assert!(frobenius(&other.project(&p)) < 1e-10);
                    }
                }
                total += p;
            }
            let rest = s.remainder(&o);
            assert!(frobenius(&(total + rest - &o)) < 1e-10);
            assert!(s.covered_dim() <= d * d);
        }
    }

    #[test]
    fn global_values() {
        let s = spec(ProtocolId::GlobalHaar, SizeParams::dim(2));
        let z = crate::linalg::pauli_z();
        assert!(frobenius(&(s.apply(&z) - &z / cr(3.0))) < 1e-12);
        assert!(frobenius(&(s.apply_inverse(&identity(2)) - identity(2))) < 1e-12);
        assert_eq!(
            s.predicted_spectrum(),
            vec![(Rational::new(1, 1), 1), (Rational::new(1, 3), 3)]
        );
    }

    #[test]
    fn local_clifford_values() {
        let s = spec(ProtocolId::LocalClifford, SizeParams::qubits(1));
        let z = crate::linalg::pauli_z();
        assert!(frobenius(&(s.apply_inverse(&z) - &z * cr(3.0))) < 1e-12);
        let s2 = spec(ProtocolId::LocalClifford, SizeParams::qubits(2));
        assert_eq!(
            s2.predicted_spectrum(),
            vec![(Rational::new(1, 1), 1), (Rational::new(1, 3), 6), (Rational::new(1, 9), 9)]
        );
        assert!(s2.is_multiplicity_free());
        assert_eq!(s2.visible_dim(), 16);
    }

    #[test]
    fn bell_values() {
        let s = spec(ProtocolId::LocalCliffordBell, SizeParams::qubits(2));
        assert_eq!(s.component("S={1,2}").unwrap().a, Rational::new(1, 3));
        assert_eq!(s.component("S={1}").unwrap().a, Rational::zero());
        assert!(!s.component("S={2}").unwrap().is_visible());
        assert_eq!(s.diagonal_dim(), 16);
    }

    #[test]
    fn pauli_values() {
        let s = spec(ProtocolId::Pauli, SizeParams::qubits(1));
        let x = crate::linalg::pauli_x();
        assert!(frobenius(&s.apply_inverse(&x)) < 1e-14);
        assert_eq!(s.component("Z").unwrap().a, Rational::new(1, 1));
        assert_eq!(s.component("Y").unwrap().a, Rational::zero());
    }

    #[test]
    fn matchgate_values_and_monomials() {
        let s4 = spec(ProtocolId::Matchgate, SizeParams::qubits(4));
        assert!(s4.component("deg=4").is_err());
        assert_eq!(s4.component("deg=2").unwrap().a, Rational::new(4, 28));
        assert_eq!(s4.component("deg=4+").unwrap().a, Rational::new(6, 70));
        assert_eq!(s4.component("deg=4-").unwrap().a, Rational::new(3, 35));
        assert_eq!(s4.visible_dim(), 1 << 7);
        let s3 = spec(ProtocolId::Matchgate, SizeParams::qubits(3));
        assert_eq!(s3.component("deg=2").unwrap().a, Rational::new(1, 5));
        assert_eq!(s3.irrep_types().len(), 4);
        assert!(!s3.is_multiplicity_free());
        let maj = majorana_operators(3);
        for idx in [vec![1], vec![2, 5], vec![1, 3, 6], vec![1, 2, 3, 4, 5, 6]] {
            let dense = maj.monomial(&idx).unwrap();
            let sparse = sparse_to_dense(&majorana_monomial_sparse(3, &idx), 8);
            assert!(frobenius(&(dense - sparse)) < 1e-12, "{idx:?}");
        }
    }

    #[test]
    fn particle_preserving_values() {
        let s = spec(ProtocolId::ParticlePreserving, SizeParams::qubits(4));
        assert_eq!(s.component("j=1").unwrap().a, Rational::new(1, 5));
        assert_eq!(s.component("j=2").unwrap().a, Rational::new(1, 10));
        assert_eq!(s.component("j=0").unwrap().multiplicity, 5);
        assert_eq!(s.diagonal_dim(), 70);
        // number operator lives in j ≤ 1 and the identity in j = 0
        let a = annihilators(4);
        let num = a.iter().fold(ComplexMatrix::zeros(16, 16), |acc, x| acc + x.adjoint() * x);
        let p2 = s.isotypic_project(&num, "j=2").unwrap();
        assert!(frobenius(&p2) < 1e-10);
    }

    #[test]
    fn orthogonal_real_formula() {
        let d = 4;
        let s = spec(ProtocolId::OrthogonalReal, SizeParams::dim(d));
        let mut rng = RandomStream::new(2, 0);
        let a = ComplexMatrix::from_fn(d, d, |_, _| rng.complex_normal());
        let want = (identity(d) * a.trace() + &a + a.transpose()) / cr(d as f64 + 2.0);
        assert!(frobenius(&(s.apply(&a) - want)) < 1e-12);
        assert_eq!(s.component("sym0").unwrap().a, Rational::new(1, 3));
    }

    #[test]
    fn split_and_symplectic_values() {
        let s = spec(ProtocolId::OrthogonalSplit, SizeParams::dim(8));
        assert_eq!(s.component("U").unwrap().a, Rational::new(6, 70));
        assert_eq!(s.component("Λ²").unwrap().a, Rational::new(1, 7));
        assert_eq!(s.visible_dim(), 64);
        let sp = spec(ProtocolId::Symplectic, SizeParams::dim(4));
        assert_eq!(sp.component("W").unwrap().a, Rational::new(1, 5));
        assert_eq!(sp.component("Sym²").unwrap().a, Rational::new(1, 5));
        assert_eq!(sp.visible_dim(), 16);
        assert_eq!(sp.irrep_types().len(), 3);
    }

    #[test]
    fn su2_values() {
        let s = spec(ProtocolId::Su2Spin, SizeParams::dim(4));
        let a: Vec<Rational> = s.components.iter().map(|c| c.a).collect();
        assert_eq!(a, vec![Rational::new(1, 1), Rational::new(1, 3), Rational::new(1, 5), Rational::new(1, 7)]);
        assert!(s.is_multiplicity_free());
        let t = spec(ProtocolId::Su2Tensor, SizeParams::qubits(4));
        assert_eq!(t.irrep_types().len(), 5);
        assert!(!t.is_multiplicity_free());
        assert_eq!(t.diagonal_dim(), 25 + 27 + 2);
    }

    #[test]
    fn sn_values() {
        let s = spec(ProtocolId::SnPermutation, SizeParams::qubits(5));
        assert_eq!(s.component("[3,2]").unwrap().a, Rational::new(1, 5));
        assert_eq!(s.component("[3,1,1]").unwrap().a, Rational::new(1, 3));
        assert_eq!(s.component("[5]").unwrap().multiplicity, 2);
        // one standard copy sits in End(H^[4,1]) with a = 0
        assert_eq!(s.diagonal_dim(), 17);
        assert_eq!(s.visible_dim(), 13);
        let s6 = spec(ProtocolId::SnPermutation, SizeParams::qubits(6));
        assert_eq!(s6.component("[4,2]").unwrap().a, Rational::new(4, 18));
        assert_eq!(s6.component("[4,1,1]").unwrap().a, Rational::new(1, 5));
        assert_eq!(sn_diagonal_span(5).ncols(), 17);
    }

    #[test]
    fn export_round_trip() {
        let s = spec(ProtocolId::Symplectic, SizeParams::dim(4));
        let json = serde_json::to_string(&s.export()).unwrap();
        assert!(json.contains("\"dH\":2"));
        let back: SpecExport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s.export());
    }
}
