//! Labeled measurement bases.
//!
//! Every basis carries per-vector labels `(η, i, α)`: the irrep block η, the
//! multiplicity index i (counted from 1) and a weight or character tag α.
//! Block structure is data, so channel and NDCSE code read it uniformly.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cr, frobenius, identity, C64, ComplexMatrix};
use crate::rep::cg::clebsch_gordan;
use crate::rep::young::Partition;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisLabel {
    pub eta: String,
    pub mult: usize,
    pub alpha: String,
}

impl BasisLabel {
    pub fn new(eta: impl Into<String>, mult: usize, alpha: impl Into<String>) -> Self {
        Self { eta: eta.into(), mult, alpha: alpha.into() }
    }
}

#[derive(Clone, Debug)]
pub struct MeasurementBasis {
    /// Orthonormal basis vectors as columns.
    pub vectors: ComplexMatrix,
    pub labels: Vec<BasisLabel>,
    /// True when `vectors` is the identity, which lets callers skip a change of frame.
    pub is_standard: bool,
}

impl MeasurementBasis {
    pub fn new(vectors: ComplexMatrix, labels: Vec<BasisLabel>) -> Result<Self> {
        let d = vectors.nrows();
        if vectors.ncols() != d || labels.len() != d {
            return Err(Error::Shape(format!(
                "basis needs {d} columns and labels, got {} and {}",
                vectors.ncols(),
                labels.len()
            )));
        }
        let dev = frobenius(&(vectors.adjoint() * &vectors - identity(d)));
        if dev > 1e-9 {
            return Err(Error::NotOrthonormal(dev));
        }
        let is_standard = frobenius(&(&vectors - identity(d))) == 0.0;
        Ok(Self { vectors, labels, is_standard })
    }

    /// Standard basis of C^d as a single block.
    pub fn standard(d: usize, eta: &str, alpha: impl Fn(usize) -> String) -> Self {
        let labels = (0..d).map(|k| BasisLabel::new(eta, 1, alpha(k))).collect();
        Self { vectors: identity(d), labels, is_standard: true }
    }

    pub fn dim(&self) -> usize {
        self.vectors.nrows()
    }

    /// Index groups keyed by (η, i), in order of first appearance.
    pub fn blocks(&self) -> Vec<((String, usize), Vec<usize>)> {
        let mut out: Vec<((String, usize), Vec<usize>)> = Vec::new();
        for (k, l) in self.labels.iter().enumerate() {
            let key = (l.eta.clone(), l.mult);
            match out.iter_mut().find(|(kk, _)| *kk == key) {
                Some((_, v)) => v.push(k),
                None => out.push((key, vec![k])),
            }
        }
        out
    }

    /// Replaces the block structure while keeping the vectors.
    pub fn with_labels(mut self, labels: Vec<BasisLabel>) -> Result<Self> {
        if labels.len() != self.dim() {
            return Err(Error::Shape(format!("{} labels for dimension {}", labels.len(), self.dim())));
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn from_schur(transform: ComplexMatrix, labels: &[SchurLabel]) -> Self {
        let labels = labels
            .iter()
            .map(|l| BasisLabel::new(l.lambda.to_string(), l.t, format!("m={}", half_str(l.two_m))))
            .collect();
        Self { vectors: transform, labels, is_standard: false }
    }

    /// Column `w` as a vector.
    pub fn vector(&self, w: usize) -> crate::linalg::ComplexVector {
        self.vectors.column(w).into_owned()
    }

    /// Label table as CSV with columns index, eta, i, alpha.
    pub fn write_labels_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["index", "eta", "i", "alpha"])?;
        for (k, l) in self.labels.iter().enumerate() {
            wtr.write_record([k.to_string(), l.eta.clone(), l.mult.to_string(), l.alpha.clone()])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

pub(crate) fn half_str(t: i64) -> String {
    if t % 2 == 0 {
        format!("{}", t / 2)
    } else {
        format!("{t}/2")
    }
}

fn bitstring(k: usize, n: usize) -> String {
    (0..n).map(|q| if (k >> (n - 1 - q)) & 1 == 1 { '1' } else { '0' }).collect()
}

pub fn computational_basis(n: usize) -> MeasurementBasis {
    assert!(n >= 1, "need at least one qubit");
    MeasurementBasis::standard(1 << n, "full", |k| bitstring(k, n))
}

/// Products of two-qubit Bell bases on pairs (1,2), (3,4), …
pub fn bell_pair_basis(n: usize) -> Result<MeasurementBasis> {
    if n == 0 || n % 2 == 1 {
        return Err(Error::InvalidArgument(format!("Bell pairing needs an even qubit count, got {n}")));
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let pair = ComplexMatrix::from_column_slice(
        4,
        4,
        &[
            cr(s), cr(0.0), cr(0.0), cr(s),
            cr(s), cr(0.0), cr(0.0), cr(-s),
            cr(0.0), cr(s), cr(s), cr(0.0),
            cr(0.0), cr(s), cr(-s), cr(0.0),
        ],
    );
    // Eigenvalues of (XX, ZZ) on the four Bell vectors.
    let tags = ["XX+ZZ+", "XX-ZZ+", "XX+ZZ-", "XX-ZZ-"];
    let pairs = n / 2;
    let mut vectors = identity(1);
    for _ in 0..pairs {
        vectors = vectors.kronecker(&pair);
    }
    let labels = (0..1usize << n)
        .map(|k| {
            let alpha: Vec<&str> = (0..pairs).map(|p| tags[(k >> (2 * (pairs - 1 - p))) & 3]).collect();
            BasisLabel::new("full", 1, alpha.join("|"))
        })
        .collect();
    MeasurementBasis::new(vectors, labels)
}

/// Normalized DFT vectors |w_k⟩ = n^{-1/2} Σ_j ω^{jk} |j⟩.
pub fn cyclic_fourier_basis(n: usize) -> Result<MeasurementBasis> {
    if n < 2 {
        return Err(Error::InvalidArgument("Fourier basis needs n ≥ 2".into()));
    }
    let norm = 1.0 / (n as f64).sqrt();
    let vectors = ComplexMatrix::from_fn(n, n, |j, k| {
        C64::from_polar(norm, std::f64::consts::TAU * ((j * k) % n) as f64 / n as f64)
    });
    let triv = format!("[{n}]");
    let std_rep = format!("[{},1]", n - 1);
    let labels = (0..n)
        .map(|k| BasisLabel::new(if k == 0 { triv.clone() } else { std_rep.clone() }, 1, format!("k={k}")))
        .collect();
    MeasurementBasis::new(vectors, labels)
}

/// Standard basis of C^d labeled by weights L_i (i ≤ d/2) and −L_{i−d/2}.
pub fn split_orthogonal_weight_basis(d: usize) -> Result<MeasurementBasis> {
    if d < 2 || d % 2 == 1 {
        return Err(Error::InvalidArgument(format!("split form needs even d ≥ 2, got {d}")));
    }
    let h = d / 2;
    Ok(MeasurementBasis::standard(d, "V", |k| if k < h { format!("L{}", k + 1) } else { format!("-L{}", k - h + 1) }))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchurLabel {
    /// Two-row partition λ = ((n + 2s)/2, (n − 2s)/2).
    pub lambda: Partition,
    pub two_s: i64,
    pub two_m: i64,
    /// Multiplicity index, from 1.
    pub t: usize,
    /// Doubled intermediate spins s_1, …, s_n of the coupling path.
    pub path: Vec<i64>,
}

pub const MAX_SCHUR_QUBITS: usize = 10;

/// Dense Schur transform of n qubits by sequential Clebsch–Gordan coupling.
///
/// Qubit |0⟩ carries m = −1/2 and qubit 1 is the most significant bit. Columns
/// are ordered by spin descending, then path lexicographically descending,
/// then m ascending.
pub fn schur_basis(n: usize) -> Result<(ComplexMatrix, Vec<SchurLabel>)> {
    if n == 0 || n > MAX_SCHUR_QUBITS {
        return Err(Error::InvalidArgument(format!("schur_basis supports 1 ≤ n ≤ {MAX_SCHUR_QUBITS}, got {n}")));
    }
    struct Node {
        path: Vec<i64>,
        vecs: Vec<Vec<C64>>,
    }
    let mut nodes = vec![Node { path: vec![1], vecs: vec![vec![cr(1.0), cr(0.0)], vec![cr(0.0), cr(1.0)]] }];
    for k in 2..=n {
        let len = 1usize << k;
        let mut next = Vec::new();
        for node in &nodes {
            let ts = *node.path.last().unwrap();
            for ts_new in [ts + 1, ts - 1] {
                if ts_new < 0 {
                    continue;
                }
                let mut vecs = Vec::with_capacity(ts_new as usize + 1);
                let mut tm = -ts_new;
                while tm <= ts_new {
                    let mut v = vec![cr(0.0); len];
                    for (qm, bit) in [(-1i64, 0usize), (1, 1)] {
                        let tm_old = tm - qm;
                        if tm_old.abs() > ts {
                            continue;
                        }
                        let cg = clebsch_gordan(ts, 1, ts_new, tm_old, qm, tm)?;
                        if cg == 0.0 {
                            continue;
                        }
                        let old = &node.vecs[((tm_old + ts) / 2) as usize];
                        for (idx, x) in old.iter().enumerate() {
                            v[idx * 2 + bit] += x * cg;
                        }
                    }
                    vecs.push(v);
                    tm += 2;
                }
                let mut path = node.path.clone();
                path.push(ts_new);
                next.push(Node { path, vecs });
            }
        }
        nodes = next;
    }
    nodes.sort_by(|a, b| {
        b.path.last().cmp(&a.path.last()).then_with(|| b.path.cmp(&a.path))
    });
    let dim = 1usize << n;
    let mut transform = ComplexMatrix::zeros(dim, dim);
    let mut labels = Vec::with_capacity(dim);
    let mut col = 0;
    let mut t = 0;
    let mut last_s = -1;
    for node in &nodes {
        let ts = *node.path.last().unwrap();
        if ts != last_s {
            t = 0;
            last_s = ts;
        }
        t += 1;
        let lambda = two_row_partition(n, ts);
        for (k, v) in node.vecs.iter().enumerate() {
            for (r, x) in v.iter().enumerate() {
                transform[(r, col)] = *x;
            }
            labels.push(SchurLabel { lambda: lambda.clone(), two_s: ts, two_m: -ts + 2 * k as i64, t, path: node.path.clone() });
            col += 1;
        }
    }
    Ok((transform, labels))
}

pub fn two_row_partition(n: usize, two_s: i64) -> Partition {
    let a = (n as i64 + two_s) / 2;
    let b = (n as i64 - two_s) / 2;
    let parts = if b > 0 { vec![a as usize, b as usize] } else { vec![a as usize] };
    Partition::new(parts).expect("two-row partition")
}

/// Doubled spin of a two-row partition of n.
pub fn partition_two_s(eta: &Partition) -> Result<i64> {
    match eta.parts() {
        [a] => Ok(*a as i64),
        [a, b] => Ok(*a as i64 - *b as i64),
        _ => Err(Error::InvalidArgument(format!("{eta} has more than two rows"))),
    }
}

/// Multiplicity m_λ of spin s in n qubits.
pub fn schur_multiplicity(n: usize, two_s: i64) -> usize {
    let n = n as i64;
    if two_s < 0 || two_s > n || (n - two_s) % 2 != 0 {
        return 0;
    }
    let k = (n - two_s) / 2;
    // C(n, k) − C(n, k − 1)
    let binom = |n: i64, k: i64| -> i64 {
        if k < 0 || k > n {
            0
        } else {
            (0..k).fold(1i64, |acc, i| acc * (n - i) / (i + 1))
        }
    };
    (binom(n, k) - binom(n, k - 1)) as usize
}

/// Sparse entries (row, col, value) of the spherical operator O_{μ,ν} on a spin
/// block, with rows and columns indexed by m ascending.
pub fn spherical_entries(two_s: i64, mu: i64, nu: i64) -> Result<Vec<(usize, usize, f64)>> {
    if mu < 0 || mu > two_s || nu.abs() > mu {
        return Err(Error::InvalidArgument(format!("invalid (μ, ν) = ({mu}, {nu}) for spin {}", half_str(two_s))));
    }
    let mut out = Vec::new();
    let mut tm = -two_s;
    while tm <= two_s {
        let tm2 = 2 * nu - tm;
        if tm2.abs() <= two_s {
            let cg = clebsch_gordan(two_s, two_s, 2 * mu, tm, tm2, 2 * nu)?;
            if cg != 0.0 {
                let sign = if ((tm + two_s) / 2) % 2 == 0 { 1.0 } else { -1.0 };
                let row = ((tm + two_s) / 2) as usize;
                let col = ((tm - 2 * nu + two_s) / 2) as usize;
                out.push((row, col, sign * cg));
            }
        }
        tm += 2;
    }
    Ok(out)
}

/// Start index of each (λ, t) block in the Schur ordering, keyed by (2s, t).
pub fn schur_block_offsets(labels: &[SchurLabel]) -> BTreeMap<(i64, usize), usize> {
    let mut out = BTreeMap::new();
    for (k, l) in labels.iter().enumerate() {
        out.entry((l.two_s, l.t)).or_insert(k);
    }
    out
}

/// Irreducible-tensor operator basis of End(H^{η,i}) embedded in 2^n dimensions.
pub fn spherical_operator_basis(
    eta: &Partition,
    i: usize,
    n: usize,
) -> Result<BTreeMap<(i64, i64), ComplexMatrix>> {
    if eta.n() != n {
        return Err(Error::InvalidArgument(format!("{eta} is not a partition of {n}")));
    }
    let two_s = partition_two_s(eta)?;
    if i == 0 || i > schur_multiplicity(n, two_s) {
        return Err(Error::InvalidArgument(format!("multiplicity index {i} out of range for {eta}")));
    }
    let (t, labels) = schur_basis(n)?;
    let offset = schur_block_offsets(&labels)[&(two_s, i)];
    let dim = 1usize << n;
    let mut out = BTreeMap::new();
    for mu in 0..=two_s {
        for nu in -mu..=mu {
            let mut local = ComplexMatrix::zeros(dim, dim);
            for (r, c, v) in spherical_entries(two_s, mu, nu)? {
                local[(offset + r, offset + c)] = cr(v);
            }
            out.insert((mu, nu), &t * local * t.adjoint());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, expm, hs_inner, pauli_x, pauli_y, pauli_z, tensor_all, RandomStream};
    use crate::rep::cg::su2_generators_ascending;

    #[test]
    fn computational_and_labels() {
        let b = computational_basis(1);
        assert_eq!(b.dim(), 2);
        assert_eq!(b.vectors, identity(2));
        assert_eq!(computational_basis(3).dim(), 8);
        assert_eq!(b.blocks().len(), 1);
        let mut buf = Vec::new();
        computational_basis(2).write_labels_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("index,eta,i,alpha\n0,full,1,00\n"));
    }

    #[test]
    fn bell_basis_vectors_and_stabilizers() {
        let b = bell_pair_basis(2).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v0 = b.vector(0);
        assert!((v0[0] - cr(s)).norm() < 1e-15 && (v0[3] - cr(s)).norm() < 1e-15);
        let xx = tensor_all(&[pauli_x(), pauli_x()]);
        let zz = tensor_all(&[pauli_z(), pauli_z()]);
        for w in 0..4 {
            let v = b.vector(w);
            for g in [&xx, &zz] {
                let gv = g * &v;
                let ev = v.dotc(&gv);
                assert!((ev.norm() - 1.0).abs() < 1e-12);
                assert!((gv - &v * ev).norm() < 1e-12);
            }
        }
        let b4 = bell_pair_basis(4).unwrap();
        assert!(frobenius(&(b4.vectors.adjoint() * &b4.vectors - identity(16))) < 1e-12);
        assert!(bell_pair_basis(3).is_err());
    }

    #[test]
    fn fourier_basis() {
        let n = 5;
        let b = cyclic_fourier_basis(n).unwrap();
        let u = b.vector(0);
        for j in 0..n {
            assert!((u[j] - cr(1.0 / (n as f64).sqrt())).norm() < 1e-15);
        }
        // c: |j⟩ ↦ |j−1⟩ acts as ω^k on w_k
        let cyc = ComplexMatrix::from_fn(n, n, |r, col| if (col + n - 1) % n == r { cr(1.0) } else { cr(0.0) });
        for k in 0..n {
            let v = b.vector(k);
            let w = C64::from_polar(1.0, std::f64::consts::TAU * k as f64 / n as f64);
            assert!((&cyc * &v - &v * w).norm() < 1e-12);
        }
        assert_eq!(b.blocks().len(), 2);
        assert!(frobenius(&(b.vectors.adjoint() * &b.vectors - identity(n))) < 1e-12);
    }

    #[test]
    fn split_weight_labels() {
        let b = split_orthogonal_weight_basis(4).unwrap();
        let alphas: Vec<_> = b.labels.iter().map(|l| l.alpha.as_str()).collect();
        assert_eq!(alphas, ["L1", "L2", "-L1", "-L2"]);
        assert_eq!(b.blocks().len(), 1);
    }

    #[test]
    fn schur_two_qubits() {
        let (t, labels) = schur_basis(2).unwrap();
        assert_eq!(labels[3].lambda.parts(), &[1, 1]);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let singlet = t.column(3);
        assert!((singlet[1].norm() - s).abs() < 1e-14 && (singlet[2].norm() - s).abs() < 1e-14);
        assert!((singlet[1] + singlet[2]).norm() < 1e-14);
        assert_eq!(labels[0].two_m, -2);
        assert!((t[(0, 0)] - cr(1.0)).norm() < 1e-14);
    }

    #[test]
    fn schur_multiplicities_and_counts() {
        let (_, labels) = schur_basis(3).unwrap();
        let count = |ts: i64| labels.iter().filter(|l| l.two_s == ts).map(|l| l.t).max().unwrap_or(0);
        assert_eq!(count(3), 1);
        assert_eq!(count(1), 2);
        for n in 1..=8usize {
            let total: usize = (0..=n as i64).map(|ts| (ts as usize + 1) * schur_multiplicity(n, ts)).sum();
            assert_eq!(total, 1 << n);
            let lam = |ts: i64| {
                let l1 = (n as i64 + ts) / 2;
                let l2 = (n as i64 - ts) / 2;
                let f = |k: i64| (1..=k).map(|x| x as f64).product::<f64>();
                (f(n as i64) / (f(l1 + 1) * f(l2)) * (l1 - l2 + 1) as f64).round() as usize
            };
            for ts in (n as i64 % 2..=n as i64).step_by(2) {
                assert_eq!(schur_multiplicity(n, ts), lam(ts));
            }
        }
    }

    #[test]
    fn schur_unitary_and_block_diagonal() {
        let mut rng = RandomStream::new(3, 0);
        for n in 1..=6 {
            let (t, labels) = schur_basis(n).unwrap();
            let d = 1 << n;
            assert!(frobenius(&(t.adjoint() * &t - identity(d))) < 1e-9);
            for _ in 0..3 {
                let th: Vec<f64> = (0..3).map(|_| rng.normal()).collect();
                let h = (pauli_x() * cr(th[0]) + pauli_y() * cr(th[1]) + pauli_z() * cr(th[2])) * c(0.0, -0.5);
                let u = expm(&h);
                let big = t.adjoint() * tensor_all(&vec![u.clone(); n]) * &t;
                let mut off = 0.0;
                for r in 0..d {
                    for col in 0..d {
                        let same = labels[r].two_s == labels[col].two_s && labels[r].t == labels[col].t;
                        if !same {
                            off += big[(r, col)].norm_sqr();
                        }
                    }
                }
                assert!(off.sqrt() < 1e-8, "n={n}: off-block mass {off}");
                // Each block is the spin-s rotation with generators (X/2, −Y/2, −Z/2).
                for (&(ts, _), &o) in schur_block_offsets(&labels).iter() {
                    let (jx, jy, jz) = su2_generators_ascending(ts);
                    let w = expm(&((jx * cr(th[0]) - jy * cr(th[1]) - jz * cr(th[2])) * c(0.0, -1.0)));
                    let k = (ts + 1) as usize;
                    let blk = big.view((o, o), (k, k)).into_owned();
                    assert!(frobenius(&(blk - w)) < 1e-8);
                }
            }
        }
    }

    #[test]
    fn spherical_operators() {
        let eta = Partition::new(vec![1, 1]).unwrap();
        let ops = spherical_operator_basis(&eta, 1, 2).unwrap();
        let (t, _) = schur_basis(2).unwrap();
        let s = t.column(3).into_owned();
        assert!(frobenius(&(&ops[&(0, 0)] - &s * s.adjoint())) < 1e-12);

        let e2 = spherical_entries(2, 2, 0).unwrap();
        let diag: Vec<f64> = (0..3).map(|k| e2.iter().find(|x| x.0 == k && x.1 == k).unwrap().2).collect();
        let r6 = 6f64.sqrt();
        assert!((diag[0] - 1.0 / r6).abs() < 1e-14);
        assert!((diag[1] + 2.0 / r6).abs() < 1e-14);
        assert!((diag[2] - 1.0 / r6).abs() < 1e-14);

        let eta = Partition::new(vec![3, 1]).unwrap();
        let ops = spherical_operator_basis(&eta, 2, 4).unwrap();
        let keys: Vec<_> = ops.keys().cloned().collect();
        for a in &keys {
            for b in &keys {
                let ip = hs_inner(&ops[a], &ops[b]).unwrap();
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((ip - cr(want)).norm() < 1e-10);
            }
        }
        assert!(spherical_entries(2, 3, 0).is_err());
        assert!(spherical_entries(2, 1, 2).is_err());
    }
}
