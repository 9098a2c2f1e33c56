//! Measurement channels: exact enumeration, Monte Carlo, spectra and twirl checks.

pub mod spec;

use nalgebra::DMatrix;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use spec::{analytic_channel_spec, ChannelSpec, IsotypicComponent, OpBasis, Projection, Rational, SpecExport};

use crate::bases::MeasurementBasis;
use crate::ensembles::{sn_irrep_ensemble, GroupEnsemble};
use crate::error::{Error, Result};
use crate::linalg::{cr, hermitian_eig, ComplexMatrix, ComplexVector, RandomStream, SuperOperator};
use crate::rep::young::{all_permutations, Partition, YoungRep};
use crate::stats::batch_means;

pub const MAX_DENSE_DIM: usize = 16;
pub const EXACT_CLUSTER_TOL: f64 = 1e-8;

/// vec(x x†) = conj(x) ⊗ x.
fn vec_projector(x: &ComplexVector) -> ComplexVector {
    let d = x.len();
    ComplexVector::from_fn(d * d, |p, _| x[p % d] * x[p / d].conj())
}

/// A_W(X) = Σ_w ⟨w|X|w⟩ |w⟩⟨w|.
pub fn dephasing_superoperator(basis: &MeasurementBasis) -> SuperOperator {
    let d = basis.dim();
    let mut s = SuperOperator::zeros(d);
    for w in 0..d {
        s.add_rank_one(&vec_projector(&basis.vector(w)), 1.0);
    }
    s
}

fn check_dense(d: usize) -> Result<()> {
    if d > MAX_DENSE_DIM {
        Err(Error::TooLarge(d))
    } else {
        Ok(())
    }
}

fn element_channel(u: &ComplexMatrix, basis: &MeasurementBasis, weight: f64, acc: &mut SuperOperator) {
    for w in 0..basis.dim() {
        let x = u.ad_mul(&basis.vector(w));
        acc.add_rank_one(&vec_projector(&x), weight);
    }
}

/// M = E_U Ad_{U†} ∘ A_W ∘ Ad_U averaged over every element of a finite ensemble.
pub fn measurement_channel_exact(ensemble: &GroupEnsemble, basis: &MeasurementBasis) -> Result<SuperOperator> {
    let d = basis.dim();
    check_dense(d)?;
    let descs = ensemble.enumerate_descriptors()?;
    let weight = 1.0 / descs.len() as f64;
    let partials: Vec<Result<SuperOperator>> = descs
        .par_chunks(64)
        .map(|chunk| {
            let mut acc = SuperOperator::zeros(d);
            for desc in chunk {
                let u = ensemble.reconstruct(desc)?.to_dense();
                element_channel(&u, basis, weight, &mut acc);
            }
            Ok(acc)
        })
        .collect();
    let mut total = SuperOperator::zeros(d);
    for p in partials {
        total.matrix += p?.matrix;
    }
    Ok(total)
}

#[derive(Clone, Debug)]
pub struct McChannel {
    pub mean: SuperOperator,
    /// Entrywise standard error (modulus of the real and imaginary errors).
    pub stderr: DMatrix<f64>,
    pub samples: usize,
}

impl McChannel {
    pub fn max_stderr(&self) -> f64 {
        self.stderr.iter().cloned().fold(0.0, f64::max)
    }
}

/// Monte-Carlo channel; sample k uses the stream `(seed, k)`.
pub fn measurement_channel_mc(
    ensemble: &GroupEnsemble,
    basis: &MeasurementBasis,
    samples: usize,
    seed: u64,
) -> Result<McChannel> {
    let d = basis.dim();
    check_dense(d)?;
    if samples < 100 {
        return Err(Error::InvalidArgument(format!("need at least 100 samples, got {samples}")));
    }
    let dd = d * d;
    let stats = batch_means(samples, 2 * dd * dd, |k| {
        let mut rng = RandomStream::new(seed, k as u64);
        let (el, _) = ensemble.sample(&mut rng);
        let mut acc = SuperOperator::zeros(d);
        element_channel(&el.to_dense(), basis, 1.0, &mut acc);
        acc.matrix.iter().flat_map(|z| [z.re, z.im]).collect()
    });
    let mean = ComplexMatrix::from_fn(dd, dd, |i, j| {
        let p = 2 * (i + dd * j);
        crate::linalg::c(stats.mean[p], stats.mean[p + 1])
    });
    let stderr = DMatrix::from_fn(dd, dd, |i, j| {
        let p = 2 * (i + dd * j);
        stats.stderr[p].hypot(stats.stderr[p + 1])
    });
    Ok(McChannel { mean: SuperOperator::new(d, mean)?, stderr, samples })
}

/// Monte-Carlo image M(A) of one probe operator, with entrywise standard errors
/// (real and imaginary parts combined). Cheaper than the full superoperator.
pub fn channel_image_mc(
    ensemble: &GroupEnsemble,
    basis: &MeasurementBasis,
    a: &ComplexMatrix,
    samples: usize,
    seed: u64,
) -> Result<(ComplexMatrix, DMatrix<f64>)> {
    let d = basis.dim();
    if a.nrows() != d || a.ncols() != d {
        return Err(Error::Shape(format!("probe is {}x{}, basis dimension {d}", a.nrows(), a.ncols())));
    }
    let stats = batch_means(samples, 2 * d * d, |k| {
        let mut rng = RandomStream::new(seed, k as u64);
        let (el, _) = ensemble.sample(&mut rng);
        // Σ_w ⟨x_w|A|x_w⟩ x_w x_w† with x_w = U† b_w.
        let x = el.to_dense().adjoint() * &basis.vectors;
        let ax = a * &x;
        let mut img = ComplexMatrix::zeros(d, d);
        for w in 0..d {
            let xw = x.column(w);
            let coef = xw.dotc(&ax.column(w));
            img += xw * xw.adjoint() * coef;
        }
        img.iter().flat_map(|z| [z.re, z.im]).collect()
    });
    let mean = ComplexMatrix::from_fn(d, d, |i, j| {
        let p = 2 * (i + d * j);
        crate::linalg::c(stats.mean[p], stats.mean[p + 1])
    });
    let stderr = DMatrix::from_fn(d, d, |i, j| {
        let p = 2 * (i + d * j);
        stats.stderr[p].hypot(stats.stderr[p + 1])
    });
    Ok((mean, stderr))
}

/// Real eigenvalue clusters (value, multiplicity), largest first.
pub fn channel_spectrum(m: &SuperOperator, tol: f64) -> Result<Vec<(f64, usize)>> {
    let dev = m.self_adjoint_deviation();
    if dev > tol.max(1e-9) {
        return Err(Error::NotHermitian(dev));
    }
    let h = (&m.matrix + m.matrix.adjoint()) * cr(0.5);
    let (vals, _) = hermitian_eig(&h)?;
    Ok(cluster_descending(&vals, tol))
}

/// Spectrum of V† M V for orthonormal columns V.
pub fn restricted_spectrum(m: &SuperOperator, v: &ComplexMatrix, tol: f64) -> Result<Vec<(f64, usize)>> {
    let r = v.adjoint() * &m.matrix * v;
    let h = (&r + r.adjoint()) * cr(0.5);
    let (vals, _) = hermitian_eig(&h)?;
    Ok(cluster_descending(&vals, tol))
}

pub fn cluster_descending(vals: &[f64], tol: f64) -> Vec<(f64, usize)> {
    let mut sorted = vals.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut out: Vec<(f64, usize, f64)> = Vec::new();
    for v in sorted {
        match out.last_mut() {
            Some((sum, count, last)) if (*last - v).abs() <= tol => {
                *sum += v;
                *count += 1;
                *last = v;
            }
            _ => out.push((v, 1, v)),
        }
    }
    out.into_iter().map(|(s, c, _)| (s / c as f64, c)).collect()
}

/// True when every cluster matches a predicted value within `tol` with equal multiplicity.
pub fn spectrum_matches(measured: &[(f64, usize)], predicted: &[(Rational, usize)], tol: f64) -> bool {
    measured.len() == predicted.len()
        && measured.iter().zip(predicted).all(|((v, m), (a, pm))| {
            (v - a.to_f64().unwrap_or(f64::NAN)).abs() <= tol && m == pm
        })
}

/// Monte-Carlo estimate of the mean diagonal element of M on one component.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BlockEstimate {
    pub label: String,
    pub predicted: f64,
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
}

impl BlockEstimate {
    pub fn within(&self, sigmas: f64) -> bool {
        (self.mean - self.predicted).abs() <= sigmas * self.stderr + 1e-12
    }
}

/// t_λ = (1/D) Σ_{B∈λ} Σ_w |⟨B, U† P_w U⟩|² averaged over N samples, for each
/// component of `spec` (or only `labels`). Equals a_λ when M is central.
pub fn block_estimates(
    ensemble: &GroupEnsemble,
    basis: &MeasurementBasis,
    spec: &ChannelSpec,
    labels: Option<&[&str]>,
    samples: usize,
    seed: u64,
) -> Result<Vec<BlockEstimate>> {
    let d = basis.dim();
    let mut comps = Vec::new();
    for c in &spec.components {
        if labels.is_none_or(|l| l.contains(&c.label.as_str())) {
            comps.push((c, c.basis(d)?));
        }
    }
    let stats = batch_means(samples, comps.len(), |k| {
        let mut rng = RandomStream::new(seed, k as u64);
        let (el, _) = ensemble.sample(&mut rng);
        let u = el.to_dense();
        let x = u.adjoint() * &basis.vectors;
        comps
            .iter()
            .map(|(_, b)| {
                let y = match &b.frame {
                    Some(f) => f.adjoint() * &x,
                    None => x.clone(),
                };
                let mut s = 0.0;
                for op in &b.ops {
                    for w in 0..d {
                        let val: crate::linalg::C64 =
                            op.iter().map(|&(i, j, v)| y[(i, w)].conj() * v * y[(j, w)]).sum();
                        s += val.norm_sqr();
                    }
                }
                s / b.len() as f64
            })
            .collect()
    });
    Ok(comps
        .iter()
        .enumerate()
        .map(|(k, (c, _))| BlockEstimate {
            label: c.label.clone(),
            predicted: c.a_f64(),
            mean: stats.mean[k],
            stderr: stats.stderr[k],
            samples,
        })
        .collect())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TwirlScalar {
    pub label: String,
    pub scalar: f64,
    pub residual: f64,
    pub stderr: f64,
}

/// How an ensemble average is taken.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Averaging {
    Exact,
    MonteCarlo { samples: usize, seed: u64 },
}

/// E_g Ad_{g† h g} restricted to each component, fitted to a scalar.
pub fn class_twirl_scalars(
    ensemble: &GroupEnsemble,
    h: &ComplexMatrix,
    spec: &ChannelSpec,
    mode: Averaging,
) -> Result<Vec<TwirlScalar>> {
    let d = spec.d;
    let mut out = Vec::new();
    for comp in &spec.components {
        let basis = comp.basis(d)?;
        let dim = basis.len();
        let elements: Vec<ComplexMatrix> = (0..dim).map(|k| basis.element(k)).collect();
        let twirl_matrix = |g: &ComplexMatrix| -> Vec<f64> {
            let kk = g.adjoint() * h * g;
            let mut vals = Vec::with_capacity(2 * dim * dim);
            for b in &elements {
                let img = &kk * b * kk.adjoint();
                for cf in basis.coefficients(&img) {
                    vals.push(cf.re);
                    vals.push(cf.im);
                }
            }
            vals
        };
        let (mean, stderr) = match mode {
            Averaging::Exact => {
                let descs = ensemble.enumerate_descriptors()?;
                let mut acc = vec![0.0; 2 * dim * dim];
                for desc in &descs {
                    let g = ensemble.reconstruct(desc)?.to_dense();
                    for (a, v) in acc.iter_mut().zip(twirl_matrix(&g)) {
                        *a += v;
                    }
                }
                let n = descs.len() as f64;
                (acc.into_iter().map(|a| a / n).collect::<Vec<_>>(), vec![0.0; 2 * dim * dim])
            }
            Averaging::MonteCarlo { samples, seed } => {
                let s = batch_means(samples, 2 * dim * dim, |k| {
                    let mut rng = RandomStream::new(seed, k as u64);
                    twirl_matrix(&ensemble.sample(&mut rng).0.to_dense())
                });
                (s.mean, s.stderr)
            }
        };
        // Column b holds the coefficients of the image of B_b.
        let entry = |a: usize, b: usize| (mean[2 * (b * dim + a)], mean[2 * (b * dim + a) + 1]);
        let err = |a: usize, b: usize| stderr[2 * (b * dim + a)].hypot(stderr[2 * (b * dim + a) + 1]);
        let scalar = (0..dim).map(|a| entry(a, a).0).sum::<f64>() / dim as f64;
        let mut residual2 = 0.0;
        let mut worst_excess: f64 = 0.0;
        let mut max_err: f64 = 0.0;
        for a in 0..dim {
            for b in 0..dim {
                let (re, im) = entry(a, b);
                let dev = if a == b { (re - scalar).hypot(im) } else { re.hypot(im) };
                residual2 += dev * dev;
                max_err = max_err.max(err(a, b));
                let allowed = match mode {
                    Averaging::Exact => 1e-9,
                    Averaging::MonteCarlo { .. } => 5.0 * err(a, b) + 1e-12,
                };
                worst_excess = worst_excess.max(dev - allowed);
            }
        }
        let residual = residual2.sqrt();
        if worst_excess > 0.0 {
            let threshold = match mode {
                Averaging::Exact => 1e-9,
                Averaging::MonteCarlo { .. } => 5.0 * max_err,
            };
            return Err(Error::NonCentral { label: comp.label.clone(), residual, threshold });
        }
        let se = match mode {
            Averaging::Exact => 0.0,
            Averaging::MonteCarlo { .. } => {
                ((0..dim).map(|a| err(a, a).powi(2)).sum::<f64>()).sqrt() / dim as f64
            }
        };
        out.push(TwirlScalar { label: comp.label.clone(), scalar, residual, stderr: se });
    }
    Ok(out)
}

/// ‖A_W − T_H ∘ P_D‖_F with T_H the H-twirl and P_D the projector onto
/// operators that are block diagonal with respect to the basis blocks.
pub fn dephasing_equals_htwirl_check(basis: &MeasurementBasis, subgroup: &[ComplexMatrix]) -> Result<f64> {
    let d = basis.dim();
    check_dense(d)?;
    if subgroup.is_empty() {
        return Err(Error::InvalidArgument("empty subgroup".into()));
    }
    let dephase = dephasing_superoperator(basis);
    let mut twirl = SuperOperator::zeros(d);
    for h in subgroup {
        twirl.matrix += SuperOperator::conjugation(h).matrix;
    }
    twirl.matrix /= cr(subgroup.len() as f64);
    let mut pd = SuperOperator::zeros(d);
    for (_, idx) in basis.blocks() {
        let mut pi = ComplexMatrix::zeros(d, d);
        for &w in &idx {
            let v = basis.vector(w);
            pi += &v * v.adjoint();
        }
        pd.matrix += SuperOperator::conjugation(&pi).matrix;
    }
    let composed = twirl.compose(&pd);
    Ok(crate::linalg::frobenius(&(dephase.matrix - composed.matrix)))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GtIsotypic {
    pub label: String,
    /// Dimension of the isotypic inside End(V^λ).
    pub dim: usize,
    pub scalar: f64,
    pub residual: f64,
    pub central: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GtReport {
    pub shape: Partition,
    pub spectrum: Vec<(f64, usize)>,
    pub isotypics: Vec<GtIsotypic>,
    pub non_central: bool,
}

/// Exact channel of S_n acting on End(V^λ) with Gelfand–Tsetlin dephasing, plus a
/// centrality check on every S_n isotypic of End(V^λ).
pub fn sn_gt_channel(shape: &Partition) -> Result<(SuperOperator, GtReport)> {
    let ensemble = sn_irrep_ensemble(shape)?;
    let d = ensemble.dim;
    check_dense(d)?;
    let basis = MeasurementBasis::standard(d, &shape.to_string(), |k| format!("T{}", k + 1));
    let m = measurement_channel_exact(&ensemble, &basis)?;
    let spectrum = channel_spectrum(&m, EXACT_CLUSTER_TOL)?;
    let n = shape.n();
    let perms = all_permutations(n);
    let rho = YoungRep::new(shape);
    let ad: Vec<ComplexMatrix> = perms.iter().map(|p| SuperOperator::conjugation(&rho.matrix(p)).matrix).collect();
    let mut isotypics = Vec::new();
    for mu in Partition::all(n) {
        let chars = spec::sn_character_table(&mu);
        let dim_mu = chars[&vec![1; n]];
        let mut p = ComplexMatrix::zeros(d * d, d * d);
        for (g, a) in perms.iter().zip(&ad) {
            let chi = chars[&cycle_key(g)];
            if chi != 0.0 {
                p += a * cr(chi * dim_mu / perms.len() as f64);
            }
        }
        let tr = p.trace().re;
        if tr < 0.5 {
            continue;
        }
        let scalar = (&p * &m.matrix).trace().re / tr;
        let residual = crate::linalg::frobenius(&(&p * &m.matrix * &p - &p * cr(scalar)));
        isotypics.push(GtIsotypic {
            label: mu.to_string(),
            dim: tr.round() as usize,
            scalar,
            residual,
            central: residual <= 1e-9,
        });
    }
    let non_central = isotypics.iter().any(|i| !i.central);
    Ok((m, GtReport { shape: shape.clone(), spectrum, isotypics, non_central }))
}

fn cycle_key(p: &[usize]) -> Vec<usize> {
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
