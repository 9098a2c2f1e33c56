//! Verification suites run by `verify`. Each suite returns one `Check` per claim.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::bases::{bell_pair_basis, computational_basis, schur_basis};
use crate::channel::spec::{binomial, sn_diagonal_span};
use crate::channel::{
    block_estimates, channel_image_mc, channel_spectrum, measurement_channel_exact,
    restricted_spectrum, sn_gt_channel, Averaging, EXACT_CLUSTER_TOL,
};
use crate::ensembles::{haar_unitary, local_clifford_ensemble, majorana_operators, matchgate_ensemble};
use crate::error::{Error, Result};
use crate::io::{parse_observable, parse_state, table_rows, SweepConfig};
use crate::linalg::{
    cr, frobenius, identity, pauli_x, pauli_y, pauli_z, random_hermitian, spectral_norm_hermitian, tensor_all,
    unitarity_deviation, ComplexMatrix, RandomStream,
};
use crate::protocol::{build_protocol, ProtocolId, SizeParams};
use crate::rep::check_ndcse;
use crate::rep::young::Partition;
use crate::shadows::{observable_isotypic_projector, observable_zsym, shot_values, Observable, ShadowEstimator};
use crate::stats::fit_slope;
use crate::sweep::run_sweep;
use crate::variance::{bound_inf, bound_l2, bound_special, exact_variance_zsym, tight_frame_check, Empirical};

/// Suite names with one-line descriptions.
pub const SUITES: [(&str, &str); 10] = [
    ("channels-exact", "exact channel spectra by group enumeration"),
    ("gt", "Gelfand-Tsetlin non-centrality counterexample for S_5"),
    ("channels-mc", "Monte-Carlo channel eigenvalues for continuous groups"),
    ("su2-tensor", "Schur transform, channel, Z_sym and projector variances at n = 4"),
    ("bounds", "empirical variance against l2, inf and special bounds"),
    ("tight-frame", "tight-frame identity for Cliffords and matchgates"),
    ("htwirl", "dephasing equals H-twirl and degenerate control"),
    ("table", "protocol table columns against the published values"),
    ("fig4", "variance growth with n for su2-tensor and local Cliffords"),
    ("determinism", "byte-identical CLI outputs under a fixed seed"),
];

pub const SIGMAS: f64 = 5.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub suite: String,
    pub name: String,
    pub pass: bool,
    pub detail: String,
    /// Wall-clock seconds for runtime checks; kept out of serialized reports.
    #[serde(skip)]
    pub elapsed: Option<f64>,
}

impl Check {
    fn new(suite: &str, name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Self { suite: suite.into(), name: name.into(), pass, detail: detail.into(), elapsed: None }
    }

    fn runtime(suite: &str, t0: Instant, limit: f64) -> Self {
        let secs = t0.elapsed().as_secs_f64();
        Self { elapsed: Some(secs), ..Self::new(suite, "runtime", secs < limit, format!("limit {limit}s")) }
    }

    /// `PASS suite/name: detail`
    pub fn line(&self) -> String {
        let mut s = format!("{} {}/{}: {}", if self.pass { "PASS" } else { "FAIL" }, self.suite, self.name, self.detail);
        if let Some(t) = self.elapsed {
            s.push_str(&format!(", took {t:.1}s"));
        }
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SuiteOptions {
    /// Monte-Carlo samples for the channel and su2-tensor suites; the bounds
    /// suite uses a fifth of this per triple and fig4 a tenth per grid point.
    pub samples: usize,
    pub seed: u64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self { samples: 100_000, seed: 2024 }
    }
}

pub fn suite_names() -> Vec<&'static str> {
    SUITES.iter().map(|(n, _)| *n).collect()
}

pub fn run_suite(name: &str, opts: &SuiteOptions) -> Result<Vec<Check>> {
    match name {
        "channels-exact" => channels_exact(),
        "gt" => gt(),
        "channels-mc" => channels_mc(opts),
        "su2-tensor" => su2_tensor(opts),
        "bounds" => bounds(opts),
        "tight-frame" => tight_frame(opts),
        "htwirl" => htwirl(),
        "table" => table(),
        "fig4" => fig4(opts),
        "determinism" => crate::cli::determinism_checks(opts.seed),
        _ => Err(Error::InvalidArgument(format!("unknown suite `{name}`; available: {}", suite_names().join(", ")))),
    }
}

fn fmt_spectrum(s: &[(f64, usize)]) -> String {
    let parts: Vec<String> = s.iter().map(|(v, m)| format!("{v:.6}x{m}")).collect();
    format!("{{{}}}", parts.join(", "))
}

/// Multiset equality of clustered spectra; both sides largest first.
fn spectrum_is(measured: &[(f64, usize)], want: &[(f64, usize)], tol: f64) -> bool {
    measured.len() == want.len() && measured.iter().zip(want).all(|((v, m), (w, k))| (v - w).abs() <= tol && m == k)
}

fn pauli_matrix(letters: &[usize]) -> ComplexMatrix {
    let p = [identity(2), pauli_x(), pauli_y(), pauli_z()];
    tensor_all(&letters.iter().map(|&l| p[l].clone()).collect::<Vec<_>>())
}

fn all_letter_strings(n: usize) -> Vec<Vec<usize>> {
    (0..4usize.pow(n as u32)).map(|k| (0..n).map(|q| (k / 4usize.pow(q as u32)) % 4).collect()).collect()
}

const EXACT_TOL: f64 = 1e-10;

fn channels_exact() -> Result<Vec<Check>> {
    const S: &str = "channels-exact";
    let t0 = Instant::now();
    let mut out = Vec::new();
    for n in 1..=2usize {
        let p = build_protocol(ProtocolId::Pauli, &SizeParams::qubits(n))?;
        let m = measurement_channel_exact(&p.ensemble, &p.basis)?;
        let mut dev: f64 = 0.0;
        for letters in all_letter_strings(n) {
            let pm = pauli_matrix(&letters);
            let z_type = letters.iter().all(|&l| l == 0 || l == 3);
            let want = if z_type { pm.clone() } else { ComplexMatrix::zeros(pm.nrows(), pm.ncols()) };
            dev = dev.max(frobenius(&(m.apply(&pm) - want)));
        }
        let spec = channel_spectrum(&m, EXACT_CLUSTER_TOL)?;
        let d = 1usize << n;
        let want = [(1.0, d), (0.0, d * d - d)];
        let pass = dev <= EXACT_TOL && spectrum_is(&spec, &want, EXACT_TOL);
        out.push(Check::new(
            S,
            format!("pauli n={n}"),
            pass,
            format!("spectrum {} (want 1 on span{{I,Z}}^n, 0 elsewhere), max eigen-equation residual {dev:.1e}", fmt_spectrum(&spec)),
        ));
    }
    let third = 1.0 / 3.0;
    let cases: [(ProtocolId, Vec<(f64, usize)>); 2] = [
        (ProtocolId::LocalClifford, vec![(1.0, 1), (third, 6), (1.0 / 9.0, 9)]),
        (ProtocolId::LocalCliffordBell, vec![(1.0, 1), (third, 3), (0.0, 12)]),
    ];
    for (id, want) in cases {
        let p = build_protocol(id, &SizeParams::qubits(2))?;
        let m = measurement_channel_exact(&p.ensemble, &p.basis)?;
        let spec = channel_spectrum(&m, EXACT_CLUSTER_TOL)?;
        out.push(Check::new(
            S,
            format!("{id} n=2"),
            spectrum_is(&spec, &want, EXACT_TOL),
            format!("spectrum {} want {}", fmt_spectrum(&spec), fmt_spectrum(&want)),
        ));
    }
    let p = build_protocol(ProtocolId::SnPermutation, &SizeParams::qubits(5))?;
    let m = measurement_channel_exact(&p.ensemble, &p.basis)?;
    let ld = sn_diagonal_span(5).map(cr);
    let spec = restricted_spectrum(&m, &ld, EXACT_CLUSTER_TOL)?;
    let want = [(1.0, 2), (third, 6), (0.2, 5), (0.0, 4)];
    out.push(Check::new(
        S,
        "sn-permutation n=5 on L^D",
        spectrum_is(&spec, &want, EXACT_TOL),
        format!("spectrum {} want {}", fmt_spectrum(&spec), fmt_spectrum(&want)),
    ));
    out.push(Check::runtime(S, t0, 60.0));
    Ok(out)
}

fn gt() -> Result<Vec<Check>> {
    const S: &str = "gt";
    let t0 = Instant::now();
    let (_, report) = sn_gt_channel(&Partition::new(vec![3, 1, 1])?)?;
    let mult = |v: f64| report.spectrum.iter().find(|(x, _)| (x - v).abs() <= 1e-9).map_or(0, |(_, m)| *m);
    let mut out = vec![
        Check::new(S, "11/90", mult(11.0 / 90.0) == 5, format!("multiplicity {} (want 5)", mult(11.0 / 90.0))),
        Check::new(S, "43/120", mult(43.0 / 120.0) == 5, format!("multiplicity {} (want 5)", mult(43.0 / 120.0))),
        Check::new(S, "1/24", mult(1.0 / 24.0) >= 5, format!("multiplicity {} (want >= 5)", mult(1.0 / 24.0))),
    ];
    let flagged: Vec<&str> = report.isotypics.iter().filter(|i| !i.central).map(|i| i.label.as_str()).collect();
    out.push(Check::new(S, "non-central", report.non_central, format!("non-central isotypics {flagged:?}")));
    out.push(Check::runtime(S, t0, 60.0));
    Ok(out)
}

/// Block estimates of one protocol against independently computed eigenvalues.
fn blocks_against(
    suite: &str,
    id: ProtocolId,
    size: SizeParams,
    opts: &SuiteOptions,
    expected: impl Fn(&str) -> Option<f64>,
) -> Result<Check> {
    let p = build_protocol(id, &size)?;
    let est = block_estimates(&p.ensemble, &p.basis, p.spec()?, None, opts.samples, opts.seed)?;
    let mut pass = true;
    let mut parts = Vec::new();
    let mut seen = 0;
    for b in &est {
        let Some(want) = expected(&b.label) else { continue };
        seen += 1;
        let ok = (b.mean - want).abs() <= SIGMAS * b.stderr + 1e-12;
        pass &= ok;
        parts.push(format!("{}: {:.5}±{:.1e} (want {:.5}){}", b.label, b.mean, b.stderr, want, if ok { "" } else { " !" }));
    }
    pass &= seen > 0;
    Ok(Check::new(suite, format!("{id} {}", size.tag()), pass, parts.join("; ")))
}

fn channels_mc(opts: &SuiteOptions) -> Result<Vec<Check>> {
    const S: &str = "channels-mc";
    let t0 = Instant::now();
    let mut out = Vec::new();
    for d in [4usize, 8] {
        out.push(blocks_against(S, ProtocolId::GlobalHaar, SizeParams::dim(d), opts, |l| match l {
            "triv" => Some(1.0),
            "ad" => Some(1.0 / (d as f64 + 1.0)),
            _ => None,
        })?);
    }
    for n in [3usize, 4] {
        out.push(blocks_against(S, ProtocolId::Matchgate, SizeParams::qubits(n), opts, |l| {
            let p: usize = l.trim_start_matches("deg=").trim_end_matches(['+', '-']).parse().ok()?;
            if p % 2 == 1 {
                return None;
            }
            let k = (p / 2) as i128;
            Some(binomial(n as i128, k) as f64 / binomial(2 * n as i128, 2 * k) as f64)
        })?);
    }
    out.push(blocks_against(S, ProtocolId::Su2Spin, SizeParams::dim(4), opts, |l| {
        let j: f64 = l.strip_prefix("j=")?.parse().ok()?;
        Some(1.0 / (2.0 * j + 1.0))
    })?);
    let d = 8.0;
    out.push(blocks_against(S, ProtocolId::OrthogonalSplit, SizeParams::dim(8), opts, |l| match l {
        "triv" => Some(1.0),
        "U" => Some((d - 2.0) / ((d + 2.0) * (d - 1.0))),
        "Λ²" => Some(1.0 / (d - 1.0)),
        _ => None,
    })?);
    for d in [4usize, 8] {
        out.push(blocks_against(S, ProtocolId::Symplectic, SizeParams::dim(d), opts, |l| match l {
            "triv" => Some(1.0),
            "Sym²" | "W" => Some(1.0 / (d as f64 + 1.0)),
            _ => None,
        })?);
    }
    out.push(blocks_against(S, ProtocolId::ParticlePreserving, SizeParams::qubits(4), opts, |l| {
        let j: i128 = l.strip_prefix("j=")?.parse().ok()?;
        Some(1.0 / (binomial(4, j) + binomial(4, j - 1)) as f64)
    })?);
    out.push(real_orthogonal_probes(S, 8, opts)?);
    out.push(Check::runtime(S, t0, 600.0));
    Ok(out)
}

/// M(A) = (Tr A · I + A + Aᵀ)/(d + 2) on a random complex probe and a matrix unit.
fn real_orthogonal_probes(suite: &str, d: usize, opts: &SuiteOptions) -> Result<Check> {
    let p = build_protocol(ProtocolId::OrthogonalReal, &SizeParams::dim(d))?;
    let mut rng = RandomStream::new(opts.seed, u64::MAX);
    let mut random = ComplexMatrix::zeros(d, d);
    for z in random.iter_mut() {
        *z = rng.complex_normal();
    }
    let mut unit = ComplexMatrix::zeros(d, d);
    unit[(0, 1)] = cr(1.0);
    let mut pass = true;
    let mut worst: f64 = 0.0;
    for (k, a) in [random, unit].iter().enumerate() {
        let (img, se) = channel_image_mc(&p.ensemble, &p.basis, a, opts.samples, opts.seed.wrapping_add(k as u64))?;
        let want = (identity(d) * a.trace() + a + a.transpose()) / cr(d as f64 + 2.0);
        for i in 0..d {
            for j in 0..d {
                let z = (img[(i, j)] - want[(i, j)]).norm() / se[(i, j)].max(1e-300);
                worst = worst.max(z);
                pass &= (img[(i, j)] - want[(i, j)]).norm() <= SIGMAS * se[(i, j)] + 1e-12;
            }
        }
    }
    Ok(Check::new(
        suite,
        format!("orthogonal-real d={d} probes"),
        pass,
        format!("max entry deviation {worst:.2} sigma (limit {SIGMAS})"),
    ))
}

fn su2_tensor(opts: &SuiteOptions) -> Result<Vec<Check>> {
    const S: &str = "su2-tensor";
    let n = 4;
    let mut out = Vec::new();
    let (t, labels) = schur_basis(n)?;
    let udev = unitarity_deviation(&t);
    let mut rng = RandomStream::new(opts.seed, u64::MAX - 1);
    let mut off: f64 = 0.0;
    for _ in 0..3 {
        let u = haar_unitary(2, &mut rng);
        let big = tensor_all(&vec![u; n]);
        let b = t.adjoint() * big * &t;
        let mut mass = 0.0;
        for r in 0..b.nrows() {
            for c in 0..b.ncols() {
                let same = labels[r].two_s == labels[c].two_s && labels[r].t == labels[c].t;
                if !same {
                    mass += b[(r, c)].norm_sqr();
                }
            }
        }
        off = off.max(mass);
    }
    out.push(Check::new(
        S,
        "schur transform",
        udev <= 1e-8 && off <= 1e-8,
        format!("unitarity deviation {udev:.1e}, off-block mass {off:.1e} (limit 1e-8)"),
    ));
    out.push(blocks_against(S, ProtocolId::Su2Tensor, SizeParams::qubits(n), opts, |l| {
        let s: f64 = l.strip_prefix("s=")?.parse().ok()?;
        Some(1.0 / (2.0 * s + 1.0))
    })?);

    let p = build_protocol(ProtocolId::Su2Tensor, &SizeParams::qubits(n))?;
    let state = parse_state("haar", p.dim(), opts.seed)?;
    let rho = state.density_matrix();
    let z = observable_zsym(n)?;
    let values = shot_values(&p, &state, &ShadowEstimator::new(&p, &z)?, opts.samples, opts.seed)?;
    let emp = Empirical::from_values(&values);
    let truth = state.expectation(&z.matrix);
    let se = (emp.variance / emp.samples as f64).sqrt();
    out.push(Check::new(
        S,
        "zsym unbiased",
        (emp.mean - truth).abs() <= SIGMAS * se,
        format!("mean {:.5} vs Tr[rho O] {truth:.5}, SE {se:.1e}", emp.mean),
    ));
    let exact = exact_variance_zsym(&rho, n)?;
    out.push(Check::new(
        S,
        "zsym variance",
        (emp.variance - exact).abs() <= SIGMAS * emp.variance_stderr,
        format!("empirical {:.5}±{:.1e} vs closed form {exact:.5}", emp.variance, emp.variance_stderr),
    ));
    for parts in [vec![4], vec![3, 1], vec![2, 2]] {
        let eta = Partition::new(parts)?;
        let o = observable_isotypic_projector(&eta, n)?;
        let values = shot_values(&p, &state, &ShadowEstimator::new(&p, &o)?, opts.samples, opts.seed)?;
        let emp = Empirical::from_values(&values);
        let prob = (&rho * &o.matrix).trace().re;
        let want = prob * (1.0 - prob);
        let pass = (emp.variance - want).abs() <= SIGMAS * emp.variance_stderr
            && want <= 0.25
            && emp.variance <= 0.25 + SIGMAS * emp.variance_stderr;
        out.push(Check::new(
            S,
            format!("projector {eta} variance"),
            pass,
            format!("empirical {:.5}±{:.1e} vs p(1-p) {want:.5} (cap 1/4)", emp.variance, emp.variance_stderr),
        ));
    }
    Ok(out)
}

fn random_observable(d: usize, seed: u64) -> Result<Observable> {
    let mut rng = RandomStream::new(seed, u64::MAX - 2);
    let h = random_hermitian(d, &mut rng);
    let norm = spectral_norm_hermitian(&h)?;
    Observable::new("random", h / cr(norm))
}

/// (protocol, size, observable names, special bound expected) grid for `bounds`.
fn bounds_grid() -> Vec<(ProtocolId, SizeParams, Vec<&'static str>, Vec<&'static str>)> {
    vec![
        (ProtocolId::GlobalClifford, SizeParams::qubits(2), vec!["pauli:XZ", "pauli:YY", "random"], vec!["pauli:XZ", "pauli:YY"]),
        (ProtocolId::LocalClifford, SizeParams::qubits(3), vec!["pauli:ZZZ", "pauli:XIY", "random"], vec!["pauli:ZZZ", "pauli:XIY"]),
        (ProtocolId::Matchgate, SizeParams::qubits(3), vec!["majorana:1,2", "majorana:1,2,3,6", "random"], vec!["majorana:1,2", "majorana:1,2,3,6"]),
        (ProtocolId::Su2Tensor, SizeParams::qubits(4), vec!["zsym", "projsym", "ghz"], vec![]),
        (ProtocolId::SnPermutation, SizeParams::qubits(5), vec!["allones", "random"], vec!["allones"]),
        (ProtocolId::Pauli, SizeParams::qubits(2), vec!["pauli:ZZ"], vec!["pauli:ZZ"]),
        (ProtocolId::Su2Spin, SizeParams::dim(4), vec!["random"], vec![]),
        (ProtocolId::Symplectic, SizeParams::dim(4), vec!["random"], vec![]),
        (ProtocolId::OrthogonalSplit, SizeParams::dim(4), vec!["random"], vec![]),
        (ProtocolId::OrthogonalReal, SizeParams::dim(4), vec!["random"], vec![]),
        (ProtocolId::ParticlePreserving, SizeParams::qubits(3), vec!["random"], vec![]),
    ]
}

fn bounds(opts: &SuiteOptions) -> Result<Vec<Check>> {
    const S: &str = "bounds";
    let samples = (opts.samples / 5).max(2000);
    let states = ["haar", "haar-mixed:2"];
    let mut out = Vec::new();
    let mut triples = 0;
    for (id, size, observables, special) in bounds_grid() {
        let p = build_protocol(id, &size)?;
        let spec = p.spec()?;
        let d = p.dim();
        for obs in &observables {
            let o = match *obs {
                "random" => random_observable(d, opts.seed.wrapping_add(triples as u64))?,
                "allones" => Observable::new("allones", ComplexMatrix::from_element(d, d, cr(1.0 / d as f64)))?,
                name => parse_observable(name, d)?,
            };
            let l2 = bound_l2(spec, &o.matrix);
            let inf = bound_inf(spec, &o.matrix)?;
            let sp = bound_special(spec, &o.matrix)?;
            for (k, st) in states.iter().enumerate() {
                let state = parse_state(st, d, opts.seed.wrapping_add(k as u64))?;
                let values = shot_values(&p, &state, &ShadowEstimator::new(&p, &o)?, samples, opts.seed)?;
                let emp = Empirical::from_values(&values);
                let slack = SIGMAS * emp.variance_stderr + 1e-9;
                let mut pass = emp.variance <= l2.min(inf) + slack;
                let mut detail = format!("var {:.4}±{:.1e}, l2 {l2:.4}, inf {inf:.4}", emp.variance, emp.variance_stderr);
                if let Some(b) = sp {
                    pass &= emp.variance <= b + slack && b <= inf + 1e-9;
                    detail.push_str(&format!(", special {b:.4}"));
                }
                if special.contains(obs) && sp.is_none() {
                    pass = false;
                    detail.push_str(", special bound missing");
                }
                triples += 1;
                out.push(Check::new(S, format!("{id} {} {obs} {st}", size.tag()), pass, detail));
            }
        }
    }
    out.push(Check::new(S, "grid size", triples >= 30, format!("{triples} triples (need >= 30)")));
    Ok(out)
}

fn tight_frame(opts: &SuiteOptions) -> Result<Vec<Check>> {
    const S: &str = "tight-frame";
    let h = cr(1.0 / 2f64.sqrt());
    let paulis = vec![pauli_x() * h, pauli_y() * h, pauli_z() * h];
    let (v, _) = tight_frame_check(&local_clifford_ensemble(1)?, &computational_basis(1), &paulis, &[2], 0, Averaging::Exact)?;
    let mut out = vec![Check::new(S, "clifford exact", (v - 1.0 / 3.0).abs() <= 1e-12, format!("{v:.15} (want 1/3)"))];
    let maj = majorana_operators(3);
    let mut basis = Vec::new();
    let mut diag = Vec::new();
    for a in 1..=6 {
        for b in a + 1..=6 {
            if b == a + 1 && a % 2 == 1 {
                diag.push(basis.len());
            }
            basis.push(maj.monomial(&[a, b])? * cr(1.0 / 8f64.sqrt()));
        }
    }
    let (v, se) = tight_frame_check(
        &matchgate_ensemble(3)?,
        &computational_basis(3),
        &basis,
        &diag,
        0,
        Averaging::MonteCarlo { samples: opts.samples, seed: opts.seed },
    )?;
    out.push(Check::new(S, "matchgate n=3 mc", (v - 0.2).abs() <= SIGMAS * se, format!("{v:.5}±{se:.1e} (want 1/5)")));
    Ok(out)
}

fn htwirl() -> Result<Vec<Check>> {
    const S: &str = "htwirl";
    let zs = [identity(2), pauli_z()];
    let mut h = Vec::new();
    for a in &zs {
        for b in &zs {
            h.push(tensor_all(&[a.clone(), b.clone()]));
        }
    }
    let comp = computational_basis(2);
    let dev = crate::channel::dephasing_equals_htwirl_check(&comp, &h)?;
    let mut out = vec![Check::new(S, "computational {I,Z}^2", dev <= 1e-9, format!("deviation {dev:.1e}"))];
    let xx = tensor_all(&[pauli_x(), pauli_x()]);
    let zz = tensor_all(&[pauli_z(), pauli_z()]);
    let stab = vec![identity(4), xx.clone(), zz.clone(), &xx * &zz];
    let bell = bell_pair_basis(2)?;
    let dev = crate::channel::dephasing_equals_htwirl_check(&bell, &stab)?;
    out.push(Check::new(S, "bell stabilizer", dev <= 1e-9, format!("deviation {dev:.1e}")));
    let trivial = [identity(4)];
    let dev = crate::channel::dephasing_equals_htwirl_check(&comp, &trivial)?;
    let report = check_ndcse(&comp, &trivial, None)?;
    out.push(Check::new(
        S,
        "degenerate control H={I}",
        dev > 1e-9 && !report.is_nondegenerate,
        format!("deviation {dev:.3} and nondegenerate={} (flagged when both fail)", report.is_nondegenerate),
    ));
    Ok(out)
}

/// Published values for the rows `table_rows` emits, at the same sizes.
pub fn published_table() -> Vec<(&'static str, Option<usize>, usize, bool)> {
    let n3 = 3u32;
    vec![
        ("global-clifford", Some(4usize.pow(n3)), 2, true),
        ("local-clifford", Some(4usize.pow(n3)), 2usize.pow(n3), true),
        ("su2-spin", Some(16), 4, true),
        ("su2-tensor", None, 5, false),
        ("matchgate", Some(2usize.pow(2 * n3 - 1)), 4, false),
        ("orthogonal-real", Some(4 * 5 / 2), 3, true),
        ("orthogonal-split", Some(16), 3, true),
        ("symplectic", Some(16), 3, true),
        ("sn-permutation", Some(5 * 5 - 2 * 5 + 2), 5, false),
    ]
}

fn table() -> Result<Vec<Check>> {
    const S: &str = "table";
    let rows = table_rows()?;
    let mut out = Vec::new();
    for (protocol, dim, irreps, free) in published_table() {
        let Some(r) = rows.iter().find(|r| r.protocol == protocol) else {
            out.push(Check::new(S, protocol, false, "row missing"));
            continue;
        };
        let pass = r.dim_visible == dim && r.irreps == irreps && r.multiplicity_free == free;
        let show = |d: Option<usize>| d.map_or("n/a".to_string(), |v| v.to_string());
        out.push(Check::new(
            S,
            format!("{} {}", r.group, r.size),
            pass,
            format!(
                "dim L^V {} #λ {} mult-free {} (published {} {} {})",
                show(r.dim_visible),
                r.irreps,
                r.multiplicity_free,
                show(dim),
                irreps,
                free
            ),
        ));
    }
    Ok(out)
}

fn fig4(opts: &SuiteOptions) -> Result<Vec<Check>> {
    const S: &str = "fig4";
    let t0 = Instant::now();
    let samples = (opts.samples / 10).max(100);
    let ns: Vec<usize> = (2..=8).collect();
    let su2 = SweepConfig {
        protocols: vec!["su2-tensor".into()],
        observables: ["zsym", "projsym", "ghz", "zall"].iter().map(|s| s.to_string()).collect(),
        n: ns.clone(),
        snapshots: samples,
        seed: opts.seed,
        state: "haar".into(),
        state_seed: None,
        out: None,
        plot: false,
    };
    let lc = SweepConfig { protocols: vec!["local-clifford".into()], observables: vec!["zall".into()], ..su2.clone() };
    let mut points = run_sweep(&su2, false)?;
    points.extend(run_sweep(&lc, false)?);
    let mut out = Vec::new();
    for obs in &su2.observables {
        let pts: Vec<_> = points.iter().filter(|p| p.row.protocol == "su2-tensor" && &p.row.observable == obs).collect();
        let x: Vec<f64> = pts.iter().map(|p| (p.row.n as f64).ln()).collect();
        let y: Vec<f64> = pts.iter().map(|p| p.row.empirical_variance.max(1e-300).ln()).collect();
        let slope = fit_slope(&x, &y);
        out.push(Check::new(S, format!("su2-tensor {obs} log-log slope"), slope < 4.0, format!("{slope:.3} (limit 4)")));
    }
    let proj_ok = points
        .iter()
        .filter(|p| p.row.observable == "projsym")
        .all(|p| p.row.empirical_variance <= 0.25 + SIGMAS * p.variance_stderr);
    out.push(Check::new(S, "su2-tensor projsym <= 1/4", proj_ok, "every n"));
    let lcp: Vec<_> = points.iter().filter(|p| p.row.protocol == "local-clifford").collect();
    let x: Vec<f64> = lcp.iter().map(|p| p.row.n as f64).collect();
    let exact: Vec<f64> = lcp.iter().map(|p| p.row.exact.unwrap_or(f64::NAN).ln()).collect();
    let emp: Vec<f64> = lcp.iter().map(|p| p.row.empirical_variance.max(1e-300).ln()).collect();
    let slope_exact = fit_slope(&x, &exact);
    let slope_emp = fit_slope(&x, &emp);
    out.push(Check::new(
        S,
        "local-clifford zall growth",
        slope_exact >= 3f64.ln(),
        format!(
            "log-variance slope {slope_exact:.4} per qubit from the exact column (ln 3 = {:.4}); empirical slope {slope_emp:.4} at N={samples}",
            3f64.ln()
        ),
    ));
    let bad: Vec<String> =
        points.iter().filter(|p| !p.within_bounds(SIGMAS)).map(|p| format!("{} {} n={}", p.row.protocol, p.row.observable, p.row.n)).collect();
    out.push(Check::new(S, "bound compliance", bad.is_empty(), if bad.is_empty() { "all points".into() } else { bad.join(", ") }));
    out.push(Check::runtime(S, t0, 1800.0));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite_lists_names() {
        let err = run_suite("nope", &SuiteOptions::default()).unwrap_err().to_string();
        assert!(err.contains("channels-exact") && err.contains("bounds"), "{err}");
    }

    #[test]
    fn htwirl_suite_passes() {
        assert!(run_suite("htwirl", &SuiteOptions::default()).unwrap().iter().all(|c| c.pass));
    }

    #[test]
    fn published_rows_cover_table() {
        let rows = table_rows().unwrap();
        assert_eq!(rows.len(), published_table().len());
    }
}
