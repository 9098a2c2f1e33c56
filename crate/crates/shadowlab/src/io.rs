//! Experiment configuration, state and observable parsing, and report files.
//!
//! Configs are flat TOML tables. Every data file written here is a pure function
//! of its inputs so reruns under one seed are byte-identical.

use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{random_density_matrix, random_pure_state, RandomStream};
use crate::protocol::{ProtocolId, SizeParams};
use crate::rep::young::Partition;
use crate::shadows::{
    observable_ghz, observable_isotypic_projector, observable_majorana, observable_pauli, observable_zsym, Observable,
    QuantumState,
};

/// RNG stream used for random input states, kept clear of snapshot counters.
pub const STATE_STREAM: u64 = 1 << 63;

/// One experiment: protocol, size, observable, state and sampling parameters.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub protocol: Option<String>,
    pub n: Option<usize>,
    pub d: Option<usize>,
    pub lambda: Option<String>,
    pub observable: Option<String>,
    pub state: Option<String>,
    pub state_seed: Option<u64>,
    pub snapshots: Option<usize>,
    pub groups: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<String>,
    pub threads: Option<usize>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn protocol_id(&self) -> Result<ProtocolId> {
        self.protocol.as_deref().ok_or_else(|| Error::Config("missing `protocol`".into()))?.parse()
    }

    pub fn size(&self) -> Result<SizeParams> {
        let lambda = self.lambda.as_deref().map(Partition::parse).transpose()?;
        Ok(SizeParams { n: self.n, d: self.d, lambda })
    }

    /// Checks N ≥ K ≥ 1 and that the protocol id resolves.
    pub fn validate(&self) -> Result<()> {
        self.protocol_id()?;
        let n = self.snapshots.unwrap_or(1);
        let k = self.groups.unwrap_or(1);
        if k == 0 || n < k {
            return Err(Error::Config(format!("need N ≥ K ≥ 1, got N={n}, K={k}")));
        }
        Ok(())
    }
}

/// Grid for a variance sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub protocols: Vec<String>,
    pub observables: Vec<String>,
    pub n: Vec<usize>,
    #[serde(default = "default_sweep_snapshots")]
    pub snapshots: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_state")]
    pub state: String,
    #[serde(default)]
    pub state_seed: Option<u64>,
    #[serde(default)]
    pub out: Option<String>,
    #[serde(default = "default_true")]
    pub plot: bool,
}

fn default_sweep_snapshots() -> usize {
    10_000
}

fn default_state() -> String {
    "haar".into()
}

fn default_true() -> bool {
    true
}

impl SweepConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }
}

/// Builds an input state from a family name.
///
/// Families: `zero`, `basis:K`, `ghz`, `mixed` (maximally mixed), `haar`
/// (random pure) and `haar-mixed:R` (random rank-R density matrix). Random
/// families draw from `RandomStream::new(seed, STATE_STREAM)`.
pub fn parse_state(spec: &str, dim: usize, seed: u64) -> Result<QuantumState> {
    let (name, arg) = split_arg(spec);
    let mut rng = RandomStream::new(seed, STATE_STREAM);
    match (name, arg) {
        ("zero", None) => Ok(QuantumState::basis_state(dim, 0)),
        ("basis", Some(k)) => {
            let k: usize = parse_num(k)?;
            if k >= dim {
                return Err(Error::InvalidArgument(format!("basis index {k} out of range for d={dim}")));
            }
            Ok(QuantumState::basis_state(dim, k))
        }
        ("ghz", None) => {
            if !dim.is_power_of_two() || dim < 2 {
                return Err(Error::InvalidArgument("ghz needs a qubit register".into()));
            }
            Ok(QuantumState::ghz(dim.trailing_zeros() as usize))
        }
        ("mixed", None) => Ok(QuantumState::maximally_mixed(dim)),
        ("haar", None) => QuantumState::pure(random_pure_state(dim, &mut rng)),
        ("haar-mixed", Some(r)) => {
            let r: usize = parse_num(r)?;
            if r == 0 || r > dim {
                return Err(Error::InvalidArgument(format!("rank {r} out of range for d={dim}")));
            }
            QuantumState::mixed(random_density_matrix(dim, r, &mut rng))
        }
        _ => Err(Error::UnknownLabel(format!(
            "state `{spec}` (expected zero, basis:K, ghz, mixed, haar, haar-mixed:R)"
        ))),
    }
}

/// Builds an observable from a name.
///
/// Names: `zsym`, `ghz`, `zall` (Z on every qubit), `proj[λ]` or `proj:λ`,
/// `projsym` (the symmetric-subspace projector Π^([n])),
/// `pauli:XYZ`, `majorana:1,2` and `identity`.
pub fn parse_observable(spec: &str, dim: usize) -> Result<Observable> {
    let qubits = || -> Result<usize> {
        if dim.is_power_of_two() && dim >= 2 {
            Ok(dim.trailing_zeros() as usize)
        } else {
            Err(Error::InvalidArgument(format!("observable `{spec}` needs a qubit register, got d={dim}")))
        }
    };
    if spec == "projsym" {
        let n = qubits()?;
        return observable_isotypic_projector(&Partition::new(vec![n])?, n);
    }
    if let Some(rest) = spec.strip_prefix("proj") {
        let shape = rest.trim_start_matches(':');
        let eta = Partition::parse(shape)?;
        return observable_isotypic_projector(&eta, qubits()?);
    }
    let (name, arg) = split_arg(spec);
    let o = match (name, arg) {
        ("zsym", None) => observable_zsym(qubits()?)?,
        ("ghz", None) => observable_ghz(qubits()?)?,
        ("zall", None) => {
            let n = qubits()?;
            let mut o = observable_pauli(&"Z".repeat(n))?;
            o.name = "zall".into();
            o
        }
        ("pauli", Some(s)) => {
            if s.len() != qubits()? {
                return Err(Error::InvalidArgument(format!("Pauli string `{s}` has wrong length for d={dim}")));
            }
            observable_pauli(s)?
        }
        ("majorana", Some(list)) => {
            let idx = list.split(',').map(|t| parse_num(t.trim())).collect::<Result<Vec<usize>>>()?;
            observable_majorana(&idx, qubits()?)?
        }
        ("identity", None) => Observable::new("identity", crate::linalg::identity(dim))?,
        _ => {
            return Err(Error::UnknownLabel(format!(
                "observable `{spec}` (expected zsym, ghz, zall, proj[λ], pauli:S, majorana:i,j, identity)"
            )))
        }
    };
    Ok(o)
}

fn split_arg(spec: &str) -> (&str, Option<&str>) {
    match spec.split_once(':') {
        Some((a, b)) => (a, Some(b)),
        None => (spec, None),
    }
}

fn parse_num<T: std::str::FromStr>(s: &str) -> Result<T> {
    s.parse().map_err(|_| Error::InvalidArgument(format!("expected a number, got `{s}`")))
}

/// One (protocol, observable, n) grid point of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub protocol: String,
    pub observable: String,
    pub n: usize,
    #[serde(rename = "N")]
    pub samples: usize,
    pub mean: f64,
    pub empirical_variance: f64,
    pub bound_l2: f64,
    pub bound_inf: f64,
    /// Exact single-shot variance when a closed form is available.
    pub exact: Option<f64>,
    /// Wall-clock seconds; left empty unless timing was requested.
    pub runtime: Option<f64>,
}

pub const SWEEP_COLUMNS: [&str; 10] =
    ["protocol", "observable", "n", "N", "mean", "empirical_variance", "bound_l2", "bound_inf", "exact", "runtime"];

pub fn write_sweep_csv<W: Write>(out: W, rows: &[SweepRow]) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    wtr.write_record(SWEEP_COLUMNS)?;
    for r in rows {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_sweep_csv<R: Read>(input: R) -> Result<Vec<SweepRow>> {
    let mut rdr = csv::Reader::from_reader(input);
    let headers = rdr.headers()?.clone();
    if headers.iter().ne(SWEEP_COLUMNS) {
        return Err(Error::Config(format!("unexpected sweep columns {headers:?}")));
    }
    rdr.deserialize().map(|r| r.map_err(Error::from)).collect()
}

/// Variance against n on a log scale, one line per (protocol, observable).
pub fn sweep_svg(rows: &[SweepRow]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 420.0;
    const L: f64 = 70.0;
    const R: f64 = 190.0;
    const T: f64 = 30.0;
    const B: f64 = 50.0;
    const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

    let mut series: Vec<((String, String), Vec<(f64, f64)>)> = Vec::new();
    for r in rows {
        if !(r.empirical_variance > 0.0) {
            continue;
        }
        let key = (r.protocol.clone(), r.observable.clone());
        let pt = (r.n as f64, r.empirical_variance.log10());
        match series.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(pt),
            None => series.push((key, vec![pt])),
        }
    }
    let pts = series.iter().flat_map(|(_, v)| v.iter().copied());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for (x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    y0 = y0.floor();
    y1 = y1.ceil().max(y0 + 1.0);
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    let sx = |x: f64| L + (x - x0) / (x1 - x0) * (W - L - R);
    let sy = |y: f64| H - B - (y - y0) / (y1 - y0) * (H - T - B);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<path d="M{L} {T} V{} H{}" fill="none" stroke="black"/>"#,
        H - B,
        W - R
    );
    let mut y = y0;
    while y <= y1 + 1e-9 {
        let py = sy(y);
        let _ = writeln!(s, r##"<line x1="{L}" x2="{}" y1="{py:.2}" y2="{py:.2}" stroke="#ddd"/>"##, W - R);
        let _ = writeln!(s, r#"<text x="{}" y="{:.2}" font-size="11" text-anchor="end">1e{y}</text>"#, L - 6.0, py + 4.0);
        y += 1.0;
    }
    for n in (x0.round() as i64)..=(x1.round() as i64) {
        let px = sx(n as f64);
        let _ = writeln!(s, r#"<text x="{px:.2}" y="{}" font-size="11" text-anchor="middle">{n}</text>"#, H - B + 16.0);
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">n</text>"#, (L + W - R) / 2.0, H - 12.0);
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" font-size="12" text-anchor="middle" transform="rotate(-90 16 {})">single-shot variance</text>"#,
        (T + H - B) / 2.0,
        (T + H - B) / 2.0
    );
    for (k, ((p, o), v)) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let path: Vec<String> = v.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, path.join(" "));
        for &(x, y) in v {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}"/>"#, sx(x), sy(y));
        }
        let ly = T + 14.0 + 16.0 * k as f64;
        let lx = W - R + 12.0;
        let _ = writeln!(s, r#"<line x1="{lx}" x2="{}" y1="{ly}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, lx + 18.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="11">{} / {}</text>"#, lx + 24.0, ly + 4.0, xml_escape(p), xml_escape(o));
    }
    s.push_str("</svg>\n");
    s
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// One line of the protocol summary table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableRow {
    pub group: String,
    pub hilbert: String,
    #[serde(rename = "H")]
    pub subgroup: String,
    pub protocol: String,
    pub size: String,
    /// None where the visible dimension has no closed form in n.
    pub dim_visible: Option<usize>,
    pub irreps: usize,
    pub multiplicity_free: bool,
}

/// Rows for every protocol with a centralizing channel, at one representative size.
pub fn table_rows() -> Result<Vec<TableRow>> {
    let rows: [(&str, &str, &str, ProtocolId, SizeParams, bool); 9] = [
        ("Cl(n)", "(C^2)^n", "Z_2^n", ProtocolId::GlobalClifford, SizeParams::qubits(3), true),
        ("Cl(1)^n", "(C^2)^n", "Z_2^n", ProtocolId::LocalClifford, SizeParams::qubits(3), true),
        ("SU(2)", "C^(2S+1)", "U(1)", ProtocolId::Su2Spin, SizeParams::dim(4), true),
        ("SU(2)", "(C^2)^n", "U(1)", ProtocolId::Su2Tensor, SizeParams::qubits(4), false),
        ("SO(2n)", "(C^2)^n", "Z_2^n", ProtocolId::Matchgate, SizeParams::qubits(3), true),
        ("O(d)", "C^d", "Z_2^d", ProtocolId::OrthogonalReal, SizeParams::dim(4), true),
        ("O(2d)", "C^d", "U(1)^d", ProtocolId::OrthogonalSplit, SizeParams::dim(4), true),
        ("SP(d)", "C^d", "U(1)^d", ProtocolId::Symplectic, SizeParams::dim(4), true),
        ("S_n", "C^n", "Z_n", ProtocolId::SnPermutation, SizeParams::qubits(5), true),
    ];
    rows.into_iter()
        .map(|(group, hilbert, sub, id, size, closed)| {
            let spec = crate::channel::analytic_channel_spec(id, &size)?;
            Ok(TableRow {
                group: group.into(),
                hilbert: hilbert.into(),
                subgroup: sub.into(),
                protocol: id.to_string(),
                size: size.tag(),
                dim_visible: closed.then(|| spec.visible_dim()),
                irreps: spec.irrep_types().len(),
                multiplicity_free: spec.is_multiplicity_free(),
            })
        })
        .collect()
}

pub fn write_table_csv<W: Write>(out: W, rows: &[TableRow]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    for r in rows {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn format_table(rows: &[TableRow]) -> String {
    let mut s = format!(
        "{:<14} {:<10} {:<18} {:<20} {:<10} {:>8} {:>4} {:>10}\n",
        "group", "H-space", "H", "protocol", "size", "dim L^V", "#λ", "mult-free"
    );
    for r in rows {
        let dim = r.dim_visible.map_or("n/a".to_string(), |v| v.to_string());
        let _ = writeln!(
            s,
            "{:<14} {:<10} {:<18} {:<20} {:<10} {:>8} {:>4} {:>10}",
            r.group,
            r.hilbert,
            r.subgroup,
            r.protocol,
            r.size,
            dim,
            r.irreps,
            if r.multiplicity_free { "yes" } else { "no" }
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_parses_flat_toml() {
        let c = ExperimentConfig::from_toml("protocol = \"pauli\"\nn = 2\nsnapshots = 100\ngroups = 5\nseed = 7\n").unwrap();
        assert_eq!(c.protocol_id().unwrap(), ProtocolId::Pauli);
        assert_eq!(c.size().unwrap(), SizeParams::qubits(2));
        c.validate().unwrap();
        let bad = ExperimentConfig::from_toml("protocol = \"pauli\"\nsnapshots = 3\ngroups = 4\n").unwrap();
        assert!(bad.validate().is_err());
        assert!(ExperimentConfig::from_toml("protocl = \"pauli\"").is_err());
    }

    #[test]
    fn state_families() {
        let s = parse_state("basis:3", 4, 0).unwrap();
        assert_eq!(s.density_matrix()[(3, 3)].re, 1.0);
        let a = parse_state("haar", 8, 5).unwrap().density_matrix();
        let b = parse_state("haar", 8, 5).unwrap().density_matrix();
        assert_eq!(a, b);
        assert!(parse_state("ghz", 6, 0).is_err());
        assert!(parse_state("nope", 4, 0).is_err());
        let m = parse_state("haar-mixed:2", 4, 1).unwrap().density_matrix();
        assert!((m.trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn observable_names() {
        assert_eq!(parse_observable("zall", 8).unwrap().matrix[(7, 7)].re, -1.0);
        assert_eq!(parse_observable("proj[2,1]", 8).unwrap().name, "proj[2,1]");
        assert_eq!(parse_observable("proj:2,1", 8).unwrap().name, "proj[2,1]");
        assert!(parse_observable("pauli:XZ", 8).is_err());
        assert!(parse_observable("zsym", 6).is_err());
        assert_eq!(parse_observable("majorana:1,2", 4).unwrap().name, "gamma1_2");
    }

    #[test]
    fn sweep_csv_round_trip() {
        let rows = vec![SweepRow {
            protocol: "su2-tensor".into(),
            observable: "zsym".into(),
            n: 4,
            samples: 100,
            mean: 0.25,
            empirical_variance: 3.5,
            bound_l2: 10.0,
            bound_inf: 12.0,
            exact: Some(3.25),
            runtime: None,
        }];
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("protocol,observable,n,N,mean,empirical_variance,bound_l2,bound_inf,exact,runtime\n"));
        assert_eq!(read_sweep_csv(&buf[..]).unwrap(), rows);
    }

    #[test]
    fn empty_sweep_has_header_only() {
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &[]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1);
        assert!(sweep_svg(&[]).ends_with("</svg>\n"));
    }

    #[test]
    fn table_columns() {
        let rows = table_rows().unwrap();
        let sp = rows.iter().find(|r| r.protocol == "symplectic").unwrap();
        assert_eq!((sp.dim_visible, sp.irreps, sp.multiplicity_free), (Some(16), 3, true));
        let su2 = rows.iter().find(|r| r.protocol == "su2-tensor").unwrap();
        assert_eq!((su2.irreps, su2.multiplicity_free), (5, false));
    }
}
