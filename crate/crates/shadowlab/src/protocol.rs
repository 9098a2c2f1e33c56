//! Protocol registry: ensemble, measurement basis and analytic channel for each id.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bases::{
    bell_pair_basis, computational_basis, cyclic_fourier_basis, schur_basis, split_orthogonal_weight_basis,
    MeasurementBasis,
};
use crate::channel::spec::{analytic_channel_spec, ChannelSpec};
use crate::ensembles::{
    global_clifford_ensemble, global_haar_ensemble, local_clifford_ensemble, matchgate_ensemble,
    orthogonal_ensemble, particle_preserving_ensemble, pauli_group_ensemble, sn_irrep_ensemble,
    su2_spin_ensemble, su2_tensor_ensemble, symmetric_group_ensemble, symplectic_ensemble, FormKind,
    GroupEnsemble, MAX_GLOBAL_CLIFFORD,
};
use crate::error::{Error, Result};
use crate::rep::young::Partition;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProtocolId {
    GlobalHaar,
    GlobalClifford,
    LocalClifford,
    LocalCliffordBell,
    Pauli,
    Matchgate,
    ParticlePreserving,
    Su2Spin,
    Su2Tensor,
    OrthogonalReal,
    OrthogonalSplit,
    Symplectic,
    SnPermutation,
    SnGt,
}

impl ProtocolId {
    pub const ALL: [ProtocolId; 14] = [
        ProtocolId::GlobalHaar,
        ProtocolId::GlobalClifford,
        ProtocolId::LocalClifford,
        ProtocolId::LocalCliffordBell,
        ProtocolId::Pauli,
        ProtocolId::Matchgate,
        ProtocolId::ParticlePreserving,
        ProtocolId::Su2Spin,
        ProtocolId::Su2Tensor,
        ProtocolId::OrthogonalReal,
        ProtocolId::OrthogonalSplit,
        ProtocolId::Symplectic,
        ProtocolId::SnPermutation,
        ProtocolId::SnGt,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ProtocolId::GlobalHaar => "global-haar",
            ProtocolId::GlobalClifford => "global-clifford",
            ProtocolId::LocalClifford => "local-clifford",
            ProtocolId::LocalCliffordBell => "local-clifford-bell",
            ProtocolId::Pauli => "pauli",
            ProtocolId::Matchgate => "matchgate",
            ProtocolId::ParticlePreserving => "particle-preserving",
            ProtocolId::Su2Spin => "su2-spin",
            ProtocolId::Su2Tensor => "su2-tensor",
            ProtocolId::OrthogonalReal => "orthogonal-real",
            ProtocolId::OrthogonalSplit => "orthogonal-split",
            ProtocolId::Symplectic => "symplectic",
            ProtocolId::SnPermutation => "sn-permutation",
            ProtocolId::SnGt => "sn-gt",
        }
    }

    /// Qubit protocols are sized by `n`; the rest by `d` (or λ for sn-gt).
    pub fn sized_by_qubits(&self) -> bool {
        matches!(
            self,
            ProtocolId::GlobalClifford
                | ProtocolId::LocalClifford
                | ProtocolId::LocalCliffordBell
                | ProtocolId::Pauli
                | ProtocolId::Matchgate
                | ProtocolId::ParticlePreserving
                | ProtocolId::Su2Tensor
        )
    }
}

impl fmt::Display for ProtocolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProtocolId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ProtocolId::ALL
            .iter()
            .copied()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::UnknownLabel(format!("protocol {s}")))
    }
}

/// Size parameters. `n` counts qubits, fermionic modes or permuted points; `d` is a
/// Hilbert-space dimension (2J + 1 for su2-spin); `lambda` selects an S_n irrep.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SizeParams {
    pub n: Option<usize>,
    pub d: Option<usize>,
    pub lambda: Option<Partition>,
}

impl SizeParams {
    pub fn qubits(n: usize) -> Self {
        Self { n: Some(n), ..Self::default() }
    }

    pub fn dim(d: usize) -> Self {
        Self { d: Some(d), ..Self::default() }
    }

    pub fn shape(lambda: Partition) -> Self {
        Self { lambda: Some(lambda), ..Self::default() }
    }

    pub fn need_n(&self, id: ProtocolId) -> Result<usize> {
        self.n.ok_or_else(|| Error::InvalidArgument(format!("{id} needs --n")))
    }

    pub fn need_d(&self, id: ProtocolId) -> Result<usize> {
        self.d.ok_or_else(|| Error::InvalidArgument(format!("{id} needs --d")))
    }

    /// Hilbert-space dimension for `id`; global-haar accepts either d or n qubits.
    pub fn hilbert_dim(&self, id: ProtocolId) -> Result<usize> {
        match id {
            ProtocolId::GlobalHaar => match (self.d, self.n) {
                (Some(d), _) => Ok(d),
                (None, Some(n)) => Ok(1 << n),
                _ => Err(Error::InvalidArgument("global-haar needs --d or --n".into())),
            },
            ProtocolId::SnPermutation => self.need_n(id),
            ProtocolId::SnGt => {
                let l = self.lambda.as_ref().ok_or_else(|| Error::InvalidArgument("sn-gt needs --lambda".into()))?;
                Ok(crate::rep::young::hook_length_dim(l) as usize)
            }
            _ if id.sized_by_qubits() => Ok(1 << self.need_n(id)?),
            _ => self.need_d(id),
        }
    }

    /// Short human tag such as `n=3` or `d=8`.
    pub fn tag(&self) -> String {
        let mut parts = Vec::new();
        if let Some(n) = self.n {
            parts.push(format!("n={n}"));
        }
        if let Some(d) = self.d {
            parts.push(format!("d={d}"));
        }
        if let Some(l) = &self.lambda {
            parts.push(format!("lambda={l}"));
        }
        parts.join(",")
    }
}

/// Everything needed to run a shadow protocol.
#[derive(Clone, Debug)]
pub struct Protocol {
    pub id: ProtocolId,
    pub size: SizeParams,
    pub ensemble: GroupEnsemble,
    pub basis: MeasurementBasis,
    pub spec: Option<Arc<ChannelSpec>>,
}

impl Protocol {
    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn spec(&self) -> Result<&ChannelSpec> {
        self.spec
            .as_deref()
            .ok_or_else(|| Error::Unsupported(format!("{} has no centralizing channel decomposition", self.id)))
    }

    /// Number of qubits when the Hilbert space is 2^n.
    pub fn qubits(&self) -> Option<usize> {
        let d = self.dim();
        d.is_power_of_two().then(|| d.trailing_zeros() as usize)
    }
}

pub fn build_protocol(id: ProtocolId, size: &SizeParams) -> Result<Protocol> {
    let (ensemble, basis) = match id {
        ProtocolId::GlobalHaar => {
            let d = size.hilbert_dim(id)?;
            let basis = match size.n {
                Some(n) if size.d.is_none() => computational_basis(n),
                _ => MeasurementBasis::standard(d, "full", |k| k.to_string()),
            };
            (global_haar_ensemble(d), basis)
        }
        ProtocolId::GlobalClifford => {
            let n = size.need_n(id)?;
            // The Clifford group is a unitary 3-design, so Haar U(2^n) has the same channel
            // and estimator variances; small n keep the exact group for enumeration.
            let e = if n <= MAX_GLOBAL_CLIFFORD { global_clifford_ensemble(n)? } else { global_haar_ensemble(1 << n) };
            (e, computational_basis(n))
        }
        ProtocolId::LocalClifford => {
            let n = size.need_n(id)?;
            (local_clifford_ensemble(n)?, computational_basis(n))
        }
        ProtocolId::LocalCliffordBell => {
            let n = size.need_n(id)?;
            (local_clifford_ensemble(n)?, bell_pair_basis(n)?)
        }
        ProtocolId::Pauli => {
            let n = size.need_n(id)?;
            (pauli_group_ensemble(n)?, computational_basis(n))
        }
        ProtocolId::Matchgate => {
            let n = size.need_n(id)?;
            (matchgate_ensemble(n)?, computational_basis(n))
        }
        ProtocolId::ParticlePreserving => {
            let n = size.need_n(id)?;
            (particle_preserving_ensemble(n)?, computational_basis(n))
        }
        ProtocolId::Su2Spin => {
            let d = size.need_d(id)?;
            if d == 0 {
                return Err(Error::InvalidSpin("dimension 0".into()));
            }
            let two_j = d as i64 - 1;
            let basis = MeasurementBasis::standard(d, "spin", |k| {
                format!("m={}", crate::bases::half_str(two_j - 2 * k as i64))
            });
            (su2_spin_ensemble(two_j)?, basis)
        }
        ProtocolId::Su2Tensor => {
            let n = size.need_n(id)?;
            let (t, labels) = schur_basis(n)?;
            (su2_tensor_ensemble(n)?, MeasurementBasis::from_schur(t, &labels))
        }
        ProtocolId::OrthogonalReal => {
            let d = size.need_d(id)?;
            (orthogonal_ensemble(d, FormKind::Identity)?, MeasurementBasis::standard(d, "V", |k| k.to_string()))
        }
        ProtocolId::OrthogonalSplit => {
            let d = size.need_d(id)?;
            (orthogonal_ensemble(d, FormKind::SplitOrthogonal)?, split_orthogonal_weight_basis(d)?)
        }
        ProtocolId::Symplectic => {
            let d = size.need_d(id)?;
            let h = d / 2;
            let basis = MeasurementBasis::standard(d, "V", |k| {
                if k < h {
                    format!("L{}", k + 1)
                } else {
                    format!("-L{}", k - h + 1)
                }
            });
            (symplectic_ensemble(d)?, basis)
        }
        ProtocolId::SnPermutation => {
            let n = size.need_n(id)?;
            (symmetric_group_ensemble(n)?, cyclic_fourier_basis(n)?)
        }
        ProtocolId::SnGt => {
            let l = size.lambda.clone().ok_or_else(|| Error::InvalidArgument("sn-gt needs --lambda".into()))?;
            let e = sn_irrep_ensemble(&l)?;
            let label = l.to_string();
            let basis = MeasurementBasis::standard(e.dim, &label, |k| format!("T{}", k + 1));
            (e, basis)
        }
    };
    let spec = match id {
        ProtocolId::SnGt => None,
        _ => Some(Arc::new(analytic_channel_spec(id, size)?)),
    };
    Ok(Protocol { id, size: size.clone(), ensemble, basis, spec })
}
