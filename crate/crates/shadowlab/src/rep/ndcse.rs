//! Eigenbasis checks for abelian subgroups and H-invariant dimensions.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use crate::bases::MeasurementBasis;
use crate::error::{Error, Result};
use crate::linalg::{frobenius, identity, ComplexMatrix, RandomStream, C64};

#[derive(Clone, Debug)]
pub struct NdcseReport {
    pub is_fb: bool,
    pub is_cse: bool,
    pub is_nondegenerate: bool,
    /// characters[w][h] = ⟨w|h|w⟩
    pub characters: Vec<Vec<C64>>,
}

impl NdcseReport {
    pub fn is_ndcse(&self) -> bool {
        self.is_fb && self.is_cse && self.is_nondegenerate
    }
}

/// Checks whether `basis` is a non-degenerate eigenbasis of the abelian `subgroup`.
/// `generators`, when given, are used to check that each vector stays in its block.
pub fn check_ndcse(
    basis: &MeasurementBasis,
    subgroup: &[ComplexMatrix],
    generators: Option<&[ComplexMatrix]>,
) -> Result<NdcseReport> {
    let d = basis.dim();
    let gram = basis.vectors.adjoint() * &basis.vectors;
    let dev = frobenius(&(gram - identity(d)));
    if dev > 1e-9 {
        return Err(Error::NotOrthonormal(dev));
    }
    for (a, h) in subgroup.iter().enumerate() {
        if h.shape() != (d, d) {
            return Err(Error::Shape(format!("subgroup element {:?} vs basis dim {d}", h.shape())));
        }
        for k in subgroup.iter().skip(a + 1) {
            let comm = frobenius(&(h * k - k * h));
            if comm > 1e-10 {
                return Err(Error::NonCommuting(comm));
            }
        }
    }

    let blocks = basis.blocks();
    let is_fb = match generators {
        None => true,
        Some(gens) => gens.iter().all(|g| {
            blocks.iter().all(|(_, idx)| {
                let cols = ComplexMatrix::from_fn(d, idx.len(), |r, k| basis.vectors[(r, idx[k])]);
                let proj = &cols * cols.adjoint();
                idx.iter().all(|&w| {
                    let v = g * basis.vectors.column(w);
                    (&v - &proj * &v).norm() <= 1e-9
                })
            })
        }),
    };

    let mut characters = vec![vec![C64::new(0.0, 0.0); subgroup.len()]; d];
    let mut is_cse = true;
    for w in 0..d {
        let v = basis.vectors.column(w).into_owned();
        for (k, h) in subgroup.iter().enumerate() {
            let hv = h * &v;
            let chi = v.dotc(&hv);
            characters[w][k] = chi;
            if (hv - &v * chi).norm() > 1e-9 {
                is_cse = false;
            }
        }
    }

    let is_nondegenerate = blocks.iter().all(|(_, idx)| {
        idx.iter().enumerate().all(|(a, &w)| {
            idx.iter().skip(a + 1).all(|&u| {
                let dist: f64 = characters[w].iter().zip(&characters[u]).map(|(x, y)| (x - y).norm()).sum();
                dist > 1e-6
            })
        })
    });

    Ok(NdcseReport { is_fb, is_cse, is_nondegenerate, characters })
}

pub type CharacterFn = Arc<dyn Fn(&[f64]) -> C64 + Send + Sync>;

/// An irrep with its dimension and, optionally, a character on subgroup parameters.
#[derive(Clone)]
pub struct IrrepSpec {
    pub label: String,
    pub dim: usize,
    pub character: Option<CharacterFn>,
    pub h_invariant_dim: Option<usize>,
}

impl fmt::Debug for IrrepSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IrrepSpec")
            .field("label", &self.label)
            .field("dim", &self.dim)
            .field("has_character", &self.character.is_some())
            .field("h_invariant_dim", &self.h_invariant_dim)
            .finish()
    }
}

impl IrrepSpec {
    pub fn new(label: impl Into<String>, dim: usize, character: Option<CharacterFn>) -> Self {
        assert!(dim >= 1, "irrep dimension must be positive");
        Self { label: label.into(), dim, character, h_invariant_dim: None }
    }

    pub fn trivial() -> Self {
        Self::new("trivial", 1, Some(Arc::new(|_: &[f64]| C64::new(1.0, 0.0))))
    }
}

/// Subgroup over which characters are averaged. Torus angles live in [0, 2π).
#[derive(Clone, Debug)]
pub enum SubgroupSpec {
    Trivial,
    Finite(Vec<Vec<f64>>),
    Torus { rank: usize },
}

const NODES_PER_CIRCLE: usize = 64;
const MAX_GRID: usize = 1 << 24;
const MC_SAMPLES: usize = 1 << 18;

/// Rounds E_h χ(h) to the nearest integer, failing if the residual exceeds 0.1.
pub fn h_invariant_dimension(irrep: &IrrepSpec, subgroup: &SubgroupSpec, exact: bool) -> Result<usize> {
    let chi = match (&irrep.character, subgroup) {
        (_, SubgroupSpec::Trivial) => return Ok(irrep.dim),
        (Some(chi), _) => chi.clone(),
        (None, _) => return Err(Error::InvalidArgument(format!("no character for {}", irrep.label))),
    };
    let avg = match subgroup {
        SubgroupSpec::Trivial => unreachable!(),
        SubgroupSpec::Finite(elems) => {
            if elems.is_empty() {
                return Err(Error::InvalidArgument("empty subgroup".into()));
            }
            elems.iter().map(|h| chi(h)).sum::<C64>() / elems.len() as f64
        }
        SubgroupSpec::Torus { rank } => {
            let grid = NODES_PER_CIRCLE.checked_pow(*rank as u32).filter(|&g| g <= MAX_GRID);
            match grid {
                Some(total) if exact || total <= MC_SAMPLES => {
                    let mut sum = C64::new(0.0, 0.0);
                    let mut angles = vec![0.0; *rank];
                    for idx in 0..total {
                        let mut r = idx;
                        for a in angles.iter_mut() {
                            *a = TAU * (r % NODES_PER_CIRCLE) as f64 / NODES_PER_CIRCLE as f64;
                            r /= NODES_PER_CIRCLE;
                        }
                        sum += chi(&angles);
                    }
                    sum / total as f64
                }
                _ if exact => {
                    return Err(Error::InvalidArgument(format!("quadrature grid for rank {rank} is too large")))
                }
                _ => {
                    let mut rng = RandomStream::new(0x5eed, *rank as u64);
                    let mut sum = C64::new(0.0, 0.0);
                    let mut angles = vec![0.0; *rank];
                    for _ in 0..MC_SAMPLES {
                        for a in angles.iter_mut() {
                            *a = TAU * rng.uniform();
                        }
                        sum += chi(&angles);
                    }
                    sum / MC_SAMPLES as f64
                }
            }
        }
    };
    let rounded = avg.re.round();
    if (avg.re - rounded).abs() > 0.1 || avg.im.abs() > 0.1 || rounded < 0.0 {
        return Err(Error::Residual { value: avg.re });
    }
    Ok(rounded as usize)
}
