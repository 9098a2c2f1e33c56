//! Representation-theoretic primitives.

pub mod cg;
pub mod ndcse;
pub mod young;

pub use cg::{clebsch_gordan, su2_generators, su2_generators_ascending};
pub use ndcse::{check_ndcse, h_invariant_dimension, IrrepSpec, NdcseReport, SubgroupSpec};
pub use young::{
    adjacent_word, all_permutations, hook_length_dim, permutation_matrix, sn_irrep_matrix, standard_tableaux,
    Partition, StandardTableau, YoungRep,
};
