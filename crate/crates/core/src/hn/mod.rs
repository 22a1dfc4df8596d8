//! Harder–Narasimhan calculus for central charges on finite subobject lattices.

pub mod lattice;
pub mod rdw;
pub mod rees;

pub use lattice::{
    brute_force_max, check_containment, hn_filtration, in_pol, is_semistable, max_torsion, phase, validate_lattice,
    Charge, Containment, HnResult, PhaseKey, SubobjectLattice, Validation,
};
pub use rdw::{
    delete_step, mu_rdw, optimal_weights, parse_rdw_csv, pava_max, pol, polygon_leq, Deletion, Piece, Polygon,
    RdwEntry, Weighted,
};
pub use rees::{rees_module, rees_multigraded, Filtration, MultiReesReport, ReesReport};
