//! Causal orders and spaces of input histories: finite preorders on events,
//! partial input assignments closed under compatible joins, causal functions
//! and their inseparability witnesses, open covers of the lowerset topology,
//! and exact-rational empirical models with LP-based contextuality measures.
//!
//! Everything is exact: probabilities are arbitrary-precision rationals and
//! the noncontextual-fraction LP runs a rational simplex, so equality tests
//! in the test suite are bit-exact rather than tolerance-based.

pub mod catalog;
pub mod cover;
pub mod func;
pub mod history;
pub mod order;
pub mod space;

pub use cover::{
    classical_cover, cover_hierarchy, enumerate_covers, enumerate_lowersets,
    enumerate_solipsistic_witnesses, find_solipsistic_witness, glue_compatible_family, is_lowerset,
    is_sheaf, is_union_prime, lowerset_to_json, refines, restrict_family_to_cover,
    solipsistic_cover, standard_cover, validate_solipsistic_witness, Cover, CoverError,
    CoverHierarchy, SolipsisticWitness,
};
pub use func::{
    arises_from_completion, compose_conditional, compose_parallel, compose_sequential,
    count_causal_functions, count_separable, enumerate_causal_functions, factor_conditional,
    factor_parallel, factor_sequential, find_inseparability_witness, from_joint_io, is_separable,
    joint_io_is_causal, separable_keys, validate_witness, CausalFunction, ExtendedFunction,
    FuncError, InseparabilityWitness,
};
pub use history::{Arity, History, HistoryError, InputFamily, OutputFamily, UNDEF};
pub use order::{enumerate_orders, CausalOrder, EventSet, LowersetLattice, OrderError, PairClass};
pub use space::{ext_closure, ClassEntry, Classes, HistorySpace, SpaceError, SpaceReport};
