//! Set families in the Boolean lattice `2^[n]` and the counting, extremal,
//! and bound-checking tools for forbidden-subposet supersaturation.
//!
//! Sets are `u64` bitmasks (element `i` at bit `i - 1`, `n <= 63`). Families
//! are kept in canonical order: ascending size, then colex.

pub mod bits;
pub mod bounds;
pub mod error;
pub mod extremal;
pub mod family;
pub mod isoperimetry;
pub mod oracle;
pub mod poset;
pub mod random;
pub mod rational;
pub mod report;

pub use bits::{mask_of, Mask};
pub use bounds::{
    g_of, g_of_ratio_form, gen_binom, lovasz_shadow_lb, prop_change_report, stability_rhs, x_of,
    StabilityBound,
};
pub use error::{Error, Result};
pub use extremal::{build_construction, sigma, sigma_star, CodeLayer, Strategy};
pub use family::{FamilyJson, SetFamily};
pub use isoperimetry::{
    bad_superset_census, edges_via_rank, hamming_edges, harper_vector, is_downset_encoding,
    isoperi_check, union_lower_bound, CensusMode, CensusReport, HarperVector,
};
pub use oracle::{
    audit_prop1, max_p_free, min_copies, Checkpoint, MinCopiesOptions, SearchOptions, Witness,
};
pub use poset::{
    contains_poset, count_butterflies, count_butterflies_with_pivot, count_chains, count_copies,
    count_copies_fast, count_copies_with_pivot, count_injections, creates_butterfly,
    improved_lym_sum, middle_sets, CopyCount, Poset, PosetSpec,
};
pub use rational::ExactRational;
pub use report::{BoundReport, Verdict};
