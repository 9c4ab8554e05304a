//! `--poset` argument strings: `butterfly`, `chain:K`, `vee`, `wedge`.

#![no_main]

use libfuzzer_sys::fuzz_target;
use posetlab_core::{Poset, PosetSpec};

fuzz_target!(|data: &str| {
    if let Ok(spec) = data.parse::<PosetSpec>() {
        let _ = Poset::make(&spec);
    }
});
