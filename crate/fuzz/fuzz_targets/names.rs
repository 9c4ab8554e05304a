#![no_main]

use libfuzzer_sys::fuzz_target;
use posetlab_core::{StabilityBound, Strategy};

fuzz_target!(|data: &str| {
    if let Ok(b) = data.parse::<StabilityBound>() {
        assert_eq!(b.name().parse::<StabilityBound>().ok(), Some(b));
    }
    if let Ok(s) = data.parse::<Strategy>() {
        assert_eq!(s.to_string().parse::<Strategy>().ok(), Some(s));
    }
});
