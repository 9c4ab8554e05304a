#![no_main]

use libfuzzer_sys::fuzz_target;
use posetlab_core::Checkpoint;

fuzz_target!(|data: &str| {
    if let Ok(cp) = Checkpoint::from_json_str(data) {
        assert!(cp.rank_start <= cp.rank_end);
        assert_eq!(Checkpoint::from_json_str(&cp.to_json_string()).ok(), Some(cp));
    }
});
