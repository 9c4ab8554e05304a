#![no_main]

use libfuzzer_sys::fuzz_target;
use posetlab_core::SetFamily;

fuzz_target!(|data: &str| {
    if let Ok(fam) = SetFamily::from_json_str(data) {
        let again = SetFamily::from_json_str(&fam.to_json_string()).expect("own output parses");
        assert_eq!(again, fam);
        if fam.len() <= 64 {
            let _ = posetlab_core::count_butterflies(&fam);
        }
    }
});
