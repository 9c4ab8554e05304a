#![no_main]

use libfuzzer_sys::fuzz_target;
use posetlab_core::Poset;

fuzz_target!(|data: &str| {
    if let Ok(p) = Poset::from_json_str(data) {
        let back = Poset::from_json(&p.to_json()).expect("closed relation reparses");
        assert_eq!(back.relations(), p.relations());
    }
});
