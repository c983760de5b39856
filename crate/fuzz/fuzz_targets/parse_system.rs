#![no_main]

use besicovitch::DigitSystem;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(sys) = DigitSystem::parse(s) {
        let json = serde_json::to_string(&sys).unwrap();
        assert_eq!(serde_json::from_str::<DigitSystem>(&json).unwrap(), sys);
    }
});
