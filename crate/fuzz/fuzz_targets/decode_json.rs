#![no_main]

use besicovitch::{DigitSystem, RationalParam};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(r) = serde_json::from_slice::<RationalParam>(data) {
        let json = serde_json::to_string(&r).unwrap();
        assert_eq!(serde_json::from_str::<RationalParam>(&json).unwrap(), r);
    }
    if let Ok(sys) = serde_json::from_slice::<DigitSystem>(data) {
        let json = serde_json::to_string(&sys).unwrap();
        assert_eq!(serde_json::from_str::<DigitSystem>(&json).unwrap(), sys);
    }
});
