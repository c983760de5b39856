#![no_main]

use besicovitch::pgm;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(img) = pgm::decode(data) {
        assert_eq!(img.pixels.len() as u64, img.width as u64 * img.height as u64);
        assert!(img.pixels.iter().all(|&v| v <= img.maxval));
    }
});
