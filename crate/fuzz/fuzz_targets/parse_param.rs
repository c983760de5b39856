#![no_main]

use besicovitch::{Fraction, Param};
use libfuzzer_sys::fuzz_target;

// First byte selects the decimal mode, the rest is the text.
fuzz_target!(|data: &[u8]| {
    let Some((&mode, rest)) = data.split_first() else {
        return;
    };
    let Ok(s) = std::str::from_utf8(rest) else { return };
    if let Ok(Param::Rational(f)) = Param::parse(s, mode & 1 == 1) {
        assert_eq!(Fraction::parse(&f.to_string()).unwrap(), f);
    }
});
