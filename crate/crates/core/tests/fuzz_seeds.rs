//! Replays the checked-in fuzz corpus through the parser and decoder entry
//! points on the stable toolchain.

use std::fs;
use std::path::PathBuf;

use besicovitch::{pgm, DigitSystem, Fraction, Param, RationalParam};

fn seeds(target: &str) -> Vec<(String, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let p = e.unwrap().path();
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn parse_param_seeds() {
    let mut ok = 0;
    for (name, data) in seeds("parse_param") {
        let (&mode, rest) = data.split_first().unwrap();
        let s = std::str::from_utf8(rest).unwrap();
        match Param::parse(s, mode & 1 == 1) {
            Ok(Param::Rational(f)) => {
                assert_eq!(Fraction::parse(&f.to_string()).unwrap(), f, "{name}");
                ok += 1;
            }
            Ok(_) => ok += 1,
            Err(_) => {}
        }
    }
    assert!(ok >= 3);
    let bad = seeds("parse_param")
        .into_iter()
        .find(|(n, _)| n == "zero_den")
        .unwrap()
        .1;
    assert!(Param::parse(std::str::from_utf8(&bad[1..]).unwrap(), false).is_err());
}

#[test]
fn parse_system_seeds() {
    for (name, data) in seeds("parse_system") {
        let s = std::str::from_utf8(&data).unwrap();
        let parsed = DigitSystem::parse(s);
        assert_eq!(
            parsed.is_err(),
            matches!(name.as_str(), "composite" | "too_large"),
            "{name}"
        );
        if let Ok(sys) = parsed {
            let json = serde_json::to_string(&sys).unwrap();
            assert_eq!(serde_json::from_str::<DigitSystem>(&json).unwrap(), sys);
        }
    }
}

#[test]
fn decode_json_seeds() {
    for (name, data) in seeds("decode_json") {
        if name.starts_with("rational") {
            let r: RationalParam = serde_json::from_slice(&data).unwrap();
            assert_eq!(serde_json::to_vec(&r).unwrap(), data, "{name}");
        } else {
            let sys: DigitSystem = serde_json::from_slice(&data).unwrap();
            assert_eq!(serde_json::to_vec(&sys).unwrap(), data, "{name}");
        }
    }
}

#[test]
fn decode_pgm_seeds() {
    for (name, data) in seeds("decode_pgm") {
        let decoded = pgm::decode(&data);
        assert_eq!(
            decoded.is_ok(),
            name == "raster16.pgm" || name == "sixteen_bit.pgm",
            "{name}"
        );
        if let Ok(img) = decoded {
            assert_eq!(img.pixels.len() as u64, img.width as u64 * img.height as u64);
            assert!(img.pixels.iter().all(|&v| v <= img.maxval));
        }
    }
}
