//! Binary PGM (`P5`) encoding of raster images, and a strict decoder.
//!
//! Occupied pixels are white (255). The first image row is the top of `B`
//! (height `h = 1`).

use crate::error::{Error, Result};
use crate::geometry::RasterImage;

/// Decoded images larger than this many pixels are rejected.
pub const MAX_PIXELS: u64 = 1 << 28;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pgm {
    pub width: u32,
    pub height: u32,
    pub maxval: u16,
    /// Row-major samples, top row first.
    pub pixels: Vec<u16>,
}

pub fn encode(image: &RasterImage) -> Vec<u8> {
    let header = format!("P5\n{} {}\n255\n", image.width, image.height);
    let mut out = Vec::with_capacity(header.len() + image.width as usize * image.height as usize);
    out.extend_from_slice(header.as_bytes());
    for row in (0..image.height).rev() {
        out.extend((0..image.width).map(|c| if image.get(c, row) { 255u8 } else { 0 }));
    }
    out
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&c) = self.data.get(self.pos) {
            if c == b'#' {
                while self.data.get(self.pos).is_some_and(|&c| c != b'\n') {
                    self.pos += 1;
                }
            } else if c.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<u64> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.data.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        let digits = &self.data[start..self.pos];
        if digits.is_empty() || digits.len() > 10 {
            return Err(bad(&format!("missing or oversized {what}")));
        }
        // ascii digits only, at most 10 of them
        Ok(std::str::from_utf8(digits)
            .expect("ascii")
            .parse()
            .expect("fits in u64"))
    }
}

fn bad(reason: &str) -> Error {
    Error::parse("PGM", "<binary>", reason)
}

pub fn decode(data: &[u8]) -> Result<Pgm> {
    if !data.starts_with(b"P5") {
        return Err(bad("missing P5 magic"));
    }
    let mut cur = Cursor { data, pos: 2 };
    if !cur.data.get(2).is_some_and(|c| c.is_ascii_whitespace() || *c == b'#') {
        return Err(bad("magic must be followed by whitespace"));
    }
    let width = cur.number("width")?;
    let height = cur.number("height")?;
    let maxval = cur.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(bad("empty image"));
    }
    if width > u32::MAX as u64 || height > u32::MAX as u64 || width * height > MAX_PIXELS {
        return Err(bad("image too large"));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(bad("maxval must be in 1..=65535"));
    }
    if !cur.data.get(cur.pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(bad("header must end with a single whitespace byte"));
    }
    let body = &data[cur.pos + 1..];
    let n = (width * height) as usize;
    let wide = maxval > 255;
    let need = if wide { 2 * n } else { n };
    if body.len() != need {
        return Err(bad(&format!("expected {need} sample bytes, found {}", body.len())));
    }
    let pixels: Vec<u16> = if wide {
        body.chunks_exact(2).map(|b| u16::from_be_bytes([b[0], b[1]])).collect()
    } else {
        body.iter().map(|&b| b as u16).collect()
    };
    if pixels.iter().any(|&p| p as u64 > maxval) {
        return Err(bad("sample exceeds maxval"));
    }
    Ok(Pgm {
        width: width as u32,
        height: height as u32,
        maxval: maxval as u16,
        pixels,
    })
}

impl Pgm {
    /// Fraction of samples above half of `maxval`.
    pub fn occupied_fraction(&self) -> f64 {
        let half = self.maxval / 2;
        self.pixels.iter().filter(|&&p| p > half).count() as f64 / self.pixels.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digits::DigitSystem;
    use crate::geometry::raster_b;
    use crate::limits::Limits;

    #[test]
    fn round_trip() {
        let img = raster_b(&DigitSystem::base4(), 32, None, &Limits::default()).unwrap();
        let bytes = encode(&img);
        assert!(bytes.starts_with(b"P5\n32 32\n255\n"));
        let pgm = decode(&bytes).unwrap();
        assert_eq!((pgm.width, pgm.height, pgm.maxval), (32, 32, 255));
        assert_eq!(pgm.occupied_fraction(), img.occupied_fraction);
        // first encoded row is the top of the set
        for c in 0..32 {
            assert_eq!(pgm.pixels[c as usize] == 255, img.get(c, 31));
        }
    }

    #[test]
    fn comments_and_wide_samples() {
        let mut data = b"P5 # comment\n2 1\n# another\n1000\n".to_vec();
        data.extend_from_slice(&[0x03, 0xe8, 0x00, 0x01]);
        let pgm = decode(&data).unwrap();
        assert_eq!(pgm.pixels, vec![1000, 1]);
    }

    #[test]
    fn rejects_malformed() {
        for data in [
            &b"P6\n1 1\n255\n\x00"[..],
            b"P5\n1 1\n255\n",
            b"P5\n1 1\n255\n\x00\x00",
            b"P5\n0 1\n255\n",
            b"P5\n1 1\n0\n\x00",
            b"P5\n1 1\n10\n\x0b",
            b"P5\n99999999999 1\n255\n",
            b"P51 1 255 \x00",
            b"P5\n1 1\n255",
        ] {
            assert!(decode(data).is_err(), "{data:?}");
        }
    }
}
