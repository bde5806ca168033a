//! Dense row-major image grids and binary PGM (P5) I/O.
//!
//! Depth images are `Grid<f64>` in millimeters with 0 marking no-hit;
//! masks are `Grid<u8>` with values in {0,1}. Debug dumps use binary PGM:
//! 8-bit for masks/gray images, 16-bit big-endian for depth where the
//! pixel value is the depth rounded to whole millimeters.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

impl<T: Copy + Default> Grid<T> {
    pub fn new(width: usize, height: usize) -> Self {
        Self { width, height, data: vec![T::default(); width * height] }
    }

    pub fn filled(width: usize, height: usize, value: T) -> Self {
        Self { width, height, data: vec![value; width * height] }
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::ShapeMismatch(format!(
                "grid data length {} does not match {}x{}",
                data.len(),
                width,
                height
            )));
        }
        Ok(Self { width, height, data })
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> T {
        debug_assert!(x < self.width && y < self.height);
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: T) {
        debug_assert!(x < self.width && y < self.height);
        self.data[y * self.width + x] = value;
    }

    pub fn fill(&mut self, value: T) {
        self.data.fill(value);
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn same_shape<U>(&self, other: &Grid<U>) -> bool {
        self.width == other.width && self.height == other.height
    }

    /// (x, y, value) over all pixels, row-major.
    pub fn enumerate(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        let w = self.width;
        self.data.iter().enumerate().map(move |(i, &v)| (i % w, i / w, v))
    }
}

pub type DepthImage = Grid<f64>;
pub type MaskImage = Grid<u8>;
pub type GrayImage = Grid<u8>;

/// Depth in millimeters quantized to a 16-bit grid (1 mm per level).
pub fn depth_to_u16(depth: &DepthImage) -> Grid<u16> {
    let data = depth
        .data()
        .iter()
        .map(|&d| d.round().clamp(0.0, u16::MAX as f64) as u16)
        .collect();
    Grid { width: depth.width(), height: depth.height(), data }
}

fn write_header(out: &mut impl Write, width: usize, height: usize, maxval: u32) -> Result<()> {
    write!(out, "P5\n{} {}\n{}\n", width, height, maxval)?;
    Ok(())
}

pub fn write_pgm8(path: &Path, img: &Grid<u8>) -> Result<()> {
    let mut out = Vec::with_capacity(img.data().len() + 32);
    write_header(&mut out, img.width(), img.height(), 255)?;
    out.extend_from_slice(img.data());
    std::fs::write(path, out)?;
    Ok(())
}

pub fn write_pgm16(path: &Path, img: &Grid<u16>) -> Result<()> {
    let mut out = Vec::with_capacity(img.data().len() * 2 + 32);
    write_header(&mut out, img.width(), img.height(), 65535)?;
    for &v in img.data() {
        out.extend_from_slice(&v.to_be_bytes());
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// 8-bit or 16-bit binary PGM, decided by the header's maxval.
pub enum Pgm {
    U8(Grid<u8>),
    U16(Grid<u16>),
}

fn read_token(reader: &mut impl BufRead) -> Result<String> {
    let mut token = String::new();
    loop {
        let mut byte = [0u8; 1];
        if reader.read(&mut byte)? == 0 {
            if token.is_empty() {
                return Err(Error::Validation("truncated PGM header".into()));
            }
            return Ok(token);
        }
        let c = byte[0] as char;
        if c == '#' {
            let mut comment = String::new();
            reader.read_line(&mut comment)?;
            continue;
        }
        if c.is_ascii_whitespace() {
            if token.is_empty() {
                continue;
            }
            return Ok(token);
        }
        token.push(c);
    }
}

pub fn read_pgm(path: &Path) -> Result<Pgm> {
    let file = std::fs::File::open(path)?;
    let mut reader = BufReader::new(file);
    let magic = read_token(&mut reader)?;
    if magic != "P5" {
        return Err(Error::Validation(format!("not a binary PGM (magic {magic:?})")));
    }
    let parse = |tok: String| -> Result<usize> {
        tok.parse::<usize>()
            .map_err(|_| Error::Validation(format!("bad PGM header token {tok:?}")))
    };
    let width = parse(read_token(&mut reader)?)?;
    let height = parse(read_token(&mut reader)?)?;
    let maxval = parse(read_token(&mut reader)?)?;
    let npix = width * height;
    if maxval <= 255 {
        let mut data = vec![0u8; npix];
        reader.read_exact(&mut data).map_err(|_| Error::Validation("truncated PGM data".into()))?;
        Ok(Pgm::U8(Grid { width, height, data }))
    } else if maxval <= 65535 {
        let mut raw = vec![0u8; npix * 2];
        reader.read_exact(&mut raw).map_err(|_| Error::Validation("truncated PGM data".into()))?;
        let data = raw.chunks_exact(2).map(|c| u16::from_be_bytes([c[0], c[1]])).collect();
        Ok(Pgm::U16(Grid { width, height, data }))
    } else {
        Err(Error::Validation(format!("unsupported PGM maxval {maxval}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgm8_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.pgm");
        let mut img = Grid::<u8>::new(7, 3);
        for (i, v) in img.data_mut().iter_mut().enumerate() {
            *v = (i * 13 % 256) as u8;
        }
        write_pgm8(&path, &img).unwrap();
        match read_pgm(&path).unwrap() {
            Pgm::U8(back) => assert_eq!(back, img),
            Pgm::U16(_) => panic!("expected 8-bit"),
        }
    }

    #[test]
    fn pgm16_round_trip_and_depth_quantization() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.pgm");
        let mut depth = DepthImage::new(4, 2);
        depth.set(0, 0, 99.6);
        depth.set(3, 1, 150.2);
        let q = depth_to_u16(&depth);
        assert_eq!(q.get(0, 0), 100);
        assert_eq!(q.get(3, 1), 150);
        write_pgm16(&path, &q).unwrap();
        match read_pgm(&path).unwrap() {
            Pgm::U16(back) => assert_eq!(back, q),
            Pgm::U8(_) => panic!("expected 16-bit"),
        }
    }

    #[test]
    fn truncated_pgm_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.pgm");
        std::fs::write(&path, b"P5\n4 4\n255\nxx").unwrap();
        assert!(read_pgm(&path).is_err());
    }
}
