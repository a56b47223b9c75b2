//! Image file I/O: binary PGM (P5) and PPM (P6) with bit-exact round trips,
//! plus optional PNG reading for 8-bit grayscale/RGB files.

use std::fs;
use std::io::Write;
use std::path::Path;

use seconv_core::image::Image;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoFormatError {
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("unrecognized image format (expected PGM, PPM, or PNG)")]
    BadMagic,
    #[error("malformed netpbm header: {0}")]
    BadHeader(String),
    #[error("only maxval 255 is supported, file declares {0}")]
    UnsupportedMaxval(u32),
    #[error("pixel payload has {got} bytes, expected {expected}")]
    PayloadLength { expected: usize, got: usize },
    #[error("png decode failed: {0}")]
    Png(String),
    #[error("unsupported png layout: need 8-bit grayscale or RGB")]
    UnsupportedPng,
    #[error("cannot write an image with {0} channels")]
    BadChannels(usize),
}

/// Reads PGM/PPM/PNG by magic bytes.
pub fn read_image(path: &Path) -> Result<Image, IoFormatError> {
    let bytes = fs::read(path)?;
    match bytes.as_slice() {
        [b'P', b'5', ..] => parse_pnm(&bytes, 1),
        [b'P', b'6', ..] => parse_pnm(&bytes, 3),
        [0x89, b'P', b'N', b'G', ..] => parse_png(&bytes),
        _ => Err(IoFormatError::BadMagic),
    }
}

/// Writes binary PGM for grayscale, binary PPM for RGB; maxval 255.
pub fn write_image(path: &Path, img: &Image) -> Result<(), IoFormatError> {
    let magic = match img.channels() {
        1 => "P5",
        3 => "P6",
        c => return Err(IoFormatError::BadChannels(c)),
    };
    let mut out = fs::File::create(path)?;
    write!(out, "{magic}\n{} {}\n255\n", img.width(), img.height())?;
    out.write_all(&img.to_u8())?;
    Ok(())
}

// Netpbm headers: magic, width, height, maxval as ASCII tokens separated by
// whitespace, '#' comments allowed, a single whitespace byte before payload.
fn parse_pnm(bytes: &[u8], channels: usize) -> Result<Image, IoFormatError> {
    let mut pos = 2usize;
    let mut fields = [0u32; 3];
    for field in &mut fields {
        *field = next_header_token(bytes, &mut pos)?;
    }
    let (width, height, maxval) = (fields[0] as usize, fields[1] as usize, fields[2]);
    if maxval != 255 {
        return Err(IoFormatError::UnsupportedMaxval(maxval));
    }
    if width == 0 || height == 0 {
        return Err(IoFormatError::BadHeader("zero dimension".into()));
    }
    // exactly one whitespace byte separates the header from the payload
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err(IoFormatError::BadHeader("missing payload separator".into())),
    }
    let expected = width * height * channels;
    let payload = &bytes[pos..];
    if payload.len() != expected {
        return Err(IoFormatError::PayloadLength { expected, got: payload.len() });
    }
    Image::from_u8(height, width, channels, payload)
        .map_err(|e| IoFormatError::BadHeader(e.to_string()))
}

fn next_header_token(bytes: &[u8], pos: &mut usize) -> Result<u32, IoFormatError> {
    // skip whitespace and comment lines
    loop {
        match bytes.get(*pos) {
            Some(b) if b.is_ascii_whitespace() => *pos += 1,
            Some(b'#') => {
                while let Some(&b) = bytes.get(*pos) {
                    *pos += 1;
                    if b == b'\n' {
                        break;
                    }
                }
            }
            _ => break,
        }
    }
    let start = *pos;
    while let Some(b) = bytes.get(*pos) {
        if b.is_ascii_digit() {
            *pos += 1;
        } else {
            break;
        }
    }
    if start == *pos {
        return Err(IoFormatError::BadHeader("expected integer".into()));
    }
    std::str::from_utf8(&bytes[start..*pos])
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| IoFormatError::BadHeader("integer overflow".into()))
}

fn parse_png(bytes: &[u8]) -> Result<Image, IoFormatError> {
    let decoder = png::Decoder::new(std::io::Cursor::new(bytes));
    let mut reader = decoder.read_info().map_err(|e| IoFormatError::Png(e.to_string()))?;
    let mut buf = vec![0u8; reader.output_buffer_size().ok_or(IoFormatError::UnsupportedPng)?];
    let info = reader.next_frame(&mut buf).map_err(|e| IoFormatError::Png(e.to_string()))?;
    if info.bit_depth != png::BitDepth::Eight {
        return Err(IoFormatError::UnsupportedPng);
    }
    let channels = match info.color_type {
        png::ColorType::Grayscale => 1,
        png::ColorType::Rgb => 3,
        _ => return Err(IoFormatError::UnsupportedPng),
    };
    let (w, h) = (info.width as usize, info.height as usize);
    buf.truncate(info.buffer_size());
    Image::from_u8(h, w, channels, &buf).map_err(|e| IoFormatError::Png(e.to_string()))
}
