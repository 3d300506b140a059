//! IDX file parsing (the MNIST distribution format): big-endian magic and
//! dimension header followed by raw unsigned bytes.

use std::io::Read;

use byteorder::{BigEndian, ByteOrder, WriteBytesExt};

use crate::error::{Error, Result};
use crate::numerics::Matrix;

pub const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
pub const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

fn read_file(path: &str) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut buf))
        .map_err(|e| Error::io(path, e))?;
    Ok(buf)
}

fn read_u32(bytes: &[u8], offset: usize, what: &str) -> Result<u32> {
    if bytes.len() < offset + 4 {
        return Err(Error::Format {
            offset: bytes.len() as u64,
            message: format!("truncated while reading {what}"),
        });
    }
    Ok(BigEndian::read_u32(&bytes[offset..offset + 4]))
}

/// Parse an IDX image buffer into pixel rows. Pixels stay in [0, 255].
pub fn parse_idx_images(bytes: &[u8]) -> Result<(Matrix, usize, usize)> {
    let magic = read_u32(bytes, 0, "image magic")?;
    if magic != IDX_IMAGES_MAGIC {
        return Err(Error::Format {
            offset: 0,
            message: format!("bad image magic {magic:#010x}, want {IDX_IMAGES_MAGIC:#010x}"),
        });
    }
    let n = read_u32(bytes, 4, "image count")? as usize;
    let rows = read_u32(bytes, 8, "image rows")? as usize;
    let cols = read_u32(bytes, 12, "image cols")? as usize;
    let need = 16 + n * rows * cols;
    if bytes.len() != need {
        return Err(Error::Format {
            offset: bytes.len().min(need) as u64,
            message: format!(
                "image payload is {} bytes, header implies {}",
                bytes.len() - 16.min(bytes.len()),
                need - 16
            ),
        });
    }
    let data: Vec<f64> = bytes[16..].iter().map(|&b| b as f64).collect();
    Ok((Matrix::from_vec(n, rows * cols, data)?, rows, cols))
}

/// Parse an IDX label buffer. Labels are raw bytes.
pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<usize>> {
    let magic = read_u32(bytes, 0, "label magic")?;
    if magic != IDX_LABELS_MAGIC {
        return Err(Error::Format {
            offset: 0,
            message: format!("bad label magic {magic:#010x}, want {IDX_LABELS_MAGIC:#010x}"),
        });
    }
    let n = read_u32(bytes, 4, "label count")? as usize;
    if bytes.len() != 8 + n {
        return Err(Error::Format {
            offset: bytes.len().min(8 + n) as u64,
            message: format!("label payload is {} bytes, header says {n}", bytes.len() - 8.min(bytes.len())),
        });
    }
    Ok(bytes[8..].iter().map(|&b| b as usize).collect())
}

pub fn load_idx_images(path: &str) -> Result<(Matrix, usize, usize)> {
    parse_idx_images(&read_file(path)?)
}

pub fn load_idx_labels(path: &str) -> Result<Vec<usize>> {
    parse_idx_labels(&read_file(path)?)
}

/// Inverse of `parse_idx_images` for raw (unnormalized) pixel values.
pub fn serialize_idx_images(images: &Matrix, rows: usize, cols: usize) -> Result<Vec<u8>> {
    if images.cols() != rows * cols {
        return Err(Error::Shape(format!(
            "{} pixel columns vs {rows}x{cols} image shape",
            images.cols()
        )));
    }
    let mut out = Vec::with_capacity(16 + images.rows() * images.cols());
    out.write_u32::<BigEndian>(IDX_IMAGES_MAGIC).unwrap();
    out.write_u32::<BigEndian>(images.rows() as u32).unwrap();
    out.write_u32::<BigEndian>(rows as u32).unwrap();
    out.write_u32::<BigEndian>(cols as u32).unwrap();
    for &v in images.data() {
        if !(0.0..=255.0).contains(&v) || v.fract() != 0.0 {
            return Err(Error::Data(format!(
                "pixel {v} is not an integer in [0, 255]; serialize raw data only"
            )));
        }
        out.push(v as u8);
    }
    Ok(out)
}

pub fn serialize_idx_labels(labels: &[usize]) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.write_u32::<BigEndian>(IDX_LABELS_MAGIC).unwrap();
    out.write_u32::<BigEndian>(labels.len() as u32).unwrap();
    for &l in labels {
        if l > 255 {
            return Err(Error::Data(format!("label {l} does not fit in a byte")));
        }
        out.push(l as u8);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture() -> (Vec<u8>, Vec<u8>) {
        // two 2x3 images with distinct pixel values, labels 7 and 1
        let mut img = Vec::new();
        img.write_u32::<BigEndian>(IDX_IMAGES_MAGIC).unwrap();
        img.write_u32::<BigEndian>(2).unwrap();
        img.write_u32::<BigEndian>(2).unwrap();
        img.write_u32::<BigEndian>(3).unwrap();
        img.extend_from_slice(&[0, 10, 20, 30, 40, 50, 255, 254, 253, 252, 251, 250]);
        let mut lab = Vec::new();
        lab.write_u32::<BigEndian>(IDX_LABELS_MAGIC).unwrap();
        lab.write_u32::<BigEndian>(2).unwrap();
        lab.extend_from_slice(&[7, 1]);
        (img, lab)
    }

    #[test]
    fn fixture_round_trip_is_byte_exact() {
        let (img_bytes, lab_bytes) = fixture();
        let (images, rows, cols) = parse_idx_images(&img_bytes).unwrap();
        assert_eq!((images.rows(), rows, cols), (2, 2, 3));
        assert_eq!(images.get(0, 1), 10.0);
        assert_eq!(images.get(1, 5), 250.0);
        let labels = parse_idx_labels(&lab_bytes).unwrap();
        assert_eq!(labels, vec![7, 1]);
        assert_eq!(serialize_idx_images(&images, rows, cols).unwrap(), img_bytes);
        assert_eq!(serialize_idx_labels(&labels).unwrap(), lab_bytes);
    }

    #[test]
    fn bad_magic_reports_offset_zero() {
        let (mut img, _) = fixture();
        img[3] = 0x01;
        match parse_idx_images(&img) {
            Err(Error::Format { offset, .. }) => assert_eq!(offset, 0),
            other => panic!("want format error, got {other:?}"),
        }
    }

    #[test]
    fn truncated_payload_reports_offset() {
        let (img, _) = fixture();
        let cut = &img[..img.len() - 3];
        match parse_idx_images(cut) {
            Err(Error::Format { offset, .. }) => assert_eq!(offset, cut.len() as u64),
            other => panic!("want format error, got {other:?}"),
        }
    }

    #[test]
    fn truncated_header_fails() {
        assert!(parse_idx_images(&[0, 0, 8, 3, 0, 0]).is_err());
        assert!(parse_idx_labels(&[0, 0]).is_err());
    }
}
