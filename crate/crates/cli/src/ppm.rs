//! Binary PPM output: limit points in black on white.

use std::fs;
use std::path::Path;

use kleinian_core::limitset::Bitmap;

pub fn ppm_bytes(bitmap: &Bitmap) -> Vec<u8> {
    let header = format!("P6\n{} {}\n255\n", bitmap.width, bitmap.height);
    let mut data = Vec::with_capacity(header.len() + 3 * bitmap.width * bitmap.height);
    data.extend_from_slice(header.as_bytes());
    for row in 0..bitmap.height {
        for col in 0..bitmap.width {
            let v = if bitmap.get(col, row) { 0u8 } else { 255u8 };
            data.extend_from_slice(&[v, v, v]);
        }
    }
    data
}

pub fn write_ppm(path: &Path, bitmap: &Bitmap) -> std::io::Result<()> {
    fs::write(path, ppm_bytes(bitmap))
}
