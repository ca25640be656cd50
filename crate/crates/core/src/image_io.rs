//! PNG reading and writing. Everything is converted to 8-bit RGBA on load.

use std::fs::{self, File};
use std::io::BufReader;
use std::path::Path;

use crate::formats::FormatError;
use crate::panorama::RgbaImage;

fn png_error(e: impl std::fmt::Display) -> FormatError {
    FormatError::Png(e.to_string())
}

pub fn decode_png(reader: impl std::io::Read) -> Result<RgbaImage, FormatError> {
    let mut decoder = png::Decoder::new(reader);
    decoder.set_transformations(png::Transformations::EXPAND | png::Transformations::STRIP_16);
    let mut reader = decoder.read_info().map_err(png_error)?;
    let mut buf = vec![0; reader.output_buffer_size()];
    let info = reader.next_frame(&mut buf).map_err(png_error)?;
    let raw = &buf[..info.buffer_size()];
    let data: Vec<u8> = match info.color_type {
        png::ColorType::Rgba => raw.to_vec(),
        png::ColorType::Rgb => raw
            .chunks(3)
            .flat_map(|p| [p[0], p[1], p[2], 255])
            .collect(),
        png::ColorType::GrayscaleAlpha => raw
            .chunks(2)
            .flat_map(|p| [p[0], p[0], p[0], p[1]])
            .collect(),
        png::ColorType::Grayscale => raw.iter().flat_map(|&g| [g, g, g, 255]).collect(),
        other => {
            return Err(FormatError::Png(format!(
                "unsupported color type {other:?}"
            )))
        }
    };
    RgbaImage::from_raw(info.width, info.height, data).map_err(png_error)
}

pub fn read_png(path: &Path) -> Result<RgbaImage, FormatError> {
    decode_png(BufReader::new(File::open(path)?))
}

pub fn encode_png(image: &RgbaImage) -> Result<Vec<u8>, FormatError> {
    let mut out = Vec::new();
    {
        let mut encoder = png::Encoder::new(&mut out, image.width, image.height);
        encoder.set_color(png::ColorType::Rgba);
        encoder.set_depth(png::BitDepth::Eight);
        let mut writer = encoder.write_header().map_err(png_error)?;
        writer.write_image_data(&image.data).map_err(png_error)?;
        writer.finish().map_err(png_error)?;
    }
    Ok(out)
}

pub fn write_png(path: &Path, image: &RgbaImage) -> Result<(), FormatError> {
    fs::write(path, encode_png(image)?)?;
    Ok(())
}
