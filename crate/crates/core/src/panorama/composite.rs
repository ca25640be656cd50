use crate::distortion::AffineTransform;
use crate::error::{Error, Result};
use crate::panorama::{CorrectionResult, PanoramaInput};

/// Canvases beyond this many pixels are refused.
const MAX_CANVAS_PIXELS: f64 = 1.0e8;

/// Bounding-box coordinates this close to an integer snap onto it.
const SNAP: f64 = 1e-6;

/// 8-bit RGBA raster, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbaImage {
    pub width: u32,
    pub height: u32,
    pub data: Vec<u8>,
}

impl RgbaImage {
    pub fn new(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            data: vec![0; width as usize * height as usize * 4],
        }
    }

    pub fn from_raw(width: u32, height: u32, data: Vec<u8>) -> Result<Self> {
        if data.len() != width as usize * height as usize * 4 {
            return Err(Error::InvalidInput(format!(
                "RGBA buffer of {} bytes does not match {width}x{height}",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn pixel(&self, x: u32, y: u32) -> [u8; 4] {
        let i = (y as usize * self.width as usize + x as usize) * 4;
        [
            self.data[i],
            self.data[i + 1],
            self.data[i + 2],
            self.data[i + 3],
        ]
    }

    pub fn put_pixel(&mut self, x: u32, y: u32, value: [u8; 4]) {
        let i = (y as usize * self.width as usize + x as usize) * 4;
        self.data[i..i + 4].copy_from_slice(&value);
    }

    /// Bilinear sample at a sub-pixel position, or `None` outside `[0, w-1] × [0, h-1]`.
    fn sample(&self, x: f64, y: f64) -> Option<[u8; 4]> {
        let max_x = (self.width - 1) as f64;
        let max_y = (self.height - 1) as f64;
        const EDGE: f64 = 1e-9;
        if !(x >= -EDGE && y >= -EDGE && x <= max_x + EDGE && y <= max_y + EDGE) {
            return None;
        }
        let x = x.clamp(0.0, max_x);
        let y = y.clamp(0.0, max_y);
        let (x0, y0) = (x.floor(), y.floor());
        let (fx, fy) = (x - x0, y - y0);
        let (x0, y0) = (x0 as u32, y0 as u32);
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let (p00, p10) = (self.pixel(x0, y0), self.pixel(x1, y0));
        let (p01, p11) = (self.pixel(x0, y1), self.pixel(x1, y1));
        let mut out = [0u8; 4];
        for c in 0..4 {
            let top = p00[c] as f64 * (1.0 - fx) + p10[c] as f64 * fx;
            let bottom = p01[c] as f64 * (1.0 - fx) + p11[c] as f64 * fx;
            let v = top * (1.0 - fy) + bottom * fy;
            out[c] = v.round().clamp(0.0, 255.0) as u8;
        }
        Some(out)
    }
}

/// Composited panorama. Canvas pixel `(u, v)` shows the common-plane point
/// `(u + origin[0], v + origin[1])`.
#[derive(Debug, Clone, PartialEq)]
pub struct Canvas {
    pub image: RgbaImage,
    pub origin: [f64; 2],
}

fn snap_floor(v: f64) -> f64 {
    let r = v.round();
    if (v - r).abs() < SNAP {
        r
    } else {
        v.floor()
    }
}

/// Renders `input` under its re-referenced transforms.
pub fn composite(input: &PanoramaInput, corrected: &CorrectionResult) -> Result<Canvas> {
    composite_transforms(input, &corrected.corrected_transforms)
}

/// Renders every image of `input` under the given transforms by inverse
/// mapping with bilinear sampling. Later images are drawn over earlier ones;
/// canvas pixels no image covers stay fully transparent.
pub fn composite_transforms(
    input: &PanoramaInput,
    transforms: &[AffineTransform],
) -> Result<Canvas> {
    if transforms.len() != input.len() {
        return Err(Error::InvalidInput(format!(
            "{} images but {} transforms",
            input.len(),
            transforms.len()
        )));
    }
    let mut sources = Vec::with_capacity(input.len());
    for image in input.images() {
        let pixels = image
            .pixels
            .as_ref()
            .ok_or_else(|| Error::MissingPixels(image.id.clone()))?;
        if pixels.width == 0 || pixels.height == 0 {
            return Err(Error::MissingPixels(image.id.clone()));
        }
        sources.push(pixels);
    }

    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    let mut footprints = Vec::with_capacity(input.len());
    for (image, t) in input.images().iter().zip(transforms) {
        let mut flo = [f64::INFINITY; 2];
        let mut fhi = [f64::NEG_INFINITY; 2];
        for corner in image.corners() {
            let p = t.apply(&corner);
            for k in 0..2 {
                flo[k] = flo[k].min(p[k]);
                fhi[k] = fhi[k].max(p[k]);
            }
        }
        for k in 0..2 {
            lo[k] = lo[k].min(flo[k]);
            hi[k] = hi[k].max(fhi[k]);
        }
        footprints.push((flo, fhi));
    }
    if !lo.iter().chain(&hi).all(|v| v.is_finite()) {
        return Err(Error::EmptyCanvas);
    }
    let origin = [snap_floor(lo[0]), snap_floor(lo[1])];
    let extent = [
        (hi[0] - origin[0] + SNAP).floor() + 1.0,
        (hi[1] - origin[1] + SNAP).floor() + 1.0,
    ];
    if !(extent[0] >= 1.0 && extent[1] >= 1.0) {
        return Err(Error::EmptyCanvas);
    }
    if extent[0] * extent[1] > MAX_CANVAS_PIXELS {
        return Err(Error::InvalidInput(format!(
            "canvas of {}x{} pixels is too large",
            extent[0], extent[1]
        )));
    }
    let (width, height) = (extent[0] as u32, extent[1] as u32);
    let mut canvas = RgbaImage::new(width, height);

    for ((source, t), (flo, fhi)) in sources.iter().zip(transforms).zip(&footprints) {
        let inv = t.inverse()?;
        let u0 = ((flo[0] - origin[0]).floor().max(0.0)) as u32;
        let v0 = ((flo[1] - origin[1]).floor().max(0.0)) as u32;
        let u1 = ((fhi[0] - origin[0]).ceil() as u32).min(width - 1);
        let v1 = ((fhi[1] - origin[1]).ceil() as u32).min(height - 1);
        for v in v0..=v1 {
            for u in u0..=u1 {
                let p = inv.apply(&[u as f64 + origin[0], v as f64 + origin[1]]);
                if let Some(px) = source.sample(p[0], p[1]) {
                    canvas.put_pixel(u, v, px);
                }
            }
        }
    }
    Ok(Canvas {
        image: canvas,
        origin,
    })
}
