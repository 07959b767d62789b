use serde::{Deserialize, Serialize};

/// Row-major 2-D raster; row 0 is the top of the image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid<T> {
    pub width: usize,
    pub height: usize,
    pub data: Vec<T>,
}

impl<T: Clone> Grid<T> {
    pub fn filled(width: usize, height: usize, value: T) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }
}

impl<T> Grid<T> {
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self { width, height, data }
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), width * height, "raster size mismatch");
        Self { width, height, data }
    }

    #[inline]
    pub fn idx(&self, x: usize, y: usize) -> usize {
        y * self.width + x
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> &T {
        &self.data[y * self.width + x]
    }

    #[inline]
    pub fn get_mut(&mut self, x: usize, y: usize) -> &mut T {
        let w = self.width;
        &mut self.data[y * w + x]
    }

    pub fn same_size<U>(&self, other: &Grid<U>) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> Grid<U> {
        Grid {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(f).collect(),
        }
    }
}

/// Linear HDR radiance, RGB.
pub type RadianceImage = Grid<[f64; 3]>;

/// Single-channel float image (luma, depth, ...).
pub type GrayImage = Grid<f64>;

/// Per-pixel displacement `(u, v)` in pixels/frame; `v` grows downward.
pub type FlowField = Grid<[f64; 2]>;

/// Quantized sensor output with values in `[0, 2^bits - 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LdrImage {
    pub bits: u32,
    pub pixels: Grid<[u16; 3]>,
}

impl LdrImage {
    pub fn max_value(&self) -> u16 {
        ((1u32 << self.bits) - 1) as u16
    }

    /// Normalized `[0, 1]` RGB.
    pub fn to_unit(&self) -> RadianceImage {
        let m = self.max_value() as f64;
        self.pixels.map(|p| [p[0] as f64 / m, p[1] as f64 / m, p[2] as f64 / m])
    }
}

/// Rec.709 luma weights.
pub const LUMA: [f64; 3] = [0.2126, 0.7152, 0.0722];

pub fn luma(c: &[f64; 3]) -> f64 {
    LUMA[0] * c[0] + LUMA[1] * c[1] + LUMA[2] * c[2]
}

pub fn to_gray(img: &RadianceImage) -> GrayImage {
    img.map(luma)
}
