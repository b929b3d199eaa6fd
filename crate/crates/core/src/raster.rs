//! 8-bit raster images and the low-level image operations the detector
//! needs: grayscale conversion, height normalization, cropping and the
//! sliding maximum filter used for peak picking.

use std::collections::VecDeque;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::Rect;

/// Height every frame is scaled to before matching. The blood bar template
/// and all derived crop sizes are defined at this scale.
pub const NORMALIZED_HEIGHT: u32 = 720;

/// Interleaved 8-bit image with 1 (gray) or 3 (RGB) channels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    width: u32,
    height: u32,
    channels: u8,
    pixels: Vec<u8>,
}

impl RasterImage {
    /// Wraps raw interleaved pixel data. `channels` must be 1 or 3 and
    /// `pixels` must hold exactly `width * height * channels` bytes.
    pub fn new(width: u32, height: u32, channels: u8, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("image dimensions must be nonzero"));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::invalid(format!(
                "unsupported channel count {channels}, expected 1 or 3"
            )));
        }
        let expected = width as usize * height as usize * channels as usize;
        if pixels.len() != expected {
            return Err(Error::invalid(format!(
                "pixel buffer holds {} bytes, expected {expected}",
                pixels.len()
            )));
        }
        Ok(RasterImage {
            width,
            height,
            channels,
            pixels,
        })
    }

    /// Image of constant value.
    pub fn filled(width: u32, height: u32, channels: u8, value: u8) -> Self {
        RasterImage::new(
            width,
            height,
            channels,
            vec![value; width as usize * height as usize * channels as usize],
        )
        .expect("filled: valid dimensions")
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn channels(&self) -> u8 {
        self.channels
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [u8] {
        &mut self.pixels
    }

    /// One interleaved row.
    pub fn row(&self, y: u32) -> &[u8] {
        let stride = self.width as usize * self.channels as usize;
        let start = y as usize * stride;
        &self.pixels[start..start + stride]
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32, channel: u8) -> u8 {
        debug_assert!(x < self.width && y < self.height && channel < self.channels);
        let idx = (y as usize * self.width as usize + x as usize) * self.channels as usize
            + channel as usize;
        self.pixels[idx]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, channel: u8, value: u8) {
        debug_assert!(x < self.width && y < self.height && channel < self.channels);
        let idx = (y as usize * self.width as usize + x as usize) * self.channels as usize
            + channel as usize;
        self.pixels[idx] = value;
    }

    /// Sets all channels of one pixel.
    #[inline]
    pub fn put(&mut self, x: u32, y: u32, rgb: (u8, u8, u8)) {
        match self.channels {
            1 => self.set(x, y, 0, rgb.0),
            _ => {
                self.set(x, y, 0, rgb.0);
                self.set(x, y, 1, rgb.1);
                self.set(x, y, 2, rgb.2);
            }
        }
    }

    /// Loads a PNG. Grayscale files stay single-channel; everything else is
    /// decoded to RGB.
    pub fn load_png(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let dynamic = image::open(path).map_err(|e| Error::image(path, e))?;
        let img = match dynamic {
            image::DynamicImage::ImageLuma8(_)
            | image::DynamicImage::ImageLuma16(_)
            | image::DynamicImage::ImageLumaA8(_)
            | image::DynamicImage::ImageLumaA16(_) => {
                let gray = dynamic.to_luma8();
                RasterImage::new(gray.width(), gray.height(), 1, gray.into_raw())
            }
            other => {
                let rgb = other.to_rgb8();
                RasterImage::new(rgb.width(), rgb.height(), 3, rgb.into_raw())
            }
        }?;
        Ok(img)
    }

    /// Writes the image as PNG.
    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let color = match self.channels {
            1 => image::ExtendedColorType::L8,
            _ => image::ExtendedColorType::Rgb8,
        };
        image::save_buffer_with_format(
            path,
            &self.pixels,
            self.width,
            self.height,
            color,
            image::ImageFormat::Png,
        )
        .map_err(|e| Error::image(path, e))
    }
}

/// A frame rescaled to [`NORMALIZED_HEIGHT`]. `scale` is the factor that
/// took source coordinates to normalized coordinates (`normalized = source
/// * scale`), so detections map back to the source via division.
#[derive(Debug, Clone)]
pub struct NormalizedFrame {
    pub image: RasterImage,
    pub scale: f64,
}

/// Single-channel float map produced by template matching.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchMap {
    width: u32,
    height: u32,
    values: Vec<f32>,
}

impl MatchMap {
    pub fn from_values(width: u32, height: u32, values: Vec<f32>) -> Result<Self> {
        if values.len() != width as usize * height as usize {
            return Err(Error::invalid(format!(
                "match map holds {} values, expected {}",
                values.len(),
                width as usize * height as usize
            )));
        }
        Ok(MatchMap {
            width,
            height,
            values,
        })
    }

    pub fn zeros(width: u32, height: u32) -> Self {
        MatchMap {
            width,
            height,
            values: vec![0.0; width as usize * height as usize],
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f32] {
        &mut self.values
    }

    #[inline]
    pub fn at(&self, x: u32, y: u32) -> f32 {
        debug_assert!(x < self.width && y < self.height);
        self.values[y as usize * self.width as usize + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, v: f32) {
        debug_assert!(x < self.width && y < self.height);
        self.values[y as usize * self.width as usize + x as usize] = v;
    }

    pub fn row(&self, y: u32) -> &[f32] {
        let start = y as usize * self.width as usize;
        &self.values[start..start + self.width as usize]
    }
}

/// Converts an RGB image to grayscale with BT.601 luma weights,
/// `round(0.299 R + 0.587 G + 0.114 B)`. Single-channel input is returned
/// unchanged.
pub fn to_grayscale(img: &RasterImage) -> RasterImage {
    if img.channels == 1 {
        return img.clone();
    }
    let mut out = Vec::with_capacity(img.width as usize * img.height as usize);
    for px in img.pixels.chunks_exact(3) {
        let luma = 0.299 * px[0] as f64 + 0.587 * px[1] as f64 + 0.114 * px[2] as f64;
        out.push(luma.round() as u8);
    }
    RasterImage {
        width: img.width,
        height: img.height,
        channels: 1,
        pixels: out,
    }
}

/// Bilinear resize with pixel-center alignment. Works on 1- and 3-channel
/// images.
pub fn resize_bilinear(img: &RasterImage, new_w: u32, new_h: u32) -> Result<RasterImage> {
    if new_w == 0 || new_h == 0 {
        return Err(Error::invalid("resize target must be nonzero"));
    }
    if new_w == img.width && new_h == img.height {
        return Ok(img.clone());
    }
    let channels = img.channels as usize;
    // Per-axis sample positions: source = (dst + 0.5) * src_len / dst_len - 0.5,
    // clamped so border pixels replicate.
    let axis = |src_len: u32, dst_len: u32| -> Vec<(usize, usize, f64)> {
        (0..dst_len)
            .map(|d| {
                let s = (d as f64 + 0.5) * src_len as f64 / dst_len as f64 - 0.5;
                let s = s.clamp(0.0, (src_len - 1) as f64);
                let i0 = s.floor() as usize;
                let i1 = (i0 + 1).min(src_len as usize - 1);
                (i0, i1, s - i0 as f64)
            })
            .collect()
    };
    let xs = axis(img.width, new_w);
    let ys = axis(img.height, new_h);

    let src_stride = img.width as usize * channels;
    let mut out = vec![0u8; new_w as usize * new_h as usize * channels];
    for (dy, &(y0, y1, fy)) in ys.iter().enumerate() {
        let row0 = &img.pixels[y0 * src_stride..y0 * src_stride + src_stride];
        let row1 = &img.pixels[y1 * src_stride..y1 * src_stride + src_stride];
        let dst_row =
            &mut out[dy * new_w as usize * channels..(dy + 1) * new_w as usize * channels];
        for (dx, &(x0, x1, fx)) in xs.iter().enumerate() {
            for c in 0..channels {
                let p00 = row0[x0 * channels + c] as f64;
                let p01 = row0[x1 * channels + c] as f64;
                let p10 = row1[x0 * channels + c] as f64;
                let p11 = row1[x1 * channels + c] as f64;
                let top = p00 + (p01 - p00) * fx;
                let bottom = p10 + (p11 - p10) * fx;
                dst_row[dx * channels + c] = (top + (bottom - top) * fy).round() as u8;
            }
        }
    }
    RasterImage::new(new_w, new_h, img.channels, out)
}

/// Scales a frame so its height equals `target`, keeping the aspect ratio
/// (width is rounded). Frames already at the target height are returned
/// unchanged with scale 1.
pub fn normalize_height(img: &RasterImage, target: u32) -> Result<NormalizedFrame> {
    if target == 0 {
        return Err(Error::invalid("normalize target height must be positive"));
    }
    if img.height == target {
        return Ok(NormalizedFrame {
            image: img.clone(),
            scale: 1.0,
        });
    }
    let scale = target as f64 / img.height as f64;
    let new_w = ((img.width as f64 * scale).round() as u32).max(1);
    Ok(NormalizedFrame {
        image: resize_bilinear(img, new_w, target)?,
        scale,
    })
}

/// Sliding maximum over `[i - r, i + r]` with the window clipped at the
/// borders. Monotonic-deque algorithm, O(n) per lane.
fn sliding_max_into(src: &[f32], out: &mut [f32], r: usize) {
    let n = src.len();
    debug_assert_eq!(out.len(), n);
    let mut deque: VecDeque<usize> = VecDeque::with_capacity(2 * r + 2);
    for e in 0..n + r {
        if e < n {
            while let Some(&back) = deque.back() {
                if src[back] <= src[e] {
                    deque.pop_back();
                } else {
                    break;
                }
            }
            deque.push_back(e);
        }
        if e >= r {
            let i = e - r;
            while deque.front().map_or(false, |&front| front + r < i) {
                deque.pop_front();
            }
            out[i] = src[*deque.front().expect("window never empty")];
        }
    }
}

/// Morphological dilation of a match map with a square (2r+1)^2 window,
/// computed as two separable 1-D passes. Windows are clipped at the map
/// borders, which is equivalent to clamp-to-edge padding.
///
/// # Panics
///
/// Panics when `radius` is 0; a zero-radius filter would be the identity
/// and always indicates a configuration bug upstream.
pub fn maximum_filter(map: &MatchMap, radius: u32) -> MatchMap {
    assert!(radius >= 1, "maximum_filter requires radius >= 1");
    let r = radius as usize;
    let (w, h) = (map.width as usize, map.height as usize);

    // Horizontal pass.
    let mut horizontal = vec![0.0f32; w * h];
    for y in 0..h {
        sliding_max_into(
            &map.values[y * w..(y + 1) * w],
            &mut horizontal[y * w..(y + 1) * w],
            r,
        );
    }

    // Vertical pass over the horizontal result.
    let mut out = vec![0.0f32; w * h];
    let mut column = vec![0.0f32; h];
    let mut column_max = vec![0.0f32; h];
    for x in 0..w {
        for y in 0..h {
            column[y] = horizontal[y * w + x];
        }
        sliding_max_into(&column, &mut column_max, r);
        for y in 0..h {
            out[y * w + x] = column_max[y];
        }
    }
    MatchMap {
        width: map.width,
        height: map.height,
        values: out,
    }
}

/// Crops `rect` out of the image. The rectangle is clamped to the frame
/// and the actually cropped rectangle is returned alongside the pixels;
/// a rectangle entirely outside the frame is an error.
pub fn crop(img: &RasterImage, rect: &Rect) -> Result<(RasterImage, Rect)> {
    let frame = Rect::new(0, 0, img.width, img.height);
    let actual = rect.intersect(&frame).ok_or_else(|| {
        Error::invalid(format!(
            "crop {rect:?} lies outside the {}x{} frame",
            img.width, img.height
        ))
    })?;
    let channels = img.channels as usize;
    let src_stride = img.width as usize * channels;
    let row_bytes = actual.w as usize * channels;
    let mut out = Vec::with_capacity(actual.h as usize * row_bytes);
    for y in 0..actual.h as usize {
        let sy = actual.y as usize + y;
        let start = sy * src_stride + actual.x as usize * channels;
        out.extend_from_slice(&img.pixels[start..start + row_bytes]);
    }
    Ok((
        RasterImage::new(actual.w, actual.h, img.channels, out)?,
        actual,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn naive_maximum_filter(map: &MatchMap, radius: u32) -> MatchMap {
        let r = radius as i64;
        let mut out = MatchMap::zeros(map.width(), map.height());
        for y in 0..map.height() as i64 {
            for x in 0..map.width() as i64 {
                let mut best = f32::NEG_INFINITY;
                for wy in (y - r).max(0)..=(y + r).min(map.height() as i64 - 1) {
                    for wx in (x - r).max(0)..=(x + r).min(map.width() as i64 - 1) {
                        best = best.max(map.at(wx as u32, wy as u32));
                    }
                }
                out.set(x as u32, y as u32, best);
            }
        }
        out
    }

    #[test]
    fn grayscale_frozen_values() {
        let mut img = RasterImage::filled(3, 1, 3, 0);
        img.put(1, 0, (255, 255, 255));
        img.put(2, 0, (100, 200, 50));
        let gray = to_grayscale(&img);
        assert_eq!(gray.channels(), 1);
        assert_eq!(gray.pixels(), &[0, 255, 153]);
    }

    #[test]
    fn grayscale_is_identity_on_single_channel() {
        let img = RasterImage::new(2, 2, 1, vec![1, 2, 3, 4]).unwrap();
        assert_eq!(to_grayscale(&img), img);
    }

    proptest! {
        #[test]
        fn grayscale_matches_pointwise_formula(pixels in proptest::collection::vec(0u8..=255, 27)) {
            let img = RasterImage::new(3, 3, 3, pixels.clone()).unwrap();
            let gray = to_grayscale(&img);
            for (i, px) in pixels.chunks_exact(3).enumerate() {
                let expect = (0.299 * px[0] as f64 + 0.587 * px[1] as f64 + 0.114 * px[2] as f64)
                    .round() as u8;
                prop_assert_eq!(gray.pixels()[i], expect);
            }
        }
    }

    #[test]
    fn normalize_keeps_target_height_frames() {
        let img = RasterImage::filled(1280, 720, 3, 7);
        let norm = normalize_height(&img, 720).unwrap();
        assert_eq!(norm.scale, 1.0);
        assert_eq!(norm.image, img);
    }

    #[test]
    fn normalize_full_hd_to_720() {
        let img = RasterImage::filled(1920, 1080, 3, 7);
        let norm = normalize_height(&img, 720).unwrap();
        assert_eq!((norm.image.width(), norm.image.height()), (1280, 720));
        assert!((norm.scale - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn normalize_upscales_small_frames() {
        let img = RasterImage::filled(960, 540, 3, 7);
        let norm = normalize_height(&img, 720).unwrap();
        assert_eq!((norm.image.width(), norm.image.height()), (1280, 720));
        assert!((norm.scale - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn normalize_rejects_zero_target() {
        let img = RasterImage::filled(8, 8, 1, 0);
        assert!(normalize_height(&img, 0).is_err());
    }

    #[test]
    fn normalize_is_idempotent_on_images() {
        let mut img = RasterImage::filled(400, 300, 3, 10);
        for y in 0..300 {
            for x in 0..400 {
                img.put(
                    x,
                    y,
                    ((x % 251) as u8, (y % 241) as u8, ((x + y) % 233) as u8),
                );
            }
        }
        let once = normalize_height(&img, 720).unwrap();
        let twice = normalize_height(&once.image, 720).unwrap();
        assert_eq!(once.image, twice.image);
        assert_eq!(twice.scale, 1.0);
    }

    #[test]
    fn maximum_filter_constant_map_unchanged() {
        let map = MatchMap::from_values(7, 5, vec![0.25; 35]).unwrap();
        let filtered = maximum_filter(&map, 3);
        assert_eq!(filtered.values(), map.values());
    }

    #[test]
    fn maximum_filter_spreads_single_spike() {
        let mut map = MatchMap::zeros(11, 11);
        map.set(5, 5, 1.0);
        let filtered = maximum_filter(&map, 2);
        for y in 0..11 {
            for x in 0..11 {
                let inside = (3..=7).contains(&x) && (3..=7).contains(&y);
                assert_eq!(
                    filtered.at(x, y),
                    if inside { 1.0 } else { 0.0 },
                    "at ({x},{y})"
                );
            }
        }
    }

    proptest! {
        #[test]
        fn maximum_filter_matches_naive_window_max(
            values in proptest::collection::vec(-1.0f32..1.0, 64),
            radius in 1u32..6,
        ) {
            let map = MatchMap::from_values(8, 8, values).unwrap();
            let fast = maximum_filter(&map, radius);
            let naive = naive_maximum_filter(&map, radius);
            prop_assert_eq!(fast.values(), naive.values());
        }

        #[test]
        fn maximum_filter_dominates_input(
            values in proptest::collection::vec(-1.0f32..1.0, 48),
            radius in 1u32..5,
        ) {
            let map = MatchMap::from_values(8, 6, values).unwrap();
            let filtered = maximum_filter(&map, radius);
            for (out, src) in filtered.values().iter().zip(map.values()) {
                prop_assert!(out >= src);
            }
        }

        #[test]
        fn repeated_filter_equals_double_radius_in_interior(
            values in proptest::collection::vec(-1.0f32..1.0, 20 * 16),
            radius in 1u32..4,
        ) {
            let map = MatchMap::from_values(20, 16, values).unwrap();
            let twice = maximum_filter(&maximum_filter(&map, radius), radius);
            let wide = maximum_filter(&map, 2 * radius);
            // Border windows clip differently, so compare where both
            // windows are fully interior.
            let margin = 2 * radius;
            for y in margin..16 - margin {
                for x in margin..20 - margin {
                    prop_assert_eq!(twice.at(x, y), wide.at(x, y));
                }
            }
        }
    }

    #[test]
    fn crop_full_image_is_identity() {
        let img = RasterImage::new(4, 3, 1, (0..12).collect()).unwrap();
        let (out, actual) = crop(&img, &Rect::new(0, 0, 4, 3)).unwrap();
        assert_eq!(out, img);
        assert_eq!(actual, Rect::new(0, 0, 4, 3));
    }

    #[test]
    fn crop_interior_rect() {
        let mut img = RasterImage::filled(20, 20, 3, 0);
        img.put(12, 7, (9, 8, 7));
        let (out, actual) = crop(&img, &Rect::new(10, 5, 10, 10)).unwrap();
        assert_eq!(actual, Rect::new(10, 5, 10, 10));
        assert_eq!(out.get(2, 2, 0), 9);
        assert_eq!(out.get(2, 2, 2), 7);
    }

    #[test]
    fn crop_clamps_to_frame_and_reports_actual() {
        let img = RasterImage::filled(20, 10, 1, 3);
        let (out, actual) = crop(&img, &Rect::new(15, -2, 10, 6)).unwrap();
        assert_eq!(actual, Rect::new(15, 0, 5, 4));
        assert_eq!((out.width(), out.height()), (5, 4));
    }

    #[test]
    fn crop_outside_frame_is_error() {
        let img = RasterImage::filled(20, 10, 1, 3);
        assert!(crop(&img, &Rect::new(25, 0, 4, 4)).is_err());
    }

    #[test]
    fn png_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("img.png");
        let mut img = RasterImage::filled(9, 4, 3, 0);
        img.put(3, 2, (1, 2, 3));
        img.save_png(&path).unwrap();
        assert_eq!(RasterImage::load_png(&path).unwrap(), img);

        let gray = to_grayscale(&img);
        gray.save_png(&path).unwrap();
        assert_eq!(RasterImage::load_png(&path).unwrap(), gray);
    }
}
