//! `overlay`: draws camp-colored detection boxes onto a frame image.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use heroscan_core::{Camp, RasterImage, Rect};

use crate::output::DetectOutput;

/// Box outline width in pixels.
const THICKNESS: u32 = 2;

#[derive(Debug, Args)]
pub struct OverlayArgs {
    /// Frame image the detections were computed on.
    #[arg(value_name = "FRAME")]
    pub frame: PathBuf,
    /// Detection JSON document as written by `detect`.
    #[arg(value_name = "DETECTIONS")]
    pub detections: PathBuf,
    /// Output PNG path.
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    /// Frame index inside the JSON document; defaults to matching by path.
    #[arg(long, value_name = "N")]
    pub index: Option<usize>,
}

fn camp_color(camp: Camp) -> (u8, u8, u8) {
    match camp {
        Camp::SelfHero => (0, 255, 0),
        Camp::Friend => (0, 0, 255),
        Camp::Enemy => (255, 0, 0),
        Camp::Unknown => (128, 128, 128),
    }
}

/// Draws a rectangle outline, clipped to the image bounds.
pub fn draw_rect(image: &mut RasterImage, rect: &Rect, color: (u8, u8, u8)) {
    let (w, h) = (image.width() as i64, image.height() as i64);
    let x0 = rect.x as i64;
    let y0 = rect.y as i64;
    let x1 = x0 + rect.w as i64;
    let y1 = y0 + rect.h as i64;
    let t = THICKNESS as i64;
    let mut put = |x: i64, y: i64| {
        if (0..w).contains(&x) && (0..h).contains(&y) {
            image.put(x as u32, y as u32, color);
        }
    };
    for band in 0..t {
        for x in x0..x1 {
            put(x, y0 + band);
            put(x, y1 - 1 - band);
        }
        for y in y0..y1 {
            put(x0 + band, y);
            put(x1 - 1 - band, y);
        }
    }
}

/// Picks the JSON entry for `frame`: by `--index` when given, otherwise
/// by path match, otherwise the sole entry of a one-frame document.
fn select_entry<'a>(
    doc: &'a DetectOutput,
    index: Option<usize>,
    frame: &Path,
) -> Result<&'a crate::output::DetectFrameOut> {
    if let Some(i) = index {
        return doc
            .frames
            .get(i)
            .with_context(|| format!("document has {} frames, no index {i}", doc.frames.len()));
    }
    let wanted = frame.display().to_string();
    if let Some(entry) = doc.frames.iter().find(|f| f.path == wanted) {
        return Ok(entry);
    }
    let name = frame.file_name().map(|n| n.to_string_lossy().to_string());
    if let Some(name) = name {
        let mut by_name = doc.frames.iter().filter(|f| {
            Path::new(&f.path)
                .file_name()
                .is_some_and(|n| n == name.as_str())
        });
        if let (Some(entry), None) = (by_name.next(), by_name.next()) {
            return Ok(entry);
        }
    }
    if doc.frames.len() == 1 {
        return Ok(&doc.frames[0]);
    }
    bail!(
        "cannot match frame {} to a document entry; pass --index",
        frame.display()
    )
}

pub fn run(args: OverlayArgs) -> Result<()> {
    let mut image = RasterImage::load_png(&args.frame)
        .with_context(|| format!("frame {}", args.frame.display()))?;
    let text = std::fs::read_to_string(&args.detections)
        .with_context(|| format!("detections {}", args.detections.display()))?;
    let doc: DetectOutput = serde_json::from_str(&text)
        .with_context(|| format!("parsing {}", args.detections.display()))?;
    let entry = select_entry(&doc, args.index, &args.frame)?;
    if entry.width != image.width() || entry.height != image.height() {
        bail!(
            "dimension mismatch: frame is {}x{}, detections were computed on {}x{}",
            image.width(),
            image.height(),
            entry.width,
            entry.height
        );
    }
    for detection in &entry.detections {
        draw_rect(&mut image, &detection.bbox, camp_color(detection.camp));
    }
    image
        .save_png(&args.out)
        .with_context(|| format!("writing {}", args.out.display()))?;
    println!("{}", args.out.display());
    Ok(())
}
