//! Synthetic gameplay-frame renderer.
//!
//! Produces frames that exercise every stage of the pipeline — blood bars
//! with camp-colored fills, hero sprites under the bars, a HUD, a skill
//! wheel with circular buttons, shop-style clutter chrome and per-pixel
//! noise — together with exact ground truth. Everything is deterministic
//! from explicit seeds, so corpora regenerate bit-identically and tests
//! can freeze expectations.
//!
//! Scenes are composed in the normalized space (720 px tall) that the
//! detector works in, then upscaled to the requested source resolution.
//! Bar positions are kept even so that 1080p truth coordinates stay
//! integer-exact under the 2/3 normalization scale.

use std::path::Path;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::camp::Camp;
use crate::error::{Error, Result};
use crate::geometry::Rect;
use crate::raster::{resize_bilinear, RasterImage, NORMALIZED_HEIGHT};
use crate::roi::{appearance_rect, skill_region_rect};
use crate::template::{builtin_pixel, BAR_HEIGHT, BAR_WIDTH, DIGIT_RECT, FILL_RECT};

/// Fill color of the player's own bar (green-dominant).
pub const CAMP_FILL_SELF: [u8; 3] = [62, 212, 64];
/// Fill color of friendly bars (blue-dominant).
pub const CAMP_FILL_FRIEND: [u8; 3] = [40, 90, 224];
/// Fill color of enemy bars (red-dominant).
pub const CAMP_FILL_ENEMY: [u8; 3] = [224, 58, 52];
/// Color of the drained part of a bar; all channels sit inside the
/// empty-bar band so fully drained bars classify as camp-unknown.
pub const EMPTY_FILL: [u8; 3] = [85, 85, 88];
/// Interior of shop-style clutter chrome: too bright for the empty band,
/// never channel-dominant, so these detections are always rejected.
pub const CLUTTER_FILL: [u8; 3] = [150, 150, 158];

/// One blood bar to draw, positioned in normalized coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarSpec {
    pub x: i32,
    pub y: i32,
    /// `Unknown` draws a fully drained bar regardless of `fill`.
    pub camp: Camp,
    /// Health fraction in `[0, 1]`.
    pub fill: f64,
    /// Hero sprite drawn in the appearance area under the bar.
    pub label: Option<String>,
}

/// Shop-style clutter: bar chrome with a neutral interior and no sprite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClutterSpec {
    pub x: i32,
    pub y: i32,
}

/// Skill wheel in the bottom-right region; the largest button carries the
/// glyph of the given hero when set.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SkillWheelSpec {
    pub glyph: Option<String>,
}

/// Complete description of one synthetic frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    /// Output (source) resolution; composition happens at 720 px tall.
    pub width: u32,
    pub height: u32,
    pub background_seed: u64,
    /// Per-pixel uniform noise amplitude applied at source resolution.
    pub noise: u8,
    pub noise_seed: u64,
    pub hud: bool,
    pub bars: Vec<BarSpec>,
    pub clutter: Vec<ClutterSpec>,
    pub skill_wheel: Option<SkillWheelSpec>,
}

/// Ground truth for one rendered bar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarTruth {
    /// Bar rectangle in the normalized frame.
    pub normalized_rect: Rect,
    /// Bar rectangle in the source frame.
    pub source_rect: Rect,
    /// Camp the bar was drawn as (`Unknown` for drained bars).
    pub camp: Camp,
    /// Camp the detector is expected to report, or `None` when the fill
    /// is too thin for the verdict to be well defined.
    pub expected: Option<Camp>,
    pub fill: f64,
    pub label: Option<String>,
}

/// Largest skill-wheel button, in normalized frame coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircleTruth {
    pub cx: i32,
    pub cy: i32,
    pub r: u32,
}

/// Everything a benchmark needs to score detections on this frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub width: u32,
    pub height: u32,
    pub bars: Vec<BarTruth>,
    pub wheel: Option<CircleTruth>,
    pub first_skill_label: Option<String>,
    /// Number of clutter chromes drawn (they must yield no detections).
    pub clutter: u32,
}

fn camp_fill(camp: Camp) -> [u8; 3] {
    match camp {
        Camp::SelfHero => CAMP_FILL_SELF,
        Camp::Friend => CAMP_FILL_FRIEND,
        Camp::Enemy => CAMP_FILL_ENEMY,
        Camp::Unknown => EMPTY_FILL,
    }
}

fn put_clamped(img: &mut RasterImage, x: i32, y: i32, rgb: [u8; 3]) {
    if x >= 0 && y >= 0 && (x as u32) < img.width() && (y as u32) < img.height() {
        img.put(x as u32, y as u32, (rgb[0], rgb[1], rgb[2]));
    }
}

/// Draws bar chrome plus an interior chosen by `interior`, a function of
/// the template-local pixel position.
fn draw_bar_chrome(
    canvas: &mut RasterImage,
    x0: i32,
    y0: i32,
    interior: impl Fn(u32, u32) -> [u8; 3],
) {
    for ty in 0..BAR_HEIGHT {
        for tx in 0..BAR_WIDTH {
            let (value, masked) = builtin_pixel(tx, ty);
            let rgb = if masked {
                [value, value, value]
            } else {
                interior(tx, ty)
            };
            put_clamped(canvas, x0 + tx as i32, y0 + ty as i32, rgb);
        }
    }
}

/// Number of fill-area columns painted in the camp color.
pub fn colored_columns(fill: f64) -> u32 {
    ((fill.clamp(0.0, 1.0) * FILL_RECT.w as f64).round() as u32).min(FILL_RECT.w)
}

/// Camp the detector should report for a bar with this paint, or `None`
/// when a single colored column makes the verdict ambiguous.
pub fn expected_camp(camp: Camp, fill: f64) -> Option<Camp> {
    if camp == Camp::Unknown {
        return Some(Camp::Unknown);
    }
    match colored_columns(fill) {
        0 => Some(Camp::Unknown),
        1 => None,
        _ => Some(camp),
    }
}

fn draw_bar(canvas: &mut RasterImage, bar: &BarSpec) {
    let camp = if bar.camp == Camp::Unknown {
        Camp::Unknown
    } else {
        bar.camp
    };
    let colored = if camp == Camp::Unknown {
        0
    } else {
        colored_columns(bar.fill)
    };
    let fill_color = camp_fill(camp);
    draw_bar_chrome(canvas, bar.x, bar.y, |tx, ty| {
        if DIGIT_RECT.contains_point(tx as i32, ty as i32) {
            // Two bright tick marks stand in for the health digits.
            let lx = tx as i32 - DIGIT_RECT.x;
            let ly = ty as i32 - DIGIT_RECT.y;
            if (lx == 3 || lx == 7) && (2..8).contains(&ly) {
                [230, 230, 230]
            } else {
                [55, 55, 55]
            }
        } else {
            let lx = (tx as i32 - FILL_RECT.x) as u32;
            if lx < colored {
                fill_color
            } else {
                EMPTY_FILL
            }
        }
    });
}

fn draw_clutter(canvas: &mut RasterImage, clutter: &ClutterSpec) {
    draw_bar_chrome(canvas, clutter.x, clutter.y, |_, _| CLUTTER_FILL);
}

fn fill_rect(canvas: &mut RasterImage, rect: &Rect, rgb: [u8; 3]) {
    for y in rect.y..rect.y + rect.h as i32 {
        for x in rect.x..rect.x + rect.w as i32 {
            put_clamped(canvas, x, y, rgb);
        }
    }
}

/// Draws an anti-aliased bright ring, the edge feature the circle
/// detector votes on.
fn draw_ring(canvas: &mut RasterImage, cx: i32, cy: i32, r: u32, brightness: u8) {
    let thickness = 2.0;
    let r = r as f64;
    let span = (r + thickness + 1.0).ceil() as i32;
    for dy in -span..=span {
        for dx in -span..=span {
            let dist = ((dx * dx + dy * dy) as f64).sqrt();
            let delta = (dist - r).abs();
            if delta <= thickness {
                let weight = 1.0 - (delta / thickness) * 0.3;
                let v = (brightness as f64 * weight) as u8;
                put_clamped(canvas, cx + dx, cy + dy, [v, v, v]);
            }
        }
    }
}

/// Deterministic hero sprite: a colored block mosaic derived from the
/// label alone, so the same name always renders the same glyph.
pub fn glyph_sprite(label: &str, size: u32) -> RasterImage {
    let mut seed = [0u8; 32];
    for (i, b) in label.bytes().enumerate() {
        seed[i % 32] = seed[i % 32].wrapping_mul(31).wrapping_add(b);
    }
    seed[31] ^= label.len() as u8;
    let mut rng = ChaCha8Rng::from_seed(seed);
    const GRID: u32 = 6;
    let mut img = RasterImage::filled(size.max(GRID), size.max(GRID), 3, 0);
    let cell = img.width() / GRID;
    let mut colors = [(0u8, 0u8, 0u8); (GRID * GRID) as usize];
    for c in &mut colors {
        *c = (
            rng.gen_range(30..=235),
            rng.gen_range(30..=235),
            rng.gen_range(30..=235),
        );
    }
    for y in 0..img.height() {
        for x in 0..img.width() {
            let gx = (x / cell).min(GRID - 1);
            let gy = (y / cell).min(GRID - 1);
            img.put(x, y, colors[(gy * GRID + gx) as usize]);
        }
    }
    img
}

fn blit(canvas: &mut RasterImage, sprite: &RasterImage, x0: i32, y0: i32) {
    let last = sprite.channels() - 1;
    for y in 0..sprite.height() {
        for x in 0..sprite.width() {
            let rgb = [
                sprite.get(x, y, 0),
                sprite.get(x, y, 1.min(last)),
                sprite.get(x, y, 2.min(last)),
            ];
            put_clamped(canvas, x0 + x as i32, y0 + y as i32, rgb);
        }
    }
}

/// Sprite size drawn inside the appearance area.
pub const SPRITE_SIZE: u32 = 120;
/// Glyph size drawn inside the largest skill-wheel button.
const SKILL_GLYPH_SIZE: u32 = 64;
/// Largest wheel button: center and radius in skill-region-local
/// coordinates, chosen to sit inside the region's lower-left quadrant.
const WHEEL_MAIN: (i32, i32, u32) = (90, 270, 48);

fn draw_background(canvas: &mut RasterImage, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (w, h) = (canvas.width(), canvas.height());
    for y in 0..h {
        let v = (34 + y * 36 / h) as u8;
        for x in 0..w {
            canvas.put(x, y, (v, v, v.saturating_add(4)));
        }
    }
    // A few large, soft blobs so the background is not flat.
    for _ in 0..4 {
        let cx = rng.gen_range(0..w as i32);
        let cy = rng.gen_range(0..h as i32);
        let radius = rng.gen_range(60..180) as f64;
        let gain = rng.gen_range(8..22) as f64;
        let x0 = (cx - radius as i32).max(0);
        let x1 = (cx + radius as i32).min(w as i32 - 1);
        let y0 = (cy - radius as i32).max(0);
        let y1 = (cy + radius as i32).min(h as i32 - 1);
        for y in y0..=y1 {
            for x in x0..=x1 {
                let d2 = ((x - cx) * (x - cx) + (y - cy) * (y - cy)) as f64;
                let falloff = 1.0 - (d2.sqrt() / radius);
                if falloff > 0.0 {
                    for c in 0..3 {
                        let v = canvas.get(x as u32, y as u32, c) as f64 + gain * falloff;
                        canvas.set(x as u32, y as u32, c, v.min(255.0) as u8);
                    }
                }
            }
        }
    }
}

fn draw_hud(canvas: &mut RasterImage) {
    let w = canvas.width() as i32;
    fill_rect(canvas, &Rect::new(0, 0, w as u32, 28), [48, 48, 54]);
    // Minimap panel, top-left.
    fill_rect(canvas, &Rect::new(8, 36, 150, 150), [38, 44, 52]);
    for i in 0..6 {
        let x = 20 + (i % 3) * 44;
        let y = 52 + (i / 3) * 58;
        fill_rect(canvas, &Rect::new(x, y, 8, 8), [92, 110, 96]);
    }
    // Gold/score panel, bottom center.
    fill_rect(canvas, &Rect::new(w / 2 - 160, 690, 320, 24), [54, 50, 44]);
}

fn draw_skill_wheel(canvas: &mut RasterImage, region: &Rect, wheel: &SkillWheelSpec) {
    // Dark backing panel keeps ring edges strong regardless of background.
    fill_rect(canvas, region, [40, 40, 46]);
    let (mx, my, mr) = WHEEL_MAIN;
    draw_ring(canvas, region.x + mx, region.y + my, mr, 225);
    // Smaller buttons outside the lower-left quadrant.
    draw_ring(canvas, region.x + 220, region.y + 250, 24, 210);
    draw_ring(canvas, region.x + 280, region.y + 170, 24, 210);
    if let Some(label) = &wheel.glyph {
        let glyph = glyph_sprite(label, SKILL_GLYPH_SIZE);
        blit(
            canvas,
            &glyph,
            region.x + mx - SKILL_GLYPH_SIZE as i32 / 2,
            region.y + my - SKILL_GLYPH_SIZE as i32 / 2,
        );
    }
}

fn apply_noise(img: &mut RasterImage, amplitude: u8, seed: u64) {
    if amplitude == 0 {
        return;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut noise = vec![0u8; img.pixels().len()];
    rng.fill_bytes(&mut noise);
    let m = 2 * amplitude as i16 + 1;
    for (p, n) in img.pixels_mut().iter_mut().zip(&noise) {
        let delta = (*n as i16 % m) - amplitude as i16;
        *p = (*p as i16 + delta).clamp(0, 255) as u8;
    }
}

/// Maps a normalized coordinate to source resolution (exact when the
/// product divides evenly, which corpus layouts guarantee).
fn to_source(v: i32, height: u32) -> i32 {
    ((v as i64 * height as i64 + (NORMALIZED_HEIGHT / 2) as i64) / NORMALIZED_HEIGHT as i64) as i32
}

/// Renders a scene to its source resolution plus exact ground truth.
pub fn render(spec: &SceneSpec) -> Result<(RasterImage, GroundTruth)> {
    if spec.width == 0 || spec.height == 0 {
        return Err(Error::invalid("scene dimensions must be nonzero"));
    }
    let scale = NORMALIZED_HEIGHT as f64 / spec.height as f64;
    let norm_w = ((spec.width as f64 * scale).round() as u32).max(1);
    let norm_h = NORMALIZED_HEIGHT;
    let mut canvas = RasterImage::filled(norm_w, norm_h, 3, 0);

    draw_background(&mut canvas, spec.background_seed);
    if spec.hud {
        draw_hud(&mut canvas);
    }
    let region = skill_region_rect((norm_w, norm_h));
    if let Some(wheel) = &spec.skill_wheel {
        draw_skill_wheel(&mut canvas, &region, wheel);
    }
    for clutter in &spec.clutter {
        draw_clutter(&mut canvas, clutter);
    }
    // Sprites first, bars second, so chrome is never overdrawn.
    for bar in &spec.bars {
        if let Some(label) = &bar.label {
            let bar_rect = Rect::new(bar.x, bar.y, BAR_WIDTH, BAR_HEIGHT);
            let area = appearance_rect(&bar_rect, (norm_w, norm_h), 8);
            let sprite = glyph_sprite(label, SPRITE_SIZE);
            let (acx, acy) = area.center();
            blit(
                &mut canvas,
                &sprite,
                acx as i32 - SPRITE_SIZE as i32 / 2,
                acy as i32 - SPRITE_SIZE as i32 / 2,
            );
        }
    }
    for bar in &spec.bars {
        draw_bar(&mut canvas, bar);
    }

    let mut source = if spec.height == norm_h && spec.width == norm_w {
        canvas
    } else {
        resize_bilinear(&canvas, spec.width, spec.height)?
    };
    apply_noise(&mut source, spec.noise, spec.noise_seed);

    let bars = spec
        .bars
        .iter()
        .map(|bar| BarTruth {
            normalized_rect: Rect::new(bar.x, bar.y, BAR_WIDTH, BAR_HEIGHT),
            source_rect: Rect::new(
                to_source(bar.x, spec.height),
                to_source(bar.y, spec.height),
                to_source(BAR_WIDTH as i32, spec.height) as u32,
                to_source(BAR_HEIGHT as i32, spec.height) as u32,
            ),
            camp: bar.camp,
            expected: expected_camp(bar.camp, bar.fill),
            fill: if bar.camp == Camp::Unknown {
                0.0
            } else {
                bar.fill
            },
            label: bar.label.clone(),
        })
        .collect();
    let wheel = spec.skill_wheel.as_ref().map(|_| CircleTruth {
        cx: region.x + WHEEL_MAIN.0,
        cy: region.y + WHEEL_MAIN.1,
        r: WHEEL_MAIN.2,
    });
    let truth = GroundTruth {
        width: spec.width,
        height: spec.height,
        bars,
        wheel,
        first_skill_label: spec.skill_wheel.as_ref().and_then(|w| w.glyph.clone()),
        clutter: spec.clutter.len() as u32,
    };
    Ok((source, truth))
}

/// A ready-made appearance-style crop (sprite over a varied background
/// with noise), convenient for training and evaluating classifiers
/// without rendering whole scenes.
pub fn sprite_sample(label: &str, size: u32, seed: u64) -> RasterImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut img = RasterImage::filled(size, size, 3, 0);
    let base = rng.gen_range(30..70) as u8;
    for y in 0..size {
        let v = base.saturating_add((y * 24 / size) as u8);
        for x in 0..size {
            img.put(x, y, (v, v, v.saturating_add(3)));
        }
    }
    let sprite_size = (size * 3 / 4).max(1);
    let sprite = glyph_sprite(label, sprite_size);
    let off = (size - sprite_size) as i32 / 2;
    blit(&mut img, &sprite, off, off);
    apply_noise(&mut img, 8, seed.wrapping_add(0x9e37_79b9));
    img
}

/// Corpus generation parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusParams {
    pub scenes: usize,
    pub seed: u64,
    /// Source resolutions cycled through scene by scene. The defaults mix
    /// 16:9, 4:3 and 19.5:9 aspect ratios; heights of 720 and 1080 keep
    /// ground-truth source rectangles integer-exact.
    pub dims: Vec<(u32, u32)>,
    /// Hero labels assigned to bars round-robin via the scene RNG.
    pub labels: Vec<String>,
    /// Probability that a scene also carries shop-style clutter chrome.
    pub clutter_probability: f64,
}

impl Default for CorpusParams {
    fn default() -> Self {
        CorpusParams {
            scenes: 50,
            seed: 7,
            dims: vec![(1280, 720), (1920, 1080), (960, 720), (1560, 720)],
            labels: vec![
                "arthur".into(),
                "daji".into(),
                "luban".into(),
                "libai".into(),
                "zhuangzhou".into(),
            ],
            clutter_probability: 0.3,
        }
    }
}

/// Zones (in normalized coordinates) that bars must stay out of so their
/// sprites never collide with the HUD or skill wheel.
fn position_allowed(norm_w: u32, x: i32, y: i32) -> bool {
    if x < 230 && y < 250 {
        return false; // minimap and top strip
    }
    // Left edge of the skill wheel region for this width (see
    // `skill_region_rect`), minus room for the appearance sprite.
    let wheel_left = (norm_w as i32 / 2 + 240).min(norm_w as i32 - 360);
    if x >= wheel_left - 240 && y >= 110 {
        return false; // skill wheel quadrant-side
    }
    x >= 16 && x + 228 <= norm_w as i32 && (40..=500).contains(&y)
}

fn far_enough(placed: &[(i32, i32)], x: i32, y: i32) -> bool {
    placed
        .iter()
        .all(|&(px, py)| (x - px).abs() >= 210 || (y - py).abs() >= 210)
}

/// Deterministically derives the spec of corpus scene `index`. Scene
/// generation is independent per index, so corpora can be rendered in
/// parallel and still match the sequential output byte for byte.
pub fn corpus_scene_spec(params: &CorpusParams, index: usize) -> SceneSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(
        params
            .seed
            .wrapping_mul(0x9e37_79b9_7f4a_7c15)
            .wrapping_add(index as u64),
    );
    let (width, height) = params.dims[index % params.dims.len().max(1)];
    let norm_w = (width as u64 * NORMALIZED_HEIGHT as u64 / height as u64) as u32;

    let mut placed: Vec<(i32, i32)> = Vec::new();
    let mut bars = Vec::new();
    let with_self = rng.gen_bool(0.7);
    // Up to ten heroes share one frame (two teams of five); narrow aspect
    // ratios cap out earlier when the placement zones fill up.
    let target = rng.gen_range(0..=10usize);
    for slot in 0..target {
        let mut found = None;
        for _ in 0..200 {
            // Even coordinates keep 1080p source rectangles integer-exact.
            let x = rng.gen_range(16..(norm_w as i32 - 228)) & !1;
            let y = rng.gen_range(40..=500) & !1;
            if position_allowed(norm_w, x, y) && far_enough(&placed, x, y) {
                found = Some((x, y));
                break;
            }
        }
        let Some((x, y)) = found else { break };
        placed.push((x, y));
        let camp = if slot == 0 && with_self {
            Camp::SelfHero
        } else {
            match rng.gen_range(0..3) {
                0 => Camp::Friend,
                1 => Camp::Enemy,
                _ => Camp::Unknown,
            }
        };
        let fill = if camp == Camp::Unknown {
            0.0
        } else {
            rng.gen_range(0.25..=1.0)
        };
        let label = if camp == Camp::Unknown || params.labels.is_empty() {
            None
        } else {
            Some(params.labels[rng.gen_range(0..params.labels.len())].clone())
        };
        bars.push(BarSpec {
            x,
            y,
            camp,
            fill,
            label,
        });
    }

    let mut clutter = Vec::new();
    if rng.gen_bool(params.clutter_probability) {
        for _ in 0..200 {
            let x = rng.gen_range(16..(norm_w as i32 - 228)) & !1;
            let y = rng.gen_range(40..=500) & !1;
            if position_allowed(norm_w, x, y) && far_enough(&placed, x, y) {
                placed.push((x, y));
                clutter.push(ClutterSpec { x, y });
                break;
            }
        }
    }

    let skill_wheel = if bars.first().map_or(false, |b| b.camp == Camp::SelfHero) {
        Some(SkillWheelSpec {
            glyph: bars[0].label.clone(),
        })
    } else {
        None
    };

    SceneSpec {
        width,
        height,
        background_seed: rng.gen(),
        noise: 8,
        noise_seed: rng.gen(),
        hud: true,
        bars,
        clutter,
        skill_wheel,
    }
}

/// A shop screen: clutter chrome everywhere, no real bars. The detector
/// must return nothing for these frames.
pub fn shop_scene(seed: u64) -> SceneSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut placed: Vec<(i32, i32)> = Vec::new();
    let mut clutter = Vec::new();
    while clutter.len() < 3 {
        let x = rng.gen_range(16..(1280 - 228)) & !1;
        let y = rng.gen_range(40..=500) & !1;
        if position_allowed(1280, x, y) && far_enough(&placed, x, y) {
            placed.push((x, y));
            clutter.push(ClutterSpec { x, y });
        }
    }
    SceneSpec {
        width: 1280,
        height: 720,
        background_seed: seed ^ 0xabcd,
        noise: 8,
        noise_seed: seed ^ 0x1234,
        hud: true,
        bars: Vec::new(),
        clutter,
        skill_wheel: None,
    }
}

/// Per-frame spec generator for a synthetic "video": the same self hero
/// every frame with drifting position and health, plus rotating friends
/// and enemies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoParams {
    pub frames: usize,
    pub seed: u64,
    pub height: u32,
    pub self_label: String,
    pub friend_labels: Vec<String>,
    pub enemy_labels: Vec<String>,
}

impl Default for VideoParams {
    fn default() -> Self {
        VideoParams {
            frames: 60,
            seed: 11,
            height: 720,
            self_label: "arthur".into(),
            friend_labels: vec!["daji".into(), "luban".into()],
            enemy_labels: vec!["libai".into(), "zhuangzhou".into()],
        }
    }
}

/// Deterministically derives frame `index` of a synthetic video.
pub fn video_scene_spec(params: &VideoParams, index: usize) -> SceneSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(
        params
            .seed
            .wrapping_mul(0x2545_f491_4f6c_dd1d)
            .wrapping_add(index as u64),
    );
    let height = params.height;
    let width = height * 16 / 9;
    let norm_w = (width as u64 * NORMALIZED_HEIGHT as u64 / height as u64) as u32;

    // The self hero drifts around mid-screen.
    let sx = (360 + ((index as i32 * 14) % 200)) & !1;
    let sy = (220 + ((index as i32 * 9) % 120)) & !1;
    let mut placed = vec![(sx, sy)];
    let mut bars = vec![BarSpec {
        x: sx,
        y: sy,
        camp: Camp::SelfHero,
        fill: 0.4 + 0.6 * ((index % 17) as f64 / 16.0),
        label: Some(params.self_label.clone()),
    }];

    let add = |camp: Camp,
               label: &str,
               rng: &mut ChaCha8Rng,
               placed: &mut Vec<(i32, i32)>,
               bars: &mut Vec<BarSpec>| {
        for _ in 0..200 {
            let x = rng.gen_range(16..(norm_w as i32 - 228)) & !1;
            let y = rng.gen_range(40..=500) & !1;
            if position_allowed(norm_w, x, y) && far_enough(placed, x, y) {
                placed.push((x, y));
                bars.push(BarSpec {
                    x,
                    y,
                    camp,
                    fill: rng.gen_range(0.25..=1.0),
                    label: Some(label.to_string()),
                });
                return;
            }
        }
    };
    if !params.friend_labels.is_empty() && rng.gen_bool(0.8) {
        let label = params.friend_labels[index % params.friend_labels.len()].clone();
        add(Camp::Friend, &label, &mut rng, &mut placed, &mut bars);
    }
    if !params.enemy_labels.is_empty() && rng.gen_bool(0.8) {
        let label = params.enemy_labels[index % params.enemy_labels.len()].clone();
        add(Camp::Enemy, &label, &mut rng, &mut placed, &mut bars);
    }

    SceneSpec {
        width,
        height,
        background_seed: rng.gen(),
        noise: 8,
        noise_seed: rng.gen(),
        hud: true,
        bars,
        clutter: Vec::new(),
        skill_wheel: Some(SkillWheelSpec {
            glyph: Some(params.self_label.clone()),
        }),
    }
}

/// One corpus entry: the image file name (relative to the manifest) and
/// its ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneRecord {
    pub image: String,
    pub truth: GroundTruth,
}

/// Manifest written next to the rendered images.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub schema: u32,
    pub seed: u64,
    pub scenes: Vec<SceneRecord>,
}

/// Renders a whole corpus into `dir` as `frames/NNNN.png` files plus a
/// `manifest.json` with ground truth.
pub fn render_corpus(dir: impl AsRef<Path>, params: &CorpusParams) -> Result<CorpusManifest> {
    let dir = dir.as_ref();
    let frames_dir = dir.join("frames");
    std::fs::create_dir_all(&frames_dir).map_err(|e| Error::io(&frames_dir, e))?;
    let mut scenes = Vec::with_capacity(params.scenes);
    for index in 0..params.scenes {
        let spec = corpus_scene_spec(params, index);
        let (image, truth) = render(&spec)?;
        let name = format!("frames/{index:04}.png");
        image.save_png(dir.join(&name))?;
        scenes.push(SceneRecord { image: name, truth });
    }
    let manifest = CorpusManifest {
        schema: 1,
        seed: params.seed,
        scenes,
    };
    let path = dir.join("manifest.json");
    let json = serde_json::to_vec_pretty(&manifest)?;
    std::fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::camp::{classify_camp, leftmost_mean_color, CampVerdict};
    use crate::pipeline::Detector;
    use crate::template::{BloodBarTemplate, PeakCandidate};

    fn strip_color(img: &RasterImage, rect: &Rect) -> (f64, f64, f64) {
        let template = BloodBarTemplate::builtin();
        let det = PeakCandidate {
            x: rect.x as u32,
            y: rect.y as u32,
            value: 1.0,
            score: 1.0,
            is_real_detection: true,
        };
        leftmost_mean_color(img, &det, &template, 4).unwrap()
    }

    fn plain_bar(x: i32, y: i32, camp: Camp, fill: f64) -> SceneSpec {
        SceneSpec {
            width: 1280,
            height: 720,
            background_seed: 3,
            noise: 0,
            noise_seed: 0,
            hud: false,
            bars: vec![BarSpec {
                x,
                y,
                camp,
                fill,
                label: None,
            }],
            clutter: Vec::new(),
            skill_wheel: None,
        }
    }

    #[test]
    fn render_is_deterministic() {
        let spec = corpus_scene_spec(&CorpusParams::default(), 0);
        let (a, _) = render(&spec).unwrap();
        let (b, _) = render(&spec).unwrap();
        assert_eq!(a.pixels(), b.pixels());
    }

    #[test]
    fn fill_colors_split_at_the_rounded_column() {
        let spec = plain_bar(200, 300, Camp::Enemy, 0.5);
        let (img, _) = render(&spec).unwrap();
        // 25 colored columns: template-local fill columns 0..25 colored.
        let y = 300 + FILL_RECT.y as u32 + 2;
        let colored_x = (200 + FILL_RECT.x + 24) as u32;
        let empty_x = (200 + FILL_RECT.x + 25) as u32;
        assert_eq!(
            [
                img.get(colored_x, y, 0),
                img.get(colored_x, y, 1),
                img.get(colored_x, y, 2)
            ],
            CAMP_FILL_ENEMY
        );
        assert_eq!(
            [
                img.get(empty_x, y, 0),
                img.get(empty_x, y, 1),
                img.get(empty_x, y, 2)
            ],
            EMPTY_FILL
        );
    }

    #[test]
    fn expected_camp_follows_colored_columns() {
        assert_eq!(expected_camp(Camp::Friend, 0.0), Some(Camp::Unknown));
        assert_eq!(expected_camp(Camp::Friend, 0.02), None); // one column
        assert_eq!(expected_camp(Camp::Friend, 0.04), Some(Camp::Friend));
        assert_eq!(expected_camp(Camp::Friend, 1.0), Some(Camp::Friend));
        assert_eq!(expected_camp(Camp::Unknown, 0.9), Some(Camp::Unknown));
    }

    #[test]
    fn rendered_strip_classifies_as_painted_camp() {
        for (camp, fill, want) in [
            (Camp::SelfHero, 1.0, Camp::SelfHero),
            (Camp::Friend, 0.5, Camp::Friend),
            (Camp::Enemy, 0.25, Camp::Enemy),
            (Camp::Unknown, 0.0, Camp::Unknown),
        ] {
            let spec = plain_bar(400, 200, camp, fill);
            let (img, truth) = render(&spec).unwrap();
            let rgb = strip_color(&img, &truth.bars[0].normalized_rect);
            assert_eq!(
                classify_camp(rgb.0, rgb.1, rgb.2),
                CampVerdict::Camp(want),
                "camp {camp:?}"
            );
        }
    }

    #[test]
    fn clutter_strip_is_rejected() {
        let mut spec = plain_bar(400, 200, Camp::Enemy, 1.0);
        spec.bars.clear();
        spec.clutter.push(ClutterSpec { x: 400, y: 200 });
        let (img, _) = render(&spec).unwrap();
        let rect = Rect::new(400, 200, BAR_WIDTH, BAR_HEIGHT);
        let rgb = strip_color(&img, &rect);
        assert_eq!(classify_camp(rgb.0, rgb.1, rgb.2), CampVerdict::Rejected);
    }

    #[test]
    fn glyph_sprites_are_stable_and_distinct() {
        let a1 = glyph_sprite("arthur", 120);
        let a2 = glyph_sprite("arthur", 120);
        let b = glyph_sprite("daji", 120);
        assert_eq!(a1.pixels(), a2.pixels());
        assert_ne!(a1.pixels(), b.pixels());
    }

    #[test]
    fn corpus_scene_specs_are_deterministic_and_in_bounds() {
        let params = CorpusParams::default();
        for index in 0..20 {
            let a = corpus_scene_spec(&params, index);
            let b = corpus_scene_spec(&params, index);
            assert_eq!(a, b);
            let norm_w = (a.width as u64 * 720 / a.height as u64) as i32;
            for bar in &a.bars {
                assert!(bar.x >= 0 && bar.x + 64 <= norm_w);
                assert!(bar.y >= 0 && bar.y + 16 <= 720);
                assert_eq!(bar.x % 2, 0, "even x keeps 1080p truth exact");
                assert_eq!(bar.y % 2, 0);
            }
        }
    }

    #[test]
    fn source_rect_truth_is_exact_at_1080p() {
        let mut spec = plain_bar(400, 200, Camp::Enemy, 1.0);
        spec.width = 1920;
        spec.height = 1080;
        let (_, truth) = render(&spec).unwrap();
        assert_eq!(truth.bars[0].source_rect, Rect::new(600, 300, 96, 24));
        assert_eq!(truth.bars[0].normalized_rect, Rect::new(400, 200, 64, 16));
    }

    #[test]
    fn shop_scene_has_only_clutter() {
        let spec = shop_scene(5);
        assert!(spec.bars.is_empty());
        assert_eq!(spec.clutter.len(), 3);
    }

    #[test]
    fn corpus_rendering_writes_images_and_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let params = CorpusParams {
            scenes: 3,
            seed: 21,
            dims: vec![(1280, 720)],
            ..CorpusParams::default()
        };
        let manifest = render_corpus(dir.path(), &params).unwrap();
        assert_eq!(manifest.scenes.len(), 3);
        for record in &manifest.scenes {
            assert!(
                record.image.starts_with("frames/"),
                "layout: {}",
                record.image
            );
            assert!(dir.path().join(&record.image).exists());
        }
        let raw = std::fs::read(dir.path().join("manifest.json")).unwrap();
        let parsed: CorpusManifest = serde_json::from_slice(&raw).unwrap();
        assert_eq!(parsed, manifest);
    }

    #[test]
    fn detector_finds_rendered_bars_with_correct_camps() {
        let spec = SceneSpec {
            width: 1280,
            height: 720,
            background_seed: 9,
            noise: 8,
            noise_seed: 42,
            hud: true,
            bars: vec![
                BarSpec {
                    x: 300,
                    y: 160,
                    camp: Camp::SelfHero,
                    fill: 0.8,
                    label: None,
                },
                BarSpec {
                    x: 600,
                    y: 420,
                    camp: Camp::Enemy,
                    fill: 0.4,
                    label: None,
                },
            ],
            clutter: Vec::new(),
            skill_wheel: None,
        };
        let (img, truth) = render(&spec).unwrap();
        let detector = Detector::with_defaults();
        let frame = detector.detect(&img).unwrap();
        assert_eq!(
            frame.detections.len(),
            2,
            "detections: {:?}",
            frame.detections
        );
        for bar in &truth.bars {
            let (tx, ty) = bar.normalized_rect.center();
            let hit = frame.detections.iter().find(|d| {
                let (dx, dy) = d.bar.center();
                (dx - tx).abs() <= 2.0 && (dy - ty).abs() <= 2.0
            });
            let hit = hit.unwrap_or_else(|| panic!("no detection near {:?}", bar.normalized_rect));
            assert_eq!(Some(hit.camp), bar.expected);
        }
    }

    #[test]
    fn video_frames_always_carry_the_self_hero() {
        let params = VideoParams::default();
        for index in [0usize, 7, 33] {
            let spec = video_scene_spec(&params, index);
            assert_eq!(spec.bars[0].camp, Camp::SelfHero);
            assert_eq!(spec.bars[0].label.as_deref(), Some("arthur"));
            assert!(spec.skill_wheel.is_some());
            assert_eq!(video_scene_spec(&params, index), spec);
        }
    }
}
