//! Axis-aligned rectangles and circles used throughout the pipeline.

use serde::{Deserialize, Serialize};

/// Axis-aligned rectangle. `x`/`y` are the top-left corner and may be
/// negative while a rectangle is still being positioned; width and height
/// are always at least 1 for a meaningful region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rect {
    pub x: i32,
    pub y: i32,
    pub w: u32,
    pub h: u32,
}

impl Rect {
    pub fn new(x: i32, y: i32, w: u32, h: u32) -> Self {
        Rect { x, y, w, h }
    }

    /// One past the rightmost column.
    pub fn right(&self) -> i64 {
        self.x as i64 + self.w as i64
    }

    /// One past the bottom row.
    pub fn bottom(&self) -> i64 {
        self.y as i64 + self.h as i64
    }

    /// Center with half-pixel precision.
    pub fn center(&self) -> (f64, f64) {
        (
            self.x as f64 + self.w as f64 / 2.0,
            self.y as f64 + self.h as f64 / 2.0,
        )
    }

    /// Intersection with another rectangle, `None` when they do not overlap.
    pub fn intersect(&self, other: &Rect) -> Option<Rect> {
        let x0 = self.x.max(other.x) as i64;
        let y0 = self.y.max(other.y) as i64;
        let x1 = self.right().min(other.right());
        let y1 = self.bottom().min(other.bottom());
        if x1 <= x0 || y1 <= y0 {
            return None;
        }
        Some(Rect::new(
            x0 as i32,
            y0 as i32,
            (x1 - x0) as u32,
            (y1 - y0) as u32,
        ))
    }

    /// Shifts the rectangle the minimal distance needed to fit inside a
    /// `frame_w` x `frame_h` frame, keeping its size. If an axis of the
    /// frame is smaller than the rectangle, that axis is pinned to 0 and
    /// clipped to the frame extent.
    pub fn shift_into(&self, frame_w: u32, frame_h: u32) -> Rect {
        let fit = |pos: i32, len: u32, frame: u32| -> (i32, u32) {
            if len >= frame {
                (0, frame)
            } else {
                let max_pos = (frame - len) as i32;
                (pos.clamp(0, max_pos), len)
            }
        };
        let (x, w) = fit(self.x, self.w, frame_w);
        let (y, h) = fit(self.y, self.h, frame_h);
        Rect::new(x, y, w, h)
    }

    /// True when the point lies inside the rectangle.
    pub fn contains_point(&self, x: i32, y: i32) -> bool {
        x >= self.x && y >= self.y && (x as i64) < self.right() && (y as i64) < self.bottom()
    }

    /// True when `other` lies fully inside `self`.
    pub fn contains_rect(&self, other: &Rect) -> bool {
        other.x >= self.x
            && other.y >= self.y
            && other.right() <= self.right()
            && other.bottom() <= self.bottom()
    }
}

/// A circle hypothesis from the Hough vote: center, radius and the number
/// of accumulator votes it received.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Circle {
    pub cx: i32,
    pub cy: i32,
    pub r: u32,
    pub votes: u32,
}
