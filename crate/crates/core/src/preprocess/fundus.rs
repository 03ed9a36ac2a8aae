use image::RgbImage;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest fundus radius, in pixels, that is accepted as a real disc.
pub const MIN_FUNDUS_RADIUS: f64 = 10.0;

/// The fundus disc in source pixel coordinates. Pixel centres sit at integer
/// coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FundusCircle {
    pub center_x: f64,
    pub center_y: f64,
    pub radius: f64,
}

/// Finds the bright fundus disc against the dark background.
///
/// The grayscale image is thresholded at `threshold_fraction` of its
/// maximum, the largest 4-connected bright region is kept, and the circle is
/// fitted to that region's bounding extents: the radius is half the larger
/// extent and the centre is the extents' midpoint. When the region is
/// clipped by one image border along an axis (common for photographs cropped
/// top and bottom), the centre along that axis is measured from the
/// unclipped edge instead.
pub fn locate_fundus(image: &RgbImage, threshold_fraction: f64) -> Result<FundusCircle> {
    let (w, h) = image.dimensions();
    if w == 0 || h == 0 {
        return Err(Error::LocalizationFailed("empty image".into()));
    }
    let (w, h) = (w as usize, h as usize);
    let gray: Vec<f32> = image
        .pixels()
        .map(|p| 0.299 * p[0] as f32 + 0.587 * p[1] as f32 + 0.114 * p[2] as f32)
        .collect();
    let max = gray.iter().copied().fold(0.0f32, f32::max);
    let threshold = threshold_fraction as f32 * max;
    if max <= 0.0 {
        return Err(Error::LocalizationFailed(
            "no pixel exceeds the threshold".into(),
        ));
    }
    let mask: Vec<bool> = gray.iter().map(|&g| g > threshold).collect();

    let region = largest_component(&mask, w, h)
        .ok_or_else(|| Error::LocalizationFailed("no pixel exceeds the threshold".into()))?;

    let extent_x = (region.max_x - region.min_x + 1) as f64;
    let extent_y = (region.max_y - region.min_y + 1) as f64;
    let radius = extent_x.max(extent_y) / 2.0;
    if radius < MIN_FUNDUS_RADIUS {
        return Err(Error::LocalizationFailed(format!(
            "detected radius {radius:.1} px is below {MIN_FUNDUS_RADIUS} px"
        )));
    }

    let center_x = axis_center(region.min_x, region.max_x, w, radius);
    let center_y = axis_center(region.min_y, region.max_y, h, radius);

    Ok(FundusCircle {
        center_x,
        center_y,
        radius,
    })
}

/// Centre along one axis. A region clipped by exactly one border keeps its
/// opposite edge intact, which sits `radius` away from the centre.
fn axis_center(min: usize, max: usize, len: usize, radius: f64) -> f64 {
    let touches_low = min == 0;
    let touches_high = max + 1 == len;
    match (touches_low, touches_high) {
        (true, false) => max as f64 + 0.5 - radius,
        (false, true) => min as f64 - 0.5 + radius,
        _ => (min + max) as f64 / 2.0,
    }
}

struct Region {
    min_x: usize,
    max_x: usize,
    min_y: usize,
    max_y: usize,
}

fn largest_component(mask: &[bool], w: usize, h: usize) -> Option<Region> {
    let mut seen = vec![false; mask.len()];
    let mut stack = Vec::new();
    let mut best: Option<(usize, [usize; 4])> = None;

    for start in 0..mask.len() {
        if !mask[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let mut size = 0usize;
        let mut bounds = [usize::MAX, 0, usize::MAX, 0];
        while let Some(i) = stack.pop() {
            size += 1;
            let (x, y) = (i % w, i / w);
            bounds[0] = bounds[0].min(x);
            bounds[1] = bounds[1].max(x);
            bounds[2] = bounds[2].min(y);
            bounds[3] = bounds[3].max(y);
            let mut visit = |j: usize| {
                if mask[j] && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            };
            if x > 0 {
                visit(i - 1);
            }
            if x + 1 < w {
                visit(i + 1);
            }
            if y > 0 {
                visit(i - w);
            }
            if y + 1 < h {
                visit(i + w);
            }
        }
        if best.is_none_or(|(s, _)| size > s) {
            best = Some((size, bounds));
        }
    }

    best.map(|(_, b)| Region {
        min_x: b[0],
        max_x: b[1],
        min_y: b[2],
        max_y: b[3],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::Rgb;

    fn disk(w: u32, h: u32, cx: f64, cy: f64, r: f64, value: u8) -> RgbImage {
        RgbImage::from_fn(w, h, |x, y| {
            let (dx, dy) = (x as f64 - cx, y as f64 - cy);
            if dx * dx + dy * dy <= r * r {
                Rgb([value; 3])
            } else {
                Rgb([0; 3])
            }
        })
    }

    #[test]
    fn finds_synthetic_disk() {
        let img = disk(400, 400, 150.0, 200.0, 80.0, 255);
        let c = locate_fundus(&img, 0.1).unwrap();
        assert!((c.center_x - 150.0).abs() <= 2.0, "{c:?}");
        assert!((c.center_y - 200.0).abs() <= 2.0, "{c:?}");
        assert!((c.radius - 80.0).abs() <= 2.0, "{c:?}");
    }

    #[test]
    fn black_image_fails() {
        let img = RgbImage::new(64, 64);
        assert!(matches!(
            locate_fundus(&img, 0.1),
            Err(Error::LocalizationFailed(_))
        ));
    }

    #[test]
    fn tiny_region_fails() {
        let img = disk(100, 100, 50.0, 50.0, 4.0, 255);
        assert!(matches!(
            locate_fundus(&img, 0.1),
            Err(Error::LocalizationFailed(_))
        ));
    }

    #[test]
    fn full_frame_white() {
        let img = RgbImage::from_pixel(400, 300, Rgb([255; 3]));
        let c = locate_fundus(&img, 0.1).unwrap();
        assert!((c.radius - 200.0).abs() <= 2.0);
        assert!((c.center_x - 199.5).abs() <= 1.0);
        assert!((c.center_y - 149.5).abs() <= 1.0);
    }

    #[test]
    fn largest_region_wins_over_specks() {
        let mut img = disk(300, 300, 160.0, 140.0, 90.0, 200);
        for (x, y) in [(5, 5), (290, 10), (10, 290)] {
            img.put_pixel(x, y, Rgb([255; 3]));
        }
        let c = locate_fundus(&img, 0.1).unwrap();
        assert!((c.center_x - 160.0).abs() <= 1.0);
        assert!((c.center_y - 140.0).abs() <= 1.0);
    }

    #[test]
    fn clipped_top_and_bottom_keeps_center() {
        // Disc taller than the frame, clipped at the top only.
        let img = disk(400, 260, 200.0, 120.0, 125.0, 220);
        let c = locate_fundus(&img, 0.1).unwrap();
        assert!((c.radius - 125.0).abs() <= 1.5, "{c:?}");
        assert!((c.center_y - 120.0).abs() <= 1.5, "{c:?}");
        assert!((c.center_x - 200.0).abs() <= 1.0, "{c:?}");
    }
}
