use image::{Rgb, RgbImage};

use super::FundusCircle;

/// Crops the axis-aligned square of side `2 * radius` centred on the fundus
/// and resamples it bilinearly to `target_size` x `target_size`.
///
/// Source samples outside the image read as black, so a disc near a border
/// comes out padded on that side. The fundus centre lands on the centre of
/// the output.
pub fn crop_resize(image: &RgbImage, circle: &FundusCircle, target_size: u32) -> RgbImage {
    let side = 2.0 * circle.radius;
    let scale = side / target_size as f64;
    let left = circle.center_x - circle.radius;
    let top = circle.center_y - circle.radius;

    let mut out = RgbImage::new(target_size, target_size);
    for v in 0..target_size {
        let sy = top + (v as f64 + 0.5) * scale;
        for u in 0..target_size {
            let sx = left + (u as f64 + 0.5) * scale;
            out.put_pixel(u, v, sample_bilinear(image, sx, sy));
        }
    }
    out
}

fn sample_bilinear(image: &RgbImage, x: f64, y: f64) -> Rgb<u8> {
    let (w, h) = (image.width() as i64, image.height() as i64);
    let x0 = x.floor();
    let y0 = y.floor();
    let fx = x - x0;
    let fy = y - y0;
    let (x0, y0) = (x0 as i64, y0 as i64);

    let fetch = |px: i64, py: i64| -> [f64; 3] {
        if px < 0 || py < 0 || px >= w || py >= h {
            [0.0; 3]
        } else {
            let p = image.get_pixel(px as u32, py as u32);
            [p[0] as f64, p[1] as f64, p[2] as f64]
        }
    };

    let a = fetch(x0, y0);
    let b = fetch(x0 + 1, y0);
    let c = fetch(x0, y0 + 1);
    let d = fetch(x0 + 1, y0 + 1);
    let mut px = [0u8; 3];
    for ch in 0..3 {
        let top = a[ch] + (b[ch] - a[ch]) * fx;
        let bottom = c[ch] + (d[ch] - c[ch]) * fx;
        let v = top + (bottom - top) * fy;
        px[ch] = v.round().clamp(0.0, 255.0) as u8;
    }
    Rgb(px)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preprocess::locate_fundus;

    fn disk(w: u32, h: u32, cx: f64, cy: f64, r: f64) -> RgbImage {
        RgbImage::from_fn(w, h, |x, y| {
            let (dx, dy) = (x as f64 - cx, y as f64 - cy);
            if dx * dx + dy * dy <= r * r {
                Rgb([230, 120, 60])
            } else {
                Rgb([0; 3])
            }
        })
    }

    fn bright(p: &Rgb<u8>) -> bool {
        p[0] > 60
    }

    #[test]
    fn disk_is_centred_with_black_corners() {
        let img = disk(400, 400, 150.0, 200.0, 80.0);
        let circle = locate_fundus(&img, 0.1).unwrap();
        let out = crop_resize(&img, &circle, 299);
        assert_eq!(out.dimensions(), (299, 299));
        assert!(bright(out.get_pixel(149, 149)));
        for (x, y) in [(0, 0), (298, 0), (0, 298), (298, 298)] {
            assert_eq!(out.get_pixel(x, y), &Rgb([0, 0, 0]));
        }
        let (mut sx, mut sy, mut n) = (0.0, 0.0, 0.0);
        for (x, y, p) in out.enumerate_pixels() {
            if bright(p) {
                sx += x as f64;
                sy += y as f64;
                n += 1.0;
            }
        }
        assert!((sx / n - 149.0).abs() <= 2.0);
        assert!((sy / n - 149.0).abs() <= 2.0);
    }

    #[test]
    fn identity_crop_reproduces_input() {
        let img = RgbImage::from_fn(299, 299, |x, y| {
            Rgb([(x % 251) as u8 + 4, (y % 251) as u8 + 4, ((x + y) % 200) as u8 + 30])
        });
        let circle = locate_fundus(&img, 0.1).unwrap();
        let out = crop_resize(&img, &circle, 299);
        for (a, b) in img.pixels().zip(out.pixels()) {
            for ch in 0..3 {
                assert!((a[ch] as i32 - b[ch] as i32).abs() <= 1);
            }
        }
    }

    #[test]
    fn disk_near_left_edge_pads_left() {
        // Centre 30 px from the left border with radius 80: the crop window
        // starts 50 px left of the image.
        let img = disk(400, 300, 30.0, 150.0, 80.0);
        let circle = FundusCircle {
            center_x: 30.0,
            center_y: 150.0,
            radius: 80.0,
        };
        let out = crop_resize(&img, &circle, 160);
        // 50 source px of padding map to 50 output px at this scale.
        for y in [40, 80, 120] {
            for x in 0..45 {
                assert_eq!(out.get_pixel(x, y), &Rgb([0, 0, 0]), "({x},{y})");
            }
        }
        assert!(bright(out.get_pixel(80, 80)));
        assert!(bright(out.get_pixel(140, 80)));
    }
}
