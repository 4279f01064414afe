use rand::Rng;

use super::{Label, Patch, PatchPool, Source};
use crate::error::{Error, Result};
use crate::seed;

/// Minimum fraction of a negative patch that must lie on breast tissue.
const MIN_TISSUE_FRACTION: f64 = 0.95;

/// Axis-aligned rectangle in pixel coordinates; `x` is the column.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Rect {
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
}

impl Rect {
    pub fn intersection_area(&self, other: &Rect) -> usize {
        let w = (self.x + self.width).min(other.x + other.width).saturating_sub(self.x.max(other.x));
        let h =
            (self.y + self.height).min(other.y + other.height).saturating_sub(self.y.max(other.y));
        w * h
    }
}

/// A full normalised image with its mass annotations and tissue mask.
#[derive(Clone, Debug, PartialEq)]
pub struct AnnotatedImage {
    pub id: String,
    pub height: usize,
    pub width: usize,
    /// Row-major, values in [0, 1].
    pub pixels: Vec<f32>,
    pub mass_boxes: Vec<Rect>,
    /// Row-major, `true` = breast tissue.
    pub background_mask: Vec<bool>,
}

impl AnnotatedImage {
    pub fn new(
        id: impl Into<String>,
        height: usize,
        width: usize,
        pixels: Vec<f32>,
        mass_boxes: Vec<Rect>,
        background_mask: Vec<bool>,
    ) -> Result<Self> {
        let n = height * width;
        if n == 0 || pixels.len() != n || background_mask.len() != n {
            return Err(Error::invalid("image, mask and declared dimensions disagree"));
        }
        if pixels.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::invalid("image pixels must lie in [0, 1]"));
        }
        if let Some(b) = mass_boxes
            .iter()
            .find(|b| b.width == 0 || b.height == 0 || b.x + b.width > width || b.y + b.height > height)
        {
            return Err(Error::invalid(format!("mass box {b:?} outside {width}×{height} image")));
        }
        Ok(AnnotatedImage { id: id.into(), height, width, pixels, mass_boxes, background_mask })
    }

    fn crop(&self, x0: usize, y0: usize, size: usize) -> Vec<f32> {
        let mut out = Vec::with_capacity(size * size);
        for y in y0..y0 + size {
            out.extend_from_slice(&self.pixels[y * self.width + x0..y * self.width + x0 + size]);
        }
        out
    }
}

/// Summed-area table of the tissue mask.
struct MaskIntegral {
    width: usize,
    table: Vec<usize>,
}

impl MaskIntegral {
    fn new(img: &AnnotatedImage) -> Self {
        let w = img.width + 1;
        let mut table = vec![0usize; (img.height + 1) * w];
        for y in 0..img.height {
            for x in 0..img.width {
                table[(y + 1) * w + x + 1] = img.background_mask[y * img.width + x] as usize
                    + table[y * w + x + 1]
                    + table[(y + 1) * w + x]
                    - table[y * w + x];
            }
        }
        MaskIntegral { width: w, table }
    }

    fn count(&self, r: &Rect) -> usize {
        let w = self.width;
        let (x1, y1) = (r.x + r.width, r.y + r.height);
        self.table[y1 * w + x1] + self.table[r.y * w + r.x]
            - self.table[r.y * w + x1]
            - self.table[y1 * w + r.x]
    }
}

/// One mass patch centred on each annotation box (clamped to the image), and
/// `n_negative` normal patches placed uniformly at random with zero overlap
/// with every box and at least 95 % tissue coverage.
///
/// Negatives use rejection sampling with a budget of `patch_size² × 100`
/// draws.
pub fn extract_patches(
    image: &AnnotatedImage,
    patch_size: usize,
    n_negative: usize,
    seed: u64,
) -> Result<PatchPool> {
    if patch_size == 0 || patch_size > image.height.min(image.width) {
        return Err(Error::invalid(format!(
            "patch size {patch_size} does not fit a {}×{} image",
            image.width, image.height
        )));
    }
    let max_x = image.width - patch_size;
    let max_y = image.height - patch_size;
    let mut patches = Vec::with_capacity(image.mass_boxes.len() + n_negative);
    for (i, b) in image.mass_boxes.iter().enumerate() {
        let cx = b.x + b.width / 2;
        let cy = b.y + b.height / 2;
        let x0 = cx.saturating_sub(patch_size / 2).min(max_x);
        let y0 = cy.saturating_sub(patch_size / 2).min(max_y);
        patches.push(Patch::new(
            format!("{}_mass_{i:04}", image.id),
            Label::Mass,
            Source::Real,
            patch_size,
            image.crop(x0, y0, patch_size),
        )?);
    }

    if n_negative > 0 {
        let integral = MaskIntegral::new(image);
        let min_tissue = (MIN_TISSUE_FRACTION * (patch_size * patch_size) as f64).ceil() as usize;
        let budget = patch_size * patch_size * 100;
        let mut rng = seed::rng(seed);
        let mut found = 0;
        let mut attempts = 0;
        while found < n_negative && attempts < budget {
            attempts += 1;
            let cand = Rect {
                x: rng.random_range(0..=max_x),
                y: rng.random_range(0..=max_y),
                width: patch_size,
                height: patch_size,
            };
            if image.mass_boxes.iter().any(|b| b.intersection_area(&cand) > 0)
                || integral.count(&cand) < min_tissue
            {
                continue;
            }
            patches.push(Patch::new(
                format!("{}_normal_{found:04}", image.id),
                Label::Normal,
                Source::Real,
                patch_size,
                image.crop(cand.x, cand.y, patch_size),
            )?);
            found += 1;
        }
        if found < n_negative {
            return Err(Error::Infeasible { requested: n_negative, found, attempts });
        }
    }
    PatchPool::new(patches)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn image(side: usize, boxes: Vec<Rect>) -> AnnotatedImage {
        let pixels = (0..side * side).map(|i| ((i % 97) as f32) / 96.0).collect();
        AnnotatedImage::new("img", side, side, pixels, boxes, vec![true; side * side]).unwrap()
    }

    #[test]
    fn intersection_area_cases() {
        let a = Rect { x: 0, y: 0, width: 10, height: 10 };
        assert_eq!(a.intersection_area(&Rect { x: 5, y: 5, width: 10, height: 10 }), 25);
        assert_eq!(a.intersection_area(&Rect { x: 10, y: 0, width: 4, height: 4 }), 0);
        assert_eq!(a.intersection_area(&a), 100);
    }

    #[test]
    fn no_negatives_requested() {
        let img = image(64, vec![Rect { x: 10, y: 10, width: 8, height: 8 }]);
        let pool = extract_patches(&img, 32, 0, 1).unwrap();
        assert_eq!(pool.len(), 1);
        assert_eq!(pool.count(Label::Mass), 1);
    }

    #[test]
    fn mass_patch_clamped_at_border() {
        let img = image(64, vec![Rect { x: 0, y: 60, width: 4, height: 4 }]);
        let pool = extract_patches(&img, 32, 0, 1).unwrap();
        let want = img.crop(0, 32, 32);
        assert_eq!(pool.patches()[0].pixels(), &want[..]);
    }

    #[test]
    fn full_image_box_is_infeasible() {
        let img = image(64, vec![Rect { x: 0, y: 0, width: 64, height: 64 }]);
        assert!(matches!(extract_patches(&img, 32, 1, 1), Err(Error::Infeasible { .. })));
    }

    #[test]
    fn mask_limits_placement() {
        let side = 64;
        let mut mask = vec![false; side * side];
        for y in 0..side {
            for x in 32..side {
                mask[y * side + x] = true;
            }
        }
        let pixels = vec![0.5; side * side];
        let img = AnnotatedImage::new("m", side, side, pixels, vec![], mask).unwrap();
        // only x0 = 32 has ≥95 % tissue
        let pool = extract_patches(&img, 32, 5, 9).unwrap();
        assert_eq!(pool.len(), 5);
    }

    #[test]
    fn patch_larger_than_image() {
        let img = image(32, vec![]);
        assert!(extract_patches(&img, 64, 1, 1).is_err());
    }
}
