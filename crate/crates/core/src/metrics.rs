//! Patchwise evaluation of pixelwise predictions: morphological hole filling,
//! pixel-to-patch voting and the diseased-class F1 score.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{expect_shape, LabelGrid, PatchLabel, PixelMask};

/// Side of the square structuring element used by default.
pub const HOLE_FILL_SIZE: usize = 5;

/// Default fraction of set pixels needed to call a patch diseased.
pub const PATCH_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum HoleFillMode {
    /// Binary closing with a square all-ones element.
    #[default]
    Closing,
    /// Fill background components not 4-connected to the border.
    Flood,
}

/// Closing with the 5x5 element; see [`closing`].
pub fn hole_fill(mask: &PixelMask) -> PixelMask {
    closing(mask, HOLE_FILL_SIZE)
}

pub fn hole_fill_with(mask: &PixelMask, mode: HoleFillMode) -> PixelMask {
    match mode {
        HoleFillMode::Closing => hole_fill(mask),
        HoleFillMode::Flood => flood_fill_holes(mask),
    }
}

/// Dilation followed by erosion with a `size x size` square of ones (`size`
/// odd). Pixels beyond the image are background; the dilation is allowed to
/// spill into a margin around the image so the result is the closing of the
/// mask in the unbounded plane, restricted to the image. It is therefore
/// extensive and idempotent.
pub fn closing(mask: &PixelMask, size: usize) -> PixelMask {
    assert!(size % 2 == 1, "structuring element size must be odd");
    let k = size / 2;
    let (n, m) = mask.shape();
    let (cn, cm) = (n + 2 * k, m + 2 * k);

    let mut canvas = vec![false; cn * cm];
    for r in 0..n {
        for c in 0..m {
            canvas[(r + k) * cm + c + k] = mask.get(r, c);
        }
    }

    // dilation, separable: horizontal then vertical maximum
    let mut horiz = vec![false; cn * cm];
    for r in 0..cn {
        for c in 0..cm {
            let lo = c.saturating_sub(k);
            let hi = (c + k).min(cm - 1);
            horiz[r * cm + c] = canvas[r * cm + lo..=r * cm + hi].iter().any(|&b| b);
        }
    }
    let mut dilated = vec![false; cn * cm];
    for r in 0..cn {
        let lo = r.saturating_sub(k);
        let hi = (r + k).min(cn - 1);
        for c in 0..cm {
            dilated[r * cm + c] = (lo..=hi).any(|rr| horiz[rr * cm + c]);
        }
    }

    // erosion, only needed at image pixels; their windows stay on the canvas
    let mut horiz_min = vec![false; cn * m];
    for r in 0..cn {
        for c in 0..m {
            let cc = c + k;
            horiz_min[r * m + c] = dilated[r * cm + cc - k..=r * cm + cc + k]
                .iter()
                .all(|&b| b);
        }
    }
    let mut bits = Vec::with_capacity(n * m);
    for r in 0..n {
        let rr = r + k;
        for c in 0..m {
            bits.push((rr - k..=rr + k).all(|q| horiz_min[q * m + c]));
        }
    }
    PixelMask::new(n, m, bits).expect("shape preserved")
}

/// Sets every background pixel that cannot reach the border through
/// 4-connected background.
pub fn flood_fill_holes(mask: &PixelMask) -> PixelMask {
    let (n, m) = mask.shape();
    let mut reachable = vec![false; n * m];
    let mut stack = Vec::new();
    for r in 0..n {
        for c in 0..m {
            if (r == 0 || c == 0 || r == n - 1 || c == m - 1) && !mask.get(r, c) {
                reachable[r * m + c] = true;
                stack.push((r, c));
            }
        }
    }
    while let Some((r, c)) = stack.pop() {
        let neighbours = [
            (r.wrapping_sub(1), c),
            (r + 1, c),
            (r, c.wrapping_sub(1)),
            (r, c + 1),
        ];
        for (nr, nc) in neighbours {
            if nr < n && nc < m && !mask.get(nr, nc) && !reachable[nr * m + nc] {
                reachable[nr * m + nc] = true;
                stack.push((nr, nc));
            }
        }
    }
    PixelMask::new(n, m, reachable.into_iter().map(|r| !r).collect()).expect("shape preserved")
}

/// Votes each in-lung patch diseased iff at least `threshold` of its in-image
/// pixels are set. Patches labelled outside in `grid` stay outside.
pub fn pixels_to_patches(mask: &PixelMask, grid: &LabelGrid, threshold: f64) -> Result<LabelGrid> {
    expect_shape(grid.image_shape(), mask.shape())?;
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::InvalidParameter(format!(
            "patch threshold {threshold} must lie in [0, 1]"
        )));
    }
    let (pr, pc) = grid.lattice();
    let mut labels = Vec::with_capacity(pr * pc);
    for r in 0..pr {
        for c in 0..pc {
            if grid.get(r, c) == PatchLabel::Outside {
                labels.push(PatchLabel::Outside);
                continue;
            }
            let (rows, cols) = grid.patch_bounds(r, c);
            let total = rows.len() * cols.len();
            let set = rows
                .flat_map(|y| cols.clone().map(move |x| (y, x)))
                .filter(|&(y, x)| mask.get(y, x))
                .count();
            labels.push(if set as f64 >= threshold * total as f64 {
                PatchLabel::Diseased
            } else {
                PatchLabel::Healthy
            });
        }
    }
    grid.with_labels(labels)
}

/// Diseased-class confusion counts over in-lung truth patches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionCounts {
    /// `2tp / (2tp + fp + fn)`, or 1 when there is neither disease nor a
    /// disease prediction.
    pub fn f1(&self) -> f64 {
        let denom = 2 * self.tp + self.fp + self.fn_;
        if denom == 0 {
            1.0
        } else {
            (2 * self.tp) as f64 / denom as f64
        }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

impl std::ops::Add for ConfusionCounts {
    type Output = ConfusionCounts;

    fn add(self, o: Self) -> Self {
        ConfusionCounts {
            tp: self.tp + o.tp,
            fp: self.fp + o.fp,
            fn_: self.fn_ + o.fn_,
            tn: self.tn + o.tn,
        }
    }
}

/// Patches whose truth is outside the lung are skipped; a prediction of
/// outside on an in-lung patch counts as not diseased.
pub fn confusion(pred: &LabelGrid, truth: &LabelGrid) -> Result<ConfusionCounts> {
    if !pred.same_lattice(truth) {
        return Err(Error::ShapeMismatch {
            expected: truth.lattice(),
            actual: pred.lattice(),
        });
    }
    let mut counts = ConfusionCounts::default();
    for (&p, &t) in pred.labels().iter().zip(truth.labels()) {
        let predicted = p == PatchLabel::Diseased;
        match t {
            PatchLabel::Outside => {}
            PatchLabel::Diseased if predicted => counts.tp += 1,
            PatchLabel::Diseased => counts.fn_ += 1,
            PatchLabel::Healthy if predicted => counts.fp += 1,
            PatchLabel::Healthy => counts.tn += 1,
        }
    }
    Ok(counts)
}

pub fn f1_disease(pred: &LabelGrid, truth: &LabelGrid) -> Result<f64> {
    Ok(confusion(pred, truth)?.f1())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid(rows: usize, cols: usize, labels: &[PatchLabel]) -> LabelGrid {
        LabelGrid::new((rows, cols), 1, (0, 0), labels.to_vec()).unwrap()
    }

    /// Direct dilation then erosion on a zero-padded grid with a margin wide
    /// enough for the element, evaluated pixel by pixel.
    fn closing_oracle(mask: &PixelMask, size: usize) -> PixelMask {
        let k = size as isize / 2;
        let (n, m) = (mask.rows() as isize, mask.cols() as isize);
        let at = |r: isize, c: isize| {
            r >= 0 && c >= 0 && r < n && c < m && mask.get(r as usize, c as usize)
        };
        let dil = |r: isize, c: isize| (-k..=k).any(|dr| (-k..=k).any(|dc| at(r + dr, c + dc)));
        PixelMask::from_fn(n as usize, m as usize, |r, c| {
            let (r, c) = (r as isize, c as isize);
            (-k..=k).all(|dr| (-k..=k).all(|dc| dil(r + dr, c + dc)))
        })
        .unwrap()
    }

    #[test]
    fn empty_mask_stays_empty() {
        let m = PixelMask::empty(12, 9).unwrap();
        assert_eq!(hole_fill(&m), m);
        assert_eq!(flood_fill_holes(&m), m);
    }

    #[test]
    fn interior_hole_is_filled() {
        let mask = PixelMask::from_fn(12, 12, |r, c| {
            (1..11).contains(&r) && (1..11).contains(&c) && (r, c) != (5, 6)
        })
        .unwrap();
        let filled = hole_fill(&mask);
        assert!(filled.get(5, 6));
        assert_eq!(filled, closing_oracle(&mask, 5));
        let block = PixelMask::from_fn(12, 12, |r, c| (1..11).contains(&r) && (1..11).contains(&c))
            .unwrap();
        assert_eq!(filled, block);
        assert_eq!(flood_fill_holes(&mask), block);
    }

    #[test]
    fn isolated_pixel_survives() {
        let mask = PixelMask::from_fn(9, 9, |r, c| (r, c) == (4, 4)).unwrap();
        assert_eq!(hole_fill(&mask), mask);
        let corner = PixelMask::from_fn(9, 9, |r, c| (r, c) == (0, 0)).unwrap();
        assert_eq!(hole_fill(&corner), corner);
    }

    #[test]
    fn patch_voting() {
        let grid20 = LabelGrid::uniform((40, 40), 20, PatchLabel::Healthy).unwrap();
        let ones = PixelMask::from_fn(40, 40, |_, _| true).unwrap();
        assert!(pixels_to_patches(&ones, &grid20, 0.5)
            .unwrap()
            .labels()
            .iter()
            .all(|&l| l == PatchLabel::Diseased));
        let zeros = PixelMask::empty(40, 40).unwrap();
        assert!(pixels_to_patches(&zeros, &grid20, 0.5)
            .unwrap()
            .labels()
            .iter()
            .all(|&l| l == PatchLabel::Healthy));

        // exactly 200 of 400 pixels in patch (0, 0): rows 0..10 fully set
        let half = PixelMask::from_fn(40, 40, |r, c| r < 10 && c < 20).unwrap();
        let voted = pixels_to_patches(&half, &grid20, 0.5).unwrap();
        assert_eq!(voted.get(0, 0), PatchLabel::Diseased);
        assert_eq!(voted.get(0, 1), PatchLabel::Healthy);
        let one_less =
            PixelMask::from_fn(40, 40, |r, c| r < 10 && c < 20 && (r, c) != (0, 0)).unwrap();
        assert_eq!(
            pixels_to_patches(&one_less, &grid20, 0.5)
                .unwrap()
                .get(0, 0),
            PatchLabel::Healthy
        );
    }

    #[test]
    fn voting_keeps_outside_and_checks_shape() {
        let mut g = LabelGrid::uniform((20, 20), 10, PatchLabel::Healthy).unwrap();
        g.set(0, 1, PatchLabel::Outside);
        let ones = PixelMask::from_fn(20, 20, |_, _| true).unwrap();
        assert_eq!(
            pixels_to_patches(&ones, &g, 0.5).unwrap().get(0, 1),
            PatchLabel::Outside
        );
        assert!(pixels_to_patches(&PixelMask::empty(20, 21).unwrap(), &g, 0.5).is_err());
    }

    #[test]
    fn f1_examples() {
        use PatchLabel::*;
        let truth = grid(1, 3, &[Diseased, Healthy, Diseased]);
        assert_eq!(f1_disease(&truth, &truth).unwrap(), 1.0);
        let none = grid(1, 3, &[Healthy; 3]);
        assert_eq!(f1_disease(&none, &truth).unwrap(), 0.0);
        assert_eq!(f1_disease(&none, &none).unwrap(), 1.0);

        // 3x3 lattice with tp = 3, fp = 1, fn = 2, tn = 3
        let t = grid(
            3,
            3,
            &[
                Diseased, Diseased, Diseased, Diseased, Diseased, Healthy, Healthy, Healthy,
                Healthy,
            ],
        );
        let p = grid(
            3,
            3,
            &[
                Diseased, Diseased, Diseased, Healthy, Healthy, Diseased, Healthy, Healthy, Healthy,
            ],
        );
        let counts = confusion(&p, &t).unwrap();
        assert_eq!(
            counts,
            ConfusionCounts {
                tp: 3,
                fp: 1,
                fn_: 2,
                tn: 3
            }
        );
        assert_eq!(f1_disease(&p, &t).unwrap(), 2.0 / 3.0);
    }

    #[test]
    fn lattice_mismatch_is_an_error() {
        let a = LabelGrid::uniform((20, 20), 10, PatchLabel::Healthy).unwrap();
        let b = LabelGrid::uniform((20, 20), 5, PatchLabel::Healthy).unwrap();
        assert!(f1_disease(&a, &b).is_err());
    }

    fn arb_mask() -> impl Strategy<Value = PixelMask> {
        (1usize..24, 1usize..24, any::<u64>()).prop_map(|(n, m, seed)| {
            let noise = crate::rng::NoiseDraw::new(seed, 0, 0);
            PixelMask::from_fn(n, m, |r, c| noise.bernoulli((r * m + c) as u64, 0.35)).unwrap()
        })
    }

    proptest! {
        #[test]
        fn closing_matches_oracle_and_is_extensive_idempotent(mask in arb_mask()) {
            let once = hole_fill(&mask);
            prop_assert_eq!(&once, &closing_oracle(&mask, 5));
            prop_assert!(mask.is_subset_of(&once));
            prop_assert_eq!(hole_fill(&once), once);
        }

        #[test]
        fn flood_fill_is_extensive_idempotent(mask in arb_mask()) {
            let once = flood_fill_holes(&mask);
            prop_assert!(mask.is_subset_of(&once));
            prop_assert_eq!(flood_fill_holes(&once), once);
        }

        #[test]
        fn extra_true_negatives_never_change_f1(
            labels in proptest::collection::vec(0u8..3, 1..40),
            preds in proptest::collection::vec(0u8..2, 40),
            extra in 1usize..10,
        ) {
            let lab = |v: u8| match v { 0 => PatchLabel::Healthy, 1 => PatchLabel::Diseased, _ => PatchLabel::Outside };
            let n = labels.len();
            let t: Vec<_> = labels.iter().map(|&v| lab(v)).collect();
            let p: Vec<_> = preds[..n].iter().map(|&v| lab(v)).collect();
            let base = f1_disease(&grid(1, n, &p), &grid(1, n, &t)).unwrap();
            let mut t2 = t.clone();
            let mut p2 = p.clone();
            t2.extend(std::iter::repeat_n(PatchLabel::Healthy, extra));
            p2.extend(std::iter::repeat_n(PatchLabel::Healthy, extra));
            let more = f1_disease(&grid(1, n + extra, &p2), &grid(1, n + extra, &t2)).unwrap();
            prop_assert_eq!(base, more);
        }
    }
}
