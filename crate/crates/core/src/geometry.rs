//! Axis-aligned rectangle arithmetic in page-pixel coordinates.
//!
//! Coordinates are continuous: the area of a box is `width * height` with no
//! `+1` for inclusive pixel edges. This matters for tiny regions such as line
//! numbers, where the inclusive convention would inflate IoU noticeably.
//!
//! Degenerate boxes (zero width or height) are legal values. Their IoU with
//! any box, themselves included, is 0.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Axis-aligned rectangle. Origin top-left, y grows downward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl BBox {
    /// Builds a box, checking that coordinates are finite, non-negative and
    /// ordered.
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Result<Self> {
        let b = BBox {
            x_min,
            y_min,
            x_max,
            y_max,
        };
        b.check()?;
        Ok(b)
    }

    /// Builds a box from a top-left corner and a size.
    pub fn from_xywh(x: f64, y: f64, width: f64, height: f64) -> Result<Self> {
        Self::new(x, y, x + width, y + height)
    }

    pub fn check(&self) -> Result<()> {
        let coords = [self.x_min, self.y_min, self.x_max, self.y_max];
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidBox(format!("non-finite coordinate in {self}")));
        }
        if coords.iter().any(|&c| c < 0.0) {
            return Err(Error::InvalidBox(format!("negative coordinate in {self}")));
        }
        if self.x_min > self.x_max || self.y_min > self.y_max {
            return Err(Error::InvalidBox(format!("min exceeds max in {self}")));
        }
        Ok(())
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> f64 {
        area(self)
    }

    /// True when `other` lies entirely inside `self` (closed edges).
    pub fn contains(&self, other: &BBox) -> bool {
        self.x_min <= other.x_min
            && self.y_min <= other.y_min
            && self.x_max >= other.x_max
            && self.y_max >= other.y_max
    }

    /// True when the box lies in `[0, width] x [0, height]`.
    pub fn within(&self, width: f64, height: f64) -> bool {
        self.x_min >= 0.0 && self.y_min >= 0.0 && self.x_max <= width && self.y_max <= height
    }

    /// Intersection rectangle, `None` when the boxes do not touch.
    pub fn intersection(&self, other: &BBox) -> Option<BBox> {
        let x_min = self.x_min.max(other.x_min);
        let y_min = self.y_min.max(other.y_min);
        let x_max = self.x_max.min(other.x_max);
        let y_max = self.y_max.min(other.y_max);
        (x_min <= x_max && y_min <= y_max).then_some(BBox {
            x_min,
            y_min,
            x_max,
            y_max,
        })
    }

    /// Clamps the box into `[0, width] x [0, height]`.
    pub fn clamped(&self, width: f64, height: f64) -> BBox {
        let cx = |v: f64| v.clamp(0.0, width);
        let cy = |v: f64| v.clamp(0.0, height);
        BBox {
            x_min: cx(self.x_min),
            y_min: cy(self.y_min),
            x_max: cx(self.x_max),
            y_max: cy(self.y_max),
        }
    }
}

impl std::fmt::Display for BBox {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "({}, {}, {}, {})",
            self.x_min, self.y_min, self.x_max, self.y_max
        )
    }
}

/// Overlap measurements between two boxes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Overlap {
    pub intersection_area: f64,
    pub union_area: f64,
    pub iou: f64,
}

pub fn area(b: &BBox) -> f64 {
    (b.x_max - b.x_min) * (b.y_max - b.y_min)
}

pub fn intersection_area(a: &BBox, b: &BBox) -> f64 {
    a.intersection(b).map_or(0.0, |i| i.area())
}

pub fn overlap(a: &BBox, b: &BBox) -> Overlap {
    let inter = intersection_area(a, b);
    let union = a.area() + b.area() - inter;
    let iou = if union > 0.0 {
        (inter / union).clamp(0.0, 1.0)
    } else {
        0.0
    };
    Overlap {
        intersection_area: inter,
        union_area: union,
        iou,
    }
}

/// Intersection over union. Zero for disjoint boxes and whenever the union
/// has no area.
pub fn iou(a: &BBox, b: &BBox) -> f64 {
    overlap(a, b).iou
}

/// Smallest rectangle containing every input box.
pub fn minimal_bounding_rect<'a, I>(boxes: I) -> Result<BBox>
where
    I: IntoIterator<Item = &'a BBox>,
{
    boxes
        .into_iter()
        .fold(None, |acc: Option<BBox>, b| {
            Some(match acc {
                None => *b,
                Some(a) => BBox {
                    x_min: a.x_min.min(b.x_min),
                    y_min: a.y_min.min(b.y_min),
                    x_max: a.x_max.max(b.x_max),
                    y_max: a.y_max.max(b.y_max),
                },
            })
        })
        .ok_or(Error::NoMemberBoxes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bb(x0: f64, y0: f64, x1: f64, y1: f64) -> BBox {
        BBox::new(x0, y0, x1, y1).unwrap()
    }

    /// Counts unit cells covered by integer-coordinate boxes.
    fn grid_iou(a: &BBox, b: &BBox) -> f64 {
        let cells = |r: &BBox| {
            let mut v = std::collections::HashSet::new();
            for x in r.x_min as i64..r.x_max as i64 {
                for y in r.y_min as i64..r.y_max as i64 {
                    v.insert((x, y));
                }
            }
            v
        };
        let (ca, cb) = (cells(a), cells(b));
        let inter = ca.intersection(&cb).count();
        let union = ca.union(&cb).count();
        if union == 0 {
            0.0
        } else {
            inter as f64 / union as f64
        }
    }

    #[test]
    fn area_examples() {
        assert_eq!(area(&bb(0.0, 0.0, 10.0, 10.0)), 100.0);
        assert_eq!(area(&bb(5.0, 5.0, 5.0, 9.0)), 0.0);
        assert_eq!(area(&bb(0.0, 0.0, 3.0, 7.0)), 21.0);
    }

    #[test]
    fn iou_examples() {
        let a = bb(0.0, 0.0, 10.0, 10.0);
        assert_eq!(iou(&a, &a), 1.0);
        assert_eq!(iou(&a, &bb(20.0, 20.0, 30.0, 30.0)), 0.0);
        let b = bb(5.0, 0.0, 15.0, 10.0);
        assert_eq!(grid_iou(&a, &b), 1.0 / 3.0);
        assert!((iou(&a, &b) - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_boxes_have_zero_iou() {
        let d = bb(5.0, 5.0, 5.0, 9.0);
        assert_eq!(iou(&d, &d), 0.0);
        assert_eq!(iou(&d, &bb(0.0, 0.0, 10.0, 10.0)), 0.0);
        let point = bb(3.0, 3.0, 3.0, 3.0);
        assert_eq!(overlap(&point, &point).union_area, 0.0);
    }

    #[test]
    fn invalid_boxes_rejected() {
        assert!(BBox::new(2.0, 0.0, 1.0, 1.0).is_err());
        assert!(BBox::new(-1.0, 0.0, 1.0, 1.0).is_err());
        assert!(BBox::new(0.0, 0.0, f64::NAN, 1.0).is_err());
        assert!(BBox::new(0.0, 0.0, f64::INFINITY, 1.0).is_err());
    }

    #[test]
    fn bounding_rect_examples() {
        let r = minimal_bounding_rect(&[bb(10.0, 10.0, 20.0, 20.0), bb(30.0, 15.0, 50.0, 25.0)])
            .unwrap();
        assert_eq!(r, bb(10.0, 10.0, 50.0, 25.0));
        let b = bb(1.0, 2.0, 3.0, 4.0);
        assert_eq!(minimal_bounding_rect(&[b]).unwrap(), b);
        let r = minimal_bounding_rect(&[
            bb(0.0, 0.0, 1.0, 1.0),
            bb(0.0, 0.0, 1.0, 1.0),
            bb(2.0, 2.0, 3.0, 3.0),
        ])
        .unwrap();
        assert_eq!(r, bb(0.0, 0.0, 3.0, 3.0));
        let err = minimal_bounding_rect(&[]).unwrap_err();
        assert_eq!(err.to_string(), "no member boxes");
    }

    fn int_box() -> impl Strategy<Value = BBox> {
        (0u32..30, 0u32..30, 0u32..15, 0u32..15).prop_map(|(x, y, w, h)| {
            bb(x as f64, y as f64, (x + w) as f64, (y + h) as f64)
        })
    }

    fn real_box() -> impl Strategy<Value = BBox> {
        (0.0..500.0f64, 0.0..500.0f64, 0.0..200.0f64, 0.0..200.0f64)
            .prop_map(|(x, y, w, h)| bb(x, y, x + w, y + h))
    }

    proptest! {
        #[test]
        fn iou_symmetric_and_bounded(a in real_box(), b in real_box()) {
            let ab = iou(&a, &b);
            prop_assert_eq!(ab, iou(&b, &a));
            prop_assert!((0.0..=1.0).contains(&ab));
        }

        #[test]
        fn self_iou_is_one(a in real_box()) {
            if a.area() > 0.0 {
                prop_assert_eq!(iou(&a, &a), 1.0);
            }
        }

        #[test]
        fn iou_matches_pixel_grid(a in int_box(), b in int_box()) {
            prop_assert!((iou(&a, &b) - grid_iou(&a, &b)).abs() < 1e-9);
        }

        #[test]
        fn bounding_rect_permutation_and_duplication(
            boxes in proptest::collection::vec(real_box(), 1..8),
            rot in 0usize..8,
        ) {
            let r = minimal_bounding_rect(&boxes).unwrap();
            let mut shuffled = boxes.clone();
            let k = rot % shuffled.len();
            shuffled.rotate_left(k);
            shuffled.reverse();
            shuffled.push(boxes[0]);
            prop_assert_eq!(minimal_bounding_rect(&shuffled).unwrap(), r);
            for b in &boxes {
                prop_assert!(r.contains(b));
                prop_assert!(r.area() >= b.area());
            }
        }
    }
}
