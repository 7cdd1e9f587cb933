//! Rectangular boxes in the complex plane and the θ-criterion.

use num_complex::Complex64;

use crate::error::{FmmError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    #[inline]
    pub fn coord(self, z: Complex64) -> f64 {
        match self {
            Axis::X => z.re,
            Axis::Y => z.im,
        }
    }
}

/// Axis-aligned rectangle. The corners are stored exactly so that cutting a
/// box reproduces the cut coordinate bit for bit in both children.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxGeometry {
    center: Complex64,
    half_width: f64,
    half_height: f64,
    lo: Complex64,
    hi: Complex64,
}

impl BoxGeometry {
    pub fn new(center: Complex64, half_width: f64, half_height: f64) -> Self {
        debug_assert!(half_width >= 0.0 && half_height >= 0.0);
        Self {
            center,
            half_width,
            half_height,
            lo: Complex64::new(center.re - half_width, center.im - half_height),
            hi: Complex64::new(center.re + half_width, center.im + half_height),
        }
    }

    pub fn from_corners(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        let (x1, y1) = (x1.max(x0), y1.max(y0));
        Self {
            center: Complex64::new(0.5 * (x0 + x1), 0.5 * (y0 + y1)),
            half_width: 0.5 * (x1 - x0),
            half_height: 0.5 * (y1 - y0),
            lo: Complex64::new(x0, y0),
            hi: Complex64::new(x1, y1),
        }
    }

    #[inline]
    pub fn center(&self) -> Complex64 {
        self.center
    }

    #[inline]
    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    #[inline]
    pub fn half_height(&self) -> f64 {
        self.half_height
    }

    /// The same rectangle moved so its center is `center`.
    pub fn recentered(&self, center: Complex64) -> Self {
        Self::new(center, self.half_width, self.half_height)
    }

    /// Tight bounding rectangle of the given points.
    pub fn bounding<'a>(points: impl IntoIterator<Item = &'a Complex64>) -> Option<Self> {
        let mut it = points.into_iter();
        let first = it.next()?;
        let (mut x0, mut y0, mut x1, mut y1) = (first.re, first.im, first.re, first.im);
        for z in it {
            x0 = x0.min(z.re);
            x1 = x1.max(z.re);
            y0 = y0.min(z.im);
            y1 = y1.max(z.im);
        }
        Some(Self::from_corners(x0, y0, x1, y1))
    }

    /// Half-diagonal: radius of the smallest disc enclosing the rectangle.
    #[inline]
    pub fn radius(&self) -> f64 {
        self.half_width.hypot(self.half_height)
    }

    /// `(x0, y0, x1, y1)`
    pub fn corners(&self) -> (f64, f64, f64, f64) {
        (self.lo.re, self.lo.im, self.hi.re, self.hi.im)
    }

    /// Boundary points count as inside.
    pub fn contains(&self, z: Complex64) -> bool {
        let (x0, y0, x1, y1) = self.corners();
        z.re >= x0 && z.re <= x1 && z.im >= y0 && z.im <= y1
    }

    pub fn contains_box(&self, other: &BoxGeometry) -> bool {
        let (x0, y0, x1, y1) = self.corners();
        let (a0, b0, a1, b1) = other.corners();
        a0 >= x0 && b0 >= y0 && a1 <= x1 && b1 <= y1
    }

    /// Cut the rectangle at `at` along `axis`; returns the (lower, upper) parts.
    pub fn split_at(&self, axis: Axis, at: f64) -> (BoxGeometry, BoxGeometry) {
        let (x0, y0, x1, y1) = self.corners();
        match axis {
            Axis::X => {
                let at = at.clamp(x0, x1);
                (
                    Self::from_corners(x0, y0, at, y1),
                    Self::from_corners(at, y0, x1, y1),
                )
            }
            Axis::Y => {
                let at = at.clamp(y0, y1);
                (
                    Self::from_corners(x0, y0, x1, at),
                    Self::from_corners(x0, at, x1, y1),
                )
            }
        }
    }

    /// Split across the longer side so the children approach squares.
    /// Squares split along x.
    #[inline]
    pub fn split_direction(&self) -> Axis {
        if self.half_height > self.half_width {
            Axis::Y
        } else {
            Axis::X
        }
    }

    #[inline]
    pub fn distance(&self, other: &BoxGeometry) -> f64 {
        (self.center - other.center).norm()
    }
}

/// Separation parameter θ of the criterion `R + θr ≤ θd`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaConfig {
    theta: f64,
}

impl ThetaConfig {
    pub fn new(theta: f64) -> Result<Self> {
        if theta > 0.0 && theta < 1.0 {
            Ok(Self { theta })
        } else {
            Err(FmmError::InvalidConfig(format!(
                "theta must lie in (0, 1), got {theta}"
            )))
        }
    }

    #[inline]
    pub fn theta(&self) -> f64 {
        self.theta
    }
}

impl Default for ThetaConfig {
    fn default() -> Self {
        Self { theta: 0.5 }
    }
}

#[inline]
fn criterion(large: f64, small: f64, d: f64, theta: f64) -> bool {
    large + theta * small <= theta * d
}

/// θ-criterion with `R = max(r_a, r_b)`, `r = min(r_a, r_b)`.
#[inline]
pub fn well_separated(a: &BoxGeometry, b: &BoxGeometry, cfg: ThetaConfig) -> bool {
    let (ra, rb) = (a.radius(), b.radius());
    criterion(ra.max(rb), ra.min(rb), a.distance(b), cfg.theta)
}

/// θ-criterion with the roles of the larger and smaller radius interchanged.
#[inline]
pub fn well_separated_swapped(a: &BoxGeometry, b: &BoxGeometry, cfg: ThetaConfig) -> bool {
    let (ra, rb) = (a.radius(), b.radius());
    criterion(ra.min(rb), ra.max(rb), a.distance(b), cfg.theta)
}
