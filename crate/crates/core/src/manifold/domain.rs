use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::LocalPoint;

/// How a local coordinate behaves at the edge of its sampling interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CoordKind {
    /// Angle coordinate. Never wrapped and never out of domain; the interval
    /// is only used for sampling.
    Periodic,
    /// Unbounded chart coordinate; the interval is only used for sampling.
    Open,
    /// Polar angle with chart singularities at multiples of π. Points closer
    /// than the pole margin to a singularity are rejected.
    Polar,
    /// Hard box: the chart patch ends at `lo` and `hi`.
    Bounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coord {
    pub lo: f64,
    pub hi: f64,
    pub kind: CoordKind,
}

impl Coord {
    pub fn new(lo: f64, hi: f64, kind: CoordKind) -> Self {
        Self { lo, hi, kind }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Per-coordinate parameter box of a chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub coords: [Coord; 2],
}

const EDGE_SLACK: f64 = 1e-12;

impl Domain {
    pub fn new(first: Coord, second: Coord) -> Self {
        Self {
            coords: [first, second],
        }
    }

    /// Returns a reason string when `u` is not an admissible chart point.
    pub fn violation(&self, u: &LocalPoint, pole_margin: f64) -> Option<String> {
        for (i, c) in self.coords.iter().enumerate() {
            let x = u[i];
            if !x.is_finite() {
                return Some(format!("coordinate {} is not finite", i + 1));
            }
            let slack = EDGE_SLACK * c.lo.abs().max(c.hi.abs()).max(1.0);
            match c.kind {
                CoordKind::Periodic | CoordKind::Open => {}
                CoordKind::Bounded => {
                    if x < c.lo - slack || x > c.hi + slack {
                        return Some(format!("coordinate {} = {x} outside [{}, {}]", i + 1, c.lo, c.hi));
                    }
                }
                CoordKind::Polar => {
                    let m = x.rem_euclid(PI);
                    let tol = pole_margin * (1.0 - 1e-9);
                    if m < tol || m > PI - tol {
                        return Some(format!(
                            "coordinate {} = {x} within pole margin {pole_margin} of a singularity",
                            i + 1
                        ));
                    }
                }
            }
        }
        None
    }

    /// Reflects box and polar coordinates back into their interval.
    /// Returns `None` when a single reflection is not enough.
    pub fn reflect(&self, u: &LocalPoint) -> Option<LocalPoint> {
        let mut out = *u;
        for (i, c) in self.coords.iter().enumerate() {
            if !matches!(c.kind, CoordKind::Bounded | CoordKind::Polar) {
                continue;
            }
            let mut x = out[i];
            if x < c.lo {
                x = 2.0 * c.lo - x;
            } else if x > c.hi {
                x = 2.0 * c.hi - x;
            }
            if x < c.lo || x > c.hi {
                return None;
            }
            out[i] = x;
        }
        Some(out)
    }

    /// Uniform draw from the sampling box.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> LocalPoint {
        let mut u = LocalPoint::zeros();
        for (i, c) in self.coords.iter().enumerate() {
            let s: f64 = rng.random();
            u[i] = c.lo + c.width() * s;
            // Closed boxes must not round up past the upper edge.
            if u[i] > c.hi {
                u[i] = c.hi;
            }
        }
        u
    }
}
