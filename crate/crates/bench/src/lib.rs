//! Benchmark fixtures shared by the criterion targets.

use symbill_core::{ConvexBody, Point};

pub fn ellipse() -> ConvexBody {
    ConvexBody::ellipsoid(vec![1.0, 0.6]).expect("valid ellipse")
}

pub fn ellipsoid_4d() -> ConvexBody {
    ConvexBody::ellipsoid(vec![1.0, 0.8, 1.2, 0.9]).expect("valid ellipsoid")
}

pub fn pball() -> ConvexBody {
    ConvexBody::pball(1.5).expect("valid pball")
}

/// `radius · e₁` in the body's ambient space.
pub fn start(body: &ConvexBody, radius: f64) -> Point {
    let mut x = Point::zeros(body.dim());
    x[0] = radius;
    x
}
