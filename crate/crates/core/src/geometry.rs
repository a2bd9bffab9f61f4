//! Homogeneous Poisson fields on a disc observation window, independent
//! thinning, and nearest-point queries.
//!
//! The desired user sits at the origin throughout; a finite window of
//! default radius 2000 m stands in for the infinite plane (the truncated
//! interference tail is checked separately by the harness's
//! window-doubling comparison).

use rand::Rng;
use rand_distr::{Distribution, Poisson};

/// Immutable snapshot of one sampled point process.
///
/// Invariants: every point lies inside the disc of `window_radius` around
/// the origin; `density` records the generative intensity for audit.
#[derive(Debug, Clone, PartialEq)]
pub struct PointField {
    points: Vec<[f64; 2]>,
    window_radius: f64,
    density: f64,
}

impl PointField {
    /// Builds a field from explicit points, asserting window containment.
    pub fn from_points(points: Vec<[f64; 2]>, window_radius: f64, density: f64) -> Self {
        assert!(
            window_radius > 0.0 && window_radius.is_finite(),
            "window radius must be positive and finite"
        );
        assert!(
            density >= 0.0 && density.is_finite(),
            "density must be nonnegative"
        );
        let r2 = window_radius * window_radius;
        for (i, p) in points.iter().enumerate() {
            let d2 = p[0] * p[0] + p[1] * p[1];
            assert!(
                d2 <= r2 * (1.0 + 1e-12),
                "point {i} at ({}, {}) lies outside the window radius {window_radius}",
                p[0],
                p[1]
            );
        }
        Self {
            points,
            window_radius,
            density,
        }
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn window_radius(&self) -> f64 {
        self.window_radius
    }

    pub fn density(&self) -> f64 {
        self.density
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Samples a homogeneous PPP of intensity `lambda` on the disc of radius
/// `r_sim`: a Poisson(λπR²) count, then i.i.d. uniform positions with the
/// radius drawn by the square-root inverse transform and the angle uniform.
/// Draw order per point is fixed (radius, then angle) for replayability.
pub fn sample_ppp_disc<R: Rng + ?Sized>(lambda: f64, r_sim: f64, rng: &mut R) -> PointField {
    assert!(
        lambda >= 0.0 && lambda.is_finite(),
        "density must be nonnegative and finite"
    );
    assert!(
        r_sim > 0.0 && r_sim.is_finite(),
        "window radius must be positive and finite"
    );

    let mean = lambda * std::f64::consts::PI * r_sim * r_sim;
    let count = if mean > 0.0 {
        Poisson::new(mean)
            .expect("finite positive mean")
            .sample(rng) as usize
    } else {
        0
    };
    let mut points = Vec::with_capacity(count);
    for _ in 0..count {
        let r = r_sim * rng.random::<f64>().sqrt();
        let theta = rng.random::<f64>() * std::f64::consts::TAU;
        let (sin, cos) = theta.sin_cos();
        points.push([r * cos, r * sin]);
    }
    PointField {
        points,
        window_radius: r_sim,
        density: lambda,
    }
}

/// Splits a field by independent marking: each point goes to the first
/// output with probability `p`. The outputs partition the input and stay
/// Poisson with densities pλ and (1-p)λ.
pub fn thin_field<R: Rng + ?Sized>(
    field: &PointField,
    p: f64,
    rng: &mut R,
) -> (PointField, PointField) {
    assert!(
        (0.0..=1.0).contains(&p),
        "retention probability must lie in [0, 1]"
    );
    let mut retained = Vec::new();
    let mut removed = Vec::new();
    for &pt in &field.points {
        if rng.random::<f64>() < p {
            retained.push(pt);
        } else {
            removed.push(pt);
        }
    }
    (
        PointField {
            points: retained,
            window_radius: field.window_radius,
            density: p * field.density,
        },
        PointField {
            points: removed,
            window_radius: field.window_radius,
            density: (1.0 - p) * field.density,
        },
    )
}

/// Nearest point of a field to `origin`, by Euclidean distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NearestPoint {
    /// Index into the field's point list; ties (probability zero under the
    /// continuous model) break toward the lowest index for replayability.
    pub index: usize,
    pub position: [f64; 2],
    pub distance: f64,
}

/// Finds the nearest point to `origin`, or absent for an empty field.
pub fn nearest_point(field: &PointField, origin: [f64; 2]) -> Option<NearestPoint> {
    let mut best: Option<(usize, f64)> = None;
    for (i, p) in field.points.iter().enumerate() {
        let dx = p[0] - origin[0];
        let dy = p[1] - origin[1];
        let d2 = dx * dx + dy * dy;
        if best.is_none_or(|(_, b)| d2 < b) {
            best = Some((i, d2));
        }
    }
    best.map(|(index, d2)| NearestPoint {
        index,
        position: field.points[index],
        distance: d2.sqrt(),
    })
}

/// Probability that a disc of radius `l` holds no point of a PPP with
/// intensity `lambda`: exp(-λπl²).
pub fn void_probability(lambda: f64, l: f64) -> f64 {
    assert!(lambda >= 0.0, "density must be nonnegative");
    assert!(l >= 0.0, "radius must be nonnegative");
    (-lambda * std::f64::consts::PI * l * l).exp()
}
