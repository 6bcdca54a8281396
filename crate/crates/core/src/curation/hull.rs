//! Base of support: 2D convex hull of support points and distance to it.

use nalgebra::{Vector2, Vector3};

pub type Point2 = Vector2<f64>;

fn cross(o: &Point2, a: &Point2, b: &Point2) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Convex hull of the horizontal projections, counter-clockwise, without
/// collinear boundary points. Degenerate inputs give a one-point or
/// two-point hull.
pub fn base_of_support(points: &[Vector3<f64>]) -> Vec<Point2> {
    let mut pts: Vec<Point2> = points.iter().map(|p| Point2::new(p.x, p.y)).collect();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    // Andrew's monotone chain.
    let mut hull: Vec<Point2> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Point2>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for p in iter {
            while hull.len() >= start + 2 && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(*p);
        }
        hull.pop();
    }
    if hull.len() == 2 && hull[0] == hull[1] {
        hull.truncate(1);
    }
    hull
}

fn segment_distance(p: &Point2, a: &Point2, b: &Point2) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let s = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    (p - (a + ab * s)).norm()
}

/// Zero when the point's projection lies inside or on the hull, otherwise
/// the distance to the nearest hull point.
pub fn distance_to_support(point: &Vector3<f64>, hull: &[Point2]) -> f64 {
    let p = Point2::new(point.x, point.y);
    match hull.len() {
        0 => f64::INFINITY,
        1 => (p - hull[0]).norm(),
        2 => segment_distance(&p, &hull[0], &hull[1]),
        n => {
            let inside = (0..n).all(|i| cross(&hull[i], &hull[(i + 1) % n], &p) >= 0.0);
            if inside {
                0.0
            } else {
                (0..n)
                    .map(|i| segment_distance(&p, &hull[i], &hull[(i + 1) % n]))
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> Vector3<f64> {
        Vector3::new(x, y, 0.3)
    }

    #[test]
    fn unit_square() {
        let hull = base_of_support(&[p(0.0, 0.0), p(1.0, 1.0), p(1.0, 0.0), p(0.0, 1.0)]);
        assert_eq!(hull.len(), 4);
        for corner in [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)] {
            assert!(hull.contains(&Point2::new(corner.0, corner.1)));
        }
        assert_eq!(distance_to_support(&p(0.5, 0.5), &hull), 0.0);
        assert_eq!(distance_to_support(&p(2.0, 0.5), &hull), 1.0);
        assert_eq!(distance_to_support(&p(1.0, 0.5), &hull), 0.0);
    }

    #[test]
    fn degenerate_hulls() {
        let single = base_of_support(&[p(0.2, 0.1); 4]);
        assert_eq!(single, vec![Point2::new(0.2, 0.1)]);
        assert!((distance_to_support(&p(0.2, 0.5), &single) - 0.4).abs() < 1e-12);

        let line = base_of_support(&[p(0.0, 0.0), p(1.0, 0.0), p(0.5, 0.0), p(1.0, 0.0)]);
        assert_eq!(line.len(), 2);
        assert!((distance_to_support(&p(0.5, 0.3), &line) - 0.3).abs() < 1e-12);
        assert_eq!(distance_to_support(&p(0.25, 0.0), &line), 0.0);
    }

    #[test]
    fn interior_point_is_dropped() {
        let hull = base_of_support(&[p(0.0, 0.0), p(2.0, 0.0), p(0.0, 2.0), p(0.5, 0.5)]);
        assert_eq!(hull.len(), 3);
    }
}
