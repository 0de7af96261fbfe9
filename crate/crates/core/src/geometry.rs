//! Closed polyline checks used to certify the Jordan property at a given
//! sampling resolution.

use std::f64::consts::PI;

use num_complex::Complex64 as c64;

fn orient(a: c64, b: c64, c: c64) -> f64 {
    (b.re - a.re) * (c.im - a.im) - (b.im - a.im) * (c.re - a.re)
}

fn on_segment(a: c64, b: c64, p: c64) -> bool {
    p.re >= a.re.min(b.re) && p.re <= a.re.max(b.re) && p.im >= a.im.min(b.im) && p.im <= a.im.max(b.im)
}

fn segments_intersect(p1: c64, p2: c64, q1: c64, q2: c64) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on_segment(q1, q2, p1))
        || (d2 == 0.0 && on_segment(q1, q2, p2))
        || (d3 == 0.0 && on_segment(p1, p2, q1))
        || (d4 == 0.0 && on_segment(p1, p2, q2))
}

/// First pair of non-adjacent intersecting edges of the closed polyline through
/// `points`, or `None` if the polyline is simple.
///
/// Sweep over edges sorted by their left x-coordinate; only edges whose
/// x-ranges overlap are tested.
pub fn first_self_intersection(points: &[c64]) -> Option<(usize, usize)> {
    let n = points.len();
    if n < 3 {
        return None;
    }
    let edge = |i: usize| (points[i], points[(i + 1) % n]);
    let mut order: Vec<usize> = (0..n).collect();
    let xmin = |i: usize| {
        let (a, b) = edge(i);
        a.re.min(b.re)
    };
    order.sort_by(|&i, &j| xmin(i).total_cmp(&xmin(j)));
    let mut active: Vec<usize> = Vec::new();
    for &i in &order {
        let (a, b) = edge(i);
        let left = a.re.min(b.re);
        active.retain(|&j| {
            let (c, d) = edge(j);
            c.re.max(d.re) >= left
        });
        let (ylo, yhi) = (a.im.min(b.im), a.im.max(b.im));
        for &j in &active {
            let adjacent = (i + 1) % n == j || (j + 1) % n == i;
            let (c, d) = edge(j);
            if c.im.max(d.im) < ylo || c.im.min(d.im) > yhi {
                continue;
            }
            if adjacent {
                // adjacent edges share one endpoint; they only fail if they fold back
                let shared_is_b = (i + 1) % n == j;
                let (p, q, r) = if shared_is_b { (a, b, d) } else { (c, a, b) };
                if orient(p, q, r) == 0.0 && (r - q).re * (p - q).re + (r - q).im * (p - q).im > 0.0 {
                    return Some((i.min(j), i.max(j)));
                }
                continue;
            }
            if segments_intersect(a, b, c, d) {
                return Some((i.min(j), i.max(j)));
            }
        }
        active.push(i);
    }
    None
}

/// Winding number of the closed polyline about `z0`.
pub fn winding_number(points: &[c64], z0: c64) -> i64 {
    let n = points.len();
    let mut total = 0.0;
    for i in 0..n {
        let a = points[i] - z0;
        let b = points[(i + 1) % n] - z0;
        total += (b / a).arg();
    }
    (total / (2.0 * PI)).round() as i64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_is_simple_and_figure_eight_is_not() {
        let sq = [c64::new(0.0, 0.0), c64::new(1.0, 0.0), c64::new(1.0, 1.0), c64::new(0.0, 1.0)];
        assert_eq!(first_self_intersection(&sq), None);
        let bowtie = [c64::new(0.0, 0.0), c64::new(1.0, 1.0), c64::new(1.0, 0.0), c64::new(0.0, 1.0)];
        assert!(first_self_intersection(&bowtie).is_some());
    }

    #[test]
    fn winding_of_circle_samples() {
        let pts: Vec<c64> = (0..100).map(|j| c64::from_polar(1.0, 2.0 * PI * j as f64 / 100.0)).collect();
        assert_eq!(winding_number(&pts, c64::new(0.0, 0.0)), 1);
        assert_eq!(winding_number(&pts, c64::new(3.0, 0.0)), 0);
    }
}
