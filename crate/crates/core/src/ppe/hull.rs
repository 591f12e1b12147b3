//! Planar convex hulls and barycentric weights.

use crate::game::PayoffPair;

fn cross(o: PayoffPair, a: PayoffPair, b: PayoffPair) -> f64 {
    (a.v_client - o.v_client) * (b.v_provider - o.v_provider) - (a.v_provider - o.v_provider) * (b.v_client - o.v_client)
}

fn cmp_lex(a: &PayoffPair, b: &PayoffPair) -> std::cmp::Ordering {
    a.v_client
        .total_cmp(&b.v_client)
        .then(a.v_provider.total_cmp(&b.v_provider))
}

/// Hull vertices in counter-clockwise order, without collinear points.
/// Degenerate inputs give one or two vertices.
pub fn convex_hull(points: &[PayoffPair]) -> Vec<PayoffPair> {
    let mut pts = points.to_vec();
    pts.sort_by(cmp_lex);
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let mut lower: Vec<PayoffPair> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<PayoffPair> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Part of a convex polygon satisfying `a * v_client + b * v_provider <= c`.
pub fn clip_halfplane(poly: &[PayoffPair], a: f64, b: f64, c: f64) -> Vec<PayoffPair> {
    let side = |p: &PayoffPair| a * p.v_client + b * p.v_provider - c;
    if poly.len() == 1 {
        return if side(&poly[0]) <= 0.0 { poly.to_vec() } else { Vec::new() };
    }
    let mut out = Vec::with_capacity(poly.len() + 2);
    for (k, &p) in poly.iter().enumerate() {
        let q = poly[(k + 1) % poly.len()];
        let (sp, sq) = (side(&p), side(&q));
        if sp <= 0.0 {
            out.push(p);
        }
        if (sp < 0.0 && sq > 0.0) || (sp > 0.0 && sq < 0.0) {
            let t = sp / (sp - sq);
            out.push(PayoffPair::new(
                p.v_client + t * (q.v_client - p.v_client),
                p.v_provider + t * (q.v_provider - p.v_provider),
            ));
        }
    }
    out
}

/// Whether the axis-aligned box of half-width `r` around `centre` meets the
/// convex polygon.
pub fn meets_box(poly: &[PayoffPair], centre: PayoffPair, r: f64) -> bool {
    let mut p = poly.to_vec();
    for (a, b, c) in [
        (1.0, 0.0, centre.v_client + r),
        (-1.0, 0.0, r - centre.v_client),
        (0.0, 1.0, centre.v_provider + r),
        (0.0, -1.0, r - centre.v_provider),
    ] {
        p = clip_halfplane(&p, a, b, c);
        if p.is_empty() {
            return false;
        }
    }
    true
}

fn segment_weights(a: PayoffPair, b: PayoffPair, p: PayoffPair, tol: f64) -> Option<f64> {
    let dx = b.v_client - a.v_client;
    let dy = b.v_provider - a.v_provider;
    let len2 = dx * dx + dy * dy;
    let t = ((p.v_client - a.v_client) * dx + (p.v_provider - a.v_provider) * dy) / len2;
    let t = t.clamp(0.0, 1.0);
    let q = PayoffPair::new(a.v_client + t * dx, a.v_provider + t * dy);
    (q.max_abs_diff(&p) <= tol).then_some(t)
}

/// Whether `p` lies in the hull, up to `tol` in each coordinate.
pub fn hull_contains(hull: &[PayoffPair], p: PayoffPair, tol: f64) -> bool {
    barycentric(hull, p, tol).is_some()
}

/// Convex weights on at most three hull vertices reproducing `p`, found by a
/// fan triangulation from the first vertex. `None` outside the hull.
pub fn barycentric(hull: &[PayoffPair], p: PayoffPair, tol: f64) -> Option<Vec<(usize, f64)>> {
    match hull.len() {
        0 => None,
        1 => (hull[0].max_abs_diff(&p) <= tol).then(|| vec![(0, 1.0)]),
        2 => segment_weights(hull[0], hull[1], p, tol).map(|t| vec![(0, 1.0 - t), (1, t)]),
        n => {
            for k in 1..n - 1 {
                let (a, b, c) = (hull[0], hull[k], hull[k + 1]);
                let det = cross(a, b, c);
                let wb = cross(a, p, c) / det;
                let wc = cross(a, b, p) / det;
                let wa = 1.0 - wb - wc;
                let slack = tol / (b.max_abs_diff(&a) + c.max_abs_diff(&a)).max(1e-300);
                if wa >= -slack && wb >= -slack && wc >= -slack {
                    let (wa, wb, wc) = (wa.max(0.0), wb.max(0.0), wc.max(0.0));
                    let s = wa + wb + wc;
                    return Some(vec![(0, wa / s), (k, wb / s), (k + 1, wc / s)]);
                }
            }
            // On an edge but just outside every triangle by rounding.
            for i in 0..n {
                let j = (i + 1) % n;
                if let Some(t) = segment_weights(hull[i], hull[j], p, tol) {
                    return Some(vec![(i, 1.0 - t), (j, t)]);
                }
            }
            None
        }
    }
}
