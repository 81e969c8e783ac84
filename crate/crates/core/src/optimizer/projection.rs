//! Euclidean projection onto the convex hull of a discrete phase alphabet
//! and the final nearest-vertex snap.

use num_complex::Complex64;

fn cross(a: Complex64, b: Complex64) -> f64 {
    a.re * b.im - a.im * b.re
}

fn project_segment(p: Complex64, a: Complex64, b: Complex64) -> Complex64 {
    let e = b - a;
    let len2 = e.norm_sqr();
    if len2 == 0.0 {
        return a;
    }
    let t = (((p - a) * e.conj()).re / len2).clamp(0.0, 1.0);
    a + e * t
}

/// Project `p` onto the polygon spanned by `points`.
///
/// Points are taken in angular order; a singleton returns itself and two
/// points give the chord between them.
pub fn project_convex_hull(p: Complex64, points: &[Complex64]) -> Complex64 {
    match points.len() {
        0 => p,
        1 => points[0],
        2 => project_segment(p, points[0], points[1]),
        _ => {
            let mut verts = points.to_vec();
            verts.sort_by(|a, b| a.arg().total_cmp(&b.arg()));
            let k = verts.len();
            let inside = (0..k).all(|i| {
                let a = verts[i];
                let b = verts[(i + 1) % k];
                cross(b - a, p - a) >= -1e-15
            });
            if inside {
                return p;
            }
            let mut best = verts[0];
            let mut best_d = f64::INFINITY;
            for i in 0..k {
                let q = project_segment(p, verts[i], verts[(i + 1) % k]);
                let d = (q - p).norm_sqr();
                if d < best_d {
                    best_d = d;
                    best = q;
                }
            }
            best
        }
    }
}

/// True if `p` lies in the hull up to `tol`.
pub fn in_hull(p: Complex64, points: &[Complex64], tol: f64) -> bool {
    (project_convex_hull(p, points) - p).norm() <= tol
}

/// Nearest alphabet point and its index.
pub fn nearest_vertex(p: Complex64, points: &[Complex64]) -> (usize, Complex64) {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, v) in points.iter().enumerate() {
        let d = (v - p).norm_sqr();
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    (best, points[best])
}
