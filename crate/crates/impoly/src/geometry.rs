//! Euclidean helpers on raw coordinate slices.
//!
//! Points are `&[f64]` of a common dimension. Keeping these as plain slice
//! loops (no matrix types) matters: the segment-pair scans in [`crate::verify`]
//! evaluate millions of distances and must not allocate per call.

/// Squared Euclidean norm of `a - b`.
pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut s = 0.0;
    for k in 0..a.len() {
        let d = a[k] - b[k];
        s += d * d;
    }
    s
}

/// Euclidean distance between two points.
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    dist_sq(a, b).sqrt()
}

/// Euclidean norm.
pub fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Dot product.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `a + t (b - a)`, the affine interpolation of two points.
pub fn lerp(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
}

/// Minimum distance between the closed segments `[p1, q1]` and `[p2, q2]`.
///
/// Clamped closest-point parametrization; degenerate (zero-length) segments
/// reduce to point-segment or point-point distance. Dimension generic.
pub fn segment_distance(p1: &[f64], q1: &[f64], p2: &[f64], q2: &[f64]) -> f64 {
    let dim = p1.len();
    // d1 = q1 - p1, d2 = q2 - p2, r = p1 - p2; all dots in one pass.
    let (mut a, mut b, mut c, mut e, mut f) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for k in 0..dim {
        let d1 = q1[k] - p1[k];
        let d2 = q2[k] - p2[k];
        let r = p1[k] - p2[k];
        a += d1 * d1;
        b += d1 * d2;
        c += d1 * r;
        e += d2 * d2;
        f += d2 * r;
    }

    let eps = 1e-300;
    let (s, t);
    if a <= eps && e <= eps {
        // two points
        s = 0.0;
        t = 0.0;
    } else if a <= eps {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else if e <= eps {
        t = 0.0;
        s = (-c / a).clamp(0.0, 1.0);
    } else {
        let denom = a * e - b * b;
        let s0 = if denom > eps {
            ((b * f - c * e) / denom).clamp(0.0, 1.0)
        } else {
            0.0 // nearly parallel: fix s, solve t
        };
        let t0 = ((b * s0 + f) / e).clamp(0.0, 1.0);
        // re-derive s for the clamped t
        let s1 = ((b * t0 - c) / a).clamp(0.0, 1.0);
        s = s1;
        t = t0;
    }

    let mut dsq = 0.0;
    for k in 0..dim {
        let x = p1[k] + s * (q1[k] - p1[k]);
        let y = p2[k] + t * (q2[k] - p2[k]);
        let d = x - y;
        dsq += d * d;
    }
    dsq.sqrt()
}

/// Fast lower bound on [`segment_distance`]: distance between the two
/// axis-aligned bounding boxes. Used to cull far pairs before the exact test.
pub fn segment_box_gap(p1: &[f64], q1: &[f64], p2: &[f64], q2: &[f64]) -> f64 {
    let mut gsq = 0.0;
    for k in 0..p1.len() {
        let (lo1, hi1) = if p1[k] <= q1[k] { (p1[k], q1[k]) } else { (q1[k], p1[k]) };
        let (lo2, hi2) = if p2[k] <= q2[k] { (p2[k], q2[k]) } else { (q2[k], p2[k]) };
        let gap = if lo2 > hi1 {
            lo2 - hi1
        } else if lo1 > hi2 {
            lo1 - hi2
        } else {
            0.0
        };
        gsq += gap * gap;
    }
    gsq.sqrt()
}

/// Whether two segments that share the image point `shared` meet only there.
///
/// `p` and `q` are the far endpoints. The segments `[shared, p]` and
/// `[shared, q]` overlap beyond the shared point exactly when the direction
/// vectors are parallel with positive alignment; everything else (including
/// opposite directions, the straight-line continuation case) meets only at
/// `shared`. A degenerate arm (p == shared) counts as meeting only at the
/// point.
pub fn arms_meet_only_at_shared(shared: &[f64], p: &[f64], q: &[f64], tol: f64) -> bool {
    let dim = shared.len();
    let mut uu = 0.0;
    let mut vv = 0.0;
    let mut uv = 0.0;
    for k in 0..dim {
        let u = p[k] - shared[k];
        let v = q[k] - shared[k];
        uu += u * u;
        vv += v * v;
        uv += u * v;
    }
    if uu == 0.0 || vv == 0.0 {
        return true;
    }
    if uv <= 0.0 {
        return true;
    }
    // parallel same-direction iff |u x v| = 0, i.e. uv^2 = uu * vv
    let cross_sq = uu * vv - uv * uv;
    cross_sq > tol * tol * uu * vv
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segment_distance_basics() {
        // two parallel unit-distance segments
        let d = segment_distance(&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0], &[1.0, 1.0]);
        assert!((d - 1.0).abs() < 1e-15);

        // crossing segments
        let d = segment_distance(&[-1.0, -1.0], &[1.0, 1.0], &[-1.0, 1.0], &[1.0, -1.0]);
        assert!(d.abs() < 1e-15);

        // skew in 3d: closest points interior
        let d = segment_distance(
            &[0.0, 0.0, 0.0],
            &[1.0, 0.0, 0.0],
            &[0.5, -1.0, 0.25],
            &[0.5, 1.0, 0.25],
        );
        assert!((d - 0.25).abs() < 1e-15);

        // degenerate: point vs segment
        let d = segment_distance(&[0.5, 2.0], &[0.5, 2.0], &[0.0, 0.0], &[1.0, 0.0]);
        assert!((d - 2.0).abs() < 1e-15);
    }

    #[test]
    fn segment_distance_endpoint_cases() {
        // sharing an endpoint
        let d = segment_distance(&[0.0, 0.0], &[1.0, 0.0], &[0.0, 0.0], &[0.0, 1.0]);
        assert_eq!(d, 0.0);
        // collinear, disjoint
        let d = segment_distance(&[0.0, 0.0], &[1.0, 0.0], &[3.0, 0.0], &[5.0, 0.0]);
        assert!((d - 2.0).abs() < 1e-15);
    }

    #[test]
    fn box_gap_is_lower_bound() {
        let segs = [
            ([0.0, 0.0], [1.0, 0.3], [0.2, 1.0], [1.5, 2.0]),
            ([-1.0, 2.0], [0.0, 0.0], [3.0, 3.0], [2.0, 1.0]),
        ];
        for (p1, q1, p2, q2) in segs {
            assert!(segment_box_gap(&p1, &q1, &p2, &q2) <= segment_distance(&p1, &q1, &p2, &q2) + 1e-15);
        }
    }

    #[test]
    fn shared_point_arms() {
        let o = [0.0, 0.0];
        // distinct directions: ok
        assert!(arms_meet_only_at_shared(&o, &[1.0, 0.0], &[0.0, 1.0], 1e-12));
        // straight continuation (opposite): ok
        assert!(arms_meet_only_at_shared(&o, &[1.0, 0.0], &[-1.0, 0.0], 1e-12));
        // same direction overlap: not ok
        assert!(!arms_meet_only_at_shared(&o, &[1.0, 0.0], &[2.0, 0.0], 1e-12));
        // degenerate arm: ok
        assert!(arms_meet_only_at_shared(&o, &o, &[1.0, 0.0], 1e-12));
    }
}
