//! Independent verification oracles.
//!
//! These checks share no code with the constructions they examine: energies
//! are recomputed from vertex images, embeddings are checked by exhaustive
//! segment-pair tests, and closeness is measured on dense sample grids.
//! Every report is reproducible from its inputs.

use serde::Serialize;

use crate::complex::{CarrierMap, ShellDecomposition, VertexId};
use crate::forms::{minkowski_energy_diff, EdgeMetric, FormsError, PLMap};
use crate::geometry::{
    arms_meet_only_at_shared, dist, lerp, segment_box_gap, segment_distance,
};
use crate::par;

/// Per-edge energy verification result.
#[derive(Clone, Debug, Serialize)]
pub struct IsometryReport {
    pub pass: bool,
    pub tol: f64,
    pub max_rel_error: f64,
    pub worst_edge: Option<(VertexId, VertexId)>,
}

/// Embedding verification result.
#[derive(Clone, Debug, Serialize)]
pub struct EmbeddingReport {
    pub pass: bool,
    pub slack: f64,
    /// Offending pair of child edges, when failing.
    pub offending: Option<((VertexId, VertexId), (VertexId, VertexId))>,
    pub reason: Option<String>,
}

/// Shellwise closeness measurement.
#[derive(Clone, Debug, Serialize)]
pub struct ClosenessReport {
    pub pass: bool,
    /// Sup deviation per shell over the sample grid.
    pub per_shell: Vec<f64>,
    /// The bounds the deviations were checked against.
    pub epsilons: Vec<f64>,
    pub samples_per_subedge: usize,
}

/// Combined report for a pipeline run.
#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub isometry: IsometryReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub embedding: Option<EmbeddingReport>,
    pub closeness: ClosenessReport,
}

impl VerificationReport {
    pub fn pass(&self) -> bool {
        self.isometry.pass
            && self.embedding.as_ref().map_or(true, |e| e.pass)
            && self.closeness.pass
    }
}

/// Checks that `h` realizes the parent metric `g` exactly: every sub-edge of
/// barycentric fraction `t` on a parent edge of energy `E` must carry
/// induced energy `t^2 E`, which is equivalent to affine-per-sub-edge exact
/// isometry.
///
/// Errors are measured relative to the sub-edge share of the parent edge
/// scale, with an absolute noise floor of 64 ulps at the squared coordinate
/// scale: energies of extremely short sub-edges sit below what double
/// precision image coordinates can represent, and no oracle computing from
/// the same images could distinguish discrepancies under that floor.
pub fn verify_isometry(
    h: &PLMap,
    g: &EdgeMetric,
    carrier: &CarrierMap,
    tol: f64,
) -> IsometryReport {
    let floor = g
        .iter()
        .map(|(_, e)| e.abs())
        .fold(1.0f64, f64::max);
    let coord = h
        .images()
        .iter()
        .flatten()
        .fold(0.0f64, |m, &x| m.max(x.abs()));
    let noise = 64.0 * f64::EPSILON * (1.0 + coord * coord);
    let mut max_rel = 0.0f64;
    let mut worst = None;
    for ((u, w), energy) in g.iter() {
        let chain = carrier.edge_chain(u, w);
        for pair in chain.windows(2) {
            let (c1, t1) = pair[0];
            let (c2, t2) = pair[1];
            let frac = t2 - t1;
            let expected = frac * frac * energy;
            let achieved = minkowski_energy_diff(h.image(c1), h.image(c2), h.signature)
                .expect("image dimensions are consistent");
            let scale = frac * frac * energy.abs().max(floor) + noise / tol.max(1e-15);
            let rel = (achieved - expected).abs() / scale;
            if rel > max_rel {
                max_rel = rel;
                worst = Some((u, w));
            }
        }
    }
    IsometryReport {
        pass: max_rel <= tol,
        tol,
        max_rel_error: max_rel,
        worst_edge: worst,
    }
}

/// Default embedding slack: `1e-12` scaled by the image bounding-box
/// diameter.
pub fn default_slack(h: &PLMap) -> f64 {
    let dim = h.signature.dim();
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for im in h.images() {
        for k in 0..dim {
            lo[k] = lo[k].min(im[k]);
            hi[k] = hi[k].max(im[k]);
        }
    }
    let diam: f64 = (0..dim)
        .map(|k| (hi[k] - lo[k]).powi(2))
        .sum::<f64>()
        .sqrt();
    1e-12 * (1.0 + diam)
}

/// Exhaustive segment-pair embedding check in the Euclidean geometry of
/// `R^{p+q}`.
///
/// Segments sharing a domain vertex must meet only at that vertex's image;
/// all other pairs must stay further apart than `slack`; single segments
/// must be non-degenerate.
pub fn verify_embedding(h: &PLMap, slack: f64) -> EmbeddingReport {
    let edges = h.complex.edges();
    let fail = |offending, reason: String| EmbeddingReport {
        pass: false,
        slack,
        offending,
        reason: Some(reason),
    };

    for &(u, w) in &edges {
        if dist(h.image(u), h.image(w)) <= slack {
            return fail(
                Some(((u, w), (u, w))),
                format!("edge ({u}, {w}) has a degenerate image"),
            );
        }
    }

    // sweep over first-coordinate intervals: pairs separated by more than
    // the slack along any axis cannot offend, so ordering segments by their
    // lower x-bound lets each row stop early
    let mut order: Vec<usize> = (0..edges.len()).collect();
    let x_lo = |i: usize| -> f64 {
        let (u, w) = edges[i];
        h.image(u)[0].min(h.image(w)[0])
    };
    let x_hi = |i: usize| -> f64 {
        let (u, w) = edges[i];
        h.image(u)[0].max(h.image(w)[0])
    };
    order.sort_by(|&a, &b| x_lo(a).partial_cmp(&x_lo(b)).unwrap().then(a.cmp(&b)));

    let offends = |i: usize, j: usize| -> bool {
        let (u1, w1) = edges[i];
        let (u2, w2) = edges[j];
        let shared = [u1, w1].iter().copied().find(|v| *v == u2 || *v == w2);
        match shared {
            Some(s) => {
                let far1 = if u1 == s { w1 } else { u1 };
                let far2 = if u2 == s { w2 } else { u2 };
                !arms_meet_only_at_shared(h.image(s), h.image(far1), h.image(far2), 1e-12)
            }
            None => {
                let (a1, b1) = (h.image(u1), h.image(w1));
                let (a2, b2) = (h.image(u2), h.image(w2));
                segment_box_gap(a1, b1, a2, b2) <= slack
                    && segment_distance(a1, b1, a2, b2) <= slack
            }
        }
    };
    let positions: Vec<usize> = (0..order.len()).collect();
    let offending = par::map_collect(&positions, |&pos| {
        let oi = order[pos];
        let hi = x_hi(oi) + slack;
        let mut found: Option<(usize, usize)> = None;
        for &oj in &order[pos + 1..] {
            if x_lo(oj) > hi {
                break;
            }
            if offends(oi.min(oj), oi.max(oj)) {
                let pair = (oi.min(oj), oi.max(oj));
                found = Some(match found {
                    Some(old) if old <= pair => old,
                    _ => pair,
                });
            }
        }
        found
    })
    .into_iter()
    .flatten()
    .min();

    match offending {
        Some((i, j)) => {
            let shares = {
                let (u1, w1) = edges[i];
                let (u2, w2) = edges[j];
                u1 == u2 || u1 == w2 || w1 == u2 || w1 == w2
            };
            let reason = if shares {
                "segments sharing a domain vertex overlap beyond the shared image"
            } else {
                "disjoint domain segments come closer than the slack"
            };
            fail(Some((edges[i], edges[j])), reason.to_string())
        }
        None => EmbeddingReport {
            pass: true,
            slack,
            offending: None,
            reason: None,
        },
    }
}

/// Measures `sup |f - h|` per shell on a nested sample grid with
/// `samples >= 2` points per sub-edge, and compares the result against the
/// per-shell bounds (the last entry covers deeper shells).
pub fn verify_closeness(
    f: &PLMap,
    h: &PLMap,
    carrier: &CarrierMap,
    shells: &ShellDecomposition,
    epsilons: &[f64],
    samples: usize,
) -> Result<ClosenessReport, FormsError> {
    assert!(samples >= 2);
    if f.signature != h.signature {
        return Err(FormsError::ShapeMismatch);
    }
    let edges = f.complex.edges();
    let mut per_shell = vec![0.0f64; shells.len()];
    let deviations: Vec<(usize, f64, f64, f64)> = par::map_collect(&edges, |&(u, w)| {
        let shell = shells.shell_of_edge(u, w).unwrap_or(0);
        let chain = carrier.edge_chain(u, w);
        let mut sup = 0.0f64;
        let mut at_start = 0.0f64;
        let mut at_end = 0.0f64;
        for pair in chain.windows(2) {
            let (c1, t1) = pair[0];
            let (c2, t2) = pair[1];
            for s in 0..=samples {
                let r = s as f64 / samples as f64;
                let t = t1 + r * (t2 - t1);
                let fv = f.eval_edge(u, w, t);
                let hv = lerp(h.image(c1), h.image(c2), r);
                let d = dist(&fv, &hv);
                sup = sup.max(d);
                if t == 0.0 {
                    at_start = at_start.max(d);
                }
                if t == 1.0 {
                    at_end = at_end.max(d);
                }
            }
        }
        (shell, sup, at_start, at_end)
    });
    for (&(u, w), (shell, sup, at_start, at_end)) in edges.iter().zip(&deviations) {
        per_shell[*shell] = per_shell[*shell].max(*sup);
        // endpoint samples also count toward the vertex's own shell
        for (v, d) in [(u, at_start), (w, at_end)] {
            if let Some(k) = shells.shell_of(&crate::complex::Simplex::vertex(v)) {
                per_shell[k] = per_shell[k].max(*d);
            }
        }
    }
    let pass = !epsilons.is_empty()
        && per_shell.iter().enumerate().all(|(k, &d)| {
            d < epsilons[k.min(epsilons.len() - 1)]
        });
    Ok(ClosenessReport {
        pass,
        per_shell,
        epsilons: epsilons.to_vec(),
        samples_per_subedge: samples,
    })
}

/// Minimum Euclidean distance between image segments of `h` whose domain
/// distance is at least `cutoff`, by exact segment-pair distance.
///
/// Domain distance is the path metric on `h`'s complex with each edge
/// weighted by its Euclidean image length; segment-to-segment distance is
/// the minimum over endpoint pairs, which is exact for interval sets in a
/// graph metric. Returns `f64::INFINITY` when no pair qualifies.
pub fn brute_force_min_separation(h: &PLMap, cutoff: f64) -> f64 {
    let edges = h.complex.edges();
    let n = h.complex.vertex_count();
    let vdist = all_pairs_path_distance(n, &edges, |u, w| dist(h.image(u), h.image(w)));
    par::pairwise_min(edges.len(), |i, j| {
        let (u1, w1) = edges[i];
        let (u2, w2) = edges[j];
        let dom = [(u1, u2), (u1, w2), (w1, u2), (w1, w2)]
            .iter()
            .map(|&(a, b)| vdist[a][b])
            .fold(f64::INFINITY, f64::min);
        if dom >= cutoff {
            segment_distance(h.image(u1), h.image(w1), h.image(u2), h.image(w2))
        } else {
            f64::INFINITY
        }
    })
}

/// All-pairs shortest path distances on a vertex graph with nonnegative
/// edge weights. Dense Floyd-Warshall; the graphs this runs on are small.
pub(crate) fn all_pairs_path_distance(
    n: usize,
    edges: &[(VertexId, VertexId)],
    weight: impl Fn(VertexId, VertexId) -> f64,
) -> Vec<Vec<f64>> {
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for &(u, w) in edges {
        let len = weight(u, w);
        if len < d[u][w] {
            d[u][w] = len;
            d[w][u] = len;
        }
    }
    for k in 0..n {
        for i in 0..n {
            if d[i][k].is_infinite() {
                continue;
            }
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{build_complex, CarrierMap};
    use crate::engine1d::{positive_engine, EngineRequest};
    use crate::forms::MinkowskiSignature;

    fn sig(p: usize, q: usize) -> MinkowskiSignature {
        MinkowskiSignature::new(p, q).unwrap()
    }

    #[test]
    fn isometry_passes_on_affine_segment() {
        let x = build_complex(&[0, 1], &[vec![0, 1]]).unwrap();
        let h = PLMap::new(x.clone(), sig(2, 0), vec![vec![0.0, 0.0], vec![3.0, 4.0]]).unwrap();
        let g = EdgeMetric::for_complex(&x, [((0, 1), 25.0)].into()).unwrap();
        let rep = verify_isometry(&h, &g, &CarrierMap::identity(&x), 1e-9);
        assert!(rep.pass);
        assert_eq!(rep.max_rel_error, 0.0);
    }

    #[test]
    fn isometry_on_the_three_four_five_sawtooth() {
        let x = build_complex(&[0, 1], &[vec![0, 1]]).unwrap();
        let f = PLMap::new(x.clone(), sig(2, 0), vec![vec![0.0, 0.0], vec![3.0, 0.0]]).unwrap();
        let g = EdgeMetric::for_complex(&x, [((0, 1), 25.0)].into()).unwrap();
        let res = positive_engine(EngineRequest {
            map: &f,
            targets: &g,
            base_vertex: 0,
            epsilons: &[2.0],
            seed: 0,
        })
        .unwrap();
        let rep = verify_isometry(&res.map, &g, &res.carrier, 1e-12);
        assert!(rep.pass, "max rel error {}", rep.max_rel_error);

        // perturbing one interior image by 1e-3 must break it
        let mut bad = res.map.clone();
        let interior = 2; // first break vertex
        bad.images_mut()[interior][1] += 1e-3;
        let rep = verify_isometry(&bad, &g, &res.carrier, 1e-9);
        assert!(!rep.pass);
        assert_eq!(rep.worst_edge, Some((0, 1)));
    }

    #[test]
    fn isometry_is_invariant_under_block_rotations() {
        let x = build_complex(&[0, 1, 2], &[vec![0, 1], vec![1, 2]]).unwrap();
        let h = PLMap::new(
            x.clone(),
            sig(2, 1),
            vec![
                vec![0.0, 0.0, 0.5],
                vec![1.0, 0.25, -0.5],
                vec![0.5, -1.0, 2.0],
            ],
        )
        .unwrap();
        let g = h.induced_edge_energies();
        let id = CarrierMap::identity(&x);
        assert!(verify_isometry(&h, &g, &id, 1e-9).pass);

        // rotate inside the positive block: coordinates 0 and 1
        let angle = 0.7f64;
        let (c, s) = (angle.cos(), angle.sin());
        let mut rotated = h.clone();
        for im in rotated.images_mut() {
            let (a, b) = (im[0], im[1]);
            im[0] = c * a - s * b;
            im[1] = s * a + c * b;
        }
        assert!(verify_isometry(&rotated, &g, &id, 1e-9).pass);
    }

    #[test]
    fn embedding_examples() {
        // planar embedded path
        let x = build_complex(&[0, 1, 2], &[vec![0, 1], vec![1, 2]]).unwrap();
        let h = PLMap::new(
            x,
            sig(2, 0),
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0]],
        )
        .unwrap();
        assert!(verify_embedding(&h, default_slack(&h)).pass);

        // figure-X crossing of two disjoint segments
        let x = build_complex(&[0, 1, 2, 3], &[vec![0, 1], vec![2, 3]]).unwrap();
        let h = PLMap::new(
            x,
            sig(2, 0),
            vec![
                vec![-1.0, -1.0],
                vec![1.0, 1.0],
                vec![-1.0, 1.0],
                vec![1.0, -1.0],
            ],
        )
        .unwrap();
        let rep = verify_embedding(&h, default_slack(&h));
        assert!(!rep.pass);
        assert_eq!(rep.offending, Some(((0, 1), (2, 3))));

        // same-direction overlap out of a shared vertex
        let x = build_complex(&[0, 1, 2], &[vec![0, 1], vec![0, 2]]).unwrap();
        let h = PLMap::new(
            x,
            sig(2, 0),
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![2.0, 0.0]],
        )
        .unwrap();
        let rep = verify_embedding(&h, default_slack(&h));
        assert!(!rep.pass);
    }

    #[test]
    fn embedding_agrees_with_sampling_oracle() {
        // quadratic-cost point sampling oracle on small instances
        let cases: Vec<(Vec<Vec<usize>>, Vec<Vec<f64>>)> = vec![
            (
                vec![vec![0, 1], vec![1, 2], vec![2, 3]],
                vec![
                    vec![0.0, 0.0],
                    vec![1.0, 0.1],
                    vec![1.5, 1.0],
                    vec![0.2, 1.3],
                ],
            ),
            (
                vec![vec![0, 1], vec![2, 3]],
                vec![
                    vec![-1.0, -1.0],
                    vec![1.0, 1.0],
                    vec![-1.0, 1.0],
                    vec![1.0, -1.0],
                ],
            ),
        ];
        for (simps, images) in cases {
            let ids: Vec<usize> = (0..images.len()).collect();
            let x = build_complex(&ids, &simps).unwrap();
            let h = PLMap::new(x.clone(), sig(2, 0), images).unwrap();
            let slack = default_slack(&h);
            let fast = verify_embedding(&h, slack).pass;
            // oracle: sample 60 points per segment, check pair closeness
            let edges = x.edges();
            let mut oracle = true;
            for i in 0..edges.len() {
                for j in (i + 1)..edges.len() {
                    let (u1, w1) = edges[i];
                    let (u2, w2) = edges[j];
                    let shared: Vec<usize> = [u1, w1]
                        .iter()
                        .copied()
                        .filter(|v| *v == u2 || *v == w2)
                        .collect();
                    for a in 0..=60 {
                        for b in 0..=60 {
                            let ta = a as f64 / 60.0;
                            let tb = b as f64 / 60.0;
                            let pa = h.eval_edge(u1, w1, ta);
                            let pb = h.eval_edge(u2, w2, tb);
                            if dist(&pa, &pb) <= slack {
                                let at_shared = shared.iter().any(|&s| {
                                    let sa = if s == u1 { 0.0 } else { 1.0 };
                                    let sb = if s == u2 { 0.0 } else { 1.0 };
                                    (ta - sa).abs() < 1e-9 && (tb - sb).abs() < 1e-9
                                });
                                if !at_shared {
                                    oracle = false;
                                }
                            }
                        }
                    }
                }
            }
            assert_eq!(fast, oracle);
        }
    }

    #[test]
    fn closeness_zero_for_identical_maps() {
        let x = build_complex(&[0, 1, 2], &[vec![0, 1], vec![1, 2]]).unwrap();
        let f = PLMap::new(
            x.clone(),
            sig(1, 1),
            vec![vec![0.0, 0.0], vec![1.0, 0.5], vec![2.0, -0.5]],
        )
        .unwrap();
        let shells = x.shell_decomposition(0).unwrap();
        let rep =
            verify_closeness(&f, &f, &CarrierMap::identity(&x), &shells, &[0.1], 8).unwrap();
        assert!(rep.pass);
        assert!(rep.per_shell.iter().all(|&d| d == 0.0));
    }

    #[test]
    fn closeness_sees_the_tooth_height() {
        // constant input, out-and-back tooth of amplitude 0.3
        let x = build_complex(&[0, 1], &[vec![0, 1]]).unwrap();
        let f = PLMap::constant(x.clone(), sig(2, 0), vec![0.0, 0.0]).unwrap();
        let (child, carrier) = x
            .subdivide_edges_at(&[((0, 1), vec![0.5])].into())
            .unwrap();
        let h = PLMap::new(
            child,
            sig(2, 0),
            vec![vec![0.0, 0.0], vec![0.0, 0.0], vec![0.0, 0.3]],
        )
        .unwrap();
        let shells = x.shell_decomposition(0).unwrap();
        let rep = verify_closeness(&f, &h, &carrier, &shells, &[0.5], 100).unwrap();
        assert!((rep.per_shell[0] - 0.3).abs() < 1e-12);
        assert!(rep.pass);
        let rep = verify_closeness(&f, &h, &carrier, &shells, &[0.25], 100).unwrap();
        assert!(!rep.pass);
    }

    #[test]
    fn closeness_is_monotone_in_sampling_density() {
        let x = build_complex(&[0, 1], &[vec![0, 1]]).unwrap();
        let f = PLMap::new(x.clone(), sig(2, 0), vec![vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
        let (child, carrier) = x
            .subdivide_edges_at(&[((0, 1), vec![0.3, 0.7])].into())
            .unwrap();
        let h = PLMap::new(
            child,
            sig(2, 0),
            vec![
                vec![0.0, 0.0],
                vec![1.0, 0.0],
                vec![0.3, 0.21],
                vec![0.7, -0.6],
            ],
        )
        .unwrap();
        let shells = x.shell_decomposition(0).unwrap();
        let mut last = 0.0;
        for samples in [2, 4, 8, 16, 32] {
            let rep = verify_closeness(&f, &h, &carrier, &shells, &[10.0], samples).unwrap();
            assert!(rep.per_shell[0] >= last);
            last = rep.per_shell[0];
        }
    }

    #[test]
    fn min_separation_examples() {
        // two parallel unit-distance segments
        let x = build_complex(&[0, 1, 2, 3], &[vec![0, 1], vec![2, 3]]).unwrap();
        let h = PLMap::new(
            x,
            sig(2, 0),
            vec![
                vec![0.0, 0.0],
                vec![1.0, 0.0],
                vec![0.0, 1.0],
                vec![1.0, 1.0],
            ],
        )
        .unwrap();
        assert_eq!(brute_force_min_separation(&h, 0.5), 1.0);

        // single segment: no pair, sentinel
        let x = build_complex(&[0, 1], &[vec![0, 1]]).unwrap();
        let h = PLMap::new(x, sig(2, 0), vec![vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(brute_force_min_separation(&h, 10.0), f64::INFINITY);
    }

    #[test]
    fn min_separation_bounded_by_dense_sampling() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for instance in 0..5 {
            // random path graph with 4 edges in the plane
            let ids: Vec<usize> = (0..5).collect();
            let simps: Vec<Vec<usize>> = (0..4).map(|i| vec![i, i + 1]).collect();
            let x = build_complex(&ids, &simps).unwrap();
            let images: Vec<Vec<f64>> = (0..5)
                .map(|_| vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
                .collect();
            let h = PLMap::new(x.clone(), sig(2, 0), images).unwrap();
            let cutoff = 0.8;
            let exact = brute_force_min_separation(&h, cutoff);
            if !exact.is_finite() {
                continue;
            }
            // oracle: dense point sampling on every qualifying segment pair
            let edges = x.edges();
            let vd = all_pairs_path_distance(5, &edges, |u, w| dist(h.image(u), h.image(w)));
            let mut sampled = f64::INFINITY;
            for i in 0..edges.len() {
                for j in (i + 1)..edges.len() {
                    let (u1, w1) = edges[i];
                    let (u2, w2) = edges[j];
                    let dom = [(u1, u2), (u1, w2), (w1, u2), (w1, w2)]
                        .iter()
                        .map(|&(a, b)| vd[a][b])
                        .fold(f64::INFINITY, f64::min);
                    if dom < cutoff {
                        continue;
                    }
                    for a in 0..=300 {
                        for b in 0..=300 {
                            let pa = h.eval_edge(u1, w1, a as f64 / 300.0);
                            let pb = h.eval_edge(u2, w2, b as f64 / 300.0);
                            sampled = sampled.min(dist(&pa, &pb));
                        }
                    }
                }
            }
            if sampled.is_finite() {
                assert!(
                    exact <= sampled + 1e-12,
                    "instance {instance}: exact {exact} > sampled {sampled}"
                );
                // the sampled minimum can only miss by the grid resolution
                let max_len = edges
                    .iter()
                    .map(|&(u, w)| dist(h.image(u), h.image(w)))
                    .fold(0.0f64, f64::max);
                assert!(
                    sampled - exact <= 0.05 * sampled + 2.0 * max_len / 300.0,
                    "instance {instance}: sampling gap too large ({exact} vs {sampled})"
                );
            }
        }
    }
}
