//! Corrugation engines for metric graphs.
//!
//! Given a 1-dimensional complex, a short map into a Euclidean block, and a
//! strictly positive target energy per edge, [`positive_engine`] replaces
//! each image segment by a polyline of exactly the prescribed length whose
//! break points sit at matching barycentric fractions, so every sub-edge of
//! the emitted subdivision carries exactly its share of the target energy.
//! Deviation from the input map is controlled per shell about a base
//! vertex. [`negative_engine`] is the mirror for nonpositive targets into a
//! negative-definite block: the same Euclidean construction run on the raw
//! coordinates, with the achieved Minkowski energy picking up the sign.
//!
//! Two constructions cover all target dimensions: perpendicular sawteeth
//! ([`sawtooth_edge`]) when the block has at least two coordinates, and
//! in-line folds ([`fold_edge_1d`]) on the line. Both fix the endpoints,
//! keep every sub-segment at constant speed, and bound the sup deviation by
//! their excursion height.
//!
//! Per-edge constructions are independent and pure; they run through
//! [`crate::par`] and depend only on the request and seed, never on
//! execution order.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::complex::{ComplexError, EdgeKey, ShellDecomposition, VertexId};
use crate::forms::{EdgeMetric, FormsError, PLMap};
use crate::geometry::{dist, dot, lerp, norm};
use crate::par;

#[derive(Debug, Error, PartialEq)]
pub enum EngineError {
    #[error("edge ({u}, {w}) is not short: image length exceeds target by {deficit}")]
    NotShort { u: VertexId, w: VertexId, deficit: f64 },
    #[error("edge ({u}, {w}) has non-positive target energy {value}")]
    NonPositiveTarget { u: VertexId, w: VertexId, value: f64 },
    #[error("edge ({u}, {w}) has positive target energy {value}, expected <= 0")]
    PositiveTarget { u: VertexId, w: VertexId, value: f64 },
    #[error("empty epsilon schedule")]
    EmptyEpsilons,
    #[error("epsilon schedule entries must be positive")]
    NonPositiveEpsilon,
    #[error("edge ({u}, {w}) is not reachable from the base vertex")]
    UnreachableEdge { u: VertexId, w: VertexId },
    #[error("engine requires a complex of dimension at most 1")]
    NotDimensionOne,
    #[error("cannot pick a normal: ambient dimension {0} is below 2")]
    AmbientTooSmall(usize),
    #[error("normal vector is zero or not orthogonal to the segment")]
    BadNormal,
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Forms(#[from] FormsError),
}

/// One engine invocation: a short map on a metric graph, target energies,
/// and a per-shell accuracy schedule about a base vertex.
#[derive(Clone, Copy)]
pub struct EngineRequest<'a> {
    /// Input map; its complex is the graph being corrugated.
    pub map: &'a PLMap,
    /// Target energy per edge of the graph.
    pub targets: &'a EdgeMetric,
    /// Base vertex of the shell decomposition.
    pub base_vertex: VertexId,
    /// Accuracy per shell; the last entry covers deeper shells.
    pub epsilons: &'a [f64],
    /// Seed for the deterministic normal fallback.
    pub seed: u64,
}

/// Engine output: the corrugated map on a subdivision, its carrier back to
/// the input graph, the achieved energies per sub-edge, and a per-shell
/// bound on the deviation from the input map.
#[derive(Clone, Debug)]
pub struct EngineResult {
    pub map: PLMap,
    pub carrier: crate::complex::CarrierMap,
    pub achieved: EdgeMetric,
    pub shell_deviation: Vec<f64>,
}

/// Least tooth count `m` such that the sawtooth amplitude plus the
/// within-tooth drift stays below `eps`:
/// `sqrt(target^2 - base^2) / (2m) + base / m < eps`.
pub fn tooth_count(target_length: f64, base_length: f64, eps: f64) -> usize {
    let excess = (target_length * target_length - base_length * base_length)
        .max(0.0)
        .sqrt();
    let bound = (excess / 2.0 + base_length) / eps;
    let mut m = (bound.floor() as usize).max(1);
    while excess / (2.0 * m as f64) + base_length / m as f64 >= eps {
        m += 1;
    }
    m
}

/// Sawtooth amplitude for `m` teeth: perpendicular excursion height that
/// makes the zigzag of `2m` equal segments reach the target length.
pub fn sawtooth_amplitude(target_length: f64, base_length: f64, m: usize) -> f64 {
    (target_length * target_length - base_length * base_length)
        .max(0.0)
        .sqrt()
        / (2.0 * m as f64)
}

/// Polyline from `a` to `b` of exact Euclidean length `target_length` made
/// of `2m` equal segments zigzagging along `normal`.
///
/// Break points sit at equal fractions `i / 2m`; odd break points are
/// offset by the amplitude, so the deviation from the segment `[a, b]`
/// never exceeds it.
pub fn sawtooth_edge(
    a: &[f64],
    b: &[f64],
    target_length: f64,
    m: usize,
    normal: &[f64],
) -> Result<Vec<Vec<f64>>, EngineError> {
    let dim = a.len();
    if dim < 2 {
        return Err(EngineError::AmbientTooSmall(dim));
    }
    assert!(m >= 1 && target_length > 0.0);
    let base = dist(a, b);
    if base > target_length * (1.0 + 1e-12) + 1e-300 {
        return Err(EngineError::NotShort {
            u: 0,
            w: 0,
            deficit: base - target_length,
        });
    }
    let nn = norm(normal);
    if (nn - 1.0).abs() > 1e-9 {
        return Err(EngineError::BadNormal);
    }
    let diff: Vec<f64> = b.iter().zip(a).map(|(x, y)| x - y).collect();
    if dot(normal, &diff).abs() > 1e-12 * (1.0 + base) {
        return Err(EngineError::BadNormal);
    }

    let amp = sawtooth_amplitude(target_length, base, m);
    let steps = 2 * m;
    let mut points = Vec::with_capacity(steps + 1);
    for i in 0..=steps {
        let t = i as f64 / steps as f64;
        let mut p = lerp(a, b, t);
        if i % 2 == 1 {
            for k in 0..dim {
                p[k] += amp * normal[k];
            }
        }
        points.push(p);
    }
    points[steps] = b.to_vec();
    Ok(points)
}

/// In-line fold: positions on the real line from `a` to `b` whose polyline
/// has exact total length `target_length`, using
/// `k = ceil((target - |b - a|) / (2 eps))` forward-and-back excursions of
/// equal size. The deviation from the affine interpolation of `[a, b]` is
/// at most the excursion size, which is at most `eps`.
pub fn fold_edge_1d(a: f64, b: f64, target_length: f64, eps: f64) -> Result<Vec<f64>, EngineError> {
    assert!(target_length > 0.0 && eps > 0.0);
    let base = (b - a).abs();
    if base > target_length * (1.0 + 1e-12) + 1e-300 {
        return Err(EngineError::NotShort {
            u: 0,
            w: 0,
            deficit: base - target_length,
        });
    }
    let slack = (target_length - base).max(0.0);
    let k = (slack / (2.0 * eps)).ceil() as usize;
    if k == 0 {
        return Ok(vec![a, b]);
    }
    let dir = if b >= a { 1.0 } else { -1.0 };
    let x = slack / (2.0 * k as f64);
    let d = base / k as f64;
    let mut points = vec![a];
    let mut pos = a;
    let min_move = 1e-12 * target_length;
    for _ in 0..k {
        // run half the chunk, excurse forward, fall back, run the rest
        for delta in [d / 2.0, x, -x, d / 2.0] {
            if delta.abs() <= min_move {
                continue;
            }
            pos += dir * delta;
            points.push(pos);
        }
    }
    let last = points.len() - 1;
    points[last] = b;
    Ok(points)
}

/// Deterministic unit vector orthogonal to `direction`: the lowest-index
/// standard basis vector not parallel to it, orthogonalized and normalized.
/// The seed only enters when the result collides with a vector in `used`.
pub fn pick_normal(
    direction: &[f64],
    used: &[Vec<f64>],
    seed: u64,
) -> Result<Vec<f64>, EngineError> {
    let dim = direction.len();
    if dim < 2 {
        return Err(EngineError::AmbientTooSmall(dim));
    }
    let dn = norm(direction);
    let unit: Vec<f64> = if dn <= 1e-300 {
        let mut e = vec![0.0; dim];
        e[0] = 1.0;
        e
    } else {
        direction.iter().map(|x| x / dn).collect()
    };

    let axis = (0..dim)
        .find(|&i| unit[i].abs() < 1.0 - 1e-9)
        .expect("a unit vector cannot align with every axis");
    let mut n: Vec<f64> = (0..dim)
        .map(|k| (if k == axis { 1.0 } else { 0.0 }) - unit[axis] * unit[k])
        .collect();
    normalize(&mut n);

    let collides = |v: &[f64]| used.iter().any(|u| dot(v, u).abs() > 1.0 - 1e-9);
    if !collides(&n) {
        return Ok(n);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..64 {
        let mut cand: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let along = dot(&cand, &unit);
        for k in 0..dim {
            cand[k] -= along * unit[k];
        }
        if norm(&cand) < 1e-9 {
            continue;
        }
        normalize(&mut cand);
        if !collides(&cand) {
            return Ok(cand);
        }
    }
    Err(EngineError::BadNormal)
}

fn normalize(v: &mut [f64]) {
    let n = norm(v);
    for x in v.iter_mut() {
        *x /= n;
    }
}

/// How one edge gets corrugated: interior break fractions, their images,
/// and the certified deviation bound.
struct EdgePlan {
    edge: EdgeKey,
    fractions: Vec<f64>,
    points: Vec<Vec<f64>>,
    deviation: f64,
}

/// Runs the engine for strictly positive targets: the output restricted to
/// each edge is a polyline of exact Euclidean length `sqrt(target)`, with
/// break points at fractions matching arc length, so every sub-edge carries
/// exactly its squared share of the target energy.
pub fn positive_engine(req: EngineRequest<'_>) -> Result<EngineResult, EngineError> {
    run_engine(req, false)
}

/// Mirror of [`positive_engine`] for nonpositive targets into a
/// negative-definite block: target lengths are `sqrt(|target|)` in the
/// Euclidean geometry of the block and the achieved Minkowski energy per
/// sub-edge equals its share of the target exactly, sign restored.
pub fn negative_engine(req: EngineRequest<'_>) -> Result<EngineResult, EngineError> {
    run_engine(req, true)
}

fn run_engine(req: EngineRequest<'_>, negative: bool) -> Result<EngineResult, EngineError> {
    let graph = &req.map.complex;
    if graph.dimension() > 1 {
        return Err(EngineError::NotDimensionOne);
    }
    if req.epsilons.is_empty() {
        return Err(EngineError::EmptyEpsilons);
    }
    if req.epsilons.iter().any(|&e| !(e > 0.0)) {
        return Err(EngineError::NonPositiveEpsilon);
    }
    let shells = graph.shell_decomposition(req.base_vertex)?;
    let edges = graph.edges();
    for &(u, w) in &edges {
        if shells.shell_of_edge(u, w).is_none() {
            return Err(EngineError::UnreachableEdge { u, w });
        }
    }

    let dim = req.map.signature.dim();
    let plans: Vec<Result<EdgePlan, EngineError>> = par::map_collect(&edges, |&(u, w)| {
        plan_edge(&req, &shells, u, w, dim, negative)
    });
    let plans: Vec<EdgePlan> = plans.into_iter().collect::<Result<_, _>>()?;

    let breaks: BTreeMap<EdgeKey, Vec<f64>> = plans
        .iter()
        .map(|p| (p.edge, p.fractions.clone()))
        .collect();
    let (child, carrier) = graph.subdivide_edges_at(&breaks)?;

    let plan_by_edge: BTreeMap<EdgeKey, &EdgePlan> =
        plans.iter().map(|p| (p.edge, p)).collect();
    let mut images: Vec<Vec<f64>> = req.map.images().to_vec();
    images.reserve(child.vertex_count() - images.len());
    // subdivide_edges_at appends new vertices per edge in break-map order
    for (&(u, w), fr) in &breaks {
        if fr.is_empty() {
            continue;
        }
        images.extend(plan_by_edge[&(u, w)].points.iter().cloned());
    }
    debug_assert_eq!(images.len(), child.vertex_count());
    let out = PLMap::new(child, req.map.signature, images)?;
    let achieved = out.induced_edge_energies();

    let mut shell_deviation = vec![0.0f64; shells.len()];
    for p in &plans {
        let k = shells.shell_of_edge(p.edge.0, p.edge.1).unwrap();
        shell_deviation[k] = shell_deviation[k].max(p.deviation);
    }

    Ok(EngineResult {
        map: out,
        carrier,
        achieved,
        shell_deviation,
    })
}

fn plan_edge(
    req: &EngineRequest<'_>,
    shells: &ShellDecomposition,
    u: VertexId,
    w: VertexId,
    dim: usize,
    negative: bool,
) -> Result<EdgePlan, EngineError> {
    let raw = req.targets.energy(u, w)?;
    let target_sq = if negative {
        if raw > 0.0 {
            return Err(EngineError::PositiveTarget { u, w, value: raw });
        }
        -raw
    } else {
        if raw <= 0.0 {
            return Err(EngineError::NonPositiveTarget { u, w, value: raw });
        }
        raw
    };
    let a = req.map.image(u);
    let b = req.map.image(w);
    let base = dist(a, b);
    let target_len = target_sq.sqrt();
    if base * base > target_sq * (1.0 + 1e-9) + 1e-300 {
        return Err(EngineError::NotShort {
            u,
            w,
            deficit: base - target_len,
        });
    }
    let identity = EdgePlan {
        edge: (u, w),
        fractions: Vec::new(),
        points: Vec::new(),
        deviation: 0.0,
    };
    if target_sq == 0.0 {
        // only reachable in the negative engine, with a collapsed image
        return Ok(identity);
    }

    let shell = shells.shell_of_edge(u, w).unwrap();
    let eps = req.epsilons[shell.min(req.epsilons.len() - 1)];

    // already isometric: keep the edge as is
    if target_len - base.min(target_len) <= 1e-15 * target_len {
        return Ok(identity);
    }

    if dim == 1 {
        let positions = fold_edge_1d(a[0], b[0], target_len, eps)?;
        let mut fractions = Vec::with_capacity(positions.len() - 2);
        let mut points = Vec::with_capacity(positions.len() - 2);
        let mut cum = 0.0;
        for i in 1..positions.len() - 1 {
            cum += (positions[i] - positions[i - 1]).abs();
            fractions.push(cum / target_len);
            points.push(vec![positions[i]]);
        }
        let slack = target_len - base;
        let k = (slack / (2.0 * eps)).ceil();
        let deviation = if k > 0.0 { slack / (2.0 * k) } else { 0.0 };
        Ok(EdgePlan {
            edge: (u, w),
            fractions,
            points,
            deviation,
        })
    } else {
        let m = tooth_count(target_len, base, eps);
        let direction: Vec<f64> = if base > 1e-12 * (1.0 + target_len) {
            b.iter().zip(a).map(|(x, y)| x - y).collect()
        } else {
            let mut e = vec![0.0; dim];
            e[0] = 1.0;
            e
        };
        let normal = pick_normal(&direction, &[], req.seed ^ edge_tag(u, w))?;
        let polyline = sawtooth_edge(a, b, target_len, m, &normal).map_err(|e| match e {
            EngineError::NotShort { deficit, .. } => EngineError::NotShort { u, w, deficit },
            other => other,
        })?;
        let steps = polyline.len() - 1;
        let fractions = (1..steps).map(|i| i as f64 / steps as f64).collect();
        let points = polyline[1..steps].to_vec();
        Ok(EdgePlan {
            edge: (u, w),
            fractions,
            points,
            deviation: sawtooth_amplitude(target_len, base, m),
        })
    }
}

fn edge_tag(u: VertexId, w: VertexId) -> u64 {
    (u as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ (w as u64)
}
