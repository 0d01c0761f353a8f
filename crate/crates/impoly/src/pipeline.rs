//! Constructive approximation of maps by piecewise-linear isometries.
//!
//! Given a metric graph `(X, g)` with arbitrary signed edge energies and any
//! piecewise-linear map `f` into `R^{p,q}`, [`isometric_embed`] produces an
//! injective piecewise-linear map `h` on a subdivision of `X` whose induced
//! energies equal `g` exactly (up to floating tolerance) while `|f - h|`
//! stays below a per-shell bound. [`pl_isometry`] drops the injectivity
//! requirement and works with fewer coordinates.
//!
//! The construction runs in stages:
//!
//! 1. split the coordinates into a positive block, a middle block, and a
//!    negative block;
//! 2. perturb the vertex images into general position so the map is an
//!    embedding and the positive-plus-middle prefix embeds every closed
//!    star;
//! 3. build a dominating form `H` strictly below both `g` and the induced
//!    metric of `f`, which makes the negative block strictly short for the
//!    residual target `H - G_f^+ - G_f^*`;
//! 4. corrugate the negative block to that target, re-perturb so the middle
//!    and negative coordinates embed the fine stars while the shortness
//!    inequality survives, then corrugate the positive block to the final
//!    residual `G - G_f^* - G_h^-`;
//! 5. assemble `h = h^+ (+) f^* (+) h^-` and hand the result to the
//!    independent oracles in [`crate::verify`]. A failed verification is
//!    never accepted: the pipeline retries with a derived seed a bounded
//!    number of times and otherwise reports the failure.
//!
//! Accuracy bookkeeping: with a per-shell bound `eps_k` and far-pair image
//! separation `mu_k` (see [`compute_guard`]), the perturbation gets
//! `eps_k / 8`, each engine `min(eps_k / 4, mu_k / 8)`, and the
//! re-perturbation `min(eps_k / 8, mu_k / 16)`, so the total change stays
//! below `eps_k` and far pairs keep a positive separation.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::complex::{
    CarrierMap, ComplexError, EdgeKey, ShellDecomposition, SimplicialComplex, VertexId,
};
use crate::engine1d::{negative_engine, positive_engine, EngineError, EngineRequest};
use crate::forms::{split_map, EdgeMetric, FormsError, PLMap};
use crate::geometry::{arms_meet_only_at_shared, dist, segment_distance};
use crate::verify::{
    all_pairs_path_distance, default_slack, verify_closeness, verify_embedding, verify_isometry,
    VerificationReport,
};

const MAX_PERTURB_RETRIES: u32 = 32;
const MAX_PIPELINE_ATTEMPTS: u64 = 4;
const GUARD_PIECE_CAP: usize = 3000;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("signature ({p}, {q}) is too small: embed mode needs p >= 1, q >= 1, p + q >= 3")]
    SignatureTooSmallForEmbedding { p: usize, q: usize },
    #[error("signature ({p}, {q}) is too small: isometry mode needs p >= 1 and q >= 1")]
    SignatureTooSmallForIsometry { p: usize, q: usize },
    #[error("the pipeline works on complexes of dimension at most 1")]
    NotDimensionOne,
    #[error("complex is not connected from base vertex {base}: shells miss {missing} simplices")]
    NotConnected { base: VertexId, missing: usize },
    #[error("empty epsilon schedule")]
    EmptyEpsilons,
    #[error("epsilon schedule entries must be positive")]
    NonPositiveEpsilon,
    #[error("margin must be positive, got {0}")]
    BadMargin(f64),
    #[error("map images are not injective on the vertices")]
    NotVertexInjective,
    #[error("general-position perturbation failed after {attempts} retries")]
    PerturbationFailed { attempts: u32 },
    #[error("shortness lost on edge ({0}, {1}): slack {2}")]
    ShortnessLost(VertexId, VertexId, f64),
    #[error("verification failed after {attempts} attempts: {summary}")]
    VerificationFailed {
        attempts: u64,
        summary: String,
        report: Box<VerificationReport>,
    },
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Forms(#[from] FormsError),
}

/// Whether the result must additionally be injective.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Mode {
    Embed,
    Isometry,
}

/// One approximation problem.
#[derive(Clone, Copy)]
pub struct PipelineRequest<'a> {
    /// Prescribed edge energies on the map's complex.
    pub metric: &'a EdgeMetric,
    /// The map to approximate; its complex is the domain.
    pub map: &'a PLMap,
    pub base_vertex: VertexId,
    /// Per-shell accuracy; the last entry covers deeper shells.
    pub epsilons: &'a [f64],
    pub mode: Mode,
    pub seed: u64,
    /// Margin of the dominating form; any positive value is correct.
    pub h_margin: f64,
}

impl<'a> PipelineRequest<'a> {
    pub fn new(
        metric: &'a EdgeMetric,
        map: &'a PLMap,
        base_vertex: VertexId,
        epsilons: &'a [f64],
        mode: Mode,
        seed: u64,
    ) -> Self {
        PipelineRequest {
            metric,
            map,
            base_vertex,
            epsilons,
            mode,
            seed,
            h_margin: 1.0,
        }
    }
}

/// Pipeline output: the constructed map on a subdivision, its carrier back
/// to the input complex, the verification report, and the guard data of the
/// successful attempt.
#[derive(Clone, Debug)]
pub struct PipelineResult {
    pub map: PLMap,
    pub carrier: CarrierMap,
    pub report: VerificationReport,
    pub guard: Option<EmbeddingGuard>,
    pub attempts: u64,
}

/// Per-shell guard constants controlling how closely the engines must track
/// the map to preserve injectivity.
#[derive(Clone, Debug, Serialize)]
pub struct EmbeddingGuard {
    /// Star safety radius per shell: any two points closer than this lie in
    /// a common closed star.
    pub delta: Vec<f64>,
    /// Minimum image separation of cross-edge sub-segment pairs further
    /// apart than `delta / 2` in the domain; infinite when no pair exists.
    pub mu: Vec<f64>,
    /// `min(eps_k, mu_k / 3)` per shell.
    pub eps_eff: Vec<f64>,
}

/// Splits `f` into the first `n` positive coordinates, the middle block,
/// and the last `n` negative coordinates.
pub fn split_coordinates(f: &PLMap, n: usize) -> Result<(PLMap, PLMap, PLMap), PipelineError> {
    let (p, q) = (f.signature.p, f.signature.q);
    if p < n || q < n || p + q < 2 * n + 1 {
        return Err(PipelineError::SignatureTooSmallForEmbedding { p, q });
    }
    let mut parts = split_map(f, &[n, p + q - 2 * n, n])?;
    let minus = parts.pop().unwrap();
    let star = parts.pop().unwrap();
    let plus = parts.pop().unwrap();
    Ok((plus, star, minus))
}

/// The dominating form: per edge,
/// `H(e) = min(E_g, E_gf) - margin * (1 + |E_g| + |E_gf|)`,
/// strictly below both inputs.
pub fn construct_h(
    g: &EdgeMetric,
    g_f: &EdgeMetric,
    margin: f64,
) -> Result<EdgeMetric, PipelineError> {
    if !(margin > 0.0) {
        return Err(PipelineError::BadMargin(margin));
    }
    let mut energies = BTreeMap::new();
    for ((u, w), eg) in g.iter() {
        let ef = g_f.energy(u, w)?;
        energies.insert((u, w), eg.min(ef) - margin * (1.0 + eg.abs() + ef.abs()));
    }
    Ok(EdgeMetric::from_entries(energies))
}

/// Genericity requirements for [`perturb_general_position`].
#[derive(Clone, Debug, Default)]
pub struct GenericityPredicates {
    /// The whole map must be an embedding.
    pub global_embedding: bool,
    /// The first `k` coordinates must embed every closed star.
    pub local_embedding_prefix: Option<usize>,
    /// Coordinates `[a, b)` must be non-constant on every edge.
    pub nonconstant_range: Option<(usize, usize)>,
}

/// Perturbs vertex images by uniform noise of magnitude at most `scale`
/// until all predicates hold, halving the magnitude on failure (at most 32
/// retries). An input that already satisfies the predicates is returned
/// unchanged.
pub fn perturb_general_position(
    f: &PLMap,
    scale: f64,
    seed: u64,
    predicates: &GenericityPredicates,
) -> Result<PLMap, PipelineError> {
    let caps = vec![scale; f.complex.vertex_count()];
    perturb_with_caps(f, &caps, seed, predicates)
}

fn perturb_with_caps(
    f: &PLMap,
    caps: &[f64],
    seed: u64,
    predicates: &GenericityPredicates,
) -> Result<PLMap, PipelineError> {
    if predicates_hold(f, predicates) {
        return Ok(f.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = f.signature.dim();
    for attempt in 0..MAX_PERTURB_RETRIES {
        let shrink = 0.5f64.powi(attempt as i32);
        let mut candidate = f.clone();
        for (v, im) in candidate.images_mut().iter_mut().enumerate() {
            let cap = caps[v] * shrink;
            for k in 0..dim {
                im[k] += rng.gen_range(-1.0..1.0) * cap;
            }
        }
        if predicates_hold(&candidate, predicates) {
            return Ok(candidate);
        }
    }
    Err(PipelineError::PerturbationFailed {
        attempts: MAX_PERTURB_RETRIES,
    })
}

fn predicates_hold(f: &PLMap, predicates: &GenericityPredicates) -> bool {
    if predicates.global_embedding && !verify_embedding(f, default_slack(f)).pass {
        return false;
    }
    if let Some(prefix) = predicates.local_embedding_prefix {
        if !prefix_embeds_stars(f, prefix) {
            return false;
        }
    }
    if let Some((a, b)) = predicates.nonconstant_range {
        for (u, w) in f.complex.edges() {
            let iu = f.image(u);
            let iw = f.image(w);
            let moved = (a..b).any(|k| (iu[k] - iw[k]).abs() > 1e-14 * (1.0 + iu[k].abs()));
            if !moved {
                return false;
            }
        }
    }
    true
}

/// Whether the first `prefix` coordinates are injective on every closed
/// star: nondegenerate on each edge and, for edges sharing a vertex,
/// meeting only at the shared image. Only incident pairs need checking, so
/// this is linear in the complex for bounded vertex degrees.
fn prefix_embeds_stars(f: &PLMap, prefix: usize) -> bool {
    let edges = f.complex.edges();
    for &(u, w) in &edges {
        let d: f64 = (0..prefix)
            .map(|k| (f.image(u)[k] - f.image(w)[k]).powi(2))
            .sum();
        if d.sqrt() <= 1e-14 {
            return false;
        }
    }
    let pre = |v: VertexId| &f.image(v)[..prefix];
    let mut incident: Vec<Vec<VertexId>> = vec![Vec::new(); f.complex.vertex_count()];
    for &(u, w) in &edges {
        incident[u].push(w);
        incident[w].push(u);
    }
    for (s, fars) in incident.iter().enumerate() {
        for i in 0..fars.len() {
            for j in (i + 1)..fars.len() {
                if !arms_meet_only_at_shared(pre(s), pre(fars[i]), pre(fars[j]), 1e-12) {
                    return false;
                }
            }
        }
    }
    true
}

/// Computes the guard constants about `base`.
///
/// `delta_k` is half the shortest edge length in shell `k`, lengths taken
/// as `|signed_length(energy)|` with zero energies counting as length one.
/// `mu_k` is the minimum Euclidean distance between image sub-segments on
/// distinct edges at domain distance at least `delta_k / 2`, after refining
/// every edge into pieces shorter than a quarter of the smallest `delta`;
/// pairs touching a shell contribute to that shell's minimum. Same-edge
/// pairs are excluded: any two points of a common edge already lie in a
/// common closed star.
pub fn compute_guard(
    metric: &EdgeMetric,
    f: &PLMap,
    base: VertexId,
    epsilons: &[f64],
) -> Result<EmbeddingGuard, PipelineError> {
    if epsilons.is_empty() {
        return Err(PipelineError::EmptyEpsilons);
    }
    let x = &f.complex;
    for v in 0..x.vertex_count() {
        for w in (v + 1)..x.vertex_count() {
            if dist(f.image(v), f.image(w)) == 0.0 {
                return Err(PipelineError::NotVertexInjective);
            }
        }
    }
    let shells = x.shell_decomposition(base)?;
    let edges = x.edges();
    let length = |u: VertexId, w: VertexId| -> f64 {
        let e = metric.energy(u, w).unwrap_or(0.0);
        if e == 0.0 {
            1.0
        } else {
            e.abs().sqrt()
        }
    };

    let global_min = edges
        .iter()
        .map(|&(u, w)| length(u, w))
        .fold(f64::INFINITY, f64::min);
    let mut delta = Vec::with_capacity(shells.len());
    for shell in shells.shells() {
        let m = shell
            .iter()
            .filter_map(|s| s.as_edge())
            .map(|(u, w)| length(u, w))
            .fold(f64::INFINITY, f64::min);
        let m = if m.is_finite() {
            m
        } else if global_min.is_finite() {
            global_min
        } else {
            2.0
        };
        delta.push(0.5 * m);
    }

    let mut mu = vec![f64::INFINITY; shells.len()];
    if edges.len() >= 2 {
        let delta_min = delta.iter().copied().fold(f64::INFINITY, f64::min);
        let edge_len: Vec<f64> = edges.iter().map(|&(u, w)| length(u, w)).collect();
        // refine into pieces shorter than delta_min / 4, capped in total
        let budget_per_edge = {
            let wanted: usize = edge_len
                .iter()
                .map(|&l| (l / (delta_min / 4.0)).ceil() as usize)
                .sum();
            if wanted > GUARD_PIECE_CAP {
                (GUARD_PIECE_CAP / edges.len()).max(1)
            } else {
                usize::MAX
            }
        };
        struct Piece {
            edge: usize,
            t0: f64,
            t1: f64,
            p0: Vec<f64>,
            p1: Vec<f64>,
        }
        let mut pieces: Vec<Piece> = Vec::new();
        for (ei, &(u, w)) in edges.iter().enumerate() {
            let n = ((edge_len[ei] / (delta_min / 4.0)).ceil() as usize)
                .clamp(1, budget_per_edge);
            for i in 0..n {
                let t0 = i as f64 / n as f64;
                let t1 = (i + 1) as f64 / n as f64;
                pieces.push(Piece {
                    edge: ei,
                    t0,
                    t1,
                    p0: f.eval_edge(u, w, t0),
                    p1: f.eval_edge(u, w, t1),
                });
            }
        }
        let vdist = all_pairs_path_distance(x.vertex_count(), &edges, length);
        let edge_shell: Vec<Option<usize>> = edges
            .iter()
            .map(|&(u, w)| shells.shell_of_edge(u, w))
            .collect();
        for i in 0..pieces.len() {
            let a = &pieces[i];
            let (u1, w1) = edges[a.edge];
            let l1 = edge_len[a.edge];
            for b in pieces.iter().skip(i + 1) {
                if a.edge == b.edge {
                    continue;
                }
                let (u2, w2) = edges[b.edge];
                let l2 = edge_len[b.edge];
                let mut dom = f64::INFINITY;
                for &ta in &[a.t0, a.t1] {
                    for &tb in &[b.t0, b.t1] {
                        let through = (vdist[u1][u2] + ta * l1 + tb * l2)
                            .min(vdist[u1][w2] + ta * l1 + (1.0 - tb) * l2)
                            .min(vdist[w1][u2] + (1.0 - ta) * l1 + tb * l2)
                            .min(vdist[w1][w2] + (1.0 - ta) * l1 + (1.0 - tb) * l2);
                        dom = dom.min(through);
                    }
                }
                let bound = [edge_shell[a.edge], edge_shell[b.edge]]
                    .into_iter()
                    .flatten()
                    .filter(|&k| dom >= delta[k] / 2.0)
                    .map(|k| mu[k])
                    .fold(f64::NEG_INFINITY, f64::max);
                if bound == f64::NEG_INFINITY {
                    continue;
                }
                if crate::geometry::segment_box_gap(&a.p0, &a.p1, &b.p0, &b.p1) >= bound {
                    continue;
                }
                let img = segment_distance(&a.p0, &a.p1, &b.p0, &b.p1);
                for k in [edge_shell[a.edge], edge_shell[b.edge]].into_iter().flatten() {
                    if dom >= delta[k] / 2.0 {
                        mu[k] = mu[k].min(img);
                    }
                }
            }
        }
    }

    let eps_of = |k: usize| epsilons[k.min(epsilons.len() - 1)];
    let eps_eff = (0..shells.len())
        .map(|k| eps_of(k).min(mu[k] / 3.0))
        .collect();
    Ok(EmbeddingGuard {
        delta,
        mu,
        eps_eff,
    })
}

/// Shared validation for both pipeline modes.
fn validate(req: &PipelineRequest<'_>) -> Result<ShellDecomposition, PipelineError> {
    let x = &req.map.complex;
    if x.dimension() > 1 {
        return Err(PipelineError::NotDimensionOne);
    }
    if req.epsilons.is_empty() {
        return Err(PipelineError::EmptyEpsilons);
    }
    if req.epsilons.iter().any(|&e| !(e > 0.0)) {
        return Err(PipelineError::NonPositiveEpsilon);
    }
    if !(req.h_margin > 0.0) {
        return Err(PipelineError::BadMargin(req.h_margin));
    }
    for (u, w) in x.edges() {
        req.metric.energy(u, w)?;
    }
    let shells = x.shell_decomposition(req.base_vertex)?;
    if !shells.is_exhaustive(x) {
        let missing = x.simplex_set().len()
            - shells.shells().iter().map(|s| s.len()).sum::<usize>();
        return Err(PipelineError::NotConnected {
            base: req.base_vertex,
            missing,
        });
    }
    Ok(shells)
}

/// Runs the full pipeline in embed mode: the result is an injective
/// piecewise-linear map realizing the metric exactly, shellwise close to
/// the input map, checked by all three oracles.
pub fn isometric_embed(req: PipelineRequest<'_>) -> Result<PipelineResult, PipelineError> {
    let (p, q) = (req.map.signature.p, req.map.signature.q);
    if p < 1 || q < 1 || p + q < 3 {
        return Err(PipelineError::SignatureTooSmallForEmbedding { p, q });
    }
    let shells = validate(&req)?;
    let mut last: Option<VerificationReport> = None;
    for attempt in 0..MAX_PIPELINE_ATTEMPTS {
        let seed = req.seed.wrapping_add(attempt.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let (result, report_pass) = embed_attempt(&req, &shells, seed, attempt + 1)?;
        if report_pass {
            return Ok(result);
        }
        last = Some(result.report);
    }
    let report = last.expect("at least one attempt ran");
    Err(PipelineError::VerificationFailed {
        attempts: MAX_PIPELINE_ATTEMPTS,
        summary: summarize(&report),
        report: Box::new(report),
    })
}

fn summarize(report: &VerificationReport) -> String {
    let mut parts = Vec::new();
    if !report.isometry.pass {
        parts.push(format!(
            "energy error {} on {:?}",
            report.isometry.max_rel_error, report.isometry.worst_edge
        ));
    }
    if let Some(e) = &report.embedding {
        if !e.pass {
            parts.push(format!("embedding: {:?}", e.reason));
        }
    }
    if !report.closeness.pass {
        parts.push(format!("closeness: {:?}", report.closeness.per_shell));
    }
    if parts.is_empty() {
        "all oracles passed".into()
    } else {
        parts.join("; ")
    }
}

fn embed_attempt(
    req: &PipelineRequest<'_>,
    shells: &ShellDecomposition,
    seed: u64,
    attempt: u64,
) -> Result<(PipelineResult, bool), PipelineError> {
    let x = &req.map.complex;
    let (p, q) = (req.map.signature.p, req.map.signature.q);
    let dim = p + q;
    let eps_of = |k: usize| req.epsilons[k.min(req.epsilons.len() - 1)];

    // no edges: nothing to corrugate, the map itself is the answer
    if x.edges().is_empty() {
        let carrier = CarrierMap::identity(x);
        let report = VerificationReport {
            isometry: verify_isometry(req.map, req.metric, &carrier, 1e-9),
            embedding: Some(verify_embedding(req.map, default_slack(req.map))),
            closeness: verify_closeness(req.map, req.map, &carrier, shells, req.epsilons, 100)?,
        };
        let pass = report.pass();
        return Ok((
            PipelineResult {
                map: req.map.clone(),
                carrier,
                report,
                guard: None,
                attempts: attempt,
            },
            pass,
        ));
    }

    // stage 1: general position, budget eps/8 per vertex
    let caps: Vec<f64> = (0..x.vertex_count())
        .map(|v| {
            let incident = x.incident_edges(v);
            let k = incident
                .iter()
                .filter_map(|&(a, b)| shells.shell_of_edge(a, b))
                .min()
                .unwrap_or(0);
            eps_of(k) / 8.0
        })
        .collect();
    let predicates = GenericityPredicates {
        global_embedding: true,
        local_embedding_prefix: Some(dim - 1),
        nonconstant_range: Some((1, dim - 1)),
    };
    let f0 = perturb_with_caps(req.map, &caps, seed ^ 0x51, &predicates)?;

    // stage 2: guard constants on the perturbed map; each engine gets a
    // quarter of the closeness budget, tightened toward mu/6 when the
    // far-pair separation is the binding constraint. The tightening is
    // floored at eps/32: the engines displace points along single
    // coordinate axes, so residual collisions need several exact
    // coincidences at once, and the embedding oracle plus the seeded retry
    // loop covers that remainder without letting tooth counts explode.
    let guard = compute_guard(req.metric, &f0, req.base_vertex, req.epsilons)?;
    let engine_eps = |k: usize| {
        (eps_of(k) / 4.0).min((guard.mu[k] / 6.0).max(eps_of(k) / 32.0))
    };

    // stage 3: dominated form and the negative corrugation
    let (f_plus, f_star, f_minus) = split_coordinates(&f0, 1)?;
    let g_f0 = f0.induced_edge_energies();
    let h_form = construct_h(req.metric, &g_f0, req.h_margin)?;
    let e_plus = f_plus.induced_edge_energies();
    let e_star = f_star.induced_edge_energies();
    let neg_targets = EdgeMetric::from_entries(
        h_form
            .iter()
            .map(|((u, w), h)| {
                let t = h - e_plus.energy(u, w).unwrap() - e_star.energy(u, w).unwrap();
                ((u, w), t)
            })
            .collect(),
    );
    for ((u, w), t) in neg_targets.iter() {
        let d = dist(f_minus.image(u), f_minus.image(w));
        if !(t < 0.0) || d * d >= -t {
            return Err(PipelineError::ShortnessLost(u, w, -t - d * d));
        }
    }
    let eps_neg: Vec<f64> = (0..shells.len())
        .map(|k| engine_eps(k).max(f64::MIN_POSITIVE))
        .collect();
    let neg = negative_engine(EngineRequest {
        map: &f_minus,
        targets: &neg_targets,
        base_vertex: req.base_vertex,
        epsilons: &eps_neg,
        seed: seed ^ 0x1347,
    })?;
    let fine = neg.map.complex.clone();
    let carrier1 = neg.carrier.clone();

    // restrict the untouched blocks onto the refined complex
    let f_plus1 = f_plus.restrict_to_subdivision(&fine, &carrier1)?;
    let f_star1 = f_star.restrict_to_subdivision(&fine, &carrier1)?;

    // expected metric on the refined complex: squared-fraction shares
    let parent_of = parent_edge_table(x, &carrier1);
    let expected1 = child_share_metric(req.metric, &fine, &carrier1, &parent_of);

    // stage 4: re-perturb middle and negative so they embed the fine stars
    let caps2: Vec<f64> = (0..fine.vertex_count())
        .map(|v| {
            let k = fine
                .incident_edges(v)
                .iter()
                .filter_map(|&(a, b)| {
                    let (pu, pw) = parent_of[&(a, b)];
                    shells.shell_of_edge(pu, pw)
                })
                .min()
                .unwrap_or(0);
            (eps_of(k) / 8.0).min((guard.mu[k] / 12.0).max(eps_of(k) / 64.0))
        })
        .collect();
    let (f_star2, h_minus2) = reperturb_middle_and_negative(
        &f_plus1,
        &f_star1,
        &neg.map,
        &expected1,
        &caps2,
        seed ^ 0x2b0b,
    )?;

    // stage 5: positive corrugation to the final residual
    let e_star1 = f_star2.induced_edge_energies();
    let e_minus1 = h_minus2.induced_edge_energies();
    let pos_targets = EdgeMetric::from_entries(
        expected1
            .iter()
            .map(|((u, w), eg)| {
                (
                    (u, w),
                    eg - e_star1.energy(u, w).unwrap() - e_minus1.energy(u, w).unwrap(),
                )
            })
            .collect(),
    );
    for ((u, w), t) in pos_targets.iter() {
        let d = dist(f_plus1.image(u), f_plus1.image(w));
        if !(t > 0.0) || d * d >= t {
            return Err(PipelineError::ShortnessLost(u, w, t - d * d));
        }
    }
    let fine_shells = fine.shell_decomposition(req.base_vertex)?;
    let eps_pos = child_schedule(&fine_shells, &fine, &parent_of, shells, engine_eps);
    let pos = positive_engine(EngineRequest {
        map: &f_plus1,
        targets: &pos_targets,
        base_vertex: req.base_vertex,
        epsilons: &eps_pos,
        seed: seed ^ 0x715c,
    })?;
    let finest = pos.map.complex.clone();
    let carrier2 = pos.carrier.clone();

    // stage 6: assemble on the common subdivision
    let f_star3 = f_star2.restrict_to_subdivision(&finest, &carrier2)?;
    let h_minus3 = h_minus2.restrict_to_subdivision(&finest, &carrier2)?;
    let h = PLMap::concat(&[&pos.map, &f_star3, &h_minus3])?;
    let carrier_total = carrier1.compose(&carrier2);

    let report = VerificationReport {
        isometry: verify_isometry(&h, req.metric, &carrier_total, 1e-9),
        embedding: Some(verify_embedding(&h, default_slack(&h))),
        closeness: verify_closeness(req.map, &h, &carrier_total, shells, req.epsilons, 100)?,
    };
    let pass = report.pass();
    Ok((
        PipelineResult {
            map: h,
            carrier: carrier_total,
            report,
            guard: Some(guard),
            attempts: attempt,
        },
        pass,
    ))
}

/// Runs the pipeline in isometry mode: no middle block, no perturbation, no
/// guard; the result realizes the metric and stays shellwise close but need
/// not be injective.
pub fn pl_isometry(req: PipelineRequest<'_>) -> Result<PipelineResult, PipelineError> {
    let (p, q) = (req.map.signature.p, req.map.signature.q);
    if p < 1 || q < 1 {
        return Err(PipelineError::SignatureTooSmallForIsometry { p, q });
    }
    let shells = validate(&req)?;
    let x = &req.map.complex;
    let eps_of = |k: usize| req.epsilons[k.min(req.epsilons.len() - 1)];

    if x.edges().is_empty() {
        let carrier = CarrierMap::identity(x);
        let report = VerificationReport {
            isometry: verify_isometry(req.map, req.metric, &carrier, 1e-9),
            embedding: None,
            closeness: verify_closeness(req.map, req.map, &carrier, &shells, req.epsilons, 100)?,
        };
        let pass = report.pass();
        if !pass {
            return Err(PipelineError::VerificationFailed {
                attempts: 1,
                summary: summarize(&report),
                report: Box::new(report),
            });
        }
        return Ok(PipelineResult {
            map: req.map.clone(),
            carrier,
            report,
            guard: None,
            attempts: 1,
        });
    }

    let mut parts = split_map(req.map, &[p, q])?;
    let f_minus = parts.pop().unwrap();
    let f_plus = parts.pop().unwrap();

    let g_f = req.map.induced_edge_energies();
    let h_form = construct_h(req.metric, &g_f, req.h_margin)?;
    let e_plus = f_plus.induced_edge_energies();
    let neg_targets = EdgeMetric::from_entries(
        h_form
            .iter()
            .map(|((u, w), h)| ((u, w), h - e_plus.energy(u, w).unwrap()))
            .collect(),
    );
    for ((u, w), t) in neg_targets.iter() {
        let d = dist(f_minus.image(u), f_minus.image(w));
        if !(t < 0.0) || d * d >= -t {
            return Err(PipelineError::ShortnessLost(u, w, -t - d * d));
        }
    }
    let eps_half: Vec<f64> = (0..shells.len()).map(|k| eps_of(k) / 2.0).collect();
    let neg = negative_engine(EngineRequest {
        map: &f_minus,
        targets: &neg_targets,
        base_vertex: req.base_vertex,
        epsilons: &eps_half,
        seed: req.seed ^ 0x1347,
    })?;
    let fine = neg.map.complex.clone();
    let carrier1 = neg.carrier.clone();

    let f_plus1 = f_plus.restrict_to_subdivision(&fine, &carrier1)?;
    let parent_of = parent_edge_table(x, &carrier1);
    let expected1 = child_share_metric(req.metric, &fine, &carrier1, &parent_of);
    let e_minus1 = neg.map.induced_edge_energies();
    let pos_targets = EdgeMetric::from_entries(
        expected1
            .iter()
            .map(|((u, w), eg)| ((u, w), eg - e_minus1.energy(u, w).unwrap()))
            .collect(),
    );
    for ((u, w), t) in pos_targets.iter() {
        let d = dist(f_plus1.image(u), f_plus1.image(w));
        if !(t > 0.0) || d * d >= t {
            return Err(PipelineError::ShortnessLost(u, w, t - d * d));
        }
    }
    let fine_shells = fine.shell_decomposition(req.base_vertex)?;
    let eps_pos = child_schedule(&fine_shells, &fine, &parent_of, &shells, |k| eps_of(k) / 2.0);
    let pos = positive_engine(EngineRequest {
        map: &f_plus1,
        targets: &pos_targets,
        base_vertex: req.base_vertex,
        epsilons: &eps_pos,
        seed: req.seed ^ 0x715c,
    })?;
    let finest = pos.map.complex.clone();
    let carrier2 = pos.carrier.clone();

    let h_minus2 = neg.map.restrict_to_subdivision(&finest, &carrier2)?;
    let h = PLMap::concat(&[&pos.map, &h_minus2])?;
    let carrier_total = carrier1.compose(&carrier2);

    let report = VerificationReport {
        isometry: verify_isometry(&h, req.metric, &carrier_total, 1e-9),
        embedding: None,
        closeness: verify_closeness(req.map, &h, &carrier_total, &shells, req.epsilons, 100)?,
    };
    if !report.pass() {
        return Err(PipelineError::VerificationFailed {
            attempts: 1,
            summary: summarize(&report),
            report: Box::new(report),
        });
    }
    Ok(PipelineResult {
        map: h,
        carrier: carrier_total,
        report,
        guard: None,
        attempts: 1,
    })
}

/// Maps every child edge to its parent edge through the carrier.
fn parent_edge_table(
    parent: &SimplicialComplex,
    carrier: &CarrierMap,
) -> BTreeMap<EdgeKey, EdgeKey> {
    let mut table = BTreeMap::new();
    for (u, w) in parent.edges() {
        let chain = carrier.edge_chain(u, w);
        for pair in chain.windows(2) {
            let (a, b) = (pair[0].0, pair[1].0);
            table.insert(crate::complex::edge_key(a, b), (u, w));
        }
    }
    table
}

/// The metric each child edge must carry: its squared barycentric fraction
/// of the parent edge energy.
fn child_share_metric(
    metric: &EdgeMetric,
    child: &SimplicialComplex,
    carrier: &CarrierMap,
    parent_of: &BTreeMap<EdgeKey, EdgeKey>,
) -> EdgeMetric {
    EdgeMetric::from_fn(child, |a, b| {
        let (u, w) = parent_of[&crate::complex::edge_key(a, b)];
        let e = metric.energy(u, w).unwrap();
        let ta = carrier.carrier(a).position_on_edge(u, w).unwrap();
        let tb = carrier.carrier(b).position_on_edge(u, w).unwrap();
        let frac = (tb - ta).abs();
        frac * frac * e
    })
}

/// Per-child-shell accuracy: the tightest parent budget among the edges of
/// each child shell.
fn child_schedule(
    child_shells: &ShellDecomposition,
    child: &SimplicialComplex,
    parent_of: &BTreeMap<EdgeKey, EdgeKey>,
    parent_shells: &ShellDecomposition,
    budget: impl Fn(usize) -> f64,
) -> Vec<f64> {
    let _ = child;
    let mut eps = Vec::with_capacity(child_shells.len());
    for shell in child_shells.shells() {
        let m = shell
            .iter()
            .filter_map(|s| s.as_edge())
            .filter_map(|(a, b)| {
                let (u, w) = parent_of[&(a, b)];
                parent_shells.shell_of_edge(u, w)
            })
            .map(&budget)
            .fold(f64::INFINITY, f64::min);
        eps.push(if m.is_finite() {
            m
        } else {
            budget(0)
        });
    }
    if eps.is_empty() {
        eps.push(budget(0));
    }
    eps
}

/// Re-perturbs the middle block and the corrugated negative block so the
/// pair embeds every closed star of the refined complex, while the strict
/// shortness inequality for the upcoming positive corrugation keeps at
/// least half its slack and the map stays a global embedding.
fn reperturb_middle_and_negative(
    f_plus: &PLMap,
    f_star: &PLMap,
    h_minus: &PLMap,
    expected: &EdgeMetric,
    caps: &[f64],
    seed: u64,
) -> Result<(PLMap, PLMap), PipelineError> {
    let e_plus = f_plus.induced_edge_energies();
    let baseline_slack = |star: &PLMap, minus: &PLMap| -> Result<Vec<f64>, PipelineError> {
        let es = star.induced_edge_energies();
        let em = minus.induced_edge_energies();
        expected
            .iter()
            .map(|((u, w), eg)| {
                Ok(eg - es.energy(u, w)? - em.energy(u, w)? - e_plus.energy(u, w)?)
            })
            .collect()
    };
    let slack0 = baseline_slack(f_star, h_minus)?;
    if slack0.iter().any(|&s| !(s > 0.0)) {
        let ((u, w), _) = expected.iter().next().unwrap();
        return Err(PipelineError::ShortnessLost(u, w, 0.0));
    }

    let ok = |star: &PLMap, minus: &PLMap| -> Result<bool, PipelineError> {
        // strict inequality with at least half the original slack
        let slack = baseline_slack(star, minus)?;
        if slack
            .iter()
            .zip(&slack0)
            .any(|(&s, &s0)| s < 0.5 * s0)
        {
            return Ok(false);
        }
        // middle-and-negative pair embeds every fine closed star
        let joined = PLMap::concat(&[star, minus])?;
        if !prefix_embeds_stars(&joined, joined.signature.dim()) {
            return Ok(false);
        }
        // the intermediate map stays a global embedding
        let full = PLMap::concat(&[f_plus, star, minus])?;
        Ok(verify_embedding(&full, default_slack(&full)).pass)
    };

    if ok(f_star, h_minus)? {
        return Ok((f_star.clone(), h_minus.clone()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sdim = f_star.signature.dim();
    let mdim = h_minus.signature.dim();
    for attempt in 0..MAX_PERTURB_RETRIES {
        let shrink = 0.5f64.powi(attempt as i32);
        let mut star = f_star.clone();
        let mut minus = h_minus.clone();
        for v in 0..star.complex.vertex_count() {
            let cap = caps[v] * shrink;
            for k in 0..sdim {
                star.images_mut()[v][k] += rng.gen_range(-1.0..1.0) * cap;
            }
            for k in 0..mdim {
                minus.images_mut()[v][k] += rng.gen_range(-1.0..1.0) * cap;
            }
        }
        if ok(&star, &minus)? {
            return Ok((star, minus));
        }
    }
    Err(PipelineError::PerturbationFailed {
        attempts: MAX_PERTURB_RETRIES,
    })
}
