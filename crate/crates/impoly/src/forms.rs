//! Edge metrics, quadratic forms, Minkowski energies, and map splitting.
//!
//! An edge metric assigns a real *energy* (signed squared length) to every
//! edge. On a simplex `(v0, ..., vk)` the energies determine a symmetric
//! bilinear form on the edge vectors `w_i = v_i - v0` through the
//! polarization identity
//!
//! ```text
//! <w_i, w_j> = (E(e_0i) + E(e_0j) - E(e_ij)) / 2
//! ```
//!
//! so the Gram matrix, and with it the signature, is determined by edge
//! data alone. A piecewise-linear map into `R^{p,q}` induces an edge metric
//! by evaluating the Minkowski form on image differences; splitting the
//! coordinates into contiguous blocks splits the induced form additively.
//!
//! Energies are the canonical storage unit. Signed lengths convert through
//! [`signed_square`] / [`signed_length`] at the boundary.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_traits::Num;
use thiserror::Error;

use crate::complex::{edge_key, EdgeKey, SimplicialComplex, VertexId};

#[derive(Debug, Error, PartialEq)]
pub enum FormsError {
    #[error("vector has length {got}, signature requires {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("edge ({0}, {1}) carries no energy")]
    MissingEnergy(VertexId, VertexId),
    #[error("energy on edge ({0}, {1}) is not finite")]
    NonFiniteEnergy(VertexId, VertexId),
    #[error("metric assigns energy to ({0}, {1}) which is not an edge of the complex")]
    UnknownEdge(VertexId, VertexId),
    #[error("forms disagree in simplex or vertex order")]
    ShapeMismatch,
    #[error("invalid coordinate partition: {0}")]
    BadPartition(String),
    #[error("vertex {0} has no image")]
    MissingImage(VertexId),
    #[error("signature must have p + q >= 1")]
    EmptySignature,
}

/// Signature of a Minkowski inner product: `p` positive directions followed
/// by `q` negative ones.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MinkowskiSignature {
    pub p: usize,
    pub q: usize,
}

impl MinkowskiSignature {
    pub fn new(p: usize, q: usize) -> Result<Self, FormsError> {
        if p + q == 0 {
            return Err(FormsError::EmptySignature);
        }
        Ok(MinkowskiSignature { p, q })
    }

    /// Euclidean signature `(n, 0)`.
    pub fn euclidean(n: usize) -> Result<Self, FormsError> {
        Self::new(n, 0)
    }

    pub fn dim(&self) -> usize {
        self.p + self.q
    }

    /// Sign of coordinate `k`: `+1` for the first `p`, `-1` after.
    pub fn eta(&self, k: usize) -> f64 {
        if k < self.p {
            1.0
        } else {
            -1.0
        }
    }
}

/// `x^2` with the sign of `x`; converts signed lengths to energies.
pub fn signed_square(x: f64) -> f64 {
    if x >= 0.0 {
        x * x
    } else {
        -(x * x)
    }
}

/// Inverse of [`signed_square`].
pub fn signed_length(energy: f64) -> f64 {
    if energy >= 0.0 {
        energy.sqrt()
    } else {
        -((-energy).sqrt())
    }
}

/// The Minkowski energy `sum_{i<p} v_i^2 - sum_{i>=p} v_i^2`.
pub fn minkowski_energy(v: &[f64], sig: MinkowskiSignature) -> Result<f64, FormsError> {
    if v.len() != sig.dim() {
        return Err(FormsError::LengthMismatch {
            expected: sig.dim(),
            got: v.len(),
        });
    }
    let mut pos = 0.0;
    let mut neg = 0.0;
    for (k, x) in v.iter().enumerate() {
        if k < sig.p {
            pos += x * x;
        } else {
            neg += x * x;
        }
    }
    Ok(pos - neg)
}

/// Minkowski energy of the difference of two points.
pub fn minkowski_energy_diff(
    a: &[f64],
    b: &[f64],
    sig: MinkowskiSignature,
) -> Result<f64, FormsError> {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    minkowski_energy(&d, sig)
}

/// A signed energy per edge of a complex.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeMetric {
    energies: BTreeMap<EdgeKey, f64>,
}

impl EdgeMetric {
    /// Builds a metric for `x`, requiring exactly one finite energy per edge.
    pub fn for_complex(
        x: &SimplicialComplex,
        energies: BTreeMap<EdgeKey, f64>,
    ) -> Result<Self, FormsError> {
        for (&(u, w), &e) in &energies {
            if !x.has_edge(u, w) {
                return Err(FormsError::UnknownEdge(u, w));
            }
            if !e.is_finite() {
                return Err(FormsError::NonFiniteEnergy(u, w));
            }
        }
        for (u, w) in x.edges() {
            if !energies.contains_key(&(u, w)) {
                return Err(FormsError::MissingEnergy(u, w));
            }
        }
        Ok(EdgeMetric { energies })
    }

    /// Builds a metric by evaluating `f` on every edge of `x`.
    pub fn from_fn(x: &SimplicialComplex, mut f: impl FnMut(VertexId, VertexId) -> f64) -> Self {
        EdgeMetric {
            energies: x.edges().into_iter().map(|(u, w)| ((u, w), f(u, w))).collect(),
        }
    }

    /// Wraps raw entries without a coverage check against a complex.
    pub fn from_entries(energies: BTreeMap<EdgeKey, f64>) -> Self {
        EdgeMetric { energies }
    }

    pub fn energy(&self, a: VertexId, b: VertexId) -> Result<f64, FormsError> {
        let (u, w) = edge_key(a, b);
        self.energies
            .get(&(u, w))
            .copied()
            .ok_or(FormsError::MissingEnergy(u, w))
    }

    pub fn iter(&self) -> impl Iterator<Item = (EdgeKey, f64)> + '_ {
        self.energies.iter().map(|(&e, &v)| (e, v))
    }

    pub fn edges(&self) -> impl Iterator<Item = EdgeKey> + '_ {
        self.energies.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }
}

/// Polarization of three energies into a bilinear-form entry. Generic over
/// the scalar so exact (rational) and floating-point callers share the same
/// arithmetic path.
pub fn polarize<T: Num + Clone>(e_0i: T, e_0j: T, e_ij: T) -> T {
    let two = T::one() + T::one();
    (e_0i + e_0j - e_ij) / two
}

/// Gram matrix of a `k`-simplex from an energy oracle.
///
/// `energy(i, j)` must return the energy of the edge between local vertices
/// `i < j` in `0..=k`. Entry `(i, j)` of the result is `<w_{i+1}, w_{j+1}>`.
pub fn gram_from_energies<T, F>(k: usize, energy: F) -> Vec<Vec<T>>
where
    T: Num + Clone,
    F: Fn(usize, usize) -> T,
{
    let mut gram = vec![vec![T::zero(); k]; k];
    for i in 0..k {
        for j in i..k {
            let entry = if i == j {
                energy(0, i + 1)
            } else {
                polarize(energy(0, i + 1), energy(0, j + 1), energy(i + 1, j + 1))
            };
            gram[i][j] = entry.clone();
            gram[j][i] = entry;
        }
    }
    gram
}

/// The energy the Gram matrix assigns back to the edge between local
/// vertices `i < j` of the simplex: `G(w_i - w_j)` (with `w_0 = 0`).
pub fn reconstruct_edge_energy<T: Num + Clone>(gram: &[Vec<T>], i: usize, j: usize) -> T {
    assert!(i < j);
    if i == 0 {
        gram[j - 1][j - 1].clone()
    } else {
        let (a, b) = (i - 1, j - 1);
        let two = T::one() + T::one();
        gram[a][a].clone() + gram[b][b].clone() - two * gram[a][b].clone()
    }
}

/// Symmetric Gram matrix of a simplex under an edge metric.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticForm {
    /// Ordered vertex list `(v0, ..., vk)`; `v0` is the base.
    pub simplex: Vec<VertexId>,
    /// `k x k` entries `<w_i, w_j>` for `w_i = v_i - v0`.
    pub gram: Vec<Vec<f64>>,
}

impl QuadraticForm {
    pub fn order(&self) -> usize {
        self.gram.len()
    }

    pub fn zero(simplex: Vec<VertexId>) -> Self {
        let k = simplex.len() - 1;
        QuadraticForm {
            simplex,
            gram: vec![vec![0.0; k]; k],
        }
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.gram
            .iter()
            .flatten()
            .fold(0.0f64, |m, &x| m.max(x.abs()))
    }

    /// Scale-aware default tolerance for signature classification.
    pub fn default_tol(&self) -> f64 {
        1e-9 * (1.0 + self.max_abs_entry())
    }

    fn to_dmatrix(&self) -> DMatrix<f64> {
        let k = self.order();
        DMatrix::from_fn(k, k, |i, j| self.gram[i][j])
    }

    /// Eigenvalues of the symmetric Gram matrix, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let k = self.order();
        if k == 0 {
            return Vec::new();
        }
        let mut ev: Vec<f64> = self
            .to_dmatrix()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ev
    }
}

/// Builds the Gram matrix of `simplex` (in the given vertex order) from an
/// edge metric via polarization.
pub fn gram_matrix(
    simplex: &[VertexId],
    metric: &EdgeMetric,
) -> Result<QuadraticForm, FormsError> {
    let k = simplex.len() - 1;
    for i in 0..=k {
        for j in (i + 1)..=k {
            metric.energy(simplex[i], simplex[j])?;
        }
    }
    let gram = gram_from_energies(k, |i, j| {
        metric
            .energy(simplex[i], simplex[j])
            .expect("energies checked above")
    });
    Ok(QuadraticForm {
        simplex: simplex.to_vec(),
        gram,
    })
}

/// Counts of eigenvalues above `tol`, within `[-tol, tol]`, and below
/// `-tol`: the signature `(n_plus, n_zero, n_minus)`.
pub fn signature(form: &QuadraticForm, tol: f64) -> (usize, usize, usize) {
    let mut plus = 0;
    let mut zero = 0;
    let mut minus = 0;
    for ev in form.eigenvalues() {
        if ev > tol {
            plus += 1;
        } else if ev < -tol {
            minus += 1;
        } else {
            zero += 1;
        }
    }
    (plus, zero, minus)
}

/// Whether `g - g_f` is positive semidefinite (definite when `strict`),
/// tested through eigenvalues of the difference.
pub fn is_short(
    g_f: &QuadraticForm,
    g: &QuadraticForm,
    strict: bool,
    tol: f64,
) -> Result<bool, FormsError> {
    let diff = combine(g, g_f, |a, b| a - b)?;
    let ev = diff.eigenvalues();
    Ok(if strict {
        ev.iter().all(|&x| x > tol)
    } else {
        ev.iter().all(|&x| x >= -tol)
    })
}

/// Entrywise sum of two forms over the same ordered simplex.
pub fn sum_forms(a: &QuadraticForm, b: &QuadraticForm) -> Result<QuadraticForm, FormsError> {
    combine(a, b, |x, y| x + y)
}

fn combine(
    a: &QuadraticForm,
    b: &QuadraticForm,
    f: impl Fn(f64, f64) -> f64,
) -> Result<QuadraticForm, FormsError> {
    if a.simplex != b.simplex || a.order() != b.order() {
        return Err(FormsError::ShapeMismatch);
    }
    let k = a.order();
    let gram = (0..k)
        .map(|i| (0..k).map(|j| f(a.gram[i][j], b.gram[i][j])).collect())
        .collect();
    Ok(QuadraticForm {
        simplex: a.simplex.clone(),
        gram,
    })
}

/// A map that is affine on every simplex, determined by vertex images in
/// `R^{p,q}`.
#[derive(Clone, Debug, PartialEq)]
pub struct PLMap {
    pub complex: SimplicialComplex,
    pub signature: MinkowskiSignature,
    images: Vec<Vec<f64>>,
}

impl PLMap {
    pub fn new(
        complex: SimplicialComplex,
        signature: MinkowskiSignature,
        images: Vec<Vec<f64>>,
    ) -> Result<Self, FormsError> {
        if images.len() != complex.vertex_count() {
            return Err(FormsError::MissingImage(images.len()));
        }
        for (v, im) in images.iter().enumerate() {
            if im.len() != signature.dim() {
                return Err(FormsError::LengthMismatch {
                    expected: signature.dim(),
                    got: im.len(),
                });
            }
            if im.iter().any(|x| !x.is_finite()) {
                return Err(FormsError::MissingImage(v));
            }
        }
        Ok(PLMap {
            complex,
            signature,
            images,
        })
    }

    /// Constant map sending every vertex to `point`.
    pub fn constant(
        complex: SimplicialComplex,
        signature: MinkowskiSignature,
        point: Vec<f64>,
    ) -> Result<Self, FormsError> {
        let n = complex.vertex_count();
        PLMap::new(complex, signature, vec![point; n])
    }

    pub fn image(&self, v: VertexId) -> &[f64] {
        &self.images[v]
    }

    pub fn images(&self) -> &[Vec<f64>] {
        &self.images
    }

    pub fn images_mut(&mut self) -> &mut [Vec<f64>] {
        &mut self.images
    }

    /// Value at parameter `t` along the edge `(u, w)`, measured from `u`.
    pub fn eval_edge(&self, u: VertexId, w: VertexId, t: f64) -> Vec<f64> {
        crate::geometry::lerp(&self.images[u], &self.images[w], t)
    }

    /// The edge metric induced by this map: per edge, the Minkowski energy
    /// of the image difference.
    pub fn induced_edge_energies(&self) -> EdgeMetric {
        EdgeMetric::from_fn(&self.complex, |u, w| {
            minkowski_energy_diff(&self.images[u], &self.images[w], self.signature)
                .expect("image dimensions checked at construction")
        })
    }

    /// Restriction to a contiguous coordinate range, with the signature the
    /// range inherits from this map's block structure.
    pub fn coordinate_block(&self, start: usize, len: usize) -> Result<PLMap, FormsError> {
        let dim = self.signature.dim();
        if start + len > dim || len == 0 {
            return Err(FormsError::BadPartition(format!(
                "block [{start}, {}) out of range or empty",
                start + len
            )));
        }
        let p = self.signature.p.saturating_sub(start).min(len);
        let sig = MinkowskiSignature::new(p, len - p)?;
        let images = self
            .images
            .iter()
            .map(|im| im[start..start + len].to_vec())
            .collect();
        PLMap::new(self.complex.clone(), sig, images)
    }

    /// The same map re-expressed on a subdivision of its complex: each
    /// child vertex takes the barycentric combination of the parent images
    /// its carrier prescribes. Affine on each parent simplex, so induced
    /// sub-edge energies scale by squared fractions.
    pub fn restrict_to_subdivision(
        &self,
        child: &SimplicialComplex,
        carrier: &crate::complex::CarrierMap,
    ) -> Result<PLMap, FormsError> {
        let dim = self.signature.dim();
        let images = (0..child.vertex_count())
            .map(|v| {
                let c = carrier.carrier(v);
                let mut im = vec![0.0; dim];
                for (coord, &pv) in c.coords.iter().zip(c.simplex.vertices()) {
                    for k in 0..dim {
                        im[k] += coord * self.images[pv][k];
                    }
                }
                im
            })
            .collect();
        PLMap::new(child.clone(), self.signature, images)
    }

    /// Concatenates component maps over the same complex back into one map.
    pub fn concat(parts: &[&PLMap]) -> Result<PLMap, FormsError> {
        assert!(!parts.is_empty());
        let complex = parts[0].complex.clone();
        let p: usize = parts.iter().map(|m| m.signature.p).sum();
        let q: usize = parts.iter().map(|m| m.signature.q).sum();
        let sig = MinkowskiSignature::new(p, q)?;
        let n = complex.vertex_count();
        let mut images = vec![Vec::with_capacity(sig.dim()); n];
        for part in parts {
            if part.complex != complex {
                return Err(FormsError::ShapeMismatch);
            }
            for (v, im) in part.images.iter().enumerate() {
                images[v].extend_from_slice(im);
            }
        }
        PLMap::new(complex, sig, images)
    }
}

/// Splits `f` into component maps along contiguous coordinate blocks.
///
/// `blocks` lists the widths, summing to `p + q`. Because the positive
/// coordinates form a prefix, every contiguous block inherits a well-formed
/// signature; per edge, the induced energies of the components sum to the
/// induced energy of `f`.
pub fn split_map(f: &PLMap, blocks: &[usize]) -> Result<Vec<PLMap>, FormsError> {
    let total: usize = blocks.iter().sum();
    if total != f.signature.dim() {
        return Err(FormsError::BadPartition(format!(
            "blocks sum to {total}, map has {} coordinates",
            f.signature.dim()
        )));
    }
    if blocks.iter().any(|&b| b == 0) {
        return Err(FormsError::BadPartition("empty block".into()));
    }
    let mut out = Vec::with_capacity(blocks.len());
    let mut start = 0;
    for &len in blocks {
        out.push(f.coordinate_block(start, len)?);
        start += len;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::build_complex;
    use num_rational::Ratio;

    fn sig(p: usize, q: usize) -> MinkowskiSignature {
        MinkowskiSignature::new(p, q).unwrap()
    }

    #[test]
    fn signed_square_and_length() {
        assert_eq!(signed_square(3.0), 9.0);
        assert_eq!(signed_square(-3.0), -9.0);
        assert_eq!(signed_square(0.0), 0.0);
        assert_eq!(signed_length(9.0), 3.0);
        assert_eq!(signed_length(-9.0), -3.0);
        assert_eq!(signed_length(0.0), 0.0);
    }

    #[test]
    fn minkowski_energy_examples() {
        assert_eq!(minkowski_energy(&[1.0, 1.0], sig(1, 1)).unwrap(), 0.0);
        assert_eq!(minkowski_energy(&[2.0, 1.0], sig(1, 1)).unwrap(), 3.0);
        assert_eq!(minkowski_energy(&[0.0, 2.0], sig(1, 1)).unwrap(), -4.0);
        assert!(matches!(
            minkowski_energy(&[1.0], sig(1, 1)),
            Err(FormsError::LengthMismatch { expected: 2, got: 1 })
        ));
    }

    fn triangle_metric(e01: f64, e02: f64, e12: f64) -> (SimplicialComplex, EdgeMetric) {
        let x = build_complex(&[0, 1, 2], &[vec![0, 1, 2]]).unwrap();
        let m = EdgeMetric::for_complex(
            &x,
            [((0, 1), e01), ((0, 2), e02), ((1, 2), e12)].into(),
        )
        .unwrap();
        (x, m)
    }

    #[test]
    fn gram_matrix_examples() {
        let (_, m) = triangle_metric(1.0, 1.0, 1.0);
        let g = gram_matrix(&[0, 1, 2], &m).unwrap();
        assert_eq!(g.gram, vec![vec![1.0, 0.5], vec![0.5, 1.0]]);

        let (_, m) = triangle_metric(1.0, -1.0, 1.0);
        let g = gram_matrix(&[0, 1, 2], &m).unwrap();
        assert_eq!(g.gram, vec![vec![1.0, -0.5], vec![-0.5, -1.0]]);

        let x = build_complex(&[0, 1], &[vec![0, 1]]).unwrap();
        let m = EdgeMetric::for_complex(&x, [((0, 1), -9.0)].into()).unwrap();
        let g = gram_matrix(&[0, 1], &m).unwrap();
        assert_eq!(g.gram, vec![vec![-9.0]]);
    }

    #[test]
    fn gram_matrix_reports_missing_energy() {
        let x = build_complex(&[0, 1, 2], &[vec![0, 1], vec![1, 2]]).unwrap();
        let m = EdgeMetric::for_complex(&x, [((0, 1), 1.0), ((1, 2), 2.0)].into()).unwrap();
        assert_eq!(
            gram_matrix(&[0, 1, 2], &m).unwrap_err(),
            FormsError::MissingEnergy(0, 2)
        );
    }

    #[test]
    fn reconstruction_is_exact_over_rationals() {
        // energies parameterized over local vertex pairs of a 3-simplex
        let energy = |i: usize, j: usize| Ratio::<i64>::new(3 * i as i64 - 7 * j as i64, 2);
        let gram = gram_from_energies(3, energy);
        for i in 0..4 {
            for j in (i + 1)..4 {
                assert_eq!(reconstruct_edge_energy(&gram, i, j), energy(i, j));
            }
        }
    }

    #[test]
    fn signature_examples() {
        let g = QuadraticForm {
            simplex: vec![0, 1, 2],
            gram: vec![vec![1.0, 0.5], vec![0.5, 1.0]],
        };
        // eigenvalues 3/2 and 1/2 from the characteristic polynomial
        let ev = g.eigenvalues();
        assert!((ev[0] - 0.5).abs() < 1e-12 && (ev[1] - 1.5).abs() < 1e-12);
        assert_eq!(signature(&g, g.default_tol()), (2, 0, 0));

        // det = -5/4 < 0 forces a mixed signature
        let g = QuadraticForm {
            simplex: vec![0, 1, 2],
            gram: vec![vec![1.0, -0.5], vec![-0.5, -1.0]],
        };
        assert_eq!(signature(&g, g.default_tol()), (1, 0, 1));

        let g = QuadraticForm {
            simplex: vec![0, 1],
            gram: vec![vec![0.0]],
        };
        assert_eq!(signature(&g, g.default_tol()), (0, 1, 0));
    }

    #[test]
    fn is_short_examples() {
        let one = |v: f64| QuadraticForm {
            simplex: vec![0, 1],
            gram: vec![vec![v]],
        };
        assert!(is_short(&one(1.0), &one(4.0), true, 1e-12).unwrap());
        assert!(is_short(&one(1.0), &one(1.0), false, 1e-12).unwrap());
        assert!(!is_short(&one(1.0), &one(1.0), true, 1e-12).unwrap());

        let g = QuadraticForm {
            simplex: vec![0, 1, 2],
            gram: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        };
        let gf = QuadraticForm {
            simplex: vec![0, 1, 2],
            gram: vec![vec![2.0, 0.0], vec![0.0, 0.0]],
        };
        // difference has eigenvalue -1
        assert!(!is_short(&gf, &g, false, 1e-12).unwrap());

        let other = QuadraticForm {
            simplex: vec![0, 2, 1],
            gram: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        };
        assert_eq!(is_short(&other, &g, false, 1e-12), Err(FormsError::ShapeMismatch));
    }

    #[test]
    fn sum_forms_examples() {
        let one = |v: f64| QuadraticForm {
            simplex: vec![0, 1],
            gram: vec![vec![v]],
        };
        assert_eq!(sum_forms(&one(1.0), &one(-9.0)).unwrap().gram, vec![vec![-8.0]]);

        let a = QuadraticForm {
            simplex: vec![0, 1, 2],
            gram: vec![vec![2.0, -1.0], vec![-1.0, 3.0]],
        };
        let z = QuadraticForm::zero(vec![0, 1, 2]);
        assert_eq!(sum_forms(&a, &z).unwrap(), a);
    }

    #[test]
    fn polarization_is_linear_in_the_metric() {
        let (_, m1) = triangle_metric(1.0, 2.0, 0.5);
        let (_, m2) = triangle_metric(-0.5, 3.0, 1.25);
        let (_, msum) = triangle_metric(0.5, 5.0, 1.75);
        let g1 = gram_matrix(&[0, 1, 2], &m1).unwrap();
        let g2 = gram_matrix(&[0, 1, 2], &m2).unwrap();
        let gs = gram_matrix(&[0, 1, 2], &msum).unwrap();
        assert_eq!(sum_forms(&g1, &g2).unwrap(), gs);
    }

    #[test]
    fn induced_energy_examples() {
        let x = build_complex(&[0, 1], &[vec![0, 1]]).unwrap();
        let f = PLMap::new(
            x.clone(),
            sig(2, 1),
            vec![vec![0.0, 0.0, 0.0], vec![2.0, 0.0, 1.0]],
        )
        .unwrap();
        assert_eq!(f.induced_edge_energies().energy(0, 1).unwrap(), 3.0);

        let c = PLMap::constant(x.clone(), sig(2, 1), vec![0.3, -1.0, 2.0]).unwrap();
        assert_eq!(c.induced_edge_energies().energy(0, 1).unwrap(), 0.0);

        let f = PLMap::new(x, sig(0, 2), vec![vec![0.0, 0.0], vec![0.0, 3.0]]).unwrap();
        assert_eq!(f.induced_edge_energies().energy(0, 1).unwrap(), -9.0);
    }

    #[test]
    fn split_map_examples() {
        let x = build_complex(&[0, 1], &[vec![0, 1]]).unwrap();
        let f = PLMap::new(
            x,
            sig(2, 1),
            vec![vec![0.0, 0.0, 0.0], vec![2.0, 0.0, 1.0]],
        )
        .unwrap();
        let parts = split_map(&f, &[1, 2]).unwrap();
        assert_eq!(parts[0].signature, sig(1, 0));
        assert_eq!(parts[1].signature, sig(1, 1));
        let e0 = parts[0].induced_edge_energies().energy(0, 1).unwrap();
        let e1 = parts[1].induced_edge_energies().energy(0, 1).unwrap();
        assert_eq!(e0, 4.0);
        assert_eq!(e1, -1.0);
        assert_eq!(e0 + e1, 3.0);

        // trivial split returns the original map
        let whole = split_map(&f, &[3]).unwrap();
        assert_eq!(whole[0], f);

        assert!(split_map(&f, &[2, 2]).is_err());
    }

    #[test]
    fn concat_inverts_split() {
        let x = build_complex(&[0, 1, 2], &[vec![0, 1], vec![1, 2]]).unwrap();
        let f = PLMap::new(
            x,
            sig(1, 2),
            vec![
                vec![0.1, -0.2, 0.3],
                vec![1.0, 0.5, -0.25],
                vec![-0.4, 0.9, 2.0],
            ],
        )
        .unwrap();
        let parts = split_map(&f, &[1, 1, 1]).unwrap();
        let refs: Vec<&PLMap> = parts.iter().collect();
        assert_eq!(PLMap::concat(&refs).unwrap(), f);
    }
}
