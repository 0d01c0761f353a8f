//! The polyhedron document format.
//!
//! A document is a JSON object describing a complex, optionally an edge
//! metric, a map, a schedule, and carriers onto a coarser document:
//!
//! ```json
//! {
//!   "format": "impoly/1",
//!   "vertices": [0, 1],
//!   "simplices": [[0, 1]],
//!   "metric": [{ "edge": [0, 1], "value": -3.0, "unit": "signed_length" }],
//!   "map": {
//!     "signature": { "p": 1, "q": 2 },
//!     "images": [{ "vertex": 0, "coords": [0.0, 0.0, 0.0] }]
//!   },
//!   "schedule": { "base_vertex": 0, "eps": [0.5], "seed": 7 },
//!   "carrier": [{ "vertex": 2, "simplex": [0, 1], "coords": [0.5, 0.5] }]
//! }
//! ```
//!
//! The `vertices` list is the 0-skeleton; `simplices` must be explicitly
//! downward closed above dimension zero (an edge needs no extra entries, a
//! triangle must list its edges). Metric values tagged `signed_length` are
//! converted to energies on load through the signed square. Saving always
//! emits the normalized form: dense sorted ids, sorted simplex lists
//! without singletons, energies only, images sorted by vertex; loading a
//! saved document reproduces it byte for byte.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::{
    build_complex, edge_key, Carrier, CarrierMap, ComplexError, Simplex, SimplicialComplex,
};
use crate::forms::{signed_square, EdgeMetric, FormsError, MinkowskiSignature, PLMap};

pub const FORMAT_TAG: &str = "impoly/1";

#[derive(Debug, Error)]
pub enum DocError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported format tag {0:?}, expected {FORMAT_TAG:?}")]
    UnsupportedFormat(String),
    #[error("simplex {simplex:?} is not downward closed: face {missing:?} is not listed")]
    NotClosed {
        simplex: Vec<usize>,
        missing: Vec<usize>,
    },
    #[error("metric entry for ({0}, {1}) does not match an edge")]
    MetricUnknownEdge(usize, usize),
    #[error("duplicate metric entry for ({0}, {1})")]
    DuplicateMetricEntry(usize, usize),
    #[error("edge ({0}, {1}) has no metric entry")]
    MetricIncomplete(usize, usize),
    #[error("image entry references unknown vertex {0}")]
    ImageUnknownVertex(usize),
    #[error("duplicate image for vertex {0}")]
    DuplicateImage(usize),
    #[error("vertex {0} has no image")]
    MissingImage(usize),
    #[error("schedule is invalid: {0}")]
    BadSchedule(String),
    #[error("carrier entry is invalid: {0}")]
    BadCarrier(String),
    #[error("document has no {0} block")]
    MissingBlock(&'static str),
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Forms(#[from] FormsError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricUnit {
    Energy,
    SignedLength,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricEntry {
    pub edge: [usize; 2],
    pub value: f64,
    pub unit: MetricUnit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignatureBlock {
    pub p: usize,
    pub q: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImageEntry {
    pub vertex: usize,
    pub coords: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapBlock {
    pub signature: SignatureBlock,
    pub images: Vec<ImageEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleBlock {
    pub base_vertex: usize,
    pub eps: Vec<f64>,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CarrierEntry {
    pub vertex: usize,
    pub simplex: Vec<usize>,
    pub coords: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyhedronDocument {
    pub format: String,
    pub vertices: Vec<usize>,
    pub simplices: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub metric: Vec<MetricEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<MapBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ScheduleBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub carrier: Option<Vec<CarrierEntry>>,
}

/// A document converted to runtime values, with the label translation kept
/// for reporting.
#[derive(Clone, Debug)]
pub struct LoadedDocument {
    pub doc: PolyhedronDocument,
    pub complex: SimplicialComplex,
    /// Dense id to original label.
    pub labels: Vec<usize>,
    pub metric: Option<EdgeMetric>,
    pub map: Option<PLMap>,
}

impl LoadedDocument {
    pub fn label(&self, dense: usize) -> usize {
        self.labels[dense]
    }

    /// Dense id of an original label; the label list is sorted by
    /// construction.
    pub fn dense_of(&self, label: usize) -> Option<usize> {
        self.labels.binary_search(&label).ok()
    }

    pub fn require_metric(&self) -> Result<&EdgeMetric, DocError> {
        self.metric.as_ref().ok_or(DocError::MissingBlock("metric"))
    }

    pub fn require_map(&self) -> Result<&PLMap, DocError> {
        self.map.as_ref().ok_or(DocError::MissingBlock("map"))
    }

    pub fn schedule(&self) -> Option<&ScheduleBlock> {
        self.doc.schedule.as_ref()
    }

    /// The carrier block translated onto this document (child) and a
    /// parent document, as a runtime carrier map.
    pub fn carrier_onto(&self, parent: &LoadedDocument) -> Result<CarrierMap, DocError> {
        let entries = self
            .doc
            .carrier
            .as_ref()
            .ok_or(DocError::MissingBlock("carrier"))?;
        let mut table: BTreeMap<usize, Carrier> = BTreeMap::new();
        for e in entries {
            let child = self
                .dense_of(e.vertex)
                .ok_or_else(|| DocError::BadCarrier(format!("unknown vertex {}", e.vertex)))?;
            if e.coords.len() != e.simplex.len() {
                return Err(DocError::BadCarrier(format!(
                    "vertex {}: {} coordinates for a {}-vertex simplex",
                    e.vertex,
                    e.coords.len(),
                    e.simplex.len()
                )));
            }
            let sum: f64 = e.coords.iter().sum();
            if e.coords.iter().any(|&c| c < -1e-12) || (sum - 1.0).abs() > 1e-9 {
                return Err(DocError::BadCarrier(format!(
                    "vertex {}: barycentric coordinates must be nonnegative and sum to 1",
                    e.vertex
                )));
            }
            let mapped: Vec<usize> = e
                .simplex
                .iter()
                .map(|&l| {
                    parent.dense_of(l).ok_or_else(|| {
                        DocError::BadCarrier(format!("unknown parent vertex {l}"))
                    })
                })
                .collect::<Result<_, _>>()?;
            // align coordinates with the sorted parent simplex
            let mut paired: Vec<(usize, f64)> =
                mapped.into_iter().zip(e.coords.iter().copied()).collect();
            paired.sort_by_key(|&(v, _)| v);
            let simplex = Simplex::new(paired.iter().map(|&(v, _)| v).collect())?;
            if !parent.complex.has_simplex(&simplex) {
                return Err(DocError::BadCarrier(format!(
                    "vertex {}: carrier simplex {:?} is not in the parent",
                    e.vertex, e.simplex
                )));
            }
            table.insert(
                child,
                Carrier {
                    simplex,
                    coords: paired.into_iter().map(|(_, c)| c).collect(),
                },
            );
        }
        let carriers = (0..self.complex.vertex_count())
            .map(|v| {
                table
                    .remove(&v)
                    .ok_or_else(|| DocError::BadCarrier(format!("vertex {} has no carrier", self.label(v))))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(CarrierMap::from_carriers(carriers))
    }
}

/// Reads and converts a document file.
pub fn load(path: impl AsRef<Path>) -> Result<LoadedDocument, DocError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| DocError::Read {
        path: path.display().to_string(),
        source,
    })?;
    load_str(&text)
}

/// Parses and converts a document from text.
pub fn load_str(text: &str) -> Result<LoadedDocument, DocError> {
    let doc: PolyhedronDocument = serde_json::from_str(text).map_err(|e| DocError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    convert(doc)
}

fn convert(doc: PolyhedronDocument) -> Result<LoadedDocument, DocError> {
    if doc.format != FORMAT_TAG {
        return Err(DocError::UnsupportedFormat(doc.format));
    }
    let id_map = crate::complex::normalize_ids(&doc.vertices)?;
    let labels: Vec<usize> = {
        let mut pairs: Vec<(usize, usize)> = id_map.iter().map(|(&l, &d)| (d, l)).collect();
        pairs.sort();
        pairs.into_iter().map(|(_, l)| l).collect()
    };

    // explicit downward closure above dimension zero
    let listed: BTreeSet<Vec<usize>> = doc
        .simplices
        .iter()
        .map(|s| {
            let mut v = s.clone();
            v.sort_unstable();
            v
        })
        .collect();
    for s in &listed {
        if s.len() < 3 {
            continue;
        }
        for skip in 0..s.len() {
            let face: Vec<usize> = s
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != skip)
                .map(|(_, &v)| v)
                .collect();
            if face.len() >= 2 && !listed.contains(&face) {
                return Err(DocError::NotClosed {
                    simplex: s.clone(),
                    missing: face,
                });
            }
        }
    }

    let complex = build_complex(&doc.vertices, &doc.simplices)?;

    let metric = if doc.metric.is_empty() {
        None
    } else {
        let mut energies: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for entry in &doc.metric {
            let du = *id_map
                .get(&entry.edge[0])
                .ok_or(DocError::MetricUnknownEdge(entry.edge[0], entry.edge[1]))?;
            let dw = *id_map
                .get(&entry.edge[1])
                .ok_or(DocError::MetricUnknownEdge(entry.edge[0], entry.edge[1]))?;
            let key = edge_key(du, dw);
            if !complex.has_edge(key.0, key.1) {
                return Err(DocError::MetricUnknownEdge(entry.edge[0], entry.edge[1]));
            }
            let energy = match entry.unit {
                MetricUnit::Energy => entry.value,
                MetricUnit::SignedLength => signed_square(entry.value),
            };
            if energies.insert(key, energy).is_some() {
                return Err(DocError::DuplicateMetricEntry(entry.edge[0], entry.edge[1]));
            }
        }
        for (u, w) in complex.edges() {
            if !energies.contains_key(&(u, w)) {
                return Err(DocError::MetricIncomplete(labels[u], labels[w]));
            }
        }
        Some(EdgeMetric::for_complex(&complex, energies)?)
    };

    let map = match &doc.map {
        None => None,
        Some(block) => {
            let sig = MinkowskiSignature::new(block.signature.p, block.signature.q)?;
            let mut images: Vec<Option<Vec<f64>>> = vec![None; complex.vertex_count()];
            for entry in &block.images {
                let dense = *id_map
                    .get(&entry.vertex)
                    .ok_or(DocError::ImageUnknownVertex(entry.vertex))?;
                if images[dense].is_some() {
                    return Err(DocError::DuplicateImage(entry.vertex));
                }
                images[dense] = Some(entry.coords.clone());
            }
            let images: Vec<Vec<f64>> = images
                .into_iter()
                .enumerate()
                .map(|(d, im)| im.ok_or(DocError::MissingImage(labels[d])))
                .collect::<Result<_, _>>()?;
            Some(PLMap::new(complex.clone(), sig, images)?)
        }
    };

    if let Some(s) = &doc.schedule {
        if !id_map.contains_key(&s.base_vertex) {
            return Err(DocError::BadSchedule(format!(
                "unknown base vertex {}",
                s.base_vertex
            )));
        }
        if s.eps.is_empty() || s.eps.iter().any(|&e| !(e > 0.0)) {
            return Err(DocError::BadSchedule(
                "eps must be a nonempty list of positive numbers".into(),
            ));
        }
    }

    Ok(LoadedDocument {
        doc,
        complex,
        labels,
        metric,
        map,
    })
}

/// Serializes a document in normalized, canonical form.
pub fn to_canonical_string(doc: &PolyhedronDocument) -> String {
    let normalized = normalize(doc);
    let mut out = serde_json::to_string_pretty(&normalized).expect("document serializes");
    out.push('\n');
    out
}

/// Writes a document to a file in canonical form.
pub fn save(doc: &PolyhedronDocument, path: impl AsRef<Path>) -> Result<(), DocError> {
    let path = path.as_ref();
    std::fs::write(path, to_canonical_string(doc)).map_err(|source| DocError::Write {
        path: path.display().to_string(),
        source,
    })
}

/// Normalized form: dense sorted ids, sorted simplex lists without
/// singletons, energies only, images and carriers sorted by vertex.
pub fn normalize(doc: &PolyhedronDocument) -> PolyhedronDocument {
    let mut order: Vec<usize> = doc.vertices.clone();
    order.sort_unstable();
    let remap: BTreeMap<usize, usize> = order.iter().enumerate().map(|(d, &l)| (l, d)).collect();
    let m = |v: usize| remap[&v];

    let mut simplices: BTreeSet<Vec<usize>> = BTreeSet::new();
    for s in &doc.simplices {
        if s.len() < 2 {
            continue;
        }
        let mut mapped: Vec<usize> = s.iter().map(|&v| m(v)).collect();
        mapped.sort_unstable();
        simplices.insert(mapped);
    }

    let mut metric: Vec<MetricEntry> = doc
        .metric
        .iter()
        .map(|e| {
            let (u, w) = edge_key(m(e.edge[0]), m(e.edge[1]));
            let value = match e.unit {
                MetricUnit::Energy => e.value,
                MetricUnit::SignedLength => signed_square(e.value),
            };
            MetricEntry {
                edge: [u, w],
                value,
                unit: MetricUnit::Energy,
            }
        })
        .collect();
    metric.sort_by(|a, b| a.edge.cmp(&b.edge));

    let map = doc.map.as_ref().map(|block| {
        let mut images: Vec<ImageEntry> = block
            .images
            .iter()
            .map(|e| ImageEntry {
                vertex: m(e.vertex),
                coords: e.coords.clone(),
            })
            .collect();
        images.sort_by_key(|e| e.vertex);
        MapBlock {
            signature: block.signature,
            images,
        }
    });

    let schedule = doc.schedule.as_ref().map(|s| ScheduleBlock {
        base_vertex: m(s.base_vertex),
        eps: s.eps.clone(),
        seed: s.seed,
    });

    let carrier = doc.carrier.as_ref().map(|entries| {
        let mut out: Vec<CarrierEntry> = entries
            .iter()
            .map(|e| CarrierEntry {
                vertex: m(e.vertex),
                simplex: e.simplex.clone(),
                coords: e.coords.clone(),
            })
            .collect();
        out.sort_by_key(|e| e.vertex);
        out
    });

    PolyhedronDocument {
        format: FORMAT_TAG.to_string(),
        vertices: (0..order.len()).collect(),
        simplices: simplices.into_iter().collect(),
        metric,
        map,
        schedule,
        carrier,
    }
}

/// Builds a document for a complex with dense ids, the given metric and
/// map, and optional carrier entries onto a parent document.
pub fn document_from_parts(
    complex: &SimplicialComplex,
    metric: Option<&EdgeMetric>,
    map: Option<&PLMap>,
    schedule: Option<ScheduleBlock>,
    carrier: Option<(&CarrierMap, &[usize])>,
) -> PolyhedronDocument {
    let simplices: Vec<Vec<usize>> = complex
        .simplices()
        .filter(|s| s.dim() >= 1)
        .map(|s| s.vertices().to_vec())
        .collect();
    let metric_entries = metric
        .map(|m| {
            m.iter()
                .map(|((u, w), value)| MetricEntry {
                    edge: [u, w],
                    value,
                    unit: MetricUnit::Energy,
                })
                .collect()
        })
        .unwrap_or_default();
    let map_block = map.map(|f| MapBlock {
        signature: SignatureBlock {
            p: f.signature.p,
            q: f.signature.q,
        },
        images: f
            .images()
            .iter()
            .enumerate()
            .map(|(v, coords)| ImageEntry {
                vertex: v,
                coords: coords.clone(),
            })
            .collect(),
    });
    let carrier_block = carrier.map(|(cm, parent_labels)| {
        cm.carriers()
            .iter()
            .enumerate()
            .map(|(v, c)| CarrierEntry {
                vertex: v,
                simplex: c
                    .simplex
                    .vertices()
                    .iter()
                    .map(|&pv| parent_labels[pv])
                    .collect(),
                coords: c.coords.clone(),
            })
            .collect()
    });
    PolyhedronDocument {
        format: FORMAT_TAG.to_string(),
        vertices: (0..complex.vertex_count()).collect(),
        simplices,
        metric: metric_entries,
        map: map_block,
        schedule,
        carrier: carrier_block,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ONE_EDGE: &str = r#"{
        "format": "impoly/1",
        "vertices": [0, 1],
        "simplices": [[0, 1]],
        "metric": [{ "edge": [0, 1], "value": -9.0, "unit": "energy" }]
    }"#;

    #[test]
    fn minimal_document_loads() {
        let loaded = load_str(ONE_EDGE).unwrap();
        assert_eq!(loaded.complex.edges(), vec![(0, 1)]);
        assert_eq!(loaded.metric.unwrap().energy(0, 1).unwrap(), -9.0);
    }

    #[test]
    fn signed_length_converts_on_load() {
        let text = r#"{
            "format": "impoly/1",
            "vertices": [0, 1],
            "simplices": [[0, 1]],
            "metric": [{ "edge": [0, 1], "value": -3.0, "unit": "signed_length" }]
        }"#;
        let loaded = load_str(text).unwrap();
        assert_eq!(loaded.metric.unwrap().energy(0, 1).unwrap(), -9.0);
    }

    #[test]
    fn round_trip_is_byte_identical_on_normalized_documents() {
        let loaded = load_str(ONE_EDGE).unwrap();
        let canon = to_canonical_string(&loaded.doc);
        let reloaded = load_str(&canon).unwrap();
        assert_eq!(to_canonical_string(&reloaded.doc), canon);
    }

    #[test]
    fn non_closed_documents_are_rejected() {
        let text = r#"{
            "format": "impoly/1",
            "vertices": [0, 1, 2],
            "simplices": [[0, 1, 2]]
        }"#;
        assert!(matches!(
            load_str(text).unwrap_err(),
            DocError::NotClosed { .. }
        ));

        let closed = r#"{
            "format": "impoly/1",
            "vertices": [0, 1, 2],
            "simplices": [[0, 1, 2], [0, 1], [0, 2], [1, 2]]
        }"#;
        assert!(load_str(closed).is_ok());
    }

    #[test]
    fn parse_errors_carry_position() {
        let err = load_str("{ \"format\": ").unwrap_err();
        match err {
            DocError::Parse { line, column, .. } => {
                assert_eq!(line, 1);
                assert!(column > 0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn metric_validation() {
        let text = r#"{
            "format": "impoly/1",
            "vertices": [0, 1, 2],
            "simplices": [[0, 1], [1, 2]],
            "metric": [{ "edge": [0, 1], "value": 1.0, "unit": "energy" }]
        }"#;
        assert!(matches!(
            load_str(text).unwrap_err(),
            DocError::MetricIncomplete(1, 2)
        ));

        let dup = r#"{
            "format": "impoly/1",
            "vertices": [0, 1],
            "simplices": [[0, 1]],
            "metric": [
                { "edge": [0, 1], "value": 1.0, "unit": "energy" },
                { "edge": [1, 0], "value": 2.0, "unit": "energy" }
            ]
        }"#;
        assert!(matches!(
            load_str(dup).unwrap_err(),
            DocError::DuplicateMetricEntry(1, 0)
        ));
    }

    #[test]
    fn labels_survive_normalization() {
        let text = r#"{
            "format": "impoly/1",
            "vertices": [10, 5],
            "simplices": [[10, 5]],
            "metric": [{ "edge": [10, 5], "value": 4.0, "unit": "energy" }]
        }"#;
        let loaded = load_str(text).unwrap();
        assert_eq!(loaded.labels, vec![5, 10]);
        assert_eq!(loaded.dense_of(10), Some(1));
        let norm = normalize(&loaded.doc);
        assert_eq!(norm.vertices, vec![0, 1]);
        assert_eq!(norm.metric[0].edge, [0, 1]);
    }

    #[test]
    fn map_block_round_trip() {
        let text = r#"{
            "format": "impoly/1",
            "vertices": [0, 1],
            "simplices": [[0, 1]],
            "metric": [{ "edge": [0, 1], "value": 1.0, "unit": "energy" }],
            "map": {
                "signature": { "p": 1, "q": 1 },
                "images": [
                    { "vertex": 0, "coords": [0.0, 0.25] },
                    { "vertex": 1, "coords": [1.0, -0.5] }
                ]
            },
            "schedule": { "base_vertex": 0, "eps": [0.5, 0.25], "seed": 7 }
        }"#;
        let loaded = load_str(text).unwrap();
        let f = loaded.map.as_ref().unwrap();
        assert_eq!(f.image(1), &[1.0, -0.5]);
        assert_eq!(loaded.schedule().unwrap().seed, 7);
        let canon = to_canonical_string(&loaded.doc);
        let again = load_str(&canon).unwrap();
        assert_eq!(to_canonical_string(&again.doc), canon);
    }
}
