//! Indefinite metric polyhedra and piecewise-linear isometric approximation.
//!
//! A finite simplicial complex together with a real *energy* per edge (the
//! signed squared length) determines a quadratic form on every simplex via
//! the polarization identity. This crate models those objects, classifies
//! the forms, and constructively approximates continuous (piecewise-linear)
//! maps of metric graphs into Minkowski space `R^{p,q}` by piecewise-linear
//! isometric maps and embeddings. Every produced map can be checked by
//! independent oracles in [`verify`].
//!
//! Module map:
//!
//! * [`complex`] - finite abstract simplicial complexes, stars, shells, and
//!   edge subdivision with carrier maps back to the original complex.
//! * [`forms`] - edge metrics, Gram matrices by polarization, signatures,
//!   Minkowski energies, shortness tests, and coordinate splitting.
//! * [`engine1d`] - corrugation engines for metric graphs: given a short map
//!   and positive (or negative) target energies, produce a subdivided map
//!   whose every sub-edge carries exactly the prescribed energy.
//! * [`pipeline`] - the full approximation pipeline: coordinate split,
//!   general-position perturbation, dominated form construction, sequential
//!   engine application, and assembly.
//! * [`verify`] - independent checks: per-edge energy verification,
//!   embedding verification by exhaustive segment pairs, and shellwise
//!   closeness measurement.
//! * [`doc`] / [`svg`] - the text document format and plot emission.
//!
//! The embarrassingly parallel inner loops (per-edge construction, segment
//! pair scans) run on rayon when the `parallel` feature is enabled (the
//! default) and fall back to sequential execution otherwise; see [`par`].
//! Results are identical either way.

pub mod complex;
pub mod doc;
pub mod engine1d;
pub mod forms;
pub mod geometry;
pub mod par;
pub mod pipeline;
pub mod svg;
pub mod verify;

pub use complex::{build_complex, CarrierMap, ShellDecomposition, Simplex, SimplicialComplex};
pub use forms::{EdgeMetric, MinkowskiSignature, PLMap, QuadraticForm};
pub use pipeline::{isometric_embed, pl_isometry, Mode, PipelineRequest};
