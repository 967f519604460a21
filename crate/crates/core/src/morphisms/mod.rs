//! Morphisms of spectral triples: totally geodesic, Riemannian and metric
//! morphisms, inner fluctuations, and Morita-Connes morphisms with
//! connections.

mod fluctuation;
mod morita;
mod triple_map;

pub use fluctuation::{inner_fluctuation, Fluctuation, OneForm};
pub use morita::{associator_permutation, compose_morita_connes, transport_identification, MoritaConnes, Transported};
pub use triple_map::{validate_metric, validate_riemannian, validate_tgs, TripleMorphism};
