//! Knot invariant prediction from braid words.
//!
//! The crate covers two halves of one workflow:
//!
//! * certifying quasipositivity: braid-word algebra ([`braid`]), positive
//!   band certificates and the slice genus they determine ([`quasipos`]);
//! * predicting invariants: slot one-hot encoding ([`encoding`]),
//!   feed-forward networks trained with Adam ([`nn`]), dataset
//!   augmentation and knot-disjoint splits ([`dataset`]), the per-invariant
//!   training presets ([`target`]) and the persisted model format
//!   ([`model`]).

pub mod braid;
pub mod dataset;
pub mod encoding;
pub mod model;
pub mod nn;
pub mod quasipos;
pub mod rng;
pub mod target;
