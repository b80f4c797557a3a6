//! Exact construction and certification of k-levels of planes in convex
//! position, with an order-k Voronoi front end.
//!
//! All coordinates are arbitrary-precision rationals; nothing in the library
//! rounds. The verifier never trusts the structure under test: it recomputes
//! every fact it needs from the input planes alone.

pub mod cells;
pub mod cutting;
pub mod formats;
pub mod geom;
pub mod klevel2d;
pub mod mutate;
pub mod oracle;
pub mod polyline;
pub mod rat;
pub mod subdivision;
pub mod verify;
