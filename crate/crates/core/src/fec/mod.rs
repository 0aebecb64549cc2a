//! Reed-Solomon coding over GF(2^w) carried on layered-constellation symbols.

mod gf;
mod mapping;
mod rs;

pub use gf::{default_primitive_polynomial, GaloisField};
pub use mapping::SymbolMapping;
pub use rs::{DecodeOutcome, DecodeStatus, RsCode};
