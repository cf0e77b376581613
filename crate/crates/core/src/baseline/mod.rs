//! Fingerprint baseline: circular (ECFP-style) fingerprints of both
//! reactants, concatenated in role order and fed to a feed-forward network.

mod fingerprint;
mod mlp;

pub use fingerprint::{environment_ids, morgan_fingerprint, Fingerprint, DEFAULT_BITS, DEFAULT_RADIUS};
pub use mlp::{FingerprintPair, Mlp, MlpConfig};
