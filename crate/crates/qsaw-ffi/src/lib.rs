//! C ABI for the sawtooth-map simulator. Placeholder, filled in below.
