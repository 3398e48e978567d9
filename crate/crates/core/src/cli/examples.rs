//! Example packets shipped with the library.

use crate::cli::serial::parse;
use crate::cohomology::GeometricPacket;
use crate::error::Result;

pub const EXAMPLES: [(&str, &str); 4] = [
    (
        "elliptic_ordinary",
        include_str!("../../data/examples/elliptic_ordinary.json"),
    ),
    (
        "elliptic_supersingular",
        include_str!("../../data/examples/elliptic_supersingular.json"),
    ),
    (
        "k3_ordinary",
        include_str!("../../data/examples/k3_ordinary.json"),
    ),
    (
        "k3_supersingular",
        include_str!("../../data/examples/k3_supersingular.json"),
    ),
];

/// Accepts `NAME`, `NAME.json` or `examples/NAME.json`.
pub fn example_text(name: &str) -> Option<&'static str> {
    let base = name.rsplit('/').next().unwrap_or(name);
    let base = base.strip_suffix(".json").unwrap_or(base);
    EXAMPLES.iter().find(|(n, _)| *n == base).map(|(_, t)| *t)
}

pub fn example_packet(name: &str) -> Option<Result<GeometricPacket>> {
    example_text(name).map(parse)
}

pub fn all_examples() -> Vec<(&'static str, GeometricPacket)> {
    EXAMPLES
        .iter()
        .map(|(n, t)| (*n, parse(t).expect("bundled packets parse")))
        .collect()
}
