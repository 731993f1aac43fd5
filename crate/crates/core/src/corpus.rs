//! Example documents shipped with the library.

use crate::error::{Error, Result};
use crate::gga::Gga;

pub const FILES: &[(&str, &str)] = &[
    ("ex-c3-id.gga", include_str!("../corpus/ex-c3-id.gga")),
    ("ex-c3-twist.gga", include_str!("../corpus/ex-c3-twist.gga")),
    ("ex-small.gga", include_str!("../corpus/ex-small.gga")),
    ("a1-s3.gga", include_str!("../corpus/a1-s3.gga")),
    ("ex-parity.gga", include_str!("../corpus/ex-parity.gga")),
    ("bm-c3.bm", include_str!("../corpus/bm-c3.bm")),
    ("bm-s3.bm", include_str!("../corpus/bm-s3.bm")),
    ("gog-c2c2.gog", include_str!("../corpus/gog-c2c2.gog")),
    ("box-k21.box", include_str!("../corpus/box-k21.box")),
    ("lad-c3.lad", include_str!("../corpus/lad-c3.lad")),
];

pub fn text(name: &str) -> Result<&'static str> {
    FILES
        .iter()
        .find(|f| f.0 == name || f.0.split('.').next() == Some(name))
        .map(|f| f.1)
        .ok_or_else(|| Error::Precondition(format!("no corpus file `{name}`")))
}

/// Loads a corpus example by file name, with or without extension.
pub fn load(name: &str) -> Result<Gga> {
    crate::text::parse_any(text(name)?)
}
