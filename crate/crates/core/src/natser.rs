//! Serializes naturals as decimal strings so reports stay readable at any size.

use serde::ser::Serializer;

use crate::Nat;

pub fn serialize<S: Serializer>(n: &Nat, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&n.to_str_radix(10))
}

pub mod opt {
    use super::*;

    pub fn serialize<S: Serializer>(n: &Option<Nat>, s: S) -> Result<S::Ok, S::Error> {
        match n {
            Some(n) => s.serialize_some(&n.to_str_radix(10)),
            None => s.serialize_none(),
        }
    }
}
