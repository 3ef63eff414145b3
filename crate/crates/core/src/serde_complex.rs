//! Complex numbers serialize as `{"re": .., "im": ..}`.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::linalg::C64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexPair {
    pub re: f64,
    pub im: f64,
}

impl From<C64> for ComplexPair {
    fn from(z: C64) -> Self {
        ComplexPair { re: z.re, im: z.im }
    }
}

impl From<ComplexPair> for C64 {
    fn from(p: ComplexPair) -> Self {
        C64::new(p.re, p.im)
    }
}

pub fn serialize<S: Serializer>(z: &C64, s: S) -> Result<S::Ok, S::Error> {
    ComplexPair::from(*z).serialize(s)
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<C64, D::Error> {
    Ok(ComplexPair::deserialize(d)?.into())
}

pub mod option {
    use super::*;

    pub fn serialize<S: Serializer>(z: &Option<C64>, s: S) -> Result<S::Ok, S::Error> {
        z.map(ComplexPair::from).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<C64>, D::Error> {
        Ok(Option::<ComplexPair>::deserialize(d)?.map(Into::into))
    }
}

pub mod vec {
    use super::*;

    pub fn serialize<S: Serializer>(z: &[C64], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(z.iter().map(|v| ComplexPair::from(*v)))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<C64>, D::Error> {
        Ok(Vec::<ComplexPair>::deserialize(d)?.into_iter().map(Into::into).collect())
    }
}
