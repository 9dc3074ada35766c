//! `#[serde(with = …)]` adapters that write vectors as plain number arrays
//! instead of nalgebra's `[data, nrows, ncols]` triple.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::Vector;

pub fn serialize<S: Serializer>(v: &Vector, s: S) -> Result<S::Ok, S::Error> {
    v.as_slice().serialize(s)
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vector, D::Error> {
    Ok(Vector::from_vec(Vec::deserialize(d)?))
}

pub mod list {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Vector], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|x| x.as_slice()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vector>, D::Error> {
        Ok(Vec::<Vec<f64>>::deserialize(d)?.into_iter().map(Vector::from_vec).collect())
    }
}

pub mod opt_list {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Option<Vec<Vector>>, s: S) -> Result<S::Ok, S::Error> {
        v.as_ref().map(|l| l.iter().map(|x| x.as_slice()).collect::<Vec<_>>()).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<Vector>>, D::Error> {
        Ok(Option::<Vec<Vec<f64>>>::deserialize(d)?.map(|l| l.into_iter().map(Vector::from_vec).collect()))
    }
}
