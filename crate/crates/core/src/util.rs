//! Serde helpers for big numbers, rendered as decimal strings.

use std::fmt::Display;

use num_rational::BigRational;
use serde::Serializer;

use crate::exact::rational_string;

pub(crate) fn ser_display<T: Display, S: Serializer>(x: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(x)
}

pub(crate) fn ser_rational<S: Serializer>(x: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&rational_string(x))
}

pub(crate) fn ser_opt_rational<S: Serializer>(x: &Option<BigRational>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(r) => s.serialize_str(&rational_string(r)),
        None => s.serialize_none(),
    }
}
