//! Registry of the built-in flux `f` and diffusion `H` families.
//!
//! Every family is Lipschitz and vanishes at zero. Families are addressed by
//! name plus one real parameter, either as `("linear", 0.5)` or in the
//! compact form `"linear(0.5)"`.

use std::fmt;
use std::str::FromStr;

use crate::{Error, Result, Scalar};

/// Convective flux `f: ℝ → ℝ` with `f(0) = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FluxFamily<T> {
    Zero,
    /// `f(v) = a·v`
    Linear(T),
    /// `f(v) = a·sin(v)`
    Sine(T),
}

/// Noise coefficient `H: ℝ → ℝ` with `H(0) = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DiffusionFamily<T> {
    Zero,
    /// `H(v) = a·v`
    Linear(T),
    /// `H(v) = a·sin(v)`, bounded by `|a|`
    BoundedSine(T),
}

impl<T: Scalar> FluxFamily<T> {
    pub fn from_name(name: &str, param: T) -> Result<Self> {
        match name {
            "zero" => Ok(FluxFamily::Zero),
            "linear" => Ok(FluxFamily::Linear(param)),
            "sine" => Ok(FluxFamily::Sine(param)),
            _ => Err(Error::UnknownFamily {
                kind: "flux",
                name: name.to_string(),
            }),
        }
    }

    #[inline]
    pub fn eval(&self, v: T) -> T {
        match *self {
            FluxFamily::Zero => T::zero(),
            FluxFamily::Linear(a) => a * v,
            FluxFamily::Sine(a) => a * v.sin(),
        }
    }

    #[inline]
    pub fn derivative(&self, v: T) -> T {
        match *self {
            FluxFamily::Zero => T::zero(),
            FluxFamily::Linear(a) => a,
            FluxFamily::Sine(a) => a * v.cos(),
        }
    }

    pub fn lipschitz(&self) -> T {
        match *self {
            FluxFamily::Zero => T::zero(),
            FluxFamily::Linear(a) | FluxFamily::Sine(a) => a.abs(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.lipschitz() == T::zero()
    }

    /// True when `f` is affine, in which case the edge-averaged flux term
    /// contributes nothing to the discrete energy balance.
    pub fn is_linear(&self) -> bool {
        matches!(self, FluxFamily::Zero | FluxFamily::Linear(_))
    }

    pub fn name(&self) -> &'static str {
        match self {
            FluxFamily::Zero => "zero",
            FluxFamily::Linear(_) => "linear",
            FluxFamily::Sine(_) => "sine",
        }
    }

    pub fn param(&self) -> T {
        match *self {
            FluxFamily::Zero => T::zero(),
            FluxFamily::Linear(a) | FluxFamily::Sine(a) => a,
        }
    }
}

impl<T: Scalar> DiffusionFamily<T> {
    pub fn from_name(name: &str, param: T) -> Result<Self> {
        match name {
            "zero" => Ok(DiffusionFamily::Zero),
            "linear" => Ok(DiffusionFamily::Linear(param)),
            "bounded_sine" => Ok(DiffusionFamily::BoundedSine(param)),
            _ => Err(Error::UnknownFamily {
                kind: "diffusion",
                name: name.to_string(),
            }),
        }
    }

    #[inline]
    pub fn eval(&self, v: T) -> T {
        match *self {
            DiffusionFamily::Zero => T::zero(),
            DiffusionFamily::Linear(a) => a * v,
            DiffusionFamily::BoundedSine(a) => a * v.sin(),
        }
    }

    pub fn lipschitz(&self) -> T {
        match *self {
            DiffusionFamily::Zero => T::zero(),
            DiffusionFamily::Linear(a) | DiffusionFamily::BoundedSine(a) => a.abs(),
        }
    }

    /// `sup |H|`, if finite.
    pub fn bound(&self) -> Option<T> {
        match *self {
            DiffusionFamily::Zero => Some(T::zero()),
            DiffusionFamily::Linear(a) if a == T::zero() => Some(T::zero()),
            DiffusionFamily::Linear(_) => None,
            DiffusionFamily::BoundedSine(a) => Some(a.abs()),
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.bound().is_some()
    }

    pub fn is_zero(&self) -> bool {
        self.lipschitz() == T::zero()
    }

    pub fn name(&self) -> &'static str {
        match self {
            DiffusionFamily::Zero => "zero",
            DiffusionFamily::Linear(_) => "linear",
            DiffusionFamily::BoundedSine(_) => "bounded_sine",
        }
    }

    pub fn param(&self) -> T {
        match *self {
            DiffusionFamily::Zero => T::zero(),
            DiffusionFamily::Linear(a) | DiffusionFamily::BoundedSine(a) => a,
        }
    }
}

/// Splits `"name(param)"` or a bare `"name"`.
fn split_spec(s: &str) -> Result<(&str, Option<f64>)> {
    let s = s.trim();
    match s.find('(') {
        None => Ok((s, None)),
        Some(open) => {
            let inner = s[open + 1..]
                .strip_suffix(')')
                .ok_or_else(|| Error::Parse(format!("unbalanced parentheses in `{s}`")))?;
            let v = inner
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("bad family parameter in `{s}`: {e}")))?;
            Ok((s[..open].trim(), Some(v)))
        }
    }
}

impl<T: Scalar> FromStr for FluxFamily<T> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, param) = split_spec(s)?;
        Self::from_name(name, T::lit(param.unwrap_or(0.0)))
    }
}

impl<T: Scalar> FromStr for DiffusionFamily<T> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, param) = split_spec(s)?;
        Self::from_name(name, T::lit(param.unwrap_or(0.0)))
    }
}

impl<T: Scalar> fmt::Display for FluxFamily<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FluxFamily::Zero => write!(f, "zero"),
            _ => write!(f, "{}({})", self.name(), self.param()),
        }
    }
}

impl<T: Scalar> fmt::Display for DiffusionFamily<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiffusionFamily::Zero => write!(f, "zero"),
            _ => write!(f, "{}({})", self.name(), self.param()),
        }
    }
}
