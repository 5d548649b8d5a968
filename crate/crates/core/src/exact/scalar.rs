//! Scalar type unifying rational and cyclotomic values.

use super::cyclotomic::CycInt;
use super::{Rat, Ring};
use crate::Result;
use num_traits::Signed;

/// Fourier coefficient scalar: a rational number or a cyclotomic value.
/// Mixed arithmetic promotes the rational side.
#[derive(Debug, Clone)]
pub enum Scalar {
    Rat(Rat),
    Cyc(CycInt),
}

impl Scalar {
    pub fn from_rat(x: Rat) -> Self {
        Scalar::Rat(x)
    }

    pub fn from_int(x: i64) -> Self {
        Scalar::Rat(super::rat_int(x))
    }

    pub fn from_cyc(x: CycInt) -> Self {
        // Rational cyclotomics collapse, keeping representations canonical.
        match x.to_rat() {
            Some(r) => Scalar::Rat(r),
            None => Scalar::Cyc(x),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Rat(x) => x.is_zero(),
            Scalar::Cyc(x) => x.is_zero(),
        }
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, Scalar::Rat(_))
    }

    pub fn as_rat(&self) -> Option<&Rat> {
        match self {
            Scalar::Rat(x) => Some(x),
            Scalar::Cyc(_) => None,
        }
    }

    pub fn to_cyc(&self) -> CycInt {
        match self {
            Scalar::Rat(x) => CycInt::from_rat(x.clone()),
            Scalar::Cyc(x) => x.clone(),
        }
    }

    pub fn is_algebraic_integer(&self) -> bool {
        match self {
            Scalar::Rat(x) => x.is_integer(),
            Scalar::Cyc(x) => x.is_algebraic_integer(),
        }
    }

    pub fn conj(&self) -> Scalar {
        match self {
            Scalar::Rat(x) => Scalar::Rat(x.clone()),
            Scalar::Cyc(x) => Scalar::from_cyc(x.conj()),
        }
    }

    pub fn inverse(&self) -> Result<Scalar> {
        match self {
            Scalar::Rat(x) => {
                if x.is_zero() {
                    Err(crate::Error::SingularMatrix)
                } else {
                    Ok(Scalar::Rat(x.recip()))
                }
            }
            Scalar::Cyc(x) => Ok(Scalar::from_cyc(x.inverse()?)),
        }
    }

    pub fn scale(&self, s: &Rat) -> Scalar {
        match self {
            Scalar::Rat(x) => Scalar::Rat(x * s),
            Scalar::Cyc(x) => Scalar::from_cyc(x.scale(s)),
        }
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Scalar::Rat(a), Scalar::Rat(b)) => a == b,
            // from_cyc keeps rationals out of the Cyc arm, so mixed
            // comparisons only hold through explicit promotion.
            _ => self.to_cyc() == other.to_cyc(),
        }
    }
}

impl Ring for Scalar {
    fn zero() -> Self {
        Scalar::Rat(Rat::zero())
    }

    fn one() -> Self {
        Scalar::from_int(1)
    }

    fn is_zero(&self) -> bool {
        Scalar::is_zero(self)
    }

    fn add(&self, other: &Self) -> Self {
        match (self, other) {
            (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(a + b),
            _ => Scalar::from_cyc(self.to_cyc().add(&other.to_cyc())),
        }
    }

    fn sub(&self, other: &Self) -> Self {
        match (self, other) {
            (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(a - b),
            _ => Scalar::from_cyc(self.to_cyc().sub(&other.to_cyc())),
        }
    }

    fn mul(&self, other: &Self) -> Self {
        match (self, other) {
            (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(a * b),
            _ => Scalar::from_cyc(self.to_cyc().mul(&other.to_cyc())),
        }
    }

    fn neg(&self) -> Self {
        match self {
            Scalar::Rat(a) => Scalar::Rat(-a),
            Scalar::Cyc(a) => Scalar::Cyc(a.neg()),
        }
    }
}

impl std::fmt::Display for Scalar {
    /// `a` or `a/b` for rationals; `[c0,c1,...]` power-basis coordinates
    /// for cyclotomics, each coordinate itself in rational form.
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Scalar::Rat(x) => write_rat(f, x),
            Scalar::Cyc(x) => {
                write!(f, "[")?;
                for (i, c) in x.coords().iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write_rat(f, c)?;
                }
                write!(f, "]")
            }
        }
    }
}

fn write_rat(f: &mut std::fmt::Formatter<'_>, x: &Rat) -> std::fmt::Result {
    if x.is_integer() {
        write!(f, "{}", x.numer())
    } else {
        write!(f, "{}/{}", x.numer(), x.denom())
    }
}

impl Scalar {
    /// Inverse of `Display`; `conductor` interprets bracketed coordinates.
    pub fn parse(s: &str, conductor: u64) -> Option<Scalar> {
        let s = s.trim();
        if let Some(body) = s.strip_prefix('[').and_then(|t| t.strip_suffix(']')) {
            let coords: Option<Vec<Rat>> = body.split(',').map(parse_rat).collect();
            return Some(Scalar::from_cyc(CycInt::new(conductor, coords?)));
        }
        parse_rat(s).map(Scalar::Rat)
    }
}

fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let num: super::Int = n.trim().parse().ok()?;
            let den: super::Int = d.trim().parse().ok()?;
            if den.is_positive() {
                Some(Rat::new(num, den))
            } else {
                None
            }
        }
        None => {
            let num: super::Int = s.parse().ok()?;
            Some(Rat::from_integer(num))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;

    #[test]
    fn promotion_collapses_rational_cyclotomics() {
        let z = Scalar::from_cyc(CycInt::root_of_unity(4, 1));
        let sq = z.mul(&z);
        assert!(sq.is_rational());
        assert_eq!(sq, Scalar::from_int(-1));
    }

    #[test]
    fn mixed_arithmetic() {
        let a = Scalar::from_rat(rat(1, 2));
        let z = Scalar::from_cyc(CycInt::root_of_unity(3, 1));
        let s = a.add(&z).sub(&z);
        assert_eq!(s, Scalar::from_rat(rat(1, 2)));
    }

    #[test]
    fn display_parse_roundtrip() {
        for s in [
            Scalar::from_int(-7),
            Scalar::from_rat(rat(22, 7)),
            Scalar::from_cyc(CycInt::root_of_unity(8, 3).add(&CycInt::from_int(2))),
        ] {
            let text = s.to_string();
            let back = Scalar::parse(&text, 8).unwrap();
            assert_eq!(back, s, "{text}");
        }
        assert_eq!(Scalar::parse("3/4", 1).unwrap(), Scalar::from_rat(rat(3, 4)));
        assert!(Scalar::parse("3/-4", 1).is_none());
        assert!(Scalar::parse("x", 1).is_none());
    }
}
