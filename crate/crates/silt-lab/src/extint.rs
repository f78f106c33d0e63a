//! Integers extended by `−∞` and `+∞`, with saturating arithmetic.
//!
//! Used for filtration values, `inf`/`sup` of complexes, depth and width.

use std::fmt;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtInt {
    NegInf,
    Fin(i64),
    PosInf,
}

impl ExtInt {
    pub fn finite(self) -> Option<i64> {
        match self {
            ExtInt::Fin(n) => Some(n),
            _ => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtInt::Fin(_))
    }

    /// Saturating addition of a plain integer; the sentinels absorb.
    pub fn plus(self, n: i64) -> ExtInt {
        match self {
            ExtInt::Fin(v) => ExtInt::Fin(v + n),
            s => s,
        }
    }

    pub fn min(self, other: ExtInt) -> ExtInt {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: ExtInt) -> ExtInt {
        if self >= other {
            self
        } else {
            other
        }
    }
}

impl From<i64> for ExtInt {
    fn from(n: i64) -> Self {
        ExtInt::Fin(n)
    }
}

impl fmt::Display for ExtInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtInt::NegInf => write!(f, "-inf"),
            ExtInt::Fin(n) => write!(f, "{n}"),
            ExtInt::PosInf => write!(f, "+inf"),
        }
    }
}

impl fmt::Debug for ExtInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Parses `-inf`, `+inf`, `inf`, or a decimal integer.
impl std::str::FromStr for ExtInt {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "-inf" => Ok(ExtInt::NegInf),
            "inf" | "+inf" => Ok(ExtInt::PosInf),
            t => t
                .parse::<i64>()
                .map(ExtInt::Fin)
                .map_err(|_| format!("expected integer or ±inf, got `{s}`")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering() {
        assert!(ExtInt::NegInf < ExtInt::Fin(-1000));
        assert!(ExtInt::Fin(3) < ExtInt::Fin(4));
        assert!(ExtInt::Fin(1000) < ExtInt::PosInf);
        assert!(ExtInt::NegInf < ExtInt::PosInf);
    }

    #[test]
    fn saturation() {
        assert_eq!(ExtInt::NegInf.plus(5), ExtInt::NegInf);
        assert_eq!(ExtInt::PosInf.plus(-5), ExtInt::PosInf);
        assert_eq!(ExtInt::Fin(2).plus(-5), ExtInt::Fin(-3));
    }

    #[test]
    fn parse_round_trip() {
        for s in ["-inf", "+inf", "0", "-7", "42"] {
            let v: ExtInt = s.parse().unwrap();
            let back: ExtInt = v.to_string().parse().unwrap();
            assert_eq!(v, back);
        }
    }
}
