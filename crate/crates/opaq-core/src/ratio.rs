//! Parsing and printing of exact probabilities.
//!
//! Probabilities travel through files and reports as strings `"p/q"` (or a
//! bare integer `"p"`).  Values are reduced on construction, so printing a
//! parsed value round-trips bit-exactly.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use crate::Error;

/// Parses `"p/q"` or `"p"` into an exact rational.
///
/// Whitespace is not tolerated and the denominator must be positive; this is
/// the single notation used by model files, reports, and CLI flags.
pub fn parse_ratio(s: &str) -> crate::Result<BigRational> {
    let bad = |why: &str| Error::Parse(format!("bad rational {s:?}: {why}"));
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (s, None),
    };
    let numer: BigInt = num
        .parse()
        .map_err(|_| bad("numerator is not an integer"))?;
    let denom: BigInt = match den {
        Some(d) => d
            .parse()
            .map_err(|_| bad("denominator is not an integer"))?,
        None => BigInt::one(),
    };
    if denom <= BigInt::from(0) {
        return Err(bad("denominator must be positive"));
    }
    Ok(BigRational::new(numer, denom))
}

/// Prints a rational as `"p/q"`, always with an explicit denominator.
pub fn format_ratio(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;

    #[test]
    fn parses_fraction_and_integer() {
        assert_eq!(parse_ratio("3/4").unwrap(), BigRational::new(3.into(), 4.into()));
        assert_eq!(parse_ratio("1").unwrap(), BigRational::one());
        assert_eq!(parse_ratio("0").unwrap(), BigRational::zero());
    }

    #[test]
    fn reduces_on_parse() {
        assert_eq!(format_ratio(&parse_ratio("6/8").unwrap()), "3/4");
    }

    #[test]
    fn rejects_junk() {
        for s in ["", "1/0", "1/-2", "a/b", "1.5", "1 / 2", "1//2"] {
            assert!(parse_ratio(s).is_err(), "accepted {s:?}");
        }
    }

    #[test]
    fn round_trips() {
        for s in ["0/1", "1/1", "3/4", "13/12", "1000000007/2"] {
            assert_eq!(format_ratio(&parse_ratio(s).unwrap()), s);
        }
    }
}
