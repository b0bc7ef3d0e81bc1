//! Command-line mini-syntax for symbols:
//! `identity`, `affine:a,b_re[,b_im]`, `moebius:a,b,c,d` (real, or eight
//! numbers as re/im pairs), `power:p`, `cayley:a,b,c,d` (disc map, same
//! layout as moebius) and `compose:(outer;inner)`.

use super::{DiscMap, Symbol};
use crate::error::BergError;
use num_complex::Complex64;
use std::fmt;
use std::str::FromStr;

impl FromStr for Symbol {
    type Err = BergError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "identity" {
            return Ok(Symbol::identity());
        }
        let (kind, args) = s
            .split_once(':')
            .ok_or_else(|| BergError::Parse(format!("expected kind:args in '{s}'")))?;
        match kind.trim() {
            "affine" => {
                let v = numbers(args)?;
                match v.as_slice() {
                    [a, b] => Ok(Symbol::Affine { a: *a, b: (*b).into() }),
                    [a, br, bi] => Ok(Symbol::Affine {
                        a: *a,
                        b: Complex64::new(*br, *bi),
                    }),
                    _ => Err(BergError::Parse(format!("affine takes 2 or 3 numbers: '{args}'"))),
                }
            }
            "power" => match numbers(args)?.as_slice() {
                [p] => Ok(Symbol::Power { p: *p }),
                _ => Err(BergError::Parse(format!("power takes one number: '{args}'"))),
            },
            "moebius" => {
                let [a, b, c, d] = four_complex(args)?;
                Ok(Symbol::Moebius { a, b, c, d })
            }
            "cayley" => {
                let [a, b, c, d] = four_complex(args)?;
                Ok(Symbol::Cayley {
                    disc: DiscMap { a, b, c, d },
                })
            }
            "compose" => {
                let inner = args
                    .trim()
                    .strip_prefix('(')
                    .and_then(|r| r.strip_suffix(')'))
                    .ok_or_else(|| BergError::Parse(format!("compose expects (outer;inner): '{args}'")))?;
                let split = top_level_semicolon(inner)
                    .ok_or_else(|| BergError::Parse(format!("compose expects two symbols: '{args}'")))?;
                let left: Symbol = inner[..split].parse()?;
                let right: Symbol = inner[split + 1..].parse()?;
                Ok(Symbol::compose(left, right))
            }
            other => Err(BergError::Parse(format!("unknown symbol kind '{other}'"))),
        }
    }
}

fn numbers(args: &str) -> Result<Vec<f64>, BergError> {
    args.split(',')
        .map(|t| {
            let t = t.trim();
            parse_number(t).ok_or_else(|| BergError::Parse(format!("bad number '{t}'")))
        })
        .collect()
}

/// Plain floats plus simple fractions like `1/2`.
fn parse_number(t: &str) -> Option<f64> {
    if let Some((n, d)) = t.split_once('/') {
        return Some(n.trim().parse::<f64>().ok()? / d.trim().parse::<f64>().ok()?);
    }
    t.parse().ok()
}

fn four_complex(args: &str) -> Result<[Complex64; 4], BergError> {
    let v = numbers(args)?;
    match v.len() {
        4 => Ok([v[0].into(), v[1].into(), v[2].into(), v[3].into()]),
        8 => Ok([
            Complex64::new(v[0], v[1]),
            Complex64::new(v[2], v[3]),
            Complex64::new(v[4], v[5]),
            Complex64::new(v[6], v[7]),
        ]),
        n => Err(BergError::Parse(format!("expected 4 or 8 numbers, got {n}"))),
    }
}

fn top_level_semicolon(s: &str) -> Option<usize> {
    let mut depth = 0i32;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ';' if depth == 0 => return Some(i),
            _ => {}
        }
    }
    None
}

fn write_four(f: &mut fmt::Formatter<'_>, v: [Complex64; 4]) -> fmt::Result {
    if v.iter().all(|c| c.im == 0.0) {
        write!(f, "{},{},{},{}", v[0].re, v[1].re, v[2].re, v[3].re)
    } else {
        write!(
            f,
            "{},{},{},{},{},{},{},{}",
            v[0].re, v[0].im, v[1].re, v[1].im, v[2].re, v[2].im, v[3].re, v[3].im
        )
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Affine { a, b } if b.im == 0.0 => write!(f, "affine:{a},{}", b.re),
            Symbol::Affine { a, b } => write!(f, "affine:{a},{},{}", b.re, b.im),
            Symbol::Power { p } => write!(f, "power:{p}"),
            Symbol::Moebius { a, b, c, d } => {
                write!(f, "moebius:")?;
                write_four(f, [*a, *b, *c, *d])
            }
            Symbol::Cayley { disc } => {
                write!(f, "cayley:")?;
                write_four(f, [disc.a, disc.b, disc.c, disc.d])
            }
            Symbol::Compose { left, right } => write!(f, "compose:({left};{right})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_examples() {
        assert_eq!("affine:2,1".parse::<Symbol>().unwrap(), Symbol::affine(2.0, 1.0));
        assert_eq!("identity".parse::<Symbol>().unwrap(), Symbol::identity());
        assert_eq!("power:0.5".parse::<Symbol>().unwrap(), Symbol::power(0.5));
        assert_eq!("affine:1/2,2".parse::<Symbol>().unwrap(), Symbol::affine(0.5, 2.0));
        let c: Symbol = "compose:(affine:2,1;compose:(power:0.5;affine:3,0))".parse().unwrap();
        assert_eq!(
            c,
            Symbol::compose(
                Symbol::affine(2.0, 1.0),
                Symbol::compose(Symbol::power(0.5), Symbol::affine(3.0, 0.0))
            )
        );
        assert!("affine:1".parse::<Symbol>().is_err());
        assert!("spiral:1".parse::<Symbol>().is_err());
        assert!("compose:(affine:1,0)".parse::<Symbol>().is_err());
    }

    fn leaf() -> impl Strategy<Value = Symbol> {
        let num = -50.0f64..50.0;
        prop_oneof![
            (num.clone(), num.clone(), num.clone()).prop_map(|(a, r, i)| Symbol::Affine {
                a,
                b: Complex64::new(r, i)
            }),
            (0.01f64..1.0).prop_map(|p| Symbol::Power { p }),
            proptest::collection::vec(num.clone(), 8).prop_map(|v| Symbol::Moebius {
                a: Complex64::new(v[0], v[1]),
                b: Complex64::new(v[2], v[3]),
                c: Complex64::new(v[4], v[5]),
                d: Complex64::new(v[6], v[7]),
            }),
            proptest::collection::vec(num, 4).prop_map(|v| Symbol::Cayley {
                disc: DiscMap::real(v[0], v[1], v[2], v[3])
            }),
        ]
    }

    proptest! {
        #[test]
        fn display_parse_round_trip(
            s in leaf().prop_recursive(3, 8, 2, |inner| (inner.clone(), inner).prop_map(|(l, r)| Symbol::compose(l, r)))
        ) {
            let text = s.to_string();
            let back: Symbol = text.parse().unwrap();
            prop_assert_eq!(back, s);
        }
    }
}
