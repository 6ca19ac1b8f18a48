//! Words in the generators of a surface group and the curve classes they name.
//!
//! Generators are written `a, b, c, …` and their inverses `A, B, C, …`.
//! Letters are ordered `a < A < b < B < …`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter(u16);

impl Letter {
    pub fn new(generator: usize, inverse: bool) -> Letter {
        Letter((generator as u16) * 2 + inverse as u16)
    }
    pub fn generator(self) -> usize {
        (self.0 / 2) as usize
    }
    pub fn is_inverse(self) -> bool {
        self.0 % 2 == 1
    }
    pub fn inv(self) -> Letter {
        Letter(self.0 ^ 1)
    }
    pub fn code(self) -> usize {
        self.0 as usize
    }
    pub fn from_code(code: usize) -> Letter {
        Letter(code as u16)
    }
    fn to_char(self) -> char {
        let base = if self.is_inverse() { b'A' } else { b'a' };
        (base + self.generator() as u8) as char
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn letter(l: Letter) -> Word {
        Word(vec![l])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inv()).collect())
    }

    /// Concatenate and freely reduce.
    pub fn concat(&self, other: &Word) -> Word {
        let mut out = self.0.clone();
        for &l in &other.0 {
            if out.last() == Some(&l.inv()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word(out)
    }

    pub fn reduced(&self) -> Word {
        Word::default().concat(self)
    }

    /// Free and cyclic reduction.
    pub fn cyclically_reduced(&self) -> Word {
        let mut w = self.reduced().0;
        while w.len() >= 2 && w[0] == w[w.len() - 1].inv() {
            w.pop();
            w.remove(0);
        }
        Word(w)
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        let w = &self.0;
        w.windows(2).all(|p| p[0] != p[1].inv()) && (w.len() < 2 || w[0] != w[w.len() - 1].inv())
    }

    /// Least cyclic rotation among the word and its inverse, after cyclic reduction.
    pub fn canonical(&self) -> Word {
        let w = self.cyclically_reduced();
        let a = least_rotation(&w.0);
        let b = least_rotation(&w.inverse().0);
        Word(a.min(b))
    }

    pub fn is_canonical(&self) -> bool {
        self.is_cyclically_reduced() && *self == self.canonical()
    }

    /// True when the cyclic word is not a proper power `u^k`, `k ≥ 2`.
    pub fn is_primitive(&self) -> bool {
        let w = self.cyclically_reduced().0;
        let n = w.len();
        if n == 0 {
            return false;
        }
        (1..n)
            .filter(|p| n % p == 0)
            .all(|p| (0..n).any(|i| w[i] != w[(i + p) % n]))
    }

    /// Substitute each letter of generator `g` by `image` (and its inverse).
    pub fn substitute(&self, g: usize, image: &Word) -> Word {
        let inv = image.inverse();
        let mut out = Word::default();
        for &l in &self.0 {
            if l.generator() == g {
                out = out.concat(if l.is_inverse() { &inv } else { image });
            } else {
                out = out.concat(&Word::letter(l));
            }
        }
        out
    }

    pub fn uses_generator(&self, g: usize) -> bool {
        self.0.iter().any(|l| l.generator() == g)
    }

    /// Renumber generators through `map` (old index → new index).
    pub fn renumber(&self, map: &[Option<usize>]) -> Word {
        Word(
            self.0
                .iter()
                .map(|l| {
                    let g = map[l.generator()].expect("renumbering an eliminated generator");
                    Letter::new(g, l.is_inverse())
                })
                .collect(),
        )
    }
}

fn least_rotation(w: &[Letter]) -> Vec<Letter> {
    let n = w.len();
    (0..n)
        .map(|r| w[r..].iter().chain(&w[..r]).copied().collect::<Vec<_>>())
        .min()
        .unwrap_or_default()
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for l in &self.0 {
            write!(f, "{}", l.to_char())?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = Error;
    fn from_str(s: &str) -> Result<Word> {
        if s == "1" {
            return Ok(Word::default());
        }
        s.chars()
            .map(|ch| match ch {
                'a'..='z' => Ok(Letter::new((ch as u8 - b'a') as usize, false)),
                'A'..='Z' => Ok(Letter::new((ch as u8 - b'A') as usize, true)),
                _ => Err(Error::InvalidWord(format!(
                    "unexpected character {ch:?} in {s:?}"
                ))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Word, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A free-homotopy class of closed curves.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveClass {
    /// The `i`-th curve of the chart's pants decomposition.
    Pants(usize),
    /// A cyclically reduced word in the chart's generators.
    Word(Word),
}

impl CurveClass {
    /// Parse `p3` as a pants curve or a word otherwise; words are canonicalized.
    pub fn parse(s: &str) -> Result<CurveClass> {
        if let Some(rest) = s.strip_prefix('p') {
            if let Ok(i) = rest.parse::<usize>() {
                return Ok(CurveClass::Pants(i));
            }
        }
        let w: Word = s.parse()?;
        CurveClass::word(&w)
    }

    /// Canonical class of a word. Rejects trivial words and proper powers.
    pub fn word(w: &Word) -> Result<CurveClass> {
        let c = w.canonical();
        if c.is_empty() {
            return Err(Error::InvalidWord(format!("{w} is trivial")));
        }
        if !c.is_primitive() {
            return Err(Error::InvalidWord(format!("{w} is a proper power")));
        }
        Ok(CurveClass::Word(c))
    }

    pub fn pants_index(&self) -> Option<usize> {
        match self {
            CurveClass::Pants(i) => Some(*i),
            CurveClass::Word(_) => None,
        }
    }
}

impl fmt::Display for CurveClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurveClass::Pants(i) => write!(f, "p{i}"),
            CurveClass::Word(w) => write!(f, "{w}"),
        }
    }
}
