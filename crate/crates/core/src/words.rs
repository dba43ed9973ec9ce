//! Extended letters and words, their text syntax, and the word sets used by
//! the presets.
//!
//! Text syntax:
//!
//! ```text
//! word     := letter+
//! letter   := '[' factor+ ']'
//! factor   := dim exponent?
//! dim      := digit 1-9 | '(' integer ')'
//! exponent := '^' digit | '^' '(' signed-integer ')'
//! ```
//!
//! `[1^22][2^3]` is therefore the two-letter word with letters `1²2` and `2³`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A monomial in the dimension variables with nonzero signed exponents.
///
/// Factors are `(dimension, exponent)` pairs with 1-based dimensions in
/// strictly increasing order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExtendedLetter {
    factors: Vec<(usize, i32)>,
}

impl ExtendedLetter {
    /// Merges repeated dimensions by summing exponents.
    pub fn new(factors: impl IntoIterator<Item = (usize, i32)>) -> Result<Self> {
        let mut merged: BTreeMap<usize, i32> = BTreeMap::new();
        for (dim, exp) in factors {
            if dim == 0 {
                return Err(Error::DimensionOutOfRange { dim, d: 0 });
            }
            *merged.entry(dim).or_default() += exp;
        }
        if merged.is_empty() {
            return Err(Error::Parse {
                text: String::new(),
                pos: 0,
                msg: "letter without factors".into(),
            });
        }
        if let Some((&dim, _)) = merged.iter().find(|(_, &e)| e == 0) {
            return Err(Error::ZeroExponent(dim));
        }
        Ok(Self {
            factors: merged.into_iter().collect(),
        })
    }

    /// `[dim^exp]`
    pub fn single(dim: usize, exp: i32) -> Result<Self> {
        Self::new([(dim, exp)])
    }

    pub fn factors(&self) -> &[(usize, i32)] {
        &self.factors
    }

    pub fn weight(&self) -> u32 {
        self.factors.iter().map(|&(_, e)| e.unsigned_abs()).sum()
    }

    pub fn max_dim(&self) -> usize {
        self.factors.last().map_or(0, |&(d, _)| d)
    }

    pub fn has_negative_exponent(&self) -> bool {
        self.factors.iter().any(|&(_, e)| e < 0)
    }
}

impl fmt::Display for ExtendedLetter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for &(dim, exp) in &self.factors {
            if dim <= 9 {
                write!(f, "{dim}")?;
            } else {
                write!(f, "({dim})")?;
            }
            match exp {
                1 => {}
                2..=9 => write!(f, "^{exp}")?,
                _ => write!(f, "^({exp})")?,
            }
        }
        f.write_str("]")
    }
}

/// A nonempty sequence of extended letters.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Word {
    letters: Vec<ExtendedLetter>,
}

impl Word {
    pub fn new(letters: Vec<ExtendedLetter>) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::Parse {
                text: String::new(),
                pos: 0,
                msg: "empty word".into(),
            });
        }
        Ok(Self { letters })
    }

    pub fn letters(&self) -> &[ExtendedLetter] {
        &self.letters
    }

    /// Number of letters `p`.
    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Sum of absolute exponents over all letters.
    pub fn weight(&self) -> u32 {
        self.letters.iter().map(ExtendedLetter::weight).sum()
    }

    pub fn max_dim(&self) -> usize {
        self.letters.iter().map(ExtendedLetter::max_dim).max().unwrap_or(0)
    }

    pub fn has_negative_exponent(&self) -> bool {
        self.letters.iter().any(ExtendedLetter::has_negative_exponent)
    }

    /// Errors if the word references a dimension above `d`.
    pub fn check_dims(&self, d: usize) -> Result<()> {
        match self.max_dim() {
            m if m > d => Err(Error::DimensionOutOfRange { dim: m, d }),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.letters {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for Word {
    type Err = Error;

    /// Parses without a dimension bound; see [`parse_word`].
    fn from_str(s: &str) -> Result<Self> {
        Parser::new(s).word()
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// Parses `text` and checks every dimension against `d`.
pub fn parse_word(text: &str, d: usize) -> Result<Word> {
    let w: Word = text.parse()?;
    w.check_dims(d)?;
    Ok(w)
}

pub fn format_word(w: &Word) -> String {
    w.to_string()
}

struct Parser<'a> {
    text: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            text,
            bytes: text.as_bytes(),
            pos: 0,
        }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse {
            text: self.text.to_string(),
            pos: self.pos,
            msg: msg.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        match self.peek() {
            Some(b) if b == c => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.err(format!("expected '{}'", c as char))),
        }
    }

    fn word(&mut self) -> Result<Word> {
        let mut letters = Vec::new();
        while self.peek().is_some() {
            letters.push(self.letter()?);
        }
        if letters.is_empty() {
            return Err(self.err("empty word"));
        }
        Word::new(letters)
    }

    fn letter(&mut self) -> Result<ExtendedLetter> {
        self.expect(b'[')?;
        let mut factors = Vec::new();
        loop {
            match self.peek() {
                Some(b']') => {
                    self.pos += 1;
                    break;
                }
                Some(_) => factors.push(self.factor()?),
                None => return Err(self.err("unterminated letter")),
            }
        }
        if factors.is_empty() {
            return Err(self.err("letter without factors"));
        }
        ExtendedLetter::new(factors)
    }

    fn factor(&mut self) -> Result<(usize, i32)> {
        let dim = match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let v = self.integer()?;
                self.expect(b')')?;
                usize::try_from(v).map_err(|_| self.err("negative dimension"))?
            }
            Some(c @ b'0'..=b'9') => {
                self.pos += 1;
                usize::from(c - b'0')
            }
            _ => return Err(self.err("expected a dimension")),
        };
        if dim == 0 {
            return Err(Error::DimensionOutOfRange { dim, d: 0 });
        }
        let exp = if self.peek() == Some(b'^') {
            self.pos += 1;
            match self.peek() {
                Some(b'(') => {
                    self.pos += 1;
                    let v = self.integer()?;
                    self.expect(b')')?;
                    i32::try_from(v).map_err(|_| self.err("exponent out of range"))?
                }
                Some(c @ b'0'..=b'9') => {
                    self.pos += 1;
                    i32::from(c - b'0')
                }
                _ => return Err(self.err("expected an exponent")),
            }
        } else {
            1
        };
        if exp == 0 {
            return Err(Error::ZeroExponent(dim));
        }
        Ok((dim, exp))
    }

    fn integer(&mut self) -> Result<i64> {
        self.skip_ws();
        let start = self.pos;
        if matches!(self.bytes.get(self.pos), Some(b'-' | b'+')) {
            self.pos += 1;
        }
        while matches!(self.bytes.get(self.pos), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        self.text[start..self.pos]
            .parse()
            .map_err(|_| self.err("expected an integer"))
    }
}

/// All monomials of total degree `k` in `d` variables, exponents positive.
fn monomials(d: usize, k: u32) -> Vec<ExtendedLetter> {
    fn rec(dim: usize, d: usize, left: u32, acc: &mut Vec<(usize, i32)>, out: &mut Vec<ExtendedLetter>) {
        if left == 0 {
            if !acc.is_empty() {
                out.push(ExtendedLetter::new(acc.iter().copied()).expect("positive exponents"));
            }
            return;
        }
        if dim > d {
            return;
        }
        for e in (1..=left).rev() {
            acc.push((dim, e as i32));
            rec(dim + 1, d, left - e, acc, out);
            acc.pop();
        }
        rec(dim + 1, d, left, acc, out);
    }
    let mut out = Vec::new();
    rec(1, d, k, &mut Vec::new(), &mut out);
    out
}

/// Every word over `d` dimensions with positive exponents and weight at most
/// `max_weight`, ordered by weight and then by canonical text.
pub fn enumerate_words(d: usize, max_weight: u32) -> Vec<Word> {
    let letters_by_degree: Vec<Vec<ExtendedLetter>> =
        (0..=max_weight).map(|k| if k == 0 { Vec::new() } else { monomials(d, k) }).collect();

    // words_by_weight[n] = all words of weight exactly n
    let mut words_by_weight: Vec<Vec<Vec<ExtendedLetter>>> = vec![vec![Vec::new()]];
    for n in 1..=max_weight {
        let mut current = Vec::new();
        for k in 1..=n {
            for prefix in &words_by_weight[(n - k) as usize] {
                for letter in &letters_by_degree[k as usize] {
                    let mut w = prefix.clone();
                    w.push(letter.clone());
                    current.push(w);
                }
            }
        }
        words_by_weight.push(current);
    }

    let mut out = Vec::new();
    for group in words_by_weight.into_iter().skip(1) {
        let mut words: Vec<(String, Word)> = group
            .into_iter()
            .map(|ls| {
                let w = Word::new(ls).expect("nonempty");
                (w.to_string(), w)
            })
            .collect();
        words.sort_by(|a, b| a.0.cmp(&b.0));
        out.extend(words.into_iter().map(|(_, w)| w));
    }
    out
}

/// Number of words of weight exactly `n` over `d` dimensions, from the
/// composition recurrence `W(n) = sum_k C(k + d - 1, d - 1) W(n - k)`.
pub fn word_count_by_weight(d: usize, n: u32) -> u64 {
    let mut w = vec![1u64];
    for m in 1..=n as u64 {
        let mut total = 0;
        for k in 1..=m {
            total += binomial(k + d as u64 - 1, d as u64 - 1) * w[(m - k) as usize];
        }
        w.push(total);
    }
    w[n as usize]
}

pub(crate) fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// The two alternating words of the given length over the dimension pair
/// `(a, b)`: letters `[a], [b], [a], ...` with exponent signs alternating.
/// The first word starts with `+1`, the second with `-1`.
pub fn alternating_arctic_words(dims: (usize, usize), length: usize) -> Result<(Word, Word)> {
    let build = |start: i32| -> Result<Word> {
        let letters = (0..length.max(1))
            .map(|i| {
                let (dim, sign) = if i % 2 == 0 { (dims.0, start) } else { (dims.1, -start) };
                ExtendedLetter::single(dim, sign)
            })
            .collect::<Result<Vec<_>>>()?;
        Word::new(letters)
    };
    Ok((build(1)?, build(-1)?))
}
