use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// Longest word the packed representation supports.
pub const MAX_DEGREE: usize = 16;

/// One of the two free generators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    X,
    Y,
}

impl Letter {
    pub const ALL: [Letter; 2] = [Letter::X, Letter::Y];

    #[inline]
    pub(crate) fn bit(self) -> u32 {
        match self {
            Letter::X => 0,
            Letter::Y => 1,
        }
    }

    #[inline]
    pub(crate) fn from_bit(bit: u32) -> Letter {
        if bit & 1 == 0 {
            Letter::X
        } else {
            Letter::Y
        }
    }

    pub fn swapped(self) -> Letter {
        match self {
            Letter::X => Letter::Y,
            Letter::Y => Letter::X,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Letter::X => 'X',
            Letter::Y => 'Y',
        }
    }
}

/// A nonempty word over `{X, Y}`.
///
/// Packed into an integer code: the first letter sits in the most significant
/// of the `len` low bits, `X = 0` and `Y = 1`. Concatenation is then
/// `(a << len(b)) | b`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    len: u8,
    code: u32,
}

impl Word {
    pub fn new(len: usize, code: u32) -> Result<Word, Error> {
        if len == 0 || len > MAX_DEGREE || (len < 32 && code >> len != 0) {
            return Err(Error::InvalidWord(format!("len={len} code={code}")));
        }
        Ok(Word { len: len as u8, code })
    }

    #[inline]
    pub(crate) fn from_raw(len: usize, code: u32) -> Word {
        debug_assert!((1..=MAX_DEGREE).contains(&len) && code >> len == 0);
        Word { len: len as u8, code }
    }

    pub fn letter(letter: Letter) -> Word {
        Word::from_raw(1, letter.bit())
    }

    pub fn from_letters(letters: &[Letter]) -> Result<Word, Error> {
        if letters.is_empty() || letters.len() > MAX_DEGREE {
            return Err(Error::InvalidWord(format!("{} letters", letters.len())));
        }
        let code = letters.iter().fold(0u32, |acc, l| (acc << 1) | l.bit());
        Ok(Word::from_raw(letters.len(), code))
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len as usize
    }

    /// Always false; words have at least one letter.
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn code(&self) -> u32 {
        self.code
    }

    /// Letter at position `i`, counted from the left.
    pub fn at(&self, i: usize) -> Letter {
        assert!(i < self.len());
        Letter::from_bit(self.code >> (self.len() - 1 - i))
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> + '_ {
        (0..self.len()).map(move |i| self.at(i))
    }

    pub fn first(&self) -> Letter {
        self.at(0)
    }

    pub fn last(&self) -> Letter {
        Letter::from_bit(self.code)
    }

    pub fn concat(&self, other: &Word) -> Result<Word, Error> {
        let len = self.len() + other.len();
        if len > MAX_DEGREE {
            return Err(Error::InvalidWord(format!("{self}{other}")));
        }
        Ok(Word::from_raw(len, (self.code << other.len) | other.code))
    }

    /// Exchange `X` and `Y` throughout.
    pub fn swapped(&self) -> Word {
        Word::from_raw(self.len(), self.code ^ mask(self.len()))
    }
}

#[inline]
pub(crate) fn mask(len: usize) -> u32 {
    if len >= 32 {
        u32::MAX
    } else {
        (1u32 << len) - 1
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in self.letters() {
            write!(f, "{}", l.as_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({self})")
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Word, Error> {
        let letters = s
            .chars()
            .map(|c| match c {
                'X' => Ok(Letter::X),
                'Y' => Ok(Letter::Y),
                _ => Err(Error::InvalidWord(s.to_string())),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Word::from_letters(&letters).map_err(|_| Error::InvalidWord(s.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display() {
        let w: Word = "XYYX".parse().unwrap();
        assert_eq!(w.len(), 4);
        assert_eq!(w.code(), 0b0110);
        assert_eq!(w.to_string(), "XYYX");
        assert_eq!(w.first(), Letter::X);
        assert_eq!(w.last(), Letter::X);
    }

    #[test]
    fn rejects_bad_words() {
        assert!("".parse::<Word>().is_err());
        assert!("XZ".parse::<Word>().is_err());
        assert!("X".repeat(MAX_DEGREE + 1).parse::<Word>().is_err());
        assert!(Word::new(2, 4).is_err());
    }

    #[test]
    fn concat_and_swap() {
        let a: Word = "XY".parse().unwrap();
        let b: Word = "Y".parse().unwrap();
        assert_eq!(a.concat(&b).unwrap().to_string(), "XYY");
        assert_eq!(a.swapped().to_string(), "YX");
    }
}
