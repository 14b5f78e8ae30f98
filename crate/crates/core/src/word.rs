//! Words in the generators of a marked group.

use std::fmt;

use crate::error::{Error, Result};
use crate::moebius::ProjectiveMatrix;

/// A generator or its inverse, packed as `2 * index + inverse`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter(u8);

impl Letter {
    pub fn new(generator: usize, inverse: bool) -> Self {
        debug_assert!(generator < 128);
        Letter((generator as u8) << 1 | inverse as u8)
    }

    /// From a signed one-based index (`2` is the second generator, `-2` its inverse).
    pub fn from_signed(s: i32) -> Result<Self> {
        if s == 0 || s.unsigned_abs() > 127 {
            return Err(Error::InvalidWord(format!("letter index {s} out of range")));
        }
        Ok(Letter::new(s.unsigned_abs() as usize - 1, s < 0))
    }

    pub fn to_signed(self) -> i32 {
        let g = self.generator() as i32 + 1;
        if self.is_inverse() {
            -g
        } else {
            g
        }
    }

    pub fn generator(self) -> usize {
        (self.0 >> 1) as usize
    }

    pub fn is_inverse(self) -> bool {
        self.0 & 1 == 1
    }

    pub fn inverse(self) -> Self {
        Letter(self.0 ^ 1)
    }

    /// Position in the table built by [`letter_matrices`].
    pub fn code(self) -> usize {
        self.0 as usize
    }

    /// All letters over `rank` generators, in code order.
    pub fn alphabet(rank: usize) -> impl Iterator<Item = Letter> {
        (0..2 * rank).map(|c| Letter(c as u8))
    }
}

/// A freely reduced word.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    /// Freely reduces the input.
    pub fn new(letters: impl IntoIterator<Item = Letter>) -> Self {
        let mut out: Vec<Letter> = Vec::new();
        for l in letters {
            if out.last() == Some(&l.inverse()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word(out)
    }

    pub fn from_signed(s: &[i32]) -> Result<Self> {
        let letters = s.iter().map(|&x| Letter::from_signed(x)).collect::<Result<Vec<_>>>()?;
        Ok(Word::new(letters))
    }

    pub fn to_signed(&self) -> Vec<i32> {
        self.0.iter().map(|l| l.to_signed()).collect()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_generator(&self) -> Option<usize> {
        self.0.iter().map(|l| l.generator()).max()
    }

    pub fn inverse(&self) -> Self {
        Word(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    pub fn concat(&self, other: &Word) -> Self {
        Word::new(self.0.iter().chain(other.0.iter()).copied())
    }

    /// Appends one letter, reducing if it cancels.
    pub fn push(&mut self, l: Letter) {
        if self.0.last() == Some(&l.inverse()) {
            self.0.pop();
        } else {
            self.0.push(l);
        }
    }

    pub fn last(&self) -> Option<Letter> {
        self.0.last().copied()
    }

    pub fn first(&self) -> Option<Letter> {
        self.0.first().copied()
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        match (self.0.first(), self.0.last()) {
            (Some(f), Some(l)) => self.0.len() == 1 || *f != l.inverse(),
            _ => true,
        }
    }

    /// Strips cancelling first/last pairs. The result is conjugate to `self`.
    pub fn cyclically_reduced(&self) -> Word {
        let mut lo = 0;
        let mut hi = self.0.len();
        while hi - lo >= 2 && self.0[lo] == self.0[hi - 1].inverse() {
            lo += 1;
            hi -= 1;
        }
        Word(self.0[lo..hi].to_vec())
    }

    /// Lexicographically least cyclic rotation of the cyclic reduction of `self`
    /// or of its inverse. Two words in a free group are conjugate up to inversion
    /// iff these agree.
    pub fn canonical_unoriented(&self) -> Word {
        let w = self.cyclically_reduced();
        let a = least_rotation(&w.0);
        let b = least_rotation(&w.inverse().0);
        Word(a.min(b))
    }

    /// Oriented version of [`Word::canonical_unoriented`].
    pub fn canonical_cyclic(&self) -> Word {
        Word(least_rotation(&self.cyclically_reduced().0))
    }

    /// True if the cyclic reduction is `u^k` for some `k >= 2`.
    pub fn is_proper_power(&self) -> bool {
        let w = self.cyclically_reduced();
        let n = w.0.len();
        (1..n).filter(|p| n % p == 0).any(|p| (p..n).all(|i| w.0[i] == w.0[i - p]))
    }

    pub fn evaluate(&self, generators: &[ProjectiveMatrix]) -> ProjectiveMatrix {
        let table = letter_matrices(generators);
        self.evaluate_with(&table)
    }

    pub fn evaluate_with(&self, table: &[ProjectiveMatrix]) -> ProjectiveMatrix {
        self.0.iter().fold(ProjectiveMatrix::identity(), |acc, l| acc * table[l.code()])
    }

    /// Replaces each generator by a word (its image under a homomorphism).
    pub fn substitute(&self, images: &[Word]) -> Word {
        let mut out = Word::empty();
        for l in &self.0 {
            let img = &images[l.generator()];
            let piece = if l.is_inverse() { img.inverse() } else { img.clone() };
            for x in piece.0 {
                out.push(x);
            }
        }
        out
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.to_signed().iter().map(|x| x.to_string()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

fn least_rotation(w: &[Letter]) -> Vec<Letter> {
    let n = w.len();
    if n == 0 {
        return Vec::new();
    }
    (0..n)
        .map(|r| w[r..].iter().chain(w[..r].iter()).copied().collect::<Vec<_>>())
        .min()
        .unwrap()
}

/// Generators and inverses indexed by [`Letter::code`].
pub fn letter_matrices(generators: &[ProjectiveMatrix]) -> Vec<ProjectiveMatrix> {
    generators.iter().flat_map(|g| [*g, g.inverse()]).collect()
}

/// Every freely reduced word of length `1..=max_len` over `rank` generators, shortlex order.
pub fn reduced_words(rank: usize, max_len: usize) -> Vec<Word> {
    let mut out: Vec<Word> = Vec::new();
    let mut layer: Vec<Word> = vec![Word::empty()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &layer {
            for l in Letter::alphabet(rank) {
                if w.last() == Some(l.inverse()) {
                    continue;
                }
                let mut v = w.clone();
                v.0.push(l);
                next.push(v);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(s: &[i32]) -> Word {
        Word::from_signed(s).unwrap()
    }

    #[test]
    fn free_reduction() {
        assert_eq!(w(&[1, 2, -2, -1, 1]), w(&[1]));
        assert!(w(&[1, -1]).is_empty());
        assert!(Word::from_signed(&[0]).is_err());
    }

    #[test]
    fn cyclic_canonical_forms() {
        assert_eq!(w(&[2, 1, -2]).cyclically_reduced(), w(&[1]));
        assert_eq!(w(&[1, -2]).canonical_unoriented(), w(&[-2, 1]).canonical_unoriented());
        assert_eq!(w(&[1, -2]).canonical_unoriented(), w(&[2, -1]).canonical_unoriented());
        assert_ne!(w(&[1, 2]).canonical_unoriented(), w(&[1, -2]).canonical_unoriented());
    }

    #[test]
    fn proper_powers() {
        assert!(w(&[1, 2, 1, 2]).is_proper_power());
        assert!(w(&[1, 1]).is_proper_power());
        assert!(w(&[3, 1, 2, 1, 2, -3]).is_proper_power());
        assert!(!w(&[1, 2, 1]).is_proper_power());
        assert!(!w(&[1]).is_proper_power());
    }

    #[test]
    fn reduced_word_counts() {
        // 2r (2r-1)^{n-1} words of length n
        let ws = reduced_words(2, 4);
        assert_eq!(ws.len(), 4 + 12 + 36 + 108);
    }

    #[test]
    fn substitution_is_homomorphic() {
        let images = vec![w(&[2]), w(&[1, 2])];
        let u = w(&[1, -2, 1]);
        let v = w(&[2, 2]);
        assert_eq!(u.concat(&v).substitute(&images), u.substitute(&images).concat(&v.substitute(&images)));
    }

    proptest! {
        #[test]
        fn canonical_form_is_conjugation_invariant(
            letters in prop::collection::vec(prop::sample::select(vec![1, -1, 2, -2, 3, -3]), 1..10),
            conj in prop::collection::vec(prop::sample::select(vec![1, -1, 2, -2]), 0..4),
        ) {
            let u = w(&letters);
            let c = w(&conj);
            let conjugated = c.concat(&u).concat(&c.inverse());
            prop_assert_eq!(u.canonical_unoriented(), conjugated.canonical_unoriented());
            prop_assert_eq!(u.canonical_unoriented(), u.inverse().canonical_unoriented());
        }
    }
}
