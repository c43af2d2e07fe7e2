use std::fmt;
use std::str::FromStr;

use crate::error::WalkError;

/// Generators `a, A, b, B` encoded as `0, 1, 2, 3`; the inverse of `x` is `x ^ 1`.
pub const LETTERS: [char; 4] = ['a', 'A', 'b', 'B'];

#[inline]
pub fn inverse_letter(x: u8) -> u8 {
    x ^ 1
}

/// A word over `{a, A, b, B}` with `A = a^-1` and `B = b^-1`, not necessarily reduced.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<u8>);

impl Word {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    /// Wraps encoded letters; panics on codes above 3.
    pub fn from_letters(letters: Vec<u8>) -> Self {
        assert!(letters.iter().all(|&x| x < 4), "letter codes are 0..4");
        Self(letters)
    }

    pub fn parse(s: &str) -> Result<Self, WalkError> {
        s.chars()
            .map(|c| match c {
                'a' => Ok(0),
                'A' => Ok(1),
                'b' => Ok(2),
                'B' => Ok(3),
                other => Err(WalkError::BadLetter(other)),
            })
            .collect::<Result<Vec<u8>, _>>()
            .map(Self)
    }

    pub fn letters(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_reduced(&self) -> bool {
        self.0.windows(2).all(|p| p[1] != inverse_letter(p[0]))
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        self.is_reduced()
            && match (self.0.first(), self.0.last()) {
                (Some(&f), Some(&l)) => self.0.len() == 1 || l != inverse_letter(f),
                _ => true,
            }
    }

    pub fn inverse(&self) -> Self {
        Self(self.0.iter().rev().map(|&x| inverse_letter(x)).collect())
    }

    /// Reduced product `self * other`.
    pub fn mul(&self, other: &Word) -> Word {
        let mut out = reduce(self).0;
        for &x in &other.0 {
            push_reduced(&mut out, x);
        }
        Word(out)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &x in &self.0 {
            write!(f, "{}", LETTERS[x as usize])?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = WalkError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

/// Appends `x` to a reduced word, cancelling against the last letter.
#[inline]
pub fn push_reduced(w: &mut Vec<u8>, x: u8) {
    if w.last() == Some(&inverse_letter(x)) {
        w.pop();
    } else {
        w.push(x);
    }
}

/// Free reduction.
pub fn reduce(w: &Word) -> Word {
    let mut out = Vec::with_capacity(w.len());
    for &x in &w.0 {
        push_reduced(&mut out, x);
    }
    Word(out)
}

/// Splits the reduction of `w` as `conjugator * core * conjugator^-1` with
/// `core` cyclically reduced.
pub fn cyclic_reduce(w: &Word) -> (Word, Word) {
    let r = reduce(w).0;
    let mut i = 0;
    let mut j = r.len();
    while j >= i + 2 && r[j - 1] == inverse_letter(r[i]) {
        i += 1;
        j -= 1;
    }
    (Word(r[i..j].to_vec()), Word(r[..i].to_vec()))
}

/// Translation length on the Cayley tree: the cyclically reduced length.
pub fn translation_length(w: &Word) -> usize {
    cyclic_reduce(w).0.len()
}

/// Length of the longest common prefix.
pub fn common_prefix(a: &[u8], b: &[u8]) -> usize {
    a.iter().zip(b).take_while(|(x, y)| x == y).count()
}

/// Distance on the tree from every prefix `x[..t]`, `t = 0..=|x|`, to the
/// axis of the reduced, nontrivial word `w`. `x` must be reduced.
pub fn axis_distances(w: &Word, x: &[u8]) -> Result<Vec<usize>, WalkError> {
    let (core, conj) = cyclic_reduce(w);
    if core.is_empty() {
        return Err(WalkError::TorsionLike);
    }
    let (c, core) = (conj.0, core.0);
    let mut out = Vec::with_capacity(x.len() + 1);
    let branch = common_prefix(&c, x);
    let inv: Vec<u8> = core.iter().rev().map(|&l| inverse_letter(l)).collect();
    // Matching state of x[|c|..] against core^inf and core^-inf.
    let (mut fwd, mut bwd) = (true, true);
    let (mut fwd_len, mut bwd_len) = (0usize, 0usize);
    for t in 0..=x.len() {
        if t <= c.len() && t <= branch {
            out.push(c.len() - t);
            continue;
        }
        if branch < c.len() {
            // Left the conjugator path before reaching the axis.
            out.push((t - branch) + (c.len() - branch));
            continue;
        }
        let s = t - c.len();
        let letter = x[t - 1];
        if fwd && letter == core[(s - 1) % core.len()] {
            fwd_len = s;
        } else {
            fwd = false;
        }
        if bwd && letter == inv[(s - 1) % inv.len()] {
            bwd_len = s;
        } else {
            bwd = false;
        }
        out.push(s - fwd_len.max(bwd_len));
    }
    Ok(out)
}
