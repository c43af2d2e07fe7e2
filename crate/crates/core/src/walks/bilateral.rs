use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::word::{inverse_letter, Word};
use super::StepMeasure;

/// A two-sided sample path `(g_i)` for `i` in `[-m, m]`, built from
/// increments `h_i`: `g_0 = 1`, `g_n = h_1 ... h_n` and
/// `g_{-n} = h_0^-1 h_-1^-1 ... h_{-n+1}^-1`.
#[derive(Clone, Debug, PartialEq)]
pub struct BilateralPath {
    /// `h_i` for `i` in `[-m + 1, m]`, stored at `i + m - 1`.
    increments: Vec<u8>,
    m: usize,
}

impl BilateralPath {
    /// Two independent one-sided walks, one for each time direction.
    pub fn sample(seed: u64, m: usize, measure: &StepMeasure) -> Self {
        let cum = measure.cumulative();
        let draw = |stream: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream);
            (0..m)
                .map(|_| {
                    let u: f64 = rng.random();
                    cum.iter().position(|&c| u < c).unwrap_or(3) as u8
                })
                .collect::<Vec<u8>>()
        };
        let forward = draw(0);
        let backward = draw(1);
        // backward[j] is h_{-j}.
        let mut increments: Vec<u8> = backward.into_iter().rev().collect();
        increments.extend(forward);
        Self { increments, m }
    }

    pub fn half_width(&self) -> usize {
        self.m
    }

    fn h(&self, i: isize) -> u8 {
        self.increments[(i + self.m as isize - 1) as usize]
    }

    /// Position `g_i` as a reduced word.
    pub fn position(&self, i: isize) -> Word {
        let mut w = Vec::new();
        if i >= 0 {
            for j in 1..=i {
                super::push_reduced(&mut w, self.h(j));
            }
        } else {
            for j in (i + 1..=0).rev() {
                super::push_reduced(&mut w, inverse_letter(self.h(j)));
            }
        }
        Word::from_letters(w)
    }

    /// The shift `U(g)_i = g_1^-1 g_{i+1}`, i.e. `h'_i = h_{i+1}`. The
    /// window loses one step on each side.
    pub fn shift(&self) -> Self {
        assert!(self.m >= 1, "empty window");
        Self {
            increments: self.increments[2..].to_vec(),
            m: self.m - 1,
        }
    }

    /// `(1 / k) sum_{j < k} phi(U^j g)`.
    pub fn ergodic_average(&self, k: usize, phi: impl Fn(&BilateralPath) -> f64) -> f64 {
        let mut path = self.clone();
        let mut acc = Vec::with_capacity(k);
        for _ in 0..k {
            acc.push(phi(&path));
            path = path.shift();
        }
        crate::numeric::sum(&acc) / k as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shift_matches_group_formula() {
        let p = BilateralPath::sample(3, 12, &StepMeasure::default());
        let s = p.shift();
        let g1_inv = p.position(1).inverse();
        for i in -(s.half_width() as isize)..=(s.half_width() as isize) {
            assert_eq!(s.position(i), g1_inv.mul(&p.position(i + 1)), "i={i}");
        }
    }

    #[test]
    fn positions_are_consistent() {
        let p = BilateralPath::sample(9, 8, &StepMeasure::default());
        assert_eq!(p.position(0), Word::empty());
        for i in -7..8isize {
            let step = Word::from_letters(vec![p.h(i + 1)]);
            assert_eq!(p.position(i).mul(&step), p.position(i + 1));
        }
    }

    #[test]
    fn ergodic_average_of_step_length() {
        let p = BilateralPath::sample(5, 400, &StepMeasure::default());
        let avg = p.ergodic_average(100, |q| q.position(1).len() as f64);
        assert_eq!(avg, 1.0);
    }
}
