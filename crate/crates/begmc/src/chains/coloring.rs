//! Random transpositions on 3-colorings of the complete graph with fixed
//! color counts, and the coupling used to bound its mixing time.
//!
//! The chain picks two uniform positions and transposes their colors (a
//! draw of equal positions holds). Its stationary law is uniform on the set
//! of arrangements with the given counts. The coupled copy reuses the same
//! position draws except when both chosen positions disagree between the
//! chains, in which case the second chain redirects its second position into
//! the disagreement set; the number of disagreements never increases.

use rand::RngCore;

use crate::rng::uniform_index;

/// A coloring with fixed per-color counts (indexed -1, 0, +1 -> 0, 1, 2).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColoringState {
    word: Vec<i8>,
    counts: [usize; 3],
}

impl ColoringState {
    pub fn new(word: Vec<i8>) -> Self {
        let mut counts = [0usize; 3];
        for &v in &word {
            assert!((-1..=1).contains(&v));
            counts[(v + 1) as usize] += 1;
        }
        Self { word, counts }
    }

    /// The sorted arrangement with the given counts (n_minus, n_zero, n_plus).
    pub fn canonical(counts: [usize; 3]) -> Self {
        let mut word = Vec::with_capacity(counts.iter().sum());
        for (c, &k) in counts.iter().enumerate() {
            word.extend(std::iter::repeat_n(c as i8 - 1, k));
        }
        Self { word, counts }
    }

    /// Fisher-Yates shuffle: a uniform draw from the class.
    pub fn shuffled<R: RngCore>(counts: [usize; 3], rng: &mut R) -> Self {
        let mut st = Self::canonical(counts);
        let n = st.word.len();
        for i in (1..n).rev() {
            let j = uniform_index(rng, i + 1);
            st.word.swap(i, j);
        }
        st
    }

    pub fn word(&self) -> &[i8] {
        &self.word
    }

    pub fn counts(&self) -> [usize; 3] {
        self.counts
    }

    pub fn n(&self) -> usize {
        self.word.len()
    }

    /// Positions where the two colorings differ.
    pub fn disagreements(&self, other: &Self) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.word[i] != other.word[i]).collect()
    }
}

/// One transposition move: two uniform positions, swapped if distinct.
pub fn coloring_step<R: RngCore>(x: &mut ColoringState, rng: &mut R) {
    let n = x.n();
    let r1 = uniform_index(rng, n);
    let r2 = uniform_index(rng, n);
    if r1 != r2 {
        x.word.swap(r1, r2);
    }
}

/// One step of the coupled pair. Returns the disagreement count after the
/// move.
pub fn coupled_coloring_step<R: RngCore>(
    x: &mut ColoringState,
    y: &mut ColoringState,
    rng: &mut R,
) -> usize {
    debug_assert_eq!(x.counts, y.counts);
    let n = x.n();
    let r1 = uniform_index(rng, n);
    let r2 = uniform_index(rng, n);
    if r1 != r2 {
        x.word.swap(r1, r2);
        let d1 = x.word[r1] != y.word[r1]; // note: x already swapped
        let _ = d1;
        // the case split uses the pre-move values of x at r1, r2
        // (recover them from the swap)
        let (x1, x2) = (x.word[r2], x.word[r1]);
        let agree1 = x1 == y.word[r1];
        let agree2 = x2 == y.word[r2];
        if agree1 || agree2 {
            // at most one disagreement among the chosen positions:
            // mirror the move
            y.word.swap(r1, r2);
        } else {
            // both disagree: redirect the second position into the
            // disagreement set of the pre-move states
            let mut dis = Vec::new();
            for i in 0..n {
                let xv = if i == r1 {
                    x1
                } else if i == r2 {
                    x2
                } else {
                    x.word[i]
                };
                if xv != y.word[i] {
                    dis.push(i);
                }
            }
            let r3 = dis[uniform_index(rng, dis.len())];
            y.word.swap(r1, r3);
        }
    }
    x.disagreements(y).len()
}

/// Runs the coupling from a canonical start against an equilibrium draw,
/// returning (coupling time, whether the disagreement count was monotone).
pub fn coupling_time<R: RngCore>(
    counts: [usize; 3],
    rng: &mut R,
    max_steps: usize,
) -> (usize, bool) {
    let mut x = ColoringState::canonical(counts);
    let mut y = ColoringState::shuffled(counts, rng);
    let mut psi = x.disagreements(&y).len();
    let mut monotone = true;
    for step in 0..max_steps {
        if psi == 0 {
            return (step, monotone);
        }
        let next = coupled_coloring_step(&mut x, &mut y, rng);
        if next > psi {
            monotone = false;
        }
        psi = next;
    }
    (max_steps, monotone)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    #[test]
    fn counts_preserved() {
        let mut x = ColoringState::new(vec![1, -1, 0, 0, 1]);
        let counts = x.counts();
        let mut rng = stream_rng(1, 0);
        for _ in 0..100_000 {
            coloring_step(&mut x, &mut rng);
        }
        assert_eq!(x.counts(), counts);
        let mut recount = [0usize; 3];
        for &v in x.word() {
            recount[(v + 1) as usize] += 1;
        }
        assert_eq!(recount, counts);
    }

    #[test]
    fn equal_indices_hold() {
        // n = 1 forces r1 == r2 every time
        let mut x = ColoringState::new(vec![1]);
        let mut rng = stream_rng(2, 0);
        for _ in 0..100 {
            coloring_step(&mut x, &mut rng);
            assert_eq!(x.word(), &[1]);
        }
    }

    #[test]
    fn empirical_law_uniform_on_class() {
        // N = 5, counts (1, 2, 2): 30 arrangements, TV < 0.02
        let counts = [1usize, 2, 2];
        let mut x = ColoringState::canonical(counts);
        let mut rng = stream_rng(3, 0);
        let mut hist = std::collections::HashMap::new();
        let steps = 1_500_000usize;
        for _ in 0..steps {
            coloring_step(&mut x, &mut rng);
            *hist.entry(x.word().to_vec()).or_insert(0u64) += 1;
        }
        assert_eq!(hist.len(), 30);
        let tv: f64 = hist
            .values()
            .map(|&c| (c as f64 / steps as f64 - 1.0 / 30.0).abs())
            .sum::<f64>()
            / 2.0;
        assert!(tv < 0.02, "TV = {tv}");
    }

    #[test]
    fn coupled_chains_absorb_and_stay() {
        let counts = [2usize, 3, 3];
        let mut rng = stream_rng(4, 0);
        let mut x = ColoringState::shuffled(counts, &mut rng);
        let mut y = x.clone();
        for _ in 0..1000 {
            let psi = coupled_coloring_step(&mut x, &mut y, &mut rng);
            assert_eq!(psi, 0);
            assert_eq!(x, y);
        }
    }

    #[test]
    fn psi_monotone_and_coupling_bound_small() {
        // N = 10: mean coupling time well under N^4 = 10^4
        let counts = [3usize, 3, 4];
        let mut rng = stream_rng(5, 0);
        let trials = 200;
        let mut total = 0usize;
        for _ in 0..trials {
            let (t, monotone) = coupling_time(counts, &mut rng, 1_000_000);
            assert!(monotone);
            total += t;
        }
        let mean = total as f64 / trials as f64;
        assert!(mean <= 10_000.0, "mean coupling time {mean}");
    }

    #[test]
    fn coupled_marginal_preserves_counts() {
        let counts = [2usize, 2, 2];
        let mut rng = stream_rng(6, 0);
        let mut x = ColoringState::canonical(counts);
        let mut y = ColoringState::shuffled(counts, &mut rng);
        for _ in 0..50_000 {
            coupled_coloring_step(&mut x, &mut y, &mut rng);
        }
        assert_eq!(x.counts(), counts);
        assert_eq!(y.counts(), counts);
        let mut rc = [0usize; 3];
        for &v in y.word() {
            rc[(v + 1) as usize] += 1;
        }
        assert_eq!(rc, counts);
    }
}
