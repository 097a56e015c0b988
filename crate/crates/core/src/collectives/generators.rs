use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Label;

/// A pure label source: the label at `index` depends only on `(seed, index)`.
///
/// `fill` must agree with `label_at` position by position; the default does
/// exactly that, implementors override it for speed.
pub trait Generator: Send + Sync {
    fn label_at(&self, seed: u64, index: u64) -> Label;

    fn fill(&self, seed: u64, start: u64, out: &mut [Label]) {
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = self.label_at(seed, start + i as u64);
        }
    }
}

/// Uniform `[0, 1)` from the top 53 bits.
#[inline]
pub(crate) fn unit_f64(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// The counter-based uniform stream shared by all seeded generators: draw
/// `i` is the `u64` at ChaCha8 word position `2·i`.
pub(crate) fn stream_at(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_word_pos(2 * index as u128);
    rng
}

/// I.i.d. draws from a finite distribution by inverse CDF over the label
/// order.
#[derive(Clone, Debug)]
pub struct Categorical {
    cdf: Vec<f64>,
}

impl Categorical {
    /// Weights need not be normalized; they must be finite, non-negative and
    /// not all zero.
    pub fn new(weights: &[f64]) -> Self {
        assert!(!weights.is_empty(), "categorical needs at least one weight");
        assert!(
            weights.iter().all(|w| w.is_finite() && *w >= 0.0),
            "weights must be finite and non-negative"
        );
        let total: f64 = weights.iter().sum();
        assert!(total > 0.0, "weights must not all be zero");
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = weights
            .iter()
            .map(|w| {
                acc += w / total;
                acc
            })
            .collect();
        // the last positive bucket absorbs rounding so every u < 1 lands on
        // a label with positive weight
        let last = weights.iter().rposition(|w| *w > 0.0).unwrap();
        for c in &mut cdf[last..] {
            *c = f64::INFINITY;
        }
        Self { cdf }
    }

    pub fn uniform(m: usize) -> Self {
        Self::new(&vec![1.0; m])
    }

    /// Two labels, the first with probability `p`.
    pub fn bernoulli(p: f64) -> Self {
        Self::new(&[p, 1.0 - p])
    }

    #[inline]
    pub fn pick(&self, u: f64) -> Label {
        let k = self.cdf.partition_point(|&c| c <= u);
        Label(k.min(self.cdf.len() - 1) as u32)
    }
}

impl Generator for Categorical {
    fn label_at(&self, seed: u64, index: u64) -> Label {
        self.pick(unit_f64(stream_at(seed, index).next_u64()))
    }

    fn fill(&self, seed: u64, start: u64, out: &mut [Label]) {
        let mut rng = stream_at(seed, start);
        for slot in out {
            *slot = self.pick(unit_f64(rng.next_u64()));
        }
    }
}

/// Deterministic blocks `a^1 b^r a^{r²} b^{r³} …` over labels 0 and 1.
///
/// At the end of an `a`-block `ν(a) → r/(r+1)`, at the end of a `b`-block
/// `ν(a) → 1/(r+1)`, so the frequencies never settle.
#[derive(Clone, Debug)]
pub struct Oscillating {
    ratio: u64,
}

impl Oscillating {
    pub fn new(ratio: u64) -> Self {
        assert!(ratio >= 2, "block growth ratio must be at least 2");
        Self { ratio }
    }

    pub fn ratio(&self) -> u64 {
        self.ratio
    }

    /// Block number containing `index` and the start of the next block.
    fn locate(&self, index: u64) -> (u64, u128) {
        let (mut block, mut start, mut len) = (0u64, 0u128, 1u128);
        while start + len <= index as u128 {
            start += len;
            len *= self.ratio as u128;
            block += 1;
        }
        (block, start + len)
    }
}

impl Generator for Oscillating {
    fn label_at(&self, _seed: u64, index: u64) -> Label {
        Label((self.locate(index).0 % 2) as u32)
    }

    fn fill(&self, _seed: u64, start: u64, out: &mut [Label]) {
        let (mut block, mut next) = self.locate(start);
        let mut len = self.ratio as u128;
        for _ in 0..block {
            len *= self.ratio as u128;
        }
        for (i, slot) in out.iter_mut().enumerate() {
            let pos = (start + i as u64) as u128;
            if pos >= next {
                block += 1;
                next += len;
                len *= self.ratio as u128;
            }
            *slot = Label((block % 2) as u32);
        }
    }
}

#[derive(Clone, Debug)]
pub struct Constant(pub Label);

impl Generator for Constant {
    fn label_at(&self, _seed: u64, _index: u64) -> Label {
        self.0
    }
}

/// Repeats a fixed cycle forever.
#[derive(Clone, Debug)]
pub struct Periodic(pub Vec<Label>);

impl Generator for Periodic {
    fn label_at(&self, _seed: u64, index: u64) -> Label {
        self.0[(index % self.0.len() as u64) as usize]
    }
}

/// Wraps any pure closure.
pub struct FnGenerator<F>(pub F);

impl<F> Generator for FnGenerator<F>
where
    F: Fn(u64, u64) -> Label + Send + Sync,
{
    fn label_at(&self, seed: u64, index: u64) -> Label {
        (self.0)(seed, index)
    }
}
