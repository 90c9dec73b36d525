/// SplitMix64 finaliser.
pub(crate) fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Order-sensitive hash of a sequence of words.
pub(crate) fn hash_words(words: &[u64]) -> u64 {
    words
        .iter()
        .fold(0x6a09_e667_f3bc_c909, |h, &w| mix64(h ^ mix64(w)))
}

/// Pairwise summation; the result depends only on the order of `xs`.
pub(crate) fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Moments {
    pub count: usize,
    pub mean: f64,
    pub max: f64,
    /// Sample standard deviation (`n - 1` denominator).
    pub sd: f64,
}

pub(crate) fn moments(xs: &[f64]) -> Moments {
    let count = xs.len();
    if count == 0 {
        return Moments {
            count,
            mean: f64::NAN,
            max: f64::NAN,
            sd: f64::NAN,
        };
    }
    let mean = pairwise_sum(xs) / count as f64;
    let sq: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    let sd = if count > 1 {
        (pairwise_sum(&sq) / (count - 1) as f64).sqrt()
    } else {
        0.0
    };
    Moments {
        count,
        mean,
        max: xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        sd,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_sum_matches_naive_on_small_input() {
        let xs: Vec<f64> = (1..=100).map(|x| x as f64).collect();
        assert_eq!(pairwise_sum(&xs), 5050.0);
    }

    #[test]
    fn moments_of_constant_sequence() {
        let m = moments(&[2.0; 5]);
        assert_eq!((m.mean, m.max, m.sd), (2.0, 2.0, 0.0));
        assert!(moments(&[]).mean.is_nan());
    }

    #[test]
    fn hash_is_order_sensitive() {
        assert_ne!(hash_words(&[1, 2]), hash_words(&[2, 1]));
    }
}
