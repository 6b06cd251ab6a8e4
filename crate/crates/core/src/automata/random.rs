use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Alphabet, Dfa};
use crate::{Error, Result};

const MAX_ATTEMPTS: usize = 100_000;

/// A minimal DFA with exactly `n` states, drawn by rejection sampling: uniform
/// transitions, each state accepting with probability 1/2, kept only if the
/// minimized automaton still has `n` states. Deterministic in `seed`.
pub fn random_min_dfa(n: usize, alphabet: &Alphabet, seed: u64) -> Result<Dfa> {
    if n == 0 {
        return Err(Error::InvalidArgument("random_min_dfa needs n >= 1".into()));
    }
    let k = alphabet.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_ATTEMPTS {
        let accepting: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
        let delta: Vec<usize> = (0..n * k).map(|_| rng.gen_range(0..n)).collect();
        let m = Dfa::from_parts(alphabet.clone(), 0, accepting, delta).minimize();
        if m.n_states() == n {
            return Ok(m);
        }
    }
    Err(Error::GenerationFailed {
        n,
        attempts: MAX_ATTEMPTS,
    })
}
