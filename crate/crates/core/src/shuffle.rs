//! The shuffling Markov chain on interlacing arrays, `T(N) → T(N+1)`.

use num_rational::BigRational;
use num_traits::One;
use rand::distributions::{Bernoulli, Distribution};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::interlacing::{arrays_to_matching, staircase, Configuration, Level, Matching};
use crate::lattice::{build_tower, rational_to_f64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Round {
    Y,
    X,
}

/// Supplies the coin flips of non-deterministic particles.
pub trait JumpSource {
    fn jump(&mut self, round: Round, level: u32, index: usize) -> bool;
}

/// Jump probabilities `p_y = αβ/(1+αβ)` and `p_x = β/(1+β)`.
pub fn jump_probabilities(alpha: &BigRational, beta: &BigRational) -> (f64, f64) {
    let ab = alpha * beta;
    let py = &ab / (BigRational::one() + &ab);
    let px = beta / (BigRational::one() + beta);
    (rational_to_f64(&py), rational_to_f64(&px))
}

/// Independent Bernoulli draws from a seeded ChaCha stream, consumed in
/// the order the chain requests them.
#[derive(Debug, Clone)]
pub struct StepRandomness {
    pub seed: u64,
    rng: ChaCha8Rng,
    y: Bernoulli,
    x: Bernoulli,
}

impl StepRandomness {
    pub fn new(seed: u64, alpha: &BigRational, beta: &BigRational) -> Self {
        Self::with_stream(seed, 0, alpha, beta)
    }

    /// Independent sub-stream `stream` of the generator seeded by `seed`.
    pub fn with_stream(seed: u64, stream: u64, alpha: &BigRational, beta: &BigRational) -> Self {
        let (py, px) = jump_probabilities(alpha, beta);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        StepRandomness {
            seed,
            rng,
            y: Bernoulli::new(py).expect("probability in [0,1]"),
            x: Bernoulli::new(px).expect("probability in [0,1]"),
        }
    }
}

impl JumpSource for StepRandomness {
    fn jump(&mut self, round: Round, _level: u32, _index: usize) -> bool {
        match round {
            Round::Y => self.y.sample(&mut self.rng),
            Round::X => self.x.sample(&mut self.rng),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepOrder {
    Ascending,
    Descending,
}

/// The size-0 configuration: a single level of empty Maya diagrams.
pub fn initial_config() -> Configuration {
    Configuration { n: 0, levels: vec![Level::empty(1)] }
}

pub fn step<J: JumpSource>(c: &Configuration, r: &mut J) -> Result<Configuration> {
    step_with_order(c, r, SweepOrder::Ascending)
}

/// Update `particles` against the already updated `upper` array: a particle
/// with `upper[j] = p + 1` is pushed, one with `upper[j-1] = p + 1` is held,
/// any other flips a coin.
fn round<J: JumpSource>(particles: &[i64], upper: &[i64], which: Round, level: u32, r: &mut J) -> Vec<i64> {
    particles
        .iter()
        .enumerate()
        .map(|(j, &p)| {
            if upper.get(j) == Some(&(p + 1)) {
                p + 1
            } else if j >= 1 && upper.get(j - 1) == Some(&(p + 1)) {
                p
            } else if r.jump(which, level, j) {
                p + 1
            } else {
                p
            }
        })
        .collect()
}

pub fn step_with_order<J: JumpSource>(c: &Configuration, r: &mut J, order: SweepOrder) -> Result<Configuration> {
    c.validate()?;
    let n = c.n;
    let len = n as usize + 1;
    let mut levels: Vec<Level> = (0..len)
        .map(|i| Level {
            k: i as u32 + 1,
            z: if i == 0 { Vec::new() } else { c.levels[i - 1].x.clone() },
            y: c.levels[i].y.clone(),
            x: c.levels[i].x.clone(),
        })
        .collect();
    let idx: Vec<usize> = match order {
        SweepOrder::Ascending => (0..len).collect(),
        SweepOrder::Descending => (0..len).rev().collect(),
    };
    for &i in &idx {
        let lv = &mut levels[i];
        lv.y = round(&lv.y, &lv.z, Round::Y, lv.k, r);
    }
    for &i in &idx {
        let lv = &mut levels[i];
        lv.x = round(&lv.x, &lv.y, Round::X, lv.k, r);
    }
    let k = n as i64 + 2;
    levels.push(Level {
        k: k as u32,
        z: c.levels[n as usize].x.clone(),
        y: staircase(2 * k - 1),
        x: staircase(2 * k),
    });
    let out = Configuration { n: n + 1, levels };
    out.validate().map_err(|e| Error::Interlacing(format!("step produced an invalid configuration: {e}")))?;
    Ok(out)
}

/// Run the chain `n` steps from the empty configuration.
pub fn sample_configuration<J: JumpSource>(n: u32, r: &mut J) -> Result<Configuration> {
    let mut c = initial_config();
    for _ in 0..n {
        c = step(&c, r)?;
    }
    Ok(c)
}

pub fn sample_tower(n: u32, alpha: &BigRational, beta: &BigRational, seed: u64) -> Result<Matching> {
    if n == 0 {
        return Err(Error::InvalidParameter("tower size must be at least 1".into()));
    }
    let g = build_tower(n, alpha, beta)?;
    let mut r = StepRandomness::new(seed, alpha, beta);
    let c = sample_configuration(n, &mut r)?;
    arrays_to_matching(&c, &g)
}
