//! Stimulus generation: exhaustive enumeration or seeded pseudo-random bits.
//!
//! A run is a `cycles x inputs` bit matrix. Flattened positions are numbered
//! cycle-major, input 0 first, which is also the order of the text format
//! (`10;01;11` is 2 inputs over 3 cycles).
//!
//! Pseudo-random runs come from xoshiro256++ seeded through splitmix64; the
//! generator's 64-bit outputs are consumed most-significant bit first, run by
//! run, cycle by cycle, input by input.

use rand::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use thiserror::Error;

/// Largest `inputs x cycles` product accepted by [`exhaustive`].
pub const EXHAUSTIVE_LIMIT_BITS: usize = 24;

pub const RANDOM_ALGORITHM: &str = "xoshiro256++/splitmix64/msb-first";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StimulusError {
    #[error("exhaustive enumeration needs 2^{bits} runs (limit 2^{EXHAUSTIVE_LIMIT_BITS})")]
    TooLarge { bits: usize },
    #[error("stimulus line {line}: {reason}")]
    Format { line: usize, reason: String },
    #[error("at least one cycle and one run are required")]
    Empty,
}

/// One stimulus run: the input vector applied at each cycle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StimulusRun {
    cycles: usize,
    inputs: usize,
    bits: Vec<bool>,
}

impl StimulusRun {
    /// `bits` is row-major, `cycles * inputs` long.
    pub fn new(cycles: usize, inputs: usize, bits: Vec<bool>) -> Self {
        assert_eq!(bits.len(), cycles * inputs, "stimulus matrix size");
        StimulusRun { cycles, inputs, bits }
    }

    pub fn cycles(&self) -> usize {
        self.cycles
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn row(&self, cycle: usize) -> &[bool] {
        &self.bits[cycle * self.inputs..(cycle + 1) * self.inputs]
    }

    pub fn bit(&self, cycle: usize, input: usize) -> bool {
        self.row(cycle)[input]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Provenance {
    Exhaustive { hold: bool },
    Random { seed: u64, algorithm: String, hold: bool },
    File,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Storage {
    /// Run `r` is the big-endian binary expansion of `r`.
    Enumerated,
    /// Bits packed per run, `words_per_run` words each, LSB of word 0 first.
    Packed { words_per_run: usize, data: Vec<u64> },
}

/// An ordered collection of runs sharing dimensions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StimulusSet {
    inputs: usize,
    cycles: usize,
    runs: usize,
    hold: bool,
    storage: Storage,
    provenance: Provenance,
}

/// Every `inputs x cycles` bit matrix, in lexicographic order of the
/// flattened bit string. With `hold`, every input vector is held constant
/// across all cycles, giving `2^inputs` runs.
pub fn exhaustive(inputs: usize, cycles: usize, hold: bool) -> Result<StimulusSet, StimulusError> {
    if cycles == 0 {
        return Err(StimulusError::Empty);
    }
    let bits = if hold { inputs } else { inputs * cycles };
    if bits > EXHAUSTIVE_LIMIT_BITS {
        return Err(StimulusError::TooLarge { bits });
    }
    Ok(StimulusSet {
        inputs,
        cycles,
        runs: 1 << bits,
        hold,
        storage: Storage::Enumerated,
        provenance: Provenance::Exhaustive { hold },
    })
}

/// `runs` independent uniform bit matrices; identical arguments give an
/// identical set on every platform.
pub fn pseudo_random(inputs: usize, cycles: usize, runs: usize, seed: u64, hold: bool) -> Result<StimulusSet, StimulusError> {
    if cycles == 0 || runs == 0 {
        return Err(StimulusError::Empty);
    }
    let per_run = if hold { inputs } else { inputs * cycles };
    let words_per_run = per_run.div_ceil(64);
    let mut data = vec![0u64; words_per_run * runs];
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let mut word = 0u64;
    let mut left = 0u32;
    for r in 0..runs {
        for p in 0..per_run {
            if left == 0 {
                word = rng.next_u64();
                left = 64;
            }
            left -= 1;
            if (word >> left) & 1 == 1 {
                data[r * words_per_run + p / 64] |= 1 << (p % 64);
            }
        }
    }
    Ok(StimulusSet {
        inputs,
        cycles,
        runs,
        hold,
        storage: Storage::Packed { words_per_run, data },
        provenance: Provenance::Random {
            seed,
            algorithm: RANDOM_ALGORITHM.to_string(),
            hold,
        },
    })
}

impl StimulusSet {
    /// Builds a set from explicit runs, which must share dimensions.
    pub fn from_runs(runs: &[StimulusRun]) -> Result<StimulusSet, StimulusError> {
        let first = runs.first().ok_or(StimulusError::Empty)?;
        let (inputs, cycles) = (first.inputs, first.cycles);
        if cycles == 0 {
            return Err(StimulusError::Empty);
        }
        let per_run = inputs * cycles;
        let words_per_run = per_run.div_ceil(64);
        let mut data = vec![0u64; words_per_run * runs.len()];
        for (r, run) in runs.iter().enumerate() {
            if run.inputs != inputs || run.cycles != cycles {
                return Err(StimulusError::Format {
                    line: r + 1,
                    reason: format!(
                        "run is {}x{}, expected {cycles}x{inputs}",
                        run.cycles, run.inputs
                    ),
                });
            }
            for (p, &b) in run.bits.iter().enumerate() {
                if b {
                    data[r * words_per_run + p / 64] |= 1 << (p % 64);
                }
            }
        }
        Ok(StimulusSet {
            inputs,
            cycles,
            runs: runs.len(),
            hold: false,
            storage: Storage::Packed { words_per_run, data },
            provenance: Provenance::File,
        })
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn cycles(&self) -> usize {
        self.cycles
    }

    pub fn len(&self) -> usize {
        self.runs
    }

    pub fn is_empty(&self) -> bool {
        self.runs == 0
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Value of `input` at `cycle` in run `run`.
    #[inline]
    pub fn bit(&self, run: usize, cycle: usize, input: usize) -> bool {
        debug_assert!(run < self.runs && cycle < self.cycles && input < self.inputs);
        let (pos, width) = if self.hold {
            (input, self.inputs)
        } else {
            (cycle * self.inputs + input, self.inputs * self.cycles)
        };
        match &self.storage {
            Storage::Enumerated => (run >> (width - 1 - pos)) & 1 == 1,
            Storage::Packed { words_per_run, data } => {
                (data[run * words_per_run + pos / 64] >> (pos % 64)) & 1 == 1
            }
        }
    }

    pub fn run(&self, run: usize) -> StimulusRun {
        let bits = (0..self.cycles)
            .flat_map(|c| (0..self.inputs).map(move |j| (c, j)))
            .map(|(c, j)| self.bit(run, c, j))
            .collect();
        StimulusRun::new(self.cycles, self.inputs, bits)
    }

    pub fn runs(&self) -> impl Iterator<Item = StimulusRun> + '_ {
        (0..self.runs).map(|r| self.run(r))
    }

    /// Input words for 64 consecutive runs starting at `first_run`: bit `l`
    /// of `out[j]` is input `j` of run `first_run + l` at `cycle`. Lanes past
    /// the end of the set are zero.
    pub fn pack_lanes(&self, first_run: usize, cycle: usize, out: &mut [u64]) {
        debug_assert_eq!(out.len(), self.inputs);
        out.fill(0);
        let lanes = (self.runs - first_run).min(64);
        for lane in 0..lanes {
            for (j, word) in out.iter_mut().enumerate() {
                if self.bit(first_run + lane, cycle, j) {
                    *word |= 1 << lane;
                }
            }
        }
    }

    /// Text form, one run per line.
    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(self.runs * self.cycles * (self.inputs + 1));
        for r in 0..self.runs {
            for c in 0..self.cycles {
                if c > 0 {
                    s.push(';');
                }
                for j in 0..self.inputs {
                    s.push(if self.bit(r, c, j) { '1' } else { '0' });
                }
            }
            s.push('\n');
        }
        s
    }

    /// Parses the text form. Blank lines and lines starting with `#` are
    /// skipped.
    pub fn from_text(text: &str) -> Result<StimulusSet, StimulusError> {
        let mut runs = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let rows: Vec<&str> = line.split(';').collect();
            let inputs = rows[0].len();
            let mut bits = Vec::with_capacity(rows.len() * inputs);
            for row in &rows {
                if row.len() != inputs {
                    return Err(StimulusError::Format {
                        line: i + 1,
                        reason: "cycles have different widths".into(),
                    });
                }
                for ch in row.chars() {
                    bits.push(match ch {
                        '0' => false,
                        '1' => true,
                        other => {
                            return Err(StimulusError::Format {
                                line: i + 1,
                                reason: format!("unexpected character `{other}`"),
                            })
                        }
                    });
                }
            }
            runs.push(StimulusRun::new(rows.len(), inputs, bits));
        }
        StimulusSet::from_runs(&runs)
    }
}
