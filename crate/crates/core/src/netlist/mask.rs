use std::fmt;

/// Truth table of a k-input LUT (1 <= k <= 6).
///
/// Entry `i` is the output for the input assignment whose unsigned value,
/// read with `I0` as the least-significant bit, equals `i`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct InitMask {
    inputs: u8,
    bits: u64,
}

impl InitMask {
    /// Builds a mask from the low `2^inputs` bits of `bits`; higher bits are
    /// discarded.
    pub fn from_u64(inputs: usize, bits: u64) -> InitMask {
        assert!((1..=6).contains(&inputs), "LUT width {inputs} out of range");
        InitMask {
            inputs: inputs as u8,
            bits: bits & Self::full(inputs),
        }
    }

    /// Builds a mask from explicit entries; the length must be `2^k` for some
    /// k in 1..=6.
    pub fn from_bits(entries: &[bool]) -> Option<InitMask> {
        let len = entries.len();
        if !len.is_power_of_two() || !(2..=64).contains(&len) {
            return None;
        }
        let bits = entries
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &b)| acc | ((b as u64) << i));
        Some(InitMask {
            inputs: len.trailing_zeros() as u8,
            bits,
        })
    }

    fn full(inputs: usize) -> u64 {
        if inputs == 6 {
            u64::MAX
        } else {
            (1u64 << (1 << inputs)) - 1
        }
    }

    pub fn inputs(&self) -> usize {
        self.inputs as usize
    }

    /// Number of truth-table entries, `2^k`.
    pub fn len(&self) -> usize {
        1 << self.inputs
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn as_u64(&self) -> u64 {
        self.bits
    }

    pub fn entry(&self, index: usize) -> bool {
        assert!(index < self.len());
        (self.bits >> index) & 1 == 1
    }

    pub fn entries(&self) -> Vec<bool> {
        (0..self.len()).map(|i| self.entry(i)).collect()
    }

    /// Output for the given input values (`inputs[0]` is `I0`).
    pub fn eval(&self, inputs: &[bool]) -> bool {
        debug_assert_eq!(inputs.len(), self.inputs());
        let index = inputs
            .iter()
            .enumerate()
            .fold(0usize, |acc, (j, &b)| acc | ((b as usize) << j));
        self.entry(index)
    }

    /// The mask computing the complemented function.
    pub fn complement(&self) -> InitMask {
        InitMask {
            inputs: self.inputs,
            bits: !self.bits & Self::full(self.inputs()),
        }
    }

    /// Hex digits, most-significant first, exactly `ceil(2^k / 4)` of them.
    pub fn to_hex(&self) -> String {
        let digits = self.len().div_ceil(4);
        format!("{:0width$X}", self.bits, width = digits)
    }
}

impl fmt::Debug for InitMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}'h{}", self.len(), self.to_hex())
    }
}
