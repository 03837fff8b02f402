//! Two-phase, cycle-based simulation of an [`EvalGraph`].
//!
//! Each step applies the inputs, evaluates every combinational cell once in
//! schedule order, samples the outputs, and only then clocks the flip-flops.
//! Outputs therefore reflect the inputs applied in the same cycle.
//!
//! The engine is generic over the [`Signal`] carried on each net: `bool` for
//! one stimulus at a time, or `u64` to simulate 64 independent stimulus runs
//! at once, one per bit lane.

use std::fmt::Debug;
use std::io::{self, Write};
use std::ops::{BitAnd, BitOr, BitXor, Not};

use thiserror::Error;

use crate::elaborate::{EvalGraph, LutId, Op};
use crate::stimuli::StimulusRun;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("expected {expected} input values, got {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("no LUT named `{0}`")]
    UnknownLut(String),
}

/// Value carried on a net.
pub trait Signal:
    Copy
    + Eq
    + Debug
    + Send
    + Sync
    + BitAnd<Output = Self>
    + BitOr<Output = Self>
    + BitXor<Output = Self>
    + Not<Output = Self>
{
    const LOW: Self;
    const HIGH: Self;

    /// Evaluates a truth table (entry `i` at bit `i` of `mask`) on `inputs`,
    /// `inputs[0]` being the least-significant select.
    fn lut(mask: u64, inputs: &[Self]) -> Self;

    fn from_bool(b: bool) -> Self {
        if b {
            Self::HIGH
        } else {
            Self::LOW
        }
    }
}

impl Signal for bool {
    const LOW: bool = false;
    const HIGH: bool = true;

    #[inline]
    fn lut(mask: u64, inputs: &[bool]) -> bool {
        let index = inputs
            .iter()
            .enumerate()
            .fold(0u32, |acc, (j, &b)| acc | ((b as u32) << j));
        (mask >> index) & 1 == 1
    }
}

impl Signal for u64 {
    const LOW: u64 = 0;
    const HIGH: u64 = u64::MAX;

    /// Shannon expansion, lowest select first: each level halves the table
    /// with one multiplexer per pair.
    #[inline]
    fn lut(mask: u64, inputs: &[u64]) -> u64 {
        let k = inputs.len();
        let mut level = [0u64; 32];
        let x0 = inputs[0];
        let pairs = 1usize << (k - 1);
        for (m, slot) in level.iter_mut().enumerate().take(pairs) {
            *slot = match (mask >> (2 * m)) & 0b11 {
                0b00 => 0,
                0b11 => u64::MAX,
                0b10 => x0,
                _ => !x0,
            };
        }
        let mut width = pairs;
        for &x in &inputs[1..] {
            width /= 2;
            for m in 0..width {
                let lo = level[2 * m];
                let hi = level[2 * m + 1];
                level[m] = lo ^ ((lo ^ hi) & x);
            }
        }
        level[0]
    }
}

/// Which LUT, if any, has its function complemented.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FaultOverlay {
    pub target: Option<LutId>,
}

impl FaultOverlay {
    pub const NONE: FaultOverlay = FaultOverlay { target: None };

    pub fn on(lut: LutId) -> Self {
        FaultOverlay { target: Some(lut) }
    }

    /// Overlay targeting the LUT cell named `id`.
    pub fn for_cell(g: &EvalGraph, id: &str) -> Result<Self, SimError> {
        g.lut_by_id(id)
            .map(FaultOverlay::on)
            .ok_or_else(|| SimError::UnknownLut(id.to_string()))
    }
}

/// Mutable per-worker simulation state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimState<S> {
    pub net_values: Vec<S>,
    pub reg_values: Vec<S>,
    pub cycle: u64,
}

impl<S: Signal> SimState<S> {
    /// Flip-flops at their init values, inputs low, combinational logic
    /// settled without any fault.
    pub fn reset(g: &EvalGraph) -> Self {
        let mut s = SimState {
            net_values: vec![S::LOW; g.num_slots()],
            reg_values: g.regs().iter().map(|r| S::from_bool(r.init)).collect(),
            cycle: 0,
        };
        s.load_regs(g);
        eval_comb(g, &mut s.net_values, FaultOverlay::NONE);
        s
    }

    fn load_regs(&mut self, g: &EvalGraph) {
        for (reg, &v) in g.regs().iter().zip(&self.reg_values) {
            self.net_values[reg.q as usize] = v;
        }
    }

    /// Re-initializes in place, reusing the allocations.
    pub fn reset_in_place(&mut self, g: &EvalGraph) {
        for (v, reg) in self.reg_values.iter_mut().zip(g.regs()) {
            *v = S::from_bool(reg.init);
        }
        self.cycle = 0;
    }

    /// One clock cycle. `outputs` receives the sampled primary outputs.
    pub fn step_into(
        &mut self,
        g: &EvalGraph,
        inputs: &[S],
        fault: FaultOverlay,
        outputs: &mut [S],
    ) -> Result<(), SimError> {
        if inputs.len() != g.num_inputs() {
            return Err(SimError::ArityMismatch {
                expected: g.num_inputs(),
                found: inputs.len(),
            });
        }
        debug_assert_eq!(outputs.len(), g.num_outputs());
        let nets = &mut self.net_values;
        for (&slot, &v) in g.input_slots().iter().zip(inputs) {
            nets[slot as usize] = v;
        }
        for &slot in g.held_low() {
            nets[slot as usize] = S::LOW;
        }
        for (reg, &v) in g.regs().iter().zip(&self.reg_values) {
            nets[reg.q as usize] = v;
        }
        eval_comb(g, nets, fault);
        for (o, &slot) in outputs.iter_mut().zip(g.output_slots()) {
            *o = nets[slot as usize];
        }
        for (reg, v) in g.regs().iter().zip(self.reg_values.iter_mut()) {
            let d = nets[reg.d as usize];
            let ce = nets[reg.ce as usize];
            let r = nets[reg.r as usize];
            *v = !r & ((ce & d) | (!ce & *v));
        }
        self.cycle += 1;
        Ok(())
    }

    pub fn step(&mut self, g: &EvalGraph, inputs: &[S], fault: FaultOverlay) -> Result<Vec<S>, SimError> {
        let mut out = vec![S::LOW; g.num_outputs()];
        self.step_into(g, inputs, fault, &mut out)?;
        Ok(out)
    }
}

#[inline]
fn eval_comb<S: Signal>(g: &EvalGraph, nets: &mut [S], fault: FaultOverlay) {
    let mut buf = [S::LOW; 6];
    for op in &g.ops {
        match *op {
            Op::Lut {
                mask,
                arity,
                ref inputs,
                out,
                lut,
            } => {
                let k = arity as usize;
                for j in 0..k {
                    buf[j] = nets[inputs[j] as usize];
                }
                let mut v = S::lut(mask, &buf[..k]);
                if fault.target == Some(lut) {
                    v = !v;
                }
                nets[out as usize] = v;
            }
            Op::Buf { input, out } => nets[out as usize] = nets[input as usize],
            Op::Not { input, out } => nets[out as usize] = !nets[input as usize],
            Op::Const { value, out } => nets[out as usize] = S::from_bool(value),
        }
    }
}

/// Sampled outputs, one row per cycle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub outputs: Vec<Vec<bool>>,
}

impl Trace {
    pub fn cycles(&self) -> usize {
        self.outputs.len()
    }

    /// CSV with header `cycle,<output names>` and 0/1 values.
    pub fn write_csv<W: Write>(&self, names: &[String], mut w: W) -> io::Result<()> {
        write!(w, "cycle")?;
        for n in names {
            write!(w, ",{n}")?;
        }
        writeln!(w)?;
        for (c, row) in self.outputs.iter().enumerate() {
            write!(w, "{c}")?;
            for &b in row {
                write!(w, ",{}", b as u8)?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Simulates one stimulus run from reset.
pub fn run(g: &EvalGraph, stim: &StimulusRun, fault: FaultOverlay) -> Result<Trace, SimError> {
    let mut state = SimState::<bool>::reset(g);
    let outputs = (0..stim.cycles())
        .map(|c| state.step(g, stim.row(c), fault))
        .collect::<Result<_, _>>()?;
    Ok(Trace { outputs })
}
