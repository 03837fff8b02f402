//! Event-driven reference simulator.
//!
//! Works directly on the [`Netlist`] without a precomputed schedule: after
//! the inputs and register outputs change, affected cells are re-evaluated
//! from a work queue until no net changes. It shares no evaluation code with
//! the scheduled engine in [`crate::sim`] and serves as its oracle and as the
//! performance baseline.

use std::collections::VecDeque;

use crate::campaign::ErrorMatrix;
use crate::faults::FaultUniverse;
use crate::netlist::{CellKind, NetId, Netlist};
use crate::stimuli::StimulusSet;

pub struct EventSim<'a> {
    n: &'a Netlist,
    fanout: Vec<Vec<usize>>,
    cell_inputs: Vec<Vec<NetId>>,
    values: Vec<bool>,
    regs: Vec<(usize, bool)>,
    data_inputs: Vec<NetId>,
    held: Vec<NetId>,
    fault: Option<usize>,
    queue: VecDeque<usize>,
    queued: Vec<bool>,
    settled_once: bool,
}

impl<'a> EventSim<'a> {
    /// `fault` names a LUT whose output is complemented.
    pub fn new(n: &'a Netlist, fault: Option<&str>) -> Self {
        let mut fanout = vec![Vec::new(); n.nets.len()];
        for (i, cell) in n.cells.iter().enumerate() {
            if cell.kind == CellKind::Dff {
                continue;
            }
            for pin in cell.kind.input_pins() {
                if let Some(net) = cell.pin(pin) {
                    fanout[net.index()].push(i);
                }
            }
        }
        let cell_inputs = n
            .cells
            .iter()
            .map(|c| c.kind.input_pins().iter().filter_map(|p| c.pin(p)).collect())
            .collect();
        let held: Vec<NetId> = [n.clock, n.reset].into_iter().flatten().collect();
        let data_inputs = n
            .inputs
            .iter()
            .map(|p| p.net)
            .filter(|net| !held.contains(net))
            .collect();
        let regs = n
            .cells
            .iter()
            .enumerate()
            .filter(|(_, c)| c.kind == CellKind::Dff)
            .map(|(i, c)| (i, c.ff_init))
            .collect();
        let fault = fault.map(|id| n.cell_by_id(id).expect("fault target exists"));
        EventSim {
            n,
            fanout,
            cell_inputs,
            values: vec![false; n.nets.len()],
            regs,
            data_inputs,
            held,
            fault,
            queue: VecDeque::new(),
            queued: vec![false; n.cells.len()],
            settled_once: false,
        }
    }

    pub fn num_inputs(&self) -> usize {
        self.data_inputs.len()
    }

    fn drive(&mut self, net: NetId, v: bool) {
        if self.values[net.index()] != v {
            self.values[net.index()] = v;
            for k in 0..self.fanout[net.index()].len() {
                let c = self.fanout[net.index()][k];
                if !self.queued[c] {
                    self.queued[c] = true;
                    self.queue.push_back(c);
                }
            }
        }
    }

    fn evaluate(&self, cell: usize) -> bool {
        let c = &self.n.cells[cell];
        let ins = &self.cell_inputs[cell];
        let v = |j: usize| self.values[ins[j].index()];
        let out = match c.kind {
            CellKind::Lut(k) => {
                let mask = c.init.expect("LUT mask");
                let mut inputs = [false; 6];
                for (j, slot) in inputs.iter_mut().enumerate().take(k as usize) {
                    *slot = v(j);
                }
                mask.eval(&inputs[..k as usize])
            }
            CellKind::Buf => v(0),
            CellKind::Not => !v(0),
            CellKind::Const0 => false,
            CellKind::Const1 => true,
            CellKind::Dff => unreachable!(),
        };
        if self.fault == Some(cell) {
            !out
        } else {
            out
        }
    }

    fn settle(&mut self) {
        if !self.settled_once {
            self.settled_once = true;
            for (i, c) in self.n.cells.iter().enumerate() {
                if c.kind != CellKind::Dff && !self.queued[i] {
                    self.queued[i] = true;
                    self.queue.push_back(i);
                }
            }
        }
        let limit = 64 * (self.n.cells.len() + 1) * (self.n.nets.len() + 1);
        let mut evaluations = 0usize;
        while let Some(c) = self.queue.pop_front() {
            self.queued[c] = false;
            evaluations += 1;
            assert!(evaluations <= limit, "netlist does not settle");
            let out = self.evaluate(c);
            self.drive(self.n.cells[c].output(), out);
        }
    }

    /// One cycle: settle with `inputs`, sample outputs, clock the registers.
    pub fn step(&mut self, inputs: &[bool]) -> Vec<bool> {
        assert_eq!(inputs.len(), self.data_inputs.len());
        for j in 0..inputs.len() {
            self.drive(self.data_inputs[j], inputs[j]);
        }
        for j in 0..self.held.len() {
            self.drive(self.held[j], false);
        }
        for k in 0..self.regs.len() {
            let (cell, v) = self.regs[k];
            self.drive(self.n.cells[cell].pins["Q"], v);
        }
        self.settle();
        let outputs = self.n.outputs.iter().map(|p| self.values[p.net.index()]).collect();
        for (cell, q) in self.regs.iter_mut() {
            let c = &self.n.cells[*cell];
            let val = |pin: &str| self.values[c.pins[pin].index()];
            *q = if val("R") {
                false
            } else if val("CE") {
                val("D")
            } else {
                *q
            };
        }
        outputs
    }

    /// Runs one stimulus matrix from power-up.
    pub fn trace(n: &Netlist, fault: Option<&str>, stim: &StimulusSet, run: usize) -> Vec<Vec<bool>> {
        let mut sim = EventSim::new(n, fault);
        let mut row = vec![false; stim.inputs()];
        (0..stim.cycles())
            .map(|c| {
                for (j, b) in row.iter_mut().enumerate() {
                    *b = stim.bit(run, c, j);
                }
                sim.step(&row)
            })
            .collect()
    }
}

/// The full fault campaign, one run and one fault at a time, on the
/// event-driven simulator.
pub fn reference_campaign(n: &Netlist, faults: &FaultUniverse, stim: &StimulusSet) -> ErrorMatrix {
    let outputs = n.output_names();
    let mut m = ErrorMatrix::zeroed(
        faults.iter().map(|f| f.label.clone()).collect(),
        outputs,
        stim.cycles(),
        stim.len() as u64,
    );
    for r in 0..stim.len() {
        let golden = EventSim::trace(n, None, stim, r);
        for (fi, f) in faults.iter().enumerate() {
            let faulty = EventSim::trace(n, Some(&f.label), stim, r);
            for b in 0..m.outputs.len() {
                let mut any = false;
                for c in 0..stim.cycles() {
                    if golden[c][b] != faulty[c][b] {
                        *m.count_mut(fi, b, c) += 1;
                        any = true;
                    }
                }
                if any {
                    *m.any_error_mut(fi, b) += 1;
                }
            }
        }
    }
    m
}
