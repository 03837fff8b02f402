//! Levelization of a netlist into a static evaluation schedule.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use thiserror::Error;

use crate::netlist::{port_display_names, CellKind, Driver, NetId, Netlist};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ElabError {
    #[error("combinational loop through cells {}", .0.join(" -> "))]
    CombinationalLoop(Vec<String>),
    #[error("flip-flops are not driven by a single global clock: {0}")]
    MultiClock(String),
}

/// Ordinal of a LUT among the netlist's LUTs, in declaration order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LutId(pub u32);

/// One scheduled combinational evaluation. Operands are signal slots.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Op {
    Lut {
        mask: u64,
        arity: u8,
        inputs: [u32; 6],
        out: u32,
        lut: LutId,
    },
    Buf { input: u32, out: u32 },
    Not { input: u32, out: u32 },
    Const { value: bool, out: u32 },
}

/// A flip-flop as seen by the engine.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reg {
    pub cell: usize,
    pub d: u32,
    pub ce: u32,
    pub r: u32,
    pub q: u32,
    pub init: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LutInfo {
    pub cell: usize,
    pub id: String,
}

/// Evaluation schedule for one netlist.
///
/// Signal slots are net indices (`slot(net) == net.index()`), so the slot map
/// is the identity bijection onto `0..nets`. Combinational cells appear in
/// [`EvalGraph::order`] after every cell that drives one of their inputs;
/// module inputs and flip-flop outputs are the sources.
#[derive(Clone, Debug)]
pub struct EvalGraph {
    name: String,
    order: Vec<usize>,
    pub(crate) ops: Vec<Op>,
    regs: Vec<Reg>,
    num_slots: usize,
    input_slots: Vec<u32>,
    input_names: Vec<String>,
    output_slots: Vec<u32>,
    output_names: Vec<String>,
    /// Clock and reset inputs; held low during simulation.
    held_low: Vec<u32>,
    luts: Vec<LutInfo>,
    lut_by_cell: HashMap<usize, LutId>,
}

/// Builds the evaluation schedule. Ties between ready cells are broken by
/// declaration order, so the result is a pure function of the netlist.
pub fn elaborate(n: &Netlist) -> Result<EvalGraph, ElabError> {
    let drivers = n.drivers();
    check_clocking(n, &drivers)?;

    let comb: Vec<usize> = (0..n.cells.len())
        .filter(|&c| !n.cells[c].kind.is_sequential())
        .collect();

    // Edges driver cell -> consumer cell over combinational cells only.
    let mut fanout: Vec<Vec<usize>> = vec![Vec::new(); n.cells.len()];
    let mut indegree = vec![0usize; n.cells.len()];
    for &c in &comb {
        let cell = &n.cells[c];
        for pin in cell.kind.input_pins() {
            let Some(net) = cell.pin(pin) else { continue };
            if let Driver::Cell(src) = drivers[net.index()] {
                if !n.cells[src].kind.is_sequential() {
                    fanout[src].push(c);
                    indegree[c] += 1;
                }
            }
        }
    }

    let mut ready: BinaryHeap<Reverse<usize>> = comb
        .iter()
        .copied()
        .filter(|&c| indegree[c] == 0)
        .map(Reverse)
        .collect();
    let mut order = Vec::with_capacity(comb.len());
    while let Some(Reverse(c)) = ready.pop() {
        order.push(c);
        for &succ in &fanout[c] {
            indegree[succ] -= 1;
            if indegree[succ] == 0 {
                ready.push(Reverse(succ));
            }
        }
    }
    if order.len() != comb.len() {
        let cycle = find_cycle(n, &drivers, &indegree);
        return Err(ElabError::CombinationalLoop(
            cycle.into_iter().map(|c| n.cells[c].id.clone()).collect(),
        ));
    }

    let mut luts = Vec::new();
    let mut lut_by_cell = HashMap::new();
    for (i, cell) in n.cells.iter().enumerate() {
        if cell.kind.is_lut() {
            lut_by_cell.insert(i, LutId(luts.len() as u32));
            luts.push(LutInfo {
                cell: i,
                id: cell.id.clone(),
            });
        }
    }

    let slot = |net: NetId| net.0;
    let ops = order
        .iter()
        .map(|&c| {
            let cell = &n.cells[c];
            let out = slot(cell.output());
            match cell.kind {
                CellKind::Lut(k) => {
                    let mut inputs = [0u32; 6];
                    for (j, pin) in cell.kind.input_pins().iter().enumerate() {
                        inputs[j] = slot(cell.pins[*pin]);
                    }
                    Op::Lut {
                        mask: cell.init.expect("validated LUT").as_u64(),
                        arity: k,
                        inputs,
                        out,
                        lut: lut_by_cell[&c],
                    }
                }
                CellKind::Buf => Op::Buf {
                    input: slot(cell.pins["I"]),
                    out,
                },
                CellKind::Not => Op::Not {
                    input: slot(cell.pins["I"]),
                    out,
                },
                CellKind::Const0 => Op::Const { value: false, out },
                CellKind::Const1 => Op::Const { value: true, out },
                CellKind::Dff => unreachable!("sequential cell in combinational order"),
            }
        })
        .collect();

    let regs = n
        .cells
        .iter()
        .enumerate()
        .filter(|(_, c)| c.kind.is_sequential())
        .map(|(i, c)| Reg {
            cell: i,
            d: slot(c.pins["D"]),
            ce: slot(c.pins["CE"]),
            r: slot(c.pins["R"]),
            q: slot(c.pins["Q"]),
            init: c.ff_init,
        })
        .collect();

    let held: Vec<NetId> = [n.clock, n.reset].into_iter().flatten().collect();
    let data_inputs: Vec<_> = n.inputs.iter().filter(|p| !held.contains(&p.net)).cloned().collect();

    Ok(EvalGraph {
        name: n.name.clone(),
        order,
        ops,
        regs,
        num_slots: n.nets.len(),
        input_slots: data_inputs.iter().map(|p| slot(p.net)).collect(),
        input_names: port_display_names(&data_inputs),
        output_slots: n.outputs.iter().map(|p| slot(p.net)).collect(),
        output_names: n.output_names(),
        held_low: held.into_iter().map(slot).collect(),
        luts,
        lut_by_cell,
    })
}

/// Returns one cycle among the cells Kahn's algorithm could not schedule,
/// starting from its lowest-indexed cell and following signal flow.
fn find_cycle(n: &Netlist, drivers: &[Driver], indegree: &[usize]) -> Vec<usize> {
    let stuck = |c: usize| indegree[c] > 0;
    let pred = |c: usize| -> usize {
        let cell = &n.cells[c];
        cell.kind
            .input_pins()
            .iter()
            .filter_map(|p| cell.pin(p))
            .find_map(|net| match drivers[net.index()] {
                Driver::Cell(src) if !n.cells[src].kind.is_sequential() && stuck(src) => Some(src),
                _ => None,
            })
            .expect("unscheduled cell has an unscheduled predecessor")
    };
    let start = (0..n.cells.len()).find(|&c| stuck(c)).expect("a cycle exists");
    let mut seen = HashMap::new();
    let mut walk = Vec::new();
    let mut c = start;
    while !seen.contains_key(&c) {
        seen.insert(c, walk.len());
        walk.push(c);
        c = pred(c);
    }
    let mut cycle: Vec<usize> = walk[seen[&c]..].to_vec();
    cycle.reverse();
    let min_pos = cycle.iter().enumerate().min_by_key(|(_, &c)| c).map(|(i, _)| i).unwrap();
    cycle.rotate_left(min_pos);
    cycle
}

fn check_clocking(n: &Netlist, drivers: &[Driver]) -> Result<(), ElabError> {
    let mut root: Option<NetId> = n.clock;
    for cell in n.cells.iter().filter(|c| c.kind.is_sequential()) {
        let Some(c) = cell.pin("C") else { continue };
        let r = crate::netlist::verilog_buffer_root(n, drivers, c);
        if !matches!(drivers[r.index()], Driver::Input(_)) {
            return Err(ElabError::MultiClock(format!(
                "clock of `{}` is derived from logic (net `{}`)",
                cell.id,
                n.net_name(r)
            )));
        }
        match root {
            Some(x) if x != r => {
                return Err(ElabError::MultiClock(format!(
                    "`{}` is clocked by `{}`, expected `{}`",
                    cell.id,
                    n.net_name(r),
                    n.net_name(x)
                )))
            }
            _ => root = Some(r),
        }
    }
    Ok(())
}

impl EvalGraph {
    pub fn name(&self) -> &str {
        &self.name
    }

    /// Combinational cells (netlist indices) in evaluation order.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn regs(&self) -> &[Reg] {
        &self.regs
    }

    pub fn num_slots(&self) -> usize {
        self.num_slots
    }

    pub fn net_slot(&self, net: NetId) -> usize {
        net.index()
    }

    pub fn input_slots(&self) -> &[u32] {
        &self.input_slots
    }

    pub fn output_slots(&self) -> &[u32] {
        &self.output_slots
    }

    pub(crate) fn held_low(&self) -> &[u32] {
        &self.held_low
    }

    pub fn num_inputs(&self) -> usize {
        self.input_slots.len()
    }

    pub fn num_outputs(&self) -> usize {
        self.output_slots.len()
    }

    /// Names of the stimulus inputs (clock and reset excluded).
    pub fn input_names(&self) -> &[String] {
        &self.input_names
    }

    pub fn output_names(&self) -> &[String] {
        &self.output_names
    }

    pub fn luts(&self) -> &[LutInfo] {
        &self.luts
    }

    pub fn lut_for_cell(&self, cell: usize) -> Option<LutId> {
        self.lut_by_cell.get(&cell).copied()
    }

    pub fn lut_by_id(&self, id: &str) -> Option<LutId> {
        self.luts
            .iter()
            .position(|l| l.id == id)
            .map(|i| LutId(i as u32))
    }
}
