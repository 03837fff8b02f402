//! Random synthetic netlists for tests and benchmarks.
//!
//! Generated circuits are valid and loop-free by construction: every LUT
//! reads only module inputs, flip-flop outputs and earlier LUTs. Cell
//! declaration order is shuffled so consumers do not rely on it.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::netlist::{CellKind, InitMask, Netlist, NetlistBuilder};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SynthParams {
    pub inputs: usize,
    pub outputs: usize,
    pub luts: usize,
    pub dffs: usize,
    /// Largest LUT arity, 1..=6.
    pub max_arity: usize,
    /// Probability (percent) that a flip-flop gets a logic-driven enable or
    /// reset instead of a constant.
    pub control_percent: u32,
    /// Number of BUF/NOT cells inserted on LUT outputs.
    pub buffers: usize,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            inputs: 4,
            outputs: 2,
            luts: 8,
            dffs: 4,
            max_arity: 4,
            control_percent: 25,
            buffers: 1,
        }
    }
}

/// Builds a random circuit. The same `(params, seed)` always gives the same
/// netlist.
pub fn random_netlist(params: &SynthParams, seed: u64) -> Netlist {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let mut b = NetlistBuilder::new(format!("synth_{seed}"));
    b.input("clk", 0, "clk");
    b.set_clock("clk");
    for i in 0..params.inputs {
        b.input("in", i as u32, &format!("in[{i}]"));
    }

    let mut sources: Vec<String> = (0..params.inputs).map(|i| format!("in[{i}]")).collect();
    sources.extend((0..params.dffs).map(|i| format!("q{i}")));
    let mut cells: Vec<Box<dyn FnOnce(&mut NetlistBuilder)>> = Vec::new();
    let mut signals = sources.clone();
    if signals.is_empty() {
        signals.push("$c0".into());
        cells.push(Box::new(|b| {
            b.simple("const_src", CellKind::Const0, None, "$c0");
        }));
    }

    let mut lut_outputs = Vec::with_capacity(params.luts);
    for l in 0..params.luts {
        let arity = rng.gen_range(1..=params.max_arity.clamp(1, 6));
        // Bias half the picks towards recent signals to build depth.
        let ins: Vec<String> = (0..arity)
            .map(|_| {
                let len = signals.len();
                let idx = if rng.gen_bool(0.5) {
                    len - 1 - rng.gen_range(0..len.min(8))
                } else {
                    rng.gen_range(0..len)
                };
                signals[idx].clone()
            })
            .collect();
        let mask = InitMask::from_u64(arity, rng.gen());
        let out = format!("n{l}");
        let id = format!("lut{l}");
        let o = out.clone();
        cells.push(Box::new(move |b| {
            let refs: Vec<&str> = ins.iter().map(String::as_str).collect();
            b.lut(&id, mask, &refs, &o);
        }));
        signals.push(out.clone());
        lut_outputs.push(out);
    }

    for k in 0..params.buffers.min(lut_outputs.len()) {
        let src = lut_outputs[rng.gen_range(0..lut_outputs.len())].clone();
        let out = format!("buf{k}");
        let kind = if rng.gen_bool(0.5) { CellKind::Buf } else { CellKind::Not };
        let o = out.clone();
        cells.push(Box::new(move |b| {
            b.simple(&format!("b{k}"), kind, Some(&src), &o);
        }));
        signals.push(out);
    }

    let needs_consts = params.dffs > 0;
    if needs_consts {
        cells.push(Box::new(|b| {
            b.simple("vcc", CellKind::Const1, None, "$one");
        }));
        cells.push(Box::new(|b| {
            b.simple("gnd", CellKind::Const0, None, "$zero");
        }));
    }
    for d in 0..params.dffs {
        let pick = |rng: &mut Xoshiro256PlusPlus| signals[rng.gen_range(0..signals.len())].clone();
        let data = pick(&mut rng);
        let ce = if rng.gen_ratio(params.control_percent, 100) {
            pick(&mut rng)
        } else {
            "$one".to_string()
        };
        let r = if rng.gen_ratio(params.control_percent, 100) {
            pick(&mut rng)
        } else {
            "$zero".to_string()
        };
        let init = rng.gen_bool(0.25);
        cells.push(Box::new(move |b| {
            b.dff(&format!("ff{d}"), &data, &ce, &r, &format!("q{d}"), init);
        }));
    }

    cells.shuffle(&mut rng);
    for add in cells {
        add(&mut b);
    }

    // Prefer late LUTs (deep logic) and registers as observation points.
    let mut candidates: Vec<String> = lut_outputs.iter().rev().take(params.outputs * 2).cloned().collect();
    candidates.extend((0..params.dffs).map(|i| format!("q{i}")));
    if candidates.is_empty() {
        candidates = signals.clone();
    }
    for o in 0..params.outputs {
        let net = candidates[rng.gen_range(0..candidates.len())].clone();
        let port = format!("out[{o}]");
        b.simple(&format!("obuf{o}"), CellKind::Buf, Some(&net), &port);
        b.output("out", o as u32, &port);
    }

    let mut n = b.build().expect("generated netlist is valid");
    // DFF clock pins tie to the clock port.
    let clk = n.net_by_name("clk").unwrap();
    for c in n.cells.iter_mut().filter(|c| c.kind == CellKind::Dff) {
        c.pins.insert("C".into(), clk);
    }
    n
}
