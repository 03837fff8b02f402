//! Fault-injection campaigns.
//!
//! Simulation is bit-parallel: each `u64` signal carries 64 stimulus runs,
//! one per lane. Golden outputs are computed once per block of 64 runs and
//! reused for every fault. Work is split across faults (and across blocks
//! within a fault); every fault row is produced by exactly one task and
//! block partials are summed, so the result does not depend on scheduling.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::elaborate::{EvalGraph, LutId};
use crate::faults::FaultUniverse;
use crate::metrics::Weights;
use crate::sim::{FaultOverlay, SimState, Trace};
use crate::stimuli::StimulusSet;

/// Environment variable that overrides [`CampaignConfig::threads`].
pub const THREADS_ENV: &str = "SEUSIM_THREADS";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CampaignError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("fault target `{0}` is not a LUT of the elaborated graph")]
    UnknownFault(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Threads {
    #[default]
    Auto,
    Fixed(usize),
}

impl Threads {
    /// Worker count after applying `SEUSIM_THREADS`.
    pub fn resolve(self) -> Result<usize, CampaignError> {
        let requested = match std::env::var(THREADS_ENV) {
            Ok(v) if !v.trim().is_empty() => match v.trim() {
                "auto" => Threads::Auto,
                n => Threads::Fixed(
                    n.parse()
                        .map_err(|_| CampaignError::Config(format!("{THREADS_ENV}={v} is not a thread count")))?,
                ),
            },
            _ => self,
        };
        match requested {
            Threads::Auto => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
            Threads::Fixed(0) => Err(CampaignError::Config("thread count must be at least 1".into())),
            Threads::Fixed(n) => Ok(n),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CampaignConfig {
    pub cycles: usize,
    /// Checked against the graph outputs when present; scoring happens later.
    pub weights: Option<Weights>,
    pub threads: Threads,
}

impl CampaignConfig {
    pub fn new(cycles: usize) -> Self {
        CampaignConfig {
            cycles,
            weights: None,
            threads: Threads::Auto,
        }
    }
}

/// Mismatch counters of a campaign.
///
/// `counts` is indexed `[fault][output][cycle]`, `any_error` is
/// `[fault][output]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ErrorMatrix {
    pub runs: u64,
    pub cycles: usize,
    pub faults: Vec<String>,
    pub outputs: Vec<String>,
    counts: Vec<u64>,
    any_error: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixJson {
    runs: u64,
    cycles: usize,
    faults: Vec<String>,
    outputs: Vec<String>,
    counts: Vec<Vec<Vec<u64>>>,
    any_error: Vec<Vec<u64>>,
}

impl ErrorMatrix {
    pub fn zeroed(faults: Vec<String>, outputs: Vec<String>, cycles: usize, runs: u64) -> Self {
        let (nf, nb) = (faults.len(), outputs.len());
        ErrorMatrix {
            runs,
            cycles,
            counts: vec![0; nf * nb * cycles],
            any_error: vec![0; nf * nb],
            faults,
            outputs,
        }
    }

    pub fn num_faults(&self) -> usize {
        self.faults.len()
    }

    pub fn num_outputs(&self) -> usize {
        self.outputs.len()
    }

    #[inline]
    fn index(&self, f: usize, b: usize, c: usize) -> usize {
        (f * self.outputs.len() + b) * self.cycles + c
    }

    pub fn count(&self, f: usize, b: usize, c: usize) -> u64 {
        self.counts[self.index(f, b, c)]
    }

    pub fn count_mut(&mut self, f: usize, b: usize, c: usize) -> &mut u64 {
        let i = self.index(f, b, c);
        &mut self.counts[i]
    }

    pub fn any_error(&self, f: usize, b: usize) -> u64 {
        self.any_error[f * self.outputs.len() + b]
    }

    pub fn any_error_mut(&mut self, f: usize, b: usize) -> &mut u64 {
        let nb = self.outputs.len();
        &mut self.any_error[f * nb + b]
    }

    /// Per-cycle counters of one `(fault, output)` cell.
    pub fn cycle_counts(&self, f: usize, b: usize) -> &[u64] {
        let i = self.index(f, b, 0);
        &self.counts[i..i + self.cycles]
    }

    /// Checks counter bounds and `any_error >= max_c counts`.
    pub fn check_invariants(&self) -> Result<(), String> {
        for f in 0..self.num_faults() {
            for b in 0..self.num_outputs() {
                let any = self.any_error(f, b);
                let max = self.cycle_counts(f, b).iter().copied().max().unwrap_or(0);
                if any > self.runs || max > any {
                    return Err(format!(
                        "{}/{}: any_error {any}, per-cycle max {max}, runs {}",
                        self.faults[f], self.outputs[b], self.runs
                    ));
                }
            }
        }
        Ok(())
    }

    /// Adds another matrix with identical labels, as if its runs had been
    /// appended to this campaign.
    pub fn merge(&mut self, other: &ErrorMatrix) -> Result<(), CampaignError> {
        if self.faults != other.faults || self.outputs != other.outputs || self.cycles != other.cycles {
            return Err(CampaignError::DimensionMismatch("merged matrices differ in shape".into()));
        }
        self.runs += other.runs;
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        for (a, b) in self.any_error.iter_mut().zip(&other.any_error) {
            *a += b;
        }
        Ok(())
    }

    fn to_wire(&self) -> MatrixJson {
        MatrixJson {
            runs: self.runs,
            cycles: self.cycles,
            faults: self.faults.clone(),
            outputs: self.outputs.clone(),
            counts: (0..self.num_faults())
                .map(|f| (0..self.num_outputs()).map(|b| self.cycle_counts(f, b).to_vec()).collect())
                .collect(),
            any_error: (0..self.num_faults())
                .map(|f| (0..self.num_outputs()).map(|b| self.any_error(f, b)).collect())
                .collect(),
        }
    }

    /// Compact JSON; identical matrices give identical bytes.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_wire()).expect("matrix serializes")
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(self.to_wire()).expect("matrix serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        let w: MatrixJson = serde_json::from_str(text).map_err(|e| e.to_string())?;
        Self::from_wire(w)
    }

    pub fn from_json_value(v: serde_json::Value) -> Result<Self, String> {
        let w: MatrixJson = serde_json::from_value(v).map_err(|e| e.to_string())?;
        Self::from_wire(w)
    }

    fn from_wire(w: MatrixJson) -> Result<Self, String> {
        let mut m = ErrorMatrix::zeroed(w.faults, w.outputs, w.cycles, w.runs);
        let (nf, nb) = (m.num_faults(), m.num_outputs());
        if w.counts.len() != nf || w.any_error.len() != nf {
            return Err(format!("expected {nf} fault rows"));
        }
        for f in 0..nf {
            if w.counts[f].len() != nb || w.any_error[f].len() != nb {
                return Err(format!("fault row {f}: expected {nb} output entries"));
            }
            for b in 0..nb {
                if w.counts[f][b].len() != m.cycles {
                    return Err(format!("counts[{f}][{b}]: expected {} cycles", m.cycles));
                }
                for c in 0..m.cycles {
                    *m.count_mut(f, b, c) = w.counts[f][b][c];
                }
                *m.any_error_mut(f, b) = w.any_error[f][b];
            }
        }
        m.check_invariants()?;
        Ok(m)
    }
}

/// Stimulus words of one 64-run block, `[cycle][input]`.
struct Block {
    lane_mask: u64,
    inputs: Vec<u64>,
}

fn pack_blocks(stim: &StimulusSet) -> Vec<Block> {
    let (ni, nc) = (stim.inputs(), stim.cycles());
    (0..stim.len())
        .step_by(64)
        .map(|first_run| {
            let lanes = (stim.len() - first_run).min(64);
            let mut inputs = vec![0u64; nc * ni];
            for c in 0..nc {
                stim.pack_lanes(first_run, c, &mut inputs[c * ni..(c + 1) * ni]);
            }
            Block {
                lane_mask: if lanes == 64 { !0 } else { (1u64 << lanes) - 1 },
                inputs,
            }
        })
        .collect()
}

fn simulate_block(g: &EvalGraph, block: &Block, cycles: usize, fault: FaultOverlay, state: &mut SimState<u64>, out: &mut [u64]) {
    let (ni, no) = (g.num_inputs(), g.num_outputs());
    state.reset_in_place(g);
    for c in 0..cycles {
        state
            .step_into(g, &block.inputs[c * ni..(c + 1) * ni], fault, &mut out[c * no..(c + 1) * no])
            .expect("stimulus width checked");
    }
}

/// Golden output words for every block of a stimulus set.
pub struct GoldenCache {
    runs: usize,
    cycles: usize,
    outputs: usize,
    /// `[block][cycle][output]`
    words: Vec<u64>,
}

impl GoldenCache {
    /// Number of stored golden output bits: `runs * cycles * outputs`.
    pub fn bit_len(&self) -> usize {
        self.runs * self.cycles * self.outputs
    }

    pub fn is_empty(&self) -> bool {
        self.runs == 0
    }

    fn block(&self, b: usize) -> &[u64] {
        let w = self.cycles * self.outputs;
        &self.words[b * w..(b + 1) * w]
    }

    /// The golden trace of one run.
    pub fn trace(&self, run: usize) -> Trace {
        assert!(run < self.runs);
        let words = self.block(run / 64);
        let lane = run % 64;
        Trace {
            outputs: (0..self.cycles)
                .map(|c| (0..self.outputs).map(|o| (words[c * self.outputs + o] >> lane) & 1 == 1).collect())
                .collect(),
        }
    }
}

fn check_dims(g: &EvalGraph, stim: &StimulusSet, cycles: usize) -> Result<(), CampaignError> {
    if stim.inputs() != g.num_inputs() {
        return Err(CampaignError::DimensionMismatch(format!(
            "stimulus has {} inputs, design has {}",
            stim.inputs(),
            g.num_inputs()
        )));
    }
    if stim.cycles() != cycles {
        return Err(CampaignError::DimensionMismatch(format!(
            "stimulus has {} cycles, campaign asks for {cycles}",
            stim.cycles()
        )));
    }
    Ok(())
}

pub fn golden_trace_cache(g: &EvalGraph, stim: &StimulusSet) -> Result<GoldenCache, CampaignError> {
    check_dims(g, stim, stim.cycles())?;
    Ok(golden_from_blocks(g, &pack_blocks(stim), stim))
}

fn golden_from_blocks(g: &EvalGraph, blocks: &[Block], stim: &StimulusSet) -> GoldenCache {
    let w = stim.cycles() * g.num_outputs();
    let words = blocks
        .par_iter()
        .map_init(
            || SimState::<u64>::reset(g),
            |state, block| {
                let mut out = vec![0u64; w];
                simulate_block(g, block, stim.cycles(), FaultOverlay::NONE, state, &mut out);
                out
            },
        )
        .flatten_iter()
        .collect();
    GoldenCache {
        runs: stim.len(),
        cycles: stim.cycles(),
        outputs: g.num_outputs(),
        words,
    }
}

/// Counters of one fault over one block.
fn fault_block(
    g: &EvalGraph,
    block: &Block,
    golden: &[u64],
    cycles: usize,
    fault: FaultOverlay,
    state: &mut SimState<u64>,
    scratch: &mut Vec<u64>,
) -> Vec<u64> {
    let no = g.num_outputs();
    scratch.resize(cycles * no, 0);
    simulate_block(g, block, cycles, fault, state, scratch);
    // `cycles` per-cycle counters, then the any-error counter, per output.
    let mut row = vec![0u64; no * (cycles + 1)];
    for o in 0..no {
        let mut any = 0u64;
        for c in 0..cycles {
            let diff = (scratch[c * no + o] ^ golden[c * no + o]) & block.lane_mask;
            row[o * (cycles + 1) + c] = diff.count_ones() as u64;
            any |= diff;
        }
        row[o * (cycles + 1) + cycles] = any.count_ones() as u64;
    }
    row
}

fn add_rows(mut a: Vec<u64>, b: Vec<u64>) -> Vec<u64> {
    if a.is_empty() {
        return b;
    }
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
    a
}

fn resolve_targets(g: &EvalGraph, u: &FaultUniverse) -> Result<Vec<LutId>, CampaignError> {
    u.iter()
        .map(|f| g.lut_for_cell(f.cell).ok_or_else(|| CampaignError::UnknownFault(f.label.clone())))
        .collect()
}

fn validate(g: &EvalGraph, stim: &StimulusSet, cfg: &CampaignConfig) -> Result<usize, CampaignError> {
    check_dims(g, stim, cfg.cycles)?;
    if let Some(w) = &cfg.weights {
        if w.len() != g.num_outputs() {
            return Err(CampaignError::Config(format!(
                "{} weights for {} output bits",
                w.len(),
                g.num_outputs()
            )));
        }
        w.check().map_err(|e| CampaignError::Config(e.to_string()))?;
    }
    cfg.threads.resolve()
}

fn in_pool<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> Result<R, CampaignError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CampaignError::Config(e.to_string()))?;
    Ok(pool.install(f))
}

fn assemble(g: &EvalGraph, u: &FaultUniverse, stim: &StimulusSet, rows: Vec<Vec<u64>>) -> ErrorMatrix {
    let cycles = stim.cycles();
    let mut m = ErrorMatrix::zeroed(
        u.iter().map(|f| f.label.clone()).collect(),
        g.output_names().to_vec(),
        cycles,
        stim.len() as u64,
    );
    for (f, row) in rows.into_iter().enumerate() {
        if row.is_empty() {
            continue;
        }
        for o in 0..m.num_outputs() {
            for c in 0..cycles {
                *m.count_mut(f, o, c) = row[o * (cycles + 1) + c];
            }
            *m.any_error_mut(f, o) = row[o * (cycles + 1) + cycles];
        }
    }
    m
}

/// Runs every fault of `u` against every run of `stim`.
pub fn run_campaign(
    g: &EvalGraph,
    u: &FaultUniverse,
    stim: &StimulusSet,
    cfg: &CampaignConfig,
) -> Result<ErrorMatrix, CampaignError> {
    let threads = validate(g, stim, cfg)?;
    let targets = resolve_targets(g, u)?;
    let rows = in_pool(threads, || {
        let blocks = pack_blocks(stim);
        let golden = golden_from_blocks(g, &blocks, stim);
        targets
            .par_iter()
            .map(|&lut| {
                blocks
                    .par_iter()
                    .enumerate()
                    .map_init(
                        || (SimState::<u64>::reset(g), Vec::new()),
                        |(state, scratch), (bi, block)| {
                            fault_block(g, block, golden.block(bi), stim.cycles(), FaultOverlay::on(lut), state, scratch)
                        },
                    )
                    .reduce(Vec::new, add_rows)
            })
            .collect::<Vec<_>>()
    })?;
    Ok(assemble(g, u, stim, rows))
}

/// Same result as [`run_campaign`], but the golden outputs are re-simulated
/// for every fault instead of cached.
pub fn run_campaign_recomputing_golden(
    g: &EvalGraph,
    u: &FaultUniverse,
    stim: &StimulusSet,
    cfg: &CampaignConfig,
) -> Result<ErrorMatrix, CampaignError> {
    let threads = validate(g, stim, cfg)?;
    let targets = resolve_targets(g, u)?;
    let cycles = stim.cycles();
    let rows = in_pool(threads, || {
        let blocks = pack_blocks(stim);
        targets
            .par_iter()
            .map(|&lut| {
                let mut state = SimState::<u64>::reset(g);
                let mut scratch = Vec::new();
                let mut golden = vec![0u64; cycles * g.num_outputs()];
                blocks
                    .iter()
                    .map(|block| {
                        simulate_block(g, block, cycles, FaultOverlay::NONE, &mut state, &mut golden);
                        fault_block(g, block, &golden, cycles, FaultOverlay::on(lut), &mut state, &mut scratch)
                    })
                    .fold(Vec::new(), add_rows)
            })
            .collect::<Vec<_>>()
    })?;
    Ok(assemble(g, u, stim, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elaborate::elaborate;
    use crate::faults::enumerate_faults;
    use crate::netlist::{CellKind, InitMask, Netlist, NetlistBuilder};
    use crate::stimuli::{exhaustive, pseudo_random};
    use crate::synth::{random_netlist, SynthParams};

    fn campaign(n: &Netlist, stim: &StimulusSet) -> ErrorMatrix {
        let g = elaborate(n).unwrap();
        let cfg = CampaignConfig {
            threads: Threads::Fixed(2),
            ..CampaignConfig::new(stim.cycles())
        };
        run_campaign(&g, &enumerate_faults(n), stim, &cfg).unwrap()
    }

    fn lut1_buffer() -> Netlist {
        let mut b = NetlistBuilder::new("buf");
        b.input("a", 0, "a");
        b.output("y", 0, "y");
        b.lut("l", InitMask::from_u64(1, 0b10), &["a"], "y");
        b.build().unwrap()
    }

    /// f = a&b drives p1 = !f and p2 = !(f^b); y = p1 ^ p2 = !b whatever f is.
    fn reconvergent() -> Netlist {
        let mut b = NetlistBuilder::new("reconv");
        b.input("a", 0, "a");
        b.input("b", 0, "b");
        b.output("y", 0, "y");
        b.lut("f", InitMask::from_u64(2, 0x8), &["a", "b"], "f");
        b.lut("p1", InitMask::from_u64(1, 0b01), &["f"], "p1");
        b.lut("p2", InitMask::from_u64(2, 0x9), &["f", "b"], "p2");
        b.lut("x", InitMask::from_u64(2, 0x6), &["p1", "p2"], "y");
        b.build().unwrap()
    }

    #[test]
    fn no_luts_gives_empty_matrix() {
        let mut b = NetlistBuilder::new("wire");
        b.input("a", 0, "a");
        b.output("y", 0, "y");
        b.simple("bf", CellKind::Buf, Some("a"), "y");
        let m = campaign(&b.build().unwrap(), &exhaustive(1, 3, false).unwrap());
        assert_eq!(m.num_faults(), 0);
        assert_eq!(m.runs, 8);
        assert_eq!(m.to_json(), r#"{"runs":8,"cycles":3,"faults":[],"outputs":["y"],"counts":[],"any_error":[]}"#);
    }

    #[test]
    fn inverted_buffer_is_always_wrong() {
        let stim = exhaustive(1, 4, false).unwrap();
        let m = campaign(&lut1_buffer(), &stim);
        assert_eq!(m.cycle_counts(0, 0), &[16, 16, 16, 16]);
        assert_eq!(m.any_error(0, 0), 16);
    }

    #[test]
    fn reconvergent_fault_is_masked() {
        let n = reconvergent();
        let m = campaign(&n, &exhaustive(2, 3, false).unwrap());
        let f = m.faults.iter().position(|l| l == "f").unwrap();
        assert!(m.cycle_counts(f, 0).iter().all(|&c| c == 0));
        assert_eq!(m.any_error(f, 0), 0);
        // The final XOR is not masked.
        let x = m.faults.iter().position(|l| l == "x").unwrap();
        assert_eq!(m.any_error(x, 0), 64);
    }

    #[test]
    fn cache_matches_recomputation_and_reports_its_size() {
        let p = SynthParams {
            luts: 6,
            ..Default::default()
        };
        let n = random_netlist(&p, 5);
        let g = elaborate(&n).unwrap();
        let stim = pseudo_random(g.num_inputs(), 6, 200, 1, false).unwrap();
        let u = enumerate_faults(&n);
        let cfg = CampaignConfig::new(6);
        assert_eq!(
            run_campaign(&g, &u, &stim, &cfg).unwrap(),
            run_campaign_recomputing_golden(&g, &u, &stim, &cfg).unwrap()
        );
        let cache = golden_trace_cache(&g, &stim).unwrap();
        assert_eq!(cache.bit_len(), 200 * 6 * g.num_outputs());
        for r in [0, 63, 64, 199] {
            assert_eq!(cache.trace(r), crate::sim::run(&g, &stim.run(r), FaultOverlay::NONE).unwrap());
        }
    }

    #[test]
    fn empty_stimulus_sets_cannot_be_built() {
        assert!(StimulusSet::from_runs(&[]).is_err());
    }

    #[test]
    fn adding_runs_never_decreases_counters() {
        let n = random_netlist(&SynthParams::default(), 9);
        let g = elaborate(&n).unwrap();
        let u = enumerate_faults(&n);
        let small = pseudo_random(g.num_inputs(), 5, 100, 3, false).unwrap();
        let big = pseudo_random(g.num_inputs(), 5, 101, 3, false).unwrap();
        let cfg = CampaignConfig::new(5);
        let a = run_campaign(&g, &u, &small, &cfg).unwrap();
        let b = run_campaign(&g, &u, &big, &cfg).unwrap();
        for f in 0..a.num_faults() {
            for o in 0..a.num_outputs() {
                assert!(b.any_error(f, o) >= a.any_error(f, o));
                for c in 0..5 {
                    assert!(b.count(f, o, c) >= a.count(f, o, c));
                }
            }
        }
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let p = SynthParams {
            luts: 20,
            dffs: 6,
            ..Default::default()
        };
        let n = random_netlist(&p, 21);
        let g = elaborate(&n).unwrap();
        let u = enumerate_faults(&n);
        let stim = pseudo_random(g.num_inputs(), 7, 300, 8, false).unwrap();
        let json: Vec<String> = [1, 3, 4]
            .into_iter()
            .map(|t| {
                let cfg = CampaignConfig {
                    threads: Threads::Fixed(t),
                    ..CampaignConfig::new(7)
                };
                run_campaign(&g, &u, &stim, &cfg).unwrap().to_json()
            })
            .collect();
        assert_eq!(json[0], json[1]);
        assert_eq!(json[0], json[2]);
    }

    #[test]
    fn dominance_and_json_round_trip() {
        for seed in 0..10 {
            let n = random_netlist(&SynthParams::default(), seed);
            let stim = pseudo_random(4, 6, 130, seed, false).unwrap();
            let m = campaign(&n, &stim);
            m.check_invariants().unwrap();
            assert_eq!(ErrorMatrix::from_json(&m.to_json()).unwrap(), m);
        }
    }

    #[test]
    fn empty_universe_is_all_zero() {
        let n = random_netlist(&SynthParams::default(), 2);
        let g = elaborate(&n).unwrap();
        let stim = pseudo_random(4, 3, 10, 0, false).unwrap();
        let m = run_campaign(&g, &FaultUniverse::default(), &stim, &CampaignConfig::new(3)).unwrap();
        assert_eq!(m.num_faults(), 0);
    }

    #[test]
    fn dimension_and_config_errors() {
        let g = elaborate(&lut1_buffer()).unwrap();
        let u = enumerate_faults(&lut1_buffer());
        let stim = exhaustive(2, 2, false).unwrap();
        assert!(matches!(
            run_campaign(&g, &u, &stim, &CampaignConfig::new(2)),
            Err(CampaignError::DimensionMismatch(_))
        ));
        let stim = exhaustive(1, 2, false).unwrap();
        assert!(matches!(
            run_campaign(&g, &u, &stim, &CampaignConfig::new(3)),
            Err(CampaignError::DimensionMismatch(_))
        ));
        let cfg = CampaignConfig {
            threads: Threads::Fixed(0),
            ..CampaignConfig::new(2)
        };
        assert!(matches!(run_campaign(&g, &u, &stim, &cfg), Err(CampaignError::Config(_))));
    }

    #[test]
    fn rejects_inconsistent_json() {
        let bad = r#"{"runs":2,"cycles":1,"faults":["l"],"outputs":["y"],"counts":[[[3]]],"any_error":[[3]]}"#;
        assert!(ErrorMatrix::from_json(bad).is_err());
        let bad = r#"{"runs":2,"cycles":2,"faults":["l"],"outputs":["y"],"counts":[[[1]]],"any_error":[[1]]}"#;
        assert!(ErrorMatrix::from_json(bad).is_err());
    }
}
