//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use seusim::campaign::{run_campaign, CampaignConfig, ErrorMatrix, Threads};
use seusim::elaborate::elaborate;
use seusim::faults::{apply_fault, enumerate_faults};
use seusim::metrics::{error_possibility, histogram, total_metric, vulnerability_scores, TotalMode, Weights};
use seusim::netlist::{parse_verilog, CellKind, InitMask, Netlist, NetlistBuilder};
use seusim::reference::{reference_campaign, EventSim};
use seusim::sim::{self, FaultOverlay};
use seusim::stimuli::{exhaustive, pseudo_random};
use seusim::synth::{random_netlist, SynthParams};

const B01: &str = include_str!("data/b01.v");

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn cfg(cycles: usize, threads: usize) -> CampaignConfig {
    CampaignConfig {
        threads: Threads::Fixed(threads),
        ..CampaignConfig::new(cycles)
    }
}

fn cores() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn campaign_on(n: &Netlist, stim: &seusim::StimulusSet, threads: usize) -> ErrorMatrix {
    let g = elaborate(n).expect("elaborates");
    run_campaign(&g, &enumerate_faults(n), stim, &cfg(stim.cycles(), threads)).expect("campaign runs")
}

fn small_params(rng: &mut Xoshiro256PlusPlus) -> SynthParams {
    SynthParams {
        inputs: rng.gen_range(0..=4),
        outputs: rng.gen_range(1..=3),
        luts: rng.gen_range(1..=8),
        dffs: rng.gen_range(0..=4),
        max_arity: rng.gen_range(1..=6),
        control_percent: 30,
        buffers: rng.gen_range(0..=2),
    }
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(1);
    let mut cycles_checked = 0u64;
    for i in 0..200u64 {
        let n = random_netlist(&small_params(&mut rng), i);
        let g = elaborate(&n).map_err(|e| e.to_string())?;
        let stim = pseudo_random(g.num_inputs(), 8, 1000, 1000 + i, false).map_err(|e| e.to_string())?;
        for r in 0..stim.len() {
            let fast = sim::run(&g, &stim.run(r), FaultOverlay::NONE).map_err(|e| e.to_string())?;
            let reference = EventSim::trace(&n, None, &stim, r);
            ensure!(fast.outputs == reference, "netlist {i}, run {r}: traces differ");
            cycles_checked += 8;
        }
    }
    let t = start.elapsed();
    ensure!(t < Duration::from_secs(60), "took {t:.1?}");
    Ok(format!("200 netlists, {cycles_checked} cycles, 0 mismatches, {t:.1?}"))
}

fn overlay_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(2);
    let mut faults = 0;
    for i in 0..100u64 {
        let n = random_netlist(&small_params(&mut rng), 5000 + i);
        let g = elaborate(&n).map_err(|e| e.to_string())?;
        let stim = pseudo_random(g.num_inputs(), 8, 200, i, false).map_err(|e| e.to_string())?;
        for f in enumerate_faults(&n).iter() {
            let edited = elaborate(&apply_fault(&n, f).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
            let overlay = FaultOverlay::for_cell(&g, &f.label).map_err(|e| e.to_string())?;
            for run in stim.runs() {
                let a = sim::run(&g, &run, overlay).map_err(|e| e.to_string())?;
                let b = sim::run(&edited, &run, FaultOverlay::NONE).map_err(|e| e.to_string())?;
                ensure!(a == b, "circuit {i}, fault {}: traces differ", f.label);
            }
            faults += 1;
        }
    }
    let t = start.elapsed();
    ensure!(t < Duration::from_secs(60), "took {t:.1?}");
    Ok(format!("100 circuits, {faults} faults, {t:.1?}"))
}

/// `f` fans out to `!f` and `!(f ^ b)`; their XOR is `!b` for either value
/// of `f`. A register samples the result so the circuit is sequential.
fn reconvergent() -> Netlist {
    let mut b = NetlistBuilder::new("reconvergent");
    b.input("clk", 0, "clk");
    b.set_clock("clk");
    b.input("a", 0, "a");
    b.input("b", 0, "b");
    b.output("y", 0, "y");
    b.output("q", 0, "q");
    b.simple("vcc", CellKind::Const1, None, "one");
    b.simple("gnd", CellKind::Const0, None, "zero");
    b.lut("fan", InitMask::from_u64(2, 0x8), &["a", "b"], "f");
    b.lut("inv1", InitMask::from_u64(1, 0b01), &["f"], "p1");
    b.lut("inv2", InitMask::from_u64(2, 0x9), &["f", "b"], "p2");
    b.lut("join", InitMask::from_u64(2, 0x6), &["p1", "p2"], "y");
    b.dff("ff", "y", "one", "zero", "q", false);
    let mut n = b.build().expect("valid");
    let clk = n.net_by_name("clk").unwrap();
    for c in n.cells.iter_mut().filter(|c| c.kind == CellKind::Dff) {
        c.pins.insert("C".into(), clk);
    }
    n
}

fn masking(matrices: &mut Vec<ErrorMatrix>) -> Outcome {
    let n = reconvergent();
    let stim = exhaustive(2, 6, false).map_err(|e| e.to_string())?;
    let m = campaign_on(&n, &stim, 1);
    let f = m.faults.iter().position(|l| l == "fan").ok_or("no fan fault")?;
    let p = error_possibility(&m).map_err(|e| e.to_string())?;
    for (b, out) in m.outputs.iter().enumerate() {
        ensure!(
            p[f][b].iter().all(|x| x.is_zero()),
            "output {out}: {:?}",
            m.cycle_counts(f, b)
        );
    }
    let join = m.faults.iter().position(|l| l == "join").ok_or("no join fault")?;
    ensure!(m.any_error(join, 0) == m.runs, "control: join fault should always propagate");
    matrices.push(m);
    Ok(format!("fanout LUT fault: 0.0 at {} outputs x 6 cycles over {} runs", p[f].len(), stim.len()))
}

/// Nets reached from the output of `cell` through buffers only.
fn buffered_nets(n: &Netlist, cell: usize) -> Vec<seusim::netlist::NetId> {
    let mut nets = vec![n.cells[cell].output()];
    let mut changed = true;
    while changed {
        changed = false;
        for c in &n.cells {
            if c.kind == CellKind::Buf && nets.contains(&c.pins["I"]) && !nets.contains(&c.output()) {
                nets.push(c.output());
                changed = true;
            }
        }
    }
    nets
}

/// Outputs driven by `cell` through buffers only.
fn drives_output(n: &Netlist, cell: usize) -> Vec<usize> {
    let nets = buffered_nets(n, cell);
    n.outputs
        .iter()
        .enumerate()
        .filter(|(_, p)| nets.contains(&p.net))
        .map(|(i, _)| i)
        .collect()
}

/// True when nothing but buffers and primary outputs reads the output of
/// `cell`.
fn only_drives_outputs(n: &Netlist, cell: usize) -> bool {
    let nets = buffered_nets(n, cell);
    n.cells.iter().all(|c| {
        c.kind == CellKind::Buf || !c.pins.iter().any(|(pin, net)| pin != c.kind.output_pin() && nets.contains(net))
    })
}

fn always_propagating(matrices: &mut Vec<ErrorMatrix>) -> Outcome {
    let mut checked = 0;
    let mut designs = vec![parse_verilog(B01).map_err(|e| e.to_string())?];
    designs.extend((0..20).map(|s| {
        random_netlist(
            &SynthParams {
                inputs: 3,
                luts: 8,
                dffs: 3,
                ..Default::default()
            },
            700 + s,
        )
    }));
    for n in &designs {
        let g = elaborate(n).map_err(|e| e.to_string())?;
        let cycles = if g.num_inputs() == 0 { 4 } else { (16 / g.num_inputs()).min(6) };
        let stim = exhaustive(g.num_inputs(), cycles, false).map_err(|e| e.to_string())?;
        let m = campaign_on(n, &stim, cores());
        let total = total_metric(&m, TotalMode::AtLeastOnce).map_err(|e| e.to_string())?;
        let p = error_possibility(&m).map_err(|e| e.to_string())?;
        for (fi, f) in enumerate_faults(n).iter().enumerate() {
            if !only_drives_outputs(n, f.cell) {
                continue;
            }
            for b in drives_output(n, f.cell) {
                ensure!(
                    p[fi][b].iter().all(|x| x.is_one()) && total[fi][b].is_one(),
                    "{}: {} at {}: {:?}",
                    n.name,
                    f.label,
                    m.outputs[b],
                    m.cycle_counts(fi, b)
                );
                checked += 1;
            }
        }
        matrices.push(m);
    }
    ensure!(checked >= 2, "only {checked} output-driving LUTs found");
    Ok(format!("{checked} output-driving LUT faults at 1.0 every cycle, total 1.0"))
}

fn metric_identities(matrices: &[ErrorMatrix]) -> Outcome {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(5);
    let mut cells = 0usize;
    let mut worst = 0f64;
    for m in matrices {
        m.check_invariants()?;
        let p = error_possibility(m).map_err(|e| e.to_string())?;
        let alo = total_metric(m, TotalMode::AtLeastOnce).map_err(|e| e.to_string())?;
        let max = total_metric(m, TotalMode::MaxCycle).map_err(|e| e.to_string())?;
        for f in 0..m.num_faults() {
            for b in 0..m.num_outputs() {
                for c in 0..m.cycles {
                    // Cross-multiplied: p * runs == count.
                    ensure!(
                        p[f][b][c].num as u128 * m.runs as u128 == m.count(f, b, c) as u128 * p[f][b][c].den as u128,
                        "possibility is not counts/runs"
                    );
                    ensure!(max[f][b] >= p[f][b][c], "max below a cycle");
                }
                ensure!(alo[f][b] >= max[f][b], "{}/{}: at-least-once below max", m.faults[f], m.outputs[b]);
                cells += 1;
            }
        }
        let uniform = Weights::uniform(m.num_outputs());
        let exact: Vec<BigRational> = vulnerability_scores(&alo, &uniform).map_err(|e| e.to_string())?;
        let h = histogram(&exact, &BigRational::new(1.into(), 10.into())).map_err(|e| e.to_string())?;
        ensure!(h.iter().map(|b| b.count).sum::<usize>() == m.num_faults(), "histogram does not sum to LUT count");

        let w = Weights(
            (0..m.num_outputs())
                .map(|_| BigRational::new(rng.gen_range(1..50i64).into(), rng.gen_range(1..20i64).into()))
                .collect(),
        );
        let k = BigRational::new(rng.gen_range(1..1000i64).into(), rng.gen_range(1..100i64).into());
        let a: Vec<BigRational> = vulnerability_scores(&alo, &w).map_err(|e| e.to_string())?;
        let b: Vec<BigRational> = vulnerability_scores(&alo, &w.scaled(&k)).map_err(|e| e.to_string())?;
        ensure!(a == b, "exact scores changed under weight scaling");
        let a: Vec<f64> = vulnerability_scores(&alo, &w).map_err(|e| e.to_string())?;
        let b: Vec<f64> = vulnerability_scores(&alo, &w.scaled(&k)).map_err(|e| e.to_string())?;
        for (x, y) in a.iter().zip(&b) {
            worst = worst.max((x - y).abs());
        }
    }
    ensure!(worst < 1e-12, "float scores moved by {worst:e} under weight scaling");
    Ok(format!(
        "{} campaigns, {cells} cells; max float drift under weight scaling {worst:.1e}",
        matrices.len()
    ))
}

fn statistical_convergence(matrices: &mut Vec<ErrorMatrix>) -> Outcome {
    let start = Instant::now();
    let n = parse_verilog(B01).map_err(|e| e.to_string())?;
    let g = elaborate(&n).map_err(|e| e.to_string())?;
    let cycles = 5;
    let truth = campaign_on(&n, &exhaustive(g.num_inputs(), cycles, false).map_err(|e| e.to_string())?, 1);
    let exact = total_metric(&truth, TotalMode::AtLeastOnce).map_err(|e| e.to_string())?;
    let (mut within, mut total, mut worst) = (0usize, 0usize, 0f64);
    for seed in 0..20 {
        let stim = pseudo_random(g.num_inputs(), cycles, 1024, seed, false).map_err(|e| e.to_string())?;
        let m = campaign_on(&n, &stim, cores());
        let est = total_metric(&m, TotalMode::AtLeastOnce).map_err(|e| e.to_string())?;
        for f in 0..m.num_faults() {
            for b in 0..m.num_outputs() {
                if exact[f][b].is_zero() {
                    continue;
                }
                let d = (est[f][b].to_f64() - exact[f][b].to_f64()).abs();
                worst = worst.max(d);
                total += 1;
                within += (d <= 0.05) as usize;
            }
        }
        matrices.push(m);
    }
    matrices.push(truth);
    let t = start.elapsed();
    ensure!(total > 0, "no nonzero cells");
    ensure!(within * 100 >= total * 95, "{within}/{total} cells within 0.05");
    ensure!(t < Duration::from_secs(300), "took {t:.1?}");
    Ok(format!(
        "{within}/{total} nonzero cells within 0.05 over 20 seeds (worst {worst:.3}), {t:.1?}"
    ))
}

fn determinism() -> Outcome {
    let p = SynthParams {
        inputs: 12,
        outputs: 8,
        luts: 100,
        dffs: 16,
        max_arity: 6,
        control_percent: 20,
        buffers: 4,
    };
    let n = random_netlist(&p, 77);
    let g = elaborate(&n).map_err(|e| e.to_string())?;
    let u = enumerate_faults(&n);
    let mut outputs = Vec::new();
    for threads in [1, 4, 8, 8] {
        // A fresh stimulus set per invocation, regenerated from the seed.
        let stim = pseudo_random(g.num_inputs(), 10, 1024, 2024, false).map_err(|e| e.to_string())?;
        let m = run_campaign(&g, &u, &stim, &cfg(10, threads)).map_err(|e| e.to_string())?;
        outputs.push(m.to_json());
    }
    ensure!(outputs.iter().all(|o| *o == outputs[0]), "JSON differs between runs");
    Ok(format!(
        "{} LUTs, 1/4/8 workers and a repeat invocation: {} identical bytes",
        n.num_luts(),
        outputs[0].len()
    ))
}

fn performance() -> Outcome {
    let p = SynthParams {
        inputs: 32,
        outputs: 32,
        luts: 1000,
        dffs: 120,
        max_arity: 6,
        control_percent: 15,
        buffers: 10,
    };
    let n = random_netlist(&p, 14);
    let g = elaborate(&n).map_err(|e| e.to_string())?;
    let u = enumerate_faults(&n);
    let stim = pseudo_random(g.num_inputs(), 10, 1024, 3, false).map_err(|e| e.to_string())?;
    let workers = cores();

    let start = Instant::now();
    let full = run_campaign(&g, &u, &stim, &cfg(10, workers)).map_err(|e| e.to_string())?;
    let full_time = start.elapsed();
    full.check_invariants()?;

    let sample = u.subsample(100);
    let start = Instant::now();
    let fast = run_campaign(&g, &sample, &stim, &cfg(10, 1)).map_err(|e| e.to_string())?;
    let fast_time = start.elapsed();
    let start = Instant::now();
    let slow = reference_campaign(&n, &sample, &stim);
    let slow_time = start.elapsed();
    ensure!(fast == slow, "engines disagree on the subsample");
    let speedup = slow_time.as_secs_f64() / fast_time.as_secs_f64().max(1e-9);
    ensure!(full_time < Duration::from_secs(30 * 60), "full campaign took {full_time:.1?}");
    ensure!(speedup >= 10.0, "speedup only {speedup:.1}x");
    Ok(format!(
        "{} LUTs x 1024 runs x 10 cycles in {full_time:.2?} on {workers} core(s); {} sampled faults: {fast_time:.2?} vs reference {slow_time:.2?} ({speedup:.0}x)",
        n.num_luts(),
        sample.len()
    ))
}

fn b01_shape(matrices: &mut Vec<ErrorMatrix>) -> Outcome {
    let n = parse_verilog(B01).map_err(|e| e.to_string())?;
    let g = elaborate(&n).map_err(|e| e.to_string())?;
    let stim = pseudo_random(g.num_inputs(), 10, 1024, 0, false).map_err(|e| e.to_string())?;
    let m = campaign_on(&n, &stim, cores());
    let p = error_possibility(&m).map_err(|e| e.to_string())?;
    let total = total_metric(&m, TotalMode::AtLeastOnce).map_err(|e| e.to_string())?;
    let faults = enumerate_faults(&n);

    let masked: Vec<&str> = (0..m.num_faults())
        .filter(|&f| (0..m.num_outputs()).all(|b| p[f][b].iter().all(|x| x.is_zero())))
        .map(|f| m.faults[f].as_str())
        .collect();
    let mut ones = Vec::new();
    for (f, fault) in faults.iter().enumerate() {
        for b in drives_output(&n, fault.cell) {
            if total[f][b].is_one() {
                ones.push(format!("{}/{}", m.faults[f], m.outputs[b]));
            }
        }
    }
    let feeds_register = |cell: usize| {
        let net = n.cells[cell].output();
        n.cells.iter().any(|c| c.kind == CellKind::Dff && c.pins["D"] == net)
    };
    let intermediate: Vec<&str> = faults
        .iter()
        .enumerate()
        .filter(|(_, s)| feeds_register(s.cell))
        .filter(|(f, _)| {
            p[*f]
                .iter()
                .flatten()
                .any(|x| !x.is_zero() && !x.is_one())
        })
        .map(|(f, _)| m.faults[f].as_str())
        .collect();
    ensure!(!masked.is_empty(), "no fully masked LUT");
    ensure!(ones.len() >= 2, "only {} output-adjacent rows at total 1.0", ones.len());
    ensure!(!intermediate.is_empty(), "no state LUT with intermediate possibilities");
    let line = format!(
        "masked [{}], total=1.0 [{}], intermediate state LUTs [{}]",
        masked.join(", "),
        ones.join(", "),
        intermediate.join(", ")
    );
    matrices.push(m);
    Ok(line)
}

fn main() -> ExitCode {
    let mut matrices = Vec::new();
    let mut failed = 0;
    let mut report = |id: u32, name: &str, f: &mut dyn FnMut() -> Outcome| {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("PASS criterion {id}: {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {id}: {name}: {why}");
            }
        }
    };
    report(1, "oracle equivalence", &mut oracle_equivalence);
    report(2, "fault overlay equals netlist edit", &mut overlay_equivalence);
    report(3, "reconvergent masking", &mut || masking(&mut matrices));
    report(4, "always-propagating output LUTs", &mut || always_propagating(&mut matrices));
    report(6, "statistical convergence", &mut || statistical_convergence(&mut matrices));
    report(7, "determinism and thread invariance", &mut determinism);
    report(8, "performance", &mut performance);
    report(9, "b01 qualitative shape", &mut || b01_shape(&mut matrices));
    report(5, "metric identities", &mut || metric_identities(&matrices));
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
