//! Canonical JSON form of a [`Netlist`].
//!
//! ```json
//! { "ir_version": 1, "name": "top",
//!   "inputs":  [{"name": "a", "index": 0, "net": "a"}],
//!   "outputs": [{"name": "y", "index": 0, "net": "y"}],
//!   "nets": ["a", "y"],
//!   "cells": [{"id": "g", "kind": "LUT1", "init": "2", "pins": {"I0": "a", "O": "y"}}],
//!   "clock": "clk", "reset": "rst" }
//! ```
//!
//! `init` is the truth table in hex, most-significant digit first, with
//! exactly `ceil(2^k / 4)` digits; a sized Verilog literal (`8'hE8`,
//! `4'b0110`) is also accepted on input. `ff_init` is 0 or 1.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Cell, CellKind, InitMask, NetId, Netlist, NetlistError, PortBit};

pub const IR_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IrDoc {
    ir_version: u32,
    name: String,
    inputs: Vec<IrPort>,
    outputs: Vec<IrPort>,
    nets: Vec<String>,
    cells: Vec<IrCell>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    clock: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    reset: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IrPort {
    name: String,
    index: u32,
    net: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IrCell {
    id: String,
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    init: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ff_init: Option<u8>,
    pins: BTreeMap<String, String>,
}

fn schema(path: impl Into<String>, reason: impl Into<String>) -> NetlistError {
    NetlistError::Schema {
        path: path.into(),
        reason: reason.into(),
    }
}

/// Serializes a netlist. Output is a pure function of the netlist: cells,
/// nets and ports keep their order and pin maps are sorted.
pub fn write_ir(n: &Netlist) -> String {
    let name = |id: NetId| n.nets[id.index()].clone();
    let port = |p: &PortBit| IrPort {
        name: p.name.clone(),
        index: p.index,
        net: name(p.net),
    };
    let doc = IrDoc {
        ir_version: IR_VERSION,
        name: n.name.clone(),
        inputs: n.inputs.iter().map(port).collect(),
        outputs: n.outputs.iter().map(port).collect(),
        nets: n.nets.clone(),
        cells: n
            .cells
            .iter()
            .map(|c| IrCell {
                id: c.id.clone(),
                kind: c.kind.name().to_string(),
                init: c.init.map(|m| m.to_hex()),
                ff_init: (c.kind == CellKind::Dff).then_some(c.ff_init as u8),
                pins: c.pins.iter().map(|(p, net)| (p.clone(), name(*net))).collect(),
            })
            .collect(),
        clock: n.clock.map(name),
        reset: n.reset.map(name),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("IR serialization");
    s.push('\n');
    s
}

fn parse_init(text: &str, k: usize, path: &str) -> Result<InitMask, NetlistError> {
    let want = 1usize << k;
    let bad = |reason: String| schema(path, reason);
    let (width, radix, digits) = match text.split_once('\'') {
        Some((w, rest)) => {
            let w: usize = w.parse().map_err(|_| bad(format!("bad literal width in `{text}`")))?;
            let mut chars = rest.chars();
            let radix = match chars.next().map(|c| c.to_ascii_lowercase()) {
                Some('h') => 16,
                Some('b') => 2,
                _ => return Err(bad(format!("unsupported radix in `{text}`"))),
            };
            (Some(w), radix, chars.as_str().replace('_', ""))
        }
        None => (None, 16, text.replace('_', "")),
    };
    if let Some(w) = width {
        if w != want {
            return Err(bad(format!("LUT{k} INIT must have {want} bits, found {w}")));
        }
    } else {
        let need = want.div_ceil(4);
        if digits.len() != need {
            return Err(bad(format!(
                "LUT{k} INIT must have {need} hex digits, found {}",
                digits.len()
            )));
        }
    }
    if digits.is_empty() {
        return Err(bad("empty INIT".into()));
    }
    let value = u128::from_str_radix(&digits, radix).map_err(|_| bad(format!("bad INIT digits `{digits}`")))?;
    if want < 128 && value >> want != 0 {
        return Err(bad(format!("INIT `{text}` does not fit in {want} bits")));
    }
    Ok(InitMask::from_u64(k, value as u64))
}

/// Reads and validates a JSON IR document.
pub fn read_ir(json: &str) -> Result<Netlist, NetlistError> {
    let doc: IrDoc = serde_json::from_str(json).map_err(|e| schema(format!("line {} column {}", e.line(), e.column()), e.to_string()))?;
    if doc.ir_version != IR_VERSION {
        return Err(schema(
            "ir_version",
            format!("unsupported version {} (expected {IR_VERSION})", doc.ir_version),
        ));
    }
    let mut index: BTreeMap<&str, NetId> = BTreeMap::new();
    for (i, net) in doc.nets.iter().enumerate() {
        if index.insert(net.as_str(), NetId(i as u32)).is_some() {
            return Err(schema(format!("nets[{i}]"), format!("duplicate net `{net}`")));
        }
    }
    let lookup = |net: &str, path: String| -> Result<NetId, NetlistError> {
        index
            .get(net)
            .copied()
            .ok_or_else(|| schema(path, format!("unknown net `{net}`")))
    };
    let ports = |ports: &[IrPort], which: &str| -> Result<Vec<PortBit>, NetlistError> {
        ports
            .iter()
            .enumerate()
            .map(|(i, p)| {
                Ok(PortBit {
                    name: p.name.clone(),
                    index: p.index,
                    net: lookup(&p.net, format!("{which}[{i}].net"))?,
                })
            })
            .collect()
    };
    let inputs = ports(&doc.inputs, "inputs")?;
    let outputs = ports(&doc.outputs, "outputs")?;

    let mut cells = Vec::with_capacity(doc.cells.len());
    for (i, c) in doc.cells.iter().enumerate() {
        let path = format!("cells[{i}]");
        let kind = CellKind::from_name(&c.kind).ok_or_else(|| NetlistError::UnsupportedCell {
            kind: c.kind.clone(),
            cell: c.id.clone(),
        })?;
        let init = match (kind, &c.init) {
            (CellKind::Lut(k), Some(text)) => Some(parse_init(text, k as usize, &format!("{path}.init"))?),
            (CellKind::Lut(_), None) => return Err(schema(format!("{path}.init"), "LUT cell without init")),
            (_, Some(_)) => return Err(schema(format!("{path}.init"), "init on a non-LUT cell")),
            (_, None) => None,
        };
        let ff_init = match (kind, c.ff_init) {
            (_, None) | (_, Some(0)) => false,
            (CellKind::Dff, Some(1)) => true,
            (CellKind::Dff, Some(v)) => return Err(schema(format!("{path}.ff_init"), format!("expected 0 or 1, found {v}"))),
            (_, Some(_)) => return Err(schema(format!("{path}.ff_init"), "ff_init on a non-DFF cell")),
        };
        let mut pins = BTreeMap::new();
        for (pin, net) in &c.pins {
            pins.insert(pin.clone(), lookup(net, format!("{path}.pins.{pin}"))?);
        }
        cells.push(Cell {
            id: c.id.clone(),
            kind,
            init,
            ff_init,
            pins,
        });
    }
    let clock = doc.clock.as_deref().map(|n| lookup(n, "clock".into())).transpose()?;
    let reset = doc.reset.as_deref().map(|n| lookup(n, "reset".into())).transpose()?;

    Netlist {
        name: doc.name,
        inputs,
        outputs,
        nets: doc.nets,
        cells,
        clock,
        reset,
    }
    .validated()
}
