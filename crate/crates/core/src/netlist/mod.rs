//! Flattened BEL-level netlist model.
//!
//! A [`Netlist`] is a single flattened module: port bits, named nets and a
//! list of primitive cells. The primitive set is deliberately small (LUTs,
//! one flip-flop flavour, buffers, inverters and constants); anything else is
//! rejected when a netlist is built, so an accepted netlist can always be
//! simulated faithfully.
//!
//! Netlists are produced by [`parse_verilog`] or [`read_ir`] and validated on
//! construction; every value handed out by this module satisfies the
//! single-driver and full-connectivity invariants.

mod error;
mod ir;
mod mask;
mod verilog;

use std::collections::BTreeMap;
use std::fmt;

pub use error::{ErrorClass, NetlistError};
pub use ir::{read_ir, write_ir, IR_VERSION};
pub use mask::InitMask;
pub use verilog::parse_verilog;
pub(crate) use verilog::buffer_root as verilog_buffer_root;

/// Index of a net inside [`Netlist::nets`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NetId(pub u32);

impl NetId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// One bit of a (possibly multi-bit) module port.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PortBit {
    pub name: String,
    pub index: u32,
    pub net: NetId,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CellKind {
    /// k-input lookup table, `1 <= k <= 6`.
    Lut(u8),
    /// Rising-edge flip-flop with active-high clock enable and synchronous reset.
    Dff,
    Buf,
    Not,
    Const0,
    Const1,
}

impl CellKind {
    pub fn is_lut(self) -> bool {
        matches!(self, CellKind::Lut(_))
    }

    pub fn is_sequential(self) -> bool {
        self == CellKind::Dff
    }

    /// Canonical kind name as used in the JSON IR.
    pub fn name(self) -> &'static str {
        match self {
            CellKind::Lut(1) => "LUT1",
            CellKind::Lut(2) => "LUT2",
            CellKind::Lut(3) => "LUT3",
            CellKind::Lut(4) => "LUT4",
            CellKind::Lut(5) => "LUT5",
            CellKind::Lut(6) => "LUT6",
            CellKind::Lut(_) => "LUT?",
            CellKind::Dff => "DFF",
            CellKind::Buf => "BUF",
            CellKind::Not => "NOT",
            CellKind::Const0 => "CONST0",
            CellKind::Const1 => "CONST1",
        }
    }

    pub fn from_name(name: &str) -> Option<CellKind> {
        Some(match name {
            "LUT1" => CellKind::Lut(1),
            "LUT2" => CellKind::Lut(2),
            "LUT3" => CellKind::Lut(3),
            "LUT4" => CellKind::Lut(4),
            "LUT5" => CellKind::Lut(5),
            "LUT6" => CellKind::Lut(6),
            "DFF" => CellKind::Dff,
            "BUF" => CellKind::Buf,
            "NOT" => CellKind::Not,
            "CONST0" => CellKind::Const0,
            "CONST1" => CellKind::Const1,
            _ => return None,
        })
    }

    /// Input pins in canonical order.
    pub fn input_pins(self) -> &'static [&'static str] {
        const LUT_PINS: [&str; 6] = ["I0", "I1", "I2", "I3", "I4", "I5"];
        match self {
            CellKind::Lut(k) => &LUT_PINS[..(k as usize).min(6)],
            CellKind::Dff => &["D", "CE", "R", "C"],
            CellKind::Buf | CellKind::Not => &["I"],
            CellKind::Const0 | CellKind::Const1 => &[],
        }
    }

    pub fn output_pin(self) -> &'static str {
        match self {
            CellKind::Dff => "Q",
            _ => "O",
        }
    }

    /// Pins that may be left unconnected. The flip-flop clock falls back to
    /// the implicit global clock.
    pub fn is_optional_pin(self, pin: &str) -> bool {
        self == CellKind::Dff && pin == "C"
    }
}

impl fmt::Display for CellKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cell {
    pub id: String,
    pub kind: CellKind,
    /// Truth table, present exactly for LUT cells.
    pub init: Option<InitMask>,
    /// Power-up value, meaningful for flip-flops only.
    pub ff_init: bool,
    pub pins: BTreeMap<String, NetId>,
}

impl Cell {
    pub fn pin(&self, name: &str) -> Option<NetId> {
        self.pins.get(name).copied()
    }

    pub fn output(&self) -> NetId {
        self.pins[self.kind.output_pin()]
    }
}

/// A validated, flattened netlist.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Netlist {
    pub name: String,
    pub inputs: Vec<PortBit>,
    pub outputs: Vec<PortBit>,
    pub nets: Vec<String>,
    pub cells: Vec<Cell>,
    pub clock: Option<NetId>,
    pub reset: Option<NetId>,
}

/// Who drives a net.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Driver {
    Input(usize),
    Cell(usize),
}

impl Netlist {
    /// Checks every structural invariant and returns the netlist unchanged
    /// if they all hold.
    pub fn validated(self) -> Result<Self, NetlistError> {
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), NetlistError> {
        let num_nets = self.nets.len();
        let check_net = |net: NetId, what: &dyn Fn() -> String| {
            if net.index() < num_nets {
                Ok(())
            } else {
                Err(NetlistError::UnknownNet(what()))
            }
        };

        let mut seen_names = std::collections::HashSet::new();
        for name in &self.nets {
            if !seen_names.insert(name.as_str()) {
                return Err(NetlistError::DuplicateName(name.clone()));
            }
        }

        let mut port_bits = std::collections::HashSet::new();
        for bit in self.inputs.iter().chain(&self.outputs) {
            if !port_bits.insert((bit.name.as_str(), bit.index)) {
                return Err(NetlistError::DuplicateName(format!(
                    "{}[{}]",
                    bit.name, bit.index
                )));
            }
            check_net(bit.net, &|| format!("port {}[{}]", bit.name, bit.index))?;
        }

        let mut cell_ids = std::collections::HashSet::new();
        for cell in &self.cells {
            if !cell_ids.insert(cell.id.as_str()) {
                return Err(NetlistError::DuplicateName(cell.id.clone()));
            }
            match cell.kind {
                CellKind::Lut(k) if !(1..=6).contains(&k) => {
                    return Err(NetlistError::UnsupportedCell {
                        kind: format!("LUT{k}"),
                        cell: cell.id.clone(),
                    });
                }
                CellKind::Lut(k) => match &cell.init {
                    Some(mask) if mask.inputs() == k as usize => {}
                    Some(mask) => {
                        return Err(NetlistError::InitWidth {
                            cell: cell.id.clone(),
                            expected: 1 << k,
                            found: mask.len(),
                        })
                    }
                    None => {
                        return Err(NetlistError::MissingInit(cell.id.clone()));
                    }
                },
                _ if cell.init.is_some() => {
                    return Err(NetlistError::UnexpectedInit(cell.id.clone()));
                }
                _ => {}
            }
            let kind = cell.kind;
            for pin in cell.pins.keys() {
                let known = pin == kind.output_pin() || kind.input_pins().contains(&pin.as_str());
                if !known {
                    return Err(NetlistError::UnknownPin {
                        cell: cell.id.clone(),
                        pin: pin.clone(),
                    });
                }
            }
            for pin in kind.input_pins().iter().chain([&kind.output_pin()]) {
                match cell.pins.get(*pin) {
                    Some(net) => check_net(*net, &|| format!("{}.{}", cell.id, pin))?,
                    None if kind.is_optional_pin(pin) => {}
                    None => {
                        return Err(NetlistError::UnconnectedPin {
                            cell: cell.id.clone(),
                            pin: pin.to_string(),
                        })
                    }
                }
            }
        }

        let drivers = self.drivers_unchecked()?;
        for (net, driver) in drivers.iter().enumerate() {
            if driver.is_none() {
                return Err(NetlistError::UndrivenNet(self.nets[net].clone()));
            }
        }

        for (what, net) in [("clock", self.clock), ("reset", self.reset)] {
            if let Some(net) = net {
                check_net(net, &|| what.to_string())?;
                if !self.inputs.iter().any(|p| p.net == net) {
                    return Err(NetlistError::NotAnInput {
                        role: what,
                        net: self.nets[net.index()].clone(),
                    });
                }
            }
        }
        if self.clock.is_some() && self.clock == self.reset {
            return Err(NetlistError::NotAnInput {
                role: "reset",
                net: self.nets[self.reset.unwrap().index()].clone(),
            });
        }
        Ok(())
    }

    fn drivers_unchecked(&self) -> Result<Vec<Option<Driver>>, NetlistError> {
        let mut drivers: Vec<Option<Driver>> = vec![None; self.nets.len()];
        let mut claim = |net: NetId, d: Driver| {
            let slot = &mut drivers[net.index()];
            if slot.is_some() {
                return Err(NetlistError::MultipleDrivers(self.nets[net.index()].clone()));
            }
            *slot = Some(d);
            Ok(())
        };
        for (i, bit) in self.inputs.iter().enumerate() {
            claim(bit.net, Driver::Input(i))?;
        }
        for (i, cell) in self.cells.iter().enumerate() {
            claim(cell.output(), Driver::Cell(i))?;
        }
        Ok(drivers)
    }

    /// Driver of every net, indexed by [`NetId`].
    pub fn drivers(&self) -> Vec<Driver> {
        self.drivers_unchecked()
            .expect("validated netlist")
            .into_iter()
            .map(|d| d.expect("validated netlist"))
            .collect()
    }

    pub fn net_name(&self, net: NetId) -> &str {
        &self.nets[net.index()]
    }

    pub fn net_by_name(&self, name: &str) -> Option<NetId> {
        self.nets
            .iter()
            .position(|n| n == name)
            .map(|i| NetId(i as u32))
    }

    pub fn cell_by_id(&self, id: &str) -> Option<usize> {
        self.cells.iter().position(|c| c.id == id)
    }

    pub fn num_luts(&self) -> usize {
        self.cells.iter().filter(|c| c.kind.is_lut()).count()
    }

    pub fn num_dffs(&self) -> usize {
        self.cells.iter().filter(|c| c.kind.is_sequential()).count()
    }

    /// Display names of the output bits: `name` for single-bit ports declared
    /// at index 0, `name[i]` otherwise.
    pub fn output_names(&self) -> Vec<String> {
        port_display_names(&self.outputs)
    }

    pub fn input_names(&self) -> Vec<String> {
        port_display_names(&self.inputs)
    }
}

pub(crate) fn port_display_names(bits: &[PortBit]) -> Vec<String> {
    bits.iter()
        .map(|bit| {
            let width = bits.iter().filter(|b| b.name == bit.name).count();
            if width == 1 && bit.index == 0 {
                bit.name.clone()
            } else {
                format!("{}[{}]", bit.name, bit.index)
            }
        })
        .collect()
}

/// Incremental netlist construction keyed by net names. Used by the parsers,
/// the synthetic circuit generator and tests.
#[derive(Debug, Default)]
pub struct NetlistBuilder {
    name: String,
    inputs: Vec<PortBit>,
    outputs: Vec<PortBit>,
    nets: Vec<String>,
    net_ids: std::collections::HashMap<String, NetId>,
    cells: Vec<Cell>,
    clock: Option<NetId>,
    reset: Option<NetId>,
}

impl NetlistBuilder {
    pub fn new(name: impl Into<String>) -> Self {
        NetlistBuilder {
            name: name.into(),
            ..Default::default()
        }
    }

    /// Returns the id of the named net, creating it if needed.
    pub fn net(&mut self, name: &str) -> NetId {
        if let Some(id) = self.net_ids.get(name) {
            return *id;
        }
        let id = NetId(self.nets.len() as u32);
        self.nets.push(name.to_string());
        self.net_ids.insert(name.to_string(), id);
        id
    }

    pub fn has_net(&self, name: &str) -> bool {
        self.net_ids.contains_key(name)
    }

    pub fn input(&mut self, name: &str, index: u32, net: &str) -> NetId {
        let net = self.net(net);
        self.inputs.push(PortBit {
            name: name.to_string(),
            index,
            net,
        });
        net
    }

    pub fn output(&mut self, name: &str, index: u32, net: &str) -> NetId {
        let net = self.net(net);
        self.outputs.push(PortBit {
            name: name.to_string(),
            index,
            net,
        });
        net
    }

    pub fn lut(&mut self, id: &str, init: InitMask, inputs: &[&str], output: &str) -> &mut Self {
        let mut pins = BTreeMap::new();
        for (i, net) in inputs.iter().enumerate() {
            pins.insert(format!("I{i}"), self.net(net));
        }
        pins.insert("O".to_string(), self.net(output));
        self.cells.push(Cell {
            id: id.to_string(),
            kind: CellKind::Lut(inputs.len() as u8),
            init: Some(init),
            ff_init: false,
            pins,
        });
        self
    }

    /// Flip-flop with clock enable and reset nets; the clock pin is left to
    /// the implicit global clock.
    pub fn dff(&mut self, id: &str, d: &str, ce: &str, r: &str, q: &str, init: bool) -> &mut Self {
        let pins = BTreeMap::from([
            ("D".to_string(), self.net(d)),
            ("CE".to_string(), self.net(ce)),
            ("R".to_string(), self.net(r)),
            ("Q".to_string(), self.net(q)),
        ]);
        self.cells.push(Cell {
            id: id.to_string(),
            kind: CellKind::Dff,
            init: None,
            ff_init: init,
            pins,
        });
        self
    }

    pub fn simple(&mut self, id: &str, kind: CellKind, input: Option<&str>, output: &str) -> &mut Self {
        let mut pins = BTreeMap::new();
        if let Some(input) = input {
            pins.insert("I".to_string(), self.net(input));
        }
        pins.insert("O".to_string(), self.net(output));
        self.cells.push(Cell {
            id: id.to_string(),
            kind,
            init: None,
            ff_init: false,
            pins,
        });
        self
    }

    pub fn cell(&mut self, cell: Cell) -> &mut Self {
        self.cells.push(cell);
        self
    }

    pub fn cells_mut(&mut self) -> &mut Vec<Cell> {
        &mut self.cells
    }

    pub fn set_clock(&mut self, net: &str) -> &mut Self {
        self.clock = Some(self.net(net));
        self
    }

    pub fn set_reset(&mut self, net: &str) -> &mut Self {
        self.reset = Some(self.net(net));
        self
    }

    /// Builds without validating. Callers that need the invariants use
    /// [`NetlistBuilder::build`].
    pub fn finish(self) -> Netlist {
        Netlist {
            name: self.name,
            inputs: self.inputs,
            outputs: self.outputs,
            nets: self.nets,
            cells: self.cells,
            clock: self.clock,
            reset: self.reset,
        }
    }

    pub fn build(self) -> Result<Netlist, NetlistError> {
        self.finish().validated()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xor() -> NetlistBuilder {
        let mut b = NetlistBuilder::new("xor");
        b.input("a", 0, "a");
        b.input("b", 0, "b");
        b.output("y", 0, "y");
        b.lut("x", InitMask::from_u64(2, 0x6), &["a", "b"], "y");
        b
    }

    #[test]
    fn valid_netlist_passes() {
        let n = xor().build().unwrap();
        assert_eq!(n.num_luts(), 1);
        assert_eq!(n.output_names(), vec!["y"]);
    }

    #[test]
    fn two_drivers_rejected() {
        let mut b = xor();
        b.simple("buf", CellKind::Buf, Some("a"), "y");
        assert!(matches!(b.build(), Err(NetlistError::MultipleDrivers(n)) if n == "y"));
    }

    #[test]
    fn undriven_net_rejected() {
        let mut b = xor();
        b.simple("buf", CellKind::Buf, Some("floating"), "z");
        assert!(matches!(b.build(), Err(NetlistError::UndrivenNet(n)) if n == "floating"));
    }

    #[test]
    fn missing_pin_rejected() {
        let mut b = NetlistBuilder::new("t");
        b.input("a", 0, "a");
        b.output("y", 0, "y");
        b.lut("l", InitMask::from_u64(2, 0x6), &["a"], "y");
        // LUT1 with a LUT2-sized mask
        assert!(matches!(b.build(), Err(NetlistError::InitWidth { .. })));

        let mut cells = xor();
        cells.cells_mut()[0].pins.remove("I1");
        cells.cells_mut()[0].kind = CellKind::Lut(2);
        assert!(matches!(
            cells.build(),
            Err(NetlistError::UnconnectedPin { pin, .. }) if pin == "I1"
        ));
    }

    #[test]
    fn multibit_names() {
        let mut b = NetlistBuilder::new("t");
        b.input("a", 1, "a[1]");
        b.input("a", 0, "a[0]");
        b.output("y", 0, "y");
        b.simple("g", CellKind::Const0, None, "y");
        let n = b.build().unwrap();
        assert_eq!(n.input_names(), vec!["a[1]", "a[0]"]);
    }
}
