//! Single-LUT function-inversion faults.

use thiserror::Error;

use crate::netlist::{CellKind, Netlist};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FaultError {
    #[error("no LUT cell `{0}` in the netlist")]
    UnknownCell(String),
}

/// One faulty variant: the named LUT computes the complement of its
/// programmed function.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FaultSpec {
    /// Index of the LUT in [`Netlist::cells`].
    pub cell: usize,
    pub label: String,
    pub kind: CellKind,
}

/// Exactly one fault per LUT, in declaration order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FaultUniverse {
    pub faults: Vec<FaultSpec>,
}

impl FaultUniverse {
    pub fn len(&self) -> usize {
        self.faults.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faults.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, FaultSpec> {
        self.faults.iter()
    }

    /// Every `stride`-th fault, starting with the first.
    pub fn subsample(&self, stride: usize) -> FaultUniverse {
        FaultUniverse {
            faults: self.faults.iter().step_by(stride.max(1)).cloned().collect(),
        }
    }

    /// CSV listing `index,cell_id,kind`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("index,cell_id,kind\n");
        for (i, f) in self.faults.iter().enumerate() {
            s.push_str(&format!("{i},{},{}\n", f.label, f.kind));
        }
        s
    }
}

pub fn enumerate_faults(n: &Netlist) -> FaultUniverse {
    FaultUniverse {
        faults: n
            .cells
            .iter()
            .enumerate()
            .filter(|(_, c)| c.kind.is_lut())
            .map(|(i, c)| FaultSpec {
                cell: i,
                label: c.id.clone(),
                kind: c.kind,
            })
            .collect(),
    }
}

/// Looks up the fault for the LUT named `id`.
pub fn fault_for(n: &Netlist, id: &str) -> Result<FaultSpec, FaultError> {
    let cell = n
        .cell_by_id(id)
        .filter(|&i| n.cells[i].kind.is_lut())
        .ok_or_else(|| FaultError::UnknownCell(id.to_string()))?;
    Ok(FaultSpec {
        cell,
        label: id.to_string(),
        kind: n.cells[cell].kind,
    })
}

/// A copy of `n` whose target LUT has a complemented truth table.
pub fn apply_fault(n: &Netlist, f: &FaultSpec) -> Result<Netlist, FaultError> {
    let mut out = n.clone();
    let cell = out
        .cells
        .get_mut(f.cell)
        .filter(|c| c.id == f.label && c.kind.is_lut())
        .ok_or_else(|| FaultError::UnknownCell(f.label.clone()))?;
    cell.init = cell.init.map(|m| m.complement());
    Ok(out)
}
