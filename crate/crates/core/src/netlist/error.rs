use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetlistError {
    #[error("syntax error at {line}:{col}: expected {expected}")]
    Syntax {
        line: usize,
        col: usize,
        expected: String,
    },
    #[error("unsupported cell kind {kind} (cell `{cell}`)")]
    UnsupportedCell { kind: String, cell: String },
    #[error("unsupported parameter {param} on cell `{cell}`")]
    UnsupportedParameter { cell: String, param: String },
    #[error("pin {pin} of cell `{cell}` is unconnected")]
    UnconnectedPin { cell: String, pin: String },
    #[error("cell `{cell}` has no pin named {pin}")]
    UnknownPin { cell: String, pin: String },
    #[error("net `{0}` has multiple drivers")]
    MultipleDrivers(String),
    #[error("net `{0}` has no driver")]
    UndrivenNet(String),
    #[error("reference to unknown net ({0})")]
    UnknownNet(String),
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("LUT `{cell}` needs a {expected}-bit INIT, found {found} bits")]
    InitWidth {
        cell: String,
        expected: usize,
        found: usize,
    },
    #[error("LUT `{0}` has no INIT")]
    MissingInit(String),
    #[error("non-LUT cell `{0}` carries an INIT mask")]
    UnexpectedInit(String),
    #[error("{role} net `{net}` is not a distinct module input")]
    NotAnInput { role: &'static str, net: String },
    #[error("schema error at {path}: {reason}")]
    Schema { path: String, reason: String },
}

/// Coarse classification used for CLI exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Syntax,
    Unsupported,
    Connectivity,
    Schema,
}

impl NetlistError {
    pub fn class(&self) -> ErrorClass {
        use NetlistError::*;
        match self {
            Syntax { .. } => ErrorClass::Syntax,
            UnsupportedCell { .. } | UnsupportedParameter { .. } => ErrorClass::Unsupported,
            UnconnectedPin { .. }
            | UnknownPin { .. }
            | MultipleDrivers(_)
            | UndrivenNet(_)
            | UnknownNet(_)
            | NotAnInput { .. } => ErrorClass::Connectivity,
            DuplicateName(_) | InitWidth { .. } | MissingInit(_) | UnexpectedInit(_) | Schema { .. } => {
                ErrorClass::Schema
            }
        }
    }
}
