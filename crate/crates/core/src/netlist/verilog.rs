//! Structural Verilog reader for flattened post-synthesis netlists.
//!
//! Accepted subset:
//!
//! ```text
//! module NAME ( port, ... ) ;            // or ANSI: ( input [3:0] a, output y )
//!   input|output|wire [msb:lsb] name, ... ;
//!   assign lhs = rhs ;                    // becomes a BUF (or CONST) cell
//!   KIND #( .PARAM(literal), ... ) inst ( .PIN(net), ... ) ;
//! endmodule
//! ```
//!
//! Nets are scalar identifiers, escaped identifiers, bit selects `name[i]` or
//! the constants `1'b0`/`1'b1`. Comments, `(* ... *)` attributes and
//! backtick directives are skipped. Vendor primitives are mapped onto the
//! supported cell set (see [`map_kind`]).

use std::collections::{BTreeMap, HashMap};

use super::{Cell, CellKind, Driver, InitMask, NetId, Netlist, NetlistBuilder, NetlistError};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    /// A numeric literal, sized or not, kept verbatim.
    Number(String),
    Punct(char),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer {
            src: text.as_bytes(),
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn peek(&self, off: usize) -> Option<u8> {
        self.src.get(self.pos + off).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek(0)?;
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn err(&self, expected: &str) -> NetlistError {
        NetlistError::Syntax {
            line: self.line,
            col: self.col,
            expected: expected.to_string(),
        }
    }

    fn skip_trivia(&mut self) -> Result<(), NetlistError> {
        loop {
            match (self.peek(0), self.peek(1)) {
                (Some(c), _) if c.is_ascii_whitespace() => {
                    self.bump();
                }
                (Some(b'/'), Some(b'/')) | (Some(b'`'), _) => {
                    while let Some(c) = self.peek(0) {
                        if c == b'\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                (Some(b'/'), Some(b'*')) => self.skip_block(b'/', "end of comment `*/`")?,
                (Some(b'('), Some(b'*')) if self.peek(2) != Some(b')') => {
                    self.skip_block(b')', "end of attribute `*)`")?
                }
                _ => return Ok(()),
            }
        }
    }

    /// Skips `/* ... */` or `(* ... *)`.
    fn skip_block(&mut self, close: u8, expected: &str) -> Result<(), NetlistError> {
        self.bump();
        self.bump();
        loop {
            match (self.peek(0), self.peek(1)) {
                (Some(b'*'), Some(c)) if c == close => {
                    self.bump();
                    self.bump();
                    return Ok(());
                }
                (Some(_), _) => {
                    self.bump();
                }
                (None, _) => return Err(self.err(expected)),
            }
        }
    }

    fn tokens(mut self) -> Result<Vec<Token>, NetlistError> {
        let mut out = Vec::new();
        loop {
            self.skip_trivia()?;
            let (line, col) = (self.line, self.col);
            let Some(c) = self.peek(0) else {
                return Ok(out);
            };
            let tok = if c == b'\\' {
                self.bump();
                let start = self.pos;
                while matches!(self.peek(0), Some(c) if !c.is_ascii_whitespace()) {
                    self.bump();
                }
                if self.pos == start {
                    return Err(self.err("escaped identifier"));
                }
                Tok::Ident(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
            } else if c.is_ascii_alphabetic() || c == b'_' || c == b'$' {
                let start = self.pos;
                while matches!(self.peek(0), Some(c) if c.is_ascii_alphanumeric() || c == b'_' || c == b'$') {
                    self.bump();
                }
                Tok::Ident(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
            } else if c.is_ascii_digit() || c == b'\'' {
                let start = self.pos;
                while matches!(self.peek(0), Some(c) if c.is_ascii_digit() || c == b'_') {
                    self.bump();
                }
                if self.peek(0) == Some(b'\'') {
                    self.bump();
                    if matches!(self.peek(0), Some(b's' | b'S')) {
                        self.bump();
                    }
                    if !matches!(self.peek(0), Some(b'h' | b'H' | b'b' | b'B' | b'd' | b'D' | b'o' | b'O')) {
                        return Err(self.err("radix (h, b, d or o)"));
                    }
                    self.bump();
                    while matches!(self.peek(0), Some(c) if c.is_ascii_whitespace()) {
                        self.bump();
                    }
                    let digits = self.pos;
                    while matches!(self.peek(0), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
                        self.bump();
                    }
                    if self.pos == digits {
                        return Err(self.err("literal digits"));
                    }
                }
                let text: String = String::from_utf8_lossy(&self.src[start..self.pos])
                    .chars()
                    .filter(|c| !c.is_whitespace())
                    .collect();
                Tok::Number(text)
            } else if b"()[]{},;.#:=".contains(&c) {
                self.bump();
                Tok::Punct(c as char)
            } else {
                return Err(self.err("identifier, literal or punctuation"));
            };
            out.push(Token { tok, line, col });
        }
    }
}

/// A parsed Verilog number: bit width (if sized) and value bits, LSB first.
#[derive(Debug, Clone, PartialEq)]
struct Literal {
    width: Option<usize>,
    bits: Vec<bool>,
}

fn parse_literal(text: &str) -> Option<Literal> {
    let Some(tick) = text.find('\'') else {
        let value: u64 = text.replace('_', "").parse().ok()?;
        let bits = (0..64).map(|i| (value >> i) & 1 == 1).collect();
        return Some(Literal { width: None, bits });
    };
    let width = if tick == 0 {
        None
    } else {
        Some(text[..tick].replace('_', "").parse::<usize>().ok()?)
    };
    let mut rest = &text[tick + 1..];
    if rest.starts_with(['s', 'S']) {
        rest = &rest[1..];
    }
    let radix = rest.chars().next()?.to_ascii_lowercase();
    let digits: Vec<char> = rest[1..].chars().filter(|&c| c != '_').collect();
    let mut bits = Vec::new();
    match radix {
        'h' | 'b' | 'o' => {
            let per_digit = match radix {
                'h' => 4,
                'o' => 3,
                _ => 1,
            };
            for &d in digits.iter().rev() {
                let v = d.to_digit(1 << per_digit)?;
                for i in 0..per_digit {
                    bits.push((v >> i) & 1 == 1);
                }
            }
        }
        'd' => {
            let s: String = digits.iter().collect();
            let value: u64 = s.parse().ok()?;
            bits = (0..64).map(|i| (value >> i) & 1 == 1).collect();
        }
        _ => return None,
    }
    if let Some(w) = width {
        if bits.len() > w {
            if bits[w..].iter().any(|&b| b) {
                return None;
            }
            bits.truncate(w);
        }
        bits.resize(w, false);
    }
    Some(Literal { width, bits })
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Dir {
    Input,
    Output,
    Wire,
}

#[derive(Debug, Clone)]
struct Decl {
    dir: Dir,
    /// Declared range (left, right), if any.
    range: Option<(i64, i64)>,
}

impl Decl {
    /// Bit indices in declaration order (left bound first).
    fn indices(&self) -> Vec<i64> {
        match self.range {
            None => vec![0],
            Some((l, r)) if l >= r => (r..=l).rev().collect(),
            Some((l, r)) => (l..=r).collect(),
        }
    }
}

/// A reference to one bit: a named net or a constant.
#[derive(Debug, Clone, PartialEq)]
enum BitRef {
    Net(String),
    Const(bool),
}

struct Instance {
    kind: String,
    name: String,
    params: Vec<(String, Literal, usize, usize)>,
    conns: Vec<(String, Option<BitRef>)>,
    line: usize,
    col: usize,
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    eof: (usize, usize),
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .map(|t| (t.line, t.col))
            .unwrap_or(self.eof)
    }

    fn err(&self, expected: &str) -> NetlistError {
        let (line, col) = self.here();
        NetlistError::Syntax {
            line,
            col,
            expected: expected.to_string(),
        }
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.tok.clone());
        self.pos += 1;
        t
    }

    fn punct(&mut self, c: char) -> Result<(), NetlistError> {
        if self.peek() == Some(&Tok::Punct(c)) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(&format!("`{c}`")))
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Punct(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, NetlistError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.err(what)),
        }
    }

    fn keyword(&mut self, kw: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Ident(s)) if s == kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn integer(&mut self) -> Result<i64, NetlistError> {
        match self.peek() {
            Some(Tok::Number(s)) if !s.contains('\'') => {
                let v = s.replace('_', "").parse().map_err(|_| self.err("integer"))?;
                self.pos += 1;
                Ok(v)
            }
            _ => Err(self.err("integer")),
        }
    }

    fn range(&mut self) -> Result<Option<(i64, i64)>, NetlistError> {
        if !self.eat('[') {
            return Ok(None);
        }
        let l = self.integer()?;
        self.punct(':')?;
        let r = self.integer()?;
        self.punct(']')?;
        Ok(Some((l, r)))
    }

    fn bit_ref(&mut self) -> Result<BitRef, NetlistError> {
        match self.peek().cloned() {
            Some(Tok::Number(s)) => {
                let lit = parse_literal(&s).ok_or_else(|| self.err("1-bit constant"))?;
                if lit.width != Some(1) {
                    return Err(self.err("1-bit constant such as 1'b0"));
                }
                self.pos += 1;
                Ok(BitRef::Const(lit.bits[0]))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if self.eat('[') {
                    let idx = self.integer()?;
                    self.punct(']')?;
                    Ok(BitRef::Net(format!("{name}[{idx}]")))
                } else {
                    Ok(BitRef::Net(name))
                }
            }
            _ => Err(self.err("net reference")),
        }
    }
}

/// Maps a primitive name to the supported cell kind and a pin renaming.
fn map_kind(kind: &str) -> Option<(CellKind, &'static [(&'static str, &'static str)])> {
    const SAME: &[(&str, &str)] = &[];
    Some(match kind {
        "LUT1" | "LUT2" | "LUT3" | "LUT4" | "LUT5" | "LUT6" => {
            (CellKind::Lut(kind.as_bytes()[3] - b'0'), SAME)
        }
        "FDRE" | "DFF" => (CellKind::Dff, SAME),
        "IBUF" | "OBUF" | "BUFG" | "BUF" => (CellKind::Buf, SAME),
        "INV" | "NOT" => (CellKind::Not, SAME),
        "GND" => (CellKind::Const0, &[("G", "O")]),
        "VCC" => (CellKind::Const1, &[("P", "O")]),
        "CONST0" => (CellKind::Const0, SAME),
        "CONST1" => (CellKind::Const1, SAME),
        _ => return None,
    })
}

const INVERSION_PARAMS: [&str; 4] = ["IS_C_INVERTED", "IS_D_INVERTED", "IS_R_INVERTED", "IS_CE_INVERTED"];

/// Parses a flattened structural Verilog module into a validated [`Netlist`].
pub fn parse_verilog(text: &str) -> Result<Netlist, NetlistError> {
    let toks = Lexer::new(text).tokens()?;
    let eof = {
        let line = text.lines().count().max(1);
        let col = text.lines().last().map(|l| l.len() + 1).unwrap_or(1);
        (line, col)
    };
    let mut p = Parser { toks, pos: 0, eof };

    if !p.keyword("module") {
        return Err(p.err("`module`"));
    }
    let name = p.ident("module name")?;
    let mut port_order: Vec<String> = Vec::new();
    let mut decls: HashMap<String, Decl> = HashMap::new();

    if p.eat('(') {
        if !p.eat(')') {
            loop {
                let dir = if p.keyword("input") {
                    Some(Dir::Input)
                } else if p.keyword("output") {
                    Some(Dir::Output)
                } else if matches!(p.peek(), Some(Tok::Ident(s)) if s == "inout") {
                    return Err(p.err("input or output (inout ports are not supported)"));
                } else {
                    None
                };
                if let Some(dir) = dir {
                    p.keyword("wire");
                    let range = p.range()?;
                    let port = p.ident("port name")?;
                    decls.insert(port.clone(), Decl { dir, range });
                    port_order.push(port);
                    // Further names share the direction until the next keyword.
                    while matches!(p.toks.get(p.pos + 1).map(|t| &t.tok), Some(Tok::Ident(s)) if s != "input" && s != "output")
                        && p.peek() == Some(&Tok::Punct(','))
                    {
                        p.pos += 1;
                        let port = p.ident("port name")?;
                        decls.insert(port.clone(), Decl { dir, range });
                        port_order.push(port);
                    }
                } else {
                    port_order.push(p.ident("port name")?);
                }
                if p.eat(')') {
                    break;
                }
                p.punct(',')?;
            }
        }
    }
    p.punct(';')?;

    let mut instances: Vec<Instance> = Vec::new();
    let mut assigns: Vec<(BitRef, BitRef, usize, usize)> = Vec::new();
    loop {
        let (line, col) = p.here();
        let Some(tok) = p.peek().cloned() else {
            return Err(p.err("`endmodule`"));
        };
        let Tok::Ident(word) = tok else {
            return Err(p.err("declaration, assignment or instance"));
        };
        match word.as_str() {
            "endmodule" => {
                p.pos += 1;
                break;
            }
            "input" | "output" | "wire" => {
                p.pos += 1;
                let dir = match word.as_str() {
                    "input" => Dir::Input,
                    "output" => Dir::Output,
                    _ => Dir::Wire,
                };
                if dir != Dir::Wire {
                    p.keyword("wire");
                }
                let range = p.range()?;
                loop {
                    let n = p.ident("net name")?;
                    let prev = decls.get(&n).map(|d| d.dir);
                    // `output y; wire y;` keeps the port direction
                    if !(dir == Dir::Wire && prev.is_some()) {
                        decls.insert(n, Decl { dir, range });
                    }
                    if !p.eat(',') {
                        break;
                    }
                }
                p.punct(';')?;
            }
            "inout" | "reg" | "always" | "initial" | "generate" | "function" | "task" => {
                return Err(p.err(&format!("structural item (`{word}` is not supported)")));
            }
            "assign" => {
                p.pos += 1;
                let lhs = p.bit_ref()?;
                p.punct('=')?;
                let rhs = p.bit_ref()?;
                p.punct(';')?;
                assigns.push((lhs, rhs, line, col));
            }
            _ => {
                p.pos += 1;
                let mut params = Vec::new();
                if p.eat('#') {
                    p.punct('(')?;
                    if !p.eat(')') {
                        loop {
                            p.punct('.')?;
                            let (pl, pc) = p.here();
                            let pname = p.ident("parameter name")?;
                            p.punct('(')?;
                            let lit = match p.next() {
                                Some(Tok::Number(s)) => parse_literal(&s),
                                _ => None,
                            }
                            .ok_or_else(|| NetlistError::Syntax {
                                line: pl,
                                col: pc,
                                expected: "numeric parameter value".into(),
                            })?;
                            p.punct(')')?;
                            params.push((pname, lit, pl, pc));
                            if p.eat(')') {
                                break;
                            }
                            p.punct(',')?;
                        }
                    }
                }
                let inst = p.ident("instance name")?;
                p.punct('(')?;
                let mut conns = Vec::new();
                if !p.eat(')') {
                    loop {
                        if !p.eat('.') {
                            return Err(p.err("named port connection `.PIN(net)`"));
                        }
                        let pin = p.ident("pin name")?;
                        p.punct('(')?;
                        let net = if p.eat(')') {
                            None
                        } else {
                            let r = p.bit_ref()?;
                            p.punct(')')?;
                            Some(r)
                        };
                        conns.push((pin, net));
                        if p.eat(')') {
                            break;
                        }
                        p.punct(',')?;
                    }
                }
                p.punct(';')?;
                instances.push(Instance {
                    kind: word,
                    name: inst,
                    params,
                    conns,
                    line,
                    col,
                });
            }
        }
    }
    if p.peek().is_some() {
        return Err(p.err("end of input (one module per file)"));
    }

    build(name, &port_order, &decls, instances, assigns)
}

fn build(
    name: String,
    port_order: &[String],
    decls: &HashMap<String, Decl>,
    instances: Vec<Instance>,
    assigns: Vec<(BitRef, BitRef, usize, usize)>,
) -> Result<Netlist, NetlistError> {
    let mut b = NetlistBuilder::new(name);

    for port in port_order {
        let decl = decls.get(port).ok_or_else(|| NetlistError::Schema {
            path: format!("port {port}"),
            reason: "port has no input/output declaration".into(),
        })?;
        let bus = decl.range.is_some();
        for idx in decl.indices() {
            let net = if bus { format!("{port}[{idx}]") } else { port.clone() };
            match decl.dir {
                Dir::Input => b.input(port, idx as u32, &net),
                Dir::Output => b.output(port, idx as u32, &net),
                Dir::Wire => {
                    return Err(NetlistError::Schema {
                        path: format!("port {port}"),
                        reason: "port has no input/output declaration".into(),
                    })
                }
            };
        }
    }

    let is_bus = |n: &str| decls.get(n).is_some_and(|d| d.range.is_some());
    let const_net = |b: &mut NetlistBuilder, v: bool| -> String {
        let net = if v { "$const1" } else { "$const0" };
        if !b.has_net(net) {
            let kind = if v { CellKind::Const1 } else { CellKind::Const0 };
            b.simple(net, kind, None, net);
        }
        net.to_string()
    };
    let resolve = |b: &mut NetlistBuilder, r: &BitRef, line: usize, col: usize| -> Result<NetId, NetlistError> {
        match r {
            BitRef::Const(v) => {
                let n = const_net(b, *v);
                Ok(b.net(&n))
            }
            BitRef::Net(n) if is_bus(n) => Err(NetlistError::Syntax {
                line,
                col,
                expected: format!("a single bit of bus `{n}`"),
            }),
            BitRef::Net(n) => Ok(b.net(n)),
        }
    };

    for inst in instances {
        let Some((kind, renames)) = map_kind(&inst.kind) else {
            return Err(NetlistError::UnsupportedCell {
                kind: inst.kind,
                cell: inst.name,
            });
        };
        let mut init = None;
        let mut ff_init = false;
        for (pname, lit, line, col) in &inst.params {
            match (kind, pname.as_str()) {
                (CellKind::Lut(k), "INIT") => {
                    let want = 1usize << k;
                    let mut bits = lit.bits.clone();
                    match lit.width {
                        Some(w) if w != want => {
                            return Err(NetlistError::InitWidth {
                                cell: inst.name.clone(),
                                expected: want,
                                found: w,
                            })
                        }
                        Some(_) => {}
                        None => {
                            if bits.iter().skip(want).any(|&b| b) {
                                return Err(NetlistError::InitWidth {
                                    cell: inst.name.clone(),
                                    expected: want,
                                    found: bits.len(),
                                });
                            }
                            bits.resize(want, false);
                        }
                    }
                    bits.truncate(want);
                    init = InitMask::from_bits(&bits);
                }
                (CellKind::Dff, "INIT") => {
                    if lit.bits.iter().skip(1).any(|&b| b) {
                        return Err(NetlistError::Syntax {
                            line: *line,
                            col: *col,
                            expected: "1-bit flip-flop INIT".into(),
                        });
                    }
                    ff_init = lit.bits.first().copied().unwrap_or(false);
                }
                (_, p) if INVERSION_PARAMS.contains(&p) => {
                    if lit.bits.iter().any(|&b| b) {
                        return Err(NetlistError::UnsupportedParameter {
                            cell: inst.name.clone(),
                            param: p.to_string(),
                        });
                    }
                }
                _ => {}
            }
        }
        let mut pins = BTreeMap::new();
        for (pin, net) in &inst.conns {
            let pin = renames
                .iter()
                .find(|(from, _)| from == pin)
                .map(|(_, to)| to.to_string())
                .unwrap_or_else(|| pin.clone());
            let Some(net) = net else { continue };
            let id = resolve(&mut b, net, inst.line, inst.col)?;
            if pins.insert(pin.clone(), id).is_some() {
                return Err(NetlistError::Syntax {
                    line: inst.line,
                    col: inst.col,
                    expected: format!("pin {pin} connected once on `{}`", inst.name),
                });
            }
        }
        b.cell(Cell {
            id: inst.name,
            kind,
            init,
            ff_init,
            pins,
        });
    }

    for (n, (lhs, rhs, line, col)) in assigns.into_iter().enumerate() {
        let BitRef::Net(_) = lhs else {
            return Err(NetlistError::Syntax {
                line,
                col,
                expected: "net on the left of `assign`".into(),
            });
        };
        let out = resolve(&mut b, &lhs, line, col)?;
        let id = format!("$assign{n}");
        let mut pins = BTreeMap::from([("O".to_string(), out)]);
        let kind = match rhs {
            BitRef::Const(false) => CellKind::Const0,
            BitRef::Const(true) => CellKind::Const1,
            BitRef::Net(_) => {
                pins.insert("I".to_string(), resolve(&mut b, &rhs, line, col)?);
                CellKind::Buf
            }
        };
        b.cell(Cell {
            id,
            kind,
            init: None,
            ff_init: false,
            pins,
        });
    }

    let mut netlist = b.finish();
    netlist.validate()?;
    infer_clock_and_reset(&mut netlist);
    Ok(netlist)
}

/// Follows buffer chains back from `net` to its source net.
pub(crate) fn buffer_root(netlist: &Netlist, drivers: &[Driver], mut net: NetId) -> NetId {
    for _ in 0..=netlist.cells.len() {
        match drivers[net.index()] {
            Driver::Cell(c) if netlist.cells[c].kind == CellKind::Buf => {
                net = netlist.cells[c].pins["I"];
            }
            _ => break,
        }
    }
    net
}

/// Marks the module input feeding every flip-flop clock (resp. every
/// flip-flop reset) through buffers as the netlist clock (resp. reset).
fn infer_clock_and_reset(netlist: &mut Netlist) {
    let drivers = netlist.drivers();
    let common_root = |pin: &str| -> Option<NetId> {
        let mut root = None;
        for cell in netlist.cells.iter().filter(|c| c.kind == CellKind::Dff) {
            let r = buffer_root(netlist, &drivers, cell.pin(pin)?);
            if root.is_some_and(|x| x != r) {
                return None;
            }
            root = Some(r);
        }
        root.filter(|r| matches!(drivers[r.index()], Driver::Input(_)))
    };
    let clock = common_root("C");
    let reset = common_root("R");
    netlist.clock = clock;
    if reset != clock {
        netlist.reset = reset;
    }
}
