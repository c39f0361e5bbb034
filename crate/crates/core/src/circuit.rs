//! Circuit representation, the built-in gate set with cached
//! classifications, and the text format frontend.
//!
//! The input format is a small OpenQASM-like language: a single `qreg`
//! declaration followed by gate statements, `measure q[i];` (which joins both
//! outcomes) and the nonstandard `project q[i] -> 0|1|+|-;` for projections.
//! Comments run from `//` to the end of the line.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Mutex;

use ndarray::Array2;
use num_complex::Complex64;
use once_cell::sync::Lazy;
use thiserror::Error;

use crate::pauli::{classify_gate, GateAction, Matrix, PauliLetter};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("unknown gate `{name}` at {line}:{col}")]
    UnknownGate { line: usize, col: usize, name: String },
    #[error("index {index} out of range for register of size {size} at {line}:{col}")]
    IndexOutOfRange { line: usize, col: usize, index: usize, size: usize },
    #[error("gate `{name}` expects {expected} target(s), got {got} at {line}:{col}")]
    Arity { line: usize, col: usize, name: String, expected: usize, got: usize },
    #[error("duplicate target at {line}:{col}")]
    DuplicateTarget { line: usize, col: usize },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CircuitError {
    #[error("gate `{0}` is not a built-in unitary")]
    UnsupportedGate(String),
    #[error("operation requires a unitary-only circuit, found `{0}`")]
    NonUnitary(String),
}

/// Projection outcome of a single qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Projection {
    Zero,
    One,
    Plus,
    Minus,
}

impl Projection {
    /// Measurement basis letter and sign exponent (0 or 2) of the projector
    /// (I + i^sign * letter)/2.
    pub fn pauli_parts(self) -> (PauliLetter, u8) {
        match self {
            Projection::Zero => (PauliLetter::Z, 0),
            Projection::One => (PauliLetter::Z, 2),
            Projection::Plus => (PauliLetter::X, 0),
            Projection::Minus => (PauliLetter::X, 2),
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Projection::Zero => '0',
            Projection::One => '1',
            Projection::Plus => '+',
            Projection::Minus => '-',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateKind {
    Unitary,
    MeasureBoth,
    Project(Projection),
}

/// One circuit instruction.
#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub name: String,
    pub params: Vec<f64>,
    pub targets: Vec<usize>,
    pub kind: GateKind,
}

impl Gate {
    pub fn unitary(name: &str, params: Vec<f64>, targets: Vec<usize>) -> Gate {
        Gate { name: name.to_string(), params, targets, kind: GateKind::Unitary }
    }

    pub fn measure(qubit: usize) -> Gate {
        Gate {
            name: "measure".to_string(),
            params: Vec::new(),
            targets: vec![qubit],
            kind: GateKind::MeasureBoth,
        }
    }

    pub fn project(qubit: usize, outcome: Projection) -> Gate {
        Gate {
            name: "project".to_string(),
            params: Vec::new(),
            targets: vec![qubit],
            kind: GateKind::Project(outcome),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    num_qubits: usize,
    register: String,
    instructions: Vec<Gate>,
}

impl Circuit {
    pub fn new(num_qubits: usize, instructions: Vec<Gate>) -> Circuit {
        assert!(num_qubits >= 1);
        for gate in &instructions {
            assert!(gate.targets.iter().all(|&q| q < num_qubits), "target out of range");
            for (i, a) in gate.targets.iter().enumerate() {
                assert!(!gate.targets[..i].contains(a), "duplicate target");
            }
        }
        Circuit { num_qubits, register: "q".to_string(), instructions }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn register(&self) -> &str {
        &self.register
    }

    pub fn instructions(&self) -> &[Gate] {
        &self.instructions
    }

    pub fn has_measurement(&self) -> bool {
        self.instructions.iter().any(|g| g.kind != GateKind::Unitary)
    }

    /// Reversed order with every gate replaced by its adjoint.
    pub fn inverse(&self) -> Result<Circuit, CircuitError> {
        let mut instructions = Vec::with_capacity(self.instructions.len());
        for gate in self.instructions.iter().rev() {
            if gate.kind != GateKind::Unitary {
                return Err(CircuitError::NonUnitary(gate.name.clone()));
            }
            instructions.push(adjoint_gate(gate));
        }
        Ok(Circuit { num_qubits: self.num_qubits, register: self.register.clone(), instructions })
    }
}

fn adjoint_gate(gate: &Gate) -> Gate {
    match gate.name.as_str() {
        "s" => Gate::unitary("sdg", vec![], gate.targets.clone()),
        "sdg" => Gate::unitary("s", vec![], gate.targets.clone()),
        "t" => Gate::unitary("tdg", vec![], gate.targets.clone()),
        "tdg" => Gate::unitary("t", vec![], gate.targets.clone()),
        "rx" | "ry" | "rz" => Gate::unitary(
            &gate.name,
            gate.params.iter().map(|p| -p).collect(),
            gate.targets.clone(),
        ),
        _ => gate.clone(),
    }
}

/// Target count and parameter count for each built-in gate.
pub fn builtin_signature(name: &str) -> Option<(usize, usize)> {
    Some(match name {
        "i" | "x" | "y" | "z" | "h" | "s" | "sdg" | "t" | "tdg" => (1, 0),
        "cx" | "cz" | "swap" => (2, 0),
        "ccx" => (3, 0),
        "rx" | "ry" | "rz" => (1, 1),
        _ => return None,
    })
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn mat(dim: usize, entries: Vec<Complex64>) -> Matrix {
    Array2::from_shape_vec((dim, dim), entries).expect("square gate matrix")
}

/// Dense matrix of a built-in gate; slot 0 of the gate is the most
/// significant bit of the basis index.
pub fn builtin_matrix(name: &str, params: &[f64]) -> Option<Matrix> {
    let zero = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let m = match name {
        "i" => mat(2, vec![one, zero, zero, one]),
        "x" => mat(2, vec![zero, one, one, zero]),
        "y" => mat(2, vec![zero, c(0.0, -1.0), c(0.0, 1.0), zero]),
        "z" => mat(2, vec![one, zero, zero, -one]),
        "h" => {
            let s = c(1.0 / 2.0_f64.sqrt(), 0.0);
            mat(2, vec![s, s, s, -s])
        }
        "s" => mat(2, vec![one, zero, zero, c(0.0, 1.0)]),
        "sdg" => mat(2, vec![one, zero, zero, c(0.0, -1.0)]),
        "t" => mat(2, vec![one, zero, zero, Complex64::from_polar(1.0, PI / 4.0)]),
        "tdg" => mat(2, vec![one, zero, zero, Complex64::from_polar(1.0, -PI / 4.0)]),
        "rx" => {
            let half = params.first()? / 2.0;
            let (cs, sn) = (half.cos(), half.sin());
            mat(2, vec![c(cs, 0.0), c(0.0, -sn), c(0.0, -sn), c(cs, 0.0)])
        }
        "ry" => {
            let half = params.first()? / 2.0;
            let (cs, sn) = (half.cos(), half.sin());
            mat(2, vec![c(cs, 0.0), c(-sn, 0.0), c(sn, 0.0), c(cs, 0.0)])
        }
        "rz" => {
            let half = params.first()? / 2.0;
            mat(
                2,
                vec![Complex64::from_polar(1.0, -half), zero, zero, Complex64::from_polar(1.0, half)],
            )
        }
        "cx" => {
            let mut m = Array2::zeros((4, 4));
            m[(0, 0)] = one;
            m[(1, 1)] = one;
            m[(2, 3)] = one;
            m[(3, 2)] = one;
            m
        }
        "cz" => Array2::from_diag(&ndarray::arr1(&[one, one, one, -one])),
        "swap" => {
            let mut m = Array2::zeros((4, 4));
            m[(0, 0)] = one;
            m[(1, 2)] = one;
            m[(2, 1)] = one;
            m[(3, 3)] = one;
            m
        }
        "ccx" => {
            let mut m: Matrix = Array2::from_diag_elem(8, one);
            m[(6, 6)] = zero;
            m[(7, 7)] = zero;
            m[(6, 7)] = one;
            m[(7, 6)] = one;
            m
        }
        _ => return None,
    };
    Some(m)
}

type ActionKey = (String, Vec<u64>);

static ACTION_CACHE: Lazy<Mutex<HashMap<ActionKey, GateAction>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

const RZ_SNAP_TOL: f64 = 1e-12;

/// Rotations about Z at multiples of pi/2 act like the corresponding named
/// Clifford gate (the global phase cancels under conjugation).
fn rz_clifford_alias(theta: f64) -> Option<&'static str> {
    let reduced = theta.rem_euclid(2.0 * PI);
    for (angle, name) in [
        (0.0, "i"),
        (PI / 2.0, "s"),
        (PI, "z"),
        (3.0 * PI / 2.0, "sdg"),
        (2.0 * PI, "i"),
    ] {
        if (reduced - angle).abs() <= RZ_SNAP_TOL {
            return Some(name);
        }
    }
    None
}

/// The action of a built-in unitary gate: a Clifford conjugation table or a
/// Pauli-sum decomposition. Classifications are cached per gate name and
/// bitwise parameter values.
pub fn builtin_action(gate: &Gate) -> Result<GateAction, CircuitError> {
    if gate.kind != GateKind::Unitary {
        return Err(CircuitError::NonUnitary(gate.name.clone()));
    }
    let (name, params): (&str, &[f64]) = if gate.name == "rz" {
        match gate.params.first().copied().and_then(rz_clifford_alias) {
            Some(alias) => (alias, &[]),
            None => ("rz", &gate.params),
        }
    } else {
        (&gate.name, &gate.params)
    };
    let key = (name.to_string(), params.iter().map(|p| p.to_bits()).collect::<Vec<_>>());
    let mut cache = ACTION_CACHE.lock().expect("gate cache");
    if let Some(action) = cache.get(&key) {
        return Ok(action.clone());
    }
    let matrix = builtin_matrix(name, params).ok_or_else(|| CircuitError::UnsupportedGate(gate.name.clone()))?;
    let action = classify_gate(&matrix).expect("built-in gates are unitary");
    cache.insert(key, action.clone());
    Ok(action)
}

// ---------------------------------------------------------------------------
// Text format

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Ident(String),
    Number(String),
    Symbol(char),
    Arrow,
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
}

#[derive(Debug, Clone)]
struct Spanned {
    token: Token,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Lexer<'a> {
        Lexer { chars: text.chars().peekable(), line: 1, col: 1 }
    }

    fn bump(&mut self) -> Option<char> {
        let ch = self.chars.next()?;
        if ch == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(ch)
    }

    fn tokenize(mut self) -> Result<Vec<Spanned>, ParseError> {
        let mut out = Vec::new();
        while let Some(&ch) = self.chars.peek() {
            let (line, col) = (self.line, self.col);
            if ch.is_whitespace() {
                self.bump();
                continue;
            }
            if ch == '/' {
                self.bump();
                if self.chars.peek() == Some(&'/') {
                    while let Some(c) = self.bump() {
                        if c == '\n' {
                            break;
                        }
                    }
                } else {
                    out.push(Spanned { token: Token::Symbol('/'), line, col });
                }
                continue;
            }
            if ch.is_ascii_alphabetic() || ch == '_' {
                let mut ident = String::new();
                while let Some(&c) = self.chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        ident.push(c);
                        self.bump();
                    } else {
                        break;
                    }
                }
                out.push(Spanned { token: Token::Ident(ident), line, col });
                continue;
            }
            if ch.is_ascii_digit() || ch == '.' {
                let mut num = String::new();
                let mut seen_exp = false;
                while let Some(&c) = self.chars.peek() {
                    if c.is_ascii_digit() || c == '.' {
                        num.push(c);
                        self.bump();
                    } else if (c == 'e' || c == 'E') && !seen_exp {
                        seen_exp = true;
                        num.push(c);
                        self.bump();
                        if let Some(&sign @ ('+' | '-')) = self.chars.peek() {
                            num.push(sign);
                            self.bump();
                        }
                    } else {
                        break;
                    }
                }
                out.push(Spanned { token: Token::Number(num), line, col });
                continue;
            }
            if ch == '-' {
                self.bump();
                if self.chars.peek() == Some(&'>') {
                    self.bump();
                    out.push(Spanned { token: Token::Arrow, line, col });
                } else {
                    out.push(Spanned { token: Token::Symbol('-'), line, col });
                }
                continue;
            }
            if "[](),;+".contains(ch) {
                self.bump();
                out.push(Spanned { token: Token::Symbol(ch), line, col });
                continue;
            }
            return Err(ParseError::Syntax {
                line,
                col,
                message: format!("unexpected character `{ch}`"),
            });
        }
        Ok(out)
    }
}

struct Parser {
    tokens: Vec<Spanned>,
    pos: usize,
    register: Option<(String, usize)>,
}

impl Parser {
    fn peek(&self) -> Option<&Spanned> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Spanned> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn here(&self) -> (usize, usize) {
        self.tokens
            .get(self.pos.min(self.tokens.len().saturating_sub(1)))
            .map(|t| (t.line, t.col))
            .unwrap_or((1, 1))
    }

    fn expect_symbol(&mut self, sym: char) -> Result<(), ParseError> {
        match self.next() {
            Some(Spanned { token: Token::Symbol(c), .. }) if c == sym => Ok(()),
            other => Err(self.syntax_at(other, format!("expected `{sym}`"))),
        }
    }

    fn syntax_at(&self, token: Option<Spanned>, message: String) -> ParseError {
        match token {
            Some(t) => ParseError::Syntax { line: t.line, col: t.col, message },
            None => {
                let (line, col) = self.here();
                ParseError::Syntax { line, col, message: format!("{message}, found end of input") }
            }
        }
    }

    fn expect_ident(&mut self) -> Result<(String, usize, usize), ParseError> {
        match self.next() {
            Some(Spanned { token: Token::Ident(name), line, col }) => Ok((name, line, col)),
            other => Err(self.syntax_at(other, "expected identifier".to_string())),
        }
    }

    fn expect_uint(&mut self) -> Result<(usize, usize, usize), ParseError> {
        match self.next() {
            Some(Spanned { token: Token::Number(text), line, col }) => text
                .parse::<usize>()
                .map(|v| (v, line, col))
                .map_err(|_| ParseError::Syntax { line, col, message: format!("expected integer, got `{text}`") }),
            other => Err(self.syntax_at(other, "expected integer".to_string())),
        }
    }

    /// `reg[idx]` with range checking against the declared register.
    fn expect_arg(&mut self) -> Result<usize, ParseError> {
        let (name, line, col) = self.expect_ident()?;
        let (reg, size) = self
            .register
            .clone()
            .ok_or(ParseError::Syntax { line, col, message: "no qreg declared".to_string() })?;
        if name != reg {
            return Err(ParseError::Syntax { line, col, message: format!("unknown register `{name}`") });
        }
        self.expect_symbol('[')?;
        let (index, iline, icol) = self.expect_uint()?;
        self.expect_symbol(']')?;
        if index >= size {
            return Err(ParseError::IndexOutOfRange { line: iline, col: icol, index, size });
        }
        Ok(index)
    }

    /// Angle literal: a decimal number, `pi`, or `pi/k`, optionally negated.
    fn expect_param(&mut self) -> Result<f64, ParseError> {
        let mut sign = 1.0;
        while let Some(Spanned { token: Token::Symbol(c @ ('-' | '+')), .. }) = self.peek() {
            if *c == '-' {
                sign = -sign;
            }
            self.next();
        }
        match self.next() {
            Some(Spanned { token: Token::Number(text), line, col }) => {
                let value: f64 = text.parse().map_err(|_| ParseError::Syntax {
                    line,
                    col,
                    message: format!("bad number `{text}`"),
                })?;
                Ok(sign * value)
            }
            Some(Spanned { token: Token::Ident(word), line, col }) if word == "pi" => {
                let mut value = PI;
                if let Some(Spanned { token: Token::Symbol('/'), .. }) = self.peek() {
                    self.next();
                    let (div, dline, dcol) = match self.next() {
                        Some(Spanned { token: Token::Number(text), line, col }) => {
                            (text.parse::<f64>().map_err(|_| ParseError::Syntax {
                                line,
                                col,
                                message: format!("bad number `{text}`"),
                            })?, line, col)
                        }
                        other => return Err(self.syntax_at(other, "expected divisor".to_string())),
                    };
                    if div == 0.0 {
                        return Err(ParseError::Syntax {
                            line: dline,
                            col: dcol,
                            message: "division by zero".to_string(),
                        });
                    }
                    value /= div;
                }
                let _ = (line, col);
                Ok(sign * value)
            }
            other => Err(self.syntax_at(other, "expected angle".to_string())),
        }
    }
}

/// Parse circuit source text.
pub fn parse(text: &str) -> Result<Circuit, ParseError> {
    let tokens = Lexer::new(text).tokenize()?;
    let mut parser = Parser { tokens, pos: 0, register: None };
    let mut instructions = Vec::new();

    while let Some(spanned) = parser.peek().cloned() {
        let (line, col) = (spanned.line, spanned.col);
        let Token::Ident(word) = spanned.token else {
            return Err(ParseError::Syntax { line, col, message: "expected statement".to_string() });
        };
        match word.as_str() {
            "qreg" => {
                parser.next();
                if parser.register.is_some() {
                    return Err(ParseError::Syntax {
                        line,
                        col,
                        message: "only one qreg declaration is supported".to_string(),
                    });
                }
                let (name, _, _) = parser.expect_ident()?;
                parser.expect_symbol('[')?;
                let (size, sline, scol) = parser.expect_uint()?;
                parser.expect_symbol(']')?;
                parser.expect_symbol(';')?;
                if size == 0 {
                    return Err(ParseError::Syntax {
                        line: sline,
                        col: scol,
                        message: "register must hold at least one qubit".to_string(),
                    });
                }
                parser.register = Some((name, size));
            }
            "measure" => {
                parser.next();
                let qubit = parser.expect_arg()?;
                parser.expect_symbol(';')?;
                instructions.push(Gate::measure(qubit));
            }
            "project" => {
                parser.next();
                let qubit = parser.expect_arg()?;
                match parser.next() {
                    Some(Spanned { token: Token::Arrow, .. }) => {}
                    other => return Err(parser.syntax_at(other, "expected `->`".to_string())),
                }
                let outcome = match parser.next() {
                    Some(Spanned { token: Token::Number(ref text), .. }) if text == "0" => Projection::Zero,
                    Some(Spanned { token: Token::Number(ref text), .. }) if text == "1" => Projection::One,
                    Some(Spanned { token: Token::Symbol('+'), .. }) => Projection::Plus,
                    Some(Spanned { token: Token::Symbol('-'), .. }) => Projection::Minus,
                    other => return Err(parser.syntax_at(other, "expected outcome 0, 1, + or -".to_string())),
                };
                parser.expect_symbol(';')?;
                instructions.push(Gate::project(qubit, outcome));
            }
            _ => {
                parser.next();
                let Some((expected_targets, expected_params)) = builtin_signature(&word) else {
                    return Err(ParseError::UnknownGate { line, col, name: word });
                };
                let mut params = Vec::new();
                if let Some(Spanned { token: Token::Symbol('('), .. }) = parser.peek() {
                    parser.next();
                    loop {
                        params.push(parser.expect_param()?);
                        match parser.next() {
                            Some(Spanned { token: Token::Symbol(','), .. }) => continue,
                            Some(Spanned { token: Token::Symbol(')'), .. }) => break,
                            other => return Err(parser.syntax_at(other, "expected `,` or `)`".to_string())),
                        }
                    }
                }
                if params.len() != expected_params {
                    return Err(ParseError::Syntax {
                        line,
                        col,
                        message: format!(
                            "gate `{word}` expects {expected_params} parameter(s), got {}",
                            params.len()
                        ),
                    });
                }
                if params.iter().any(|p| !p.is_finite()) {
                    return Err(ParseError::Syntax {
                        line,
                        col,
                        message: "angle must be finite".to_string(),
                    });
                }
                let mut targets = vec![parser.expect_arg()?];
                while let Some(Spanned { token: Token::Symbol(','), .. }) = parser.peek() {
                    parser.next();
                    targets.push(parser.expect_arg()?);
                }
                parser.expect_symbol(';')?;
                if targets.len() != expected_targets {
                    return Err(ParseError::Arity {
                        line,
                        col,
                        name: word,
                        expected: expected_targets,
                        got: targets.len(),
                    });
                }
                for (i, t) in targets.iter().enumerate() {
                    if targets[..i].contains(t) {
                        return Err(ParseError::DuplicateTarget { line, col });
                    }
                }
                instructions.push(Gate::unitary(&word, params, targets));
            }
        }
    }

    let (register, num_qubits) = parser
        .register
        .ok_or(ParseError::Syntax { line: 1, col: 1, message: "missing qreg declaration".to_string() })?;
    Ok(Circuit { num_qubits, register, instructions })
}

/// Canonical writer; `parse(emit(c))` reproduces the instruction sequence.
pub fn emit(circuit: &Circuit) -> String {
    circuit.to_string()
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "qreg {}[{}];", self.register, self.num_qubits)?;
        for gate in &self.instructions {
            match gate.kind {
                GateKind::Unitary => {
                    write!(f, "{}", gate.name)?;
                    if !gate.params.is_empty() {
                        let params: Vec<String> = gate.params.iter().map(|p| p.to_string()).collect();
                        write!(f, "({})", params.join(","))?;
                    }
                    let targets: Vec<String> =
                        gate.targets.iter().map(|q| format!("{}[{}]", self.register, q)).collect();
                    writeln!(f, " {};", targets.join(","))?;
                }
                GateKind::MeasureBoth => {
                    writeln!(f, "measure {}[{}];", self.register, gate.targets[0])?;
                }
                GateKind::Project(outcome) => {
                    writeln!(
                        f,
                        "project {}[{}] -> {};",
                        self.register,
                        gate.targets[0],
                        outcome.symbol()
                    )?;
                }
            }
        }
        Ok(())
    }
}
