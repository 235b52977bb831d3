//! Line-oriented parser for `.mzi` circuit files.
//!
//! ```text
//! source    := "source" LABEL
//! detect    := "detect" LABEL
//! bs        := "bs" NAME "in" "=" "(" LABEL? "," LABEL? ")" "out" "=" "(" LABEL "," LABEL ")" "t" "=" EXPR
//! mirror    := "mirror" NAME "path" "=" LABEL "freq" "=" EXPR "amp" "=" EXPR ["phase" "=" EXPR]
//! phase     := "phase" "path" "=" LABEL "phi" "=" EXPR
//! block     := "block" "path" "=" LABEL
//! discard   := "discard" LABEL
//! ```
//!
//! `EXPR` is a real-valued arithmetic expression over decimal literals,
//! `pi`, `sqrt(..)`, parentheses and `+ - * /`. `#` starts a comment.

use std::f64::consts::PI;

use crate::algebra::{BeamSplitter, Element, Mirror, ModeId};

use super::{check, Circuit, Diagnostic, Site};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(f64),
    LParen,
    RParen,
    Comma,
    Eq,
    Plus,
    Minus,
    Star,
    Slash,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("'{s}'"),
            Tok::Number(v) => format!("number {v}"),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Comma => "','".into(),
            Tok::Eq => "'='".into(),
            Tok::Plus => "'+'".into(),
            Tok::Minus => "'-'".into(),
            Tok::Star => "'*'".into(),
            Tok::Slash => "'/'".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    col: usize,
}

fn lex(line: &str, lineno: usize) -> Result<Vec<Token>, Diagnostic> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c == '#' {
            break;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let simple = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            '=' => Some(Tok::Eq),
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            _ => None,
        };
        if let Some(tok) = simple {
            out.push(Token { tok, col });
            i += 1;
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                col,
            });
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text: String = chars[start..i].iter().collect();
            match text.parse::<f64>() {
                Ok(v) => out.push(Token {
                    tok: Tok::Number(v),
                    col,
                }),
                Err(_) => {
                    return Err(Diagnostic::error(
                        lineno,
                        col,
                        format!("malformed number '{text}'"),
                    ))
                }
            }
        } else {
            return Err(Diagnostic::error(
                lineno,
                col,
                format!("unexpected character '{}'", c.escape_debug()),
            ));
        }
    }
    Ok(out)
}

struct Cursor<'a> {
    toks: &'a [Token],
    pos: usize,
    line: usize,
    end_col: usize,
}

type PResult<T> = Result<T, Diagnostic>;

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.toks.get(self.pos)
    }

    fn col(&self) -> usize {
        self.peek().map(|t| t.col).unwrap_or(self.end_col)
    }

    fn fail<T>(&self, msg: impl Into<String>) -> PResult<T> {
        Err(Diagnostic::error(self.line, self.col(), msg))
    }

    fn unexpected<T>(&self, wanted: &str) -> PResult<T> {
        match self.peek() {
            Some(t) => self.fail(format!("expected {wanted}, found {}", t.tok.describe())),
            None => self.fail(format!("expected {wanted}, found end of line")),
        }
    }

    fn expect(&mut self, tok: Tok) -> PResult<()> {
        match self.peek() {
            Some(t) if t.tok == tok => {
                self.pos += 1;
                Ok(())
            }
            _ => self.unexpected(&tok.describe()),
        }
    }

    fn keyword(&mut self, kw: &str) -> PResult<()> {
        match self.peek() {
            Some(Token {
                tok: Tok::Ident(s), ..
            }) if s == kw => {
                self.pos += 1;
                Ok(())
            }
            _ => self.unexpected(&format!("'{kw}'")),
        }
    }

    fn ident(&mut self, what: &str) -> PResult<(String, usize)> {
        match self.peek() {
            Some(Token {
                tok: Tok::Ident(s),
                col,
            }) => {
                self.pos += 1;
                Ok((s.clone(), *col))
            }
            _ => self.unexpected(what),
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Token { tok: Tok::Ident(s), .. }) if s == kw)
    }

    fn assignment(&mut self, key: &str) -> PResult<()> {
        self.keyword(key)?;
        self.expect(Tok::Eq)
    }

    fn finish(&self) -> PResult<()> {
        match self.peek() {
            None => Ok(()),
            Some(t) => self.fail(format!("unexpected trailing {}", t.tok.describe())),
        }
    }

    fn real(&mut self) -> PResult<f64> {
        let col = self.col();
        let v = self.expr()?;
        if !v.is_finite() {
            return Err(Diagnostic::error(
                self.line,
                col,
                "expression does not evaluate to a finite number",
            ));
        }
        Ok(v)
    }

    fn expr(&mut self) -> PResult<f64> {
        let mut v = self.term()?;
        loop {
            match self.peek().map(|t| &t.tok) {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    v += self.term()?;
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    v -= self.term()?;
                }
                _ => return Ok(v),
            }
        }
    }

    fn term(&mut self) -> PResult<f64> {
        let mut v = self.unary()?;
        loop {
            match self.peek().map(|t| &t.tok) {
                Some(Tok::Star) => {
                    self.pos += 1;
                    v *= self.unary()?;
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    v /= self.unary()?;
                }
                _ => return Ok(v),
            }
        }
    }

    fn unary(&mut self) -> PResult<f64> {
        match self.peek().map(|t| &t.tok) {
            Some(Tok::Minus) => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> PResult<f64> {
        match self.peek().map(|t| &t.tok) {
            Some(Tok::Number(v)) => {
                let v = *v;
                self.pos += 1;
                Ok(v)
            }
            Some(Tok::Ident(s)) if s == "pi" => {
                self.pos += 1;
                Ok(PI)
            }
            Some(Tok::Ident(s)) if s == "sqrt" => {
                self.pos += 1;
                self.expect(Tok::LParen)?;
                let v = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(v.sqrt())
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let v = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(v)
            }
            _ => self.unexpected("a number, 'pi', 'sqrt(..)' or '('"),
        }
    }
}

/// Label reference with its column, resolved after the whole file is read.
type LabelRef = (String, usize);

enum Stmt {
    Source(LabelRef),
    Detect(LabelRef),
    Bs {
        name: String,
        inputs: [Option<LabelRef>; 2],
        outputs: [LabelRef; 2],
        t: f64,
    },
    Mirror {
        name: String,
        path: LabelRef,
        freq: f64,
        amp: f64,
        phase: f64,
    },
    Phase {
        path: LabelRef,
        phi: f64,
    },
    Block(LabelRef),
    Discard(LabelRef),
}

fn statement(cur: &mut Cursor) -> PResult<Stmt> {
    let (kw, _) = cur.ident("a statement keyword")?;
    let stmt = match kw.as_str() {
        "source" => Stmt::Source(cur.ident("a path label")?),
        "detect" => Stmt::Detect(cur.ident("a path label")?),
        "bs" => {
            let (name, _) = cur.ident("a beam-splitter name")?;
            cur.assignment("in")?;
            cur.expect(Tok::LParen)?;
            let in0 = if matches!(cur.peek().map(|t| &t.tok), Some(Tok::Ident(_))) {
                Some(cur.ident("a path label")?)
            } else {
                None
            };
            cur.expect(Tok::Comma)?;
            let in1 = if matches!(cur.peek().map(|t| &t.tok), Some(Tok::Ident(_))) {
                Some(cur.ident("a path label")?)
            } else {
                None
            };
            cur.expect(Tok::RParen)?;
            cur.assignment("out")?;
            cur.expect(Tok::LParen)?;
            let out0 = cur.ident("a path label")?;
            cur.expect(Tok::Comma)?;
            let out1 = cur.ident("a path label")?;
            cur.expect(Tok::RParen)?;
            cur.assignment("t")?;
            let t = cur.real()?;
            Stmt::Bs {
                name,
                inputs: [in0, in1],
                outputs: [out0, out1],
                t,
            }
        }
        "mirror" => {
            let (name, _) = cur.ident("a mirror name")?;
            cur.assignment("path")?;
            let path = cur.ident("a path label")?;
            cur.assignment("freq")?;
            let freq = cur.real()?;
            cur.assignment("amp")?;
            let amp = cur.real()?;
            let phase = if cur.is_keyword("phase") {
                cur.assignment("phase")?;
                cur.real()?
            } else {
                0.0
            };
            Stmt::Mirror {
                name,
                path,
                freq,
                amp,
                phase,
            }
        }
        "phase" => {
            cur.assignment("path")?;
            let path = cur.ident("a path label")?;
            cur.assignment("phi")?;
            let phi = cur.real()?;
            Stmt::Phase { path, phi }
        }
        "block" => {
            cur.assignment("path")?;
            Stmt::Block(cur.ident("a path label")?)
        }
        "discard" => Stmt::Discard(cur.ident("a path label")?),
        other => {
            cur.pos -= 1;
            return cur.fail(format!(
                "unknown statement '{other}' (expected source, detect, bs, mirror, phase, block or discard)"
            ));
        }
    };
    cur.finish()?;
    Ok(stmt)
}

/// Evaluates a standalone real expression such as `pi/2` or `1/sqrt(3)`.
pub fn parse_real(text: &str) -> Result<f64, Diagnostic> {
    let toks = lex(text, 1)?;
    let mut cur = Cursor {
        toks: &toks,
        pos: 0,
        line: 1,
        end_col: text.chars().count() + 1,
    };
    let v = cur.real()?;
    cur.finish()?;
    Ok(v)
}

/// Parses UTF-8 bytes; invalid encodings become a positioned diagnostic.
pub fn parse_bytes(bytes: &[u8]) -> Result<Circuit, Vec<Diagnostic>> {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse(text),
        Err(e) => {
            let valid = std::str::from_utf8(&bytes[..e.valid_up_to()]).unwrap_or_default();
            let line = valid.matches('\n').count() + 1;
            let column = valid
                .rsplit('\n')
                .next()
                .map(|l| l.chars().count())
                .unwrap_or(0)
                + 1;
            Err(vec![Diagnostic::error(line, column, "invalid UTF-8")])
        }
    }
}

/// Parses and validates `.mzi` text. Warnings are not returned here; call
/// [`validate`](super::validate) on the result to obtain them.
pub fn parse(text: &str) -> Result<Circuit, Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let mut stmts: Vec<(usize, Stmt)> = Vec::new();
    let mut line_count = 0;
    let mut last_len = 0;
    for (idx, raw) in text.split('\n').enumerate() {
        let lineno = idx + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        line_count = lineno;
        last_len = line.chars().count();
        let toks = match lex(line, lineno) {
            Ok(t) => t,
            Err(d) => {
                diags.push(d);
                continue;
            }
        };
        if toks.is_empty() {
            continue;
        }
        let mut cur = Cursor {
            toks: &toks,
            pos: 0,
            line: lineno,
            end_col: last_len + 1,
        };
        match statement(&mut cur) {
            Ok(s) => stmts.push((lineno, s)),
            Err(d) => diags.push(d),
        }
    }
    let eof = (line_count.max(1), last_len + 1);

    // Assign mode ids in semantic order: source, element paths, detector.
    let mut labels: Vec<String> = Vec::new();
    let mut intern = |l: &str| -> ModeId {
        match labels.iter().position(|x| x == l) {
            Some(i) => ModeId(i),
            None => {
                labels.push(l.to_string());
                ModeId(labels.len() - 1)
            }
        }
    };

    let mut source: Option<(ModeId, usize)> = None;
    let mut detect: Option<(String, usize, usize)> = None;
    for (line, s) in &stmts {
        match s {
            Stmt::Source((l, _)) => {
                if source.is_some() {
                    diags.push(Diagnostic::error(*line, 1, "duplicate 'source' statement"));
                } else {
                    source = Some((intern(l), *line));
                }
            }
            Stmt::Detect((l, col)) => {
                if detect.is_some() {
                    diags.push(Diagnostic::error(*line, 1, "duplicate 'detect' statement"));
                } else {
                    detect = Some((l.clone(), *line, *col));
                }
            }
            _ => {}
        }
    }

    let mut elements = Vec::new();
    let mut element_lines = Vec::new();
    let mut mirror_index = 0;
    for (line, s) in stmts {
        let el = match s {
            Stmt::Source(_) | Stmt::Detect(_) => continue,
            Stmt::Bs {
                name,
                inputs,
                outputs,
                t,
            } => {
                let inputs = [
                    inputs[0].as_ref().map(|(l, _)| intern(l)),
                    inputs[1].as_ref().map(|(l, _)| intern(l)),
                ];
                let outputs = [intern(&outputs[0].0), intern(&outputs[1].0)];
                Element::BeamSplitter(BeamSplitter {
                    name,
                    inputs,
                    outputs,
                    transmission: t,
                })
            }
            Stmt::Mirror {
                name,
                path,
                freq,
                amp,
                phase,
            } => {
                let m = Mirror {
                    name,
                    path: intern(&path.0),
                    index: mirror_index,
                    frequency_hz: freq,
                    amplitude: amp,
                    phase,
                };
                mirror_index += 1;
                Element::Mirror(m)
            }
            Stmt::Phase { path, phi } => Element::PhaseShift {
                path: intern(&path.0),
                phi,
            },
            Stmt::Block(path) => Element::Block {
                path: intern(&path.0),
            },
            Stmt::Discard(path) => Element::Discard {
                path: intern(&path.0),
            },
        };
        elements.push(el);
        element_lines.push(line);
    }

    let detector = detect.as_ref().map(|(l, line, _)| (intern(l), *line));

    if source.is_none() {
        diags.push(Diagnostic::error(
            eof.0,
            eof.1,
            "missing 'source' statement",
        ));
    }
    if detector.is_none() {
        diags.push(Diagnostic::error(
            eof.0,
            eof.1,
            "missing 'detect' statement",
        ));
    }
    if !diags.is_empty() {
        diags.sort_by_key(|d| (d.line, d.column));
        return Err(diags);
    }
    let (source, source_line) = source.expect("checked above");
    let (detector, detect_line) = detector.expect("checked above");
    let detect_col = detect.map(|d| d.2).unwrap_or(1);

    let circuit = Circuit {
        labels,
        source,
        detector,
        elements,
    };
    let semantic: Vec<Diagnostic> = check(&circuit, &|site| match site {
        Site::Source => (source_line, 1),
        Site::Detector => (detect_line, detect_col),
        Site::Element(i) => (element_lines[i], 1),
    })
    .into_iter()
    .filter(Diagnostic::is_error)
    .collect();
    if semantic.is_empty() {
        Ok(circuit)
    } else {
        Err(semantic)
    }
}
