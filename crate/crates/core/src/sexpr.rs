//! S-expression reader shared by the PDDL front end and the constraint-rule
//! language. Tracks line/column for diagnostics.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Sexp {
    /// Bare token (identifier, keyword, number, variable).
    Atom(String, Pos),
    List(Vec<Sexp>, Pos),
}

impl Sexp {
    pub fn pos(&self) -> Pos {
        match self {
            Sexp::Atom(_, p) | Sexp::List(_, p) => *p,
        }
    }

    pub fn as_atom(&self) -> Option<&str> {
        match self {
            Sexp::Atom(s, _) => Some(s),
            Sexp::List(..) => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::List(items, _) => Some(items),
            Sexp::Atom(..) => None,
        }
    }
}

#[derive(Debug, Clone, thiserror::Error)]
#[error("{pos}: {msg}")]
pub struct SexpError {
    pub pos: Pos,
    pub msg: String,
}

struct Reader<'a> {
    src: &'a str,
    bytes: &'a [u8],
    at: usize,
    line: usize,
    col: usize,
}

impl<'a> Reader<'a> {
    fn new(src: &'a str) -> Self {
        Reader {
            src,
            bytes: src.as_bytes(),
            at: 0,
            line: 1,
            col: 1,
        }
    }

    fn pos(&self) -> Pos {
        Pos {
            line: self.line,
            col: self.col,
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.at).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let b = self.peek()?;
        self.at += 1;
        if b == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(b)
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek() {
                Some(b) if b.is_ascii_whitespace() => {
                    self.bump();
                }
                Some(b';') => {
                    while let Some(b) = self.peek() {
                        if b == b'\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                _ => return,
            }
        }
    }

    fn read(&mut self) -> Result<Sexp, SexpError> {
        self.skip_trivia();
        let pos = self.pos();
        match self.peek() {
            None => Err(SexpError {
                pos,
                msg: "unexpected end of input".into(),
            }),
            Some(b'(') => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_trivia();
                    match self.peek() {
                        Some(b')') => {
                            self.bump();
                            return Ok(Sexp::List(items, pos));
                        }
                        None => {
                            return Err(SexpError {
                                pos,
                                msg: "unclosed parenthesis".into(),
                            })
                        }
                        Some(_) => items.push(self.read()?),
                    }
                }
            }
            Some(b')') => Err(SexpError {
                pos,
                msg: "unexpected ')'".into(),
            }),
            Some(_) => {
                let start = self.at;
                while let Some(b) = self.peek() {
                    if b.is_ascii_whitespace() || b == b'(' || b == b')' || b == b';' {
                        break;
                    }
                    self.bump();
                }
                let tok = &self.src[start..self.at];
                Ok(Sexp::Atom(tok.to_string(), pos))
            }
        }
    }
}

/// Reads every top-level form in `src`. Comments run from `;` to end of line.
pub fn read_all(src: &str) -> Result<Vec<Sexp>, SexpError> {
    let mut r = Reader::new(src);
    let mut forms = Vec::new();
    loop {
        r.skip_trivia();
        if r.peek().is_none() {
            return Ok(forms);
        }
        forms.push(r.read()?);
    }
}

/// Reads exactly one form and rejects trailing garbage.
pub fn read_one(src: &str) -> Result<Sexp, SexpError> {
    let mut r = Reader::new(src);
    let form = r.read()?;
    r.skip_trivia();
    if r.peek().is_some() {
        return Err(SexpError {
            pos: r.pos(),
            msg: "trailing input after form".into(),
        });
    }
    Ok(form)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atoms_and_lists() {
        let forms = read_all("(a b (c ?d)) e").unwrap();
        assert_eq!(forms.len(), 2);
        assert_eq!(forms[1].as_atom(), Some("e"));
        let inner = forms[0].as_list().unwrap();
        assert_eq!(inner[2].as_list().unwrap()[1].as_atom(), Some("?d"));
    }

    #[test]
    fn comments_ignored() {
        let forms = read_all("; header\n(a ; mid\n b)\n").unwrap();
        assert_eq!(forms.len(), 1);
        assert_eq!(forms[0].as_list().unwrap().len(), 2);
    }

    #[test]
    fn positions_tracked() {
        let forms = read_all("(a\n  (b))").unwrap();
        let outer = forms[0].as_list().unwrap();
        let pos = outer[1].pos();
        assert_eq!((pos.line, pos.col), (2, 3));
    }

    #[test]
    fn unclosed_is_error() {
        let err = read_all("(a (b)").unwrap_err();
        assert_eq!(err.pos.line, 1);
    }

    #[test]
    fn empty_input_ok() {
        assert!(read_all("  ; nothing\n").unwrap().is_empty());
    }
}
