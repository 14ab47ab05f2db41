//! A tiny reader for NumPy-style expressions, enough to compare the shape
//! of two formulas while ignoring spacing, redundant parentheses and module
//! prefixes.

#[derive(Debug, Clone, PartialEq)]
pub enum Tree {
    Name(String),
    Num(String),
    Neg(Box<Tree>),
    Bin(char, Box<Tree>, Box<Tree>),
    T(Box<Tree>),
    Call(String, Vec<Tree>),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Name(String),
    Num(String),
    Op(char),
    Dot,
}

fn lex(s: &str) -> Vec<Tok> {
    let cs: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut k = 0;
    while k < cs.len() {
        let c = cs[k];
        if c.is_whitespace() {
            k += 1;
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = k;
            while k < cs.len() && (cs[k].is_ascii_alphanumeric() || cs[k] == '_') {
                k += 1;
            }
            out.push(Tok::Name(cs[start..k].iter().collect()));
        } else if c.is_ascii_digit() {
            let start = k;
            while k < cs.len() && (cs[k].is_ascii_digit() || cs[k] == '.') {
                k += 1;
            }
            out.push(Tok::Num(cs[start..k].iter().collect()));
        } else if c == '.' {
            out.push(Tok::Dot);
            k += 1;
        } else {
            out.push(Tok::Op(c));
            k += 1;
        }
    }
    out
}

struct P {
    toks: Vec<Tok>,
    at: usize,
}

impl P {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Tree, String> {
        let mut l = self.term()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Op(c @ ('+' | '-'))) => *c,
                _ => return Ok(l),
            };
            self.at += 1;
            l = Tree::Bin(op, Box::new(l), Box::new(self.term()?));
        }
    }

    fn term(&mut self) -> Result<Tree, String> {
        let mut l = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Op(c @ ('@' | '*' | '/'))) => *c,
                _ => return Ok(l),
            };
            self.at += 1;
            l = Tree::Bin(op, Box::new(l), Box::new(self.unary()?));
        }
    }

    fn unary(&mut self) -> Result<Tree, String> {
        if self.eat('-') {
            return Ok(Tree::Neg(Box::new(self.unary()?)));
        }
        self.postfix()
    }

    fn postfix(&mut self) -> Result<Tree, String> {
        let mut e = self.atom()?;
        while self.peek() == Some(&Tok::Dot) {
            match self.toks.get(self.at + 1) {
                Some(Tok::Name(n)) if n == "T" => {
                    self.at += 2;
                    e = Tree::T(Box::new(e));
                }
                other => return Err(format!("unexpected attribute {other:?}")),
            }
        }
        Ok(e)
    }

    fn atom(&mut self) -> Result<Tree, String> {
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.at += 1;
                Ok(Tree::Num(n))
            }
            Some(Tok::Name(mut n)) => {
                self.at += 1;
                // Module paths collapse to their last segment.
                while self.peek() == Some(&Tok::Dot) && matches!(self.toks.get(self.at + 1), Some(Tok::Name(m)) if m != "T") {
                    let Some(Tok::Name(m)) = self.toks.get(self.at + 1).cloned() else { unreachable!() };
                    n = m;
                    self.at += 2;
                }
                if self.eat('(') {
                    let mut args = Vec::new();
                    if !self.eat(')') {
                        loop {
                            args.push(self.expr()?);
                            if self.eat(')') {
                                break;
                            }
                            if !self.eat(',') {
                                return Err("expected ',' or ')'".into());
                            }
                        }
                    }
                    return Ok(Tree::Call(n, args));
                }
                Ok(Tree::Name(n))
            }
            Some(Tok::Op('(')) => {
                self.at += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err("expected ')'".into());
                }
                Ok(e)
            }
            t => Err(format!("unexpected {t:?}")),
        }
    }
}

pub fn parse(s: &str) -> Result<Tree, String> {
    let mut p = P { toks: lex(s), at: 0 };
    let e = p.expr()?;
    if p.at != p.toks.len() {
        return Err(format!("trailing input in {s:?}"));
    }
    Ok(e)
}

/// The right-hand side of the first line assigning `name`.
pub fn assignment<'a>(text: &'a str, name: &str) -> Option<&'a str> {
    text.lines().find_map(|l| l.trim().strip_prefix(name)?.trim_start().strip_prefix('=').filter(|r| !r.starts_with('=')).map(str::trim))
}

