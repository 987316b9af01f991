use super::{ParamValue, Params};
use crate::error::{Error, Result};

/// A parsed `name(key=value, key=[v1,v2,...])` string.
#[derive(Clone, Debug, PartialEq)]
pub struct IntegrandSpec {
    pub name: String,
    pub params: Params,
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse { input: self.src.to_string(), pos: self.pos, msg: msg.into() }
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(format!("expected `{c}`")))
        }
    }

    fn ident(&mut self) -> Result<&'a str> {
        self.skip_ws();
        let start = self.pos;
        while let Some(c) = self.peek() {
            let ok = c == '_' || c.is_ascii_alphanumeric();
            if !ok || (self.pos == start && c.is_ascii_digit()) {
                break;
            }
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err("expected an identifier"));
        }
        Ok(&self.src[start..self.pos])
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() || matches!(c, '.' | 'e' | 'E' | '+' | '-') {
                self.pos += 1;
            } else {
                break;
            }
        }
        let text = &self.src[start..self.pos];
        let x: f64 = text.parse().map_err(|_| {
            self.pos = start;
            self.err(format!("`{text}` is not a number"))
        })?;
        if !x.is_finite() {
            return Err(self.err("numbers must be finite"));
        }
        Ok(x)
    }

    fn value(&mut self) -> Result<ParamValue> {
        if !self.eat('[') {
            return Ok(ParamValue::Scalar(self.number()?));
        }
        let mut out = Vec::new();
        if self.eat(']') {
            return Ok(ParamValue::List(out));
        }
        loop {
            out.push(self.number()?);
            if self.eat(']') {
                return Ok(ParamValue::List(out));
            }
            self.expect(',')?;
        }
    }
}

/// Parses an integrand specification string.
pub fn parse_spec(input: &str) -> Result<IntegrandSpec> {
    let mut c = Cursor { src: input, pos: 0 };
    let name = c.ident()?.to_string();
    let mut params = Params::new();
    if c.eat('(') && !c.eat(')') {
        loop {
            let key = c.ident()?.to_string();
            c.expect('=')?;
            let v = c.value()?;
            if params.insert(key.clone(), v).is_some() {
                return Err(c.err(format!("duplicate key `{key}`")));
            }
            if c.eat(')') {
                break;
            }
            c.expect(',')?;
        }
    }
    c.skip_ws();
    if c.pos != input.len() {
        return Err(c.err("trailing input"));
    }
    Ok(IntegrandSpec { name, params })
}
