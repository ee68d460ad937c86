use std::fmt;

use super::{Coord, Geometry, GeometryError, GeometryKind};

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn err(&self, msg: impl Into<String>) -> GeometryError {
        GeometryError::Syntax {
            pos: self.pos,
            msg: msg.into(),
        }
    }

    fn skip_ws(&mut self) {
        let rest = &self.src[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn expect(&mut self, ch: char) -> Result<(), GeometryError> {
        match self.peek() {
            Some(c) if c == ch => {
                self.pos += c.len_utf8();
                Ok(())
            }
            Some(c) => Err(self.err(format!("expected `{ch}`, found `{c}`"))),
            None => Err(self.err(format!("expected `{ch}`, found end of input"))),
        }
    }

    fn keyword(&mut self) -> &'a str {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        let len = rest
            .find(|c: char| !c.is_ascii_alphabetic())
            .unwrap_or(rest.len());
        self.pos += len;
        &rest[..len]
    }

    fn number(&mut self) -> Result<f64, GeometryError> {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        let len = rest
            .find(|c: char| !(c.is_ascii_digit() || matches!(c, '+' | '-' | '.' | 'e' | 'E')))
            .unwrap_or(rest.len());
        if len == 0 {
            return Err(self.err("expected a number"));
        }
        let value = rest[..len]
            .parse::<f64>()
            .map_err(|_| self.err(format!("invalid number `{}`", &rest[..len])))?;
        self.pos += len;
        Ok(value)
    }

    fn coord(&mut self) -> Result<Coord, GeometryError> {
        let x = self.number()?;
        let y = self.number()?;
        Ok(Coord::new(x, y))
    }

    fn coord_list(&mut self) -> Result<Vec<Coord>, GeometryError> {
        self.expect('(')?;
        let mut coords = vec![self.coord()?];
        loop {
            match self.peek() {
                Some(',') => {
                    self.pos += 1;
                    coords.push(self.coord()?);
                }
                Some(')') => {
                    self.pos += 1;
                    return Ok(coords);
                }
                Some(c) => return Err(self.err(format!("expected `,` or `)`, found `{c}`"))),
                None => return Err(self.err("unterminated coordinate list")),
            }
        }
    }
}

pub(super) fn parse(text: &str) -> Result<(GeometryKind, Vec<Coord>), GeometryError> {
    let mut cur = Cursor { src: text, pos: 0 };
    let kw = cur.keyword();
    let (kind, coords) = match kw.to_ascii_uppercase().as_str() {
        "POINT" => (GeometryKind::Point, cur.coord_list()?),
        "LINESTRING" => (GeometryKind::Polyline, cur.coord_list()?),
        "POLYGON" => {
            cur.expect('(')?;
            let ring = cur.coord_list()?;
            if cur.peek() == Some(',') {
                return Err(cur.err("polygons with holes are not supported"));
            }
            cur.expect(')')?;
            (GeometryKind::Polygon, ring)
        }
        "" => return Err(cur.err("expected a geometry keyword")),
        other => return Err(cur.err(format!("unsupported geometry type `{other}`"))),
    };
    if let Some(c) = cur.peek() {
        return Err(cur.err(format!("trailing input starting at `{c}`")));
    }
    Ok((kind, coords))
}

fn write_coords(coords: &[Coord], f: &mut fmt::Formatter<'_>) -> fmt::Result {
    f.write_str("(")?;
    for (i, c) in coords.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{} {}", c.x, c.y)?;
    }
    f.write_str(")")
}

/// Shortest round-trip float formatting, so parse(write(g)) == g exactly.
pub(super) fn write(g: &Geometry, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match g.kind() {
        GeometryKind::Point => {
            f.write_str("POINT ")?;
            write_coords(g.coords(), f)
        }
        GeometryKind::Polyline => {
            f.write_str("LINESTRING ")?;
            write_coords(g.coords(), f)
        }
        GeometryKind::Polygon => {
            f.write_str("POLYGON (")?;
            write_coords(g.coords(), f)?;
            f.write_str(")")
        }
    }
}
