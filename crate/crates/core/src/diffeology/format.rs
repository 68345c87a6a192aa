use super::DVSpace;
use crate::error::{Error, Result};
use crate::expr::parse_expr;

/// Canonical text form: a `space <name> dim <n>` header, one `gen` line per
/// generator and one `axiom` line per attached axiom.
pub fn print_space(v: &DVSpace) -> String {
    let mut out = format!("space {} dim {}\n", v.name, v.dim);
    for g in &v.generators {
        let coords: Vec<String> = g.iter().map(ToString::to_string).collect();
        out.push_str(&format!("gen {}\n", coords.join(",")));
    }
    for a in &v.axioms {
        out.push_str(&format!("axiom {a}\n"));
    }
    out
}

/// Parses the text form. Blank lines and `#` comments are ignored.
pub fn parse_space(text: &str) -> Result<DVSpace> {
    let err = |line: usize, msg: &str| Error::Invalid(format!("line {}: {msg}", line + 1));
    let mut header: Option<(String, usize)> = None;
    let mut gens = Vec::new();
    let mut axioms = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (kw, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let rest = rest.trim();
        match kw {
            "space" => {
                if header.is_some() {
                    return Err(err(ln, "duplicate space header"));
                }
                let parts: Vec<&str> = rest.split_whitespace().collect();
                let [name, "dim", n] = parts.as_slice() else {
                    return Err(err(ln, "expected `space <name> dim <n>`"));
                };
                let n: usize = n.parse().map_err(|_| err(ln, "dimension must be a positive integer"))?;
                header = Some((name.to_string(), n));
            }
            "gen" => {
                let coords = rest
                    .split(',')
                    .map(|c| parse_expr(c.trim()))
                    .collect::<Result<Vec<_>>>()
                    .map_err(|e| err(ln, &e.to_string()))?;
                gens.push(coords);
            }
            "axiom" if !rest.is_empty() && !rest.contains(char::is_whitespace) => axioms.push(rest.to_string()),
            _ => return Err(err(ln, &format!("unexpected `{kw}`"))),
        }
    }
    let (name, dim) = header.ok_or_else(|| Error::Invalid("missing `space <name> dim <n>` header".into()))?;
    DVSpace::new(name, dim, gens, axioms)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let text = "space V2-delta dim 2\ngen abs(x),abs(x)\ngen 0,deltaQ(x)\n";
        let v = parse_space(text).unwrap();
        assert_eq!(print_space(&v), text);
        let text = "space W dim 2\ngen abs(x),gamma(x)\naxiom A\n";
        assert_eq!(print_space(&parse_space(text).unwrap()), text);
    }

    #[test]
    fn errors() {
        assert!(parse_space("gen x").is_err());
        assert!(parse_space("space V dim 2\ngen x").is_err());
        assert!(parse_space("space V dim two").is_err());
        assert!(parse_space("space V dim 1\ngen foo(x)").is_err());
        assert!(parse_space("space V dim 1\nwhat").is_err());
    }
}
