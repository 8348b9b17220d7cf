//! The structured-text config format read by the CLI.
//!
//! A config is a sequence of named blocks holding `key = value` entries;
//! values are numbers, quoted strings, arrays (possibly nested), or nested
//! blocks. `#` starts a line comment. Keys may contain dots, which is how
//! per-generator data is written:
//!
//! ```text
//! markov {
//!   pi  = [0.5, 0.5]
//!   P.a = [[0.75, 0.25], [0.25, 0.75]]
//!   P.b = [[0.75, 0.25], [0.25, 0.75]]
//! }
//! coset_action {
//!   index  = 2
//!   perm.a = "(01)"
//!   perm.b = "(01)"
//! }
//! options { n_max = 3  seed = 7 }
//! ```
//!
//! The formal grammar lives in `docs/config-grammar.ebnf`.

use crate::measure::{FiniteAction, TreeMarkovMeasure};
use crate::subgroup::{CosetAction, Perm};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Number(f64),
    Str(String),
    Array(Vec<Value>),
    Block(Block),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Block {
    pub entries: Vec<(String, Value)>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Document {
    pub blocks: Vec<(String, Block)>,
}

// ---------------------------------------------------------------------
// lexer / parser

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Ident(String),
    Number(f64),
    Str(String),
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Equals,
}

fn lex(text: &str) -> Result<Vec<Token>> {
    let mut tokens = Vec::new();
    let bytes: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            '#' => {
                while i < bytes.len() && bytes[i] != '\n' {
                    i += 1;
                }
            }
            c if c.is_whitespace() => i += 1,
            '{' => {
                tokens.push(Token::LBrace);
                i += 1;
            }
            '}' => {
                tokens.push(Token::RBrace);
                i += 1;
            }
            '[' => {
                tokens.push(Token::LBracket);
                i += 1;
            }
            ']' => {
                tokens.push(Token::RBracket);
                i += 1;
            }
            ',' => {
                tokens.push(Token::Comma);
                i += 1;
            }
            '=' => {
                tokens.push(Token::Equals);
                i += 1;
            }
            '"' => {
                i += 1;
                let start = i;
                while i < bytes.len() && bytes[i] != '"' {
                    i += 1;
                }
                if i == bytes.len() {
                    return Err(Error::Config("unterminated string".into()));
                }
                tokens.push(Token::Str(bytes[start..i].iter().collect()));
                i += 1;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == '_' || bytes[i] == '.')
                {
                    i += 1;
                }
                tokens.push(Token::Ident(bytes[start..i].iter().collect()));
            }
            c if c.is_ascii_digit() || c == '-' || c == '+' => {
                let start = i;
                i += 1;
                while i < bytes.len()
                    && (bytes[i].is_ascii_digit()
                        || bytes[i] == '.'
                        || bytes[i] == 'e'
                        || bytes[i] == 'E'
                        || ((bytes[i] == '-' || bytes[i] == '+')
                            && (bytes[i - 1] == 'e' || bytes[i - 1] == 'E')))
                {
                    i += 1;
                }
                let text: String = bytes[start..i].iter().collect();
                let n = text
                    .parse::<f64>()
                    .map_err(|_| Error::Config(format!("bad number {text:?}")))?;
                tokens.push(Token::Number(n));
            }
            other => {
                return Err(Error::Config(format!("unexpected character {other:?}")));
            }
        }
    }
    Ok(tokens)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Result<Token> {
        let t = self
            .tokens
            .get(self.pos)
            .cloned()
            .ok_or_else(|| Error::Config("unexpected end of config".into()))?;
        self.pos += 1;
        Ok(t)
    }

    fn expect(&mut self, t: Token) -> Result<()> {
        let got = self.next()?;
        if got != t {
            return Err(Error::Config(format!("expected {t:?}, found {got:?}")));
        }
        Ok(())
    }

    fn document(&mut self) -> Result<Document> {
        let mut blocks = Vec::new();
        while self.peek().is_some() {
            match self.next()? {
                Token::Ident(name) => {
                    self.expect(Token::LBrace)?;
                    blocks.push((name, self.block()?));
                }
                other => {
                    return Err(Error::Config(format!(
                        "expected a block name at top level, found {other:?}"
                    )));
                }
            }
        }
        Ok(Document { blocks })
    }

    fn block(&mut self) -> Result<Block> {
        let mut entries = Vec::new();
        loop {
            match self.next()? {
                Token::RBrace => return Ok(Block { entries }),
                Token::Ident(key) => match self.next()? {
                    Token::Equals => entries.push((key, self.value()?)),
                    Token::LBrace => entries.push((key, Value::Block(self.block()?))),
                    other => {
                        return Err(Error::Config(format!(
                            "expected '=' or '{{' after {key:?}, found {other:?}"
                        )));
                    }
                },
                other => {
                    return Err(Error::Config(format!(
                        "expected a key or '}}', found {other:?}"
                    )));
                }
            }
        }
    }

    fn value(&mut self) -> Result<Value> {
        match self.next()? {
            Token::Number(n) => Ok(Value::Number(n)),
            Token::Str(s) => Ok(Value::Str(s)),
            Token::LBrace => Ok(Value::Block(self.block()?)),
            Token::LBracket => {
                let mut items = Vec::new();
                loop {
                    if self.peek() == Some(&Token::RBracket) {
                        self.pos += 1;
                        return Ok(Value::Array(items));
                    }
                    items.push(self.value()?);
                    match self.peek() {
                        Some(Token::Comma) => self.pos += 1,
                        Some(Token::RBracket) => {}
                        other => {
                            return Err(Error::Config(format!(
                                "expected ',' or ']' in array, found {other:?}"
                            )));
                        }
                    }
                }
            }
            other => Err(Error::Config(format!("expected a value, found {other:?}"))),
        }
    }
}

pub fn parse(text: &str) -> Result<Document> {
    Parser { tokens: lex(text)?, pos: 0 }.document()
}

// ---------------------------------------------------------------------
// typed accessors

impl Block {
    pub fn get(&self, key: &str) -> Option<&Value> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn number(&self, key: &str) -> Result<f64> {
        match self.get(key) {
            Some(Value::Number(n)) => Ok(*n),
            Some(_) => Err(Error::Config(format!("{key} must be a number"))),
            None => Err(Error::Config(format!("missing key {key}"))),
        }
    }

    pub fn integer(&self, key: &str) -> Result<usize> {
        let n = self.number(key)?;
        if n < 0.0 || n.fract() != 0.0 {
            return Err(Error::Config(format!("{key} must be a non-negative integer")));
        }
        Ok(n as usize)
    }

    pub fn string(&self, key: &str) -> Result<&str> {
        match self.get(key) {
            Some(Value::Str(s)) => Ok(s),
            Some(_) => Err(Error::Config(format!("{key} must be a string"))),
            None => Err(Error::Config(format!("missing key {key}"))),
        }
    }

    pub fn f64_array(&self, key: &str) -> Result<Vec<f64>> {
        match self.get(key) {
            Some(Value::Array(items)) => items
                .iter()
                .map(|v| match v {
                    Value::Number(n) => Ok(*n),
                    _ => Err(Error::Config(format!("{key} must hold numbers"))),
                })
                .collect(),
            Some(_) => Err(Error::Config(format!("{key} must be an array"))),
            None => Err(Error::Config(format!("missing key {key}"))),
        }
    }

    pub fn usize_array(&self, key: &str) -> Result<Vec<usize>> {
        self.f64_array(key)?
            .into_iter()
            .map(|n| {
                if n < 0.0 || n.fract() != 0.0 {
                    Err(Error::Config(format!("{key} must hold non-negative integers")))
                } else {
                    Ok(n as usize)
                }
            })
            .collect()
    }

    pub fn f64_matrix(&self, key: &str) -> Result<Vec<Vec<f64>>> {
        match self.get(key) {
            Some(Value::Array(rows)) => rows
                .iter()
                .map(|row| match row {
                    Value::Array(items) => items
                        .iter()
                        .map(|v| match v {
                            Value::Number(n) => Ok(*n),
                            _ => Err(Error::Config(format!("{key} must hold numbers"))),
                        })
                        .collect(),
                    _ => Err(Error::Config(format!("{key} must be a matrix"))),
                })
                .collect(),
            Some(_) => Err(Error::Config(format!("{key} must be a matrix"))),
            None => Err(Error::Config(format!("missing key {key}"))),
        }
    }

    /// Values of dotted keys `prefix.a`, `prefix.b`, ... which must be
    /// consecutive letters starting at `a`. Returns them in letter order.
    pub fn per_generator(&self, prefix: &str) -> Result<Vec<&Value>> {
        let mut found: Vec<(usize, &Value)> = Vec::new();
        for (k, v) in &self.entries {
            if let Some(rest) = k.strip_prefix(prefix) {
                if let Some(rest) = rest.strip_prefix('.') {
                    let mut chars = rest.chars();
                    match (chars.next(), chars.next()) {
                        (Some(c @ 'a'..='z'), None) => {
                            found.push((c as usize - 'a' as usize, v));
                        }
                        _ => {
                            return Err(Error::Config(format!(
                                "bad generator key {k:?}; use {prefix}.a, {prefix}.b, ..."
                            )));
                        }
                    }
                }
            }
        }
        found.sort_by_key(|(i, _)| *i);
        for (want, (got, _)) in found.iter().enumerate() {
            if want != *got {
                return Err(Error::Config(format!(
                    "generator keys under {prefix} must be consecutive letters from 'a'"
                )));
            }
        }
        if found.is_empty() {
            return Err(Error::Config(format!("no {prefix}.* keys found")));
        }
        Ok(found.into_iter().map(|(_, v)| v).collect())
    }
}

impl Document {
    pub fn block(&self, name: &str) -> Option<&Block> {
        self.blocks.iter().find(|(n, _)| n == name).map(|(_, b)| b)
    }

    pub fn blocks_named(&self, name: &str) -> Vec<&Block> {
        self.blocks
            .iter()
            .filter(|(n, _)| n == name)
            .map(|(_, b)| b)
            .collect()
    }
}

// ---------------------------------------------------------------------
// domain objects out of blocks

/// Either measure class, owned, as read from a config.
#[derive(Debug, Clone)]
pub enum Measure {
    Markov(TreeMarkovMeasure),
    Finite(FiniteAction),
}

impl Measure {
    pub fn as_ref(&self) -> crate::entropy::MeasureRef<'_> {
        match self {
            Measure::Markov(tm) => crate::entropy::MeasureRef::Markov(tm),
            Measure::Finite(fa) => crate::entropy::MeasureRef::Finite(fa),
        }
    }

    pub fn rank(&self) -> usize {
        match self {
            Measure::Markov(tm) => tm.rank(),
            Measure::Finite(fa) => fa.rank(),
        }
    }
}

/// Parses a permutation of {0..n-1} in cycle notation ("(0 1 2)(3 4)",
/// digits may run together as in "(012)") or one-line notation
/// ("1 2 0"). "()" and "id" denote the identity.
pub fn parse_perm(text: &str, n: usize) -> Result<Perm> {
    let t = text.trim();
    if t.is_empty() || t == "id" || t == "()" {
        return Ok(Perm::identity(n));
    }
    if t.starts_with('(') {
        let mut images: Vec<usize> = (0..n).collect();
        for part in t.split('(').filter(|p| !p.trim().is_empty()) {
            let part = part
                .strip_suffix(')')
                .ok_or_else(|| Error::Config(format!("unbalanced cycle in {text:?}")))?;
            let pts = cycle_points(part, n, text)?;
            for w in 0..pts.len() {
                images[pts[w]] = pts[(w + 1) % pts.len()];
            }
        }
        return Perm::new(images);
    }
    let images: Vec<usize> = t
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|p| !p.is_empty())
        .map(|p| {
            p.parse::<usize>()
                .map_err(|_| Error::Config(format!("bad point {p:?} in {text:?}")))
        })
        .collect::<Result<_>>()?;
    if images.len() != n {
        return Err(Error::Config(format!(
            "one-line permutation {text:?} lists {} points, expected {n}",
            images.len()
        )));
    }
    Perm::new(images)
}

fn cycle_points(part: &str, n: usize, whole: &str) -> Result<Vec<usize>> {
    let tokens: Vec<&str> = part
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|p| !p.is_empty())
        .collect();
    let pts: Vec<usize> = if tokens.len() == 1 && tokens[0].len() > 1 && n <= 10 {
        // digits run together: every digit is a point
        tokens[0]
            .chars()
            .map(|c| {
                c.to_digit(10)
                    .map(|d| d as usize)
                    .ok_or_else(|| Error::Config(format!("bad cycle in {whole:?}")))
            })
            .collect::<Result<_>>()?
    } else {
        tokens
            .iter()
            .map(|p| {
                p.parse::<usize>()
                    .map_err(|_| Error::Config(format!("bad point {p:?} in {whole:?}")))
            })
            .collect::<Result<_>>()?
    };
    for &p in &pts {
        if p >= n {
            return Err(Error::Config(format!(
                "point {p} out of range 0..{n} in {whole:?}"
            )));
        }
    }
    Ok(pts)
}

/// Builds the measure described by a `markov`, `bernoulli` or `finite`
/// block.
pub fn build_measure(name: &str, block: &Block) -> Result<Measure> {
    match name {
        "markov" => {
            let pi = block.f64_array("pi")?;
            if let Some(Value::Number(m)) = block.get("m") {
                if *m as usize != pi.len() {
                    return Err(Error::Config(format!(
                        "m = {m} disagrees with pi of length {}",
                        pi.len()
                    )));
                }
            }
            let mats = block.per_generator("P")?;
            let mut trans = Vec::with_capacity(mats.len());
            for v in mats {
                match v {
                    Value::Array(_) => {}
                    _ => return Err(Error::Config("P.* must be matrices".into())),
                }
                // re-read through the typed accessor by rebuilding a probe block
                let probe = Block { entries: vec![("row".into(), v.clone())] };
                trans.push(probe.f64_matrix("row")?);
            }
            if let Some(Value::Number(r)) = block.get("rank") {
                if *r as usize != trans.len() {
                    return Err(Error::Config(format!(
                        "rank = {r} disagrees with {} transition matrices",
                        trans.len()
                    )));
                }
            }
            Ok(Measure::Markov(TreeMarkovMeasure::new(pi, trans)?))
        }
        "bernoulli" => {
            let rank = block.integer("rank")?;
            if rank == 0 {
                return Err(Error::Config("rank must be positive".into()));
            }
            let dist = block.f64_array("dist")?;
            Ok(Measure::Markov(TreeMarkovMeasure::bernoulli(rank, dist)?))
        }
        "finite" => {
            let mu = block.f64_array("mu")?;
            let n = mu.len();
            if let Some(Value::Number(declared)) = block.get("n") {
                if *declared as usize != n {
                    return Err(Error::Config(format!(
                        "n = {declared} disagrees with mu of length {n}"
                    )));
                }
            }
            let alpha = block.usize_array("alpha")?;
            let perm_values = block.per_generator("perm")?;
            let mut perms = Vec::with_capacity(perm_values.len());
            for v in perm_values {
                match v {
                    Value::Str(s) => perms.push(parse_perm(s, n)?),
                    _ => return Err(Error::Config("perm.* must be strings".into())),
                }
            }
            let rank = perms.len();
            Ok(Measure::Finite(FiniteAction::new(rank, perms, mu, alpha)?))
        }
        other => Err(Error::Config(format!("unknown measure block {other:?}"))),
    }
}

/// The first measure block of a document; errors when absent or ambiguous.
pub fn single_measure(doc: &Document) -> Result<Measure> {
    let found: Vec<(&String, &Block)> = doc
        .blocks
        .iter()
        .filter(|(n, _)| n == "markov" || n == "bernoulli" || n == "finite")
        .map(|(n, b)| (n, b))
        .collect();
    match found.len() {
        0 => Err(Error::Config("no measure block (markov/bernoulli/finite)".into())),
        1 => build_measure(found[0].0, found[0].1),
        k => Err(Error::Config(format!("{k} measure blocks; exactly one expected"))),
    }
}

/// Builds the coset action described by a `coset_action` block.
pub fn build_coset_action(block: &Block) -> Result<CosetAction> {
    let index = block.integer("index")?;
    if index == 0 {
        return Err(Error::Config("index must be positive".into()));
    }
    let perm_values = block.per_generator("perm")?;
    let mut perms = Vec::with_capacity(perm_values.len());
    for v in perm_values {
        match v {
            Value::Str(s) => perms.push(parse_perm(s, index)?),
            _ => return Err(Error::Config("perm.* must be strings".into())),
        }
    }
    let rank = perms.len();
    if let Some(Value::Number(r)) = block.get("rank") {
        if *r as usize != rank {
            return Err(Error::Config(format!(
                "rank = {r} disagrees with {rank} generator permutations"
            )));
        }
    }
    CosetAction::new(rank, perms)
}

/// Options shared by the commands; flags override these.
#[derive(Debug, Clone, Default)]
pub struct Options {
    pub n_max: Option<usize>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub log2: bool,
    pub rank_g: Option<usize>,
    pub count: Option<usize>,
    pub radius: Option<usize>,
    pub rank: Option<usize>,
}

pub fn read_options(doc: &Document) -> Result<Options> {
    let mut o = Options::default();
    if let Some(b) = doc.block("options") {
        if b.get("n_max").is_some() {
            o.n_max = Some(b.integer("n_max")?);
        }
        if b.get("tol").is_some() {
            o.tol = Some(b.number("tol")?);
        }
        if b.get("seed").is_some() {
            o.seed = Some(b.integer("seed")? as u64);
        }
        if b.get("log2").is_some() {
            o.log2 = b.number("log2")? != 0.0;
        }
        if b.get("rank_g").is_some() {
            o.rank_g = Some(b.integer("rank_g")?);
        }
        if b.get("count").is_some() {
            o.count = Some(b.integer("count")?);
        }
        if b.get("radius").is_some() {
            o.radius = Some(b.integer("radius")?);
        }
        if b.get("rank").is_some() {
            o.rank = Some(b.integer("rank")?);
        }
    }
    Ok(o)
}

/// Serializes a Markov measure back into a parseable `markov` block.
pub fn emit_markov(tm: &TreeMarkovMeasure) -> String {
    let mut out = String::from("markov {\n");
    out.push_str(&format!("  m = {}\n", tm.alphabet_size()));
    out.push_str(&format!("  pi = {}\n", fmt_vec(tm.pi())));
    for s in 1..=tm.rank() {
        let rows: Vec<String> = tm.transition(s).iter().map(|r| fmt_vec(r)).collect();
        let letter = (b'a' + (s - 1) as u8) as char;
        out.push_str(&format!("  P.{letter} = [{}]\n", rows.join(", ")));
    }
    out.push_str("}\n");
    out
}

fn fmt_vec(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|x| format!("{x:?}")).collect();
    format!("[{}]", items.join(", "))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
# the flip chain and the parity subgroup
markov {
  m  = 2
  pi = [0.5, 0.5]
  P.a = [[0.75, 0.25], [0.25, 0.75]]
  P.b = [[0.75, 0.25], [0.25, 0.75]]
}
coset_action {
  rank = 2
  index = 2
  perm.a = "(01)"
  perm.b = "(01)"
}
options { n_max = 3 seed = 11 tol = 1e-9 }
"#;

    #[test]
    fn parses_sample() {
        let doc = parse(SAMPLE).unwrap();
        let m = single_measure(&doc).unwrap();
        assert!(matches!(&m, Measure::Markov(tm) if tm.alphabet_size() == 2));
        let act = build_coset_action(doc.block("coset_action").unwrap()).unwrap();
        assert_eq!(act.index(), 2);
        let o = read_options(&doc).unwrap();
        assert_eq!(o.n_max, Some(3));
        assert_eq!(o.seed, Some(11));
        assert_eq!(o.tol, Some(1e-9));
    }

    #[test]
    fn perm_notations() {
        assert_eq!(parse_perm("(01)", 2).unwrap().images(), &[1, 0]);
        assert_eq!(parse_perm("(0 1 2)", 3).unwrap().images(), &[1, 2, 0]);
        assert_eq!(parse_perm("(012)", 3).unwrap().images(), &[1, 2, 0]);
        assert_eq!(parse_perm("1 2 0", 3).unwrap().images(), &[1, 2, 0]);
        assert_eq!(parse_perm("()", 3).unwrap().images(), &[0, 1, 2]);
        assert_eq!(parse_perm("(01)(23)", 4).unwrap().images(), &[1, 0, 3, 2]);
        assert!(parse_perm("(03)", 2).is_err());
    }

    #[test]
    fn finite_block() {
        let text = r#"
finite {
  n = 2
  perm.a = "(01)"
  perm.b = "()"
  mu = [0.5, 0.5]
  alpha = [0, 1]
}
"#;
        let doc = parse(text).unwrap();
        let m = single_measure(&doc).unwrap();
        assert!(matches!(&m, Measure::Finite(fa) if fa.rank() == 2));
    }

    #[test]
    fn bernoulli_block() {
        let doc = parse("bernoulli { rank = 2 dist = [0.5, 0.5] }").unwrap();
        let m = single_measure(&doc).unwrap();
        assert!(matches!(&m, Measure::Markov(tm) if tm.rank() == 2));
    }

    #[test]
    fn markov_round_trip() {
        let doc = parse(SAMPLE).unwrap();
        let Measure::Markov(tm) = single_measure(&doc).unwrap() else {
            panic!("markov expected");
        };
        let text = emit_markov(&tm);
        let doc2 = parse(&text).unwrap();
        let Measure::Markov(tm2) = single_measure(&doc2).unwrap() else {
            panic!("markov expected");
        };
        assert_eq!(tm.pi(), tm2.pi());
        for s in 1..=2 {
            assert_eq!(tm.transition(s), tm2.transition(s));
        }
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse("markov { pi = [0.5, }").is_err());
        assert!(parse("lonely").is_err());
        assert!(single_measure(&parse("options { }").unwrap()).is_err());
    }
}
