//! Line-oriented text formats. Rationals are always written as `p/q`; the
//! readers also accept integers and finite decimals. `#` starts a comment
//! everywhere except in CNF files, which use DIMACS `c` lines.
//!
//! Instance file:
//!
//! ```text
//! conhalving-instance 1
//! domain <lo> <hi>
//! bound <M>
//! agent <b_0> ... <b_k> | <d_1> ... <d_k>     (one line per agent)
//! meta circuit                               (optional)
//! eps <e>
//! eps_prime <e'>
//! copies <c>
//! offset <o>
//! coord_scale <s>
//! value_scale <v>
//! gate_eps <e_1> ... <e_g>
//! nodes <N>
//! gate <kind> <in1> <in2> <out> <alpha>      (repeated)
//! end
//! ```
//!
//! A `meta sat` section instead holds `eps`, `eps_prime`, `vars <k>` and one
//! `clause <lit> ...` line per clause, followed by `end`.
//!
//! Circuit file: `nodes <N>` followed by one gate per line,
//! `<kind> <in1> <in2> <out> <alpha>` with `-` for unused fields.
//!
//! Partition file:
//!
//! ```text
//! conhalving-partition 1
//! leftmost <+|->
//! cuts <c_1> ... <c_m>
//! ```

use conhalving::circuit::{Gate, GateKind, GenCircuit};
use conhalving::gcircuit::ReductionMeta;
use conhalving::halving::{CHInstance, CutPartition, Domain, Sign, StepValuation};
use conhalving::rational::{format_rational, parse_rational, Rational};
use conhalving::sat::CnfFormula;
use conhalving::tucker::TraceStep;
use std::fmt::Write;
use thiserror::Error;

pub const INSTANCE_HEADER: &str = "conhalving-instance";
pub const PARTITION_HEADER: &str = "conhalving-partition";
pub const TRACE_HEADER: &str = "conhalving-trace";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Token<'a> {
    text: &'a str,
    line: usize,
    column: usize,
}

impl Token<'_> {
    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError { line: self.line, column: self.column, message: message.into() }
    }

    fn rational(&self) -> Result<Rational, ParseError> {
        parse_rational(self.text).map_err(|e| self.error(e.to_string()))
    }

    fn number<T: std::str::FromStr>(&self, what: &str) -> Result<T, ParseError> {
        self.text.parse().map_err(|_| self.error(format!("expected {what}, found '{}'", self.text)))
    }
}

/// Non-empty lines split into tokens, with 1-based positions.
fn tokenize(text: &str, comment: Option<char>) -> Vec<(usize, Vec<Token<'_>>)> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let body = match comment.and_then(|c| raw.find(c)) {
            Some(at) => &raw[..at],
            None => raw,
        };
        let mut toks = Vec::new();
        let mut start = None;
        for (j, ch) in body.char_indices().chain(std::iter::once((body.len(), ' '))) {
            match (ch.is_whitespace(), start) {
                (false, None) => start = Some(j),
                (true, Some(s)) => {
                    toks.push(Token { text: &body[s..j], line: i + 1, column: s + 1 });
                    start = None;
                }
                _ => {}
            }
        }
        if !toks.is_empty() {
            out.push((i + 1, toks));
        }
    }
    out
}

struct Lines<'a> {
    lines: std::vec::IntoIter<(usize, Vec<Token<'a>>)>,
    last_line: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let last_line = text.lines().count().max(1);
        Self { lines: tokenize(text, Some('#')).into_iter(), last_line }
    }

    fn eof(&self, what: &str) -> ParseError {
        ParseError { line: self.last_line, column: 1, message: format!("unexpected end of file, expected {what}") }
    }

    fn next_line(&mut self) -> Option<Vec<Token<'a>>> {
        self.lines.next().map(|(_, t)| t)
    }

    /// The next line, which must start with `key`; returns the remaining tokens.
    fn expect(&mut self, key: &str) -> Result<(Token<'a>, Vec<Token<'a>>), ParseError> {
        let toks = self.next_line().ok_or_else(|| self.eof(key))?;
        if toks[0].text != key {
            return Err(toks[0].error(format!("expected '{key}', found '{}'", toks[0].text)));
        }
        let mut it = toks.into_iter();
        let head = it.next().unwrap();
        Ok((head, it.collect()))
    }

    fn expect_values(&mut self, key: &str, count: usize) -> Result<(Token<'a>, Vec<Token<'a>>), ParseError> {
        let (head, rest) = self.expect(key)?;
        if rest.len() != count {
            return Err(head.error(format!("'{key}' takes {count} value(s), found {}", rest.len())));
        }
        Ok((head, rest))
    }

    fn rational(&mut self, key: &str) -> Result<Rational, ParseError> {
        let (_, v) = self.expect_values(key, 1)?;
        v[0].rational()
    }
}

fn check_header(lines: &mut Lines<'_>, header: &str) -> Result<(), ParseError> {
    let (head, rest) = lines.expect(header).map_err(|mut e| {
        e.message = format!("not a {header} file: {}", e.message);
        e
    })?;
    let version = rest.first().ok_or_else(|| head.error("missing version"))?;
    let v: u32 = version.number("a version number")?;
    if v != VERSION || rest.len() != 1 {
        return Err(version.error(format!("unsupported {header} version {}, expected {VERSION}", version.text)));
    }
    Ok(())
}

fn join(values: &[Rational]) -> String {
    values.iter().map(format_rational).collect::<Vec<_>>().join(" ")
}

/// Reduction data carried by an instance file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Meta {
    Circuit { circuit: GenCircuit, meta: ReductionMeta, eps: Rational },
    Sat { formula: CnfFormula, eps: Rational, eps_prime: Rational },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceFile {
    pub instance: CHInstance,
    pub meta: Option<Meta>,
}

pub fn write_instance(file: &InstanceFile) -> String {
    let inst = &file.instance;
    let mut s = format!("{INSTANCE_HEADER} {VERSION}\n");
    let d = inst.domain();
    writeln!(s, "domain {} {}", format_rational(d.lo()), format_rational(d.hi())).unwrap();
    writeln!(s, "bound {}", format_rational(inst.bound())).unwrap();
    for a in inst.agents() {
        let sep = if a.densities().is_empty() { "|".to_string() } else { format!("| {}", join(a.densities())) };
        let bps = join(a.breakpoints());
        let lead = if bps.is_empty() { String::new() } else { format!("{bps} ") };
        writeln!(s, "agent {lead}{sep}").unwrap();
    }
    match &file.meta {
        None => {}
        Some(Meta::Circuit { circuit, meta, eps }) => {
            s.push_str("meta circuit\n");
            writeln!(s, "eps {}", format_rational(eps)).unwrap();
            writeln!(s, "eps_prime {}", format_rational(&meta.eps_prime)).unwrap();
            writeln!(s, "copies {}", meta.copies).unwrap();
            writeln!(s, "offset {}", format_rational(&meta.offset)).unwrap();
            writeln!(s, "coord_scale {}", format_rational(&meta.coord_scale)).unwrap();
            writeln!(s, "value_scale {}", format_rational(&meta.value_scale)).unwrap();
            writeln!(s, "gate_eps {}", join(&meta.gate_eps)).unwrap();
            for line in write_circuit(circuit).lines() {
                if line.starts_with("nodes") {
                    writeln!(s, "{line}").unwrap();
                } else {
                    writeln!(s, "gate {line}").unwrap();
                }
            }
            s.push_str("end\n");
        }
        Some(Meta::Sat { formula, eps, eps_prime }) => {
            s.push_str("meta sat\n");
            writeln!(s, "eps {}", format_rational(eps)).unwrap();
            writeln!(s, "eps_prime {}", format_rational(eps_prime)).unwrap();
            writeln!(s, "vars {}", formula.num_vars()).unwrap();
            for c in formula.clauses() {
                let lits: Vec<String> = c.iter().map(|l| l.to_string()).collect();
                writeln!(s, "clause {}", lits.join(" ")).unwrap();
            }
            s.push_str("end\n");
        }
    }
    s
}

pub fn parse_instance(text: &str) -> Result<InstanceFile, ParseError> {
    let mut lines = Lines::new(text);
    check_header(&mut lines, INSTANCE_HEADER)?;
    let (dh, dv) = lines.expect_values("domain", 2)?;
    let domain = Domain::new(dv[0].rational()?, dv[1].rational()?).map_err(|e| dh.error(e.to_string()))?;
    let (bh, bv) = lines.expect_values("bound", 1)?;
    let bound = bv[0].rational()?;
    let mut agents = Vec::new();
    let mut meta_line = None;
    while let Some(toks) = lines.next_line() {
        match toks[0].text {
            "agent" => agents.push(parse_agent(&toks)?),
            "meta" => {
                meta_line = Some(toks);
                break;
            }
            other => return Err(toks[0].error(format!("expected 'agent' or 'meta', found '{other}'"))),
        }
    }
    let instance = CHInstance::with_bound(domain, agents, bound).map_err(|e| bh.error(e.to_string()))?;
    let meta = match meta_line {
        None => None,
        Some(toks) => {
            let kind = toks.get(1).ok_or_else(|| toks[0].error("missing meta kind"))?;
            let m = match kind.text {
                "circuit" => parse_circuit_meta(&mut lines)?,
                "sat" => parse_sat_meta(&mut lines)?,
                other => return Err(kind.error(format!("unknown meta kind '{other}'"))),
            };
            if let Some(extra) = lines.next_line() {
                return Err(extra[0].error("content after 'end'"));
            }
            Some(m)
        }
    };
    Ok(InstanceFile { instance, meta })
}

fn parse_agent(toks: &[Token<'_>]) -> Result<StepValuation, ParseError> {
    let bar = toks
        .iter()
        .position(|t| t.text == "|")
        .ok_or_else(|| toks[0].error("agent line needs '|' between breakpoints and densities"))?;
    let bps = toks[1..bar].iter().map(Token::rational).collect::<Result<Vec<_>, _>>()?;
    let dens = toks[bar + 1..].iter().map(Token::rational).collect::<Result<Vec<_>, _>>()?;
    if bps.is_empty() && dens.is_empty() {
        return Ok(StepValuation::zero());
    }
    StepValuation::new(bps, dens).map_err(|e| toks[0].error(e.to_string()))
}

fn parse_circuit_meta(lines: &mut Lines<'_>) -> Result<Meta, ParseError> {
    let eps = lines.rational("eps")?;
    let eps_prime = lines.rational("eps_prime")?;
    let (_, c) = lines.expect_values("copies", 1)?;
    let copies: usize = c[0].number("a copy count")?;
    let offset = lines.rational("offset")?;
    let coord_scale = lines.rational("coord_scale")?;
    let value_scale = lines.rational("value_scale")?;
    let (_, ge) = lines.expect("gate_eps")?;
    let gate_eps = ge.iter().map(Token::rational).collect::<Result<Vec<_>, _>>()?;
    let (nh, nv) = lines.expect_values("nodes", 1)?;
    let nodes: usize = nv[0].number("a node count")?;
    let mut gates = Vec::new();
    loop {
        let toks = lines.next_line().ok_or_else(|| lines.eof("'end'"))?;
        match toks[0].text {
            "end" => break,
            "gate" => gates.push(parse_gate(&toks[1..], &toks[0])?),
            other => return Err(toks[0].error(format!("expected 'gate' or 'end', found '{other}'"))),
        }
    }
    let circuit = GenCircuit::new(nodes, gates);
    check_circuit(&circuit, &nh)?;
    if gate_eps.len() != circuit.gates.len() {
        return Err(nh.error(format!("{} gate tolerances for {} gates", gate_eps.len(), circuit.gates.len())));
    }
    let meta = ReductionMeta { num_nodes: nodes, copies, offset, coord_scale, value_scale, gate_eps, eps_prime };
    Ok(Meta::Circuit { circuit, meta, eps })
}

fn parse_sat_meta(lines: &mut Lines<'_>) -> Result<Meta, ParseError> {
    let eps = lines.rational("eps")?;
    let eps_prime = lines.rational("eps_prime")?;
    let (vh, vv) = lines.expect_values("vars", 1)?;
    let vars: usize = vv[0].number("a variable count")?;
    let mut clauses = Vec::new();
    loop {
        let toks = lines.next_line().ok_or_else(|| lines.eof("'end'"))?;
        match toks[0].text {
            "end" => break,
            "clause" => clauses.push(toks[1..].iter().map(|t| t.number("a literal")).collect::<Result<Vec<i32>, _>>()?),
            other => return Err(toks[0].error(format!("expected 'clause' or 'end', found '{other}'"))),
        }
    }
    let formula = CnfFormula::new(vars, clauses).map_err(|e| vh.error(e.to_string()))?;
    Ok(Meta::Sat { formula, eps, eps_prime })
}

fn check_circuit(c: &GenCircuit, at: &Token<'_>) -> Result<(), ParseError> {
    match c.validate().first() {
        None => Ok(()),
        Some(v) => Err(at.error(format!("invalid circuit: {v}"))),
    }
}

/// `<kind> <in1> <in2> <out> <alpha>`; `at` locates errors when `toks` is empty.
fn parse_gate(toks: &[Token<'_>], at: &Token<'_>) -> Result<Gate, ParseError> {
    if toks.len() != 5 {
        let t = toks.first().unwrap_or(at);
        return Err(t.error(format!("a gate line has 5 fields (kind in1 in2 out alpha), found {}", toks.len())));
    }
    let kind = GateKind::from_name(toks[0].text).ok_or_else(|| toks[0].error(format!("unknown gate kind '{}'", toks[0].text)))?;
    let opt = |t: &Token<'_>| -> Result<Option<usize>, ParseError> {
        if t.text == "-" {
            Ok(None)
        } else {
            t.number("a node index or '-'").map(Some)
        }
    };
    let inputs: Vec<usize> = [opt(&toks[1])?, opt(&toks[2])?].into_iter().flatten().collect();
    if toks[1].text == "-" && toks[2].text != "-" {
        return Err(toks[1].error("in1 must be given before in2"));
    }
    if inputs.len() != kind.arity() {
        return Err(toks[0].error(format!(
            "gate '{}' takes {} input(s), found {}",
            kind.name(),
            kind.arity(),
            inputs.len()
        )));
    }
    let out: usize = toks[3].number("an output node index")?;
    let alpha = if toks[4].text == "-" { None } else { Some(toks[4].rational()?) };
    match (kind.has_alpha(), &alpha) {
        (true, None) => return Err(toks[4].error(format!("gate '{}' needs alpha", kind.name()))),
        (false, Some(_)) => return Err(toks[4].error(format!("gate '{}' takes no alpha", kind.name()))),
        _ => {}
    }
    Ok(Gate { kind, inputs, out, alpha })
}

pub fn write_circuit(c: &GenCircuit) -> String {
    let mut s = format!("nodes {}\n", c.num_nodes);
    for g in &c.gates {
        let inp = |k: usize| g.inputs.get(k).map_or("-".to_string(), |v| v.to_string());
        let alpha = g.alpha.as_ref().map_or("-".to_string(), format_rational);
        writeln!(s, "{} {} {} {} {}", g.kind.name(), inp(0), inp(1), g.out, alpha).unwrap();
    }
    s
}

pub fn parse_circuit(text: &str) -> Result<GenCircuit, ParseError> {
    let mut lines = Lines::new(text);
    let (nh, nv) = lines.expect_values("nodes", 1)?;
    let nodes: usize = nv[0].number("a node count")?;
    let mut gates = Vec::new();
    while let Some(toks) = lines.next_line() {
        gates.push(parse_gate(&toks, &toks[0])?);
    }
    let c = GenCircuit::new(nodes, gates);
    check_circuit(&c, &nh)?;
    Ok(c)
}

/// DIMACS CNF: `c` comment lines, a `p cnf <vars> <clauses>` header, then
/// zero-terminated clauses that may span lines. A line starting with `%` ends the input.
pub fn parse_cnf(text: &str) -> Result<CnfFormula, ParseError> {
    let mut header: Option<(usize, usize, Token<'_>)> = None;
    let mut clauses: Vec<Vec<i32>> = Vec::new();
    let mut current: Vec<i32> = Vec::new();
    let mut last = Token { text: "", line: 1, column: 1 };
    for (_, toks) in tokenize(text, None) {
        match toks[0].text {
            "c" => continue,
            "%" => break,
            "p" => {
                if header.is_some() {
                    return Err(toks[0].error("duplicate 'p' line"));
                }
                if toks.len() != 4 || toks[1].text != "cnf" {
                    return Err(toks[0].error("expected 'p cnf <vars> <clauses>'"));
                }
                header = Some((toks[2].number("a variable count")?, toks[3].number("a clause count")?, toks[0].clone()));
                continue;
            }
            _ => {}
        }
        if header.is_none() {
            return Err(toks[0].error("clause before the 'p cnf' line"));
        }
        for t in toks {
            let lit: i32 = t.number("a literal")?;
            if lit == 0 {
                clauses.push(std::mem::take(&mut current));
            } else {
                current.push(lit);
            }
            last = t;
        }
    }
    let (vars, count, head) = header.ok_or(ParseError { line: 1, column: 1, message: "missing 'p cnf' line".into() })?;
    if !current.is_empty() {
        return Err(last.error("last clause is not terminated by 0"));
    }
    if clauses.len() != count {
        return Err(head.error(format!("header declares {count} clauses, found {}", clauses.len())));
    }
    CnfFormula::new(vars, clauses).map_err(|e| head.error(e.to_string()))
}

pub fn write_cnf(f: &CnfFormula) -> String {
    let mut s = format!("p cnf {} {}\n", f.num_vars(), f.num_clauses());
    for c in f.clauses() {
        let lits: Vec<String> = c.iter().map(|l| l.to_string()).collect();
        writeln!(s, "{} 0", lits.join(" ")).unwrap();
    }
    s
}

pub fn write_partition(p: &CutPartition) -> String {
    let cuts = join(p.cuts());
    let cuts = if cuts.is_empty() { "cuts".to_string() } else { format!("cuts {cuts}") };
    format!("{PARTITION_HEADER} {VERSION}\nleftmost {}\n{cuts}\n", p.leftmost().symbol())
}

/// Reads a partition and canonicalizes it against `domain`.
pub fn parse_partition(text: &str, domain: &Domain) -> Result<CutPartition, ParseError> {
    let mut lines = Lines::new(text);
    check_header(&mut lines, PARTITION_HEADER)?;
    let (_, s) = lines.expect_values("leftmost", 1)?;
    let sign = match s[0].text {
        "+" => Sign::Plus,
        "-" => Sign::Minus,
        other => return Err(s[0].error(format!("leftmost sign must be '+' or '-', found '{other}'"))),
    };
    let (ch, cv) = lines.expect("cuts")?;
    let cuts = cv.iter().map(Token::rational).collect::<Result<Vec<_>, _>>()?;
    if let Some(extra) = lines.next_line() {
        return Err(extra[0].error("unexpected content after 'cuts'"));
    }
    CutPartition::new(domain, cuts, sign).map_err(|e| ch.error(e.to_string()))
}

pub fn write_trace(steps: &[TraceStep]) -> String {
    let mut s = format!("{TRACE_HEADER} {VERSION}\n");
    for step in steps {
        writeln!(s, "{step}").unwrap();
    }
    s
}

/// Columnar plot data: `density <agent> <lo> <hi> <value>` rows for every
/// step of every agent, then `cut <position> <sign to the right>` rows.
pub fn write_plot(inst: &CHInstance, p: &CutPartition) -> String {
    let f = conhalving::rational::to_f64;
    let mut s = String::from("# kind agent lo hi density | kind position sign\n");
    for (i, a) in inst.agents().iter().enumerate() {
        for (j, d) in a.densities().iter().enumerate() {
            let (lo, hi) = (&a.breakpoints()[j], &a.breakpoints()[j + 1]);
            writeln!(s, "density {i} {} {} {}", f(lo), f(hi), f(d)).unwrap();
        }
    }
    let mut sign = p.leftmost();
    for c in p.cuts() {
        sign = sign.flip();
        writeln!(s, "cut {} {}", f(c), sign.symbol()).unwrap();
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use conhalving::rational::{int, rat};

    fn sample() -> CHInstance {
        let d = Domain::new(int(0), int(3)).unwrap();
        let a = StepValuation::new(vec![int(0), int(1), int(2)], vec![int(4), rat(1, 2)]).unwrap();
        CHInstance::new(d, vec![a, StepValuation::zero()]).unwrap()
    }

    #[test]
    fn instance_round_trip() {
        let f = InstanceFile { instance: sample(), meta: None };
        let text = write_instance(&f);
        assert_eq!(parse_instance(&text).unwrap(), f);
        assert_eq!(write_instance(&parse_instance(&text).unwrap()), text);
    }

    #[test]
    fn instance_with_sat_meta_round_trip() {
        let formula = CnfFormula::new(2, vec![vec![1, -2], vec![2]]).unwrap();
        let f = InstanceFile { instance: sample(), meta: Some(Meta::Sat { formula, eps: rat(1, 10), eps_prime: rat(1, 200) }) };
        assert_eq!(parse_instance(&write_instance(&f)).unwrap(), f);
    }

    #[test]
    fn version_mismatch_is_reported() {
        let text = write_instance(&InstanceFile { instance: sample(), meta: None }).replace("instance 1", "instance 2");
        let e = parse_instance(&text).unwrap_err();
        assert_eq!((e.line, e.column), (1, 21));
        assert!(e.message.contains("version"));
    }

    #[test]
    fn circuit_parsing() {
        let c = parse_circuit("# two nodes\nnodes 2\nconst - - 0 1/2\nscale 0 - 1 0.5\n").unwrap();
        assert_eq!(c.gates.len(), 2);
        assert_eq!(c.gates[1].alpha, Some(rat(1, 2)));
        assert_eq!(parse_circuit(&write_circuit(&c)).unwrap(), c);
        let e = parse_circuit("nodes 3\nadd 0 - 2 -\n").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(e.message.contains("gate 'add'"), "{e}");
        let e = parse_circuit("nodes 2\nconst - - 0 -\n").unwrap_err();
        assert!(e.message.contains("needs alpha"));
        let e = parse_circuit("nodes 2\nadd 0 1 1 -\n").unwrap_err();
        assert!(e.message.contains("invalid circuit"));
    }

    #[test]
    fn dimacs_parsing() {
        let f = parse_cnf("c example\np cnf 3 2\n1 -2\n 3 0 -1\n0\n").unwrap();
        assert_eq!(f.clauses(), &[vec![1, -2, 3], vec![-1]]);
        assert_eq!(parse_cnf(&write_cnf(&f)).unwrap(), f);
        assert!(parse_cnf("p cnf 1 2\n1 0\n").unwrap_err().message.contains("declares 2"));
        assert!(parse_cnf("p cnf 1 1\n1\n").unwrap_err().message.contains("terminated"));
    }

    #[test]
    fn partition_round_trip() {
        let d = Domain::new(int(0), int(1)).unwrap();
        let p = CutPartition::new(&d, vec![rat(1, 3), rat(1, 2)], Sign::Plus).unwrap();
        let text = write_partition(&p);
        assert_eq!(text, "conhalving-partition 1\nleftmost +\ncuts 1/3 1/2\n");
        assert_eq!(parse_partition(&text, &d).unwrap(), p);
        let whole = CutPartition::whole(Sign::Minus);
        assert_eq!(parse_partition(&write_partition(&whole), &d).unwrap(), whole);
        let e = parse_partition("conhalving-partition 1\nleftmost *\ncuts\n", &d).unwrap_err();
        assert_eq!((e.line, e.column), (2, 10));
    }
}
