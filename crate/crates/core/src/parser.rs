//! Reader and writer for the Cassandra `.POMDP` text format.
//!
//! Supported: the preamble (`discount`, `values`, `states`, `actions`,
//! `observations`, `start`, `start include`, `start exclude`) and `T:`,
//! `O:`, `R:` entries in scalar, row and matrix form with `*` wildcards and
//! the `uniform` / `identity` keywords. Later entries override earlier ones.
//! Observation-specific rewards are folded into `R(s, a, s')` by taking the
//! expectation under the observation model.
//!
//! Diagnostics number states, actions and observations from 1.

use std::collections::HashMap;
use std::fmt;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{validate_model, ModelBuilder, ModelDiagnostic, PomdpModel};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParseDiagnostic {
    /// 1-based source line.
    pub line: usize,
    pub message: String,
    pub severity: Severity,
}

impl ParseDiagnostic {
    fn error(line: usize, message: impl Into<String>) -> Self {
        ParseDiagnostic {
            line: line.max(1),
            message: message.into(),
            severity: Severity::Error,
        }
    }

    fn warning(line: usize, message: impl Into<String>) -> Self {
        ParseDiagnostic {
            line: line.max(1),
            message: message.into(),
            severity: Severity::Warning,
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "line {}: {sev}: {}", self.line, self.message)
    }
}

/// Parses `.POMDP` text. Fails with [`Error::Parse`] if any error diagnostic is raised.
pub fn parse_pomdp(text: &str) -> Result<PomdpModel> {
    match parse_pomdp_with_diagnostics(text) {
        (Some(model), diags) => {
            for d in &diags {
                log::warn!("{d}");
            }
            Ok(model)
        }
        (None, diags) => Err(Error::Parse(diags)),
    }
}

/// Parses `.POMDP` text, returning the model (if no errors) and every diagnostic.
pub fn parse_pomdp_with_diagnostics(text: &str) -> (Option<PomdpModel>, Vec<ParseDiagnostic>) {
    let tokens = tokenize(text);
    let mut parser = Parser {
        tokens: &tokens,
        pos: 0,
        diags: Vec::new(),
        state: None,
    };
    parser.run();
    let model = parser.finish();
    let diags = parser.diags;
    if diags.iter().any(ParseDiagnostic::is_error) {
        (None, diags)
    } else {
        (model, diags)
    }
}

/// Reads and parses a model file, attaches `terminal_states` and requires a clean validation.
pub fn load_model(path: impl AsRef<Path>, terminal_states: &[usize]) -> Result<PomdpModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let model = parse_pomdp(&text)?.with_terminal_states(terminal_states)?;
    let diags = validate_model(&model);
    if !diags.is_empty() {
        return Err(Error::Parse(
            diags
                .iter()
                .map(|d| ParseDiagnostic::error(1, d.to_string()))
                .collect(),
        ));
    }
    Ok(model)
}

#[derive(Clone, Copy, Debug)]
struct Token<'a> {
    text: &'a str,
    line: usize,
}

fn tokenize(text: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("");
        for word in body.split_whitespace() {
            let mut rest = word;
            while let Some(idx) = rest.find(':') {
                if idx > 0 {
                    out.push(Token {
                        text: &rest[..idx],
                        line,
                    });
                }
                out.push(Token {
                    text: &rest[idx..idx + 1],
                    line,
                });
                rest = &rest[idx + 1..];
            }
            if !rest.is_empty() {
                out.push(Token { text: rest, line });
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    State,
    Action,
    Observation,
}

impl Kind {
    fn noun(self) -> &'static str {
        match self {
            Kind::State => "state",
            Kind::Action => "action",
            Kind::Observation => "observation",
        }
    }
}

#[derive(Clone, Copy, Debug)]
enum Spec {
    All,
    One(usize),
}

impl Spec {
    fn indices(self, n: usize) -> std::ops::Range<usize> {
        match self {
            Spec::All => 0..n,
            Spec::One(i) => i..i + 1,
        }
    }
}

#[derive(Default)]
struct Declared {
    discount: Option<f64>,
    cost: bool,
    states: Option<(usize, Option<Vec<String>>)>,
    actions: Option<(usize, Option<Vec<String>>)>,
    observations: Option<(usize, Option<Vec<String>>)>,
    start_line: usize,
}

struct Tables {
    builder: ModelBuilder,
    start: Option<Vec<f64>>,
    /// Observation-specific rewards keyed by `(a, s, s')`.
    reward_by_obs: HashMap<(usize, usize, usize), Vec<f64>>,
    first_reward_by_obs_line: Option<usize>,
    t_lines: Vec<usize>,
    o_lines: Vec<usize>,
}

struct Parser<'t, 'a> {
    tokens: &'t [Token<'a>],
    pos: usize,
    diags: Vec<ParseDiagnostic>,
    state: Option<(Declared, Option<Tables>)>,
}

const SECTIONS: [&str; 10] = [
    "discount",
    "values",
    "states",
    "actions",
    "observations",
    "start",
    "T",
    "O",
    "R",
    "E",
];

impl<'t, 'a> Parser<'t, 'a> {
    fn text_at(&self, pos: usize) -> Option<&'a str> {
        self.tokens.get(pos).map(|t| t.text)
    }

    fn is_section_start(&self, pos: usize) -> bool {
        match self.text_at(pos) {
            Some("start") => matches!(self.text_at(pos + 1), Some(":" | "include" | "exclude")),
            Some(t) if SECTIONS.contains(&t) => self.text_at(pos + 1) == Some(":"),
            _ => false,
        }
    }

    fn err(&mut self, line: usize, msg: impl Into<String>) {
        self.diags.push(ParseDiagnostic::error(line, msg));
    }

    fn run(&mut self) {
        self.state = Some((Declared::default(), None));
        while self.pos < self.tokens.len() {
            let head = self.tokens[self.pos];
            if !self.is_section_start(self.pos) {
                self.err(head.line, format!("unexpected token `{}`", head.text));
                self.pos += 1;
                while self.pos < self.tokens.len() && !self.is_section_start(self.pos) {
                    self.pos += 1;
                }
                continue;
            }
            self.pos += 1;
            let mut qualifier = None;
            if head.text == "start" && matches!(self.text_at(self.pos), Some("include" | "exclude")) {
                qualifier = self.text_at(self.pos);
                self.pos += 1;
            }
            // skip ':'
            self.pos += 1;
            let begin = self.pos;
            while self.pos < self.tokens.len() && !self.is_section_start(self.pos) {
                self.pos += 1;
            }
            let body = &self.tokens[begin..self.pos];
            self.section(head, qualifier, body);
        }
    }

    fn section(&mut self, head: Token<'a>, qualifier: Option<&str>, body: &[Token<'a>]) {
        let line = head.line;
        let is_entry = matches!(head.text, "T" | "O" | "R" | "E" | "start");
        if is_entry && !self.ensure_tables(line) {
            return;
        }
        match head.text {
            "discount" => match body {
                [v] => match parse_number(v.text) {
                    Some(d) => self.declared().discount = Some(d),
                    None => self.err(v.line, format!("malformed number `{}`", v.text)),
                },
                _ => self.err(line, "discount expects one number"),
            },
            "values" => match body {
                [v] if v.text == "reward" => self.declared().cost = false,
                [v] if v.text == "cost" => self.declared().cost = true,
                _ => self.err(line, "values expects `reward` or `cost`"),
            },
            "states" | "actions" | "observations" => self.declare(head, body),
            "start" => self.start(line, qualifier, body),
            "T" => self.transition_entry(line, body),
            "O" => self.observation_entry(line, body),
            "R" => self.reward_entry(line, body),
            _ => self.err(line, format!("unsupported format extension `{}:`", head.text)),
        }
    }

    fn declared(&mut self) -> &mut Declared {
        &mut self.state.as_mut().unwrap().0
    }

    fn tables(&mut self) -> &mut Tables {
        self.state.as_mut().unwrap().1.as_mut().unwrap()
    }

    fn declare(&mut self, head: Token<'a>, body: &[Token<'a>]) {
        let decl = match body {
            [] => {
                self.err(head.line, format!("{} declaration is empty", head.text));
                return;
            }
            [n] if n.text.chars().all(|c| c.is_ascii_digit()) => match n.text.parse::<usize>() {
                Ok(count) if count > 0 => (count, None),
                _ => {
                    self.err(n.line, format!("{} count must be positive", head.text));
                    return;
                }
            },
            names => {
                let names: Vec<String> = names.iter().map(|t| t.text.to_string()).collect();
                for (i, n) in names.iter().enumerate() {
                    if names[..i].contains(n) {
                        self.err(head.line, format!("duplicate name `{n}` in {}", head.text));
                    }
                }
                (names.len(), Some(names))
            }
        };
        let slot = {
            let d = self.declared();
            match head.text {
                "states" => &mut d.states,
                "actions" => &mut d.actions,
                _ => &mut d.observations,
            }
        };
        if slot.is_some() {
            let line = head.line;
            let what = head.text;
            self.err(line, format!("{what} declared twice"));
        } else {
            *slot = Some(decl);
        }
        if self.state.as_ref().unwrap().1.is_some() {
            self.err(head.line, "preamble declarations must precede entries");
        }
    }

    /// Allocates the tables once the preamble is complete.
    fn ensure_tables(&mut self, line: usize) -> bool {
        if self.state.as_ref().unwrap().1.is_some() {
            return true;
        }
        let d = &self.state.as_ref().unwrap().0;
        let (Some(states), Some(actions), Some(observations)) =
            (d.states.clone(), d.actions.clone(), d.observations.clone())
        else {
            self.err(
                line,
                "entries require `states:`, `actions:` and `observations:` to be declared first",
            );
            return false;
        };
        let mut builder = ModelBuilder::new(states.0, actions.0, observations.0);
        builder.labels.states = states.1;
        builder.labels.actions = actions.1;
        builder.labels.observations = observations.1;
        let rows = actions.0 * states.0;
        self.state.as_mut().unwrap().1 = Some(Tables {
            builder,
            start: None,
            reward_by_obs: HashMap::new(),
            first_reward_by_obs_line: None,
            t_lines: vec![0; rows],
            o_lines: vec![0; rows],
        });
        true
    }

    fn count(&self, kind: Kind) -> usize {
        let b = &self.state.as_ref().unwrap().1.as_ref().unwrap().builder;
        match kind {
            Kind::State => b.num_states(),
            Kind::Action => b.num_actions(),
            Kind::Observation => b.num_observations(),
        }
    }

    fn resolve(&mut self, kind: Kind, tok: Token<'a>, allow_wildcard: bool) -> Option<Spec> {
        if tok.text == "*" {
            if allow_wildcard {
                return Some(Spec::All);
            }
            self.err(tok.line, format!("wildcard not allowed for {} here", kind.noun()));
            return None;
        }
        let n = self.count(kind);
        if tok.text.chars().all(|c| c.is_ascii_digit()) {
            return match tok.text.parse::<usize>() {
                Ok(i) if i < n => Some(Spec::One(i)),
                _ => {
                    self.err(
                        tok.line,
                        format!("{} index {} out of range (1..={n} in 1-based numbering)", kind.noun(), tok.text),
                    );
                    None
                }
            };
        }
        let labels = &self.state.as_ref().unwrap().1.as_ref().unwrap().builder.labels;
        let names = match kind {
            Kind::State => &labels.states,
            Kind::Action => &labels.actions,
            Kind::Observation => &labels.observations,
        };
        match names.as_ref().and_then(|n| n.iter().position(|x| x == tok.text)) {
            Some(i) => Some(Spec::One(i)),
            None => {
                self.err(tok.line, format!("unknown {} `{}`", kind.noun(), tok.text));
                None
            }
        }
    }

    /// Splits `a : b : c v1 v2` into specifier tokens and trailing value tokens.
    fn split_entry(&mut self, line: usize, body: &[Token<'a>], max_specs: usize) -> Option<(Vec<Token<'a>>, Vec<Token<'a>>)> {
        let mut specs = Vec::new();
        let mut i = 0;
        loop {
            match body.get(i) {
                Some(t) if t.text != ":" => {
                    specs.push(*t);
                    i += 1;
                }
                _ => {
                    self.err(line, "expected a specifier");
                    return None;
                }
            }
            if specs.len() < max_specs && body.get(i).map(|t| t.text) == Some(":") {
                i += 1;
                continue;
            }
            break;
        }
        let values = body[i..].to_vec();
        if let Some(c) = values.iter().find(|t| t.text == ":") {
            self.err(c.line, "too many `:`-separated specifiers");
            return None;
        }
        Some((specs, values))
    }

    fn numbers(&mut self, values: &[Token<'a>], expected: usize, what: &str, line: usize) -> Option<Vec<f64>> {
        if values.len() != expected {
            self.err(
                values.first().map_or(line, |t| t.line),
                format!("{what} expects {expected} value(s), found {}", values.len()),
            );
            return None;
        }
        let mut out = Vec::with_capacity(expected);
        for t in values {
            match parse_number(t.text) {
                Some(v) => out.push(v),
                None => {
                    self.err(t.line, format!("malformed number `{}`", t.text));
                    return None;
                }
            }
        }
        Some(out)
    }

    fn start(&mut self, line: usize, qualifier: Option<&str>, body: &[Token<'a>]) {
        let n = self.count(Kind::State);
        let start = match qualifier {
            Some(q) => {
                let mut chosen = vec![false; n];
                for t in body {
                    if let Some(spec) = self.resolve(Kind::State, *t, false) {
                        for s in spec.indices(n) {
                            chosen[s] = true;
                        }
                    }
                }
                let keep = |c: bool| if q == "include" { c } else { !c };
                let k = chosen.iter().filter(|&&c| keep(c)).count();
                if k == 0 {
                    self.err(line, "start set is empty");
                    return;
                }
                chosen
                    .iter()
                    .map(|&c| if keep(c) { 1.0 / k as f64 } else { 0.0 })
                    .collect()
            }
            None => match body {
                [t] if t.text == "uniform" => vec![1.0 / n as f64; n],
                [t] if n > 1 || parse_number(t.text).is_none() => {
                    let Some(Spec::One(s)) = self.resolve(Kind::State, *t, false) else {
                        return;
                    };
                    let mut v = vec![0.0; n];
                    v[s] = 1.0;
                    v
                }
                _ => match self.numbers(body, n, "start distribution", line) {
                    Some(v) => v,
                    None => return,
                },
            },
        };
        self.declared().start_line = line;
        self.tables().start = Some(start);
    }

    fn transition_entry(&mut self, line: usize, body: &[Token<'a>]) {
        let Some((specs, values)) = self.split_entry(line, body, 3) else {
            return;
        };
        let ns = self.count(Kind::State);
        let Some(a) = self.resolve(Kind::Action, specs[0], true) else {
            return;
        };
        let na = self.count(Kind::Action);
        let s = match specs.get(1) {
            Some(t) => match self.resolve(Kind::State, *t, true) {
                Some(s) => Some(s),
                None => return,
            },
            None => None,
        };
        let s2 = match specs.get(2) {
            Some(t) => match self.resolve(Kind::State, *t, true) {
                Some(s) => Some(s),
                None => return,
            },
            None => None,
        };
        // matrix[s][s'] for the selected actions
        let write = |tables: &mut Tables, row_spec: Spec, col_spec: Spec, f: &dyn Fn(usize, usize) -> f64| {
            for ai in a.indices(na) {
                for si in row_spec.indices(ns) {
                    tables.t_lines[ai * ns + si] = line;
                    for sj in col_spec.indices(ns) {
                        let idx = tables.builder.t_index(ai, si, sj);
                        tables.builder.transition[idx] = f(si, sj);
                    }
                }
            }
        };
        match (s, s2) {
            (Some(s), Some(s2)) => {
                let Some(v) = self.numbers(&values, 1, "T scalar entry", line) else {
                    return;
                };
                write(self.tables(), s, s2, &|_, _| v[0]);
            }
            (Some(s), None) => {
                let row = match values.as_slice() {
                    [t] if t.text == "uniform" => vec![1.0 / ns as f64; ns],
                    _ => match self.numbers(&values, ns, "T row", line) {
                        Some(v) => v,
                        None => return,
                    },
                };
                write(self.tables(), s, Spec::All, &|_, j| row[j]);
            }
            (None, _) => {
                let matrix = match values.as_slice() {
                    [t] if t.text == "uniform" => vec![1.0 / ns as f64; ns * ns],
                    [t] if t.text == "identity" => {
                        (0..ns * ns).map(|k| if k / ns == k % ns { 1.0 } else { 0.0 }).collect()
                    }
                    _ => match self.numbers(&values, ns * ns, "T matrix", line) {
                        Some(v) => v,
                        None => return,
                    },
                };
                write(self.tables(), Spec::All, Spec::All, &|i, j| matrix[i * ns + j]);
            }
        }
    }

    fn observation_entry(&mut self, line: usize, body: &[Token<'a>]) {
        let Some((specs, values)) = self.split_entry(line, body, 3) else {
            return;
        };
        let (ns, na, no) = (
            self.count(Kind::State),
            self.count(Kind::Action),
            self.count(Kind::Observation),
        );
        let Some(a) = self.resolve(Kind::Action, specs[0], true) else {
            return;
        };
        let s2 = match specs.get(1) {
            Some(t) => match self.resolve(Kind::State, *t, true) {
                Some(s) => Some(s),
                None => return,
            },
            None => None,
        };
        let o = match specs.get(2) {
            Some(t) => match self.resolve(Kind::Observation, *t, true) {
                Some(o) => Some(o),
                None => return,
            },
            None => None,
        };
        let write = |tables: &mut Tables, row_spec: Spec, col_spec: Spec, f: &dyn Fn(usize, usize) -> f64| {
            for ai in a.indices(na) {
                for si in row_spec.indices(ns) {
                    tables.o_lines[ai * ns + si] = line;
                    for oi in col_spec.indices(no) {
                        let idx = tables.builder.o_index(ai, si, oi);
                        tables.builder.observation[idx] = f(si, oi);
                    }
                }
            }
        };
        match (s2, o) {
            (Some(s2), Some(o)) => {
                let Some(v) = self.numbers(&values, 1, "O scalar entry", line) else {
                    return;
                };
                write(self.tables(), s2, o, &|_, _| v[0]);
            }
            (Some(s2), None) => {
                let row = match values.as_slice() {
                    [t] if t.text == "uniform" => vec![1.0 / no as f64; no],
                    _ => match self.numbers(&values, no, "O row", line) {
                        Some(v) => v,
                        None => return,
                    },
                };
                write(self.tables(), s2, Spec::All, &|_, j| row[j]);
            }
            (None, _) => {
                let matrix = match values.as_slice() {
                    [t] if t.text == "uniform" => vec![1.0 / no as f64; ns * no],
                    _ => match self.numbers(&values, ns * no, "O matrix", line) {
                        Some(v) => v,
                        None => return,
                    },
                };
                write(self.tables(), Spec::All, Spec::All, &|i, j| matrix[i * no + j]);
            }
        }
    }

    fn reward_entry(&mut self, line: usize, body: &[Token<'a>]) {
        let Some((specs, values)) = self.split_entry(line, body, 4) else {
            return;
        };
        let (ns, na, no) = (
            self.count(Kind::State),
            self.count(Kind::Action),
            self.count(Kind::Observation),
        );
        let mut resolved = Vec::with_capacity(4);
        let kinds = [Kind::Action, Kind::State, Kind::State, Kind::Observation];
        for (t, kind) in specs.iter().zip(kinds) {
            match self.resolve(kind, *t, true) {
                Some(s) => resolved.push(s),
                None => return,
            }
        }
        if specs.len() < 2 {
            self.err(line, "R entry needs at least action and start-state specifiers");
            return;
        }
        // value(s', o) over the selected (a, s)
        let (s2_spec, o_spec, vals, width): (Spec, Spec, Vec<f64>, usize) = match specs.len() {
            4 => {
                let Some(v) = self.numbers(&values, 1, "R scalar entry", line) else {
                    return;
                };
                (resolved[2], resolved[3], v, 0)
            }
            3 => {
                let Some(v) = self.numbers(&values, no, "R row", line) else {
                    return;
                };
                (resolved[2], Spec::All, v, 1)
            }
            _ => {
                let Some(v) = self.numbers(&values, ns * no, "R matrix", line) else {
                    return;
                };
                (Spec::All, Spec::All, v, 2)
            }
        };
        let value = |s2: usize, o: usize| match width {
            0 => vals[0],
            1 => vals[o],
            _ => vals[s2 * no + o],
        };
        let tables = self.tables();
        for ai in resolved[0].indices(na) {
            for si in resolved[1].indices(ns) {
                for s2 in s2_spec.indices(ns) {
                    let key = (ai, si, s2);
                    let uniform_over_obs = matches!(o_spec, Spec::All) && width == 0;
                    if uniform_over_obs {
                        let v = value(s2, 0);
                        let idx = tables.builder.t_index(ai, si, s2);
                        tables.builder.reward[idx] = v;
                        tables.reward_by_obs.remove(&key);
                        continue;
                    }
                    let idx = tables.builder.t_index(ai, si, s2);
                    let current = tables.builder.reward[idx];
                    let per_obs = tables
                        .reward_by_obs
                        .entry(key)
                        .or_insert_with(|| vec![current; no]);
                    for o in o_spec.indices(no) {
                        per_obs[o] = value(s2, o);
                    }
                    tables.first_reward_by_obs_line.get_or_insert(line);
                }
            }
        }
    }

    fn finish(&mut self) -> Option<PomdpModel> {
        let line_end = self.tokens.last().map_or(1, |t| t.line);
        if !self.ensure_tables(line_end) {
            return None;
        }
        let (declared, tables) = self.state.take()?;
        let mut tables = tables?;
        let Some(discount) = declared.discount else {
            self.err(1, "missing `discount:` declaration");
            return None;
        };
        if let Some(l) = tables.first_reward_by_obs_line {
            self.diags.push(ParseDiagnostic::warning(
                l,
                "observation-dependent rewards folded into R(s, a, s') by expectation over observations",
            ));
        }
        let no = tables.builder.num_observations();
        for (&(a, s, s2), per_obs) in &tables.reward_by_obs {
            let expected: f64 = (0..no)
                .map(|o| tables.builder.observation[tables.builder.o_index(a, s2, o)] * per_obs[o])
                .sum();
            let idx = tables.builder.t_index(a, s, s2);
            tables.builder.reward[idx] = expected;
        }
        tables.reward_by_obs.clear();
        self.finish_with(declared, tables, discount)
    }

    fn finish_with(&mut self, declared: Declared, mut tables: Tables, discount: f64) -> Option<PomdpModel> {
        if declared.cost {
            for r in &mut tables.builder.reward {
                *r = -*r;
            }
        }
        tables.builder.discount = discount;
        tables.builder.initial_belief = tables.start.take();
        let ns = tables.builder.num_states();
        let model = match tables.builder.build() {
            Ok(m) => m,
            Err(e) => {
                self.err(1, e.to_string());
                return None;
            }
        };
        let row_line = |lines: &[usize], a: usize, s: usize| lines[a * ns + s].max(1);
        for d in validate_model(&model) {
            let line = match d {
                ModelDiagnostic::TransitionRowSum { action, state, .. }
                | ModelDiagnostic::TransitionNegative { action, state, .. } => {
                    row_line(&tables.t_lines, action, state)
                }
                ModelDiagnostic::ObservationRowSum { action, next_state, .. }
                | ModelDiagnostic::ObservationNegative { action, next_state, .. } => {
                    row_line(&tables.o_lines, action, next_state)
                }
                ModelDiagnostic::InitialBelief(_) => declared.start_line,
                _ => 1,
            };
            self.err(line, d.to_string());
        }
        Some(model)
    }
}

fn parse_number(text: &str) -> Option<f64> {
    text.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Writes `model` in `.POMDP` form. Terminal states are not representable and
/// are listed in a comment only.
pub fn write_pomdp(model: &PomdpModel) -> String {
    let (ns, na, no) = (model.num_states(), model.num_actions(), model.num_observations());
    let labels = model.labels();
    let mut out = String::new();
    let terminals: Vec<String> = model.terminal_states().iter().map(|s| (s + 1).to_string()).collect();
    if !terminals.is_empty() {
        let _ = writeln!(out, "# terminal states (1-based): {}", terminals.join(" "));
    }
    let _ = writeln!(out, "discount: {}", model.discount());
    out.push_str("values: reward\n");
    let decl = |names: &Option<Vec<String>>, n: usize| match names {
        Some(v) => v.join(" "),
        None => n.to_string(),
    };
    let _ = writeln!(out, "states: {}", decl(&labels.states, ns));
    let _ = writeln!(out, "actions: {}", decl(&labels.actions, na));
    let _ = writeln!(out, "observations: {}", decl(&labels.observations, no));
    let start: Vec<String> = model.initial_belief().as_slice().iter().map(|p| p.to_string()).collect();
    let _ = writeln!(out, "start: {}", start.join(" "));
    for a in 0..na {
        for s in 0..ns {
            let row: Vec<String> = model.transition_row(a, s).iter().map(|p| p.to_string()).collect();
            let _ = writeln!(out, "T: {a} : {s}\n{}", row.join(" "));
        }
    }
    for a in 0..na {
        for s2 in 0..ns {
            let row: Vec<String> = model.observation_row(a, s2).iter().map(|p| p.to_string()).collect();
            let _ = writeln!(out, "O: {a} : {s2}\n{}", row.join(" "));
        }
    }
    for a in 0..na {
        for s in 0..ns {
            for s2 in 0..ns {
                let r = model.reward(s, a, s2);
                if r != 0.0 {
                    let _ = writeln!(out, "R: {a} : {s} : {s2} : * {r}");
                }
            }
        }
    }
    out
}
