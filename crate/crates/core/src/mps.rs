//! Free-format MPS reader and writer.
//!
//! Supported sections: `NAME`, `OBJSENSE`, `ROWS`, `COLUMNS` (with
//! `INTORG`/`INTEND` markers), `RHS`, `RANGES`, `BOUNDS` and `ENDATA`.
//! Bound types: `LO UP FX FR MI PL BV LI UI`.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{ConstraintSense, InstanceBuilder, MilpInstance, ObjectiveSense, VarKind};

/// Parser switches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ParseOptions {
    /// Give marked integer columns without an upper bound the legacy
    /// `[0, 1]` domain instead of `[0, +inf)`.
    pub legacy_integer_bounds: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Name,
    ObjSense,
    Rows,
    Columns,
    Rhs,
    Ranges,
    Bounds,
    End,
}

impl Section {
    fn from_keyword(word: &str) -> Option<Section> {
        match word.to_ascii_uppercase().as_str() {
            "NAME" => Some(Section::Name),
            "OBJSENSE" => Some(Section::ObjSense),
            "ROWS" => Some(Section::Rows),
            "COLUMNS" => Some(Section::Columns),
            "RHS" => Some(Section::Rhs),
            "RANGES" => Some(Section::Ranges),
            "BOUNDS" => Some(Section::Bounds),
            "ENDATA" => Some(Section::End),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RowType {
    G,
    L,
    E,
}

enum RowRef {
    Objective,
    IgnoredFree,
    Constraint(usize),
}

struct Parser {
    opts: ParseOptions,
    builder: InstanceBuilder,
    objective_row: Option<String>,
    ignored_rows: Vec<String>,
    row_index: HashMap<String, usize>,
    row_types: Vec<RowType>,
    rhs: Vec<f64>,
    ranges: Vec<Option<f64>>,
    col_index: HashMap<String, usize>,
    marked_integer: Vec<bool>,
    explicit_upper: Vec<bool>,
    in_integer_block: bool,
    integer_block_line: usize,
    rows_seen: bool,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn number(line: usize, tok: &str) -> Result<f64> {
    let v: f64 = tok
        .parse()
        .map_err(|_| parse_err(line, format!("non-numeric value `{tok}`")))?;
    if v.is_nan() {
        return Err(parse_err(line, "NaN value"));
    }
    Ok(v)
}

/// Parses free-format MPS text with default options.
pub fn parse_mps(text: &str) -> Result<MilpInstance> {
    parse_mps_with(text, ParseOptions::default())
}

pub fn parse_mps_with(text: &str, opts: ParseOptions) -> Result<MilpInstance> {
    let mut p = Parser {
        opts,
        builder: InstanceBuilder::new(""),
        objective_row: None,
        ignored_rows: Vec::new(),
        row_index: HashMap::new(),
        row_types: Vec::new(),
        rhs: Vec::new(),
        ranges: Vec::new(),
        col_index: HashMap::new(),
        marked_integer: Vec::new(),
        explicit_upper: Vec::new(),
        in_integer_block: false,
        integer_block_line: 0,
        rows_seen: false,
    };
    let mut section: Option<Section> = None;
    let mut last_line = 0;
    let mut ended = false;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let trimmed = raw.trim_end();
        if trimmed.trim_start().is_empty() || trimmed.starts_with('*') {
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        let is_header = !raw.starts_with(|c: char| c.is_whitespace());
        if is_header {
            let sec = Section::from_keyword(tokens[0])
                .ok_or_else(|| parse_err(line, format!("unknown section `{}`", tokens[0])))?;
            p.enter(sec, line, section)?;
            match sec {
                Section::Name => {
                    p.builder.set_name(tokens.get(1).copied().unwrap_or(""));
                }
                Section::ObjSense => {
                    if let Some(word) = tokens.get(1) {
                        p.objective_sense(line, word)?;
                    }
                }
                Section::End => {
                    ended = true;
                    break;
                }
                _ => {}
            }
            section = Some(sec);
            continue;
        }
        match section {
            None | Some(Section::Name) => {
                return Err(parse_err(line, "data line outside of a section"));
            }
            Some(Section::ObjSense) => p.objective_sense(line, tokens[0])?,
            Some(Section::Rows) => p.row_line(line, &tokens)?,
            Some(Section::Columns) => p.column_line(line, &tokens)?,
            Some(Section::Rhs) => p.rhs_line(line, &tokens)?,
            Some(Section::Ranges) => p.range_line(line, &tokens)?,
            Some(Section::Bounds) => p.bound_line(line, &tokens)?,
            Some(Section::End) => unreachable!(),
        }
    }
    if !ended {
        return Err(parse_err(last_line.max(1), "missing ENDATA (truncated file?)"));
    }
    if p.in_integer_block {
        return Err(parse_err(p.integer_block_line, "INTORG marker without matching INTEND"));
    }
    p.finish()
}

impl Parser {
    fn enter(&mut self, sec: Section, line: usize, prev: Option<Section>) -> Result<()> {
        match sec {
            Section::Name | Section::ObjSense if self.rows_seen => {
                Err(parse_err(line, "NAME/OBJSENSE must precede ROWS"))
            }
            Section::Rows => {
                if self.rows_seen {
                    return Err(parse_err(line, "duplicate ROWS section"));
                }
                self.rows_seen = true;
                Ok(())
            }
            Section::Columns | Section::Rhs | Section::Ranges | Section::Bounds => {
                if !self.rows_seen {
                    return Err(parse_err(line, "section before ROWS"));
                }
                if prev == Some(Section::Columns) && self.in_integer_block {
                    return Err(parse_err(
                        self.integer_block_line,
                        "INTORG marker without matching INTEND",
                    ));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    fn objective_sense(&mut self, line: usize, word: &str) -> Result<()> {
        let sense = match word.to_ascii_uppercase().as_str() {
            "MAX" | "MAXIMIZE" => ObjectiveSense::Maximize,
            "MIN" | "MINIMIZE" => ObjectiveSense::Minimize,
            other => return Err(parse_err(line, format!("unknown objective sense `{other}`"))),
        };
        self.builder.set_objective_sense(sense);
        Ok(())
    }

    fn row_line(&mut self, line: usize, tokens: &[&str]) -> Result<()> {
        if tokens.len() < 2 {
            return Err(parse_err(line, "ROWS entry needs a type and a name"));
        }
        let name = tokens[1];
        if self.row_index.contains_key(name)
            || self.objective_row.as_deref() == Some(name)
            || self.ignored_rows.iter().any(|r| r == name)
        {
            return Err(parse_err(line, format!("duplicate row `{name}`")));
        }
        let ty = match tokens[0].to_ascii_uppercase().as_str() {
            "N" => {
                if self.objective_row.is_none() {
                    self.objective_row = Some(name.to_string());
                    self.builder.set_objective_name(name);
                } else {
                    log::warn!("line {line}: additional objective row `{name}` ignored");
                    self.ignored_rows.push(name.to_string());
                }
                return Ok(());
            }
            "G" => RowType::G,
            "L" => RowType::L,
            "E" => RowType::E,
            other => return Err(parse_err(line, format!("unknown row type `{other}`"))),
        };
        let sense = match ty {
            RowType::G => ConstraintSense::GreaterEqual,
            RowType::L => ConstraintSense::LessEqual,
            RowType::E => ConstraintSense::Equal,
        };
        let idx = self.builder.add_row(name, sense, 0.0);
        self.row_index.insert(name.to_string(), idx);
        self.row_types.push(ty);
        self.rhs.push(0.0);
        self.ranges.push(None);
        Ok(())
    }

    fn lookup_row(&self, line: usize, name: &str) -> Result<RowRef> {
        if self.objective_row.as_deref() == Some(name) {
            return Ok(RowRef::Objective);
        }
        if self.ignored_rows.iter().any(|r| r == name) {
            return Ok(RowRef::IgnoredFree);
        }
        self.row_index
            .get(name)
            .map(|&i| RowRef::Constraint(i))
            .ok_or_else(|| parse_err(line, format!("reference to undeclared row `{name}`")))
    }

    fn lookup_col(&self, line: usize, name: &str) -> Result<usize> {
        self.col_index
            .get(name)
            .copied()
            .ok_or_else(|| parse_err(line, format!("reference to undeclared column `{name}`")))
    }

    fn column_line(&mut self, line: usize, tokens: &[&str]) -> Result<()> {
        if tokens.len() >= 3 && tokens[1].trim_matches('\'').eq_ignore_ascii_case("MARKER") {
            match tokens[2].trim_matches('\'').to_ascii_uppercase().as_str() {
                "INTORG" => {
                    if self.in_integer_block {
                        return Err(parse_err(line, "nested INTORG marker"));
                    }
                    self.in_integer_block = true;
                    self.integer_block_line = line;
                }
                "INTEND" => {
                    if !self.in_integer_block {
                        return Err(parse_err(line, "INTEND marker without INTORG"));
                    }
                    self.in_integer_block = false;
                }
                other => return Err(parse_err(line, format!("unknown marker `{other}`"))),
            }
            return Ok(());
        }
        if tokens.len() < 3 || tokens.len() % 2 == 0 {
            return Err(parse_err(line, "COLUMNS entry must be `column row value [row value]`"));
        }
        let name = tokens[0];
        let col = match self.col_index.get(name) {
            Some(&c) => c,
            None => {
                let c = self.builder.add_column(name, 0.0, 0.0, f64::INFINITY, VarKind::Continuous);
                self.col_index.insert(name.to_string(), c);
                self.marked_integer.push(self.in_integer_block);
                self.explicit_upper.push(false);
                c
            }
        };
        for pair in tokens[1..].chunks(2) {
            let value = number(line, pair[1])?;
            match self.lookup_row(line, pair[0])? {
                RowRef::Objective => self.builder.set_cost(col, value),
                RowRef::IgnoredFree => {}
                RowRef::Constraint(r) => self.builder.set_coefficient(r, col, value),
            }
        }
        Ok(())
    }

    /// Strips an optional leading set name from `name value` pair lists.
    fn pairs<'a>(line: usize, tokens: &'a [&'a str], what: &str) -> Result<&'a [&'a str]> {
        let body = if tokens.len() % 2 == 1 { &tokens[1..] } else { tokens };
        if body.is_empty() {
            return Err(parse_err(line, format!("{what} entry must be `[set] row value [row value]`")));
        }
        Ok(body)
    }

    fn rhs_line(&mut self, line: usize, tokens: &[&str]) -> Result<()> {
        for pair in Self::pairs(line, tokens, "RHS")?.chunks(2) {
            let value = number(line, pair[1])?;
            match self.lookup_row(line, pair[0])? {
                RowRef::Objective => self.builder.set_objective_offset(-value),
                RowRef::IgnoredFree => {}
                RowRef::Constraint(r) => self.rhs[r] = value,
            }
        }
        Ok(())
    }

    fn range_line(&mut self, line: usize, tokens: &[&str]) -> Result<()> {
        for pair in Self::pairs(line, tokens, "RANGES")?.chunks(2) {
            let value = number(line, pair[1])?;
            match self.lookup_row(line, pair[0])? {
                RowRef::Objective | RowRef::IgnoredFree => {
                    log::warn!("line {line}: range on objective row ignored");
                }
                RowRef::Constraint(r) => self.ranges[r] = Some(value),
            }
        }
        Ok(())
    }

    fn bound_line(&mut self, line: usize, tokens: &[&str]) -> Result<()> {
        if tokens.len() < 2 {
            return Err(parse_err(line, "BOUNDS entry too short"));
        }
        let ty = tokens[0].to_ascii_uppercase();
        let needs_value = matches!(ty.as_str(), "LO" | "UP" | "FX" | "LI" | "UI");
        let optional_value = ty == "BV";
        let (col_tok, value_tok) = match (needs_value, optional_value, tokens.len()) {
            (true, _, 4) => (tokens[2], Some(tokens[3])),
            (true, _, 3) => (tokens[1], Some(tokens[2])),
            (false, false, 3) => (tokens[2], None),
            (false, false, 2) => (tokens[1], None),
            (false, true, 4) => (tokens[2], Some(tokens[3])),
            (false, true, 2) => (tokens[1], None),
            (false, true, 3) => {
                if self.col_index.contains_key(tokens[1]) && tokens[2].parse::<f64>().is_ok() {
                    (tokens[1], Some(tokens[2]))
                } else {
                    (tokens[2], None)
                }
            }
            _ => return Err(parse_err(line, format!("malformed {ty} bound"))),
        };
        let col = self.lookup_col(line, col_tok)?;
        let value = value_tok.map(|t| number(line, t)).transpose()?;
        let (mut lo, mut up) = self.builder.bounds(col);
        match ty.as_str() {
            "LO" => lo = value.unwrap(),
            "UP" => {
                let v = value.unwrap();
                if v < 0.0 && lo == 0.0 {
                    log::warn!("line {line}: negative upper bound with zero lower bound; lower set to -inf");
                    lo = f64::NEG_INFINITY;
                }
                up = v;
                self.explicit_upper[col] = true;
            }
            "FX" => {
                lo = value.unwrap();
                up = lo;
                self.explicit_upper[col] = true;
            }
            "FR" => {
                lo = f64::NEG_INFINITY;
                up = f64::INFINITY;
                self.explicit_upper[col] = true;
            }
            "MI" => lo = f64::NEG_INFINITY,
            "PL" => {
                up = f64::INFINITY;
                self.explicit_upper[col] = true;
            }
            "BV" => {
                lo = 0.0;
                up = 1.0;
                self.explicit_upper[col] = true;
                self.builder.set_kind(col, VarKind::Binary);
                self.marked_integer[col] = true;
            }
            "LI" => {
                lo = value.unwrap();
                self.marked_integer[col] = true;
            }
            "UI" => {
                up = value.unwrap();
                self.explicit_upper[col] = true;
                self.marked_integer[col] = true;
            }
            other => return Err(parse_err(line, format!("unknown bound type `{other}`"))),
        }
        if value.is_some_and(|v| v.is_infinite()) && matches!(ty.as_str(), "LI" | "UI" | "BV") {
            return Err(parse_err(line, "infinite integer bound"));
        }
        self.builder.set_bounds(col, lo, up);
        Ok(())
    }

    fn finish(mut self) -> Result<MilpInstance> {
        for r in 0..self.row_types.len() {
            let rhs = self.rhs[r];
            let sense = match (self.row_types[r], self.ranges[r]) {
                (RowType::G, None) => ConstraintSense::GreaterEqual,
                (RowType::L, None) => ConstraintSense::LessEqual,
                (RowType::E, None) => ConstraintSense::Equal,
                (RowType::G, Some(rg)) => ConstraintSense::Range { low: rhs, high: rhs + rg.abs() },
                (RowType::L, Some(rg)) => ConstraintSense::Range { low: rhs - rg.abs(), high: rhs },
                (RowType::E, Some(rg)) if rg >= 0.0 => ConstraintSense::Range { low: rhs, high: rhs + rg },
                (RowType::E, Some(rg)) => ConstraintSense::Range { low: rhs + rg, high: rhs },
            };
            self.builder.replace_row(r, sense, rhs);
        }
        for col in 0..self.marked_integer.len() {
            if !self.marked_integer[col] {
                continue;
            }
            let (lo, mut up) = self.builder.bounds(col);
            if !self.explicit_upper[col] && self.opts.legacy_integer_bounds {
                up = 1.0;
                self.builder.set_bounds(col, lo, up);
            }
            let kind = if lo == 0.0 && up == 1.0 { VarKind::Binary } else { VarKind::Integer };
            self.builder.set_kind(col, kind);
        }
        self.builder.build()
    }
}

/// Reads MPS from a file path, or standard input for `-`. Gzip input is
/// detected by its magic bytes and decompressed transparently.
pub fn read_mps(path: impl AsRef<Path>, opts: ParseOptions) -> Result<MilpInstance> {
    let path = path.as_ref();
    let mut bytes = Vec::new();
    if path.as_os_str() == "-" {
        std::io::stdin().read_to_end(&mut bytes)?;
    } else {
        bytes = std::fs::read(path)?;
    }
    let text = if bytes.starts_with(&[0x1f, 0x8b]) {
        let mut out = String::new();
        flate2::read::GzDecoder::new(&bytes[..]).read_to_string(&mut out)?;
        out
    } else {
        String::from_utf8(bytes).map_err(|e| Error::Io(format!("input is not UTF-8: {e}")))?
    };
    parse_mps_with(&text, opts)
}

fn num(v: f64) -> String {
    if v == f64::INFINITY {
        "1e+30".to_string()
    } else if v == f64::NEG_INFINITY {
        "-1e+30".to_string()
    } else {
        format!("{v:?}")
    }
}

/// Emits free-format MPS. Values are written in shortest round-trip form.
pub fn write_mps(instance: &MilpInstance) -> String {
    let mut out = String::new();
    let name = if instance.name().is_empty() { "UNNAMED" } else { instance.name() };
    let _ = writeln!(out, "NAME {name}");
    if instance.objective_sense() == ObjectiveSense::Maximize {
        out.push_str("OBJSENSE\n    MAX\n");
    }
    let obj = instance.objective_name();
    out.push_str("ROWS\n");
    let _ = writeln!(out, " N  {obj}");
    let mut range_values: Vec<(usize, f64)> = Vec::new();
    let mut row_rhs: Vec<f64> = Vec::with_capacity(instance.num_rows());
    for (i, sense) in instance.senses().iter().enumerate() {
        let (ty, rhs) = match *sense {
            ConstraintSense::GreaterEqual => ("G", instance.rhs()[i]),
            ConstraintSense::LessEqual => ("L", instance.rhs()[i]),
            ConstraintSense::Equal => ("E", instance.rhs()[i]),
            ConstraintSense::Range { low, high } => {
                let width = high - low;
                range_values.push((i, width));
                if low + width == high || high - width != low {
                    ("G", low)
                } else {
                    ("L", high)
                }
            }
        };
        row_rhs.push(rhs);
        let _ = writeln!(out, " {ty}  {}", instance.row_names()[i]);
    }

    out.push_str("COLUMNS\n");
    let columns = instance.matrix().columns();
    let mut in_block = false;
    let mut marker_id = 0;
    for j in 0..instance.num_cols() {
        let is_int = instance.kinds()[j].is_integer();
        if is_int != in_block {
            let tag = if is_int { "'INTORG'" } else { "'INTEND'" };
            let _ = writeln!(out, "    MARKER{marker_id} 'MARKER' {tag}");
            marker_id += 1;
            in_block = is_int;
        }
        let cname = &instance.col_names()[j];
        let cost = instance.costs()[j];
        if cost != 0.0 || columns[j].is_empty() {
            let _ = writeln!(out, "    {cname}  {obj}  {}", num(cost));
        }
        for &(r, v) in &columns[j] {
            let _ = writeln!(out, "    {cname}  {}  {}", instance.row_names()[r], num(v));
        }
    }
    if in_block {
        let _ = writeln!(out, "    MARKER{marker_id} 'MARKER' 'INTEND'");
    }

    out.push_str("RHS\n");
    if instance.objective_offset() != 0.0 {
        let _ = writeln!(out, "    RHS  {obj}  {}", num(-instance.objective_offset()));
    }
    for (i, &rhs) in row_rhs.iter().enumerate() {
        if rhs != 0.0 {
            let _ = writeln!(out, "    RHS  {}  {}", instance.row_names()[i], num(rhs));
        }
    }

    if !range_values.is_empty() {
        out.push_str("RANGES\n");
        for (i, width) in range_values {
            let _ = writeln!(out, "    RNG  {}  {}", instance.row_names()[i], num(width));
        }
    }

    let mut bounds = String::new();
    for j in 0..instance.num_cols() {
        let cname = &instance.col_names()[j];
        let (lo, up) = (instance.lower()[j], instance.upper()[j]);
        let kind = instance.kinds()[j];
        if kind == VarKind::Binary && lo == 0.0 && up == 1.0 {
            let _ = writeln!(bounds, " BV BND  {cname}");
            continue;
        }
        if lo == up {
            let _ = writeln!(bounds, " FX BND  {cname}  {}", num(lo));
            continue;
        }
        if lo == f64::NEG_INFINITY && up == f64::INFINITY {
            let _ = writeln!(bounds, " FR BND  {cname}");
            continue;
        }
        if lo == f64::NEG_INFINITY {
            let _ = writeln!(bounds, " MI BND  {cname}");
        } else if lo != 0.0 {
            let _ = writeln!(bounds, " LO BND  {cname}  {}", num(lo));
        }
        if up == f64::INFINITY {
            if kind.is_integer() {
                let _ = writeln!(bounds, " PL BND  {cname}");
            }
        } else {
            let _ = writeln!(bounds, " UP BND  {cname}  {}", num(up));
        }
    }
    if !bounds.is_empty() {
        out.push_str("BOUNDS\n");
        out.push_str(&bounds);
    }
    out.push_str("ENDATA\n");
    out
}
