//! Manufacturing-step catalogs and process-flow files.
//!
//! A [`StepCatalog`] maps step ids to per-wafer energy and process-GHG
//! figures. A [`ProcessFlow`] is an ordered list of layers, each an ordered
//! multiset of step references. [`aggregate_flow`] resolves a flow against a
//! catalog and reduces it to per-wafer totals and per-area coefficients.
//!
//! Both file formats are line-oriented UTF-8 with `#` comments; parse errors
//! carry a 1-based line and column.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::quantities::{Area, CarbonMass, Energy, PerAreaCoefficient, QuantityError};

/// 1-based line/column position in a source file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

impl std::fmt::Display for Position {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}, column {}", self.line, self.column)
    }
}

/// Closed set of manufacturing-step categories; `Other` is the escape hatch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StepCategory {
    Lithography,
    Etch,
    Deposition,
    Cmp,
    Implant,
    Anneal,
    Epitaxy,
    Metallization,
    Clean,
    Metrology,
    Other,
}

impl StepCategory {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "lithography" => Self::Lithography,
            "etch" => Self::Etch,
            "deposition" => Self::Deposition,
            "cmp" => Self::Cmp,
            "implant" => Self::Implant,
            "anneal" => Self::Anneal,
            "epitaxy" => Self::Epitaxy,
            "metallization" => Self::Metallization,
            "clean" => Self::Clean,
            "metrology" => Self::Metrology,
            "other" => Self::Other,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Lithography => "lithography",
            Self::Etch => "etch",
            Self::Deposition => "deposition",
            Self::Cmp => "cmp",
            Self::Implant => "implant",
            Self::Anneal => "anneal",
            Self::Epitaxy => "epitaxy",
            Self::Metallization => "metallization",
            Self::Clean => "clean",
            Self::Metrology => "metrology",
            Self::Other => "other",
        }
    }
}

/// One manufacturing step with its per-wafer footprint.
#[derive(Debug, Clone, PartialEq)]
pub struct StepEntry {
    pub step_id: String,
    pub category: StepCategory,
    pub energy_per_wafer: Energy,
    pub ghg_per_wafer: CarbonMass,
}

/// All steps known to a fab line, keyed by step id.
#[derive(Debug, Clone, PartialEq)]
pub struct StepCatalog {
    entries: BTreeMap<String, StepEntry>,
    provenance: String,
}

impl StepCatalog {
    pub fn get(&self, step_id: &str) -> Option<&StepEntry> {
        self.entries.get(step_id)
    }

    pub fn entries(&self) -> impl Iterator<Item = &StepEntry> {
        self.entries.values()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Source note captured from the first comment line of the file.
    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    /// Render back to the catalog CSV format. Reparsing the result yields a
    /// structurally identical catalog.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        if !self.provenance.is_empty() {
            let _ = writeln!(out, "# {}", self.provenance);
        }
        out.push_str(CATALOG_HEADER);
        out.push('\n');
        for e in self.entries.values() {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                e.step_id,
                e.category.as_str(),
                e.energy_per_wafer.kwh(),
                e.ghg_per_wafer.grams()
            );
        }
        out
    }
}

/// A named process flow: wafer geometry plus ordered layers of step counts.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessFlow {
    pub name: String,
    pub wafer_diameter_mm: f64,
    pub edge_exclusion_mm: f64,
    pub layers: Vec<Layer>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub name: String,
    pub steps: Vec<StepRef>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRef {
    pub step_id: String,
    pub count: u64,
}

impl ProcessFlow {
    /// Total number of step executions across all layers.
    pub fn total_step_passes(&self) -> u64 {
        self.layers
            .iter()
            .flat_map(|l| l.steps.iter())
            .map(|s| s.count)
            .sum()
    }

    /// Usable wafer area in cm²: `pi * ((d/2 - e)/10)^2`.
    pub fn usable_wafer_area(&self) -> Area {
        usable_wafer_area(self.wafer_diameter_mm, self.edge_exclusion_mm)
            .expect("validated at construction")
    }

    /// Render back to the flow file format. Reparsing the result yields a
    /// structurally identical flow.
    pub fn to_flow_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "flow \"{}\"", self.name);
        let _ = writeln!(out, "wafer_diameter_mm = {}", self.wafer_diameter_mm);
        let _ = writeln!(out, "edge_exclusion_mm = {}", self.edge_exclusion_mm);
        for layer in &self.layers {
            let _ = write!(out, "layer \"{}\" {{ ", layer.name);
            for (i, s) in layer.steps.iter().enumerate() {
                if i > 0 {
                    out.push_str(" ; ");
                }
                let _ = write!(out, "{} x{}", s.step_id, s.count);
            }
            out.push_str(" }\n");
        }
        out
    }
}

pub fn usable_wafer_area(
    wafer_diameter_mm: f64,
    edge_exclusion_mm: f64,
) -> Result<Area, QuantityError> {
    let r_cm = (wafer_diameter_mm / 2.0 - edge_exclusion_mm) / 10.0;
    Area::square_centimeters(std::f64::consts::PI * r_cm * r_cm)
}

/// Per-wafer totals and per-area coefficients for one flow + catalog pair.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowAggregate {
    pub total_energy_per_wafer: Energy,
    pub total_ghg_per_wafer: CarbonMass,
    pub usable_wafer_area: Area,
    pub epa: PerAreaCoefficient,
    pub gpa: PerAreaCoefficient,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FlowError {
    #[error("{pos}: {message}")]
    Syntax { pos: Position, message: String },
    #[error("missing required field {field}")]
    MissingField { field: &'static str },
    #[error("{pos}: step count must be at least 1")]
    ZeroCount { pos: Position },
    #[error("edge exclusion {edge_mm} mm must be smaller than the wafer radius {radius_mm} mm")]
    EdgeExclusionTooLarge { edge_mm: f64, radius_mm: f64 },
    #[error("wafer diameter must be positive, got {0}")]
    BadWaferDiameter(f64),
    #[error("step '{step_id}' in layer '{layer}' is not in the catalog")]
    UnresolvedStep { step_id: String, layer: String },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CatalogError {
    #[error("line {line}: expected header '{CATALOG_HEADER}', found '{found}'")]
    BadHeader { line: usize, found: String },
    #[error("catalog has a header but no data rows")]
    Empty,
    #[error("line {line}, column {column}: row has {found} columns, expected 4")]
    MissingColumn {
        line: usize,
        column: usize,
        found: usize,
    },
    #[error("line {line}, column {column}: cannot parse '{value}' as a number for {field}")]
    BadNumber {
        line: usize,
        column: usize,
        field: &'static str,
        value: String,
    },
    #[error("line {line}, column {column}: {field} must be non-negative, got {value}")]
    NegativeValue {
        line: usize,
        column: usize,
        field: &'static str,
        value: f64,
    },
    #[error("line {line}, column {column}: unknown category '{value}'")]
    UnknownCategory {
        line: usize,
        column: usize,
        value: String,
    },
    #[error("duplicate step_id '{step_id}' on lines {first_line} and {second_line}")]
    DuplicateStep {
        step_id: String,
        first_line: usize,
        second_line: usize,
    },
    #[error("line {line}, column {column}: step_id must not be empty")]
    EmptyStepId { line: usize, column: usize },
}

pub const CATALOG_HEADER: &str = "step_id,category,energy_kwh_per_wafer,ghg_gco2e_per_wafer";

/// Parse a step catalog from its CSV form.
///
/// Lines starting with `#` are comments; the first comment line, if any, is
/// kept as the catalog's provenance note.
pub fn parse_step_catalog(text: &str) -> Result<StepCatalog, CatalogError> {
    let mut provenance = String::new();
    let mut saw_provenance = false;
    let mut header_seen = false;
    let mut entries: BTreeMap<String, StepEntry> = BTreeMap::new();
    let mut first_lines: BTreeMap<String, usize> = BTreeMap::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if !saw_provenance {
                provenance = comment.trim().to_string();
                saw_provenance = true;
            }
            continue;
        }
        if !header_seen {
            if line != CATALOG_HEADER {
                return Err(CatalogError::BadHeader {
                    line: line_no,
                    found: line.to_string(),
                });
            }
            header_seen = true;
            continue;
        }

        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            // column of the first missing/extra cell boundary
            let column = raw.len() + 1;
            return Err(CatalogError::MissingColumn {
                line: line_no,
                column,
                found: fields.len(),
            });
        }
        let col_of = |i: usize| -> usize {
            // byte offset of field i within the raw line, 1-based
            let mut off = 0;
            for f in fields.iter().take(i) {
                off += f.len() + 1;
            }
            off + 1
        };

        let step_id = fields[0].trim().to_string();
        if step_id.is_empty() {
            return Err(CatalogError::EmptyStepId {
                line: line_no,
                column: col_of(0),
            });
        }
        let category_str = fields[1].trim();
        let category =
            StepCategory::parse(category_str).ok_or_else(|| CatalogError::UnknownCategory {
                line: line_no,
                column: col_of(1),
                value: category_str.to_string(),
            })?;

        let parse_value = |i: usize, field: &'static str| -> Result<f64, CatalogError> {
            let cell = fields[i].trim();
            let v: f64 = cell.parse().map_err(|_| CatalogError::BadNumber {
                line: line_no,
                column: col_of(i),
                field,
                value: cell.to_string(),
            })?;
            if !v.is_finite() || v < 0.0 {
                return Err(CatalogError::NegativeValue {
                    line: line_no,
                    column: col_of(i),
                    field,
                    value: v,
                });
            }
            Ok(v)
        };
        let energy = parse_value(2, "energy_kwh_per_wafer")?;
        let ghg = parse_value(3, "ghg_gco2e_per_wafer")?;

        if let Some(&first) = first_lines.get(&step_id) {
            return Err(CatalogError::DuplicateStep {
                step_id,
                first_line: first,
                second_line: line_no,
            });
        }
        first_lines.insert(step_id.clone(), line_no);
        entries.insert(
            step_id.clone(),
            StepEntry {
                step_id,
                category,
                energy_per_wafer: Energy::kilowatt_hours(energy).expect("validated above"),
                ghg_per_wafer: CarbonMass::grams_co2e(ghg).expect("validated above"),
            },
        );
    }

    if !header_seen {
        return Err(CatalogError::BadHeader {
            line: text.lines().count() + 1,
            found: String::new(),
        });
    }
    if entries.is_empty() {
        return Err(CatalogError::Empty);
    }
    Ok(StepCatalog {
        entries,
        provenance,
    })
}

// ---------------------------------------------------------------------------
// flow file lexer/parser
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Ident(String),
    Str(String),
    Number(f64),
    Count(u64),
    Equals,
    LBrace,
    RBrace,
    Semi,
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::Ident(s) => format!("identifier '{s}'"),
            Token::Str(s) => format!("string \"{s}\""),
            Token::Number(n) => format!("number {n}"),
            Token::Count(n) => format!("count x{n}"),
            Token::Equals => "'='".to_string(),
            Token::LBrace => "'{'".to_string(),
            Token::RBrace => "'}'".to_string(),
            Token::Semi => "';'".to_string(),
        }
    }
}

fn lex_flow(text: &str) -> Result<Vec<(Token, Position)>, FlowError> {
    let mut tokens = Vec::new();
    let mut line = 1;
    let mut col = 1;
    let mut chars = text.chars().peekable();

    while let Some(&c) = chars.peek() {
        let pos = Position { line, column: col };
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            '#' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                    col += 1;
                }
            }
            '"' => {
                chars.next();
                col += 1;
                let mut s = String::new();
                loop {
                    match chars.next() {
                        Some('"') => {
                            col += 1;
                            break;
                        }
                        Some('\n') | None => {
                            return Err(FlowError::Syntax {
                                pos,
                                message: "unterminated string".to_string(),
                            });
                        }
                        Some(c) => {
                            s.push(c);
                            col += 1;
                        }
                    }
                }
                tokens.push((Token::Str(s), pos));
            }
            '=' => {
                chars.next();
                col += 1;
                tokens.push((Token::Equals, pos));
            }
            '{' => {
                chars.next();
                col += 1;
                tokens.push((Token::LBrace, pos));
            }
            '}' => {
                chars.next();
                col += 1;
                tokens.push((Token::RBrace, pos));
            }
            ';' => {
                chars.next();
                col += 1;
                tokens.push((Token::Semi, pos));
            }
            c if c.is_ascii_digit() || c == '-' || c == '+' || c == '.' => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_digit() || matches!(c, '-' | '+' | '.' | 'e' | 'E') {
                        s.push(c);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                let n: f64 = s.parse().map_err(|_| FlowError::Syntax {
                    pos,
                    message: format!("cannot parse '{s}' as a number"),
                })?;
                tokens.push((Token::Number(n), pos));
            }
            c if c.is_alphanumeric() || c == '_' => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_alphanumeric() || c == '_' {
                        s.push(c);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                // an identifier of the form x<digits> is a step count
                let token = if let Some(rest) = s.strip_prefix('x') {
                    if !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()) {
                        Token::Count(rest.parse().map_err(|_| FlowError::Syntax {
                            pos,
                            message: format!("count '{s}' is too large"),
                        })?)
                    } else {
                        Token::Ident(s)
                    }
                } else {
                    Token::Ident(s)
                };
                tokens.push((token, pos));
            }
            other => {
                return Err(FlowError::Syntax {
                    pos,
                    message: format!("unexpected character '{other}'"),
                });
            }
        }
    }
    Ok(tokens)
}

struct FlowParser {
    tokens: Vec<(Token, Position)>,
    at: usize,
    end: Position,
}

impl FlowParser {
    fn peek(&self) -> Option<&(Token, Position)> {
        self.tokens.get(self.at)
    }

    fn next(&mut self) -> Option<(Token, Position)> {
        let t = self.tokens.get(self.at).cloned();
        if t.is_some() {
            self.at += 1;
        }
        t
    }

    fn here(&self) -> Position {
        self.peek().map(|(_, p)| *p).unwrap_or(self.end)
    }

    fn expect_str(&mut self, what: &str) -> Result<String, FlowError> {
        match self.next() {
            Some((Token::Str(s), _)) => Ok(s),
            Some((t, pos)) => Err(FlowError::Syntax {
                pos,
                message: format!("expected {what} in quotes, found {}", t.describe()),
            }),
            None => Err(FlowError::Syntax {
                pos: self.end,
                message: format!("expected {what} in quotes, found end of file"),
            }),
        }
    }

    fn expect_token(&mut self, want: Token) -> Result<Position, FlowError> {
        match self.next() {
            Some((t, pos)) if t == want => Ok(pos),
            Some((t, pos)) => Err(FlowError::Syntax {
                pos,
                message: format!("expected {}, found {}", want.describe(), t.describe()),
            }),
            None => Err(FlowError::Syntax {
                pos: self.end,
                message: format!("expected {}, found end of file", want.describe()),
            }),
        }
    }
}

/// Parse a flow file.
///
/// Grammar: `flow "<name>"`, `wafer_diameter_mm = <n>`,
/// `edge_exclusion_mm = <n>`, then `layer "<name>" { step xN ; ... }` blocks.
/// Whitespace and newlines are free within blocks; `#` starts a comment.
pub fn parse_flow(text: &str) -> Result<ProcessFlow, FlowError> {
    let tokens = lex_flow(text)?;
    let end = Position {
        line: text.lines().count().max(1),
        column: text.lines().last().map(|l| l.len() + 1).unwrap_or(1),
    };
    let mut p = FlowParser { tokens, at: 0, end };

    let mut name: Option<String> = None;
    let mut wafer_diameter: Option<f64> = None;
    let mut edge_exclusion: Option<f64> = None;
    let mut layers: Vec<Layer> = Vec::new();

    while let Some((token, pos)) = p.next() {
        match token {
            Token::Ident(kw) if kw == "flow" => {
                name = Some(p.expect_str("flow name")?);
            }
            Token::Ident(kw) if kw == "layer" => {
                let layer_name = p.expect_str("layer name")?;
                p.expect_token(Token::LBrace)?;
                let mut steps = Vec::new();
                loop {
                    match p.peek() {
                        Some((Token::RBrace, _)) => {
                            p.next();
                            break;
                        }
                        Some((Token::Ident(_), _)) => {
                            let (Some((Token::Ident(step_id), _)), count_pos) =
                                (p.next(), p.here())
                            else {
                                unreachable!()
                            };
                            match p.next() {
                                Some((Token::Count(0), pos)) => {
                                    return Err(FlowError::ZeroCount { pos });
                                }
                                Some((Token::Count(n), _)) => {
                                    steps.push(StepRef { step_id, count: n });
                                }
                                Some((t, pos)) => {
                                    return Err(FlowError::Syntax {
                                        pos,
                                        message: format!(
                                            "expected a count like x2 after '{step_id}', found {}",
                                            t.describe()
                                        ),
                                    });
                                }
                                None => {
                                    return Err(FlowError::Syntax {
                                        pos: count_pos,
                                        message: format!(
                                            "expected a count like x2 after '{step_id}', found end of file"
                                        ),
                                    });
                                }
                            }
                            // optional separator before the next step or brace
                            if let Some((Token::Semi, _)) = p.peek() {
                                p.next();
                            }
                        }
                        Some((t, pos)) => {
                            return Err(FlowError::Syntax {
                                pos: *pos,
                                message: format!(
                                    "expected a step reference or '}}', found {}",
                                    t.describe()
                                ),
                            });
                        }
                        None => {
                            return Err(FlowError::Syntax {
                                pos: p.end,
                                message: "unclosed layer block".to_string(),
                            });
                        }
                    }
                }
                layers.push(Layer {
                    name: layer_name,
                    steps,
                });
            }
            Token::Ident(field)
                if field == "wafer_diameter_mm" || field == "edge_exclusion_mm" =>
            {
                p.expect_token(Token::Equals)?;
                let value = match p.next() {
                    Some((Token::Number(n), _)) => n,
                    Some((t, pos)) => {
                        return Err(FlowError::Syntax {
                            pos,
                            message: format!("expected a number, found {}", t.describe()),
                        });
                    }
                    None => {
                        return Err(FlowError::Syntax {
                            pos: p.end,
                            message: "expected a number, found end of file".to_string(),
                        });
                    }
                };
                if field == "wafer_diameter_mm" {
                    wafer_diameter = Some(value);
                } else {
                    edge_exclusion = Some(value);
                }
            }
            t => {
                return Err(FlowError::Syntax {
                    pos,
                    message: format!(
                        "expected 'flow', 'layer', or a wafer field, found {}",
                        t.describe()
                    ),
                });
            }
        }
    }

    let name = name.ok_or(FlowError::MissingField { field: "flow" })?;
    let wafer_diameter_mm = wafer_diameter.ok_or(FlowError::MissingField {
        field: "wafer_diameter_mm",
    })?;
    let edge_exclusion_mm = edge_exclusion.ok_or(FlowError::MissingField {
        field: "edge_exclusion_mm",
    })?;

    if !wafer_diameter_mm.is_finite() || wafer_diameter_mm <= 0.0 {
        return Err(FlowError::BadWaferDiameter(wafer_diameter_mm));
    }
    let radius_mm = wafer_diameter_mm / 2.0;
    if !edge_exclusion_mm.is_finite() || edge_exclusion_mm < 0.0 || edge_exclusion_mm >= radius_mm
    {
        return Err(FlowError::EdgeExclusionTooLarge {
            edge_mm: edge_exclusion_mm,
            radius_mm,
        });
    }

    Ok(ProcessFlow {
        name,
        wafer_diameter_mm,
        edge_exclusion_mm,
        layers,
    })
}

/// Reduce a flow to per-wafer totals and per-area coefficients.
///
/// Counts are accumulated per step id first and summed in id order, so any
/// rearrangement of the same step multiset produces a bit-identical result.
pub fn aggregate_flow(
    flow: &ProcessFlow,
    catalog: &StepCatalog,
) -> Result<FlowAggregate, FlowError> {
    let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
    for layer in &flow.layers {
        for step in &layer.steps {
            if catalog.get(&step.step_id).is_none() {
                return Err(FlowError::UnresolvedStep {
                    step_id: step.step_id.clone(),
                    layer: layer.name.clone(),
                });
            }
            *counts.entry(step.step_id.as_str()).or_insert(0) += step.count;
        }
    }

    let mut energy = Energy::ZERO;
    let mut ghg = CarbonMass::ZERO;
    for (step_id, count) in &counts {
        let entry = catalog.get(step_id).expect("checked above");
        energy += entry.energy_per_wafer * *count;
        ghg += entry.ghg_per_wafer * (*count as f64);
    }

    let usable = flow.usable_wafer_area();
    let epa = PerAreaCoefficient::epa(energy.kwh() / usable.cm2()).expect("non-negative");
    let gpa = PerAreaCoefficient::gpa(ghg.grams() / usable.cm2()).expect("non-negative");

    Ok(FlowAggregate {
        total_energy_per_wafer: energy,
        total_ghg_per_wafer: ghg,
        usable_wafer_area: usable,
        epa,
        gpa,
    })
}
