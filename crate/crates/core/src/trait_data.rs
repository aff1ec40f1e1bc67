//! Data model and ingestion for non-metric trait observations.
//!
//! Two CSV formats are understood, both UTF-8 with `\n` or `\r\n` line ends
//! and no quoting (labels must not contain commas):
//!
//! * count-level (canonical interchange): `population,pop_size,trait,n,k`,
//!   one row per (population, trait) pair;
//! * individual-level (convenience ingest): `population,individual,<trait...>`
//!   with cells `1` (present), `0` (absent) or `?` (not measured).
//!
//! Population and trait order is first appearance in the file, so matrix row
//! order is reproducible.

use std::collections::HashSet;
use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Per-population, per-trait measured counts and presence counts.
///
/// For population `p` and trait `t`, `measured(p, t)` is how often the trait
/// could be scored and `present(p, t)` how often it was present; both are
/// bounded by the population size. Immutable once constructed and safe to
/// share read-only across threads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraitCounts {
    populations: Vec<String>,
    traits: Vec<String>,
    n: Vec<Vec<u32>>,
    k: Vec<Vec<u32>>,
    pop_size: Vec<u32>,
}

impl TraitCounts {
    /// Builds a validated table. Requires at least two populations and one
    /// trait, unique labels, matching matrix shapes, and
    /// `k[p][t] <= n[p][t] <= pop_size[p]` for every cell.
    pub fn new(
        populations: Vec<String>,
        traits: Vec<String>,
        n: Vec<Vec<u32>>,
        k: Vec<Vec<u32>>,
        pop_size: Vec<u32>,
    ) -> Result<Self> {
        let p = populations.len();
        let m = traits.len();
        if p < 2 {
            return Err(Error::InvalidData(format!(
                "at least 2 populations are required, got {p}"
            )));
        }
        if m == 0 {
            return Err(Error::InvalidData("at least 1 trait is required".into()));
        }
        if unique_count(&populations) != p {
            return Err(Error::InvalidData(
                "population labels must be unique".into(),
            ));
        }
        if unique_count(&traits) != m {
            return Err(Error::InvalidData("trait labels must be unique".into()));
        }
        if n.len() != p || k.len() != p || pop_size.len() != p {
            return Err(Error::InvalidData(format!(
                "matrix shape does not match {p} populations"
            )));
        }
        for (pi, pop) in populations.iter().enumerate() {
            if n[pi].len() != m || k[pi].len() != m {
                return Err(Error::InvalidData(format!(
                    "matrix shape does not match {m} traits for population '{pop}'"
                )));
            }
            for (ti, trait_label) in traits.iter().enumerate() {
                if k[pi][ti] > n[pi][ti] {
                    return Err(Error::InvalidData(format!(
                        "k exceeds n for ({pop}, {trait_label}): k={}, n={}",
                        k[pi][ti], n[pi][ti]
                    )));
                }
                if n[pi][ti] > pop_size[pi] {
                    return Err(Error::InvalidData(format!(
                        "n exceeds population size for ({pop}, {trait_label}): n={}, size={}",
                        n[pi][ti], pop_size[pi]
                    )));
                }
            }
        }
        Ok(Self {
            populations,
            traits,
            n,
            k,
            pop_size,
        })
    }

    pub fn n_populations(&self) -> usize {
        self.populations.len()
    }

    pub fn n_traits(&self) -> usize {
        self.traits.len()
    }

    pub fn populations(&self) -> &[String] {
        &self.populations
    }

    pub fn traits(&self) -> &[String] {
        &self.traits
    }

    pub fn population_index(&self, label: &str) -> Option<usize> {
        self.populations.iter().position(|l| l == label)
    }

    /// Times trait `t` was measured in population `p`.
    pub fn measured(&self, p: usize, t: usize) -> u32 {
        self.n[p][t]
    }

    /// Times trait `t` was present in population `p`.
    pub fn present(&self, p: usize, t: usize) -> u32 {
        self.k[p][t]
    }

    pub fn pop_size(&self, p: usize) -> u32 {
        self.pop_size[p]
    }

    pub fn measured_row(&self, p: usize) -> &[u32] {
        &self.n[p]
    }

    /// Serializes to the count-level CSV format.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("population,pop_size,trait,n,k\n");
        for (pi, pop) in self.populations.iter().enumerate() {
            for (ti, trait_label) in self.traits.iter().enumerate() {
                writeln!(
                    out,
                    "{pop},{},{trait_label},{},{}",
                    self.pop_size[pi], self.n[pi][ti], self.k[pi][ti]
                )
                .expect("writing to string cannot fail");
            }
        }
        out
    }

    /// Parses the count-level CSV format. Every population must list every
    /// trait exactly once.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| parse_err(1, 1, "empty input"))?;
        if header != "population,pop_size,trait,n,k" {
            return Err(parse_err(
                1,
                1,
                "expected header 'population,pop_size,trait,n,k'",
            ));
        }

        let mut populations: Vec<String> = Vec::new();
        let mut traits: Vec<String> = Vec::new();
        let mut pop_size: Vec<u32> = Vec::new();
        // (population index, trait index) -> (n, k)
        let mut cells: Vec<((usize, usize), (u32, u32))> = Vec::new();

        for (idx, line) in lines {
            let row = idx + 1;
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 5 {
                return Err(parse_err(
                    row,
                    fields.len().min(5) + 1,
                    format!("expected 5 fields, found {}", fields.len()),
                ));
            }
            let pop = fields[0];
            let size: u32 = parse_int(fields[1], row, 2, "pop_size")?;
            let trait_label = fields[2];
            let n: u32 = parse_int(fields[3], row, 4, "n")?;
            let k: u32 = parse_int(fields[4], row, 5, "k")?;

            let pi = match populations.iter().position(|p| p == pop) {
                Some(pi) => {
                    if pop_size[pi] != size {
                        return Err(parse_err(
                            row,
                            2,
                            format!(
                                "inconsistent pop_size for population '{pop}': {size} != {}",
                                pop_size[pi]
                            ),
                        ));
                    }
                    pi
                }
                None => {
                    populations.push(pop.to_string());
                    pop_size.push(size);
                    populations.len() - 1
                }
            };
            let ti = match traits.iter().position(|t| t == trait_label) {
                Some(ti) => ti,
                None => {
                    traits.push(trait_label.to_string());
                    traits.len() - 1
                }
            };
            if cells.iter().any(|&(key, _)| key == (pi, ti)) {
                return Err(parse_err(
                    row,
                    3,
                    format!("duplicate (population, trait) pair ({pop}, {trait_label})"),
                ));
            }
            cells.push(((pi, ti), (n, k)));
        }

        let p = populations.len();
        let m = traits.len();
        let mut n = vec![vec![0u32; m]; p];
        let mut k = vec![vec![0u32; m]; p];
        let mut seen = vec![vec![false; m]; p];
        for ((pi, ti), (nv, kv)) in cells {
            n[pi][ti] = nv;
            k[pi][ti] = kv;
            seen[pi][ti] = true;
        }
        for pi in 0..p {
            for ti in 0..m {
                if !seen[pi][ti] {
                    return Err(Error::InvalidData(format!(
                        "population '{}' is missing trait '{}'",
                        populations[pi], traits[ti]
                    )));
                }
            }
        }
        Self::new(populations, traits, n, k, pop_size)
    }
}

fn unique_count(labels: &[String]) -> usize {
    labels.iter().collect::<HashSet<_>>().len()
}

fn parse_err(row: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        row,
        column,
        message: message.into(),
    }
}

fn parse_int(field: &str, row: usize, column: usize, what: &str) -> Result<u32> {
    field
        .parse()
        .map_err(|_| parse_err(row, column, format!("invalid {what} '{field}'")))
}

/// Presence state of one trait on one individual.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraitValue {
    Present,
    Absent,
    Missing,
}

/// One row of an individual-level file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndividualRecord {
    pub population: String,
    pub individual_id: String,
    pub values: Vec<TraitValue>,
}

/// Individual-level observations together with the trait labels from the
/// file header.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndividualTable {
    pub traits: Vec<String>,
    pub records: Vec<IndividualRecord>,
}

/// Parses the individual-level CSV format. Records come back in file order;
/// a duplicated (population, individual) pair is an error.
pub fn parse_individuals(text: &str) -> Result<IndividualTable> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, 1, "empty input"))?;
    let head_fields: Vec<&str> = header.split(',').collect();
    if head_fields.len() < 3 || head_fields[0] != "population" || head_fields[1] != "individual" {
        return Err(parse_err(
            1,
            1,
            "expected header 'population,individual,<trait1>,...'",
        ));
    }
    let traits: Vec<String> = head_fields[2..].iter().map(|s| s.to_string()).collect();
    if unique_count(&traits) != traits.len() {
        return Err(parse_err(1, 3, "duplicate trait label in header"));
    }
    let width = head_fields.len();

    let mut records = Vec::new();
    let mut seen: HashSet<(String, String)> = HashSet::new();
    for (idx, line) in lines {
        let row = idx + 1;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != width {
            return Err(parse_err(
                row,
                fields.len().min(width) + 1,
                format!("expected {width} fields, found {}", fields.len()),
            ));
        }
        let population = fields[0].to_string();
        let individual_id = fields[1].to_string();
        if !seen.insert((population.clone(), individual_id.clone())) {
            return Err(parse_err(
                row,
                2,
                format!("duplicate (population, individual) pair ({population}, {individual_id})"),
            ));
        }
        let mut values = Vec::with_capacity(traits.len());
        for (ci, cell) in fields[2..].iter().enumerate() {
            values.push(match *cell {
                "1" => TraitValue::Present,
                "0" => TraitValue::Absent,
                "?" => TraitValue::Missing,
                other => {
                    return Err(parse_err(
                        row,
                        ci + 3,
                        format!("invalid trait value '{other}'"),
                    ))
                }
            });
        }
        records.push(IndividualRecord {
            population,
            individual_id,
            values,
        });
    }
    Ok(IndividualTable { traits, records })
}

/// Aggregates individual records into counts. Population order is first
/// appearance; `?` cells contribute to neither `n` nor `k`.
pub fn aggregate(table: &IndividualTable) -> Result<TraitCounts> {
    if table.records.is_empty() {
        return Err(Error::InvalidData("no records to aggregate".into()));
    }
    let m = table.traits.len();
    for record in &table.records {
        if record.values.len() != m {
            return Err(Error::Mismatch(format!(
                "record ({}, {}) has {} values, expected {m}",
                record.population,
                record.individual_id,
                record.values.len()
            )));
        }
    }

    let mut populations: Vec<String> = Vec::new();
    let mut pop_size: Vec<u32> = Vec::new();
    let mut n: Vec<Vec<u32>> = Vec::new();
    let mut k: Vec<Vec<u32>> = Vec::new();
    for record in &table.records {
        let pi = match populations.iter().position(|p| *p == record.population) {
            Some(pi) => pi,
            None => {
                populations.push(record.population.clone());
                pop_size.push(0);
                n.push(vec![0; m]);
                k.push(vec![0; m]);
                populations.len() - 1
            }
        };
        pop_size[pi] += 1;
        for (ti, value) in record.values.iter().enumerate() {
            match value {
                TraitValue::Present => {
                    n[pi][ti] += 1;
                    k[pi][ti] += 1;
                }
                TraitValue::Absent => n[pi][ti] += 1,
                TraitValue::Missing => {}
            }
        }
    }
    TraitCounts::new(populations, table.traits.clone(), n, k, pop_size)
}
