//! Input files: paired predictions (`item_id,seed,correct_a,correct_b`) and
//! pilot results (`r1,r2`).

use std::collections::HashMap;
use std::io::Read;
use std::path::Path;

use crate::domain::{PairedPredictions, PerformancePair};
use crate::error::{Error, Result};

fn open(path: &Path) -> Result<std::fs::File> {
    std::fs::File::open(path).map_err(|e| Error::Io(format!("cannot read {}: {e}", path.display())))
}

fn flag(v: &str, line: usize, col: &str) -> Result<bool> {
    match v.trim() {
        "0" => Ok(false),
        "1" => Ok(true),
        other => Err(Error::InvalidPredictions(format!("row {line}: {col} must be 0 or 1, found `{other}`"))),
    }
}

/// Parses a predictions CSV. Line numbers in errors count the header as 1.
pub fn read_predictions<R: Read>(input: R) -> Result<PairedPredictions> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header = r
        .headers()
        .map_err(|e| Error::InvalidPredictions(format!("header: {e}")))?
        .clone();
    let want = ["item_id", "seed", "correct_a", "correct_b"];
    if header.iter().collect::<Vec<_>>() != want {
        return Err(Error::InvalidPredictions(format!(
            "header must be `{}`, found `{}`",
            want.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut seeds: Vec<String> = Vec::new();
    let mut seed_index: HashMap<String, usize> = HashMap::new();
    let mut rows: Vec<Vec<(String, bool, bool, usize)>> = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::InvalidPredictions(format!("row {line}: {e}")))?;
        if rec.len() != 4 {
            return Err(Error::InvalidPredictions(format!("row {line}: expected 4 fields, found {}", rec.len())));
        }
        let (item, seed) = (rec[0].to_string(), rec[1].to_string());
        if item.is_empty() || seed.is_empty() {
            return Err(Error::InvalidPredictions(format!("row {line}: empty item_id or seed")));
        }
        let a = flag(&rec[2], line, "correct_a")?;
        let b = flag(&rec[3], line, "correct_b")?;
        let s = *seed_index.entry(seed.clone()).or_insert_with(|| {
            seeds.push(seed);
            rows.push(Vec::new());
            rows.len() - 1
        });
        rows[s].push((item, a, b, line));
    }
    if seeds.is_empty() {
        return Err(Error::InvalidPredictions("no rows".into()));
    }
    // Item order follows the first seed.
    let items: Vec<String> = rows[0].iter().map(|r| r.0.clone()).collect();
    let mut position = HashMap::with_capacity(items.len());
    for (j, (item, .., line)) in rows[0].iter().enumerate() {
        if position.insert(item.clone(), j).is_some() {
            return Err(Error::InvalidPredictions(format!(
                "row {line}: duplicate (item_id, seed) pair ({item}, {})",
                seeds[0]
            )));
        }
    }
    let mut correct_a = Vec::with_capacity(seeds.len());
    let mut correct_b = Vec::with_capacity(seeds.len());
    for (s, seed_rows) in rows.iter().enumerate() {
        let mut a = vec![false; items.len()];
        let mut b = vec![false; items.len()];
        let mut seen = vec![false; items.len()];
        for (item, ca, cb, line) in seed_rows {
            let j = *position.get(item).ok_or_else(|| {
                Error::InvalidPredictions(format!(
                    "row {line}: item `{item}` under seed `{}` is missing from seed `{}`",
                    seeds[s], seeds[0]
                ))
            })?;
            if seen[j] {
                return Err(Error::InvalidPredictions(format!(
                    "row {line}: duplicate (item_id, seed) pair ({item}, {})",
                    seeds[s]
                )));
            }
            seen[j] = true;
            a[j] = *ca;
            b[j] = *cb;
        }
        if let Some(j) = seen.iter().position(|x| !x) {
            return Err(Error::InvalidPredictions(format!(
                "seed `{}` is missing item `{}`",
                seeds[s], items[j]
            )));
        }
        correct_a.push(a);
        correct_b.push(b);
    }
    PairedPredictions::new(items, seeds, correct_a, correct_b)
}

pub fn load_predictions(path: &Path) -> Result<PairedPredictions> {
    read_predictions(open(path)?)
}

pub fn write_predictions(pred: &PairedPredictions) -> String {
    let mut s = String::from("item_id,seed,correct_a,correct_b\n");
    for (k, seed) in pred.seeds().iter().enumerate() {
        let (a, b) = (pred.row_a(k), pred.row_b(k));
        for (j, item) in pred.item_ids().iter().enumerate() {
            s.push_str(&format!("{item},{seed},{},{}\n", u8::from(a[j]), u8::from(b[j])));
        }
    }
    s
}

/// Parses pilot accuracies, one `r1,r2` row per seed.
pub fn read_pilot<R: Read>(input: R) -> Result<Vec<PerformancePair>> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header = r
        .headers()
        .map_err(|e| Error::InvalidPredictions(format!("header: {e}")))?
        .clone();
    if header.iter().collect::<Vec<_>>() != ["r1", "r2"] {
        return Err(Error::InvalidPredictions("pilot header must be `r1,r2`".into()));
    }
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::InvalidPredictions(format!("row {line}: {e}")))?;
        let num = |k: usize| -> Result<f64> {
            rec.get(k)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| Error::InvalidPredictions(format!("row {line}: r{} is not a number", k + 1)))
        };
        let pair = PerformancePair::accuracy(num(0)?, num(1)?)
            .map_err(|e| Error::InvalidPredictions(format!("row {line}: {e}")))?;
        out.push(pair);
    }
    if out.is_empty() {
        return Err(Error::Empty("pilot"));
    }
    Ok(out)
}

pub fn load_pilot(path: &Path) -> Result<Vec<PerformancePair>> {
    read_pilot(open(path)?)
}
