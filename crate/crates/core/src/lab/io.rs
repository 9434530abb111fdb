//! Dataset CSV format: header `d0,...,d{D-1},label,split`.

use std::io::{Read, Write};

use super::dataset::{RepresentationDataset, Split};
use crate::error::{Error, Result};

pub fn write_dataset_csv<W: Write>(ds: &RepresentationDataset, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io_err = |e: csv::Error| Error::Io(format!("write failed: {e}"));
    let mut header: Vec<String> = (0..ds.dim()).map(|j| format!("d{j}")).collect();
    header.push("label".into());
    header.push("split".into());
    w.write_record(&header).map_err(io_err)?;
    for i in 0..ds.len() {
        // `{:?}` on f64 prints the shortest representation that round-trips.
        let mut rec: Vec<String> = ds.row(i).iter().map(|v| format!("{v:?}")).collect();
        rec.push(ds.labels()[i].to_string());
        rec.push(ds.splits()[i].as_str().to_string());
        w.write_record(&rec).map_err(io_err)?;
    }
    w.flush()
        .map_err(|e| Error::Io(format!("write failed: {e}")))
}

/// Reads a dataset. The class count is `max(label) + 1` unless given.
pub fn read_dataset_csv<R: Read>(input: R, num_classes: Option<usize>) -> Result<RepresentationDataset> {
    let mut r = csv::Reader::from_reader(input);
    let header = r
        .headers()
        .map_err(|e| Error::InvalidDataset(format!("header: {e}")))?
        .clone();
    let n = header.len();
    if n < 3 || &header[n - 2] != "label" || &header[n - 1] != "split" {
        return Err(Error::InvalidDataset("header must be d0..dN,label,split".into()));
    }
    let dim = n - 2;
    for (j, h) in header.iter().take(dim).enumerate() {
        if h != format!("d{j}") {
            return Err(Error::InvalidDataset(format!("column {j} should be `d{j}`, found `{h}`")));
        }
    }
    let (mut vectors, mut labels, mut splits) = (Vec::new(), Vec::new(), Vec::new());
    for (row, rec) in r.records().enumerate() {
        let line = row + 2;
        let rec = rec.map_err(|e| Error::InvalidDataset(format!("row {line}: {e}")))?;
        for j in 0..dim {
            let v: f64 = rec[j]
                .parse()
                .map_err(|_| Error::InvalidDataset(format!("row {line}: `{}` is not a number", &rec[j])))?;
            vectors.push(v);
        }
        labels.push(
            rec[dim]
                .parse::<usize>()
                .map_err(|_| Error::InvalidDataset(format!("row {line}: bad label `{}`", &rec[dim])))?,
        );
        splits.push(
            Split::parse(&rec[dim + 1])
                .ok_or_else(|| Error::InvalidDataset(format!("row {line}: bad split `{}`", &rec[dim + 1])))?,
        );
    }
    let k = num_classes.unwrap_or_else(|| labels.iter().max().map_or(2, |m| (m + 1).max(2)));
    RepresentationDataset::new(dim, k, vectors, labels, splits)
}
