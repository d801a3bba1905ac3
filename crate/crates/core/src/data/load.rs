use std::collections::BTreeSet;
use std::io::Read;
use std::path::Path;

use super::{ColumnMeta, DataError, Dataset, FeatureMatrix, LabelVector};

/// Load a headed CSV file into a fully numeric [`Dataset`].
///
/// When `categorical` is `None`, any column containing a cell that does not
/// parse as a finite number is one-hot encoded. When it is given, only those
/// columns are encoded and every other cell must be numeric. Labels map to
/// `0..C` by sorted distinct value (numeric order when every label parses as
/// a number, lexicographic otherwise).
pub fn load_csv(
    path: impl AsRef<Path>,
    label_column: &str,
    categorical: Option<&[String]>,
) -> Result<Dataset, DataError> {
    let file = std::fs::File::open(path)?;
    load_csv_reader(file, label_column, categorical)
}

pub fn load_csv_reader<R: Read>(
    reader: R,
    label_column: &str,
    categorical: Option<&[String]>,
) -> Result<Dataset, DataError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    let label_idx = header
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| DataError::MissingLabelColumn(label_column.to_owned()))?;

    let mut cells: Vec<Vec<String>> = Vec::new();
    for record in rdr.records() {
        let record = record?;
        cells.push(record.iter().map(str::to_owned).collect());
    }

    for (r, row) in cells.iter().enumerate() {
        for (c, cell) in row.iter().enumerate() {
            if cell.is_empty() {
                return Err(DataError::UnparseableCell {
                    row: r,
                    col: header[c].clone(),
                });
            }
        }
    }

    let feature_cols: Vec<usize> = (0..header.len()).filter(|&c| c != label_idx).collect();
    let is_categorical: Vec<bool> = match categorical {
        Some(declared) => {
            for name in declared {
                if !header.contains(name) {
                    return Err(DataError::MissingColumn(name.clone()));
                }
            }
            feature_cols
                .iter()
                .map(|&c| declared.contains(&header[c]))
                .collect()
        }
        None => feature_cols
            .iter()
            .map(|&c| cells.iter().any(|row| parse_finite(&row[c]).is_none()))
            .collect(),
    };

    // Column plan: one numeric column, or one indicator per sorted category.
    enum Plan {
        Numeric(usize),
        OneHot(usize, Vec<String>),
    }
    let mut plans = Vec::new();
    let mut meta = Vec::new();
    for (&c, &cat) in feature_cols.iter().zip(&is_categorical) {
        if cat {
            let levels: Vec<String> = cells
                .iter()
                .map(|row| row[c].clone())
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            for level in &levels {
                meta.push(ColumnMeta::original(format!("{}={}", header[c], level)));
            }
            plans.push(Plan::OneHot(c, levels));
        } else {
            meta.push(ColumnMeta::original(header[c].clone()));
            plans.push(Plan::Numeric(c));
        }
    }

    let mut values = Vec::with_capacity(cells.len() * meta.len());
    for (r, row) in cells.iter().enumerate() {
        for plan in &plans {
            match plan {
                Plan::Numeric(c) => {
                    let v = parse_finite(&row[*c]).ok_or_else(|| DataError::UnparseableCell {
                        row: r,
                        col: header[*c].clone(),
                    })?;
                    values.push(v);
                }
                Plan::OneHot(c, levels) => {
                    values.extend(levels.iter().map(|l| f64::from(u8::from(*l == row[*c]))));
                }
            }
        }
    }
    let features = FeatureMatrix::new(cells.len(), meta.len(), values, meta)?;

    let raw_labels: Vec<&str> = cells.iter().map(|row| row[label_idx].as_str()).collect();
    let class_names = sorted_distinct(&raw_labels);
    if class_names.len() < 2 {
        return Err(DataError::SingleClassDataset);
    }
    let ids = raw_labels
        .iter()
        .map(|l| class_names.iter().position(|n| n == l).expect("label seen"))
        .collect();
    let labels = LabelVector::new(ids, class_names.len())?;
    let mut dataset = Dataset::new(features, labels)?;
    dataset.class_names = class_names;
    Ok(dataset)
}

fn parse_finite(cell: &str) -> Option<f64> {
    cell.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn sorted_distinct(raw: &[&str]) -> Vec<String> {
    let distinct: BTreeSet<&str> = raw.iter().copied().collect();
    let mut names: Vec<&str> = distinct.into_iter().collect();
    if names.iter().all(|n| parse_finite(n).is_some()) {
        names.sort_by(|a, b| parse_finite(a).unwrap().total_cmp(&parse_finite(b).unwrap()));
    }
    names.into_iter().map(str::to_owned).collect()
}
