//! Score tables (datasets × algorithms) and tie-averaged row ranking.

use std::io::Read;

use super::EvalError;

/// Rectangular matrix of scores with dataset rows and algorithm columns.
///
/// The CSV form has a header whose first cell is the literal `dataset`
/// followed by algorithm names; each row starts with the dataset name.
/// Requiring the corner label catches transposed tables instead of
/// silently ranking datasets as if they were algorithms.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    datasets: Vec<String>,
    algorithms: Vec<String>,
    scores: Vec<Vec<f64>>,
}

impl ScoreTable {
    pub fn new(
        datasets: Vec<String>,
        algorithms: Vec<String>,
        scores: Vec<Vec<f64>>,
    ) -> Result<ScoreTable, EvalError> {
        if scores.len() != datasets.len() {
            return Err(EvalError::TableFormat {
                line: 0,
                message: format!(
                    "{} score rows for {} datasets",
                    scores.len(),
                    datasets.len()
                ),
            });
        }
        for (i, row) in scores.iter().enumerate() {
            if row.len() != algorithms.len() {
                return Err(EvalError::TableFormat {
                    line: 0,
                    message: format!(
                        "row {} has {} scores for {} algorithms",
                        i,
                        row.len(),
                        algorithms.len()
                    ),
                });
            }
            if let Some(bad) = row.iter().find(|v| !v.is_finite()) {
                return Err(EvalError::TableFormat {
                    line: 0,
                    message: format!("non-finite score {bad} in row {i}"),
                });
            }
        }
        Ok(ScoreTable {
            datasets,
            algorithms,
            scores,
        })
    }

    pub fn from_csv_reader(reader: impl Read) -> Result<ScoreTable, EvalError> {
        let mut csv_reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);

        let headers = csv_reader.headers().map_err(csv_error)?.clone();
        let mut header_iter = headers.iter();
        let corner = header_iter.next().unwrap_or("");
        if !corner.eq_ignore_ascii_case("dataset") {
            return Err(EvalError::TableFormat {
                line: 1,
                message: format!(
                    "first header cell must be \"dataset\", found {corner:?}; \
                     is the table transposed?"
                ),
            });
        }
        let algorithms: Vec<String> = header_iter.map(str::to_string).collect();
        if algorithms.is_empty() {
            return Err(EvalError::TableFormat {
                line: 1,
                message: "no algorithm columns".to_string(),
            });
        }

        let mut datasets = Vec::new();
        let mut scores = Vec::new();
        for record in csv_reader.records() {
            let record = record.map_err(csv_error)?;
            let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
            if record.len() != algorithms.len() + 1 {
                return Err(EvalError::TableFormat {
                    line,
                    message: format!(
                        "expected {} cells, found {}",
                        algorithms.len() + 1,
                        record.len()
                    ),
                });
            }
            let mut cells = record.iter();
            datasets.push(cells.next().unwrap_or("").to_string());
            let row: Vec<f64> = cells
                .map(|cell| {
                    let value: f64 = cell.parse().map_err(|_| EvalError::TableFormat {
                        line,
                        message: format!("invalid score {cell:?}"),
                    })?;
                    if !value.is_finite() {
                        return Err(EvalError::TableFormat {
                            line,
                            message: format!("non-finite score {cell:?}"),
                        });
                    }
                    Ok(value)
                })
                .collect::<Result<_, _>>()?;
            scores.push(row);
        }
        ScoreTable::new(datasets, algorithms, scores)
    }

    pub fn n_datasets(&self) -> usize {
        self.datasets.len()
    }

    pub fn n_algorithms(&self) -> usize {
        self.algorithms.len()
    }

    pub fn datasets(&self) -> &[String] {
        &self.datasets
    }

    pub fn algorithms(&self) -> &[String] {
        &self.algorithms
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.scores
    }

    pub fn score(&self, dataset: usize, algorithm: usize) -> f64 {
        self.scores[dataset][algorithm]
    }
}

fn csv_error(err: csv::Error) -> EvalError {
    let line = err.position().map(|p| p.line() as usize).unwrap_or(0);
    EvalError::TableFormat {
        line,
        message: err.to_string(),
    }
}

/// Ranks every row of the table; the best score gets rank 1 and exact
/// ties share the average of the ranks they span.
pub fn rank_rows(table: &ScoreTable, higher_is_better: bool) -> Vec<Vec<f64>> {
    table
        .rows()
        .iter()
        .map(|row| rank_row(row, higher_is_better))
        .collect()
}

pub(crate) fn rank_row(row: &[f64], higher_is_better: bool) -> Vec<f64> {
    let mut order: Vec<usize> = (0..row.len()).collect();
    order.sort_by(|&a, &b| {
        let cmp = row[a].total_cmp(&row[b]);
        if higher_is_better {
            cmp.reverse()
        } else {
            cmp
        }
    });
    let mut ranks = vec![0.0; row.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && row[order[end]] == row[order[start]] {
            end += 1;
        }
        // Positions start..end (0-based) share the mean of ranks
        // start+1..=end.
        let shared = (start + 1 + end) as f64 / 2.0;
        for &column in &order[start..end] {
            ranks[column] = shared;
        }
        start = end;
    }
    ranks
}
