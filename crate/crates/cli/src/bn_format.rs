//! Discrete-model file format.
//!
//! ```text
//! card A 2
//! card Y 2
//! cpt A
//! 0.4 0.6
//! cpt Y            # parents in ascending id order, last varying fastest
//! 0.7 0.3
//! 0.3 0.7
//! outcome 0.0 1.0  # values for the outcome vertex's states (optional)
//! ```
//!
//! Every vertex needs a `card` line and a `cpt` block with one row per
//! parent configuration. Vertices without an `outcome` line take their state
//! index as value.

use crate::format::FileError;
use adjust_core::graph::{Dag, VertexId};
use adjust_core::oracle::{Cpt, DiscreteBn};

pub fn parse_bn(text: &str, dag: &Dag, outcome: VertexId) -> Result<DiscreteBn, FileError> {
    let n = dag.vertex_count();
    let lines: Vec<(usize, Vec<&str>)> = text
        .lines()
        .enumerate()
        .map(|(i, raw)| {
            let body = raw.split('#').next().unwrap_or("");
            (i + 1, body.split_whitespace().collect::<Vec<&str>>())
        })
        .filter(|(_, t)| !t.is_empty())
        .collect();

    let lookup = |line: usize, label: &str| -> Result<VertexId, FileError> {
        dag.index_of(label).ok_or_else(|| FileError {
            line: Some(line),
            message: format!("unknown node `{label}`"),
        })
    };
    let parse_f64 = |line: usize, tok: &str| -> Result<f64, FileError> {
        tok.parse::<f64>().map_err(|_| FileError {
            line: Some(line),
            message: format!("expected a number, got `{tok}`"),
        })
    };

    let mut cards: Vec<Option<usize>> = vec![None; n];
    for &(num, ref toks) in &lines {
        if toks[0] != "card" {
            continue;
        }
        let [_, label, k] = toks.as_slice() else {
            return Err(FileError {
                line: Some(num),
                message: "expected `card <label> <count>`".into(),
            });
        };
        let v = lookup(num, label)?;
        let k: usize = k.parse().map_err(|_| FileError {
            line: Some(num),
            message: format!("invalid state count `{k}`"),
        })?;
        if k < 2 {
            return Err(FileError {
                line: Some(num),
                message: "state count must be at least 2".into(),
            });
        }
        if cards[v].replace(k).is_some() {
            return Err(FileError {
                line: Some(num),
                message: format!("duplicate card line for `{label}`"),
            });
        }
    }
    let cards: Vec<usize> = cards
        .into_iter()
        .enumerate()
        .map(|(v, c)| {
            c.ok_or_else(|| FileError {
                line: None,
                message: format!("missing card line for `{}`", dag.label(v)),
            })
        })
        .collect::<Result<_, _>>()?;

    let mut cpts: Vec<Option<Cpt>> = (0..n).map(|_| None).collect();
    let mut outcome_values: Option<Vec<f64>> = None;
    let mut i = 0;
    while i < lines.len() {
        let (num, ref toks) = lines[i];
        match toks[0] {
            "card" => i += 1,
            "outcome" => {
                let values: Vec<f64> = toks[1..]
                    .iter()
                    .map(|t| parse_f64(num, t))
                    .collect::<Result<_, _>>()?;
                if values.len() != cards[outcome] {
                    return Err(FileError {
                        line: Some(num),
                        message: format!(
                            "outcome line has {} values, `{}` has {} states",
                            values.len(),
                            dag.label(outcome),
                            cards[outcome]
                        ),
                    });
                }
                if outcome_values.replace(values).is_some() {
                    return Err(FileError {
                        line: Some(num),
                        message: "duplicate outcome line".into(),
                    });
                }
                i += 1;
            }
            "cpt" => {
                let [_, label] = toks.as_slice() else {
                    return Err(FileError {
                        line: Some(num),
                        message: "expected `cpt <label>`".into(),
                    });
                };
                let v = lookup(num, label)?;
                if cpts[v].is_some() {
                    return Err(FileError {
                        line: Some(num),
                        message: format!("duplicate cpt block for `{label}`"),
                    });
                }
                let rows_needed: usize = dag.parents(v).iter().map(|&p| cards[p]).product();
                let mut rows = Vec::with_capacity(rows_needed);
                i += 1;
                while rows.len() < rows_needed {
                    let Some(&(row_num, ref row_toks)) = lines.get(i) else {
                        return Err(FileError {
                            line: Some(num),
                            message: format!(
                                "cpt block for `{label}` ended after {} of {rows_needed} rows",
                                rows.len()
                            ),
                        });
                    };
                    if ["card", "cpt", "outcome"].contains(&row_toks[0]) {
                        return Err(FileError {
                            line: Some(row_num),
                            message: format!(
                                "cpt block for `{label}` ended after {} of {rows_needed} rows",
                                rows.len()
                            ),
                        });
                    }
                    let row: Vec<f64> = row_toks
                        .iter()
                        .map(|t| parse_f64(row_num, t))
                        .collect::<Result<_, _>>()?;
                    if row.len() != cards[v] {
                        return Err(FileError {
                            line: Some(row_num),
                            message: format!(
                                "row has {} entries, `{label}` has {} states",
                                row.len(),
                                cards[v]
                            ),
                        });
                    }
                    rows.push(row);
                    i += 1;
                }
                cpts[v] = Some(Cpt::new(rows));
            }
            other => {
                return Err(FileError {
                    line: Some(num),
                    message: format!("unknown directive `{other}`"),
                })
            }
        }
    }
    let cpts: Vec<Cpt> = cpts
        .into_iter()
        .enumerate()
        .map(|(v, c)| {
            c.ok_or_else(|| FileError {
                line: None,
                message: format!("missing cpt block for `{}`", dag.label(v)),
            })
        })
        .collect::<Result<_, _>>()?;

    let mut state_values: Vec<Vec<f64>> = cards
        .iter()
        .map(|&k| (0..k).map(|s| s as f64).collect())
        .collect();
    if let Some(values) = outcome_values {
        state_values[outcome] = values;
    }
    DiscreteBn::new(dag.clone(), cards, cpts, Some(state_values)).map_err(|e| FileError {
        line: None,
        message: e.to_string(),
    })
}
