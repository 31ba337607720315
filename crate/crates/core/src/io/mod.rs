//! CSV ingestion and score preprocessing.
//!
//! Three label-framed formats are understood:
//!
//! * matches: header `player_i,player_j,outcome`, one match per row;
//! * probabilities: square matrix, first row and column hold the same labels,
//!   blank off-diagonal cells mark unobserved pairs;
//! * scores: first row holds task labels, first column agent labels.

mod report;

pub use report::{
    format_number, matrix_sha256, parse_report, serialize_report, sha256_hex, Diagnostics, EloBlock, EvaluationReport,
    HodgeBlock, MeloBlock, Mode, NashBlock, Real, SchurBlock,
};

use std::collections::HashMap;

use csv::{ReaderBuilder, StringRecord, Trim};
use nalgebra::DMatrix;

use crate::avt::ScoreMatrix;
use crate::error::{Error, Result};
use crate::ratings::{EmpiricalProbs, PairwiseCounts};

/// Complementarity violations up to this size are repaired by averaging.
pub const COMPLEMENT_REPAIR_TOL: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct MatchRecord {
    pub player_i: String,
    pub player_j: String,
    /// 1 when `player_i` won, 0 when it lost, fractions for draws.
    pub outcome: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    Matches,
    Probs,
    Scores,
}

fn records(text: &str) -> Result<Vec<(usize, StringRecord)>> {
    let mut reader = ReaderBuilder::new().has_headers(false).flexible(true).trim(Trim::All).from_reader(text.as_bytes());
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::parse(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.iter().all(str::is_empty) {
            continue;
        }
        out.push((line, rec));
    }
    Ok(out)
}

fn number(cell: &str, line: usize, what: &str) -> Result<f64> {
    let v: f64 = cell.parse().map_err(|_| Error::parse(line, format!("{what}: {cell:?} is not a number")))?;
    if !v.is_finite() {
        return Err(Error::parse(line, format!("{what}: {cell:?} is not finite")));
    }
    Ok(v)
}

/// Guesses the format from the header row: the match header, a square frame
/// whose row labels repeat the column labels, or else scores.
pub fn detect_format(text: &str) -> Result<InputFormat> {
    let rows = records(text)?;
    let Some((_, header)) = rows.first() else {
        return Err(Error::parse(1, "empty input"));
    };
    if header.iter().collect::<Vec<_>>() == ["player_i", "player_j", "outcome"] {
        return Ok(InputFormat::Matches);
    }
    let cols: Vec<&str> = header.iter().skip(1).collect();
    let row_labels: Vec<&str> = rows.iter().skip(1).filter_map(|(_, r)| r.get(0)).collect();
    if !cols.is_empty() && cols == row_labels {
        Ok(InputFormat::Probs)
    } else {
        Ok(InputFormat::Scores)
    }
}

pub fn parse_matches(text: &str) -> Result<Vec<MatchRecord>> {
    let rows = records(text)?;
    let mut iter = rows.into_iter();
    match iter.next() {
        Some((_, h)) if h.iter().collect::<Vec<_>>() == ["player_i", "player_j", "outcome"] => {}
        Some((line, _)) => return Err(Error::parse(line, "expected header player_i,player_j,outcome")),
        None => return Ok(Vec::new()),
    }
    let mut out = Vec::new();
    for (line, rec) in iter {
        if rec.len() != 3 {
            return Err(Error::parse(line, format!("expected 3 fields, found {}", rec.len())));
        }
        let (pi, pj) = (rec[0].to_string(), rec[1].to_string());
        if pi.is_empty() || pj.is_empty() {
            return Err(Error::parse(line, "empty player name"));
        }
        if pi == pj {
            return Err(Error::parse(line, format!("player {pi:?} plays itself")));
        }
        let outcome = number(&rec[2], line, "outcome")?;
        if !(0.0..=1.0).contains(&outcome) {
            return Err(Error::parse(line, format!("outcome {outcome} outside [0, 1]")));
        }
        out.push(MatchRecord { player_i: pi, player_j: pj, outcome });
    }
    Ok(out)
}

/// Accumulates outcomes into win counts, players in order of first appearance.
pub fn matches_to_counts(records: &[MatchRecord]) -> Result<PairwiseCounts> {
    let mut labels: Vec<String> = Vec::new();
    let mut index: HashMap<&str, usize> = HashMap::new();
    for r in records {
        for name in [&r.player_i, &r.player_j] {
            if !index.contains_key(name.as_str()) {
                index.insert(name, labels.len());
                labels.push(name.clone());
            }
        }
    }
    let n = labels.len();
    let mut wins = DMatrix::zeros(n, n);
    for r in records {
        let (i, j) = (index[r.player_i.as_str()], index[r.player_j.as_str()]);
        wins[(i, j)] += r.outcome;
        wins[(j, i)] += 1.0 - r.outcome;
    }
    PairwiseCounts::new(wins, labels)
}

pub fn parse_prob_matrix(text: &str) -> Result<EmpiricalProbs> {
    let rows = records(text)?;
    let Some((hline, header)) = rows.first() else {
        return Err(Error::parse(1, "empty input"));
    };
    let labels: Vec<String> = header.iter().skip(1).map(String::from).collect();
    let n = labels.len();
    if n == 0 {
        return Err(Error::parse(*hline, "header has no player labels"));
    }
    if rows.len() - 1 != n {
        return Err(Error::parse(*hline, format!("{n} column labels but {} data rows", rows.len() - 1)));
    }
    let mut cells: Vec<Vec<Option<f64>>> = Vec::with_capacity(n);
    let mut lines = Vec::with_capacity(n);
    for (i, (line, rec)) in rows.iter().skip(1).enumerate() {
        if rec.len() != n + 1 {
            return Err(Error::parse(*line, format!("expected {} fields, found {}", n + 1, rec.len())));
        }
        if rec[0] != labels[i] {
            return Err(Error::parse(*line, format!("row label {:?} does not match column label {:?}", &rec[0], labels[i])));
        }
        let mut row = Vec::with_capacity(n);
        for (j, cell) in rec.iter().skip(1).enumerate() {
            let what = format!("cell ({}, {})", labels[i], labels[j]);
            row.push(if cell.is_empty() || (i == j && cell == "-") { None } else { Some(number(cell, *line, &what)?) });
        }
        cells.push(row);
        lines.push(*line);
    }
    let mut probs = DMatrix::from_element(n, n, 0.5);
    let mut mask = DMatrix::from_element(n, n, false);
    for i in 0..n {
        if let Some(d) = cells[i][i] {
            if d != 0.5 {
                return Err(Error::parse(lines[i], format!("diagonal of {:?} must be blank or 0.5, found {d}", labels[i])));
            }
        }
        for j in (i + 1)..n {
            let pair = format!("({}, {})", labels[i], labels[j]);
            match (cells[i][j], cells[j][i]) {
                (None, None) => {}
                (Some(_), None) | (None, Some(_)) => {
                    return Err(Error::parse(lines[i].max(lines[j]), format!("pair {pair} observed in one direction only")))
                }
                (Some(pij), Some(pji)) => {
                    for (v, line) in [(pij, lines[i]), (pji, lines[j])] {
                        if !(0.0..=1.0).contains(&v) {
                            return Err(Error::parse(line, format!("probability {v} for pair {pair} outside [0, 1]")));
                        }
                    }
                    let gap = (pij + pji - 1.0).abs();
                    if gap > COMPLEMENT_REPAIR_TOL {
                        return Err(Error::parse(
                            lines[j],
                            format!("pair {pair} not complementary: {pij} + {pji} = {}", pij + pji),
                        ));
                    }
                    let p = 0.5 * (pij + 1.0 - pji);
                    probs[(i, j)] = p;
                    probs[(j, i)] = 1.0 - p;
                    mask[(i, j)] = true;
                    mask[(j, i)] = true;
                }
            }
        }
    }
    EmpiricalProbs::new(probs, mask, labels)
}

pub fn parse_score_matrix(text: &str) -> Result<ScoreMatrix> {
    let rows = records(text)?;
    let Some((hline, header)) = rows.first() else {
        return Err(Error::parse(1, "empty input"));
    };
    let tasks: Vec<String> = header.iter().skip(1).map(String::from).collect();
    let n = tasks.len();
    if n == 0 {
        return Err(Error::parse(*hline, "header has no task labels"));
    }
    if rows.len() < 2 {
        return Err(Error::parse(*hline, "no agent rows"));
    }
    let mut agents = Vec::new();
    let mut values = Vec::new();
    for (line, rec) in rows.iter().skip(1) {
        if rec.len() != n + 1 {
            return Err(Error::parse(*line, format!("expected {} fields, found {}", n + 1, rec.len())));
        }
        agents.push(rec[0].to_string());
        for (j, cell) in rec.iter().skip(1).enumerate() {
            if cell.is_empty() {
                return Err(Error::parse(*line, format!("missing score for agent {:?} on task {:?}", &rec[0], tasks[j])));
            }
            values.push(number(cell, *line, &format!("score ({}, {})", &rec[0], tasks[j]))?);
        }
    }
    let m = agents.len();
    ScoreMatrix::new(DMatrix::from_row_slice(m, n, &values), agents, tasks)
}

/// Maps every task column onto `[0, 1]` by `(x - min) / (max - min)`.
/// Constant columns become zeros; their names are returned as warnings.
pub fn standardize_scores(s: &ScoreMatrix) -> (ScoreMatrix, Vec<String>) {
    let mut out = s.scores.clone();
    let mut warnings = Vec::new();
    for j in 0..out.ncols() {
        let mut col = out.column_mut(j);
        let (lo, hi) = (col.min(), col.max());
        if hi > lo {
            col.apply(|x| *x = (*x - lo) / (hi - lo));
        } else {
            col.fill(0.0);
            warnings.push(format!("task {:?} has constant scores; standardized to 0", s.task_labels[j]));
        }
    }
    (s.with_scores(out), warnings)
}

/// Subtracts the grand mean.
pub fn center_scores(s: &ScoreMatrix) -> ScoreMatrix {
    s.with_scores(crate::avt::centered(&s.scores))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn match_examples() {
        let r = parse_matches("player_i,player_j,outcome\na,b,1\nb,a,0\n").unwrap();
        assert_eq!(r.len(), 2);
        let c = matches_to_counts(&r).unwrap();
        assert_eq!(c.labels, vec!["a", "b"]);
        assert_eq!(c.wins[(0, 1)], 2.0);
        assert_eq!(c.wins[(1, 0)], 0.0);

        let c = matches_to_counts(&parse_matches("player_i,player_j,outcome\na,b,0.5").unwrap()).unwrap();
        assert_eq!(c.wins[(0, 1)], 0.5);
        assert_eq!(c.wins[(1, 0)], 0.5);

        match parse_matches("player_i,player_j,outcome\na,b,1\na,a,1") {
            Err(Error::Parse { line: 3, .. }) => {}
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_matches("player_i,player_j,outcome\na,b,1.5"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_matches("player_i,player_j,outcome\na,b"), Err(Error::Parse { line: 2, .. })));
        assert_eq!(matches_to_counts(&[]).unwrap().len(), 0);
    }

    #[test]
    fn seven_three() {
        let mut text = String::from("player_i,player_j,outcome\n");
        for k in 0..10 {
            text.push_str(if k < 7 { "a,b,1\n" } else { "b,a,1\n" });
        }
        let c = matches_to_counts(&parse_matches(&text).unwrap()).unwrap();
        assert_eq!((c.wins[(0, 1)], c.wins[(1, 0)]), (7.0, 3.0));
    }

    #[test]
    fn go_table() {
        let text = ",av,ap,zen\nav,,0.7,0.4\nap,0.3,,1.0\nzen,0.6,0.0,\n";
        assert_eq!(detect_format(text).unwrap(), InputFormat::Probs);
        let p = parse_prob_matrix(text).unwrap();
        assert_eq!(p.probs[(0, 1)], 0.7);
        assert_abs_diff_eq!(p.probs[(1, 0)], 0.3, epsilon = 1e-15);
        assert_eq!(p.probs[(1, 2)], 1.0);
        assert_eq!(p.probs[(2, 1)], 0.0);
        assert!(p.fully_observed());
    }

    #[test]
    fn prob_matrix_errors_and_repairs() {
        let p = parse_prob_matrix(",a,b\na,0.5,0.5\nb,0.5,0.5").unwrap();
        assert_eq!(p.probs[(0, 1)], 0.5);
        match parse_prob_matrix(",a,b\na,,0.7\nb,0.5,") {
            Err(Error::Parse { message, .. }) => assert!(message.contains("(a, b)")),
            other => panic!("{other:?}"),
        }
        let p = parse_prob_matrix(",a,b\na,,0.7004\nb,0.3,").unwrap();
        assert_abs_diff_eq!(p.probs[(0, 1)], 0.7002, epsilon = 1e-12);
        assert_abs_diff_eq!(p.probs[(0, 1)] + p.probs[(1, 0)], 1.0, epsilon = 1e-15);
        let p = parse_prob_matrix(",a,b,c\na,,0.6,\nb,0.4,,0.5\nc,,0.5,").unwrap();
        assert!(!p.observed(0, 2));
        assert!(parse_prob_matrix(",a,b\na,,0.5").is_err());
        assert!(parse_prob_matrix(",a,b\na,,0.5\nc,0.5,").is_err());
        assert!(parse_prob_matrix(",a,b\na,0.4,0.5\nb,0.5,").is_err());
    }

    #[test]
    fn score_matrices() {
        let text = ",task 1,task 2,task 3\nagent A,89,93,76\nagent B,85,85,85\nagent C,79,74,99\n";
        assert_eq!(detect_format(text).unwrap(), InputFormat::Scores);
        let s = parse_score_matrix(text).unwrap();
        assert_eq!((s.agents(), s.tasks()), (3, 3));
        assert_eq!(s.scores[(2, 2)], 99.0);
        let c = center_scores(&s);
        assert_abs_diff_eq!(c.scores.sum(), 0.0, epsilon = 1e-9);
        let sums: Vec<f64> = (0..3).map(|i| c.scores.row(i).sum()).collect();
        assert_abs_diff_eq!(sums.as_slice(), [3.0, 0.0, -3.0].as_slice(), epsilon = 1e-9);
        assert_eq!(center_scores(&c), c);

        let one = parse_score_matrix(",t\na,7").unwrap();
        assert_eq!(one.scores.shape(), (1, 1));
        assert!(matches!(parse_score_matrix(",t1,t2\na,1,\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_score_matrix(",t1,t2\na,1\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_score_matrix(",t1\na,x\n"), Err(Error::Parse { line: 2, .. })));
        assert_eq!(detect_format("player_i,player_j,outcome\n").unwrap(), InputFormat::Matches);
    }

    #[test]
    fn standardization() {
        let s = ScoreMatrix::from_rows(&[&[0.0, 5.0], &[50.0, 5.0], &[100.0, 5.0]]).unwrap();
        let (z, warnings) = standardize_scores(&s);
        assert_eq!(z.scores.column(0).as_slice(), &[0.0, 0.5, 1.0]);
        assert_eq!(z.scores.column(1).as_slice(), &[0.0, 0.0, 0.0]);
        assert_eq!(warnings.len(), 1);
        let unit = ScoreMatrix::from_rows(&[&[0.0], &[0.25], &[1.0]]).unwrap();
        assert_eq!(standardize_scores(&unit).0, unit);
    }
}
