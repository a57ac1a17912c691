//! Input CSV ingestion: rows are time points, columns are variables, with an
//! optional single header row (detected when any first-row cell is not
//! numeric). Missing or non-numeric cells are hard errors that name the file
//! row and column.

use anyhow::{bail, Result};
use srnlsd::SeriesMatrix;

pub fn parse_series_csv(text: &str) -> Result<SeriesMatrix> {
    let mut width: Option<usize> = None;
    let mut data_rows: Vec<Vec<f64>> = Vec::new();
    let mut saw_first = false;

    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();

        if !saw_first {
            saw_first = true;
            width = Some(cells.len());
            // header row: any cell that does not even parse syntactically
            if cells.iter().any(|c| parse_cell(c).is_none()) {
                continue; // header
            }
        }

        let expected = width.unwrap();
        if cells.len() != expected {
            bail!(
                "row {line_no} has {} cells, expected {expected}",
                cells.len()
            );
        }
        let mut row = Vec::with_capacity(expected);
        for (col_idx, cell) in cells.iter().enumerate() {
            let col_no = col_idx + 1;
            if cell.trim().is_empty() {
                bail!("missing value at row {line_no}, column {col_no}");
            }
            match parse_cell(cell) {
                Some(v) if v.is_finite() => row.push(v),
                Some(_) => bail!("non-finite value at row {line_no}, column {col_no}"),
                None => bail!(
                    "could not parse '{}' as a number at row {line_no}, column {col_no}",
                    cell.trim()
                ),
            }
        }
        data_rows.push(row);
    }

    if data_rows.is_empty() {
        bail!("no data rows in input CSV");
    }

    // transpose time-major rows into the internal variables-by-time layout
    let t_len = data_rows.len();
    let n = data_rows[0].len();
    let mut data = vec![0.0; n * t_len];
    for (t, row) in data_rows.iter().enumerate() {
        for (i, &v) in row.iter().enumerate() {
            data[i * t_len + t] = v;
        }
    }
    Ok(SeriesMatrix::new(n, t_len, data)?)
}

fn parse_cell(cell: &str) -> Option<f64> {
    cell.trim().parse().ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_plain_numeric_csv() {
        let m = parse_series_csv("1,2\n3,4\n5,6\n").unwrap();
        assert_eq!(m.rows(), 2);
        assert_eq!(m.cols(), 3);
        assert_eq!(m.row(0), &[1.0, 3.0, 5.0]);
        assert_eq!(m.row(1), &[2.0, 4.0, 6.0]);
    }

    #[test]
    fn skips_header_row() {
        let m = parse_series_csv("x,y\n1,2\n3,4\n").unwrap();
        assert_eq!(m.rows(), 2);
        assert_eq!(m.cols(), 2);
        assert_eq!(m.row(0), &[1.0, 3.0]);
    }

    #[test]
    fn names_bad_cell_location() {
        let mut lines = vec!["a,b".to_string()];
        for i in 0..20 {
            lines.push(format!("{i},{}", i * 2));
        }
        lines[16] = "0.5,oops".to_string(); // file row 17, column 2
        let err = parse_series_csv(&lines.join("\n")).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("row 17"), "{msg}");
        assert!(msg.contains("column 2"), "{msg}");
    }

    #[test]
    fn missing_value_is_fatal() {
        let err = parse_series_csv("1,2\n3,\n").unwrap_err();
        assert!(err.to_string().contains("missing value at row 2, column 2"));
    }

    #[test]
    fn ragged_row_is_fatal() {
        let err = parse_series_csv("1,2\n3,4,5\n").unwrap_err();
        assert!(err.to_string().contains("row 2 has 3 cells, expected 2"));
    }

    #[test]
    fn non_finite_is_rejected() {
        let err = parse_series_csv("1,2\n3,inf\n").unwrap_err();
        assert!(err.to_string().contains("row 2, column 2"), "{err}");
    }

    #[test]
    fn header_only_is_an_error() {
        assert!(parse_series_csv("x,y\n").is_err());
        assert!(parse_series_csv("").is_err());
    }
}
