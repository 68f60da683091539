//! Matrix Market reader and writer for real matrices.
//!
//! Reads `coordinate` and `array` files with `real` or `integer` fields and
//! `general`, `symmetric` or `skew-symmetric` symmetry. Duplicate
//! coordinate entries are summed. Writes the dense `array real general`
//! form with round-trip exact numbers.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::tags::TagSet;

#[derive(Clone, Debug, PartialEq)]
pub struct MatrixMarket {
    pub matrix: Matrix,
    /// `symmetric` when the header declares it, otherwise empty.
    pub tags: TagSet,
}

#[derive(Clone, Copy, PartialEq)]
enum Symmetry {
    General,
    Symmetric,
    Skew,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn number<T: std::str::FromStr>(token: Option<&str>, line: usize, what: &str) -> Result<T> {
    let token = token.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    token
        .parse()
        .map_err(|_| parse_err(line, format!("invalid {what} `{token}`")))
}

pub fn read_matrix_market(reader: impl BufRead) -> Result<MatrixMarket> {
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));

    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty file"))?;
    let header = header?;
    let fields: Vec<String> = header.split_whitespace().map(str::to_lowercase).collect();
    if fields.len() != 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" {
        return Err(parse_err(
            1,
            "expected `%%MatrixMarket matrix <format> <field> <symmetry>`",
        ));
    }
    let coordinate = match fields[2].as_str() {
        "coordinate" => true,
        "array" => false,
        other => return Err(parse_err(1, format!("unsupported format `{other}`"))),
    };
    if !matches!(fields[3].as_str(), "real" | "integer") {
        return Err(parse_err(1, format!("unsupported field `{}`", fields[3])));
    }
    let symmetry = match fields[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::Skew,
        other => return Err(parse_err(1, format!("unsupported symmetry `{other}`"))),
    };

    // Remaining non-comment, non-blank lines.
    let mut content = lines.filter_map(|(n, l)| match l {
        Ok(l) if l.trim().is_empty() || l.trim_start().starts_with('%') => None,
        other => Some((n, other)),
    });

    let (size_line, size) = content
        .next()
        .ok_or_else(|| parse_err(1, "missing size line"))?;
    let size = size?;
    let mut tokens = size.split_whitespace();
    let rows: usize = number(tokens.next(), size_line, "row count")?;
    let cols: usize = number(tokens.next(), size_line, "column count")?;
    let entries: usize = if coordinate {
        number(tokens.next(), size_line, "entry count")?
    } else if symmetry == Symmetry::General {
        rows * cols
    } else if symmetry == Symmetry::Symmetric {
        rows * (rows + 1) / 2
    } else {
        rows * rows.saturating_sub(1) / 2
    };
    if tokens.next().is_some() {
        return Err(parse_err(size_line, "unexpected token on size line"));
    }
    if symmetry != Symmetry::General && rows != cols {
        return Err(parse_err(size_line, "a symmetric matrix must be square"));
    }

    let mut matrix = Matrix::zeros(rows, cols);
    let mut last_line = size_line;
    // Array files list (the lower triangle of) each column in turn.
    let mut array_positions = (0..cols).flat_map(|j| {
        let start = match symmetry {
            Symmetry::General => 0,
            Symmetry::Symmetric => j,
            Symmetry::Skew => j + 1,
        };
        (start..rows).map(move |i| (i, j))
    });
    for k in 0..entries {
        let (n, line) = content.next().ok_or_else(|| {
            parse_err(
                last_line,
                format!("expected {entries} entries, found {k}"),
            )
        })?;
        let line = line?;
        last_line = n;
        let mut tokens = line.split_whitespace();
        let (i, j) = if coordinate {
            let i: usize = number(tokens.next(), n, "row index")?;
            let j: usize = number(tokens.next(), n, "column index")?;
            if i == 0 || i > rows || j == 0 || j > cols {
                return Err(parse_err(
                    n,
                    format!("index ({i}, {j}) outside a {rows}x{cols} matrix"),
                ));
            }
            (i - 1, j - 1)
        } else {
            array_positions.next().expect("entry count matches positions")
        };
        let value: f64 = number(tokens.next(), n, "value")?;
        if tokens.next().is_some() {
            return Err(parse_err(n, "unexpected token after value"));
        }
        if symmetry != Symmetry::General && j > i {
            return Err(parse_err(n, "symmetric files store the lower triangle only"));
        }
        if symmetry == Symmetry::Skew && i == j {
            return Err(parse_err(n, "skew-symmetric files have no diagonal entries"));
        }
        matrix[(i, j)] += value;
        if i != j {
            match symmetry {
                Symmetry::General => {}
                Symmetry::Symmetric => matrix[(j, i)] += value,
                Symmetry::Skew => matrix[(j, i)] -= value,
            }
        }
    }
    if let Some((n, _)) = content.next() {
        return Err(parse_err(n, format!("more than {entries} entries")));
    }
    let tags = if symmetry == Symmetry::Symmetric {
        TagSet::SYMMETRIC
    } else {
        TagSet::empty()
    };
    Ok(MatrixMarket { matrix, tags })
}

pub fn write_matrix_market(matrix: &Matrix, mut writer: impl Write) -> Result<()> {
    writeln!(writer, "%%MatrixMarket matrix array real general")?;
    writeln!(writer, "{} {}", matrix.rows(), matrix.cols())?;
    for j in 0..matrix.cols() {
        for i in 0..matrix.rows() {
            writeln!(writer, "{:?}", matrix[(i, j)])?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn read(text: &str) -> Result<MatrixMarket> {
        read_matrix_market(text.as_bytes())
    }

    #[test]
    fn coordinate_general() {
        let mm = read(
            "%%MatrixMarket matrix coordinate real general\n% comment\n\n2 3 3\n1 1 1.5\n2 3 -2\n1 1 0.5\n",
        )
        .unwrap();
        assert_eq!(mm.matrix, Matrix::from_rows(&[[2.0, 0., 0.], [0., 0., -2.]]));
        assert!(mm.tags.is_empty());
    }

    #[test]
    fn coordinate_symmetric() {
        let mm = read("%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n1 1 4\n2 1 1\n").unwrap();
        assert_eq!(mm.matrix, Matrix::from_rows(&[[4., 1.], [1., 0.]]));
        assert_eq!(mm.tags, TagSet::SYMMETRIC);
    }

    #[test]
    fn array_round_trip() {
        let m = Matrix::from_rows(&[[1.0, 0.1], [1e-300, -3.25], [7.0, 1.0 / 3.0]]);
        let mut buf = Vec::new();
        write_matrix_market(&m, &mut buf).unwrap();
        assert_eq!(read_matrix_market(buf.as_slice()).unwrap().matrix, m);
    }

    #[test]
    fn array_symmetric() {
        let mm = read("%%MatrixMarket matrix array real symmetric\n2 2\n1\n2\n3\n").unwrap();
        assert_eq!(mm.matrix, Matrix::from_rows(&[[1., 2.], [2., 3.]]));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let line_of = |text: &str| match read(text).unwrap_err() {
            Error::Parse { line, .. } => line,
            other => panic!("{other}"),
        };
        assert_eq!(line_of("hello\n"), 1);
        assert_eq!(line_of("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n"), 3);
        assert_eq!(line_of("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 x\n"), 3);
        assert_eq!(line_of("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n"), 3);
        assert_eq!(line_of("%%MatrixMarket matrix coordinate complex general\n"), 1);
        assert_eq!(line_of("%%MatrixMarket matrix array real general\n1 1\n1\n2\n"), 4);
    }
}
