//! Plain-text output helpers.

/// Round-trippable float formatting (17 significant digits).
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Joins already formatted cells into a CSV line.
pub fn csv_row<I, S>(cells: I) -> String
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut line = cells
        .into_iter()
        .map(|s| s.as_ref().to_owned())
        .collect::<Vec<_>>()
        .join(",");
    line.push('\n');
    line
}

/// CSV table from a header and numeric rows.
pub fn numeric_csv(header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut out = csv_row(header.iter());
    for r in rows {
        out.push_str(&csv_row(r.iter().map(|&x| fmt_f64(x))));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_roundtrip() {
        for x in [0.1, -1.0 / 3.0, 1e-300, 6.02214076e23, 0.0] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn table_shape() {
        let t = numeric_csv(&["a", "b"], vec![vec![1.0, 2.0]]);
        assert_eq!(t.lines().count(), 2);
        assert!(t.starts_with("a,b\n"));
    }
}
