//! Round trip of the JSON matrix format and a CSV table.
use krein::io::{parse_csv, parse_matrix, to_json_string, Cell, Format, MatrixJson, Table};
use krein::spectra::random_haar_unitary;

fn main() -> krein::Result<()> {
    let u = random_haar_unitary(2, 1)?;
    let text = to_json_string(&MatrixJson::from_matrix(u.matrix()))?;
    print!("{text}");
    println!("round trip exact: {}", parse_matrix(&text)? == *u.matrix());

    let mut t = Table::new("demo", &["k", "value"]);
    for k in 0..3 {
        t.push(vec![Cell::from(k as usize), Cell::from(1.0 / (k as f64 + 3.0))]);
    }
    let csv = t.render(Format::Csv)?;
    print!("{csv}");
    let (kind, columns, rows) = parse_csv(&csv)?;
    println!("{kind}: {columns:?}, {} rows", rows.len());
    Ok(())
}
