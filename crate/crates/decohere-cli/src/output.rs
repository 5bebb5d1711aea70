//! CSV emission: header with units, scientific-notation rows at the
//! configured precision, then `#` comment lines with the run parameters, any
//! scenario notes, and the convergence summary. Output is byte-identical for
//! identical inputs (no timestamps, fixed formatting).

use std::io::{self, Write};

use decohere_core::scenarios::ScenarioTable;

fn format_sci(value: f64, significant_digits: usize) -> String {
    format!("{:.*e}", significant_digits.saturating_sub(1), value)
}

/// Render `table` to `sink`; returns the number of bytes written. An empty
/// table produces the header line only.
pub fn emit_csv<W: Write>(
    table: &ScenarioTable,
    params_line: Option<&str>,
    precision: usize,
    sink: &mut W,
) -> io::Result<u64> {
    let mut out = String::new();
    let header: Vec<String> = table
        .columns
        .iter()
        .map(|c| format!("{} ({})", c.label, c.unit))
        .collect();
    out.push_str(&header.join(","));
    out.push('\n');

    if !table.rows.is_empty() {
        for row in &table.rows {
            let cells: Vec<String> = row.iter().map(|&v| format_sci(v, precision)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        if let Some(line) = params_line {
            out.push_str(line);
            out.push('\n');
        }
        for note in &table.notes {
            out.push_str("# note: ");
            out.push_str(note);
            out.push('\n');
        }
        let flagged = table.flagged_cells();
        if flagged.is_empty() {
            out.push_str("# converged: all\n");
        } else {
            let cells: Vec<String> =
                flagged.iter().map(|(r, c)| format!("{r}:{c}")).collect();
            out.push_str("# converged: flagged ");
            out.push_str(&cells.join(" "));
            out.push('\n');
        }
    }

    sink.write_all(out.as_bytes())?;
    Ok(out.len() as u64)
}
