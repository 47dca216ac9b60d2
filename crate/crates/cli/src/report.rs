use std::io::Write;

use anyhow::Result;
use assignmine::cohort::Cohort;
use assignmine::discretize::SequenceSet;

pub const BANDS: [&str; 5] = ["lt60", "60_69", "70_79", "80_89", "ge90"];

pub fn grade_band(score: f64) -> usize {
    match score {
        s if s < 60.0 => 0,
        s if s < 70.0 => 1,
        s if s < 80.0 => 2,
        s if s < 90.0 => 3,
        _ => 4,
    }
}

/// Most frequent Order symbol; ties go to the later (higher) symbol.
pub fn modal_order(symbols: &[i32]) -> Option<i32> {
    (1..=3)
        .map(|s| (symbols.iter().filter(|&&v| v == s).count(), s))
        .filter(|&(c, _)| c > 0)
        .max()
        .map(|(_, s)| s)
}

/// Students per (modal order symbol, grade band); index 0 = symbol 1.
pub fn order_vs_grade(cohort: &Cohort, sequences: &SequenceSet) -> [[usize; 5]; 3] {
    let mut table = [[0; 5]; 3];
    for s in sequences.students() {
        let (Some(sym), Some(score)) = (modal_order(s.order.symbols()), cohort.score(&s.student_id))
        else {
            continue;
        };
        table[sym as usize - 1][grade_band(score)] += 1;
    }
    table
}

/// `order_symbol,lt60,...,ge90`, one row per symbol with at least one student.
pub fn write_order_vs_grade<W: Write>(mut out: W, table: &[[usize; 5]; 3]) -> Result<()> {
    writeln!(out, "order_symbol,{}", BANDS.join(","))?;
    for (i, row) in table.iter().enumerate() {
        if row.iter().all(|&c| c == 0) {
            continue;
        }
        let cells: Vec<String> = row.iter().map(usize::to_string).collect();
        writeln!(out, "{},{}", i + 1, cells.join(","))?;
    }
    Ok(())
}
