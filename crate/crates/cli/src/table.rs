use phonoparse::EvalReport;

/// Segment accuracy in percent, one row per task/metric and one column per context.
pub fn accuracy_table(reports: &[EvalReport], contexts: &[usize]) -> String {
    let mut rows: Vec<(String, Vec<Option<f64>>)> = Vec::new();
    for r in reports {
        let label = if r.books_task == r.task {
            format!("{} {}", r.task, r.metric)
        } else {
            format!("{} ({} books) {}", r.task, r.books_task, r.metric)
        };
        let col = contexts
            .iter()
            .position(|&c| c == r.context)
            .expect("swept context");
        let idx = match rows.iter().position(|(l, _)| *l == label) {
            Some(i) => i,
            None => {
                rows.push((label, vec![None; contexts.len()]));
                rows.len() - 1
            }
        };
        rows[idx].1[col] = Some(r.segment_accuracy_mean * 100.0);
    }

    let width = rows.iter().map(|(l, _)| l.len()).max().unwrap_or(0).max(4);
    let mut out = format!("{:<width$}", "task");
    for c in contexts {
        out.push_str(&format!(" {:>7}", format!("ctx {c}")));
    }
    out.push('\n');
    for (label, cells) in rows {
        out.push_str(&format!("{label:<width$}"));
        for cell in cells {
            match cell {
                Some(v) => out.push_str(&format!(" {v:>7.1}")),
                None => out.push_str(&format!(" {:>7}", "-")),
            }
        }
        out.push('\n');
    }
    out
}
