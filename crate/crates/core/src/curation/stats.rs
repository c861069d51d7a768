use std::collections::HashMap;

use serde::Serialize;

use crate::manifest::{Language, SampleRecord, Scenario};

/// One (scenario, language, source) group.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatsRow {
    pub scenario: Scenario,
    pub description: &'static str,
    pub dataset: String,
    pub language: Language,
    pub count: usize,
    /// Count in thousands.
    pub questions_k: f64,
}

/// Groups records by (scenario, language, source). Rows appear in the order
/// their first record does.
pub fn stats(records: &[SampleRecord]) -> Vec<StatsRow> {
    let mut index: HashMap<(Scenario, Language, &str), usize> = HashMap::new();
    let mut rows: Vec<StatsRow> = Vec::new();
    for r in records {
        let source = r.source.as_str();
        let key = (r.scenario, r.language, source);
        let i = *index.entry(key).or_insert_with(|| {
            rows.push(StatsRow {
                scenario: r.scenario,
                description: r.scenario.description(),
                dataset: source.to_string(),
                language: r.language,
                count: 0,
                questions_k: 0.0,
            });
            rows.len() - 1
        });
        rows[i].count += 1;
    }
    for row in &mut rows {
        row.questions_k = row.count as f64 / 1000.0;
    }
    rows
}

/// Plain-text table with a header row, columns padded to their widest cell.
pub fn render_table(rows: &[StatsRow]) -> String {
    let header = ["Data Scenario", "Description", "Dataset", "Questions (K)", "Language"];
    let body: Vec<[String; 5]> = rows
        .iter()
        .map(|r| {
            [
                r.scenario.as_str().to_string(),
                r.description.to_string(),
                if r.dataset.is_empty() { "-".to_string() } else { r.dataset.clone() },
                format!("{:.3}", r.questions_k),
                r.language.as_str().to_string(),
            ]
        })
        .collect();
    let mut widths = header.map(|h| h.chars().count());
    for cells in &body {
        for (w, c) in widths.iter_mut().zip(cells) {
            *w = (*w).max(c.chars().count());
        }
    }
    let mut out = String::new();
    let mut line = |cells: &[&str]| {
        let padded: Vec<String> = cells
            .iter()
            .zip(widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        out.push_str(padded.join(" | ").trim_end());
        out.push('\n');
    };
    line(&header);
    for cells in &body {
        let refs: Vec<&str> = cells.iter().map(String::as_str).collect();
        line(&refs);
    }
    out
}
