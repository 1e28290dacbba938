use std::collections::HashMap;
use std::fmt::Write as _;
use std::str::FromStr;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelId;
use crate::classify::ClassifierKind;
use crate::ensemble::VoteMode;
use crate::error::{param, Error, Result};
use crate::features::FeatureGroup;

use super::cv::CvReport;
use super::pipeline::{SelectionMethod, Target};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layout {
    /// Per-group accuracy without selection.
    Table1,
    /// Per-group accuracy with F-test selection.
    Table2,
    /// Per-group accuracy with ReliefF selection.
    Table3,
    /// Channels chosen per group by each ranking.
    Table4,
    /// Concatenated features per selection method.
    Table5,
    /// Ensembles per selection method and vote mode.
    Table6,
}

impl FromStr for Layout {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "table1" | "1" => Ok(Layout::Table1),
            "table2" | "2" => Ok(Layout::Table2),
            "table3" | "3" => Ok(Layout::Table3),
            "table4" | "4" => Ok(Layout::Table4),
            "table5" | "5" => Ok(Layout::Table5),
            "table6" | "6" => Ok(Layout::Table6),
            other => Err(Error::Parameter(format!("unknown layout {other}"))),
        }
    }
}

/// A rendered grid. Missing cells are empty strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub title: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub warnings: Vec<String>,
}

impl Table {
    pub fn to_csv(&self) -> Result<String> {
        let mut wtr = csv::Writer::from_writer(Vec::new());
        wtr.write_record(&self.header)?;
        for r in &self.rows {
            wtr.write_record(r)?;
        }
        let bytes = wtr.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8_lossy(&bytes).into_owned())
    }

    /// Columns padded to their widest entry.
    pub fn to_text(&self) -> String {
        let mut widths: Vec<usize> = self.header.iter().map(|h| h.len()).collect();
        for r in &self.rows {
            for (w, c) in widths.iter_mut().zip(r) {
                *w = (*w).max(c.len());
            }
        }
        let line = |cells: &[String]| {
            let mut s = String::new();
            for (i, (c, w)) in cells.iter().zip(&widths).enumerate() {
                if i > 0 {
                    s.push_str("  ");
                }
                let _ = write!(s, "{c:<w$}");
            }
            s.trim_end().to_string()
        };
        let mut out = format!("{}\n{}\n", self.title, line(&self.header));
        out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * widths.len().saturating_sub(1)));
        out.push('\n');
        for r in &self.rows {
            out.push_str(&line(r));
            out.push('\n');
        }
        out
    }
}

fn classifier_header(first: &str) -> Vec<String> {
    let mut h = vec![first.to_string()];
    h.extend(["rbf SVM", "LDA", "naive Bayes", "kNN", "D3"].map(String::from));
    h
}

fn method_label(m: SelectionMethod) -> &'static str {
    match m {
        SelectionMethod::None => "All",
        SelectionMethod::Ftest => "F-test",
        SelectionMethod::Relieff => "ReliefF",
    }
}

fn mode_label(m: VoteMode) -> &'static str {
    match m {
        VoteMode::Majority => "Majority",
        VoteMode::Weighted => "Weighted",
        VoteMode::Adaboost => "Adaboost",
    }
}

type Grid = HashMap<(SelectionMethod, Target, ClassifierKind), f64>;

fn accuracy_row(grid: &Grid, label: String, method: SelectionMethod, target: Target, warnings: &mut Vec<String>) -> Vec<String> {
    let mut row = vec![label.clone()];
    for k in ClassifierKind::ALL {
        match grid.get(&(method, target, k)) {
            Some(v) => row.push(format!("{:.2}", 100.0 * v)),
            None => {
                warnings.push(format!("missing cell {label} / {k}"));
                row.push(String::new());
            }
        }
    }
    row
}

fn group_table(grid: &Grid, method: SelectionMethod, title: &str, warnings: &mut Vec<String>) -> (String, Vec<String>, Vec<Vec<String>>) {
    let rows = FeatureGroup::ALL
        .into_iter()
        .filter(|&g| ClassifierKind::ALL.iter().any(|&k| grid.contains_key(&(method, Target::Group(g), k))))
        .map(|g| accuracy_row(grid, g.name().to_string(), method, Target::Group(g), warnings))
        .collect();
    (title.to_string(), classifier_header("Feature group"), rows)
}

/// Channels selected in at least half of all folds, most frequent first.
fn frequent_channels(reports: &[CvReport], method: SelectionMethod, group: FeatureGroup) -> Option<String> {
    reports
        .iter()
        .filter_map(|r| r.meta.as_ref())
        .filter(|m| m.experiment.selection.method == method)
        .flat_map(|m| m.channel_frequency.iter())
        .find(|f| f.group == group)
        .map(|f| {
            let mut picked: Vec<(ChannelId, f64)> = f.frequency.iter().copied().filter(|(_, p)| *p >= 0.5).collect();
            picked.sort_by(|a, b| b.1.total_cmp(&a.1));
            picked.iter().map(|(c, _)| c.name()).collect::<Vec<_>>().join(" ")
        })
}

/// Lays out accuracies from `reports` as one of the result tables.
pub fn report_tables(reports: &[CvReport], layout: Layout) -> Result<Table> {
    if reports.is_empty() {
        return param("no reports to tabulate");
    }
    let mut grid = Grid::new();
    for r in reports {
        for c in &r.cells {
            grid.insert((c.selection, c.target, c.classifier), c.mean_acc);
        }
    }
    let mut warnings = Vec::new();
    let (title, header, rows) = match layout {
        Layout::Table1 => group_table(&grid, SelectionMethod::None, "Classifier accuracy (%)", &mut warnings),
        Layout::Table2 => group_table(&grid, SelectionMethod::Ftest, "Classifier accuracy with F-test selection (%)", &mut warnings),
        Layout::Table3 => group_table(&grid, SelectionMethod::Relieff, "Classifier accuracy with ReliefF selection (%)", &mut warnings),
        Layout::Table4 => {
            let rows = FeatureGroup::ALL
                .into_iter()
                .map(|g| {
                    let mut row = vec![g.name().to_string()];
                    for m in [SelectionMethod::Ftest, SelectionMethod::Relieff] {
                        row.push(frequent_channels(reports, m, g).unwrap_or_else(|| {
                            warnings.push(format!("no {m} selection recorded for {g}"));
                            String::new()
                        }));
                    }
                    row
                })
                .collect();
            let header = ["Feature group", "F-test", "ReliefF"].map(String::from).to_vec();
            ("Selected channels".to_string(), header, rows)
        }
        Layout::Table5 => {
            let rows = SelectionMethod::ALL
                .into_iter()
                .map(|m| accuracy_row(&grid, format!("{} features", method_label(m)), m, Target::Concatenated, &mut warnings))
                .collect();
            ("Concatenated feature classifier accuracy (%)".to_string(), classifier_header("Features"), rows)
        }
        Layout::Table6 => {
            let rows = VoteMode::ALL
                .into_iter()
                .flat_map(|mode| SelectionMethod::ALL.into_iter().map(move |m| (m, mode)))
                .map(|(m, mode)| {
                    let label = format!("{} + {}", method_label(m), mode_label(mode));
                    accuracy_row(&grid, label, m, Target::Ensemble(mode), &mut warnings)
                })
                .collect();
            ("Ensemble classifier accuracy (%)".to_string(), classifier_header("Ensemble"), rows)
        }
    };
    for w in &warnings {
        warn!("{w}");
    }
    Ok(Table { title, header, rows, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::cv::CellReport;

    fn report(method: SelectionMethod, targets: &[Target]) -> CvReport {
        let cells = targets
            .iter()
            .flat_map(|&t| {
                ClassifierKind::ALL.into_iter().map(move |k| CellReport {
                    selection: method,
                    target: t,
                    classifier: k,
                    mean_acc: 0.5,
                    std_acc: 0.1,
                    reps: 3,
                    accuracies: vec![],
                })
            })
            .collect();
        CvReport { cells, meta: None }
    }

    #[test]
    fn table1_shape() {
        let groups: Vec<Target> = FeatureGroup::ALL.iter().filter(|g| **g != FeatureGroup::Rgp).map(|&g| Target::Group(g)).collect();
        let t = report_tables(&[report(SelectionMethod::None, &groups)], Layout::Table1).unwrap();
        assert_eq!(t.rows.len(), 9);
        assert_eq!(t.header.len(), 6);
        assert!(t.warnings.is_empty());
        assert_eq!(t.rows[0][1], "50.00");
        assert!(t.to_text().contains("T_RBP"));
    }

    #[test]
    fn table6_shape_and_missing_cells() {
        let reps: Vec<CvReport> = SelectionMethod::ALL
            .iter()
            .map(|&m| report(m, &VoteMode::ALL.map(Target::Ensemble)))
            .collect();
        let t = report_tables(&reps, Layout::Table6).unwrap();
        assert_eq!(t.rows.len(), 9);
        assert!(t.warnings.is_empty());
        assert_eq!(t.rows[2][0], "ReliefF + Majority");
        let partial = report_tables(&reps[..1], Layout::Table6).unwrap();
        assert!(!partial.warnings.is_empty());
        assert_eq!(partial.rows[1][1], "");
        assert!(partial.to_csv().unwrap().starts_with("Ensemble,rbf SVM"));
    }

    #[test]
    fn empty_input_rejected() {
        assert!(report_tables(&[], Layout::Table1).is_err());
    }
}
