use std::collections::HashMap;
use std::io::{Read, Write};

use crate::channel::{ChannelId, N_CHANNELS};
use crate::error::{Error, Result};
use crate::signal::Label;

use super::FeatureGroup;

/// Columns per subject: 10 groups × 18 electrodes.
pub const N_FEATURES: usize = 10 * N_CHANNELS;

/// Subjects × (group, channel) feature values with a validity mask.
/// Column `group.index() * 18 + channel.index()`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    subjects: Vec<String>,
    labels: Vec<Label>,
    values: Vec<f64>,
    valid: Vec<bool>,
}

pub(crate) fn column(group: FeatureGroup, channel: ChannelId) -> usize {
    group.index() * N_CHANNELS + channel.index()
}

impl FeatureMatrix {
    /// A matrix with every cell masked.
    pub fn empty(subjects: Vec<String>, labels: Vec<Label>) -> Result<Self> {
        if subjects.len() != labels.len() {
            return Err(Error::Parameter("one label per subject required".into()));
        }
        let n = subjects.len() * N_FEATURES;
        Ok(FeatureMatrix {
            subjects,
            labels,
            values: vec![f64::NAN; n],
            valid: vec![false; n],
        })
    }

    /// Fills every cell from `f(row, group, channel)`; `None` masks the cell.
    pub fn from_fn<F>(subjects: Vec<String>, labels: Vec<Label>, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, FeatureGroup, ChannelId) -> Option<f64>,
    {
        let mut m = Self::empty(subjects, labels)?;
        for row in 0..m.n_subjects() {
            for g in FeatureGroup::ALL {
                for c in ChannelId::ALL {
                    m.set(row, g, c, f(row, g, c));
                }
            }
        }
        Ok(m)
    }

    pub fn n_subjects(&self) -> usize {
        self.subjects.len()
    }

    pub fn subjects(&self) -> &[String] {
        &self.subjects
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    /// Stores a value; `None` or a non-finite value masks the cell.
    pub fn set(&mut self, row: usize, group: FeatureGroup, channel: ChannelId, value: Option<f64>) {
        let i = row * N_FEATURES + column(group, channel);
        match value {
            Some(v) if v.is_finite() => {
                self.values[i] = v;
                self.valid[i] = true;
            }
            _ => {
                self.values[i] = f64::NAN;
                self.valid[i] = false;
            }
        }
    }

    pub fn get(&self, row: usize, group: FeatureGroup, channel: ChannelId) -> Option<f64> {
        let i = row * N_FEATURES + column(group, channel);
        self.valid[i].then_some(self.values[i])
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.values[row * N_FEATURES..(row + 1) * N_FEATURES]
    }

    pub fn row_valid(&self, row: usize) -> &[bool] {
        &self.valid[row * N_FEATURES..(row + 1) * N_FEATURES]
    }

    pub fn masked_count(&self) -> usize {
        self.valid.iter().filter(|v| !**v).count()
    }

    /// Rows with every cell of `group` valid.
    pub fn complete_rows(&self, group: FeatureGroup) -> Vec<usize> {
        let cols = group.index() * N_CHANNELS..(group.index() + 1) * N_CHANNELS;
        (0..self.n_subjects())
            .filter(|&r| self.row_valid(r)[cols.clone()].iter().all(|v| *v))
            .collect()
    }

    /// A new matrix holding only `rows`, in the given order.
    pub fn subset(&self, rows: &[usize]) -> FeatureMatrix {
        let mut out = FeatureMatrix {
            subjects: Vec::with_capacity(rows.len()),
            labels: Vec::with_capacity(rows.len()),
            values: Vec::with_capacity(rows.len() * N_FEATURES),
            valid: Vec::with_capacity(rows.len() * N_FEATURES),
        };
        for &r in rows {
            out.subjects.push(self.subjects[r].clone());
            out.labels.push(self.labels[r]);
            out.values.extend_from_slice(self.row(r));
            out.valid.extend_from_slice(self.row_valid(r));
        }
        out
    }

    /// Long-format CSV: `subject,label,group,channel,value,valid`, one line
    /// per cell. Masked cells carry an empty value.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["subject", "label", "group", "channel", "value", "valid"])?;
        for row in 0..self.n_subjects() {
            let label = self.labels[row].sign().to_string();
            for g in FeatureGroup::ALL {
                for c in ChannelId::ALL {
                    let v = self.get(row, g, c);
                    let value = v.map(|v| v.to_string()).unwrap_or_default();
                    wtr.write_record([
                        self.subjects[row].as_str(),
                        &label,
                        g.name(),
                        c.name(),
                        &value,
                        if v.is_some() { "true" } else { "false" },
                    ])?;
                }
            }
        }
        wtr.flush()?;
        Ok(())
    }

    /// Reads the long format written by [`FeatureMatrix::write_csv`]. Cells
    /// absent from the file stay masked. Subjects keep first-seen order.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
        let headers = rdr.headers()?.clone();
        let expected = ["subject", "label", "group", "channel", "value", "valid"];
        if headers.iter().collect::<Vec<_>>() != expected {
            return Err(Error::Schema(format!("feature CSV header must be {}", expected.join(","))));
        }
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut subjects = Vec::new();
        let mut labels = Vec::new();
        let mut cells = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let bad = |what: &str| Error::Schema(format!("line {}: bad {what}", line + 2));
            let subject = rec[0].to_string();
            let label = rec[1]
                .parse::<i64>()
                .ok()
                .and_then(Label::from_sign)
                .ok_or_else(|| bad("label"))?;
            let row = match index.get(&subject) {
                Some(&r) => {
                    if labels[r] != label {
                        return Err(bad("label (inconsistent for subject)"));
                    }
                    r
                }
                None => {
                    index.insert(subject.clone(), subjects.len());
                    subjects.push(subject);
                    labels.push(label);
                    subjects.len() - 1
                }
            };
            let group: FeatureGroup = rec[2].parse()?;
            let channel: ChannelId = rec[3].parse()?;
            let valid = match &rec[5] {
                "true" | "1" => true,
                "false" | "0" => false,
                _ => return Err(bad("valid flag")),
            };
            let value = if valid { Some(rec[4].parse::<f64>().map_err(|_| bad("value"))?) } else { None };
            cells.push((row, group, channel, value));
        }
        let mut m = FeatureMatrix::empty(subjects, labels)?;
        for (row, g, c, v) in cells {
            m.set(row, g, c, v);
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> FeatureMatrix {
        FeatureMatrix::from_fn(
            vec!["a".into(), "b".into()],
            vec![Label::Healthy, Label::Depressed],
            |r, g, c| {
                if r == 1 && g == FeatureGroup::Hfd && c == ChannelId::O1 {
                    None
                } else {
                    Some(r as f64 * 1000.0 + g.index() as f64 * 18.0 + c.index() as f64 + 0.125)
                }
            },
        )
        .unwrap()
    }

    #[test]
    fn csv_round_trip_keeps_mask() {
        let m = toy();
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("subject,label,group,channel,value,valid\n"));
        assert!(text.contains("b,1,HFD,O1,,false"));
        let back = FeatureMatrix::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.masked_count(), 1);
        assert_eq!(back.get(0, FeatureGroup::Lzc, ChannelId::Fz), m.get(0, FeatureGroup::Lzc, ChannelId::Fz));
        assert_eq!(back.subjects(), m.subjects());
    }

    #[test]
    fn complete_rows_and_subset() {
        let m = toy();
        assert_eq!(m.complete_rows(FeatureGroup::Hfd), vec![0]);
        assert_eq!(m.complete_rows(FeatureGroup::Dfa), vec![0, 1]);
        let s = m.subset(&[1]);
        assert_eq!(s.subjects(), &["b".to_string()]);
        assert_eq!(s.get(0, FeatureGroup::Hfd, ChannelId::O1), None);
    }

    #[test]
    fn non_finite_values_are_masked() {
        let mut m = toy();
        m.set(0, FeatureGroup::Apv, ChannelId::F3, Some(f64::NAN));
        assert_eq!(m.get(0, FeatureGroup::Apv, ChannelId::F3), None);
    }
}
