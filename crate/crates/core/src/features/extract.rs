use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelId, N_CHANNELS};
use crate::error::{Error, Result};
use crate::nonlinear::{binarize, dfa, higuchi_fd, lzc, DfaConfig, HfdConfig, LzcConfig};
use crate::signal::{bandpass_with_order, downsample, extract_segments, Recording, DEFAULT_FILTER_ORDER};
use crate::spectral::{
    apv, find_alpha_peak, relative_band_powers, rgp, sasi, welch_psd, AlphaPowerSeries, Spectrum, WelchParams,
};

use super::{FeatureGroup, FeatureMatrix};

/// Parameters of the per-subject feature pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureConfig {
    pub band: (f64, f64),
    pub alpha_band: (f64, f64),
    pub filter_order: usize,
    pub max_segments: usize,
    /// Decimation applied before the nonlinear measures.
    pub downsample_factor: u32,
    pub welch: WelchParams,
    pub hfd: HfdConfig,
    pub lzc: LzcConfig,
    pub dfa: DfaConfig,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            band: (3.0, 48.0),
            alpha_band: (8.0, 12.0),
            filter_order: DEFAULT_FILTER_ORDER,
            max_segments: 30,
            downsample_factor: 2,
            welch: WelchParams::default(),
            hfd: HfdConfig::default(),
            lzc: LzcConfig::default(),
            dfa: DfaConfig::default(),
        }
    }
}

/// All 180 feature values for one recording, indexed `[group][channel]`.
/// A cell is `None` when its measure failed or was flagged degenerate.
pub fn subject_features(rec: &Recording, cfg: &FeatureConfig) -> Result<Vec<[Option<f64>; N_CHANNELS]>> {
    if rec.segment_marks().is_empty() {
        return Err(Error::Parameter(format!("recording {} has no segment marks", rec.subject_id)));
    }
    let mut out = vec![[None; N_CHANNELS]; FeatureGroup::ALL.len()];
    let banded = bandpass_with_order(rec, cfg.band.0, cfg.band.1, cfg.filter_order)?;

    let spectra: Vec<Spectrum> = ChannelId::ALL
        .par_iter()
        .map(|&c| welch_psd(&extract_segments(&banded, c, cfg.max_segments), &cfg.welch))
        .collect::<Result<_>>()?;
    let profile = find_alpha_peak(&Spectrum::mean(&spectra)?).ok();
    for (c, spec) in spectra.iter().enumerate() {
        if let Ok(r) = relative_band_powers(spec) {
            out[FeatureGroup::ThetaRbp.index()][c] = Some(r.theta);
            out[FeatureGroup::AlphaRbp.index()][c] = Some(r.alpha);
            out[FeatureGroup::BetaRbp.index()][c] = Some(r.beta);
            out[FeatureGroup::GammaRbp.index()][c] = Some(r.gamma);
        }
        out[FeatureGroup::Rgp.index()][c] = rgp(spec).ok();
        out[FeatureGroup::Sasi.index()][c] = profile.as_ref().and_then(|p| sasi(spec, p).ok());
    }

    let alpha = bandpass_with_order(&banded, cfg.alpha_band.0, cfg.alpha_band.1, cfg.filter_order)?;
    for c in ChannelId::ALL {
        let segs = extract_segments(&alpha, c, cfg.max_segments);
        out[FeatureGroup::Apv.index()][c.index()] =
            AlphaPowerSeries::from_segments(&segs).and_then(|s| apv(&s)).ok();
    }

    let low = downsample(&banded, cfg.downsample_factor)?;
    let nonlinear: Vec<[Option<f64>; 3]> = ChannelId::ALL
        .par_iter()
        .map(|&c| {
            let segs = extract_segments(&low, c, cfg.max_segments);
            let mut acc = [MeanAcc::default(); 3];
            for s in &segs {
                if let Ok(h) = higuchi_fd(&s.samples, &cfg.hfd) {
                    if !h.flat {
                        acc[0].push(h.dimension);
                    }
                }
                if let Ok(l) = lzc(&binarize(&s.samples, &cfg.lzc), &cfg.lzc) {
                    acc[1].push(l);
                }
                if let Ok(d) = dfa(&s.samples, &cfg.dfa) {
                    acc[2].push(d.alpha);
                }
            }
            acc.map(|a| a.mean())
        })
        .collect();
    for (c, vals) in nonlinear.into_iter().enumerate() {
        out[FeatureGroup::Hfd.index()][c] = vals[0];
        out[FeatureGroup::Lzc.index()][c] = vals[1];
        out[FeatureGroup::Dfa.index()][c] = vals[2];
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, Default)]
struct MeanAcc {
    sum: f64,
    n: usize,
}

impl MeanAcc {
    fn push(&mut self, v: f64) {
        if v.is_finite() {
            self.sum += v;
            self.n += 1;
        }
    }

    fn mean(self) -> Option<f64> {
        (self.n > 0).then(|| self.sum / self.n as f64)
    }
}

/// Runs [`subject_features`] over every recording. Every recording must be
/// labelled.
pub fn build_feature_matrix(recs: &[Recording], cfg: &FeatureConfig) -> Result<FeatureMatrix> {
    let mut labels = Vec::with_capacity(recs.len());
    for r in recs {
        labels.push(
            r.label
                .ok_or_else(|| Error::Schema(format!("recording {} has no label", r.subject_id)))?,
        );
    }
    let rows: Vec<_> = recs.par_iter().map(|r| subject_features(r, cfg)).collect::<Result<_>>()?;
    let subjects = recs.iter().map(|r| r.subject_id.clone()).collect();
    let mut m = FeatureMatrix::empty(subjects, labels)?;
    for (i, row) in rows.iter().enumerate() {
        for g in FeatureGroup::ALL {
            for c in ChannelId::ALL {
                m.set(i, g, c, row[g.index()][c.index()]);
            }
        }
    }
    Ok(m)
}
