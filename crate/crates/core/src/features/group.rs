use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// The ten feature families, each computed for all 18 electrodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FeatureGroup {
    ThetaRbp,
    AlphaRbp,
    BetaRbp,
    GammaRbp,
    Apv,
    Rgp,
    Sasi,
    Hfd,
    Lzc,
    Dfa,
}

impl FeatureGroup {
    pub const ALL: [FeatureGroup; 10] = [
        FeatureGroup::ThetaRbp,
        FeatureGroup::AlphaRbp,
        FeatureGroup::BetaRbp,
        FeatureGroup::GammaRbp,
        FeatureGroup::Apv,
        FeatureGroup::Rgp,
        FeatureGroup::Sasi,
        FeatureGroup::Hfd,
        FeatureGroup::Lzc,
        FeatureGroup::Dfa,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            FeatureGroup::ThetaRbp => "T_RBP",
            FeatureGroup::AlphaRbp => "A_RBP",
            FeatureGroup::BetaRbp => "B_RBP",
            FeatureGroup::GammaRbp => "G_RBP",
            FeatureGroup::Apv => "APV",
            FeatureGroup::Rgp => "RGP",
            FeatureGroup::Sasi => "SASI",
            FeatureGroup::Hfd => "HFD",
            FeatureGroup::Lzc => "LZC",
            FeatureGroup::Dfa => "DFA",
        }
    }

    /// Whether the group is computed on the decimated signal.
    pub fn is_nonlinear(self) -> bool {
        matches!(self, FeatureGroup::Hfd | FeatureGroup::Lzc | FeatureGroup::Dfa)
    }
}

impl fmt::Display for FeatureGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FeatureGroup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        FeatureGroup::ALL
            .iter()
            .copied()
            .find(|g| g.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Schema(format!("unknown feature group {s}")))
    }
}

impl Serialize for FeatureGroup {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for FeatureGroup {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}
