//! The 18 scalp electrodes of the 10–20 montage used throughout the toolkit.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// Number of electrodes in every recording and every feature group.
pub const N_CHANNELS: usize = 18;

/// A 10–20 electrode label. The declaration order is the canonical column
/// order for every matrix layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ChannelId {
    Fp1,
    Fp2,
    F7,
    F3,
    Fz,
    F4,
    F8,
    T3,
    C3,
    C4,
    T4,
    T5,
    P3,
    Pz,
    P4,
    T6,
    O1,
    O2,
}

impl ChannelId {
    pub const ALL: [ChannelId; N_CHANNELS] = [
        ChannelId::Fp1,
        ChannelId::Fp2,
        ChannelId::F7,
        ChannelId::F3,
        ChannelId::Fz,
        ChannelId::F4,
        ChannelId::F8,
        ChannelId::T3,
        ChannelId::C3,
        ChannelId::C4,
        ChannelId::T4,
        ChannelId::T5,
        ChannelId::P3,
        ChannelId::Pz,
        ChannelId::P4,
        ChannelId::T6,
        ChannelId::O1,
        ChannelId::O2,
    ];

    /// Position in [`ChannelId::ALL`].
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    /// Upper-case label as written in recording headers (`FP1`, `PZ`, ...).
    pub fn name(self) -> &'static str {
        const NAMES: [&str; N_CHANNELS] = [
            "FP1", "FP2", "F7", "F3", "FZ", "F4", "F8", "T3", "C3", "C4", "T4", "T5", "P3", "PZ",
            "P4", "T6", "O1", "O2",
        ];
        NAMES[self.index()]
    }
}

impl fmt::Display for ChannelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ChannelId {
    type Err = Error;

    /// Labels are matched case-insensitively after trimming.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let wanted = s.trim().to_ascii_uppercase();
        ChannelId::ALL
            .iter()
            .copied()
            .find(|c| c.name() == wanted)
            .ok_or_else(|| Error::Schema(format!("unknown channel label {}", s.trim())))
    }
}

impl Serialize for ChannelId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for ChannelId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
