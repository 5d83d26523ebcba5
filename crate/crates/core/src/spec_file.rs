//! JSON system description.
//!
//! ```json
//! { "a": 1,
//!   "channels": [ { "offset": 0, "re": [1.0] },
//!                 { "offset": 0, "re": [0.7071, 0.7071], "im": [0.0, 0.0] } ],
//!   "normalize": false }
//! ```
//!
//! A Gabor system replaces `channels` by `"gabor": { "window": {...}, "M": 4 }`.

use crate::error::{Error, Result};
use crate::seq::FiniteSeq;
use crate::sis::ShiftSystem;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    pub offset: i64,
    pub re: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaborSpec {
    pub window: ChannelSpec,
    #[serde(rename = "M")]
    pub m: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpecFile {
    pub a: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub channels: Vec<ChannelSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gabor: Option<GaborSpec>,
    #[serde(default)]
    pub normalize: bool,
}

impl ChannelSpec {
    pub fn to_seq(&self) -> Result<FiniteSeq> {
        let values = match &self.im {
            None => self.re.iter().map(|&r| Complex64::new(r, 0.0)).collect(),
            Some(im) if im.len() == self.re.len() => self
                .re
                .iter()
                .zip(im)
                .map(|(&r, &i)| Complex64::new(r, i))
                .collect(),
            Some(im) => {
                return Err(Error::InvalidInput(format!(
                    "channel at offset {}: re has {} entries but im has {}",
                    self.offset,
                    self.re.len(),
                    im.len()
                )))
            }
        };
        Ok(FiniteSeq::new(self.offset, values))
    }

    pub fn from_seq(x: &FiniteSeq) -> Self {
        let re = x.values().iter().map(|v| v.re).collect();
        let im = x
            .values()
            .iter()
            .any(|v| v.im != 0.0)
            .then(|| x.values().iter().map(|v| v.im).collect());
        ChannelSpec {
            offset: x.offset(),
            re,
            im,
        }
    }
}

impl SystemSpecFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("system spec: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    pub fn from_system(sys: &ShiftSystem) -> Self {
        match sys.gabor_info() {
            Some(info) => SystemSpecFile {
                a: sys.a(),
                channels: Vec::new(),
                gabor: Some(GaborSpec {
                    window: ChannelSpec::from_seq(&info.window),
                    m: info.channels,
                }),
                normalize: false,
            },
            None => SystemSpecFile {
                a: sys.a(),
                channels: sys.generators().iter().map(ChannelSpec::from_seq).collect(),
                gabor: None,
                normalize: false,
            },
        }
    }

    pub fn to_system(&self) -> Result<ShiftSystem> {
        let sys = match (&self.gabor, self.channels.is_empty()) {
            (Some(g), true) => ShiftSystem::gabor(g.window.to_seq()?, self.a, g.m)?,
            (None, false) => ShiftSystem::new(
                self.channels
                    .iter()
                    .map(ChannelSpec::to_seq)
                    .collect::<Result<_>>()?,
                self.a,
            )?,
            (Some(_), false) => {
                return Err(Error::InvalidInput(
                    "give either channels or gabor, not both".into(),
                ))
            }
            (None, true) => {
                return Err(Error::InvalidInput(
                    "no channels and no gabor window".into(),
                ))
            }
        };
        Ok(if self.normalize { sys.normalize() } else { sys })
    }
}

pub fn load_system(path: &Path) -> Result<ShiftSystem> {
    SystemSpecFile::load(path)?.to_system()
}
