use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bell::{MeasurementSetting, SettingsQuad};
use crate::error::{Error, Result};

/// Number of coordinates in a full parameter vector.
pub const PARAM_COUNT: usize = 12;

/// Coordinate layout of a parameter vector.
///
/// `0..4`: real parts of α, α′, β, β′; `4..8`: imaginary parts in the same
/// order; `8..12`: ln u, ln u′, ln v, ln v′.
pub mod layout {
    pub const RE_ALPHA: usize = 0;
    pub const RE_ALPHA_PRIME: usize = 1;
    pub const RE_BETA: usize = 2;
    pub const RE_BETA_PRIME: usize = 3;
    pub const IM_OFFSET: usize = 4;
    pub const LN_U: usize = 8;
    pub const LN_U_PRIME: usize = 9;
    pub const LN_V: usize = 10;
    pub const LN_V_PRIME: usize = 11;
}

pub type FreeMask = [bool; PARAM_COUNT];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeTag {
    /// All four compressions and displacements free.
    #[serde(rename = "full")]
    FullDispSqueeze,
    /// Displacements free, no squeezing.
    DisplacementOnly,
    /// One nonzero displacement per party: α = β = 0, α′ and β′ free.
    #[serde(rename = "bw")]
    BWDisplacement,
    /// Compressions free, no displacements.
    SqueezeOnly,
    /// One compression per party: u = v = 1, u′ and v′ free.
    SingleSqueeze,
}

impl SchemeTag {
    pub const ALL: [SchemeTag; 5] = [
        SchemeTag::FullDispSqueeze,
        SchemeTag::DisplacementOnly,
        SchemeTag::BWDisplacement,
        SchemeTag::SqueezeOnly,
        SchemeTag::SingleSqueeze,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchemeTag::FullDispSqueeze => "full",
            SchemeTag::DisplacementOnly => "displacement_only",
            SchemeTag::BWDisplacement => "bw",
            SchemeTag::SqueezeOnly => "squeeze_only",
            SchemeTag::SingleSqueeze => "single_squeeze",
        }
    }

    fn real_mask(self) -> FreeMask {
        use layout::*;
        let mut mask = [false; PARAM_COUNT];
        let free: &[usize] = match self {
            SchemeTag::FullDispSqueeze => &[
                RE_ALPHA, RE_ALPHA_PRIME, RE_BETA, RE_BETA_PRIME, LN_U, LN_U_PRIME, LN_V, LN_V_PRIME,
            ],
            SchemeTag::DisplacementOnly => &[RE_ALPHA, RE_ALPHA_PRIME, RE_BETA, RE_BETA_PRIME],
            SchemeTag::BWDisplacement => &[RE_ALPHA_PRIME, RE_BETA_PRIME],
            SchemeTag::SqueezeOnly => &[LN_U, LN_U_PRIME, LN_V, LN_V_PRIME],
            SchemeTag::SingleSqueeze => &[LN_U_PRIME, LN_V_PRIME],
        };
        for &i in free {
            mask[i] = true;
        }
        mask
    }
}

impl fmt::Display for SchemeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeTag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        SchemeTag::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown scheme '{s}'")))
    }
}

/// A maximization scheme: which coordinates of the parameter vector are
/// free. Fixed coordinates are always zero (no displacement, `u = 1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scheme {
    pub tag: SchemeTag,
    pub complex_displacements: bool,
    custom_mask: Option<FreeMask>,
}

impl Scheme {
    pub fn new(tag: SchemeTag) -> Self {
        Self { tag, complex_displacements: false, custom_mask: None }
    }

    /// Also free the imaginary part of every free displacement.
    pub fn with_complex_displacements(mut self) -> Self {
        self.complex_displacements = true;
        self
    }

    /// Restrict the tag's free set further. The mask may only fix
    /// coordinates the tag leaves free.
    pub fn with_mask(mut self, mask: FreeMask) -> Result<Self> {
        let base = self.tag_mask();
        if let Some(i) = (0..PARAM_COUNT).find(|&i| mask[i] && !base[i]) {
            return Err(Error::InvalidParameter(format!(
                "custom mask frees coordinate {i}, which scheme '{}' fixes",
                self.tag
            )));
        }
        self.custom_mask = Some(mask);
        Ok(self)
    }

    fn tag_mask(&self) -> FreeMask {
        let mut mask = self.tag.real_mask();
        if self.complex_displacements {
            for i in 0..4 {
                if mask[i] {
                    mask[i + layout::IM_OFFSET] = true;
                }
            }
        }
        mask
    }

    pub fn mask(&self) -> FreeMask {
        self.custom_mask.unwrap_or_else(|| self.tag_mask())
    }

    pub fn free_indices(&self) -> Vec<usize> {
        let mask = self.mask();
        (0..PARAM_COUNT).filter(|&i| mask[i]).collect()
    }

    /// Whether `q` has every fixed coordinate at its fixed value exactly.
    pub fn admits(&self, q: &SettingsQuad) -> bool {
        let params = params_from_settings(q);
        let mask = self.mask();
        (0..PARAM_COUNT).all(|i| mask[i] || params[i] == 0.0)
    }
}

impl From<SchemeTag> for Scheme {
    fn from(tag: SchemeTag) -> Self {
        Scheme::new(tag)
    }
}

pub fn settings_from_params(p: &[f64; PARAM_COUNT]) -> SettingsQuad {
    use layout::*;
    let setting = |re: usize, ln: usize| MeasurementSetting {
        u: p[ln].exp(),
        alpha: Complex64::new(p[re], p[re + IM_OFFSET]),
    };
    SettingsQuad {
        a: setting(RE_ALPHA, LN_U),
        a_prime: setting(RE_ALPHA_PRIME, LN_U_PRIME),
        b: setting(RE_BETA, LN_V),
        b_prime: setting(RE_BETA_PRIME, LN_V_PRIME),
    }
}

pub fn params_from_settings(q: &SettingsQuad) -> [f64; PARAM_COUNT] {
    use layout::*;
    let mut p = [0.0; PARAM_COUNT];
    for (k, s) in [q.a, q.a_prime, q.b, q.b_prime].iter().enumerate() {
        p[RE_ALPHA + k] = s.alpha.re;
        p[RE_ALPHA + k + IM_OFFSET] = s.alpha.im;
        p[LN_U + k] = s.u.ln();
    }
    p
}
