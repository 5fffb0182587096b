use serde::{Deserialize, Serialize};

/// The `±` of the Hamiltonians: `Plus` is the upper sign.
///
/// With the upper sign the potential energy is positive, so `Plus` is the
/// defocusing case for NLS, Wick NLS and gKdV alike, and the Gibbs weight is
/// `exp(-(beta/p) int |u|^p)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "plus", alias = "defocusing")]
    Plus,
    #[serde(rename = "minus", alias = "focusing")]
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn is_defocusing(self) -> bool {
        self == Sign::Plus
    }
}

impl std::str::FromStr for Sign {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "plus" | "+" | "defocusing" => Ok(Sign::Plus),
            "minus" | "-" | "focusing" => Ok(Sign::Minus),
            other => Err(format!("unknown sign '{other}' (expected plus/defocusing or minus/focusing)")),
        }
    }
}
