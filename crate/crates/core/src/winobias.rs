//! Skew and stereotype metrics over WinoBias F1 scores.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// F1 scores (percent) on the pro- and anti-stereotypical subsets, split by
/// the gender of the referent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WinoBiasF1 {
    pub pro_male: f64,
    pub anti_male: f64,
    pub pro_female: f64,
    pub anti_female: f64,
}

impl WinoBiasF1 {
    pub fn new(pro_male: f64, anti_male: f64, pro_female: f64, anti_female: f64) -> Result<Self> {
        let f1 = WinoBiasF1 {
            pro_male,
            anti_male,
            pro_female,
            anti_female,
        };
        for (name, v) in [
            ("pro_male", pro_male),
            ("anti_male", anti_male),
            ("pro_female", pro_female),
            ("anti_female", anti_female),
        ] {
            if !(0.0..=100.0).contains(&v) {
                return Err(Error::param(format!("{name} = {v} is outside [0, 100]")));
            }
        }
        Ok(f1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WinoBiasMetrics {
    pub skew: f64,
    pub stereo: f64,
}

/// `skew   = (|pro_M − pro_F| + |anti_M − anti_F|) / 2`
/// `stereo = (|pro_M − anti_M| + |pro_F − anti_F|) / 2`
pub fn winobias_metrics(f1: &WinoBiasF1) -> WinoBiasMetrics {
    WinoBiasMetrics {
        skew: ((f1.pro_male - f1.pro_female).abs() + (f1.anti_male - f1.anti_female).abs()) / 2.0,
        stereo: ((f1.pro_male - f1.anti_male).abs() + (f1.pro_female - f1.anti_female).abs()) / 2.0,
    }
}
