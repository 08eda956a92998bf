use serde::{Deserialize, Serialize};

/// Numeric thresholds shared by every module.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub sim: f64,
    pub pair: f64,
    pub grp: f64,
    pub cls: f64,
    pub typ: f64,
    pub proj: f64,
    pub conj: f64,
    pub nf: f64,
    pub platis: f64,
    pub rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            sim: 1e-9,
            pair: 1e-8,
            grp: 1e-9,
            cls: 1e-9,
            typ: 1e-7,
            proj: 1e-10,
            conj: 1e-6,
            nf: 1e-8,
            platis: 1e-8,
            rel: 1e-6,
        }
    }
}
