use serde::{Deserialize, Serialize};

use super::EnergyTable;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemePoint {
    pub scheme_name: String,
    pub capacity_gbps: f64,
    /// Module power at full load, W.
    pub total_power_w: f64,
}

/// Line through the origin fitted to one scheme's points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeFit {
    pub scheme_name: String,
    /// W per (b/s), i.e. J/bit.
    pub slope_j_per_bit: f64,
    pub points: usize,
}

impl SchemeFit {
    pub fn slope_pj_per_bit(&self) -> f64 {
        self.slope_j_per_bit * 1e12
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeComparison {
    pub points: Vec<SchemePoint>,
    /// One fit per scheme name, in order of first appearance.
    pub fits: Vec<SchemeFit>,
}

/// Module power of every table and a least-squares slope per scheme.
///
/// Power is capacity × (E_tx + E_rx): each transported bit pays for one transmitter and one receiver.
pub fn scheme_comparison(tables: &[EnergyTable]) -> Result<SchemeComparison> {
    if tables.is_empty() {
        return Err(Error::invalid("tables", "at least one energy table is needed"));
    }
    let mut points = Vec::with_capacity(tables.len());
    for t in tables {
        t.validate().map_err(|e| e.in_stage(t.scheme_name.clone()))?;
        points.push(SchemePoint {
            scheme_name: t.scheme_name.clone(),
            capacity_gbps: t.capacity_gbps,
            total_power_w: t.capacity_gbps * 1e9 * t.total_energy_per_bit()?,
        });
    }
    let mut names: Vec<&str> = Vec::new();
    for p in &points {
        if !names.contains(&p.scheme_name.as_str()) {
            names.push(&p.scheme_name);
        }
    }
    let fits = names
        .iter()
        .map(|&name| {
            let (mut cp, mut cc, mut n) = (0.0, 0.0, 0);
            for p in points.iter().filter(|p| p.scheme_name == name) {
                let c = p.capacity_gbps * 1e9;
                cp += c * p.total_power_w;
                cc += c * c;
                n += 1;
            }
            SchemeFit {
                scheme_name: name.to_string(),
                slope_j_per_bit: cp / cc,
                points: n,
            }
        })
        .collect();
    Ok(SchemeComparison { points, fits })
}
