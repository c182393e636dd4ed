//! Isotropic hardening table read off the unloading anchor points.

use serde::{Deserialize, Serialize};

use super::marlow::MarlowCurve;
use super::unloading::UnloadingFamily;
use super::MaterialError;
use crate::numeric::interp::lerp_table;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlasticityRow {
    pub yield_stress: f64,
    pub plastic_strain: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PlasticityTable {
    pub rows: Vec<PlasticityRow>,
}

impl PlasticityTable {
    pub fn validate(&self) -> Result<(), MaterialError> {
        for w in self.rows.windows(2) {
            if w[1].yield_stress <= w[0].yield_stress {
                return Err(MaterialError::InvalidCard("yield stresses must increase".into()));
            }
            if w[1].plastic_strain <= w[0].plastic_strain {
                return Err(MaterialError::NonMonotoneAnchors {
                    sigma0: w[1].yield_stress,
                });
            }
        }
        Ok(())
    }

    /// Plastic strain at a yield stress inside the table span.
    pub fn plastic_strain_at(&self, stress: f64) -> Option<f64> {
        let first = self.rows.first()?;
        let last = self.rows.last()?;
        if stress < first.yield_stress || stress > last.yield_stress {
            return None;
        }
        if self.rows.len() == 1 {
            return Some(first.plastic_strain);
        }
        let xs: Vec<f64> = self.rows.iter().map(|r| r.yield_stress).collect();
        let ys: Vec<f64> = self.rows.iter().map(|r| r.plastic_strain).collect();
        Some(lerp_table(&xs, &ys, stress))
    }
}

/// One row per member: its initial stress and its zero-stress strain.
pub fn extract_plasticity_table(
    family: &UnloadingFamily,
    _marlow: &MarlowCurve,
) -> Result<PlasticityTable, MaterialError> {
    if family.is_empty() {
        return Err(MaterialError::EmptyFamily);
    }
    let mut rows: Vec<PlasticityRow> = family
        .members
        .iter()
        .map(|m| PlasticityRow {
            yield_stress: m.sigma0,
            plastic_strain: m.anchor_strain,
        })
        .collect();
    rows.sort_by(|a, b| a.yield_stress.total_cmp(&b.yield_stress));
    let table = PlasticityTable { rows };
    table.validate()?;
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dma::{CurveKind, DmaCurve};
    use crate::material::marlow::Interpolation;
    use crate::material::unloading::UnloadingMember;

    fn marlow() -> MarlowCurve {
        MarlowCurve::new(
            DmaCurve::new(vec![0.0, 0.3], vec![0.0, 0.3], CurveKind::Loading),
            Interpolation::Linear,
        )
        .unwrap()
    }

    fn mem(s: f64, a: f64) -> UnloadingMember {
        UnloadingMember::new(s, DmaCurve::new(vec![s, a], vec![s, 0.0], CurveKind::Unloading)).unwrap()
    }

    #[test]
    fn shuffled_members_give_sorted_rows() {
        let fam = UnloadingFamily {
            members: vec![mem(0.2, 0.05), mem(0.1, 0.01), mem(0.15, 0.02)],
            ..Default::default()
        };
        let t = extract_plasticity_table(&fam, &marlow()).unwrap();
        let ys: Vec<f64> = t.rows.iter().map(|r| r.yield_stress).collect();
        assert_eq!(ys, vec![0.1, 0.15, 0.2]);
        assert_eq!(t.plastic_strain_at(0.15), Some(0.02));
    }

    #[test]
    fn non_monotone_anchor_rejected() {
        let fam = UnloadingFamily {
            members: vec![mem(0.1, 0.03), mem(0.2, 0.02)],
            ..Default::default()
        };
        assert!(matches!(
            extract_plasticity_table(&fam, &marlow()),
            Err(MaterialError::NonMonotoneAnchors { .. })
        ));
    }
}
