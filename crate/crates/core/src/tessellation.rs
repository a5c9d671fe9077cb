use serde::{Deserialize, Serialize};

use crate::error::{Result, StitError};
use crate::geometry::{norm, ConvexBody, Polytope, AREA_EPS};
use crate::measure::DrivingMeasure;

/// A finite set of convex cells tiling a window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tessellation {
    pub window: Polytope,
    pub cells: Vec<Polytope>,
}

/// Test statistics used by the distributional checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatRecord {
    pub cell_count: usize,
    /// Total length (or `(l-1)`-volume) of cell boundaries inside the window.
    pub boundary: f64,
    pub zero_cell_area: Option<f64>,
    /// `Σ_i Λ([C_i])`.
    pub zeta: f64,
}

impl Tessellation {
    pub fn trivial(window: Polytope) -> Self {
        Self {
            cells: vec![window.clone()],
            window,
        }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Index of the cell holding the origin in its interior.
    pub fn zero_cell_index(&self) -> Result<usize> {
        let origin = vec![0.0; self.window.dim()];
        self.cells
            .iter()
            .position(|c| c.contains_point(&origin, true))
            .ok_or(StitError::AmbiguousZeroCell)
    }

    pub fn zero_cell(&self) -> Result<&Polytope> {
        Ok(&self.cells[self.zero_cell_index()?])
    }

    /// Cell indices in numbering order: the zero cell first (when it is
    /// unambiguous), then by distance of the centroid from the origin with
    /// lexicographic tie-break on the centroid.
    pub fn number_cells(&self) -> Vec<usize> {
        let zero = self.zero_cell_index().ok();
        let keys: Vec<(f64, Vec<f64>)> = self
            .cells
            .iter()
            .map(|c| {
                let z = c.centroid();
                (norm(&z), z.to_vec())
            })
            .collect();
        let mut order: Vec<usize> = (0..self.cells.len()).filter(|i| Some(*i) != zero).collect();
        order.sort_by(|&a, &b| {
            let (da, za) = &keys[a];
            let (db, zb) = &keys[b];
            da.total_cmp(db).then_with(|| {
                za.iter()
                    .zip(zb)
                    .map(|(x, y)| x.total_cmp(y))
                    .find(|o| o.is_ne())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
        });
        zero.into_iter().chain(order).collect()
    }

    /// `T ⊞ (R_1, R_2, ...)`: nest `rs[k]` into the `k`-th numbered cell.
    pub fn iterate(&self, rs: &[Tessellation]) -> Result<Tessellation> {
        if rs.len() < self.cells.len() {
            return Err(StitError::InsufficientNests {
                needed: self.cells.len(),
                got: rs.len(),
            });
        }
        let mut cells = Vec::new();
        for (k, idx) in self.number_cells().into_iter().enumerate() {
            let base = &self.cells[idx];
            for c in &rs[k].cells {
                if let Some(piece) = base.intersect(c)? {
                    if piece.volume() > AREA_EPS {
                        cells.push(piece);
                    }
                }
            }
        }
        Ok(Tessellation {
            window: self.window.clone(),
            cells,
        })
    }

    /// `T ∧ W'`.
    pub fn restrict(&self, inner: &Polytope) -> Result<Tessellation> {
        if !self.window.contains(inner, false) {
            return Err(StitError::WindowMismatch(
                "restriction window is not inside the window".into(),
            ));
        }
        let mut cells = Vec::new();
        for c in &self.cells {
            if let Some(piece) = c.intersect(inner)? {
                if piece.volume() > AREA_EPS {
                    cells.push(piece);
                }
            }
        }
        Ok(Tessellation {
            window: inner.clone(),
            cells,
        })
    }

    pub fn scale(&self, r: f64) -> Result<Tessellation> {
        Ok(Tessellation {
            window: self.window.scale(r)?,
            cells: self.cells.iter().map(|c| c.scale(r)).collect::<Result<_>>()?,
        })
    }

    /// Every internal facet is shared by exactly two cells, so the internal
    /// boundary is half the surplus of the summed cell surfaces.
    pub fn internal_boundary(&self) -> f64 {
        let total: f64 = self.cells.iter().map(Polytope::surface).sum();
        (0.5 * (total - self.window.surface())).max(0.0)
    }

    pub fn summary_stats(&self, measure: &DrivingMeasure) -> Result<StatRecord> {
        let zeta = self.cells.iter().map(|c| measure.hitting(c)).sum::<Result<f64>>()?;
        Ok(StatRecord {
            cell_count: self.cells.len(),
            boundary: self.internal_boundary(),
            zero_cell_area: self.zero_cell().ok().map(Polytope::volume),
            zeta,
        })
    }

    /// Relative deviation of the summed cell volumes from the window volume.
    pub fn tiling_defect(&self) -> f64 {
        let total: f64 = self.cells.iter().map(Polytope::volume).sum();
        (total - self.window.volume()).abs() / self.window.volume()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Direction, Hyperplane, Side};

    fn sq(a: f64) -> Polytope {
        Polytope::cube(2, a)
    }

    fn cut(t: &Polytope, h: &Hyperplane) -> Vec<Polytope> {
        vec![
            t.clip(&h.half_space(Side::Plus)).unwrap().unwrap(),
            t.clip(&h.half_space(Side::Minus)).unwrap().unwrap(),
        ]
    }

    #[test]
    fn zero_cell_follows_plus_side() {
        let w = sq(1.0);
        assert_eq!(Tessellation::trivial(w.clone()).zero_cell().unwrap(), &w);
        let h = Hyperplane::new(Direction::axis(2, 0), 0.5);
        let t = Tessellation {
            window: w.clone(),
            cells: cut(&w, &h),
        };
        assert_eq!(
            t.zero_cell().unwrap(),
            &Polytope::aabox(&[-1.0, -1.0], &[0.5, 1.0]).unwrap()
        );
        let through = Hyperplane::new(Direction::axis(2, 0), 0.0);
        let t = Tessellation {
            window: w.clone(),
            cells: cut(&w, &through),
        };
        assert_eq!(t.zero_cell(), Err(StitError::AmbiguousZeroCell));
    }

    #[test]
    fn numbering_is_order_independent() {
        let w = sq(2.0);
        let h1 = Hyperplane::new(Direction::axis(2, 0), 0.5);
        let mut cells = cut(&w, &h1);
        let right = cells.pop().unwrap();
        let h2 = Hyperplane::new(Direction::axis(2, 1), 1.0);
        cells.extend(cut(&right, &h2));
        let t = Tessellation {
            window: w.clone(),
            cells: cells.clone(),
        };
        let named = |t: &Tessellation| {
            t.number_cells()
                .into_iter()
                .map(|i| t.cells[i].clone())
                .collect::<Vec<_>>()
        };
        let first = named(&t);
        assert_eq!(first[0], cells[0]);
        cells.reverse();
        let t2 = Tessellation { window: w, cells };
        assert_eq!(named(&t2), first);
    }

    #[test]
    fn iterate_examples() {
        let w = sq(1.0);
        let h = Hyperplane::new(Direction::axis(2, 0), 0.5);
        let r = Tessellation {
            window: w.clone(),
            cells: cut(&w, &h),
        };
        let single = Tessellation::trivial(w.clone())
            .iterate(std::slice::from_ref(&r))
            .unwrap();
        assert_eq!(single.cells, r.cells);
        let trivials = vec![Tessellation::trivial(w.clone()); 2];
        assert_eq!(r.iterate(&trivials).unwrap().len(), 2);
        assert!(matches!(
            r.iterate(&trivials[..1]),
            Err(StitError::InsufficientNests { .. })
        ));
        // a horizontal cut nested into both halves splits each of them
        let v = Hyperplane::new(Direction::axis(2, 1), -0.25);
        let rv = Tessellation {
            window: w.clone(),
            cells: cut(&w, &v),
        };
        let it = r.iterate(&[rv.clone(), rv]).unwrap();
        assert_eq!(it.len(), 4);
        assert!(it.tiling_defect() < 1e-12);
    }

    #[test]
    fn restrict_examples() {
        let w = sq(2.0);
        let t = Tessellation::trivial(w.clone());
        assert_eq!(t.restrict(&w).unwrap(), t);
        let inner = sq(1.0);
        let h = Hyperplane::new(Direction::axis(2, 0), 1.5);
        let t = Tessellation {
            window: w.clone(),
            cells: cut(&w, &h),
        };
        assert_eq!(t.restrict(&inner).unwrap().cells, vec![inner.clone()]);
        assert!(matches!(
            Tessellation::trivial(inner).restrict(&w),
            Err(StitError::WindowMismatch(_))
        ));
    }

    #[test]
    fn summary_examples() {
        let m = DrivingMeasure::axis_parallel(&[1.0, 1.0]).unwrap();
        let w = sq(1.0);
        let s = Tessellation::trivial(w.clone()).summary_stats(&m).unwrap();
        assert_eq!((s.cell_count, s.boundary, s.zeta), (1, 0.0, 4.0));
        assert_eq!(s.zero_cell_area, Some(4.0));
        let h = Hyperplane::new(Direction::axis(2, 0), 0.3);
        let s = Tessellation {
            window: w.clone(),
            cells: cut(&w, &h),
        }
        .summary_stats(&m)
        .unwrap();
        assert_eq!(s.cell_count, 2);
        assert!((s.boundary - 2.0).abs() < 1e-12);
        assert!((s.zeta - 6.0).abs() < 1e-12);
    }
}
