//! Rectangular spatial domain, its grid decomposition, and the
//! observation/dataset model shared by all other modules.
//!
//! The domain is the half-open rectangle `[x0, x0 + a*cs) x [y0, y0 + b*cs)`
//! decomposed into `a x b` square cells of side `cs`. Grid coordinates
//! `(j, k)` are 1-based; cell `(j, k)` covers
//! `[x0 + (j-1)*cs, x0 + j*cs) x [y0 + (k-1)*cs, y0 + k*cs)`.
//! Fields are stored row-major with `j` varying fastest:
//! `index = (k-1)*a + (j-1)`.

use crate::error::{Error, Result, ValidationIssue};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpatialDomain {
    width_a: u32,
    height_b: u32,
    origin: (f64, f64),
    cell_size: f64,
}

impl SpatialDomain {
    /// Unit-cell grid with origin at (0, 0).
    pub fn new(width_a: u32, height_b: u32) -> Result<Self> {
        Self::with_geometry(width_a, height_b, (0.0, 0.0), 1.0)
    }

    pub fn with_geometry(
        width_a: u32,
        height_b: u32,
        origin: (f64, f64),
        cell_size: f64,
    ) -> Result<Self> {
        if width_a < 1 || height_b < 1 {
            return Err(Error::domain(format!(
                "grid must be at least 1x1, got {width_a}x{height_b}"
            )));
        }
        if !(cell_size > 0.0) || !cell_size.is_finite() {
            return Err(Error::domain(format!("cell_size must be positive, got {cell_size}")));
        }
        if !origin.0.is_finite() || !origin.1.is_finite() {
            return Err(Error::domain("origin must be finite".to_string()));
        }
        Ok(Self { width_a, height_b, origin, cell_size })
    }

    pub fn width_a(&self) -> u32 {
        self.width_a
    }

    pub fn height_b(&self) -> u32 {
        self.height_b
    }

    pub fn origin(&self) -> (f64, f64) {
        self.origin
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn num_cells(&self) -> usize {
        self.width_a as usize * self.height_b as usize
    }

    /// Grid-relative continuous coordinates: `(x - x0) / cs`.
    /// A location is inside the domain iff both components lie in `[0, a) x [0, b)`.
    pub fn grid_coords(&self, location: (f64, f64)) -> (f64, f64) {
        (
            (location.0 - self.origin.0) / self.cell_size,
            (location.1 - self.origin.1) / self.cell_size,
        )
    }

    pub fn contains(&self, location: (f64, f64)) -> bool {
        let (tx, ty) = self.grid_coords(location);
        tx >= 0.0 && tx < self.width_a as f64 && ty >= 0.0 && ty < self.height_b as f64
    }

    /// Cell coordinates (1-based) of the cell containing `location`.
    ///
    /// `j = floor((x - x0)/cs) + 1`, analogously `k`. Locations exactly at the
    /// upper bound are rejected, not clamped.
    pub fn world_to_cell(&self, location: (f64, f64)) -> Result<(u32, u32)> {
        let (tx, ty) = self.grid_coords(location);
        if !(tx >= 0.0 && tx < self.width_a as f64 && ty >= 0.0 && ty < self.height_b as f64) {
            return Err(Error::domain(format!(
                "location ({}, {}) outside [{}, {}) x [{}, {})",
                location.0,
                location.1,
                self.origin.0,
                self.origin.0 + self.width_a as f64 * self.cell_size,
                self.origin.1,
                self.origin.1 + self.height_b as f64 * self.cell_size,
            )));
        }
        Ok((tx.floor() as u32 + 1, ty.floor() as u32 + 1))
    }

    /// World coordinates of the center of cell `(j, k)`.
    pub fn cell_center(&self, j: u32, k: u32) -> Result<(f64, f64)> {
        self.check_cell(j, k)?;
        Ok((
            (j as f64 - 0.5) * self.cell_size + self.origin.0,
            (k as f64 - 0.5) * self.cell_size + self.origin.1,
        ))
    }

    fn check_cell(&self, j: u32, k: u32) -> Result<()> {
        if j < 1 || j > self.width_a || k < 1 || k > self.height_b {
            return Err(Error::domain(format!(
                "cell ({j}, {k}) outside 1..={} x 1..={}",
                self.width_a, self.height_b
            )));
        }
        Ok(())
    }

    /// Flat storage index of cell `(j, k)`.
    #[inline]
    pub fn cell_index(&self, j: u32, k: u32) -> usize {
        debug_assert!(j >= 1 && j <= self.width_a && k >= 1 && k <= self.height_b);
        (k as usize - 1) * self.width_a as usize + (j as usize - 1)
    }

    /// Inverse of [`cell_index`](Self::cell_index).
    #[inline]
    pub fn cell_at(&self, index: usize) -> (u32, u32) {
        debug_assert!(index < self.num_cells());
        let a = self.width_a as usize;
        ((index % a) as u32 + 1, (index / a) as u32 + 1)
    }

    /// Length of the grid diagonal in cells, `sqrt(a^2 + b^2)`.
    pub fn diagonal_cells(&self) -> f64 {
        ((self.width_a as f64).powi(2) + (self.height_b as f64).powi(2)).sqrt()
    }
}

/// A single cell-valued field over a domain, row-major per the module docs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarField {
    domain: SpatialDomain,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(domain: SpatialDomain) -> Self {
        Self { domain, values: vec![0.0; domain.num_cells()] }
    }

    pub fn from_values(domain: SpatialDomain, values: Vec<f64>) -> Result<Self> {
        if values.len() != domain.num_cells() {
            return Err(Error::domain(format!(
                "field length {} does not match {}x{} grid",
                values.len(),
                domain.width_a(),
                domain.height_b()
            )));
        }
        Ok(Self { domain, values })
    }

    pub fn domain(&self) -> &SpatialDomain {
        &self.domain
    }

    #[inline]
    pub fn get(&self, j: u32, k: u32) -> f64 {
        self.values[self.domain.cell_index(j, k)]
    }

    #[inline]
    pub fn set(&mut self, j: u32, k: u32, value: f64) {
        let idx = self.domain.cell_index(j, k);
        self.values[idx] = value;
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn scale_in_place(&mut self, factor: f64) {
        for v in &mut self.values {
            *v *= factor;
        }
    }

    pub fn add_assign(&mut self, other: &ScalarField) -> Result<()> {
        if self.domain != other.domain {
            return Err(Error::domain("field domains differ".to_string()));
        }
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += b;
        }
        Ok(())
    }
}

/// Boolean mask over a grid, same storage order as [`ScalarField`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinaryMap {
    domain: SpatialDomain,
    mask: Vec<bool>,
}

impl BinaryMap {
    pub fn empty(domain: SpatialDomain) -> Self {
        Self { domain, mask: vec![false; domain.num_cells()] }
    }

    pub fn full(domain: SpatialDomain) -> Self {
        Self { domain, mask: vec![true; domain.num_cells()] }
    }

    pub fn from_mask(domain: SpatialDomain, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != domain.num_cells() {
            return Err(Error::domain(format!(
                "mask length {} does not match {}x{} grid",
                mask.len(),
                domain.width_a(),
                domain.height_b()
            )));
        }
        Ok(Self { domain, mask })
    }

    pub fn domain(&self) -> &SpatialDomain {
        &self.domain
    }

    #[inline]
    pub fn get(&self, j: u32, k: u32) -> bool {
        self.mask[self.domain.cell_index(j, k)]
    }

    #[inline]
    pub fn set(&mut self, j: u32, k: u32, value: bool) {
        let idx = self.domain.cell_index(j, k);
        self.mask[idx] = value;
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn mask_mut(&mut self) -> &mut [bool] {
        &mut self.mask
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.mask.iter().any(|&m| m)
    }

    /// Cell coordinates (1-based) of all set cells, in storage order.
    pub fn true_cells(&self) -> Vec<(u32, u32)> {
        self.mask
            .iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(|(i, _)| self.domain.cell_at(i))
            .collect()
    }

    pub fn intersect(&self, other: &BinaryMap) -> Result<BinaryMap> {
        if self.domain != other.domain {
            return Err(Error::domain("mask domains differ".to_string()));
        }
        let mask = self.mask.iter().zip(&other.mask).map(|(&a, &b)| a && b).collect();
        Ok(BinaryMap { domain: self.domain, mask })
    }
}

/// One spatially-referenced observation: a location in the domain and the
/// values of the P variables measured there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub location: (f64, f64),
    pub values: Vec<f64>,
}

/// A collection of observations over a shared domain and variable list.
///
/// Construction is lenient so that malformed inputs can be diagnosed by
/// [`validate_dataset`]; every analysis entry point validates first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    domain: SpatialDomain,
    variable_names: Vec<String>,
    observations: Vec<Observation>,
}

impl Dataset {
    pub fn new(
        domain: SpatialDomain,
        variable_names: Vec<String>,
        observations: Vec<Observation>,
    ) -> Result<Self> {
        if variable_names.is_empty() {
            return Err(Error::domain("dataset needs at least one variable".to_string()));
        }
        let mut seen = std::collections::HashSet::new();
        for name in &variable_names {
            if !seen.insert(name.as_str()) {
                return Err(Error::domain(format!("duplicate variable name '{name}'")));
            }
        }
        if observations.is_empty() {
            return Err(Error::domain("dataset needs at least one observation".to_string()));
        }
        Ok(Self { domain, variable_names, observations })
    }

    pub fn domain(&self) -> &SpatialDomain {
        &self.domain
    }

    pub fn variable_names(&self) -> &[String] {
        &self.variable_names
    }

    pub fn num_variables(&self) -> usize {
        self.variable_names.len()
    }

    pub fn num_observations(&self) -> usize {
        self.observations.len()
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn variable_index(&self, name: &str) -> Result<usize> {
        self.variable_names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::domain(format!("unknown variable '{name}'")))
    }

    /// Values of variable `index` across observations, in row order.
    pub fn variable_column(&self, index: usize) -> Result<Vec<f64>> {
        if index >= self.num_variables() {
            return Err(Error::domain(format!("variable index {index} out of range")));
        }
        Ok(self.observations.iter().map(|o| o.values[index]).collect())
    }
}

/// Checks every per-row invariant and reports all violations at once:
/// NaN/non-finite values, out-of-domain locations, and ragged rows.
pub fn validate_dataset(dataset: &Dataset) -> Result<()> {
    let mut issues = Vec::new();
    let p = dataset.num_variables();
    let d = dataset.domain();
    for (row, obs) in dataset.observations().iter().enumerate() {
        if obs.values.len() != p {
            issues.push(ValidationIssue {
                row,
                message: format!("expected {} values, found {}", p, obs.values.len()),
            });
            continue;
        }
        for (col, v) in obs.values.iter().enumerate() {
            if !v.is_finite() {
                issues.push(ValidationIssue {
                    row,
                    message: format!(
                        "non-finite value in column '{}'",
                        dataset.variable_names()[col]
                    ),
                });
            }
        }
        if !obs.location.0.is_finite() || !obs.location.1.is_finite() {
            issues.push(ValidationIssue { row, message: "non-finite location".to_string() });
        } else if !d.contains(obs.location) {
            issues.push(ValidationIssue {
                row,
                message: format!(
                    "location ({}, {}) outside [{}, {}) x [{}, {})",
                    obs.location.0,
                    obs.location.1,
                    d.origin().0,
                    d.origin().0 + d.width_a() as f64 * d.cell_size(),
                    d.origin().1,
                    d.origin().1 + d.height_b() as f64 * d.cell_size(),
                ),
            });
        }
    }
    if issues.is_empty() {
        Ok(())
    } else {
        Err(Error::Validation(issues))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn world_to_cell_lower_corner() {
        let d = SpatialDomain::new(120, 120).unwrap();
        assert_eq!(d.world_to_cell((0.0, 0.0)).unwrap(), (1, 1));
    }

    #[test]
    fn world_to_cell_interior() {
        let d = SpatialDomain::new(120, 120).unwrap();
        assert_eq!(d.world_to_cell((3.7, 5.2)).unwrap(), (4, 6));
    }

    #[test]
    fn world_to_cell_near_upper_bound() {
        let d = SpatialDomain::new(220, 210).unwrap();
        assert_eq!(d.world_to_cell((219.99, 209.99)).unwrap(), (220, 210));
    }

    #[test]
    fn world_to_cell_rejects_upper_bound() {
        let d = SpatialDomain::new(120, 120).unwrap();
        assert!(d.world_to_cell((120.0, 0.0)).is_err());
        assert!(d.world_to_cell((0.0, 120.0)).is_err());
        assert!(d.world_to_cell((-1e-9, 0.0)).is_err());
    }

    #[test]
    fn cell_center_examples() {
        let d = SpatialDomain::new(120, 120).unwrap();
        assert_eq!(d.cell_center(1, 1).unwrap(), (0.5, 0.5));
        assert_eq!(d.cell_center(4, 6).unwrap(), (3.5, 5.5));
        let ukb = SpatialDomain::with_geometry(35, 35, (388000.0, 269000.0), 1000.0).unwrap();
        assert_eq!(ukb.cell_center(1, 1).unwrap(), (388500.0, 269500.0));
        assert!(d.cell_center(0, 1).is_err());
        assert!(d.cell_center(1, 121).is_err());
    }

    #[test]
    fn center_and_cell_are_inverse_on_small_grids() {
        for (a, b, cs, ox, oy) in
            [(1, 1, 1.0, 0.0, 0.0), (7, 3, 1.0, 0.0, 0.0), (5, 9, 2.5, -4.0, 11.0)]
        {
            let d = SpatialDomain::with_geometry(a, b, (ox, oy), cs).unwrap();
            for j in 1..=a {
                for k in 1..=b {
                    let c = d.cell_center(j, k).unwrap();
                    assert_eq!(d.world_to_cell(c).unwrap(), (j, k), "grid {a}x{b}");
                }
            }
        }
    }

    #[test]
    fn cell_index_round_trip() {
        let d = SpatialDomain::new(7, 5).unwrap();
        for idx in 0..d.num_cells() {
            let (j, k) = d.cell_at(idx);
            assert_eq!(d.cell_index(j, k), idx);
        }
    }

    #[test]
    fn validate_reports_all_violations() {
        let d = SpatialDomain::new(10, 10).unwrap();
        let ds = Dataset::new(
            d,
            vec!["v1".into(), "v2".into()],
            vec![
                Observation { location: (1.0, 1.0), values: vec![0.0, 1.0] },
                Observation { location: (2.0, 2.0), values: vec![0.0, f64::NAN] },
                Observation { location: (10.0, 3.0), values: vec![0.0, 1.0] },
                Observation { location: (4.0, 4.0), values: vec![0.0] },
            ],
        )
        .unwrap();
        let err = validate_dataset(&ds).unwrap_err();
        match err {
            Error::Validation(issues) => {
                assert_eq!(issues.len(), 3);
                assert_eq!(issues[0].row, 1);
                assert!(issues[0].message.contains("v2"));
                assert_eq!(issues[1].row, 2);
                assert!(issues[1].message.contains("outside [0, 10)"));
                assert_eq!(issues[2].row, 3);
                assert!(issues[2].message.contains("expected 2 values"));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn validate_accepts_clean_rows() {
        let d = SpatialDomain::new(10, 10).unwrap();
        let ds = Dataset::new(
            d,
            vec!["v1".into()],
            vec![
                Observation { location: (0.0, 0.0), values: vec![1.0] },
                Observation { location: (9.999, 9.999), values: vec![0.0] },
                Observation { location: (5.0, 5.0), values: vec![0.5] },
            ],
        )
        .unwrap();
        assert!(validate_dataset(&ds).is_ok());
    }

    #[test]
    fn dataset_rejects_duplicate_names() {
        let d = SpatialDomain::new(4, 4).unwrap();
        let obs = vec![Observation { location: (0.5, 0.5), values: vec![1.0, 2.0] }];
        assert!(Dataset::new(d, vec!["x1".into(), "x1".into()], obs).is_err());
    }
}
