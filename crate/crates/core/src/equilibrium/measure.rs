//! Discretized measures on ℝ or iℝ: atoms and cells of uniform density.

use serde::{Deserialize, Serialize};

use super::EquilibriumError;
use crate::specfun::quad::gauss_legendre;

/// Line carrying the measure; on `Imaginary` the coordinate t stands for it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    #[default]
    Real,
    Imaginary,
}

/// Masses m_i spread uniformly over [x_i − w_i/2, x_i + w_i/2]; w_i = 0 is an
/// atom.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiscreteMeasure {
    pub grid: Vec<f64>,
    pub masses: Vec<f64>,
    pub widths: Vec<f64>,
    pub total_mass: f64,
    pub symmetric: bool,
    pub axis: Axis,
}

/// JSON form; `widths` defaults to the midpoint cells of the grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureInput {
    pub grid: Vec<f64>,
    pub masses: Vec<f64>,
    pub total_mass: f64,
    #[serde(default)]
    pub widths: Option<Vec<f64>>,
    #[serde(default)]
    pub axis: Axis,
}

const SYMMETRY_TOL: f64 = 1e-10;

fn midpoint_widths(grid: &[f64]) -> Vec<f64> {
    let n = grid.len();
    if n < 2 {
        return vec![0.0; n];
    }
    (0..n)
        .map(|i| {
            let left = if i == 0 {
                grid[1] - grid[0]
            } else {
                grid[i] - grid[i - 1]
            };
            let right = if i + 1 == n {
                grid[n - 1] - grid[n - 2]
            } else {
                grid[i + 1] - grid[i]
            };
            0.5 * (left + right)
        })
        .collect()
}

impl DiscreteMeasure {
    pub fn new(
        grid: Vec<f64>,
        masses: Vec<f64>,
        widths: Vec<f64>,
        total_mass: f64,
        axis: Axis,
    ) -> Result<Self, EquilibriumError> {
        if grid.len() != masses.len() || grid.len() != widths.len() || grid.is_empty() {
            return Err(EquilibriumError::Input(
                "grid, masses and widths must be nonempty and of equal length".into(),
            ));
        }
        if grid
            .iter()
            .chain(&masses)
            .chain(&widths)
            .any(|v| !v.is_finite())
        {
            return Err(EquilibriumError::Input("non-finite entry".into()));
        }
        if grid.windows(2).any(|w| w[1] < w[0]) {
            return Err(EquilibriumError::Input("grid must be sorted".into()));
        }
        if let Some(i) = masses.iter().position(|&m| m < 0.0) {
            return Err(EquilibriumError::Negative {
                node: grid[i],
                mass: masses[i],
            });
        }
        if widths.iter().any(|&w| w < 0.0) {
            return Err(EquilibriumError::Input("negative cell width".into()));
        }
        let sum: f64 = masses.iter().sum();
        if (sum - total_mass).abs() > 1e-12 * total_mass.abs().max(1.0) {
            return Err(EquilibriumError::Input(format!(
                "masses sum to {sum}, total_mass is {total_mass}"
            )));
        }
        let mut m = DiscreteMeasure {
            grid,
            masses,
            widths,
            total_mass,
            symmetric: false,
            axis,
        };
        m.symmetric = m.reflection_defect() <= SYMMETRY_TOL;
        Ok(m)
    }

    pub fn from_input(inp: MeasureInput) -> Result<Self, EquilibriumError> {
        let widths = inp.widths.unwrap_or_else(|| midpoint_widths(&inp.grid));
        Self::new(inp.grid, inp.masses, widths, inp.total_mass, inp.axis)
    }

    pub fn from_json(s: &str) -> Result<Self, EquilibriumError> {
        let inp: MeasureInput =
            serde_json::from_str(s).map_err(|e| EquilibriumError::Input(e.to_string()))?;
        Self::from_input(inp)
    }

    pub fn to_input(&self) -> MeasureInput {
        MeasureInput {
            grid: self.grid.clone(),
            masses: self.masses.clone(),
            total_mass: self.total_mass,
            widths: Some(self.widths.clone()),
            axis: self.axis,
        }
    }

    pub fn atoms(points: Vec<f64>, masses: Vec<f64>, axis: Axis) -> Result<Self, EquilibriumError> {
        let total = masses.iter().sum();
        let w = vec![0.0; points.len()];
        Self::new(points, masses, w, total, axis)
    }

    /// Cells [b_k, b_{k+1}] with the given masses.
    pub fn with_cells(
        breaks: &[f64],
        masses: Vec<f64>,
        axis: Axis,
    ) -> Result<Self, EquilibriumError> {
        if breaks.len() != masses.len() + 1 {
            return Err(EquilibriumError::Input(
                "need one more break than masses".into(),
            ));
        }
        let grid = breaks.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let widths = breaks.windows(2).map(|w| w[1] - w[0]).collect();
        let total = masses.iter().sum();
        Self::new(grid, masses, widths, total, axis)
    }

    /// Cell masses F(b_{k+1}) − F(b_k) from a distribution function.
    pub fn from_cdf(
        breaks: &[f64],
        cdf: impl Fn(f64) -> f64,
        axis: Axis,
    ) -> Result<Self, EquilibriumError> {
        let masses = breaks
            .windows(2)
            .map(|w| (cdf(w[1]) - cdf(w[0])).max(0.0))
            .collect();
        Self::with_cells(breaks, masses, axis)
    }

    /// Cell masses from a density by 8-point Gauss–Legendre per cell.
    pub fn from_density(
        breaks: &[f64],
        density: impl Fn(f64) -> f64,
        axis: Axis,
    ) -> Result<Self, EquilibriumError> {
        let (x, w) = gauss_legendre::<f64>(8);
        let masses = breaks
            .windows(2)
            .map(|c| {
                let h = 0.5 * (c[1] - c[0]);
                x.iter()
                    .zip(&w)
                    .map(|(xi, wi)| wi * h * density(c[0] + h * (xi + 1.0)))
                    .sum::<f64>()
                    .max(0.0)
            })
            .collect();
        Self::with_cells(breaks, masses, axis)
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn cell(&self, i: usize) -> (f64, f64) {
        let h = 0.5 * self.widths[i];
        (self.grid[i] - h, self.grid[i] + h)
    }

    /// Largest mismatch of node, width or mass under x ↦ −x.
    pub fn reflection_defect(&self) -> f64 {
        let n = self.len();
        let scale = self.grid.iter().fold(1.0f64, |a, &b| a.max(b.abs()));
        (0..n)
            .map(|i| {
                let j = n - 1 - i;
                let dx = (self.grid[i] + self.grid[j]).abs() / scale;
                let dw = (self.widths[i] - self.widths[j]).abs() / scale;
                dx.max(dw).max((self.masses[i] - self.masses[j]).abs())
            })
            .fold(0.0, f64::max)
    }

    pub fn dilate(&self, lambda: f64) -> Self {
        let mut m = self.clone();
        m.grid.iter_mut().for_each(|x| *x *= lambda);
        m.widths.iter_mut().for_each(|w| *w *= lambda.abs());
        if lambda < 0.0 {
            m.grid.reverse();
            m.masses.reverse();
            m.widths.reverse();
        }
        m
    }

    pub fn scale_mass(&self, f: f64) -> Self {
        let mut m = self.clone();
        m.masses.iter_mut().for_each(|v| *v *= f);
        m.total_mass *= f;
        m
    }

    /// (1 − t)·self + t·other as one cell list.
    pub fn mix(&self, other: &Self, t: f64) -> Result<Self, EquilibriumError> {
        if self.axis != other.axis {
            return Err(EquilibriumError::Input(
                "cannot mix measures on different axes".into(),
            ));
        }
        let mut cells: Vec<(f64, f64, f64)> = self
            .grid
            .iter()
            .zip(&self.widths)
            .zip(&self.masses)
            .map(|((&x, &w), &m)| (x, w, (1.0 - t) * m))
            .chain(
                other
                    .grid
                    .iter()
                    .zip(&other.widths)
                    .zip(&other.masses)
                    .map(|((&x, &w), &m)| (x, w, t * m)),
            )
            .collect();
        cells.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let total = (1.0 - t) * self.total_mass + t * other.total_mass;
        let mut m = Self::new(
            cells.iter().map(|c| c.0).collect(),
            cells.iter().map(|c| c.2).collect(),
            cells.iter().map(|c| c.1).collect(),
            total,
            self.axis,
        );
        if let Ok(ref mut v) = m {
            v.total_mass = v.masses.iter().sum();
        }
        m
    }
}

/// Masses below this fraction of the total are not split further.
const SPLIT_FLOOR: f64 = 1e-13;

/// The pushforward under squaring, dμ̂(x) = 2dμ(√x): a symmetric measure on
/// ℝ goes to ℝ₊, one on iℝ to ℝ₋ (it ↦ −t²). Cells [a, b] ⊂ [0, ∞) map to
/// [a², b²]; a cell touching 0 keeps its right half, split geometrically so
/// that the pushed forward 1/√u profile is resolved.
pub fn square_measure(mu: &DiscreteMeasure) -> Result<DiscreteMeasure, EquilibriumError> {
    let defect = mu.reflection_defect();
    if defect > SYMMETRY_TOL {
        return Err(EquilibriumError::Symmetry(defect));
    }
    let floor = SPLIT_FLOOR * mu.total_mass.max(f64::MIN_POSITIVE);
    let mut cells: Vec<(f64, f64, f64)> = Vec::new();
    for i in 0..mu.len() {
        let (a, b) = mu.cell(i);
        let m = mu.masses[i];
        if b <= 0.0 && !(a == 0.0 && b == 0.0) {
            continue;
        }
        if a == b {
            // an atom at 0 keeps its mass, atoms at x > 0 double
            let mm = if a == 0.0 { m } else { 2.0 * m };
            cells.push((a * a, a * a, mm));
        } else if a > 0.0 {
            cells.push((a * a, b * b, 2.0 * m));
        } else {
            // [0, b] carries the fraction b/(b − a) of the cell
            let mut mass = 2.0 * m * b / (b - a);
            let mut hi = b;
            let mut inner = Vec::new();
            while mass > floor {
                let lo = 0.5 * hi;
                inner.push((lo * lo, hi * hi, 0.5 * mass));
                mass *= 0.5;
                hi = lo;
            }
            inner.push((0.0, hi * hi, mass));
            cells.extend(inner.into_iter().rev());
        }
    }
    if mu.axis == Axis::Imaginary {
        cells = cells
            .into_iter()
            .rev()
            .map(|(a, b, m)| (-b, -a, m))
            .collect();
    }
    cells.sort_by(|p, q| (p.0 + p.1).total_cmp(&(q.0 + q.1)));
    let grid = cells.iter().map(|c| 0.5 * (c.0 + c.1)).collect();
    let widths = cells.iter().map(|c| c.1 - c.0).collect();
    let masses: Vec<f64> = cells.iter().map(|c| c.2).collect();
    let total = masses.iter().sum();
    DiscreteMeasure::new(grid, masses, widths, total, Axis::Real)
}

/// Symmetric preimage of a measure on ℝ₊ (on `axis` = Real) or ℝ₋ (on
/// `axis` = Imaginary) under squaring.
pub fn symmetric_root(
    mu_hat: &DiscreteMeasure,
    axis: Axis,
) -> Result<DiscreteMeasure, EquilibriumError> {
    let sign = if axis == Axis::Real { 1.0 } else { -1.0 };
    let mut half: Vec<(f64, f64, f64)> = Vec::new();
    for i in 0..mu_hat.len() {
        let (a, b) = mu_hat.cell(i);
        let (a, b) = if sign > 0.0 { (a, b) } else { (-b, -a) };
        if a < 0.0 {
            return Err(EquilibriumError::Input(
                "squared measure must live on one half line".into(),
            ));
        }
        half.push((a.sqrt(), b.sqrt(), 0.5 * mu_hat.masses[i]));
    }
    half.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut cells: Vec<(f64, f64, f64)> = half.iter().rev().map(|&(a, b, m)| (-b, -a, m)).collect();
    cells.extend(half.iter().copied());
    // an atom at the origin is counted once
    let cells: Vec<(f64, f64, f64)> = {
        let mut out: Vec<(f64, f64, f64)> = Vec::new();
        for c in cells {
            match out.last_mut() {
                Some(l) if l.0 == 0.0 && l.1 == 0.0 && c.0 == 0.0 && c.1 == 0.0 => l.2 += c.2,
                _ => out.push(c),
            }
        }
        out
    };
    let grid = cells.iter().map(|c| 0.5 * (c.0 + c.1)).collect();
    let widths = cells.iter().map(|c| c.1 - c.0).collect();
    let masses: Vec<f64> = cells.iter().map(|c| c.2).collect();
    let total = masses.iter().sum();
    DiscreteMeasure::new(grid, masses, widths, total, axis)
}

/// Piecewise linear field sampled on a sorted grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampledField {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

impl SampledField {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self, EquilibriumError> {
        if grid.len() != values.len() || grid.len() < 2 {
            return Err(EquilibriumError::Input(
                "field needs at least two samples and matching lengths".into(),
            ));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(EquilibriumError::Input(
                "field grid must be strictly increasing".into(),
            ));
        }
        Ok(SampledField { grid, values })
    }

    pub fn from_fn(grid: Vec<f64>, f: impl Fn(f64) -> f64) -> Result<Self, EquilibriumError> {
        let values = grid.iter().map(|&x| f(x)).collect();
        Self::new(grid, values)
    }

    pub fn eval(&self, x: f64) -> Result<f64, EquilibriumError> {
        let g = &self.grid;
        let tol = 1e-12 * (g[g.len() - 1] - g[0]);
        if x < g[0] - tol || x > g[g.len() - 1] + tol {
            return Err(EquilibriumError::FieldRange(x));
        }
        let k = g.partition_point(|&v| v <= x).clamp(1, g.len() - 1);
        let t = (x - g[k - 1]) / (g[k] - g[k - 1]);
        Ok(self.values[k - 1] + t * (self.values[k] - self.values[k - 1]))
    }

    /// ∫ V dμ with a 3-point rule per cell.
    pub fn integrate(&self, mu: &DiscreteMeasure) -> Result<f64, EquilibriumError> {
        let (x, w) = gauss_legendre::<f64>(3);
        let mut acc = 0.0;
        for i in 0..mu.len() {
            let (a, b) = mu.cell(i);
            let avg = if a == b {
                self.eval(a)?
            } else {
                let mut s = 0.0;
                for (xi, wi) in x.iter().zip(&w) {
                    s += 0.5 * wi * self.eval(a + 0.5 * (b - a) * (xi + 1.0))?;
                }
                s
            };
            acc += mu.masses[i] * avg;
        }
        Ok(acc)
    }
}

/// V̂(u) = 2V(√|u|) on the squared grid of the nonnegative samples; for
/// `axis` = Imaginary the result lives on ℝ₋.
pub fn square_field(v: &SampledField, axis: Axis) -> Result<SampledField, EquilibriumError> {
    let mut pts: Vec<(f64, f64)> = v
        .grid
        .iter()
        .zip(&v.values)
        .filter(|(x, _)| **x >= 0.0)
        .map(|(&x, &f)| (x * x, 2.0 * f))
        .collect();
    if axis == Axis::Imaginary {
        pts = pts.into_iter().rev().map(|(u, f)| (-u, f)).collect();
    }
    SampledField::new(
        pts.iter().map(|p| p.0).collect(),
        pts.iter().map(|p| p.1).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_squares_to_one_atom() {
        let mu = DiscreteMeasure::atoms(vec![-2.0, 2.0], vec![0.5, 0.5], Axis::Real).unwrap();
        assert!(mu.symmetric);
        let sq = square_measure(&mu).unwrap();
        assert_eq!(sq.grid, vec![4.0]);
        assert_eq!(sq.masses, vec![1.0]);
        assert_eq!(sq.widths, vec![0.0]);
    }

    #[test]
    fn asymmetric_input_is_rejected() {
        let mu = DiscreteMeasure::atoms(vec![-2.0, 2.0], vec![0.4, 0.6], Axis::Real).unwrap();
        assert!(matches!(
            square_measure(&mu),
            Err(EquilibriumError::Symmetry(_))
        ));
    }

    #[test]
    fn semicircle_squares_to_marchenko_pastur() {
        // √(4−x²)/(2π) on [−2,2] ↦ √((4−u)/u)/(2π) on [0,4]
        let n = 400;
        let breaks: Vec<f64> = (0..=n)
            .map(|k| -2.0 * (std::f64::consts::PI * k as f64 / n as f64).cos())
            .collect();
        let cdf = |x: f64| {
            0.5 + (x * (4.0 - x * x).max(0.0).sqrt() / 4.0 + (x / 2.0).clamp(-1.0, 1.0).asin())
                / std::f64::consts::PI
        };
        let mu = DiscreteMeasure::from_cdf(&breaks, cdf, Axis::Real).unwrap();
        let sq = square_measure(&mu).unwrap();
        assert!((sq.total_mass - 1.0).abs() < 1e-12);
        // MP distribution function with ratio 1: F(u) = cdf(√u) − cdf(−√u)
        let mut cum = 0.0;
        for i in 0..sq.len() {
            cum += sq.masses[i];
            let u = sq.cell(i).1;
            if u < 1e-3 {
                // inside the geometric split of the cell at 0
                continue;
            }
            let want = cdf(u.sqrt()) - cdf(-u.sqrt());
            assert!((cum - want).abs() < 1e-12, "{u}");
        }
    }

    #[test]
    fn imaginary_axis_squares_to_negative_half_line() {
        let mu = DiscreteMeasure::with_cells(
            &[-1.0, -0.5, 0.0, 0.5, 1.0],
            vec![0.1, 0.2, 0.2, 0.1],
            Axis::Imaginary,
        )
        .unwrap();
        let sq = square_measure(&mu).unwrap();
        assert_eq!(sq.axis, Axis::Real);
        assert!(sq.grid.iter().all(|&x| x <= 0.0));
        assert!((sq.total_mass - 0.6).abs() < 1e-15);
        assert_eq!(sq.cell(0), (-1.0, -0.25));
        let near: f64 = sq
            .grid
            .iter()
            .zip(&sq.masses)
            .filter(|(x, _)| **x > -0.25)
            .map(|(_, m)| m)
            .sum();
        assert!((near - 0.4).abs() < 1e-15);
    }

    #[test]
    fn square_of_root_is_identity() {
        let mu = DiscreteMeasure::with_cells(
            &[-1.2, -0.4, -0.1, 0.1, 0.4, 1.2],
            vec![0.1, 0.2, 0.4, 0.2, 0.1],
            Axis::Real,
        )
        .unwrap();
        for axis in [Axis::Real, Axis::Imaginary] {
            let mut m = mu.clone();
            m.axis = axis;
            let target = square_measure(&m).unwrap();
            let root = symmetric_root(&target, axis).unwrap();
            assert!(root.symmetric);
            let back = square_measure(&root).unwrap();
            assert_eq!(back.len(), target.len());
            for i in 0..back.len() {
                assert!((back.grid[i] - target.grid[i]).abs() < 1e-14);
                assert!((back.widths[i] - target.widths[i]).abs() < 1e-14);
                assert!((back.masses[i] - target.masses[i]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn json_loader_rejects_unknown_keys_and_bad_mass() {
        let ok = r#"{"grid":[0,1,2],"masses":[0.25,0.5,0.25],"total_mass":1}"#;
        let m = DiscreteMeasure::from_json(ok).unwrap();
        assert_eq!(m.widths, vec![1.0, 1.0, 1.0]);
        assert!(
            DiscreteMeasure::from_json(r#"{"grid":[0],"masses":[1],"total_mass":1,"x":0}"#)
                .is_err()
        );
        assert!(
            DiscreteMeasure::from_json(r#"{"grid":[0,1],"masses":[0.5,0.4],"total_mass":1}"#)
                .is_err()
        );
        assert!(
            DiscreteMeasure::from_json(r#"{"grid":[1,0],"masses":[0.5,0.5],"total_mass":1}"#)
                .is_err()
        );
    }

    #[test]
    fn field_interpolation_and_squaring() {
        let v =
            SampledField::from_fn((-10..=10).map(|k| k as f64 * 0.2).collect(), |x| x * x).unwrap();
        assert!((v.eval(0.3).unwrap() - 0.1).abs() < 1e-15);
        assert!(v.eval(2.5).is_err());
        let vh = square_field(&v, Axis::Real).unwrap();
        // 2 V(√u) = 2u
        assert!((vh.eval(1.44).unwrap() - 2.88).abs() < 1e-12);
    }
}
