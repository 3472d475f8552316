//! Discretized initial data: cells of a Cauchy slice carrying their induced
//! area, mean curvature and (optionally) the norm of the second fundamental
//! form. All fields are constant on a cell, so every integral against the
//! area measure is a weighted cell sum.

use std::collections::HashSet;
use std::io::{BufRead, BufReader, Read};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::pairwise_sum_by;

/// Relative slack allowed in the pointwise inequality `|H| ≤ n |K|`.
pub const CONSISTENCY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub id: String,
    /// Induced n-area of the cell.
    pub weight: f64,
    #[serde(rename = "H")]
    pub mean_curvature: f64,
    #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
    pub k_norm: Option<f64>,
}

impl Cell {
    pub fn new(id: impl Into<String>, weight: f64, mean_curvature: f64) -> Self {
        Self {
            id: id.into(),
            weight,
            mean_curvature,
            k_norm: None,
        }
    }

    pub fn with_k(mut self, k_norm: f64) -> Self {
        self.k_norm = Some(k_norm);
        self
    }

    pub fn h_plus(&self) -> f64 {
        self.mean_curvature.max(0.0)
    }

    fn validate(&self, n: u32) -> std::result::Result<(), String> {
        if !(self.weight.is_finite() && self.weight > 0.0) {
            return Err(format!(
                "cell '{}': weight {} must be positive",
                self.id, self.weight
            ));
        }
        if !self.mean_curvature.is_finite() {
            return Err(format!("cell '{}': mean curvature is not finite", self.id));
        }
        if let Some(k) = self.k_norm {
            if !(k.is_finite() && k >= 0.0) {
                return Err(format!("cell '{}': |K| = {k} must be >= 0", self.id));
            }
            let cap = f64::from(n) * k;
            if self.mean_curvature.abs() > cap * (1.0 + CONSISTENCY_TOL) {
                return Err(format!(
                    "cell '{}': |H| = {} exceeds n|K| = {cap}",
                    self.id,
                    self.mean_curvature.abs()
                ));
            }
        }
        Ok(())
    }
}

/// Which per-cell quantity a norm is taken of.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    MeanCurvature,
    PositiveMeanCurvature,
    KNorm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialDataSet {
    pub n: u32,
    #[serde(default)]
    pub label: String,
    pub cells: Vec<Cell>,
}

impl InitialDataSet {
    /// Builds a validated data set. The set must carry positive total area.
    pub fn new(n: u32, cells: Vec<Cell>, label: impl Into<String>) -> Result<Self> {
        let set = Self {
            n,
            label: label.into(),
            cells,
        };
        set.validate()?;
        if set.cells.is_empty() {
            return Err(Error::parse(None, "data set has no cells"));
        }
        Ok(set)
    }

    fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::domain(format!(
                "dimension n = {} must be at least 2",
                self.n
            )));
        }
        let mut seen = HashSet::with_capacity(self.cells.len());
        for (i, cell) in self.cells.iter().enumerate() {
            cell.validate(self.n)
                .map_err(|m| Error::parse(Some(i + 1), m))?;
            if !seen.insert(cell.id.as_str()) {
                return Err(Error::parse(
                    Some(i + 1),
                    format!("duplicate cell id '{}'", cell.id),
                ));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let set: Self = serde_json::from_str(text)?;
        set.validate()?;
        Ok(set)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn total_area(&self) -> f64 {
        pairwise_sum_by(&self.cells, |c| c.weight)
    }

    pub fn has_k(&self) -> bool {
        self.cells.iter().all(|c| c.k_norm.is_some())
    }

    /// Per-cell positive part of the mean curvature.
    pub fn h_plus(&self) -> Vec<f64> {
        self.cells.iter().map(Cell::h_plus).collect()
    }

    pub fn max_h_plus(&self) -> f64 {
        self.cells.iter().map(Cell::h_plus).fold(0.0, f64::max)
    }

    fn field_value(&self, cell: &Cell, field: Field) -> Result<f64> {
        match field {
            Field::MeanCurvature => Ok(cell.mean_curvature.abs()),
            Field::PositiveMeanCurvature => Ok(cell.h_plus()),
            Field::KNorm => cell
                .k_norm
                .ok_or_else(|| Error::MissingField(format!("|K| missing on cell '{}'", cell.id))),
        }
    }

    /// `∫ |field|ᵖ dμ`, the p-th power of the Lᵖ norm. `p = 0` gives the area.
    pub fn power_integral(&self, field: Field, p: f64) -> Result<f64> {
        let mut terms = Vec::with_capacity(self.cells.len());
        for cell in &self.cells {
            let v = self.field_value(cell, field)?;
            let term = if p == 0.0 { 1.0 } else { v.powf(p) };
            terms.push(term * cell.weight);
        }
        Ok(crate::numerics::pairwise_sum(&terms))
    }

    /// Lᵖ norm `(Σ |field|ᵖ w)^{1/p}` for `p ≥ 1`.
    pub fn lp_norm(&self, field: Field, p: f64) -> Result<f64> {
        if !(p >= 1.0) || !p.is_finite() {
            return Err(Error::domain(format!("norm exponent p = {p} must be >= 1")));
        }
        Ok(self.power_integral(field, p)?.powf(1.0 / p))
    }

    /// Sub-data-set of the cells accepted by `select`; may be empty.
    pub fn restrict(&self, select: impl Fn(&Cell) -> bool) -> Self {
        Self {
            n: self.n,
            label: self.label.clone(),
            cells: self.cells.iter().filter(|c| select(c)).cloned().collect(),
        }
    }

    /// Restriction to an explicit list of cell ids.
    pub fn restrict_ids<S: AsRef<str>>(&self, ids: &[S]) -> Self {
        let wanted: HashSet<&str> = ids.iter().map(AsRef::as_ref).collect();
        self.restrict(|c| wanted.contains(c.id.as_str()))
    }
}

/// Reads the `id,weight,H,K` CSV format.
///
/// The dimension comes from `n` when given, otherwise from a `# n=<int>`
/// line; a conflicting pair is rejected. Other `#` lines are ignored.
pub fn load_initial_data<R: Read>(
    source: R,
    n: Option<u32>,
    label: &str,
) -> Result<InitialDataSet> {
    let mut body = String::new();
    let mut sidecar = None;
    for (i, line) in BufReader::new(source).lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if let Some(comment) = trimmed.strip_prefix('#') {
            if let Some(value) = comment.trim().strip_prefix("n=") {
                let parsed = value.trim().parse::<u32>().map_err(|_| {
                    Error::parse(Some(i + 1), format!("bad dimension line '{trimmed}'"))
                })?;
                sidecar = Some(parsed);
            }
            // keep line numbering aligned for error messages
            body.push('\n');
            continue;
        }
        body.push_str(&line);
        body.push('\n');
    }
    let n = match (n, sidecar) {
        (Some(a), Some(b)) if a != b => {
            return Err(Error::parse(
                None,
                format!("dimension {a} conflicts with file header n={b}"),
            ))
        }
        (Some(a), _) | (None, Some(a)) => a,
        (None, None) => {
            return Err(Error::parse(
                None,
                "dimension not given (no '# n=' line or flag)",
            ))
        }
    };

    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(body.as_bytes());
    let headers = reader.headers()?.clone();
    let expected = ["id", "weight", "H"];
    if headers.len() < 3 || headers.len() > 4 || headers.iter().zip(expected).any(|(h, e)| h != e) {
        return Err(Error::parse(
            Some(1),
            format!("expected header id,weight,H[,K], got {headers:?}"),
        ));
    }
    if headers.len() == 4 && &headers[3] != "K" {
        return Err(Error::parse(
            Some(1),
            format!("fourth column must be K, got '{}'", &headers[3]),
        ));
    }

    let mut cells = Vec::new();
    for record in reader.records() {
        let record = record?;
        let row = record.position().map(|p| p.line() as usize);
        if record.len() < 3 || record.len() > 4 {
            return Err(Error::parse(
                row,
                format!("expected 3 or 4 fields, got {}", record.len()),
            ));
        }
        let num = |idx: usize, name: &str| -> Result<f64> {
            record[idx].parse::<f64>().map_err(|_| {
                Error::parse(row, format!("{name} '{}' is not a number", &record[idx]))
            })
        };
        let mut cell = Cell::new(&record[0], num(1, "weight")?, num(2, "H")?);
        if record.len() == 4 && !record[3].is_empty() {
            cell.k_norm = Some(num(3, "K")?);
        }
        cell.validate(n).map_err(|m| Error::parse(row, m))?;
        cells.push(cell);
    }
    InitialDataSet::new(n, cells, label).map_err(|e| match e {
        // row numbers from `new` are cell indices; report file lines instead
        Error::Parse { message, .. } => Error::parse(None, message),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn load(text: &str) -> Result<InitialDataSet> {
        load_initial_data(text.as_bytes(), None, "test")
    }

    #[test]
    fn single_row() {
        let set = load("# n=3\nid,weight,H,K\nc0,1.0,3.0,1.0\n").unwrap();
        assert_eq!(set.cells.len(), 1);
        assert_eq!(set.total_area(), 1.0);
        assert_eq!(set.cells[0].k_norm, Some(1.0));
    }

    #[test]
    fn optional_k_column() {
        let set = load("# n=2\nid,weight,H,K\na,0.5,1.0,\nb,0.5,-1.0,2\n").unwrap();
        assert_eq!(set.cells[0].k_norm, None);
        assert_eq!(set.cells[1].k_norm, Some(2.0));
        assert!(!set.has_k());
        let set = load("# n=2\nid,weight,H\na,0.5,1.0\n").unwrap();
        assert_eq!(set.cells[0].k_norm, None);
    }

    #[test]
    fn negative_weight_is_rejected_with_row() {
        let err = load("# n=3\nid,weight,H,K\nc0,-1.0,3.0,1.0\n").unwrap_err();
        match err {
            Error::Parse { row, message } => {
                assert_eq!(row, Some(3));
                assert!(message.contains("weight"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn inconsistent_h_and_k() {
        // 4 > 3·1
        let err = load("# n=3\nid,weight,H,K\nc0,1.0,4.0,1.0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
        assert!(err.to_string().contains("exceeds"));
        // right at the boundary is fine
        assert!(load("# n=3\nid,weight,H,K\nc0,1.0,-3.0,1.0\n").is_ok());
    }

    #[test]
    fn malformed_inputs() {
        assert!(load("# n=3\nid,weight,H,K\nc0,abc,3.0,1.0\n").is_err());
        assert!(load("# n=3\nid,weight,X\nc0,1,3\n").is_err());
        assert!(load("id,weight,H\nc0,1,3\n").is_err());
        assert!(load("# n=3\nid,weight,H\na,1,0\na,1,0\n").is_err());
        assert!(load("# n=3\nid,weight,H\n").is_err());
        assert!(load_initial_data("# n=3\nid,weight,H\na,1,0\n".as_bytes(), Some(4), "x").is_err());
        assert!(load_initial_data("id,weight,H\na,1,0\n".as_bytes(), Some(4), "x").is_ok());
    }

    #[test]
    fn json_round_trip() {
        let set = load("# n=3\nid,weight,H,K\na,0.25,1.5,0.6\nb,0.75,-2,\n").unwrap();
        let back = InitialDataSet::from_json(&set.to_json().unwrap()).unwrap();
        assert_eq!(set, back);
    }

    #[test]
    fn h_plus_examples() {
        let cells = vec![
            Cell::new("a", 1.0, 3.0),
            Cell::new("b", 1.0, -2.0),
            Cell::new("c", 1.0, 0.0),
        ];
        let set = InitialDataSet::new(3, cells, "").unwrap();
        assert_eq!(set.h_plus(), vec![3.0, 0.0, 0.0]);
        let neg = InitialDataSet::new(
            3,
            vec![Cell::new("a", 1.0, -1.0), Cell::new("b", 2.0, -0.5)],
            "",
        )
        .unwrap();
        assert_eq!(neg.h_plus(), vec![0.0, 0.0]);
        let one = InitialDataSet::new(3, vec![Cell::new("a", 1.0, 5.0)], "").unwrap();
        assert_eq!(one.h_plus(), vec![5.0]);
    }

    #[test]
    fn lp_norm_examples() {
        // constant H = β on area A: β A^{1/p}
        let (beta, p) = (1.7, 2.5);
        let cells = vec![
            Cell::new("a", 0.3, beta),
            Cell::new("b", 1.1, beta),
            Cell::new("c", 0.6, beta),
        ];
        let set = InitialDataSet::new(3, cells, "").unwrap();
        let direct = (beta.powf(p) * 0.3 + beta.powf(p) * 1.1 + beta.powf(p) * 0.6).powf(1.0 / p);
        let closed = beta * 2.0f64.powf(1.0 / p);
        let got = set.lp_norm(Field::MeanCurvature, p).unwrap();
        assert!((got - direct).abs() < 1e-14);
        assert!((got - closed).abs() < 1e-14);

        let zeros = InitialDataSet::new(3, vec![Cell::new("a", 2.0, 0.0)], "").unwrap();
        assert_eq!(zeros.lp_norm(Field::MeanCurvature, 3.0).unwrap(), 0.0);
        assert!(matches!(
            zeros.lp_norm(Field::KNorm, 3.0),
            Err(Error::MissingField(_))
        ));
        assert!(zeros.lp_norm(Field::MeanCurvature, 0.5).is_err());
    }

    #[test]
    fn restrict_examples() {
        let cells = vec![Cell::new("a", 0.25, 1.0), Cell::new("b", 0.75, 2.0)];
        let set = InitialDataSet::new(3, cells, "").unwrap();
        assert_eq!(set.restrict(|_| true), set);
        let none = set.restrict(|_| false);
        assert!(none.is_empty());
        assert_eq!(none.total_area(), 0.0);
        assert_eq!(set.restrict_ids(&["a"]).total_area(), 0.25);
    }

    fn arb_set() -> impl Strategy<Value = InitialDataSet> {
        (
            2u32..6,
            prop::collection::vec((0.01f64..3.0, -5.0f64..5.0, 0.0f64..2.0), 1..30),
        )
            .prop_map(|(n, raw)| {
                let cells = raw
                    .into_iter()
                    .enumerate()
                    .map(|(i, (w, h, u))| {
                        Cell::new(format!("c{i}"), w, h).with_k(h.abs() / f64::from(n) * (1.0 + u))
                    })
                    .collect();
                InitialDataSet::new(n, cells, "arb").unwrap()
            })
    }

    fn normalized(set: &InitialDataSet) -> InitialDataSet {
        let total = set.total_area();
        let mut out = set.clone();
        for c in &mut out.cells {
            c.weight /= total;
        }
        out
    }

    proptest! {
        #[test]
        fn lp_monotone_on_probability_measure(set in arb_set(), p in 1.0f64..6.0, dq in 0.0f64..6.0) {
            let set = normalized(&set);
            let lo = set.lp_norm(Field::MeanCurvature, p).unwrap();
            let hi = set.lp_norm(Field::MeanCurvature, p + dq).unwrap();
            prop_assert!(lo <= hi * (1.0 + 1e-12) + 1e-300);
        }

        #[test]
        fn h_controlled_by_k(set in arb_set()) {
            let n = f64::from(set.n);
            let lhs = set.power_integral(Field::PositiveMeanCurvature, n).unwrap();
            let rhs = n.powf(n) * set.power_integral(Field::KNorm, n).unwrap();
            prop_assert!(lhs <= rhs * (1.0 + 1e-9));
        }

        #[test]
        fn restrict_idempotent_and_additive(set in arb_set(), mask in prop::collection::vec(0u8..3, 30)) {
            let part = |k: u8| set.restrict(|c| {
                let i: usize = c.id[1..].parse().unwrap();
                mask[i] == k
            });
            let parts: Vec<_> = (0..3).map(part).collect();
            let once = &parts[0];
            prop_assert_eq!(once.restrict(|_| true), once.clone());
            let sum: f64 = parts.iter().map(|p| p.total_area()).sum();
            prop_assert!((sum - set.total_area()).abs() <= 1e-12 * set.total_area());
        }
    }
}
