use serde::Serialize;

/// Outcome of checking `lhs[i] <= rhs[i]` at a list of sample points.
///
/// `max_violation` is the largest `lhs[i] - rhs[i]` (negative when every
/// sample has slack); the check passes when it does not exceed `tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub name: String,
    pub grid: Vec<f64>,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    pub tolerance: f64,
    pub max_violation: f64,
    pub pass: bool,
}

impl BoundReport {
    pub fn new(name: &str, grid: Vec<f64>, lhs: Vec<f64>, rhs: Vec<f64>, tolerance: f64) -> Self {
        assert_eq!(grid.len(), lhs.len());
        assert_eq!(grid.len(), rhs.len());
        let max_violation = lhs
            .iter()
            .zip(&rhs)
            .map(|(l, r)| {
                if l.is_nan() || r.is_nan() {
                    f64::INFINITY
                } else {
                    l - r
                }
            })
            .fold(f64::NEG_INFINITY, f64::max);
        BoundReport {
            name: name.to_string(),
            grid,
            lhs,
            rhs,
            tolerance,
            max_violation,
            pass: max_violation <= tolerance,
        }
    }

    /// Index of the sample with the largest violation.
    pub fn worst(&self) -> Option<usize> {
        (0..self.grid.len())
            .max_by(|&a, &b| (self.lhs[a] - self.rhs[a]).total_cmp(&(self.lhs[b] - self.rhs[b])))
    }
}
