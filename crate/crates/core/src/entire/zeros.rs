use serde::{Deserialize, Serialize};

use super::EntireError;

/// Whether a zero list is the complete zero set of a polynomial or a finite
/// sample of an infinite family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Extent {
    Finite,
    Truncated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `n^2`
    NSquared,
    /// `2^n`
    Lacunary2n,
    /// `n`, a truncated sine-like zero set
    Integers,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Signs {
    #[default]
    Both,
    Plus,
}

/// Strictly increasing list of simple, nonzero, finite real zeros.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroSet {
    zeros: Vec<f64>,
    note: String,
    extent: Extent,
}

impl ZeroSet {
    pub fn new(mut zeros: Vec<f64>, note: &str, extent: Extent) -> Result<Self, EntireError> {
        if zeros.is_empty() {
            return Err(EntireError::InvalidZeros("zero set is empty".to_string()));
        }
        if let Some(&z) = zeros.iter().find(|z| !z.is_finite()) {
            return Err(EntireError::InvalidZeros(format!("non-finite zero {z}")));
        }
        if zeros.contains(&0.0) {
            return Err(EntireError::InvalidZeros(
                "0 cannot be a zero (the product is normalised at the origin)".to_string(),
            ));
        }
        zeros.sort_by(f64::total_cmp);
        if let Some(w) = zeros.windows(2).find(|w| w[0] == w[1]) {
            return Err(EntireError::InvalidZeros(format!("repeated zero {}", w[0])));
        }
        Ok(ZeroSet {
            zeros,
            note: note.to_string(),
            extent,
        })
    }

    /// Explicit list: the complete zero set of a polynomial.
    pub fn finite(zeros: Vec<f64>) -> Result<Self, EntireError> {
        Self::new(zeros, "explicit finite zero set", Extent::Finite)
    }

    /// The first `n_max` members of a family, on one or both sides.
    pub fn family(family: Family, n_max: u32, signs: Signs) -> Result<Self, EntireError> {
        if n_max == 0 {
            return Err(EntireError::InvalidZeros(
                "n_max must be at least 1".to_string(),
            ));
        }
        let term = |n: u32| -> f64 {
            match family {
                Family::NSquared => f64::from(n) * f64::from(n),
                Family::Lacunary2n => 2f64.powi(n as i32),
                Family::Integers => f64::from(n),
            }
        };
        let mut zeros: Vec<f64> = (1..=n_max).map(term).collect();
        if signs == Signs::Both {
            zeros.extend((1..=n_max).map(|n| -term(n)));
        }
        let name = match family {
            Family::NSquared => "n^2",
            Family::Lacunary2n => "2^n",
            Family::Integers => "n",
        };
        let side = if signs == Signs::Both { "±" } else { "+" };
        Self::new(
            zeros,
            &format!("{side}{name}, n <= {n_max}"),
            Extent::Truncated,
        )
    }

    pub fn zeros(&self) -> &[f64] {
        &self.zeros
    }

    pub fn len(&self) -> usize {
        self.zeros.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zeros.is_empty()
    }

    pub fn note(&self) -> &str {
        &self.note
    }

    pub fn extent(&self) -> Extent {
        self.extent
    }

    pub fn index_of(&self, lambda: f64) -> Option<usize> {
        self.zeros.binary_search_by(|z| z.total_cmp(&lambda)).ok()
    }

    /// Indices ordered by increasing `|λ|`, ties broken negative first.
    pub fn order_by_modulus(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.zeros.len()).collect();
        idx.sort_by(|&a, &b| {
            self.zeros[a]
                .abs()
                .total_cmp(&self.zeros[b].abs())
                .then(self.zeros[a].total_cmp(&self.zeros[b]))
        });
        idx
    }

    pub fn max_modulus(&self) -> f64 {
        self.zeros.iter().fold(0.0, |m, z| m.max(z.abs()))
    }

    pub fn min_modulus(&self) -> f64 {
        self.zeros.iter().fold(f64::INFINITY, |m, z| m.min(z.abs()))
    }

    /// The zero set translated by `-shift`.
    pub fn translated(&self, shift: f64) -> Result<Self, EntireError> {
        Self::new(
            self.zeros.iter().map(|z| z - shift).collect(),
            &format!("{} translated by {}", self.note, -shift),
            self.extent,
        )
    }

    /// Sub-collection at the given indices.
    pub fn subset(&self, indices: &[usize], note: &str) -> Result<Self, EntireError> {
        Self::new(
            indices.iter().map(|&i| self.zeros[i]).collect(),
            note,
            self.extent,
        )
    }
}

/// Number of zeros with `|λ| < radius` and the sum of their reciprocals.
pub fn counting(zs: &ZeroSet, radius: f64) -> (usize, f64) {
    let inside: Vec<f64> = zs
        .zeros
        .iter()
        .copied()
        .filter(|z| z.abs() < radius)
        .collect();
    let mut sum = crate::numerics::NeumaierSum::new();
    for z in &inside {
        sum.add(1.0 / z);
    }
    (inside.len(), sum.value())
}

/// JSON description of a zero set: either an explicit list or a family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZeroSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeros: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signs: Option<Signs>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a0: Option<f64>,
}

impl ZeroSpec {
    pub fn from_json(text: &str) -> Result<Self, EntireError> {
        serde_json::from_str(text).map_err(|e| EntireError::InvalidZeros(e.to_string()))
    }

    pub fn a0(&self) -> f64 {
        self.a0.unwrap_or(1.0)
    }

    pub fn build(&self) -> Result<ZeroSet, EntireError> {
        let signs = self.signs.unwrap_or_default();
        match (self.family.as_deref(), &self.zeros) {
            (None, Some(zeros)) => ZeroSet::finite(zeros.clone()),
            (Some("custom"), Some(zeros)) => ZeroSet::new(
                zeros.clone(),
                "custom sample of an infinite zero set",
                Extent::Truncated,
            ),
            (Some(name), None) => {
                let family = match name {
                    "n_squared" => Family::NSquared,
                    "lacunary_2n" => Family::Lacunary2n,
                    "integers" => Family::Integers,
                    "custom" => {
                        return Err(EntireError::InvalidZeros(
                            "family `custom` needs a `zeros` list".to_string(),
                        ))
                    }
                    other => {
                        return Err(EntireError::InvalidZeros(format!(
                            "unknown family `{other}`"
                        )))
                    }
                };
                let n_max = self.n_max.ok_or_else(|| {
                    EntireError::InvalidZeros(format!("family `{name}` needs `n_max`"))
                })?;
                ZeroSet::family(family, n_max, signs)
            }
            (Some(name), Some(_)) => Err(EntireError::InvalidZeros(format!(
                "family `{name}` does not take an explicit `zeros` list"
            ))),
            (None, None) => Err(EntireError::InvalidZeros(
                "expected `zeros` or `family`".to_string(),
            )),
        }
    }
}
