use serde::Serialize;

/// Per-mirror which-path weights, in mirror declaration order.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct WeightTable {
    pub entries: Vec<(String, f64)>,
    /// Squared amplitude removed by blocks and discards (quantum engine only).
    pub lost_norm: f64,
    /// Set when two mirrors share a frequency, so their peaks cannot be separated.
    pub non_separable: bool,
}

impl WeightTable {
    pub fn new(entries: Vec<(String, f64)>) -> Self {
        WeightTable {
            entries,
            ..Default::default()
        }
    }

    pub fn get(&self, label: &str) -> Option<f64> {
        self.entries
            .iter()
            .find(|(l, _)| l == label)
            .map(|(_, w)| *w)
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(l, _)| l.as_str())
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|(_, w)| w).sum()
    }

    /// Weights scaled to unit sum; an all-zero table stays all-zero.
    pub fn normalized(&self) -> WeightTable {
        let total = self.total();
        let scale = if total > 0.0 { 1.0 / total } else { 0.0 };
        WeightTable {
            entries: self
                .entries
                .iter()
                .map(|(l, w)| (l.clone(), w * scale))
                .collect(),
            ..self.clone()
        }
    }
}
