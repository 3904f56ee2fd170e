use crate::binopt::BinaryVector;
use crate::error::{check_len, Error, Result};

/// Binary-encoded inputs with real responses. All inputs share one width.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    inputs: Vec<BinaryVector>,
    targets: Vec<f64>,
}

impl Dataset {
    pub fn new(inputs: Vec<BinaryVector>, targets: Vec<f64>) -> Result<Self> {
        check_len(inputs.len(), targets.len())?;
        if let Some(first) = inputs.first() {
            let width = first.len();
            if let Some(bad) = inputs.iter().find(|x| x.len() != width) {
                return Err(Error::Dimension {
                    expected: width,
                    got: bad.len(),
                });
            }
        }
        if let Some(pos) = targets.iter().position(|y| !y.is_finite()) {
            return Err(Error::validation(format!("target {pos} is not finite")));
        }
        Ok(Dataset { inputs, targets })
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (BinaryVector, f64)>) -> Result<Self> {
        let (inputs, targets) = pairs.into_iter().unzip();
        Dataset::new(inputs, targets)
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    /// Input width, or `None` for an empty dataset.
    pub fn width(&self) -> Option<usize> {
        self.inputs.first().map(|x| x.len())
    }

    pub fn inputs(&self) -> &[BinaryVector] {
        &self.inputs
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn iter(&self) -> impl Iterator<Item = (&BinaryVector, f64)> {
        self.inputs.iter().zip(self.targets.iter().copied())
    }

    pub fn push(&mut self, x: BinaryVector, y: f64) -> Result<()> {
        if let Some(w) = self.width() {
            check_len(w, x.len())?;
        }
        if !y.is_finite() {
            return Err(Error::validation("target is not finite"));
        }
        self.inputs.push(x);
        self.targets.push(y);
        Ok(())
    }

    /// Appends the same trailing bits to every input.
    pub fn with_suffix(&self, suffix: &[u8]) -> Dataset {
        Dataset {
            inputs: self.inputs.iter().map(|x| x.concat(suffix)).collect(),
            targets: self.targets.clone(),
        }
    }

    pub fn contains_input(&self, x: &[u8]) -> bool {
        self.inputs.iter().any(|v| &v[..] == x)
    }
}
