use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::activation::ActivationSpec;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    /// `1/2 (y - f)^2`
    Mse,
    /// `log(1 + exp(-y f))` with labels in {+1, -1}
    Bce,
}

/// Examples `(x_i, y_i)` with `x_i` stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dim: usize,
    inputs: Vec<f64>,
    targets: Vec<f64>,
}

impl Dataset {
    pub fn new(dim: usize, inputs: Vec<f64>, targets: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidProblem("input dimension must be positive".into()));
        }
        if inputs.len() != dim * targets.len() {
            return Err(Error::DimensionMismatch { expected: dim * targets.len(), got: inputs.len() });
        }
        if inputs.iter().chain(&targets).any(|v| !v.is_finite()) {
            return Err(Error::InvalidProblem("dataset contains non-finite values".into()));
        }
        Ok(Self { dim, inputs, targets })
    }

    pub fn from_rows(rows: &[(Vec<f64>, f64)]) -> Result<Self> {
        let dim = rows.first().map(|r| r.0.len()).ok_or(Error::EmptyDataset)?;
        let mut inputs = Vec::with_capacity(dim * rows.len());
        for (x, _) in rows {
            if x.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: x.len() });
            }
            inputs.extend_from_slice(x);
        }
        Self::new(dim, inputs, rows.iter().map(|r| r.1).collect())
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn x(&self, i: usize) -> &[f64] {
        &self.inputs[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    pub fn y(&self, i: usize) -> f64 {
        self.targets[i]
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn max_input_norm(&self) -> f64 {
        (0..self.len()).map(|i| self.x(i).iter().map(|v| v * v).sum::<f64>().sqrt()).fold(0.0, f64::max)
    }

    pub fn max_abs_target(&self) -> f64 {
        self.targets.iter().fold(0.0, |m, y| m.max(y.abs()))
    }

    /// Reads a CSV with header `x_0,...,x_{d-1},y`.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        let dim = headers
            .len()
            .checked_sub(1)
            .filter(|d| *d > 0)
            .ok_or_else(|| Error::InvalidProblem("dataset header must list x_0..x_{d-1} and y".into()))?;
        for (j, h) in headers.iter().take(dim).enumerate() {
            if h != format!("x_{j}") {
                return Err(Error::InvalidProblem(format!("unexpected column `{h}`, wanted `x_{j}`")));
            }
        }
        if &headers[dim] != "y" {
            return Err(Error::InvalidProblem("last column must be `y`".into()));
        }
        let mut inputs = Vec::new();
        let mut targets = Vec::new();
        for record in rdr.records() {
            let record = record?;
            for (j, field) in record.iter().enumerate() {
                let v: f64 = field.parse().map_err(|_| Error::InvalidProblem(format!("cannot parse `{field}` as a number")))?;
                if j < dim {
                    inputs.push(v);
                } else {
                    targets.push(v);
                }
            }
        }
        Self::new(dim, inputs, targets)
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_csv_reader(std::fs::File::open(path)?)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let header: Vec<String> = (0..self.dim).map(|j| format!("x_{j}")).chain(["y".to_string()]).collect();
        writeln!(out, "{}", header.join(","))?;
        for i in 0..self.len() {
            for v in self.x(i) {
                write!(out, "{v},")?;
            }
            writeln!(out, "{}", self.y(i))?;
        }
        Ok(())
    }
}

/// Optional a-priori data bounds. Missing bounds are measured from the data;
/// supplied bounds must dominate it.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct DataBounds {
    pub input: Option<f64>,
    pub target: Option<f64>,
}

/// A depth-2 network with fixed outer layer, its training set, loss and
/// regularization weight.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    activation: ActivationSpec,
    outer: Vec<f64>,
    data: Dataset,
    loss: LossKind,
    lambda: f64,
    bound_x: f64,
    bound_y: f64,
}

impl ProblemSpec {
    pub fn new(
        activation: ActivationSpec,
        loss: LossKind,
        outer: Vec<f64>,
        data: Dataset,
        lambda: f64,
        bounds: DataBounds,
    ) -> Result<Self> {
        if outer.is_empty() {
            return Err(Error::InvalidProblem("width must be at least 1".into()));
        }
        if outer.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidProblem("outer weights must be finite".into()));
        }
        if data.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidProblem(format!("lambda must be positive, got {lambda}")));
        }
        if loss == LossKind::Bce {
            if let Some(y) = data.targets().iter().find(|y| **y != 1.0 && **y != -1.0) {
                return Err(Error::InvalidProblem(format!("classification label {y} is not +1 or -1")));
            }
        }
        let bound_x = dominating_bound(bounds.input, data.max_input_norm(), "input norm")?;
        let bound_y = match loss {
            LossKind::Mse => dominating_bound(bounds.target, data.max_abs_target(), "target magnitude")?,
            LossKind::Bce => 0.0,
        };
        Ok(Self { activation, outer, data, loss, lambda, bound_x, bound_y })
    }

    /// Returns a copy with a different regularization weight.
    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidProblem(format!("lambda must be positive, got {lambda}")));
        }
        Ok(Self { lambda, ..self.clone() })
    }

    /// The loss `(lambda/2) ||W||^2`: outer weights are zero so the data term
    /// vanishes identically. A single placeholder example keeps the dataset
    /// non-empty.
    pub fn pure_regularizer(width: usize, dim: usize, lambda: f64) -> Result<Self> {
        let data = Dataset::new(dim, vec![0.0; dim], vec![0.0])?;
        Self::new(ActivationSpec::tanh(), LossKind::Mse, vec![0.0; width], data, lambda, DataBounds::default())
    }

    pub fn activation(&self) -> &ActivationSpec {
        &self.activation
    }

    pub fn outer(&self) -> &[f64] {
        &self.outer
    }

    pub fn width(&self) -> usize {
        self.outer.len()
    }

    pub fn input_dim(&self) -> usize {
        self.data.dim()
    }

    /// Number of trainable parameters, `p * d`.
    pub fn param_count(&self) -> usize {
        self.width() * self.input_dim()
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    pub fn n(&self) -> usize {
        self.data.len()
    }

    pub fn loss_kind(&self) -> LossKind {
        self.loss
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn bound_x(&self) -> f64 {
        self.bound_x
    }

    /// Target bound; zero for classification where it is unused.
    pub fn bound_y(&self) -> f64 {
        self.bound_y
    }

    pub fn outer_norm(&self) -> f64 {
        self.outer.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    pub fn outer_max_abs(&self) -> f64 {
        self.outer.iter().fold(0.0, |m, a| m.max(a.abs()))
    }

    /// `<a, c>` with `c = sigma(0)` broadcast.
    pub fn outer_dot_bias(&self) -> f64 {
        self.outer.iter().sum::<f64>() * self.activation.at_zero
    }
}

fn dominating_bound(supplied: Option<f64>, observed: f64, what: &str) -> Result<f64> {
    match supplied {
        None => Ok(observed),
        Some(b) if b.is_finite() && b >= observed => Ok(b),
        Some(b) => Err(Error::InvalidProblem(format!("supplied {what} bound {b} is below the data maximum {observed}"))),
    }
}
