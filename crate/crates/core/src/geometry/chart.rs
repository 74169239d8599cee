use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{check_dim, Error, Result};

/// A named admissibility predicate; `holds(x)` is true away from the singular set.
#[derive(Clone)]
pub struct Exclusion {
    pub name: String,
    holds: Arc<dyn Fn(&[f64]) -> bool + Send + Sync>,
}

impl Exclusion {
    pub fn new(name: impl Into<String>, holds: impl Fn(&[f64]) -> bool + Send + Sync + 'static) -> Self {
        Exclusion {
            name: name.into(),
            holds: Arc::new(holds),
        }
    }

    pub fn holds(&self, x: &[f64]) -> bool {
        (self.holds)(x)
    }
}

impl fmt::Debug for Exclusion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Exclusion({})", self.name)
    }
}

#[derive(Clone, Debug)]
pub struct Chart {
    pub name: String,
    pub coord_names: Vec<String>,
    pub sample_box: Vec<(f64, f64)>,
    pub exclusions: Vec<Exclusion>,
}

impl Chart {
    pub fn new(name: impl Into<String>, coord_names: Vec<String>, sample_box: Vec<(f64, f64)>) -> Result<Self> {
        check_dim(coord_names.len(), sample_box.len())?;
        if let Some((lo, hi)) = sample_box.iter().find(|(lo, hi)| !(lo < hi)) {
            return Err(Error::Config(format!("empty sampling interval [{lo}, {hi}]")));
        }
        Ok(Chart {
            name: name.into(),
            coord_names,
            sample_box,
            exclusions: Vec::new(),
        })
    }

    pub fn with_exclusion(mut self, e: Exclusion) -> Self {
        self.exclusions.push(e);
        self
    }

    pub fn dim(&self) -> usize {
        self.coord_names.len()
    }

    pub fn in_box(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter().zip(&self.sample_box).all(|(v, (lo, hi))| lo <= v && v <= hi)
    }

    /// Name of the first exclusion violated at `x`, if any.
    pub fn violated(&self, x: &[f64]) -> Option<&str> {
        self.exclusions
            .iter()
            .find(|e| !e.holds(x))
            .map(|e| e.name.as_str())
    }

    pub fn point(&self, coords: Vec<f64>) -> Result<ChartPoint> {
        check_dim(self.dim(), coords.len())?;
        Ok(ChartPoint::new(&self.name, coords))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChartPoint {
    pub chart_id: String,
    pub coords: Vec<f64>,
}

impl ChartPoint {
    pub fn new(chart_id: &str, coords: Vec<f64>) -> Self {
        ChartPoint {
            chart_id: chart_id.to_string(),
            coords,
        }
    }
}
