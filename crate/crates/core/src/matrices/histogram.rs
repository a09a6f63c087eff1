use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Probability histogram on fixed edges, with out-of-range mass kept apart.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    /// `mass[i]` covers `[edges[i], edges[i+1])`; the last bin is closed.
    pub mass: Vec<f64>,
    pub underflow: f64,
    pub overflow: f64,
}

fn check_edges(edges: &[f64]) -> Result<()> {
    if edges.len() < 2 {
        return Err(Error::domain("histogram needs at least two edges"));
    }
    if edges.iter().any(|e| !e.is_finite()) || edges.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain("histogram edges must be finite and strictly increasing"));
    }
    Ok(())
}

impl Histogram {
    pub fn empty(edges: Vec<f64>) -> Result<Self> {
        check_edges(&edges)?;
        let bins = edges.len() - 1;
        Ok(Self {
            edges,
            mass: vec![0.0; bins],
            underflow: 0.0,
            overflow: 0.0,
        })
    }

    /// Each value carries mass `1/len`.
    pub fn from_values(values: &[f64], edges: Vec<f64>) -> Result<Self> {
        let mut h = Self::empty(edges)?;
        if values.is_empty() {
            return Ok(h);
        }
        let w = 1.0 / values.len() as f64;
        let (lo, hi) = (h.edges[0], *h.edges.last().unwrap());
        for &v in values {
            if v < lo {
                h.underflow += w;
            } else if v > hi {
                h.overflow += w;
            } else {
                // first edge strictly greater than v, minus one
                let bin = h.edges.partition_point(|&e| e <= v).saturating_sub(1);
                let last = h.mass.len() - 1;
                h.mass[bin.min(last)] += w;
            }
        }
        Ok(h)
    }

    /// Uniform edges over `[lo, hi]`.
    pub fn uniform_edges(lo: f64, hi: f64, bins: usize) -> Result<Vec<f64>> {
        if bins == 0 || !(lo < hi) {
            return Err(Error::domain(format!("cannot split [{lo}, {hi}] into {bins} bins")));
        }
        Ok((0..=bins)
            .map(|i| if i == bins { hi } else { lo + (hi - lo) * i as f64 / bins as f64 })
            .collect())
    }

    pub fn bins(&self) -> usize {
        self.mass.len()
    }

    pub fn total(&self) -> f64 {
        self.mass.iter().sum::<f64>() + self.underflow + self.overflow
    }

    /// Fraction of mass inside `[lo, hi]`, counting only bins fully inside.
    pub fn mass_within(&self, lo: f64, hi: f64) -> f64 {
        self.mass
            .iter()
            .enumerate()
            .filter(|(i, _)| self.edges[*i] >= lo && self.edges[i + 1] <= hi)
            .map(|(_, m)| m)
            .sum()
    }

    fn check_compatible(&self, other: &Histogram) -> Result<()> {
        if self.edges != other.edges {
            return Err(Error::domain("histograms have different edges"));
        }
        Ok(())
    }

    /// Total-variation style distance `Σ|m − m'|`, including the
    /// out-of-range cells.
    pub fn l1_distance(&self, other: &Histogram) -> Result<f64> {
        self.check_compatible(other)?;
        let inner: f64 = self.mass.iter().zip(&other.mass).map(|(a, b)| (a - b).abs()).sum();
        Ok(inner + (self.underflow - other.underflow).abs() + (self.overflow - other.overflow).abs())
    }

    /// Bin-wise mean of histograms sharing edges.
    pub fn average(hists: &[Histogram]) -> Result<Histogram> {
        let first = hists
            .first()
            .ok_or_else(|| Error::domain("cannot average zero histograms"))?;
        let mut out = Histogram::empty(first.edges.clone())?;
        let w = 1.0 / hists.len() as f64;
        for h in hists {
            out.check_compatible(h)?;
            for (o, m) in out.mass.iter_mut().zip(&h.mass) {
                *o += w * m;
            }
            out.underflow += w * h.underflow;
            out.overflow += w * h.overflow;
        }
        Ok(out)
    }
}

/// Empirical spectral measure of a set of eigenvalues on the given edges.
pub fn empirical_spectral_histogram(eigs: &[f64], edges: &[f64]) -> Result<Histogram> {
    Histogram::from_values(eigs, edges.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_values_fill_one_bin() {
        let h = empirical_spectral_histogram(&[1.5; 8], &[0.0, 1.0, 2.0, 3.0]).unwrap();
        assert_eq!(h.mass, vec![0.0, 1.0, 0.0]);
        assert_eq!(h.total(), 1.0);
    }

    #[test]
    fn out_of_range_mass() {
        let h = empirical_spectral_histogram(&[-1.0, -2.0], &[0.0, 1.0]).unwrap();
        assert_eq!(h.underflow, 1.0);
        let h = empirical_spectral_histogram(&[0.0, 1.0, 1.5, -0.5], &[0.0, 0.5, 1.0]).unwrap();
        assert_eq!(h.mass, vec![0.25, 0.25]);
        assert_eq!((h.underflow, h.overflow), (0.25, 0.25));
        assert!((h.total() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn malformed_edges() {
        assert!(empirical_spectral_histogram(&[0.0], &[1.0]).is_err());
        assert!(empirical_spectral_histogram(&[0.0], &[1.0, 1.0]).is_err());
        assert!(empirical_spectral_histogram(&[0.0], &[1.0, 0.0]).is_err());
        assert!(empirical_spectral_histogram(&[0.0], &[0.0, f64::NAN]).is_err());
    }

    #[test]
    fn distances_and_averages() {
        let edges = Histogram::uniform_edges(0.0, 2.0, 2).unwrap();
        assert_eq!(edges, vec![0.0, 1.0, 2.0]);
        let a = Histogram::from_values(&[0.5], edges.clone()).unwrap();
        let b = Histogram::from_values(&[1.5], edges.clone()).unwrap();
        assert_eq!(a.l1_distance(&b).unwrap(), 2.0);
        assert_eq!(a.l1_distance(&a).unwrap(), 0.0);
        let avg = Histogram::average(&[a.clone(), b]).unwrap();
        assert_eq!(avg.mass, vec![0.5, 0.5]);
        let other = Histogram::from_values(&[0.5], vec![0.0, 3.0]).unwrap();
        assert!(a.l1_distance(&other).is_err());
        assert_eq!(avg.mass_within(0.0, 1.0), 0.5);
    }
}
