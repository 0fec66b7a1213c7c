use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Relative tolerance (scaled by `max(1, max |h|)`) for a sample to count
/// as touching the envelope.
pub(crate) const CONTACT_TOLERANCE: f64 = 1e-12;

/// A sampled function together with its concave envelope.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CurveSamples {
    pub q_grid: Vec<f64>,
    pub h_values: Vec<f64>,
    pub h_star_values: Vec<f64>,
    /// `h* = h` at this sample.
    pub contact_flags: Vec<bool>,
    /// Maximal stretches `(q_lo, q_hi)` where the envelope is a chord strictly
    /// above the samples in between. Both ends are contacts.
    pub segments: Vec<(f64, f64)>,
}

impl CurveSamples {
    /// Chord segment with `q_lo < q < q_hi`, if any.
    pub fn chord_containing(&self, q: f64) -> Option<(f64, f64)> {
        let idx = self.segments.partition_point(|&(_, hi)| hi <= q);
        self.segments
            .get(idx)
            .copied()
            .filter(|&(lo, hi)| lo < q && q < hi)
    }

    /// Index of the sample at `q`, if `q` is exactly a grid point.
    pub fn index_of(&self, q: f64) -> Option<usize> {
        let i = self.q_grid.partition_point(|&x| x < q);
        (i < self.q_grid.len() && self.q_grid[i] == q).then_some(i)
    }
}

/// Upper concave hull of the points `(q_i, h_i)` (monotone chain), evaluated
/// back on the grid.
pub fn concave_envelope(q_grid: &[f64], h_values: &[f64]) -> Result<CurveSamples> {
    if q_grid.len() != h_values.len() {
        return Err(Error::InvalidConfig {
            field: "h_values",
            reason: alloc::format!(
                "{} values for {} grid points",
                h_values.len(),
                q_grid.len()
            ),
        });
    }
    if q_grid.len() < 3 {
        return Err(Error::GridTooSmall {
            len: q_grid.len(),
            min: 3,
        });
    }
    for i in 0..q_grid.len() {
        if !q_grid[i].is_finite() || !h_values[i].is_finite() {
            return Err(Error::NonFiniteSample { index: i });
        }
        if i > 0 && q_grid[i] <= q_grid[i - 1] {
            return Err(Error::NonMonotoneGrid { index: i });
        }
    }

    let mut hull: Vec<usize> = Vec::with_capacity(64);
    for i in 0..q_grid.len() {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // drop b when it lies on or below the segment a -> i
            let cross = (q_grid[b] - q_grid[a]) * (h_values[i] - h_values[a])
                - (h_values[b] - h_values[a]) * (q_grid[i] - q_grid[a]);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }

    let scale = h_values.iter().fold(1.0f64, |m, h| m.max(h.abs()));
    let tol = CONTACT_TOLERANCE * scale;

    let n = q_grid.len();
    let mut h_star_values = alloc::vec![0.0; n];
    let mut contact_flags = alloc::vec![false; n];
    for pair in hull.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let slope = (h_values[b] - h_values[a]) / (q_grid[b] - q_grid[a]);
        for i in a..=b {
            h_star_values[i] = if i == a || i == b {
                h_values[i]
            } else {
                h_values[a] + slope * (q_grid[i] - q_grid[a])
            };
        }
    }
    for &v in &hull {
        contact_flags[v] = true;
    }
    for i in 0..n {
        if h_star_values[i] - h_values[i] <= tol {
            contact_flags[i] = true;
        }
    }

    let mut segments = Vec::new();
    let mut last_contact = 0;
    for i in 1..n {
        if contact_flags[i] {
            if i > last_contact + 1 {
                segments.push((q_grid[last_contact], q_grid[i]));
            }
            last_contact = i;
        }
    }

    Ok(CurveSamples {
        q_grid: q_grid.to_vec(),
        h_values: h_values.to_vec(),
        h_star_values,
        contact_flags,
        segments,
    })
}
