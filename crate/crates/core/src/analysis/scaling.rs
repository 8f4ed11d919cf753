use crate::error::{structural, Result};

/// `sqrt(K L T) ln T` over `t_grid`, rescaled to equal `anchor` at the first
/// grid point. Only the shape is meaningful; the constant in front of the
/// regret bound is far too large to compare against.
pub fn scaling_curve(k: usize, l: usize, t_grid: &[u64], anchor: f64) -> Result<Vec<f64>> {
    if t_grid.windows(2).any(|p| p[0] >= p[1]) {
        return Err(structural("T grid must be strictly ascending"));
    }
    let raw: Vec<f64> = t_grid
        .iter()
        .map(|&t| ((k * l) as f64 * t as f64).sqrt() * (t as f64).ln())
        .collect();
    let first = *raw.first().ok_or_else(|| structural("empty T grid"))?;
    if first <= 0.0 {
        return Err(structural(
            "first grid point must be at least 2 to normalize",
        ));
    }
    Ok(raw.iter().map(|r| r / first * anchor).collect())
}
