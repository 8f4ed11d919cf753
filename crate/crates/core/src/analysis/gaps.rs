use serde::Serialize;

use crate::error::{structural, Result};

/// `Delta(i, j) = w(i) - w(j)` for optimal `i` and suboptimal `j`, after
/// sorting items by descending weight.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapTable {
    /// 0-based items in descending weight order.
    pub optimal: Vec<usize>,
    pub suboptimal: Vec<usize>,
    /// `gaps[a][b] = w(optimal[a]) - w(suboptimal[b])`.
    pub gaps: Vec<Vec<f64>>,
    /// `Delta(K, K+1)`.
    pub min_gap: f64,
}

impl GapTable {
    pub fn max_gap(&self) -> f64 {
        self.gaps
            .iter()
            .flatten()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn gap_table(w: &[f64], k: usize) -> Result<GapTable> {
    if k == 0 || k > w.len() {
        return Err(structural(format!(
            "need 1 <= K <= L, got K={k}, L={}",
            w.len()
        )));
    }
    if k == w.len() {
        return Err(structural("no suboptimal items"));
    }
    let order = crate::env::top_k(w, w.len());
    let (optimal, suboptimal) = (order[..k].to_vec(), order[k..].to_vec());
    let gaps = optimal
        .iter()
        .map(|&i| suboptimal.iter().map(|&j| w[i] - w[j]).collect())
        .collect();
    Ok(GapTable {
        min_gap: w[optimal[k - 1]] - w[suboptimal[0]],
        optimal,
        suboptimal,
        gaps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn experiment_instance_gap() {
        let mut w = vec![0.2, 0.2, 0.1, 0.1];
        w.extend(std::iter::repeat_n(0.05, 6));
        let g = gap_table(&w, 2).unwrap();
        assert!((g.min_gap - 0.1).abs() < 1e-15);
        assert!((g.max_gap() - 0.15).abs() < 1e-15);
        assert_eq!(g.gaps[0][g.suboptimal.len() - 1], g.max_gap());
    }

    #[test]
    fn equal_weights_zero_gap() {
        assert_eq!(gap_table(&[0.3; 5], 2).unwrap().min_gap, 0.0);
    }

    #[test]
    fn entries_dominate_min_gap() {
        let w = [0.05, 0.4, 0.3, 0.31, 0.1, 0.2];
        let g = gap_table(&w, 3).unwrap();
        assert!(g.gaps.iter().flatten().all(|&d| d >= g.min_gap));
        assert_eq!(g.optimal, vec![1, 3, 2]);
    }

    #[test]
    fn no_suboptimal_items() {
        let e = gap_table(&[0.1, 0.2], 2).unwrap_err();
        assert!(e.to_string().contains("no suboptimal items"));
    }
}
