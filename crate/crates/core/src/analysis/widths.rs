use serde::Serialize;

/// Per-item concentration widths at step `t`:
/// `g = sqrt(16 nu ln(t+1) / (N+1)) + 24 ln(t+1) / (N+1)` and
/// `h = sqrt(ln(t+1)) g`, with `nu = w_hat (1 - w_hat)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfidenceWidths {
    pub g: Vec<f64>,
    pub h: Vec<f64>,
}

pub fn width_g(w_hat: f64, n: u64, t: u64) -> f64 {
    let lt = ((t + 1) as f64).ln();
    let denom = n as f64 + 1.0;
    let nu = w_hat * (1.0 - w_hat);
    (16.0 * nu * lt / denom).sqrt() + 24.0 * lt / denom
}

pub fn confidence_widths(w_hat: &[f64], n: &[u64], t: u64) -> ConfidenceWidths {
    assert!(t >= 1, "widths are defined for t >= 1");
    assert_eq!(w_hat.len(), n.len());
    let root = ((t + 1) as f64).ln().sqrt();
    let g: Vec<f64> = w_hat
        .iter()
        .zip(n)
        .map(|(&w, &c)| width_g(w, c, t))
        .collect();
    let h = g.iter().map(|x| root * x).collect();
    ConfidenceWidths { g, h }
}
