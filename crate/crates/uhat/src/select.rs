use crate::UhatError;

/// Index of the rightmost maximum.
pub fn rightmost_argmax(scores: &[f64]) -> Result<usize, UhatError> {
    if scores.is_empty() {
        return Err(UhatError::EmptyRow);
    }
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s >= scores[best] {
            best = i;
        }
    }
    Ok(best)
}

/// One-hot row selecting the rightmost maximum.
pub fn uhat_select(scores: &[f64]) -> Result<Vec<f64>, UhatError> {
    let best = rightmost_argmax(scores)?;
    let mut out = vec![0.0; scores.len()];
    out[best] = 1.0;
    Ok(out)
}

/// Winner and the gap to the runner-up (infinite for a single entry).
pub fn select_with_gap(scores: &[f64]) -> Result<(usize, f64), UhatError> {
    let best = rightmost_argmax(scores)?;
    let runner_up = scores
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != best)
        .map(|(_, &s)| s)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok((best, scores[best] - runner_up))
}
