use crate::chain::TransitionMatrix;

/// Four states, transitions 1→3→2→4→1 plus self-loops, all 0.5 (0-based here).
pub fn cycle4_chain() -> TransitionMatrix {
    TransitionMatrix::new(vec![
        vec![0.5, 0.0, 0.5, 0.0],
        vec![0.0, 0.5, 0.0, 0.5],
        vec![0.0, 0.5, 0.5, 0.0],
        vec![0.5, 0.0, 0.0, 0.5],
    ])
    .unwrap()
}

pub fn two_state(eps: f64) -> TransitionMatrix {
    TransitionMatrix::new(vec![vec![1.0 - eps, eps], vec![eps, 1.0 - eps]]).unwrap()
}
