//! Dynamic time warping over frame matrices.

use muskit_dsp::FrameMatrix;

use crate::MetricError;

/// Monotone alignment path: starts at (0, 0), ends at the last frame pair,
/// steps are (1,0), (0,1) or (1,1).
#[derive(Debug, Clone, PartialEq)]
pub struct DtwPath {
    pub pairs: Vec<(usize, usize)>,
}

/// Frame distance used throughout: Euclidean over dimensions 1..D, skipping
/// the energy-like coefficient 0 (unless the matrix is one-dimensional).
pub fn frame_distance(a: &[f64], b: &[f64]) -> f64 {
    let skip = usize::from(a.len() > 1);
    a.iter()
        .zip(b.iter())
        .skip(skip)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Aligns `hyp` to `ref`, minimizing the summed frame distance over the
/// path. Ties prefer the diagonal step, then (1,0), then (0,1), so the
/// result is deterministic.
pub fn dtw_align(reference: &FrameMatrix, hypothesis: &FrameMatrix) -> Result<DtwPath, MetricError> {
    if reference.dim() != hypothesis.dim() {
        return Err(MetricError::Dimension {
            expected: reference.dim(),
            got: hypothesis.dim(),
        });
    }
    let (tr, th) = (reference.rows(), hypothesis.rows());
    if tr == 0 || th == 0 {
        return Err(MetricError::EmptyInput);
    }

    // cumulative cost, row-major (tr x th)
    let mut cost = vec![0.0f64; tr * th];
    for i in 0..tr {
        for j in 0..th {
            let d = frame_distance(reference.row(i), hypothesis.row(j));
            let best_prev = match (i, j) {
                (0, 0) => 0.0,
                (0, _) => cost[j - 1],
                (_, 0) => cost[(i - 1) * th],
                _ => {
                    let diag = cost[(i - 1) * th + j - 1];
                    let up = cost[(i - 1) * th + j];
                    let left = cost[i * th + j - 1];
                    diag.min(up).min(left)
                }
            };
            cost[i * th + j] = d + best_prev;
        }
    }

    // backtrace with the declared tie preference
    let mut pairs = Vec::with_capacity(tr.max(th));
    let (mut i, mut j) = (tr - 1, th - 1);
    pairs.push((i, j));
    while i > 0 || j > 0 {
        if i == 0 {
            j -= 1;
        } else if j == 0 {
            i -= 1;
        } else {
            let diag = cost[(i - 1) * th + j - 1];
            let up = cost[(i - 1) * th + j];
            let left = cost[i * th + j - 1];
            if diag <= up && diag <= left {
                i -= 1;
                j -= 1;
            } else if up <= left {
                i -= 1;
            } else {
                j -= 1;
            }
        }
        pairs.push((i, j));
    }
    pairs.reverse();
    Ok(DtwPath { pairs })
}

/// Summed frame distance along a path.
pub fn path_cost(
    reference: &FrameMatrix,
    hypothesis: &FrameMatrix,
    path: &DtwPath,
) -> f64 {
    path.pairs
        .iter()
        .map(|&(i, j)| frame_distance(reference.row(i), hypothesis.row(j)))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use muskit_dsp::FrameKind;

    fn matrix(rows: Vec<Vec<f64>>) -> FrameMatrix {
        FrameMatrix::from_rows(rows, 100.0, FrameKind::Mcep).unwrap()
    }

    #[test]
    fn identical_matrices_align_diagonally() {
        let m = matrix((0..6).map(|i| vec![0.0, i as f64, 1.0]).collect());
        let path = dtw_align(&m, &m).unwrap();
        let expected: Vec<(usize, usize)> = (0..6).map(|i| (i, i)).collect();
        assert_eq!(path.pairs, expected);
        assert_eq!(path_cost(&m, &m, &path), 0.0);
    }

    #[test]
    fn single_ref_frame_fans_out() {
        let r = matrix(vec![vec![0.0, 1.0]]);
        let h = matrix(vec![vec![0.0, 1.0], vec![0.0, 2.0], vec![0.0, 3.0]]);
        let path = dtw_align(&r, &h).unwrap();
        assert_eq!(path.pairs, vec![(0, 0), (0, 1), (0, 2)]);
    }

    #[test]
    fn path_shape_invariants() {
        let r = matrix((0..5).map(|i| vec![0.0, (i as f64).sin()]).collect());
        let h = matrix((0..8).map(|i| vec![0.0, (i as f64 * 0.7).cos()]).collect());
        let path = dtw_align(&r, &h).unwrap();
        assert_eq!(*path.pairs.first().unwrap(), (0, 0));
        assert_eq!(*path.pairs.last().unwrap(), (4, 7));
        for w in path.pairs.windows(2) {
            let (di, dj) = (w[1].0 - w[0].0, w[1].1 - w[0].1);
            assert!(matches!((di, dj), (0, 1) | (1, 0) | (1, 1)));
        }
    }

    #[test]
    fn cost_no_worse_than_diagonal_for_equal_lengths() {
        let r = matrix((0..7).map(|i| vec![0.0, (i as f64 * 1.3).sin()]).collect());
        let h = matrix((0..7).map(|i| vec![0.0, (i as f64 * 0.9).cos()]).collect());
        let path = dtw_align(&r, &h).unwrap();
        let dtw_cost = path_cost(&r, &h, &path);
        let diag_cost: f64 = (0..7)
            .map(|i| frame_distance(r.row(i), h.row(i)))
            .sum();
        assert!(dtw_cost <= diag_cost + 1e-12);
    }

    #[test]
    fn dimension_mismatch_and_empty_are_errors() {
        let r = matrix(vec![vec![0.0, 1.0]]);
        let h = FrameMatrix::from_rows(vec![vec![0.0]], 100.0, FrameKind::Mcep).unwrap();
        assert!(matches!(
            dtw_align(&r, &h),
            Err(MetricError::Dimension { .. })
        ));
        let empty = FrameMatrix::zeros(0, 2, 100.0, FrameKind::Mcep);
        assert!(matches!(dtw_align(&r, &empty), Err(MetricError::EmptyInput)));
    }
}
