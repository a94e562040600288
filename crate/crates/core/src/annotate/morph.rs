//! Binary morphology on sparse cell sets.
//!
//! Sets live on the unbounded integer lattice so dilation, erosion and
//! closing obey their algebraic laws exactly; clipping to a grid happens only
//! when a dense mask is produced.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

use crate::error::{Error, Result};

pub type CellSet = BTreeSet<(i64, i64)>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MorphOp {
    /// Dilation by the Euclidean disk of radius `r` in cells.
    DilateCircle(f64),
    /// Dilation by the 3x3 cross (five cells).
    DilateCross,
    /// Closing by the 3x3 square.
    CloseSquare,
    /// Erosion by the 3x3 square.
    ErodeSquare,
}

pub fn disk(r: f64) -> Result<Vec<(i64, i64)>> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::param("r", format!("disk radius must be non-negative, got {r}")));
    }
    let k = r.floor() as i64;
    let r2 = r * r;
    let mut out = Vec::new();
    for dr in -k..=k {
        for dc in -k..=k {
            if ((dr * dr + dc * dc) as f64) <= r2 {
                out.push((dr, dc));
            }
        }
    }
    Ok(out)
}

pub fn cross() -> Vec<(i64, i64)> {
    vec![(0, 0), (-1, 0), (1, 0), (0, -1), (0, 1)]
}

pub fn square() -> Vec<(i64, i64)> {
    (-1..=1).flat_map(|dr| (-1..=1).map(move |dc| (dr, dc))).collect()
}

/// `M ⊕ E`: the union of `M` translated by every element offset.
pub fn dilate(m: &CellSet, element: &[(i64, i64)]) -> CellSet {
    m.iter()
        .flat_map(|&(r, c)| element.iter().map(move |&(dr, dc)| (r + dr, c + dc)))
        .collect()
}

/// `M ⊖ E`: cells `p` with `p + e` in `M` for every offset `e`.
pub fn erode(m: &CellSet, element: &[(i64, i64)]) -> CellSet {
    let Some(&(ar, ac)) = element.first() else {
        return m.clone();
    };
    m.iter()
        .map(|&(r, c)| (r - ar, c - ac))
        .filter(|&(r, c)| element.iter().all(|&(dr, dc)| m.contains(&(r + dr, c + dc))))
        .collect()
}

pub fn morph(m: &CellSet, op: MorphOp) -> Result<CellSet> {
    Ok(match op {
        MorphOp::DilateCircle(r) => dilate(m, &disk(r)?),
        MorphOp::DilateCross => dilate(m, &cross()),
        MorphOp::CloseSquare => {
            let e = square();
            erode(&dilate(m, &e), &e)
        }
        MorphOp::ErodeSquare => erode(m, &square()),
    })
}

pub fn morph_chain(m: &CellSet, ops: &[MorphOp]) -> Result<CellSet> {
    ops.iter().try_fold(m.clone(), |acc, &op| morph(&acc, op))
}

/// Row-major boolean mask of the cells of `m` inside a `rows x cols` grid.
pub fn to_dense(m: &CellSet, rows: usize, cols: usize) -> Vec<bool> {
    let mut out = vec![false; rows * cols];
    for &(r, c) in m {
        if r >= 0 && c >= 0 && (r as usize) < rows && (c as usize) < cols {
            out[r as usize * cols + c as usize] = true;
        }
    }
    out
}

/// The four dense-label recipes built from sparse points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DenseVariant {
    DilationCircle,
    DilationCross,
    CircleClosed,
    CircleClosedEroded,
}

impl DenseVariant {
    pub fn ops(self, radius: f64) -> Vec<MorphOp> {
        match self {
            DenseVariant::DilationCircle => vec![MorphOp::DilateCircle(radius)],
            DenseVariant::DilationCross => vec![MorphOp::DilateCross],
            DenseVariant::CircleClosed => vec![MorphOp::DilateCircle(radius), MorphOp::CloseSquare],
            DenseVariant::CircleClosedEroded => {
                vec![MorphOp::DilateCircle(radius), MorphOp::CloseSquare, MorphOp::ErodeSquare]
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(v: &[(i64, i64)]) -> CellSet {
        v.iter().copied().collect()
    }

    #[test]
    fn unit_disk_of_singleton() {
        let got = morph(&set(&[(5, 5)]), MorphOp::DilateCircle(1.0)).unwrap();
        assert_eq!(got, set(&[(5, 5), (4, 5), (6, 5), (5, 4), (5, 6)]));
        assert_eq!(morph(&set(&[(5, 5)]), MorphOp::DilateCross).unwrap(), got);
    }

    #[test]
    fn empty_stays_empty() {
        for op in [MorphOp::DilateCircle(2.5), MorphOp::DilateCross, MorphOp::CloseSquare, MorphOp::ErodeSquare] {
            assert!(morph(&CellSet::new(), op).unwrap().is_empty());
        }
    }

    #[test]
    fn negative_radius_errors() {
        assert!(morph(&set(&[(0, 0)]), MorphOp::DilateCircle(-1.0)).is_err());
        assert_eq!(disk(0.0).unwrap(), vec![(0, 0)]);
        assert_eq!(disk(1.5).unwrap().len(), 9);
        assert_eq!(disk(2.0).unwrap().len(), 13);
    }

    #[test]
    fn erosion_of_square_block() {
        let block: CellSet = (0..4).flat_map(|r| (0..4).map(move |c| (r, c))).collect();
        assert_eq!(morph(&block, MorphOp::ErodeSquare).unwrap(), set(&[(1, 1), (1, 2), (2, 1), (2, 2)]));
    }

    #[test]
    fn dense_clips_to_grid() {
        let m = morph(&set(&[(0, 0)]), MorphOp::DilateCross).unwrap();
        let d = to_dense(&m, 2, 2);
        assert_eq!(d, vec![true, true, true, false]);
    }

    fn cells() -> impl Strategy<Value = CellSet> {
        prop::collection::btree_set((0i64..32, 0i64..32), 0..60)
    }

    proptest! {
        #[test]
        fn dilation_distributes_over_union(a in cells(), b in cells(), r in 0.0f64..3.0) {
            let u: CellSet = a.union(&b).copied().collect();
            let lhs = morph(&u, MorphOp::DilateCircle(r)).unwrap();
            let da = morph(&a, MorphOp::DilateCircle(r)).unwrap();
            let db = morph(&b, MorphOp::DilateCircle(r)).unwrap();
            prop_assert_eq!(lhs, da.union(&db).copied().collect::<CellSet>());
        }

        #[test]
        fn closing_extensive_erosion_antiextensive(a in cells()) {
            let d = morph(&a, MorphOp::DilateCross).unwrap();
            let closed = morph(&d, MorphOp::CloseSquare).unwrap();
            prop_assert!(d.is_subset(&closed));
            prop_assert!(morph(&a, MorphOp::ErodeSquare).unwrap().is_subset(&a));
        }
    }
}
