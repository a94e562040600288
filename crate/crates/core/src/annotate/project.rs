//! Projection of a tracked cluster onto RD or RA bins, and the sparse, box
//! and dense labels derived from it.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

use super::meanshift::Cluster;
use super::morph::{morph_chain, to_dense, CellSet, MorphOp};
use crate::error::{Error, Result};
use crate::types::{AxisKind, AxisSpec, ViewKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    /// `(row, col)` bins, duplicates collapsed.
    pub cells: BTreeSet<(usize, usize)>,
    /// Members that fell outside the axes.
    pub dropped: usize,
}

/// Maps members to `(range, doppler)` bins for RD or `(range, azimuth)`
/// bins for RA, with azimuth `atan2(x, y)` in degrees from boresight.
pub fn project(cluster: &Cluster, target: ViewKind, axes: &[AxisSpec; 2]) -> Result<Projection> {
    let want = match target {
        ViewKind::RD => [AxisKind::Range, AxisKind::Doppler],
        ViewKind::RA => [AxisKind::Range, AxisKind::Angle],
        ViewKind::AD => return Err(Error::param("target", "clusters project to RD or RA only")),
    };
    if [axes[0].kind, axes[1].kind] != want {
        return Err(Error::Shape(format!(
            "{target:?} projection needs {:?} axes, got {:?}",
            want,
            [axes[0].kind, axes[1].kind]
        )));
    }
    let mut cells = BTreeSet::new();
    let mut dropped = 0;
    for p in &cluster.members {
        let r = p.x.hypot(p.y);
        let second = match target {
            ViewKind::RD => p.doppler,
            _ => p.x.atan2(p.y).to_degrees(),
        };
        match (axes[0].bin_of(r), axes[1].bin_of(second)) {
            (Ok(a), Ok(b)) => {
                cells.insert((a, b));
            }
            _ => dropped += 1,
        }
    }
    Ok(Projection { cells, dropped })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub kind: ViewKind,
    pub sparse: BTreeSet<(usize, usize)>,
    /// `(min_row, min_col, max_row, max_col)`, inclusive; `None` when empty.
    pub bbox: Option<(usize, usize, usize, usize)>,
    pub rows: usize,
    pub cols: usize,
    /// Row-major dense mask; always contains the sparse cells.
    pub dense: Vec<bool>,
    pub dropped: usize,
}

/// Projects `cluster`, boxes the sparse cells and grows them into a dense
/// mask with `ops`.
pub fn annotate_cluster(
    cluster: &Cluster,
    target: ViewKind,
    axes: &[AxisSpec; 2],
    ops: &[MorphOp],
) -> Result<Annotation> {
    let proj = project(cluster, target, axes)?;
    let bbox = proj.cells.iter().fold(None, |acc: Option<(usize, usize, usize, usize)>, &(r, c)| {
        Some(match acc {
            None => (r, c, r, c),
            Some((a, b, x, y)) => (a.min(r), b.min(c), x.max(r), y.max(c)),
        })
    });
    let lattice: CellSet = proj.cells.iter().map(|&(r, c)| (r as i64, c as i64)).collect();
    let grown = morph_chain(&lattice, ops)?;
    let (rows, cols) = (axes[0].bins, axes[1].bins);
    let mut dense = to_dense(&grown, rows, cols);
    for &(r, c) in &proj.cells {
        dense[r * cols + c] = true;
    }
    Ok(Annotation { kind: target, sparse: proj.cells, bbox, rows, cols, dense, dropped: proj.dropped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotate::DoaPoint;

    fn cluster(pts: Vec<DoaPoint>) -> Cluster {
        let centroid = super::super::meanshift::mean(&pts);
        Cluster { indices: (0..pts.len()).collect(), members: pts, centroid, mode: centroid, bandwidth: 1.0 }
    }

    fn rd_axes() -> [AxisSpec; 2] {
        [
            AxisSpec::new(AxisKind::Range, 220, 0.0, 0.25).unwrap(),
            AxisSpec::new(AxisKind::Doppler, 100, -5.0, 0.1).unwrap(),
        ]
    }

    fn ra_axes() -> [AxisSpec; 2] {
        [
            AxisSpec::new(AxisKind::Range, 220, 0.0, 0.25).unwrap(),
            AxisSpec::new(AxisKind::Angle, 181, -90.0, 1.0).unwrap(),
        ]
    }

    #[test]
    fn boresight_and_side_projection() {
        let c = cluster(vec![DoaPoint { x: 0.0, y: 10.0, doppler: -2.0 }]);
        let ax = rd_axes();
        let p = project(&c, ViewKind::RD, &ax).unwrap();
        assert_eq!(p.cells.into_iter().collect::<Vec<_>>(), vec![(ax[0].bin_of(10.0).unwrap(), ax[1].bin_of(-2.0).unwrap())]);
        let c = cluster(vec![DoaPoint { x: 10.0, y: 0.0, doppler: 0.0 }]);
        let p = project(&c, ViewKind::RA, &ra_axes()).unwrap();
        assert_eq!(p.cells.into_iter().next().unwrap(), (40, 180));
    }

    #[test]
    fn duplicates_collapse_and_outliers_drop() {
        let c = cluster(vec![
            DoaPoint { x: 0.0, y: 10.0, doppler: 1.0 },
            DoaPoint { x: 0.0, y: 10.01, doppler: 1.0 },
            DoaPoint { x: 0.0, y: 90.0, doppler: 1.0 },
        ]);
        let p = project(&c, ViewKind::RD, &rd_axes()).unwrap();
        assert_eq!(p.cells.len(), 1);
        assert_eq!(p.dropped, 1);
        assert!(project(&c, ViewKind::RA, &rd_axes()).is_err());
    }

    #[test]
    fn annotation_invariants() {
        let c = cluster(vec![
            DoaPoint { x: 0.0, y: 10.0, doppler: 1.0 },
            DoaPoint { x: 0.5, y: 11.0, doppler: 1.3 },
            DoaPoint { x: -0.5, y: 10.5, doppler: 0.8 },
        ]);
        let a = annotate_cluster(&c, ViewKind::RD, &rd_axes(), &super::super::morph::DenseVariant::CircleClosedEroded.ops(1.0)).unwrap();
        for &(r, col) in &a.sparse {
            assert!(a.dense[r * a.cols + col]);
            let (r0, c0, r1, c1) = a.bbox.unwrap();
            assert!(r0 <= r && r <= r1 && c0 <= col && col <= c1);
        }
        let (r0, c0, r1, c1) = a.bbox.unwrap();
        assert!(a.sparse.iter().any(|&(r, _)| r == r0) && a.sparse.iter().any(|&(r, _)| r == r1));
        assert!(a.sparse.iter().any(|&(_, c)| c == c0) && a.sparse.iter().any(|&(_, c)| c == c1));
    }
}
