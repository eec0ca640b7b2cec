//! Chords (strips of components joined through opposite sides) and their patches.

use std::collections::BTreeSet;
use std::f64::consts::FRAC_PI_8;

use serde::Serialize;

use crate::layout::{twin, Layout, NodeKind};

/// A transverse rung: one full side shared by consecutive components, or a chord end.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Rung {
    /// Half-edges running from `left` to `right`.
    pub halfedges: Vec<usize>,
    pub left: usize,
    pub right: usize,
    pub length: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ChordEnd {
    Boundary,
    TJunction,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PatchKind {
    Zip,
    NonZip,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Blocker {
    Cyclic,
    RepeatedComponent,
    WholeLayout,
    RungBetweenSingularities,
    SingularityToBoundary,
    TJunctionEnd,
    BoundarySide,
    ZipEndNotSingleEdge,
    NonPositiveEnergy,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Patch {
    /// Rung indices `first..=last`; components `first..last`.
    pub first: usize,
    pub last: usize,
    pub kind: PatchKind,
    /// Sides whose edges are deleted by a collapse.
    pub delete: Vec<Side>,
    /// For zip patches, the singular corners `(on first rung, on last rung)`.
    pub zip_ends: Option<(usize, usize)>,
    /// Side carrying the singularity at the first rung, for zip patches.
    pub zip_start_side: Option<Side>,
    pub energy: f64,
    pub width: f64,
    pub length: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Chord {
    pub id: usize,
    pub faces: Vec<usize>,
    /// Entry side of each component.
    pub entry: Vec<usize>,
    pub rungs: Vec<Rung>,
    pub ends: [ChordEnd; 2],
    pub cyclic: bool,
    pub patches: Vec<Patch>,
    pub min_width: f64,
    pub energy: f64,
    pub blockers: Vec<Blocker>,
}

impl Chord {
    pub fn collapsible(&self) -> bool {
        self.blockers.is_empty()
    }

    pub fn len(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    /// Half-edges of a longitudinal side of component `i` of the chord.
    pub fn side_halfedges<'a>(&self, l: &'a Layout, i: usize, side: Side) -> &'a [usize] {
        let s = l.faces[self.faces[i]].sides.as_ref().unwrap();
        let k = match side {
            Side::Right => (self.entry[i] + 1) % 4,
            Side::Left => (self.entry[i] + 3) % 4,
        };
        &s[k]
    }
}

/// Neighbor across side `k` of face `f`: `(face, side)` when the whole side is
/// a full side of a single neighbor.
pub fn neighbor(l: &Layout, f: usize, k: usize) -> Option<(usize, usize)> {
    let side = &l.faces[f].sides.as_ref()?[k];
    if side.iter().any(|&h| l.edges[h >> 1].boundary) {
        return None;
    }
    let g = l.face_of[twin(side[0])];
    if l.faces[g].exterior {
        return None;
    }
    let gs = l.faces[g].sides.as_ref()?;
    let twins: BTreeSet<usize> = side.iter().map(|&h| twin(h)).collect();
    (0..4).find(|&j| {
        let s: BTreeSet<usize> = gs[j].iter().copied().collect();
        s == twins
    })
    .map(|j| (g, j))
}

fn end_kind(l: &Layout, f: usize, k: usize) -> ChordEnd {
    let side = &l.faces[f].sides.as_ref().unwrap()[k];
    if side.iter().any(|&h| l.edges[h >> 1].boundary) {
        ChordEnd::Boundary
    } else {
        ChordEnd::TJunction
    }
}

fn rung_of(l: &Layout, side: &[usize], reversed: bool) -> Rung {
    let length = l.side_length(side);
    let (a, b) = (l.origin(side[0]), l.target(side[side.len() - 1]));
    if reversed {
        Rung { halfedges: side.to_vec(), left: b, right: a, length }
    } else {
        Rung { halfedges: side.to_vec(), left: a, right: b, length }
    }
}

/// True when the node at one end of a chord-end side is a T-junction whose
/// straight angle lies outside the chord, so the rung line runs on past it.
fn blocking_t(l: &Layout, side: &[usize], at_start: bool) -> bool {
    let (v, sector) = if at_start {
        let h = side[0];
        let v = l.origin(h);
        let d = l.degree(v);
        (v, (l.rot_index(v, h) + d - 1) % d)
    } else {
        let h = twin(side[side.len() - 1]);
        let v = l.origin(h);
        (v, l.rot_index(v, h))
    };
    l.nodes[v].kind == NodeKind::TJunction && l.nodes[v].sectors[sector] == 2
}

/// Enumerate all chords. Every (component, axis) pair lies on exactly one chord.
pub fn enumerate_chords(l: &Layout) -> Vec<Chord> {
    let nf = l.faces.len();
    let mut seen = vec![[false; 2]; nf];
    let mut chords = Vec::new();
    for f0 in 0..nf {
        if l.faces[f0].exterior || l.faces[f0].sides.is_none() {
            continue;
        }
        for axis in 0..2 {
            if seen[f0][axis] {
                continue;
            }
            // Walk backward to an end, or around a cycle.
            let (mut f, mut entry) = (f0, axis);
            let mut cyclic = false;
            let mut guard = 0;
            while let Some((g, j)) = neighbor(l, f, entry) {
                f = g;
                entry = (j + 2) % 4;
                guard += 1;
                if (f == f0 && entry % 2 == axis) || guard > 2 * nf {
                    cyclic = true;
                    break;
                }
            }
            let (start, start_entry) = if cyclic { (f0, axis) } else { (f, entry) };
            let mut faces = vec![start];
            let mut entries = vec![start_entry];
            let (mut f, mut entry) = (start, start_entry);
            loop {
                seen[f][entry % 2] = true;
                let Some((g, j)) = neighbor(l, f, (entry + 2) % 4) else { break };
                if g == start && j == start_entry {
                    break;
                }
                if seen[g][j % 2] && faces.len() > 2 * nf {
                    break;
                }
                f = g;
                entry = j;
                faces.push(f);
                entries.push(entry);
                if faces.len() > 2 * nf {
                    cyclic = true;
                    break;
                }
            }
            chords.push(analyze(l, chords.len(), faces, entries, cyclic));
        }
    }
    chords
}

fn analyze(l: &Layout, id: usize, faces: Vec<usize>, entry: Vec<usize>, cyclic: bool) -> Chord {
    let n = faces.len();
    let sides = |i: usize| l.faces[faces[i]].sides.as_ref().unwrap();
    let mut rungs: Vec<Rung> = (0..n).map(|i| rung_of(l, &sides(i)[entry[i]], false)).collect();
    rungs.push(rung_of(l, &sides(n - 1)[(entry[n - 1] + 2) % 4], true));
    let ends = [end_kind(l, faces[0], entry[0]), end_kind(l, faces[n - 1], (entry[n - 1] + 2) % 4)];
    let mut chord = Chord {
        id,
        faces,
        entry,
        rungs,
        ends,
        cyclic,
        patches: Vec::new(),
        min_width: f64::INFINITY,
        energy: f64::NEG_INFINITY,
        blockers: Vec::new(),
    };
    chord.min_width = chord.rungs.iter().map(|r| r.length).fold(f64::INFINITY, f64::min);
    if cyclic {
        chord.blockers.push(Blocker::Cyclic);
        return chord;
    }
    let distinct: BTreeSet<usize> = chord.faces.iter().copied().collect();
    if distinct.len() != n {
        chord.blockers.push(Blocker::RepeatedComponent);
        return chord;
    }
    if distinct.len() == l.component_count() {
        chord.blockers.push(Blocker::WholeLayout);
    }
    let sing = |v: usize| l.is_singular(v);
    let mut cuts = vec![0];
    for j in 1..n {
        if sing(chord.rungs[j].left) || sing(chord.rungs[j].right) {
            cuts.push(j);
        }
    }
    cuts.push(n);
    let mut blockers = BTreeSet::new();
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let patch = make_patch(l, &chord, a, b, &mut blockers);
        chord.patches.push(patch);
    }
    chord.energy = chord.patches.iter().map(|p| p.energy).fold(f64::INFINITY, f64::min);
    if chord.energy.is_nan() || chord.energy <= 0.0 {
        blockers.insert(Blocker::NonPositiveEnergy);
    }
    let mut b: Vec<Blocker> = chord.blockers.clone();
    for x in [
        Blocker::RungBetweenSingularities,
        Blocker::SingularityToBoundary,
        Blocker::TJunctionEnd,
        Blocker::BoundarySide,
        Blocker::ZipEndNotSingleEdge,
        Blocker::NonPositiveEnergy,
    ] {
        if blockers.contains(&x) {
            b.push(x);
        }
    }
    chord.blockers = b;
    chord
}

fn make_patch(l: &Layout, c: &Chord, a: usize, b: usize, blockers: &mut BTreeSet<Blocker>) -> Patch {
    let sing = |v: usize| l.is_singular(v);
    let bnd = |v: usize| l.is_boundary_node(v);
    let (ra, rb) = (&c.rungs[a], &c.rungs[b]);
    for r in [ra, rb] {
        if sing(r.left) && sing(r.right) {
            blockers.insert(Blocker::RungBetweenSingularities);
        }
        if (sing(r.left) && bnd(r.right)) || (sing(r.right) && bnd(r.left)) {
            blockers.insert(Blocker::SingularityToBoundary);
        }
    }
    let (la, ra_, lb, rb_) = (sing(ra.left), sing(ra.right), sing(rb.left), sing(rb.right));
    let side_len = |side: Side| (a..b).map(|i| l.side_length(c.side_halfedges(l, i, side))).sum::<f64>();
    let side_boundary = |side: Side| (a..b).any(|i| c.side_halfedges(l, i, side).iter().any(|&h| l.edges[h >> 1].boundary));
    let width = c.rungs[a..=b].iter().map(|r| r.length).sum::<f64>() / (b - a + 1) as f64;
    let length = 0.5 * (side_len(Side::Left) + side_len(Side::Right));

    let (kind, delete, zip_ends, zip_start_side) = if la && rb_ && !ra_ && !lb {
        (PatchKind::Zip, vec![Side::Left, Side::Right], Some((ra.left, rb.right)), Some(Side::Left))
    } else if ra_ && lb && !la && !rb_ {
        (PatchKind::Zip, vec![Side::Left, Side::Right], Some((ra.right, rb.left)), Some(Side::Right))
    } else if (la || lb) && !(ra_ || rb_) {
        (PatchKind::NonZip, vec![Side::Right], None, None)
    } else if (ra_ || rb_) && !(la || lb) {
        (PatchKind::NonZip, vec![Side::Left], None, None)
    } else if !(la || lb || ra_ || rb_) {
        let d = if side_boundary(Side::Right) { Side::Left } else { Side::Right };
        (PatchKind::NonZip, vec![d], None, None)
    } else {
        blockers.insert(Blocker::RungBetweenSingularities);
        (PatchKind::NonZip, vec![], None, None)
    };
    if delete.iter().any(|&s| side_boundary(s)) {
        blockers.insert(Blocker::BoundarySide);
    }
    if kind == PatchKind::Zip && (ra.halfedges.len() != 1 || rb.halfedges.len() != 1) {
        blockers.insert(Blocker::ZipEndNotSingleEdge);
    }

    // Chord ends at T-junctions.
    let n = c.faces.len();
    let mut check_end = |rung: &Rung, at_first: bool| {
        let side = &rung.halfedges;
        // Side orientation: first rung runs left to right, last rung right to left.
        let (left_blocks, right_blocks) = if at_first {
            (blocking_t(l, side, true), blocking_t(l, side, false))
        } else {
            (blocking_t(l, side, false), blocking_t(l, side, true))
        };
        let far = if at_first { rb } else { ra };
        for (blocks, other, other_blocks, diag) in
            [(left_blocks, rung.right, right_blocks, far.right), (right_blocks, rung.left, left_blocks, far.left)]
        {
            if blocks && !(sing(other) || other_blocks || sing(diag)) {
                blockers.insert(Blocker::TJunctionEnd);
            }
        }
    };
    if a == 0 && c.ends[0] == ChordEnd::TJunction {
        check_end(ra, true);
    }
    if b == n && c.ends[1] == ChordEnd::TJunction {
        check_end(rb, false);
    }

    let energy = match kind {
        PatchKind::Zip => {
            if length > 0.0 {
                FRAC_PI_8 - (width / length).atan()
            } else {
                f64::NEG_INFINITY
            }
        }
        PatchKind::NonZip => 1.0,
    };
    Patch { first: a, last: b, kind, delete, zip_ends, zip_start_side, energy, width, length }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    #[test]
    fn grid_chords_partition_components() {
        let l = synth::grid(3, 3, 1.0);
        let chords = enumerate_chords(&l);
        assert_eq!(chords.len(), 6);
        let total: usize = chords.iter().map(|c| c.len()).sum();
        assert_eq!(total, 2 * l.component_count());
    }
}
