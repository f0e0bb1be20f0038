//! Zero-level isolines of a surface by marching squares.
//!
//! A lattice node is "above" when its value is strictly positive. Crossing
//! points are interpolated linearly along lattice edges, so bilinear
//! interpolation of the surface vanishes at every emitted vertex. Segments
//! are chained through shared lattice edges rather than by comparing
//! coordinates. Saddle cells are resolved with the cell-centre average.

use std::collections::HashMap;

use super::surface::SurfaceData;

/// Vertices in `(N, p)` coordinates.
pub type Polyline = Vec<(f64, f64)>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Edge {
    /// Between `(col, row)` and `(col + 1, row)`.
    Horizontal(usize, usize),
    /// Between `(col, row)` and `(col, row + 1)`.
    Vertical(usize, usize),
}

fn crossing(v0: f64, v1: f64) -> f64 {
    v0 / (v0 - v1)
}

fn lerp(a: f64, b: f64, t: f64) -> f64 {
    a + t * (b - a)
}

fn edge_point(s: &SurfaceData, edge: Edge) -> (f64, f64) {
    match edge {
        Edge::Horizontal(c, r) => {
            let t = crossing(s.values[r][c], s.values[r][c + 1]);
            (lerp(s.n_axis[c], s.n_axis[c + 1], t), s.p_axis[r])
        }
        Edge::Vertical(c, r) => {
            let t = crossing(s.values[r][c], s.values[r + 1][c]);
            (s.n_axis[c], lerp(s.p_axis[r], s.p_axis[r + 1], t))
        }
    }
}

/// Extract the level-0 set of `surface`. Surfaces with no sign change,
/// including all-zero ones, give no polylines. A surface with a single row
/// or column yields one single-vertex polyline per crossing.
pub fn zero_isoline(surface: &SurfaceData) -> Vec<Polyline> {
    let rows = surface.p_axis.len();
    let cols = surface.n_axis.len();
    let above = |c: usize, r: usize| surface.values[r][c] > 0.0;

    if rows == 1 || cols == 1 {
        let mut out = Vec::new();
        if rows == 1 {
            for c in 0..cols.saturating_sub(1) {
                if above(c, 0) != above(c + 1, 0) {
                    out.push(vec![edge_point(surface, Edge::Horizontal(c, 0))]);
                }
            }
        } else {
            for r in 0..rows - 1 {
                if above(0, r) != above(0, r + 1) {
                    out.push(vec![edge_point(surface, Edge::Vertical(0, r))]);
                }
            }
        }
        return out;
    }

    let mut segments: Vec<(Edge, Edge)> = Vec::new();
    for r in 0..rows - 1 {
        for c in 0..cols - 1 {
            let bl = above(c, r);
            let br = above(c + 1, r);
            let tr = above(c + 1, r + 1);
            let tl = above(c, r + 1);
            let bottom = Edge::Horizontal(c, r);
            let top = Edge::Horizontal(c, r + 1);
            let left = Edge::Vertical(c, r);
            let right = Edge::Vertical(c + 1, r);
            let crossed: Vec<Edge> = [
                (bl != br, bottom),
                (br != tr, right),
                (tr != tl, top),
                (tl != bl, left),
            ]
            .into_iter()
            .filter(|(x, _)| *x)
            .map(|(_, e)| e)
            .collect();
            match crossed.len() {
                0 => {}
                2 => segments.push((crossed[0], crossed[1])),
                4 => {
                    let v = &surface.values;
                    let centre = (v[r][c] + v[r][c + 1] + v[r + 1][c + 1] + v[r + 1][c]) / 4.0;
                    if (centre > 0.0) == bl {
                        // bottom-left and top-right corners are connected
                        segments.push((bottom, right));
                        segments.push((top, left));
                    } else {
                        segments.push((left, bottom));
                        segments.push((right, top));
                    }
                }
                _ => unreachable!("a cell has an even number of crossed edges"),
            }
        }
    }

    chain(surface, &segments)
}

fn chain(surface: &SurfaceData, segments: &[(Edge, Edge)]) -> Vec<Polyline> {
    let mut incident: HashMap<Edge, Vec<usize>> = HashMap::new();
    for (i, &(a, b)) in segments.iter().enumerate() {
        incident.entry(a).or_default().push(i);
        incident.entry(b).or_default().push(i);
    }
    let mut used = vec![false; segments.len()];
    let mut out = Vec::new();

    let walk = |start_seg: usize, start_edge: Edge, used: &mut Vec<bool>| {
        let mut line = vec![edge_point(surface, start_edge)];
        let mut seg = start_seg;
        let mut at = start_edge;
        loop {
            used[seg] = true;
            let (a, b) = segments[seg];
            let next = if a == at { b } else { a };
            line.push(edge_point(surface, next));
            at = next;
            match incident[&at].iter().copied().find(|&s| !used[s]) {
                Some(s) => seg = s,
                None => break,
            }
        }
        line
    };

    // open lines start at an edge touched by a single segment
    let mut ends: Vec<(Edge, usize)> = incident
        .iter()
        .filter(|(_, segs)| segs.len() == 1)
        .map(|(&e, segs)| (e, segs[0]))
        .collect();
    ends.sort_by_key(|&(_, s)| s);
    for (edge, seg) in ends {
        if !used[seg] {
            out.push(walk(seg, edge, &mut used));
        }
    }
    for seg in 0..segments.len() {
        if !used[seg] {
            let start = segments[seg].0;
            out.push(walk(seg, start, &mut used));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn surf(n_axis: Vec<f64>, p_axis: Vec<f64>, values: Vec<Vec<f64>>) -> SurfaceData {
        SurfaceData::new(n_axis, p_axis, values).unwrap()
    }

    #[test]
    fn no_sign_change_no_lines() {
        let s = surf(
            vec![1.0, 2.0],
            vec![0.1, 0.2],
            vec![vec![1.0, 2.0], vec![0.5, 3.0]],
        );
        assert!(zero_isoline(&s).is_empty());
        let z = surf(vec![1.0, 2.0], vec![0.1, 0.2], vec![vec![0.0; 2]; 2]);
        assert!(zero_isoline(&z).is_empty());
    }

    #[test]
    fn single_row_midpoint() {
        let s = surf(vec![10.0, 20.0], vec![0.5], vec![vec![-1.0, 1.0]]);
        assert_eq!(zero_isoline(&s), vec![vec![(15.0, 0.5)]]);
    }

    #[test]
    fn two_by_two_horizontal_line() {
        let s = surf(
            vec![0.0, 1.0],
            vec![0.0, 1.0],
            vec![vec![-1.0, -1.0], vec![1.0, 1.0]],
        );
        let lines = zero_isoline(&s);
        assert_eq!(lines.len(), 1);
        let mut line = lines[0].clone();
        line.sort_by(|a, b| a.0.total_cmp(&b.0));
        assert_eq!(line, vec![(0.0, 0.5), (1.0, 0.5)]);
    }

    #[test]
    fn long_line_is_chained() {
        // sign flips between rows 1 and 2 across five columns
        let values = vec![vec![-2.0; 5], vec![-1.0; 5], vec![3.0; 5]];
        let s = surf(vec![1.0, 2.0, 3.0, 4.0, 5.0], vec![0.1, 0.2, 0.3], values);
        let lines = zero_isoline(&s);
        assert_eq!(lines.len(), 1);
        assert_eq!(lines[0].len(), 5);
        for &(_, p) in &lines[0] {
            assert!((p - 0.225).abs() < 1e-12);
        }
    }

    #[test]
    fn closed_loop_around_peak() {
        let mut values = vec![vec![-1.0; 3]; 3];
        values[1][1] = 1.0;
        let s = surf(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 2.0], values);
        let lines = zero_isoline(&s);
        assert_eq!(lines.len(), 1);
        assert_eq!(lines[0].len(), 5);
        assert_eq!(lines[0].first(), lines[0].last());
    }

    #[test]
    fn saddle_produces_two_segments() {
        let s = surf(
            vec![0.0, 1.0],
            vec![0.0, 1.0],
            vec![vec![1.0, -1.0], vec![-1.0, 1.0]],
        );
        let lines = zero_isoline(&s);
        assert_eq!(lines.len(), 2);
        for line in &lines {
            for &(n, p) in line {
                assert!(s.value_at(n, p).abs() < 1e-12);
            }
        }
    }
}
