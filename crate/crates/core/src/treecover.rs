//! The 3-regular tree embedded in the hyperbolic plane as the orbit of the
//! disk center under the group generated by reflections in three disjoint
//! lines, and site percolation on it induced by a random set.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check, Error, Result};
use crate::exec::Executor;
use crate::hypgeo::{dist, Geodesic, HPoint, IdealPoint, Isometry};
use crate::percolation::Model;
use crate::percolation::Realization;
use crate::rng::RngStream;
use crate::sampler::{sample_lines_union, sample_points_union, Ball, ModelParams};

pub const DEFAULT_ARC_LENGTH: f64 = 1.0;
pub const MAX_DEPTH: usize = 14;
/// Covering radius of the net used to test ball containment in `B`.
pub const NET_MESH: f64 = 0.05;

/// A word over `{0, 1, 2}`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(Vec<u8>);

impl Word {
    pub fn new(letters: Vec<u8>) -> Result<Self> {
        for &l in &letters {
            check(l < 3, "letter", l as f64, "letters are 0, 1 or 2")?;
        }
        Ok(Word(letters))
    }

    /// A reduced word, or [`Error::NotReduced`].
    pub fn reduced(letters: Vec<u8>) -> Result<Self> {
        let w = Word::new(letters)?;
        if !w.is_reduced() {
            return Err(Error::NotReduced(w.0));
        }
        Ok(w)
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn letters(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_reduced(&self) -> bool {
        self.0.windows(2).all(|p| p[0] != p[1])
    }

    pub fn last(&self) -> Option<u8> {
        self.0.last().copied()
    }

    pub fn parent(&self) -> Option<Word> {
        (!self.0.is_empty()).then(|| Word(self.0[..self.0.len() - 1].to_vec()))
    }

    pub fn child(&self, j: u8) -> Word {
        let mut v = self.0.clone();
        v.push(j);
        Word(v)
    }

    pub fn prefix(&self, n: usize) -> Word {
        Word(self.0[..n.min(self.0.len())].to_vec())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("()");
        }
        for l in &self.0 {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// Center of the boundary arc `A_j`.
pub fn arc_center(j: u8) -> f64 {
    2.0 * PI * j as f64 / 3.0
}

/// The tree truncated at `depth`, vertices in breadth-first order.
#[derive(Clone, Debug)]
pub struct EmbeddedTree {
    pub arc_length: f64,
    pub depth: usize,
    pub generator_lines: [Geodesic; 3],
    reflections: [Isometry; 3],
    words: Vec<Word>,
    vertices: Vec<HPoint>,
    index: HashMap<Word, usize>,
}

/// Largest tolerated hyperbolic position error of a vertex.
pub const MAX_POSITION_ERROR: f64 = 1e-2;

/// Hyperbolic size of one rounding error in the coordinates of `p`.
pub fn position_error(p: HPoint) -> f64 {
    f64::EPSILON * p.x().abs().max(p.y()).max(1.0) / p.y()
}

pub fn build_tree(arc_length: f64, depth: usize) -> Result<EmbeddedTree> {
    check(
        arc_length > 0.0 && arc_length < 2.0 * PI / 3.0,
        "arc_length",
        arc_length,
        "need 0 < arc_length < 2π/3",
    )?;
    check(
        depth <= MAX_DEPTH,
        "depth",
        depth as f64,
        "depth is limited to 14",
    )?;
    let mut lines = Vec::with_capacity(3);
    for j in 0..3u8 {
        let c = arc_center(j);
        lines.push(Geodesic::from_disk_angles(
            c - 0.5 * arc_length,
            c + 0.5 * arc_length,
        )?);
    }
    let generator_lines = [lines[0], lines[1], lines[2]];
    let reflections = generator_lines.map(|g| Isometry::reflection(&g));

    // γ_w(o) = γ_{w₁}(γ_{w₂…wₙ}(o)): one reflection per vertex keeps deep
    // vertices accurate, where composed matrices would lose their
    // determinant to cancellation.
    let mut words = vec![Word::empty()];
    let mut index: HashMap<Word, usize> = HashMap::new();
    index.insert(Word::empty(), 0);
    let mut vertices = vec![HPoint::ORIGIN];
    let mut level = 0..1;
    for _ in 0..depth {
        let next_start = words.len();
        for i in level.clone() {
            let last = words[i].last();
            for j in 0..3u8 {
                if Some(j) == last {
                    continue;
                }
                let w = words[i].child(j);
                let tail = Word(w.0[1..].to_vec());
                let v = reflections[w.0[0] as usize].apply(vertices[index[&tail]]);
                index.insert(w.clone(), words.len());
                words.push(w);
                vertices.push(v);
            }
        }
        level = next_start..words.len();
    }
    let err = vertices
        .iter()
        .map(|&p| position_error(p))
        .fold(0.0, f64::max);
    check(
        err <= MAX_POSITION_ERROR,
        "depth",
        depth as f64,
        "deepest vertices are too close to the boundary for double precision at this arc length",
    )?;
    Ok(EmbeddedTree {
        arc_length,
        depth,
        generator_lines,
        reflections,
        words,
        vertices,
        index,
    })
}

impl EmbeddedTree {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn vertices(&self) -> &[HPoint] {
        &self.vertices
    }

    pub fn index_of(&self, w: &Word) -> Option<usize> {
        self.index.get(w).copied()
    }

    pub fn vertex(&self, w: &Word) -> Option<HPoint> {
        self.index_of(w).map(|i| self.vertices[i])
    }

    pub fn reflection(&self, j: u8) -> Isometry {
        self.reflections[j as usize]
    }

    /// `γ_w` for any word, reduced or not. Composed matrices lose accuracy
    /// for long words; vertices should come from the tree.
    pub fn compose_word(&self, w: &Word) -> Isometry {
        w.letters()
            .iter()
            .fold(Isometry::affine(1.0, 0.0), |m, &j| {
                m.compose(&self.reflections[j as usize])
            })
    }

    /// Indices of the tree neighbors present in the truncation.
    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        let w = &self.words[i];
        let mut out = Vec::with_capacity(3);
        if let Some(p) = w.parent() {
            out.push(self.index[&p]);
        }
        for j in 0..3u8 {
            if Some(j) != w.last() {
                if let Some(&k) = self.index.get(&w.child(j)) {
                    out.push(k);
                }
            }
        }
        out
    }

    /// Tree edges `(parent, child)`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (1..self.len()).map(|i| (self.index[&self.words[i].parent().expect("nonroot")], i))
    }

    /// Indices of the vertices at exactly depth `n`.
    pub fn level(&self, n: usize) -> std::ops::Range<usize> {
        if n == 0 {
            return 0..1;
        }
        let start = 1 + 3 * ((1usize << (n - 1)) - 1);
        start..start + 3 * (1usize << (n - 1))
    }
}

/// Number of reduced words of length at most `depth`.
pub fn vertex_count(depth: usize) -> usize {
    1 + 3 * ((1usize << depth) - 1)
}

/// Whether `L_{w₁}` separates `o` from `γ_w(o)`.
pub fn check_separation(tree: &EmbeddedTree, w: &Word) -> Result<bool> {
    if !w.is_reduced() {
        return Err(Error::NotReduced(w.letters().to_vec()));
    }
    let first = *w.letters().first().ok_or(Error::InvalidParameter {
        name: "word",
        value: 0.0,
        reason: "the empty word has no first line",
    })?;
    let v = match tree.vertex(w) {
        Some(v) => v,
        None => tree.compose_word(w).apply(HPoint::ORIGIN),
    };
    Ok(tree.generator_lines[first as usize].separates(HPoint::ORIGIN, v))
}

/// Largest distance from a path vertex to its limit line and from the line
/// to the path's vertex set, over sampled paths.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RPrimeEstimate {
    pub depth: usize,
    pub n_paths: u64,
    /// max over path vertices of the distance to `L_β`.
    pub vertex_to_line: f64,
    /// max over points of `L_β` of the distance to the nearest path vertex.
    pub line_to_vertices: f64,
}

impl RPrimeEstimate {
    pub fn r_prime(&self) -> f64 {
        self.line_to_vertices
    }
}

/// Spacing of the points sampled on `L_β`.
const LINE_STEP: f64 = 0.02;
/// Vertices this close to the truncation depth only serve as nearest
/// vertices; the measured part of `L_β` ends at their feet.
const DEPTH_MARGIN: usize = 2;

/// A bi-infinite simple path through `o`, truncated: the vertex words of its
/// two rays `u` and `v` (first letters differ).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreePath {
    pub u: Word,
    pub v: Word,
}

/// Random non-backtracking path of the given depth. Letters are drawn in the
/// order `u₁, v₁, u₂, v₂, …`, so shallower paths on the same stream are
/// prefixes of deeper ones.
pub fn random_path<G: Rng + ?Sized>(depth: usize, rng: &mut G) -> TreePath {
    let mut u = Vec::with_capacity(depth);
    let mut v = Vec::with_capacity(depth);
    for k in 0..depth {
        if k == 0 {
            let a = rng.random_range(0..3u8);
            let b = (a + rng.random_range(1..3u8)) % 3;
            u.push(a);
            v.push(b);
        } else {
            let a = (u[k - 1] + rng.random_range(1..3u8)) % 3;
            let b = (v[k - 1] + rng.random_range(1..3u8)) % 3;
            u.push(a);
            v.push(b);
        }
    }
    TreePath {
        u: Word(u),
        v: Word(v),
    }
}

/// Vertices of a path in order along it: deepest `v` vertex first, then
/// `o`, then the `u` ray.
pub fn path_vertices(tree: &EmbeddedTree, path: &TreePath) -> Result<Vec<HPoint>> {
    let get = |w: Word| {
        tree.vertex(&w).ok_or(Error::InvalidParameter {
            name: "path depth",
            value: w.len() as f64,
            reason: "path is deeper than the tree",
        })
    };
    let mut out = Vec::with_capacity(path.u.len() + path.v.len() + 1);
    for n in (1..=path.v.len()).rev() {
        out.push(get(path.v.prefix(n))?);
    }
    out.push(HPoint::ORIGIN);
    for n in 1..=path.u.len() {
        out.push(get(path.u.prefix(n))?);
    }
    Ok(out)
}

/// Ideal point in the radial direction of `p` as seen from the disk center.
pub fn ideal_projection(p: HPoint) -> IdealPoint {
    let (u, v) = p.to_disk();
    IdealPoint::from_disk_angle(v.atan2(u))
}

/// Distances between a vertex path (given in order) and the line joining
/// the ideal points `ends`: returns `(vertex → line, line → vertices)`, both
/// measured away from the last `margin` vertices at each end.
pub fn path_line_distances(
    vertices: &[HPoint],
    ends: (IdealPoint, IdealPoint),
    margin: usize,
) -> Result<(f64, f64)> {
    check(
        vertices.len() > 2 * margin + 1,
        "path length",
        vertices.len() as f64,
        "path too short for its margin",
    )?;
    let line = Geodesic::new(ends.0, ends.1)?;
    let inner = &vertices[margin..vertices.len() - margin];
    let to_line = inner.iter().map(|&p| line.distance(p)).fold(0.0, f64::max);
    let frame = line.canonical_frame();
    let (ta, _) = frame.locate(inner[0]);
    let (tb, _) = frame.locate(inner[inner.len() - 1]);
    let (lo, hi) = (ta.min(tb), ta.max(tb));
    let steps = ((hi - lo) / LINE_STEP).ceil().max(1.0) as usize;
    let mut to_vertices: f64 = 0.0;
    for k in 0..=steps {
        let x = frame.point(lo + (hi - lo) * k as f64 / steps as f64);
        let near = vertices
            .iter()
            .map(|&v| dist(v, x))
            .fold(f64::INFINITY, f64::min);
        to_vertices = to_vertices.max(near);
    }
    Ok((to_line, to_vertices))
}

/// Estimate the constants `R` and `R′` from `n_paths` random paths through
/// `o` reaching the tree's full depth. Path `i` uses stream `i` of `seed`.
pub fn estimate_r_prime(
    tree: &EmbeddedTree,
    n_paths: u64,
    seed: u64,
    exec: &Executor,
) -> Result<RPrimeEstimate> {
    check(
        tree.depth >= 8,
        "depth",
        tree.depth as f64,
        "need depth at least 8",
    )?;
    check(
        n_paths >= 1,
        "n_paths",
        n_paths as f64,
        "need at least one path",
    )?;
    let results = exec.map(n_paths, |i| -> Result<(f64, f64)> {
        let path = random_path(tree.depth, &mut RngStream::new(seed, i).rng());
        let verts = path_vertices(tree, &path)?;
        let ends = (
            ideal_projection(verts[0]),
            ideal_projection(verts[verts.len() - 1]),
        );
        path_line_distances(&verts, ends, DEPTH_MARGIN)
    });
    let mut est = RPrimeEstimate {
        depth: tree.depth,
        n_paths,
        vertex_to_line: 0.0,
        line_to_vertices: 0.0,
    };
    for r in results {
        let (a, b) = r?;
        est.vertex_to_line = est.vertex_to_line.max(a);
        est.line_to_vertices = est.line_to_vertices.max(b);
    }
    Ok(est)
}

/// Net with covering radius at most `mesh` of `B(center, radius)`: the
/// center plus rings at radial spacing `mesh`, each with angular spacing
/// giving arcs at most `mesh` just outside the ring.
pub fn ball_net(center: HPoint, radius: f64, mesh: f64) -> Vec<HPoint> {
    let chart = Isometry::affine(center.y(), center.x());
    let mut out = vec![center];
    let rings = (radius / mesh).ceil() as usize;
    for k in 1..=rings {
        let rho = (k as f64 * mesh).min(radius);
        let count = (2.0 * PI * (rho + 0.5 * mesh).sinh() / mesh)
            .ceil()
            .max(3.0) as usize;
        for m in 0..count {
            let a = 2.0 * PI * m as f64 / count as f64;
            out.push(chart.apply(HPoint::from_polar(rho, a)));
        }
    }
    out
}

/// How far the process must be sampled around each vertex.
pub fn reduction_reach(model: Model, radius: f64, r_prime: f64) -> f64 {
    match model {
        Model::Lines => r_prime,
        _ => r_prime + radius,
    }
}

/// Sample the process on the union of balls `B(v, reach + slack)` around
/// the tree's vertices.
pub fn sample_around_tree(
    tree: &EmbeddedTree,
    model: Model,
    params: ModelParams,
    r_prime: f64,
    stream: RngStream,
) -> Result<Realization> {
    let reach = reduction_reach(model, params.radius, r_prime) + 0.1;
    let balls: Vec<Ball> = tree
        .vertices()
        .iter()
        .map(|&v| Ball::new(v, reach))
        .collect::<Result<_>>()?;
    let mut rng = stream.rng();
    Ok(if model.uses_points() {
        Realization::Points(sample_points_union(params, &balls, &mut rng)?)
    } else {
        Realization::Lines(sample_lines_union(params.lambda, &balls, &mut rng)?)
    })
}

/// Open sites of the induced percolation: vertex `v` is open iff
/// `B(v, R′)` lies in the model's set (vacant: no point within `R + R′`;
/// occupied: every net point within `R - mesh` of a point; lines: no line
/// within `R′`).
pub fn tree_site_reduction(
    tree: &EmbeddedTree,
    real: &Realization,
    model: Model,
    r_prime: f64,
    exec: &Executor,
) -> Result<Vec<bool>> {
    check(r_prime >= 0.0, "r_prime", r_prime, "must be nonnegative")?;
    let verts = tree.vertices();
    let open = match (model, real) {
        (Model::Lines, Realization::Lines(s)) => {
            for &v in verts {
                s.require_ball(v, r_prime)?;
            }
            exec.map(verts.len() as u64, |i| {
                let v = verts[i as usize];
                s.lines.iter().all(|g| g.distance(v) >= r_prime)
            })
        }
        (Model::Vacant | Model::Occupied, Realization::Points(s)) => {
            let radius = s.params.radius;
            for &v in verts {
                s.require_ball(v, r_prime + radius)?;
            }
            exec.map(verts.len() as u64, |i| {
                let v = verts[i as usize];
                let near: Vec<HPoint> = s
                    .points
                    .iter()
                    .copied()
                    .filter(|&p| dist(p, v) < radius + r_prime)
                    .collect();
                if model == Model::Vacant {
                    return near.is_empty();
                }
                let reach = radius - NET_MESH;
                reach > 0.0
                    && ball_net(v, r_prime, NET_MESH)
                        .into_iter()
                        .all(|x| near.iter().any(|&p| dist(p, x) <= reach))
            })
        }
        _ => {
            return Err(Error::InvalidParameter {
                name: "model",
                value: f64::NAN,
                reason: "sample kind does not match the model",
            })
        }
    };
    Ok(open)
}

/// Open cluster of `o` and the deepest level it reaches.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cluster {
    pub size: usize,
    pub max_depth: usize,
}

pub fn root_cluster(tree: &EmbeddedTree, open: &[bool]) -> Cluster {
    if !open.first().copied().unwrap_or(false) {
        return Cluster {
            size: 0,
            max_depth: 0,
        };
    }
    let mut stack = vec![0usize];
    let mut seen = vec![false; tree.len()];
    seen[0] = true;
    let mut size = 0;
    let mut max_depth = 0;
    while let Some(i) = stack.pop() {
        size += 1;
        max_depth = max_depth.max(tree.words[i].len());
        for j in tree.neighbors(i) {
            if open[j] && !seen[j] {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    Cluster { size, max_depth }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::BooleanSample;
    use approx::assert_abs_diff_eq;

    fn all_words(tree: &EmbeddedTree) -> impl Iterator<Item = &Word> {
        tree.words().iter()
    }

    #[test]
    fn small_depths() {
        let t0 = build_tree(1.0, 0).unwrap();
        assert_eq!(t0.len(), 1);
        assert_eq!(t0.vertices()[0], HPoint::ORIGIN);
        let t1 = build_tree(1.0, 1).unwrap();
        let d: Vec<f64> = (1..4)
            .map(|i| dist(HPoint::ORIGIN, t1.vertices()[i]))
            .collect();
        assert_abs_diff_eq!(d[0], d[1], epsilon = 1e-9);
        assert_abs_diff_eq!(d[0], d[2], epsilon = 1e-9);
        let vs = t1.vertices();
        assert_abs_diff_eq!(dist(vs[1], vs[2]), dist(vs[2], vs[3]), epsilon = 1e-9);
        // edge length is twice the distance from o to L_j: cosh p = 1/sin(a/2)
        let p = (1.0 / 0.5f64.sin()).acosh();
        assert_abs_diff_eq!(d[0], 2.0 * p, epsilon = 1e-9);
        for n in 0..=6 {
            assert_eq!(build_tree(1.0, n).unwrap().len(), vertex_count(n));
        }
    }

    #[test]
    fn rejects_bad_arcs() {
        assert!(build_tree(0.0, 2).is_err());
        assert!(build_tree(2.0 * PI / 3.0, 2).is_err());
        assert!(build_tree(1.0, 15).is_err());
        assert!(build_tree(0.3, 10).is_err());
        assert!(build_tree(1.5, 14).is_ok());
    }

    #[test]
    fn separation_holds_exhaustively() {
        let tree = build_tree(1.0, 8).unwrap();
        for w in all_words(&tree).skip(1) {
            assert!(check_separation(&tree, w).unwrap(), "{w}");
        }
        assert!(matches!(
            check_separation(&tree, &Word::new(vec![0, 1, 1]).unwrap()),
            Err(Error::NotReduced(_))
        ));
        assert!(check_separation(&tree, &Word::empty()).is_err());
    }

    #[test]
    fn orbit_points_are_distinct() {
        let tree = build_tree(1.0, 6).unwrap();
        let vs = tree.vertices();
        for i in 0..vs.len() {
            for j in 0..i {
                assert!(dist(vs[i], vs[j]) > 1e-9);
            }
        }
    }

    #[test]
    fn reflections_are_involutions() {
        let tree = build_tree(1.0, 2).unwrap();
        let p = HPoint::new(0.3, 1.7).unwrap();
        for j in 0..3 {
            let m = tree.reflection(j);
            assert_abs_diff_eq!(dist(m.apply(m.apply(p)), p), 0.0, epsilon = 1e-12);
        }
        // a non-reduced word collapses
        let w = Word::new(vec![1, 0, 0, 2]).unwrap();
        let q = tree.compose_word(&w).apply(HPoint::ORIGIN);
        assert_abs_diff_eq!(
            dist(q, tree.vertex(&Word::new(vec![1, 2]).unwrap()).unwrap()),
            0.0,
            epsilon = 1e-10
        );
    }

    #[test]
    fn degrees() {
        let tree = build_tree(1.0, 5).unwrap();
        for i in 0..tree.len() {
            let deg = tree.neighbors(i).len();
            let expect = if tree.words()[i].len() == 5 { 1 } else { 3 };
            assert_eq!(deg, expect);
        }
        assert_eq!(tree.edges().count(), tree.len() - 1);
        assert_eq!(tree.level(5).len(), 48);
        assert!(tree.level(5).all(|i| tree.words()[i].len() == 5));
    }

    #[test]
    fn deep_vertices_project_into_their_arc() {
        let a = 1.0;
        let tree = build_tree(a, 8).unwrap();
        for i in tree.level(8) {
            let j = tree.words()[i].letters()[0];
            let ang = ideal_projection(tree.vertices()[i]).disk_angle();
            let off = (ang - arc_center(j) + PI).rem_euclid(2.0 * PI) - PI;
            assert!(off.abs() < 0.5 * a, "{} at {ang}", tree.words()[i]);
        }
    }

    #[test]
    fn random_paths_are_prefix_compatible() {
        let p8 = random_path(8, &mut RngStream::new(4, 2).rng());
        let p10 = random_path(10, &mut RngStream::new(4, 2).rng());
        assert_eq!(p10.u.prefix(8), p8.u);
        assert_eq!(p10.v.prefix(8), p8.v);
        assert!(p10.u.is_reduced() && p10.v.is_reduced());
        assert_ne!(p10.u.letters()[0], p10.v.letters()[0]);
    }

    #[test]
    fn arc_length_trends() {
        // wider arcs pull the lines in: vertices sit farther from the limit
        // lines, while the lines stay closer to the vertex set
        let est: Vec<RPrimeEstimate> = [0.5, 1.0, 1.5]
            .iter()
            .map(|&a| {
                estimate_r_prime(&build_tree(a, 8).unwrap(), 60, 3, &Executor::Sequential).unwrap()
            })
            .collect();
        assert!(
            est[0].vertex_to_line < est[1].vertex_to_line
                && est[1].vertex_to_line < est[2].vertex_to_line
        );
        assert!(
            est[0].line_to_vertices > est[1].line_to_vertices
                && est[1].line_to_vertices > est[2].line_to_vertices
        );
    }

    #[test]
    fn r_prime_is_bounded() {
        let tree = build_tree(1.0, 8).unwrap();
        let est = estimate_r_prime(&tree, 20, 1, &Executor::Sequential).unwrap();
        assert!(est.vertex_to_line > 0.0 && est.vertex_to_line < 5.0);
        assert!(est.line_to_vertices > 0.0 && est.line_to_vertices < 5.0);
    }

    #[test]
    fn net_covers_ball() {
        let c = HPoint::new(0.4, 0.6).unwrap();
        let net = ball_net(c, 0.8, 0.05);
        let chart = Isometry::affine(c.y(), c.x());
        for k in 0..500 {
            let rho = 0.8 * ((k * 37 % 101) as f64 / 100.0);
            let a = k as f64 * 0.731;
            let x = chart.apply(HPoint::from_polar(rho, a));
            let near = net
                .iter()
                .map(|&p| dist(p, x))
                .fold(f64::INFINITY, f64::min);
            assert!(near <= 0.05, "{near}");
            assert!(dist(x, c) <= 0.8 + 1e-9);
        }
    }

    #[test]
    fn zero_intensity_opens_everything() {
        let tree = build_tree(1.0, 3).unwrap();
        let params = ModelParams::new(0.0, 1.0).unwrap();
        for model in [Model::Vacant, Model::Lines] {
            let real = sample_around_tree(&tree, model, params, 1.5, RngStream::new(0, 0)).unwrap();
            let open =
                tree_site_reduction(&tree, &real, model, 1.5, &Executor::Sequential).unwrap();
            assert!(open.iter().all(|&o| o));
            assert_eq!(root_cluster(&tree, &open).max_depth, 3);
        }
    }

    #[test]
    fn thinning_only_opens_vacant_sites() {
        let tree = build_tree(1.0, 3).unwrap();
        let params = ModelParams::new(0.02, 0.5).unwrap();
        let Realization::Points(full) =
            sample_around_tree(&tree, Model::Vacant, params, 1.0, RngStream::new(5, 0)).unwrap()
        else {
            unreachable!()
        };
        let thin = full.thin(0.5, &mut RngStream::new(5, 1).rng()).unwrap();
        let exec = Executor::Sequential;
        let o_full = tree_site_reduction(
            &tree,
            &Realization::Points(full.clone()),
            Model::Vacant,
            1.0,
            &exec,
        )
        .unwrap();
        let o_thin = tree_site_reduction(
            &tree,
            &Realization::Points(thin.clone()),
            Model::Vacant,
            1.0,
            &exec,
        )
        .unwrap();
        assert!(o_full.iter().zip(&o_thin).all(|(&a, &b)| !a || b));
        let c_full = tree_site_reduction(
            &tree,
            &Realization::Points(full),
            Model::Occupied,
            0.3,
            &exec,
        )
        .unwrap();
        let c_thin = tree_site_reduction(
            &tree,
            &Realization::Points(thin),
            Model::Occupied,
            0.3,
            &exec,
        )
        .unwrap();
        assert!(c_full.iter().zip(&c_thin).all(|(&a, &b)| a || !b));
    }

    #[test]
    fn reduction_checks_window() {
        let tree = build_tree(1.0, 2).unwrap();
        let params = ModelParams::new(1.0, 1.0).unwrap();
        let s = BooleanSample::from_points(params, Ball::centered(1.0).unwrap(), vec![]).unwrap();
        let r = tree_site_reduction(
            &tree,
            &Realization::Points(s),
            Model::Vacant,
            1.0,
            &Executor::Sequential,
        );
        assert!(matches!(r, Err(Error::Window { .. })));
    }

    #[test]
    fn word_display() {
        assert_eq!(Word::empty().to_string(), "()");
        assert_eq!(Word::reduced(vec![0, 2, 1]).unwrap().to_string(), "021");
        assert!(Word::new(vec![3]).is_err());
    }
}
