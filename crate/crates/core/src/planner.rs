//! RRT* over a rectangle with static disc obstacles, and arc-length
//! interpolation of the resulting polyline.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{point_segment_distance, Point, Rect, Vec2};
use crate::params::RrtParams;
use crate::scalar::Real;
use crate::types::Obstacle;

/// Polyline from source to destination.
#[derive(Debug, Clone, PartialEq)]
pub struct Path<T> {
    pub points: Vec<Point<T>>,
}

impl<T: Real> Path<T> {
    pub fn new(points: Vec<Point<T>>) -> Self {
        Self { points }
    }

    /// Total arc length.
    pub fn cost(&self) -> T {
        self.points.windows(2).map(|w| w[0].distance(w[1])).sum()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// A node of the search tree.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanNode<T> {
    pub position: Point<T>,
    pub parent: Option<usize>,
    /// Path length from the root.
    pub cost: T,
    children: Vec<usize>,
}

/// Obstacles inflated by a clearance, with exact disc tests.
#[derive(Debug, Clone)]
pub struct FreeSpace<T> {
    bounds: Rect<T>,
    discs: Vec<(Point<T>, T)>,
}

impl<T: Real> FreeSpace<T> {
    pub fn new(bounds: Rect<T>, obstacles: &[Obstacle<T>], clearance: T) -> Self {
        Self {
            bounds,
            discs: obstacles.iter().map(|o| (o.center, o.radius + clearance)).collect(),
        }
    }

    pub fn point_free(&self, p: Point<T>) -> bool {
        self.bounds.contains(p) && self.discs.iter().all(|&(c, r)| p.distance(c) >= r)
    }

    pub fn segment_free(&self, a: Point<T>, b: Point<T>) -> bool {
        self.discs.iter().all(|&(c, r)| point_segment_distance(c, a, b) >= r)
    }
}

/// Uniform bucket grid over the bounds for nearest / radius queries.
#[derive(Debug, Clone)]
struct Grid<T> {
    origin: Point<T>,
    cell: T,
    cols: usize,
    rows: usize,
    buckets: Vec<Vec<usize>>,
}

impl<T: Real> Grid<T> {
    fn new(bounds: Rect<T>, cell: T) -> Self {
        let cols = (bounds.width() / cell).ceil().to_usize().unwrap_or(1).clamp(1, 4096);
        let rows = (bounds.height() / cell).ceil().to_usize().unwrap_or(1).clamp(1, 4096);
        Self {
            origin: bounds.min,
            cell,
            cols,
            rows,
            buckets: vec![Vec::new(); cols * rows],
        }
    }

    fn cell_of(&self, p: Point<T>) -> (usize, usize) {
        let cx = ((p.x - self.origin.x) / self.cell).floor().to_isize().unwrap_or(0);
        let cy = ((p.y - self.origin.y) / self.cell).floor().to_isize().unwrap_or(0);
        (
            cx.clamp(0, self.cols as isize - 1) as usize,
            cy.clamp(0, self.rows as isize - 1) as usize,
        )
    }

    fn insert(&mut self, p: Point<T>, idx: usize) {
        let (cx, cy) = self.cell_of(p);
        self.buckets[cy * self.cols + cx].push(idx);
    }

    fn ring(&self, cx: usize, cy: usize, k: usize, mut f: impl FnMut(usize)) {
        let (cx, cy, k) = (cx as isize, cy as isize, k as isize);
        for y in (cy - k)..=(cy + k) {
            if y < 0 || y >= self.rows as isize {
                continue;
            }
            let on_edge_row = y == cy - k || y == cy + k;
            let mut x = cx - k;
            while x <= cx + k {
                if x >= 0 && x < self.cols as isize {
                    for &i in &self.buckets[y as usize * self.cols + x as usize] {
                        f(i);
                    }
                }
                x += if on_edge_row || k == 0 { 1 } else { 2 * k };
            }
        }
    }

    fn nearest(&self, nodes: &[PlanNode<T>], p: Point<T>) -> usize {
        let (cx, cy) = self.cell_of(p);
        let mut best: Option<(T, usize)> = None;
        let max_k = self.cols.max(self.rows);
        for k in 0..=max_k {
            self.ring(cx, cy, k, |i| {
                let d = (nodes[i].position - p).norm_sq();
                match best {
                    Some((bd, bi)) if d > bd || (d == bd && i > bi) => {}
                    _ => best = Some((d, i)),
                }
            });
            if let Some((bd, _)) = best {
                let reach = self.cell * T::from_usize(k).unwrap();
                if bd <= reach * reach {
                    break;
                }
            }
        }
        best.map(|(_, i)| i).unwrap_or(0)
    }

    /// Indices within `radius` of `p`, ascending.
    fn within(&self, nodes: &[PlanNode<T>], p: Point<T>, radius: T) -> Vec<usize> {
        let (cx, cy) = self.cell_of(p);
        let rings = (radius / self.cell).ceil().to_usize().unwrap_or(1);
        let r_sq = radius * radius;
        let mut out = Vec::new();
        for k in 0..=rings {
            self.ring(cx, cy, k, |i| {
                if (nodes[i].position - p).norm_sq() <= r_sq {
                    out.push(i);
                }
            });
        }
        out.sort_unstable();
        out
    }
}

/// Incremental RRT* tree. Iterations can be added in batches; the tree after
/// `a + b` iterations equals the tree after `a` then `b`.
#[derive(Debug, Clone)]
pub struct RrtStar<T> {
    space: FreeSpace<T>,
    bounds: Rect<T>,
    dest: Point<T>,
    params: RrtParams<T>,
    rng: ChaCha8Rng,
    nodes: Vec<PlanNode<T>>,
    grid: Grid<T>,
    goal_candidates: Vec<usize>,
    iterations: usize,
}

impl<T: Real> RrtStar<T> {
    pub fn new(
        src: Point<T>,
        dest: Point<T>,
        obstacles: &[Obstacle<T>],
        bounds: Rect<T>,
        clearance: T,
        params: RrtParams<T>,
        seed: u64,
    ) -> Result<Self> {
        if !(params.step_eta > T::zero()) || !(clearance >= T::zero()) {
            return Err(Error::InvalidInput("step_eta must be > 0 and clearance >= 0".into()));
        }
        let space = FreeSpace::new(bounds, obstacles, clearance);
        if !space.point_free(src) {
            return Err(Error::Precondition(format!(
                "source ({}, {}) is outside the bounds or inside an inflated obstacle",
                src.x, src.y
            )));
        }
        if !space.point_free(dest) {
            return Err(Error::Precondition(format!(
                "destination ({}, {}) is outside the bounds or inside an inflated obstacle",
                dest.x, dest.y
            )));
        }
        let mut grid = Grid::new(bounds, params.step_eta);
        grid.insert(src, 0);
        let mut tree = Self {
            space,
            bounds,
            dest,
            params,
            rng: ChaCha8Rng::seed_from_u64(seed),
            nodes: vec![PlanNode {
                position: src,
                parent: None,
                cost: T::zero(),
                children: Vec::new(),
            }],
            grid,
            goal_candidates: Vec::new(),
            iterations: 0,
        };
        tree.note_goal(0);
        Ok(tree)
    }

    pub fn nodes(&self) -> &[PlanNode<T>] {
        &self.nodes
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    fn sample(&mut self) -> Point<T> {
        let goal: f64 = self.rng.gen();
        let ux: f64 = self.rng.gen();
        let uy: f64 = self.rng.gen();
        if T::lit(goal) < self.params.goal_bias {
            return self.dest;
        }
        let b = self.bounds;
        Vec2::new(b.min.x + b.width() * T::lit(ux), b.min.y + b.height() * T::lit(uy))
    }

    fn note_goal(&mut self, idx: usize) {
        let p = self.nodes[idx].position;
        if p.distance(self.dest) <= self.params.step_eta && self.space.segment_free(p, self.dest) {
            self.goal_candidates.push(idx);
        }
    }

    pub fn run(&mut self, iterations: usize) {
        for _ in 0..iterations {
            self.iterate();
        }
    }

    fn iterate(&mut self) {
        self.iterations += 1;
        let sample = self.sample();
        let nearest = self.grid.nearest(&self.nodes, sample);
        let from = self.nodes[nearest].position;
        let to = sample - from;
        let dist = to.norm();
        if dist == T::zero() {
            return;
        }
        let new = if dist > self.params.step_eta {
            from + to * (self.params.step_eta / dist)
        } else {
            sample
        };
        if !self.space.point_free(new) || !self.space.segment_free(from, new) {
            return;
        }

        let n = T::from_usize(self.nodes.len() + 1).unwrap();
        let radius = (self.params.rewire_gamma * (n.ln() / n).sqrt()).min(self.params.step_eta);
        let near = self.grid.within(&self.nodes, new, radius);

        let mut parent = nearest;
        let mut cost = self.nodes[nearest].cost + dist.min(self.params.step_eta);
        for &i in &near {
            let c = self.nodes[i].cost + self.nodes[i].position.distance(new);
            if c < cost && self.space.segment_free(self.nodes[i].position, new) {
                parent = i;
                cost = c;
            }
        }
        // recompute from the chosen parent so stored costs are exact sums
        cost = self.nodes[parent].cost + self.nodes[parent].position.distance(new);

        let idx = self.nodes.len();
        self.nodes.push(PlanNode {
            position: new,
            parent: Some(parent),
            cost,
            children: Vec::new(),
        });
        self.nodes[parent].children.push(idx);
        self.grid.insert(new, idx);

        for &i in &near {
            if i == parent {
                continue;
            }
            let pos = self.nodes[i].position;
            let via = cost + new.distance(pos);
            if via < self.nodes[i].cost && self.space.segment_free(new, pos) {
                self.reparent(i, idx);
            }
        }
        self.note_goal(idx);
    }

    fn reparent(&mut self, node: usize, new_parent: usize) {
        if let Some(old) = self.nodes[node].parent {
            self.nodes[old].children.retain(|&c| c != node);
        }
        self.nodes[node].parent = Some(new_parent);
        self.nodes[new_parent].children.push(node);
        // refresh costs of the whole subtree
        let mut stack = vec![node];
        while let Some(i) = stack.pop() {
            let p = self.nodes[i].parent.expect("non-root");
            self.nodes[i].cost = self.nodes[p].cost + self.nodes[p].position.distance(self.nodes[i].position);
            stack.extend(self.nodes[i].children.iter().copied());
        }
    }

    /// Cost of the best path found so far.
    pub fn best_cost(&self) -> Option<T> {
        self.best_goal().map(|(_, c)| c)
    }

    fn best_goal(&self) -> Option<(usize, T)> {
        let mut best: Option<(usize, T)> = None;
        for &i in &self.goal_candidates {
            let c = self.nodes[i].cost + self.nodes[i].position.distance(self.dest);
            if best.is_none_or(|(_, bc)| c < bc) {
                best = Some((i, c));
            }
        }
        best
    }

    /// Best path so far, root to destination.
    pub fn best_path(&self) -> Option<Path<T>> {
        let (mut i, _) = self.best_goal()?;
        let mut rev = vec![self.dest];
        loop {
            let p = self.nodes[i].position;
            if rev.last() != Some(&p) {
                rev.push(p);
            }
            match self.nodes[i].parent {
                Some(parent) => i = parent,
                None => break,
            }
        }
        rev.reverse();
        Some(Path::new(rev))
    }
}

/// Plans a path from `src` to `dest` keeping at least `clearance` from every
/// obstacle boundary.
pub fn plan<T: Real>(
    src: Point<T>,
    dest: Point<T>,
    obstacles: &[Obstacle<T>],
    bounds: Rect<T>,
    clearance: T,
    params: &RrtParams<T>,
    seed: u64,
) -> Result<Path<T>> {
    let mut tree = RrtStar::new(src, dest, obstacles, bounds, clearance, *params, seed)?;
    tree.run(params.max_iters);
    tree.best_path().ok_or(Error::PlanningFailure {
        iterations: params.max_iters,
    })
}

/// Resamples a polyline at arc-length multiples of `spacing`, keeping every
/// original vertex.
pub fn interpolate<T: Real>(path: &Path<T>, spacing: T) -> Result<Path<T>> {
    if !(spacing > T::zero()) || !spacing.is_finite() {
        return Err(Error::InvalidInput(format!("spacing must be > 0, got {spacing}")));
    }
    let Some(&first) = path.points.first() else {
        return Ok(Path::new(Vec::new()));
    };
    let eps = T::geom_eps() * spacing;
    let mut out = vec![first];
    let mut walked = T::zero();
    let mut k: u64 = 1;
    for w in path.points.windows(2) {
        let (a, b) = (w[0], w[1]);
        let len = a.distance(b);
        if len == T::zero() {
            continue;
        }
        loop {
            let mark = T::from_u64(k).unwrap() * spacing;
            if mark >= walked + len - eps {
                break;
            }
            out.push(a + (b - a) * ((mark - walked) / len));
            k += 1;
        }
        out.push(b);
        walked += len;
        while T::from_u64(k).unwrap() * spacing <= walked + eps {
            k += 1;
        }
    }
    Ok(Path::new(out))
}
