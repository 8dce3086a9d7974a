use std::collections::VecDeque;

use rustc_hash::FxHashMap;

use serde::{Deserialize, Serialize};

use crate::pointcloud::Point3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DbscanConfig {
    /// Neighbourhood radius, meters (inclusive).
    pub eps: f64,
    /// Neighbours within `eps`, self included, needed for a core point.
    pub min_points: usize,
}

impl Default for DbscanConfig {
    fn default() -> Self {
        Self {
            eps: 0.03,
            min_points: 30,
        }
    }
}

/// Member indices into the clustered point slice, ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cluster {
    pub indices: Vec<usize>,
}

impl Cluster {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Uniform grid with cell size `eps`. Points are stored cell by cell and each cell
/// keeps the list of its occupied neighbour cells.
struct Grid<'a> {
    points: &'a [Point3],
    eps2: f64,
    /// Point indices grouped by cell.
    order: Vec<usize>,
    /// Coordinates in `order`.
    coords: Vec<Point3>,
    /// Cell `c` owns `order[cell_start[c]..cell_start[c + 1]]`.
    cell_start: Vec<usize>,
    cell_of: Vec<usize>,
    adj_start: Vec<usize>,
    adj: Vec<usize>,
}

impl<'a> Grid<'a> {
    fn new(points: &'a [Point3], eps: f64) -> Self {
        // cell ids in order of first appearance, then a counting sort by cell
        let mut lookup: FxHashMap<[i64; 3], usize> = FxHashMap::default();
        let mut cell_keys: Vec<[i64; 3]> = Vec::new();
        let cell_of: Vec<usize> = points
            .iter()
            .map(|p| {
                let key = Self::key(p, eps);
                *lookup.entry(key).or_insert_with(|| {
                    cell_keys.push(key);
                    cell_keys.len() - 1
                })
            })
            .collect();
        let mut cell_start = vec![0; cell_keys.len() + 1];
        for &c in &cell_of {
            cell_start[c + 1] += 1;
        }
        for c in 0..cell_keys.len() {
            cell_start[c + 1] += cell_start[c];
        }
        let mut fill = cell_start.clone();
        let mut order = vec![0; points.len()];
        for (i, &c) in cell_of.iter().enumerate() {
            order[fill[c]] = i;
            fill[c] += 1;
        }

        let mut adj_start = Vec::with_capacity(cell_keys.len() + 1);
        let mut adj = Vec::new();
        for [kx, ky, kz] in &cell_keys {
            adj_start.push(adj.len());
            for dx in -1..=1 {
                for dy in -1..=1 {
                    for dz in -1..=1 {
                        if let Some(&c) = lookup.get(&[kx + dx, ky + dy, kz + dz]) {
                            adj.push(c);
                        }
                    }
                }
            }
        }
        adj_start.push(adj.len());

        Self {
            points,
            eps2: eps * eps,
            coords: order.iter().map(|&i| points[i]).collect(),
            order,
            cell_start,
            cell_of,
            adj_start,
            adj,
        }
    }

    fn key(p: &Point3, cell: f64) -> [i64; 3] {
        [
            (p.x / cell).floor() as i64,
            (p.y / cell).floor() as i64,
            (p.z / cell).floor() as i64,
        ]
    }

    fn neighbors(&self, i: usize, out: &mut Vec<usize>) {
        out.clear();
        let p = self.points[i];
        let c = self.cell_of[i];
        for &nc in &self.adj[self.adj_start[c]..self.adj_start[c + 1]] {
            for k in self.cell_start[nc]..self.cell_start[nc + 1] {
                if (self.coords[k] - p).norm_squared() <= self.eps2 {
                    out.push(self.order[k]);
                }
            }
        }
    }
}

/// Lexicographic (x, y, z) order of the points, ties by index.
pub(crate) fn canonical_order(points: &[Point3]) -> Vec<usize> {
    // integer keys with the same order as f64::total_cmp
    let key = |v: f64| {
        let b = v.to_bits() as i64;
        b ^ ((((b >> 63) as u64) >> 1) as i64)
    };
    let keys: Vec<[i64; 3]> = points.iter().map(|p| [key(p.x), key(p.y), key(p.z)]).collect();
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_unstable_by_key(|&i| (keys[i], i));
    order
}

/// Density-based clustering with a Euclidean metric; noise points are not returned.
///
/// Seeds are visited in canonical (lexicographic) point order, so a border point
/// reachable from several clusters joins the one whose first core point comes first.
/// Clusters are returned in that creation order.
pub fn dbscan(points: &[Point3], cfg: &DbscanConfig) -> Vec<Cluster> {
    const UNASSIGNED: usize = usize::MAX;
    let n = points.len();
    if n == 0 || !(cfg.eps > 0.0) {
        return Vec::new();
    }
    let grid = Grid::new(points, cfg.eps);
    let mut label = vec![UNASSIGNED; n];
    let mut visited = vec![false; n];
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    let mut neigh = Vec::new();
    let mut queue = VecDeque::new();

    for seed in canonical_order(points) {
        if visited[seed] {
            continue;
        }
        visited[seed] = true;
        grid.neighbors(seed, &mut neigh);
        if neigh.len() < cfg.min_points {
            // may still be claimed later as a border point
            continue;
        }
        let id = clusters.len();
        let mut members = vec![seed];
        label[seed] = id;
        queue.extend(neigh.iter().copied());
        while let Some(q) = queue.pop_front() {
            if label[q] == UNASSIGNED {
                label[q] = id;
                members.push(q);
            }
            if visited[q] {
                continue;
            }
            visited[q] = true;
            grid.neighbors(q, &mut neigh);
            if neigh.len() >= cfg.min_points {
                queue.extend(neigh.iter().copied().filter(|&r| label[r] == UNASSIGNED || !visited[r]));
            }
        }
        members.sort_unstable();
        members.dedup();
        clusters.push(members);
    }
    clusters.into_iter().map(|indices| Cluster { indices }).collect()
}
