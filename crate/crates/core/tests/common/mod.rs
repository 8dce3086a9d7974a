//! Brute-force references shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use eotrack::pointcloud::Point3;

/// Textbook DBSCAN by explicit density connectivity, O(n^2).
///
/// Core components are the connected components of the core-core neighbour graph,
/// numbered by their first core point in lexicographic order. A border point joins
/// the lowest-numbered component among its core neighbours.
pub fn brute_force_dbscan(points: &[Point3], eps: f64, min_points: usize) -> Vec<Vec<usize>> {
    let n = points.len();
    let near = |i: usize, j: usize| (points[i] - points[j]).norm() <= eps;
    let core: Vec<bool> = (0..n).map(|i| (0..n).filter(|&j| near(i, j)).count() >= min_points).collect();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let (p, q) = (points[a], points[b]);
        p.x.total_cmp(&q.x)
            .then(p.y.total_cmp(&q.y))
            .then(p.z.total_cmp(&q.z))
            .then(a.cmp(&b))
    });

    let mut component = vec![usize::MAX; n];
    let mut count = 0;
    for &seed in &order {
        if !core[seed] || component[seed] != usize::MAX {
            continue;
        }
        let mut stack = vec![seed];
        component[seed] = count;
        while let Some(i) = stack.pop() {
            for j in 0..n {
                if core[j] && component[j] == usize::MAX && near(i, j) {
                    component[j] = count;
                    stack.push(j);
                }
            }
        }
        count += 1;
    }

    let mut clusters = vec![BTreeSet::new(); count];
    for i in 0..n {
        let c = if core[i] {
            Some(component[i])
        } else {
            (0..n).filter(|&j| core[j] && near(i, j)).map(|j| component[j]).min()
        };
        if let Some(c) = c {
            clusters[c].insert(i);
        }
    }
    clusters.into_iter().map(|s| s.into_iter().collect()).collect()
}

/// Number of distinct half-open voxels `[i a, (i + 1) a)` occupied by `points`.
pub fn occupied_voxels(points: &[Point3], cell: f64) -> usize {
    points
        .iter()
        .map(|p| {
            (
                (p.x / cell).floor() as i64,
                (p.y / cell).floor() as i64,
                (p.z / cell).floor() as i64,
            )
        })
        .collect::<BTreeSet<_>>()
        .len()
}
