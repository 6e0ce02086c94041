use crate::error::{Error, Result};

/// `a` dominates `b` under minimization.
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y) && a.iter().zip(b).any(|(x, y)| x < y)
}

/// 1-based non-dominated front index of every point.
pub fn non_dominated_fronts(points: &[Vec<f64>]) -> Vec<usize> {
    let n = points.len();
    let mut dominated_by = vec![0usize; n];
    let mut dominates_list: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in 0..n {
            if i != j && dominates(&points[i], &points[j]) {
                dominates_list[i].push(j);
                dominated_by[j] += 1;
            }
        }
    }
    let mut front = vec![0usize; n];
    let mut current: Vec<usize> = (0..n).filter(|&i| dominated_by[i] == 0).collect();
    let mut level = 1;
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            front[i] = level;
            for &j in &dominates_list[i] {
                dominated_by[j] -= 1;
                if dominated_by[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        current = next;
        level += 1;
    }
    front
}

/// Crowding distance of each member of one front; boundary points get
/// infinity.
pub fn crowding_distances(points: &[Vec<f64>], members: &[usize]) -> Vec<f64> {
    let mut dist = vec![0.0; members.len()];
    if members.len() <= 2 {
        return vec![f64::INFINITY; members.len()];
    }
    let m = points[members[0]].len();
    for obj in 0..m {
        let mut order: Vec<usize> = (0..members.len()).collect();
        order.sort_by(|&a, &b| points[members[a]][obj].total_cmp(&points[members[b]][obj]));
        let lo = points[members[order[0]]][obj];
        let hi = points[members[*order.last().expect("non-empty")]][obj];
        dist[order[0]] = f64::INFINITY;
        dist[*order.last().expect("non-empty")] = f64::INFINITY;
        if hi > lo {
            for w in 1..order.len() - 1 {
                let gap = points[members[order[w + 1]]][obj] - points[members[order[w - 1]]][obj];
                dist[order[w]] += gap / (hi - lo);
            }
        }
    }
    dist
}

/// Scalar factorial cost of every individual for one task in multi-objective
/// mode.
///
/// Feasible individuals cost `front + 0.5 / (1 + crowding)`, so the front
/// index dominates and less crowded points break ties. Infeasible
/// individuals cost `(worst feasible front + 1) + violation`, behind every
/// feasible one and ordered by violation.
pub fn per_task_mo_cost(objectives: &[Vec<f64>], feasible: &[bool], violation: &[f64]) -> Result<Vec<f64>> {
    if let Some(i) = objectives.iter().position(Vec::is_empty) {
        return Err(Error::MissingObjectives(i));
    }
    let idx: Vec<usize> = (0..objectives.len()).filter(|&i| feasible[i]).collect();
    let pts: Vec<Vec<f64>> = idx.iter().map(|&i| objectives[i].clone()).collect();
    let fronts = non_dominated_fronts(&pts);
    let worst = fronts.iter().copied().max().unwrap_or(0);
    let mut cost = vec![0.0; objectives.len()];
    for level in 1..=worst {
        let members: Vec<usize> = (0..pts.len()).filter(|&j| fronts[j] == level).collect();
        let crowd = crowding_distances(&pts, &members);
        for (m, c) in members.iter().zip(crowd) {
            cost[idx[*m]] = level as f64 + 0.5 / (1.0 + c);
        }
    }
    for i in 0..objectives.len() {
        if !feasible[i] {
            cost[i] = (worst + 1) as f64 + violation[i];
        }
    }
    Ok(cost)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn front_examples() {
        let pts = vec![vec![0.5, 0.5]];
        assert_eq!(non_dominated_fronts(&pts), vec![1]);
        let pts = vec![vec![0.2, 0.2], vec![0.4, 0.4], vec![0.1, 0.9]];
        assert_eq!(non_dominated_fronts(&pts), vec![1, 2, 1]);
        let c = per_task_mo_cost(&pts, &[true; 3], &[0.0; 3]).unwrap();
        assert!(c[1] > c[0]);
    }

    #[test]
    fn infeasible_behind_feasible() {
        let pts = vec![vec![0.9, 0.9], vec![0.0, 0.0], vec![0.1, 0.1]];
        let c = per_task_mo_cost(&pts, &[true, false, false], &[0.0, 0.3, 0.1]).unwrap();
        assert!(c[0] < c[2] && c[2] < c[1]);
        assert!(matches!(per_task_mo_cost(&[vec![]], &[true], &[0.0]), Err(Error::MissingObjectives(0))));
    }

    proptest! {
        // Exhaustive pairwise dominance check on small random sets.
        #[test]
        fn dominators_cost_less(pts in proptest::collection::vec(
            proptest::collection::vec(0.0f64..1.0, 2), 5)) {
            let c = per_task_mo_cost(&pts, &[true; 5], &[0.0; 5]).unwrap();
            let f = non_dominated_fronts(&pts);
            for i in 0..5 {
                for j in 0..5 {
                    if dominates(&pts[i], &pts[j]) {
                        prop_assert!(c[i] < c[j]);
                        prop_assert!(f[i] < f[j]);
                    }
                }
                let dominated = (0..5).any(|j| dominates(&pts[j], &pts[i]));
                prop_assert_eq!(f[i] == 1, !dominated);
            }
        }
    }
}
