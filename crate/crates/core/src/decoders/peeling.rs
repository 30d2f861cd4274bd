use rand::Rng;

use super::{DecoderTrace, IterationRecord, ResidualSnapshot};
use crate::channel::ResidualGraph;
use crate::seed;

/// The one unresolved neighbour of a CN known to have degree one.
fn sole_unresolved(residual: &ResidualGraph, c: usize, unresolved: &[bool]) -> u32 {
    *residual
        .cn_neighbors(c)
        .iter()
        .find(|&&v| unresolved[v as usize])
        .expect("deg-1 CN has an unresolved neighbour")
}

/// Parallel peeling decoder.
///
/// The deg-1 set is frozen at the start of each iteration: every VN attached
/// to one of those CNs is resolved, then all its edges are removed. CNs that
/// drop to degree one during the iteration wait for the next one.
pub fn ppd(residual: &ResidualGraph) -> DecoderTrace {
    run_ppd(residual, None)
}

/// [`ppd`] plus a residual type snapshot at the start of every iteration and
/// one after the last.
pub fn ppd_with_snapshots(residual: &ResidualGraph) -> (DecoderTrace, Vec<ResidualSnapshot>) {
    let mut snaps = Vec::new();
    let trace = run_ppd(residual, Some(&mut snaps));
    (trace, snaps)
}

fn run_ppd(residual: &ResidualGraph, mut snapshots: Option<&mut Vec<ResidualSnapshot>>) -> DecoderTrace {
    let n = residual.vn_count();
    let mut unresolved = vec![true; n];
    let mut remaining = n;
    let mut deg: Vec<u32> = (0..residual.cn_count()).map(|c| residual.cn_degree(c) as u32).collect();
    let mut hits = vec![0u8; n];
    let mut frontier: Vec<u32> = (0..residual.cn_count() as u32).filter(|&c| deg[c as usize] == 1).collect();
    let mut next = Vec::new();
    let mut records = Vec::new();
    loop {
        frontier.retain(|&c| deg[c as usize] == 1);
        if let Some(s) = snapshots.as_deref_mut() {
            s.push(ResidualSnapshot::capture(residual, &unresolved));
        }
        if frontier.is_empty() {
            break;
        }
        let mut resolved = Vec::new();
        for &c in &frontier {
            let v = sole_unresolved(residual, c as usize, &unresolved);
            if hits[v as usize] == 0 {
                resolved.push(v);
            }
            hits[v as usize] = hits[v as usize].saturating_add(1);
        }
        let multi = resolved.iter().filter(|&&v| hits[v as usize] >= 2).count();
        for &v in &resolved {
            unresolved[v as usize] = false;
            hits[v as usize] = 0;
        }
        next.clear();
        for &v in &resolved {
            for &c in residual.vn_neighbors(v as usize) {
                deg[c as usize] -= 1;
                if deg[c as usize] == 1 {
                    next.push(c);
                }
            }
        }
        remaining -= resolved.len();
        resolved.sort_unstable();
        records.push(IterationRecord {
            iteration: records.len() + 1,
            deg1_count: frontier.len(),
            resolved,
            residual_vn_count: remaining,
            multi_deg1_vns: multi,
        });
        std::mem::swap(&mut frontier, &mut next);
    }
    DecoderTrace::finish(n, records, &unresolved)
}

/// Sequential peeling decoder: one uniformly chosen deg-1 CN per iteration.
pub fn spd(residual: &ResidualGraph, seed: u64) -> DecoderTrace {
    let n = residual.vn_count();
    let cns = residual.cn_count();
    let mut rng = seed::rng(seed);
    let mut unresolved = vec![true; n];
    let mut remaining = n;
    let mut deg: Vec<u32> = (0..cns).map(|c| residual.cn_degree(c) as u32).collect();
    // deg-1 set with O(1) insert/remove
    let mut set: Vec<u32> = Vec::new();
    let mut pos = vec![u32::MAX; cns];
    for c in 0..cns {
        if deg[c] == 1 {
            pos[c] = set.len() as u32;
            set.push(c as u32);
        }
    }
    let remove = |set: &mut Vec<u32>, pos: &mut Vec<u32>, c: usize| {
        let i = pos[c] as usize;
        let last = *set.last().expect("non-empty");
        set.swap_remove(i);
        if last as usize != c {
            pos[last as usize] = i as u32;
        }
        pos[c] = u32::MAX;
    };
    let mut records = Vec::new();
    while !set.is_empty() {
        let deg1_count = set.len();
        let c = set[rng.random_range(0..set.len())] as usize;
        let v = sole_unresolved(residual, c, &unresolved);
        unresolved[v as usize] = false;
        remaining -= 1;
        let mut attached = 0;
        for &c2 in residual.vn_neighbors(v as usize) {
            let c2 = c2 as usize;
            if deg[c2] == 1 {
                attached += 1;
            }
            deg[c2] -= 1;
            match deg[c2] {
                1 => {
                    pos[c2] = set.len() as u32;
                    set.push(c2 as u32);
                }
                0 if pos[c2] != u32::MAX => remove(&mut set, &mut pos, c2),
                _ => {}
            }
        }
        records.push(IterationRecord {
            iteration: records.len() + 1,
            deg1_count,
            resolved: vec![v],
            residual_vn_count: remaining,
            multi_deg1_vns: usize::from(attached >= 2),
        });
    }
    DecoderTrace::finish(n, records, &unresolved)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decoders::fixtures::*;
    use crate::decoders::{classify_cns, DecodeStatus};

    #[test]
    fn empty_residual() {
        let r = ResidualGraph::from_edges(0, 0, &[]).unwrap();
        for t in [ppd(&r), spd(&r, 1)] {
            assert_eq!(t.status, DecodeStatus::Success);
            assert_eq!(t.stopping_time(), Some(0));
            assert!(t.iterations.is_empty());
        }
    }

    #[test]
    fn cycle_is_a_stopping_set() {
        for t in [ppd(&cycle()), spd(&cycle(), 3)] {
            assert_eq!(t.status, DecodeStatus::Stalled);
            assert_eq!(t.total_resolved(), 0);
            assert_eq!(t.remaining, vec![0, 1]);
        }
    }

    #[test]
    fn path_resolves_in_order() {
        let t = spd(&path(), 5);
        assert_eq!(t.resolved_sets(), vec![&[0u32][..], &[1][..]]);
        assert_eq!(t.stopping_time(), Some(2));
        assert_eq!(ppd(&path()).resolved_sets(), t.resolved_sets());
    }

    #[test]
    fn star_resolves_in_one_iteration() {
        let t = ppd(&star(3));
        assert_eq!(t.stopping_time(), Some(1));
        assert_eq!(t.iterations[0].deg1_count, 3);
        assert_eq!(t.iterations[0].resolved, vec![0]);
        assert_eq!(t.iterations[0].multi_deg1_vns, 1);
        // SPD needs one iteration too; the other two CNs drop to degree 0.
        assert_eq!(spd(&star(3), 1).stopping_time(), Some(1));
    }

    #[test]
    fn chain_moves_one_vn_per_iteration() {
        for d in [1, 2, 5, 12] {
            let t = ppd(&chain(d));
            assert_eq!(t.stopping_time(), Some(d));
            assert!(t.iterations.iter().enumerate().all(|(i, r)| r.resolved == vec![i as u32]));
            assert!(t.iterations.iter().all(|r| r.deg1_count == 1));
        }
    }

    #[test]
    fn snapshots_track_deg1_counts() {
        let (t, snaps) = ppd_with_snapshots(&chain(4));
        assert_eq!(snaps.len(), t.iterations.len() + 1);
        for (r, s) in t.iterations.iter().zip(&snaps) {
            assert_eq!(s.deg1_count(), r.deg1_count);
        }
        assert!(snaps.last().unwrap().cn_types.is_empty());
    }

    #[test]
    fn classes_match_first_iteration() {
        let r = path();
        let classes = classify_cns(&r, &[true, true]);
        assert_eq!(classes.c1, vec![0]);
        assert_eq!(classes.c_ge2, vec![1]);
        assert_eq!(ppd(&r).iterations[0].deg1_count, classes.c1.len());
    }

    #[test]
    fn parallel_edge_is_not_deg1() {
        let r = ResidualGraph::from_edges(1, 1, &[(0, 0), (0, 0)]).unwrap();
        assert_eq!(ppd(&r).status, DecodeStatus::Stalled);
    }
}
