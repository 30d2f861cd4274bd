use super::{DecoderTrace, IterationRecord};
use crate::channel::ResidualGraph;

/// Flooding belief propagation on the residual graph.
///
/// Messages are "known" or "erased". A CN sends a known message to `v` when
/// every other incoming message is known; a VN sends a known message to `c`
/// when some other CN sent it a known one (extrinsic rule; residual VNs have
/// no channel information). A VN is resolved in the first iteration it
/// receives any known message. Stops once no message changes or after
/// `max_iters` iterations.
pub fn bp(residual: &ResidualGraph, max_iters: usize) -> DecoderTrace {
    let n = residual.vn_count();
    let cns = residual.cn_count();
    let edges = residual.edge_count();
    // edge ids follow CN-side adjacency order
    let mut cn_start = Vec::with_capacity(cns + 1);
    cn_start.push(0usize);
    for c in 0..cns {
        cn_start.push(cn_start[c] + residual.cn_degree(c));
    }
    let mut vn_edges: Vec<Vec<u32>> = (0..n).map(|v| Vec::with_capacity(residual.vn_degree(v))).collect();
    for c in 0..cns {
        for (i, &v) in residual.cn_neighbors(c).iter().enumerate() {
            vn_edges[v as usize].push((cn_start[c] + i) as u32);
        }
    }

    let mut v2c = vec![false; edges];
    let mut c2v = vec![false; edges];
    let mut unresolved = vec![true; n];
    let mut remaining = n;
    let mut records = Vec::new();

    for iteration in 1..=max_iters.max(1) {
        let deg1_count = (0..cns)
            .filter(|&c| {
                residual
                    .cn_neighbors(c)
                    .iter()
                    .filter(|&&v| unresolved[v as usize])
                    .count()
                    == 1
            })
            .count();

        let mut changed = false;
        for c in 0..cns {
            let span = cn_start[c]..cn_start[c + 1];
            let erased_in = v2c[span.clone()].iter().filter(|&&k| !k).count();
            for e in span {
                let known = erased_in - usize::from(!v2c[e]) == 0;
                changed |= known != c2v[e];
                c2v[e] = known;
            }
        }

        let mut resolved = Vec::new();
        let mut multi = 0;
        for v in 0..n {
            let known_in = vn_edges[v].iter().filter(|&&e| c2v[e as usize]).count();
            if unresolved[v] && known_in > 0 {
                unresolved[v] = false;
                resolved.push(v as u32);
                if known_in >= 2 {
                    multi += 1;
                }
            }
            for &e in &vn_edges[v] {
                let known = known_in - usize::from(c2v[e as usize]) > 0;
                changed |= known != v2c[e as usize];
                v2c[e as usize] = known;
            }
        }

        if !changed {
            break;
        }
        remaining -= resolved.len();
        records.push(IterationRecord {
            iteration,
            deg1_count,
            resolved,
            residual_vn_count: remaining,
            multi_deg1_vns: multi,
        });
    }
    DecoderTrace::finish(n, records, &unresolved)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decoders::fixtures::*;
    use crate::decoders::{ppd, DecodeStatus};

    #[test]
    fn empty_residual_succeeds_immediately() {
        let t = bp(&ResidualGraph::from_edges(0, 0, &[]).unwrap(), 10);
        assert_eq!(t.status, DecodeStatus::Success);
        assert!(t.iterations.is_empty());
    }

    #[test]
    fn stopping_set_messages_stay_erased() {
        let t = bp(&cycle(), 50);
        assert_eq!(t.status, DecodeStatus::Stalled);
        assert_eq!(t.total_resolved(), 0);
    }

    #[test]
    fn matches_ppd_on_fixtures() {
        for r in [path(), star(4), chain(7), cycle()] {
            let a = bp(&r, 100);
            let b = ppd(&r);
            assert_eq!(a.resolved_sets(), b.resolved_sets());
            assert_eq!(a.status, b.status);
        }
    }

    #[test]
    fn max_iters_truncates() {
        let t = bp(&chain(10), 3);
        assert_eq!(t.total_resolved(), 3);
        assert_eq!(t.status, DecodeStatus::Stalled);
    }

    #[test]
    fn stopping_set_attached_to_decodable_part() {
        // VN2 hangs off the cycle {0,1} through CN2 (which touches both cycle
        // VNs) and has its own deg-1 CN3: VN2 resolves, the cycle never does.
        let r = ResidualGraph::from_edges(
            3,
            4,
            &[(0, 0), (1, 0), (0, 1), (1, 1), (0, 2), (1, 2), (2, 2), (2, 3)],
        )
        .unwrap();
        let t = bp(&r, 20);
        assert_eq!(t.resolved_sets(), vec![&[2u32][..]]);
        assert_eq!(t.remaining, vec![0, 1]);
        assert_eq!(ppd(&r).resolved_sets(), t.resolved_sets());
    }
}
