//! k-neighbour bootstrap percolation on the box [−ℓ,ℓ]^d: the closure map,
//! the origin's cluster, the boundary test function f, the spanning event B
//! and pivotal-edge detection.
//!
//! The BP map ignores neighbours outside the box (free boundary); this is
//! distinct from the occupied-exterior convention used for KA constraints.

use crate::lattice::{Configuration, Coords, Edge, LatticeGeometry, NeighborTable};
use crate::rng;
use crate::stats::wilson_interval;
use rayon::prelude::*;
use std::collections::VecDeque;

/// Geometry of the BP box [−ℓ,ℓ]^d (side 2ℓ+1, occupied exterior for any
/// constraint evaluation on it).
pub fn bp_box(d: usize, ell: usize) -> LatticeGeometry {
    LatticeGeometry::occupied_exterior(&vec![2 * ell + 1; d])
}

/// Half-width of a centred cube geometry.
pub fn half_width(geom: &LatticeGeometry) -> usize {
    let e = geom.extents()[0];
    assert!(geom.extents().iter().all(|&x| x == e), "BP box must be a cube");
    assert!(e % 2 == 1, "BP box side must be odd");
    (e - 1) / 2
}

fn center_index(geom: &LatticeGeometry) -> usize {
    let ell = half_width(geom) as i64;
    geom.index(&vec![ell; geom.d()]).expect("centre in box")
}

/// Site coordinates relative to the box centre.
pub fn centered_coords(geom: &LatticeGeometry, idx: usize) -> Coords {
    let ell = half_width(geom) as i64;
    geom.coords(idx).into_iter().map(|c| c - ell).collect()
}

/// One synchronous BP step: empty sites stay empty, an occupied site with at
/// least k empty in-box neighbours becomes empty.
pub fn bp_step(cfg: &Configuration, k: u32) -> Configuration {
    let geom = cfg.geometry();
    let mut out = cfg.clone();
    for idx in 0..geom.n_sites() {
        if !cfg.occupied(idx) {
            continue;
        }
        let empties = geom
            .neighbor_indices(idx)
            .into_iter()
            .flatten()
            .filter(|&n| !cfg.occupied(n))
            .count();
        if empties >= k as usize {
            out.set(idx, false);
        }
    }
    out
}

/// The limiting configuration BP^∞, computed with a frontier queue: only
/// neighbours of newly emptied sites are re-examined.
pub fn bp_closure(cfg: &Configuration, k: u32) -> Configuration {
    let geom = cfg.geometry();
    let n = geom.n_sites();
    let mut out = cfg.clone();
    let mut empty_nbrs = vec![0u8; n];
    let mut frontier: VecDeque<usize> = (0..n).filter(|&i| !cfg.occupied(i)).collect();
    while let Some(idx) = frontier.pop_front() {
        for nb in geom.neighbor_indices(idx).into_iter().flatten() {
            empty_nbrs[nb] += 1;
            if out.occupied(nb) && empty_nbrs[nb] as u32 == k {
                out.set(nb, false);
                frontier.push_back(nb);
            }
        }
    }
    out
}

/// Sites x reachable from the origin by a nearest-neighbour path whose sites
/// after the origin are all empty in BP^∞. The origin itself belongs to the
/// cluster iff it is empty in the closure; it is always a valid path start.
pub fn origin_cluster(cfg: &Configuration, k: u32) -> Vec<usize> {
    let closure = bp_closure(cfg, k);
    let geom = cfg.geometry();
    let origin = center_index(geom);
    let mut seen = vec![false; geom.n_sites()];
    let mut queue: VecDeque<usize> = VecDeque::new();
    let mut cluster = Vec::new();
    let mut visit = |idx: usize,
                     seen: &mut Vec<bool>,
                     cluster: &mut Vec<usize>,
                     queue: &mut VecDeque<usize>| {
        if !closure.occupied(idx) && !seen[idx] {
            seen[idx] = true;
            cluster.push(idx);
            queue.push_back(idx);
        }
    };
    if !closure.occupied(origin) {
        visit(origin, &mut seen, &mut cluster, &mut queue);
    } else {
        for nb in geom.neighbor_indices(origin).into_iter().flatten() {
            visit(nb, &mut seen, &mut cluster, &mut queue);
        }
    }
    while let Some(idx) = queue.pop_front() {
        for nb in geom.neighbor_indices(idx).into_iter().flatten() {
            visit(nb, &mut seen, &mut cluster, &mut queue);
        }
    }
    cluster
}

/// First coordinate of the rightmost site of the origin's BP cluster;
/// 0 when the cluster is empty.
pub fn test_function_f(cfg: &Configuration, k: u32) -> i64 {
    let geom = cfg.geometry();
    origin_cluster(cfg, k)
        .into_iter()
        .map(|idx| centered_coords(geom, idx)[0])
        .max()
        .unwrap_or(0)
}

/// Event B: the origin's cluster contains a site of ∞-norm at least ℓ−1.
pub fn event_b(cfg: &Configuration, k: u32) -> bool {
    let geom = cfg.geometry();
    let ell = half_width(geom) as i64;
    origin_cluster(cfg, k)
        .into_iter()
        .any(|idx| centered_coords(geom, idx).iter().map(|c| c.abs()).max().unwrap() >= ell - 1)
}

/// Copy the BP window [−ℓ,ℓ]^d centred at `centre + shift` out of a larger
/// centred cube configuration.
pub fn bp_window(cfg: &Configuration, ell: usize, shift: &[i64]) -> Configuration {
    let geom = cfg.geometry();
    let big = half_width(geom) as i64;
    let lo: Coords = shift.iter().map(|&s| big - ell as i64 + s).collect();
    cfg.window(&lo, &vec![2 * ell + 1; geom.d()])
}

/// Is the edge pivotal: the KA constraint holds on the ambient configuration
/// and swapping the edge changes f of the restriction to [−ℓ,ℓ]^d?
///
/// `cfg` lives on an enlarged centred cube (at least (2ℓ+3)^d) so that the
/// constraint is well-defined near the BP box boundary.
pub fn is_pivotal(
    cfg: &Configuration,
    table: &NeighborTable,
    k: u32,
    ell: usize,
    e: Edge,
) -> bool {
    if !cfg.constraint(table, k, e) {
        return false;
    }
    let zero = vec![0i64; cfg.geometry().d()];
    let f0 = test_function_f(&bp_window(cfg, ell, &zero), k);
    let f1 = test_function_f(&bp_window(&cfg.swap(e), ell, &zero), k);
    f0 != f1
}

/// Monte Carlo estimate of μ(B).
#[derive(Debug, Clone)]
pub struct MuBEstimate {
    pub q: f64,
    pub k: u32,
    pub d: usize,
    pub ell: usize,
    pub n: u64,
    pub hits: u64,
    pub estimate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub seed: u64,
}

/// Frequency of event B over n i.i.d. μ-samples on the BP box, with a 95%
/// Wilson interval. Samples are sharded over threads by stream index, so the
/// result depends only on the seed.
pub fn estimate_mu_b(q: f64, k: u32, d: usize, ell: usize, n: u64, seed: u64) -> MuBEstimate {
    let geom = bp_box(d, ell);
    let shards: u64 = 64.min(n.max(1));
    let per = n / shards;
    let rem = n % shards;
    let hits: u64 = (0..shards)
        .into_par_iter()
        .map(|s| {
            let mut rng = rng::stream(seed, s);
            let m = per + u64::from(s < rem);
            let mut h = 0u64;
            for _ in 0..m {
                let cfg = Configuration::sample(geom.clone(), q, &mut rng).expect("valid q");
                if event_b(&cfg, k) {
                    h += 1;
                }
            }
            h
        })
        .sum();
    let estimate = hits as f64 / n as f64;
    let (ci_lo, ci_hi) = wilson_interval(hits, n, 1.96);
    MuBEstimate { q, k, d, ell, n, hits, estimate, ci_lo, ci_hi, seed }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Boundary;
    use crate::rng;

    fn cfg_from(ell: usize, empty: &[[i64; 2]]) -> Configuration {
        let geom = bp_box(2, ell);
        let mut cfg = Configuration::full(geom.clone());
        for c in empty {
            let abs = [c[0] + ell as i64, c[1] + ell as i64];
            cfg.set(geom.index(&abs).unwrap(), false);
        }
        cfg
    }

    /// Brute-force closure: iterate the synchronous step to a fixed point.
    fn closure_oracle(cfg: &Configuration, k: u32) -> Configuration {
        let mut cur = cfg.clone();
        loop {
            let next = bp_step(&cur, k);
            if next == cur {
                return cur;
            }
            cur = next;
        }
    }

    #[test]
    fn fixed_points() {
        let geom = bp_box(2, 3);
        let empty = Configuration::empty(geom.clone());
        let full = Configuration::full(geom);
        assert_eq!(bp_step(&empty, 2), empty);
        assert_eq!(bp_step(&full, 2), full);
        assert_eq!(bp_closure(&empty, 2), empty);
        assert_eq!(bp_closure(&full, 2), full);
    }

    #[test]
    fn square_two_by_two_is_stable() {
        let cfg = cfg_from(4, &[[0, 0], [0, 1], [1, 0], [1, 1]]);
        assert_eq!(bp_step(&cfg, 2), cfg);
        assert_eq!(bp_closure(&cfg, 2), cfg);
    }

    #[test]
    fn square_plus_vacancy_fills_rectangle() {
        // 2x2 empty square + vacancy at (2,0) closes to the rectangle [0,2]x[0,1]
        let cfg = cfg_from(4, &[[0, 0], [0, 1], [1, 0], [1, 1], [2, 0]]);
        let closure = bp_closure(&cfg, 2);
        assert_eq!(closure, closure_oracle(&cfg, 2));
        let geom = cfg.geometry();
        let mut got: Vec<Coords> = (0..geom.n_sites())
            .filter(|&i| !closure.occupied(i))
            .map(|i| centered_coords(geom, i))
            .collect();
        let mut expect: Vec<Coords> = Vec::new();
        for x in 0..=2i64 {
            for y in 0..=1i64 {
                expect.push(vec![x, y]);
            }
        }
        got.sort();
        expect.sort();
        assert_eq!(got, expect);
    }

    #[test]
    fn closure_matches_oracle_on_random_input() {
        let geom = bp_box(2, 6);
        let mut rng = rng::root(31);
        for _ in 0..100 {
            let cfg = Configuration::sample(geom.clone(), 0.2, &mut rng).unwrap();
            assert_eq!(bp_closure(&cfg, 2), closure_oracle(&cfg, 2));
        }
    }

    #[test]
    fn closure_idempotent_and_monotone() {
        let geom = bp_box(2, 5);
        let mut rng = rng::root(77);
        for _ in 0..100 {
            let cfg = Configuration::sample(geom.clone(), 0.15, &mut rng).unwrap();
            let cl = bp_closure(&cfg, 2);
            assert_eq!(bp_step(&cl, 2), cl);
            assert_eq!(bp_closure(&cl, 2), cl);
            // adding a vacancy only grows the emptied set
            let first_particle = cfg.particles().next();
            if let Some(site) = first_particle {
                let mut bigger = cfg.clone();
                bigger.set(site, false);
                let cl2 = bp_closure(&bigger, 2);
                for i in 0..geom.n_sites() {
                    if !cl.occupied(i) {
                        assert!(!cl2.occupied(i), "monotonicity violated at {i}");
                    }
                }
            }
        }
    }

    #[test]
    fn cluster_examples() {
        // chain next to the origin, origin occupied: cluster = {(1,0),(2,0)}
        let cfg = cfg_from(4, &[[1, 0], [2, 0]]);
        let cl = origin_cluster(&cfg, 2);
        let geom = cfg.geometry();
        let mut got: Vec<Coords> = cl.iter().map(|&i| centered_coords(geom, i)).collect();
        got.sort();
        assert_eq!(got, vec![vec![1, 0], vec![2, 0]]);
        assert_eq!(test_function_f(&cfg, 2), 2);

        // no empty neighbour of the origin: empty cluster, f = 0
        let blocked = cfg_from(4, &[[3, 3]]);
        assert!(origin_cluster(&blocked, 2).is_empty());
        assert_eq!(test_function_f(&blocked, 2), 0);

        // single vacancy at (-1,0): f = -1
        let left = cfg_from(4, &[[-1, 0]]);
        assert_eq!(test_function_f(&left, 2), -1);

        // fully empty box: the whole box is the cluster
        let geom = bp_box(2, 3);
        let empty = Configuration::empty(geom.clone());
        assert_eq!(origin_cluster(&empty, 2).len(), geom.n_sites());
    }

    #[test]
    fn event_b_examples() {
        let geom = bp_box(2, 3);
        assert!(!event_b(&Configuration::full(geom.clone()), 2));
        assert!(event_b(&Configuration::empty(geom), 2));
        // the [0,2]x[0,1] closure in an ell=3 box: max ∞-norm of the cluster
        // is 2 >= ell-1 = 2, so B occurs (boundary case pins the >=)
        let cfg = cfg_from(3, &[[0, 0], [0, 1], [1, 0], [1, 1], [2, 0]]);
        assert!(event_b(&cfg, 2));
    }

    #[test]
    fn bp_invariance_under_interior_legal_swaps() {
        // Observation: a legal KA swap with both endpoints in the interior
        // leaves BP^∞ unchanged.
        let ell = 6usize;
        let geom = bp_box(2, ell);
        let table = NeighborTable::build(&geom);
        let mut rng = rng::root(5);
        let mut checked = 0;
        while checked < 300 {
            let cfg = Configuration::sample(geom.clone(), 0.25, &mut rng).unwrap();
            for a in 0..geom.n_sites() {
                let ca = centered_coords(&geom, a);
                if ca.iter().map(|c| c.abs()).max().unwrap() >= ell as i64 - 1 {
                    continue;
                }
                for nb in geom.neighbor_indices(a).into_iter().flatten() {
                    let cb = centered_coords(&geom, nb);
                    if cb.iter().map(|c| c.abs()).max().unwrap() >= ell as i64 - 1 {
                        continue;
                    }
                    let e = Edge::new(a, nb);
                    if cfg.occupied(a) != cfg.occupied(nb) && cfg.constraint(&table, 2, e) {
                        assert_eq!(bp_closure(&cfg, 2), bp_closure(&cfg.swap(e), 2));
                        checked += 1;
                    }
                }
            }
        }
    }

    #[test]
    fn closure_terminates_within_site_count() {
        // emptied set strictly grows until fixed: at most |box| synchronous steps
        let geom = bp_box(2, 4);
        let mut rng = rng::root(13);
        for _ in 0..50 {
            let cfg = Configuration::sample(geom.clone(), 0.3, &mut rng).unwrap();
            let mut cur = cfg.clone();
            let mut steps = 0;
            loop {
                let next = bp_step(&cur, 2);
                if next == cur {
                    break;
                }
                cur = next;
                steps += 1;
                assert!(steps <= geom.n_sites());
            }
            assert_eq!(cur, bp_closure(&cfg, 2));
        }
    }

    #[test]
    fn window_extraction_centred() {
        let big = LatticeGeometry::new(&[7, 7], Boundary::OccupiedExterior).unwrap();
        let mut cfg = Configuration::full(big.clone());
        cfg.set(big.index(&[3, 3]).unwrap(), false); // centre vacancy
        cfg.set(big.index(&[4, 3]).unwrap(), false);
        let w = bp_window(&cfg, 2, &[0, 0]);
        assert_eq!(w.geometry().extents(), &[5, 5]);
        assert!(!w.occupied_at(&[2, 2]));
        assert!(!w.occupied_at(&[3, 2]));
        // shifted window re-centres at (1,0): the vacancy pair moves left
        let ws = bp_window(&cfg, 2, &[1, 0]);
        assert!(!ws.occupied_at(&[1, 2]));
        assert!(!ws.occupied_at(&[2, 2]));
    }

    #[test]
    fn mu_b_extremes() {
        // q -> 1: box almost surely all empty, B certain
        let hi = estimate_mu_b(0.9999, 2, 2, 3, 200, 1);
        assert!(hi.estimate > 0.99);
        // q -> 0: no vacancies at all w.h.p.
        let lo = estimate_mu_b(1e-6, 2, 2, 8, 1000, 2);
        assert!(lo.estimate < 0.01);
        // determinism
        let a = estimate_mu_b(0.1, 2, 2, 4, 500, 3);
        let b = estimate_mu_b(0.1, 2, 2, 4, 500, 3);
        assert_eq!(a.hits, b.hits);
    }
}
