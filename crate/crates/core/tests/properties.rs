use permspread::exactmath::{ak_size_exact, ExactRatio, Natural};
use permspread::families::{agreement, build_ak, Family, FamilySpec, FullPermutation, Kind, PartialPermutation};
use permspread::montecarlo::containment_mc;
use permspread::oracle::max_t_intersecting;
use permspread::peeling::{maximalize, peel};
use permspread::spread::{spread_approximate, spread_violation};
use permspread::suite::{random_intersecting_full, random_intersecting_partial};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn full_family(n: usize, idx: &[usize]) -> Family {
    let all = FullPermutation::all(n).unwrap();
    Family::from_permutations(n, idx.iter().map(|&i| all[i % all.len()].clone())).unwrap()
}

#[test]
fn action_preserves_agreement_on_s4() {
    let all = FullPermutation::all(4).unwrap();
    let parts: Vec<PartialPermutation> = all.iter().map(FullPermutation::to_partial).collect();
    for s in &all {
        for u in &all {
            let moved: Vec<PartialPermutation> = parts.iter().map(|p| p.act(s, u)).collect();
            for i in 0..parts.len() {
                for j in 0..parts.len() {
                    assert_eq!(agreement(&moved[i], &moved[j]).unwrap(), agreement(&parts[i], &parts[j]).unwrap());
                }
            }
        }
    }
}

#[test]
fn oracle_maximum_dominates_every_ak() {
    for n in 2..=5usize {
        for t in 1..=n {
            let r = max_t_intersecting(n, t, 10_000_000).unwrap();
            assert!(!r.budget_exhausted);
            for k in 0..=(n - t) / 2 {
                assert!(Natural::from(r.max_size) >= ak_size_exact(n as u64, t as u64, k as u64).unwrap());
            }
        }
    }
}

#[test]
fn containment_estimate_respects_bound() {
    // stars of disjoint singletons on growing grounds: the only non-vacuous shapes at this size
    let half = ExactRatio::new(1, 2).unwrap();
    for side in [12usize, 15] {
        let members = (1..=side)
            .flat_map(|i| (1..=side).map(move |j| (i, j)))
            .map(|p| PartialPermutation::new(side, [p]).unwrap());
        let f = Family::new(side, Kind::Partial, members).unwrap();
        let est = containment_mc(&f, &ExactRatio::one(), &half, 10_000, 9, 2).unwrap();
        let bound = est.bound.expect("non-vacuous");
        assert!(est.estimate_f64 >= bound - 3.0 * est.sigma);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn restrict_and_select_agree_in_size(idx in proptest::collection::vec(0usize..120, 1..30), x in 0usize..120, size in 0usize..4) {
        let f = full_family(5, &idx);
        let all = FullPermutation::all(5).unwrap();
        let x = all[x].to_partial().subsets(size).next().unwrap();
        prop_assert_eq!(f.restrict(&x).len(), f.select(&x).len());
    }

    #[test]
    fn nested_restriction(idx in proptest::collection::vec(0usize..120, 1..30), p in 0usize..120, a in 0usize..3, b in 0usize..3) {
        let f = full_family(5, &idx);
        let base = FullPermutation::all(5).unwrap()[p].to_partial();
        let pairs = base.pairs().to_vec();
        let x = PartialPermutation::new(5, pairs[..a].iter().map(|&(i, j)| (i as usize, j as usize))).unwrap();
        let y = PartialPermutation::new(5, pairs[a..a + b].iter().map(|&(i, j)| (i as usize, j as usize))).unwrap();
        let xy = x.union(&y).unwrap();
        prop_assert_eq!(f.restrict(&x).restrict(&y), f.restrict(&xy));
    }

    #[test]
    fn select_union_is_a_subfamily(idx in proptest::collection::vec(0usize..120, 1..30), c in proptest::collection::vec((0usize..120, 1usize..3), 1..4)) {
        let f = full_family(5, &idx);
        let all = FullPermutation::all(5).unwrap();
        let cover: Vec<PartialPermutation> = c.iter().map(|&(p, s)| all[p].to_partial().subsets(s).next().unwrap()).collect();
        let once = Family::new(5, Kind::Partial, cover.clone()).unwrap();
        let twice = Family::new(5, Kind::Partial, cover.iter().chain(cover.iter()).cloned()).unwrap();
        let sel = f.select_union(&once).unwrap();
        prop_assert!(sel.is_subfamily_of(&f));
        prop_assert_eq!(sel.len(), f.select_union(&twice).unwrap().len());
    }

    #[test]
    fn conjugation_preserves_intersection(n in 3usize..=5, t in 1usize..3, k in 0usize..2, s in 0usize..120, u in 0usize..120) {
        prop_assume!(t + 2 * k <= n);
        let f = build_ak(&FamilySpec::untwisted(n, t, k).unwrap()).unwrap();
        let all = FullPermutation::all(n).unwrap();
        let g = f.conjugate(&all[s % all.len()], &all[u % all.len()]).unwrap();
        prop_assert_eq!(f.is_t_intersecting(t).holds, g.is_t_intersecting(t).holds);
        prop_assert_eq!(f.len(), g.len());
    }

    #[test]
    fn maximalize_never_shrinks_coverage(seed in any::<u64>(), n in 3usize..=5, t in 1usize..=2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_intersecting_partial(&mut rng, n, t, n.min(4)).unwrap();
        let out = maximalize(&s, t).unwrap();
        let sn = Family::symmetric_group(n).unwrap();
        prop_assert!(sn.select_union(&s).unwrap().is_subfamily_of(&sn.select_union(&out).unwrap()));
    }

    #[test]
    fn peel_chain_on_random_traces(seed in any::<u64>(), n in 3usize..=5, t in 1usize..=2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_intersecting_partial(&mut rng, n, t, n.min(4)).unwrap();
        let q = s.max_member_size();
        let trace = peel(&s, t, q, 0).unwrap();
        let sn = Family::symmetric_group(n).unwrap();
        for layer in &trace.layers {
            prop_assert!(layer.family.iter().all(|m| m.len() <= t + layer.k));
        }
        for pair in trace.layers.windows(2) {
            let upper = sn.select_union(&pair[0].family).unwrap();
            let lower = sn.select_union(&pair[1].family).unwrap().union(&sn.select_union(&pair[0].top).unwrap()).unwrap();
            prop_assert!(upper.is_subfamily_of(&lower));
        }
    }

    #[test]
    fn approximation_replays(seed in any::<u64>(), t in 1usize..=2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_intersecting_full(&mut rng, 5, t).unwrap();
        let r = ExactRatio::new(3, 2).unwrap();
        let res = spread_approximate(&f, t, &ExactRatio::new(1, 2).unwrap(), &r).unwrap();
        prop_assert!(res.coverage_holds(&f));
        for core in &res.cores {
            let traces = core.family.restrict(&core.set);
            prop_assert!(spread_violation(&traces, &r, traces.max_member_size()).unwrap().certifies(&traces));
        }
    }
}
