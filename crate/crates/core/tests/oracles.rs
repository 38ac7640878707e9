//! Cross-checks against deliberately naive reimplementations.

use std::collections::{BTreeSet, HashSet};

use mutacyc_core::canonical::{are_isomorphic, canonical_form};
use mutacyc_core::rank3::{classify_rank3_cycle, cycle_triple, Rank3Triple, Verdict};
use mutacyc_core::search::explore_class;
use mutacyc_core::{seeds, ExchangeMatrix, SearchLimits};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_quiver(rng: &mut impl Rng, n: usize, w: i64) -> ExchangeMatrix {
    let upper: Vec<i64> = (0..n * (n - 1) / 2)
        .map(|_| rng.gen_range(-w..=w))
        .collect();
    ExchangeMatrix::from_upper(n, &upper).unwrap()
}

/// Mutation on an arrow multiset: reverse arrows at k, add a composite
/// arrow for every 2-path through k, then cancel opposite pairs.
fn mutate_by_arrows(q: &ExchangeMatrix, k: usize) -> ExchangeMatrix {
    let n = q.rank();
    let mut count = vec![vec![0i64; n]; n];
    for i in 0..n {
        for j in 0..n {
            if q.get(i, j) > 0 {
                count[i][j] = q.get(i, j);
            }
        }
    }
    let mut next = vec![vec![0i64; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i == k || j == k {
                next[j][i] += count[i][j];
            } else {
                next[i][j] += count[i][j];
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            if i != k && j != k {
                next[i][j] += count[i][k] * count[k][j];
            }
        }
    }
    let mut arrows = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let net = next[i][j] - next[j][i];
            if net > 0 {
                arrows.push((i, j, net));
            } else if net < 0 {
                arrows.push((j, i, -net));
            }
        }
    }
    ExchangeMatrix::from_arrows(n, &arrows).unwrap()
}

fn brute_isomorphic(a: &ExchangeMatrix, b: &ExchangeMatrix) -> bool {
    let n = a.rank();
    let mut perm: Vec<usize> = (0..n).collect();
    fn heap(k: usize, p: &mut Vec<usize>, a: &ExchangeMatrix, b: &ExchangeMatrix) -> bool {
        if k == 1 {
            let n = p.len();
            return (0..n).all(|i| (0..n).all(|j| a.get(p[i], p[j]) == b.get(i, j)));
        }
        for i in 0..k {
            if heap(k - 1, p, a, b) {
                return true;
            }
            if k % 2 == 0 {
                p.swap(i, k - 1);
            } else {
                p.swap(0, k - 1);
            }
        }
        false
    }
    heap(n, &mut perm, a, b)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn mutation_is_an_involution(upper in prop::collection::vec(-5i64..=5, 6), k in 0usize..4) {
        let q = ExchangeMatrix::from_upper(4, &upper).unwrap();
        let once = q.mutate(k).unwrap();
        prop_assert_eq!(once.mutate(k).unwrap(), q);
        for i in 0..4 {
            for j in 0..4 {
                prop_assert_eq!(once.get(i, j), -once.get(j, i));
            }
        }
    }
}

#[test]
fn matrix_rule_matches_arrow_rule() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..2000 {
        let n = rng.gen_range(2..=6);
        let q = random_quiver(&mut rng, n, 4);
        let k = rng.gen_range(0..n);
        assert_eq!(
            q.mutate(k).unwrap(),
            mutate_by_arrows(&q, k),
            "{q:?} at {k}"
        );
    }
}

#[test]
fn canonical_form_matches_brute_force_isomorphism() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut agree_iso = 0;
    for t in 0..1000 {
        let a = random_quiver(&mut rng, 4, 1);
        // Half the pairs are relabelings, half are independent draws.
        let b = if t % 2 == 0 {
            let mut p: Vec<usize> = (0..4).collect();
            for i in (1..4).rev() {
                p.swap(i, rng.gen_range(0..=i));
            }
            a.permuted(&p).unwrap()
        } else {
            random_quiver(&mut rng, 4, 1)
        };
        let fast = are_isomorphic(&a, &b).unwrap();
        assert_eq!(fast, brute_isomorphic(&a, &b), "{a:?} vs {b:?}");
        agree_iso += fast as usize;
    }
    assert!(agree_iso >= 500);
}

#[test]
fn canonical_form_is_constant_on_orbits() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..200 {
        let q = random_quiver(&mut rng, 4, 3);
        let key = canonical_form(&q).unwrap();
        for p in mutacyc_core::canonical::permutations(4) {
            let perm: Vec<usize> = p.iter().map(|&v| v as usize).collect();
            assert_eq!(canonical_form(&q.permuted(&perm).unwrap()).unwrap(), key);
        }
    }
}

#[test]
fn dreaded_torus_is_fixed_by_every_mutation() {
    let t = seeds::dreaded_torus();
    let key = canonical_form(&t).unwrap();
    for k in 0..4 {
        assert_eq!(canonical_form(&t.mutate(k).unwrap()).unwrap(), key);
    }
}

/// BFS over labeled rank-3 quivers with entries capped at `cap`: MA when
/// an acyclic quiver is reached, NMA when the capped graph is exhausted.
fn brute_rank3(t: &Rank3Triple, depth: usize, cap: i64) -> Verdict {
    let q = ExchangeMatrix::from_arrows(
        3,
        &[(0, 1, t.x as i64), (1, 2, t.y as i64), (2, 0, t.z as i64)],
    )
    .unwrap();
    let mut seen = HashSet::new();
    seen.insert(q.clone());
    let mut level = vec![q];
    for _ in 0..=depth {
        if level.iter().any(|m| m.is_acyclic()) {
            return Verdict::MutationAcyclic;
        }
        let mut next = Vec::new();
        for m in &level {
            for k in 0..3 {
                let r = m.mutate(k).unwrap();
                if r.max_weight() <= cap && seen.insert(r.clone()) {
                    next.push(r);
                }
            }
        }
        level = next;
    }
    Verdict::NonMutationAcyclic
}

#[test]
fn rank3_classifier_matches_brute_force() {
    for x in 0..=3u64 {
        for y in 0..=3u64 {
            for z in 0..=3u64 {
                let t = Rank3Triple::new(x, y, z);
                if x == 0 || y == 0 || z == 0 {
                    // Not a cycle; the classifier still answers MA.
                    assert_eq!(classify_rank3_cycle(&t), Verdict::MutationAcyclic);
                    continue;
                }
                assert_eq!(classify_rank3_cycle(&t), brute_rank3(&t, 10, 50), "{t:?}");
            }
        }
    }
}

#[test]
fn cycle_triple_reads_full_subquiver() {
    let q = seeds::nm2();
    let sub = q.full_subquiver(&[0, 1, 2]).unwrap();
    assert_eq!(cycle_triple(&sub, 0, 1, 2), Some(Rank3Triple::new(3, 3, 3)));
}

/// All canonical keys within `depth` mutations, by plain recursion.
fn recursive_classes(q: &ExchangeMatrix, depth: usize, out: &mut BTreeSet<Vec<i64>>) {
    out.insert(canonical_form(q).unwrap().as_flat().to_vec());
    if depth == 0 {
        return;
    }
    for k in 0..q.rank() {
        recursive_classes(&q.mutate(k).unwrap(), depth - 1, out);
    }
}

#[test]
fn markov_exploration_matches_recursion() {
    let markov = ExchangeMatrix::from_arrows(3, &[(0, 1, 2), (1, 2, 2), (2, 0, 2)]).unwrap();
    for (seed, depth) in [(markov, 3), (seeds::nma1(), 3), (seeds::a4_type3(), 4)] {
        let r = explore_class(&seed, depth, true, SearchLimits::default()).unwrap();
        let mut oracle = BTreeSet::new();
        recursive_classes(&seed, depth, &mut oracle);
        let got: BTreeSet<Vec<i64>> = r.visited.iter().map(|k| k.as_flat().to_vec()).collect();
        assert_eq!(got, oracle);
    }
}
