use std::collections::HashSet;

use partlat::genset::{self, closure, closure_elements, ClosureMode, DEFAULT_LIMIT};
use partlat::partition::{enumerate_r_block_partitions, PartitionSampler};
use partlat::zadori::ZadoriConfig;
use partlat::{Partition, PartitionTuple, ShiftRng};
use proptest::prelude::*;

fn part5() -> Vec<PartitionTuple> {
    (1..=5)
        .flat_map(|r| enumerate_r_block_partitions(5, r).unwrap())
        .map(PartitionTuple::from)
        .collect()
}

fn tuple(n: usize, t: usize) -> impl Strategy<Value = PartitionTuple> {
    proptest::collection::vec(proptest::collection::vec(0..n, n), t)
        .prop_map(|c| PartitionTuple::new(c.iter().map(|l| Partition::from_labels(l)).collect()).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn closure_is_closed(gens in (2usize..=4, 1usize..=2).prop_flat_map(|(n, t)| proptest::collection::vec(tuple(n, t), 1..=4))) {
        let elems = closure_elements(&gens, 100_000).unwrap();
        let set: HashSet<&PartitionTuple> = elems.iter().collect();
        for g in &gens {
            prop_assert!(set.contains(g));
        }
        for a in &elems {
            for b in &elems {
                prop_assert!(set.contains(&a.meet(b).unwrap()));
                prop_assert!(set.contains(&a.join(b).unwrap()));
            }
        }
        let full = closure(&gens, 100_000, ClosureMode::Full).unwrap();
        prop_assert_eq!(full.closure_size, Some(elems.len()));
    }
}

#[test]
fn early_exit_agrees_with_full_run() {
    let sampler = PartitionSampler::new(5).unwrap();
    let mut rng = ShiftRng::new(500);
    let mut generating = 0;
    for _ in 0..500 {
        let subset = genset::random_subset(&sampler, 4, &mut rng);
        let early = closure(&subset, DEFAULT_LIMIT, ClosureMode::EarlyExit).unwrap();
        let full = closure(&subset, DEFAULT_LIMIT, ClosureMode::Full).unwrap();
        assert_eq!(early.generating, full.generating);
        assert_eq!(full.generating, Some(full.closure_size == Some(52)));
        generating += usize::from(full.generating == Some(true));
    }
    assert!(generating > 0);
}

#[test]
fn three_elements_never_generate_part5() {
    let all = part5();
    let len = all.len();
    for i in 0..len {
        for j in i + 1..len {
            for k in j + 1..len {
                let gens = [all[i].clone(), all[j].clone(), all[k].clone()];
                let r = closure(&gens, DEFAULT_LIMIT, ClosureMode::EarlyExit).unwrap();
                assert_eq!(r.generating, Some(false), "{:?}", gens);
            }
        }
    }
}

#[test]
fn configuration_quadruples_generate() {
    for n in 5..=7 {
        let quad: Vec<PartitionTuple> = ZadoriConfig::new(n).unwrap().quadruple().into_iter().map(PartitionTuple::from).collect();
        assert!(genset::is_generating(&quad).unwrap());
        assert!(!genset::is_generating(&quad[..3]).unwrap());
    }
}

#[test]
fn power_of_small_lattice() {
    // Two coordinates need at least as many generators as one.
    let quad = ZadoriConfig::new(5).unwrap().quadruple();
    let diag: Vec<PartitionTuple> = quad.iter().map(|x| PartitionTuple::new(vec![x.clone(), x.clone()]).unwrap()).collect();
    let r = closure(&diag, DEFAULT_LIMIT, ClosureMode::Full).unwrap();
    assert_eq!(r.closure_size, Some(52));
    assert_eq!(r.generating, Some(false));
}
