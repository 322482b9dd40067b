use std::collections::{HashMap, VecDeque};

use partlat::partition::enumerate_r_block_partitions;
use partlat::{LatticeShape, Partition, PartitionTuple};
use proptest::prelude::*;

fn partition(n: usize) -> impl Strategy<Value = Partition> {
    proptest::collection::vec(0..n, n).prop_map(|labels| Partition::from_labels(&labels))
}

fn triple() -> impl Strategy<Value = (Partition, Partition, Partition)> {
    (1usize..=9).prop_flat_map(|n| (partition(n), partition(n), partition(n)))
}

fn tuple(n: usize, t: usize) -> impl Strategy<Value = PartitionTuple> {
    proptest::collection::vec(partition(n), t).prop_map(|c| PartitionTuple::new(c).unwrap())
}

fn tuple_triple() -> impl Strategy<Value = (PartitionTuple, PartitionTuple, PartitionTuple)> {
    (2usize..=6, 1usize..=3).prop_flat_map(|(n, t)| (tuple(n, t), tuple(n, t), tuple(n, t)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn lattice_axioms((a, b, c) in triple()) {
        let m = |x: &Partition, y: &Partition| x.meet(y).unwrap();
        let j = |x: &Partition, y: &Partition| x.join(y).unwrap();
        prop_assert_eq!(m(&a, &b), m(&b, &a));
        prop_assert_eq!(j(&a, &b), j(&b, &a));
        prop_assert_eq!(m(&m(&a, &b), &c), m(&a, &m(&b, &c)));
        prop_assert_eq!(j(&j(&a, &b), &c), j(&a, &j(&b, &c)));
        prop_assert_eq!(m(&a, &j(&a, &b)), a.clone());
        prop_assert_eq!(j(&a, &m(&a, &b)), a.clone());
        prop_assert_eq!(m(&a, &a), a.clone());
        prop_assert_eq!(j(&a, &a), a.clone());
        let leq = a.leq(&b).unwrap();
        prop_assert_eq!(leq, m(&a, &b) == a);
        prop_assert_eq!(leq, j(&a, &b) == b);
        let n = a.n();
        prop_assert!(Partition::bottom(n).unwrap().leq(&a).unwrap());
        prop_assert!(a.leq(&Partition::top(n).unwrap()).unwrap());
        // Only the modular inequality holds in general.
        prop_assert!(j(&a, &m(&b, &c)).leq(&m(&j(&a, &b), &j(&a, &c))).unwrap());
    }

    #[test]
    fn distance_is_a_metric((a, b, c) in triple()) {
        let d = |x: &Partition, y: &Partition| x.distance(y).unwrap();
        prop_assert_eq!(d(&a, &b), d(&b, &a));
        prop_assert_eq!(d(&a, &b) == 0, a == b);
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c));
    }

    #[test]
    fn tuples_act_coordinatewise((a, b, c) in tuple_triple()) {
        let m = a.meet(&b).unwrap();
        let j = a.join(&b).unwrap();
        for i in 0..a.coords().len() {
            prop_assert_eq!(&m.coords()[i], &a.coords()[i].meet(&b.coords()[i]).unwrap());
            prop_assert_eq!(&j.coords()[i], &a.coords()[i].join(&b.coords()[i]).unwrap());
        }
        prop_assert_eq!(a.meet(&j).unwrap(), a.clone());
        let total: usize = a.coords().iter().zip(c.coords()).map(|(x, y)| x.distance(y).unwrap()).sum();
        prop_assert_eq!(a.distance(&c).unwrap(), total);
    }

    #[test]
    fn text_round_trip(a in (1usize..=12).prop_flat_map(partition)) {
        let back: Partition = a.to_string().parse().unwrap();
        prop_assert_eq!(back, a);
    }
}

fn all_partitions(n: usize) -> Vec<Partition> {
    (1..=n).flat_map(|r| enumerate_r_block_partitions(n, r).unwrap()).collect()
}

/// All-pairs shortest paths in the undirected covering graph.
fn hasse_distances(elems: &[Partition]) -> Vec<Vec<usize>> {
    let len = elems.len();
    let mut adj = vec![Vec::new(); len];
    for i in 0..len {
        for j in 0..len {
            if i != j && elems[i].leq(&elems[j]).unwrap() && elems[i].block_count() == elems[j].block_count() + 1 {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    (0..len)
        .map(|src| {
            let mut dist = vec![usize::MAX; len];
            dist[src] = 0;
            let mut queue = VecDeque::from([src]);
            while let Some(x) = queue.pop_front() {
                for &y in &adj[x] {
                    if dist[y] == usize::MAX {
                        dist[y] = dist[x] + 1;
                        queue.push_back(y);
                    }
                }
            }
            dist
        })
        .collect()
}

#[test]
fn distance_matches_covering_graph() {
    for (n, bell) in [(3, 5), (4, 15), (5, 52)] {
        let elems = all_partitions(n);
        assert_eq!(elems.len(), bell);
        let bfs = hasse_distances(&elems);
        for i in 0..elems.len() {
            for j in 0..elems.len() {
                assert_eq!(elems[i].distance(&elems[j]).unwrap(), bfs[i][j], "{} {}", elems[i], elems[j]);
            }
        }
    }
}

#[test]
fn enumeration_is_lexicographic_and_complete() {
    let elems = all_partitions(6);
    assert_eq!(elems.len(), 203);
    let mut by_blocks: HashMap<usize, usize> = HashMap::new();
    for p in &elems {
        *by_blocks.entry(p.block_count()).or_default() += 1;
    }
    assert_eq!(by_blocks[&3], 90);
    let three = enumerate_r_block_partitions(6, 3).unwrap();
    assert!(three.windows(2).all(|w| w[0].block_ids() < w[1].block_ids()));
}

#[test]
fn shapes_and_tuples_parse() {
    let shape: LatticeShape = "P12^8".parse().unwrap();
    assert_eq!((shape.n, shape.t), (12, 8));
    for bad in ["P12", "12^8", "P0^1", "P5^0", "Px^2"] {
        assert!(bad.parse::<LatticeShape>().is_err(), "{bad}");
    }
    let t: PartitionTuple = "1,2|3;1|2|3".parse().unwrap();
    assert_eq!(t.shape(), LatticeShape::new(3, 2).unwrap());
    assert!("1,2|3;1|2".parse::<PartitionTuple>().is_err());
    assert!(PartitionTuple::parse_with_shape("1,2|3", shape).is_err());
}
