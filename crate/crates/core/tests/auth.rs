use std::collections::HashSet;

use partlat::auth::{
    commit, derive_vernam_key, make_challenge, make_secret, mutate_response, quality_check, respond, run_local,
    verify_commit, verify_response, xor_apply, Commitment, Message, ProverSession, Response, Secret, SecretMode,
    SessionConfig, SessionStatus, VerifierSession,
};
use partlat::genset::is_generating;
use partlat::partition::PartitionSampler;
use partlat::power::build_four_generators;
use partlat::{LatticeShape, Partition, PartitionTuple, ShiftRng, Term};

fn shape(s: &str) -> LatticeShape {
    s.parse().unwrap()
}

fn mode_for(shape: LatticeShape) -> SecretMode {
    if shape.t == 1 {
        SecretMode::PermuteZadori
    } else {
        SecretMode::PermutePower
    }
}

#[test]
fn zadori_secrets_generate() {
    for seed in 0..20 {
        let s = make_secret(shape("P5^1"), 8, seed, SecretMode::PermuteZadori).unwrap();
        assert!(is_generating(&s.entries()[..4]).unwrap());
        assert!(is_generating(s.entries()).unwrap());
    }
}

#[test]
fn relabeled_power_generators_certify() {
    for seed in 0..5 {
        let s = make_secret(shape("P7^3"), 8, seed, SecretMode::PermutePower).unwrap();
        assert_eq!(s.p(), 8);
        // Closure is out of reach at this size; the certificate ran inside make_secret.
        let plain = build_four_generators(7, Some(3)).unwrap().quadruple();
        assert_ne!(&s.entries()[..4], &plain[..]);
    }
}

#[test]
fn completeness() {
    for sh in ["P5^1", "P7^3", "P12^8"] {
        let sh = shape(sh);
        for seed in 0..5 {
            let s = make_secret(sh, 8, seed, mode_for(sh)).unwrap();
            let w = make_challenge(8, 8, 1000, seed ^ 0xabc).unwrap();
            let r = respond(&s, &w).unwrap();
            assert!(verify_response(&s, &w, &r).unwrap());
        }
    }
}

#[test]
fn variables_return_the_secret() {
    let s = make_secret(shape("P7^3"), 6, 4, SecretMode::PermutePower).unwrap();
    let w = partlat::auth::Challenge {
        id: 1,
        terms: (1..=6).map(|i| Term::variable(i, 6).unwrap()).collect(),
        steps: 0,
        seed: None,
    };
    assert_eq!(respond(&s, &w).unwrap().values, s.entries());
}

#[test]
fn single_coordinate_tampering_is_caught() {
    let s = make_secret(shape("P5^1"), 8, 1, SecretMode::PermuteZadori).unwrap();
    let w = make_challenge(8, 2, 100, 2).unwrap();
    let honest = respond(&s, &w).unwrap();
    let mut rng = ShiftRng::new(3);
    let mut accepted = 0;
    for trial in 0..10_000 {
        let Message::Response { id, tuples } = mutate_response(honest.to_message(), trial % 2, 0, &mut rng) else {
            unreachable!()
        };
        accepted += usize::from(verify_response(&s, &w, &Response { id, values: tuples }).unwrap());
    }
    assert_eq!(accepted, 0);
    let short = Response {
        id: honest.id,
        values: honest.values[..1].to_vec(),
    };
    assert!(!verify_response(&s, &w, &short).unwrap());
}

#[test]
fn keys_differ_across_challenges() {
    let s = make_secret(shape("P12^61"), 8, 7, SecretMode::PermutePower).unwrap();
    let mut keys = HashSet::new();
    for seed in 0..1000u64 {
        let w = make_challenge(8, 8, 100, seed).unwrap();
        keys.insert(derive_vernam_key(&respond(&s, &w).unwrap()));
    }
    assert_eq!(keys.len(), 1000);
    let key = keys.iter().next().unwrap();
    let msg = b"transfer 100 to account 42";
    let ct = xor_apply(key, msg).unwrap();
    assert_ne!(&ct[..], msg);
    assert_eq!(xor_apply(key, &ct).unwrap(), msg);
}

/// Searches random secrets for a second opening of a commitment. Candidates
/// are screened on one coordinate of one response that is far from both
/// bounds; only survivors get the full comparison.
#[test]
fn no_second_opening_found() {
    let sh = shape("P12^8");
    let s = make_secret(sh, 8, 11, SecretMode::PermutePower).unwrap();
    let w = make_challenge(8, 8, 1000, 12).unwrap();
    let record = commit(&s, &w.terms).unwrap();
    assert!(verify_commit(&record, &s).unwrap());
    let spread = |x: &Partition| (x.n() - x.block_count()).min(x.block_count() - 1);
    let (probe, coord) = (0..record.values.len())
        .flat_map(|i| (0..sh.t).map(move |j| (i, j)))
        .max_by_key(|&(i, j)| spread(&record.values[i].coords()[j]))
        .unwrap();
    let target = &record.values[probe].coords()[coord];
    assert!(spread(target) >= 2, "{target}");
    let sampler = PartitionSampler::new(12).unwrap();
    let mut rng = ShiftRng::new(13);
    let (mut screened, mut hits) = (0, 0);
    for _ in 0..100_000 {
        let column: Vec<Partition> = (0..8).map(|_| sampler.sample(&mut rng)).collect();
        if record.terms[probe].eval_partitions(&column).unwrap() != *target {
            continue;
        }
        screened += 1;
        // The rest of the candidate is drawn only for survivors.
        let entries: Vec<PartitionTuple> = column
            .into_iter()
            .map(|x| {
                let mut coords: Vec<Partition> = (0..sh.t).map(|_| sampler.sample(&mut rng)).collect();
                coords[coord] = x;
                PartitionTuple::new(coords).unwrap()
            })
            .collect();
        hits += usize::from(verify_commit(&record, &Secret::new(sh, entries).unwrap()).unwrap());
    }
    println!("second-opening search: {screened} survived screening, {hits} full matches");
    assert_eq!(hits, 0);
}

#[test]
fn tampered_record_fails() {
    let s = make_secret(shape("P7^1"), 8, 1, SecretMode::PermuteZadori).unwrap();
    let w = make_challenge(8, 3, 200, 5).unwrap();
    let record = commit(&s, &w.terms).unwrap();
    let text = record.to_string();
    let mut rng = ShiftRng::new(1);
    let Message::Response { tuples, .. } = mutate_response(
        Message::Response {
            id: 0,
            tuples: record.values.clone(),
        },
        1,
        0,
        &mut rng,
    ) else {
        unreachable!()
    };
    let tampered = Commitment {
        values: tuples,
        ..text.parse().unwrap()
    };
    assert!(!verify_commit(&tampered, &s).unwrap());
}

/// Long random terms mostly collapse to a bound, so almost no challenge of
/// eight of them passes the prover's quality check. Frozen from the
/// calibration run over seeds 0..100.
const CALIBRATED_PASSES_D3: usize = 0;
const CALIBRATED_CONSTANT_RESPONSES: usize = 472;

#[test]
fn quality_calibration() {
    let sh = shape("P12^8");
    let mut passes = 0;
    let mut constant = 0;
    for seed in 0..100u64 {
        let s = make_secret(sh, 8, seed, SecretMode::PermutePower).unwrap();
        let w = make_challenge(8, 8, 1000, seed + 1000).unwrap();
        let report = quality_check(&s, &w, 3).unwrap();
        passes += usize::from(report.passed());
        constant += respond(&s, &w)
            .unwrap()
            .values
            .iter()
            .filter(|r| r.is_bottom() || r.is_top())
            .count();
    }
    println!("quality pass rate at D=3: {passes}/100, constant responses {constant}/800");
    assert_eq!(passes, CALIBRATED_PASSES_D3);
    assert_eq!(constant, CALIBRATED_CONSTANT_RESPONSES);
}

#[test]
fn degenerate_threshold_only_rejects_constants() {
    let s = make_secret(shape("P7^1"), 8, 2, SecretMode::PermuteZadori).unwrap();
    for seed in 0..50 {
        let w = make_challenge(8, 4, 30, seed).unwrap();
        let r = respond(&s, &w).unwrap();
        let constant = r.values.iter().any(|x| x.is_bottom() || x.is_top());
        assert_eq!(quality_check(&s, &w, 0).unwrap().passed(), !constant);
    }
}

fn session(sh: LatticeShape, seed: u64, tamper: bool) -> partlat::auth::Transcript {
    let s = make_secret(sh, 8, seed, mode_for(sh)).unwrap();
    let cfg = SessionConfig::default();
    let mut v = VerifierSession::new(s.clone(), cfg, seed);
    let mut p = ProverSession::new(s, cfg);
    let mut rng = ShiftRng::new(seed);
    run_local(&mut v, &mut p, |m| if tamper { mutate_response(m, 0, 0, &mut rng) } else { m }).unwrap()
}

#[test]
fn sessions_are_reproducible() {
    for sh in ["P5^1", "P7^3"] {
        for seed in 0..5 {
            let a = session(shape(sh), seed, false);
            let b = session(shape(sh), seed, false);
            assert_eq!(a.text(), b.text());
            assert_eq!(a.verifier, SessionStatus::Accepted);
            assert_eq!(a.prover, SessionStatus::Accepted);
            let bad = session(shape(sh), seed, true);
            assert_eq!(bad.verifier, SessionStatus::Rejected);
        }
    }
}

#[test]
fn quality_gated_sessions_retry_then_finish() {
    let s = make_secret(shape("P7^1"), 8, 3, SecretMode::PermuteZadori).unwrap();
    let cfg = SessionConfig {
        q: 2,
        steps: 10,
        threshold: Some(0),
        max_retries: 50,
    };
    let mut v = VerifierSession::new(s.clone(), cfg, 3);
    let mut p = ProverSession::new(s, cfg);
    let t = run_local(&mut v, &mut p, |m| m).unwrap();
    assert_eq!(t.verifier, SessionStatus::Accepted);
    assert_eq!(v.retries(), p.retries());
    assert!(p.last_quality().unwrap().passed());
}

#[test]
fn verifier_enforces_its_own_bound() {
    let s = make_secret(shape("P5^1"), 4, 1, SecretMode::PermuteZadori).unwrap();
    let cfg = SessionConfig {
        max_retries: 2,
        ..SessionConfig::default()
    };
    let mut v = VerifierSession::new(s.clone(), cfg, 1);
    let hello = ProverSession::new(s, cfg).hello();
    let Some(Message::Challenge { mut id, .. }) = v.handle(&hello).unwrap() else { panic!() };
    for _ in 0..2 {
        let Some(Message::Challenge { id: next, .. }) = v.handle(&Message::Retry { id }).unwrap() else { panic!() };
        id = next;
    }
    assert_eq!(v.handle(&Message::Retry { id }).unwrap(), Some(Message::Result { id, ok: false }));
    assert_eq!(v.status(), SessionStatus::Aborted);
    assert!(v.handle(&Message::Retry { id }).is_err());
}

#[test]
fn mismatched_hello_is_refused() {
    let s = make_secret(shape("P5^1"), 8, 1, SecretMode::PermuteZadori).unwrap();
    let mut v = VerifierSession::new(s, SessionConfig::default(), 1);
    let hello = Message::Hello {
        version: 1,
        shape: shape("P6^1"),
        p: 8,
        q: 8,
    };
    assert!(v.handle(&hello).is_err());
}
