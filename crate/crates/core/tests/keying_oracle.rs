use etc_core::cipher::{self, CipherPlan, CipherSpec, KeyMode, Steps};
use etc_core::keying::{KeyStream, MasterKey, SubkeyId};
use sha2::{Digest, Sha256};

/// Reference SplitMix64 written from the published constants.
struct Oracle(u64);

impl Oracle {
    fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
}

#[test]
fn first_outputs_for_seed_zero() {
    let expected = [
        0xe220_a839_7b1d_cdaf,
        0x6e78_9e6a_a1b9_65f4,
        0x06c4_5d18_8009_454f,
        0xf88b_b8a8_724c_81ec,
    ];
    let mut s = KeyStream::new(SubkeyId::K1, 0);
    let mut o = Oracle(0);
    for e in expected {
        assert_eq!(o.next(), e);
        assert_eq!(s.next_raw(), e);
    }
}

#[test]
fn matches_oracle_on_many_seeds() {
    for seed in [1u64, 42, u64::MAX, 0xdead_beef, 1 << 63] {
        let mut s = KeyStream::new(SubkeyId::K3, seed);
        let mut o = Oracle(seed);
        for _ in 0..1000 {
            assert_eq!(s.next_raw(), o.next());
        }
    }
}

#[test]
fn tape_hash() {
    let mut s = KeyStream::new(SubkeyId::K1, 0x0123_4567_89ab_cdef);
    let mut h = Sha256::new();
    for _ in 0..10_000 {
        h.update(s.next_raw().to_le_bytes());
    }
    let hex: String = h.finalize().iter().map(|b| format!("{b:02x}")).collect();
    assert_eq!(
        hex,
        "09063be9258be6f8ec6db30c5e6b4ae46b2f5a3fedcc180cbf334e0a9fdd98a0"
    );
}

#[test]
fn fisher_yates_seed_zero() {
    let mut s = KeyStream::new(SubkeyId::K1, 0);
    assert_eq!(cipher::scramble_permutation(&mut s, 4), vec![2, 1, 0, 3]);
    assert_eq!(s.draw_count(), 3);
}

#[test]
fn plan_for_golden_key() {
    let key = MasterKey::new([
        0x0123_4567_89ab_cdef,
        0xfedc_ba98_7654_3210,
        0x0f1e_2d3c_4b5a_6978,
        0x8796_a5b4_c3d2_e1f0,
    ]);
    let plan = CipherPlan::derive(&key, &CipherSpec::new(16, KeyMode::PerBlock, Steps::ALL), 4);
    assert_eq!(plan.permutation, vec![3, 0, 2, 1]);
    let got: Vec<(u8, bool, u8)> = plan
        .transforms
        .iter()
        .map(|t| (t.dihedral.state(), t.negate, t.colors.index()))
        .collect();
    assert_eq!(
        got,
        vec![(6, false, 1), (1, true, 0), (3, false, 0), (7, true, 4)]
    );
}

#[test]
fn uniform_below_six_is_flat() {
    let mut s = KeyStream::new(SubkeyId::K4, 2024);
    let n = 1_000_000;
    let mut counts = [0usize; 6];
    for _ in 0..n {
        counts[s.uniform_below(6) as usize] += 1;
    }
    for c in counts {
        let p = c as f64 / n as f64;
        assert!((p - 1.0 / 6.0).abs() < 0.01 / 6.0, "{counts:?}");
    }
    // Rejection consumes extra draws: acceptance rate is 6/8.
    let rate = n as f64 / s.draw_count() as f64;
    assert!((rate - 0.75).abs() < 0.005, "{rate}");
}

#[test]
fn bernoulli_is_balanced() {
    let mut s = KeyStream::new(SubkeyId::K3, 77);
    let n = 1_000_000;
    let ones = (0..n).filter(|_| s.bernoulli_half()).count();
    let p = ones as f64 / n as f64;
    assert!((0.497..=0.503).contains(&p), "{p}");
}

#[test]
fn subkeys_are_independent() {
    let a = MasterKey::new([1, 2, 3, 4]);
    let b = MasterKey::new([1, 2, 99, 4]);
    let spec = CipherSpec::default();
    let pa = CipherPlan::derive(&a, &spec, 64);
    let pb = CipherPlan::derive(&b, &spec, 64);
    assert_eq!(pa.permutation, pb.permutation);
    for (x, y) in pa.transforms.iter().zip(&pb.transforms) {
        assert_eq!(x.dihedral, y.dihedral);
        assert_eq!(x.colors, y.colors);
    }
    assert_ne!(
        pa.transforms.iter().map(|t| t.negate).collect::<Vec<_>>(),
        pb.transforms.iter().map(|t| t.negate).collect::<Vec<_>>()
    );
}

#[test]
fn key_file_round_trip() {
    let key = MasterKey::new([0, u64::MAX, 0xabc, 1 << 40]);
    let text = key.to_key_file();
    assert_eq!(
        text,
        "K1=0000000000000000\nK2=ffffffffffffffff\nK3=0000000000000abc\nK4=0000010000000000\n"
    );
    assert_eq!(MasterKey::parse_key_file(&text).unwrap(), key);
    assert!(MasterKey::parse_key_file("K2=0000000000000000\n").is_err());
}
