use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use cycleguess::colour::{ColourSpace, Colouring, Cycle};
use cycleguess::entropy::EmpiricalDistribution;
use cycleguess::indexcode::{decode, encode, message_space_size, Broadcast};
use cycleguess::{build_fcp, enumerate_fixed_set, restrict, Protocol};

fn odd_n() -> impl Strategy<Value = usize> {
    (1usize..=8).prop_map(|k| 2 * k + 1)
}

fn colouring(n: usize, s: u32) -> impl Strategy<Value = Vec<u32>> {
    proptest::collection::vec(0..s, n)
}

proptest! {
    #[test]
    fn bijection_roundtrip(s in 2u32..400, z in 0u32..400) {
        let space = ColourSpace::new(s).unwrap();
        let z = z % s;
        let (x, y) = (space.phi(z).unwrap(), space.psi(z).unwrap());
        prop_assert!(x < space.a() && y < space.b());
        prop_assert_eq!(space.pi(x, y).unwrap(), z);
        prop_assert_eq!(space.a() * space.b(), s);
        prop_assert!(space.a() as u64 * space.a() as u64 <= s as u64);
    }

    #[test]
    fn index_code_roundtrip((n, s, c) in (odd_n(), 2u32..=24).prop_flat_map(|(n, s)| (Just(n), Just(s), colouring(n, s)))) {
        let space = ColourSpace::new(s).unwrap();
        let c = Colouring(c);
        let msg = encode(&c, &space, n).unwrap();
        let packed = msg.pack(&space);
        prop_assert!(packed < message_space_size(n, &space).unwrap());
        prop_assert_eq!(&Broadcast::unpack(packed, n, &space).unwrap(), &msg);
        prop_assert_eq!(&msg.to_string().parse::<Broadcast>().unwrap(), &msg);
        for i in 1..=n {
            let left = c.0[(i + n - 2) % n];
            let right = c.0[i % n];
            prop_assert_eq!(decode(i, left, right, &msg, &space, n).unwrap(), c.0[i - 1]);
        }
    }

    #[test]
    fn fixed_set_is_exactly_the_invariant_colourings(seed in any::<u64>(), n in 3usize..=6, s in 2u32..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = Protocol::random(ColourSpace::new(s).unwrap(), Cycle::new(n).unwrap(), &mut rng);
        let fixed = enumerate_fixed_set(&p, 1 << 20).unwrap();
        let total = (s as u64).pow(n as u32);
        let mut members = 0;
        for code in 0..total {
            let mut c = vec![0u32; n];
            let mut rest = code;
            for slot in c.iter_mut().rev() {
                *slot = (rest % s as u64) as u32;
                rest /= s as u64;
            }
            let invariant = p.evaluate(&Colouring(c.clone())).unwrap().0 == c;
            prop_assert_eq!(invariant, fixed.contains(&c));
            members += invariant as usize;
        }
        prop_assert_eq!(members, fixed.count());
    }

    #[test]
    fn entropy_is_subadditive_and_bounded(seed in any::<u64>(), n in 3usize..=6, s in 2u32..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = Protocol::random(ColourSpace::new(s).unwrap(), Cycle::new(n).unwrap(), &mut rng);
        let fixed = enumerate_fixed_set(&p, 1 << 20).unwrap();
        prop_assume!(fixed.count() > 0);
        let d = EmpiricalDistribution::new(&fixed).unwrap();
        let total = d.total_entropy();
        prop_assert!((total - (fixed.count() as f64).ln() / (s as f64).ln()).abs() < 1e-9);
        for i in 1..=n {
            let h = d.joint_entropy(&[i]).unwrap();
            prop_assert!((-1e-12..=1.0 + 1e-9).contains(&h));
            for j in 1..=n {
                let hij = d.joint_entropy(&[i, j]).unwrap();
                prop_assert!(hij <= h + d.joint_entropy(&[j]).unwrap() + 1e-9);
                prop_assert!(hij + 1e-9 >= h);
                prop_assert!(hij <= total + 1e-9);
            }
        }
    }

    #[test]
    fn restriction_keeps_surviving_members(n in odd_n().prop_filter("small", |&n| n <= 7), s in 3u32..=5, drop in 1u32..=2) {
        let s_prime = s - drop.min(s - 2);
        let p = build_fcp(n, s).unwrap();
        let q = restrict(&p, s_prime).unwrap();
        let full = enumerate_fixed_set(&p, 1 << 24).unwrap();
        let cut = enumerate_fixed_set(&q, 1 << 24).unwrap();
        for c in full.members() {
            if c.iter().all(|&z| z < s_prime) {
                prop_assert!(cut.contains(c));
            }
        }
    }
}
