use fheaccel_core::modmath::gen_ntt_primes;
use fheaccel_core::rns::{ct_mul_rns, decompose, recombine, RnsBasis, RnsRing, WideCiphertext};
use num_bigint::{BigUint, RandBigInt};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn basis_u64(n: usize, towers: usize) -> Vec<u64> {
    gen_ntt_primes::<u64>(n, 40, towers).unwrap()
}

/// Negacyclic product of wide polynomials modulo `m`, by definition.
fn oracle(a: &[BigUint], b: &[BigUint], m: &BigUint) -> Vec<BigUint> {
    let n = a.len();
    let mut pos = vec![BigUint::default(); n];
    let mut neg = vec![BigUint::default(); n];
    for i in 0..n {
        for j in 0..n {
            let t = &a[i] * &b[j];
            if i + j < n {
                pos[i + j] += t;
            } else {
                neg[i + j - n] += t;
            }
        }
    }
    pos.into_iter()
        .zip(neg)
        .map(|(p, q)| (p + m * (&q / m + 1u32) - q) % m)
        .collect()
}

fn add(a: &[BigUint], b: &[BigUint], m: &BigUint) -> Vec<BigUint> {
    a.iter().zip(b).map(|(x, y)| (x + y) % m).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn roundtrip_and_homomorphism(seed in any::<u64>(), towers in 2usize..=4) {
        let basis = RnsBasis::new(basis_u64(16, towers)).unwrap();
        let m = basis.big_modulus().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = rng.gen_biguint_below(&m);
        let b = rng.gen_biguint_below(&m);
        let da = decompose(&a, &basis).unwrap();
        let db = decompose(&b, &basis).unwrap();
        prop_assert_eq!(recombine(&da, &basis).unwrap(), a.clone());
        let dab = decompose(&((&a * &b) % &m), &basis).unwrap();
        for (i, &q) in basis.moduli().iter().enumerate() {
            prop_assert_eq!(dab[i], ((da[i] as u128 * db[i] as u128) % q as u128) as u64);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn tensor_matches_wide_oracle(seed in any::<u64>(), log_n in 2u32..=5, towers in 2usize..=3) {
        let n = 1usize << log_n;
        let ring = RnsRing::new(n, basis_u64(n, towers)).unwrap();
        let m = ring.basis.big_modulus().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut poly = || (0..n).map(|_| rng.gen_biguint_below(&m)).collect::<Vec<_>>();
        let ca = WideCiphertext { c1: poly(), c2: poly() };
        let cb = WideCiphertext { c1: poly(), c2: poly() };
        let r = ct_mul_rns(&ca, &cb, &ring).unwrap();
        prop_assert_eq!(r.d1, oracle(&ca.c1, &cb.c1, &m));
        prop_assert_eq!(r.d2, add(&oracle(&ca.c1, &cb.c2, &m), &oracle(&ca.c2, &cb.c1, &m), &m));
        prop_assert_eq!(r.d3, oracle(&ca.c2, &cb.c2, &m));
    }

    #[test]
    fn tower_order_is_irrelevant(seed in any::<u64>(), perm in Just((0..3usize).collect::<Vec<_>>()).prop_shuffle()) {
        let n = 8;
        let ring = RnsRing::new(n, basis_u64(n, 3)).unwrap();
        let m = ring.basis.big_modulus().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut poly = || (0..n).map(|_| rng.gen_biguint_below(&m)).collect::<Vec<_>>();
        let ta = ring.decompose_ct(&WideCiphertext { c1: poly(), c2: poly() }).unwrap();
        let tb = ring.decompose_ct(&WideCiphertext { c1: poly(), c2: poly() }).unwrap();
        let base = ring.ct_mul_towers(&ta, &tb, &[0, 1, 2]).unwrap();
        prop_assert_eq!(ring.ct_mul_towers(&ta, &tb, &perm).unwrap(), base);
    }
}

#[test]
fn u128_towers_agree_with_u64_towers() {
    // Same wide product through two 109-bit towers and five 44-bit towers,
    // compared after reducing both to the smaller modulus' centered lift of
    // small inputs, where neither wraps.
    let n = 16;
    let wide = RnsRing::new(n, gen_ntt_primes::<u128>(n, 109, 2).unwrap()).unwrap();
    let narrow = RnsRing::new(n, gen_ntt_primes::<u64>(n, 44, 5).unwrap()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let bound = BigUint::from(1u64 << 40);
    let mut poly = || {
        (0..n)
            .map(|_| rng.gen_biguint_below(&bound))
            .collect::<Vec<_>>()
    };
    let ca = WideCiphertext {
        c1: poly(),
        c2: poly(),
    };
    let cb = WideCiphertext {
        c1: poly(),
        c2: poly(),
    };
    let a = ct_mul_rns(&ca, &cb, &wide).unwrap();
    let b = ct_mul_rns(&ca, &cb, &narrow).unwrap();
    let center = |v: &[BigUint], m: &BigUint| -> Vec<num_bigint::BigInt> {
        v.iter()
            .map(|x| {
                let x = num_bigint::BigInt::from(x.clone());
                let m = num_bigint::BigInt::from(m.clone());
                if &x * 2 > m {
                    x - m
                } else {
                    x
                }
            })
            .collect()
    };
    let (ma, mb) = (wide.basis.big_modulus(), narrow.basis.big_modulus());
    assert_eq!(center(&a.d1, ma), center(&b.d1, mb));
    assert_eq!(center(&a.d2, ma), center(&b.d2, mb));
    assert_eq!(center(&a.d3, ma), center(&b.d3, mb));
}
