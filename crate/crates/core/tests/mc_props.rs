use num_traits::ToPrimitive;
use proptest::prelude::*;
use volterra_core::mc::{derive_stream, sample_noise, CompensatedSum, NoiseLaw};

#[test]
fn moment_table_up_to_order_twelve() {
    let n = 10_000_000usize;
    let chunk = 1_000_000;
    for law in NoiseLaw::ALL {
        let mut s1: Vec<CompensatedSum> = (0..=12).map(|_| CompensatedSum::default()).collect();
        let mut s2: Vec<CompensatedSum> = (0..=12).map(|_| CompensatedSum::default()).collect();
        let mut stream = derive_stream(2024, &[law as u64]);
        for _ in 0..n / chunk {
            for x in sample_noise(law, &mut stream, chunk) {
                let mut v = 1.0;
                for p in 1..=12 {
                    v *= x;
                    s1[p].add(v);
                    s2[p].add(v * v);
                }
            }
        }
        for p in 1..=12 {
            let exact = law.moment(p).to_f64().unwrap();
            let m = s1[p].value() / n as f64;
            let var = (s2[p].value() / n as f64 - m * m).max(0.0);
            let se = (var / (n - 1) as f64).sqrt();
            assert!((m - exact).abs() <= 4.0 * se + 1e-12 * exact.abs().max(1.0), "{law:?} p={p}: {m} ± {se} vs {exact}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn streams_are_value_like(root in any::<u64>(), path in proptest::collection::vec(any::<u64>(), 0..4), n in 1usize..200) {
        for law in NoiseLaw::ALL {
            let a = sample_noise(law, &mut derive_stream(root, &path), n);
            let b = sample_noise(law, &mut derive_stream(root, &path), n);
            prop_assert_eq!(a.iter().map(|x| x.to_bits()).collect::<Vec<_>>(), b.iter().map(|x| x.to_bits()).collect::<Vec<_>>());
        }
        let s = derive_stream(root, &path);
        let mut child = path.clone();
        child.push(3);
        let mut a = s.substream(3);
        let mut b = derive_stream(root, &child);
        prop_assert_eq!(a.uniform_open().to_bits(), b.uniform_open().to_bits());
    }
}
