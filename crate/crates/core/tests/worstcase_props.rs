use distortsec::dynamics::{GaussianSpec, LinearSystem};
use distortsec::parallel::stream_rng;
use distortsec::worstcase::*;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::Rng;
use rand_distr::{Distribution, Normal as NormalDist};

fn codec_strategy() -> impl Strategy<Value = ShiftMirrorCodec> {
    (1u32..=4, 0.05f64..8.0).prop_map(|(k, t)| ShiftMirrorCodec::new(k, t).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn scalar_round_trip(codec in codec_strategy(), x in -20.0f64..20.0, d in any::<u32>()) {
        prop_assume!(x != codec.theta());
        let key = KeyWord::new(d % codec.key_count(), codec.k()).unwrap();
        let z = encode_scalar(x, key, &codec).unwrap();
        prop_assert!((decode_scalar(z, key, &codec).unwrap() - x).abs() < 1e-10);
    }

    #[test]
    fn preimages_are_consistent(codec in codec_strategy(), z in -12.0f64..12.0) {
        let set = preimages(z, &codec, &StandardNormal).unwrap();
        prop_assert!(set.candidates.len() as u32 <= codec.key_count());
        let total: f64 = set.candidates.iter().map(|c| c.weight).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        let mult: u32 = set.candidates.iter().map(|c| c.multiplicity).sum();
        prop_assert_eq!(mult, codec.key_count());
        for c in &set.candidates {
            // Every candidate re-encodes to z under some key.
            let hit = (0..codec.key_count()).any(|d| {
                let key = KeyWord::new(d, codec.k()).unwrap();
                encode_scalar(c.x, key, &codec).is_ok_and(|e| (e - z).abs() < 1e-9)
            });
            prop_assert!(hit, "candidate {} of z = {}", c.x, z);
        }
    }

    #[test]
    fn two_point_sets_have_pair_variance(theta in 0.1f64..5.0, z in -8.0f64..8.0) {
        let codec = ShiftMirrorCodec::new(1, theta).unwrap();
        let set = preimages(z, &codec, &StandardNormal).unwrap();
        prop_assume!(set.candidates.len() == 2);
        let (a, b) = (set.candidates[0], set.candidates[1]);
        let pair = a.weight * b.weight * (a.x - b.x).powi(2);
        prop_assert!((set.variance() - pair).abs() <= 1e-12 * (1.0 + pair));
    }

    #[test]
    fn vector_round_trip(seed in any::<u64>(), n in 1usize..5, k in 1u32..4) {
        let mut rng = stream_rng(seed, 0);
        let mean = DVector::from_fn(n, |_, _| rng.random_range(-3.0..3.0));
        let var = DVector::from_fn(n, |_, _| rng.random_range(0.1..4.0));
        let g = GaussianSpec::new(mean, DMatrix::from_diagonal(&var)).unwrap();
        let codec = ShiftMirrorCodec::new(k, 1.5).unwrap();
        let x = DVector::from_fn(n, |_, _| rng.random_range(-8.0..8.0));
        let keys: Vec<KeyWord> = (0..n).map(|_| KeyWord::random(k, &mut rng).unwrap()).collect();
        let z = encode_vector(&x, &keys, &g, &codec).unwrap();
        let back = decode_vector(&z, &keys, &g, &codec).unwrap();
        prop_assert!((back - x).amax() < 1e-10);
    }
}

#[test]
fn distortion_never_exceeds_prior_variance() {
    for k in 1..=3 {
        for theta in [0.3, 1.0, 1.76, 3.0, 4.84, 7.0] {
            let codec = ShiftMirrorCodec::new(k, theta).unwrap();
            let g = GridSpec {
                step: 1e-2,
                ..GridSpec::default()
            };
            let w = worst_case_distortion(&codec, &StandardNormal, &g).unwrap();
            assert!(w.d_w <= 1.0 && w.d_w >= 0.0, "k={k} theta={theta}: {}", w.d_w);
        }
    }
}

#[test]
fn variance_is_periodic_inside_the_window() {
    let codec = ShiftMirrorCodec::new(2, 3.0).unwrap();
    let w = codec.sub_width();
    for z in [-2.9, -2.3, -1.55, -0.7] {
        let a = posterior_variance(z, &codec, &StandardNormal).unwrap();
        let b = posterior_variance(z + w, &codec, &StandardNormal).unwrap();
        assert!((a - b).abs() < 1e-12, "z = {z}");
    }
}

#[test]
fn general_prior_is_accepted() {
    let prior = Normal::new(0.0, 2.0).unwrap();
    let codec = ShiftMirrorCodec::new(1, 3.5).unwrap();
    let g = GridSpec {
        zmax: 12.0,
        step: 5e-3,
        ..GridSpec::default()
    };
    let scaled = worst_case_distortion(&codec, &prior, &g).unwrap().d_w;
    let unit = worst_case_distortion(&ShiftMirrorCodec::new(1, 1.75).unwrap(), &StandardNormal, &g)
        .unwrap()
        .d_w;
    // Scaling the prior and the window by 2 scales the variance by 4.
    assert!((scaled - 4.0 * unit).abs() < 1e-3, "{scaled} vs {unit}");
}

/// Joint posterior over all `(2^k)^n` key combinations, pushed through the
/// dynamics, compared with the per-coordinate product form.
#[test]
fn trajectory_posterior_matches_joint_enumeration() {
    let sys = LinearSystem::noise_free(
        DMatrix::from_row_slice(2, 2, &[1.1, 0.2, -0.2, 1.1]),
        DMatrix::from_row_slice(2, 1, &[1.0, 0.5]),
    )
    .unwrap();
    let prior = GaussianSpec::new(
        DVector::from_row_slice(&[0.5, -1.0]),
        DMatrix::from_diagonal(&DVector::from_row_slice(&[2.0, 0.5])),
    )
    .unwrap();
    let codec = ShiftMirrorCodec::new(3, 4.84).unwrap();
    let horizon = 5;
    let noise = NormalDist::new(0.0, 1.0).unwrap();
    for seed in 0..20u64 {
        let mut rng = stream_rng(seed, 0);
        let sd = prior.cov.diagonal().map(f64::sqrt);
        let mut states = vec![&prior.mean + DVector::from_fn(2, |i, _| sd[i] * noise.sample(&mut rng))];
        for t in 1..horizon {
            let u = DVector::from_element(1, noise.sample(&mut rng));
            states.push(sys.a() * &states[t - 1] + sys.b() * u);
        }
        let keys: Vec<KeyWord> = (0..2).map(|_| KeyWord::random(3, &mut rng).unwrap()).collect();
        let z = encode_trajectory(&sys, &states, &keys, &prior, &codec).unwrap();
        let info = EveInfo::from_codeword(&z, &sys).unwrap();
        let fast = eve_trajectory_distortion(&info, &sys, &prior, &codec).unwrap();

        // Brute force over the 64 joint keys.
        let mut cands = Vec::new();
        for d0 in 0..8 {
            for d1 in 0..8 {
                let ks = [KeyWord::new(d0, 3).unwrap(), KeyWord::new(d1, 3).unwrap()];
                let x1 = decode_vector(&info.z1, &ks, &prior, &codec).unwrap();
                let dev = (&x1 - &prior.mean).component_div(&sd);
                cands.push((x1, (-0.5 * dev.norm_squared()).exp()));
            }
        }
        let total: f64 = cands.iter().map(|c| c.1).sum();
        let mut power = DMatrix::<f64>::identity(2, 2);
        for (t, want) in fast.iter().enumerate() {
            let pts: Vec<DVector<f64>> = cands.iter().map(|(x, _)| &power * x).collect();
            let mean = pts
                .iter()
                .zip(&cands)
                .fold(DVector::zeros(2), |a, (p, c)| a + p * (c.1 / total));
            let tr: f64 = pts
                .iter()
                .zip(&cands)
                .map(|(p, c)| c.1 / total * (p - &mean).norm_squared())
                .sum();
            assert!(
                (tr - want).abs() <= 1e-9 * (1.0 + tr),
                "seed {seed} t {t}: {tr} vs {want}"
            );
            power = sys.a() * power;
        }
    }
}
