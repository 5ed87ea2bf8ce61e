use std::path::PathBuf;

use distortsec::config::ScenarioConfig;
use distortsec::distributions::InitialState;
use distortsec::dynamics::{GaussianSpec, LinearSystem};
use distortsec::harness::*;
use distortsec::mirroring::{AffineMirror, MirrorSchedule};
use nalgebra::{DMatrix, DVector};

fn config(name: &str) -> ScenarioConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name);
    ScenarioConfig::from_path(&path).unwrap()
}

fn double_integrator() -> LinearSystem {
    LinearSystem::noise_free(
        DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]),
        DMatrix::from_row_slice(2, 1, &[0.125, 0.5]),
    )
    .unwrap()
}

fn small_quadrotor() -> QuadrotorSetup {
    QuadrotorSetup {
        corpus_size: 2000,
        ..QuadrotorSetup::default()
    }
}

#[test]
fn shipped_configs_run_and_respect_bounds() {
    for name in [
        "random_walk.json",
        "gaussian_mirror.json",
        "trajectory_codec.json",
    ] {
        let mut cfg = config(name);
        if cfg.kind() != "random_walk" {
            cfg.override_samples(2000).unwrap();
        }
        let report = cfg.run().unwrap();
        assert!(
            report.bound_violations(3.0).is_empty(),
            "{name}: {:?}",
            report.bound_violations(3.0)
        );
        assert_eq!(report.per_time.len(), report.per_time.last().unwrap().t);
    }
}

#[test]
fn reports_are_deterministic() {
    let cfg = {
        let mut c = config("gaussian_mirror.json");
        c.override_samples(5000).unwrap();
        c
    };
    let a = cfg.run().unwrap().to_json().unwrap();
    let b = cfg.run().unwrap().to_json().unwrap();
    assert_eq!(a, b);

    let q1 = run_quadrotor(&small_quadrotor(), &quadrotor_plane_mirror(10), 3).unwrap();
    let q2 = run_quadrotor(&small_quadrotor(), &quadrotor_plane_mirror(10), 3).unwrap();
    assert_eq!(q1.to_json().unwrap(), q2.to_json().unwrap());
    let q3 = run_quadrotor(&small_quadrotor(), &quadrotor_plane_mirror(10), 4).unwrap();
    assert_ne!(q1.to_json().unwrap(), q3.to_json().unwrap());
}

#[cfg(feature = "parallel")]
#[test]
fn reports_do_not_depend_on_thread_count() {
    let mut cfg = config("trajectory_codec.json");
    cfg.override_samples(3000).unwrap();
    let run = |threads| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| {
            let mut csv = Vec::new();
            let r = cfg.run().unwrap();
            r.write_per_time_csv(&mut csv).unwrap();
            let q = run_quadrotor(&small_quadrotor(), &quadrotor_point_mirror(10), 9).unwrap();
            (r.to_json().unwrap(), csv, q.to_json().unwrap())
        })
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn monte_carlo_stays_below_closed_form() {
    let sys = double_integrator();
    let step = GaussianSpec::new(DVector::from_element(1, 0.2), DMatrix::identity(1, 1)).unwrap();
    let init = InitialState::Fixed(DVector::zeros(2));
    let x1 = GaussianSpec {
        mean: DVector::zeros(2),
        cov: DMatrix::zeros(2, 2),
    };
    let moments = state_moments(&sys, &x1, &step, 4);
    // A mirror that misses the means, so D_E sits strictly below the maximum.
    let mirror = AffineMirror::new(
        DMatrix::from_row_slice(1, 2, &[1.0, 1.0]),
        DVector::from_element(1, 0.7),
    )
    .unwrap();
    let schedule = MirrorSchedule::constant(mirror, 4).unwrap();
    let closed = distortsec::mirroring::average_distortion_closed_form(&moments, &schedule).unwrap();
    let r = run_gaussian_mirror(&sys, 4, &step, &init, Some(&schedule), 20_000, 1).unwrap();
    let se = r.d_e_std_error.unwrap();
    // Closed form bounds D_E from above (Jensen); take it as a ceiling.
    assert!(r.d_e <= closed + 3.0 * se, "{} vs {closed} (se {se})", r.d_e);
    assert!(r.d_e < r.d_e_max);
    assert!(r.bound_violations(3.0).is_empty());
}

#[test]
fn quadrotor_report_carries_corpus_statistics() {
    let r = run_quadrotor(&small_quadrotor(), &quadrotor_point_mirror(10), 1).unwrap();
    for key in [
        "corpus_size",
        "skipped_draws",
        "distinct_sequences",
        "position_mean_norm",
        "ratio",
    ] {
        assert!(r.extras.contains_key(key), "missing {key}");
    }
    assert_eq!(r.extras["corpus_size"], 2000.0);
    assert!(r.extras["skipped_draws"] <= 2000.0 * MAX_SKIPPED_FRACTION);
    assert!(r.bound_violations(3.0).is_empty());
    let mut csv = Vec::new();
    r.write_per_time_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("t,D_t_mean,D_t_min,D_t_se\n"));
    assert_eq!(text.lines().count(), 11);
}

#[test]
fn msb_flip_breaks_feasibility_but_mirror_does_not() {
    let region = GridRegion::new(3, 2).unwrap();
    let path = vec![vec![2, 5], vec![3, 5], vec![4, 5], vec![5, 6]];
    let demo = msb_attack_demo(&region, &path).unwrap();
    assert_eq!(demo.flipped, Verdict::InfeasibleAt(3));
    assert_eq!(demo.mirrored, Verdict::Never);
}
