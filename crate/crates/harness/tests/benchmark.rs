use agarcl_core::ObsMode;
use agarcl_harness::commands::{cmd_benchmark, BenchmarkConfig};

#[test]
fn frame_skip_scales_frames_not_decisions() {
    let r = cmd_benchmark(&BenchmarkConfig {
        scenario: "full".into(),
        seed: 1,
        seconds: 0.3,
        trials: 3,
        obs_mode: ObsMode::Pixel,
        frame_skips: vec![1, 4],
    })
    .unwrap();
    let (fs1, fs4) = (&r.rows[0], &r.rows[1]);
    assert_eq!(fs1.trials.len(), 3);
    assert!(fs4.iqm_steps_per_sec <= fs1.iqm_steps_per_sec);
    let ratio = fs4.iqm_frames_per_sec / fs4.iqm_steps_per_sec;
    assert!((ratio - 4.0).abs() <= 0.4, "{ratio}");
}

#[test]
fn single_trial_iqm_is_that_trial() {
    let r = cmd_benchmark(&BenchmarkConfig {
        scenario: "mini-1".into(),
        seed: 0,
        seconds: 0.05,
        trials: 1,
        obs_mode: ObsMode::Symbolic,
        frame_skips: vec![4],
    })
    .unwrap();
    assert_eq!(r.rows.len(), 1);
    assert_eq!(r.rows[0].iqm_steps_per_sec, r.rows[0].trials[0].steps_per_sec);
}
