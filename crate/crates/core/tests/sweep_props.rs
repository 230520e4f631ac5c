use satqos::experiments::{compare_stin_psn, run_fig3};
use satqos::{Figure, SweepSpec};

fn small(figure: Figure) -> SweepSpec {
    let mut s = SweepSpec::defaults(figure);
    s.k_grid = vec![1, 4];
    s.updates = 4_000;
    s.replications = 8;
    s.error_model.sample_budget = 20_000;
    s
}

#[test]
fn disabled_assistance_gives_zero_difference() {
    let mut s = small(Figure::StinVsPsn);
    s.hybrid = s.hybrid.disabled();
    let t = compare_stin_psn(&s).unwrap();
    assert!(t.values("difference_cu").iter().all(|&d| d == 0.0));
}

#[test]
fn difference_widens_as_snr_drops() {
    let t = compare_stin_psn(&small(Figure::StinVsPsn)).unwrap();
    let k = t.values("k");
    let snr = t.values("snr_db");
    let d = t.values("difference_cu");
    for kk in [1.0, 4.0] {
        let at = |db: f64| {
            (0..k.len())
                .find(|&i| k[i] == kk && snr[i] == db)
                .map(|i| d[i])
                .unwrap()
        };
        assert!(at(5.0) < at(15.0), "K={kk}: {} vs {}", at(5.0), at(15.0));
    }
}

#[test]
fn half_widths_shrink_with_replications() {
    let mut s = small(Figure::Fig3);
    s.k_grid = vec![2];
    s.snr_points_db = vec![5.0];
    s.replications = 16;
    let a = run_fig3(&s).unwrap().values("half_width_cu");
    s.replications = 64;
    let b = run_fig3(&s).unwrap().values("half_width_cu");
    for (x, y) in a.iter().zip(&b) {
        let ratio = x / y;
        assert!((ratio / 2.0 - 1.0).abs() <= 0.2, "ratio {ratio}");
    }
}

#[test]
fn sweep_output_is_reproducible() {
    let s = small(Figure::Fig3);
    let mut a = Vec::new();
    let mut b = Vec::new();
    run_fig3(&s).unwrap().write_csv(&mut a, &[]).unwrap();
    run_fig3(&s).unwrap().write_csv(&mut b, &[]).unwrap();
    assert_eq!(a, b);
}
