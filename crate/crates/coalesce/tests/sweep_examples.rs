use coalesce::harness::sweep::{amplitude_row, write_table_csv, Experiment, OmegaTable};
use coalesce::harness::{run_sweep, SweepConfig};

fn fig(e: Experiment, points: usize, range: (f64, f64)) -> SweepConfig {
    SweepConfig { points, a1_range: range, ..SweepConfig::preset(e) }
}

#[test]
fn fig10_separated_blows_up_while_coalescing_stays_bounded() {
    let t = run_sweep(&fig(Experiment::Fig10, 4, (0.51, 0.6))).unwrap();
    let sep_near = t.value(0, "err_separated").unwrap();
    let sep_far = t.value(3, "err_separated").unwrap();
    assert!(t.value(0, "err_coalescing").unwrap() < sep_near);
    assert!(sep_near > 1.0 && sep_near > 3.0 * sep_far, "{sep_near} {sep_far}");
    for r in 0..t.rows.len() {
        let e = t.value(r, "err_coalescing").unwrap();
        assert!(e < 0.6, "row {r}: {e}");
    }
}

#[test]
fn fig3_separated_accurate_when_well_spaced() {
    let t = run_sweep(&fig(Experiment::Fig3, 6, (0.7, 0.95))).unwrap();
    for r in 0..t.rows.len() {
        let e = t.value(r, "err_separated").unwrap();
        assert!(e < 0.2, "a1 = {}: error {e}", t.rows[r].x);
    }
}

#[test]
fn single_point_sweep_equals_direct_row() {
    let cfg = fig(Experiment::Fig3, 1, (0.8, 0.8));
    let t = run_sweep(&cfg).unwrap();
    assert_eq!(t.rows.len(), 1);
    let om = OmegaTable::new(cfg.sigma1, cfg.sigma2).unwrap();
    assert_eq!(t.rows[0], amplitude_row(&cfg, &om, 0.8));
}

#[test]
fn error_columns_recompute_and_output_is_reproducible() {
    let cfg = fig(Experiment::Fig3, 3, (0.6, 0.9));
    let t = run_sweep(&cfg).unwrap();
    for r in 0..t.rows.len() {
        let n = t.value(r, "numeric").unwrap();
        for (p, e) in [("separated", "err_separated"), ("single", "err_single")] {
            let want = (n - t.value(r, p).unwrap()).abs() / n;
            assert!((t.value(r, e).unwrap() - want).abs() <= 1e-15 * want.max(1.0));
        }
    }
    let mut a = Vec::new();
    let mut b = Vec::new();
    write_table_csv(&mut a, &t).unwrap();
    write_table_csv(&mut b, &run_sweep(&cfg).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn fig8_and_fig9_rows() {
    let t8 = run_sweep(&SweepConfig { points: 3, beta_range: (0.05, 1.0), ..SweepConfig::preset(Experiment::Fig8) }).unwrap();
    assert!((t8.value(0, "ratio").unwrap() - 1.0).abs() < 0.01);
    let t9 = run_sweep(&SweepConfig { points: 3, beta_range: (2.0, 4.0), ..SweepConfig::preset(Experiment::Fig9) }).unwrap();
    let gaps: Vec<f64> = (0..3).map(|r| (t9.value(r, "ratio").unwrap() - 1.0).abs()).collect();
    assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{gaps:?}");
}

#[test]
fn fig3_requires_unit_sum() {
    let cfg = SweepConfig { a_sum: 0.9, ..SweepConfig::preset(Experiment::Fig3) };
    assert!(run_sweep(&cfg).is_err());
}
