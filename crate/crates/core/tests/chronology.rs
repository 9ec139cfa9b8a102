use sffcc::chronology::{
    check_timing, convert_benchmarks, count_resources, optical_depth, simulate_clock_cycle,
    tau_bounds, tau_logical, Thresholds, TimingParams,
};

#[test]
fn resources_at_distance_three() {
    let plain = count_resources(3, false).unwrap();
    assert_eq!(
        (plain.eps_units, plain.photodetectors, plain.active_phase_shifters, plain.passive_beamsplitters),
        (54, 162, 286, 464)
    );
    assert_eq!((plain.fusion_gates, plain.fibre_eoms), (70, 0));
    let ebf = count_resources(3, true).unwrap();
    assert_eq!((ebf.active_phase_shifters, ebf.passive_beamsplitters, ebf.fibre_eoms), (216, 394, 27));
    assert!(count_resources(1, false).is_err());
}

#[test]
fn feedback_saves_one_switch_and_splitter_per_fusion_gate() {
    for l in 2..=10 {
        let a = count_resources(l, false).unwrap();
        let b = count_resources(l, true).unwrap();
        assert_eq!(a.active_phase_shifters - b.active_phase_shifters, a.fusion_gates);
        assert_eq!(a.passive_beamsplitters - b.passive_beamsplitters, a.fusion_gates);
        assert_eq!(a.photodetectors, 3 * a.eps_units);
        assert_eq!(a.eps_units, 6 * l * l);
    }
    assert_eq!(optical_depth(true).active + 1, optical_depth(false).active);
}

#[test]
fn clock_cycle_reduction() {
    let r = simulate_clock_cycle(&[vec![1, 3, 2], vec![1], vec![4, 4]], Some(29.0));
    assert_eq!(r.n_max, vec![3, 1, 4]);
    assert_eq!(r.tau_logical_echo, 7 + 3 + 9);
    assert_eq!(r.tau_logical_ns, Some(19.0 * 29.0));
    assert_eq!(tau_logical(&[]), 0);
    assert_eq!(tau_bounds(3, 8), (54, 306));
    // Every layer at one attempt or at N attempts hits the bounds.
    let layers = 6 * 3;
    assert_eq!(tau_logical(&vec![1; layers]), tau_bounds(3, 8).0);
    assert_eq!(tau_logical(&vec![8; layers]), tau_bounds(3, 8).1);
}

#[test]
fn reference_timing_is_inconsistent() {
    let checks = check_timing(&TimingParams::reference());
    assert_eq!(checks.len(), 6);
    let failed: Vec<&str> = checks.iter().filter(|c| !c.satisfied).map(|c| c.id).collect();
    assert_eq!(failed, ["rep-echo", "feedforward", "switch"]);
    for c in &checks {
        assert_eq!(c.satisfied, c.margin > 0.0 || (c.id == "rep-echo" && c.margin == 0.0), "{}", c.id);
    }
}

#[test]
fn consistent_timing_passes() {
    let p = TimingParams::consistent();
    p.validate().unwrap();
    assert!(check_timing(&p).iter().all(|c| c.satisfied));
    let bad = TimingParams { tau_d: -1.0, ..p };
    assert!(bad.validate().is_err());
}

#[test]
fn benchmark_conversion() {
    let b = convert_benchmarks(&Thresholds::reported()).unwrap();
    let get = |q: &str| b.iter().find(|x| x.quantity == q).unwrap().value;
    assert!((get("loss") - 0.92).abs() < 1e-12);
    assert!((get("branching") - 573.7).abs() < 0.1);
    assert!((get("depolarising") - 416.7).abs() < 0.1);
    assert!((get("laser-flip") - 0.0108).abs() < 1e-12);
    assert!((get("photon-x") - 0.96).abs() < 1e-12);
    assert!((get("photon-z") - 0.9943).abs() < 1e-12);
    assert!((get("blinking") - 15.39).abs() < 0.01);
    assert!((get("ground-dephasing") - 27.97).abs() < 0.01);
    assert_eq!(get("ground-dephasing-reported"), 56.0);
    assert!(convert_benchmarks(&Thresholds::default()).unwrap().is_empty());
}
