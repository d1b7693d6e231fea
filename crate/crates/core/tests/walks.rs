use fracdio::groups::{self, Representation};
use fracdio::ifs::{cantor3, ex1314};
use fracdio::linalg;
use fracdio::randwalk::*;

fn walks() -> Vec<(&'static str, GroupWalk)> {
    vec![
        ("cantor", GroupWalk::from_ifs(&cantor3()).unwrap()),
        ("ex1314", GroupWalk::from_ifs(&ex1314()).unwrap()),
        ("illustrative-1", GroupWalk::illustrative(1, 3).unwrap()),
        ("illustrative-2", GroupWalk::illustrative(2, 3).unwrap()),
    ]
}

#[test]
fn slow_subspace_is_transverse_to_w() {
    for (name, w) in walks() {
        for lvl in 1..=2 {
            let ws = groups::w_space(w.m, w.n, lvl).unwrap();
            let rw = w.in_rep(Representation::Wedge(lvl)).unwrap();
            if ws.positive.len() >= rw.dim() {
                continue;
            }
            let slow = slow_subspace(&rw, 400, ws.positive.len(), 11).unwrap();
            let angle = linalg::min_principal_angle(&slow, &ws.positive_frame());
            assert!(angle > 1e-3, "{name} level {lvl}: angle {angle}");
        }
    }
}

#[test]
fn ledgers_are_reproducible() {
    let rw = GroupWalk::illustrative(2, 1).unwrap().in_rep(Representation::Wedge(1)).unwrap();
    let a = product_walk(&rw, 300, 9).unwrap();
    let b = product_walk(&rw, 300, 9).unwrap();
    assert_eq!(a.current, b.current);
    assert_eq!(a.log_scale(), b.log_scale());
    let e = product_walk(&rw, 0, 9).unwrap();
    assert_eq!(e.log_scale(), 0.0);
}

#[test]
fn spectra_are_sorted_and_volume_free() {
    for (name, w) in walks() {
        let rw = w.in_rep(Representation::Wedge(1)).unwrap();
        let e = lyapunov_spectrum(&rw, 2000, suggested_period(&rw), 4, 5).unwrap();
        assert!(e.exponents.windows(2).all(|p| p[0] >= p[1]), "{name}");
        let (s, se) = e.volume_sum();
        assert!(s.abs() < 3.0 * se, "{name}: sum {s} err {se}");
        // The top exponent of Ad is carried by W.
        let top = w.w_exponent().unwrap();
        assert!((e.exponents[0] - top).abs() < 4.0 * e.stderr[0] + 2e-2, "{name}: {} vs {top}", e.exponents[0]);
    }
}

#[test]
fn positivity_holds_on_the_illustrative_walk() {
    let w = GroupWalk::illustrative(1, 2).unwrap();
    for d in 1..=2 {
        let r = positivity_check(&w, d, 300, 30, 4).unwrap();
        assert!(r.estimate - 3.0 * r.stderr > 0.0, "level {d}: {r:?}");
    }
}
