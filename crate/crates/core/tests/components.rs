mod common;

use std::f64::consts::PI;

use crbsel::array::crb_components;
use crbsel::ArrayGeometry;
use proptest::prelude::*;

use common::{direct_sums, rel, C};

fn weights(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(0.0..=1.0f64, n)
}

fn close(a: C, b: C, scale: f64) -> bool {
    (a - b).norm() <= 1e-12 * scale.max(1.0)
}

proptest! {
    #[test]
    fn matches_direct_sums((n, p) in (2usize..40).prop_flat_map(|n| (Just(n), weights(n))), dw in 1e-3..=PI) {
        let g = ArrayGeometry::ula(n).unwrap();
        let c = crb_components(&g, &p, dw).unwrap();
        let (z, zb0, zb1, zbb, t) = direct_sums(g.positions(), &p, dw);
        let scale = zbb + t;
        prop_assert!(close(c.z, z, scale));
        prop_assert!(close(c.zbar[0], zb0, scale));
        prop_assert!(close(c.zbar[1], zb1, scale));
        prop_assert!(rel(c.zbarbar, zbb) < 1e-12 || (c.zbarbar - zbb).abs() < 1e-12);
        prop_assert!((c.total - t).abs() < 1e-12 * t.max(1.0));
    }

    #[test]
    fn linear_in_weights(
        (n, p, q) in (2usize..30).prop_flat_map(|n| (Just(n), weights(n), weights(n))),
        a in 0.0..2.0f64,
        b in 0.0..2.0f64,
        dw in 1e-3..=PI,
    ) {
        let g = ArrayGeometry::ula(n).unwrap();
        let mix: Vec<f64> = p.iter().zip(&q).map(|(x, y)| (a * x + b * y) / 4.0).collect();
        let cp = crb_components(&g, &p, dw).unwrap().scaled(a / 4.0);
        let cq = crb_components(&g, &q, dw).unwrap().scaled(b / 4.0);
        let sum = cp.add(&cq);
        let direct = crb_components(&g, &mix, dw).unwrap();
        let scale = direct.zbarbar + direct.total;
        prop_assert!(close(sum.z, direct.z, scale));
        prop_assert!(close(sum.zbar[1], direct.zbar[1], scale));
        prop_assert!((sum.zbarbar - direct.zbarbar).abs() <= 1e-12 * scale.max(1.0));
    }

    #[test]
    fn negated_delta_conjugates((n, p) in (2usize..30).prop_flat_map(|n| (Just(n), weights(n))), dw in 1e-3..=PI) {
        let g = ArrayGeometry::ula(n).unwrap();
        let c = crb_components(&g, &p, dw).unwrap().conjugated();
        let (z, _, zb1, _, _) = direct_sums(g.positions(), &p, -dw);
        let scale = c.zbarbar + c.total;
        prop_assert!(close(c.z, z, scale));
        prop_assert!(close(c.zbar[1], zb1, scale));
    }

    #[test]
    fn z_bounded_by_total((n, p) in (2usize..30).prop_flat_map(|n| (Just(n), weights(n))), dw in 1e-3..=PI) {
        let g = ArrayGeometry::ula(n).unwrap();
        let c = crb_components(&g, &p, dw).unwrap();
        prop_assert!(c.z.norm() <= c.total * (1.0 + 1e-12) + 1e-15);
        prop_assert!(c.zbar[1].norm() <= c.zbar[0].re * (1.0 + 1e-12) + 1e-12);
    }
}

#[test]
fn full_ula_closed_forms() {
    for n in 2..20usize {
        let g = ArrayGeometry::ula(n).unwrap();
        let nf = n as f64;
        for dw in [0.3, 1.0, 2.5, PI] {
            let c = crb_components(&g, &vec![1.0; n], dw).unwrap();
            // geometric series
            let z = (C::from_polar(1.0, nf * dw) - 1.0) / (C::from_polar(1.0, dw) - 1.0);
            assert!((c.z - z).norm() < 1e-10, "n={n} dw={dw}");
            assert!(rel(c.zbar[0].re, nf * (nf - 1.0) / 2.0) < 1e-14);
            assert!(rel(c.zbarbar, (nf - 1.0) * nf * (2.0 * nf - 1.0) / 6.0) < 1e-14);
            assert_eq!(c.total, nf);
        }
    }
    // at Δω = π the alternating sum vanishes for even N
    let c = crb_components(&ArrayGeometry::ula(6).unwrap(), &[1.0; 6], PI).unwrap();
    assert!(c.z.norm() < 1e-12);
}
