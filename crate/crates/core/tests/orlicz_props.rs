use orlicz_spectral::orlicz::checks::{continuity_bound, sandwich, superadditivity_excess, truncate};
use orlicz_spectral::orlicz::{l1_bound_check, luxemburg_check, orlicz_norm, orlicz_norm_indicator};
use orlicz_spectral::young::{legendre_residual, ExpLog, YoungPair};
use orlicz_spectral::MeasuredField;
use proptest::prelude::*;

/// Golden-section minimum of the Amemiya functional over `ln k`.
fn golden_amemiya(values: &[f64], measures: &[f64]) -> f64 {
    let total: f64 = measures.iter().sum();
    let f = |lk: f64| {
        let k = lk.exp();
        (total + values.iter().zip(measures).map(|(&v, &m)| m * ExpLog.b(k * v.abs())).sum::<f64>()) / k
    };
    let (mut a, mut b) = (-40.0_f64, 40.0_f64);
    let r = (5.0_f64.sqrt() - 1.0) / 2.0;
    let (mut c, mut d) = (b - r * (b - a), a + r * (b - a));
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..300 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    f(0.5 * (a + b))
}

fn field() -> impl Strategy<Value = MeasuredField> {
    (4usize..40).prop_flat_map(|n| {
        (prop::collection::vec(-20.0f64..20.0, n), prop::collection::vec(0.01f64..1.0, n))
            .prop_filter("nonzero", |(v, _)| v.iter().any(|x| x.abs() > 1e-3))
            .prop_map(|(v, m)| MeasuredField::new(v, m).unwrap())
    })
}

fn field_and_labels(classes: usize) -> impl Strategy<Value = (MeasuredField, Vec<usize>)> {
    field().prop_flat_map(move |g| {
        let n = g.len();
        (Just(g), prop::collection::vec(0..classes, n))
    })
}

fn parts(labels: &[usize], classes: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); classes];
    for (i, &l) in labels.iter().enumerate() {
        out[l].push(i);
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn norm_matches_golden_section(g in field()) {
        let r = orlicz_norm(&g).unwrap();
        let oracle = golden_amemiya(g.values(), g.measures());
        prop_assert!((r.norm - oracle).abs() <= 1e-9 * oracle, "{} vs {}", r.norm, oracle);
        prop_assert!(r.witness_gap >= -1e-9 && r.witness_gap <= 1e-6, "gap {}", r.witness_gap);
    }

    #[test]
    fn superadditive_over_partitions((g, labels) in field_and_labels(4)) {
        let p = parts(&labels, 4);
        let m = p.iter().filter(|x| !x.is_empty()).count() as f64;
        prop_assert!(superadditivity_excess(&g, &p).unwrap() <= m * 1e-8);
    }

    #[test]
    fn restriction_never_increases((g, labels) in field_and_labels(2)) {
        let keep: Vec<usize> = (0..g.len()).filter(|&i| labels[i] == 0).collect();
        prop_assume!(!keep.is_empty());
        let sub = orlicz_norm(&g.restrict(&keep).unwrap()).unwrap().norm;
        prop_assert!(sub <= orlicz_norm(&g).unwrap().norm + 1e-9);
    }

    #[test]
    fn sandwich_between_nested_sets((g, labels) in field_and_labels(3)) {
        // label 0: support of g, 1: only in F, 2: in neither
        let e: Vec<usize> = (0..g.len()).filter(|&i| labels[i] == 0).collect();
        prop_assume!(!e.is_empty());
        let f: Vec<usize> = (0..g.len()).filter(|&i| labels[i] <= 1).collect();
        let g = g.with_values(g.values().iter().enumerate().map(|(i, &v)| if labels[i] == 0 { v } else { 0.0 }).collect()).unwrap();
        let (ne, nf, upper) = sandwich(&g, &e, &f).unwrap();
        prop_assert!(ne <= nf * (1.0 + 1e-9) + 1e-12, "{ne} > {nf}");
        prop_assert!(nf <= upper * (1.0 + 1e-9) + 1e-12, "{nf} > {upper}");
    }

    #[test]
    fn luxemburg_budget(g in field()) {
        prop_assert!(luxemburg_check(&g).unwrap() <= 1e-8);
    }

    #[test]
    fn l1_bound(g in field()) {
        prop_assert!(l1_bound_check(&g).unwrap() >= -1e-9);
    }

    #[test]
    fn truncations_converge(g in field()) {
        let full = orlicz_norm(&g).unwrap().norm;
        let sup = g.sup_norm();
        let mut prev = 0.0;
        for frac in [0.25, 0.5, 0.75, 1.0] {
            let t = orlicz_norm(&truncate(&g, frac * sup)).unwrap().norm;
            prop_assert!(t <= full + 1e-9);
            prev = t;
        }
        prop_assert!((prev - full).abs() <= 1e-12 * full);
    }

    #[test]
    fn set_continuity((g, labels) in field_and_labels(5)) {
        let e: Vec<usize> = (0..g.len()).filter(|&i| labels[i] != 0).collect();
        prop_assume!(!e.is_empty());
        let base = orlicz_norm(&g.restrict(&e).unwrap()).unwrap().norm;
        for drop in 0..3usize {
            let e_n: Vec<usize> = e.iter().copied().filter(|&i| labels[i] > drop).collect();
            if e_n.is_empty() {
                break;
            }
            let dev = (orlicz_norm(&g.restrict(&e_n).unwrap()).unwrap().norm - base).abs();
            let bound = continuity_bound(&g, &e, &e_n).unwrap();
            prop_assert!(dev <= bound + 1e-9, "{dev} > {bound}");
        }
    }

    #[test]
    fn triangle_and_homogeneity(g in field(), c in -5.0f64..5.0, seed in any::<u64>()) {
        let shift: Vec<f64> = (0..g.len()).map(|i| ((seed.wrapping_mul(i as u64 + 1) % 1000) as f64 - 500.0) / 50.0).collect();
        let h = g.with_values(shift).unwrap();
        let (ng, nh, nsum) = (
            orlicz_norm(&g).unwrap().norm,
            orlicz_norm(&h).unwrap().norm,
            orlicz_norm(&g.add(&h).unwrap()).unwrap().norm,
        );
        prop_assert!(nsum <= ng + nh + 1e-9 * (ng + nh));
        let scaled = orlicz_norm(&g.scaled(c).unwrap()).unwrap().norm;
        prop_assert!((scaled - c.abs() * ng).abs() <= 1e-9 * ng.max(1.0));
    }

    #[test]
    fn young_inequality(lt in -18.0f64..9.2, ls in -18.0f64..9.2) {
        let (t, s) = (lt.exp(), ls.exp());
        prop_assert!(s * t <= (ExpLog.a(t) + ExpLog.b(s)) * (1.0 + 1e-12));
        let t_star = ExpLog.b_prime(s);
        let eq = s * t_star;
        prop_assert!((eq - ExpLog.a(t_star) - ExpLog.b(s)).abs() <= 1e-10 * eq);
    }

    #[test]
    fn legendre_identity(ls in -18.0f64..9.2) {
        let s = ls.exp();
        prop_assert!(legendre_residual(s).abs() <= 1e-12 * (s * ExpLog.b_prime(s)).max(1.0));
    }

    #[test]
    fn indicator_closed_form(f in 0.001f64..1.0, ratio in 1.0f64..50.0) {
        let x = f * ratio;
        let measures = if ratio > 1.0 { vec![f, x - f] } else { vec![f] };
        let values: Vec<f64> = (0..measures.len()).map(|i| if i == 0 { 1.0 } else { 0.0 }).collect();
        let got = orlicz_norm(&MeasuredField::new(values, measures).unwrap()).unwrap().norm;
        let exact = orlicz_norm_indicator(f, x).unwrap();
        prop_assert!((got - exact).abs() <= 1e-6 * exact);
    }
}

#[test]
fn frozen_amemiya_value() {
    // 30-digit stationary point of the Amemiya functional, frozen.
    let g = MeasuredField::new(vec![3.0, -1.0, 0.5, 7.0], vec![0.1, 0.2, 0.3, 0.4]).unwrap();
    let n = orlicz_norm(&g).unwrap().norm;
    assert!((n - golden_amemiya(g.values(), g.measures())).abs() < 1e-12 * n);
    assert!((n - 4.823_163_920_503_212).abs() < 1e-9, "{n}");
}
