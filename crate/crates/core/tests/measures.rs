use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stitlab::geometry::{ConvexPolytope, Point, Tolerance, Window};
use stitlab::measures::{HyperplaneMeasureSpec, TimeScaledMeasure};
use stitlab::stats::{aggregate, chi_square_test, ks_critical_001, ks_statistic};

fn p2(x: f64, y: f64) -> Point<f64> {
    Point::new(x, y, 0.0)
}

fn unit_square() -> ConvexPolytope<f64> {
    ConvexPolytope::cuboid(&[0.0, 0.0], &[1.0, 1.0]).unwrap()
}

fn unit_cube() -> ConvexPolytope<f64> {
    ConvexPolytope::cuboid(&[0.0; 3], &[1.0; 3]).unwrap()
}

#[test]
fn segment_measures() {
    let iso2 = HyperplaneMeasureSpec::<f64>::isotropic(2);
    let iso3 = HyperplaneMeasureSpec::<f64>::isotropic(3);
    let l = 2.5;
    assert!((iso2.segment_measure(&p2(0.0, 0.0), &p2(1.5, 2.0)) - 2.0 / PI * l).abs() < 1e-14);
    assert!((iso2.segment_measure(&p2(0.0, 0.0), &p2(PI, 0.0)) - 2.0).abs() < 1e-14);
    let x = Point::new(0.0, 0.0, 0.0);
    let y = Point::new(2.0, 0.0, 0.0);
    assert!((iso3.segment_measure(&x, &y) - 1.0).abs() < 1e-14);
    let axis = HyperplaneMeasureSpec::<f64>::axis_counting(3);
    assert_eq!(axis.segment_measure(&x, &Point::new(1.0, 1.0, 1.0)), 3.0);
    assert_eq!(axis.segment_measure(&x, &Point::new(-1.0, 0.5, 0.0)), 1.5);
}

#[test]
fn hitting_measures_of_standard_bodies() {
    let iso2 = HyperplaneMeasureSpec::<f64>::isotropic(2);
    let iso3 = HyperplaneMeasureSpec::<f64>::isotropic(3);
    assert!((iso2.measure_hitting(&unit_square()) - 4.0 / PI).abs() < 1e-12);
    assert!((iso3.measure_hitting(&unit_cube()) - 1.5).abs() < 1e-12);
    let axis = HyperplaneMeasureSpec::<f64>::axis_counting(3);
    assert_eq!(axis.measure_hitting(&unit_cube()), 3.0);
    // a ball of radius R has mean width 2R
    for d in [2, 3] {
        let b = Window::ball(d, Point::zero(), 1.75).unwrap();
        assert_eq!(b.mean_width(), 3.5);
    }
    // regular polygon with many sides approaches the disk
    let n = 2000;
    let poly = ConvexPolytope::polygon(
        (0..n)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / n as f64;
                p2(a.cos(), a.sin())
            })
            .collect(),
    )
    .unwrap();
    assert!((iso2.measure_hitting(&poly) - 2.0).abs() < 1e-5);
}

#[test]
fn scaling_and_monotonicity() {
    let specs = [
        HyperplaneMeasureSpec::<f64>::isotropic(3),
        HyperplaneMeasureSpec::axis_counting(3),
        HyperplaneMeasureSpec::discrete(
            3,
            vec![
                (Point::new(1.0, 1.0, 0.0), 0.5),
                (Point::new(0.0, 0.0, 1.0), 0.25),
                (Point::new(0.0, 1.0, 0.0), 0.25),
            ],
        )
        .unwrap(),
    ];
    let k = ConvexPolytope::cuboid(&[0.0; 3], &[1.0, 2.0, 0.5]).unwrap();
    let inner = ConvexPolytope::cuboid(&[0.2, 0.1, 0.1], &[0.9, 1.5, 0.4]).unwrap();
    for s in &specs {
        let base = s.measure_hitting(&k);
        assert!((s.measure_hitting(&k.scaled(2.5)) - 2.5 * base).abs() < 1e-12 * base);
        assert!(s.measure_hitting(&inner) <= base);
        let tm = TimeScaledMeasure::new(s.clone(), 3.0).unwrap();
        assert!((tm.measure_hitting(&k) - 3.0 * base).abs() < 1e-12 * base);
    }
    assert!(TimeScaledMeasure::new(specs[0].clone(), 0.0).is_err());
}

#[test]
fn invalid_specs_are_rejected() {
    assert!(HyperplaneMeasureSpec::<f64>::discrete(2, vec![(p2(1.0, 0.0), 1.0)]).is_err());
    assert!(HyperplaneMeasureSpec::<f64>::discrete(
        2,
        vec![(p2(1.0, 0.0), 0.5), (p2(0.0, 1.0), 0.4)]
    )
    .is_err());
    assert!(HyperplaneMeasureSpec::<f64>::discrete(
        2,
        vec![(p2(1.0, 0.0), 1.5), (p2(0.0, 1.0), -0.5)]
    )
    .is_err());
    assert!(HyperplaneMeasureSpec::<f64>::discrete(
        2,
        vec![(p2(0.0, 0.0), 0.5), (p2(0.0, 1.0), 0.5)]
    )
    .is_err());
    assert!(HyperplaneMeasureSpec::<f64>::isotropic(4)
        .validated()
        .is_err());
    // directions are normalized
    let s =
        HyperplaneMeasureSpec::<f64>::discrete(2, vec![(p2(3.0, 4.0), 0.5), (p2(0.0, 2.0), 0.5)])
            .unwrap();
    assert!((s.direction_rate(&p2(1.0, 0.0)) - 0.3).abs() < 1e-15);
}

#[test]
fn isotropic_direction_law_in_the_square() {
    // normal angle on [0, π) has density ∝ |cos θ| + |sin θ|
    let bins = 12;
    let n = 100_000;
    let s = HyperplaneMeasureSpec::<f64>::isotropic(2);
    let k = unit_square();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut obs = vec![0.0; bins];
    for _ in 0..n {
        let h = s.sample_hitting(&k, &mut rng).unwrap();
        let th = h.normal.y().atan2(h.normal.x()).rem_euclid(PI);
        obs[((th / PI * bins as f64) as usize).min(bins - 1)] += 1.0;
    }
    let prim = |x: f64| {
        if x <= PI / 2.0 {
            x.sin() - x.cos() + 1.0
        } else {
            3.0 - x.sin() - x.cos()
        }
    };
    let exp: Vec<f64> = (0..bins)
        .map(|i| {
            let (a, b) = (
                PI * i as f64 / bins as f64,
                PI * (i + 1) as f64 / bins as f64,
            );
            n as f64 * (prim(b) - prim(a)) / 4.0
        })
        .collect();
    let (_, p) = chi_square_test(&obs, &exp);
    assert!(p > 0.001, "p = {p}");
}

#[test]
fn offsets_are_uniform_over_the_support_interval() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let k = ConvexPolytope::cuboid(&[0.0; 3], &[2.0, 1.0, 3.0]).unwrap();
    for s in [
        HyperplaneMeasureSpec::<f64>::isotropic(3),
        HyperplaneMeasureSpec::axis_counting(3),
    ] {
        let us: Vec<f64> = (0..20_000)
            .map(|_| {
                let h = s.sample_hitting(&k, &mut rng).unwrap();
                // canonical offsets are nonnegative, so given the normal the
                // offset is uniform on the nonnegative part of the support
                let (lo, hi) = k.support_interval(&h.normal);
                let lo = lo.max(0.0);
                (h.offset - lo) / (hi - lo)
            })
            .collect();
        let d = ks_statistic(&us, |x| x.clamp(0.0, 1.0));
        assert!(d < ks_critical_001(us.len()), "{s:?} D = {d}");
    }
}

#[test]
fn single_direction_gives_parallel_lines() {
    let s =
        HyperplaneMeasureSpec::<f64>::discrete(2, vec![(p2(1.0, 0.0), 0.5), (p2(0.0, 1.0), 0.5)])
            .unwrap();
    let k = ConvexPolytope::cuboid(&[0.0, 0.0], &[3.0, 1.0]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 40_000;
    let mut vertical = 0.0;
    for _ in 0..n {
        let h = s.sample_hitting(&k, &mut rng).unwrap();
        assert!(h.normal.x().abs() == 1.0 || h.normal.y().abs() == 1.0);
        if h.normal.x().abs() == 1.0 {
            vertical += 1.0;
        }
    }
    // vertical lines have weight 0.5·3 against 0.5·1
    let p = 0.75;
    assert!((vertical - n as f64 * p).abs() < 4.0 * (n as f64 * p * (1.0 - p)).sqrt());
    let one = HyperplaneMeasureSpec::<f64>::isotropic(1);
    let seg = ConvexPolytope::interval(-1.0, 4.0).unwrap();
    let xs: Vec<f64> = (0..10_000)
        .map(|_| {
            let h = one.sample_hitting(&seg, &mut rng).unwrap();
            h.offset * h.normal.x()
        })
        .collect();
    let d = ks_statistic(&xs, |x| ((x + 1.0) / 5.0).clamp(0.0, 1.0));
    assert!(d < ks_critical_001(xs.len()));
}

#[test]
fn crofton_mean_section_size() {
    // Λ([K]) E[Vol(K ∩ H)] = SI · Vol(K) for a hyperplane drawn from the hitting law
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let tol = Tolerance::for_window(4.0);
    let k = ConvexPolytope::cuboid(&[0.0; 3], &[2.0, 1.0, 1.5]).unwrap();
    for s in [
        HyperplaneMeasureSpec::<f64>::isotropic(3),
        HyperplaneMeasureSpec::axis_counting(3),
    ] {
        let a: Vec<f64> = (0..20_000)
            .map(|_| {
                let h = s.sample_hitting(&k, &mut rng).unwrap();
                k.section(&h, &tol).map_or(0.0, |f| f.area)
            })
            .collect();
        let lam = s.measure_hitting(&k);
        let target = s.surface_intensity() * k.volume() / lam;
        let m = aggregate(&a, Some(target));
        assert!(m.z.unwrap().abs() < 3.5, "{m:?}");
    }
}
