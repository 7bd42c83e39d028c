use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stitlab::geometry::{ConvexPolytope, Point, Window};
use stitlab::measures::HyperplaneMeasureSpec;
use stitlab::mnw::{iterate, rescale, run, RunOptions, Tessellation};
use stitlab::stats::{aggregate, variance_estimate};

fn square(side: f64) -> Window<f64> {
    Window::polytope(ConvexPolytope::cuboid(&[0.0, 0.0], &[side, side]).unwrap())
}

fn iso(d: usize) -> HyperplaneMeasureSpec<f64> {
    HyperplaneMeasureSpec::isotropic(d)
}

fn runs(
    spec: &HyperplaneMeasureSpec<f64>,
    t: f64,
    w: &Window<f64>,
    n: usize,
    seed: u64,
    opts: &RunOptions,
) -> Vec<Tessellation<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| run(spec, t, w, &[], opts, &mut rng).unwrap())
        .collect()
}

#[test]
fn no_split_probability_in_the_unit_square() {
    // Λ([0,1]²) = mean width = 4/π; first lifetime ~ Exp(4/π)
    let n = 10_000;
    let p = (-0.1 * 4.0 / PI).exp();
    let ys = runs(
        &iso(2),
        0.1,
        &square(1.0),
        n,
        1,
        &RunOptions::summary_only(),
    );
    let k = ys.iter().filter(|y| y.summary.facet_count == 0).count() as f64;
    let sd = (n as f64 * p * (1.0 - p)).sqrt();
    assert!(
        (k - n as f64 * p).abs() < 4.0 * sd,
        "{k} vs {}",
        n as f64 * p
    );
}

#[test]
fn one_dimensional_runs_are_poisson() {
    let w = Window::polytope(ConvexPolytope::interval(0.0, 3.0).unwrap());
    let ys = runs(&iso(1), 2.0, &w, 4000, 2, &RunOptions::summary_only());
    let k: Vec<f64> = ys
        .iter()
        .map(|y| (y.summary.cell_count - 1) as f64)
        .collect();
    let m = aggregate(&k, Some(6.0));
    let v = variance_estimate(&k, Some(6.0));
    assert!(m.z.unwrap().abs() < 3.0, "{m:?}");
    assert!(v.z.unwrap().abs() < 3.0, "{v:?}");
    // the surface of a point process is its number of points
    assert!(ys
        .iter()
        .all(|y| y.summary.total_surface == (y.summary.cell_count - 1) as f64));
}

#[test]
fn mean_total_length_is_t_times_area() {
    let ys = runs(
        &iso(2),
        5.0,
        &square(1.0),
        2000,
        3,
        &RunOptions::summary_only(),
    );
    let s: Vec<f64> = ys.iter().map(|y| y.summary.total_surface).collect();
    let m = aggregate(&s, Some(5.0));
    assert!(m.z.unwrap().abs() < 3.0, "{m:?}");
}

#[test]
fn partition_and_tree_invariants() {
    let opts = RunOptions::default();
    let cube = Window::polytope(ConvexPolytope::cuboid(&[0.0; 3], &[2.0, 1.0, 1.5]).unwrap());
    let cases: Vec<(HyperplaneMeasureSpec<f64>, f64, Window<f64>)> = vec![
        (iso(2), 4.0, square(2.0)),
        (
            iso(2),
            3.0,
            Window::ball(2, Point::new(1.0, -1.0, 0.0), 1.5).unwrap(),
        ),
        (iso(3), 3.0, cube.clone()),
        (HyperplaneMeasureSpec::axis_counting(3), 2.0, cube),
        (iso(3), 2.0, Window::ball(3, Point::zero(), 1.0).unwrap()),
    ];
    for (k, (spec, t, w)) in cases.iter().enumerate() {
        for y in runs(spec, *t, w, 5, 10 + k as u64, &opts) {
            let dom = y.domain.volume();
            assert!((y.cell_volume_sum() - dom).abs() <= 1e-8 * dom, "case {k}");
            assert_eq!(y.summary.cell_count, y.summary.facet_count + 1);
            assert_eq!(y.cells.len() as u64, y.summary.cell_count);
            assert_eq!(y.i_facets.len() as u64, y.summary.facet_count);
            if w.dim() == 3 {
                for c in &y.cells {
                    c.polytope.validate_3d().unwrap();
                }
            }
            for f in &y.i_facets {
                assert!(f.birth_time > 0.0 && f.birth_time <= *t);
            }
        }
    }
}

#[test]
fn same_seed_same_tessellation() {
    let w = Window::ball(3, Point::zero(), 1.5).unwrap();
    let a = runs(&iso(3), 2.0, &w, 1, 99, &RunOptions::default()).remove(0);
    let b = runs(&iso(3), 2.0, &w, 1, 99, &RunOptions::default()).remove(0);
    assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
    let back = Tessellation::<f64>::from_json(&a.to_json().unwrap()).unwrap();
    assert_eq!(back.to_json().unwrap(), a.to_json().unwrap());
}

#[test]
fn checkpoints_are_monotone_and_end_at_the_total() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let cps = [0.5, 1.0, 2.0, 3.0];
    for _ in 0..20 {
        let y = run(
            &iso(2),
            3.0,
            &square(3.0),
            &cps,
            &RunOptions::summary_only(),
            &mut rng,
        )
        .unwrap();
        let v: Vec<f64> = y.checkpoints.iter().map(|c| c.surface).collect();
        assert!(v.windows(2).all(|p| p[0] <= p[1]));
        assert_eq!(*v.last().unwrap(), y.summary.total_surface);
    }
    assert!(run(
        &iso(2),
        1.0,
        &square(1.0),
        &[0.5, 0.2],
        &RunOptions::default(),
        &mut rng
    )
    .is_err());
}

#[test]
fn rescaling() {
    let y = runs(
        &iso(3),
        2.0,
        &Window::ball(3, Point::zero(), 1.0).unwrap(),
        1,
        5,
        &RunOptions::default(),
    )
    .remove(0);
    assert_eq!(rescale(&y, 1.0).unwrap(), y);
    let z = rescale(&y, 3.0).unwrap();
    assert!(
        (z.summary.total_surface - 9.0 * y.summary.total_surface).abs()
            < 1e-9 * z.summary.total_surface
    );
    assert!((z.t_end - 2.0 / 3.0).abs() < 1e-15);
    assert!((z.cell_volume_sum() - 27.0 * y.cell_volume_sum()).abs() < 1e-9 * z.cell_volume_sum());
}

#[test]
fn iterating_for_a_negligible_time_adds_nothing() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let y = run(
        &iso(2),
        2.0,
        &square(2.0),
        &[],
        &RunOptions::default(),
        &mut rng,
    )
    .unwrap();
    let z = iterate(&y, &iso(2), 1e-12, &[], &RunOptions::default(), &mut rng).unwrap();
    assert_eq!(z.summary.facet_count, y.summary.facet_count);
    assert_eq!(z.summary.total_surface, y.summary.total_surface);
    assert_eq!(z.t_end, 2.0 + 1e-12);
}

#[test]
fn iteration_matches_a_longer_run() {
    let w = square(2.0);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for _ in 0..1000 {
        let y1 = run(&iso(2), 1.0, &w, &[], &RunOptions::default(), &mut rng).unwrap();
        a.push(
            iterate(
                &y1,
                &iso(2),
                1.5,
                &[],
                &RunOptions::summary_only(),
                &mut rng,
            )
            .unwrap()
            .summary
            .total_surface,
        );
        b.push(
            run(&iso(2), 2.5, &w, &[], &RunOptions::summary_only(), &mut rng)
                .unwrap()
                .summary
                .total_surface,
        );
    }
    let (ma, mb) = (aggregate(&a, None), aggregate(&b, None));
    let z = (ma.estimate - mb.estimate) / (ma.std_error.powi(2) + mb.std_error.powi(2)).sqrt();
    assert!(z.abs() < 3.0, "z = {z}");
    assert!((ma.estimate - 10.0).abs() < 3.0 * ma.std_error);
}

/// Length of the segment `ab` inside the axis-parallel box `[lo, hi]²`.
fn clipped_length(a: Point<f64>, b: Point<f64>, lo: f64, hi: f64) -> f64 {
    let (mut s0, mut s1) = (0.0f64, 1.0f64);
    for i in 0..2 {
        let (p, d) = (a.coords[i], b.coords[i] - a.coords[i]);
        if d == 0.0 {
            if p < lo || p > hi {
                return 0.0;
            }
            continue;
        }
        let (u, v) = ((lo - p) / d, (hi - p) / d);
        s0 = s0.max(u.min(v));
        s1 = s1.min(u.max(v));
    }
    (s1 - s0).max(0.0) * a.distance(&b)
}

#[test]
fn law_is_consistent_in_the_window() {
    // surface in V = [0.5, 1.5]² from runs in W = [0, 2]² against runs in V
    let n = 1500;
    let opts = RunOptions::default();
    let big = runs(&iso(2), 3.0, &square(2.0), n, 8, &opts);
    let inner: Vec<f64> = big
        .iter()
        .map(|y| {
            y.i_facets
                .iter()
                .map(|f| clipped_length(f.facet.vertices[0], f.facet.vertices[1], 0.5, 1.5))
                .sum()
        })
        .collect();
    let v = Window::polytope(ConvexPolytope::cuboid(&[0.5, 0.5], &[1.5, 1.5]).unwrap());
    let direct: Vec<f64> = runs(&iso(2), 3.0, &v, n, 9, &RunOptions::summary_only())
        .iter()
        .map(|y| y.summary.total_surface)
        .collect();
    let (a, b) = (aggregate(&inner, None), aggregate(&direct, None));
    assert!(
        (a.estimate - b.estimate).abs() < 3.0 * (a.std_error.powi(2) + b.std_error.powi(2)).sqrt()
    );
    let (va, vb) = (
        variance_estimate(&inner, None),
        variance_estimate(&direct, None),
    );
    assert!(
        (va.estimate - vb.estimate).abs()
            < 3.0 * (va.std_error.powi(2) + vb.std_error.powi(2)).sqrt()
    );
}

#[test]
fn first_split_direction_follows_the_hitting_law() {
    // in the unit square the normal angle θ ∈ [0, π) has density ∝ |cos θ| + |sin θ|
    let bins = 8;
    let mut obs = vec![0.0; bins];
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let w = square(1.0);
    let mut n = 0.0;
    while n < 8000.0 {
        let y = run(&iso(2), 0.5, &w, &[], &RunOptions::default(), &mut rng).unwrap();
        let Some(first) = y
            .i_facets
            .iter()
            .min_by(|a, b| a.birth_time.partial_cmp(&b.birth_time).unwrap())
        else {
            continue;
        };
        let nrm = first.facet.carrier.normal;
        let th = nrm.y().atan2(nrm.x()).rem_euclid(PI);
        obs[((th / PI * bins as f64) as usize).min(bins - 1)] += 1.0;
        n += 1.0;
    }
    // ∫ (|cos| + |sin|) over each bin via its antiderivative
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
            n * (prim(b) - prim(a)) / 4.0
        })
        .collect();
    assert!((exp.iter().sum::<f64>() - n).abs() < 1e-9 * n);
    let (_, p) = stitlab::stats::chi_square_test(&obs, &exp);
    assert!(p > 0.01, "p = {p}, {obs:?} vs {exp:?}");
}

#[test]
fn planar_vertices_are_interior_segment_endpoints() {
    let eps = 1e-9;
    for y in runs(&iso(2), 4.0, &square(2.0), 10, 11, &RunOptions::default()) {
        let n = y
            .i_facets
            .iter()
            .flat_map(|f| f.facet.vertices.iter())
            .filter(|v| y.window.depth(v) > eps)
            .count() as u64;
        assert_eq!(n, y.summary.interior_vertex_count);
    }
}
