use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stitlab::estimators::{eroded_volume, k_function_estimate, pcf_from_k};
use stitlab::geometry::{ConvexPolytope, FacetPolygon, Hyperplane, Point, Window};
use stitlab::measures::HyperplaneMeasureSpec;
use stitlab::mnw::{run, RunOptions};
use stitlab::stats::aggregate;

fn square(side: f64) -> Window<f64> {
    Window::polytope(ConvexPolytope::cuboid(&[0.0, 0.0], &[side, side]).unwrap())
}

fn facets(y: &stitlab::mnw::Tessellation<f64>) -> Vec<FacetPolygon<f64>> {
    y.i_facets.iter().map(|f| f.facet.clone()).collect()
}

#[test]
fn single_line_is_exact() {
    // a horizontal line through [0, 10]²: every inner point sees length 2r;
    // elements of size 0.025 tile the inner part [1, 9] exactly
    let w = square(10.0);
    let f = FacetPolygon {
        vertices: vec![Point::new(0.0, 4.0, 0.0), Point::new(10.0, 4.0, 0.0)],
        carrier: Hyperplane::new(Point::new(0.0, 1.0, 0.0), 4.0).unwrap(),
        area: 10.0,
    };
    let (t, delta) = (1.5, 1.0);
    let k = k_function_estimate(&[f], &w, t, &[0.3, 0.5, 1.0], delta, 0.025).unwrap();
    let area = eroded_volume(&w, delta).unwrap();
    for (r, v) in k {
        let exact = 8.0 * 2.0 * r / (t * t * area);
        assert!((v - exact).abs() < 1e-9 * exact, "r = {r}: {v} vs {exact}");
    }
}

#[test]
fn single_plane_counts_disk_areas() {
    let w = Window::polytope(ConvexPolytope::cuboid(&[0.0; 3], &[4.0; 3]).unwrap());
    let f = FacetPolygon {
        vertices: vec![
            Point::new(0.0, 0.0, 2.0),
            Point::new(4.0, 0.0, 2.0),
            Point::new(4.0, 4.0, 2.0),
            Point::new(0.0, 4.0, 2.0),
        ],
        carrier: Hyperplane::new(Point::new(0.0, 0.0, 1.0), 2.0).unwrap(),
        area: 16.0,
    };
    let delta = 1.0;
    let r = 0.8;
    let k = k_function_estimate(&[f], &w, 1.0, &[r], delta, r / 10.0).unwrap();
    let exact = 4.0 * PI * r * r / eroded_volume(&w, delta).unwrap();
    assert!(
        (k[0].1 - exact).abs() < 0.03 * exact,
        "{} vs {exact}",
        k[0].1
    );
}

#[test]
fn refinement_does_not_move_the_estimate() {
    let w = square(6.0);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let grid = [0.25, 0.5, 1.0];
    for _ in 0..5 {
        let y = run(
            &HyperplaneMeasureSpec::isotropic(2),
            2.0,
            &w,
            &[],
            &RunOptions::default(),
            &mut rng,
        )
        .unwrap();
        let f = facets(&y);
        let a = k_function_estimate(&f, &w, 2.0, &grid, 1.0, 0.025).unwrap();
        let b = k_function_estimate(&f, &w, 2.0, &grid, 1.0, 0.0125).unwrap();
        for (x, z) in a.iter().zip(&b) {
            assert!((x.1 - z.1).abs() <= 0.01 * x.1.max(1e-3), "{x:?} vs {z:?}");
        }
    }
}

#[test]
fn estimator_rejects_bad_input() {
    let w = square(4.0);
    assert!(k_function_estimate(&[], &w, 1.0, &[0.5, 0.2], 1.0, 0.01).is_err());
    assert!(k_function_estimate(&[], &w, 1.0, &[0.5], 0.4, 0.01).is_err());
    assert!(k_function_estimate(&[], &w, 1.0, &[0.5], 1.0, 0.2).is_err());
    assert!(k_function_estimate(&[], &w, 1.0, &[0.5], 2.5, 0.01).is_err());
}

#[test]
fn poisson_points_on_the_line() {
    // with the self term, E K̂(r) = 1/t + 2r for a Poisson process of rate t
    let w = Window::polytope(ConvexPolytope::interval(0.0, 20.0).unwrap());
    let t = 1.5;
    let grid = [0.5, 1.0, 2.0];
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut vals = vec![Vec::new(); grid.len()];
    for _ in 0..600 {
        let y = run(
            &HyperplaneMeasureSpec::isotropic(1),
            t,
            &w,
            &[],
            &RunOptions::default(),
            &mut rng,
        )
        .unwrap();
        let k = k_function_estimate(&facets(&y), &w, t, &grid, 2.0, 0.05).unwrap();
        for (i, (_, v)) in k.into_iter().enumerate() {
            vals[i].push(v);
        }
    }
    for (r, v) in grid.iter().zip(&vals) {
        let m = aggregate(v, Some(1.0 / t + 2.0 * r));
        assert!(m.z.unwrap().abs() < 3.5, "r = {r}: {m:?}");
    }
}

#[test]
fn pair_correlation_of_a_poisson_curve_is_one() {
    for d in 1..=3 {
        let kd = [2.0, PI, 4.0 * PI / 3.0][d - 1];
        let k: Vec<(f64, f64)> = [0.1, 0.4, 0.7, 1.3]
            .iter()
            .map(|r: &f64| (*r, kd * r.powi(d as i32)))
            .collect();
        for (_, g) in pcf_from_k(d, &k) {
            assert!((g - 1.0).abs() < 1e-12);
        }
    }
}
