//! Acceptance suite: ten checks covering the chart formulas, the
//! equilibrium atlas, the invariant rays, the basin structure, orbit
//! equivalence, Einstein directions, equator invariance, endpoint
//! asymptotics, and output determinism. Each check prints one PASS line
//! (visible with `cargo test --test acceptance -- --nocapture`).

use std::process::Command;

use flagflow_core::algebra::{rat, rat_int, Poly2, Var};
use flagflow_core::analysis::{invariant_rays, named_equilibria, Classification};
use flagflow_core::compactify::{compactified_field, Chart};
use flagflow_core::flow::{
    angle_from_gamma2, basin_sweep, integrate_compactified, integrate_raw, orbit_deviation,
    GridSpec, IntegrationConfig, Verdict,
};
use flagflow_core::models::{Family, FlagModel};
use flagflow_core::Rational;
use num_traits::{ToPrimitive, Zero};

fn model(family: Family, m: u32, k: u32) -> FlagModel {
    FlagModel::new(family, m, k, true).unwrap()
}

const TYPE_I_PARAMS: [(u32, u32); 5] = [(2, 2), (3, 2), (4, 3), (2, 0), (5, 5)];
const TYPE_II_PARAMS: [(u32, u32); 5] = [(1, 3), (2, 3), (3, 4), (2, 5), (5, 3)];

fn cfg() -> IntegrationConfig {
    IntegrationConfig::default()
}

#[test]
fn criterion_01_chart_formula_fidelity() {
    // U1 chart of the type I quadratic field, closed form:
    // with A, B the x'-coefficients and C, D the y'-coefficients of the
    // polynomial system, the chart field is
    //   z1' = (C - A) z1 + D z1^2 - B z1^3,   z2' = -A z2 - B z1^2 z2.
    for (m, k) in TYPE_I_PARAMS {
        let md = model(Family::TypeI, m, k);
        let n = (m + k) as i64;
        let (m, k) = (m as i64, k as i64);
        let a = rat(2 + 4 * k, 8 * n - 4);
        let b = rat(2 * m - 2, 2 * n - 1);
        let c = rat(2 - 2 * m, 8 * n - 4);
        let d = rat(n + k + m - 1, 2 * n - 1);
        let expect_z1 = Poly2::from_terms([
            (1, 0, &c - &a),
            (2, 0, d.clone()),
            (3, 0, -b.clone()),
        ]);
        let expect_z2 = Poly2::from_terms([(0, 1, -a.clone()), (2, 1, -b.clone())]);
        let got = compactified_field(&md.polynomial_field(), Chart::U1);
        assert_eq!(got.p1(), &expect_z1, "z1' mismatch at (m,k)=({m},{k})");
        assert_eq!(got.p2(), &expect_z2, "z2' mismatch at (m,k)=({m},{k})");
    }
    println!("criterion 01 PASS: U1 chart field matches the closed form exactly for 5 type I parameter sets");
}

#[test]
fn criterion_02_second_chart_variant_resolution() {
    // The correct U2 field's z1' on the equator vanishes exactly at
    // z1 = 2 and z1 = 2(m-1)/(m+2k). A commonly transcribed cubic
    // variant with coefficients
    //   [(-m-2k) z1 + (2k+2n+2m-2) z1^2 + (4-4m) z1^3] / (2(2n-1))
    // fails at both roots for (m,k) = (2,2); see README "Second-chart
    // coefficient note".
    for (m, k) in TYPE_I_PARAMS {
        let md = model(Family::TypeI, m, k);
        let u2 = compactified_field(&md.polynomial_field(), Chart::U2);
        let on_equator = u2.p1().restrict_y_zero();
        let q1 = rat_int(2);
        let q2 = rat(2 * (m as i64 - 1), m as i64 + 2 * k as i64);
        assert!(on_equator.eval(&q1).is_zero(), "q1 root fails at (m,k)=({m},{k})");
        assert!(on_equator.eval(&q2).is_zero(), "q2 root fails at (m,k)=({m},{k})");
    }

    let (m, k) = (2i64, 2i64);
    let n = m + k;
    let den = rat_int(2 * (2 * n - 1));
    let variant = |z1: &Rational| {
        (rat_int(-m - 2 * k) * z1
            + rat_int(2 * k + 2 * n + 2 * m - 2) * z1 * z1
            + rat_int(4 - 4 * m) * z1 * z1 * z1)
            / &den
    };
    let at_q1 = variant(&rat_int(2));
    let at_q2 = variant(&rat(2 * (m - 1), m + 2 * k));
    assert_eq!(at_q1, rat(6, 7));
    assert_eq!(at_q2, rat(-8, 189));
    println!("criterion 02 PASS: correct U2 roots verified for 5 parameter sets; the transcribed cubic variant misses both roots for (2,2)");
}

#[test]
fn criterion_03_invariant_ray_slopes() {
    let check = |family: Family, params: &[(u32, u32)], s1_of: &dyn Fn(i64, i64) -> Rational| {
        for &(m, k) in params {
            let md = model(family, m, k);
            let rays = invariant_rays(&md.polynomial_field());
            assert_eq!(rays.len(), 3, "(m,k)=({m},{k})");
            // Increasing angle: axis, gamma2 (slope 2), gamma1.
            assert!(rays[0].slope.is_none(), "x-axis ray missing");
            assert!((rays[0].a - 1.0).abs() < 1e-15 && rays[0].b.abs() < 1e-15);
            let slope_f = |r: &flagflow_core::analysis::RayDirection| r.a / r.b;
            assert!((slope_f(&rays[1]) - 2.0).abs() <= 1e-12);
            let s1 = s1_of(m as i64, k as i64);
            let s1f = s1.to_f64().unwrap();
            assert!(
                (slope_f(&rays[2]) - s1f).abs() <= 1e-12,
                "gamma1 slope at (m,k)=({m},{k})"
            );
        }
    };
    check(Family::TypeI, &TYPE_I_PARAMS, &|m, k| rat(2 * (m - 1), m + 2 * k));
    check(Family::TypeII, &TYPE_II_PARAMS, &|m, k| {
        rat(4 * (m + 1), 4 * k + 2 * m + 1)
    });
    println!("criterion 03 PASS: ray slopes match the closed forms to 1e-12 for 5 parameter sets per family, plus the x-axis ray");
}

fn assert_pair_close(got: [f64; 2], want: [f64; 2], tol: f64, what: &str) {
    let mut g = got;
    let mut w = want;
    g.sort_by(f64::total_cmp);
    w.sort_by(f64::total_cmp);
    for i in 0..2 {
        assert!((g[i] - w[i]).abs() <= tol, "{what}: {g:?} vs {w:?}");
    }
}

#[test]
fn criterion_04_equilibrium_atlas() {
    let md = model(Family::TypeI, 2, 2);
    let named = named_equilibria(&md).unwrap();
    let [p1, p2, p3] = named.all();
    assert!((p3.z1 - 0.0).abs() <= 1e-12);
    assert!((p2.z1 - 0.5).abs() <= 1e-12);
    assert!((p1.z1 - 3.0).abs() <= 1e-12);
    let eig = |e: &flagflow_core::analysis::Equilibrium| {
        [e.eigenvalues[0].re, e.eigenvalues[1].re]
    };
    assert_pair_close(eig(p3), [-3.0 / 7.0, -5.0 / 14.0], 1e-12, "p3 eigenvalues");
    assert_pair_close(eig(p2), [5.0 / 14.0, -3.0 / 7.0], 1e-12, "p2 eigenvalues");
    assert_pair_close(eig(p1), [-15.0 / 7.0, -41.0 / 14.0], 1e-12, "p1 eigenvalues");
    assert_eq!(p3.classification, Classification::StableNode);
    assert_eq!(p2.classification, Classification::Saddle);
    assert_eq!(p1.classification, Classification::StableNode);
    // p1 sphere point: (2(m-1), m+2k, 0) normalized = (2, 6, 0)/sqrt(40).
    let norm = 40.0f64.sqrt();
    assert!((p1.sphere.y1 - 2.0 / norm).abs() <= 1e-12);
    assert!((p1.sphere.y2 - 6.0 / norm).abs() <= 1e-12);
    assert!(p1.sphere.y3.abs() <= 1e-12);

    let md2 = model(Family::TypeII, 1, 3);
    let named2 = named_equilibria(&md2).unwrap();
    let [q1, q2, q3] = named2.all();
    assert!((q1.disc.u - 8.0 / 17.0).abs() <= 1e-12);
    assert!((q1.disc.v - 15.0 / 17.0).abs() <= 1e-12);
    assert!((q2.disc.u - 2.0 / 5.0f64.sqrt()).abs() <= 1e-12);
    assert!((q2.disc.v - 1.0 / 5.0f64.sqrt()).abs() <= 1e-12);
    assert!((q3.disc.u - 1.0).abs() <= 1e-12);
    assert!(q3.disc.v.abs() <= 1e-12);
    println!("criterion 04 PASS: equilibrium coordinates, eigenvalues, and classes match the closed forms to 1e-12");
}

#[test]
fn criterion_05_basin_structure() {
    let params: [(Family, u32, u32); 6] = [
        (Family::TypeI, 2, 2),
        (Family::TypeI, 3, 2),
        (Family::TypeI, 4, 3),
        (Family::TypeII, 1, 3),
        (Family::TypeII, 2, 3),
        (Family::TypeII, 3, 4),
    ];
    let spec = GridSpec { x_min: 0.05, x_max: 5.0, y_min: 0.05, y_max: 5.0, nx: 10, ny: 10 };
    for (family, m, k) in params {
        let md = model(family, m, k);
        let grid = basin_sweep(&md, &spec, &cfg()).unwrap();
        for cell in &grid.cells {
            let c = cell.as_ref().unwrap();
            if angle_from_gamma2(&md, c.x, c.y) > 1e-3 {
                assert!(
                    c.consistent,
                    "inconsistent cell ({}, {}) for family {family:?} ({m},{k})",
                    c.x, c.y
                );
            }
        }
        // Seeds exactly on the rays: integer coordinates realizing the
        // exact rational slopes.
        let (s1, s2) = md.invariant_ray_slopes();
        for (slope, target) in [(s1, "p1"), (s2, "p2")] {
            let x0 = slope.numer().to_f64().unwrap();
            let y0 = slope.denom().to_f64().unwrap();
            let traj = integrate_compactified(&md, x0, y0, &cfg()).unwrap();
            assert_eq!(
                traj.omega.verdict,
                Verdict::Converged(target.into()),
                "ray seed ({x0}, {y0}) for family {family:?} ({m},{k})"
            );
            assert!(traj.omega.final_distance <= 1e-6);
        }
    }
    println!("criterion 05 PASS: 10x10 basin grids consistent away from the separatrix for 3 parameter sets per family; ray seeds land on p1/p2 within 1e-6");
}

#[test]
fn criterion_06_orbit_equivalence() {
    let seeds: [(f64, f64); 10] = [
        (0.3, 1.5),
        (0.7, 1.2),
        (1.0, 1.0),
        (1.5, 1.0),
        (2.5, 1.0),
        (4.0, 1.0),
        (0.5, 2.0),
        (1.2, 0.9),
        (3.0, 2.0),
        (0.8, 0.5),
    ];
    // Tight capture so the compactified polyline reaches closer to the
    // equator than any raw sample does.
    let comp_cfg = IntegrationConfig { capture_radius: 1e-9, ..cfg() };
    for md in [model(Family::TypeI, 2, 2), model(Family::TypeII, 1, 3)] {
        for (x0, y0) in seeds {
            let raw = integrate_raw(&md, x0, y0, &cfg()).unwrap();
            let comp = integrate_compactified(&md, x0, y0, &comp_cfg).unwrap();
            let dev = orbit_deviation(&raw, &comp).unwrap();
            assert!(
                dev <= 1e-6,
                "deviation {dev} at seed ({x0}, {y0}) for {:?}",
                md.family()
            );
        }
    }
    println!("criterion 06 PASS: raw and compactified orbits agree within 1e-6 disc distance for 10 seeds per family");
}

#[test]
fn criterion_07_einstein_rays() {
    for (family, params) in [
        (Family::TypeI, &TYPE_I_PARAMS),
        (Family::TypeII, &TYPE_II_PARAMS),
    ] {
        for &(m, k) in params {
            let md = model(family, m, k);
            let dirs = md.einstein_directions(4000);
            assert_eq!(dirs.len(), 2, "(m,k)=({m},{k})");
            let rays = invariant_rays(&md.polynomial_field());
            let interior: Vec<&flagflow_core::analysis::RayDirection> =
                rays.iter().filter(|r| r.b > 1e-15).collect();
            assert_eq!(interior.len(), 2);
            // Both lists are ordered by increasing angle.
            for (d, r) in dirs.iter().zip(interior) {
                assert!((d.0 - r.a).abs() <= 1e-10, "(m,k)=({m},{k})");
                assert!((d.1 - r.b).abs() <= 1e-10, "(m,k)=({m},{k})");
            }
        }
    }
    println!("criterion 07 PASS: exactly two Einstein directions per model, coinciding with the interior invariant rays to 1e-10");
}

#[test]
fn criterion_08_equator_invariance() {
    for (family, params) in [
        (Family::TypeI, &TYPE_I_PARAMS),
        (Family::TypeII, &TYPE_II_PARAMS),
    ] {
        for &(m, k) in params {
            let md = model(family, m, k);
            let vf = md.polynomial_field();
            for chart in [Chart::U1, Chart::U2] {
                let cf = compactified_field(&vf, chart);
                assert!(
                    cf.p2().div_exact_var(Var::Y).is_some(),
                    "z2 does not divide z2' in {chart} at (m,k)=({m},{k})"
                );
            }
        }
    }
    println!("criterion 08 PASS: z2 divides the z2' component exactly in U1 and U2 for all tested models");
}

#[test]
fn criterion_09_r3_asymptotics() {
    let md = model(Family::TypeI, 2, 2);
    for i in 0..10 {
        let x0 = 2.5 + 0.5 * i as f64;
        let traj = integrate_compactified(&md, x0, 1.0, &cfg()).unwrap();
        // y/x is readable as xy in U3 samples and as z1 in U1 samples.
        let min_ratio = traj
            .samples
            .iter()
            .filter_map(|s| match s.chart {
                Chart::U1 => Some(s.z.0),
                _ => s.xy.map(|(x, y)| y / x),
            })
            .fold(f64::INFINITY, f64::min);
        assert!(min_ratio < 1e-3, "y/x only reached {min_ratio} from x0={x0}");
        let end = traj.omega.final_disc;
        let dist = ((end.u - 1.0).powi(2) + end.v.powi(2)).sqrt();
        assert!(dist <= 1e-6, "endpoint distance {dist} from (1,0)");
        assert_eq!(traj.omega.verdict, Verdict::Converged("p3".into()));
    }
    println!("criterion 09 PASS: 10 R3 orbits reach y/x < 1e-3 and end within 1e-6 of (1,0); the diameter-collapse reading is reported, not asserted");
}

#[test]
fn criterion_10_determinism() {
    let bin = env!("CARGO_BIN_EXE_flagflow");
    let runs: [&[&str]; 3] = [
        &[
            "portrait", "--family", "I", "--m", "2", "--k", "2", "--stream-seeds", "8",
        ],
        &["equilibria", "--family", "I", "--m", "2", "--k", "2", "--json"],
        &[
            "basin", "--family", "I", "--m", "2", "--k", "2", "--grid", "4x4", "--xmax", "5",
            "--ymax", "5",
        ],
    ];
    for args in runs {
        let once = Command::new(bin).args(args).output().unwrap();
        assert!(once.status.success(), "{args:?}: {once:?}");
        let twice = Command::new(bin).args(args).output().unwrap();
        assert!(twice.status.success());
        assert_eq!(once.stdout, twice.stdout, "non-deterministic output for {args:?}");
        assert!(!once.stdout.is_empty());
    }
    println!("criterion 10 PASS: portrait, equilibria --json, and basin outputs are byte-identical across consecutive runs");
}
