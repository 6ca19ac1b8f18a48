//! Acceptance suite. Runs every criterion in order, prints one line per
//! criterion and exits nonzero if any fails.

use std::f64::consts::PI;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use teichretract::chart::{Chart, FnPoint, SurfaceType};
use teichretract::cli::RunConfig;
use teichretract::experiments::{
    continuity_demo, cover_check, random_thick_point, random_thin_point, ContinuityConfig,
};
use teichretract::flow::{flow, retract, FlowConfig};
use teichretract::gradient::{gram_matrix, vector_field, FieldMode, MetricModel};
use teichretract::holonomy::build_holonomy;
use teichretract::mat2::{length_to_trace, Mat2};
use teichretract::mcg::{apply, equivariance_check, symmetric_locus_check, MappingClass};
use teichretract::systole::{short_set, systole, EnumerationConfig};
use teichretract::word::{CurveClass, Word};

const EPS: f64 = 0.05;
const TYPES: [(u32, u32); 4] = [(1, 1), (0, 4), (1, 2), (2, 0)];

fn chart(g: u32, n: u32) -> Arc<Chart> {
    Arc::new(Chart::standard(SurfaceType::new(g, n).unwrap()).unwrap())
}

fn word(s: &str) -> Word {
    s.parse().unwrap()
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// Holonomy oracle on the once-punctured torus.
fn criterion_1() -> Outcome {
    // Oracle first: tr[A,B] = x² + y² + z² − xyz − 2 for arbitrary SL(2,ℝ)
    // matrices, so a cusp commutator is the same statement as the Fricke identity.
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut oracle_residual: f64 = 0.0;
    for _ in 0..100 {
        let mut sl2 = || {
            let (a, b, c) = (
                rng.random_range(0.5..2.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
            );
            Mat2::new(a, b, c, (1.0 + b * c) / a)
        };
        let (a, b) = (sl2(), sl2());
        let (x, y, z) = (a.trace(), b.trace(), (a * b).trace());
        let comm = (a * b * a.inv() * b.inv()).trace();
        oracle_residual =
            oracle_residual.max((comm - (x * x + y * y + z * z - x * y * z - 2.0)).abs());
    }

    let c = chart(1, 1);
    let (mut fricke, mut cusp, mut pants): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..100 {
        let l = rng.random_range(0.05..5.0);
        let t = rng.random_range(-2.0 * l..2.0 * l);
        let h = build_holonomy(&FnPoint::new(c.clone(), vec![l], vec![t]).unwrap()).unwrap();
        let (x, y, z) = (
            h.trace(&word("a")),
            h.trace(&word("b")),
            h.trace(&word("ab")),
        );
        let sum = x * x + y * y + z * z;
        fricke = fricke.max((sum - x * y * z).abs() / sum.max((x * y * z).abs()));
        cusp = cusp.max((h.trace(&word("abAB")) + 2.0).abs());
        pants = pants.max((h.trace(h.pants_word(0)).abs() - length_to_trace(l)).abs());
    }
    outcome(
        oracle_residual < 1e-10 && fricke < 1e-10 && cusp <= 1e-9 && pants <= 1e-9,
        format!(
            "oracle {oracle_residual:.1e}, Fricke (relative) {fricke:.1e}, cusp {cusp:.1e}, pants trace {pants:.1e}"
        ),
    )
}

/// Solve residual and the defining derivative, checked on matrix-computed lengths.
fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let (mut residual, mut deriv): (f64, f64) = (0.0, 0.0);
    let mut points = 0;
    for (g, n) in [(1, 1), (1, 2)] {
        let c = chart(g, n);
        for _ in 0..100 {
            let x = random_thin_point(&c, EPS, &mut rng).unwrap();
            let f = vector_field(
                &x,
                EPS,
                FieldMode::Blended,
                &MetricModel::MODEL_WP,
                &Default::default(),
            )
            .unwrap();
            residual = residual.max(f.residual);
            let s = 1e-5;
            let shifted = |sign: f64| {
                let y: Vec<f64> = x
                    .coords()
                    .iter()
                    .zip(f.v.coords())
                    .map(|(a, v)| a + sign * s * v)
                    .collect();
                build_holonomy(&x.with_coords(&y).unwrap()).unwrap()
            };
            let (hp, hm) = (shifted(1.0), shifted(-1.0));
            for (e, want) in f.short_set.entries.iter().zip(f.expected_derivatives()) {
                let w = hp.pants_word(e.class.pants_index().unwrap()).clone();
                let fd = (hp.word_length(&w).unwrap() - hm.word_length(&w).unwrap()) / (2.0 * s);
                deriv = deriv.max((fd - want).abs());
            }
            points += 1;
        }
    }
    outcome(
        residual <= 1e-9 && deriv <= 1e-6,
        format!("{points} points, max residual {residual:.1e}, max |Vℓ − φ(Λ)r| {deriv:.1e}"),
    )
}

fn unit_speed_starts() -> Vec<FnPoint> {
    vec![
        FnPoint::new(chart(1, 1), vec![0.02], vec![0.3]).unwrap(),
        FnPoint::new(chart(1, 1), vec![0.02], vec![-4.0]).unwrap(),
        FnPoint::new(chart(0, 4), vec![0.02], vec![0.01]).unwrap(),
        FnPoint::new(chart(1, 2), vec![0.02, 0.8], vec![0.0, 0.2]).unwrap(),
        FnPoint::new(chart(1, 2), vec![0.5, 0.02], vec![1.0, -0.01]).unwrap(),
        FnPoint::new(chart(2, 0), vec![0.02, 0.7, 1.1], vec![0.0, 0.3, -0.2]).unwrap(),
    ]
}

/// Unit speed below 2ε.
fn criterion_3() -> Outcome {
    let cfg = FlowConfig::new(EPS);
    let (mut rate_err, mut track_err, mut fd_err): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for x in unit_speed_starts() {
        let traj = flow(&x, &cfg).unwrap();
        let l0 = traj.start().systole;
        for s in traj.samples.iter().filter(|s| s.systole <= 2.0 * EPS) {
            rate_err = rate_err.max((s.dsystole_dt - 1.0).abs());
            track_err = track_err.max((s.systole - (l0 + s.t)).abs());
        }
        // Rate measured from the recorded samples alone.
        for w in traj.samples.windows(2) {
            if w[1].systole <= 2.0 * EPS {
                let fd = (w[1].systole - w[0].systole) / (w[1].t - w[0].t);
                fd_err = fd_err.max((fd - 1.0).abs());
            }
        }
    }
    outcome(
        rate_err <= 1e-3 && fd_err <= 1e-3 && track_err <= 1e-3,
        format!("max |dΛ/dt − 1| {rate_err:.1e} (field), {fd_err:.1e} (samples); max |Λ − Λ0 − t| {track_err:.1e}"),
    )
}

/// Retraction onto T(ε), monotonicity, and fixed points in T(3ε).
fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let cfg = FlowConfig::new(EPS);
    let mut min_end = f64::INFINITY;
    let mut max_drop: f64 = 0.0;
    let mut flows = 0;
    let mut fixed_ok = true;
    for (g, n) in TYPES {
        let c = chart(g, n);
        for _ in 0..50 {
            let x = random_thin_point(&c, EPS, &mut rng).unwrap();
            let traj = flow(&x, &cfg).unwrap();
            for w in traj.samples.windows(2) {
                max_drop = max_drop.max(w[0].systole - w[1].systole);
            }
            let end = &traj.end().point;
            min_end = min_end.min(systole(end, &Default::default()).unwrap().value);
            flows += 1;
        }
        for _ in 0..10 {
            let x = random_thick_point(&c, EPS, &mut rng).unwrap();
            fixed_ok &= retract(&x, EPS, &cfg).unwrap() == x;
            fixed_ok &= flow(&x, &cfg).unwrap().samples.iter().all(|s| s.point == x);
        }
    }
    outcome(
        min_end >= EPS - 1e-6 && max_drop <= 1e-6 && fixed_ok,
        format!(
            "{flows} flows, min endpoint Λ {min_end:.6}, max Λ drop {max_drop:.1e}, thick starts fixed: {fixed_ok}"
        ),
    )
}

/// Tied pants curves on the two-holed torus.
fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    let cfg = FlowConfig::new(EPS);
    let c = chart(1, 2);
    let (mut gap, mut rate_err): (f64, f64) = (0.0, 0.0);
    for _ in 0..5 {
        let tw = vec![rng.random_range(-0.01..0.01), rng.random_range(-0.01..0.01)];
        let x = FnPoint::new(c.clone(), vec![0.02, 0.02], tw).unwrap();
        let traj = flow(&x, &cfg).unwrap();
        for s in &traj.samples {
            gap = gap.max((s.point.lengths[0] - s.point.lengths[1]).abs());
        }
        for w in traj.samples.windows(2) {
            let dt = w[1].t - w[0].t;
            for i in 0..2 {
                let r = (w[1].point.lengths[i] - w[0].point.lengths[i]) / dt;
                rate_err = rate_err.max((r - 1.0).abs());
            }
        }
    }
    outcome(
        gap <= 1e-6 && rate_err <= 1e-3,
        format!("max |ℓ₁ − ℓ₂| {gap:.1e}, max |dℓ/dt − 1| {rate_err:.1e}"),
    )
}

/// Flow commutes with Dehn twists; Λ is twist invariant.
fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    let cfg = FlowConfig::new(EPS);
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    let mut all_pass = true;
    for k in 0..20 {
        let (g, n) = TYPES[k % 4];
        let c = chart(g, n);
        let x = if k == 0 {
            FnPoint::new(c.clone(), vec![0.02], vec![0.1]).unwrap()
        } else {
            random_thin_point(&c, EPS, &mut rng).unwrap()
        };
        let curve = rng.random_range(0..c.curve_count());
        let count = [-2, -1, 1, 2][rng.random_range(0..4)];
        let r = equivariance_check(&MappingClass::twist(curve, count), &x, &cfg).unwrap();
        worst = worst.max(r.discrepancy);
        all_pass &= r.pass && r.systole_invariant;
        cases += 1;
    }
    outcome(
        all_pass && worst <= 1e-6,
        format!(
            "{cases} cases, max discrepancy {worst:.1e}, systole exactly invariant: {all_pass}"
        ),
    )
}

/// Naive field jumps across ℓ = 3ε; blended field is Lipschitz.
fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(107);
    let r = continuity_demo(
        &chart(1, 2),
        EPS,
        &MetricModel::MODEL_WP,
        &Default::default(),
        &ContinuityConfig::default(),
        &mut rng,
    )
    .unwrap();
    outcome(
        r.pass && r.test_pairs == 1000 && (r.separation - 2e-4).abs() < 1e-12,
        format!(
            "naive jump {:.4} vs 0.1·max {:.4}; blended Δ {:.2e} ≤ K·2e-4 = {:.2e} (K = {:.2}); {} violations in {} pairs",
            r.naive_jump,
            0.1 * r.naive_max_norm,
            r.blended_delta,
            r.blended_bound,
            r.lipschitz_k,
            r.violations,
            r.test_pairs
        ),
    )
}

/// Twist `τ` in `[lo, hi]` where `f(τ) = 0`, by bisection.
fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let flo = f(lo);
    assert!(flo * f(hi) <= 0.0, "no sign change");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) < 0.0) == (flo < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn torus_length(l: f64, t: f64, w: &str) -> f64 {
    let h = build_holonomy(&FnPoint::new(chart(1, 1), vec![l], vec![t]).unwrap()).unwrap();
    h.word_length(&word(w)).unwrap()
}

/// Twist of the shortest `b` curve at length `l`, by golden-section search.
fn twist_of_min_b(l: f64) -> f64 {
    let (mut a, mut b) = (-l, l);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..200 {
        let (c, d) = (b - g * (b - a), a + g * (b - a));
        if torus_length(l, c, "b") < torus_length(l, d, "b") {
            b = d;
        } else {
            a = c;
        }
    }
    0.5 * (a + b)
}

/// Length-equality loci of the once-punctured torus are preserved.
fn criterion_8() -> Outcome {
    let cfg = FlowConfig::new(EPS);
    let cls = |s: &str| CurveClass::parse(s).unwrap();
    let mut details = vec![];
    let mut pass = true;

    // Square family: ℓ_a = ℓ_b.
    let l = 2.2;
    let t0 = twist_of_min_b(l);
    let t = bisect(t0, t0 + l, |t| torus_length(l, t, "b") - l);
    let x = FnPoint::new(chart(1, 1), vec![l], vec![t]).unwrap();
    let r = symmetric_locus_check(&x, &[(cls("p0"), cls("b"))], &cfg).unwrap();
    pass &= r.pass;
    details.push(format!("square gap {:.1e}", r.relations[0].max_gap));

    // Hexagonal point: all three traces equal 3.
    let l = 2.0 * 1.5f64.acosh();
    let t0 = twist_of_min_b(l);
    let candidates = [
        bisect(t0, t0 + l, |t| torus_length(l, t, "b") - l),
        bisect(t0 - l, t0, |t| torus_length(l, t, "b") - l),
    ];
    let mut found = false;
    for t in candidates {
        for third in ["ab", "aB"] {
            if found || (torus_length(l, t, third) - l).abs() > 1e-9 {
                continue;
            }
            found = true;
            let x = FnPoint::new(chart(1, 1), vec![l], vec![t]).unwrap();
            let r =
                symmetric_locus_check(&x, &[(cls("p0"), cls("b")), (cls("p0"), cls(third))], &cfg)
                    .unwrap();
            pass &= r.pass;
            let gap = r.relations.iter().map(|g| g.max_gap).fold(0.0, f64::max);
            details.push(format!(
                "hexagonal gap {gap:.1e} (stationary: {})",
                r.stationary
            ));
        }
    }
    pass &= found;
    if !found {
        details.push("hexagonal point not found".into());
    }
    outcome(pass, details.join(", "))
}

/// Model metric: scaled root-length Gram is the identity.
fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(109);
    let (mut root_err, mut diag_err): (f64, f64) = (0.0, 0.0);
    // ⟨grad ℓ^{1/2}, grad ℓ^{1/2}⟩ = 1/(2π) at leading order.
    let leading = 1.0 / (2.0 * PI);
    for (g, n) in TYPES {
        let c = chart(g, n);
        for _ in 0..25 {
            let x = random_thin_point(&c, EPS, &mut rng).unwrap();
            let s = short_set(&x, 3.0 * EPS, &EnumerationConfig::default()).unwrap();
            let gm = gram_matrix(&x, &s, &MetricModel::MODEL_WP).unwrap();
            let ls: Vec<f64> = s.entries.iter().map(|e| e.length).collect();
            for i in 0..ls.len() {
                for j in 0..ls.len() {
                    let root = gm[i][j] / (4.0 * (ls[i] * ls[j]).sqrt());
                    let want = if i == j { 1.0 } else { 0.0 };
                    root_err = root_err.max((root / leading - want).abs());
                    let plain = if i == j { 2.0 * ls[i] / PI } else { 0.0 };
                    diag_err = diag_err.max((gm[i][j] - plain).abs());
                }
            }
        }
    }
    outcome(
        root_err <= 1e-12 && diag_err <= 1e-15,
        format!("max |2π·root Gram − I| {root_err:.1e}, max |G − diag(2ℓ/π)| {diag_err:.1e}"),
    )
}

/// Thick samples of the once-punctured torus fall in the configured Bers boxes.
fn criterion_10() -> Outcome {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/cover_check.json");
    let cfg = RunConfig::load(&path).unwrap();
    let cover = cfg.cover.clone().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let r = cover_check(
        &cfg.chart().unwrap(),
        cfg.eps,
        &cfg.enumeration,
        &cover,
        &mut rng,
    )
    .unwrap();
    let min_systole = r
        .samples
        .iter()
        .map(|s| s.systole)
        .fold(f64::INFINITY, f64::min);
    outcome(
        r.pass && r.samples.len() == 200 && min_systole >= cfg.eps,
        format!(
            "{} samples in {} draws, {} boxes, {} uncovered",
            r.samples.len(),
            r.draws,
            r.boxes.len(),
            r.uncovered
        ),
    )
}

fn main() {
    // Extra guard against twists breaking the systole computation.
    let x = FnPoint::new(chart(1, 1), vec![0.02], vec![0.1]).unwrap();
    assert_eq!(
        systole(
            &apply(&MappingClass::twist(0, 3), &x).unwrap(),
            &Default::default()
        )
        .unwrap()
        .value,
        0.02
    );

    let criteria: [(u32, &str, Duration, fn() -> Outcome); 10] = [
        (1, "holonomy oracle", Duration::from_secs(10), criterion_1),
        (
            2,
            "kappa system contract",
            Duration::from_secs(30),
            criterion_2,
        ),
        (3, "unit speed", Duration::from_secs(30), criterion_3),
        (4, "retraction", Duration::from_secs(120), criterion_4),
        (5, "tie compatibility", Duration::from_secs(30), criterion_5),
        (6, "equivariance", Duration::from_secs(60), criterion_6),
        (
            7,
            "discontinuity of the naive field",
            Duration::from_secs(60),
            criterion_7,
        ),
        (
            8,
            "fixed-locus preservation",
            Duration::from_secs(30),
            criterion_8,
        ),
        (
            9,
            "model-metric fidelity",
            Duration::from_secs(5),
            criterion_9,
        ),
        (
            10,
            "Bers-box coverage",
            Duration::from_secs(30),
            criterion_10,
        ),
    ];
    let mut failed = 0;
    for (n, name, limit, run) in criteria {
        let start = Instant::now();
        let o = run();
        let elapsed = start.elapsed();
        let pass = o.pass && elapsed <= limit;
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {n:2} {}: {name}: {} [{:.2}s of {}s]",
            if pass { "PASS" } else { "FAIL" },
            o.detail,
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
    }
    println!("acceptance: {} of 10 criteria passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
