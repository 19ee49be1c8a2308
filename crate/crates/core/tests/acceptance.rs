//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use djcm::dynamics::{
    amplitudes_analytic_trajectory, solve_sector_with, time_grid, AmplitudeState, InitialCondition, Method,
    MethodPreference, Trajectory,
};
use djcm::model::{sector_coefficients, DeformationKind, ModelParams, SectorCoefficients};
use djcm::observables::{
    g2_zero, husimi_q, mandel_q, reduced_density, squeezing_params, von_neumann_entropy, GridSpec, HusimiMode,
};
use djcm::spectrum::{cubic_roots_unchecked, theta_poly};

const ROWS: [(f64, f64, f64, f64); 3] = [
    (0.04, 0.04, 0.06, 0.0),
    (0.04, 0.06, 0.08, 0.2),
    (0.08, 0.06, 0.08, 0.2),
];

fn row(r: usize) -> ModelParams {
    let (omega_e, g1, g2, chi) = ROWS[r];
    ModelParams {
        omega_cavity: 0.2,
        omega_levels: [0.3, 0.4, 0.5],
        g1,
        g2,
        omega_e,
        deformation: if chi == 0.0 {
            DeformationKind::Identity
        } else {
            DeformationKind::Kerr { chi }
        },
        sector_n: 1,
    }
}

fn solve(p: &ModelParams, tau_max: f64, samples: usize, pref: MethodPreference) -> Trajectory {
    solve_sector_with(p, &InitialCondition::excited(), &time_grid(p, tau_max, samples), pref).expect("solve")
}

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn cross_method() -> Outcome {
    let start = Instant::now();
    let mut diffs = Vec::new();
    let mut methods_ok = true;
    for r in 0..3 {
        let p = row(r);
        let a = solve(&p, 50.0, 2000, MethodPreference::Auto);
        let o = solve(&p, 50.0, 2000, MethodPreference::ForceOracle);
        methods_ok &= a.method == Method::Analytic && o.method == Method::Oracle;
        let worst = a
            .samples
            .iter()
            .zip(&o.samples)
            .flat_map(|(x, y)| [(x.c1 - y.c1).norm(), (x.c2 - y.c2).norm(), (x.c3 - y.c3).norm()])
            .fold(0.0, f64::max);
        diffs.push(worst);
    }
    let elapsed = start.elapsed();
    let worst = diffs.iter().copied().fold(0.0, f64::max);
    outcome(
        methods_ok && worst <= 1e-6 && elapsed < Duration::from_secs(5),
        format!(
            "max |analytic - oracle| per row = [{}] (<= 1e-6), {:.2} s (< 5 s)",
            diffs.iter().map(|d| format!("{d:.3e}")).collect::<Vec<_>>().join(", "),
            elapsed.as_secs_f64()
        ),
    )
}

fn norm_conservation() -> Outcome {
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for r in 0..3 {
        for pref in [MethodPreference::Auto, MethodPreference::ForceOracle] {
            let t = solve(&row(r), 60.0, 2000, pref);
            let drift = t
                .samples
                .iter()
                .map(|s| (s.c1.norm_sqr() + s.c2.norm_sqr() + s.c3.norm_sqr() - 1.0).abs())
                .fold(0.0, f64::max);
            worst = worst.max(drift);
            parts.push(format!("row{} {:?} {drift:.2e}", r + 1, t.method));
        }
    }
    outcome(worst <= 1e-9, format!("max | |c|^2 - 1 | = {worst:.3e} (<= 1e-9) [{}]", parts.join(", ")))
}

fn spectral_structure() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let (mut re_ratio, mut vieta, mut residual) = (0.0f64, 0.0f64, 0.0f64);
    let mut tuples = 0;
    while tuples < 1000 {
        let mut w: [f64; 3] = [rng.gen(), rng.gen(), rng.gen()];
        w.sort_by(f64::total_cmp);
        let omega: f64 = rng.gen_range(0.0..1.0);
        if !(w[0] < w[1] && w[1] < w[2]) || omega <= 0.0 {
            continue;
        }
        let chi: f64 = rng.gen_range(0.0..=0.5);
        let p = ModelParams {
            omega_cavity: omega,
            omega_levels: w,
            g1: rng.gen_range(0.0..=0.2),
            g2: rng.gen_range(0.0..=0.2),
            omega_e: rng.gen_range(0.0..=0.2),
            deformation: DeformationKind::Kerr { chi },
            sector_n: rng.gen_range(0..=5),
        };
        tuples += 1;
        let poly = theta_poly(&sector_coefficients(&p), p.omega_e);
        let roots = cubic_roots_unchecked(&poly).expect("finite coefficients").roots;
        let scale = roots.iter().map(|r| r.norm()).fold(1.0, f64::max);
        for r in roots {
            re_ratio = re_ratio.max(r.re.abs() / r.im.abs().max(1.0));
            let theta = ((r + poly.a2) * r + poly.a1) * r + poly.a0;
            residual = residual.max(theta.norm() / scale);
        }
        let [a, b, c] = roots;
        let identities = [
            (a + b + c + poly.a2, a.norm() + b.norm() + c.norm() + poly.a2.norm()),
            (
                a * b + b * c + a * c - poly.a1,
                (a * b).norm() + (b * c).norm() + (a * c).norm() + poly.a1.norm(),
            ),
            (a * b * c + poly.a0, (a * b * c).norm() + poly.a0.norm()),
        ];
        for (diff, terms) in identities {
            vieta = vieta.max(diff.norm() / terms.max(1.0));
        }
    }
    let elapsed = start.elapsed();
    outcome(
        re_ratio <= 1e-10 && vieta <= 1e-12 && residual <= 1e-12 && elapsed < Duration::from_secs(2),
        format!(
            "{tuples} tuples: max |Re a|/max(1,|Im a|) = {re_ratio:.3e}, Vieta = {vieta:.3e}, |theta(a)|/scale = {residual:.3e}, {:.2} s",
            elapsed.as_secs_f64()
        ),
    )
}

fn rabi_limit() -> Outcome {
    // Omega_e = 0, h = s = 0: |2> and |3> each exchange with |1> at v2, v1.
    let omega = 0.2;
    let (v1, v2) = (0.05, 0.09);
    let c = SectorCoefficients::from_parts(0.0, 0.0, v1, v2, 1);
    let grid: Vec<f64> = (0..=4000).map(|k| k as f64 * 0.01 / omega).collect();
    let traj = amplitudes_analytic_trajectory(&c, 0.0, &InitialCondition::excited(), &grid).expect("distinct roots");
    let g = (v1 * v1 + v2 * v2).sqrt();
    let mut worst = 0.0f64;
    for s in &traj.samples {
        let hand = [
            C64::new(0.0, -(v2 / g) * (g * s.t).sin()),
            C64::new(1.0 - (v2 * v2 / (g * g)) * (1.0 - (g * s.t).cos()), 0.0),
            C64::new(-(v1 * v2 / (g * g)) * (1.0 - (g * s.t).cos()), 0.0),
        ];
        for (x, y) in s.amplitudes().iter().zip(hand) {
            worst = worst.max((x - y).norm());
        }
    }
    outcome(worst <= 1e-9, format!("max |analytic - hand solution| over tau in [0,40] = {worst:.3e} (<= 1e-9)"))
}

fn binary_entropy(p: f64) -> f64 {
    [p, 1.0 - p].iter().filter(|&&x| x > 0.0).map(|&x| -x * x.ln()).sum()
}

fn entropy_identity() -> Outcome {
    let mut worst = 0.0f64;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for r in 0..3 {
        for s in solve(&row(r), 50.0, 2000, MethodPreference::Auto).samples {
            let e = von_neumann_entropy(&reduced_density(&s));
            worst = worst.max((e - binary_entropy(s.c1.norm_sqr())).abs());
            lo = lo.min(e);
            hi = hi.max(e);
        }
    }
    let ln2 = std::f64::consts::LN_2;
    outcome(
        worst <= 1e-10 && lo >= 0.0 && hi <= ln2 + 1e-12,
        format!("max |S - H(P1)| = {worst:.3e} (<= 1e-10), S in [{lo:.3e}, {hi:.9}] (ln 2 = {ln2:.9})"),
    )
}

fn fock_statistics() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for r in [0, 2] {
        let p = row(r);
        let s = solve_sector_with(&p, &InitialCondition::excited(), &[0.0], MethodPreference::Auto).unwrap().samples[0];
        let g2 = g2_zero(&s, &p).expect("m1 > 0 for n = 1");
        let q = mandel_q(&s, &p).expect("m1 > 0 for n = 1");
        ok &= g2 == 0.0 && (q + 1.0).abs() <= 1e-12;
        parts.push(format!("chi={}: g2(0) = {g2}, Q = {q}", p.deformation.chi()));
    }
    outcome(ok, parts.join("; "))
}

fn trapezoid(x: &[f64], y: &[f64], v: &[Vec<f64>]) -> f64 {
    let w = |a: &[f64], k: usize| {
        let h = a[1] - a[0];
        if k == 0 || k == a.len() - 1 {
            h / 2.0
        } else {
            h
        }
    };
    let mut total = 0.0;
    for (iy, row) in v.iter().enumerate() {
        for (ix, q) in row.iter().enumerate() {
            total += q * w(x, ix) * w(y, iy);
        }
    }
    total
}

fn husimi_normalization() -> Outcome {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let spec = GridSpec::square(6.0, 241);
    let mut ok = true;
    let mut parts = Vec::new();
    let mut slowest = Duration::ZERO;
    for r in [0, 2] {
        let p = row(r);
        for tau in [0.0, 10.0, 25.0] {
            let start = Instant::now();
            let g = pool.install(|| husimi_q(&p, p.t_of_tau(tau), &spec, HusimiMode::SingleSector).unwrap());
            slowest = slowest.max(start.elapsed());
            let integral = trapezoid(&g.x_axis, &g.y_axis, &g.values);
            let min = g.values.iter().flatten().copied().fold(f64::INFINITY, f64::min);
            ok &= (integral - 1.0).abs() <= 0.01 && min >= 0.0;
            parts.push(format!("chi={} tau={tau}: {integral:.6}", p.deformation.chi()));
        }
    }
    ok &= slowest < Duration::from_secs(3);
    outcome(
        ok,
        format!("integrals [{}] (1 +- 0.01), slowest grid {:.3} s single-threaded", parts.join(", "), slowest.as_secs_f64()),
    )
}

/// `<psi| A^k |psi>` with `A` as a dense matrix on `|atom, m>`, `m <= n + 2`.
fn dense_lowering_moment(s: &AmplitudeState, n: u32, chi: f64, k: usize) -> C64 {
    let dim = n as usize + 3;
    let zero = C64::new(0.0, 0.0);
    let mut psi = vec![[zero; 3]; dim];
    psi[n as usize + 1][0] = s.c1;
    psi[n as usize][1] = s.c2;
    psi[n as usize][2] = s.c3;
    let mut v = psi.clone();
    for _ in 0..k {
        let mut next = vec![[zero; 3]; dim];
        for m in 1..dim {
            let mf = m as f64;
            let amp = mf.sqrt() * (1.0 + chi * mf * mf).sqrt();
            for a in 0..3 {
                next[m - 1][a] = v[m][a] * amp;
            }
        }
        v = next;
    }
    psi.iter()
        .zip(&v)
        .flat_map(|(x, y)| (0..3).map(move |a| x[a].conj() * y[a]))
        .sum()
}

fn moment_vanishing() -> Outcome {
    let mut anomalous = 0.0f64;
    let mut dense = 0.0f64;
    let mut asym = 0.0f64;
    for r in 0..3 {
        let p = row(r);
        let chi = p.deformation.chi();
        for s in solve(&p, 50.0, 2000, MethodPreference::Auto).samples {
            let q = squeezing_params(&s, &p);
            anomalous = q.anomalous.iter().map(|c| c.norm()).fold(anomalous, f64::max);
            for k in [1, 2, 4] {
                dense = dense.max(dense_lowering_moment(&s, p.sector_n, chi, k).norm());
            }
            asym = asym.max((q.s1_x - q.s1_p).abs()).max((q.s2_x - q.s2_p).abs());
        }
    }
    outcome(
        anomalous <= 1e-14 && dense <= 1e-14 && asym <= 1e-13,
        format!(
            "max |<A^k>| engine = {anomalous:.3e}, dense = {dense:.3e} (<= 1e-14); max |s_x - s_p| = {asym:.3e} (<= 1e-13)"
        ),
    )
}

fn read_column(path: &Path) -> Vec<f64> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect()
}

fn figure_shape() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_djcm"))
        .args(["figures", "fig2", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    if !status.status.success() {
        return outcome(false, format!("figures fig2 exited with {}", status.status));
    }
    let mut csv = 0;
    let mut svg = 0;
    for entry in std::fs::read_dir(dir.path()).unwrap() {
        let name = entry.unwrap().file_name().into_string().unwrap();
        csv += name.ends_with(".csv") as usize;
        svg += name.ends_with(".svg") as usize;
    }
    let mut in_range = true;
    for r in 1..=3 {
        for l in 1..=3 {
            let v = read_column(&dir.path().join(format!("fig2_row{r}_P{l}.csv")));
            in_range &= v.len() == 2000 && v.iter().all(|x| (0.0..=1.0).contains(x));
        }
    }
    let mut exchange = true;
    let mut parts = Vec::new();
    for r in 1..=3 {
        let min_p2 = read_column(&dir.path().join(format!("fig2_row{r}_P2.csv")))
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        let max_p3 = read_column(&dir.path().join(format!("fig2_row{r}_P3.csv")))
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max);
        if r > 1 {
            exchange &= min_p2 < 0.5 && max_p3 > 0.3;
        }
        parts.push(format!("row{r} min P2 = {min_p2:.4}, max P3 = {max_p3:.4}"));
    }
    outcome(
        csv == 9 && svg == 9 && in_range && exchange,
        format!(
            "{csv} CSV + {svg} SVG panels, P in [0,1]: {in_range}; {}; rows 2-3 require min P2 < 0.5 and max P3 > 0.3",
            parts.join("; ")
        ),
    )
}

fn determinism() -> Outcome {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_djcm"))
            .args(["validate", "--seed", "17"])
            .output()
            .unwrap()
    };
    let a = run();
    let b = run();
    let identical = a.stdout == b.stdout && !a.stdout.is_empty();
    let lines = String::from_utf8_lossy(&a.stdout).lines().count();
    outcome(
        identical,
        format!("two `validate --seed 17` reports byte-identical: {identical} ({} bytes, {lines} lines)", a.stdout.len()),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("cross-method equivalence", cross_method),
        ("norm conservation", norm_conservation),
        ("spectral structure", spectral_structure),
        ("closed-form Rabi limit", rabi_limit),
        ("entropy identity", entropy_identity),
        ("Fock-sector statistics at t=0", fock_statistics),
        ("Husimi normalization", husimi_normalization),
        ("moment vanishing", moment_vanishing),
        ("figure-shape reproduction", figure_shape),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        failed += !o.passed as usize;
        println!("{} criterion {:>2} {name}: {}", if o.passed { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
