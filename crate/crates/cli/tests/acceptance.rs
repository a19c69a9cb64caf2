//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::Instant;

use fadekit::approx::{self, ExpSumApprox, FitOptions};
use fadekit::fading::{map_special_case, FadingParams, MrcChannel, SpecialCase};
use fadekit::metrics::{aber_closed_form, acc_closed_form, Modulation, ModulationSpec};
use fadekit::noise::NoiseModel;
use fadekit::oracle::stats::ks_test;
use fadekit::oracle::{
    acc_quadrature, aber_quadrature, simulate_error_rate, ConditionalQ, LogIntegrand, QuadratureSpec, SimulationMode,
};
use fadekit::quadrature::{integrate_half_line, HalfLine};
use fadekit::specfun::{bessel_i_scaled, ln_gamma};
use fadekit_cli::scenario::Metric;
use fadekit_cli::{run_scenario, to_csv, Scenario};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn channel(kappa: f64, mu: f64, m: f64, snr: f64, l: u32) -> MrcChannel {
    MrcChannel::new(FadingParams::new(kappa, mu, m, snr).unwrap(), l).unwrap()
}

/// ½·erfc(x/√2) from a 40-digit arbitrary-precision evaluation.
const GAUSS_TAIL: [(f64, f64); 13] = [
    (0.0, 5.0e-1),
    (0.5, 3.085_375_387_259_869e-1),
    (1.0, 1.586_552_539_314_570_5e-1),
    (1.5, 6.680_720_126_885_807e-2),
    (2.0, 2.275_013_194_817_921e-2),
    (2.5, 6.209_665_325_776_135e-3),
    (3.0, 1.349_898_031_630_094_6e-3),
    (3.5, 2.326_290_790_355_250_4e-4),
    (4.0, 3.167_124_183_311_992_4e-5),
    (4.5, 3.397_673_124_730_060_3e-6),
    (5.0, 2.866_515_718_791_939e-7),
    (5.5, 1.898_956_246_588_771_8e-8),
    (6.0, 9.865_876_450_376_98e-10),
];

fn c1_gaussian_anchor() -> Outcome {
    let n = NoiseModel::new(2.0).unwrap();
    let worst = GAUSS_TAIL.iter().map(|&(x, q)| rel(n.q(x), q)).fold(0.0, f64::max);
    outcome(worst <= 1e-12, format!("worst relative error {worst:.2e} over x = 0, 0.5, ..., 6"))
}

#[derive(Clone, Copy)]
struct GridCase {
    kappa: f64,
    mu: f64,
    m: f64,
    l: u32,
    a: f64,
    modulation: Modulation,
    snr_db: f64,
}

fn aber_grid() -> Vec<GridCase> {
    let mut v = Vec::new();
    for kappa in [0.1, 1.0, 5.0] {
        for mu in [0.5, 1.0, 2.7] {
            for m in [0.5, 1.0, 10.0] {
                for l in [1, 3] {
                    for a in [1.0, 2.0] {
                        for modulation in [Modulation::Bpsk, Modulation::Psk(16)] {
                            for snr_db in [0.0, 10.0, 20.0, 30.0] {
                                v.push(GridCase { kappa, mu, m, l, a, modulation, snr_db });
                            }
                        }
                    }
                }
            }
        }
    }
    v
}

struct GridEval {
    case: GridCase,
    closed: f64,
    quad_approx: f64,
    quad_exact: f64,
}

fn evaluate_grid() -> Result<Vec<GridEval>, String> {
    let spec = QuadratureSpec::default();
    aber_grid()
        .into_par_iter()
        .map(|c| {
            let ch = channel(c.kappa, c.mu, c.m, 10f64.powf(c.snr_db / 10.0), c.l);
            let md = ModulationSpec::new(c.modulation).unwrap();
            let q = ExpSumApprox::preset_unit_variance(c.a).unwrap();
            let noise = NoiseModel::new(c.a).unwrap();
            let err = |e: fadekit::Error| format!("{e}");
            Ok(GridEval {
                case: c,
                closed: aber_closed_form(&md, &q, &ch).map_err(err)?.value,
                quad_approx: aber_quadrature(&md, ConditionalQ::Approx(&q), &ch, &spec).map_err(err)?.value,
                quad_exact: aber_quadrature(&md, ConditionalQ::Exact(&noise), &ch, &spec).map_err(err)?.value,
            })
        })
        .collect()
}

fn describe(c: &GridCase) -> String {
    format!(
        "κ={} μ={} m={} L={} a={} {:?} γ̄={} dB",
        c.kappa, c.mu, c.m, c.l, c.a, c.modulation, c.snr_db
    )
}

fn c2_identity(grid: &[GridEval]) -> Outcome {
    let (worst, at) = grid
        .iter()
        .map(|g| (rel(g.closed, g.quad_approx), &g.case))
        .fold((0.0, None), |acc, (e, c)| if e > acc.0 { (e, Some(c)) } else { acc });
    outcome(
        worst <= 1e-6,
        format!(
            "{} cases, worst relative gap {worst:.2e}{}",
            grid.len(),
            at.map(|c| format!(" at {}", describe(c))).unwrap_or_default()
        ),
    )
}

fn c3_budget(grid: &[GridEval]) -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for a in [1.0, 2.0] {
        let in_range: Vec<&GridEval> = grid
            .iter()
            .filter(|g| g.case.a == a && (1e-6..=0.5).contains(&g.quad_exact))
            .collect();
        let over = in_range.iter().filter(|g| rel(g.closed, g.quad_exact) > 0.10).count();
        let worst = in_range
            .iter()
            .max_by(|x, y| rel(x.closed, x.quad_exact).total_cmp(&rel(y.closed, y.quad_exact)))
            .unwrap();
        pass &= over == 0;
        parts.push(format!(
            "a={a}: {over}/{} points above 10%, worst {:.1}% (reference {:.2e}, {})",
            in_range.len(),
            100.0 * rel(worst.closed, worst.quad_exact),
            worst.quad_exact,
            describe(&worst.case)
        ));
    }
    outcome(pass, parts.join("; "))
}

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

fn e1(x: f64) -> f64 {
    let mut sum = 0.0;
    let mut term = 1.0;
    for k in 1..200 {
        term *= -x / k as f64;
        let add = term / k as f64;
        sum += add;
        if add.abs() < 1e-18 {
            break;
        }
    }
    -EULER_GAMMA - x.ln() - sum
}

fn rayleigh(snr: f64, l: u32) -> MrcChannel {
    MrcChannel::new(map_special_case(SpecialCase::Rayleigh, snr).unwrap().params, l).unwrap()
}

fn c4_special_cases() -> Outcome {
    let spec = QuadratureSpec::default();
    let bpsk = ModulationSpec::new(Modulation::Bpsk).unwrap();
    let gauss = NoiseModel::gaussian();
    let mut ber_worst: f64 = 0.0;
    let mut cap_worst: f64 = 0.0;
    for snr in [1.0, 10.0, 100.0] {
        let ch = rayleigh(snr, 1);
        let ber = aber_quadrature(&bpsk, ConditionalQ::Exact(&gauss), &ch, &spec).unwrap().value;
        ber_worst = ber_worst.max(rel(ber, 0.5 * (1.0 - (snr / (1.0 + snr)).sqrt())));
        let cap = acc_quadrature(&ch, &spec, LogIntegrand::Exact).unwrap().value;
        cap_worst = cap_worst.max(rel(cap, (1.0 / snr).exp() * e1(1.0 / snr) / std::f64::consts::LN_2));
    }
    outcome(
        ber_worst <= 1e-8 && cap_worst <= 1e-7,
        format!("BPSK worst {ber_worst:.2e} (≤1e-8), capacity worst {cap_worst:.2e} (≤1e-7)"),
    )
}

fn kappa_mu_pdf(kappa: f64, mu: f64, snr: f64, g: f64) -> f64 {
    let x = 2.0 * mu * (kappa * (1.0 + kappa) * g / snr).sqrt();
    let ln = mu.ln() + 0.5 * (mu + 1.0) * kappa.ln_1p() - 0.5 * (mu - 1.0) * kappa.ln() - mu * kappa
        - 0.5 * (mu + 1.0) * snr.ln()
        + 0.5 * (mu - 1.0) * g.ln()
        - mu * (1.0 + kappa) * g / snr
        + x;
    ln.exp() * bessel_i_scaled(mu - 1.0, x).unwrap()
}

fn gamma_pdf(shape: f64, scale: f64, g: f64) -> f64 {
    ((shape - 1.0) * g.ln() - g / scale - ln_gamma(shape).unwrap() - shape * scale.ln()).exp()
}

fn sup_gap(ch: &MrcChannel, exact: impl Fn(f64) -> f64) -> f64 {
    (0..=200)
        .map(|i| {
            let g = ch.mean() * (0.05 + 4.95 * i as f64 / 200.0);
            rel(ch.pdf(g).unwrap(), exact(g))
        })
        .fold(0.0, f64::max)
}

fn c5_distribution() -> Outcome {
    let spec = QuadratureSpec::default();
    let mut notes = Vec::new();
    let mut pass = true;

    // Normalization.
    let mut norm_worst: f64 = 0.0;
    for kappa in [0.1, 1.0, 5.0] {
        for mu in [0.5, 1.0, 2.7] {
            for m in [0.5, 1.0, 10.0] {
                for l in [1, 2, 4] {
                    let ch = channel(kappa, mu, m, 3.0, l);
                    let dom = HalfLine {
                        breakpoints: vec![ch.mean()],
                        scale: ch.mean(),
                        head_power: (ch.mu_t() < 1.0).then_some(ch.mu_t()),
                    };
                    let t = integrate_half_line(|g| ch.pdf(g), &dom, &spec).unwrap().value;
                    norm_worst = norm_worst.max((t - 1.0).abs());
                }
            }
        }
    }
    pass &= norm_worst <= 1e-8;
    notes.push(format!("normalization worst {norm_worst:.1e}"));

    // MGF product structure.
    let mut mgf_worst: f64 = 0.0;
    for kappa in [0.1, 1.0, 5.0] {
        for mu in [0.5, 2.7] {
            let p = FadingParams::new(kappa, mu, 1.0, 3.0).unwrap();
            let one = MrcChannel::new(p, 1).unwrap();
            for l in [2, 3, 4] {
                let many = MrcChannel::new(p, l).unwrap();
                for s in [-100.0, -1.0, -0.01, 0.5 * one.pole()] {
                    let b = l as f64 * one.ln_mgf(s).unwrap();
                    mgf_worst = mgf_worst.max((many.ln_mgf(s).unwrap() - b).abs() / b.abs());
                }
            }
        }
    }
    pass &= mgf_worst <= 1e-13;
    notes.push(format!("log-MGF product gap {mgf_worst:.1e}"));

    // KS on 12 cases.
    let cases: Vec<(f64, f64, f64, u32)> = [(0.1, 0.5), (1.0, 1.0), (5.0, 10.0)]
        .into_iter()
        .flat_map(|(k, m)| [0.5, 2.7].into_iter().flat_map(move |mu| [1u32, 3].map(|l| (k, mu, m, l))))
        .collect();
    let ks: Vec<f64> = cases
        .par_iter()
        .enumerate()
        .map(|(i, &(k, mu, m, l))| {
            let ch = channel(k, mu, m, 3.0, l);
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + i as u64);
            let xs = ch.sample_snr(&mut rng, 100_000).unwrap();
            ks_test(&xs, |v| ch.cdf_sorted(v)).unwrap().p_value
        })
        .collect();
    let ks_min = ks.iter().copied().fold(1.0, f64::min);
    let ks_fail = ks.iter().filter(|p| **p < 0.01).count();
    pass &= ks_fail == 0;
    notes.push(format!("KS {}/{} cases pass, min p = {ks_min:.3}", ks.len() - ks_fail, ks.len()));

    // Surrogate convergence.
    let mut gap: f64 = 0.0;
    for l in [1u32, 3] {
        let lf = l as f64;
        let ch = MrcChannel::new(map_special_case(SpecialCase::Rayleigh, 2.0).unwrap().params, l).unwrap();
        gap = gap.max(sup_gap(&ch, |g| gamma_pdf(lf, 2.0, g)));
        for m0 in [0.5, 2.0] {
            let ch = MrcChannel::new(map_special_case(SpecialCase::NakagamiM { m: m0 }, 2.0).unwrap().params, l).unwrap();
            gap = gap.max(sup_gap(&ch, |g| gamma_pdf(lf * m0, 2.0 / m0, g)));
        }
        for (kappa, mu) in [(1.0, 1.0), (3.0, 2.0)] {
            let ch = MrcChannel::new(map_special_case(SpecialCase::KappaMu { kappa, mu }, 2.0).unwrap().params, l).unwrap();
            gap = gap.max(sup_gap(&ch, |g| kappa_mu_pdf(kappa, lf * mu, lf * 2.0, g)));
        }
    }
    pass &= gap < 0.01;
    notes.push(format!("surrogate sup gap {:.2}%", 100.0 * gap));
    outcome(pass, notes.join("; "))
}

fn c6_monte_carlo() -> Outcome {
    let spec = QuadratureSpec::default();
    let cases = [
        (0.1, 0.5, 0.5, 1u32, 1.0, Modulation::Bpsk, 0.0),
        (1.0, 1.0, 1.0, 1, 2.0, Modulation::Bpsk, 10.0),
        (5.0, 2.7, 10.0, 3, 2.0, Modulation::Psk(16), 10.0),
        (1.0, 2.7, 0.5, 3, 1.0, Modulation::Psk(16), 20.0),
        (0.1, 1.0, 10.0, 1, 1.0, Modulation::Bpsk, 20.0),
        (5.0, 0.5, 1.0, 1, 2.0, Modulation::Psk(16), 20.0),
        (1.0, 0.5, 10.0, 3, 2.0, Modulation::Bpsk, 0.0),
        (0.1, 2.7, 1.0, 1, 1.0, Modulation::Psk(16), 30.0),
        (5.0, 1.0, 0.5, 3, 1.0, Modulation::Bpsk, 10.0),
        (1.0, 1.0, 10.0, 1, 2.0, Modulation::Psk(16), 30.0),
    ];
    let zs: Vec<f64> = cases
        .par_iter()
        .enumerate()
        .map(|(i, &(k, mu, m, l, a, md, db))| {
            let ch = channel(k, mu, m, 10f64.powf(db / 10.0), l);
            let md = ModulationSpec::new(md).unwrap();
            let noise = NoiseModel::new(a).unwrap();
            let exact = aber_quadrature(&md, ConditionalQ::Exact(&noise), &ch, &spec).unwrap().value;
            let e = simulate_error_rate(&md, &noise, &ch, 1_000_000, 77 + i as u64, SimulationMode::SemiAnalytic).unwrap();
            (e.estimate - exact).abs() / e.std_error
        })
        .collect();
    let z_max = zs.iter().copied().fold(0.0, f64::max);
    let bpsk = ModulationSpec::new(Modulation::Bpsk).unwrap();
    let bits = simulate_error_rate(&bpsk, &NoiseModel::gaussian(), &rayleigh(10.0, 1), 10_000_000, 4242, SimulationMode::BitLevel)
        .unwrap();
    let exact = 0.5 * (1.0 - (10.0f64 / 11.0).sqrt());
    let z_bits = (bits.estimate - exact).abs() / bits.std_error;
    outcome(
        z_max <= 3.0 && z_bits <= 3.0,
        format!("semi-analytic max |z| = {z_max:.2} over 10 cases; bit-level {:.5e} vs {exact:.5e}, |z| = {z_bits:.2}", bits.estimate),
    )
}

fn c7_fitting() -> Outcome {
    let grid = approx::default_grid();
    let opts = FitOptions::default();
    let mut pass = true;
    let mut notes = Vec::new();
    for a in [1.0, 1.5, 2.0, 2.5] {
        let noise = NoiseModel::new(a).unwrap();
        let target = |x: f64| noise.q(x.sqrt());
        let baseline = ExpSumApprox::preset_unit_variance(a).unwrap().max_abs_residual(target, &grid);
        let r = approx::fit(target, &grid, 4, None, &opts).unwrap();
        pass &= r.max_abs_residual <= 2.0 * baseline;
        notes.push(format!("a={a}: {:.2e} vs table {baseline:.2e}", r.max_abs_residual));
    }
    outcome(pass, notes.join("; "))
}

fn c8_capacity_window() -> Outcome {
    let spec = QuadratureSpec::default();
    let mut worst: (f64, String) = (0.0, String::new());
    let mut n = 0;
    for kappa in [0.1, 1.0, 5.0] {
        for mu in [0.5, 2.7] {
            for l in [1u32, 3] {
                for total in approx::log_grid(10.0, 300.0, 8) {
                    let ch = channel(kappa, mu, 1.0, total / l as f64, l);
                    let cf = acc_closed_form(&ch).unwrap().value;
                    let ex = acc_quadrature(&ch, &spec, LogIntegrand::Exact).unwrap().value;
                    let e = rel(cf, ex);
                    n += 1;
                    if e > worst.0 {
                        worst = (e, format!("κ={kappa} μ={mu} L={l} Lγ̄={total:.1}"));
                    }
                }
            }
        }
    }
    outcome(
        worst.0 <= 0.05,
        format!("{n} points, worst {:.2}% at {}", 100.0 * worst.0, worst.1),
    )
}

fn scenarios_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn values(csv: &str) -> Vec<f64> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').nth(3).unwrap().parse().unwrap_or(f64::NAN))
        .collect()
}

fn c9_scenarios() -> Outcome {
    let mut files: Vec<PathBuf> = std::fs::read_dir(scenarios_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().and_then(|e| e.to_str()) == Some("toml"))
        .collect();
    files.sort();
    let mut problems = Vec::new();
    for f in &files {
        let name = f.file_name().unwrap().to_string_lossy().to_string();
        let runs: Vec<Vec<u8>> = (0..2)
            .map(|_| {
                let o = Command::new(env!("CARGO_BIN_EXE_fadekit")).arg("scenario").arg(f).output().unwrap();
                if !o.status.success() {
                    problems.push(format!("{name}: exit {:?}", o.status.code()));
                }
                o.stdout
            })
            .collect();
        if runs[0] != runs[1] {
            problems.push(format!("{name}: output differs between runs"));
        }
        let csv = String::from_utf8(runs[0].clone()).unwrap();
        let v = values(&csv);
        let sc = fadekit_cli::parse_scenario_file(f).unwrap();
        let increasing = sc.metric == Metric::Acc;
        let monotone = v.windows(2).all(|w| if increasing { w[1] > w[0] } else { w[1] < w[0] });
        if v.iter().any(|x| x.is_nan()) || !monotone {
            problems.push(format!("{name}: not monotone"));
        }
        // Same scenario with the other branch count.
        let mut other: Scenario = sc.clone();
        other.branches = if sc.branches == 3 { 1 } else { 3 };
        let w = values(&to_csv(&run_scenario(&other).unwrap()));
        let (l1, l3) = if sc.branches == 3 { (&w, &v) } else { (&v, &w) };
        let ordered = l1
            .iter()
            .zip(l3.iter())
            .all(|(a, b)| if increasing { b > a } else { b < a });
        if !ordered {
            problems.push(format!("{name}: L ordering violated"));
        }
        if sc.method == fadekit_cli::scenario::Method::Closed {
            let mut q = sc.clone();
            q.method = fadekit_cli::scenario::Method::QuadratureApprox;
            let qv = values(&to_csv(&run_scenario(&q).unwrap()));
            if v.iter().zip(&qv).any(|(a, b)| rel(*a, *b) > 1e-6) {
                problems.push(format!("{name}: closed and quadrature-approx disagree"));
            }
        }
    }
    if files.len() != 6 {
        problems.push(format!("expected 6 scenario files, found {}", files.len()));
    }
    outcome(
        problems.is_empty(),
        if problems.is_empty() {
            format!("{} files: monotone, L-ordered, reproducible, closed = quadrature-approx", files.len())
        } else {
            problems.join("; ")
        },
    )
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |n: u32, title: &str, start: Instant, o: Outcome| {
        let status = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {n} [{status}] {title} ({:.1}s): {}",
            start.elapsed().as_secs_f64(),
            o.detail
        );
        if !o.pass {
            failed += 1;
        }
    };

    let t = Instant::now();
    report(1, "Gaussian anchor", t, c1_gaussian_anchor());

    let t = Instant::now();
    let grid = evaluate_grid();
    match &grid {
        Ok(g) => {
            report(2, "closed form = quadrature on identical integrand", t, c2_identity(g));
            report(3, "approximation budget vs exact Q", t, c3_budget(g));
        }
        Err(e) => {
            report(2, "closed form = quadrature on identical integrand", t, outcome(false, e.clone()));
            report(3, "approximation budget vs exact Q", t, outcome(false, e.clone()));
        }
    }

    let t = Instant::now();
    report(4, "exact special-case oracles", t, c4_special_cases());
    let t = Instant::now();
    report(5, "distribution correctness", t, c5_distribution());
    let t = Instant::now();
    report(6, "Monte Carlo agreement", t, c6_monte_carlo());
    let t = Instant::now();
    report(7, "fitting parity", t, c7_fitting());
    let t = Instant::now();
    report(8, "capacity validity window", t, c8_capacity_window());
    let t = Instant::now();
    report(9, "figure-shape regression", t, c9_scenarios());

    println!("acceptance: {} of 9 criteria passed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
