//! Acceptance checks. Each criterion prints one line:
//! `criterion N <name>: PASS|FAIL (<seconds>s) <details>`.
//! The process exits non-zero when any criterion fails.

use std::sync::Arc;
use std::time::{Duration, Instant};

use correg::gp_sim::derive_seed;
use correg::kernels::kernel_constants;
use correg::prelude::*;
use correg::reference::{
    reduction_table, risk_table, RiskRow, RiskTable, REDUCTION_BANDWIDTH, REDUCTION_MODEL,
};
use correg_validation::{literal_trapezoid, quadratic_kernel, riemann, riemann_c_k, slope, triweight_kernel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Tolerances and budgets.
const KERNEL_REL_TOL: f64 = 1e-9;
const RIEMANN_CELLS: usize = 1_000_000;
const TABLE_IMSE_REL_TOL: f64 = 0.05;
const TABLE_H_TOL: f64 = 0.001 + 1e-9;
const RIMSE_ABS_TOL: f64 = 1e-10;
const PSI_SLACK: f64 = 1e-10;
const PSI_CONST_TOL: f64 = 1e-10;
const RANDOM_DENSITIES: usize = 200;
const BIAS_SLOPE_RANGE: (f64, f64) = (1.8, 2.2);
const IVAR_REL_TOL: f64 = 1e-12;
const TRAP_ORACLE_TOL: f64 = 1e-14;
const GM_SUM_TOL: f64 = 1e-12;
const KS_LEVEL: f64 = 0.01;
const KS_SEEDS: u64 = 10;
const KS_REQUIRED: usize = 9;
const RIMSE_POINTS_TOL: f64 = 0.03;
const LAMBDA_HAT_RANGE: (f64, f64) = (3.0, 5.5);
const PLUGIN_POINTS_TOL: f64 = 0.06;
const SEED: u64 = 20_240_611;

struct Outcome {
    pass: bool,
    detail: String,
}

type Check = fn() -> correg::Result<Outcome>;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn main() {
    let criteria: [(u32, &str, Option<u64>, Check); 10] = [
        (1, "kernel constants", Some(1), kernel_constants_match),
        (2, "table 1 reproduction", Some(120), table_one),
        (3, "tables 2 to 6 spot checks", None, table_spot_checks),
        (4, "rIMSE closed forms", None, rimse_closed_forms),
        (5, "minimax property", Some(30), minimax_property),
        (6, "bias and variance rates", None, rates),
        (7, "estimator oracles", None, estimator_oracles),
        (8, "asymptotic normality", Some(180), normality),
        (9, "plug-in design reduction", Some(1800), plugin_reduction),
        (10, "mean curves approach g", None, mean_curves),
    ];
    let mut failed = 0;
    for (id, name, budget, check) in criteria {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let over_budget = budget.is_some_and(|s| elapsed > Duration::from_secs(s));
        let (pass, mut detail) = match result {
            Ok(o) => (o.pass && !over_budget, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if over_budget {
            detail.push_str(&format!(" [over the {}s budget]", budget.unwrap()));
        }
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {id} {name}: {} ({:.1}s) {detail}",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
    }
    println!("acceptance: {} of 10 criteria passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

fn kernel_constants_match() -> correg::Result<Outcome> {
    let mut worst: f64 = 0.0;
    let mut notes = Vec::new();
    // kernel, oracle, B, V
    type Case = (Kernel, fn(f64) -> f64, f64, f64);
    let cases: [Case; 2] = [
        (Kernel::quadratic(), quadratic_kernel, 1.0 / 7.0, 5.0 / 7.0),
        (Kernel::triweight(), triweight_kernel, 1.0 / 9.0, 350.0 / 429.0),
    ];
    for (k, oracle, b, v) in cases {
        let stored = k.constants();
        let computed = kernel_constants(&k, 64)?;
        let rb = riemann(|u| u * u * oracle(u), RIEMANN_CELLS);
        let rv = riemann(|u| oracle(u) * oracle(u), RIEMANN_CELLS);
        let rc = riemann_c_k(oracle, RIEMANN_CELLS);
        for c in [stored, computed] {
            worst = worst.max(rel(c.b, b)).max(rel(c.v, v));
            worst = worst.max(rel(c.b, rb)).max(rel(c.v, rv)).max(rel(c.c_k, rc));
        }
        notes.push(format!(
            "{}: B={:.12} V={:.12} C_K={:.12}",
            k.family(),
            stored.b,
            stored.v,
            stored.c_k
        ));
    }
    Ok(Outcome {
        pass: worst <= KERNEL_REL_TOL,
        detail: format!("worst relative error {worst:.2e}; {}", notes.join("; ")),
    })
}

fn risk_setup(table: &RiskTable, row: &RiskRow) -> correg::Result<RiskSetup> {
    let smoother = Smoother::new(row.estimator, Kernel::quadratic(), DensitySpec::uniform());
    RiskSetup::new(
        midpoint_design(table.n)?,
        smoother,
        RegressionFunction::CubicGrowth,
        table.model,
        row.m,
    )
}

/// Searches the table's bandwidth grid and the fine default grid; returns a
/// description and whether IMSE and `h_opt` are within tolerance.
fn check_row(
    table: &RiskTable,
    row: &RiskRow,
    check_imse: bool,
    check_h: bool,
) -> correg::Result<(bool, String)> {
    let setup = risk_setup(table, row)?;
    let coarse = optimal_bandwidth_grid(&setup, &table.grid)?;
    let fine = optimal_bandwidth_grid(&setup, &BandwidthGrid::default())?;
    let imse = coarse.best_report().imse;
    let h = coarse.h_opt();
    let imse_ok = !check_imse || rel(imse, row.imse) <= TABLE_IMSE_REL_TOL;
    let h_ok = !check_h || (h - row.h_opt).abs() <= TABLE_H_TOL;
    let mark = |ok: bool| if ok { "" } else { "!" };
    Ok((
        imse_ok && h_ok,
        format!(
            "T{} {} m={}: IMSE {:.5e} vs {:.5e} ({:+.1}%){} h {:.4} vs {}{} (fine grid h {:.3}, IMSE {:.5e})",
            table.id,
            row.estimator,
            row.m,
            imse,
            row.imse,
            100.0 * (imse - row.imse) / row.imse,
            mark(imse_ok),
            h,
            row.h_opt,
            mark(h_ok),
            fine.h_opt(),
            fine.best_report().imse
        ),
    ))
}

fn table_one() -> correg::Result<Outcome> {
    let table = risk_table(1).expect("table 1");
    let mut pass = true;
    let mut parts = Vec::new();
    for row in &table.rows {
        let (ok, d) = check_row(&table, row, true, true)?;
        pass &= ok;
        parts.push(d);
    }
    Ok(Outcome {
        pass,
        detail: parts.join("; "),
    })
}

fn table_spot_checks() -> correg::Result<Outcome> {
    let mut pass = true;
    let mut parts = Vec::new();
    let mut check = |id: u8, est: EstimatorKind, m: usize, imse: bool, h: bool| -> correg::Result<()> {
        let table = risk_table(id).expect("risk table");
        let row = table
            .rows
            .iter()
            .find(|r| r.estimator == est && r.m == m)
            .expect("row");
        let (ok, d) = check_row(&table, row, imse, h)?;
        pass &= ok;
        parts.push(d);
        Ok(())
    };
    check(2, EstimatorKind::Trapezoid, 5, true, false)?;
    check(4, EstimatorKind::Trapezoid, 30, true, false)?;
    for m in [5, 15, 30] {
        for est in [EstimatorKind::GasserMuller, EstimatorKind::Trapezoid] {
            check(6, est, m, false, true)?;
        }
    }
    check(5, EstimatorKind::GasserMuller, 30, true, false)?;
    Ok(Outcome {
        pass,
        detail: parts.join("; "),
    })
}

fn rimse_closed_forms() -> correg::Result<Outcome> {
    let power = |exponent: f64| JumpProfile::Power { scale: 1.0, exponent };
    let r2 = asymptotic_rimse(&power(2.0), &WeightDensity::Uniform);
    let r3 = asymptotic_rimse(&power(3.0), &WeightDensity::Uniform);
    let e2 = (r2 - 44.0 / 125.0).abs();
    let e3 = (r3 - 0.5).abs();
    Ok(Outcome {
        pass: e2 <= RIMSE_ABS_TOL && e3 <= RIMSE_ABS_TOL,
        detail: format!("t^2: {r2:.14} (err {e2:.1e}); t^3: {r3:.14} (err {e3:.1e})"),
    })
}

/// A positive density built from a floor plus a few Gaussian bumps.
fn random_density(rng: &mut ChaCha8Rng) -> correg::Result<DensitySpec> {
    let floor = rng.random_range(0.05..1.0);
    let bumps: Vec<(f64, f64, f64)> = (0..rng.random_range(1..=4))
        .map(|_| {
            (
                rng.random_range(0.0..2.0),
                rng.random_range(0.0..1.0),
                rng.random_range(0.05..0.5),
            )
        })
        .collect();
    DensitySpec::normalize(
        move |t| {
            floor
                + bumps
                    .iter()
                    .map(|(a, mu, s)| a * (-(t - mu) * (t - mu) / (2.0 * s * s)).exp())
                    .sum::<f64>()
        },
        "bumps",
    )
}

fn minimax_property() -> correg::Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst_gap = f64::INFINITY;
    let alphas = [2.0, 3.0];
    for exponent in alphas {
        let alpha = JumpProfile::Power { scale: 1.0, exponent };
        let fstar = optimal_design_density(&alpha, &WeightDensity::Uniform)?;
        let psi_star = minimax_psi(&alpha, &WeightDensity::Uniform, &fstar);
        for _ in 0..RANDOM_DENSITIES / alphas.len() {
            let f = random_density(&mut rng)?;
            worst_gap = worst_gap.min(minimax_psi(&alpha, &WeightDensity::Uniform, &f) - psi_star);
        }
    }
    let mut worst_const: f64 = 0.0;
    for _ in 0..20 {
        let (e1, e2) = (rng.random_range(0.1..10.0), rng.random_range(0.1..10.0));
        let alpha = JumpProfile::constant(e1);
        let w = WeightDensity::General(Arc::new(move |_| e2));
        let fstar = optimal_design_density(&alpha, &w)?;
        worst_const = worst_const.max((minimax_psi(&alpha, &w, &fstar) - e1 * e2).abs() / (e1 * e2));
    }
    Ok(Outcome {
        pass: worst_gap >= -PSI_SLACK && worst_const <= PSI_CONST_TOL,
        detail: format!(
            "min Psi(f) - Psi(f*) over {RANDOM_DENSITIES} densities {worst_gap:.3e}; constant case error {worst_const:.1e}"
        ),
    })
}

fn rates() -> correg::Result<Outcome> {
    let g = RegressionFunction::CubicGrowth;
    let x = 0.3;
    let d = midpoint_design(20_000)?;
    let k = Kernel::quadratic();
    let hs: Vec<f64> = (0..10).map(|i| 0.02 * 10f64.powf(i as f64 / 9.0)).collect();
    let mut lh = Vec::new();
    let mut lb = Vec::new();
    for &h in &hs {
        let wv = gm_weights(&d, x, h, &k)?;
        let fitted: Vec<f64> = d.points().iter().map(|&t| g.eval(t)).collect();
        let bias = wv.apply(&fitted) - g.eval(x);
        lh.push(h.ln());
        lb.push(bias.abs().ln());
    }
    let s = slope(&lh, &lb);
    let slope_ok = s >= BIAS_SLOPE_RANGE.0 && s <= BIAS_SLOPE_RANGE.1;

    let smoother = Smoother::new(EstimatorKind::GasserMuller, k, DensitySpec::uniform());
    let base = RiskSetup::new(
        midpoint_design(20)?,
        smoother,
        g,
        CovModel::Wiener { sigma2: 1.0 },
        5,
    )?;
    let scaled: Vec<f64> = [5usize, 50, 500]
        .iter()
        .map(|&m| exact_imse(&base.clone().with_m(m), 0.2).map(|r| r.ivar * m as f64))
        .collect::<correg::Result<_>>()?;
    let spread = scaled.iter().map(|v| rel(*v, scaled[0])).fold(0.0, f64::max);
    Ok(Outcome {
        pass: slope_ok && spread <= IVAR_REL_TOL,
        detail: format!(
            "bias slope {s:.4}; Ivar*m = {:.12e}, relative spread {spread:.1e}",
            scaled[0]
        ),
    })
}

fn random_design(rng: &mut ChaCha8Rng, n: usize) -> correg::Result<Design> {
    loop {
        let mut pts: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
        pts.sort_by(f64::total_cmp);
        if pts.windows(2).all(|w| w[1] > w[0]) {
            return Design::from_points(pts);
        }
    }
}

fn estimator_oracles() -> correg::Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 7);
    let k = Kernel::quadratic();
    let mut worst_trap: f64 = 0.0;
    let mut mismatched_empty = 0;
    let mut instances = 0;
    while instances < 50 {
        let n = rng.random_range(2..=12);
        let d = random_design(&mut rng, n)?;
        let f = DensitySpec::power(rng.random_range(-0.5..2.0))?;
        let x = rng.random_range(0.0..1.0);
        let h = rng.random_range(0.05..0.6);
        let literal = |i: usize| {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            literal_trapezoid(d.points(), |t| f.eval(t), quadratic_kernel, x, h, &e)
        };
        match trap_weights(&d, &f, x, h, &k) {
            Ok(wv) => {
                let scale = wv.weights.iter().fold(1.0_f64, |a, w| a.max(w.abs()));
                for i in 0..n {
                    match literal(i) {
                        Some(o) => worst_trap = worst_trap.max((wv.weights[i] - o).abs() / scale),
                        None => mismatched_empty += 1,
                    }
                }
                instances += 1;
            }
            Err(Error::EmptyWindow { .. }) => {
                if literal(0).is_some() {
                    mismatched_empty += 1;
                }
            }
            Err(e) => return Err(e),
        }
    }

    let mut worst_gm: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(10..=200);
        let d = midpoint_design(n)?;
        let h = rng.random_range(0.02..0.45);
        let x = rng.random_range(h..1.0 - h);
        let wv = gm_weights(&d, x, h, &k)?;
        worst_gm = worst_gm.max((wv.sum() - 1.0).abs());
    }
    Ok(Outcome {
        pass: worst_trap <= TRAP_ORACLE_TOL && mismatched_empty == 0 && worst_gm <= GM_SUM_TOL,
        detail: format!(
            "trapezoid vs literal sum: worst scaled difference {worst_trap:.1e}, window disagreements {mismatched_empty}; GM |sum - 1| worst {worst_gm:.1e}"
        ),
    })
}

fn normality() -> correg::Result<Outcome> {
    let d = midpoint_design(100)?;
    let smoother = Smoother::new(
        EstimatorKind::GasserMuller,
        Kernel::quadratic(),
        DensitySpec::uniform(),
    );
    let model = CovModel::Wiener { sigma2: 1.0 };
    let mut passed = 0;
    let mut ps = Vec::new();
    for s in 0..KS_SEEDS {
        let r = normality_check(
            &model,
            &d,
            &RegressionFunction::CubicGrowth,
            &smoother,
            500,
            0.05,
            0.5,
            400,
            derive_seed(SEED, s),
        )?;
        let p = r.p_value.unwrap_or(0.0);
        if p > KS_LEVEL {
            passed += 1;
        }
        ps.push(format!("{p:.3}"));
    }
    Ok(Outcome {
        pass: passed >= KS_REQUIRED,
        detail: format!(
            "{passed} of {KS_SEEDS} seeds with p > {KS_LEVEL}; p = [{}]",
            ps.join(", ")
        ),
    })
}

fn plugin_reduction() -> correg::Result<Outcome> {
    let mut pass = true;
    let mut parts = Vec::new();
    for (table_id, m) in [(9u8, 5usize), (10, 10)] {
        let table = reduction_table(table_id).expect("reduction table");
        let published = table.rows.iter().find(|r| r.m == m).expect("row");
        let e = PluginExperiment::new(
            table.n,
            m,
            REDUCTION_MODEL,
            REDUCTION_BANDWIDTH,
            derive_seed(SEED, m as u64),
        );
        let r = plugin_design_experiment(&e)?;
        let rimse_ok = (r.rimse_lambda - published.rimse_lambda).abs() <= RIMSE_POINTS_TOL;
        let lambda_ok = r.fit.lambda_hat >= LAMBDA_HAT_RANGE.0 && r.fit.lambda_hat <= LAMBDA_HAT_RANGE.1;
        let plugin_ok = (r.rimse_lambda_hat - r.rimse_lambda).abs() <= PLUGIN_POINTS_TOL;
        pass &= rimse_ok && lambda_ok && plugin_ok;
        parts.push(format!(
            "n={} m={m}: rIMSE {:.2}% vs {:.2}%{} (IMSE unif {:.4} vs {:.4}, opt {:.4} vs {:.4}); lambda_hat {:.2}{}; plug-in rIMSE {:.2}%{}",
            table.n,
            100.0 * r.rimse_lambda,
            100.0 * published.rimse_lambda,
            if rimse_ok { "" } else { "!" },
            r.imse_unif,
            published.imse_unif,
            r.imse_opt,
            published.imse_opt,
            r.fit.lambda_hat,
            if lambda_ok { "" } else { "!" },
            100.0 * r.rimse_lambda_hat,
            if plugin_ok { "" } else { "!" },
        ));
    }
    Ok(Outcome {
        pass,
        detail: parts.join("; "),
    })
}

fn mean_curves() -> correg::Result<Outcome> {
    let n = 100;
    let d = midpoint_design(n)?;
    let g = RegressionFunction::CubicGrowth;
    let model = CovModel::Wiener { sigma2: 0.5 };
    let smoother = Smoother::new(
        EstimatorKind::Trapezoid,
        Kernel::quadratic(),
        DensitySpec::uniform(),
    );
    let grid: Vec<f64> = (1..200).map(|i| i as f64 / 200.0).collect();
    let sim = Simulator::new(&model, &d, &g)?;
    let mut devs = Vec::new();
    for (i, m) in [5usize, 20, 100].into_iter().enumerate() {
        let setup = RiskSetup::new(d.clone(), smoother.clone(), g.clone(), model, m)?;
        let h = optimal_bandwidth_grid(&setup, &BandwidthGrid::default())?.h_opt();
        let mut mean = vec![0.0; grid.len()];
        for r in 0..100 {
            let s = sim.sample(m, derive_seed(SEED + i as u64, r))?;
            let curve = estimate_curve(&s, &grid, h, &smoother)?;
            for (acc, p) in mean.iter_mut().zip(&curve) {
                *acc += p.ghat.unwrap_or(f64::NAN) / 100.0;
            }
        }
        let dev = grid
            .iter()
            .zip(&mean)
            .map(|(x, v)| (v - g.eval(*x)).abs())
            .fold(0.0, f64::max);
        devs.push((m, h, dev));
    }
    let decreasing = devs.windows(2).all(|w| w[1].2 < w[0].2) && devs.iter().all(|d| d.2.is_finite());
    Ok(Outcome {
        pass: decreasing,
        detail: devs
            .iter()
            .map(|(m, h, dev)| format!("m={m} h={h:.3} max|mean - g| {dev:.4e}"))
            .collect::<Vec<_>>()
            .join("; "),
    })
}
