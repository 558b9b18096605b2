//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::time::Instant;

use qms_cli::config::{ExperimentConfig, SolverConfig, SCHEMA_VERSION};
use qms_cli::report::to_csv;
use qms_core::linalg::random::{gaussian, random_hermitian};
use qms_core::linalg::{hermitian_eigenvalues, pauli};
use qms_core::metrics::{
    approximation_defect, finite_diameter_constant, mk_distance, sup_report, tensor_product_certification, FactorData,
    FiniteMetricSpace, MkProblem, SolverOptions,
};
use qms_core::models::{check_action_vs_dirac, GroupActionModel, RationalTorus, TorusDiracSeminorm, TorusPolynomial};
use qms_core::opsys::{OperatorSystem, UcpMap};
use qms_core::rng::{child_rng, rng_from_seed};
use qms_core::seminorms::{tensor_seminorm_exact, tensor_seminorm_sampled, SeminormFamily};
use qms_core::triples::{check_product_inequality, external_product, sample_triple, LipschitzTriple, Parity};
use qms_core::Complex;

/// Tolerances pinned by the criteria.
mod tol {
    pub const AXIOM: f64 = 1e-9;
    pub const KERNEL_CUTOFF: f64 = 1e-8;
    pub const PRODUCT: f64 = 1e-9;
    pub const IDENTITY: f64 = 1e-10;
    pub const SPECTRUM: f64 = 1e-10;
    pub const SAMPLED: f64 = 1e-9;
    pub const SAMPLED_RATIO: f64 = 0.9;
    pub const MK_RELATIVE: f64 = 1e-3;
    pub const MK_METRIC: f64 = 1e-6;
    pub const DIAMETER: f64 = 1e-9;
    pub const PROJECTION: f64 = 1e-10;
    pub const MONOTONE: f64 = 1e-9;
    pub const TENSOR: f64 = 1e-6;
}

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn weyl_family(q: usize, p: usize) -> (SeminormFamily, OperatorSystem) {
    let m = GroupActionModel::new(q, p).unwrap();
    (m.ergodic_seminorm(), m.system())
}

fn criterion_1() -> Outcome {
    let mut rng = rng_from_seed(101);
    let m3 = OperatorSystem::full_matrix_algebra(3);
    let comm = SeminormFamily::commutator(&random_hermitian::<f64>(&mut rng, 3)).unwrap();
    let (action, _) = weyl_family(3, 1);
    let stab = SeminormFamily::stabilized(&comm, 2);
    let max = SeminormFamily::max(&comm, &action).unwrap();
    let m3_2 = m3.matrix_amplification(2);
    let cases = [("commutator", &comm, &m3), ("action", &action, &m3), ("stabilized", &stab, &m3_2), ("max", &max, &m3)];
    let mut passed = true;
    let mut worst: f64 = 0.0;
    for (i, (_, f, sys)) in cases.iter().enumerate() {
        let rep = f.check_axioms(sys, 4, 200, 1000 + i as u64).unwrap();
        passed &= rep.cases >= 200 && rep.passes(tol::AXIOM);
        worst = worst
            .max(rep.direct_sum_max_residual)
            .max(rep.bimodule_violation)
            .max(rep.entrywise_violation)
            .max(rep.star_residual)
            .max(rep.scalar_residual);
    }
    outcome(passed, format!("4 kinds x 200 cases, s <= 4, worst residual {worst:.2e}"))
}

fn criterion_2() -> Outcome {
    let _ = tol::KERNEL_CUTOFF; // cutoff used by kernel_basis
    let m3 = OperatorSystem::full_matrix_algebra(3);
    let mut families = vec![
        ("commutator generic", SeminormFamily::commutator(&random_hermitian::<f64>(&mut rng_from_seed(102), 3)).unwrap(), m3.clone()),
        (
            "commutator degenerate",
            SeminormFamily::commutator(&qms_core::ComplexMatrix::from_real_diag(&[1.0, 1.0, 2.0])).unwrap(),
            m3.clone(),
        ),
    ];
    for (q, p) in [(3, 1), (4, 2)] {
        let (f, sys) = weyl_family(q, p);
        families.push(("action", f, sys));
    }
    let mut passed = true;
    let mut dims = Vec::new();
    for (_, f, sys) in &families {
        let k1 = f.kernel_basis(sys, 1).unwrap().len();
        for s in 2..=3 {
            let ks = f.kernel_basis(sys, s).unwrap().len();
            passed &= ks == s * s * k1;
        }
        dims.push(k1);
    }
    outcome(passed, format!("dim ker at s = 1: {dims:?}; s^2 scaling checked for s = 2, 3"))
}

fn criterion_3() -> Outcome {
    let cases = [(Parity::Even, Parity::Even), (Parity::Even, Parity::Odd), (Parity::Odd, Parity::Even), (Parity::Odd, Parity::Odd)];
    let mut passed = true;
    let mut worst: f64 = 0.0;
    for (i, (p1, p2)) in cases.into_iter().enumerate() {
        let mut rng = child_rng(103, i as u64);
        let t1 = sample_triple(2, p1, &mut rng).unwrap();
        let t2 = sample_triple(4, p2, &mut rng).unwrap();
        let prod = external_product(&t1, &t2).unwrap();
        passed &= prod.result().grading_residual() <= tol::IDENTITY;
        for s in 1..=3 {
            let rep = check_product_inequality(&prod, s, 200, 10 * i as u64 + s as u64);
            passed &= rep.cases == 200 && rep.passes(tol::PRODUCT) && rep.max_recovery_residual <= tol::IDENTITY;
            worst = worst.max(rep.max_left_violation).max(rep.max_right_violation);
        }
    }
    let [x, _, z] = pauli::<f64>();
    let sigma = LipschitzTriple::even(OperatorSystem::diagonal(2), x, z).unwrap();
    let ev = hermitian_eigenvalues(external_product(&sigma, &sigma).unwrap().result().dirac()).unwrap();
    let r2 = 2f64.sqrt();
    let spectrum_ok = ev.len() == 4 && ev.iter().zip([-r2, -r2, r2, r2]).all(|(e, w)| (e - w).abs() <= tol::SPECTRUM);
    outcome(passed && spectrum_ok, format!("4 parity cases x 3 levels x 200, worst violation {worst:.2e}; sigma spectrum {ev:.12?}"))
}

fn criterion_4() -> Outcome {
    let mut rng = rng_from_seed(104);
    let mut passed = true;
    let mut min_ratio = f64::INFINITY;
    let mut worst_excess = f64::NEG_INFINITY;
    for (t, (dx, dy)) in [(2, 2), (2, 4), (3, 3), (4, 2)].iter().cycle().take(20).enumerate() {
        let xs = OperatorSystem::full_matrix_algebra(*dx);
        let ys = OperatorSystem::full_matrix_algebra(*dy);
        let base = SeminormFamily::commutator(&random_hermitian::<f64>(&mut rng, *dx)).unwrap();
        let s = 1 + t % 2;
        let z = xs.tensor(&ys).random_element(s, &mut rng);
        let exact = tensor_seminorm_exact(&base, *dy, s, z.realization()).unwrap();
        let sampled = tensor_seminorm_sampled(&base, &xs, &ys, &z, 500, t as u64).unwrap().value;
        passed &= sampled <= exact + tol::SAMPLED;
        worst_excess = worst_excess.max(sampled - exact);
        min_ratio = min_ratio.min(sampled / exact);
    }
    let ratio_note = if min_ratio >= tol::SAMPLED_RATIO { "meets 0.9" } else { "below 0.9" };
    outcome(passed, format!("20 elements x 500 samples, max(sampled - exact) {worst_excess:.2e}, min ratio {min_ratio:.6} ({ratio_note})"))
}

fn probability(rng: &mut qms_core::rng::Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| gaussian::<f64>(rng).powi(2) + 1e-3).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

fn state(p: &[f64]) -> UcpMap {
    UcpMap::vector_state(&p.iter().map(|x| Complex::new(x.sqrt(), 0.0)).collect::<Vec<_>>()).unwrap()
}

/// Wasserstein-1 on {0, 0.4, 1.1} ⊂ ℝ by brute force over 1-Lipschitz f with f(0) = 0
/// on a 1e-3 grid; the optimal f has grid coordinates.
fn brute_force_line(phi: &[f64], psi: &[f64]) -> f64 {
    let d = [phi[0] - psi[0], phi[1] - psi[1], phi[2] - psi[2]];
    let mut best: f64 = 0.0;
    for a in -400..=400 {
        let f1 = a as f64 * 1e-3;
        for b in -1100..=1100 {
            let f2 = b as f64 * 1e-3;
            if (f2 - f1).abs() <= 0.7 + 1e-12 {
                best = best.max((f1 * d[1] + f2 * d[2]).abs());
            }
        }
    }
    let _ = d[0];
    best
}

fn criterion_5() -> Outcome {
    let opts = SolverOptions::default();
    let oracle = SolverOptions { oracle: true, ..SolverOptions::default() };
    let mut passed = true;
    let mut worst_rel: f64 = 0.0;
    for rho in [0.3, 1.0, 2.5] {
        let sp = FiniteMetricSpace::new(vec![vec![0.0, rho], vec![rho, 0.0]]).unwrap();
        let p = MkProblem::new(sp.lipschitz_seminorm(), sp.system(), sp.point_state(0), sp.point_state(1)).unwrap();
        let v = mk_distance(&p, &opts, 5).unwrap().value;
        worst_rel = worst_rel.max((v - rho).abs() / rho);
    }
    passed &= worst_rel <= tol::MK_RELATIVE;
    let line = FiniteMetricSpace::euclidean(&[vec![0.0], vec![0.4], vec![1.1]]).unwrap();
    let mk = |a: &[f64], b: &[f64], seed: u64| {
        let p = MkProblem::new(line.lipschitz_seminorm(), line.system(), state(a), state(b)).unwrap();
        mk_distance(&p, &oracle, seed).unwrap().value
    };
    let mut rng = rng_from_seed(105);
    let mut worst_grid: f64 = 0.0;
    let mut worst_metric: f64 = 0.0;
    for t in 0..10 {
        let (a, b, c) = (probability(&mut rng, 3), probability(&mut rng, 3), probability(&mut rng, 3));
        let ab = mk(&a, &b, t);
        worst_grid = worst_grid.max((ab - brute_force_line(&a, &b)).abs());
        let ba = mk(&b, &a, t + 100);
        let (bc, ac) = (mk(&b, &c, t + 200), mk(&a, &c, t + 300));
        worst_metric = worst_metric.max((ab - ba).abs()).max(ac - ab - bc);
    }
    passed &= worst_grid <= tol::MK_RELATIVE && worst_metric <= tol::MK_METRIC;
    outcome(
        passed,
        format!("two-point rel err {worst_rel:.2e}; three-point vs grid {worst_grid:.2e}; symmetry/triangle {worst_metric:.2e}"),
    )
}

fn criterion_6() -> Outcome {
    let mut passed = true;
    let mut cases = 0;
    let mut worst_ratio: f64 = 0.0;
    for (q, p) in [(3, 1), (4, 1), (5, 2)] {
        let m = GroupActionModel::new(q, p).unwrap();
        for (n, w) in m.standard_weight_sequence().iter().enumerate() {
            for s in 1..=3 {
                let c = m.check_averaging_bound(w, s, 25, (100 * q + 10 * n + s) as u64).unwrap();
                passed &= c.violations == 0;
                cases += c.cases;
                if c.bound > 0.0 {
                    worst_ratio = worst_ratio.max(c.max_ratio / c.bound);
                }
            }
        }
    }
    passed &= cases >= 500;
    let m3 = GroupActionModel::new(3, 1).unwrap();
    let diam = finite_diameter_constant(&m3.ergodic_seminorm(), &m3.system(), 2, &SolverOptions::default(), 106).unwrap();
    let measured = sup_report(&diam).unwrap().value;
    passed &= diam.iter().all(|r| !r.infinite && r.value <= m3.eta() + tol::DIAMETER);
    let m5 = GroupActionModel::new(5, 2).unwrap();
    let (complete, idem) = m5.projection_residuals(10, 107);
    passed &= complete <= tol::PROJECTION && idem <= tol::PROJECTION;
    let family = m5.ergodic_seminorm();
    let mut defects = Vec::new();
    for (n, w) in m5.standard_weight_sequence().iter().enumerate() {
        let pair = m5.averaging_approximation(w).unwrap();
        let v = approximation_defect(&pair, &family, 1, &SolverOptions::default(), 108 + n as u64).unwrap()[0].value;
        passed &= v <= pair.epsilon().unwrap() + tol::MONOTONE;
        defects.push(v);
    }
    passed &= defects.windows(2).all(|d| d[1] <= d[0] + tol::MONOTONE);
    outcome(
        passed,
        format!(
            "{cases} averaging cases, worst ratio/bound {worst_ratio:.3}; diameter {measured:.6} <= eta {:.6}; projections {complete:.1e}/{idem:.1e}; Fejer defects {defects:.4?}",
            m3.eta()
        ),
    )
}

fn criterion_7() -> Outcome {
    let dirac = TorusDiracSeminorm::new(RationalTorus::new(2, 5).unwrap(), 16);
    let mut passed = true;
    let mut cases = 0;
    let mut worst: f64 = 0.0;
    for s in 1..=2 {
        let rep = check_action_vs_dirac(&dirac, s, 3, 50, 109 + s as u64);
        passed &= rep.passes();
        cases += rep.cases;
        worst = worst.max(rep.max_ratio);
    }
    let x = TorusPolynomial::random(2, 3, &mut rng_from_seed(110));
    let grids: Vec<_> = [8, 16, 32, 64].iter().map(|&g| dirac.with_grid(g).eval(&x)).collect();
    let refine = grids.windows(2).all(|w| w[1].value >= w[0].value - 1e-12 && w[1].value - w[0].value < w[0].error);
    passed &= refine && cases == 100;
    outcome(passed, format!("{cases} polynomials (degree 3, q = 5, s <= 2), worst ratio {worst:.3}; grid refinement {}", if refine { "monotone" } else { "broken" }))
}

fn criterion_8() -> Outcome {
    let factor = |q: usize, w: &dyn Fn(&GroupActionModel) -> Vec<f64>| {
        let m = GroupActionModel::new(q, 1).unwrap();
        let approx = m.averaging_approximation(&w(&m)).unwrap();
        FactorData { system: m.system(), family: m.ergodic_seminorm(), approx, diameter_constant: m.eta() }
    };
    let x = factor(2, &|m| vec![1.0; m.order()]);
    let y = factor(3, &|m| {
        let mut w = vec![0.5; m.order()];
        w[0] += 0.5 * m.order() as f64;
        w
    });
    let (ex, ey) = (x.approx.epsilon().unwrap(), y.approx.epsilon().unwrap());
    let mm = SeminormFamily::max(&SeminormFamily::tensor_left(&x.family, 3), &SeminormFamily::tensor_right(2, &y.family)).unwrap();
    let cert = tensor_product_certification(&x, &y, &mm, 1.0, 2, &SolverOptions::default(), 111).unwrap();
    let defect_ok = cert.defect.iter().all(|r| !r.infinite && r.value <= ex + ey + tol::TENSOR);
    let diam_bound = 2.0 * (x.diameter_constant + y.diameter_constant);
    let diam_ok = cert.diameter.iter().all(|r| !r.infinite && r.value <= diam_bound + tol::TENSOR);
    outcome(
        defect_ok && diam_ok,
        format!(
            "defect {:.6} <= {:.6}; diameter {:.6} <= {:.6} (s <= 2)",
            cert.measured_defect(),
            ex + ey,
            cert.measured_diameter(),
            diam_bound
        ),
    )
}

fn criterion_9() -> Outcome {
    let tasks = [
        serde_json::json!({"command": "axioms", "trials": 40, "kernel_level": 2}),
        serde_json::json!({"command": "mk-dist"}),
        serde_json::json!({"command": "diameter"}),
        serde_json::json!({"command": "defect"}),
        serde_json::json!({"command": "ergodic", "q": 3, "p": 1, "trials": 20, "max_level": 2, "diameter_level": 1}),
        serde_json::json!({"command": "torus", "q": 3, "p": 1, "degree": 1, "trials": 10, "refinements": 1}),
        serde_json::json!({"command": "product", "trials": 20, "max_level": 2}),
        serde_json::json!({"command": "tensor-certify"}),
        serde_json::json!({"command": "covering", "samples": 500}),
    ];
    let mut identical = 0;
    for (i, task) in tasks.iter().enumerate() {
        let cfg = ExperimentConfig {
            schema: SCHEMA_VERSION,
            experiment_id: format!("det{i}"),
            seed: 112,
            solver: SolverConfig::default(),
            task: serde_json::from_value(task.clone()).unwrap(),
        };
        let a = to_csv(&qms_cli::run(&cfg).unwrap()).unwrap();
        let b = to_csv(&qms_cli::run(&cfg).unwrap()).unwrap();
        identical += usize::from(a == b);
    }
    outcome(identical == tasks.len(), format!("{identical}/{} subcommands byte-identical on repeat", tasks.len()))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("operator seminorm axioms", criterion_1),
        ("kernel dimension identity", criterion_2),
        ("external product inequality", criterion_3),
        ("sampled vs exact tensor seminorm", criterion_4),
        ("Monge-Kantorovich solver", criterion_5),
        ("ergodic Weyl model", criterion_6),
        ("noncommutative torus", criterion_7),
        ("tensor certification", criterion_8),
        ("determinism", criterion_9),
    ];
    let mut failures = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = f();
        failures += usize::from(!o.passed);
        println!(
            "criterion {}: {} {name}: {} [{:.1}s]",
            i + 1,
            if o.passed { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
