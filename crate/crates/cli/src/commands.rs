//! One function per subcommand, each producing a [`Report`].

use anyhow::{bail, Result};
use qms_core::Complex;

use qms_core::linalg::{hermitian_eigenvalues, pauli};
use qms_core::metrics::{
    approximation_defect, build_partition_approximation, covering_diagnostic, finite_diameter_constant, mk_distance,
    tensor_product_certification, ApproxPair, FactorData, FiniteMetricSpace, MkProblem,
};
use qms_core::models::{check_action_vs_dirac, GroupActionModel, RationalTorus, TorusDiracSeminorm, TorusPolynomial};
use qms_core::opsys::{OperatorSystem, UcpMap};
use qms_core::rng::{child_rng, splitmix64};
use qms_core::seminorms::SeminormFamily;
use qms_core::triples::{check_product_inequality, external_product, sample_triple, LipschitzTriple, Parity};

use crate::config::*;
use crate::report::Report;
use crate::ConfigInvalid;

fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(ConfigInvalid(msg.into()).into())
}

/// A model with its seminorm and an analytic upper bound on its diameter constant.
struct Model {
    system: OperatorSystem,
    family: SeminormFamily,
    diameter_bound: f64,
    kind: ModelKind,
}

enum ModelKind {
    Space(FiniteMetricSpace),
    Fuzzy(GroupActionModel),
}

fn build_model(spec: &ModelSpec) -> Result<Model> {
    let space = match spec {
        ModelSpec::MetricSpace { distances } => FiniteMetricSpace::new(distances.clone())?,
        ModelSpec::Points { points } => FiniteMetricSpace::euclidean(points)?,
        ModelSpec::FuzzyTorus { q, p } => {
            let m = GroupActionModel::new(*q, *p)?;
            return Ok(Model {
                system: m.system(),
                family: m.ergodic_seminorm(),
                diameter_bound: m.eta(),
                kind: ModelKind::Fuzzy(m),
            });
        }
    };
    // ‖f − c‖ ≤ (max f − min f)/2 ≤ L(f)·diam/2 for the midpoint c.
    Ok(Model {
        system: space.system(),
        family: space.lipschitz_seminorm(),
        diameter_bound: space.diameter() / 2.0,
        kind: ModelKind::Space(space),
    })
}

fn weights(m: &GroupActionModel, spec: &ApproxSpec) -> Result<Vec<f64>> {
    Ok(match spec {
        ApproxSpec::Uniform => vec![1.0; m.order()],
        ApproxSpec::PointMass => {
            let mut w = vec![0.0; m.order()];
            w[0] = m.order() as f64;
            w
        }
        ApproxSpec::Fejer { order } => {
            if *order > (m.q() - 1) / 2 {
                return invalid(format!("Fejér order must be at most {}", (m.q() - 1) / 2));
            }
            m.fejer_weights(*order)
        }
        ApproxSpec::Explicit { values } => values.clone(),
        ApproxSpec::Partition { .. } => return invalid("partition approximations need a metric space"),
    })
}

fn approx_pair(model: &Model, spec: &ApproxSpec) -> Result<ApproxPair> {
    match (&model.kind, spec) {
        (ModelKind::Space(s), ApproxSpec::Partition { epsilon }) => Ok(build_partition_approximation(s, *epsilon)?.pair),
        (ModelKind::Space(_), _) => invalid("metric spaces take a partition approximation"),
        (ModelKind::Fuzzy(m), spec) => Ok(m.averaging_approximation(&weights(m, spec)?)?),
    }
}

fn probability_state(p: &[f64]) -> Result<UcpMap> {
    if p.iter().any(|x| !(*x >= 0.0)) || (p.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return invalid("states must be probability vectors");
    }
    Ok(UcpMap::vector_state(&p.iter().map(|x| Complex::new(x.sqrt(), 0.0)).collect::<Vec<_>>())?)
}

fn within(value: f64, bound: f64, tol: f64) -> bool {
    value <= bound + tol * (1.0 + bound.abs())
}

pub fn axioms(t: &AxiomsTask, r: &mut Report, solver: &SolverConfig) -> Result<()> {
    let m = GroupActionModel::new(t.q, t.p)?;
    let sys = m.system();
    let (u, v) = (m.clock(), m.shift());
    let dirac = &(u + &u.adjoint()) + &(v + &v.adjoint());
    let action = m.ergodic_seminorm();
    let commutator = SeminormFamily::commutator(&dirac)?;
    let stabilized = SeminormFamily::stabilized(&action, 2);
    let max = SeminormFamily::max(&action, &commutator)?;
    let amplified = sys.matrix_amplification(2);
    let cases = [
        ("action", &action, &sys),
        ("commutator", &commutator, &sys),
        ("stabilized", &stabilized, &amplified),
        ("max", &max, &sys),
    ];
    let tol = solver.tolerance;
    for (i, (name, family, system)) in cases.iter().enumerate() {
        let rep = family.check_axioms(system, t.max_level, t.trials, splitmix64(r.seed, i as u64))?;
        for (q, v) in [
            ("direct_sum_residual", rep.direct_sum_max_residual),
            ("bimodule_violation", rep.bimodule_violation),
            ("star_residual", rep.star_residual),
            ("scalar_residual", rep.scalar_residual),
            ("entrywise_violation", rep.entrywise_violation),
        ] {
            r.row(None, format!("{name}.{q}"), v, Some(tol), "residual");
        }
        r.check(format!("{name}.axioms"), rep.passes(tol), format!("{} cases", rep.cases));
    }
    for (name, family) in [("action", &action), ("commutator", &commutator)] {
        let k1 = family.kernel_basis(&sys, 1)?.len();
        for s in 1..=t.kernel_level {
            let ks = family.kernel_basis(&sys, s)?.len();
            let want = s * s * k1;
            r.row(Some(s), format!("{name}.kernel_dim"), ks as f64, Some(want as f64), "exact");
            r.check(format!("{name}.kernel_dim[s={s}]"), ks == want, format!("{ks} vs {want}"));
        }
    }
    Ok(())
}

pub fn mk_dist(t: &MkTask, r: &mut Report, solver: &SolverConfig) -> Result<()> {
    let model = build_model(&t.space)?;
    let ModelKind::Space(space) = &model.kind else {
        return invalid("mk-dist takes a metric space");
    };
    if t.phi.len() != space.len() || t.psi.len() != space.len() {
        return invalid("one probability per point");
    }
    let problem = MkProblem::new(model.family, model.system, probability_state(&t.phi)?, probability_state(&t.psi)?)?;
    let expected = t.expected.or_else(|| (space.len() == 2).then(|| space.distance(0, 1) * (t.phi[0] - t.psi[0]).abs()));
    let rep = mk_distance(&problem, &solver.options(), r.seed)?;
    r.solver("mk_distance", &rep, expected);
    if let Some(e) = expected {
        let err = (rep.value - e).abs() / e.abs().max(f64::MIN_POSITIVE);
        r.check("mk_distance.reference", err <= 1e-3 || (rep.value - e).abs() <= 1e-12, format!("relative error {err:.3e}"));
    }
    Ok(())
}

pub fn diameter(t: &DiameterTask, r: &mut Report, solver: &SolverConfig) -> Result<()> {
    let model = build_model(&t.model)?;
    let reps = finite_diameter_constant(&model.family, &model.system, t.max_level, &solver.options(), r.seed)?;
    for rep in &reps {
        r.solver("diameter_constant", rep, Some(model.diameter_bound));
        r.check(
            format!("diameter_constant[s={}]", rep.level),
            !rep.infinite && within(rep.value, model.diameter_bound, solver.tolerance),
            format!("{} vs {}", rep.value, model.diameter_bound),
        );
    }
    Ok(())
}

pub fn defect(t: &DefectTask, r: &mut Report, solver: &SolverConfig) -> Result<()> {
    let model = build_model(&t.model)?;
    let pair = approx_pair(&model, &t.approx)?;
    let eps = pair.epsilon();
    let reps = approximation_defect(&pair, &model.family, t.max_level, &solver.options(), r.seed)?;
    for rep in &reps {
        r.solver("defect", rep, eps);
        if let Some(e) = eps {
            r.check(format!("defect[s={}]", rep.level), !rep.infinite && within(rep.value, e, solver.tolerance), format!("{} vs {e}", rep.value));
        }
    }
    r.row(None, "rank", pair.rank() as f64, None, "exact");
    Ok(())
}

pub fn ergodic(t: &ErgodicTask, r: &mut Report, solver: &SolverConfig) -> Result<()> {
    let m = GroupActionModel::new(t.q, t.p)?;
    let tol = solver.tolerance;
    let opts = solver.options();
    let fixed = m.fixed_point_dim();
    r.row(None, "fixed_point_dim", fixed as f64, Some(1.0), "exact");
    r.check("ergodicity", (fixed == 1) == qms_core::models::is_coprime(t.p, t.q), format!("dim {fixed}"));
    for (q, v) in [("commutation_residual", m.commutation_residual()), ("action_residual", m.action_residual())] {
        r.row(None, q, v, Some(1e-10), "residual");
        r.check(q, v <= 1e-10, format!("{v:.3e}"));
    }
    let (complete, idem) = m.projection_residuals(8, r.seed);
    r.row(None, "projection_completeness", complete, Some(1e-10), "residual");
    r.row(None, "projection_idempotence", idem, Some(1e-10), "residual");
    r.check("spectral_projections", complete <= 1e-10 && idem <= 1e-10, format!("{complete:.3e}, {idem:.3e}"));

    let family = m.ergodic_seminorm();
    let mut defects = Vec::new();
    for (n, w) in m.standard_weight_sequence().iter().enumerate() {
        let pair = m.averaging_approximation(w)?;
        let eps = m.averaging_bound(w);
        let rep = &approximation_defect(&pair, &family, 1, &opts, splitmix64(r.seed, 10 + n as u64))?[0];
        r.solver(&format!("fejer_defect_n{n}"), rep, Some(eps));
        r.check(format!("fejer_defect_n{n}"), within(rep.value, eps, tol), format!("{} vs {eps}", rep.value));
        defects.push(rep.value);
        for s in 1..=t.max_level {
            let c = m.check_averaging_bound(w, s, t.trials, splitmix64(r.seed, 100 * (n as u64 + 1) + s as u64))?;
            r.row(Some(s), format!("averaging_ratio_n{n}"), c.max_ratio, Some(c.bound), "lower_bound");
            r.check(format!("averaging_bound_n{n}[s={s}]"), c.violations == 0, format!("{} violations in {}", c.violations, c.cases));
        }
    }
    let monotone = defects.windows(2).all(|d| d[1] <= d[0] + tol);
    r.check("fejer_defect_monotone", monotone, format!("{defects:?}"));

    let eta = m.eta();
    for rep in &finite_diameter_constant(&family, &m.system(), t.diameter_level, &opts, splitmix64(r.seed, 7))? {
        r.solver("diameter_constant", rep, Some(eta));
        r.check(format!("diameter_constant[s={}]", rep.level), !rep.infinite && within(rep.value, eta, tol), format!("{} vs η = {eta}", rep.value));
    }
    Ok(())
}

pub fn torus(t: &TorusTask, r: &mut Report, _solver: &SolverConfig) -> Result<()> {
    let torus = RationalTorus::new(t.p, t.q)?;
    if t.degree < 0 {
        return invalid("degree must be nonnegative");
    }
    let dirac = TorusDiracSeminorm::new(torus, t.grid);
    for s in 1..=t.max_level {
        let rep = check_action_vs_dirac(&dirac, s, t.degree, t.trials, splitmix64(r.seed, s as u64));
        r.row(Some(s), "action_ratio", rep.max_ratio, Some(1.0), "lower_bound");
        r.row(Some(s), "component_ratio", rep.max_component_ratio, Some(1.0), "lower_bound");
        r.check(format!("action_vs_dirac[s={s}]"), rep.violations == 0, format!("{} violations in {}", rep.violations, rep.cases));
        r.check(format!("component_bound[s={s}]"), rep.component_violations == 0, format!("{} violations in {}", rep.component_violations, rep.cases));
    }
    let x = TorusPolynomial::random(1, t.degree, &mut child_rng(r.seed, 0));
    let grids: Vec<_> = (0..=t.refinements).map(|k| dirac.with_grid(t.grid << k).eval(&x)).collect();
    for g in &grids {
        r.row(None, format!("dirac_grid_{}", g.grid), g.value, Some(g.upper()), "lower_bound");
    }
    let refines = grids.windows(2).all(|w| w[1].value >= w[0].value - 1e-12 && w[1].value - w[0].value <= w[0].error);
    r.check("grid_refinement", refines, "nested grids increase within the certified error");
    let u1 = dirac.eval(&TorusPolynomial::monomial(1, (1, 0))).value;
    r.row(None, "dirac_u1", u1, Some(1.0), "exact");
    r.check("dirac_u1", (u1 - 1.0).abs() <= 1e-12, format!("{u1}"));
    Ok(())
}

pub fn product(t: &ProductTask, r: &mut Report, solver: &SolverConfig) -> Result<()> {
    if !t.dim.is_multiple_of(2) || t.dim == 0 {
        return invalid("product factors need an even Hilbert dimension");
    }
    let cases = [(Parity::Even, Parity::Even), (Parity::Even, Parity::Odd), (Parity::Odd, Parity::Even), (Parity::Odd, Parity::Odd)];
    for (i, (p1, p2)) in cases.into_iter().enumerate() {
        let mut rng = child_rng(r.seed, i as u64);
        let t1 = sample_triple(t.dim, p1, &mut rng)?;
        let t2 = sample_triple(t.dim, p2, &mut rng)?;
        let prod = external_product(&t1, &t2)?;
        let name = format!("{:?}", prod.parity_case()).to_lowercase();
        for s in 1..=t.max_level {
            let rep = check_product_inequality(&prod, s, t.trials, splitmix64(r.seed, 10 * i as u64 + s as u64));
            r.row(Some(s), format!("{name}.left_violation"), rep.max_left_violation, Some(solver.tolerance), "residual");
            r.row(Some(s), format!("{name}.right_violation"), rep.max_right_violation, Some(solver.tolerance), "residual");
            r.row(Some(s), format!("{name}.recovery_residual"), rep.max_recovery_residual, Some(solver.tolerance), "residual");
            r.row(Some(s), format!("{name}.min_ratio"), rep.min_ratio, Some(1.0), "lower_bound");
            r.check(format!("{name}.inequality[s={s}]"), rep.passes(solver.tolerance), format!("{} cases", rep.cases));
        }
        r.row(None, format!("{name}.grading_residual"), prod.result().grading_residual(), Some(1e-10), "residual");
        r.check(format!("{name}.grading"), prod.result().grading_residual() <= 1e-10, "");
    }
    // (ℂ², σ₁, σ₃) × itself: D² = 2, spectrum {±√2}.
    let [x, _, z] = pauli::<f64>();
    let sigma = LipschitzTriple::even(OperatorSystem::diagonal(2), x, z)?;
    let prod = external_product(&sigma, &sigma)?;
    let root2 = 2f64.sqrt();
    let ev = hermitian_eigenvalues(prod.result().dirac())?;
    let mut ok = ev.len() == 4;
    for (e, want) in ev.iter().zip([-root2, -root2, root2, root2]) {
        r.row(None, "sigma_spectrum", *e, Some(want), "exact");
        ok &= (e - want).abs() <= 1e-10;
    }
    r.check("sigma_spectrum", ok, format!("{ev:?}"));
    Ok(())
}

fn fuzzy_factor(f: &FuzzyFactor) -> Result<FactorData> {
    let m = GroupActionModel::new(f.q, f.p)?;
    let approx = m.averaging_approximation(&weights(&m, &f.approx)?)?;
    Ok(FactorData { system: m.system(), family: m.ergodic_seminorm(), approx, diameter_constant: m.eta() })
}

pub fn tensor_certify(t: &TensorTask, r: &mut Report, solver: &SolverConfig) -> Result<()> {
    let (x, y) = (fuzzy_factor(&t.first)?, fuzzy_factor(&t.second)?);
    let mm = SeminormFamily::max(
        &SeminormFamily::tensor_left(&x.family, y.system.ambient_dim()),
        &SeminormFamily::tensor_right(x.system.ambient_dim(), &y.family),
    )?;
    let cert = tensor_product_certification(&x, &y, &mm, 1.0, t.max_level, &solver.options(), r.seed)?;
    r.row(None, "hypothesis_ratio", cert.hypothesis_ratio, Some(1.0), "lower_bound");
    for rep in &cert.defect {
        r.solver("tensor_defect", rep, Some(cert.defect_bound));
    }
    for rep in &cert.diameter {
        r.solver("tensor_diameter", rep, Some(cert.diameter_bound));
    }
    r.check("tensor_defect", cert.defect_passes(), format!("{} vs {}", cert.measured_defect(), cert.defect_bound));
    r.check("tensor_diameter", cert.diameter_passes(), format!("{} vs {}", cert.measured_diameter(), cert.diameter_bound));
    Ok(())
}

pub fn covering(t: &CoveringTask, r: &mut Report, _solver: &SolverConfig) -> Result<()> {
    let model = build_model(&t.model)?;
    let mut eps = t.epsilons.clone();
    if eps.is_empty() || eps.iter().any(|e| !(*e > 0.0)) {
        return invalid("epsilons must be positive");
    }
    eps.sort_by(f64::total_cmp);
    let mut sizes = Vec::new();
    for (i, e) in eps.iter().enumerate() {
        let rep = covering_diagnostic(&model.family, &model.system, *e, t.samples, splitmix64(r.seed, i as u64))?;
        // On a two-point space the quotient ball is a segment of length ρ.
        let bound = match &model.kind {
            ModelKind::Space(s) if s.len() == 2 => Some((s.distance(0, 1) / e).floor() + 1.0),
            _ => None,
        };
        r.row(None, format!("net_size_eps_{}", crate::report::fmt12(*e)), rep.net_size as f64, bound, "sampled");
        if let Some(b) = bound {
            let lower = (model.diameter_bound * 2.0 / (2.0 * e)).ceil();
            r.check(format!("net_size[eps={e}]"), rep.net_size as f64 >= lower && rep.net_size as f64 <= b, format!("{} in [{lower}, {b}]", rep.net_size));
        }
        sizes.push(rep.net_size);
    }
    r.check("net_size_monotone", sizes.windows(2).all(|w| w[1] <= w[0]), format!("{sizes:?}"));
    Ok(())
}

/// Checks the task parameters that the core does not validate itself.
pub fn validate(task: &Task) -> Result<()> {
    let level = |s: usize, max: usize, what: &str| if s == 0 || s > max { invalid(format!("{what} must be in 1..={max}")) } else { Ok(()) };
    match task {
        Task::Axioms(t) => {
            level(t.max_level, 8, "max_level")?;
            if t.max_level < 2 {
                bail!(ConfigInvalid("axioms needs max_level >= 2".into()));
            }
            level(t.kernel_level, 4, "kernel_level")
        }
        Task::Diameter(t) => level(t.max_level, 4, "max_level"),
        Task::Defect(t) => level(t.max_level, 4, "max_level"),
        Task::Ergodic(t) => level(t.max_level, 4, "max_level").and(level(t.diameter_level, 4, "diameter_level")),
        Task::Torus(t) => level(t.max_level, 4, "max_level").and(if t.grid == 0 { invalid("grid must be positive") } else { Ok(()) }),
        Task::Product(t) => level(t.max_level, 4, "max_level"),
        Task::TensorCertify(t) => level(t.max_level, 3, "max_level"),
        Task::MkDist(_) | Task::Covering(_) => Ok(()),
    }
}

pub fn dispatch(task: &Task, r: &mut Report, solver: &SolverConfig) -> Result<()> {
    validate(task)?;
    match task {
        Task::Axioms(t) => axioms(t, r, solver),
        Task::MkDist(t) => mk_dist(t, r, solver),
        Task::Diameter(t) => diameter(t, r, solver),
        Task::Defect(t) => defect(t, r, solver),
        Task::Ergodic(t) => ergodic(t, r, solver),
        Task::Torus(t) => torus(t, r, solver),
        Task::Product(t) => product(t, r, solver),
        Task::TensorCertify(t) => tensor_certify(t, r, solver),
        Task::Covering(t) => covering(t, r, solver),
    }
}
