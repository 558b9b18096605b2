use num_complex::Complex;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::solver::{maximize_ratio, maximize_ratio_from, HermitianChart, RatioObjective, SolverOptions, SolverReport};
use super::{chart_for, coord_gradient, lift_diagonal, realize, seminorm_with_gradient};
use crate::error::{dim_err, QmsError, Result};
use crate::linalg::{hermitian_eigen, kron, operator_norm, rank, top_singular_triplet};
use crate::opsys::{quotient_norm_warm, OperatorSystem, QuotientOptions};
use crate::rng::{child_rng, splitmix64};
use crate::seminorms::SeminormFamily;
use crate::tolerances::TOL;
use crate::{ComplexMatrix, C64};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApproxFlags {
    pub positive: bool,
    pub isometric: bool,
    pub completely_positive: bool,
}

/// Pair (ι, Φ) of unital maps 𝒳 → 𝒳 given by coordinate matrices in the working
/// basis, with Φ of finite rank. `epsilon` is an analytic defect bound when known
/// and `constant` the C of an (ε, C)-approximation.
#[derive(Clone, Debug)]
pub struct ApproxPair {
    system: OperatorSystem,
    iota: ComplexMatrix,
    phi: ComplexMatrix,
    rank: usize,
    epsilon: Option<f64>,
    constant: f64,
    flags: ApproxFlags,
}

impl ApproxPair {
    /// ι = inclusion, Φ given by its action on matrices of the system.
    pub fn from_map(system: OperatorSystem, map: impl Fn(&ComplexMatrix) -> ComplexMatrix, flags: ApproxFlags) -> Result<Self> {
        let m = system.dim();
        let mut phi = ComplexMatrix::zeros(m, m);
        for (l, h) in system.basis().iter().enumerate() {
            let img = map(h);
            let res = system.residual(&img);
            if res > TOL.hermitian * (1.0 + img.frobenius_norm()) {
                return Err(QmsError::NotInSystem { residual: res });
            }
            for (k, c) in system.coords(&img).into_iter().enumerate() {
                phi[(k, l)] = c;
            }
        }
        Self::from_coordinates(system.clone(), ComplexMatrix::identity(m), phi, flags)
    }

    pub fn from_coordinates(system: OperatorSystem, iota: ComplexMatrix, phi: ComplexMatrix, flags: ApproxFlags) -> Result<Self> {
        let m = system.dim();
        if [iota.rows(), iota.cols(), phi.rows(), phi.cols()].iter().any(|&x| x != m) {
            return dim_err(format!("coordinate matrices must be {m}x{m}"));
        }
        let unit = system.unit_coords();
        for (name, k) in [("ι", &iota), ("Φ", &phi)] {
            let img = k.mat_vec(unit);
            let err = img.iter().zip(unit).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            if err > TOL.hermitian {
                return Err(QmsError::InvalidArgument(format!("{name} is not unital (error {err:.3e})")));
            }
        }
        let rank = rank(&phi, TOL.rank_cutoff);
        let constant = if flags.isometric { 1.0 } else { operator_norm(&iota).max(1.0) };
        Ok(Self { system, iota, phi, rank, epsilon: None, constant, flags })
    }

    /// Records an analytic defect bound.
    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = Some(epsilon);
        self
    }

    pub fn with_constant(mut self, constant: f64) -> Self {
        self.constant = constant;
        self
    }

    pub fn system(&self) -> &OperatorSystem {
        &self.system
    }

    pub fn iota(&self) -> &ComplexMatrix {
        &self.iota
    }

    pub fn phi(&self) -> &ComplexMatrix {
        &self.phi
    }

    /// Dimension of Φ's image.
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn epsilon(&self) -> Option<f64> {
        self.epsilon
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn flags(&self) -> ApproxFlags {
        self.flags
    }

    /// (ι_X ⊗ ι_Y, Φ_X ⊗ Φ_Y) on 𝒳 ⊗ 𝒴.
    pub fn tensor(&self, other: &ApproxPair) -> ApproxPair {
        let system = self.system.tensor(&other.system);
        let phi = kron(&self.phi, &other.phi);
        let rank = rank(&phi, TOL.rank_cutoff);
        // Tensor products of positive maps need not be positive; of CP maps they are CP.
        let cp = self.flags.completely_positive && other.flags.completely_positive;
        ApproxPair {
            system,
            iota: kron(&self.iota, &other.iota),
            phi,
            rank,
            epsilon: None,
            constant: self.constant * other.constant,
            flags: ApproxFlags {
                positive: cp,
                isometric: self.flags.isometric && other.flags.isometric,
                completely_positive: cp,
            },
        }
    }

    /// Φ_s applied to coordinates at level s.
    pub fn apply_phi(&self, s: usize, c: &[C64]) -> Vec<C64> {
        apply_blockwise(&self.phi, s, c)
    }

    fn defect_matrix(&self) -> ComplexMatrix {
        &self.iota - &self.phi
    }
}

/// y_{ij} = K c_{ij} for every block (i, j).
fn apply_blockwise(k: &ComplexMatrix, s: usize, c: &[C64]) -> Vec<C64> {
    let m = k.cols();
    let mut out = Vec::with_capacity(s * s * k.rows());
    for blk in c.chunks(m) {
        out.extend(k.mat_vec(blk));
    }
    debug_assert_eq!(out.len(), s * s * k.rows());
    out
}

/// ‖y‖ for y = realization of K c, with gradient pulled back through K.
struct LinearNorm<'a> {
    system: &'a OperatorSystem,
    family: &'a SeminormFamily,
    k: ComplexMatrix,
    k_adj: ComplexMatrix,
    s: usize,
}

impl<'a> LinearNorm<'a> {
    fn new(system: &'a OperatorSystem, family: &'a SeminormFamily, k: ComplexMatrix, s: usize) -> Self {
        let k_adj = k.adjoint();
        Self { system, family, k, k_adj, s }
    }
}

fn rank_one(u: &[C64], w: &[C64]) -> ComplexMatrix {
    ComplexMatrix::from_fn(u.len(), w.len(), |i, j| u[i] * w[j].conj())
}

impl RatioObjective for LinearNorm<'_> {
    type Warm = ();

    fn numerator(&self, c: &[C64], _: &mut ()) -> (f64, Vec<C64>) {
        let y = realize(self.system, self.s, &apply_blockwise(&self.k, self.s, c));
        let (sigma, u, w) = top_singular_triplet(&y);
        let gy = coord_gradient(self.system, self.s, &rank_one(&u, &w));
        (sigma, apply_blockwise(&self.k_adj, self.s, &gy))
    }

    fn denominator(&self, c: &[C64]) -> (f64, Vec<C64>) {
        seminorm_with_gradient(self.family, self.system, self.s, c)
    }
}

/// Returns the kernel witness ratio when some κ ∈ ker 𝕃_s has N(κ) > 0.
fn kernel_witness(
    family: &SeminormFamily,
    sys: &OperatorSystem,
    s: usize,
    numerator: impl Fn(&[C64]) -> f64,
) -> Result<Option<f64>> {
    for kappa in family.kernel_basis(sys, s)? {
        let gap = numerator(kappa.coeffs());
        if gap > TOL.rank_cutoff * (1.0 + kappa.norm()) {
            let l = family.eval_element(&kappa)?;
            let witness = gap / l.max(f64::EPSILON * kappa.norm());
            if witness > TOL.infinite_ratio {
                return Ok(Some(witness));
            }
        }
    }
    Ok(None)
}

/// Smallest ε with ‖(ι − Φ)_s(x)‖ ≤ ε·𝕃_s(x), estimated per level s = 1..=max_level.
pub fn approximation_defect(
    pair: &ApproxPair,
    family: &SeminormFamily,
    max_level: usize,
    opts: &SolverOptions,
    seed: u64,
) -> Result<Vec<SolverReport>> {
    let sys = &pair.system;
    if family.ambient_dim() != sys.ambient_dim() {
        return dim_err("family and approximation live on different algebras");
    }
    let k = pair.defect_matrix();
    let mut lifted = LevelOneLift::default();
    (1..=max_level)
        .map(|s| {
            let level_seed = splitmix64(seed, s as u64);
            if k.max_abs() <= 1e-14 {
                return Ok(SolverReport { level: s, ..SolverReport::trivial(level_seed) });
            }
            let obj = LinearNorm::new(sys, family, k.clone(), s);
            let witness = kernel_witness(family, sys, s, |c| obj.numerator(c, &mut ()).0)?;
            if let Some(w) = witness {
                return Ok(SolverReport { level: s, ..SolverReport::infinite(w, level_seed) });
            }
            let chart = chart_for(family, sys, s)?;
            Ok(lifted.solve(&obj, &chart, opts, level_seed))
        })
        .collect()
}

/// Carries the level-1 maximizer x to level s as the extra start I_s ⊗ x. Both the
/// defect and the diameter ratios take the level-1 value there, so the estimates
/// are nondecreasing in s like the quantities they bound.
#[derive(Default)]
struct LevelOneLift {
    coeffs: Option<Vec<C64>>,
}

impl LevelOneLift {
    fn solve<O: RatioObjective>(&mut self, obj: &O, chart: &HermitianChart, opts: &SolverOptions, seed: u64) -> SolverReport {
        let s = chart.level();
        let starts: Vec<Vec<f64>> = match (&self.coeffs, s) {
            (Some(c1), 2..) => vec![chart.params(&lift_diagonal(c1, s))],
            _ => Vec::new(),
        };
        let (report, theta) = maximize_ratio_from(obj, chart, opts, seed, &starts);
        if s == 1 {
            self.coeffs = Some(chart.coeffs(&theta));
        }
        report
    }
}

/// Level-1 quotient norm (λ_max − λ_min)/2 of a Hermitian matrix with its gradient.
fn hermitian_spread(r: &ComplexMatrix) -> (f64, ComplexMatrix) {
    let e = hermitian_eigen(&r.hermitian_part()).expect("hermitian part");
    let n = e.eigenvalues.len();
    let (lo, hi) = (e.eigenvectors.col(0), e.eigenvectors.col(n - 1));
    let mut g = rank_one(&hi, &hi);
    g -= &rank_one(&lo, &lo);
    ((e.eigenvalues[n - 1] - e.eigenvalues[0]) / 2.0, g.scale_real(0.5))
}

#[derive(Default)]
struct ShiftWarm {
    shift: Option<ComplexMatrix>,
    calls: usize,
}

/// Quotient norm modulo M_s(ℂ) ⊗ I over 𝕃_s.
struct Diameter<'a> {
    system: &'a OperatorSystem,
    family: &'a SeminormFamily,
    s: usize,
}

impl Diameter<'_> {
    fn refresh(&self, r: &ComplexMatrix, warm: &mut ShiftWarm, opts: QuotientOptions) -> f64 {
        let rep = quotient_norm_warm(r, self.s, opts, warm.shift.as_ref());
        warm.shift = Some(rep.shift);
        rep.value
    }
}

impl RatioObjective for Diameter<'_> {
    type Warm = ShiftWarm;

    fn numerator(&self, c: &[C64], warm: &mut ShiftWarm) -> (f64, Vec<C64>) {
        let r = realize(self.system, self.s, c);
        if self.s == 1 {
            let (v, g) = hermitian_spread(&r);
            return (v, coord_gradient(self.system, 1, &g));
        }
        // Fixed shift between refreshes: ‖x − v ⊗ I‖ bounds the quotient norm from above
        // and its gradient at the optimal v is a subgradient of the quotient norm.
        if warm.shift.is_none() || warm.calls.is_multiple_of(10) {
            self.refresh(&r, warm, QuotientOptions::fast());
        }
        warm.calls += 1;
        let v = warm.shift.as_ref().expect("shift set");
        let y = &r - &kron(v, &ComplexMatrix::identity(self.system.ambient_dim()));
        let (sigma, u, w) = top_singular_triplet(&y);
        (sigma, coord_gradient(self.system, self.s, &rank_one(&u, &w)))
    }

    fn denominator(&self, c: &[C64]) -> (f64, Vec<C64>) {
        seminorm_with_gradient(self.family, self.system, self.s, c)
    }

    fn final_numerator(&self, c: &[C64], warm: &mut ShiftWarm) -> f64 {
        let r = realize(self.system, self.s, c);
        if self.s == 1 {
            return hermitian_spread(&r).0;
        }
        self.refresh(&r, warm, QuotientOptions::default())
    }
}

/// Smallest C with ‖[x]‖ ≤ C·𝕃_s(x) modulo scalar matrices, estimated per level.
pub fn finite_diameter_constant(
    family: &SeminormFamily,
    system: &OperatorSystem,
    max_level: usize,
    opts: &SolverOptions,
    seed: u64,
) -> Result<Vec<SolverReport>> {
    if family.ambient_dim() != system.ambient_dim() {
        return dim_err("family and system live on different algebras");
    }
    let mut lifted = LevelOneLift::default();
    (1..=max_level)
        .map(|s| {
            let level_seed = splitmix64(seed, s as u64);
            let obj = Diameter { system, family, s };
            let witness = kernel_witness(family, system, s, |c| {
                quotient_norm_warm(&realize(system, s, c), s, QuotientOptions::default(), None).value
            })?;
            if let Some(w) = witness {
                return Ok(SolverReport { level: s, ..SolverReport::infinite(w, level_seed) });
            }
            let chart = chart_for(family, system, s)?;
            Ok(lifted.solve(&obj, &chart, opts, level_seed))
        })
        .collect()
}

/// Norm on Φ's image used by the finite-diameter certificate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AuxNorm {
    /// ‖y − tr(y)/d · I‖_F, which dominates the quotient norm (E = 1).
    TracelessFrobenius,
    /// The quotient norm itself (E = 1).
    Quotient,
}

impl AuxNorm {
    fn eval(self, r: &ComplexMatrix) -> (f64, ComplexMatrix) {
        match self {
            AuxNorm::TracelessFrobenius => {
                let d = r.rows();
                let mut t = r.clone();
                t.axpy(-r.trace() / d as f64, &ComplexMatrix::identity(d));
                let v = t.frobenius_norm();
                if v == 0.0 {
                    (0.0, t)
                } else {
                    (v, t.scale_real(1.0 / v))
                }
            }
            AuxNorm::Quotient => hermitian_spread(r),
        }
    }

    /// Analytic constant E with ‖[y]‖ ≤ E·|||[y]|||.
    pub fn equivalence(self) -> f64 {
        1.0
    }
}

/// aux(Φ(x)) over 𝕃_1(x).
struct AuxRatio<'a> {
    pair: &'a ApproxPair,
    family: &'a SeminormFamily,
    aux: AuxNorm,
    phi_adj: ComplexMatrix,
}

impl RatioObjective for AuxRatio<'_> {
    type Warm = ();

    fn numerator(&self, c: &[C64], _: &mut ()) -> (f64, Vec<C64>) {
        let sys = &self.pair.system;
        let y = sys.combine(&self.pair.phi.mat_vec(c));
        let (v, g) = self.aux.eval(&y);
        (v, self.phi_adj.mat_vec(&sys.coords(&g)))
    }

    fn denominator(&self, c: &[C64]) -> (f64, Vec<C64>) {
        seminorm_with_gradient(self.family, &self.pair.system, 1, c)
    }
}

/// Quotient norm over aux on Φ's image, as a check of the analytic E.
struct Equivalence<'a> {
    pair: &'a ApproxPair,
    aux: AuxNorm,
    phi_adj: ComplexMatrix,
}

impl RatioObjective for Equivalence<'_> {
    type Warm = ();

    fn numerator(&self, c: &[C64], _: &mut ()) -> (f64, Vec<C64>) {
        let sys = &self.pair.system;
        let (v, g) = hermitian_spread(&sys.combine(&self.pair.phi.mat_vec(c)));
        (v, self.phi_adj.mat_vec(&sys.coords(&g)))
    }

    fn denominator(&self, c: &[C64]) -> (f64, Vec<C64>) {
        let sys = &self.pair.system;
        let (v, g) = self.aux.eval(&sys.combine(&self.pair.phi.mat_vec(c)));
        (v, self.phi_adj.mat_vec(&sys.coords(&g)))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiameterCertificate {
    /// Implied diameter constant C·(ε + D·E).
    pub constant: f64,
    /// Largest aux(Φ(x))/𝕃_1(x) found; at most the supplied D.
    pub measured_d: f64,
    /// Analytic E used in the constant.
    pub equivalence: f64,
    /// Largest quotient/aux ratio found on Φ's image; at most E.
    pub measured_equivalence: f64,
}

/// Finite diameter from an (ε, C)-approximation whose image is bounded by D·𝕃 in
/// an auxiliary norm: ‖[x]‖ ≤ C·(ε + D·E)·𝕃_1(x).
pub fn certify_finite_diameter_via_norm(
    pair: &ApproxPair,
    family: &SeminormFamily,
    aux: AuxNorm,
    d_bound: f64,
    opts: &SolverOptions,
    seed: u64,
) -> Result<DiameterCertificate> {
    let Some(eps) = pair.epsilon else {
        return Err(QmsError::InvalidArgument("approximation carries no defect bound".into()));
    };
    let sys = &pair.system;
    let phi_adj = pair.phi.adjoint();
    let obj = AuxRatio { pair, family, aux, phi_adj: phi_adj.clone() };
    if let Some(w) = kernel_witness(family, sys, 1, |c| obj.numerator(c, &mut ()).0)? {
        return Err(QmsError::HypothesisFailed { reason: "Φ is nonzero modulo scalars on ker 𝕃".into(), witness: w });
    }
    let chart = chart_for(family, sys, 1)?;
    let measured_d = maximize_ratio(&obj, &chart, opts, seed).0.value;
    if measured_d > d_bound + TOL.compare * (1.0 + d_bound) {
        return Err(QmsError::HypothesisFailed { reason: format!("aux(Φ(x)) exceeds {d_bound}·𝕃(x)"), witness: measured_d });
    }
    let eq = Equivalence { pair, aux, phi_adj };
    let measured_equivalence = image_chart(pair)
        .map(|c| maximize_ratio(&eq, &c, opts, splitmix64(seed, 1)).0.value)
        .unwrap_or(0.0);
    let e = aux.equivalence();
    Ok(DiameterCertificate { constant: pair.constant * (eps + d_bound * e), measured_d, equivalence: e, measured_equivalence })
}

/// Level-1 chart with the kernel of x ↦ aux(Φ(x)) removed; None when Φ is scalar valued.
fn image_chart(pair: &ApproxPair) -> Option<HermitianChart> {
    let sys = &pair.system;
    let m = sys.dim();
    // Both aux norms vanish exactly on Φ-preimages of scalars: the null space of (1 − P_unit)Φ.
    let unit = sys.unit_coords();
    let un: f64 = unit.iter().map(|u| u.norm_sqr()).sum();
    let proj = ComplexMatrix::from_fn(m, m, |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        Complex::new(delta, 0.0) - unit[i] * unit[j].conj() / un
    });
    let map = &proj * &pair.phi;
    let kernel = crate::linalg::null_space(&map, TOL.rank_cutoff);
    let chart = HermitianChart::new(1, m).with_kernel(&kernel);
    (chart.free_dim() > 0).then_some(chart)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoveringReport {
    pub epsilon: f64,
    pub samples: usize,
    /// Size of a greedy ε-separated net of the sampled quotient ball.
    pub net_size: usize,
}

/// Greedy ε-net of the image of the 𝕃_1 unit ball in the quotient by scalars.
///
/// Samples are uniform directions in the kernel complement scaled to 𝕃 = r with
/// r = U^{1/p}, p the free dimension, so they fill the ball rather than its boundary.
pub fn covering_diagnostic(
    family: &SeminormFamily,
    system: &OperatorSystem,
    epsilon: f64,
    samples: usize,
    seed: u64,
) -> Result<CoveringReport> {
    if !(epsilon > 0.0) {
        return Err(QmsError::InvalidArgument(format!("ε must be positive, got {epsilon}")));
    }
    let chart = chart_for(family, system, 1)?;
    if chart.free_dim() == 0 || samples == 0 {
        return Ok(CoveringReport { epsilon, samples, net_size: usize::from(samples > 0) });
    }
    let p = chart.free_dim() as f64;
    let points: Vec<ComplexMatrix> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = child_rng(seed, i as u64);
            let c = chart.coeffs(&chart.random_direction(&mut rng));
            let r = realize(system, 1, &c);
            let l = family.eval_unchecked(1, &r);
            let radius: f64 = rng.random::<f64>().powf(1.0 / p);
            r.scale_real(radius / l)
        })
        .collect();
    let mut net: Vec<&ComplexMatrix> = Vec::new();
    for x in &points {
        if net.iter().all(|c| hermitian_spread(&(x - *c)).0 > epsilon) {
            net.push(x);
        }
    }
    Ok(CoveringReport { epsilon, samples, net_size: net.len() })
}
