//! Suite orchestration: seeded instance generation for every identity
//! family, a single `run_identity` entry point used by the CLI and the
//! acceptance tests, and the near-tolerance re-run policy.
//!
//! Instance generation is deterministic: every draw comes from a ChaCha
//! stream keyed by `(identity, seed)`, so a `(identity, seed, q)` triple
//! names one reproducible check.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::time::{Duration, Instant};

use crate::engine::{
    gen_balanced_params, BalanceKind, FlavorParam, ModulusProfile, ParameterSet, ResidualReport,
};
use crate::error::{QError, QResult};
use crate::identities::{
    check_classical_limit, check_irf_ybe, check_star_star, check_star_triangle,
    check_sum_integral, check_v_consistency, check_we7_transformation, StarStarForm,
};
use crate::qkernel::QContext;
use crate::weights::{SignConvention, Spin};

/// The identities the suite can verify, with their CLI tags.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum IdentityTag {
    /// `star-triangle`
    StarTriangle,
    /// `sum-integral`
    SumIntegral,
    /// `we7` (transformation identity of the multivariate integral)
    We7,
    /// `v-consistency`
    VConsistency,
    /// `star-star`
    StarStar,
    /// `irf-ybe`
    IrfYbe,
    /// `classical-limit`
    ClassicalLimit,
}

impl IdentityTag {
    /// All tags, in suite order.
    pub const ALL: [IdentityTag; 7] = [
        IdentityTag::StarTriangle,
        IdentityTag::SumIntegral,
        IdentityTag::We7,
        IdentityTag::VConsistency,
        IdentityTag::StarStar,
        IdentityTag::IrfYbe,
        IdentityTag::ClassicalLimit,
    ];

    /// The CLI tag string.
    pub fn as_str(self) -> &'static str {
        match self {
            IdentityTag::StarTriangle => "star-triangle",
            IdentityTag::SumIntegral => "sum-integral",
            IdentityTag::We7 => "we7",
            IdentityTag::VConsistency => "v-consistency",
            IdentityTag::StarStar => "star-star",
            IdentityTag::IrfYbe => "irf-ybe",
            IdentityTag::ClassicalLimit => "classical-limit",
        }
    }

    /// Parse a CLI tag.
    pub fn parse(s: &str) -> QResult<Self> {
        Self::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| {
                QError::Precondition(format!(
                    "unknown identity '{s}'; expected one of {}",
                    Self::ALL.map(|t| t.as_str()).join(", ")
                ))
            })
    }

    /// Per-identity stream key for instance generation.
    fn stream_key(self) -> u64 {
        match self {
            IdentityTag::StarTriangle => 0x5354_5249,
            IdentityTag::SumIntegral => 0x5355_4d49,
            IdentityTag::We7 => 0x5745_3737,
            IdentityTag::VConsistency => 0x5643_4f4e,
            IdentityTag::StarStar => 0x5353_5441,
            IdentityTag::IrfYbe => 0x5942_4521,
            IdentityTag::ClassicalLimit => 0x434c_4c4d,
        }
    }

    /// Wall-clock budget for one check of this identity.
    pub fn budget(self) -> Duration {
        match self {
            IdentityTag::IrfYbe => Duration::from_secs(30 * 60),
            _ => Duration::from_secs(2 * 60),
        }
    }
}

/// Options for one suite run.
#[derive(Clone, Debug)]
pub struct RunOptions {
    /// Sign convention for the relations that depend on one.
    pub sign: SignConvention,
    /// Rank for the transformation identity.
    pub n: usize,
    /// Override for the context's quadrature node count.
    pub nodes: Option<usize>,
    /// Override for the context's bilateral truncation.
    pub mmax: Option<i64>,
    /// Override for the context's relative tolerance.
    pub tol: Option<f64>,
    /// Wall-clock budget override.
    pub budget: Option<Duration>,
    /// Outer inner-spin charge window for the IRF Yang-Baxter check.
    pub h_max: i64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            sign: SignConvention::EtaMinusAlpha,
            n: 1,
            nodes: None,
            mmax: None,
            tol: None,
            budget: None,
            h_max: 8,
        }
    }
}

/// One line of a verification report: the instance coordinates plus the
/// two-sided residual record.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerifyRecord {
    /// Identity tag.
    pub identity: String,
    /// Instance seed.
    pub seed: u64,
    /// Nome.
    pub q: f64,
    /// Continuous/discrete parameters of the generated instance.
    pub params: Vec<FlavorParam>,
    /// The residual record.
    #[serde(flatten)]
    pub report: ResidualReport,
}

/// Build the evaluation context for a run.
pub fn build_context(q: f64, opts: &RunOptions) -> QResult<QContext> {
    let mut ctx = QContext::new(q)?;
    if let Some(n) = opts.nodes {
        ctx.quad_points = n;
    }
    if let Some(m) = opts.mmax {
        ctx.sum_m_max = m;
    }
    if let Some(t) = opts.tol {
        ctx.rel_tol = t;
    }
    ctx.validate()?;
    Ok(ctx)
}

fn rng_for(tag: IdentityTag, seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ tag.stream_key())
}

fn draw_spin(rng: &mut ChaCha8Rng, max_charge: i64) -> Spin {
    Spin::new(
        rng.gen_range(0.0..std::f64::consts::TAU),
        rng.gen_range(-max_charge..=max_charge),
    )
}

/// Deterministic star-triangle instance: spectral values `alpha_i = eta u_i /
/// sum u` with `u_i` uniform in `(0.5, 1)` (keeping every induced exponent
/// safely inside the kernel domain) and three random spins.
pub fn gen_star_triangle_instance(
    seed: u64,
    sign: SignConvention,
) -> ((f64, f64, f64), [Spin; 3]) {
    let mut rng = rng_for(IdentityTag::StarTriangle, seed);
    let u: [f64; 3] = [
        rng.gen_range(0.5..1.0),
        rng.gen_range(0.5..1.0),
        rng.gen_range(0.5..1.0),
    ];
    let total: f64 = u.iter().sum();
    let eta = sign.eta();
    let a = eta * u[0] / total;
    let b = eta * u[1] / total;
    let g = eta - a - b;
    let spins = [draw_spin(&mut rng, 2), draw_spin(&mut rng, 2), draw_spin(&mut rng, 2)];
    ((a, b, g), spins)
}

/// Deterministic star-star instance: four spectral values summing to the
/// printed normalization 2, plus four corner spins.
pub fn gen_star_star_instance(seed: u64) -> ([f64; 4], [Spin; 4]) {
    let mut rng = rng_for(IdentityTag::StarStar, seed);
    // Draws in (0.7, 1) keep every inner-star spectral value >= ~0.095 after
    // rescaling, which keeps the integrand poles far enough from the contour
    // for the 1e-6 residual target.
    let u: [f64; 4] = std::array::from_fn(|_| rng.gen_range(0.7..1.0));
    let total: f64 = u.iter().sum();
    let mut s = u.map(|v| 2.0 * v / total);
    // Absorb rounding so the sum is exactly 2.
    let correction: f64 = 2.0 - s.iter().sum::<f64>();
    s[3] += correction;
    let spins = std::array::from_fn(|_| draw_spin(&mut rng, 2));
    (s, spins)
}

/// Deterministic IRF Yang-Baxter instance: three rapidity pairs with small
/// offsets (face spectral values stay inside the kernel domain) and six
/// corner spins with small charges (cost control).
pub fn gen_ybe_instance(seed: u64) -> ([(f64, f64); 3], [Spin; 6]) {
    let mut rng = rng_for(IdentityTag::IrfYbe, seed);
    // Offsets within +/- 0.02 keep every face exponent at least ~0.12 away
    // from the contour pole ladder, so 64-node quadrature resolves it.
    let mut t = || rng.gen_range(-0.02..0.02);
    let pairs = [(t(), t()), (t(), t()), (t(), t())];
    let spins = std::array::from_fn(|_| draw_spin(&mut rng, 1));
    (pairs, spins)
}

/// Deterministic classical-limit instance: spectral gap `alpha - eta` in
/// `(1.1, 1.6)` (pole-free gamma arguments for charges up to 2) and two
/// coordinate spins.
pub fn gen_classical_instance(seed: u64) -> (f64, f64, (f64, i64), (f64, i64)) {
    let mut rng = rng_for(IdentityTag::ClassicalLimit, seed);
    let eta = -0.5;
    let alpha = eta + rng.gen_range(1.1..1.6);
    let x = (rng.gen_range(-0.5..0.5), rng.gen_range(-1i64..=1));
    let y = (rng.gen_range(-0.5..0.5), rng.gen_range(-1i64..=1));
    (alpha, eta, x, y)
}

/// Generate the balanced parameter set for the flavor-based identities.
pub fn gen_instance_params(tag: IdentityTag, seed: u64, q: f64, n: usize) -> QResult<ParameterSet> {
    let profile = ModulusProfile::default();
    match tag {
        IdentityTag::SumIntegral => {
            gen_balanced_params(seed, BalanceKind::SixFlavor, 1, q, &profile)
        }
        IdentityTag::We7 => gen_balanced_params(seed, BalanceKind::Transform, n, q, &profile),
        IdentityTag::VConsistency => {
            gen_balanced_params(seed, BalanceKind::Transform, 2, q, &profile)
        }
        _ => Err(QError::Precondition(format!(
            "{} does not use a balanced flavor set",
            tag.as_str()
        ))),
    }
}

/// Whether a residual sits within one decade of the pass/fail boundary and
/// therefore triggers the doubled-settings re-run.
fn near_tolerance(rel_residual: f64, rel_tol: f64) -> bool {
    rel_residual.is_finite() && rel_residual > rel_tol / 10.0 && rel_residual < rel_tol * 10.0
}

/// Context with doubled resolution settings for the re-run policy.
fn doubled(ctx: &QContext, tag: IdentityTag) -> QContext {
    let mut out = ctx.clone();
    out.sum_m_max *= 2;
    if tag != IdentityTag::IrfYbe {
        // Doubling the contour too would make the YBE re-run ~16x the cost of
        // the first pass; its quadrature is already spectrally converged.
        out.quad_points *= 2;
        out.product_truncation *= 2;
    }
    out
}

/// Run one identity check at `(seed, q)` and return its report line.
///
/// If the first evaluation lands within a decade of the tolerance boundary,
/// the check re-runs once with doubled resolution settings and reports that
/// verdict (flagged `doubled-settings`).
pub fn run_identity(
    tag: IdentityTag,
    seed: u64,
    q: f64,
    opts: &RunOptions,
) -> QResult<VerifyRecord> {
    let ctx = build_context(q, opts)?;
    let (report, params) = run_once(tag, seed, q, &ctx, opts)?;
    let (report, params) = if near_tolerance(report.rel_residual, ctx.rel_tol) {
        let ctx2 = doubled(&ctx, tag);
        let (mut r2, p2) = run_once(tag, seed, q, &ctx2, opts)?;
        r2.convention_flags.push("doubled-settings".into());
        (r2, p2)
    } else {
        (report, params)
    };
    Ok(VerifyRecord {
        identity: tag.as_str().into(),
        seed,
        q,
        params,
        report,
    })
}

fn spin_params(spins: &[Spin]) -> Vec<FlavorParam> {
    spins
        .iter()
        .map(|s| FlavorParam {
            modulus: 1.0,
            phase: s.theta,
            charge: s.charge,
        })
        .collect()
}

fn run_once(
    tag: IdentityTag,
    seed: u64,
    q: f64,
    ctx: &QContext,
    opts: &RunOptions,
) -> QResult<(ResidualReport, Vec<FlavorParam>)> {
    match tag {
        IdentityTag::StarTriangle => {
            let ((a, b, g), spins) = gen_star_triangle_instance(seed, opts.sign);
            let report =
                check_star_triangle(a, b, g, [&spins[0], &spins[1], &spins[2]], opts.sign, ctx)?;
            Ok((report, spin_params(&spins)))
        }
        IdentityTag::SumIntegral => {
            let params = gen_instance_params(tag, seed, q, 1)?;
            let report = check_sum_integral(&params, ctx)?;
            Ok((report, params.flavors))
        }
        IdentityTag::We7 => {
            let params = gen_instance_params(tag, seed, q, opts.n)?;
            let report = check_we7_transformation(&params, ctx)?;
            Ok((report, params.flavors))
        }
        IdentityTag::VConsistency => {
            let params = gen_instance_params(tag, seed, q, 2)?;
            let report = check_v_consistency(&params, ctx)?;
            Ok((report, params.flavors))
        }
        IdentityTag::StarStar => {
            let (s, spins) = gen_star_star_instance(seed);
            let corners: Vec<crate::weights::MultiSpin> = spins
                .iter()
                .map(|sp| crate::weights::MultiSpin::new(vec![*sp]).unwrap())
                .collect();
            let report = check_star_star(
                s,
                [&corners[0], &corners[1], &corners[2], &corners[3]],
                opts.sign,
                StarStarForm::StrDerived,
                ctx,
            )?;
            Ok((report, spin_params(&spins)))
        }
        IdentityTag::IrfYbe => {
            let (pairs, spins) = gen_ybe_instance(seed);
            let budget = opts.budget.unwrap_or_else(|| tag.budget());
            // On coarse settings the inner face sums can only certify a tail
            // of roughly q^(mmax - h_max/2); accept tails a factor five under
            // the residual tolerance instead of the default 1e-14 (tighter
            // would fail the certificate, looser would stop the sums early
            // and spend the whole error budget on truncation).
            let mut ybe_ctx = ctx.clone();
            ybe_ctx.tail_tol = ybe_ctx.tail_tol.max(ybe_ctx.rel_tol / 5.0);
            let report = check_irf_ybe(
                pairs,
                [&spins[0], &spins[1], &spins[2], &spins[3], &spins[4], &spins[5]],
                opts.sign,
                opts.h_max,
                budget,
                &ybe_ctx,
            )?;
            Ok((report, spin_params(&spins)))
        }
        IdentityTag::ClassicalLimit => {
            let t0 = Instant::now();
            let (alpha, eta, x, y) = gen_classical_instance(seed);
            let cl = check_classical_limit(alpha, eta, x, y, 4..=10, ctx)?;
            // Lossy projection into the common record shape: the "residual"
            // is the final deviation of the q -> 1 sequence.
            let mut flags = cl.convention_flags.clone();
            flags.push("metric=final-deviation".into());
            flags.push(format!("monotone={}", cl.monotone));
            let mut report = ResidualReport::new(
                Complex64::new(cl.final_deviation, 0.0),
                Complex64::new(0.0, 0.0),
                ctx,
                flags,
                t0,
            );
            report.abs_residual = cl.final_deviation;
            report.rel_residual = cl.final_deviation;
            report.pass = cl.pass;
            report
                .convention_flags
                .retain(|f| f != "degenerate-sides");
            Ok((
                report,
                vec![
                    FlavorParam {
                        modulus: alpha,
                        phase: x.0,
                        charge: x.1,
                    },
                    FlavorParam {
                        modulus: eta,
                        phase: y.0,
                        charge: y.1,
                    },
                ],
            ))
        }
    }
}
