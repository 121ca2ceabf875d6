//! Numerical engine: contour quadrature, certified bilateral charge sums,
//! torus integration with a trace constraint, pole clearance checks, and
//! seeded generation of balanced parameter sets.
//!
//! Determinism is a hard requirement here: every sum is accumulated in a
//! fixed order, every random draw comes from a seed-keyed ChaCha stream, and
//! rerunning any routine with the same inputs reproduces results bit for bit.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{QError, QResult};
use crate::qkernel::QContext;

/// One fugacity parameter: a point `modulus * e^{i phase}` on a logarithmic
/// spiral around the torus, paired with an integer discrete charge.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct FlavorParam {
    /// Magnitude of the fugacity.
    pub modulus: f64,
    /// Phase in radians.
    pub phase: f64,
    /// Discrete charge.
    pub charge: i64,
}

impl FlavorParam {
    /// The fugacity as a complex number.
    pub fn value(&self) -> Complex64 {
        Complex64::from_polar(self.modulus, self.phase)
    }
}

/// Which balancing constraint a parameter set satisfies.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub enum BalanceKind {
    /// Six flavors with `prod a_i = q` and `sum n_i = 0`.
    SixFlavor,
    /// `4 n` flavors (2n of type t, then 2n of type s) with
    /// `prod t_j s_j = q^n` and charge sums `sum tau = sum kappa = 0`.
    Transform,
}

/// A balanced collection of flavor parameters plus its provenance.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ParameterSet {
    /// Balancing family.
    pub kind: BalanceKind,
    /// Rank parameter (1 for the six-flavor family, n for the transform family).
    pub n: usize,
    /// Seed the set was generated from (for reproducibility).
    pub seed: u64,
    /// Nome the balancing was performed against.
    pub q: f64,
    /// The flavors, in generation order.
    pub flavors: Vec<FlavorParam>,
}

impl ParameterSet {
    /// For a [`BalanceKind::Transform`] set: the first `2n` flavors.
    pub fn t_flavors(&self) -> &[FlavorParam] {
        &self.flavors[..2 * self.n]
    }

    /// For a [`BalanceKind::Transform`] set: the last `2n` flavors.
    pub fn s_flavors(&self) -> &[FlavorParam] {
        &self.flavors[2 * self.n..]
    }

    /// Verify the balancing constraints to tight tolerance.
    pub fn check_balanced(&self) -> QResult<()> {
        let prod: Complex64 = self
            .flavors
            .iter()
            .fold(Complex64::new(1.0, 0.0), |acc, f| acc * f.value());
        let target = match self.kind {
            BalanceKind::SixFlavor => Complex64::new(self.q, 0.0),
            BalanceKind::Transform => Complex64::new(self.q.powi(self.n as i32), 0.0),
        };
        if (prod - target).norm() > 1e-13 * target.norm() {
            return Err(QError::Precondition(format!(
                "fugacity balancing violated: product = {prod}, target = {target}"
            )));
        }
        match self.kind {
            BalanceKind::SixFlavor => {
                let s: i64 = self.flavors.iter().map(|f| f.charge).sum();
                if s != 0 {
                    return Err(QError::Precondition(format!(
                        "charge balancing violated: sum n_i = {s}"
                    )));
                }
            }
            BalanceKind::Transform => {
                // The transform family only constrains the total charge; the
                // per-group sums stay free (the tilde map additionally needs
                // them even, which it checks itself).
                let st: i64 = self.t_flavors().iter().map(|f| f.charge).sum();
                let ss: i64 = self.s_flavors().iter().map(|f| f.charge).sum();
                if st + ss != 0 {
                    return Err(QError::Precondition(format!(
                        "charge balancing violated: sum tau + sum kappa = {}",
                        st + ss
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Average of `f` over `n` equally spaced nodes on the unit circle,
/// i.e. the trapezoid rule for `(1 / 2 pi i) \oint f(z) dz / z`.
///
/// For integrands analytic in an annulus around the contour the error decays
/// geometrically in `n` (the rule picks up exactly the Fourier modes divisible
/// by `n`). A non-finite node value is reported, never averaged over.
pub fn circle_quadrature<F>(mut f: F, n: usize) -> QResult<Complex64>
where
    F: FnMut(Complex64) -> QResult<Complex64>,
{
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..n {
        let theta = 2.0 * std::f64::consts::PI * (k as f64) / (n as f64);
        let z = Complex64::new(theta.cos(), theta.sin());
        let v = f(z)?;
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(QError::NonFiniteIntegrand { node: k });
        }
        acc += v;
    }
    Ok(acc / n as f64)
}

/// Bilateral sum `sum_{m = -M..=M} term(m)` with a tail certificate.
///
/// Terms are accumulated in the fixed order `m = 0, +1, -1, +2, -2, ...`.
/// After the loop the last retained shell `|term(M)| + |term(-M)|` must fall
/// below `tail_tol * scale`, where `scale` is the largest shell or partial-sum
/// magnitude seen so far (a purely relative criterion: sums of tiny overall
/// magnitude must still resolve their own tails); otherwise the sum is
/// reported as not converged rather than returned silently truncated.
pub fn bilateral_sum<F>(mut term: F, ctx: &QContext) -> QResult<Complex64>
where
    F: FnMut(i64) -> QResult<Complex64>,
{
    let mut acc = term(0)?;
    let mut scale = acc.norm();
    let mut last_shell = f64::INFINITY;
    for m in 1..=ctx.sum_m_max {
        let tp = term(m)?;
        let tm = term(-m)?;
        acc += tp + tm;
        last_shell = tp.norm() + tm.norm();
        scale = scale.max(last_shell).max(acc.norm());
        if last_shell <= ctx.tail_tol * scale && m >= 3 {
            return Ok(acc);
        }
    }
    if last_shell <= ctx.tail_tol * scale {
        Ok(acc)
    } else {
        Err(QError::TailNotConverged { m_max: ctx.sum_m_max })
    }
}

/// Integrate `f(z_1..z_n, m_1..m_n)` over the trace-constrained torus:
/// `n - 1` free unit circles with `z_n = 1 / (z_1 ... z_{n-1})`, and a
/// bilateral sum over charges with `m_n = -(m_1 + ... + m_{n-1})`.
///
/// Each free circle carries the normalized measure `dz / (2 pi i z)`; the
/// function returns the plain constrained average (no Weyl symmetry factor --
/// callers apply one if their convention wants it). For `n = 1` this is just
/// `f([1], [0])`.
pub fn sun_torus_integrate<F>(f: &F, n: usize, ctx: &QContext) -> QResult<Complex64>
where
    F: Fn(&[Complex64], &[i64]) -> QResult<Complex64>,
{
    if n == 0 {
        return Err(QError::Precondition("torus rank must be positive".into()));
    }
    if n == 1 {
        return f(&[Complex64::new(1.0, 0.0)], &[0]);
    }
    // Recurse over the free charges first (bilateral sums certify their own
    // tails), with the innermost level doing the nested quadrature.
    fn charge_rec<F>(
        f: &F,
        n: usize,
        level: usize,
        ms: &mut Vec<i64>,
        ctx: &QContext,
    ) -> QResult<Complex64>
    where
        F: Fn(&[Complex64], &[i64]) -> QResult<Complex64>,
    {
        if level == n - 1 {
            let m_last: i64 = -ms.iter().sum::<i64>();
            if m_last.abs() > ctx.sum_m_max {
                // The constrained charge left the certified window; its
                // contribution is part of a shell the certificate already
                // bounds, so treat it as zero.
                return Ok(Complex64::new(0.0, 0.0));
            }
            let mut all_m = ms.clone();
            all_m.push(m_last);
            let mut zs = vec![Complex64::new(0.0, 0.0); n];
            return node_rec(f, n, 0, &mut zs, &all_m, ctx);
        }
        bilateral_sum(
            |m| {
                ms.push(m);
                let r = charge_rec(f, n, level + 1, ms, ctx);
                ms.pop();
                r
            },
            ctx,
        )
    }

    fn node_rec<F>(
        f: &F,
        n: usize,
        level: usize,
        zs: &mut Vec<Complex64>,
        ms: &[i64],
        ctx: &QContext,
    ) -> QResult<Complex64>
    where
        F: Fn(&[Complex64], &[i64]) -> QResult<Complex64>,
    {
        if level == n - 1 {
            let prod: Complex64 = zs[..n - 1]
                .iter()
                .fold(Complex64::new(1.0, 0.0), |a, z| a * z);
            zs[n - 1] = prod.conj() / prod.norm_sqr().max(f64::MIN_POSITIVE);
            return f(zs, ms);
        }
        circle_quadrature(
            |z| {
                zs[level] = z;
                node_rec(f, n, level + 1, zs, ms, ctx)
            },
            ctx.quad_points,
        )
    }

    let mut ms = Vec::with_capacity(n - 1);
    charge_rec(f, n, 0, &mut ms, ctx)
}

/// Minimum clearance between the unit contour and the pole/zero ladders of a
/// flavored integrand, and an error if any ladder point comes within
/// `threshold` of the contour.
///
/// For a flavor `a` with charge `nu`, the denominators
/// `(q^{(nu + m)/2} a z; q)_inf` and `(q^{(nu - m)/2} a / z; q)_inf`
/// contribute pole radii `q^{-k - (m + nu)/2} / |a|` and the reciprocal
/// family `|a| q^{k + (nu - m)/2}`, for every level `k >= 0` and every charge
/// `|m| <= sum_m_max`. Radii far from the unit circle are skipped once the
/// ladder has left the window `[1/2, 2]` for good.
pub fn pole_guard(flavors: &[FlavorParam], threshold: f64, ctx: &QContext) -> QResult<f64> {
    let mut best = f64::INFINITY;
    let ln_q = ctx.q.ln();
    for (fi, f) in flavors.iter().enumerate() {
        if f.modulus <= 0.0 {
            return Err(QError::Precondition(format!(
                "flavor {fi} has non-positive modulus"
            )));
        }
        let ln_a = f.modulus.ln();
        for m in -ctx.sum_m_max..=ctx.sum_m_max {
            let half = 0.5 * (m + f.charge) as f64;
            let half_rec = 0.5 * (f.charge - m) as f64;
            for k in 0..=ctx.product_truncation {
                let kf = k as f64;
                // ln of q^{-k - (m + nu)/2} / |a| and of |a| q^{k + (nu - m)/2}.
                let ln_r = -(kf + half) * ln_q - ln_a;
                let ln_r_rec = ln_a + (kf + half_rec) * ln_q;
                let mut any_in_window = false;
                for ln_r in [ln_r, ln_r_rec] {
                    if ln_r.abs() < std::f64::consts::LN_2 {
                        any_in_window = true;
                        let clearance = (ln_r.exp() - 1.0).abs();
                        if clearance < best {
                            best = clearance;
                        }
                        if clearance < threshold {
                            return Err(QError::PoleOnContour {
                                clearance,
                                threshold,
                                flavor: fi,
                                m,
                                level: k,
                            });
                        }
                    }
                }
                // Both ladders move monotonically away from the circle in k
                // once past it; stop as soon as neither can re-enter.
                if !any_in_window && ln_r > std::f64::consts::LN_2 && ln_r_rec < -std::f64::consts::LN_2
                {
                    break;
                }
            }
        }
    }
    Ok(best)
}

/// Profile controlling where generated fugacity moduli sit.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ModulusProfile {
    /// Spread of the per-flavor exponent jitter; moduli are `q^{e0 + u}`
    /// with `u` uniform in `[-jitter, jitter]` before recentring.
    pub jitter: f64,
    /// Half-width of the uniform phase window (radians) before recentring.
    pub phase_spread: f64,
    /// Largest |charge| the generator will draw.
    pub max_charge: i64,
}

impl Default for ModulusProfile {
    fn default() -> Self {
        ModulusProfile {
            // Keep generated exponents within 0.03 of the balanced center so
            // pole ladders stay at least ~0.13 away from the contour in
            // exponent units (quadrature accuracy budget).
            jitter: 0.03,
            phase_spread: 2.5,
            max_charge: 2,
        }
    }
}

/// Deterministically generate a balanced [`ParameterSet`] from a seed.
///
/// Moduli are drawn as powers of q jittered around the balanced center and
/// recentred so the product constraint holds to machine precision; phases are
/// recentred to sum to zero; charges are drawn in `[-max_charge, max_charge]`
/// and the last one of each group is solved for (redrawing the group when the
/// solved value falls outside the window).
pub fn gen_balanced_params(
    seed: u64,
    kind: BalanceKind,
    n: usize,
    q: f64,
    profile: &ModulusProfile,
) -> QResult<ParameterSet> {
    if !(q > 0.0 && q < 1.0) {
        return Err(QError::Generation(format!("q = {q} outside (0, 1)")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let set = match kind {
        BalanceKind::SixFlavor => {
            if n != 1 {
                return Err(QError::Generation(
                    "six-flavor sets have rank n = 1".into(),
                ));
            }
            let flavors = gen_group(&mut rng, 6, 1.0 / 6.0, q, profile)?;
            ParameterSet {
                kind,
                n: 1,
                seed,
                q,
                flavors,
            }
        }
        BalanceKind::Transform => {
            if n == 0 {
                return Err(QError::Generation("transform sets need n >= 1".into()));
            }
            // 2n t-flavors and 2n s-flavors; each group balances its charges
            // to zero, and the joint modulus product is q^n (exponent 1/4
            // per flavor).
            let mut flavors = gen_group(&mut rng, 2 * n, 0.25, q, profile)?;
            flavors.extend(gen_group(&mut rng, 2 * n, 0.25, q, profile)?);
            ParameterSet {
                kind,
                n,
                seed,
                q,
                flavors,
            }
        }
    };
    set.check_balanced()?;
    Ok(set)
}

/// Generate `count` flavors with modulus exponents recentred on `center_exp`,
/// phases recentred to sum to zero, and charges summing to zero.
fn gen_group(
    rng: &mut ChaCha8Rng,
    count: usize,
    center_exp: f64,
    q: f64,
    profile: &ModulusProfile,
) -> QResult<Vec<FlavorParam>> {
    let jit: Vec<f64> = (0..count)
        .map(|_| rng.gen_range(-profile.jitter..=profile.jitter))
        .collect();
    let mean_jit = jit.iter().sum::<f64>() / count as f64;
    let phases: Vec<f64> = (0..count)
        .map(|_| rng.gen_range(-profile.phase_spread..=profile.phase_spread))
        .collect();
    let mean_phase = phases.iter().sum::<f64>() / count as f64;
    let charges = {
        let mut attempt = 0;
        loop {
            attempt += 1;
            if attempt > 10_000 {
                return Err(QError::Generation(
                    "could not draw charges summing to zero within the window".into(),
                ));
            }
            let mut cs: Vec<i64> = (0..count - 1)
                .map(|_| rng.gen_range(-profile.max_charge..=profile.max_charge))
                .collect();
            let last = -cs.iter().sum::<i64>();
            if last.abs() <= profile.max_charge {
                cs.push(last);
                break cs;
            }
        }
    };
    Ok((0..count)
        .map(|i| FlavorParam {
            modulus: q.powf(center_exp + jit[i] - mean_jit),
            phase: phases[i] - mean_phase,
            charge: charges[i],
        })
        .collect())
}

/// Two-sided residual record produced by every identity checker.
///
/// `pass` is strict: the relative residual must clear the context's
/// `rel_tol` **and** both sides must be meaningfully nonzero (above
/// `1e-30` in magnitude) — a checker can never pass by evaluating `0 = 0`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResidualReport {
    /// Real part of the left-hand side.
    pub lhs_re: f64,
    /// Imaginary part of the left-hand side.
    pub lhs_im: f64,
    /// Real part of the right-hand side.
    pub rhs_re: f64,
    /// Imaginary part of the right-hand side.
    pub rhs_im: f64,
    /// `|LHS - RHS|`.
    pub abs_residual: f64,
    /// `|LHS - RHS| / max(|LHS|, |RHS|)`.
    pub rel_residual: f64,
    /// The numerical settings both sides were evaluated under.
    pub settings: QContext,
    /// Bookkeeping: which conventions, calibrations, and branch choices were
    /// in force during the evaluation.
    pub convention_flags: Vec<String>,
    /// Wall-clock milliseconds for the whole check.
    pub runtime_ms: u128,
    /// Verdict.
    pub pass: bool,
}

impl ResidualReport {
    /// Floor below which a side counts as degenerate (zero) and the check
    /// fails regardless of the residual.
    pub const DEGENERATE_FLOOR: f64 = 1e-30;

    /// Build a report from both evaluated sides.
    pub fn new(
        lhs: Complex64,
        rhs: Complex64,
        ctx: &QContext,
        mut convention_flags: Vec<String>,
        started: std::time::Instant,
    ) -> Self {
        let abs_residual = (lhs - rhs).norm();
        let scale = lhs.norm().max(rhs.norm());
        let degenerate = !scale.is_finite() || scale < Self::DEGENERATE_FLOOR;
        let rel_residual = if degenerate {
            f64::INFINITY
        } else {
            abs_residual / scale
        };
        if degenerate {
            convention_flags.push("degenerate-sides".into());
        }
        ResidualReport {
            lhs_re: lhs.re,
            lhs_im: lhs.im,
            rhs_re: rhs.re,
            rhs_im: rhs.im,
            abs_residual,
            rel_residual,
            settings: ctx.clone(),
            convention_flags,
            runtime_ms: started.elapsed().as_millis(),
            pass: !degenerate && rel_residual < ctx.rel_tol,
        }
    }

    /// The left-hand side as a complex number.
    pub fn lhs(&self) -> Complex64 {
        Complex64::new(self.lhs_re, self.lhs_im)
    }

    /// The right-hand side as a complex number.
    pub fn rhs(&self) -> Complex64 {
        Complex64::new(self.rhs_re, self.rhs_im)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(q: f64) -> QContext {
        QContext::new(q).unwrap()
    }

    #[test]
    fn circle_quadrature_projects_fourier_modes() {
        // Average of z^k over the circle is delta_{k,0}; the N-node rule is
        // exact for |k| < N.
        for k in [-5i32, -1, 0, 1, 3, 7] {
            let v = circle_quadrature(|z| Ok(z.powi(k)), 16).unwrap();
            let expect = if k == 0 { 1.0 } else { 0.0 };
            assert!((v.re - expect).abs() < 1e-14 && v.im.abs() < 1e-14, "k = {k}");
        }
    }

    #[test]
    fn circle_quadrature_geometric_convergence() {
        // f(z) = 1 / (1 - a z) has average 1 (geometric series); the rule's
        // error decays like a^N.
        let a = 0.3;
        let f = |z: Complex64| Ok(Complex64::new(1.0, 0.0) / (Complex64::new(1.0, 0.0) - a * z));
        let e8 = (circle_quadrature(f, 8).unwrap().re - 1.0).abs();
        let e16 = (circle_quadrature(f, 16).unwrap().re - 1.0).abs();
        let e32 = (circle_quadrature(f, 32).unwrap().re - 1.0).abs();
        assert!(e16 < e8 * 0.1 && e32 < e16 * 0.1, "{e8} {e16} {e32}");
        assert!(e32 < 1e-12);
    }

    #[test]
    fn circle_quadrature_flags_non_finite() {
        let r = circle_quadrature(
            |z| Ok(Complex64::new(1.0, 0.0) / (z - Complex64::new(1.0, 0.0))),
            8,
        );
        assert!(matches!(r, Err(QError::NonFiniteIntegrand { node: 0 })));
    }

    #[test]
    fn bilateral_sum_geometric() {
        // sum_m q^{|m|} x^m with x on the unit circle: classical bilateral
        // geometric sum (1 - q^2) / |1 - q x|^2.
        // q = 0.3 reaches the 1e-14 tail certificate within the default
        // 30-shell truncation (0.3^30 ~ 2e-16).
        let c = ctx(0.3);
        let x = Complex64::from_polar(1.0, 0.7);
        let s = bilateral_sum(|m| Ok(c.q.powi(m.abs() as i32) * x.powi(m as i32)), &c).unwrap();
        let expect = (1.0 - c.q * c.q)
            / ((Complex64::new(1.0, 0.0) - c.q * x).norm_sqr());
        assert!((s.re - expect).abs() < 1e-12 && s.im.abs() < 1e-12);
    }

    #[test]
    fn bilateral_sum_tail_failure_is_loud() {
        let mut c = ctx(0.5);
        c.sum_m_max = 8;
        // Non-decaying terms can never satisfy the certificate.
        let r = bilateral_sum(|_| Ok(Complex64::new(1.0, 0.0)), &c);
        assert!(matches!(r, Err(QError::TailNotConverged { m_max: 8 })));
    }

    #[test]
    fn torus_integrate_rank_one_is_plain_eval() {
        let c = ctx(0.5);
        let v = sun_torus_integrate(
            &|zs: &[Complex64], ms: &[i64]| {
                assert_eq!(zs.len(), 1);
                assert_eq!(ms, &[0]);
                Ok(zs[0] + 1.0)
            },
            1,
            &c,
        )
        .unwrap();
        assert!((v.re - 2.0).abs() < 1e-15);
    }

    #[test]
    fn torus_integrate_rank_two_charge_and_monomial_selection() {
        // With z_2 = 1/z_1 and m_2 = -m_1, the integrand z_1^a z_2^b q^{|m_1|}
        // averages to delta_{a,b} * sum_m q^{2|m|}... : picking a = b keeps
        // the monomial constant; the charge sum is geometric.
        let mut c = ctx(0.4);
        c.sum_m_max = 40;
        let v = sun_torus_integrate(
            &|zs: &[Complex64], ms: &[i64]| {
                Ok(zs[0].powi(3) * zs[1].powi(3) * c.q.powi(ms[0].abs() as i32))
            },
            2,
            &c,
        )
        .unwrap();
        let expect = (1.0 + c.q) / (1.0 - c.q);
        assert!((v.re - expect).abs() < 1e-12, "{v}");
        // Mismatched monomial averages to zero. (The q^{|m|} factor keeps the
        // charge shells decaying, which the relative tail certificate
        // requires; a bare monomial would leave only non-decaying rounding
        // noise in every shell.)
        let v0 = sun_torus_integrate(
            &|zs: &[Complex64], ms: &[i64]| {
                Ok(zs[0].powi(2) * zs[1].powi(5) * c.q.powi(ms[0].abs() as i32))
            },
            2,
            &c,
        )
        .unwrap();
        assert!(v0.norm() < 1e-13);
    }

    #[test]
    fn pole_guard_matches_brute_force_enumeration() {
        let c = ctx(0.5);
        let flavors = vec![
            FlavorParam { modulus: 0.8, phase: 0.3, charge: 1 },
            FlavorParam { modulus: 1.3, phase: -1.0, charge: -2 },
        ];
        let fast = pole_guard(&flavors, 1e-9, &c).unwrap();
        // Brute force over the same index ranges.
        let mut best = f64::INFINITY;
        for f in &flavors {
            for m in -c.sum_m_max..=c.sum_m_max {
                for k in 0..200usize {
                    let r1 = c.q.powf(-(k as f64) - 0.5 * (m + f.charge) as f64) / f.modulus;
                    let r2 = f.modulus * c.q.powf(k as f64 + 0.5 * (f.charge - m) as f64);
                    for r in [r1, r2] {
                        if (0.5..=2.0).contains(&r) {
                            best = best.min((r - 1.0).abs());
                        }
                    }
                }
            }
        }
        assert!((fast - best).abs() < 1e-12, "{fast} vs {best}");
    }

    #[test]
    fn pole_guard_rejects_contact() {
        let c = ctx(0.5);
        // modulus q^{1/2} with charge -1, m = 0: radius |a| q^{(nu - m)/2} =
        // q^{1/2} q^{-1/2} = 1 exactly.
        let flavors = vec![FlavorParam {
            modulus: c.q.sqrt(),
            phase: 0.0,
            charge: -1,
        }];
        assert!(matches!(
            pole_guard(&flavors, 1e-6, &c),
            Err(QError::PoleOnContour { .. })
        ));
    }

    #[test]
    fn generated_sets_are_balanced_and_deterministic() {
        let prof = ModulusProfile::default();
        for seed in 0..20u64 {
            let s = gen_balanced_params(seed, BalanceKind::SixFlavor, 1, 0.5, &prof).unwrap();
            s.check_balanced().unwrap();
            assert_eq!(s.flavors.len(), 6);
            let s2 = gen_balanced_params(seed, BalanceKind::SixFlavor, 1, 0.5, &prof).unwrap();
            assert_eq!(s, s2);

            let t = gen_balanced_params(seed, BalanceKind::Transform, 2, 0.5, &prof).unwrap();
            t.check_balanced().unwrap();
            assert_eq!(t.flavors.len(), 8);
            assert_eq!(t.t_flavors().len(), 4);
        }
    }

    #[test]
    fn generated_sets_clear_the_pole_guard() {
        let prof = ModulusProfile::default();
        let mut c = ctx(0.5);
        c.sum_m_max = 20;
        for seed in 0..10u64 {
            let s = gen_balanced_params(seed, BalanceKind::SixFlavor, 1, 0.5, &prof).unwrap();
            pole_guard(&s.flavors, 1e-6, &c).unwrap();
        }
    }
}
