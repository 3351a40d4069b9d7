//! Thakur hypergeometric series.
//!
//! The series F(a_1..a_r; b_1..b_s)(z) = Σ_n (a_1)_n…(a_r)_n /
//! ((b_1)_n…(b_s)_n D_n) z^{q^n} is handled through four exact views:
//!
//! - the bracket-exponent profile a(j), b(j), c(j) controlling the q^d-th
//!   power expansion Σ_n ∏_m (θ^{q^m} - t)^{c(m-n) q^{n+d-m}} α^{q^{n+d}};
//! - cutoff sums of rational functions in t, on which the Frobenius
//!   difference equation holds exactly after a cutoff shift;
//! - coefficient sequences of F_q-linear series, on which the Carlitz
//!   operators Δ_a and d_F act slotwise;
//! - ∞-adically bounded values: exact partial sums plus a proven tail
//!   valuation, with the leading-term certificate for nonvanishing.

use std::collections::BTreeMap;
use std::rc::Rc;

use num_rational::Ratio;

use crate::bivar::{CutoffSum, DefectReport, FactoredRational, Label};
use crate::field::FieldSpec;
use crate::scalar::{PerfectedScalar, RationalScalar, ScalarError, Valuation};
use crate::spoly::SPoly;
use crate::symbols::{pochhammer, BracketMonomial, MonomialError, PochhammerSpec, QExp};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HgError {
    /// Parameters must be nondecreasing (the standing assumption).
    Unsorted,
    /// Lower parameters must be positive.
    NonPositiveLower,
    /// Upper parameters must be positive for this operation.
    NonPositiveUpper,
    /// z outside (or on the boundary of) the convergence domain.
    OutsideDomain { radius_log_q: i64 },
    /// r > s+1 admits only z = 0.
    PointOnly,
    /// b_j <= a_{j+1} fails, so the algebraic branch does not apply.
    NotAlgebraicCase { witness_j: usize },
    Scalar(ScalarError),
    Monomial(MonomialError),
}

impl std::fmt::Display for HgError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            HgError::Unsorted => write!(f, "parameters must be sorted nondecreasing"),
            HgError::NonPositiveLower => write!(f, "lower parameters must be positive"),
            HgError::NonPositiveUpper => write!(f, "upper parameters must be positive here"),
            HgError::OutsideDomain { radius_log_q } => {
                write!(f, "point outside the convergence disc |z| < q^{}", radius_log_q)
            }
            HgError::PointOnly => write!(f, "series converges only at z = 0"),
            HgError::NotAlgebraicCase { witness_j } => {
                write!(
                    f,
                    "b_{0} > a_{1}: the algebraic branch needs b_j <= a_(j+1)",
                    witness_j,
                    witness_j + 1
                )
            }
            HgError::Scalar(e) => write!(f, "{}", e),
            HgError::Monomial(e) => write!(f, "{}", e),
        }
    }
}

impl std::error::Error for HgError {}

impl From<ScalarError> for HgError {
    fn from(e: ScalarError) -> Self {
        HgError::Scalar(e)
    }
}

impl From<MonomialError> for HgError {
    fn from(e: MonomialError) -> Self {
        HgError::Monomial(e)
    }
}

/// Sorted parameter tuples (a_1..a_r; b_1..b_s).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HgfParams {
    pub a: Vec<i64>,
    pub b: Vec<i64>,
}

impl HgfParams {
    pub fn new(a: Vec<i64>, b: Vec<i64>) -> Result<Self, HgError> {
        if a.windows(2).any(|w| w[0] > w[1]) || b.windows(2).any(|w| w[0] > w[1]) {
            return Err(HgError::Unsorted);
        }
        if b.iter().any(|&x| x <= 0) {
            return Err(HgError::NonPositiveLower);
        }
        Ok(HgfParams { a, b })
    }

    /// Canonicalizing constructor: sorts both tuples (parameter order never
    /// matters; sorted order is the canonical presentation).
    pub fn sorted(mut a: Vec<i64>, mut b: Vec<i64>) -> Result<Self, HgError> {
        a.sort_unstable();
        b.sort_unstable();
        Self::new(a, b)
    }

    pub fn r(&self) -> usize {
        self.a.len()
    }

    pub fn s(&self) -> usize {
        self.b.len()
    }

    pub fn all_upper_positive(&self) -> bool {
        self.a.iter().all(|&x| x > 0)
    }

    /// d = max of all parameters (positive-parameter case).
    pub fn d(&self) -> i64 {
        self.a.iter().chain(self.b.iter()).copied().max().unwrap_or(1).max(1)
    }

    /// log_q of the convergence radius in the balanced case:
    /// Σ(b_j - 1) - Σ(a_i - 1).
    pub fn radius_log_q(&self) -> i64 {
        let sb: i64 = self.b.iter().map(|x| x - 1).sum();
        let sa: i64 = self.a.iter().map(|x| x - 1).sum();
        sb - sa
    }
}

/// Convergence domain of the series.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Convergence {
    PointOnly,
    Entire,
    Disc { radius_log_q: i64 },
}

pub fn classify_convergence(params: &HgfParams) -> Convergence {
    let r = params.r();
    let s = params.s();
    if r > s + 1 {
        Convergence::PointOnly
    } else if r < s + 1 {
        Convergence::Entire
    } else {
        Convergence::Disc { radius_log_q: params.radius_log_q() }
    }
}

/// The tables a(j), b(j), c(j) = a(j) - b(j) with sentinels b_0 = 1,
/// a_0 = b_{-1} = -∞, a_{r+1} = b_{s+1} = +∞.
#[derive(Clone, Debug)]
pub struct ExpansionProfile {
    pub d: i64,
    pub a_table: BTreeMap<i64, i64>,
    pub b_table: BTreeMap<i64, i64>,
    pub c_table: BTreeMap<i64, i64>,
    a_params: Vec<i64>,
    b_params: Vec<i64>,
}

impl ExpansionProfile {
    /// a(j) = r - u + 1 where a_{u-1} <= j <= a_u - 1.
    pub fn a_of(&self, j: i64) -> i64 {
        let r = self.a_params.len() as i64;
        let mut u = 1i64;
        // smallest u with j <= a_u - 1 (a_{r+1} = +∞ always satisfies it)
        while u <= r && j > self.a_params[(u - 1) as usize] - 1 {
            u += 1;
        }
        r - u + 1
    }

    /// b(j) = s - v + 1 where b_{v-1} <= j <= b_v - 1, with b_0 = 1.
    pub fn b_of(&self, j: i64) -> i64 {
        let s = self.b_params.len() as i64;
        if j <= 0 {
            // v = 0 slot: b_{-1} = -∞ <= j <= b_0 - 1 = 0
            return s + 1;
        }
        let mut v = 1i64;
        while v <= s && j > self.b_params[(v - 1) as usize] - 1 {
            v += 1;
        }
        s - v + 1
    }

    pub fn c_of(&self, j: i64) -> i64 {
        self.a_of(j) - self.b_of(j)
    }

    /// Indices 1 <= l <= d-1 with c(l) < 0.
    pub fn negative_sites(&self) -> Vec<i64> {
        (1..self.d).filter(|&l| self.c_of(l) < 0).collect()
    }

    pub fn all_c_nonnegative(&self) -> bool {
        (1..self.d).all(|l| self.c_of(l) >= 0)
    }
}

pub fn expansion_profile(params: &HgfParams) -> ExpansionProfile {
    let d = params.d();
    let mut profile = ExpansionProfile {
        d,
        a_table: BTreeMap::new(),
        b_table: BTreeMap::new(),
        c_table: BTreeMap::new(),
        a_params: params.a.clone(),
        b_params: params.b.clone(),
    };
    for j in -d..=d {
        let a = profile.a_of(j);
        let b = profile.b_of(j);
        profile.a_table.insert(j, a);
        profile.b_table.insert(j, b);
        profile.c_table.insert(j, a - b);
    }
    profile
}

/// Which power of the series a cutoff represents.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PowerConv {
    /// q^{d-1}: the period normalization; every exponent is an integer.
    DMinus1,
    /// q^d: the expansion-profile normalization of the q^d-th power.
    D,
}

impl PowerConv {
    fn delta(self, d: i64) -> i64 {
        match self {
            PowerConv::DMinus1 => d - 1,
            PowerConv::D => d,
        }
    }
}

/// The deformed n-th term at power q^δ as a bracket monomial, built from the
/// Pochhammer symbols (valid for any integer upper parameters).
pub fn thgf_term_monomial(
    field: &Rc<FieldSpec>,
    params: &HgfParams,
    n: u64,
    power: PowerConv,
) -> BracketMonomial {
    let d = params.d();
    let delta = power.delta(d) as i32;
    let mut m = BracketMonomial::one(field, true);
    for &a in &params.a {
        m = m.mul(&pochhammer(field, PochhammerSpec { a, n, deformed: true }));
    }
    for &b in &params.b {
        let p = pochhammer(field, PochhammerSpec { a: b, n, deformed: true });
        if p.zero {
            return BracketMonomial::zero(field, true);
        }
        m = m.mul(&p.inv().expect("nonzero lower symbol"));
    }
    let dn = crate::symbols::bracket_quantity(field, crate::symbols::BracketKind::DeformedD, n as i64);
    m = m.mul(&dn.inv().expect("D_n nonzero"));
    m.pow_qpow(delta)
}

/// The same term from the expansion profile: ∏_{m=1}^{n+d-1}
/// (θ^{q^m} - t)^{c(m-n) q^{n+δ-m}} (positive parameters only).
pub fn thgf_term_profile_monomial(
    field: &Rc<FieldSpec>,
    profile: &ExpansionProfile,
    n: u64,
    power: PowerConv,
) -> BracketMonomial {
    let d = profile.d;
    let delta = power.delta(d);
    let mut m = BracketMonomial::one(field, true);
    for site in 1..=(n as i64 + d - 1) {
        let c = profile.c_of(site - n as i64);
        if c == 0 {
            continue;
        }
        let e = QExp::int(c).scale_qpow((n as i64 + delta - site) as i32, field.q);
        m = m.mul(&BracketMonomial::factor(field, true, site as u32, e));
    }
    m
}

/// Labeled cutoff form of the q^δ-th power of the deformed series at α.
pub fn thgf_cutoff(
    field: &Rc<FieldSpec>,
    params: &HgfParams,
    alpha: &RationalScalar,
    n_cutoff: u64,
    power: PowerConv,
) -> Result<CutoffSum, HgError> {
    let d = params.d();
    let delta = power.delta(d);
    let alpha_u = alpha.embed(0);
    let profile = params.all_upper_positive().then(|| expansion_profile(params));
    let mut terms = vec![];
    for n in 0..=n_cutoff {
        let mono = match &profile {
            Some(p) => thgf_term_profile_monomial(field, p, n, power),
            None => thgf_term_monomial(field, params, n, power),
        };
        if mono.zero {
            continue;
        }
        let fr = mono.realize_fr(0)?;
        let apow = alpha_u.frobenius_power((n as i64 + delta) as i32)?;
        terms.push((Label::Term(n), fr.scalar_mul(&apow)));
    }
    Ok(CutoffSum::new(format!("thgf{:?};{:?}", params.a, params.b), n_cutoff, terms))
}

/// The restricted boundary term B of the Frobenius difference equation:
/// products over a_i >= 2 and b_j >= 2 only, times α^{q^{d-2}}.
pub fn thgf_boundary_term(
    field: &Rc<FieldSpec>,
    params: &HgfParams,
    alpha: &RationalScalar,
) -> Result<FactoredRational, HgError> {
    let d = params.d();
    let q = field.q;
    let mut mono = BracketMonomial::one(field, true);
    for &a in &params.a {
        if a >= 2 {
            let db = crate::symbols::bracket_quantity(field, crate::symbols::BracketKind::DeformedD, a - 2)
                .pow_qpow((d - a) as i32);
            mono = mono.mul(&db);
            mono =
                mono.mul(&BracketMonomial::factor(field, true, 0, QExp::int(1).scale_qpow((d - 2) as i32, q)));
        }
    }
    for &b in &params.b {
        if b >= 2 {
            let db = crate::symbols::bracket_quantity(field, crate::symbols::BracketKind::DeformedD, b - 2)
                .pow_qpow((d - b) as i32);
            mono = mono.mul(&db.inv().expect("nonzero"));
            mono = mono
                .mul(&BracketMonomial::factor(field, true, 0, QExp::int(-1).scale_qpow((d - 2) as i32, q)));
        }
    }
    let fr = mono.realize_fr(0)?;
    let apow = alpha.embed(0).frobenius_power(d as i32 - 2)?;
    Ok(fr.scalar_mul(&apow))
}

/// Exact cutoff Frobenius difference equation (forward form):
/// Σ_{m<=N} T_m = twist(B + Σ_{m<=N-1} T_m).
pub fn verify_thgf_frobenius(
    field: &Rc<FieldSpec>,
    params: &HgfParams,
    alpha: &RationalScalar,
    n_cutoff: u64,
) -> Result<DefectReport, HgError> {
    if params.r() != params.s() + 1 {
        return Err(HgError::PointOnly);
    }
    if !params.all_upper_positive() {
        return Err(HgError::NonPositiveUpper);
    }
    check_in_disc(params, alpha)?;
    let lhs = thgf_cutoff(field, params, alpha, n_cutoff, PowerConv::DMinus1)?;
    let boundary = thgf_boundary_term(field, params, alpha)?;

    let mut rhs_terms: Vec<(Label, FactoredRational)> =
        vec![(Label::Term(0), boundary.twist_forward(1))];
    if n_cutoff > 0 {
        let prev = thgf_cutoff(field, params, alpha, n_cutoff - 1, PowerConv::DMinus1)?;
        for (label, t) in &prev.terms {
            if let Label::Term(m) = label {
                rhs_terms.push((Label::Term(m + 1), t.twist_forward(1)));
            }
        }
    }
    let rhs = CutoffSum::new("twist(B + thgf)", n_cutoff, rhs_terms);
    Ok(labelwise_defect(
        format!("E4 thgf frobenius a={:?} b={:?} N={}", params.a, params.b, n_cutoff),
        &lhs,
        &rhs,
    ))
}

/// Compare two labeled sums term by term (missing labels compare to zero).
pub fn labelwise_defect(context: String, lhs: &CutoffSum, rhs: &CutoffSum) -> DefectReport {
    let mut keys: Vec<Label> = lhs.terms.iter().map(|(l, _)| l.clone()).collect();
    for (l, _) in &rhs.terms {
        if !keys.contains(l) {
            keys.push(l.clone());
        }
    }
    keys.sort();
    let find = |side: &CutoffSum, l: &Label| -> Option<FactoredRational> {
        side.terms.iter().find(|(k, _)| k == l).map(|(_, t)| t.clone())
    };
    let mut defects = vec![];
    for l in keys {
        let a = find(lhs, &l);
        let b = find(rhs, &l);
        let d = match (a, b) {
            (Some(a), Some(b)) => a.sub(&b),
            (Some(a), None) => a,
            (None, Some(b)) => b.neg(),
            (None, None) => continue,
        };
        if !d.is_zero() {
            defects.push((format!("term {}", l), d));
        }
    }
    DefectReport::new(context, defects)
}

/// Termwise equality of the profile form against the Pochhammer-built
/// q^d-th power, in the monomial algebra.
pub fn verify_expansion_consistency(
    field: &Rc<FieldSpec>,
    params: &HgfParams,
    n_cutoff: u64,
) -> Result<DefectReport, HgError> {
    if !params.all_upper_positive() {
        return Err(HgError::NonPositiveUpper);
    }
    let profile = expansion_profile(params);
    let marker = FactoredRational::one(field, 0);
    let mut defects = vec![];
    for n in 0..=n_cutoff {
        let direct = thgf_term_monomial(field, params, n, PowerConv::D);
        let via_profile = thgf_term_profile_monomial(field, &profile, n, PowerConv::D);
        if direct != via_profile {
            defects.push((format!("term {}", n), marker.clone()));
        }
    }
    Ok(DefectReport::new(
        format!("expansion profile a={:?} b={:?} n<={}", params.a, params.b, n_cutoff),
        defects,
    ))
}

fn check_in_disc(params: &HgfParams, alpha: &RationalScalar) -> Result<(), HgError> {
    match classify_convergence(params) {
        Convergence::Entire => Ok(()),
        Convergence::PointOnly => {
            if alpha.is_zero() {
                Ok(())
            } else {
                Err(HgError::PointOnly)
            }
        }
        Convergence::Disc { radius_log_q } => {
            // |α| < q^R  <=>  v(α) > -R, strictly
            let v = alpha.valuation();
            let bound = Valuation::from_int(-radius_log_q);
            if v == bound || !v.ge(&bound) {
                Err(HgError::OutsideDomain { radius_log_q })
            } else {
                Ok(())
            }
        }
    }
}

/// Exact partial value with a proven tail bound.
#[derive(Clone, Debug)]
pub struct PartialValue {
    pub value: PerfectedScalar,
    /// true value - value has v_∞ >= error_valuation
    pub error_valuation: Valuation,
    /// valuation of the dominant term of the q^{d-1}-th power, when a unique
    /// strict minimizer exists (the nonvanishing certificate)
    pub leading_valuation: Option<Ratio<i64>>,
    pub nonvanishing_certified: bool,
    pub terms_used: u64,
}

/// v(term_m) of the power-1 series: q^m (δ + κ m) with δ = v(α) + Σ(b_j-1) -
/// Σ(a_i-1) and κ = s+1-r.
fn term_valuation(m: u64, delta: Ratio<i64>, kappa: i64, q: i64) -> Ratio<i64> {
    let qm = Ratio::from_integer(q.pow(m as u32));
    qm * (delta + Ratio::from_integer(kappa * m as i64))
}

/// ∞-adically bounded evaluation of F(α) (power 1), with the leading-term
/// certificate computed on the q^{d-1} scale of the period normalization.
pub fn thgf_value(
    field: &Rc<FieldSpec>,
    params: &HgfParams,
    alpha: &RationalScalar,
    target: Ratio<i64>,
) -> Result<PartialValue, HgError> {
    if !params.all_upper_positive() {
        return Err(HgError::NonPositiveUpper);
    }
    check_in_disc(params, alpha)?;
    let q = field.q as i64;
    let d = params.d();
    if alpha.is_zero() {
        return Ok(PartialValue {
            value: PerfectedScalar::zero(field, 0),
            error_valuation: Valuation::infinite(),
            leading_valuation: None,
            nonvanishing_certified: false,
            terms_used: 0,
        });
    }
    let v_alpha = alpha.valuation().0.expect("nonzero");
    let delta = v_alpha + Ratio::from_integer(params.radius_log_q());
    let kappa = params.s() as i64 + 1 - params.r() as i64;

    // cutoff: terms past N must exceed the target, with the formula already
    // increasing there
    let mut n_cutoff = 0u64;
    loop {
        let next = term_valuation(n_cutoff + 1, delta, kappa, q);
        let slope_ok =
            delta + Ratio::from_integer(kappa * (n_cutoff as i64 + 1)) > Ratio::from_integer(0);
        if slope_ok && next >= target {
            break;
        }
        n_cutoff += 1;
        assert!(n_cutoff < 10_000, "cutoff out of range for target {}", target);
    }

    let mut value = PerfectedScalar::zero(field, 0);
    let alpha_u = alpha.embed(0);
    for m in 0..=n_cutoff {
        let mut mono = BracketMonomial::one(field, false);
        for &a in &params.a {
            mono = mono.mul(&pochhammer(field, PochhammerSpec { a, n: m, deformed: false }));
        }
        for &b in &params.b {
            mono = mono.mul(
                &pochhammer(field, PochhammerSpec { a: b, n: m, deformed: false })
                    .inv()
                    .expect("positive lower symbol"),
            );
        }
        let dm = crate::symbols::bracket_quantity(field, crate::symbols::BracketKind::D, m as i64);
        mono = mono.mul(&dm.inv().expect("nonzero"));
        let coeff = mono.realize_scalar(0)?;
        let term = coeff.mul(&alpha_u.frobenius_power(m as i32)?);
        debug_assert_eq!(
            term.valuation(),
            Valuation::finite(term_valuation(m, delta, kappa, q)),
            "exact term valuation matches the proof formula"
        );
        value = value.add(&term);
    }

    // leading-term certificate: unique strict minimum of the valuation formula
    let vals: Vec<Ratio<i64>> =
        (0..=n_cutoff + 1).map(|m| term_valuation(m, delta, kappa, q)).collect();
    let min = vals.iter().cloned().fold(None::<Ratio<i64>>, |acc, v| match acc {
        None => Some(v),
        Some(a) => Some(a.min(v)),
    });
    let min = min.expect("nonempty");
    let unique = vals.iter().filter(|&&v| v == min).count() == 1
        && delta + Ratio::from_integer(kappa * (n_cutoff as i64 + 1)) > Ratio::from_integer(0);
    let scale = Ratio::from_integer(q.pow((d - 1) as u32));

    Ok(PartialValue {
        value,
        error_valuation: Valuation::finite(term_valuation(n_cutoff + 1, delta, kappa, q)),
        leading_valuation: unique.then_some(min * scale),
        nonvanishing_certified: unique,
        terms_used: n_cutoff + 1,
    })
}

/// The F_q[t]-linear-combination witness of the algebraic case.
#[derive(Clone, Debug)]
pub struct AlgebraicWitness {
    /// f_h(t) over F_q, indexed by the θ^{h q^{n+d}} power h.
    pub f_polys: Vec<(u64, SPoly)>,
    /// S_h^{<=N} = Σ_{n<=N} θ^{h q^{n+d}} α^{q^{n+d}}.
    pub s_partials: Vec<(u64, PerfectedScalar)>,
    pub report: DefectReport,
}

/// Expand ∏_l (X - t^{q^{d-l}})^{c(l)} into Σ_h f_h(t) X^h, verify the cutoff
/// identity against the profile form, and check the S_h recursion
/// (S_h^{<=N})^q = S_h^{<=N+1} - θ^{h q^d} α^{q^d} on partial sums.
pub fn algebraic_witness(
    field: &Rc<FieldSpec>,
    params: &HgfParams,
    alpha: &RationalScalar,
    n_cutoff: u64,
) -> Result<AlgebraicWitness, HgError> {
    if !params.all_upper_positive() {
        return Err(HgError::NonPositiveUpper);
    }
    for j in 0..params.b.len() {
        if j + 1 < params.a.len() && params.b[j] > params.a[j + 1] {
            return Err(HgError::NotAlgebraicCase { witness_j: j + 1 });
        }
    }
    let profile = expansion_profile(params);
    assert!(profile.all_c_nonnegative(), "b_j <= a_(j+1) forces c >= 0");
    let d = params.d();
    let q = field.q as u64;

    // ∏_{l=1}^{d-1} (X - t^{q^{d-l}})^{c(l)}: polynomial in X with F_q[t]
    // coefficients, indexed by the X-power h.
    let mut coeffs: Vec<SPoly> = vec![SPoly::one(field)];
    for l in 1..d {
        let c = profile.c_of(l);
        let texp = q.pow((d - l) as u32);
        for _ in 0..c {
            let mut next: Vec<SPoly> = vec![SPoly::zero(field); coeffs.len() + 1];
            for (h, f) in coeffs.iter().enumerate() {
                next[h + 1] = next[h + 1].add(f);
                next[h] = next[h].sub(&f.mul_monomial(crate::field::Fq::ONE, texp));
            }
            coeffs = next;
        }
    }
    let f_polys: Vec<(u64, SPoly)> = coeffs
        .iter()
        .enumerate()
        .filter(|(_, f)| !f.is_zero())
        .map(|(h, f)| (h as u64, f.clone()))
        .collect();

    let alpha_u = alpha.embed(0);
    let theta_pow = |h: u64, n: u64| -> PerfectedScalar {
        // θ^{h q^{n+d}}
        let e = h.checked_mul(q.pow((n as i64 + d) as u32)).expect("exponent overflow");
        let base = RationalScalar::theta(field).embed(0);
        PerfectedScalar { depth: 0, num: base.num.pow(e), den: SPoly::one(field) }
    };

    // termwise: profile term at power q^d equals Σ_h f_h(t) θ^{h q^{n+d}} α^{q^{n+d}}
    let mut defects = vec![];
    for n in 0..=n_cutoff {
        let mono = thgf_term_profile_monomial(field, &profile, n, PowerConv::D);
        let apow = alpha_u.frobenius_power((n as i64 + d) as i32)?;
        let lhs = mono.realize_fr(0)?.scalar_mul(&apow);
        let mut rhs = FactoredRational::zero(field, 0);
        for (h, f) in &f_polys {
            let scalar = theta_pow(*h, n).mul(&apow);
            let mut num = crate::bivar::TPoly::new();
            for (&te, &fc) in &f.terms {
                num.insert(te, SPoly::constant(field, fc));
            }
            let piece = FactoredRational {
                field: field.clone(),
                depth: 0,
                num,
                den: BTreeMap::new(),
                sden: SPoly::one(field),
            };
            rhs = rhs.add(&piece.scalar_mul(&scalar));
        }
        let defect = lhs.sub(&rhs);
        if !defect.is_zero() {
            defects.push((format!("term {}", n), defect));
        }
    }

    // S_h partial sums and the exact recursion residual on partials
    let mut s_partials = vec![];
    for (h, _) in &f_polys {
        let s_n = |top: u64| -> Result<PerfectedScalar, HgError> {
            let mut acc = PerfectedScalar::zero(field, 0);
            for n in 0..=top {
                let apow = alpha_u.frobenius_power((n as i64 + d) as i32)?;
                acc = acc.add(&theta_pow(*h, n).mul(&apow));
            }
            Ok(acc)
        };
        let sn = s_n(n_cutoff)?;
        let sn1 = s_n(n_cutoff + 1)?;
        let first = theta_pow(*h, 0).mul(&alpha_u.frobenius_power(d as i32)?);
        let residual = sn.pow(q).sub(&sn1.sub(&first));
        if !residual.is_zero() {
            defects.push((format!("S_{} recursion", h), FactoredRational::from_scalar(&residual)));
        }
        s_partials.push((*h, sn));
    }

    Ok(AlgebraicWitness {
        f_polys,
        s_partials,
        report: DefectReport::new(
            format!("algebraic witness a={:?} b={:?} N={}", params.a, params.b, n_cutoff),
            defects,
        ),
    })
}

/// A truncated F_q-linear series Σ c_i z^{q^i}: slot i holds c_i.
#[derive(Clone, Debug)]
pub struct FqLinearSeries {
    pub coeffs: Vec<PerfectedScalar>,
}

/// The Carlitz operators: Δ_a(f)(z) = f(θz) - θ^{q^{-a}} f(z), and
/// d_F(f) = Δ_0(f)^{1/q}.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CarlitzOp {
    Delta(i64),
    DF,
}

/// Apply a chain of operators; `chain` is written in composition order, so
/// the last element acts first.
pub fn apply_carlitz_operator(
    field: &Rc<FieldSpec>,
    f: &FqLinearSeries,
    chain: &[CarlitzOp],
) -> Result<FqLinearSeries, HgError> {
    let mut coeffs = f.coeffs.clone();
    for op in chain.iter().rev() {
        match *op {
            CarlitzOp::Delta(a) => {
                let theta = PerfectedScalar::theta(field, 0);
                let shift = theta.frobenius_power(-a as i32)?;
                coeffs = coeffs
                    .iter()
                    .enumerate()
                    .map(|(i, c)| {
                        let th_qi = PerfectedScalar::theta_qpow(field, 0, i as u32);
                        c.mul(&th_qi.sub(&shift))
                    })
                    .collect();
            }
            CarlitzOp::DF => {
                let theta = PerfectedScalar::theta(field, 0);
                let mut next = vec![];
                for i in 0..coeffs.len().saturating_sub(1) {
                    let th = PerfectedScalar::theta_qpow(field, 0, (i + 1) as u32);
                    let v = coeffs[i + 1].mul(&th.sub(&theta));
                    next.push(v.frobenius_power(-1)?);
                }
                coeffs = next;
            }
        }
    }
    Ok(FqLinearSeries { coeffs })
}

/// Truncated coefficient sequence of the THGF itself (power 1).
pub fn thgf_coefficients(
    field: &Rc<FieldSpec>,
    params: &HgfParams,
    n_cutoff: u64,
) -> Result<FqLinearSeries, HgError> {
    let mut coeffs = vec![];
    for n in 0..=n_cutoff {
        let mut mono = BracketMonomial::one(field, false);
        let mut zero = false;
        for &a in &params.a {
            let p = pochhammer(field, PochhammerSpec { a, n, deformed: false });
            if p.zero {
                zero = true;
                break;
            }
            mono = mono.mul(&p);
        }
        if !zero {
            for &b in &params.b {
                let p = pochhammer(field, PochhammerSpec { a: b, n, deformed: false });
                mono = mono.mul(&p.inv().expect("positive lower symbol"));
            }
        }
        let dn = crate::symbols::bracket_quantity(field, crate::symbols::BracketKind::D, n as i64);
        coeffs.push(if zero {
            PerfectedScalar::zero(field, 0)
        } else {
            mono.mul(&dn.inv().expect("nonzero")).realize_scalar(0)?
        });
    }
    Ok(FqLinearSeries { coeffs })
}

/// The hypergeometric difference equation, in the orientation that holds on
/// the coefficient recursion: d_F ∘ Δ_{b_1-1} ∘ … ∘ Δ_{b_s-1}(F) =
/// Δ_{a_1} ∘ … ∘ Δ_{a_r}(F), compared on slots 0..N-1.
pub fn verify_hg_difference_equation(
    field: &Rc<FieldSpec>,
    params: &HgfParams,
    n_cutoff: u64,
) -> Result<DefectReport, HgError> {
    let f = thgf_coefficients(field, params, n_cutoff)?;
    let mut lhs_chain = vec![CarlitzOp::DF];
    lhs_chain.extend(params.b.iter().map(|&b| CarlitzOp::Delta(b - 1)));
    let rhs_chain: Vec<CarlitzOp> = params.a.iter().map(|&a| CarlitzOp::Delta(a)).collect();
    let lhs = apply_carlitz_operator(field, &f, &lhs_chain)?;
    let rhs = apply_carlitz_operator(field, &f, &rhs_chain)?;
    let slots = lhs.coeffs.len().min(rhs.coeffs.len());
    let mut defects = vec![];
    for i in 0..slots {
        let d = lhs.coeffs[i].sub(&rhs.coeffs[i]);
        if !d.is_zero() {
            defects.push((format!("slot {}", i), FactoredRational::from_scalar(&d)));
        }
    }
    Ok(DefectReport::new(
        format!("carlitz operator equation a={:?} b={:?} N={}", params.a, params.b, n_cutoff),
        defects,
    ))
}

/// Termwise bridge: (F(1,m..m;1+m..1+m)(z^{q^{1-m}}))^{q^m} has i-th term
/// z^{q^{i+1}} / [i+m]^s, classically and deformed.
pub fn verify_thgf_kpl_bridge(field: &Rc<FieldSpec>, m: u32, s: u32, n_cutoff: u64) -> DefectReport {
    let q = field.q;
    let marker = FactoredRational::one(field, 0);
    let mut defects = vec![];
    for deformed in [false, true] {
        for i in 0..=n_cutoff {
            let one_i = pochhammer(field, PochhammerSpec { a: 1, n: i, deformed });
            let m_i = pochhammer(field, PochhammerSpec { a: m as i64, n: i, deformed });
            let m1_i = pochhammer(field, PochhammerSpec { a: 1 + m as i64, n: i, deformed });
            let kind = if deformed {
                crate::symbols::BracketKind::DeformedD
            } else {
                crate::symbols::BracketKind::D
            };
            let d_i = crate::symbols::bracket_quantity(field, kind, i as i64);
            let lhs = one_i
                .mul(&m_i.pow_int(s as i64).unwrap())
                .mul(&m1_i.pow_int(-(s as i64)).unwrap())
                .mul(&d_i.inv().unwrap())
                .pow_qpow(m as i32);
            let rhs =
                BracketMonomial::factor(field, deformed, i as u32 + m, QExp::new(q, -(s as i64), 0));
            if lhs != rhs {
                defects.push((format!("term i={} (deformed={})", i, deformed), marker.clone()));
            }
        }
    }
    DefectReport::new(format!("kpl bridge m={} s={} N={}", m, s, n_cutoff), defects)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::field_create;
    use crate::literal::parse_rational;

    fn f3() -> Rc<FieldSpec> {
        field_create(3, 1, None).unwrap()
    }

    fn params(a: &[i64], b: &[i64]) -> HgfParams {
        HgfParams::new(a.to_vec(), b.to_vec()).unwrap()
    }

    /// Independent profile oracle: a(j) and b(j) by direct counting,
    /// a(j) = #{i : a_i > j}, b(j) = #{v : b_v > j} + [j <= 0].
    fn oracle_c(p: &HgfParams, j: i64) -> i64 {
        let a = p.a.iter().filter(|&&x| x > j).count() as i64;
        let b = p.b.iter().filter(|&&x| x > j).count() as i64 + if j <= 0 { 1 } else { 0 };
        a - b
    }

    #[test]
    fn classify_cases() {
        assert_eq!(
            classify_convergence(&params(&[1, 1], &[2])),
            Convergence::Disc { radius_log_q: 1 }
        );
        assert_eq!(classify_convergence(&params(&[1], &[])), Convergence::Disc { radius_log_q: 0 });
        assert_eq!(classify_convergence(&params(&[1], &[2, 2])), Convergence::Entire);
        assert_eq!(classify_convergence(&params(&[1, 1, 2], &[2])), Convergence::PointOnly);
    }

    #[test]
    fn profile_matches_counting_oracle() {
        let cases: Vec<(Vec<i64>, Vec<i64>)> = vec![
            (vec![1, 1], vec![2]),
            (vec![1, 2], vec![2]),
            (vec![1, 1, 2], vec![2, 3]),
            (vec![2, 2], vec![3]),
            (vec![1, 3, 4], vec![2, 4]),
        ];
        for (a, b) in cases {
            let p = params(&a, &b);
            let profile = expansion_profile(&p);
            let d = p.d();
            for j in -d - 1..=d + 1 {
                assert_eq!(profile.c_of(j), oracle_c(&p, j), "c({}) for a={:?} b={:?}", j, a, b);
            }
            // c(l) = 0 for l >= d, and for l <= 0 when r = s+1
            assert_eq!(profile.c_of(d), 0);
            assert_eq!(profile.c_of(d + 3), 0);
            if p.r() == p.s() + 1 {
                assert_eq!(profile.c_of(0), 0);
                assert_eq!(profile.c_of(-2), 0);
            }
        }
    }

    #[test]
    fn profile_pinned_values() {
        let p = expansion_profile(&params(&[1, 1], &[2]));
        assert_eq!(p.c_of(1), -1);
        let p = expansion_profile(&params(&[1, 2], &[2]));
        assert_eq!(p.c_of(1), 0);
    }

    #[test]
    fn cutoff_terms_match_kochubei_shape() {
        // (1,1;2) at power q^2: terms α^{q^{n+2}} / (θ^{q^{n+1}} - t)^q
        let f = f3();
        let p = params(&[1, 1], &[2]);
        let alpha = RationalScalar::one(&f);
        let cs = thgf_cutoff(&f, &p, &alpha, 3, PowerConv::D).unwrap();
        for (label, term) in &cs.terms {
            if let Label::Term(n) = label {
                assert_eq!(term.den.len(), 1);
                assert_eq!(term.den.get(&(*n as u32 + 1)), Some(&(f.q as u64)));
            }
        }
    }

    #[test]
    fn frobenius_identity_kpl_case() {
        // (1,1;2), α = 1, q = 3: B = α/(θ-t)
        let f = f3();
        let p = params(&[1, 1], &[2]);
        let alpha = RationalScalar::one(&f);
        let b = thgf_boundary_term(&f, &p, &alpha).unwrap();
        let expected = FactoredRational::bracket_product_den(&f, 0, &{
            let mut m = BTreeMap::new();
            m.insert(0u32, 1u64);
            m
        });
        assert!(b.eq_value(&expected));
        let rep = verify_thgf_frobenius(&f, &p, &alpha, 4).unwrap();
        assert!(rep.exact, "{:?}", rep.defects.iter().map(|(n, _)| n.clone()).collect::<Vec<_>>());
    }

    #[test]
    fn frobenius_identity_more_params() {
        let f = f3();
        let alpha = parse_rational("1/theta", &f).unwrap();
        let rep = verify_thgf_frobenius(&f, &params(&[1, 2], &[2]), &alpha, 3).unwrap();
        assert!(rep.exact);
        let alpha = parse_rational("1/theta^2", &f).unwrap();
        let rep = verify_thgf_frobenius(&f, &params(&[2, 2], &[3]), &alpha, 3).unwrap();
        assert!(rep.exact);
    }

    #[test]
    fn frobenius_identity_depth_one() {
        // d = 1: all parameters 1, radius q^0, boundary term α^{q^{-1}}
        let f = f3();
        let alpha = parse_rational("1/theta", &f).unwrap();
        let rep = verify_thgf_frobenius(&f, &params(&[1, 1], &[1]), &alpha, 4).unwrap();
        assert!(rep.exact);
    }

    #[test]
    fn frobenius_identity_stable_under_iteration() {
        // the cutoff identity holds again at every smaller cutoff
        let f = f3();
        let p = params(&[1, 2], &[2]);
        let alpha = parse_rational("1/theta", &f).unwrap();
        for n in [4u64, 3, 2, 1, 0] {
            let rep = verify_thgf_frobenius(&f, &p, &alpha, n).unwrap();
            assert!(rep.exact, "N = {}", n);
        }
    }

    #[test]
    fn expansion_consistency_examples() {
        let f = f3();
        for (a, b) in [(vec![1i64, 1], vec![2i64]), (vec![1, 1, 2], vec![2, 3]), (vec![1, 1], vec![1])]
        {
            let rep = verify_expansion_consistency(&f, &params(&a, &b), 4).unwrap();
            assert!(rep.exact, "a={:?} b={:?}", a, b);
        }
    }

    #[test]
    fn value_wade_series() {
        // (1,1;2) at α=1, q=3: value^3 = Σ_{i>=1} 1/(θ^{3^i} - θ) + tail
        let f = f3();
        let p = params(&[1, 1], &[2]);
        let pv = thgf_value(&f, &p, &RationalScalar::one(&f), Ratio::from_integer(30)).unwrap();
        assert!(pv.nonvanishing_certified);
        let cubed = pv.value.pow(3);
        let theta = PerfectedScalar::theta(&f, 0);
        let mut direct = PerfectedScalar::zero(&f, 0);
        for i in 1..=4u32 {
            let bracket = PerfectedScalar::theta_qpow(&f, 0, i).sub(&theta);
            direct = direct.add(&PerfectedScalar::one(&f, 0).div(&bracket).unwrap());
        }
        let diff = cubed.sub(&direct);
        assert!(diff.valuation().ge(&Valuation::from_int(30)));
        // leading valuation: δ q^{d-1} with δ = 1, d = 2, q = 3
        assert_eq!(pv.leading_valuation, Some(Ratio::from_integer(3)));
    }

    #[test]
    fn value_outside_disc_rejected() {
        let f = f3();
        let p = params(&[1, 1], &[2]);
        let theta = RationalScalar::theta(&f);
        assert!(matches!(
            thgf_value(&f, &p, &theta, Ratio::from_integer(10)),
            Err(HgError::OutsideDomain { radius_log_q: 1 })
        ));
    }

    #[test]
    fn refinement_monotonicity() {
        let f = f3();
        let p = params(&[1, 2], &[2]);
        let alpha = parse_rational("1/theta", &f).unwrap();
        let coarse = thgf_value(&f, &p, &alpha, Ratio::from_integer(20)).unwrap();
        let fine = thgf_value(&f, &p, &alpha, Ratio::from_integer(80)).unwrap();
        let diff = fine.value.sub(&coarse.value);
        assert!(diff.valuation().ge(&coarse.error_valuation));
    }

    #[test]
    fn witness_algebraic_cases() {
        let f = f3();
        for (a, b) in [(vec![1i64, 2], vec![2i64]), (vec![1, 1], vec![1])] {
            let alpha = parse_rational("1/theta", &f).unwrap();
            let w = algebraic_witness(&f, &params(&a, &b), &alpha, 5).unwrap();
            assert!(w.report.exact, "a={:?} b={:?}", a, b);
        }
        assert!(matches!(
            algebraic_witness(&f, &params(&[1, 1], &[2]), &RationalScalar::one(&f), 3),
            Err(HgError::NotAlgebraicCase { witness_j: 1 })
        ));
    }

    #[test]
    fn carlitz_operator_basics() {
        let f = f3();
        // Δ_0 kills slot 0
        let series = FqLinearSeries {
            coeffs: vec![PerfectedScalar::one(&f, 0), PerfectedScalar::zero(&f, 0)],
        };
        let out = apply_carlitz_operator(&f, &series, &[CarlitzOp::Delta(0)]).unwrap();
        assert!(out.coeffs.iter().all(|c| c.is_zero()));
        // d_F fixes the Carlitz-exponential coefficients 1/D_i
        let coeffs: Vec<PerfectedScalar> = (0..4)
            .map(|i| {
                crate::symbols::bracket_quantity(&f, crate::symbols::BracketKind::D, i)
                    .inv()
                    .unwrap()
                    .realize_scalar(0)
                    .unwrap()
            })
            .collect();
        let e = FqLinearSeries { coeffs };
        let out = apply_carlitz_operator(&f, &e, &[CarlitzOp::DF]).unwrap();
        for (i, c) in out.coeffs.iter().enumerate() {
            assert_eq!(c, &e.coeffs[i], "slot {}", i);
        }
    }

    #[test]
    fn carlitz_linearity() {
        let f = f3();
        let x = thgf_coefficients(&f, &params(&[1, 1], &[2]), 3).unwrap();
        let y = thgf_coefficients(&f, &params(&[1, 2], &[2]), 3).unwrap();
        let sum = FqLinearSeries {
            coeffs: x.coeffs.iter().zip(&y.coeffs).map(|(a, b)| a.add(b)).collect(),
        };
        let chain = [CarlitzOp::Delta(2)];
        let lx = apply_carlitz_operator(&f, &x, &chain).unwrap();
        let ly = apply_carlitz_operator(&f, &y, &chain).unwrap();
        let lsum = apply_carlitz_operator(&f, &sum, &chain).unwrap();
        for i in 0..lsum.coeffs.len() {
            assert_eq!(lsum.coeffs[i], lx.coeffs[i].add(&ly.coeffs[i]));
        }
    }

    #[test]
    fn difference_equation_instances() {
        let f = f3();
        for (a, b) in [
            (vec![1i64, 1], vec![2i64]),
            (vec![2], vec![]),
            (vec![1], vec![1]),
            (vec![1, 2], vec![2]),
        ] {
            let rep = verify_hg_difference_equation(&f, &params(&a, &b), 4).unwrap();
            assert!(rep.exact, "a={:?} b={:?}: {} defects", a, b, rep.defects.len());
        }
    }

    #[test]
    fn kpl_bridge_cases() {
        let f = f3();
        for (m, s) in [(1u32, 1u32), (2, 1), (1, 3), (2, 2)] {
            let rep = verify_thgf_kpl_bridge(&f, m, s, 3);
            assert!(rep.exact, "m={} s={}", m, s);
        }
    }
}
