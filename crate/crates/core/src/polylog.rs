//! Kochubei and Carlitz (multiple) polylogarithms.
//!
//! Kochubei chains run i_1 > … > i_r > 0 with denominators (θ^{q^{i_k}} - t)^{s_k}
//! (deformed) or [i_k]^{s_k}; the star versions relax > to >=. Carlitz chains
//! run down to i_r >= 0 with 𝕃_{i_k}^{s_k} denominators. Everything is exact:
//! cutoff sums keep one labeled term per chain, the Frobenius difference
//! equations hold labelwise after a cutoff shift, and the stuffle and
//! inclusion–exclusion identities hold on the nose at uniform cutoff because
//! they are partitions of bounded chain sets.

use std::collections::BTreeMap;
use std::rc::Rc;

use num_rational::Ratio;

use crate::bivar::{CutoffSum, DefectReport, FactoredRational, Label};
use crate::field::FieldSpec;
use crate::hypergeom::PartialValue;
use crate::scalar::{PerfectedScalar, RationalScalar, ScalarError, Valuation};
use crate::spoly::SPoly;

/// An index 𝔰 = (s_1, …, s_r) of positive integer parts.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Index {
    pub parts: Vec<u64>,
}

impl Index {
    pub fn new(parts: Vec<u64>) -> Self {
        assert!(parts.iter().all(|&s| s >= 1), "index parts must be positive");
        Index { parts }
    }

    pub fn weight(&self) -> u64 {
        self.parts.iter().sum()
    }

    pub fn depth(&self) -> usize {
        self.parts.len()
    }

    pub fn reversed(&self) -> Index {
        let mut parts = self.parts.clone();
        parts.reverse();
        Index { parts }
    }
}

impl std::fmt::Display for Index {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.parts.iter().map(|s| s.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Which polylogarithm family a sum belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MplFamily {
    Kochubei,
    Carlitz,
}

/// Evaluation points (z_1, …, z_r), checked against the family bounds.
#[derive(Clone, Debug)]
pub struct PointTuple {
    pub entries: Vec<RationalScalar>,
}

impl PointTuple {
    pub fn new(entries: Vec<RationalScalar>) -> Self {
        PointTuple { entries }
    }

    pub fn ones(field: &Rc<FieldSpec>, r: usize) -> Self {
        PointTuple { entries: vec![RationalScalar::one(field); r] }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MplError {
    /// |z_k| fails the family bound for slot k (0-based).
    BoundViolation { slot: usize },
    DepthMismatch { index_depth: usize, point_depth: usize },
    /// The requested relation is outside the implemented family/depth range.
    Unsupported(String),
    Scalar(ScalarError),
}

impl std::fmt::Display for MplError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MplError::BoundViolation { slot } => write!(f, "bound violation at slot {}", slot),
            MplError::DepthMismatch { index_depth, point_depth } => {
                write!(f, "index depth {} vs point depth {}", index_depth, point_depth)
            }
            MplError::Unsupported(s) => write!(f, "{}", s),
            MplError::Scalar(e) => write!(f, "{}", e),
        }
    }
}

impl std::error::Error for MplError {}

impl From<ScalarError> for MplError {
    fn from(e: ScalarError) -> Self {
        MplError::Scalar(e)
    }
}

/// Strict bound check: Kochubei needs |z_k| < q^{s_k}; Carlitz needs
/// |z_k| < q^{s_k q/(q-1)}.
pub fn check_bounds(
    field: &Rc<FieldSpec>,
    family: MplFamily,
    index: &Index,
    point: &PointTuple,
) -> Result<(), MplError> {
    if index.depth() != point.entries.len() {
        return Err(MplError::DepthMismatch {
            index_depth: index.depth(),
            point_depth: point.entries.len(),
        });
    }
    let q = field.q as i64;
    for (k, (s, z)) in index.parts.iter().zip(&point.entries).enumerate() {
        let bound = match family {
            MplFamily::Kochubei => Ratio::from_integer(-(*s as i64)),
            MplFamily::Carlitz => Ratio::new(-(*s as i64) * q, q - 1),
        };
        // v(0) = +∞ passes every strict bound
        if let Some(v) = z.valuation().0 {
            if v <= bound {
                return Err(MplError::BoundViolation { slot: k });
            }
        }
    }
    Ok(())
}

fn enumerate_chains(depth: usize, max: u64, min_last: u64, star: bool) -> Vec<Vec<u64>> {
    let mut out = vec![];
    let mut current = Vec::with_capacity(depth);
    fn rec(out: &mut Vec<Vec<u64>>, current: &mut Vec<u64>, depth: usize, hi: u64, min_last: u64, star: bool) {
        if current.len() == depth {
            out.push(current.clone());
            return;
        }
        let remaining = depth - current.len() - 1;
        let lo = if star {
            min_last
        } else {
            min_last + remaining as u64
        };
        let mut i = hi;
        loop {
            if i < lo {
                break;
            }
            current.push(i);
            let next_hi = if star { i } else { i.saturating_sub(1) };
            rec(out, current, depth, next_hi, min_last, star);
            current.pop();
            if i == 0 {
                break;
            }
            i -= 1;
        }
    }
    rec(&mut out, &mut current, depth, max, min_last, star);
    out
}

/// One deformed chain term: ∏_k z_k^{q^{i_k}} over the family denominators.
fn chain_term_deformed(
    field: &Rc<FieldSpec>,
    family: MplFamily,
    index: &Index,
    point: &PointTuple,
    chain: &[u64],
) -> Result<FactoredRational, MplError> {
    let mut den: BTreeMap<u32, u64> = BTreeMap::new();
    let mut sign_exp = 0u64;
    for (k, &i) in chain.iter().enumerate() {
        let s = index.parts[k];
        match family {
            MplFamily::Kochubei => {
                *den.entry(i as u32).or_insert(0) += s;
            }
            MplFamily::Carlitz => {
                // 𝕃_i^s = (-1)^{i s} ∏_{j=1..i} (θ^{q^j} - t)^s
                for j in 1..=i {
                    *den.entry(j as u32).or_insert(0) += s;
                }
                sign_exp += i * s;
            }
        }
    }
    let mut fr = FactoredRational::bracket_product_den(field, 0, &den);
    let mut scalar = PerfectedScalar {
        depth: 0,
        num: SPoly::constant(field, field.sign_pow(sign_exp)),
        den: SPoly::one(field),
    };
    for (k, &i) in chain.iter().enumerate() {
        let z = point.entries[k].embed(0).frobenius_power(i as i32)?;
        scalar = scalar.mul(&z);
    }
    fr = fr.scalar_mul(&scalar);
    Ok(fr)
}

/// Labeled cutoff sum of a (multiple) polylogarithm: one term per chain with
/// all indices <= N. `deformed = false` specializes each term at t = θ.
pub fn mpl_cutoff(
    field: &Rc<FieldSpec>,
    family: MplFamily,
    index: &Index,
    point: &PointTuple,
    n_cutoff: u64,
    star: bool,
    deformed: bool,
) -> Result<CutoffSum, MplError> {
    check_bounds(field, family, index, point)?;
    let min_last = match family {
        MplFamily::Kochubei => 1,
        MplFamily::Carlitz => 0,
    };
    let chains = enumerate_chains(index.depth(), n_cutoff, min_last, star);
    let theta = PerfectedScalar::theta(field, 0);
    let mut terms = vec![];
    for chain in chains {
        let fr = chain_term_deformed(field, family, index, point, &chain)?;
        let fr = if deformed {
            fr
        } else {
            FactoredRational::from_scalar(&fr.specialize_t(&theta).expect("t=θ is regular here"))
        };
        terms.push((Label::Chain(chain), fr));
    }
    let star_tag = if star { "*" } else { "" };
    let family_tag = match family {
        MplFamily::Kochubei => "K",
        MplFamily::Carlitz => "C",
    };
    Ok(CutoffSum::new(
        format!("Li{}_{},{}", star_tag, family_tag, index),
        n_cutoff,
        terms,
    ))
}

/// Exact forward Frobenius relations on cutoffs:
/// - Kochubei depth 1 (E2): twist(z/(θ-t)^s + Li^{<=N}) = Li^{<=N+1};
/// - Kochubei depth r (E3): twist(z_r/(θ-t)^{s_r}·Li_{(s_1..s_{r-1})}^{<=N} + Li_𝔰^{<=N}) = Li_𝔰^{<=N+1};
/// - Carlitz depth 1 (E10): β + twist(Li^{<=N})/(t-θ^q)^n = Li^{<=N+1}.
pub fn verify_polylog_frobenius(
    field: &Rc<FieldSpec>,
    family: MplFamily,
    index: &Index,
    point: &PointTuple,
    n_cutoff: u64,
) -> Result<DefectReport, MplError> {
    check_bounds(field, family, index, point)?;
    match family {
        MplFamily::Kochubei => {
            let r = index.depth();
            let full_prev = mpl_cutoff(field, family, index, point, n_cutoff, false, true)?;
            let full_next = mpl_cutoff(field, family, index, point, n_cutoff + 1, false, true)?;
            // boundary: z_r/(θ-t)^{s_r} times the depth r-1 truncation
            let s_r = index.parts[r - 1];
            let z_r = point.entries[r - 1].embed(0);
            let mut bden = BTreeMap::new();
            bden.insert(0u32, s_r);
            let boundary_factor =
                FactoredRational::bracket_product_den(field, 0, &bden).scalar_mul(&z_r);
            let mut rhs_terms: Vec<(Label, FactoredRational)> = vec![];
            if r == 1 {
                rhs_terms.push((Label::Chain(vec![1]), boundary_factor.twist_forward(1)));
            } else {
                let sub_index = Index::new(index.parts[..r - 1].to_vec());
                let sub_point = PointTuple::new(point.entries[..r - 1].to_vec());
                let sub = mpl_cutoff(field, family, &sub_index, &sub_point, n_cutoff, false, true)?;
                for (label, t) in &sub.terms {
                    if let Label::Chain(c) = label {
                        let mut chain: Vec<u64> = c.iter().map(|i| i + 1).collect();
                        chain.push(1);
                        rhs_terms.push((
                            Label::Chain(chain),
                            t.mul(&boundary_factor).twist_forward(1),
                        ));
                    }
                }
            }
            for (label, t) in &full_prev.terms {
                if let Label::Chain(c) = label {
                    let chain: Vec<u64> = c.iter().map(|i| i + 1).collect();
                    rhs_terms.push((Label::Chain(chain), t.twist_forward(1)));
                }
            }
            let rhs = CutoffSum::new("twist(boundary + Li)", n_cutoff + 1, rhs_terms);
            Ok(crate::hypergeom::labelwise_defect(
                format!("E2/E3 kochubei {} N={}", index, n_cutoff),
                &full_next,
                &rhs,
            ))
        }
        MplFamily::Carlitz => {
            if index.depth() != 1 {
                return Err(MplError::Unsupported(
                    "the Carlitz Frobenius relation is implemented at depth 1".into(),
                ));
            }
            let n = index.parts[0];
            let beta = point.entries[0].embed(0);
            let prev = mpl_cutoff(field, family, index, point, n_cutoff, false, true)?;
            let next = mpl_cutoff(field, family, index, point, n_cutoff + 1, false, true)?;
            // β + twist(prev)/(t-θ^q)^n: (t-θ^q)^n = (-1)^n (θ^q - t)^n
            let mut bden = BTreeMap::new();
            bden.insert(1u32, n);
            let divisor = FactoredRational::bracket_product_den(field, 0, &bden).scalar_mul(
                &PerfectedScalar {
                    depth: 0,
                    num: SPoly::constant(field, field.sign_pow(n)),
                    den: SPoly::one(field),
                },
            );
            let mut rhs_terms: Vec<(Label, FactoredRational)> =
                vec![(Label::Chain(vec![0]), FactoredRational::from_scalar(&beta))];
            for (label, t) in &prev.terms {
                if let Label::Chain(c) = label {
                    rhs_terms.push((
                        Label::Chain(vec![c[0] + 1]),
                        t.twist_forward(1).mul(&divisor),
                    ));
                }
            }
            let rhs = CutoffSum::new("beta + twist(Li_C)/(t-θ^q)^n", n_cutoff + 1, rhs_terms);
            Ok(crate::hypergeom::labelwise_defect(
                format!("E10 carlitz ({}) N={}", n, n_cutoff),
                &next,
                &rhs,
            ))
        }
    }
}

/// One term of a stuffle expansion: a merged index with its merged points.
#[derive(Clone, Debug)]
pub struct StuffleTerm {
    pub index: Index,
    pub point: PointTuple,
}

/// Recursive interleaving: at each slot consume the head of 𝔰_1, of 𝔰_2, or
/// of both merged (parts added, points multiplied).
pub fn stuffle_expand(
    s1: &Index,
    s2: &Index,
    z1: &PointTuple,
    z2: &PointTuple,
) -> Vec<StuffleTerm> {
    fn rec(
        a: &[u64],
        b: &[u64],
        za: &[RationalScalar],
        zb: &[RationalScalar],
    ) -> Vec<(Vec<u64>, Vec<RationalScalar>)> {
        if a.is_empty() {
            return vec![(b.to_vec(), zb.to_vec())];
        }
        if b.is_empty() {
            return vec![(a.to_vec(), za.to_vec())];
        }
        let mut out = vec![];
        for (parts, points) in rec(&a[1..], b, &za[1..], zb) {
            let mut p = vec![a[0]];
            p.extend(parts);
            let mut z = vec![za[0].clone()];
            z.extend(points);
            out.push((p, z));
        }
        for (parts, points) in rec(a, &b[1..], za, &zb[1..]) {
            let mut p = vec![b[0]];
            p.extend(parts);
            let mut z = vec![zb[0].clone()];
            z.extend(points);
            out.push((p, z));
        }
        for (parts, points) in rec(&a[1..], &b[1..], &za[1..], &zb[1..]) {
            let mut p = vec![a[0] + b[0]];
            p.extend(parts);
            let mut z = vec![za[0].mul(&zb[0])];
            z.extend(points);
            out.push((p, z));
        }
        out
    }
    rec(&s1.parts, &s2.parts, &z1.entries, &z2.entries)
        .into_iter()
        .map(|(parts, points)| StuffleTerm { index: Index::new(parts), point: PointTuple::new(points) })
        .collect()
}

/// Exact stuffle identity at uniform cutoff: Li_{𝔰1}·Li_{𝔰2} = Σ Li_{v}.
pub fn verify_stuffle(
    field: &Rc<FieldSpec>,
    s1: &Index,
    s2: &Index,
    z1: &PointTuple,
    z2: &PointTuple,
    n_cutoff: u64,
) -> Result<DefectReport, MplError> {
    let lhs1 = mpl_cutoff(field, MplFamily::Kochubei, s1, z1, n_cutoff, false, true)?;
    let lhs2 = mpl_cutoff(field, MplFamily::Kochubei, s2, z2, n_cutoff, false, true)?;
    let mut terms: Vec<FactoredRational> = vec![];
    for (_, t1) in &lhs1.terms {
        for (_, t2) in &lhs2.terms {
            terms.push(t1.mul(t2));
        }
    }
    for st in stuffle_expand(s1, s2, z1, z2) {
        let rhs = mpl_cutoff(field, MplFamily::Kochubei, &st.index, &st.point, n_cutoff, false, true)?;
        for (_, t) in &rhs.terms {
            terms.push(t.neg());
        }
    }
    let defect = crate::bivar::sum_grouped(field, 0, terms);
    Ok(DefectReport::new(
        format!("E7 stuffle {} x {} N={}", s1, s2, n_cutoff),
        vec![("defect".into(), defect)],
    ))
}

/// Star cutoff of the run (s_j, …, s_l) with points (α_j, …, α_l); here `lo`
/// and `hi` are 1-based positions l <= j into 𝔰.
fn star_run(
    field: &Rc<FieldSpec>,
    s: &Index,
    alpha: &PointTuple,
    lo: usize,
    hi: usize,
    n_cutoff: u64,
) -> Result<CutoffSum, MplError> {
    let parts: Vec<u64> = (lo..=hi).rev().map(|k| s.parts[k - 1]).collect();
    let points: Vec<RationalScalar> = (lo..=hi).rev().map(|k| alpha.entries[k - 1].clone()).collect();
    mpl_cutoff(field, MplFamily::Kochubei, &Index::new(parts), &PointTuple::new(points), n_cutoff, true, true)
}

/// Non-star cutoff of the run (s_l, …, s_j), increasing positions.
fn plain_run(
    field: &Rc<FieldSpec>,
    s: &Index,
    alpha: &PointTuple,
    lo: usize,
    hi: usize,
    n_cutoff: u64,
) -> Result<CutoffSum, MplError> {
    let parts: Vec<u64> = (lo..=hi).map(|k| s.parts[k - 1]).collect();
    let points: Vec<RationalScalar> = (lo..=hi).map(|k| alpha.entries[k - 1].clone()).collect();
    mpl_cutoff(field, MplFamily::Kochubei, &Index::new(parts), &PointTuple::new(points), n_cutoff, false, true)
}

fn sign(field: &Rc<FieldSpec>, k: usize) -> PerfectedScalar {
    PerfectedScalar {
        depth: 0,
        num: SPoly::constant(field, field.sign_pow(k as u64)),
        den: SPoly::one(field),
    }
}

/// Both inclusion–exclusion identities between star and non-star runs, exact
/// at uniform cutoff N, for 1 <= l <= j <= dep(𝔰).
pub fn verify_star_inclusion_exclusion(
    field: &Rc<FieldSpec>,
    s: &Index,
    alpha: &PointTuple,
    l: usize,
    j: usize,
    n_cutoff: u64,
) -> Result<DefectReport, MplError> {
    assert!(1 <= l && l <= j && j <= s.depth(), "need 1 <= l <= j <= dep");
    check_bounds(field, MplFamily::Kochubei, s, alpha)?;
    let mut defects = vec![];

    // first identity:
    // (-1)^l Li*_{(s_j..s_l)} = Σ_{i=l+1}^{j} (-1)^{i-1} Li_{(s_l..s_{i-1})}·Li*_{(s_j..s_i)}
    //                           + (-1)^j Li_{(s_l..s_j)}
    {
        let mut terms: Vec<FactoredRational> = vec![];
        for (_, t) in &star_run(field, s, alpha, l, j, n_cutoff)?.terms {
            terms.push(t.scalar_mul(&sign(field, l)));
        }
        for i in l + 1..=j {
            let plain = plain_run(field, s, alpha, l, i - 1, n_cutoff)?;
            let star = star_run(field, s, alpha, i, j, n_cutoff)?;
            for (_, a) in &plain.terms {
                for (_, b) in &star.terms {
                    terms.push(a.mul(b).scalar_mul(&sign(field, i - 1)).neg());
                }
            }
        }
        for (_, t) in &plain_run(field, s, alpha, l, j, n_cutoff)?.terms {
            terms.push(t.scalar_mul(&sign(field, j)).neg());
        }
        let d = crate::bivar::sum_grouped(field, 0, terms);
        if !d.is_zero() {
            defects.push(("first identity".to_string(), d));
        }
    }

    // second identity:
    // (-1)^j Li*_{(s_j..s_l)} = Σ_{i=l+1}^{j} (-1)^i Li_{(s_i..s_j)}·Li*_{(s_{i-1}..s_l)}
    //                           + (-1)^l Li_{(s_l..s_j)}
    {
        let mut terms: Vec<FactoredRational> = vec![];
        for (_, t) in &star_run(field, s, alpha, l, j, n_cutoff)?.terms {
            terms.push(t.scalar_mul(&sign(field, j)));
        }
        for i in l + 1..=j {
            let plain = plain_run(field, s, alpha, i, j, n_cutoff)?;
            let star = star_run(field, s, alpha, l, i - 1, n_cutoff)?;
            for (_, a) in &plain.terms {
                for (_, b) in &star.terms {
                    terms.push(a.mul(b).scalar_mul(&sign(field, i)).neg());
                }
            }
        }
        for (_, t) in &plain_run(field, s, alpha, l, j, n_cutoff)?.terms {
            terms.push(t.scalar_mul(&sign(field, l)).neg());
        }
        let d = crate::bivar::sum_grouped(field, 0, terms);
        if !d.is_zero() {
            defects.push(("second identity".to_string(), d));
        }
    }

    Ok(DefectReport::new(
        format!("E6 inclusion-exclusion {} l={} j={} N={}", s, l, j, n_cutoff),
        defects,
    ))
}

/// ∞-adically bounded value of a (multiple) polylogarithm at t = θ.
pub fn mpl_value(
    field: &Rc<FieldSpec>,
    family: MplFamily,
    index: &Index,
    point: &PointTuple,
    target: Ratio<i64>,
    star: bool,
) -> Result<PartialValue, MplError> {
    check_bounds(field, family, index, point)?;
    let q = field.q as i64;
    let r = index.depth();
    if point.entries.iter().any(|z| z.is_zero()) {
        return Ok(PartialValue {
            value: PerfectedScalar::zero(field, 0),
            error_valuation: Valuation::infinite(),
            leading_valuation: None,
            nonvanishing_certified: false,
            terms_used: 0,
        });
    }
    // per-slot margins δ_k and offsets c_k so that
    // v(z_k^{q^i}/den_k(i)) = q^i δ_k - c_k
    let mut deltas = vec![];
    let mut offsets = vec![];
    for (s, z) in index.parts.iter().zip(&point.entries) {
        let v = z.valuation().0.expect("nonzero");
        match family {
            MplFamily::Kochubei => {
                deltas.push(v + Ratio::from_integer(*s as i64));
                offsets.push(Ratio::from_integer(0));
            }
            MplFamily::Carlitz => {
                let c = Ratio::new(*s as i64 * q, q - 1);
                deltas.push(v + c);
                offsets.push(c);
            }
        }
    }
    let min_last: u64 = match family {
        MplFamily::Kochubei => 1,
        MplFamily::Carlitz => 0,
    };
    // componentwise-minimal index for slot k
    let slot_min = |k: usize| -> u64 {
        if star {
            min_last
        } else {
            min_last + (r - 1 - k) as u64
        }
    };
    let chain_val = |chain: &[u64]| -> Ratio<i64> {
        let mut acc = Ratio::from_integer(0);
        for (k, &i) in chain.iter().enumerate() {
            acc = acc + Ratio::from_integer(q.pow(i as u32)) * deltas[k] - offsets[k];
        }
        acc
    };
    // tail bound after cutoff N: leading index >= N+1, others componentwise
    // minimal
    let tail_bound = |n: u64| -> Ratio<i64> {
        let mut chain = vec![n + 1];
        for k in 1..r {
            chain.push(slot_min(k));
        }
        chain_val(&chain)
    };
    let mut n_cutoff = slot_min(0).max(1);
    while tail_bound(n_cutoff) < target {
        n_cutoff += 1;
        assert!(n_cutoff < 10_000, "cutoff out of range");
    }

    let theta = PerfectedScalar::theta(field, 0);
    let chains = enumerate_chains(r, n_cutoff, min_last, star);
    let mut value = PerfectedScalar::zero(field, 0);
    for chain in &chains {
        let term = chain_term_deformed(field, family, index, point, chain)?;
        value = value.add(&term.specialize_t(&theta).expect("regular at t=θ"));
    }

    // the componentwise-minimal chain is the unique valuation minimizer when
    // every δ_k > 0, which the bound check guarantees
    let minimal: Vec<u64> = (0..r).map(slot_min).collect();
    let leading = chain_val(&minimal);

    Ok(PartialValue {
        value,
        error_valuation: Valuation::finite(tail_bound(n_cutoff)),
        leading_valuation: Some(leading),
        nonvanishing_certified: !chains.is_empty(),
        terms_used: chains.len() as u64,
    })
}

/// Kochubei zeta value ζ_K(n) = Li_{K,n}(1), as a bounded partial value.
pub fn kochubei_zeta(
    field: &Rc<FieldSpec>,
    n: u64,
    target: Ratio<i64>,
) -> Result<PartialValue, MplError> {
    mpl_value(
        field,
        MplFamily::Kochubei,
        &Index::new(vec![n]),
        &PointTuple::ones(field, 1),
        target,
        false,
    )
}

/// Depth-2 index bookkeeping for weight w: the enumerated indices, their
/// count (w-1), and the often-quoted dimension 2^{w-1} (which counts all
/// compositions of w, not the depth-2 ones). Both numbers are reported.
pub fn depth2_index_report(w: u64) -> (Vec<Index>, u64, u64) {
    let indices: Vec<Index> =
        (1..w).map(|s1| Index::new(vec![s1, w - s1])).collect();
    let count = indices.len() as u64;
    let cited = 1u64 << (w - 1);
    (indices, count, cited)
}

/// Express a star cutoff through non-star ones by the first
/// inclusion–exclusion identity, recursively; used by the closure check.
pub fn star_via_inclusion_exclusion(
    field: &Rc<FieldSpec>,
    tuple: &Index,
    points: &PointTuple,
    n_cutoff: u64,
) -> Result<Vec<FactoredRational>, MplError> {
    let m = tuple.depth();
    if m == 1 {
        let cs = mpl_cutoff(field, MplFamily::Kochubei, tuple, points, n_cutoff, false, true)?;
        return Ok(cs.terms.into_iter().map(|(_, t)| t).collect());
    }
    // With 𝔰 = reverse(tuple), the identity at (l, j) = (1, m) reads
    // Li*_tuple = -[ Σ_{i=2}^{m} (-1)^{i-1} Li_{(s_1..s_{i-1})}·Li*_{(s_m..s_i)}
    //                + (-1)^m Li_{(s_1..s_m)} ]   (signs relative to (-1)^1).
    let s = tuple.reversed();
    let alpha = PointTuple::new(points.entries.iter().rev().cloned().collect());
    let mut out: Vec<FactoredRational> = vec![];
    for i in 2..=m {
        let plain = plain_run(field, &s, &alpha, 1, i - 1, n_cutoff)?;
        // Li*_{(s_m..s_i)} = star of the prefix (t_1..t_{m+1-i})
        let sub_tuple = Index::new(tuple.parts[..m + 1 - i].to_vec());
        let sub_points = PointTuple::new(points.entries[..m + 1 - i].to_vec());
        let star_terms = star_via_inclusion_exclusion(field, &sub_tuple, &sub_points, n_cutoff)?;
        // overall sign: -(-1)^{i-1} = (-1)^i
        let sg = sign(field, i);
        for (_, a) in &plain.terms {
            for b in &star_terms {
                out.push(a.mul(b).scalar_mul(&sg));
            }
        }
    }
    let plain_full = plain_run(field, &s, &alpha, 1, m, n_cutoff)?;
    let sg = sign(field, m + 1);
    for (_, a) in &plain_full.terms {
        out.push(a.scalar_mul(&sg));
    }
    Ok(out)
}
