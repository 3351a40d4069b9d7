//! The acceptance battery: every criterion as a deterministic, seeded run
//! returning one pass/fail result. The CLI `suite` subcommand and the
//! acceptance test target both call [`run_suite`]; two runs with the same
//! manifest produce identical JSON.

use std::rc::Rc;

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::field::{field_create, field_create_with_cap, FieldSpec};
use crate::hypergeom::{
    algebraic_witness, expansion_profile, thgf_value, verify_expansion_consistency,
    verify_hg_difference_equation, verify_thgf_frobenius, verify_thgf_kpl_bridge, HgfParams,
};
use crate::literal::{format_rational, parse_rational};
use crate::motive::{
    build_motive, cross_check_p_forms, omega_cutoff, p_bd_cutoff, period_value, pi_tilde,
    verify_frobenius_system, verify_frobenius_system_fr, verify_omega_twist,
    verify_psi_star_product, MotiveKind,
};
use crate::polylog::{
    kochubei_zeta, mpl_value, verify_polylog_frobenius, verify_star_inclusion_exclusion,
    verify_stuffle, Index, MplFamily, PointTuple,
};
use crate::scalar::{RationalScalar, Valuation};
use crate::spoly::SPoly;

const SUITE_SEED: u64 = 0x632d_7061_6470_7571;

/// One acceptance criterion's outcome.
#[derive(Clone, Debug)]
pub struct CriterionResult {
    pub id: &'static str,
    pub name: &'static str,
    pub passed: bool,
    pub cases: u64,
    pub failures: Vec<String>,
}

impl CriterionResult {
    fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "id": self.id,
            "name": self.name,
            "passed": self.passed,
            "cases": self.cases,
            "failures": self.failures,
        })
    }
}

pub struct SuiteOutcome {
    pub results: Vec<CriterionResult>,
    pub manifest: serde_json::Value,
}

impl SuiteOutcome {
    pub fn all_passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "manifest": self.manifest,
            "results": self.results.iter().map(|r| r.to_json()).collect::<Vec<_>>(),
            "all_passed": self.all_passed(),
        })
    }
}

struct Tally {
    cases: u64,
    failures: Vec<String>,
}

impl Tally {
    fn new() -> Self {
        Tally { cases: 0, failures: vec![] }
    }

    fn record(&mut self, ok: bool, label: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok && self.failures.len() < 16 {
            self.failures.push(label());
        } else if !ok {
            self.failures.push("…".into());
        }
    }

    fn finish(self, id: &'static str, name: &'static str) -> CriterionResult {
        CriterionResult {
            id,
            name,
            passed: self.failures.is_empty(),
            cases: self.cases,
            failures: self.failures,
        }
    }
}

fn fields() -> Vec<Rc<FieldSpec>> {
    vec![
        field_create(2, 1, None).unwrap(),
        field_create(3, 1, None).unwrap(),
        field_create(2, 2, None).unwrap(),
    ]
}

fn rng_for(tag: &str) -> ChaCha20Rng {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for b in tag.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x1000_0000_01b3);
    }
    ChaCha20Rng::seed_from_u64(SUITE_SEED ^ h)
}

fn fnv(tag: &str) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for b in tag.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x1000_0000_01b3);
    }
    h
}

/// A random scalar with v(α) = target exactly and a monomial denominator.
fn random_scalar_at(field: &Rc<FieldSpec>, rng: &mut ChaCha20Rng, v: i64) -> RationalScalar {
    let nonzero = |rng: &mut ChaCha20Rng| -> crate::field::Fq {
        crate::field::Fq(rng.gen_range(1..field.q) as u16)
    };
    if v <= 0 {
        // polynomial of degree -v with a random lower term
        let mut num = SPoly::monomial(field, nonzero(rng), (-v) as u64);
        if v < 0 {
            let low = rng.gen_range(0..(-v) as u64);
            num.add_term(low, crate::field::Fq(rng.gen_range(0..field.q) as u16));
        }
        RationalScalar::from_poly(num)
    } else {
        // (c0 + c1 θ)/θ^{k}: valuation k - deg
        let deg = rng.gen_range(0..=1u64);
        let mut num = SPoly::monomial(field, nonzero(rng), deg);
        if deg > 0 {
            num.add_term(0, crate::field::Fq(rng.gen_range(0..field.q) as u16));
        }
        let den = SPoly::monomial(field, crate::field::Fq::ONE, deg + v as u64);
        RationalScalar::new(num, den).unwrap()
    }
}

/// A random point strictly inside |z| < q^{bound_log_q} (valuation > -bound).
fn random_in_disc(
    field: &Rc<FieldSpec>,
    rng: &mut ChaCha20Rng,
    bound_log_q: Ratio<i64>,
) -> RationalScalar {
    let lo = (-bound_log_q).floor().to_integer() + 1;
    let v = rng.gen_range(lo..=lo + 2);
    random_scalar_at(field, rng, v)
}

/// C1: the exact identity battery E1–E7 and E10.
fn criterion1() -> CriterionResult {
    let mut t = Tally::new();
    let mut rng = rng_for("c1");
    for field in fields() {
        let q = field.q;
        // E1: Ω twist relation
        for m in 1..=8u64 {
            for depth in [0u32, 1] {
                let rep = verify_omega_twist(&field, m, depth);
                t.record(rep.exact, || format!("E1 q={} m={} M={}", q, m, depth));
            }
        }
        // E2: KPL relation, weights <= 4
        for s in 1..=4u64 {
            for _ in 0..20 {
                let z = random_in_disc(&field, &mut rng, Ratio::from_integer(s as i64));
                let rep = verify_polylog_frobenius(
                    &field,
                    MplFamily::Kochubei,
                    &Index::new(vec![s]),
                    &PointTuple::new(vec![z.clone()]),
                    8,
                )
                .unwrap();
                t.record(rep.exact, || format!("E2 q={} s={} z={}", q, s, format_rational(&z)));
            }
        }
        // E3: KMPL recursion, depths 2..3, weights <= 4
        let indices: Vec<Vec<u64>> = vec![
            vec![1, 1],
            vec![1, 2],
            vec![2, 1],
            vec![3, 1],
            vec![1, 1, 1],
            vec![1, 2, 1],
            vec![2, 1, 1],
        ];
        for parts in &indices {
            let index = Index::new(parts.clone());
            for _ in 0..20 {
                let points = PointTuple::new(
                    parts
                        .iter()
                        .map(|&s| random_in_disc(&field, &mut rng, Ratio::from_integer(s as i64)))
                        .collect(),
                );
                let n = if parts.len() == 3 { 6 } else { 8 };
                let rep =
                    verify_polylog_frobenius(&field, MplFamily::Kochubei, &index, &points, n)
                        .unwrap();
                t.record(rep.exact, || format!("E3 q={} s={:?}", q, parts));
            }
        }
        // E4: THGF relation with the restricted boundary term
        let tuples: Vec<(Vec<i64>, Vec<i64>)> = vec![
            (vec![1, 1], vec![2]),
            (vec![1, 2], vec![2]),
            (vec![2, 2], vec![3]),
            (vec![1, 1, 1], vec![2, 2]),
            (vec![1, 2, 4], vec![3, 4]),
            (vec![2, 3], vec![4]),
        ];
        for (a, b) in &tuples {
            let params = HgfParams::new(a.clone(), b.clone()).unwrap();
            for _ in 0..20 {
                let alpha =
                    random_in_disc(&field, &mut rng, Ratio::from_integer(params.radius_log_q()));
                let rep = verify_thgf_frobenius(&field, &params, &alpha, 8).unwrap();
                t.record(rep.exact, || {
                    format!("E4 q={} a={:?} b={:?} alpha={}", q, a, b, format_rational(&alpha))
                });
            }
        }
        // E5: the P_{b,d} system (symbolic for all, expanded for small)
        let mut e5_cases = 0;
        for b in [
            vec![2i64],
            vec![3],
            vec![4],
            vec![2, 2],
            vec![2, 3],
            vec![3, 3],
            vec![2, 4],
            vec![3, 4],
            vec![2, 2, 2],
            vec![2, 2, 3],
        ] {
            let dmin = b.iter().copied().max().unwrap();
            for d in dmin..=4 {
                let motive = build_motive(&field, MotiveKind::PSystem { b: b.clone(), d }).unwrap();
                let rep = verify_frobenius_system(&motive, 8).unwrap();
                t.record(rep.exact, || format!("E5 q={} b={:?} d={}", q, b, d));
                e5_cases += 1;
                if b.iter().all(|&x| x <= 3) && q <= 3 && d <= 3 {
                    let rep = verify_frobenius_system_fr(&motive, 4, 1 << 21).unwrap();
                    t.record(rep.exact, || format!("E5-fr q={} b={:?} d={}", q, b, d));
                }
            }
        }
        assert!(e5_cases >= 20);
        // E6: star inclusion–exclusion
        let star_indices: Vec<Vec<u64>> = vec![vec![1, 2], vec![2, 2], vec![1, 3], vec![1, 1, 2]];
        for parts in &star_indices {
            let index = Index::new(parts.clone());
            let r = parts.len();
            for _ in 0..20 {
                let points = PointTuple::new(
                    parts
                        .iter()
                        .map(|&s| random_in_disc(&field, &mut rng, Ratio::from_integer(s as i64)))
                        .collect(),
                );
                let n = if r == 3 { 4 } else { 6 };
                for l in 1..=r {
                    for j in l..=r {
                        let rep =
                            verify_star_inclusion_exclusion(&field, &index, &points, l, j, n)
                                .unwrap();
                        t.record(rep.exact, || format!("E6 q={} s={:?} l={} j={}", q, parts, l, j));
                    }
                }
            }
        }
        // E7: stuffle, weights <= 5 and depths <= 3
        let pairs: Vec<(Vec<u64>, Vec<u64>)> = vec![
            (vec![1], vec![1]),
            (vec![1], vec![2]),
            (vec![2], vec![2]),
            (vec![1, 1], vec![1]),
            (vec![1, 2], vec![1]),
            (vec![1, 1], vec![1, 1]),
            (vec![2, 2], vec![1]),
            (vec![1, 1, 1], vec![1, 1]),
        ];
        for (s1, s2) in &pairs {
            for _ in 0..20 {
                let z1 = PointTuple::new(
                    s1.iter()
                        .map(|&s| random_in_disc(&field, &mut rng, Ratio::from_integer(s as i64)))
                        .collect(),
                );
                let z2 = PointTuple::new(
                    s2.iter()
                        .map(|&s| random_in_disc(&field, &mut rng, Ratio::from_integer(s as i64)))
                        .collect(),
                );
                let rep = verify_stuffle(
                    &field,
                    &Index::new(s1.clone()),
                    &Index::new(s2.clone()),
                    &z1,
                    &z2,
                    5,
                )
                .unwrap();
                t.record(rep.exact, || format!("E7 q={} {:?}x{:?}", q, s1, s2));
            }
        }
        // E10: Carlitz polylog relation
        let qi = q as i64;
        for n in 1..=4u64 {
            for _ in 0..20 {
                let beta = random_in_disc(&field, &mut rng, Ratio::new(n as i64 * qi, qi - 1));
                let rep = verify_polylog_frobenius(
                    &field,
                    MplFamily::Carlitz,
                    &Index::new(vec![n]),
                    &PointTuple::new(vec![beta]),
                    8,
                )
                .unwrap();
                t.record(rep.exact, || format!("E10 q={} n={}", q, n));
            }
        }
    }
    t.finish("C1", "exact identity battery E1-E7, E10")
}

/// C2: the explicit 2x2 motive for a=(1..1), b=(2..2), d=2.
fn criterion2() -> CriterionResult {
    let mut t = Tally::new();
    let mut rng = rng_for("c2");
    for field in fields() {
        for s in 1..=3usize {
            let params = HgfParams::new(vec![1; s + 1], vec![2; s]).unwrap();
            let alpha = random_in_disc(&field, &mut rng, Ratio::from_integer(s as i64));
            let motive = build_motive(
                &field,
                MotiveKind::Thgf { params, d: 2, alpha: alpha.clone() },
            )
            .unwrap();
            // expected: ((t-θ)^s, 0; (-1)^s α, (t-θ)^s)
            let t_minus_theta = crate::bivar::FactoredRational::bracket(&field, 0, 0).neg();
            let diag = t_minus_theta.pow(s as u64);
            let sign = crate::scalar::PerfectedScalar {
                depth: 0,
                num: SPoly::constant(&field, field.sign_pow(s as u64)),
                den: SPoly::one(&field),
            };
            let entry21 =
                crate::bivar::FactoredRational::from_scalar(&alpha.embed(0)).scalar_mul(&sign);
            let ok = motive.phi.get(0, 0).eq_value(&diag)
                && motive.phi.get(1, 1).eq_value(&diag)
                && motive.phi.get(0, 1).is_zero()
                && motive.phi.get(1, 0).eq_value(&entry21);
            t.record(ok, || format!("q={} s={}", field.q, s));
        }
    }
    t.finish("C2", "explicit motive matrix reproduction (s <= 3)")
}

/// C3: P_{b,d} with all b_j = d = 2 equals (Ω^{<=m})^s.
fn criterion3() -> CriterionResult {
    let mut t = Tally::new();
    for field in fields() {
        for s in 1..=3usize {
            for m in 0..=6u64 {
                let p = p_bd_cutoff(&field, &vec![2; s], 2, m, 0).unwrap();
                let omega = omega_cutoff(&field, m, 0).value;
                t.record(p.eq_value(&omega.pow(s as u64)), || {
                    format!("q={} s={} m={}", field.q, s, m)
                });
            }
        }
    }
    t.finish("C3", "P_(b,d) = Ω^s when all b_j = d = 2")
}

/// C4: the bridge identities, termwise and at the value level.
fn criterion4() -> CriterionResult {
    let mut t = Tally::new();
    let mut rng = rng_for("c4");
    for field in fields() {
        for m in 1..=3u32 {
            for s in 1..=3u32 {
                let rep = verify_thgf_kpl_bridge(&field, m, s, 4);
                t.record(rep.exact, || format!("bridge q={} m={} s={}", field.q, m, s));
            }
        }
    }
    // value level over q in {2, 3}: F(1..1;2..2)(α)^q = Li_{K,s}(α) to joint
    // error valuation >= 100
    for field in [field_create(2, 1, None).unwrap(), field_create(3, 1, None).unwrap()] {
        for s in 1..=3u64 {
            let params = HgfParams::new(vec![1; s as usize + 1], vec![2; s as usize]).unwrap();
            for _ in 0..5 {
                let alpha = random_in_disc(&field, &mut rng, Ratio::from_integer(s as i64));
                let f = thgf_value(&field, &params, &alpha, Ratio::from_integer(128)).unwrap();
                let li = mpl_value(
                    &field,
                    MplFamily::Kochubei,
                    &Index::new(vec![s]),
                    &PointTuple::new(vec![alpha.clone()]),
                    Ratio::from_integer(128),
                    false,
                )
                .unwrap();
                let diff = f.value.pow(field.q as u64).sub(&li.value);
                t.record(diff.valuation().ge(&Valuation::from_int(100)), || {
                    format!("value q={} s={} alpha={}", field.q, s, format_rational(&alpha))
                });
            }
        }
    }
    t.finish("C4", "KPL bridge: termwise and at the value level")
}

/// C5: exhaustive profile/condition equivalence.
fn criterion5() -> CriterionResult {
    let mut t = Tally::new();
    fn all_sorted(len: usize, max: i64) -> Vec<Vec<i64>> {
        let mut out = vec![];
        fn rec(out: &mut Vec<Vec<i64>>, cur: &mut Vec<i64>, len: usize, lo: i64, max: i64) {
            if cur.len() == len {
                out.push(cur.clone());
                return;
            }
            for v in lo..=max {
                cur.push(v);
                rec(out, cur, len, v, max);
                cur.pop();
            }
        }
        rec(&mut out, &mut vec![], len, 1, max);
        out
    }
    for s in 0..=3usize {
        for a in all_sorted(s + 1, 4) {
            for b in all_sorted(s, 4) {
                let params = HgfParams::new(a.clone(), b.clone()).unwrap();
                let (cond, _) = crate::criteria::check_transcendence_condition(&params);
                let profile = expansion_profile(&params);
                let neg = !profile.negative_sites().is_empty();
                let cvanish = profile.c_of(params.d()) == 0
                    && profile.c_of(params.d() + 2) == 0
                    && profile.c_of(0) == 0
                    && profile.c_of(-3) == 0;
                t.record(cond == neg && cvanish, || format!("a={:?} b={:?}", a, b));
            }
        }
    }
    t.finish("C5", "condition b_j > a_(j+1) <=> some c(l) < 0, exhaustive")
}

/// C6: expansion-profile consistency against the Pochhammer route.
fn criterion6() -> CriterionResult {
    let mut t = Tally::new();
    let field = field_create(3, 1, None).unwrap();
    let tuples: Vec<(Vec<i64>, Vec<i64>)> = vec![
        (vec![1, 1], vec![2]),
        (vec![1, 2], vec![2]),
        (vec![2, 2], vec![3]),
        (vec![1, 1, 2], vec![2, 3]),
        (vec![1, 3], vec![4]),
        (vec![1, 2, 3], vec![3, 4]),
        (vec![2, 2, 2], vec![4, 4]),
        (vec![1, 1], vec![1]),
        (vec![1, 4], vec![4]),
        (vec![1, 1, 1, 1], vec![2, 3, 4]),
    ];
    for (a, b) in &tuples {
        let params = HgfParams::new(a.clone(), b.clone()).unwrap();
        let rep = verify_expansion_consistency(&field, &params, 6).unwrap();
        t.record(rep.exact, || format!("a={:?} b={:?}", a, b));
    }
    t.finish("C6", "q^d-power expansion equals the Pochhammer route, n <= 6")
}

/// C7: the algebraicity witness on b_j <= a_(j+1) tuples, cutoffs <= 8.
fn criterion7() -> CriterionResult {
    let mut t = Tally::new();
    let mut rng = rng_for("c7");
    let field = field_create(3, 1, None).unwrap();
    let tuples: Vec<(Vec<i64>, Vec<i64>)> = vec![
        (vec![1, 2], vec![2]),
        (vec![1, 1], vec![1]),
        (vec![1, 3], vec![3]),
        (vec![2, 2], vec![2]),
        (vec![1, 2, 3], vec![2, 3]),
        (vec![1, 2, 2], vec![2, 2]),
    ];
    for (a, b) in &tuples {
        let params = HgfParams::new(a.clone(), b.clone()).unwrap();
        for n in [4u64, 8] {
            let alpha =
                random_in_disc(&field, &mut rng, Ratio::from_integer(params.radius_log_q()));
            let w = algebraic_witness(&field, &params, &alpha, n).unwrap();
            t.record(w.report.exact, || format!("a={:?} b={:?} N={}", a, b, n));
        }
    }
    t.finish("C7", "algebraicity witness f_h/S_h reconstruction, cutoffs <= 8")
}

/// C8: nonvanishing certificate with the exact valuation formula.
fn criterion8() -> CriterionResult {
    let mut t = Tally::new();
    let mut rng = rng_for("c8");
    for field in [field_create(2, 1, None).unwrap(), field_create(3, 1, None).unwrap()] {
        let q = field.q as i64;
        let tuples: Vec<(Vec<i64>, Vec<i64>)> =
            vec![(vec![1, 1], vec![2]), (vec![1, 2], vec![3]), (vec![2, 2], vec![3])];
        for (a, b) in &tuples {
            let params = HgfParams::new(a.clone(), b.clone()).unwrap();
            let d = params.d();
            for _ in 0..20 {
                let alpha =
                    random_in_disc(&field, &mut rng, Ratio::from_integer(params.radius_log_q()));
                let pv = thgf_value(&field, &params, &alpha, Ratio::from_integer(20)).unwrap();
                // δ = v(α) + Σ(b_j-1) - Σ(a_i-1); leading valuation δ q^{d-1}
                let delta = alpha.valuation().0.unwrap()
                    + Ratio::from_integer(params.radius_log_q());
                let expected = delta * Ratio::from_integer(q.pow((d - 1) as u32));
                let ok = pv.nonvanishing_certified && pv.leading_valuation == Some(expected);
                t.record(ok, || {
                    format!("q={} a={:?} b={:?} alpha={}", field.q, a, b, format_rational(&alpha))
                });
            }
        }
    }
    t.finish("C8", "leading-term dominance certificate with exact valuation")
}

/// C9: the Carlitz-operator equation, exhaustive over small parameters.
fn criterion9() -> CriterionResult {
    let mut t = Tally::new();
    fn all_sorted(len: usize, max: i64) -> Vec<Vec<i64>> {
        let mut out = vec![];
        fn rec(out: &mut Vec<Vec<i64>>, cur: &mut Vec<i64>, len: usize, lo: i64, max: i64) {
            if cur.len() == len {
                out.push(cur.clone());
                return;
            }
            for v in lo..=max {
                cur.push(v);
                rec(out, cur, len, v, max);
                cur.pop();
            }
        }
        rec(&mut out, &mut vec![], len, 1, max);
        out
    }
    for field in [field_create(2, 1, None).unwrap(), field_create(3, 1, None).unwrap()] {
        for s in 0..=2usize {
            for a in all_sorted(s + 1, 3) {
                for b in all_sorted(s, 3) {
                    let params = HgfParams::new(a.clone(), b.clone()).unwrap();
                    let rep = verify_hg_difference_equation(&field, &params, 6).unwrap();
                    t.record(rep.exact, || format!("q={} a={:?} b={:?}", field.q, a, b));
                }
            }
        }
    }
    t.finish("C9", "Carlitz-operator difference equation, entries <= 3, N = 6")
}

/// C10: determinant nonvanishing on every built motive with parameters <= 3.
fn criterion10() -> CriterionResult {
    let mut t = Tally::new();
    let mut rng = rng_for("c10");
    for (p, e) in [(2u64, 1u32), (3, 1)] {
        let field = field_create_with_cap(p, e, None, 12).unwrap();
        // THGF motives
        let tuples: Vec<(Vec<i64>, Vec<i64>)> =
            vec![(vec![1, 1], vec![2]), (vec![1, 2], vec![2]), (vec![2, 2], vec![3]), (vec![1, 3], vec![3])];
        for (a, b) in &tuples {
            let params = HgfParams::new(a.clone(), b.clone()).unwrap();
            let d = params.d();
            let alpha =
                random_in_disc(&field, &mut rng, Ratio::from_integer(params.radius_log_q()));
            let motive = build_motive(&field, MotiveKind::Thgf { params, d, alpha }).unwrap();
            let verdicts = crate::criteria::check_det_nonvanishing(&motive, 10).unwrap();
            t.record(verdicts.iter().all(|(_, ok)| *ok), || {
                format!("thgf q={} a={:?} b={:?}", field.q, a, b)
            });
        }
        // KMPL motives with weights <= 3
        for parts in [vec![1u64], vec![2], vec![1, 1], vec![1, 2], vec![1, 1, 1]] {
            let r = parts.len();
            let index = Index::new(parts.clone());
            let points = PointTuple::new(
                parts
                    .iter()
                    .map(|&s| random_in_disc(&field, &mut rng, Ratio::from_integer(s as i64)))
                    .collect(),
            );
            let motive = build_motive(&field, MotiveKind::Kmpl { index, points }).unwrap();
            let verdicts = crate::criteria::check_det_nonvanishing(&motive, 10).unwrap();
            t.record(verdicts.iter().all(|(_, ok)| *ok), || {
                format!("kmpl q={} s={:?} r={}", field.q, parts, r)
            });
        }
    }
    t.finish("C10", "det Φ nonzero at 0 and θ^(1/q^i), i <= 10")
}

/// C11: value refinement monotonicity over three steps.
fn criterion11() -> CriterionResult {
    let mut t = Tally::new();
    for field in [field_create(2, 1, None).unwrap(), field_create(3, 1, None).unwrap()] {
        let targets = [Ratio::from_integer(20), Ratio::from_integer(50), Ratio::from_integer(110)];
        // π̃
        let pis: Vec<_> = targets.iter().map(|&t| pi_tilde(&field, 0, t)).collect();
        for w in 0..2 {
            let diff = pis[w + 1].value.sub(&pis[w].value);
            t.record(diff.valuation().ge(&pis[w].err), || format!("pi~ q={} step {}", field.q, w));
        }
        // ζ_K(n), n <= 3
        for n in 1..=3u64 {
            let vals: Vec<_> = targets.iter().map(|&t| kochubei_zeta(&field, n, t).unwrap()).collect();
            for w in 0..2 {
                let diff = vals[w + 1].value.sub(&vals[w].value);
                t.record(diff.valuation().ge(&vals[w].error_valuation), || {
                    format!("zeta_K({}) q={} step {}", n, field.q, w)
                });
            }
        }
        // Li_{K,(1,1)}(1,1)
        let vals: Vec<_> = targets
            .iter()
            .map(|&t| {
                mpl_value(
                    &field,
                    MplFamily::Kochubei,
                    &Index::new(vec![1, 1]),
                    &PointTuple::ones(&field, 2),
                    t,
                    false,
                )
                .unwrap()
            })
            .collect();
        for w in 0..2 {
            let diff = vals[w + 1].value.sub(&vals[w].value);
            t.record(diff.valuation().ge(&vals[w].error_valuation), || {
                format!("Li_K,(1,1) q={} step {}", field.q, w)
            });
        }
    }
    t.finish("C11", "refinement monotonicity for pi~, zeta_K(n), Li_K,(1,1)")
}

/// C12 (library side): 100 random scalars survive print -> parse -> print.
fn criterion12() -> CriterionResult {
    let mut t = Tally::new();
    let mut rng = rng_for("c12");
    for field in fields() {
        for _ in 0..100 {
            let v = rng.gen_range(-6i64..=6);
            let a = random_scalar_at(&field, &mut rng, v);
            let vb = rng.gen_range(-4i64..=4);
            let b = random_scalar_at(&field, &mut rng, vb);
            let x = if b.is_zero() { a.clone() } else { a.add(&b) };
            let text = format_rational(&x);
            let parsed = parse_rational(&text, &field).unwrap();
            let text2 = format_rational(&parsed);
            t.record(text == text2 && parsed == x, || format!("q={} {}", field.q, text));
        }
    }
    t.finish("C12", "scalar literals: print -> parse -> print fixed point")
}

/// Extra coherence block exercised with the battery: motive systems and the
/// star-inverse product (these back the per-module invariants).
fn criterion_motives() -> CriterionResult {
    let mut t = Tally::new();
    let mut rng = rng_for("cm");
    for field in fields() {
        let thgf_tuples: Vec<(Vec<i64>, Vec<i64>)> = vec![
            (vec![1, 1], vec![2]),
            (vec![1, 2], vec![2]),
            (vec![2, 2], vec![3]),
            (vec![1, 1, 2], vec![2, 4]),
        ];
        for (a, b) in &thgf_tuples {
            let params = HgfParams::new(a.clone(), b.clone()).unwrap();
            let d = params.d();
            let alpha =
                random_in_disc(&field, &mut rng, Ratio::from_integer(params.radius_log_q()));
            let motive =
                build_motive(&field, MotiveKind::Thgf { params: params.clone(), d, alpha: alpha.clone() })
                    .unwrap();
            let rep = verify_frobenius_system(&motive, 6).unwrap();
            t.record(rep.exact, || format!("thgf q={} a={:?} b={:?}", field.q, a, b));
            let motive =
                build_motive(&field, MotiveKind::ThgfSimple { params, d, alpha }).unwrap();
            let rep = verify_frobenius_system(&motive, 6).unwrap();
            t.record(rep.exact, || format!("thgf-simple q={} a={:?} b={:?}", field.q, a, b));
        }
        for parts in [vec![1u64, 1], vec![1, 2], vec![2, 1, 1]] {
            let index = Index::new(parts.clone());
            let points = PointTuple::new(
                parts
                    .iter()
                    .map(|&s| random_in_disc(&field, &mut rng, Ratio::from_integer(s as i64)))
                    .collect(),
            );
            let motive =
                build_motive(&field, MotiveKind::Kmpl { index: index.clone(), points: points.clone() })
                    .unwrap();
            let rep = verify_frobenius_system(&motive, 5).unwrap();
            t.record(rep.exact, || format!("kmpl q={} s={:?}", field.q, parts));
            let rep = verify_psi_star_product(&field, &index, &points, 4).unwrap();
            t.record(rep.exact, || format!("psi-star q={} s={:?}", field.q, parts));
        }
        // the P-form cross-check pins the recorded relationship between the
        // two displayed forms: exact for b_j <= 2 (and for b=3 in char 2)
        let rep = cross_check_p_forms(&field, &[2, 2], 2, 4, 0).unwrap();
        t.record(rep.exact, || format!("p-forms b=(2,2) q={}", field.q));
        let rep = cross_check_p_forms(&field, &[3], 3, 3, 0).unwrap();
        if field.p == 2 {
            t.record(rep.exact, || format!("p-forms b=(3) q={}", field.q));
        } else {
            let second = p_bd_cutoff(&field, &[3], 3, 3, 0).unwrap();
            let first = crate::motive::p_bd_first_form(&field, &[3], 3, 3, 0).unwrap();
            t.record(!rep.exact && first.neg().eq_value(&second), || {
                format!("p-forms b=(3) q={} expected ratio -1", field.q)
            });
        }
    }
    t.finish("CM", "motive systems, star-inverse product, P-form cross-check")
}

/// Period values: spot checks against independent partial products.
fn criterion_periods() -> CriterionResult {
    let mut t = Tally::new();
    for field in [field_create(2, 1, None).unwrap(), field_create(3, 1, None).unwrap()] {
        let q = field.q as i64;
        // v(π̃) = -q/(q-1)
        let pi = pi_tilde(&field, 0, Ratio::from_integer(50));
        t.record(
            pi.value.valuation() == Valuation::finite(Ratio::new(-q, q - 1)),
            || format!("pi~ valuation q={}", field.q),
        );
        // KMPL motive diagonal = π̃^w
        let motive = build_motive(
            &field,
            MotiveKind::Kmpl { index: Index::new(vec![1, 1]), points: PointTuple::ones(&field, 2) },
        )
        .unwrap();
        let pv = period_value(&motive, 1, 1, Ratio::from_integer(30)).unwrap();
        t.record(
            pv.value.valuation() == Valuation::finite(Ratio::new(-2 * q, q - 1)),
            || format!("pi~^2 q={}", field.q),
        );
        let pv = period_value(&motive, 3, 1, Ratio::from_integer(30)).unwrap();
        t.record(pv.tag.contains("Li*"), || "tagged star entry".to_string());
    }
    t.finish("CP", "period values: pi~ powers and tagged star entries")
}

/// Run the whole battery. `quick` trims the heavy criteria to smoke level.
pub fn run_suite(quick: bool) -> SuiteOutcome {
    let mut results = vec![];
    let steps: Vec<fn() -> CriterionResult> = if quick {
        vec![criterion2, criterion3, criterion5, criterion6, criterion12]
    } else {
        vec![
            criterion1,
            criterion2,
            criterion3,
            criterion4,
            criterion5,
            criterion6,
            criterion7,
            criterion8,
            criterion9,
            criterion10,
            criterion11,
            criterion12,
            criterion_motives,
            criterion_periods,
        ]
    };
    for step in steps {
        results.push(step());
    }
    let manifest = serde_json::json!({
        "seed": format!("{:#x}", SUITE_SEED),
        "mode": if quick { "quick" } else { "full" },
        "scenario_hashes": results
            .iter()
            .map(|r| serde_json::json!({"id": r.id, "hash": format!("{:#x}", fnv(r.name))}))
            .collect::<Vec<_>>(),
    });
    SuiteOutcome { results, manifest }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_suite_passes_and_is_deterministic() {
        let a = run_suite(true);
        assert!(a.all_passed(), "{:?}", a.results.iter().filter(|r| !r.passed).collect::<Vec<_>>());
        let b = run_suite(true);
        assert_eq!(
            serde_json::to_string(&a.to_json()).unwrap(),
            serde_json::to_string(&b.to_json()).unwrap()
        );
    }
}
