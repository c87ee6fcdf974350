//! Randomized property suites shared by the core tests and the acceptance run.
//! Each runs 1000 cases from a fixed seed.

use primeconst::constructor::{init, run, step, ConstructionState, ConstructorConfig, SeedPolicy, Silent};
use primeconst::families::{FamilyDescriptor, GapFunction, HypothesisConfig};
use primeconst::interval::{compare, parse_rational, CertifiedOrder};
use primeconst::sequences::SequenceSource;
use primeconst::verifier;
use primeconst::{BigInterval, Error};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed, TestRunner};
use rug::{Float, Integer, Rational};
use std::sync::OnceLock;

fn config() -> Config {
    Config {
        cases: 1000,
        rng_seed: RngSeed::Fixed(20_241_016),
        failure_persistence: None,
        max_global_rejects: 4096,
        ..Config::default()
    }
}

fn primes() -> &'static SequenceSource {
    static SRC: OnceLock<SequenceSource> = OnceLock::new();
    SRC.get_or_init(SequenceSource::primes)
}

fn q(s: &str) -> Rational {
    parse_rational(s).unwrap()
}

fn trial_division(n: &Integer) -> bool {
    let n = n.to_u64().expect("oracle range");
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Families cheap enough to evaluate anywhere in a sampled window.
fn family_strategy() -> impl Strategy<Value = FamilyDescriptor> {
    prop_oneof![
        (0u64..=1).prop_map(|n0| FamilyDescriptor::mills().with_n0(n0)),
        Just(FamilyDescriptor::wright()),
        (0u32..1000).prop_map(|extra| {
            let a = Rational::from(24_128_100 + extra);
            FamilyDescriptor::farhi_power(q("2"), q("2"), a).unwrap()
        }),
        (2u64..6).prop_map(|n0| FamilyDescriptor::farhi_factorial(q("3"), q("1"), q("3.01"), n0).unwrap()),
        prop::sample::select(vec!["2", "2.5", "5", "1000"]).prop_map(|a| FamilyDescriptor::geometric(q(a)).unwrap()),
        (prop::sample::select(vec!["1", "1.5", "2"]), 3u32..1000)
            .prop_map(|(l, m)| FamilyDescriptor::lambda_power(q(l), Integer::from(m)).unwrap()),
    ]
}

/// Index offset kept small enough that `f_n` stays within floating range.
fn index_span(f: &FamilyDescriptor) -> u64 {
    match f.name() {
        "wright" => 2,
        "mills" => 4,
        _ => 6,
    }
}

/// A point strictly inside the domain, `t` in (0, 1).
fn domain_point(f: &FamilyDescriptor, t: f64) -> Rational {
    let t = Rational::from_f64(t).unwrap();
    match &f.domain_hi {
        Some(b) => &f.domain_lo + Rational::from(b - &f.domain_lo) * t,
        None => {
            let width = if f.name() == "wright" { q("3") } else { q("50") };
            &f.domain_lo + q("0.001") + width * t
        }
    }
}

fn contains_rational(iv: &BigInterval, x: &Rational) -> bool {
    iv.contains_rational(x)
}

/// Chains over primes for every family, varied by seed and length.
fn chain_case() -> impl Strategy<Value = (FamilyDescriptor, SeedPolicy, u64)> {
    let explicit = |lo: u64, hi: u64| (lo..hi).prop_map(SeedPolicy::ExplicitIndex);
    prop_oneof![
        (explicit(0, 60), 1u64..=5).prop_map(|(s, t)| (FamilyDescriptor::mills(), s, t)),
        (explicit(0, 40), 1u64..=4).prop_map(|(s, t)| (FamilyDescriptor::mills().with_n0(0), s, t)),
        (explicit(0, 5), 1u64..=3).prop_map(|(s, t)| (FamilyDescriptor::wright(), s, t)),
        (0u32..100_000, 1u64..=3).prop_map(|(extra, t)| {
            let a = Rational::from(24_128_100 + extra);
            (FamilyDescriptor::farhi_power(q("2"), q("2"), a).unwrap(), SeedPolicy::SmallestAdmissible, t)
        }),
        (2u64..7, 1u64..=8).prop_map(|(n0, t)| {
            (FamilyDescriptor::farhi_factorial(q("3"), q("1"), q("0.01"), n0).unwrap(), SeedPolicy::SmallestAdmissible, t)
        }),
        (prop::sample::select(vec!["300", "1000", "2500.5"]), explicit(0, 500), 1u64..=10)
            .prop_map(|(a, s, t)| (FamilyDescriptor::geometric(q(a)).unwrap(), s, t)),
        (prop::sample::select(vec!["1", "1.5", "2"]), prop::sample::select(vec![200u32, 500, 1000]), 1u64..=10)
            .prop_map(|(l, m, t)| (FamilyDescriptor::lambda_power(q(l), Integer::from(m)).unwrap(), SeedPolicy::SmallestAdmissible, t)),
    ]
}

fn build_states(f: &FamilyDescriptor, seed: SeedPolicy, terms: u64) -> Result<Vec<ConstructionState>, Error> {
    let cfg = ConstructorConfig::default();
    let (mut s, _) = init(f, primes(), seed, &cfg)?;
    let mut out = vec![s.clone()];
    for _ in 1..terms {
        s = step(f, primes(), &s, &cfg)?.0;
        out.push(s.clone());
    }
    Ok(out)
}

fn skip_unbuildable<T>(r: Result<T, Error>) -> Result<T, TestCaseError> {
    match r {
        Ok(v) => Ok(v),
        Err(e @ (Error::SeedNotFound(_) | Error::GapViolation(_))) => Err(TestCaseError::reject(e.to_string())),
        Err(e) => Err(TestCaseError::fail(e.to_string())),
    }
}

/// Runs `test` over `strategy` with the suite configuration.
fn check<S: Strategy>(
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    TestRunner::new(config())
        .run(&strategy, test)
        .map_err(|e| e.to_string())
}

pub fn arithmetic_contains_exact() -> Result<(), String> {
    let s = (-10_000i64..10_000, 1i64..1000, -10_000i64..10_000, 1i64..1000, 24u32..200);
    check(s, |(an, ad, bn, bd, p)| {
        let a = Rational::from((an, ad));
        let b = Rational::from((bn, bd));
        let ops = |prec: u32| {
            let ia = BigInterval::from_rational(&a, prec);
            let ib = BigInterval::from_rational(&b, prec);
            let mut v = vec![ia.add(&ib), ia.sub(&ib), ia.mul(&ib)];
            if b != 0 {
                v.push(ia.div(&ib).unwrap());
            }
            v
        };
        let mut exact = vec![
            Rational::from(&a + &b),
            Rational::from(&a - &b),
            Rational::from(&a * &b),
        ];
        if b != 0 {
            exact.push(Rational::from(&a / &b));
        }
        for (iv, x) in ops(p).iter().chain(&ops(2 * p)).zip(exact.iter().cycle()) {
            prop_assert!(contains_rational(iv, x), "{iv} misses {x}");
        }
        Ok(())
    })
}

pub fn containment_under_doubling() -> Result<(), String> {
    let s = (1i64..1_000_000, 1i64..1000, 24u32..300, 2u32..7);
    check(s, |(xn, xd, p, k)| {
        let x = Float::with_val(64, xn) / xd;
        let at = |prec: u32| BigInterval::point(Float::with_val(prec.max(64), &x)).with_prec(prec);
        let pairs = [
            (at(p).exp(), at(2 * p).exp()),
            (at(p).ln().unwrap(), at(2 * p).ln().unwrap()),
            (at(p).root(k).unwrap(), at(2 * p).root(k).unwrap()),
            (at(p).pow_u64(k as u64), at(2 * p).pow_u64(k as u64)),
        ];
        for (coarse, fine) in pairs {
            if coarse.is_finite() {
                prop_assert!(coarse.contains(&fine), "{fine} escapes {coarse}");
            }
        }
        Ok(())
    })
}

pub fn eval_inverse_round_trip() -> Result<(), String> {
    check((family_strategy(), 0u64..6, 0.001f64..0.999), |(f, dn, t)| {
        let n = f.min_index().max(f.n0) + dn % (index_span(&f) + 1);
        let x = domain_point(&f, t);
        let y = f.eval_rational(n, &x, 192).unwrap();
        prop_assume!(y.is_finite());
        let back = f.eval_inverse(n, &y, 192).unwrap();
        prop_assert!(contains_rational(&back, &x), "n = {n}: {back} misses {x}");
        Ok(())
    })
}

pub fn step_map_expands() -> Result<(), String> {
    check((family_strategy(), 0u64..6, 0.001f64..0.999), |(f, dn, t)| {
        let n = f.min_index().max(f.n0) + dn % index_span(&f);
        let y = f.eval_rational(n, &domain_point(&f, t), 256).unwrap();
        prop_assume!(y.is_finite());
        let h = f.h_eval(n, &y, 256).unwrap();
        prop_assume!(h.is_finite());
        prop_assert_eq!(compare(&y, &h), CertifiedOrder::CertainlyLess, "n = {}: h({}) = {}", n, y, h);
        Ok(())
    })
}

pub fn gap_functions_monotone() -> Result<(), String> {
    check((0.0f64..1e6, 0.0f64..1e6, 0usize..4), |(a, d, which)| {
        let g = [
            GapFunction::power_two_thirds(),
            GapFunction::LinearLog2,
            GapFunction::log_power(q("2.5"), q("1.5"), q("1")).unwrap(),
            GapFunction::constant(q("7")),
        ][which]
            .clone();
        let lo = g.eval_point(&Float::with_val(64, a), 128);
        let hi = g.eval_point(&Float::with_val(64, a + d), 128);
        prop_assert!(lo.lo() <= hi.hi());
        Ok(())
    })
}

pub fn realized_step_inequality() -> Result<(), String> {
    check(chain_case(), |(f, seed, terms)| {
        let states = skip_unbuildable(build_states(&f, seed, terms.max(2)))?;
        for s in &states[..states.len() - 1] {
            let p = s.precision.max(128);
            let lo = f.h_apply(s.n, &s.v, 0, p).unwrap().enclosure(p);
            let hi = f.h_apply(s.n, &s.v, 1, p).unwrap().enclosure(p);
            let g = f.gap.eval(&lo, p);
            let diff = hi.sub(&lo);
            prop_assume!(g.is_finite() && diff.is_finite());
            prop_assert!(g.hi() <= diff.lo(), "n = {}, v = {}: g = {g}, diff = {diff}", s.n, s.v);
        }
        Ok(())
    })
}

pub fn greedy_minimality() -> Result<(), String> {
    check(chain_case(), |(f, seed, terms)| {
        let states = skip_unbuildable(build_states(&f, seed, terms.max(2)))?;
        for w in states.windows(2) {
            let (cur, next) = (&w[0], &w[1]);
            let c = [cur.precision, 1024]
                .iter()
                .find_map(|&p| f.h_apply(cur.n, &cur.v, 0, p).unwrap().ceil());
            let Some(c) = c else {
                return Err(TestCaseError::reject("ceil(h) undecided"));
            };
            prop_assert!(c <= next.v);
            // the source term just below v_{n+1} lies under h_n(v_n)
            if let Some(prev) = primes().prev_term_below(&next.v) {
                prop_assert!(prev.value < c, "{} sits between {c} and {}", prev.value, next.v);
            }
            if next.v < 1u64 << 40 {
                let mut u = c.clone();
                while u < next.v {
                    prop_assert!(!trial_division(&u), "{u} is a prime below {}", next.v);
                    u += 1u32;
                }
            }
        }
        Ok(())
    })
}

pub fn brackets_nest() -> Result<(), String> {
    check(chain_case(), |(f, seed, terms)| {
        let states = skip_unbuildable(build_states(&f, seed, terms.max(2)))?;
        for w in states.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            let mut xlo = a.x.lo().clone();
            xlo.next_down();
            let mut yhi = a.y.hi().clone();
            yhi.next_up();
            prop_assert!(*b.x.lo() >= xlo, "x fell at n = {}", b.n);
            prop_assert!(*b.y.hi() <= yhi, "y rose at n = {}", b.n);
            prop_assert!(b.v > a.v);
        }
        let first = Float::with_val(256, states[0].y.hi() - states[0].x.lo());
        let last = states.last().unwrap();
        let final_width = Float::with_val(256, last.y.hi() - last.x.lo());
        prop_assert!(final_width < first);
        Ok(())
    })
}

pub fn verify_accepts_compute() -> Result<(), String> {
    check(chain_case(), |(f, seed, terms)| {
        let cfg = ConstructorConfig::default();
        let r = skip_unbuildable(run(&f, primes(), terms, 8, seed, &cfg, &[], &mut Silent))?;
        let hyp = HypothesisConfig {
            samples: 8,
            ..HypothesisConfig::default()
        };
        let rep = verifier::verify(&r, primes(), &hyp, None).unwrap();
        prop_assert!(rep.passed(), "{}: {rep:?}", f.to_spec());
        Ok(())
    })
}

pub type Suite = (&'static str, fn() -> Result<(), String>);

/// Every suite with its name.
pub const ALL: [Suite; 9] = [
    ("interval containment of exact arithmetic", arithmetic_contains_exact),
    ("interval containment under precision doubling", containment_under_doubling),
    ("eval/eval_inverse round trip", eval_inverse_round_trip),
    ("strict expansion of the step map", step_map_expands),
    ("gap functions nondecreasing", gap_functions_monotone),
    ("step inequality at realized chain points", realized_step_inequality),
    ("greedy minimality", greedy_minimality),
    ("nested-bracket monotonicity", brackets_nest),
    ("verify(compute) across the family matrix", verify_accepts_compute),
];
