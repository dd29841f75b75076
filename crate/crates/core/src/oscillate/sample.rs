//! Seeded G(n, p) sampling of dense members of the size-restricted density class,
//! and the greedy construction of oscillation sequences from such certificates.

use itertools::Itertools;
use num_bigint::BigUint;
use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};
use rand::seq::index::sample as sample_indices;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::members::{in_p, in_q, P_BUDGET};
use super::Hypergraph;
use crate::error::{Error, Result};

/// Attempts made by [`sample_dense_member`] before giving up.
pub const SAMPLE_BUDGET: usize = 10_000;
const SUBSET_SAMPLES: usize = 20_000;
const CLOSURE_CHECKS: usize = 16;
const ESTIMATOR_DRAWS: usize = 64;
const ESTIMATOR_MAX_N: usize = 200;

/// How membership of a sampled hypergraph was established.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verification {
    /// Every subhypergraph has density at most `c` (maximum-flow check), which implies membership.
    Flow,
    /// Every vertex subset of each constrained size was scanned.
    Exhaustive,
    /// Only this many random vertex subsets were scanned; membership is not certified.
    Sampled { subsets: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MemberCertificate {
    pub graph: Hypergraph,
    pub seed: u64,
    /// Samples drawn, including the accepted one.
    pub attempts: usize,
    /// Draws rejected for too few edges / for violating a size constraint.
    pub rejected_sparse: usize,
    pub rejected_dense: usize,
    pub verification: Verification,
    /// Single-edge deletions re-verified.
    pub closure_checked: usize,
}

impl MemberCertificate {
    /// `log2` of the certified number of members on `[n]`: every edge subset is a member.
    pub fn log2_lower_bound(&self) -> usize {
        self.graph.e()
    }
}

fn check_delta(c: Rational64, delta: Rational64) -> Result<()> {
    if c <= Rational64::zero() || delta <= c.recip() {
        return Err(Error::Precondition(format!("need delta > 1/c, got delta = {delta}, c = {c}")));
    }
    Ok(())
}

/// `n^{-delta}` as a float, used only to draw edges.
fn edge_probability(n: usize, delta: Rational64) -> f64 {
    (n as f64).powf(-delta.to_f64().unwrap_or(f64::INFINITY))
}

/// `e >= n^{-delta} N / 2`, decided exactly: `(2e)^b n^a >= N^b` for `delta = a/b`.
fn dense_enough(e: usize, n: usize, slots: usize, delta: Rational64) -> bool {
    let (a, b) = (*delta.numer(), *delta.denom() as u32);
    let lhs = num_traits::pow(BigUint::from(2 * e), b as usize);
    let rhs = num_traits::pow(BigUint::from(slots), b as usize);
    if a >= 0 {
        lhs * num_traits::pow(BigUint::from(n), a as usize) >= rhs
    } else {
        lhs >= rhs * num_traits::pow(BigUint::from(n), (-a) as usize)
    }
}

fn draw(r: usize, n: usize, p: f64, rng: &mut ChaCha8Rng) -> Hypergraph {
    let edges = (0..n).combinations(r).filter(|_| rng.gen::<f64>() < p).collect();
    Hypergraph::new(r, n, edges).expect("drawn edges are r-sets")
}

fn subsets_total(n: usize, sizes: &[usize]) -> f64 {
    sizes.iter().map(|&s| (0..s).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)).sum()
}

/// Membership in the class constraining exactly the vertex counts in `sizes`.
fn verify(g: &Hypergraph, sizes: &[usize], c: Rational64, rng: &mut ChaCha8Rng) -> Result<Option<Verification>> {
    if in_q(g, c) {
        return Ok(Some(Verification::Flow));
    }
    if subsets_total(g.v(), sizes) <= P_BUDGET as f64 {
        return Ok(in_p(g, sizes, c)?.then_some(Verification::Exhaustive));
    }
    let masks = g.masks().ok_or_else(|| Error::BudgetExceeded(format!("{} vertices", g.v())))?;
    for _ in 0..SUBSET_SAMPLES {
        let s = sizes[rng.gen_range(0..sizes.len())];
        let m = sample_indices(rng, g.v(), s).iter().fold(0u128, |m, x| m | 1 << x);
        let e = masks.iter().filter(|&&f| f & m == f).count();
        if Rational64::from_integer(e as i64) > c * s as i64 {
            return Ok(None);
        }
    }
    Ok(Some(Verification::Sampled { subsets: SUBSET_SAMPLES }))
}

/// Rejection-samples `G(n, n^{-delta})` until it satisfies every size constraint in `sizes`
/// and has at least `n^{-delta} C(n, r) / 2` edges.
pub fn sample_member(
    r: usize,
    sizes: &[usize],
    c: Rational64,
    n: usize,
    delta: Rational64,
    seed: u64,
) -> Result<MemberCertificate> {
    check_delta(c, delta)?;
    if r < 2 || n < r {
        return Err(Error::Precondition(format!("need 2 <= r <= n, got r = {r}, n = {n}")));
    }
    let sizes: Vec<usize> = sizes.iter().copied().filter(|&s| s >= 1 && s <= n).sorted().dedup().collect();
    let slots = (0..n).combinations(r).count();
    let p = edge_probability(n, delta);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut sparse, mut dense) = (0, 0);
    for attempt in 1..=SAMPLE_BUDGET {
        let g = draw(r, n, p, &mut rng);
        if !dense_enough(g.e(), n, slots, delta) {
            sparse += 1;
            continue;
        }
        let Some(verification) = verify(&g, &sizes, c, &mut rng)? else {
            dense += 1;
            continue;
        };
        // the constraints are monotone, so deletions stay inside the class
        let mut closure_checked = 0;
        for i in 0..g.e().min(CLOSURE_CHECKS) {
            if verify(&g.without_edge(i), &sizes, c, &mut rng)?.is_none() {
                return Err(Error::Precondition("edge deletion left the class".into()));
            }
            closure_checked += 1;
        }
        return Ok(MemberCertificate {
            graph: g,
            seed,
            attempts: attempt,
            rejected_sparse: sparse,
            rejected_dense: dense,
            verification,
            closure_checked,
        });
    }
    Err(Error::SampleBudgetExceeded {
        attempts: SAMPLE_BUDGET,
        detail: format!("{sparse} too sparse, {dense} violated a size constraint"),
    })
}

/// [`sample_member`] for the constraint sizes `1..=k`.
pub fn sample_dense_member(
    r: usize,
    k: usize,
    c: Rational64,
    n: usize,
    delta: Rational64,
    seed: u64,
) -> Result<MemberCertificate> {
    if k * r > n {
        return Err(Error::Precondition(format!("need k r <= n, got k = {k}, r = {r}, n = {n}")));
    }
    sample_member(r, &(1..=k).collect::<Vec<_>>(), c, n, delta, seed)
}

/// Certified lower bound for one step of the sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepCertificate {
    /// The `mu` found at this step.
    pub n: usize,
    /// Constraint sizes in force.
    pub nu: Vec<usize>,
    /// `log2` of the certified number of members on `[n]`.
    pub log2_lower_bound: BigUint,
    /// Absent when every hypergraph on `[n]` is a member (no constraints yet).
    pub witness: Option<MemberCertificate>,
}

/// A prefix of the greedy oscillation sequence. Each `mu` is an upper bound on the
/// least admissible value, since only certified lower bounds on class sizes are used.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OscSequence {
    pub r: usize,
    pub c: Rational64,
    pub eps: Rational64,
    pub seed: u64,
    pub nu: Vec<usize>,
    pub mu: Vec<usize>,
    pub certificates: Vec<StepCertificate>,
}

/// `2^{log2} >= 2^{n^{r - eps}}`, decided exactly.
fn meets_threshold(log2: &BigUint, n: usize, r: usize, eps: Rational64) -> bool {
    let (a, b) = (*eps.numer(), *eps.denom() as usize);
    // log2^b >= n^{r b - a}
    let exp = r as i64 * b as i64 - a;
    let lhs = num_traits::pow(log2.clone(), b);
    if exp >= 0 {
        lhs >= num_traits::pow(BigUint::from(n), exp as usize)
    } else {
        lhs * num_traits::pow(BigUint::from(n), (-exp) as usize) >= BigUint::from(1u8)
    }
}

fn default_estimate(
    r: usize,
    c: Rational64,
    delta: Rational64,
    nu: &[usize],
    n: usize,
    seed: u64,
) -> Result<(BigUint, Option<MemberCertificate>)> {
    if nu.is_empty() {
        return Ok((BigUint::from((0..n).combinations(r).count()), None));
    }
    let p = edge_probability(n, delta);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<MemberCertificate> = None;
    for attempt in 1..=ESTIMATOR_DRAWS {
        let g = draw(r, n, p, &mut rng);
        if best.as_ref().is_some_and(|b| b.graph.e() >= g.e()) {
            continue;
        }
        if let Some(verification) = verify(&g, nu, c, &mut rng)? {
            if matches!(verification, Verification::Sampled { .. }) {
                continue;
            }
            best = Some(MemberCertificate {
                graph: g,
                seed,
                attempts: attempt,
                rejected_sparse: 0,
                rejected_dense: 0,
                verification,
                closure_checked: 0,
            });
        }
    }
    Ok(match best {
        Some(b) => (BigUint::from(b.graph.e()), Some(b)),
        None => (BigUint::zero(), None),
    })
}

/// Greedy sequence: `nu_0 = r + 1`; `mu_k` is the least `n > nu_k` whose certified member count
/// under the constraints `nu_1..nu_k` reaches `2^{n^{r - eps}}`; `nu_{k+1} = mu_k + 1`.
pub fn build_sequence(r: usize, c: Rational64, eps: Rational64, steps: usize, seed: u64) -> Result<OscSequence> {
    let delta = (c.recip() + eps) / 2;
    build_sequence_with(r, c, eps, steps, seed, |nu, n, s| default_estimate(r, c, delta, nu, n, s))
}

/// [`build_sequence`] with a caller-supplied estimator `(nu, n, seed) -> (log2 lower bound, witness)`.
pub fn build_sequence_with(
    r: usize,
    c: Rational64,
    eps: Rational64,
    steps: usize,
    seed: u64,
    mut estimator: impl FnMut(&[usize], usize, u64) -> Result<(BigUint, Option<MemberCertificate>)>,
) -> Result<OscSequence> {
    if r < 2 || c < Rational64::new(1, r as i64 - 1) {
        return Err(Error::Precondition(format!("need c >= 1/(r-1), got c = {c}, r = {r}")));
    }
    if eps <= c.recip() {
        return Err(Error::Precondition(format!("need eps > 1/c, got eps = {eps}, c = {c}")));
    }
    let mut nu = vec![r + 1];
    let mut mu = Vec::new();
    let mut certificates = Vec::new();
    for k in 0..steps {
        let constraints = nu[1..].to_vec();
        let start = nu[k] + 1;
        let mut found = None;
        for n in start..=start.max(ESTIMATOR_MAX_N) {
            let step_seed = seed ^ ((k as u64) << 48) ^ n as u64;
            let (log2, witness) = estimator(&constraints, n, step_seed)
                .map_err(|e| Error::EstimatorFailed(format!("at n = {n}: {e}")))?;
            if meets_threshold(&log2, n, r, eps) {
                found = Some(StepCertificate { n, nu: constraints.clone(), log2_lower_bound: log2, witness });
                break;
            }
        }
        let cert = found.ok_or_else(|| {
            Error::EstimatorFailed(format!("no certificate for step {k} with n <= {ESTIMATOR_MAX_N}"))
        })?;
        mu.push(cert.n);
        nu.push(cert.n + 1);
        certificates.push(cert);
    }
    Ok(OscSequence { r, c, eps, seed, nu, mu, certificates })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: i64, d: i64) -> Rational64 {
        Rational64::new(p, d)
    }

    #[test]
    fn exact_density_condition() {
        // 30^{-8/5} * 435 / 2 is just under 1
        assert!(dense_enough(1, 30, 435, q(8, 5)));
        assert!(!dense_enough(0, 30, 435, q(8, 5)));
        // delta = 1: e >= N / (2n)
        assert!(dense_enough(3, 10, 45, q(1, 1)));
        assert!(!dense_enough(2, 10, 45, q(1, 1)));
    }

    #[test]
    fn triangle_free_sample() {
        let cert = sample_dense_member(2, 3, q(2, 3), 30, q(8, 5), 42).unwrap();
        let g = &cert.graph;
        assert!(g.e() >= 1);
        assert!(in_p(g, &[1, 2, 3], q(2, 3)).unwrap());
        for t in (0..30).combinations(3) {
            let e = t.iter().combinations(2).filter(|p| g.contains_edge(&[*p[0], *p[1]])).count();
            assert!(e < 3);
        }
        assert_eq!(sample_dense_member(2, 3, q(2, 3), 30, q(8, 5), 42).unwrap(), cert);
        for i in 0..g.e() {
            assert!(in_p(&g.without_edge(i), &[1, 2, 3], q(2, 3)).unwrap());
        }
    }

    #[test]
    fn preconditions() {
        assert!(matches!(sample_dense_member(2, 3, q(2, 3), 30, q(3, 2), 1), Err(Error::Precondition(_))));
        assert!(matches!(sample_dense_member(2, 3, q(2, 3), 5, q(2, 1), 1), Err(Error::Precondition(_))));
        assert!(matches!(build_sequence(2, q(1, 2), q(3, 1), 1, 0), Err(Error::Precondition(_))));
        assert!(matches!(build_sequence(2, q(1, 1), q(1, 1), 1, 0), Err(Error::Precondition(_))));
    }

    #[test]
    fn sample_budget() {
        // a dense graph on 8 vertices cannot avoid edges entirely
        let err = sample_member(2, &[2], q(1, 4), 8, q(5, 1), 3).unwrap_err();
        assert!(matches!(err, Error::SampleBudgetExceeded { attempts: SAMPLE_BUDGET, .. }), "{err:?}");
    }

    #[test]
    fn threshold() {
        // n^{1/2} at n = 4 is 2
        assert!(meets_threshold(&BigUint::from(2u8), 4, 2, q(3, 2)));
        assert!(!meets_threshold(&BigUint::from(1u8), 4, 2, q(3, 2)));
        assert!(meets_threshold(&BigUint::from(1u8), 4, 2, q(3, 1)));
    }

    #[test]
    fn sequence_prefix() {
        let s = build_sequence(2, q(1, 1), q(3, 2), 2, 7).unwrap();
        assert_eq!(s.nu[0], 3);
        assert_eq!(s.nu.len(), 3);
        assert_eq!(s.mu.len(), 2);
        // C(4, 2) = 6 >= 4^{1/2}
        assert_eq!(s.mu[0], 4);
        for i in 0..2 {
            assert_eq!(s.mu[i], s.nu[i + 1] - 1);
            assert!(s.nu[i] < s.mu[i]);
        }
        let w = s.certificates[1].witness.as_ref().unwrap();
        assert!(in_p(&w.graph, &s.nu[1..2], q(1, 1)).unwrap());
        assert_eq!(build_sequence(2, q(1, 1), q(3, 2), 2, 7).unwrap(), s);
    }

    #[test]
    fn estimator_failure() {
        let err = build_sequence_with(2, q(1, 1), q(3, 2), 1, 0, |_, _, _| Err(Error::BudgetExceeded("x".into())));
        assert!(matches!(err, Err(Error::EstimatorFailed(_))));
        let err = build_sequence_with(2, q(1, 1), q(3, 2), 1, 0, |_, _, _| Ok((BigUint::zero(), None)));
        assert!(matches!(err, Err(Error::EstimatorFailed(_))));
    }
}
