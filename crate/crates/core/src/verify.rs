//! Reconciliation of predicted and brute-force structure, per instance and
//! over parameter sweeps.
//!
//! Reports serialize to JSON (one pretty document) or JSON Lines (one compact
//! object per line). Field names are stable; `format_version` changes when
//! they do not.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{MapCase, MapParams, Stratum};
use crate::error::{Error, Result};
use crate::ffield::{chi2, odd_part_and_divisors, odd_primes_in, Coords, PrimeField, QuadExt};
use crate::graph::{max_q, Decomposition, FunctionalGraph, GraphSignature, NamedShape, MAX_Q_ENV};
use crate::theory::{self, PartialFacts, PredictedDecomposition, Prediction};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

impl CheckResult {
    fn new(name: &'static str, witness: Option<String>) -> Self {
        Self {
            name,
            passed: witness.is_none(),
            witness,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct StratumTally {
    pub checked: u64,
    pub passed: u64,
    pub failed: u64,
    /// Targets for which no closed-form count exists.
    pub uncovered: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SignatureMatch {
    Match,
    Mismatch,
    /// General a: only partial facts are checked.
    Partial,
}

/// A printed decomposition compared against brute force.
#[derive(Clone, Debug, Serialize)]
pub struct ClaimCheck {
    pub claim: String,
    pub claimed_node_count: u64,
    pub expected_node_count: u64,
    pub matches_observed: bool,
    pub erratum: bool,
    pub note: String,
}

#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct Timing {
    pub build_ms: f64,
    pub decompose_ms: f64,
    pub checks_ms: f64,
    pub total_ms: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub format_version: u32,
    pub q: u64,
    pub a: i64,
    pub c: u64,
    pub b: u64,
    pub case: MapCase,
    pub observed_notation: String,
    pub observed_signature: GraphSignature,
    pub observed_census: BTreeMap<usize, u64>,
    pub component_count: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub predicted_notation: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub predicted_signature: Option<GraphSignature>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub predicted_census: Option<BTreeMap<usize, u64>>,
    pub signature_match: SignatureMatch,
    pub preimage_checks: BTreeMap<Stratum, StratumTally>,
    pub fixed_point_check: bool,
    pub checks: Vec<CheckResult>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub reference_claims: Vec<ClaimCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub partial_facts: Option<PartialFacts>,
    pub passed: bool,
    pub repro: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

impl VerificationReport {
    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn errata(&self) -> impl Iterator<Item = &ClaimCheck> {
        self.reference_claims.iter().filter(|c| c.erratum)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }

    /// Human-readable summary.
    pub fn to_text(&self) -> String {
        let mut out = Vec::new();
        out.push(format!(
            "instance: q={} a={} c={} b={} ({})",
            self.q, self.a, self.c, self.b, self.case
        ));
        out.push(format!("observed:  {}", self.observed_notation));
        if let Some(p) = &self.predicted_notation {
            out.push(format!("predicted: {p}"));
        }
        out.push(format!(
            "signature: {}",
            match self.signature_match {
                SignatureMatch::Match => "match",
                SignatureMatch::Mismatch => "MISMATCH",
                SignatureMatch::Partial => "partial (general a)",
            }
        ));
        for (stratum, t) in &self.preimage_checks {
            out.push(format!(
                "preimages {:?}: {} checked, {} passed, {} failed, {} uncovered",
                stratum, t.checked, t.passed, t.failed, t.uncovered
            ));
        }
        for c in &self.checks {
            match &c.witness {
                None => out.push(format!("  ok    {}", c.name)),
                Some(w) => out.push(format!("  FAIL  {}: {}", c.name, w)),
            }
        }
        for r in &self.reference_claims {
            out.push(format!(
                "reference claim {}: {} ({})",
                r.claim,
                if r.matches_observed { "confirmed" } else { "ERRATUM" },
                r.note
            ));
        }
        out.push(format!("result: {}", if self.passed { "PASS" } else { "FAIL" }));
        if !self.passed {
            out.push(format!("reproduce: {}", self.repro));
        }
        out.join("\n")
    }
}

pub fn repro_command(params: &MapParams) -> String {
    format!(
        "qdyn verify --q {} --a {} --c {} --b {}",
        params.q(),
        params.a().signed(),
        params.c(),
        params.b()
    )
}

/// Verify one instance with the canonical non-residue.
pub fn verify_instance(q: u64, a: i64, c: i64) -> Result<VerificationReport> {
    verify_params(&MapParams::from_ints(q, a, c, None)?)
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

pub fn verify_params(params: &MapParams) -> Result<VerificationReport> {
    let t0 = Instant::now();
    let graph = FunctionalGraph::build(params)?;
    let build_ms = ms(t0);
    let t1 = Instant::now();
    let dec = graph.decompose();
    let decompose_ms = ms(t1);
    let t2 = Instant::now();
    let mut report = reconcile(&graph, &dec)?;
    report.timing = Some(Timing {
        build_ms,
        decompose_ms,
        checks_ms: ms(t2),
        total_ms: ms(t0),
    });
    Ok(report)
}

/// All checks for an already built and decomposed graph.
pub fn reconcile(graph: &FunctionalGraph, dec: &Decomposition) -> Result<VerificationReport> {
    let p = graph.params();
    let ext = p.ext();
    let q = p.q();
    let n = graph.len();
    let succ = graph.successor();
    let state = |i: usize| graph.state(i);
    let mut checks = Vec::new();

    // universal invariants
    checks.push(CheckResult::new(
        "out_degree_one",
        (succ.len() != n || succ.iter().any(|&s| s as usize >= n))
            .then(|| "successor array malformed".to_owned()),
    ));
    checks.push(CheckResult::new(
        "successor_matches_eval_direct",
        (0..n)
            .find(|&i| ext.encode(p.eval_direct(state(i))) != succ[i] as usize)
            .map(|i| format!("state {i} = {}", state(i))),
    ));
    let in_deg = graph.in_degrees();
    let scan = p.preimage_counts_bruteforce();
    checks.push(CheckResult::new(
        "in_degree_matches_preimage_scan",
        (0..n)
            .find(|&i| in_deg[i] != scan[i])
            .map(|i| format!("state {i} = {}: in-degree {} vs scan {}", state(i), in_deg[i], scan[i])),
    ));
    checks.push(CheckResult::new(
        "periodic_permutation",
        dec.periodic
            .check_permutation(succ)
            .err()
            .map(|i| format!("state {i} = {}", state(i))),
    ));
    let node_count = dec.signature.node_count();
    checks.push(CheckResult::new(
        "node_count",
        (node_count != q * q).then(|| format!("{node_count} != {}", q * q)),
    ));
    let periodic_in_census: u64 = dec.signature.periodic_count();
    checks.push(CheckResult::new(
        "census_covers_periodic_set",
        (periodic_in_census != dec.periodic.len() as u64)
            .then(|| format!("{periodic_in_census} != {}", dec.periodic.len())),
    ));

    // fixed points
    let predicted_fixed: Vec<usize> = p.fixed_points().into_iter().map(|x| ext.encode(x)).collect();
    let observed_fixed: Vec<usize> = (0..n).filter(|&i| succ[i] as usize == i).collect();
    let fixed_ok = predicted_fixed == observed_fixed;
    checks.push(CheckResult::new(
        "fixed_points",
        (!fixed_ok).then(|| {
            let diff: Vec<usize> = observed_fixed
                .iter()
                .copied()
                .collect::<BTreeSet<_>>()
                .symmetric_difference(&predicted_fixed.iter().copied().collect())
                .copied()
                .collect();
            format!("differs at states {diff:?}")
        }),
    ));

    // preimage rules against in-degrees
    let mut tallies: BTreeMap<Stratum, StratumTally> = BTreeMap::new();
    for i in 0..n {
        let alpha = state(i);
        let t = tallies.entry(Stratum::of(alpha)).or_default();
        match p.preimage_count_predicted(alpha) {
            None => t.uncovered += 1,
            Some(pred) => {
                t.checked += 1;
                if pred == in_deg[i] as u64 {
                    t.passed += 1;
                } else {
                    t.failed += 1;
                    t.first_failure.get_or_insert_with(|| {
                        format!("alpha {alpha}: predicted {pred}, observed {}", in_deg[i])
                    });
                }
            }
        }
    }
    checks.push(CheckResult::new(
        "preimage_rules",
        tallies.values().find_map(|t| t.first_failure.clone()),
    ));

    let observed_census = dec.signature.cycle_census();
    let observed_notation = dec.signature.notation();
    let s = odd_part_and_divisors(q).s;

    let mut predicted_notation = None;
    let mut predicted_signature = None;
    let mut predicted_census = None;
    let mut partial_facts = None;
    let signature_match;

    match theory::predict(p)? {
        Prediction::Full(pred) => {
            let sig = pred.signature();
            signature_match = if sig == dec.signature {
                SignatureMatch::Match
            } else {
                SignatureMatch::Mismatch
            };
            checks.push(CheckResult::new(
                "signature",
                (signature_match == SignatureMatch::Mismatch)
                    .then(|| format!("observed {observed_notation}")),
            ));
            let census: BTreeMap<usize, u64> = pred
                .cycle_census()
                .into_iter()
                .map(|(k, v)| (k as usize, v))
                .collect();
            checks.push(CheckResult::new(
                "cycle_census",
                (census != observed_census).then(|| format!("observed {observed_census:?}")),
            ));
            checks.push(CheckResult::new(
                "predicted_node_count",
                (pred.node_count() != q * q).then(|| format!("{} != {}", pred.node_count(), q * q)),
            ));
            checks.push(CheckResult::new(
                "tail_depth_bound",
                (dec.max_tail() > s + 2).then(|| format!("max tail {} > s+2 = {}", dec.max_tail(), s + 2)),
            ));
            if p.is_a_minus_one() {
                checks.extend(a_minus_one_checks(graph, dec, &in_deg));
            }
            predicted_notation = Some(pred.notation());
            predicted_signature = Some(sig);
            predicted_census = Some(census);
        }
        Prediction::Partial(facts) => {
            signature_match = SignatureMatch::Partial;
            checks.extend(general_checks(graph, dec, &in_deg, &facts));
            partial_facts = Some(facts);
        }
    }

    let reference_claims = theory::reference_claims_for(p)
        .into_iter()
        .map(|claim| {
            let sig = GraphSignature::from_notation(claim.notation)?;
            let matches_observed = sig == dec.signature;
            let claimed_node_count = sig.node_count();
            let note = if matches_observed {
                "agrees with brute force".to_owned()
            } else {
                let mut why = Vec::new();
                if claimed_node_count != q * q {
                    why.push(format!("node count {claimed_node_count} != q² = {}", q * q));
                }
                why.push(format!("brute force gives {observed_notation}"));
                why.join("; ")
            };
            Ok(ClaimCheck {
                claim: claim.notation.to_owned(),
                claimed_node_count,
                expected_node_count: q * q,
                matches_observed,
                erratum: !matches_observed,
                note,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let passed = checks.iter().all(|c| c.passed);
    Ok(VerificationReport {
        format_version: FORMAT_VERSION,
        q,
        a: p.a().signed(),
        c: p.c().value(),
        b: p.b().value(),
        case: p.case(),
        observed_notation,
        component_count: dec.signature.component_count(),
        observed_signature: dec.signature.clone(),
        observed_census,
        predicted_notation,
        predicted_signature,
        predicted_census,
        signature_match,
        preimage_checks: tallies,
        fixed_point_check: fixed_ok,
        checks,
        reference_claims,
        partial_facts,
        passed,
        repro: repro_command(p),
        timing: None,
    })
}

fn a_minus_one_checks(graph: &FunctionalGraph, dec: &Decomposition, in_deg: &[u32]) -> Vec<CheckResult> {
    let q = graph.params().q();
    let succ = graph.successor();
    let mut out = Vec::new();

    out.push(CheckResult::new(
        "even_cycle_lengths",
        dec.components
            .iter()
            .find(|c| c.cycle.len() > 1 && c.cycle.len() % 2 == 1)
            .map(|c| format!("cycle of length {} through state {}", c.cycle.len(), c.cycle[0])),
    ));

    // preimages of α ∈ F_q^* have no preimages
    out.push(CheckResult::new(
        "second_level_empty",
        (0..graph.len())
            .find(|&i| {
                let t = succ[i] as usize;
                let on_base = t % q as usize == 0 && t != 0;
                on_base && in_deg[i] != 0
            })
            .map(|i| format!("state {i} = {} has preimages", graph.state(i))),
    ));

    if q % 4 == 3 {
        let zero_comp = dec.component_of[0];
        out.push(CheckResult::new(
            "q3mod4_components_are_t1",
            dec.components
                .iter()
                .enumerate()
                .filter(|&(id, _)| id as u32 != zero_comp)
                .find(|(_, c)| {
                    !matches!(c.shape.named(), Some(NamedShape::Hanging { depth: 1, .. }))
                })
                .map(|(_, c)| format!("component through state {}: {}", c.cycle[0], c.shape.notation())),
        ));
    }
    out
}

fn general_checks(
    graph: &FunctionalGraph,
    dec: &Decomposition,
    in_deg: &[u32],
    facts: &PartialFacts,
) -> Vec<CheckResult> {
    let p = graph.params();
    let q = p.q() as usize;
    let succ = graph.successor();
    let mut out = Vec::new();

    out.push(CheckResult::new(
        "zero_isolated",
        (succ[0] != 0 || in_deg[0] != 1).then(|| format!("in-degree of 0 is {}", in_deg[0])),
    ));

    let Some(st) = &facts.fq_structure else {
        return out;
    };

    let fixed = st.fixed_point as usize * q;
    let comp = dec.component_containing(fixed);
    out.push(CheckResult::new(
        "fixed_component_shape",
        (comp.shape != st.fixed_component).then(|| {
            format!(
                "component of ({},0) is {}, expected {}",
                st.fixed_point,
                comp.shape.notation(),
                st.fixed_component_notation
            )
        }),
    ));

    // preimages of α ∈ F_q^* outside F_q: two childless points of βF_q exactly when α is listed
    let attach: BTreeSet<u64> = st.attach_to.iter().copied().collect();
    let mut outside = vec![0u32; q];
    let mut witness = None;
    for i in 0..graph.len() {
        let t = succ[i] as usize;
        let (tx, ty) = (t / q, t % q);
        let from_base = i % q == 0;
        if ty == 0 && tx != 0 && !from_base {
            outside[tx] += 1;
            if i / q != 0 || in_deg[i] != 0 {
                witness.get_or_insert_with(|| {
                    format!("preimage {} of ({tx},0) is not a childless point of βF_q", graph.state(i))
                });
            }
        }
    }
    for (alpha, &cnt) in outside.iter().enumerate().skip(1) {
        let want = if attach.contains(&(alpha as u64)) { 2 } else { 0 };
        if cnt != want {
            witness.get_or_insert_with(|| {
                format!("({alpha},0) has {cnt} preimages outside F_q, expected {want}")
            });
        }
    }
    out.push(CheckResult::new("attached_preimages", witness));

    // the F_q components as a whole
    let ids: BTreeSet<u32> = (0..q).map(|x| dec.component_of[x * q]).collect();
    let mut observed = GraphSignature::new();
    for id in ids {
        observed.add(dec.components[id as usize].shape.clone(), 1);
    }
    let predicted = facts.predicted_fq_signature().expect("structure present");
    out.push(CheckResult::new(
        "fq_components_signature",
        (observed != predicted).then(|| {
            format!("observed {}, predicted {}", observed.notation(), predicted.notation())
        }),
    ));
    out
}

/// Which values of a a sweep covers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ASelector {
    MinusOne,
    PlusOne,
    /// a = -1 and a = +1.
    Both,
    /// Every a ∉ {0, ±1}.
    General,
    /// Every a ≠ 0.
    All,
}

impl ASelector {
    fn values(&self, q: u64) -> Vec<i64> {
        let general = || (2..q as i64 - 1).collect::<Vec<_>>();
        match self {
            ASelector::MinusOne => vec![-1],
            ASelector::PlusOne => vec![1],
            ASelector::Both => vec![-1, 1],
            ASelector::General => general(),
            ASelector::All => {
                let mut v = vec![-1, 1];
                v.extend(general());
                v
            }
        }
    }
}

/// Which values of c a sweep covers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CSelector {
    All,
    One,
    /// This many distinct values per q, drawn from the seeded generator.
    Sample(usize),
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepConfig {
    pub q_min: u64,
    pub q_max: u64,
    pub a: ASelector,
    pub c: CSelector,
    pub seed: u64,
    /// Rebuild each instance over a second non-residue b and compare signatures.
    pub check_b_independence: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            q_min: 3,
            q_max: 31,
            a: ASelector::Both,
            c: CSelector::All,
            seed: 0,
            check_b_independence: false,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct InstanceOutcome {
    pub q: u64,
    pub a: i64,
    pub c: u64,
    pub b: u64,
    pub passed: bool,
    pub signature_match: SignatureMatch,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<CheckResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alt_b: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b_independent: Option<bool>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub errata: Vec<String>,
    pub repro: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepSummary {
    pub format_version: u32,
    pub config: SweepConfig,
    pub primes: Vec<u64>,
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub interrupted: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<InstanceOutcome>,
    pub instances: Vec<InstanceOutcome>,
}

impl SweepSummary {
    pub fn all_passed(&self) -> bool {
        self.failed == 0 && !self.interrupted
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }

    /// One line per instance, then a final summary line without the instance list.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for inst in &self.instances {
            out.push_str(&serde_json::to_string(inst).expect("serializes"));
            out.push('\n');
        }
        let head = serde_json::json!({
            "format_version": self.format_version,
            "config": self.config,
            "primes": self.primes.len(),
            "total": self.total,
            "passed": self.passed,
            "failed": self.failed,
            "interrupted": self.interrupted,
            "first_failure": self.first_failure,
        });
        out.push_str(&head.to_string());
        out.push('\n');
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = vec![format!(
            "sweep q in [{}, {}] ({} primes), a={:?}, c={:?}, seed={}",
            self.config.q_min,
            self.config.q_max,
            self.primes.len(),
            self.config.a,
            self.config.c,
            self.config.seed
        )];
        out.push(format!(
            "instances: {} total, {} passed, {} failed{}",
            self.total,
            self.passed,
            self.failed,
            if self.interrupted { " (interrupted)" } else { "" }
        ));
        if self.config.check_b_independence {
            let compared = self.instances.iter().filter(|i| i.b_independent.is_some()).count();
            let agree = self.instances.iter().filter(|i| i.b_independent == Some(true)).count();
            out.push(format!("b-independence: {agree}/{compared} instances agree"));
        }
        let errata: BTreeSet<&String> = self.instances.iter().flat_map(|i| &i.errata).collect();
        for e in errata {
            out.push(format!("erratum: {e}"));
        }
        if let Some(f) = &self.first_failure {
            out.push(format!("first failure: q={} a={} c={}", f.q, f.a, f.c));
            for c in &f.failures {
                out.push(format!("  {}: {}", c.name, c.witness.as_deref().unwrap_or("")));
            }
            out.push(format!("reproduce: {}", f.repro));
        }
        out.join("\n")
    }
}

/// The instance list of a sweep, in execution-independent order.
pub fn sweep_instances(cfg: &SweepConfig) -> Vec<(u64, i64, u64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out = Vec::new();
    for q in odd_primes_in(cfg.q_min, cfg.q_max) {
        let cs: Vec<u64> = match cfg.c {
            CSelector::All => (1..q).collect(),
            CSelector::One => vec![1],
            CSelector::Sample(k) => {
                let mut all: Vec<u64> = (1..q).collect();
                all.shuffle(&mut rng);
                all.truncate(k);
                all.sort_unstable();
                all
            }
        };
        for a in cfg.a.values(q) {
            for &c in &cs {
                out.push((q, a, c));
            }
        }
    }
    out
}

/// Second smallest non-residue, if there is one.
pub fn alternate_nonsquare(field: PrimeField) -> Option<u64> {
    field.units().filter(|&b| chi2(b) == -1).nth(1).map(|b| b.value())
}

fn run_instance(q: u64, a: i64, c: u64, check_b: bool) -> Result<InstanceOutcome> {
    let params = MapParams::from_ints(q, a, c as i64, None)?;
    let graph = FunctionalGraph::build(&params)?;
    let dec = graph.decompose();
    let report = reconcile(&graph, &dec)?;
    let mut failures: Vec<CheckResult> = report.failures().cloned().collect();

    let (mut alt_b, mut b_independent) = (None, None);
    if check_b {
        if let Some(b2) = alternate_nonsquare(params.field()) {
            let k = params.field();
            let alt = params.with_ext(QuadExt::new(k, k.from_u64(b2))?)?;
            let same = FunctionalGraph::build(&alt)?.signature() == dec.signature;
            alt_b = Some(b2);
            b_independent = Some(same);
            if !same {
                failures.push(CheckResult::new(
                    "b_independence",
                    Some(format!("signature over b={b2} differs")),
                ));
            }
        }
    }
    Ok(InstanceOutcome {
        q,
        a: report.a,
        c,
        b: report.b,
        passed: failures.is_empty(),
        signature_match: report.signature_match,
        failures,
        alt_b,
        b_independent,
        errata: report
            .errata()
            .map(|e| format!("{} ({})", e.claim, e.note))
            .collect(),
        repro: report.repro,
    })
}

pub fn sweep(cfg: &SweepConfig) -> Result<SweepSummary> {
    sweep_with_cancel(cfg, &AtomicBool::new(false))
}

/// Like [`sweep`], but stops scheduling new instances once `cancel` is set.
/// Completed instances are kept and the summary is marked interrupted.
pub fn sweep_with_cancel(cfg: &SweepConfig, cancel: &AtomicBool) -> Result<SweepSummary> {
    let limit = max_q();
    if cfg.q_max > limit && !odd_primes_in(cfg.q_min, cfg.q_max).iter().all(|&q| q <= limit) {
        return Err(Error::ResourceLimit {
            q: cfg.q_max,
            max_q: limit,
            env: MAX_Q_ENV,
        });
    }
    let instances = sweep_instances(cfg);
    let results: Vec<Option<Result<InstanceOutcome>>> = instances
        .par_iter()
        .map(|&(q, a, c)| {
            if cancel.load(Ordering::Relaxed) {
                None
            } else {
                Some(run_instance(q, a, c, cfg.check_b_independence))
            }
        })
        .collect();

    let interrupted = results.iter().any(Option::is_none);
    let outcomes = results
        .into_iter()
        .flatten()
        .collect::<Result<Vec<_>>>()?;
    let passed = outcomes.iter().filter(|o| o.passed).count();
    Ok(SweepSummary {
        format_version: FORMAT_VERSION,
        config: cfg.clone(),
        primes: odd_primes_in(cfg.q_min, cfg.q_max),
        total: outcomes.len(),
        passed,
        failed: outcomes.len() - passed,
        interrupted,
        first_failure: outcomes.iter().find(|o| !o.passed).cloned(),
        instances: outcomes,
    })
}

/// Pure-arithmetic identity: both decompositions cover exactly q² states.
pub fn node_count_identity(q: u64) -> Result<(PredictedDecomposition, PredictedDecomposition)> {
    let minus = theory::predict_a_minus1(q, 1)?;
    let plus = theory::predict_a_plus1(q, 1)?;
    Ok((minus, plus))
}

/// Fixed points found by scanning the successor array.
pub fn scanned_fixed_points(graph: &FunctionalGraph) -> Vec<Coords> {
    (0..graph.len())
        .filter(|&i| graph.successor()[i] as usize == i)
        .map(|i| Coords::from(graph.state(i)))
        .collect()
}
