//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use qdyn::dynamics::MapParams;
use qdyn::ffield::{chi2, odd_part_and_divisors, odd_primes_in, PrimeField, QuadExt};
use qdyn::graph::{ComponentShape, FunctionalGraph, GraphSignature, NamedShape, TreeShape};
use qdyn::theory::{predict_a_minus1, predict_a_plus1, predicted_node_count};
use qdyn::verify::{self, alternate_nonsquare, ASelector, CSelector, SignatureMatch, SweepConfig};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn params(q: u64, a: i64, c: i64) -> MapParams {
    MapParams::from_ints(q, a, c, None).unwrap()
}

fn signature(q: u64, a: i64, c: i64) -> GraphSignature {
    FunctionalGraph::build(&params(q, a, c)).unwrap().signature()
}

fn c1_minus_one_example() -> Outcome {
    let expected = "Z(13) ⊕ 4×(Cyc(6),T(2)) ⊕ 6×(Cyc(2),T(2))";
    let sig = signature(13, -1, 3);
    ensure(sig.notation() == expected, || format!("got {}", sig.notation()))?;
    ensure(sig == GraphSignature::from_notation(expected).unwrap(), || {
        "parsed notation differs from brute force".into()
    })?;
    Ok(format!("q=13 c=3: {expected}"))
}

fn c2_q7_shapes() -> Outcome {
    let sig = signature(7, -1, 4);
    let mut rest: BTreeMap<(usize, u32), u64> = BTreeMap::new();
    for (shape, m) in sig.iter() {
        match shape.named() {
            Some(NamedShape::Z(7)) => ensure(m == 1, || "Z(7) repeated".into())?,
            Some(NamedShape::Hanging { cycle_length, depth }) => {
                *rest.entry((cycle_length, depth)).or_default() += m
            }
            _ => return Err(format!("unexpected component {}", shape.notation())),
        }
    }
    let want = BTreeMap::from([((2, 1), 3), ((6, 1), 2)]);
    ensure(rest == want, || format!("non-Z components {rest:?}"))?;
    Ok("q=7 c=4: 3×(Cyc(2),T(1)) and 2×(Cyc(6),T(1)) besides Z(7)".into())
}

fn c3_plus_one_erratum() -> Outcome {
    let report = verify::verify_instance(13, 1, 3).map_err(|e| e.to_string())?;
    let correct = GraphSignature::from_notation("Z*(13) ⊕ 13×(Cyc(1),T(2)) ⊕ 13×(Cyc(2),T(2))").unwrap();
    let printed = GraphSignature::from_notation("Z*(13) ⊕ 13×(Cyc(1),T(2)) ⊕ 13×(Cyc(13),T(2))").unwrap();
    ensure(report.observed_signature == correct, || {
        format!("got {}", report.observed_notation)
    })?;
    ensure(report.observed_signature != printed, || "printed form matched".into())?;
    ensure(report.signature_match == SignatureMatch::Match, || "prediction mismatch".into())?;
    let errata: Vec<_> = report.errata().collect();
    ensure(errata.len() == 1 && errata[0].claim.contains("Cyc(13)"), || {
        "erratum not flagged".into()
    })?;
    Ok(format!(
        "q=13 c=3: Cyc(2) confirmed, Cyc(13) flagged (claimed {} nodes)",
        errata[0].claimed_node_count
    ))
}

fn c4_theorem_sweep() -> Outcome {
    let cfg = SweepConfig {
        q_min: 3,
        q_max: 199,
        a: ASelector::Both,
        c: CSelector::All,
        seed: 0,
        check_b_independence: false,
    };
    let s = verify::sweep(&cfg).map_err(|e| e.to_string())?;
    let expected: usize = s.primes.iter().map(|&q| 2 * (q as usize - 1)).sum();
    ensure(s.total == expected, || format!("{} instances, expected {expected}", s.total))?;
    ensure(s.instances.iter().all(|i| i.signature_match == SignatureMatch::Match), || {
        let f = s.instances.iter().find(|i| i.signature_match != SignatureMatch::Match).unwrap();
        format!("signature mismatch, reproduce: {}", f.repro)
    })?;
    ensure(s.all_passed(), || {
        format!("check failed, reproduce: {}", s.first_failure.as_ref().unwrap().repro)
    })?;
    Ok(format!("{} primes, {} instances, all signatures equal", s.primes.len(), s.total))
}

fn c5_node_count_identity() -> Outcome {
    let primes = odd_primes_in(3, 10_000);
    for &q in &primes {
        for pred in [predict_a_minus1(q, 1), predict_a_plus1(q, 1)] {
            let pred = pred.map_err(|e| e.to_string())?;
            ensure(predicted_node_count(&pred) == q * q, || {
                format!("q={q} {:?}: {}", pred.case, pred.node_count())
            })?;
        }
    }
    Ok(format!("{} primes, both predictors", primes.len()))
}

fn c6_preimage_rules() -> Outcome {
    let checked: u64 = odd_primes_in(3, 50)
        .into_par_iter()
        .map(|q| -> Result<u64, String> {
            let mut n = 0;
            for a in 1..q as i64 {
                for c in 1..q as i64 {
                    let p = params(q, a, c);
                    let ext = p.ext();
                    let general = !(p.is_a_minus_one() || p.is_a_plus_one());
                    let table = p.preimage_counts_bruteforce();
                    for alpha in ext.elements() {
                        let on_lines = alpha.in_base() || alpha.in_beta_line();
                        if general && !on_lines {
                            continue;
                        }
                        let observed = table[ext.encode(alpha)] as u64;
                        let predicted = p.preimage_count_predicted(alpha);
                        ensure(predicted == Some(observed), || {
                            format!("{p} alpha {alpha}: predicted {predicted:?}, observed {observed}")
                        })?;
                        n += 1;
                    }
                }
            }
            Ok(n)
        })
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .sum();
    Ok(format!("{checked} targets, all a and c, q <= 50"))
}

fn c7_fixed_points() -> Outcome {
    let mut instances = 0;
    for q in odd_primes_in(3, 50) {
        let k = PrimeField::new(q).unwrap();
        for a in 1..q as i64 {
            let cs: Vec<i64> = if a == 1 || a == q as i64 - 1 {
                (1..q as i64).collect()
            } else {
                vec![1]
            };
            for c in cs {
                let p = params(q, a, c);
                let ext = p.ext();
                let scan: Vec<_> = ext.elements().filter(|&x| p.eval_direct(x) == x).collect();
                if p.is_a_minus_one() {
                    ensure(scan == vec![ext.zero()], || format!("{p}: {} fixed points", scan.len()))?;
                } else if p.is_a_plus_one() {
                    ensure(scan.len() as u64 == q + 1, || format!("{p}: {} fixed points", scan.len()))?;
                } else {
                    let inv = (k.elem(a) + k.one()).inv().unwrap();
                    let want = vec![ext.zero(), ext.from_base(inv)];
                    ensure(scan == want, || format!("{p}: {scan:?}"))?;
                }
                instances += 1;
            }
        }
    }
    Ok(format!("{instances} instances, q <= 50"))
}

fn c8_closed_forms() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut samples = 0;
    for q in [7u64, 13, 19, 31] {
        for _ in 0..1000 {
            let c = rng.gen_range(1..q as i64);
            let (x, y) = (rng.gen_range(0..q as i64), rng.gen_range(0..q as i64));
            let n = rng.gen_range(0..40u64);

            let p = params(q, -1, c);
            let (k, ext) = (p.field(), p.ext());
            let start = ext.elem(x, y);
            let step = p.iterate(start, 2 * n);
            let closed = p.closed_form_even_iterate(k.elem(x), k.elem(y), n).unwrap();
            ensure(closed == (step.x, step.y), || format!("{p} even n={n} at ({x},{y})"))?;

            let odd = p.iterate(start, 2 * n + 1);
            // parallel to (by, x)
            let (bx, by) = (p.b() * k.elem(y), k.elem(x));
            ensure(odd.x * by == odd.y * bx, || format!("{p} odd n={n} at ({x},{y})"))?;

            let p = params(q, 1, c);
            let step = p.iterate(start, n);
            let closed = p.closed_form_iterate_a1(k.elem(x), k.elem(y), n).unwrap();
            ensure(closed == (step.x, step.y), || format!("{p} n={n} at ({x},{y})"))?;
            samples += 1;
        }
    }
    Ok(format!("{samples} samples over q in {{7,13,19,31}}"))
}

fn c9_even_cycles() -> Outcome {
    let cycles: u64 = odd_primes_in(3, 199)
        .into_par_iter()
        .map(|q| -> Result<u64, String> {
            let mut n = 0;
            for c in 1..q as i64 {
                let d = FunctionalGraph::build(&params(q, -1, c)).unwrap().decompose();
                for comp in &d.components {
                    let len = comp.cycle.len();
                    ensure(len == 1 || len % 2 == 0, || format!("q={q} c={c}: cycle of length {len}"))?;
                    n += 1;
                }
            }
            Ok(n)
        })
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .sum();
    Ok(format!("{cycles} cycles, a=-1, q <= 199"))
}

fn c10_parameter_independence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let primes = odd_primes_in(5, 199);
    for _ in 0..20 {
        let q = primes[rng.gen_range(0..primes.len())];
        let a = if rng.gen_bool(0.5) { -1 } else { 1 };
        let c1 = rng.gen_range(1..q);
        let c2 = loop {
            let c = rng.gen_range(1..q);
            if c != c1 {
                break c;
            }
        };
        let k = PrimeField::new(q).unwrap();
        let b1 = QuadExt::canonical(k).b();
        let b2 = k.from_u64(alternate_nonsquare(k).unwrap());
        let mut sigs = Vec::new();
        for b in [b1, b2] {
            for c in [c1, c2] {
                let p = MapParams::from_ints(q, a, c as i64, Some(b.value() as i64)).unwrap();
                sigs.push(FunctionalGraph::build(&p).unwrap().signature());
            }
        }
        ensure(sigs.windows(2).all(|w| w[0] == w[1]), || {
            format!("q={q} a={a} b in {{{b1},{b2}}} c in {{{c1},{c2}}}")
        })?;
    }
    Ok("20 instances x 2 non-squares x 2 values of c".into())
}

fn c11_general_structure() -> Outcome {
    let mut instances = 0;
    for q in odd_primes_in(3, 50) {
        let k = PrimeField::new(q).unwrap();
        let s = odd_part_and_divisors(q).s;
        let expected = if s == 1 {
            ComponentShape::new(vec![TreeShape::z_star_root(4)])
        } else {
            ComponentShape::uniform(1, TreeShape::hanging(s + 1))
        };
        for a in 2..q as i64 - 1 {
            let af = k.elem(a);
            if chi2(k.one() - af * af) != 1 {
                continue;
            }
            let p = params(q, a, 1);
            let ext = p.ext();
            let g = FunctionalGraph::build(&p).unwrap();
            let d = g.decompose();
            let in_deg = g.in_degrees();

            ensure(g.successor()[0] == 0 && in_deg[0] == 1, || format!("{p}: 0 not isolated"))?;

            let fixed = ext.from_base((af + k.one()).inv().unwrap());
            let comp = d.component_containing(g.index(fixed));
            ensure(comp.shape == expected, || {
                format!("{p}: component of {fixed} is {}", comp.shape.notation())
            })?;

            for alpha in k.units().filter(|&t| chi2(t * (af - k.one())) == -1) {
                let target = g.index(ext.from_base(alpha));
                let outside: Vec<usize> = (0..g.len())
                    .filter(|&i| g.successor()[i] as usize == target && !g.state(i).in_base())
                    .collect();
                ensure(outside.len() == 2 && outside.iter().all(|&i| in_deg[i] == 0), || {
                    format!("{p}: alpha {alpha} has outside preimages {outside:?}")
                })?;
            }
            instances += 1;
        }
    }
    Ok(format!("{instances} instances with χ2(1-a²)=1, q <= 50"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("a=-1 example decomposition", c1_minus_one_example),
        ("a=-1 q=7 component shapes", c2_q7_shapes),
        ("a=+1 q=13 erratum", c3_plus_one_erratum),
        ("theorem sweep q <= 199", c4_theorem_sweep),
        ("node-count identity q <= 10^4", c5_node_count_identity),
        ("preimage counts", c6_preimage_rules),
        ("fixed-point counts", c7_fixed_points),
        ("closed-form iterates", c8_closed_forms),
        ("even cycle lengths", c9_even_cycles),
        ("b- and c-independence", c10_parameter_independence),
        ("general-a structure", c11_general_structure),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let result = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} ({secs:.2}s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why} ({secs:.2}s)", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
