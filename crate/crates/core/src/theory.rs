//! Closed-form predictions of the graph shape, computed without building the graph.
//!
//! For a = -1 the graph is `Z(q) ⊕_{d|r} φ(d)(q-1)/(2 ord_{3d}(4)) × (Cyc(2 ord_{3d}(4)), T(s))`
//! and for a = +1 it is `Z*(q) ⊕_{d|r} qφ(d)/ord_d(2) × (Cyc(ord_d(2)), T(s))`,
//! where `q - 1 = 2^s r` with r odd. Other values of a only get partial facts.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::dynamics::{MapCase, MapParams};
use crate::error::{Error, Result};
use crate::ffield::{chi2, euler_phi, multiplicative_order, odd_part_and_divisors, Coords, PrimeField};
use crate::graph::{decompose, ComponentShape, GraphSignature, TreeShape};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "q", rename_all = "snake_case")]
pub enum SpecialComponent {
    /// Component of 0 for a = -1: 2q - 1 nodes.
    Z(u64),
    /// Component of 0 for a = +1: q nodes.
    ZStar(u64),
    None,
}

impl SpecialComponent {
    pub fn size(&self) -> u64 {
        match *self {
            SpecialComponent::Z(q) => 2 * q - 1,
            SpecialComponent::ZStar(q) => q,
            SpecialComponent::None => 0,
        }
    }

    pub fn shape(&self) -> Option<ComponentShape> {
        match *self {
            SpecialComponent::Z(q) => Some(ComponentShape::new(vec![TreeShape::z_root(q)])),
            SpecialComponent::ZStar(q) => Some(ComponentShape::new(vec![TreeShape::z_star_root(q)])),
            SpecialComponent::None => None,
        }
    }
}

/// `multiplicity × (Cyc(cycle_length), T(tree_depth))`, contributed by one divisor d of r.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Term {
    pub divisor: u64,
    pub multiplicity: u64,
    pub cycle_length: u64,
    pub tree_depth: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PredictedDecomposition {
    pub q: u64,
    pub case: MapCase,
    pub s: u32,
    pub r: u64,
    pub special: SpecialComponent,
    /// One term per divisor of r, in increasing divisor order.
    pub terms: Vec<Term>,
}

fn checked_field(q: u64, c: u64) -> Result<PrimeField> {
    let k = PrimeField::new(q)?;
    if c % q == 0 {
        return Err(Error::ZeroParameter { name: "c", q });
    }
    Ok(k)
}

/// Decomposition for a = -1. Independent of c.
pub fn predict_a_minus1(q: u64, c: u64) -> Result<PredictedDecomposition> {
    checked_field(q, c)?;
    let op = odd_part_and_divisors(q);
    let terms = op
        .divisors
        .iter()
        .map(|&d| {
            let ord = multiplicative_order(4, 3 * d).expect("gcd(4, 3d) = 1 for odd d");
            Term {
                divisor: d,
                multiplicity: euler_phi(d) * (q - 1) / (2 * ord),
                cycle_length: 2 * ord,
                tree_depth: op.s,
            }
        })
        .collect();
    Ok(PredictedDecomposition {
        q,
        case: MapCase::MinusOne,
        s: op.s,
        r: op.r,
        special: SpecialComponent::Z(q),
        terms,
    })
}

/// Decomposition for a = +1. Independent of c. The d = 1 term holds the q
/// fixed points other than 0; 0 itself lives in `Z*(q)`.
pub fn predict_a_plus1(q: u64, c: u64) -> Result<PredictedDecomposition> {
    checked_field(q, c)?;
    let op = odd_part_and_divisors(q);
    let terms = op
        .divisors
        .iter()
        .map(|&d| {
            let ord = multiplicative_order(2, d).expect("d is odd");
            Term {
                divisor: d,
                multiplicity: q * euler_phi(d) / ord,
                cycle_length: ord,
                tree_depth: op.s,
            }
        })
        .collect();
    Ok(PredictedDecomposition {
        q,
        case: MapCase::PlusOne,
        s: op.s,
        r: op.r,
        special: SpecialComponent::ZStar(q),
        terms,
    })
}

pub fn predicted_node_count(d: &PredictedDecomposition) -> u64 {
    d.node_count()
}

impl PredictedDecomposition {
    /// Special component plus `Σ multiplicity · cycle_length · 2^depth`.
    pub fn node_count(&self) -> u64 {
        self.special.size()
            + self
                .terms
                .iter()
                .map(|t| t.multiplicity * t.cycle_length * (1u64 << t.tree_depth))
                .sum::<u64>()
    }

    /// Number of cycles of each length, fixed points included.
    pub fn cycle_census(&self) -> BTreeMap<u64, u64> {
        let mut out = BTreeMap::new();
        if self.special != SpecialComponent::None {
            out.insert(1, 1);
        }
        for t in &self.terms {
            *out.entry(t.cycle_length).or_insert(0) += t.multiplicity;
        }
        out
    }

    pub fn signature(&self) -> GraphSignature {
        let mut sig = GraphSignature::new();
        if let Some(shape) = self.special.shape() {
            sig.add(shape, 1);
        }
        for t in &self.terms {
            sig.add(
                ComponentShape::uniform(t.cycle_length as usize, TreeShape::hanging(t.tree_depth)),
                t.multiplicity,
            );
        }
        sig
    }

    /// Same text as `self.signature().notation()`, without materializing tree shapes.
    pub fn notation(&self) -> String {
        let mut merged: BTreeMap<(u64, u32), u64> = BTreeMap::new();
        for t in &self.terms {
            *merged.entry((t.cycle_length, t.tree_depth)).or_insert(0) += t.multiplicity;
        }
        let mut rest: Vec<(u64, u64, u64, String)> = merged
            .into_iter()
            .map(|((len, depth), m)| {
                let body = if depth == 0 {
                    format!("Cyc({len})")
                } else {
                    format!("(Cyc({len}),T({depth}))")
                };
                (m, len, len << depth, body)
            })
            .collect();
        rest.sort();
        let mut terms = Vec::new();
        match self.special {
            SpecialComponent::Z(q) => terms.push(format!("Z({q})")),
            SpecialComponent::ZStar(q) => terms.push(format!("Z*({q})")),
            SpecialComponent::None => {}
        }
        terms.extend(rest.into_iter().map(|(m, _, _, b)| format!("{m}×{b}")));
        terms.join(" ⊕ ")
    }
}

/// Cycle census for a = -1 or a = +1, fixed points included.
pub fn predict_cycle_census(q: u64, case: MapCase) -> Result<BTreeMap<u64, u64>> {
    match case {
        MapCase::MinusOne => Ok(predict_a_minus1(q, 1)?.cycle_census()),
        MapCase::PlusOne => Ok(predict_a_plus1(q, 1)?.cycle_census()),
        MapCase::General => Err(Error::WrongMapCase {
            expected: 1,
            actual: 0,
            q,
        }),
    }
}

/// Decompositions claimed for specific instances elsewhere, kept so
/// that reports can say whether each one survives brute force.
#[derive(Clone, Copy, Debug)]
pub struct ReferenceClaim {
    pub q: u64,
    pub a: i64,
    pub c: u64,
    pub notation: &'static str,
}

pub const REFERENCE_CLAIMS: &[ReferenceClaim] = &[
    ReferenceClaim {
        q: 13,
        a: -1,
        c: 3,
        notation: "Z(13) ⊕ 4×(Cyc(6),T(2)) ⊕ 6×(Cyc(2),T(2))",
    },
    ReferenceClaim {
        q: 13,
        a: 1,
        c: 3,
        notation: "Z*(13) ⊕ 13×(Cyc(1),T(2)) ⊕ 13×(Cyc(13),T(2))",
    },
];

/// Claims whose (q, a) match `params`. Shapes do not depend on c.
pub fn reference_claims_for(params: &MapParams) -> Vec<ReferenceClaim> {
    REFERENCE_CLAIMS
        .iter()
        .filter(|r| r.q == params.q() && params.field().elem(r.a) == params.a())
        .copied()
        .collect()
}

/// Extra structure when χ2(1 - a^2) = 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FqStructure {
    /// α ∈ F_q^* receiving two extra preimages ±λ_α ∈ βF_q, i.e. χ2(cα(a-1)) = -1.
    pub attach_to: Vec<u64>,
    /// The fixed point 1/(c(a+1)).
    pub fixed_point: u64,
    /// Expected component of the fixed point: a 4-node star when s = 1,
    /// `(Cyc(1), T(s+1))` when s >= 2.
    #[serde(skip)]
    pub fixed_component: ComponentShape,
    pub fixed_component_notation: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct PartialFacts {
    pub q: u64,
    pub a: u64,
    pub c: u64,
    pub b: u64,
    pub s: u32,
    pub chi_one_minus_a_sq: i8,
    pub fixed_points: Vec<Coords>,
    /// f^{-1}(0) = {0}.
    pub zero_isolated: bool,
    /// `None` when χ2(1 - a^2) = -1: no structural prediction, brute force only.
    pub fq_structure: Option<FqStructure>,
    #[serde(skip)]
    params: MapParams,
}

impl PartialFacts {
    pub fn applicable(&self) -> bool {
        self.fq_structure.is_some()
    }

    pub fn params(&self) -> &MapParams {
        &self.params
    }

    /// Preimage count rule for α ∈ F_q ∪ βF_q; `None` elsewhere.
    pub fn predicted_preimages(&self, alpha: crate::ffield::Ext) -> Option<u64> {
        self.params.preimage_count_predicted(alpha)
    }

    /// Successors of `x -> c(a+1)x^2` on F_q, the restriction of f to the base field.
    pub fn fq_restriction(&self) -> Vec<u32> {
        let k = self.params.field();
        let coef = self.params.c() * (self.params.a() + k.one());
        k.elements().map(|x| (coef * x * x).value() as u32).collect()
    }

    /// Signature of the F_q components: the restriction graph with two
    /// leaves attached to every α in `attach_to`.
    pub fn predicted_fq_signature(&self) -> Option<GraphSignature> {
        let st = self.fq_structure.as_ref()?;
        let mut succ = self.fq_restriction();
        for &alpha in &st.attach_to {
            succ.push(alpha as u32);
            succ.push(alpha as u32);
        }
        Some(decompose(&succ).signature)
    }

    pub fn describe(&self) -> String {
        let mut lines = vec![
            format!("q={} a={} c={} b={} s={}", self.q, self.a, self.c, self.b, self.s),
            format!(
                "fixed points: {}",
                self.fixed_points
                    .iter()
                    .map(|p| format!("({},{})", p.0, p.1))
                    .collect::<Vec<_>>()
                    .join(" ")
            ),
            "0 is an isolated fixed point".to_owned(),
            "preimages of α ∈ F_q^*: 0 if χ2(α'(a-1))=1 and χ2(α'(a+1))=-1; 4 if χ2(α'(a-1))=-1 and χ2(α'(a+1))=1; else 2 (α' = α/c)".to_owned(),
        ];
        if self.q % 4 == 3 {
            lines.push("preimages of αβ: 0 if χ2(1-a²)=1, else 2".to_owned());
        } else {
            lines.push(
                "preimages of αβ: 4 if χ2(1-a²)=-1 and χ2(2γα'a)=1 with γ²=-(a-1)b/(a+1), else 0"
                    .to_owned(),
            );
        }
        match &self.fq_structure {
            Some(st) => {
                lines.push(format!("χ2(1-a²)=1: F_q components = G(x ↦ c(a+1)x²) with two leaves on each of {:?}", st.attach_to));
                lines.push(format!(
                    "component of {}: {}",
                    st.fixed_point, st.fixed_component_notation
                ));
            }
            None => lines.push("χ2(1-a²)=-1: no structural prediction (brute force only)".to_owned()),
        }
        lines.join("\n")
    }
}

/// Partial facts for a ∉ {0, ±1}.
pub fn predict_partial_general(params: &MapParams) -> Result<PartialFacts> {
    if params.case() != MapCase::General {
        return Err(Error::WrongMapCase {
            expected: 2,
            actual: params.a().value(),
            q: params.q(),
        });
    }
    let k = params.field();
    let (a, c) = (params.a(), params.c());
    let one = k.one();
    let op = odd_part_and_divisors(params.q());
    let chi = chi2(one - a * a);
    let fq_structure = (chi == 1).then(|| {
        let attach_to = k
            .units()
            .filter(|&u| chi2(c * u * (a - one)) == -1)
            .map(|u| u.value())
            .collect();
        let fixed_point = (c * (a + one)).inv().expect("a != -1").value();
        let fixed_component = if op.s == 1 {
            ComponentShape::new(vec![TreeShape::from_children(vec![TreeShape::leaf(); 3])])
        } else {
            ComponentShape::uniform(1, TreeShape::hanging(op.s + 1))
        };
        FqStructure {
            attach_to,
            fixed_point,
            fixed_component_notation: fixed_component.notation(),
            fixed_component,
        }
    });
    Ok(PartialFacts {
        q: params.q(),
        a: a.value(),
        c: c.value(),
        b: params.b().value(),
        s: op.s,
        chi_one_minus_a_sq: chi,
        fixed_points: params.fixed_points().into_iter().map(Coords::from).collect(),
        zero_isolated: true,
        fq_structure,
        params: *params,
    })
}

/// Whatever can be predicted for `params`.
#[derive(Clone, Debug)]
pub enum Prediction {
    Full(PredictedDecomposition),
    Partial(PartialFacts),
}

pub fn predict(params: &MapParams) -> Result<Prediction> {
    let (q, c) = (params.q(), params.c().value());
    Ok(match params.case() {
        MapCase::MinusOne => Prediction::Full(predict_a_minus1(q, c)?),
        MapCase::PlusOne => Prediction::Full(predict_a_plus1(q, c)?),
        MapCase::General => Prediction::Partial(predict_partial_general(params)?),
    })
}
