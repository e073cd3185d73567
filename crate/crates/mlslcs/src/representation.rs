//! Chromosome codec, matching semantics, subsumption ordering and the
//! rule-generation operators (covering, multi-label crossover, mutation).
//!
//! Bit conventions: every attribute test and every label slot starts with an
//! activation bit (1 = active). Binary attributes use one value bit, nominal
//! attributes an n-bit accepted-value mask, continuous attributes two k-bit
//! unordered bounds quantized uniformly over `[min, max]`. Label slots use one
//! value bit (1 = advocate, 0 = oppose). Bits under inactive tests/labels are
//! canonicalized to zero at encode time.

use rand::Rng;

use crate::types::{
    AttributeKind, AttributeSchema, Classifier, Dataset, HyperParams, Instance, LabelDecision,
    Rule, Test, Value,
};

pub type Chromosome = Vec<bool>;

/// Per-attribute bit spans plus the label span of a chromosome.
#[derive(Debug, Clone, PartialEq)]
pub struct ChromosomeLayout {
    attr_offsets: Vec<usize>,
    attr_spans: Vec<usize>,
    /// Total bits taken by the condition.
    pub condition_bits: usize,
    pub label_count: usize,
    /// Quantization bits for continuous bounds.
    pub k: u32,
    /// Total chromosome size in bits.
    pub size: usize,
    /// Condition bits plus exactly one label slot.
    pub size_chi: usize,
}

impl ChromosomeLayout {
    pub fn new(schema: &AttributeSchema, k: u32) -> Self {
        let mut attr_offsets = Vec::with_capacity(schema.attribute_count());
        let mut attr_spans = Vec::with_capacity(schema.attribute_count());
        let mut offset = 0usize;
        for kind in &schema.attributes {
            let span = match kind {
                AttributeKind::Binary => 2,
                AttributeKind::Nominal(n) => *n as usize + 1,
                AttributeKind::Continuous { .. } => 2 * k as usize + 1,
            };
            attr_offsets.push(offset);
            attr_spans.push(span);
            offset += span;
        }
        let condition_bits = offset;
        let size = condition_bits + 2 * schema.label_count;
        let size_chi = size - 2 * (schema.label_count - 1);
        ChromosomeLayout {
            attr_offsets,
            attr_spans,
            condition_bits,
            label_count: schema.label_count,
            k,
            size,
            size_chi,
        }
    }

    fn label_slot(&self, label: usize) -> usize {
        self.condition_bits + 2 * label
    }
}

/// Highest quantization level for `k` bits.
fn max_level(k: u32) -> u32 {
    (1u32 << k) - 1
}

/// Level -> attribute value, using the full range inclusively at both ends.
pub fn dequantize(level: u32, k: u32, min: f64, max: f64) -> f64 {
    min + level as f64 / max_level(k) as f64 * (max - min)
}

/// Attribute value -> nearest quantization level.
pub fn quantize(value: f64, k: u32, min: f64, max: f64) -> u32 {
    let m = max_level(k) as f64;
    let level = ((value - min) / (max - min) * m).round();
    (level.clamp(0.0, m)) as u32
}

fn write_uint(bits: &mut [bool], value: u32) {
    // most significant bit first
    let n = bits.len();
    for (i, b) in bits.iter_mut().enumerate() {
        *b = (value >> (n - 1 - i)) & 1 == 1;
    }
}

fn read_uint(bits: &[bool]) -> u32 {
    bits.iter().fold(0u32, |acc, &b| (acc << 1) | b as u32)
}

/// Encodes a rule into a chromosome. Inactive spans are zeroed.
pub fn encode(rule: &Rule, schema: &AttributeSchema, layout: &ChromosomeLayout) -> Chromosome {
    let mut bits = vec![false; layout.size];
    for (i, test) in rule.condition.iter().enumerate() {
        let off = layout.attr_offsets[i];
        let span = layout.attr_spans[i];
        match (test, &schema.attributes[i]) {
            (Test::Inactive, _) => {}
            (Test::Bit(v), AttributeKind::Binary) => {
                bits[off] = true;
                bits[off + 1] = *v;
            }
            (Test::Cat(mask), AttributeKind::Nominal(n)) => {
                bits[off] = true;
                for v in 0..*n as usize {
                    bits[off + 1 + v] = (mask >> v) & 1 == 1;
                }
            }
            (Test::Interval { lo, hi }, AttributeKind::Continuous { min, max }) => {
                bits[off] = true;
                let k = layout.k as usize;
                let b_lo = quantize(*lo, layout.k, *min, *max);
                let b_hi = quantize(*hi, layout.k, *min, *max);
                write_uint(&mut bits[off + 1..off + 1 + k], b_lo);
                write_uint(&mut bits[off + 1 + k..off + span], b_hi);
            }
            (t, a) => panic!("test {t:?} does not fit attribute {a:?}"),
        }
    }
    for (l, d) in rule.consequent.iter().enumerate() {
        let slot = layout.label_slot(l);
        match d {
            LabelDecision::DontCare => {}
            LabelDecision::Advocate => {
                bits[slot] = true;
                bits[slot + 1] = true;
            }
            LabelDecision::Oppose => {
                bits[slot] = true;
            }
        }
    }
    bits
}

/// Decodes a chromosome into a rule. Continuous bounds are ordered, so the
/// decoded form is canonical.
pub fn decode(bits: &[bool], schema: &AttributeSchema, layout: &ChromosomeLayout) -> Rule {
    assert_eq!(bits.len(), layout.size, "chromosome length mismatch");
    let mut condition = Vec::with_capacity(schema.attribute_count());
    for (i, kind) in schema.attributes.iter().enumerate() {
        let off = layout.attr_offsets[i];
        let span = layout.attr_spans[i];
        if !bits[off] {
            condition.push(Test::Inactive);
            continue;
        }
        condition.push(match kind {
            AttributeKind::Binary => Test::Bit(bits[off + 1]),
            AttributeKind::Nominal(n) => {
                let mut mask = 0u64;
                for v in 0..*n as usize {
                    if bits[off + 1 + v] {
                        mask |= 1 << v;
                    }
                }
                Test::Cat(mask)
            }
            AttributeKind::Continuous { min, max } => {
                let k = layout.k as usize;
                let b1 = read_uint(&bits[off + 1..off + 1 + k]);
                let b2 = read_uint(&bits[off + 1 + k..off + span]);
                let (b_lo, b_hi) = (b1.min(b2), b1.max(b2));
                Test::Interval {
                    lo: dequantize(b_lo, layout.k, *min, *max),
                    hi: dequantize(b_hi, layout.k, *min, *max),
                }
            }
        });
    }
    let consequent = (0..layout.label_count)
        .map(|l| {
            let slot = layout.label_slot(l);
            if !bits[slot] {
                LabelDecision::DontCare
            } else if bits[slot + 1] {
                LabelDecision::Advocate
            } else {
                LabelDecision::Oppose
            }
        })
        .collect();
    Rule { condition, consequent }
}

/// True iff every active test of the rule passes on the instance.
pub fn matches(rule: &Rule, instance: &Instance) -> bool {
    rule.condition.iter().zip(instance.values.iter()).all(|(test, value)| match (test, value) {
        (Test::Inactive, _) => true,
        (Test::Bit(req), Value::Bit(v)) => req == v,
        (Test::Cat(mask), Value::Cat(v)) => (mask >> v) & 1 == 1,
        (Test::Interval { lo, hi }, Value::Num(x)) => (lo..=hi).contains(&x),
        _ => false,
    })
}

/// Structural check that every instance matched by `b` is matched by `a`:
/// each active test in `a` is active in `b` with `b`'s region contained.
pub fn condition_subsumes(a: &Rule, b: &Rule) -> bool {
    a.condition.iter().zip(b.condition.iter()).all(|(ta, tb)| match (ta, tb) {
        (Test::Inactive, _) => true,
        (Test::Bit(x), Test::Bit(y)) => x == y,
        (Test::Cat(ma), Test::Cat(mb)) => mb & !ma == 0,
        (Test::Interval { lo: la, hi: ha }, Test::Interval { lo: lb, hi: hb }) => {
            la <= lb && hb <= ha
        }
        _ => false,
    })
}

/// True iff `a`'s consequent is equally or more specific than `b`'s: wherever
/// `b` decides, `a` decides identically.
pub fn consequent_subsumes(a: &Rule, b: &Rule) -> bool {
    a.consequent
        .iter()
        .zip(b.consequent.iter())
        .all(|(da, db)| !db.is_specific() || da == db)
}

/// Number of dataset instances the rule matches.
pub fn coverage(rule: &Rule, dataset: &Dataset) -> u32 {
    dataset.instances.iter().filter(|inst| matches(rule, inst)).count() as u32
}

/// Smallest active test matching the given value, used by covering.
fn specific_test(kind: &AttributeKind, value: &Value, k: u32) -> Test {
    match (kind, value) {
        (AttributeKind::Binary, Value::Bit(v)) => Test::Bit(*v),
        (AttributeKind::Nominal(_), Value::Cat(v)) => Test::Cat(1u64 << v),
        (AttributeKind::Continuous { min, max }, Value::Num(x)) => {
            // Nearest quantization level for both bounds, each pushed outward
            // one level if the nearest level excludes the value.
            let b = quantize(*x, k, *min, *max);
            let at = dequantize(b, k, *min, *max);
            let b_lo = if at > *x { b.saturating_sub(1) } else { b };
            let b_hi = if at < *x { (b + 1).min(max_level(k)) } else { b };
            Test::Interval {
                lo: dequantize(b_lo, k, *min, *max),
                hi: dequantize(b_hi, k, *min, *max),
            }
        }
        (kind, value) => panic!("value {value:?} does not fit attribute {kind:?}"),
    }
}

/// Creates a covering classifier for an empty correct set of `label_index`.
///
/// The condition matches the instance, with each test deactivated with
/// probability `p_hash`. Labels are copied from the instance and generalized
/// with probability `p_label_hash`, except `label_index` which stays specific.
pub fn covering(
    instance: &Instance,
    label_index: usize,
    schema: &AttributeSchema,
    t_now: u64,
    params: &HyperParams,
    rng: &mut impl Rng,
) -> Classifier {
    let condition = schema
        .attributes
        .iter()
        .zip(instance.values.iter())
        .map(|(kind, value)| {
            if rng.gen::<f64>() < params.p_hash {
                Test::Inactive
            } else {
                specific_test(kind, value, params.quantization_bits)
            }
        })
        .collect();
    let consequent = instance
        .labels
        .iter()
        .enumerate()
        .map(|(l, &active)| {
            if l != label_index && rng.gen::<f64>() < params.p_label_hash {
                LabelDecision::DontCare
            } else if active {
                LabelDecision::Advocate
            } else {
                LabelDecision::Oppose
            }
        })
        .collect();
    // Coverage is filled in by the caller, which holds the dataset.
    Classifier::fresh(Rule { condition, consequent }, t_now, 0)
}

/// Single-point multi-label crossover.
///
/// The crossover point is drawn uniformly from `[0, size_chi]`. A point in the
/// condition region swaps condition bits from the point onward plus the 2-bit
/// slot of `label_index`; either of the two label-region points swaps only
/// that slot. All other label slots stay with their respective parent.
pub fn multilabel_crossover(
    p1: &Chromosome,
    p2: &Chromosome,
    label_index: usize,
    layout: &ChromosomeLayout,
    rng: &mut impl Rng,
) -> (Chromosome, Chromosome) {
    assert!(label_index < layout.label_count, "label index out of range");
    assert_eq!(p1.len(), layout.size);
    assert_eq!(p2.len(), layout.size);
    let mut c1 = p1.clone();
    let mut c2 = p2.clone();
    let point = rng.gen_range(0..=layout.size_chi);
    if point <= layout.condition_bits {
        for i in point..layout.condition_bits {
            c1[i] = p2[i];
            c2[i] = p1[i];
        }
    }
    let slot = layout.condition_bits + 2 * label_index;
    c1[slot] = p2[slot];
    c1[slot + 1] = p2[slot + 1];
    c2[slot] = p1[slot];
    c2[slot + 1] = p1[slot + 1];
    (c1, c2)
}

/// Uniform mutation: each bit flipped independently with probability `mu`.
pub fn mutate(chromosome: &mut Chromosome, mu: f64, rng: &mut impl Rng) {
    for bit in chromosome.iter_mut() {
        if rng.gen::<f64>() < mu {
            *bit = !*bit;
        }
    }
}

/// Compiled matcher for all-binary schemas with at most 64 attributes:
/// `(instance_bits & active) == required`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BitMatcher {
    pub active: u64,
    pub required: u64,
}

impl BitMatcher {
    pub fn compile(rule: &Rule, schema: &AttributeSchema) -> Option<Self> {
        if !schema.is_all_binary() || schema.attribute_count() > 64 {
            return None;
        }
        let mut active = 0u64;
        let mut required = 0u64;
        for (i, test) in rule.condition.iter().enumerate() {
            match test {
                Test::Inactive => {}
                Test::Bit(v) => {
                    active |= 1 << i;
                    if *v {
                        required |= 1 << i;
                    }
                }
                _ => return None,
            }
        }
        Some(BitMatcher { active, required })
    }

    pub fn compile_instance(instance: &Instance) -> u64 {
        let mut bits = 0u64;
        for (i, v) in instance.values.iter().enumerate() {
            if matches!(v, Value::Bit(true)) {
                bits |= 1 << i;
            }
        }
        bits
    }

    #[inline]
    pub fn matches(&self, instance_bits: u64) -> bool {
        instance_bits & self.active == self.required
    }
}
