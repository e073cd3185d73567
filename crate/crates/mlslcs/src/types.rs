//! Core domain model: attribute schemas, instances, rules, classifiers,
//! populations and hyperparameters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Kind of a single attribute in a dataset schema.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AttributeKind {
    Binary,
    /// Nominal attribute with `n` possible values (indices `0..n`).
    Nominal(u32),
    /// Continuous attribute over the closed range `[min, max]`.
    Continuous { min: f64, max: f64 },
}

/// Ordered attribute descriptors plus the number of labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeSchema {
    pub attributes: Vec<AttributeKind>,
    pub label_count: usize,
}

impl AttributeSchema {
    pub fn new(attributes: Vec<AttributeKind>, label_count: usize) -> Result<Self> {
        if attributes.is_empty() {
            return Err(Error::Schema("attribute list is empty".into()));
        }
        if label_count == 0 {
            return Err(Error::Schema("label count must be at least 1".into()));
        }
        for (i, a) in attributes.iter().enumerate() {
            match *a {
                AttributeKind::Nominal(n) if n < 2 => {
                    return Err(Error::Schema(format!(
                        "nominal attribute {i} must have at least 2 values"
                    )));
                }
                AttributeKind::Nominal(n) if n > 64 => {
                    return Err(Error::Schema(format!(
                        "nominal attribute {i} has {n} values; at most 64 are supported"
                    )));
                }
                AttributeKind::Continuous { min, max } if !(min < max) => {
                    return Err(Error::Schema(format!(
                        "continuous attribute {i} needs min < max (got [{min}, {max}])"
                    )));
                }
                _ => {}
            }
        }
        Ok(Self { attributes, label_count })
    }

    /// Schema of `n` binary attributes and `l` labels.
    pub fn all_binary(n: usize, l: usize) -> Self {
        Self::new(vec![AttributeKind::Binary; n], l).expect("valid binary schema")
    }

    pub fn attribute_count(&self) -> usize {
        self.attributes.len()
    }

    pub fn is_all_binary(&self) -> bool {
        self.attributes.iter().all(|a| matches!(a, AttributeKind::Binary))
    }
}

/// A single attribute value of an instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Bit(bool),
    Cat(u32),
    Num(f64),
}

/// One data instance: attribute values plus a binary label vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub values: Vec<Value>,
    pub labels: Vec<bool>,
}

/// A dataset together with its schema.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub schema: AttributeSchema,
    pub instances: Vec<Instance>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    /// Checks every instance against the schema, reporting the first violation.
    pub fn validate(&self) -> Result<()> {
        for (row, inst) in self.instances.iter().enumerate() {
            if inst.values.len() != self.schema.attribute_count() {
                return Err(Error::Validation {
                    row,
                    column: inst.values.len(),
                    message: format!(
                        "expected {} attribute values, found {}",
                        self.schema.attribute_count(),
                        inst.values.len()
                    ),
                });
            }
            if inst.labels.len() != self.schema.label_count {
                return Err(Error::Validation {
                    row,
                    column: self.schema.attribute_count(),
                    message: format!(
                        "expected {} labels, found {}",
                        self.schema.label_count,
                        inst.labels.len()
                    ),
                });
            }
            for (col, (v, kind)) in
                inst.values.iter().zip(self.schema.attributes.iter()).enumerate()
            {
                match (v, kind) {
                    (Value::Bit(_), AttributeKind::Binary) => {}
                    (Value::Cat(c), AttributeKind::Nominal(n)) => {
                        if c >= n {
                            return Err(Error::Validation {
                                row,
                                column: col,
                                message: format!("nominal index {c} out of range (n={n})"),
                            });
                        }
                    }
                    (Value::Num(x), AttributeKind::Continuous { min, max }) => {
                        if !(*min..=*max).contains(x) {
                            return Err(Error::Validation {
                                row,
                                column: col,
                                message: format!("value {x} outside [{min}, {max}]"),
                            });
                        }
                    }
                    _ => {
                        return Err(Error::Validation {
                            row,
                            column: col,
                            message: format!("value {v:?} does not fit attribute kind {kind:?}"),
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

/// Per-attribute condition test.
#[derive(Debug, Clone, PartialEq)]
pub enum Test {
    /// Inactive test: always passes.
    Inactive,
    /// Binary attribute must equal the required bit.
    Bit(bool),
    /// Nominal attribute's value bit must be set in the accepted mask.
    /// An all-zero mask matches nothing.
    Cat(u64),
    /// Continuous attribute must lie in `[lo, hi]` (bounds already ordered).
    Interval { lo: f64, hi: f64 },
}

/// Ternary per-label decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelDecision {
    Advocate,
    Oppose,
    DontCare,
}

impl LabelDecision {
    pub fn is_specific(self) -> bool {
        !matches!(self, LabelDecision::DontCare)
    }

    /// Whether this decision agrees with an instance label. `None` for don't-care.
    pub fn agrees_with(self, label: bool) -> Option<bool> {
        match self {
            LabelDecision::Advocate => Some(label),
            LabelDecision::Oppose => Some(!label),
            LabelDecision::DontCare => None,
        }
    }
}

/// A generalized multi-label rule: per-attribute tests and a ternary consequent.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub condition: Vec<Test>,
    pub consequent: Vec<LabelDecision>,
}

impl Rule {
    /// Fully general rule: all tests inactive, all labels don't-care.
    pub fn most_general(schema: &AttributeSchema) -> Self {
        Rule {
            condition: vec![Test::Inactive; schema.attribute_count()],
            consequent: vec![LabelDecision::DontCare; schema.label_count],
        }
    }

    pub fn decision(&self, label: usize) -> LabelDecision {
        self.consequent[label]
    }
}

/// A rule plus its evolutionary bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct Classifier {
    pub rule: Rule,
    /// Numerosity: number of microclassifier copies.
    pub num: u32,
    /// Estimated size of the smallest correct set the rule participates in.
    pub cs: f64,
    /// Time step of last GA participation.
    pub ts: u64,
    /// Experience: match-set appearances multiplied by the label count.
    pub exp: u64,
    /// Effective match-set appearances (indifferent labels count `phi`).
    pub msa: f64,
    /// Accumulated correctness.
    pub tp: f64,
    /// Incorrect-decision count (diagnostic only).
    pub fp: u64,
    /// tp / msa when msa > 0, else 0.
    pub acc: f64,
    /// Fitness: acc^nu.
    pub fitness: f64,
    /// Number of training instances the rule matches. Fixed at creation.
    pub coverage: u32,
}

impl Classifier {
    /// Fresh classifier as created by covering or as a GA offspring.
    pub fn fresh(rule: Rule, ts: u64, coverage: u32) -> Self {
        Classifier {
            rule,
            num: 1,
            cs: 1.0,
            ts,
            exp: 0,
            msa: 0.0,
            tp: 0.0,
            fp: 0,
            acc: 0.0,
            fitness: 0.0,
            coverage,
        }
    }

    /// Recomputes acc and fitness from (tp, msa).
    pub fn refresh_fitness(&mut self, nu: f64) {
        self.acc = if self.msa > 0.0 { self.tp / self.msa } else { 0.0 };
        self.fitness = self.acc.powf(nu);
    }
}

/// Fitness times numerosity: the voting weight at inference time.
pub fn macro_fitness(cl: &Classifier) -> f64 {
    cl.fitness * cl.num as f64
}

/// Multiset of macroclassifiers under a microclassifier budget.
#[derive(Debug, Clone)]
pub struct Population {
    pub members: Vec<Classifier>,
    /// Maximum total numerosity N.
    pub budget: u32,
    /// Set once the total numerosity first exceeds the budget.
    pub deletions_commenced: bool,
}

impl Population {
    pub fn new(budget: u32) -> Self {
        Population { members: Vec::new(), budget, deletions_commenced: false }
    }

    pub fn total_numerosity(&self) -> u64 {
        self.members.iter().map(|cl| cl.num as u64).sum()
    }

    pub fn macro_count(&self) -> usize {
        self.members.len()
    }
}

/// All tunable parameters of the system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    /// Microclassifier budget N.
    pub population_size: u32,
    /// Training iterations I.
    pub iterations: u64,
    pub theta_ga: f64,
    pub theta_exp: u64,
    pub theta_del: u64,
    pub beta: f64,
    pub nu: f64,
    pub mu: f64,
    pub chi: f64,
    /// Condition generalization probability P_#.
    pub p_hash: f64,
    /// Label generalization probability P_label#.
    pub p_label_hash: f64,
    pub omega: f64,
    pub phi: f64,
    pub acc0: f64,
    /// Quantization bits k for continuous attributes.
    pub quantization_bits: u32,
    pub seed: u64,
    /// Reshuffle instance order each epoch instead of cyclic passes.
    #[serde(default)]
    pub shuffle: bool,
    /// Use the min over all labels (instead of only the rule's correct sets)
    /// in the cs update.
    #[serde(default)]
    pub cs_over_all_labels: bool,
    /// Order Best-rule inference by macro-fitness instead of fitness.
    #[serde(default)]
    pub best_uses_macro_fitness: bool,
}

impl HyperParams {
    /// Parameter values of the typical artificial-problem setup.
    pub fn artificial_defaults() -> Self {
        HyperParams {
            population_size: 10_000,
            iterations: 1500 * 64,
            theta_ga: 2000.0,
            theta_exp: 10,
            theta_del: 20,
            beta: 0.2,
            nu: 10.0,
            mu: 0.04,
            chi: 0.8,
            p_hash: 0.33,
            p_label_hash: 0.5,
            omega: 0.9,
            phi: 1.0,
            acc0: 0.99,
            quantization_bits: 5,
            seed: 0,
            shuffle: false,
            cs_over_all_labels: false,
            best_uses_macro_fitness: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64| -> Result<()> {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Params(format!("{name} must be in [0,1], got {v}")));
            }
            Ok(())
        };
        unit("omega", self.omega)?;
        unit("mu", self.mu)?;
        unit("chi", self.chi)?;
        unit("p_hash", self.p_hash)?;
        unit("p_label_hash", self.p_label_hash)?;
        if !(self.phi > 0.0 && self.phi <= 1.0) {
            return Err(Error::Params(format!("phi must be in (0,1], got {}", self.phi)));
        }
        if !(self.acc0 > 0.0 && self.acc0 <= 1.0) {
            return Err(Error::Params(format!("acc0 must be in (0,1], got {}", self.acc0)));
        }
        if self.nu < 1.0 {
            return Err(Error::Params(format!("nu must be >= 1, got {}", self.nu)));
        }
        if self.quantization_bits == 0 || self.quantization_bits > 30 {
            return Err(Error::Params(format!(
                "quantization_bits must be in 1..=30, got {}",
                self.quantization_bits
            )));
        }
        if self.population_size == 0 {
            return Err(Error::Params("population_size must be positive".into()));
        }
        Ok(())
    }
}
