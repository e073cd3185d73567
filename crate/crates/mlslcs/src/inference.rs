//! Performance component: fitness-weighted voting, threshold calibration,
//! best-rule prediction and ruleset compaction.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::metrics::ml_accuracy;
use crate::representation::matches;
use crate::textio::{format_rule, parse_rule_freestanding};
use crate::types::{macro_fitness, Dataset, Instance, LabelDecision, Population, Rule};

/// A decoded rule with the statistics inference needs.
#[derive(Debug, Clone, PartialEq)]
pub struct InferenceRule {
    pub rule: Rule,
    pub fitness: f64,
    pub num: u32,
    pub exp: u64,
    pub acc: f64,
}

impl InferenceRule {
    pub fn macro_fitness(&self) -> f64 {
        self.fitness * self.num as f64
    }
}

/// An immutable list of rules used for prediction.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Ruleset {
    pub rules: Vec<InferenceRule>,
}

impl Ruleset {
    pub fn from_population(population: &Population) -> Self {
        Ruleset {
            rules: population
                .members
                .iter()
                .map(|cl| InferenceRule {
                    rule: cl.rule.clone(),
                    fitness: cl.fitness,
                    num: cl.num,
                    exp: cl.exp,
                    acc: cl.acc,
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    fn matching<'a>(&'a self, instance: &Instance) -> Vec<&'a InferenceRule> {
        self.rules.iter().filter(|r| matches(&r.rule, instance)).collect()
    }

    /// One rule per line:
    /// `<condition> -> <consequent> ; F=<..> num=<..> exp=<..> acc=<..>`.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for r in &self.rules {
            let _ = writeln!(
                out,
                "{} ; F={} num={} exp={} acc={}",
                format_rule(&r.rule),
                r.fitness,
                r.num,
                r.exp,
                r.acc
            );
        }
        out
    }

    /// Parses the serialized form. Blank lines and `#`-prefixed comment lines
    /// are skipped; the stats block is optional.
    pub fn parse(text: &str) -> Result<Self> {
        let mut rules = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| Error::Parse {
                path: "<ruleset>".into(),
                line: lineno + 1,
                message,
            };
            let (rule_part, stats_part) = match line.split_once(';') {
                Some((r, s)) => (r, Some(s)),
                None => (line, None),
            };
            let rule = parse_rule_freestanding(rule_part)
                .map_err(|e| err(e.to_string()))?;
            let mut parsed = InferenceRule { rule, fitness: 0.0, num: 1, exp: 0, acc: 0.0 };
            if let Some(stats) = stats_part {
                for token in stats.split_whitespace() {
                    let (key, value) = token
                        .split_once('=')
                        .ok_or_else(|| err(format!("bad stat token '{token}'")))?;
                    let bad = || err(format!("bad value in '{token}'"));
                    match key {
                        "F" => parsed.fitness = value.parse().map_err(|_| bad())?,
                        "num" => parsed.num = value.parse().map_err(|_| bad())?,
                        "exp" => parsed.exp = value.parse().map_err(|_| bad())?,
                        "acc" => parsed.acc = value.parse().map_err(|_| bad())?,
                        other => return Err(err(format!("unknown stat key '{other}'"))),
                    }
                }
            }
            rules.push(parsed);
        }
        Ok(Ruleset { rules })
    }
}

/// Per-label raw and normalized votes for one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct VoteVector {
    pub raw: Vec<f64>,
    pub normalized: Vec<f64>,
    /// No rule matched the instance; normalized is the uniform fallback.
    pub empty_match: bool,
}

/// Sums signed macro-fitness votes over the matching rules, then normalizes
/// by shifting to the minimum and dividing by the L1 mass. A zero denominator
/// (including an empty match set) yields the uniform vector.
pub fn compute_votes(ruleset: &Ruleset, instance: &Instance) -> VoteVector {
    let label_count = instance.labels.len();
    let mut raw = vec![0.0; label_count];
    let matching = ruleset.matching(instance);
    for rule in &matching {
        let weight = rule.macro_fitness();
        for (l, decision) in rule.rule.consequent.iter().enumerate() {
            match decision {
                LabelDecision::Advocate => raw[l] += weight,
                LabelDecision::Oppose => raw[l] -= weight,
                LabelDecision::DontCare => {}
            }
        }
    }
    let min = raw.iter().cloned().fold(f64::INFINITY, f64::min);
    let mass: f64 = raw.iter().map(|w| w - min).sum();
    let normalized = if mass > 0.0 {
        raw.iter().map(|w| (w - min) / mass).collect()
    } else {
        vec![1.0 / label_count as f64; label_count]
    };
    VoteVector { raw, normalized, empty_match: matching.is_empty() }
}

/// A decision threshold in (0, 0.5].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Threshold(f64);

impl Threshold {
    pub fn new(t: f64) -> Result<Self> {
        if t > 0.0 && t <= 0.5 {
            Ok(Threshold(t))
        } else {
            Err(Error::Params(format!("threshold must be in (0, 0.5], got {t}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Label l is active iff normalized[l] >= t.
pub fn apply_threshold(votes: &VoteVector, t: Threshold) -> Vec<bool> {
    votes.normalized.iter().map(|&w| w >= t.value()).collect()
}

/// The default calibration grid: 0.01, 0.02, ..., 0.50.
pub fn default_grid() -> Vec<f64> {
    (1..=50).map(|i| i as f64 / 100.0).collect()
}

fn calibration_votes(ruleset: &Ruleset, calibration: &Dataset) -> Result<Vec<VoteVector>> {
    if calibration.is_empty() {
        return Err(Error::Params("calibration set is empty".into()));
    }
    Ok(calibration.instances.iter().map(|i| compute_votes(ruleset, i)).collect())
}

/// Picks the grid threshold whose mean predicted label cardinality is closest
/// to the training label cardinality. Ties go to the smallest threshold.
pub fn calibrate_pcut(
    ruleset: &Ruleset,
    calibration: &Dataset,
    train_lca: f64,
    grid: &[f64],
) -> Result<Threshold> {
    let votes = calibration_votes(ruleset, calibration)?;
    let mut best: Option<(f64, f64)> = None;
    for &t in grid {
        let threshold = Threshold::new(t)?;
        let mean_card: f64 = votes
            .iter()
            .map(|v| apply_threshold(v, threshold).iter().filter(|&&b| b).count() as f64)
            .sum::<f64>()
            / votes.len() as f64;
        let err = (train_lca - mean_card).abs();
        if best.map_or(true, |(_, e)| err < e) {
            best = Some((t, err));
        }
    }
    Threshold::new(best.expect("non-empty grid").0)
}

/// Picks the grid threshold maximizing multi-label accuracy on the
/// calibration set. Ties go to the smallest threshold.
pub fn calibrate_ival(
    ruleset: &Ruleset,
    calibration: &Dataset,
    grid: &[f64],
) -> Result<Threshold> {
    let votes = calibration_votes(ruleset, calibration)?;
    let truths: Vec<Vec<bool>> =
        calibration.instances.iter().map(|i| i.labels.clone()).collect();
    let mut best: Option<(f64, f64)> = None;
    for &t in grid {
        let threshold = Threshold::new(t)?;
        let preds: Vec<Vec<bool>> =
            votes.iter().map(|v| apply_threshold(v, threshold)).collect();
        let acc = ml_accuracy(&preds, &truths)?;
        if best.map_or(true, |(_, a)| acc > a) {
            best = Some((t, acc));
        }
    }
    Threshold::new(best.expect("non-empty grid").0)
}

/// Prediction from the fittest matching rules: the sorted list is walked top
/// down, each rule filling only still-undecided labels; leftovers default to
/// inactive. Returns the prediction and an empty-match flag.
pub fn predict_best(
    ruleset: &Ruleset,
    instance: &Instance,
    order_by_macro_fitness: bool,
) -> (Vec<bool>, bool) {
    let mut matching = ruleset.matching(instance);
    let empty = matching.is_empty();
    matching.sort_by(|a, b| {
        let ka = if order_by_macro_fitness { a.macro_fitness() } else { a.fitness };
        let kb = if order_by_macro_fitness { b.macro_fitness() } else { b.fitness };
        kb.partial_cmp(&ka)
            .unwrap()
            .then(b.num.cmp(&a.num))
            .then(b.exp.cmp(&a.exp))
    });
    let label_count = instance.labels.len();
    let mut prediction = vec![false; label_count];
    let mut decided = vec![false; label_count];
    for rule in matching {
        for (l, decision) in rule.rule.consequent.iter().enumerate() {
            if !decided[l] {
                if let Some(active) = match decision {
                    LabelDecision::Advocate => Some(true),
                    LabelDecision::Oppose => Some(false),
                    LabelDecision::DontCare => None,
                } {
                    prediction[l] = active;
                    decided[l] = true;
                }
            }
        }
        if decided.iter().all(|&d| d) {
            break;
        }
    }
    (prediction, empty)
}

/// Greedy compaction over macro-fitness: a rule is kept iff it matches a not
/// yet matched training instance or provides a specific decision for a not
/// yet decided (instance, label) pair. Stops once coverage and decisions are
/// complete.
pub fn compact_ruleset(population: &Population, trainset: &Dataset) -> Ruleset {
    let mut order: Vec<usize> = (0..population.members.len()).collect();
    order.sort_by(|&a, &b| {
        macro_fitness(&population.members[b])
            .partial_cmp(&macro_fitness(&population.members[a]))
            .unwrap()
    });
    let label_count = trainset.schema.label_count;
    let mut matched = vec![false; trainset.len()];
    let mut decided = vec![vec![false; label_count]; trainset.len()];
    let mut remaining_matches = trainset.len();
    let mut remaining_pairs = trainset.len() * label_count;
    let mut kept = Vec::new();
    for idx in order {
        if remaining_matches == 0 && remaining_pairs == 0 {
            break;
        }
        let cl = &population.members[idx];
        let mut useful = false;
        for (i, inst) in trainset.instances.iter().enumerate() {
            if !matches(&cl.rule, inst) {
                continue;
            }
            if !matched[i] {
                matched[i] = true;
                remaining_matches -= 1;
                useful = true;
            }
            for l in 0..label_count {
                if !decided[i][l] && cl.rule.decision(l).is_specific() {
                    decided[i][l] = true;
                    remaining_pairs -= 1;
                    useful = true;
                }
            }
        }
        if useful {
            kept.push(InferenceRule {
                rule: cl.rule.clone(),
                fitness: cl.fitness,
                num: cl.num,
                exp: cl.exp,
                acc: cl.acc,
            });
        }
    }
    Ruleset { rules: kept }
}

/// Inference strategy selector shared by the CLI and the experiment driver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum InferenceMethod {
    Pcut,
    Ival,
    Best,
}

impl std::str::FromStr for InferenceMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pcut" => Ok(InferenceMethod::Pcut),
            "ival" => Ok(InferenceMethod::Ival),
            "best" => Ok(InferenceMethod::Best),
            other => Err(Error::Params(format!("unknown inference method '{other}'"))),
        }
    }
}

impl std::fmt::Display for InferenceMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            InferenceMethod::Pcut => "pcut",
            InferenceMethod::Ival => "ival",
            InferenceMethod::Best => "best",
        };
        f.write_str(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::generate_toy6x4;
    use crate::textio::parse_rule;
    use crate::types::{AttributeSchema, Classifier, Value};

    fn rule(s: &str, schema: &AttributeSchema) -> Rule {
        parse_rule(s, schema).unwrap()
    }

    fn iruleset(specs: &[(&str, f64, u32)], schema: &AttributeSchema) -> Ruleset {
        Ruleset {
            rules: specs
                .iter()
                .map(|&(s, fitness, num)| InferenceRule {
                    rule: rule(s, schema),
                    fitness,
                    num,
                    exp: 100,
                    acc: fitness,
                })
                .collect(),
        }
    }

    fn instance(bits: &str, labels: &str) -> Instance {
        Instance {
            values: bits.chars().map(|c| Value::Bit(c == '1')).collect(),
            labels: labels.chars().map(|c| c == '1').collect(),
        }
    }

    #[test]
    fn vote_examples() {
        let schema = AttributeSchema::all_binary(2, 2);
        // one matching rule, macro-fitness 2, advocates label 0 only
        let rs = iruleset(&[("## -> 1#", 1.0, 2)], &schema);
        let v = compute_votes(&rs, &instance("00", "00"));
        assert_eq!(v.raw, vec![2.0, 0.0]);
        assert_eq!(v.normalized, vec![1.0, 0.0]);
        assert!(!v.empty_match);
        // equal macro-fitness advocacy and opposition cancel
        let rs = iruleset(&[("## -> 1#", 0.5, 2), ("## -> 0#", 1.0, 1)], &schema);
        let v = compute_votes(&rs, &instance("00", "00"));
        assert_eq!(v.raw[0], 0.0);
        // no matching rules: uniform fallback, flagged
        let rs = iruleset(&[("11 -> 1#", 1.0, 1)], &schema);
        let v = compute_votes(&rs, &instance("00", "00"));
        assert_eq!(v.raw, vec![0.0, 0.0]);
        assert_eq!(v.normalized, vec![0.5, 0.5]);
        assert!(v.empty_match);
    }

    #[test]
    fn normalization_sums_to_one() {
        let schema = AttributeSchema::all_binary(2, 3);
        let rs = iruleset(
            &[("## -> 10#", 0.7, 3), ("#1 -> 011", 0.9, 2), ("1# -> #01", 0.3, 1)],
            &schema,
        );
        for bits in ["00", "01", "10", "11"] {
            let v = compute_votes(&rs, &instance(bits, "000"));
            assert!((v.normalized.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert!(v.normalized.iter().all(|&w| (0.0..=1.0).contains(&w)));
        }
    }

    #[test]
    fn threshold_examples() {
        let v = VoteVector { raw: vec![], normalized: vec![0.6, 0.4], empty_match: false };
        assert_eq!(apply_threshold(&v, Threshold::new(0.5).unwrap()), vec![true, false]);
        let v = VoteVector { raw: vec![], normalized: vec![0.5, 0.5], empty_match: false };
        assert_eq!(apply_threshold(&v, Threshold::new(0.5).unwrap()), vec![true, true]);
        let v = VoteVector {
            raw: vec![],
            normalized: vec![1.0, 0.0, 0.0],
            empty_match: false,
        };
        for t in [0.01, 0.25, 0.5] {
            assert_eq!(
                apply_threshold(&v, Threshold::new(t).unwrap()),
                vec![true, false, false]
            );
        }
        assert!(Threshold::new(0.0).is_err());
        assert!(Threshold::new(0.51).is_err());
    }

    #[test]
    fn threshold_is_monotone_and_scale_invariant() {
        let schema = AttributeSchema::all_binary(2, 3);
        let rs = iruleset(&[("## -> 10#", 0.8, 4), ("## -> #11", 0.6, 1)], &schema);
        let scaled = Ruleset {
            rules: rs
                .rules
                .iter()
                .map(|r| InferenceRule { fitness: r.fitness * 7.5, ..r.clone() })
                .collect(),
        };
        let inst = instance("01", "000");
        let (v, vs) = (compute_votes(&rs, &inst), compute_votes(&scaled, &inst));
        let mut prev: Option<Vec<bool>> = None;
        for t in default_grid() {
            let th = Threshold::new(t).unwrap();
            let p = apply_threshold(&v, th);
            assert_eq!(p, apply_threshold(&vs, th));
            if let Some(prev) = &prev {
                // active set shrinks (setwise) as t grows
                assert!(p.iter().zip(prev).all(|(now, before)| !now | before));
            }
            prev = Some(p);
        }
    }

    /// Ruleset yielding normalized votes (0.5, 1/3, 1/6, 0) on every instance.
    fn graded_ruleset(schema: &AttributeSchema) -> Ruleset {
        iruleset(
            &[
                ("## -> 1###", 1.0, 4),
                ("## -> #1##", 1.0, 3),
                ("## -> ##1#", 1.0, 2),
                ("## -> ###1", 1.0, 1),
            ],
            schema,
        )
    }

    #[test]
    fn pcut_matches_cardinality() {
        let schema = AttributeSchema::all_binary(2, 4);
        let rs = graded_ruleset(&schema);
        let calib = Dataset {
            schema: schema.clone(),
            instances: vec![instance("00", "1100"), instance("11", "1100")],
        };
        // cardinality curve: 3 labels below 1/6, 2 in (1/6, 1/3], 1 above
        let t = calibrate_pcut(&rs, &calib, 2.0, &default_grid()).unwrap();
        assert_eq!(t.value(), 0.17);
        let t = calibrate_pcut(&rs, &calib, 1.0, &default_grid()).unwrap();
        assert_eq!(t.value(), 0.34);
        // constant curve: tie goes to the smallest grid point
        let flat = iruleset(&[("## -> 1###", 1.0, 1)], &schema);
        let t = calibrate_pcut(&flat, &calib, 1.0, &default_grid()).unwrap();
        assert_eq!(t.value(), 0.01);
    }

    #[test]
    fn ival_maximizes_accuracy() {
        let schema = AttributeSchema::all_binary(2, 4);
        let rs = graded_ruleset(&schema);
        let calib = Dataset {
            schema: schema.clone(),
            instances: vec![instance("00", "1000"), instance("11", "1000")],
        };
        // only label 0 is true: accuracy peaks once t exceeds 1/3
        let t = calibrate_ival(&rs, &calib, &default_grid()).unwrap();
        assert_eq!(t.value(), 0.34);
        // metric constant in t -> smallest grid point
        let flat = iruleset(&[("## -> ####", 1.0, 1)], &schema);
        let t = calibrate_ival(&flat, &calib, &default_grid()).unwrap();
        assert_eq!(t.value(), 0.01);
    }

    #[test]
    fn calibration_rejects_empty_set() {
        let schema = AttributeSchema::all_binary(2, 4);
        let rs = graded_ruleset(&schema);
        let empty = Dataset { schema, instances: vec![] };
        assert!(calibrate_pcut(&rs, &empty, 1.0, &default_grid()).is_err());
        assert!(calibrate_ival(&rs, &empty, &default_grid()).is_err());
    }

    #[test]
    fn best_rule_examples() {
        let schema = AttributeSchema::all_binary(2, 4);
        // single matching rule with partial consequent: undecided labels -> 0
        let rs = iruleset(&[("## -> 1#0#", 0.9, 1)], &schema);
        let (p, empty) = predict_best(&rs, &instance("00", "0000"), false);
        assert_eq!(p, vec![true, false, false, false]);
        assert!(!empty);
        // fittest rule fully specific: verbatim consequent
        let rs = iruleset(&[("## -> 0110", 0.9, 1), ("## -> 1001", 0.5, 9)], &schema);
        let (p, _) = predict_best(&rs, &instance("00", "0000"), false);
        assert_eq!(p, vec![false, true, true, false]);
        // lower-fitness rules only fill gaps
        let rs = iruleset(&[("## -> 1##1", 0.9, 1), ("## -> 0110", 0.5, 1)], &schema);
        let (p, _) = predict_best(&rs, &instance("00", "0000"), false);
        assert_eq!(p, vec![true, true, true, true]);
        // no matching rules: all-zero, flagged
        let rs = iruleset(&[("11 -> 1111", 0.9, 1)], &schema);
        let (p, empty) = predict_best(&rs, &instance("00", "0000"), false);
        assert_eq!(p, vec![false; 4]);
        assert!(empty);
        // macro-fitness ordering flips the winner when requested
        let rs = iruleset(&[("## -> 0110", 0.9, 1), ("## -> 1001", 0.5, 9)], &schema);
        let (p, _) = predict_best(&rs, &instance("00", "0000"), true);
        assert_eq!(p, vec![true, false, false, true]);
    }

    #[test]
    fn compaction_keeps_exactly_the_scs() {
        let (dataset, problem) = generate_toy6x4().unwrap();
        let scs = &problem.scs_alternatives[0];
        let mut members: Vec<Classifier> = scs
            .iter()
            .map(|r| {
                let mut cl = Classifier::fresh(r.clone(), 0, 1);
                cl.fitness = 1.0;
                cl.acc = 1.0;
                cl.num = 2;
                cl
            })
            .collect();
        // junk rules with lower macro-fitness contribute nothing new
        for junk in ["###### -> 1###", "1##### -> ###1", "#0#### -> 0###"] {
            let mut cl = Classifier::fresh(parse_rule(junk, &dataset.schema).unwrap(), 0, 1);
            cl.fitness = 0.3;
            cl.num = 1;
            members.push(cl);
        }
        let mut pop = Population::new(10_000);
        for cl in members {
            pop.members.push(cl);
        }
        let compact = compact_ruleset(&pop, &dataset);
        assert_eq!(compact.len(), scs.len());
        for r in scs {
            assert!(compact.rules.iter().any(|ir| &ir.rule == r));
        }
    }

    #[test]
    fn compaction_of_empty_population_is_empty() {
        let (dataset, _) = generate_toy6x4().unwrap();
        let compact = compact_ruleset(&Population::new(10), &dataset);
        assert!(compact.is_empty());
    }

    #[test]
    fn serialization_round_trip() {
        let schema = AttributeSchema::all_binary(3, 2);
        let rs = iruleset(&[("1#0 -> 01", 0.875, 3), ("### -> #1", 0.25, 1)], &schema);
        let text = rs.serialize();
        let parsed = Ruleset::parse(&text).unwrap();
        assert_eq!(parsed, rs);
        // comments and blank lines are tolerated
        let annotated = format!("# model\n\n{text}");
        assert_eq!(Ruleset::parse(&annotated).unwrap(), rs);
        // stats are optional
        let bare = Ruleset::parse("1#0 -> 01\n").unwrap();
        assert_eq!(bare.rules[0].num, 1);
        assert_eq!(bare.rules[0].fitness, 0.0);
        // malformed stats rejected
        assert!(Ruleset::parse("1#0 -> 01 ; Q=3").is_err());
        assert!(Ruleset::parse("1#0 -> 01 ; F=x").is_err());
    }
}
