//! The training cycle: match/correct set formation, fitness and cs updates,
//! GA scheduling and selection, offspring pooling with subsumption, deletion
//! and match-set population control.

use rand::Rng;
use rand_chacha::ChaCha12Rng;

use crate::error::Result;
use crate::representation::{
    condition_subsumes, consequent_subsumes, coverage, covering, decode, encode, matches,
    multilabel_crossover, mutate, BitMatcher, ChromosomeLayout,
};
use crate::rng::{stream, Stream};
use crate::types::{Classifier, Dataset, HyperParams, Instance, Population};

/// One progress row emitted during training.
#[derive(Debug, Clone, PartialEq)]
pub struct ProgressSnapshot {
    pub t: u64,
    pub sum_num: u64,
    pub macro_count: usize,
    pub covering_events: u64,
    pub mean_coverage: f64,
    pub accuracy: Option<f64>,
    pub pct_scs: Option<f64>,
}

impl ProgressSnapshot {
    /// Tab-separated row: `t sum_num macro_count covering_events mean_coverage
    /// [accuracy] [pct_scs]`.
    pub fn tsv_row(&self) -> String {
        let mut row = format!(
            "{}\t{}\t{}\t{}\t{}",
            self.t, self.sum_num, self.macro_count, self.covering_events, self.mean_coverage
        );
        if let Some(acc) = self.accuracy {
            row.push_str(&format!("\t{acc}"));
        }
        if let Some(scs) = self.pct_scs {
            row.push_str(&format!("\t{scs}"));
        }
        row
    }
}

/// Optional population seeding hook (plug point for clustering-based
/// initialization; the default is an empty population).
pub trait InitHook {
    fn initial_population(&self, dataset: &Dataset, params: &HyperParams) -> Vec<Classifier>;
}

/// True iff the mean time since last GA participation in the correct set
/// exceeds `theta_ga` (numerosity-weighted).
pub fn ga_should_run(correct_set: &[&Classifier], t: u64, theta_ga: f64) -> bool {
    let num_sum: f64 = correct_set.iter().map(|cl| cl.num as f64).sum();
    if num_sum == 0.0 {
        return false;
    }
    let ts_sum: f64 = correct_set.iter().map(|cl| cl.ts as f64 * cl.num as f64).sum();
    t as f64 - ts_sum / num_sum > theta_ga
}

/// Experience-discounted fitness-proportionate selection weights. Classifiers
/// below the experience threshold get zero weight.
pub fn selection_weights(
    correct_set: &[&Classifier],
    theta_exp: u64,
    nu: f64,
) -> Vec<f64> {
    correct_set
        .iter()
        .map(|cl| {
            let fd = if cl.exp < theta_exp { 0.0 } else { cl.acc.powf(nu) };
            cl.num as f64 * fd
        })
        .collect()
}

/// Normalized selection probabilities; uniform when every weight is zero.
pub fn selection_probabilities(
    correct_set: &[&Classifier],
    theta_exp: u64,
    nu: f64,
) -> Vec<f64> {
    let weights = selection_weights(correct_set, theta_exp, nu);
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        let p = 1.0 / correct_set.len() as f64;
        return vec![p; correct_set.len()];
    }
    weights.into_iter().map(|w| w / total).collect()
}

const DELETION_FITNESS_FLOOR: f64 = 1e-3;

/// Log of the deletion vote d for one classifier (fitness clamped away from
/// zero so the exponent stays defined).
fn deletion_log_vote(cl: &Classifier, theta_del: u64) -> f64 {
    let f = cl.fitness.max(DELETION_FITNESS_FLOOR);
    if cl.exp < theta_del {
        1.0 / f
    } else {
        (cl.cs - 1.0) - f.ln()
    }
}

/// Normalized deletion probabilities over the population. The votes are
/// exponentials, so they are normalized in log space.
pub fn deletion_probabilities(members: &[Classifier], theta_del: u64) -> Vec<f64> {
    let logs: Vec<f64> = members
        .iter()
        .map(|cl| (cl.num as f64).ln() + deletion_log_vote(cl, theta_del))
        .collect();
    let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

fn roulette(probabilities: &[f64], rng: &mut impl Rng) -> usize {
    let draw: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, p) in probabilities.iter().enumerate() {
        acc += p;
        if draw < acc {
            return i;
        }
    }
    probabilities.len() - 1
}

struct PooledOffspring {
    classifier: Classifier,
    parents: [usize; 2],
}

/// Single-threaded training loop over a dataset.
pub struct Trainer<'a> {
    dataset: &'a Dataset,
    pub params: HyperParams,
    layout: ChromosomeLayout,
    pub population: Population,
    pub t: u64,
    pub covering_events: u64,
    sum_num: u64,
    // named random sub-streams
    rng_covering: ChaCha12Rng,
    rng_selection: ChaCha12Rng,
    rng_crossover: ChaCha12Rng,
    rng_mutation: ChaCha12Rng,
    rng_deletion: ChaCha12Rng,
    rng_shuffle: ChaCha12Rng,
    // fast matching for all-binary schemas
    instance_bits: Option<Vec<u64>>,
    matchers: Vec<BitMatcher>,
    // instance visiting order
    order: Vec<usize>,
    cursor: usize,
}

impl<'a> Trainer<'a> {
    pub fn new(dataset: &'a Dataset, params: HyperParams) -> Result<Self> {
        params.validate()?;
        dataset.validate()?;
        let layout = ChromosomeLayout::new(&dataset.schema, params.quantization_bits);
        let instance_bits = if dataset.schema.is_all_binary()
            && dataset.schema.attribute_count() <= 64
        {
            Some(dataset.instances.iter().map(BitMatcher::compile_instance).collect())
        } else {
            None
        };
        let seed = params.seed;
        Ok(Trainer {
            instance_bits,
            dataset,
            population: Population::new(params.population_size),
            layout,
            t: 0,
            covering_events: 0,
            sum_num: 0,
            rng_covering: stream(seed, Stream::Covering),
            rng_selection: stream(seed, Stream::Selection),
            rng_crossover: stream(seed, Stream::Crossover),
            rng_mutation: stream(seed, Stream::Mutation),
            rng_deletion: stream(seed, Stream::Deletion),
            rng_shuffle: stream(seed, Stream::Shuffle),
            matchers: Vec::new(),
            order: (0..dataset.len()).collect(),
            cursor: 0,
            params,
        })
    }

    pub fn seed_population(&mut self, members: Vec<Classifier>) {
        for cl in members {
            self.insert_macro(cl);
        }
    }

    pub fn dataset(&self) -> &Dataset {
        self.dataset
    }

    fn insert_macro(&mut self, cl: Classifier) {
        self.sum_num += cl.num as u64;
        if let Some(existing) =
            self.population.members.iter_mut().find(|m| m.rule == cl.rule)
        {
            existing.num += cl.num;
            return;
        }
        if self.instance_bits.is_some() {
            self.matchers.push(
                BitMatcher::compile(&cl.rule, &self.dataset.schema)
                    .expect("binary schema compiles"),
            );
        }
        self.population.members.push(cl);
    }

    fn remove_macro(&mut self, index: usize) {
        self.sum_num -= self.population.members[index].num as u64;
        self.population.members.remove(index);
        if self.instance_bits.is_some() {
            self.matchers.remove(index);
        }
    }

    fn rule_coverage(&self, rule: &crate::types::Rule) -> u32 {
        if let Some(bits) = &self.instance_bits {
            if let Some(m) = BitMatcher::compile(rule, &self.dataset.schema) {
                return bits.iter().filter(|&&b| m.matches(b)).count() as u32;
            }
        }
        coverage(rule, self.dataset)
    }

    fn match_set(&self, instance_index: usize) -> Vec<usize> {
        if let Some(bits) = &self.instance_bits {
            let ib = bits[instance_index];
            (0..self.population.members.len())
                .filter(|&i| self.matchers[i].matches(ib))
                .collect()
        } else {
            let inst = &self.dataset.instances[instance_index];
            (0..self.population.members.len())
                .filter(|&i| matches(&self.population.members[i].rule, inst))
                .collect()
        }
    }

    /// Removes from the population the weakest of the classifiers sharing the
    /// lowest coverage level in the match set, when that level holds at least
    /// two of them. At most one removal per invocation.
    fn control_match_set(&mut self, match_set: &mut Vec<usize>) {
        let min_cov = match match_set
            .iter()
            .map(|&i| self.population.members[i].coverage)
            .min()
        {
            Some(c) => c,
            None => return,
        };
        let at_min: Vec<usize> = match_set
            .iter()
            .copied()
            .filter(|&i| self.population.members[i].coverage == min_cov)
            .collect();
        if at_min.len() < 2 {
            return;
        }
        let victim = at_min
            .into_iter()
            .min_by(|&a, &b| {
                let ca = &self.population.members[a];
                let cb = &self.population.members[b];
                ca.fitness
                    .partial_cmp(&cb.fitness)
                    .unwrap()
                    .then(ca.exp.cmp(&cb.exp))
                    .then(a.cmp(&b))
            })
            .unwrap();
        self.remove_macro(victim);
        match_set.retain(|&i| i != victim);
        for i in match_set.iter_mut() {
            if *i > victim {
                *i -= 1;
            }
        }
    }

    fn can_subsume(&self, subsumer: &Classifier, candidate: &Classifier) -> bool {
        subsumer.exp > self.params.theta_exp
            && subsumer.acc > self.params.acc0
            && condition_subsumes(&subsumer.rule, &candidate.rule)
            && consequent_subsumes(&subsumer.rule, &candidate.rule)
    }

    fn add_to_population(&mut self, offspring: Classifier, parents: [usize; 2]) {
        for &p in &parents {
            if p == parents[0] || p == parents[1] {
                if self.can_subsume(&self.population.members[p], &offspring) {
                    self.population.members[p].num += 1;
                    self.sum_num += 1;
                    return;
                }
            }
            if parents[0] == parents[1] {
                break;
            }
        }
        for i in 0..self.population.members.len() {
            if self.can_subsume(&self.population.members[i], &offspring) {
                self.population.members[i].num += 1;
                self.sum_num += 1;
                return;
            }
        }
        self.insert_macro(offspring);
    }

    fn select_parent(&mut self, correct_set: &[usize]) -> usize {
        let refs: Vec<&Classifier> =
            correct_set.iter().map(|&i| &self.population.members[i]).collect();
        let probs =
            selection_probabilities(&refs, self.params.theta_exp, self.params.nu);
        correct_set[roulette(&probs, &mut self.rng_selection)]
    }

    fn run_ga_on_correct_set(
        &mut self,
        correct_set: &[usize],
        label: usize,
    ) -> Vec<PooledOffspring> {
        let t = self.t;
        for &i in correct_set {
            self.population.members[i].ts = t;
        }
        let p1 = self.select_parent(correct_set);
        let p2 = self.select_parent(correct_set);
        let schema = &self.dataset.schema;
        let mut c1 = encode(&self.population.members[p1].rule, schema, &self.layout);
        let mut c2 = encode(&self.population.members[p2].rule, schema, &self.layout);
        if self.rng_crossover.gen::<f64>() < self.params.chi {
            let (a, b) =
                multilabel_crossover(&c1, &c2, label, &self.layout, &mut self.rng_crossover);
            c1 = a;
            c2 = b;
        }
        mutate(&mut c1, self.params.mu, &mut self.rng_mutation);
        mutate(&mut c2, self.params.mu, &mut self.rng_mutation);
        let mut pooled = Vec::with_capacity(2);
        for chromosome in [c1, c2] {
            let rule = decode(&chromosome, &self.dataset.schema, &self.layout);
            let cov = self.rule_coverage(&rule);
            if cov == 0 {
                continue; // zero-coverage rules are dropped at creation
            }
            pooled.push(PooledOffspring {
                classifier: Classifier::fresh(rule, t, cov),
                parents: [p1, p2],
            });
        }
        pooled
    }

    fn deletion_step(&mut self) {
        let probs = deletion_probabilities(&self.population.members, self.params.theta_del);
        let victim = roulette(&probs, &mut self.rng_deletion);
        self.population.members[victim].num -= 1;
        self.sum_num -= 1;
        if self.population.members[victim].num == 0 {
            self.population.members.remove(victim);
            if self.instance_bits.is_some() {
                self.matchers.remove(victim);
            }
        }
    }

    /// Runs one full training cycle on the given dataset row.
    pub fn run_training_cycle(&mut self, instance_index: usize) {
        self.t += 1;
        let t = self.t;
        let label_count = self.dataset.schema.label_count;

        let mut match_set = self.match_set(instance_index);
        if self.population.deletions_commenced {
            self.control_match_set(&mut match_set);
        }

        // per-label correct / incorrect sets, plus numerosity sums of the
        // correct sets as measured at formation time
        let instance: &Instance = &self.dataset.instances[instance_index];
        let mut correct_sets: Vec<Vec<usize>> = vec![Vec::new(); label_count];
        let mut correct_num_sums: Vec<u64> = vec![0; label_count];
        for &i in &match_set {
            let cl = &self.population.members[i];
            for l in 0..label_count {
                if cl.rule.decision(l).agrees_with(instance.labels[l]) == Some(true) {
                    correct_sets[l].push(i);
                    correct_num_sums[l] += cl.num as u64;
                }
            }
        }

        // update component
        for &i in &match_set {
            let cl = &mut self.population.members[i];
            let mut in_some_correct = false;
            let mut cs_min: f64 = f64::INFINITY;
            for l in 0..label_count {
                cl.exp += 1;
                match cl.rule.decision(l).agrees_with(instance.labels[l]) {
                    Some(true) => {
                        cl.tp += 1.0;
                        cl.msa += 1.0;
                        in_some_correct = true;
                        cs_min = cs_min.min(correct_num_sums[l] as f64);
                    }
                    Some(false) => {
                        cl.fp += 1;
                        cl.msa += 1.0;
                    }
                    None => {
                        cl.tp += self.params.omega;
                        cl.msa += self.params.phi;
                    }
                }
            }
            cl.refresh_fitness(self.params.nu);
            if in_some_correct {
                if self.params.cs_over_all_labels {
                    cs_min = correct_num_sums
                        .iter()
                        .map(|&n| n as f64)
                        .fold(f64::INFINITY, f64::min);
                }
                cl.cs += self.params.beta * (cs_min - cl.cs);
            }
        }

        // discovery component
        let mut pool: Vec<PooledOffspring> = Vec::new();
        for l in 0..label_count {
            if correct_sets[l].is_empty() {
                let mut cl = covering(
                    instance,
                    l,
                    &self.dataset.schema,
                    t,
                    &self.params,
                    &mut self.rng_covering,
                );
                cl.coverage = self.rule_coverage(&cl.rule);
                debug_assert!(cl.coverage >= 1);
                self.covering_events += 1;
                self.insert_macro(cl);
            } else {
                let refs: Vec<&Classifier> = correct_sets[l]
                    .iter()
                    .map(|&i| &self.population.members[i])
                    .collect();
                if ga_should_run(&refs, t, self.params.theta_ga) {
                    let offspring = self.run_ga_on_correct_set(&correct_sets[l], l);
                    pool.extend(offspring);
                }
            }
        }

        // offspring pool is flushed only after all labels were processed
        for item in pool {
            self.add_to_population(item.classifier, item.parents);
        }

        if self.sum_num > self.population.budget as u64 {
            self.population.deletions_commenced = true;
        }
        while self.sum_num > self.population.budget as u64 {
            self.deletion_step();
        }
    }

    /// Index of the dataset row the next cycle will train on.
    pub fn next_instance_index(&mut self) -> usize {
        if self.cursor == 0 && self.params.shuffle {
            use rand::seq::SliceRandom;
            self.order.shuffle(&mut self.rng_shuffle);
        }
        let idx = self.order[self.cursor];
        self.cursor = (self.cursor + 1) % self.order.len();
        idx
    }

    /// Runs one cycle on the next instance in order.
    pub fn step(&mut self) {
        let idx = self.next_instance_index();
        self.run_training_cycle(idx);
    }

    pub fn snapshot(&self, accuracy: Option<f64>, pct_scs: Option<f64>) -> ProgressSnapshot {
        let macro_count = self.population.macro_count();
        let mean_coverage = if macro_count == 0 {
            0.0
        } else {
            self.population.members.iter().map(|cl| cl.coverage as f64).sum::<f64>()
                / macro_count as f64
        };
        ProgressSnapshot {
            t: self.t,
            sum_num: self.sum_num,
            macro_count,
            covering_events: self.covering_events,
            mean_coverage,
            accuracy,
            pct_scs,
        }
    }

    pub fn total_numerosity(&self) -> u64 {
        self.sum_num
    }

    pub fn into_population(self) -> Population {
        self.population
    }
}

/// Trains for `params.iterations` cycles and returns the final population.
/// `init_hook` may seed the initial population; `progress_sink` receives a
/// snapshot every `snapshot_period` cycles (0 disables snapshots).
pub fn train(
    dataset: &Dataset,
    params: &HyperParams,
    init_hook: Option<&dyn InitHook>,
    snapshot_period: u64,
    mut progress_sink: impl FnMut(&ProgressSnapshot),
) -> Result<Population> {
    let mut trainer = Trainer::new(dataset, params.clone())?;
    if let Some(hook) = init_hook {
        trainer.seed_population(hook.initial_population(dataset, params));
    }
    for i in 0..params.iterations {
        trainer.step();
        if snapshot_period > 0 && (i + 1) % snapshot_period == 0 {
            progress_sink(&trainer.snapshot(None, None));
        }
    }
    Ok(trainer.into_population())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::generate_toy6x4;
    use crate::textio::parse_rule;
    use crate::types::{AttributeSchema, Rule};
    use rand::SeedableRng;

    fn classifier(rule: &str, schema: &AttributeSchema) -> Classifier {
        Classifier::fresh(parse_rule(rule, schema).unwrap(), 0, 1)
    }

    #[test]
    fn ga_should_run_examples() {
        let schema = AttributeSchema::all_binary(6, 4);
        let mut a = classifier("1##### -> 01##", &schema);
        // all ts = t
        a.ts = 100;
        assert!(!ga_should_run(&[&a], 100, 2000.0));
        // single rule, ts = 0, t = 2001
        a.ts = 0;
        assert!(ga_should_run(&[&a], 2001, 2000.0));
        assert!(!ga_should_run(&[&a], 2000, 2000.0));
        // weighted mean: ts {0 (num 1), 4000 (num 3)}, t = 5001
        let mut b = classifier("0##### -> 1###", &schema);
        b.ts = 4000;
        b.num = 3;
        assert!(ga_should_run(&[&a, &b], 5001, 2000.0));
        assert!(!ga_should_run(&[&a, &b], 5000, 2000.0));
    }

    #[test]
    fn update_fitness_consequent_specificity_pressure() {
        // two always-correct rules differing only in consequent specificity
        let (dataset, _) = generate_toy6x4().unwrap();
        let mut params = HyperParams::artificial_defaults();
        params.omega = 0.9;
        params.phi = 1.0;
        let mut trainer = Trainer::new(&dataset, params).unwrap();
        let r1 = classifier("1##### -> 01##", &dataset.schema);
        let r2 = classifier("1##### -> 0###", &dataset.schema);
        trainer.seed_population(vec![r1, r2]);
        // instance 110000 -> 0100
        let idx = dataset
            .instances
            .iter()
            .position(|i| {
                BitMatcher::compile_instance(i) == 0b000011 && i.labels == vec![false, true, false, false]
            })
            .unwrap();
        trainer.run_training_cycle(idx);
        let m1 = &trainer.population.members[0];
        let m2 = &trainer.population.members[1];
        assert!((m1.tp - 3.8).abs() < 1e-12); // 1 + 1 + 0.9 + 0.9
        assert!((m2.tp - 3.7).abs() < 1e-12); // 1 + 0.9 + 0.9 + 0.9
        assert_eq!(m1.msa, 4.0);
        assert_eq!(m1.exp, 4);
        assert!(m1.acc > m2.acc);
        // on the contested label the specific rule gains 1 vs the general 0.9
        assert!((m1.tp - m2.tp - 0.1).abs() < 1e-12);
    }

    #[test]
    fn update_fitness_all_wrong_and_all_right() {
        let (dataset, _) = generate_toy6x4().unwrap();
        let mut trainer =
            Trainer::new(&dataset, HyperParams::artificial_defaults()).unwrap();
        // rule opposing every actual label of 000011 -> 1111
        let wrong = classifier("000011 -> 0000", &dataset.schema);
        let right = classifier("000011 -> 1111", &dataset.schema);
        trainer.seed_population(vec![wrong, right]);
        let idx = dataset
            .instances
            .iter()
            .position(|i| i.labels == vec![true; 4] && matches!(i.values[0], crate::types::Value::Bit(false)))
            .map(|i| i)
            .unwrap();
        // ensure chosen row is 000011
        assert_eq!(BitMatcher::compile_instance(&dataset.instances[idx]), 0b110000);
        trainer.run_training_cycle(idx);
        let w = &trainer.population.members[0];
        assert_eq!(w.tp, 0.0);
        assert_eq!(w.msa, 4.0);
        assert_eq!(w.acc, 0.0);
        assert_eq!(w.fitness, 0.0);
        assert_eq!(w.fp, 4);
        let r = &trainer.population.members[1];
        assert_eq!(r.acc, 1.0);
        assert_eq!(r.fitness, 1.0);
    }

    #[test]
    fn update_cs_examples() {
        // cs = 1, cs_min = 11, beta = 0.2 -> 3.0
        let cs = 1.0 + 0.2 * (11.0 - 1.0);
        assert_eq!(cs, 3.0);
        // fixed point behavior through a real cycle
        let (dataset, _) = generate_toy6x4().unwrap();
        let mut params = HyperParams::artificial_defaults();
        params.beta = 0.2;
        let mut trainer = Trainer::new(&dataset, params).unwrap();
        let cl = classifier("###### -> 01##", &dataset.schema);
        trainer.seed_population(vec![cl]);
        let idx = dataset
            .instances
            .iter()
            .position(|i| i.labels[0] == false && i.labels[1] == true)
            .unwrap();
        trainer.run_training_cycle(idx);
        // sole member of its correct sets: cs_min = 1 = cs, stays 1
        assert_eq!(trainer.population.members[0].cs, 1.0);
    }

    #[test]
    fn selection_probability_examples() {
        let schema = AttributeSchema::all_binary(6, 4);
        let mut a = classifier("1##### -> 01##", &schema);
        let mut b = classifier("0##### -> 10##", &schema);
        // one eligible classifier
        a.exp = 100;
        a.tp = 50.0;
        a.msa = 50.0;
        a.refresh_fitness(1.0);
        b.exp = 0;
        let probs = selection_probabilities(&[&a, &b], 10, 1.0);
        assert_eq!(probs, vec![1.0, 0.0]);
        // all below threshold -> uniform fallback
        a.exp = 0;
        let probs = selection_probabilities(&[&a, &b], 10, 1.0);
        assert_eq!(probs, vec![0.5, 0.5]);
    }

    #[test]
    fn selection_empirical_ratio_one_to_three() {
        let schema = AttributeSchema::all_binary(6, 4);
        let mut a = classifier("1##### -> 01##", &schema);
        let mut b = classifier("0##### -> 10##", &schema);
        for cl in [&mut a, &mut b] {
            cl.exp = 100;
            cl.tp = 10.0;
            cl.msa = 10.0;
            cl.refresh_fitness(1.0);
        }
        // weights num * F_d = 1 vs 3
        b.num = 3;
        let probs = selection_probabilities(&[&a, &b], 10, 1.0);
        let mut rng = ChaCha12Rng::seed_from_u64(77);
        let draws = 100_000usize;
        let mut first = 0usize;
        for _ in 0..draws {
            if roulette(&probs, &mut rng) == 0 {
                first += 1;
            }
        }
        let p = 0.25f64;
        let sd = (p * (1.0 - p) * draws as f64).sqrt();
        assert!((first as f64 - draws as f64 * p).abs() < 3.0 * sd);
    }

    #[test]
    fn deletion_vote_examples() {
        let schema = AttributeSchema::all_binary(6, 4);
        // experienced rule, cs = 1, F = 1 -> d = 1
        let mut a = classifier("1##### -> 01##", &schema);
        a.exp = 100;
        a.cs = 1.0;
        a.tp = 10.0;
        a.msa = 10.0;
        a.refresh_fitness(1.0);
        assert!((deletion_log_vote(&a, 20).exp() - 1.0).abs() < 1e-12);
        // inexperienced rule, F = 1 -> d = e
        let mut b = classifier("0##### -> 10##", &schema);
        b.tp = 10.0;
        b.msa = 10.0;
        b.refresh_fitness(1.0);
        assert!((deletion_log_vote(&b, 20).exp() - std::f64::consts::E).abs() < 1e-12);
        // probabilities normalize
        let probs = deletion_probabilities(&[a, b], 20);
        assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn first_instance_covers_every_label() {
        let (dataset, _) = generate_toy6x4().unwrap();
        let mut trainer =
            Trainer::new(&dataset, HyperParams::artificial_defaults()).unwrap();
        trainer.step();
        assert_eq!(trainer.covering_events, 4);
        assert!(trainer.total_numerosity() >= 1);
        for cl in &trainer.population.members {
            assert!(cl.coverage >= 1);
        }
    }

    #[test]
    fn subsumption_gate_requires_experience_and_accuracy() {
        let (dataset, _) = generate_toy6x4().unwrap();
        let mut params = HyperParams::artificial_defaults();
        params.theta_exp = 10;
        params.acc0 = 0.99;
        let mut trainer = Trainer::new(&dataset, params).unwrap();
        let mut general = classifier("1##### -> 01##", &dataset.schema);
        general.exp = 50;
        general.tp = 100.0;
        general.msa = 100.0;
        general.refresh_fitness(10.0);
        trainer.seed_population(vec![general]);
        let offspring = classifier("11#### -> 01##", &dataset.schema);
        trainer.add_to_population(offspring.clone(), [0, 0]);
        // experienced accurate subsumer absorbs the offspring
        assert_eq!(trainer.population.macro_count(), 1);
        assert_eq!(trainer.population.members[0].num, 2);
        // inexperienced subsumer does not
        trainer.population.members[0].exp = 5;
        trainer.add_to_population(offspring.clone(), [0, 0]);
        assert_eq!(trainer.population.macro_count(), 2);
        // less specific consequent cannot subsume
        let mut vague = classifier("0##### -> 1###", &dataset.schema);
        vague.exp = 50;
        vague.tp = 100.0;
        vague.msa = 100.0;
        vague.refresh_fitness(10.0);
        trainer.seed_population(vec![vague]);
        let specific = classifier("00#### -> 11##", &dataset.schema);
        let before = trainer.population.macro_count();
        trainer.add_to_population(specific, [2, 2]);
        assert_eq!(trainer.population.macro_count(), before + 1);
    }

    #[test]
    fn control_match_set_removes_weakest_at_min_coverage() {
        let (dataset, _) = generate_toy6x4().unwrap();
        let mut trainer =
            Trainer::new(&dataset, HyperParams::artificial_defaults()).unwrap();
        let mut weak = classifier("110000 -> 0100", &dataset.schema);
        weak.coverage = 1;
        weak.tp = 2.0;
        weak.msa = 10.0;
        weak.refresh_fitness(1.0); // F = 0.2
        let mut strong = classifier("110000 -> 01##", &dataset.schema);
        strong.coverage = 1;
        strong.tp = 9.0;
        strong.msa = 10.0;
        strong.refresh_fitness(1.0); // F = 0.9
        let mut broad = classifier("1##### -> 01##", &dataset.schema);
        broad.coverage = 32;
        trainer.seed_population(vec![weak.clone(), strong, broad]);

        // deletions not commenced -> no-op
        let idx = dataset
            .instances
            .iter()
            .position(|i| BitMatcher::compile_instance(i) == 0b000011)
            .unwrap();
        let mut m = trainer.match_set(idx);
        assert_eq!(m.len(), 3);
        trainer.population.deletions_commenced = true;
        trainer.control_match_set(&mut m);
        assert_eq!(trainer.population.macro_count(), 2);
        assert!(!trainer.population.members.iter().any(|cl| cl.rule == weak.rule));
        assert_eq!(m.len(), 2);

        // distinct coverage levels -> no removal
        let mut m = trainer.match_set(idx);
        trainer.control_match_set(&mut m);
        assert_eq!(trainer.population.macro_count(), 2);
    }

    #[test]
    fn budget_is_restored_after_insertions() {
        let (dataset, _) = generate_toy6x4().unwrap();
        let mut params = HyperParams::artificial_defaults();
        params.population_size = 20;
        params.iterations = 500;
        let pop = train(&dataset, &params, None, 0, |_| {}).unwrap();
        assert!(pop.total_numerosity() <= 20);
        assert!(pop.deletions_commenced);
    }

    #[test]
    fn identical_seed_gives_identical_population() {
        let (dataset, _) = generate_toy6x4().unwrap();
        let mut params = HyperParams::artificial_defaults();
        params.population_size = 200;
        params.iterations = 2000;
        params.seed = 9;
        let a = train(&dataset, &params, None, 0, |_| {}).unwrap();
        let b = train(&dataset, &params, None, 0, |_| {}).unwrap();
        assert_eq!(a.members, b.members);
    }

    #[test]
    fn zero_iterations_returns_initial_population() {
        let (dataset, _) = generate_toy6x4().unwrap();
        let mut params = HyperParams::artificial_defaults();
        params.iterations = 0;
        let pop = train(&dataset, &params, None, 0, |_| {}).unwrap();
        assert_eq!(pop.macro_count(), 0);
    }

    struct SeedOne(Rule);
    impl InitHook for SeedOne {
        fn initial_population(&self, _: &Dataset, _: &HyperParams) -> Vec<Classifier> {
            vec![Classifier::fresh(self.0.clone(), 0, 32)]
        }
    }

    #[test]
    fn init_hook_seeds_population() {
        let (dataset, _) = generate_toy6x4().unwrap();
        let mut params = HyperParams::artificial_defaults();
        params.iterations = 0;
        let rule = parse_rule("1##### -> 01##", &dataset.schema).unwrap();
        let pop = train(&dataset, &params, Some(&SeedOne(rule.clone())), 0, |_| {}).unwrap();
        assert_eq!(pop.macro_count(), 1);
        assert_eq!(pop.members[0].rule, rule);
    }
}
