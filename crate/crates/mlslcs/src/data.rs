//! Artificial problem generators with their shortest-complete-solution
//! rulesets, dataset file ingestion (CSV and Mulan-style ARFF) and k-fold
//! resampling.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::representation::matches;
use crate::rng::{stream, Stream};
use crate::textio::parse_rule;
use crate::types::{AttributeKind, AttributeSchema, Dataset, Instance, Rule, Value};

/// An artificial problem: its schema and the alternative shortest complete
/// solutions used for %SCS tracking.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub schema: AttributeSchema,
    pub scs_alternatives: Vec<Vec<Rule>>,
}

impl ProblemSpec {
    /// Checks that every alternative decides every label of every instance,
    /// and decides it correctly.
    fn verify_complete(&self, dataset: &Dataset) -> Result<()> {
        for (a, alt) in self.scs_alternatives.iter().enumerate() {
            for (row, inst) in dataset.instances.iter().enumerate() {
                for l in 0..self.schema.label_count {
                    let decided = alt.iter().filter(|r| matches(r, inst)).find_map(|r| {
                        r.decision(l).agrees_with(inst.labels[l])
                    });
                    match decided {
                        Some(true) => {}
                        Some(false) => {
                            return Err(Error::Schema(format!(
                                "SCS alternative {a} decides label {l} of row {row} wrongly"
                            )));
                        }
                        None => {
                            return Err(Error::Schema(format!(
                                "SCS alternative {a} leaves label {l} of row {row} undecided"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

fn binary_instance(attrs: Vec<bool>, labels: Vec<bool>) -> Instance {
    Instance { values: attrs.into_iter().map(Value::Bit).collect(), labels }
}

/// toy6x4: 6 binary attributes, 4 labels, full enumeration of all 64 inputs.
/// Labels 0-1 follow three rules over the first two attributes; labels 2-3
/// copy attributes 4-5.
pub fn generate_toy6x4() -> Result<(Dataset, ProblemSpec)> {
    let schema = AttributeSchema::all_binary(6, 4);
    let mut instances = Vec::with_capacity(64);
    for x in 0u32..64 {
        let attrs: Vec<bool> = (0..6).map(|i| (x >> (5 - i)) & 1 == 1).collect();
        let (l0, l1) = match (attrs[0], attrs[1]) {
            (true, _) => (false, true),
            (false, false) => (true, true),
            (false, true) => (true, false),
        };
        let labels = vec![l0, l1, attrs[4], attrs[5]];
        instances.push(binary_instance(attrs, labels));
    }
    let dataset = Dataset { schema: schema.clone(), instances };

    let shared = ["1##### -> 01##", "00#### -> 11##", "01#### -> 10##"];
    let alt1 = ["####00 -> ##00", "####01 -> ##01", "####10 -> ##10", "####11 -> ##11"];
    let alt2 = ["#####0 -> ###0", "#####1 -> ###1", "####0# -> ##0#", "####1# -> ##1#"];
    let build = |extra: &[&str]| -> Result<Vec<Rule>> {
        shared.iter().chain(extra).map(|s| parse_rule(s, &schema)).collect()
    };
    let scs_alternatives = vec![build(&alt1)?, build(&alt2)?];
    let spec = ProblemSpec { name: "toy6x4".into(), schema, scs_alternatives };
    spec.verify_complete(&dataset)?;
    Ok((dataset, spec))
}

/// mlpositionN: N binary attributes, N labels, full enumeration of 2^N
/// inputs. Exactly the label of the most significant set attribute is active;
/// the all-zero input activates no label.
pub fn generate_mlposition(n: usize) -> Result<(Dataset, ProblemSpec)> {
    if n == 0 {
        return Err(Error::Params("mlposition needs N >= 1".into()));
    }
    if n > 20 {
        return Err(Error::Params(format!("mlposition N={n} too large for enumeration")));
    }
    let schema = AttributeSchema::all_binary(n, n);
    let mut instances = Vec::with_capacity(1 << n);
    for x in 0u32..1 << n {
        let attrs: Vec<bool> = (0..n).map(|i| (x >> (n - 1 - i)) & 1 == 1).collect();
        let msb = attrs.iter().position(|&b| b);
        let labels: Vec<bool> = (0..n).map(|i| Some(i) == msb).collect();
        instances.push(binary_instance(attrs, labels));
    }
    let dataset = Dataset { schema: schema.clone(), instances };

    // N+1 rules: 0^N -> 0^N, then 0^i 1 #^(N-i-1) -> label i.
    let mut scs = vec![parse_rule(
        &format!("{} -> {}", "0".repeat(n), "0".repeat(n)),
        &schema,
    )?];
    for i in 0..n {
        let cond = format!("{}1{}", "0".repeat(i), "#".repeat(n - i - 1));
        let cons: String =
            (0..n).map(|l| if l == i { '1' } else { '0' }).collect();
        scs.push(parse_rule(&format!("{cond} -> {cons}"), &schema)?);
    }
    let spec = ProblemSpec {
        name: format!("mlposition{n}"),
        schema,
        scs_alternatives: vec![scs],
    };
    spec.verify_complete(&dataset)?;
    Ok((dataset, spec))
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Writes a dataset as CSV: header row, attributes first, labels last.
pub fn save_csv(dataset: &Dataset, path: &Path) -> Result<()> {
    let mut out = String::new();
    let header: Vec<String> = (0..dataset.schema.attribute_count())
        .map(|i| format!("a{i}"))
        .chain((0..dataset.schema.label_count).map(|l| format!("l{l}")))
        .collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for inst in &dataset.instances {
        let mut fields: Vec<String> = inst
            .values
            .iter()
            .map(|v| match v {
                Value::Bit(b) => (*b as u8).to_string(),
                Value::Cat(c) => c.to_string(),
                Value::Num(x) => x.to_string(),
            })
            .collect();
        fields.extend(inst.labels.iter().map(|&b| (b as u8).to_string()));
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Loads a CSV dataset. The last `label_count` columns are 0/1 labels.
/// Attribute kinds are inferred per column: all values in {0,1} makes a
/// binary attribute, otherwise numeric values make a continuous attribute
/// with the observed range, otherwise the column is nominal over its sorted
/// distinct values.
pub fn load_csv(path: &Path, label_count: usize) -> Result<Dataset> {
    let text = read_to_string(path)?;
    let path_s = path.display().to_string();
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Parse { path: path_s.clone(), line: 1, message: "empty file".into() })?;
    let columns = header.split(',').count();
    if columns <= label_count {
        return Err(Error::Parse {
            path: path_s,
            line: 1,
            message: format!("{columns} columns cannot hold {label_count} labels"),
        });
    }
    let attr_count = columns - label_count;
    let mut rows: Vec<Vec<String>> = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<String> = line.split(',').map(|f| f.trim().to_string()).collect();
        if fields.len() != columns {
            return Err(Error::Parse {
                path: path_s,
                line: idx + 1,
                message: format!("expected {columns} fields, found {}", fields.len()),
            });
        }
        rows.push(fields);
    }
    build_dataset(rows, attr_count, label_count, &path_s)
}

fn build_dataset(
    rows: Vec<Vec<String>>,
    attr_count: usize,
    label_count: usize,
    path: &str,
) -> Result<Dataset> {
    let mut kinds = Vec::with_capacity(attr_count);
    let mut nominal_maps: Vec<Option<Vec<String>>> = Vec::with_capacity(attr_count);
    for col in 0..attr_count {
        let values: Vec<&str> = rows.iter().map(|r| r[col].as_str()).collect();
        if values.iter().all(|v| *v == "0" || *v == "1") {
            kinds.push(AttributeKind::Binary);
            nominal_maps.push(None);
        } else if values.iter().all(|v| v.parse::<f64>().is_ok()) {
            let nums: Vec<f64> = values.iter().map(|v| v.parse().unwrap()).collect();
            let min = nums.iter().cloned().fold(f64::INFINITY, f64::min);
            let max = nums.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let (min, max) = if min < max { (min, max) } else { (min, min + 1.0) };
            kinds.push(AttributeKind::Continuous { min, max });
            nominal_maps.push(None);
        } else {
            let distinct: BTreeSet<String> =
                values.iter().map(|v| v.to_string()).collect();
            let distinct: Vec<String> = distinct.into_iter().collect();
            if distinct.len() < 2 || distinct.len() > 64 {
                return Err(Error::Parse {
                    path: path.into(),
                    line: 0,
                    message: format!(
                        "column {col} has {} distinct nominal values; supported range is 2..=64",
                        distinct.len()
                    ),
                });
            }
            kinds.push(AttributeKind::Nominal(distinct.len() as u32));
            nominal_maps.push(Some(distinct));
        }
    }
    let schema = AttributeSchema::new(kinds, label_count)?;
    let mut instances = Vec::with_capacity(rows.len());
    for (r, fields) in rows.iter().enumerate() {
        let mut values = Vec::with_capacity(attr_count);
        for col in 0..attr_count {
            let field = &fields[col];
            values.push(match (&schema.attributes[col], &nominal_maps[col]) {
                (AttributeKind::Binary, _) => Value::Bit(field == "1"),
                (AttributeKind::Continuous { .. }, _) => Value::Num(field.parse().unwrap()),
                (AttributeKind::Nominal(_), Some(map)) => {
                    Value::Cat(map.iter().position(|v| v == field).unwrap() as u32)
                }
                _ => unreachable!(),
            });
        }
        let mut labels = Vec::with_capacity(label_count);
        for col in attr_count..attr_count + label_count {
            match fields[col].as_str() {
                "0" => labels.push(false),
                "1" => labels.push(true),
                other => {
                    return Err(Error::Parse {
                        path: path.into(),
                        line: r + 2,
                        message: format!("label column contains '{other}', expected 0 or 1"),
                    });
                }
            }
        }
        instances.push(Instance { values, labels });
    }
    let dataset = Dataset { schema, instances };
    dataset.validate()?;
    Ok(dataset)
}

/// How label attributes of an ARFF file are identified.
#[derive(Debug, Clone)]
pub enum LabelSpec {
    /// The last `n` attributes are the labels.
    TrailingCount(usize),
    /// Names listed in a Mulan XML label file.
    XmlPath(std::path::PathBuf),
}

fn parse_label_xml(path: &Path) -> Result<Vec<String>> {
    let text = read_to_string(path)?;
    let mut names = Vec::new();
    let mut rest = text.as_str();
    while let Some(pos) = rest.find("<label ") {
        rest = &rest[pos..];
        let tag_end = rest.find('>').ok_or_else(|| Error::Parse {
            path: path.display().to_string(),
            line: 0,
            message: "unterminated <label> tag".into(),
        })?;
        let tag = &rest[..tag_end];
        if let Some(idx) = tag.find("name=\"") {
            let after = &tag[idx + 6..];
            if let Some(end) = after.find('"') {
                names.push(after[..end].to_string());
            }
        }
        rest = &rest[tag_end..];
    }
    if names.is_empty() {
        return Err(Error::Parse {
            path: path.display().to_string(),
            line: 0,
            message: "no <label name=\"..\"> entries found".into(),
        });
    }
    Ok(names)
}

/// Loads a Mulan-style dense ARFF file. Numeric attributes become continuous
/// with ranges inferred from the data; nominal declarations keep their value
/// order; two-valued {0,1} declarations become binary. Label attributes must
/// hold 0/1 values.
pub fn load_mulan_arff(path: &Path, labels: LabelSpec) -> Result<Dataset> {
    let text = read_to_string(path)?;
    let path_s = path.display().to_string();
    #[derive(Debug)]
    enum Decl {
        Numeric,
        Nominal(Vec<String>),
    }
    let mut decls: Vec<(String, Decl)> = Vec::new();
    let mut data_rows: Vec<(usize, Vec<String>)> = Vec::new();
    let mut in_data = false;
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        if in_data {
            if line.starts_with('{') {
                return Err(Error::Parse {
                    path: path_s,
                    line: idx + 1,
                    message: "sparse ARFF rows are not supported".into(),
                });
            }
            data_rows.push((idx + 1, split_arff_row(line)));
            continue;
        }
        let lower = line.to_ascii_lowercase();
        if lower.starts_with("@data") {
            in_data = true;
        } else if lower.starts_with("@attribute") {
            let rest = line["@attribute".len()..].trim();
            let (name, spec) = if let Some(stripped) = rest.strip_prefix('\'') {
                let end = stripped.find('\'').ok_or_else(|| Error::Parse {
                    path: path_s.clone(),
                    line: idx + 1,
                    message: "unterminated quoted attribute name".into(),
                })?;
                (stripped[..end].to_string(), stripped[end + 1..].trim())
            } else {
                let mut parts = rest.splitn(2, char::is_whitespace);
                let name = parts.next().unwrap_or_default().to_string();
                (name, parts.next().unwrap_or_default().trim())
            };
            let spec_lower = spec.to_ascii_lowercase();
            let decl = if spec.starts_with('{') {
                let body = spec
                    .trim_start_matches('{')
                    .trim_end_matches('}')
                    .split(',')
                    .map(|v| v.trim().trim_matches('\'').to_string())
                    .collect::<Vec<_>>();
                Decl::Nominal(body)
            } else if ["numeric", "real", "integer"].contains(&spec_lower.as_str()) {
                Decl::Numeric
            } else {
                return Err(Error::Parse {
                    path: path_s,
                    line: idx + 1,
                    message: format!("unknown attribute type '{spec}'"),
                });
            };
            decls.push((name, decl));
        }
    }
    if decls.is_empty() || data_rows.is_empty() {
        return Err(Error::Parse {
            path: path_s,
            line: 0,
            message: "ARFF file has no attributes or no data".into(),
        });
    }

    let label_cols: Vec<usize> = match labels {
        LabelSpec::TrailingCount(n) => {
            if n == 0 || n >= decls.len() {
                return Err(Error::Config(format!(
                    "trailing label count {n} invalid for {} attributes",
                    decls.len()
                )));
            }
            (decls.len() - n..decls.len()).collect()
        }
        LabelSpec::XmlPath(xml) => {
            let names = parse_label_xml(&xml)?;
            let mut cols = Vec::with_capacity(names.len());
            for name in &names {
                let col = decls.iter().position(|(n, _)| n == name).ok_or_else(|| {
                    Error::Config(format!("label '{name}' not declared in ARFF header"))
                })?;
                cols.push(col);
            }
            cols
        }
    };
    let attr_cols: Vec<usize> =
        (0..decls.len()).filter(|c| !label_cols.contains(c)).collect();

    // reorder each row into attribute columns followed by label columns
    let mut rows: Vec<Vec<String>> = Vec::with_capacity(data_rows.len());
    for (line_no, fields) in &data_rows {
        if fields.len() != decls.len() {
            return Err(Error::Parse {
                path: path_s,
                line: *line_no,
                message: format!(
                    "expected {} fields, found {}",
                    decls.len(),
                    fields.len()
                ),
            });
        }
        let mut row: Vec<String> = attr_cols.iter().map(|&c| fields[c].clone()).collect();
        row.extend(label_cols.iter().map(|&c| fields[c].clone()));
        rows.push(row);
    }

    // declared nominal value lists drive the schema for nominal attributes
    let mut kinds = Vec::with_capacity(attr_cols.len());
    let mut maps: Vec<Option<Vec<String>>> = Vec::with_capacity(attr_cols.len());
    for (out_col, &c) in attr_cols.iter().enumerate() {
        match &decls[c].1 {
            Decl::Numeric => {
                let nums: Result<Vec<f64>> = rows
                    .iter()
                    .map(|r| {
                        r[out_col].parse::<f64>().map_err(|_| Error::Parse {
                            path: path_s.clone(),
                            line: 0,
                            message: format!(
                                "non-numeric value '{}' in numeric attribute '{}'",
                                r[out_col], decls[c].0
                            ),
                        })
                    })
                    .collect();
                let nums = nums?;
                let min = nums.iter().cloned().fold(f64::INFINITY, f64::min);
                let max = nums.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let (min, max) = if min < max { (min, max) } else { (min, min + 1.0) };
                kinds.push(AttributeKind::Continuous { min, max });
                maps.push(None);
            }
            Decl::Nominal(values) if values.len() == 2 && values.contains(&"0".to_string())
                && values.contains(&"1".to_string()) =>
            {
                kinds.push(AttributeKind::Binary);
                maps.push(None);
            }
            Decl::Nominal(values) => {
                if values.len() < 2 || values.len() > 64 {
                    return Err(Error::Parse {
                        path: path_s,
                        line: 0,
                        message: format!(
                            "nominal attribute '{}' has {} values; supported range is 2..=64",
                            decls[c].0,
                            values.len()
                        ),
                    });
                }
                kinds.push(AttributeKind::Nominal(values.len() as u32));
                maps.push(Some(values.clone()));
            }
        }
    }
    let schema = AttributeSchema::new(kinds, label_cols.len())?;
    let mut instances = Vec::with_capacity(rows.len());
    for (r, row) in rows.iter().enumerate() {
        let mut values = Vec::with_capacity(attr_cols.len());
        for (col, kind) in schema.attributes.iter().enumerate() {
            let field = &row[col];
            let value = match (kind, &maps[col]) {
                (AttributeKind::Binary, _) => Value::Bit(field == "1"),
                (AttributeKind::Continuous { .. }, _) => Value::Num(field.parse().unwrap()),
                (AttributeKind::Nominal(_), Some(map)) => {
                    let idx = map.iter().position(|v| v == field).ok_or_else(|| {
                        Error::Parse {
                            path: path_s.clone(),
                            line: data_rows[r].0,
                            message: format!("undeclared nominal value '{field}'"),
                        }
                    })?;
                    Value::Cat(idx as u32)
                }
                _ => unreachable!(),
            };
            values.push(value);
        }
        let mut labels = Vec::with_capacity(label_cols.len());
        for col in attr_cols.len()..row.len() {
            match row[col].as_str() {
                "0" => labels.push(false),
                "1" => labels.push(true),
                other => {
                    return Err(Error::Parse {
                        path: path_s,
                        line: data_rows[r].0,
                        message: format!("label value '{other}' is not 0/1"),
                    });
                }
            }
        }
        instances.push(Instance { values, labels });
    }
    let dataset = Dataset { schema, instances };
    dataset.validate()?;
    Ok(dataset)
}

fn split_arff_row(line: &str) -> Vec<String> {
    line.split(',').map(|f| f.trim().trim_matches('\'').to_string()).collect()
}

/// Seeded k-fold split: shuffled indices cut into k contiguous folds that
/// partition the dataset; each pair is (all-but-fold, fold).
pub fn kfold_split(dataset: &Dataset, k: usize, seed: u64) -> Result<Vec<(Dataset, Dataset)>> {
    if k < 2 {
        return Err(Error::Params(format!("k-fold needs k >= 2, got {k}")));
    }
    if dataset.len() < k {
        return Err(Error::Params(format!(
            "k={k} exceeds dataset size {}",
            dataset.len()
        )));
    }
    let mut indices: Vec<usize> = (0..dataset.len()).collect();
    let mut rng = stream(seed, Stream::Splits);
    indices.shuffle(&mut rng);
    let base = dataset.len() / k;
    let extra = dataset.len() % k;
    let mut folds = Vec::with_capacity(k);
    let mut start = 0usize;
    for f in 0..k {
        let size = base + usize::from(f < extra);
        folds.push(indices[start..start + size].to_vec());
        start += size;
    }
    let pairs = folds
        .iter()
        .map(|test_idx| {
            let test_set: std::collections::HashSet<usize> = test_idx.iter().copied().collect();
            let train = Dataset {
                schema: dataset.schema.clone(),
                instances: (0..dataset.len())
                    .filter(|i| !test_set.contains(i))
                    .map(|i| dataset.instances[i].clone())
                    .collect(),
            };
            let test = Dataset {
                schema: dataset.schema.clone(),
                instances: test_idx.iter().map(|&i| dataset.instances[i].clone()).collect(),
            };
            (train, test)
        })
        .collect();
    Ok(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::label_cardinality;

    fn bits(s: &str) -> Vec<bool> {
        s.chars().map(|c| c == '1').collect()
    }

    fn find_row<'a>(ds: &'a Dataset, attrs: &str) -> &'a Instance {
        ds.instances
            .iter()
            .find(|i| {
                i.values.iter().zip(attrs.chars()).all(|(v, c)| {
                    matches!(v, Value::Bit(b) if *b == (c == '1'))
                })
            })
            .expect("row present")
    }

    #[test]
    fn toy6x4_examples() {
        let (ds, spec) = generate_toy6x4().unwrap();
        assert_eq!(ds.len(), 64);
        assert_eq!(spec.scs_alternatives.len(), 2);
        assert!(spec.scs_alternatives.iter().all(|a| a.len() == 7));
        assert_eq!(find_row(&ds, "110000").labels, bits("0100"));
        assert_eq!(find_row(&ds, "000011").labels, bits("1111"));
        assert_eq!(find_row(&ds, "010110").labels, bits("1010"));
    }

    #[test]
    fn toy6x4_oracle_rederivation() {
        // independent label function, written directly from the problem statement
        let (ds, _) = generate_toy6x4().unwrap();
        for inst in &ds.instances {
            let a: Vec<bool> = inst
                .values
                .iter()
                .map(|v| matches!(v, Value::Bit(true)))
                .collect();
            let expected = if a[0] {
                vec![false, true, a[4], a[5]]
            } else if !a[1] {
                vec![true, true, a[4], a[5]]
            } else {
                vec![true, false, a[4], a[5]]
            };
            assert_eq!(inst.labels, expected);
        }
    }

    #[test]
    fn toy6x4_label_cardinality_by_brute_force() {
        let (ds, _) = generate_toy6x4().unwrap();
        let total: usize =
            ds.instances.iter().map(|i| i.labels.iter().filter(|&&b| b).count()).sum();
        assert_eq!(label_cardinality(&ds).unwrap(), total as f64 / 64.0);
    }

    #[test]
    fn mlposition4_examples() {
        let (ds, spec) = generate_mlposition(4).unwrap();
        assert_eq!(ds.len(), 16);
        assert_eq!(spec.scs_alternatives[0].len(), 5);
        assert_eq!(find_row(&ds, "0000").labels, bits("0000"));
        assert_eq!(find_row(&ds, "0110").labels, bits("0100"));
        assert_eq!(find_row(&ds, "1011").labels, bits("1000"));
        // one active label except the all-zero input
        assert!((label_cardinality(&ds).unwrap() - 0.9375).abs() < 1e-12);
    }

    #[test]
    fn mlposition_rejects_bad_n() {
        assert!(generate_mlposition(0).is_err());
        assert!(generate_mlposition(21).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let (ds, _) = generate_toy6x4().unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("toy.csv");
        save_csv(&ds, &path).unwrap();
        let back = load_csv(&path, 4).unwrap();
        assert_eq!(back, ds);
    }

    #[test]
    fn csv_rejects_bad_label_value() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "a0,l0\n1,2\n").unwrap();
        assert!(matches!(load_csv(&path, 1), Err(Error::Parse { .. })));
    }

    #[test]
    fn csv_infers_continuous_range() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cont.csv");
        std::fs::write(&path, "a0,l0\n2,0\n7,1\n3.5,0\n").unwrap();
        let ds = load_csv(&path, 1).unwrap();
        assert_eq!(ds.schema.attributes[0], AttributeKind::Continuous { min: 2.0, max: 7.0 });
    }

    #[test]
    fn arff_load_with_trailing_labels() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.arff");
        std::fs::write(
            &path,
            "@relation t\n\
             @attribute f1 numeric\n\
             @attribute f2 {a,b,c}\n\
             @attribute y1 {0,1}\n\
             @attribute y2 {0,1}\n\
             @data\n\
             2.0,a,0,1\n\
             7.0,c,1,0\n",
        )
        .unwrap();
        let ds = load_mulan_arff(&path, LabelSpec::TrailingCount(2)).unwrap();
        assert_eq!(ds.schema.label_count, 2);
        assert_eq!(ds.schema.attributes[0], AttributeKind::Continuous { min: 2.0, max: 7.0 });
        assert_eq!(ds.schema.attributes[1], AttributeKind::Nominal(3));
        assert_eq!(ds.instances[1].values[1], Value::Cat(2));
        assert_eq!(ds.instances[0].labels, vec![false, true]);
    }

    #[test]
    fn arff_load_with_xml_labels() {
        let dir = tempfile::tempdir().unwrap();
        let arff = dir.path().join("d.arff");
        let xml = dir.path().join("d.xml");
        std::fs::write(
            &arff,
            "@relation t\n\
             @attribute y1 {0,1}\n\
             @attribute f1 numeric\n\
             @attribute y2 {0,1}\n\
             @data\n\
             1,3.5,0\n\
             0,4.5,1\n",
        )
        .unwrap();
        std::fs::write(
            &xml,
            "<labels><label name=\"y1\"/><label name=\"y2\"/></labels>",
        )
        .unwrap();
        let ds = load_mulan_arff(&arff, LabelSpec::XmlPath(xml)).unwrap();
        assert_eq!(ds.schema.label_count, 2);
        assert_eq!(ds.schema.attribute_count(), 1);
        assert_eq!(ds.instances[0].labels, vec![true, false]);
    }

    #[test]
    fn kfold_properties() {
        let (ds, _) = generate_toy6x4().unwrap();
        let folds = kfold_split(&ds, 10, 5).unwrap();
        assert_eq!(folds.len(), 10);
        let total: usize = folds.iter().map(|(_, test)| test.len()).sum();
        assert_eq!(total, ds.len());
        for (train, test) in &folds {
            assert_eq!(train.len() + test.len(), ds.len());
            for inst in &test.instances {
                assert!(!train.instances.contains(inst));
            }
        }
        // determinism
        let again = kfold_split(&ds, 10, 5).unwrap();
        assert_eq!(folds[3].1, again[3].1);
        // singleton folds
        let small = Dataset {
            schema: ds.schema.clone(),
            instances: ds.instances[..10].to_vec(),
        };
        let folds = kfold_split(&small, 10, 1).unwrap();
        assert!(folds.iter().all(|(_, t)| t.len() == 1));
        assert!(kfold_split(&small, 11, 1).is_err());
    }
}
