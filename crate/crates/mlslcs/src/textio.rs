//! Textual rule format.
//!
//! A rule is written as `<condition> -> <consequent>`, optionally followed by
//! `; F=.. num=.. exp=.. acc=..`. Condition tokens are concatenated: `0`, `1`
//! or `#` for binary tests, `{v1,v3}` for nominal accepted-value sets and
//! `[lo,hi]` for continuous intervals. The consequent is a ternary string over
//! `0`, `1`, `#`. Tokens are self-contained, so parsing needs no schema.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::types::{AttributeKind, AttributeSchema, LabelDecision, Rule, Test};

pub fn format_condition(condition: &[Test]) -> String {
    let mut s = String::new();
    for test in condition {
        match test {
            Test::Inactive => s.push('#'),
            Test::Bit(false) => s.push('0'),
            Test::Bit(true) => s.push('1'),
            Test::Cat(mask) => {
                s.push('{');
                let mut first = true;
                for v in 0..64 {
                    if (mask >> v) & 1 == 1 {
                        if !first {
                            s.push(',');
                        }
                        let _ = write!(s, "{v}");
                        first = false;
                    }
                }
                s.push('}');
            }
            Test::Interval { lo, hi } => {
                let _ = write!(s, "[{lo},{hi}]");
            }
        }
    }
    s
}

pub fn format_consequent(consequent: &[LabelDecision]) -> String {
    consequent
        .iter()
        .map(|d| match d {
            LabelDecision::Advocate => '1',
            LabelDecision::Oppose => '0',
            LabelDecision::DontCare => '#',
        })
        .collect()
}

pub fn format_rule(rule: &Rule) -> String {
    format!("{} -> {}", format_condition(&rule.condition), format_consequent(&rule.consequent))
}

fn parse_err(message: impl Into<String>) -> Error {
    Error::Parse { path: "<rule>".into(), line: 0, message: message.into() }
}

fn parse_condition_tokens(s: &str) -> Result<Vec<Test>> {
    let mut tests = Vec::new();
    let mut chars = s.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        match c {
            '#' => tests.push(Test::Inactive),
            '0' => tests.push(Test::Bit(false)),
            '1' => tests.push(Test::Bit(true)),
            '{' => {
                let rest = &s[i + 1..];
                let end = rest.find('}').ok_or_else(|| parse_err("unterminated '{'"))?;
                let mut mask = 0u64;
                let body = &rest[..end];
                if !body.is_empty() {
                    for part in body.split(',') {
                        let v: u32 = part
                            .trim()
                            .parse()
                            .map_err(|_| parse_err(format!("bad nominal value '{part}'")))?;
                        if v >= 64 {
                            return Err(parse_err(format!("nominal value {v} out of range")));
                        }
                        mask |= 1 << v;
                    }
                }
                tests.push(Test::Cat(mask));
                while let Some(&(j, _)) = chars.peek() {
                    if j <= i + 1 + end {
                        chars.next();
                    } else {
                        break;
                    }
                }
            }
            '[' => {
                let rest = &s[i + 1..];
                let end = rest.find(']').ok_or_else(|| parse_err("unterminated '['"))?;
                let body = &rest[..end];
                let (a, b) = body
                    .split_once(',')
                    .ok_or_else(|| parse_err("interval needs two bounds"))?;
                let lo: f64 =
                    a.trim().parse().map_err(|_| parse_err(format!("bad bound '{a}'")))?;
                let hi: f64 =
                    b.trim().parse().map_err(|_| parse_err(format!("bad bound '{b}'")))?;
                tests.push(Test::Interval { lo: lo.min(hi), hi: lo.max(hi) });
                while let Some(&(j, _)) = chars.peek() {
                    if j <= i + 1 + end {
                        chars.next();
                    } else {
                        break;
                    }
                }
            }
            c if c.is_whitespace() => {}
            c => return Err(parse_err(format!("unexpected character '{c}' in condition"))),
        }
    }
    Ok(tests)
}

fn parse_consequent_str(s: &str) -> Result<Vec<LabelDecision>> {
    s.trim()
        .chars()
        .map(|c| match c {
            '1' => Ok(LabelDecision::Advocate),
            '0' => Ok(LabelDecision::Oppose),
            '#' => Ok(LabelDecision::DontCare),
            c => Err(parse_err(format!("unexpected character '{c}' in consequent"))),
        })
        .collect()
}

/// Parses `<condition> -> <consequent>` without a schema. Ternary `0`/`1`
/// condition characters become binary tests.
pub fn parse_rule_freestanding(s: &str) -> Result<Rule> {
    let (cond, cons) = s
        .split_once("->")
        .ok_or_else(|| parse_err("missing '->' separator"))?;
    Ok(Rule {
        condition: parse_condition_tokens(cond.trim())?,
        consequent: parse_consequent_str(cons)?,
    })
}

/// Parses a rule and checks it against the schema.
pub fn parse_rule(s: &str, schema: &AttributeSchema) -> Result<Rule> {
    let rule = parse_rule_freestanding(s)?;
    if rule.condition.len() != schema.attribute_count() {
        return Err(parse_err(format!(
            "condition has {} tests, schema has {} attributes",
            rule.condition.len(),
            schema.attribute_count()
        )));
    }
    if rule.consequent.len() != schema.label_count {
        return Err(parse_err(format!(
            "consequent has {} labels, schema has {}",
            rule.consequent.len(),
            schema.label_count
        )));
    }
    for (i, (test, kind)) in rule.condition.iter().zip(&schema.attributes).enumerate() {
        let ok = matches!(
            (test, kind),
            (Test::Inactive, _)
                | (Test::Bit(_), AttributeKind::Binary)
                | (Test::Cat(_), AttributeKind::Nominal(_))
                | (Test::Interval { .. }, AttributeKind::Continuous { .. })
        );
        if !ok {
            return Err(parse_err(format!("test {i} does not fit attribute kind {kind:?}")));
        }
    }
    Ok(rule)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_rule_round_trip() {
        let schema = AttributeSchema::all_binary(6, 4);
        let rule = parse_rule("1#0#1# -> 01#0", &schema).unwrap();
        assert_eq!(format_rule(&rule), "1#0#1# -> 01#0");
    }

    #[test]
    fn mixed_rule_round_trip() {
        let s = "1{0,2}[0.25,0.75]# -> 1#";
        let rule = parse_rule_freestanding(s).unwrap();
        assert_eq!(rule.condition.len(), 4);
        assert_eq!(rule.condition[1], Test::Cat(0b101));
        assert_eq!(rule.condition[2], Test::Interval { lo: 0.25, hi: 0.75 });
        assert_eq!(format_rule(&rule), s);
    }

    #[test]
    fn rejects_malformed_rules() {
        assert!(parse_rule_freestanding("1#01").is_err());
        assert!(parse_rule_freestanding("1x -> 0").is_err());
        assert!(parse_rule_freestanding("[0.1 -> 0").is_err());
        let schema = AttributeSchema::all_binary(6, 4);
        assert!(parse_rule("1## -> 01##", &schema).is_err());
        assert!(parse_rule("1##### -> 01#", &schema).is_err());
    }
}
