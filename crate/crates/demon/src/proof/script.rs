//! Proof-script files: a tree of rule applications with payload fields.
//!
//! Line-oriented format. A script gives the claimed pre- and
//! postcondition, then one rule block:
//!
//! ```text
//! # Comments run to end of line.
//! pre:  [true]
//! post: [x=y] (+ 1/2) [x!=y]
//!
//! rule Seq {
//!   mid: [y=true] & [y=false]
//!   rule NDSelect {}
//!   rule Consequence {
//!     pre:  ([x=y] (+ 1/2) [x!=y]) & ([x!=y] (+ 1/2) [x=y])
//!     post: [x=y] (+ 1/2) [x!=y]
//!     ...
//!   }
//! }
//! ```
//!
//! Field values run to the end of the line and are parsed according to
//! the rule that consumes them (assertion, atom, expression, or
//! rational). Fields must precede child rule blocks within a node.

use std::fmt;

use thiserror::Error;

use crate::syntax::ast::Assertion;
use crate::syntax::parser::{parse_assertion, ParseError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RuleTag {
    Skip,
    Assign,
    Seq,
    Prob,
    Nondet,
    If1,
    If2,
    ProbSplit,
    NdSplit,
    Consequence,
    Constancy,
    IfJoinProb,
    IfJoinNd,
    IfHoare,
    Flip,
    NdSelect,
    ZeroOne,
    BoundedVariant,
    BoundedRank,
    ProgressingRank,
}

impl RuleTag {
    pub fn parse(name: &str) -> Option<RuleTag> {
        Some(match name {
            "Skip" => RuleTag::Skip,
            "Assign" => RuleTag::Assign,
            "Seq" => RuleTag::Seq,
            "Prob" => RuleTag::Prob,
            "Nondet" => RuleTag::Nondet,
            "If1" => RuleTag::If1,
            "If2" => RuleTag::If2,
            "ProbSplit" => RuleTag::ProbSplit,
            "NDSplit" => RuleTag::NdSplit,
            "Consequence" => RuleTag::Consequence,
            "Constancy" => RuleTag::Constancy,
            "IfJoinProb" => RuleTag::IfJoinProb,
            "IfJoinND" => RuleTag::IfJoinNd,
            "IfHoare" => RuleTag::IfHoare,
            "Flip" => RuleTag::Flip,
            "NDSelect" => RuleTag::NdSelect,
            "ZeroOne" => RuleTag::ZeroOne,
            "BoundedVariant" => RuleTag::BoundedVariant,
            "BoundedRank" => RuleTag::BoundedRank,
            "ProgressingRank" => RuleTag::ProgressingRank,
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            RuleTag::Skip => "Skip",
            RuleTag::Assign => "Assign",
            RuleTag::Seq => "Seq",
            RuleTag::Prob => "Prob",
            RuleTag::Nondet => "Nondet",
            RuleTag::If1 => "If1",
            RuleTag::If2 => "If2",
            RuleTag::ProbSplit => "ProbSplit",
            RuleTag::NdSplit => "NDSplit",
            RuleTag::Consequence => "Consequence",
            RuleTag::Constancy => "Constancy",
            RuleTag::IfJoinProb => "IfJoinProb",
            RuleTag::IfJoinNd => "IfJoinND",
            RuleTag::IfHoare => "IfHoare",
            RuleTag::Flip => "Flip",
            RuleTag::NdSelect => "NDSelect",
            RuleTag::ZeroOne => "ZeroOne",
            RuleTag::BoundedVariant => "BoundedVariant",
            RuleTag::BoundedRank => "BoundedRank",
            RuleTag::ProgressingRank => "ProgressingRank",
        }
    }
}

impl fmt::Display for RuleTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One `key: value` payload line, kept raw; the checker parses the value
/// according to the rule consuming it.
#[derive(Debug, Clone)]
pub struct RawField {
    pub key: String,
    pub value: String,
    pub line: u32,
}

/// One node of the derivation tree.
#[derive(Debug, Clone)]
pub struct Derivation {
    pub rule: RuleTag,
    pub fields: Vec<RawField>,
    pub children: Vec<Derivation>,
    pub line: u32,
}

impl Derivation {
    pub fn field(&self, key: &str) -> Option<&RawField> {
        self.fields.iter().find(|f| f.key == key)
    }

    pub fn fields_named<'a>(&'a self, key: &'a str) -> impl Iterator<Item = &'a RawField> + 'a {
        self.fields.iter().filter(move |f| f.key == key)
    }
}

/// A whole script: the claimed triple plus the derivation for it.
#[derive(Debug, Clone)]
pub struct Script {
    pub pre: Assertion,
    pub post: Assertion,
    pub root: Derivation,
}

#[derive(Debug, Error)]
pub enum ScriptError {
    #[error("line {line}: {msg}")]
    Malformed { line: u32, msg: String },
    #[error("line {line}: unknown rule `{name}`")]
    UnknownRule { line: u32, name: String },
    #[error("line {line}: in field `{key}`: {err}")]
    FieldParse {
        line: u32,
        key: String,
        err: ParseError,
    },
    #[error("script has no rule block")]
    MissingRoot,
}

pub fn parse_script(src: &str) -> Result<Script, ScriptError> {
    let mut lines: Vec<(u32, String)> = Vec::new();
    for (i, raw) in src.lines().enumerate() {
        let without_comment = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let trimmed = without_comment.trim();
        if !trimmed.is_empty() {
            lines.push((i as u32 + 1, trimmed.to_string()));
        }
    }
    let mut pos = 0;
    let pre = take_header(&lines, &mut pos, "pre")?;
    let post = take_header(&lines, &mut pos, "post")?;
    let root = parse_node(&lines, &mut pos)?.ok_or(ScriptError::MissingRoot)?;
    if pos < lines.len() {
        return Err(ScriptError::Malformed {
            line: lines[pos].0,
            msg: format!("unexpected trailing content `{}`", lines[pos].1),
        });
    }
    Ok(Script { pre, post, root })
}

fn take_header(
    lines: &[(u32, String)],
    pos: &mut usize,
    key: &str,
) -> Result<Assertion, ScriptError> {
    let Some((line, text)) = lines.get(*pos) else {
        return Err(ScriptError::Malformed {
            line: 0,
            msg: format!("missing `{key}:` header"),
        });
    };
    let Some(rest) = text.strip_prefix(&format!("{key}:")) else {
        return Err(ScriptError::Malformed {
            line: *line,
            msg: format!("expected `{key}:` header, found `{text}`"),
        });
    };
    *pos += 1;
    parse_assertion(rest.trim()).map_err(|err| ScriptError::FieldParse {
        line: *line,
        key: key.to_string(),
        err,
    })
}

fn parse_node(
    lines: &[(u32, String)],
    pos: &mut usize,
) -> Result<Option<Derivation>, ScriptError> {
    let Some((line, text)) = lines.get(*pos) else {
        return Ok(None);
    };
    let Some(rest) = text.strip_prefix("rule ") else {
        return Ok(None);
    };
    let line = *line;
    *pos += 1;
    let rest = rest.trim();
    let (name, after) = match rest.find('{') {
        Some(brace) => (rest[..brace].trim(), rest[brace + 1..].trim()),
        None => {
            return Err(ScriptError::Malformed {
                line,
                msg: "expected `{` after the rule name".into(),
            })
        }
    };
    let rule = RuleTag::parse(name).ok_or_else(|| ScriptError::UnknownRule {
        line,
        name: name.to_string(),
    })?;
    let mut node = Derivation {
        rule,
        fields: Vec::new(),
        children: Vec::new(),
        line,
    };
    // `rule Name {}` on one line.
    if after == "}" {
        return Ok(Some(node));
    }
    if !after.is_empty() {
        return Err(ScriptError::Malformed {
            line,
            msg: "content after `{` must start on the next line".into(),
        });
    }
    loop {
        let Some((l, text)) = lines.get(*pos) else {
            return Err(ScriptError::Malformed {
                line,
                msg: "unterminated rule block".into(),
            });
        };
        if text == "}" {
            *pos += 1;
            return Ok(Some(node));
        }
        if text.starts_with("rule ") {
            let child = parse_node(lines, pos)?.expect("starts_with rule");
            node.children.push(child);
            continue;
        }
        // A field line: key up to the first colon.
        let Some(colon) = text.find(':') else {
            return Err(ScriptError::Malformed {
                line: *l,
                msg: format!("expected a field, child rule, or `}}`, found `{text}`"),
            });
        };
        if !node.children.is_empty() {
            return Err(ScriptError::Malformed {
                line: *l,
                msg: "fields must precede child rules".into(),
            });
        }
        node.fields.push(RawField {
            key: text[..colon].trim().to_string(),
            value: text[colon + 1..].trim().to_string(),
            line: *l,
        });
        *pos += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_nested_script() {
        let src = "
# coin game
pre:  [true]
post: [x=y] (+ 1/2) [x!=y]
rule Seq {
  mid: [y=true] & [y=false]
  rule NDSelect {}
  rule Consequence {
    pre:  [x=y]
    post: [x=y]
    rule Skip {}
  }
}
";
        let script = parse_script(src).unwrap();
        assert_eq!(script.root.rule, RuleTag::Seq);
        assert_eq!(script.root.children.len(), 2);
        assert_eq!(script.root.children[0].rule, RuleTag::NdSelect);
        assert_eq!(script.root.children[1].children[0].rule, RuleTag::Skip);
        assert_eq!(script.root.field("mid").unwrap().value, "[y=true] & [y=false]");
    }

    #[test]
    fn errors_carry_lines() {
        let err = parse_script("pre: [true]\npost: [true]\nrule Bogus {\n}\n").unwrap_err();
        assert!(matches!(err, ScriptError::UnknownRule { line: 3, .. }), "{err}");
        let err = parse_script("pre: [true]\nrule Skip {}\n").unwrap_err();
        assert!(err.to_string().contains("post"), "{err}");
    }
}
