//! Check reports: per-node verdicts plus the discharged side conditions.

use std::fmt;

use super::script::RuleTag;

/// How a side condition was discharged.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DischargeKind {
    /// Syntactic/structural check.
    Structural,
    /// Implication proved by rewriting with the algebraic laws.
    Rewrite,
    /// Implication decided by the exact polytope procedure.
    Polytope,
    /// Triple discharged by exhaustive semantic evaluation.
    Semantic,
    /// Termination bound established by value iteration.
    ValueIteration,
    /// Could not be decided; left open.
    Unknown,
}

impl fmt::Display for DischargeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DischargeKind::Structural => "structural",
            DischargeKind::Rewrite => "rewrite",
            DischargeKind::Polytope => "polytope",
            DischargeKind::Semantic => "semantic",
            DischargeKind::ValueIteration => "value-iteration",
            DischargeKind::Unknown => "unknown",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone)]
pub struct Obligation {
    pub description: String,
    pub how: DischargeKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeVerdict {
    Accepted,
    /// Accepted except for side conditions left `Unknown`.
    ObligationOpen,
    Rejected(String),
}

#[derive(Debug, Clone)]
pub struct NodeReport {
    /// Tree position, e.g. `root.1.0`.
    pub path: String,
    pub rule: RuleTag,
    pub verdict: NodeVerdict,
    pub obligations: Vec<Obligation>,
}

/// Overall verdict of a derivation check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Accepted,
    AcceptedWithObligations,
    Rejected,
}

impl Verdict {
    pub fn exit_code(&self) -> i32 {
        match self {
            Verdict::Accepted => 0,
            Verdict::Rejected => 1,
            Verdict::AcceptedWithObligations => 2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CheckReport {
    pub nodes: Vec<NodeReport>,
    pub verdict: Verdict,
}

impl CheckReport {
    pub fn from_nodes(nodes: Vec<NodeReport>) -> CheckReport {
        let mut verdict = Verdict::Accepted;
        for n in &nodes {
            match &n.verdict {
                NodeVerdict::Rejected(_) => {
                    verdict = Verdict::Rejected;
                    break;
                }
                NodeVerdict::ObligationOpen => verdict = Verdict::AcceptedWithObligations,
                NodeVerdict::Accepted => {}
            }
        }
        CheckReport { nodes, verdict }
    }

    pub fn open_obligations(&self) -> usize {
        self.nodes
            .iter()
            .flat_map(|n| &n.obligations)
            .filter(|o| o.how == DischargeKind::Unknown)
            .count()
    }

    /// Paths of rejected nodes, in tree order.
    pub fn rejected_paths(&self) -> Vec<&str> {
        self.nodes
            .iter()
            .filter(|n| matches!(n.verdict, NodeVerdict::Rejected(_)))
            .map(|n| n.path.as_str())
            .collect()
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for n in &self.nodes {
            let status = match &n.verdict {
                NodeVerdict::Accepted => "ok".to_string(),
                NodeVerdict::ObligationOpen => "open".to_string(),
                NodeVerdict::Rejected(why) => format!("rejected: {why}"),
            };
            writeln!(f, "{:<24} {:<16} {}", n.path, n.rule.name(), status)?;
            for ob in &n.obligations {
                writeln!(f, "{:<24}   [{}] {}", "", ob.how, ob.description)?;
            }
        }
        let word = match self.verdict {
            Verdict::Accepted => "ACCEPTED",
            Verdict::AcceptedWithObligations => "ACCEPTED-WITH-OBLIGATIONS",
            Verdict::Rejected => "REJECTED",
        };
        write!(f, "{word}, {} open obligations", self.open_obligations())
    }
}
