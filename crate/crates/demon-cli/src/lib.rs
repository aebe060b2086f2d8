//! Library side of the command-line tool: shared helpers, output
//! formatting, and the case-study corpus runner (also driven by the
//! acceptance test suite).

pub mod corpus;
pub mod output;

use std::path::PathBuf;
use std::sync::Arc;

use demon::convex::Caps;
use demon::semantics::EngineConfig;
use demon::simulate::{LeftScheduler, RightScheduler, Scheduler, UniformScheduler};
use demon::syntax::ast::Program;
use demon::syntax::{parse_exp, parse_program};
use demon::value::{rat_int, State, Value};

/// Global knobs shared by every subcommand.
#[derive(Debug, Clone)]
pub struct GlobalFlags {
    pub budget: usize,
    pub cap: usize,
    pub seed: u64,
    pub strict: bool,
    pub format: String,
}

impl Default for GlobalFlags {
    fn default() -> Self {
        GlobalFlags {
            budget: 64,
            cap: 10_000,
            seed: 0,
            strict: false,
            format: "text".to_string(),
        }
    }
}

impl GlobalFlags {
    pub fn engine(&self) -> EngineConfig {
        EngineConfig {
            budget: self.budget,
            caps: Caps {
                max_generators: self.cap,
            },
            ..EngineConfig::default()
        }
    }
}

pub fn load_program(path: &PathBuf) -> Result<Program, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let prog = parse_program(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    for w in &prog.warnings {
        eprintln!("warning: {}: {w}", path.display());
    }
    Ok(prog)
}

/// Build the start state: declared-domain defaults overridden by
/// `name=value` bindings.
pub fn start_state(prog: &Program, bindings: Option<&str>) -> Result<State, String> {
    let mut vals: Vec<Value> = (0..prog.table.len())
        .map(|i| match prog.table.domain(i) {
            Some(dom) => dom[0].clone(),
            None => Value::Num(rat_int(0)),
        })
        .collect();
    if let Some(bindings) = bindings {
        for part in bindings.split(',') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let (name, value) = part
                .split_once('=')
                .ok_or_else(|| format!("binding `{part}` is not of the form name=value"))?;
            let idx = prog
                .table
                .lookup(name.trim())
                .ok_or_else(|| format!("unknown variable `{}`", name.trim()))?;
            let exp = parse_exp(value.trim()).map_err(|e| e.to_string())?;
            let dummy = State::new(Arc::clone(&prog.table), vals.clone());
            let v = demon::eval::eval_exp(&exp, &dummy).map_err(|e| e.to_string())?;
            vals[idx] = v;
        }
    }
    Ok(State::new(Arc::clone(&prog.table), vals))
}

pub fn scheduler_by_name(name: &str) -> Result<Box<dyn Scheduler>, String> {
    Ok(match name {
        // `worst` is the committed adversary: always the first option.
        "left" | "worst" => Box::new(LeftScheduler),
        "right" => Box::new(RightScheduler),
        "uniform" => Box::new(UniformScheduler),
        other => return Err(format!("unknown scheduler `{other}`")),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use demon::proof::Verdict;

    #[test]
    fn bindings_override_defaults() {
        let prog = parse_program("var x in {0..5}; var b in {true,false}; skip").unwrap();
        let s = start_state(&prog, Some("x=3, b=true")).unwrap();
        assert_eq!(s.get_named("x"), Some(&Value::Num(rat_int(3))));
        assert_eq!(s.get_named("b"), Some(&Value::Bool(true)));
        let s = start_state(&prog, None).unwrap();
        assert_eq!(s.get_named("x"), Some(&Value::Num(rat_int(0))));
    }

    #[test]
    fn verdict_exit_codes() {
        assert_eq!(Verdict::Accepted.exit_code(), 0);
        assert_eq!(Verdict::Rejected.exit_code(), 1);
        assert_eq!(Verdict::AcceptedWithObligations.exit_code(), 2);
    }
}
