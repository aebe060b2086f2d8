//! Static helpers: modified-variable sets and free variables, as used by
//! the frame-style side condition of the Constancy rule.

use std::collections::BTreeSet;

use crate::syntax::ast::{Atom, Cmd};
use crate::value::VarTable;

/// Over-approximation of the variables a command may modify.
///
/// A possibly nonterminating command must be treated as modifying every
/// program variable, so `while` contributes the full variable set unless
/// `loop_certified` returns true for that loop node (e.g. because an
/// accepted termination rule covers it), in which case only the variables
/// assigned in its body count.
pub fn modified_vars_with(
    cmd: &Cmd,
    table: &VarTable,
    loop_certified: &dyn Fn(&Cmd) -> bool,
) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    go(cmd, table, loop_certified, &mut out);
    out
}

/// `modified_vars` with no termination certificates: every loop widens to
/// the full variable set.
pub fn modified_vars(cmd: &Cmd, table: &VarTable) -> BTreeSet<String> {
    modified_vars_with(cmd, table, &|_| false)
}

fn go(
    cmd: &Cmd,
    table: &VarTable,
    loop_certified: &dyn Fn(&Cmd) -> bool,
    out: &mut BTreeSet<String>,
) {
    match cmd {
        Cmd::Skip => {}
        Cmd::Assign(x, _) => {
            out.insert(x.clone());
        }
        Cmd::Seq(a, b) | Cmd::NdChoice(a, b) => {
            go(a, table, loop_certified, out);
            go(b, table, loop_certified, out);
        }
        Cmd::ProbChoice(_, a, b) | Cmd::If(_, a, b) => {
            go(a, table, loop_certified, out);
            go(b, table, loop_certified, out);
        }
        Cmd::While(_, body) => {
            if loop_certified(cmd) {
                go(body, table, loop_certified, out);
            } else {
                for name in table.names() {
                    out.insert(name.clone());
                }
            }
        }
    }
}

/// Free variables of an atom.
pub fn free_vars(atom: &Atom) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    atom.free_vars(&mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parser::{parse_atom, parse_program};

    #[test]
    fn straight_line_assignments() {
        let prog = parse_program("x := 1; y := 2").unwrap();
        let mods = modified_vars(&prog.cmd, &prog.table);
        assert_eq!(mods, ["x", "y"].iter().map(|s| s.to_string()).collect());
    }

    #[test]
    fn skip_modifies_nothing() {
        let prog = parse_program("skip").unwrap();
        assert!(modified_vars(&prog.cmd, &prog.table).is_empty());
    }

    #[test]
    fn loops_widen_to_all_variables() {
        let prog = parse_program("y := 1; while b do x := 1").unwrap();
        let mods = modified_vars(&prog.cmd, &prog.table);
        // b and y are program variables, so the loop contributes them too.
        assert_eq!(
            mods,
            ["b", "x", "y"].iter().map(|s| s.to_string()).collect()
        );
        let certified = modified_vars_with(&prog.cmd, &prog.table, &|_| true);
        assert_eq!(
            certified,
            ["x", "y"].iter().map(|s| s.to_string()).collect()
        );
    }

    #[test]
    fn atom_free_vars() {
        let atom = parse_atom("x = 1 && ys[i] > 0").unwrap();
        assert_eq!(
            free_vars(&atom),
            ["i", "x", "ys"].iter().map(|s| s.to_string()).collect()
        );
    }
}
