//! Cell partitions: the finite partition of the declared state space by
//! truth assignments to a set of atoms, used as coordinates by the
//! implication engine.

use std::collections::HashMap;

use thiserror::Error;

use crate::eval::{eval_bool, EvalError};
use crate::syntax::ast::Atom;
use crate::value::{enumerate_states, State, VarTable};
use std::sync::Arc;

#[derive(Debug, Error)]
pub enum CellError {
    #[error("every variable needs a declared finite domain for this analysis")]
    MissingDomains,
    #[error("declared state space exceeds the enumeration cap of {0}")]
    SpaceTooLarge(usize),
    #[error("atom truth assignments produce more than {0} inhabited cells")]
    TooManyCells(usize),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// One inhabited cell: an atom truth pattern, a canonical representative,
/// and how many declared states realize it.
#[derive(Debug, Clone)]
pub struct Cell {
    pub pattern: Vec<bool>,
    pub rep: State,
    pub count: usize,
}

/// The inhabited cells of the declared space under a fixed atom list.
/// Patterns absent from `cells` are uninhabited.
#[derive(Debug)]
pub struct CellPartition {
    pub atoms: Vec<Atom>,
    pub cells: Vec<Cell>,
}

pub const DEFAULT_MAX_CELLS: usize = 4096;
pub const DEFAULT_MAX_SPACE: usize = 1 << 20;

impl CellPartition {
    pub fn build(
        atoms: Vec<Atom>,
        table: &Arc<VarTable>,
        max_space: usize,
        max_cells: usize,
    ) -> Result<CellPartition, CellError> {
        if !table.fully_declared() {
            return Err(CellError::MissingDomains);
        }
        let states =
            enumerate_states(table, max_space).ok_or(CellError::SpaceTooLarge(max_space))?;
        let mut index: HashMap<Vec<bool>, usize> = HashMap::new();
        let mut cells: Vec<Cell> = Vec::new();
        for s in states {
            let pattern = atoms
                .iter()
                .map(|a| eval_bool(a, &s))
                .collect::<Result<Vec<bool>, _>>()?;
            match index.get(&pattern) {
                Some(&i) => cells[i].count += 1,
                None => {
                    if cells.len() == max_cells {
                        return Err(CellError::TooManyCells(max_cells));
                    }
                    index.insert(pattern.clone(), cells.len());
                    cells.push(Cell {
                        pattern,
                        rep: s,
                        count: 1,
                    });
                }
            }
        }
        Ok(CellPartition { atoms, cells })
    }

    /// Index of the atom in the partition's atom list.
    pub fn atom_index(&self, atom: &Atom) -> Option<usize> {
        self.atoms.iter().position(|a| a == atom)
    }

    /// Number of proper-cell coordinates (the divergence cell is extra,
    /// by convention the last coordinate).
    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }
}
