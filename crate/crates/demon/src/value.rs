//! Runtime values and interned program states.
//!
//! A [`State`] is a total map from the program's variables to [`Value`]s.
//! States are hash-consed through a process-wide interner so that equality
//! is pointer equality and hashing reuses a cached digest; distribution
//! maps over states rely on this being cheap.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::collections::HashSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, LazyLock, Mutex};

use num_bigint::BigInt;
use num_rational::BigRational;

/// Exact rational scalar used everywhere in the semantic core.
pub type Rat = BigRational;

/// Build a rational from a signed numerator/denominator pair.
pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// Shorthand for an integer-valued rational.
pub fn rat_int(n: i64) -> Rat {
    Rat::from(BigInt::from(n))
}

/// A program value: boolean, exact rational, or finite list.
///
/// Rationals are kept in lowest terms with a positive denominator by
/// construction (`BigRational` maintains this). Lists may nest.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Value {
    Bool(bool),
    Num(Rat),
    List(Vec<Value>),
}

impl Value {
    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_num(&self) -> Option<&Rat> {
        match self {
            Value::Num(r) => Some(r),
            _ => None,
        }
    }

    /// Type tag used in diagnostics.
    pub fn type_name(&self) -> &'static str {
        match self {
            Value::Bool(_) => "bool",
            Value::Num(_) => "number",
            Value::List(_) => "list",
        }
    }
}

impl Ord for Value {
    fn cmp(&self, other: &Self) -> Ordering {
        use Value::*;
        match (self, other) {
            (Bool(a), Bool(b)) => a.cmp(b),
            (Num(a), Num(b)) => a.cmp(b),
            (List(a), List(b)) => a.cmp(b),
            (Bool(_), _) => Ordering::Less,
            (_, Bool(_)) => Ordering::Greater,
            (Num(_), _) => Ordering::Less,
            (_, Num(_)) => Ordering::Greater,
        }
    }
}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Num(r) => write!(f, "{r}"),
            Value::List(items) => {
                write!(f, "<<")?;
                for (i, v) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, ">>")
            }
        }
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// The fixed variable set of one program, in declaration order, with the
/// optional finite domain attached to each variable.
#[derive(Debug)]
pub struct VarTable {
    names: Vec<String>,
    index: HashMap<String, usize>,
    domains: Vec<Option<Vec<Value>>>,
}

impl VarTable {
    pub fn new(names: Vec<String>, domains: Vec<Option<Vec<Value>>>) -> Arc<Self> {
        assert_eq!(names.len(), domains.len());
        let index = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i))
            .collect();
        Arc::new(VarTable {
            names,
            index,
            domains,
        })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn lookup(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn name(&self, idx: usize) -> &str {
        &self.names[idx]
    }

    pub fn domain(&self, idx: usize) -> Option<&[Value]> {
        self.domains[idx].as_deref()
    }

    /// True when every variable carries a declared finite domain.
    pub fn fully_declared(&self) -> bool {
        self.domains.iter().all(|d| d.is_some())
    }

    /// Number of states in the full product space, if all domains are declared.
    pub fn space_size(&self) -> Option<usize> {
        self.domains
            .iter()
            .map(|d| d.as_ref().map(|v| v.len()))
            .try_fold(1usize, |acc, n| n.and_then(|n| acc.checked_mul(n)))
    }
}

struct StateData {
    table: Arc<VarTable>,
    vals: Vec<Value>,
    hash: u64,
}

impl PartialEq for StateData {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.table, &other.table) && self.vals == other.vals
    }
}

impl Eq for StateData {}

impl Hash for StateData {
    fn hash<H: Hasher>(&self, h: &mut H) {
        h.write_u64(self.hash);
    }
}

static INTERNER: LazyLock<Mutex<HashSet<Arc<StateData>>>> =
    LazyLock::new(|| Mutex::new(HashSet::new()));

/// An interned program state. Clones are cheap; equality and hashing are O(1).
#[derive(Clone)]
pub struct State(Arc<StateData>);

impl State {
    /// Intern a state from its value vector (one entry per table variable).
    pub fn new(table: Arc<VarTable>, vals: Vec<Value>) -> State {
        assert_eq!(table.len(), vals.len(), "state arity mismatch");
        let mut hasher = std::collections::hash_map::DefaultHasher::new();
        (Arc::as_ptr(&table) as usize).hash(&mut hasher);
        vals.hash(&mut hasher);
        let data = Arc::new(StateData {
            table,
            vals,
            hash: hasher.finish(),
        });
        let mut set = INTERNER.lock().unwrap();
        match set.get(&data) {
            Some(existing) => State(Arc::clone(existing)),
            None => {
                set.insert(Arc::clone(&data));
                State(data)
            }
        }
    }

    pub fn table(&self) -> &Arc<VarTable> {
        &self.0.table
    }

    pub fn get(&self, idx: usize) -> &Value {
        &self.0.vals[idx]
    }

    pub fn get_named(&self, name: &str) -> Option<&Value> {
        self.0.table.lookup(name).map(|i| self.get(i))
    }

    pub fn vals(&self) -> &[Value] {
        &self.0.vals
    }

    /// Functional update: returns the interned state with `idx` set to `v`.
    pub fn update(&self, idx: usize, v: Value) -> State {
        if self.0.vals[idx] == v {
            return self.clone();
        }
        let mut vals = self.0.vals.clone();
        vals[idx] = v;
        State::new(Arc::clone(&self.0.table), vals)
    }
}

impl PartialEq for State {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

impl Eq for State {}

impl Hash for State {
    fn hash<H: Hasher>(&self, h: &mut H) {
        h.write_u64(self.0.hash);
    }
}

impl Ord for State {
    fn cmp(&self, other: &Self) -> Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            return Ordering::Equal;
        }
        // Canonical order: lexicographic on variable values. States from
        // different programs (distinct tables) with equal values must not
        // compare equal, or the ordering would disagree with `Eq`.
        self.0
            .vals
            .cmp(&other.0.vals)
            .then_with(|| {
                (Arc::as_ptr(&self.0.table) as usize).cmp(&(Arc::as_ptr(&other.0.table) as usize))
            })
    }
}

impl PartialOrd for State {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.vals.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}={}", self.0.table.name(i), v)?;
        }
        Ok(())
    }
}

impl fmt::Debug for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{self}}}")
    }
}

/// A proper state or the divergence marker.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Outcome {
    /// Divergence; sorts before every proper state.
    Bottom,
    Proper(State),
}

impl Outcome {
    pub fn proper(&self) -> Option<&State> {
        match self {
            Outcome::Bottom => None,
            Outcome::Proper(s) => Some(s),
        }
    }

    pub fn is_bottom(&self) -> bool {
        matches!(self, Outcome::Bottom)
    }
}

impl From<State> for Outcome {
    fn from(s: State) -> Self {
        Outcome::Proper(s)
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Bottom => write!(f, "bot"),
            Outcome::Proper(s) => write!(f, "{s}"),
        }
    }
}

impl fmt::Debug for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Enumerate every state in the declared product space of `table`.
///
/// Returns `None` when some variable has no declared domain or the space
/// exceeds `cap`.
pub fn enumerate_states(table: &Arc<VarTable>, cap: usize) -> Option<Vec<State>> {
    let size = table.space_size()?;
    if size > cap {
        return None;
    }
    let mut out = Vec::with_capacity(size);
    let mut current: Vec<Value> = Vec::with_capacity(table.len());
    fn rec(table: &Arc<VarTable>, idx: usize, current: &mut Vec<Value>, out: &mut Vec<State>) {
        if idx == table.len() {
            out.push(State::new(Arc::clone(table), current.clone()));
            return;
        }
        let dom = table.domain(idx).unwrap();
        for v in dom {
            current.push(v.clone());
            rec(table, idx + 1, current, out);
            current.pop();
        }
    }
    rec(table, 0, &mut current, &mut out);
    Some(out)
}
