//! Runtime values, their canonical total order, and variable states.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};

use serde_json::Value as Json;

use crate::ast::Name;

/// A closed runtime value.
///
/// Values are totally ordered: unit < bool < int < real < pair, with
/// `false < true`, reals by IEEE total order and pairs lexicographically.
/// Equality agrees with that order, so `-0.0` and `0.0` are distinct keys.
#[derive(Clone, Debug)]
pub enum CanonValue {
    Unit,
    Bool(bool),
    Int(i64),
    Real(f64),
    Pair(Box<CanonValue>, Box<CanonValue>),
}

impl CanonValue {
    pub fn pair(a: CanonValue, b: CanonValue) -> Self {
        CanonValue::Pair(Box::new(a), Box::new(b))
    }

    /// Right-nested tuple: `[]` is unit, `[a]` is `a`, `[a, b, c]` is `(a, (b, c))`.
    pub fn tuple(items: Vec<CanonValue>) -> Self {
        let mut it = items.into_iter().rev();
        match it.next() {
            None => CanonValue::Unit,
            Some(last) => it.fold(last, |acc, v| CanonValue::pair(v, acc)),
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            CanonValue::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            CanonValue::Int(i) => Some(*i),
            _ => None,
        }
    }

    pub fn as_real(&self) -> Option<f64> {
        match self {
            CanonValue::Real(r) => Some(*r),
            _ => None,
        }
    }

    pub fn fst(&self) -> Option<&CanonValue> {
        match self {
            CanonValue::Pair(a, _) => Some(a),
            _ => None,
        }
    }

    pub fn snd(&self) -> Option<&CanonValue> {
        match self {
            CanonValue::Pair(_, b) => Some(b),
            _ => None,
        }
    }

    /// Whether this is the zero element of its base type (`true`, `0`, `0.0`).
    pub fn is_zero(&self) -> bool {
        match self {
            CanonValue::Bool(b) => *b,
            CanonValue::Int(i) => *i == 0,
            CanonValue::Real(r) => *r == 0.0,
            CanonValue::Unit => true,
            CanonValue::Pair(a, b) => a.is_zero() && b.is_zero(),
        }
    }

    fn rank(&self) -> u8 {
        match self {
            CanonValue::Unit => 0,
            CanonValue::Bool(_) => 1,
            CanonValue::Int(_) => 2,
            CanonValue::Real(_) => 3,
            CanonValue::Pair(..) => 4,
        }
    }

    /// Canonical JSON: unit is `null`, pairs are two-element arrays.
    pub fn to_json(&self) -> Json {
        match self {
            CanonValue::Unit => Json::Null,
            CanonValue::Bool(b) => Json::Bool(*b),
            CanonValue::Int(i) => Json::from(*i),
            CanonValue::Real(r) => serde_json::Number::from_f64(*r)
                .map(Json::Number)
                .unwrap_or_else(|| Json::String(format!("{r}"))),
            CanonValue::Pair(a, b) => Json::Array(vec![a.to_json(), b.to_json()]),
        }
    }

    /// Scalar leaves with their projection paths, e.g. `("2.1", v)` for `v.2.1`.
    pub fn leaves(&self) -> Vec<(String, &CanonValue)> {
        fn go<'a>(v: &'a CanonValue, path: &mut Vec<char>, out: &mut Vec<(String, &'a CanonValue)>) {
            match v {
                CanonValue::Pair(a, b) => {
                    path.push('1');
                    go(a, path, out);
                    path.pop();
                    path.push('2');
                    go(b, path, out);
                    path.pop();
                }
                _ => {
                    let p: Vec<String> = path.iter().map(|c| c.to_string()).collect();
                    out.push((p.join("."), v));
                }
            }
        }
        let mut out = Vec::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }
}

impl Ord for CanonValue {
    fn cmp(&self, other: &Self) -> Ordering {
        use CanonValue::*;
        match (self, other) {
            (Unit, Unit) => Ordering::Equal,
            (Bool(a), Bool(b)) => a.cmp(b),
            (Int(a), Int(b)) => a.cmp(b),
            (Real(a), Real(b)) => a.total_cmp(b),
            (Pair(a1, b1), Pair(a2, b2)) => a1.cmp(a2).then_with(|| b1.cmp(b2)),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl PartialOrd for CanonValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for CanonValue {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for CanonValue {}

impl Hash for CanonValue {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.rank().hash(state);
        match self {
            CanonValue::Unit => {}
            CanonValue::Bool(b) => b.hash(state),
            CanonValue::Int(i) => i.hash(state),
            CanonValue::Real(r) => r.to_bits().hash(state),
            CanonValue::Pair(a, b) => {
                a.hash(state);
                b.hash(state);
            }
        }
    }
}

impl fmt::Display for CanonValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CanonValue::Unit => write!(f, "()"),
            CanonValue::Bool(b) => write!(f, "{b}"),
            CanonValue::Int(i) => write!(f, "{i}"),
            CanonValue::Real(r) => write!(f, "{r:?}"),
            CanonValue::Pair(a, b) => write!(f, "({a}, {b})"),
        }
    }
}

impl serde::Serialize for CanonValue {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

/// A finite map from variables (or locations) to values.
///
/// Two states are equal iff they bind the same keys to equal values; the
/// derived order is lexicographic over the sorted bindings.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct State<K: Ord = Name>(BTreeMap<K, CanonValue>);

impl<K: Ord + Clone> State<K> {
    pub fn empty() -> Self {
        State(BTreeMap::new())
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (K, CanonValue)>) -> Self {
        State(pairs.into_iter().collect())
    }

    /// `add x c s`: extend `s`, or return it unchanged when `x` is already bound.
    pub fn add(&self, key: K, value: CanonValue) -> Self {
        let mut next = self.clone();
        next.0.entry(key).or_insert(value);
        next
    }

    /// `lookup x s`: the bound value, or unit when `x` is unbound.
    pub fn lookup(&self, key: &K) -> CanonValue {
        self.0.get(key).cloned().unwrap_or(CanonValue::Unit)
    }

    pub fn get(&self, key: &K) -> Option<&CanonValue> {
        self.0.get(key)
    }

    pub fn contains(&self, key: &K) -> bool {
        self.0.contains_key(key)
    }

    /// `drop X s`: remove every key in `keys`.
    pub fn drop_keys<'a>(&self, keys: impl IntoIterator<Item = &'a K>) -> Self
    where
        K: 'a,
    {
        let mut next = self.clone();
        for k in keys {
            next.0.remove(k);
        }
        next
    }

    pub fn insert(&mut self, key: K, value: CanonValue) {
        self.0.insert(key, value);
    }

    pub fn remove(&mut self, key: &K) -> Option<CanonValue> {
        self.0.remove(key)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, &CanonValue)> {
        self.0.iter()
    }

    pub fn keys(&self) -> impl Iterator<Item = &K> {
        self.0.keys()
    }

    /// The state as the tuple `((), (v1, (..., vn)))` in the given key order.
    pub fn encode(&self, order: &[K]) -> CanonValue {
        let mut items = vec![CanonValue::Unit];
        items.extend(order.iter().map(|k| self.lookup(k)));
        CanonValue::tuple(items)
    }
}

impl<K: Ord + fmt::Display> fmt::Display for State<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{k} = {v}")?;
        }
        write!(f, "}}")
    }
}
