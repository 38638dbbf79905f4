use std::fmt;

use serde::{Serialize, Serializer};

use crate::ast::{BinOp, Name};
use crate::value::CanonValue;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BaseType {
    Bool,
    Int,
    Real,
}

impl BaseType {
    /// The zero element `0_b` that an observation must hit.
    pub fn zero(self) -> CanonValue {
        match self {
            BaseType::Bool => CanonValue::Bool(true),
            BaseType::Int => CanonValue::Int(0),
            BaseType::Real => CanonValue::Real(0.0),
        }
    }

    pub fn of_value(v: &CanonValue) -> Option<BaseType> {
        match v {
            CanonValue::Bool(_) => Some(BaseType::Bool),
            CanonValue::Int(_) => Some(BaseType::Int),
            CanonValue::Real(_) => Some(BaseType::Real),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BaseType::Bool => "bool",
            BaseType::Int => "int",
            BaseType::Real => "real",
        }
    }
}

impl fmt::Display for BaseType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A range of array indices. Ranges come from literal lengths, so two
/// ranges are the same exactly when their sizes agree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct RangeId {
    pub size: usize,
}

impl fmt::Display for RangeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}", self.size)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Type {
    Unit,
    Base(BaseType),
    Pair(Box<Type>, Box<Type>),
    Array(Box<Type>, RangeId),
}

impl Type {
    pub const BOOL: Type = Type::Base(BaseType::Bool);
    pub const INT: Type = Type::Base(BaseType::Int);
    pub const REAL: Type = Type::Base(BaseType::Real);

    pub fn pair(a: Type, b: Type) -> Type {
        Type::Pair(Box::new(a), Box::new(b))
    }

    pub fn tuple(items: Vec<Type>) -> Type {
        let mut it = items.into_iter().rev();
        match it.next() {
            None => Type::Unit,
            Some(last) => it.fold(last, |acc, t| Type::pair(t, acc)),
        }
    }

    pub fn as_base(&self) -> Option<BaseType> {
        match self {
            Type::Base(b) => Some(*b),
            _ => None,
        }
    }

    pub fn has_real(&self) -> bool {
        match self {
            Type::Unit => false,
            Type::Base(b) => *b == BaseType::Real,
            Type::Pair(a, b) => a.has_real() || b.has_real(),
            Type::Array(t, _) => t.has_real(),
        }
    }

    pub fn has_array(&self) -> bool {
        match self {
            Type::Unit | Type::Base(_) => false,
            Type::Pair(a, b) => a.has_array() || b.has_array(),
            Type::Array(..) => true,
        }
    }

    /// The tuple encoding `t^|r|` of every array type inside this type.
    pub fn unrolled(&self) -> Type {
        match self {
            Type::Unit | Type::Base(_) => self.clone(),
            Type::Pair(a, b) => Type::pair(a.unrolled(), b.unrolled()),
            Type::Array(t, r) => Type::tuple(vec![t.unrolled(); r.size]),
        }
    }

    /// Whether `v` is a well-formed value of this (array-free) type.
    pub fn admits(&self, v: &CanonValue) -> bool {
        match (self, v) {
            (Type::Unit, CanonValue::Unit) => true,
            (Type::Base(b), v) => BaseType::of_value(v) == Some(*b),
            (Type::Pair(a, b), CanonValue::Pair(x, y)) => a.admits(x) && b.admits(y),
            (Type::Array(..), v) => self.unrolled().admits(v),
            _ => false,
        }
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Unit => f.write_str("unit"),
            Type::Base(b) => write!(f, "{b}"),
            Type::Pair(a, b) => {
                if matches!(**a, Type::Pair(..)) {
                    write!(f, "({a}) * {b}")
                } else {
                    write!(f, "{a} * {b}")
                }
            }
            Type::Array(t, r) => {
                if matches!(**t, Type::Pair(..)) {
                    write!(f, "({t})[{r}]")
                } else {
                    write!(f, "{t}[{r}]")
                }
            }
        }
    }
}

impl Serialize for Type {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// The typed operator table: `(left, right, result)` for each signature.
pub fn op_signatures(op: BinOp) -> &'static [(BaseType, BaseType, BaseType)] {
    use BaseType::*;
    match op {
        BinOp::And | BinOp::Or => &[(Bool, Bool, Bool)],
        BinOp::Eq => &[(Bool, Bool, Bool), (Int, Int, Bool)],
        BinOp::Gt => &[(Int, Int, Bool), (Real, Real, Bool)],
        BinOp::Add | BinOp::Sub | BinOp::Mul => &[(Int, Int, Int), (Real, Real, Real)],
        BinOp::Mod => &[(Int, Int, Int)],
        BinOp::ObsEq => &[],
    }
}

pub fn op_result(op: BinOp, a: BaseType, b: BaseType) -> Option<BaseType> {
    op_signatures(op)
        .iter()
        .find(|(x, y, _)| *x == a && *y == b)
        .map(|(_, _, r)| *r)
}

/// A typing environment; later bindings shadow earlier ones.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TypeEnv(Vec<(Name, Type)>);

impl TypeEnv {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Name, Type)>) -> Self {
        TypeEnv(pairs.into_iter().collect())
    }

    pub fn lookup(&self, x: &str) -> Option<&Type> {
        self.0.iter().rev().find(|(y, _)| &**y == x).map(|(_, t)| t)
    }

    pub fn contains(&self, x: &str) -> bool {
        self.lookup(x).is_some()
    }

    pub fn push(&mut self, x: Name, t: Type) {
        self.0.push((x, t));
    }

    pub fn pop(&mut self) {
        self.0.pop();
    }

    pub fn iter(&self) -> impl Iterator<Item = &(Name, Type)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_nests_pairs_to_the_right() {
        let t = Type::tuple(vec![Type::BOOL, Type::INT, Type::REAL]);
        assert_eq!(t.to_string(), "bool * int * real");
        let l = Type::pair(Type::pair(Type::BOOL, Type::INT), Type::Unit);
        assert_eq!(l.to_string(), "(bool * int) * unit");
        let a = Type::Array(Box::new(Type::pair(Type::REAL, Type::BOOL)), RangeId { size: 3 });
        assert_eq!(a.to_string(), "(real * bool)[r3]");
    }

    #[test]
    fn unrolled_array_is_right_nested_tuple() {
        let a = Type::Array(Box::new(Type::INT), RangeId { size: 3 });
        assert_eq!(a.unrolled(), Type::tuple(vec![Type::INT, Type::INT, Type::INT]));
        let one = Type::Array(Box::new(Type::INT), RangeId { size: 1 });
        assert_eq!(one.unrolled(), Type::INT);
    }

    #[test]
    fn operator_table_has_no_real_equality_or_less_than() {
        assert_eq!(op_result(BinOp::Eq, BaseType::Real, BaseType::Real), None);
        assert_eq!(op_result(BinOp::Gt, BaseType::Real, BaseType::Real), Some(BaseType::Bool));
        assert_eq!(op_result(BinOp::Mod, BaseType::Real, BaseType::Real), None);
        assert_eq!(op_result(BinOp::Eq, BaseType::Int, BaseType::Int), Some(BaseType::Bool));
    }
}
