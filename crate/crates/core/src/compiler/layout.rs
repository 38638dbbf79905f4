use std::collections::BTreeMap;

use crate::ast::Name;
use crate::compiler::Pattern;
use crate::imp::{ImpState, ImpType, Loc};
use crate::typesys::TypeEnv;
use crate::value::{CanonValue, State};
use crate::Result;

/// `ρ`: where each Fun variable lives.
pub type Layout = BTreeMap<Name, Pattern>;

/// Bind a pattern-to-value mapping down to base-valued locations.
pub fn flatten(bindings: &[(Pattern, CanonValue)]) -> Result<ImpState> {
    let mut out = Vec::new();
    for (p, v) in bindings {
        p.flatten(v, &mut out)?;
    }
    Ok(State::from_pairs(out))
}

/// `lift ρ s`.
pub fn lift(rho: &Layout, s: &State) -> Result<ImpState> {
    let bindings: Vec<(Pattern, CanonValue)> = rho.iter().map(|(x, p)| (p.clone(), s.lookup(x))).collect();
    flatten(&bindings)
}

/// `restrict ρ s`.
pub fn restrict(rho: &Layout, s: &ImpState) -> State {
    State::from_pairs(rho.iter().map(|(x, p)| (x.clone(), p.read(s))))
}

/// `Σ ⊢ ρ : Γ`: the layout covers exactly `Σ` and each pattern has its variable's type.
pub fn check_layout(rho: &Layout, sigma: &[(Loc, ImpType)], gamma: &TypeEnv) -> bool {
    let mut locs: Vec<Loc> = rho.values().flat_map(|p| p.locs()).collect();
    locs.sort();
    let mut dom: Vec<Loc> = sigma.iter().map(|(l, _)| *l).collect();
    dom.sort();
    locs == dom
        && gamma.len() == rho.len()
        && gamma.iter().all(|(x, t)| rho.get(x).is_some_and(|p| p.has_type(sigma, t)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::name;
    use crate::value::CanonValue::*;

    #[test]
    fn lift_flattens_pairs_and_skips_unit() {
        let mut rho = Layout::new();
        rho.insert(name("x"), Pattern::pair(Pattern::Loc(Loc::new(1)), Pattern::Loc(Loc::new(2))));
        rho.insert(name("u"), Pattern::Unit);
        let s = State::from_pairs([(name("x"), CanonValue::pair(Int(1), Int(2))), (name("u"), Unit)]);
        let lifted = lift(&rho, &s).unwrap();
        assert_eq!(lifted, State::from_pairs([(Loc::new(1), Int(1)), (Loc::new(2), Int(2))]));
        assert_eq!(restrict(&rho, &lifted), s);
    }
}
