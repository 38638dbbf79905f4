use crate::imp::syntax::{Block, ImpType, Loc, Stmt};

/// Pull every `local` to the front: the result is a single top-level
/// `local` around a body whose only remaining locals open if-branches.
pub fn hoist_locals(c: &Block) -> Block {
    let (ls, body) = hoist(c);
    if ls.is_empty() {
        body
    } else {
        Block::one(Stmt::Local(ls, body))
    }
}

fn hoist(c: &Block) -> (Vec<(Loc, ImpType)>, Block) {
    let mut locals = Vec::new();
    let mut body = Block::nil();
    for s in &c.0 {
        match s {
            Stmt::Local(ls, inner) => {
                let (more, inner) = hoist(inner);
                locals.extend(ls.iter().copied());
                locals.extend(more);
                body.append(inner);
            }
            Stmt::If(l, a, b) => body.push(Stmt::If(*l, hoist_locals(a), hoist_locals(b))),
            other => body.push(other.clone()),
        }
    }
    (locals, body)
}
