use std::collections::BTreeSet;

use crate::ir::{builtin, Invoke, MethodBody, SemType, Stmt};

/// Exception types each statement may raise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThrowResult {
    explicit: Vec<BTreeSet<SemType>>,
    implicit: Vec<BTreeSet<SemType>>,
}

impl ThrowResult {
    /// Types thrown by `throw x` at `index`.
    pub fn explicit(&self, index: usize) -> &BTreeSet<SemType> {
        &self.explicit[index]
    }

    /// Types the runtime may raise at `index`.
    pub fn implicit(&self, index: usize) -> &BTreeSet<SemType> {
        &self.implicit[index]
    }

    pub fn len(&self) -> usize {
        self.explicit.len()
    }

    pub fn is_empty(&self) -> bool {
        self.explicit.is_empty()
    }
}

/// The fixed table of runtime exceptions by statement kind.
pub fn implicit_exceptions(stmt: &Stmt) -> Vec<SemType> {
    let name = match stmt {
        Stmt::Binary { op, .. } if op.is_division() => builtin::ARITHMETIC_EXCEPTION,
        Stmt::LoadArray { .. } | Stmt::StoreArray { .. } => builtin::INDEX_OUT_OF_BOUNDS,
        Stmt::Cast { .. } => builtin::CLASS_CAST_EXCEPTION,
        Stmt::LoadField { base: Some(_), .. }
        | Stmt::StoreField { base: Some(_), .. }
        | Stmt::Invoke(Invoke { base: Some(_), .. }) => builtin::NULL_POINTER_EXCEPTION,
        _ => return Vec::new(),
    };
    vec![SemType::class(name)]
}

/// Intraprocedural, type-based throw analysis: `throw x` raises the declared
/// type of `x`; implicit exceptions come from [`implicit_exceptions`].
pub fn throw_analysis(body: &MethodBody) -> ThrowResult {
    let explicit = body
        .stmts
        .iter()
        .map(|s| match s {
            Stmt::Throw { var } => BTreeSet::from([body.var_type(*var).clone()]),
            _ => BTreeSet::new(),
        })
        .collect();
    let implicit = body
        .stmts
        .iter()
        .map(|s| implicit_exceptions(s).into_iter().collect())
        .collect();
    ThrowResult { explicit, implicit }
}
