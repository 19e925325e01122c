use std::fmt::Debug;
use std::str::FromStr;

use super::heap::{ObjId, StmtRef};
use super::PtaError;
use crate::ir::{MethodId, SemType};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ContextElem {
    CallSite(StmtRef),
    Obj(ObjId),
    Type(SemType),
}

/// Context elements, oldest first. Empty means context-insensitive.
pub type Context = Vec<ContextElem>;

/// The receiver object of a dispatched call.
#[derive(Debug, Clone, Copy)]
pub struct Receiver<'a> {
    pub heap_context: &'a [ContextElem],
    pub obj: ObjId,
    /// Class that allocated the receiver.
    pub alloc_type: &'a SemType,
}

/// Chooses contexts for callees and for newly allocated objects.
pub trait ContextSelector: Debug + Send + Sync {
    fn k_method(&self) -> usize;

    fn k_heap(&self) -> usize;

    fn select_method_context(
        &self,
        caller: &[ContextElem],
        site: StmtRef,
        callee: MethodId,
        receiver: Option<Receiver<'_>>,
    ) -> Context;

    /// Last `k_heap` elements of the allocating method's context.
    fn select_heap_context(&self, method_context: &[ContextElem]) -> Context {
        last(method_context, self.k_heap())
    }
}

fn last(ctx: &[ContextElem], k: usize) -> Context {
    ctx[ctx.len().saturating_sub(k)..].to_vec()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sensitivity {
    Insensitive,
    CallSite,
    Object,
    Type,
}

/// The built-in selectors: insensitive, k-call-site, k-object, k-type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Selector {
    pub kind: Sensitivity,
    pub k: usize,
    pub heap_k: usize,
}

impl Selector {
    pub fn insensitive() -> Self {
        Selector { kind: Sensitivity::Insensitive, k: 0, heap_k: 0 }
    }

    /// Heap contexts default to one element shorter than method contexts.
    pub fn new(kind: Sensitivity, k: usize) -> Self {
        Selector { kind, k, heap_k: k.saturating_sub(1) }
    }

    pub fn with_heap(mut self, heap_k: usize) -> Self {
        self.heap_k = heap_k;
        self
    }
}

impl Default for Selector {
    fn default() -> Self {
        Selector::insensitive()
    }
}

impl FromStr for Selector {
    type Err = PtaError;

    /// `ci`, or `<k>-call`, `<k>-obj`, `<k>-type`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "ci" {
            return Ok(Selector::insensitive());
        }
        let bad = || PtaError::BadOption(format!("unknown context sensitivity `{s}`"));
        let (k, kind) = s.split_once('-').ok_or_else(bad)?;
        let k: usize = k.parse().map_err(|_| bad())?;
        let kind = match kind {
            "call" => Sensitivity::CallSite,
            "obj" => Sensitivity::Object,
            "type" => Sensitivity::Type,
            _ => return Err(bad()),
        };
        Ok(if k == 0 { Selector::insensitive() } else { Selector::new(kind, k) })
    }
}

impl ContextSelector for Selector {
    fn k_method(&self) -> usize {
        self.k
    }

    fn k_heap(&self) -> usize {
        match self.kind {
            Sensitivity::Insensitive => 0,
            _ => self.heap_k,
        }
    }

    fn select_method_context(
        &self,
        caller: &[ContextElem],
        site: StmtRef,
        _callee: MethodId,
        receiver: Option<Receiver<'_>>,
    ) -> Context {
        let mut ctx: Context = match (self.kind, receiver) {
            (Sensitivity::Insensitive, _) => return Context::new(),
            (Sensitivity::CallSite, _) => {
                let mut c = caller.to_vec();
                c.push(ContextElem::CallSite(site));
                c
            }
            // Static calls keep the caller's context.
            (_, None) => caller.to_vec(),
            (Sensitivity::Object, Some(r)) => {
                let mut c = r.heap_context.to_vec();
                c.push(ContextElem::Obj(r.obj));
                c
            }
            (Sensitivity::Type, Some(r)) => {
                let mut c = r.heap_context.to_vec();
                c.push(ContextElem::Type(r.alloc_type.clone()));
                c
            }
        };
        if ctx.len() > self.k {
            ctx = last(&ctx, self.k);
        }
        ctx
    }
}
