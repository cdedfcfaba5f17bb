//! Filter expressions over integer attributes: a small boolean language with
//! relational predicates, evaluated either row-at-a-time or columnwise over a
//! whole attribute block.
//!
//! Grammar (keywords case-insensitive, `NOT` binds tighter than `AND`, which
//! binds tighter than `OR`):
//!
//! ```text
//! expr  := or
//! or    := and ('OR' and)*
//! and   := unary ('AND' unary)*
//! unary := 'NOT' unary | '(' expr ')' | pred
//! pred  := 'a'<digits> ( op int
//!                      | 'BETWEEN' int 'AND' int
//!                      | 'IN' '(' int (',' int)* ')' )
//! op    := '=' | '!=' | '<' | '<=' | '>' | '>='
//! ```

mod codebook;
mod parse;

pub use codebook::{
    encode_attributes, quantile_edges, AttributeCodebook, Encoding, NamedEncoding, RawValue,
};
pub use parse::parse_filter;

use crate::bitmask::Bitmask;
use crate::{Error, Result};

/// Maximum expression tree depth. Chains of `AND`/`OR` at one level count as
/// a single n-ary node, so this only limits genuine nesting.
pub const MAX_DEPTH: usize = 64;

/// Relational comparison applied to one attribute.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PredOp {
    Eq(i64),
    Ne(i64),
    Lt(i64),
    Le(i64),
    Gt(i64),
    Ge(i64),
    /// Inclusive range; `lo <= hi` is enforced at parse time.
    Between(i64, i64),
    /// Non-empty membership list.
    In(Vec<i64>),
}

/// A single predicate leaf: one attribute compared against constants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Predicate {
    pub attr: usize,
    pub op: PredOp,
}

impl Predicate {
    #[inline]
    pub fn matches(&self, value: i64) -> bool {
        match &self.op {
            PredOp::Eq(x) => value == *x,
            PredOp::Ne(x) => value != *x,
            PredOp::Lt(x) => value < *x,
            PredOp::Le(x) => value <= *x,
            PredOp::Gt(x) => value > *x,
            PredOp::Ge(x) => value >= *x,
            PredOp::Between(lo, hi) => *lo <= value && value <= *hi,
            PredOp::In(xs) => xs.contains(&value),
        }
    }
}

/// A boolean expression tree over [`Predicate`] leaves. `And`/`Or` nodes are
/// n-ary with at least two children.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FilterExpr {
    Pred(Predicate),
    Not(Box<FilterExpr>),
    And(Vec<FilterExpr>),
    Or(Vec<FilterExpr>),
}

impl FilterExpr {
    /// Evaluate against one record's attributes.
    pub fn eval(&self, attrs: &[i64]) -> bool {
        match self {
            FilterExpr::Pred(p) => p.matches(attrs[p.attr]),
            FilterExpr::Not(inner) => !inner.eval(attrs),
            FilterExpr::And(children) => children.iter().all(|c| c.eval(attrs)),
            FilterExpr::Or(children) => children.iter().any(|c| c.eval(attrs)),
        }
    }

    /// Evaluate columnwise over a row-major `n x attr_count` block. Each
    /// predicate leaf makes one strided pass over its attribute column; the
    /// boolean structure combines the resulting masks wordwise. Bit `i` of
    /// the result equals `eval` on row `i`.
    pub fn eval_block(&self, block: &[i64], attr_count: usize) -> Bitmask {
        debug_assert!(attr_count > 0 && block.len() % attr_count == 0);
        let rows = block.len() / attr_count;
        self.block_mask(block, attr_count, rows)
    }

    fn block_mask(&self, block: &[i64], attr_count: usize, rows: usize) -> Bitmask {
        match self {
            FilterExpr::Pred(p) => {
                let mut mask = Bitmask::zeros(rows);
                let column = block[p.attr..].iter().step_by(attr_count);
                for (i, value) in column.enumerate() {
                    if p.matches(*value) {
                        mask.set(i);
                    }
                }
                mask
            }
            FilterExpr::Not(inner) => {
                let mut mask = inner.block_mask(block, attr_count, rows);
                mask.not_assign();
                mask
            }
            FilterExpr::And(children) => {
                let mut mask = children[0].block_mask(block, attr_count, rows);
                for child in &children[1..] {
                    mask.and_assign(&child.block_mask(block, attr_count, rows));
                }
                mask
            }
            FilterExpr::Or(children) => {
                let mut mask = children[0].block_mask(block, attr_count, rows);
                for child in &children[1..] {
                    mask.or_assign(&child.block_mask(block, attr_count, rows));
                }
                mask
            }
        }
    }

    /// Largest attribute index referenced anywhere in the tree.
    pub fn max_attr(&self) -> usize {
        match self {
            FilterExpr::Pred(p) => p.attr,
            FilterExpr::Not(inner) => inner.max_attr(),
            FilterExpr::And(children) | FilterExpr::Or(children) => {
                children.iter().map(|c| c.max_attr()).max().unwrap_or(0)
            }
        }
    }

    /// Check every referenced attribute index against the index's count.
    pub fn validate(&self, attr_count: usize) -> Result<()> {
        let max = self.max_attr();
        if max >= attr_count {
            return Err(Error::AttrOutOfRange {
                attr: max,
                attr_count,
            });
        }
        Ok(())
    }

    pub fn depth(&self) -> usize {
        match self {
            FilterExpr::Pred(_) => 1,
            FilterExpr::Not(inner) => 1 + inner.depth(),
            FilterExpr::And(children) | FilterExpr::Or(children) => {
                1 + children.iter().map(|c| c.depth()).max().unwrap_or(0)
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            FilterExpr::Or(_) => 1,
            FilterExpr::And(_) => 2,
            FilterExpr::Not(_) | FilterExpr::Pred(_) => 3,
        }
    }
}

/// Pretty-printer. The output reparses to a structurally identical tree:
/// children at the same or lower precedence than their parent are
/// parenthesized, so explicit grouping survives the round trip.
impl std::fmt::Display for FilterExpr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        fn write_child(
            f: &mut std::fmt::Formatter<'_>,
            parent_prec: u8,
            node: &FilterExpr,
        ) -> std::fmt::Result {
            if node.precedence() <= parent_prec {
                write!(f, "({node})")
            } else {
                write!(f, "{node}")
            }
        }

        match self {
            FilterExpr::Pred(p) => {
                let a = p.attr;
                match &p.op {
                    PredOp::Eq(x) => write!(f, "a{a} = {x}"),
                    PredOp::Ne(x) => write!(f, "a{a} != {x}"),
                    PredOp::Lt(x) => write!(f, "a{a} < {x}"),
                    PredOp::Le(x) => write!(f, "a{a} <= {x}"),
                    PredOp::Gt(x) => write!(f, "a{a} > {x}"),
                    PredOp::Ge(x) => write!(f, "a{a} >= {x}"),
                    PredOp::Between(lo, hi) => write!(f, "a{a} BETWEEN {lo} AND {hi}"),
                    PredOp::In(xs) => {
                        write!(f, "a{a} IN (")?;
                        for (i, x) in xs.iter().enumerate() {
                            if i > 0 {
                                write!(f, ", ")?;
                            }
                            write!(f, "{x}")?;
                        }
                        write!(f, ")")
                    }
                }
            }
            FilterExpr::Not(inner) => {
                write!(f, "NOT ")?;
                // NOT chains reparse bare; AND/OR children need grouping.
                write_child(f, 2, inner)
            }
            FilterExpr::And(children) => {
                for (i, c) in children.iter().enumerate() {
                    if i > 0 {
                        write!(f, " AND ")?;
                    }
                    write_child(f, 2, c)?;
                }
                Ok(())
            }
            FilterExpr::Or(children) => {
                for (i, c) in children.iter().enumerate() {
                    if i > 0 {
                        write!(f, " OR ")?;
                    }
                    write_child(f, 1, c)?;
                }
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pred(attr: usize, op: PredOp) -> FilterExpr {
        FilterExpr::Pred(Predicate { attr, op })
    }

    #[test]
    fn eval_examples() {
        let f = parse_filter("a0 >= 0 AND a1 < 0", 2).unwrap();
        assert!(f.eval(&[5, -3]));
        assert!(!f.eval(&[5, 3]));
        assert!(!f.eval(&[-1, -3]));
    }

    #[test]
    fn block_eval_trivial_cases() {
        let f = parse_filter("a0 >= 0", 1).unwrap();
        assert_eq!(f.eval_block(&[], 1).len(), 0);
        let all_true = parse_filter("a0 <= 9 OR a0 > 9", 1).unwrap();
        let mask = all_true.eval_block(&[1, 2, 3, 4], 1);
        assert_eq!(mask.count_ones(), 4);
    }

    fn arb_pred(attr_count: usize) -> impl Strategy<Value = FilterExpr> {
        let small = -8i64..8;
        (0..attr_count, 0u8..8, small.clone(), small).prop_map(|(attr, kind, x, y)| {
            let op = match kind {
                0 => PredOp::Eq(x),
                1 => PredOp::Ne(x),
                2 => PredOp::Lt(x),
                3 => PredOp::Le(x),
                4 => PredOp::Gt(x),
                5 => PredOp::Ge(x),
                6 => PredOp::Between(x.min(y), x.max(y)),
                _ => PredOp::In(vec![x, y]),
            };
            FilterExpr::Pred(Predicate { attr, op })
        })
    }

    fn arb_expr(attr_count: usize) -> impl Strategy<Value = FilterExpr> {
        arb_pred(attr_count).prop_recursive(6, 32, 3, |inner| {
            prop_oneof![
                inner.clone().prop_map(|e| FilterExpr::Not(Box::new(e))),
                prop::collection::vec(inner.clone(), 2..4).prop_map(FilterExpr::And),
                prop::collection::vec(inner, 2..4).prop_map(FilterExpr::Or),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_parse_roundtrip(expr in arb_expr(4)) {
            let printed = expr.to_string();
            let reparsed = parse_filter(&printed, 4).unwrap();
            prop_assert_eq!(&reparsed, &expr, "printed as {}", printed);
        }

        #[test]
        fn de_morgan_holds(p in arb_expr(3), q in arb_expr(3),
                           attrs in prop::collection::vec(-8i64..8, 3)) {
            let not_and = FilterExpr::Not(Box::new(FilterExpr::And(vec![p.clone(), q.clone()])));
            let or_nots = FilterExpr::Or(vec![
                FilterExpr::Not(Box::new(p)),
                FilterExpr::Not(Box::new(q)),
            ]);
            prop_assert_eq!(not_and.eval(&attrs), or_nots.eval(&attrs));
        }

        #[test]
        fn between_equals_ge_and_le(lo in -10i64..10, span in 0i64..10,
                                    attrs in prop::collection::vec(-16i64..16, 1)) {
            let hi = lo + span;
            let between = pred(0, PredOp::Between(lo, hi));
            let pair = FilterExpr::And(vec![pred(0, PredOp::Ge(lo)), pred(0, PredOp::Le(hi))]);
            prop_assert_eq!(between.eval(&attrs), pair.eval(&attrs));
        }

        #[test]
        fn block_matches_rowwise(expr in arb_expr(3),
                                 block in prop::collection::vec(-8i64..8, 0..60)) {
            let rows = block.len() / 3;
            let block = &block[..rows * 3];
            let mask = expr.eval_block(block, 3);
            prop_assert_eq!(mask.len(), rows);
            for (i, row) in block.chunks_exact(3).enumerate() {
                prop_assert_eq!(mask.get(i), expr.eval(row), "row {}", i);
            }
        }
    }
}
