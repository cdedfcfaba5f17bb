//! Tokenizer and recursive-descent parser for the filter language.

use super::{FilterExpr, PredOp, Predicate, MAX_DEPTH};
use crate::{Error, Result};

// Generous recursion guard for the parser itself; the tighter MAX_DEPTH
// check on the finished tree is what callers observe.
const MAX_PARSE_DEPTH: usize = 256;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    LParen,
    RParen,
    Comma,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Int(i64),
    Attr(usize),
    And,
    Or,
    Not,
    Between,
    In,
}

#[derive(Debug)]
struct Spanned {
    tok: Tok,
    offset: usize,
}

fn syntax(offset: usize, message: impl Into<String>) -> Error {
    Error::FilterSyntax {
        offset,
        message: message.into(),
    }
}

fn tokenize(text: &str) -> Result<Vec<Spanned>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let offset = i;
        match c {
            c if c.is_whitespace() => {
                i += 1;
            }
            '(' => {
                out.push(Spanned { tok: Tok::LParen, offset });
                i += 1;
            }
            ')' => {
                out.push(Spanned { tok: Tok::RParen, offset });
                i += 1;
            }
            ',' => {
                out.push(Spanned { tok: Tok::Comma, offset });
                i += 1;
            }
            '=' => {
                out.push(Spanned { tok: Tok::Eq, offset });
                i += 1;
            }
            '!' => {
                if chars.get(i + 1) == Some(&'=') {
                    out.push(Spanned { tok: Tok::Ne, offset });
                    i += 2;
                } else {
                    return Err(syntax(offset, "expected '=' after '!'"));
                }
            }
            '<' => {
                if chars.get(i + 1) == Some(&'=') {
                    out.push(Spanned { tok: Tok::Le, offset });
                    i += 2;
                } else {
                    out.push(Spanned { tok: Tok::Lt, offset });
                    i += 1;
                }
            }
            '>' => {
                if chars.get(i + 1) == Some(&'=') {
                    out.push(Spanned { tok: Tok::Ge, offset });
                    i += 2;
                } else {
                    out.push(Spanned { tok: Tok::Gt, offset });
                    i += 1;
                }
            }
            '-' | '0'..='9' => {
                let mut j = i + 1;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                let literal: String = chars[i..j].iter().collect();
                if literal == "-" {
                    return Err(syntax(offset, "expected digits after '-'"));
                }
                let value: i64 = literal
                    .parse()
                    .map_err(|_| syntax(offset, format!("integer {literal} out of range")))?;
                out.push(Spanned { tok: Tok::Int(value), offset });
                i = j;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut j = i + 1;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                let word: String = chars[i..j].iter().collect();
                let tok = match word.to_ascii_uppercase().as_str() {
                    "AND" => Tok::And,
                    "OR" => Tok::Or,
                    "NOT" => Tok::Not,
                    "BETWEEN" => Tok::Between,
                    "IN" => Tok::In,
                    _ => match parse_attr_ref(&word) {
                        Some(attr) => Tok::Attr(attr),
                        None => {
                            return Err(syntax(
                                offset,
                                format!("unexpected identifier {word:?} (attributes are a0, a1, ...)"),
                            ))
                        }
                    },
                };
                out.push(Spanned { tok, offset });
                i = j;
            }
            other => {
                return Err(syntax(offset, format!("unexpected character {other:?}")));
            }
        }
    }
    Ok(out)
}

fn parse_attr_ref(word: &str) -> Option<usize> {
    let rest = word.strip_prefix(['a', 'A'])?;
    if rest.is_empty() || !rest.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    rest.parse().ok()
}

struct Parser {
    tokens: Vec<Spanned>,
    pos: usize,
    attr_count: usize,
    end_offset: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|s| &s.tok)
    }

    fn offset(&self) -> usize {
        self.tokens
            .get(self.pos)
            .map(|s| s.offset)
            .unwrap_or(self.end_offset)
    }

    fn bump(&mut self) -> Option<Tok> {
        let tok = self.tokens.get(self.pos).map(|s| s.tok.clone());
        if tok.is_some() {
            self.pos += 1;
        }
        tok
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<()> {
        match self.peek() {
            Some(tok) if *tok == want => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(syntax(self.offset(), format!("expected {what}"))),
        }
    }

    fn expect_int(&mut self, what: &str) -> Result<i64> {
        match self.peek() {
            Some(Tok::Int(v)) => {
                let v = *v;
                self.pos += 1;
                Ok(v)
            }
            _ => Err(syntax(self.offset(), format!("expected {what}"))),
        }
    }

    fn guard(&self, depth: usize) -> Result<()> {
        if depth > MAX_PARSE_DEPTH {
            return Err(syntax(self.offset(), "expression too deeply nested"));
        }
        Ok(())
    }

    fn expr(&mut self, depth: usize) -> Result<FilterExpr> {
        self.guard(depth)?;
        let mut children = vec![self.and(depth + 1)?];
        while self.peek() == Some(&Tok::Or) {
            self.pos += 1;
            children.push(self.and(depth + 1)?);
        }
        Ok(if children.len() == 1 {
            children.pop().unwrap()
        } else {
            FilterExpr::Or(children)
        })
    }

    fn and(&mut self, depth: usize) -> Result<FilterExpr> {
        self.guard(depth)?;
        let mut children = vec![self.unary(depth + 1)?];
        while self.peek() == Some(&Tok::And) {
            self.pos += 1;
            children.push(self.unary(depth + 1)?);
        }
        Ok(if children.len() == 1 {
            children.pop().unwrap()
        } else {
            FilterExpr::And(children)
        })
    }

    fn unary(&mut self, depth: usize) -> Result<FilterExpr> {
        self.guard(depth)?;
        match self.peek() {
            Some(Tok::Not) => {
                self.pos += 1;
                Ok(FilterExpr::Not(Box::new(self.unary(depth + 1)?)))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.expr(depth + 1)?;
                self.expect(Tok::RParen, "')'")?;
                Ok(inner)
            }
            Some(Tok::Attr(_)) => self.pred(),
            _ => Err(syntax(
                self.offset(),
                "expected a predicate, 'NOT', or '('",
            )),
        }
    }

    fn pred(&mut self) -> Result<FilterExpr> {
        let attr = match self.bump() {
            Some(Tok::Attr(a)) => a,
            _ => unreachable!("pred called without attribute lookahead"),
        };
        if attr >= self.attr_count {
            return Err(Error::AttrOutOfRange {
                attr,
                attr_count: self.attr_count,
            });
        }
        let op_offset = self.offset();
        let op = match self.bump() {
            Some(Tok::Eq) => PredOp::Eq(self.expect_int("an integer")?),
            Some(Tok::Ne) => PredOp::Ne(self.expect_int("an integer")?),
            Some(Tok::Lt) => PredOp::Lt(self.expect_int("an integer")?),
            Some(Tok::Le) => PredOp::Le(self.expect_int("an integer")?),
            Some(Tok::Gt) => PredOp::Gt(self.expect_int("an integer")?),
            Some(Tok::Ge) => PredOp::Ge(self.expect_int("an integer")?),
            Some(Tok::Between) => {
                let lo = self.expect_int("the lower BETWEEN bound")?;
                self.expect(Tok::And, "'AND' between the BETWEEN bounds")?;
                let hi = self.expect_int("the upper BETWEEN bound")?;
                if lo > hi {
                    return Err(syntax(
                        op_offset,
                        format!("BETWEEN bounds out of order ({lo} > {hi})"),
                    ));
                }
                PredOp::Between(lo, hi)
            }
            Some(Tok::In) => {
                self.expect(Tok::LParen, "'(' after IN")?;
                let mut values = vec![self.expect_int("an integer")?];
                while self.peek() == Some(&Tok::Comma) {
                    self.pos += 1;
                    values.push(self.expect_int("an integer")?);
                }
                self.expect(Tok::RParen, "')' closing the IN list")?;
                PredOp::In(values)
            }
            _ => {
                return Err(syntax(
                    op_offset,
                    format!("expected a comparison operator after a{attr}"),
                ))
            }
        };
        Ok(FilterExpr::Pred(Predicate { attr, op }))
    }
}

/// Parse a filter expression, validating every attribute reference against
/// `attr_count`. Syntax errors carry the character offset they occurred at.
pub fn parse_filter(text: &str, attr_count: usize) -> Result<FilterExpr> {
    let tokens = tokenize(text)?;
    if tokens.is_empty() {
        return Err(syntax(0, "empty filter expression"));
    }
    let end_offset = text.chars().count();
    let mut parser = Parser {
        tokens,
        pos: 0,
        attr_count,
        end_offset,
    };
    let expr = parser.expr(0)?;
    if parser.pos != parser.tokens.len() {
        return Err(syntax(parser.offset(), "unexpected trailing input"));
    }
    if expr.depth() > MAX_DEPTH {
        return Err(syntax(
            0,
            format!("filter tree depth exceeds the maximum of {MAX_DEPTH}"),
        ));
    }
    Ok(expr)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pred(attr: usize, op: PredOp) -> FilterExpr {
        FilterExpr::Pred(Predicate { attr, op })
    }

    #[test]
    fn parses_and_of_predicates() {
        let expr = parse_filter("a0 >= 10 AND a1 = 5", 2).unwrap();
        assert_eq!(
            expr,
            FilterExpr::And(vec![pred(0, PredOp::Ge(10)), pred(1, PredOp::Eq(5))])
        );
    }

    #[test]
    fn or_binds_loosest() {
        let expr = parse_filter("NOT a2 IN (1,2) OR a0 BETWEEN -3 AND 3", 3).unwrap();
        assert_eq!(
            expr,
            FilterExpr::Or(vec![
                FilterExpr::Not(Box::new(pred(2, PredOp::In(vec![1, 2])))),
                pred(0, PredOp::Between(-3, 3)),
            ])
        );
    }

    #[test]
    fn attr_out_of_range_is_validation_error() {
        match parse_filter("a7 = 1", 4) {
            Err(Error::AttrOutOfRange { attr: 7, attr_count: 4 }) => {}
            other => panic!("expected AttrOutOfRange, got {other:?}"),
        }
    }

    #[test]
    fn keywords_are_case_insensitive() {
        let a = parse_filter("a0 = 1 and not a1 = 2 or a0 in (3)", 2).unwrap();
        let b = parse_filter("a0 = 1 AND NOT a1 = 2 OR A0 IN (3)", 2).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        match parse_filter("a9 =", 16) {
            Err(Error::FilterSyntax { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("expected syntax error, got {other:?}"),
        }
        match parse_filter("a0 = 1 $$", 2) {
            Err(Error::FilterSyntax { offset, .. }) => assert_eq!(offset, 7),
            other => panic!("expected syntax error, got {other:?}"),
        }
        assert!(parse_filter("", 2).is_err());
        assert!(parse_filter("   ", 2).is_err());
    }

    #[test]
    fn between_bounds_must_be_ordered() {
        assert!(parse_filter("a0 BETWEEN 3 AND -3", 1).is_err());
        assert!(parse_filter("a0 BETWEEN -3 AND 3", 1).is_ok());
        assert!(parse_filter("a0 BETWEEN 5 AND 5", 1).is_ok());
    }

    #[test]
    fn in_list_requires_values() {
        assert!(parse_filter("a0 IN ()", 1).is_err());
        assert!(parse_filter("a0 IN (1,)", 1).is_err());
    }

    #[test]
    fn depth_limit_enforced() {
        let shallow = format!("{}a0 = 1", "NOT ".repeat(63));
        assert!(parse_filter(&shallow, 1).is_ok());
        let deep = format!("{}a0 = 1", "NOT ".repeat(64));
        assert!(parse_filter(&deep, 1).is_err());
        // Parentheses group without adding tree depth.
        let grouped = format!("{}a0 = 1{}", "(".repeat(100), ")".repeat(100));
        assert!(parse_filter(&grouped, 1).is_ok());
    }

    #[test]
    fn parens_override_precedence() {
        let flat = parse_filter("a0 = 1 AND a1 = 2 OR a2 = 3", 3).unwrap();
        let grouped = parse_filter("a0 = 1 AND (a1 = 2 OR a2 = 3)", 3).unwrap();
        assert_ne!(flat, grouped);
        assert_eq!(
            grouped,
            FilterExpr::And(vec![
                pred(0, PredOp::Eq(1)),
                FilterExpr::Or(vec![pred(1, PredOp::Eq(2)), pred(2, PredOp::Eq(3))]),
            ])
        );
    }
}
