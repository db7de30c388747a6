use std::collections::HashMap;

use super::lexer::{tokenize, Token, TokenKind};
use super::{ParseError, ParseErrorCode, SourceSpan};
use crate::model::{
    ChildGroup, ConstraintKind, CrossTreeConstraint, Feature, FeatureId, FeatureModel, GroupKind,
    RESERVED_WORDS,
};

const MAX_DEPTH: usize = 200;

pub(crate) fn parse(source: &str) -> Result<FeatureModel, Vec<ParseError>> {
    let (tokens, lex_errors) = tokenize(source);
    let mut p = Parser {
        tokens,
        pos: 0,
        errors: lex_errors,
        feature_spans: HashMap::new(),
        constraint_spans: Vec::new(),
    };
    let model = p.model_file();
    let mut errors = p.errors;
    if let Some(model) = &model {
        semantic_checks(model, &p.feature_spans, &p.constraint_spans, &mut errors);
    }
    errors.sort_by_key(|e| (e.span.line, e.span.column));
    match model {
        Some(m) if errors.is_empty() => Ok(m),
        _ => Err(errors),
    }
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    errors: Vec<ParseError>,
    /// First declaration span of every feature, plus later duplicates.
    feature_spans: HashMap<FeatureId, Vec<SourceSpan>>,
    constraint_spans: Vec<(SourceSpan, SourceSpan)>,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if t.kind != TokenKind::Eof {
            self.pos += 1;
        }
        t
    }

    fn at_word(&self, word: &str) -> bool {
        let t = self.peek();
        t.kind == TokenKind::Ident && t.text == word
    }

    fn error(&mut self, span: SourceSpan, expected: impl Into<String>, found: String) {
        self.errors.push(ParseError {
            span,
            code: ParseErrorCode::Syntax,
            expected: expected.into(),
            found,
        });
    }

    fn unexpected(&mut self, expected: &str) {
        let t = self.peek().clone();
        self.error(t.span, expected, t.describe());
    }

    fn is_group_keyword(t: &Token) -> bool {
        match t.kind {
            TokenKind::OptionalKind => true,
            TokenKind::Ident => GroupKind::from_keyword(&t.text).is_some(),
            _ => false,
        }
    }

    /// Skips a balanced `{ ... }` block starting at the current token.
    fn skip_block(&mut self) {
        if self.peek().kind != TokenKind::LBrace {
            return;
        }
        let mut depth = 0usize;
        loop {
            match self.bump().kind {
                TokenKind::LBrace => depth += 1,
                TokenKind::RBrace => {
                    depth -= 1;
                    if depth == 0 {
                        return;
                    }
                }
                TokenKind::Eof => return,
                _ => {}
            }
        }
    }

    fn identifier(&mut self, what: &str) -> Option<Token> {
        let t = self.peek().clone();
        if t.kind == TokenKind::Ident && !RESERVED_WORDS.contains(&t.text.as_str()) {
            self.bump();
            Some(t)
        } else {
            let found = if t.kind == TokenKind::Ident {
                format!("keyword `{}`", t.text)
            } else {
                t.describe()
            };
            self.error(t.span, what, found);
            None
        }
    }

    fn model_file(&mut self) -> Option<FeatureModel> {
        if self.at_word("model") {
            self.bump();
        } else {
            self.unexpected("`model`");
            // Resynchronise on the root feature declaration.
            while !self.at_word("feature") && self.peek().kind != TokenKind::Eof {
                self.bump();
            }
        }
        let name = if self.at_word("feature") {
            self.error(self.peek().span, "model name", "`feature`".to_string());
            None
        } else {
            self.identifier("model name").map(|t| t.text)
        };
        if !self.at_word("feature") {
            self.unexpected("`feature`");
            while !self.at_word("feature") && self.peek().kind != TokenKind::Eof {
                self.bump();
            }
            if self.peek().kind == TokenKind::Eof {
                return None;
            }
        }
        self.bump();
        let root = self.feature_after_keyword(0);
        let mut constraints = Vec::new();
        loop {
            if self.peek().kind == TokenKind::Eof {
                break;
            }
            if self.at_word("constraints") && constraints.is_empty() {
                self.bump();
                self.constraints(&mut constraints);
                continue;
            }
            self.unexpected(if constraints.is_empty() {
                "`constraints` or end of input"
            } else {
                "end of input"
            });
            self.bump();
            self.skip_block();
        }
        Some(FeatureModel {
            name: name.unwrap_or_default(),
            root: root?,
            constraints,
        })
    }

    /// `IDENT ( "{" group* "}" )?`, with the `feature` keyword already consumed
    /// (or omitted, for nested features).
    fn feature_after_keyword(&mut self, depth: usize) -> Option<Feature> {
        let tok = self.identifier("feature identifier")?;
        let id = FeatureId::new(&tok.text);
        self.feature_spans
            .entry(id.clone())
            .or_default()
            .push(tok.span);
        let mut feature = Feature::leaf(id);
        if self.peek().kind != TokenKind::LBrace {
            return Some(feature);
        }
        if depth >= MAX_DEPTH {
            self.error(
                self.peek().span,
                format!("at most {MAX_DEPTH} nesting levels"),
                "deeper nesting".to_string(),
            );
            self.skip_block();
            return Some(feature);
        }
        self.bump();
        loop {
            let t = self.peek().clone();
            match t.kind {
                TokenKind::RBrace => {
                    self.bump();
                    break;
                }
                TokenKind::Eof => {
                    self.error(t.span, "`}`", t.describe());
                    break;
                }
                _ if Self::is_group_keyword(&t) => {
                    let g = self.group(depth);
                    feature.groups.push(g);
                }
                _ => {
                    self.error(t.span, "group kind or `}`", t.describe());
                    self.bump();
                    self.skip_block();
                }
            }
        }
        Some(feature)
    }

    /// Arity is only reported for groups whose body parsed cleanly.
    fn group(&mut self, depth: usize) -> ChildGroup {
        let kw = self.bump();
        let kind = GroupKind::from_keyword(&kw.text).expect("caller checked keyword");
        let mut group = ChildGroup {
            kind,
            children: Vec::new(),
        };
        let errors_before = self.errors.len();
        if self.peek().kind != TokenKind::LBrace {
            self.unexpected("`{`");
            return group;
        }
        self.bump();
        loop {
            let t = self.peek().clone();
            match t.kind {
                TokenKind::RBrace => {
                    self.bump();
                    break;
                }
                TokenKind::Eof => {
                    self.error(t.span, "`}`", t.describe());
                    break;
                }
                TokenKind::Ident if !RESERVED_WORDS.contains(&t.text.as_str()) => {
                    if let Some(child) = self.feature_after_keyword(depth + 1) {
                        group.children.push(child);
                    }
                }
                TokenKind::Ident if t.text == "feature" => {
                    self.bump();
                    if let Some(child) = self.feature_after_keyword(depth + 1) {
                        group.children.push(child);
                    }
                }
                _ => {
                    let found = if t.kind == TokenKind::Ident {
                        format!("keyword `{}`", t.text)
                    } else {
                        t.describe()
                    };
                    self.error(t.span, "feature identifier or `}`", found);
                    self.bump();
                    self.skip_block();
                }
            }
        }
        let damaged = self.errors.len() > errors_before;
        if !damaged && group.children.len() < kind.min_children() {
            let n = group.children.len();
            self.errors.push(ParseError {
                span: kw.span,
                code: ParseErrorCode::GroupTooSmall,
                expected: format!("at least {} child(ren) in `{}` group", kind.min_children(), kind),
                found: format!("{n} child(ren)"),
            });
        }
        group
    }

    fn constraints(&mut self, out: &mut Vec<CrossTreeConstraint>) {
        if self.peek().kind != TokenKind::LBrace {
            self.unexpected("`{`");
            return;
        }
        self.bump();
        loop {
            let t = self.peek().clone();
            match t.kind {
                TokenKind::RBrace => {
                    self.bump();
                    return;
                }
                TokenKind::Eof => {
                    self.error(t.span, "`}`", t.describe());
                    return;
                }
                _ => {}
            }
            let line = t.span.line;
            if let Some(c) = self.constraint() {
                out.push(c);
            } else {
                // Statement boundary is the end of the line.
                while self.peek().span.line == line
                    && !matches!(self.peek().kind, TokenKind::RBrace | TokenKind::Eof)
                {
                    self.bump();
                }
            }
        }
    }

    fn constraint(&mut self) -> Option<CrossTreeConstraint> {
        let source = self.identifier("feature identifier")?;
        let kind = if self.at_word("requires") {
            ConstraintKind::Requires
        } else if self.at_word("excludes") {
            ConstraintKind::Excludes
        } else {
            self.unexpected("`requires` or `excludes`");
            return None;
        };
        self.bump();
        let target = self.identifier("feature identifier")?;
        self.constraint_spans.push((source.span, target.span));
        Some(CrossTreeConstraint {
            kind,
            source: FeatureId::new(&source.text),
            target: FeatureId::new(&target.text),
        })
    }
}

fn semantic_checks(
    model: &FeatureModel,
    feature_spans: &HashMap<FeatureId, Vec<SourceSpan>>,
    constraint_spans: &[(SourceSpan, SourceSpan)],
    errors: &mut Vec<ParseError>,
) {
    let mut dup: Vec<(&FeatureId, &Vec<SourceSpan>)> = feature_spans
        .iter()
        .filter(|(_, spans)| spans.len() > 1)
        .collect();
    dup.sort_by_key(|(_, spans)| (spans[1].line, spans[1].column));
    for (id, spans) in dup {
        let first = spans[0];
        for span in &spans[1..] {
            errors.push(ParseError {
                span: *span,
                code: ParseErrorCode::DuplicateFeature,
                expected: format!("unique feature id (`{id}` first declared at {first})"),
                found: format!("duplicate `{id}`"),
            });
        }
    }
    for (c, (src_span, tgt_span)) in model.constraints.iter().zip(constraint_spans) {
        for (end, span) in [(&c.source, src_span), (&c.target, tgt_span)] {
            if !feature_spans.contains_key(end) {
                errors.push(ParseError {
                    span: *span,
                    code: ParseErrorCode::UnknownFeature,
                    expected: "declared feature".to_string(),
                    found: format!("unknown feature `{end}`"),
                });
            }
        }
        if c.source == c.target {
            errors.push(ParseError {
                span: *tgt_span,
                code: ParseErrorCode::SelfConstraint,
                expected: format!("a feature other than `{}`", c.source),
                found: format!("`{}` {} itself", c.source, c.kind.keyword()),
            });
        }
    }
}
