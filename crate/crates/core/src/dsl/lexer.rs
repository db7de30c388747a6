use super::{ParseError, ParseErrorCode, SourceSpan};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum TokenKind {
    Ident,
    /// `xor?` or `or?`
    OptionalKind,
    LBrace,
    RBrace,
    Eof,
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub span: SourceSpan,
}

impl Token {
    pub fn describe(&self) -> String {
        match self.kind {
            TokenKind::Eof => "end of input".to_string(),
            _ => format!("`{}`", self.text),
        }
    }
}

/// Splits `source` into tokens. Lexical errors are collected and the
/// offending characters skipped; the token stream always ends with `Eof`.
pub(crate) fn tokenize(source: &str) -> (Vec<Token>, Vec<ParseError>) {
    let mut tokens = Vec::new();
    let mut errors = Vec::new();
    let chars: Vec<char> = source.chars().collect();
    let (mut line, mut col) = (1usize, 1usize);
    let mut last = SourceSpan::new(1, 1, 1);
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            last = SourceSpan::new(line, col, 1);
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            last = SourceSpan::new(line, col, 1);
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                last = SourceSpan::new(line, col, 1);
                i += 1;
                col += 1;
            }
            continue;
        }
        if c == '{' || c == '}' {
            let kind = if c == '{' {
                TokenKind::LBrace
            } else {
                TokenKind::RBrace
            };
            last = SourceSpan::new(line, col, 1);
            tokens.push(Token {
                kind,
                text: c.to_string(),
                span: last,
            });
            i += 1;
            col += 1;
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len()
                && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '.')
            {
                i += 1;
            }
            let mut text: String = chars[start..i].iter().collect();
            let mut kind = TokenKind::Ident;
            if (text == "xor" || text == "or") && chars.get(i) == Some(&'?') {
                text.push('?');
                kind = TokenKind::OptionalKind;
                i += 1;
            }
            let len = i - start;
            last = SourceSpan::new(line, col, len);
            tokens.push(Token {
                kind,
                text,
                span: last,
            });
            col += len;
            continue;
        }
        last = SourceSpan::new(line, col, 1);
        errors.push(ParseError {
            span: last,
            code: ParseErrorCode::Lexical,
            expected: "identifier, `{`, `}` or comment".to_string(),
            found: format!("character {c:?}"),
        });
        i += 1;
        col += 1;
    }
    tokens.push(Token {
        kind: TokenKind::Eof,
        text: String::new(),
        span: last,
    });
    (tokens, errors)
}
