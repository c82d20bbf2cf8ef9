use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::diag::{Code, Diagnostic, SourceSpan};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Word(String),
    Int(u64),
    Punct(&'static str),
    Eof,
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: u32,
    pub column: u32,
    pub length: u32,
}

impl Token {
    pub fn span(&self, file: &str) -> SourceSpan {
        SourceSpan { file: file.to_string(), line: self.line, column: self.column, length: self.length.max(1) }
    }
}

pub(crate) const KEYWORDS: &[&str] = &[
    "type", "component", "class", "input", "generated", "both", "attributes", "catalogue",
    "connect", "connect-one-to-many", "forward", "backward", "where", "inclusive", "exclusive",
    "instance", "require", "assert", "deny", "sum", "and", "or", "left", "right",
];

// Longest first so that `->` wins over `-` and `<=` over `<`.
const PUNCT: &[&str] = &[
    "->", "<=", ">=", "!=", "{", "}", "(", ")", "[", "]", ",", ";", ":", "=", "-", "*", ".", "+",
    "<", ">",
];

const OTM_SUFFIX: &str = "-one-to-many";

/// Splits `text` into tokens. `#` starts a comment running to end of line.
pub(crate) fn lex(file: &str, text: &str) -> Result<Vec<Token>, Vec<Diagnostic>> {
    let mut tokens = Vec::new();
    let mut errors = Vec::new();
    let bytes = text.as_bytes();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);
    while i < bytes.len() {
        let c = bytes[i];
        if c == b'\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_ascii_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == b'#' {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            let mut word = &text[start..i];
            if word == "connect" && text[i..].starts_with(OTM_SUFFIX) {
                i += OTM_SUFFIX.len();
                word = &text[start..i];
            }
            tokens.push(Token { tok: Tok::Word(word.to_string()), line, column: col, length: (i - start) as u32 });
            col += (i - start) as u32;
            continue;
        }
        if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let digits = &text[start..i];
            let length = (i - start) as u32;
            match digits.parse::<u64>() {
                Ok(n) => tokens.push(Token { tok: Tok::Int(n), line, column: col, length }),
                Err(_) => errors.push(Diagnostic::at(
                    Code::LexError,
                    SourceSpan { file: file.to_string(), line, column: col, length },
                    format!("integer literal `{digits}` is too large"),
                )),
            }
            col += length;
            continue;
        }
        if let Some(p) = PUNCT.iter().find(|p| text[i..].starts_with(**p)) {
            tokens.push(Token { tok: Tok::Punct(p), line, column: col, length: p.len() as u32 });
            i += p.len();
            col += p.len() as u32;
            continue;
        }
        let ch = text[i..].chars().next().unwrap_or('?');
        errors.push(Diagnostic::at(
            Code::LexError,
            SourceSpan { file: file.to_string(), line, column: col, length: 1 },
            format!("unexpected character `{ch}`"),
        ));
        i += ch.len_utf8();
        col += 1;
    }
    tokens.push(Token { tok: Tok::Eof, line, column: col, length: 1 });
    if errors.is_empty() {
        Ok(tokens)
    } else {
        Err(errors)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        lex("t", s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn one_to_many_keyword_and_arrows() {
        assert_eq!(
            toks("connect-one-to-many Bin -> {A}"),
            [
                Tok::Word("connect-one-to-many".into()),
                Tok::Word("Bin".into()),
                Tok::Punct("->"),
                Tok::Punct("{"),
                Tok::Word("A".into()),
                Tok::Punct("}"),
                Tok::Eof
            ]
        );
        assert_eq!(toks("connect A - B")[2], Tok::Punct("-"));
    }

    #[test]
    fn comments_and_positions() {
        let t = lex("t", "# hi\n  type X").unwrap();
        assert_eq!((t[0].line, t[0].column), (2, 3));
        assert_eq!((t[1].line, t[1].column), (2, 8));
    }

    #[test]
    fn bad_character() {
        let e = lex("f.loco", "type $").unwrap_err();
        assert_eq!(e[0].code, Code::LexError);
        assert_eq!(e[0].span.as_ref().unwrap().column, 6);
    }
}
