//! Tokenizer for `.cdgl` text. ASCII spellings are canonical; the usual
//! Unicode symbols are accepted as aliases.

use num_bigint::BigInt;

use super::ParseError;
use crate::term::Rat;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Num(Rat),
    Ident(String),
    /// An identifier immediately followed by `'`.
    PrimedIdent(String),
    /// A backslash keyword such as `\forall`.
    Keyword(String),
    Sym(&'static str),
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Num(q) => format!("number `{q}`"),
            Tok::Ident(s) => format!("`{s}`"),
            Tok::PrimedIdent(s) => format!("`{s}'`"),
            Tok::Keyword(s) => format!("`\\{s}`"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".to_string(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

/// Longest-match ASCII symbols, longest first.
const SYMBOLS: &[&str] = &[
    "<->", "=<>", "^d", ":=", "++", "->", "|-", "=>", "=<", "<=", ">=", "!=", "{", "}", "(", ")", "[", "]", "<", ">",
    "=", ";", "*", "?", "&", "|", "!", ",", ":", "+", "-", "'",
];

const ALIASES: &[(char, &str)] = &[
    ('∪', "++"),
    ('∧', "&"),
    ('∨', "|"),
    ('→', "->"),
    ('↔', "<->"),
    ('¬', "!"),
    ('≤', "<="),
    ('≥', ">="),
    ('≠', "!="),
    ('⊢', "|-"),
    ('⟨', "<"),
    ('⟩', ">"),
    ('⊑', "=<"),
];

/// A `--` comment: its line and the text after the dashes.
pub type Comment = (usize, String);

pub fn lex(src: &str) -> Result<(Vec<Token>, Vec<Comment>), ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut comments = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let advance = |i: &mut usize, line: &mut usize, col: &mut usize, n: usize, chars: &[char]| {
        for _ in 0..n {
            if chars[*i] == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
            *i += 1;
        }
    };
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col, 1, &chars);
            continue;
        }
        if c == '-' && chars.get(i + 1) == Some(&'-') {
            let start = i + 2;
            while i < chars.len() && chars[i] != '\n' {
                advance(&mut i, &mut line, &mut col, 1, &chars);
            }
            let text: String = chars[start..i].iter().collect();
            comments.push((line, text.trim_end().to_string()));
            continue;
        }
        let (tl, tc) = (line, col);
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let mut text: String = chars[start..i].iter().collect();
            let mut value = parse_int(&text);
            if i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                i += 1;
                let fs = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let frac: String = chars[fs..i].iter().collect();
                text = format!("{text}{frac}");
                value = Rat::new(parse_int(&text).to_integer(), BigInt::from(10u32).pow(frac.len() as u32));
            }
            if i + 1 < chars.len() && chars[i] == '/' && chars[i + 1].is_ascii_digit() {
                i += 1;
                let ds = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let den: String = chars[ds..i].iter().collect();
                let d = parse_int(&den);
                if d == Rat::from_integer(BigInt::from(0)) {
                    return Err(ParseError::at(tl, tc, "a nonzero denominator", "`0`"));
                }
                value /= d;
            }
            col += i - start;
            out.push(Token { tok: Tok::Num(value), line: tl, col: tc });
            continue;
        }
        if c.is_alphabetic() || c == '_' || c == '\\' {
            let keyword = c == '\\';
            let start = if keyword { i + 1 } else { i };
            let mut j = start;
            while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_') {
                j += 1;
            }
            let name: String = chars[start..j].iter().collect();
            if keyword && name.is_empty() {
                return Err(ParseError::at(tl, tc, "a keyword after `\\`", "`\\`"));
            }
            let n = j - i;
            advance(&mut i, &mut line, &mut col, n, &chars);
            if keyword {
                out.push(Token { tok: Tok::Keyword(name), line: tl, col: tc });
            } else if chars.get(i) == Some(&'\'') {
                advance(&mut i, &mut line, &mut col, 1, &chars);
                out.push(Token { tok: Tok::PrimedIdent(name), line: tl, col: tc });
            } else {
                out.push(Token { tok: Tok::Ident(name), line: tl, col: tc });
            }
            continue;
        }
        if c == '∀' || c == '∃' {
            let name = if c == '∀' { "forall" } else { "exists" };
            advance(&mut i, &mut line, &mut col, 1, &chars);
            out.push(Token { tok: Tok::Keyword(name.into()), line: tl, col: tc });
            continue;
        }
        if let Some((_, sym)) = ALIASES.iter().find(|(a, _)| *a == c) {
            let sym = SYMBOLS.iter().find(|s| *s == sym).expect("alias maps to a symbol");
            advance(&mut i, &mut line, &mut col, 1, &chars);
            out.push(Token { tok: Tok::Sym(sym), line: tl, col: tc });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(sym) => {
                advance(&mut i, &mut line, &mut col, sym.len(), &chars);
                out.push(Token { tok: Tok::Sym(sym), line: tl, col: tc });
            }
            None => return Err(ParseError::at(tl, tc, "a token", &format!("`{c}`"))),
        }
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok((out, comments))
}

fn parse_int(s: &str) -> Rat {
    Rat::from_integer(s.parse::<BigInt>().expect("digits form an integer"))
}
