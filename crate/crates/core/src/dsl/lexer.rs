use num_bigint::BigInt;
use num_traits::{pow, Zero};

use super::{ParseError, ParseErrorKind, Pos};
use crate::scalar::Rational;

const MAX_DECIMAL_EXPONENT: i64 = 400;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Num(Rational),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    At,
    End,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Num(r) => format!("number {r}"),
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::At => "`@`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

/// Splits `src` into tokens; `origin` is the file position of its first
/// character.
pub(crate) fn tokenize(src: &str, origin: Pos) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let at = |i: usize| Pos { line: origin.line, column: origin.column + i };
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            '@' => Tok::At,
            c if c.is_ascii_digit() || c == '.' => {
                let (value, end) = number(&chars, i).map_err(|kind| ParseError::new(at(start), kind))?;
                out.push(Token { tok: Tok::Num(value), pos: at(start) });
                i = end;
                continue;
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut end = i;
                while end < chars.len() && (chars[end].is_alphanumeric() || chars[end] == '_') {
                    end += 1;
                }
                out.push(Token { tok: Tok::Ident(chars[i..end].iter().collect()), pos: at(start) });
                i = end;
                continue;
            }
            other => return Err(ParseError::new(at(start), ParseErrorKind::UnexpectedChar(other))),
        };
        out.push(Token { tok, pos: at(start) });
        i += 1;
    }
    out.push(Token { tok: Tok::End, pos: at(chars.len()) });
    Ok(out)
}

/// Reads `digits[.digits][e[+-]digits]` exactly.
fn number(chars: &[char], start: usize) -> Result<(Rational, usize), ParseErrorKind> {
    let mut i = start;
    let mut mantissa = BigInt::zero();
    let mut scale: i64 = 0;
    let mut digits = 0;
    while i < chars.len() && chars[i].is_ascii_digit() {
        mantissa = mantissa * 10 + chars[i].to_digit(10).unwrap();
        digits += 1;
        i += 1;
    }
    if i < chars.len() && chars[i] == '.' {
        i += 1;
        while i < chars.len() && chars[i].is_ascii_digit() {
            mantissa = mantissa * 10 + chars[i].to_digit(10).unwrap();
            scale -= 1;
            digits += 1;
            i += 1;
        }
    }
    if digits == 0 {
        return Err(ParseErrorKind::InvalidNumber);
    }
    if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
        let mut j = i + 1;
        let mut negative = false;
        if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
            negative = chars[j] == '-';
            j += 1;
        }
        let exp_start = j;
        let mut exp: i64 = 0;
        while j < chars.len() && chars[j].is_ascii_digit() {
            exp = exp.saturating_mul(10).saturating_add(chars[j].to_digit(10).unwrap() as i64);
            j += 1;
        }
        if j == exp_start {
            return Err(ParseErrorKind::InvalidNumber);
        }
        if exp > MAX_DECIMAL_EXPONENT {
            return Err(ParseErrorKind::TooLarge);
        }
        scale += if negative { -exp } else { exp };
        i = j;
    }
    if i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '.' || chars[i] == '_') {
        return Err(ParseErrorKind::InvalidNumber);
    }
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        Rational::from_integer(mantissa * pow(ten, scale as usize))
    } else {
        Rational::new(mantissa, pow(ten, (-scale) as usize))
    };
    Ok((value, i))
}
