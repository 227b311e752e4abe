//! Ground-truth checking for code answers.
//!
//! Code is compared after stripping comments and splitting into tokens
//! (identifiers, numbers and single punctuation characters), so layout and
//! comments never matter. Comment markers are `#` and `//` to end of line and
//! `/* ... */`, ignored inside quoted strings. Python's `//` operator is
//! therefore read as a comment start; both sides are normalized the same way,
//! so this only affects code that differs after the operator.

use std::collections::HashMap;
use std::sync::OnceLock;

use regex::Regex;

use crate::scalar::Real;

/// Removes comments, leaving string literals intact.
pub fn strip_comments(code: &str) -> String {
    let mut out = String::with_capacity(code.len());
    let mut chars = code.chars().peekable();
    let mut quote: Option<char> = None;
    while let Some(c) = chars.next() {
        if let Some(q) = quote {
            out.push(c);
            if c == '\\' {
                if let Some(next) = chars.next() {
                    out.push(next);
                }
            } else if c == q {
                quote = None;
            }
            continue;
        }
        match c {
            '"' | '\'' => {
                quote = Some(c);
                out.push(c);
            }
            '#' => skip_line(&mut chars, &mut out),
            '/' if chars.peek() == Some(&'/') => skip_line(&mut chars, &mut out),
            '/' if chars.peek() == Some(&'*') => {
                chars.next();
                let mut prev = '\0';
                for c in chars.by_ref() {
                    if prev == '*' && c == '/' {
                        break;
                    }
                    prev = c;
                }
                out.push(' ');
            }
            _ => out.push(c),
        }
    }
    out
}

fn skip_line(chars: &mut std::iter::Peekable<std::str::Chars<'_>>, out: &mut String) {
    for c in chars.by_ref() {
        if c == '\n' {
            out.push('\n');
            break;
        }
    }
}

/// Comment-free code tokens.
pub fn code_tokens(code: &str) -> Vec<String> {
    static TOKEN: OnceLock<Regex> = OnceLock::new();
    let re = TOKEN.get_or_init(|| {
        Regex::new(r"[A-Za-z_][A-Za-z0-9_]*|[0-9]+(?:\.[0-9]+)?|\S").expect("valid token regex")
    });
    re.find_iter(&strip_comments(code))
        .map(|m| m.as_str().to_owned())
        .collect()
}

/// Multiset token F1. Two empty sequences score 1.
pub fn token_f1<T: Real>(answer: &[String], reference: &[String]) -> T {
    if answer.is_empty() && reference.is_empty() {
        return T::one();
    }
    if answer.is_empty() || reference.is_empty() {
        return T::zero();
    }
    let mut pool: HashMap<&str, usize> = HashMap::new();
    for t in reference {
        *pool.entry(t.as_str()).or_insert(0) += 1;
    }
    let mut overlap = 0usize;
    for t in answer {
        if let Some(n) = pool.get_mut(t.as_str()) {
            if *n > 0 {
                *n -= 1;
                overlap += 1;
            }
        }
    }
    if overlap == 0 {
        return T::zero();
    }
    let precision = T::from_count(overlap) / T::from_count(answer.len());
    let recall = T::from_count(overlap) / T::from_count(reference.len());
    (T::lit(2.0) * precision * recall) / (precision + recall)
}

/// 1 when the normalized token streams are equal, token F1 otherwise.
pub fn code_match<T: Real>(answer: &str, reference: &str) -> T {
    let a = code_tokens(answer);
    let r = code_tokens(reference);
    if a == r {
        T::one()
    } else {
        token_f1(&a, &r)
    }
}
