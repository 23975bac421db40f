//! Tokenizer for the PDDL fragment: parens, symbols, `;` line comments.

use super::PddlError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    LParen,
    RParen,
    /// Lowercased symbol; identifiers are case-insensitive in this fragment.
    Sym(String),
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

pub fn lex(text: &str) -> Result<Vec<Token>, PddlError> {
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            ';' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                }
            }
            '(' => {
                out.push(Token { tok: Tok::LParen, line, col });
                chars.next();
                col += 1;
            }
            ')' => {
                out.push(Token { tok: Tok::RParen, line, col });
                chars.next();
                col += 1;
            }
            _ => {
                let (start_line, start_col) = (line, col);
                let mut sym = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    sym.push(c.to_ascii_lowercase());
                    chars.next();
                    col += 1;
                }
                out.push(Token {
                    tok: Tok::Sym(sym),
                    line: start_line,
                    col: start_col,
                });
            }
        }
    }
    if out.is_empty() {
        return Err(PddlError::Syntax {
            line: 1,
            col: 1,
            message: "empty input".into(),
        });
    }
    Ok(out)
}
