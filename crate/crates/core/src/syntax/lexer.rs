use num_bigint::BigInt;

use super::SyntaxError;

/// 1-based line and column.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TokenKind {
    Name { text: String, quoted: bool },
    Var(String),
    Int(BigInt),
    Open,
    Close,
    OpenList,
    CloseList,
    OpenCurly,
    CloseCurly,
    Comma,
    Bar,
    End,
}

#[derive(Clone, Debug)]
pub struct Token {
    pub kind: TokenKind,
    pub start: Pos,
    /// Position of the last character of the token.
    pub end: Pos,
    /// Whitespace or a comment precedes the token.
    pub layout_before: bool,
}

pub(crate) const GRAPHIC: &str = "#$&*+-./:<=>?@^~\\";

pub(crate) fn is_graphic(c: char) -> bool {
    GRAPHIC.contains(c)
}

pub(crate) fn is_alnum(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

pub struct Lexer<'a> {
    chars: Vec<char>,
    idx: usize,
    pos: Pos,
    _src: &'a str,
}

impl<'a> Lexer<'a> {
    pub fn new(src: &'a str) -> Lexer<'a> {
        Lexer {
            chars: src.chars().collect(),
            idx: 0,
            pos: Pos { line: 1, col: 1 },
            _src: src,
        }
    }

    pub fn pos(&self) -> Pos {
        self.pos
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.idx).copied()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.chars.get(self.idx + n).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.idx).copied()?;
        self.idx += 1;
        if c == '\n' {
            self.pos.line += 1;
            self.pos.col = 1;
        } else {
            self.pos.col += 1;
        }
        Some(c)
    }

    fn skip_layout(&mut self) -> bool {
        let mut skipped = false;
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                    skipped = true;
                }
                Some('%') => {
                    while let Some(c) = self.bump() {
                        if c == '\n' {
                            break;
                        }
                    }
                    skipped = true;
                }
                _ => return skipped,
            }
        }
    }

    fn err(&self, pos: Pos, msg: impl Into<String>) -> SyntaxError {
        SyntaxError {
            line: pos.line,
            col: pos.col,
            message: msg.into(),
        }
    }

    /// Next token, or `None` at end of input.
    pub fn next_token(&mut self) -> Result<Option<Token>, SyntaxError> {
        let layout_before = self.skip_layout();
        let start = self.pos;
        let Some(c) = self.peek() else {
            return Ok(None);
        };
        let mut last = start;
        let mut take = |lx: &mut Lexer<'a>| {
            last = lx.pos;
            lx.bump()
        };
        let kind = match c {
            '(' => {
                take(self);
                TokenKind::Open
            }
            ')' => {
                take(self);
                TokenKind::Close
            }
            '[' => {
                take(self);
                TokenKind::OpenList
            }
            ']' => {
                take(self);
                TokenKind::CloseList
            }
            '{' => {
                take(self);
                TokenKind::OpenCurly
            }
            '}' => {
                take(self);
                TokenKind::CloseCurly
            }
            ',' => {
                take(self);
                TokenKind::Comma
            }
            '|' => {
                take(self);
                TokenKind::Bar
            }
            '!' | ';' => {
                take(self);
                TokenKind::Name {
                    text: c.to_string(),
                    quoted: false,
                }
            }
            '0'..='9' => {
                let mut s = String::new();
                while let Some(d) = self.peek().filter(char::is_ascii_digit) {
                    s.push(d);
                    take(self);
                }
                TokenKind::Int(s.parse().expect("digits"))
            }
            '_' | 'A'..='Z' => {
                let mut s = String::new();
                while let Some(d) = self.peek().filter(|&d| is_alnum(d)) {
                    s.push(d);
                    take(self);
                }
                TokenKind::Var(s)
            }
            'a'..='z' => {
                let mut s = String::new();
                while let Some(d) = self.peek().filter(|&d| is_alnum(d)) {
                    s.push(d);
                    take(self);
                }
                TokenKind::Name {
                    text: s,
                    quoted: false,
                }
            }
            '\'' => {
                take(self);
                let mut s = String::new();
                loop {
                    match self.peek() {
                        None => return Err(self.err(start, "unterminated quoted atom")),
                        Some('\'') => {
                            take(self);
                            if self.peek() == Some('\'') {
                                take(self);
                                s.push('\'');
                            } else {
                                break;
                            }
                        }
                        Some('\\') => {
                            take(self);
                            let e = take(self).ok_or_else(|| self.err(start, "unterminated quoted atom"))?;
                            s.push(match e {
                                'n' => '\n',
                                't' => '\t',
                                '\\' => '\\',
                                '\'' => '\'',
                                other => {
                                    return Err(self.err(self.pos, format!("unknown escape `\\{other}`")))
                                }
                            });
                        }
                        Some(ch) => {
                            take(self);
                            s.push(ch);
                        }
                    }
                }
                TokenKind::Name { text: s, quoted: true }
            }
            c if is_graphic(c) => {
                if c == '.' && self.peek_at(1).is_none_or(|n| n.is_whitespace() || n == '%') {
                    take(self);
                    TokenKind::End
                } else {
                    let mut s = String::new();
                    while let Some(d) = self.peek().filter(|&d| is_graphic(d)) {
                        s.push(d);
                        take(self);
                    }
                    TokenKind::Name {
                        text: s,
                        quoted: false,
                    }
                }
            }
            other => return Err(self.err(start, format!("unexpected character `{other}`"))),
        };
        Ok(Some(Token {
            kind,
            start,
            end: last,
            layout_before,
        }))
    }
}
