use crate::ast::{BinOp, Expression, Func, Node};
use crate::error::{ParseError, ParseErrorKind};

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
    End,
}

struct Lexer<'a> {
    chars: Vec<(usize, char)>,
    pos: usize,
    source: &'a str,
}

impl<'a> Lexer<'a> {
    fn new(source: &'a str) -> Self {
        Lexer {
            chars: source.chars().enumerate().collect(),
            pos: 0,
            source,
        }
    }

    fn peek_char(&self) -> Option<char> {
        self.chars.get(self.pos).map(|&(_, c)| c)
    }

    fn tokenize(mut self) -> Result<Vec<(Token, usize)>, ParseError> {
        let mut tokens = Vec::new();
        while let Some(c) = self.peek_char() {
            let start = self.pos;
            if c.is_whitespace() {
                self.pos += 1;
                continue;
            }
            let token = if c.is_ascii_digit() || c == '.' {
                self.number(start)?
            } else if c.is_alphabetic() || c == '_' {
                let mut name = String::new();
                while let Some(c) = self.peek_char() {
                    if c.is_alphanumeric() || c == '_' {
                        name.push(c);
                        self.pos += 1;
                    } else {
                        break;
                    }
                }
                Token::Ident(name)
            } else {
                self.pos += 1;
                match c {
                    '+' | '-' | '*' | '/' | '^' => Token::Op(c),
                    '(' => Token::LParen,
                    ')' => Token::RParen,
                    ',' => Token::Comma,
                    other => {
                        return Err(ParseError {
                            kind: ParseErrorKind::Syntax(format!("unexpected character '{other}'")),
                            position: start,
                        })
                    }
                }
            };
            tokens.push((token, start));
        }
        tokens.push((Token::End, self.chars.len()));
        Ok(tokens)
    }

    fn number(&mut self, start: usize) -> Result<Token, ParseError> {
        let mut text = String::new();
        let take_digits = |lexer: &mut Self, text: &mut String| {
            while let Some(c) = lexer.peek_char().filter(char::is_ascii_digit) {
                text.push(c);
                lexer.pos += 1;
            }
        };
        take_digits(self, &mut text);
        if self.peek_char() == Some('.') {
            text.push('.');
            self.pos += 1;
            take_digits(self, &mut text);
        }
        if matches!(self.peek_char(), Some('e' | 'E')) {
            let save = self.pos;
            let mut exponent = String::from("e");
            self.pos += 1;
            if let Some(sign @ ('+' | '-')) = self.peek_char() {
                exponent.push(sign);
                self.pos += 1;
            }
            let digits_start = exponent.len();
            take_digits(self, &mut exponent);
            if exponent.len() == digits_start {
                // Not an exponent after all, e.g. "2e" where e is an identifier.
                self.pos = save;
            } else {
                text.push_str(&exponent);
            }
        }
        let syntax = |msg: String| ParseError {
            kind: ParseErrorKind::Syntax(msg),
            position: start,
        };
        let value: f64 = text
            .parse()
            .map_err(|_| syntax(format!("malformed number '{text}'")))?;
        if !value.is_finite() {
            return Err(syntax(format!(
                "number '{text}' is out of range in {}",
                self.source
            )));
        }
        Ok(Token::Number(value))
    }
}

struct Parser<'n> {
    tokens: Vec<(Token, usize)>,
    pos: usize,
    names: &'n [String],
}

impl Parser<'_> {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos].0
    }

    fn position(&self) -> usize {
        self.tokens[self.pos].1
    }

    fn advance(&mut self) -> Token {
        let token = self.tokens[self.pos].0.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        token
    }

    fn error(&self, kind: ParseErrorKind) -> ParseError {
        ParseError {
            kind,
            position: self.position(),
        }
    }

    fn expect(&mut self, expected: Token, what: &str) -> Result<(), ParseError> {
        if *self.peek() == expected {
            self.advance();
            Ok(())
        } else {
            Err(self.error(ParseErrorKind::Syntax(format!(
                "expected {what}, found {}",
                describe(self.peek())
            ))))
        }
    }

    fn sum(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.product()?;
        loop {
            let op = match self.peek() {
                Token::Op('+') => BinOp::Add,
                Token::Op('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.advance();
            let rhs = self.product()?;
            lhs = binary(op, lhs, rhs);
        }
    }

    fn product(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.prefix()?;
        loop {
            let op = match self.peek() {
                Token::Op('*') => BinOp::Mul,
                Token::Op('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.advance();
            let rhs = self.prefix()?;
            lhs = binary(op, lhs, rhs);
        }
    }

    fn prefix(&mut self) -> Result<Node, ParseError> {
        match self.peek() {
            Token::Op('-') => {
                self.advance();
                // A minus directly on a literal is a signed literal unless a power follows.
                if let (Token::Number(v), Some((next, _))) =
                    (self.peek().clone(), self.tokens.get(self.pos + 1))
                {
                    if *next != Token::Op('^') {
                        self.advance();
                        return Ok(Node::Const(-v));
                    }
                }
                Ok(Node::Neg(Box::new(self.prefix()?)))
            }
            Token::Op('+') => {
                self.advance();
                self.prefix()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Node, ParseError> {
        let base = self.primary()?;
        if *self.peek() == Token::Op('^') {
            self.advance();
            let exponent = self.prefix()?;
            Ok(binary(BinOp::Pow, base, exponent))
        } else {
            Ok(base)
        }
    }

    fn primary(&mut self) -> Result<Node, ParseError> {
        let position = self.position();
        match self.advance() {
            Token::Number(v) => Ok(Node::Const(v)),
            Token::LParen => {
                let inner = self.sum()?;
                self.expect(Token::RParen, "')'")?;
                Ok(inner)
            }
            Token::Ident(name) => {
                if *self.peek() == Token::LParen {
                    self.call(name, position)
                } else if let Some(index) = self.names.iter().position(|n| *n == name) {
                    Ok(Node::Var(index))
                } else if name == "pi" {
                    Ok(Node::Const(std::f64::consts::PI))
                } else {
                    Err(ParseError {
                        kind: ParseErrorKind::UnknownIdentifier(name),
                        position,
                    })
                }
            }
            other => Err(ParseError {
                kind: ParseErrorKind::Syntax(format!("unexpected {}", describe(&other))),
                position,
            }),
        }
    }

    fn call(&mut self, name: String, position: usize) -> Result<Node, ParseError> {
        let func = Func::from_name(&name).ok_or_else(|| ParseError {
            kind: ParseErrorKind::UnknownFunction(name.clone()),
            position,
        })?;
        self.expect(Token::LParen, "'('")?;
        let mut args = Vec::new();
        if *self.peek() != Token::RParen {
            loop {
                args.push(self.sum()?);
                if *self.peek() == Token::Comma {
                    self.advance();
                } else {
                    break;
                }
            }
        }
        self.expect(Token::RParen, "')' or ','")?;
        if args.len() != func.arity() {
            return Err(ParseError {
                kind: ParseErrorKind::Arity {
                    function: name,
                    expected: func.arity(),
                    found: args.len(),
                },
                position,
            });
        }
        Ok(Node::Call { func, args })
    }
}

fn binary(op: BinOp, lhs: Node, rhs: Node) -> Node {
    Node::Binary {
        op,
        lhs: Box::new(lhs),
        rhs: Box::new(rhs),
    }
}

fn describe(token: &Token) -> String {
    match token {
        Token::Number(v) => format!("number {v}"),
        Token::Ident(name) => format!("identifier '{name}'"),
        Token::Op(c) => format!("'{c}'"),
        Token::LParen => "'('".into(),
        Token::RParen => "')'".into(),
        Token::Comma => "','".into(),
        Token::End => "end of input".into(),
    }
}

/// Parses `text` into an expression over the given ordered input names.
pub fn parse<S: AsRef<str>>(text: &str, inputs: &[S]) -> Result<Expression, ParseError> {
    let names: Vec<String> = inputs.iter().map(|s| s.as_ref().to_owned()).collect();
    if text.trim().is_empty() {
        return Err(ParseError {
            kind: ParseErrorKind::Syntax("empty expression".into()),
            position: 0,
        });
    }
    let tokens = Lexer::new(text).tokenize()?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        names: &names,
    };
    let root = parser.sum()?;
    if *parser.peek() != Token::End {
        return Err(parser.error(ParseErrorKind::Syntax(format!(
            "unexpected {} after complete expression",
            describe(parser.peek())
        ))));
    }
    Ok(Expression::from_node(root, names))
}
