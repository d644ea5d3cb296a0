use std::fmt;

use crate::error::EvalError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
            BinOp::Pow => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Abs,
    Tanh,
    Min,
    Max,
}

impl Func {
    pub const ALL: [Func; 10] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Exp,
        Func::Log,
        Func::Sqrt,
        Func::Abs,
        Func::Tanh,
        Func::Min,
        Func::Max,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Tanh => "tanh",
            Func::Min => "min",
            Func::Max => "max",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Min | Func::Max => 2,
            _ => 1,
        }
    }

    fn apply(self, args: &[f64]) -> Result<f64, EvalError> {
        let x = args[0];
        let value = match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Tan => x.tan(),
            Func::Exp => x.exp(),
            Func::Log => {
                if x <= 0.0 {
                    return Err(EvalError::Domain {
                        function: "log",
                        argument: x,
                    });
                }
                x.ln()
            }
            Func::Sqrt => {
                if x < 0.0 {
                    return Err(EvalError::Domain {
                        function: "sqrt",
                        argument: x,
                    });
                }
                x.sqrt()
            }
            Func::Abs => x.abs(),
            Func::Tanh => x.tanh(),
            Func::Min => x.min(args[1]),
            Func::Max => x.max(args[1]),
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(EvalError::NonFinite {
                operation: self.name(),
                value,
            })
        }
    }
}

/// Expression tree node. Variables refer to inputs by position.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(f64),
    Var(usize),
    Neg(Box<Node>),
    Binary {
        op: BinOp,
        lhs: Box<Node>,
        rhs: Box<Node>,
    },
    Call {
        func: Func,
        args: Vec<Node>,
    },
}

impl Node {
    pub fn eval(&self, x: &[f64]) -> Result<f64, EvalError> {
        match self {
            Node::Const(c) => Ok(*c),
            Node::Var(i) => Ok(x[*i]),
            Node::Neg(u) => Ok(-u.eval(x)?),
            Node::Binary { op, lhs, rhs } => {
                let a = lhs.eval(x)?;
                let b = rhs.eval(x)?;
                let value = match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err(EvalError::DivisionByZero);
                        }
                        a / b
                    }
                    BinOp::Pow => {
                        let v = a.powf(b);
                        if v.is_nan() {
                            return Err(EvalError::Domain {
                                function: "pow",
                                argument: a,
                            });
                        }
                        v
                    }
                };
                if value.is_finite() {
                    Ok(value)
                } else {
                    Err(EvalError::NonFinite {
                        operation: match op {
                            BinOp::Add => "+",
                            BinOp::Sub => "-",
                            BinOp::Mul => "*",
                            BinOp::Div => "/",
                            BinOp::Pow => "^",
                        },
                        value,
                    })
                }
            }
            Node::Call { func, args } => {
                let mut values = [0.0; 2];
                for (slot, arg) in values.iter_mut().zip(args) {
                    *slot = arg.eval(x)?;
                }
                func.apply(&values[..args.len()])
            }
        }
    }

    /// True when the subtree references input `index`.
    pub fn depends_on(&self, index: usize) -> bool {
        match self {
            Node::Const(_) => false,
            Node::Var(i) => *i == index,
            Node::Neg(u) => u.depends_on(index),
            Node::Binary { lhs, rhs, .. } => lhs.depends_on(index) || rhs.depends_on(index),
            Node::Call { args, .. } => args.iter().any(|a| a.depends_on(index)),
        }
    }

    pub fn as_const(&self) -> Option<f64> {
        match self {
            Node::Const(c) => Some(*c),
            _ => None,
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Node::Const(c) if c.is_sign_negative() => 3,
            Node::Const(_) | Node::Var(_) | Node::Call { .. } => 5,
            Node::Neg(_) => 3,
            Node::Binary { op, .. } => op.precedence(),
        }
    }

    fn write(&self, names: &[String], f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Const(c) => write!(f, "{c}"),
            Node::Var(i) => f.write_str(&names[*i]),
            Node::Neg(u) => {
                f.write_str("-")?;
                match u.as_ref() {
                    // Keep `-(2)` distinct from the literal `-2`.
                    Node::Const(c) if !c.is_sign_negative() => write!(f, "({c})"),
                    _ => write_child(u, 3, names, f),
                }
            }
            Node::Binary { op, lhs, rhs } => {
                let p = op.precedence();
                // Left-associative operators keep the tree shape by parenthesizing an
                // equal-precedence right child; `^` is the mirror image.
                let (left_min, right_min) = match op {
                    BinOp::Pow => (5, 3),
                    _ => (p, p + 1),
                };
                write_child(lhs, left_min, names, f)?;
                write!(f, "{}", op.symbol())?;
                write_child(rhs, right_min, names, f)
            }
            Node::Call { func, args } => {
                write!(f, "{}(", func.name())?;
                for (k, arg) in args.iter().enumerate() {
                    if k > 0 {
                        f.write_str(",")?;
                    }
                    arg.write(names, f)?;
                }
                f.write_str(")")
            }
        }
    }
}

fn write_child(
    node: &Node,
    min_precedence: u8,
    names: &[String],
    f: &mut fmt::Formatter<'_>,
) -> fmt::Result {
    if node.precedence() < min_precedence {
        f.write_str("(")?;
        node.write(names, f)?;
        f.write_str(")")
    } else {
        node.write(names, f)
    }
}

/// A parsed expression together with the ordered names of its inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    root: Node,
    inputs: Vec<String>,
}

impl Expression {
    /// Builds an expression from a tree. Every `Var` index must be below `inputs.len()`.
    pub fn from_node(root: Node, inputs: Vec<String>) -> Self {
        debug_assert!(max_var(&root).is_none_or(|m| m < inputs.len()));
        Expression { root, inputs }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn inputs(&self) -> &[String] {
        &self.inputs
    }

    pub fn input_dim(&self) -> usize {
        self.inputs.len()
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64, EvalError> {
        if x.len() != self.inputs.len() {
            return Err(EvalError::Dimension {
                expected: self.inputs.len(),
                found: x.len(),
            });
        }
        self.root.eval(x)
    }

    pub fn is_constant(&self) -> bool {
        (0..self.inputs.len()).all(|i| !self.root.depends_on(i))
    }
}

fn max_var(node: &Node) -> Option<usize> {
    match node {
        Node::Const(_) => None,
        Node::Var(i) => Some(*i),
        Node::Neg(u) => max_var(u),
        Node::Binary { lhs, rhs, .. } => max_var(lhs).max(max_var(rhs)),
        Node::Call { args, .. } => args.iter().filter_map(max_var).max(),
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.write(&self.inputs, f)
    }
}
