//! Symbolic differentiation with light constant folding.

use crate::ast::{BinOp, Expression, Func, Node};
use crate::error::EvalError;

fn constant(c: f64) -> Node {
    Node::Const(c)
}

fn is_const(node: &Node, value: f64) -> bool {
    node.as_const() == Some(value)
}

fn neg(u: Node) -> Node {
    match u {
        Node::Const(c) => Node::Const(-c),
        Node::Neg(inner) => *inner,
        other => Node::Neg(Box::new(other)),
    }
}

fn bin(op: BinOp, lhs: Node, rhs: Node) -> Node {
    Node::Binary {
        op,
        lhs: Box::new(lhs),
        rhs: Box::new(rhs),
    }
}

fn add(a: Node, b: Node) -> Node {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => constant(x + y),
        (Some(x), _) if x == 0.0 => b,
        (_, Some(y)) if y == 0.0 => a,
        _ => bin(BinOp::Add, a, b),
    }
}

fn sub(a: Node, b: Node) -> Node {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => constant(x - y),
        (Some(x), _) if x == 0.0 => neg(b),
        (_, Some(y)) if y == 0.0 => a,
        _ => bin(BinOp::Sub, a, b),
    }
}

fn mul(a: Node, b: Node) -> Node {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => constant(x * y),
        (Some(x), _) | (_, Some(x)) if x == 0.0 => constant(0.0),
        (Some(x), _) if x == 1.0 => b,
        (_, Some(y)) if y == 1.0 => a,
        (Some(x), _) if x == -1.0 => neg(b),
        (_, Some(y)) if y == -1.0 => neg(a),
        _ => bin(BinOp::Mul, a, b),
    }
}

fn div(a: Node, b: Node) -> Node {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) if y != 0.0 => constant(x / y),
        (Some(x), _) if x == 0.0 => constant(0.0),
        (_, Some(y)) if y == 1.0 => a,
        _ => bin(BinOp::Div, a, b),
    }
}

fn pow(a: Node, b: Node) -> Node {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) if x.powf(y).is_finite() => constant(x.powf(y)),
        (_, Some(y)) if y == 1.0 => a,
        (_, Some(y)) if y == 0.0 => constant(1.0),
        _ => bin(BinOp::Pow, a, b),
    }
}

fn call(func: Func, arg: Node) -> Node {
    Node::Call {
        func,
        args: vec![arg],
    }
}

fn diff_node(node: &Node, var: usize) -> Result<Node, EvalError> {
    Ok(match node {
        Node::Const(_) => constant(0.0),
        Node::Var(i) => constant(if *i == var { 1.0 } else { 0.0 }),
        Node::Neg(u) => neg(diff_node(u, var)?),
        Node::Binary { op, lhs, rhs } => {
            let u = lhs.as_ref().clone();
            let v = rhs.as_ref().clone();
            let du = diff_node(lhs, var)?;
            let dv = diff_node(rhs, var)?;
            match op {
                BinOp::Add => add(du, dv),
                BinOp::Sub => sub(du, dv),
                BinOp::Mul => add(mul(du, v), mul(u, dv)),
                BinOp::Div => div(
                    sub(mul(du, v.clone()), mul(u, dv)),
                    pow(v, constant(2.0)),
                ),
                BinOp::Pow => {
                    if is_const(&dv, 0.0) {
                        // d(u^c) = c u^(c-1) u'
                        let exponent = sub(v.clone(), constant(1.0));
                        mul(mul(v, pow(u, exponent)), du)
                    } else if is_const(&du, 0.0) {
                        // d(c^v) = c^v ln(c) v'
                        mul(mul(node.clone(), call(Func::Log, u)), dv)
                    } else {
                        // d(u^v) = u^v (v' ln u + v u'/u)
                        let inner = add(
                            mul(dv, call(Func::Log, u.clone())),
                            div(mul(v, du), u),
                        );
                        mul(node.clone(), inner)
                    }
                }
            }
        }
        Node::Call { func, args } => {
            let u = &args[0];
            let du = diff_node(u, var)?;
            let outer = match func {
                Func::Sin => call(Func::Cos, u.clone()),
                Func::Cos => neg(call(Func::Sin, u.clone())),
                Func::Tan => add(
                    constant(1.0),
                    pow(call(Func::Tan, u.clone()), constant(2.0)),
                ),
                Func::Exp => call(Func::Exp, u.clone()),
                Func::Log => return Ok(div(du, u.clone())),
                Func::Sqrt => {
                    return Ok(div(du, mul(constant(2.0), call(Func::Sqrt, u.clone()))))
                }
                Func::Tanh => sub(
                    constant(1.0),
                    pow(call(Func::Tanh, u.clone()), constant(2.0)),
                ),
                Func::Abs | Func::Min | Func::Max => {
                    return Err(EvalError::NotDifferentiable(func.name()))
                }
            };
            mul(outer, du)
        }
    })
}

/// Partial derivative of `expr` with respect to input `var`.
pub fn derivative(expr: &Expression, var: usize) -> Result<Expression, EvalError> {
    if var >= expr.input_dim() {
        return Err(EvalError::Dimension {
            expected: expr.input_dim(),
            found: var + 1,
        });
    }
    let root = diff_node(expr.root(), var)?;
    Ok(Expression::from_node(root, expr.inputs().to_vec()))
}

/// All first partial derivatives, one expression per input.
pub fn gradient(expr: &Expression) -> Result<Vec<Expression>, EvalError> {
    (0..expr.input_dim())
        .map(|i| derivative(expr, i))
        .collect()
}
