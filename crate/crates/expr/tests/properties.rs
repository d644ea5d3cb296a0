use proptest::prelude::*;
use uq_expr::{gradient, parse, BinOp, Expression, Func, Node};

const NAMES: [&str; 3] = ["a", "b", "c"];

fn names() -> Vec<String> {
    NAMES.iter().map(|s| s.to_string()).collect()
}

fn any_tree() -> impl Strategy<Value = Node> {
    let leaf = prop_oneof![
        (-5.0f64..5.0).prop_map(|c| Node::Const((c * 100.0).round() / 100.0)),
        (0usize..3).prop_map(Node::Var),
    ];
    leaf.prop_recursive(5, 40, 2, |inner| {
        let ops = prop_oneof![
            Just(BinOp::Add),
            Just(BinOp::Sub),
            Just(BinOp::Mul),
            Just(BinOp::Div),
            Just(BinOp::Pow),
        ];
        let funcs = prop::sample::select(Func::ALL.to_vec());
        prop_oneof![
            inner.clone().prop_map(|u| Node::Neg(Box::new(u))),
            (ops, inner.clone(), inner.clone()).prop_map(|(op, l, r)| Node::Binary {
                op,
                lhs: Box::new(l),
                rhs: Box::new(r),
            }),
            (funcs, inner.clone(), inner).prop_map(|(func, a, b)| Node::Call {
                func,
                args: if func.arity() == 2 { vec![a, b] } else { vec![a] },
            }),
        ]
    })
}

// Smooth trees whose derivatives are well defined on the positive orthant.
fn smooth_tree() -> impl Strategy<Value = Node> {
    let leaf = prop_oneof![
        (0.5f64..2.0).prop_map(|c| Node::Const((c * 100.0).round() / 100.0)),
        (0usize..3).prop_map(Node::Var),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        let ops = prop_oneof![Just(BinOp::Add), Just(BinOp::Mul), Just(BinOp::Sub)];
        let funcs = prop::sample::select(vec![Func::Sin, Func::Cos, Func::Tanh]);
        prop_oneof![
            inner.clone().prop_map(|u| Node::Neg(Box::new(u))),
            (ops, inner.clone(), inner.clone()).prop_map(|(op, l, r)| Node::Binary {
                op,
                lhs: Box::new(l),
                rhs: Box::new(r),
            }),
            (funcs, inner.clone()).prop_map(|(func, a)| Node::Call {
                func,
                args: vec![a]
            }),
            inner.clone().prop_map(|u| Node::Call {
                func: Func::Exp,
                args: vec![Node::Call { func: Func::Sin, args: vec![u] }],
            }),
            inner.prop_map(|u| Node::Binary {
                op: BinOp::Pow,
                lhs: Box::new(Node::Binary {
                    op: BinOp::Add,
                    lhs: Box::new(Node::Const(2.0)),
                    rhs: Box::new(Node::Call { func: Func::Sin, args: vec![u] }),
                }),
                rhs: Box::new(Node::Var(1)),
            }),
        ]
    })
}

proptest! {
    #[test]
    fn printing_then_parsing_is_identity(tree in any_tree()) {
        let expr = Expression::from_node(tree, names());
        let text = expr.to_string();
        let reparsed = parse(&text, &NAMES).unwrap();
        prop_assert_eq!(reparsed.root(), expr.root(), "text: {}", text);
    }

    #[test]
    fn symbolic_gradient_matches_central_differences(
        tree in smooth_tree(),
        x in prop::array::uniform3(0.3f64..2.0),
    ) {
        let expr = Expression::from_node(tree, names());
        let grad = gradient(&expr).unwrap();
        for (i, g) in grad.iter().enumerate() {
            let h = 1e-6;
            let mut xp = x;
            let mut xm = x;
            xp[i] += h;
            xm[i] -= h;
            let fd = (expr.eval(&xp).unwrap() - expr.eval(&xm).unwrap()) / (2.0 * h);
            let exact = g.eval(&x).unwrap();
            prop_assert!(
                (exact - fd).abs() <= 1e-5 * (1.0 + exact.abs()),
                "d/d{} of {}: symbolic {} fd {}", NAMES[i], expr, exact, fd
            );
        }
    }
}
