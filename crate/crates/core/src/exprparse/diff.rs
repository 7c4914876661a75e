use super::{BinOp, Expr, Func};

fn num(e: &Expr) -> Option<f64> {
    match e {
        Expr::Num(x) => Some(*x),
        _ => None,
    }
}

fn neg(a: Expr) -> Expr {
    match a {
        Expr::Num(0.0) => Expr::Num(0.0),
        Expr::Neg(inner) => *inner,
        a => Expr::Neg(Box::new(a)),
    }
}

fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
    Expr::Bin(op, Box::new(a), Box::new(b))
}

fn add(a: Expr, b: Expr) -> Expr {
    match (num(&a), num(&b)) {
        (Some(x), Some(y)) => Expr::Num(x + y),
        (Some(0.0), _) => b,
        (_, Some(0.0)) => a,
        _ => bin(BinOp::Add, a, b),
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    match (num(&a), num(&b)) {
        (Some(x), Some(y)) => Expr::Num(x - y),
        (Some(0.0), _) => neg(b),
        (_, Some(0.0)) => a,
        _ => bin(BinOp::Sub, a, b),
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    match (num(&a), num(&b)) {
        (Some(x), Some(y)) => Expr::Num(x * y),
        (Some(x), _) | (_, Some(x)) if x == 0.0 => Expr::Num(0.0),
        (Some(1.0), _) => b,
        (_, Some(1.0)) => a,
        _ => bin(BinOp::Mul, a, b),
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    match (num(&a), num(&b)) {
        (Some(x), Some(y)) if y != 0.0 => Expr::Num(x / y),
        (Some(0.0), _) => Expr::Num(0.0),
        (_, Some(1.0)) => a,
        _ => bin(BinOp::Div, a, b),
    }
}

fn pow(a: Expr, b: Expr) -> Expr {
    match num(&b) {
        Some(0.0) => Expr::Num(1.0),
        Some(1.0) => a,
        _ => bin(BinOp::Pow, a, b),
    }
}

fn call(f: Func, args: Vec<Expr>) -> Expr {
    Expr::Call(f, args)
}

fn depends_on(e: &Expr, var: usize) -> bool {
    match e {
        Expr::Num(_) => false,
        Expr::Var(i) => *i == var,
        Expr::Neg(a) => depends_on(a, var),
        Expr::Bin(_, a, b) => depends_on(a, var) || depends_on(b, var),
        Expr::Call(_, args) => args.iter().any(|a| depends_on(a, var)),
    }
}

pub(super) fn derivative(e: &Expr, var: usize) -> Expr {
    if !depends_on(e, var) {
        return Expr::Num(0.0);
    }
    let d = |x: &Expr| derivative(x, var);
    match e {
        Expr::Num(_) => Expr::Num(0.0),
        Expr::Var(_) => Expr::Num(1.0),
        Expr::Neg(a) => neg(d(a)),
        Expr::Bin(op, a, b) => {
            let (a, b) = (a.as_ref().clone(), b.as_ref().clone());
            match op {
                BinOp::Add => add(d(&a), d(&b)),
                BinOp::Sub => sub(d(&a), d(&b)),
                BinOp::Mul => add(mul(d(&a), b.clone()), mul(a.clone(), d(&b))),
                BinOp::Div => {
                    if !depends_on(&b, var) {
                        return div(d(&a), b);
                    }
                    div(
                        sub(mul(d(&a), b.clone()), mul(a.clone(), d(&b))),
                        pow(b, Expr::Num(2.0)),
                    )
                }
                BinOp::Pow => {
                    if !depends_on(&b, var) {
                        let reduced = match num(&b) {
                            Some(y) => Expr::Num(y - 1.0),
                            None => sub(b.clone(), Expr::Num(1.0)),
                        };
                        return mul(mul(b, pow(a.clone(), reduced)), d(&a));
                    }
                    let ln_a = call(Func::Log, vec![a.clone()]);
                    let inner = add(mul(d(&b), ln_a), div(mul(b.clone(), d(&a)), a.clone()));
                    mul(pow(a, b), inner)
                }
            }
        }
        Expr::Call(f, args) => {
            let a = args[0].clone();
            match f {
                Func::Sqrt => div(d(&a), mul(Expr::Num(2.0), call(Func::Sqrt, vec![a]))),
                Func::Abs => mul(call(Func::Sign, vec![a.clone()]), d(&a)),
                Func::Exp => mul(call(Func::Exp, vec![a.clone()]), d(&a)),
                Func::Log => div(d(&a), a),
                Func::Sign => Expr::Num(0.0),
                Func::Min | Func::Max => {
                    let b = args[1].clone();
                    let (da, db) = (d(&a), d(&b));
                    // min(a, b) = (a + b − |a − b|)/2, max with `+`.
                    let s = mul(call(Func::Sign, vec![sub(a, b)]), sub(da.clone(), db.clone()));
                    let sum = add(da, db);
                    let twice = if *f == Func::Min { sub(sum, s) } else { add(sum, s) };
                    div(twice, Expr::Num(2.0))
                }
            }
        }
    }
}
