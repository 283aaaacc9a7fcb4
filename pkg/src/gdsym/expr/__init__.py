"""Small computer-algebra kernel: canonical trees, calculus, evaluation."""
from .calculus import FORMAL_ARGS, Lambda, apply_field, diff, differentiate, fn, gradient, substitute
from .core import (
    ONE,
    ZERO,
    ArityError,
    Const,
    Expr,
    ExprError,
    FuncApp,
    LnAbs,
    Power,
    Product,
    Sum,
    Symbol,
    add,
    as_expr,
    clear_denominators,
    const,
    contains_symbol,
    div,
    free_symbols,
    func,
    function_names,
    lnabs,
    mul,
    neg,
    power,
    sub,
    sym,
    symbols,
)
from .numeric import (
    NONZERO,
    PROBABILISTIC_ZERO,
    SYMBOLIC_ZERO,
    Binding,
    UnboundSymbolError,
    ZeroPolicy,
    ZeroVerdict,
    binding,
    evaluate,
    is_zero,
    random_rational,
)
from .parser import ParseError, parse
from .printer import to_string, tree


def simplify(e) -> Expr:
    """Canonical form of ``e``.  Idempotent; construction already canonicalises."""
    if isinstance(e, str):
        return parse(e)
    return as_expr(e)
