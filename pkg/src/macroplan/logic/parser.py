"""Parser for the restricted rule language.

Accepts normal rules, facts, one-per-program choice rules with cardinality
bounds, weak constraints with ``[weight@priority, d1, ...]`` tails, integer
comparisons (chains like ``70 <= V <= 80`` desugar to conjunctions), and
``%`` line comments.  ``cont`` heads canonicalize to ``contd``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ParseError, SafetyError
from .syntax import (
    TIME_VAR,
    Arith,
    Atom,
    ChoiceElement,
    ChoiceRule,
    Cmp,
    Compound,
    Not,
    Program,
    Rule,
    Var,
    WeakConstraint,
    is_ground_atom,
    literal_vars,
    positive_vars,
    rule_text,
    term_vars,
)
from .stratify import stratify

_PUNCT = (":-", ":~", "<=", ">=", "!=", "==", "(", ")", "{", "}", "[", "]",
          "<", ">", "=", ",", ";", ":", ".", "@", "+", "-")

_CANONICAL_PREDS = {"cont": "contd"}


@dataclass(frozen=True)
class _Token:
    kind: str  # "ident", "int", or the punctuation itself
    text: str
    line: int
    column: int


def _tokenize(text: str) -> list:
    tokens = []
    line = 1
    col = 1
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "%":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(_Token("int", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(_Token("ident", text[i:j], line, col))
            col += j - i
            i = j
            continue
        for punct in _PUNCT:
            if text.startswith(punct, i):
                tokens.append(_Token(punct, punct, line, col))
                i += len(punct)
                col += len(punct)
                break
        else:
            raise ParseError(f"unexpected character {ch!r}", line, col)
    return tokens


def _is_variable_name(name: str) -> bool:
    return name[0].isupper() or name == TIME_VAR


class _Parser:
    def __init__(self, tokens: list) -> None:
        self.tokens = tokens
        self.pos = 0

    def _peek(self, offset: int = 0):
        idx = self.pos + offset
        return self.tokens[idx] if idx < len(self.tokens) else None

    def _error(self, message: str):
        tok = self._peek()
        if tok is None:
            last = self.tokens[-1] if self.tokens else _Token(".", ".", 1, 1)
            raise ParseError(message + " at end of input", last.line, last.column)
        raise ParseError(message + f", found {tok.text!r}", tok.line, tok.column)

    def _advance(self):
        tok = self._peek()
        if tok is None:
            self._error("unexpected end of input")
        self.pos += 1
        return tok

    def _expect(self, kind: str):
        tok = self._peek()
        if tok is None or tok.kind != kind:
            self._error(f"expected {kind!r}")
        return self._advance()

    def _accept(self, kind: str) -> bool:
        tok = self._peek()
        if tok is not None and tok.kind == kind:
            self.pos += 1
            return True
        return False

    # -- terms ---------------------------------------------------------

    def _parse_int(self) -> int:
        negative = self._accept("-")
        tok = self._expect("int")
        value = int(tok.text)
        return -value if negative else value

    def _parse_term(self):
        tok = self._peek()
        if tok is None:
            self._error("expected a term")
        if tok.kind == "int":
            return self._offset_tail(int(self._advance().text), None)
        if tok.kind == "-":
            self._advance()
            nxt = self._peek()
            if nxt is not None and nxt.kind == "int":
                return -int(self._advance().text)
            name = self._expect("ident").text
            if not _is_variable_name(name):
                self._error("unary minus applies to integers and variables")
            return Arith(name, -1, 0)
        if tok.kind == "ident":
            name = self._advance().text
            if _is_variable_name(name):
                return self._offset_tail(None, name)
            if self._accept("("):
                args = [self._parse_term()]
                while self._accept(","):
                    args.append(self._parse_term())
                self._expect(")")
                for arg in args:
                    if isinstance(arg, Compound):
                        self._error("terms nest at most one level")
                return Compound(name, tuple(args))
            return name
        self._error("expected a term")

    def _offset_tail(self, base_int, var_name):
        # Var +- int becomes Arith; a lone variable stays Var.
        tok = self._peek()
        if tok is not None and tok.kind in ("+", "-"):
            nxt = self._peek(1)
            if nxt is not None and nxt.kind == "int":
                self._advance()
                value = int(self._advance().text)
                offset = value if tok.kind == "+" else -value
                if var_name is None:
                    return base_int + offset
                return Arith(var_name, 1, offset)
        if var_name is None:
            return base_int
        return Var(var_name)

    # -- literals ------------------------------------------------------

    def _parse_atom(self) -> Atom:
        tok = self._expect("ident")
        name = tok.text
        if _is_variable_name(name):
            raise ParseError(f"predicate names are lowercase, found {name!r}",
                             tok.line, tok.column)
        name = _CANONICAL_PREDS.get(name, name)
        args: tuple = ()
        if self._accept("("):
            parsed = [self._parse_term()]
            while self._accept(","):
                parsed.append(self._parse_term())
            self._expect(")")
            args = tuple(parsed)
        return Atom(name, args)

    def _parse_literals(self, stop_kinds: tuple) -> list:
        """Comma-separated literals; each chunk is a list (chains expand)."""
        chunks = [self._parse_literal()]
        while self._accept(","):
            chunks.append(self._parse_literal())
        tok = self._peek()
        if tok is None or tok.kind not in stop_kinds:
            self._error(f"expected one of {stop_kinds}")
        return chunks

    def _parse_literal(self):
        tok = self._peek()
        if tok is None:
            self._error("expected a literal")
        if tok.kind == "ident" and tok.text == "not":
            self._advance()
            return [Not(self._parse_atom())]
        starts_operand = tok.kind in ("int", "-") or (
            tok.kind == "ident" and _is_variable_name(tok.text)
        )
        if starts_operand:
            return self._parse_comparison_chain()
        atom = self._parse_atom()
        nxt = self._peek()
        if nxt is not None and nxt.kind in ("<", "<=", ">", ">=", "=", "==", "!="):
            self._error("comparisons apply to integers and variables only")
        return [atom]

    def _parse_comparison_chain(self) -> list:
        operands = [self._parse_term()]
        ops = []
        while True:
            tok = self._peek()
            if tok is None or tok.kind not in ("<", "<=", ">", ">=", "=", "==", "!="):
                break
            op = self._advance().kind
            ops.append("=" if op == "==" else op)
            operands.append(self._parse_term())
        if not ops:
            self._error("a bare term is not a literal")
        for operand in operands:
            if isinstance(operand, Compound) or isinstance(operand, str):
                self._error("comparisons apply to integers and variables only")
        return [Cmp(operands[i], ops[i], operands[i + 1]) for i in range(len(ops))]

    def _parse_body(self, stop_kinds: tuple) -> tuple:
        out = []
        for chunk in self._parse_literals(stop_kinds):
            out.extend(chunk)
        return tuple(out)

    # -- statements ----------------------------------------------------

    def parse_program(self) -> Program:
        program = Program()
        while self._peek() is not None:
            tok = self._peek()
            if tok.kind == ":~":
                program.weaks.append(self._parse_weak())
            elif tok.kind == "{" or (tok.kind == "int" and self._peek(1) is not None
                                     and self._peek(1).kind == "{"):
                program.choices.append(self._parse_choice())
            else:
                self._parse_rule_into(program)
        return program

    def _parse_rule_into(self, program: Program) -> None:
        head = self._parse_atom()
        if self._accept(":-"):
            body = self._parse_body((".",))
            self._expect(".")
            program.rules.append(Rule(head, body))
            return
        self._expect(".")
        if is_ground_atom(head):
            program.facts.append(head)
        else:
            raise SafetyError(next(iter(literal_vars(head))), rule_text(Rule(head)))

    def _parse_weak(self) -> WeakConstraint:
        self._expect(":~")
        body = self._parse_body((".",))
        self._expect(".")
        self._expect("[")
        weight = self._parse_term()
        self._expect("@")
        priority = self._parse_int()
        discs = []
        while self._accept(","):
            discs.append(self._parse_term())
        self._expect("]")
        return WeakConstraint(body, weight, priority, tuple(discs))

    def _parse_choice(self) -> ChoiceRule:
        lower = 0
        tok = self._peek()
        if tok.kind == "int":
            lower = int(self._advance().text)
        self._expect("{")
        elements = [self._parse_choice_element()]
        while self._accept(";"):
            elements.append(self._parse_choice_element())
        self._expect("}")
        upper = None
        tok = self._peek()
        if tok is not None and tok.kind in ("int", "ident"):
            upper = self._parse_term()
        self._expect(".")
        return ChoiceRule(lower, tuple(elements), upper)

    def _parse_choice_element(self) -> ChoiceElement:
        atom = self._parse_atom()
        condition: tuple = ()
        if self._accept(":"):
            chunks = self._parse_literals((";", "}"))
            flat = []
            for chunk in chunks:
                flat.extend(chunk)
            condition = tuple(flat)
        return ChoiceElement(atom, condition)


def _check_safety(program: Program) -> None:
    for rule in program.rules:
        bound = positive_vars(rule.body)
        bound.add(TIME_VAR)
        for name in literal_vars(rule.head):
            if name not in bound:
                raise SafetyError(name, rule_text(rule))
        for lit in rule.body:
            if isinstance(lit, Atom):
                continue
            for name in literal_vars(lit):
                if name not in bound:
                    raise SafetyError(name, rule_text(rule))
    for weak in program.weaks:
        bound = positive_vars(weak.body)
        bound.add(TIME_VAR)
        names = set()
        for lit in weak.body:
            if not isinstance(lit, Atom):
                names.update(literal_vars(lit))
        names.update(term_vars(weak.weight))
        for disc in weak.discriminators:
            names.update(term_vars(disc))
        for name in names:
            if name not in bound:
                raise SafetyError(name, ":~ " + ", ".join(map(str, weak.body)))
    for choice in program.choices:
        for element in choice.elements:
            bound = positive_vars(element.condition)
            bound.add(TIME_VAR)
            for name in literal_vars(element.atom):
                if name not in bound:
                    raise SafetyError(name, f"choice element {element.atom!r}")


def parse_program(text: str) -> Program:
    """Parse, safety-check, and stratification-check a program."""
    program = _Parser(_tokenize(text)).parse_program()
    _check_safety(program)
    choice_preds = {
        element.atom.pred for choice in program.choices for element in choice.elements
    }
    stratify(program.rules, base_preds=choice_preds)  # raises StratificationError
    return program
