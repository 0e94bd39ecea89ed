"""Control-flow graph construction over an esprima AST.

One graph component is built per function (declarations, expressions,
arrows, class methods) and one for top-level code when the program has any
executable top-level statement. A program made only of function declarations
therefore has exactly one component per function.

Each component gets an entry and an exit node; every other node has at least
one successor. Branching constructs give a node an extra successor:

* ``if``, ``while``, ``do``/``while``, ``for``, ``for``/``in``, ``for``/``of``
* each ``case`` with a test
* ``catch``
* ``?:``, ``&&``, ``||`` (modelled as a diamond after the owning statement)

``for (;;)`` is treated like any other loop and keeps its exit edge.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import ParseError

_FUNCTION_TYPES = {"FunctionDeclaration", "FunctionExpression", "ArrowFunctionExpression"}
_LOOP_TYPES = {"WhileStatement", "DoWhileStatement", "ForStatement", "ForInStatement", "ForOfStatement"}


@dataclass(frozen=True)
class CfgSummary:
    edges: int
    nodes: int
    components: int
    logical_lines: int = 0
    params: int = 0
    per_component: tuple[int, ...] = ()

    @property
    def cyclomatic(self) -> int:
        return self.edges + 2 * self.components - self.nodes


@dataclass
class _Frame:
    kind: str  # "loop" | "switch" | "label"
    labels: frozenset
    breaks: list = field(default_factory=list)
    continues: list = field(default_factory=list)


def _children(node):
    for value in vars(node).values():
        if isinstance(value, list):
            for item in value:
                if hasattr(item, "type"):
                    yield item
        elif hasattr(value, "type"):
            yield value


class _Builder:
    def __init__(self):
        self.n_nodes = 0
        self.edges: list[tuple[int, int]] = []
        self.logical_lines = 0
        self.params = 0
        self.pending: list = []
        self.component_nodes: list[tuple[int, int]] = []  # (first node id, last node id)

    # graph primitives

    def node(self) -> int:
        self.n_nodes += 1
        return self.n_nodes - 1

    def link(self, preds, target: int) -> None:
        for p in preds:
            self.edges.append((p, target))

    # components

    def build_program(self, program) -> None:
        body = program.body
        if any(s.type not in ("FunctionDeclaration", "EmptyStatement") for s in body):
            self._component(body, is_expression=False)
        else:
            for s in body:
                self._count_statement(s)
                if s.type == "FunctionDeclaration":
                    self._enqueue(s)
        while self.pending:
            fn = self.pending.pop(0)
            if fn.body.type == "BlockStatement":
                self._component(fn.body.body, is_expression=False)
            else:
                self._component(fn.body, is_expression=True)

    def _component(self, body, is_expression: bool) -> None:
        first = self.n_nodes
        entry = self.node()
        exit_ = self.node()
        self._exit = exit_
        self._frames: list[_Frame] = []
        if is_expression:
            head, tail = self._simple(body, [entry])
            exits = [tail]
        else:
            exits = self._seq(body, [entry])
        self.link(exits, exit_)
        self.component_nodes.append((first, self.n_nodes))

    def _enqueue(self, fn) -> None:
        self.params += len(fn.params)
        self.pending.append(fn)

    # expressions

    def _decisions(self, expr, tail: int) -> int:
        if expr is None:
            return tail
        stack = [expr]
        while stack:
            cur = stack.pop()
            kind = cur.type
            if kind in _FUNCTION_TYPES:
                self._enqueue(cur)
                continue
            if kind in ("LogicalExpression", "ConditionalExpression"):
                branch = self.node()
                join = self.node()
                self.link([tail], branch)
                self.link([branch], join)
                self.link([tail], join)
                tail = join
            stack.extend(reversed(list(_children(cur))))
        return tail

    def _simple(self, expr, preds) -> tuple[int, int]:
        head = self.node()
        self.link(preds, head)
        return head, self._decisions(expr, head)

    # statements

    def _seq(self, stmts, preds) -> list[int]:
        for s in stmts:
            preds = self._stmt(s, preds)
        return preds

    def _count_statement(self, s) -> None:
        if s.type not in ("BlockStatement", "EmptyStatement"):
            self.logical_lines += 1

    def _frame_for_break(self, label) -> _Frame:
        for frame in reversed(self._frames):
            if label is None and frame.kind in ("loop", "switch"):
                return frame
            if label is not None and label in frame.labels:
                return frame
        raise ParseError(f"break target not found: {label}")

    def _frame_for_continue(self, label) -> _Frame:
        for frame in reversed(self._frames):
            if frame.kind == "loop" and (label is None or label in frame.labels):
                return frame
        raise ParseError(f"continue target not found: {label}")

    def _stmt(self, s, preds, labels: frozenset = frozenset()) -> list[int]:
        self._count_statement(s)
        kind = s.type

        if kind in ("ExpressionStatement", "VariableDeclaration", "ClassDeclaration", "DebuggerStatement"):
            return [self._simple(s, preds)[1]]
        if kind == "EmptyStatement":
            return preds
        if kind == "BlockStatement":
            return self._seq(s.body, preds)
        if kind == "FunctionDeclaration":
            self._enqueue(s)
            return preds
        if kind in ("ReturnStatement", "ThrowStatement"):
            _, tail = self._simple(s.argument, preds)
            self.link([tail], self._exit)
            return []
        if kind == "IfStatement":
            _, tail = self._simple(s.test, preds)
            exits = self._stmt(s.consequent, [tail])
            if s.alternate is not None:
                exits = exits + self._stmt(s.alternate, [tail])
            else:
                exits = exits + [tail]
            return exits
        if kind == "BreakStatement":
            n = self._simple(None, preds)[1]
            self._frame_for_break(s.label.name if s.label else None).breaks.append(n)
            return []
        if kind == "ContinueStatement":
            n = self._simple(None, preds)[1]
            self._frame_for_continue(s.label.name if s.label else None).continues.append(n)
            return []
        if kind == "LabeledStatement":
            inner = labels | {s.label.name}
            if s.body.type in _LOOP_TYPES:
                self.logical_lines -= 1  # the loop itself is counted below
                return self._stmt(s.body, preds, inner)
            frame = _Frame("label", inner)
            self._frames.append(frame)
            exits = self._stmt(s.body, preds)
            self._frames.pop()
            return exits + frame.breaks
        if kind in _LOOP_TYPES:
            return self._loop(s, preds, labels)
        if kind == "SwitchStatement":
            return self._switch(s, preds, labels)
        if kind == "TryStatement":
            return self._try(s, preds)
        if kind == "WithStatement":
            _, tail = self._simple(s.object, preds)
            return self._stmt(s.body, [tail])
        raise ParseError(f"unsupported syntax: {kind}")

    def _loop(self, s, preds, labels) -> list[int]:
        frame = _Frame("loop", labels)
        kind = s.type
        if kind == "DoWhileStatement":
            head = self.node()
            self.link(preds, head)
            self._frames.append(frame)
            body_exits = self._stmt(s.body, [head])
            self._frames.pop()
            _, tail = self._simple(s.test, body_exits + frame.continues)
            self.link([tail], head)
            return [tail] + frame.breaks

        if kind == "ForStatement":
            if s.init is not None:
                preds = [self._simple(s.init, preds)[1]]
            head, tail = self._simple(s.test, preds)
        else:
            head, tail = self._simple(s.right if kind != "WhileStatement" else s.test, preds)
            if kind != "WhileStatement":
                tail = self._decisions(s.left, tail)

        self._frames.append(frame)
        body_exits = self._stmt(s.body, [tail])
        self._frames.pop()
        back = body_exits + frame.continues
        if kind == "ForStatement" and s.update is not None:
            back = [self._simple(s.update, back)[1]]
        self.link(back, head)
        return [tail] + frame.breaks

    def _switch(self, s, preds, labels) -> list[int]:
        _, disc = self._simple(s.discriminant, preds)
        frame = _Frame("switch", labels)
        self._frames.append(frame)
        prev: list[int] = []
        has_default = False
        for case in s.cases:
            entry = self.node()
            self.link([disc], entry)
            self.link(prev, entry)
            if case.test is None:
                has_default = True
            tail = self._decisions(case.test, entry)
            prev = self._seq(case.consequent, [tail])
        self._frames.pop()
        return prev + frame.breaks + ([] if has_default else [disc])

    def _try(self, s, preds) -> list[int]:
        head = self.node()
        self.link(preds, head)
        exits = self._stmt(s.block, [head])
        if s.handler is not None:
            catch = self.node()
            self.link([head], catch)
            exits = exits + self._stmt(s.handler.body, [catch])
        if s.finalizer is not None:
            exits = self._stmt(s.finalizer, exits)
        return exits


def _count_components(n_nodes: int, edges) -> int:
    parent = list(range(n_nodes))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in edges:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
    return len({find(i) for i in range(n_nodes)})


def summarize_program(program) -> CfgSummary:
    """Build the CFG of a parsed esprima ``Program`` and summarize it."""
    builder = _Builder()
    builder.build_program(program)
    edges = builder.edges
    q = _count_components(builder.n_nodes, edges)
    per_component = []
    for lo, hi in builder.component_nodes:
        e = sum(1 for a, _ in edges if lo <= a < hi)
        per_component.append(e - (hi - lo) + 2)
    return CfgSummary(
        edges=len(edges),
        nodes=builder.n_nodes,
        components=q,
        logical_lines=builder.logical_lines,
        params=builder.params,
        per_component=tuple(per_component),
    )


def build_cfg_summary(source: str) -> CfgSummary:
    from .halstead import parse

    return summarize_program(parse(source))
