import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import random_pdg, slice_reach_oracle
from vetra.cpg import NodeKind, parse_translation_unit
from vetra.slicing import (
    BoundaryReason,
    Clue,
    Direction,
    GraphView,
    NoStatementAtLine,
    anchor_clue,
    bidirectional_reach,
    expand_to_statement_boundary,
    slice_bidirectional,
    slice_forward,
)


def test_clue_validation():
    with pytest.raises(ValueError):
        Clue(1, "x = 1;", "reason", 1.5)
    with pytest.raises(ValueError):
        Clue(1, "   ", "reason", 0.5)
    assert Clue(1, "x = 1;", "reason", 0.1).confidence == 0.1


class TestAnchorClue:
    def test_fixture_anchor_and_variables(self, cq_index):
        cpg = cq_index.load_cpg("fpga/conn.c")
        fn = cpg.functions["mlx5_fpga_conn_create_cq"]
        clue = Clue(460, "in = kvzalloc(inlen, GFP_KERNEL);", "size may wrap", 0.7)
        anchor, variables = anchor_clue(cpg, fn, clue)
        assert cpg.node(anchor).line == 460
        assert variables == ["in", "inlen", "GFP_KERNEL"]

    def test_blank_line_raises(self, cq_index):
        cpg = cq_index.load_cpg("fpga/conn.c")
        fn = cpg.functions["mlx5_fpga_conn_create_cq"]
        with pytest.raises(NoStatementAtLine):
            anchor_clue(cpg, fn, Clue(457, "filler", "x", 0.5))  # blank line

    def test_line_outside_function_raises(self, cq_index):
        cpg = cq_index.load_cpg("fpga/conn.c")
        fn = cpg.functions["mlx5_fpga_conn_create_cq"]
        with pytest.raises(NoStatementAtLine):
            anchor_clue(cpg, fn, Clue(100, "padding", "x", 0.5))

    def test_mid_expression_line_anchors_enclosing_statement(self, gre_index):
        cpg = gre_index.load_cpg("ipv6/ip6_gre.c")
        fn = cpg.functions["ip6gre_err"]
        clue = Clue(397, "*(((__be32 *)p) + (grehlen / 4) - 1) : 0,", "ptr math", 0.8)
        anchor, variables = anchor_clue(cpg, fn, clue)
        node = cpg.node(anchor)
        assert node.line == 395
        assert node.end_line == 398
        assert "t" in variables and "p" in variables and "grehlen" in variables

    def test_one_line_if_tiebreak(self):
        src = "void f(int x)\n{\n\tint y;\n\tif (x) y = 1;\n}\n"
        cpg = parse_translation_unit(src, "t.c")
        fn = cpg.functions["f"]
        anchor, _ = anchor_clue(cpg, fn, Clue(4, "if (x) y = 1;", "r", 0.5))
        assert cpg.node(anchor).kind is NodeKind.CONTROL_STRUCTURE


class TestStatementBoundary:
    def test_statement_is_fixed_point(self, cq_index):
        cpg = cq_index.load_cpg("fpga/conn.c")
        for stmt in cpg.statements():
            assert expand_to_statement_boundary(cpg, stmt.id) == stmt.id

    def test_identifier_in_nested_call_walks_up(self, cq_index):
        cpg = cq_index.load_cpg("core/cq.c")
        ident = next(n for n in cpg.nodes.values()
                     if n.kind is NodeKind.IDENTIFIER and n.line == 93)
        stmt = expand_to_statement_boundary(cpg, ident.id)
        assert cpg.node(stmt).line == 93
        assert cpg.node(stmt).kind in (NodeKind.STATEMENT,)

    def test_idempotent_everywhere(self, gre_index):
        cpg = gre_index.load_cpg("ipv6/ip6_tunnel.c")
        for node in cpg.nodes.values():
            once = expand_to_statement_boundary(cpg, node.id)
            assert expand_to_statement_boundary(cpg, once) == once


class TestBidirectionalSlice:
    def test_fixture_backward_and_forward_chains(self, cq_index):
        cpg = cq_index.load_cpg("fpga/conn.c")
        fn = cpg.functions["mlx5_fpga_conn_create_cq"]
        clue = Clue(460, "in = kvzalloc(inlen, GFP_KERNEL);", "r", 0.7)
        anchor, variables = anchor_clue(cpg, fn, clue)
        result = slice_bidirectional(cpg, anchor, variables, 10)
        lines = {cpg.node(s.node).line for s in result.steps}
        assert 458 in lines      # backward: size computation
        assert 481 in lines      # forward: cross-file call consuming inlen
        assert result.steps[0].node == anchor
        assert result.steps[0].hop == 0

    def test_isolated_anchor_slice_is_anchor_plus_guards(self):
        src = "void f(int p)\n{\n\tint a;\n\ta = 5;\n}\n"
        cpg = parse_translation_unit(src, "t.c")
        fn = cpg.functions["f"]
        anchor, variables = anchor_clue(cpg, fn, Clue(4, "a = 5;", "r", 0.5))
        result = slice_bidirectional(cpg, anchor, variables, 10)
        assert result.node_ids() == {anchor}

    def test_depth_limit_validation(self, cq_index):
        cpg = cq_index.load_cpg("fpga/conn.c")
        with pytest.raises(ValueError):
            slice_bidirectional(cpg, 1, ["x"], 0)

    @pytest.mark.parametrize("seed", range(100))
    def test_matches_brute_force_closure(self, seed):
        rng = random.Random(seed)
        cpg, data_edges, control_edges = random_pdg(rng, max_nodes=50)
        anchor = rng.randrange(len(cpg.nodes))
        variables = rng.sample(["a", "b", "c", "d", "e", "buf", "len", "ptr"],
                               rng.randint(1, 3))
        depth = rng.choice([1, 2, 3, 5, 10])
        steps = bidirectional_reach(GraphView(cpg), anchor, variables, depth)
        mine = {s.node: s.hop for s in steps}
        expected = slice_reach_oracle(data_edges, control_edges, anchor,
                                      variables, depth)
        assert mine == expected


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(min_value=0, max_value=10_000),
       depth=st.integers(min_value=1, max_value=10))
def test_depth_bound_and_hop_monotonicity(seed, depth):
    """No step exceeds the depth limit, and every positive hop has a
    one-smaller neighbor over dataflow edges (or a guard at the same hop)."""
    rng = random.Random(seed)
    cpg, data_edges, control_edges = random_pdg(rng, max_nodes=40)
    anchor = rng.randrange(len(cpg.nodes))
    variables = rng.sample(["a", "b", "c", "d", "e"], rng.randint(1, 2))
    steps = bidirectional_reach(GraphView(cpg), anchor, variables, depth)
    hops = {s.node: s.hop for s in steps}
    neighbors = {}
    for src, dst, _var in data_edges:
        neighbors.setdefault(src, set()).add(dst)
        neighbors.setdefault(dst, set()).add(src)
    guarded = {}
    for guard, stmt in control_edges:
        guarded.setdefault(guard, set()).add(stmt)
    for step in steps:
        assert 0 <= step.hop <= depth
        if step.hop == 0:
            continue
        over_data = any(hops.get(n) == step.hop - 1
                        for n in neighbors.get(step.node, ()))
        as_guard = any(hops.get(s) == step.hop for s in guarded.get(step.node, ()))
        assert over_data or as_guard


class TestForwardSlice:
    def test_parameter_flows_to_return(self):
        src = "int f(int a)\n{\n\tint b;\n\tb = a + 1;\n\treturn b;\n}\n"
        cpg = parse_translation_unit(src, "t.c")
        result = slice_forward(cpg, ["a"], 10)
        codes = {cpg.node(s.node).code for s in result.steps}
        assert "return b;" in codes

    def test_disjoint_entry_vars_give_entry_only(self):
        src = "int f(int a)\n{\n\treturn a;\n}\n"
        cpg = parse_translation_unit(src, "t.c")
        result = slice_forward(cpg, ["nothing"], 10)
        assert result.node_ids() == {cpg.functions["f"]}

    def test_fixture_callee_forward_slice(self, cq_index):
        cpg = cq_index.load_cpg("core/cq.c")
        result = slice_forward(cpg, ["in", "inlen"], 10)
        lines = {cpg.node(s.node).line for s in result.steps}
        assert 105 in lines  # the command-exec consuming both arguments

    def test_multi_function_file_requires_function_id(self, gre_index):
        cpg = gre_index.load_cpg("linux/skbuff.h")
        with pytest.raises(ValueError):
            slice_forward(cpg, ["skb"], 10)
        fn = cpg.functions["pskb_may_pull"]
        result = slice_forward(cpg, ["skb", "len"], 10, function=fn)
        lines = {cpg.node(s.node).line for s in result.steps}
        assert 1969 in lines and 1973 in lines


class TestBoundaryVariables:
    def test_parameter_boundary(self, gre_index):
        cpg = gre_index.load_cpg("ipv6/ip6_gre.c")
        fn = cpg.functions["ip6gre_err"]
        clue = Clue(373, "__be16 *p = (__be16 *)(skb->data + offset);", "r", 0.7)
        anchor, variables = anchor_clue(cpg, fn, clue)
        result = slice_bidirectional(cpg, anchor, variables, 10)
        params = {b.variable for b in result.boundary
                  if b.reason is BoundaryReason.PARAMETER}
        assert "offset" in params and "skb" in params

    def test_external_call_return_and_arguments(self, cq_index):
        cpg = cq_index.load_cpg("fpga/conn.c")
        fn = cpg.functions["mlx5_fpga_conn_create_cq"]
        clue = Clue(460, "in = kvzalloc(inlen, GFP_KERNEL);", "r", 0.7)
        anchor, variables = anchor_clue(cpg, fn, clue)
        result = slice_bidirectional(cpg, anchor, variables, 10)
        returns = {(b.variable, cpg.node(b.site).line) for b in result.boundary
                   if b.reason is BoundaryReason.EXTERNAL_CALL_RETURN}
        args = {(b.variable, cpg.node(b.site).line) for b in result.boundary
                if b.reason is BoundaryReason.EXTERNAL_CALL_ARGUMENT}
        assert ("in", 460) in returns
        assert ("inlen", 460) in args

    def test_literal_only_computation_has_no_boundary(self):
        src = "void f(void)\n{\n\tint a;\n\ta = 5;\n}\n"
        cpg = parse_translation_unit(src, "t.c")
        fn = cpg.functions["f"]
        anchor, variables = anchor_clue(cpg, fn, Clue(4, "a = 5;", "r", 0.5))
        result = slice_bidirectional(cpg, anchor, variables, 10)
        assert result.boundary == []

    def test_global_boundary(self):
        src = "void f(void)\n{\n\tint a;\n\ta = LIMIT;\n}\n"
        cpg = parse_translation_unit(src, "t.c")
        fn = cpg.functions["f"]
        anchor, variables = anchor_clue(cpg, fn, Clue(4, "a = LIMIT;", "r", 0.5))
        result = slice_bidirectional(cpg, anchor, variables, 10)
        globals_ = {b.variable for b in result.boundary
                    if b.reason is BoundaryReason.GLOBAL}
        assert globals_ == {"LIMIT"}
