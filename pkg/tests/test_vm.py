import pytest

from oraclediag.cylinder import all_encodings
from oraclediag.numbering import string_to_nat
from oraclediag.programs import (
    bsgs,
    cdh_echo,
    const_guess,
    invalid_guess,
    linear_search,
    random_guess,
)
from oraclediag.vm import (
    OP_ADD,
    OP_COIN,
    OP_EQ,
    OP_INPUT,
    OP_OUT_INT,
    OP_OUT_REG,
    CoinsExhausted,
    GenericProgram,
    GroupOracle,
    InvalidEncoding,
    ProgramError,
    coin_tapes,
    format_program,
    parse_program,
    run_generic,
    run_generic_reference,
    run_symbolic,
)

E2 = all_encodings(2)
E3 = all_encodings(3)
SIGMA = E3[12345]


def test_const_output_no_queries():
    res = run_generic(const_guess(0), 5, SIGMA, (1, 3))
    assert res.output == 0 and res.queries == 0


def test_add_then_output_register():
    prog = GenericProgram(
        "double", ((OP_INPUT, 1), (OP_ADD, 0, 0), (OP_OUT_REG, 1)), n_inputs=2
    )
    res = run_generic(prog, 5, SIGMA, (1, 3))
    # sigma(3 + 3 mod 5) = sigma(1), reported as a natural
    assert res.output == string_to_nat(SIGMA.encode(1))
    assert res.queries == 1


def test_linear_search_trace():
    prog = linear_search(2)
    res = run_generic(prog, 5, SIGMA, (1, 2))
    assert res.output == 2
    assert res.queries <= 2


def test_invalid_guess_outputs_modulus():
    assert run_generic(invalid_guess(), 5, SIGMA, (1, 0)).output == 5


def test_output_mod_reduction():
    prog = linear_search(2)
    # at N=2 the probe k=2 matches x=0 and must answer 2 mod 2 = 0
    sigma = all_encodings(2)[0]
    assert run_generic(prog, 2, sigma, (1, 0)).output == 0


class TestValidation:
    def test_register_read_before_write(self):
        with pytest.raises(ProgramError):
            GenericProgram("bad", ((OP_OUT_REG, 0),), n_inputs=1)

    def test_backward_branch_rejected(self):
        with pytest.raises(ProgramError):
            GenericProgram(
                "bad",
                ((OP_INPUT, 0), (OP_EQ, 0, 0, 1), (OP_OUT_INT, 0, False)),
                n_inputs=1,
            )

    def test_target_out_of_range(self):
        with pytest.raises(ProgramError):
            GenericProgram(
                "bad",
                ((OP_INPUT, 0), (OP_EQ, 0, 0, 9), (OP_OUT_INT, 0, False)),
                n_inputs=1,
            )

    def test_must_end_with_output(self):
        with pytest.raises(ProgramError):
            GenericProgram("bad", ((OP_INPUT, 0),), n_inputs=1)

    def test_empty_program(self):
        with pytest.raises(ProgramError):
            GenericProgram("bad", (), n_inputs=1)

    def test_input_index_range(self):
        with pytest.raises(ProgramError):
            GenericProgram("bad", ((OP_INPUT, 2), (OP_OUT_INT, 0, False)), n_inputs=2)


def test_coin_exhaustion():
    prog = GenericProgram(
        "flip",
        ((OP_COIN, 2), (OP_OUT_INT, 0, False), (OP_OUT_INT, 1, False)),
        n_inputs=1,
        coin_count=1,
    )
    assert run_generic(prog, 2, E2[0], (0,), "1").output == 1
    with pytest.raises(CoinsExhausted):
        run_generic(prog, 2, E2[0], (0,), "")


def test_random_guess_covers_all_tapes():
    prog = random_guess(2)
    outs = {run_generic(prog, 5, SIGMA, (1, 0), tape).output for tape in coin_tapes(2)}
    assert outs == {0, 1, 2, 3}
    assert all(
        run_generic(prog, 5, SIGMA, (1, 0), tape).queries == 0 for tape in coin_tapes(2)
    )


@pytest.mark.parametrize("n", [1, 2, 3])
def test_oracle_soundness_exhaustive(n):
    """add/inv must realize the group law for every encoding of width <= 3."""
    N = 2**n
    for sigma in all_encodings(n):
        oracle = GroupOracle(N, sigma)
        for x in range(N):
            assert oracle.inv(sigma.encode(x)) == sigma.encode(-x % N)
            for y in range(N):
                assert oracle.add(sigma.encode(x), sigma.encode(y)) == sigma.encode(
                    (x + y) % N
                )


def test_group_oracle_rejects_foreign_strings():
    sigma = E2[5]
    oracle = GroupOracle(3, sigma)  # image is sigma({0,1,2}) only
    outside = sigma.encode(3)
    with pytest.raises(InvalidEncoding):
        oracle.decode(outside)
    with pytest.raises(InvalidEncoding):
        oracle.add(outside, sigma.encode(0))


@pytest.mark.parametrize(
    "prog",
    [const_guess(0), invalid_guess(), linear_search(2), bsgs(2, 2), cdh_echo()],
    ids=lambda p: p.name,
)
def test_fast_interpreter_matches_reference_width2(prog):
    """The handle simulation must agree with the string-level interpreter."""
    for sigma in E2:
        for N in (2, 3, 4):
            values = range(N)
            hiddens = (
                [(x,) for x in values]
                if prog.n_inputs == 2
                else [(x, y) for x in values for y in values]
            )
            for hidden in hiddens:
                inputs = (1 % N, *hidden)
                for coins in coin_tapes(prog.coin_count):
                    fast = run_generic(prog, N, sigma, inputs, coins)
                    ref = run_generic_reference(prog, N, sigma, inputs, coins)
                    assert (fast.output, fast.queries) == (ref.output, ref.queries)


def test_symbolic_run_matches_concrete():
    prog = linear_search(3)
    for N in (3, 5):
        for x in range(N):
            kind, value, queries = run_symbolic(prog, N, (1 % N, x))
            res = run_generic(prog, N, SIGMA if N == 5 else E2[0], (1 % N, x))
            assert kind == "int" and value == res.output and queries == res.queries


def test_declared_query_bounds():
    m, n = 2, 3
    i_max = 2**n // m + 1
    cases = [
        (const_guess(7), 0),
        (linear_search(4), 4),
        (random_guess(3), 0),
        (bsgs(m, n), m + (m - 1) + (i_max - 1)),
    ]
    for prog, declared in cases:
        seen = 0
        for x in range(5):
            for coins in coin_tapes(prog.coin_count):
                seen = max(seen, run_generic(prog, 5, SIGMA, (1, x), coins).queries)
        assert seen == declared


class TestAssemblyFormat:
    @pytest.mark.parametrize(
        "prog",
        [const_guess(3), linear_search(2), random_guess(2), bsgs(2, 3), invalid_guess()],
        ids=lambda p: p.name,
    )
    def test_roundtrip(self, prog):
        again = parse_program(format_program(prog))
        assert again == prog

    def test_parse_minimal(self):
        prog = parse_program("inputs 2\nout_int 0\n")
        assert run_generic(prog, 3, E2[0], (1, 2)).output == 0

    def test_parse_out_int_variants(self):
        prog = parse_program("inputs 1\nout_int N\n")
        assert prog.instructions == ((OP_OUT_INT, None, False),)
        prog = parse_program("inputs 1\nout_int 7 mod\n")
        assert prog.instructions == ((OP_OUT_INT, 7, True),)

    def test_parse_errors(self):
        with pytest.raises(ProgramError):
            parse_program("inputs 1\nfrobnicate 1\n")
        with pytest.raises(ProgramError):
            parse_program("out_int 0\n")  # missing inputs directive
        with pytest.raises(ProgramError):
            parse_program("inputs 1\nadd x y\n")
