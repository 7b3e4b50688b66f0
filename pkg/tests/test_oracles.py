import itertools
import random

import pytest

from qsl.kernel import CNOT, ElementarySystem, apply_circuit, truth_table
from qsl.oracles import (CATALOG_GROUPS, SHOR_ELEMENTS, OracleError, bits_of, bv_oracle,
                         comparator_circuit, dj3_catalog, dj_decision_oracle, dj_promise_oracle,
                         grover_oracle, majority_oracle, shor15_multiplier, simon_basis,
                         simon_oracle)


def computational_action(spec, x, answer=0):
    """Run the oracle on basis input ``x`` (answer register ``answer``) and read y."""
    width = spec.circuit.width
    word = x | answer << len(spec.query)
    out = truth_table(spec.circuit, width, wires=range(width))[word] if width <= 12 else None
    if out is None:
        bits = [ElementarySystem((word >> w) & 1, 0) for w in range(width)]
        res = apply_circuit(spec.circuit, tuple(bits))
        out = sum(s.x << w for w, s in enumerate(res))
    return out


def answer_of(spec, out):
    return sum(((out >> w) & 1) << k for k, w in enumerate(spec.answer))


def check_function(spec):
    n = spec.n
    for x in range(1 << n):
        out = computational_action(spec, x)
        assert out & ((1 << n) - 1) == x, "query register must be unchanged"
        assert answer_of(spec, out) == spec.f(x)
        assert all(not (out >> a) & 1 for a in spec.ancillas), "ancillas must be restored"


class TestBitsOf:
    def test_string(self):
        assert bits_of("0101") == (5, 4)

    def test_int_needs_width(self):
        with pytest.raises(OracleError):
            bits_of(3)
        with pytest.raises(OracleError):
            bits_of(9, 3)

    def test_garbage(self):
        with pytest.raises(OracleError):
            bits_of("01a")


class TestBV:
    def test_zero_secret_is_empty(self):
        spec = bv_oracle("0000")
        assert len(spec.circuit) == 0
        assert all(spec.f(x) == 0 for x in range(16))

    def test_1011_uses_three_cnots(self):
        spec = bv_oracle("1011")
        assert [g.kind for g in spec.circuit.ops] == ["CNOT"] * 3
        check_function(spec)

    def test_single_bit(self):
        spec = bv_oracle("1")
        assert computational_action(spec, 1) == 0b11

    def test_phase_map(self):
        # (x, p)(a, b) -> (x, p ^ b*s)(a ^ f(x), b)
        spec = bv_oracle("101")
        state = tuple(ElementarySystem(1, 0) for _ in range(3)) + (ElementarySystem(0, 1),)
        out = apply_circuit(spec.circuit, state)
        assert [s.p for s in out[:3]] == [1, 0, 1]
        assert out[3] == ElementarySystem(0, 1)


class TestDJPromise:
    def test_constant_zero(self):
        spec = dj_promise_oracle(3, 0, 0, [3, 1, 4, 0, 7, 6, 2, 5])
        assert spec.function_string() == "0" * 8
        check_function(spec)

    def test_identity_perm_copies_top_bit(self):
        spec = dj_promise_oracle(3, 1, 0)
        assert all(spec.f(x) == x >> 2 for x in range(8))
        check_function(spec)

    def test_swap_zero_and_four(self):
        spec = dj_promise_oracle(3, 1, 0, [4, 1, 2, 3, 0, 5, 6, 7])
        assert spec.function_string().count("1") == 4
        check_function(spec)

    @pytest.mark.parametrize("seed", range(5))
    def test_random_perms(self, seed):
        rnd = random.Random(seed)
        n = rnd.randint(1, 4)
        perm = list(range(1 << n))
        rnd.shuffle(perm)
        b0, b1 = rnd.randint(0, 1), rnd.randint(0, 1)
        spec = dj_promise_oracle(n, b0, b1, perm)
        check_function(spec)
        ones = spec.function_string().count("1")
        assert ones == (1 << (n - 1) if b0 else b1 << n)

    def test_bad_perm(self):
        with pytest.raises(OracleError):
            dj_promise_oracle(2, 1, 0, [0, 1, 1, 2])


class TestComparator:
    @pytest.mark.parametrize("x,a,want", [(9, 8, 1), (3, 8, 0)])
    def test_examples(self, x, a, want):
        n = 4
        table = truth_table(comparator_circuit(n), 2 * n)
        out = table[x | a << n]
        assert (out >> (2 * n + 1)) & 1 == want
        assert out & ((1 << 2 * n + 1) - 1) == x | a << n

    def test_exhaustive_three_bits(self):
        n = 3
        table = truth_table(comparator_circuit(n), 2 * n)
        for x, a in itertools.product(range(8), repeat=2):
            out = table[x | a << n]
            assert out == (x | a << n | int(x + a >= 8) << (2 * n + 1))


class TestDJDecision:
    def test_zero_is_constant_zero(self):
        assert dj_decision_oracle(3, 0).function_string() == "0" * 8

    def test_full_is_constant_one(self):
        assert dj_decision_oracle(3, 8).function_string() == "1" * 8

    def test_half_is_balanced(self):
        spec = dj_decision_oracle(3, 4)
        assert spec.function_string().count("1") == 4

    @pytest.mark.parametrize("a", [0, 1, 3, 5, 8])
    def test_weight_and_circuit(self, a):
        spec = dj_decision_oracle(3, a, [5, 2, 7, 0, 1, 6, 4, 3])
        assert spec.function_string().count("1") == a
        check_function(spec)

    def test_out_of_range(self):
        with pytest.raises(OracleError):
            dj_decision_oracle(2, 5)


class TestCatalog:
    def test_has_72_distinct_entries(self):
        cat = dj3_catalog()
        strings = [spec.params["function"] for spec in cat]
        assert len(cat) == 72 and len(set(strings)) == 72

    def test_every_entry_is_constant_or_balanced(self):
        for spec in dj3_catalog():
            assert spec.function_string().count("1") in (0, 4, 8)

    def test_first_entry_is_identity(self):
        first = dj3_catalog()[0]
        assert first.params["function"] == "00000000"
        assert len(first.circuit) == 0

    def test_majority_entry(self):
        maj = next(s for s in dj3_catalog() if s.params["function"] == "11101000")
        kinds = [g.kind for g in maj.circuit.ops]
        assert kinds.count("Toffoli") == 1 and "CNOT" in kinds

    def test_circuits_compute_their_strings(self):
        for spec in dj3_catalog():
            check_function(spec)
            assert spec.function_string() == spec.params["function"]

    def test_gate_counts_match_groups(self):
        for spec in dj3_catalog():
            kinds = [g.kind for g in spec.circuit.ops]
            assert kinds.count("Toffoli") == spec.params["toffolis"]
            assert kinds.count("CNOT") == spec.params["cnots"]

    def test_group_sizes(self):
        assert sum(len(v) for v in CATALOG_GROUPS.values()) == 72


@pytest.mark.parametrize("variant", "ABCD")
def test_majority_variants_compute_majority(variant):
    spec = majority_oracle(variant)
    assert spec.function_string() == "11101000"
    check_function(spec)


class TestGrover:
    def test_top_control_inverted_for_01(self):
        (g,) = grover_oracle(2, "01").circuit.ops
        assert g.kind == "NToffoli" and tuple(g.polarities) == (1, 0)

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_marks_only_xstar(self, n):
        for xs in range(1 << n):
            check_function(grover_oracle(n, format(xs, f"0{n}b")))

    @pytest.mark.parametrize("i", range(3))
    def test_neighbour_kickback(self, i):
        spec = grover_oracle(3, "110")
        x = 0b110 ^ (1 << i)
        state = tuple(ElementarySystem((x >> w) & 1, 0) for w in range(3)) + (ElementarySystem(0, 1),)
        out = apply_circuit(spec.circuit, state)
        assert [s.p for s in out[:3]] == [int(w == i) for w in range(3)]

    def test_width_mismatch(self):
        with pytest.raises(OracleError):
            grover_oracle(3, "01")


class TestSimon:
    def test_basis_for_101(self):
        basis = simon_basis(3, 0b101)
        assert set(basis[:2]) == {0b101, 0b010}
        assert bin(basis[2] & 0b101).count("1") % 2 == 1

    def test_101_layout(self):
        spec = simon_oracle(3, "101", 1)
        assert spec.params["basis"][:2] == ["010", "101"] or spec.params["basis"][:2] == ["101", "010"]
        ops = set(spec.circuit.ops)
        v = [int(b, 2) for b in spec.params["basis"]]
        k101 = v.index(0b101)
        k010 = v.index(0b010)
        assert {CNOT(0, 3 + k101), CNOT(2, 3 + k101), CNOT(1, 3 + k010)} <= ops

    @pytest.mark.parametrize("n", range(1, 7))
    def test_two_to_one_promise(self, n):
        rnd = random.Random(n)
        s = rnd.randrange(1, 1 << n)
        perm = list(range(1 << n))
        rnd.shuffle(perm)
        spec = simon_oracle(n, format(s, f"0{n}b"), 1, perm)
        assert all(spec.f(x) == spec.f(x ^ s) for x in range(1 << n))
        assert len({spec.f(x) for x in range(1 << n)}) == 1 << (n - 1)

    @pytest.mark.parametrize("n", range(1, 7))
    def test_one_to_one(self, n):
        rnd = random.Random(100 + n)
        perm = list(range(1 << n))
        rnd.shuffle(perm)
        spec = simon_oracle(n, format(rnd.randrange(1 << n), f"0{n}b"), 0, perm)
        assert sorted(spec.f(x) for x in range(1 << n)) == list(range(1 << n))

    @pytest.mark.parametrize("variant", ["zero_target", "xor_target"])
    def test_circuit_matches_f(self, variant):
        spec = simon_oracle(3, "110", 1, [3, 0, 6, 5, 1, 2, 7, 4], variant)
        check_function(spec)

    def test_xor_target_xors(self):
        spec = simon_oracle(2, "11", 1, [2, 0, 3, 1], "xor_target")
        for x, y in itertools.product(range(4), repeat=2):
            out = computational_action(spec, x, y)
            assert answer_of(spec, out) == y ^ spec.f(x)

    def test_inconsistent_promise(self):
        with pytest.raises(OracleError):
            simon_oracle(3, "000", 1)
        with pytest.raises(OracleError):
            simon_oracle(3, "101", 2)


class TestShorMultipliers:
    def test_times_eight(self):
        spec = shor15_multiplier(8)
        out = truth_table(spec.circuit, 5)[1 | 1 << 1]
        assert out >> 1 == 8

    def test_seven_squared_is_times_four(self):
        spec = shor15_multiplier(7, power=2)
        assert spec.params["multiplier"] == 4
        assert truth_table(spec.circuit, 5)[1 | 3 << 1] >> 1 == 12

    @pytest.mark.parametrize("a", [4, 11])
    def test_identity_squares_are_empty(self, a):
        assert len(shor15_multiplier(a, power=2).circuit) == 0

    @pytest.mark.parametrize("layout", ["fredkin", "synthesized"])
    @pytest.mark.parametrize("a", SHOR_ELEMENTS)
    @pytest.mark.parametrize("power", [1, 2])
    def test_truth_tables(self, a, power, layout):
        spec = shor15_multiplier(a, power, layout)
        m = pow(a, 1 << (power - 1), 15)
        table = truth_table(spec.circuit, 5)
        for y in range(1, 15):
            assert table[y << 1] == y << 1
            assert table[1 | y << 1] == 1 | (y * m % 15) << 1

    def test_invalid_base(self):
        with pytest.raises(OracleError):
            shor15_multiplier(5)
