import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rydspec.angular import (
    HalfInt,
    RationalRoot,
    SphericalPolarization,
    dipole_matrix_element,
    m_values,
    wigner3j,
    wigner_small_d,
)
from rydspec.exceptions import DomainError

from oracles import racah_3j_float, wigner_d_factorial

HALF = HalfInt(1)


class TestHalfInt:
    @pytest.mark.parametrize(
        "text, twice",
        [("1/2", 1), ("3/2", 3), ("0.5", 1), ("-1/2", -1), ("2", 4), (" 5/2 ", 5), (1, 2), (1.5, 3)],
    )
    def test_parse(self, text, twice):
        assert HalfInt.of(text).twice_value == twice

    @pytest.mark.parametrize("bad", ["1/3", "0.25", "abc", 0.3, float("nan"), True, None])
    def test_parse_rejects(self, bad):
        with pytest.raises(DomainError):
            HalfInt.of(bad)

    def test_str_roundtrip(self):
        for t in range(-9, 10):
            h = HalfInt(t)
            assert HalfInt.of(str(h)) == h

    def test_arithmetic(self):
        assert HalfInt.of("1/2") + HalfInt.of("1/2") == HalfInt.of(1)
        assert -HalfInt.of("3/2") == HalfInt.of("-3/2")
        assert HalfInt.of(2).value == Fraction(2)

    def test_m_values(self):
        assert [str(m) for m in m_values("3/2")] == ["-3/2", "-1/2", "1/2", "3/2"]
        with pytest.raises(DomainError):
            m_values("-1/2")


class TestRationalRoot:
    def test_lowest_terms(self):
        r = RationalRoot(1, 2, 12)
        assert (r.numerator, r.denominator) == (1, 6)

    def test_zero_sign(self):
        assert RationalRoot(1, 0, 5) == RationalRoot(0, 0, 1)
        with pytest.raises(DomainError):
            RationalRoot(0, 1, 2)

    def test_multiply(self):
        prod = RationalRoot(1, 3, 2) * RationalRoot(-1, 1, 6)
        assert prod == RationalRoot(-1, 1, 4)
        assert float(prod) == pytest.approx(-0.5)


class TestWigner3j:
    def test_spin_half_prefactor_anchor(self):
        # the 3-j behind the 1/(2 sqrt 6) prefactor of the S1/2-P1/2 coupling
        assert wigner3j("1/2", 1, "1/2", "1/2", 0, "-1/2") == RationalRoot(1, 1, 6)

    def test_m_sum_selection(self):
        assert wigner3j("1/2", 1, "1/2", "1/2", 0, "1/2") == RationalRoot(0, 0)

    def test_derived_value(self):
        oracle = racah_3j_float(1, 1, 1, 1, 0, -1)
        value = wigner3j(1, 1, 1, 1, 0, -1)
        assert value == RationalRoot(-1, 1, 6)
        assert float(value) == pytest.approx(oracle, abs=1e-15)

    def test_triangle_violation_is_zero(self):
        assert not wigner3j("1/2", 1, "5/2", "1/2", 0, "-1/2")

    @pytest.mark.parametrize(
        "args", [("1/2", 1, "1/2", "1/2", 0, "1"), (1, 1, 1, 2, 0, -2), (1, 1, 1, "1/2", 0, "-1/2")]
    )
    def test_invalid_quantum_numbers(self, args):
        with pytest.raises(DomainError):
            wigner3j(*args)

    def test_too_large_j(self):
        with pytest.raises(DomainError):
            wigner3j(11, 1, 11, 0, 0, 0)

    def test_against_float_oracle(self):
        for tj in itertools.product(range(0, 6), repeat=3):
            for tm in itertools.product(*[range(-t, t + 1, 2) for t in tj]):
                exact = float(wigner3j(*[HalfInt(x) for x in tj + tm]))
                ref = racah_3j_float(*[x / 2 for x in tj + tm])
                assert exact == pytest.approx(ref, abs=1e-13)

    def test_against_sympy(self):
        sympy_wigner = pytest.importorskip("sympy.physics.wigner")
        from sympy import Rational

        for tj in [(3, 2, 5), (4, 4, 2), (7, 2, 7), (8, 6, 4)]:
            for tm in itertools.product(*[range(-t, t + 1, 2) for t in tj[:2]]):
                m3 = -(tm[0] + tm[1])
                if abs(m3) > tj[2]:
                    continue
                args = tj + tm + (m3,)
                ref = sympy_wigner.wigner_3j(*[Rational(x, 2) for x in args])
                mine = wigner3j(*[HalfInt(x) for x in args])
                assert mine.square == Fraction(str(ref**2))
                assert mine.sign == int(bool(ref > 0)) - int(bool(ref < 0))


def _jm_triples(max_twice=8):
    def build(draw):
        j1 = draw(st.integers(0, max_twice))
        j2 = draw(st.integers(0, max_twice))
        j3 = draw(st.sampled_from([j for j in range(abs(j1 - j2), j1 + j2 + 1, 2) if j <= max_twice] or [j1 + j2]))
        m1 = draw(st.sampled_from(range(-j1, j1 + 1, 2)))
        m2 = draw(st.sampled_from(range(-j2, j2 + 1, 2)))
        return j1, j2, j3, m1, m2

    return st.composite(lambda draw: build(draw))()


@settings(max_examples=300, deadline=None)
@given(_jm_triples())
def test_3j_permutation_symmetry(t):
    j1, j2, j3, m1, m2 = t
    m3 = -(m1 + m2)
    if abs(m3) > j3:
        return
    J = [HalfInt(x) for x in (j1, j2, j3)]
    M = [HalfInt(x) for x in (m1, m2, m3)]
    base = wigner3j(*J, *M)
    phase = -1 if ((j1 + j2 + j3) // 2) % 2 else 1
    # even (cyclic) permutation
    assert wigner3j(J[1], J[2], J[0], M[1], M[2], M[0]) == base
    # odd permutation
    assert wigner3j(J[1], J[0], J[2], M[1], M[0], M[2]) == base * phase
    # m sign flip
    assert wigner3j(*J, *[-m for m in M]) == base * phase


@pytest.mark.parametrize("j1, j2", [(1, 1), (1, 2), (3, 2), (4, 4), (5, 2), (8, 3)])
def test_3j_orthogonality(j1, j2):
    for j3 in range(abs(j1 - j2), j1 + j2 + 1, 2):
        for m3 in range(-j3, j3 + 1, 2):
            total = Fraction(0)
            for m1 in range(-j1, j1 + 1, 2):
                m2 = -m3 - m1
                if abs(m2) > j2:
                    continue
                total += wigner3j(*map(HalfInt, (j1, j2, j3, m1, m2, m3))).square
            assert (j3 + 1) * total == 1


class TestWignerSmallD:
    def test_identity(self):
        np.testing.assert_array_equal(wigner_small_d("1/2", 0.0), np.eye(2))

    def test_spin_half_pattern(self):
        theta = 0.7
        c, s = math.cos(theta / 2), math.sin(theta / 2)
        np.testing.assert_allclose(wigner_small_d("1/2", theta), [[c, -s], [s, c]], atol=1e-15)

    def test_three_halves_against_factorial_sum(self):
        theta = math.pi / 3
        d = wigner_small_d("3/2", theta)
        # this matrix is exp(+i theta Jy): the transpose of the standard d^j(theta)
        np.testing.assert_allclose(d, wigner_d_factorial(1.5, theta).T, atol=1e-14)
        np.testing.assert_allclose(d @ d.T, np.eye(4), atol=1e-14)
        assert np.linalg.det(d) == pytest.approx(1.0, abs=1e-14)

    @pytest.mark.parametrize("twice_j", range(0, 10))
    def test_against_factorial_sum_all_j(self, twice_j):
        for theta in (0.3, 1.9, -2.4):
            np.testing.assert_allclose(
                wigner_small_d(HalfInt(twice_j), theta), wigner_d_factorial(twice_j / 2, theta).T, atol=1e-12
            )

    @settings(max_examples=100, deadline=None)
    @given(
        st.integers(0, 9),
        st.floats(-2 * math.pi, 2 * math.pi, allow_nan=False),
        st.floats(-2 * math.pi, 2 * math.pi, allow_nan=False),
    )
    def test_composition(self, twice_j, t1, t2):
        j = HalfInt(twice_j)
        lhs = wigner_small_d(j, t1) @ wigner_small_d(j, t2)
        np.testing.assert_allclose(lhs, wigner_small_d(j, t1 + t2), atol=1e-12)


class TestDipoleMatrixElement:
    R = 2.5

    def test_anchor_minus(self):
        assert dipole_matrix_element("1/2", "-1/2", "1/2", "-1/2", 0, self.R) == pytest.approx(-self.R / math.sqrt(6))

    def test_anchor_plus(self):
        assert dipole_matrix_element("1/2", "1/2", "1/2", "1/2", 0, self.R) == pytest.approx(self.R / math.sqrt(6))

    def test_selection_rule_zero(self):
        assert dipole_matrix_element("1/2", "-1/2", "1/2", "1/2", 0, self.R) == 0

    def test_delta_j_too_large(self):
        with pytest.raises(DomainError):
            dipole_matrix_element("1/2", "1/2", "5/2", "1/2", 0)

    @pytest.mark.parametrize("twice_j, twice_jp", [(1, 1), (1, 3), (3, 1), (2, 2), (2, 4), (5, 5), (4, 2)])
    def test_hermitian_consistency(self, twice_j, twice_jp):
        # reverse-direction reduced element follows <J||r||J'> = (-1)^(J-J') <J'||r||J>*
        J, Jp = HalfInt(twice_j), HalfInt(twice_jp)
        reverse = (-1) ** ((twice_j - twice_jp) // 2)
        for m in m_values(J):
            for mp in m_values(Jp):
                for q in (-1, 0, 1):
                    fwd = dipole_matrix_element(J, m, Jp, mp, q, self.R)
                    back = dipole_matrix_element(Jp, mp, J, m, -q, reverse * self.R)
                    assert fwd == pytest.approx((-1) ** q * np.conj(back), abs=1e-14)


class TestPolarization:
    def test_linear_mapping(self):
        th = 0.4
        p = SphericalPolarization.linear(th)
        assert p.q_minus == pytest.approx(math.sin(th) / math.sqrt(2))
        assert p.q_zero == pytest.approx(math.cos(th))
        assert p.q_plus == pytest.approx(-math.sin(th) / math.sqrt(2))

    def test_cartesian_matches_linear(self):
        th = 1.1
        a = SphericalPolarization.linear(th)
        b = SphericalPolarization.from_cartesian(math.sin(th), 0, math.cos(th))
        for q in (-1, 0, 1):
            assert a.component(q) == pytest.approx(b.component(q), abs=1e-15)

    def test_normalization_enforced(self):
        with pytest.raises(DomainError):
            SphericalPolarization(0, 1.01, 0)
