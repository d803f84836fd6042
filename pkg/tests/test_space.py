import itertools

import numpy as np
import pytest

from hierperc.errors import CapacityError, InvalidInputError
from hierperc.space import (AnnulusSpec, BallSpec, HAddress, ball_ids,
                            enumerate_ball, hdist, hdist_from, hdist_ids,
                            shell_pair_count)


def addr(i, level=3, N=2):
    return HAddress(i, level, N)


class TestHDist:
    def test_zero_iff_equal(self):
        for i in range(8):
            assert hdist(addr(i), addr(i)) == 0

    def test_digit_one_difference(self):
        # ids 1 and 0 differ only in the least significant digit
        assert hdist(addr(1), addr(0)) == 1

    def test_base3_example(self):
        # digits (0,1,2) vs (0,1,0): ids 0+3+18=21 and 0+3+0=3, differ at 3
        x = HAddress(21, 3, 3)
        y = HAddress(3, 3, 3)
        assert hdist(x, y) == 3

    def test_symmetry_exhaustive(self):
        for i, j in itertools.product(range(8), repeat=2):
            assert hdist(addr(i), addr(j)) == hdist(addr(j), addr(i))

    def test_mismatched_inputs_rejected(self):
        with pytest.raises(InvalidInputError):
            hdist(HAddress(0, 3, 2), HAddress(0, 3, 3))
        with pytest.raises(InvalidInputError):
            hdist(HAddress(0, 3, 2), HAddress(0, 4, 2))

    def test_vectorised_matches_scalar(self):
        ids = np.arange(27)
        d = hdist_from(ids, 5, 3)
        for i in ids:
            assert d[i] == hdist_ids(int(i), 5, 3)

    def test_strong_triangle_inequality_small(self):
        # exhaustive on N=3, level 3 (the larger cases live in acceptance)
        n = 27
        D = np.array([[hdist_ids(i, j, 3) for j in range(n)] for i in range(n)])
        lhs = D[:, np.newaxis, :]  # d(x, y) broadcast over z
        rhs = np.maximum(D[:, :, np.newaxis], D[np.newaxis, :, :])
        assert (lhs.transpose(0, 2, 1) <= rhs).all()


class TestBalls:
    def test_singleton(self):
        b = BallSpec(addr(5), 0)
        assert [a.id for a in enumerate_ball(b)] == [5]

    def test_full_ball_is_all_ids_below_capacity(self):
        b = BallSpec(HAddress(0, 2, 2), 2)
        assert [a.id for a in enumerate_ball(b)] == [0, 1, 2, 3]

    def test_members_within_distance(self):
        b = BallSpec(HAddress(13, 4, 2), 3)
        for a in enumerate_ball(b):
            assert hdist(b.center, a) <= 3

    def test_every_member_is_a_center(self):
        # two balls of equal diameter are identical or disjoint
        for center in range(16):
            ids = set(ball_ids(center, 2, 2).tolist())
            for other in range(16):
                other_ids = set(ball_ids(other, 2, 2).tolist())
                assert other_ids == ids or not (other_ids & ids)

    def test_capacity_error(self):
        b = BallSpec(HAddress(0, 30, 2), 30)
        with pytest.raises(CapacityError):
            enumerate_ball(b)

    def test_annulus_size(self):
        a = AnnulusSpec(2, 5)
        assert a.size(2) == 2**5 - 2**2
        assert a.size(3) == 3**5 - 3**2
        with pytest.raises(InvalidInputError):
            AnnulusSpec(3, 3)


class TestShellPairCount:
    def test_single_pair(self):
        assert shell_pair_count(2, 1, 1) == 1

    def test_exhaustive_enumeration_oracle(self):
        # all 6 pairs on the 4 vertices of the N=2, k=2 ball
        counts = {1: 0, 2: 0}
        for i, j in itertools.combinations(range(4), 2):
            counts[hdist_ids(i, j, 2)] += 1
        assert counts == {1: 2, 2: 4}
        assert shell_pair_count(2, 2, 1) == 2
        assert shell_pair_count(2, 2, 2) == 4

    @pytest.mark.parametrize("N", [2, 3])
    @pytest.mark.parametrize("k", [1, 2, 3, 4, 5])
    def test_sum_identity(self, N, k):
        total = sum(shell_pair_count(N, k, j) for j in range(1, k + 1))
        n = N**k
        assert total == n * (n - 1) // 2

    def test_range_errors(self):
        with pytest.raises(InvalidInputError):
            shell_pair_count(2, 3, 0)
        with pytest.raises(InvalidInputError):
            shell_pair_count(2, 3, 4)


class TestHAddress:
    def test_validation(self):
        with pytest.raises(InvalidInputError):
            HAddress(4, 2, 2)
        with pytest.raises(InvalidInputError):
            HAddress(-1, 2, 2)
        with pytest.raises(InvalidInputError):
            HAddress(0, 2, 1)

    def test_digits(self):
        a = HAddress(21, 3, 3)  # 21 = 0 + 1*3 + 2*9
        assert a.digits() == [0, 1, 2]
