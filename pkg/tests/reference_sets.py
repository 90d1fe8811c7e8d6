"""Published representative lists for T_1, T_2, T_3 (closed under permutation later)."""

T1 = [(0,), (1,)]

T2 = [(0, 0), (1, 1), (-1, 1), (0, 1), (1, 2), (2, 4)]

T3 = [
    (0, 0, 0), (1, 1, 1),
    (-1, -1, 1), (0, 0, 1), (1, 1, -1), (1, 1, 0), (1, 1, 2), (2, 2, 1), (2, 2, 4), (4, 4, 2),
    (1, -2, -1), (1, -1, 0), (1, -1, 2), (1, 0, 2), (1, 2, 3), (1, 2, 4),
    (2, 4, -2), (2, 4, 0), (2, 4, 6), (2, 4, 8), (2, 4, 16),
    (-4, -2, 2), (-2, -1, 2), (3, 6, 9), (4, 8, 16),
]
