"""Expected values computed once by ``oracles.py`` and frozen here."""

# -log2 beta for the erasure pair, d=2, p=1/2, eps=1/20, exact rationals
ERASURE_D2_P05_EPS005 = {
    1: 0.5145731728297582,
    2: 0.9643760902692786,
    100: 46.17161882356426,
    500: 237.5306412801685,
    1000: 480.45610278840064,
}

# n = 1 grid: (d, p, eps) -> bits
ERASURE_N1 = {
    (2, 0.1, 0.05): 1.0,
    (2, 0.1, 0.3): 1.5145731728297582,
    (2, 0.1, 0.7): 2.736965594166206,
    (2, 0.5, 0.05): 0.5145731728297582,
    (2, 0.5, 0.3): 1.15200309344505,
    (2, 0.5, 0.7): 2.736965594166206,
    (2, 0.9, 0.05): 0.15200309344504997,
    (2, 0.9, 0.3): 0.6214883767462702,
    (2, 0.9, 0.7): 2.0,
    (3, 0.1, 0.05): 1.5145731728297582,
    (3, 0.1, 0.3): 2.0995356735509145,
    (3, 0.1, 0.7): 3.321928094887362,
    (3, 0.5, 0.05): 0.6974372299795687,
    (3, 0.5, 0.3): 1.4474589769712212,
    (3, 0.5, 0.7): 3.321928094887362,
    (3, 0.9, 0.05): 0.17897014104531936,
    (3, 0.9, 0.3): 0.658963082164933,
    (3, 0.9, 0.7): 2.0995356735509145,
}

ERASURE_N2_D2_P025_EPS01 = 1.6925714748077527

# classical hypothesis tests solved as linear programs
CLASSICAL_DH = [
    (([0.5, 0.3, 0.2], [0.2, 0.3, 0.5], 0.1), 0.4150374992788438),
    (([0.7, 0.2, 0.1, 0.0], [0.1, 0.2, 0.3, 0.4], 0.25), 2.7369655941662057),
]
