"""Shared numeric identifiers for the compute kernels.

Both backends (pure Python and the compiled extension) implement the same
contract in terms of these ids; keep the two in sync.
"""

# decision-problem kinds for decide() / search_witness()
K_NONE = 0
K_REACH = 1
K_ALTREACH = 2
K_HP_0MAX = 3
K_HP_01 = 4
K_HP_TWO_POINTS = 5
K_MONO_TRIANGLE = 6
K_CO_MONO_TRIANGLE = 7
K_THREE_DM = 8
K_LONGEST_PATH = 9

# formula VM opcodes
OP_FALSE = 0
OP_TRUE = 1
OP_NOT = 2
OP_AND = 3
OP_OR = 4
OP_IMPLIES = 5
OP_IFF = 6
OP_FORALL = 7
OP_EXISTS = 8
OP_ATOM = 9
OP_EQ = 10
OP_LE = 11
OP_BIT = 12
OP_SUC = 13
